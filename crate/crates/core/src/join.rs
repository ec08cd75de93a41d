//! Meets and joins of finite maps, graphs and morphisms.

use std::collections::BTreeMap;
use std::fmt::Display;

use thiserror::Error;

use crate::graph::{Arrow, Graph, Id, Labels, Morphism};
use crate::terms::{Substitution, Term, Var};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum JoinError {
    #[error("maps disagree on `{0}`")]
    MapConflict(String),
    #[error("graphs range over different variables")]
    VarsetMismatch,
    #[error("`{0}` is a vertex of one graph and an arrow of the other")]
    VertexArrowOverlap(Id),
    #[error("arrow `{0}` has different sources")]
    SourceConflict(Id),
    #[error("arrow `{0}` has different targets")]
    TargetConflict(Id),
    #[error("cannot join an empty family of graphs")]
    EmptyFamily,
}

/// `f ⋎ g`, defined when the maps agree on their common domain.
pub fn join_fn<K, V>(f: &BTreeMap<K, V>, g: &BTreeMap<K, V>) -> Result<BTreeMap<K, V>, JoinError>
where
    K: Ord + Clone + Display,
    V: Eq + Clone,
{
    let mut out = f.clone();
    for (k, v) in g {
        match out.get(k) {
            Some(w) if w != v => return Err(JoinError::MapConflict(k.to_string())),
            Some(_) => {}
            None => {
                out.insert(k.clone(), v.clone());
            }
        }
    }
    Ok(out)
}

/// `f ⋏ g`: the pairs common to both maps.
pub fn meet_fn<K, V>(f: &BTreeMap<K, V>, g: &BTreeMap<K, V>) -> BTreeMap<K, V>
where
    K: Ord + Clone,
    V: Eq + Clone,
{
    f.iter()
        .filter(|(k, v)| g.get(*k) == Some(*v))
        .map(|(k, v)| (k.clone(), v.clone()))
        .collect()
}

pub fn fns_joinable<K: Ord, V: Eq>(f: &BTreeMap<K, V>, g: &BTreeMap<K, V>) -> bool {
    f.iter().all(|(k, v)| g.get(k).is_none_or(|w| w == v))
}

fn check_joinable(h: &Graph, g: &Graph) -> Result<(), JoinError> {
    if h.varset() != g.varset() {
        return Err(JoinError::VarsetMismatch);
    }
    // walk the smaller graph, look up in the larger one
    let (small, big) = if h.vertex_count() + h.arrow_count() <= g.vertex_count() + g.arrow_count() {
        (h, g)
    } else {
        (g, h)
    };
    if let Some(v) = small.vertex_ids().find(|v| big.has_arrow(v)) {
        return Err(JoinError::VertexArrowOverlap(v.clone()));
    }
    if let Some(a) = small.arrow_ids().find(|a| big.has_vertex(a)) {
        return Err(JoinError::VertexArrowOverlap(a.clone()));
    }
    for (id, a) in small.arrows() {
        if let Some(b) = big.arrow(id) {
            if a.src != b.src {
                return Err(JoinError::SourceConflict(id.clone()));
            }
            if a.tgt != b.tgt {
                return Err(JoinError::TargetConflict(id.clone()));
            }
        }
    }
    Ok(())
}

/// Same variables, no id used as a vertex in one graph and an arrow in the
/// other, and agreeing adjacencies on shared arrows.
pub fn are_joinable(h: &Graph, g: &Graph) -> bool {
    check_joinable(h, g).is_ok()
}

/// `H ⊓ G`.
pub fn meet(h: &Graph, g: &Graph) -> Result<Graph, JoinError> {
    check_joinable(h, g)?;
    let vertices = h
        .vertices()
        .filter_map(|(v, ls)| {
            g.vertex_labels(v)
                .map(|ms| (v.clone(), ls.intersection(ms).cloned().collect::<Labels>()))
        })
        .collect();
    let arrows = h
        .arrows()
        .filter_map(|(id, a)| {
            g.arrow(id).map(|b| {
                let labels = a.labels.intersection(&b.labels).cloned().collect();
                (
                    id.clone(),
                    Arrow {
                        src: a.src.clone(),
                        tgt: a.tgt.clone(),
                        labels,
                    },
                )
            })
        })
        .collect();
    Ok(Graph::raw_parts(vertices, arrows, h.varset().clone()))
}

/// `H ⊔ G`.
pub fn join(h: &Graph, g: &Graph) -> Result<Graph, JoinError> {
    let mut out = h.clone();
    join_into(&mut out, g)?;
    Ok(out)
}

/// Joins `g` into `acc` in place.
pub fn join_into(acc: &mut Graph, g: &Graph) -> Result<(), JoinError> {
    check_joinable(acc, g)?;
    let (vertices, arrows) = acc.parts_mut();
    for (v, ls) in g.vertices() {
        vertices
            .entry(v.clone())
            .or_default()
            .extend(ls.iter().cloned());
    }
    for (id, a) in g.arrows() {
        arrows
            .entry(id.clone())
            .or_insert_with(|| Arrow {
                src: a.src.clone(),
                tgt: a.tgt.clone(),
                labels: Labels::new(),
            })
            .labels
            .extend(a.labels.iter().cloned());
    }
    Ok(())
}

/// `⨆ Gᵢ` for a non-empty, pairwise joinable family.
///
/// Joining one graph at a time is equivalent to the pairwise condition:
/// the running union is joinable with the next graph exactly when every
/// earlier member is.
pub fn join_family<'a>(family: impl IntoIterator<Item = &'a Graph>) -> Result<Graph, JoinError> {
    let mut family = family.into_iter();
    let mut acc = family.next().ok_or(JoinError::EmptyFamily)?.clone();
    for g in family {
        join_into(&mut acc, g)?;
    }
    Ok(acc)
}

fn subst_map(s: &Substitution) -> BTreeMap<Var, Term> {
    s.iter().map(|(v, t)| (v.clone(), t.clone())).collect()
}

/// `α ⋎ β`, componentwise.
pub fn join_morphisms(a: &Morphism, b: &Morphism) -> Result<Morphism, JoinError> {
    Ok(Morphism {
        vertices: join_fn(&a.vertices, &b.vertices)?,
        arrows: join_fn(&a.arrows, &b.arrows)?,
        subst: join_fn(&subst_map(&a.subst), &subst_map(&b.subst))?
            .into_iter()
            .collect(),
    })
}

/// `α ⋏ β`, componentwise.
pub fn meet_morphisms(a: &Morphism, b: &Morphism) -> Morphism {
    Morphism {
        vertices: meet_fn(&a.vertices, &b.vertices),
        arrows: meet_fn(&a.arrows, &b.arrows),
        subst: meet_fn(&subst_map(&a.subst), &subst_map(&b.subst))
            .into_iter()
            .collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::is_sigma_subgraph;
    use crate::terms::DEFAULT_SORT;
    use proptest::prelude::*;

    fn c(n: &str) -> Term {
        Term::constant(n, DEFAULT_SORT)
    }

    #[test]
    fn function_join_and_meet() {
        let f = BTreeMap::from([(1, 'a')]);
        let g = BTreeMap::from([(2, 'b')]);
        assert_eq!(
            join_fn(&f, &g).unwrap(),
            BTreeMap::from([(1, 'a'), (2, 'b')])
        );
        assert_eq!(join_fn(&f, &f).unwrap(), f);
        assert_eq!(meet_fn(&f, &f), f);
        let h = BTreeMap::from([(1, 'b')]);
        assert_eq!(join_fn(&f, &h), Err(JoinError::MapConflict("1".into())));
        assert!(meet_fn(&f, &h).is_empty());
    }

    #[test]
    fn arrow_conflicts() {
        let mut h = Graph::new();
        h.add_vertex("x", []).unwrap();
        h.add_vertex("y", []).unwrap();
        h.add_arrow("f", "x", "y", []).unwrap();
        let mut g = Graph::new();
        g.add_vertex("x", []).unwrap();
        g.add_vertex("y", []).unwrap();
        g.add_arrow("f", "y", "y", []).unwrap();
        assert!(!are_joinable(&h, &g));
        assert_eq!(join(&h, &g), Err(JoinError::SourceConflict("f".into())));

        let mut k = Graph::new();
        k.add_vertex("f", []).unwrap();
        assert_eq!(meet(&h, &k), Err(JoinError::VertexArrowOverlap("f".into())));
        assert_eq!(join_family([]), Err(JoinError::EmptyFamily));
        assert_eq!(join_family([&h]).unwrap(), h);
    }

    pub(crate) fn overlapping_pair() -> impl Strategy<Value = (Graph, Graph)> {
        let labels = || {
            proptest::collection::btree_set(
                prop_oneof![Just(c("a")), Just(c("b")), Just(c("c"))],
                0..3,
            )
        };
        (
            proptest::collection::vec((any::<bool>(), any::<bool>(), labels(), labels()), 1..6),
            proptest::collection::vec(
                (
                    0usize..6,
                    0usize..6,
                    any::<bool>(),
                    any::<bool>(),
                    labels(),
                    labels(),
                ),
                0..6,
            ),
        )
            .prop_map(|(vs, es)| {
                let n = vs.len();
                let mut h = Graph::new();
                let mut g = Graph::new();
                for (i, (in_h, in_g, lh, lg)) in vs.iter().enumerate() {
                    let id = format!("v{i}");
                    if *in_h || !in_g {
                        h.add_vertex(id.as_str(), lh.iter().cloned()).unwrap();
                    }
                    if *in_g {
                        g.add_vertex(id.as_str(), lg.iter().cloned()).unwrap();
                    }
                }
                for (j, (s, t, in_h, in_g, lh, lg)) in es.into_iter().enumerate() {
                    let (s, t) = (format!("v{}", s % n), format!("v{}", t % n));
                    let id = format!("e{j}");
                    let ends = |x: &Graph| {
                        x.has_vertex(&s.as_str().into()) && x.has_vertex(&t.as_str().into())
                    };
                    if in_h && ends(&h) {
                        h.add_arrow(id.as_str(), s.as_str(), t.as_str(), lh)
                            .unwrap();
                    }
                    if in_g && ends(&g) {
                        g.add_arrow(id.as_str(), s.as_str(), t.as_str(), lg)
                            .unwrap();
                    }
                }
                (h, g)
            })
    }

    proptest! {
        #[test]
        fn meet_below_join((h, g) in overlapping_pair()) {
            let m = meet(&h, &g).unwrap();
            let j = join(&h, &g).unwrap();
            prop_assert!(is_sigma_subgraph(&m, &h));
            prop_assert!(is_sigma_subgraph(&m, &g));
            prop_assert!(is_sigma_subgraph(&h, &j));
            prop_assert!(is_sigma_subgraph(&g, &j));
            prop_assert_eq!(&m, &meet(&g, &h).unwrap());
            prop_assert_eq!(&j, &join(&g, &h).unwrap());
            prop_assert_eq!(&join(&h, &h).unwrap(), &h);
            prop_assert_eq!(&meet(&h, &j).unwrap(), &h);
            prop_assert_eq!(&join(&h, &j).unwrap(), &j);
        }

        #[test]
        fn join_is_associative((h, g) in overlapping_pair(), (k, _) in overlapping_pair()) {
            if are_joinable(&h, &k) && are_joinable(&g, &k) {
                let left = join(&join(&h, &g).unwrap(), &k).unwrap();
                let right = join(&h, &join(&g, &k).unwrap()).unwrap();
                prop_assert_eq!(&left, &right);
                prop_assert_eq!(&left, &join_family([&h, &g, &k]).unwrap());
            }
        }
    }
}
