//! Automorphism groups of graphs and of families of Σ-subgraphs.

use std::collections::BTreeSet;
use std::ops::ControlFlow;

use thiserror::Error;

use crate::graph::{is_sigma_subgraph, Graph, Id, IsoSearch, Item, Labels};
use crate::join::join_into;
use crate::perm::{
    all_permutations, factorial, Carrier, GroupError, Perm, PermGroup, MAX_GROUP_ORDER,
};
use crate::terms::Term;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AutError {
    #[error("part {0} is not a Σ-subgraph of the ambient graph")]
    NotSigmaSubgraph(usize),
    #[error(transparent)]
    Group(#[from] GroupError),
}

/// `Aut(G)`: every permutation of vertices, arrows and variables mapping
/// `g` onto itself.
pub fn aut_graph(g: &Graph) -> Result<PermGroup, GroupError> {
    let search = IsoSearch::new(g, g);
    let mut elements = Vec::new();
    let flow = search.run(|m| {
        if elements.len() == MAX_GROUP_ORDER {
            return ControlFlow::Break(());
        }
        elements.push(Perm {
            vertices: m.vertices.clone(),
            arrows: m.arrows.clone(),
            vars: m.vars.clone(),
        });
        ControlFlow::Continue(())
    });
    if flow.is_break() {
        return Err(GroupError::TooLarge {
            limit: MAX_GROUP_ORDER,
        });
    }
    PermGroup::from_elements(Carrier::of_graph(g), elements)
}

const MARKER_SORT: &str = "#";

/// Relabels each part so that membership and per-part labels survive in a
/// single union graph: item `x` of part `i` gets the marker `#i` and
/// `#i(t)` for each of its labels `t` in that part.
fn decorated_union(g: &Graph, parts: &[&Graph]) -> Graph {
    let mut union = Graph::with_varset(g.varset().iter().cloned());
    for (i, part) in parts.iter().enumerate() {
        let symbol = format!("#{i}");
        let decorate = |ls: &Labels| -> Labels {
            std::iter::once(Term::constant(symbol.as_str(), MARKER_SORT))
                .chain(
                    ls.iter()
                        .map(|t| Term::app(symbol.as_str(), MARKER_SORT, vec![t.clone()])),
                )
                .collect()
        };
        let mut layer = Graph::with_varset(g.varset().iter().cloned());
        for (v, ls) in part.vertices() {
            layer
                .add_vertex(v.clone(), decorate(ls))
                .expect("part of g");
        }
        for (a, arrow) in part.arrows() {
            layer
                .add_arrow(
                    a.clone(),
                    arrow.src.clone(),
                    arrow.tgt.clone(),
                    decorate(&arrow.labels),
                )
                .expect("part of g");
        }
        join_into(&mut union, &layer).expect("Σ-subgraphs of one graph are joinable");
    }
    union
}

/// `Aut_G(H₁,…,Hₙ)`: permutations of the carrier of `g` (and of its
/// variables) that map every part onto itself.
///
/// Only the union of the parts constrains an element; vertices and arrows
/// of `g` outside every part are permuted freely.
pub fn aut_relative(g: &Graph, parts: &[&Graph]) -> Result<PermGroup, AutError> {
    if let Some(i) = parts.iter().position(|h| !is_sigma_subgraph(h, g)) {
        return Err(AutError::NotSigmaSubgraph(i));
    }
    let core = match parts {
        [] => PermGroup::trivial(Carrier::new([], [], g.varset().iter().cloned())),
        [h] => aut_graph(h)?,
        _ => aut_graph(&decorated_union(g, parts))?,
    };
    let core = if parts.is_empty() {
        // With no constraint every variable bijection is allowed.
        let n = g.varset().len();
        let carrier = core.carrier().clone();
        let elements = all_permutations(n).into_iter().map(|vars| Perm {
            vertices: vec![],
            arrows: vec![],
            vars,
        });
        PermGroup::from_elements(carrier, elements)?
    } else {
        core
    };
    extend_freely(g, &core)
}

/// `core ⋎ Sym(V_G∖V_core) ⋎ Sym(A_G∖A_core)`.
fn extend_freely(g: &Graph, core: &PermGroup) -> Result<PermGroup, AutError> {
    let inner = core.carrier();
    let carrier = Carrier::of_graph(g);
    let covered_v: BTreeSet<&Id> = inner.vertices.iter().collect();
    let covered_a: BTreeSet<&Id> = inner.arrows.iter().collect();
    let pos = |ids: &[Id], id: &Id| ids.binary_search(id).expect("carrier member");
    let inner_v: Vec<usize> = inner
        .vertices
        .iter()
        .map(|v| pos(&carrier.vertices, v))
        .collect();
    let inner_a: Vec<usize> = inner
        .arrows
        .iter()
        .map(|a| pos(&carrier.arrows, a))
        .collect();
    let free_v: Vec<usize> = (0..carrier.vertices.len())
        .filter(|&i| !covered_v.contains(&carrier.vertices[i]))
        .collect();
    let free_a: Vec<usize> = (0..carrier.arrows.len())
        .filter(|&i| !covered_a.contains(&carrier.arrows[i]))
        .collect();

    let too_large = GroupError::TooLarge {
        limit: MAX_GROUP_ORDER,
    };
    let total = factorial(free_v.len())
        .and_then(|x| factorial(free_a.len()).and_then(|y| x.checked_mul(y)))
        .and_then(|x| x.checked_mul(core.order()))
        .ok_or(too_large.clone())?;
    if total > MAX_GROUP_ORDER {
        return Err(too_large.into());
    }
    let perms_v = all_permutations(free_v.len());
    let perms_a = all_permutations(free_a.len());
    let mut elements = Vec::with_capacity(total);
    for p in core.elements() {
        let mut base = Perm::identity(&carrier);
        for (i, &j) in p.vertices.iter().enumerate() {
            base.vertices[inner_v[i]] = inner_v[j];
        }
        for (i, &j) in p.arrows.iter().enumerate() {
            base.arrows[inner_a[i]] = inner_a[j];
        }
        base.vars = p.vars.clone();
        for pv in &perms_v {
            for pa in &perms_a {
                let mut e = base.clone();
                for (i, &j) in pv.iter().enumerate() {
                    e.vertices[free_v[i]] = free_v[j];
                }
                for (i, &j) in pa.iter().enumerate() {
                    e.arrows[free_a[i]] = free_a[j];
                }
                elements.push(e);
            }
        }
    }
    Ok(PermGroup::from_elements(carrier, elements)?)
}

/// Whether the group element, read as a permutation of the ambient carrier,
/// maps `part` onto itself.
pub fn stabilizes(group: &PermGroup, p: &Perm, part: &Graph) -> bool {
    let m = group.to_morphism(p);
    part.items().all(|item| {
        let Some(image) = m.map_item(&item) else {
            return false;
        };
        let (Some(ls), Some(target)) = (part.labels(&item), part.labels(&image)) else {
            return false;
        };
        let adjacent = match (&item, &image) {
            (Item::Arrow(a), Item::Arrow(b)) => {
                let (x, y) = (part.arrow(a).expect("arrow"), part.arrow(b).expect("arrow"));
                m.vertices.get(&x.src) == Some(&y.src) && m.vertices.get(&x.tgt) == Some(&y.tgt)
            }
            _ => true,
        };
        adjacent && m.subst.apply_set(ls).is_ok_and(|mapped| &mapped == target)
    })
}
