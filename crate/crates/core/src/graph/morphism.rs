use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

use super::{is_sigma_subgraph, Arrow, Graph, Id, Item, Labels};
use crate::terms::{Substitution, Term, TermError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum MorphismKind {
    Morphism,
    /// Injective on vertices and arrows.
    Matching,
    /// Bijective, with labels mapped exactly onto the target's labels.
    Isomorphism,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MorphismError {
    #[error("vertex map must be defined exactly on the source vertices (offending `{0}`)")]
    VertexDomain(Id),
    #[error("arrow map must be defined exactly on the source arrows (offending `{0}`)")]
    ArrowDomain(Id),
    #[error("substitution must be defined exactly on the source variables")]
    VariableDomain,
    #[error("`{0}` is not a vertex of the target")]
    MissingVertex(Id),
    #[error("`{0}` is not an arrow of the target")]
    MissingArrow(Id),
    #[error("arrow `{0}`: source is not preserved")]
    Source(Id),
    #[error("arrow `{0}`: target is not preserved")]
    Target(Id),
    #[error("label `{term}` of `{item}` is not mapped into the target labels")]
    Label { item: Item, term: Term },
    #[error("the subgraph is not a Σ-subgraph of the morphism's source")]
    NotSigmaSubgraph,
    #[error("`{0}` is in the range of the first morphism but not in the domain of the second")]
    Composition(Id),
    #[error("morphism is not invertible")]
    NotInvertible,
    #[error(transparent)]
    Term(#[from] TermError),
}

/// A vertex map, an arrow map and a substitution on label variables.
///
/// The graphs are not stored: the same maps are checked against explicit
/// source and target graphs by [`Morphism::classify`].
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Morphism {
    pub vertices: BTreeMap<Id, Id>,
    pub arrows: BTreeMap<Id, Id>,
    pub subst: Substitution,
}

impl Morphism {
    pub fn identity(g: &Graph) -> Self {
        Morphism {
            vertices: g.vertex_ids().map(|v| (v.clone(), v.clone())).collect(),
            arrows: g.arrow_ids().map(|a| (a.clone(), a.clone())).collect(),
            subst: g
                .varset()
                .iter()
                .map(|v| (v.clone(), Term::var(v.clone())))
                .collect(),
        }
    }

    pub fn map_item(&self, item: &Item) -> Option<Item> {
        match item {
            Item::Vertex(v) => self.vertices.get(v).cloned().map(Item::Vertex),
            Item::Arrow(a) => self.arrows.get(a).cloned().map(Item::Arrow),
        }
    }

    pub fn is_injective(&self) -> bool {
        let vs: BTreeSet<&Id> = self.vertices.values().collect();
        let as_: BTreeSet<&Id> = self.arrows.values().collect();
        vs.len() == self.vertices.len() && as_.len() == self.arrows.len()
    }

    /// Checks every morphism condition of `self` from `source` to `target`
    /// and reports the strongest kind it satisfies.
    pub fn classify(&self, source: &Graph, target: &Graph) -> Result<MorphismKind, MorphismError> {
        if let Some(v) = symmetric_mismatch(self.vertices.keys(), source.vertex_ids()) {
            return Err(MorphismError::VertexDomain(v));
        }
        if let Some(a) = symmetric_mismatch(self.arrows.keys(), source.arrow_ids()) {
            return Err(MorphismError::ArrowDomain(a));
        }
        if !self.subst.domain().eq(source.varset().iter()) {
            return Err(MorphismError::VariableDomain);
        }
        for v in self.vertices.values() {
            if !target.has_vertex(v) {
                return Err(MorphismError::MissingVertex(v.clone()));
            }
        }
        for (a, arrow) in source.arrows() {
            let image = &self.arrows[a];
            let b = target
                .arrow(image)
                .ok_or_else(|| MorphismError::MissingArrow(image.clone()))?;
            if self.vertices[&arrow.src] != b.src {
                return Err(MorphismError::Source(a.clone()));
            }
            if self.vertices[&arrow.tgt] != b.tgt {
                return Err(MorphismError::Target(a.clone()));
            }
        }
        let mut exact = true;
        for item in source.items() {
            let mapped = self
                .subst
                .apply_set(source.labels(&item).expect("item of source"))?;
            let image = self.map_item(&item).expect("domain checked");
            let host = target.labels(&image).expect("range checked");
            if let Some(term) = mapped.iter().find(|t| !host.contains(*t)) {
                return Err(MorphismError::Label {
                    item,
                    term: term.clone(),
                });
            }
            exact &= &mapped == host;
        }
        if !self.is_injective() {
            return Ok(MorphismKind::Morphism);
        }
        let onto = self.vertices.len() == target.vertex_count()
            && self.arrows.len() == target.arrow_count();
        let renaming = self.subst.as_renaming().is_some_and(|r| {
            let vals: BTreeSet<_> = r.values().collect();
            vals.into_iter().eq(target.varset().iter())
        });
        if onto && exact && renaming {
            Ok(MorphismKind::Isomorphism)
        } else {
            Ok(MorphismKind::Matching)
        }
    }

    /// The inverse of a bijective morphism whose substitution is a renaming.
    pub fn inverse(&self) -> Result<Morphism, MorphismError> {
        if !self.is_injective() {
            return Err(MorphismError::NotInvertible);
        }
        let renaming = self
            .subst
            .as_renaming()
            .ok_or(MorphismError::NotInvertible)?;
        Ok(Morphism {
            vertices: self
                .vertices
                .iter()
                .map(|(a, b)| (b.clone(), a.clone()))
                .collect(),
            arrows: self
                .arrows
                .iter()
                .map(|(a, b)| (b.clone(), a.clone()))
                .collect(),
            subst: renaming
                .into_iter()
                .map(|(a, b)| (b, Term::var(a)))
                .collect(),
        })
    }
}

fn symmetric_mismatch<'a>(
    a: impl Iterator<Item = &'a Id>,
    b: impl Iterator<Item = &'a Id>,
) -> Option<Id> {
    let a: BTreeSet<&Id> = a.collect();
    let b: BTreeSet<&Id> = b.collect();
    a.symmetric_difference(&b).next().map(|id| (*id).clone())
}

impl fmt::Display for Morphism {
    /// Pair-set notation: `{⟨x,1⟩, …, ⟨u,b⟩}` with vertices, arrows, then variables.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        let mut first = true;
        let mut pair = |f: &mut fmt::Formatter<'_>, a: &dyn fmt::Display, b: &dyn fmt::Display| {
            let sep = if first { "" } else { ", " };
            first = false;
            write!(f, "{sep}⟨{a},{b}⟩")
        };
        for (a, b) in &self.vertices {
            pair(f, a, b)?;
        }
        for (a, b) in &self.arrows {
            pair(f, a, b)?;
        }
        for (v, t) in self.subst.iter() {
            pair(f, v, t)?;
        }
        f.write_str("}")
    }
}

/// `m2 ∘ m1`.
pub fn compose(m2: &Morphism, m1: &Morphism) -> Result<Morphism, MorphismError> {
    let vertices = m1
        .vertices
        .iter()
        .map(|(a, b)| {
            m2.vertices
                .get(b)
                .map(|c| (a.clone(), c.clone()))
                .ok_or_else(|| MorphismError::Composition(b.clone()))
        })
        .collect::<Result<_, _>>()?;
    let arrows = m1
        .arrows
        .iter()
        .map(|(a, b)| {
            m2.arrows
                .get(b)
                .map(|c| (a.clone(), c.clone()))
                .ok_or_else(|| MorphismError::Composition(b.clone()))
        })
        .collect::<Result<_, _>>()?;
    Ok(Morphism {
        vertices,
        arrows,
        subst: m2.subst.compose(&m1.subst)?,
    })
}

/// `α(F)`: the image of a Σ-subgraph `part` of `source`.
///
/// Adjacencies come from `target`; the label of an image item is the union
/// of the mapped labels of all its preimages in `part`.
pub fn image(
    m: &Morphism,
    source: &Graph,
    target: &Graph,
    part: &Graph,
) -> Result<Graph, MorphismError> {
    if !is_sigma_subgraph(part, source) {
        return Err(MorphismError::NotSigmaSubgraph);
    }
    let mut vertices: BTreeMap<Id, Labels> = BTreeMap::new();
    for (v, ls) in part.vertices() {
        let w = m
            .vertices
            .get(v)
            .ok_or_else(|| MorphismError::VertexDomain(v.clone()))?;
        if !target.has_vertex(w) {
            return Err(MorphismError::MissingVertex(w.clone()));
        }
        vertices
            .entry(w.clone())
            .or_default()
            .extend(m.subst.apply_set(ls)?);
    }
    let mut arrows: BTreeMap<Id, Arrow> = BTreeMap::new();
    for (a, arrow) in part.arrows() {
        let b = m
            .arrows
            .get(a)
            .ok_or_else(|| MorphismError::ArrowDomain(a.clone()))?;
        let host = target
            .arrow(b)
            .ok_or_else(|| MorphismError::MissingArrow(b.clone()))?;
        let labels = m.subst.apply_set(&arrow.labels)?;
        arrows
            .entry(b.clone())
            .or_insert_with(|| Arrow {
                src: host.src.clone(),
                tgt: host.tgt.clone(),
                labels: Labels::new(),
            })
            .labels
            .extend(labels);
    }
    for (b, arrow) in &arrows {
        for v in [&arrow.src, &arrow.tgt] {
            if !vertices.contains_key(v) {
                return Err(MorphismError::Source(b.clone()));
            }
        }
    }
    Ok(Graph::raw_parts(vertices, arrows, target.varset().clone()))
}
