//! Term-labelled directed multigraphs.
//!
//! A [`Graph`] has vertices and arrows with opaque ids, source and target
//! maps, and a finite set of terms on every vertex and arrow. Graphs whose
//! varset is empty (and whose labels are therefore ground) are the host
//! graphs that get rewritten; graphs over variables are rule components.

mod iso;
mod morphism;

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

use crate::terms::{Name, Term, Var};

pub use iso::{find_isomorphism, for_each_isomorphism, isomorphic, IsoMap, IsoSearch};
pub use morphism::{compose, image, Morphism, MorphismError, MorphismKind};

pub type Labels = BTreeSet<Term>;

/// Identifier of a vertex or an arrow.
///
/// `Fresh` ids are created by rewriting, one per right-hand-side item and
/// matching; they print as `item@key` and cannot be written in input files.
#[derive(Clone, PartialEq, Eq, Hash)]
pub enum Id {
    Named(Name),
    Fresh { item: Name, key: Name },
}

impl Id {
    pub fn named(name: impl Into<Name>) -> Self {
        Id::Named(name.into())
    }

    pub fn fresh(item: impl Into<Name>, key: impl Into<Name>) -> Self {
        Id::Fresh {
            item: item.into(),
            key: key.into(),
        }
    }

    pub fn is_fresh(&self) -> bool {
        matches!(self, Id::Fresh { .. })
    }
}

impl From<&str> for Id {
    fn from(s: &str) -> Self {
        Id::named(s)
    }
}

impl From<String> for Id {
    fn from(s: String) -> Self {
        Id::named(s)
    }
}

impl From<&Id> for Id {
    fn from(id: &Id) -> Self {
        id.clone()
    }
}

impl fmt::Display for Id {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Id::Named(n) => f.write_str(n),
            Id::Fresh { item, key } => write!(f, "{item}@{key}"),
        }
    }
}

impl fmt::Debug for Id {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl Ord for Id {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Id::Named(a), Id::Named(b)) => natural_cmp(a, b),
            (Id::Named(_), Id::Fresh { .. }) => Ordering::Less,
            (Id::Fresh { .. }, Id::Named(_)) => Ordering::Greater,
            (Id::Fresh { item: a, key: ka }, Id::Fresh { item: b, key: kb }) => {
                natural_cmp(a, b).then_with(|| natural_cmp(ka, kb))
            }
        }
    }
}

impl PartialOrd for Id {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Orders strings so that embedded numbers compare by value: `2 < 10`.
pub fn natural_cmp(a: &str, b: &str) -> Ordering {
    if a == b {
        return Ordering::Equal;
    }
    // ASCII digits never occur inside multi-byte sequences, so bytes suffice.
    let (x, y) = (a.as_bytes(), b.as_bytes());
    let (mut i, mut j) = (0, 0);
    while i < x.len() && j < y.len() {
        match (x[i].is_ascii_digit(), y[j].is_ascii_digit()) {
            (true, true) => {
                let (si, sj) = (i, j);
                while i < x.len() && x[i].is_ascii_digit() {
                    i += 1;
                }
                while j < y.len() && y[j].is_ascii_digit() {
                    j += 1;
                }
                let nx = trim_zeros(&x[si..i]);
                let ny = trim_zeros(&y[sj..j]);
                let ord = nx.len().cmp(&ny.len()).then_with(|| nx.cmp(ny));
                if ord != Ordering::Equal {
                    return ord;
                }
            }
            (true, false) => return Ordering::Less,
            (false, true) => return Ordering::Greater,
            (false, false) => {
                if x[i] != y[j] {
                    return x[i].cmp(&y[j]);
                }
                i += 1;
                j += 1;
            }
        }
    }
    match (i < x.len(), j < y.len()) {
        (false, false) => a.cmp(b),
        (false, true) => Ordering::Less,
        _ => Ordering::Greater,
    }
}

fn trim_zeros(digits: &[u8]) -> &[u8] {
    let n = digits.iter().take_while(|&&d| d == b'0').count();
    &digits[n..]
}

/// A vertex or an arrow of some graph.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Item {
    Vertex(Id),
    Arrow(Id),
}

impl Item {
    pub fn id(&self) -> &Id {
        match self {
            Item::Vertex(id) | Item::Arrow(id) => id,
        }
    }
}

impl fmt::Display for Item {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self.id(), f)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Arrow {
    pub src: Id,
    pub tgt: Id,
    pub labels: Labels,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GraphError {
    #[error("vertex `{0}` is defined twice")]
    DuplicateVertex(Id),
    #[error("arrow `{0}` is defined twice")]
    DuplicateArrow(Id),
    #[error("`{0}` is used both as a vertex and as an arrow")]
    VertexArrowClash(Id),
    #[error("arrow `{arrow}` refers to unknown vertex `{vertex}`")]
    DanglingArrow { arrow: Id, vertex: Id },
    #[error("label `{term}` of `{item}` uses variable `{var}` outside the graph's variables")]
    ForeignVariable { item: Item, term: Term, var: Var },
    #[error("`{0}` is not a vertex of the graph")]
    NotAVertex(Id),
    #[error("`{0}` is not an arrow of the graph")]
    NotAnArrow(Id),
}

/// A finite graph labelled by sets of terms over `varset`.
///
/// Vertex and arrow ids are kept disjoint, and every label is a term over
/// the graph's variables; equality is structural.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct Graph {
    vertices: BTreeMap<Id, Labels>,
    arrows: BTreeMap<Id, Arrow>,
    varset: BTreeSet<Var>,
}

impl Graph {
    /// An empty graph with ground labels.
    pub fn new() -> Self {
        Self::default()
    }

    /// An empty graph whose labels may use `varset`.
    pub fn with_varset(varset: impl IntoIterator<Item = Var>) -> Self {
        Graph {
            varset: varset.into_iter().collect(),
            ..Self::default()
        }
    }

    pub fn add_vertex(
        &mut self,
        id: impl Into<Id>,
        labels: impl IntoIterator<Item = Term>,
    ) -> Result<(), GraphError> {
        let id = id.into();
        if self.vertices.contains_key(&id) {
            return Err(GraphError::DuplicateVertex(id));
        }
        if self.arrows.contains_key(&id) {
            return Err(GraphError::VertexArrowClash(id));
        }
        let labels: Labels = labels.into_iter().collect();
        self.check_labels(&Item::Vertex(id.clone()), &labels)?;
        self.vertices.insert(id, labels);
        Ok(())
    }

    pub fn add_arrow(
        &mut self,
        id: impl Into<Id>,
        src: impl Into<Id>,
        tgt: impl Into<Id>,
        labels: impl IntoIterator<Item = Term>,
    ) -> Result<(), GraphError> {
        let id = id.into();
        if self.arrows.contains_key(&id) {
            return Err(GraphError::DuplicateArrow(id));
        }
        if self.vertices.contains_key(&id) {
            return Err(GraphError::VertexArrowClash(id));
        }
        let (src, tgt) = (src.into(), tgt.into());
        for v in [&src, &tgt] {
            if !self.vertices.contains_key(v) {
                return Err(GraphError::DanglingArrow {
                    arrow: id,
                    vertex: v.clone(),
                });
            }
        }
        let labels: Labels = labels.into_iter().collect();
        self.check_labels(&Item::Arrow(id.clone()), &labels)?;
        self.arrows.insert(id, Arrow { src, tgt, labels });
        Ok(())
    }

    fn check_labels(&self, item: &Item, labels: &Labels) -> Result<(), GraphError> {
        for t in labels {
            if let Some(var) = t.vars().into_iter().find(|v| !self.varset.contains(v)) {
                return Err(GraphError::ForeignVariable {
                    item: item.clone(),
                    term: t.clone(),
                    var,
                });
            }
        }
        Ok(())
    }

    pub fn varset(&self) -> &BTreeSet<Var> {
        &self.varset
    }

    /// Variables actually occurring in labels.
    pub fn label_vars(&self) -> BTreeSet<Var> {
        let mut out = BTreeSet::new();
        for labels in self
            .vertices
            .values()
            .chain(self.arrows.values().map(|a| &a.labels))
        {
            labels.iter().for_each(|t| t.collect_vars(&mut out));
        }
        out
    }

    pub fn is_ground(&self) -> bool {
        self.varset.is_empty()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn arrow_count(&self) -> usize {
        self.arrows.len()
    }

    pub fn vertices(&self) -> impl ExactSizeIterator<Item = (&Id, &Labels)> + Clone {
        self.vertices.iter()
    }

    pub fn arrows(&self) -> impl ExactSizeIterator<Item = (&Id, &Arrow)> + Clone {
        self.arrows.iter()
    }

    pub fn vertex_ids(&self) -> impl ExactSizeIterator<Item = &Id> + Clone {
        self.vertices.keys()
    }

    pub fn arrow_ids(&self) -> impl ExactSizeIterator<Item = &Id> + Clone {
        self.arrows.keys()
    }

    pub fn has_vertex(&self, id: &Id) -> bool {
        self.vertices.contains_key(id)
    }

    pub fn has_arrow(&self, id: &Id) -> bool {
        self.arrows.contains_key(id)
    }

    pub fn contains(&self, item: &Item) -> bool {
        match item {
            Item::Vertex(id) => self.has_vertex(id),
            Item::Arrow(id) => self.has_arrow(id),
        }
    }

    pub fn vertex_labels(&self, id: &Id) -> Option<&Labels> {
        self.vertices.get(id)
    }

    pub fn arrow(&self, id: &Id) -> Option<&Arrow> {
        self.arrows.get(id)
    }

    pub fn labels(&self, item: &Item) -> Option<&Labels> {
        match item {
            Item::Vertex(id) => self.vertices.get(id),
            Item::Arrow(id) => self.arrows.get(id).map(|a| &a.labels),
        }
    }

    /// All vertices then all arrows, in id order.
    pub fn items(&self) -> impl Iterator<Item = Item> + '_ {
        self.vertices
            .keys()
            .map(|v| Item::Vertex(v.clone()))
            .chain(self.arrows.keys().map(|a| Item::Arrow(a.clone())))
    }

    pub(crate) fn labels_mut(&mut self, item: &Item) -> Option<&mut Labels> {
        match item {
            Item::Vertex(id) => self.vertices.get_mut(id),
            Item::Arrow(id) => self.arrows.get_mut(id).map(|a| &mut a.labels),
        }
    }

    pub(crate) fn raw_parts(
        vertices: BTreeMap<Id, Labels>,
        arrows: BTreeMap<Id, Arrow>,
        varset: BTreeSet<Var>,
    ) -> Self {
        Graph {
            vertices,
            arrows,
            varset,
        }
    }

    pub(crate) fn parts_mut(&mut self) -> (&mut BTreeMap<Id, Labels>, &mut BTreeMap<Id, Arrow>) {
        (&mut self.vertices, &mut self.arrows)
    }

    /// The same graph over a different set of variables, provided every
    /// label still fits.
    pub fn with_vars(&self, varset: BTreeSet<Var>) -> Result<Graph, GraphError> {
        let g = Graph {
            varset,
            ..self.clone()
        };
        for item in g.items() {
            g.check_labels(&item, g.labels(&item).expect("item of g"))?;
        }
        Ok(g)
    }
}

impl fmt::Display for Graph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn labels(f: &mut fmt::Formatter<'_>, ls: &Labels) -> fmt::Result {
            f.write_str("{")?;
            for (i, t) in ls.iter().enumerate() {
                if i > 0 {
                    f.write_str(", ")?;
                }
                write!(f, "{t}")?;
            }
            f.write_str("}")
        }
        for (id, ls) in &self.vertices {
            write!(f, "node {id} ")?;
            labels(f, ls)?;
            f.write_str(";\n")?;
        }
        for (id, a) in &self.arrows {
            write!(f, "edge {id}: {} -> {} ", a.src, a.tgt)?;
            labels(f, &a.labels)?;
            f.write_str(";\n")?;
        }
        Ok(())
    }
}

/// A partial map from items to label sets; missing items stand for `∅`.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct LabellingFn {
    map: BTreeMap<Item, Labels>,
}

static NO_LABELS: Labels = BTreeSet::new();

impl LabellingFn {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&self, item: &Item) -> &Labels {
        self.map.get(item).unwrap_or(&NO_LABELS)
    }

    /// Adds `terms` to the labels of `item`.
    pub fn extend(&mut self, item: Item, terms: impl IntoIterator<Item = Term>) {
        let mut terms = terms.into_iter().peekable();
        if terms.peek().is_some() {
            self.map.entry(item).or_default().extend(terms);
        }
    }

    /// Items with a non-empty label set.
    pub fn support(&self) -> impl Iterator<Item = (&Item, &Labels)> {
        self.map.iter().filter(|(_, ls)| !ls.is_empty())
    }

    pub fn is_empty(&self) -> bool {
        self.map.values().all(BTreeSet::is_empty)
    }

    pub fn union(&self, other: &LabellingFn) -> LabellingFn {
        let mut out = self.clone();
        for (item, ls) in &other.map {
            out.extend(item.clone(), ls.iter().cloned());
        }
        out
    }

    pub fn intersection(&self, other: &LabellingFn) -> LabellingFn {
        let map = self
            .map
            .iter()
            .filter_map(|(item, ls)| {
                let common: Labels = ls.intersection(other.get(item)).cloned().collect();
                (!common.is_empty()).then(|| (item.clone(), common))
            })
            .collect();
        LabellingFn { map }
    }

    pub fn difference(&self, other: &LabellingFn) -> LabellingFn {
        let map = self
            .map
            .iter()
            .filter_map(|(item, ls)| {
                let rest: Labels = ls.difference(other.get(item)).cloned().collect();
                (!rest.is_empty()).then(|| (item.clone(), rest))
            })
            .collect();
        LabellingFn { map }
    }

    /// The labelling function of a graph.
    pub fn of_graph(g: &Graph) -> LabellingFn {
        let mut out = LabellingFn::new();
        for item in g.items() {
            let ls = g.labels(&item).expect("item of g").clone();
            out.extend(item, ls);
        }
        out
    }
}

impl FromIterator<(Item, Labels)> for LabellingFn {
    fn from_iter<I: IntoIterator<Item = (Item, Labels)>>(iter: I) -> Self {
        let mut out = LabellingFn::new();
        for (item, ls) in iter {
            out.extend(item, ls);
        }
        out
    }
}

impl fmt::Display for LabellingFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, (item, ls)) in self.support().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{item}↦{{")?;
            for (j, t) in ls.iter().enumerate() {
                if j > 0 {
                    f.write_str(", ")?;
                }
                write!(f, "{t}")?;
            }
            f.write_str("}")?;
        }
        f.write_str("}")
    }
}

/// `H < G`: the items of `h` are items of `g` with the same adjacencies.
///
/// Both graphs must also range over the same variables.
pub fn is_subgraph(h: &Graph, g: &Graph) -> bool {
    h.varset == g.varset
        && h.vertices.keys().all(|v| g.vertices.contains_key(v))
        && h.arrows.iter().all(|(id, a)| {
            g.arrows
                .get(id)
                .is_some_and(|b| a.src == b.src && a.tgt == b.tgt)
        })
}

/// `H ◁ G`: a subgraph whose labels are included pointwise in those of `g`.
pub fn is_sigma_subgraph(h: &Graph, g: &Graph) -> bool {
    is_subgraph(h, g)
        && h.vertices
            .iter()
            .all(|(v, ls)| ls.is_subset(&g.vertices[v]))
        && h.arrows
            .iter()
            .all(|(id, a)| a.labels.is_subset(&g.arrows[id].labels))
}

/// The Σ-subgraph of `g` generated by the vertex set `keep`.
pub fn generated_subgraph<'a>(
    g: &Graph,
    keep: impl IntoIterator<Item = &'a Id>,
) -> Result<Graph, GraphError> {
    let mut vertices = BTreeMap::new();
    for v in keep {
        let ls = g
            .vertices
            .get(v)
            .ok_or_else(|| GraphError::NotAVertex(v.clone()))?;
        vertices.insert(v.clone(), ls.clone());
    }
    let arrows = g
        .arrows
        .iter()
        .filter(|(_, a)| vertices.contains_key(&a.src) && vertices.contains_key(&a.tgt))
        .map(|(id, a)| (id.clone(), a.clone()))
        .collect();
    Ok(Graph::raw_parts(vertices, arrows, g.varset.clone()))
}

/// `G∖l`: removes labels pointwise.
pub fn remove_labels(g: &Graph, l: &LabellingFn) -> Result<Graph, GraphError> {
    let mut out = g.clone();
    for (item, ls) in l.support() {
        let labels = out.labels_mut(item).ok_or_else(|| match item {
            Item::Vertex(id) => GraphError::NotAVertex(id.clone()),
            Item::Arrow(id) => GraphError::NotAnArrow(id.clone()),
        })?;
        labels.retain(|t| !ls.contains(t));
    }
    Ok(out)
}

/// `G∖B`: removes the arrows `drop`.
pub fn remove_arrows<'a>(
    g: &Graph,
    drop: impl IntoIterator<Item = &'a Id>,
) -> Result<Graph, GraphError> {
    let mut out = g.clone();
    for a in drop {
        if !g.arrows.contains_key(a) {
            return Err(GraphError::NotAnArrow(a.clone()));
        }
        out.arrows.remove(a);
    }
    Ok(out)
}

/// `G∖W`: removes the vertices `drop` together with their adjacent arrows.
pub fn remove_vertices<'a>(
    g: &Graph,
    drop: impl IntoIterator<Item = &'a Id>,
) -> Result<Graph, GraphError> {
    let mut out = g.clone();
    for v in drop {
        if !g.vertices.contains_key(v) {
            return Err(GraphError::NotAVertex(v.clone()));
        }
        out.vertices.remove(v);
    }
    out.arrows
        .retain(|_, a| out.vertices.contains_key(&a.src) && out.vertices.contains_key(&a.tgt));
    Ok(out)
}

/// `G∖(W,B,l) = ((G∖l)∖B)∖W`.
pub fn remove(
    g: &Graph,
    vertices: &BTreeSet<Id>,
    arrows: &BTreeSet<Id>,
    labels: &LabellingFn,
) -> Result<Graph, GraphError> {
    let g = remove_labels(g, labels)?;
    let g = remove_arrows(&g, arrows)?;
    remove_vertices(&g, vertices)
}
