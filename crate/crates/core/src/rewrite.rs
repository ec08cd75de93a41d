//! Parallel rewriting: right-hand-side images, deletion specifications,
//! the delete-priority and preserve-priority constructions, and regularity.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::graph::{
    is_sigma_subgraph, remove, Arrow, Graph, GraphError, Id, Item, LabellingFn, Labels, Morphism,
};
use crate::join::{join_into, meet, JoinError};
use crate::rules::{enumerate_all, Origin, RuleMatch, RuleSet};
use crate::terms::Term;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RewriteError {
    #[error(transparent)]
    Join(#[from] JoinError),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

/// Which of the two parallel constructions to build.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Mode {
    /// `G⇓M`: deletions win over preservations.
    #[default]
    Min,
    /// `G⇑M`: preservations win over deletions.
    Max,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Min => "min",
            Mode::Max => "max",
        })
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("unknown mode `{0}` (expected `min` or `max`)")]
pub struct ParseModeError(String);

impl FromStr for Mode {
    type Err = ParseModeError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "min" => Ok(Mode::Min),
            "max" => Ok(Mode::Max),
            _ => Err(ParseModeError(s.to_owned())),
        }
    }
}

/// `G^μ` together with the lifted matching `μ̂: R → G^μ`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RhsImage {
    pub graph: Graph,
    pub lifted: Morphism,
}

fn fresh(item: &Id, key: &str) -> Id {
    Id::fresh(item.to_string(), key)
}

/// Where each vertex and arrow of `R` lands in `G^μ`, in template order.
fn landing(m: &RuleMatch) -> (Vec<Id>, Vec<Id>) {
    let effects = m.rule().effects();
    let key = if effects.creates {
        m.key()
    } else {
        String::new()
    };
    let land = |id: &Id, origin: Origin, images: &[Id]| match origin {
        Origin::Kept(i) => images[i].clone(),
        Origin::Fresh => fresh(id, &key),
    };
    let vertices = effects
        .rhs_vertices
        .iter()
        .map(|x| land(&x.id, x.origin, m.vertex_images()))
        .collect();
    let arrows = effects
        .rhs_arrows
        .iter()
        .map(|a| land(&a.id, a.origin, m.arrow_images()))
        .collect();
    (vertices, arrows)
}

fn rhs_graph(m: &RuleMatch) -> Graph {
    let effects = m.rule().effects();
    let (vs, as_) = landing(m);
    let vertices = effects
        .rhs_vertices
        .iter()
        .zip(&vs)
        .map(|(x, t)| (t.clone(), m.apply_set(&x.labels)))
        .collect();
    let arrows = effects
        .rhs_arrows
        .iter()
        .zip(as_)
        .map(|(a, t)| {
            let arrow = Arrow {
                src: vs[a.src].clone(),
                tgt: vs[a.tgt].clone(),
                labels: m.apply_set(&a.labels),
            };
            (t, arrow)
        })
        .collect();
    Graph::raw_parts(vertices, arrows, BTreeSet::new())
}

/// Builds `G^μ`: kept items of `R` land on their host images, the others
/// become fresh items tagged with the match key.
pub fn build_rhs_image(m: &RuleMatch) -> RhsImage {
    let effects = m.rule().effects();
    let (vs, as_) = landing(m);
    let lifted = Morphism {
        vertices: effects
            .rhs_vertices
            .iter()
            .map(|x| x.id.clone())
            .zip(vs)
            .collect(),
        arrows: effects
            .rhs_arrows
            .iter()
            .map(|a| a.id.clone())
            .zip(as_)
            .collect(),
        subst: m
            .rule()
            .vars()
            .iter()
            .cloned()
            .zip(m.values().iter().cloned())
            .collect(),
    };
    RhsImage {
        graph: rhs_graph(m),
        lifted,
    }
}

/// The vertices `W`, arrows `B` and labels `l` that a family of matchings
/// asks to delete.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct DeletionSpec {
    pub vertices: BTreeSet<Id>,
    pub arrows: BTreeSet<Id>,
    pub labels: LabellingFn,
}

impl DeletionSpec {
    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty() && self.arrows.is_empty() && self.labels.is_empty()
    }

    fn add(&mut self, m: &RuleMatch) {
        for_each_deletion(m, |item, dropped| {
            match &item {
                Item::Vertex(v) if dropped.is_none() => {
                    self.vertices.insert(v.clone());
                }
                Item::Arrow(a) if dropped.is_none() => {
                    self.arrows.insert(a.clone());
                }
                _ => {}
            }
            if let Some(ls) = dropped {
                self.labels.extend(item, ls);
            }
        });
    }
}

/// Calls `visit(host_item, None)` for every item `μ` deletes outright and
/// `visit(host_item, Some(labels))` for the labels it drops from each
/// matched item. Labels of an item outside `K` count as dropped as well.
fn for_each_deletion(m: &RuleMatch, mut visit: impl FnMut(Item, Option<Labels>)) {
    for d in &m.rule().effects().deletions {
        let image = m.slot(d.slot);
        if d.whole {
            visit(image.clone(), None);
        }
        if !d.labels.is_empty() {
            visit(image, Some(m.apply_set(&d.labels)));
        }
    }
}

pub fn deletion_spec(ms: &[RuleMatch]) -> DeletionSpec {
    let mut spec = DeletionSpec::default();
    for m in ms {
        spec.add(m);
    }
    spec
}

fn rhs_images(ms: &[RuleMatch]) -> Vec<Graph> {
    ms.iter().map(rhs_graph).collect()
}

/// `G⇓M = (G ⊔ ⨆G^μ)∖(W,B,l)`.
pub fn rewrite_min(g: &Graph, ms: &[RuleMatch]) -> Result<Graph, RewriteError> {
    let mut acc = g.clone();
    for image in rhs_images(ms) {
        join_into(&mut acc, &image)?;
    }
    let spec = deletion_spec(ms);
    Ok(remove(&acc, &spec.vertices, &spec.arrows, &spec.labels)?)
}

/// `G⇑M = G∖(W,B,l) ⊔ ⨆G^μ`.
pub fn rewrite_max(g: &Graph, ms: &[RuleMatch]) -> Result<Graph, RewriteError> {
    let spec = deletion_spec(ms);
    let mut acc = remove(g, &spec.vertices, &spec.arrows, &spec.labels)?;
    for image in rhs_images(ms) {
        join_into(&mut acc, &image)?;
    }
    Ok(acc)
}

pub fn rewrite(g: &Graph, ms: &[RuleMatch], mode: Mode) -> Result<Graph, RewriteError> {
    match mode {
        Mode::Min => rewrite_min(g, ms),
        Mode::Max => rewrite_max(g, ms),
    }
}

/// `μ(F)` for a Σ-subgraph `F` of the matched left-hand side. Adjacencies
/// follow from `μ` being a morphism, so the host is not needed.
fn match_image(m: &RuleMatch, part: &Graph) -> Graph {
    let mut vertices: BTreeMap<Id, Labels> = BTreeMap::new();
    for (v, ls) in part.vertices() {
        vertices
            .entry(m.vertex(v).expect("vertex of L").clone())
            .or_default()
            .extend(m.apply_set(ls));
    }
    let mut arrows: BTreeMap<Id, Arrow> = BTreeMap::new();
    for (a, arrow) in part.arrows() {
        arrows
            .entry(m.arrow(a).expect("arrow of L").clone())
            .or_insert_with(|| Arrow {
                src: m.vertex(&arrow.src).expect("vertex of L").clone(),
                tgt: m.vertex(&arrow.tgt).expect("vertex of L").clone(),
                labels: Labels::new(),
            })
            .labels
            .extend(m.apply_set(&arrow.labels));
    }
    Graph::raw_parts(vertices, arrows, BTreeSet::new())
}

/// Whether `mu` preserves `nu`: `ν̂(R) ⊓ μ(L) ◁ μ(K)`.
pub fn preserves(mu: &RuleMatch, nu: &RuleMatch) -> bool {
    let rhs = rhs_graph(nu);
    let lhs = match_image(mu, mu.rule().lhs());
    let kept = match_image(mu, mu.rule().kept());
    meet(&rhs, &lhs).is_ok_and(|overlap| is_sigma_subgraph(&overlap, &kept))
}

/// Per host item, the matches deleting it and, per dropped label, the
/// matches dropping it.
#[derive(Default)]
struct Footprint {
    items: BTreeMap<Item, Vec<usize>>,
    labels: BTreeMap<(Item, Term), Vec<usize>>,
}

impl Footprint {
    fn of(ms: &[RuleMatch]) -> Self {
        let mut fp = Footprint::default();
        for (i, m) in ms.iter().enumerate() {
            for_each_deletion(m, |item, dropped| match dropped {
                None => fp.items.entry(item).or_default().push(i),
                Some(ls) => {
                    for t in ls {
                        fp.labels.entry((item.clone(), t)).or_default().push(i);
                    }
                }
            });
        }
        fp
    }

    /// Matches whose deletions touch `image`, sorted and without repeats.
    fn hits(&self, image: &Graph) -> BTreeSet<usize> {
        let mut out = BTreeSet::new();
        let mut probe = |item: Item, ls: &Labels| {
            if let Some(who) = self.items.get(&item) {
                out.extend(who);
            }
            for t in ls {
                if let Some(who) = self.labels.get(&(item.clone(), t.clone())) {
                    out.extend(who);
                }
            }
        };
        for (v, ls) in image.vertices().filter(|(v, _)| !v.is_fresh()) {
            probe(Item::Vertex(v.clone()), ls);
        }
        for (a, arrow) in image.arrows().filter(|(a, _)| !a.is_fresh()) {
            probe(Item::Arrow(a.clone()), &arrow.labels);
        }
        out
    }
}

/// The first pair `(μ, ν)` in `ms` such that `μ` does not preserve `ν`.
///
/// Candidates come from intersecting each `G^ν` with the aggregated
/// deletions, so a regular family costs one pass; every reported pair is
/// confirmed with [`preserves`].
pub fn find_conflict(ms: &[RuleMatch]) -> Option<(RuleMatch, RuleMatch)> {
    let fp = Footprint::of(ms);
    if fp.items.is_empty() && fp.labels.is_empty() {
        return None;
    }
    for nu in ms {
        let image = rhs_graph(nu);
        for i in fp.hits(&image) {
            if !preserves(&ms[i], nu) {
                return Some((ms[i].clone(), nu.clone()));
            }
        }
    }
    None
}

/// Every match preserves every other.
pub fn is_regular(ms: &[RuleMatch]) -> bool {
    find_conflict(ms).is_none()
}

/// One step of full parallel rewriting with every matching of `rules`.
pub fn full_step(g: &Graph, rules: &RuleSet, mode: Mode) -> Result<Graph, RewriteError> {
    rewrite(g, &enumerate_all(rules, g), mode)
}

/// Rewriting with a single matching.
pub fn sequential_step(g: &Graph, m: &RuleMatch, mode: Mode) -> Result<Graph, RewriteError> {
    rewrite(g, std::slice::from_ref(m), mode)
}

/// Renames fresh vertices to `n1, n2, …` and fresh arrows to `e1, e2, …`
/// in id order, skipping names the graph already uses.
pub fn normalize_fresh(g: &Graph) -> Graph {
    let taken: BTreeSet<&Id> = g.vertex_ids().chain(g.arrow_ids()).collect();
    let mut counters: BTreeMap<&str, usize> = BTreeMap::new();
    let mut next = |prefix: &'static str| {
        let counter = counters.entry(prefix).or_default();
        loop {
            *counter += 1;
            let id = Id::named(format!("{prefix}{counter}"));
            if !taken.contains(&id) {
                return id;
            }
        }
    };
    let mut rename: BTreeMap<Id, Id> = BTreeMap::new();
    for v in g.vertex_ids().filter(|v| v.is_fresh()) {
        rename.insert(v.clone(), next("n"));
    }
    for a in g.arrow_ids().filter(|a| a.is_fresh()) {
        rename.insert(a.clone(), next("e"));
    }
    let map = |id: &Id| rename.get(id).unwrap_or(id).clone();
    let vertices = g.vertices().map(|(v, ls)| (map(v), ls.clone())).collect();
    let arrows = g
        .arrows()
        .map(|(a, arrow)| {
            let renamed = Arrow {
                src: map(&arrow.src),
                tgt: map(&arrow.tgt),
                labels: arrow.labels.clone(),
            };
            (map(a), renamed)
        })
        .collect();
    Graph::raw_parts(vertices, arrows, g.varset().clone())
}
