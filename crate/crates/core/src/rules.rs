//! Rules `⟨L, K, R⟩` and the enumeration of their matchings in a host graph.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::Arc;

use thiserror::Error;

use crate::graph::{is_sigma_subgraph, Graph, Id, Item, Labels, Morphism, MorphismKind};
use crate::join::{meet, JoinError};
use crate::terms::{apply_indexed, match_indexed, Name, Term, Var};

/// One violated clause of rule well-formedness.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RuleViolation {
    #[error("L, K and R must range over the same variables")]
    VarsetMismatch,
    #[error("L and R are not joinable: {0}")]
    NotJoinable(JoinError),
    #[error("the overlap of L and R is not a Σ-subgraph of K")]
    OverlapNotKept,
    #[error("K is not a Σ-subgraph of L")]
    KeptNotInLhs,
    #[error("variables {} occur in R but not in L", show_vars(.0))]
    RhsOnlyVariables(Vec<Var>),
    #[error("variables {} do not occur in L", show_vars(.0))]
    UnusedVariables(Vec<Var>),
}

fn show_vars(vs: &[Var]) -> String {
    vs.iter()
        .map(|v| v.name.to_string())
        .collect::<Vec<_>>()
        .join(", ")
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RuleError {
    #[error("rule `{name}` is ill-formed: {}", .violations.iter().map(ToString::to_string).collect::<Vec<_>>().join("; "))]
    Invalid {
        name: Name,
        violations: Vec<RuleViolation>,
    },
    #[error("rule name `{0}` is used twice")]
    DuplicateName(Name),
    #[error("rules `{0}` and `{1}` have the same left-hand side items")]
    SharedLhsItems(Name, Name),
    #[error("matching does not belong to rule `{0}`")]
    ForeignMatch(Name),
}

#[derive(Debug, PartialEq, Eq)]
struct RuleData {
    name: Name,
    lhs: Graph,
    kept: Graph,
    rhs: Graph,
    vertices: Vec<Id>,
    arrows: Vec<Id>,
    vars: Vec<Var>,
    plan: Plan,
    effects: Effects,
}

/// A rewrite rule. Cheap to clone.
#[derive(Clone)]
pub struct Rule(Arc<RuleData>);

impl PartialEq for Rule {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0) || self.0 == other.0
    }
}

impl Eq for Rule {}

impl Hash for Rule {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.0.name.hash(state);
    }
}

impl fmt::Debug for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Rule")
            .field("name", &self.0.name)
            .field("lhs", &self.0.lhs)
            .field("kept", &self.0.kept)
            .field("rhs", &self.0.rhs)
            .finish()
    }
}

impl Rule {
    /// Builds a rule, reporting every violated well-formedness clause.
    pub fn new(
        name: impl Into<Name>,
        lhs: Graph,
        kept: Graph,
        rhs: Graph,
    ) -> Result<Rule, RuleError> {
        let name = name.into();
        let violations = validate(&lhs, &kept, &rhs);
        if !violations.is_empty() {
            return Err(RuleError::Invalid { name, violations });
        }
        Ok(Self::new_unchecked(name, lhs, kept, rhs))
    }

    /// Builds a rule without checking it; useful for testing diagnostics.
    pub fn new_unchecked(name: impl Into<Name>, lhs: Graph, kept: Graph, rhs: Graph) -> Rule {
        let vertices: Vec<Id> = lhs.vertex_ids().cloned().collect();
        let arrows: Vec<Id> = lhs.arrow_ids().cloned().collect();
        let vars: Vec<Var> = lhs.varset().iter().cloned().collect();
        let plan = Plan::new(&lhs, &kept, &vertices, &arrows, &vars);
        let effects = Effects::new(&lhs, &kept, &rhs, &vertices, &arrows);
        Rule(Arc::new(RuleData {
            name: name.into(),
            lhs,
            kept,
            rhs,
            vertices,
            arrows,
            vars,
            plan,
            effects,
        }))
    }

    pub fn validate(&self) -> Vec<RuleViolation> {
        validate(self.lhs(), self.kept(), self.rhs())
    }

    pub fn name(&self) -> &Name {
        &self.0.name
    }

    pub fn lhs(&self) -> &Graph {
        &self.0.lhs
    }

    pub fn kept(&self) -> &Graph {
        &self.0.kept
    }

    pub fn rhs(&self) -> &Graph {
        &self.0.rhs
    }

    pub fn varset(&self) -> &BTreeSet<Var> {
        self.0.lhs.varset()
    }

    /// Sorted vertices of `L`; matchings store their images in this order.
    pub fn lhs_vertices(&self) -> &[Id] {
        &self.0.vertices
    }

    /// Sorted arrows of `L`.
    pub fn lhs_arrows(&self) -> &[Id] {
        &self.0.arrows
    }

    /// Sorted variables.
    pub fn vars(&self) -> &[Var] {
        &self.0.vars
    }

    pub fn vertex_index(&self, id: &Id) -> Option<usize> {
        self.0.vertices.binary_search(id).ok()
    }

    pub fn arrow_index(&self, id: &Id) -> Option<usize> {
        self.0.arrows.binary_search(id).ok()
    }

    pub fn var_index(&self, v: &Var) -> Option<usize> {
        self.0.vars.binary_search(v).ok()
    }
}

fn validate(lhs: &Graph, kept: &Graph, rhs: &Graph) -> Vec<RuleViolation> {
    let mut out = Vec::new();
    if lhs.varset() != kept.varset() || lhs.varset() != rhs.varset() {
        out.push(RuleViolation::VarsetMismatch);
    }
    match meet(lhs, rhs) {
        Err(e) => out.push(RuleViolation::NotJoinable(e)),
        Ok(overlap) => {
            let overlap = overlap.with_vars(kept.varset().clone()).unwrap_or(overlap);
            if !is_sigma_subgraph(&overlap, kept) {
                out.push(RuleViolation::OverlapNotKept);
            }
        }
    }
    let kept_in_lhs = kept
        .with_vars(lhs.varset().clone())
        .is_ok_and(|k| is_sigma_subgraph(&k, lhs));
    if !kept_in_lhs {
        out.push(RuleViolation::KeptNotInLhs);
    }
    let in_lhs = lhs.label_vars();
    let in_rhs = rhs.label_vars();
    let rhs_only: Vec<Var> = in_rhs.difference(&in_lhs).cloned().collect();
    if !rhs_only.is_empty() {
        out.push(RuleViolation::RhsOnlyVariables(rhs_only));
    }
    let unused: Vec<Var> = lhs
        .varset()
        .iter()
        .filter(|v| !in_lhs.contains(*v) && !in_rhs.contains(*v))
        .cloned()
        .collect();
    if !unused.is_empty() {
        out.push(RuleViolation::UnusedVariables(unused));
    }
    out
}

/// A finite list of rules with distinct names and distinct left-hand-side
/// item sets, so every matching determines its rule.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RuleSet {
    rules: Vec<Rule>,
}

impl RuleSet {
    pub fn new(rules: impl IntoIterator<Item = Rule>) -> Result<Self, RuleError> {
        let rules: Vec<Rule> = rules.into_iter().collect();
        let mut names = BTreeSet::new();
        let mut carriers: BTreeMap<(Vec<Id>, Vec<Id>), Name> = BTreeMap::new();
        for r in &rules {
            if !names.insert(r.name().clone()) {
                return Err(RuleError::DuplicateName(r.name().clone()));
            }
            let key = (r.lhs_vertices().to_vec(), r.lhs_arrows().to_vec());
            if let Some(other) = carriers.insert(key, r.name().clone()) {
                return Err(RuleError::SharedLhsItems(other, r.name().clone()));
            }
        }
        Ok(RuleSet { rules })
    }

    pub fn rules(&self) -> &[Rule] {
        &self.rules
    }

    pub fn get(&self, name: &str) -> Option<&Rule> {
        self.rules.iter().find(|r| &**r.name() == name)
    }

    pub fn is_empty(&self) -> bool {
        self.rules.is_empty()
    }

    pub fn len(&self) -> usize {
        self.rules.len()
    }
}

/// A matching of a rule in a host graph.
///
/// Images are stored as vectors aligned with the rule's sorted vertices,
/// arrows and variables. Matchings are ordered by rule name, then vertex
/// images, arrow images and variable values; this is the canonical order
/// used for output and representative selection.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct RuleMatch {
    rule: Rule,
    vertices: Vec<Id>,
    arrows: Vec<Id>,
    terms: Vec<Term>,
}

impl Ord for RuleMatch {
    fn cmp(&self, other: &Self) -> Ordering {
        self.rule
            .name()
            .cmp(other.rule.name())
            .then_with(|| self.vertices.cmp(&other.vertices))
            .then_with(|| self.arrows.cmp(&other.arrows))
            .then_with(|| self.terms.cmp(&other.terms))
    }
}

impl PartialOrd for RuleMatch {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl RuleMatch {
    /// Wraps a morphism from `L`; checks only that its domains fit the rule.
    pub fn from_morphism(rule: &Rule, m: &Morphism) -> Result<RuleMatch, RuleError> {
        let foreign = || RuleError::ForeignMatch(rule.name().clone());
        if m.vertices.len() != rule.lhs_vertices().len()
            || m.arrows.len() != rule.lhs_arrows().len()
            || m.subst.len() != rule.vars().len()
        {
            return Err(foreign());
        }
        let vertices = rule
            .lhs_vertices()
            .iter()
            .map(|v| m.vertices.get(v).cloned().ok_or_else(foreign))
            .collect::<Result<_, _>>()?;
        let arrows = rule
            .lhs_arrows()
            .iter()
            .map(|a| m.arrows.get(a).cloned().ok_or_else(foreign))
            .collect::<Result<_, _>>()?;
        let terms = rule
            .vars()
            .iter()
            .map(|v| m.subst.get(v).cloned().ok_or_else(foreign))
            .collect::<Result<_, _>>()?;
        Ok(RuleMatch {
            rule: rule.clone(),
            vertices,
            arrows,
            terms,
        })
    }

    pub(crate) fn from_parts(
        rule: Rule,
        vertices: Vec<Id>,
        arrows: Vec<Id>,
        terms: Vec<Term>,
    ) -> Self {
        RuleMatch {
            rule,
            vertices,
            arrows,
            terms,
        }
    }

    pub fn rule(&self) -> &Rule {
        &self.rule
    }

    pub fn vertex_images(&self) -> &[Id] {
        &self.vertices
    }

    pub fn arrow_images(&self) -> &[Id] {
        &self.arrows
    }

    pub fn values(&self) -> &[Term] {
        &self.terms
    }

    pub fn vertex(&self, id: &Id) -> Option<&Id> {
        self.rule.vertex_index(id).map(|i| &self.vertices[i])
    }

    pub fn arrow(&self, id: &Id) -> Option<&Id> {
        self.rule.arrow_index(id).map(|i| &self.arrows[i])
    }

    pub fn item(&self, item: &Item) -> Option<Item> {
        match item {
            Item::Vertex(v) => self.vertex(v).cloned().map(Item::Vertex),
            Item::Arrow(a) => self.arrow(a).cloned().map(Item::Arrow),
        }
    }

    pub(crate) fn slot(&self, slot: Slot) -> Item {
        match slot {
            Slot::Vertex(i) => Item::Vertex(self.vertices[i].clone()),
            Slot::Arrow(i) => Item::Arrow(self.arrows[i].clone()),
        }
    }

    pub fn morphism(&self) -> Morphism {
        let r = &self.rule;
        Morphism {
            vertices: r
                .lhs_vertices()
                .iter()
                .cloned()
                .zip(self.vertices.iter().cloned())
                .collect(),
            arrows: r
                .lhs_arrows()
                .iter()
                .cloned()
                .zip(self.arrows.iter().cloned())
                .collect(),
            subst: r
                .vars()
                .iter()
                .cloned()
                .zip(self.terms.iter().cloned())
                .collect(),
        }
    }

    /// `λ_μ(t)` for a term over the rule's variables.
    pub fn apply(&self, t: &Term) -> Term {
        let bindings: Vec<Option<Term>> = self.terms.iter().cloned().map(Some).collect();
        apply_indexed(t, self.rule.var_positions(), &bindings)
            .expect("rule variables are all bound")
    }

    pub fn apply_set(&self, ls: &Labels) -> Labels {
        if ls.iter().all(Term::is_ground) {
            return ls.clone();
        }
        let index = self.rule.var_positions();
        let bindings: Vec<Option<Term>> = self.terms.iter().cloned().map(Some).collect();
        ls.iter()
            .map(|t| apply_indexed(t, index, &bindings).expect("rule variables are all bound"))
            .collect()
    }

    /// Stable textual identity, e.g. `r[x=1,y=2;f=4;u=b]`.
    pub fn key(&self) -> String {
        let r = &self.rule;
        let pairs = |names: &mut dyn Iterator<Item = String>,
                     vals: &mut dyn Iterator<Item = String>| {
            names
                .zip(vals)
                .map(|(a, b)| format!("{a}={b}"))
                .collect::<Vec<_>>()
                .join(",")
        };
        format!(
            "{}[{};{};{}]",
            r.name(),
            pairs(
                &mut r.lhs_vertices().iter().map(Id::to_string),
                &mut self.vertices.iter().map(Id::to_string)
            ),
            pairs(
                &mut r.lhs_arrows().iter().map(Id::to_string),
                &mut self.arrows.iter().map(Id::to_string)
            ),
            pairs(
                &mut r.vars().iter().map(|v| v.name.to_string()),
                &mut self.terms.iter().map(Term::to_string)
            ),
        )
    }

    /// Checks that this is a matching of its rule in `host`, including the
    /// label-separation condition on kept items.
    pub fn is_valid_in(&self, host: &Graph) -> bool {
        let m = self.morphism();
        matches!(
            m.classify(self.rule.lhs(), host),
            Ok(MorphismKind::Matching | MorphismKind::Isomorphism)
        ) && self.separated()
    }

    fn separated(&self) -> bool {
        let r = &self.rule;
        r.kept().items().all(|item| {
            let all = r.lhs().labels(&item).expect("K ◁ L");
            let kept = r.kept().labels(&item).expect("item of K");
            let dropped: Labels = all.difference(kept).cloned().collect();
            self.apply_set(&dropped).is_disjoint(&self.apply_set(kept))
        })
    }
}

impl Rule {
    fn var_positions(&self) -> &BTreeMap<Var, usize> {
        &self.0.plan.var_index
    }

    pub(crate) fn effects(&self) -> &Effects {
        &self.0.effects
    }
}

impl fmt::Debug for RuleMatch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.key())
    }
}

impl fmt::Display for RuleMatch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(&self.morphism(), f)
    }
}

/// Where an item of `R` lands in `G^μ`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Origin {
    /// The host image of this left-hand-side position.
    Kept(usize),
    Fresh,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct RhsVertex {
    pub(crate) id: Id,
    pub(crate) origin: Origin,
    pub(crate) labels: Labels,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct RhsArrow {
    pub(crate) id: Id,
    pub(crate) origin: Origin,
    /// Positions in the vertex list.
    pub(crate) src: usize,
    pub(crate) tgt: usize,
    pub(crate) labels: Labels,
}

/// What a rule deletes from one matched item: the item itself when it is
/// outside `K`, and the labels of `L` that `K` does not keep.
#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct Deletion {
    pub(crate) slot: Slot,
    pub(crate) whole: bool,
    pub(crate) labels: Labels,
}

/// Per-rule data reused by the rewriting constructions for every match.
#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct Effects {
    pub(crate) rhs_vertices: Vec<RhsVertex>,
    pub(crate) rhs_arrows: Vec<RhsArrow>,
    pub(crate) deletions: Vec<Deletion>,
    pub(crate) creates: bool,
}

impl Effects {
    fn new(lhs: &Graph, kept: &Graph, rhs: &Graph, vertices: &[Id], arrows: &[Id]) -> Effects {
        let kept_at = |ids: &[Id], id: &Id, in_k: bool| match ids.binary_search(id) {
            Ok(i) if in_k => Origin::Kept(i),
            _ => Origin::Fresh,
        };
        let rhs_vertices: Vec<RhsVertex> = rhs
            .vertices()
            .map(|(v, ls)| RhsVertex {
                id: v.clone(),
                origin: kept_at(vertices, v, kept.has_vertex(v)),
                labels: ls.clone(),
            })
            .collect();
        let vpos = |v: &Id| {
            rhs_vertices
                .iter()
                .position(|x| &x.id == v)
                .expect("vertex of R")
        };
        let rhs_arrows: Vec<RhsArrow> = rhs
            .arrows()
            .map(|(a, arrow)| RhsArrow {
                id: a.clone(),
                origin: kept_at(arrows, a, kept.has_arrow(a)),
                src: vpos(&arrow.src),
                tgt: vpos(&arrow.tgt),
                labels: arrow.labels.clone(),
            })
            .collect();
        let creates = rhs_vertices.iter().any(|v| v.origin == Origin::Fresh)
            || rhs_arrows.iter().any(|a| a.origin == Origin::Fresh);

        let empty = Labels::new();
        let mut deletions = Vec::new();
        let mut visit = |slot: Slot, all: &Labels, keep: Option<&Labels>| {
            let labels: Labels = all.difference(keep.unwrap_or(&empty)).cloned().collect();
            if keep.is_none() || !labels.is_empty() {
                deletions.push(Deletion {
                    slot,
                    whole: keep.is_none(),
                    labels,
                });
            }
        };
        for (i, v) in vertices.iter().enumerate() {
            visit(
                Slot::Vertex(i),
                lhs.vertex_labels(v).expect("vertex of L"),
                kept.vertex_labels(v),
            );
        }
        for (i, a) in arrows.iter().enumerate() {
            let keep = kept.arrow(a).map(|x| &x.labels);
            visit(
                Slot::Arrow(i),
                &lhs.arrow(a).expect("arrow of L").labels,
                keep,
            );
        }
        Effects {
            rhs_vertices,
            rhs_arrows,
            deletions,
            creates,
        }
    }
}

// ---------------------------------------------------------------------------
// Matching

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Slot {
    Vertex(usize),
    Arrow(usize),
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Step {
    /// Place a vertex, drawing candidates from the neighbours of an already
    /// placed vertex when one is adjacent.
    Vertex {
        v: usize,
        anchor: Option<(usize, bool)>,
    },
    /// Place an arrow whose endpoints are both placed.
    Arrow(usize),
    /// Match a label term whose variables are not all bound yet.
    Bind(Slot, Term),
    /// Check a label term whose variables are all bound.
    Check(Slot, Term),
}

/// Precomputed search order for a rule's left-hand side.
#[derive(Debug, Clone, PartialEq, Eq)]
struct Plan {
    steps: Vec<Step>,
    var_index: BTreeMap<Var, usize>,
    /// Per kept item: labels of L∖K and labels of K.
    separation: Vec<(Vec<Term>, Vec<Term>)>,
}

impl Plan {
    fn new(lhs: &Graph, kept: &Graph, vertices: &[Id], arrows: &[Id], vars: &[Var]) -> Plan {
        let var_index: BTreeMap<Var, usize> = vars
            .iter()
            .cloned()
            .enumerate()
            .map(|(i, v)| (v, i))
            .collect();
        let vpos: HashMap<&Id, usize> = vertices.iter().enumerate().map(|(i, v)| (v, i)).collect();
        let ends: Vec<(usize, usize)> = arrows
            .iter()
            .map(|a| {
                let arrow = lhs.arrow(a).expect("arrow of L");
                (vpos[&arrow.src], vpos[&arrow.tgt])
            })
            .collect();
        let n = vertices.len();
        let degree: Vec<usize> = (0..n)
            .map(|v| ends.iter().filter(|(s, t)| *s == v || *t == v).count())
            .collect();
        let label_count = |v: usize| lhs.vertex_labels(&vertices[v]).map_or(0, BTreeSet::len);

        let mut placed = vec![false; n];
        let mut arrow_done = vec![false; arrows.len()];
        let mut bound: BTreeSet<Var> = BTreeSet::new();
        let mut steps = Vec::new();

        for _ in 0..n {
            let links = |v: usize| {
                ends.iter()
                    .filter(|(s, t)| (*s == v && placed[*t]) || (*t == v && placed[*s]))
                    .count()
            };
            let v = (0..n)
                .filter(|v| !placed[*v])
                .max_by(|a, b| {
                    links(*a)
                        .cmp(&links(*b))
                        .then(degree[*a].cmp(&degree[*b]))
                        .then(label_count(*a).cmp(&label_count(*b)))
                        .then(b.cmp(a))
                })
                .expect("unplaced vertex");
            let anchor = ends.iter().find_map(|(s, t)| {
                if *s == v && *t != v && placed[*t] {
                    Some((*t, false))
                } else if *t == v && *s != v && placed[*s] {
                    Some((*s, true))
                } else {
                    None
                }
            });
            steps.push(Step::Vertex { v, anchor });
            placed[v] = true;
            push_label_steps(
                &mut steps,
                Slot::Vertex(v),
                lhs.vertex_labels(&vertices[v]).expect("vertex of L"),
                &mut bound,
            );
            for (e, (s, t)) in ends.iter().enumerate() {
                if !arrow_done[e] && placed[*s] && placed[*t] {
                    arrow_done[e] = true;
                    steps.push(Step::Arrow(e));
                    push_label_steps(
                        &mut steps,
                        Slot::Arrow(e),
                        &lhs.arrow(&arrows[e]).expect("arrow of L").labels,
                        &mut bound,
                    );
                }
            }
        }

        let separation = kept
            .items()
            .filter_map(|item| {
                let all = lhs.labels(&item)?;
                let keep = kept.labels(&item)?;
                let dropped: Vec<Term> = all.difference(keep).cloned().collect();
                (!dropped.is_empty() && !keep.is_empty())
                    .then(|| (dropped, keep.iter().cloned().collect()))
            })
            .collect();

        Plan {
            steps,
            var_index,
            separation,
        }
    }
}

fn push_label_steps(steps: &mut Vec<Step>, slot: Slot, labels: &Labels, bound: &mut BTreeSet<Var>) {
    // fully bound terms become membership checks; among the rest, terms
    // with fewer unbound variables and more structure go first
    let mut pending: Vec<&Term> = labels.iter().collect();
    while !pending.is_empty() {
        let (i, _) = pending
            .iter()
            .enumerate()
            .min_by_key(|(_, t)| {
                (
                    t.vars().difference(bound).count(),
                    std::cmp::Reverse(t.size()),
                )
            })
            .expect("non-empty");
        let t = pending.remove(i);
        let vs = t.vars();
        if vs.is_subset(bound) {
            steps.push(Step::Check(slot, t.clone()));
        } else {
            steps.push(Step::Bind(slot, t.clone()));
            bound.extend(vs);
        }
    }
}

/// Index-based view of a host graph shared by all rules being matched.
pub struct HostIndex<'g> {
    vertices: Vec<&'g Id>,
    vlabels: Vec<&'g Labels>,
    arrows: Vec<&'g Id>,
    alabels: Vec<&'g Labels>,
    src: Vec<usize>,
    tgt: Vec<usize>,
    outgoing: Vec<Vec<usize>>,
    incoming: Vec<Vec<usize>>,
}

impl<'g> HostIndex<'g> {
    pub fn new(g: &'g Graph) -> Self {
        let vertices: Vec<&Id> = g.vertex_ids().collect();
        let pos: HashMap<&Id, usize> = vertices.iter().enumerate().map(|(i, v)| (*v, i)).collect();
        let mut outgoing = vec![Vec::new(); vertices.len()];
        let mut incoming = vec![Vec::new(); vertices.len()];
        let mut src = Vec::new();
        let mut tgt = Vec::new();
        let mut arrows = Vec::new();
        let mut alabels = Vec::new();
        for (i, (id, a)) in g.arrows().enumerate() {
            let (s, t) = (pos[&a.src], pos[&a.tgt]);
            outgoing[s].push(i);
            incoming[t].push(i);
            src.push(s);
            tgt.push(t);
            arrows.push(id);
            alabels.push(&a.labels);
        }
        HostIndex {
            vlabels: g.vertices().map(|(_, ls)| ls).collect(),
            vertices,
            arrows,
            alabels,
            src,
            tgt,
            outgoing,
            incoming,
        }
    }
}

struct Search<'a, 'g> {
    rule: &'a Rule,
    host: &'a HostIndex<'g>,
    plan: &'a Plan,
    lhs_ends: Vec<(usize, usize)>,
    vmap: Vec<usize>,
    amap: Vec<usize>,
    vused: Vec<bool>,
    aused: Vec<bool>,
    bindings: Vec<Option<Term>>,
    trail: Vec<usize>,
    /// Host positions follow the id order, so these keys sort like the
    /// images they stand for.
    out: Vec<(Box<[u32]>, RuleMatch)>,
}

const UNSET: usize = usize::MAX;

impl Search<'_, '_> {
    fn host_labels(&self, slot: Slot) -> &Labels {
        match slot {
            Slot::Vertex(v) => self.host.vlabels[self.vmap[v]],
            Slot::Arrow(a) => self.host.alabels[self.amap[a]],
        }
    }

    fn run(&mut self, k: usize) {
        let Some(step) = self.plan.steps.get(k) else {
            self.emit();
            return;
        };
        match step {
            Step::Vertex { v, anchor } => {
                let v = *v;
                let candidates: Vec<usize> = match anchor {
                    Some((p, out_of_p)) => {
                        let hp = self.vmap[*p];
                        let mut cs: Vec<usize> = if *out_of_p {
                            self.host.outgoing[hp]
                                .iter()
                                .map(|&a| self.host.tgt[a])
                                .collect()
                        } else {
                            self.host.incoming[hp]
                                .iter()
                                .map(|&a| self.host.src[a])
                                .collect()
                        };
                        cs.sort_unstable();
                        cs.dedup();
                        cs
                    }
                    None => (0..self.host.vertices.len()).collect(),
                };
                for c in candidates {
                    if self.vused[c] {
                        continue;
                    }
                    self.vused[c] = true;
                    self.vmap[v] = c;
                    self.run(k + 1);
                    self.vmap[v] = UNSET;
                    self.vused[c] = false;
                }
            }
            Step::Arrow(e) => {
                let e = *e;
                let (s, t) = self.lhs_ends[e];
                let (hs, ht) = (self.vmap[s], self.vmap[t]);
                for i in 0..self.host.outgoing[hs].len() {
                    let a = self.host.outgoing[hs][i];
                    if self.host.tgt[a] != ht || self.aused[a] {
                        continue;
                    }
                    self.aused[a] = true;
                    self.amap[e] = a;
                    self.run(k + 1);
                    self.amap[e] = UNSET;
                    self.aused[a] = false;
                }
            }
            Step::Check(slot, t) => {
                let value = apply_indexed(t, &self.plan.var_index, &self.bindings)
                    .expect("checked terms are fully bound");
                if self.host_labels(*slot).contains(&value) {
                    self.run(k + 1);
                }
            }
            Step::Bind(slot, t) => {
                let labels: Vec<Term> = self.host_labels(*slot).iter().cloned().collect();
                for g in &labels {
                    let mark = self.trail.len();
                    if match_indexed(
                        t,
                        g,
                        &self.plan.var_index,
                        &mut self.bindings,
                        &mut self.trail,
                    ) {
                        self.run(k + 1);
                    }
                    for i in self.trail.drain(mark..) {
                        self.bindings[i] = None;
                    }
                }
            }
        }
    }

    fn emit(&mut self) {
        for (dropped, kept) in &self.plan.separation {
            let apply = |t: &Term| {
                apply_indexed(t, &self.plan.var_index, &self.bindings).expect("all variables bound")
            };
            let kept: BTreeSet<Term> = kept.iter().map(apply).collect();
            if dropped.iter().any(|t| kept.contains(&apply(t))) {
                return;
            }
        }
        let key = self
            .vmap
            .iter()
            .chain(&self.amap)
            .map(|&i| i as u32)
            .collect();
        self.out.push((
            key,
            RuleMatch {
                rule: self.rule.clone(),
                vertices: self
                    .vmap
                    .iter()
                    .map(|&i| self.host.vertices[i].clone())
                    .collect(),
                arrows: self
                    .amap
                    .iter()
                    .map(|&i| self.host.arrows[i].clone())
                    .collect(),
                terms: self
                    .bindings
                    .iter()
                    .map(|b| b.clone().expect("every rule variable occurs in L"))
                    .collect(),
            },
        ));
    }
}

fn matches_with_index(rule: &Rule, host: &HostIndex) -> Vec<RuleMatch> {
    let lhs = rule.lhs();
    let lhs_ends = rule
        .lhs_arrows()
        .iter()
        .map(|a| {
            let arrow = lhs.arrow(a).expect("arrow of L");
            (
                rule.vertex_index(&arrow.src).expect("vertex of L"),
                rule.vertex_index(&arrow.tgt).expect("vertex of L"),
            )
        })
        .collect();
    let mut search = Search {
        rule,
        host,
        plan: &rule.0.plan,
        lhs_ends,
        vmap: vec![UNSET; rule.lhs_vertices().len()],
        amap: vec![UNSET; rule.lhs_arrows().len()],
        vused: vec![false; host.vertices.len()],
        aused: vec![false; host.arrows.len()],
        bindings: vec![None; rule.vars().len()],
        trail: Vec::new(),
        out: Vec::new(),
    };
    // A variable that occurs in no label of L is unconstrained; such rules
    // are ill-formed and have no matchings to enumerate.
    if rule.lhs().label_vars().len() != rule.vars().len() {
        return Vec::new();
    }
    search.run(0);
    let mut out = search.out;
    let order = |a: &(Box<[u32]>, RuleMatch), b: &(Box<[u32]>, RuleMatch)| {
        a.0.cmp(&b.0).then_with(|| a.1.terms.cmp(&b.1.terms))
    };
    out.sort_unstable_by(order);
    out.dedup_by(|a, b| order(a, b).is_eq());
    out.into_iter().map(|(_, m)| m).collect()
}

/// `Matches(r, G)` in canonical order.
pub fn enumerate_matchings(rule: &Rule, host: &Graph) -> Vec<RuleMatch> {
    matches_with_index(rule, &HostIndex::new(host))
}

/// `Matches(𝓡, G)`: the matchings of every rule, in canonical order.
pub fn enumerate_all(rules: &RuleSet, host: &Graph) -> Vec<RuleMatch> {
    let index = HostIndex::new(host);
    let mut out: Vec<RuleMatch> = rules
        .rules()
        .iter()
        .flat_map(|r| matches_with_index(r, &index))
        .collect();
    out.sort();
    out
}
