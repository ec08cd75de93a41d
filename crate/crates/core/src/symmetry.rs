//! Rule automorphisms, equivalence of matchings up to them, and rewriting
//! with one representative per class.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rustc_hash::{FxHashMap, FxHashSet};
use thiserror::Error;

use crate::aut::{aut_relative, AutError};
use crate::graph::{Graph, Id};
use crate::join::join;
use crate::perm::{Carrier, Perm, PermGroup};
use crate::rewrite::{rewrite, Mode, RewriteError};
use crate::rules::{enumerate_all, Rule, RuleMatch, RuleSet};
use crate::terms::{Name, Term};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SymmetryError {
    #[error("automorphisms of rule `{rule}`: {source}")]
    Aut { rule: Name, source: AutError },
    #[error(transparent)]
    Rewrite(#[from] RewriteError),
}

/// `Aut(r)`: permutations of the left-hand side that extend to `L ⊔ R`
/// while mapping each of `L`, `K` and `R` onto itself.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RuleAut {
    pub rule: Rule,
    pub group: PermGroup,
}

pub fn aut_rule(rule: &Rule) -> Result<RuleAut, SymmetryError> {
    let err = |source| SymmetryError::Aut {
        rule: rule.name().clone(),
        source,
    };
    let (l, k, r) = (rule.lhs(), rule.kept(), rule.rhs());
    let ambient = join(l, r).expect("validated rules have joinable sides");
    let group = aut_relative(&ambient, &[l, k, r])
        .and_then(|g| Ok(g.restrict(&Carrier::of_graph(l))?))
        .map_err(err)?;
    Ok(RuleAut {
        rule: rule.clone(),
        group,
    })
}

/// Automorphism groups computed once per rule.
#[derive(Debug, Default)]
pub struct RuleAuts {
    groups: BTreeMap<Name, RuleAut>,
}

impl RuleAuts {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn of_rules(rules: &RuleSet) -> Result<Self, SymmetryError> {
        let mut auts = Self::new();
        for r in rules.rules() {
            auts.get(r)?;
        }
        Ok(auts)
    }

    pub fn get(&mut self, rule: &Rule) -> Result<&RuleAut, SymmetryError> {
        if !self.groups.contains_key(rule.name()) {
            self.groups.insert(rule.name().clone(), aut_rule(rule)?);
        }
        Ok(&self.groups[rule.name()])
    }
}

/// `μ ∘ σ` for `σ` over the rule's left-hand-side carrier.
pub fn compose_match(m: &RuleMatch, sigma: &Perm) -> RuleMatch {
    let pick = |images: &[Id], p: &[usize]| p.iter().map(|&j| images[j].clone()).collect();
    let terms: Vec<Term> = sigma.vars.iter().map(|&j| m.values()[j].clone()).collect();
    RuleMatch::from_parts(
        m.rule().clone(),
        pick(m.vertex_images(), &sigma.vertices),
        pick(m.arrow_images(), &sigma.arrows),
        terms,
    )
}

/// An equivalence class `[μ] = μ ∘ Aut(r_μ)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MatchClass {
    pub representative: RuleMatch,
    pub members: Vec<RuleMatch>,
}

/// `μ ∘ G` without repeats, in no particular order.
fn orbit(m: &RuleMatch, group: &PermGroup) -> Vec<RuleMatch> {
    let mut seen = FxHashSet::default();
    group
        .elements()
        .iter()
        .map(|s| compose_match(m, s))
        .filter(|x| seen.insert(x.clone()))
        .collect()
}

/// Walks the distinct members of `ms` in canonical order and calls `visit`
/// once per class with the positions, in that order, of its members.
fn for_each_class(
    auts: &mut RuleAuts,
    ms: &[RuleMatch],
    mut visit: impl FnMut(&[RuleMatch], Vec<usize>),
) -> Result<(), SymmetryError> {
    let mut sorted = ms.to_vec();
    if !sorted.is_sorted() {
        sorted.sort();
    }
    sorted.dedup();
    let index: FxHashMap<&RuleMatch, usize> =
        sorted.iter().enumerate().map(|(i, m)| (m, i)).collect();
    let mut marked = vec![false; sorted.len()];
    for (i, m) in sorted.iter().enumerate() {
        if marked[i] {
            continue;
        }
        let mut inside = Vec::new();
        for sigma in auts.get(m.rule())?.group.elements() {
            if let Some(&j) = index.get(&compose_match(m, sigma)) {
                if !std::mem::replace(&mut marked[j], true) {
                    inside.push(j);
                }
            }
        }
        inside.sort_unstable();
        visit(&sorted, inside);
    }
    Ok(())
}

/// Partitions the closure of `ms` under `≈`, ordered by representative.
pub fn classes(ms: &[RuleMatch]) -> Result<Vec<MatchClass>, SymmetryError> {
    let mut auts = RuleAuts::new();
    let mut firsts = Vec::new();
    for_each_class(&mut auts, ms, |sorted, inside| {
        firsts.push(sorted[inside[0]].clone())
    })?;
    let mut out = Vec::new();
    for m in firsts {
        let mut members = orbit(&m, &auts.get(m.rule())?.group);
        members.sort();
        out.push(MatchClass {
            representative: members[0].clone(),
            members,
        });
    }
    out.sort_by(|a, b| a.representative.cmp(&b.representative));
    Ok(out)
}

/// The least member of `ms` from each class.
pub fn select_representatives(ms: &[RuleMatch]) -> Result<Vec<RuleMatch>, SymmetryError> {
    select_representatives_with(&mut RuleAuts::new(), ms)
}

pub fn select_representatives_with(
    auts: &mut RuleAuts,
    ms: &[RuleMatch],
) -> Result<Vec<RuleMatch>, SymmetryError> {
    let mut out = Vec::new();
    for_each_class(auts, ms, |sorted, inside| {
        out.push(sorted[inside[0]].clone())
    })?;
    Ok(out)
}

/// One member of `ms` from each class, drawn uniformly with a seeded RNG.
pub fn select_representatives_seeded(
    ms: &[RuleMatch],
    seed: u64,
) -> Result<Vec<RuleMatch>, SymmetryError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    for_each_class(&mut RuleAuts::new(), ms, |sorted, inside| {
        out.push(sorted[inside[rng.random_range(0..inside.len())]].clone())
    })?;
    Ok(out)
}

/// Parallel rewriting modulo automorphisms with canonical representatives.
pub fn step_modulo_aut(g: &Graph, rules: &RuleSet, mode: Mode) -> Result<Graph, SymmetryError> {
    step_modulo_aut_with(&mut RuleAuts::new(), g, rules, mode)
}

pub fn step_modulo_aut_with(
    auts: &mut RuleAuts,
    g: &Graph,
    rules: &RuleSet,
    mode: Mode,
) -> Result<Graph, SymmetryError> {
    let reps = select_representatives_with(auts, &enumerate_all(rules, g))?;
    Ok(rewrite(g, &reps, mode)?)
}

/// As [`step_modulo_aut`], with representatives drawn from `seed`.
pub fn step_modulo_aut_seeded(
    g: &Graph,
    rules: &RuleSet,
    mode: Mode,
    seed: u64,
) -> Result<Graph, SymmetryError> {
    let reps = select_representatives_seeded(&enumerate_all(rules, g), seed)?;
    Ok(rewrite(g, &reps, mode)?)
}
