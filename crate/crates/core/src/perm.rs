//! Finite permutation groups on the carrier of a graph, stored as explicit
//! sorted element lists.

use std::collections::BTreeSet;
use std::fmt;

use rustc_hash::FxHashSet;
use thiserror::Error;

use crate::graph::{Id, Morphism};
use crate::terms::{Term, Var};

/// Largest group that will be enumerated.
pub const MAX_GROUP_ORDER: usize = 1_000_000;

/// Groups up to this order get a full closure check on construction.
const CLOSURE_CHECK_LIMIT: usize = 800;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GroupError {
    #[error("group has more than {limit} elements")]
    TooLarge { limit: usize },
    #[error("element list does not contain the identity")]
    MissingIdentity,
    #[error("element list is not closed under composition")]
    NotClosed,
    #[error("element list is not closed under inverses")]
    NotInverseClosed,
    #[error("element does not fit the carrier")]
    Shape,
    #[error("`{0}` is not in the carrier")]
    UnknownId(Id),
    #[error("an element does not map the sub-carrier onto itself")]
    NotStable,
}

/// Sorted vertex ids, arrow ids and variables permuted by a group.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct Carrier {
    pub vertices: Vec<Id>,
    pub arrows: Vec<Id>,
    pub vars: Vec<Var>,
}

impl Carrier {
    pub fn new(
        vertices: impl IntoIterator<Item = Id>,
        arrows: impl IntoIterator<Item = Id>,
        vars: impl IntoIterator<Item = Var>,
    ) -> Self {
        let vertices: BTreeSet<Id> = vertices.into_iter().collect();
        let arrows: BTreeSet<Id> = arrows.into_iter().collect();
        let vars: BTreeSet<Var> = vars.into_iter().collect();
        Carrier {
            vertices: vertices.into_iter().collect(),
            arrows: arrows.into_iter().collect(),
            vars: vars.into_iter().collect(),
        }
    }

    pub fn of_graph(g: &crate::graph::Graph) -> Self {
        Carrier::new(
            g.vertex_ids().cloned(),
            g.arrow_ids().cloned(),
            g.varset().iter().cloned(),
        )
    }

    fn vertex_index(&self, id: &Id) -> Option<usize> {
        self.vertices.binary_search(id).ok()
    }

    fn arrow_index(&self, id: &Id) -> Option<usize> {
        self.arrows.binary_search(id).ok()
    }

    fn var_index(&self, v: &Var) -> Option<usize> {
        self.vars.binary_search(v).ok()
    }
}

/// A permutation triple on vertices, arrows and variables, as index vectors.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Perm {
    pub vertices: Vec<usize>,
    pub arrows: Vec<usize>,
    pub vars: Vec<usize>,
}

impl Perm {
    pub fn identity(carrier: &Carrier) -> Self {
        Perm {
            vertices: (0..carrier.vertices.len()).collect(),
            arrows: (0..carrier.arrows.len()).collect(),
            vars: (0..carrier.vars.len()).collect(),
        }
    }

    pub fn is_identity(&self) -> bool {
        [&self.vertices, &self.arrows, &self.vars]
            .iter()
            .all(|p| p.iter().enumerate().all(|(i, j)| i == *j))
    }

    /// `self ∘ other`: applies `other` first.
    pub fn compose(&self, other: &Perm) -> Perm {
        let c = |p: &[usize], q: &[usize]| q.iter().map(|&i| p[i]).collect();
        Perm {
            vertices: c(&self.vertices, &other.vertices),
            arrows: c(&self.arrows, &other.arrows),
            vars: c(&self.vars, &other.vars),
        }
    }

    pub fn inverse(&self) -> Perm {
        let inv = |p: &[usize]| {
            let mut out = vec![0; p.len()];
            for (i, &j) in p.iter().enumerate() {
                out[j] = i;
            }
            out
        };
        Perm {
            vertices: inv(&self.vertices),
            arrows: inv(&self.arrows),
            vars: inv(&self.vars),
        }
    }

    fn fits(&self, carrier: &Carrier) -> bool {
        fn is_perm(p: &[usize], n: usize) -> bool {
            let mut seen = vec![false; n];
            p.len() == n
                && p.iter()
                    .all(|&j| j < n && !std::mem::replace(&mut seen[j], true))
        }
        is_perm(&self.vertices, carrier.vertices.len())
            && is_perm(&self.arrows, carrier.arrows.len())
            && is_perm(&self.vars, carrier.vars.len())
    }
}

/// A finite group of permutation triples over a fixed carrier.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PermGroup {
    carrier: Carrier,
    elements: Vec<Perm>,
}

impl PermGroup {
    pub fn trivial(carrier: Carrier) -> Self {
        let id = Perm::identity(&carrier);
        PermGroup {
            carrier,
            elements: vec![id],
        }
    }

    /// Builds a group from its elements, checking the group laws.
    ///
    /// Closure under composition is only checked exhaustively for small
    /// groups; identity and inverses are always checked.
    pub fn from_elements(
        carrier: Carrier,
        elements: impl IntoIterator<Item = Perm>,
    ) -> Result<Self, GroupError> {
        let group = Self::from_elements_unchecked(carrier, elements)?;
        group.verify()?;
        Ok(group)
    }

    pub(crate) fn from_elements_unchecked(
        carrier: Carrier,
        elements: impl IntoIterator<Item = Perm>,
    ) -> Result<Self, GroupError> {
        let mut elements: Vec<Perm> = elements.into_iter().collect();
        if elements.iter().any(|p| !p.fits(&carrier)) {
            return Err(GroupError::Shape);
        }
        elements.sort_unstable();
        elements.dedup();
        if elements.len() > MAX_GROUP_ORDER {
            return Err(GroupError::TooLarge {
                limit: MAX_GROUP_ORDER,
            });
        }
        Ok(PermGroup { carrier, elements })
    }

    pub fn verify(&self) -> Result<(), GroupError> {
        let set: FxHashSet<&Perm> = self.elements.iter().collect();
        if !set.contains(&Perm::identity(&self.carrier)) {
            return Err(GroupError::MissingIdentity);
        }
        if self.elements.iter().any(|p| !set.contains(&p.inverse())) {
            return Err(GroupError::NotInverseClosed);
        }
        if self.elements.len() <= CLOSURE_CHECK_LIMIT {
            for p in &self.elements {
                for q in &self.elements {
                    if !set.contains(&p.compose(q)) {
                        return Err(GroupError::NotClosed);
                    }
                }
            }
        }
        Ok(())
    }

    pub fn carrier(&self) -> &Carrier {
        &self.carrier
    }

    pub fn elements(&self) -> &[Perm] {
        &self.elements
    }

    pub fn order(&self) -> usize {
        self.elements.len()
    }

    pub fn contains(&self, p: &Perm) -> bool {
        self.elements.binary_search(p).is_ok()
    }

    /// The element as a morphism from the carrier to itself.
    pub fn to_morphism(&self, p: &Perm) -> Morphism {
        let c = &self.carrier;
        Morphism {
            vertices: p
                .vertices
                .iter()
                .enumerate()
                .map(|(i, &j)| (c.vertices[i].clone(), c.vertices[j].clone()))
                .collect(),
            arrows: p
                .arrows
                .iter()
                .enumerate()
                .map(|(i, &j)| (c.arrows[i].clone(), c.arrows[j].clone()))
                .collect(),
            subst: p
                .vars
                .iter()
                .enumerate()
                .map(|(i, &j)| (c.vars[i].clone(), Term::var(c.vars[j].clone())))
                .collect(),
        }
    }

    /// Restricts every element to a sub-carrier it must stabilize.
    pub fn restrict(&self, sub: &Carrier) -> Result<PermGroup, GroupError> {
        let lookup = |ids: &[Id], find: &dyn Fn(&Id) -> Option<usize>| {
            ids.iter()
                .map(|id| find(id).ok_or_else(|| GroupError::UnknownId(id.clone())))
                .collect::<Result<Vec<_>, _>>()
        };
        let vs = lookup(&sub.vertices, &|id| self.carrier.vertex_index(id))?;
        let as_ = lookup(&sub.arrows, &|id| self.carrier.arrow_index(id))?;
        let xs = sub
            .vars
            .iter()
            .map(|v| self.carrier.var_index(v).ok_or(GroupError::Shape))
            .collect::<Result<Vec<_>, _>>()?;
        let restrict_one = |p: &[usize], idx: &[usize]| -> Result<Vec<usize>, GroupError> {
            idx.iter()
                .map(|&i| idx.binary_search(&p[i]).map_err(|_| GroupError::NotStable))
                .collect()
        };
        let elements = self
            .elements
            .iter()
            .map(|p| {
                Ok(Perm {
                    vertices: restrict_one(&p.vertices, &vs)?,
                    arrows: restrict_one(&p.arrows, &as_)?,
                    vars: restrict_one(&p.vars, &xs)?,
                })
            })
            .collect::<Result<Vec<_>, GroupError>>()?;
        PermGroup::from_elements(sub.clone(), elements)
    }

    /// Cycle notation with fixpoints: vertices, then arrows, then variables.
    pub fn render(&self, p: &Perm) -> String {
        let mut out = String::new();
        write_cycles(&mut out, &p.vertices, |i| {
            self.carrier.vertices[i].to_string()
        });
        write_cycles(&mut out, &p.arrows, |i| self.carrier.arrows[i].to_string());
        write_cycles(&mut out, &p.vars, |i| self.carrier.vars[i].to_string());
        if out.is_empty() {
            out.push_str("()");
        }
        out
    }

    /// All elements in cycle notation, in canonical order.
    pub fn rendered(&self) -> Vec<String> {
        self.elements.iter().map(|p| self.render(p)).collect()
    }
}

fn write_cycles(out: &mut String, p: &[usize], name: impl Fn(usize) -> String) {
    let mut seen = vec![false; p.len()];
    for start in 0..p.len() {
        if seen[start] {
            continue;
        }
        let mut cycle = Vec::new();
        let mut i = start;
        while !seen[i] {
            seen[i] = true;
            cycle.push(name(i));
            i = p[i];
        }
        out.push('(');
        out.push_str(&cycle.join(" "));
        out.push(')');
    }
}

impl fmt::Display for PermGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, p) in self.elements.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            f.write_str(&self.render(p))?;
        }
        f.write_str("}")
    }
}

/// All permutations of `0..n`, in lexicographic order.
pub(crate) fn all_permutations(n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut current: Vec<usize> = (0..n).collect();
    loop {
        out.push(current.clone());
        // next lexicographic permutation
        let Some(i) = (1..n).rev().find(|&i| current[i - 1] < current[i]) else {
            return out;
        };
        let j = (i..n)
            .rev()
            .find(|&j| current[j] > current[i - 1])
            .expect("pivot");
        current.swap(i - 1, j);
        current[i..].reverse();
    }
}

pub(crate) fn factorial(n: usize) -> Option<usize> {
    (1..=n).try_fold(1usize, |acc, k| acc.checked_mul(k))
}
