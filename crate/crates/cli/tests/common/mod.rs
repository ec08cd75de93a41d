//! Independent oracles shared by the acceptance checks.

#![allow(dead_code)]

pub mod gen;

use std::collections::{BTreeMap, BTreeSet};
use std::path::PathBuf;

use pargraph_cli::syntax::{parse, Document};
use pargraph_core::{Graph, Id, Item, LabellingFn, Labels, Morphism, Rule, Substitution, Term};
use rand::seq::SliceRandom;
use rand::Rng;

pub fn fixture(name: &str) -> Document {
    let p: PathBuf = [env!("CARGO_MANIFEST_DIR"), "..", "..", "fixtures", name]
        .iter()
        .collect();
    parse(&std::fs::read_to_string(&p).unwrap()).unwrap()
}

/// A bijection from the items of `g` onto `p1, p2, …` in random order.
pub fn random_renaming(rng: &mut impl Rng, g: &Graph) -> BTreeMap<Id, Id> {
    let mut ids: Vec<Id> = g.vertex_ids().chain(g.arrow_ids()).cloned().collect();
    let mut names: Vec<Id> = (1..=ids.len())
        .map(|i| Id::named(format!("p{i}")))
        .collect();
    names.shuffle(rng);
    ids.sort();
    ids.into_iter().zip(names).collect()
}

/// `α(g)` for a bijective renaming of items; labels are ground so they are kept.
pub fn rename(g: &Graph, alpha: &BTreeMap<Id, Id>) -> Graph {
    let mut out = Graph::with_varset(g.varset().iter().cloned());
    for (v, ls) in g.vertices() {
        out.add_vertex(alpha[v].clone(), ls.clone()).unwrap();
    }
    for (a, arrow) in g.arrows() {
        out.add_arrow(
            alpha[a].clone(),
            alpha[&arrow.src].clone(),
            alpha[&arrow.tgt].clone(),
            arrow.labels.clone(),
        )
        .unwrap();
    }
    out
}

pub fn rename_item(item: &Item, alpha: &BTreeMap<Id, Id>) -> Item {
    match item {
        Item::Vertex(v) => Item::Vertex(alpha[v].clone()),
        Item::Arrow(a) => Item::Arrow(alpha[a].clone()),
    }
}

/// `l ∘ α⁻¹`.
pub fn rename_labelling(l: &LabellingFn, alpha: &BTreeMap<Id, Id>) -> LabellingFn {
    let mut out = LabellingFn::new();
    for (item, ls) in l.support() {
        out.extend(rename_item(item, alpha), ls.iter().cloned());
    }
    out
}

/// The renaming as a morphism of ground graphs.
pub fn renaming_morphism(g: &Graph, alpha: &BTreeMap<Id, Id>) -> Morphism {
    Morphism {
        vertices: g
            .vertex_ids()
            .map(|v| (v.clone(), alpha[v].clone()))
            .collect(),
        arrows: g
            .arrow_ids()
            .map(|a| (a.clone(), alpha[a].clone()))
            .collect(),
        subst: Substitution::new(),
    }
}

fn subterms(t: &Term, out: &mut BTreeSet<Term>) {
    out.insert(t.clone());
    if let pargraph_core::terms::TermKind::App { args, .. } = t.kind() {
        for a in args {
            subterms(a, out);
        }
    }
}

fn injective_maps(domain: usize, codomain: &[Id], out: &mut Vec<Vec<Id>>, acc: &mut Vec<Id>) {
    if acc.len() == domain {
        out.push(acc.clone());
        return;
    }
    for c in codomain {
        if !acc.contains(c) {
            acc.push(c.clone());
            injective_maps(domain, codomain, out, acc);
            acc.pop();
        }
    }
}

fn assignments(n: usize, values: &[Term]) -> Vec<Vec<Term>> {
    let mut out = vec![Vec::new()];
    for _ in 0..n {
        out = out
            .into_iter()
            .flat_map(|acc| {
                values.iter().map(move |v| {
                    let mut next = acc.clone();
                    next.push(v.clone());
                    next
                })
            })
            .collect();
    }
    out
}

/// Every matching of `rule` in `host`, found by trying all injective vertex
/// and arrow maps against every substitution into host subterms.
pub fn brute_force_matchings(rule: &Rule, host: &Graph) -> BTreeSet<Morphism> {
    let (l, k) = (rule.lhs(), rule.kept());
    let lv: Vec<Id> = l.vertex_ids().cloned().collect();
    let la: Vec<Id> = l.arrow_ids().cloned().collect();
    let hv: Vec<Id> = host.vertex_ids().cloned().collect();
    let ha: Vec<Id> = host.arrow_ids().cloned().collect();
    let vars: Vec<_> = l.varset().iter().cloned().collect();
    let mut pool = BTreeSet::new();
    for item in host.items() {
        for t in host.labels(&item).unwrap() {
            subterms(t, &mut pool);
        }
    }
    let pool: Vec<Term> = pool.into_iter().collect();

    let mut vmaps = Vec::new();
    injective_maps(lv.len(), &hv, &mut vmaps, &mut Vec::new());
    let mut amaps = Vec::new();
    injective_maps(la.len(), &ha, &mut amaps, &mut Vec::new());
    let substs: Vec<Substitution> = assignments(vars.len(), &pool)
        .into_iter()
        .map(|vals| {
            let mut s = Substitution::new();
            for (v, t) in vars.iter().zip(vals) {
                s.bind(v.clone(), t).unwrap();
            }
            s
        })
        .collect();

    let mut out = BTreeSet::new();
    for vm in &vmaps {
        let vmap: BTreeMap<Id, Id> = lv.iter().cloned().zip(vm.iter().cloned()).collect();
        for am in &amaps {
            let amap: BTreeMap<Id, Id> = la.iter().cloned().zip(am.iter().cloned()).collect();
            let adjacent = l.arrows().all(|(a, arrow)| {
                let h = host.arrow(&amap[a]).unwrap();
                h.src == vmap[&arrow.src] && h.tgt == vmap[&arrow.tgt]
            });
            if !adjacent {
                continue;
            }
            for s in &substs {
                let image = |item: &Item| match item {
                    Item::Vertex(v) => Item::Vertex(vmap[v].clone()),
                    Item::Arrow(a) => Item::Arrow(amap[a].clone()),
                };
                let apply =
                    |ls: &Labels| -> Labels { ls.iter().map(|t| s.apply(t).unwrap()).collect() };
                let labelled = l.items().all(|item| {
                    apply(l.labels(&item).unwrap()).is_subset(host.labels(&image(&item)).unwrap())
                });
                let separated = k.items().all(|item| {
                    let kl = k.labels(&item).unwrap();
                    let dropped: Labels =
                        l.labels(&item).unwrap().difference(kl).cloned().collect();
                    apply(&dropped).is_disjoint(&apply(kl))
                });
                if labelled && separated {
                    out.insert(Morphism {
                        vertices: vmap.clone(),
                        arrows: amap.clone(),
                        subst: s.clone(),
                    });
                }
            }
        }
    }
    out
}

/// One Game of Life generation on a wrapped board.
pub fn life_step(board: &[Vec<bool>]) -> Vec<Vec<bool>> {
    let (h, w) = (board.len(), board[0].len());
    let mut next = vec![vec![false; w]; h];
    for r in 0..h {
        for c in 0..w {
            let mut live = 0;
            for dr in [h - 1, 0, 1] {
                for dc in [w - 1, 0, 1] {
                    if (dr, dc) != (0, 0) && board[(r + dr) % h][(c + dc) % w] {
                        live += 1;
                    }
                }
            }
            next[r][c] = matches!((board[r][c], live), (true, 2 | 3) | (false, 3));
        }
    }
    next
}
