//! Seeded random graphs, rules and hosts for the oracle checks.

use std::collections::BTreeSet;

use pargraph_core::{Graph, Id, Item, LabellingFn, Labels, Rule, RuleSet, Term, Var};
use rand::seq::{IndexedRandom, SliceRandom};
use rand::Rng;

pub fn c(name: &str) -> Term {
    Term::constant(name, "S")
}

pub fn s(t: Term) -> Term {
    Term::app("s", "S", vec![t])
}

pub fn var(name: &str) -> Term {
    Term::var(Var::new(name, "S"))
}

fn ground_pool() -> Vec<Term> {
    vec![c("a"), c("b"), c("c"), s(c("a")), s(c("b"))]
}

fn pattern_pool() -> Vec<Term> {
    vec![var("u"), var("v"), c("a"), c("b"), s(var("u"))]
}

fn pick_labels(rng: &mut impl Rng, pool: &[Term], max: usize) -> Labels {
    let n = rng.random_range(0..=max);
    (0..n).map(|_| pool.choose(rng).unwrap().clone()).collect()
}

fn sub_labels(rng: &mut impl Rng, ls: &Labels, p: f64) -> Labels {
    ls.iter().filter(|_| rng.random_bool(p)).cloned().collect()
}

/// Size limits for random hosts.
#[derive(Clone, Copy)]
pub struct HostShape {
    pub vertices: usize,
    pub arrows: usize,
    pub labels: usize,
}

pub const SMALL_HOST: HostShape = HostShape {
    vertices: 6,
    arrows: 8,
    labels: 3,
};

/// A ground graph with vertices `1..` and arrows `e1..`.
pub fn random_ground(rng: &mut impl Rng, shape: HostShape) -> Graph {
    let pool = ground_pool();
    let mut g = Graph::new();
    let n = rng.random_range(1..=shape.vertices);
    for i in 1..=n {
        g.add_vertex(i.to_string(), pick_labels(rng, &pool, shape.labels))
            .unwrap();
    }
    let m = rng.random_range(0..=shape.arrows);
    for j in 1..=m {
        let (a, b) = (rng.random_range(1..=n), rng.random_range(1..=n));
        let ls = pick_labels(rng, &pool, shape.labels.min(2));
        g.add_arrow(format!("e{j}"), a.to_string(), b.to_string(), ls)
            .unwrap();
    }
    g
}

/// How label-heavy a random rule is; sparse rules have more symmetry.
#[derive(Clone, Copy, PartialEq, Eq)]
pub enum Flavour {
    Labelled,
    Sparse,
}

/// A valid rule with at most `max_vertices` vertices in `L`, items prefixed
/// with `prefix` so several rules can share a rule set.
pub fn random_rule(
    rng: &mut impl Rng,
    name: &str,
    prefix: &str,
    max_vertices: usize,
    flavour: Flavour,
) -> Rule {
    loop {
        if let Some(r) = try_rule(rng, name, prefix, max_vertices, flavour) {
            return r;
        }
    }
}

fn try_rule(
    rng: &mut impl Rng,
    name: &str,
    prefix: &str,
    max_vertices: usize,
    flavour: Flavour,
) -> Option<Rule> {
    let pool = pattern_pool();
    let (max_labels, label_p) = match flavour {
        Flavour::Labelled => (2, 1.0),
        Flavour::Sparse => (1, 0.3),
    };
    let n = rng.random_range(1..=max_vertices);
    let vs: Vec<(String, Labels)> = (1..=n)
        .map(|i| {
            (
                format!("{prefix}x{i}"),
                maybe_labels(rng, &pool, max_labels, label_p),
            )
        })
        .collect();
    let m = rng.random_range(0..=n + 1);
    let arrows: Vec<(String, usize, usize, Labels)> = (1..=m)
        .map(|j| {
            let ls = if rng.random_bool(0.3) {
                maybe_labels(rng, &pool, max_labels, label_p)
            } else {
                Labels::new()
            };
            (
                format!("{prefix}f{j}"),
                rng.random_range(0..n),
                rng.random_range(0..n),
                ls,
            )
        })
        .collect();

    let vars: BTreeSet<Var> = vs
        .iter()
        .map(|(_, ls)| ls)
        .chain(arrows.iter().map(|(.., ls)| ls))
        .flat_map(|ls| ls.iter().flat_map(Term::vars))
        .collect();
    let mut lhs = Graph::with_varset(vars.clone());
    for (v, ls) in &vs {
        lhs.add_vertex(v.as_str(), ls.clone()).ok()?;
    }
    for (a, x, y, ls) in &arrows {
        lhs.add_arrow(a.as_str(), vs[*x].0.as_str(), vs[*y].0.as_str(), ls.clone())
            .ok()?;
    }

    let mut kept = Graph::with_varset(vars.clone());
    let mut kept_vs = vec![false; n];
    for (i, (v, ls)) in vs.iter().enumerate() {
        if rng.random_bool(0.7) {
            kept_vs[i] = true;
            kept.add_vertex(v.as_str(), sub_labels(rng, ls, 0.7)).ok()?;
        }
    }
    for (a, x, y, ls) in &arrows {
        if kept_vs[*x] && kept_vs[*y] && rng.random_bool(0.7) {
            kept.add_arrow(
                a.as_str(),
                vs[*x].0.as_str(),
                vs[*y].0.as_str(),
                sub_labels(rng, ls, 0.7),
            )
            .ok()?;
        }
    }

    // Shared items may only carry labels of K, or labels absent from L.
    let fresh_terms: Vec<Term> = pool
        .iter()
        .filter(|t| t.vars().is_subset(&vars))
        .cloned()
        .collect();
    let mut rhs = Graph::with_varset(vars.clone());
    let mut rhs_vs: Vec<String> = Vec::new();
    for (v, kls) in kept.vertices() {
        if rng.random_bool(0.8) {
            let ls = shared_labels(rng, &fresh_terms, kls, lhs.vertex_labels(v).unwrap());
            rhs.add_vertex(v.clone(), ls).ok()?;
            rhs_vs.push(v.to_string());
        }
    }
    for (a, arrow) in kept.arrows() {
        if rhs.has_vertex(&arrow.src) && rhs.has_vertex(&arrow.tgt) && rng.random_bool(0.8) {
            let ls = shared_labels(
                rng,
                &fresh_terms,
                &arrow.labels,
                &lhs.arrow(a).unwrap().labels,
            );
            rhs.add_arrow(a.clone(), arrow.src.clone(), arrow.tgt.clone(), ls)
                .ok()?;
        }
    }
    for i in 1..=rng.random_range(0..=1) {
        let w = format!("{prefix}w{i}");
        let ls = pick_labels(rng, &fresh_terms, 1);
        rhs.add_vertex(w.as_str(), ls).ok()?;
        rhs_vs.push(w);
    }
    if !rhs_vs.is_empty() {
        for j in 1..=rng.random_range(0..=2) {
            let (x, y) = (rhs_vs.choose(rng).unwrap(), rhs_vs.choose(rng).unwrap());
            rhs.add_arrow(format!("{prefix}g{j}").as_str(), x.as_str(), y.as_str(), [])
                .ok()?;
        }
    }
    Rule::new(name, lhs, kept, rhs).ok()
}

fn maybe_labels(rng: &mut impl Rng, pool: &[Term], max: usize, p: f64) -> Labels {
    if rng.random_bool(p) {
        pick_labels(rng, pool, max)
    } else {
        Labels::new()
    }
}

/// Labels for an item shared by K and R: some of K's, maybe one absent from L.
fn shared_labels(rng: &mut impl Rng, fresh: &[Term], k: &Labels, l: &Labels) -> Labels {
    let mut out = sub_labels(rng, k, 0.6);
    if rng.random_bool(0.5) {
        if let Some(t) = fresh.choose(rng) {
            if !l.contains(t) {
                out.insert(t.clone());
            }
        }
    }
    out
}

/// A ground instance of `rule`'s left-hand side placed in `host`, so that
/// random hosts carry matchings and overlaps between them.
pub fn plant(
    rng: &mut impl Rng,
    host: &mut Graph,
    rule: &Rule,
    max_vertices: usize,
    max_arrows: usize,
) {
    let lhs = rule.lhs();
    if lhs.vertex_count() > max_vertices {
        return;
    }
    let mut next = host.vertex_count();
    while host.vertex_count() < lhs.vertex_count() {
        next += 1;
        host.add_vertex(next.to_string(), []).unwrap();
    }
    let mut targets: Vec<Id> = host.vertex_ids().cloned().collect();
    targets.shuffle(rng);
    let ground = ground_pool();
    let subst: Vec<(Var, Term)> = lhs
        .varset()
        .iter()
        .map(|v| (v.clone(), ground.choose(rng).unwrap().clone()))
        .collect();
    let inst = |t: &Term| {
        let mut sub = pargraph_core::Substitution::new();
        for (v, g) in &subst {
            sub.bind(v.clone(), g.clone()).unwrap();
        }
        sub.apply(t).unwrap()
    };
    let image: Vec<(Id, Id)> = lhs.vertex_ids().cloned().zip(targets).collect();
    let at = |v: &Id| image.iter().find(|(x, _)| x == v).unwrap().1.clone();
    let mut out = host.clone();
    let mut labels = LabellingFn::new();
    for (v, ls) in lhs.vertices() {
        labels.extend(Item::Vertex(at(v)), ls.iter().map(inst));
    }
    let mut next_arrow = host.arrow_count();
    for (_, arrow) in lhs.arrows() {
        if out.arrow_count() >= max_arrows {
            return;
        }
        next_arrow += 1;
        let mut id = format!("e{next_arrow}");
        while out.has_arrow(&Id::named(id.as_str())) {
            next_arrow += 1;
            id = format!("e{next_arrow}");
        }
        let ls: Labels = arrow.labels.iter().map(inst).collect();
        out.add_arrow(id.as_str(), at(&arrow.src), at(&arrow.tgt), ls)
            .unwrap();
    }
    *host = with_labels(&out, &labels);
}

/// `g` with the labels of `extra` added.
pub fn with_labels(g: &Graph, extra: &LabellingFn) -> Graph {
    let mut out = Graph::new();
    for (v, ls) in g.vertices() {
        let mut ls = ls.clone();
        ls.extend(extra.get(&Item::Vertex(v.clone())).iter().cloned());
        out.add_vertex(v.clone(), ls).unwrap();
    }
    for (a, arrow) in g.arrows() {
        let mut ls = arrow.labels.clone();
        ls.extend(extra.get(&Item::Arrow(a.clone())).iter().cloned());
        out.add_arrow(a.clone(), arrow.src.clone(), arrow.tgt.clone(), ls)
            .unwrap();
    }
    out
}

/// A rewriting instance: rules plus a host with some of their left-hand
/// sides planted in it.
pub struct Instance {
    pub rules: RuleSet,
    pub host: Graph,
}

pub fn random_instance(
    rng: &mut impl Rng,
    shape: HostShape,
    max_rule_vertices: usize,
    flavour: Flavour,
) -> Instance {
    let count = rng.random_range(1..=2);
    let rules: Vec<Rule> = (0..count)
        .map(|i| {
            random_rule(
                rng,
                &format!("r{i}"),
                &format!("r{i}"),
                max_rule_vertices,
                flavour,
            )
        })
        .collect();
    let vertices = rng.random_range(1..=shape.vertices);
    let mut host = random_ground(
        rng,
        HostShape {
            vertices,
            arrows: shape.arrows / 2,
            labels: shape.labels.min(2),
        },
    );
    for _ in 0..rng.random_range(1..=3) {
        let r = rules.choose(rng).unwrap();
        plant(rng, &mut host, r, shape.vertices, shape.arrows);
    }
    let host = trim_labels(rng, &host, shape.labels);
    Instance {
        rules: RuleSet::new(rules).unwrap(),
        host,
    }
}

fn trim_labels(rng: &mut impl Rng, g: &Graph, max: usize) -> Graph {
    let trim = |rng: &mut _, ls: &Labels| -> Labels {
        let mut v: Vec<Term> = ls.iter().cloned().collect();
        v.shuffle(rng);
        v.truncate(max);
        v.into_iter().collect()
    };
    let mut out = Graph::new();
    for (v, ls) in g.vertices() {
        out.add_vertex(v.clone(), trim(rng, ls)).unwrap();
    }
    for (a, arrow) in g.arrows() {
        out.add_arrow(
            a.clone(),
            arrow.src.clone(),
            arrow.tgt.clone(),
            trim(rng, &arrow.labels),
        )
        .unwrap();
    }
    out
}

/// A random Σ-subgraph of `g`.
pub fn random_sigma_subgraph(rng: &mut impl Rng, g: &Graph) -> Graph {
    let mut h = Graph::with_varset(g.varset().iter().cloned());
    for (v, ls) in g.vertices() {
        if rng.random_bool(0.7) {
            h.add_vertex(v.clone(), sub_labels(rng, ls, 0.6)).unwrap();
        }
    }
    for (a, arrow) in g.arrows() {
        if h.has_vertex(&arrow.src) && h.has_vertex(&arrow.tgt) && rng.random_bool(0.7) {
            h.add_arrow(
                a.clone(),
                arrow.src.clone(),
                arrow.tgt.clone(),
                sub_labels(rng, &arrow.labels, 0.6),
            )
            .unwrap();
        }
    }
    h
}

/// A graph joinable with `h`: part of `h` with other labels, plus new items.
pub fn random_joinable(rng: &mut impl Rng, h: &Graph) -> Graph {
    let pool = ground_pool();
    let mut g = Graph::new();
    for (v, ls) in h.vertices() {
        if rng.random_bool(0.5) {
            let mut ls = sub_labels(rng, ls, 0.5);
            ls.extend(pick_labels(rng, &pool, 1));
            g.add_vertex(v.clone(), ls).unwrap();
        }
    }
    for i in 1..=rng.random_range(0..=2) {
        g.add_vertex(format!("n{i}").as_str(), pick_labels(rng, &pool, 2))
            .unwrap();
    }
    for (a, arrow) in h.arrows() {
        if g.has_vertex(&arrow.src) && g.has_vertex(&arrow.tgt) && rng.random_bool(0.5) {
            g.add_arrow(
                a.clone(),
                arrow.src.clone(),
                arrow.tgt.clone(),
                pick_labels(rng, &pool, 1),
            )
            .unwrap();
        }
    }
    let vs: Vec<Id> = g.vertex_ids().cloned().collect();
    if !vs.is_empty() {
        for j in 1..=rng.random_range(0..=3) {
            let (x, y) = (
                vs.choose(rng).unwrap().clone(),
                vs.choose(rng).unwrap().clone(),
            );
            g.add_arrow(format!("m{j}").as_str(), x, y, pick_labels(rng, &pool, 1))
                .unwrap();
        }
    }
    g
}

/// A random deletion triple `(W, B, l)` over the items of `g`.
pub fn random_deletion(rng: &mut impl Rng, g: &Graph) -> (BTreeSet<Id>, BTreeSet<Id>, LabellingFn) {
    let pool = ground_pool();
    let w = g
        .vertex_ids()
        .filter(|_| rng.random_bool(0.25))
        .cloned()
        .collect();
    let b = g
        .arrow_ids()
        .filter(|_| rng.random_bool(0.25))
        .cloned()
        .collect();
    let mut l = LabellingFn::new();
    for item in g.items().collect::<Vec<_>>() {
        if rng.random_bool(0.4) {
            let own = g.labels(&item).unwrap().clone();
            let mut ls = sub_labels(rng, &own, 0.5);
            ls.extend(pick_labels(rng, &pool, 1));
            l.extend(item, ls);
        }
    }
    (w, b, l)
}
