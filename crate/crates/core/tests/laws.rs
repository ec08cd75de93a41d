//! Algebraic laws of parallel rewriting over random small hosts.

use std::collections::BTreeSet;

use pargraph_core::terms::DEFAULT_SORT;
use pargraph_core::{
    classes, deletion_spec, enumerate_matchings, is_regular, is_sigma_subgraph, isomorphic, remove,
    rewrite_max, rewrite_min, select_representatives, select_representatives_seeded, Graph, Id,
    Rule, RuleMatch, Term, Var,
};
use proptest::prelude::*;

fn c(n: &str) -> Term {
    Term::constant(n, DEFAULT_SORT)
}

fn s(t: Term) -> Term {
    Term::app("s", DEFAULT_SORT, vec![t])
}

fn var(n: &str) -> Term {
    Term::var(Var::new(n, DEFAULT_SORT))
}

fn over(vars: &[&str]) -> Graph {
    Graph::with_varset(vars.iter().map(|v| Var::new(*v, DEFAULT_SORT)))
}

/// Relabels `x`, consumes the label of `y`, drops `z` and grows a new leaf.
fn relabel_rule() -> Rule {
    let mut l = over(&["u", "v"]);
    l.add_vertex("x", [var("u")]).unwrap();
    l.add_vertex("y", [var("u"), var("v")]).unwrap();
    l.add_vertex("z", [var("u")]).unwrap();
    l.add_arrow("f", "x", "y", []).unwrap();
    l.add_arrow("g", "x", "z", []).unwrap();
    let mut k = over(&["u", "v"]);
    k.add_vertex("x", [var("u")]).unwrap();
    k.add_vertex("y", [var("v")]).unwrap();
    k.add_arrow("f", "x", "y", []).unwrap();
    let mut r = over(&["u", "v"]);
    r.add_vertex("x", [c("a")]).unwrap();
    r.add_vertex("y", [s(var("v"))]).unwrap();
    r.add_vertex("w", [var("v")]).unwrap();
    r.add_arrow("f", "x", "y", []).unwrap();
    r.add_arrow("h", "x", "w", []).unwrap();
    Rule::new("relabel", l, k, r).unwrap()
}

/// Two parallel arrows collapse into one; symmetric in the arrows.
fn merge_rule() -> Rule {
    let mut l = Graph::new();
    l.add_vertex("x", []).unwrap();
    l.add_vertex("y", []).unwrap();
    l.add_arrow("f", "x", "y", []).unwrap();
    l.add_arrow("g", "x", "y", []).unwrap();
    let mut k = Graph::new();
    k.add_vertex("x", []).unwrap();
    k.add_vertex("y", []).unwrap();
    let mut r = k.clone();
    r.add_arrow("m", "x", "y", [c("b")]).unwrap();
    Rule::new("merge", l, k, r).unwrap()
}

/// Removes a vertex carrying a label together with everything around it.
fn erase_rule() -> Rule {
    let mut l = over(&["u"]);
    l.add_vertex("x", [s(var("u"))]).unwrap();
    Rule::new("erase", l, over(&["u"]), over(&["u"])).unwrap()
}

fn label_pool() -> Vec<Term> {
    vec![c("a"), c("b"), s(c("a")), s(c("b"))]
}

prop_compose! {
    fn host()(n in 1usize..=5)(
        vlabels in prop::collection::vec(prop::sample::subsequence(label_pool(), 0..=3), n),
        arrows in prop::collection::vec((0..n, 0..n, prop::sample::subsequence(label_pool(), 0..=1)), 0..=7),
    ) -> Graph {
        let mut g = Graph::new();
        for (i, ls) in vlabels.into_iter().enumerate() {
            g.add_vertex((i + 1).to_string(), ls).unwrap();
        }
        for (j, (x, y, ls)) in arrows.into_iter().enumerate() {
            g.add_arrow(format!("e{j}"), (x + 1).to_string(), (y + 1).to_string(), ls).unwrap();
        }
        g
    }
}

fn rules() -> Vec<Rule> {
    vec![relabel_rule(), merge_rule(), erase_rule()]
}

/// The matchings of all three rules, thinned by `mask`.
fn matchings(g: &Graph, mask: u64) -> Vec<RuleMatch> {
    rules()
        .iter()
        .flat_map(|r| enumerate_matchings(r, g))
        .enumerate()
        .filter(|(i, _)| mask >> (i % 64) & 1 == 1)
        .map(|(_, m)| m)
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn regular_exactly_when_min_equals_max(g in host(), mask in any::<u64>()) {
        let ms = matchings(&g, mask);
        let (min, max) = (rewrite_min(&g, &ms).unwrap(), rewrite_max(&g, &ms).unwrap());
        prop_assert_eq!(is_regular(&ms), min == max);
        prop_assert!(is_sigma_subgraph(&min, &max));
    }

    #[test]
    fn no_matchings_no_change(g in host()) {
        prop_assert_eq!(&rewrite_min(&g, &[]).unwrap(), &g);
        prop_assert_eq!(&rewrite_max(&g, &[]).unwrap(), &g);
    }

    #[test]
    fn enumerated_matchings_are_valid_and_sorted(g in host()) {
        for r in rules() {
            let ms = enumerate_matchings(&r, &g);
            prop_assert!(ms.iter().all(|m| m.is_valid_in(&g)));
            prop_assert!(ms.windows(2).all(|w| w[0] < w[1]));
        }
    }

    #[test]
    fn deletion_is_monotone(g in host(), mask in any::<u64>()) {
        let ms = matchings(&g, mask);
        let spec = deletion_spec(&ms);
        let removed = remove(&g, &spec.vertices, &spec.arrows, &spec.labels).unwrap();
        prop_assert!(is_sigma_subgraph(&removed, &g));
        let touched: BTreeSet<Id> = ms.iter().flat_map(|m| m.vertex_images().to_vec()).collect();
        prop_assert!(spec.vertices.is_subset(&touched));
    }

    #[test]
    fn classes_partition_the_closure(g in host()) {
        let ms: Vec<RuleMatch> = rules().iter().flat_map(|r| enumerate_matchings(r, &g)).collect();
        let cs = classes(&ms).unwrap();
        let members: usize = cs.iter().map(|c| c.members.len()).sum();
        let distinct: BTreeSet<&RuleMatch> = cs.iter().flat_map(|c| &c.members).collect();
        prop_assert_eq!(members, distinct.len());
        // Full enumerations are closed under automorphisms.
        prop_assert_eq!(members, ms.len());
        let reps = select_representatives(&ms).unwrap();
        prop_assert_eq!(reps.len(), cs.len());
        prop_assert!(reps.iter().zip(&cs).all(|(r, c)| *r == c.representative));
    }

    #[test]
    fn representatives_do_not_matter(g in host(), seed in any::<u64>()) {
        let ms: Vec<RuleMatch> = rules().iter().flat_map(|r| enumerate_matchings(r, &g)).collect();
        let canonical = select_representatives(&ms).unwrap();
        let seeded = select_representatives_seeded(&ms, seed).unwrap();
        prop_assert_eq!(is_regular(&canonical), is_regular(&seeded));
        prop_assert!(isomorphic(&rewrite_min(&g, &canonical).unwrap(), &rewrite_min(&g, &seeded).unwrap()));
        prop_assert!(isomorphic(&rewrite_max(&g, &canonical).unwrap(), &rewrite_max(&g, &seeded).unwrap()));
    }
}
