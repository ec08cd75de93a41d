//! Backtracking search for isomorphisms between two graphs.
//!
//! Variable bijections are enumerated first (they fix how labels compare),
//! then vertices are placed one at a time in a connectivity-driven order,
//! pruned by label and degree signatures and by arrow multiplicities
//! between placed pairs. Once all vertices are placed, parallel arrows are
//! matched within each `(source, target)` bundle and label class.

use std::collections::HashMap;
use std::ops::ControlFlow;

use super::{Graph, Id, Labels, Morphism};
use crate::terms::{Substitution, Term, Var};

/// An isomorphism expressed as index vectors into the sorted vertex, arrow
/// and variable lists of the two graphs.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct IsoMap {
    pub vertices: Vec<usize>,
    pub arrows: Vec<usize>,
    pub vars: Vec<usize>,
}

struct Side<'a> {
    vertices: Vec<&'a Id>,
    arrows: Vec<&'a Id>,
    vars: Vec<&'a Var>,
    vlabels: Vec<&'a Labels>,
    alabels: Vec<&'a Labels>,
    degrees: Vec<(usize, usize, usize)>,
    neighbours: Vec<Vec<usize>>,
    bundles: HashMap<(usize, usize), Vec<usize>>,
}

impl<'a> Side<'a> {
    fn new(g: &'a Graph) -> Self {
        let vertices: Vec<&Id> = g.vertex_ids().collect();
        let index: HashMap<&Id, usize> =
            vertices.iter().enumerate().map(|(i, v)| (*v, i)).collect();
        let n = vertices.len();
        let mut arrows = Vec::new();
        let mut alabels = Vec::new();
        let mut degrees = vec![(0, 0, 0); n];
        let mut neighbours = vec![Vec::new(); n];
        let mut bundles: HashMap<(usize, usize), Vec<usize>> = HashMap::new();
        for (i, (id, a)) in g.arrows().enumerate() {
            let (s, t) = (index[&a.src], index[&a.tgt]);
            arrows.push(id);
            alabels.push(&a.labels);
            if s == t {
                degrees[s].2 += 1;
            } else {
                degrees[s].1 += 1;
                degrees[t].0 += 1;
                neighbours[s].push(t);
                neighbours[t].push(s);
            }
            bundles.entry((s, t)).or_default().push(i);
        }
        for ns in &mut neighbours {
            ns.sort_unstable();
            ns.dedup();
        }
        Side {
            vlabels: g.vertices().map(|(_, ls)| ls).collect(),
            vertices,
            arrows,
            vars: g.varset().iter().collect(),
            alabels,
            degrees,
            neighbours,
            bundles,
        }
    }

    fn multiplicity(&self, s: usize, t: usize) -> usize {
        self.bundles.get(&(s, t)).map_or(0, Vec::len)
    }
}

/// Reusable isomorphism search between a fixed pair of graphs.
pub struct IsoSearch<'a> {
    h: Side<'a>,
    g: Side<'a>,
}

impl<'a> IsoSearch<'a> {
    pub fn new(h: &'a Graph, g: &'a Graph) -> Self {
        IsoSearch {
            h: Side::new(h),
            g: Side::new(g),
        }
    }

    pub fn source_vertices(&self) -> &[&'a Id] {
        &self.h.vertices
    }

    pub fn source_arrows(&self) -> &[&'a Id] {
        &self.h.arrows
    }

    pub fn source_vars(&self) -> &[&'a Var] {
        &self.h.vars
    }

    pub fn to_morphism(&self, m: &IsoMap) -> Morphism {
        Morphism {
            vertices: m
                .vertices
                .iter()
                .enumerate()
                .map(|(i, &j)| (self.h.vertices[i].clone(), self.g.vertices[j].clone()))
                .collect(),
            arrows: m
                .arrows
                .iter()
                .enumerate()
                .map(|(i, &j)| (self.h.arrows[i].clone(), self.g.arrows[j].clone()))
                .collect(),
            subst: m
                .vars
                .iter()
                .enumerate()
                .map(|(i, &j)| (self.h.vars[i].clone(), Term::var(self.g.vars[j].clone())))
                .collect(),
        }
    }

    /// Calls `visit` on every isomorphism until it breaks.
    pub fn run(&self, mut visit: impl FnMut(&IsoMap) -> ControlFlow<()>) -> ControlFlow<()> {
        let (h, g) = (&self.h, &self.g);
        if h.vertices.len() != g.vertices.len()
            || h.arrows.len() != g.arrows.len()
            || h.vars.len() != g.vars.len()
        {
            return ControlFlow::Continue(());
        }
        let mut var_map = vec![usize::MAX; h.vars.len()];
        let mut used = vec![false; g.vars.len()];
        self.vars_rec(0, &mut var_map, &mut used, &mut visit)
    }

    fn vars_rec(
        &self,
        k: usize,
        var_map: &mut Vec<usize>,
        used: &mut [bool],
        visit: &mut dyn FnMut(&IsoMap) -> ControlFlow<()>,
    ) -> ControlFlow<()> {
        if k == var_map.len() {
            return self.with_vars(var_map, visit);
        }
        for j in 0..self.g.vars.len() {
            if !used[j] && self.g.vars[j].sort == self.h.vars[k].sort {
                used[j] = true;
                var_map[k] = j;
                self.vars_rec(k + 1, var_map, used, visit)?;
                used[j] = false;
            }
        }
        ControlFlow::Continue(())
    }

    fn with_vars(
        &self,
        var_map: &[usize],
        visit: &mut dyn FnMut(&IsoMap) -> ControlFlow<()>,
    ) -> ControlFlow<()> {
        let (h, g) = (&self.h, &self.g);
        let renaming: Substitution = var_map
            .iter()
            .enumerate()
            .map(|(i, &j)| (h.vars[i].clone(), Term::var(g.vars[j].clone())))
            .collect();
        let relabel = |ls: &Labels| -> Labels {
            if renaming.is_empty() {
                ls.clone()
            } else {
                renaming.apply_set(ls).expect("renaming covers the varset")
            }
        };
        let vlabels: Vec<Labels> = h.vlabels.iter().map(|ls| relabel(ls)).collect();
        let alabels: Vec<Labels> = h.alabels.iter().map(|ls| relabel(ls)).collect();

        let n = h.vertices.len();
        let compat: Vec<Vec<bool>> = (0..n)
            .map(|v| {
                (0..n)
                    .map(|c| h.degrees[v] == g.degrees[c] && &vlabels[v] == g.vlabels[c])
                    .collect()
            })
            .collect();
        let counts: Vec<usize> = compat
            .iter()
            .map(|row| row.iter().filter(|b| **b).count())
            .collect();
        if counts.contains(&0) {
            return ControlFlow::Continue(());
        }

        // Placement order: start from the most constrained vertex, then
        // prefer vertices with the most already-placed neighbours.
        let mut order = Vec::with_capacity(n);
        let mut placed = vec![false; n];
        let mut anchor = vec![None; n];
        let mut links = vec![0usize; n];
        while order.len() < n {
            let next = (0..n)
                .filter(|v| !placed[*v])
                .max_by(|a, b| {
                    links[*a]
                        .cmp(&links[*b])
                        .then(counts[*b].cmp(&counts[*a]))
                        .then(b.cmp(a))
                })
                .expect("unplaced vertex");
            placed[next] = true;
            for &w in &h.neighbours[next] {
                if !placed[w] {
                    links[w] += 1;
                    anchor[w].get_or_insert(next);
                }
            }
            order.push(next);
        }

        let mut state = VertexState {
            order: &order,
            anchor: &anchor,
            compat: &compat,
            alabels: &alabels,
            map: vec![usize::MAX; n],
            inverse: vec![usize::MAX; n],
            var_map,
        };
        self.vertices_rec(0, &mut state, visit)
    }

    fn consistent(&self, v: usize, c: usize, st: &VertexState) -> bool {
        let (h, g) = (&self.h, &self.g);
        for &w in &h.neighbours[v] {
            let d = st.map[w];
            if d != usize::MAX
                && (h.multiplicity(v, w) != g.multiplicity(c, d)
                    || h.multiplicity(w, v) != g.multiplicity(d, c))
            {
                return false;
            }
        }
        for &d in &g.neighbours[c] {
            let w = st.inverse[d];
            if w != usize::MAX
                && (h.multiplicity(v, w) != g.multiplicity(c, d)
                    || h.multiplicity(w, v) != g.multiplicity(d, c))
            {
                return false;
            }
        }
        true
    }

    fn vertices_rec(
        &self,
        k: usize,
        st: &mut VertexState,
        visit: &mut dyn FnMut(&IsoMap) -> ControlFlow<()>,
    ) -> ControlFlow<()> {
        if k == st.order.len() {
            return self.arrows_phase(st, visit);
        }
        let v = st.order[k];
        let candidates: Vec<usize> = match st.anchor[v] {
            Some(p) => self.g.neighbours[st.map[p]].clone(),
            None => (0..self.g.vertices.len()).collect(),
        };
        for c in candidates {
            if st.inverse[c] != usize::MAX || !st.compat[v][c] || !self.consistent(v, c, st) {
                continue;
            }
            st.map[v] = c;
            st.inverse[c] = v;
            self.vertices_rec(k + 1, st, visit)?;
            st.map[v] = usize::MAX;
            st.inverse[c] = usize::MAX;
        }
        ControlFlow::Continue(())
    }

    fn arrows_phase(
        &self,
        st: &VertexState,
        visit: &mut dyn FnMut(&IsoMap) -> ControlFlow<()>,
    ) -> ControlFlow<()> {
        let (h, g) = (&self.h, &self.g);
        let mut blocks: Vec<(Vec<usize>, Vec<usize>)> = Vec::new();
        let mut bundle_keys: Vec<&(usize, usize)> = h.bundles.keys().collect();
        bundle_keys.sort_unstable();
        for key in bundle_keys {
            let hs = &h.bundles[key];
            let Some(gs) = g.bundles.get(&(st.map[key.0], st.map[key.1])) else {
                return ControlFlow::Continue(());
            };
            if hs.len() != gs.len() {
                return ControlFlow::Continue(());
            }
            let mut hs = hs.clone();
            let mut gs = gs.clone();
            hs.sort_by(|a, b| st.alabels[*a].cmp(&st.alabels[*b]));
            gs.sort_by(|a, b| g.alabels[*a].cmp(g.alabels[*b]));
            if !hs
                .iter()
                .zip(&gs)
                .all(|(a, b)| &st.alabels[*a] == g.alabels[*b])
            {
                return ControlFlow::Continue(());
            }
            let mut start = 0;
            while start < hs.len() {
                let mut end = start + 1;
                while end < hs.len() && st.alabels[hs[end]] == st.alabels[hs[start]] {
                    end += 1;
                }
                blocks.push((hs[start..end].to_vec(), gs[start..end].to_vec()));
                start = end;
            }
        }
        let mut result = IsoMap {
            vertices: st.map.clone(),
            arrows: vec![usize::MAX; h.arrows.len()],
            vars: st.var_map.to_vec(),
        };
        blocks_rec(&mut blocks, 0, &mut result, visit)
    }
}

struct VertexState<'s> {
    order: &'s [usize],
    anchor: &'s [Option<usize>],
    compat: &'s [Vec<bool>],
    alabels: &'s [Labels],
    map: Vec<usize>,
    inverse: Vec<usize>,
    var_map: &'s [usize],
}

fn blocks_rec(
    blocks: &mut [(Vec<usize>, Vec<usize>)],
    b: usize,
    result: &mut IsoMap,
    visit: &mut dyn FnMut(&IsoMap) -> ControlFlow<()>,
) -> ControlFlow<()> {
    if b == blocks.len() {
        return visit(result);
    }
    let len = blocks[b].1.len();
    permutations_rec(blocks, b, 0, len, result, visit)
}

fn permutations_rec(
    blocks: &mut [(Vec<usize>, Vec<usize>)],
    b: usize,
    k: usize,
    len: usize,
    result: &mut IsoMap,
    visit: &mut dyn FnMut(&IsoMap) -> ControlFlow<()>,
) -> ControlFlow<()> {
    if k == len {
        for i in 0..len {
            result.arrows[blocks[b].0[i]] = blocks[b].1[i];
        }
        return blocks_rec(blocks, b + 1, result, visit);
    }
    for i in k..len {
        blocks[b].1.swap(k, i);
        let flow = permutations_rec(blocks, b, k + 1, len, result, visit);
        blocks[b].1.swap(k, i);
        flow?;
    }
    ControlFlow::Continue(())
}

/// Visits every isomorphism from `h` to `g` until `visit` breaks.
pub fn for_each_isomorphism(
    h: &Graph,
    g: &Graph,
    mut visit: impl FnMut(Morphism) -> ControlFlow<()>,
) {
    let search = IsoSearch::new(h, g);
    let _ = search.run(|m| visit(search.to_morphism(m)));
}

/// Some isomorphism from `h` to `g`, if the graphs are isomorphic.
pub fn find_isomorphism(h: &Graph, g: &Graph) -> Option<Morphism> {
    let mut found = None;
    for_each_isomorphism(h, g, |m| {
        found = Some(m);
        ControlFlow::Break(())
    });
    found
}

pub fn isomorphic(h: &Graph, g: &Graph) -> bool {
    find_isomorphism(h, g).is_some()
}
