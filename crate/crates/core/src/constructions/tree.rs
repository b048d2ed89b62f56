use std::collections::{BTreeMap, HashMap};

use super::hnn::{Hnn, HnnElem};
use crate::error::Result;
use crate::groups::{Group, GroupElement, LengthFunction};

/// A vertex `gH` of the Bass-Serre tree, named by the block part of the
/// Britton form of any of its elements.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct TreeVertex {
    blocks: Vec<(GroupElement, i8)>,
}

impl TreeVertex {
    pub fn blocks(&self) -> &[(GroupElement, i8)] {
        &self.blocks
    }

    /// Edges between this vertex and the base vertex `H`.
    pub fn depth(&self) -> usize {
        self.blocks.len()
    }

    fn prefix(&self, n: usize) -> Self {
        Self {
            blocks: self.blocks[..n].to_vec(),
        }
    }
}

impl Hnn {
    pub fn vertex(&self, x: &HnnElem) -> TreeVertex {
        TreeVertex {
            blocks: x.blocks().to_vec(),
        }
    }

    /// The section `σ(v)`: the vertex's blocks with trivial tail.
    pub fn sigma(&self, v: &TreeVertex) -> HnnElem {
        self.from_normal_blocks(v.blocks.clone(), self.base().identity())
    }

    /// Whether `v = t^k H` for some `k ≥ 0`.
    pub fn on_ray(&self, v: &TreeVertex) -> bool {
        v.blocks
            .iter()
            .all(|(g, e)| *e == 1 && self.base().is_identity(g))
    }

    /// Canonical name of the edge `xF`: `x` with its tail reduced modulo `F`.
    pub fn edge_label(&self, x: &HnnElem) -> HnnElem {
        let (_, f) = self.split_f(x.tail());
        self.mul_h(x, &self.base().inverse(&f))
    }
}

fn lcp(u: &TreeVertex, v: &TreeVertex) -> usize {
    u.blocks.iter().zip(&v.blocks).take_while(|(a, b)| a == b).count()
}

/// Length of the tree path between two vertices.
pub fn tree_distance(u: &TreeVertex, v: &TreeVertex) -> usize {
    u.depth() + v.depth() - 2 * lcp(u, v)
}

/// One edge toward the end of the ray `H, tH, t²H, …`.
pub fn alpha_step(g: &Hnn, v: &TreeVertex) -> TreeVertex {
    if g.on_ray(v) {
        let mut blocks = v.blocks.clone();
        blocks.push((g.base().identity(), 1));
        TreeVertex { blocks }
    } else {
        v.prefix(v.depth() - 1)
    }
}

/// The pair `(k, l)` with `α^k(u) = α^l(v)` for the first common vertex of
/// the two α-orbits.
pub fn alpha_orbit_meeting(g: &Hnn, u: &TreeVertex, v: &TreeVertex) -> (usize, usize) {
    let horizon = u.depth() + v.depth() + 2;
    let mut seen = HashMap::new();
    let mut w = u.clone();
    for k in 0..=2 * horizon {
        seen.entry(w.clone()).or_insert(k);
        w = alpha_step(g, &w);
    }
    let mut w = v.clone();
    for l in 0..=2 * horizon {
        if let Some(&k) = seen.get(&w) {
            return (k, l);
        }
        w = alpha_step(g, &w);
    }
    unreachable!("α-orbits of a tree meet on the ray")
}

/// Vertex path from `u` to `v`, both ends included.
pub fn tree_path(u: &TreeVertex, v: &TreeVertex) -> Vec<TreeVertex> {
    let c = lcp(u, v);
    let mut path: Vec<TreeVertex> = (c..=u.depth()).rev().map(|n| u.prefix(n)).collect();
    path.extend((c + 1..=v.depth()).map(|n| v.prefix(n)));
    path
}

#[derive(Clone, Debug, Default)]
pub struct TreeCheck {
    pub vertices: usize,
    pub edges: usize,
    /// Edge labels that were seen with two different endpoint pairs.
    pub inconsistent_edges: usize,
    /// Edges closing a cycle in the enumerated portion.
    pub cycles: usize,
    /// Edges whose endpoints are not at tree distance one.
    pub bad_lengths: usize,
}

impl TreeCheck {
    pub fn is_tree(&self) -> bool {
        self.inconsistent_edges == 0 && self.cycles == 0 && self.bad_lengths == 0
    }
}

/// Builds the portion of the tree spanned by edges `xF`, `x` in `elements`,
/// and checks that it is a forest of correctly placed edges.
pub fn tree_check(g: &Hnn, elements: &[HnnElem]) -> TreeCheck {
    let mut edges: BTreeMap<HnnElem, (TreeVertex, TreeVertex)> = BTreeMap::new();
    let mut report = TreeCheck::default();
    for x in elements {
        let ends = (g.vertex(x), g.vertex(&g.mul_t(x, 1)));
        match edges.get(&g.edge_label(x)) {
            Some(prev) if *prev != ends => report.inconsistent_edges += 1,
            Some(_) => {}
            None => {
                edges.insert(g.edge_label(x), ends);
            }
        }
    }
    let mut index: HashMap<TreeVertex, usize> = HashMap::new();
    let mut parent: Vec<usize> = Vec::new();
    fn find(parent: &mut [usize], mut i: usize) -> usize {
        while parent[i] != i {
            parent[i] = parent[parent[i]];
            i = parent[i];
        }
        i
    }
    for (a, b) in edges.values() {
        if tree_distance(a, b) != 1 {
            report.bad_lengths += 1;
        }
        let mut id = |v: &TreeVertex| {
            let n = index.len();
            *index.entry(v.clone()).or_insert_with(|| {
                parent.push(n);
                n
            })
        };
        let (i, j) = (id(a), id(b));
        let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
        if ri == rj {
            report.cycles += 1;
        } else {
            parent[ri] = rj;
        }
    }
    report.vertices = index.len();
    report.edges = edges.len();
    report
}

/// `d_T(xH, yH) + inf Σ d(x_{2k}, x_{2k+1})` over sequences that cross the
/// tree path one edge at a time by a single `t^{±1}` step.
///
/// Every point of a sequence of total length at most `budget` lies within
/// `budget` of `x`, so searching `x·ball(budget)` is exhaustive for any
/// `budget ≥ d(x, y)`. Returns `None` when no sequence fits the budget.
pub fn remark_decomposition(
    g: &Hnn,
    lf: &LengthFunction<Hnn>,
    x: &HnnElem,
    y: &HnnElem,
    budget: usize,
) -> Result<Option<usize>> {
    let path = tree_path(&g.vertex(x), &g.vertex(y));
    let ball = lf.ball(budget)?;
    let points: Vec<HnnElem> = ball.elements().iter().map(|b| g.op(x, b)).collect();
    let dist = |a: &HnnElem, b: &HnnElem| lf.length_within(&g.difference(a, b), budget);

    // cost of standing at each point of the current vertex, entered through
    // the previous crossing
    let mut layer: Vec<(HnnElem, usize)> = vec![(x.clone(), 0)];
    for w in path.windows(2) {
        let (u, v) = (&w[0], &w[1]);
        let dir: i8 = if v.depth() > u.depth() {
            v.blocks[u.depth()].1
        } else {
            -u.blocks[v.depth()].1
        };
        let mut next: Vec<(HnnElem, usize)> = Vec::new();
        for p in &points {
            if g.vertex(p) != *u {
                continue;
            }
            let q = g.mul_t(p, dir);
            if g.vertex(&q) != *v {
                continue;
            }
            let mut best: Option<usize> = None;
            for (z, c) in &layer {
                if let Some(d) = dist(z, p)? {
                    let total = c + d + 1;
                    if total <= budget && best.map_or(true, |b| total < b) {
                        best = Some(total);
                    }
                }
            }
            if let Some(b) = best {
                next.push((q, b));
            }
        }
        if next.is_empty() {
            return Ok(None);
        }
        layer = next;
    }
    let mut best: Option<usize> = None;
    for (z, c) in &layer {
        if let Some(d) = dist(z, y)? {
            let total = c + d;
            if total <= budget && best.map_or(true, |b| total < b) {
                best = Some(total);
            }
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bs12_tree_examples() {
        let g = Hnn::baumslag_solitar(2).unwrap();
        let h = TreeVertex::default();
        let th = g.vertex(&g.t());
        assert_eq!(tree_distance(&h, &th), 1);
        let a = g.parse("1").unwrap();
        assert_eq!(g.vertex(&a), h);
        assert_eq!(alpha_step(&g, &h), th);
        let t2 = g.vertex(&g.parse("t t").unwrap());
        let t3 = g.vertex(&g.parse("t t t").unwrap());
        assert_eq!(alpha_step(&g, &t2), t3);
    }

    #[test]
    fn alpha_reaches_the_ray_in_tree_distance_steps() {
        let g = Hnn::baumslag_solitar(2).unwrap();
        let lf = LengthFunction::new(g.clone());
        let ball = lf.ball(4).unwrap();
        for x in ball.elements() {
            let v = g.vertex(x);
            let ray_depth = v
                .blocks()
                .iter()
                .take_while(|(h, e)| *e == 1 && g.base().is_identity(h))
                .count();
            let proj = v.prefix(ray_depth);
            let mut w = v.clone();
            let mut steps = 0;
            while !g.on_ray(&w) {
                w = alpha_step(&g, &w);
                steps += 1;
            }
            assert_eq!(steps, tree_distance(&v, &proj));
        }
    }

    #[test]
    fn meeting_pair_sums_to_tree_distance_under_a_common_projection() {
        let g = Hnn::baumslag_solitar(2).unwrap();
        let ball = LengthFunction::new(g.clone()).ball(3).unwrap();
        let verts: Vec<TreeVertex> = ball.elements().iter().map(|x| g.vertex(x)).collect();
        for u in &verts {
            for v in &verts {
                let (k, l) = alpha_orbit_meeting(&g, u, v);
                let mut a = u.clone();
                for _ in 0..k {
                    a = alpha_step(&g, &a);
                }
                let mut b = v.clone();
                for _ in 0..l {
                    b = alpha_step(&g, &b);
                }
                assert_eq!(a, b);
                let proj = |w: &TreeVertex| {
                    w.blocks()
                        .iter()
                        .take_while(|(h, e)| *e == 1 && g.base().is_identity(h))
                        .count()
                };
                if proj(u) == proj(v) {
                    assert_eq!(k + l, tree_distance(u, v));
                }
            }
        }
    }

    #[test]
    fn enumerated_portion_is_a_tree() {
        let g = Hnn::baumslag_solitar(2).unwrap();
        let ball = LengthFunction::new(g.clone()).ball(5).unwrap();
        let report = tree_check(&g, ball.elements());
        assert!(report.is_tree(), "{report:?}");
        assert!(report.edges > 10);
    }
}
