use std::collections::HashSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::CndFunction;
use crate::constructions::{Hnn, HnnElem, TreeVertex};
use crate::error::Result;
use crate::groups::{BaseGroup, Group, GroupElement};

/// `c(x, g) = σ(x)⁻¹·g·σ(g⁻¹x)` for a vertex `x = σ(x)H`.
pub fn cocycle(g: &Hnn, x: &TreeVertex, elem: &HnnElem) -> HnnElem {
    let sx = g.sigma(x);
    let moved = g.vertex(&g.op(&g.inverse(elem), &sx));
    g.op(&g.op(&g.inverse(&sx), elem), &g.sigma(&moved))
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct CocycleReport {
    pub triples: usize,
    /// Triples where `c(x, g₁g₂) ≠ c(x, g₁)c(g₁⁻¹x, g₂)`.
    pub relation_failures: usize,
    /// Values of `c` that are not in `H`.
    pub outside_h: usize,
    /// Vertices with `c(x, e) ≠ e`.
    pub identity_failures: usize,
    pub passed: bool,
}

/// Checks the cocycle relation on every `(x, g₁, g₂)`, that every value lies
/// in `H`, and that `c(x, e) = e`.
pub fn cocycle_check(g: &Hnn, triples: &[(TreeVertex, HnnElem, HnnElem)]) -> CocycleReport {
    let mut r = CocycleReport {
        triples: triples.len(),
        ..Default::default()
    };
    let e = g.identity();
    for (x, g1, g2) in triples {
        let lhs = cocycle(g, x, &g.op(g1, g2));
        let moved = g.vertex(&g.op(&g.inverse(g1), &g.sigma(x)));
        let rhs = g.op(&cocycle(g, x, g1), &cocycle(g, &moved, g2));
        if lhs != rhs {
            r.relation_failures += 1;
        }
        if lhs.k() > 0 {
            r.outside_h += 1;
        }
        if cocycle(g, x, &e) != e {
            r.identity_failures += 1;
        }
    }
    r.passed = r.relation_failures == 0 && r.outside_h == 0 && r.identity_failures == 0;
    r
}

/// `n` seeded triples: a vertex of a ball element and two ball elements.
pub fn sample_triples(g: &Hnn, ball: &[HnnElem], n: usize, seed: u64) -> Vec<(TreeVertex, HnnElem, HnnElem)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            let x = g.vertex(&ball[rng.gen_range(0..ball.len())]);
            let a = ball[rng.gen_range(0..ball.len())].clone();
            let b = ball[rng.gen_range(0..ball.len())].clone();
            (x, a, b)
        })
        .collect()
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct SupportReport {
    pub elements: usize,
    pub vertices: usize,
    /// Largest `|{x : c(x, g) ∉ A}|` seen.
    pub max_outside: usize,
    /// Elements with more than `k + 1` such vertices.
    pub count_violations: usize,
    /// `max |Σ_x ψ(c(x, g)) − ψ̃(g)|`.
    pub sum_mismatch: f64,
    pub passed: bool,
}

/// For each element `g`, counts the vertices `x` with `c(x, g) ∉ A` against
/// the block count `k + 1`, and compares `Σ_x ψ(c(x, g))` with `ψ̃(g)`.
///
/// `vertices` must contain every vertex on the tree path from `H` to `gH`;
/// the vertices of a ball of radius at least `l(g)` do.
pub fn cocycle_support(
    g: &Hnn,
    psi: &CndFunction<BaseGroup>,
    tilde: &CndFunction<Hnn>,
    elements: &[HnnElem],
    vertices: &[TreeVertex],
) -> Result<SupportReport> {
    let a: HashSet<GroupElement> = g.vanishing_subgroup()?.into_iter().collect();
    let mut r = SupportReport {
        elements: elements.len(),
        vertices: vertices.len(),
        ..Default::default()
    };
    for elem in elements {
        let mut outside = 0;
        let mut sum = 0.0;
        for x in vertices {
            let c = cocycle(g, x, elem);
            if !a.contains(c.tail()) {
                outside += 1;
                sum += psi.eval(c.tail());
            }
        }
        r.max_outside = r.max_outside.max(outside);
        if outside > elem.k() + 1 {
            r.count_violations += 1;
        }
        r.sum_mismatch = r.sum_mismatch.max((sum - tilde.eval(elem)).abs());
    }
    r.passed = r.count_violations == 0 && r.sum_mismatch == 0.0;
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cnd::hnn_tilde_psi;
    use crate::constructions::CosetApparatus;
    use crate::groups::LengthFunction;

    fn klein_hnn() -> Hnn {
        let z2 = BaseGroup::cyclic(2).unwrap();
        let h = BaseGroup::product(z2.clone(), z2);
        let p = |a, b| GroupElement::pair(GroupElement::Table(a), GroupElement::Table(b));
        Hnn::new(
            h,
            CosetApparatus::Finite {
                f: vec![p(0, 0), p(1, 0)],
                theta: vec![p(0, 0), p(0, 1)],
            },
        )
        .unwrap()
    }

    #[test]
    fn cocycle_relation_on_samples() {
        let g = klein_hnn();
        let ball = LengthFunction::new(g.clone()).ball(4).unwrap();
        let triples = sample_triples(&g, ball.elements(), 300, 11);
        let r = cocycle_check(&g, &triples);
        assert!(r.passed, "{r:?}");
    }

    #[test]
    fn support_and_sum_match_the_normal_form() {
        let h = BaseGroup::product(BaseGroup::integers(1).unwrap(), BaseGroup::cyclic(2).unwrap());
        let a = vec![
            h.parse_element("(0,0)").unwrap(),
            h.parse_element("(0,1)").unwrap(),
        ];
        let g = Hnn::new(
            h.clone(),
            CosetApparatus::Finite {
                f: a.clone(),
                theta: a,
            },
        )
        .unwrap();
        let psi = CndFunction::new(h, "n²", |x: &GroupElement| match x {
            GroupElement::Pair(n, _) => match n.as_ref() {
                GroupElement::Ints(v) => (v[0] * v[0]) as f64,
                _ => unreachable!(),
            },
            _ => unreachable!(),
        });
        let tilde = hnn_tilde_psi(&g, &psi).unwrap();
        let ball = LengthFunction::new(g.clone()).ball(5).unwrap();
        let mut vertices: Vec<_> = ball.elements().iter().map(|x| g.vertex(x)).collect();
        vertices.sort();
        vertices.dedup();
        let r = cocycle_support(&g, &psi, &tilde, ball.elements(), &vertices).unwrap();
        assert!(r.passed, "{r:?}");
        assert!(r.max_outside >= 2);
        let triples = sample_triples(&g, ball.elements(), 300, 5);
        assert!(cocycle_check(&g, &triples).passed);
    }
}
