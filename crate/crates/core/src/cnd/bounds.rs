use serde::Serialize;

use super::CndFunction;
use crate::config::TOLERANCES;
use crate::constructions::{
    amalgam_blocklength, hnn_blocklength, tree_distance, Amalgam, AmalgamElem, Factor, Hnn, HnnElem,
    TreeVertex,
};
use crate::error::{Error, Result};
use crate::groups::{enumerate_ball, Ball, BaseGroup, Group, GroupElement, LengthFunction};

const SAMPLE_RADIUS: usize = 4;

fn points(h: &BaseGroup) -> Result<Vec<GroupElement>> {
    match h.elements() {
        Some(e) => Ok(e),
        None => Ok(enumerate_ball(h, SAMPLE_RADIUS)?.elements().to_vec()),
    }
}

/// One inequality checked over a ball.
#[derive(Clone, Debug, Serialize)]
pub struct BoundCheck {
    pub name: String,
    pub checked: usize,
    pub violations: usize,
    /// Smallest `bound − value` (upper bounds) or `value − bound` (lower).
    pub worst_slack: f64,
}

impl BoundCheck {
    fn new(name: &str) -> Self {
        Self {
            name: name.into(),
            checked: 0,
            violations: 0,
            worst_slack: f64::INFINITY,
        }
    }

    fn record(&mut self, slack: f64) {
        self.checked += 1;
        self.worst_slack = self.worst_slack.min(slack);
        if slack < -TOLERANCES.sandwich {
            self.violations += 1;
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct BoundReport {
    pub checks: Vec<BoundCheck>,
}

impl BoundReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.violations == 0)
    }
}

/// Constants of the amalgam sandwich.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct AmalgamConstants {
    /// `(1/C)l_i(g)^ε ≤ ‖b_i(g)‖ ≤ C·l_i(g)` on both factors.
    pub c: f64,
    pub epsilon: f64,
    /// `max l_i(f)` over `F`, in factor lengths.
    pub m: f64,
    /// `min(1, least nonidentity factor length)`.
    pub m_prime: f64,
    /// `max l(f)` over `F`, in the length of `G`.
    pub m_bar: f64,
    /// `l_i(g) ≤ B·l(g)` on both factors.
    pub b: f64,
}

impl AmalgamConstants {
    /// Computes the least constants valid on the factors (exhaustively when
    /// finite, on a ball otherwise).
    pub fn compute(
        g: &Amalgam,
        psi1: &CndFunction<BaseGroup>,
        psi2: &CndFunction<BaseGroup>,
        epsilon: f64,
        lf: &LengthFunction<Amalgam>,
    ) -> Result<Self> {
        let mut c: f64 = 1.0;
        let mut m_prime: f64 = 1.0;
        let mut b: f64 = 1.0;
        for (side, psi) in [(Factor::G1, psi1), (Factor::G2, psi2)] {
            let h = g.factor(side);
            for x in points(h)? {
                let l = h.length(&x) as f64;
                if l == 0.0 {
                    continue;
                }
                let norm = psi.eval(&x).sqrt();
                if norm == 0.0 {
                    return Err(Error::Precondition(format!(
                        "‖b_{}‖ vanishes at {}, so no lower constant exists",
                        side.index(),
                        h.label(&x)
                    )));
                }
                c = c.max(norm / l).max(l.powf(epsilon) / norm);
                m_prime = m_prime.min(l);
                let lg = lf.length(&g.from_letters(&[(side, x.clone())])?)? as f64;
                b = b.max(l / lg);
            }
        }
        let mut m: f64 = 0.0;
        let mut m_bar: f64 = 0.0;
        for side in [Factor::G1, Factor::G2] {
            for f in g.subgroup(side) {
                m = m.max(g.factor(side).length(f) as f64);
                m_bar = m_bar.max(lf.length(&g.from_letters(&[(side, f.clone())])?)? as f64);
            }
        }
        Ok(Self {
            c,
            epsilon,
            m,
            m_prime,
            m_bar,
            b,
        })
    }
}

/// Checks, with `‖b(x)‖ = √ψ(x)` on every ball element:
/// the block bound `‖b(x)‖ ≤ C[Σ l₁(α_i) + Σ l₂(β_j)]`, the blocklength bound
/// `‖b(x)‖ ≤ C[l^SB(x) + 2Mk]`, the Lipschitz bound
/// `‖b(x)‖ ≤ C(2M/M′ + 1)B·l(x)`, and the lower bound
/// `‖b(x)‖ ≥ (1/C)(l(x) − min(l(x), M̄))^ε`.
pub fn amalgam_bound_report(
    g: &Amalgam,
    psi: &CndFunction<Amalgam>,
    k: &AmalgamConstants,
    ball: &Ball<AmalgamElem>,
) -> BoundReport {
    let mut blocks = BoundCheck::new("block sum");
    let mut sb = BoundCheck::new("shortest blocklength");
    let mut lip = BoundCheck::new("lipschitz");
    let mut lower = BoundCheck::new("lower");
    for (x, l) in ball.iter() {
        let l = l as f64;
        let norm = psi.eval(x).sqrt();
        let nf = g.normal_form(x);
        let block_len: usize = nf
            .alphas
            .iter()
            .map(|a| g.factor(Factor::G1).length(a))
            .sum::<usize>()
            + nf.betas
                .iter()
                .map(|b| g.factor(Factor::G2).length(b))
                .sum::<usize>();
        blocks.record(k.c * block_len as f64 - norm);
        let lsb = amalgam_blocklength(g, x) as f64;
        sb.record(k.c * (lsb + 2.0 * k.m * nf.k() as f64) - norm);
        lip.record(k.c * (2.0 * k.m / k.m_prime + 1.0) * k.b * l - norm);
        lower.record(norm - (l - l.min(k.m_bar)).powf(k.epsilon) / k.c);
    }
    BoundReport {
        checks: vec![blocks, sb, lip, lower],
    }
}

/// Constants of the HNN upper bounds.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct HnnConstants {
    /// `‖b(h)‖ ≤ C·l_H(h)` on `H`, `C ≥ 1`.
    pub c: f64,
    /// `max l_H(a)` over `A = ⟨F ∪ θ(F)⟩`.
    pub m: f64,
    pub m_prime: f64,
    /// `l_H(h) ≤ B·l(h)` on `H`.
    pub b: f64,
}

impl HnnConstants {
    pub fn compute(g: &Hnn, psi: &CndFunction<BaseGroup>, lf: &LengthFunction<Hnn>) -> Result<Self> {
        let h = g.base();
        let mut c: f64 = 1.0;
        let mut m_prime: f64 = 1.0;
        let mut b: f64 = 1.0;
        for x in points(h)? {
            let l = h.length(&x) as f64;
            if l == 0.0 {
                continue;
            }
            c = c.max(psi.eval(&x).sqrt() / l);
            m_prime = m_prime.min(l);
            b = b.max(l / lf.length(&g.from_h(x.clone()))? as f64);
        }
        let m = g
            .vanishing_subgroup()?
            .iter()
            .map(|a| h.length(a) as f64)
            .fold(0.0, f64::max);
        Ok(Self { c, m, m_prime, b })
    }
}

/// Checks, with `‖b̄(g)‖ = √ψ̄(g)` on every ball element: the normal-form
/// bound `‖b̄(g)‖ ≤ C[Σ l_H(γ_i) + l_H(α_{k+1}) + d_T(H, gH)]`, the
/// blocklength bound `‖b̄(g)‖ ≤ C[l^SB(g) + 2M(k+1)] + C·d_T`, and the
/// Lipschitz bound `‖b̄(g)‖ ≤ C(2M/M′ + 1)B·l(g) + C·d_T`.
///
/// The tree term is carried explicitly in the last two because the
/// blocklength counts only `H`-letters.
pub fn hnn_bound_report(
    g: &Hnn,
    psi_bar: &CndFunction<Hnn>,
    k: &HnnConstants,
    ball: &Ball<HnnElem>,
) -> Result<BoundReport> {
    let h = g.base();
    let mut normal = BoundCheck::new("normal form");
    let mut sb = BoundCheck::new("shortest blocklength");
    let mut lip = BoundCheck::new("lipschitz");
    for (x, l) in ball.iter() {
        let norm = psi_bar.eval(x).sqrt();
        let bf = g.britton_form(x);
        let dt = tree_distance(&TreeVertex::default(), &g.vertex(x)) as f64;
        let nf_len = bf.gammas.iter().map(|(c, _)| h.length(c)).sum::<usize>() + h.length(&bf.alpha);
        normal.record(k.c * (nf_len as f64 + dt) - norm);
        let lsb = hnn_blocklength(g, x)? as f64;
        sb.record(k.c * (lsb + 2.0 * k.m * (x.k() + 1) as f64 + dt) - norm);
        lip.record(k.c * ((2.0 * k.m / k.m_prime + 1.0) * k.b * l as f64 + dt) - norm);
    }
    Ok(BoundReport {
        checks: vec![normal, sb, lip],
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cnd::{amalgam_cnd, coset_indicator_cnd, hnn_cnd};
    use crate::constructions::CosetApparatus;

    fn unit(h: &BaseGroup) -> CndFunction<BaseGroup> {
        coset_indicator_cnd(h, &[h.identity()], 0.5).unwrap()
    }

    #[test]
    fn z2_star_z3_sandwich_holds() {
        let (z2, z3) = (BaseGroup::cyclic(2).unwrap(), BaseGroup::cyclic(3).unwrap());
        let g = Amalgam::free(z2.clone(), z3.clone()).unwrap();
        let (p1, p2) = (unit(&z2), unit(&z3));
        let psi = amalgam_cnd(&g, &p1, &p2).unwrap();
        let lf = LengthFunction::new(g.clone());
        let k = AmalgamConstants::compute(&g, &p1, &p2, 0.5, &lf).unwrap();
        assert_eq!((k.c, k.m, k.m_prime, k.m_bar, k.b), (1.0, 0.0, 1.0, 0.0, 1.0));
        let report = amalgam_bound_report(&g, &psi, &k, &lf.ball(6).unwrap());
        assert!(report.passed(), "{report:?}");
    }

    #[test]
    fn nontrivial_f_has_no_lower_constant() {
        let t = GroupElement::Table;
        let (z4, z6) = (BaseGroup::cyclic(4).unwrap(), BaseGroup::cyclic(6).unwrap());
        let g = Amalgam::new(z4.clone(), z6.clone(), vec![(t(0), t(0)), (t(2), t(3))]).unwrap();
        let p1 = coset_indicator_cnd(&z4, &[t(0), t(2)], 0.5).unwrap();
        let p2 = coset_indicator_cnd(&z6, &[t(0), t(3)], 0.5).unwrap();
        let lf = LengthFunction::new(g.clone());
        assert!(matches!(
            AmalgamConstants::compute(&g, &p1, &p2, 0.5, &lf),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn hnn_upper_bounds_hold() {
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
        let bar = hnn_cnd(&g, &psi).unwrap();
        let lf = LengthFunction::new(g.clone());
        let k = HnnConstants::compute(&g, &psi, &lf).unwrap();
        assert_eq!((k.c, k.m, k.m_prime, k.b), (1.0, 1.0, 1.0, 1.0));
        let report = hnn_bound_report(&g, &bar, &k, &lf.ball(5).unwrap()).unwrap();
        assert!(report.passed(), "{report:?}");
    }
}
