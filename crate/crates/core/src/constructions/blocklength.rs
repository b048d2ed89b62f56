use super::amalgam::{Amalgam, AmalgamElem};
use super::hnn::{CosetApparatus, Hnn, HnnElem};
use super::Factor;
use crate::error::{Error, Result};
use crate::groups::{Group, GroupElement};

/// Shortest blocklength in an HNN-extension with finite `F`: the least
/// `Σ l_H(h_j)` over all `g = h₁t^{i₁}…h_kt^{i_k}h_{k+1}` with the normal
/// form's exponent pattern.
///
/// Any such decomposition is `h_j = c'_{j-1}⁻¹γ_jc_j` for carries
/// `c_j ∈ F` (before `t`) or `c_j ∈ θ(F)` (before `t⁻¹`), where
/// `c'_j = θ^{±1}(c_j)` is what the carry becomes on the other side of the
/// stable letter, so a dynamic program over carries is exact.
pub fn hnn_blocklength(g: &Hnn, x: &HnnElem) -> Result<usize> {
    let CosetApparatus::Finite { f, theta } = g.apparatus() else {
        return Err(Error::Precondition(
            "shortest blocklength needs a finite associated subgroup".into(),
        ));
    };
    let h = g.base();
    // (carry image c'_j, best cost so far)
    let mut states: Vec<(GroupElement, usize)> = vec![(h.identity(), 0)];
    for (gamma, e) in x.blocks() {
        let carries: Vec<(&GroupElement, &GroupElement)> = if *e > 0 {
            f.iter().zip(theta).collect()
        } else {
            theta.iter().zip(f).collect()
        };
        let mut next = Vec::with_capacity(carries.len());
        for (c, c_image) in carries {
            let best = states
                .iter()
                .map(|(prev, cost)| {
                    let block = h.op(&h.op(&h.inverse(prev), gamma), c);
                    cost + h.length(&block)
                })
                .min()
                .expect("at least one state");
            next.push((c_image.clone(), best));
        }
        states = next;
    }
    Ok(states
        .iter()
        .map(|(prev, cost)| cost + h.length(&h.op(&h.inverse(prev), x.tail())))
        .min()
        .expect("at least one state"))
}

/// Stable-letter count plus shortest blocklength: the length of the
/// cheapest reduced word for `x`.
pub fn reduced_word_length(g: &Hnn, x: &HnnElem) -> Result<usize> {
    Ok(x.k() + hnn_blocklength(g, x)?)
}

/// `l_H(θ(f)) ≤ l_H(f) + 2` and `l_H(f) ≤ l_H(θ(f)) + 2` on `F`: removing a
/// pinch `t⁻¹ft` or `tθ(f)t⁻¹` never lengthens a word, so word length equals
/// [`reduced_word_length`].
pub fn pinch_condition_holds(g: &Hnn) -> bool {
    match g.apparatus() {
        CosetApparatus::Finite { f, theta } => f.iter().zip(theta).all(|(a, b)| {
            let (la, lb) = (g.base().length(a), g.base().length(b));
            lb <= la + 2 && la <= lb + 2
        }),
        CosetApparatus::Scaled { .. } => false,
    }
}

/// Shortest blocklength in an amalgam: the least total factor length over
/// words `(γ₁, δ₁, …, γ_k, δ_k)` with `k` as in the normal form.
pub fn amalgam_blocklength(g: &Amalgam, x: &AmalgamElem) -> usize {
    let f_list = g.subgroup(Factor::G1);
    let len = |side: Factor, y: &GroupElement| g.factor(side).length(y);
    if x.blocks().is_empty() {
        let f = x.terminal();
        return len(Factor::G1, f).min(len(Factor::G2, &g.embed_f(Factor::G2, f)));
    }
    let mut slots: Vec<(Factor, GroupElement)> = Vec::new();
    if x.blocks()[0].0 == Factor::G2 {
        slots.push((Factor::G1, g.factor(Factor::G1).identity()));
    }
    slots.extend(x.blocks().iter().cloned());
    if slots.last().map(|s| s.0) == Some(Factor::G1) {
        slots.push((Factor::G2, g.factor(Factor::G2).identity()));
    }
    // carries in G₁ coordinates; the terminal f is absorbed by the last slot
    let mut states: Vec<(GroupElement, usize)> = vec![(g.factor(Factor::G1).identity(), 0)];
    let last = slots.len() - 1;
    for (j, (side, b)) in slots.iter().enumerate() {
        let gi = g.factor(*side);
        let outs: Vec<GroupElement> = if j == last {
            vec![x.terminal().clone()]
        } else {
            f_list.to_vec()
        };
        let mut next = Vec::with_capacity(outs.len());
        for c in outs {
            let c_side = g.embed_f(*side, &c);
            let best = states
                .iter()
                .map(|(prev, cost)| {
                    let p = gi.inverse(&g.embed_f(*side, prev));
                    cost + gi.length(&gi.op(&gi.op(&p, b), &c_side))
                })
                .min()
                .expect("at least one state");
            next.push((c, best));
        }
        states = next;
    }
    states[0].1
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::groups::{BaseGroup, LengthFunction};

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
    fn dihedral_blocklength() {
        let z2 = BaseGroup::cyclic(2).unwrap();
        let g = Amalgam::free(z2.clone(), z2).unwrap();
        let rsr = g.parse("1:1 2:1 1:1").unwrap();
        assert_eq!(amalgam_blocklength(&g, &rsr), 3);
        assert_eq!(amalgam_blocklength(&g, &g.identity()), 0);
    }

    #[test]
    fn reduced_length_equals_bfs_when_pinches_do_not_shorten() {
        let g = klein_hnn();
        assert!(pinch_condition_holds(&g));
        let lf = LengthFunction::new(g.clone());
        let ball = lf.ball(5).unwrap();
        for (x, l) in ball.iter() {
            assert_eq!(reduced_word_length(&g, x).unwrap(), l, "{}", g.label(x));
            assert!(hnn_blocklength(&g, x).unwrap() <= l);
        }
    }

    #[test]
    fn amalgam_blocklength_bounds_word_length() {
        let z4 = BaseGroup::cyclic(4).unwrap();
        let z6 = BaseGroup::cyclic(6).unwrap();
        let t = GroupElement::Table;
        let g = Amalgam::new(z4, z6, vec![(t(0), t(0)), (t(2), t(3))]).unwrap();
        let ball = LengthFunction::new(g.clone()).ball(5).unwrap();
        // B with l_i(a) ≤ B·l(a) on the factors
        let mut b: f64 = 1.0;
        for side in [Factor::G1, Factor::G2] {
            for a in g.factor(side).elements().unwrap() {
                let x = g.from_letters(&[(side, a.clone())]).unwrap();
                let l = ball.length_of(&x).unwrap();
                if l > 0 {
                    b = b.max(g.factor(side).length(&a) as f64 / l as f64);
                }
            }
        }
        for (x, l) in ball.iter() {
            assert!(
                amalgam_blocklength(&g, x) as f64 <= b * l as f64,
                "{}",
                g.label(x)
            );
        }
    }

    #[test]
    fn scaled_apparatus_is_a_precondition_error() {
        let g = Hnn::baumslag_solitar(2).unwrap();
        assert!(matches!(hnn_blocklength(&g, &g.t()), Err(Error::Precondition(_))));
    }
}
