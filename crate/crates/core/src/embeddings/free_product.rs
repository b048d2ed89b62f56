use std::sync::Arc;

use super::{DistortionCertificate, Embedding};
use crate::constructions::{Factor, FreeProduct, FreeProductWord};
use crate::error::{Error, Result};
use crate::groups::{Group, GroupElement};
use crate::hilbert::{Key, SparseVector};

/// The embedding of `G₁ ∗ G₂` into `(⊕_{W₁} H) ⊕ (⊕_{W₂} H)`.
///
/// For reduced `x = x₁…x_n` starting in `G_i`, the summand of `W_i` at the
/// prefix `x₁…x_j` carries `f(x_{j+1})` for the factor of `x_{j+1}`. Two
/// elements therefore share coordinates exactly along their common prefix.
pub fn free_product_embed(
    fp: &FreeProduct,
    f1: &Embedding<GroupElement>,
    f2: &Embedding<GroupElement>,
) -> Result<Embedding<FreeProductWord>> {
    let mut certs = Vec::new();
    for (side, f) in [(Factor::G1, f1), (Factor::G2, f2)] {
        if !f.eval(&fp.factor(side).identity()).is_empty() {
            return Err(Error::Precondition(format!(
                "factor embedding {} does not map the identity to 0",
                side.index()
            )));
        }
        match f.certificate() {
            Some(c) if c.d == 0.0 => certs.push(c),
            _ => {
                return Err(Error::Precondition(format!(
                    "factor embedding {} needs a certificate with D = 0",
                    side.index()
                )))
            }
        }
    }
    let epsilon = certs[0].epsilon.min(certs[1].epsilon).min(0.5);
    let cert = DistortionCertificate::new(epsilon, certs[0].c.max(certs[1].c), 0.0)?;
    let space: Arc<str> = format!("⊕W({}|{})", f1.space(), f2.space()).into();
    let (fp, s2) = (fp.clone(), space.clone());
    let (m1, m2) = (f1.map_fn(), f2.map_fn());
    Ok(Embedding::new(space, move |x: &FreeProductWord| {
        let mut out = SparseVector::zero(s2.clone());
        let Some(w) = x.first_factor() else {
            return out;
        };
        let mut prefix = String::from("e");
        for (j, l) in x.letters().iter().enumerate() {
            let image = match l.factor {
                Factor::G1 => m1(&l.elem),
                Factor::G2 => m2(&l.elem),
            };
            for (k, c) in image.iter() {
                out.add_to(Key::prefix(w.index() as u8, prefix.as_str(), k.clone()), c);
            }
            let label = format!("{}:{}", l.factor.index(), fp.factor(l.factor).label(&l.elem));
            if j == 0 {
                prefix = label;
            } else {
                prefix.push(' ');
                prefix.push_str(&label);
            }
        }
        out
    })
    .with_certificate(cert))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constructions::common_part;
    use crate::embeddings::{factor_embedding, identity_embedding};
    use crate::groups::{BaseGroup, LengthFunction};
    use approx::assert_abs_diff_eq;

    fn zz() -> (FreeProduct, Embedding<FreeProductWord>) {
        let z = BaseGroup::integers(1).unwrap();
        let fp = FreeProduct::new(z.clone(), z.clone());
        let f = identity_embedding(&z).unwrap();
        let emb = free_product_embed(&fp, &f, &f).unwrap();
        (fp, emb)
    }

    #[test]
    fn identity_maps_to_zero_and_ab_has_two_coordinates() {
        let (fp, f) = zz();
        assert!(f.eval(&fp.identity()).is_empty());
        let ab = fp.parse_word("1:1 2:1").unwrap();
        let v = f.eval(&ab);
        let keys: Vec<String> = v.iter().map(|(k, _)| k.to_string()).collect();
        assert_eq!(keys, vec!["W1[1:1]/#0", "W1[e]/#0"]);
        assert_abs_diff_eq!(v.norm(), 2f64.sqrt(), epsilon = 1e-15);
    }

    #[test]
    fn squared_distance_splits_along_the_common_part() {
        let (fp, f) = zz();
        let fac = BaseGroup::integers(1).unwrap();
        let g = identity_embedding(&fac).unwrap();
        let ball = LengthFunction::new(fp.clone()).ball(3).unwrap();
        let sq = |e: &GroupElement| g.eval(e).norm_sq();
        for x in ball.elements() {
            for y in ball.elements() {
                let cp = common_part(&fp, x, y);
                let mid = g.distance(&cp.g_x, &cp.g_y).powi(2);
                let tails: f64 = cp.tail_x.iter().chain(&cp.tail_y).map(|l| sq(&l.elem)).sum();
                let lhs = f.eval(x).distance_sq(&f.eval(y)).unwrap();
                assert_abs_diff_eq!(lhs, tails + mid, epsilon = 1e-9);
            }
        }
    }

    #[test]
    fn rejects_uncentered_factors() {
        let z2 = BaseGroup::cyclic(2).unwrap();
        let fp = FreeProduct::new(z2.clone(), z2.clone());
        let good = factor_embedding(&z2).unwrap();
        let bad = crate::embeddings::dirac_embedding(&z2)
            .with_certificate(DistortionCertificate::new(1.0, 2.0, 0.0).unwrap());
        assert!(matches!(
            free_product_embed(&fp, &good, &bad),
            Err(Error::Precondition(_))
        ));
        assert!(free_product_embed(&fp, &good, &good).is_ok());
    }
}
