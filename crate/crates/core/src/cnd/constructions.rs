use super::CndFunction;
use crate::constructions::{tree_distance, Amalgam, AmalgamElem, Factor, Hnn, HnnElem, TreeVertex};
use crate::error::{Error, Result};
use crate::groups::{enumerate_ball, BaseGroup, Group, GroupElement};

/// Radius of the ball on which invariance hypotheses are checked when a
/// base group is infinite.
const HYPOTHESIS_RADIUS: usize = 4;

fn test_points(h: &BaseGroup) -> Result<Vec<GroupElement>> {
    match h.elements() {
        Some(e) => Ok(e),
        None => Ok(enumerate_ball(h, HYPOTHESIS_RADIUS)?.elements().to_vec()),
    }
}

/// Checks that `ψ` vanishes on `a`, is `a`-bi-invariant and, when
/// `floor_off_a` is set, is at least one off `a`.
fn check_hypotheses(
    psi: &CndFunction<BaseGroup>,
    a: &[GroupElement],
    floor_off_a: bool,
    what: &str,
) -> Result<()> {
    let h = psi.group();
    if let Some(x) = a.iter().find(|x| psi.eval(x) != 0.0) {
        return Err(Error::Precondition(format!(
            "{what} does not vanish on {}",
            h.label(x)
        )));
    }
    for x in test_points(h)? {
        let v = psi.eval(&x);
        if floor_off_a && !a.contains(&x) && v < 1.0 {
            return Err(Error::Precondition(format!(
                "{what} is below 1 at {} outside the subgroup",
                h.label(&x)
            )));
        }
        for l in a {
            for r in a {
                if psi.eval(&h.op(&h.op(l, &x), r)) != v {
                    return Err(Error::Precondition(format!(
                        "{what} is not bi-invariant at {}",
                        h.label(&x)
                    )));
                }
            }
        }
    }
    Ok(())
}

/// `ψ(x) = Σ ψ₁(α_i) + Σ ψ₂(β_j)` over the normal form
/// `x = α₁β₁…α_kβ_k f`.
///
/// Each `ψ_i` must vanish on `F`, be `F`-bi-invariant and be at least one
/// off `F`; these are checked on the whole factor when it is finite and on a
/// ball otherwise. Conditional negativity of the result is not assumed.
pub fn amalgam_cnd(
    g: &Amalgam,
    psi1: &CndFunction<BaseGroup>,
    psi2: &CndFunction<BaseGroup>,
) -> Result<CndFunction<Amalgam>> {
    check_hypotheses(psi1, g.subgroup(Factor::G1), true, "ψ₁")?;
    check_hypotheses(psi2, g.subgroup(Factor::G2), true, "ψ₂")?;
    let vanishing: Vec<AmalgamElem> = g
        .subgroup(Factor::G1)
        .iter()
        .map(|f| g.from_letters(&[(Factor::G1, f.clone())]))
        .collect::<Result<_>>()?;
    let (g2, p1, p2) = (g.clone(), psi1.clone(), psi2.clone());
    let name = format!("Σψ₁(α)+Σψ₂(β) [{} | {}]", psi1.name(), psi2.name());
    Ok(CndFunction::new(g.clone(), name, move |x: &AmalgamElem| {
        let nf = g2.normal_form(x);
        nf.alphas.iter().map(|a| p1.eval(a)).sum::<f64>() + nf.betas.iter().map(|b| p2.eval(b)).sum::<f64>()
    })
    .with_vanishing(vanishing))
}

/// `ψ̃(g) = Σ ψ(γ_i) + ψ(α_{k+1})` over the Britton form
/// `g = γ₁t^{i₁}…γ_kt^{i_k}α_{k+1}f`.
pub fn hnn_tilde_psi(g: &Hnn, psi: &CndFunction<BaseGroup>) -> Result<CndFunction<Hnn>> {
    let a = g.vanishing_subgroup()?;
    check_hypotheses(psi, &a, false, "ψ")?;
    let (g2, p) = (g.clone(), psi.clone());
    let vanishing = a.iter().map(|x| g.from_h(x.clone())).collect();
    Ok(
        CndFunction::new(g.clone(), format!("ψ̃[{}]", psi.name()), move |x: &HnnElem| {
            let bf = g2.britton_form(x);
            bf.gammas.iter().map(|(c, _)| p.eval(c)).sum::<f64>() + p.eval(&bf.alpha)
        })
        .with_vanishing(vanishing),
    )
}

/// `ψ′(g) = d_T(H, gH)`.
pub fn tree_cnd(g: &Hnn) -> CndFunction<Hnn> {
    let g2 = g.clone();
    CndFunction::new(g.clone(), "d_T(H,gH)", move |x: &HnnElem| {
        tree_distance(&TreeVertex::default(), &g2.vertex(x)) as f64
    })
}

/// `ψ̄ = ψ̃ + ψ′` for `ψ` vanishing on the finite group `A = ⟨F ∪ θ(F)⟩`
/// and `A`-bi-invariant.
pub fn hnn_cnd(g: &Hnn, psi: &CndFunction<BaseGroup>) -> Result<CndFunction<Hnn>> {
    let tilde = hnn_tilde_psi(g, psi)?;
    let tree = tree_cnd(g);
    let name = format!("ψ̃+d_T [{}]", psi.name());
    let vanishing = g.vanishing_subgroup()?.into_iter().map(|a| g.from_h(a)).collect();
    Ok(
        CndFunction::new(g.clone(), name, move |x: &HnnElem| tilde.eval(x) + tree.eval(x))
            .with_vanishing(vanishing),
    )
}
