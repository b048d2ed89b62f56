use std::sync::Arc;

use super::{DistortionCertificate, Embedding};
use crate::error::{Error, Result};
use crate::groups::{enumerate_ball, Group};
use crate::hilbert::{choose_t, KernelUnitFamily, Key, SparseVector};

/// The kernel family `ξ_x = e^{−t‖f(x)‖²}Exp(√(2t)f(x))` with
/// `t = choose_t(ε̄, ρ₊(R))` and `ρ₊(R) = C·R + D` from the certificate of
/// `f`, so that `d(x, y) ≤ R` forces `‖ξ_x − ξ_y‖ ≤ ε̄`.
pub fn embedding_to_family<E: 'static>(
    f: &Embedding<E>,
    eps_bar: f64,
    r: f64,
) -> Result<KernelUnitFamily<E>> {
    let cert = f
        .certificate()
        .ok_or_else(|| Error::Precondition("the kernel scale needs a certified ρ₊".into()))?;
    let t = choose_t(eps_bar, cert.upper(r))?;
    KernelUnitFamily::new(f.map_fn(), t)
}

/// `η(x) = |B_r|^{-1/2} Σ_{b ∈ B_r} δ_{xb}`: unit vectors whose distance
/// `√(2 − 2|xB_r ∩ yB_r|/|B_r|)` grows with `d(x, y)` and saturates at `√2`.
pub fn ball_average_family<G: Group + 'static>(g: &G, radius: usize) -> Result<Embedding<G::Elem>> {
    let ball = enumerate_ball(g, radius)?;
    let weight = 1.0 / (ball.len() as f64).sqrt();
    let elements: Vec<G::Elem> = ball.elements().to_vec();
    let space: Arc<str> = "l2(G)".into();
    let (g, s2) = (g.clone(), space.clone());
    Ok(Embedding::new(space, move |x: &G::Elem| {
        SparseVector::from_entries(
            s2.clone(),
            elements
                .iter()
                .map(|b| (Key::Dirac(g.label(&g.op(x, b))), weight)),
        )
    }))
}

/// `ρ₋(d) = ½√(n − 1)` on `[S_{n−1}, S_n)`, cut at the truncation order `N`:
/// beyond `S_N` the value stays `½√N`.
#[derive(Clone, Debug, PartialEq)]
pub struct StepProfile {
    thresholds: Vec<f64>,
}

impl StepProfile {
    /// `thresholds` lists `S₁ < S₂ < … < S_N`; `S₀ = 0` is implicit.
    pub fn new(thresholds: Vec<f64>) -> Result<Self> {
        let mut prev = 0.0;
        for &s in &thresholds {
            if !(s > prev) {
                return Err(Error::Precondition(
                    "thresholds must increase strictly from S₀ = 0".into(),
                ));
            }
            prev = s;
        }
        Ok(Self { thresholds })
    }

    pub fn thresholds(&self) -> &[f64] {
        &self.thresholds
    }

    pub fn order(&self) -> usize {
        self.thresholds.len()
    }

    pub fn value(&self, d: f64) -> f64 {
        let n = self.thresholds.iter().filter(|&&s| s <= d).count();
        0.5 * (n as f64).sqrt()
    }
}

/// Number of thresholds inside the verification radius, at least one.
pub fn default_truncation(thresholds: &[f64], radius: f64) -> usize {
    thresholds.iter().filter(|&&s| s <= radius).count().max(1)
}

/// `f(x) = ½((η₁(x) − η₁(x₀)) ⊕ … ⊕ (η_N(x) − η_N(x₀)))`.
///
/// When each `η_n` has unit norm and is at least `1` apart on pairs at
/// distance `≥ S_n`, `‖f(x) − f(y)‖ ≥ ρ₋(d(x, y))` for the returned profile.
/// The attached certificate records the unconditional bound
/// `‖f(x) − f(y)‖ ≤ √N`, i.e. `(ε, C, D) = (0, 1, √N)`.
pub fn vectors_to_embedding<E: Clone + Send + Sync + 'static>(
    families: &[Embedding<E>],
    thresholds: &[f64],
    x0: &E,
    n: usize,
) -> Result<(Embedding<E>, StepProfile)> {
    if n == 0 || families.len() < n || thresholds.len() < n {
        return Err(Error::Precondition(format!(
            "truncation {n} needs that many families ({}) and thresholds ({})",
            families.len(),
            thresholds.len()
        )));
    }
    let profile = StepProfile::new(thresholds[..n].to_vec())?;
    let parts: Vec<(Arc<dyn Fn(&E) -> SparseVector + Send + Sync>, SparseVector)> =
        families[..n].iter().map(|f| (f.map_fn(), f.eval(x0))).collect();
    let space: Arc<str> = format!("⊕{n}({})", families[0].space()).into();
    let s2 = space.clone();
    let cert = DistortionCertificate::new(0.0, 1.0, (n as f64).sqrt())?;
    let emb = Embedding::new(space, move |x: &E| {
        let mut out = SparseVector::zero(s2.clone());
        for (i, (f, base)) in parts.iter().enumerate() {
            let diff = f(x).sub(base).expect("one family, one key space");
            for (k, c) in diff.iter() {
                out.add_to(Key::sum(i as u32, k.clone()), 0.5 * c);
            }
        }
        out
    })
    .with_certificate(cert);
    Ok((emb, profile))
}
