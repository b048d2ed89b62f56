//! Explicit embeddings into sparse Hilbert spaces, their certificates, and
//! the transforms that build new embeddings from old ones.

mod free_product;
mod kernel;
mod quotient;

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::groups::{BaseGroup, Group, GroupElement, GroupKind};
use crate::hilbert::{Key, SparseVector};

pub use free_product::free_product_embed;
pub use kernel::{
    ball_average_family, default_truncation, embedding_to_family, vectors_to_embedding, StepProfile,
};
pub use quotient::{lift_cnd, push_cnd, quotient_transfer, QuotientGroup, TransferDirection, Transferable};

/// A claimed sandwich `(1/C)d^ε − D ≤ ‖f(x) − f(y)‖ ≤ C·d + D`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DistortionCertificate {
    pub epsilon: f64,
    pub c: f64,
    pub d: f64,
    /// Word-length radius of the ball the claim was verified or derived on;
    /// `None` for a claim valid on the whole group.
    pub radius: Option<usize>,
}

impl DistortionCertificate {
    pub fn new(epsilon: f64, c: f64, d: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&epsilon) || !(c > 0.0) || !(d >= 0.0) {
            return Err(Error::Domain(format!(
                "certificate needs ε ∈ [0,1], C > 0, D ≥ 0; got ({epsilon}, {c}, {d})"
            )));
        }
        Ok(Self {
            epsilon,
            c,
            d,
            radius: None,
        })
    }

    pub fn with_radius(mut self, radius: usize) -> Self {
        self.radius = Some(radius);
        self
    }

    pub fn lower(&self, dist: f64) -> f64 {
        dist.powf(self.epsilon) / self.c - self.d
    }

    pub fn upper(&self, dist: f64) -> f64 {
        self.c * dist + self.d
    }
}

type Map<E> = Arc<dyn Fn(&E) -> SparseVector + Send + Sync>;

/// A deterministic map from group elements into a sparse Hilbert space.
pub struct Embedding<E> {
    space: Arc<str>,
    map: Map<E>,
    certificate: Option<DistortionCertificate>,
}

impl<E> Clone for Embedding<E> {
    fn clone(&self) -> Self {
        Self {
            space: self.space.clone(),
            map: self.map.clone(),
            certificate: self.certificate,
        }
    }
}

impl<E> fmt::Debug for Embedding<E> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Embedding")
            .field("space", &self.space)
            .field("certificate", &self.certificate)
            .finish()
    }
}

impl<E: 'static> Embedding<E> {
    /// Wraps `map`; every value it returns must live in `space`.
    pub fn new<F>(space: impl Into<Arc<str>>, map: F) -> Self
    where
        F: Fn(&E) -> SparseVector + Send + Sync + 'static,
    {
        Self {
            space: space.into(),
            map: Arc::new(map),
            certificate: None,
        }
    }

    pub fn with_certificate(mut self, cert: DistortionCertificate) -> Self {
        self.certificate = Some(cert);
        self
    }

    pub fn space(&self) -> &str {
        &self.space
    }

    pub fn certificate(&self) -> Option<DistortionCertificate> {
        self.certificate
    }

    pub fn eval(&self, x: &E) -> SparseVector {
        (self.map)(x)
    }

    pub fn map_fn(&self) -> Map<E> {
        self.map.clone()
    }

    pub fn distance(&self, x: &E, y: &E) -> f64 {
        self.eval(x)
            .distance(&self.eval(y))
            .expect("an embedding maps into a single key space")
    }
}

/// `x ↦ x` on `ℤ^k`, coordinates keyed by index. On `ℤ` the Euclidean and
/// word metrics agree; on `ℤ^k` they differ by at most `√k`.
pub fn identity_embedding(g: &BaseGroup) -> Result<Embedding<GroupElement>> {
    let GroupKind::Integers { rank } = g.kind() else {
        return Err(Error::Precondition(
            "the identity embedding needs a free abelian group".into(),
        ));
    };
    let rank = *rank;
    let space = format!("l2^{rank}");
    let s2 = space.clone();
    let cert = DistortionCertificate::new(1.0, (rank as f64).sqrt(), 0.0)?;
    Ok(Embedding::new(space, move |x: &GroupElement| match x {
        GroupElement::Ints(v) => SparseVector::from_entries(
            s2.as_str(),
            v.iter()
                .enumerate()
                .map(|(i, c)| (Key::Coord(i as i64), *c as f64)),
        ),
        _ => panic!("{x:?} is not in ℤ^{rank}"),
    })
    .with_certificate(cert))
}

/// The constant map to `0`.
pub fn zero_embedding<E: 'static>(space: &str) -> Embedding<E> {
    let s: Arc<str> = space.into();
    Embedding::new(space, move |_: &E| SparseVector::zero(s.clone()))
}

/// `x ↦ δ_x` in `l²(G)`.
pub fn dirac_embedding<G: Group + 'static>(g: &G) -> Embedding<G::Elem> {
    let g = g.clone();
    let space: Arc<str> = "l2(G)".into();
    let s2 = space.clone();
    Embedding::new(space, move |x: &G::Elem| {
        SparseVector::dirac(s2.clone(), Key::Dirac(g.label(x)))
    })
}

/// `C̄ = max(2√2C, 2CD, C + (D+√2)/B)`.
pub fn exactify_constant(c: f64, d: f64, b: f64) -> Result<f64> {
    if !(b > 0.0) {
        return Err(Error::Domain(format!(
            "uniform discreteness gap B = {b} must be positive"
        )));
    }
    let s2 = std::f64::consts::SQRT_2;
    Ok((2.0 * s2 * c).max(2.0 * c * d).max(c + (d + s2) / b))
}

/// `x ↦ f(x) ⊕ δ_x`, which turns an `(ε, C, D)` sandwich on a space with
/// minimal distance `B` into an `(ε, C̄, 0)` sandwich.
pub fn exactify<G: Group + 'static>(
    g: &G,
    f: &Embedding<G::Elem>,
    claim: DistortionCertificate,
    b: f64,
) -> Result<Embedding<G::Elem>> {
    let c_bar = exactify_constant(claim.c, claim.d, b)?;
    let cert = DistortionCertificate::new(claim.epsilon, c_bar, 0.0)?;
    let space: Arc<str> = format!("{}⊕l2(G)", f.space()).into();
    let (s2, inner, delta) = (space.clone(), f.map_fn(), dirac_embedding(g));
    Ok(Embedding::new(space, move |x: &G::Elem| {
        SparseVector::direct_sum(s2.clone(), &[&inner(x), &delta.eval(x)])
    })
    .with_certificate(cert))
}

/// `x ↦ f(x) − f(base)`; distances are unchanged and `base ↦ 0`.
pub fn centered<E: Clone + Send + Sync + 'static>(f: &Embedding<E>, base: &E) -> Embedding<E> {
    let offset = f.eval(base);
    let inner = f.map_fn();
    let mut out = Embedding::new(f.space().to_string(), move |x: &E| {
        inner(x).sub(&offset).expect("same key space")
    });
    out.certificate = f.certificate;
    out
}

/// The δ-embedding of a finite group made exact: the zero map satisfies the
/// sandwich with `ε = 1, C = 1, D = diam`, and exactification with `B = 1`
/// yields `x ↦ δ_x − δ_e` with certificate `(1, C̄, 0)`.
pub fn finite_delta_embedding(g: &BaseGroup) -> Result<Embedding<GroupElement>> {
    let elements = g
        .elements()
        .ok_or_else(|| Error::Precondition("the δ-embedding needs a finite group".into()))?;
    let diam = elements.iter().map(|x| g.length(x)).max().unwrap_or(0);
    let claim = DistortionCertificate::new(1.0, 1.0, diam as f64)?;
    let zero = zero_embedding::<GroupElement>("0");
    let exact = exactify(g, &zero, claim, 1.0)?;
    Ok(centered(&exact, &g.identity()))
}

/// The exact factor embedding used for a base group in a construction:
/// identity on `ℤ`, the exact δ-embedding on finite groups.
pub fn factor_embedding(g: &BaseGroup) -> Result<Embedding<GroupElement>> {
    match g.kind() {
        GroupKind::Integers { rank: 1 } => identity_embedding(g),
        _ if g.is_finite() => finite_delta_embedding(g),
        _ => Err(Error::Precondition(
            "exact factor embeddings are shipped for ℤ and finite groups only".into(),
        )),
    }
}
