//! Conditionally negative definite functions, their GNS cocycles on finite
//! balls, and the amalgam and HNN constructions built from them.

mod bounds;
mod cocycle;
mod constructions;

use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, RwLock};

use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::config::TOLERANCES;
use crate::constructions::is_subgroup;
use crate::embeddings::Embedding;
use crate::error::{Error, Result};
use crate::groups::{BaseGroup, Group, GroupElement};
use crate::hilbert::{Key, SparseVector};

pub use bounds::{amalgam_bound_report, hnn_bound_report, AmalgamConstants, BoundReport, HnnConstants};
pub use cocycle::{cocycle, cocycle_check, cocycle_support, sample_triples, CocycleReport, SupportReport};
pub use constructions::{amalgam_cnd, hnn_cnd, hnn_tilde_psi, tree_cnd};

type Rule<E> = Arc<dyn Fn(&E) -> f64 + Send + Sync>;

/// A function `ψ` on a group, evaluated on demand and memoized.
pub struct CndFunction<G: Group> {
    group: G,
    name: String,
    rule: Rule<G::Elem>,
    cache: Arc<RwLock<HashMap<G::Elem, f64>>>,
    vanishing: Option<Vec<G::Elem>>,
}

impl<G: Group> Clone for CndFunction<G> {
    fn clone(&self) -> Self {
        Self {
            group: self.group.clone(),
            name: self.name.clone(),
            rule: self.rule.clone(),
            cache: self.cache.clone(),
            vanishing: self.vanishing.clone(),
        }
    }
}

impl<G: Group> fmt::Debug for CndFunction<G> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CndFunction").field("name", &self.name).finish()
    }
}

impl<G: Group> CndFunction<G> {
    pub fn new<F>(group: G, name: impl Into<String>, rule: F) -> Self
    where
        F: Fn(&G::Elem) -> f64 + Send + Sync + 'static,
    {
        Self {
            group,
            name: name.into(),
            rule: Arc::new(rule),
            cache: Arc::new(RwLock::new(HashMap::new())),
            vanishing: None,
        }
    }

    /// Records the set `A` the function is known to vanish on.
    pub fn with_vanishing(mut self, set: Vec<G::Elem>) -> Self {
        self.vanishing = Some(set);
        self
    }

    pub fn group(&self) -> &G {
        &self.group
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn vanishing(&self) -> Option<&[G::Elem]> {
        self.vanishing.as_deref()
    }

    pub fn eval(&self, x: &G::Elem) -> f64 {
        if let Some(&v) = self.cache.read().unwrap().get(x) {
            return v;
        }
        let v = (self.rule)(x);
        self.cache.write().unwrap().insert(x.clone(), v);
        v
    }
}

/// The zero function.
pub fn zero_cnd<G: Group>(group: G) -> CndFunction<G> {
    CndFunction::new(group, "0", |_| 0.0)
}

#[derive(Clone, Debug, Serialize)]
pub struct CndReport {
    pub name: String,
    pub points: usize,
    pub trials: usize,
    /// Largest `Σ a_i a_j ψ(x_i⁻¹x_j)` over unit-norm centered weights.
    pub max_form: f64,
    /// `max ψ(x_i⁻¹x_j)` over the tuple.
    pub scale: f64,
    pub threshold: f64,
    pub zero_at_identity: bool,
    pub symmetric: bool,
    pub nonnegative: bool,
    pub passed: bool,
}

/// `ψ(x_i⁻¹x_j)` over a tuple of points.
fn difference_matrix<G: Group>(psi: &CndFunction<G>, points: &[G::Elem]) -> DMatrix<f64> {
    let g = psi.group();
    let n = points.len();
    let inv: Vec<G::Elem> = points.iter().map(|x| g.inverse(x)).collect();
    let mut m = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let v = psi.eval(&g.op(&inv[i], &points[j]));
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
    m
}

/// Evaluates the centered quadratic form of `ψ` on `trials` seeded weight
/// vectors. Weights are uniform on `[-1, 1]`, centered by subtracting their
/// mean so `Σ a_i = 0` exactly, and scaled to unit Euclidean norm.
pub fn check_cnd<G: Group>(psi: &CndFunction<G>, points: &[G::Elem], trials: usize, seed: u64) -> CndReport {
    let g = psi.group();
    let n = points.len();
    let m = difference_matrix(psi, points);
    let scale = m.iter().cloned().fold(0.0, f64::max);
    let threshold = TOLERANCES.cnd_form * scale;
    let zero_at_identity = psi.eval(&g.identity()) == 0.0;
    let mut symmetric = true;
    let mut nonnegative = true;
    for x in points {
        let (a, b) = (psi.eval(x), psi.eval(&g.inverse(x)));
        symmetric &= a == b;
        nonnegative &= a >= 0.0;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut max_form = f64::NEG_INFINITY;
    for _ in 0..trials {
        let mut a: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..=1.0)).collect();
        let mean = a.iter().sum::<f64>() / n.max(1) as f64;
        a.iter_mut().for_each(|v| *v -= mean);
        let norm = a.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm > 0.0 {
            a.iter_mut().for_each(|v| *v /= norm);
        }
        let mut form = 0.0;
        for i in 0..n {
            let mut row = 0.0;
            for j in 0..n {
                row += m[(i, j)] * a[j];
            }
            form += a[i] * row;
        }
        max_form = max_form.max(form);
    }
    if trials == 0 || n == 0 {
        max_form = 0.0;
    }
    CndReport {
        name: psi.name().to_string(),
        points: n,
        trials,
        max_form,
        scale,
        threshold,
        zero_at_identity,
        symmetric,
        nonnegative,
        passed: max_form <= threshold && zero_at_identity && symmetric && nonnegative,
    }
}

/// Explicit cocycle vectors `b(x)` on a finite ball with
/// `⟨b(x), b(y)⟩ = ½(ψ(x) + ψ(y) − ψ(x⁻¹y))`.
#[derive(Clone, Debug)]
pub struct GramEmbedding<E> {
    elements: Vec<E>,
    index: HashMap<E, usize>,
    gram: DMatrix<f64>,
    /// Row `i` is `b(elements[i])`.
    vectors: DMatrix<f64>,
    min_eigenvalue: f64,
    clip: f64,
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct GnsResiduals {
    /// `max |‖b(x)‖² − ψ(x)|`.
    pub norm: f64,
    /// `max |‖b(x) − b(y)‖² − ψ(y⁻¹x)|`.
    pub pair: f64,
    /// `max ψ` over the pairs, the scale of the tolerance.
    pub scale: f64,
    pub passed: bool,
}

impl<E: Clone + Eq + std::hash::Hash + Send + Sync + 'static> GramEmbedding<E> {
    pub fn elements(&self) -> &[E] {
        &self.elements
    }

    pub fn gram(&self) -> &DMatrix<f64> {
        &self.gram
    }

    pub fn dimension(&self) -> usize {
        self.vectors.ncols()
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.min_eigenvalue
    }

    pub fn clip(&self) -> f64 {
        self.clip
    }

    pub fn vector(&self, x: &E) -> Option<Vec<f64>> {
        self.index
            .get(x)
            .map(|&i| self.vectors.row(i).iter().cloned().collect())
    }

    /// `‖b(x) − b(y)‖²`.
    pub fn distance_sq(&self, x: &E, y: &E) -> Option<f64> {
        let (i, j) = (*self.index.get(x)?, *self.index.get(y)?);
        Some((self.vectors.row(i) - self.vectors.row(j)).norm_squared())
    }

    /// The vectors as an embedding of the ball; elements outside the ball
    /// map to `0`.
    pub fn to_embedding(&self) -> Embedding<E> {
        let index = self.index.clone();
        let vectors = self.vectors.clone();
        let space: Arc<str> = "gns".into();
        let s2 = space.clone();
        Embedding::new(space, move |x: &E| match index.get(x) {
            Some(&i) => SparseVector::from_entries(
                s2.clone(),
                vectors
                    .row(i)
                    .iter()
                    .enumerate()
                    .map(|(k, c)| (Key::Coord(k as i64), *c)),
            ),
            None => SparseVector::zero(s2.clone()),
        })
    }
}

/// Factors the Gram matrix of `ψ` on `elements` into explicit vectors.
///
/// Eigenvalues of magnitude at most `clip = eigen_clip·scale` are dropped; anything more negative
/// is a `NotCnd` error.
pub fn gns_embed<G: Group>(psi: &CndFunction<G>, elements: &[G::Elem]) -> Result<GramEmbedding<G::Elem>>
where
    G::Elem: 'static,
{
    let n = elements.len();
    let diff = difference_matrix(psi, elements);
    let at: Vec<f64> = elements.iter().map(|x| psi.eval(x)).collect();
    let scale = diff
        .iter()
        .cloned()
        .fold(0.0, f64::max)
        .max(at.iter().cloned().fold(0.0, f64::max));
    let gram = DMatrix::from_fn(n, n, |i, j| 0.5 * (at[i] + at[j] - diff[(i, j)]));
    let eig = SymmetricEigen::new(gram.clone());
    let clip = TOLERANCES.eigen_clip * scale.max(f64::MIN_POSITIVE);
    let min_eigenvalue = eig.eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min);
    if n > 0 && min_eigenvalue < -clip {
        return Err(Error::NotCnd {
            eigenvalue: min_eigenvalue,
            threshold: -clip,
        });
    }
    let keep: Vec<usize> = (0..n).filter(|&k| eig.eigenvalues[k] > clip).collect();
    let vectors = DMatrix::from_fn(n, keep.len(), |i, c| {
        let k = keep[c];
        eig.eigenvectors[(i, k)] * eig.eigenvalues[k].sqrt()
    });
    let index = elements
        .iter()
        .cloned()
        .enumerate()
        .map(|(i, x)| (x, i))
        .collect();
    Ok(GramEmbedding {
        elements: elements.to_vec(),
        index,
        gram,
        vectors,
        min_eigenvalue: if n == 0 { 0.0 } else { min_eigenvalue },
        clip,
    })
}

/// Compares the GNS vectors against `ψ` on every pair of the ball.
pub fn gns_residuals<G: Group>(psi: &CndFunction<G>, emb: &GramEmbedding<G::Elem>) -> GnsResiduals
where
    G::Elem: 'static,
{
    let g = psi.group();
    let els = emb.elements();
    let recon = &emb.vectors * emb.vectors.transpose();
    let mut norm: f64 = 0.0;
    let mut pair: f64 = 0.0;
    let mut scale: f64 = 0.0;
    for (i, x) in els.iter().enumerate() {
        norm = norm.max((recon[(i, i)] - psi.eval(x)).abs());
        let xinv = g.inverse(x);
        for (j, y) in els.iter().enumerate().skip(i + 1) {
            // ψ(y⁻¹x) = ψ(x⁻¹y) by symmetry
            let target = psi.eval(&g.op(&xinv, y));
            scale = scale.max(target);
            let got = recon[(i, i)] + recon[(j, j)] - 2.0 * recon[(i, j)];
            pair = pair.max((got - target).abs());
        }
    }
    let tol = TOLERANCES.gns_residual * scale;
    GnsResiduals {
        norm,
        pair,
        scale,
        passed: norm <= tol && pair <= tol,
    }
}

/// `ψ(x) = 2·scale·[x ∉ F]`, the squared norm of the cocycle
/// `b(x) = √scale·(δ_{xF} − δ_F)` over left cosets. It is `F`-bi-invariant
/// and vanishes exactly on `F`.
pub fn coset_indicator_cnd(h: &BaseGroup, f: &[GroupElement], scale: f64) -> Result<CndFunction<BaseGroup>> {
    if !(scale > 0.0) {
        return Err(Error::Domain(format!("indicator scale {scale} must be positive")));
    }
    if !f.iter().all(|x| h.contains(x)) || !is_subgroup(h, f) {
        return Err(Error::Precondition("F is not a subgroup of H".into()));
    }
    let trivial = f.len() == 1;
    if !h.is_finite() && !trivial {
        return Err(Error::Precondition(
            "coset indicators are realized for finite H or trivial F".into(),
        ));
    }
    let members: std::collections::HashSet<GroupElement> = f.iter().cloned().collect();
    let name = if trivial {
        format!("{}·[x≠e]", 2.0 * scale)
    } else {
        format!("{}·[x∉F]", 2.0 * scale)
    };
    Ok(CndFunction::new(h.clone(), name, move |x: &GroupElement| {
        if members.contains(x) {
            0.0
        } else {
            2.0 * scale
        }
    })
    .with_vanishing(f.to_vec()))
}

/// The cocycle `b(x) = √scale·(δ_{xF} − δ_F)` realizing
/// [`coset_indicator_cnd`], cosets keyed by their least element.
pub fn coset_indicator_cocycle(h: &BaseGroup, f: &[GroupElement], scale: f64) -> Embedding<GroupElement> {
    let (h, f) = (h.clone(), f.to_vec());
    let w = scale.sqrt();
    let space: Arc<str> = "l2(H/F)".into();
    let s2 = space.clone();
    Embedding::new(space, move |x: &GroupElement| {
        let rep = f
            .iter()
            .map(|a| h.op(x, a))
            .min_by(|a, b| (h.length(a), a).cmp(&(h.length(b), b)))
            .expect("F contains the identity");
        let base = h.identity();
        SparseVector::from_entries(
            s2.clone(),
            [(Key::Dirac(h.label(&rep)), w), (Key::Dirac(h.label(&base)), -w)],
        )
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::groups::LengthFunction;

    fn klein() -> BaseGroup {
        BaseGroup::product(BaseGroup::cyclic(2).unwrap(), BaseGroup::cyclic(2).unwrap())
    }

    fn p(a: usize, b: usize) -> GroupElement {
        GroupElement::pair(GroupElement::Table(a), GroupElement::Table(b))
    }

    #[test]
    fn zero_function_passes_and_has_zero_vectors() {
        let h = klein();
        let els = h.elements().unwrap();
        let psi = zero_cnd(h);
        let r = check_cnd(&psi, &els, 200, 7);
        assert!(r.passed && r.max_form == 0.0);
        let emb = gns_embed(&psi, &els).unwrap();
        assert_eq!(emb.dimension(), 0);
    }

    #[test]
    fn square_on_integers() {
        let z = BaseGroup::integers(1).unwrap();
        let els = LengthFunction::new(z.clone())
            .ball(5)
            .unwrap()
            .elements()
            .to_vec();
        let psi = CndFunction::new(z, "n²", |x: &GroupElement| match x {
            GroupElement::Ints(v) => (v[0] * v[0]) as f64,
            _ => unreachable!(),
        });
        assert!(check_cnd(&psi, &els, 200, 1).passed);
        let emb = gns_embed(&psi, &els).unwrap();
        assert_eq!(emb.dimension(), 1);
        assert!(gns_residuals(&psi, &emb).passed);
    }

    #[test]
    fn negative_control_is_rejected() {
        // ψ(n) = n⁴ is not conditionally negative definite on ℤ
        let z = BaseGroup::integers(1).unwrap();
        let els = LengthFunction::new(z.clone())
            .ball(3)
            .unwrap()
            .elements()
            .to_vec();
        let psi = CndFunction::new(z, "n⁴", |x: &GroupElement| match x {
            GroupElement::Ints(v) => (v[0] as f64).powi(4),
            _ => unreachable!(),
        });
        assert!(!check_cnd(&psi, &els, 200, 1).passed);
        assert!(matches!(gns_embed(&psi, &els), Err(Error::NotCnd { .. })));
    }

    #[test]
    fn coset_indicator_values_and_invariance() {
        let h = klein();
        let f = vec![p(0, 0), p(1, 0)];
        let psi = coset_indicator_cnd(&h, &f, 1.0).unwrap();
        let b = coset_indicator_cocycle(&h, &f, 1.0);
        for x in h.elements().unwrap() {
            let expect = if f.contains(&x) { 0.0 } else { 2.0 };
            assert_eq!(psi.eval(&x), expect);
            assert_eq!(b.eval(&x).norm_sq(), expect);
            for a in &f {
                for c in &f {
                    assert_eq!(psi.eval(&h.op(&h.op(a, &x), c)), expect);
                }
            }
        }
        let all = coset_indicator_cnd(&h, &h.elements().unwrap(), 1.0).unwrap();
        assert!(h.elements().unwrap().iter().all(|x| all.eval(x) == 0.0));
        assert!(matches!(
            coset_indicator_cnd(&h, &[p(0, 0), p(1, 1), p(1, 0)], 1.0),
            Err(Error::Precondition(_))
        ));
    }
}
