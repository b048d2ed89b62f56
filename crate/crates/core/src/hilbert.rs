//! Finitely supported real vectors over structured key spaces, the Exp
//! construction and kernel-represented unit-vector families.

use std::collections::btree_map::Entry;
use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use crate::config::EXP_ENTRY_CAP;
use crate::error::{Error, Result};

/// Index of one coordinate.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Key {
    /// A coordinate of `ℝ^k` or `l²(ℤ)`.
    Coord(i64),
    /// `δ_x`, keyed by the canonical label of `x`.
    Dirac(String),
    /// Summand of `⊕_{W_i} H` at the reduced prefix `prefix`.
    Prefix {
        factor: u8,
        prefix: String,
        inner: Box<Key>,
    },
    /// Summand of `⊕_{v ∈ V} H_v` at a tree vertex.
    Tree { vertex: String, inner: Box<Key> },
    /// Symmetric tensor basis element: a sorted multiset of base keys.
    /// The empty multiset is the scalar summand of `Exp(H)`.
    Tensor(Vec<Key>),
    /// Slot of a finite direct sum `H₀ ⊕ H₁ ⊕ …`.
    Sum { slot: u32, inner: Box<Key> },
}

impl Key {
    pub fn prefix(factor: u8, prefix: impl Into<String>, inner: Key) -> Self {
        Key::Prefix {
            factor,
            prefix: prefix.into(),
            inner: Box::new(inner),
        }
    }

    pub fn tree(vertex: impl Into<String>, inner: Key) -> Self {
        Key::Tree {
            vertex: vertex.into(),
            inner: Box::new(inner),
        }
    }

    pub fn sum(slot: u32, inner: Key) -> Self {
        Key::Sum {
            slot,
            inner: Box::new(inner),
        }
    }
}

impl fmt::Display for Key {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Key::Coord(i) => write!(f, "#{i}"),
            Key::Dirac(x) => write!(f, "δ[{x}]"),
            Key::Prefix {
                factor,
                prefix,
                inner,
            } => write!(f, "W{factor}[{prefix}]/{inner}"),
            Key::Tree { vertex, inner } => write!(f, "V[{vertex}]/{inner}"),
            Key::Tensor(keys) => {
                write!(f, "⊗(")?;
                for (i, k) in keys.iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{k}")?;
                }
                write!(f, ")")
            }
            Key::Sum { slot, inner } => write!(f, "⊕{slot}/{inner}"),
        }
    }
}

/// A finitely supported vector tagged with the name of its key space.
///
/// Zero coefficients are never stored, so the support is exact.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseVector {
    space: Arc<str>,
    entries: BTreeMap<Key, f64>,
}

impl SparseVector {
    pub fn zero(space: impl Into<Arc<str>>) -> Self {
        Self {
            space: space.into(),
            entries: BTreeMap::new(),
        }
    }

    /// Sums duplicate keys and drops zeros.
    pub fn from_entries<I>(space: impl Into<Arc<str>>, entries: I) -> Self
    where
        I: IntoIterator<Item = (Key, f64)>,
    {
        let mut v = Self::zero(space);
        for (k, c) in entries {
            v.add_to(k, c);
        }
        v
    }

    pub fn dirac(space: impl Into<Arc<str>>, key: Key) -> Self {
        Self::from_entries(space, [(key, 1.0)])
    }

    pub fn space(&self) -> &str {
        &self.space
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, key: &Key) -> f64 {
        self.entries.get(key).copied().unwrap_or(0.0)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Key, f64)> {
        self.entries.iter().map(|(k, c)| (k, *c))
    }

    pub fn add_to(&mut self, key: Key, c: f64) {
        if c == 0.0 {
            return;
        }
        match self.entries.entry(key) {
            Entry::Vacant(e) => {
                e.insert(c);
            }
            Entry::Occupied(mut e) => {
                *e.get_mut() += c;
                if *e.get() == 0.0 {
                    e.remove();
                }
            }
        }
    }

    fn check_space(&self, other: &Self) -> Result<()> {
        if self.space == other.space {
            Ok(())
        } else {
            Err(Error::KeySpace {
                left: self.space.to_string(),
                right: other.space.to_string(),
            })
        }
    }

    pub fn inner(&self, other: &Self) -> Result<f64> {
        self.check_space(other)?;
        let (small, large) = if self.len() <= other.len() {
            (self, other)
        } else {
            (other, self)
        };
        Ok(small
            .entries
            .iter()
            .filter_map(|(k, a)| large.entries.get(k).map(|b| a * b))
            .sum())
    }

    pub fn norm_sq(&self) -> f64 {
        self.entries.values().map(|c| c * c).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self::from_entries(self.space.clone(), self.iter().map(|(k, c)| (k.clone(), s * c)))
    }

    /// `self + s·other`.
    pub fn axpy(&self, s: f64, other: &Self) -> Result<Self> {
        self.check_space(other)?;
        let mut out = self.clone();
        for (k, c) in other.iter() {
            out.add_to(k.clone(), s * c);
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.axpy(-1.0, other)
    }

    /// `‖self − other‖²`, computed by merging the two supports.
    pub fn distance_sq(&self, other: &Self) -> Result<f64> {
        self.check_space(other)?;
        let mut a = self.entries.iter().peekable();
        let mut b = other.entries.iter().peekable();
        let mut acc = 0.0;
        loop {
            match (a.peek(), b.peek()) {
                (Some((ka, ca)), Some((kb, cb))) => match ka.cmp(kb) {
                    std::cmp::Ordering::Less => {
                        acc += *ca * *ca;
                        a.next();
                    }
                    std::cmp::Ordering::Greater => {
                        acc += *cb * *cb;
                        b.next();
                    }
                    std::cmp::Ordering::Equal => {
                        let d = *ca - *cb;
                        acc += d * d;
                        a.next();
                        b.next();
                    }
                },
                (Some((_, ca)), None) => {
                    acc += *ca * *ca;
                    a.next();
                }
                (None, Some((_, cb))) => {
                    acc += *cb * *cb;
                    b.next();
                }
                (None, None) => return Ok(acc),
            }
        }
    }

    pub fn distance(&self, other: &Self) -> Result<f64> {
        Ok(self.distance_sq(other)?.sqrt())
    }

    /// Relabels every key, moving the vector into `space`.
    pub fn map_keys<F>(&self, space: impl Into<Arc<str>>, f: F) -> Self
    where
        F: Fn(&Key) -> Key,
    {
        Self::from_entries(space, self.iter().map(|(k, c)| (f(k), c)))
    }

    /// `v₀ ⊕ v₁ ⊕ …` with `vᵢ` placed in slot `i`.
    pub fn direct_sum(space: impl Into<Arc<str>>, parts: &[&SparseVector]) -> Self {
        let mut out = Self::zero(space);
        for (i, p) in parts.iter().enumerate() {
            for (k, c) in p.iter() {
                out.add_to(Key::sum(i as u32, k.clone()), c);
            }
        }
        out
    }
}

/// One `key<TAB>value` line per stored coordinate, keys ascending.
impl fmt::Display for SparseVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "# space {}", self.space)?;
        for (k, c) in &self.entries {
            writeln!(f, "{k}\t{c:.17e}")?;
        }
        Ok(())
    }
}

/// `⟨Exp(ζ), Exp(ζ′)⟩ = e^{⟨ζ, ζ′⟩}`.
pub fn exp_inner(zeta: &SparseVector, zeta2: &SparseVector) -> Result<f64> {
    Ok(zeta.inner(zeta2)?.exp())
}

/// `Exp(ζ)` cut after the tensor power `order`.
#[derive(Clone, Debug)]
pub struct TruncatedExpVector {
    base: SparseVector,
    order: usize,
    vector: SparseVector,
}

impl TruncatedExpVector {
    pub fn base(&self) -> &SparseVector {
        &self.base
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn vector(&self) -> &SparseVector {
        &self.vector
    }

    pub fn inner(&self, other: &Self) -> Result<f64> {
        self.vector.inner(&other.vector)
    }

    /// The coefficients of tensor power `k`, i.e. of `(1/√k!) ζ^{⊗k}`.
    pub fn component(&self, k: usize) -> impl Iterator<Item = (&Key, f64)> {
        self.vector
            .iter()
            .filter(move |(key, _)| matches!(key, Key::Tensor(ks) if ks.len() == k))
    }
}

fn binomial(n: usize, k: usize) -> Option<usize> {
    let k = k.min(n - k);
    let mut acc: usize = 1;
    for i in 0..k {
        acc = acc.checked_mul(n - i)? / (i + 1);
    }
    Some(acc)
}

/// Materializes `Exp(ζ)` up to order `n` in the symmetric Fock basis.
///
/// The multiset `m` over the support of `ζ` carries `Π ζ_i^{m_i} / √(Π m_i!)`,
/// so order-`k` coefficients have squared norm `‖ζ‖^{2k}/k!` and inner
/// products between two truncations are `Σ_{k≤n} ⟨ζ,ζ′⟩^k/k!`.
pub fn truncated_exp(zeta: &SparseVector, n: usize) -> Result<TruncatedExpVector> {
    let support: Vec<(&Key, f64)> = zeta.iter().collect();
    let entries = binomial(support.len() + n, n).unwrap_or(usize::MAX);
    if entries > EXP_ENTRY_CAP {
        return Err(Error::TruncationTooDeep {
            order: n,
            entries,
            cap: EXP_ENTRY_CAP,
        });
    }
    let space = format!("Exp({})", zeta.space());
    let mut out = Vec::with_capacity(entries);
    // (next support index, multiset so far, coefficient so far, last multiplicity)
    fn walk(
        support: &[(&Key, f64)],
        start: usize,
        budget: usize,
        keys: &mut Vec<Key>,
        coef: f64,
        out: &mut Vec<(Key, f64)>,
    ) {
        out.push((Key::Tensor(keys.clone()), coef));
        if budget == 0 {
            return;
        }
        for i in start..support.len() {
            let (k, z) = support[i];
            let mut c = coef;
            let mut m = 0;
            while m < budget {
                m += 1;
                c *= z / (m as f64).sqrt();
                keys.push(k.clone());
                walk(support, i + 1, budget - m, keys, c, out);
            }
            keys.truncate(keys.len() - m);
        }
    }
    walk(&support, 0, n, &mut Vec::new(), 1.0, &mut out);
    Ok(TruncatedExpVector {
        base: zeta.clone(),
        order: n,
        vector: SparseVector::from_entries(space, out),
    })
}

/// `t = −ln(1 − ε̄²/2)/ρ₊(R)²`, the scale at which points whose images lie
/// within `ρ₊(R)` get kernel vectors within `ε̄`.
pub fn choose_t(eps_bar: f64, rho_plus_at_r: f64) -> Result<f64> {
    if !(eps_bar > 0.0 && eps_bar < std::f64::consts::SQRT_2) {
        return Err(Error::Domain(format!("ε̄ = {eps_bar} must lie in (0, √2)")));
    }
    if !(rho_plus_at_r > 0.0 && rho_plus_at_r.is_finite()) {
        return Err(Error::Domain(format!("ρ₊(R) = {rho_plus_at_r} must be positive")));
    }
    let inside = 1.0 - 0.5 * eps_bar * eps_bar;
    if inside <= 0.0 {
        return Err(Error::Domain(format!("ε̄ = {eps_bar} makes 1 − ε̄²/2 nonpositive")));
    }
    Ok(-inside.ln() / (rho_plus_at_r * rho_plus_at_r))
}

type VectorMap<X> = Arc<dyn Fn(&X) -> SparseVector + Send + Sync>;

/// The unit vectors `ξ_x = e^{−t‖f(x)‖²}Exp(√(2t)f(x))`, held implicitly
/// through `f` and `t`.
#[derive(Clone)]
pub struct KernelUnitFamily<X> {
    map: VectorMap<X>,
    t: f64,
}

impl<X> fmt::Debug for KernelUnitFamily<X> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("KernelUnitFamily").field("t", &self.t).finish()
    }
}

impl<X> KernelUnitFamily<X> {
    pub fn new(map: VectorMap<X>, t: f64) -> Result<Self> {
        if !(t > 0.0 && t.is_finite()) {
            return Err(Error::Domain(format!("kernel scale t = {t} must be positive")));
        }
        Ok(Self { map, t })
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    /// The underlying `f(x)`.
    pub fn image(&self, x: &X) -> SparseVector {
        (self.map)(x)
    }

    /// `⟨ξ_x, ξ_y⟩ = e^{−t‖f(x)−f(y)‖²}`.
    pub fn inner(&self, x: &X, y: &X) -> Result<f64> {
        Ok((-self.t * self.image(x).distance_sq(&self.image(y))?).exp())
    }

    /// `‖ξ_x − ξ_y‖ = √(2 − 2⟨ξ_x, ξ_y⟩)`.
    pub fn distance(&self, x: &X, y: &X) -> Result<f64> {
        Ok((2.0 - 2.0 * self.inner(x, y)?).max(0.0).sqrt())
    }

    /// `ξ_x` with `Exp` cut after order `n`.
    pub fn materialize(&self, x: &X, n: usize) -> Result<SparseVector> {
        let fx = self.image(x);
        let e = truncated_exp(&fx.scaled((2.0 * self.t).sqrt()), n)?;
        Ok(e.vector().scaled((-self.t * fx.norm_sq()).exp()))
    }
}

pub fn xi_inner<X>(fam: &KernelUnitFamily<X>, x: &X, y: &X) -> Result<f64> {
    fam.inner(x, y)
}
