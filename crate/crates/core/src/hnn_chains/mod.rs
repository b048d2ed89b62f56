//! Chains that climb the Bass-Serre tree of an HNN-extension, the averaged
//! unit vectors they carry, and the numeric verification of their bounds.

mod schedule;

use std::collections::hash_map::DefaultHasher;
use std::collections::HashMap;
use std::hash::{Hash, Hasher};
use std::sync::{Arc, RwLock};

use serde::Serialize;

use crate::constructions::{alpha_orbit_meeting, alpha_step, CosetApparatus, Hnn, HnnElem, TreeVertex};
use crate::embeddings::{embedding_to_family, finite_delta_embedding};
use crate::error::{Error, Result};
use crate::groups::{Group, GroupElement, LengthFunction};
use crate::hilbert::KernelUnitFamily;

pub use schedule::{feasible_from, schedule, FeasibleIndex, Schedule, ScheduleParams};

/// `Y_v ⊂ X_v`, the points of `v` glued to the edge toward `α(v)`, and the
/// exponent `e` with `f_v(y) = y·t^e`.
pub fn edge_space(g: &Hnn, v: &TreeVertex) -> Result<(Vec<HnnElem>, i8)> {
    let CosetApparatus::Finite { f, theta } = g.apparatus() else {
        return Err(Error::Precondition(
            "edge spaces are enumerated for finite F only".into(),
        ));
    };
    let up = alpha_step(g, v);
    let e: i8 = if g.on_ray(v) || v.blocks().last().is_some_and(|b| b.1 < 0) {
        1
    } else {
        -1
    };
    let sigma = g.sigma(v);
    let mut ys: Vec<HnnElem> = f
        .iter()
        .chain(theta)
        .map(|k| g.mul_h(&sigma, k))
        .filter(|y| g.vertex(&g.mul_t(y, e)) == up)
        .collect();
    ys.sort();
    ys.dedup();
    if ys.len() != f.len() {
        return Err(Error::IncompleteCosets(format!(
            "edge space of a vertex has {} points, expected |F| = {}",
            ys.len(),
            f.len()
        )));
    }
    Ok((ys, e))
}

/// An s-chain: `x_{i+1} = f_{α^i(v)}(x̄_i)` with `x̄_i` a nearest point of
/// `Y_{α^i(v)}` to `x_i`.
#[derive(Clone, Debug)]
pub struct Chain {
    points: Vec<HnnElem>,
    nearest: Vec<HnnElem>,
    vertices: Vec<TreeVertex>,
}

impl Chain {
    pub fn start(&self) -> &HnnElem {
        &self.points[0]
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[HnnElem] {
        &self.points
    }

    /// `x̄_0, …, x̄_{s−2}`.
    pub fn nearest(&self) -> &[HnnElem] {
        &self.nearest
    }

    /// `v, α(v), …, α^{s−1}(v)`.
    pub fn vertices(&self) -> &[TreeVertex] {
        &self.vertices
    }

    /// The s-chain `(x_i, …, x_{i+s−1})` starting at the i-th point.
    pub fn window(&self, i: usize, s: usize) -> Result<Chain> {
        if i + s > self.len() {
            return Err(Error::Precondition(format!(
                "window {i}..{} exceeds a chain of length {}",
                i + s,
                self.len()
            )));
        }
        Ok(Chain {
            points: self.points[i..i + s].to_vec(),
            nearest: self.nearest[i..(i + s).saturating_sub(1).max(i)].to_vec(),
            vertices: self.vertices[i..i + s].to_vec(),
        })
    }
}

/// Builds the s-chain from `x0`. Nearest points are searched exhaustively
/// over `Y_v`, ties broken by the canonical order, and must lie within `Z`.
pub fn build_chain(g: &Hnn, lf: &LengthFunction<Hnn>, x0: &HnnElem, s: usize) -> Result<Chain> {
    if s == 0 {
        return Err(Error::Domain("a chain has at least one point".into()));
    }
    let z = g.z_constant()?;
    let mut points = vec![x0.clone()];
    let mut nearest = Vec::with_capacity(s - 1);
    let mut vertices = vec![g.vertex(x0)];
    for _ in 1..s {
        let (x, v) = (points.last().unwrap(), vertices.last().unwrap());
        let (ys, e) = edge_space(g, v)?;
        let mut best: Option<(usize, HnnElem)> = None;
        for y in ys {
            let d = lf.distance(x, &y)?;
            if best.as_ref().is_none_or(|(bd, by)| (d, &y) < (*bd, by)) {
                best = Some((d, y));
            }
        }
        let (d, bar) = best.expect("edge spaces are nonempty");
        if d >= z {
            return Err(Error::Precondition(format!(
                "nearest edge point at distance {d}, not below Z = {z}"
            )));
        }
        let next = g.mul_t(&bar, e);
        let up = alpha_step(g, v);
        debug_assert_eq!(g.vertex(&next), up);
        nearest.push(bar);
        points.push(next);
        vertices.push(up);
    }
    Ok(Chain {
        points,
        nearest,
        vertices,
    })
}

/// Unit vectors `ξ_x` for every `x ∈ G`: a base family `ξ̃` on `H`
/// transported to the vertex `xH` by its canonical representative, so
/// `ξ_x = ξ̃_h` in the component of `v = xH`, where `x = σ(v)h`.
#[derive(Clone, Debug)]
pub struct VertexFamily {
    base: KernelUnitFamily<GroupElement>,
    memo: Arc<RwLock<HashMap<(GroupElement, GroupElement), f64>>>,
}

impl VertexFamily {
    pub fn new(base: KernelUnitFamily<GroupElement>) -> Self {
        Self {
            base,
            memo: Arc::default(),
        }
    }

    pub fn base(&self) -> &KernelUnitFamily<GroupElement> {
        &self.base
    }

    /// `‖f(a) − f(b)‖²` of the underlying embedding, memoized.
    fn image_dist_sq(&self, a: &GroupElement, b: &GroupElement) -> f64 {
        let key = (a.clone(), b.clone());
        if let Some(&d) = self.memo.read().unwrap().get(&key) {
            return d;
        }
        let d = self
            .base
            .image(a)
            .distance_sq(&self.base.image(b))
            .expect("one key space");
        self.memo.write().unwrap().insert(key, d);
        d
    }

    /// `⟨ξ̃_a, ξ̃_b⟩` inside a single vertex component.
    pub fn inner_h(&self, a: &GroupElement, b: &GroupElement) -> f64 {
        (-self.base.t() * self.image_dist_sq(a, b)).exp()
    }

    /// `‖ξ̃_a − ξ̃_b‖²`, computed as `−2·expm1(−t‖f(a)−f(b)‖²)` to keep
    /// small distances accurate.
    pub fn dist_sq_h(&self, a: &GroupElement, b: &GroupElement) -> f64 {
        -2.0 * (-self.base.t() * self.image_dist_sq(a, b)).exp_m1()
    }
}

#[derive(Clone, Debug)]
struct Summand {
    vertex: Arc<TreeVertex>,
    key: u64,
    point: GroupElement,
}

/// `η = √(1/s) Σ ξ_{x_i}`, held as its `(vertex, point)` summands.
#[derive(Clone, Debug)]
pub struct Eta {
    summands: Vec<Summand>,
}

/// `η` of a chain; the summands sit in distinct vertex components.
pub fn eta(chain: &Chain) -> Eta {
    Eta {
        summands: chain
            .points
            .iter()
            .zip(&chain.vertices)
            .map(|(x, v)| {
                let mut h = DefaultHasher::new();
                v.hash(&mut h);
                Summand {
                    vertex: Arc::new(v.clone()),
                    key: h.finish(),
                    point: x.tail().clone(),
                }
            })
            .collect(),
    }
}

impl Eta {
    pub fn len(&self) -> usize {
        self.summands.len()
    }

    pub fn is_empty(&self) -> bool {
        self.summands.is_empty()
    }

    /// `(vertex, point of H)` for each summand.
    pub fn summands(&self) -> impl Iterator<Item = (&TreeVertex, &GroupElement)> {
        self.summands.iter().map(|s| (s.vertex.as_ref(), &s.point))
    }

    /// `η` of the window `(x_i, …, x_{i+s−1})` of the underlying chain.
    pub fn window(&self, i: usize, s: usize) -> Eta {
        Eta {
            summands: self.summands[i..i + s].to_vec(),
        }
    }

    fn s(&self) -> f64 {
        self.summands.len() as f64
    }

    fn matched<'a>(&'a self, other: &'a Eta) -> Vec<(&'a GroupElement, &'a GroupElement)> {
        let index: HashMap<u64, &Summand> = other.summands.iter().map(|s| (s.key, s)).collect();
        self.summands
            .iter()
            .filter_map(|a| {
                index
                    .get(&a.key)
                    .filter(|b| b.vertex == a.vertex)
                    .map(|b| (&a.point, &b.point))
            })
            .collect()
    }

    pub fn norm_sq(&self, fam: &VertexFamily) -> f64 {
        self.inner(self, fam)
    }

    /// `(1/s) Σ ⟨ξ_{x_i}, ξ_{x′_j}⟩` over summands in a common vertex.
    pub fn inner(&self, other: &Eta, fam: &VertexFamily) -> f64 {
        let s = (self.s() * other.s()).sqrt();
        self.matched(other)
            .into_iter()
            .map(|(a, b)| fam.inner_h(a, b))
            .sum::<f64>()
            / s
    }

    /// `‖η − η′‖` for two etas of the same length: unmatched summands
    /// contribute `1/s` each, matched ones `‖ξ − ξ′‖²/s`.
    pub fn distance(&self, other: &Eta, fam: &VertexFamily) -> f64 {
        assert_eq!(self.len(), other.len(), "etas of equal length");
        let m = self.matched(other);
        let unmatched = 2 * (self.len() - m.len());
        let matched: f64 = m.into_iter().map(|(a, b)| fam.dist_sq_h(a, b)).sum();
        ((unmatched as f64 + matched) / self.s()).sqrt()
    }
}

/// Scale parameters with `√(2/s) ≤ ε/(2(R+1))` and `n ≥ (Z+2)R`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ChainParams {
    pub r: f64,
    pub epsilon: f64,
    pub s: usize,
    pub n: usize,
    pub z: usize,
}

impl ChainParams {
    /// The least `s` and `n` meeting both inequalities.
    pub fn minimal(r: f64, epsilon: f64, z: usize) -> Result<Self> {
        if !(r > 0.0) || !(epsilon > 0.0) {
            return Err(Error::Domain(format!(
                "need R > 0 and ε > 0; got R = {r}, ε = {epsilon}"
            )));
        }
        let s = (8.0 * (r + 1.0).powi(2) / epsilon.powi(2)).ceil() as usize;
        let n = ((z as f64 + 2.0) * r).ceil() as usize;
        Self::new(r, epsilon, s, n, z)
    }

    pub fn new(r: f64, epsilon: f64, s: usize, n: usize, z: usize) -> Result<Self> {
        let p = Self { r, epsilon, s, n, z };
        if !(r > 0.0) || !(epsilon > 0.0) || s == 0 {
            return Err(Error::Domain(format!("need R > 0, ε > 0, s ≥ 1; got {p:?}")));
        }
        if (2.0 / s as f64).sqrt() > p.eps_bar() {
            return Err(Error::Precondition(format!(
                "√(2/s) = {} exceeds ε/(2(R+1)) = {}",
                (2.0 / s as f64).sqrt(),
                p.eps_bar()
            )));
        }
        if (n as f64) < (z as f64 + 2.0) * r {
            return Err(Error::Precondition(format!(
                "n = {n} is below (Z+2)R = {}",
                (z as f64 + 2.0) * r
            )));
        }
        Ok(p)
    }

    /// `ε/(2(R+1))`.
    pub fn eps_bar(&self) -> f64 {
        self.epsilon / (2.0 * (self.r + 1.0))
    }

    /// `n + 2s(Z+1)`, the scale on which the vertex family must be `ε̄`-close.
    pub fn r_bar(&self) -> f64 {
        (self.n + 2 * self.s * (self.z + 1)) as f64
    }
}

/// The vertex family for a finite base group: the kernel family over its
/// exact δ-embedding, at the scale `t` that makes it `ε̄`-close on `R̄`.
pub fn vertex_family(g: &Hnn, params: &ChainParams) -> Result<VertexFamily> {
    let f = finite_delta_embedding(g.base())?;
    Ok(VertexFamily::new(embedding_to_family(
        &f,
        params.eps_bar(),
        params.r_bar(),
    )?))
}

/// `max ‖ξ̃_y − ξ̃_{y′}‖` over pairs with `d(y, y′) ≤ R̄`, and the kernel
/// table `(d(y, y′), ⟨ξ̃_y, ξ̃_{y′}⟩)` over all pairs of a finite `H`.
#[derive(Clone, Debug, Serialize)]
pub struct FamilyCheck {
    pub max_close_distance: f64,
    pub eps_bar: f64,
    pub passed: bool,
    pub kernel: Vec<(usize, f64)>,
}

pub fn check_vertex_family(
    g: &Hnn,
    lf: &LengthFunction<Hnn>,
    fam: &VertexFamily,
    params: &ChainParams,
) -> Result<FamilyCheck> {
    let elems = g
        .base()
        .elements()
        .ok_or_else(|| Error::Precondition("the vertex family is checked on a finite H".into()))?;
    let mut max_close: f64 = 0.0;
    let mut kernel = Vec::new();
    for a in &elems {
        for b in &elems {
            let d = lf.distance(&g.from_h(a.clone()), &g.from_h(b.clone()))?;
            if d as f64 <= params.r_bar() {
                max_close = max_close.max(fam.dist_sq_h(a, b).sqrt());
            }
            kernel.push((d, fam.inner_h(a, b)));
        }
    }
    Ok(FamilyCheck {
        max_close_distance: max_close,
        eps_bar: params.eps_bar(),
        passed: max_close <= params.eps_bar(),
        kernel,
    })
}

impl FamilyCheck {
    /// `sup{|⟨ξ_y, ξ_{y′}⟩| : d(y, y′) ≥ slack}` within one vertex space;
    /// `0` over an empty set.
    pub fn kernel_sup(&self, slack: f64) -> f64 {
        self.kernel
            .iter()
            .filter(|(d, _)| *d as f64 >= slack)
            .map(|(_, k)| k.abs())
            .fold(0.0, f64::max)
    }
}

/// One verified pair `(x₀, x₀′)`.
#[derive(Clone, Debug, Serialize)]
pub struct ChainPairReport {
    pub x0: String,
    pub x0_prime: String,
    pub d: usize,
    pub k: usize,
    pub l: usize,
    /// Largest step `d(x_i, x_{i+1})`, `d(x′_j, x′_{j+1})` along the climb.
    pub max_step: usize,
    /// `d(x_k, x′_l)`.
    pub meet_distance: usize,
    /// `(Z+2)R`.
    pub step_bound: f64,
    pub eta_dist: f64,
    /// Sum of the telescoping pieces.
    pub telescoped: f64,
    /// `(k+l+1)ε/(R+1)`.
    pub bound: f64,
    /// Largest shift piece, bounded by `ε/(R+1)`.
    pub max_shift_piece: f64,
    /// `‖η^{x(k)} − η^{x′(l)}‖`, bounded by `ε/(2(R+1))`.
    pub meet_piece: f64,
    pub inner: f64,
    /// Kernel sup at slack `d − 2s(Z+1)`.
    pub inner_bound: f64,
    pub steps_ok: bool,
    pub close_ok: bool,
    pub far_ok: bool,
    pub pass: bool,
}

/// Caches chains per starting point for a fixed instance and parameters.
pub struct ChainVerifier<'a> {
    g: &'a Hnn,
    lf: &'a LengthFunction<Hnn>,
    params: ChainParams,
    fam: VertexFamily,
    family_check: FamilyCheck,
    chains: HashMap<HnnElem, (Chain, Eta)>,
}

impl<'a> ChainVerifier<'a> {
    /// Fails if `Z` differs from the instance's or the vertex family is not
    /// `ε̄`-close on `R̄`.
    pub fn new(g: &'a Hnn, lf: &'a LengthFunction<Hnn>, params: ChainParams) -> Result<Self> {
        let z = g.z_constant()?;
        if z != params.z {
            return Err(Error::Precondition(format!(
                "parameters use Z = {}, the instance has Z = {z}",
                params.z
            )));
        }
        let fam = vertex_family(g, &params)?;
        let family_check = check_vertex_family(g, lf, &fam, &params)?;
        if !family_check.passed {
            return Err(Error::Precondition(format!(
                "vertex family reaches {} on R̄, above ε̄ = {}",
                family_check.max_close_distance, family_check.eps_bar
            )));
        }
        Ok(Self {
            g,
            lf,
            params,
            fam,
            family_check,
            chains: HashMap::new(),
        })
    }

    pub fn family(&self) -> &VertexFamily {
        &self.fam
    }

    pub fn family_check(&self) -> &FamilyCheck {
        &self.family_check
    }

    /// Builds and caches the chain from `x0`, long enough for every window
    /// the report needs.
    fn ensure_chain(&mut self, x0: &HnnElem) -> Result<()> {
        if !self.chains.contains_key(x0) {
            let len = self.params.s + self.params.r.ceil() as usize + 1;
            let c = build_chain(self.g, self.lf, x0, len)?;
            let e = eta(&c);
            self.chains.insert(x0.clone(), (c, e));
        }
        Ok(())
    }

    /// Evaluates every inequality for one pair. Pairs with `d ≥ R` get only
    /// the far-pair check.
    pub fn report(&mut self, x0: &HnnElem, x0p: &HnnElem) -> Result<ChainPairReport> {
        let (g, lf, p) = (self.g, self.lf, self.params);
        let s = p.s;
        let d = lf.distance(x0, x0p)?;
        let (k, l) = alpha_orbit_meeting(g, &g.vertex(x0), &g.vertex(x0p));
        self.ensure_chain(x0)?;
        self.ensure_chain(x0p)?;
        let ((cx, fx), (cy, fy)) = (&self.chains[x0], &self.chains[x0p]);
        let (ex, ey) = (fx.window(0, s), fy.window(0, s));
        let eta_dist = ex.distance(&ey, &self.fam);
        let inner = ex.inner(&ey, &self.fam);
        let slack = d as f64 - 2.0 * (s * (p.z + 1)) as f64;
        let inner_bound = self.family_check.kernel_sup(slack);
        let far_ok = inner.abs() <= inner_bound + crate::config::TOLERANCES.algebraic;
        let step_bound = (p.z as f64 + 2.0) * p.r;
        let close = (d as f64) < p.r;
        let mut r = ChainPairReport {
            x0: g.label(x0),
            x0_prime: g.label(x0p),
            d,
            k,
            l,
            max_step: 0,
            meet_distance: 0,
            step_bound,
            eta_dist,
            telescoped: 0.0,
            bound: (k + l + 1) as f64 * p.epsilon / (p.r + 1.0),
            max_shift_piece: 0.0,
            meet_piece: 0.0,
            inner,
            inner_bound,
            steps_ok: true,
            close_ok: true,
            far_ok,
            pass: far_ok,
        };
        if !close {
            return Ok(r);
        }
        let mut max_step = 0;
        let mut shift: f64 = 0.0;
        let mut telescoped = 0.0;
        for (c, f, m) in [(cx, fx, k), (cy, fy, l)] {
            for i in 0..m {
                max_step = max_step.max(lf.distance(&c.points[i], &c.points[i + 1])?);
                let piece = f.window(i, s).distance(&f.window(i + 1, s), &self.fam);
                shift = shift.max(piece);
                telescoped += piece;
            }
        }
        let meet_distance = lf.distance(&cx.points[k], &cy.points[l])?;
        let meet_piece = fx.window(k, s).distance(&fy.window(l, s), &self.fam);
        telescoped += meet_piece;
        let tol = crate::config::TOLERANCES.algebraic;
        r.max_step = max_step;
        r.meet_distance = meet_distance;
        r.telescoped = telescoped;
        r.max_shift_piece = shift;
        r.meet_piece = meet_piece;
        r.steps_ok = (max_step as f64) < step_bound && (meet_distance as f64) < step_bound;
        r.close_ok = shift <= p.epsilon / (p.r + 1.0) + tol
            && meet_piece <= p.eps_bar() + tol
            && eta_dist <= telescoped + tol
            && telescoped <= r.bound + tol
            && r.bound <= p.epsilon + tol
            && eta_dist <= p.epsilon + tol;
        r.pass = r.steps_ok && r.close_ok && r.far_ok;
        Ok(r)
    }
}

/// All pairs `(x₀, x₀′)` of the ball with `0 < d(x₀, x₀′) < R`, plus the
/// diagonal, verified in ball order.
pub fn chain_lemma_report(
    g: &Hnn,
    lf: &LengthFunction<Hnn>,
    params: ChainParams,
    ball_radius: usize,
) -> Result<Vec<ChainPairReport>> {
    let mut v = ChainVerifier::new(g, lf, params)?;
    let ball = lf.ball(ball_radius)?;
    let reach = (params.r.ceil() as usize).saturating_sub(1);
    let near = lf.ball(reach)?;
    let mut out = Vec::new();
    for x in ball.elements() {
        for h in near.elements() {
            if (lf.length(h)? as f64) >= params.r {
                continue;
            }
            let y = g.op(x, h);
            if ball.contains(&y) {
                out.push(v.report(x, &y)?);
            }
        }
    }
    Ok(out)
}

/// `|⟨η^x, η^{x′}⟩|` against the kernel sup at slack `d − 2s(Z+1)`.
#[derive(Clone, Debug, Serialize)]
pub struct FarPairReport {
    pub d: usize,
    pub k: usize,
    pub l: usize,
    pub inner: f64,
    pub slack: f64,
    pub bound: f64,
    /// `max(k, l) ≥ s` forces `⟨η, η′⟩ = 0` exactly.
    pub disjoint: bool,
    pub pass: bool,
}

/// Checks the inner-product bound on every pair, for any chain length `s`.
pub fn far_pair_report(
    g: &Hnn,
    lf: &LengthFunction<Hnn>,
    fam: &VertexFamily,
    kernel: &FamilyCheck,
    s: usize,
    pairs: &[(HnnElem, HnnElem)],
) -> Result<Vec<FarPairReport>> {
    let z = g.z_constant()?;
    let mut etas: HashMap<HnnElem, Eta> = HashMap::new();
    let mut out = Vec::with_capacity(pairs.len());
    for (x, y) in pairs {
        for w in [x, y] {
            if !etas.contains_key(w) {
                etas.insert(w.clone(), eta(&build_chain(g, lf, w, s)?));
            }
        }
        let d = lf.distance(x, y)?;
        let (k, l) = alpha_orbit_meeting(g, &g.vertex(x), &g.vertex(y));
        let inner = etas[x].inner(&etas[y], fam);
        let slack = d as f64 - 2.0 * (s * (z + 1)) as f64;
        let bound = kernel.kernel_sup(slack);
        let disjoint = k.max(l) >= s;
        let pass = inner.abs() <= bound + crate::config::TOLERANCES.algebraic && (!disjoint || inner == 0.0);
        out.push(FarPairReport {
            d,
            k,
            l,
            inner,
            slack,
            bound,
            disjoint,
            pass,
        });
    }
    Ok(out)
}
