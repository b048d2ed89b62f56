use serde::Serialize;

use crate::error::{Error, Result};

/// Inputs of the parameter schedule: `0 < p < α₁ ≤ 1`, the base sandwich
/// `(C, D)` and the coset constant `Z`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ScheduleParams {
    pub p: f64,
    pub alpha1: f64,
    pub c: f64,
    pub d: f64,
    pub z: f64,
}

impl ScheduleParams {
    pub fn new(p: f64, alpha1: f64, c: f64, d: f64, z: f64) -> Result<Self> {
        if !(p > 0.0 && p < alpha1 && alpha1 <= 1.0) {
            return Err(Error::Domain(format!(
                "need 0 < p < α₁ ≤ 1; got p = {p}, α₁ = {alpha1}"
            )));
        }
        if !(c > 0.0 && d >= 0.0 && z > 0.0) {
            return Err(Error::Domain(format!(
                "need C > 0, D ≥ 0, Z > 0; got {c}, {d}, {z}"
            )));
        }
        Ok(Self { p, alpha1, c, d, z })
    }

    /// `(α₁ − p)/(3 + 18p)`.
    pub fn beta(&self) -> f64 {
        (self.alpha1 - self.p) / (3.0 + 18.0 * self.p)
    }

    /// Both scale inequalities at `m = e^u`, evaluated in log space so that
    /// `m` far beyond `u64` stays representable.
    fn flags_at_log(&self, u: f64) -> (bool, bool) {
        let (p, z) = (self.p, self.z);
        // n_m = m^p ≥ (Z+2) ln m
        let n_ok = p * u >= ((z + 2.0) * u).ln() || u <= 0.0;
        // √(2/s_m) ≤ ε_m/(2(R_m+1)) with s_m = m^{1+6p}, ε_m = m^{−(1/2+p)}
        let lhs = 0.5 * (2f64.ln() - (1.0 + 6.0 * p) * u);
        let rhs = -(0.5 + p) * u - (2.0 * (u + 1.0)).ln();
        (n_ok, lhs <= rhs)
    }
}

/// One row of the schedule at index `m`.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct Schedule {
    pub m: f64,
    pub epsilon: f64,
    pub r: f64,
    pub n: f64,
    pub s: f64,
    /// `ε_m/(2(R_m+1))`.
    pub eps_bar: f64,
    /// `n_m + 2s_m(Z+1)`.
    pub r_bar: f64,
    /// `−ln(1 − ε̄²/2)/(C·R̄ + D)²`.
    pub t: f64,
    /// `m^{(3/2+9p)/(α₁−p)}`.
    pub s_big: f64,
    /// `S_m + 2s_m(Z+1)`.
    pub s_big_prime: f64,
    pub n_ok: bool,
    pub s_ok: bool,
    pub beta: f64,
}

/// The schedule row at `m ≥ 2`. `m` is real so that the feasibility
/// threshold, far beyond `u64`, can be evaluated.
pub fn schedule(m: f64, params: &ScheduleParams) -> Result<Schedule> {
    if !(m >= 2.0) || !m.is_finite() {
        return Err(Error::Domain(format!(
            "schedule index m = {m} must be at least 2"
        )));
    }
    let ScheduleParams { p, alpha1, c, d, z } = *params;
    let u = m.ln();
    let epsilon = (-(0.5 + p) * u).exp();
    let r = u;
    let n = (p * u).exp();
    let s = ((1.0 + 6.0 * p) * u).exp();
    let eps_bar = epsilon / (2.0 * (r + 1.0));
    let r_bar = n + 2.0 * s * (z + 1.0);
    let t = -(-0.5 * eps_bar * eps_bar).ln_1p() / (c * r_bar + d).powi(2);
    let s_big = ((1.5 + 9.0 * p) / (alpha1 - p) * u).exp();
    let (n_ok, s_ok) = params.flags_at_log(u);
    Ok(Schedule {
        m,
        epsilon,
        r,
        n,
        s,
        eps_bar,
        r_bar,
        t,
        s_big,
        s_big_prime: s_big + 2.0 * s * (z + 1.0),
        n_ok,
        s_ok,
        beta: params.beta(),
    })
}

/// Where both scale inequalities start to hold for good.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct FeasibleIndex {
    /// `ln m*` to bisection precision.
    pub ln_m: f64,
    /// `m*` rounded up; exact only below `2⁵³`.
    pub m: f64,
    /// Largest `ln m` up to which both flags were checked to stay true.
    pub checked_to: f64,
    /// Whether the flags stayed true on every scanned point past `m*`.
    pub monotone: bool,
}

const SCAN_STEP: f64 = 1e-2;
const SCAN_LIMIT: f64 = 700.0;

/// The least `m ≥ 2` from which both flags hold, found by a scan over
/// `ln m` and refined by bisection, then checked to stay true to
/// `ln m = 700`.
pub fn feasible_from(params: &ScheduleParams) -> Result<FeasibleIndex> {
    let both = |u: f64| {
        let (a, b) = params.flags_at_log(u);
        a && b
    };
    let start = 2f64.ln();
    let steps = ((SCAN_LIMIT - start) / SCAN_STEP) as usize;
    let grid = |i: usize| start + i as f64 * SCAN_STEP;
    let last_false = (0..=steps).rev().find(|&i| !both(grid(i)));
    let (mut lo, mut hi) = match last_false {
        None => (start, start),
        Some(i) if i == steps => {
            return Err(Error::Domain(format!(
                "scale inequalities still fail at ln m = {SCAN_LIMIT}"
            )))
        }
        Some(i) => (grid(i), grid(i + 1)),
    };
    while hi - lo > 1e-12 * hi.max(1.0) {
        let mid = 0.5 * (lo + hi);
        if both(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let mut m = hi.exp().ceil();
    if m < 9.0e15 {
        // integer refinement where integers are exact
        while m > 2.0 && both((m - 1.0).ln()) {
            m -= 1.0;
        }
        while !both(m.ln()) {
            m += 1.0;
        }
    }
    let monotone = (0..=steps).map(grid).filter(|&u| u >= hi).all(both);
    Ok(FeasibleIndex {
        ln_m: hi,
        m,
        checked_to: SCAN_LIMIT,
        monotone,
    })
}
