//! Numeric tolerances and enumeration caps shared by every verifier.

/// Tolerances used by the verifiers. One record so that every check in the
/// crate reads its threshold from the same place.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// Absolute slack for distortion sandwiches and certificate checks.
    pub sandwich: f64,
    /// Relative threshold for centered quadratic forms of CND functions.
    pub cnd_form: f64,
    /// Relative eigenvalue clip for Gram factorizations.
    pub eigen_clip: f64,
    /// Relative residual allowed in GNS norm identities.
    pub gns_residual: f64,
    /// Agreement between closed-form and truncated Exp inner products.
    pub exp_series: f64,
    /// Pure floating-point identities (kernel algebra, norms).
    pub algebraic: f64,
}

pub const TOLERANCES: Tolerances = Tolerances {
    sandwich: 1e-9,
    cnd_form: 1e-8,
    eigen_clip: 1e-9,
    gns_residual: 1e-8,
    exp_series: 5e-7,
    algebraic: 1e-12,
};

/// Default BFS radius cap for word-length searches.
pub const DEFAULT_RADIUS_CAP: usize = 12;

/// Default cap on the number of elements an enumerated ball may hold.
pub const DEFAULT_BALL_CAP: usize = 2_000_000;

/// Default cap on unordered pairs evaluated by an exhaustive profile.
pub const DEFAULT_PAIR_CAP: usize = 100_000_000;

/// Cap on the number of materialized coefficients in a truncated Exp vector.
pub const EXP_ENTRY_CAP: usize = 2_000_000;
