//! Distortion profiles of embeddings over enumerated balls, compression
//! exponent fits and certificate checks.

use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::config::{DEFAULT_PAIR_CAP, TOLERANCES};
use crate::embeddings::{DistortionCertificate, Embedding};
use crate::error::{Error, Result};
use crate::groups::{Group, LengthFunction};
use crate::hilbert::{Key, SparseVector};

/// Which pairs of the ball a profile visits.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum PairMode {
    /// Every unordered pair of distinct elements, plus the diagonal.
    Exhaustive,
    /// `pairs` seeded draws of distinct elements, plus the diagonal.
    Sampled { pairs: usize, seed: u64 },
}

/// Embedded distances at one word distance `d`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProfileRecord {
    pub d: usize,
    pub min: f64,
    pub max: f64,
    pub count: usize,
    #[serde(skip)]
    pub min_pair: (String, String),
    #[serde(skip)]
    pub max_pair: (String, String),
}

#[derive(Clone, Debug, Serialize)]
pub struct DistortionProfile {
    pub radius: usize,
    pub mode: PairMode,
    /// One record per distance present, ascending in `d`.
    pub records: Vec<ProfileRecord>,
}

/// A sparse vector with keys replaced by dense ids, sorted by id.
type Compact = Vec<(u32, f64)>;

fn compact(v: &SparseVector, ids: &mut HashMap<Key, u32>) -> Compact {
    let mut out: Compact = v
        .iter()
        .map(|(k, c)| {
            let next = ids.len() as u32;
            (*ids.entry(k.clone()).or_insert(next), c)
        })
        .collect();
    out.sort_by_key(|e| e.0);
    out
}

fn compact_distance(a: &Compact, b: &Compact) -> f64 {
    let (mut i, mut j, mut acc) = (0, 0, 0.0);
    while i < a.len() && j < b.len() {
        let (ka, va) = a[i];
        let (kb, vb) = b[j];
        let d = match ka.cmp(&kb) {
            std::cmp::Ordering::Less => {
                i += 1;
                va
            }
            std::cmp::Ordering::Greater => {
                j += 1;
                vb
            }
            std::cmp::Ordering::Equal => {
                i += 1;
                j += 1;
                va - vb
            }
        };
        acc += d * d;
    }
    acc += a[i..].iter().map(|e| e.1 * e.1).sum::<f64>();
    acc += b[j..].iter().map(|e| e.1 * e.1).sum::<f64>();
    acc.sqrt()
}

struct Accumulator {
    records: Vec<Option<ProfileRecord>>,
}

impl Accumulator {
    fn add(&mut self, d: usize, m: f64, pair: impl Fn() -> (String, String)) {
        if self.records.len() <= d {
            self.records.resize(d + 1, None);
        }
        match &mut self.records[d] {
            None => {
                let p = pair();
                self.records[d] = Some(ProfileRecord {
                    d,
                    min: m,
                    max: m,
                    count: 1,
                    min_pair: p.clone(),
                    max_pair: p,
                });
            }
            Some(r) => {
                r.count += 1;
                if m < r.min {
                    r.min = m;
                    r.min_pair = pair();
                }
                if m > r.max {
                    r.max = m;
                    r.max_pair = pair();
                }
            }
        }
    }
}

/// Profiles `f` over the ball of radius `radius`. Deterministic in both
/// modes; exhaustive mode refuses balls with more than `pair_cap` pairs.
pub fn distortion_profile<G: Group>(
    lf: &LengthFunction<G>,
    f: &Embedding<G::Elem>,
    radius: usize,
    mode: PairMode,
    pair_cap: Option<usize>,
) -> Result<DistortionProfile>
where
    G::Elem: 'static,
{
    let g = lf.group();
    let ball = lf.ball(radius)?;
    let els = ball.elements();
    let n = els.len();
    let mut ids = HashMap::new();
    let vecs: Vec<Compact> = els.iter().map(|x| compact(&f.eval(x), &mut ids)).collect();
    let label = |i: usize| g.label(&els[i]);
    let mut acc = Accumulator { records: Vec::new() };
    let e = &els[0];
    acc.add(0, 0.0, || (g.label(e), g.label(e)));
    if let Some(r) = acc.records[0].as_mut() {
        r.count = n;
    }
    let mut visit = |i: usize, j: usize| -> Result<()> {
        let d = lf.distance(&els[i], &els[j])?;
        let m = compact_distance(&vecs[i], &vecs[j]);
        acc.add(d, m, || (label(i), label(j)));
        Ok(())
    };
    match mode {
        PairMode::Exhaustive => {
            let pairs = n * n.saturating_sub(1) / 2;
            let cap = pair_cap.unwrap_or(DEFAULT_PAIR_CAP);
            if pairs > cap {
                return Err(Error::TooManyPairs { pairs, cap });
            }
            for i in 0..n {
                for j in i + 1..n {
                    visit(i, j)?;
                }
            }
        }
        PairMode::Sampled { pairs, seed } => {
            if n >= 2 {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                for _ in 0..pairs {
                    let i = rng.gen_range(0..n);
                    let mut j = rng.gen_range(0..n - 1);
                    if j >= i {
                        j += 1;
                    }
                    visit(i.min(j), i.max(j))?;
                }
            }
        }
    }
    Ok(DistortionProfile {
        radius,
        mode,
        records: acc.records.into_iter().flatten().collect(),
    })
}

impl DistortionProfile {
    pub fn record(&self, d: usize) -> Option<&ProfileRecord> {
        self.records.iter().find(|r| r.d == d)
    }

    /// Rows `d,min,max,count`, ascending in `d`.
    pub fn write_csv<W: std::io::Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        for r in &self.records {
            out.serialize(r).map_err(|e| Error::Parse(e.to_string()))?;
        }
        out.flush()?;
        Ok(())
    }
}

/// `ε̂(C)` at one grid point.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct FitPoint {
    pub c: f64,
    pub epsilon: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct FitResult {
    /// `ε̂(C) = min_{d ≥ 2} ln(C·min_d)/ln d`, unclamped (may be `−∞`).
    pub curve: Vec<FitPoint>,
    /// Least-squares slope of `ln min_d` against `ln d`; diagnostic only.
    pub regression: Option<f64>,
    /// `max_C ε̂(C)` clamped to `[0, 1]`.
    pub headline: f64,
    /// Some distance `d ≥ 2` has embedded minimum `0`.
    pub degenerate: bool,
}

impl FitResult {
    pub fn at(&self, c: f64) -> Option<f64> {
        self.curve.iter().find(|p| p.c == c).map(|p| p.epsilon)
    }
}

/// Fits the compression exponent with `D = 0` from the lower envelope.
pub fn fit_compression(profile: &DistortionProfile, c_grid: &[f64]) -> Result<FitResult> {
    let recs: Vec<&ProfileRecord> = profile.records.iter().filter(|r| r.d >= 2).collect();
    if recs.is_empty() {
        return Err(Error::ProfileTooSmall("no records with d ≥ 2".into()));
    }
    if c_grid.is_empty() || c_grid.iter().any(|c| !(*c > 0.0)) {
        return Err(Error::Domain("the C grid must be nonempty and positive".into()));
    }
    let mut grid = c_grid.to_vec();
    grid.sort_by(f64::total_cmp);
    grid.dedup();
    let curve: Vec<FitPoint> = grid
        .iter()
        .map(|&c| FitPoint {
            c,
            epsilon: recs
                .iter()
                .map(|r| (c * r.min).ln() / (r.d as f64).ln())
                .fold(f64::INFINITY, f64::min),
        })
        .collect();
    let pts: Vec<(f64, f64)> = recs
        .iter()
        .filter(|r| r.min > 0.0)
        .map(|r| ((r.d as f64).ln(), r.min.ln()))
        .collect();
    let regression = (pts.len() >= 2).then(|| {
        let k = pts.len() as f64;
        let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
        let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
        let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
        sxy / sxx
    });
    let headline = curve
        .iter()
        .map(|p| p.epsilon)
        .fold(f64::NEG_INFINITY, f64::max)
        .clamp(0.0, 1.0);
    Ok(FitResult {
        curve,
        regression,
        headline,
        degenerate: recs.iter().any(|r| r.min == 0.0),
    })
}

/// The worst pair found by a certificate check.
#[derive(Clone, Debug, Serialize)]
pub struct Witness {
    pub x: String,
    pub y: String,
    pub d: usize,
    pub value: f64,
    pub bound: f64,
    pub side: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct CertificateCheck {
    pub certificate: DistortionCertificate,
    pub records: usize,
    pub passed: bool,
    /// Smallest `min_d − lower(d)` over `d ≥ 1`.
    pub lower_slack: f64,
    /// Smallest `upper(d) − max_d`.
    pub upper_slack: f64,
    /// The pair realizing the smaller slack.
    pub witness: Option<Witness>,
}

/// Checks `(1/C)d^ε − D ≤ ‖f(x) − f(y)‖ ≤ C·d + D` on every record, with
/// absolute tolerance `10⁻⁹`. The lower side is skipped at `d = 0`.
pub fn verify_certificate(profile: &DistortionProfile, cert: &DistortionCertificate) -> CertificateCheck {
    let mut lower_slack = f64::INFINITY;
    let mut upper_slack = f64::INFINITY;
    let mut witness: Option<Witness> = None;
    let mut worst = f64::INFINITY;
    for r in &profile.records {
        let mut consider = |slack: f64, value: f64, bound: f64, pair: &(String, String), side: &str| {
            if slack < worst {
                worst = slack;
                witness = Some(Witness {
                    x: pair.0.clone(),
                    y: pair.1.clone(),
                    d: r.d,
                    value,
                    bound,
                    side: side.into(),
                });
            }
        };
        if r.d > 0 {
            let lo = cert.lower(r.d as f64);
            let s = r.min - lo;
            lower_slack = lower_slack.min(s);
            consider(s, r.min, lo, &r.min_pair, "lower");
        }
        let hi = cert.upper(r.d as f64);
        let s = hi - r.max;
        upper_slack = upper_slack.min(s);
        consider(s, r.max, hi, &r.max_pair, "upper");
    }
    CertificateCheck {
        certificate: *cert,
        records: profile.records.len(),
        passed: lower_slack >= -TOLERANCES.sandwich && upper_slack >= -TOLERANCES.sandwich,
        lower_slack,
        upper_slack,
        witness,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::embeddings::{identity_embedding, zero_embedding};
    use crate::groups::{BaseGroup, GroupElement};

    #[test]
    fn identity_on_integers_is_isometric() {
        let z = BaseGroup::integers(1).unwrap();
        let lf = LengthFunction::new(z.clone());
        let f = identity_embedding(&z).unwrap();
        let p = distortion_profile(&lf, &f, 10, PairMode::Exhaustive, None).unwrap();
        assert_eq!(p.records.len(), 21);
        for r in &p.records {
            assert_eq!((r.min, r.max), (r.d as f64, r.d as f64));
        }
        let fit = fit_compression(&p, &[1.0]).unwrap();
        assert_eq!(fit.at(1.0), Some(1.0));
        assert!(!fit.degenerate);
        assert!(verify_certificate(&p, &f.certificate().unwrap()).passed);
        let tight = DistortionCertificate::new(1.0, 0.9, 0.0).unwrap();
        let c = verify_certificate(&p, &tight);
        assert!(!c.passed);
        let w = c.witness.unwrap();
        assert_eq!((w.d, w.side.as_str()), (20, "lower"));
    }

    #[test]
    fn constant_map_is_degenerate() {
        let z = BaseGroup::integers(1).unwrap();
        let lf = LengthFunction::new(z);
        let f = zero_embedding::<GroupElement>("0");
        let p = distortion_profile(&lf, &f, 5, PairMode::Exhaustive, None).unwrap();
        assert!(p.records.iter().all(|r| r.min == 0.0 && r.max == 0.0));
        let fit = fit_compression(&p, &[1.0, 2.0]).unwrap();
        assert!(fit.degenerate && fit.headline == 0.0);
    }

    #[test]
    fn small_profiles_and_caps_are_errors() {
        let z = BaseGroup::integers(1).unwrap();
        let lf = LengthFunction::new(z.clone());
        let f = identity_embedding(&z).unwrap();
        let p = distortion_profile(&lf, &f, 0, PairMode::Exhaustive, None).unwrap();
        assert!(matches!(
            fit_compression(&p, &[1.0]),
            Err(Error::ProfileTooSmall(_))
        ));
        assert!(matches!(
            distortion_profile(&lf, &f, 10, PairMode::Exhaustive, Some(5)),
            Err(Error::TooManyPairs { .. })
        ));
    }
}
