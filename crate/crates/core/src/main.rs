use std::fs::File;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use hscomp::cnd::{
    amalgam_bound_report, amalgam_cnd, check_cnd, coset_indicator_cnd, gns_embed, gns_residuals,
    hnn_bound_report, hnn_cnd, tree_cnd, AmalgamConstants, BoundReport, CndFunction, HnnConstants,
};
use hscomp::constructions::{Amalgam, Construction, ConstructionSpec, Factor, FreeProduct, Hnn};
use hscomp::embeddings::{factor_embedding, free_product_embed, DistortionCertificate, Embedding};
use hscomp::estimator::{distortion_profile, fit_compression, verify_certificate, PairMode};
use hscomp::groups::{BaseGroup, Group, GroupSpec, LengthFunction};
use hscomp::hnn_chains::{chain_lemma_report, feasible_from, schedule, ChainParams, ScheduleParams};

#[derive(Parser)]
#[command(
    name = "hscomp",
    version,
    about = "Finite-ball certification of Hilbert space embeddings of group constructions"
)]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Args)]
struct Common {
    /// Base group spec (TOML).
    #[arg(long, global = true)]
    group_spec: Option<PathBuf>,
    /// Construction spec (TOML): free product, amalgam or HNN-extension.
    #[arg(long, global = true)]
    construction: Option<PathBuf>,
    /// Word-length radius of the verification ball.
    #[arg(long, global = true, default_value_t = 4)]
    radius: usize,
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Output file; standard output when absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Subcommand)]
enum Cmd {
    /// Dump the shipped embedding's vectors on the ball.
    Embed,
    /// Distortion profile and compression fit.
    Estimate {
        /// Sample this many pairs instead of all of them.
        #[arg(long)]
        sample: Option<usize>,
        /// Comma-separated C grid for the fit.
        #[arg(long, default_value = "1")]
        c_grid: String,
    },
    /// Check a distortion certificate on every pair of the ball.
    Verify {
        #[arg(long)]
        epsilon: Option<f64>,
        #[arg(long)]
        c: Option<f64>,
        #[arg(long, default_value_t = 0.0)]
        d: f64,
    },
    /// Chain and η-vector bounds on an HNN-extension with finite base.
    Chains {
        #[arg(long, default_value_t = 3.0)]
        r: f64,
        #[arg(long, default_value_t = 1.0)]
        epsilon: f64,
    },
    /// Conditional negativity, GNS residuals and norm bounds of the shipped
    /// function on a construction.
    Cnd {
        #[arg(long, default_value_t = 200)]
        trials: usize,
        /// Exponent of the factor lower bounds for amalgams.
        #[arg(long, default_value_t = 0.5)]
        epsilon: f64,
    },
    /// Scale schedule table and its feasibility threshold.
    Schedule {
        #[arg(long, default_value_t = 0.05)]
        p: f64,
        #[arg(long, default_value_t = 1.0)]
        alpha1: f64,
        #[arg(long, default_value_t = 1.0)]
        c: f64,
        #[arg(long, default_value_t = 0.0)]
        d: f64,
        #[arg(long, default_value_t = 2.0)]
        z: f64,
        /// Comma-separated indices m.
        #[arg(long, default_value = "2,10,100,1000,10000")]
        m: String,
    },
}

enum Target {
    Base(BaseGroup),
    FreeProduct(FreeProduct),
    Amalgam(Amalgam),
    Hnn(Hnn),
}

fn load_target(c: &Common) -> Result<Target> {
    match (&c.group_spec, &c.construction) {
        (Some(_), Some(_)) => bail!("pass either --group-spec or --construction, not both"),
        (Some(p), None) => Ok(Target::Base(GroupSpec::from_file(p)?.build()?)),
        (None, Some(p)) => Ok(match ConstructionSpec::from_file(p)?.build()? {
            Construction::FreeProduct(g) => Target::FreeProduct(g),
            Construction::Amalgam(g) => Target::Amalgam(g),
            Construction::Hnn(g) => Target::Hnn(g),
        }),
        (None, None) => bail!("a group is required: --group-spec FILE or --construction FILE"),
    }
}

fn parse_list(s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .with_context(|| format!("`{t}` is not a number"))
        })
        .collect()
}

fn output(c: &Common) -> Result<Box<dyn Write>> {
    Ok(match &c.out {
        Some(p) => Box::new(File::create(p).with_context(|| format!("cannot create {}", p.display()))?),
        None => Box::new(io::stdout().lock()),
    })
}

/// Writes `rows` as CSV, or `json` as pretty JSON.
fn emit<R: Serialize, J: Serialize>(c: &Common, rows: &[R], json: &J) -> Result<()> {
    let mut w = output(c)?;
    match c.format {
        Format::Csv => {
            let mut out = csv::Writer::from_writer(&mut w);
            for r in rows {
                out.serialize(r)?;
            }
            out.flush()?;
        }
        Format::Json => {
            serde_json::to_writer_pretty(&mut w, json)?;
            writeln!(w)?;
        }
    }
    w.flush()?;
    Ok(())
}

fn unit_indicator(
    h: &BaseGroup,
    f: &[hscomp::groups::GroupElement],
) -> hscomp::Result<CndFunction<BaseGroup>> {
    coset_indicator_cnd(h, f, 0.5)
}

fn amalgam_psi(g: &Amalgam) -> hscomp::Result<CndFunction<Amalgam>> {
    let p1 = unit_indicator(g.factor(Factor::G1), g.subgroup(Factor::G1))?;
    let p2 = unit_indicator(g.factor(Factor::G2), g.subgroup(Factor::G2))?;
    amalgam_cnd(g, &p1, &p2)
}

/// `ψ̄` built from the indicator of `A`, or `None` when `A` is infinite.
fn hnn_psi(g: &Hnn) -> hscomp::Result<Option<(CndFunction<BaseGroup>, CndFunction<Hnn>)>> {
    let Ok(a) = g.vanishing_subgroup() else {
        return Ok(None);
    };
    let psi = unit_indicator(g.base(), &a)?;
    let bar = hnn_cnd(g, &psi)?;
    Ok(Some((psi, bar)))
}

/// `ψ̄`, or the tree distance alone when the base part is unavailable.
fn hnn_shipped(g: &Hnn) -> hscomp::Result<CndFunction<Hnn>> {
    Ok(match hnn_psi(g)? {
        Some((_, bar)) => bar,
        None => {
            eprintln!("⟨F ∪ θ(F)⟩ is infinite; using the tree distance alone");
            tree_cnd(g)
        }
    })
}

/// The GNS embedding of `ψ` on the ball.
fn gns_on_ball<G: Group + 'static>(
    lf: &LengthFunction<G>,
    psi: &CndFunction<G>,
    r: usize,
) -> Result<Embedding<G::Elem>>
where
    G::Elem: 'static,
{
    let ball = lf.ball(r)?;
    Ok(gns_embed(psi, ball.elements())?.to_embedding())
}

#[derive(Serialize)]
struct VectorRow {
    element: String,
    key: String,
    value: f64,
}

fn embed<G: Group>(c: &Common, lf: &LengthFunction<G>, f: &Embedding<G::Elem>) -> Result<bool>
where
    G::Elem: 'static,
{
    let g = lf.group();
    let mut rows = Vec::new();
    for x in lf.ball(c.radius)?.elements() {
        for (k, v) in f.eval(x).iter() {
            rows.push(VectorRow {
                element: g.label(x),
                key: k.to_string(),
                value: v,
            });
        }
    }
    emit(c, &rows, &rows)?;
    Ok(true)
}

#[derive(Serialize)]
struct EstimateJson<'a> {
    profile: &'a hscomp::estimator::DistortionProfile,
    fit: &'a hscomp::estimator::FitResult,
    certificate: Option<hscomp::estimator::CertificateCheck>,
}

fn estimate<G: Group>(
    c: &Common,
    lf: &LengthFunction<G>,
    f: &Embedding<G::Elem>,
    sample: Option<usize>,
    grid: &[f64],
) -> Result<bool>
where
    G::Elem: 'static,
{
    let mode = match sample {
        Some(pairs) => PairMode::Sampled { pairs, seed: c.seed },
        None => PairMode::Exhaustive,
    };
    let profile = distortion_profile(lf, f, c.radius, mode, None)?;
    let fit = fit_compression(&profile, grid)?;
    let cert = f.certificate().map(|k| verify_certificate(&profile, &k));
    eprintln!(
        "ε̂ = {} (regression {:?}, degenerate {})",
        fit.headline, fit.regression, fit.degenerate
    );
    if let Some(k) = &cert {
        eprintln!("certificate {:?}: passed {}", k.certificate, k.passed);
    }
    emit(
        c,
        &profile.records,
        &EstimateJson {
            profile: &profile,
            fit: &fit,
            certificate: cert.clone(),
        },
    )?;
    Ok(!fit.degenerate && cert.is_none_or(|k| k.passed))
}

#[derive(Serialize)]
struct VerifyRow {
    d: usize,
    min: f64,
    max: f64,
    lower: f64,
    upper: f64,
    pass: bool,
}

fn verify<G: Group>(
    c: &Common,
    lf: &LengthFunction<G>,
    f: &Embedding<G::Elem>,
    claim: Option<DistortionCertificate>,
) -> Result<bool>
where
    G::Elem: 'static,
{
    let Some(cert) = claim.or(f.certificate()) else {
        bail!("this embedding carries no certificate; pass --epsilon and --c");
    };
    let profile = distortion_profile(lf, f, c.radius, PairMode::Exhaustive, None)?;
    let check = verify_certificate(&profile, &cert);
    let tol = hscomp::config::TOLERANCES.sandwich;
    let rows: Vec<VerifyRow> = profile
        .records
        .iter()
        .map(|r| {
            let (lo, hi) = (cert.lower(r.d as f64), cert.upper(r.d as f64));
            VerifyRow {
                d: r.d,
                min: r.min,
                max: r.max,
                lower: lo,
                upper: hi,
                pass: (r.d == 0 || r.min >= lo - tol) && r.max <= hi + tol,
            }
        })
        .collect();
    if let Some(w) = &check.witness {
        eprintln!(
            "worst pair: ({}, {}) at d = {}, {} side {} vs {}",
            w.x, w.y, w.d, w.side, w.value, w.bound
        );
    }
    emit(c, &rows, &check)?;
    Ok(check.passed)
}

#[derive(Serialize)]
struct CheckRow {
    check: String,
    value: f64,
    limit: f64,
    pass: bool,
}

fn bound_rows(rows: &mut Vec<CheckRow>, report: &BoundReport) {
    for b in &report.checks {
        rows.push(CheckRow {
            check: format!("bound {} ({} points)", b.name, b.checked),
            value: b.worst_slack,
            limit: 0.0,
            pass: b.violations == 0,
        });
    }
}

fn cnd_rows<G: Group + 'static>(
    c: &Common,
    lf: &LengthFunction<G>,
    psi: &CndFunction<G>,
    trials: usize,
) -> Result<Vec<CheckRow>>
where
    G::Elem: 'static,
{
    let ball = lf.ball(c.radius)?;
    let report = check_cnd(psi, ball.elements(), trials, c.seed);
    let mut rows = vec![CheckRow {
        check: format!(
            "cnd form {} ({} points, {} trials)",
            report.name, report.points, report.trials
        ),
        value: report.max_form,
        limit: report.threshold,
        pass: report.passed,
    }];
    match gns_embed(psi, ball.elements()) {
        Ok(emb) => {
            let res = gns_residuals(psi, &emb);
            let limit = hscomp::config::TOLERANCES.gns_residual * res.scale;
            rows.push(CheckRow {
                check: "gns norm residual".into(),
                value: res.norm,
                limit,
                pass: res.norm <= limit,
            });
            rows.push(CheckRow {
                check: "gns pair residual".into(),
                value: res.pair,
                limit,
                pass: res.pair <= limit,
            });
        }
        Err(e) => rows.push(CheckRow {
            check: format!("gns factorization: {e}"),
            value: f64::NAN,
            limit: 0.0,
            pass: false,
        }),
    }
    Ok(rows)
}

fn cnd(c: &Common, target: &Target, trials: usize, epsilon: f64) -> Result<bool> {
    let rows = match target {
        Target::Base(_) => bail!("the cnd report needs a construction"),
        Target::FreeProduct(fp) => {
            let g = Amalgam::free(fp.factor(Factor::G1).clone(), fp.factor(Factor::G2).clone())?;
            amalgam_rows(c, &g, trials, epsilon)?
        }
        Target::Amalgam(g) => amalgam_rows(c, g, trials, epsilon)?,
        Target::Hnn(g) => {
            let lf = LengthFunction::new(g.clone());
            let bar = hnn_shipped(g)?;
            let mut rows = cnd_rows(c, &lf, &bar, trials)?;
            if let Some((psi, _)) = hnn_psi(g)? {
                let k = HnnConstants::compute(g, &psi, &lf)?;
                bound_rows(&mut rows, &hnn_bound_report(g, &bar, &k, &lf.ball(c.radius)?)?);
            }
            rows
        }
    };
    emit(c, &rows, &rows)?;
    Ok(rows.iter().all(|r| r.pass))
}

fn amalgam_rows(c: &Common, g: &Amalgam, trials: usize, epsilon: f64) -> Result<Vec<CheckRow>> {
    let psi = amalgam_psi(g)?;
    let lf = LengthFunction::new(g.clone());
    let mut rows = cnd_rows(c, &lf, &psi, trials)?;
    let p1 = unit_indicator(g.factor(Factor::G1), g.subgroup(Factor::G1))?;
    let p2 = unit_indicator(g.factor(Factor::G2), g.subgroup(Factor::G2))?;
    match AmalgamConstants::compute(g, &p1, &p2, epsilon, &lf) {
        Ok(k) => bound_rows(&mut rows, &amalgam_bound_report(g, &psi, &k, &lf.ball(c.radius)?)),
        Err(e) => eprintln!("norm bounds skipped: {e}"),
    }
    Ok(rows)
}

#[derive(Serialize)]
struct ChainRow {
    d: usize,
    k: usize,
    l: usize,
    max_step: usize,
    eta_dist: f64,
    bound: f64,
    pass: bool,
}

fn chains(c: &Common, target: &Target, r: f64, epsilon: f64) -> Result<bool> {
    let Target::Hnn(g) = target else {
        bail!("the chains report needs an HNN-extension");
    };
    let params = ChainParams::minimal(r, epsilon, g.z_constant()?)?;
    let lf = LengthFunction::new(g.clone());
    let reports = chain_lemma_report(g, &lf, params, c.radius)?;
    let rows: Vec<ChainRow> = reports
        .iter()
        .map(|p| ChainRow {
            d: p.d,
            k: p.k,
            l: p.l,
            max_step: p.max_step.max(p.meet_distance),
            eta_dist: p.eta_dist,
            bound: p.bound,
            pass: p.pass,
        })
        .collect();
    eprintln!(
        "s = {}, n = {}, Z = {}, {} pairs",
        params.s,
        params.n,
        params.z,
        rows.len()
    );
    emit(c, &rows, &reports)?;
    Ok(reports.iter().all(|p| p.pass))
}

#[derive(Serialize)]
struct ScheduleJson {
    rows: Vec<hscomp::hnn_chains::Schedule>,
    feasible: hscomp::hnn_chains::FeasibleIndex,
}

fn schedule_cmd(c: &Common, params: ScheduleParams, ms: &[f64]) -> Result<bool> {
    let rows = ms
        .iter()
        .map(|&m| schedule(m, &params))
        .collect::<hscomp::Result<Vec<_>>>()?;
    let feasible = feasible_from(&params)?;
    eprintln!(
        "β = {}; both scale inequalities hold from m = {:e} (ln m = {})",
        params.beta(),
        feasible.m,
        feasible.ln_m
    );
    let monotone = feasible.monotone;
    emit(
        c,
        &rows,
        &ScheduleJson {
            rows: rows.clone(),
            feasible,
        },
    )?;
    Ok(monotone)
}

/// Runs the embedding subcommands on whichever group the options name.
fn with_embedding(c: &Common, target: &Target, cmd: &Cmd) -> Result<bool> {
    macro_rules! dispatch {
        ($lf:expr, $f:expr) => {
            match cmd {
                Cmd::Embed => embed(c, &$lf, &$f),
                Cmd::Estimate { sample, c_grid } => estimate(c, &$lf, &$f, *sample, &parse_list(c_grid)?),
                Cmd::Verify { epsilon, c: cc, d } => {
                    let claim = match (epsilon, cc) {
                        (Some(e), Some(k)) => Some(DistortionCertificate::new(*e, *k, *d)?),
                        (None, None) => None,
                        _ => bail!("--epsilon and --c go together"),
                    };
                    verify(c, &$lf, &$f, claim)
                }
                _ => unreachable!("not an embedding subcommand"),
            }
        };
    }
    match target {
        Target::Base(g) => {
            let lf = LengthFunction::new(g.clone());
            dispatch!(lf, factor_embedding(g)?)
        }
        Target::FreeProduct(fp) => {
            let f1 = factor_embedding(fp.factor(Factor::G1))?;
            let f2 = factor_embedding(fp.factor(Factor::G2))?;
            let lf = LengthFunction::new(fp.clone());
            dispatch!(lf, free_product_embed(fp, &f1, &f2)?)
        }
        Target::Amalgam(g) => {
            let lf = LengthFunction::new(g.clone());
            dispatch!(lf, gns_on_ball(&lf, &amalgam_psi(g)?, c.radius)?)
        }
        Target::Hnn(g) => {
            let lf = LengthFunction::new(g.clone());
            dispatch!(lf, gns_on_ball(&lf, &hnn_shipped(g)?, c.radius)?)
        }
    }
}

fn run(cli: &Cli) -> Result<bool> {
    let c = &cli.common;
    match &cli.command {
        Cmd::Schedule {
            p,
            alpha1,
            c: cc,
            d,
            z,
            m,
        } => schedule_cmd(c, ScheduleParams::new(*p, *alpha1, *cc, *d, *z)?, &parse_list(m)?),
        cmd => {
            let target = load_target(c)?;
            match cmd {
                Cmd::Chains { r, epsilon } => chains(c, &target, *r, *epsilon),
                Cmd::Cnd { trials, epsilon } => cnd(c, &target, *trials, *epsilon),
                _ => with_embedding(c, &target, cmd),
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
