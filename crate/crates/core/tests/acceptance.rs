//! Acceptance criteria, each run at its stated tolerance. Prints one
//! PASS/FAIL line per criterion and exits nonzero if any fails.

use std::path::PathBuf;
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use hscomp::cnd::{
    amalgam_bound_report, amalgam_cnd, check_cnd, cocycle_check, coset_indicator_cnd, gns_embed,
    hnn_bound_report, hnn_cnd, sample_triples, AmalgamConstants, CndFunction, HnnConstants,
};
use hscomp::constructions::{
    fp_distance, remark_decomposition, Amalgam, Construction, ConstructionSpec, FreeProduct, Hnn,
};
use hscomp::embeddings::{
    embedding_to_family, exactify_constant, finite_delta_embedding, free_product_embed, identity_embedding,
    Embedding,
};
use hscomp::estimator::{distortion_profile, fit_compression, verify_certificate, PairMode};
use hscomp::groups::{BaseGroup, FiniteTable, Group, LengthFunction};
use hscomp::hilbert::{exp_inner, truncated_exp, Key, SparseVector};
use hscomp::hnn_chains::{
    chain_lemma_report, check_vertex_family, far_pair_report, feasible_from, schedule, vertex_family,
    ChainParams, ScheduleParams,
};

type Outcome = Result<String, String>;

fn spec(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("specs").join(name)
}

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn err<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

fn z() -> BaseGroup {
    BaseGroup::integers(1).unwrap()
}

fn zn(n: usize) -> BaseGroup {
    BaseGroup::cyclic(n).unwrap()
}

fn klein_hnn() -> Hnn {
    match ConstructionSpec::from_file(spec("klein_hnn.toml"))
        .unwrap()
        .build()
        .unwrap()
    {
        Construction::Hnn(g) => g,
        _ => unreachable!("klein_hnn.toml is an HNN spec"),
    }
}

/// Counts ball pairs where the closed form and BFS disagree.
fn fp_mismatches(fp: &FreeProduct, r: usize) -> Result<(usize, usize), String> {
    // ball pairs sit up to 2r apart
    let lf = LengthFunction::with_caps(fp.clone(), 2 * r, hscomp::config::DEFAULT_BALL_CAP);
    let ball = lf.ball(r).map_err(err)?;
    let els = ball.elements();
    let mut bad = 0;
    for x in els {
        for y in els {
            let bfs = lf.bfs_length(&fp.difference(x, y)).map_err(err)?;
            if fp_distance(fp, x, y) != bfs {
                bad += 1;
            }
        }
    }
    Ok((bad, els.len() * els.len()))
}

fn free_product_metric_oracle() -> Outcome {
    let start = Instant::now();
    let (bad1, n1) = fp_mismatches(&FreeProduct::new(z(), z()), 6)?;
    let (bad2, n2) = fp_mismatches(&FreeProduct::new(zn(2), zn(3)), 8)?;
    let took = start.elapsed();
    ensure(bad1 == 0 && bad2 == 0, || {
        format!("{bad1} + {bad2} mismatching pairs")
    })?;
    ensure(took < Duration::from_secs(60), || format!("took {took:?}"))?;
    Ok(format!(
        "{n1} pairs in ℤ∗ℤ (R=6), {n2} in ℤ₂∗ℤ₃ (R=8), {took:.1?}"
    ))
}

fn free_product_sandwich() -> Outcome {
    let fp = FreeProduct::new(z(), z());
    let id = identity_embedding(&z()).map_err(err)?;
    let f = free_product_embed(&fp, &id, &id).map_err(err)?;
    let lf = LengthFunction::new(fp.clone());
    let ball = lf.ball(6).map_err(err)?;
    let vecs: Vec<SparseVector> = ball.elements().iter().map(|x| f.eval(x)).collect();
    let mut worst: f64 = f64::INFINITY;
    for (i, x) in ball.elements().iter().enumerate() {
        for (j, y) in ball.elements().iter().enumerate() {
            let d = lf.distance(x, y).map_err(err)? as f64;
            let m = vecs[i].distance(&vecs[j]).map_err(err)?;
            worst = worst.min(m - d.sqrt()).min(d - m);
        }
    }
    ensure(worst >= -1e-9, || format!("sandwich slack {worst}"))?;
    let profile = distortion_profile(&lf, &f, 8, PairMode::Exhaustive, None).map_err(err)?;
    let fit = fit_compression(&profile, &[1.0]).map_err(err)?;
    let eps = fit.at(1.0).ok_or("no fit at C = 1")?;
    ensure((0.48..=0.52).contains(&eps), || format!("ε̂(1) = {eps}"))?;
    Ok(format!("R=6 slack {worst:.2e}; ε̂(1) = {eps:.6} on R=8"))
}

/// S₃ as permutations of {0,1,2}, composed right to left.
fn s3() -> BaseGroup {
    let perms: [[usize; 3]; 6] = [[0, 1, 2], [1, 0, 2], [0, 2, 1], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
    let idx = |p: [usize; 3]| perms.iter().position(|q| *q == p).unwrap();
    let table: Vec<Vec<usize>> = perms
        .iter()
        .map(|a| perms.iter().map(|b| idx([a[b[0]], a[b[1]], a[b[2]]])).collect())
        .collect();
    let names = ["e", "s", "u", "r", "r2", "w"].map(String::from).to_vec();
    let t = FiniteTable::new(names, table).unwrap();
    BaseGroup::finite(t, &["s", "u"]).unwrap()
}

fn exactified_delta() -> Outcome {
    let groups = [
        ("ℤ₂", zn(2)),
        ("ℤ₃", zn(3)),
        ("ℤ₆", zn(6)),
        ("ℤ₂×ℤ₂", BaseGroup::product(zn(2), zn(2))),
        ("ℤ₂×ℤ₃", BaseGroup::product(zn(2), zn(3))),
        ("S₃", s3()),
    ];
    let mut notes = Vec::new();
    for (name, g) in groups {
        let f = finite_delta_embedding(&g).map_err(err)?;
        let cert = f.certificate().ok_or("no certificate")?;
        let lf = LengthFunction::new(g.clone());
        let diam = g
            .elements()
            .unwrap()
            .iter()
            .map(|x| lf.bfs_length(x).unwrap())
            .max()
            .unwrap() as f64;
        // (C, D, B) = (1, diam, 1) for the zero map
        let s2 = std::f64::consts::SQRT_2;
        let c_bar = (2.0 * s2).max(2.0 * diam).max(1.0 + diam + s2);
        ensure((cert.c - c_bar).abs() < 1e-12 && cert.d == 0.0, || {
            format!("{name}: {cert:?} vs C̄ = {c_bar}")
        })?;
        ensure(
            (exactify_constant(1.0, diam, 1.0).map_err(err)? - c_bar).abs() < 1e-12,
            || format!("{name}: closed form"),
        )?;
        let profile = distortion_profile(&lf, &f, diam as usize, PairMode::Exhaustive, None).map_err(err)?;
        let check = verify_certificate(&profile, &cert);
        ensure(check.passed, || format!("{name}: {check:?}"))?;
        notes.push(format!("{name} C̄={c_bar:.3}"));
    }
    Ok(notes.join(", "))
}

fn random_sparse(rng: &mut ChaCha8Rng) -> SparseVector {
    let keys: Vec<usize> = (0..5).filter(|_| rng.gen_bool(0.6)).take(3).collect();
    SparseVector::from_entries(
        "l2",
        keys.into_iter()
            .map(|k| (Key::Coord(k as i64), rng.gen_range(-1.5..1.5))),
    )
}

fn exp_identity() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(20);
    let mut worst: f64 = 0.0;
    let mut n = 0;
    while n < 100 {
        let (a, b) = (random_sparse(&mut rng), random_sparse(&mut rng));
        if a.inner(&b).map_err(err)?.abs() > 4.0 {
            continue;
        }
        let (ta, tb) = (
            truncated_exp(&a, 20).map_err(err)?,
            truncated_exp(&b, 20).map_err(err)?,
        );
        let materialized = ta.vector().inner(tb.vector()).map_err(err)?;
        worst = worst.max((materialized - exp_inner(&a, &b).map_err(err)?).abs());
        n += 1;
    }
    ensure(worst <= 5e-7, || format!("worst gap {worst:e}"))?;

    // ℤ∗ℤ carries the certificate (1/2, 1, 0): ρ₊(d) = d, ρ₋(d) = √d
    let fp = FreeProduct::new(z(), z());
    let id = identity_embedding(&z()).map_err(err)?;
    let f: Embedding<_> = free_product_embed(&fp, &id, &id).map_err(err)?;
    let fam = embedding_to_family(&f, 0.5, 4.0).map_err(err)?;
    let t = fam.t();
    let lf = LengthFunction::new(fp.clone());
    let ball = lf.ball(4).map_err(err)?;
    let mut pairs = 0;
    for x in ball.elements() {
        for y in ball.elements() {
            let d = lf.distance(x, y).map_err(err)? as f64;
            let k = fam.inner(x, y).map_err(err)?;
            let (lo, hi) = ((-t * d * d).exp(), (-t * d).exp());
            ensure(lo <= k + 1e-12 && k <= hi + 1e-12, || {
                format!("{lo} ≤ {k} ≤ {hi} fails at d = {d}")
            })?;
            pairs += 1;
        }
    }
    Ok(format!(
        "worst truncation gap {worst:.1e}; kernel sandwich on {pairs} pairs (t = {t:.3e})"
    ))
}

fn chain_machinery() -> Outcome {
    let g = klein_hnn();
    let z = g.z_constant().map_err(err)?;
    ensure(z == 2, || format!("Z = {z}"))?;
    let params = ChainParams::minimal(3.0, 1.0, z).map_err(err)?;
    let lf = LengthFunction::new(g.clone());
    let reports = chain_lemma_report(&g, &lf, params, 5).map_err(err)?;
    let close = reports.iter().filter(|r| (r.d as f64) < params.r).count();
    ensure(close > 0, || "no close pairs".into())?;
    if let Some(bad) = reports.iter().find(|r| !r.pass) {
        return Err(format!("pair failed: {bad:?}"));
    }
    ensure(reports.iter().all(|r| r.steps_ok), || "step bound".into())?;
    let worst = reports.iter().map(|r| r.eta_dist).fold(0.0, f64::max);

    // the far-pair inequality against kernel sups computed on H directly;
    // short chains make the slack bite inside the ball
    let fam = vertex_family(&g, &params).map_err(err)?;
    let kernel = check_vertex_family(&g, &lf, &fam, &params).map_err(err)?;
    let ball = lf.ball(5).map_err(err)?;
    let h = g.base();
    let hl = LengthFunction::new(h.clone());
    let direct = |slack: f64| -> f64 {
        let els = h.elements().unwrap();
        let mut sup: f64 = 0.0;
        for a in &els {
            for b in &els {
                if hl.distance(a, b).unwrap() as f64 >= slack {
                    sup = sup.max(fam.inner_h(a, b).abs());
                }
            }
        }
        sup
    };
    for slack in [-1.0, 0.0, 1.0, 2.0, 3.0] {
        let (a, b) = (kernel.kernel_sup(slack), direct(slack));
        ensure((a - b).abs() < 1e-15, || {
            format!("kernel sup at {slack}: {a} vs {b}")
        })?;
    }
    let pairs: Vec<_> = ball
        .elements()
        .iter()
        .flat_map(|x| ball.elements().iter().map(move |y| (x.clone(), y.clone())))
        .collect();
    let mut far = 0;
    for s in [1, 2, params.s] {
        let r = far_pair_report(&g, &lf, &fam, &kernel, s, &pairs).map_err(err)?;
        ensure(r.iter().all(|x| x.pass), || {
            format!("far-pair bound fails at s = {s}")
        })?;
        far += r.len();
    }

    let bs = Hnn::baumslag_solitar(2).map_err(err)?;
    let bl = LengthFunction::new(bs.clone());
    let bb = bl.ball(5).map_err(err)?;
    let e = bs.identity();
    for y in bb.elements() {
        let bfs = bl.bfs_length(y).map_err(err)?;
        let rem = remark_decomposition(&bs, &bl, &e, y, 5).map_err(err)?;
        ensure(rem == Some(bfs), || {
            format!("BS(1,2) at {}: {rem:?} vs {bfs}", bs.label(y))
        })?;
    }
    let small = bl.ball(2).map_err(err)?;
    for x in small.elements() {
        for y in small.elements() {
            let d = bl.distance(x, y).map_err(err)?;
            let rem = remark_decomposition(&bs, &bl, x, y, 4).map_err(err)?;
            ensure(rem == Some(d), || format!("BS(1,2) pair: {rem:?} vs {d}"))?;
        }
    }
    Ok(format!(
        "s={}, n={}; {} pairs ({close} close), worst ‖η−η′‖ {worst:.4}; {far} far-pair checks; BS(1,2) ball 5 ({} elements)",
        params.s,
        params.n,
        reports.len(),
        bb.len()
    ))
}

fn schedule_threshold() -> Outcome {
    let params = ScheduleParams::new(0.05, 1.0, 1.0, 0.0, 2.0).map_err(err)?;
    let beta = params.beta();
    ensure(
        (beta - 0.95 / 3.9).abs() < 1e-6 && (beta - 0.24359).abs() < 1e-5,
        || format!("β = {beta}"),
    )?;
    let row = schedule(100.0, &params).map_err(err)?;
    ensure((row.beta - beta).abs() < 1e-12, || "schedule row β".into())?;
    let f = feasible_from(&params).map_err(err)?;
    ensure(f.monotone, || "feasibility is not monotone".into())?;
    let both = |ln_m: f64| {
        let r = schedule(ln_m.exp(), &params).unwrap();
        r.n_ok && r.s_ok
    };
    ensure(!both(f.ln_m - 1e-6), || {
        "holds below the reported threshold".into()
    })?;
    let mut ln_m = f.ln_m + 1e-9;
    while ln_m < 700.0 {
        ensure(both(ln_m), || format!("fails at ln m = {ln_m}"))?;
        ln_m += 0.37;
    }
    Ok(format!(
        "β = {beta:.8}; both scale conditions hold from ln m = {:.4} (m ≈ {:.3e})",
        f.ln_m, f.m
    ))
}

fn unit(h: &BaseGroup) -> CndFunction<BaseGroup> {
    coset_indicator_cnd(h, &[h.identity()], 0.5).unwrap()
}

/// `max |‖b(x) − b(y)‖² − ψ(y⁻¹x)|` over the GNS points, recomputed from
/// the vectors.
fn gns_gap<G: Group>(psi: &CndFunction<G>, points: &[G::Elem]) -> Result<(f64, f64), String>
where
    G::Elem: 'static,
{
    let emb = gns_embed(psi, points).map_err(err)?;
    let g = psi.group();
    let (mut gap, mut scale): (f64, f64) = (0.0, 0.0);
    for x in points {
        let bx = emb.vector(x).unwrap();
        for y in points {
            let by = emb.vector(y).unwrap();
            let d2: f64 = bx.iter().zip(&by).map(|(a, b)| (a - b) * (a - b)).sum();
            let v = psi.eval(&g.difference(y, x));
            scale = scale.max(v);
            gap = gap.max((d2 - v).abs());
        }
    }
    Ok((gap, scale))
}

fn cnd_constructions() -> Outcome {
    let mut notes = Vec::new();
    for (name, g1, g2) in [("D∞", zn(2), zn(2)), ("ℤ₂∗ℤ₃", zn(2), zn(3))] {
        let g = Amalgam::free(g1.clone(), g2.clone()).map_err(err)?;
        let (p1, p2) = (unit(&g1), unit(&g2));
        let psi = amalgam_cnd(&g, &p1, &p2).map_err(err)?;
        let lf = LengthFunction::new(g.clone());
        let ball = lf.ball(6).map_err(err)?;
        let rep = check_cnd(&psi, ball.elements(), 200, 11);
        ensure(rep.passed && rep.max_form <= 1e-8 * rep.scale, || {
            format!("{name}: {rep:?}")
        })?;
        let (gap, scale) = gns_gap(&psi, ball.elements())?;
        ensure(gap <= 1e-8 * scale, || format!("{name}: GNS gap {gap:e}"))?;
        let k = AmalgamConstants::compute(&g, &p1, &p2, 0.5, &lf).map_err(err)?;
        let bounds = amalgam_bound_report(&g, &psi, &k, &ball);
        ensure(bounds.passed(), || format!("{name}: {bounds:?}"))?;
        notes.push(format!("{name} ({} pts)", ball.len()));
    }

    let g = klein_hnn();
    let a = g.vanishing_subgroup().map_err(err)?;
    let psi = coset_indicator_cnd(g.base(), &a, 0.5).map_err(err)?;
    let bar = hnn_cnd(&g, &psi).map_err(err)?;
    let lf = LengthFunction::new(g.clone());
    let ball = lf.ball(5).map_err(err)?;
    let rep = check_cnd(&bar, ball.elements(), 200, 11);
    ensure(rep.passed && rep.max_form <= 1e-8 * rep.scale, || {
        format!("HNN: {rep:?}")
    })?;
    let (gap, scale) = gns_gap(&bar, ball.elements())?;
    ensure(gap <= 1e-8 * scale, || format!("HNN: GNS gap {gap:e}"))?;
    let k = HnnConstants::compute(&g, &psi, &lf).map_err(err)?;
    let bounds = hnn_bound_report(&g, &bar, &k, &ball).map_err(err)?;
    ensure(bounds.passed(), || format!("HNN: {bounds:?}"))?;
    let triples = sample_triples(&g, ball.elements(), 500, 13);
    let coc = cocycle_check(&g, &triples);
    ensure(coc.passed && coc.triples == 500, || format!("cocycle: {coc:?}"))?;
    notes.push(format!("Klein HNN ({} pts), 500 cocycle triples", ball.len()));
    Ok(notes.join(", "))
}

fn run_cli(args: &[&str]) -> Result<Vec<u8>, String> {
    let out = Command::new(env!("CARGO_BIN_EXE_hscomp"))
        .args(args)
        .output()
        .map_err(err)?;
    ensure(out.status.code() == Some(0), || {
        format!(
            "{args:?} exited {:?}: {}",
            out.status.code(),
            String::from_utf8_lossy(&out.stderr)
        )
    })?;
    Ok(out.stdout)
}

fn cli_end_to_end() -> Outcome {
    let zz = spec("z_star_z.toml");
    let dinf = spec("d_infinity.toml");
    let runs: [Vec<&str>; 3] = [
        vec![
            "--construction",
            zz.to_str().unwrap(),
            "--radius",
            "5",
            "--seed",
            "7",
            "estimate",
        ],
        vec![
            "--construction",
            zz.to_str().unwrap(),
            "--radius",
            "5",
            "--seed",
            "7",
            "estimate",
            "--sample",
            "2000",
        ],
        vec![
            "--construction",
            dinf.to_str().unwrap(),
            "--radius",
            "6",
            "--seed",
            "7",
            "cnd",
        ],
    ];
    let mut sizes = Vec::new();
    for args in &runs {
        let (a, b) = (run_cli(args)?, run_cli(args)?);
        ensure(a == b, || format!("{args:?} is not byte-stable"))?;
        ensure(!a.is_empty(), || format!("{args:?} wrote nothing"))?;
        sizes.push(a.len());
    }
    Ok(format!("byte-stable outputs of {sizes:?} bytes"))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 8] = [
        ("free-product metric oracle", free_product_metric_oracle),
        ("free-product sandwich and fit", free_product_sandwich),
        ("exactified δ-embeddings", exactified_delta),
        ("exponential identity and kernel sandwich", exp_identity),
        ("chains, η-vectors and the tree decomposition", chain_machinery),
        ("scale schedule", schedule_threshold),
        ("conditionally negative definite constructions", cnd_constructions),
        ("command line", cli_end_to_end),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = check();
        let took = start.elapsed();
        match outcome {
            Ok(note) => println!("criterion {} PASS {name}: {note} [{took:.1?}]", i + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {} FAIL {name}: {why} [{took:.1?}]", i + 1);
            }
        }
    }
    println!(
        "{} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
