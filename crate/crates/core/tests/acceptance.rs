//! Acceptance checks, one PASS/FAIL line per criterion.
//!
//! Runs as a plain binary (`harness = false`); exits nonzero if any check fails.

use std::time::Instant;

use pfagp::problems::{
    make_dirac_gan, make_quadratic_oracle, make_robust_domains, make_synthetic, make_synthetic_boxed, QuadraticOracleSpec,
    RobustDomainsSpec, SyntheticParams,
};
use pfagp::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Report {
    failed: usize,
}

impl Report {
    fn line(&mut self, id: u32, name: &str, ok: bool, detail: String) {
        if !ok {
            self.failed += 1;
        }
        println!("{} {id:>2} {name}: {detail}", if ok { "PASS" } else { "FAIL" });
    }
}

fn quad_reference() -> Problem {
    make_quadratic_oracle(&QuadraticOracleSpec::reference()).unwrap()
}

/// Reference quadratic run with `l⁰ = 0.01`, `μ⁰ = 4`.
fn quad_nsc(max_iters: usize, eps: f64) -> Outcome {
    let cfg = Config::new(vec![0.6, 0.3], vec![0.0, 0.0])
        .with_initial(InitialEstimates::uniform(0.01, 4.0))
        .with_epsilon(eps)
        .with_max_outer_iters(max_iters);
    pf_agp_nsc(&quad_reference(), &cfg).unwrap()
}

fn ceil_log2(v: f64) -> u64 {
    v.log2().ceil() as u64
}

fn criterion_1(r: &mut Report) {
    let p = make_synthetic_boxed(SyntheticParams::default(), 10.0).unwrap();
    let cfg = Config::new(vec![0.0, 0.0, 2.0], vec![0.0, 0.0])
        .with_termination(Termination::GradientNorm)
        .with_initial(InitialEstimates::uniform(0.01, 0.01));
    let t = Instant::now();
    let out = pf_agp_nsc(&p, &cfg).unwrap();
    let secs = t.elapsed().as_secs_f64();
    let dist = vector::joint_norm(&out.x, &out.y);
    let ok = out.status == Status::Converged && out.iterations <= 1_000_000 && dist <= 1e-2 && secs < 30.0;
    r.line(
        1,
        "synthetic pf-agp-nsc",
        ok,
        format!(
            "status={} iterations={} |grad f|={:.3e} dist to origin={:.4} (x3={:.6}) time={secs:.3}s",
            out.status, out.iterations, out.gap.norm, dist, out.x[2]
        ),
    );
}

fn criterion_2(r: &mut Report) {
    let p = make_dirac_gan().unwrap();
    let cfg = Config::new(vec![1.0], vec![1.0]).with_termination(Termination::GradientNorm);
    let nc = pf_agp_nc(&p, &cfg).unwrap();
    let agp = agp_baseline(&p, &cfg, &AgpSchedule::dirac_gan()).unwrap();
    let d_nc = vector::joint_norm(&nc.x, &nc.y);
    let d_agp = vector::joint_norm(&agp.x, &agp.y);
    let ok = nc.status == Status::Converged
        && d_nc <= 1e-2
        && agp.status == Status::Converged
        && d_agp <= 1e-2
        && nc.grad_calls <= 10 * agp.grad_calls;
    r.line(
        2,
        "dirac-gan pf-agp-nc vs agp",
        ok,
        format!(
            "nc: {} dist={d_nc:.2e} grad_calls={}; agp: {} dist={d_agp:.2e} grad_calls={}; ratio={:.2}",
            nc.status,
            nc.grad_calls,
            agp.status,
            agp.grad_calls,
            nc.grad_calls as f64 / agp.grad_calls as f64
        ),
    );
}

fn criterion_3(r: &mut Report) {
    let out = quad_nsc(1_000_000, 1e-5);
    let c = quad_reference().known_constants().copied().unwrap();
    let bounds = [c.l11, c.l12, c.l22].map(|l| ceil_log2(2.0 * l / 0.01));
    let mu_bound = ceil_log2(2.0 * 4.0 / 0.5);
    let d = &out.diagnostics;
    let ok = out.status == Status::Converged
        && d.doublings.iter().zip(&bounds).all(|(n, b)| n <= b)
        && d.mu_halvings <= mu_bound;
    r.line(
        3,
        "backtracking counts",
        ok,
        format!(
            "doublings {:?} <= {bounds:?}, mu halvings {} <= {mu_bound} ({})",
            d.doublings, d.mu_halvings, out.status
        ),
    );
}

fn criterion_4(r: &mut Report) {
    let out = quad_nsc(1_000_000, 1e-5);
    let c = quad_reference().known_constants().copied().unwrap();
    let mut violations = 0;
    for t in &out.trace {
        let (l11, l12, l22, mu) = (t.l11.unwrap(), t.l12.unwrap(), t.l22.unwrap(), t.mu.unwrap());
        violations += usize::from(!(0.01..=0.01f64.max(2.0 * c.l11)).contains(&l11));
        violations += usize::from(l12 > 2.0 * c.l12);
        violations += usize::from(l22 > 2.0 * c.l22);
        violations += usize::from(mu < 4.0f64.min(c.mu / 2.0));
    }
    r.line(
        4,
        "estimate sandwich",
        violations == 0 && !out.trace.is_empty(),
        format!("{violations} violations over {} records", out.trace.len()),
    );
}

fn builtin_problems() -> Vec<(&'static str, Problem, Vec<f64>, Vec<f64>)> {
    let quadratics = RobustDomainsSpec::three_quadratics();
    let logistic = RobustDomainsSpec::bundled_logistic(1e-3).unwrap();
    let random = QuadraticOracleSpec::random(4, 3, 7);
    vec![
        ("synthetic", make_synthetic_boxed(SyntheticParams::default(), 10.0).unwrap(), vec![0.0, 0.0, 2.0], vec![0.0, 0.0]),
        ("dirac-gan", make_dirac_gan().unwrap(), vec![1.0], vec![1.0]),
        ("robust-quadratic", make_robust_domains(&quadratics).unwrap(), vec![0.0, 0.0], vec![1.0 / 3.0; 3]),
        ("robust-logistic", make_robust_domains(&logistic).unwrap(), vec![0.0; 15], vec![0.5, 0.5]),
        ("quadratic", quad_reference(), vec![0.6, 0.3], vec![0.0, 0.0]),
        ("quadratic-random", make_quadratic_oracle(&random).unwrap(), vec![0.5, -0.5, 0.2, 0.1], vec![0.0; 3]),
    ]
}

fn criterion_5(r: &mut Report) {
    let mut parts = Vec::new();
    let mut total = 0;
    let mut accepted = 0;
    for (name, p, x0, y0) in builtin_problems() {
        let cfg = Config::new(x0, y0).with_max_outer_iters(3000);
        let out = pf_agp_nsc(&p, &cfg).unwrap();
        total += out.diagnostics.descent_violations;
        accepted += out.iterations;
        parts.push(format!("{name}={}", out.diagnostics.descent_violations));
    }
    r.line(
        5,
        "descent inequality",
        total == 0 && accepted > 0,
        format!("{total} violations over {accepted} accepted iterations ({})", parts.join(" ")),
    );
}

/// Exhaustive active-set projection onto the simplex: for every support `S`,
/// the projection onto `{Σ_S v = 1}` restricted to `S`, keeping the closest
/// nonnegative candidate.
fn brute_simplex(v: &[f64]) -> Vec<f64> {
    let n = v.len();
    let mut best: Option<(f64, Vec<f64>)> = None;
    for mask in 1u32..(1 << n) {
        let support: Vec<usize> = (0..n).filter(|i| mask & (1 << i) != 0).collect();
        let shift = (support.iter().map(|&i| v[i]).sum::<f64>() - 1.0) / support.len() as f64;
        let mut z = vec![0.0; n];
        for &i in &support {
            z[i] = v[i] - shift;
        }
        if z.iter().any(|&zi| zi < -1e-15) {
            continue;
        }
        let d = vector::dist(&z, v);
        if best.as_ref().is_none_or(|(bd, _)| d < *bd) {
            best = Some((d, z));
        }
    }
    best.unwrap().1
}

fn criterion_6(r: &mut Report) {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut worst_oracle = 0.0f64;
    for _ in 0..100 {
        let n = rng.gen_range(2..=8);
        let v: Vec<f64> = (0..n).map(|_| rng.gen_range(-3.0..3.0)).collect();
        worst_oracle = worst_oracle.max(vector::dist(&project_simplex(&v), &brute_simplex(&v)));
    }

    let mut failures = Vec::new();
    for (name, make) in [
        ("box", 0usize),
        ("ball", 1),
        ("simplex", 2),
        ("unconstrained", 3),
    ] {
        let mut bad = 0;
        for _ in 0..1000 {
            let n = rng.gen_range(1..=6);
            let set = match make {
                0 => {
                    let lower: Vec<f64> = (0..n).map(|_| rng.gen_range(-2.0..0.0)).collect();
                    let upper = lower.iter().map(|l| l + rng.gen_range(0.0..3.0)).collect();
                    Set::boxed(lower, upper).unwrap()
                }
                1 => Set::ball((0..n).map(|_| rng.gen_range(-1.0..1.0)).collect(), rng.gen_range(0.1..2.0)).unwrap(),
                2 => Set::simplex(n).unwrap(),
                _ => Set::unconstrained(n),
            };
            let mut draw = || (0..n).map(|_| rng.gen_range(-5.0..5.0)).collect::<Vec<f64>>();
            let (a, b, z) = (draw(), draw(), set.project(&draw()).unwrap());
            let (pa, pb) = (set.project(&a).unwrap(), set.project(&b).unwrap());
            let idem = vector::dist(&set.project(&pa).unwrap(), &pa) <= 1e-12;
            let nonexp = vector::dist(&pa, &pb) <= vector::dist(&a, &b) + 1e-12;
            // ⟨a − P a, z − P a⟩ ≤ 0 for every z in the set
            let vi = vector::dot(&vector::sub(&a, &pa), &vector::sub(&z, &pa)) <= 1e-10;
            bad += usize::from(!(idem && nonexp && vi));
        }
        if bad > 0 {
            failures.push(format!("{name}: {bad}"));
        }
    }
    r.line(
        6,
        "projections",
        worst_oracle <= 1e-9 && failures.is_empty(),
        format!(
            "simplex vs brute force max diff {worst_oracle:.1e}; property failures: {}",
            if failures.is_empty() { "none".to_string() } else { failures.join(", ") }
        ),
    );
}

fn criterion_7(r: &mut Report) {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut parts = Vec::new();
    let mut ok = true;
    for (name, p, _, _) in builtin_problems() {
        let points: Vec<(Vec<f64>, Vec<f64>)> = (0..20)
            .map(|_| {
                let x: Vec<f64> = (0..p.dim_x()).map(|_| rng.gen_range(-1.5..1.5)).collect();
                let y = p.set_y().project(&(0..p.dim_y()).map(|_| rng.gen_range(-1.5..1.5)).collect::<Vec<_>>()).unwrap();
                (p.set_x().project(&x).unwrap(), y)
            })
            .collect();
        let err = check_gradients(&p, &points, 1e-6).unwrap().max_rel_error();
        ok &= err <= 1e-5;
        parts.push(format!("{name}={err:.1e}"));
    }
    // w-breakpoints, where the second derivative jumps
    let synth = make_synthetic(SyntheticParams::<f64>::default()).unwrap();
    let near: Vec<(Vec<f64>, Vec<f64>)> = SyntheticParams::<f64>::default()
        .breakpoints()
        .iter()
        .flat_map(|&b| [b - 5e-7, b, b + 5e-7])
        .map(|b| (vec![0.3, -0.2, b], vec![0.1, 0.4]))
        .collect();
    let err = check_gradients(&synth, &near, 1e-6).unwrap().max_rel_error();
    ok &= err <= 1e-4;
    parts.push(format!("breakpoints={err:.1e}"));
    r.line(7, "gradient checks", ok, parts.join(" "));
}

fn criterion_8(r: &mut Report) {
    let spec = RobustDomainsSpec::three_quadratics();
    let p = make_robust_domains(&spec).unwrap();
    let x0 = vec![0.0, 0.0];
    let cfg = Config::new(x0.clone(), vec![1.0 / 3.0; 3])
        .with_termination(Termination::RegularizedGap)
        .with_epsilon(1e-4)
        .with_max_outer_iters(100_000);
    let out = pf_agp_nl(&p, &cfg).unwrap();
    let (start, end) = (spec.worst_loss(&x0), spec.worst_loss(&out.x));
    let ok = out.status == Status::Converged && end <= start && out.diagnostics.beta_bound_violations == 0;
    r.line(
        8,
        "robust domains pf-agp-nl",
        ok,
        format!(
            "{} after {} iterations, reg gap {:.2e}; worst loss {start:.5} -> {end:.5}; beta-bound violations {}",
            out.status, out.iterations, out.gap.norm, out.diagnostics.beta_bound_violations
        ),
    );
}

/// Least-squares slope of `log gap` against `log k`.
fn loglog_slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let (mx, my) = points.iter().fold((0.0, 0.0), |(a, b), (x, y)| (a + x.ln() / n, b + y.ln() / n));
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for (x, y) in points {
        sxy += (x.ln() - mx) * (y.ln() - my);
        sxx += (x.ln() - mx).powi(2);
    }
    sxy / sxx
}

fn criterion_9(r: &mut Report) {
    let out = quad_nsc(10_000, 1e-14);
    let min = out.min_gap_so_far();
    let last_k = min.last().map_or(0, |m| m.0);
    let grid: Vec<(f64, f64)> = (0..=16)
        .map(|i| (10f64.powf(2.0 + i as f64 / 8.0)).round() as usize)
        .filter(|&k| k <= last_k)
        .filter_map(|k| min.iter().find(|m| m.0 == k).map(|m| (k as f64, m.1)))
        .collect();
    let slope = loglog_slope(&grid);
    r.line(
        9,
        "rate shape",
        grid.len() >= 2 && slope <= -0.4,
        format!("slope {slope:.3} over {} grid points in [100, {}]", grid.len(), last_k.min(10_000)),
    );
}

fn criterion_10(r: &mut Report) {
    let p = quad_reference();
    let (mu, l1) = (0.5, 0.01);
    let cfg = Config::new(vec![0.6, 0.3], vec![0.0, 0.0]).with_restart(RestartParams {
        mu,
        s_lower: 0.0,
        l1: Some(l1),
    });
    let out = r_pf_agp_nsc(&p, &cfg).unwrap();
    let c = p.known_constants().copied().unwrap();
    let big_l = c.l11.max(c.l12).max(c.l22);
    let bound = ceil_log2(2.0 * big_l / l1) + 1;
    let exact = out.trace.iter().all(|t| {
        let l = t.l11.unwrap();
        t.gamma == Some(3.0 * l) && t.beta == Some(158.0 * l.powi(3) / (mu * mu))
    }) && out.stages.iter().all(|s| s.beta == 3.0 * s.l && s.alpha == 158.0 * s.l.powi(3) / (mu * mu));
    let ok = out.status == Status::Converged && out.diagnostics.restarts <= bound && exact;
    r.line(
        10,
        "restarted solver",
        ok,
        format!(
            "{} with {} restarts <= {bound}; stage parameters exact: {exact}",
            out.status, out.diagnostics.restarts
        ),
    );
}

fn criterion_11(r: &mut Report) {
    let dir = tempfile::tempdir().unwrap();
    let mut same = true;
    let mut runs = 0;
    for (name, p, x0, y0) in builtin_problems() {
        let cfg = Config::new(x0, y0).with_max_outer_iters(500);
        let mut bytes = Vec::new();
        for i in 0..2 {
            let out = if p.linear_in_y() { pf_agp_nl(&p, &cfg) } else { pf_agp_nc(&p, &cfg) }.unwrap();
            let path = dir.path().join(format!("{name}-{i}.csv"));
            write_trace(&out.trace, TraceFormat::Csv, &path).unwrap();
            bytes.push(std::fs::read(&path).unwrap());
        }
        same &= bytes[0] == bytes[1];
        runs += 1;
    }
    r.line(11, "determinism", same, format!("{runs} problems, traces identical: {same}"));
}

fn main() {
    let mut r = Report { failed: 0 };
    criterion_1(&mut r);
    criterion_2(&mut r);
    criterion_3(&mut r);
    criterion_4(&mut r);
    criterion_5(&mut r);
    criterion_6(&mut r);
    criterion_7(&mut r);
    criterion_8(&mut r);
    criterion_9(&mut r);
    criterion_10(&mut r);
    criterion_11(&mut r);
    if r.failed > 0 {
        println!("{} criteria failed", r.failed);
        std::process::exit(1);
    }
}
