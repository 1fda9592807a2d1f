//! Acceptance gate. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

use std::f64::consts::PI;
use std::process::ExitCode;
use std::sync::Arc;
use std::time::Instant;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use helmlab::boundary::{
    check_elastic_symbol_bound, elastic_dtn0_matrix, hermitian2_eigenvalues, sphere_symbol_report, ELASTIC_BOUND_C,
};
use helmlab::exact::disk_robin_exact;
use helmlab::femcore::build_space;
use helmlab::filters::{apply_nk, compute_neumann_eigenpairs, filter_split};
use helmlab::mesh::generate_disk_mesh;
use helmlab::specfun::{bessel_j, bessel_pair, bessel_y};
use helmlab::study::{
    asymptotic_rate, run_convergence, run_hp_study, run_pollution, ErrorKind, Example, StudyConfig,
    QUASI_OPTIMALITY_BOUND,
};

type Outcome = Result<String, String>;

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn rates(example: Example) -> Outcome {
    let mut lines = Vec::new();
    let mut ok = true;
    for p in 1..=4usize {
        let top = if p <= 2 { 5 } else { 4 };
        let cfg = StudyConfig::new(example, vec![p], (0..=top).collect(), vec![4.0]);
        let recs = run_convergence(&cfg).map_err(|e| e.to_string())?;
        if let Some(r) = recs.iter().find(|r| r.error.is_some()) {
            return Err(format!("p={p} level {} failed: {:?}", r.level, r.error));
        }
        let l2 = asymptotic_rate(&recs, ErrorKind::L2, (p + 1) as f64).map_err(|e| e.to_string())?;
        let en = asymptotic_rate(&recs, ErrorKind::Energy, p as f64).map_err(|e| e.to_string())?;
        ok &= (l2 - (p + 1) as f64).abs() <= 0.25 && (en - p as f64).abs() <= 0.25;
        lines.push(format!("p={p}: L2 {l2:.3} energy {en:.3}"));
    }
    check(ok, lines.join(", "))
}

fn pollution() -> Outcome {
    let cfg = StudyConfig::new(Example::DiskRobin, vec![1, 4], vec![0], vec![4.0, 8.0, 16.0]);
    let rep = run_pollution(&cfg).map_err(|e| e.to_string())?;
    if let Some(r) = rep.records.iter().find(|r| r.error.is_some()) {
        return Err(format!("solve failed: {:?}", r.error));
    }
    let g = |p| rep.growth.iter().find(|(q, _)| *q == p).map(|x| x.1).unwrap_or(f64::NAN);
    let (g1, g4) = (g(1), g(4));
    check(g1 > g4, format!("energy-error growth k=4..16 at N_lambda>=12: p=1 {g1:.3}, p=4 {g4:.3}"))
}

fn sphere_symbols() -> Outcome {
    let start = Instant::now();
    let rows = sphere_symbol_report(200, &[1.0, 2.0, 4.0, 8.0, 16.0, 32.0]).map_err(|e| e.to_string())?;
    let secs = start.elapsed().as_secs_f64();
    let worst = rows.iter().map(|r| r.slack_re.min(r.slack_im).min(r.slack_2k)).fold(f64::INFINITY, f64::min);
    let violations = rows.iter().filter(|r| r.slack_re.min(r.slack_im).min(r.slack_2k) < -1e-9).count();
    check(
        violations == 0 && secs < 1.0,
        format!("{} rows, {violations} violations, min slack {worst:e}, {secs:.3} s", rows.len()),
    )
}

fn elastic() -> Outcome {
    let start = Instant::now();
    let mut min_scaled = f64::INFINITY;
    let mut m0_exact = true;
    for &lambda in &[0.0, 1.0, 10.0] {
        for &mu in &[1.0, 3.0] {
            for n in -200..=200i64 {
                let m = elastic_dtn0_matrix(n, lambda, mu).map_err(|e| e.to_string())?;
                min_scaled = min_scaled.min(hermitian2_eigenvalues(&m)[0] / mu);
                if n == 0 {
                    let z = Complex64::new(0.0, 0.0);
                    let mu_c = Complex64::new(mu, 0.0);
                    m0_exact &= m == [[mu_c, z], [z, mu_c]];
                }
            }
        }
    }
    let mut max_ratio: f64 = 0.0;
    for &k in &[2.0f64, 8.0] {
        for &lambda in &[0.0, 1.0, 10.0] {
            for &mu in &[1.0, 3.0] {
                let lo = (2.0 * k).ceil() as i64;
                let hi = (10.0 * k).floor() as i64;
                let rep = check_elastic_symbol_bound(k, lambda, mu, lo..=hi).map_err(|e| e.to_string())?;
                max_ratio = max_ratio.max(rep.max_ratio);
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    check(
        min_scaled >= -1e-10 && m0_exact && max_ratio <= ELASTIC_BOUND_C && secs < 5.0,
        format!(
            "min eig(M_n)/mu {min_scaled:e}, M_0 = mu I: {m0_exact}, max high-mode ratio {max_ratio:.4} <= {ELASTIC_BOUND_C}, {secs:.3} s"
        ),
    )
}

/// Power series of `J_0`, 40 terms.
fn j0_series(x: f64) -> f64 {
    let q = x * x / 4.0;
    let mut term = 1.0;
    let mut sum = 1.0;
    for m in 1..40 {
        term *= -q / (m as f64 * m as f64);
        sum += term;
    }
    sum
}

/// `Y_0 = (2/pi)[(ln(x/2) + gamma) J_0 + sum (-1)^{m+1} H_m q^m / (m!)^2]`.
fn y0_series(x: f64) -> f64 {
    const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;
    let q = x * x / 4.0;
    let mut term = 1.0;
    let mut harmonic = 0.0;
    let mut sum = 0.0;
    for m in 1..40 {
        term *= q / (m as f64 * m as f64);
        harmonic += 1.0 / m as f64;
        let sign = if m % 2 == 1 { 1.0 } else { -1.0 };
        sum += sign * harmonic * term;
    }
    2.0 / PI * (((x / 2.0).ln() + EULER_GAMMA) * j0_series(x) + sum)
}

fn special_functions() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut xs = Vec::new();
    let mut x = 1e-3;
    while x <= 200.0 {
        xs.push(x);
        x *= 1.07;
    }
    xs.push(200.0);
    for n in 0..=60u32 {
        for &x in &xs {
            let want = 2.0 / (PI * x);
            let p = bessel_pair(n, x).map_err(|e| e.to_string())?;
            worst = worst.max((p.wronskian() - want).abs() / want);
            let j1 = bessel_j(n + 1, x).map_err(|e| e.to_string())?;
            let y1 = bessel_y(n + 1, x).map_err(|e| e.to_string())?;
            worst = worst.max((j1 * p.y - p.j * y1 - want).abs() / want);
        }
    }
    let j0 = bessel_j(0, 1.0).map_err(|e| e.to_string())?;
    let y0 = bessel_y(0, 1.0).map_err(|e| e.to_string())?;
    let dj = (j0 - j0_series(1.0)).abs();
    let dy = (y0 - y0_series(1.0)).abs();
    check(
        worst <= 1e-10 && dj <= 1e-8 && dy <= 1e-8,
        format!("max Wronskian rel. error {worst:.2e} over n<=60, x in [1e-3,200]; |J0(1)-oracle| {dj:.1e}, |Y0(1)-oracle| {dy:.1e}"),
    )
}

fn filters() -> Outcome {
    let start = Instant::now();
    let space = build_space(Arc::new(generate_disk_mesh(1, 4).map_err(|e| e.to_string())?), 4).map_err(|e| e.to_string())?;
    let n = space.n_dof();
    if n > 1500 {
        return Err(format!("{n} dofs exceeds 1500"));
    }
    let dec = compute_neumann_eigenpairs(&space, 1.0, 2.0, n).map_err(|e| e.to_string())?;
    let (k, eta) = (6.0, 1.5);
    let c = |v: f64| Complex64::new(v, 0.0);

    let mphi: Vec<Vec<Complex64>> = dec
        .eigenvectors
        .iter()
        .map(|v| dec.mass.matvec(&v.iter().map(|&x| c(x)).collect::<Vec<_>>()).expect("length"))
        .collect();
    let mut ortho: f64 = 0.0;
    for (i, mi) in mphi.iter().enumerate() {
        for (j, phi) in dec.eigenvectors.iter().enumerate() {
            let g: f64 = mi.iter().zip(phi).map(|(a, b)| a.re * b).sum();
            ortho = ortho.max((g - if i == j { 1.0 } else { 0.0 }).abs());
        }
    }

    let mut resid: f64 = 0.0;
    for ((phi, mi), &l2) in dec.eigenvectors.iter().zip(&mphi).zip(&dec.eigenvalues) {
        let v: Vec<Complex64> = phi.iter().map(|&x| c(x)).collect();
        let kv = dec.stiffness.matvec(&v).expect("length");
        let r: f64 = kv.iter().zip(mi).map(|(a, b)| (a - b * l2).norm_sqr()).sum::<f64>().sqrt();
        let norm: f64 = phi.iter().map(|x| x * x).sum::<f64>().sqrt();
        resid = resid.max(r / ((1.0 + l2) * norm));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut next = || rng.gen_range(-1.0..1.0);
    let (mut split, mut parseval, mut nk_violations) = (0.0f64, 0.0f64, 0usize);
    let bound_factor = 1.0 / ((eta * eta - 1.0) * k * k);
    for _ in 0..100 {
        let f: Vec<Complex64> = (0..n).map(|_| Complex64::new(next(), next())).collect();
        let (low, high) = filter_split(&dec, &f, eta, k).map_err(|e| e.to_string())?;
        let fnorm = dec.m_norm(&f).map_err(|e| e.to_string())?;
        let defect = low.iter().zip(&high).zip(&f).map(|((l, h), f)| (l + h - f).norm_sqr()).sum::<f64>().sqrt();
        let fl2 = f.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        split = split.max(defect / fl2);
        let coeffs = dec.coefficients(&f).map_err(|e| e.to_string())?;
        let spectral: f64 = coeffs.iter().map(|z| z.norm_sqr()).sum();
        parseval = parseval.max((spectral - fnorm * fnorm).abs() / (fnorm * fnorm));
        let v = apply_nk(&dec, &high, k, eta).map_err(|e| e.to_string())?;
        let vn = dec.m_norm(&v).map_err(|e| e.to_string())?;
        if vn > dec.m_norm(&high).map_err(|e| e.to_string())? * bound_factor * (1.0 + 1e-12) {
            nk_violations += 1;
        }
    }
    let secs = start.elapsed().as_secs_f64();
    check(
        ortho <= 1e-9 && split <= 1e-10 && parseval <= 1e-10 && nk_violations == 0 && resid <= 1e-8 && secs < 120.0,
        format!(
            "{n} dofs: M-orthonormality {ortho:.1e}, split {split:.1e}, Parseval {parseval:.1e}, N_k violations {nk_violations}/100, residual {resid:.1e}, {secs:.1} s"
        ),
    )
}

fn hp_stability() -> Outcome {
    let ks = vec![4.0, 8.0, 16.0, 32.0];
    let cfg = StudyConfig::new(Example::DiskAbc2, vec![1], vec![0], ks.clone());
    let st = run_hp_study(&cfg).map_err(|e| e.to_string())?;
    let done: Vec<_> = st.records.iter().filter(|r| !r.skipped).collect();
    let below = done.iter().all(|r| r.ratio_proj >= 1.0 - 1e-8 && r.ratio_interp.is_finite());
    let bounded = done.len() == ks.len()
        && st.max_ratio_interp <= QUASI_OPTIMALITY_BOUND
        && st.max_ratio_proj <= QUASI_OPTIMALITY_BOUND;

    let mut bad = StudyConfig::new(Example::DiskAbc2, vec![1], vec![0], ks);
    bad.hp.c1 = 4.0;
    bad.hp.fixed_p = Some(1);
    let vt = run_hp_study(&bad).map_err(|e| e.to_string())?;
    let series: Vec<f64> = vt.records.iter().map(|r| r.ratio_interp).collect();
    let growing = series.windows(2).all(|w| w[1] > w[0]);
    let exceeds = series.last().is_some_and(|&r| r > QUASI_OPTIMALITY_BOUND);
    let shown: Vec<String> = series.iter().map(|r| format!("{r:.2}")).collect();
    check(
        below && bounded && growing && exceeds,
        format!(
            "c1=1.5,c2=1: max ratio {:.3} (interpolant), {:.3} (projection) <= {QUASI_OPTIMALITY_BOUND}; c1=4,p=1: [{}]",
            st.max_ratio_interp,
            st.max_ratio_proj,
            shown.join(", ")
        ),
    )
}

fn exact_consistency() -> Outcome {
    let mut jump: f64 = 0.0;
    let mut flux_jump: f64 = 0.0;
    let mut robin: f64 = 0.0;
    let mut strong: f64 = 0.0;
    for &k in &[2.0, 4.0, 8.0] {
        let ex = disk_robin_exact(k, 1.0, 2.0, 0.5).map_err(|e| e.to_string())?;
        let radial = |x: [f64; 2]| {
            let g = ex.grad(x, None);
            let r = (x[0] * x[0] + x[1] * x[1]).sqrt();
            (g[0] * x[0] + g[1] * x[1]) / r
        };
        for a in 0..64 {
            let th = 2.0 * PI * a as f64 / 64.0;
            let (c, s) = (th.cos(), th.sin());
            let inner = [0.5 * c * (1.0 - 1e-15), 0.5 * s * (1.0 - 1e-15)];
            let outer = [0.5 * c * (1.0 + 1e-15), 0.5 * s * (1.0 + 1e-15)];
            jump = jump.max((ex.u(inner, None) - ex.u(outer, None)).norm());
            flux_jump = flux_jump.max((radial(inner) - radial(outer)).norm());
            let b = [c, s];
            robin = robin.max((radial(b) - Complex64::new(0.0, k) * ex.u(b, None)).norm());
        }
        let h = 1e-4;
        for i in 0..50 {
            let th = 2.0 * PI * (i as f64 * 0.618_033_988_7).fract();
            let r = if i % 2 == 0 { 0.05 + 0.4 * (i as f64 / 50.0) } else { 0.55 + 0.4 * (i as f64 / 50.0) };
            let x = [r * th.cos(), r * th.sin()];
            let u = |dx: f64, dy: f64| ex.u([x[0] + dx, x[1] + dy], None);
            let lap = (u(h, 0.0) + u(-h, 0.0) + u(0.0, h) + u(0.0, -h) - u(0.0, 0.0) * 4.0) / (h * h);
            let n = if r < 0.5 { 1.0 } else { 2.0 };
            let res = -lap - u(0.0, 0.0) * (k * k * n * n);
            strong = strong.max((res - 1.0).norm());
        }
    }
    check(
        jump <= 1e-10 && flux_jump <= 1e-10 && robin <= 1e-10 && strong <= 1e-4,
        format!(
            "k in {{2,4,8}}: interface jump {jump:.1e}, flux jump {flux_jump:.1e}, Robin residual {robin:.1e}, FD residual {strong:.1e}"
        ),
    )
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 9] = [
        ("convergence rates, disk with Robin condition", || rates(Example::DiskRobin)),
        ("convergence rates, manufactured ABC2 (Feng)", || rates(Example::DiskAbc2)),
        ("pollution signature", pollution),
        ("sphere DtN symbol bounds", sphere_symbols),
        ("elastic DtN0 positivity and symbol bound", elastic),
        ("special functions", special_functions),
        ("spectral filters", filters),
        ("hp quasi-optimality", hp_stability),
        ("exact-solution self-consistency", exact_consistency),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = run();
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(d) => println!("PASS {}. {name}: {d} [{secs:.1} s]", i + 1),
            Err(d) => {
                failed += 1;
                println!("FAIL {}. {name}: {d} [{secs:.1} s]", i + 1);
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
