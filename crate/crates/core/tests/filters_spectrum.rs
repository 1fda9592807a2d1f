use std::sync::{Arc, OnceLock};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use helmlab::femcore::{build_space, FeSpace};
use helmlab::filters::{compute_neumann_eigenpairs, verify_norm_equivalence, SpectralDecomposition};
use helmlab::linsolve::norm2;
use helmlab::mesh::generate_disk_mesh;
use helmlab::specfun::bessel_j;

fn space(level: usize, p: usize) -> FeSpace {
    build_space(Arc::new(generate_disk_mesh(level, p.min(4)).unwrap()), p).unwrap()
}

/// Complete homogeneous decomposition on level 2, p = 3 (1801 dofs).
fn homogeneous() -> &'static SpectralDecomposition {
    static DEC: OnceLock<SpectralDecomposition> = OnceLock::new();
    DEC.get_or_init(|| {
        let sp = space(2, 3);
        compute_neumann_eigenpairs(&sp, 1.0, 1.0, sp.n_dof()).unwrap()
    })
}

/// First zero of `J_1' = J_0 - J_1 / x`, by bisection.
fn first_neumann_zero() -> f64 {
    let d = |x: f64| bessel_j(0, x).unwrap() - bessel_j(1, x).unwrap() / x;
    let (mut lo, mut hi) = (1.0, 2.5);
    assert!(d(lo) > 0.0 && d(hi) < 0.0);
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if d(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

#[test]
fn first_nonzero_eigenvalue_matches_disk() {
    let j11 = first_neumann_zero();
    assert!((j11 - 1.841_18).abs() < 1e-5);
    let dec = homogeneous();
    let l1 = dec.eigenvalues[1].sqrt();
    assert!((l1 - j11).abs() <= 0.02 * j11, "{l1} vs {j11}");
}

#[test]
fn kernel_is_the_constant_mode() {
    let dec = homogeneous();
    assert!(dec.eigenvalues[0] <= 1e-9);
    let phi = &dec.eigenvectors[0];
    let spread = phi.iter().fold(0.0f64, |a, &v| a.max((v - phi[0]).abs()));
    assert!(spread <= 1e-8 * phi[0].abs());
}

#[test]
fn eigenvalue_count_follows_weyl() {
    let dec = homogeneous();
    let eta = 1.5;
    let ks = [4.0f64, 6.0, 8.0];
    let pts: Vec<(f64, f64)> = ks.iter().map(|&k| ((eta * k).ln(), (dec.count_below(eta * k) as f64).ln())).collect();
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let s = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum::<f64>() / pts.iter().map(|p| (p.0 - mx).powi(2)).sum::<f64>();
    assert!((s - 2.0).abs() <= 0.4, "slope {s}");
}

#[test]
fn rayleigh_quotients_match_eigenvalues() {
    let dec = homogeneous();
    for (phi, &l2) in dec.eigenvectors.iter().zip(&dec.eigenvalues).step_by(7) {
        let v: Vec<Complex64> = phi.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        let rq = dec.stiffness.form(&v, &v).unwrap().re;
        assert!((rq - l2).abs() <= 1e-8 * (1.0 + l2));
    }
}

#[test]
fn complete_basis_reconstructs() {
    let sp = space(1, 3);
    let dec = compute_neumann_eigenpairs(&sp, 1.0, 2.0, sp.n_dof()).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..20 {
        let f: Vec<Complex64> =
            (0..sp.n_dof()).map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
        let back = dec.synthesize(&dec.coefficients(&f).unwrap(), |_| true);
        let err: Vec<Complex64> = back.iter().zip(&f).map(|(a, b)| a - b).collect();
        assert!(norm2(&err) <= 1e-9 * norm2(&f));
    }
}

#[test]
fn norm_equivalence_with_contrast() {
    let sp = space(1, 3);
    let dec = compute_neumann_eigenpairs(&sp, 1.0, 2.0, sp.n_dof()).unwrap();
    let rep = verify_norm_equivalence(&dec, &sp, 1.0, 2.0, 50, 9).unwrap();
    assert!(rep.pass);
    assert!(rep.ratios.iter().all(|&r| (0.2..=5.0).contains(&r)));

    let one = vec![Complex64::new(1.0, 0.0); sp.n_dof()];
    let c = dec.coefficients(&one).unwrap();
    let spectral: f64 = c.iter().zip(&dec.eigenvalues).map(|(c, l2)| c.norm_sqr() * (1.0 + l2)).sum();
    let unweighted = helmlab::femcore::assemble_mass(&sp, Complex64::new(1.0, 0.0), Complex64::new(1.0, 0.0))
        .form(&one, &one)
        .unwrap()
        .re;
    let ratio = spectral / unweighted;
    assert!((1.0..=4.0).contains(&ratio), "{ratio}");
}
