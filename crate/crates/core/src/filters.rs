//! Frequency filters built from the `n^2`-weighted Neumann eigenpairs of a
//! finite-element space, and the high-band resolvent `N_k`.
//!
//! Everything here is dense. Quantitative statements only make sense for
//! modes the mesh resolves, roughly `lambda_i h / p <= 1`.

use std::io::Write;

use faer::{Mat, Side};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::femcore::{assemble_mass, assemble_stiffness, FeSpace};
use crate::linsolve::ComplexSparseMatrix;

/// Largest space accepted by the dense eigensolve.
pub const DENSE_BUDGET: usize = 3000;

/// Default filter threshold factor.
pub const DEFAULT_ETA: f64 = 1.5;

/// Coefficients below the band edge smaller than this, relative to
/// `||f||_M`, count as zero.
pub const BAND_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum FilterError {
    #[error("{n_dof} degrees of freedom exceed the dense budget of {budget}")]
    BudgetExceeded { n_dof: usize, budget: usize },
    #[error("requested {count} eigenpairs from a space with {n_dof} degrees of freedom")]
    CountTooLarge { count: usize, n_dof: usize },
    #[error("mass matrix is not positive definite")]
    MassNotPositiveDefinite,
    #[error("eigensolver failed to converge")]
    EigenFailure,
    #[error("decomposition reaches lambda = {covered}, filters need {required}")]
    TruncationInsufficient { covered: f64, required: f64 },
    #[error("input has low-band coefficient of relative size {0:e}")]
    BandViolation(f64),
    #[error("eta must exceed 1, got {0}")]
    InvalidEta(f64),
    #[error("vector length {found} does not match {expected}")]
    LengthMismatch { expected: usize, found: usize },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, FilterError>;

/// Ascending pairs `(lambda_i^2, phi_i)` of `K phi = lambda^2 M phi`, with
/// `phi_i^T M phi_j = delta_ij`.
#[derive(Debug, Clone)]
pub struct SpectralDecomposition {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: Vec<Vec<f64>>,
    pub mass: ComplexSparseMatrix,
    pub stiffness: ComplexSparseMatrix,
    pub count: usize,
}

fn dense_real(a: &ComplexSparseMatrix) -> Mat<f64> {
    let n = a.dim();
    let mut m = Mat::<f64>::zeros(n, n);
    for i in 0..n {
        for (j, v) in a.row(i) {
            m[(i, j)] = v.re;
        }
    }
    m
}

/// Lowest `count` eigenpairs of the Neumann Laplacian weighted by `n^2`.
pub fn compute_neumann_eigenpairs(
    space: &FeSpace,
    n_inner: f64,
    n_outer: f64,
    count: usize,
) -> Result<SpectralDecomposition> {
    let n = space.n_dof();
    if n > DENSE_BUDGET {
        return Err(FilterError::BudgetExceeded { n_dof: n, budget: DENSE_BUDGET });
    }
    if count > n {
        return Err(FilterError::CountTooLarge { count, n_dof: n });
    }
    let stiffness = assemble_stiffness(space);
    let mass = assemble_mass(
        space,
        Complex64::new(n_inner * n_inner, 0.0),
        Complex64::new(n_outer * n_outer, 0.0),
    );
    let k = dense_real(&stiffness);
    let m = dense_real(&mass);
    let llt = m.llt(Side::Lower).map_err(|_| FilterError::MassNotPositiveDefinite)?;
    let l = llt.L();
    // C = L^{-1} K L^{-T}
    let mut x = k.clone();
    l.solve_lower_triangular_in_place(x.as_mut());
    let mut c = x.transpose().to_owned();
    l.solve_lower_triangular_in_place(c.as_mut());
    for i in 0..n {
        for j in 0..i {
            let v = 0.5 * (c[(i, j)] + c[(j, i)]);
            c[(i, j)] = v;
            c[(j, i)] = v;
        }
    }
    let eig = c.self_adjoint_eigen(Side::Lower).map_err(|_| FilterError::EigenFailure)?;
    let mut q = eig.U().to_owned();
    l.transpose().solve_upper_triangular_in_place(q.as_mut());
    let s = eig.S().column_vector();
    let mut eigenvalues = Vec::with_capacity(count);
    let mut eigenvectors = Vec::with_capacity(count);
    for i in 0..count {
        eigenvalues.push(s[i].max(0.0));
        let mut v: Vec<f64> = (0..n).map(|r| q[(r, i)]).collect();
        // sign fixed by the largest entry
        let big = v.iter().copied().fold(0.0f64, |a, b| if b.abs() > a.abs() { b } else { a });
        if big < 0.0 {
            v.iter_mut().for_each(|x| *x = -*x);
        }
        eigenvectors.push(v);
    }
    Ok(SpectralDecomposition { eigenvalues, eigenvectors, mass, stiffness, count })
}

impl SpectralDecomposition {
    pub fn n_dof(&self) -> usize {
        self.mass.dim()
    }

    pub fn is_complete(&self) -> bool {
        self.count == self.n_dof()
    }

    /// Largest computed `lambda_i`.
    pub fn max_lambda(&self) -> f64 {
        self.eigenvalues.last().map_or(0.0, |v| v.sqrt())
    }

    /// Number of modes with `lambda_i < threshold`.
    pub fn count_below(&self, threshold: f64) -> usize {
        self.eigenvalues.iter().filter(|&&l2| l2.sqrt() < threshold).count()
    }

    /// `||f||_M`.
    pub fn m_norm(&self, f: &[Complex64]) -> Result<f64> {
        self.check_len(f)?;
        Ok(self.mass.form(f, f).expect("length checked").re.max(0.0).sqrt())
    }

    fn check_len(&self, f: &[Complex64]) -> Result<()> {
        if f.len() != self.n_dof() {
            return Err(FilterError::LengthMismatch { expected: self.n_dof(), found: f.len() });
        }
        Ok(())
    }

    /// Fourier coefficients `f_i = phi_i^T M f`.
    pub fn coefficients(&self, f: &[Complex64]) -> Result<Vec<Complex64>> {
        self.check_len(f)?;
        let mf = self.mass.matvec(f).expect("length checked");
        Ok(self.eigenvectors.iter().map(|phi| phi.iter().zip(&mf).map(|(p, v)| v * p).sum()).collect())
    }

    /// `sum_i c_i phi_i` over the selected modes.
    pub fn synthesize(&self, coeffs: &[Complex64], keep: impl Fn(usize) -> bool) -> Vec<Complex64> {
        let mut out = vec![Complex64::new(0.0, 0.0); self.n_dof()];
        for (i, (c, phi)) in coeffs.iter().zip(&self.eigenvectors).enumerate() {
            if keep(i) {
                for (o, p) in out.iter_mut().zip(phi) {
                    *o += c * p;
                }
            }
        }
        out
    }

    fn band_edge(&self, eta: f64, k: f64) -> Result<f64> {
        if !(eta > 1.0) {
            return Err(FilterError::InvalidEta(eta));
        }
        let required = 2.0 * eta * k;
        if !self.is_complete() && self.max_lambda() < required {
            return Err(FilterError::TruncationInsufficient { covered: self.max_lambda(), required });
        }
        Ok(eta * k)
    }

    /// Write `index,lambda_sq` rows.
    pub fn write_spectrum_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["index", "lambda_sq"]).map_err(csv_io)?;
        for (i, l) in self.eigenvalues.iter().enumerate() {
            w.write_record([i.to_string(), format!("{l:e}")]).map_err(csv_io)?;
        }
        w.flush()?;
        Ok(())
    }
}

fn csv_io(e: csv::Error) -> FilterError {
    FilterError::Io(std::io::Error::other(e))
}

/// Low and high parts: modes with `lambda_i < eta k` and the rest.
pub fn filter_split(
    dec: &SpectralDecomposition,
    f: &[Complex64],
    eta: f64,
    k: f64,
) -> Result<(Vec<Complex64>, Vec<Complex64>)> {
    let edge = dec.band_edge(eta, k)?;
    let c = dec.coefficients(f)?;
    let low = |i: usize| dec.eigenvalues[i].sqrt() < edge;
    Ok((dec.synthesize(&c, low), dec.synthesize(&c, |i| !low(i))))
}

/// `N_k f = sum_{lambda_i >= eta k} f_i / (lambda_i^2 - k^2) phi_i`.
pub fn apply_nk(dec: &SpectralDecomposition, f_high: &[Complex64], k: f64, eta: f64) -> Result<Vec<Complex64>> {
    let edge = dec.band_edge(eta, k)?;
    let c = dec.coefficients(f_high)?;
    let norm = dec.m_norm(f_high)?;
    let mut worst: f64 = 0.0;
    let mut scaled = c.clone();
    for (i, s) in scaled.iter_mut().enumerate() {
        let l2 = dec.eigenvalues[i];
        if l2.sqrt() < edge {
            worst = worst.max(s.norm());
            *s = Complex64::new(0.0, 0.0);
        } else {
            *s /= l2 - k * k;
        }
    }
    if norm > 0.0 && worst > BAND_TOLERANCE * norm {
        return Err(FilterError::BandViolation(worst / norm));
    }
    Ok(dec.synthesize(&scaled, |_| true))
}

/// Ratios `sum |f_i|^2 (1 + lambda_i^2) / f^H (K + M_1) f` over random
/// samples, with `M_1` the unweighted mass.
#[derive(Debug, Clone)]
pub struct NormEquivalenceReport {
    pub ratios: Vec<f64>,
    pub bound: f64,
    pub pass: bool,
}

/// Sampled check of `||f||_{H^1}^2 ~ sum |f_i|^2 (1 + lambda_i^2)`.
pub fn verify_norm_equivalence(
    dec: &SpectralDecomposition,
    space: &FeSpace,
    n_inner: f64,
    n_outer: f64,
    samples: usize,
    seed: u64,
) -> Result<NormEquivalenceReport> {
    if !dec.is_complete() {
        let n = dec.n_dof();
        return Err(FilterError::TruncationInsufficient { covered: dec.max_lambda(), required: n as f64 });
    }
    let one = Complex64::new(1.0, 0.0);
    let h1 = dec.stiffness.add_scaled(one, &assemble_mass(space, one, one)).expect("same space");
    let (n2_max, n2_min) = ((n_inner * n_inner).max(n_outer * n_outer), (n_inner * n_inner).min(n_outer * n_outer));
    let bound = n2_max / n2_min * 1.01 + 0.1;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut ratios = Vec::with_capacity(samples);
    for _ in 0..samples {
        let f: Vec<Complex64> =
            (0..dec.n_dof()).map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
        let c = dec.coefficients(&f)?;
        let spectral: f64 = c.iter().zip(&dec.eigenvalues).map(|(c, l2)| c.norm_sqr() * (1.0 + l2)).sum();
        let direct = h1.form(&f, &f).expect("length checked").re;
        ratios.push(spectral / direct);
    }
    let pass = ratios.iter().all(|&r| r >= 1.0 / bound && r <= bound);
    Ok(NormEquivalenceReport { ratios, bound, pass })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::femcore::build_space;
    use crate::mesh::generate_disk_mesh;
    use std::sync::Arc;

    fn small(n1: f64, n2: f64) -> (FeSpace, SpectralDecomposition) {
        let space = build_space(Arc::new(generate_disk_mesh(1, 2).unwrap()), 2).unwrap();
        let n = space.n_dof();
        let dec = compute_neumann_eigenpairs(&space, n1, n2, n).unwrap();
        (space, dec)
    }

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn kernel_is_constant() {
        let (_, dec) = small(1.0, 2.0);
        assert!(dec.eigenvalues[0] <= 1e-9);
        let phi = &dec.eigenvectors[0];
        let spread = phi.iter().fold(0.0f64, |a, &b| a.max((b - phi[0]).abs()));
        assert!(spread < 1e-8 * phi[0].abs());
    }

    #[test]
    fn single_mode_split() {
        let (_, dec) = small(1.0, 1.0);
        let f: Vec<Complex64> = dec.eigenvectors[3].iter().map(|&v| c(v)).collect();
        let k = 2.0 * dec.eigenvalues[3].sqrt();
        let (lo, hi) = filter_split(&dec, &f, 1.5, k).unwrap();
        for (a, b) in lo.iter().zip(&f) {
            assert!((a - b).norm() < 1e-12);
        }
        assert!(dec.m_norm(&hi).unwrap() < 1e-12);
    }

    #[test]
    fn nk_single_mode() {
        let (_, dec) = small(1.0, 1.0);
        let i = dec.count - 1;
        let k = (dec.eigenvalues[i] / 2.0).sqrt();
        let f: Vec<Complex64> = dec.eigenvectors[i].iter().map(|&v| c(v)).collect();
        let v = apply_nk(&dec, &f, k, 1.2).unwrap();
        let ratio = dec.m_norm(&v).unwrap() / dec.m_norm(&f).unwrap();
        assert!((ratio - 1.0 / (k * k)).abs() < 1e-10 / (k * k));
        let zero = vec![c(0.0); dec.n_dof()];
        assert!(apply_nk(&dec, &zero, k, 1.2).unwrap().iter().all(|z| z.norm() == 0.0));
    }

    #[test]
    fn nk_rejects_low_band() {
        let (_, dec) = small(1.0, 1.0);
        let f: Vec<Complex64> = dec.eigenvectors[1].iter().map(|&v| c(v)).collect();
        let k = dec.eigenvalues[1].sqrt();
        assert!(matches!(apply_nk(&dec, &f, k, 1.5), Err(FilterError::BandViolation(_))));
    }

    #[test]
    fn truncation_and_budget_errors() {
        let space = build_space(Arc::new(generate_disk_mesh(1, 2).unwrap()), 2).unwrap();
        let dec = compute_neumann_eigenpairs(&space, 1.0, 1.0, 5).unwrap();
        let f = vec![c(1.0); space.n_dof()];
        assert!(matches!(filter_split(&dec, &f, 1.5, 10.0), Err(FilterError::TruncationInsufficient { .. })));
        assert!(matches!(filter_split(&dec, &f, 1.0, 1.0), Err(FilterError::InvalidEta(_))));
        assert!(compute_neumann_eigenpairs(&space, 1.0, 1.0, space.n_dof() + 1).is_err());
        let big = build_space(Arc::new(generate_disk_mesh(3, 3).unwrap()), 3).unwrap();
        assert!(matches!(
            compute_neumann_eigenpairs(&big, 1.0, 1.0, 1),
            Err(FilterError::BudgetExceeded { .. })
        ));
    }

    #[test]
    fn norm_equivalence_homogeneous_and_constant() {
        let (space, dec) = small(1.0, 1.0);
        let rep = verify_norm_equivalence(&dec, &space, 1.0, 1.0, 10, 7).unwrap();
        assert!(rep.pass);
        assert!(rep.ratios.iter().all(|r| (r - 1.0).abs() < 1e-8));
        let (space, dec) = small(1.0, 2.0);
        let f = vec![c(1.0); space.n_dof()];
        let m1 = assemble_mass(&space, c(1.0), c(1.0));
        let r = dec.mass.form(&f, &f).unwrap().re / m1.form(&f, &f).unwrap().re;
        assert!((1.0..=4.0).contains(&r));
        let rep = verify_norm_equivalence(&dec, &space, 1.0, 2.0, 10, 7).unwrap();
        assert!(rep.pass);
        assert!(rep.ratios.iter().all(|&r| (0.2..=5.0).contains(&r)));
    }

    #[test]
    fn spectrum_csv_header() {
        let (_, dec) = small(1.0, 1.0);
        let mut buf = Vec::new();
        dec.write_spectrum_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("index,lambda_sq\n0,"));
        assert_eq!(text.lines().count(), dec.count + 1);
    }
}
