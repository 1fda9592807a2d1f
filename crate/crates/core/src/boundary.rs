//! Boundary operators: Robin, second-order absorbing conditions and
//! truncated Dirichlet-to-Neumann maps, together with the DtN symbols for
//! Helmholtz in two and three dimensions and for 2D elasticity.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use thiserror::Error;

use crate::femcore::assembly::boundary_points;
use crate::femcore::space::FeSpace;
use crate::specfun::{hankel1_log_deriv, sph_hankel1_log_deriv, SpecFunError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BoundaryError {
    #[error("unknown ABC family '{0}' (expected feng, engquist_majda or bgt)")]
    UnknownFamily(String),
    #[error("invalid Lame parameters lambda={lambda}, mu={mu}")]
    InvalidLame { lambda: f64, mu: f64 },
    #[error("negative DtN cutoff {0}")]
    NegativeCutoff(i64),
    #[error("wavenumber must be positive, got {0}")]
    Wavenumber(f64),
    #[error("dimension must be 2 or 3, got {0}")]
    Dimension(u32),
    #[error("mode range must lie in [ceil(2k), 10k]")]
    ModeRange,
    #[error(transparent)]
    SpecFun(#[from] SpecFunError),
}

pub type Result<T> = std::result::Result<T, BoundaryError>;

/// Boundary condition on the unit circle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BoundaryCondition {
    /// `d_n u - gamma u = g`
    Robin { gamma: Complex64 },
    /// `d_n u - beta u - alpha Lap_G u = g`
    SecondOrderAbc { alpha: Complex64, beta: Complex64 },
    /// `d_n u - DtN_k^L u = g` keeping modes `|m| <= cutoff`
    TruncatedDtN { cutoff: usize },
}

impl BoundaryCondition {
    /// First-order absorbing condition `gamma = i k`.
    pub fn robin(k: f64) -> Self {
        Self::Robin { gamma: Complex64::new(0.0, k) }
    }

    /// Second-order condition from a named family.
    pub fn abc2(family: AbcFamily, k: f64) -> Result<Self> {
        let (alpha, beta) = abc2_params(family, k)?;
        Ok(Self::SecondOrderAbc { alpha, beta })
    }

    pub fn truncated_dtn(cutoff: usize) -> Self {
        Self::TruncatedDtN { cutoff }
    }

    /// Cutoff `ceil(2k) + 10`.
    pub fn default_dtn(k: f64) -> Self {
        Self::TruncatedDtN { cutoff: default_dtn_cutoff(k) }
    }
}

pub fn default_dtn_cutoff(k: f64) -> usize {
    (2.0 * k).ceil() as usize + 10
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AbcFamily {
    Feng,
    EngquistMajda,
    Bgt,
}

impl AbcFamily {
    pub const ALL: [AbcFamily; 3] = [AbcFamily::Feng, AbcFamily::EngquistMajda, AbcFamily::Bgt];

    pub fn as_str(self) -> &'static str {
        match self {
            AbcFamily::Feng => "feng",
            AbcFamily::EngquistMajda => "engquist_majda",
            AbcFamily::Bgt => "bgt",
        }
    }
}

impl fmt::Display for AbcFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for AbcFamily {
    type Err = BoundaryError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "feng" => Ok(Self::Feng),
            "engquist_majda" => Ok(Self::EngquistMajda),
            "bgt" => Ok(Self::Bgt),
            other => Err(BoundaryError::UnknownFamily(other.to_string())),
        }
    }
}

/// `(alpha, beta)` of a second-order absorbing condition.
pub fn abc2_params(family: AbcFamily, k: f64) -> Result<(Complex64, Complex64)> {
    if !(k > 0.0) || !k.is_finite() {
        return Err(BoundaryError::Wavenumber(k));
    }
    let i = Complex64::i();
    let one = Complex64::new(1.0, 0.0);
    Ok(match family {
        AbcFamily::Feng => (-i / (2.0 * k), i * k - 0.5 - i / (8.0 * k)),
        AbcFamily::EngquistMajda => ((one + i * k) / (2.0 * k * k), i * k - 0.5),
        AbcFamily::Bgt => (
            -(one + i * k) / (2.0 * (1.0 + k * k)),
            (-2.0 * k * k - 1.5 * i * k + 0.75) / (2.0 * (i * k - 1.0)),
        ),
    })
}

/// `Im alpha != 0`, `|Im alpha| k in [0.2, 5]`, `|Re alpha| k^2 <= 5`,
/// `|beta| / k in [0.2, 5]`.
pub fn abc_window_holds(alpha: Complex64, beta: Complex64, k: f64) -> bool {
    let im = alpha.im.abs() * k;
    alpha.im != 0.0
        && (0.2..=5.0).contains(&im)
        && alpha.re.abs() * k * k <= 5.0
        && (0.2..=5.0).contains(&(beta.norm() / k))
}

/// Sphere DtN symbol `z_l(k) = k h_l'(k) / h_l(k)`.
pub fn dtn_symbol_3d(l: u32, k: f64) -> Result<Complex64> {
    Ok(sph_hankel1_log_deriv(l, k)?)
}

/// Circle DtN symbol `z_m(k) = k H_|m|'(k) / H_|m|(k)`.
pub fn dtn_symbol_2d(m: i64, k: f64) -> Result<Complex64> {
    Ok(hankel1_log_deriv(m.unsigned_abs() as u32, k)?)
}

/// Symbol of the Laplace DtN map: `-(l+1)` on the sphere, `-|m|` on the
/// circle with mode 0 set to 0.
pub fn dtn0_symbol(mode: i64, dim: u32) -> Result<f64> {
    match dim {
        3 => {
            assert!(mode >= 0, "sphere modes are non-negative");
            Ok(-(mode as f64 + 1.0))
        }
        2 => Ok(-(mode.unsigned_abs() as f64)),
        d => Err(BoundaryError::Dimension(d)),
    }
}

/// One row of a symbol-bound report. Slacks are non-negative exactly when
/// the corresponding bound holds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SymbolBoundRow {
    pub mode: i64,
    pub k: f64,
    pub z: Complex64,
    /// `min(-Re z - (l+1-k), (l+1+k) + Re z)`
    pub slack_re: f64,
    /// `min(Im z, k - Im z)`
    pub slack_im: f64,
    /// `2k - |z + l + 1|`
    pub slack_2k: f64,
}

fn bound_row(mode: i64, shift: f64, k: f64, z: Complex64) -> SymbolBoundRow {
    let re = -z.re;
    SymbolBoundRow {
        mode,
        k,
        z,
        slack_re: (re - (shift - k)).min(shift + k - re),
        slack_im: z.im.min(k - z.im),
        slack_2k: 2.0 * k - (z + shift).norm(),
    }
}

/// Sphere bounds for `l = 0..=l_max` at each `k`.
pub fn sphere_symbol_report(l_max: u32, ks: &[f64]) -> Result<Vec<SymbolBoundRow>> {
    let mut rows = Vec::with_capacity(ks.len() * (l_max as usize + 1));
    for &k in ks {
        for l in 0..=l_max {
            let z = dtn_symbol_3d(l, k)?;
            rows.push(bound_row(l as i64, l as f64 + 1.0, k, z));
        }
    }
    Ok(rows)
}

/// Circle analogue with `|m|` in place of `l + 1`; mode 0 is omitted.
pub fn circle_symbol_report(m_max: u32, ks: &[f64]) -> Result<Vec<SymbolBoundRow>> {
    let mut rows = Vec::with_capacity(ks.len() * m_max as usize);
    for &k in ks {
        for m in 1..=m_max as i64 {
            let z = dtn_symbol_2d(m, k)?;
            rows.push(bound_row(m, m as f64, k, z));
        }
    }
    Ok(rows)
}

/// Truncated DtN contribution on the boundary dofs.
///
/// `matrix[a][b] = sum_m z_m 2 pi conj(c_m[a]) c_m[b]`, where
/// `c_m[a] = (1 / 2 pi) int phi_a e^{-i m theta} ds`; the system matrix
/// receives `-matrix`.
#[derive(Debug, Clone)]
pub struct DtnBlock {
    pub dofs: Vec<usize>,
    pub modes: Vec<i64>,
    pub symbols: Vec<Complex64>,
    /// `coefficients[i][a]` for mode `modes[i]`
    pub coefficients: Vec<Vec<Complex64>>,
    pub matrix: Vec<Vec<Complex64>>,
}

impl DtnBlock {
    /// `2 pi conj(c_m) c_m^T` for mode index `i`.
    pub fn projector(&self, i: usize) -> Vec<Vec<Complex64>> {
        let c = &self.coefficients[i];
        c.iter().map(|a| c.iter().map(|b| 2.0 * PI * a.conj() * b).collect()).collect()
    }
}

pub fn assemble_dtn_block(space: &FeSpace, k: f64, cutoff: i64) -> Result<DtnBlock> {
    if cutoff < 0 {
        return Err(BoundaryError::NegativeCutoff(cutoff));
    }
    if !(k > 0.0) {
        return Err(BoundaryError::Wavenumber(k));
    }
    let dofs = space.boundary_dofs().to_vec();
    let nb = dofs.len();
    let modes: Vec<i64> = (-cutoff..=cutoff).collect();
    let points = boundary_points(space);
    let mut coefficients = vec![vec![Complex64::new(0.0, 0.0); nb]; modes.len()];
    for bp in &points {
        let el_dofs = space.dofs(bp.element);
        for (i, &m) in modes.iter().enumerate() {
            let phase = Complex64::from_polar(bp.weight / (2.0 * PI), -(m as f64) * bp.theta);
            for (a, &v) in bp.values.iter().enumerate() {
                if v != 0.0 {
                    if let Ok(pos) = dofs.binary_search(&el_dofs[a]) {
                        coefficients[i][pos] += phase * v;
                    }
                }
            }
        }
    }
    let symbols = modes.iter().map(|&m| dtn_symbol_2d(m, k)).collect::<Result<Vec<_>>>()?;
    let mut matrix = vec![vec![Complex64::new(0.0, 0.0); nb]; nb];
    for (c, &z) in coefficients.iter().zip(&symbols) {
        for a in 0..nb {
            let left = z * 2.0 * PI * c[a].conj();
            if left == Complex64::new(0.0, 0.0) {
                continue;
            }
            for b in 0..nb {
                matrix[a][b] += left * c[b];
            }
        }
    }
    Ok(DtnBlock { dofs, modes, symbols, coefficients, matrix })
}

/// Elastic DtN symbols for mode `n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ElasticSymbolSet {
    pub n: i64,
    pub alpha1: Complex64,
    pub alpha2: Complex64,
    pub lambda_n: Complex64,
    pub sigma: f64,
    pub kappa1: f64,
    pub kappa2: f64,
}

impl ElasticSymbolSet {
    /// `n k^2 / Lambda_n - sigma_n`, with `n` taken as `|n|`.
    pub fn high_mode_defect(&self, k: f64) -> Complex64 {
        self.n.unsigned_abs() as f64 * k * k / self.lambda_n - self.sigma
    }
}

/// `2 mu (lambda + 2 mu) / (lambda + 3 mu) (|n| - 1)`, zero for `n = 0`.
pub fn elastic_sigma(n: i64, lambda: f64, mu: f64) -> f64 {
    if n == 0 {
        0.0
    } else {
        2.0 * mu * (lambda + 2.0 * mu) / (lambda + 3.0 * mu) * (n.unsigned_abs() as f64 - 1.0)
    }
}

pub fn elastic_symbols(n: i64, k: f64, lambda: f64, mu: f64) -> Result<ElasticSymbolSet> {
    if !(mu > 0.0) || !(lambda >= 0.0) {
        return Err(BoundaryError::InvalidLame { lambda, mu });
    }
    if !(k > 0.0) {
        return Err(BoundaryError::Wavenumber(k));
    }
    let kappa1 = k / (lambda + 2.0 * mu).sqrt();
    let kappa2 = k / mu.sqrt();
    let order = n.unsigned_abs() as u32;
    let alpha1 = hankel1_log_deriv(order, kappa1)?;
    let alpha2 = hankel1_log_deriv(order, kappa2)?;
    let nf = n as f64;
    Ok(ElasticSymbolSet {
        n,
        alpha1,
        alpha2,
        lambda_n: nf * nf - alpha1 * alpha2,
        sigma: elastic_sigma(n, lambda, mu),
        kappa1,
        kappa2,
    })
}

/// `M_n` with diagonal `mu + sigma_n` and off-diagonal
/// `-/+ i (n mu - sgn(n) sigma_n)`.
pub fn elastic_dtn0_matrix(n: i64, lambda: f64, mu: f64) -> Result<[[Complex64; 2]; 2]> {
    if !(mu > 0.0) || !(lambda + 5.0 / 3.0 * mu >= 0.0) {
        return Err(BoundaryError::InvalidLame { lambda, mu });
    }
    let sigma = elastic_sigma(n, lambda, mu);
    let d = Complex64::new(mu + sigma, 0.0);
    let off = n as f64 * mu - n.signum() as f64 * sigma;
    Ok([[d, Complex64::new(0.0, -off)], [Complex64::new(0.0, off), d]])
}

/// Eigenvalues of a Hermitian 2x2 matrix, ascending.
pub fn hermitian2_eigenvalues(m: &[[Complex64; 2]; 2]) -> [f64; 2] {
    let a = m[0][0].re;
    let d = m[1][1].re;
    let b = m[0][1].norm();
    let mid = 0.5 * (a + d);
    let rad = (0.25 * (a - d) * (a - d) + b * b).sqrt();
    [mid - rad, mid + rad]
}

/// Constant bounding `|n k^2 / Lambda_n - sigma_n| / k` for
/// `n in [ceil(2k), 10k]`. A sweep over `k in [1, 20]` in steps of 0.05,
/// `lambda in {0, 1, 10}`, `mu in {1, 3}` peaks at 0.929 (`k = 1`,
/// `lambda = 10`, `mu = 3`); at `k in {2, 8}` the peak is 0.52.
pub const ELASTIC_BOUND_C: f64 = 1.0;

#[derive(Debug, Clone, PartialEq)]
pub struct ElasticBoundReport {
    pub k: f64,
    pub lambda: f64,
    pub mu: f64,
    pub modes: Vec<i64>,
    /// `|n k^2 / Lambda_n - sigma_n| / k` per mode
    pub ratios: Vec<f64>,
    pub max_ratio: f64,
    pub lambda_nonzero: bool,
    pub pass: bool,
}

pub fn check_elastic_symbol_bound(
    k: f64,
    lambda: f64,
    mu: f64,
    n_range: std::ops::RangeInclusive<i64>,
) -> Result<ElasticBoundReport> {
    let lo = (2.0 * k).ceil() as i64;
    let hi = (10.0 * k).floor() as i64;
    if *n_range.start() < lo || *n_range.end() > hi || n_range.is_empty() {
        return Err(BoundaryError::ModeRange);
    }
    let mut ratios = Vec::new();
    let mut lambda_nonzero = true;
    let modes: Vec<i64> = n_range.collect();
    for &n in &modes {
        let s = elastic_symbols(n, k, lambda, mu)?;
        lambda_nonzero &= s.lambda_n.norm() > 0.0;
        ratios.push(s.high_mode_defect(k).norm() / k);
    }
    let max_ratio = ratios.iter().copied().fold(0.0, f64::max);
    Ok(ElasticBoundReport {
        k,
        lambda,
        mu,
        modes,
        ratios,
        max_ratio,
        lambda_nonzero,
        pass: max_ratio <= ELASTIC_BOUND_C,
    })
}
