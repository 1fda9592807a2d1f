//! Reference solutions on the unit disk: the radial Bessel solution for a
//! unit source with an impedance condition at `r = 1`, and the plane-wave
//! manufactured solution `sin(k(x + y))` for second-order ABCs.

use std::sync::Arc;

use num_complex::Complex64;
use thiserror::Error;

use crate::boundary::{dtn_symbol_2d, BoundaryCondition, BoundaryError};
use crate::femcore::assembly::{HelmholtzProblem, ProblemError};
use crate::linsolve::DenseLu;
use crate::mesh::{Region, INTERFACE_RADIUS};
use crate::specfun::{bessel_j, bessel_y, SpecFunError};

/// Scaled 3x3 determinants below this are treated as resonant.
pub const RESONANCE_THRESHOLD: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ExactError {
    #[error("coefficient system is near resonance (scaled determinant {0:e})")]
    NearResonance(f64),
    #[error("point ({0}, {1}) is not on the unit circle")]
    OffCircle(f64, f64),
    #[error("invalid parameter: {0}")]
    InvalidParameter(&'static str),
    #[error(transparent)]
    SpecFun(#[from] SpecFunError),
    #[error(transparent)]
    Boundary(#[from] BoundaryError),
    #[error(transparent)]
    Problem(#[from] ProblemError),
}

pub type Result<T> = std::result::Result<T, ExactError>;

/// Boundary condition the reference solution satisfies.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ExactBc {
    Robin,
    Dtn { cutoff: usize },
    Abc2 { alpha: Complex64, beta: Complex64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Kind {
    /// `c1 J0(k n1 r) - 1/(k n1)^2` inside, `c2 J0(k n2 r) + c3 Y0(k n2 r) - 1/(k n2)^2` outside
    Radial { c: [Complex64; 3], gamma: Complex64 },
    PlaneSine,
}

/// Closed-form solution with its data `f`, `g`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExactSolution {
    pub k: f64,
    pub n1: f64,
    pub n2: f64,
    pub r_if: f64,
    /// trace-norm index, `0.5` or `1.0`
    pub t: f64,
    pub bc: ExactBc,
    kind: Kind,
}

/// Radial solution with `u'(1) = gamma u(1)`.
fn radial(k: f64, n1: f64, n2: f64, r_if: f64, gamma: Complex64) -> Result<[Complex64; 3]> {
    if !(k > 0.0 && n1 > 0.0 && n2 > 0.0) {
        return Err(ExactError::InvalidParameter("k, n1 and n2 must be positive"));
    }
    if !(r_if > 0.0 && r_if < 1.0) {
        return Err(ExactError::InvalidParameter("interface radius must lie in (0, 1)"));
    }
    let c = |v: f64| Complex64::new(v, 0.0);
    let (a1, a2, b) = (k * n1 * r_if, k * n2 * r_if, k * n2);
    let (j0a1, j1a1) = (bessel_j(0, a1)?, bessel_j(1, a1)?);
    let (j0a2, j1a2) = (bessel_j(0, a2)?, bessel_j(1, a2)?);
    let (y0a2, y1a2) = (bessel_y(0, a2)?, bessel_y(1, a2)?);
    let (j0b, j1b, y0b, y1b) = (bessel_j(0, b)?, bessel_j(1, b)?, bessel_y(0, b)?, bessel_y(1, b)?);
    let s1 = 1.0 / (k * n1).powi(2);
    let s2 = 1.0 / (k * n2).powi(2);
    let mut rows = vec![
        vec![c(j0a1), c(-j0a2), c(-y0a2)],
        vec![c(-k * n1 * j1a1), c(k * n2 * j1a2), c(k * n2 * y1a2)],
        vec![c(0.0), -k * n2 * j1b - gamma * j0b, -k * n2 * y1b - gamma * y0b],
    ];
    let mut rhs = vec![c(s1 - s2), c(0.0), -gamma * s2];
    for (row, r) in rows.iter_mut().zip(rhs.iter_mut()) {
        let scale = row.iter().map(|v| v.norm()).fold(0.0, f64::max);
        for v in row.iter_mut() {
            *v /= scale;
        }
        *r /= scale;
    }
    let lu = DenseLu::factorize(&rows).map_err(|_| ExactError::NearResonance(0.0))?;
    let det = lu.determinant().norm();
    if det < RESONANCE_THRESHOLD {
        return Err(ExactError::NearResonance(det));
    }
    let sol = lu.solve(&rhs).expect("dimensions match");
    Ok([sol[0], sol[1], sol[2]])
}

/// Unit source, Robin condition `u' - i k u = 0` at `r = 1`.
pub fn disk_robin_exact(k: f64, n1: f64, n2: f64, r_if: f64) -> Result<ExactSolution> {
    let gamma = Complex64::new(0.0, k);
    let c = radial(k, n1, n2, r_if, gamma)?;
    Ok(ExactSolution { k, n1, n2, r_if, t: 0.5, bc: ExactBc::Robin, kind: Kind::Radial { c, gamma } })
}

/// Unit source with the exact radiation condition for the radial mode,
/// `u'(1) = z_0(k) u(1)`; any DtN truncation keeps mode 0.
pub fn disk_dtn_exact(k: f64, n1: f64, n2: f64, r_if: f64, cutoff: usize) -> Result<ExactSolution> {
    let gamma = dtn_symbol_2d(0, k)?;
    let c = radial(k, n1, n2, r_if, gamma)?;
    Ok(ExactSolution { k, n1, n2, r_if, t: 0.5, bc: ExactBc::Dtn { cutoff }, kind: Kind::Radial { c, gamma } })
}

/// `u = sin(k (x + y))` with data for `d_n u - beta u - alpha Lap_G u = g`.
pub fn abc2_manufactured(k: f64, n1: f64, n2: f64, alpha: Complex64, beta: Complex64) -> Result<ExactSolution> {
    if !(k > 0.0 && n1 > 0.0 && n2 > 0.0) {
        return Err(ExactError::InvalidParameter("k, n1 and n2 must be positive"));
    }
    Ok(ExactSolution {
        k,
        n1,
        n2,
        r_if: INTERFACE_RADIUS,
        t: 1.0,
        bc: ExactBc::Abc2 { alpha, beta },
        kind: Kind::PlaneSine,
    })
}

/// `(-y, x) . grad` at a point of the unit circle.
pub fn surface_derivative(grad: [Complex64; 2], point: [f64; 2]) -> Result<Complex64> {
    let r = (point[0] * point[0] + point[1] * point[1]).sqrt();
    if (r - 1.0).abs() > 1e-10 {
        return Err(ExactError::OffCircle(point[0], point[1]));
    }
    Ok(-point[1] * grad[0] + point[0] * grad[1])
}

impl ExactSolution {
    fn inside(&self, x: [f64; 2], hint: Option<Region>) -> bool {
        match hint {
            Some(r) => r == Region::Inner,
            None => (x[0] * x[0] + x[1] * x[1]).sqrt() <= self.r_if,
        }
    }

    /// Radial coefficients `c1, c2, c3`, if this is a radial solution.
    pub fn coefficients(&self) -> Option<[Complex64; 3]> {
        match self.kind {
            Kind::Radial { c, .. } => Some(c),
            Kind::PlaneSine => None,
        }
    }

    /// Refraction index in the region containing `x`.
    pub fn n_at(&self, x: [f64; 2], hint: Option<Region>) -> f64 {
        if self.inside(x, hint) {
            self.n1
        } else {
            self.n2
        }
    }

    /// Radial profile `u(r)` and `u'(r)` on the chosen side of the interface.
    fn profile(&self, r: f64, inside: bool, c: &[Complex64; 3]) -> (Complex64, Complex64) {
        let k = self.k;
        if inside {
            let a = k * self.n1;
            let (j0, j1) = (bessel_j(0, a * r).unwrap_or(f64::NAN), bessel_j(1, a * r).unwrap_or(f64::NAN));
            (c[0] * j0 - 1.0 / (a * a), -c[0] * a * j1)
        } else {
            let a = k * self.n2;
            let (j0, j1) = (bessel_j(0, a * r).unwrap_or(f64::NAN), bessel_j(1, a * r).unwrap_or(f64::NAN));
            let (y0, y1) = (bessel_y(0, a * r).unwrap_or(f64::NAN), bessel_y(1, a * r).unwrap_or(f64::NAN));
            (c[1] * j0 + c[2] * y0 - 1.0 / (a * a), -(c[1] * j1 + c[2] * y1) * a)
        }
    }

    pub fn u(&self, x: [f64; 2], hint: Option<Region>) -> Complex64 {
        match self.kind {
            Kind::Radial { c, .. } => {
                let r = (x[0] * x[0] + x[1] * x[1]).sqrt();
                self.profile(r, self.inside(x, hint), &c).0
            }
            Kind::PlaneSine => Complex64::new((self.k * (x[0] + x[1])).sin(), 0.0),
        }
    }

    pub fn grad(&self, x: [f64; 2], hint: Option<Region>) -> [Complex64; 2] {
        match self.kind {
            Kind::Radial { c, .. } => {
                let r = (x[0] * x[0] + x[1] * x[1]).sqrt();
                if r == 0.0 {
                    return [Complex64::new(0.0, 0.0); 2];
                }
                let du = self.profile(r, self.inside(x, hint), &c).1;
                [du * (x[0] / r), du * (x[1] / r)]
            }
            Kind::PlaneSine => {
                let g = Complex64::new(self.k * (self.k * (x[0] + x[1])).cos(), 0.0);
                [g, g]
            }
        }
    }

    /// Volume source for `-Lap u - k^2 n^2 u = f`.
    pub fn f(&self, x: [f64; 2], hint: Option<Region>) -> Complex64 {
        match self.kind {
            Kind::Radial { .. } => Complex64::new(1.0, 0.0),
            Kind::PlaneSine => {
                let n = self.n_at(x, hint);
                self.k * self.k * (2.0 - n * n) * self.u(x, hint)
            }
        }
    }

    /// Tangential derivative `(-y, x) . grad u` at any point.
    pub fn tangential(&self, x: [f64; 2], hint: Option<Region>) -> Complex64 {
        let g = self.grad(x, hint);
        -x[1] * g[0] + x[0] * g[1]
    }

    /// `(-y, x) . grad` applied twice, at a point of the unit circle.
    pub fn surface_laplacian(&self, theta: f64) -> Complex64 {
        let (x, y) = (theta.cos(), theta.sin());
        match self.kind {
            Kind::Radial { .. } => Complex64::new(0.0, 0.0),
            Kind::PlaneSine => {
                let k = self.k;
                let s = k * (x + y);
                Complex64::new(-k * k * s.sin() * (x - y).powi(2) - k * s.cos() * (x + y), 0.0)
            }
        }
    }

    /// Boundary data `g(theta)`.
    pub fn g(&self, theta: f64) -> Complex64 {
        match (self.kind, self.bc) {
            (Kind::Radial { .. }, _) => Complex64::new(0.0, 0.0),
            (Kind::PlaneSine, ExactBc::Abc2 { alpha, beta }) => {
                let x = [theta.cos(), theta.sin()];
                let g = self.grad(x, Some(Region::Annulus));
                let dn = g[0] * x[0] + g[1] * x[1];
                dn - alpha * self.surface_laplacian(theta) - beta * self.u(x, Some(Region::Annulus))
            }
            (Kind::PlaneSine, _) => Complex64::new(0.0, 0.0),
        }
    }

    /// Boundary condition the discrete problem should use.
    pub fn boundary_condition(&self) -> BoundaryCondition {
        match self.bc {
            ExactBc::Robin => BoundaryCondition::robin(self.k),
            ExactBc::Dtn { cutoff } => BoundaryCondition::truncated_dtn(cutoff),
            ExactBc::Abc2 { alpha, beta } => BoundaryCondition::SecondOrderAbc { alpha, beta },
        }
    }

    /// Discrete problem whose solution is `self`.
    pub fn problem(&self) -> Result<HelmholtzProblem> {
        let me = *self;
        let vol: Arc<dyn Fn([f64; 2], Region) -> Complex64 + Send + Sync> =
            Arc::new(move |x, region| me.f(x, Some(region)));
        let bnd: Arc<dyn Fn(f64) -> Complex64 + Send + Sync> = Arc::new(move |th| me.g(th));
        Ok(HelmholtzProblem::new(
            self.k,
            Complex64::new(self.n1, 0.0),
            Complex64::new(self.n2, 0.0),
            self.boundary_condition(),
            vol,
            bnd,
        )?)
    }
}
