//! Assembly of `(grad u, grad v) - k^2 (n^2 u, v)` plus boundary terms, and
//! of the load `(f, v) + <g, v>`.
//!
//! Shape functions are real, so matrix entries are `b(phi_j, phi_i)` and
//! load entries `int f phi_i`. Element contributions are appended in element
//! order, which fixes the summation order of the sparse builder.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use thiserror::Error;

use crate::boundary::{assemble_dtn_block, BoundaryCondition};
use crate::linsolve::{ComplexSparseMatrix, TripletBuilder};
use crate::mesh::Region;

use super::quadrature::{gauss_legendre_unit, quadrature_triangle};
use super::reference::{edge_point, edge_tangent};
use super::space::FeSpace;
use super::{assembly_order, FemError};

/// Smallest admissible wavenumber.
pub const MIN_WAVENUMBER: f64 = 0.5;

pub type VolumeData = Arc<dyn Fn([f64; 2], Region) -> Complex64 + Send + Sync>;
pub type BoundaryData = Arc<dyn Fn(f64) -> Complex64 + Send + Sync>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ProblemError {
    #[error("wavenumber {0} below the minimum {MIN_WAVENUMBER}")]
    Wavenumber(f64),
    #[error("refraction index modulus {0} outside (0, 100)")]
    Refraction(f64),
}

/// Heterogeneous Helmholtz problem on the unit disk with piecewise constant
/// refraction index across `r = 1/2`.
#[derive(Clone)]
pub struct HelmholtzProblem {
    pub k: f64,
    pub n_inner: Complex64,
    pub n_outer: Complex64,
    pub bc: BoundaryCondition,
    pub rhs_volume: VolumeData,
    pub rhs_boundary: BoundaryData,
}

impl fmt::Debug for HelmholtzProblem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("HelmholtzProblem")
            .field("k", &self.k)
            .field("n_inner", &self.n_inner)
            .field("n_outer", &self.n_outer)
            .field("bc", &self.bc)
            .finish_non_exhaustive()
    }
}

impl HelmholtzProblem {
    pub fn new(
        k: f64,
        n_inner: Complex64,
        n_outer: Complex64,
        bc: BoundaryCondition,
        rhs_volume: VolumeData,
        rhs_boundary: BoundaryData,
    ) -> Result<Self, ProblemError> {
        if !(k >= MIN_WAVENUMBER) || !k.is_finite() {
            return Err(ProblemError::Wavenumber(k));
        }
        for n in [n_inner, n_outer] {
            let m = n.norm();
            if !(m > 0.0 && m < 100.0) {
                return Err(ProblemError::Refraction(m));
            }
        }
        Ok(Self { k, n_inner, n_outer, bc, rhs_volume, rhs_boundary })
    }

    pub fn n_squared(&self, region: Region) -> Complex64 {
        let n = match region {
            Region::Inner => self.n_inner,
            Region::Annulus => self.n_outer,
        };
        n * n
    }
}

/// Quadrature point on the outer circle with the traces of the local basis.
#[derive(Debug, Clone)]
pub struct BoundaryPoint {
    pub element: usize,
    pub x: [f64; 2],
    pub theta: f64,
    /// quadrature weight times the arc-length element
    pub weight: f64,
    pub values: Vec<f64>,
    /// `(-y, x) . grad phi_i`
    pub tangential: Vec<f64>,
}

/// Quadrature on every boundary face, exact for polynomial degree
/// `2 (p + 2) - 1` in the edge parameter.
pub fn boundary_points(space: &FeSpace) -> Vec<BoundaryPoint> {
    let p = space.degree();
    let (ts, ws) = gauss_legendre_unit(p + 2);
    let mesh = space.mesh();
    let el = space.element();
    let mut out = Vec::with_capacity(space.boundary_faces().len() * ts.len());
    for &(e, le) in space.boundary_faces() {
        let tan = edge_tangent(le);
        for (&t, &w) in ts.iter().zip(&ws) {
            let r = edge_point(le, t);
            let mp = mesh.map_point(e, r);
            let dx = [
                mp.jac[0][0] * tan[0] + mp.jac[0][1] * tan[1],
                mp.jac[1][0] * tan[0] + mp.jac[1][1] * tan[1],
            ];
            let ds = (dx[0] * dx[0] + dx[1] * dx[1]).sqrt();
            let (values, grads) = el.eval_with_grad(r);
            let tangential = grads
                .iter()
                .map(|&g| {
                    let gp = mp.push_gradient(g);
                    -mp.x[1] * gp[0] + mp.x[0] * gp[1]
                })
                .collect();
            out.push(BoundaryPoint {
                element: e,
                x: mp.x,
                theta: mp.x[1].atan2(mp.x[0]),
                weight: w * ds,
                values,
                tangential,
            });
        }
    }
    out
}

/// Per-element reference data at the assembly quadrature points.
struct ElementKernel {
    weights: Vec<f64>,
    values: Vec<Vec<f64>>,
    grads: Vec<Vec<[f64; 2]>>,
    geo: super::reference::Tabulation,
}

impl ElementKernel {
    fn new(space: &FeSpace) -> Self {
        let rule = quadrature_triangle(assembly_order(space.degree())).expect("order within range");
        let tab = space.element().tabulate(&rule.points);
        let geo = space.mesh().geometry_element().tabulate(&rule.points);
        Self { weights: rule.weights, values: tab.values, grads: tab.grads, geo }
    }
}

/// Element stiffness and mass, row-major.
fn element_matrices(space: &FeSpace, kernel: &ElementKernel, e: usize) -> (Vec<f64>, Vec<f64>) {
    let n = space.element().n_basis();
    let mut kmat = vec![0.0; n * n];
    let mut mmat = vec![0.0; n * n];
    let mut pg = vec![[0.0; 2]; n];
    for (q, &w) in kernel.weights.iter().enumerate() {
        let mp = space.mesh().map_tabulated(e, &kernel.geo, q);
        let dw = w * mp.det;
        for (slot, &g) in pg.iter_mut().zip(&kernel.grads[q]) {
            *slot = mp.push_gradient(g);
        }
        let vals = &kernel.values[q];
        for i in 0..n {
            for j in i..n {
                let kij = dw * (pg[i][0] * pg[j][0] + pg[i][1] * pg[j][1]);
                let mij = dw * vals[i] * vals[j];
                kmat[i * n + j] += kij;
                mmat[i * n + j] += mij;
            }
        }
    }
    for i in 0..n {
        for j in 0..i {
            kmat[i * n + j] = kmat[j * n + i];
            mmat[i * n + j] = mmat[j * n + i];
        }
    }
    (kmat, mmat)
}

fn volume_into(
    space: &FeSpace,
    builder: &mut TripletBuilder,
    coeff: impl Fn(Region) -> (Complex64, Complex64),
) {
    let kernel = ElementKernel::new(space);
    let n = space.element().n_basis();
    for e in 0..space.mesh().n_tri() {
        let (kmat, mmat) = element_matrices(space, &kernel, e);
        let (a, b) = coeff(space.mesh().region(e));
        let dofs = space.dofs(e);
        for i in 0..n {
            for j in 0..n {
                builder.add(dofs[i], dofs[j], a * kmat[i * n + j] + b * mmat[i * n + j]);
            }
        }
    }
}

fn boundary_into(space: &FeSpace, builder: &mut TripletBuilder, surf: Complex64, mass: Complex64) {
    let n = space.element().n_basis();
    for bp in boundary_points(space) {
        let dofs = space.dofs(bp.element);
        for i in 0..n {
            for j in 0..n {
                let v = surf * (bp.weight * bp.tangential[i] * bp.tangential[j])
                    + mass * (bp.weight * bp.values[i] * bp.values[j]);
                if v != Complex64::new(0.0, 0.0) {
                    builder.add(dofs[i], dofs[j], v);
                }
            }
        }
    }
}

/// Volume part `K - k^2 n^2 M` alone.
pub fn assemble_volume(space: &FeSpace, problem: &HelmholtzProblem) -> ComplexSparseMatrix {
    let mut b = TripletBuilder::new(space.n_dof());
    let k2 = problem.k * problem.k;
    volume_into(space, &mut b, |r| (Complex64::new(1.0, 0.0), -k2 * problem.n_squared(r)));
    b.build()
}

/// Neumann stiffness matrix `(grad u, grad v)`.
pub fn assemble_stiffness(space: &FeSpace) -> ComplexSparseMatrix {
    let mut b = TripletBuilder::new(space.n_dof());
    volume_into(space, &mut b, |_| (Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)));
    b.build()
}

/// Weighted mass matrix `(w u, v)` with `w` constant per region.
pub fn assemble_mass(space: &FeSpace, w_inner: Complex64, w_outer: Complex64) -> ComplexSparseMatrix {
    let mut b = TripletBuilder::new(space.n_dof());
    volume_into(space, &mut b, |r| {
        (
            Complex64::new(0.0, 0.0),
            match r {
                Region::Inner => w_inner,
                Region::Annulus => w_outer,
            },
        )
    });
    b.build()
}

/// Boundary mass `<u, v>` on the outer circle.
pub fn boundary_mass(space: &FeSpace) -> ComplexSparseMatrix {
    let mut b = TripletBuilder::new(space.n_dof());
    boundary_into(space, &mut b, Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0));
    b.build()
}

/// Surface stiffness `<d_s u, d_s v>` on the outer circle.
pub fn assemble_surface_stiffness(space: &FeSpace) -> ComplexSparseMatrix {
    let mut b = TripletBuilder::new(space.n_dof());
    boundary_into(space, &mut b, Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0));
    b.build()
}

/// Load vector `(f, v) + <g, v>`.
pub fn assemble_load(space: &FeSpace, problem: &HelmholtzProblem) -> Result<Vec<Complex64>, FemError> {
    let kernel = ElementKernel::new(space);
    let n = space.element().n_basis();
    let mut rhs = vec![Complex64::new(0.0, 0.0); space.n_dof()];
    for e in 0..space.mesh().n_tri() {
        let region = space.mesh().region(e);
        let dofs = space.dofs(e);
        for (q, &w) in kernel.weights.iter().enumerate() {
            let mp = space.mesh().map_tabulated(e, &kernel.geo, q);
            let f = (problem.rhs_volume)(mp.x, region);
            if !(f.re.is_finite() && f.im.is_finite()) {
                return Err(FemError::NonFinite("volume source"));
            }
            let fw = f * (w * mp.det);
            for i in 0..n {
                rhs[dofs[i]] += fw * kernel.values[q][i];
            }
        }
    }
    for bp in boundary_points(space) {
        let g = (problem.rhs_boundary)(bp.theta);
        if !(g.re.is_finite() && g.im.is_finite()) {
            return Err(FemError::NonFinite("boundary data"));
        }
        let dofs = space.dofs(bp.element);
        for i in 0..n {
            rhs[dofs[i]] += g * (bp.weight * bp.values[i]);
        }
    }
    Ok(rhs)
}

/// System matrix and load vector for `problem` on `space`.
pub fn assemble(
    space: &FeSpace,
    problem: &HelmholtzProblem,
) -> Result<(ComplexSparseMatrix, Vec<Complex64>), FemError> {
    let k2 = problem.k * problem.k;
    for v in [problem.n_inner, problem.n_outer] {
        if !(v.re.is_finite() && v.im.is_finite()) {
            return Err(FemError::NonFinite("refraction index"));
        }
    }
    let mut b = TripletBuilder::with_capacity(space.n_dof(), space.mesh().n_tri() * space.element().n_basis().pow(2));
    volume_into(space, &mut b, |r| (Complex64::new(1.0, 0.0), -k2 * problem.n_squared(r)));
    match problem.bc {
        BoundaryCondition::Robin { gamma } => {
            check_finite(gamma, "Robin coefficient")?;
            boundary_into(space, &mut b, Complex64::new(0.0, 0.0), -gamma);
        }
        BoundaryCondition::SecondOrderAbc { alpha, beta } => {
            check_finite(alpha, "ABC alpha")?;
            check_finite(beta, "ABC beta")?;
            boundary_into(space, &mut b, alpha, -beta);
        }
        BoundaryCondition::TruncatedDtN { cutoff } => {
            let block = assemble_dtn_block(space, problem.k, cutoff as i64)?;
            for (a, row) in block.matrix.iter().enumerate() {
                for (c, &v) in row.iter().enumerate() {
                    b.add(block.dofs[a], block.dofs[c], -v);
                }
            }
        }
    }
    let rhs = assemble_load(space, problem)?;
    Ok((b.build(), rhs))
}

fn check_finite(z: Complex64, what: &'static str) -> Result<(), FemError> {
    if z.re.is_finite() && z.im.is_finite() {
        Ok(())
    } else {
        Err(FemError::NonFinite(what))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::femcore::space::build_space;
    use crate::mesh::generate_disk_mesh;

    fn zero_volume() -> VolumeData {
        Arc::new(|_, _| Complex64::new(0.0, 0.0))
    }

    fn zero_boundary() -> BoundaryData {
        Arc::new(|_| Complex64::new(0.0, 0.0))
    }

    #[test]
    fn problem_validation() {
        let one = Complex64::new(1.0, 0.0);
        let bc = BoundaryCondition::Robin { gamma: Complex64::new(0.0, 1.0) };
        assert!(HelmholtzProblem::new(0.4, one, one, bc, zero_volume(), zero_boundary()).is_err());
        assert!(HelmholtzProblem::new(1.0, one * 0.0, one, bc, zero_volume(), zero_boundary()).is_err());
        assert!(HelmholtzProblem::new(1.0, one, one * 100.0, bc, zero_volume(), zero_boundary()).is_err());
        assert!(HelmholtzProblem::new(1.0, one, one * 2.0, bc, zero_volume(), zero_boundary()).is_ok());
    }

    #[test]
    fn stiffness_annihilates_constants() {
        let space = build_space(Arc::new(generate_disk_mesh(1, 3).unwrap()), 3).unwrap();
        let k = assemble_stiffness(&space);
        let ones = vec![Complex64::new(1.0, 0.0); space.n_dof()];
        let r = k.matvec(&ones).unwrap();
        assert!(r.iter().all(|v| v.norm() < 1e-12));
    }

    #[test]
    fn volume_part_is_symmetric() {
        let space = build_space(Arc::new(generate_disk_mesh(1, 2).unwrap()), 2).unwrap();
        let prob = HelmholtzProblem::new(
            3.0,
            Complex64::new(1.0, 0.0),
            Complex64::new(2.0, 0.0),
            BoundaryCondition::Robin { gamma: Complex64::new(0.0, 3.0) },
            zero_volume(),
            zero_boundary(),
        )
        .unwrap();
        let a = assemble_volume(&space, &prob);
        let at = a.transpose();
        let d = a.add_scaled(Complex64::new(-1.0, 0.0), &at).unwrap();
        assert!(d.max_abs() <= 1e-12);
    }

    #[test]
    fn mass_integrates_area_and_perimeter() {
        let space = build_space(Arc::new(generate_disk_mesh(2, 3).unwrap()), 3).unwrap();
        let ones = vec![Complex64::new(1.0, 0.0); space.n_dof()];
        let m = assemble_mass(&space, Complex64::new(1.0, 0.0), Complex64::new(1.0, 0.0));
        let area = m.form(&ones, &ones).unwrap().re;
        assert!((area - std::f64::consts::PI).abs() < 1e-6);
        let b = boundary_mass(&space);
        let per = b.form(&ones, &ones).unwrap().re;
        assert!((per - 2.0 * std::f64::consts::PI).abs() < 1e-6);
    }

    #[test]
    fn surface_stiffness_of_angle_functions() {
        // u = x has d_s u = -y on the circle, so <d_s u, d_s u> = pi
        let space = build_space(Arc::new(generate_disk_mesh(2, 3).unwrap()), 3).unwrap();
        let u: Vec<Complex64> = space.dof_points().iter().map(|p| Complex64::new(p[0], 0.0)).collect();
        let s = assemble_surface_stiffness(&space);
        let v = s.form(&u, &u).unwrap().re;
        assert!((v - std::f64::consts::PI).abs() < 1e-6, "{v}");
    }
}
