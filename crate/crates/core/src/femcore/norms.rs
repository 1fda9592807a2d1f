//! Discrete-vs-exact error norms, nodal interpolation and the `H^1_k`
//! projection used as a best-approximation reference.

use num_complex::Complex64;

use crate::exact::ExactSolution;
use crate::linsolve::solve_sparse;
use crate::mesh::Region;

use super::assembly::{assemble_mass, assemble_stiffness, assemble_surface_stiffness, boundary_points};
use super::quadrature::quadrature_triangle;
use super::space::FeSpace;
use super::{norm_order, FemError};

/// A function on the disk that can be evaluated per region.
pub trait Field {
    fn value(&self, x: [f64; 2], region: Region) -> Complex64;
    fn grad(&self, x: [f64; 2], region: Region) -> [Complex64; 2];
}

impl Field for ExactSolution {
    fn value(&self, x: [f64; 2], region: Region) -> Complex64 {
        self.u(x, Some(region))
    }

    fn grad(&self, x: [f64; 2], region: Region) -> [Complex64; 2] {
        ExactSolution::grad(self, x, Some(region))
    }
}

/// Absolute and relative errors. The energy norm is
/// `|e|_1^2 + k^2 ||e||_0^2`, plus `k^{-1} ||d_s e||_G^2` when `t = 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorNorms {
    pub l2_abs: f64,
    pub energy_abs: f64,
    pub l2_exact: f64,
    pub energy_exact: f64,
    pub l2_rel: f64,
    pub energy_rel: f64,
}

fn finite(z: Complex64) -> bool {
    z.re.is_finite() && z.im.is_finite()
}

/// Error of `uh` against `exact`, by quadrature of order `min(2p + 6, 25)`.
pub fn error_norms(
    space: &FeSpace,
    uh: &[Complex64],
    exact: &dyn Field,
    k: f64,
    t: f64,
) -> Result<ErrorNorms, FemError> {
    if uh.len() != space.n_dof() {
        return Err(FemError::LengthMismatch { expected: space.n_dof(), found: uh.len() });
    }
    let rule = quadrature_triangle(norm_order(space.degree()))?;
    let tab = space.element().tabulate(&rule.points);
    let geo = space.mesh().geometry_element().tabulate(&rule.points);
    let n = space.element().n_basis();
    let (mut e0, mut e1, mut u0, mut u1) = (0.0, 0.0, 0.0, 0.0);
    for e in 0..space.mesh().n_tri() {
        let region = space.mesh().region(e);
        let dofs = space.dofs(e);
        for (q, &w) in rule.weights.iter().enumerate() {
            let mp = space.mesh().map_tabulated(e, &geo, q);
            let dw = w * mp.det;
            let mut vh = Complex64::new(0.0, 0.0);
            let mut gh = [Complex64::new(0.0, 0.0); 2];
            for i in 0..n {
                let c = uh[dofs[i]];
                vh += c * tab.values[q][i];
                let g = mp.push_gradient(tab.grads[q][i]);
                gh[0] += c * g[0];
                gh[1] += c * g[1];
            }
            let u = exact.value(mp.x, region);
            let gu = exact.grad(mp.x, region);
            if !(finite(u) && finite(gu[0]) && finite(gu[1])) {
                return Err(FemError::NonFinite("exact solution"));
            }
            e0 += dw * (u - vh).norm_sqr();
            e1 += dw * ((gu[0] - gh[0]).norm_sqr() + (gu[1] - gh[1]).norm_sqr());
            u0 += dw * u.norm_sqr();
            u1 += dw * (gu[0].norm_sqr() + gu[1].norm_sqr());
        }
    }
    let (mut s_err, mut s_ex) = (0.0, 0.0);
    if t >= 1.0 {
        for bp in boundary_points(space) {
            let dofs = space.dofs(bp.element);
            let dh: Complex64 = (0..n).map(|i| uh[dofs[i]] * bp.tangential[i]).sum();
            let g = exact.grad(bp.x, Region::Annulus);
            let du = -bp.x[1] * g[0] + bp.x[0] * g[1];
            s_err += bp.weight * (du - dh).norm_sqr();
            s_ex += bp.weight * du.norm_sqr();
        }
    }
    let k2 = k * k;
    let energy_abs = (e1 + k2 * e0 + s_err / k).sqrt();
    let energy_exact = (u1 + k2 * u0 + s_ex / k).sqrt();
    let (l2_abs, l2_exact) = (e0.sqrt(), u0.sqrt());
    if l2_exact == 0.0 || energy_exact == 0.0 {
        return Err(FemError::ZeroExactNorm);
    }
    Ok(ErrorNorms {
        l2_abs,
        energy_abs,
        l2_exact,
        energy_exact,
        l2_rel: l2_abs / l2_exact,
        energy_rel: energy_abs / energy_exact,
    })
}

/// Nodal interpolant of `field`.
pub fn interpolate(space: &FeSpace, field: &dyn Field) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(0.0, 0.0); space.n_dof()];
    let mesh = space.mesh();
    for e in 0..mesh.n_tri() {
        let region = mesh.region(e);
        for (i, &r) in space.element().nodes().iter().enumerate() {
            out[space.dofs(e)[i]] = field.value(mesh.map_point(e, r).x, region);
        }
    }
    out
}

/// Orthogonal projection of `field` onto the space in the energy inner
/// product; the best approximation in the energy norm.
pub fn energy_projection(space: &FeSpace, field: &dyn Field, k: f64, t: f64) -> Result<Vec<Complex64>, FemError> {
    let one = Complex64::new(1.0, 0.0);
    let mut gram = assemble_stiffness(space)
        .add_scaled(one, &assemble_mass(space, one * (k * k), one * (k * k)))
        .map_err(|e| FemError::Solve(e.to_string()))?;
    if t >= 1.0 {
        gram = gram
            .add_scaled(one / k, &assemble_surface_stiffness(space))
            .map_err(|e| FemError::Solve(e.to_string()))?;
    }
    let rule = quadrature_triangle(norm_order(space.degree()))?;
    let tab = space.element().tabulate(&rule.points);
    let geo = space.mesh().geometry_element().tabulate(&rule.points);
    let n = space.element().n_basis();
    let mut rhs = vec![Complex64::new(0.0, 0.0); space.n_dof()];
    for e in 0..space.mesh().n_tri() {
        let region = space.mesh().region(e);
        let dofs = space.dofs(e);
        for (q, &w) in rule.weights.iter().enumerate() {
            let mp = space.mesh().map_tabulated(e, &geo, q);
            let dw = w * mp.det;
            let u = field.value(mp.x, region);
            let gu = field.grad(mp.x, region);
            for i in 0..n {
                let g = mp.push_gradient(tab.grads[q][i]);
                rhs[dofs[i]] += dw * (gu[0] * g[0] + gu[1] * g[1] + k * k * u * tab.values[q][i]);
            }
        }
    }
    if t >= 1.0 {
        for bp in boundary_points(space) {
            let dofs = space.dofs(bp.element);
            let g = field.grad(bp.x, Region::Annulus);
            let du = -bp.x[1] * g[0] + bp.x[0] * g[1];
            for i in 0..n {
                rhs[dofs[i]] += du * (bp.weight * bp.tangential[i] / k);
            }
        }
    }
    solve_sparse(&gram, &rhs).map_err(|e| FemError::Solve(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::femcore::space::build_space;
    use crate::mesh::generate_disk_mesh;
    use std::sync::Arc;

    struct Poly(usize);

    impl Field for Poly {
        fn value(&self, x: [f64; 2], _: Region) -> Complex64 {
            Complex64::new(x[0].powi(self.0 as i32) + x[1], 0.5)
        }
        fn grad(&self, x: [f64; 2], _: Region) -> [Complex64; 2] {
            let d = self.0 as f64 * x[0].powi(self.0 as i32 - 1);
            [Complex64::new(d, 0.0), Complex64::new(1.0, 0.0)]
        }
    }

    #[test]
    fn polynomials_reproduced_exactly() {
        // cubic map: only affine fields stay in P3
        let curved = build_space(Arc::new(generate_disk_mesh(1, 3).unwrap()), 3).unwrap();
        let straight = build_space(Arc::new(generate_disk_mesh(1, 1).unwrap()), 3).unwrap();
        for (space, f) in [(&curved, Poly(1)), (&straight, Poly(3))] {
            let uh = interpolate(space, &f);
            let en = error_norms(space, &uh, &f, 2.0, 1.0).unwrap();
            assert!(en.l2_rel < 1e-12, "{en:?}");
            assert!(en.energy_rel < 1e-12, "{en:?}");
            let proj = energy_projection(space, &f, 2.0, 1.0).unwrap();
            for (a, b) in proj.iter().zip(&uh) {
                assert!((a - b).norm() < 1e-9);
            }
        }
    }

    #[test]
    fn projection_beats_interpolant() {
        let space = build_space(Arc::new(generate_disk_mesh(1, 2).unwrap()), 2).unwrap();
        let f = Poly(5);
        let ui = interpolate(&space, &f);
        let up = energy_projection(&space, &f, 3.0, 0.5).unwrap();
        let ei = error_norms(&space, &ui, &f, 3.0, 0.5).unwrap();
        let ep = error_norms(&space, &up, &f, 3.0, 0.5).unwrap();
        assert!(ep.energy_abs <= ei.energy_abs * (1.0 + 1e-10));
    }

    #[test]
    fn length_checked() {
        let space = build_space(Arc::new(generate_disk_mesh(0, 1).unwrap()), 1).unwrap();
        let r = error_norms(&space, &[], &Poly(1), 1.0, 0.5);
        assert!(matches!(r, Err(FemError::LengthMismatch { .. })));
    }
}
