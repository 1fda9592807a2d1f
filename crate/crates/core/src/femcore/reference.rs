//! Lagrange elements on the reference triangle `(0,0), (1,0), (0,1)`.
//!
//! Nodes are the Blyth-Pozrikidis warp of the Gauss-Lobatto points, so edge
//! nodes coincide with the 1D Lobatto points. The Lagrange basis is expanded
//! in the orthonormal Dubiner basis and obtained from the inverse
//! generalised Vandermonde matrix.
//!
//! Node ordering for degree `p` with barycentric multi-index `(a0, a1, a2)`:
//! the three vertices, then for each local edge `i` (running from vertex `i`
//! to vertex `i+1`) its `p-1` interior nodes ordered from the start vertex,
//! then the interior nodes with `a2` slowest.

use crate::linsolve::DenseLu;

use super::quadrature::gauss_lobatto_unit;

/// Barycentric multi-indices for degree `p`, in the local node order.
pub fn node_multi_indices(p: usize) -> Vec<[usize; 3]> {
    let mut out = vec![[p, 0, 0], [0, p, 0], [0, 0, p]];
    for t in 1..p {
        out.push([p - t, t, 0]);
    }
    for t in 1..p {
        out.push([0, p - t, t]);
    }
    for t in 1..p {
        out.push([t, 0, p - t]);
    }
    for a2 in 1..p {
        for a1 in 1..p.saturating_sub(a2) {
            out.push([p - a1 - a2, a1, a2]);
        }
    }
    out
}

/// Number of Lagrange nodes of degree `p`.
pub fn n_local(p: usize) -> usize {
    (p + 1) * (p + 2) / 2
}

/// Reference coordinates of the degree-`p` nodes.
pub fn nodal_points(p: usize) -> Vec<[f64; 2]> {
    if p == 0 {
        return vec![[1.0 / 3.0, 1.0 / 3.0]];
    }
    let v = gauss_lobatto_unit(p);
    node_multi_indices(p)
        .into_iter()
        .map(|[a0, a1, a2]| {
            let l1 = (1.0 + 2.0 * v[a1] - v[a0] - v[a2]) / 3.0;
            let l2 = (1.0 + 2.0 * v[a2] - v[a0] - v[a1]) / 3.0;
            [l1, l2]
        })
        .collect()
}

/// Reference point on local edge `e` at parameter `t` from its start vertex.
pub fn edge_point(e: usize, t: f64) -> [f64; 2] {
    match e {
        0 => [t, 0.0],
        1 => [1.0 - t, t],
        2 => [0.0, 1.0 - t],
        _ => panic!("local edge {e} out of range"),
    }
}

/// `d/dt` of [`edge_point`].
pub fn edge_tangent(e: usize) -> [f64; 2] {
    match e {
        0 => [1.0, 0.0],
        1 => [-1.0, 1.0],
        2 => [0.0, -1.0],
        _ => panic!("local edge {e} out of range"),
    }
}

/// Local node indices lying on edge `e`, from its start to its end vertex.
pub fn edge_nodes(p: usize, e: usize) -> Vec<usize> {
    let mut out = Vec::with_capacity(p + 1);
    out.push(e);
    for t in 1..p {
        out.push(3 + e * (p - 1) + (t - 1));
    }
    out.push((e + 1) % 3);
    out
}

/// Orthonormal Jacobi polynomial `P_n^{(a,b)}` on `[-1, 1]`.
fn jacobi(x: f64, a: f64, b: f64, n: usize) -> f64 {
    let gamma0 = 2f64.powf(a + b + 1.0) / (a + b + 1.0) * gamma(a + 1.0) * gamma(b + 1.0)
        / gamma(a + b + 1.0);
    let p0 = 1.0 / gamma0.sqrt();
    if n == 0 {
        return p0;
    }
    let gamma1 = (a + 1.0) * (b + 1.0) / (a + b + 3.0) * gamma0;
    let p1 = ((a + b + 2.0) * x / 2.0 + (a - b) / 2.0) / gamma1.sqrt();
    if n == 1 {
        return p1;
    }
    let mut aold = 2.0 / (2.0 + a + b) * ((a + 1.0) * (b + 1.0) / (a + b + 3.0)).sqrt();
    let mut pm = p0;
    let mut pc = p1;
    for i in 1..n {
        let i = i as f64;
        let h1 = 2.0 * i + a + b;
        let anew = 2.0 / (h1 + 2.0)
            * ((i + 1.0) * (i + 1.0 + a + b) * (i + 1.0 + a) * (i + 1.0 + b) / (h1 + 1.0) / (h1 + 3.0))
                .sqrt();
        let bnew = -(a * a - b * b) / h1 / (h1 + 2.0);
        let pn = (-aold * pm + (x - bnew) * pc) / anew;
        aold = anew;
        pm = pc;
        pc = pn;
    }
    pc
}

fn jacobi_grad(x: f64, a: f64, b: f64, n: usize) -> f64 {
    if n == 0 {
        0.0
    } else {
        let nf = n as f64;
        (nf * (nf + a + b + 1.0)).sqrt() * jacobi(x, a + 1.0, b + 1.0, n - 1)
    }
}

/// Gamma function at the positive integers and half integers used here.
fn gamma(x: f64) -> f64 {
    let r = x.round();
    if (x - r).abs() < 1e-12 && r >= 1.0 {
        (1..r as u64).map(|i| i as f64).product()
    } else {
        // x = m + 1/2
        let m = (x - 0.5).round() as u64;
        let mut g = std::f64::consts::PI.sqrt();
        for i in 0..m {
            g *= i as f64 + 0.5;
        }
        g
    }
}

/// Dubiner mode `(i, j)` and its reference gradient at `(xi, eta)`.
fn dubiner(xi: f64, eta: f64, i: usize, j: usize) -> (f64, [f64; 2]) {
    let r = 2.0 * xi - 1.0;
    let s = 2.0 * eta - 1.0;
    let a = if (1.0 - s).abs() > 1e-14 { 2.0 * (1.0 + r) / (1.0 - s) - 1.0 } else { -1.0 };
    let b = s;
    let ai = 2.0 * i as f64 + 1.0;
    let fa = jacobi(a, 0.0, 0.0, i);
    let dfa = jacobi_grad(a, 0.0, 0.0, i);
    let gb = jacobi(b, ai, 0.0, j);
    let dgb = jacobi_grad(b, ai, 0.0, j);
    let half_1mb = 0.5 * (1.0 - b);
    let value = std::f64::consts::SQRT_2 * fa * gb * (1.0 - b).powi(i as i32);

    let mut dr = dfa * gb;
    if i > 0 {
        dr *= half_1mb.powi(i as i32 - 1);
    }
    let mut ds = dfa * (gb * (0.5 * (1.0 + a)));
    if i > 0 {
        ds *= half_1mb.powi(i as i32 - 1);
    }
    let mut tmp = dgb * half_1mb.powi(i as i32);
    if i > 0 {
        tmp -= 0.5 * i as f64 * gb * half_1mb.powi(i as i32 - 1);
    }
    ds += fa * tmp;
    let scale = 2f64.powf(i as f64 + 0.5);
    // chain rule d/dxi = 2 d/dr
    (value, [2.0 * scale * dr, 2.0 * scale * ds])
}

fn dubiner_indices(p: usize) -> Vec<(usize, usize)> {
    let mut out = Vec::with_capacity(n_local(p));
    for i in 0..=p {
        for j in 0..=(p - i) {
            out.push((i, j));
        }
    }
    out
}

/// Shape-function values and reference gradients at a set of points.
#[derive(Debug, Clone)]
pub struct Tabulation {
    /// `values[q][i]`
    pub values: Vec<Vec<f64>>,
    /// `grads[q][i] = [d/dxi, d/deta]`
    pub grads: Vec<Vec<[f64; 2]>>,
}

/// Degree-`p` Lagrange element.
#[derive(Debug, Clone)]
pub struct ReferenceElement {
    p: usize,
    nodes: Vec<[f64; 2]>,
    modes: Vec<(usize, usize)>,
    /// `vinv[k][i]`: coefficient of Dubiner mode `k` in Lagrange function `i`.
    vinv: Vec<Vec<f64>>,
}

impl ReferenceElement {
    pub fn new(p: usize) -> Self {
        assert!(p >= 1, "degree must be at least 1");
        let nodes = nodal_points(p);
        let modes = dubiner_indices(p);
        let n = nodes.len();
        let v: Vec<Vec<f64>> = nodes
            .iter()
            .map(|&[x, y]| modes.iter().map(|&(i, j)| dubiner(x, y, i, j).0).collect())
            .collect();
        let lu = DenseLu::factorize(&v).expect("nodal Vandermonde matrix is invertible");
        let mut vinv = vec![vec![0.0; n]; n];
        for c in 0..n {
            let mut e = vec![0.0; n];
            e[c] = 1.0;
            let col = lu.solve(&e).expect("square solve");
            for (k, val) in col.into_iter().enumerate() {
                vinv[k][c] = val;
            }
        }
        Self { p, nodes, modes, vinv }
    }

    pub fn degree(&self) -> usize {
        self.p
    }

    pub fn n_basis(&self) -> usize {
        self.nodes.len()
    }

    pub fn nodes(&self) -> &[[f64; 2]] {
        &self.nodes
    }

    /// Values of all Lagrange functions at `pt`.
    pub fn eval(&self, pt: [f64; 2]) -> Vec<f64> {
        self.eval_with_grad(pt).0
    }

    pub fn eval_with_grad(&self, pt: [f64; 2]) -> (Vec<f64>, Vec<[f64; 2]>) {
        let n = self.n_basis();
        let mut vals = vec![0.0; n];
        let mut grads = vec![[0.0; 2]; n];
        for (k, &(i, j)) in self.modes.iter().enumerate() {
            let (psi, dpsi) = dubiner(pt[0], pt[1], i, j);
            let row = &self.vinv[k];
            for c in 0..n {
                vals[c] += row[c] * psi;
                grads[c][0] += row[c] * dpsi[0];
                grads[c][1] += row[c] * dpsi[1];
            }
        }
        (vals, grads)
    }

    pub fn tabulate(&self, points: &[[f64; 2]]) -> Tabulation {
        let (values, grads) = points.iter().map(|&pt| self.eval_with_grad(pt)).unzip();
        Tabulation { values, grads }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts() {
        for p in 1..=8 {
            assert_eq!(node_multi_indices(p).len(), n_local(p));
            assert_eq!(nodal_points(p).len(), n_local(p));
        }
        assert_eq!(n_local(1), 3);
        assert_eq!(n_local(4), 15);
    }

    #[test]
    fn nodes_lie_where_expected() {
        for p in 1..=8 {
            let pts = nodal_points(p);
            for e in 0..3 {
                let ids = edge_nodes(p, e);
                let v = gauss_lobatto_unit(p);
                for (t, &id) in ids.iter().enumerate() {
                    let expected = edge_point(e, v[t]);
                    assert!((pts[id][0] - expected[0]).abs() < 1e-14);
                    assert!((pts[id][1] - expected[1]).abs() < 1e-14);
                }
            }
            for pt in &pts[3 * p..] {
                assert!(pt[0] > 0.0 && pt[1] > 0.0 && pt[0] + pt[1] < 1.0);
            }
        }
    }

    #[test]
    fn kronecker_property() {
        for p in 1..=8 {
            let el = ReferenceElement::new(p);
            for (a, &pt) in el.nodes().iter().enumerate() {
                let vals = el.eval(pt);
                for (b, v) in vals.iter().enumerate() {
                    let expected = if a == b { 1.0 } else { 0.0 };
                    assert!((v - expected).abs() < 1e-11, "p={p} node {a} fn {b}: {v}");
                }
            }
        }
    }

    #[test]
    fn reproduces_polynomials_and_gradients() {
        let f = |x: f64, y: f64| x.powi(3) - 2.0 * x * y * y + 0.5 * y;
        let g = |x: f64, y: f64| [3.0 * x * x - 2.0 * y * y, -4.0 * x * y + 0.5];
        for p in 3..=8 {
            let el = ReferenceElement::new(p);
            let coeffs: Vec<f64> = el.nodes().iter().map(|&[x, y]| f(x, y)).collect();
            for pt in [[0.1, 0.2], [0.7, 0.05], [0.3, 0.3], [0.0, 1.0]] {
                let (vals, grads) = el.eval_with_grad(pt);
                let u: f64 = vals.iter().zip(&coeffs).map(|(a, b)| a * b).sum();
                let gx: f64 = grads.iter().zip(&coeffs).map(|(a, b)| a[0] * b).sum();
                let gy: f64 = grads.iter().zip(&coeffs).map(|(a, b)| a[1] * b).sum();
                let ge = g(pt[0], pt[1]);
                assert!((u - f(pt[0], pt[1])).abs() < 1e-11);
                assert!((gx - ge[0]).abs() < 1e-9, "p={p} {pt:?} {gx} {}", ge[0]);
                assert!((gy - ge[1]).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn partition_of_unity() {
        let el = ReferenceElement::new(5);
        let (vals, grads) = el.eval_with_grad([0.21, 0.33]);
        assert!((vals.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!(grads.iter().map(|g| g[0]).sum::<f64>().abs() < 1e-10);
        assert!(grads.iter().map(|g| g[1]).sum::<f64>().abs() < 1e-10);
    }
}
