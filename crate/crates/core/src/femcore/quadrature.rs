//! Gauss rules on the interval and collapsed (Duffy) Gauss rules on the
//! reference triangle `(0,0), (1,0), (0,1)`.

use std::f64::consts::PI;

use super::FemError;

/// Highest polynomial order accepted by [`quadrature_triangle`].
pub const MAX_TRIANGLE_ORDER: usize = 25;

/// Points and weights on the reference triangle.
///
/// Weights are positive and sum to `1/2`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    pub order: usize,
    pub points: Vec<[f64; 2]>,
    pub weights: Vec<f64>,
}

impl QuadratureRule {
    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// Barycentric coordinates `(1 - xi - eta, xi, eta)` of point `q`.
    pub fn barycentric(&self, q: usize) -> [f64; 3] {
        let [x, y] = self.points[q];
        [1.0 - x - y, x, y]
    }
}

/// Gauss-Legendre nodes and weights on `[0, 1]`, exact to degree `2m - 1`.
pub fn gauss_legendre_unit(m: usize) -> (Vec<f64>, Vec<f64>) {
    let (x, w) = gauss_legendre(m);
    (
        x.iter().map(|t| 0.5 * (t + 1.0)).collect(),
        w.iter().map(|v| 0.5 * v).collect(),
    )
}

/// Gauss-Legendre nodes (ascending) and weights on `[-1, 1]`.
pub fn gauss_legendre(m: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(m >= 1);
    let mut nodes = vec![0.0; m];
    let mut weights = vec![0.0; m];
    for i in 0..m {
        let mut x = -(PI * (i as f64 + 0.75) / (m as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(m, x);
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, dp) = legendre_with_derivative(m, x);
        nodes[i] = x;
        weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
    (nodes, weights)
}

/// `(P_m(x), P_m'(x))`.
fn legendre_with_derivative(m: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if m == 0 {
        return (1.0, 0.0);
    }
    for n in 2..=m {
        let p2 = ((2 * n - 1) as f64 * x * p1 - (n - 1) as f64 * p0) / n as f64;
        p0 = p1;
        p1 = p2;
    }
    let d = m as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Gauss-Lobatto-Legendre nodes on `[0, 1]`, ascending, `p + 1` of them.
pub fn gauss_lobatto_unit(p: usize) -> Vec<f64> {
    assert!(p >= 1);
    let n = p + 1;
    let mut out = vec![0.0; n];
    for (i, slot) in out.iter_mut().enumerate() {
        // Chebyshev-Gauss-Lobatto start, Newton on (1 - x^2) P_p'(x)
        let mut x = -(PI * i as f64 / p as f64).cos();
        if i > 0 && i < p {
            for _ in 0..100 {
                let mut pm = 1.0;
                let mut pc = x;
                for k in 2..=p {
                    let pn = ((2 * k - 1) as f64 * x * pc - (k - 1) as f64 * pm) / k as f64;
                    pm = pc;
                    pc = pn;
                }
                let dx = (x * pc - pm) / (n as f64 * pc);
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
        }
        *slot = 0.5 * (x + 1.0);
    }
    // exact symmetry about 1/2
    for i in 0..n / 2 {
        let a = 0.5 * (out[i] + 1.0 - out[p - i]);
        out[i] = a;
        out[p - i] = 1.0 - a;
    }
    if n % 2 == 1 {
        out[p / 2] = 0.5;
    }
    out
}

/// Collapsed Gauss rule exact for polynomials of total degree `order`.
pub fn quadrature_triangle(order: usize) -> Result<QuadratureRule, FemError> {
    if order == 0 || order > MAX_TRIANGLE_ORDER {
        return Err(FemError::UnsupportedQuadratureOrder(order));
    }
    // the Duffy factor (1 - v) raises the v-degree by one
    let m = (order + 2).div_ceil(2);
    let (x, w) = gauss_legendre_unit(m);
    let mut points = Vec::with_capacity(m * m);
    let mut weights = Vec::with_capacity(m * m);
    for (i, &u) in x.iter().enumerate() {
        for (j, &v) in x.iter().enumerate() {
            points.push([u * (1.0 - v), v]);
            weights.push(w[i] * w[j] * (1.0 - v));
        }
    }
    Ok(QuadratureRule { order, points, weights })
}
