//! Curved triangulations of the unit disk resolving the circle `r = 1/2`.
//!
//! The generator places `J = 2^(level+1)` concentric rings at `r_j = j / J`;
//! ring `j` carries `6 j` equally spaced vertices and the strip between rings
//! `j-1` and `j` is split into `6 (2 j - 1)` triangles. Elements touching the
//! interface or the outer circle with an edge are mapped isoparametrically
//! with degree `q` polynomials whose edge nodes lie on the exact circle.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::fmt::Write as _;
use std::path::Path;

use thiserror::Error;

use crate::femcore::quadrature::quadrature_triangle;
use crate::femcore::reference::{edge_nodes, ReferenceElement, Tabulation};

pub const INTERFACE_RADIUS: f64 = 0.5;
pub const BOUNDARY_RADIUS: f64 = 1.0;
pub const MAX_LEVEL: usize = 8;
pub const MAX_GEOMETRY_DEGREE: usize = 4;

#[derive(Debug, Error)]
pub enum MeshError {
    #[error("level {0} exceeds {MAX_LEVEL}")]
    LevelTooLarge(usize),
    #[error("geometry degree {0} outside 1..=4")]
    GeometryDegree(usize),
    #[error("malformed mesh file, line {line}: {reason}")]
    Parse { line: usize, reason: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Region {
    Inner,
    Annulus,
}

impl Region {
    pub fn as_str(self) -> &'static str {
        match self {
            Region::Inner => "inner",
            Region::Annulus => "annulus",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CurveTag {
    Interface,
    Boundary,
}

impl CurveTag {
    pub fn as_str(self) -> &'static str {
        match self {
            CurveTag::Interface => "interface",
            CurveTag::Boundary => "boundary",
        }
    }

    pub fn radius(self) -> f64 {
        match self {
            CurveTag::Interface => INTERFACE_RADIUS,
            CurveTag::Boundary => BOUNDARY_RADIUS,
        }
    }
}

/// An element edge lying on a circle centred at the origin.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurvedEdge {
    pub local_edge: usize,
    pub radius: f64,
    pub tag: CurveTag,
}

/// Physical point, Jacobian `jac[i][j] = dx_i / dxi_j` and its determinant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MapPoint {
    pub x: [f64; 2],
    pub jac: [[f64; 2]; 2],
    pub det: f64,
}

impl MapPoint {
    /// Physical gradient from a reference gradient, `J^{-T} g`.
    pub fn push_gradient(&self, g: [f64; 2]) -> [f64; 2] {
        let [[a, b], [c, d]] = self.jac;
        let inv = 1.0 / self.det;
        [(d * g[0] - c * g[1]) * inv, (-b * g[0] + a * g[1]) * inv]
    }
}

/// Immutable curved triangulation.
#[derive(Debug, Clone)]
pub struct Mesh {
    vertices: Vec<[f64; 2]>,
    triangles: Vec<[usize; 3]>,
    regions: Vec<Region>,
    curved: Vec<Option<CurvedEdge>>,
    geometry: ReferenceElement,
    geometry_nodes: Vec<Vec<[f64; 2]>>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeshStats {
    pub h_max: f64,
    pub n_tri: usize,
    pub n_vert: usize,
    pub min_jacobian_ratio: f64,
}

fn ring_index(j: usize, i: usize) -> usize {
    // vertices before ring j: 1 + 3 j (j - 1)
    if j == 0 {
        0
    } else {
        1 + 3 * j * (j - 1) + (i % (6 * j))
    }
}

/// Concentric-ring mesh of the unit disk.
pub fn generate_disk_mesh(level: usize, geometry_degree: usize) -> Result<Mesh, MeshError> {
    if level > MAX_LEVEL {
        return Err(MeshError::LevelTooLarge(level));
    }
    check_degree(geometry_degree)?;
    let rings = 1usize << (level + 1);
    let half = rings / 2;
    let mut vertices = vec![[0.0, 0.0]];
    for j in 1..=rings {
        let r = j as f64 / rings as f64;
        let count = 6 * j;
        for i in 0..count {
            let th = 2.0 * PI * i as f64 / count as f64;
            vertices.push([r * th.cos(), r * th.sin()]);
        }
    }
    let ring_tag = |j: usize| {
        if j == half {
            Some(CurveTag::Interface)
        } else if j == rings {
            Some(CurveTag::Boundary)
        } else {
            None
        }
    };
    let mut triangles = Vec::with_capacity(6 * rings * rings);
    let mut regions = Vec::with_capacity(6 * rings * rings);
    let mut curved = Vec::with_capacity(6 * rings * rings);
    for j in 1..=rings {
        let region = if j <= half { Region::Inner } else { Region::Annulus };
        for s in 0..6 {
            for t in 0..j {
                triangles.push([
                    ring_index(j, s * j + t),
                    ring_index(j, s * j + t + 1),
                    ring_index(j - 1, s * (j - 1) + t),
                ]);
                regions.push(region);
                curved.push(ring_tag(j).map(|tag| CurvedEdge { local_edge: 0, radius: tag.radius(), tag }));
            }
            for t in 0..j.saturating_sub(1) {
                triangles.push([
                    ring_index(j - 1, s * (j - 1) + t),
                    ring_index(j, s * j + t + 1),
                    ring_index(j - 1, s * (j - 1) + t + 1),
                ]);
                regions.push(region);
                curved.push(ring_tag(j - 1).map(|tag| CurvedEdge { local_edge: 2, radius: tag.radius(), tag }));
            }
        }
    }
    Ok(Mesh::assemble(vertices, triangles, regions, curved, geometry_degree))
}

/// Red refinement; curved-edge midpoints are projected radially.
pub fn refine(mesh: &Mesh) -> Mesh {
    let mut vertices = mesh.vertices.clone();
    let mut midpoint: HashMap<(usize, usize), usize> = HashMap::new();
    let n = mesh.triangles.len();
    let mut triangles = Vec::with_capacity(4 * n);
    let mut regions = Vec::with_capacity(4 * n);
    let mut curved = Vec::with_capacity(4 * n);
    for (e, tri) in mesh.triangles.iter().enumerate() {
        let ce = mesh.curved[e];
        let mut mids = [0usize; 3];
        for (le, mid) in mids.iter_mut().enumerate() {
            let a = tri[le];
            let b = tri[(le + 1) % 3];
            let key = (a.min(b), a.max(b));
            *mid = *midpoint.entry(key).or_insert_with(|| {
                let pa = vertices[a];
                let pb = vertices[b];
                let mut m = [0.5 * (pa[0] + pb[0]), 0.5 * (pa[1] + pb[1])];
                if let Some(c) = ce.filter(|c| c.local_edge == le) {
                    let r = (m[0] * m[0] + m[1] * m[1]).sqrt();
                    m = [m[0] * c.radius / r, m[1] * c.radius / r];
                }
                vertices.push(m);
                vertices.len() - 1
            });
        }
        let [v0, v1, v2] = *tri;
        let [m01, m12, m20] = mids;
        let children = [[v0, m01, m20], [m01, v1, m12], [m20, m12, v2], [m01, m12, m20]];
        // (child, child local edge) inheriting each parent edge
        let inherit: [[(usize, usize); 2]; 3] = [[(0, 0), (1, 0)], [(1, 1), (2, 1)], [(0, 2), (2, 2)]];
        let mut child_curve = [None; 4];
        if let Some(c) = ce {
            for &(child, le) in &inherit[c.local_edge] {
                child_curve[child] = Some(CurvedEdge { local_edge: le, ..c });
            }
        }
        for c in 0..4 {
            triangles.push(children[c]);
            regions.push(mesh.regions[e]);
            curved.push(child_curve[c]);
        }
    }
    Mesh::assemble(vertices, triangles, regions, curved, mesh.geometry_degree())
}

fn check_degree(q: usize) -> Result<(), MeshError> {
    if (1..=MAX_GEOMETRY_DEGREE).contains(&q) {
        Ok(())
    } else {
        Err(MeshError::GeometryDegree(q))
    }
}

/// Geometry nodes of one element: affine image of the reference nodes plus
/// `lam_a lam_b g(t)` with `g = (arc - chord) / (t (1 - t))` and `t` affine in
/// the barycentrics. The displacement is exact on the curved edge, vanishes
/// on the other two and its `m`-th derivatives scale like `h^m`, which a
/// displacement that divides by `lam_a + lam_b` does not.
fn element_geometry(
    verts: [[f64; 2]; 3],
    curve: Option<CurvedEdge>,
    nodes: &[[f64; 2]],
) -> Vec<[f64; 2]> {
    nodes
        .iter()
        .map(|&[xi, eta]| {
            let lam = [1.0 - xi - eta, xi, eta];
            let mut x = [0.0; 2];
            for (l, v) in lam.iter().zip(&verts) {
                x[0] += l * v[0];
                x[1] += l * v[1];
            }
            if let Some(c) = curve {
                let a = c.local_edge;
                let b = (a + 1) % 3;
                let bubble = lam[a] * lam[b];
                let t = 0.5 * (1.0 + lam[b] - lam[a]);
                let tt = t * (1.0 - t);
                if bubble.abs() > 1e-15 && tt > 1e-15 {
                    let d = arc_minus_chord(verts[a], verts[b], c.radius, t);
                    x[0] += bubble / tt * d[0];
                    x[1] += bubble / tt * d[1];
                }
            }
            x
        })
        .collect()
}

fn arc_minus_chord(pa: [f64; 2], pb: [f64; 2], radius: f64, t: f64) -> [f64; 2] {
    let ta = pa[1].atan2(pa[0]);
    let mut dt = pb[1].atan2(pb[0]) - ta;
    if dt > PI {
        dt -= 2.0 * PI;
    } else if dt < -PI {
        dt += 2.0 * PI;
    }
    let th = ta + t * dt;
    let arc = [radius * th.cos(), radius * th.sin()];
    let chord = [(1.0 - t) * pa[0] + t * pb[0], (1.0 - t) * pa[1] + t * pb[1]];
    [arc[0] - chord[0], arc[1] - chord[1]]
}

impl Mesh {
    fn assemble(
        vertices: Vec<[f64; 2]>,
        triangles: Vec<[usize; 3]>,
        regions: Vec<Region>,
        curved: Vec<Option<CurvedEdge>>,
        q: usize,
    ) -> Self {
        let geometry = ReferenceElement::new(q);
        let geometry_nodes = triangles
            .iter()
            .zip(&curved)
            .map(|(tri, &c)| {
                let verts = [vertices[tri[0]], vertices[tri[1]], vertices[tri[2]]];
                element_geometry(verts, c, geometry.nodes())
            })
            .collect();
        Self { vertices, triangles, regions, curved, geometry, geometry_nodes }
    }

    pub fn vertices(&self) -> &[[f64; 2]] {
        &self.vertices
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn regions(&self) -> &[Region] {
        &self.regions
    }

    pub fn region(&self, e: usize) -> Region {
        self.regions[e]
    }

    pub fn curved_edge(&self, e: usize) -> Option<CurvedEdge> {
        self.curved[e]
    }

    pub fn n_tri(&self) -> usize {
        self.triangles.len()
    }

    pub fn n_vert(&self) -> usize {
        self.vertices.len()
    }

    pub fn geometry_degree(&self) -> usize {
        self.geometry.degree()
    }

    pub fn geometry_element(&self) -> &ReferenceElement {
        &self.geometry
    }

    pub fn geometry_nodes(&self, e: usize) -> &[[f64; 2]] {
        &self.geometry_nodes[e]
    }

    /// Elements with an edge on the outer circle, with that local edge.
    pub fn boundary_faces(&self) -> Vec<(usize, usize)> {
        self.curved
            .iter()
            .enumerate()
            .filter_map(|(e, c)| c.filter(|c| c.tag == CurveTag::Boundary).map(|c| (e, c.local_edge)))
            .collect()
    }

    /// Geometric map of element `e` at a reference point.
    pub fn map_point(&self, e: usize, pt: [f64; 2]) -> MapPoint {
        let (vals, grads) = self.geometry.eval_with_grad(pt);
        self.combine(e, &vals, &grads)
    }

    /// Geometric map of element `e` at tabulated point `q`.
    pub fn map_tabulated(&self, e: usize, tab: &Tabulation, q: usize) -> MapPoint {
        self.combine(e, &tab.values[q], &tab.grads[q])
    }

    fn combine(&self, e: usize, vals: &[f64], grads: &[[f64; 2]]) -> MapPoint {
        let nodes = &self.geometry_nodes[e];
        let mut x = [0.0; 2];
        let mut jac = [[0.0; 2]; 2];
        for ((n, v), g) in nodes.iter().zip(vals).zip(grads) {
            for i in 0..2 {
                x[i] += n[i] * v;
                jac[i][0] += n[i] * g[0];
                jac[i][1] += n[i] * g[1];
            }
        }
        let det = jac[0][0] * jac[1][1] - jac[0][1] * jac[1][0];
        MapPoint { x, jac, det }
    }

    /// Sum of element areas under the geometric maps.
    pub fn area(&self) -> f64 {
        let q = quadrature_triangle(2 * self.geometry_degree() + 2).expect("supported order");
        let tab = self.geometry.tabulate(&q.points);
        (0..self.n_tri())
            .map(|e| {
                q.weights
                    .iter()
                    .enumerate()
                    .map(|(i, w)| w * self.map_tabulated(e, &tab, i).det)
                    .sum::<f64>()
            })
            .sum()
    }

    pub fn stats(&self) -> MeshStats {
        let mut h_max: f64 = 0.0;
        for tri in &self.triangles {
            for le in 0..3 {
                let a = self.vertices[tri[le]];
                let b = self.vertices[tri[(le + 1) % 3]];
                h_max = h_max.max(((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt());
            }
        }
        let q = quadrature_triangle(2 * self.geometry_degree() + 3).expect("supported order");
        let tab = self.geometry.tabulate(&q.points);
        let mut min_ratio = f64::INFINITY;
        for e in 0..self.n_tri() {
            let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
            for i in 0..q.len() {
                let d = self.map_tabulated(e, &tab, i).det;
                lo = lo.min(d);
                hi = hi.max(d);
            }
            min_ratio = min_ratio.min(lo / hi);
        }
        MeshStats { h_max, n_tri: self.n_tri(), n_vert: self.n_vert(), min_jacobian_ratio: min_ratio }
    }

    /// Edges keyed by sorted vertex pair, with the `(element, local edge)`
    /// occurrences in element order.
    pub fn edge_incidence(&self) -> Vec<((usize, usize), Vec<(usize, usize)>)> {
        let mut index: HashMap<(usize, usize), usize> = HashMap::new();
        let mut out: Vec<((usize, usize), Vec<(usize, usize)>)> = Vec::new();
        for (e, tri) in self.triangles.iter().enumerate() {
            for le in 0..3 {
                let a = tri[le];
                let b = tri[(le + 1) % 3];
                let key = (a.min(b), a.max(b));
                let slot = *index.entry(key).or_insert_with(|| {
                    out.push((key, Vec::new()));
                    out.len() - 1
                });
                out[slot].1.push((e, le));
            }
        }
        out
    }

    /// Physical coordinates of the geometry nodes on local edge `le`,
    /// ordered from its start vertex.
    pub fn edge_geometry_nodes(&self, e: usize, le: usize) -> Vec<[f64; 2]> {
        edge_nodes(self.geometry_degree(), le).into_iter().map(|i| self.geometry_nodes[e][i]).collect()
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "DISKMESH v1 {} {} {}", self.n_vert(), self.n_tri(), self.geometry_degree());
        for v in &self.vertices {
            let _ = writeln!(s, "{} {}", v[0], v[1]);
        }
        for (tri, r) in self.triangles.iter().zip(&self.regions) {
            let _ = writeln!(s, "{} {} {} {}", tri[0], tri[1], tri[2], r.as_str());
        }
        for (e, c) in self.curved.iter().enumerate() {
            if let Some(c) = c {
                let _ = writeln!(s, "{} {} {} {}", e, c.local_edge, c.radius, c.tag.as_str());
            }
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Self, MeshError> {
        let err = |line: usize, reason: &str| MeshError::Parse { line, reason: reason.to_string() };
        let mut lines = text.lines().enumerate();
        let (_, header) = lines.next().ok_or_else(|| err(1, "empty input"))?;
        let h: Vec<&str> = header.split_whitespace().collect();
        if h.len() != 5 || h[0] != "DISKMESH" || h[1] != "v1" {
            return Err(err(1, "bad header"));
        }
        let parse_usize = |s: &str, line: usize| s.parse::<usize>().map_err(|_| err(line, "expected integer"));
        let parse_f64 = |s: &str, line: usize| s.parse::<f64>().map_err(|_| err(line, "expected number"));
        let nv = parse_usize(h[2], 1)?;
        let nt = parse_usize(h[3], 1)?;
        let q = parse_usize(h[4], 1)?;
        check_degree(q)?;
        let mut vertices = Vec::with_capacity(nv);
        for _ in 0..nv {
            let (i, l) = lines.next().ok_or_else(|| err(0, "missing vertex line"))?;
            let f: Vec<&str> = l.split_whitespace().collect();
            if f.len() != 2 {
                return Err(err(i + 1, "vertex line needs 2 fields"));
            }
            vertices.push([parse_f64(f[0], i + 1)?, parse_f64(f[1], i + 1)?]);
        }
        let mut triangles = Vec::with_capacity(nt);
        let mut regions = Vec::with_capacity(nt);
        for _ in 0..nt {
            let (i, l) = lines.next().ok_or_else(|| err(0, "missing triangle line"))?;
            let f: Vec<&str> = l.split_whitespace().collect();
            if f.len() != 4 {
                return Err(err(i + 1, "triangle line needs 4 fields"));
            }
            let tri = [parse_usize(f[0], i + 1)?, parse_usize(f[1], i + 1)?, parse_usize(f[2], i + 1)?];
            if tri.iter().any(|&v| v >= nv) {
                return Err(err(i + 1, "vertex index out of range"));
            }
            triangles.push(tri);
            regions.push(match f[3] {
                "inner" => Region::Inner,
                "annulus" => Region::Annulus,
                _ => return Err(err(i + 1, "unknown region")),
            });
        }
        let mut curved = vec![None; nt];
        for (i, l) in lines {
            if l.trim().is_empty() {
                continue;
            }
            let f: Vec<&str> = l.split_whitespace().collect();
            if f.len() != 4 {
                return Err(err(i + 1, "curved-edge line needs 4 fields"));
            }
            let e = parse_usize(f[0], i + 1)?;
            let le = parse_usize(f[1], i + 1)?;
            if e >= nt || le > 2 {
                return Err(err(i + 1, "curved edge out of range"));
            }
            let tag = match f[3] {
                "interface" => CurveTag::Interface,
                "boundary" => CurveTag::Boundary,
                _ => return Err(err(i + 1, "unknown curve tag")),
            };
            curved[e] = Some(CurvedEdge { local_edge: le, radius: parse_f64(f[2], i + 1)?, tag });
        }
        Ok(Self::assemble(vertices, triangles, regions, curved, q))
    }
}

pub fn export_mesh(mesh: &Mesh, path: &Path) -> Result<(), MeshError> {
    std::fs::write(path, mesh.to_text())?;
    Ok(())
}

pub fn import_mesh(path: &Path) -> Result<Mesh, MeshError> {
    Mesh::from_text(&std::fs::read_to_string(path)?)
}

pub fn mesh_stats(mesh: &Mesh) -> MeshStats {
    mesh.stats()
}
