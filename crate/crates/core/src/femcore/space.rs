//! Continuous degree-`p` Lagrange spaces and their degree-of-freedom maps.
//!
//! Global numbering: vertices first, then `p-1` dofs per edge ordered from
//! the lower-numbered vertex, then element interiors.

use std::collections::HashMap;
use std::sync::Arc;

use crate::mesh::Mesh;

use super::reference::{n_local, ReferenceElement};
use super::{FemError, MAX_DEGREE};

#[derive(Debug, Clone)]
pub struct FeSpace {
    mesh: Arc<Mesh>,
    p: usize,
    element: ReferenceElement,
    dof_map: Vec<Vec<usize>>,
    n_dof: usize,
    n_edges: usize,
    boundary_dofs: Vec<usize>,
    boundary_faces: Vec<(usize, usize)>,
}

pub fn build_space(mesh: Arc<Mesh>, p: usize) -> Result<FeSpace, FemError> {
    if !(1..=MAX_DEGREE).contains(&p) {
        return Err(FemError::DegreeOutOfRange(p));
    }
    let element = ReferenceElement::new(p);
    let nv = mesh.n_vert();
    let mut edge_ids: HashMap<(usize, usize), usize> = HashMap::new();
    for tri in mesh.triangles() {
        for le in 0..3 {
            let a = tri[le];
            let b = tri[(le + 1) % 3];
            let next = edge_ids.len();
            edge_ids.entry((a.min(b), a.max(b))).or_insert(next);
        }
    }
    let n_edges = edge_ids.len();
    let per_edge = p - 1;
    let n_interior = n_local(p) - 3 * p;
    let interior_base = nv + n_edges * per_edge;
    let mut dof_map = Vec::with_capacity(mesh.n_tri());
    for (e, tri) in mesh.triangles().iter().enumerate() {
        let mut local = Vec::with_capacity(n_local(p));
        local.extend_from_slice(tri);
        for le in 0..3 {
            let a = tri[le];
            let b = tri[(le + 1) % 3];
            let base = nv + edge_ids[&(a.min(b), a.max(b))] * per_edge;
            for t in 1..p {
                local.push(if a < b { base + t - 1 } else { base + p - 1 - t });
            }
        }
        for i in 0..n_interior {
            local.push(interior_base + e * n_interior + i);
        }
        dof_map.push(local);
    }
    let n_dof = interior_base + mesh.n_tri() * n_interior;
    let boundary_faces = mesh.boundary_faces();
    let mut boundary_dofs: Vec<usize> = boundary_faces
        .iter()
        .flat_map(|&(e, le)| {
            super::reference::edge_nodes(p, le).into_iter().map(move |i| (e, i))
        })
        .map(|(e, i)| dof_map[e][i])
        .collect();
    boundary_dofs.sort_unstable();
    boundary_dofs.dedup();
    Ok(FeSpace { mesh, p, element, dof_map, n_dof, n_edges, boundary_dofs, boundary_faces })
}

impl FeSpace {
    pub fn mesh(&self) -> &Mesh {
        &self.mesh
    }

    pub fn mesh_arc(&self) -> &Arc<Mesh> {
        &self.mesh
    }

    pub fn degree(&self) -> usize {
        self.p
    }

    pub fn element(&self) -> &ReferenceElement {
        &self.element
    }

    pub fn n_dof(&self) -> usize {
        self.n_dof
    }

    pub fn n_edges(&self) -> usize {
        self.n_edges
    }

    pub fn dofs(&self, e: usize) -> &[usize] {
        &self.dof_map[e]
    }

    /// Sorted global dofs on the outer circle.
    pub fn boundary_dofs(&self) -> &[usize] {
        &self.boundary_dofs
    }

    /// `(element, local edge)` pairs on the outer circle.
    pub fn boundary_faces(&self) -> &[(usize, usize)] {
        &self.boundary_faces
    }

    /// Physical location of every global dof.
    pub fn dof_points(&self) -> Vec<[f64; 2]> {
        let mut pts = vec![[0.0; 2]; self.n_dof];
        for e in 0..self.mesh.n_tri() {
            for (i, &r) in self.element.nodes().iter().enumerate() {
                pts[self.dof_map[e][i]] = self.mesh.map_point(e, r).x;
            }
        }
        pts
    }
}
