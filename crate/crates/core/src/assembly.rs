//! Assembly of the P1 mass, stiffness and boundary mass matrices.
//!
//! Element integrals are exact: products of linear basis functions are
//! quadratic polynomials, so the closed-form element blocks are used.

use crate::error::{Error, Result};
use crate::linalg::SparseMatrix;
use crate::mesh::{BoundaryTag, Point2, TriMesh};
use crate::par;

const DEGENERATE_AREA: f64 = 1e-14;

/// `(area/12)·[[2,1,1],[1,2,1],[1,1,2]]`
pub fn element_mass(p: [Point2; 3]) -> [[f64; 3]; 3] {
    let area = element_area(p);
    let mut m = [[area / 12.0; 3]; 3];
    for (i, row) in m.iter_mut().enumerate() {
        row[i] = area / 6.0;
    }
    m
}

/// `∫ ∇φ_i·∇φ_j` over one triangle.
pub fn element_stiffness(p: [Point2; 3]) -> [[f64; 3]; 3] {
    let area = element_area(p);
    // ∇φ_i = (y_j − y_k, x_k − x_j) / (2·area) for cyclic (i, j, k)
    let grads: [(f64, f64); 3] = std::array::from_fn(|i| {
        let (j, k) = ((i + 1) % 3, (i + 2) % 3);
        (p[j].y - p[k].y, p[k].x - p[j].x)
    });
    let scale = 1.0 / (4.0 * area);
    std::array::from_fn(|i| std::array::from_fn(|j| scale * (grads[i].0 * grads[j].0 + grads[i].1 * grads[j].1)))
}

/// `(ℓ/6)·[[2,1],[1,2]]`
pub fn edge_mass(a: Point2, b: Point2) -> [[f64; 2]; 2] {
    let len = a.distance(b);
    [[len / 3.0, len / 6.0], [len / 6.0, len / 3.0]]
}

fn element_area(p: [Point2; 3]) -> f64 {
    0.5 * ((p[1].x - p[0].x) * (p[2].y - p[0].y) - (p[2].x - p[0].x) * (p[1].y - p[0].y))
}

fn check_areas(mesh: &TriMesh) -> Result<()> {
    for t in 0..mesh.n_triangles() {
        let area = mesh.triangle_area(t);
        if area <= DEGENERATE_AREA {
            return Err(Error::DegenerateTriangle { index: t, area });
        }
    }
    Ok(())
}

fn assemble_elements<F>(mesh: &TriMesh, element: F) -> Result<SparseMatrix>
where
    F: Fn([Point2; 3]) -> [[f64; 3]; 3] + Sync + Send,
{
    check_areas(mesh)?;
    let blocks = par::map(mesh.triangles(), |tri| element(tri.map(|v| mesh.vertices()[v])));
    let mut triplets = Vec::with_capacity(9 * blocks.len());
    for (tri, block) in mesh.triangles().iter().zip(&blocks) {
        for (a, &i) in tri.iter().enumerate() {
            for (b, &j) in tri.iter().enumerate() {
                triplets.push((i, j, block[a][b]));
            }
        }
    }
    let n = mesh.n_vertices();
    Ok(SparseMatrix::from_triplets(n, n, &triplets))
}

pub fn assemble_mass(mesh: &TriMesh) -> Result<SparseMatrix> {
    assemble_elements(mesh, element_mass)
}

pub fn assemble_stiffness(mesh: &TriMesh) -> Result<SparseMatrix> {
    assemble_elements(mesh, element_stiffness)
}

/// Consistent mass matrix of the boundary edges whose tag is in `tags`.
pub fn assemble_boundary_mass(mesh: &TriMesh, tags: &[BoundaryTag]) -> SparseMatrix {
    let mut triplets = Vec::new();
    for edge in mesh.boundary_edges().iter().filter(|e| tags.contains(&e.tag)) {
        let [i, j] = edge.vertices;
        let block = edge_mass(mesh.vertices()[i], mesh.vertices()[j]);
        for (a, &r) in [i, j].iter().enumerate() {
            for (b, &c) in [i, j].iter().enumerate() {
                triplets.push((r, c, block[a][b]));
            }
        }
    }
    let n = mesh.n_vertices();
    SparseMatrix::from_triplets(n, n, &triplets)
}

/// Free (non-pool) and Dirichlet (pool) vertex indices. A vertex touching a
/// pool edge is Dirichlet even if it also touches a heater edge.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DofPartition {
    pub dofs: Vec<usize>,
    pub dirichlet: Vec<usize>,
}

pub fn dirichlet_partition(mesh: &TriMesh) -> DofPartition {
    let dirichlet = mesh.boundary_nodes(&[BoundaryTag::Pool]);
    let mut is_dirichlet = vec![false; mesh.n_vertices()];
    for &v in &dirichlet {
        is_dirichlet[v] = true;
    }
    let dofs = (0..mesh.n_vertices()).filter(|&v| !is_dirichlet[v]).collect();
    DofPartition { dofs, dirichlet }
}

/// The three global matrices of the heat model.
#[derive(Debug, Clone)]
pub struct FemMatrices {
    pub mass: SparseMatrix,
    pub stiffness: SparseMatrix,
    /// Boundary mass on the heater edges Γ_R.
    pub robin_mass: SparseMatrix,
}

impl FemMatrices {
    pub fn assemble(mesh: &TriMesh) -> Result<Self> {
        Ok(Self {
            mass: assemble_mass(mesh)?,
            stiffness: assemble_stiffness(mesh)?,
            robin_mass: assemble_boundary_mass(mesh, &BoundaryTag::HEATERS),
        })
    }
}
