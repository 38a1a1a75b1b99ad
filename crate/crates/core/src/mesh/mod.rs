//! Triangle meshes of the dome cross-section with tagged boundary edges.
//!
//! The domain is the upper half-disc. Its straight bottom edge is the pool
//! (Dirichlet), the arc is glass (homogeneous Neumann) except for two bands
//! next to the floor that carry the heaters (Robin).

mod io;

use std::collections::{BTreeSet, HashMap};
use std::f64::consts::PI;

pub use io::{export_triangle_mesh, import_triangle_mesh, TriangleFiles};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn distance(self, other: Point2) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    pub fn midpoint(self, other: Point2) -> Point2 {
        Point2::new(0.5 * (self.x + other.x), 0.5 * (self.y + other.y))
    }
}

/// Boundary part. The numeric codes are the ones used in mesh files.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BoundaryTag {
    /// Glass shell, no flux.
    Glass,
    /// Pool surface, fixed water temperature.
    Pool,
    /// Heater band at `x < 0`.
    HeaterLeft,
    /// Heater band at `x > 0`.
    HeaterRight,
}

impl BoundaryTag {
    pub const ALL: [BoundaryTag; 4] = [
        BoundaryTag::Glass,
        BoundaryTag::Pool,
        BoundaryTag::HeaterRight,
        BoundaryTag::HeaterLeft,
    ];
    pub const HEATERS: [BoundaryTag; 2] = [BoundaryTag::HeaterRight, BoundaryTag::HeaterLeft];

    pub fn code(self) -> u8 {
        match self {
            BoundaryTag::Glass => 1,
            BoundaryTag::Pool => 2,
            BoundaryTag::HeaterRight => 3,
            BoundaryTag::HeaterLeft => 4,
        }
    }

    pub fn from_code(code: u8) -> Option<Self> {
        match code {
            1 => Some(BoundaryTag::Glass),
            2 => Some(BoundaryTag::Pool),
            3 => Some(BoundaryTag::HeaterRight),
            4 => Some(BoundaryTag::HeaterLeft),
            _ => None,
        }
    }

    pub fn is_heater(self) -> bool {
        matches!(self, BoundaryTag::HeaterLeft | BoundaryTag::HeaterRight)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct BoundaryEdge {
    /// Ordered so the domain lies to the left when walking from `[0]` to `[1]`.
    pub vertices: [usize; 2],
    pub tag: BoundaryTag,
}

/// Conforming triangulation with counterclockwise triangles and a single
/// closed, fully tagged boundary loop. Immutable once built.
#[derive(Debug, Clone, PartialEq)]
pub struct TriMesh {
    vertices: Vec<Point2>,
    triangles: Vec<[usize; 3]>,
    boundary_edges: Vec<BoundaryEdge>,
    /// Radius of the origin-centred arc that non-pool boundary midpoints are
    /// projected onto during refinement.
    arc_radius: Option<f64>,
}

fn signed_area(a: Point2, b: Point2, c: Point2) -> f64 {
    0.5 * ((b.x - a.x) * (c.y - a.y) - (c.x - a.x) * (b.y - a.y))
}

fn edge_key(a: usize, b: usize) -> (usize, usize) {
    if a < b {
        (a, b)
    } else {
        (b, a)
    }
}

impl TriMesh {
    /// Build and validate a mesh. Triangles must already be counterclockwise;
    /// boundary edge direction is normalised here.
    pub fn new(
        vertices: Vec<Point2>,
        triangles: Vec<[usize; 3]>,
        boundary_edges: Vec<BoundaryEdge>,
    ) -> Result<Self> {
        let mut mesh = Self {
            vertices,
            triangles,
            boundary_edges,
            arc_radius: None,
        };
        mesh.validate()?;
        Ok(mesh)
    }

    pub fn with_arc_radius(mut self, radius: Option<f64>) -> Self {
        self.arc_radius = radius;
        self
    }

    pub fn vertices(&self) -> &[Point2] {
        &self.vertices
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn boundary_edges(&self) -> &[BoundaryEdge] {
        &self.boundary_edges
    }

    pub fn arc_radius(&self) -> Option<f64> {
        self.arc_radius
    }

    pub fn n_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn n_triangles(&self) -> usize {
        self.triangles.len()
    }

    pub fn triangle_points(&self, t: usize) -> [Point2; 3] {
        self.triangles[t].map(|v| self.vertices[v])
    }

    pub fn triangle_area(&self, t: usize) -> f64 {
        let [a, b, c] = self.triangle_points(t);
        signed_area(a, b, c)
    }

    /// Sum of triangle areas.
    pub fn area(&self) -> f64 {
        (0..self.n_triangles()).map(|t| self.triangle_area(t)).sum()
    }

    /// Area enclosed by the boundary loop (shoelace formula).
    pub fn shoelace_area(&self) -> f64 {
        self.boundary_edges
            .iter()
            .map(|e| {
                let a = self.vertices[e.vertices[0]];
                let b = self.vertices[e.vertices[1]];
                0.5 * (a.x * b.y - b.x * a.y)
            })
            .sum()
    }

    /// Total length of boundary edges carrying one of `tags`.
    pub fn boundary_length(&self, tags: &[BoundaryTag]) -> f64 {
        self.boundary_edges
            .iter()
            .filter(|e| tags.contains(&e.tag))
            .map(|e| self.vertices[e.vertices[0]].distance(self.vertices[e.vertices[1]]))
            .sum()
    }

    /// Longest edge length.
    pub fn max_edge_length(&self) -> f64 {
        self.triangles
            .iter()
            .flat_map(|t| {
                [(t[0], t[1]), (t[1], t[2]), (t[2], t[0])]
                    .map(|(a, b)| self.vertices[a].distance(self.vertices[b]))
            })
            .fold(0.0, f64::max)
    }

    /// Number of distinct edges.
    pub fn n_edges(&self) -> usize {
        self.edge_map().len()
    }

    fn edge_map(&self) -> HashMap<(usize, usize), usize> {
        let mut count = HashMap::with_capacity(3 * self.triangles.len());
        for t in &self.triangles {
            for (a, b) in [(t[0], t[1]), (t[1], t[2]), (t[2], t[0])] {
                *count.entry(edge_key(a, b)).or_insert(0) += 1;
            }
        }
        count
    }

    /// Sorted, duplicate-free indices of vertices touching a boundary edge
    /// whose tag is in `tags`.
    pub fn boundary_nodes(&self, tags: &[BoundaryTag]) -> Vec<usize> {
        let set: BTreeSet<usize> = self
            .boundary_edges
            .iter()
            .filter(|e| tags.contains(&e.tag))
            .flat_map(|e| e.vertices)
            .collect();
        set.into_iter().collect()
    }

    /// Vertices on the heater boundary Γ_R, including the pool corners.
    pub fn robin_nodes(&self) -> Vec<usize> {
        self.boundary_nodes(&BoundaryTag::HEATERS)
    }

    fn validate(&mut self) -> Result<()> {
        let n = self.vertices.len();
        for (i, p) in self.vertices.iter().enumerate() {
            if !p.x.is_finite() || !p.y.is_finite() {
                return Err(invalid("vertex", i, "non-finite coordinate"));
            }
        }
        for (t, tri) in self.triangles.iter().enumerate() {
            if tri.iter().any(|&v| v >= n) {
                return Err(invalid("triangle", t, "vertex index out of range"));
            }
            if tri[0] == tri[1] || tri[1] == tri[2] || tri[0] == tri[2] {
                return Err(invalid("triangle", t, "repeated vertex"));
            }
            let area = self.triangle_area(t);
            if !(area > 0.0) {
                return Err(invalid(
                    "triangle",
                    t,
                    format!("non-positive signed area {area:e}"),
                ));
            }
        }
        self.check_duplicate_vertices()?;

        // edges used by exactly one triangle, with their counterclockwise direction
        let mut directed: HashMap<(usize, usize), (usize, usize)> = HashMap::new();
        let mut count: HashMap<(usize, usize), u32> = HashMap::new();
        for t in &self.triangles {
            for (a, b) in [(t[0], t[1]), (t[1], t[2]), (t[2], t[0])] {
                let key = edge_key(a, b);
                let c = count.entry(key).or_insert(0);
                *c += 1;
                if *c > 2 {
                    return Err(invalid(
                        "edge",
                        key.0,
                        format!("({}, {}) shared by more than two triangles", key.0, key.1),
                    ));
                }
                directed.insert(key, (a, b));
            }
        }
        let topo_boundary: BTreeSet<(usize, usize)> = count
            .iter()
            .filter(|(_, &c)| c == 1)
            .map(|(&k, _)| k)
            .collect();

        let mut seen = BTreeSet::new();
        for (i, edge) in self.boundary_edges.iter_mut().enumerate() {
            let key = edge_key(edge.vertices[0], edge.vertices[1]);
            if !topo_boundary.contains(&key) {
                return Err(invalid(
                    "boundary edge",
                    i,
                    format!("({}, {}) is not on the mesh boundary", key.0, key.1),
                ));
            }
            if !seen.insert(key) {
                return Err(invalid("boundary edge", i, "listed twice"));
            }
            let (a, b) = directed[&key];
            edge.vertices = [a, b];
        }
        if seen.len() != topo_boundary.len() {
            let missing = topo_boundary.difference(&seen).next().unwrap();
            return Err(invalid(
                "boundary edge",
                self.boundary_edges.len(),
                format!("untagged boundary edge ({}, {})", missing.0, missing.1),
            ));
        }

        // single closed loop
        if !self.boundary_edges.is_empty() {
            let mut next: HashMap<usize, usize> = HashMap::new();
            for (i, e) in self.boundary_edges.iter().enumerate() {
                if next.insert(e.vertices[0], e.vertices[1]).is_some() {
                    return Err(invalid(
                        "boundary edge",
                        i,
                        format!("vertex {} starts two boundary edges", e.vertices[0]),
                    ));
                }
            }
            let start = self.boundary_edges[0].vertices[0];
            let mut v = start;
            let mut steps = 0;
            loop {
                v = match next.get(&v) {
                    Some(&w) => w,
                    None => return Err(invalid("vertex", v, "boundary loop is open")),
                };
                steps += 1;
                if v == start {
                    break;
                }
                if steps > self.boundary_edges.len() {
                    return Err(invalid("vertex", v, "boundary loop does not close"));
                }
            }
            if steps != self.boundary_edges.len() {
                return Err(invalid(
                    "boundary edge",
                    0,
                    format!(
                        "boundary splits into several loops ({steps} of {} edges reached)",
                        self.boundary_edges.len()
                    ),
                ));
            }
        }
        Ok(())
    }

    fn check_duplicate_vertices(&self) -> Result<()> {
        let (mut lo, mut hi) = (
            Point2::new(f64::INFINITY, f64::INFINITY),
            Point2::new(f64::NEG_INFINITY, f64::NEG_INFINITY),
        );
        for p in &self.vertices {
            lo = Point2::new(lo.x.min(p.x), lo.y.min(p.y));
            hi = Point2::new(hi.x.max(p.x), hi.y.max(p.y));
        }
        let tol = 1e-12 * lo.distance(hi);
        let mut order: Vec<usize> = (0..self.vertices.len()).collect();
        order.sort_by(|&a, &b| self.vertices[a].x.total_cmp(&self.vertices[b].x));
        for (k, &i) in order.iter().enumerate() {
            for &j in &order[k + 1..] {
                if self.vertices[j].x - self.vertices[i].x > tol {
                    break;
                }
                if self.vertices[i].distance(self.vertices[j]) <= tol {
                    return Err(invalid("vertex", i.max(j), format!("duplicates vertex {}", i.min(j))));
                }
            }
        }
        Ok(())
    }
}

fn invalid(entity: &'static str, index: usize, message: impl Into<String>) -> Error {
    Error::InvalidMesh {
        entity,
        index,
        message: message.into(),
    }
}

/// Number of concentric rings in the coarse half-disc mesh.
const COARSE_RINGS: usize = 6;

/// Triangulate the upper half-disc of `radius` and refine it
/// `refinement_level` times.
///
/// The coarse mesh is built from concentric rings around the origin; ring `i`
/// has about `π·i` segments so triangles stay close to equilateral. The
/// outermost ring has nodes exactly at the heater band ends, `heater_angle`
/// above the floor on both sides.
pub fn generate_half_disc(radius: f64, heater_angle: f64, refinement_level: usize) -> Result<TriMesh> {
    if !(radius > 0.0) || !radius.is_finite() {
        return Err(Error::param("radius", format!("must be positive, got {radius}")));
    }
    if !(heater_angle > 0.0 && heater_angle < 0.5 * PI) {
        return Err(Error::param(
            "heater_angle",
            format!("must lie in (0, π/2), got {heater_angle}"),
        ));
    }

    let mut mesh = coarse_half_disc(radius, heater_angle)?;
    for _ in 0..refinement_level {
        mesh = refine_uniform(&mesh);
    }
    Ok(mesh)
}

fn coarse_half_disc(radius: f64, heater_angle: f64) -> Result<TriMesh> {
    let mut vertices = vec![Point2::new(0.0, 0.0)];
    // ring[i] holds (vertex index, polar angle) from angle 0 to π
    let mut rings: Vec<Vec<(usize, f64)>> = vec![vec![(0, 0.0)]];

    for i in 1..=COARSE_RINGS {
        let r = radius * i as f64 / COARSE_RINGS as f64;
        let segments = ((PI * i as f64).round() as usize).max(2);
        let angles: Vec<f64> = if i == COARSE_RINGS {
            let heater = ((segments as f64 * heater_angle / PI).round() as usize).max(1);
            let middle = segments.saturating_sub(2 * heater).max(1);
            let mut a: Vec<f64> = (0..heater).map(|k| heater_angle * k as f64 / heater as f64).collect();
            a.extend(
                (0..middle).map(|k| heater_angle + (PI - 2.0 * heater_angle) * k as f64 / middle as f64),
            );
            a.extend((0..heater).map(|k| PI - heater_angle + heater_angle * k as f64 / heater as f64));
            a.push(PI);
            a
        } else {
            (0..=segments)
                .map(|k| if k == segments { PI } else { PI * k as f64 / segments as f64 })
                .collect()
        };
        let ring = angles
            .iter()
            .map(|&theta| {
                let (s, c) = theta.sin_cos();
                // keep the floor exactly at y = 0
                let p = if theta == 0.0 {
                    Point2::new(r, 0.0)
                } else if theta == PI {
                    Point2::new(-r, 0.0)
                } else {
                    Point2::new(r * c, r * s)
                };
                vertices.push(p);
                (vertices.len() - 1, theta)
            })
            .collect();
        rings.push(ring);
    }

    let mut triangles = Vec::new();
    let mut push = |a: usize, b: usize, c: usize, vertices: &[Point2]| {
        if signed_area(vertices[a], vertices[b], vertices[c]) > 0.0 {
            triangles.push([a, b, c]);
        } else {
            triangles.push([a, c, b]);
        }
    };
    for ring in rings.windows(2) {
        let (inner, outer) = (&ring[0], &ring[1]);
        if inner.len() == 1 {
            for w in outer.windows(2) {
                push(inner[0].0, w[0].0, w[1].0, &vertices);
            }
            continue;
        }
        let (mut i, mut j) = (0, 0);
        while i + 1 < inner.len() || j + 1 < outer.len() {
            let advance_outer = if i + 1 == inner.len() {
                true
            } else if j + 1 == outer.len() {
                false
            } else {
                outer[j + 1].1 <= inner[i + 1].1
            };
            if advance_outer {
                push(inner[i].0, outer[j].0, outer[j + 1].0, &vertices);
                j += 1;
            } else {
                push(inner[i].0, outer[j].0, inner[i + 1].0, &vertices);
                i += 1;
            }
        }
    }

    let mut boundary_edges = Vec::new();
    for ring in rings.windows(2) {
        let (inner, outer) = (&ring[0], &ring[1]);
        for (a, b) in [
            (inner[0].0, outer[0].0),
            (inner[inner.len() - 1].0, outer[outer.len() - 1].0),
        ] {
            boundary_edges.push(BoundaryEdge {
                vertices: [a, b],
                tag: BoundaryTag::Pool,
            });
        }
    }
    let outer = &rings[COARSE_RINGS];
    for w in outer.windows(2) {
        let mid = 0.5 * (w[0].1 + w[1].1);
        let tag = if mid < heater_angle {
            BoundaryTag::HeaterRight
        } else if mid > PI - heater_angle {
            BoundaryTag::HeaterLeft
        } else {
            BoundaryTag::Glass
        };
        boundary_edges.push(BoundaryEdge {
            vertices: [w[0].0, w[1].0],
            tag,
        });
    }

    Ok(TriMesh::new(vertices, triangles, boundary_edges)?.with_arc_radius(Some(radius)))
}

/// Red refinement: split every triangle into four through its edge
/// midpoints. Midpoints of curved (non-pool) boundary edges are pushed out
/// radially onto the arc when the mesh knows its arc radius.
pub fn refine_uniform(mesh: &TriMesh) -> TriMesh {
    let mut vertices = mesh.vertices.clone();
    let boundary_tag: HashMap<(usize, usize), BoundaryTag> = mesh
        .boundary_edges
        .iter()
        .map(|e| (edge_key(e.vertices[0], e.vertices[1]), e.tag))
        .collect();

    let mut midpoint: HashMap<(usize, usize), usize> = HashMap::new();
    let mut mid = |a: usize, b: usize, vertices: &mut Vec<Point2>| -> usize {
        let key = edge_key(a, b);
        *midpoint.entry(key).or_insert_with(|| {
            let mut p = vertices[a].midpoint(vertices[b]);
            if let (Some(r), Some(tag)) = (mesh.arc_radius, boundary_tag.get(&key)) {
                if *tag != BoundaryTag::Pool {
                    let len = p.norm();
                    p = Point2::new(p.x * r / len, p.y * r / len);
                }
            }
            vertices.push(p);
            vertices.len() - 1
        })
    };

    let mut triangles = Vec::with_capacity(4 * mesh.triangles.len());
    for &[a, b, c] in &mesh.triangles {
        let ab = mid(a, b, &mut vertices);
        let bc = mid(b, c, &mut vertices);
        let ca = mid(c, a, &mut vertices);
        triangles.extend([[a, ab, ca], [ab, b, bc], [ca, bc, c], [ab, bc, ca]]);
    }
    let boundary_edges = mesh
        .boundary_edges
        .iter()
        .flat_map(|e| {
            let m = mid(e.vertices[0], e.vertices[1], &mut vertices);
            [
                BoundaryEdge {
                    vertices: [e.vertices[0], m],
                    tag: e.tag,
                },
                BoundaryEdge {
                    vertices: [m, e.vertices[1]],
                    tag: e.tag,
                },
            ]
        })
        .collect();

    TriMesh {
        vertices,
        triangles,
        boundary_edges,
        arc_radius: mesh.arc_radius,
    }
}

/// Structured triangulation of the unit square with `n × n` cells, every
/// boundary edge carrying `tag`.
pub fn generate_unit_square(n: usize, tag: BoundaryTag) -> Result<TriMesh> {
    if n == 0 {
        return Err(Error::param("n", "need at least one cell per side"));
    }
    let h = 1.0 / n as f64;
    let index = |i: usize, j: usize| j * (n + 1) + i;
    let vertices = (0..=n)
        .flat_map(|j| (0..=n).map(move |i| Point2::new(i as f64 * h, j as f64 * h)))
        .collect();
    let mut triangles = Vec::with_capacity(2 * n * n);
    for j in 0..n {
        for i in 0..n {
            let (a, b, c, d) = (index(i, j), index(i + 1, j), index(i + 1, j + 1), index(i, j + 1));
            triangles.push([a, b, c]);
            triangles.push([a, c, d]);
        }
    }
    let mut boundary_edges = Vec::with_capacity(4 * n);
    for k in 0..n {
        for (a, b) in [
            (index(k, 0), index(k + 1, 0)),
            (index(n, k), index(n, k + 1)),
            (index(k + 1, n), index(k, n)),
            (index(0, k + 1), index(0, k)),
        ] {
            boundary_edges.push(BoundaryEdge {
                vertices: [a, b],
                tag,
            });
        }
    }
    TriMesh::new(vertices, triangles, boundary_edges)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn single_triangle() -> TriMesh {
        TriMesh::new(
            vec![Point2::new(0.0, 0.0), Point2::new(1.0, 0.0), Point2::new(0.0, 1.0)],
            vec![[0, 1, 2]],
            vec![
                BoundaryEdge { vertices: [0, 1], tag: BoundaryTag::Pool },
                BoundaryEdge { vertices: [1, 2], tag: BoundaryTag::HeaterRight },
                BoundaryEdge { vertices: [2, 0], tag: BoundaryTag::Glass },
            ],
        )
        .unwrap()
    }

    #[test]
    fn coarse_half_disc_has_all_tags_and_area() {
        let mesh = generate_half_disc(1.0, PI / 12.0, 0).unwrap();
        for tag in BoundaryTag::ALL {
            assert!(mesh.boundary_edges().iter().any(|e| e.tag == tag), "{tag:?} missing");
        }
        let h = mesh.max_edge_length();
        assert!((mesh.area() - PI / 2.0).abs() < h * h, "area {}", mesh.area());
    }

    #[test]
    fn refinement_quadruples_triangles() {
        for level in 0..3 {
            let coarse = generate_half_disc(1.0, PI / 12.0, level).unwrap();
            let fine = generate_half_disc(1.0, PI / 12.0, level + 1).unwrap();
            assert_eq!(fine.n_triangles(), 4 * coarse.n_triangles());
        }
    }

    #[test]
    fn refined_node_count_is_nodes_plus_edges() {
        let one = generate_half_disc(1.0, PI / 12.0, 1).unwrap();
        let two = generate_half_disc(1.0, PI / 12.0, 2).unwrap();
        // count edges directly from triangle sides
        let mut edges = BTreeSet::new();
        for t in one.triangles() {
            for (a, b) in [(t[0], t[1]), (t[1], t[2]), (t[2], t[0])] {
                edges.insert(edge_key(a, b));
            }
        }
        assert_eq!(two.n_vertices(), one.n_vertices() + edges.len());
    }

    #[test]
    fn refine_single_triangle() {
        let fine = refine_uniform(&single_triangle());
        assert_eq!(fine.n_triangles(), 4);
        assert_eq!(fine.n_vertices(), 6);
        assert_eq!(fine.boundary_edges().len(), 6);
        assert!(fine.triangles().iter().enumerate().all(|(t, _)| fine.triangle_area(t) > 0.0));
    }

    #[test]
    fn refined_arc_nodes_lie_on_circle() {
        let mesh = generate_half_disc(1.0, PI / 12.0, 2).unwrap();
        for v in mesh.boundary_nodes(&[BoundaryTag::Glass, BoundaryTag::HeaterLeft, BoundaryTag::HeaterRight]) {
            assert!((mesh.vertices()[v].norm() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn boundary_tag_multiset_doubles() {
        let coarse = generate_half_disc(1.0, PI / 12.0, 0).unwrap();
        let fine = refine_uniform(&coarse);
        for tag in BoundaryTag::ALL {
            let c = coarse.boundary_edges().iter().filter(|e| e.tag == tag).count();
            let f = fine.boundary_edges().iter().filter(|e| e.tag == tag).count();
            assert_eq!(f, 2 * c);
        }
    }

    #[test]
    fn shoelace_matches_triangle_area() {
        for level in 0..4 {
            let mesh = generate_half_disc(1.0, PI / 12.0, level).unwrap();
            let rel = (mesh.area() - mesh.shoelace_area()).abs() / mesh.area();
            assert!(rel <= 1e-12, "level {level}: {rel:e}");
        }
    }

    #[test]
    fn boundary_nodes_queries() {
        let mesh = generate_half_disc(1.0, PI / 12.0, 1).unwrap();
        assert_eq!(mesh.boundary_nodes(&BoundaryTag::ALL).len(), mesh.boundary_edges().len());
        assert!(mesh.boundary_nodes(&[]).is_empty());
        let pool = mesh.boundary_nodes(&[BoundaryTag::Pool]);
        let scan = mesh.vertices().iter().filter(|p| p.y == 0.0).count();
        assert_eq!(pool.len(), scan);
        // corners belong to both pool and heater sets
        let heater = mesh.robin_nodes();
        let corners: Vec<_> = pool.iter().filter(|v| heater.contains(v)).collect();
        assert_eq!(corners.len(), 2);
        assert!(pool.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(generate_half_disc(0.0, 0.2, 0).is_err());
        assert!(generate_half_disc(1.0, 0.0, 0).is_err());
        assert!(generate_half_disc(1.0, PI / 2.0, 0).is_err());
    }

    #[test]
    fn validation_catches_untagged_and_clockwise() {
        let verts = vec![Point2::new(0.0, 0.0), Point2::new(1.0, 0.0), Point2::new(0.0, 1.0)];
        let edges = vec![
            BoundaryEdge { vertices: [0, 1], tag: BoundaryTag::Pool },
            BoundaryEdge { vertices: [1, 2], tag: BoundaryTag::Glass },
        ];
        assert!(matches!(
            TriMesh::new(verts.clone(), vec![[0, 1, 2]], edges),
            Err(Error::InvalidMesh { entity: "boundary edge", .. })
        ));
        assert!(matches!(
            TriMesh::new(verts, vec![[0, 2, 1]], vec![]),
            Err(Error::InvalidMesh { entity: "triangle", index: 0, .. })
        ));
    }

    #[test]
    fn validation_catches_duplicate_vertex() {
        let verts = vec![
            Point2::new(0.0, 0.0),
            Point2::new(1.0, 0.0),
            Point2::new(0.0, 1.0),
            Point2::new(1.0, 0.0),
        ];
        let err = TriMesh::new(verts, vec![[0, 1, 2]], vec![]).unwrap_err();
        assert!(matches!(err, Error::InvalidMesh { entity: "vertex", index: 3, .. }));
    }

    #[test]
    fn unit_square_is_valid() {
        let mesh = generate_unit_square(4, BoundaryTag::Pool).unwrap();
        assert_eq!(mesh.n_vertices(), 25);
        assert!((mesh.area() - 1.0).abs() < 1e-14);
        assert_eq!(mesh.boundary_nodes(&[BoundaryTag::Pool]).len(), 16);
    }
}
