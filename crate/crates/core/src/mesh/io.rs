//! Triangle-style `.node` / `.ele` text plus a boundary listing of
//! `v0 v1 tag` lines. Indices are 0-based and `#` starts a comment.

use std::fmt::Write as _;

use super::{signed_area, BoundaryEdge, BoundaryTag, Point2, TriMesh};
use crate::error::{Error, Result};

/// The three text sections of a mesh on disk.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TriangleFiles {
    pub node: String,
    pub ele: String,
    pub boundary: String,
}

/// Non-empty, comment-stripped lines with their 1-based line numbers.
fn data_lines(text: &str) -> impl Iterator<Item = (usize, Vec<&str>)> {
    text.lines().enumerate().filter_map(|(i, line)| {
        let content = line.split('#').next().unwrap_or("");
        let tokens: Vec<&str> = content.split_whitespace().collect();
        (!tokens.is_empty()).then_some((i + 1, tokens))
    })
}

fn parse_num<T: std::str::FromStr>(token: &str, line: usize, what: &str) -> Result<T> {
    token
        .parse()
        .map_err(|_| Error::parse(line, format!("cannot parse {what} from `{token}`")))
}

pub fn import_triangle_mesh(node_text: &str, ele_text: &str, boundary_text: &str) -> Result<TriMesh> {
    let vertices = parse_nodes(node_text)?;
    let mut triangles = parse_elements(ele_text, vertices.len())?;
    for tri in &mut triangles {
        if signed_area(vertices[tri[0]], vertices[tri[1]], vertices[tri[2]]) < 0.0 {
            tri.swap(1, 2);
        }
    }
    let boundary_edges = parse_boundary(boundary_text, vertices.len())?;
    TriMesh::new(vertices, triangles, boundary_edges)
}

fn parse_nodes(text: &str) -> Result<Vec<Point2>> {
    let mut lines = data_lines(text);
    let (line, header) = lines
        .next()
        .ok_or_else(|| Error::parse(1, "missing .node header"))?;
    let count: usize = parse_num(header[0], line, "vertex count")?;
    if let Some(dim) = header.get(1) {
        let dim: usize = parse_num(dim, line, "dimension")?;
        if dim != 2 {
            return Err(Error::parse(line, format!("expected dimension 2, got {dim}")));
        }
    }
    let mut vertices = Vec::with_capacity(count);
    for (line, tokens) in lines {
        if tokens.len() < 3 {
            return Err(Error::parse(line, "expected `index x y`"));
        }
        let index: usize = parse_num(tokens[0], line, "vertex index")?;
        if index != vertices.len() {
            return Err(Error::parse(
                line,
                format!("vertex index {index}, expected {}", vertices.len()),
            ));
        }
        let x = parse_num(tokens[1], line, "x coordinate")?;
        let y = parse_num(tokens[2], line, "y coordinate")?;
        vertices.push(Point2::new(x, y));
    }
    if vertices.len() != count {
        return Err(Error::parse(
            line,
            format!("header announces {count} vertices, found {}", vertices.len()),
        ));
    }
    Ok(vertices)
}

fn parse_elements(text: &str, n_vertices: usize) -> Result<Vec<[usize; 3]>> {
    let mut lines = data_lines(text);
    let (line, header) = lines
        .next()
        .ok_or_else(|| Error::parse(1, "missing .ele header"))?;
    let count: usize = parse_num(header[0], line, "triangle count")?;
    if let Some(per) = header.get(1) {
        let per: usize = parse_num(per, line, "nodes per triangle")?;
        if per != 3 {
            return Err(Error::parse(line, format!("only 3-node triangles supported, got {per}")));
        }
    }
    let mut triangles = Vec::with_capacity(count);
    for (line, tokens) in lines {
        if tokens.len() < 4 {
            return Err(Error::parse(line, "expected `index v0 v1 v2`"));
        }
        let index: usize = parse_num(tokens[0], line, "triangle index")?;
        if index != triangles.len() {
            return Err(Error::parse(
                line,
                format!("triangle index {index}, expected {}", triangles.len()),
            ));
        }
        let mut tri = [0usize; 3];
        for (k, slot) in tri.iter_mut().enumerate() {
            *slot = parse_num(tokens[k + 1], line, "vertex index")?;
            if *slot >= n_vertices {
                return Err(Error::parse(line, format!("vertex index {} out of range", *slot)));
            }
        }
        triangles.push(tri);
    }
    if triangles.len() != count {
        return Err(Error::parse(
            line,
            format!("header announces {count} triangles, found {}", triangles.len()),
        ));
    }
    Ok(triangles)
}

fn parse_boundary(text: &str, n_vertices: usize) -> Result<Vec<BoundaryEdge>> {
    let mut edges = Vec::new();
    for (line, tokens) in data_lines(text) {
        if tokens.len() != 3 {
            return Err(Error::parse(line, "expected `v0 v1 tag`"));
        }
        let a: usize = parse_num(tokens[0], line, "vertex index")?;
        let b: usize = parse_num(tokens[1], line, "vertex index")?;
        for v in [a, b] {
            if v >= n_vertices {
                return Err(Error::parse(line, format!("vertex index {v} out of range")));
            }
        }
        let code: u8 = parse_num(tokens[2], line, "boundary tag")?;
        let tag = BoundaryTag::from_code(code)
            .ok_or_else(|| Error::parse(line, format!("boundary tag must be 1..4, got {code}")))?;
        edges.push(BoundaryEdge { vertices: [a, b], tag });
    }
    Ok(edges)
}

pub fn export_triangle_mesh(mesh: &TriMesh) -> TriangleFiles {
    let mut node = String::new();
    let _ = writeln!(node, "{} 2 0 0", mesh.n_vertices());
    for (i, p) in mesh.vertices().iter().enumerate() {
        let _ = writeln!(node, "{i} {:e} {:e}", p.x, p.y);
    }
    let mut ele = String::new();
    let _ = writeln!(ele, "{} 3 0", mesh.n_triangles());
    for (i, t) in mesh.triangles().iter().enumerate() {
        let _ = writeln!(ele, "{i} {} {} {}", t[0], t[1], t[2]);
    }
    let mut boundary = String::from("# v0 v1 tag (1 glass, 2 pool, 3 heater x>0, 4 heater x<0)\n");
    for e in mesh.boundary_edges() {
        let _ = writeln!(boundary, "{} {} {}", e.vertices[0], e.vertices[1], e.tag.code());
    }
    TriangleFiles { node, ele, boundary }
}
