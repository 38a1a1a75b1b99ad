//! Legacy ASCII VTK (version 3.0) unstructured grids with point scalars, and a
//! small reader for the same subset.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::mesh::TriMesh;

const VTK_TRIANGLE: u8 = 5;

/// Render `mesh` with one `SCALARS <name> float` block per entry of
/// `point_data`.
pub fn write_unstructured_grid(mesh: &TriMesh, title: &str, point_data: &[(&str, &[f64])]) -> Result<String> {
    for (_, values) in point_data {
        if values.len() != mesh.n_vertices() {
            return Err(Error::DimensionMismatch {
                expected: mesh.n_vertices(),
                found: values.len(),
            });
        }
    }
    let mut out = String::new();
    let _ = writeln!(out, "# vtk DataFile Version 3.0");
    // title line must be a single line of at most 256 characters
    let title: String = title.lines().next().unwrap_or("").chars().take(255).collect();
    let _ = writeln!(out, "{title}");
    let _ = writeln!(out, "ASCII");
    let _ = writeln!(out, "DATASET UNSTRUCTURED_GRID");
    let _ = writeln!(out, "POINTS {} double", mesh.n_vertices());
    for p in mesh.vertices() {
        let _ = writeln!(out, "{:e} {:e} 0", p.x, p.y);
    }
    let n_tri = mesh.n_triangles();
    let _ = writeln!(out, "CELLS {} {}", n_tri, 4 * n_tri);
    for t in mesh.triangles() {
        let _ = writeln!(out, "3 {} {} {}", t[0], t[1], t[2]);
    }
    let _ = writeln!(out, "CELL_TYPES {n_tri}");
    for _ in 0..n_tri {
        let _ = writeln!(out, "{VTK_TRIANGLE}");
    }
    if !point_data.is_empty() {
        let _ = writeln!(out, "POINT_DATA {}", mesh.n_vertices());
        for (name, values) in point_data {
            let name: String = name.chars().map(|c| if c.is_whitespace() { '_' } else { c }).collect();
            let _ = writeln!(out, "SCALARS {name} float 1");
            let _ = writeln!(out, "LOOKUP_TABLE default");
            for v in *values {
                let _ = writeln!(out, "{v:e}");
            }
        }
    }
    Ok(out)
}

/// Parsed content of a legacy unstructured grid.
#[derive(Debug, Clone, PartialEq)]
pub struct VtkGrid {
    pub title: String,
    pub points: Vec<[f64; 3]>,
    pub cells: Vec<Vec<usize>>,
    pub cell_types: Vec<u8>,
    pub point_scalars: Vec<(String, Vec<f64>)>,
}

struct Tokens<'a> {
    lines: std::iter::Peekable<std::iter::Enumerate<std::str::Lines<'a>>>,
    pending: std::collections::VecDeque<(usize, &'a str)>,
}

impl<'a> Tokens<'a> {
    fn new(lines: std::iter::Peekable<std::iter::Enumerate<std::str::Lines<'a>>>) -> Self {
        Self {
            lines,
            pending: Default::default(),
        }
    }

    fn next(&mut self) -> Option<(usize, &'a str)> {
        while self.pending.is_empty() {
            let (i, line) = self.lines.next()?;
            self.pending.extend(line.split_whitespace().map(|t| (i + 1, t)));
        }
        self.pending.pop_front()
    }

    fn expect(&mut self, what: &str) -> Result<(usize, &'a str)> {
        self.next()
            .ok_or_else(|| Error::parse(0, format!("unexpected end of file, expected {what}")))
    }

    fn keyword(&mut self, keyword: &str) -> Result<usize> {
        let (line, tok) = self.expect(keyword)?;
        if tok.eq_ignore_ascii_case(keyword) {
            Ok(line)
        } else {
            Err(Error::parse(line, format!("expected `{keyword}`, found `{tok}`")))
        }
    }

    fn number<T: std::str::FromStr>(&mut self, what: &str) -> Result<T> {
        let (line, tok) = self.expect(what)?;
        tok.parse()
            .map_err(|_| Error::parse(line, format!("cannot parse {what} from `{tok}`")))
    }
}

/// Read a legacy ASCII `UNSTRUCTURED_GRID` with optional `POINT_DATA`
/// scalars.
pub fn parse_unstructured_grid(text: &str) -> Result<VtkGrid> {
    let mut lines = text.lines().enumerate().peekable();
    let header = lines.next().map(|(_, l)| l).unwrap_or("");
    if !header.starts_with("# vtk DataFile Version") {
        return Err(Error::parse(1, "missing `# vtk DataFile Version` header"));
    }
    let title = lines.next().map(|(_, l)| l.to_string()).unwrap_or_default();
    let mut tokens = Tokens::new(lines);
    tokens.keyword("ASCII")?;
    tokens.keyword("DATASET")?;
    tokens.keyword("UNSTRUCTURED_GRID")?;

    tokens.keyword("POINTS")?;
    let n_points: usize = tokens.number("point count")?;
    let _ = tokens.expect("point type")?;
    let mut points = Vec::with_capacity(n_points);
    for _ in 0..n_points {
        points.push([
            tokens.number("x")?,
            tokens.number("y")?,
            tokens.number("z")?,
        ]);
    }

    tokens.keyword("CELLS")?;
    let n_cells: usize = tokens.number("cell count")?;
    let size: usize = tokens.number("cell list size")?;
    let mut cells = Vec::with_capacity(n_cells);
    let mut consumed = 0;
    for _ in 0..n_cells {
        let k: usize = tokens.number("cell size")?;
        let mut cell = Vec::with_capacity(k);
        for _ in 0..k {
            let v: usize = tokens.number("cell vertex")?;
            if v >= n_points {
                return Err(Error::parse(0, format!("cell vertex {v} out of range")));
            }
            cell.push(v);
        }
        consumed += k + 1;
        cells.push(cell);
    }
    if consumed != size {
        return Err(Error::parse(0, format!("CELLS size {size} but {consumed} values read")));
    }

    tokens.keyword("CELL_TYPES")?;
    let n_types: usize = tokens.number("cell type count")?;
    if n_types != n_cells {
        return Err(Error::parse(0, format!("{n_types} cell types for {n_cells} cells")));
    }
    let cell_types = (0..n_types)
        .map(|_| tokens.number("cell type"))
        .collect::<Result<Vec<u8>>>()?;

    let mut point_scalars = Vec::new();
    if let Some((line, tok)) = tokens.next() {
        if !tok.eq_ignore_ascii_case("POINT_DATA") {
            return Err(Error::parse(line, format!("expected `POINT_DATA`, found `{tok}`")));
        }
        let n: usize = tokens.number("point data count")?;
        if n != n_points {
            return Err(Error::parse(line, format!("POINT_DATA {n} for {n_points} points")));
        }
        while let Some((line, tok)) = tokens.next() {
            if !tok.eq_ignore_ascii_case("SCALARS") {
                return Err(Error::parse(line, format!("expected `SCALARS`, found `{tok}`")));
            }
            let (_, name) = tokens.expect("scalar name")?;
            let _ = tokens.expect("scalar type")?;
            // optional component count before LOOKUP_TABLE
            let (line, next) = tokens.expect("LOOKUP_TABLE")?;
            let next = if next.eq_ignore_ascii_case("LOOKUP_TABLE") {
                next
            } else {
                let comps: usize = next
                    .parse()
                    .map_err(|_| Error::parse(line, format!("bad component count `{next}`")))?;
                if comps != 1 {
                    return Err(Error::parse(line, "only single-component scalars supported"));
                }
                tokens.expect("LOOKUP_TABLE")?.1
            };
            if !next.eq_ignore_ascii_case("LOOKUP_TABLE") {
                return Err(Error::parse(line, "expected `LOOKUP_TABLE`"));
            }
            let _ = tokens.expect("table name")?;
            let values = (0..n)
                .map(|_| tokens.number("scalar value"))
                .collect::<Result<Vec<f64>>>()?;
            point_scalars.push((name.to_string(), values));
        }
    }

    Ok(VtkGrid {
        title,
        points,
        cells,
        cell_types,
        point_scalars,
    })
}
