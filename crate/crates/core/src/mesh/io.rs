//! Plain-text mesh format.
//!
//! ```text
//! NV NC NB
//! x y            (NV lines)
//! i j k          (NC lines, 0-based, counterclockwise)
//! i j            (NB lines, boundary edge endpoints)
//! ```
//!
//! Normals are not stored; they are recomputed on load.

use std::fmt::Write;

use super::{Mesh, Point};
use crate::error::{Error, Result};
use crate::fmt::sci17;

pub fn save_mesh(mesh: &Mesh) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{} {} {}", mesh.num_vertices(), mesh.num_cells(), mesh.boundary_edges().len());
    for p in mesh.vertices() {
        let _ = writeln!(out, "{} {}", sci17(p[0]), sci17(p[1]));
    }
    for c in mesh.cells() {
        let _ = writeln!(out, "{} {} {}", c[0], c[1], c[2]);
    }
    for be in mesh.boundary_edges() {
        let _ = writeln!(out, "{} {}", be.vertices[0], be.vertices[1]);
    }
    out
}

struct Lines<'a> {
    inner: std::iter::Enumerate<std::str::Lines<'a>>,
}

impl<'a> Lines<'a> {
    /// Next non-blank line with its 1-based number.
    fn next_fields(&mut self, what: &str) -> Result<(usize, Vec<&'a str>)> {
        for (i, line) in self.inner.by_ref() {
            let fields: Vec<&str> = line.split_whitespace().collect();
            if !fields.is_empty() {
                return Ok((i + 1, fields));
            }
        }
        Err(Error::Parse { line: 0, message: format!("unexpected end of file, expected {what}") })
    }
}

fn parse_fields<T, const N: usize>(line: usize, fields: &[&str], what: &str) -> Result<[T; N]>
where
    T: std::str::FromStr + Copy + Default,
{
    if fields.len() != N {
        return Err(Error::Parse { line, message: format!("expected {N} fields for {what}, found {}", fields.len()) });
    }
    let mut out = [T::default(); N];
    for (slot, f) in out.iter_mut().zip(fields) {
        *slot = f.parse().map_err(|_| Error::Parse { line, message: format!("cannot parse '{f}' in {what}") })?;
    }
    Ok(out)
}

pub fn load_mesh(text: &str) -> Result<Mesh> {
    let mut lines = Lines { inner: text.lines().enumerate() };
    let (ln, fields) =
        lines.next_fields("header").map_err(|_| Error::Parse { line: 1, message: "empty mesh file".into() })?;
    let [nv, nc, nb]: [usize; 3] = parse_fields(ln, &fields, "header")?;

    let mut vertices: Vec<Point> = Vec::with_capacity(nv);
    for _ in 0..nv {
        let (ln, f) = lines.next_fields("vertex")?;
        vertices.push(parse_fields(ln, &f, "vertex")?);
    }
    let mut cells = Vec::with_capacity(nc);
    for _ in 0..nc {
        let (ln, f) = lines.next_fields("cell")?;
        cells.push(parse_fields(ln, &f, "cell")?);
    }
    let mut boundary = Vec::with_capacity(nb);
    for _ in 0..nb {
        let (ln, f) = lines.next_fields("boundary edge")?;
        boundary.push(parse_fields(ln, &f, "boundary edge")?);
    }
    if let Ok((ln, _)) = lines.next_fields("") {
        return Err(Error::Parse { line: ln, message: "trailing content after boundary edges".into() });
    }
    Mesh::from_parts(vertices, cells, boundary)
}
