//! ASCII OFF input and output.

use std::fs;
use std::io::{self, Write};
use std::path::Path;

use super::{MeshError, SimplicialComplex2};
use crate::Point3;

/// Write nodes and triangles as OFF. Coordinates carry 17 significant digits,
/// so reading the file back reproduces them bit for bit.
pub fn write_off<W: Write>(m: &SimplicialComplex2, mut w: W) -> io::Result<()> {
    writeln!(w, "OFF")?;
    writeln!(w, "{} {} {}", m.num_nodes(), m.num_triangles(), m.num_edges())?;
    for p in m.nodes() {
        writeln!(w, "{:.16e} {:.16e} {:.16e}", p.x, p.y, p.z)?;
    }
    for t in m.triangles() {
        writeln!(w, "3 {} {} {}", t[0], t[1], t[2])?;
    }
    Ok(())
}

pub fn write_mesh(m: &SimplicialComplex2, path: impl AsRef<Path>) -> Result<(), MeshError> {
    let mut buf = Vec::new();
    write_off(m, &mut buf).map_err(|e| MeshError::Io(e.to_string()))?;
    fs::write(path, buf).map_err(|e| MeshError::Io(e.to_string()))
}

pub fn read_mesh(path: impl AsRef<Path>) -> Result<SimplicialComplex2, MeshError> {
    let text = fs::read_to_string(path).map_err(|e| MeshError::Io(e.to_string()))?;
    parse_off(&text)
}

pub fn parse_off(text: &str) -> Result<SimplicialComplex2, MeshError> {
    // (1-based line number, content) with comments and blank lines dropped
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
        .filter(|(_, l)| !l.is_empty());
    let err = |line: usize, message: String| MeshError::Parse { line, message };
    let last_line = text.lines().count().max(1);

    match lines.next() {
        Some((_, "OFF")) => {}
        Some((n, other)) => return Err(err(n, format!("expected header `OFF`, found `{other}`"))),
        None => return Err(err(1, "empty file".into())),
    }
    let (n, counts) = lines.next().ok_or_else(|| err(last_line, "missing counts line".into()))?;
    let counts: Vec<usize> = counts
        .split_whitespace()
        .map(|s| s.parse().map_err(|_| err(n, format!("invalid count `{s}`"))))
        .collect::<Result<_, _>>()?;
    if counts.len() < 2 {
        return Err(err(n, "counts line needs vertex and face counts".into()));
    }
    let (nv, nf) = (counts[0], counts[1]);

    let mut nodes = Vec::with_capacity(nv);
    for _ in 0..nv {
        let (n, l) = lines.next().ok_or_else(|| err(last_line, format!("expected {nv} vertices")))?;
        let xs: Vec<f64> = l
            .split_whitespace()
            .map(|s| s.parse().map_err(|_| err(n, format!("invalid coordinate `{s}`"))))
            .collect::<Result<_, _>>()?;
        if xs.len() != 3 {
            return Err(err(n, format!("vertex needs 3 coordinates, found {}", xs.len())));
        }
        nodes.push(Point3::new(xs[0], xs[1], xs[2]));
    }

    let mut triangles = Vec::with_capacity(nf);
    for _ in 0..nf {
        let (n, l) = lines.next().ok_or_else(|| err(last_line, format!("expected {nf} faces")))?;
        let ids: Vec<usize> = l
            .split_whitespace()
            .map(|s| s.parse().map_err(|_| err(n, format!("invalid index `{s}`"))))
            .collect::<Result<_, _>>()?;
        match ids.as_slice() {
            [3, i, j, k] => triangles.push([*i, *j, *k]),
            [sides, ..] if *sides != 3 => {
                return Err(err(n, format!("only triangle faces are supported, found a {sides}-gon")))
            }
            _ => return Err(err(n, "malformed face line".into())),
        }
    }
    SimplicialComplex2::new(nodes, triangles)
}
