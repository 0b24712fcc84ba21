//! Versioned plain-text mesh format.
//!
//! ```text
//! surfremap-mesh 1
//! kind sphere
//! nodes 3
//! 1.0 0.0 0.0
//! ...
//! elements 1
//! 3 0 1 2
//! ```
//!
//! Coordinates are written with the shortest decimal representation that
//! parses back to the same `f64`, so a write/read cycle is bit-exact.
//! Element lines start with their arity; indices are 0-based.

use super::{Element, SurfaceKind, SurfaceMesh};
use crate::error::{Error, Result};
use std::io::{BufRead, Write};

const MAGIC: &str = "surfremap-mesh";
const VERSION: u32 = 1;

pub fn write_mesh<W: Write>(mesh: &SurfaceMesh, mut w: W) -> Result<()> {
    writeln!(w, "{MAGIC} {VERSION}")?;
    let kind = match mesh.kind() {
        SurfaceKind::Sphere => "sphere",
        SurfaceKind::Planar => "planar",
    };
    writeln!(w, "kind {kind}")?;
    writeln!(w, "nodes {}", mesh.node_count())?;
    for p in mesh.nodes() {
        writeln!(w, "{:?} {:?} {:?}", p[0], p[1], p[2])?;
    }
    writeln!(w, "elements {}", mesh.element_count())?;
    for el in mesh.elements() {
        write!(w, "{}", el.arity())?;
        for v in el.nodes() {
            write!(w, " {v}")?;
        }
        writeln!(w)?;
    }
    Ok(())
}

pub fn read_mesh<R: BufRead>(r: R) -> Result<SurfaceMesh> {
    let mut lines = r.lines().enumerate().filter_map(|(i, l)| match l {
        Ok(s) if s.trim().is_empty() || s.starts_with('#') => None,
        other => Some((i + 1, other)),
    });
    let mut next = |what: &str| -> Result<(usize, String)> {
        match lines.next() {
            Some((i, Ok(s))) => Ok((i, s)),
            Some((_, Err(e))) => Err(e.into()),
            None => Err(Error::Parse(format!("unexpected end of file, expected {what}"))),
        }
    };
    let bad = |line: usize, msg: &str| Error::Parse(format!("line {line}: {msg}"));

    let (ln, header) = next("header")?;
    let mut it = header.split_whitespace();
    if it.next() != Some(MAGIC) {
        return Err(bad(ln, "missing mesh header"));
    }
    match it.next().and_then(|v| v.parse::<u32>().ok()) {
        Some(VERSION) => {}
        _ => return Err(bad(ln, "unsupported mesh version")),
    }
    let (ln, kind_line) = next("kind")?;
    let kind = match kind_line.split_whitespace().collect::<Vec<_>>()[..] {
        ["kind", "sphere"] => SurfaceKind::Sphere,
        ["kind", "planar"] => SurfaceKind::Planar,
        _ => return Err(bad(ln, "expected `kind sphere|planar`")),
    };
    let count = |line: (usize, String), key: &str| -> Result<usize> {
        let mut it = line.1.split_whitespace();
        if it.next() != Some(key) {
            return Err(bad(line.0, &format!("expected `{key} <count>`")));
        }
        it.next()
            .and_then(|v| v.parse().ok())
            .ok_or_else(|| bad(line.0, "invalid count"))
    };
    let n_nodes = count(next("node count")?, "nodes")?;
    let mut nodes = Vec::with_capacity(n_nodes);
    for _ in 0..n_nodes {
        let (ln, s) = next("node coordinates")?;
        let v: Vec<f64> = s
            .split_whitespace()
            .map(|t| t.parse::<f64>().map_err(|_| bad(ln, "invalid coordinate")))
            .collect::<Result<_>>()?;
        if v.len() != 3 {
            return Err(bad(ln, "expected three coordinates"));
        }
        nodes.push([v[0], v[1], v[2]]);
    }
    let n_elems = count(next("element count")?, "elements")?;
    let mut elements = Vec::with_capacity(n_elems);
    for _ in 0..n_elems {
        let (ln, s) = next("element")?;
        let v: Vec<usize> = s
            .split_whitespace()
            .map(|t| t.parse::<usize>().map_err(|_| bad(ln, "invalid index")))
            .collect::<Result<_>>()?;
        if v.is_empty() || v[0] + 1 != v.len() {
            return Err(bad(ln, "arity does not match index count"));
        }
        elements.push(Element::from_slice(&v[1..]).map_err(|_| bad(ln, "element arity must be 3 or 4"))?);
    }
    SurfaceMesh::new(kind, nodes, elements)
}

pub fn save_mesh(mesh: &SurfaceMesh, path: &std::path::Path) -> Result<()> {
    let f = std::fs::File::create(path)?;
    let mut w = std::io::BufWriter::new(f);
    write_mesh(mesh, &mut w)?;
    w.flush()?;
    Ok(())
}

pub fn load_mesh(path: &std::path::Path) -> Result<SurfaceMesh> {
    let f = std::fs::File::open(path)?;
    read_mesh(std::io::BufReader::new(f))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{gen_cubed_sphere, gen_planar_grid, ElementKind};

    #[test]
    fn round_trip_is_bit_exact() {
        for m in [gen_cubed_sphere(3).unwrap(), gen_planar_grid(2, 3, ElementKind::Triangle).unwrap()] {
            let mut buf = Vec::new();
            write_mesh(&m, &mut buf).unwrap();
            let back = read_mesh(&buf[..]).unwrap();
            assert_eq!(back.kind(), m.kind());
            assert_eq!(back.elements(), m.elements());
            for (a, b) in back.nodes().iter().zip(m.nodes()) {
                for k in 0..3 {
                    assert_eq!(a[k].to_bits(), b[k].to_bits());
                }
            }
        }
    }

    #[test]
    fn rejects_malformed_input() {
        assert!(read_mesh(&b"not-a-mesh 1\n"[..]).is_err());
        let truncated = b"surfremap-mesh 1\nkind planar\nnodes 3\n0 0 0\n1 0 0\n";
        assert!(matches!(read_mesh(&truncated[..]), Err(Error::Parse(_))));
        let bad_arity = b"surfremap-mesh 1\nkind planar\nnodes 3\n0 0 0\n1 0 0\n0 1 0\nelements 1\n4 0 1 2\n";
        assert!(read_mesh(&bad_arity[..]).is_err());
    }
}
