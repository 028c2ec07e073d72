//! OFF and Gmsh 2.2 ASCII readers.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{Point3, SurfaceMesh};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MeshFormat {
    Off,
    Gmsh22,
}

impl FromStr for MeshFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "off" => Ok(MeshFormat::Off),
            "gmsh22" | "gmsh" | "msh" => Ok(MeshFormat::Gmsh22),
            other => Err(Error::Config(format!("unknown mesh format '{other}'"))),
        }
    }
}

/// Reads a closed surface mesh from disk.
pub fn load_mesh(path: impl AsRef<Path>, format: MeshFormat) -> Result<SurfaceMesh> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let (vertices, triangles) = match format {
        MeshFormat::Off => parse_off(&text)?,
        MeshFormat::Gmsh22 => parse_gmsh22(&text)?,
    };
    SurfaceMesh::new(vertices, triangles)
}

type RawMesh = (Vec<Point3>, Vec<[usize; 3]>);

/// Significant lines with their 1-based line numbers; `#` starts a comment.
fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines().enumerate().filter_map(|(i, line)| {
        let line = line.split('#').next().unwrap_or("").trim();
        (!line.is_empty()).then_some((i + 1, line))
    })
}

fn number<T: FromStr>(token: Option<&str>, line: usize, what: &str) -> Result<T> {
    let token = token.ok_or_else(|| Error::parse(line, format!("missing {what}")))?;
    token
        .parse()
        .map_err(|_| Error::parse(line, format!("invalid {what} '{token}'")))
}

fn finite_point(x: f64, y: f64, z: f64, line: usize) -> Result<Point3> {
    if !(x.is_finite() && y.is_finite() && z.is_finite()) {
        return Err(Error::parse(line, "non-finite coordinate"));
    }
    Ok(Point3::new(x, y, z))
}

pub fn parse_off(text: &str) -> Result<RawMesh> {
    let mut lines = content_lines(text);
    let (line_no, header) = lines.next().ok_or_else(|| Error::parse(1, "empty file"))?;
    let mut tokens = header.split_whitespace();
    if tokens.next() != Some("OFF") {
        return Err(Error::parse(line_no, "expected 'OFF' header"));
    }
    let rest: Vec<&str> = tokens.collect();
    let (counts_line, counts) = if rest.is_empty() {
        let (n, l) = lines
            .next()
            .ok_or_else(|| Error::parse(line_no, "missing counts line"))?;
        (n, l.split_whitespace().collect::<Vec<_>>())
    } else {
        (line_no, rest)
    };
    let mut it = counts.into_iter();
    let nv: usize = number(it.next(), counts_line, "vertex count")?;
    let nf: usize = number(it.next(), counts_line, "face count")?;

    let mut vertices = Vec::with_capacity(nv.min(1 << 20));
    for k in 0..nv {
        let (n, l) = lines
            .next()
            .ok_or_else(|| Error::parse(counts_line, format!("expected {nv} vertices, found {k}")))?;
        let mut t = l.split_whitespace();
        let x = number(t.next(), n, "x coordinate")?;
        let y = number(t.next(), n, "y coordinate")?;
        let z = number(t.next(), n, "z coordinate")?;
        vertices.push(finite_point(x, y, z, n)?);
    }
    let mut triangles = Vec::with_capacity(nf.min(1 << 20));
    for k in 0..nf {
        let (n, l) = lines
            .next()
            .ok_or_else(|| Error::parse(counts_line, format!("expected {nf} faces, found {k}")))?;
        let mut t = l.split_whitespace();
        let arity: usize = number(t.next(), n, "face arity")?;
        if arity != 3 {
            return Err(Error::parse(
                n,
                format!("only triangular faces are supported (got {arity})"),
            ));
        }
        let mut tri = [0usize; 3];
        for slot in &mut tri {
            *slot = number(t.next(), n, "vertex index")?;
            if *slot >= nv {
                return Err(Error::parse(n, format!("vertex index {slot} out of range")));
            }
        }
        triangles.push(tri);
    }
    Ok((vertices, triangles))
}

pub fn parse_gmsh22(text: &str) -> Result<RawMesh> {
    let mut lines = content_lines(text).peekable();
    let mut nodes: Vec<(usize, Point3)> = Vec::new();
    let mut elements: Vec<(usize, [usize; 3])> = Vec::new();
    let mut saw_format = false;
    let mut ignored = 0usize;

    while let Some((n, line)) = lines.next() {
        match line {
            "$MeshFormat" => {
                let (vn, v) = lines.next().ok_or_else(|| Error::parse(n, "truncated $MeshFormat"))?;
                let mut t = v.split_whitespace();
                let version: f64 = number(t.next(), vn, "format version")?;
                let file_type: u32 = number(t.next(), vn, "file type")?;
                if !(2.0..3.0).contains(&version) {
                    return Err(Error::parse(vn, format!("unsupported Gmsh version {version}")));
                }
                if file_type != 0 {
                    return Err(Error::parse(vn, "binary Gmsh files are not supported"));
                }
                expect_end(&mut lines, "$EndMeshFormat", n)?;
                saw_format = true;
            }
            "$Nodes" => {
                let (cn, c) = lines.next().ok_or_else(|| Error::parse(n, "truncated $Nodes"))?;
                let count: usize = number(Some(c), cn, "node count")?;
                nodes.reserve(count.min(1 << 20));
                for _ in 0..count {
                    let (ln, l) = lines.next().ok_or_else(|| Error::parse(cn, "truncated node list"))?;
                    let mut t = l.split_whitespace();
                    let id: usize = number(t.next(), ln, "node id")?;
                    let x = number(t.next(), ln, "x coordinate")?;
                    let y = number(t.next(), ln, "y coordinate")?;
                    let z = number(t.next(), ln, "z coordinate")?;
                    nodes.push((id, finite_point(x, y, z, ln)?));
                }
                expect_end(&mut lines, "$EndNodes", n)?;
            }
            "$Elements" => {
                let (cn, c) = lines.next().ok_or_else(|| Error::parse(n, "truncated $Elements"))?;
                let count: usize = number(Some(c), cn, "element count")?;
                for _ in 0..count {
                    let (ln, l) = lines.next().ok_or_else(|| Error::parse(cn, "truncated element list"))?;
                    let t: Vec<&str> = l.split_whitespace().collect();
                    let kind: u32 = number(t.get(1).copied(), ln, "element type")?;
                    if kind != 2 {
                        ignored += 1;
                        continue;
                    }
                    let ntags: usize = number(t.get(2).copied(), ln, "tag count")?;
                    let first = 3usize
                        .checked_add(ntags)
                        .filter(|f| f.checked_add(3).is_some_and(|end| end <= t.len()))
                        .ok_or_else(|| Error::parse(ln, "triangle element has too few node ids"))?;
                    let mut tri = [0usize; 3];
                    for (k, slot) in tri.iter_mut().enumerate() {
                        *slot = number(Some(t[first + k]), ln, "node id")?;
                    }
                    elements.push((ln, tri));
                }
                expect_end(&mut lines, "$EndElements", n)?;
            }
            other if other.starts_with('$') && !other.starts_with("$End") => {
                // unknown section: skip to its end marker
                let end = format!("$End{}", &other[1..]);
                loop {
                    match lines.next() {
                        Some((_, l)) if l == end => break,
                        Some(_) => {}
                        None => return Err(Error::parse(n, format!("section {other} is not terminated"))),
                    }
                }
            }
            _ => return Err(Error::parse(n, format!("unexpected line '{line}'"))),
        }
    }
    if !saw_format {
        return Err(Error::parse(1, "missing $MeshFormat section"));
    }
    if ignored > 0 {
        log::warn!("ignored {ignored} non-triangle Gmsh elements");
    }

    let mut index = HashMap::with_capacity(nodes.len());
    let mut vertices = Vec::with_capacity(nodes.len());
    for (id, p) in nodes {
        if index.insert(id, vertices.len()).is_some() {
            return Err(Error::parse(1, format!("duplicate node id {id}")));
        }
        vertices.push(p);
    }
    let triangles = elements
        .into_iter()
        .map(|(ln, tri)| {
            let mut out = [0usize; 3];
            for (slot, id) in out.iter_mut().zip(tri) {
                *slot = *index
                    .get(&id)
                    .ok_or_else(|| Error::parse(ln, format!("unknown node id {id}")))?;
            }
            Ok(out)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((vertices, triangles))
}

fn expect_end<'a>(lines: &mut impl Iterator<Item = (usize, &'a str)>, marker: &str, section_line: usize) -> Result<()> {
    match lines.next() {
        Some((_, l)) if l == marker => Ok(()),
        Some((n, l)) => Err(Error::parse(n, format!("expected {marker}, found '{l}'"))),
        None => Err(Error::parse(section_line, format!("missing {marker}"))),
    }
}

/// Serializes a mesh as OFF with round-trip exact coordinates.
pub fn write_off(mesh: &SurfaceMesh) -> String {
    let mut out = String::new();
    writeln!(out, "OFF").unwrap();
    writeln!(
        out,
        "{} {} {}",
        mesh.num_vertices(),
        mesh.num_triangles(),
        mesh.num_edges()
    )
    .unwrap();
    for v in mesh.vertices() {
        writeln!(out, "{:?} {:?} {:?}", v.x, v.y, v.z).unwrap();
    }
    for t in mesh.triangles() {
        writeln!(out, "3 {} {} {}", t[0], t[1], t[2]).unwrap();
    }
    out
}
