use std::collections::HashMap;
use std::fmt::Write as _;

use super::hull::Polytope3;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MeshFormat {
    Obj,
    Ply,
}

impl std::str::FromStr for MeshFormat {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "obj" => Ok(MeshFormat::Obj),
            "ply" => Ok(MeshFormat::Ply),
            _ => Err(Error::Parse(format!("unknown mesh format {s:?}"))),
        }
    }
}

pub const DEFAULT_PRECISION: usize = 12;

/// `v` rounded to `digits` significant digits, printed shortest.
pub fn fmt_sig(v: f64, digits: usize) -> String {
    let s = format!("{:.*e}", digits.saturating_sub(1), v);
    let r: f64 = s.parse().unwrap_or(v);
    if r == 0.0 {
        "0".to_string()
    } else {
        format!("{r}")
    }
}

pub fn export_mesh(p: &Polytope3, format: MeshFormat) -> Result<Vec<u8>> {
    export_mesh_with(p, format, DEFAULT_PRECISION, None)
}

/// Triangulated export; `labels` (one per facet) become OBJ groups.
pub fn export_mesh_with(
    p: &Polytope3,
    format: MeshFormat,
    precision: usize,
    labels: Option<&[String]>,
) -> Result<Vec<u8>> {
    if p.is_degenerate() {
        return Err(Error::Degenerate(p.dim));
    }
    let tris = p.triangles();
    let owner = p.facet_of_triangle();
    let mut out = String::new();
    match format {
        MeshFormat::Obj => {
            for v in &p.vertices {
                let [x, y, z] = v.to_f64();
                let _ = writeln!(out, "v {} {} {}", fmt_sig(x, precision), fmt_sig(y, precision), fmt_sig(z, precision));
            }
            let mut current: Option<&str> = None;
            for (t, f) in tris.iter().zip(&owner) {
                if let Some(labels) = labels {
                    let l = labels[*f].as_str();
                    if current != Some(l) {
                        let _ = writeln!(out, "g {l}");
                        current = Some(l);
                    }
                }
                let _ = writeln!(out, "f {} {} {}", t[0] + 1, t[1] + 1, t[2] + 1);
            }
        }
        MeshFormat::Ply => {
            let _ = writeln!(out, "ply\nformat ascii 1.0");
            let _ = writeln!(out, "element vertex {}", p.vertices.len());
            let _ = writeln!(out, "property double x\nproperty double y\nproperty double z");
            let _ = writeln!(out, "element face {}", tris.len());
            let _ = writeln!(out, "property list uchar int vertex_indices\nend_header");
            for v in &p.vertices {
                let [x, y, z] = v.to_f64();
                let _ = writeln!(out, "{} {} {}", fmt_sig(x, precision), fmt_sig(y, precision), fmt_sig(z, precision));
            }
            for t in &tris {
                let _ = writeln!(out, "3 {} {} {}", t[0], t[1], t[2]);
            }
        }
    }
    Ok(out.into_bytes())
}

/// Every undirected edge is used by exactly two triangles with opposite orientation.
pub fn is_watertight(tris: &[[usize; 3]]) -> bool {
    let mut directed: HashMap<(usize, usize), usize> = HashMap::new();
    for t in tris {
        for k in 0..3 {
            *directed.entry((t[k], t[(k + 1) % 3])).or_default() += 1;
        }
    }
    directed
        .iter()
        .all(|(&(a, b), &n)| n == 1 && directed.get(&(b, a)) == Some(&1))
}

#[derive(Clone, Debug, Default)]
pub struct ObjMesh {
    pub vertices: Vec<[f64; 3]>,
    pub faces: Vec<Vec<usize>>,
    pub groups: Vec<String>,
}

/// Reads `v`, `f` and `g` records; other lines are ignored.
pub fn parse_obj(text: &str) -> Result<ObjMesh> {
    let mut m = ObjMesh::default();
    let mut group = String::new();
    for (ln, line) in text.lines().enumerate() {
        let mut it = line.split_whitespace();
        match it.next() {
            Some("v") => {
                let c: Vec<f64> = it.take(3).map(|s| s.parse::<f64>()).collect::<std::result::Result<_, _>>()
                    .map_err(|_| Error::Parse(format!("bad vertex on line {}", ln + 1)))?;
                if c.len() != 3 {
                    return Err(Error::Parse(format!("bad vertex on line {}", ln + 1)));
                }
                m.vertices.push([c[0], c[1], c[2]]);
            }
            Some("f") => {
                let mut face = Vec::new();
                for tok in it {
                    let idx = tok.split('/').next().unwrap_or("");
                    let i: i64 = idx.parse().map_err(|_| Error::Parse(format!("bad face on line {}", ln + 1)))?;
                    let i = if i < 0 { m.vertices.len() as i64 + i } else { i - 1 };
                    if i < 0 || i as usize >= m.vertices.len() {
                        return Err(Error::Parse(format!("face index out of range on line {}", ln + 1)));
                    }
                    face.push(i as usize);
                }
                if face.len() < 3 {
                    return Err(Error::Parse(format!("face with fewer than 3 vertices on line {}", ln + 1)));
                }
                m.faces.push(face);
                m.groups.push(group.clone());
            }
            Some("g") => group = it.collect::<Vec<_>>().join(" "),
            _ => {}
        }
    }
    Ok(m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::hull::hull3;
    use crate::geometry::rational::Triple;

    fn cube() -> Polytope3 {
        let mut v = Vec::new();
        for a in 0..2 {
            for b in 0..2 {
                for c in 0..2 {
                    v.push(Triple::from_ints([(a, 1), (b, 1), (c, 1)]));
                }
            }
        }
        hull3(&v)
    }

    #[test]
    fn cube_obj() {
        let p = cube();
        let text = String::from_utf8(export_mesh(&p, MeshFormat::Obj).unwrap()).unwrap();
        assert_eq!(text.lines().filter(|l| l.starts_with("v ")).count(), 8);
        assert_eq!(text.lines().filter(|l| l.starts_with("f ")).count(), 12);
        assert!(is_watertight(&p.triangles()));
        let back = parse_obj(&text).unwrap();
        assert_eq!(back.faces.len(), 12);
    }

    #[test]
    fn ply_header() {
        let text = String::from_utf8(export_mesh(&cube(), MeshFormat::Ply).unwrap()).unwrap();
        assert!(text.contains("element vertex 8"));
        assert!(text.contains("element face 12"));
    }

    #[test]
    fn significant_digits() {
        assert_eq!(fmt_sig(30.0 / 37.0, 12), "0.810810810811");
        assert_eq!(fmt_sig(0.0, 12), "0");
        assert_eq!(fmt_sig(1.0, 12), "1");
    }

    #[test]
    fn open_mesh_detected() {
        assert!(!is_watertight(&[[0, 1, 2]]));
    }
}
