//! Orthographic SVG projection of a convex mesh.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::geometry::ObjMesh;
use crate::sharpness::FacetLabel;

pub const CANVAS: f64 = 640.0;
const MARGIN: f64 = 40.0;
const LEGEND_ROW: f64 = 18.0;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct View {
    pub azimuth: f64,
    pub elevation: f64,
}

impl Default for View {
    fn default() -> Self {
        View { azimuth: 35.0, elevation: 20.0 }
    }
}

impl std::str::FromStr for View {
    type Err = Error;
    fn from_str(s: &str) -> Result<View> {
        let parts: Vec<&str> = s.split(',').map(str::trim).collect();
        if parts.len() != 2 {
            return Err(Error::Parse(format!("view must be AZ,EL, got {s:?}")));
        }
        let num = |t: &str| t.parse::<f64>().map_err(|_| Error::Parse(format!("bad view angle {t:?}")));
        let (azimuth, elevation) = (num(parts[0])?, num(parts[1])?);
        if !azimuth.is_finite() || !elevation.is_finite() || elevation.abs() > 90.0 {
            return Err(Error::Parse(format!("view out of range: {s}")));
        }
        Ok(View { azimuth, elevation })
    }
}

impl std::fmt::Display for View {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{},{}", self.azimuth, self.elevation)
    }
}

type V3 = [f64; 3];

fn sub(a: V3, b: V3) -> V3 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn dot(a: V3, b: V3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn cross(a: V3, b: V3) -> V3 {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

/// Camera frame `(right, up, toward viewer)`; the axes map as `1/p → x`, `1/q → y`, `1/r → z` (up).
fn frame(v: View) -> (V3, V3, V3) {
    let (az, el) = (v.azimuth.to_radians(), v.elevation.to_radians());
    let eye = [el.cos() * az.cos(), el.cos() * az.sin(), el.sin()];
    let right = [-az.sin(), az.cos(), 0.0];
    let up = cross(eye, right);
    (right, up, eye)
}

fn shade(hex: &str, k: f64) -> String {
    if hex.len() != 7 || !hex.is_ascii() {
        return hex.to_string();
    }
    let c = |i: usize| u8::from_str_radix(&hex[i..i + 2], 16).unwrap_or(255) as f64;
    let f = |x: f64| (x * k).round().clamp(0.0, 255.0) as u8;
    format!("#{:02x}{:02x}{:02x}", f(c(1)), f(c(3)), f(c(5)))
}

/// Painter's order over front-facing faces, filled by OBJ group label.
pub fn render_svg(mesh: &ObjMesh, view: View) -> Result<String> {
    if mesh.faces.is_empty() {
        return Err(Error::InvalidParams("mesh has no faces".into()));
    }
    let n = mesh.vertices.len() as f64;
    let center = mesh.vertices.iter().fold([0.0; 3], |a, v| [a[0] + v[0] / n, a[1] + v[1] / n, a[2] + v[2] / n]);
    let (right, up, eye) = frame(view);
    let proj: Vec<(f64, f64)> = mesh
        .vertices
        .iter()
        .map(|&v| {
            let w = sub(v, center);
            (dot(w, right), dot(w, up))
        })
        .collect();
    let (mut lo, mut hi) = ((f64::INFINITY, f64::INFINITY), (f64::NEG_INFINITY, f64::NEG_INFINITY));
    for &(x, y) in &proj {
        lo = (lo.0.min(x), lo.1.min(y));
        hi = (hi.0.max(x), hi.1.max(y));
    }
    let span = (hi.0 - lo.0).max(hi.1 - lo.1).max(1e-12);
    let scale = (CANVAS - 2.0 * MARGIN) / span;
    let ox = MARGIN + 0.5 * ((CANVAS - 2.0 * MARGIN) - (hi.0 - lo.0) * scale);
    let oy = MARGIN + 0.5 * ((CANVAS - 2.0 * MARGIN) - (hi.1 - lo.1) * scale);
    let to_screen = |(x, y): (f64, f64)| (ox + (x - lo.0) * scale, oy + (hi.1 - y) * scale);

    let mut visible: Vec<(f64, usize, f64)> = Vec::new();
    for (i, face) in mesh.faces.iter().enumerate() {
        let pts: Vec<V3> = face.iter().map(|&k| mesh.vertices[k]).collect();
        let mut normal = [0.0; 3];
        for k in 1..pts.len() - 1 {
            let c = cross(sub(pts[k], pts[0]), sub(pts[k + 1], pts[0]));
            normal = [normal[0] + c[0], normal[1] + c[1], normal[2] + c[2]];
        }
        let m = pts.len() as f64;
        let centroid = pts.iter().fold([0.0; 3], |a, v| [a[0] + v[0] / m, a[1] + v[1] / m, a[2] + v[2] / m]);
        if dot(normal, sub(centroid, center)) < 0.0 {
            normal = [-normal[0], -normal[1], -normal[2]];
        }
        let len = dot(normal, normal).sqrt();
        if len == 0.0 {
            continue;
        }
        let facing = dot(normal, eye) / len;
        if facing > 0.0 {
            visible.push((dot(centroid, eye), i, facing));
        }
    }
    visible.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));

    let mut legend: BTreeMap<String, &'static str> = BTreeMap::new();
    for g in &mesh.groups {
        if !g.is_empty() {
            legend.insert(g.clone(), FacetLabel::from_name(g).color());
        }
    }
    let height = CANVAS + LEGEND_ROW * legend.len() as f64;
    let mut out = String::new();
    let _ = writeln!(out, r##"<?xml version="1.0" encoding="UTF-8"?>"##);
    let _ = writeln!(
        out,
        r##"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{CANVAS}" height="{height}" viewBox="0 0 {CANVAS} {height}">"##
    );
    let _ = writeln!(out, r##"<rect width="100%" height="100%" fill="white"/>"##);
    let _ = writeln!(out, r##"<g stroke="#333333" stroke-width="0.6" stroke-linejoin="round">"##);
    for &(_, i, facing) in &visible {
        let label = FacetLabel::from_name(&mesh.groups[i]);
        let fill = shade(label.color(), 0.55 + 0.45 * facing);
        let points: Vec<String> = mesh.faces[i]
            .iter()
            .map(|&k| {
                let (x, y) = to_screen(proj[k]);
                format!("{x:.3},{y:.3}")
            })
            .collect();
        let _ = writeln!(out, r##"<polygon points="{}" fill="{fill}"/>"##, points.join(" "));
    }
    let _ = writeln!(out, "</g>");
    for (row, (name, color)) in legend.iter().enumerate() {
        let y = CANVAS + LEGEND_ROW * row as f64;
        let _ = writeln!(
            out,
            r##"<rect x="{MARGIN}" y="{y}" width="12" height="12" fill="{color}" stroke="#333333" stroke-width="0.6"/><text x="{}" y="{}" font-family="sans-serif" font-size="12">{}</text>"##,
            MARGIN + 18.0,
            y + 10.0,
            escape(name)
        );
    }
    let _ = writeln!(out, "</svg>");
    Ok(out)
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::parse_obj;

    const TETRA: &str = "v 0 0 0\nv 1 0 0\nv 0 1 0\nv 0 0 1\ng T_shell\nf 1 3 2\nf 1 2 4\ng domain_r=inf\nf 1 4 3\nf 2 3 4\n";

    #[test]
    fn deterministic_and_culled() {
        let m = parse_obj(TETRA).unwrap();
        let a = render_svg(&m, View::default()).unwrap();
        let b = render_svg(&m, View::default()).unwrap();
        assert_eq!(a, b);
        let drawn = a.matches("<polygon").count();
        assert!((1..=3).contains(&drawn), "{drawn}");
        assert!(a.contains("T_shell") && a.contains("domain_r=inf"));
    }

    #[test]
    fn views_differ() {
        let m = parse_obj(TETRA).unwrap();
        let a = render_svg(&m, "35,20".parse().unwrap()).unwrap();
        let b = render_svg(&m, "200,-30".parse().unwrap()).unwrap();
        assert_ne!(a, b);
    }

    #[test]
    fn parse_view() {
        assert_eq!("35,20".parse::<View>().unwrap(), View::default());
        assert!("35".parse::<View>().is_err());
        assert!("0,91".parse::<View>().is_err());
    }

    #[test]
    fn shading() {
        assert_eq!(shade("#ffffff", 0.5), "#808080");
        assert_eq!(shade("#102030", 1.0), "#102030");
    }
}
