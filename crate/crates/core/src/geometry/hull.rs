use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use std::collections::{BTreeMap, HashSet};

use super::lp::{solve_lp, LinearProgram, LpOutcome, Relation, Sense};
use super::rational::{gcd_all, lcm_denoms, Rational, Triple};
use crate::error::{Error, Result};

/// Supporting plane `normal · x <= offset`, integer and coprime.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Plane {
    pub normal: [BigInt; 3],
    pub offset: BigInt,
}

impl Plane {
    /// Scales `n · x <= c` to coprime integers, keeping the direction.
    pub fn from_rational(n: [Rational; 3], c: Rational) -> Option<Plane> {
        if n.iter().all(|v| v.is_zero()) {
            return None;
        }
        let l = lcm_denoms(&[&n[0], &n[1], &n[2], &c]);
        let ints: Vec<BigInt> = n
            .iter()
            .chain(std::iter::once(&c))
            .map(|v| (v * Rational::from_integer(l.clone())).to_integer())
            .collect();
        let g = gcd_all(&ints);
        Some(Plane {
            normal: [&ints[0] / &g, &ints[1] / &g, &ints[2] / &g],
            offset: &ints[3] / &g,
        })
    }

    pub fn through(a: &Triple, b: &Triple, c: &Triple) -> Option<Plane> {
        let n = (b - a).cross(&(c - a));
        let off = a.dot(&[n.ip.clone(), n.iq.clone(), n.ir.clone()]);
        Plane::from_rational([n.ip, n.iq, n.ir], off)
    }

    pub fn eval(&self, x: &Triple) -> Rational {
        x.dot_int(&self.normal) - Rational::from_integer(self.offset.clone())
    }

    pub fn flipped(&self) -> Plane {
        Plane {
            normal: [-&self.normal[0], -&self.normal[1], -&self.normal[2]],
            offset: -&self.offset,
        }
    }

    /// Orientation-free key: leading nonzero normal entry positive.
    pub fn canonical(&self) -> Plane {
        let lead = self.normal.iter().find(|v| !v.is_zero()).expect("nonzero normal");
        if lead.is_negative() {
            self.flipped()
        } else {
            self.clone()
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Facet {
    pub plane: Plane,
    /// Corner indices, counter-clockwise seen from outside.
    pub vertices: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Polytope3 {
    pub vertices: Vec<Triple>,
    pub facets: Vec<Facet>,
    /// Affine dimension of the hull; below 3 the body is flagged degenerate.
    pub dim: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Membership {
    Inside,
    Boundary,
    Outside,
}

impl Polytope3 {
    pub fn is_degenerate(&self) -> bool {
        self.dim < 3
    }

    pub fn contains(&self, x: &Triple, strict: bool) -> Result<Membership> {
        if self.is_degenerate() {
            if strict {
                return Err(Error::Degenerate(self.dim));
            }
            return Ok(if in_convex_hull(&self.vertices, x)? {
                Membership::Boundary
            } else {
                Membership::Outside
            });
        }
        let mut on = false;
        for f in &self.facets {
            let s = f.plane.eval(x);
            if s.is_positive() {
                return Ok(Membership::Outside);
            }
            if s.is_zero() {
                on = true;
            }
        }
        Ok(if on { Membership::Boundary } else { Membership::Inside })
    }

    pub fn vertex_index(&self, x: &Triple) -> Option<usize> {
        self.vertices.iter().position(|v| v == x)
    }

    /// Triangle fan over every facet, in facet order.
    pub fn triangles(&self) -> Vec<[usize; 3]> {
        let mut out = Vec::new();
        for f in &self.facets {
            for k in 1..f.vertices.len() - 1 {
                out.push([f.vertices[0], f.vertices[k], f.vertices[k + 1]]);
            }
        }
        out
    }

    pub fn facet_of_triangle(&self) -> Vec<usize> {
        let mut out = Vec::new();
        for (i, f) in self.facets.iter().enumerate() {
            out.extend(std::iter::repeat(i).take(f.vertices.len() - 2));
        }
        out
    }
}

/// Exact LP test of `x ∈ conv(points)`.
pub fn in_convex_hull(points: &[Triple], x: &Triple) -> Result<bool> {
    let n = points.len();
    if n == 0 {
        return Ok(false);
    }
    let mut lp = LinearProgram::new(n, Sense::Maximize, vec![Rational::zero(); n]);
    lp.constrain(vec![Rational::one(); n], Relation::Eq, Rational::one());
    for k in 0..3 {
        lp.constrain(points.iter().map(|p| p.get(k).clone()).collect(), Relation::Eq, x.get(k).clone());
    }
    Ok(matches!(solve_lp(&lp)?, LpOutcome::Optimal(_)))
}

/// Brute-force extremality: `points[i]` is not a convex combination of the others.
pub fn is_extreme(points: &[Triple], i: usize) -> Result<bool> {
    let others: Vec<Triple> = points
        .iter()
        .enumerate()
        .filter(|&(k, p)| k != i && p != &points[i])
        .map(|(_, p)| p.clone())
        .collect();
    Ok(!in_convex_hull(&others, &points[i])?)
}

fn orient(a: &Triple, b: &Triple, c: &Triple, d: &Triple) -> Rational {
    let n = (b - a).cross(&(c - a));
    (d - a).dot(&[n.ip, n.iq, n.ir])
}

fn collinear(a: &Triple, b: &Triple, c: &Triple) -> bool {
    (b - a).cross(&(c - a)).is_zero()
}

/// Strictly convex polygon corners of coplanar points, CCW about `normal`.
fn polygon_corners(points: &[Triple], idx: &[usize], normal: &[BigInt; 3]) -> Vec<usize> {
    let drop = (0..3).max_by_key(|&k| normal[k].abs()).unwrap();
    let (u, v) = match drop {
        0 => (1, 2),
        1 => (2, 0),
        _ => (0, 1),
    };
    let mut pts: Vec<usize> = idx.to_vec();
    pts.sort_by(|&a, &b| {
        let (pa, pb) = (&points[a], &points[b]);
        pa.get(u).cmp(pb.get(u)).then_with(|| pa.get(v).cmp(pb.get(v)))
    });
    pts.dedup_by(|a, b| points[*a] == points[*b]);
    if pts.len() < 3 {
        return pts;
    }
    let cross = |o: usize, a: usize, b: usize| {
        let (po, pa, pb) = (&points[o], &points[a], &points[b]);
        (pa.get(u) - po.get(u)) * (pb.get(v) - po.get(v)) - (pa.get(v) - po.get(v)) * (pb.get(u) - po.get(u))
    };
    let mut lower: Vec<usize> = Vec::new();
    for &p in &pts {
        while lower.len() >= 2 && !cross(lower[lower.len() - 2], lower[lower.len() - 1], p).is_positive() {
            lower.pop();
        }
        lower.push(p);
    }
    let mut upper: Vec<usize> = Vec::new();
    for &p in pts.iter().rev() {
        while upper.len() >= 2 && !cross(upper[upper.len() - 2], upper[upper.len() - 1], p).is_positive() {
            upper.pop();
        }
        upper.push(p);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    if lower.len() >= 3 {
        let (a, b, c) = (&points[lower[0]], &points[lower[1]], &points[lower[2]]);
        let n = (b - a).cross(&(c - a));
        if n.dot_int(normal).is_negative() {
            lower.reverse();
        }
    }
    lower
}

struct Face {
    v: [usize; 3],
    plane: Plane,
}

fn make_face(pts: &[Triple], a: usize, b: usize, c: usize, interior: &Triple) -> Face {
    let plane = Plane::through(&pts[a], &pts[b], &pts[c]).expect("nondegenerate face");
    if plane.eval(interior).is_positive() {
        Face {
            v: [a, c, b],
            plane: plane.flipped(),
        }
    } else {
        Face { v: [a, b, c], plane }
    }
}

/// Exact incremental (beneath-beyond) convex hull.
pub fn hull3(points: &[Triple]) -> Polytope3 {
    let mut pts: Vec<Triple> = points.to_vec();
    pts.sort();
    pts.dedup();
    if pts.is_empty() {
        return Polytope3 {
            vertices: vec![],
            facets: vec![],
            dim: 0,
        };
    }
    let p0 = 0;
    let Some(p1) = (1..pts.len()).find(|&i| pts[i] != pts[p0]) else {
        return Polytope3 {
            vertices: vec![pts[0].clone()],
            facets: vec![],
            dim: 0,
        };
    };
    let Some(p2) = (1..pts.len()).find(|&i| !collinear(&pts[p0], &pts[p1], &pts[i])) else {
        // sorted input on a line: extremes are first and last
        return Polytope3 {
            vertices: vec![pts[0].clone(), pts[pts.len() - 1].clone()],
            facets: vec![],
            dim: 1,
        };
    };
    let Some(p3) = (1..pts.len()).find(|&i| !orient(&pts[p0], &pts[p1], &pts[p2], &pts[i]).is_zero()) else {
        let plane = Plane::through(&pts[p0], &pts[p1], &pts[p2]).unwrap();
        let all: Vec<usize> = (0..pts.len()).collect();
        let corners = polygon_corners(&pts, &all, &plane.normal);
        return Polytope3 {
            vertices: corners.iter().map(|&i| pts[i].clone()).collect(),
            facets: vec![],
            dim: 2,
        };
    };

    let quarter = Rational::new(BigInt::one(), BigInt::from(4));
    let interior = (&(&(&pts[p0] + &pts[p1]) + &pts[p2]) + &pts[p3]).scale(&quarter);
    let mut faces: Vec<Face> = vec![
        make_face(&pts, p0, p1, p2, &interior),
        make_face(&pts, p0, p1, p3, &interior),
        make_face(&pts, p0, p2, p3, &interior),
        make_face(&pts, p1, p2, p3, &interior),
    ];
    let seed = [p0, p1, p2, p3];
    for (i, p) in pts.iter().enumerate() {
        if seed.contains(&i) {
            continue;
        }
        let visible: Vec<bool> = faces.iter().map(|f| f.plane.eval(p).is_positive()).collect();
        if !visible.iter().any(|&v| v) {
            continue;
        }
        let mut edges: HashSet<(usize, usize)> = HashSet::new();
        for (f, _) in faces.iter().zip(&visible).filter(|(_, &v)| v) {
            for k in 0..3 {
                edges.insert((f.v[k], f.v[(k + 1) % 3]));
            }
        }
        let mut horizon: Vec<(usize, usize)> = edges
            .iter()
            .filter(|(a, b)| !edges.contains(&(*b, *a)))
            .copied()
            .collect();
        horizon.sort();
        let mut kept: Vec<Face> = faces
            .into_iter()
            .zip(visible)
            .filter(|(_, v)| !v)
            .map(|(f, _)| f)
            .collect();
        for (a, b) in horizon {
            kept.push(make_face(&pts, a, b, i, &interior));
        }
        faces = kept;
    }

    let mut groups: BTreeMap<Plane, Vec<usize>> = BTreeMap::new();
    for f in &faces {
        groups.entry(f.plane.clone()).or_default().extend_from_slice(&f.v);
    }
    let mut raw: Vec<(Plane, Vec<usize>)> = Vec::new();
    let mut used: Vec<usize> = Vec::new();
    for (plane, mut idx) in groups {
        idx.sort();
        idx.dedup();
        let corners = polygon_corners(&pts, &idx, &plane.normal);
        used.extend(&corners);
        raw.push((plane, corners));
    }
    used.sort();
    used.dedup();
    let remap: BTreeMap<usize, usize> = used.iter().enumerate().map(|(k, &i)| (i, k)).collect();
    let vertices: Vec<Triple> = used.iter().map(|&i| pts[i].clone()).collect();
    let mut facets: Vec<Facet> = raw
        .into_iter()
        .map(|(plane, corners)| {
            let mut vs: Vec<usize> = corners.iter().map(|i| remap[i]).collect();
            let start = (0..vs.len()).min_by_key(|&k| vs[k]).unwrap();
            vs.rotate_left(start);
            Facet { plane, vertices: vs }
        })
        .collect();
    facets.sort_by(|a, b| a.plane.cmp(&b.plane));
    Polytope3 {
        vertices,
        facets,
        dim: 3,
    }
}

/// Polytope `{x : n_i · x <= c_i}` from half-spaces, by exact vertex enumeration.
/// Returns `None` when the intersection is empty.
pub fn from_halfspaces(planes: &[Plane]) -> Option<Polytope3> {
    let mut candidates: Vec<Triple> = Vec::new();
    let n = planes.len();
    for a in 0..n {
        for b in a + 1..n {
            for c in b + 1..n {
                if let Some(x) = intersect3(&planes[a], &planes[b], &planes[c]) {
                    if planes.iter().all(|p| !p.eval(&x).is_positive()) {
                        candidates.push(x);
                    }
                }
            }
        }
    }
    if candidates.is_empty() {
        return None;
    }
    Some(hull3(&candidates))
}

/// Unique intersection point of three planes, if any.
pub fn intersect3(a: &Plane, b: &Plane, c: &Plane) -> Option<Triple> {
    let r = |v: &BigInt| Rational::from_integer(v.clone());
    let m = [
        [r(&a.normal[0]), r(&a.normal[1]), r(&a.normal[2])],
        [r(&b.normal[0]), r(&b.normal[1]), r(&b.normal[2])],
        [r(&c.normal[0]), r(&c.normal[1]), r(&c.normal[2])],
    ];
    let rhs = [r(&a.offset), r(&b.offset), r(&c.offset)];
    let det3 = |m: &[[Rational; 3]; 3]| {
        &m[0][0] * (&m[1][1] * &m[2][2] - &m[1][2] * &m[2][1]) - &m[0][1] * (&m[1][0] * &m[2][2] - &m[1][2] * &m[2][0])
            + &m[0][2] * (&m[1][0] * &m[2][1] - &m[1][1] * &m[2][0])
    };
    let det = det3(&m);
    if det.is_zero() {
        return None;
    }
    let mut out = Vec::with_capacity(3);
    for k in 0..3 {
        let mut mk = m.clone();
        for i in 0..3 {
            mk[i][k] = rhs[i].clone();
        }
        out.push(det3(&mk) / &det);
    }
    Some(Triple::new(out[0].clone(), out[1].clone(), out[2].clone()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::rational::rat;

    fn cube() -> Vec<Triple> {
        let mut v = Vec::new();
        for a in 0..2 {
            for b in 0..2 {
                for c in 0..2 {
                    v.push(Triple::from_ints([(a, 1), (b, 1), (c, 1)]));
                }
            }
        }
        v
    }

    fn tetra() -> Vec<Triple> {
        vec![
            Triple::from_ints([(0, 1), (0, 1), (0, 1)]),
            Triple::from_ints([(1, 1), (0, 1), (0, 1)]),
            Triple::from_ints([(0, 1), (1, 1), (0, 1)]),
            Triple::from_ints([(0, 1), (0, 1), (1, 1)]),
        ]
    }

    #[test]
    fn simplex_hull() {
        let h = hull3(&tetra());
        assert_eq!(h.dim, 3);
        assert_eq!(h.vertices.len(), 4);
        assert_eq!(h.facets.len(), 4);
        assert_eq!(h.triangles().len(), 4);
    }

    #[test]
    fn cube_with_center() {
        let mut pts = cube();
        pts.push(Triple::from_ints([(1, 2), (1, 2), (1, 2)]));
        pts.push(Triple::from_ints([(1, 2), (0, 1), (0, 1)]));
        let h = hull3(&pts);
        assert_eq!(h.vertices.len(), 8);
        assert_eq!(h.facets.len(), 6);
        assert!(h.facets.iter().all(|f| f.vertices.len() == 4));
        assert_eq!(h.triangles().len(), 12);
    }

    #[test]
    fn membership() {
        let h = hull3(&tetra());
        let q = rat(1, 4);
        assert_eq!(h.contains(&Triple::diag(q), true).unwrap(), Membership::Inside);
        assert_eq!(h.contains(&Triple::zero(), true).unwrap(), Membership::Boundary);
        assert_eq!(h.contains(&Triple::diag(rat(1, 2)), false).unwrap(), Membership::Outside);
    }

    #[test]
    fn degenerate_inputs() {
        let p = Triple::diag(rat(1, 3));
        assert_eq!(hull3(&[p.clone(), p.clone()]).dim, 0);
        let line = vec![Triple::zero(), Triple::diag(rat(1, 2)), Triple::diag(rat(1, 1))];
        let h = hull3(&line);
        assert_eq!(h.dim, 1);
        assert_eq!(h.vertices.len(), 2);
        assert!(h.contains(&Triple::diag(rat(1, 2)), true).is_err());
        assert_eq!(h.contains(&Triple::diag(rat(1, 5)), false).unwrap(), Membership::Boundary);
        let square: Vec<Triple> = cube().into_iter().filter(|p| p.ir.is_zero()).collect();
        let mut sq = square.clone();
        sq.push(Triple::from_ints([(1, 2), (1, 2), (0, 1)]));
        let h = hull3(&sq);
        assert_eq!(h.dim, 2);
        assert_eq!(h.vertices.len(), 4);
    }

    #[test]
    fn facet_orientation_outward() {
        let h = hull3(&cube());
        let c = Triple::diag(rat(1, 2));
        for f in &h.facets {
            assert!(f.plane.eval(&c).is_negative());
            let (a, b, cc) = (&h.vertices[f.vertices[0]], &h.vertices[f.vertices[1]], &h.vertices[f.vertices[2]]);
            let n = (b - a).cross(&(cc - a));
            assert!(n.dot_int(&f.plane.normal).is_positive());
        }
    }

    #[test]
    fn halfspace_cube() {
        let mut planes = Vec::new();
        for k in 0..3 {
            let mut n = [BigInt::zero(), BigInt::zero(), BigInt::zero()];
            n[k] = BigInt::one();
            planes.push(Plane { normal: n.clone(), offset: BigInt::one() });
            n[k] = -BigInt::one();
            planes.push(Plane { normal: n, offset: BigInt::zero() });
        }
        let h = from_halfspaces(&planes).unwrap();
        assert_eq!(h.vertices, hull3(&cube()).vertices);
    }

    #[test]
    fn canonical_plane() {
        let p = Plane::from_rational([rat(-2, 3), rat(0, 1), rat(4, 3)], rat(2, 1)).unwrap();
        assert_eq!(p.normal, [BigInt::from(-1), BigInt::zero(), BigInt::from(2)]);
        assert_eq!(p.offset, BigInt::from(3));
        let c = p.canonical();
        assert_eq!(c.normal[0], BigInt::one());
        assert_eq!(c, p.flipped().canonical());
    }
}
