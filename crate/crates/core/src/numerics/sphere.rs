use std::f64::consts::PI;

use super::quadrature::{sine_power_total, GaussLegendre};
use crate::error::{Error, Result};

pub const CAP_NODES: usize = 24;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Piece {
    pub inner: f64,
    pub outer: f64,
    pub weight: f64,
}

/// Step function `g` with `f(x) = g(|x|)`.
#[derive(Clone, Debug, PartialEq)]
pub struct RadialProfile {
    pieces: Vec<Piece>,
    sorted: bool,
}

impl RadialProfile {
    pub fn new(pieces: Vec<Piece>) -> Result<RadialProfile> {
        for p in &pieces {
            if !(p.inner >= 0.0 && p.inner < p.outer && p.weight.is_finite()) {
                return Err(Error::InvalidParams(format!("bad radial piece {p:?}")));
            }
        }
        let sorted = pieces.windows(2).all(|w| w[0].outer <= w[1].inner);
        Ok(RadialProfile { pieces, sorted })
    }

    pub fn indicator(inner: f64, outer: f64) -> Result<RadialProfile> {
        RadialProfile::new(vec![Piece { inner, outer, weight: 1.0 }])
    }

    pub fn pieces(&self) -> &[Piece] {
        &self.pieces
    }

    pub fn total_abs_weight(&self) -> f64 {
        self.pieces.iter().map(|p| p.weight.abs()).sum()
    }

    /// Pieces that can meet radii in `[lo, hi]`.
    fn relevant(&self, lo: f64, hi: f64) -> &[Piece] {
        if !self.sorted {
            return &self.pieces;
        }
        let a = self.pieces.partition_point(|p| p.outer < lo);
        let b = self.pieces.partition_point(|p| p.inner <= hi);
        &self.pieces[a..b.max(a)]
    }

    /// `∫ g(|x|)^p dx` to the power `1/p`.
    pub fn lp_norm(&self, d: u32, p: f64) -> f64 {
        let s: f64 = self
            .pieces
            .iter()
            .map(|pc| pc.weight.abs().powf(p) * super::quadrature::shell_volume(d, pc.inner, pc.outer))
            .sum();
        s.powf(1.0 / p)
    }
}

/// Polar angle at which `|y − tω| = R` for `|y| = ρ`; clipped to `[0, π]`.
fn polar_angle(rho: f64, t: f64, r: f64) -> f64 {
    let near = (t - rho).abs();
    if r <= near {
        return 0.0;
    }
    if r >= t + rho {
        return PI;
    }
    let denom = 2.0 * rho * t;
    let one_minus = ((r - near) * (r + near) / denom).max(0.0);
    let one_plus = ((rho + t - r) * (rho + t + r) / denom).max(0.0);
    2.0 * one_minus.sqrt().atan2(one_plus.sqrt())
}

/// `∫_{θ1}^{θ2} sin^{d−2} / ∫_0^π sin^{d−2}`.
pub fn cap_fraction(d: u32, th1: f64, th2: f64, nodes: usize) -> f64 {
    if th2 <= th1 {
        return 0.0;
    }
    let n = d - 2;
    let gl = GaussLegendre::cached(nodes);
    gl.integrate(th1, th2, |x| x.sin().powi(n as i32)) / sine_power_total(n)
}

pub fn spherical_average_radial(profile: &RadialProfile, rho: f64, t: f64, d: u32) -> Result<f64> {
    spherical_average_radial_with(profile, rho, t, d, CAP_NODES)
}

/// Normalized spherical mean of a radial step function over the sphere of radius `t` centred at distance `rho`.
pub fn spherical_average_radial_with(profile: &RadialProfile, rho: f64, t: f64, d: u32, nodes: usize) -> Result<f64> {
    if d < 2 {
        return Err(Error::InvalidParams(format!("dimension {d} < 2")));
    }
    if !(rho >= 0.0) || !rho.is_finite() {
        return Err(Error::OutOfRange(format!("rho = {rho}")));
    }
    if !(1.0..=2.0).contains(&t) {
        return Err(Error::OutOfRange(format!("t = {t} not in [1, 2]")));
    }
    if rho == 0.0 {
        return Ok(profile
            .relevant(t, t)
            .iter()
            .filter(|p| p.inner <= t && t <= p.outer)
            .map(|p| p.weight)
            .sum());
    }
    let mut total = 0.0;
    for p in profile.relevant((t - rho).abs(), t + rho) {
        let a = polar_angle(rho, t, p.inner);
        let b = polar_angle(rho, t, p.outer);
        if a == 0.0 && b == PI {
            total += p.weight;
        } else if b > a {
            total += p.weight * cap_fraction(d, a, b, nodes);
        }
    }
    Ok(total)
}

/// Merges angle intervals into sorted disjoint pieces of `[0, 2π]`.
fn wrap(mut iv: Vec<(f64, f64)>) -> Vec<(f64, f64)> {
    let tau = 2.0 * PI;
    let mut out = Vec::new();
    for (a, b) in iv.drain(..) {
        if b <= a {
            continue;
        }
        if a < 0.0 {
            if b <= 0.0 {
                out.push((a + tau, b + tau));
            } else {
                out.push((a + tau, tau));
                out.push((0.0, b));
            }
        } else if b > tau {
            out.push((a, tau));
            out.push((0.0, b - tau));
        } else {
            out.push((a, b));
        }
    }
    out.sort_by(|x, y| x.0.total_cmp(&y.0));
    let mut merged: Vec<(f64, f64)> = Vec::new();
    for (a, b) in out {
        match merged.last_mut() {
            Some(last) if a <= last.1 => last.1 = last.1.max(b),
            _ => merged.push((a, b)),
        }
    }
    merged
}

fn cos_set(u1: f64, u2: f64) -> Vec<(f64, f64)> {
    if u1 > 1.0 || u2 < -1.0 || u1 > u2 {
        return Vec::new();
    }
    let lo = u2.min(1.0).acos();
    let hi = u1.max(-1.0).acos();
    wrap(vec![(lo, hi), (-hi, -lo)])
}

fn sin_set(v1: f64, v2: f64) -> Vec<(f64, f64)> {
    if v1 > 1.0 || v2 < -1.0 || v1 > v2 {
        return Vec::new();
    }
    let lo = v1.max(-1.0).asin();
    let hi = v2.min(1.0).asin();
    wrap(vec![(lo, hi), (PI - hi, PI - lo)])
}

fn overlap(x: &[(f64, f64)], y: &[(f64, f64)]) -> f64 {
    let (mut i, mut k) = (0, 0);
    let mut s = 0.0;
    while i < x.len() && k < y.len() {
        let lo = x[i].0.max(y[k].0);
        let hi = x[i].1.min(y[k].1);
        if hi > lo {
            s += hi - lo;
        }
        if x[i].1 < y[k].1 {
            i += 1;
        } else {
            k += 1;
        }
    }
    s
}

/// Angle measure of `{φ : c + s(cos φ, sin φ) ∈ [lo0, hi0] × [lo1, hi1]}`.
pub fn arc_in_box(c: [f64; 2], s: f64, lo: [f64; 2], hi: [f64; 2]) -> f64 {
    if s <= 0.0 {
        let inside = (lo[0]..=hi[0]).contains(&c[0]) && (lo[1]..=hi[1]).contains(&c[1]);
        return if inside { 2.0 * PI } else { 0.0 };
    }
    let xs = cos_set((lo[0] - c[0]) / s, (hi[0] - c[0]) / s);
    if xs.is_empty() {
        return 0.0;
    }
    let ys = sin_set((lo[1] - c[1]) / s, (hi[1] - c[1]) / s);
    overlap(&xs, &ys)
}

/// Normalized spherical mean of the indicator of an axis-parallel box, for `d ∈ {2, 3}`.
pub fn box_average(y: &[f64], t: f64, lo: &[f64], hi: &[f64], nodes: usize) -> Result<f64> {
    let d = y.len();
    if lo.len() != d || hi.len() != d {
        return Err(Error::DimensionMismatch("box and point dimensions differ".into()));
    }
    match d {
        2 => Ok(arc_in_box([y[0], y[1]], t, [lo[0], lo[1]], [hi[0], hi[1]]) / (2.0 * PI)),
        3 => {
            // Archimedes: dσ = dω3 dφ on the unit sphere
            let w1 = ((lo[2] - y[2]) / t).max(-1.0);
            let w2 = ((hi[2] - y[2]) / t).min(1.0);
            if w2 <= w1 {
                return Ok(0.0);
            }
            let mut cuts = vec![w1, w2];
            let cx = [lo[0] - y[0], hi[0] - y[0]];
            let cy = [lo[1] - y[1], hi[1] - y[1]];
            let mut radii: Vec<f64> = cx.iter().chain(&cy).map(|v| v.abs()).collect();
            for a in cx {
                for b in cy {
                    radii.push(a.hypot(b));
                }
            }
            for r in radii {
                let s = r / t;
                if s < 1.0 {
                    let w = (1.0 - s * s).sqrt();
                    for w in [w, -w] {
                        if w > w1 && w < w2 {
                            cuts.push(w);
                        }
                    }
                }
            }
            cuts.sort_by(f64::total_cmp);
            let gl = GaussLegendre::cached(nodes);
            let mut total = 0.0;
            for win in cuts.windows(2) {
                if win[1] > win[0] {
                    total += gl.integrate(win[0], win[1], |w| {
                        let s = t * (1.0 - w * w).max(0.0).sqrt();
                        arc_in_box([y[0], y[1]], s, [lo[0], lo[1]], [hi[0], hi[1]])
                    });
                }
            }
            Ok(total / (4.0 * PI))
        }
        _ => Err(Error::Unsupported(format!("box averages in dimension {d}"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Closed form in d = 3: half the length of the admissible cosine interval.
    fn d3_oracle(rho: f64, t: f64, r_in: f64, r_out: f64) -> f64 {
        let c = |r: f64| ((rho * rho + t * t - r * r) / (2.0 * rho * t)).clamp(-1.0, 1.0);
        (c(r_in) - c(r_out)) / 2.0
    }

    fn d2_oracle(rho: f64, t: f64, r_in: f64, r_out: f64) -> f64 {
        let c = |r: f64| ((rho * rho + t * t - r * r) / (2.0 * rho * t)).clamp(-1.0, 1.0);
        (c(r_out).acos() - c(r_in).acos()) / PI
    }

    #[test]
    fn ball_containing_sphere() {
        let p = RadialProfile::indicator(0.0, 3.5).unwrap();
        for d in 2..6 {
            let v = spherical_average_radial(&p, 1.2, 2.0, d).unwrap();
            assert!((v - 1.0).abs() < 1e-13, "d={d} v={v}");
        }
    }

    #[test]
    fn shell_near_centre() {
        let j = 6;
        let t1 = 1.5;
        let w = (-(j as f64)).exp2();
        let p = RadialProfile::indicator(t1 - w, t1 + w).unwrap();
        for d in 2..6 {
            let v = spherical_average_radial(&p, (-(j as f64) - 4.0).exp2(), t1, d).unwrap();
            assert!(v > 0.99);
        }
        assert_eq!(spherical_average_radial(&p, 0.0, t1, 3).unwrap(), 1.0);
    }

    #[test]
    fn errors() {
        let p = RadialProfile::indicator(0.0, 1.0).unwrap();
        assert!(spherical_average_radial(&p, 0.1, 1.5, 1).is_err());
        assert!(spherical_average_radial(&p, -0.1, 1.5, 3).is_err());
        assert!(spherical_average_radial(&p, 0.1, 2.5, 3).is_err());
        assert!(RadialProfile::indicator(1.0, 1.0).is_err());
    }

    #[test]
    fn node_doubling_stable() {
        let p = RadialProfile::new(vec![
            Piece { inner: 0.0, outer: 0.3, weight: 1.0 },
            Piece { inner: 1.0, outer: 1.6, weight: -2.0 },
        ])
        .unwrap();
        for d in 2..7 {
            for &(rho, t) in &[(0.2, 1.1), (0.5, 1.4), (1.3, 1.9), (1e-3, 1.0)] {
                let a = spherical_average_radial_with(&p, rho, t, d, 12).unwrap();
                let b = spherical_average_radial_with(&p, rho, t, d, 24).unwrap();
                assert!((a - b).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn box_average_examples() {
        // unit circle fully inside a large box
        let v = box_average(&[0.0, 0.0], 1.0, &[-2.0, -2.0], &[2.0, 2.0], 16).unwrap();
        assert!((v - 1.0).abs() < 1e-14);
        // upper half plane strip
        let v = box_average(&[0.0, 0.0], 1.0, &[-2.0, 0.0], &[2.0, 2.0], 16).unwrap();
        assert!((v - 0.5).abs() < 1e-14);
        // sphere cap by slab in d = 3: area fraction (1 − 1/2) / 2
        let v = box_average(&[0.0, 0.0, 0.0], 1.0, &[-2.0, -2.0, 0.5], &[2.0, 2.0, 2.0], 16).unwrap();
        assert!((v - 0.25).abs() < 1e-12);
        // quarter of a slab cap
        let v = box_average(&[0.0, 0.0, 0.0], 1.0, &[0.0, 0.0, 0.5], &[2.0, 2.0, 2.0], 16).unwrap();
        assert!((v - 0.0625).abs() < 1e-12);
        assert!(box_average(&[0.0; 4], 1.0, &[0.0; 4], &[1.0; 4], 8).is_err());
    }

    proptest! {
        #[test]
        fn closed_forms(rho in 1e-4f64..3.0, t in 1.0f64..2.0, a in 0.0f64..3.0, len in 1e-4f64..2.0) {
            let p = RadialProfile::indicator(a, a + len).unwrap();
            let v3 = spherical_average_radial(&p, rho, t, 3).unwrap();
            prop_assert!((v3 - d3_oracle(rho, t, a, a + len)).abs() < 1e-10);
            let v2 = spherical_average_radial(&p, rho, t, 2).unwrap();
            prop_assert!((v2 - d2_oracle(rho, t, a, a + len)).abs() < 1e-7);
        }

        #[test]
        fn bounded_by_weights(rho in 0.0f64..3.0, t in 1.0f64..2.0, d in 2u32..7,
                              w in proptest::collection::vec((0.0f64..3.0, 1e-3f64..1.0, -2.0f64..2.0), 1..5)) {
            let pieces = w.iter().map(|&(a, l, w)| Piece { inner: a, outer: a + l, weight: w }).collect();
            let p = RadialProfile::new(pieces).unwrap();
            let v = spherical_average_radial(&p, rho, t, d).unwrap();
            prop_assert!(v.abs() <= p.total_abs_weight() + 1e-12);
        }

        #[test]
        fn arc_matches_sampling(cx in -1.0f64..1.0, cy in -1.0f64..1.0, s in 0.1f64..2.0,
                                x0 in -2.0f64..1.0, w0 in 0.05f64..2.0, y0 in -2.0f64..1.0, h0 in 0.05f64..2.0) {
            let exact = arc_in_box([cx, cy], s, [x0, y0], [x0 + w0, y0 + h0]);
            let n = 200_000;
            let hits = (0..n).filter(|k| {
                let phi = (*k as f64 + 0.5) * 2.0 * PI / n as f64;
                let (x, y) = (cx + s * phi.cos(), cy + s * phi.sin());
                x >= x0 && x <= x0 + w0 && y >= y0 && y <= y0 + h0
            }).count();
            prop_assert!((exact - hits as f64 * 2.0 * PI / n as f64).abs() < 1e-3);
        }
    }
}
