//! Discrete check of the variation embedding on random band-limited functions.

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::experiment::rng_for;
use super::variation::variation_values;
use crate::error::{Error, Result};
use crate::fractal::{least_squares, zj_cover, DilationSet};

pub const SAMPLES_PER_INTERVAL: usize = 16;
pub const SHIFTS: usize = 9;
pub const TERMS: usize = 8;

/// Sample points of `E`: equally spaced points on every interval.
pub fn set_samples(s: &DilationSet, per_interval: usize) -> Vec<f64> {
    let mut v = Vec::new();
    for (a, b) in s.intervals_f64() {
        if b > a && per_interval > 1 {
            v.extend((0..per_interval).map(|k| a + (b - a) * k as f64 / (per_interval - 1) as f64));
        } else {
            v.push(a);
        }
    }
    v.dedup();
    v
}

fn lr(values: impl Iterator<Item = f64>, r: f64) -> f64 {
    values.map(|x| x.abs().powf(r)).sum::<f64>().powf(1.0 / r)
}

/// `V^r_E(F) / (ℓ^r(F(t_ν)) + sup_h ℓ^r(2^{-j} F'(t_ν + h)))`.
pub fn embedding_ratio<F: Fn(f64) -> f64, G: Fn(f64) -> f64>(
    samples: &[f64],
    cover: &[f64],
    j: u32,
    r: f64,
    f: F,
    df: G,
) -> Result<f64> {
    if cover.is_empty() || samples.is_empty() {
        return Err(Error::InvalidParams("degenerate cover".into()));
    }
    let delta = (-(j as f64)).exp2();
    let vals: Vec<f64> = samples.iter().map(|&t| f(t)).collect();
    let num = variation_values(&vals, r)?;
    let base = lr(cover.iter().map(|&t| f(t)), r);
    let deriv = (0..SHIFTS)
        .map(|k| {
            let h = delta * k as f64 / (SHIFTS - 1) as f64;
            lr(cover.iter().map(|&t| delta * df(t + h)), r)
        })
        .fold(0.0, f64::max);
    let den = base + deriv;
    if den == 0.0 {
        return Ok(if num == 0.0 { 0.0 } else { f64::INFINITY });
    }
    Ok(num / den)
}

#[derive(Clone, Debug, Serialize)]
pub struct EmbeddingResult {
    pub set: String,
    pub j: u32,
    pub trials: usize,
    pub seed: u64,
    pub cover_len: usize,
    pub samples: usize,
    pub max_ratio: f64,
    pub mean_ratio: f64,
}

/// Random `F(t) = Σ a_k cos(ω_k t + φ_k)` with `ω_k <= 2^j`; returns the largest ratio over trials.
pub fn embedding_check(s: &DilationSet, j: u32, trials: usize, seed: u64) -> Result<EmbeddingResult> {
    embedding_check_r(s, j, trials, seed, 2.0)
}

pub fn embedding_check_r(s: &DilationSet, j: u32, trials: usize, seed: u64, r: f64) -> Result<EmbeddingResult> {
    if trials == 0 {
        return Err(Error::InvalidParams("trials must be positive".into()));
    }
    let samples = set_samples(s, SAMPLES_PER_INTERVAL);
    let cover = zj_cover(s, j).endpoints_f64();
    let top = (j as f64).exp2();
    let ratios: Vec<f64> = (0..trials)
        .map(|trial| {
            let mut rng = rng_for(seed, j, trial);
            let terms: Vec<(f64, f64, f64)> = (0..TERMS)
                .map(|_| {
                    (
                        rng.gen_range(-1.0..1.0),
                        rng.gen_range(0.0..=top),
                        rng.gen_range(0.0..std::f64::consts::TAU),
                    )
                })
                .collect();
            let f = |t: f64| terms.iter().map(|(a, w, p)| a * (w * t + p).cos()).sum::<f64>();
            let df = |t: f64| terms.iter().map(|(a, w, p)| -a * w * (w * t + p).sin()).sum::<f64>();
            embedding_ratio(&samples, &cover, j, r, f, df)
        })
        .collect::<Result<_>>()?;
    let max_ratio = ratios.iter().cloned().fold(0.0, f64::max);
    let mean_ratio = ratios.iter().sum::<f64>() / ratios.len() as f64;
    Ok(EmbeddingResult {
        set: s.descriptor(),
        j,
        trials,
        seed,
        cover_len: cover.len(),
        samples: samples.len(),
        max_ratio,
        mean_ratio,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct EmbeddingScan {
    pub rows: Vec<EmbeddingResult>,
    pub max_ratio: f64,
    /// Least-squares slope of `log2 max_ratio` against `j`.
    pub trend_slope: f64,
    pub trend_clean: bool,
    pub bound: f64,
    pub bounded: bool,
}

pub const TREND_TOLERANCE: f64 = 0.05;

/// Runs the check for each `j`, resolving the set to scale `2^{-j}` when its generation is not fixed.
pub fn embedding_scan(desc: &str, jmin: u32, jmax: u32, trials: usize, seed: u64, bound: f64) -> Result<EmbeddingScan> {
    if jmax < jmin + 1 {
        return Err(Error::InsufficientScales(format!("need two scales, got [{jmin}, {jmax}]")));
    }
    let rows: Vec<EmbeddingResult> = (jmin..=jmax)
        .into_par_iter()
        .map(|j| {
            let s = DilationSet::parse_for_scale(desc, j)?;
            embedding_check(&s, j, trials, seed)
        })
        .collect::<Result<_>>()?;
    let xs: Vec<f64> = rows.iter().map(|r| r.j as f64).collect();
    let ys: Vec<f64> = rows.iter().map(|r| r.max_ratio.log2()).collect();
    let trend_slope = least_squares(&xs, &ys).0;
    let max_ratio = rows.iter().map(|r| r.max_ratio).fold(0.0, f64::max);
    Ok(EmbeddingScan {
        rows,
        max_ratio,
        trend_slope,
        trend_clean: trend_slope <= TREND_TOLERANCE,
        bound,
        bounded: max_ratio <= bound,
    })
}
