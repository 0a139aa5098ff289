//! Dilation sets in `[1, 2]`, covering numbers and dimension estimates.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::Serialize;
use std::fmt;

use crate::error::{Error, Result};
use crate::geometry::{fmt_rational, parse_rational, Rational};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Generator {
    Full,
    /// `{1 + ratio^k : 0 <= k < k_max} ∪ {1}`; `ratio = 2^{-shift}`.
    Lacunary { shift: u32, k_max: usize },
    CantorAB { a: u32, b: u32 },
    Explicit(Vec<(Rational, Rational)>),
}

/// Sorted disjoint closed intervals with endpoints `num / 2^exp`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DilationSet {
    pub generator: Generator,
    pub generation: u32,
    exp: u32,
    ends: Vec<(BigInt, BigInt)>,
}

fn pow2(e: u32) -> BigInt {
    BigInt::one() << e
}

fn dyadic_exp(x: &Rational) -> Result<u32> {
    let d = x.denom();
    let tz = d.trailing_zeros().unwrap_or(0);
    if (d >> tz) != BigInt::one() {
        return Err(Error::InvalidParams(format!("endpoint {} is not dyadic", fmt_rational(x))));
    }
    Ok(tz as u32)
}

impl DilationSet {
    pub fn full() -> DilationSet {
        DilationSet {
            generator: Generator::Full,
            generation: 0,
            exp: 0,
            ends: vec![(BigInt::one(), BigInt::from(2))],
        }
    }

    /// Lacunary set with ratio `2^{-shift}`, truncated after `k_max` points and closed by the limit point 1.
    pub fn lacunary(shift: u32, k_max: usize) -> Result<DilationSet> {
        if shift == 0 || k_max == 0 {
            return Err(Error::InvalidParams("lacunary needs ratio < 1 and k >= 1".into()));
        }
        let exp = shift * (k_max as u32 - 1);
        let one = pow2(exp);
        let mut ends = vec![(one.clone(), one.clone())];
        for k in (0..k_max as u32).rev() {
            let x = &one + pow2(exp - shift * k);
            ends.push((x.clone(), x));
        }
        Ok(DilationSet {
            generator: Generator::Lacunary { shift, k_max },
            generation: 0,
            exp,
            ends,
        })
    }

    /// Self-similar Cantor set: each interval is replaced by `2^a` copies of width `2^{-b}` times its own.
    pub fn cantor(a: u32, b: u32, generation: u32) -> Result<DilationSet> {
        if a == 0 || a >= b {
            return Err(Error::InvalidParams(format!("cantor needs 1 <= a < b, got a={a}, b={b}")));
        }
        if (a as u64) * (generation as u64) > 24 {
            return Err(Error::InvalidParams(format!("cantor generation {generation} too large")));
        }
        let exp = b * generation;
        let mut lefts = vec![pow2(exp)];
        for g in 1..=generation {
            let step = pow2(exp - a - (g - 1) * b);
            let mut next = Vec::with_capacity(lefts.len() << a);
            for l in &lefts {
                for k in 0..(1u64 << a) {
                    next.push(l + &step * k);
                }
            }
            lefts = next;
        }
        let width = pow2(exp - b * generation);
        let ends = lefts.into_iter().map(|l| {
            let r = &l + &width;
            (l, r)
        });
        Ok(DilationSet {
            generator: Generator::CantorAB { a, b },
            generation,
            exp,
            ends: ends.collect(),
        })
    }

    /// Union of the given closed intervals; overlapping pieces are merged.
    pub fn explicit(list: Vec<(Rational, Rational)>) -> Result<DilationSet> {
        if list.is_empty() {
            return Err(Error::InvalidParams("explicit set is empty".into()));
        }
        let lo = Rational::one();
        let hi = Rational::from_integer(BigInt::from(2));
        let mut exp = 0;
        for (a, b) in &list {
            if a > b || a < &lo || b > &hi {
                return Err(Error::InvalidParams(format!(
                    "interval [{}, {}] not inside [1, 2]",
                    fmt_rational(a),
                    fmt_rational(b)
                )));
            }
            exp = exp.max(dyadic_exp(a)?).max(dyadic_exp(b)?);
        }
        let scale = Rational::from_integer(pow2(exp));
        let mut raw: Vec<(BigInt, BigInt)> = list
            .iter()
            .map(|(a, b)| ((a * &scale).to_integer(), (b * &scale).to_integer()))
            .collect();
        raw.sort();
        let mut ends: Vec<(BigInt, BigInt)> = Vec::new();
        for (a, b) in raw {
            match ends.last_mut() {
                Some(last) if a <= last.1 => {
                    if b > last.1 {
                        last.1 = b;
                    }
                }
                _ => ends.push((a, b)),
            }
        }
        Ok(DilationSet {
            generator: Generator::Explicit(list),
            generation: 0,
            exp,
            ends,
        })
    }

    /// Parses `full`, `cantor:a=7,b=10,gen=2`, `lacunary:ratio=1/2,k=20`, `explicit:1..5/4;3/2`.
    pub fn parse(desc: &str) -> Result<DilationSet> {
        Self::parse_for_scale(desc, 0)
    }

    /// As [`DilationSet::parse`]; a Cantor set without `gen` gets enough generations to resolve `2^{-jmax}`.
    pub fn parse_for_scale(desc: &str, jmax: u32) -> Result<DilationSet> {
        let desc = desc.trim();
        let (kind, rest) = desc.split_once(':').unwrap_or((desc, ""));
        let kv = |rest: &str| -> Result<Vec<(String, String)>> {
            rest.split(',')
                .filter(|s| !s.trim().is_empty())
                .map(|s| {
                    s.split_once('=')
                        .map(|(k, v)| (k.trim().to_ascii_lowercase(), v.trim().to_string()))
                        .ok_or_else(|| Error::Parse(format!("expected key=value, got {s:?}")))
                })
                .collect()
        };
        match kind.to_ascii_lowercase().as_str() {
            "full" => Ok(DilationSet::full()),
            "cantor" => {
                let (mut a, mut b, mut gen) = (None, None, None);
                for (k, v) in kv(rest)? {
                    let n: u32 = v.parse().map_err(|_| Error::Parse(format!("bad integer {v:?}")))?;
                    match k.as_str() {
                        "a" => a = Some(n),
                        "b" => b = Some(n),
                        "gen" | "generation" => gen = Some(n),
                        _ => return Err(Error::Parse(format!("unknown cantor key {k:?}"))),
                    }
                }
                let a = a.ok_or_else(|| Error::Parse("cantor needs a".into()))?;
                let b = b.ok_or_else(|| Error::Parse("cantor needs b".into()))?;
                let gen = gen.unwrap_or_else(|| jmax.div_ceil(b.max(1)).max(1));
                DilationSet::cantor(a, b, gen)
            }
            "lacunary" => {
                let (mut shift, mut k) = (1, 20usize);
                for (key, v) in kv(rest)? {
                    match key.as_str() {
                        "ratio" => {
                            let r = parse_rational(&v)?;
                            let e = dyadic_exp(&r)?;
                            if !r.numer().is_one() || e == 0 {
                                return Err(Error::InvalidParams(format!("lacunary ratio must be 2^-m, got {v}")));
                            }
                            shift = e;
                        }
                        "k" => k = v.parse().map_err(|_| Error::Parse(format!("bad integer {v:?}")))?,
                        _ => return Err(Error::Parse(format!("unknown lacunary key {key:?}"))),
                    }
                }
                DilationSet::lacunary(shift, k)
            }
            "explicit" => {
                let mut list = Vec::new();
                for item in rest.split(';').map(str::trim).filter(|s| !s.is_empty()) {
                    let (a, b) = match item.split_once("..") {
                        Some((a, b)) => (parse_rational(a.trim())?, parse_rational(b.trim())?),
                        None => {
                            let x = parse_rational(item)?;
                            (x.clone(), x)
                        }
                    };
                    list.push((a, b));
                }
                DilationSet::explicit(list)
            }
            _ => Err(Error::Parse(format!("unknown set kind {kind:?}"))),
        }
    }

    pub fn descriptor(&self) -> String {
        self.to_string()
    }

    pub fn len(&self) -> usize {
        self.ends.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ends.is_empty()
    }

    pub fn intervals(&self) -> Vec<(Rational, Rational)> {
        let d = pow2(self.exp);
        self.ends
            .iter()
            .map(|(a, b)| (Rational::new(a.clone(), d.clone()), Rational::new(b.clone(), d.clone())))
            .collect()
    }

    pub fn intervals_f64(&self) -> Vec<(f64, f64)> {
        let s = (-(self.exp as f64)).exp2();
        self.ends
            .iter()
            .map(|(a, b)| (a.to_f64().unwrap_or(f64::NAN) * s, b.to_f64().unwrap_or(f64::NAN) * s))
            .collect()
    }

    /// Lebesgue measure.
    pub fn measure(&self) -> Rational {
        let total: BigInt = self.ends.iter().map(|(a, b)| b - a).sum();
        Rational::new(total, pow2(self.exp))
    }

    /// `{t : dist(t, E) <= eps}` as sorted disjoint intervals (not clipped to `[1, 2]`).
    pub fn neighborhood(&self, eps: &Rational) -> Vec<(Rational, Rational)> {
        let mut out: Vec<(Rational, Rational)> = Vec::new();
        for (a, b) in self.intervals() {
            let (a, b) = (a - eps, b + eps);
            match out.last_mut() {
                Some(last) if a <= last.1 => last.1 = b,
                _ => out.push((a, b)),
            }
        }
        out
    }

    pub fn translate(&self, shift: &Rational) -> Result<Vec<(Rational, Rational)>> {
        Ok(self.intervals().into_iter().map(|(a, b)| (a + shift, b + shift)).collect())
    }

    /// `(ends scaled to 2^{-e}, e)` with `e >= exp` and `e >= j`.
    fn at_scale(&self, j: u32) -> (Vec<(BigInt, BigInt)>, u32) {
        if j <= self.exp {
            (self.ends.clone(), self.exp)
        } else {
            let s = j - self.exp;
            (self.ends.iter().map(|(a, b)| (a << s, b << s)).collect(), j)
        }
    }
}

impl fmt::Display for DilationSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.generator {
            Generator::Full => write!(f, "full"),
            Generator::Lacunary { shift, k_max } => write!(f, "lacunary:ratio=1/{},k={}", 1u128 << shift, k_max),
            Generator::CantorAB { a, b } => write!(f, "cantor:a={a},b={b},gen={}", self.generation),
            Generator::Explicit(list) => {
                let items: Vec<String> = list
                    .iter()
                    .map(|(a, b)| {
                        if a == b {
                            fmt_rational(a)
                        } else {
                            format!("{}..{}", fmt_rational(a), fmt_rational(b))
                        }
                    })
                    .collect();
                write!(f, "explicit:{}", items.join(";"))
            }
        }
    }
}

/// Greedy left-to-right cover by closed intervals of length `w` (all integers in a common unit).
fn greedy_starts(ends: &[(BigInt, BigInt)], w: &BigInt) -> Vec<BigInt> {
    let mut starts = Vec::new();
    let mut reach: Option<BigInt> = None;
    for (a, b) in ends {
        let from = match &reach {
            Some(r) if b <= r => continue,
            Some(r) if a <= r => r.clone(),
            _ => {
                starts.push(a.clone());
                let r = a + w;
                if &r >= b {
                    reach = Some(r);
                    continue;
                }
                r
            }
        };
        let k = (b - &from).div_ceil(w);
        let mut s = from;
        for _ in 0..k.to_u64().unwrap_or(0) {
            starts.push(s.clone());
            s += w;
        }
        reach = Some(s);
    }
    starts
}

fn greedy_count(ends: &[(BigInt, BigInt)], w: &BigInt) -> BigInt {
    let mut count = BigInt::zero();
    let mut reach: Option<BigInt> = None;
    for (a, b) in ends {
        let from = match &reach {
            Some(r) if b <= r => continue,
            Some(r) if a <= r => r.clone(),
            _ => {
                count += 1;
                let r = a + w;
                if &r >= b {
                    reach = Some(r);
                    continue;
                }
                r
            }
        };
        let k = (b - &from).div_ceil(w);
        reach = Some(&from + &k * w);
        count += k;
    }
    count
}

/// Minimal number of closed intervals of length `delta` covering the set.
pub fn covering_number(s: &DilationSet, delta: &Rational) -> Result<BigInt> {
    if !delta.is_positive() || delta >= &Rational::one() {
        return Err(Error::OutOfRange(format!("delta = {} not in (0, 1)", fmt_rational(delta))));
    }
    // rescale so that endpoints and delta share the denominator 2^exp * den(delta)
    let den = delta.denom();
    let ends: Vec<(BigInt, BigInt)> = s.ends.iter().map(|(a, b)| (a * den, b * den)).collect();
    let w = delta.numer() << s.exp;
    Ok(greedy_count(&ends, &w))
}

pub fn covering_number_dyadic(s: &DilationSet, j: u32) -> BigInt {
    let (ends, e) = s.at_scale(j);
    greedy_count(&ends, &pow2(e - j))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CoverIndex {
    pub j: u32,
    #[serde(serialize_with = "ser_rationals")]
    pub endpoints: Vec<Rational>,
}

fn ser_rationals<S: serde::Serializer>(v: &[Rational], s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_seq(v.iter().map(fmt_rational))
}

impl CoverIndex {
    pub fn len(&self) -> usize {
        self.endpoints.len()
    }

    pub fn is_empty(&self) -> bool {
        self.endpoints.is_empty()
    }

    pub fn endpoints_f64(&self) -> Vec<f64> {
        self.endpoints.iter().map(crate::geometry::to_f64).collect()
    }
}

/// Left endpoints of the greedy `2^{-j}` cover; consecutive endpoints are at least `2^{-j}` apart.
pub fn zj_cover(s: &DilationSet, j: u32) -> CoverIndex {
    let (ends, e) = s.at_scale(j);
    let d = pow2(e);
    CoverIndex {
        j,
        endpoints: greedy_starts(&ends, &pow2(e - j))
            .into_iter()
            .map(|x| Rational::new(x, d.clone()))
            .collect(),
    }
}

/// Least-squares line `y = slope x + intercept` and RMS residual.
pub fn least_squares(xs: &[f64], ys: &[f64]) -> (f64, f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let intercept = my - slope * mx;
    let rss: f64 = xs.iter().zip(ys).map(|(x, y)| (y - slope * x - intercept).powi(2)).sum();
    (slope, intercept, (rss / n).sqrt())
}

#[derive(Clone, Debug, Serialize)]
pub struct MinkowskiFit {
    pub set: String,
    pub jmin: u32,
    pub jmax: u32,
    pub counts: Vec<String>,
    pub log2_counts: Vec<f64>,
    /// Least-squares slope of `log2 N(2^{-j})` against `j`.
    pub slope: f64,
    pub residual: f64,
    /// `(log2 N(jmax) − log2 N(jmin)) / (jmax − jmin)`.
    pub secant_slope: f64,
    /// Largest least-squares slope over subranges of length at least 4.
    pub max_subrange_slope: f64,
}

fn log2_big(n: &BigInt) -> f64 {
    let bits = n.bits();
    if bits <= 1000 {
        n.to_f64().unwrap_or(f64::INFINITY).log2()
    } else {
        let shift = bits - 64;
        (n >> shift).to_f64().unwrap_or(f64::INFINITY).log2() + shift as f64
    }
}

pub fn minkowski_fit(s: &DilationSet, jmin: u32, jmax: u32) -> Result<MinkowskiFit> {
    if jmax < jmin + 4 {
        return Err(Error::InsufficientScales(format!("need jmax - jmin >= 4, got [{jmin}, {jmax}]")));
    }
    let js: Vec<u32> = (jmin..=jmax).collect();
    let counts: Vec<BigInt> = js.par_iter().map(|&j| covering_number_dyadic(s, j)).collect();
    let xs: Vec<f64> = js.iter().map(|&j| j as f64).collect();
    let ys: Vec<f64> = counts.iter().map(log2_big).collect();
    let (slope, _, residual) = least_squares(&xs, &ys);
    let n = xs.len();
    let secant_slope = (ys[n - 1] - ys[0]) / (xs[n - 1] - xs[0]);
    let mut max_subrange_slope = f64::NEG_INFINITY;
    for i in 0..n {
        for k in (i + 4)..n {
            max_subrange_slope = max_subrange_slope.max(least_squares(&xs[i..=k], &ys[i..=k]).0);
        }
    }
    Ok(MinkowskiFit {
        set: s.descriptor(),
        jmin,
        jmax,
        counts: counts.iter().map(|c| c.to_string()).collect(),
        log2_counts: ys,
        slope,
        residual,
        secant_slope,
        max_subrange_slope,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct SpectrumRow {
    pub j: u32,
    /// Window width is `2^{-window_exp}`.
    pub window_exp: u32,
    pub max_count: u64,
    /// `log2 max_count / (j − window_exp)`.
    pub ratio: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct SpectrumFit {
    pub set: String,
    pub theta: f64,
    pub rows: Vec<SpectrumRow>,
    /// Least-squares slope of `log2 max_count` against `j − window_exp`.
    pub slope: f64,
}

/// Largest count of cover endpoints in a window `[t_ν, t_ν + 2^{-w})`; equals `max_I N(E ∩ I, 2^{-j})` up to one.
fn max_window_count(starts: &[BigInt], width: &BigInt) -> u64 {
    let mut best = 0usize;
    let mut hi = 0usize;
    for lo in 0..starts.len() {
        if hi < lo {
            hi = lo;
        }
        let limit = &starts[lo] + width;
        while hi + 1 < starts.len() && starts[hi + 1] < limit {
            hi += 1;
        }
        best = best.max(hi - lo + 1);
    }
    best as u64
}

pub fn assouad_spectrum_fit(s: &DilationSet, theta: &Rational, jmin: u32, jmax: u32) -> Result<SpectrumFit> {
    if !theta.is_positive() || theta >= &Rational::one() {
        return Err(Error::OutOfRange(format!("theta = {} not in (0, 1)", fmt_rational(theta))));
    }
    if jmax < jmin + 1 {
        return Err(Error::InsufficientScales(format!("need at least two scales, got [{jmin}, {jmax}]")));
    }
    if s.is_empty() {
        return Err(Error::EmptyWindows("empty set".into()));
    }
    let th = crate::geometry::to_f64(theta);
    let rows: Vec<SpectrumRow> = (jmin..=jmax)
        .into_par_iter()
        .map(|j| {
            let (ends, e) = s.at_scale(j);
            let starts = greedy_starts(&ends, &pow2(e - j));
            let w = ((j as f64) * th).round() as u32;
            let w = w.min(j.saturating_sub(1));
            let max_count = max_window_count(&starts, &pow2(e - w));
            SpectrumRow {
                j,
                window_exp: w,
                max_count,
                ratio: (max_count as f64).log2() / (j - w) as f64,
            }
        })
        .collect();
    let xs: Vec<f64> = rows.iter().map(|r| (r.j - r.window_exp) as f64).collect();
    let ys: Vec<f64> = rows.iter().map(|r| (r.max_count as f64).log2()).collect();
    let slope = least_squares(&xs, &ys).0;
    Ok(SpectrumFit {
        set: s.descriptor(),
        theta: th,
        rows,
        slope,
    })
}

/// Scales `j` in `[jmin, jmax)` where `N(2^{-j}) <= N(2^{-j-1}) <= 2 N(2^{-j}) + 1` fails.
pub fn monotonicity_violations(s: &DilationSet, jmin: u32, jmax: u32) -> Vec<u32> {
    (jmin..jmax)
        .filter(|&j| {
            let a = covering_number_dyadic(s, j);
            let b = covering_number_dyadic(s, j + 1);
            !(a <= b && b <= &a * 2 + 1)
        })
        .collect()
}

/// Measure of the intersection of two sorted disjoint interval lists.
pub fn intersection_measure(x: &[(Rational, Rational)], y: &[(Rational, Rational)]) -> Rational {
    let (mut i, mut k) = (0, 0);
    let mut total = Rational::zero();
    while i < x.len() && k < y.len() {
        let lo = (&x[i].0).max(&y[k].0);
        let hi = (&x[i].1).min(&y[k].1);
        if hi > lo {
            total += hi - lo;
        }
        if x[i].1 < y[k].1 {
            i += 1;
        } else {
            k += 1;
        }
    }
    total
}

#[derive(Clone, Debug, Serialize)]
pub struct TranslationCheck {
    pub shifts_checked: u64,
    /// Shifts `l` (in units of `2^{-a}`) where `|E_1 ∩ (E_1 + l 2^{-a})| < |E_1| / 2`.
    pub failures: Vec<u64>,
}

/// Checks `|E_1 ∩ (E_1 + l 2^{-a})| >= |E_1| / 2` for `1 <= l <= 2^{a-1}` on the first generation.
pub fn translation_structure(a: u32, b: u32) -> Result<TranslationCheck> {
    let e1 = DilationSet::cantor(a, b, 1)?;
    let half = e1.measure() / BigInt::from(2);
    let iv = e1.intervals();
    let n = 1u64 << (a - 1);
    let failures = (1..=n)
        .filter(|&l| {
            let shift = Rational::new(BigInt::from(l), pow2(a));
            let moved = e1.translate(&shift).unwrap();
            intersection_measure(&iv, &moved) < half
        })
        .collect();
    Ok(TranslationCheck {
        shifts_checked: n,
        failures,
    })
}
