use num_traits::{One, Zero};
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::geometry::{fmt_rational, parse_rational, to_f64, Rational};

/// Variation exponent `r ∈ [1, ∞]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Exponent {
    Finite(Rational),
    Infinity,
}

impl Exponent {
    /// From `1/r`; zero means `r = ∞`.
    pub fn from_reciprocal(ir: &Rational) -> Result<Exponent> {
        if ir.is_zero() {
            Ok(Exponent::Infinity)
        } else if ir > &Rational::zero() && ir <= &Rational::one() {
            Ok(Exponent::Finite(ir.recip()))
        } else {
            Err(Error::InvalidParams(format!("1/r = {} not in [0, 1]", fmt_rational(ir))))
        }
    }

    pub fn reciprocal(&self) -> Rational {
        match self {
            Exponent::Finite(r) => r.recip(),
            Exponent::Infinity => Rational::zero(),
        }
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            Exponent::Finite(r) => to_f64(r),
            Exponent::Infinity => f64::INFINITY,
        }
    }
}

impl fmt::Display for Exponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Exponent::Finite(r) => f.write_str(&fmt_rational(r)),
            Exponent::Infinity => f.write_str("inf"),
        }
    }
}

impl FromStr for Exponent {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "inf" | "infinity" | "∞" => Ok(Exponent::Infinity),
            t => Ok(Exponent::Finite(parse_rational(t)?)),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SampledVariationInput {
    pub times: Vec<f64>,
    pub values: Vec<f64>,
}

impl SampledVariationInput {
    pub fn new(times: Vec<f64>, values: Vec<f64>) -> Result<SampledVariationInput> {
        if times.len() != values.len() {
            return Err(Error::DimensionMismatch(format!("{} times, {} values", times.len(), values.len())));
        }
        if times.is_empty() {
            return Err(Error::InvalidParams("no samples".into()));
        }
        if times.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::InvalidParams("times must be strictly increasing".into()));
        }
        Ok(SampledVariationInput { times, values })
    }
}

/// Endpoints and strict turning points; for `r >= 1` the optimal subsequence lives here.
pub fn turning_points(values: &[f64]) -> Vec<f64> {
    let mut v: Vec<f64> = Vec::with_capacity(values.len());
    for &x in values {
        if v.last() != Some(&x) {
            v.push(x);
        }
    }
    if v.len() <= 2 {
        return v;
    }
    let mut out = vec![v[0]];
    for k in 1..v.len() - 1 {
        let (a, b, c) = (v[k - 1], v[k], v[k + 1]);
        if (b - a) * (c - b) < 0.0 {
            out.push(b);
        }
    }
    out.push(v[v.len() - 1]);
    out
}

/// `sup` over subsequences of `(Σ |Δ|^r)^{1/r}`; `r = ∞` gives the largest increment.
pub fn variation_values(values: &[f64], r: f64) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::InvalidParams("no samples".into()));
    }
    if !(r >= 1.0) {
        return Err(Error::InvalidParams(format!("r = {r} < 1")));
    }
    if r.is_infinite() {
        let lo = values.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        return Ok(hi - lo);
    }
    let v = turning_points(values);
    if r == 1.0 {
        return Ok(v.windows(2).map(|w| (w[1] - w[0]).abs()).sum());
    }
    let mut best = vec![0.0f64; v.len()];
    let mut top = 0.0f64;
    for k in 1..v.len() {
        let mut b = 0.0f64;
        for i in 0..k {
            b = b.max(best[i] + (v[k] - v[i]).abs().powf(r));
        }
        best[k] = b;
        top = top.max(b);
    }
    Ok(top.powf(1.0 / r))
}

pub fn variation(input: &SampledVariationInput, r: &Exponent) -> Result<f64> {
    if let Exponent::Finite(x) = r {
        if x < &Rational::one() {
            return Err(Error::InvalidParams(format!("r = {} < 1", fmt_rational(x))));
        }
    }
    variation_values(&input.values, r.to_f64())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::rat;
    use proptest::prelude::*;

    fn brute(values: &[f64], r: f64) -> f64 {
        let n = values.len();
        let mut best = 0.0f64;
        for mask in 1u32..(1 << n) {
            let sub: Vec<f64> = (0..n).filter(|i| mask & (1 << i) != 0).map(|i| values[i]).collect();
            let s = if r.is_infinite() {
                sub.windows(2).map(|w| (w[1] - w[0]).abs()).fold(0.0, f64::max)
            } else {
                sub.windows(2).map(|w| (w[1] - w[0]).abs().powf(r)).sum::<f64>().powf(1.0 / r)
            };
            best = best.max(s);
        }
        best
    }

    fn input(v: &[f64]) -> SampledVariationInput {
        SampledVariationInput::new((0..v.len()).map(|i| 1.0 + i as f64 / v.len() as f64).collect(), v.to_vec()).unwrap()
    }

    #[test]
    fn alternating() {
        let x = input(&[0.0, 1.0, 0.0, 1.0]);
        assert_eq!(variation(&x, &Exponent::Finite(rat(1, 1))).unwrap(), 3.0);
        assert_eq!(variation(&x, &Exponent::Infinity).unwrap(), 1.0);
        assert!((variation(&x, &Exponent::Finite(rat(2, 1))).unwrap() - 3f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn rejects() {
        let x = input(&[0.0, 1.0]);
        assert!(variation(&x, &Exponent::Finite(rat(1, 2))).is_err());
        assert!(SampledVariationInput::new(vec![1.0, 1.0], vec![0.0, 0.0]).is_err());
        assert!(SampledVariationInput::new(vec![1.0], vec![0.0, 0.0]).is_err());
    }

    #[test]
    fn parse_exponent() {
        assert_eq!("inf".parse::<Exponent>().unwrap(), Exponent::Infinity);
        assert_eq!("3/2".parse::<Exponent>().unwrap(), Exponent::Finite(rat(3, 2)));
        assert_eq!(Exponent::from_reciprocal(&rat(0, 1)).unwrap(), Exponent::Infinity);
        assert_eq!(Exponent::from_reciprocal(&rat(1, 2)).unwrap().to_string(), "2");
    }

    #[test]
    fn single_sample() {
        assert_eq!(variation_values(&[5.0], 2.0).unwrap(), 0.0);
    }

    proptest! {
        #[test]
        fn dp_matches_enumeration(v in proptest::collection::vec(-3.0f64..3.0, 1..=12)) {
            for r in [1.0, 1.5, 2.0, 4.0, f64::INFINITY] {
                let a = variation_values(&v, r).unwrap();
                let b = brute(&v, r);
                prop_assert!((a - b).abs() <= 1e-9 * (1.0 + b), "r={} {} {}", r, a, b);
            }
        }

        #[test]
        fn monotone_in_r(v in proptest::collection::vec(-3.0f64..3.0, 1..40)) {
            let rs = [1.0, 1.5, 2.0, 4.0, f64::INFINITY];
            let vals: Vec<f64> = rs.iter().map(|&r| variation_values(&v, r).unwrap()).collect();
            for w in vals.windows(2) {
                prop_assert!(w[0] + 1e-12 >= w[1]);
            }
        }

        #[test]
        fn controls_supremum(v in proptest::collection::vec(-3.0f64..3.0, 1..40)) {
            let sup = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
            for r in [1.0, 2.0, f64::INFINITY] {
                prop_assert!(sup <= v[0].abs() + variation_values(&v, r).unwrap() + 1e-12);
            }
        }
    }
}
