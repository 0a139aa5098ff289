use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use crate::error::{Error, Result};

pub type Rational = BigRational;

pub fn rat(n: i64, d: i64) -> Rational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

pub fn int(n: i64) -> Rational {
    BigRational::from_integer(BigInt::from(n))
}

pub fn to_f64(x: &Rational) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

/// Parses `"7/10"`, `"-3"`, or a finite decimal such as `"0.7"`.
pub fn parse_rational(s: &str) -> Result<Rational> {
    let s = s.trim();
    let bad = || Error::Parse(format!("not a rational: {s:?}"));
    if let Some((n, d)) = s.split_once('/') {
        let n: BigInt = n.trim().parse().map_err(|_| bad())?;
        let d: BigInt = d.trim().parse().map_err(|_| bad())?;
        if d.is_zero() {
            return Err(Error::Parse(format!("zero denominator in {s:?}")));
        }
        return Ok(BigRational::new(n, d));
    }
    if let Some((whole, frac)) = s.split_once('.') {
        if frac.is_empty() || !frac.chars().all(|c| c.is_ascii_digit()) {
            return Err(bad());
        }
        let neg = whole.starts_with('-');
        let w: BigInt = match whole.trim_start_matches(['-', '+']) {
            "" => BigInt::zero(),
            w => w.parse().map_err(|_| bad())?,
        };
        let f: BigInt = frac.parse().map_err(|_| bad())?;
        let scale = num_traits::pow(BigInt::from(10), frac.len());
        let mag = BigRational::new(w * &scale + f, scale);
        return Ok(if neg { -mag } else { mag });
    }
    let n: BigInt = s.parse().map_err(|_| bad())?;
    Ok(BigRational::from_integer(n))
}

pub fn fmt_rational(x: &Rational) -> String {
    if x.is_integer() {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

pub fn gcd_all(xs: &[BigInt]) -> BigInt {
    xs.iter().fold(BigInt::zero(), |g, x| g.gcd(x))
}

pub fn lcm_denoms(xs: &[&Rational]) -> BigInt {
    xs.iter().fold(BigInt::one(), |l, x| l.lcm(x.denom()))
}

/// A point `(1/p, 1/q, 1/r)`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Triple {
    pub ip: Rational,
    pub iq: Rational,
    pub ir: Rational,
}

impl Triple {
    pub fn new(ip: Rational, iq: Rational, ir: Rational) -> Self {
        Triple { ip, iq, ir }
    }

    pub fn from_ints(c: [(i64, i64); 3]) -> Self {
        Triple::new(rat(c[0].0, c[0].1), rat(c[1].0, c[1].1), rat(c[2].0, c[2].1))
    }

    pub fn zero() -> Self {
        Triple::new(Rational::zero(), Rational::zero(), Rational::zero())
    }

    pub fn diag(a: Rational) -> Self {
        Triple::new(a.clone(), a.clone(), a)
    }

    pub fn coords(&self) -> [&Rational; 3] {
        [&self.ip, &self.iq, &self.ir]
    }

    pub fn get(&self, k: usize) -> &Rational {
        self.coords()[k]
    }

    pub fn scale(&self, s: &Rational) -> Triple {
        Triple::new(&self.ip * s, &self.iq * s, &self.ir * s)
    }

    pub fn dot(&self, n: &[Rational; 3]) -> Rational {
        &self.ip * &n[0] + &self.iq * &n[1] + &self.ir * &n[2]
    }

    pub fn dot_int(&self, n: &[BigInt; 3]) -> Rational {
        &self.ip * &n[0] + &self.iq * &n[1] + &self.ir * &n[2]
    }

    pub fn cross(&self, o: &Triple) -> Triple {
        Triple::new(
            &self.iq * &o.ir - &self.ir * &o.iq,
            &self.ir * &o.ip - &self.ip * &o.ir,
            &self.ip * &o.iq - &self.iq * &o.ip,
        )
    }

    pub fn is_zero(&self) -> bool {
        self.ip.is_zero() && self.iq.is_zero() && self.ir.is_zero()
    }

    pub fn in_unit_cube(&self) -> bool {
        self.coords()
            .iter()
            .all(|c| !c.is_negative() && **c <= Rational::one())
    }

    pub fn to_f64(&self) -> [f64; 3] {
        [to_f64(&self.ip), to_f64(&self.iq), to_f64(&self.ir)]
    }

    pub fn to_strings(&self) -> [String; 3] {
        [
            fmt_rational(&self.ip),
            fmt_rational(&self.iq),
            fmt_rational(&self.ir),
        ]
    }

    /// `theta * a + (1 - theta) * b`, with no range check on `theta`.
    pub fn affine(a: &Triple, b: &Triple, theta: &Rational) -> Triple {
        let one_m = Rational::one() - theta;
        &a.scale(theta) + &b.scale(&one_m)
    }

    pub fn parse(s: &str) -> Result<Triple> {
        let parts: Vec<&str> = s.split(',').collect();
        if parts.len() != 3 {
            return Err(Error::Parse(format!("expected three comma-separated rationals, got {s:?}")));
        }
        Ok(Triple::new(
            parse_rational(parts[0])?,
            parse_rational(parts[1])?,
            parse_rational(parts[2])?,
        ))
    }
}

impl fmt::Debug for Triple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let [a, b, c] = self.to_strings();
        write!(f, "({a}, {b}, {c})")
    }
}

impl fmt::Display for Triple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

impl Add for &Triple {
    type Output = Triple;
    fn add(self, o: &Triple) -> Triple {
        Triple::new(&self.ip + &o.ip, &self.iq + &o.iq, &self.ir + &o.ir)
    }
}

impl Sub for &Triple {
    type Output = Triple;
    fn sub(self, o: &Triple) -> Triple {
        Triple::new(&self.ip - &o.ip, &self.iq - &o.iq, &self.ir - &o.ir)
    }
}

impl Mul<&Rational> for &Triple {
    type Output = Triple;
    fn mul(self, s: &Rational) -> Triple {
        self.scale(s)
    }
}

impl Neg for &Triple {
    type Output = Triple;
    fn neg(self) -> Triple {
        Triple::new(-&self.ip, -&self.iq, -&self.ir)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_forms() {
        assert_eq!(parse_rational("7/10").unwrap(), rat(7, 10));
        assert_eq!(parse_rational("14/20").unwrap(), rat(7, 10));
        assert_eq!(parse_rational("0.7").unwrap(), rat(7, 10));
        assert_eq!(parse_rational("-1.25").unwrap(), rat(-5, 4));
        assert_eq!(parse_rational("3").unwrap(), int(3));
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("x").is_err());
    }

    #[test]
    fn lowest_terms() {
        let x = rat(6, -8);
        assert_eq!(x.numer(), &BigInt::from(-3));
        assert_eq!(x.denom(), &BigInt::from(4));
        assert_eq!(fmt_rational(&x), "-3/4");
    }

    #[test]
    fn triple_ops() {
        let a = Triple::from_ints([(1, 1), (0, 1), (0, 1)]);
        let b = Triple::from_ints([(0, 1), (1, 1), (0, 1)]);
        assert_eq!(a.cross(&b), Triple::from_ints([(0, 1), (0, 1), (1, 1)]));
        let m = Triple::affine(&a, &b, &rat(1, 4));
        assert_eq!(m, Triple::from_ints([(1, 4), (3, 4), (0, 1)]));
        assert_eq!(Triple::parse("1/2, 1/3,0").unwrap(), Triple::from_ints([(1, 2), (1, 3), (0, 1)]));
    }
}
