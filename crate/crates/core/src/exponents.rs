//! Named vertices, `q_γ`, `q_LS` and critical interpolation parameters as exact functions of `(d, β, γ)`.

use num_traits::{One, Signed, Zero};
use serde::Serialize;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::geometry::{fmt_rational, int, rat, Rational, Triple};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct DimensionParams {
    pub d: u32,
    pub beta: Rational,
    pub gamma: Rational,
}

impl DimensionParams {
    /// Checks `d >= 2`, `0 < β <= γ <= 1`.
    pub fn new(d: u32, beta: Rational, gamma: Rational) -> Result<Self> {
        let p = DimensionParams::relaxed(d, beta, gamma)?;
        if !p.beta.is_positive() || p.beta > Rational::one() {
            return Err(Error::InvalidParams(format!("beta = {} not in (0,1]", fmt_rational(&p.beta))));
        }
        if p.gamma < p.beta || p.gamma > Rational::one() {
            return Err(Error::InvalidParams(format!(
                "gamma = {} not in [beta, 1]",
                fmt_rational(&p.gamma)
            )));
        }
        Ok(p)
    }

    /// Only `d >= 2` is enforced; used for diagnostics at degenerate parameters.
    pub fn relaxed(d: u32, beta: Rational, gamma: Rational) -> Result<Self> {
        if d < 2 {
            return Err(Error::InvalidParams(format!("d = {d} < 2")));
        }
        Ok(DimensionParams { d, beta, gamma })
    }

    pub fn from_ints(d: u32, beta: (i64, i64), gamma: (i64, i64)) -> Self {
        DimensionParams::new(d, rat(beta.0, beta.1), rat(gamma.0, gamma.1)).expect("valid parameters")
    }

    pub fn dr(&self) -> Rational {
        int(self.d as i64)
    }

    pub fn with_gamma(&self, gamma: Rational) -> Self {
        DimensionParams {
            d: self.d,
            beta: self.beta.clone(),
            gamma,
        }
    }
}

impl fmt::Display for DimensionParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "d={}, beta={}, gamma={}", self.d, fmt_rational(&self.beta), fmt_rational(&self.gamma))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Vertex {
    Q1,
    Q2,
    Q3,
    Q4,
    Q2tilde,
    Q3tilde,
    Q4tilde,
    Q5,
    Q6,
    QA,
    QB,
    QC,
    QD,
    QD1,
}

impl Vertex {
    pub const ALL: [Vertex; 14] = [
        Vertex::Q1,
        Vertex::Q2,
        Vertex::Q3,
        Vertex::Q4,
        Vertex::Q2tilde,
        Vertex::Q3tilde,
        Vertex::Q4tilde,
        Vertex::Q5,
        Vertex::Q6,
        Vertex::QA,
        Vertex::QB,
        Vertex::QC,
        Vertex::QD,
        Vertex::QD1,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Vertex::Q1 => "Q1",
            Vertex::Q2 => "Q2",
            Vertex::Q3 => "Q3",
            Vertex::Q4 => "Q4",
            Vertex::Q2tilde => "Q2tilde",
            Vertex::Q3tilde => "Q3tilde",
            Vertex::Q4tilde => "Q4tilde",
            Vertex::Q5 => "Q5",
            Vertex::Q6 => "Q6",
            Vertex::QA => "QA",
            Vertex::QB => "QB",
            Vertex::QC => "QC",
            Vertex::QD => "QD",
            Vertex::QD1 => "QD1",
        }
    }
}

impl fmt::Display for Vertex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Vertex {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Vertex::ALL
            .iter()
            .copied()
            .find(|v| v.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::Parse(format!("unknown vertex {s:?}")))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NamedValue {
    pub name: Vertex,
    pub value: Triple,
    /// Some coordinate lies outside `[0, 1]`.
    pub flagged: bool,
}

fn div(num: Rational, den: Rational, what: &str) -> Result<Rational> {
    if den.is_zero() {
        Err(Error::VanishingDenominator(what.to_string()))
    } else {
        Ok(num / den)
    }
}

pub fn inv_q_gamma(p: &DimensionParams) -> Rational {
    let d1 = p.dr() - int(1);
    &d1 / (int(2) * (&d1 + int(2) * &p.gamma))
}

pub fn inv_q_ls(p: &DimensionParams) -> Rational {
    let d1 = p.dr() - int(1);
    &d1 / (int(2) * (&d1 + &p.beta))
}

pub fn q_gamma(p: &DimensionParams) -> Rational {
    inv_q_gamma(p).recip()
}

pub fn q_ls(p: &DimensionParams) -> Rational {
    inv_q_ls(p).recip()
}

fn dd(p: &DimensionParams) -> Rational {
    let d = p.dr();
    let (b, g) = (&p.beta, &p.gamma);
    &d * &d - b * &d - int(1) + b + int(2) * g - int(2) * b * g
}

pub fn named_vertex(name: Vertex, p: &DimensionParams) -> Result<NamedValue> {
    let d = p.dr();
    let d1 = &d - int(1);
    let (b, g) = (&p.beta, &p.gamma);
    let one = Rational::one;
    let zero = Rational::zero;
    let value = match name {
        Vertex::Q1 => Triple::zero(),
        Vertex::Q2 | Vertex::Q2tilde => {
            let a = div(d1.clone(), b + &d1, "Q2: beta+d-1")?;
            let ir = if name == Vertex::Q2 { a.clone() } else { zero() };
            Triple::new(a.clone(), a, ir)
        }
        Vertex::Q3 | Vertex::Q3tilde => {
            let den = &d + int(1) - b;
            let ip = div(&d - b, den.clone(), "Q3: d+1-beta")?;
            let iq = div(one(), den, "Q3: d+1-beta")?;
            let ir = if name == Vertex::Q3 { ip.clone() } else { zero() };
            Triple::new(ip, iq, ir)
        }
        Vertex::Q4 | Vertex::Q4tilde => {
            let den = &d * &d - int(1) + int(2) * g;
            let ip = div(&d * &d1, den.clone(), "Q4: d^2-1+2gamma")?;
            let iq = div(d1.clone(), den, "Q4: d^2-1+2gamma")?;
            let ir = if name == Vertex::Q4 { ip.clone() } else { zero() };
            Triple::new(ip, iq, ir)
        }
        Vertex::Q5 => {
            let c = div(d1.clone(), int(2) * (&d1 + b), "Q5: d-1+beta")?;
            let ir = div(d1.clone(), int(2) * b, "Q5: beta")?;
            Triple::new(c.clone(), c, ir)
        }
        Vertex::Q6 => {
            let ir = div(d1.clone(), int(2) * b, "Q6: beta")?;
            Triple::new(rat(1, 2), rat(1, 2), ir)
        }
        Vertex::QA => {
            let a = div(b.clone(), &d1 + b, "QA: d-1+beta")?;
            Triple::new(a.clone(), a, one())
        }
        Vertex::QB => {
            let a = div(&d1 - b, d1.clone(), "QB: d-1")?;
            Triple::new(a.clone(), a, one())
        }
        Vertex::QC => {
            let den = &d + int(1) - int(2) * b;
            let ip = div(&d - int(2) * b, den.clone(), "QC: d+1-2beta")?;
            let iq = div(one(), den, "QC: d+1-2beta")?;
            Triple::new(ip, iq, one())
        }
        Vertex::QD => {
            let den = dd(p);
            let ip = div(&d1 * (&d - b) - int(2) * b * g, den.clone(), "QD: d^2-beta d-1+beta+2gamma-2beta gamma")?;
            let iq = div(d1.clone(), den, "QD: d^2-beta d-1+beta+2gamma-2beta gamma")?;
            Triple::new(ip, iq, one())
        }
        Vertex::QD1 => {
            let a = div(d1.clone(), dd(p), "QD1: d^2-beta d-1+beta+2gamma-2beta gamma")?;
            Triple::new(a.clone(), a, one())
        }
    };
    let flagged = !value.in_unit_cube();
    Ok(NamedValue { name, value, flagged })
}

/// Shorthand for the value of a named vertex, ignoring the range flag.
pub fn vertex(name: Vertex, p: &DimensionParams) -> Result<Triple> {
    named_vertex(name, p).map(|v| v.value)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum ThetaCase {
    Q4,
    QD,
    Q2,
    QB,
    Q3,
    QC,
    QAls,
    QDls,
    Q4ls,
}

impl ThetaCase {
    pub const ALL: [ThetaCase; 9] = [
        ThetaCase::Q4,
        ThetaCase::QD,
        ThetaCase::Q2,
        ThetaCase::QB,
        ThetaCase::Q3,
        ThetaCase::QC,
        ThetaCase::QAls,
        ThetaCase::QDls,
        ThetaCase::Q4ls,
    ];

    /// Vertex reproduced by the interpolation, evaluated at `γ = β` for the LS cases.
    pub fn target(self) -> Vertex {
        match self {
            ThetaCase::Q4 | ThetaCase::Q4ls => Vertex::Q4,
            ThetaCase::QD | ThetaCase::QDls => Vertex::QD,
            ThetaCase::Q2 => Vertex::Q2,
            ThetaCase::QB => Vertex::QB,
            ThetaCase::Q3 => Vertex::Q3,
            ThetaCase::QC => Vertex::QC,
            ThetaCase::QAls => Vertex::QA,
        }
    }

    /// Whether the vertex is reached after raising `1/r` to 1.
    pub fn holder_time(self) -> bool {
        matches!(
            self,
            ThetaCase::QD | ThetaCase::QB | ThetaCase::QC | ThetaCase::QAls | ThetaCase::QDls
        )
    }

    pub fn uses_ls(self) -> bool {
        matches!(self, ThetaCase::QAls | ThetaCase::QDls | ThetaCase::Q4ls)
    }
}

pub fn critical_theta(case: ThetaCase, p: &DimensionParams) -> Result<Rational> {
    let d = p.dr();
    let d1 = &d - int(1);
    let (b, g) = (&p.beta, &p.gamma);
    let two = || int(2);
    match case {
        ThetaCase::Q4 => {
            let num = &d1 * &d1 - two() * g;
            div(num.clone(), two() * (&d1 + two() * g) + num, "theta_Q4")
        }
        ThetaCase::QD => div(
            two() * (&d1 + two() * g),
            &d * &d - b * &d + b + two() * g - two() * b * g - int(1),
            "theta_QD",
        ),
        ThetaCase::Q2 => div(&d1 - b, b + &d1, "theta_Q2"),
        ThetaCase::QB => div(&d1 - two() * b, d1.clone(), "theta_QB"),
        ThetaCase::Q3 => div(&d1 - b, &d + int(1) - b, "theta_Q3"),
        ThetaCase::QC => div(&d1 - two() * b, &d + int(1) - two() * b, "theta_QC"),
        ThetaCase::QAls => div(two() * b, d1.clone(), "theta_QA_ls"),
        ThetaCase::QDls => div(
            two() * (&d1 + b),
            &d1 * &d1 + (two() - b) * &d1 + two() * b * (int(1) - b),
            "theta_QD_ls",
        ),
        ThetaCase::Q4ls => div(two() * (&d1 + b), &d * &d - int(1) + two() * b, "theta_Q4_ls"),
    }
}

pub fn fmt_triple(t: &Triple) -> [String; 3] {
    t.to_strings()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(d: u32, b: (i64, i64), g: (i64, i64)) -> DimensionParams {
        DimensionParams::from_ints(d, b, g)
    }

    #[test]
    fn q2_value() {
        let v = vertex(Vertex::Q2, &p(4, (7, 10), (7, 10))).unwrap();
        assert_eq!(v, Triple::diag(rat(30, 37)));
    }

    #[test]
    fn q1_origin() {
        assert_eq!(vertex(Vertex::Q1, &p(3, (1, 3), (1, 2))).unwrap(), Triple::zero());
    }

    #[test]
    fn qd1_equals_qa_classical() {
        for d in 2..7 {
            let pp = p(d, (1, 1), (1, 1));
            let expect = Triple::new(rat(1, d as i64), rat(1, d as i64), int(1));
            assert_eq!(vertex(Vertex::QD1, &pp).unwrap(), expect);
            assert_eq!(vertex(Vertex::QA, &pp).unwrap(), expect);
        }
    }

    #[test]
    fn q_exponents() {
        for d in 2..7i64 {
            let pp = p(d as u32, (1, 1), (1, 1));
            assert_eq!(q_gamma(&pp), rat(2 * (d + 1), d - 1));
            assert_eq!(q_ls(&pp), rat(2 * d, d - 1));
        }
        assert_eq!(inv_q_gamma(&p(2, (1, 2), (1, 2))), rat(1, 4));
    }

    #[test]
    fn theta_examples() {
        assert_eq!(critical_theta(ThetaCase::Q2, &p(4, (7, 10), (7, 10))).unwrap(), rat(23, 37));
        assert_eq!(critical_theta(ThetaCase::QB, &p(4, (1, 1), (1, 1))).unwrap(), rat(1, 3));
        // beta = (d-1)/2 at d=3 is 1
        assert!(critical_theta(ThetaCase::QB, &p(3, (1, 1), (1, 1))).unwrap().is_zero());
    }

    #[test]
    fn degenerate_beta() {
        let pp = DimensionParams::relaxed(4, int(0), int(0)).unwrap();
        assert!(matches!(named_vertex(Vertex::Q5, &pp), Err(Error::VanishingDenominator(_))));
        assert!(matches!(named_vertex(Vertex::Q6, &pp), Err(Error::VanishingDenominator(_))));
        assert!(DimensionParams::new(4, int(0), int(0)).is_err());
    }

    #[test]
    fn flags_out_of_cube() {
        let v = named_vertex(Vertex::Q6, &p(4, (7, 10), (7, 10))).unwrap();
        assert!(v.flagged);
        assert!(!named_vertex(Vertex::Q6, &p(2, (7, 10), (7, 10))).unwrap().flagged);
    }

    #[test]
    fn parse_names() {
        assert_eq!("q4tilde".parse::<Vertex>().unwrap(), Vertex::Q4tilde);
        assert!("Q9".parse::<Vertex>().is_err());
    }
}
