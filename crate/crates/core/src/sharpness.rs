//! Necessary conditions, vertex equality tables and facet classification.

use num_traits::{One, Signed, Zero};
use serde::Serialize;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::exponents::{named_vertex, DimensionParams, Vertex};
use crate::geometry::{int, Plane, Polytope3, Rational, Triple};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum TestId {
    #[serde(rename = "T_translation")]
    Translation,
    #[serde(rename = "T_shell")]
    Shell,
    #[serde(rename = "T_ball")]
    Ball,
    #[serde(rename = "T_knapp")]
    Knapp,
    #[serde(rename = "T_assouad_knapp")]
    AssouadKnapp,
    #[serde(rename = "T_multishell")]
    MultiShell,
    #[serde(rename = "T_multiball")]
    MultiBall,
    #[serde(rename = "T_multiknapp")]
    MultiKnapp,
    #[serde(rename = "T_assouad_multiknapp")]
    AssouadMultiKnapp,
}

impl TestId {
    pub const ALL: [TestId; 9] = [
        TestId::Translation,
        TestId::Shell,
        TestId::Ball,
        TestId::Knapp,
        TestId::AssouadKnapp,
        TestId::MultiShell,
        TestId::MultiBall,
        TestId::MultiKnapp,
        TestId::AssouadMultiKnapp,
    ];

    pub fn name(self) -> &'static str {
        match self {
            TestId::Translation => "T_translation",
            TestId::Shell => "T_shell",
            TestId::Ball => "T_ball",
            TestId::Knapp => "T_knapp",
            TestId::AssouadKnapp => "T_assouad_knapp",
            TestId::MultiShell => "T_multishell",
            TestId::MultiBall => "T_multiball",
            TestId::MultiKnapp => "T_multiknapp",
            TestId::AssouadMultiKnapp => "T_assouad_multiknapp",
        }
    }

    pub fn status(self) -> Status {
        if self == TestId::MultiBall {
            Status::Conjectural
        } else {
            Status::Proven
        }
    }

    pub fn needs_aux(self) -> bool {
        matches!(self, TestId::AssouadKnapp | TestId::AssouadMultiKnapp)
    }

    /// Face colour used by the figures.
    pub fn color(self) -> &'static str {
        match self {
            TestId::Translation => "#9e9e9e",
            TestId::Shell => "#f2d43a",
            TestId::Ball => "#3a78d4",
            TestId::Knapp | TestId::AssouadKnapp => "#f08cc0",
            TestId::MultiShell => "#f29a2e",
            TestId::MultiBall => "#d63b3b",
            TestId::MultiKnapp | TestId::AssouadMultiKnapp => "#4bb35c",
        }
    }
}

impl fmt::Display for TestId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for TestId {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let s = s.to_ascii_lowercase();
        let s = s.strip_prefix("t_").unwrap_or(&s);
        TestId::ALL
            .iter()
            .copied()
            .find(|t| &t.name()[2..] == s)
            .ok_or_else(|| Error::Parse(format!("unknown test {s:?}")))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Proven,
    Conjectural,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Classification {
    Strict,
    Equality,
    Violated,
}

/// `coef · (ip, iq, ir) + constant`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Affine {
    pub coef: [Rational; 3],
    pub constant: Rational,
}

impl Affine {
    fn new(a: Rational, b: Rational, c: Rational, k: Rational) -> Affine {
        Affine {
            coef: [a, b, c],
            constant: k,
        }
    }

    pub fn eval(&self, x: &Triple) -> Rational {
        x.dot(&self.coef) + &self.constant
    }

    pub fn scale(&self, s: &Rational) -> Affine {
        Affine {
            coef: [&self.coef[0] * s, &self.coef[1] * s, &self.coef[2] * s],
            constant: &self.constant * s,
        }
    }
}

/// Assouad-spectrum inputs `θ` and `γ_θ`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Aux {
    pub theta: Rational,
    pub gamma_theta: Rational,
}

impl Aux {
    /// `θ = 1 − β/γ`, `γ_θ = γ`.
    pub fn assouad_regular(p: &DimensionParams) -> Aux {
        Aux {
            theta: Rational::one() - &p.beta / &p.gamma,
            gamma_theta: p.gamma.clone(),
        }
    }
}

/// The half-space condition `lhs(x) <= rhs(x)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SharpnessTest {
    pub id: TestId,
    pub lhs: Affine,
    pub rhs: Affine,
    pub status: Status,
}

impl SharpnessTest {
    pub fn new(id: TestId, p: &DimensionParams, aux: Option<&Aux>) -> Result<SharpnessTest> {
        let d = p.dr();
        let d1 = &d - int(1);
        let b = &p.beta;
        let z = Rational::zero;
        let one = Rational::one;
        let half = |x: Rational| x / int(2);
        let aux = if id.needs_aux() {
            Some(aux.ok_or_else(|| Error::MissingAux(format!("{id} needs theta and gamma_theta")))?)
        } else {
            None
        };
        let (lhs, rhs) = match id {
            TestId::Translation => (Affine::new(z(), one(), z(), z()), Affine::new(one(), z(), z(), z())),
            TestId::Shell => (Affine::new(one(), z(), z(), z()), Affine::new(z(), d.clone(), z(), z())),
            TestId::Ball => (
                Affine::new(d.clone(), b - int(1), z(), z()),
                Affine::new(z(), z(), z(), d1.clone()),
            ),
            TestId::Knapp => (
                Affine::new(half(&d + int(1)), z(), z(), z()),
                Affine::new(z(), half(d1.clone()) + one() - b, z(), half(d1.clone())),
            ),
            TestId::AssouadKnapp => {
                let a = aux.unwrap();
                let om = one() - &a.theta;
                (
                    Affine::new(one() + &d1 * &om / int(2), z(), z(), z()),
                    Affine::new(
                        z(),
                        -(&om * &a.gamma_theta) + &d1 * (one() + &a.theta) / int(2) + one(),
                        z(),
                        &om * &d1 / int(2),
                    ),
                )
            }
            TestId::MultiShell => (
                Affine::new(one() - b, z(), b.clone(), z()),
                Affine::new(z(), d.clone(), z(), z()),
            ),
            TestId::MultiBall => (
                Affine::new(&d - b, z(), b.clone(), z()),
                Affine::new(z(), one() - b, z(), d1.clone()),
            ),
            TestId::MultiKnapp => (
                Affine::new(-b + half(d1.clone()) + one(), z(), b.clone(), z()),
                Affine::new(z(), half(d1.clone()) + one() - b, z(), half(d1.clone())),
            ),
            TestId::AssouadMultiKnapp => {
                let a = aux.unwrap();
                let om = one() - &a.theta;
                let og = &om * &a.gamma_theta;
                (
                    Affine::new(-og.clone() + one() + &om * &d1 / int(2), z(), og.clone(), z()),
                    Affine::new(
                        z(),
                        one() - og + &d1 * (one() + &a.theta) / int(2),
                        z(),
                        &om * &d1 / int(2),
                    ),
                )
            }
        };
        Ok(SharpnessTest {
            id,
            lhs,
            rhs,
            status: id.status(),
        })
    }

    /// `lhs − rhs`; nonpositive on the admissible side.
    pub fn gap(&self, x: &Triple) -> Rational {
        self.lhs.eval(x) - self.rhs.eval(x)
    }

    pub fn classify(&self, x: &Triple) -> Classification {
        let g = self.gap(x);
        if g.is_negative() {
            Classification::Strict
        } else if g.is_zero() {
            Classification::Equality
        } else {
            Classification::Violated
        }
    }

    /// The equality plane, outward (`n · x <= c` is the admissible side).
    pub fn plane(&self) -> Option<Plane> {
        let n = [
            &self.lhs.coef[0] - &self.rhs.coef[0],
            &self.lhs.coef[1] - &self.rhs.coef[1],
            &self.lhs.coef[2] - &self.rhs.coef[2],
        ];
        Plane::from_rational(n, &self.rhs.constant - &self.lhs.constant)
    }

    pub fn scaled(&self, s: &Rational) -> SharpnessTest {
        SharpnessTest {
            id: self.id,
            lhs: self.lhs.scale(s),
            rhs: self.rhs.scale(s),
            status: self.status,
        }
    }
}

pub fn evaluate(id: TestId, x: &Triple, p: &DimensionParams, aux: Option<&Aux>) -> Result<Classification> {
    Ok(SharpnessTest::new(id, p, aux)?.classify(x))
}

#[derive(Clone, Debug, Serialize)]
pub struct EqualityMatrix {
    pub params: String,
    pub theta: String,
    pub gamma_theta: String,
    pub tests: Vec<TestId>,
    pub vertices: Vec<Vertex>,
    /// `cells[t][v]`; `None` where the vertex is undefined at these parameters.
    pub cells: Vec<Vec<Option<Classification>>>,
}

impl EqualityMatrix {
    pub fn cell(&self, t: TestId, v: Vertex) -> Option<Classification> {
        let i = self.tests.iter().position(|&x| x == t)?;
        let j = self.vertices.iter().position(|&x| x == v)?;
        self.cells[i][j]
    }

    pub fn equality_set(&self, t: TestId) -> Vec<Vertex> {
        self.vertices
            .iter()
            .copied()
            .filter(|&v| self.cell(t, v) == Some(Classification::Equality))
            .collect()
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let mut header = vec!["test".to_string(), "status".to_string()];
        header.extend(self.vertices.iter().map(|v| v.name().to_string()));
        w.write_record(&header).map_err(|e| Error::Io(e.to_string()))?;
        for (t, row) in self.tests.iter().zip(&self.cells) {
            let mut rec = vec![t.name().to_string(), format!("{:?}", t.status()).to_lowercase()];
            rec.extend(row.iter().map(|c| match c {
                Some(Classification::Strict) => "strict".to_string(),
                Some(Classification::Equality) => "equality".to_string(),
                Some(Classification::Violated) => "violated".to_string(),
                None => "undefined".to_string(),
            }));
            w.write_record(&rec).map_err(|e| Error::Io(e.to_string()))?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Io(e.to_string()))?;
        String::from_utf8(bytes).map_err(|e| Error::Io(e.to_string()))
    }
}

/// Full test × vertex table; Assouad tests use `aux` or the Assouad-regular choice.
pub fn equality_matrix(p: &DimensionParams, aux: Option<&Aux>) -> Result<EqualityMatrix> {
    let aux = aux.cloned().unwrap_or_else(|| Aux::assouad_regular(p));
    let tests: Vec<SharpnessTest> = TestId::ALL
        .iter()
        .map(|&t| SharpnessTest::new(t, p, Some(&aux)))
        .collect::<Result<_>>()?;
    let values: Vec<Option<Triple>> = Vertex::ALL.iter().map(|&v| named_vertex(v, p).ok().map(|n| n.value)).collect();
    let cells = tests
        .iter()
        .map(|t| values.iter().map(|x| x.as_ref().map(|x| t.classify(x))).collect())
        .collect();
    Ok(EqualityMatrix {
        params: p.to_string(),
        theta: crate::geometry::fmt_rational(&aux.theta),
        gamma_theta: crate::geometry::fmt_rational(&aux.gamma_theta),
        tests: TestId::ALL.to_vec(),
        vertices: Vertex::ALL.to_vec(),
        cells,
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", content = "name", rename_all = "lowercase")]
pub enum FacetLabel {
    Test(TestId),
    /// Face of the unit cube, e.g. `r=inf` for `1/r = 0`.
    Domain(String),
    Unclassified,
}

impl FacetLabel {
    pub fn name(&self) -> String {
        match self {
            FacetLabel::Test(t) => t.name().to_string(),
            FacetLabel::Domain(s) => format!("domain_{s}"),
            FacetLabel::Unclassified => "unclassified".to_string(),
        }
    }

    /// Inverse of [`FacetLabel::name`]; anything unknown is unclassified.
    pub fn from_name(s: &str) -> FacetLabel {
        if let Some(rest) = s.strip_prefix("domain_") {
            FacetLabel::Domain(rest.to_string())
        } else if let Some(t) = TestId::ALL.iter().find(|t| t.name() == s) {
            FacetLabel::Test(*t)
        } else {
            FacetLabel::Unclassified
        }
    }

    pub fn color(&self) -> &'static str {
        match self {
            FacetLabel::Test(t) => t.color(),
            FacetLabel::Domain(_) => "#d9d9d9",
            FacetLabel::Unclassified => "#ffffff",
        }
    }
}

fn cube_face(p: &Plane) -> Option<String> {
    let c = p.canonical();
    let nz: Vec<usize> = (0..3).filter(|&k| !c.normal[k].is_zero()).collect();
    if nz.len() != 1 {
        return None;
    }
    let k = nz[0];
    let v = Rational::new(c.offset.clone(), c.normal[k].clone());
    let name = ["p", "q", "r"][k];
    if v.is_zero() {
        Some(format!("{name}=inf"))
    } else if v == Rational::one() {
        Some(format!("{name}=1"))
    } else {
        None
    }
}

/// Matches each facet plane exactly against the test planes; cube faces get domain labels.
pub fn classify_facets(poly: &Polytope3, p: &DimensionParams, aux: Option<&Aux>) -> Result<Vec<FacetLabel>> {
    let order = [
        TestId::Translation,
        TestId::Shell,
        TestId::Ball,
        TestId::Knapp,
        TestId::MultiShell,
        TestId::MultiBall,
        TestId::MultiKnapp,
    ];
    let mut tests: Vec<SharpnessTest> = order.iter().map(|&t| SharpnessTest::new(t, p, None)).collect::<Result<_>>()?;
    if let Some(a) = aux {
        tests.push(SharpnessTest::new(TestId::AssouadKnapp, p, Some(a))?);
        tests.push(SharpnessTest::new(TestId::AssouadMultiKnapp, p, Some(a))?);
    }
    let planes: Vec<(TestId, Option<Plane>)> = tests.iter().map(|t| (t.id, t.plane().map(|pl| pl.canonical()))).collect();
    Ok(poly
        .facets
        .iter()
        .map(|f| {
            let key = f.plane.canonical();
            if let Some((id, _)) = planes.iter().find(|(_, pl)| pl.as_ref() == Some(&key)) {
                FacetLabel::Test(*id)
            } else if let Some(name) = cube_face(&f.plane) {
                FacetLabel::Domain(name)
            } else {
                FacetLabel::Unclassified
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exponents::vertex;
    use crate::geometry::{hull3, rat};

    fn p47() -> DimensionParams {
        DimensionParams::from_ints(4, (7, 10), (7, 10))
    }

    #[test]
    fn shell_at_q4() {
        let p = p47();
        let q4 = vertex(Vertex::Q4, &p).unwrap();
        assert_eq!(evaluate(TestId::Shell, &q4, &p, None).unwrap(), Classification::Equality);
    }

    #[test]
    fn translation_at_origin() {
        let p = p47();
        assert_eq!(
            evaluate(TestId::Translation, &Triple::zero(), &p, None).unwrap(),
            Classification::Equality
        );
    }

    #[test]
    fn multishell_misses_qd1() {
        let p = p47();
        let x = vertex(Vertex::QD1, &p).unwrap();
        assert_ne!(evaluate(TestId::MultiShell, &x, &p, None).unwrap(), Classification::Equality);
    }

    #[test]
    fn aux_required() {
        let p = p47();
        assert!(matches!(
            evaluate(TestId::AssouadKnapp, &Triple::zero(), &p, None),
            Err(Error::MissingAux(_))
        ));
    }

    #[test]
    fn multiball_q6_d2() {
        let p = DimensionParams::from_ints(2, (7, 10), (7, 10));
        let x = vertex(Vertex::Q6, &p).unwrap();
        assert_eq!(evaluate(TestId::MultiBall, &x, &p, None).unwrap(), Classification::Equality);
        assert_eq!(TestId::MultiBall.status(), Status::Conjectural);
    }

    #[test]
    fn cube_faces_unclassified_or_domain() {
        let mut v = Vec::new();
        for a in 0..2 {
            for b in 0..2 {
                for c in 0..2 {
                    v.push(Triple::from_ints([(a, 1), (b, 1), (c, 1)]));
                }
            }
        }
        let cube = hull3(&v);
        let labels = classify_facets(&cube, &p47(), None).unwrap();
        assert!(labels.iter().all(|l| matches!(l, FacetLabel::Domain(_))));
        let tilted = hull3(&[
            Triple::zero(),
            Triple::from_ints([(1, 1), (0, 1), (0, 1)]),
            Triple::from_ints([(0, 1), (0, 1), (1, 1)]),
            Triple::from_ints([(1, 3), (1, 5), (1, 7)]),
        ]);
        let labels = classify_facets(&tilted, &p47(), None).unwrap();
        assert!(labels.contains(&FacetLabel::Unclassified));
    }

    #[test]
    fn parse_ids() {
        assert_eq!("T_multishell".parse::<TestId>().unwrap(), TestId::MultiShell);
        assert_eq!("knapp".parse::<TestId>().unwrap(), TestId::Knapp);
    }

    #[test]
    fn scaling_preserves_classification() {
        let p = p47();
        let t = SharpnessTest::new(TestId::Knapp, &p, None).unwrap();
        let s = t.scaled(&rat(7, 3));
        for v in Vertex::ALL {
            let x = vertex(v, &p).unwrap();
            assert_eq!(t.classify(&x), s.classify(&x));
        }
    }

    fn set(names: &[&str]) -> Vec<Vertex> {
        let mut v: Vec<Vertex> = names.iter().map(|n| n.parse().unwrap()).collect();
        v.sort_by_key(|x| Vertex::ALL.iter().position(|y| y == x));
        v
    }

    #[test]
    fn equality_lists_at_beta_eq_gamma() {
        for d in 2..=4 {
            let p = DimensionParams::from_ints(d, (7, 10), (7, 10));
            let m = equality_matrix(&p, None).unwrap();
            let expect = [
                (TestId::Translation, set(&["QA", "QB", "Q1", "Q2", "Q2tilde", "Q5", "Q6", "QD1"])),
                (TestId::Shell, set(&["Q1", "Q4", "Q4tilde"])),
                (TestId::Ball, set(&["Q3tilde", "Q3", "Q2", "Q2tilde"])),
                (TestId::Knapp, set(&["Q3", "Q3tilde", "Q4tilde", "Q4"])),
                (TestId::MultiShell, set(&["Q1", "QA", "QD", "Q4", "Q5"])),
                (TestId::MultiBall, set(&["Q3", "QC", "QB", "Q2", "Q6"])),
                (TestId::MultiKnapp, set(&["QC", "Q3", "Q4", "QD", "Q5", "Q6"])),
            ];
            for (t, e) in expect {
                assert_eq!(m.equality_set(t), e, "d={d} {t}");
            }
        }
    }

    #[test]
    fn assouad_knapp_below_gamma() {
        let p = DimensionParams::from_ints(5, (1, 2), (3, 5));
        let m = equality_matrix(&p, None).unwrap();
        assert_eq!(m.equality_set(TestId::Knapp), set(&["Q3", "Q3tilde"]));
        assert_eq!(m.equality_set(TestId::AssouadKnapp), set(&["Q4tilde", "Q4", "Q3", "Q3tilde"]));
        for v in set(&["Q4", "QD", "QC", "Q3"]) {
            assert_eq!(m.cell(TestId::AssouadMultiKnapp, v), Some(Classification::Equality));
        }
    }

    #[test]
    fn admissible_points_pass_proven_tests() {
        use crate::estimates::{grid, margin_solution, Catalog, Mode};
        for (mode, p) in [
            (Mode::Main, p47()),
            (Mode::Main, DimensionParams::from_ints(5, (1, 2), (3, 5))),
            (Mode::D2LS, DimensionParams::from_ints(2, (7, 10), (7, 10))),
        ] {
            let cat = Catalog::new(mode, &p).unwrap();
            let aux = Aux::assouad_regular(&p);
            let tests: Vec<SharpnessTest> = TestId::ALL
                .iter()
                .filter(|t| t.status() == Status::Proven)
                .map(|&t| SharpnessTest::new(t, &p, Some(&aux)).unwrap())
                .collect();
            for x in grid(7) {
                if let Some(s) = margin_solution(&x, &cat).unwrap() {
                    if s.margin.is_positive() {
                        for t in &tests {
                            assert_ne!(t.classify(&x), Classification::Violated, "{mode} {x:?} {}", t.id);
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn matrix_csv() {
        let m = equality_matrix(&p47(), None).unwrap();
        let csv = m.to_csv().unwrap();
        assert_eq!(csv.lines().count(), 1 + TestId::ALL.len());
        assert!(csv.starts_with("test,status,Q1"));
    }
}
