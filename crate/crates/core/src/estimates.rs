//! Core estimate catalog, localisation moves and the summable-region engine.

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use rayon::prelude::*;
use serde::Serialize;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::exponents::{inv_q_gamma, inv_q_ls, vertex, DimensionParams, Vertex};
use crate::geometry::{
    from_halfspaces, hull3, int, rat, solve_lp, LinearProgram, LpOutcome, Membership, Plane, Polytope3, Rational,
    Relation, Sense, Triple,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum EstimateId {
    E101,
    E111,
    E000,
    E222,
    E2Q2,
    ELS,
}

impl fmt::Display for EstimateId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self:?}")
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CoreEstimate {
    pub id: EstimateId,
    pub point: Triple,
    /// Exponent `e` in the bound `2^{j e}`.
    pub decay: Rational,
    pub eps_loss: bool,
    pub conjectural: bool,
}

impl CoreEstimate {
    pub fn new(id: EstimateId, p: &DimensionParams) -> CoreEstimate {
        let d1 = p.dr() - int(1);
        let half = rat(1, 2);
        let (point, decay, eps_loss, conjectural) = match id {
            EstimateId::E101 => (Triple::from_ints([(1, 1), (0, 1), (1, 1)]), int(1), false, false),
            EstimateId::E111 => (Triple::diag(int(1)), p.beta.clone(), false, false),
            EstimateId::E000 => (Triple::zero(), int(0), false, false),
            EstimateId::E222 => (Triple::diag(half.clone()), &p.beta / int(2) - &d1 / int(2), false, false),
            EstimateId::E2Q2 => {
                let g = &p.gamma;
                let decay = -(&d1 * &d1 - int(2) * g) / (int(2) * (&d1 + int(2) * g));
                (Triple::new(half.clone(), inv_q_gamma(p), half), decay, true, false)
            }
            EstimateId::ELS => {
                let a = inv_q_ls(p);
                let decay = -&d1 / int(2) + &p.beta * &a;
                (Triple::diag(a), decay, true, true)
            }
        };
        CoreEstimate {
            id,
            point,
            decay,
            eps_loss,
            conjectural,
        }
    }

    pub fn is_valid(id: EstimateId, p: &DimensionParams) -> bool {
        match id {
            EstimateId::E2Q2 => p.d >= 3 || p.gamma <= rat(1, 2),
            EstimateId::ELS => p.beta == p.gamma,
            _ => true,
        }
    }
}

/// `θ·a + (1−θ)·b` for points and decays.
pub fn interpolate(a: &CoreEstimate, b: &CoreEstimate, theta: &Rational) -> Result<CoreEstimate> {
    if theta.is_negative() || *theta > Rational::one() {
        return Err(Error::OutOfRange(format!("theta = {theta} not in [0,1]")));
    }
    Ok(interpolate_affine(a, b, theta))
}

/// Same as [`interpolate`] without the range check.
pub fn interpolate_affine(a: &CoreEstimate, b: &CoreEstimate, theta: &Rational) -> CoreEstimate {
    let one_m = Rational::one() - theta;
    CoreEstimate {
        id: a.id,
        point: Triple::affine(&a.point, &b.point, theta),
        decay: theta * &a.decay + &one_m * &b.decay,
        eps_loss: a.eps_loss || b.eps_loss,
        conjectural: a.conjectural || b.conjectural,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Mode {
    Main,
    LS,
    D2LS,
}

impl FromStr for Mode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "main" => Ok(Mode::Main),
            "ls" => Ok(Mode::LS),
            "d2ls" => Ok(Mode::D2LS),
            _ => Err(Error::Parse(format!("unknown mode {s:?} (expected main, ls, d2ls)"))),
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Main => "main",
            Mode::LS => "ls",
            Mode::D2LS => "d2ls",
        })
    }
}

impl Mode {
    pub fn members(self) -> &'static [EstimateId] {
        use EstimateId::*;
        match self {
            Mode::Main => &[E101, E111, E000, E222, E2Q2],
            Mode::LS => &[E101, E111, E000, E222, E2Q2, ELS],
            Mode::D2LS => &[E101, E111, E000, E222, ELS],
        }
    }

    pub fn theorem_vertices(self) -> &'static [Vertex] {
        use Vertex::*;
        match self {
            Mode::Main => &[Q1, Q2tilde, Q3tilde, Q4tilde, Q2, Q3, Q4, QD, QB, QC, QD1],
            Mode::LS => &[Q1, Q2tilde, Q3tilde, Q4tilde, Q2, Q3, Q4, QD, QB, QC, QA],
            Mode::D2LS => &[Q1, Q2tilde, Q3tilde, Q4tilde, Q2, Q3, Q4, Q5, Q6],
        }
    }
}

/// Dimension restrictions of the theorem attached to `mode`.
pub fn check_regime(mode: Mode, p: &DimensionParams) -> Result<()> {
    let g = &p.gamma;
    match mode {
        Mode::Main => match p.d {
            2 => {
                // gamma <= (sqrt(17) - 3) / 4
                if int(2) * g * g + int(3) * g - int(1) > Rational::zero() {
                    return Err(Error::Regime("d=2 requires gamma <= (sqrt(17)-3)/4".into()));
                }
            }
            3 => {
                // gamma <= sqrt(3) - 1, i.e. (1+gamma) gamma <= 2 - gamma
                if g * g + int(2) * g - int(2) > Rational::zero() {
                    return Err(Error::Regime("d=3 requires gamma <= sqrt(3)-1".into()));
                }
            }
            _ => {}
        },
        Mode::LS => {
            if p.beta != p.gamma {
                return Err(Error::Regime("local smoothing mode requires beta = gamma".into()));
            }
            if p.d == 2 && *g > rat(1, 2) {
                return Err(Error::Regime("d=2 local smoothing mode requires gamma <= 1/2".into()));
            }
        }
        Mode::D2LS => {
            if p.beta != p.gamma {
                return Err(Error::Regime("d=2 local smoothing mode requires beta = gamma".into()));
            }
            if p.d != 2 || *g <= rat(1, 2) {
                return Err(Error::Regime("d2ls mode requires d = 2 and gamma > 1/2".into()));
            }
        }
    }
    Ok(())
}

#[derive(Clone, Debug)]
pub struct Catalog {
    pub estimates: Vec<CoreEstimate>,
    pub params: DimensionParams,
    pub mode: Mode,
}

impl Catalog {
    pub fn new(mode: Mode, params: &DimensionParams) -> Result<Catalog> {
        let mut estimates = Vec::new();
        for &id in mode.members() {
            if !CoreEstimate::is_valid(id, params) {
                return Err(Error::Regime(format!("{id} is not available at {params}")));
            }
            estimates.push(CoreEstimate::new(id, params));
        }
        Ok(Catalog {
            estimates,
            params: params.clone(),
            mode,
        })
    }

    pub fn get(&self, id: EstimateId) -> Option<&CoreEstimate> {
        self.estimates.iter().find(|e| e.id == id)
    }
}

/// The margin LP at `x`: variables `λ_1..λ_k, u, v, w, s`, minimizing `Σ λ_i e_i + β s`.
pub fn margin_lp(x: &Triple, cat: &Catalog) -> LinearProgram {
    let k = cat.estimates.len();
    let n = k + 4;
    let mut obj: Vec<Rational> = cat.estimates.iter().map(|e| e.decay.clone()).collect();
    obj.extend([int(0), int(0), int(0), cat.params.beta.clone()]);
    let mut lp = LinearProgram::new(n, Sense::Minimize, obj);
    let mut row = vec![Rational::one(); k];
    row.extend(vec![Rational::zero(); 4]);
    lp.constrain(row, Relation::Eq, Rational::one());
    // (coordinate, coefficients of u, v, w, s)
    let moves: [[i64; 4]; 3] = [[-1, 0, 0, 0], [0, 1, 0, 0], [0, 0, -1, 1]];
    for (c, mv) in moves.iter().enumerate() {
        let mut row: Vec<Rational> = cat.estimates.iter().map(|e| e.point.get(c).clone()).collect();
        row.extend(mv.iter().map(|&m| int(m)));
        lp.constrain(row, Relation::Eq, x.get(c).clone());
    }
    lp
}

#[derive(Clone, Debug)]
pub struct MarginSolution {
    pub margin: Rational,
    /// Catalog weights, then `u, v, w, s`.
    pub witness: Vec<Rational>,
    /// Dual multipliers `(y0, y1, y2, y3)`; `y0 + y·x <= 0` is a valid cut for the region.
    pub dual: Vec<Rational>,
}

/// Exact margin with certificates; `None` when `x` is unreachable.
pub fn margin_solution(x: &Triple, cat: &Catalog) -> Result<Option<MarginSolution>> {
    if !x.in_unit_cube() {
        return Err(Error::OutOfRange(format!("{x} is outside the unit cube")));
    }
    if x.iq > x.ip {
        return Ok(None);
    }
    match solve_lp(&margin_lp(x, cat))? {
        LpOutcome::Optimal(s) => Ok(Some(MarginSolution {
            margin: -s.optimum,
            witness: s.witness,
            dual: s.dual,
        })),
        LpOutcome::Infeasible => Ok(None),
        LpOutcome::Unbounded => Err(Error::Numerical("margin LP unbounded".into())),
    }
}

pub fn achievable_margin(x: &Triple, cat: &Catalog) -> Result<Option<Rational>> {
    Ok(margin_solution(x, cat)?.map(|s| s.margin))
}

fn axis_plane(n: [i64; 3], c: i64) -> Plane {
    Plane {
        normal: [BigInt::from(n[0]), BigInt::from(n[1]), BigInt::from(n[2])],
        offset: BigInt::from(c),
    }
}

/// `{0 <= iq <= ip <= 1, 0 <= ir <= 1}`.
pub fn domain_planes() -> Vec<Plane> {
    vec![
        axis_plane([1, 0, 0], 1),
        axis_plane([0, -1, 0], 0),
        axis_plane([-1, 1, 0], 0),
        axis_plane([0, 0, 1], 1),
        axis_plane([0, 0, -1], 0),
    ]
}

/// Cube faces and the translation plane `ip = iq`.
pub fn is_domain_plane(p: &Plane) -> bool {
    let c = p.canonical();
    let cands = [
        axis_plane([1, 0, 0], 0),
        axis_plane([1, 0, 0], 1),
        axis_plane([0, 1, 0], 0),
        axis_plane([0, 1, 0], 1),
        axis_plane([0, 0, 1], 0),
        axis_plane([0, 0, 1], 1),
        axis_plane([1, -1, 0], 0),
    ];
    cands.iter().any(|q| *q == c)
}

/// Exact closure of `{x : margin(x) >= 0}`, by dual cuts on an outer approximation.
pub fn region_polytope(cat: &Catalog) -> Result<Polytope3> {
    let mut planes = domain_planes();
    for _ in 0..200 {
        let poly = from_halfspaces(&planes).ok_or_else(|| Error::Numerical("empty region".into()))?;
        let mut added = false;
        for v in &poly.vertices {
            let Some(sol) = margin_solution(v, cat)? else {
                continue;
            };
            if sol.margin.is_negative() {
                let y = &sol.dual;
                let cut = Plane::from_rational([y[1].clone(), y[2].clone(), y[3].clone()], -y[0].clone())
                    .ok_or_else(|| Error::Numerical("degenerate cut".into()))?;
                if !planes.contains(&cut) {
                    planes.push(cut);
                    added = true;
                }
            }
        }
        if !added {
            return Ok(poly);
        }
    }
    Err(Error::Numerical("region cut loop did not converge".into()))
}

/// Interior relative to the domain: facets lying on cube faces or `ip = iq` may be touched.
pub fn inside_relative(hull: &Polytope3, x: &Triple) -> bool {
    hull.facets.iter().all(|f| {
        let s = f.plane.eval(x);
        s.is_negative() || (s.is_zero() && is_domain_plane(&f.plane))
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct VertexCheck {
    pub name: Vertex,
    pub point: [String; 3],
    pub margin: Option<String>,
    pub zero: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct Disagreement {
    pub point: [String; 3],
    pub margin: Option<String>,
    pub margin_positive: bool,
    pub hull_interior: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct RegionReport {
    pub mode: Mode,
    pub params: String,
    pub vertices: Vec<VertexCheck>,
    pub all_vertices_zero: bool,
    pub grid_n: usize,
    pub grid_points: usize,
    pub disagreements: Vec<Disagreement>,
    /// Extreme points of the LP region that are not theorem vertices.
    pub lp_region_extra_vertices: Vec<[String; 3]>,
    /// Theorem vertices that are not extreme points of the LP region.
    pub lp_region_missing_vertices: Vec<String>,
}

impl RegionReport {
    pub fn passed(&self) -> bool {
        self.all_vertices_zero && self.disagreements.is_empty()
    }
}

pub fn theorem_hull(mode: Mode, p: &DimensionParams) -> Result<Polytope3> {
    let pts: Vec<Triple> = mode
        .theorem_vertices()
        .iter()
        .map(|&v| vertex(v, p))
        .collect::<Result<_>>()?;
    Ok(hull3(&pts))
}

pub fn grid(n: usize) -> Vec<Triple> {
    let m = (n - 1) as i64;
    let mut out = Vec::with_capacity(n * n * n);
    for a in 0..n as i64 {
        for b in 0..n as i64 {
            for c in 0..n as i64 {
                out.push(Triple::new(rat(a, m), rat(b, m), rat(c, m)));
            }
        }
    }
    out
}

/// Compares the sign of the margin with domain-relative interior membership in the theorem hull.
pub fn region_matches_theorem(cat: &Catalog, verts: &[Vertex], grid_n: usize) -> Result<RegionReport> {
    check_regime(cat.mode, &cat.params)?;
    let p = &cat.params;
    let mut vertices = Vec::new();
    let mut pts = Vec::new();
    for &v in verts {
        let x = vertex(v, p)?;
        let m = if x.in_unit_cube() { achievable_margin(&x, cat)? } else { None };
        vertices.push(VertexCheck {
            name: v,
            point: x.to_strings(),
            margin: m.as_ref().map(crate::geometry::fmt_rational),
            zero: m.as_ref().is_some_and(|m| m.is_zero()),
        });
        pts.push(x);
    }
    let hull = hull3(&pts);
    if hull.is_degenerate() {
        return Err(Error::Degenerate(hull.dim));
    }
    let points = grid(grid_n);
    let rows: Vec<Result<Option<Disagreement>>> = points
        .par_iter()
        .map(|x| {
            let m = achievable_margin(x, cat)?;
            let lp_in = m.as_ref().is_some_and(|m| m.is_positive());
            let hull_in = inside_relative(&hull, x);
            Ok((lp_in != hull_in).then(|| Disagreement {
                point: x.to_strings(),
                margin: m.as_ref().map(crate::geometry::fmt_rational),
                margin_positive: lp_in,
                hull_interior: hull_in,
            }))
        })
        .collect();
    let mut disagreements = Vec::new();
    for r in rows {
        if let Some(d) = r? {
            disagreements.push(d);
        }
    }
    let region = region_polytope(cat)?;
    let extra = region
        .vertices
        .iter()
        .filter(|v| !pts.contains(v))
        .map(|v| v.to_strings())
        .collect();
    let missing = verts
        .iter()
        .zip(&pts)
        .filter(|(_, x)| region.vertex_index(x).is_none())
        .map(|(v, _)| v.name().to_string())
        .collect();
    Ok(RegionReport {
        mode: cat.mode,
        params: p.to_string(),
        all_vertices_zero: vertices.iter().all(|v| v.zero),
        vertices,
        grid_n,
        grid_points: points.len(),
        disagreements,
        lp_region_extra_vertices: extra,
        lp_region_missing_vertices: missing,
    })
}

/// Membership of `x` in the closed-form theorem hull, strict and domain-relative.
pub fn hull_membership(mode: Mode, p: &DimensionParams, x: &Triple) -> Result<(Membership, bool)> {
    let hull = theorem_hull(mode, p)?;
    Ok((hull.contains(x, true)?, inside_relative(&hull, x)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exponents::{critical_theta, ThetaCase};

    fn p47() -> DimensionParams {
        DimensionParams::from_ints(4, (7, 10), (7, 10))
    }

    #[test]
    fn interpolate_endpoints_and_example() {
        let p = DimensionParams::from_ints(3, (1, 2), (1, 2));
        let a = CoreEstimate::new(EstimateId::E111, &p);
        let b = CoreEstimate::new(EstimateId::E222, &p);
        assert_eq!(interpolate(&a, &b, &int(1)).unwrap().point, a.point);
        let m = interpolate(&a, &b, &rat(1, 2)).unwrap();
        assert_eq!(m.point, Triple::diag(rat(3, 4)));
        assert_eq!(m.decay, rat(-1, 8));
        assert!(interpolate(&a, &b, &rat(3, 2)).is_err());
    }

    #[test]
    fn q4_interpolation_is_critical() {
        let p = p47();
        let a = CoreEstimate::new(EstimateId::E101, &p);
        let b = CoreEstimate::new(EstimateId::E2Q2, &p);
        let th = critical_theta(ThetaCase::Q4, &p).unwrap();
        let e = interpolate(&a, &b, &th).unwrap();
        assert!(e.decay.is_zero());
        assert_eq!(e.point, vertex(Vertex::Q4, &p).unwrap());
    }

    #[test]
    fn margins_at_reference_points() {
        let p = p47();
        let cat = Catalog::new(Mode::Main, &p).unwrap();
        assert_eq!(achievable_margin(&Triple::zero(), &cat).unwrap(), Some(int(0)));
        let q2 = vertex(Vertex::Q2, &p).unwrap();
        assert_eq!(achievable_margin(&q2, &cat).unwrap(), Some(int(0)));
        let bad = Triple::from_ints([(0, 1), (1, 2), (0, 1)]);
        assert_eq!(achievable_margin(&bad, &cat).unwrap(), None);
    }

    #[test]
    fn barycenter_inside() {
        let p = p47();
        let cat = Catalog::new(Mode::Main, &p).unwrap();
        let pts: Vec<Triple> = Mode::Main.theorem_vertices().iter().map(|&v| vertex(v, &p).unwrap()).collect();
        let n = rat(1, pts.len() as i64);
        let bary = pts.iter().fold(Triple::zero(), |acc, x| &acc + x).scale(&n);
        assert!(achievable_margin(&bary, &cat).unwrap().unwrap().is_positive());
        let hull = theorem_hull(Mode::Main, &p).unwrap();
        assert_eq!(hull.contains(&bary, true).unwrap(), Membership::Inside);
    }

    #[test]
    fn regimes() {
        assert!(check_regime(Mode::Main, &DimensionParams::from_ints(3, (1, 2), (7, 10))).is_ok());
        assert!(check_regime(Mode::Main, &DimensionParams::from_ints(3, (1, 2), (3, 4))).is_err());
        assert!(check_regime(Mode::Main, &DimensionParams::from_ints(2, (1, 4), (1, 4))).is_ok());
        assert!(check_regime(Mode::Main, &DimensionParams::from_ints(2, (1, 4), (3, 10))).is_err());
        assert!(check_regime(Mode::D2LS, &DimensionParams::from_ints(2, (7, 10), (7, 10))).is_ok());
        assert!(check_regime(Mode::D2LS, &DimensionParams::from_ints(2, (1, 2), (1, 2))).is_err());
        assert!(check_regime(Mode::LS, &DimensionParams::from_ints(4, (1, 2), (3, 5))).is_err());
    }

    #[test]
    fn catalog_members() {
        let p = DimensionParams::from_ints(2, (7, 10), (7, 10));
        assert!(Catalog::new(Mode::Main, &p).is_err());
        let c = Catalog::new(Mode::D2LS, &p).unwrap();
        assert!(c.get(EstimateId::E2Q2).is_none());
        assert!(c.get(EstimateId::ELS).unwrap().conjectural);
    }

    #[test]
    fn region_polytope_contains_theorem_hull() {
        let p = p47();
        let cat = Catalog::new(Mode::LS, &p).unwrap();
        let region = region_polytope(&cat).unwrap();
        for &v in Mode::LS.theorem_vertices() {
            let x = vertex(v, &p).unwrap();
            assert_ne!(region.contains(&x, false).unwrap(), Membership::Outside, "{v}");
        }
    }
}
