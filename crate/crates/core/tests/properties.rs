use num_traits::{One, Signed, Zero};
use proptest::prelude::*;

use typeset_lab::estimates::{achievable_margin, interpolate, Catalog, CoreEstimate, EstimateId, Mode};
use typeset_lab::exponents::{inv_q_gamma, named_vertex, vertex, DimensionParams, Vertex};
use typeset_lab::fractal::{covering_number, DilationSet};
use typeset_lab::geometry::{
    hull3, in_convex_hull, is_extreme, rat, solve_lp, LinearProgram, LpOutcome, Membership, Rational, Relation, Sense,
    Triple,
};
use typeset_lab::sharpness::{Aux, Classification, SharpnessTest, TestId};

fn point8() -> impl Strategy<Value = Triple> {
    (0i64..=8, 0i64..=8, 0i64..=8).prop_map(|(a, b, c)| Triple::new(rat(a, 8), rat(b, 8), rat(c, 8)))
}

fn cloud() -> impl Strategy<Value = Vec<Triple>> {
    proptest::collection::vec(point8(), 4..14)
}

fn params() -> impl Strategy<Value = DimensionParams> {
    (2u32..=6, 1i64..=9, 0i64..=9).prop_map(|(d, b, extra)| {
        let g = (b + extra).min(10);
        DimensionParams::from_ints(d, (b, 10), (g, 10))
    })
}

fn domain_point() -> impl Strategy<Value = Triple> {
    (0i64..=12, 0i64..=12, 0i64..=12).prop_map(|(a, b, c)| {
        let (ip, iq) = if b > a { (b, a) } else { (a, b) };
        Triple::new(rat(ip, 12), rat(iq, 12), rat(c, 12))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn hull_idempotent(pts in cloud()) {
        let h = hull3(&pts);
        prop_assume!(!h.is_degenerate());
        let again = hull3(&h.vertices);
        let mut a = h.vertices.clone();
        let mut b = again.vertices.clone();
        a.sort();
        b.sort();
        prop_assert_eq!(a, b);
        prop_assert_eq!(h.facets.len(), again.facets.len());
    }

    #[test]
    fn hull_contains_inputs(pts in cloud()) {
        let h = hull3(&pts);
        prop_assume!(!h.is_degenerate());
        for x in &pts {
            prop_assert_ne!(h.contains(x, false).unwrap(), Membership::Outside);
        }
    }

    #[test]
    fn hull_vertices_are_exactly_extreme(pts in cloud()) {
        let h = hull3(&pts);
        prop_assume!(!h.is_degenerate());
        for i in 0..pts.len() {
            let extreme = is_extreme(&pts, i).unwrap();
            prop_assert_eq!(extreme, h.vertex_index(&pts[i]).is_some(), "point {}", pts[i]);
        }
    }

    #[test]
    fn hull_membership_agrees_with_lp(pts in cloud(), x in point8()) {
        let h = hull3(&pts);
        prop_assume!(!h.is_degenerate());
        let inside = h.contains(&x, false).unwrap() != Membership::Outside;
        prop_assert_eq!(inside, in_convex_hull(&pts, &x).unwrap());
    }

    #[test]
    fn lp_dual_certificate(
        obj in proptest::collection::vec(-4i64..=4, 3),
        rows in proptest::collection::vec((proptest::collection::vec(-3i64..=3, 3), 0i64..=6, 0usize..3), 1..5),
        maximize in any::<bool>(),
    ) {
        let sense = if maximize { Sense::Maximize } else { Sense::Minimize };
        let mut lp = LinearProgram::new(3, sense, obj.iter().map(|&c| rat(c, 1)).collect());
        for (coef, rhs, rel) in &rows {
            let rel = [Relation::Le, Relation::Eq, Relation::Ge][*rel];
            lp.constrain(coef.iter().map(|&c| rat(c, 1)).collect(), rel, rat(*rhs, 1));
        }
        // bounding box keeps most instances bounded
        for k in 0..3 {
            let mut e = vec![Rational::zero(); 3];
            e[k] = Rational::one();
            lp.constrain(e, Relation::Le, rat(10, 1));
        }
        if let LpOutcome::Optimal(s) = solve_lp(&lp).unwrap() {
            prop_assert!(lp.is_feasible(&s.witness));
            prop_assert_eq!(lp.value(&s.witness), s.optimum.clone());
            prop_assert!(lp.verify_dual(&s.dual, &s.optimum));
        }
    }

    #[test]
    fn vertices_in_cube_or_flagged(p in params()) {
        for v in Vertex::ALL {
            if let Ok(nv) = named_vertex(v, &p) {
                prop_assert!(nv.flagged != nv.value.in_unit_cube(), "{} at {}", v, p);
            }
        }
    }

    #[test]
    fn q2_decreasing_in_beta(d in 2u32..=6, b1 in 1i64..=98, gap in 1i64..=20) {
        let b2 = (b1 + gap).min(99);
        prop_assume!(b2 > b1);
        let lo = DimensionParams::new(d, rat(b1, 100), rat(b1, 100)).unwrap();
        let hi = DimensionParams::new(d, rat(b2, 100), rat(b2, 100)).unwrap();
        let (a, b) = (vertex(Vertex::Q2, &lo).unwrap(), vertex(Vertex::Q2, &hi).unwrap());
        for k in 0..3 {
            prop_assert!(b.get(k) < a.get(k));
        }
        let (a, b) = (vertex(Vertex::Q3, &lo).unwrap(), vertex(Vertex::Q3, &hi).unwrap());
        prop_assert!(b.ip < a.ip && b.ir < a.ir);
        prop_assert!(b.iq > a.iq);
    }

    #[test]
    fn inv_q_gamma_decreasing(d in 2u32..=6, g1 in 1i64..=98, gap in 1i64..=20) {
        let g2 = (g1 + gap).min(99);
        prop_assume!(g2 > g1);
        let a = DimensionParams::new(d, rat(1, 100), rat(g1, 100)).unwrap();
        let b = DimensionParams::new(d, rat(1, 100), rat(g2, 100)).unwrap();
        prop_assert!(inv_q_gamma(&b) < inv_q_gamma(&a));
    }

    #[test]
    fn interpolation_affine_in_theta(p in params(), i in 0usize..5, j in 0usize..5, t1 in 0i64..=12, t2 in 0i64..=12, l in 0i64..=12) {
        let ids = [EstimateId::E101, EstimateId::E111, EstimateId::E000, EstimateId::E222, EstimateId::E2Q2];
        let (a, b) = (CoreEstimate::new(ids[i], &p), CoreEstimate::new(ids[j], &p));
        let (t1, t2, l) = (rat(t1, 12), rat(t2, 12), rat(l, 12));
        let mix = &l * &t1 + (Rational::one() - &l) * &t2;
        let e = interpolate(&a, &b, &mix).unwrap();
        let e1 = interpolate(&a, &b, &t1).unwrap();
        let e2 = interpolate(&a, &b, &t2).unwrap();
        prop_assert_eq!(e.decay, &l * &e1.decay + (Rational::one() - &l) * &e2.decay);
        prop_assert_eq!(e.point, Triple::affine(&e1.point, &e2.point, &l));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn free_moves_never_lose_margin(p in params(), x in domain_point(), du in 0i64..=4, dv in 0i64..=4, dw in 0i64..=4) {
        let Ok(cat) = Catalog::new(Mode::Main, &p) else { return Ok(()) };
        let y = Triple::new(
            (&x.ip - rat(du, 12)).max(Rational::zero()),
            (&x.iq + rat(dv, 12)).min(Rational::one()),
            (&x.ir - rat(dw, 12)).max(Rational::zero()),
        );
        prop_assume!(y.iq <= y.ip);
        let mx = achievable_margin(&x, &cat).unwrap();
        let my = achievable_margin(&y, &cat).unwrap();
        if let Some(mx) = mx {
            let my = my.expect("free moves keep feasibility");
            prop_assert!(my >= mx, "{} -> {}: {} < {}", x, y, my, mx);
        }
    }

    #[test]
    fn raising_ir_costs_at_most_beta(p in params(), x in domain_point()) {
        let Ok(cat) = Catalog::new(Mode::Main, &p) else { return Ok(()) };
        let top = Triple::new(x.ip.clone(), x.iq.clone(), Rational::one());
        if let Some(m) = achievable_margin(&x, &cat).unwrap() {
            let mt = achievable_margin(&top, &cat).unwrap().expect("reachable");
            prop_assert!(mt >= &m - &p.beta * (Rational::one() - &x.ir));
        }
    }

    #[test]
    fn conjecture_only_enlarges(p in params(), x in domain_point()) {
        prop_assume!(p.beta == p.gamma);
        let (Ok(main), Ok(ls)) = (Catalog::new(Mode::Main, &p), Catalog::new(Mode::LS, &p)) else { return Ok(()) };
        prop_assert!(main.estimates.iter().all(|e| !e.conjectural));
        let a = achievable_margin(&x, &main).unwrap();
        let b = achievable_margin(&x, &ls).unwrap();
        if let Some(a) = a {
            prop_assert!(b.expect("superset catalog") >= a);
        }
    }

    #[test]
    fn classification_scale_invariant(p in params(), x in domain_point(), s in 1i64..=50, t in 1i64..=7) {
        let aux = Aux::assouad_regular(&p);
        let s = rat(s, t);
        for id in TestId::ALL {
            let test = SharpnessTest::new(id, &p, Some(&aux)).unwrap();
            prop_assert_eq!(test.classify(&x), test.scaled(&s).classify(&x));
        }
    }

    #[test]
    fn assouad_regular_knapp_equalities(p in params()) {
        prop_assume!(p.beta < p.gamma);
        let aux = Aux::assouad_regular(&p);
        let t = SharpnessTest::new(TestId::AssouadKnapp, &p, Some(&aux)).unwrap();
        for v in [Vertex::Q4tilde, Vertex::Q4, Vertex::Q3, Vertex::Q3tilde] {
            let x = vertex(v, &p).unwrap();
            prop_assert_eq!(t.classify(&x), Classification::Equality, "{} at {}", v, p);
        }
    }

    #[test]
    fn covering_number_monotone(
        cuts in proptest::collection::btree_set(0i64..=64, 2..12),
        d1 in 1i64..=32,
        d2 in 1i64..=32,
    ) {
        let c: Vec<i64> = cuts.into_iter().collect();
        let list: Vec<(Rational, Rational)> = c
            .chunks(2)
            .map(|w| (rat(64 + w[0], 64), rat(64 + *w.last().unwrap(), 64)))
            .collect();
        let s = DilationSet::explicit(list).unwrap();
        let (small, big) = if d1 <= d2 { (d1, d2) } else { (d2, d1) };
        let a = covering_number(&s, &rat(small, 64)).unwrap();
        let b = covering_number(&s, &rat(big, 64)).unwrap();
        prop_assert!(b <= a);
        prop_assert!(a.is_positive());
    }
}
