use std::sync::OnceLock;

use coxinv_core::chevalley::{basic_invariants, ChevalleyMap, Rewriter};
use coxinv_core::geometry::{fundamental_domain_rep, stratify};
use coxinv_core::groups::{build_group, orbit, GroupData, GroupSpec};
use coxinv_core::jets::{Jet, JetField};
use coxinv_core::transfer::{continuity_ledger, epsilon_beta, Verdict};
use coxinv_core::{MultiIndex, Poly, Rational, Scalar};
use num::{One, Zero};
use proptest::prelude::*;

const GROUPS: [&str; 8] = ["A1", "A2", "A3", "B2", "B3", "D3", "D4", "R1xB2"];

fn maps() -> &'static Vec<ChevalleyMap<Rational>> {
    static MAPS: OnceLock<Vec<ChevalleyMap<Rational>>> = OnceLock::new();
    MAPS.get_or_init(|| {
        GROUPS
            .iter()
            .map(|s| basic_invariants(&build_group(&GroupSpec::parse(s).unwrap()).unwrap()).unwrap())
            .collect()
    })
}

fn group(i: usize) -> &'static GroupData {
    &maps()[i].group
}

fn rational() -> impl Strategy<Value = Rational> {
    (-9i64..=9, 1i64..=4).prop_map(|(p, q)| Rational::new(p.into(), q.into()))
}

fn point(n: usize) -> impl Strategy<Value = Vec<Rational>> {
    prop::collection::vec(rational(), n)
}

/// Coordinates from a small set so that points often lie on mirrors.
fn coarse_point(n: usize) -> impl Strategy<Value = Vec<Rational>> {
    prop::collection::vec((-2i64..=2).prop_map(|v| Rational::from_integer(v.into())), n)
}

fn poly(n: usize, max_deg: u32) -> impl Strategy<Value = Poly<Rational>> {
    prop::collection::vec((prop::collection::vec(0..=max_deg, n), rational()), 0..6).prop_map(move |terms| {
        Poly::from_terms(n, terms.into_iter().map(|(e, c)| (MultiIndex::new(e), c)))
    })
}

fn group_and_point() -> impl Strategy<Value = (usize, Vec<Rational>)> {
    (0..GROUPS.len()).prop_flat_map(|i| (Just(i), point(group(i).dim)))
}

fn group_and_coarse_point() -> impl Strategy<Value = (usize, Vec<Rational>)> {
    (0..GROUPS.len()).prop_flat_map(|i| (Just(i), coarse_point(group(i).dim)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn ring_axioms(a in poly(3, 3), b in poly(3, 3), c in poly(3, 3)) {
        prop_assert_eq!(&a + &b, &b + &a);
        prop_assert_eq!(&a * &b, &b * &a);
        prop_assert_eq!(&(&a * &b) * &c, &a * &(&b * &c));
        prop_assert_eq!(&a * &(&b + &c), &(&a * &b) + &(&a * &c));
        prop_assert_eq!(&a - &a, Poly::zero(3));
        prop_assert_eq!(&a * &Poly::one(3), a.clone());
    }

    #[test]
    fn compose_commutes_with_eval(p in poly(2, 3), s1 in poly(3, 2), s2 in poly(3, 2), x in point(3)) {
        let composed = p.compose(&[s1.clone(), s2.clone()]).unwrap();
        let inner = vec![s1.evaluate(&x).unwrap(), s2.evaluate(&x).unwrap()];
        prop_assert_eq!(composed.evaluate(&x).unwrap(), p.evaluate(&inner).unwrap());
    }

    #[test]
    fn mixed_partials_commute(p in poly(3, 4), i in 0usize..3, j in 0usize..3) {
        prop_assert_eq!(p.derivative(i).derivative(j), p.derivative(j).derivative(i));
    }

    #[test]
    fn shift_is_translation(p in poly(2, 4), a in point(2), x in point(2)) {
        let moved: Vec<Rational> = x.iter().zip(&a).map(|(u, v)| u + v).collect();
        prop_assert_eq!(p.shift(&a).unwrap().evaluate(&x).unwrap(), p.evaluate(&moved).unwrap());
    }

    #[test]
    fn invariants_are_homogeneous((i, x) in group_and_point(), t in rational()) {
        let map = &maps()[i];
        let tx: Vec<Rational> = x.iter().map(|v| v * &t).collect();
        let px = map.eval(&x).unwrap();
        let ptx = map.eval(&tx).unwrap();
        for ((a, b), &k) in px.iter().zip(&ptx).zip(&map.degrees) {
            prop_assert_eq!(b.clone(), a * t.powi(k));
        }
    }

    #[test]
    fn invariants_are_orbit_constant((i, x) in group_and_point(), r in any::<prop::sample::Index>()) {
        let map = &maps()[i];
        let refl = &map.group.reflections[r.index(map.group.reflections.len())];
        prop_assert_eq!(map.eval(&refl.apply(&x).unwrap()).unwrap(), map.eval(&x).unwrap());
    }

    #[test]
    fn formal_derivative_matches_symbolic(p in poly(2, 4), a in point(2), q0 in 0u32..=2, q1 in 0u32..=2) {
        let q = MultiIndex::new(vec![q0, q1]);
        let jet = Jet::from_poly(&p, &a, 4).unwrap();
        let lhs = jet.formal_derivative(&q).unwrap();
        let rhs = Jet::from_poly(&p.partial_derivative(&q).unwrap(), &a, 4 - q.order()).unwrap();
        for k in MultiIndex::all_up_to(2, 4 - q.order()) {
            prop_assert_eq!(lhs.coeff(&k), rhs.coeff(&k));
        }
    }

    #[test]
    fn taylor_fields_have_zero_remainders(p in poly(2, 3), xs in prop::collection::vec(point(2), 2..5)) {
        let p = p.truncate(3);
        let mut xs = xs;
        xs.sort();
        xs.dedup();
        let field = JetField::from_poly(&p, &xs, 3).unwrap();
        for q in MultiIndex::all_up_to(2, 3) {
            for i in 0..field.len() {
                for j in 0..field.len() {
                    prop_assert!(field.remainder_at(&q, i, j).unwrap().is_zero());
                }
            }
        }
    }

    #[test]
    fn truncation_remainder_identity(p in poly(2, 4), a in point(2), b in point(2)) {
        prop_assume!(a != b);
        let field = JetField::from_poly(&p, &[a.clone(), b.clone()], 4).unwrap().truncate(2);
        for q in MultiIndex::all_up_to(2, 2) {
            let dq = p.partial_derivative(&q).unwrap();
            let taylor = Jet::from_poly(&dq, &a, 2 - q.order()).unwrap();
            let expected = dq.evaluate(&b).unwrap() - taylor.evaluate(&b).unwrap();
            prop_assert_eq!(field.remainder_at(&q, 0, 1).unwrap(), expected);
        }
    }

    #[test]
    fn jets_survive_json(p in poly(2, 3), a in point(2)) {
        let jet = Jet::from_poly(&p, &a, 3).unwrap();
        prop_assert_eq!(Jet::<Rational>::from_json(&jet.to_json(), 3).unwrap(), jet);
        prop_assert_eq!(Poly::<Rational>::from_json(&p.to_json(), 2).unwrap(), p);
    }

    #[test]
    fn epsilon_is_homogeneous(x in point(2), t in rational(), b0 in 0u32..=2, b1 in 0u32..=1, a0 in 0u32..=4, a1 in 0u32..=4) {
        prop_assume!(!t.is_zero());
        let map = &maps()[3];
        let alpha = MultiIndex::new(vec![a0, a1]);
        let beta = MultiIndex::new(vec![b0, b1]);
        let tx: Vec<Rational> = x.iter().map(|v| v * &t).collect();
        let e = epsilon_beta(map, &alpha, &beta, &x).unwrap();
        let et = epsilon_beta(map, &alpha, &beta, &tx).unwrap();
        let factor = if e.homogeneity_degree >= 0 {
            t.powi(e.homogeneity_degree as u32)
        } else {
            Rational::one() / t.powi((-e.homogeneity_degree) as u32)
        };
        prop_assert_eq!(et.value, e.value * factor);
    }

    #[test]
    fn representative_is_in_orbit((i, x) in group_and_point()) {
        let g = group(i);
        let rep = fundamental_domain_rep(g, &x).unwrap();
        prop_assert!(orbit(g, &x).unwrap().contains(&rep));
        prop_assert_eq!(maps()[i].eval(&rep).unwrap(), maps()[i].eval(&x).unwrap());
        prop_assert_eq!(fundamental_domain_rep(g, &rep).unwrap(), rep);
    }

    #[test]
    fn isotropy_orders_agree_along_orbits((i, x) in group_and_coarse_point()) {
        let g = group(i);
        let rep = fundamental_domain_rep(g, &x).unwrap();
        let sx = stratify(g, &x, 0.0).unwrap();
        let sr = stratify(g, &rep, 0.0).unwrap();
        prop_assert_eq!(sx.isotropy_order(), sr.isotropy_order());
        prop_assert_eq!(sx.active.len(), sr.active.len());
    }

    #[test]
    fn isotropy_degrees_are_dominated((i, x) in group_and_coarse_point()) {
        let g = group(i);
        let s = stratify(g, &x, 0.0).unwrap();
        prop_assert_eq!(s.isotropy_degrees.len(), g.degrees.len());
        for (kp, k) in s.isotropy_degrees.iter().zip(&g.degrees) {
            prop_assert!(kp <= k);
        }
        prop_assert!(s.h_s <= s.h);
        if s.active.is_empty() {
            prop_assert!(s.isotropy_degrees.iter().all(|&k| k == 1));
            prop_assert_eq!(s.h_s, 1);
        }
    }

    #[test]
    fn ledger_is_consistent((i, x) in group_and_coarse_point(), r in 1u32..=2) {
        let map = &maps()[i];
        let s = stratify(&map.group, &x, 0.0).unwrap();
        for e in continuity_ledger(map, r, Some(&s)) {
            prop_assert_eq!(e.verdict == Verdict::ContinuousOnImage, e.weighted_order <= map.h() * r);
            let w = e.stratum_weighted_order.unwrap();
            prop_assert!(w <= e.weighted_order);
            if e.verdict == Verdict::Lost {
                prop_assert!(w > map.h() * r);
            }
        }
    }

    #[test]
    fn rewrite_inverts_compose(i in 0..GROUPS.len(), coeffs in prop::collection::vec(rational(), 4)) {
        let map = &maps()[i];
        let mut rw = Rewriter::new(map);
        let m = map.degrees.len();
        let big_f = Poly::from_terms(m, (0..m).zip(&coeffs).map(|(j, c)| {
            let mut e = vec![0; m];
            e[j] = 1;
            e[(j + 1) % m] += 1;
            (MultiIndex::new(e), c.clone())
        }));
        let f = rw.compose(&big_f).unwrap();
        prop_assert_eq!(map.invariance_violation(&f).unwrap(), None);
        prop_assert_eq!(rw.rewrite(&f).unwrap(), big_f);
    }
}
