use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use coxinv_core::chevalley::{basic_invariants, ChevalleyMap, Rewriter};
use coxinv_core::geometry::{identity_regularity_probe, regularity_probe, stratify, ProbeConfig};
use coxinv_core::groups::{build_group, enumerate_factor_elements, GroupData, GroupSpec};
use coxinv_core::jets::{fit_slope, Jet, JetField};
use coxinv_core::sampling::{random_chamber_point, random_invariant, random_jet, random_point, random_point_within};
use coxinv_core::transfer::{
    compose_jet, continuity_ledger, cramer_first_derivatives, epsilon_beta, epsilon_weight, recover_jet,
    weighted_derivative_terms, Verdict,
};
use coxinv_core::{MultiIndex, Poly, Rational, Scalar};
use num::{One, Zero};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn group(name: &str) -> GroupData {
    build_group(&GroupSpec::parse(name).unwrap()).unwrap()
}

fn exact_map(name: &str) -> ChevalleyMap<Rational> {
    basic_invariants(&group(name)).unwrap()
}

fn q(n: i64, d: i64) -> Rational {
    Rational::new(n.into(), d.into())
}

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(elapsed: Duration, limit: u64) -> Result<(), String> {
    ensure(elapsed.as_secs_f64() < limit as f64, || format!("took {:.1}s, limit {limit}s", elapsed.as_secs_f64()))
}

fn group_identities() -> Outcome {
    let start = Instant::now();
    let mut names: Vec<String> = ["A1", "A2", "A3", "A4", "B2", "B3", "B4", "D3", "D4"].map(String::from).to_vec();
    names.extend((3..=8).map(|m| format!("I2({m})")));
    for name in &names {
        let g = group(name);
        let excess: usize = g.degrees.iter().map(|&k| k as usize - 1).sum();
        ensure(g.reflections.len() == excess, || format!("{name}: {} reflections, Σ(k−1) = {excess}", g.reflections.len()))?;
        let closure: usize = g.spec.factors.iter().map(|f| enumerate_factor_elements(f).unwrap().len()).product();
        let product: u64 = g.degrees.iter().map(|&k| k as u64).product();
        ensure(product == closure as u64, || format!("{name}: ∏k = {product}, closure order {closure}"))?;
    }
    within(start.elapsed(), 10)?;
    Ok(format!("{} groups in {:.2}s", names.len(), start.elapsed().as_secs_f64()))
}

fn invariance() -> Outcome {
    for name in ["A1", "A2", "A3", "A4", "B2", "B3", "B4", "D3", "D4"] {
        let map = exact_map(name);
        for &r in &map.group.simple_reflections() {
            let subs = map.group.reflections[r].substitution::<Rational>(map.dim()).unwrap();
            for (i, p) in map.polys.iter().enumerate() {
                ensure(&p.compose(&subs).unwrap() == p, || format!("{name}: p{} moved by reflection {r}", i + 1))?;
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst = 0.0f64;
    for m in 3..=8 {
        let map: ChevalleyMap<f64> = basic_invariants(&group(&format!("I2({m})"))).unwrap();
        for _ in 0..100 {
            let x: Vec<f64> = (0..2).map(|_| rand::Rng::gen_range(&mut rng, -1.0..1.0)).collect();
            let px = map.eval(&x).unwrap();
            for &r in &map.group.simple_reflections() {
                let prx = map.eval(&map.group.reflections[r].apply(&x).unwrap()).unwrap();
                for (a, b) in px.iter().zip(&prx) {
                    worst = worst.max((a - b).abs());
                }
            }
        }
    }
    ensure(worst <= 1e-12, || format!("dihedral sup deviation {worst:e}"))?;
    Ok(format!("A/B/D exact; dihedral sup deviation {worst:.1e}"))
}

fn jacobian_factorization() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for name in ["A2", "A3", "B2", "B3", "D3", "D4"] {
        let map = exact_map(name);
        let f = map.verify_jacobian_factorization().map_err(|e| format!("{name}: {e}"))?;
        ensure(f.residual.is_zero(), || format!("{name}: nonzero residual"))?;
        // pointwise: det J_P(x) = c ∏ λ_τ(x)
        let x: Vec<Rational> = random_chamber_point(&mut rng, &map, 0.01, 5).unwrap();
        let det = coxinv_core::linalg::determinant(map.jacobian(&x).unwrap(), 0.0);
        let prod = map.group.reflections.iter().fold(Rational::one(), |acc, r| acc * r.linear_form_value(&x).unwrap());
        ensure(det == f.c.clone() * prod, || format!("{name}: pointwise det disagrees with c ∏λ"))?;
    }
    let map: ChevalleyMap<f64> = basic_invariants(&group("I2(5)")).unwrap();
    let f = map.verify_jacobian_factorization().map_err(|e| format!("I2(5): {e}"))?;
    ensure(f.residual_norm() <= 1e-9, || format!("I2(5) residual {:e}", f.residual_norm()))?;
    let c = exact_map("B2").verify_jacobian_factorization().unwrap().c;
    ensure(c == q(-8, 1), || format!("B2 c = {c}"))?;
    Ok(format!("exact residual 0 on 6 groups; I2(5) residual {:.1e}; B2 c = -8", f.residual_norm()))
}

fn rewrite_round_trip() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let groups = ["A1", "A2", "A3", "B2", "B3", "D3", "D4"];
    for name in groups {
        let map = exact_map(name);
        let mut rw = Rewriter::new(&map);
        for _ in 0..100 {
            let (big_f, f) = random_invariant(&mut rng, &mut rw, &map.degrees, 12, 5).unwrap();
            let back = rw.rewrite(&f).map_err(|e| format!("{name}: {e}"))?;
            ensure(rw.compose(&back).unwrap() == f, || format!("{name}: compose(rewrite(f)) ≠ f for {f}"))?;
            ensure(back == big_f, || format!("{name}: rewrite is not unique"))?;
            let x: Vec<Rational> = random_point(&mut rng, map.dim());
            ensure(back.evaluate(&map.eval(&x).unwrap()).unwrap() == f.evaluate(&x).unwrap(), || format!("{name}: F(P(x)) ≠ f(x)"))?;
        }
    }
    within(start.elapsed(), 60)?;
    Ok(format!("{} inputs in {:.2}s", 100 * groups.len(), start.elapsed().as_secs_f64()))
}

fn jet_round_trip() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut on_mirror = 0;
    for name in ["A1", "A2", "B2", "D3"] {
        let map = exact_map(name);
        for r in [1, 2] {
            for _ in 0..50 {
                let a: Vec<Rational> = random_point_within(&mut rng, map.dim(), 3);
                if map.jacobian_determinant().evaluate(&a).unwrap().is_zero() {
                    on_mirror += 1;
                }
                let f_jet = random_jet(&mut rng, map.eval(&a).unwrap(), r);
                let composed = compose_jet(&map, &f_jet, &a).unwrap();
                let field = JetField::new(composed.order, vec![composed]).unwrap();
                let back = recover_jet(&map, &field, &a, r).map_err(|e| format!("{name}, r = {r}: {e}"))?;
                ensure(back == f_jet, || format!("{name}, r = {r}: recovered jet differs at {a:?}"))?;
            }
        }
    }
    Ok(format!("400 jets exact ({on_mirror} based on mirrors)"))
}

fn cramer_vs_rewrite() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for name in ["A2", "A3", "B2", "B3", "D3", "D4"] {
        let map = exact_map(name);
        let mut rw = Rewriter::new(&map);
        for _ in 0..50 {
            let (_, f) = random_invariant(&mut rng, &mut rw, &map.degrees, 12, 5).unwrap();
            let big_f = rw.rewrite(&f).unwrap();
            let x = random_chamber_point(&mut rng, &map, 0.01, 5).unwrap();
            let grad: Vec<Rational> = f.gradient().iter().map(|p| p.evaluate(&x).unwrap()).collect();
            let v = cramer_first_derivatives(&map, &grad, &x).map_err(|e| format!("{name}: {e}"))?;
            let y = map.eval(&x).unwrap();
            let expected: Vec<Rational> = big_f.gradient().iter().map(|p| p.evaluate(&y).unwrap()).collect();
            ensure(v == expected, || format!("{name}: Cramer {v:?} vs rewrite {expected:?}"))?;
        }
    }
    Ok("300 chamber points exact".into())
}

fn epsilon_checks() -> Outcome {
    let map = exact_map("B2");
    let x = vec![q(3, 2), q(-2, 3)];
    let t = q(-5, 3);
    let tx: Vec<Rational> = x.iter().map(|v| v * &t).collect();
    let mut count = 0;
    for alpha in MultiIndex::all_up_to(2, 8) {
        for beta in MultiIndex::all_up_to(2, 8) {
            let e = epsilon_beta(&map, &alpha, &beta, &x).unwrap();
            let et = epsilon_beta(&map, &alpha, &beta, &tx).unwrap();
            let expected_degree = beta.weighted_order(&map.degrees) as i64 - alpha.order() as i64;
            ensure(e.homogeneity_degree == expected_degree, || format!("degree of ε({alpha}, {beta})"))?;
            let factor = if expected_degree >= 0 {
                t.powi(expected_degree as u32)
            } else {
                ensure(e.value.is_zero(), || format!("ε({alpha}, {beta}) should vanish"))?;
                Rational::one()
            };
            ensure(et.value == e.value * factor, || format!("ε({alpha}, {beta}) is not homogeneous"))?;
            count += 1;
        }
    }
    let p = vec![Poly::monomial(MultiIndex::new(vec![2]), Rational::one())];
    let x1 = vec![q(3, 2)];
    let a2 = MultiIndex::new(vec![2]);
    let e1 = epsilon_weight(&p, &[2], &a2, &MultiIndex::new(vec![1]), &x1).unwrap().value;
    let e2 = epsilon_weight(&p, &[2], &a2, &MultiIndex::new(vec![2]), &x1).unwrap().value;
    ensure(e1 == q(2, 1), || format!("ε(2, 1) = {e1}, want 2"))?;
    ensure(e2 == q(4, 1) * &x1[0] * &x1[0], || format!("ε(2, 2) = {e2}, want 4x² = 9"))?;
    Ok(format!("{count} (α, β) pairs homogeneous; 1D chain rule 2 and 4x² reproduced"))
}

fn differentiability_loss() -> Outcome {
    let start = Instant::now();
    let map: ChevalleyMap<f64> = basic_invariants(&group("B2")).unwrap();
    let hr = 4;
    let samples: Vec<Vec<f64>> = (0..16).map(|i| {
        let s = 10f64.powf(-1.0 - 0.2 * i as f64);
        vec![s, s / 3.0]
    }).collect();
    // F = p1^{9/4}: ∂^{(b,0)}F = (9/4)(9/4 − 1)⋯(9/4 − b + 1) p1^{9/4 − b}
    let jets: Vec<Jet<f64>> = samples
        .iter()
        .map(|x| {
            let y = map.eval(x).unwrap();
            let mut jet = Jet::zero(y.clone(), hr);
            for beta in MultiIndex::all_up_to(2, hr) {
                let b = beta.get(0);
                let v = if beta.get(1) > 0 {
                    0.0
                } else {
                    (0..b).map(|j| 2.25 - j as f64).product::<f64>() * y[0].powf(2.25 - b as f64)
                };
                jet.set(beta, v);
            }
            jet
        })
        .collect();
    let field = JetField::new(hr, jets).unwrap();
    let beta = MultiIndex::new(vec![3, 0]);
    let terms: Vec<_> = weighted_derivative_terms(&map, &field, hr, &samples)
        .map_err(|e| e.to_string())?
        .into_iter()
        .filter(|t| t.beta == beta)
        .collect();
    let log_r: Vec<f64> = terms.iter().map(|t| (samples[t.sample][0].hypot(samples[t.sample][1])).ln()).collect();
    let raw = fit_slope(&log_r, &terms.iter().map(|t| t.raw.ln()).collect::<Vec<_>>()).ok_or("no raw slope")?;
    let weighted = fit_slope(&log_r, &terms.iter().map(|t| t.weighted.ln()).collect::<Vec<_>>()).ok_or("no weighted slope")?;
    ensure((raw + 1.5).abs() <= 0.2, || format!("raw slope {raw:.3}, want -1.5 ± 0.2"))?;
    ensure((weighted - 0.5).abs() <= 0.2, || format!("weighted slope {weighted:.3}, want 0.5 ± 0.2"))?;
    within(start.elapsed(), 5)?;
    Ok(format!("raw slope {raw:.3}, weighted slope {weighted:.3}"))
}

fn regularity() -> Outcome {
    let cfg = ProbeConfig { samples: 4000, ..ProbeConfig::default() };
    let mut parts = Vec::new();
    for name in ["B2", "A2"] {
        let map: ChevalleyMap<f64> = basic_invariants(&group(name)).unwrap();
        let report = regularity_probe(&map, &cfg).map_err(|e| format!("{name}: {e}"))?;
        let at = |n: usize| report.refinement_curve.iter().find(|(k, _)| *k == n).map(|(_, r)| *r);
        let (r2, r4) = (at(2000).ok_or("missing 2000")?, at(4000).ok_or("missing 4000")?);
        let change = (r4 - r2).abs() / r2;
        ensure(change < 0.2, || format!("{name}: ratio {r2:.4} → {r4:.4}"))?;
        parts.push(format!("{name} {r2:.4}→{r4:.4}"));
    }
    let control = identity_regularity_probe(2, &ProbeConfig::default()).map_err(|e| e.to_string())?;
    ensure(control.max_ratio <= 1.05, || format!("identity ratio {:.4}", control.max_ratio))?;
    parts.push(format!("identity {:.4}", control.max_ratio));
    Ok(parts.join(", "))
}

fn ledger() -> Outcome {
    let map = exact_map("B2");
    let continuous = |v: Verdict| v != Verdict::Lost;
    let global = continuity_ledger(&map, 1, None);
    let expected: Vec<MultiIndex> = MultiIndex::all_up_to(2, 4)
        .into_iter()
        .filter(|b| 2 * b.get(0) + 4 * b.get(1) <= 4)
        .collect();
    let mut got: Vec<MultiIndex> = global.iter().filter(|e| continuous(e.verdict)).map(|e| e.beta.clone()).collect();
    got.sort();
    let mut want = expected.clone();
    want.sort();
    ensure(global.len() == MultiIndex::all_up_to(2, 4).len(), || "ledger does not cover |β| ≤ 4".into())?;
    ensure(got == want, || format!("continuous set {got:?}, want {want:?}"))?;
    let s = stratify(&map.group, &[q(1, 1), q(0, 1)], 0.0).unwrap();
    let local = continuity_ledger(&map, 1, Some(&s));
    let local_set: Vec<&MultiIndex> = local.iter().filter(|e| continuous(e.verdict)).map(|e| &e.beta).collect();
    ensure(want.iter().all(|b| local_set.contains(&b)), || "stratum ledger misses a globally continuous β".into())?;
    Ok(format!("{} continuous globally, {} on the stratum y = 0", want.len(), local_set.len()))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        ("group data identities", group_identities),
        ("invariance", invariance),
        ("Jacobian factorization", jacobian_factorization),
        ("rewrite round trip", rewrite_round_trip),
        ("jet round trip", jet_round_trip),
        ("Cramer vs rewrite", cramer_vs_rewrite),
        ("epsilon homogeneity and hand cases", epsilon_checks),
        ("differentiability-loss probe", differentiability_loss),
        ("1-regularity probe", regularity),
        ("ledger correctness", ledger),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let outcome = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|_| Err("panicked".into()));
        match outcome {
            Ok(detail) => println!("[PASS] {:>2} {name}: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("[FAIL] {:>2} {name}: {detail}", i + 1);
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
