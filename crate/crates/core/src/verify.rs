//! Self-check suite for one group, as run by `coxinv verify-all`.

use num::BigUint;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::chevalley::{basic_invariants, ChevalleyMap, Rewriter, FLOAT_IDENTITY_TOL};
use crate::error::Result;
use crate::geometry::{chamber_walls, default_tol, fundamental_domain_rep, stratify};
use crate::groups::{build_group, group_order, orbit, GroupData, GroupSpec};
use crate::jets::JetField;
use crate::polynomial::{MultiIndex, Poly};
use crate::sampling::{random_chamber_point, random_invariant, random_jet, random_point, random_point_within};
use crate::scalar::{dot, norm_sq, sub_vec, to_f64_vec, Rational, Scalar};
use crate::transfer::{compose_jet, continuity_ledger, cramer_first_derivatives, recover_jet, CramerSystem, Verdict};

#[derive(Clone, Debug, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq)]
pub struct VerifyReport {
    pub group: GroupSpec,
    pub exact: bool,
    pub checks: Vec<Check>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn to_json(&self) -> Value {
        json!({
            "group": self.group.to_json(),
            "exact": self.exact,
            "passed": self.passed(),
            "checks": self.checks.iter().map(|c| json!({"name": c.name, "passed": c.passed, "detail": c.detail})).collect::<Vec<_>>(),
        })
    }
}

struct Suite {
    checks: Vec<Check>,
}

impl Suite {
    fn run(&mut self, name: &'static str, body: impl FnOnce() -> Result<(bool, String)>) {
        let (passed, detail) = body().unwrap_or_else(|e| (false, format!("error: {e}")));
        self.checks.push(Check { name, passed, detail });
    }
}

fn poly_close<S: Scalar>(a: &Poly<S>, b: &Poly<S>) -> bool {
    let scale = a.max_abs_coeff().max(b.max_abs_coeff()).max(1.0);
    let tol = if S::EXACT { 0.0 } else { FLOAT_IDENTITY_TOL };
    (a - b).max_abs_coeff() <= tol * scale
}

/// Weighted sup-norm comparison `max |wᵢ(aᵢ − bᵢ)| ≤ tol·max |wᵢaᵢ|, |wᵢbᵢ|, 1`;
/// exact equality on the rational path.
fn weighted_close<S: Scalar>(a: &[S], b: &[S], w: &[f64]) -> bool {
    if S::EXACT {
        return a == b;
    }
    let inf = |v: &[S]| v.iter().zip(w).map(|(c, wi)| (c.to_f64() * wi).abs()).fold(0.0, f64::max);
    let scale = inf(a).max(inf(b)).max(1.0);
    a.iter()
        .zip(b)
        .zip(w)
        .all(|((x, y), wi)| ((x.to_f64() - y.to_f64()) * wi).abs() <= FLOAT_IDENTITY_TOL * scale)
}

/// `ρ^{Σβᵢkᵢ}`, making `∂^βF` comparable across `β` at `|x| = ρ`.
fn homogeneity_weights<S: Scalar>(betas: &[MultiIndex], degrees: &[u32], x: &[S]) -> Vec<f64> {
    let rho = norm_sq(&to_f64_vec(x)).sqrt();
    betas.iter().map(|b| rho.powi(b.weighted_order(degrees) as i32)).collect()
}

const ROUNDS: usize = 8;

fn suite<S: Scalar>(g: &GroupData, seed: u64) -> Result<Vec<Check>> {
    let map: ChevalleyMap<S> = basic_invariants(g)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut s = Suite { checks: Vec::new() };
    let n = g.dim;
    let bound = if S::EXACT { 9 } else { 2 };
    let max_weight = if S::EXACT { 2 * g.h } else { g.h };

    s.run("reflection-count", || Ok((g.d == g.degree_excess(), format!("d = {}, Σ(k−1) = {}", g.d, g.degree_excess()))));
    s.run("degree-product", || {
        let product: BigUint = g.degrees.iter().map(|&k| BigUint::from(k)).product();
        let order = group_order(g);
        Ok((product == order, format!("∏k = {product}, |W| = {order}")))
    });
    s.run("reflections", || {
        for _ in 0..ROUNDS {
            let x: Vec<S> = random_point(&mut rng, n);
            let xf = to_f64_vec(&x);
            for r in &g.reflections {
                let nu = r.normal.to_f64();
                let back = r.apply(&r.apply(&xf)?)?;
                let t = dot(&nu, &xf) / norm_sq(&nu);
                let on_h: Vec<f64> = xf.iter().zip(&nu).map(|(a, b)| a - t * b).collect();
                let moved = sub_vec(&r.apply(&on_h)?, &on_h);
                if norm_sq(&sub_vec(&back, &xf)).sqrt() > 1e-12 * (1.0 + norm_sq(&xf).sqrt())
                    || norm_sq(&moved).sqrt() > 1e-12 * (1.0 + norm_sq(&xf).sqrt())
                {
                    return Ok((false, "reflection is not an involution fixing its mirror".into()));
                }
            }
        }
        Ok((true, format!("{} reflections", g.d)))
    });
    s.run("invariance", || {
        for (i, p) in map.polys.iter().enumerate() {
            if let Some(r) = map.invariance_violation(p)? {
                return Ok((false, format!("p{} moved by reflection {r}", i + 1)));
            }
        }
        Ok((true, format!("{} invariants", map.polys.len())))
    });
    s.run("jacobian-factorization", || {
        let f = map.verify_jacobian_factorization()?;
        Ok((true, format!("c = {:?}, residual {:e}", f.c.to_f64(), f.residual_norm())))
    });
    s.run("cofactor-identity", || {
        let c = CramerSystem::new(&map);
        let ok = c.verify_cofactor_identity(&map) && c.verify_minor_degrees();
        Ok((ok, "Σ(−1)^{i+j} M_ij ∂p_l/∂x_i = δ_jl det".into()))
    });
    let mut rewriter = Rewriter::new(&map);
    s.run("rewrite-round-trip", || {
        for _ in 0..ROUNDS {
            let (big_f, f) = random_invariant(&mut rng, &mut rewriter, &map.degrees, max_weight, 4)?;
            let back = rewriter.rewrite(&f)?;
            if !poly_close(&rewriter.compose(&back)?, &f) || !poly_close(&back, &big_f) {
                return Ok((false, format!("rewrite of {f} failed")));
            }
        }
        Ok((true, format!("{ROUNDS} random invariants")))
    });
    s.run("jet-round-trip", || {
        for _ in 0..ROUNDS {
            let a: Vec<S> = random_point_within(&mut rng, n, bound);
            let f_jet = random_jet(&mut rng, map.eval(&a)?, 1);
            let composed = compose_jet(&map, &f_jet, &a)?;
            let field = JetField::new(composed.order, vec![composed])?;
            let back = recover_jet(&map, &field, &a, 1)?;
            let ks = MultiIndex::all_up_to(map.polys.len(), 1);
            let got: Vec<S> = ks.iter().map(|k| back.coeff(k)).collect();
            let want: Vec<S> = ks.iter().map(|k| f_jet.coeff(k)).collect();
            if !weighted_close(&got, &want, &homogeneity_weights(&ks, &map.degrees, &a)) {
                return Ok((false, "recovered jet differs".into()));
            }
        }
        Ok((true, format!("{ROUNDS} random order-1 jets")))
    });
    s.run("cramer-vs-rewrite", || {
        for _ in 0..ROUNDS {
            let (big_f, f) = random_invariant(&mut rng, &mut rewriter, &map.degrees, max_weight, 4)?;
            let x = random_chamber_point(&mut rng, &map, 0.05, bound)?;
            let grad: Vec<S> = f.gradient().iter().map(|p| p.evaluate(&x)).collect::<Result<_>>()?;
            let v = cramer_first_derivatives(&map, &grad, &x)?;
            let px = map.eval(&x)?;
            let expected: Vec<S> = big_f.gradient().iter().map(|p| p.evaluate(&px)).collect::<Result<_>>()?;
            let units: Vec<MultiIndex> = (0..v.len()).map(|j| MultiIndex::unit(v.len(), j)).collect();
            if !weighted_close(&v, &expected, &homogeneity_weights(&units, &map.degrees, &x)) {
                return Ok((false, format!("Cramer solution differs from the rewrite gradient: {:?} vs {:?} at {:?}", to_f64_vec(&v), to_f64_vec(&expected), to_f64_vec(&x))));
            }
        }
        Ok((true, format!("{ROUNDS} regular points")))
    });
    s.run("ledger", || {
        let stratum = stratify::<S>(g, &vec![S::zero(); n], 0.0)?;
        let ledger = continuity_ledger(&map, 1, Some(&stratum));
        let ok = ledger.iter().all(|e| {
            (e.verdict == Verdict::ContinuousOnImage) == (e.weighted_order <= e.threshold)
                && e.stratum_weighted_order.is_some_and(|w| w <= e.weighted_order)
        });
        Ok((ok, format!("{} entries", ledger.len())))
    });
    s.run("fundamental-domain", || {
        let walls = chamber_walls(g);
        let capped = g.spec.factors.iter().map(|f| f.order_formula()).product::<BigUint>() <= BigUint::from(50_000u32);
        for _ in 0..ROUNDS {
            let x: Vec<S> = random_point(&mut rng, n);
            let rep = fundamental_domain_rep(g, &x)?;
            let rf = to_f64_vec(&rep);
            if walls.iter().any(|w| dot(w, &rf) < -1e-9) {
                return Ok((false, "representative outside the chamber".into()));
            }
            let px = map.eval(&x)?;
            let pr = map.eval(&rep)?;
            let radius = norm_sq(&to_f64_vec(&x)).sqrt();
            if !px.iter().zip(&pr).zip(&map.degrees).all(|((a, b), &k)| {
                let scale = a.to_f64().abs().max(radius.powi(k as i32)).max(1.0);
                (a.clone() - b.clone()).is_zero_within(1e-9 * scale)
            }) {
                return Ok((false, "representative changes P".into()));
            }
            let sx = stratify(g, &x, default_tol(&x))?;
            let sr = stratify(g, &rep, default_tol(&rep))?;
            if sx.isotropy_order() != sr.isotropy_order() {
                return Ok((false, "isotropy order changed".into()));
            }
            if capped && S::EXACT && !orbit(g, &x)?.contains(&rep) {
                return Ok((false, "representative not in the orbit".into()));
            }
        }
        Ok((true, format!("{ROUNDS} random points")))
    });
    Ok(s.checks)
}

/// Runs every check on the exact path for rational groups, on the float
/// path otherwise.
pub fn verify_all(spec: &GroupSpec, seed: u64) -> Result<VerifyReport> {
    let g = build_group(spec)?;
    let exact = g.is_rational();
    let checks = if exact { suite::<Rational>(&g, seed)? } else { suite::<f64>(&g, seed)? };
    Ok(VerifyReport { group: spec.clone(), exact, checks })
}
