//! Seeded random inputs: rationals, points, invariant polynomials and jets.

use rand::Rng;

use crate::chevalley::{weighted_indices, ChevalleyMap, Rewriter};
use crate::error::Result;
use crate::geometry::{active_reflections, default_tol};
use crate::jets::Jet;
use crate::polynomial::{MultiIndex, Poly};
use crate::scalar::{norm_sq, to_f64_vec, Rational, Scalar};

/// `p/q` with `|p| ≤ num_bound`, `1 ≤ q ≤ den_bound`.
pub fn random_rational<R: Rng>(rng: &mut R, num_bound: i64, den_bound: i64) -> Rational {
    Rational::new(rng.gen_range(-num_bound..=num_bound).into(), rng.gen_range(1..=den_bound).into())
}

pub fn random_scalar<S: Scalar, R: Rng>(rng: &mut R, num_bound: i64, den_bound: i64) -> S {
    S::from_rational(&random_rational(rng, num_bound, den_bound))
}

pub fn random_point<S: Scalar, R: Rng>(rng: &mut R, n: usize) -> Vec<S> {
    random_point_within(rng, n, 9)
}

/// Coordinates `p/q` with `|p/q| ≤ bound` and `q ≤ 4`.
pub fn random_point_within<S: Scalar, R: Rng>(rng: &mut R, n: usize, bound: i64) -> Vec<S> {
    (0..n)
        .map(|_| {
            let q = rng.gen_range(1..=4);
            S::from_rational(&Rational::new(rng.gen_range(-bound * q..=bound * q).into(), q.into()))
        })
        .collect()
}

/// Point of norm `≤ bound·√n` whose distance to every mirror is at least
/// `margin·|x|`.
pub fn random_chamber_point<S: Scalar, R: Rng>(rng: &mut R, map: &ChevalleyMap<S>, margin: f64, bound: i64) -> Result<Vec<S>> {
    loop {
        let x: Vec<S> = random_point_within(rng, map.dim(), bound);
        let xf = to_f64_vec(&x);
        let norm = norm_sq(&xf).sqrt();
        if norm == 0.0 {
            continue;
        }
        let mut clear = true;
        for r in &map.group.reflections {
            let nu = r.normal.to_f64();
            if r.linear_form_value(&xf)?.abs() < margin * norm * norm_sq(&nu).sqrt() {
                clear = false;
                break;
            }
        }
        if clear {
            return Ok(x);
        }
    }
}

/// Random point off every reflecting hyperplane.
pub fn random_regular_point<S: Scalar, R: Rng>(rng: &mut R, map: &ChevalleyMap<S>) -> Result<Vec<S>> {
    loop {
        let x = random_point::<S, R>(rng, map.dim());
        if active_reflections(&map.group, &x, 1e3 * default_tol(&x).max(1e-12))?.is_empty() {
            return Ok(x);
        }
    }
}

/// Random polynomial in `n` variables with at most `terms` terms, each of
/// weighted degree `≤ max_weight` for the given weights.
pub fn random_weighted_poly<S: Scalar, R: Rng>(rng: &mut R, weights: &[u32], max_weight: u32, terms: usize) -> Poly<S> {
    let pool: Vec<MultiIndex> = (0..=max_weight).flat_map(|w| weighted_indices(weights, w)).collect();
    let mut p = Poly::zero(weights.len());
    for _ in 0..terms {
        let k = pool[rng.gen_range(0..pool.len())].clone();
        let c: S = random_scalar(rng, 7, 5);
        p = &p + &Poly::monomial(k, c);
    }
    p
}

/// `(F, F∘P)` with `F` random of weighted degree `≤ max_weight`.
pub fn random_invariant<S: Scalar, R: Rng>(
    rng: &mut R,
    rewriter: &mut Rewriter<'_, S>,
    degrees: &[u32],
    max_weight: u32,
    terms: usize,
) -> Result<(Poly<S>, Poly<S>)> {
    let big_f = random_weighted_poly::<S, R>(rng, degrees, max_weight, terms);
    let f = rewriter.compose(&big_f)?;
    Ok((big_f, f))
}

/// Random order-`r` jet at `base` with every coefficient drawn.
pub fn random_jet<S: Scalar, R: Rng>(rng: &mut R, base: Vec<S>, r: u32) -> Jet<S> {
    let mut jet = Jet::zero(base.clone(), r);
    for k in MultiIndex::all_up_to(base.len(), r) {
        jet.set(k, random_scalar(rng, 9, 6));
    }
    jet
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chevalley::basic_invariants;
    use crate::groups::{build_group, GroupSpec};
    use rand::SeedableRng;
    use num::Zero;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn seeded_draws_repeat() {
        let a: Vec<Rational> = random_point(&mut ChaCha8Rng::seed_from_u64(3), 4);
        let b: Vec<Rational> = random_point(&mut ChaCha8Rng::seed_from_u64(3), 4);
        assert_eq!(a, b);
    }

    #[test]
    fn regular_points_avoid_mirrors() {
        let map = basic_invariants::<Rational>(&build_group(&GroupSpec::parse("B3").unwrap()).unwrap()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..20 {
            let x = random_regular_point(&mut rng, &map).unwrap();
            assert!(!map.jacobian_determinant().evaluate(&x).unwrap().is_zero());
        }
    }
}
