//! Basic invariants and the Chevalley mapping `P = (p₁, …, p_n)`.
//!
//! Invariants follow the classical power-sum choices: `Σ xᵢᵏ` for Aₙ,
//! `Σ xᵢ²ʲ` for Bₙ, the same plus `x₁⋯x_n` for Dₙ, and for I₂(m) the pair
//! `x² + y²`, `Σⱼ (x cos 2jπ/m + y sin 2jπ/m)ᵐ`. Each invariant carries a
//! pivot multi-index `αᵢ` with `|αᵢ| = kᵢ` and `∂^{αᵢ}pᵢ ≠ 0`, used by the
//! triangular jet identification in [`crate::transfer`].

use std::collections::{BTreeMap, HashMap};
use std::f64::consts::PI;

use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::groups::{BlockKind, FactorKind, GroupData, Root};
use crate::linalg::{self, Matrix};
use crate::polynomial::{variable_names, MultiIndex, Poly};
use crate::scalar::{Rational, Scalar, FLOAT_TOL};

/// Relative tolerance of float-path identities.
pub const FLOAT_IDENTITY_TOL: f64 = 1e-9;

#[derive(Clone, Debug)]
pub struct ChevalleyMap<S> {
    pub group: GroupData,
    pub polys: Vec<Poly<S>>,
    pub degrees: Vec<u32>,
    /// `c` in `det J_P = c ∏ λ_τ`, set by [`ChevalleyMap::fill_jacobian_constant`].
    pub jacobian_constant: Option<S>,
    pivots: Vec<MultiIndex>,
    block_of: Vec<usize>,
}

/// Result of checking `det J_P = c ∏ λ_τ`.
#[derive(Clone, Debug)]
pub struct JacobianFactorization<S> {
    pub c: S,
    pub determinant: Poly<S>,
    pub reflection_product: Poly<S>,
    pub residual: Poly<S>,
}

impl<S: Scalar> JacobianFactorization<S> {
    pub fn residual_norm(&self) -> f64 {
        self.residual.max_abs_coeff()
    }
}

fn power_sum<S: Scalar>(n: usize, offset: usize, len: usize, k: u32) -> Poly<S> {
    Poly::from_terms(
        n,
        (offset..offset + len).map(|i| {
            let mut e = vec![0; n];
            e[i] = k;
            (MultiIndex::new(e), S::one())
        }),
    )
}

fn pivot_power(n: usize, i: usize, k: u32) -> MultiIndex {
    let mut e = vec![0; n];
    e[i] = k;
    MultiIndex::new(e)
}

fn binomial(n: u32, k: u32) -> i64 {
    (0..k).fold(1i64, |acc, i| acc * (n - i) as i64 / (i + 1) as i64)
}

/// `Σ_{j=1}^{m} (x cos 2jπ/m + y sin 2jπ/m)^m` expanded in floating point.
pub fn dihedral_invariant_trig(n: usize, offset: usize, m: u32) -> Poly<f64> {
    let x = Poly::<f64>::var(n, offset);
    let y = Poly::<f64>::var(n, offset + 1);
    let mut acc = Poly::zero(n);
    for j in 1..=m {
        let t = 2.0 * j as f64 * PI / m as f64;
        let l = &x.scale(&t.cos()) + &y.scale(&t.sin());
        acc = &acc + &l.pow(m);
    }
    let scale = acc.max_abs_coeff().max(1.0);
    acc.prune(FLOAT_TOL * scale)
}

/// The same polynomial in closed form with rational coefficients:
/// `m 2^{−m} [2 Re(z^m) + [m even] C(m, m/2) |z|^m]`, `z = x + iy`.
pub fn dihedral_invariant_exact(n: usize, offset: usize, m: u32) -> Poly<Rational> {
    let mut acc = Poly::zero(n);
    for k in (0..=m).step_by(2) {
        let sign = if (k / 2) % 2 == 0 { 1 } else { -1 };
        let mut e = vec![0; n];
        e[offset] = m - k;
        e[offset + 1] = k;
        acc.add_term(MultiIndex::new(e), Rational::from_i64(2 * sign * binomial(m, k)));
    }
    if m.is_multiple_of(2) {
        let r2 = &Poly::<Rational>::var(n, offset).pow(2) + &Poly::var(n, offset + 1).pow(2);
        acc = &acc + &r2.pow(m / 2).scale(&Rational::from_i64(binomial(m, m / 2)));
    }
    let factor = Rational::new(m.into(), num::BigInt::from(2).pow(m));
    acc.scale(&factor)
}

/// Whether exact arithmetic is offered for a dihedral factor.
pub fn dihedral_exact_allowed(m: u32) -> bool {
    matches!(m, 3 | 4 | 6)
}

/// Builds the basic invariants of `g`.
pub fn basic_invariants<S: Scalar>(g: &GroupData) -> Result<ChevalleyMap<S>> {
    let n = g.dim;
    let mut polys = Vec::new();
    let mut degrees = Vec::new();
    let mut pivots = Vec::new();
    let mut block_of = Vec::new();
    for (b, block) in g.blocks.iter().enumerate() {
        let o = block.offset;
        let mut entries: Vec<(u32, Poly<S>, MultiIndex)> = Vec::new();
        match block.kind {
            BlockKind::Fixed => {
                for i in o..o + block.dim {
                    entries.push((1, Poly::var(n, i), MultiIndex::unit(n, i)));
                }
            }
            BlockKind::Factor(f) => match f.kind {
                FactorKind::A => {
                    for k in 1..=block.dim as u32 {
                        entries.push((k, power_sum(n, o, block.dim, k), pivot_power(n, o, k)));
                    }
                }
                FactorKind::B => {
                    for j in 1..=block.dim as u32 {
                        entries.push((2 * j, power_sum(n, o, block.dim, 2 * j), pivot_power(n, o, 2 * j)));
                    }
                }
                FactorKind::D => {
                    for j in 1..block.dim as u32 {
                        entries.push((2 * j, power_sum(n, o, block.dim, 2 * j), pivot_power(n, o, 2 * j)));
                    }
                    let mut ones = vec![0; n];
                    ones[o..o + block.dim].iter_mut().for_each(|e| *e = 1);
                    let q = MultiIndex::new(ones);
                    entries.push((block.dim as u32, Poly::monomial(q.clone(), S::one()), q));
                }
                FactorKind::I2 => {
                    let m = f.param;
                    entries.push((2, power_sum(n, o, 2, 2), pivot_power(n, o, 2)));
                    let p2 = if S::EXACT {
                        if !dihedral_exact_allowed(m) {
                            return Err(Error::InexactData(format!(
                                "I2({m}) is only available on the float path"
                            )));
                        }
                        dihedral_invariant_exact(n, o, m).map_coeffs(S::from_rational)
                    } else {
                        let p = dihedral_invariant_trig(n, o, m);
                        Poly::from_terms(
                            n,
                            p.terms()
                                .map(|(k, c)| Ok((k.clone(), S::from_f64(*c)?)))
                                .collect::<Result<Vec<_>>>()?,
                        )
                    };
                    entries.push((m, p2, pivot_power(n, o, m)));
                }
            },
        }
        // stable: equal degrees keep the power sum ahead of x₁⋯x_n
        entries.sort_by_key(|e| e.0);
        for (k, p, piv) in entries {
            degrees.push(k);
            polys.push(p);
            pivots.push(piv);
            block_of.push(b);
        }
    }
    debug_assert_eq!(degrees, g.degrees);
    Ok(ChevalleyMap {
        group: g.clone(),
        polys,
        degrees,
        jacobian_constant: None,
        pivots,
        block_of,
    })
}

fn check_dim(expected: usize, got: usize) -> Result<()> {
    if expected != got {
        return Err(Error::DimensionMismatch { expected, got });
    }
    Ok(())
}

/// Determinant of a polynomial matrix by Laplace expansion along rows,
/// memoized on the set of remaining columns.
pub fn poly_determinant<S: Scalar>(m: &[Vec<Poly<S>>], nvars: usize) -> Poly<S> {
    fn rec<S: Scalar>(
        m: &[Vec<Poly<S>>],
        row: usize,
        cols: u64,
        nvars: usize,
        memo: &mut HashMap<u64, Poly<S>>,
    ) -> Poly<S> {
        if row == m.len() {
            return Poly::one(nvars);
        }
        if let Some(p) = memo.get(&cols) {
            return p.clone();
        }
        let mut acc = Poly::zero(nvars);
        let mut sign_neg = false;
        for (c, entry) in m[row].iter().enumerate() {
            if cols & (1 << c) == 0 {
                continue;
            }
            if !entry.is_zero() {
                let sub = rec(m, row + 1, cols & !(1 << c), nvars, memo);
                if !sub.is_zero() {
                    let t = entry * &sub;
                    acc = if sign_neg { &acc - &t } else { &acc + &t };
                }
            }
            sign_neg = !sign_neg;
        }
        memo.insert(cols, acc.clone());
        acc
    }
    let n = m.len();
    assert!(n < 64, "matrix too large for bitmask expansion");
    rec(m, 0, (1u64 << n) - 1, nvars, &mut HashMap::new())
}

impl<S: Scalar> ChevalleyMap<S> {
    pub fn dim(&self) -> usize {
        self.group.dim
    }

    /// Largest degree `h`.
    pub fn h(&self) -> u32 {
        self.group.h
    }

    /// Pivot multi-indices `αᵢ`, one per invariant.
    pub fn pivots(&self) -> &[MultiIndex] {
        &self.pivots
    }

    /// Index of the group block each invariant belongs to.
    pub fn block_of(&self) -> &[usize] {
        &self.block_of
    }

    pub fn tolerance(&self) -> f64 {
        if S::EXACT {
            0.0
        } else {
            FLOAT_IDENTITY_TOL
        }
    }

    pub fn eval(&self, x: &[S]) -> Result<Vec<S>> {
        check_dim(self.dim(), x.len())?;
        self.polys.iter().map(|p| p.evaluate(x)).collect()
    }

    /// `J[i][j] = ∂pᵢ/∂xⱼ` as polynomials.
    pub fn jacobian_poly(&self) -> Vec<Vec<Poly<S>>> {
        self.polys.iter().map(Poly::gradient).collect()
    }

    pub fn jacobian(&self, x: &[S]) -> Result<Matrix<S>> {
        check_dim(self.dim(), x.len())?;
        self.jacobian_poly()
            .iter()
            .map(|row| row.iter().map(|p| p.evaluate(x)).collect())
            .collect()
    }

    pub fn jacobian_determinant(&self) -> Poly<S> {
        poly_determinant(&self.jacobian_poly(), self.dim())
    }

    /// `∏_τ λ_τ` over all reflections.
    pub fn reflection_product(&self) -> Result<Poly<S>> {
        let n = self.dim();
        self.group
            .reflections
            .iter()
            .try_fold(Poly::one(n), |acc, r| Ok(&acc * &r.linear_form::<S>()?))
    }

    /// Divides `det J_P` by `∏ λ_τ` and checks that the quotient is a
    /// nonzero constant.
    pub fn verify_jacobian_factorization(&self) -> Result<JacobianFactorization<S>> {
        let det = self.jacobian_determinant();
        let prod = self.reflection_product()?;
        let scale = det.max_abs_coeff().max(1.0);
        let tol = self.tolerance() * scale;
        let (quotient, remainder) = det.div_rem(&prod, FLOAT_TOL * scale);
        let c = quotient.constant_term();
        let stray = quotient.terms().any(|(k, v)| !k.is_zero() && !v.is_zero_within(tol));
        if stray {
            return Err(Error::FactorizationFailed(format!(
                "quotient {quotient} is not constant"
            )));
        }
        if c.is_zero_within(tol) {
            return Err(Error::FactorizationFailed("constant c vanishes".into()));
        }
        let residual = (&det - &prod.scale(&c)).prune(FLOAT_TOL * scale);
        if remainder.terms().any(|(_, v)| !v.is_zero_within(tol)) || residual.max_abs_coeff() > tol {
            return Err(Error::FactorizationFailed(format!("residual {residual}")));
        }
        Ok(JacobianFactorization { c, determinant: det, reflection_product: prod, residual })
    }

    pub fn fill_jacobian_constant(&mut self) -> Result<&S> {
        let c = self.verify_jacobian_factorization()?.c;
        Ok(self.jacobian_constant.insert(c))
    }

    pub fn to_f64(&self) -> ChevalleyMap<f64> {
        ChevalleyMap {
            group: self.group.clone(),
            polys: self.polys.iter().map(Poly::to_f64).collect(),
            degrees: self.degrees.clone(),
            jacobian_constant: self.jacobian_constant.as_ref().map(Scalar::to_f64),
            pivots: self.pivots.clone(),
            block_of: self.block_of.clone(),
        }
    }

    /// `F∘P` for a polynomial `F` in the invariants.
    pub fn compose_polynomial(&self, big_f: &Poly<S>) -> Result<Poly<S>> {
        big_f.compose(&self.polys)
    }

    /// Index of the first simple reflection `τ` with `f∘τ ≠ f`.
    pub fn invariance_violation(&self, f: &Poly<S>) -> Result<Option<usize>> {
        check_dim(self.dim(), f.nvars())?;
        let n = self.dim();
        let scale = f.max_abs_coeff().max(1.0);
        for idx in self.group.simple_reflections() {
            let r = &self.group.reflections[idx];
            let invariant = match (S::EXACT, r.root) {
                (true, Root::Mirror { .. }) => {
                    let ff = f.to_f64();
                    let img = ff.compose(&r.substitution::<f64>(n)?)?;
                    (&img - &ff).max_abs_coeff() <= FLOAT_IDENTITY_TOL * scale
                }
                _ => {
                    let img = f.compose(&r.substitution::<S>(n)?)?;
                    (&img - f).max_abs_coeff() <= self.tolerance() * scale
                }
            };
            if !invariant {
                return Ok(Some(idx));
            }
        }
        Ok(None)
    }

    pub fn variable_names(&self) -> Vec<String> {
        variable_names("p", self.polys.len())
    }

    pub fn to_json(&self) -> Value {
        let xs = variable_names("x", self.dim());
        json!({
            "group": self.group.spec.to_json(),
            "degrees": self.degrees,
            "invariants": self.polys.iter().map(Poly::to_json).collect::<Vec<_>>(),
            "pretty": self.polys.iter().map(|p| p.display_with(&xs)).collect::<Vec<_>>(),
        })
    }
}

/// All `β` with `Σ βᵢ kᵢ = target`, ascending graded-lex.
pub fn weighted_indices(weights: &[u32], target: u32) -> Vec<MultiIndex> {
    fn rec(weights: &[u32], i: usize, left: u32, cur: &mut Vec<u32>, out: &mut Vec<MultiIndex>) {
        if i == weights.len() {
            if left == 0 {
                out.push(MultiIndex::new(cur.clone()));
            }
            return;
        }
        let w = weights[i];
        for e in 0..=left / w {
            cur.push(e);
            rec(weights, i + 1, left - e * w, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(weights, 0, target, &mut Vec::new(), &mut out);
    out.sort();
    out
}

struct DegreeBasis<S> {
    betas: Vec<MultiIndex>,
    polys: Vec<Poly<S>>,
    pivot_monomials: Vec<MultiIndex>,
    /// Inverse of the square system restricted to the pivot monomials.
    inverse: Matrix<S>,
}

/// Rewrites invariant polynomials in the basic invariants, caching the
/// products `P^β` and the per-degree linear systems.
pub struct Rewriter<'a, S> {
    map: &'a ChevalleyMap<S>,
    powers: HashMap<MultiIndex, Poly<S>>,
    bases: BTreeMap<u32, DegreeBasis<S>>,
}

impl<'a, S: Scalar> Rewriter<'a, S> {
    pub fn new(map: &'a ChevalleyMap<S>) -> Self {
        Rewriter { map, powers: HashMap::new(), bases: BTreeMap::new() }
    }

    /// `P^β` as a polynomial in `x`.
    pub fn power(&mut self, beta: &MultiIndex) -> Poly<S> {
        if let Some(p) = self.powers.get(beta) {
            return p.clone();
        }
        let n = self.map.dim();
        let p = match beta.exponents().iter().rposition(|&e| e > 0) {
            None => Poly::one(n),
            Some(i) => {
                let lower = beta.minus(&MultiIndex::unit(beta.len(), i)).expect("βᵢ > 0");
                &self.power(&lower) * &self.map.polys[i]
            }
        };
        self.powers.insert(beta.clone(), p.clone());
        p
    }

    /// `F∘P` through the cached powers.
    pub fn compose(&mut self, big_f: &Poly<S>) -> Result<Poly<S>> {
        check_dim(self.map.polys.len(), big_f.nvars())?;
        let mut out = Poly::zero(self.map.dim());
        for (beta, c) in big_f.terms() {
            out = &out + &self.power(beta).scale(c);
        }
        Ok(out)
    }

    fn basis(&mut self, degree: u32) -> Result<&DegreeBasis<S>> {
        if !self.bases.contains_key(&degree) {
            let betas = weighted_indices(&self.map.degrees, degree);
            let polys: Vec<Poly<S>> = betas.iter().map(|b| self.power(b)).collect();
            let monomials: Vec<MultiIndex> = {
                let mut set: Vec<MultiIndex> =
                    polys.iter().flat_map(|p| p.terms().map(|(k, _)| k.clone())).collect();
                set.sort();
                set.dedup();
                set
            };
            let rows: Matrix<S> =
                polys.iter().map(|p| monomials.iter().map(|m| p.coeff(m)).collect()).collect();
            let tol = self.map.tolerance() * rows_scale(&rows);
            let piv = linalg::pivot_columns(&rows, tol);
            if piv.len() != betas.len() {
                return Err(Error::SolveFailed(format!(
                    "invariant products of degree {degree} are dependent"
                )));
            }
            // square system Aᵀ c = f|piv with A[β][μ] = coeff of μ in P^β
            let square: Matrix<S> = piv
                .iter()
                .map(|&col| rows.iter().map(|r| r[col].clone()).collect())
                .collect();
            let inverse = linalg::invert(&square, tol)
                .ok_or_else(|| Error::SolveFailed(format!("singular basis in degree {degree}")))?;
            let pivot_monomials = piv.iter().map(|&c| monomials[c].clone()).collect();
            self.bases.insert(degree, DegreeBasis { betas, polys, pivot_monomials, inverse });
        }
        Ok(&self.bases[&degree])
    }

    /// Finds `F` with `F∘P = f`, degree by degree.
    pub fn rewrite(&mut self, f: &Poly<S>) -> Result<Poly<S>> {
        if let Some(idx) = self.map.invariance_violation(f)? {
            return Err(Error::NotInvariant(idx));
        }
        let m = self.map.polys.len();
        let scale = f.max_abs_coeff().max(1.0);
        let tol = self.map.tolerance() * scale;
        let mut big_f = Poly::zero(m);
        let Some(top) = f.degree() else { return Ok(big_f) };
        for degree in 0..=top {
            let part = f.homogeneous_part(degree);
            if part.is_zero() {
                continue;
            }
            let basis = self.basis(degree)?;
            let rhs: Vec<S> = basis.pivot_monomials.iter().map(|mu| part.coeff(mu)).collect();
            let coeffs = linalg::mat_vec(&basis.inverse, &rhs);
            let mut residual = part.clone();
            for ((beta, p), c) in basis.betas.iter().zip(&basis.polys).zip(&coeffs) {
                residual = &residual - &p.scale(c);
                big_f.add_term(beta.clone(), c.clone());
            }
            if residual.max_abs_coeff() > tol {
                return Err(Error::SolveFailed(format!(
                    "degree {degree} part is not a combination of invariant products"
                )));
            }
        }
        Ok(big_f.prune(FLOAT_TOL * scale))
    }
}

fn rows_scale<S: Scalar>(rows: &Matrix<S>) -> f64 {
    rows.iter()
        .flat_map(|r| r.iter().map(|v| v.to_f64().abs()))
        .fold(1.0, f64::max)
}

/// One-shot form of [`Rewriter::rewrite`].
pub fn rewrite_invariant_polynomial<S: Scalar>(map: &ChevalleyMap<S>, f: &Poly<S>) -> Result<Poly<S>> {
    Rewriter::new(map).rewrite(f)
}
