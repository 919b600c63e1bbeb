//! Transfer of jets between an invariant function `f` and `F` with `f = F∘P`.
//!
//! The forward direction composes an order-`r` jet of `F` at `P(a)` with the
//! displacement `U(y) = P(a + y) − P(a)`, giving an order-`hr` jet of `f` at
//! `a`. The inverse direction only makes sense on the image of that map:
//! its input must be a composed jet, not Taylor data of an arbitrary
//! invariant function. In one variable with `P = x²`, the Taylor jet of
//! `f = x⁴` at `0` of order 2 is `0`, yet `F = p²` has `F″ = 2`; the order-4
//! composed jet carries `f⁗(0) = 24` and recovers it.
//!
//! Recovery peels one derivative at a time with the Cramer system
//! `(∇G)∘U = adj(J_Pᵀ)∇g / det J_P`, an exact polynomial division, and the
//! last level with the triangular identification of [`lemma_recover_first_order`].

use std::collections::BTreeMap;

use serde_json::{json, Value};

use crate::chevalley::{poly_determinant, ChevalleyMap, FLOAT_IDENTITY_TOL};
use crate::error::{Error, Result};
use crate::geometry::{self, StratumInfo};
use crate::jets::{seminorms, Jet, JetField};
use crate::linalg;
use crate::polynomial::{MultiIndex, Poly};
use crate::scalar::{point_to_json, Scalar, FLOAT_TOL};

fn tolerance<S: Scalar>() -> f64 {
    if S::EXACT {
        0.0
    } else {
        FLOAT_IDENTITY_TOL
    }
}

fn close<S: Scalar>(a: &S, b: &S) -> bool {
    let scale = a.to_f64().abs().max(b.to_f64().abs()).max(1.0);
    (a.clone() - b.clone()).is_zero_within(tolerance::<S>() * scale)
}

/// `U(y) = P(a + y) − P(a)`.
pub fn displacement<S: Scalar>(polys: &[Poly<S>], a: &[S]) -> Result<Vec<Poly<S>>> {
    polys
        .iter()
        .map(|p| {
            let shifted = p.shift(a)?;
            let c = shifted.constant_term();
            Ok(&shifted - &Poly::constant(a.len(), c))
        })
        .collect()
}

/// Order-`hr` jet at `a` of `(Taylor polynomial of F_jet)∘P`.
pub fn compose_jet<S: Scalar>(map: &ChevalleyMap<S>, f_jet: &Jet<S>, a: &[S]) -> Result<Jet<S>> {
    let b = map.eval(a)?;
    if f_jet.nvars() != b.len() {
        return Err(Error::DimensionMismatch { expected: b.len(), got: f_jet.nvars() });
    }
    if !b.iter().zip(&f_jet.base).all(|(x, y)| close(x, y)) {
        return Err(Error::BasePointMismatch);
    }
    let top = map.h() * f_jet.order;
    let u = displacement(&map.polys, a)?;
    let g = f_jet.taylor_poly().compose_truncated(&u, top)?;
    Ok(Jet::from_taylor(&g, a.to_vec(), top))
}

/// Coefficient of `∂^βF∘P(x)` in `∂^α(F∘P)(x)`.
#[derive(Clone, Debug, PartialEq)]
pub struct EpsilonWeight<S> {
    pub alpha: MultiIndex,
    pub beta: MultiIndex,
    pub value: S,
    /// `Σ kⱼβⱼ − |α|`.
    pub homogeneity_degree: i64,
}

impl<S: Scalar> EpsilonWeight<S> {
    pub fn to_json(&self) -> Value {
        json!({
            "alpha": self.alpha.exponents(),
            "beta": self.beta.exponents(),
            "value": self.value.to_json(),
            "homogeneity_degree": self.homogeneity_degree,
        })
    }
}

/// `U^β / β!` truncated at total degree `max_deg`.
fn scaled_power<S: Scalar>(u: &[Poly<S>], beta: &MultiIndex, max_deg: u32) -> Poly<S> {
    let n = u.first().map_or(0, Poly::nvars);
    let mut acc = Poly::one(n);
    for (s, &e) in beta.exponents().iter().enumerate() {
        for _ in 0..e {
            acc = acc.mul_truncated(&u[s], max_deg);
        }
    }
    acc.scale(&(S::one() / beta.factorial::<S>()))
}

/// `ε(α, β, x) = α! [y^α] (U^β / β!)` for an arbitrary polynomial map.
pub fn epsilon_weight<S: Scalar>(
    polys: &[Poly<S>],
    degrees: &[u32],
    alpha: &MultiIndex,
    beta: &MultiIndex,
    x: &[S],
) -> Result<EpsilonWeight<S>> {
    let n = x.len();
    if alpha.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: alpha.len() });
    }
    if beta.len() != polys.len() {
        return Err(Error::DimensionMismatch { expected: polys.len(), got: beta.len() });
    }
    let weighted = beta.weighted_order(degrees);
    let homogeneity_degree = weighted as i64 - alpha.order() as i64;
    let value = if homogeneity_degree < 0 || beta.order() > alpha.order() {
        S::zero()
    } else {
        let u = displacement(polys, x)?;
        scaled_power(&u, beta, alpha.order()).coeff(alpha) * alpha.factorial::<S>()
    };
    Ok(EpsilonWeight { alpha: alpha.clone(), beta: beta.clone(), value, homogeneity_degree })
}

pub fn epsilon_beta<S: Scalar>(
    map: &ChevalleyMap<S>,
    alpha: &MultiIndex,
    beta: &MultiIndex,
    x: &[S],
) -> Result<EpsilonWeight<S>> {
    epsilon_weight(&map.polys, &map.degrees, alpha, beta, x)
}

/// `M_{i,s} = ∂^{αᵢ} p_s(a)` for the pivot multi-indices `αᵢ`.
pub fn pivot_matrix<S: Scalar>(map: &ChevalleyMap<S>, a: &[S]) -> Result<linalg::Matrix<S>> {
    map.pivots()
        .iter()
        .map(|alpha| {
            map.polys
                .iter()
                .map(|p| p.partial_derivative(alpha)?.evaluate(a))
                .collect()
        })
        .collect()
}

/// First-order values `(∂F/∂p₁, …, ∂F/∂p_n)` at `P(a)` from an order-`h`
/// composed jet, by back substitution on the upper-triangular system
/// `f_{αᵢ} = Σ_{s ≥ i} ∂^{αᵢ}p_s(a) · ∂F/∂p_s`.
pub fn lemma_recover_first_order<S: Scalar>(map: &ChevalleyMap<S>, f_jet: &Jet<S>) -> Result<Vec<S>> {
    let a = &f_jet.base;
    let h = map.h();
    if f_jet.order < h {
        return Err(Error::OrderExceeded { requested: h, order: f_jet.order });
    }
    let m = pivot_matrix(map, a)?;
    let n = m.len();
    let tol = tolerance::<S>();
    let mut values = vec![S::zero(); n];
    for i in (0..n).rev() {
        if let Some(s) = (0..i).find(|&s| !m[i][s].is_zero_within(tol)) {
            return Err(Error::SingularSystem(format!("pivot {} meets invariant {}", i + 1, s + 1)));
        }
        if m[i][i].is_zero_within(tol) {
            return Err(Error::SingularSystem(format!("vanishing pivot {}", i + 1)));
        }
        let mut acc = f_jet.coeff(&map.pivots()[i]);
        for s in i + 1..n {
            acc = acc - m[i][s].clone() * values[s].clone();
        }
        values[i] = acc / m[i][i].clone();
    }

    let mut linear = Jet::zero(map.eval(a)?, 1);
    linear.set(MultiIndex::zeros(n), f_jet.coeff(&MultiIndex::zeros(a.len())));
    for (s, v) in values.iter().enumerate() {
        linear.set(MultiIndex::unit(n, s), v.clone());
    }
    let back = compose_jet(map, &linear, a)?;
    if let Some(alpha) = jet_mismatch(&back, f_jet, h) {
        return Err(Error::NotInImage(format!("coefficient {alpha} is not reproduced")));
    }
    Ok(values)
}

/// First multi-index `|α| ≤ order` where the two jets disagree.
fn jet_mismatch<S: Scalar>(a: &Jet<S>, b: &Jet<S>, order: u32) -> Option<MultiIndex> {
    MultiIndex::all_up_to(a.nvars(), order)
        .into_iter()
        .find(|k| !close(&a.coeff(k), &b.coeff(k)))
}

/// Minors of the Jacobian and the determinant, for solving
/// `J_Pᵀ ∇F∘P = ∇f` by Cramer's rule.
#[derive(Clone, Debug)]
pub struct CramerSystem<S> {
    /// `minors[i][j]`: determinant of `J_P` without row `j` and column `i`.
    pub minors: Vec<Vec<Poly<S>>>,
    pub det: Poly<S>,
    /// `c` of `det J_P = c ∏ λ_τ`, when the factorization is available.
    pub c: Option<S>,
    degrees: Vec<u32>,
}

impl<S: Scalar> CramerSystem<S> {
    pub fn new(map: &ChevalleyMap<S>) -> Self {
        let n = map.dim();
        let jac = map.jacobian_poly();
        let minors = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| {
                        let sub: Vec<Vec<Poly<S>>> = (0..n)
                            .filter(|&row| row != j)
                            .map(|row| (0..n).filter(|&col| col != i).map(|col| jac[row][col].clone()).collect())
                            .collect();
                        poly_determinant(&sub, n)
                    })
                    .collect()
            })
            .collect();
        let c = map
            .jacobian_constant
            .clone()
            .or_else(|| map.verify_jacobian_factorization().ok().map(|f| f.c));
        CramerSystem { minors, det: map.jacobian_determinant(), c, degrees: map.degrees.clone() }
    }

    pub fn dim(&self) -> usize {
        self.minors.len()
    }

    /// Signed cofactor `(−1)^{i+j} M_{i,j}`.
    pub fn cofactor(&self, i: usize, j: usize) -> Poly<S> {
        if (i + j).is_multiple_of(2) {
            self.minors[i][j].clone()
        } else {
            -&self.minors[i][j]
        }
    }

    /// `s_j = Σ_{i≠j} (kᵢ − 1)`.
    pub fn minor_degree(&self, j: usize) -> u32 {
        self.degrees.iter().enumerate().filter(|&(i, _)| i != j).map(|(_, k)| k - 1).sum()
    }

    /// Checks `Σᵢ (−1)^{i+j} M_{i,j} ∂p_l/∂xᵢ = δ_{jl} det J_P`.
    pub fn verify_cofactor_identity(&self, map: &ChevalleyMap<S>) -> bool {
        let n = self.dim();
        let jac = map.jacobian_poly();
        let tol = tolerance::<S>() * self.det.max_abs_coeff().max(1.0);
        (0..n).all(|j| {
            (0..n).all(|l| {
                let sum = jac[l]
                    .iter()
                    .enumerate()
                    .fold(Poly::zero(n), |acc, (i, d)| &acc + &(&self.cofactor(i, j) * d));
                let expected = if j == l { self.det.clone() } else { Poly::zero(n) };
                (&sum - &expected).max_abs_coeff() <= tol
            })
        })
    }

    /// Checks that every nonzero `M_{i,j}` is homogeneous of degree `s_j`.
    pub fn verify_minor_degrees(&self) -> bool {
        let n = self.dim();
        (0..n).all(|i| (0..n).all(|j| self.minors[i][j].is_zero() || self.minors[i][j].is_homogeneous_of(self.minor_degree(j))))
    }

    /// Checks that `M_{i,j}` is divisible by `∏ λ_τ` over the reflections
    /// whose hyperplane contains the `i`-th coordinate axis.
    pub fn verify_minor_divisibility(&self, map: &ChevalleyMap<S>) -> Result<bool> {
        let n = self.dim();
        for i in 0..n {
            let mut prod = Poly::one(n);
            for r in &map.group.reflections {
                if r.normal.to_f64()[i].abs() <= FLOAT_TOL {
                    prod = &prod * &r.linear_form::<S>()?;
                }
            }
            for j in 0..n {
                let m = &self.minors[i][j];
                let scale = m.max_abs_coeff().max(1.0);
                let (_, rem) = m.div_rem(&prod, FLOAT_TOL * scale);
                if rem.max_abs_coeff() > tolerance::<S>() * scale {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }

    /// `∂F/∂p_j` at `P(x)` from the cofactor formula.
    pub fn solve_at(&self, grad_f: &[S], x: &[S]) -> Result<Vec<S>> {
        let n = self.dim();
        let det = self.det.evaluate(x)?;
        if det.is_zero_within(tolerance::<S>()) {
            return Err(Error::SingularJacobian);
        }
        (0..n)
            .map(|j| {
                let mut acc = S::zero();
                for (i, g) in grad_f.iter().enumerate() {
                    acc = acc + self.cofactor(i, j).evaluate(x)? * g.clone();
                }
                Ok(acc / det.clone())
            })
            .collect()
    }

    pub fn to_json(&self) -> Value {
        json!({
            "minors": self.minors.iter().map(|row| row.iter().map(Poly::to_json).collect::<Vec<_>>()).collect::<Vec<_>>(),
            "det": self.det.to_json(),
            "c": self.c.as_ref().map(Scalar::to_json),
            "minor_degrees": (0..self.dim()).map(|j| self.minor_degree(j)).collect::<Vec<_>>(),
        })
    }
}

/// Solves `J_P(x)ᵀ v = ∇f(x)` and cross-checks against the cofactor formula.
pub fn cramer_first_derivatives<S: Scalar>(map: &ChevalleyMap<S>, grad_f: &[S], x: &[S]) -> Result<Vec<S>> {
    let n = map.dim();
    if grad_f.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: grad_f.len() });
    }
    let jac = map.jacobian(x)?;
    let scale = jac.iter().flatten().map(|v| v.to_f64().abs()).fold(1.0, f64::max);
    let hadamard: f64 = jac.iter().map(|row| row.iter().map(|v| v.to_f64().powi(2)).sum::<f64>().sqrt()).product();
    let tol = tolerance::<S>() * hadamard;
    let det = linalg::determinant(jac.clone(), FLOAT_TOL * scale);
    if det.is_zero_within(tol) {
        return Err(Error::SingularJacobian);
    }
    let jt = linalg::transpose(&jac);
    let v = linalg::solve(jt.clone(), grad_f.to_vec(), FLOAT_TOL * scale).ok_or(Error::SingularJacobian)?;
    // cofactor formula with numeric minors: v_j det = Σᵢ (−1)^{i+j} M_{i,j} ∂ᵢf
    for (j, vj) in v.iter().enumerate() {
        let mut acc = S::zero();
        let mut magnitude = 0.0;
        for (i, g) in grad_f.iter().enumerate() {
            let sub: linalg::Matrix<S> = (0..n)
                .filter(|&row| row != j)
                .map(|row| (0..n).filter(|&col| col != i).map(|col| jac[row][col].clone()).collect())
                .collect();
            let minor = linalg::determinant(sub, FLOAT_TOL * scale);
            let term = minor * g.clone();
            magnitude += term.to_f64().abs();
            acc = if (i + j) % 2 == 0 { acc + term } else { acc - term };
        }
        let cofactor_v = acc / det.clone();
        let bound = (magnitude / det.to_f64().abs()).max(vj.to_f64().abs()).max(1.0);
        if !(cofactor_v - vj.clone()).is_zero_within(tolerance::<S>() * bound) {
            return Err(Error::SolveFailed(format!("cofactor formula disagrees at index {}", j + 1)));
        }
    }
    Ok(v)
}

/// Cramer system re-centred at `a`, acting on polynomials in `y = x − a`.
struct ShiftedCramer<S> {
    cofactors: Vec<Vec<Poly<S>>>,
    det: Poly<S>,
}

impl<S: Scalar> ShiftedCramer<S> {
    fn new(system: &CramerSystem<S>, a: &[S]) -> Result<Self> {
        let n = system.dim();
        let cofactors = (0..n)
            .map(|i| (0..n).map(|j| system.cofactor(i, j).shift(a)).collect::<Result<Vec<_>>>())
            .collect::<Result<Vec<_>>>()?;
        Ok(ShiftedCramer { cofactors, det: system.det.shift(a)? })
    }

    /// Polynomials `(∂_jG)∘U` from `g = G∘U`.
    fn gradient(&self, g: &Poly<S>) -> Result<Vec<Poly<S>>> {
        let n = self.cofactors.len();
        let grad = g.gradient();
        (0..n)
            .map(|j| {
                let mut num = Poly::zero(n);
                for (i, gi) in grad.iter().enumerate() {
                    num = &num + &(&self.cofactors[i][j] * gi);
                }
                let scale = num.max_abs_coeff().max(1.0);
                let (q, rem) = num.div_rem(&self.det, FLOAT_TOL * scale);
                if rem.max_abs_coeff() > tolerance::<S>() * scale {
                    return Err(Error::NotInImage(format!("gradient component {} is not a composed polynomial", j + 1)));
                }
                Ok(q.prune(FLOAT_TOL * scale))
            })
            .collect()
    }
}

/// Order-`r` jet of `F` at `P(a)` from the composed jet of `f` at `a`.
pub fn recover_jet<S: Scalar>(map: &ChevalleyMap<S>, f_field: &JetField<S>, a: &[S], r: u32) -> Result<Jet<S>> {
    let jet = f_field.jet_at(a)?;
    let h = map.h();
    let top = h * r;
    if jet.order < top {
        return Err(Error::OrderExceeded { requested: top, order: jet.order });
    }
    let jet = jet.truncate(top);
    let n = map.dim();
    let g = jet.taylor_poly();
    let mut out = Jet::zero(map.eval(a)?, r);
    out.set(MultiIndex::zeros(n), g.constant_term());
    if r == 0 {
        return Ok(out);
    }

    // g_β = (∂^βG)∘U for |β| ≤ r − 1
    let mut composed: BTreeMap<MultiIndex, Poly<S>> = BTreeMap::new();
    composed.insert(MultiIndex::zeros(n), g);
    if r > 1 {
        let system = CramerSystem::new(map);
        let shifted = ShiftedCramer::new(&system, a)?;
        for level in 0..r - 1 {
            let current: Vec<(MultiIndex, Poly<S>)> = composed
                .iter()
                .filter(|(b, _)| b.order() == level)
                .map(|(b, p)| (b.clone(), p.clone()))
                .collect();
            for (beta, g_beta) in current {
                for (j, gj) in shifted.gradient(&g_beta)?.into_iter().enumerate() {
                    let next = beta.plus(&MultiIndex::unit(n, j));
                    if let std::collections::btree_map::Entry::Vacant(e) = composed.entry(next.clone()) {
                        out.set(next, gj.constant_term());
                        e.insert(gj);
                    }
                }
            }
        }
    }
    for (beta, g_beta) in composed.iter().filter(|(b, _)| b.order() == r - 1) {
        let values = lemma_recover_first_order(map, &Jet::from_taylor(g_beta, a.to_vec(), h))?;
        for (s, v) in values.into_iter().enumerate() {
            out.set(beta.plus(&MultiIndex::unit(n, s)), v);
        }
    }

    let back = compose_jet(map, &out, a)?;
    if let Some(alpha) = jet_mismatch(&back, &jet, top) {
        return Err(Error::NotInImage(format!("coefficient {alpha} is not reproduced")));
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Verdict {
    ContinuousOnImage,
    ContinuousAtStratumOnly,
    Lost,
}

impl Verdict {
    pub fn label(self) -> &'static str {
        match self {
            Verdict::ContinuousOnImage => "continuous-on-P(R^n)",
            Verdict::ContinuousAtStratumOnly => "continuous-at-stratum-only",
            Verdict::Lost => "lost",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ContinuityLedgerEntry {
    pub beta: MultiIndex,
    /// `Σ βᵢkᵢ`.
    pub weighted_order: u32,
    /// `hr`.
    pub threshold: u32,
    pub verdict: Verdict,
    /// `Σ βᵢk′ᵢ` for the supplied stratum.
    pub stratum_weighted_order: Option<u32>,
}

impl ContinuityLedgerEntry {
    pub fn to_json(&self) -> Value {
        json!({
            "beta": self.beta.exponents(),
            "weighted_order": self.weighted_order,
            "threshold": self.threshold,
            "verdict": self.verdict.label(),
            "stratum_weighted_order": self.stratum_weighted_order,
        })
    }
}

/// Verdicts for every `β` with `|β| ≤ hr`.
pub fn continuity_ledger<S: Scalar>(
    map: &ChevalleyMap<S>,
    r: u32,
    stratum: Option<&StratumInfo<S>>,
) -> Vec<ContinuityLedgerEntry> {
    let threshold = map.h() * r;
    MultiIndex::all_up_to(map.degrees.len(), threshold)
        .into_iter()
        .map(|beta| {
            let weighted_order = beta.weighted_order(&map.degrees);
            let stratum_weighted_order = stratum.map(|s| beta.weighted_order(&s.isotropy_degrees));
            let verdict = if weighted_order <= threshold {
                Verdict::ContinuousOnImage
            } else if stratum_weighted_order.is_some_and(|w| w <= threshold) {
                Verdict::ContinuousAtStratumOnly
            } else {
                Verdict::Lost
            };
            ContinuityLedgerEntry { beta, weighted_order, threshold, verdict, stratum_weighted_order }
        })
        .collect()
}

/// One weighted derivative `w_β(x) |∂^βF(P(x))|`.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightedTerm {
    pub sample: usize,
    pub beta: MultiIndex,
    pub raw: f64,
    pub weight: f64,
    pub weighted: f64,
}

/// `max_{|α| = hr} |ε(α, β, x)|`.
pub fn heavy_weight<S: Scalar>(map: &ChevalleyMap<S>, beta: &MultiIndex, x: &[S], hr: u32) -> Result<S> {
    let u = displacement(&map.polys, x)?;
    let power = scaled_power(&u, beta, hr);
    Ok(power
        .terms()
        .filter(|(k, _)| k.order() == hr)
        .fold(S::zero(), |acc, (k, c)| S::max_abs(acc, &(c.clone() * k.factorial::<S>()))))
}

/// Every term entering `|F|^{r,hr}`: weight 1 for `Σβᵢkᵢ ≤ hr`, otherwise
/// [`heavy_weight`]. Heavy derivatives missing on a stratum count as 0.
pub fn weighted_derivative_terms<S: Scalar>(
    map: &ChevalleyMap<S>,
    f_field: &JetField<S>,
    hr: u32,
    samples: &[Vec<S>],
) -> Result<Vec<WeightedTerm>> {
    let mut out = Vec::new();
    let betas = MultiIndex::all_up_to(map.degrees.len(), hr);
    for (idx, x) in samples.iter().enumerate() {
        let jet = f_field.jet_at(&map.eval(x)?)?;
        let on_stratum = !geometry::active_reflections(&map.group, x, geometry::default_tol(x))?.is_empty();
        for beta in &betas {
            let light = beta.weighted_order(&map.degrees) <= hr;
            if !jet.is_defined(beta) {
                if !light && on_stratum {
                    continue;
                }
                return Err(Error::MissingDerivative { beta: beta.to_string(), sample: idx });
            }
            let raw = jet.coeff(beta).to_f64().abs();
            let weight = if light { 1.0 } else { heavy_weight(map, beta, x, hr)?.to_f64().abs() };
            out.push(WeightedTerm { sample: idx, beta: beta.clone(), raw, weight, weighted: raw * weight });
        }
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq)]
pub struct WeightedSeminormReport {
    /// `‖F‖^r` over the image samples.
    pub whitney_part: f64,
    /// `|F|^{r,hr}`.
    pub weighted_part: f64,
    pub total: f64,
    pub worst: Option<(Vec<f64>, MultiIndex)>,
}

impl WeightedSeminormReport {
    pub fn to_json(&self) -> Value {
        json!({
            "whitney_part": self.whitney_part,
            "weighted_part": self.weighted_part,
            "total": self.total,
            "worst": self.worst.as_ref().map(|(x, b)| json!({"x": point_to_json(x), "beta": b.exponents()})),
        })
    }
}

/// `⦀F⦀^{hr}_{P(K)} = ‖F‖^r_{P(K)} + |F|^{r,hr}_{P(K)}`.
pub fn weighted_seminorm<S: Scalar>(
    map: &ChevalleyMap<S>,
    f_field: &JetField<S>,
    r: u32,
    hr: u32,
    samples: &[Vec<S>],
) -> Result<WeightedSeminormReport> {
    if f_field.order < hr {
        return Err(Error::OrderExceeded { requested: hr, order: f_field.order });
    }
    let whitney_part = if !f_field.is_empty() { seminorms(&f_field.truncate(r), r)?.whitney_norm } else { 0.0 };
    let terms = weighted_derivative_terms(map, f_field, hr, samples)?;
    let best = terms.iter().fold(None::<&WeightedTerm>, |acc, t| match acc {
        Some(b) if b.weighted >= t.weighted => Some(b),
        _ => Some(t),
    });
    let weighted_part = best.map_or(0.0, |t| t.weighted);
    let worst = best
        .filter(|t| t.weighted > 0.0)
        .map(|t| (samples[t.sample].iter().map(Scalar::to_f64).collect(), t.beta.clone()));
    Ok(WeightedSeminormReport { whitney_part, weighted_part, total: whitney_part + weighted_part, worst })
}
