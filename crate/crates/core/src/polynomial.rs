//! Sparse multivariate polynomials over a [`Scalar`] field.
//!
//! Terms are kept in a `BTreeMap` keyed by [`MultiIndex`] in graded
//! lexicographic order, so iteration and serialization are deterministic.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use serde_json::Value;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Exponent vector `α ∈ ℕⁿ`.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct MultiIndex(Vec<u32>);

impl MultiIndex {
    pub fn new(exponents: Vec<u32>) -> Self {
        MultiIndex(exponents)
    }

    pub fn zeros(n: usize) -> Self {
        MultiIndex(vec![0; n])
    }

    pub fn unit(n: usize, i: usize) -> Self {
        let mut e = vec![0; n];
        e[i] = 1;
        MultiIndex(e)
    }

    pub fn exponents(&self) -> &[u32] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, i: usize) -> u32 {
        self.0[i]
    }

    /// `|α|`
    pub fn order(&self) -> u32 {
        self.0.iter().sum()
    }

    /// `α! = Π αᵢ!`
    pub fn factorial<S: Scalar>(&self) -> S {
        let mut acc = S::one();
        for &e in &self.0 {
            for k in 2..=e {
                acc = acc * S::from_i64(k as i64);
            }
        }
        acc
    }

    /// `Σ αᵢ wᵢ`
    pub fn weighted_order(&self, weights: &[u32]) -> u32 {
        self.0.iter().zip(weights).map(|(a, w)| a * w).sum()
    }

    pub fn plus(&self, other: &MultiIndex) -> MultiIndex {
        MultiIndex(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    /// `self − other` when `other ≤ self` componentwise.
    pub fn minus(&self, other: &MultiIndex) -> Option<MultiIndex> {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| a.checked_sub(*b))
            .collect::<Option<Vec<_>>>()
            .map(MultiIndex)
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&e| e == 0)
    }

    /// All indices of length `n` with `|α| = m`, ascending graded-lex.
    pub fn all_of_order(n: usize, m: u32) -> Vec<MultiIndex> {
        fn rec(n: usize, m: u32, prefix: &mut Vec<u32>, out: &mut Vec<MultiIndex>) {
            if prefix.len() + 1 == n {
                prefix.push(m);
                out.push(MultiIndex(prefix.clone()));
                prefix.pop();
                return;
            }
            for e in 0..=m {
                prefix.push(e);
                rec(n, m - e, prefix, out);
                prefix.pop();
            }
        }
        let mut out = Vec::new();
        if n == 0 {
            if m == 0 {
                out.push(MultiIndex(Vec::new()));
            }
            return out;
        }
        rec(n, m, &mut Vec::with_capacity(n), &mut out);
        out
    }

    /// All indices of length `n` with `|α| ≤ m`, ascending graded-lex.
    pub fn all_up_to(n: usize, m: u32) -> Vec<MultiIndex> {
        (0..=m).flat_map(|d| Self::all_of_order(n, d)).collect()
    }
}

impl Ord for MultiIndex {
    fn cmp(&self, other: &Self) -> Ordering {
        self.order()
            .cmp(&other.order())
            .then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for MultiIndex {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, e) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{e}")?;
        }
        write!(f, ")")
    }
}

impl From<Vec<u32>> for MultiIndex {
    fn from(v: Vec<u32>) -> Self {
        MultiIndex(v)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Poly<S> {
    nvars: usize,
    terms: BTreeMap<MultiIndex, S>,
}

impl<S: Scalar> Poly<S> {
    pub fn zero(nvars: usize) -> Self {
        Poly { nvars, terms: BTreeMap::new() }
    }

    pub fn constant(nvars: usize, c: S) -> Self {
        Self::monomial(MultiIndex::zeros(nvars), c)
    }

    pub fn one(nvars: usize) -> Self {
        Self::constant(nvars, S::one())
    }

    pub fn var(nvars: usize, i: usize) -> Self {
        Self::monomial(MultiIndex::unit(nvars, i), S::one())
    }

    pub fn monomial(exponents: MultiIndex, c: S) -> Self {
        let mut p = Poly::zero(exponents.len());
        p.add_term(exponents, c);
        p
    }

    /// Sums repeated monomials and drops zeros.
    pub fn from_terms(nvars: usize, terms: impl IntoIterator<Item = (MultiIndex, S)>) -> Self {
        let mut p = Poly::zero(nvars);
        for (k, c) in terms {
            assert_eq!(k.len(), nvars, "monomial length must match nvars");
            p.add_term(k, c);
        }
        p
    }

    /// Linear form `Σ cᵢ xᵢ`.
    pub fn linear(coeffs: &[S]) -> Self {
        let n = coeffs.len();
        Self::from_terms(
            n,
            coeffs.iter().enumerate().map(|(i, c)| (MultiIndex::unit(n, i), c.clone())),
        )
    }

    pub fn add_term(&mut self, k: MultiIndex, c: S) {
        if c.is_zero() {
            return;
        }
        match self.terms.get_mut(&k) {
            Some(v) => {
                *v = v.clone() + c;
                if v.is_zero() {
                    self.terms.remove(&k);
                }
            }
            None => {
                self.terms.insert(k, c);
            }
        }
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (&MultiIndex, &S)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn coeff(&self, k: &MultiIndex) -> S {
        self.terms.get(k).cloned().unwrap_or_else(S::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// `None` for the zero polynomial.
    pub fn degree(&self) -> Option<u32> {
        self.terms.keys().next_back().map(MultiIndex::order)
    }

    /// Degree `d` if every term has `|α| = d`; the zero polynomial is
    /// homogeneous of every degree and reports `Some(0)`.
    pub fn homogeneous_degree(&self) -> Option<u32> {
        let mut it = self.terms.keys().map(MultiIndex::order);
        match it.next() {
            None => Some(0),
            Some(d) => it.all(|e| e == d).then_some(d),
        }
    }

    pub fn is_homogeneous_of(&self, d: u32) -> bool {
        self.terms.keys().all(|k| k.order() == d)
    }

    pub fn homogeneous_part(&self, d: u32) -> Self {
        Poly {
            nvars: self.nvars,
            terms: self
                .terms
                .iter()
                .filter(|(k, _)| k.order() == d)
                .map(|(k, c)| (k.clone(), c.clone()))
                .collect(),
        }
    }

    pub fn constant_term(&self) -> S {
        self.coeff(&MultiIndex::zeros(self.nvars))
    }

    /// Largest term in graded-lex order.
    pub fn leading_term(&self) -> Option<(&MultiIndex, &S)> {
        self.terms.iter().next_back()
    }

    pub fn scale(&self, c: &S) -> Self {
        if c.is_zero() {
            return Poly::zero(self.nvars);
        }
        Poly {
            nvars: self.nvars,
            terms: self
                .terms
                .iter()
                .map(|(k, v)| (k.clone(), v.clone() * c.clone()))
                .filter(|(_, v)| !v.is_zero())
                .collect(),
        }
    }

    pub fn pow(&self, e: u32) -> Self {
        let mut acc = Poly::one(self.nvars);
        for _ in 0..e {
            acc = &acc * self;
        }
        acc
    }

    /// Product with all terms of total degree above `max_deg` discarded.
    pub fn mul_truncated(&self, other: &Self, max_deg: u32) -> Self {
        assert_eq!(self.nvars, other.nvars, "nvars mismatch in product");
        let mut out = Poly::zero(self.nvars);
        for (ka, ca) in &self.terms {
            let da = ka.order();
            if da > max_deg {
                break;
            }
            for (kb, cb) in &other.terms {
                if da + kb.order() > max_deg {
                    break;
                }
                out.add_term(ka.plus(kb), ca.clone() * cb.clone());
            }
        }
        out
    }

    /// Drops every term with `|α| > m`.
    pub fn truncate(&self, m: u32) -> Self {
        Poly {
            nvars: self.nvars,
            terms: self
                .terms
                .iter()
                .filter(|(k, _)| k.order() <= m)
                .map(|(k, c)| (k.clone(), c.clone()))
                .collect(),
        }
    }

    /// Drops coefficients with `|c| <= tol` (float clean-up; exact path keeps all).
    pub fn prune(&self, tol: f64) -> Self {
        if S::EXACT {
            return self.clone();
        }
        Poly {
            nvars: self.nvars,
            terms: self
                .terms
                .iter()
                .filter(|(_, c)| !c.is_zero_within(tol))
                .map(|(k, c)| (k.clone(), c.clone()))
                .collect(),
        }
    }

    /// Largest absolute coefficient, as `f64`.
    pub fn max_abs_coeff(&self) -> f64 {
        self.terms.values().map(|c| c.to_f64().abs()).fold(0.0, f64::max)
    }

    /// `∂^q p`.
    pub fn partial_derivative(&self, q: &MultiIndex) -> Result<Self> {
        if q.len() != self.nvars {
            return Err(Error::DimensionMismatch { expected: self.nvars, got: q.len() });
        }
        let mut out = Poly::zero(self.nvars);
        for (k, c) in &self.terms {
            let Some(rest) = k.minus(q) else { continue };
            // falling factorial Π k_i (k_i − 1) … (k_i − q_i + 1)
            let mut factor = c.clone();
            for (ki, qi) in k.exponents().iter().zip(q.exponents()) {
                for t in 0..*qi {
                    factor = factor * S::from_i64((ki - t) as i64);
                }
            }
            out.add_term(rest, factor);
        }
        Ok(out)
    }

    pub fn derivative(&self, var: usize) -> Self {
        self.partial_derivative(&MultiIndex::unit(self.nvars, var))
            .expect("unit index has matching length")
    }

    pub fn gradient(&self) -> Vec<Self> {
        (0..self.nvars).map(|i| self.derivative(i)).collect()
    }

    pub fn evaluate(&self, x: &[S]) -> Result<S> {
        if x.len() != self.nvars {
            return Err(Error::DimensionMismatch { expected: self.nvars, got: x.len() });
        }
        let max_exp = self
            .terms
            .keys()
            .flat_map(|k| k.exponents().iter().copied())
            .max()
            .unwrap_or(0) as usize;
        let powers: Vec<Vec<S>> = x
            .iter()
            .map(|xi| {
                let mut pw = Vec::with_capacity(max_exp + 1);
                pw.push(S::one());
                for e in 1..=max_exp {
                    pw.push(pw[e - 1].clone() * xi.clone());
                }
                pw
            })
            .collect();
        let mut acc = S::zero();
        for (k, c) in &self.terms {
            let mut t = c.clone();
            for (i, &e) in k.exponents().iter().enumerate() {
                if e > 0 {
                    t = t * powers[i][e as usize].clone();
                }
            }
            acc = acc + t;
        }
        Ok(acc)
    }

    /// `p(s₁(y), …, s_n(y))`.
    pub fn compose(&self, subs: &[Poly<S>]) -> Result<Self> {
        self.compose_inner(subs, None)
    }

    /// Composition with every intermediate product truncated at `max_deg`.
    pub fn compose_truncated(&self, subs: &[Poly<S>], max_deg: u32) -> Result<Self> {
        self.compose_inner(subs, Some(max_deg))
    }

    fn compose_inner(&self, subs: &[Poly<S>], max_deg: Option<u32>) -> Result<Self> {
        if subs.len() != self.nvars {
            return Err(Error::DimensionMismatch { expected: self.nvars, got: subs.len() });
        }
        let target = match subs.first() {
            Some(s) => s.nvars,
            None => {
                // p has no variables: it is a constant.
                return Ok(Poly::constant(0, self.constant_term()));
            }
        };
        if let Some(bad) = subs.iter().find(|s| s.nvars != target) {
            return Err(Error::DimensionMismatch { expected: target, got: bad.nvars });
        }
        let mut cache = PowerCache::new(subs, max_deg);
        let mut out = Poly::zero(target);
        for (k, c) in &self.terms {
            let mut t = Poly::constant(target, c.clone());
            for (i, &e) in k.exponents().iter().enumerate() {
                if e == 0 {
                    continue;
                }
                let pw = cache.power(i, e);
                t = match max_deg {
                    Some(m) => t.mul_truncated(pw, m),
                    None => &t * pw,
                };
                if t.is_zero() {
                    break;
                }
            }
            out = &out + &t;
        }
        Ok(out)
    }

    /// `y ↦ p(a + y)`.
    pub fn shift(&self, a: &[S]) -> Result<Self> {
        if a.len() != self.nvars {
            return Err(Error::DimensionMismatch { expected: self.nvars, got: a.len() });
        }
        let n = self.nvars;
        let subs: Vec<Poly<S>> = a
            .iter()
            .enumerate()
            .map(|(i, ai)| {
                let mut s = Poly::var(n, i);
                s.add_term(MultiIndex::zeros(n), ai.clone());
                s
            })
            .collect();
        self.compose(&subs)
    }

    /// Division by a single polynomial in graded-lex order: `self = q·g + r`
    /// with no term of `r` divisible by the leading monomial of `g`.
    ///
    /// A singleton is a Gröbner basis, so `r = 0` exactly when `g` divides
    /// `self`. On the float path terms below `tol` are discarded as they
    /// arise.
    pub fn div_rem(&self, divisor: &Self, tol: f64) -> (Self, Self) {
        assert_eq!(self.nvars, divisor.nvars, "nvars mismatch in division");
        let (lm, lc) = divisor
            .leading_term()
            .map(|(k, c)| (k.clone(), c.clone()))
            .expect("division by the zero polynomial");
        let mut quotient = Poly::zero(self.nvars);
        let mut remainder = Poly::zero(self.nvars);
        let mut rest = self.clone();
        while let Some((k, c)) = rest.terms.iter().next_back().map(|(k, c)| (k.clone(), c.clone())) {
            if c.is_zero_within(tol) {
                rest.terms.remove(&k);
                continue;
            }
            match k.minus(&lm) {
                Some(shift) => {
                    let factor = c / lc.clone();
                    let t = Poly::monomial(shift.clone(), factor.clone());
                    rest = &rest - &(&t * divisor);
                    // the leading term cancels exactly on the rational path;
                    // make sure it also disappears on the float path
                    rest.terms.remove(&k);
                    quotient.add_term(shift, factor);
                }
                None => {
                    rest.terms.remove(&k);
                    remainder.add_term(k, c);
                }
            }
        }
        (quotient, remainder)
    }

    pub fn map_coeffs<T: Scalar>(&self, f: impl Fn(&S) -> T) -> Poly<T> {
        Poly::from_terms(self.nvars, self.terms.iter().map(|(k, c)| (k.clone(), f(c))))
    }

    pub fn to_f64(&self) -> Poly<f64> {
        self.map_coeffs(|c| c.to_f64())
    }

    /// `[[exponent-vector, coefficient], …]` in graded-lex order.
    pub fn to_json(&self) -> Value {
        Value::Array(
            self.terms
                .iter()
                .map(|(k, c)| Value::Array(vec![serde_json::json!(k.exponents()), c.to_json()]))
                .collect(),
        )
    }

    pub fn from_json(v: &Value, nvars: usize) -> Result<Self> {
        let arr = v
            .as_array()
            .ok_or_else(|| Error::Parse("polynomial must be an array of terms".into()))?;
        let mut p = Poly::zero(nvars);
        for term in arr {
            let pair = term
                .as_array()
                .filter(|a| a.len() == 2)
                .ok_or_else(|| Error::Parse("term must be [exponents, coefficient]".into()))?;
            let exps = exponents_from_json(&pair[0])?;
            if exps.len() != nvars {
                return Err(Error::DimensionMismatch { expected: nvars, got: exps.len() });
            }
            p.add_term(exps, S::from_json(&pair[1])?);
        }
        Ok(p)
    }

    /// Human-readable form with the given variable names.
    pub fn display_with(&self, names: &[String]) -> String {
        if self.terms.is_empty() {
            return "0".to_string();
        }
        let mut parts = Vec::new();
        for (k, c) in self.terms.iter().rev() {
            let mut mono = Vec::new();
            for (i, &e) in k.exponents().iter().enumerate() {
                match e {
                    0 => {}
                    1 => mono.push(names[i].clone()),
                    _ => mono.push(format!("{}^{}", names[i], e)),
                }
            }
            let coeff = match c.to_json() {
                Value::String(s) => s.trim_end_matches("/1").to_string(),
                other => other.to_string(),
            };
            if mono.is_empty() {
                parts.push(coeff);
            } else if coeff == "1" {
                parts.push(mono.join("*"));
            } else if coeff == "-1" {
                parts.push(format!("-{}", mono.join("*")));
            } else {
                parts.push(format!("{}*{}", coeff, mono.join("*")));
            }
        }
        parts.join(" + ").replace("+ -", "- ")
    }
}

pub fn exponents_from_json(v: &Value) -> Result<MultiIndex> {
    v.as_array()
        .ok_or_else(|| Error::Parse("exponents must be an array".into()))?
        .iter()
        .map(|e| {
            e.as_u64()
                .map(|e| e as u32)
                .ok_or_else(|| Error::Parse(format!("bad exponent {e}")))
        })
        .collect::<Result<Vec<_>>>()
        .map(MultiIndex)
}

pub fn variable_names(prefix: &str, n: usize) -> Vec<String> {
    (1..=n).map(|i| format!("{prefix}{i}")).collect()
}

impl<S: Scalar> fmt::Display for Poly<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.display_with(&variable_names("x", self.nvars)))
    }
}

/// Memoized powers of substitution polynomials.
pub(crate) struct PowerCache<'a, S> {
    subs: &'a [Poly<S>],
    max_deg: Option<u32>,
    powers: Vec<Vec<Poly<S>>>,
}

impl<'a, S: Scalar> PowerCache<'a, S> {
    pub(crate) fn new(subs: &'a [Poly<S>], max_deg: Option<u32>) -> Self {
        let powers = subs.iter().map(|s| vec![Poly::one(s.nvars), s.clone()]).collect();
        PowerCache { subs, max_deg, powers }
    }

    pub(crate) fn power(&mut self, i: usize, e: u32) -> &Poly<S> {
        let e = e as usize;
        while self.powers[i].len() <= e {
            let last = self.powers[i].last().expect("seeded with p^0");
            let next = match self.max_deg {
                Some(m) => last.mul_truncated(&self.subs[i], m),
                None => last * &self.subs[i],
            };
            self.powers[i].push(next);
        }
        &self.powers[i][e]
    }
}

impl<S: Scalar> Add for &Poly<S> {
    type Output = Poly<S>;
    fn add(self, rhs: &Poly<S>) -> Poly<S> {
        assert_eq!(self.nvars, rhs.nvars, "nvars mismatch in sum");
        let mut out = self.clone();
        for (k, c) in &rhs.terms {
            out.add_term(k.clone(), c.clone());
        }
        out
    }
}

impl<S: Scalar> Sub for &Poly<S> {
    type Output = Poly<S>;
    fn sub(self, rhs: &Poly<S>) -> Poly<S> {
        assert_eq!(self.nvars, rhs.nvars, "nvars mismatch in difference");
        let mut out = self.clone();
        for (k, c) in &rhs.terms {
            out.add_term(k.clone(), -c.clone());
        }
        out
    }
}

impl<S: Scalar> Mul for &Poly<S> {
    type Output = Poly<S>;
    fn mul(self, rhs: &Poly<S>) -> Poly<S> {
        assert_eq!(self.nvars, rhs.nvars, "nvars mismatch in product");
        let mut out = Poly::zero(self.nvars);
        for (ka, ca) in &self.terms {
            for (kb, cb) in &rhs.terms {
                out.add_term(ka.plus(kb), ca.clone() * cb.clone());
            }
        }
        out
    }
}

impl<S: Scalar> Neg for &Poly<S> {
    type Output = Poly<S>;
    fn neg(self) -> Poly<S> {
        Poly {
            nvars: self.nvars,
            terms: self.terms.iter().map(|(k, c)| (k.clone(), -c.clone())).collect(),
        }
    }
}

impl<S: Scalar> Add for Poly<S> {
    type Output = Poly<S>;
    fn add(self, rhs: Poly<S>) -> Poly<S> {
        &self + &rhs
    }
}

impl<S: Scalar> Sub for Poly<S> {
    type Output = Poly<S>;
    fn sub(self, rhs: Poly<S>) -> Poly<S> {
        &self - &rhs
    }
}

impl<S: Scalar> Mul for Poly<S> {
    type Output = Poly<S>;
    fn mul(self, rhs: Poly<S>) -> Poly<S> {
        &self * &rhs
    }
}
