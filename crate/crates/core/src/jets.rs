//! Jets of order `m` on finite sample sets.
//!
//! A jet at `x` stores derivatives `a_k`, so the induced polynomial is
//! `A_x(x′) = Σ a_k (x′ − x)^k / k!`. Zero coefficients are implicit. A
//! coefficient can also be marked *undefined*, which is how a field records
//! derivatives that do not exist at a point (for example on a stratum).
//!
//! Compacts are finite sample sets, so every supremum is a maximum over the
//! samples or over ordered pairs of distinct samples.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};

use rayon::prelude::*;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::polynomial::{exponents_from_json, MultiIndex, Poly};
use crate::scalar::{norm_sq, point_from_json, point_key, point_to_json, sub_vec, Scalar};

#[derive(Clone, Debug, PartialEq)]
pub struct Jet<S> {
    pub base: Vec<S>,
    pub order: u32,
    coeffs: BTreeMap<MultiIndex, S>,
    undefined: BTreeSet<MultiIndex>,
}

impl<S: Scalar> Jet<S> {
    pub fn zero(base: Vec<S>, order: u32) -> Self {
        Jet { base, order, coeffs: BTreeMap::new(), undefined: BTreeSet::new() }
    }

    /// Taylor jet of `p` at `base`: `a_k = ∂^k p(base)`.
    pub fn from_poly(p: &Poly<S>, base: &[S], order: u32) -> Result<Self> {
        if p.nvars() != base.len() {
            return Err(Error::DimensionMismatch { expected: p.nvars(), got: base.len() });
        }
        // coefficients of p(base + y) are a_k / k!
        let shifted = p.shift(base)?;
        let mut jet = Jet::zero(base.to_vec(), order);
        for (k, c) in shifted.terms() {
            if k.order() <= order {
                jet.set(k.clone(), c.clone() * k.factorial::<S>());
            }
        }
        Ok(jet)
    }

    /// Builds a jet from its Taylor polynomial `Σ a_k y^k / k!` in `y = x′ − base`.
    pub fn from_taylor(taylor: &Poly<S>, base: Vec<S>, order: u32) -> Self {
        let mut jet = Jet::zero(base, order);
        for (k, c) in taylor.terms() {
            if k.order() <= order {
                jet.set(k.clone(), c.clone() * k.factorial::<S>());
            }
        }
        jet
    }

    pub fn nvars(&self) -> usize {
        self.base.len()
    }

    pub fn coeff(&self, k: &MultiIndex) -> S {
        self.coeffs.get(k).cloned().unwrap_or_else(S::zero)
    }

    /// Whether `a_k` exists at this point; `|k| > order` never does.
    pub fn is_defined(&self, k: &MultiIndex) -> bool {
        k.order() <= self.order && !self.undefined.contains(k)
    }

    pub fn set(&mut self, k: MultiIndex, v: S) {
        assert!(k.order() <= self.order, "coefficient {k} beyond jet order {}", self.order);
        self.undefined.remove(&k);
        if v.is_zero() {
            self.coeffs.remove(&k);
        } else {
            self.coeffs.insert(k, v);
        }
    }

    pub fn mark_undefined(&mut self, k: MultiIndex) {
        self.coeffs.remove(&k);
        self.undefined.insert(k);
    }

    /// Nonzero coefficients in graded-lex order.
    pub fn coeffs(&self) -> impl Iterator<Item = (&MultiIndex, &S)> {
        self.coeffs.iter()
    }

    pub fn undefined(&self) -> impl Iterator<Item = &MultiIndex> {
        self.undefined.iter()
    }

    /// `Σ a_k y^k / k!` in the displacement `y = x′ − base`.
    pub fn taylor_poly(&self) -> Poly<S> {
        Poly::from_terms(
            self.nvars(),
            self.coeffs.iter().map(|(k, a)| (k.clone(), a.clone() / k.factorial::<S>())),
        )
    }

    /// `A_x(x′)`.
    pub fn evaluate(&self, x: &[S]) -> Result<S> {
        if x.len() != self.nvars() {
            return Err(Error::DimensionMismatch { expected: self.nvars(), got: x.len() });
        }
        Ok(shifted_sum(&self.coeffs, &MultiIndex::zeros(self.nvars()), self.order, &sub_vec(x, &self.base)))
    }

    /// `D^q A = (a_{q+k})_{|k| ≤ m − |q|}`.
    pub fn formal_derivative(&self, q: &MultiIndex) -> Result<Self> {
        if q.order() > self.order {
            return Err(Error::OrderExceeded { requested: q.order(), order: self.order });
        }
        let order = self.order - q.order();
        let mut out = Jet::zero(self.base.clone(), order);
        for (k, a) in &self.coeffs {
            if let Some(rest) = k.minus(q) {
                out.coeffs.insert(rest, a.clone());
            }
        }
        out.undefined = self.undefined.iter().filter_map(|k| k.minus(q)).collect();
        Ok(out)
    }

    /// Truncation `A^r`.
    pub fn truncate(&self, r: u32) -> Self {
        let r = r.min(self.order);
        Jet {
            base: self.base.clone(),
            order: r,
            coeffs: self.coeffs.iter().filter(|(k, _)| k.order() <= r).map(|(k, v)| (k.clone(), v.clone())).collect(),
            undefined: self.undefined.iter().filter(|k| k.order() <= r).cloned().collect(),
        }
    }

    /// `max |a_k|` over the stored coefficients.
    pub fn sup_norm(&self) -> S {
        self.coeffs.values().fold(S::zero(), S::max_abs)
    }

    pub fn to_f64(&self) -> Jet<f64> {
        Jet {
            base: self.base.iter().map(Scalar::to_f64).collect(),
            order: self.order,
            coeffs: self.coeffs.iter().map(|(k, v)| (k.clone(), v.to_f64())).collect(),
            undefined: self.undefined.clone(),
        }
    }

    /// `{"x": [...], "coeffs": [[k, a_k], ...]}`; undefined entries carry `null`.
    pub fn to_json(&self) -> Value {
        let mut coeffs: Vec<(MultiIndex, Value)> =
            self.coeffs.iter().map(|(k, v)| (k.clone(), v.to_json())).collect();
        coeffs.extend(self.undefined.iter().map(|k| (k.clone(), Value::Null)));
        coeffs.sort_by(|a, b| a.0.cmp(&b.0));
        json!({
            "x": point_to_json(&self.base),
            "coeffs": coeffs.into_iter().map(|(k, v)| json!([k.exponents(), v])).collect::<Vec<_>>(),
        })
    }

    pub fn from_json(v: &Value, order: u32) -> Result<Self> {
        let base = point_from_json::<S>(v.get("x").ok_or_else(|| Error::Parse("jet without `x`".into()))?)?;
        let mut jet = Jet::zero(base, order);
        let entries = v
            .get("coeffs")
            .and_then(Value::as_array)
            .ok_or_else(|| Error::Parse("jet without `coeffs`".into()))?;
        for entry in entries {
            let pair = entry.as_array().filter(|p| p.len() == 2).ok_or_else(|| Error::Parse(format!("bad coefficient {entry}")))?;
            let k = exponents_from_json(&pair[0])?;
            if k.len() != jet.nvars() {
                return Err(Error::DimensionMismatch { expected: jet.nvars(), got: k.len() });
            }
            if k.order() > order {
                return Err(Error::OrderExceeded { requested: k.order(), order });
            }
            if pair[1].is_null() {
                jet.mark_undefined(k);
            } else {
                jet.set(k, S::from_json(&pair[1])?);
            }
        }
        Ok(jet)
    }
}

/// `Σ_{κ ≥ q, |κ| ≤ m} a_κ y^{κ−q} / (κ−q)!`.
fn shifted_sum<S: Scalar>(coeffs: &BTreeMap<MultiIndex, S>, q: &MultiIndex, m: u32, y: &[S]) -> S {
    let mut acc = S::zero();
    for (kappa, a) in coeffs {
        if kappa.order() > m {
            continue;
        }
        let Some(k) = kappa.minus(q) else { continue };
        let mono = k
            .exponents()
            .iter()
            .zip(y)
            .fold(S::one(), |p, (&e, yi)| p * yi.powi(e));
        acc = acc + a.clone() * mono / k.factorial::<S>();
    }
    acc
}

/// Jets of a common order on distinct sample points.
#[derive(Clone, Debug, PartialEq)]
pub struct JetField<S> {
    pub order: u32,
    pub points: Vec<Jet<S>>,
}

impl<S: Scalar> JetField<S> {
    pub fn new(order: u32, points: Vec<Jet<S>>) -> Result<Self> {
        let mut seen = BTreeSet::new();
        let n = points.first().map_or(0, Jet::nvars);
        for j in &points {
            if j.order != order {
                return Err(Error::InvalidField(format!("jet of order {} in a field of order {order}", j.order)));
            }
            if j.nvars() != n {
                return Err(Error::DimensionMismatch { expected: n, got: j.nvars() });
            }
            if !seen.insert(point_key(&j.base)) {
                return Err(Error::InvalidField("repeated sample point".into()));
            }
        }
        Ok(JetField { order, points })
    }

    /// Taylor field of `p` on the given samples.
    pub fn from_poly(p: &Poly<S>, samples: &[Vec<S>], order: u32) -> Result<Self> {
        let points = samples.iter().map(|x| Jet::from_poly(p, x, order)).collect::<Result<_>>()?;
        Self::new(order, points)
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn nvars(&self) -> usize {
        self.points.first().map_or(0, Jet::nvars)
    }

    pub fn index_of(&self, x: &[S]) -> Result<usize> {
        let key = point_key(x);
        self.points.iter().position(|j| point_key(&j.base) == key).ok_or(Error::PointNotInField)
    }

    pub fn jet_at(&self, x: &[S]) -> Result<&Jet<S>> {
        Ok(&self.points[self.index_of(x)?])
    }

    pub fn truncate(&self, r: u32) -> Self {
        JetField { order: r.min(self.order), points: self.points.iter().map(|j| j.truncate(r)).collect() }
    }

    pub fn to_json(&self) -> Value {
        json!({
            "order": self.order,
            "points": self.points.iter().map(Jet::to_json).collect::<Vec<_>>(),
        })
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        let order = v
            .get("order")
            .and_then(Value::as_u64)
            .ok_or_else(|| Error::Parse("field without integer `order`".into()))? as u32;
        let points = v
            .get("points")
            .and_then(Value::as_array)
            .ok_or_else(|| Error::Parse("field without `points`".into()))?
            .iter()
            .map(|p| Jet::from_json(p, order))
            .collect::<Result<_>>()?;
        Self::new(order, points)
    }

    /// `(R_xA)^q(x′)` for sample indices.
    pub fn remainder_at(&self, q: &MultiIndex, i: usize, j: usize) -> Result<S> {
        if q.order() > self.order {
            return Err(Error::OrderExceeded { requested: q.order(), order: self.order });
        }
        let (jx, jy) = (&self.points[i], &self.points[j]);
        let y = sub_vec(&jy.base, &jx.base);
        Ok(jy.coeff(q) - shifted_sum(&jx.coeffs, q, self.order, &y))
    }
}

/// `(R_xA)^q(x′) = a_q(x′) − Σ_{|k| ≤ m−|q|} a_{q+k}(x)(x′−x)^k / k!`.
pub fn whitney_remainder<S: Scalar>(field: &JetField<S>, q: &MultiIndex, x: &[S], x_prime: &[S]) -> Result<S> {
    let i = field.index_of(x)?;
    let j = field.index_of(x_prime)?;
    field.remainder_at(q, i, j)
}

/// Ordered pair `(x, x′)` and index `q` realising the Whitney quotient.
#[derive(Clone, Debug, PartialEq)]
pub struct WorstPair<S> {
    pub x: Vec<S>,
    pub x_prime: Vec<S>,
    pub q: MultiIndex,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SeminormReport<S> {
    /// `|A|^m_K = max |a_k(x)|`.
    pub sup_norm: S,
    /// `max |(R_xA)^q(x′)| / |x − x′|^{r−|q|}` over ordered pairs and `|q| ≤ r`.
    pub quotient: f64,
    /// `‖A‖^{r,m}_K = |A|^m_K + quotient`.
    pub whitney_norm: f64,
    pub worst: Option<WorstPair<S>>,
}

impl<S: Scalar> SeminormReport<S> {
    pub fn to_json(&self) -> Value {
        json!({
            "sup_norm": self.sup_norm.to_json(),
            "quotient": self.quotient,
            "whitney_norm": self.whitney_norm,
            "worst": self.worst.as_ref().map(|w| json!({
                "x": point_to_json(&w.x),
                "x_prime": point_to_json(&w.x_prime),
                "q": w.q.exponents(),
            })),
        })
    }
}

/// Candidate for the Whitney quotient, compared exactly through
/// `R² / (|x−x′|²)^{r−|q|}`.
#[derive(Clone)]
struct Candidate<S: Scalar> {
    squared: S,
    i: usize,
    j: usize,
    q: MultiIndex,
}

fn better<S: Scalar>(field: &JetField<S>, a: Candidate<S>, b: Candidate<S>) -> Candidate<S> {
    match a.squared.partial_cmp(&b.squared).unwrap_or(Ordering::Equal) {
        Ordering::Greater => a,
        Ordering::Less => b,
        Ordering::Equal => {
            let ka = (point_key(&field.points[a.i].base), point_key(&field.points[a.j].base), a.q.clone());
            let kb = (point_key(&field.points[b.i].base), point_key(&field.points[b.j].base), b.q.clone());
            if kb < ka {
                b
            } else {
                a
            }
        }
    }
}

/// Both semi-norm families on the sample set.
pub fn seminorms<S: Scalar>(field: &JetField<S>, r: u32) -> Result<SeminormReport<S>> {
    if r > field.order {
        return Err(Error::OrderExceeded { requested: r, order: field.order });
    }
    let sup_norm = field.points.iter().fold(S::zero(), |acc, j| S::max_abs(acc, &j.sup_norm()));
    let qs = MultiIndex::all_up_to(field.nvars(), r);
    let n = field.len();
    let best = (0..n)
        .into_par_iter()
        .flat_map_iter(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
        .map(|(i, j)| {
            let d2 = norm_sq(&sub_vec(&field.points[j].base, &field.points[i].base));
            let mut local: Option<Candidate<S>> = None;
            for q in &qs {
                let rem = field.remainder_at(q, i, j).expect("|q| ≤ r ≤ order");
                let squared = rem.clone() * rem / d2.powi(r - q.order());
                let c = Candidate { squared, i, j, q: q.clone() };
                local = Some(match local {
                    None => c,
                    Some(prev) => better(field, prev, c),
                });
            }
            local
        })
        .reduce(|| None, |a, b| match (a, b) {
            (Some(a), Some(b)) => Some(better(field, a, b)),
            (a, None) => a,
            (None, b) => b,
        });
    let (quotient, worst) = match best {
        Some(c) if !c.squared.is_zero() => (
            c.squared.to_f64().sqrt(),
            Some(WorstPair {
                x: field.points[c.i].base.clone(),
                x_prime: field.points[c.j].base.clone(),
                q: c.q,
            }),
        ),
        _ => (0.0, None),
    };
    Ok(SeminormReport { whitney_norm: sup_norm.to_f64() + quotient, sup_norm, quotient, worst })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ProbeOptions {
    /// Distance bins per decade when building the remainder envelope.
    pub bins_per_decade: u32,
    /// Minimum number of distinct distance decades among sample pairs.
    pub min_decades: usize,
}

impl Default for ProbeOptions {
    fn default() -> Self {
        ProbeOptions { bins_per_decade: 2, min_decades: 3 }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct QMargin {
    pub q: MultiIndex,
    /// `r − |q|`.
    pub expected: f64,
    /// Fitted log–log slope of the remainder envelope; `None` if exact or
    /// fewer than two nonzero bins.
    pub slope: Option<f64>,
    pub margin: Option<f64>,
    pub exact: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RegularityReport {
    pub r: u32,
    pub decades: usize,
    pub margins: Vec<QMargin>,
}

impl RegularityReport {
    pub fn to_json(&self) -> Value {
        json!({
            "r": self.r,
            "decades": self.decades,
            "margins": self.margins.iter().map(|m| json!({
                "q": m.q.exponents(),
                "expected": m.expected,
                "slope": m.slope,
                "margin": if m.exact { json!("exact") } else { json!(m.margin) },
            })).collect::<Vec<_>>(),
        })
    }
}

/// Least-squares slope of `ys` against `xs`.
pub fn fit_slope(xs: &[f64], ys: &[f64]) -> Option<f64> {
    let n = xs.len() as f64;
    if xs.len() < 2 {
        return None;
    }
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

/// Empirical check of the Whitney conditions `W_q^r`: for each `|q| ≤ r`
/// the envelope of `|(R_xA)^q(x′)|` against `|x − x′|` is fitted on a
/// log–log scale and compared with `r − |q|`.
pub fn r_regularity_probe<S: Scalar>(field: &JetField<S>, r: u32, opts: ProbeOptions) -> Result<RegularityReport> {
    if r > field.order {
        return Err(Error::OrderExceeded { requested: r, order: field.order });
    }
    let n = field.len();
    let pairs: Vec<(usize, usize, f64)> = (0..n)
        .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
        .map(|(i, j)| {
            let d = norm_sq(&sub_vec(&field.points[j].base, &field.points[i].base)).to_f64().sqrt();
            (i, j, d.log10())
        })
        .collect();
    let decades: BTreeSet<i64> = pairs.iter().map(|p| p.2.floor() as i64).collect();
    if decades.len() < opts.min_decades {
        return Err(Error::InsufficientScales { found: decades.len(), needed: opts.min_decades });
    }
    let bins = opts.bins_per_decade.max(1) as f64;
    let margins = MultiIndex::all_up_to(field.nvars(), r)
        .into_par_iter()
        .map(|q| {
            // bin → (log |R|, log d) of the largest remainder in the bin
            let mut envelope: BTreeMap<i64, (f64, f64)> = BTreeMap::new();
            let mut exact = true;
            for &(i, j, logd) in &pairs {
                let rem = field.remainder_at(&q, i, j).expect("|q| ≤ r ≤ order");
                if rem.is_zero_within(0.0) {
                    continue;
                }
                exact = false;
                let logr = rem.to_f64().abs().log10();
                let bin = (logd * bins).floor() as i64;
                let slot = envelope.entry(bin).or_insert((f64::NEG_INFINITY, logd));
                if logr > slot.0 {
                    *slot = (logr, logd);
                }
            }
            let expected = (r - q.order()) as f64;
            let (xs, ys): (Vec<f64>, Vec<f64>) = envelope.values().map(|&(lr, ld)| (ld, lr)).unzip();
            let slope = if exact { None } else { fit_slope(&xs, &ys) };
            QMargin { q, expected, slope, margin: slope.map(|s| s - expected), exact }
        })
        .collect();
    Ok(RegularityReport { r, decades: decades.len(), margins })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Rational;

    fn q(n: i64) -> Rational {
        Rational::from_i64(n)
    }

    fn mi(v: &[u32]) -> MultiIndex {
        MultiIndex::new(v.to_vec())
    }

    fn x2() -> Poly<Rational> {
        Poly::var(1, 0).pow(2)
    }

    #[test]
    fn formal_derivative_of_x4() {
        let jet = Jet::from_poly(&Poly::var(1, 0).pow(4), &[q(0)], 4).unwrap();
        assert_eq!(jet.coeffs().collect::<Vec<_>>(), vec![(&mi(&[4]), &q(24))]);
        let d2 = jet.formal_derivative(&mi(&[2])).unwrap();
        assert_eq!(d2.order, 2);
        assert_eq!(d2.coeff(&mi(&[2])), q(24));
        assert_eq!(jet.formal_derivative(&mi(&[0])).unwrap(), jet);
        assert!(matches!(jet.formal_derivative(&mi(&[5])), Err(Error::OrderExceeded { .. })));

        let constant = Jet::from_poly(&Poly::constant(1, q(5)), &[q(3)], 2).unwrap();
        assert_eq!(constant.formal_derivative(&mi(&[1])).unwrap().sup_norm(), q(0));
    }

    #[test]
    fn remainders_of_x_squared() {
        let exact = JetField::from_poly(&x2(), &[vec![q(0)], vec![q(1)], vec![q(3)]], 2).unwrap();
        for a in 0..3 {
            for b in 0..3 {
                assert_eq!(exact.remainder_at(&mi(&[0]), a, b).unwrap(), q(0));
            }
        }
        let first = JetField::from_poly(&x2(), &[vec![q(0)], vec![q(1)]], 1).unwrap();
        assert_eq!(whitney_remainder(&first, &mi(&[0]), &[q(0)], &[q(1)]).unwrap(), q(1));
        assert!(matches!(
            whitney_remainder(&first, &mi(&[0]), &[q(0)], &[q(2)]),
            Err(Error::PointNotInField)
        ));
    }

    #[test]
    fn seminorm_examples() {
        let constant = JetField::from_poly(&Poly::constant(1, q(5)), &[vec![q(0)], vec![q(1)]], 1).unwrap();
        let rep = seminorms(&constant, 1).unwrap();
        assert_eq!(rep.sup_norm, q(5));
        assert_eq!(rep.whitney_norm, 5.0);
        assert!(rep.worst.is_none());

        let first = JetField::from_poly(&x2(), &[vec![q(0)], vec![q(1)]], 1).unwrap();
        let rep = seminorms(&first, 1).unwrap();
        assert_eq!(rep.sup_norm, q(2));
        // q = 0 contributes R₀A(1) = 1; q = 1 gives |a₁(1) − a₁(0)| = 2
        assert_eq!(first.remainder_at(&mi(&[0]), 0, 1).unwrap(), q(1));
        assert_eq!(rep.quotient, 2.0);
        let w = rep.worst.unwrap();
        assert_eq!((w.x, w.x_prime, w.q), (vec![q(0)], vec![q(1)], mi(&[1])));
    }

    #[test]
    fn json_round_trip_with_undefined_entries() {
        let mut jet = Jet::from_poly(&x2(), &[q(2)], 2).unwrap();
        jet.mark_undefined(mi(&[2]));
        let field = JetField::new(2, vec![jet]).unwrap();
        let v = field.to_json();
        assert_eq!(v["points"][0]["coeffs"][2][1], Value::Null);
        let back = JetField::<Rational>::from_json(&v).unwrap();
        assert_eq!(back, field);
        assert!(!back.points[0].is_defined(&mi(&[2])));
    }

    #[test]
    fn field_validation() {
        let a = Jet::from_poly(&x2(), &[q(1)], 1).unwrap();
        assert!(matches!(JetField::new(1, vec![a.clone(), a.clone()]), Err(Error::InvalidField(_))));
        assert!(matches!(JetField::new(2, vec![a]), Err(Error::InvalidField(_))));
    }

    #[test]
    fn probe_on_polynomial_field_is_exact() {
        let samples: Vec<Vec<Rational>> =
            [1, 10, 100, 1000, 10000].iter().map(|&d| vec![Rational::new(1.into(), d.into())]).collect();
        let field = JetField::from_poly(&x2(), &samples, 2).unwrap();
        let rep = r_regularity_probe(&field, 2, ProbeOptions::default()).unwrap();
        assert!(rep.margins.iter().all(|m| m.exact));

        let two = JetField::from_poly(&x2(), &samples[..2], 2).unwrap();
        assert!(matches!(
            r_regularity_probe(&two, 1, ProbeOptions::default()),
            Err(Error::InsufficientScales { .. })
        ));
    }
}
