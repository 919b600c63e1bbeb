//! Finite reflection groups of types Aₙ, Bₙ, Dₙ, I₂(m) and their products.
//!
//! The ambient space is laid out block by block: the pointwise-fixed block
//! first (if any), then one coordinate block per irreducible factor. Aₙ acts
//! on ℝⁿ⁺¹ by permuting coordinates, so its block carries its own fixed line
//! and a degree-1 invariant.

use std::collections::{BTreeSet, VecDeque};
use std::f64::consts::PI;
use std::fmt;

use num::{BigUint, One};
use serde::de::{self, Deserializer};
use serde::ser::{SerializeTuple, Serializer};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::polynomial::Poly;
use crate::scalar::{point_key, Rational, Scalar};

/// Orbits are only enumerated for groups of at most this order.
pub const DEFAULT_ORBIT_CAP: u64 = 1_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum FactorKind {
    A,
    B,
    D,
    I2,
}

impl FactorKind {
    pub fn label(self) -> &'static str {
        match self {
            FactorKind::A => "A",
            FactorKind::B => "B",
            FactorKind::D => "D",
            FactorKind::I2 => "I2",
        }
    }

    pub fn from_label(s: &str) -> Result<Self> {
        match s {
            "A" => Ok(FactorKind::A),
            "B" => Ok(FactorKind::B),
            "D" => Ok(FactorKind::D),
            "I2" => Ok(FactorKind::I2),
            other => Err(Error::UnsupportedType(other.to_string())),
        }
    }
}

/// An irreducible factor. For `I2` the parameter is `m`, otherwise the rank.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Factor {
    pub kind: FactorKind,
    pub param: u32,
}

impl Factor {
    pub fn new(kind: FactorKind, param: u32) -> Result<Self> {
        let min = match kind {
            FactorKind::A => 1,
            FactorKind::B => 2,
            FactorKind::D => 3,
            FactorKind::I2 => 3,
        };
        if param < min {
            return Err(Error::RankOutOfRange { kind: kind.label().into(), rank: param });
        }
        Ok(Factor { kind, param })
    }

    pub fn rank(&self) -> u32 {
        match self.kind {
            FactorKind::I2 => 2,
            _ => self.param,
        }
    }

    /// Number of ambient coordinates the factor occupies.
    pub fn dim(&self) -> usize {
        match self.kind {
            FactorKind::A => self.param as usize + 1,
            FactorKind::B | FactorKind::D => self.param as usize,
            FactorKind::I2 => 2,
        }
    }

    pub fn coxeter_number(&self) -> u32 {
        let n = self.param;
        match self.kind {
            FactorKind::A => n + 1,
            FactorKind::B => 2 * n,
            FactorKind::D => 2 * n - 2,
            FactorKind::I2 => n,
        }
    }

    /// Degrees of the basic invariants on the factor's block, non-decreasing.
    pub fn degrees(&self) -> Vec<u32> {
        let n = self.param;
        let mut k: Vec<u32> = match self.kind {
            FactorKind::A => (1..=n + 1).collect(),
            FactorKind::B => (1..=n).map(|j| 2 * j).collect(),
            FactorKind::D => (1..n).map(|j| 2 * j).chain([n]).collect(),
            FactorKind::I2 => vec![2, n],
        };
        k.sort_unstable();
        k
    }

    pub fn reflection_count(&self) -> usize {
        let n = self.param as usize;
        match self.kind {
            FactorKind::A => n * (n + 1) / 2,
            FactorKind::B => n * n,
            FactorKind::D => n * (n - 1),
            FactorKind::I2 => n,
        }
    }

    /// Closed-form group order.
    pub fn order_formula(&self) -> BigUint {
        let n = self.param as u64;
        let fact = |k: u64| (1..=k).fold(BigUint::one(), |acc, i| acc * i);
        match self.kind {
            FactorKind::A => fact(n + 1),
            FactorKind::B => (BigUint::one() << n as usize) * fact(n),
            FactorKind::D => (BigUint::one() << (n - 1) as usize) * fact(n),
            FactorKind::I2 => BigUint::from(2 * n),
        }
    }

    /// `true` when all reflection data is rational.
    pub fn is_rational(&self) -> bool {
        self.kind != FactorKind::I2
    }
}

impl fmt::Display for Factor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            FactorKind::I2 => write!(f, "I2({})", self.param),
            k => write!(f, "{}{}", k.label(), self.param),
        }
    }
}

impl Serialize for Factor {
    fn serialize<Ser: Serializer>(&self, s: Ser) -> std::result::Result<Ser::Ok, Ser::Error> {
        let mut t = s.serialize_tuple(2)?;
        t.serialize_element(self.kind.label())?;
        t.serialize_element(&self.param)?;
        t.end()
    }
}

impl<'de> Deserialize<'de> for Factor {
    fn deserialize<De: Deserializer<'de>>(d: De) -> std::result::Result<Self, De::Error> {
        let (label, param) = <(String, u32)>::deserialize(d)?;
        let kind = FactorKind::from_label(&label).map_err(de::Error::custom)?;
        Factor::new(kind, param).map_err(de::Error::custom)
    }
}

/// `{"factors":[["B",2]],"fixed_dim":0}`
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroupSpec {
    pub factors: Vec<Factor>,
    #[serde(default)]
    pub fixed_dim: usize,
}

impl GroupSpec {
    pub fn single(kind: FactorKind, param: u32) -> Result<Self> {
        Ok(GroupSpec { factors: vec![Factor::new(kind, param)?], fixed_dim: 0 })
    }

    /// Parses names such as `B2`, `A2xB3`, `I2(5)`, `R1xD4` (`R<k>` adds a
    /// k-dimensional pointwise-fixed block).
    pub fn parse(s: &str) -> Result<Self> {
        let mut factors = Vec::new();
        let mut fixed_dim = 0;
        for raw in s.split(['x', '*', ' ']).filter(|t| !t.is_empty()) {
            let tok = raw.trim().to_uppercase();
            if let Some(rest) = tok.strip_prefix("I2") {
                let m = rest.trim_start_matches(['(', '_']).trim_end_matches(')');
                let m: u32 = m.parse().map_err(|_| Error::Parse(format!("bad dihedral `{raw}`")))?;
                factors.push(Factor::new(FactorKind::I2, m)?);
                continue;
            }
            let (label, num) = tok.split_at(1);
            let n: u32 = num.parse().map_err(|_| Error::Parse(format!("bad factor `{raw}`")))?;
            match label {
                "R" => fixed_dim += n as usize,
                l => factors.push(Factor::new(FactorKind::from_label(l)?, n)?),
            }
        }
        if factors.is_empty() && fixed_dim == 0 {
            return Err(Error::Parse(format!("empty group description `{s}`")));
        }
        Ok(GroupSpec { factors, fixed_dim })
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        serde_json::from_value(v.clone()).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn to_json(&self) -> Value {
        serde_json::to_value(self).expect("GroupSpec serializes")
    }

    pub fn dim(&self) -> usize {
        self.fixed_dim + self.factors.iter().map(Factor::dim).sum::<usize>()
    }

    pub fn is_rational(&self) -> bool {
        self.factors.iter().all(Factor::is_rational)
    }
}

impl fmt::Display for GroupSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts: Vec<String> = Vec::new();
        if self.fixed_dim > 0 {
            parts.push(format!("R{}", self.fixed_dim));
        }
        parts.extend(self.factors.iter().map(Factor::to_string));
        f.write_str(&parts.join("x"))
    }
}

/// Combinatorial label of a reflection, in ambient coordinates.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Root {
    /// `eᵢ − eⱼ`, `i < j`: swaps two coordinates.
    Diff(usize, usize),
    /// `eᵢ + eⱼ`, `i < j`: `(xᵢ, xⱼ) ↦ (−xⱼ, −xᵢ)`.
    Sum(usize, usize),
    /// `eᵢ`: negates one coordinate.
    Coord(usize),
    /// Dihedral mirror line at angle `jπ/m` through the plane `(xₒ, xₒ₊₁)`.
    Mirror { offset: usize, j: u32, m: u32 },
}

#[derive(Clone, Debug, PartialEq)]
pub enum Normal {
    Rational(Vec<Rational>),
    Float(Vec<f64>),
}

impl Normal {
    pub fn to_f64(&self) -> Vec<f64> {
        match self {
            Normal::Rational(v) => v.iter().map(Scalar::to_f64).collect(),
            Normal::Float(v) => v.clone(),
        }
    }

    pub fn to_scalar<S: Scalar>(&self) -> Result<Vec<S>> {
        match self {
            Normal::Rational(v) => Ok(v.iter().map(S::from_rational).collect()),
            Normal::Float(v) => v.iter().map(|&c| S::from_f64(c)).collect(),
        }
    }

    pub fn to_json(&self) -> Value {
        match self {
            Normal::Rational(v) => Value::Array(v.iter().map(Scalar::to_json).collect()),
            Normal::Float(v) => json!(v),
        }
    }
}

/// A reflection `τ`; `λ_τ(x) = ⟨normal, x⟩` and `H_τ = ker λ_τ`.
#[derive(Clone, Debug, PartialEq)]
pub struct Reflection {
    pub block: usize,
    pub root: Root,
    pub normal: Normal,
}

impl Reflection {
    fn mirror_trig(j: u32, m: u32) -> (f64, f64) {
        let phi = j as f64 * PI / m as f64;
        (phi.cos(), phi.sin())
    }

    /// Applies the reflection to `x` in place.
    pub fn apply_in_place<S: Scalar>(&self, x: &mut [S]) -> Result<()> {
        match self.root {
            Root::Diff(i, j) => x.swap(i, j),
            Root::Sum(i, j) => {
                let (a, b) = (x[i].clone(), x[j].clone());
                x[i] = -b;
                x[j] = -a;
            }
            Root::Coord(i) => x[i] = -x[i].clone(),
            Root::Mirror { offset, j, m } => {
                // reflection across the line at angle φ: matrix [[cos2φ, sin2φ], [sin2φ, −cos2φ]]
                let (c2, s2) = Self::mirror_trig(2 * j, m);
                let (c2, s2) = (S::from_f64(c2)?, S::from_f64(s2)?);
                let (a, b) = (x[offset].clone(), x[offset + 1].clone());
                x[offset] = c2.clone() * a.clone() + s2.clone() * b.clone();
                x[offset + 1] = s2 * a - c2 * b;
            }
        }
        Ok(())
    }

    pub fn apply<S: Scalar>(&self, x: &[S]) -> Result<Vec<S>> {
        let mut y = x.to_vec();
        self.apply_in_place(&mut y)?;
        Ok(y)
    }

    /// `λ_τ(x)`.
    pub fn linear_form_value<S: Scalar>(&self, x: &[S]) -> Result<S> {
        Ok(crate::scalar::dot(&self.normal.to_scalar::<S>()?, x))
    }

    pub fn linear_form<S: Scalar>(&self) -> Result<Poly<S>> {
        Ok(Poly::linear(&self.normal.to_scalar::<S>()?))
    }

    /// The reflection as a linear substitution `x ↦ τ(x)`, for computing `f∘τ`.
    pub fn substitution<S: Scalar>(&self, n: usize) -> Result<Vec<Poly<S>>> {
        let mut subs: Vec<Poly<S>> = (0..n).map(|i| Poly::var(n, i)).collect();
        match self.root {
            Root::Diff(i, j) => subs.swap(i, j),
            Root::Sum(i, j) => {
                subs[i] = -&Poly::var(n, j);
                subs[j] = -&Poly::var(n, i);
            }
            Root::Coord(i) => subs[i] = -&Poly::var(n, i),
            Root::Mirror { offset, j, m } => {
                let (c2, s2) = Self::mirror_trig(2 * j, m);
                let (c2, s2) = (S::from_f64(c2)?, S::from_f64(s2)?);
                let (a, b) = (Poly::var(n, offset), Poly::var(n, offset + 1));
                subs[offset] = &a.scale(&c2) + &b.scale(&s2);
                subs[offset + 1] = &a.scale(&s2) - &b.scale(&c2);
            }
        }
        Ok(subs)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BlockKind {
    Fixed,
    Factor(Factor),
}

#[derive(Clone, Debug, PartialEq)]
pub struct Block {
    pub kind: BlockKind,
    pub offset: usize,
    pub dim: usize,
    pub degrees: Vec<u32>,
    /// Indices into [`GroupData::reflections`].
    pub reflections: Vec<usize>,
    /// Indices of the simple (generating) reflections.
    pub simple: Vec<usize>,
}

/// An immutable, fully enumerated reflection group.
#[derive(Clone, Debug, PartialEq)]
pub struct GroupData {
    pub spec: GroupSpec,
    pub dim: usize,
    pub blocks: Vec<Block>,
    pub reflections: Vec<Reflection>,
    /// Block-wise degrees, non-decreasing inside each block.
    pub degrees: Vec<u32>,
    /// Largest Coxeter number over the factors (1 for the trivial group).
    pub h: u32,
    /// Number of reflections.
    pub d: usize,
}

fn integer_normal(n: usize, entries: &[(usize, i64)]) -> Normal {
    let mut v = vec![Rational::from_i64(0); n];
    for &(i, c) in entries {
        v[i] = Rational::from_i64(c);
    }
    Normal::Rational(v)
}

pub fn build_group(spec: &GroupSpec) -> Result<GroupData> {
    let dim = spec.dim();
    let mut blocks = Vec::new();
    let mut reflections = Vec::new();
    let mut degrees = Vec::new();
    let mut offset = 0;

    if spec.fixed_dim > 0 {
        blocks.push(Block {
            kind: BlockKind::Fixed,
            offset: 0,
            dim: spec.fixed_dim,
            degrees: vec![1; spec.fixed_dim],
            reflections: Vec::new(),
            simple: Vec::new(),
        });
        degrees.extend(vec![1; spec.fixed_dim]);
        offset = spec.fixed_dim;
    }

    for factor in &spec.factors {
        let factor = Factor::new(factor.kind, factor.param)?;
        let b = blocks.len();
        let o = offset;
        let k = factor.dim();
        let mut local: Vec<Reflection> = Vec::new();
        let mut simple_local = Vec::new();
        let mut push = |root: Root, normal: Normal, simple: bool, local: &mut Vec<Reflection>| {
            if simple {
                simple_local.push(local.len());
            }
            local.push(Reflection { block: b, root, normal });
        };
        match factor.kind {
            FactorKind::A | FactorKind::B | FactorKind::D => {
                for i in 0..k {
                    for j in i + 1..k {
                        push(
                            Root::Diff(o + i, o + j),
                            integer_normal(dim, &[(o + i, 1), (o + j, -1)]),
                            j == i + 1,
                            &mut local,
                        );
                    }
                }
                if factor.kind != FactorKind::A {
                    for i in 0..k {
                        for j in i + 1..k {
                            let simple = factor.kind == FactorKind::D && i == k - 2 && j == k - 1;
                            push(
                                Root::Sum(o + i, o + j),
                                integer_normal(dim, &[(o + i, 1), (o + j, 1)]),
                                simple,
                                &mut local,
                            );
                        }
                    }
                }
                if factor.kind == FactorKind::B {
                    for i in 0..k {
                        push(Root::Coord(o + i), integer_normal(dim, &[(o + i, 1)]), i == k - 1, &mut local);
                    }
                }
            }
            FactorKind::I2 => {
                let m = factor.param;
                for j in 0..m {
                    // mirror line at angle jπ/m, unit normal rotated by π/2
                    let phi = j as f64 * PI / m as f64;
                    let mut nv = vec![0.0; dim];
                    nv[o] = -phi.sin();
                    nv[o + 1] = phi.cos();
                    push(Root::Mirror { offset: o, j, m }, Normal::Float(nv), j < 2, &mut local);
                }
            }
        }
        let base = reflections.len();
        let ids: Vec<usize> = (base..base + local.len()).collect();
        let simple: Vec<usize> = simple_local.iter().map(|s| base + s).collect();
        reflections.extend(local);
        let fdeg = factor.degrees();
        degrees.extend(fdeg.iter().copied());
        blocks.push(Block {
            kind: BlockKind::Factor(factor),
            offset: o,
            dim: k,
            degrees: fdeg,
            reflections: ids,
            simple,
        });
        offset += k;
    }

    let h = spec.factors.iter().map(Factor::coxeter_number).max().unwrap_or(1);
    let d = reflections.len();
    Ok(GroupData { spec: spec.clone(), dim, blocks, reflections, degrees, h, d })
}

impl GroupData {
    pub fn simple_reflections(&self) -> Vec<usize> {
        self.blocks.iter().flat_map(|b| b.simple.iter().copied()).collect()
    }

    pub fn is_rational(&self) -> bool {
        self.spec.is_rational()
    }

    /// `Σ (kᵢ − 1)`
    pub fn degree_excess(&self) -> usize {
        self.degrees.iter().map(|&k| (k - 1) as usize).sum()
    }

    pub fn to_json(&self) -> Value {
        json!({
            "spec": self.spec.to_json(),
            "dim": self.dim,
            "degrees": self.degrees,
            "h": self.h,
            "d": self.d,
            "order": group_order(self).to_string(),
            "reflections": self.reflections.iter().map(|r| r.normal.to_json()).collect::<Vec<_>>(),
        })
    }
}

/// Orthogonal matrices of the factor's block, generated from its reflections
/// by breadth-first closure. Entries are identified on a 1e-9 grid.
pub fn enumerate_factor_elements(factor: &Factor) -> Result<Vec<Vec<f64>>> {
    let spec = GroupSpec { factors: vec![*factor], fixed_dim: 0 };
    let g = build_group(&spec)?;
    let n = g.dim;
    let gens: Vec<Vec<f64>> = g
        .reflections
        .iter()
        .map(|r| {
            let mut m = vec![0.0; n * n];
            for col in 0..n {
                let mut e = vec![0.0; n];
                e[col] = 1.0;
                let img = r.apply(&e).expect("float path");
                for row in 0..n {
                    m[row * n + col] = img[row];
                }
            }
            m
        })
        .collect();
    let key = |m: &[f64]| m.iter().map(|v| (v * 1e9).round() as i64).collect::<Vec<_>>();
    let mut identity = vec![0.0; n * n];
    for i in 0..n {
        identity[i * n + i] = 1.0;
    }
    let mut seen = BTreeSet::new();
    seen.insert(key(&identity));
    let mut out = vec![identity.clone()];
    let mut queue = VecDeque::from([identity]);
    while let Some(m) = queue.pop_front() {
        for gm in &gens {
            let mut prod = vec![0.0; n * n];
            for i in 0..n {
                for k in 0..n {
                    let a = gm[i * n + k];
                    if a == 0.0 {
                        continue;
                    }
                    for j in 0..n {
                        prod[i * n + j] += a * m[k * n + j];
                    }
                }
            }
            if seen.insert(key(&prod)) {
                out.push(prod.clone());
                queue.push_back(prod);
            }
        }
    }
    Ok(out)
}

/// `|W|`: closure enumeration for factors of rank ≤ 4, closed form otherwise.
pub fn group_order(g: &GroupData) -> BigUint {
    g.spec
        .factors
        .iter()
        .map(|f| {
            if f.rank() <= 4 {
                BigUint::from(enumerate_factor_elements(f).map(|e| e.len()).unwrap_or(0))
            } else {
                f.order_formula()
            }
        })
        .fold(BigUint::one(), |acc, o| acc * o)
}

fn check_dim<S>(g: &GroupData, x: &[S]) -> Result<()> {
    if x.len() != g.dim {
        return Err(Error::DimensionMismatch { expected: g.dim, got: x.len() });
    }
    Ok(())
}

/// Orbit `W·x`, sorted by coordinate key.
pub fn orbit<S: Scalar>(g: &GroupData, x: &[S]) -> Result<Vec<Vec<S>>> {
    orbit_with_cap(g, x, DEFAULT_ORBIT_CAP)
}

pub fn orbit_with_cap<S: Scalar>(g: &GroupData, x: &[S], cap: u64) -> Result<Vec<Vec<S>>> {
    check_dim(g, x)?;
    let order: BigUint = g
        .spec
        .factors
        .iter()
        .map(Factor::order_formula)
        .fold(BigUint::one(), |acc, o| acc * o);
    if order > BigUint::from(cap) {
        return Err(Error::OrbitCapExceeded { order: order.to_string(), cap });
    }
    let mut seen = std::collections::BTreeMap::new();
    seen.insert(point_key(x), x.to_vec());
    let mut queue = VecDeque::from([x.to_vec()]);
    while let Some(p) = queue.pop_front() {
        for r in &g.reflections {
            let img = r.apply(&p)?;
            let k = point_key(&img);
            if let std::collections::btree_map::Entry::Vacant(e) = seen.entry(k) {
                e.insert(img.clone());
                queue.push_back(img);
            }
        }
    }
    Ok(seen.into_values().collect())
}

/// Applies the word `s_{i₁} s_{i₂} ⋯ s_{i_k}` to `x`; the rightmost letter
/// acts first.
pub fn apply_element<S: Scalar>(g: &GroupData, word: &[usize], x: &[S]) -> Result<Vec<S>> {
    check_dim(g, x)?;
    let mut y = x.to_vec();
    for &i in word.iter().rev() {
        let r = g
            .reflections
            .get(i)
            .ok_or(Error::IndexOutOfRange { index: i, len: g.reflections.len() })?;
        r.apply_in_place(&mut y)?;
    }
    Ok(y)
}
