//! Strata, isotropy degrees, fundamental domains, and an empirical Whitney
//! 1-regularity probe of `P(ball)`.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::f64::consts::PI;

use num::{BigUint, One};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::chevalley::ChevalleyMap;
use crate::error::{Error, Result};
use crate::groups::{BlockKind, FactorKind, GroupData, Root};
use crate::scalar::{norm_sq, point_to_json, to_f64_vec, Rational, Scalar};

/// `1e−9 (1 + |x|)` on the float path, 0 on the exact path.
pub fn default_tol<S: Scalar>(x: &[S]) -> f64 {
    if S::EXACT {
        0.0
    } else {
        1e-9 * (1.0 + norm_sq(x).to_f64().sqrt())
    }
}

/// Reflections with `|λ_τ(x)| ≤ tol`.
pub fn active_reflections<S: Scalar>(g: &GroupData, x: &[S], tol: f64) -> Result<Vec<usize>> {
    if x.len() != g.dim {
        return Err(Error::DimensionMismatch { expected: g.dim, got: x.len() });
    }
    let xf = to_f64_vec(x);
    let mut out = Vec::new();
    for (i, r) in g.reflections.iter().enumerate() {
        let active = match r.root {
            Root::Mirror { .. } => {
                let v: f64 = r.normal.to_f64().iter().zip(&xf).map(|(a, b)| a * b).sum();
                v.abs() <= tol
            }
            _ => r.linear_form_value(x)?.is_zero_within(tol),
        };
        if active {
            out.push(i);
        }
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq)]
pub struct StratumInfo<S> {
    pub point: Vec<S>,
    pub active: Vec<usize>,
    /// Degrees of the isotropy group `W_S`, aligned with the invariants of
    /// the ambient group: ascending inside each block, padded with 1.
    pub isotropy_degrees: Vec<u32>,
    pub h_s: u32,
    /// `h` of the ambient group.
    pub h: u32,
}

impl<S: Scalar> StratumInfo<S> {
    /// `|W_S| = ∏ k′ᵢ`.
    pub fn isotropy_order(&self) -> BigUint {
        self.isotropy_degrees.iter().fold(BigUint::one(), |acc, &k| acc * k)
    }

    /// Predicted class `C^{hr/h_S}` exponent.
    pub fn class_exponent(&self, r: u32) -> Rational {
        Rational::new((self.h * r).into(), self.h_s.into())
    }

    pub fn to_json(&self) -> Value {
        json!({
            "point": point_to_json(&self.point),
            "active": self.active,
            "isotropy_degrees": self.isotropy_degrees,
            "h_s": self.h_s,
            "h": self.h,
            "isotropy_order": self.isotropy_order().to_string(),
            "class_factor": self.class_exponent(1).to_json(),
        })
    }
}

struct UnionFind(Vec<usize>);

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind((0..n).collect())
    }

    fn find(&mut self, i: usize) -> usize {
        let p = self.0[i];
        if p == i {
            return i;
        }
        let root = self.find(p);
        self.0[i] = root;
        root
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        self.0[ra] = rb;
    }

    fn class_sizes(&mut self, members: &[usize]) -> Vec<usize> {
        let mut counts = std::collections::BTreeMap::new();
        for &m in members {
            *counts.entry(self.find(m)).or_insert(0usize) += 1;
        }
        counts.into_values().collect()
    }
}

fn same_line(a: &[f64], b: &[f64]) -> bool {
    let plus = a.iter().zip(b).all(|(x, y)| (x - y).abs() <= 1e-9);
    let minus = a.iter().zip(b).all(|(x, y)| (x + y).abs() <= 1e-9);
    plus || minus
}

/// The active set must be stable under conjugation by its own members,
/// otherwise `tol` has merged distinct strata.
fn check_closed(g: &GroupData, active: &[usize]) -> Result<()> {
    let normals: Vec<Vec<f64>> = active.iter().map(|&i| g.reflections[i].normal.to_f64()).collect();
    for &t in active {
        for nv in &normals {
            let img = g.reflections[t].apply(nv)?;
            if !normals.iter().any(|m| same_line(m, &img)) {
                return Err(Error::AmbiguousStratum);
            }
        }
    }
    Ok(())
}

/// Degrees of the type-A pieces formed by classes of the given sizes.
fn a_degrees(sizes: &[usize]) -> Vec<u32> {
    sizes.iter().flat_map(|&s| 2..=s as u32).collect()
}

pub fn stratify<S: Scalar>(g: &GroupData, x: &[S], tol: f64) -> Result<StratumInfo<S>> {
    let active = active_reflections(g, x, tol)?;
    check_closed(g, &active)?;
    let mut isotropy_degrees = Vec::with_capacity(g.dim);
    for (b, block) in g.blocks.iter().enumerate() {
        let mine: Vec<Root> = active
            .iter()
            .map(|&i| &g.reflections[i])
            .filter(|r| r.block == b)
            .map(|r| r.root)
            .collect();
        let coords: Vec<usize> = (block.offset..block.offset + block.dim).collect();
        let mut uf = UnionFind::new(g.dim);
        let mut degs: Vec<u32> = match block.kind {
            BlockKind::Fixed => Vec::new(),
            BlockKind::Factor(f) => match f.kind {
                FactorKind::A => {
                    for root in &mine {
                        if let Root::Diff(i, j) = *root {
                            uf.union(i, j);
                        }
                    }
                    a_degrees(&uf.class_sizes(&coords))
                }
                FactorKind::B | FactorKind::D => {
                    let zero: Vec<usize> = if f.kind == FactorKind::B {
                        mine.iter().filter_map(|r| if let Root::Coord(i) = *r { Some(i) } else { None }).collect()
                    } else {
                        // xᵢ = xⱼ = 0 activates both eᵢ − eⱼ and eᵢ + eⱼ
                        coords
                            .iter()
                            .copied()
                            .filter(|&i| {
                                coords.iter().any(|&j| {
                                    let (a, c) = (i.min(j), i.max(j));
                                    j != i && mine.contains(&Root::Diff(a, c)) && mine.contains(&Root::Sum(a, c))
                                })
                            })
                            .collect()
                    };
                    for root in &mine {
                        match *root {
                            Root::Diff(i, j) | Root::Sum(i, j) if !zero.contains(&i) && !zero.contains(&j) => uf.union(i, j),
                            _ => {}
                        }
                    }
                    let rest: Vec<usize> = coords.iter().copied().filter(|i| !zero.contains(i)).collect();
                    let z = zero.len() as u32;
                    let mut degs = a_degrees(&uf.class_sizes(&rest));
                    match f.kind {
                        FactorKind::B => degs.extend((1..=z).map(|j| 2 * j)),
                        _ if z >= 2 => {
                            degs.extend((1..z).map(|j| 2 * j));
                            degs.push(z);
                        }
                        _ => {}
                    }
                    degs
                }
                FactorKind::I2 => match mine.len() {
                    0 => Vec::new(),
                    1 => vec![2],
                    c if c == f.param as usize => vec![2, f.param],
                    _ => return Err(Error::AmbiguousStratum),
                },
            },
        };
        degs.sort_unstable();
        let mut padded = vec![1; block.dim - degs.len()];
        padded.extend(degs);
        isotropy_degrees.extend(padded);
    }
    let h_s = isotropy_degrees.iter().copied().max().unwrap_or(1).max(1);
    Ok(StratumInfo { point: x.to_vec(), active, isotropy_degrees, h_s, h: g.h })
}

/// Oriented normals of the walls of the canonical chamber; `λ ≥ 0` inside.
pub fn chamber_walls(g: &GroupData) -> Vec<Vec<f64>> {
    g.simple_reflections()
        .into_iter()
        .map(|i| {
            let r = &g.reflections[i];
            let v = r.normal.to_f64();
            match r.root {
                Root::Mirror { j: 1, .. } => v.into_iter().map(|c| -c).collect(),
                _ => v,
            }
        })
        .collect()
}

fn abs_sorted<S: Scalar>(block: &mut [S]) -> usize {
    let negatives = block.iter().filter(|v| **v < S::zero()).count();
    for v in block.iter_mut() {
        *v = v.abs();
    }
    block.sort_by(|a, b| b.partial_cmp(a).unwrap_or(Ordering::Equal));
    negatives
}

/// Canonical orbit representative in the closed chamber of [`chamber_walls`].
pub fn fundamental_domain_rep<S: Scalar>(g: &GroupData, x: &[S]) -> Result<Vec<S>> {
    if x.len() != g.dim {
        return Err(Error::DimensionMismatch { expected: g.dim, got: x.len() });
    }
    let mut y = x.to_vec();
    for block in &g.blocks {
        let part = &mut y[block.offset..block.offset + block.dim];
        let BlockKind::Factor(f) = block.kind else { continue };
        match f.kind {
            FactorKind::A => part.sort_by(|a, b| b.partial_cmp(a).unwrap_or(Ordering::Equal)),
            FactorKind::B => {
                abs_sorted(part);
            }
            FactorKind::D => {
                let negatives = abs_sorted(part);
                let has_zero = part.iter().any(|v| v.is_zero());
                if negatives % 2 == 1 && !has_zero {
                    let last = part.len() - 1;
                    part[last] = -part[last].clone();
                }
            }
            FactorKind::I2 => {
                let m = f.param as f64;
                let (u, v) = (part[0].to_f64(), part[1].to_f64());
                let r = u.hypot(v);
                let sector = 2.0 * PI / m;
                let mut theta = v.atan2(u).rem_euclid(sector);
                if theta > sector / 2.0 {
                    theta = sector - theta;
                }
                part[0] = S::from_f64(r * theta.cos())?;
                part[1] = S::from_f64(r * theta.sin())?;
            }
        }
    }
    Ok(y)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ProbeConfig {
    pub radius: f64,
    pub samples: usize,
    pub k_neighbors: usize,
    pub seed: u64,
    /// Number of Dijkstra sources.
    pub sources: usize,
    /// Pairs closer than this fraction of the image diameter are skipped.
    pub min_separation: f64,
    /// Straight edges up to this fraction of the image diameter are added
    /// when the segment stays inside the sampled image.
    pub reach: f64,
}

impl Default for ProbeConfig {
    fn default() -> Self {
        ProbeConfig {
            radius: 1.0,
            samples: 2000,
            k_neighbors: 16,
            seed: 7,
            sources: 48,
            min_separation: 0.1,
            reach: 0.15,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RegularityProbeReport {
    pub seed: u64,
    pub max_ratio: f64,
    pub pairs: usize,
    /// `(samples, max_ratio)` at a quarter, half and all of the samples.
    pub refinement_curve: Vec<(usize, f64)>,
}

impl RegularityProbeReport {
    pub fn to_json(&self) -> Value {
        json!({
            "seed": self.seed,
            "max_ratio": self.max_ratio,
            "pairs": self.pairs,
            "refinement_curve": self.refinement_curve.iter().map(|(n, r)| json!({"samples": n, "max_ratio": r})).collect::<Vec<_>>(),
        })
    }
}

type NeighborRow = (Vec<(usize, f64)>, f64, Vec<(usize, f64)>);

/// Uniform samples from the ball of radius `radius` in `ℝ^dim`.
pub fn sample_ball(dim: usize, radius: f64, count: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let p: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.0..=1.0)).collect();
        if p.iter().map(|c| c * c).sum::<f64>() <= 1.0 {
            out.push(p.into_iter().map(|c| c * radius).collect());
        }
    }
    out
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt()
}

#[derive(PartialEq)]
struct State(f64, usize);

impl Eq for State {}

impl PartialOrd for State {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for State {
    fn cmp(&self, other: &Self) -> Ordering {
        other.0.total_cmp(&self.0).then_with(|| other.1.cmp(&self.1))
    }
}

fn dijkstra(adj: &[Vec<(usize, f64)>], source: usize) -> Vec<f64> {
    let mut d = vec![f64::INFINITY; adj.len()];
    d[source] = 0.0;
    let mut heap = BinaryHeap::from([State(0.0, source)]);
    while let Some(State(du, u)) = heap.pop() {
        if du > d[u] {
            continue;
        }
        for &(v, w) in &adj[u] {
            let nd = du + w;
            if nd < d[v] {
                d[v] = nd;
                heap.push(State(nd, v));
            }
        }
    }
    d
}

/// Dense occupancy grid over the bounding box, dilated so that a cell is
/// marked when a sample lies within about `radius` of it (dimension ≤ 3).
struct CoverGrid {
    lo: Vec<f64>,
    cell: f64,
    shape: Vec<usize>,
    occupied: Vec<bool>,
}

impl CoverGrid {
    const DILATION: i64 = 2;

    fn new(points: &[Vec<f64>], lo: &[f64], hi: &[f64], radius: f64) -> Self {
        let cell = radius / Self::DILATION as f64;
        let lo: Vec<f64> = lo.iter().map(|v| v - radius).collect();
        let shape: Vec<usize> =
            lo.iter().zip(hi).map(|(l, h)| ((h + radius - l) / cell).ceil() as usize + 1).collect();
        let mut grid = CoverGrid { lo, cell, occupied: vec![false; shape.iter().product()], shape };
        let dim = grid.shape.len();
        let span = (2 * Self::DILATION + 1) as usize;
        for p in points {
            let base = grid.coords(p);
            for code in 0..span.pow(dim as u32) {
                let mut rest = code;
                let mut c = [0i64; 3];
                for (slot, b) in c.iter_mut().zip(&base) {
                    *slot = b + (rest % span) as i64 - Self::DILATION;
                    rest /= span;
                }
                if let Some(idx) = grid.index(&c[..dim]) {
                    grid.occupied[idx] = true;
                }
            }
        }
        grid
    }

    fn coords(&self, p: &[f64]) -> Vec<i64> {
        p.iter().zip(&self.lo).map(|(v, l)| ((v - l) / self.cell).floor() as i64).collect()
    }

    fn index(&self, c: &[i64]) -> Option<usize> {
        let mut idx = 0usize;
        for (&v, &n) in c.iter().zip(&self.shape).rev() {
            if v < 0 || v as usize >= n {
                return None;
            }
            idx = idx * n + v as usize;
        }
        Some(idx)
    }

    fn covered(&self, p: &[f64]) -> bool {
        let mut c = [0i64; 3];
        for ((slot, v), l) in c.iter_mut().zip(p).zip(&self.lo) {
            *slot = ((v - l) / self.cell).floor() as i64;
        }
        self.index(&c[..p.len()]).is_some_and(|i| self.occupied[i])
    }

    /// Every point of the segment `[a, b]` lies in a marked cell.
    fn segment_inside(&self, a: &[f64], b: &[f64]) -> bool {
        let steps = (dist(a, b) / self.cell).ceil() as usize;
        let mut c = [0.0; 3];
        let c = &mut c[..a.len()];
        (1..steps).all(|s| {
            let t = s as f64 / steps as f64;
            for ((slot, x), y) in c.iter_mut().zip(a).zip(b) {
                *slot = x + t * (y - x);
            }
            self.covered(c)
        })
    }
}

/// Max geodesic/Euclidean ratio on a k-NN graph over `points`, augmented by
/// straight edges that stay inside the sampled set.
fn graph_ratio(points: &[Vec<f64>], cfg: &ProbeConfig) -> Result<(f64, usize)> {
    let n = points.len();
    let k = cfg.k_neighbors.clamp(1, n.saturating_sub(1).max(1));
    let dim = points.first().map_or(0, Vec::len);
    let (lo, hi) = points.iter().fold((vec![f64::INFINITY; dim], vec![f64::NEG_INFINITY; dim]), |(mut lo, mut hi), p| {
        for (i, c) in p.iter().enumerate() {
            lo[i] = lo[i].min(*c);
            hi[i] = hi[i].max(*c);
        }
        (lo, hi)
    });
    let diameter = dist(&lo, &hi);
    let reach = cfg.reach * diameter;
    let cover_k = k.min(4);

    // per point: k nearest, distance to the cover_k-th nearest, reachable candidates
    let rows: Vec<NeighborRow> = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut d: Vec<(usize, f64)> =
                (0..n).filter(|&j| j != i).map(|j| (j, dist(&points[i], &points[j]))).collect();
            let far: Vec<(usize, f64)> = d.iter().copied().filter(|&(j, w)| j > i && w <= reach).collect();
            d.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));
            let cover = d.get(cover_k - 1).map_or(0.0, |e| e.1);
            d.truncate(k);
            (d, cover, far)
        })
        .collect();
    let mut covers: Vec<f64> = rows.iter().map(|r| r.1).collect();
    covers.sort_by(f64::total_cmp);
    let delta = 1.5 * covers[(covers.len() * 95 / 100).min(covers.len() - 1)];
    let grid = CoverGrid::new(points, &lo, &hi, delta.max(1e-12));
    let visible: Vec<Vec<(usize, f64)>> = rows
        .par_iter()
        .enumerate()
        .map(|(i, row)| row.2.iter().copied().filter(|&(j, _)| grid.segment_inside(&points[i], &points[j])).collect())
        .collect();

    let mut adj: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
    for (i, (knn, _, _)) in rows.iter().enumerate() {
        for &(j, w) in knn.iter().chain(&visible[i]) {
            adj[i].push((j, w));
            adj[j].push((i, w));
        }
    }
    for list in adj.iter_mut() {
        list.sort_by_key(|e| e.0);
        list.dedup_by_key(|e| e.0);
    }

    let step = (n / cfg.sources.max(1)).max(1);
    let sources: Vec<usize> = (0..n).step_by(step).take(cfg.sources.max(1)).collect();
    let runs: Vec<(usize, Vec<f64>)> = sources.par_iter().map(|&s| (s, dijkstra(&adj, s))).collect();
    if runs.iter().any(|(_, d)| d.iter().any(|v| v.is_infinite())) {
        return Err(Error::DisconnectedGraph);
    }
    let cutoff = cfg.min_separation * diameter;
    let mut best = 1.0f64;
    let mut pairs = 0;
    for (s, d) in &runs {
        for (t, &geo) in d.iter().enumerate() {
            let e = dist(&points[*s], &points[t]);
            if t == *s || e < cutoff || e == 0.0 {
                continue;
            }
            pairs += 1;
            best = best.max(geo / e);
        }
    }
    Ok((best, pairs))
}

/// Probe for an arbitrary map of the ball, with refinement at a quarter,
/// half and all of the samples (nested prefixes of one seeded stream).
pub fn regularity_probe_map(
    dim: usize,
    map: impl Fn(&[f64]) -> Vec<f64> + Sync,
    cfg: &ProbeConfig,
) -> Result<RegularityProbeReport> {
    if dim > 3 {
        return Err(Error::UnsupportedType(format!("regularity probe in dimension {dim} > 3")));
    }
    let ball = sample_ball(dim, cfg.radius, cfg.samples, cfg.seed);
    let image: Vec<Vec<f64>> = ball.par_iter().map(|x| map(x)).collect();
    let mut curve = Vec::new();
    let mut last = (1.0, 0);
    for size in [cfg.samples / 4, cfg.samples / 2, cfg.samples] {
        if size < 2 || curve.iter().any(|&(s, _)| s == size) {
            continue;
        }
        last = graph_ratio(&image[..size], cfg)?;
        curve.push((size, last.0));
    }
    Ok(RegularityProbeReport { seed: cfg.seed, max_ratio: last.0, pairs: last.1, refinement_curve: curve })
}

/// Probe of `P(ball)`.
pub fn regularity_probe<S: Scalar>(map: &ChevalleyMap<S>, cfg: &ProbeConfig) -> Result<RegularityProbeReport> {
    let p = map.to_f64();
    regularity_probe_map(
        map.dim(),
        |x| p.polys.iter().map(|q| q.evaluate(x).unwrap_or(f64::NAN)).collect(),
        cfg,
    )
}

/// Control run on the identity map, whose image is convex.
pub fn identity_regularity_probe(dim: usize, cfg: &ProbeConfig) -> Result<RegularityProbeReport> {
    regularity_probe_map(dim, |x| x.to_vec(), cfg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::groups::{build_group, orbit, GroupSpec};

    fn q(n: i64) -> Rational {
        Rational::from_i64(n)
    }

    fn group(name: &str) -> GroupData {
        build_group(&GroupSpec::parse(name).unwrap()).unwrap()
    }

    #[test]
    fn b2_strata() {
        let g = group("B2");
        let s = stratify(&g, &[q(0), q(3)], 0.0).unwrap();
        assert_eq!(s.active.len(), 1);
        assert_eq!((s.isotropy_degrees.clone(), s.h_s), (vec![1, 2], 2));
        assert_eq!(s.class_exponent(1), q(2));
        let s = stratify(&g, &[q(1), q(2)], 0.0).unwrap();
        assert!(s.active.is_empty());
        assert_eq!((s.isotropy_degrees.clone(), s.h_s), (vec![1, 1], 1));
        let s = stratify(&g, &[q(0), q(0)], 0.0).unwrap();
        assert_eq!(s.active.len(), 4);
        assert_eq!((s.isotropy_degrees.clone(), s.h_s), (vec![2, 4], 4));
        let s = stratify(&g, &[q(2), q(2)], 0.0).unwrap();
        assert_eq!(s.isotropy_degrees, vec![1, 2]);
    }

    #[test]
    fn d_and_a_strata() {
        let d4 = group("D4");
        let s = stratify(&d4, &[q(0), q(0), q(1), q(2)], 0.0).unwrap();
        assert_eq!(s.isotropy_degrees, vec![1, 1, 2, 2]);
        let s = stratify(&d4, &[q(0), q(0), q(0), q(2)], 0.0).unwrap();
        assert_eq!(s.isotropy_degrees, vec![1, 2, 3, 4]);
        let s = stratify(&d4, &[q(0), q(1), q(2), q(3)], 0.0).unwrap();
        assert!(s.active.is_empty());
        let a3 = group("A3");
        let s = stratify(&a3, &[q(1), q(1), q(1), q(0)], 0.0).unwrap();
        assert_eq!(s.isotropy_degrees, vec![1, 1, 2, 3]);
    }

    #[test]
    fn dihedral_strata_and_ambiguity() {
        let g = group("I2(5)");
        let s = stratify(&g, &[1.0, 0.0], 1e-9).unwrap();
        assert_eq!(s.isotropy_degrees, vec![1, 2]);
        let s = stratify(&g, &[0.0, 0.0], 1e-9).unwrap();
        assert_eq!(s.isotropy_degrees, vec![2, 5]);
        // a huge tolerance activates several mirrors without the whole group
        assert!(matches!(stratify(&g, &[1.0, 0.1], 0.55), Err(Error::AmbiguousStratum)));
    }

    #[test]
    fn fundamental_domain_examples() {
        let b2 = group("B2");
        assert_eq!(fundamental_domain_rep(&b2, &[q(-2), q(1)]).unwrap(), vec![q(2), q(1)]);
        assert_eq!(fundamental_domain_rep(&b2, &[q(2), q(1)]).unwrap(), vec![q(2), q(1)]);
        let d3 = group("D3");
        let x = [q(-1), q(-2), q(3)];
        let rep = fundamental_domain_rep(&d3, &x).unwrap();
        assert_eq!(rep, vec![q(3), q(2), q(1)]);
        assert!(orbit(&d3, &x).unwrap().contains(&rep));
        let odd = fundamental_domain_rep(&d3, &[q(-1), q(2), q(3)]).unwrap();
        assert_eq!(odd, vec![q(3), q(2), q(-1)]);
        for w in chamber_walls(&d3) {
            let odd_f = to_f64_vec(&odd);
            assert!(w.iter().zip(&odd_f).map(|(a, b)| a * b).sum::<f64>() >= 0.0);
        }
    }

    #[test]
    fn dihedral_rep_lies_in_chamber() {
        let g = group("I2(5)");
        let rep = fundamental_domain_rep(&g, &[-0.3, -0.8]).unwrap();
        for w in chamber_walls(&g) {
            assert!(w[0] * rep[0] + w[1] * rep[1] >= -1e-12);
        }
        assert!((rep[0].hypot(rep[1]) - 0.3f64.hypot(0.8)).abs() < 1e-12);
    }

    #[test]
    fn identity_control_is_close_to_one() {
        let cfg = ProbeConfig { samples: 800, ..ProbeConfig::default() };
        let rep = identity_regularity_probe(2, &cfg).unwrap();
        assert!(rep.max_ratio <= 1.05, "{}", rep.max_ratio);
        assert_eq!(rep.refinement_curve.len(), 3);
    }
}
