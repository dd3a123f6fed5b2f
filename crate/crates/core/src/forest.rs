//! Rooted trees and forests on a finite set of rationals whose shape follows
//! the p-adic distance, the unit lower-triangular linear forms they induce,
//! and the product identities that bound the volume of the ultrametric
//! components.

use std::collections::{BTreeSet, BinaryHeap};
use std::cmp::Reverse;

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hermite::{mahler_det, AlphaSet, MultiIndex, RatMatrix};
use crate::padic::{ensure_prime, val_factorial, LogAbs};
use crate::rational::{int, ratio, Rational};

/// `dist(α, β) = |α - β|_p` as an exact [`LogAbs`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DistanceOracle {
    pub p: u64,
}

impl DistanceOracle {
    pub fn new(p: u64) -> Result<Self> {
        ensure_prime(p)?;
        Ok(DistanceOracle { p })
    }

    pub fn dist(&self, a: &Rational, b: &Rational) -> LogAbs {
        LogAbs::of_rational(self.p, &(a - b))
    }

    fn d(&self, pts: &AlphaSet, a: usize, b: usize) -> LogAbs {
        self.dist(pts.get(a), pts.get(b))
    }

    /// Default radius exponent `1/(p-1)`, i.e. `δ = p^{-1/(p-1)}`.
    pub fn default_delta(&self) -> Rational {
        ratio(1, self.p as i64 - 1)
    }
}

/// A rooted forest on vertex indices `0..n`. Edges are directed
/// `(parent, child)` pairs.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct UltraForest {
    #[serde(skip)]
    n: usize,
    pub roots: Vec<usize>,
    pub edges: Vec<(usize, usize)>,
}

impl UltraForest {
    pub fn new(n: usize, roots: Vec<usize>, edges: Vec<(usize, usize)>) -> Self {
        UltraForest { n, roots, edges }
    }

    pub fn vertex_count(&self) -> usize {
        self.n
    }

    /// Attaches the vertex count after deserialization.
    pub fn with_vertex_count(mut self, n: usize) -> Self {
        self.n = n;
        self
    }

    /// `parent[v]`, or `None` for roots. Fails unless every non-root vertex
    /// has exactly one parent, roots have none, and following parents always
    /// reaches a root.
    pub fn parents(&self) -> std::result::Result<Vec<Option<usize>>, String> {
        let mut parent = vec![None; self.n];
        let is_root: BTreeSet<usize> = self.roots.iter().copied().collect();
        if is_root.len() != self.roots.len() {
            return Err("duplicate root".into());
        }
        for &(a, b) in &self.edges {
            if a >= self.n || b >= self.n {
                return Err(format!("edge ({a},{b}) out of range"));
            }
            if is_root.contains(&b) {
                return Err(format!("root {b} has a parent"));
            }
            if parent[b].replace(a).is_some() {
                return Err(format!("vertex {b} has two parents"));
            }
        }
        for v in 0..self.n {
            let mut cur = v;
            let mut steps = 0;
            while let Some(p) = parent[cur] {
                cur = p;
                steps += 1;
                if steps > self.n {
                    return Err(format!("cycle through vertex {v}"));
                }
            }
            if !is_root.contains(&cur) {
                return Err(format!("vertex {v} is not connected to a root"));
            }
        }
        Ok(parent)
    }

    /// `D_G(v)`: all vertices strictly below `v`.
    pub fn descendants(&self, v: usize) -> BTreeSet<usize> {
        let children = self.children();
        let mut out = BTreeSet::new();
        let mut stack = children[v].clone();
        while let Some(c) = stack.pop() {
            if out.insert(c) {
                stack.extend(children[c].iter().copied());
            }
        }
        out
    }

    pub fn children(&self) -> Vec<Vec<usize>> {
        let mut ch = vec![Vec::new(); self.n];
        for &(a, b) in &self.edges {
            ch[a].push(b);
        }
        ch
    }
}

/// Tree rooted at `root` on the whole point set.
pub fn build_tree(points: &AlphaSet, root: usize, oracle: &DistanceOracle) -> Result<UltraForest> {
    if root >= points.len() {
        return Err(Error::IndexOutOfRange { index: root + 1, len: points.len() });
    }
    let all: Vec<usize> = (0..points.len()).collect();
    let mut edges = Vec::new();
    grow_tree(points, &all, root, oracle, &mut edges);
    Ok(UltraForest::new(points.len(), vec![root], edges))
}

fn grow_tree(points: &AlphaSet, subset: &[usize], root: usize, oracle: &DistanceOracle, edges: &mut Vec<(usize, usize)>) {
    if subset.len() <= 1 {
        return;
    }
    let mut rho = LogAbs::Zero;
    for (x, &a) in subset.iter().enumerate() {
        for &b in &subset[x + 1..] {
            rho = rho.max(oracle.d(points, a, b));
        }
    }
    // First-fit maximal ρ-equidistant set containing the root.
    let mut centers = vec![root];
    for &b in subset {
        if b != root && centers.iter().all(|&c| oracle.d(points, b, c) == rho) {
            centers.push(b);
        }
    }
    for &c in &centers {
        let ball: Vec<usize> = subset.iter().copied().filter(|&b| oracle.d(points, c, b) < rho).collect();
        if c != root {
            edges.push((root, c));
        }
        grow_tree(points, &ball, c, oracle, edges);
    }
}

/// Greedy first-fit subset whose points are mutually at distance `≥ p^{-δ_exp}`.
pub fn maximal_separated_subset(points: &AlphaSet, delta_exp: &Rational, oracle: &DistanceOracle) -> Vec<usize> {
    let delta = LogAbs::Pow(delta_exp.clone());
    let mut chosen: Vec<usize> = Vec::new();
    for a in 0..points.len() {
        if chosen.iter().all(|&c| oracle.d(points, a, c) >= delta) {
            chosen.push(a);
        }
    }
    chosen
}

/// Forest whose roots are a maximal δ-separated subset and whose trees live
/// on the open δ-balls around them.
pub fn build_forest(points: &AlphaSet, delta_exp: &Rational, oracle: &DistanceOracle) -> UltraForest {
    let delta = LogAbs::Pow(delta_exp.clone());
    let roots = maximal_separated_subset(points, delta_exp, oracle);
    let mut edges = Vec::new();
    for &r in &roots {
        let ball: Vec<usize> = (0..points.len()).filter(|&a| oracle.d(points, a, r) < delta).collect();
        grow_tree(points, &ball, r, oracle, &mut edges);
    }
    UltraForest::new(points.len(), roots, edges)
}

/// Counterexample found by [`verify_forest`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Witness {
    Structure(String),
    /// `γ ∈ D(root)` disagrees with `δ > |root - γ| > 0`.
    Root { root: usize, gamma: usize },
    /// `γ ∈ D(β)` disagrees with `|α - β| > |β - γ| > 0` for the edge `(α, β)`.
    Edge { alpha: usize, beta: usize, gamma: usize },
    /// `|edges| + |roots| ≠ |vertices|`.
    Count,
}

/// Exhaustively checks the two characterizations of descendants.
pub fn verify_forest(
    forest: &UltraForest,
    points: &AlphaSet,
    delta_exp: &Rational,
    oracle: &DistanceOracle,
) -> std::result::Result<(), Witness> {
    if forest.vertex_count() != points.len() {
        return Err(Witness::Structure("vertex count does not match the point set".into()));
    }
    forest.parents().map_err(Witness::Structure)?;
    if forest.edges.len() + forest.roots.len() != forest.vertex_count() {
        return Err(Witness::Count);
    }
    let delta = LogAbs::Pow(delta_exp.clone());
    let desc: Vec<BTreeSet<usize>> = (0..forest.vertex_count()).map(|v| forest.descendants(v)).collect();
    for &r in &forest.roots {
        for g in 0..points.len() {
            let d = oracle.d(points, r, g);
            let expected = d < delta && !d.is_zero();
            if desc[r].contains(&g) != expected {
                return Err(Witness::Root { root: r, gamma: g });
            }
        }
    }
    for &(a, b) in &forest.edges {
        let dab = oracle.d(points, a, b);
        for g in 0..points.len() {
            let dbg = oracle.d(points, b, g);
            let expected = dab > dbg && !dbg.is_zero();
            if desc[b].contains(&g) != expected {
                return Err(Witness::Edge { alpha: a, beta: b, gamma: g });
            }
        }
    }
    Ok(())
}

/// Total order extending the forest order: a topological sort that always
/// takes the smallest available input index.
pub fn forest_order(forest: &UltraForest) -> Result<Vec<usize>> {
    let parent = forest.parents().map_err(Error::InvalidArgument)?;
    let children = forest.children();
    let mut heap: BinaryHeap<Reverse<usize>> =
        (0..forest.vertex_count()).filter(|&v| parent[v].is_none()).map(Reverse).collect();
    let mut order = Vec::with_capacity(forest.vertex_count());
    while let Some(Reverse(v)) = heap.pop() {
        order.push(v);
        heap.extend(children[v].iter().copied().map(Reverse));
    }
    Ok(order)
}

/// Matrix of the forms `L_β = x_β` (roots) and `L_β = x_β - φ(α,β) x_α`
/// (edges), rows and columns both in [`forest_order`].
pub fn triangular_forms<F>(forest: &UltraForest, phi: F) -> Result<(RatMatrix, Vec<usize>)>
where
    F: Fn(usize, usize) -> Option<Rational>,
{
    let order = forest_order(forest)?;
    let parent = forest.parents().map_err(Error::InvalidArgument)?;
    let n = order.len();
    let mut pos = vec![0; n];
    for (i, &v) in order.iter().enumerate() {
        pos[v] = i;
    }
    let mut rows = vec![vec![Rational::zero(); n]; n];
    for (i, &b) in order.iter().enumerate() {
        rows[i][i] = Rational::one();
        if let Some(a) = parent[b] {
            let w = phi(a, b).ok_or_else(|| Error::InvalidArgument(format!("no weight on edge ({a},{b})")))?;
            rows[i][pos[a]] = -w;
        }
    }
    let m = RatMatrix(rows);
    assert!(m.is_unit_lower_triangular(), "forest order must put parents first");
    Ok((m, order))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DeltaProducts {
    /// `Π_{β∈R, γ∈A} max(|β-γ|, δ)^{n_γ}`
    pub root_part: LogAbs,
    /// `Π_{β∈S(α), γ∈A} max(|α-γ|, |β-γ|)^{n_γ}`
    pub edge_part: LogAbs,
    /// `δ^N Π_β Π_{γ≠β} |β-γ|^{n_γ}`
    pub closed_form: LogAbs,
}

impl DeltaProducts {
    pub fn identity_holds(&self) -> bool {
        &self.root_part * &self.edge_part == self.closed_form
    }
}

pub fn delta_products(
    forest: &UltraForest,
    points: &AlphaSet,
    n: &MultiIndex,
    delta_exp: &Rational,
    oracle: &DistanceOracle,
) -> Result<DeltaProducts> {
    let s = points.len();
    if forest.vertex_count() != s {
        return Err(Error::LengthMismatch { expected: s, got: forest.vertex_count() });
    }
    if n.len() != s {
        return Err(Error::LengthMismatch { expected: s, got: n.len() });
    }
    let delta = LogAbs::Pow(delta_exp.clone());
    let nn = n.entries();
    let mut root_part = LogAbs::one();
    for &b in &forest.roots {
        for g in 0..s {
            root_part = root_part * oracle.d(points, b, g).max(delta.clone()).powi(nn[g]);
        }
    }
    let mut edge_part = LogAbs::one();
    for &(a, b) in &forest.edges {
        for g in 0..s {
            edge_part = edge_part * oracle.d(points, a, g).max(oracle.d(points, b, g)).powi(nn[g]);
        }
    }
    let mut closed_form = delta.powi(n.total());
    for b in 0..s {
        for g in (0..s).filter(|&g| g != b) {
            closed_form = closed_form * oracle.d(points, b, g).powi(nn[g]);
        }
    }
    Ok(DeltaProducts { root_part, edge_part, closed_form })
}

/// Volume data of the p-adic component of the convex body attached to
/// `(alphas, n)`.
#[derive(Clone, Debug)]
pub struct UltrametricVolume {
    /// `|Δ_n|_p`, the lower bound for the normalized volume.
    pub mahler: LogAbs,
    /// `Δ'Δ''`; the volume is at most `(p³N)^s Δ'Δ''`.
    pub forest_product: LogAbs,
    /// `Π |(n_i-1)!|_p`, the exact volume when all points are at mutual distance one.
    pub factorial_box: LogAbs,
    pub all_unit_distances: bool,
}

impl UltrametricVolume {
    /// `Δ'Δ'' ≤ |Δ_n|_p`, which yields the upper estimate `(p³N)^s |Δ_n|_p`.
    pub fn upper_estimate_holds(&self) -> bool {
        self.forest_product <= self.mahler
    }

    /// At a place where all mutual distances are one the volume equals `|Δ_n|_p`.
    pub fn trivial_place_identity_holds(&self) -> bool {
        !self.all_unit_distances || self.factorial_box == self.mahler
    }
}

pub fn ultrametric_volume(points: &AlphaSet, n: &MultiIndex, oracle: &DistanceOracle) -> Result<UltrametricVolume> {
    let delta_exp = oracle.default_delta();
    let forest = build_forest(points, &delta_exp, oracle);
    let dp = delta_products(&forest, points, n, &delta_exp, oracle)?;
    if !dp.identity_holds() {
        return Err(Error::Numerical("forest product identity failed".into()));
    }
    let det = mahler_det(points, n)?;
    let mahler = LogAbs::of_rational(oracle.p, &det);
    let fact = n
        .entries()
        .iter()
        .map(|&k| val_factorial(oracle.p, (k - 1) as u64) as i64)
        .sum::<i64>();
    let s = points.len();
    let all_unit = (0..s).all(|a| (0..s).all(|b| a == b || oracle.d(points, a, b) == LogAbs::one()));
    Ok(UltrametricVolume {
        mahler,
        forest_product: &dp.root_part * &dp.edge_part,
        factorial_box: LogAbs::Pow(int(fact)),
        all_unit_distances: all_unit,
    })
}
