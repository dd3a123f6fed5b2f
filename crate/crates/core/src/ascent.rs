//! Paths along which `|f|` grows fastest for complex polynomials, the tree
//! they induce on the roots, and the bounds these paths satisfy.

use num_complex::Complex64 as C;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::ser::SerializeSeq;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::rational::{factorial, ln_biguint};

/// Floating tolerances used throughout the module.
#[derive(Clone, Debug, Serialize)]
pub struct Tolerances {
    /// Arrival at a root: `|z - α| < capture (1 + |α|)`.
    pub capture: f64,
    /// Roots of the derivative closer than this (relative) form one cluster.
    pub cluster: f64,
    /// Residual accepted by the Newton corrector.
    pub newton: f64,
    /// Corrector iterations allowed per step.
    pub newton_iters: usize,
    /// Relative size of the random perturbation of `t` at a stall.
    pub jitter: f64,
    pub max_jitters: u32,
    pub max_steps: usize,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances { capture: 1e-8, cluster: 1e-4, newton: 1e-13, newton_iters: 5, jitter: 1e-3, max_jitters: 50, max_steps: 200_000 }
    }
}

/// Monic polynomial `∏ (z - α_i)^{n_i}` stored by its distinct roots.
#[derive(Clone, Debug, Serialize)]
pub struct ComplexPoly {
    /// Ascending coefficients of the monic polynomial.
    #[serde(serialize_with = "ser_complex_vec")]
    pub coeffs: Vec<C>,
    /// Whether the input was already monic.
    pub monic: bool,
    #[serde(serialize_with = "ser_complex_vec")]
    pub roots: Vec<C>,
    pub mult: Vec<u32>,
}

fn ser_complex<S: Serializer>(z: &C, s: S) -> std::result::Result<S::Ok, S::Error> {
    [z.re, z.im].serialize(s)
}

fn ser_complex_vec<S: Serializer>(v: &[C], s: S) -> std::result::Result<S::Ok, S::Error> {
    let mut seq = s.serialize_seq(Some(v.len()))?;
    for z in v {
        seq.serialize_element(&[z.re, z.im])?;
    }
    seq.end()
}

fn expand(roots: &[C], mult: &[u32]) -> Vec<C> {
    let mut c = vec![C::new(1.0, 0.0)];
    for (a, &m) in roots.iter().zip(mult) {
        for _ in 0..m {
            let mut next = vec![C::new(0.0, 0.0); c.len() + 1];
            for (k, ck) in c.iter().enumerate() {
                next[k + 1] += ck;
                next[k] -= ck * a;
            }
            c = next;
        }
    }
    c
}

fn horner(c: &[C], z: C) -> C {
    c.iter().rev().fold(C::new(0.0, 0.0), |acc, ck| acc * z + ck)
}

fn derivative(c: &[C]) -> Vec<C> {
    c.iter().enumerate().skip(1).map(|(k, ck)| ck * k as f64).collect()
}

fn derivative_n(c: &[C], k: usize) -> Vec<C> {
    (0..k).fold(c.to_vec(), |acc, _| derivative(&acc))
}

/// Simultaneous Aberth iteration on ascending coefficients.
fn aberth(c: &[C]) -> Result<Vec<C>> {
    let d = c.len() - 1;
    if d == 0 {
        return Ok(Vec::new());
    }
    let lead = c[d];
    let c: Vec<C> = c.iter().map(|x| x / lead).collect();
    let dc = derivative(&c);
    let r = (0..d).map(|k| c[k].norm().powf(1.0 / (d - k) as f64)).fold(0.0, f64::max) * 2.0 + 1e-3;
    let center = -c[d - 1] / d as f64;
    let mut z: Vec<C> = (0..d).map(|k| center + C::from_polar(r, 2.0 * std::f64::consts::PI * k as f64 / d as f64 + 0.4)).collect();
    for _ in 0..800 {
        let mut worst: f64 = 0.0;
        for k in 0..d {
            let p = horner(&c, z[k]);
            if p.norm() == 0.0 {
                continue;
            }
            let ratio = p / horner(&dc, z[k]);
            let sum: C = (0..d).filter(|&j| j != k).map(|j| (z[k] - z[j]).inv()).sum();
            let w = ratio / (C::new(1.0, 0.0) - ratio * sum);
            if w.is_finite() {
                z[k] -= w;
                worst = worst.max(w.norm() / (1.0 + z[k].norm()));
            }
        }
        if worst < 1e-15 {
            return Ok(z);
        }
    }
    // Clustered roots only converge to the noise floor; accept small residuals.
    let absval: Vec<f64> = c.iter().map(|x| x.norm()).collect();
    for &zk in &z {
        let scale: f64 = absval.iter().enumerate().map(|(k, a)| a * zk.norm().powi(k as i32)).sum();
        if !(horner(&c, zk).norm() <= 1e-9 * scale) {
            return Err(Error::Numerical("root finder did not converge".into()));
        }
    }
    Ok(z)
}

/// Groups numerically coincident roots and refines each cluster centre.
fn cluster_roots(c: &[C], z: &[C], tol: f64) -> Vec<(C, u32)> {
    let n = z.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut Vec<usize>, i: usize) -> usize {
        let mut r = i;
        while p[r] != r {
            r = p[r];
        }
        p[i] = r;
        r
    }
    for i in 0..n {
        for j in i + 1..n {
            if (z[i] - z[j]).norm() < tol * (1.0 + z[i].norm()) {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                parent[a] = b;
            }
        }
    }
    let mut groups: Vec<(usize, Vec<C>)> = Vec::new();
    for i in 0..n {
        let r = find(&mut parent, i);
        match groups.iter_mut().find(|g| g.0 == r) {
            Some(g) => g.1.push(z[i]),
            None => groups.push((r, vec![z[i]])),
        }
    }
    groups
        .into_iter()
        .map(|(_, pts)| {
            let m = pts.len();
            let mut w = pts.iter().sum::<C>() / m as f64;
            if m > 1 {
                let dk = derivative_n(c, m - 1);
                let dk1 = derivative(&dk);
                for _ in 0..30 {
                    let step = horner(&dk, w) / horner(&dk1, w);
                    if !step.is_finite() {
                        break;
                    }
                    w -= step;
                    if step.norm() < 1e-16 * (1.0 + w.norm()) {
                        break;
                    }
                }
            }
            (w, m as u32)
        })
        .collect()
}

impl ComplexPoly {
    pub fn from_roots(roots: Vec<C>, mult: Vec<u32>) -> Result<Self> {
        if roots.is_empty() {
            return Err(Error::InvalidArgument("polynomial must have degree at least 1".into()));
        }
        if roots.len() != mult.len() {
            return Err(Error::LengthMismatch { expected: roots.len(), got: mult.len() });
        }
        if let Some(i) = mult.iter().position(|&m| m == 0) {
            return Err(Error::IndexTooSmall { index: i + 1, value: 0, min: 1 });
        }
        for i in 0..roots.len() {
            for j in i + 1..roots.len() {
                if roots[i] == roots[j] {
                    return Err(Error::DuplicateAlpha(i + 1, j + 1));
                }
            }
        }
        Ok(ComplexPoly { coeffs: expand(&roots, &mult), monic: true, roots, mult })
    }

    /// From ascending coefficients; the roots are found numerically and
    /// clustered into distinct roots with multiplicities.
    pub fn from_coeffs(coeffs: &[C], tol: &Tolerances) -> Result<Self> {
        let mut c = coeffs.to_vec();
        while c.len() > 1 && c.last().is_some_and(|x| x.norm() == 0.0) {
            c.pop();
        }
        if c.len() < 2 {
            return Err(Error::InvalidArgument("polynomial must have degree at least 1".into()));
        }
        let lead = *c.last().unwrap();
        let monic = lead == C::new(1.0, 0.0);
        let c: Vec<C> = c.iter().map(|x| x / lead).collect();
        let z = aberth(&c)?;
        let cl = cluster_roots(&c, &z, tol.cluster);
        let poly = ComplexPoly { coeffs: c, monic, roots: cl.iter().map(|x| x.0).collect(), mult: cl.iter().map(|x| x.1).collect() };
        Ok(poly)
    }

    pub fn degree(&self) -> u32 {
        self.mult.iter().sum()
    }

    pub fn distinct(&self) -> usize {
        self.roots.len()
    }

    pub fn eval(&self, z: C) -> C {
        self.roots.iter().zip(&self.mult).fold(C::new(1.0, 0.0), |acc, (a, &m)| acc * (z - a).powi(m as i32))
    }

    /// `f'/f`.
    pub fn log_derivative(&self, z: C) -> C {
        self.roots.iter().zip(&self.mult).map(|(a, &m)| m as f64 / (z - a)).sum()
    }

    /// Relative mismatch between the stored coefficients and those of the
    /// product over the roots.
    pub fn coefficient_residual(&self) -> f64 {
        let e = expand(&self.roots, &self.mult);
        let scale: f64 = self.coeffs.iter().map(|x| x.norm()).fold(1.0, f64::max);
        e.iter().zip(&self.coeffs).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max) / scale
    }

    /// `g(z) = Σ n_k ∏_{j≠k} (z - α_j)`, so that
    /// `f' = ∏ (z - α_i)^{n_i - 1} g`.
    pub fn reduced_derivative(&self) -> Vec<C> {
        let s = self.roots.len();
        let mut g = vec![C::new(0.0, 0.0); s];
        for k in 0..s {
            let others: Vec<C> = (0..s).filter(|&j| j != k).map(|j| self.roots[j]).collect();
            let e = expand(&others, &vec![1; s - 1]);
            for (i, c) in e.iter().enumerate() {
                g[i] += c * self.mult[k] as f64;
            }
        }
        g
    }

    /// Radius of the smallest disk containing the roots.
    pub fn radius(&self) -> f64 {
        min_enclosing_disk(&self.roots).1
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct CriticalPoint {
    #[serde(serialize_with = "ser_complex")]
    pub z: C,
    pub m: u32,
}

/// Zeros of `f'/f`, with multiplicities summing to `s - 1`.
#[derive(Clone, Debug, Serialize)]
pub struct CriticalSet {
    pub points: Vec<CriticalPoint>,
}

impl CriticalSet {
    pub fn total_multiplicity(&self) -> u32 {
        self.points.iter().map(|p| p.m).sum()
    }
}

pub fn critical_points(f: &ComplexPoly, tol: &Tolerances) -> Result<CriticalSet> {
    let s = f.distinct();
    if s == 1 {
        return Ok(CriticalSet { points: Vec::new() });
    }
    let g = f.reduced_derivative();
    let z = aberth(&g)?;
    let cl = cluster_roots(&g, &z, tol.cluster);
    let scale = 1.0 + f.roots.iter().map(|a| a.norm()).fold(0.0, f64::max);
    for (b, _) in &cl {
        if let Some(a) = f.roots.iter().find(|a| (b - *a).norm() < tol.cluster * scale) {
            return Err(Error::Numerical(format!("critical point {b} cannot be separated from root {a}")));
        }
    }
    let set = CriticalSet { points: cl.into_iter().map(|(z, m)| CriticalPoint { z, m }).collect() };
    if set.total_multiplicity() as usize != s - 1 {
        return Err(Error::Numerical("critical multiplicities do not sum to s - 1".into()));
    }
    Ok(set)
}

/// Samples `(t, γ(t))` of a path with `f(γ(t)) = t f(β)`, from `t = 1`
/// down to `t = 0` where the path ends at a root.
#[derive(Clone, Debug, Serialize)]
pub struct PathTrace {
    #[serde(serialize_with = "ser_samples")]
    pub samples: Vec<(f64, C)>,
    pub end_root: usize,
    pub arc_length: f64,
    pub jitters: u32,
}

fn ser_samples<S: Serializer>(v: &[(f64, C)], s: S) -> std::result::Result<S::Ok, S::Error> {
    let mut seq = s.serialize_seq(Some(v.len()))?;
    for (t, z) in v {
        seq.serialize_element(&[*t, z.re, z.im])?;
    }
    seq.end()
}

impl PathTrace {
    /// Largest `|f(z) - t f(β)| / |f(β)|` over the samples.
    pub fn residual(&self, f: &ComplexPoly, fb: C) -> f64 {
        self.samples.iter().map(|(t, z)| (f.eval(*z) - fb * *t).norm() / fb.norm()).fold(0.0, f64::max)
    }
}

fn nearest_root(f: &ComplexPoly, z: C) -> (usize, f64) {
    f.roots.iter().enumerate().map(|(i, a)| (i, (z - a).norm())).fold((0, f64::INFINITY), |b, x| if x.1 < b.1 { x } else { b })
}

// Newton on log(f(z) / (t f(β))) = 0. The attainable residual grows with the
// cancellation in each factor z - α_i.
fn correct(f: &ComplexPoly, fb: C, t: f64, mut z: C, tol: &Tolerances, iters: usize) -> Option<C> {
    let floor = |z: C| -> f64 {
        tol.newton + 4.0 * f64::EPSILON * f.roots.iter().zip(&f.mult).map(|(a, &m)| m as f64 * (z.norm() + a.norm()) / (z - a).norm()).sum::<f64>()
    };
    for _ in 0..iters {
        let w = (f.eval(z) / fb / t).ln();
        if !w.is_finite() {
            return None;
        }
        if w.norm() < floor(z) {
            return Some(z);
        }
        z -= w / f.log_derivative(z);
    }
    let w = (f.eval(z) / fb / t).ln();
    (w.norm() < floor(z)).then_some(z)
}

struct Tracer<'a> {
    f: &'a ComplexPoly,
    critical: &'a [CriticalPoint],
    fb: C,
    tol: &'a Tolerances,
    rng: ChaCha8Rng,
}

impl Tracer<'_> {
    // dz/du = f/f' along the path, with u = ln t.
    fn field(&self, z: C) -> C {
        self.f.log_derivative(z).inv()
    }

    fn run(&mut self, start: C, t0: f64) -> Result<PathTrace> {
        let (f, fb, tol) = (self.f, self.fb, self.tol);
        let mut samples = vec![(t0, start)];
        let mut z = start;
        let mut u = t0.ln();
        let mut h = -0.05;
        let mut arc = 0.0;
        let mut jitters = 0;
        for _ in 0..tol.max_steps {
            let (idx, dist) = nearest_root(f, z);
            if dist < tol.capture * (1.0 + f.roots[idx].norm()) {
                arc += dist;
                samples.push((0.0, f.roots[idx]));
                return Ok(PathTrace { samples, end_root: idx, arc_length: arc, jitters });
            }
            let k1 = self.field(z);
            let k2 = self.field(z + k1 * (h / 2.0));
            let k3 = self.field(z + k2 * (h / 2.0));
            let k4 = self.field(z + k3 * h);
            let pred = z + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0);
            let dz = (pred - z).norm();
            let step = if dz <= 0.5 * dist { correct(f, fb, (u + h).exp(), pred, tol, tol.newton_iters) } else { None };
            match step.filter(|c| (c - pred).norm() <= 1e-3 * dz + 1e-15 * (1.0 + z.norm())) {
                Some(next) => {
                    arc += (next - z).norm();
                    z = next;
                    u += h;
                    samples.push((u.exp(), z));
                    h = (h * 1.5).max(-0.5);
                }
                None => {
                    h /= 2.0;
                    if h.abs() < 1e-10 {
                        // Stalled near a ramification point: move t down by a
                        // random factor and re-lift on a nearby branch.
                        jitters += 1;
                        if jitters > tol.max_jitters {
                            return Err(Error::Numerical("path continuation stalled".into()));
                        }
                        let t = u.exp() * (1.0 - tol.jitter * self.rng.random::<f64>().max(1e-3));
                        if let Some(next) = self.relift(z, t) {
                            arc += (next - z).norm();
                            z = next;
                            u = t.ln();
                            samples.push((t, z));
                        }
                        h = -0.05;
                    }
                }
            }
        }
        Err(Error::Numerical("path continuation exceeded the step budget".into()))
    }

    // A solution of f = t f(β) near z. Next to a critical point the local
    // branches are enumerated and one is picked at random.
    fn relift(&mut self, z: C, t: f64) -> Option<C> {
        let near = self.critical.iter().filter(|b| (b.z - z).norm() < 1e-2 * (1.0 + b.z.norm())).min_by(|a, b| (a.z - z).norm().total_cmp(&(b.z - z).norm()));
        match near {
            Some(b) => {
                let mut guesses = local_branches(self.f, b, t * self.fb / self.f.eval(b.z) - 1.0);
                let k = self.rng.random_range(0..guesses.len());
                guesses.rotate_left(k);
                guesses.into_iter().find_map(|(g, r)| correct(self.f, self.fb, t, g, self.tol, 40).filter(|c| (c - g).norm() < 0.25 * r))
            }
            None => {
                let nudge = C::from_polar(1e-6 * (1.0 + z.norm()), self.rng.random::<f64>() * std::f64::consts::TAU);
                correct(self.f, self.fb, t, z + nudge, self.tol, 40)
            }
        }
    }
}

// Solutions of f(z) = f(β)(1 + eps) near β from f(z) ≈ f(β)(1 + c (z - β)^ℓ),
// each with the radius within which it is separated from its neighbours.
fn local_branches(f: &ComplexPoly, beta: &CriticalPoint, eps: C) -> Vec<(C, f64)> {
    let ell = beta.m as usize + 1;
    let fact: f64 = (1..=ell).map(|k| k as f64).product();
    let c = horner(&derivative_n(&f.coeffs, ell), beta.z) / (fact * f.eval(beta.z));
    let w = eps / c;
    let r = w.norm().powf(1.0 / ell as f64);
    let sep = if ell == 1 { r } else { r * (std::f64::consts::PI / ell as f64).sin() };
    (0..ell).map(|j| (beta.z + C::from_polar(r, (w.arg() + std::f64::consts::TAU * j as f64) / ell as f64), sep)).collect()
}

/// The `m(β) + 1` descent paths leaving `β`.
pub fn trace_descent(f: &ComplexPoly, beta: &CriticalPoint, seed: u64, tol: &Tolerances) -> Result<Vec<PathTrace>> {
    let critical = critical_points(f, tol)?;
    trace_with(f, beta, &critical.points, seed, tol)
}

fn trace_with(f: &ComplexPoly, beta: &CriticalPoint, critical: &[CriticalPoint], seed: u64, tol: &Tolerances) -> Result<Vec<PathTrace>> {
    let fb = f.eval(beta.z);
    if fb.norm() == 0.0 {
        return Err(Error::InvalidArgument("f(β) must be nonzero".into()));
    }
    let ell = beta.m as usize + 1;
    let fact: f64 = (1..=ell).map(|k| k as f64).product();
    let c = horner(&derivative_n(&f.coeffs, ell), beta.z) / (fact * fb);
    // Leave β at a radius small against its distance to the other roots and
    // critical points.
    let sep = f.roots.iter().map(|a| (a - beta.z).norm()).chain(critical.iter().map(|b| (b.z - beta.z).norm()).filter(|d| *d > 0.0)).fold(f64::INFINITY, f64::min);
    let r0 = (1e-4 / c.norm()).powf(1.0 / ell as f64).min(0.02 * sep);
    let t0 = 1.0 - c.norm() * r0.powi(ell as i32);
    if !(t0 < 1.0 - 1e-12) {
        return Err(Error::Numerical("starting step below resolution".into()));
    }
    let mut out = Vec::with_capacity(ell);
    // The branches decrease |f| along odd powers of e^{iπ/ℓ}, rotated by c.
    for (j, (guess, radius)) in local_branches(f, beta, C::new(t0 - 1.0, 0.0)).into_iter().enumerate() {
        let start = correct(f, fb, t0, guess, tol, 40).ok_or_else(|| Error::Numerical("could not leave the critical point".into()))?;
        if (start - guess).norm() > 0.25 * radius {
            return Err(Error::Numerical("initial direction drifted to another branch".into()));
        }
        let mut tracer = Tracer { f, critical, fb, tol, rng: ChaCha8Rng::seed_from_u64(seed) };
        tracer.rng.set_stream(j as u64);
        let mut tr = tracer.run(start, t0)?;
        tr.arc_length += (start - beta.z).norm();
        tr.samples.insert(0, (1.0, beta.z));
        out.push(tr);
    }
    Ok(out)
}

#[derive(Clone, Debug, Serialize)]
pub struct AscentEdge {
    pub a: usize,
    pub b: usize,
    /// Index of the tagging critical point.
    pub beta: usize,
    /// Which of the paths at `β` reaches `b`.
    pub branch: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct AscentTree {
    pub poly: ComplexPoly,
    pub critical: CriticalSet,
    pub traces: Vec<Vec<PathTrace>>,
    pub edges: Vec<AscentEdge>,
    pub seed: u64,
}

impl AscentTree {
    pub fn jitters(&self) -> u32 {
        self.traces.iter().flatten().map(|t| t.jitters).sum()
    }

    /// Number of edges tagged by each critical point.
    pub fn tag_counts(&self) -> Vec<u32> {
        let mut c = vec![0; self.critical.points.len()];
        for e in &self.edges {
            c[e.beta] += 1;
        }
        c
    }
}

pub fn build_ascent_tree(f: &ComplexPoly, seed: u64, tol: &Tolerances, threads: usize) -> Result<AscentTree> {
    let s = f.distinct();
    if s < 2 {
        return Err(Error::InvalidArgument("ascent tree needs at least two distinct roots".into()));
    }
    let critical = critical_points(f, tol)?;
    let p = critical.points.len();
    let mut results: Vec<Option<Result<Vec<PathTrace>>>> = (0..p).map(|_| None).collect();
    let threads = threads.clamp(1, p.max(1));
    let per = p.div_ceil(threads);
    std::thread::scope(|sc| {
        for (ti, slot) in results.chunks_mut(per.max(1)).enumerate() {
            let critical = &critical;
            sc.spawn(move || {
                for (k, r) in slot.iter_mut().enumerate() {
                    let j = ti * per + k;
                    *r = Some(trace_with(f, &critical.points[j], &critical.points, seed.wrapping_add(j as u64), tol));
                }
            });
        }
    });
    let traces = results.into_iter().map(|r| r.expect("filled")).collect::<Result<Vec<_>>>()?;
    let mut parent: Vec<usize> = (0..s).collect();
    fn find(p: &mut [usize], mut i: usize) -> usize {
        while p[i] != i {
            i = p[i];
        }
        i
    }
    let mut edges = Vec::new();
    for (j, tr) in traces.iter().enumerate() {
        let ends: Vec<usize> = tr.iter().map(|t| t.end_root).collect();
        for a in 0..ends.len() {
            for b in a + 1..ends.len() {
                if ends[a] == ends[b] {
                    return Err(Error::Numerical(format!("two paths from critical point {j} reach the same root")));
                }
            }
        }
        for (branch, &e) in ends.iter().enumerate().skip(1) {
            let (x, y) = (find(&mut parent, ends[0]), find(&mut parent, e));
            if x == y {
                return Err(Error::Numerical("edges form a cycle".into()));
            }
            parent[x] = y;
            edges.push(AscentEdge { a: ends[0], b: e, beta: j, branch });
        }
    }
    if edges.len() != s - 1 {
        return Err(Error::Numerical(format!("expected {} edges, found {}", s - 1, edges.len())));
    }
    Ok(AscentTree { poly: f.clone(), critical, traces, edges, seed })
}

/// Concatenated path for one edge, parametrized on `[0, 1]` with
/// `γ(1/2) = β`.
#[derive(Clone, Debug, Serialize)]
pub struct EdgePath {
    #[serde(serialize_with = "ser_samples")]
    pub samples: Vec<(f64, C)>,
    pub max_abs_f: f64,
    #[serde(serialize_with = "ser_complex")]
    pub argmax: C,
    #[serde(serialize_with = "ser_complex")]
    pub midpoint: C,
    pub arc_length: f64,
}

pub fn path_between(tree: &AscentTree, edge: usize) -> Result<EdgePath> {
    let e = tree.edges.get(edge).ok_or(Error::IndexOutOfRange { index: edge + 1, len: tree.edges.len() })?;
    let tr = &tree.traces[e.beta];
    let (first, second) = (&tr[0], &tr[e.branch]);
    let mut samples: Vec<(f64, C)> = first.samples.iter().rev().map(|(t, z)| (t / 2.0, *z)).collect();
    samples.extend(second.samples.iter().skip(1).map(|(t, z)| (1.0 - t / 2.0, *z)));
    let f = &tree.poly;
    let (mut max_abs_f, mut argmax) = (0.0, samples[0].1);
    for (_, z) in &samples {
        let v = f.eval(*z).norm();
        if v > max_abs_f {
            max_abs_f = v;
            argmax = *z;
        }
    }
    Ok(EdgePath { samples, max_abs_f, argmax, midpoint: tree.critical.points[e.beta].z, arc_length: first.arc_length + second.arc_length })
}

/// Both sides of `N^N ∏ f(β_j)^{m_j} = ∏ n_i^{n_i} ∏_{k≠i} (α_i - α_k)^{n_k}`.
#[derive(Clone, Debug, Serialize)]
pub struct SemiResultant {
    #[serde(serialize_with = "ser_complex")]
    pub left: C,
    #[serde(serialize_with = "ser_complex")]
    pub right: C,
    pub relative_deviation: f64,
}

pub fn semiresultant(f: &ComplexPoly, crit: &CriticalSet) -> SemiResultant {
    let n = f.degree() as f64;
    let mut left = C::new(n.powf(n), 0.0);
    for b in &crit.points {
        left *= f.eval(b.z).powi(b.m as i32);
    }
    let mut right = C::new(1.0, 0.0);
    for (i, (a, &ni)) in f.roots.iter().zip(&f.mult).enumerate() {
        right *= (ni as f64).powi(ni as i32);
        for (k, (b, &nk)) in f.roots.iter().zip(&f.mult).enumerate() {
            if k != i {
                right *= (a - b).powi(nk as i32);
            }
        }
    }
    SemiResultant { left, right, relative_deviation: (left - right).norm() / right.norm() }
}

/// Smallest enclosing disk `(centre, radius)`, by exhaustive search over
/// pairs and triples.
pub fn min_enclosing_disk(pts: &[C]) -> (C, f64) {
    if pts.len() == 1 {
        return (pts[0], 0.0);
    }
    let covers = |c: C, r: f64| pts.iter().all(|p| (p - c).norm() <= r * (1.0 + 1e-12) + 1e-15);
    let mut best = (pts[0], f64::INFINITY);
    for i in 0..pts.len() {
        for j in i + 1..pts.len() {
            let c = (pts[i] + pts[j]) / 2.0;
            let r = (pts[i] - c).norm();
            if r < best.1 && covers(c, r) {
                best = (c, r);
            }
            for k in j + 1..pts.len() {
                if let Some(c) = circumcentre(pts[i], pts[j], pts[k]) {
                    let r = (pts[i] - c).norm();
                    if r < best.1 && covers(c, r) {
                        best = (c, r);
                    }
                }
            }
        }
    }
    best
}

fn circumcentre(a: C, b: C, c: C) -> Option<C> {
    let (b, c) = (b - a, c - a);
    let d = 2.0 * (b.re * c.im - b.im * c.re);
    if d.abs() < 1e-300 {
        return None;
    }
    let (bb, cc) = (b.norm_sqr(), c.norm_sqr());
    Some(a + C::new((c.im * bb - b.im * cc) / d, (b.re * cc - c.re * bb) / d))
}

/// Convex hull in counter-clockwise order.
pub fn hull(points: &[C]) -> Vec<C> {
    let mut p = points.to_vec();
    p.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    p.dedup();
    if p.len() < 3 {
        return p;
    }
    let cross = |o: C, a: C, b: C| (a.re - o.re) * (b.im - o.im) - (a.im - o.im) * (b.re - o.re);
    let mut h: Vec<C> = Vec::new();
    for pass in 0..2 {
        let start = h.len();
        let iter: Box<dyn Iterator<Item = &C>> = if pass == 0 { Box::new(p.iter()) } else { Box::new(p.iter().rev()) };
        for &q in iter {
            while h.len() >= start + 2 && cross(h[h.len() - 2], h[h.len() - 1], q) <= 0.0 {
                h.pop();
            }
            h.push(q);
        }
        h.pop();
    }
    h
}

fn segment_distance(z: C, a: C, b: C) -> f64 {
    let ab = b - a;
    let l = ab.norm_sqr();
    if l == 0.0 {
        return (z - a).norm();
    }
    let t = (((z - a) * ab.conj()).re / l).clamp(0.0, 1.0);
    (z - (a + ab * t)).norm()
}

/// Signed distance to the hull boundary: positive inside, negative outside.
pub fn hull_signed_distance(h: &[C], z: C) -> f64 {
    match h.len() {
        0 => f64::NEG_INFINITY,
        1 => -(z - h[0]).norm(),
        2 => -segment_distance(z, h[0], h[1]),
        n => {
            let d = (0..n).map(|i| segment_distance(z, h[i], h[(i + 1) % n])).fold(f64::INFINITY, f64::min);
            let inside = (0..n).all(|i| {
                let (a, b) = (h[i], h[(i + 1) % n]);
                (b.re - a.re) * (z.im - a.im) - (b.im - a.im) * (z.re - a.re) >= 0.0
            });
            if inside {
                d
            } else {
                -d
            }
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct BoundsReport {
    pub radius: f64,
    pub degree: u32,
    /// Largest `L(γ) / (π R N)` over single paths.
    pub path_length_ratio: f64,
    /// Largest `L(γ̃) / (2π R N)` over edge paths.
    pub edge_length_ratio: f64,
    /// Smallest signed distance of a sample to the hull of the roots.
    pub hull_margin: f64,
    /// Largest `max|f| / |f(β)| - 1` over edge paths.
    pub max_excess: f64,
    /// Largest distance from an edge path's maximiser to its `β`, relative.
    pub argmax_offset: f64,
    /// `ln(N! ∏ |f(β_j)|^{m_j})` and the logarithm of the root-side product.
    pub product_lhs_ln: f64,
    pub product_rhs_ln: f64,
    pub semiresultant: SemiResultant,
    pub violations: Vec<String>,
}

impl BoundsReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Length, containment and maximum checks for a tree, plus the
/// semi-resultant identity and inequality.
pub fn verify_bounds(tree: &AscentTree, rel_tol: f64) -> Result<BoundsReport> {
    let f = &tree.poly;
    let r = f.radius();
    let n = f.degree();
    let pirn = std::f64::consts::PI * r * n as f64;
    let h = hull(&f.roots);
    let mut v = Vec::new();
    let mut path_ratio: f64 = 0.0;
    let mut hull_margin = f64::INFINITY;
    for (j, trs) in tree.traces.iter().enumerate() {
        for (k, t) in trs.iter().enumerate() {
            path_ratio = path_ratio.max(t.arc_length / pirn);
            for (_, z) in &t.samples {
                hull_margin = hull_margin.min(hull_signed_distance(&h, *z));
            }
            let fb = f.eval(tree.critical.points[j].z);
            let res = t.residual(f, fb);
            if res > 1e-9 {
                v.push(format!("path {j}.{k}: residual {res:e}"));
            }
        }
    }
    if path_ratio > 1.0 + rel_tol {
        v.push(format!("path length ratio {path_ratio}"));
    }
    let inflate = rel_tol * (1.0 + r);
    if hull_margin < -inflate {
        v.push(format!("hull margin {hull_margin:e}"));
    }
    let (mut edge_ratio, mut excess, mut offset): (f64, f64, f64) = (0.0, 0.0, 0.0);
    for i in 0..tree.edges.len() {
        let p = path_between(tree, i)?;
        let fb = f.eval(p.midpoint).norm();
        edge_ratio = edge_ratio.max(p.arc_length / (2.0 * pirn));
        excess = excess.max(p.max_abs_f / fb - 1.0);
        offset = offset.max((f.eval(p.argmax).norm() - fb).abs() / fb);
    }
    if edge_ratio > 1.0 + rel_tol {
        v.push(format!("edge length ratio {edge_ratio}"));
    }
    if excess > rel_tol || offset > rel_tol {
        v.push(format!("edge maximum off the critical value: excess {excess:e}, offset {offset:e}"));
    }
    let counts = tree.tag_counts();
    for (j, b) in tree.critical.points.iter().enumerate() {
        if counts[j] != b.m {
            v.push(format!("critical point {j} tags {} edges, multiplicity {}", counts[j], b.m));
        }
    }
    let sr = semiresultant(f, &tree.critical);
    let (lhs, rhs) = product_inequality(f, &tree.critical);
    if lhs > rhs + 1e-9 {
        v.push(format!("product inequality: {lhs} > {rhs}"));
    }
    Ok(BoundsReport {
        radius: r,
        degree: n,
        path_length_ratio: path_ratio,
        edge_length_ratio: edge_ratio,
        hull_margin,
        max_excess: excess,
        argmax_offset: offset,
        product_lhs_ln: lhs,
        product_rhs_ln: rhs,
        semiresultant: sr,
        violations: v,
    })
}

/// Logarithms of `N! ∏ |f(β_j)|^{m_j}` and `∏ n_i! ∏_{k≠i} |α_i - α_k|^{n_k}`,
/// with the factorials exact.
pub fn product_inequality(f: &ComplexPoly, crit: &CriticalSet) -> (f64, f64) {
    let lhs = ln_biguint(&factorial(f.degree() as u64)) + crit.points.iter().map(|b| b.m as f64 * f.eval(b.z).norm().ln()).sum::<f64>();
    let mut rhs = 0.0;
    for (i, (a, &ni)) in f.roots.iter().zip(&f.mult).enumerate() {
        rhs += ln_biguint(&factorial(ni as u64));
        for (k, (b, &nk)) in f.roots.iter().zip(&f.mult).enumerate() {
            if k != i {
                rhs += nk as f64 * (a - b).norm().ln();
            }
        }
    }
    (lhs, rhs)
}

/// Random monic polynomial with distinct roots in the unit disk at mutual
/// distance at least `min_sep`, and total degree at most `max_degree`.
pub fn random_poly(rng: &mut impl Rng, max_degree: u32, min_sep: f64, multiple: bool) -> ComplexPoly {
    let degree = rng.random_range(2..=max_degree);
    let mut roots: Vec<C> = Vec::new();
    let mut mult: Vec<u32> = Vec::new();
    let mut used = 0;
    while used < degree {
        let z = loop {
            let z = C::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
            if z.norm() <= 1.0 && roots.iter().all(|a| (a - z).norm() >= min_sep) {
                break z;
            }
        };
        let m = if multiple { rng.random_range(1..=(degree - used).min(3)) } else { 1 };
        roots.push(z);
        mult.push(m);
        used += m;
    }
    if roots.len() < 2 {
        let z = loop {
            let z = C::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
            if z.norm() <= 1.0 && (roots[0] - z).norm() >= min_sep {
                break z;
            }
        };
        mult[0] -= 1;
        roots.push(z);
        mult.push(1);
        if mult[0] == 0 {
            roots.remove(0);
            mult.remove(0);
        }
    }
    ComplexPoly::from_roots(roots, mult).expect("distinct roots")
}
