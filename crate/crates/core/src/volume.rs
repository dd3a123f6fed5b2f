//! The real component of the convex body attached to `(alphas, n)`, its
//! volume estimated by Monte Carlo, and the two volume bounds it is compared
//! against.

use num_traits::{Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::hermite::{mahler_det, p_poly, AlphaSet, MultiIndex};
use crate::interval::{exp_interval, RealInterval};
use crate::rational::{factorial, to_f64, Rational};

/// `|x_i e^{α_j-α_i} - x_j| ≤ bound`.
#[derive(Clone, Debug, Serialize)]
pub struct PairForm {
    pub i: usize,
    pub j: usize,
    pub ratio: f64,
    pub bound: f64,
    /// Certified enclosure of `bound` when it comes from the closed form.
    pub bound_interval: Option<RealInterval>,
    /// The same bound from numerical quadrature of the defining integral.
    pub bound_quadrature: Option<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct ArchBodySpec {
    pub s: usize,
    /// `|x_i| ≤ box_bounds[i]`.
    pub box_bounds: Vec<f64>,
    pub box_interval: Option<RealInterval>,
    pub forms: Vec<PairForm>,
}

impl ArchBodySpec {
    /// Box `|x_i| ≤ b_i` with no further forms.
    pub fn boxed(bounds: Vec<f64>) -> Self {
        ArchBodySpec { s: bounds.len(), box_bounds: bounds, box_interval: None, forms: Vec::new() }
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.iter().zip(&self.box_bounds).all(|(v, b)| v.abs() <= *b)
            && self.forms.iter().all(|f| (x[f.i] * f.ratio - x[f.j]).abs() <= f.bound)
    }

    fn form(&self, i: usize, j: usize) -> Option<&PairForm> {
        self.forms.iter().find(|f| f.i == i && f.j == j)
    }
}

/// `R = max |α_i - α_j|`.
pub fn radius(alphas: &AlphaSet) -> Rational {
    let v = alphas.values();
    let mut r = Rational::zero();
    for a in v {
        for b in v {
            r = std::cmp::max(r, (a - b).abs());
        }
    }
    r
}

fn f_eval(alphas: &[f64], n: &[i64], z: f64) -> f64 {
    alphas.iter().zip(n).fold(1.0, |acc, (a, &e)| acc * (z - a).powi(e as i32))
}

fn simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    if depth == 0 || (left + right - whole).abs() <= 15.0 * tol {
        return left + right + (left + right - whole) / 15.0;
    }
    simpson(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1) + simpson(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
}

/// Adaptive Simpson quadrature.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> f64 {
    let fa = f(a);
    let fb = f(b);
    let fm = f(0.5 * (a + b));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    simpson(&f, a, b, fa, fm, fb, whole, tol, 40)
}

/// The real component: `|x_i| ≤ e^R (N-1)!` and, for `i ≠ j`,
/// `|x_i e^{α_j-α_i} - x_j| ≤ max_k |∫_{α_i}^{α_j} f_{n-e_k}(z) e^{α_j-z} dz|`.
///
/// Each integral equals `P_{n-e_k}(α_i) e^{α_j-α_i} - P_{n-e_k}(α_j)`, which is
/// evaluated with certified intervals; quadrature is kept as a cross-check.
pub fn archimedean_body(alphas: &AlphaSet, n: &MultiIndex, bits: u32) -> Result<ArchBodySpec> {
    n.check_len(alphas)?;
    n.check_positive()?;
    let s = alphas.len();
    let total = n.total() as u64;
    let r = radius(alphas);
    let box_iv = exp_interval(&r, bits).scale(&Rational::from_integer(factorial(total - 1).into()));
    let af: Vec<f64> = alphas.values().iter().map(to_f64).collect();
    let shifted: Vec<MultiIndex> = (0..s).map(|k| n.shifted(k, -1)).collect();
    let polys = shifted.iter().map(|m| p_poly(alphas, m)).collect::<Result<Vec<_>>>()?;
    let mut forms = Vec::new();
    for i in 0..s {
        for j in (0..s).filter(|&j| j != i) {
            let d = alphas.get(j) - alphas.get(i);
            let e = exp_interval(&d, bits);
            let mut best: Option<RealInterval> = None;
            let mut quad: f64 = 0.0;
            for (k, p) in polys.iter().enumerate() {
                let v = &e.scale(&p.eval(alphas.get(i))) - &RealInterval::point(p.eval(alphas.get(j)));
                let v = v.abs();
                let scale = to_f64(&v.hi).max(1e-300);
                best = Some(match best {
                    None => v,
                    Some(b) => b.max(&v),
                });
                let m = shifted[k].entries().to_vec();
                let (ai, aj) = (af[i], af[j]);
                let q = integrate(|z| f_eval(&af, &m, z) * (aj - z).exp(), ai, aj, 1e-13 * scale).abs();
                quad = quad.max(q);
            }
            let b = best.expect("s ≥ 1");
            forms.push(PairForm { i, j, ratio: to_f64(&d).exp(), bound: to_f64(&b.hi), bound_interval: Some(b), bound_quadrature: Some(quad) });
        }
    }
    let bx = to_f64(&box_iv.hi);
    Ok(ArchBodySpec { s, box_bounds: vec![bx; s], box_interval: Some(box_iv), forms })
}

#[derive(Clone, Debug, Serialize)]
pub struct McEstimate {
    pub estimate: f64,
    pub stderr: f64,
    pub samples: u64,
    pub hits: u64,
    pub seed: u64,
    pub chunks: u64,
}

impl McEstimate {
    /// `[estimate - kσ, estimate + kσ]`.
    pub fn confidence(&self, k: f64) -> (f64, f64) {
        (self.estimate - k * self.stderr, self.estimate + k * self.stderr)
    }
}

const CHUNKS: u64 = 64;

/// Thread count from `HERMITE_THREADS`, default 1.
pub fn thread_count() -> usize {
    std::env::var("HERMITE_THREADS").ok().and_then(|v| v.parse().ok()).filter(|&t| t >= 1).unwrap_or(1)
}

// Sampling plan: one anchor coordinate drawn uniformly on its feasible range;
// each other coordinate drawn on the slab cut out by its form with the anchor,
// intersected with its box. The weight is the product of the range lengths.
struct Plan {
    anchor: usize,
    anchor_half: f64,
}

fn plan(spec: &ArchBodySpec) -> Plan {
    let s = spec.s;
    let mut best = (f64::INFINITY, 0usize, 0.0);
    for a in 0..s {
        let mut half = spec.box_bounds[a];
        for f in spec.forms.iter().filter(|f| f.i == a) {
            half = half.min((spec.box_bounds[f.j] + f.bound) / f.ratio.abs());
        }
        let mut vol = 2.0 * half;
        for j in (0..s).filter(|&j| j != a) {
            let w = spec.form(a, j).map_or(2.0 * spec.box_bounds[j], |f| (2.0 * f.bound).min(2.0 * spec.box_bounds[j]));
            vol *= w;
        }
        if vol < best.0 {
            best = (vol, a, half);
        }
    }
    Plan { anchor: best.1, anchor_half: best.2 }
}

fn run_chunk(spec: &ArchBodySpec, pl: &Plan, seed: u64, chunk: u64, count: u64) -> (f64, f64, u64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(chunk);
    let s = spec.s;
    let mut x = vec![0.0; s];
    let (mut sum, mut sum2, mut hits) = (0.0, 0.0, 0u64);
    for _ in 0..count {
        let a = pl.anchor;
        x[a] = pl.anchor_half * (2.0 * rng.random::<f64>() - 1.0);
        let mut w = 2.0 * pl.anchor_half;
        for j in (0..s).filter(|&j| j != a) {
            let b = spec.box_bounds[j];
            let (lo, hi) = match spec.form(a, j) {
                Some(f) => {
                    let c = x[a] * f.ratio;
                    ((c - f.bound).max(-b), (c + f.bound).min(b))
                }
                None => (-b, b),
            };
            if hi <= lo {
                w = 0.0;
                break;
            }
            x[j] = lo + (hi - lo) * rng.random::<f64>();
            w *= hi - lo;
        }
        if w > 0.0 && spec.contains(&x) {
            sum += w;
            sum2 += w * w;
            hits += 1;
        }
    }
    (sum, sum2, hits)
}

/// Monte-Carlo volume estimate. The sample count is split into a fixed number
/// of chunks with their own generator streams, so the result does not depend
/// on the number of threads.
pub fn mc_volume(spec: &ArchBodySpec, samples: u64, seed: u64, threads: usize) -> Result<McEstimate> {
    if samples == 0 {
        return Err(Error::InvalidArgument("sample count must be positive".into()));
    }
    if spec.box_bounds.iter().any(|b| !(*b > 0.0)) || spec.forms.iter().any(|f| !(f.bound > 0.0)) {
        return Err(Error::InvalidArgument("degenerate body: every bound must be positive".into()));
    }
    let pl = plan(spec);
    let counts: Vec<u64> = (0..CHUNKS).map(|c| samples / CHUNKS + u64::from(c < samples % CHUNKS)).collect();
    let mut results = vec![(0.0, 0.0, 0u64); CHUNKS as usize];
    let threads = threads.clamp(1, CHUNKS as usize);
    std::thread::scope(|sc| {
        for (t, slot) in results.chunks_mut(CHUNKS as usize / threads + usize::from(CHUNKS as usize % threads != 0)).enumerate() {
            let per = CHUNKS as usize / threads + usize::from(CHUNKS as usize % threads != 0);
            let pl = &pl;
            let counts = &counts;
            sc.spawn(move || {
                for (k, r) in slot.iter_mut().enumerate() {
                    let c = (t * per + k) as u64;
                    *r = run_chunk(spec, pl, seed, c, counts[c as usize]);
                }
            });
        }
    });
    let (mut sum, mut sum2, mut hits) = (0.0, 0.0, 0u64);
    for (a, b, h) in results {
        sum += a;
        sum2 += b;
        hits += h;
    }
    let nf = samples as f64;
    let mean = sum / nf;
    let var = (sum2 / nf - mean * mean).max(0.0);
    Ok(McEstimate { estimate: mean, stderr: (var / nf).sqrt(), samples, hits, seed, chunks: CHUNKS })
}

#[derive(Clone, Debug, Serialize)]
pub struct VolumeSandwich {
    #[serde(with = "crate::rational::serde_rational")]
    pub delta: Rational,
    /// `|Δ_n|/s!`.
    pub lower: f64,
    /// `c_v N^{2s-2} |Δ_n|`.
    pub upper: f64,
    /// `c_v = 2^s e^{sR} (2π R^s)^{s-1} |Δ_1|^{-1}`.
    pub c_v: f64,
}

pub fn volume_sandwich(alphas: &AlphaSet, n: &MultiIndex) -> Result<VolumeSandwich> {
    let s = alphas.len();
    let delta = mahler_det(alphas, n)?;
    let delta1 = mahler_det(alphas, &MultiIndex::new(vec![1; s]))?;
    let r = to_f64(&radius(alphas));
    let sf = s as f64;
    let c_v = 2f64.powi(s as i32) * (sf * r).exp() * (2.0 * std::f64::consts::PI * r.powi(s as i32)).powi(s as i32 - 1)
        / to_f64(&delta1.abs());
    let d = to_f64(&delta.abs());
    let fact: f64 = (1..=s).map(|k| k as f64).product();
    let big_n = n.total() as f64;
    Ok(VolumeSandwich { delta, lower: d / fact, upper: c_v * big_n.powi(2 * s as i32 - 2) * d, c_v })
}

#[derive(Clone, Debug, Serialize)]
pub struct VolumeReport {
    pub sandwich: VolumeSandwich,
    pub estimate: McEstimate,
    /// The 3σ interval of the estimate meets `[lower, upper]`.
    pub consistent: bool,
    /// Largest relative gap between closed-form and quadrature form bounds.
    pub quadrature_gap: f64,
}

pub fn volume_check(alphas: &AlphaSet, n: &MultiIndex, samples: u64, seed: u64, threads: usize) -> Result<VolumeReport> {
    if !(2..=3).contains(&alphas.len()) {
        return Err(Error::InvalidArgument("volume estimates support s = 2 or 3".into()));
    }
    let spec = archimedean_body(alphas, n, 128)?;
    let sandwich = volume_sandwich(alphas, n)?;
    let estimate = mc_volume(&spec, samples, seed, threads)?;
    let (lo, hi) = estimate.confidence(3.0);
    let consistent = hi >= sandwich.lower && lo <= sandwich.upper;
    let quadrature_gap = spec
        .forms
        .iter()
        .filter_map(|f| f.bound_quadrature.map(|q| ((q - f.bound) / f.bound).abs()))
        .fold(0.0, f64::max);
    Ok(VolumeReport { sandwich, estimate, consistent, quadrature_gap })
}

// Kept for callers that want the exact value of the box bound.
pub fn box_bound(alphas: &AlphaSet, n: &MultiIndex, bits: u32) -> Result<RealInterval> {
    n.check_positive()?;
    let total = n.total() as u64;
    Ok(exp_interval(&radius(alphas), bits).scale(&Rational::from_integer(factorial(total - 1).into())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::int;

    fn pts(v: &[i64]) -> AlphaSet {
        AlphaSet::from_ints(v).unwrap()
    }

    #[test]
    fn body_examples() {
        let spec = archimedean_body(&pts(&[0, 3]), &MultiIndex::new(vec![1, 1]), 100).unwrap();
        let e3 = 3f64.exp();
        let f = spec.forms.iter().find(|f| f.i == 0 && f.j == 1).unwrap();
        assert!((f.bound - (2.0 * e3 + 1.0)).abs() < 1e-12);
        assert!((f.bound_quadrature.unwrap() - f.bound).abs() < 1e-9 * f.bound);
        assert!((spec.box_bounds[0] - e3).abs() < 1e-12);
        // The competing index gives e^3 - 4.
        let alt = integrate(|z| z * (3.0 - z).exp(), 0.0, 3.0, 1e-12);
        assert!((alt - (e3 - 4.0)).abs() < 1e-9);
        assert!(alt < f.bound);
    }

    #[test]
    fn unit_square() {
        let est = mc_volume(&ArchBodySpec::boxed(vec![1.0, 1.0]), 10_000, 1, 1).unwrap();
        assert_eq!(est.estimate, 4.0);
        assert!(mc_volume(&ArchBodySpec::boxed(vec![1.0, 0.0]), 10, 1, 1).is_err());
    }

    fn triangle_spec() -> ArchBodySpec {
        let form = |i, j| PairForm { i, j, ratio: 1.0, bound: 1.0, bound_interval: None, bound_quadrature: None };
        ArchBodySpec { s: 3, box_bounds: vec![1.0; 3], box_interval: None, forms: vec![form(0, 1), form(1, 2)] }
    }

    #[test]
    fn known_volume_and_rate() {
        let spec = triangle_spec();
        let small = mc_volume(&spec, 10_000, 7, 1).unwrap();
        let large = mc_volume(&spec, 1_000_000, 7, 1).unwrap();
        let exact = 14.0 / 3.0;
        assert!((large.estimate - exact).abs() <= 4.0 * large.stderr);
        let rate = small.stderr / large.stderr;
        assert!((7.0..13.0).contains(&rate), "rate {rate}");
    }

    #[test]
    fn threads_do_not_change_result() {
        let spec = triangle_spec();
        let a = mc_volume(&spec, 100_003, 11, 1).unwrap();
        let b = mc_volume(&spec, 100_003, 11, 5).unwrap();
        assert_eq!(a.estimate.to_bits(), b.estimate.to_bits());
        assert_eq!(a.hits, b.hits);
    }

    #[test]
    fn sandwich_examples() {
        let r = volume_check(&pts(&[0, 3]), &MultiIndex::new(vec![2, 2]), 200_000, 42, 1).unwrap();
        assert_eq!(r.sandwich.delta, int(81));
        assert!(r.consistent, "{r:?}");
        assert!(r.quadrature_gap < 1e-8);
        let r = volume_check(&pts(&[0, 1, 3]), &MultiIndex::new(vec![2, 2, 2]), 200_000, 42, 1).unwrap();
        assert!(r.consistent, "{r:?}");
        assert!(volume_check(&pts(&[0]), &MultiIndex::new(vec![2]), 10, 1, 1).is_err());
    }

    #[test]
    fn radius_is_max_distance() {
        assert_eq!(radius(&pts(&[0, 1, 3])), int(3));
        assert!(radius(&pts(&[5])).is_zero());
    }
}
