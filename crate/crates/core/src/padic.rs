//! p-adic valuations, absolute values as rational exponents, the p-adic
//! exponential modulo `p^k`, and the ultrametric estimates on `P_n(α_i)`.

use std::cmp::Ordering;
use std::ops::Mul;

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hermite::{p_poly, AlphaSet, MultiIndex};
use crate::rational::{int, ratio, Rational};

pub fn is_prime(p: u64) -> bool {
    if p < 2 {
        return false;
    }
    let mut d = 2u64;
    while d * d <= p {
        if p % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

pub fn ensure_prime(p: u64) -> Result<()> {
    if is_prime(p) {
        Ok(())
    } else {
        Err(Error::NotPrime(p))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PAdicContext {
    pub p: u64,
    pub k: u32,
}

impl PAdicContext {
    pub fn new(p: u64, k: u32) -> Result<Self> {
        ensure_prime(p)?;
        if k == 0 {
            return Err(Error::InvalidArgument("p-adic precision must be at least 1".into()));
        }
        Ok(PAdicContext { p, k })
    }

    pub fn modulus(&self) -> BigUint {
        BigUint::from(self.p).pow(self.k)
    }
}

/// Legendre's formula `v_p(k!) = Σ_ℓ ⌊k/p^ℓ⌋`.
pub fn val_factorial(p: u64, k: u64) -> u64 {
    let mut m = 0;
    let mut q = k / p;
    while q > 0 {
        m += q;
        q /= p;
    }
    m
}

/// `v_p(n)` for a non-zero integer, `None` for zero.
pub fn val_int(p: u64, n: &BigInt) -> Option<u64> {
    if n.is_zero() {
        return None;
    }
    let p = BigInt::from(p);
    let mut v = 0;
    let mut m = n.clone();
    loop {
        let (q, r) = m.div_rem(&p);
        if !r.is_zero() {
            return Some(v);
        }
        m = q;
        v += 1;
    }
}

/// `v_p(x)`, with `None` standing for `+∞` (x = 0).
pub fn val_rational(p: u64, x: &Rational) -> Option<i64> {
    let vn = val_int(p, x.numer())? as i64;
    let vd = val_int(p, x.denom()).unwrap_or(0) as i64;
    Some(vn - vd)
}

/// A p-adic absolute value `p^{-e}` stored through its exponent `e`.
///
/// Ordering follows the size of the absolute value, so `Zero` is the least
/// element and a larger exponent means a smaller value.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum LogAbs {
    Zero,
    Pow(Rational),
}

impl LogAbs {
    pub fn one() -> Self {
        LogAbs::Pow(Rational::zero())
    }

    /// `δ = p^{-1/(p-1)}`.
    pub fn delta(p: u64) -> Self {
        LogAbs::Pow(ratio(1, p as i64 - 1))
    }

    pub fn from_exponent(e: Rational) -> Self {
        LogAbs::Pow(e)
    }

    pub fn of_rational(p: u64, x: &Rational) -> Self {
        match val_rational(p, x) {
            None => LogAbs::Zero,
            Some(v) => LogAbs::Pow(int(v)),
        }
    }

    pub fn of_factorial(p: u64, k: u64) -> Self {
        LogAbs::Pow(int(val_factorial(p, k) as i64))
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, LogAbs::Zero)
    }

    /// Exponent `e`, or `None` for the zero value.
    pub fn exponent(&self) -> Option<&Rational> {
        match self {
            LogAbs::Zero => None,
            LogAbs::Pow(e) => Some(e),
        }
    }

    pub fn powi(&self, n: i64) -> Self {
        match self {
            LogAbs::Zero if n == 0 => LogAbs::one(),
            LogAbs::Zero => {
                assert!(n > 0, "negative power of zero");
                LogAbs::Zero
            }
            LogAbs::Pow(e) => LogAbs::Pow(e * int(n)),
        }
    }

    pub fn recip(&self) -> Self {
        match self {
            LogAbs::Zero => panic!("reciprocal of zero"),
            LogAbs::Pow(e) => LogAbs::Pow(-e),
        }
    }

    /// Approximate real value, for display only.
    pub fn to_f64(&self, p: u64) -> f64 {
        match self {
            LogAbs::Zero => 0.0,
            LogAbs::Pow(e) => (p as f64).powf(-crate::rational::to_f64(e)),
        }
    }
}

impl Ord for LogAbs {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (LogAbs::Zero, LogAbs::Zero) => Ordering::Equal,
            (LogAbs::Zero, _) => Ordering::Less,
            (_, LogAbs::Zero) => Ordering::Greater,
            (LogAbs::Pow(a), LogAbs::Pow(b)) => b.cmp(a),
        }
    }
}

impl PartialOrd for LogAbs {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Mul for &LogAbs {
    type Output = LogAbs;
    fn mul(self, rhs: &LogAbs) -> LogAbs {
        match (self, rhs) {
            (LogAbs::Pow(a), LogAbs::Pow(b)) => LogAbs::Pow(a + b),
            _ => LogAbs::Zero,
        }
    }
}

impl Mul for LogAbs {
    type Output = LogAbs;
    fn mul(self, rhs: LogAbs) -> LogAbs {
        &self * &rhs
    }
}

/// Compares `p^{-e}` with `δ = p^{-1/(p-1)}`.
///
/// `Less` means the value is strictly inside the disc of convergence of the
/// exponential series.
pub fn delta_compare(p: u64, e: &Rational) -> Ordering {
    let lhs = e * int(p as i64 - 1);
    Rational::one().cmp(&lhs)
}

/// Decides `lhs ≤ scale · rhs` exactly, where `scale` is an ordinary
/// non-negative integer and both absolute values are powers of `p`.
pub fn le_scaled(p: u64, lhs: &LogAbs, scale: u64, rhs: &LogAbs) -> bool {
    let (LogAbs::Pow(le), LogAbs::Pow(re)) = (lhs, rhs) else {
        return lhs.is_zero();
    };
    if scale == 0 {
        return false;
    }
    // p^{-le} <= scale p^{-re}  <=>  p^{re-le} <= scale
    let q = re - le;
    let (a, b) = (q.numer(), q.denom());
    if !a.is_positive() {
        return true;
    }
    let a = a.to_u32().expect("exponent too large");
    let b = b.to_u32().expect("exponent denominator too large");
    BigUint::from(p).pow(a) <= BigUint::from(scale).pow(b)
}

/// Known valuation of a truncated p-adic quantity.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Valuation {
    Exact(i64),
    AtLeast(i64),
}

/// A residue modulo `p^k`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PAdicApprox {
    pub p: u64,
    pub k: u32,
    pub residue: BigUint,
    pub valuation: Valuation,
}

#[derive(Serialize, Deserialize)]
struct PAdicApproxRepr {
    p: u64,
    k: u32,
    residue: String,
}

impl Serialize for PAdicApprox {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        PAdicApproxRepr { p: self.p, k: self.k, residue: self.residue.to_string() }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for PAdicApprox {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let r = PAdicApproxRepr::deserialize(d)?;
        let residue: BigUint = r.residue.parse().map_err(serde::de::Error::custom)?;
        Ok(PAdicApprox::from_residue(r.p, r.k, residue))
    }
}

impl PAdicApprox {
    pub fn from_residue(p: u64, k: u32, residue: BigUint) -> Self {
        let modulus = BigUint::from(p).pow(k);
        let residue = residue % &modulus;
        let valuation = match val_int(p, &BigInt::from(residue.clone())) {
            None => Valuation::AtLeast(k as i64),
            Some(v) => Valuation::Exact(v as i64),
        };
        PAdicApprox { p, k, residue, valuation }
    }
}

/// Reduces a p-integral rational modulo `m = p^k`.
fn reduce_mod(x: &Rational, p: u64, m: &BigInt) -> BigInt {
    debug_assert!(val_int(p, x.denom()).unwrap_or(0) == 0);
    let den = x.denom().mod_floor(m);
    let inv = mod_inverse(&den, m).expect("denominator must be a unit");
    (x.numer().mod_floor(m) * inv).mod_floor(m)
}

fn mod_inverse(a: &BigInt, m: &BigInt) -> Option<BigInt> {
    let e = a.extended_gcd(m);
    if !e.gcd.is_one() {
        return None;
    }
    Some(e.x.mod_floor(m))
}

/// `e^α mod p^k`, summing the series until every omitted term has
/// valuation at least `k`.
pub fn padic_exp(ctx: &PAdicContext, alpha: &Rational) -> Result<PAdicApprox> {
    let p = ctx.p;
    if alpha.is_zero() {
        return Ok(PAdicApprox::from_residue(p, ctx.k, BigUint::one()));
    }
    let v = val_rational(p, alpha).expect("non-zero");
    if delta_compare(p, &int(v)) != Ordering::Less {
        return Err(Error::Divergent { p, alpha: alpha.to_string() });
    }
    // v_p(α^m/m!) >= m v - (m-1)/(p-1) = m (v - 1/(p-1)) + 1/(p-1), increasing in m.
    let gap = int(v) - ratio(1, p as i64 - 1);
    let base = ratio(1, p as i64 - 1);
    let need = int(ctx.k as i64) - base;
    let terms = crate::rational::ceil(&(need / gap)).to_u64().unwrap_or(0).max(1);
    let mut sum = Rational::zero();
    let mut term = Rational::one();
    for m in 0..terms {
        if m > 0 {
            term = term * alpha / int(m as i64);
        }
        sum += &term;
    }
    let modulus = BigInt::from(ctx.modulus());
    let r = reduce_mod(&sum, p, &modulus);
    Ok(PAdicApprox::from_residue(p, ctx.k, r.to_biguint().expect("non-negative")))
}

/// Outcome of one inequality check.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Holds,
    /// The left side is only known to be at most the working-precision
    /// bound, which does not settle the comparison.
    HoldsAtAvailablePrecision,
    Violated,
    Skipped,
}

#[derive(Clone, Debug, Serialize)]
pub struct Lemma31Report {
    pub p: u64,
    pub k: u32,
    /// `|P_n(α_i)| ≤ p² N Π max(|α_i-α_k|, δ)^{n_k}`
    pub point_bound: Verdict,
    /// `|P_n(α_i)| ≤ |n_i!|` when all `|α_i-α_k| ≤ 1`
    pub factorial_bound: Verdict,
    /// `|P_n(α_i) e^{α_j-α_i} - P_n(α_j)| ≤ (ρ/δ) p² N Π max(|α_i-α_k|, |α_j-α_k|)^{n_k}`
    pub mixed_bound: Verdict,
}

impl Lemma31Report {
    pub fn verdicts(&self) -> [&Verdict; 3] {
        [&self.point_bound, &self.factorial_bound, &self.mixed_bound]
    }

    pub fn any_violated(&self) -> bool {
        self.verdicts().iter().any(|v| **v == Verdict::Violated)
    }

    pub fn needs_precision(&self) -> bool {
        self.verdicts().iter().any(|v| **v == Verdict::HoldsAtAvailablePrecision)
    }
}

/// Checks the three ultrametric estimates for `P_n` at `α_i` (and `α_j`)
/// with the working precision of `ctx`. Indices are zero-based.
pub fn check_lemma31(
    alphas: &AlphaSet,
    n: &MultiIndex,
    i: usize,
    j: usize,
    ctx: &PAdicContext,
) -> Result<Lemma31Report> {
    let s = alphas.len();
    if n.len() != s {
        return Err(Error::LengthMismatch { expected: s, got: n.len() });
    }
    if !n.is_natural() {
        return Err(Error::InvalidArgument(format!("multi-index {n} has a negative entry")));
    }
    for idx in [i, j] {
        if idx >= s {
            return Err(Error::IndexOutOfRange { index: idx + 1, len: s });
        }
    }
    let p = ctx.p;
    let big_n = n.total() as u64;
    let delta = LogAbs::delta(p);
    let dist = |a: usize, b: usize| LogAbs::of_rational(p, &(alphas.get(a) - alphas.get(b)));
    let poly = p_poly(alphas, n)?;
    let pi = poly.eval(alphas.get(i));
    let pj = poly.eval(alphas.get(j));
    let abs_pi = LogAbs::of_rational(p, &pi);

    let bound_pt = (0..s).fold(LogAbs::one(), |acc, k| {
        acc * dist(i, k).max(delta.clone()).powi(n.entries()[k])
    });
    let point_bound = verdict(le_scaled(p, &abs_pi, p * p * big_n, &bound_pt));

    let factorial_bound = if (0..s).all(|k| dist(i, k) <= LogAbs::one()) {
        let bound = LogAbs::of_factorial(p, n.entries()[i] as u64);
        verdict(abs_pi <= bound)
    } else {
        Verdict::Skipped
    };

    let rho = dist(i, j);
    let mixed_bound = if !rho.is_zero() && rho < delta {
        let m = (0..s).fold(LogAbs::one(), |acc, k| acc * dist(i, k).max(dist(j, k)).powi(n.entries()[k]));
        let bound = &(&rho * &delta.recip()) * &m;
        let e = padic_exp(ctx, &(alphas.get(j) - alphas.get(i)))?;
        let exact = &pi * Rational::from_integer(BigInt::from_biguint(Sign::Plus, e.residue.clone())) - &pj;
        // The residue is exact up to p^k, so the left side is known modulo p^{v(P_i)+k}.
        let lhs = match val_rational(p, &pi) {
            None => Valuation::Exact(val_rational(p, &pj).unwrap_or(i64::MAX)),
            Some(vi) => {
                let limit = vi + ctx.k as i64;
                match val_rational(p, &exact) {
                    Some(w) if w < limit => Valuation::Exact(w),
                    _ => Valuation::AtLeast(limit),
                }
            }
        };
        match lhs {
            Valuation::Exact(i64::MAX) => Verdict::Holds,
            Valuation::Exact(w) => verdict(le_scaled(p, &LogAbs::Pow(int(w)), p * p * big_n, &bound)),
            Valuation::AtLeast(w) => {
                if le_scaled(p, &LogAbs::Pow(int(w)), p * p * big_n, &bound) {
                    Verdict::Holds
                } else {
                    Verdict::HoldsAtAvailablePrecision
                }
            }
        }
    } else {
        Verdict::Skipped
    };

    Ok(Lemma31Report { p, k: ctx.k, point_bound, factorial_bound, mixed_bound })
}

fn verdict(ok: bool) -> Verdict {
    if ok {
        Verdict::Holds
    } else {
        Verdict::Violated
    }
}

/// Runs [`check_lemma31`] starting at precision `k0`, doubling the precision
/// while the mixed estimate cannot be settled, up to `k_max`.
pub fn check_lemma31_auto(
    alphas: &AlphaSet,
    n: &MultiIndex,
    i: usize,
    j: usize,
    p: u64,
    k0: u32,
    k_max: u32,
) -> Result<Lemma31Report> {
    let mut k = k0.max(1);
    loop {
        let report = check_lemma31(alphas, n, i, j, &PAdicContext::new(p, k)?)?;
        if !report.needs_precision() {
            return Ok(report);
        }
        if k >= k_max {
            return Err(Error::PrecisionExhausted(format!(
                "mixed estimate for n = {n}, i = {}, j = {} undecided at p^{k}",
                i + 1,
                j + 1
            )));
        }
        k = (k * 2).min(k_max);
    }
}
