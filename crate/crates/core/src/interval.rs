//! Closed intervals with exact rational endpoints and certified enclosures of
//! `e^x` and square roots.

use std::fmt;
use std::ops::{Add, Mul, Sub};

use num_bigint::{BigInt, BigUint};
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::rational::{ceil, floor, int, to_f64, Rational};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RealInterval {
    #[serde(with = "crate::rational::serde_rational")]
    pub lo: Rational,
    #[serde(with = "crate::rational::serde_rational")]
    pub hi: Rational,
}

impl RealInterval {
    pub fn new(lo: Rational, hi: Rational) -> Self {
        assert!(lo <= hi, "interval endpoints out of order");
        RealInterval { lo, hi }
    }

    pub fn point(x: Rational) -> Self {
        RealInterval { lo: x.clone(), hi: x }
    }

    pub fn width(&self) -> Rational {
        &self.hi - &self.lo
    }

    pub fn mid(&self) -> Rational {
        (&self.lo + &self.hi) / int(2)
    }

    pub fn contains(&self, x: &Rational) -> bool {
        &self.lo <= x && x <= &self.hi
    }

    pub fn intersects(&self, other: &RealInterval) -> bool {
        self.lo <= other.hi && other.lo <= self.hi
    }

    pub fn abs(&self) -> Self {
        if !self.lo.is_negative() {
            self.clone()
        } else if !self.hi.is_positive() {
            RealInterval { lo: -&self.hi, hi: -&self.lo }
        } else {
            RealInterval { lo: Rational::zero(), hi: std::cmp::max(-&self.lo, self.hi.clone()) }
        }
    }

    pub fn max(&self, o: &RealInterval) -> Self {
        RealInterval { lo: std::cmp::max(&self.lo, &o.lo).clone(), hi: std::cmp::max(&self.hi, &o.hi).clone() }
    }

    /// Quotient by an interval of positive numbers.
    pub fn div_pos(&self, d: &RealInterval) -> Self {
        assert!(d.lo.is_positive(), "divisor interval must be positive");
        let c = [&self.lo / &d.lo, &self.lo / &d.hi, &self.hi / &d.lo, &self.hi / &d.hi];
        RealInterval { lo: c.iter().min().unwrap().clone(), hi: c.iter().max().unwrap().clone() }
    }

    /// `hi/lo - 1` for a positive interval.
    pub fn relative_width(&self) -> f64 {
        if self.lo.is_zero() {
            return f64::INFINITY;
        }
        to_f64(&(&self.width() / &self.lo)).abs()
    }

    pub fn is_positive(&self) -> bool {
        self.lo.is_positive()
    }

    /// Reciprocal of an interval that excludes zero.
    pub fn recip(&self) -> Self {
        assert!(self.lo.is_positive() || self.hi.is_negative(), "reciprocal of an interval containing zero");
        RealInterval { lo: self.hi.recip(), hi: self.lo.recip() }
    }

    pub fn scale(&self, c: &Rational) -> Self {
        let a = &self.lo * c;
        let b = &self.hi * c;
        if a <= b {
            RealInterval { lo: a, hi: b }
        } else {
            RealInterval { lo: b, hi: a }
        }
    }

    /// Outward rounding of both endpoints to multiples of `2^{-bits}`.
    pub fn round_out(&self, bits: u32) -> Self {
        let s = Rational::from_integer(BigInt::one() << bits);
        RealInterval {
            lo: Rational::from_integer(floor(&(&self.lo * &s))) / &s,
            hi: Rational::from_integer(ceil(&(&self.hi * &s))) / &s,
        }
    }

    pub fn to_f64_pair(&self) -> (f64, f64) {
        (to_f64(&self.lo), to_f64(&self.hi))
    }
}

impl fmt::Display for RealInterval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (a, b) = self.to_f64_pair();
        write!(f, "[{a:e}, {b:e}]")
    }
}

impl Add for &RealInterval {
    type Output = RealInterval;
    fn add(self, o: &RealInterval) -> RealInterval {
        RealInterval { lo: &self.lo + &o.lo, hi: &self.hi + &o.hi }
    }
}

impl Sub for &RealInterval {
    type Output = RealInterval;
    fn sub(self, o: &RealInterval) -> RealInterval {
        RealInterval { lo: &self.lo - &o.hi, hi: &self.hi - &o.lo }
    }
}

impl Mul for &RealInterval {
    type Output = RealInterval;
    fn mul(self, o: &RealInterval) -> RealInterval {
        let c = [&self.lo * &o.lo, &self.lo * &o.hi, &self.hi * &o.lo, &self.hi * &o.hi];
        let lo = c.iter().min().unwrap().clone();
        let hi = c.iter().max().unwrap().clone();
        RealInterval { lo, hi }
    }
}

// Binary splitting of Σ_{k=l}^{r-1} Π_{j=l}^{k} (num / (den·j)).
fn split(num: &BigInt, den: &BigInt, l: u64, r: u64) -> (BigInt, BigInt, BigInt) {
    if r - l == 1 {
        let q = den * BigInt::from(l);
        return (num.clone(), q, num.clone());
    }
    let m = l + (r - l) / 2;
    let (p1, q1, t1) = split(num, den, l, m);
    let (p2, q2, t2) = split(num, den, m, r);
    let t = &t1 * &q2 + &p1 * &t2;
    (p1 * p2, q1 * q2, t)
}

/// Enclosure of `e^x` of width about `2^{-bits}` relative to its size.
pub fn exp_interval(x: &Rational, bits: u32) -> RealInterval {
    if x.is_negative() {
        let mag = (to_f64(&-x) / std::f64::consts::LN_2).ceil() as u32;
        return exp_interval(&-x, bits + 2).recip().round_out(bits + mag + 2);
    }
    if x.is_zero() {
        return RealInterval::point(Rational::one());
    }
    let ax = to_f64(x);
    // Number of terms so that |x|^K/K! drops well below 2^{-bits} e^x.
    let target = (bits as f64 + 4.0) * std::f64::consts::LN_2 + ax;
    let mut k = (2.0 * ax).ceil().max(2.0) as u64;
    let mut log_term = 0.0;
    for j in 1..=k {
        log_term += (ax / j as f64).ln();
    }
    while -log_term < target {
        k += 1;
        log_term += (ax / k as f64).ln();
    }
    let (_, q, t) = split(x.numer(), x.denom(), 1, k + 1);
    let partial = Rational::one() + Rational::new(t, q);
    // Tail after the K-th term is at most 2 |x|^{K+1}/(K+1)! because K+1 ≥ 2|x|.
    let next = crate::rational::pow(x, (k + 1) as i64) / Rational::from_integer(BigInt::from(crate::rational::factorial(k + 1)));
    let tail = next * int(2);
    let hi = &partial + &tail;
    let raw = RealInterval { lo: partial, hi };
    let mag = ax / std::f64::consts::LN_2;
    raw.round_out(bits + mag.max(0.0) as u32 + 2)
}

/// Enclosure of `√x` for `x ≥ 0` with endpoints on the grid `2^{-bits}`.
pub fn sqrt_interval(x: &Rational, bits: u32) -> RealInterval {
    root_interval(x, 2, bits)
}

/// Enclosure of `x^{1/k}` for `x ≥ 0` with endpoints on the grid `2^{-bits}`.
pub fn root_interval(x: &Rational, k: u32, bits: u32) -> RealInterval {
    assert!(!x.is_negative() && k >= 1, "real root of a negative number");
    if k == 1 {
        return RealInterval::point(x.clone());
    }
    let s = BigInt::one() << (k as usize * bits as usize);
    let scaled = floor(&(x * Rational::from_integer(s)));
    let r: BigUint = num_integer::Roots::nth_root(scaled.magnitude(), k);
    let lo = Rational::new(BigInt::from(r.clone()), BigInt::one() << bits);
    let hi = Rational::new(BigInt::from(r + 1u32), BigInt::one() << bits);
    RealInterval { lo, hi }
}

/// Regular continued fraction quotients shared by every number in the
/// interval, for a positive interval.
pub fn common_cf_prefix(iv: &RealInterval, max_terms: usize) -> Vec<BigInt> {
    let mut a = iv.lo.clone();
    let mut b = iv.hi.clone();
    let mut out = Vec::new();
    while out.len() < max_terms {
        let fa = floor(&a);
        let fb = floor(&b);
        if fa != fb {
            break;
        }
        out.push(fa.clone());
        let da = &a - Rational::from_integer(fa.clone());
        let db = &b - Rational::from_integer(fb);
        if da.is_zero() || db.is_zero() {
            break;
        }
        // x -> 1/(x - floor x) reverses the order.
        let na = db.recip();
        let nb = da.recip();
        a = na;
        b = nb;
    }
    out
}
