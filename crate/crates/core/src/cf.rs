//! Continued fraction of `e^α` for rational `α > 0`, streamed from products
//! of the 2×2 Hermite step matrices by peeling the partial quotients shared
//! by both row ratios of a reduced matrix.

use std::collections::VecDeque;
use std::fmt;
use std::ops::Mul;

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::interval::exp_interval;
use crate::rational::{floor, Rational};

/// `((t, u), (tp, up))`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Mat2Z {
    pub t: BigInt,
    pub u: BigInt,
    pub tp: BigInt,
    pub up: BigInt,
}

impl Mat2Z {
    pub fn new(t: BigInt, u: BigInt, tp: BigInt, up: BigInt) -> Self {
        Mat2Z { t, u, tp, up }
    }

    pub fn from_i64(t: i64, u: i64, tp: i64, up: i64) -> Self {
        Mat2Z::new(t.into(), u.into(), tp.into(), up.into())
    }

    pub fn identity() -> Self {
        Mat2Z::from_i64(1, 0, 0, 1)
    }

    /// `((0, 1), (1, a))`.
    pub fn quotient(a: &BigUint) -> Self {
        Mat2Z::new(BigInt::zero(), BigInt::one(), BigInt::one(), BigInt::from(a.clone()))
    }

    pub fn det(&self) -> BigInt {
        &self.t * &self.up - &self.u * &self.tp
    }

    /// Membership in `M`: `0 ≤ t < u`, `0 ≤ t' < u'` and `tu' ≠ t'u`.
    pub fn in_m(&self) -> bool {
        !self.t.is_negative() && self.t < self.u && !self.tp.is_negative() && self.tp < self.up && !self.det().is_zero()
    }

    /// Gcd of the four entries.
    pub fn content(&self) -> BigInt {
        let mut es = [&self.t, &self.u, &self.tp, &self.up];
        es.sort_by_key(|e| e.bits());
        let mut g = BigInt::zero();
        for e in es {
            g = g.gcd(e);
            if g.is_one() {
                break;
            }
        }
        g
    }

    pub fn div_exact(&self, c: &BigInt) -> Self {
        let d = |x: &BigInt| {
            let (q, r) = x.div_rem(c);
            assert!(r.is_zero(), "content division left a remainder");
            q
        };
        Mat2Z::new(d(&self.t), d(&self.u), d(&self.tp), d(&self.up))
    }

    pub fn max_bits(&self) -> u64 {
        [&self.t, &self.u, &self.tp, &self.up].iter().map(|e| e.bits()).max().unwrap_or(0)
    }
}

impl Mul for &Mat2Z {
    type Output = Mat2Z;
    fn mul(self, o: &Mat2Z) -> Mat2Z {
        Mat2Z::new(
            &self.t * &o.t + &self.u * &o.tp,
            &self.t * &o.u + &self.u * &o.up,
            &self.tp * &o.t + &self.up * &o.tp,
            &self.tp * &o.u + &self.up * &o.up,
        )
    }
}

impl fmt::Display for Mat2Z {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(({},{}),({},{}))", self.t, self.u, self.tp, self.up)
    }
}

fn positive_split(alpha: &Rational) -> Result<(BigInt, BigInt)> {
    if !alpha.is_positive() {
        return Err(Error::InvalidArgument(format!("alpha must be positive, got {alpha}")));
    }
    Ok((alpha.numer().clone(), alpha.denom().clone()))
}

/// `b·C_i` for `α = a/b`.
pub fn c_matrix(i: u64, alpha: &Rational) -> Result<Mat2Z> {
    if i == 0 {
        return Err(Error::IndexTooSmall { index: 0, value: 0, min: 1 });
    }
    let (a, b) = positive_split(alpha)?;
    let m = &b * BigInt::from(2 * i - 1);
    Ok(Mat2Z::new(&m - &a, m.clone(), m.clone(), &m + &a))
}

pub fn is_reduced(m: &Mat2Z) -> Result<bool> {
    if !m.in_m() {
        return Err(Error::NotInM(m.to_string()));
    }
    Ok(m.t.is_zero() || m.tp.is_zero() || (&m.u / &m.t) != (&m.up / &m.tp))
}

/// Writes `m = R·Q(a_k)⋯Q(a_1)` with `R` reduced and `Q(a) = ((0,1),(1,a))`,
/// returning `R` and `[a_1, …, a_k]`.
pub fn extract_quotients(m: &Mat2Z) -> Result<(Mat2Z, Vec<BigUint>)> {
    if !m.in_m() {
        return Err(Error::NotInM(m.to_string()));
    }
    let mut r = m.clone();
    let mut out = Vec::new();
    // Each peel at least halves the smaller row's first entry, so this bounds the loop.
    let guard = 2 * r.max_bits() as usize + 4;
    while !is_reduced(&r)? {
        if out.len() > guard {
            return Err(Error::Numerical("quotient extraction did not terminate".into()));
        }
        let a = &r.u / &r.t;
        let nu = (&r.t, &r.u - &a * &r.t);
        let nup = (&r.tp, &r.up - &a * &r.tp);
        r = Mat2Z::new(nu.1, nu.0.clone(), nup.1, nup.0.clone());
        out.push(a.to_biguint().expect("quotient of positive entries"));
    }
    Ok((r, out))
}

/// Running state of the quotient stream.
#[derive(Clone, Debug)]
pub struct CfState {
    alpha: Rational,
    /// Current reduced matrix `R_n`.
    pub r: Mat2Z,
    /// Number of step matrices multiplied so far.
    pub n: u64,
    /// Quotients produced so far, `k(n)`.
    pub emitted: u64,
    /// `ln q_{emitted-2}`, the denominator before the most recent quotient.
    log_q_prev: f64,
    /// `q_{emitted-2}/q_{emitted-1}` in floating point.
    ratio: f64,
    /// `ln q_{emitted-1}`.
    log_q: f64,
    pub pending: VecDeque<BigUint>,
}

impl CfState {
    /// Multiplies `C_1, C_2, …` until the product lies in `M` and every later
    /// step matrix does as well, then peels the quotients available so far.
    pub fn new(alpha: &Rational) -> Result<Self> {
        let (a, b) = positive_split(alpha)?;
        let mut acc = Mat2Z::identity();
        let mut n = 0u64;
        // C_i ∈ M exactly when b(2i-1) ≥ a.
        let two_b = BigInt::from(2) * &b;
        let first_in_m = ((&a + &b + &two_b - 1u32) / &two_b).to_u64().unwrap_or(u64::MAX);
        loop {
            n += 1;
            acc = &c_matrix(n, alpha)? * &acc;
            let c = acc.content();
            acc = acc.div_exact(&c);
            if n >= first_in_m && acc.in_m() {
                break;
            }
            if n > first_in_m + 10_000 {
                return Err(Error::Numerical("no product of step matrices entered M".into()));
            }
        }
        let mut st = CfState {
            alpha: alpha.clone(),
            r: acc.clone(),
            n,
            emitted: 0,
            log_q_prev: f64::NEG_INFINITY,
            ratio: 0.0,
            log_q: f64::NEG_INFINITY,
            pending: VecDeque::new(),
        };
        st.absorb(&acc)?;
        Ok(st)
    }

    pub fn alpha(&self) -> &Rational {
        &self.alpha
    }

    fn absorb(&mut self, m: &Mat2Z) -> Result<()> {
        let (r, qs) = extract_quotients(m)?;
        self.r = r;
        for a in qs {
            self.record(&a);
            self.pending.push_back(a);
        }
        Ok(())
    }

    // Convergent denominators of e^α = [a_0; a_1, …]: q_0 = 1 and
    // q_k = a_k q_{k-1} + q_{k-2}.
    fn record(&mut self, a: &BigUint) {
        let k = self.emitted;
        self.emitted += 1;
        if k == 0 {
            self.log_q = 0.0;
            self.ratio = 0.0;
            return;
        }
        let af = a.to_f64().unwrap_or(f64::INFINITY);
        let grow = af + self.ratio;
        self.log_q_prev = self.log_q;
        self.log_q += grow.ln();
        self.ratio = 1.0 / grow;
    }

    /// `C_{n+1} R_n`, content removed, quotients peeled.
    pub fn step(&mut self) -> Result<()> {
        self.n += 1;
        let m = &c_matrix(self.n, &self.alpha)? * &self.r;
        let c = m.content();
        let m = m.div_exact(&c);
        self.absorb(&m)
    }

    /// `ln q_{emitted-1}`.
    pub fn log_q(&self) -> f64 {
        self.log_q
    }
}

/// One term of the expansion `e^α = [a_0; a_1, …]`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Quotient {
    pub index: u64,
    #[serde(serialize_with = "ser_big")]
    pub value: BigUint,
    /// `ln q_{index-1}`; absent for `a_0`.
    pub log_q_prev: Option<f64>,
}

fn ser_big<S: serde::Serializer>(v: &BigUint, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&v.to_string())
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Limit {
    Count(u64),
    /// Stop before the first index `n` with `ln q_{n-1}` above the bound.
    LogQ(f64),
}

/// Iterator over the partial quotients of `e^α`.
pub struct CfStream {
    state: CfState,
    limit: Limit,
    next_index: u64,
    // ln q_{k-1} for the next quotient index k.
    prev_log: Option<f64>,
    log_q_cur: f64,
    ratio: f64,
    done: bool,
}

pub fn stream_cf(alpha: &Rational, limit: Limit) -> Result<CfStream> {
    Ok(CfStream {
        state: CfState::new(alpha)?,
        limit,
        next_index: 0,
        prev_log: None,
        log_q_cur: 0.0,
        ratio: 0.0,
        done: false,
    })
}

impl CfStream {
    pub fn state(&self) -> &CfState {
        &self.state
    }

    fn next_quotient(&mut self) -> Result<BigUint> {
        loop {
            if let Some(a) = self.state.pending.pop_front() {
                return Ok(a);
            }
            self.state.step()?;
        }
    }
}

impl Iterator for CfStream {
    type Item = Result<Quotient>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.done {
            return None;
        }
        let index = self.next_index;
        match self.limit {
            Limit::Count(c) if index >= c => return None,
            Limit::LogQ(b) if self.prev_log.is_some_and(|l| l > b) => return None,
            _ => {}
        }
        let value = match self.next_quotient() {
            Ok(v) => v,
            Err(e) => {
                self.done = true;
                return Some(Err(e));
            }
        };
        let log_q_prev = self.prev_log;
        // Advance ln q to index `index`.
        if index == 0 {
            self.log_q_cur = 0.0;
            self.ratio = 0.0;
        } else {
            let grow = value.to_f64().unwrap_or(f64::INFINITY) + self.ratio;
            self.log_q_cur += grow.ln();
            self.ratio = 1.0 / grow;
        }
        self.prev_log = Some(self.log_q_cur);
        self.next_index += 1;
        Some(Ok(Quotient { index, value, log_q_prev }))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RecordRow {
    pub n: u64,
    #[serde(serialize_with = "ser_big")]
    pub a_n: BigUint,
    /// `ln q_{n-1}` truncated to one decimal.
    pub log_q_prev: f64,
    /// Untruncated `ln q_{n-1}`.
    pub log_q_prev_raw: f64,
}

pub fn truncate1(x: f64) -> f64 {
    (x * 10.0).floor() / 10.0
}

/// Indices `n ≥ 1` with `ln q_{n-1} ≤ qmax_log` where `a_n` is a new strict
/// maximum of `a_1, …, a_n`.
pub fn record_scan(alpha: &Rational, qmax_log: f64) -> Result<Vec<RecordRow>> {
    if !(qmax_log > 0.0) {
        return Err(Error::InvalidArgument("log bound must be positive".into()));
    }
    let mut rows = Vec::new();
    let mut best = BigUint::zero();
    for q in stream_cf(alpha, Limit::LogQ(qmax_log))? {
        let q = q?;
        let Some(lq) = q.log_q_prev else { continue };
        if q.value > best {
            best = q.value.clone();
            rows.push(RecordRow { n: q.index, a_n: q.value, log_q_prev: truncate1(lq), log_q_prev_raw: lq });
        }
    }
    Ok(rows)
}

/// `ψ(x) = 3 ln x · ln ln x` as a function of `ln x`.
pub fn psi_from_log(log_x: f64) -> f64 {
    3.0 * log_x * log_x.ln()
}

#[derive(Clone, Debug, Serialize)]
pub struct MeasureCheck {
    pub n: u64,
    #[serde(serialize_with = "ser_big")]
    pub a_n: BigUint,
    pub log_q_prev: f64,
    /// `ψ(q_{n-1}) / (a_n + 2)`.
    pub ratio: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct DirectCheck {
    pub x: u64,
    /// `x·‖x e^α‖·ψ(x)` from a certified enclosure of `e^α` (lower end).
    pub value: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct MeasureReport {
    /// Number of indices `n ≥ 2` checked.
    pub checked: u64,
    pub min_ratio_large: Option<f64>,
    pub records: Vec<MeasureCheck>,
    pub small: Vec<MeasureCheck>,
    pub direct: Vec<DirectCheck>,
    pub violations: Vec<String>,
}

impl MeasureReport {
    pub fn all_passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks `ψ(q_{n-1})/(a_n+2) ≥ 1` for every `n ≥ 2` with
/// `ln q_{n-1} ≤ qmax_log`, and `x‖x e^α‖ψ(x) ≥ 1` directly for `4 ≤ x ≤ 10`.
pub fn verify_measure(alpha: &Rational, qmax_log: f64) -> Result<MeasureReport> {
    if !(qmax_log > 10_000f64.ln()) {
        return Err(Error::InvalidArgument("log bound must exceed ln 10^4".into()));
    }
    let mut report = MeasureReport {
        checked: 0,
        min_ratio_large: None,
        records: Vec::new(),
        small: Vec::new(),
        direct: Vec::new(),
        violations: Vec::new(),
    };
    let mut best = BigUint::zero();
    for q in stream_cf(alpha, Limit::LogQ(qmax_log))? {
        let q = q?;
        let Some(lq) = q.log_q_prev else { continue };
        let is_record = q.value > best;
        if is_record {
            best = q.value.clone();
        }
        if q.index < 2 {
            continue;
        }
        let ratio = psi_from_log(lq) / (q.value.to_f64().unwrap_or(f64::INFINITY) + 2.0);
        let check = MeasureCheck { n: q.index, a_n: q.value, log_q_prev: lq, ratio };
        report.checked += 1;
        if !(ratio >= 1.0) {
            report.violations.push(format!("n = {}: ratio {ratio}", check.n));
        }
        if check.n < 10 {
            report.small.push(check);
        } else {
            report.min_ratio_large = Some(report.min_ratio_large.map_or(ratio, |m: f64| m.min(ratio)));
            if is_record {
                report.records.push(check);
            }
        }
    }
    let e = exp_interval(alpha, 128);
    for x in 4u64..=10 {
        let xi = Rational::from_integer(BigInt::from(x));
        let scaled = e.scale(&xi);
        let fl = floor(&scaled.lo);
        if fl != floor(&scaled.hi) {
            report.violations.push(format!("x = {x}: enclosure too wide"));
            continue;
        }
        let frac_lo = &scaled.lo - Rational::from_integer(fl.clone());
        let frac_hi = &scaled.hi - Rational::from_integer(fl);
        // Distance to the nearest integer, lower bound.
        let one = Rational::one();
        let d = std::cmp::min(frac_lo, &one - &frac_hi);
        let lx = (x as f64).ln();
        let value = x as f64 * crate::rational::to_f64(&d) * psi_from_log(lx);
        if !(value >= 1.0) {
            report.violations.push(format!("x = {x}: value {value}"));
        }
        report.direct.push(DirectCheck { x, value });
    }
    Ok(report)
}

/// Exact convergent denominators `q_0, …, q_{len-1}` of `[a_0; a_1, …]`.
pub fn convergent_denominators(quotients: &[BigUint]) -> Vec<BigInt> {
    let mut out = Vec::with_capacity(quotients.len());
    let (mut q2, mut q1) = (BigInt::zero(), BigInt::one());
    for (k, a) in quotients.iter().enumerate() {
        if k == 0 {
            out.push(BigInt::one());
            continue;
        }
        let q = BigInt::from_biguint(Sign::Plus, a.clone()) * &q1 + &q2;
        q2 = q1;
        q1 = q.clone();
        out.push(q);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::interval::common_cf_prefix;
    use crate::rational::{int, ratio};

    fn prefix(alpha: &Rational, count: u64) -> Vec<u64> {
        stream_cf(alpha, Limit::Count(count))
            .unwrap()
            .map(|q| q.unwrap().value.to_u64().unwrap())
            .collect()
    }

    #[test]
    fn c_matrix_examples() {
        assert_eq!(c_matrix(1, &int(3)).unwrap(), Mat2Z::from_i64(-2, 1, 1, 4));
        assert_eq!(c_matrix(2, &int(3)).unwrap(), Mat2Z::from_i64(0, 3, 3, 6));
        assert_eq!(c_matrix(1, &ratio(1, 2)).unwrap(), Mat2Z::from_i64(1, 2, 2, 3));
        assert!(c_matrix(1, &int(0)).is_err());
        assert!(c_matrix(1, &int(-1)).is_err());
    }

    #[test]
    fn reduced_examples() {
        assert!(is_reduced(&Mat2Z::from_i64(0, 1, 1, 4)).unwrap());
        assert!(is_reduced(&Mat2Z::from_i64(3, 12, 0, 27)).unwrap());
        assert!(!is_reduced(&Mat2Z::from_i64(2, 5, 3, 7)).unwrap());
        assert!(is_reduced(&Mat2Z::from_i64(-2, 1, 1, 4)).is_err());
    }

    #[test]
    fn extraction_examples() {
        let (r, q) = extract_quotients(&Mat2Z::from_i64(2, 5, 3, 7)).unwrap();
        assert_eq!(r, Mat2Z::from_i64(1, 2, 1, 3));
        assert_eq!(q, vec![BigUint::from(2u32)]);
        let m = Mat2Z::from_i64(3, 12, 0, 27);
        assert_eq!(extract_quotients(&m).unwrap(), (m.clone(), vec![]));
        let m = Mat2Z::from_i64(0, 1, 1, 4);
        assert_eq!(extract_quotients(&m).unwrap(), (m.clone(), vec![]));
    }

    #[test]
    fn start_state_for_three() {
        let st = CfState::new(&int(3)).unwrap();
        assert_eq!(st.n, 2);
        // A_2 = ((3,12),(0,27)) with its content 3 removed.
        assert_eq!(st.r, Mat2Z::from_i64(1, 4, 0, 9));
        assert_eq!(st.pending, VecDeque::new());
    }

    #[test]
    fn known_prefixes() {
        assert_eq!(prefix(&int(3), 11), vec![20, 11, 1, 2, 4, 3, 1, 5, 1, 2, 16]);
        assert_eq!(prefix(&int(1), 10), vec![2, 1, 2, 1, 1, 4, 1, 1, 6, 1]);
    }

    #[test]
    fn matches_interval_expansion() {
        for alpha in [int(2), ratio(1, 2), ratio(7, 3), int(5)] {
            let oracle = common_cf_prefix(&exp_interval(&alpha, 600), 60);
            let got = prefix(&alpha, oracle.len() as u64);
            let want: Vec<u64> = oracle.iter().map(|v| v.to_u64().unwrap()).collect();
            assert!(want.len() > 30, "oracle too short for {alpha}");
            assert_eq!(got, want, "alpha = {alpha}");
        }
    }

    #[test]
    fn reconstruction_first_steps() {
        let alpha = int(3);
        let mut st = CfState::new(&alpha).unwrap();
        let mut full = Mat2Z::identity();
        for i in 1..=st.n {
            full = &c_matrix(i, &alpha).unwrap() * &full;
        }
        let mut quotients: Vec<BigUint> = st.pending.iter().cloned().collect();
        for _ in 0..200 {
            st.step().unwrap();
            full = &c_matrix(st.n, &alpha).unwrap() * &full;
            quotients.extend(st.pending.drain(..));
            assert!(st.r.in_m());
            let mut rebuilt = st.r.clone();
            for a in quotients.iter().rev() {
                rebuilt = &rebuilt * &Mat2Z::quotient(a);
            }
            // rebuilt is full divided by the accumulated content.
            let c = full.content();
            let rc = rebuilt.content();
            assert_eq!(full.div_exact(&c), rebuilt.div_exact(&rc));
        }
    }

    #[test]
    fn batching_does_not_change_quotients() {
        let alpha = int(3);
        let mut single = CfState::new(&alpha).unwrap();
        let mut batched = CfState::new(&alpha).unwrap();
        let mut a: Vec<BigUint> = single.pending.drain(..).collect();
        let mut b: Vec<BigUint> = batched.pending.drain(..).collect();
        for _ in 0..60 {
            single.step().unwrap();
            a.extend(single.pending.drain(..));
        }
        for _ in 0..20 {
            let n = batched.n;
            let mut m = batched.r.clone();
            for i in 1..=3 {
                m = &c_matrix(n + i, &alpha).unwrap() * &m;
            }
            batched.n += 3;
            let (r, qs) = extract_quotients(&m).unwrap();
            batched.r = r;
            b.extend(qs);
        }
        let k = a.len().min(b.len());
        assert!(k > 50);
        assert_eq!(a[..k], b[..k]);
    }

    #[test]
    fn log_q_drift_is_small() {
        let qs: Vec<Quotient> = stream_cf(&int(3), Limit::Count(3002)).unwrap().map(|q| q.unwrap()).collect();
        let values: Vec<BigUint> = qs.iter().map(|q| q.value.clone()).collect();
        let exact = convergent_denominators(&values);
        for n in (1000..=3000).step_by(1000) {
            let approx = qs[n + 1].log_q_prev.unwrap();
            let truth = crate::rational::ln_biguint(exact[n].magnitude());
            assert!((approx - truth).abs() <= 1e-6 * n as f64, "n = {n}: {approx} vs {truth}");
        }
    }

    #[test]
    fn first_records() {
        let rows = record_scan(&int(3), 300.0).unwrap();
        let got: Vec<(u64, u64, f64)> = rows.iter().map(|r| (r.n, r.a_n.to_u64().unwrap(), r.log_q_prev)).collect();
        let want = [(1, 11, 0.0), (10, 16, 9.4), (31, 68, 34.5), (87, 189, 97.9), (133, 492, 151.1), (211, 739, 256.6), (244, 2566, 297.6)];
        assert_eq!(got.len(), want.len(), "{got:?}");
        for (g, w) in got.iter().zip(want.iter()) {
            assert_eq!((g.0, g.1), (w.0, w.1));
            assert!((g.2 - w.2).abs() <= 0.1 + 1e-9);
        }
    }

    #[test]
    fn measure_small_range() {
        let rep = verify_measure(&int(3), 200.0).unwrap();
        assert!(rep.all_passed(), "{:?}", rep.violations);
        assert_eq!(rep.small.iter().map(|c| c.n).collect::<Vec<_>>(), (2..10).collect::<Vec<_>>());
        assert_eq!(rep.direct.len(), 7);
        assert!(verify_measure(&int(3), 5.0).is_err());
    }
}
