//! Two-dimensional convex bodies `|x| ≤ X, |x e^α - y| ≤ Y` over lattices cut
//! out by p-adic congruences, their successive minima, and the diagonal
//! family of bodies attached to a single rational `α`.

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{FromPrimitive, One, Signed, ToPrimitive, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::interval::{exp_interval, root_interval, RealInterval};
use crate::padic::{ensure_prime, padic_exp, val_rational, PAdicContext};
use crate::rational::{factorial, int, pow, ratio, to_f64, Rational};

/// `coeff · Π p^{e_p}` with rational exponents.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PowerProduct {
    #[serde(with = "crate::rational::serde_rational")]
    pub coeff: Rational,
    #[serde(serialize_with = "ser_factors")]
    pub factors: BTreeMap<u64, Rational>,
}

fn ser_factors<S: serde::Serializer>(f: &BTreeMap<u64, Rational>, s: S) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::SerializeMap;
    let mut m = s.serialize_map(Some(f.len()))?;
    for (p, e) in f {
        m.serialize_entry(&p.to_string(), &e.to_string())?;
    }
    m.end()
}

impl PowerProduct {
    pub fn rational(c: Rational) -> Self {
        PowerProduct { coeff: c, factors: BTreeMap::new() }
    }

    pub fn prime_power(p: u64, e: Rational) -> Self {
        let mut f = BTreeMap::new();
        if !e.is_zero() {
            f.insert(p, e);
        }
        PowerProduct { coeff: Rational::one(), factors: f }.normalized()
    }

    pub fn mul(&self, o: &PowerProduct) -> PowerProduct {
        let mut f = self.factors.clone();
        for (p, e) in &o.factors {
            let v = f.remove(p).unwrap_or_else(Rational::zero) + e;
            if !v.is_zero() {
                f.insert(*p, v);
            }
        }
        PowerProduct { coeff: &self.coeff * &o.coeff, factors: f }.normalized()
    }

    pub fn powi(&self, n: i64) -> PowerProduct {
        PowerProduct {
            coeff: pow(&self.coeff, n),
            factors: self.factors.iter().map(|(p, e)| (*p, e * int(n))).filter(|(_, e)| !e.is_zero()).collect(),
        }
        .normalized()
    }

    pub fn recip(&self) -> PowerProduct {
        self.powi(-1)
    }

    // Moves integral parts of exponents into the coefficient.
    fn normalized(mut self) -> Self {
        let mut f = BTreeMap::new();
        for (p, e) in std::mem::take(&mut self.factors) {
            let whole = e.floor();
            let frac = &e - &whole;
            self.coeff *= pow(&int(p as i64), whole.to_integer().to_i64().expect("exponent fits"));
            if !frac.is_zero() {
                f.insert(p, frac);
            }
        }
        self.factors = f;
        self
    }

    /// The exact value when all exponents are integers.
    pub fn as_rational(&self) -> Option<Rational> {
        let n = self.clone().normalized();
        n.factors.is_empty().then_some(n.coeff)
    }

    /// Enclosure with relative width about `2^{-bits}`.
    pub fn interval(&self, bits: u32) -> RealInterval {
        let n = self.clone().normalized();
        let mut acc = RealInterval::point(n.coeff.clone());
        for (p, e) in &n.factors {
            // 0 < e < 1, so p^e = (p^a)^{1/b} lies in [1, p).
            let a = e.numer().to_i64().expect("small exponent");
            let b = e.denom().to_u32().expect("small exponent");
            let r = root_interval(&pow(&int(*p as i64), a), b, bits + 8);
            acc = &acc * &r;
        }
        acc
    }

    pub fn to_f64(&self) -> f64 {
        self.factors.iter().fold(to_f64(&self.coeff), |acc, (p, e)| acc * (*p as f64).powf(to_f64(e)))
    }

    pub fn log2(&self) -> f64 {
        let c = crate::rational::to_f64(&self.coeff.abs());
        let base = if c.is_finite() && c > 0.0 {
            c.log2()
        } else {
            self.coeff.numer().bits() as f64 - self.coeff.denom().bits() as f64
        };
        self.factors.iter().fold(base, |acc, (p, e)| acc + (*p as f64).log2() * to_f64(e))
    }
}

/// `{(x, y) ∈ Z² : y ≡ x·residue (mod modulus)}`, basis `(1, residue), (0, modulus)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Lattice2 {
    #[serde(serialize_with = "ser_bigint")]
    pub residue: BigInt,
    #[serde(serialize_with = "ser_bigint")]
    pub modulus: BigInt,
}

fn ser_bigint<S: serde::Serializer>(v: &BigInt, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&v.to_string())
}

impl Lattice2 {
    pub fn integers() -> Self {
        Lattice2 { residue: BigInt::zero(), modulus: BigInt::one() }
    }

    pub fn basis(&self) -> [(BigInt, BigInt); 2] {
        [(BigInt::one(), self.residue.clone()), (BigInt::zero(), self.modulus.clone())]
    }

    pub fn covolume(&self) -> &BigInt {
        &self.modulus
    }

    pub fn contains(&self, x: &BigInt, y: &BigInt) -> bool {
        (x * &self.residue - y).mod_floor(&self.modulus).is_zero()
    }

    /// Intersection with the congruence `y ≡ x·residue (mod modulus)` for a
    /// coprime modulus.
    pub fn intersect(&self, other: &Lattice2) -> Lattice2 {
        let m = &self.modulus * &other.modulus;
        // CRT: r ≡ r1 (m1), r ≡ r2 (m2).
        let g = self.modulus.extended_gcd(&other.modulus);
        assert!(g.gcd.is_one(), "moduli must be coprime");
        let r = (&self.residue * &other.modulus * &g.y + &other.residue * &self.modulus * &g.x).mod_floor(&m);
        Lattice2 { residue: r, modulus: m }
    }
}

/// `Λ = {(x, y) ∈ Z² : |x e^α - y|_p ≤ p^{-n}}`.
pub fn lattice_lambda(n: u32, p: u64, alpha: &Rational) -> Result<Lattice2> {
    let ctx = PAdicContext::new(p, n)?;
    let e = padic_exp(&ctx, alpha)?;
    Ok(Lattice2 { residue: BigInt::from(e.residue), modulus: BigInt::from(ctx.modulus()) })
}

/// `{(x, y) : |x| ≤ bound_x, |x e^α - y| ≤ bound_form}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Body2 {
    #[serde(with = "crate::rational::serde_rational")]
    pub alpha: Rational,
    pub bound_x: PowerProduct,
    pub bound_form: PowerProduct,
}

impl Body2 {
    /// `4·bound_x·bound_form`.
    pub fn area(&self) -> PowerProduct {
        self.bound_x.mul(&self.bound_form).mul(&PowerProduct::rational(int(4)))
    }

    pub fn scaled(&self, c: &PowerProduct) -> Body2 {
        Body2 { alpha: self.alpha.clone(), bound_x: self.bound_x.mul(c), bound_form: self.bound_form.mul(c) }
    }

    fn precision_hint(&self) -> u32 {
        let span = self.bound_x.log2() - self.bound_form.log2() + to_f64(&self.alpha.abs()) * 1.45;
        (span.max(0.0) as u32) + 96
    }

    /// Enclosure of `max(|x|/bound_x, |x e^α - y|/bound_form)`.
    pub fn norm(&self, x: &BigInt, y: &BigInt, ev: &Evaluator) -> RealInterval {
        let xr = Rational::from_integer(x.clone());
        let yr = Rational::from_integer(y.clone());
        let a = RealInterval::point(xr.abs()).div_pos(&ev.bx);
        let f = &ev.e.scale(&xr) - &RealInterval::point(yr);
        let b = f.abs().div_pos(&ev.bf);
        a.max(&b)
    }

    /// Whether `(x, y)` lies in `λ·self`; `None` when undecided at this precision.
    pub fn contains_scaled(&self, x: &BigInt, y: &BigInt, lambda: &Rational, bits: u32) -> Option<bool> {
        let ev = Evaluator::new(self, bits);
        let n = self.norm(x, y, &ev);
        if &n.hi <= lambda {
            Some(true)
        } else if &n.lo > lambda {
            Some(false)
        } else {
            None
        }
    }
}

/// Interval values of `e^α` and the two bounds at a fixed precision.
pub struct Evaluator {
    pub e: RealInterval,
    pub bx: RealInterval,
    pub bf: RealInterval,
}

impl Evaluator {
    pub fn new(body: &Body2, bits: u32) -> Self {
        Evaluator { e: exp_interval(&body.alpha, bits), bx: body.bound_x.interval(bits), bf: body.bound_form.interval(bits) }
    }

    fn embed(&self, v: &(BigInt, BigInt)) -> (f64, f64) {
        let x = Rational::from_integer(v.0.clone());
        let y = Rational::from_integer(v.1.clone());
        let u = &x / &self.bx.lo;
        let w = (&x * &self.e.lo - y) / &self.bf.lo;
        (to_f64(&u), to_f64(&w))
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Minima2 {
    pub lambda1: RealInterval,
    pub lambda2: RealInterval,
    #[serde(serialize_with = "ser_pair")]
    pub witness1: (BigInt, BigInt),
    #[serde(serialize_with = "ser_pair")]
    pub witness2: (BigInt, BigInt),
    pub bits: u32,
    pub candidates: usize,
    /// The widened search window returned the same minima.
    pub window_stable: bool,
}

fn ser_pair<S: serde::Serializer>(v: &(BigInt, BigInt), s: S) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::SerializeSeq;
    let mut q = s.serialize_seq(Some(2))?;
    q.serialize_element(&v.0.to_string())?;
    q.serialize_element(&v.1.to_string())?;
    q.end()
}

impl Minima2 {
    pub fn product(&self) -> RealInterval {
        &self.lambda1 * &self.lambda2
    }
}

type V2 = (BigInt, BigInt);

fn sub_mul(a: &V2, k: &BigInt, b: &V2) -> V2 {
    (&a.0 - k * &b.0, &a.1 - k * &b.1)
}

fn norm2(p: (f64, f64)) -> f64 {
    p.0 * p.0 + p.1 * p.1
}

// Lagrange reduction of the lattice in the embedding (x/X, (x e^α - y)/Y).
fn reduce(lat: &Lattice2, ev: &Evaluator) -> Result<(V2, V2)> {
    let [mut b1, mut b2] = lat.basis();
    if norm2(ev.embed(&b2)) < norm2(ev.embed(&b1)) {
        std::mem::swap(&mut b1, &mut b2);
    }
    for _ in 0..10_000 {
        let e1 = ev.embed(&b1);
        let e2 = ev.embed(&b2);
        let mu = ((e1.0 * e2.0 + e1.1 * e2.1) / norm2(e1)).round();
        if mu != 0.0 {
            let k = BigInt::from_f64(mu).ok_or_else(|| Error::Numerical("reduction overflow".into()))?;
            b2 = sub_mul(&b2, &k, &b1);
        }
        if norm2(ev.embed(&b2)) < norm2(e1) {
            std::mem::swap(&mut b1, &mut b2);
        } else {
            return Ok((b1, b2));
        }
    }
    Err(Error::Numerical("lattice reduction did not converge".into()))
}

// Lattice points that can realize either minimum: on every line c2·b2 + Z·b1
// meeting the Euclidean disc containing the max-norm ball of radius r, the
// integers around the real minimizer of the (convex) max-norm.
fn candidates(b1: &V2, b2: &V2, ev: &Evaluator, r: f64, margin: i64) -> Vec<V2> {
    let (u1, w1) = ev.embed(b1);
    let (u2, w2) = ev.embed(b2);
    let area = (u1 * w2 - u2 * w1).abs();
    let len1 = norm2((u1, w1)).sqrt();
    let lines = ((2f64.sqrt() * r * 1.01 * len1 / area).ceil() as i64).max(1) + 1;
    let f = |c: f64, c2: f64| (c * u1 + c2 * u2).abs().max((c * w1 + c2 * w2).abs());
    let mut out = BTreeSet::new();
    for c2 in 0..=lines {
        let c2f = c2 as f64;
        let mut breaks = vec![0.0];
        for (num, den) in [(u2, u1), (w2, w1), (u2 - w2, u1 - w1), (u2 + w2, u1 + w1)] {
            if den != 0.0 && (c2f * num / den).is_finite() {
                breaks.push(-c2f * num / den);
            }
        }
        let best = breaks.iter().copied().min_by(|a, b| f(*a, c2f).total_cmp(&f(*b, c2f))).unwrap();
        let c0 = BigInt::from_f64(best.floor()).unwrap_or_else(BigInt::zero);
        for d in -margin..=margin + 1 {
            let c1 = &c0 + d;
            if c2 == 0 && c1.is_zero() {
                continue;
            }
            let c2b = BigInt::from(c2);
            let v = (&c1 * &b1.0 + &c2b * &b2.0, &c1 * &b1.1 + &c2b * &b2.1);
            // Fix the sign so that v and -v are not both kept.
            let v = if v.0.is_negative() || (v.0.is_zero() && v.1.is_negative()) { (-v.0, -v.1) } else { v };
            out.insert(v);
        }
    }
    out.into_iter().collect()
}

fn parallel(a: &V2, b: &V2) -> bool {
    &a.0 * &b.1 == &a.1 * &b.0
}

fn search(body: &Body2, lat: &Lattice2, bits: u32, margin: i64) -> Result<Minima2> {
    let ev = Evaluator::new(body, bits);
    let (b1, b2) = reduce(lat, &ev)?;
    let r = to_f64(&body.norm(&b1.0, &b1.1, &ev).hi).max(to_f64(&body.norm(&b2.0, &b2.1, &ev).hi));
    let cands = candidates(&b1, &b2, &ev, r, margin);
    let norms: Vec<RealInterval> = cands.iter().map(|v| body.norm(&v.0, &v.1, &ev)).collect();
    let i1 = (0..cands.len()).min_by(|&a, &b| norms[a].hi.cmp(&norms[b].hi)).expect("candidates");
    let lo1 = norms.iter().map(|n| &n.lo).min().unwrap().clone();
    let lambda1 = RealInterval::new(lo1, norms[i1].hi.clone());
    // λ2 = min over independent pairs of max(N(v), N(w)).
    let mut best: Option<(Rational, usize, usize)> = None;
    let mut lo2: Option<Rational> = None;
    for a in 0..cands.len() {
        for b in a + 1..cands.len() {
            if parallel(&cands[a], &cands[b]) {
                continue;
            }
            let hi = std::cmp::max(&norms[a].hi, &norms[b].hi).clone();
            let lo = std::cmp::max(&norms[a].lo, &norms[b].lo).clone();
            if best.as_ref().is_none_or(|(h, _, _)| &hi < h) {
                best = Some((hi, a, b));
            }
            if lo2.as_ref().is_none_or(|l| &lo < l) {
                lo2 = Some(lo);
            }
        }
    }
    let (hi2, a, b) = best.ok_or_else(|| Error::Numerical("no independent candidates".into()))?;
    let lambda2 = RealInterval::new(lo2.expect("pair"), hi2);
    let w2 = if norms[a].hi <= norms[b].hi { b } else { a };
    Ok(Minima2 {
        lambda1,
        lambda2,
        witness1: cands[i1].clone(),
        witness2: cands[w2].clone(),
        bits,
        candidates: cands.len(),
        window_stable: true,
    })
}

/// Successive minima of `body` with respect to `lat`, as certified
/// enclosures, with witnesses.
pub fn minima2(body: &Body2, lat: &Lattice2) -> Result<Minima2> {
    let mut bits = body.precision_hint();
    for _ in 0..5 {
        let m = search(body, lat, bits, 2)?;
        let tight = m.lambda1.relative_width() < 1e-12 && m.lambda2.relative_width() < 1e-12;
        if tight {
            let wide = search(body, lat, bits, 6)?;
            let stable = wide.lambda1 == m.lambda1 && wide.lambda2 == m.lambda2;
            return Ok(Minima2 { window_stable: stable, ..wide });
        }
        bits *= 2;
    }
    Err(Error::PrecisionExhausted("successive minima could not be separated".into()))
}

/// The two-dimensional body of the diagonal family at `α = 3`, `p = 3`.
pub fn prop12_body(n: u64) -> Body2 {
    let s = PowerProduct::prime_power(3, ratio(-(n as i64), 2));
    let nf = Rational::from_integer(factorial(n).into());
    let bx = PowerProduct::rational(Rational::from_integer(factorial(2 * n).into()) / &nf).mul(&s);
    let bf = PowerProduct::rational(pow(&ratio(9, 4), n as i64) / &nf).mul(&s);
    Body2 { alpha: int(3), bound_x: bx, bound_form: bf }
}

#[derive(Clone, Debug, Serialize)]
pub struct Prop12Row {
    pub n: u64,
    pub minima: Minima2,
    pub area: PowerProduct,
    #[serde(serialize_with = "ser_bigint")]
    pub covolume: BigInt,
    /// `λ1 λ2 · area / covolume`.
    pub product: RealInterval,
    pub sandwich_holds: bool,
    /// `(p^n, 0)` and `(0, p^n)` lie in the lattice and bound `λ2` from above.
    pub sublattice_check: bool,
    pub lambda1_n2: f64,
    pub lambda2_over_n2: f64,
}

/// Rows for `n = 1..=nmax` of the body/lattice family of `α` at the prime `p`
/// (for `α = p = 3` these are exactly the bodies of [`prop12_body`]).
pub fn check_family(alpha: &Rational, p: u64, nmax: u64) -> Result<Vec<Prop12Row>> {
    if nmax == 0 {
        return Err(Error::InvalidArgument("nmax must be at least 1".into()));
    }
    let mut rows = Vec::new();
    for n in 1..=nmax {
        let t = tilde_body(alpha, n)?;
        if !t.congruences.iter().any(|c| c.p == p) {
            return Err(Error::InvalidArgument(format!("the exponential of {alpha} has no congruence condition at p = {p}")));
        }
        let body = t.base_body.clone();
        let lat = t.lattice.clone();
        rows.push(family_row(n, &body, &lat)?);
    }
    Ok(rows)
}

pub fn check_prop12(nmax: u64) -> Result<Vec<Prop12Row>> {
    if nmax == 0 {
        return Err(Error::InvalidArgument("nmax must be at least 1".into()));
    }
    (1..=nmax)
        .map(|n| family_row(n, &prop12_body(n), &lattice_lambda(n as u32, 3, &int(3))?))
        .collect()
}

fn family_row(n: u64, body: &Body2, lat: &Lattice2) -> Result<Prop12Row> {
    let m = minima2(body, lat)?;
    let area = body.area();
    let bits = m.bits;
    let mu = area.interval(bits).scale(&Rational::new(BigInt::one(), lat.modulus.clone()));
    let product = &m.product() * &mu;
    let sandwich_holds = product.lo >= int(2) && product.hi <= int(4);
    let ev = Evaluator::new(body, bits);
    let q = &lat.modulus;
    let e1 = (q.clone(), BigInt::zero());
    let e2 = (BigInt::zero(), q.clone());
    let bound = std::cmp::max(body.norm(&e1.0, &e1.1, &ev).hi, body.norm(&e2.0, &e2.1, &ev).hi);
    let sublattice_check = lat.contains(&e1.0, &e1.1) && lat.contains(&e2.0, &e2.1) && m.lambda2.lo <= bound;
    let n2 = (n * n) as f64;
    Ok(Prop12Row {
        n,
        lambda1_n2: to_f64(&m.lambda1.mid()) * n2,
        lambda2_over_n2: to_f64(&m.lambda2.mid()) / n2,
        minima: m,
        area,
        covolume: lat.modulus.clone(),
        product,
        sandwich_holds,
        sublattice_check,
    })
}

/// `max_n max(λ2/n², 1/(λ1 n²))`, the smallest `c` that fits `(cn²)^{-1} ≤ λ1 ≤ λ2 ≤ cn²` on the rows.
pub fn trend_constant(rows: &[Prop12Row]) -> f64 {
    rows.iter().map(|r| r.lambda2_over_n2.max(1.0 / r.lambda1_n2)).fold(0.0, f64::max)
}

/// Congruence component at a prime with `|α|_p < p^{-1/(p-1)}`:
/// `|x|_p ≤ 1, |x e^α - y|_p ≤ B_p^{2n}`, i.e. `v_p(x e^α - y) ≥ min_valuation`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Congruence {
    pub p: u64,
    /// `-log_p B_p^{2n}`, exact.
    #[serde(with = "crate::rational::serde_rational")]
    pub exponent: Rational,
    pub min_valuation: u32,
}

/// The diagonal family `C̃_n` for `K = Q` and one rational `α ≠ 0`.
#[derive(Clone, Debug, Serialize)]
pub struct TildeBody {
    #[serde(with = "crate::rational::serde_rational")]
    pub alpha: Rational,
    pub n: u64,
    /// Primes `p` with `|α|_p ≠ 1`.
    pub exceptional_primes: Vec<u64>,
    /// `|E|`, counting the real place.
    pub g: usize,
    /// `B = Π_p B_p^{-1}` with `B_p = min(1, p^{1/(p-1)} |α|_p)`.
    pub b: PowerProduct,
    /// The real component: `|x| ≤ n^{g-1} B^n (2n)!/(|α|^n n!)`, `|x e^α - y| ≤ n^g B^n |α|^n/(4^n n!)`.
    pub body: Body2,
    /// The same body without the powers of `n`.
    pub base_body: Body2,
    pub congruences: Vec<Congruence>,
    /// Primes in `E` whose component is the unit module.
    pub trivial_primes: Vec<u64>,
    /// Integer points meeting every congruence.
    pub lattice: Lattice2,
}

fn prime_factors(mut m: BigInt) -> Vec<u64> {
    let mut out = Vec::new();
    let mut d = 2u64;
    m = m.abs();
    while BigInt::from(d) * BigInt::from(d) <= m {
        if (&m % d).is_zero() {
            out.push(d);
            while (&m % d).is_zero() {
                m /= d;
            }
        }
        d += 1;
        if d > 1_000_000 {
            break;
        }
    }
    if m > BigInt::one() {
        let v = m.to_u64().expect("prime factor beyond trial division range");
        out.push(v);
    }
    out
}

pub fn tilde_body(alpha: &Rational, n: u64) -> Result<TildeBody> {
    if alpha.is_zero() {
        return Err(Error::InvalidArgument("alpha must be non-zero".into()));
    }
    if n == 0 {
        return Err(Error::IndexTooSmall { index: 1, value: 0, min: 1 });
    }
    let mut primes = prime_factors(alpha.numer().clone());
    primes.extend(prime_factors(alpha.denom().clone()));
    primes.sort_unstable();
    let mut b = PowerProduct::rational(Rational::one());
    let mut congruences = Vec::new();
    let mut trivial = Vec::new();
    let mut lattice = Lattice2::integers();
    for &p in &primes {
        ensure_prime(p)?;
        let v = int(val_rational(p, alpha).expect("non-zero"));
        let inv = ratio(1, p as i64 - 1);
        // B_p = min(1, p^{1/(p-1) - v}).
        let e_bp = &inv - &v;
        if e_bp.is_negative() {
            b = b.mul(&PowerProduct::prime_power(p, -e_bp.clone()));
        }
        if v > inv {
            let exponent = int(2 * n as i64) * (&v - &inv);
            let k = crate::rational::ceil(&exponent).to_u32().ok_or_else(|| Error::InvalidArgument("congruence exponent too large".into()))?;
            congruences.push(Congruence { p, exponent, min_valuation: k });
            lattice = lattice.intersect(&lattice_lambda(k, p, alpha)?);
        } else {
            trivial.push(p);
        }
    }
    let g = 1 + primes.len();
    let a = alpha.abs();
    let nn = n as i64;
    let bn = b.powi(nn);
    let nf = Rational::from_integer(factorial(n).into());
    let base_x = PowerProduct::rational(Rational::from_integer(factorial(2 * n).into()) / (pow(&a, nn) * &nf)).mul(&bn);
    let base_f = PowerProduct::rational(pow(&a, nn) / (pow(&int(4), nn) * &nf)).mul(&bn);
    let base_body = Body2 { alpha: alpha.clone(), bound_x: base_x, bound_form: base_f };
    let body = Body2 {
        alpha: alpha.clone(),
        bound_x: base_body.bound_x.mul(&PowerProduct::rational(pow(&int(nn), g as i64 - 1))),
        bound_form: base_body.bound_form.mul(&PowerProduct::rational(pow(&int(nn), g as i64))),
    };
    Ok(TildeBody { alpha: alpha.clone(), n, exceptional_primes: primes, g, b, body, base_body, congruences, trivial_primes: trivial, lattice })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bi(v: i64) -> BigInt {
        BigInt::from(v)
    }

    #[test]
    fn lattice_examples() {
        let l1 = lattice_lambda(1, 3, &int(3)).unwrap();
        assert_eq!(l1.basis(), [(bi(1), bi(1)), (bi(0), bi(3))]);
        let l2 = lattice_lambda(2, 3, &int(3)).unwrap();
        assert_eq!(l2.basis(), [(bi(1), bi(4)), (bi(0), bi(9))]);
        assert!(l2.contains(&bi(3), &bi(12)));
        assert!(!l2.contains(&bi(1), &bi(1)));
        assert_eq!(l2.covolume(), &bi(9));
        assert!(lattice_lambda(1, 3, &int(1)).is_err());
    }

    #[test]
    fn crt_intersection() {
        let a = Lattice2 { residue: bi(2), modulus: bi(5) };
        let b = Lattice2 { residue: bi(1), modulus: bi(3) };
        let c = a.intersect(&b);
        assert_eq!(c.modulus, bi(15));
        assert_eq!(c.residue, bi(7));
    }

    #[test]
    fn power_product_arithmetic() {
        let s = PowerProduct::prime_power(3, ratio(-3, 2));
        assert_eq!(s.coeff, ratio(1, 9));
        assert_eq!(s.factors.get(&3), Some(&ratio(1, 2)));
        assert_eq!(s.mul(&s).as_rational(), Some(ratio(1, 27)));
        let iv = s.interval(80);
        let (lo, hi) = iv.to_f64_pair();
        assert!(lo <= 3f64.powf(-1.5) + 1e-16 && 3f64.powf(-1.5) - 1e-16 <= hi);
        assert!(iv.relative_width() < 1e-20);
        assert!((s.to_f64() - 3f64.powf(-1.5)).abs() < 1e-15);
    }

    #[test]
    fn first_body_has_expected_witness() {
        let body = prop12_body(1);
        let lat = lattice_lambda(1, 3, &int(3)).unwrap();
        assert!(lat.contains(&bi(1), &bi(19)));
        assert_eq!(body.contains_scaled(&bi(1), &bi(19), &int(1), 100), Some(true));
        let m = minima2(&body, &lat).unwrap();
        assert!(m.lambda1.hi <= int(1));
        assert!(m.lambda1.lo <= m.lambda2.hi);
        assert!(m.window_stable);
    }

    #[test]
    fn minima_witnesses_are_consistent() {
        for n in [2u64, 5, 9] {
            let body = prop12_body(n);
            let lat = lattice_lambda(n as u32, 3, &int(3)).unwrap();
            let m = minima2(&body, &lat).unwrap();
            let (x1, y1) = &m.witness1;
            let (x2, y2) = &m.witness2;
            assert!(lat.contains(x1, y1) && lat.contains(x2, y2));
            assert_ne!(x1 * y2, x2 * y1);
            assert_eq!(body.contains_scaled(x1, y1, &(&m.lambda1.hi * ratio(1_000_001, 1_000_000)), m.bits), Some(true));
            assert_eq!(body.contains_scaled(x2, y2, &(&m.lambda2.hi * ratio(1_000_001, 1_000_000)), m.bits), Some(true));
            assert!(m.lambda1.lo <= m.lambda2.hi);
        }
    }

    // Brute force over a box of integer points for small n, in floating point.
    #[test]
    fn minima_match_brute_force() {
        let e3 = 20.085536923187668f64;
        for n in 1u64..=3 {
            let body = prop12_body(n);
            let lat = lattice_lambda(n as u32, 3, &int(3)).unwrap();
            let m = minima2(&body, &lat).unwrap();
            let (bx, bf) = (body.bound_x.to_f64(), body.bound_form.to_f64());
            let r = lat.residue.to_i64().unwrap();
            let q = lat.modulus.to_i64().unwrap();
            let mut pts = Vec::new();
            for x in -60i64..=60 {
                for y in -1300i64..=1300 {
                    if (x, y) != (0, 0) && (x * r - y).rem_euclid(q) == 0 {
                        let nv = (x.abs() as f64 / bx).max((x as f64 * e3 - y as f64).abs() / bf);
                        pts.push(((x, y), nv));
                    }
                }
            }
            let l1 = pts.iter().map(|p| p.1).fold(f64::INFINITY, f64::min);
            let w = pts.iter().find(|p| p.1 == l1).unwrap().0;
            let l2 = pts.iter().filter(|p| p.0 .0 * w.1 != p.0 .1 * w.0).map(|p| p.1).fold(f64::INFINITY, f64::min);
            assert!((l1 - to_f64(&m.lambda1.mid())).abs() < 1e-9 * l1, "n={n}");
            assert!((l2 - to_f64(&m.lambda2.mid())).abs() < 1e-9 * l2, "n={n}");
        }
    }

    #[test]
    fn sandwich_small_range() {
        for row in check_prop12(6).unwrap() {
            assert!(row.sandwich_holds, "n = {}: {}", row.n, row.product);
            assert!(row.sublattice_check);
        }
    }

    #[test]
    fn tilde_examples() {
        let t = tilde_body(&int(3), 4).unwrap();
        assert_eq!(t.g, 2);
        assert_eq!(t.b, PowerProduct::prime_power(3, ratio(1, 2)));
        assert_eq!(t.congruences[0].min_valuation, 4);
        assert_eq!(t.lattice, lattice_lambda(4, 3, &int(3)).unwrap());
        assert_eq!(t.base_body, prop12_body(4));

        let t = tilde_body(&int(1), 2).unwrap();
        assert_eq!(t.g, 1);
        assert_eq!(t.b.as_rational(), Some(int(1)));
        assert_eq!(t.lattice, Lattice2::integers());

        let t = tilde_body(&int(4), 2).unwrap();
        assert_eq!(t.g, 2);
        assert_eq!(t.b.as_rational(), Some(int(2)));
        assert_eq!(t.congruences[0].min_valuation, 4);

        // |2|_2 = 1/2 sits on the boundary: the component is the unit module.
        let t = tilde_body(&int(2), 3).unwrap();
        assert_eq!(t.trivial_primes, vec![2]);
        assert!(t.congruences.is_empty());
        assert!(tilde_body(&int(0), 1).is_err());
    }

    #[test]
    fn tilde_minima_follow_scaling() {
        // n^{g-1} C_n ⊆ C̃_n ⊆ n^g C_n for the base body C_n.
        for n in [2u64, 4] {
            let t = tilde_body(&int(3), n).unwrap();
            let base = minima2(&t.base_body, &t.lattice).unwrap();
            let full = minima2(&t.body, &t.lattice).unwrap();
            let nn = int(n as i64);
            let r = |x: &RealInterval| to_f64(&x.mid());
            assert!(r(&full.lambda1) <= r(&base.lambda1) / to_f64(&nn) * (1.0 + 1e-12));
            assert!(r(&full.lambda1) >= r(&base.lambda1) / to_f64(&(&nn * &nn)) * (1.0 - 1e-12));
            assert!(r(&full.lambda2) <= r(&base.lambda2) / to_f64(&nn) * (1.0 + 1e-12));
        }
    }

    #[test]
    fn general_alpha_family() {
        let rows = check_family(&ratio(5, 2), 5, 4).unwrap();
        assert!(rows.iter().all(|r| r.sandwich_holds));
        assert!(check_family(&int(3), 2, 2).is_err());
    }
}
