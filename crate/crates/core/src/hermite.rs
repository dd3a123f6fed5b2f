//! Hermite approximations `a_n` to `(e^{α_1}, ..., e^{α_s})`, the matrices
//! `A_n` of neighbouring approximations, their recurrences and the closed-form
//! determinant.

use std::collections::HashMap;
use std::fmt;
use std::ops::Mul;

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::poly::Poly;
use crate::rational::{factorial_int, int, pow, Rational};

/// Ordered list of pairwise distinct rationals `(α_1, ..., α_s)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "AlphaSetRepr", into = "AlphaSetRepr")]
pub struct AlphaSet(Vec<Rational>);

#[derive(Serialize, Deserialize)]
struct AlphaSetRepr(#[serde(with = "crate::rational::serde_rational_vec")] Vec<Rational>);

impl TryFrom<AlphaSetRepr> for AlphaSet {
    type Error = Error;
    fn try_from(r: AlphaSetRepr) -> Result<Self> {
        AlphaSet::new(r.0)
    }
}

impl From<AlphaSet> for AlphaSetRepr {
    fn from(a: AlphaSet) -> Self {
        AlphaSetRepr(a.0)
    }
}

impl AlphaSet {
    pub fn new(alphas: Vec<Rational>) -> Result<Self> {
        if alphas.is_empty() {
            return Err(Error::EmptyAlphaSet);
        }
        for i in 0..alphas.len() {
            for j in i + 1..alphas.len() {
                if alphas[i] == alphas[j] {
                    return Err(Error::DuplicateAlpha(i, j));
                }
            }
        }
        Ok(AlphaSet(alphas))
    }

    pub fn from_ints(alphas: &[i64]) -> Result<Self> {
        Self::new(alphas.iter().map(|&a| int(a)).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn values(&self) -> &[Rational] {
        &self.0
    }

    pub fn get(&self, i: usize) -> &Rational {
        &self.0[i]
    }
}

/// An s-tuple of integers. Entries may be negative, in which case `f_n`, `P_n`
/// and `a_n` all vanish.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MultiIndex(Vec<i64>);

impl MultiIndex {
    pub fn new(entries: Vec<i64>) -> Self {
        MultiIndex(entries)
    }

    pub fn entries(&self) -> &[i64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_natural(&self) -> bool {
        self.0.iter().all(|&n| n >= 0)
    }

    /// `N = n_1 + ... + n_s`.
    pub fn total(&self) -> i64 {
        self.0.iter().sum()
    }

    /// `n + delta * e_index` (zero-based index).
    pub fn shifted(&self, index: usize, delta: i64) -> MultiIndex {
        let mut e = self.0.clone();
        e[index] += delta;
        MultiIndex(e)
    }

    pub(crate) fn check_len(&self, alphas: &AlphaSet) -> Result<()> {
        if self.len() != alphas.len() {
            return Err(Error::LengthMismatch { expected: alphas.len(), got: self.len() });
        }
        Ok(())
    }

    pub(crate) fn check_positive(&self) -> Result<()> {
        match self.0.iter().position(|&n| n < 1) {
            Some(i) => Err(Error::IndexTooSmall { index: i + 1, value: self.0[i], min: 1 }),
            None => Ok(()),
        }
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|n| n.to_string()).collect();
        write!(f, "({})", parts.join(","))
    }
}

/// The point `a_n = (P_n(α_1), ..., P_n(α_s))`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct HermitePoint(#[serde(with = "crate::rational::serde_rational_vec")] pub Vec<Rational>);

impl HermitePoint {
    pub fn zero(s: usize) -> Self {
        HermitePoint(vec![Rational::zero(); s])
    }

    pub fn coords(&self) -> &[Rational] {
        &self.0
    }
}

/// Square matrix over Q stored by rows.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct RatMatrix(#[serde(with = "crate::rational::serde_rational_matrix")] pub Vec<Vec<Rational>>);

impl RatMatrix {
    pub fn from_ints(rows: &[&[i64]]) -> Self {
        RatMatrix(rows.iter().map(|r| r.iter().map(|&x| int(x)).collect()).collect())
    }

    pub fn identity(n: usize) -> Self {
        RatMatrix(
            (0..n)
                .map(|i| (0..n).map(|j| if i == j { Rational::one() } else { Rational::zero() }).collect())
                .collect(),
        )
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn rows(&self) -> &[Vec<Rational>] {
        &self.0
    }

    pub fn scale(&self, c: &Rational) -> RatMatrix {
        RatMatrix(self.0.iter().map(|r| r.iter().map(|x| x * c).collect()).collect())
    }

    /// Exact determinant by Gaussian elimination over Q.
    pub fn det(&self) -> Rational {
        let n = self.dim();
        let mut a = self.0.clone();
        let mut det = Rational::one();
        for col in 0..n {
            let Some(piv) = (col..n).find(|&r| !a[r][col].is_zero()) else {
                return Rational::zero();
            };
            if piv != col {
                a.swap(piv, col);
                det = -det;
            }
            let p = a[col][col].clone();
            det *= &p;
            for r in col + 1..n {
                if a[r][col].is_zero() {
                    continue;
                }
                let factor = &a[r][col] / &p;
                for c in col..n {
                    let delta = &factor * &a[col][c];
                    a[r][c] -= delta;
                }
            }
        }
        det
    }

    pub fn is_unit_lower_triangular(&self) -> bool {
        let n = self.dim();
        (0..n).all(|i| {
            (0..n).all(|j| {
                let x = &self.0[i][j];
                match i.cmp(&j) {
                    std::cmp::Ordering::Equal => x.is_one(),
                    std::cmp::Ordering::Less => x.is_zero(),
                    std::cmp::Ordering::Greater => true,
                }
            })
        })
    }
}

impl Mul for &RatMatrix {
    type Output = RatMatrix;
    fn mul(self, rhs: &RatMatrix) -> RatMatrix {
        let n = self.dim();
        let m = rhs.0.first().map_or(0, |r| r.len());
        let k = rhs.dim();
        RatMatrix(
            (0..n)
                .map(|i| {
                    (0..m)
                        .map(|j| (0..k).fold(Rational::zero(), |acc, t| acc + &self.0[i][t] * &rhs.0[t][j]))
                        .collect()
                })
                .collect(),
        )
    }
}

/// `A_n`: the s×s matrix whose ℓ-th row is `a_{n-e_ℓ}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HermiteMatrix {
    pub base: MultiIndex,
    pub matrix: RatMatrix,
}

/// `f_n(z) = (z-α_1)^{n_1} ... (z-α_s)^{n_s}`, zero off `N^s`.
pub fn f_poly(alphas: &AlphaSet, n: &MultiIndex) -> Result<Poly> {
    n.check_len(alphas)?;
    if !n.is_natural() {
        return Ok(Poly::zero());
    }
    Ok(alphas
        .values()
        .iter()
        .zip(n.entries())
        .fold(Poly::one(), |acc, (a, &e)| &acc * &Poly::linear(a).pow(e as u32)))
}

/// `P_n = Σ_k f_n^{(k)}`.
pub fn p_poly(alphas: &AlphaSet, n: &MultiIndex) -> Result<Poly> {
    Ok(f_poly(alphas, n)?.derivative_sum())
}

pub fn hermite_point(alphas: &AlphaSet, n: &MultiIndex) -> Result<HermitePoint> {
    let p = p_poly(alphas, n)?;
    Ok(HermitePoint(alphas.values().iter().map(|a| p.eval(a)).collect()))
}

/// `f_n(α_i)` evaluated from the product form.
fn f_value(alphas: &AlphaSet, n: &MultiIndex, i: usize) -> Rational {
    if n.entries()[i] > 0 {
        return Rational::zero();
    }
    let ai = alphas.get(i);
    alphas
        .values()
        .iter()
        .zip(n.entries())
        .fold(Rational::one(), |acc, (ak, &e)| acc * pow(&(ai - ak), e))
}

/// Memo table for [`hermite_point_rec`], keyed by multi-index.
#[derive(Default, Debug)]
pub struct PointCache {
    map: HashMap<MultiIndex, HermitePoint>,
}

impl PointCache {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }
}

/// Computes `a_n` through `a_n = (f_n(α_i))_i + Σ_j n_j a_{n-e_j}`.
pub fn hermite_point_rec(alphas: &AlphaSet, n: &MultiIndex, cache: &mut PointCache) -> Result<HermitePoint> {
    n.check_len(alphas)?;
    Ok(point_rec(alphas, n, cache))
}

fn point_rec(alphas: &AlphaSet, n: &MultiIndex, cache: &mut PointCache) -> HermitePoint {
    let s = alphas.len();
    if !n.is_natural() {
        return HermitePoint::zero(s);
    }
    if let Some(p) = cache.map.get(n) {
        return p.clone();
    }
    let mut coords: Vec<Rational> = (0..s).map(|i| f_value(alphas, n, i)).collect();
    for j in 0..s {
        let nj = n.entries()[j];
        if nj == 0 {
            continue;
        }
        let prev = point_rec(alphas, &n.shifted(j, -1), cache);
        let w = int(nj);
        for (c, p) in coords.iter_mut().zip(prev.0.iter()) {
            *c += &w * p;
        }
    }
    let point = HermitePoint(coords);
    cache.map.insert(n.clone(), point.clone());
    point
}

pub fn hermite_matrix(alphas: &AlphaSet, n: &MultiIndex) -> Result<HermiteMatrix> {
    n.check_len(alphas)?;
    n.check_positive()?;
    let mut cache = PointCache::new();
    let rows = (0..alphas.len())
        .map(|l| point_rec(alphas, &n.shifted(l, -1), &mut cache).0)
        .collect();
    Ok(HermiteMatrix { base: n.clone(), matrix: RatMatrix(rows) })
}

/// `M_{n,ℓ}` with `A_{n+e_ℓ} = M_{n,ℓ} A_n`; `ell` is one-based.
pub fn step_matrix(alphas: &AlphaSet, n: &MultiIndex, ell: usize) -> Result<RatMatrix> {
    n.check_len(alphas)?;
    n.check_positive()?;
    let s = alphas.len();
    if ell == 0 || ell > s {
        return Err(Error::IndexOutOfRange { index: ell, len: s });
    }
    let al = alphas.get(ell - 1);
    Ok(RatMatrix(
        (0..s)
            .map(|k| {
                (0..s)
                    .map(|j| {
                        let mut x = int(n.entries()[j]);
                        if j == k {
                            x += alphas.get(k) - al;
                        }
                        x
                    })
                    .collect()
            })
            .collect(),
    ))
}

/// Closed form `Δ_n = Π_i (n_i-1)! Π_{k≠i} (α_i-α_k)^{n_k}`.
pub fn mahler_det(alphas: &AlphaSet, n: &MultiIndex) -> Result<Rational> {
    n.check_len(alphas)?;
    n.check_positive()?;
    let s = alphas.len();
    let mut acc = Rational::one();
    for i in 0..s {
        acc *= Rational::from_integer(factorial_int((n.entries()[i] - 1) as u64));
        for k in (0..s).filter(|&k| k != i) {
            acc *= pow(&(alphas.get(i) - alphas.get(k)), n.entries()[k]);
        }
    }
    Ok(acc)
}

/// `C_i = ((2i-1-α, 2i-1), (2i-1, 2i-1+α))` over Q.
pub fn diagonal_step(i: u64, alpha: &Rational) -> RatMatrix {
    let c = int(2 * i as i64 - 1);
    RatMatrix(vec![vec![&c - alpha, c.clone()], vec![c.clone(), &c + alpha]])
}

/// `(n-1)! C_n C_{n-1} ... C_1`, which equals `A_{(n,n)}` for the pair `(0, α)`.
pub fn diagonal_product(n: u64, alpha: &Rational) -> RatMatrix {
    assert!(n >= 1);
    let mut acc = RatMatrix::identity(2);
    for i in 1..=n {
        acc = &diagonal_step(i, alpha) * &acc;
    }
    acc.scale(&Rational::from_integer(factorial_int(n - 1)))
}
