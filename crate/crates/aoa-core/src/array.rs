//! The array type, tuple counts and the tolerance / unbalance family of
//! non-orthogonality measures, plus lower bounds and the trivial
//! repeat-a-factor constructions.
//!
//! Levels are 1-based (`1..=s`); row and column indices are 0-based.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use num_integer::binomial;
use num_rational::Ratio;
use num_traits::{ToPrimitive, Zero};

use crate::error::{invalid, AoaError, Result};

/// Exact rational used for tuple deviations `n - N/s^t`.
pub type Rational = Ratio<i128>;

/// Above this many tuples per column choice, counting switches to a hash map.
const DENSE_LIMIT: u64 = 1_000_000;

/// An `N x k` array with entries in `1..=s`, stored row-major.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Array {
    n: usize,
    k: usize,
    s: u32,
    cells: Vec<u32>,
}

impl Array {
    pub fn new(n: usize, k: usize, s: u32, cells: Vec<u32>) -> Result<Self> {
        if n == 0 || k == 0 || s == 0 {
            return invalid(format!("N, k, s must be positive (got {n}, {k}, {s})"));
        }
        if cells.len() != n * k {
            return Err(AoaError::Dimension(format!(
                "expected {} cells for a {n}x{k} array, got {}",
                n * k,
                cells.len()
            )));
        }
        if let Some(&level) = cells.iter().find(|&&v| v == 0 || v > s) {
            return Err(AoaError::LevelOutOfRange { level, s });
        }
        Ok(Self { n, k, s, cells })
    }

    /// Builds an array from explicit rows; all rows must have the same length.
    pub fn from_rows(s: u32, rows: &[Vec<u32>]) -> Result<Self> {
        let k = rows.first().map(Vec::len).unwrap_or(0);
        if let Some(bad) = rows.iter().find(|r| r.len() != k) {
            return Err(AoaError::Dimension(format!(
                "ragged rows: expected length {k}, found {}",
                bad.len()
            )));
        }
        Self::new(rows.len(), k, s, rows.concat())
    }

    pub fn n_runs(&self) -> usize {
        self.n
    }

    pub fn n_factors(&self) -> usize {
        self.k
    }

    pub fn n_levels(&self) -> u32 {
        self.s
    }

    pub fn cells(&self) -> &[u32] {
        &self.cells
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> u32 {
        self.cells[i * self.k + j]
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[u32] {
        &self.cells[i * self.k..(i + 1) * self.k]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[u32]> + '_ {
        self.cells.chunks_exact(self.k)
    }

    pub fn to_rows(&self) -> Vec<Vec<u32>> {
        self.rows().map(<[u32]>::to_vec).collect()
    }

    pub fn column(&self, j: usize) -> Vec<u32> {
        (0..self.n).map(|i| self.get(i, j)).collect()
    }

    pub fn set(&mut self, i: usize, j: usize, level: u32) -> Result<()> {
        if i >= self.n || j >= self.k {
            return Err(AoaError::Dimension(format!("cell ({i},{j}) outside {}x{}", self.n, self.k)));
        }
        if level == 0 || level > self.s {
            return Err(AoaError::LevelOutOfRange { level, s: self.s });
        }
        self.cells[i * self.k + j] = level;
        Ok(())
    }

    /// The sub-array on the given columns, in the given order.
    pub fn select_columns(&self, cols: &[usize]) -> Result<Array> {
        if let Some(&j) = cols.iter().find(|&&j| j >= self.k) {
            return Err(AoaError::ColumnOutOfRange(j));
        }
        let cells = self.rows().flat_map(|r| cols.iter().map(move |&j| r[j])).collect();
        Array::new(self.n, cols.len(), self.s, cells)
    }

    /// Horizontal concatenation `(self | other)`.
    pub fn hconcat(&self, other: &Array) -> Result<Array> {
        if self.n != other.n || self.s != other.s {
            return Err(AoaError::Dimension("hconcat needs equal N and s".into()));
        }
        let cells = self.rows().zip(other.rows()).flat_map(|(a, b)| a.iter().chain(b).copied()).collect();
        Array::new(self.n, self.k + other.k, self.s, cells)
    }

    /// Vertical concatenation (rows of `self` then rows of `other`).
    pub fn vconcat(&self, other: &Array) -> Result<Array> {
        if self.k != other.k || self.s != other.s {
            return Err(AoaError::Dimension("vconcat needs equal k and s".into()));
        }
        let mut cells = self.cells.clone();
        cells.extend_from_slice(&other.cells);
        Array::new(self.n + other.n, self.k, self.s, cells)
    }

    /// Rows sorted lexicographically; two arrays are equivalent iff these agree.
    pub fn sorted_rows(&self) -> Vec<Vec<u32>> {
        let mut rows = self.to_rows();
        rows.sort();
        rows
    }
}

impl fmt::Display for Array {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for row in self.rows() {
            let line: Vec<String> = row.iter().map(u32::to_string).collect();
            writeln!(f, "{}", line.join(" "))?;
        }
        Ok(())
    }
}

/// A strictly increasing tuple of (0-based) column indices.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ColumnTuple {
    indices: Vec<usize>,
}

impl ColumnTuple {
    pub fn new(indices: Vec<usize>, k: usize) -> Result<Self> {
        if indices.is_empty() {
            return invalid("column tuple must be non-empty");
        }
        if let Some(&j) = indices.iter().find(|&&j| j >= k) {
            return Err(AoaError::ColumnOutOfRange(j));
        }
        if indices.windows(2).any(|w| w[0] >= w[1]) {
            return invalid("column tuple must be strictly increasing");
        }
        Ok(Self { indices })
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }
}

/// All strictly increasing `t`-subsets of `0..k`, in lexicographic order.
pub fn combinations(k: usize, t: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    if t > k {
        return out;
    }
    if t == 0 {
        out.push(Vec::new());
        return out;
    }
    let mut idx: Vec<usize> = (0..t).collect();
    loop {
        out.push(idx.clone());
        let mut i = t;
        while i > 0 && idx[i - 1] == k - t + i - 1 {
            i -= 1;
        }
        if i == 0 {
            return out;
        }
        idx[i - 1] += 1;
        for r in i..t {
            idx[r] = idx[r - 1] + 1;
        }
    }
}

fn check_strength(a: &Array, t: usize) -> Result<()> {
    if t == 0 || t > a.k {
        return invalid(format!("strength t={t} must satisfy 1 <= t <= k={}", a.k));
    }
    Ok(())
}

fn pow_u64(base: u64, e: usize) -> Option<u64> {
    base.checked_pow(u32::try_from(e).ok()?)
}

/// Number of rows `i` with `a[i, j_r] = x_r` for every `r`.
pub fn count_tuple(a: &Array, x: &[u32], j: &ColumnTuple) -> Result<u64> {
    if x.len() != j.len() {
        return Err(AoaError::Dimension(format!(
            "level tuple has length {} but column tuple has length {}",
            x.len(),
            j.len()
        )));
    }
    if let Some(&c) = j.indices().iter().find(|&&c| c >= a.k) {
        return Err(AoaError::ColumnOutOfRange(c));
    }
    if let Some(&level) = x.iter().find(|&&v| v == 0 || v > a.s) {
        return Err(AoaError::LevelOutOfRange { level, s: a.s });
    }
    let hits = a
        .rows()
        .filter(|r| j.indices().iter().zip(x).all(|(&c, &v)| r[c] == v))
        .count();
    Ok(hits as u64)
}

/// Dense tuple counts on the given columns; entry index is the base-`s`
/// number formed by `(level - 1)` digits, first column most significant.
pub fn tuple_counts(a: &Array, cols: &[usize]) -> Vec<u64> {
    let size = (a.s as usize).pow(cols.len() as u32);
    let mut counts = vec![0u64; size];
    for r in a.rows() {
        let idx = cols.iter().fold(0usize, |acc, &c| acc * a.s as usize + (r[c] - 1) as usize);
        counts[idx] += 1;
    }
    counts
}

/// Histogram `count -> multiplicity` of `n(A, x, j)` over all `x` in `S^t`
/// and all `t`-column tuples `j`.  Tolerance, unbalance and bandwidth are
/// all functions of this histogram.
pub fn count_histogram(a: &Array, t: usize) -> Result<BTreeMap<u64, u64>> {
    check_strength(a, t)?;
    let tuples = pow_u64(a.s as u64, t).ok_or_else(|| AoaError::InvalidParameter("s^t overflows".into()))?;
    let mut hist = BTreeMap::new();
    for cols in combinations(a.k, t) {
        if tuples <= DENSE_LIMIT {
            for c in tuple_counts(a, &cols) {
                *hist.entry(c).or_insert(0) += 1;
            }
        } else {
            let mut map: HashMap<Vec<u32>, u64> = HashMap::new();
            for r in a.rows() {
                *map.entry(cols.iter().map(|&c| r[c]).collect()).or_insert(0) += 1;
            }
            let zeros = tuples - map.len() as u64;
            if zeros > 0 {
                *hist.entry(0).or_insert(0) += zeros;
            }
            for c in map.into_values() {
                *hist.entry(c).or_insert(0) += 1;
            }
        }
    }
    Ok(hist)
}

/// `s^t` as i128, or an error if it does not fit.
fn s_pow_t(a: &Array, t: usize) -> Result<i128> {
    (a.s as i128)
        .checked_pow(t as u32)
        .ok_or_else(|| AoaError::InvalidParameter("s^t overflows".into()))
}

/// True iff every `t`-tuple appears exactly `N/s^t` times in every choice of `t` columns.
pub fn is_oa(a: &Array, t: usize) -> Result<bool> {
    check_strength(a, t)?;
    let st = s_pow_t(a, t)?;
    if a.n as i128 % st != 0 {
        return Ok(false);
    }
    let lambda = (a.n as i128 / st) as u64;
    Ok(count_histogram(a, t)?.keys().all(|&c| c == lambda))
}

/// `Tol_t(A) = max |n(A,x,j) - N/s^t|`, exact.
pub fn tolerance(a: &Array, t: usize) -> Result<Rational> {
    let st = s_pow_t(a, t)?;
    let n = a.n as i128;
    let worst = count_histogram(a, t)?
        .keys()
        .map(|&c| (c as i128 * st - n).abs())
        .max()
        .unwrap_or(0);
    Ok(Rational::new(worst, st))
}

/// `Unb_{p,t}(A) = sum_x sum_j |n(A,x,j) - N/s^t|^p` for integer `p >= 1`, exact.
pub fn unbalance(a: &Array, t: usize, p: u32) -> Result<Rational> {
    if p == 0 {
        return invalid("p must be at least 1");
    }
    let st = s_pow_t(a, t)?;
    let n = a.n as i128;
    let overflow = || AoaError::InvalidParameter("unbalance overflows i128".into());
    let mut num: i128 = 0;
    for (&c, &mult) in &count_histogram(a, t)? {
        let dev = (c as i128 * st - n).abs().checked_pow(p).ok_or_else(overflow)?;
        num = dev
            .checked_mul(mult as i128)
            .and_then(|v| num.checked_add(v))
            .ok_or_else(overflow)?;
    }
    Ok(Rational::new(num, st.checked_pow(p).ok_or_else(overflow)?))
}

/// `Unb_{p,t}` for real `p >= 1`, in floating point.
pub fn unbalance_real(a: &Array, t: usize, p: f64) -> Result<f64> {
    if !(p >= 1.0) {
        return invalid(format!("p must be at least 1 (got {p})"));
    }
    let lambda = a.n as f64 / (a.s as f64).powi(t as i32);
    Ok(count_histogram(a, t)?
        .iter()
        .map(|(&c, &m)| m as f64 * (c as f64 - lambda).abs().powf(p))
        .sum())
}

/// Matrix of Hamming similarities (number of agreeing coordinates) between runs.
pub fn hamming_similarities(a: &Array) -> Vec<Vec<usize>> {
    let rows: Vec<&[u32]> = a.rows().collect();
    rows.iter()
        .map(|r| rows.iter().map(|q| r.iter().zip(q.iter()).filter(|(x, y)| x == y).count()).collect())
        .collect()
}

/// `Unb_{2,t}` through the Hamming-similarity identity
/// `sum_{r,r'} C(H(r,r'), t) - C(k,t) N^2 / s^t` (ordered pairs, diagonal included).
pub fn unbalance2_via_hamming(a: &Array, t: usize) -> Result<Rational> {
    check_strength(a, t)?;
    let st = s_pow_t(a, t)?;
    let total: i128 = hamming_similarities(a)
        .iter()
        .flatten()
        .map(|&h| binomial(h as i128, t as i128))
        .sum();
    let n = a.n as i128;
    Ok(Rational::from_integer(total) - Rational::new(binomial(a.k as i128, t as i128) * n * n, st))
}

/// Exponent selector for [`normalized_unbalance`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum PNorm {
    Finite(f64),
    Infinity,
}

/// The `p`-mean of the deviations: `(Unb_{p,t} / (s^t C(k,t)))^{1/p}`, and `Tol_t` for `p = inf`.
pub fn normalized_unbalance(a: &Array, t: usize, p: PNorm) -> Result<f64> {
    match p {
        PNorm::Infinity => Ok(tolerance(a, t)?.to_f64().unwrap_or(f64::NAN)),
        PNorm::Finite(p) => {
            let unb = unbalance_real(a, t, p)?;
            let cells = (a.s as f64).powi(t as i32) * binomial(a.k as u64, t as u64) as f64;
            Ok((unb / cells).powf(1.0 / p))
        }
    }
}

/// `BW_t(A) = max |n(A,x,i) - n(A,y,j)|` over all tuples and column choices.
pub fn bandwidth(a: &Array, t: usize) -> Result<u64> {
    let hist = count_histogram(a, t)?;
    let lo = hist.keys().next().copied().unwrap_or(0);
    let hi = hist.keys().next_back().copied().unwrap_or(0);
    Ok(hi - lo)
}

/// Rao's bound on the number of factors of a strength-2 OA: `floor((N-1)/(s-1))`.
pub fn rao_max_factors(n_runs: usize, n_levels: u32) -> Result<usize> {
    if n_levels < 2 || n_runs < 2 {
        return invalid("Rao's bound needs N, s >= 2");
    }
    Ok((n_runs - 1) / (n_levels as usize - 1))
}

fn integral_lambda(n: usize, s: u32, t: u32) -> Result<i128> {
    let st = (s as i128).pow(t);
    if n as i128 % st != 0 {
        return invalid(format!("s^{t} = {st} does not divide N = {n}"));
    }
    Ok(n as i128 / st)
}

/// Lower bound on `Unb_{2,2}` over all `N x k` arrays on `s` levels (may be negative).
pub fn lower_bound_unb22(n_runs: usize, n_factors: usize, n_levels: u32) -> Result<Rational> {
    if n_levels < 2 || n_factors < 2 {
        return invalid("need s >= 2 and k >= 2");
    }
    let lambda = integral_lambda(n_runs, n_levels, 2)?;
    let s = n_levels as i128;
    let k = n_factors as i128;
    let n = lambda * s * s;
    let gamma = Rational::new((lambda * s - 1) * k, n - 1);
    let fl = gamma.floor();
    let fl_i = fl.to_integer();
    let inner = Rational::from_integer(binomial(fl_i, 2)) + fl * (gamma - fl);
    Ok(Rational::from_integer(n * (n - 1)) * inner - Rational::from_integer(lambda * (lambda - 1) * s * s * binomial(k, 2)))
}

/// Closed form of the bound for `lambda = 1` with `k = alpha (s+1) + kappa`.
pub fn lower_bound_unb22_lambda_one(n_levels: u32, n_factors: usize) -> i128 {
    let s = n_levels as i128;
    let k = n_factors as i128;
    let alpha = k / (s + 1);
    let kappa = k % (s + 1);
    alpha * kappa * s * s * (s - 1) + binomial(alpha, 2) * s * s * (s * s - 1)
}

/// Closed form of the bound for `lambda = 2` with `k = 2s + 1 + kappa`.
pub fn lower_bound_unb22_lambda_two(n_levels: u32, kappa: usize) -> i128 {
    let s = n_levels as i128;
    let kappa = kappa as i128;
    2 * s * s * ((2 * kappa - 1) * (s - 1) - binomial(kappa + 1, 2))
}

/// Whether `A` meets [`lower_bound_unb22`] with equality.
pub fn attains_unb22_lower_bound(a: &Array) -> Result<bool> {
    Ok(unbalance(a, 2, 2)? == lower_bound_unb22(a.n, a.k, a.s)?)
}

/// The `lambda`-fold full factorial on `t` columns: `lambda` consecutive blocks,
/// each listing `S^t` in lexicographic order (first column most significant).
pub fn full_factorial(s: u32, t: usize, lambda: usize) -> Result<Array> {
    if s == 0 || t == 0 || lambda == 0 {
        return invalid("full factorial needs s, t, lambda >= 1");
    }
    let block = (s as usize).pow(t as u32);
    let mut cells = Vec::with_capacity(lambda * block * t);
    for _ in 0..lambda {
        for idx in 0..block {
            let mut digits = vec![0u32; t];
            let mut v = idx;
            for d in digits.iter_mut().rev() {
                *d = (v % s as usize) as u32 + 1;
                v /= s as usize;
            }
            cells.extend(digits);
        }
    }
    Array::new(lambda * block, t, s, cells)
}

/// Prepends a copy of the first factor of a strength-2 OA.
pub fn trivial_construct(b: &Array) -> Result<Array> {
    if b.k < 2 || !is_oa(b, 2)? {
        return Err(AoaError::NotOa("input must be an OA of strength 2 with k >= 2".into()));
    }
    repeat_factors(b, 1)
}

/// `(B[[kappa]] | B)`: the first `kappa` columns of `B` repeated in front of it.
/// `B` must be a strength-1 OA (the bounds below rely on balanced columns).
pub fn repeat_factors(b: &Array, kappa: usize) -> Result<Array> {
    if b.k < 2 || !is_oa(b, 1)? {
        return Err(AoaError::NotOa("input must be an OA of strength 1 with k >= 2".into()));
    }
    if kappa == 0 || kappa > b.k - 1 {
        return invalid(format!("kappa={kappa} must lie in 1..={}", b.k - 1));
    }
    let cols: Vec<usize> = (0..kappa).collect();
    b.select_columns(&cols)?.hconcat(b)
}

/// `lambda^p s (s-1) (1 + (s-1)^{p-1})`: the exact `Unb_{p,2}` of [`trivial_construct`].
pub fn trivial_unbalance(lambda: u64, s: u64, p: u32) -> u128 {
    let (l, s) = (lambda as u128, s as u128);
    l.pow(p) * s * (s - 1) * (1 + (s - 1).pow(p - 1))
}

/// Bounds for [`repeat_factors`] together with the values measured on the built array.
#[derive(Clone, Debug)]
pub struct RepeatReport {
    pub array: Array,
    pub tol_bound: Rational,
    pub tol_actual: Rational,
    /// `(p, bound, actual)` triples.
    pub unb: Vec<(u32, Rational, Rational)>,
}

impl RepeatReport {
    pub fn holds(&self) -> bool {
        self.tol_actual <= self.tol_bound && self.unb.iter().all(|(_, b, a)| a <= b)
    }
}

/// Bounds `Tol_2 <= max{Tol_2(B), lambda (s-1)}` and
/// `Unb_{p,2} <= 2 Unb(B) + 2 Unb(B[[kappa]]) + kappa lambda^p s (s-1)(1 + (s-1)^{p-1})`,
/// evaluated on the repeated array.
pub fn repeat_factors_bounds(b: &Array, kappa: usize, ps: &[u32]) -> Result<RepeatReport> {
    let array = repeat_factors(b, kappa)?;
    let lambda = integral_lambda(b.n, b.s, 2)?;
    let s = b.s as i128;
    let tol_b = tolerance(b, 2)?;
    let base = Rational::from_integer(lambda * (s - 1));
    let tol_bound = if tol_b > base { tol_b } else { base };
    let head: Vec<usize> = (0..kappa).collect();
    let sub = b.select_columns(&head)?;
    let mut unb = Vec::new();
    for &p in ps {
        let sub_unb = if kappa >= 2 { unbalance(&sub, 2, p)? } else { Rational::zero() };
        let bound = Rational::from_integer(2) * unbalance(b, 2, p)?
            + Rational::from_integer(2) * sub_unb
            + Rational::from_integer(kappa as i128 * trivial_unbalance(lambda as u64, b.s as u64, p) as i128);
        unb.push((p, bound, unbalance(&array, 2, p)?));
    }
    let tol_actual = tolerance(&array, 2)?;
    Ok(RepeatReport { array, tol_bound, tol_actual, unb })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn oa4() -> Array {
        Array::from_rows(2, &[vec![1, 1, 1], vec![1, 2, 2], vec![2, 1, 2], vec![2, 2, 1]]).unwrap()
    }

    fn t0() -> Array {
        Array::from_rows(2, &[vec![1, 1, 1, 1], vec![1, 1, 2, 2], vec![2, 2, 1, 2], vec![2, 2, 2, 1]]).unwrap()
    }

    fn r(v: i128) -> Rational {
        Rational::from_integer(v)
    }

    #[test]
    fn counts() {
        let j13 = ColumnTuple::new(vec![0, 2], 3).unwrap();
        assert_eq!(count_tuple(&oa4(), &[1, 2], &j13).unwrap(), 1);
        let a = Array::from_rows(2, &[vec![1, 1], vec![2, 2]]).unwrap();
        assert_eq!(count_tuple(&a, &[1, 2], &ColumnTuple::new(vec![0, 1], 2).unwrap()).unwrap(), 0);
        assert_eq!(count_tuple(&t0(), &[1, 1], &ColumnTuple::new(vec![0, 1], 4).unwrap()).unwrap(), 2);
        assert!(count_tuple(&t0(), &[1], &ColumnTuple::new(vec![0, 1], 4).unwrap()).is_err());
        assert!(count_tuple(&t0(), &[1, 3], &ColumnTuple::new(vec![0, 1], 4).unwrap()).is_err());
        assert!(ColumnTuple::new(vec![1, 1], 4).is_err());
        assert!(ColumnTuple::new(vec![0, 4], 4).is_err());
    }

    #[test]
    fn oa_and_tolerance() {
        assert!(is_oa(&oa4(), 2).unwrap());
        assert!(!is_oa(&t0(), 2).unwrap());
        assert!(is_oa(&t0(), 1).unwrap());
        assert!(is_oa(&t0(), 5).is_err());
        assert_eq!(tolerance(&oa4(), 2).unwrap(), r(0));
        assert_eq!(tolerance(&t0(), 2).unwrap(), r(1));
    }

    #[test]
    fn unbalance_values() {
        assert_eq!(unbalance(&oa4(), 2, 1).unwrap(), r(0));
        assert_eq!(unbalance(&t0(), 2, 1).unwrap(), r(4));
        assert_eq!(unbalance(&t0(), 2, 2).unwrap(), r(4));
        assert_eq!(unbalance2_via_hamming(&t0(), 2).unwrap(), r(4));
        assert_eq!(unbalance2_via_hamming(&oa4(), 2).unwrap(), r(0));
        assert!(unbalance(&t0(), 2, 0).is_err());
        assert!(unbalance_real(&t0(), 2, 0.5).is_err());
        assert!((unbalance_real(&t0(), 2, 1.5).unwrap() - 4.0).abs() < 1e-12);
    }

    #[test]
    fn non_integral_lambda_is_rational() {
        let a = Array::from_rows(2, &[vec![1, 1], vec![1, 2], vec![2, 1]]).unwrap();
        // lambda = 3/4; counts 1,1,1,0
        assert_eq!(tolerance(&a, 2).unwrap(), Rational::new(3, 4));
        assert_eq!(unbalance(&a, 2, 1).unwrap(), Rational::new(3, 2));
        assert!(!is_oa(&a, 2).unwrap());
    }

    #[test]
    fn normalized_and_bandwidth() {
        assert_eq!(normalized_unbalance(&t0(), 2, PNorm::Infinity).unwrap(), 1.0);
        assert!((normalized_unbalance(&t0(), 2, PNorm::Finite(1.0)).unwrap() - 1.0 / 6.0).abs() < 1e-15);
        assert_eq!(normalized_unbalance(&oa4(), 2, PNorm::Finite(2.0)).unwrap(), 0.0);
        assert_eq!(bandwidth(&oa4(), 2).unwrap(), 0);
        assert_eq!(bandwidth(&t0(), 2).unwrap(), 2);
    }

    #[test]
    fn rao() {
        assert_eq!(rao_max_factors(9, 3).unwrap(), 4);
        assert_eq!(rao_max_factors(25, 5).unwrap(), 6);
        assert_eq!(rao_max_factors(4, 2).unwrap(), 3);
        assert!(rao_max_factors(4, 1).is_err());
    }

    #[test]
    fn lower_bounds() {
        assert_eq!(lower_bound_unb22(9, 5, 3).unwrap(), r(18));
        assert_eq!(lower_bound_unb22(25, 7, 5).unwrap(), r(100));
        for s in 2..8u32 {
            let n = 2 * (s * s) as usize;
            assert!(lower_bound_unb22(n, 2 * s as usize + 1, s).unwrap() < r(0), "s={s}");
        }
        assert!(lower_bound_unb22(10, 5, 3).is_err());
        for s in 2..10u32 {
            for k in 2..30usize {
                let general = lower_bound_unb22((s * s) as usize, k, s).unwrap();
                assert_eq!(general, r(lower_bound_unb22_lambda_one(s, k)), "s={s} k={k}");
            }
        }
    }

    #[test]
    fn lambda_two_closed_form_matches_general() {
        for s in 3..10u32 {
            for kappa in 1..s as usize {
                let k = 2 * s as usize + 1 + kappa;
                let general = lower_bound_unb22(2 * (s * s) as usize, k, s).unwrap();
                assert_eq!(general, r(lower_bound_unb22_lambda_two(s, kappa)), "s={s} kappa={kappa}");
            }
        }
    }

    #[test]
    fn trivial_from_oa4_is_t0() {
        let t = trivial_construct(&oa4()).unwrap();
        assert_eq!(unbalance(&t, 2, 1).unwrap(), r(4));
        assert_eq!(tolerance(&t, 2).unwrap(), r(1));
        assert_eq!(trivial_unbalance(1, 2, 1), 4);
        assert!(trivial_construct(&t0()).is_err());
    }

    #[test]
    fn repeat_bounds_reduce_to_trivial() {
        let rep = repeat_factors_bounds(&oa4(), 1, &[1, 2]).unwrap();
        assert_eq!(rep.tol_bound, r(1));
        assert_eq!(rep.unb[0].1, r(4));
        assert!(rep.holds());
        assert!(repeat_factors_bounds(&oa4(), 3, &[1]).is_err());
        let rep = repeat_factors_bounds(&t0(), 1, &[1, 2]).unwrap();
        assert_eq!(rep.array.n_factors(), 5);
        assert!(rep.holds());
    }

    #[test]
    fn full_factorial_layout() {
        let f = full_factorial(3, 2, 2).unwrap();
        assert_eq!(f.n_runs(), 18);
        assert_eq!(f.row(0), &[1, 1]);
        assert_eq!(f.row(5), &[2, 3]);
        assert_eq!(f.row(9), &[1, 1]);
        assert!(is_oa(&f, 2).unwrap());
    }

    #[test]
    fn combinations_order() {
        assert_eq!(combinations(4, 2), vec![vec![0, 1], vec![0, 2], vec![0, 3], vec![1, 2], vec![1, 3], vec![2, 3]]);
        assert_eq!(combinations(2, 3).len(), 0);
    }
}
