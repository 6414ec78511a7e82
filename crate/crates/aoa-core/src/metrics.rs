//! Design-of-experiments measures of non-orthogonality: the normalized
//! contrast matrix `X(A, f)`, the D-value, the (phi, theta) criteria, `J_2`,
//! and the inequalities relating them to unbalance and tolerance.

use nalgebra::DMatrix;
use num_integer::binomial;
use num_traits::ToPrimitive;

use crate::array::{combinations, is_oa, tolerance, tuple_counts, unbalance, Array, Rational};
use crate::error::{invalid, AoaError, Result};

/// A zero-mean, non-constant map from levels `1..=s` to reals.
#[derive(Clone, Debug, PartialEq)]
pub struct LevelContrast {
    values: Vec<f64>,
}

impl LevelContrast {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.len() < 2 {
            return invalid("a contrast needs at least two levels");
        }
        let scale = values.iter().map(|v| v.abs()).fold(1.0, f64::max);
        let sum: f64 = values.iter().sum();
        if sum.abs() > 1e-12 * scale * values.len() as f64 {
            return invalid(format!("contrast values must sum to zero (sum = {sum})"));
        }
        if values.iter().all(|&v| v == values[0]) {
            return invalid("contrast must not be constant");
        }
        Ok(Self { values })
    }

    /// `f(a) = a - (s+1)/2`.
    pub fn default_for(s: u32) -> Result<Self> {
        if s < 2 {
            return invalid("default contrast needs s >= 2");
        }
        let mid = (s as f64 + 1.0) / 2.0;
        Self::new((1..=s).map(|a| a as f64 - mid).collect())
    }

    pub fn n_levels(&self) -> u32 {
        self.values.len() as u32
    }

    /// `f(level)` for a 1-based level.
    pub fn at(&self, level: u32) -> f64 {
        self.values[level as usize - 1]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

/// `(sigma_1, sigma_2)`: mean absolute deviation about a median and standard
/// deviation about the mean, both for the uniform measure on the levels.
pub fn deviations(f: &LevelContrast) -> (f64, f64) {
    let n = f.values.len() as f64;
    let mut sorted = f.values.clone();
    sorted.sort_by(f64::total_cmp);
    let mid = sorted.len() / 2;
    let median = if sorted.len() % 2 == 1 { sorted[mid] } else { 0.5 * (sorted[mid - 1] + sorted[mid]) };
    let mean = sorted.iter().sum::<f64>() / n;
    let s1 = sorted.iter().map(|v| (v - median).abs()).sum::<f64>() / n;
    let s2 = (sorted.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n).sqrt();
    (s1, s2)
}

fn check_levels(a: &Array, f: &LevelContrast) -> Result<()> {
    if f.n_levels() != a.n_levels() {
        return Err(AoaError::Dimension(format!(
            "contrast has {} levels, array has {}",
            f.n_levels(),
            a.n_levels()
        )));
    }
    Ok(())
}

/// `X[i,j] = f(a_ij) / sqrt(sum_i f(a_ij)^2)`.
pub fn design_matrix(a: &Array, f: &LevelContrast) -> Result<DMatrix<f64>> {
    check_levels(a, f)?;
    let (n, k) = (a.n_runs(), a.n_factors());
    let mut x = DMatrix::from_fn(n, k, |i, j| f.at(a.get(i, j)));
    for j in 0..k {
        let norm = x.column(j).norm();
        if norm == 0.0 {
            return Err(AoaError::SingularColumn(j));
        }
        x.column_mut(j).scale_mut(1.0 / norm);
    }
    Ok(x)
}

/// `X^T X - I`.
pub fn gram_deviation(a: &Array, f: &LevelContrast) -> Result<DMatrix<f64>> {
    let x = design_matrix(a, f)?;
    let k = x.ncols();
    Ok(x.transpose() * &x - DMatrix::identity(k, k))
}

/// `D_f(A) = det(X^T X)^{1/k}`, in `[0, 1]`.
pub fn d_value(a: &Array, f: &LevelContrast) -> Result<f64> {
    let x = design_matrix(a, f)?;
    let gram = x.transpose() * &x;
    let det = gram.full_piv_lu().determinant().max(0.0);
    Ok(det.powf(1.0 / a.n_factors() as f64).min(1.0))
}

fn pair_deviation_sum(a: &Array, cols: &[usize], alpha: u32) -> Rational {
    let st = (a.n_levels() as i128).pow(2);
    let n = a.n_runs() as i128;
    let num: i128 = tuple_counts(a, cols).iter().map(|&c| (c as i128 * st - n).abs().pow(alpha)).sum();
    Rational::new(num, st.pow(alpha))
}

/// `D_{alpha,beta}(A) = sum_j (sum_x |n(A,x,j) - N/s^2|^alpha)^beta` over column pairs.
pub fn d_phi_theta(a: &Array, alpha: f64, beta: f64) -> Result<f64> {
    if alpha < 1.0 || beta < 1.0 {
        return invalid(format!("alpha and beta must be at least 1 (got {alpha}, {beta})"));
    }
    let lambda = a.n_runs() as f64 / (a.n_levels() as f64).powi(2);
    Ok(combinations(a.n_factors(), 2)
        .iter()
        .map(|cols| {
            tuple_counts(a, cols)
                .iter()
                .map(|&c| (c as f64 - lambda).abs().powf(alpha))
                .sum::<f64>()
                .powf(beta)
        })
        .sum())
}

/// Exact `D_{alpha,beta}` for integer exponents.
pub fn d_phi_theta_exact(a: &Array, alpha: u32, beta: u32) -> Result<Rational> {
    if alpha < 1 || beta < 1 {
        return invalid("alpha and beta must be at least 1");
    }
    if a.n_factors() < 2 {
        return invalid("need at least two factors");
    }
    Ok(combinations(a.n_factors(), 2)
        .iter()
        .map(|cols| {
            let inner = pair_deviation_sum(a, cols, alpha);
            (0..beta - 1).fold(inner, |acc, _| acc * inner)
        })
        .sum())
}

/// `D_1 = D_{1,1} / C(k,2)`.
pub fn d1(a: &Array) -> Result<Rational> {
    Ok(d_phi_theta_exact(a, 1, 1)? / Rational::from_integer(binomial(a.n_factors() as i128, 2)))
}

/// `D_2 = D_{2,1} / C(k,2)`.
pub fn d2(a: &Array) -> Result<Rational> {
    Ok(d_phi_theta_exact(a, 2, 1)? / Rational::from_integer(binomial(a.n_factors() as i128, 2)))
}

/// `J_2 = (N^2/2) ||X^T X - I||_F^2 + (N/2)(N k (k-1) + N k s - k^2 s^2)` (strength-one OAs only).
pub fn j2(a: &Array, f: &LevelContrast) -> Result<f64> {
    if !is_oa(a, 1)? {
        return Err(AoaError::NotOa("J2 is defined for strength-one OAs".into()));
    }
    let dev = gram_deviation(a, f)?;
    let (n, k, s) = (a.n_runs() as f64, a.n_factors() as f64, a.n_levels() as f64);
    let frob2 = dev.norm_squared();
    Ok(n * n / 2.0 * frob2 + n / 2.0 * (n * k * (k - 1.0) + n * k * s - k * k * s * s))
}

/// The D-value lower bound that applies when all non-orthogonal pairs involve the last column.
#[derive(Clone, Debug, PartialEq)]
pub struct CorollaryCheck {
    /// Number of other columns that are not orthogonal to the last one.
    pub r: usize,
    /// `sqrt(r)/lambda (sigma1/sigma2)^2 Tol_2`, which must be below one.
    pub condition: f64,
    pub d_value: f64,
    pub bound: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DCriterionReport {
    pub frobenius: f64,
    pub frobenius_bound: f64,
    pub max_norm: f64,
    pub max_norm_bound_sigma: f64,
    pub max_norm_bound_tol: f64,
    pub frobenius_pass: bool,
    pub max_norm_pass: bool,
    /// `None` when the structural hypothesis fails or the condition is not met.
    pub corollary: Option<CorollaryCheck>,
}

impl DCriterionReport {
    pub fn all_pass(&self) -> bool {
        self.frobenius_pass && self.max_norm_pass && self.corollary.as_ref().map_or(true, |c| c.pass)
    }
}

fn slack(bound: f64) -> f64 {
    1e-9 * bound.abs().max(1.0)
}

/// Evaluates `||X^T X - I||_F <= sqrt(2 Unb_{2,2})/(lambda s)` and
/// `||X^T X - I||_max <= (sigma1/sigma2)^2 Tol_2 / lambda <= Tol_2 / lambda`,
/// plus the D-value bound when its hypotheses hold.
pub fn check_dcriterion_bounds(a: &Array, f: &LevelContrast) -> Result<DCriterionReport> {
    if !is_oa(a, 1)? {
        return Err(AoaError::NotOa("the bounds need a strength-one OA".into()));
    }
    let dev = gram_deviation(a, f)?;
    let s = a.n_levels() as f64;
    let lambda = a.n_runs() as f64 / (s * s);
    let unb2 = unbalance(a, 2, 2)?.to_f64().unwrap_or(f64::NAN);
    let tol = tolerance(a, 2)?.to_f64().unwrap_or(f64::NAN);
    let (s1, s2) = deviations(f);
    let ratio2 = (s1 / s2).powi(2);

    let frobenius = dev.norm();
    let frobenius_bound = (2.0 * unb2).sqrt() / (lambda * s);
    let max_norm = dev.amax();
    let max_norm_bound_sigma = ratio2 * tol / lambda;
    let max_norm_bound_tol = tol / lambda;

    let corollary = corollary_check(a, f, lambda, ratio2, tol)?;
    Ok(DCriterionReport {
        frobenius,
        frobenius_bound,
        max_norm,
        max_norm_bound_sigma,
        max_norm_bound_tol,
        frobenius_pass: frobenius <= frobenius_bound + slack(frobenius_bound),
        max_norm_pass: max_norm <= max_norm_bound_sigma + slack(max_norm_bound_sigma)
            && max_norm_bound_sigma <= max_norm_bound_tol + slack(max_norm_bound_tol),
        corollary,
    })
}

fn orthogonal_pair(a: &Array, i: usize, j: usize) -> Result<bool> {
    is_oa(&a.select_columns(&[i, j])?, 2)
}

fn corollary_check(a: &Array, f: &LevelContrast, lambda: f64, ratio2: f64, tol: f64) -> Result<Option<CorollaryCheck>> {
    let k = a.n_factors();
    if k < 2 {
        return Ok(None);
    }
    let last = k - 1;
    for pair in combinations(last, 2) {
        if !orthogonal_pair(a, pair[0], pair[1])? {
            return Ok(None);
        }
    }
    let mut r = 0;
    for j in 0..last {
        if !orthogonal_pair(a, j, last)? {
            r += 1;
        }
    }
    let condition = (r as f64).sqrt() / lambda * ratio2 * tol;
    if condition >= 1.0 {
        return Ok(None);
    }
    let d = d_value(a, f)?;
    let inner = 1.0 - r as f64 / (lambda * lambda) * ratio2 * ratio2 * tol * tol;
    let bound = inner.powf(1.0 / k as f64);
    Ok(Some(CorollaryCheck { r, condition, d_value: d, bound, pass: d >= bound - 1e-12 }))
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

    #[test]
    fn contrasts() {
        assert_eq!(LevelContrast::default_for(2).unwrap().values(), &[-0.5, 0.5]);
        assert_eq!(LevelContrast::default_for(3).unwrap().values(), &[-1.0, 0.0, 1.0]);
        assert_eq!(LevelContrast::default_for(5).unwrap().values(), &[-2.0, -1.0, 0.0, 1.0, 2.0]);
        assert!(LevelContrast::default_for(1).is_err());
        assert!(LevelContrast::new(vec![1.0, 1.0]).is_err());
        assert!(LevelContrast::new(vec![0.0, 0.0]).is_err());
    }

    #[test]
    fn sigma_values() {
        let (a, b) = deviations(&LevelContrast::default_for(2).unwrap());
        assert!((a - 0.5).abs() < 1e-15 && (b - 0.5).abs() < 1e-15);
        let (a, b) = deviations(&LevelContrast::new(vec![-2.0, 1.0, 1.0]).unwrap());
        assert!(((a / b).powi(2) - 0.5).abs() < 1e-12);
        let (a, b) = deviations(&LevelContrast::default_for(3).unwrap());
        assert!((a - 2.0 / 3.0).abs() < 1e-15);
        assert!((b - (2.0f64 / 3.0).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn design_matrix_cases() {
        let f = LevelContrast::default_for(2).unwrap();
        let dev = gram_deviation(&oa4(), &f).unwrap();
        assert!(dev.amax() < 1e-12);
        let x = design_matrix(&t0(), &f).unwrap();
        assert_eq!(x.column(0), x.column(1));
        // a column held at the level where the contrast vanishes
        let f3 = LevelContrast::new(vec![-1.0, 0.0, 1.0]).unwrap();
        let mid = Array::from_rows(3, &[vec![1, 2], vec![3, 2], vec![2, 2]]).unwrap();
        assert_eq!(design_matrix(&mid, &f3).unwrap_err(), AoaError::SingularColumn(1));
        assert!((d_value(&oa4(), &f).unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(d_value(&t0(), &f).unwrap(), 0.0);
    }

    #[test]
    fn j2_values() {
        let f = LevelContrast::default_for(2).unwrap();
        assert!((j2(&oa4(), &f).unwrap() - 24.0).abs() < 1e-9);
        assert!((j2(&t0(), &f).unwrap() - 48.0).abs() < 1e-9);
        let bad = Array::from_rows(2, &[vec![1, 1], vec![1, 2]]).unwrap();
        assert!(j2(&bad, &f).is_err());
    }

    #[test]
    fn dcriterion_on_t0_is_tight() {
        let rep = check_dcriterion_bounds(&t0(), &LevelContrast::default_for(2).unwrap()).unwrap();
        assert!((rep.frobenius - 2f64.sqrt()).abs() < 1e-12);
        assert!((rep.frobenius_bound - 2f64.sqrt()).abs() < 1e-12);
        assert!(rep.all_pass());
        let rep = check_dcriterion_bounds(&oa4(), &LevelContrast::default_for(2).unwrap()).unwrap();
        assert!(rep.frobenius < 1e-12 && rep.max_norm < 1e-12 && rep.all_pass());
    }

    #[test]
    fn phi_theta_rejects_small_exponents() {
        assert!(d_phi_theta(&t0(), 0.5, 1.0).is_err());
        assert!((d_phi_theta(&t0(), 1.0, 1.0).unwrap() - 4.0).abs() < 1e-12);
    }
}
