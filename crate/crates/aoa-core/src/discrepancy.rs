//! Kernel discrepancies of the runs of an array viewed as points of `[0,1]^k`
//! (centered, wrap-around, mixture) and the discrete discrepancy on levels,
//! together with the identities and bounds tying them to unbalance.
//!
//! Every kernel here is a product of one-dimensional kernels, so the squared
//! discrepancy is `I2^k - (2/N) sum_i prod_j I1(x_ij) + (1/N^2) sum_{i,i'} prod_j K(x_ij, x_i'j)`.

use num_bigint::BigInt;
use num_integer::binomial;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::array::{combinations, hamming_similarities, tuple_counts, Array};
use crate::error::{invalid, Result};

/// Above this many factors the unbalance form of DD (which enumerates all
/// column subsets) is skipped.
pub const DD_UNBALANCE_FORM_MAX_K: usize = 16;

/// `(2a - 1) / (2s)`: the centre of the `a`-th of `s` equal cells.
pub fn level_point(level: u32, s: u32) -> f64 {
    (2.0 * level as f64 - 1.0) / (2.0 * s as f64)
}

/// The runs of `a` as `N` points of `[0,1]^k`.
pub fn points_of(a: &Array) -> Vec<Vec<f64>> {
    let s = a.n_levels();
    a.rows().map(|r| r.iter().map(|&v| level_point(v, s)).collect()).collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Kernel {
    Centered,
    WrapAround,
    Mixture,
}

impl Kernel {
    pub const ALL: [Kernel; 3] = [Kernel::Centered, Kernel::WrapAround, Kernel::Mixture];

    pub fn name(self) -> &'static str {
        match self {
            Kernel::Centered => "CD",
            Kernel::WrapAround => "WD",
            Kernel::Mixture => "MD",
        }
    }

    /// One-dimensional kernel.
    pub fn k1(self, x: f64, y: f64) -> f64 {
        let d = (x - y).abs();
        let (ux, uy) = ((x - 0.5).abs(), (y - 0.5).abs());
        match self {
            Kernel::Centered => 1.0 + 0.5 * ux + 0.5 * uy - 0.5 * d,
            Kernel::WrapAround => 1.5 - d + d * d,
            Kernel::Mixture => 15.0 / 8.0 - 0.25 * ux - 0.25 * uy - 0.75 * d + 0.5 * d * d,
        }
    }

    /// `I1(x) = int_0^1 K(x, y) dy`.
    pub fn i1(self, x: f64) -> f64 {
        let u = (x - 0.5).abs();
        match self {
            Kernel::Centered => 1.0 + 0.5 * u - 0.5 * u * u,
            Kernel::WrapAround => 4.0 / 3.0,
            Kernel::Mixture => 5.0 / 3.0 - 0.25 * u - 0.25 * u * u,
        }
    }

    /// `I2 = int_0^1 int_0^1 K(x, y) dx dy`.
    pub fn i2(self) -> f64 {
        match self {
            Kernel::Centered => 13.0 / 12.0,
            Kernel::WrapAround => 4.0 / 3.0,
            Kernel::Mixture => 19.0 / 12.0,
        }
    }

    /// `I1` by adaptive Simpson quadrature, splitting at the kinks `x` and `1/2`.
    pub fn i1_quadrature(self, x: f64) -> f64 {
        integrate_split(|y| self.k1(x, y), &[x])
    }

    /// `I2` by nested quadrature.
    pub fn i2_quadrature(self) -> f64 {
        integrate_split(|x| self.i1_quadrature(x), &[])
    }
}

fn simpson(f: &impl Fn(f64) -> f64, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
    let m = 0.5 * (a + b);
    let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
    let (flm, frm) = (f(lm), f(rm));
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    simpson(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1) + simpson(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
}

fn integrate(f: &impl Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    if b <= a {
        return 0.0;
    }
    let (fa, fb, fm) = (f(a), f(b), f(0.5 * (a + b)));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    simpson(f, a, b, fa, fm, fb, whole, 1e-14, 40)
}

fn integrate_split(f: impl Fn(f64) -> f64, extra: &[f64]) -> f64 {
    let mut cuts = vec![0.0, 0.5, 1.0];
    cuts.extend(extra.iter().copied().filter(|c| *c > 0.0 && *c < 1.0));
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    cuts.windows(2).map(|w| integrate(&f, w[0], w[1])).sum()
}

/// Squared kernel discrepancy of an arbitrary point set.
pub fn squared_discrepancy(kernel: Kernel, points: &[Vec<f64>]) -> f64 {
    let n = points.len() as f64;
    let k = points.first().map_or(0, Vec::len) as i32;
    let single: f64 = points.iter().map(|p| p.iter().map(|&x| kernel.i1(x)).product::<f64>()).sum();
    let mut pair = 0.0;
    for p in points {
        for q in points {
            pair += p.iter().zip(q).map(|(&x, &y)| kernel.k1(x, y)).product::<f64>();
        }
    }
    kernel.i2().powi(k) - 2.0 / n * single + pair / (n * n)
}

pub fn cd_squared(a: &Array) -> f64 {
    squared_discrepancy(Kernel::Centered, &points_of(a))
}

pub fn wd_squared(a: &Array) -> f64 {
    squared_discrepancy(Kernel::WrapAround, &points_of(a))
}

pub fn md_squared(a: &Array) -> f64 {
    squared_discrepancy(Kernel::Mixture, &points_of(a))
}

/// Centered L2-discrepancy.
pub fn cd(a: &Array) -> f64 {
    cd_squared(a).max(0.0).sqrt()
}

/// Wrap-around L2-discrepancy.
pub fn wd(a: &Array) -> f64 {
    wd_squared(a).max(0.0).sqrt()
}

/// Mixture L2-discrepancy.
pub fn md(a: &Array) -> f64 {
    md_squared(a).max(0.0).sqrt()
}

/// Parameters of the discrete kernel `a^{#agree} b^{#disagree}`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DdParams {
    pub a: f64,
    pub b: f64,
}

impl DdParams {
    pub fn new(a: f64, b: f64) -> Result<Self> {
        if !(a > b && b > 0.0) {
            return invalid(format!("discrete kernel needs a > b > 0 (got a={a}, b={b})"));
        }
        Ok(Self { a, b })
    }
}

/// `DD^2` evaluated through the Hamming-similarity form and, when affordable,
/// through the unbalance expansion.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DdValue {
    pub hamming_form: f64,
    pub unbalance_form: Option<f64>,
    /// `((a-b)/s + b)^k`, the size of the terms that cancel in the Hamming form.
    pub scale: f64,
}

impl DdValue {
    pub fn squared(&self) -> f64 {
        self.hamming_form
    }

    /// Gap between the forms, relative to the larger value or the cancelling-term scale.
    pub fn relative_gap(&self) -> Option<f64> {
        self.unbalance_form
            .map(|u| (u - self.hamming_form).abs() / u.abs().max(self.hamming_form.abs()).max(self.scale))
    }
}

fn unb2_by_strength(a: &Array) -> Vec<f64> {
    // Unb_{2,t} for t = 1..=k by direct counting.
    let (n, k, s) = (a.n_runs() as f64, a.n_factors(), a.n_levels() as f64);
    (1..=k)
        .map(|t| {
            let lambda = n / s.powi(t as i32);
            combinations(k, t)
                .iter()
                .map(|cols| tuple_counts(a, cols).iter().map(|&c| (c as f64 - lambda).powi(2)).sum::<f64>())
                .sum()
        })
        .collect()
}

/// `DD^2 = -((a-b)/s + b)^k + (b^k / N^2) sum_{r,r'} (a/b)^{H(r,r')}`.
pub fn dd_squared_hamming(a: &Array, params: DdParams) -> f64 {
    let (n, k, s) = (a.n_runs() as f64, a.n_factors() as i32, a.n_levels() as f64);
    let rho = params.a / params.b;
    let sum: f64 = hamming_similarities(a).iter().flatten().map(|&h| rho.powi(h as i32)).sum();
    -((params.a - params.b) / s + params.b).powi(k) + params.b.powi(k) / (n * n) * sum
}

/// `DD^2 = (1/N^2) sum_t Unb_{2,t} (a-b)^t b^{k-t}`.
pub fn dd_squared_unbalance(a: &Array, params: DdParams) -> f64 {
    let (n, k) = (a.n_runs() as f64, a.n_factors() as i32);
    unb2_by_strength(a)
        .iter()
        .enumerate()
        .map(|(i, u)| {
            let t = i as i32 + 1;
            u * (params.a - params.b).powi(t) * params.b.powi(k - t)
        })
        .sum::<f64>()
        / (n * n)
}

pub fn dd(a: &Array, params: DdParams) -> DdValue {
    DdValue {
        hamming_form: dd_squared_hamming(a, params),
        unbalance_form: (a.n_factors() <= DD_UNBALANCE_FORM_MAX_K).then(|| dd_squared_unbalance(a, params)),
        scale: ((params.a - params.b) / a.n_levels() as f64 + params.b).powi(a.n_factors() as i32),
    }
}

fn big_pow(x: &BigRational, e: usize) -> BigRational {
    (0..e).fold(BigRational::one(), |acc, _| acc * x)
}

/// Both forms of `DD^2` in exact rational arithmetic, for rational `(a, b)`.
pub fn dd_squared_exact(arr: &Array, a: &BigRational, b: &BigRational) -> Result<(BigRational, BigRational)> {
    if !(a > b && b.is_positive()) {
        return invalid("discrete kernel needs a > b > 0");
    }
    let n = BigRational::from_integer(BigInt::from(arr.n_runs()));
    let s = BigRational::from_integer(BigInt::from(arr.n_levels()));
    let k = arr.n_factors();
    let rho = a / b;
    let mut hist = vec![0u64; k + 1];
    for h in hamming_similarities(arr).iter().flatten() {
        hist[*h] += 1;
    }
    let sum = hist
        .iter()
        .enumerate()
        .fold(BigRational::zero(), |acc, (h, &c)| acc + big_pow(&rho, h) * BigRational::from_integer(BigInt::from(c)));
    let hamming = -big_pow(&((a - b) / &s + b), k) + big_pow(b, k) / (&n * &n) * sum;

    let mut unb_form = BigRational::zero();
    for t in 1..=k {
        let st = big_pow(&s, t);
        let lambda = &n / &st;
        let mut unb = BigRational::zero();
        for cols in combinations(k, t) {
            for c in tuple_counts(arr, &cols) {
                let d = BigRational::from_integer(BigInt::from(c)) - &lambda;
                unb += &d * &d;
            }
        }
        unb_form += unb * big_pow(&(a - b), t) * big_pow(b, k - t);
    }
    unb_form /= &n * &n;
    Ok((hamming, unb_form))
}

/// Lower bound on `DD^2` over all `N x k` arrays on `s` levels with `s^2 | N`.
pub fn dd_lower_bound(n_runs: usize, n_factors: usize, n_levels: u32, params: DdParams) -> Result<f64> {
    let s2 = (n_levels as usize).pow(2);
    if n_levels < 2 || n_runs % s2 != 0 {
        return invalid(format!("s^2 = {s2} must divide N = {n_runs}"));
    }
    let (s, k) = (n_levels as f64, n_factors as i32);
    let lambda = (n_runs / s2) as f64;
    let n = lambda * s * s;
    let gamma = (lambda * s - 1.0) * k as f64 / (n - 1.0);
    let fl = gamma.floor();
    let rho = params.a / params.b;
    Ok(-((params.a - params.b) / s + params.b).powi(k)
        + params.a.powi(k) / n
        + params.b.powi(k) * (1.0 - 1.0 / n) * (1.0 + (rho - 1.0) * (gamma - fl)) * rho.powi(fl as i32))
}

/// Discrete-kernel parameters matched to the centered kernel on `s` levels.
pub fn cd_coupling(s: u32) -> DdParams {
    let s = s as f64;
    let b = if s <= 2.0 { 1.0 } else { (3.0 * s - 3.0) / (2.0 * s) };
    DdParams { a: (3.0 * s - 1.0) / (2.0 * s), b }
}

pub fn wd_coupling(s: u32) -> DdParams {
    let s = s as f64;
    DdParams { a: 1.5, b: (3.0 * s * s - 2.0 * s + 2.0) / (2.0 * s * s) }
}

pub fn md_coupling(s: u32) -> DdParams {
    let odd = s % 2 == 1;
    let s = s as f64;
    let a = if odd { 15.0 / 8.0 } else { 15.0 / 8.0 - 1.0 / (4.0 * s) };
    DdParams { a, b: (15.0 * s * s - 8.0 * s + 4.0) / (8.0 * s * s) }
}

/// Smallest value of `I1` over the lattice points `(2a-1)/(2s)`.
pub fn min_lattice_i1(kernel: Kernel, s: u32) -> f64 {
    match kernel {
        Kernel::Centered => {
            // I1 grows with the distance to 1/2, so the minimum sits at the centre
            let u = if s % 2 == 1 { 0.0 } else { 1.0 / (2.0 * s as f64) };
            1.0 + 0.5 * u - 0.5 * u * u
        }
        Kernel::WrapAround => 4.0 / 3.0,
        Kernel::Mixture => {
            let s = s as f64;
            (71.0 * s * s + 12.0 * s - 3.0) / (48.0 * s * s)
        }
    }
}

/// Upper bound `I2^k - 2 c^k + ((a-b)/s + b)^k + DD(a,b)^2`, where `c` is the
/// least `I1` value on the lattice and `a`, `b` bound the diagonal and
/// off-diagonal lattice values of the one-dimensional kernel.
pub fn kernel_upper_bound(kernel: Kernel, arr: &Array) -> f64 {
    let s = arr.n_levels();
    let k = arr.n_factors() as i32;
    let params = match kernel {
        Kernel::Centered => cd_coupling(s),
        Kernel::WrapAround => wd_coupling(s),
        Kernel::Mixture => md_coupling(s),
    };
    let sf = s as f64;
    let c = min_lattice_i1(kernel, s);
    kernel.i2().powi(k) - 2.0 * c.powi(k)
        + ((params.a - params.b) / sf + params.b).powi(k)
        + dd_squared_hamming(arr, params)
}

/// The right-hand sides exactly as typeset in the source theorem (kept for comparison).
pub fn printed_upper_bound(kernel: Kernel, arr: &Array) -> f64 {
    let s = arr.n_levels() as f64;
    let n = arr.n_runs() as f64;
    let k = arr.n_factors() as i32;
    let dd2 = |a: f64, b: f64| dd_squared_hamming(arr, DdParams { a, b });
    match kernel {
        Kernel::Centered if s == 2.0 => {
            (13.0f64 / 12.0).powi(k) - 2.0 * (35.0f64 / 32.0).powi(k) + (9.0f64 / 8.0).powi(k) + dd2(1.25, 1.0)
        }
        Kernel::Centered => {
            (13.0f64 / 12.0).powi(k) - 2.0 * ((9.0 * s * s - 1.0) / (8.0 * s * s)).powi(k)
                + ((3.0 * s * s - 6.0 * s + 2.0) / (2.0 * s * s)).powi(k)
                + dd2((3.0 * s - 1.0) / (2.0 * s), (3.0 * s - 3.0) / (2.0 * s))
        }
        Kernel::WrapAround => {
            -(4.0f64 / 3.0).powi(k)
                + ((3.0 * s.powi(3) - 2.0 * s * s + 4.0 * s - 2.0) / (2.0 * s.powi(3))).powi(k)
                + dd2(1.5, (3.0 * s * s - 2.0 * s + 2.0) / (2.0 * s * s))
        }
        Kernel::Mixture => {
            let c = (71.0 * s * s + 12.0 * s - 3.0) / (48.0 * s * s);
            let b = (15.0 * s * s - 8.0 * s + 4.0) / (8.0 * s * s);
            let (lin, a) = if arr.n_levels() % 2 == 1 {
                (12.0, 15.0 / 8.0)
            } else {
                (10.0, 15.0 / 8.0 - 1.0 / (2.0 * s))
            };
            (19.0f64 / 12.0).powi(k) - 2.0 / n * c.powi(k)
                + ((15.0 * s.powi(3) - 8.0 * s * s + lin * s - 4.0) / (8.0 * s.powi(3))).powi(k)
                + dd2(a, b)
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BoundCheck {
    pub kernel: Kernel,
    /// Squared discrepancy.
    pub lhs: f64,
    pub rhs: f64,
    pub printed_rhs: f64,
    pub holds: bool,
    pub equality_expected: bool,
    pub equality_holds: bool,
}

/// Tolerance used for the bound and equality checks.
pub const BOUND_TOL: f64 = 1e-8;

/// Compares each squared discrepancy with its DD-based upper bound; equality
/// is expected for CD and MD at `s = 2` and for WD at `s <= 3`.
pub fn check_discrepancy_bounds(arr: &Array) -> Vec<BoundCheck> {
    let s = arr.n_levels();
    let pts = points_of(arr);
    Kernel::ALL
        .iter()
        .map(|&kernel| {
            let lhs = squared_discrepancy(kernel, &pts);
            let rhs = kernel_upper_bound(kernel, arr);
            let equality_expected = match kernel {
                Kernel::WrapAround => s <= 3,
                _ => s == 2,
            };
            BoundCheck {
                kernel,
                lhs,
                rhs,
                printed_rhs: printed_upper_bound(kernel, arr),
                holds: lhs <= rhs + BOUND_TOL,
                equality_expected,
                equality_holds: (lhs - rhs).abs() <= BOUND_TOL,
            }
        })
        .collect()
}

/// `binomial` re-exported for callers that build closed forms over `k`.
pub fn choose(n: u64, k: u64) -> u64 {
    binomial(n, k)
}

/// Rounds a `BigRational` for display or comparison.
pub fn big_to_f64(x: &BigRational) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}
