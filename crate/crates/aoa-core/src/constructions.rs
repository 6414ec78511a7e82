//! Addelman-Kempthorne style constructions of almost-orthogonal arrays over GF(s).
//!
//! Rows are indexed by `(x, y)` in `F_s x F_s^{l-1}`, `x` major and `y` in
//! lexicographic order; extensions stack a second block of the same size
//! below the first.  Field elements become levels through
//! [`Field::to_level`].

use std::fmt;
use std::str::FromStr;

use num_integer::binomial;

use crate::array::{combinations, is_oa, tolerance, unbalance, Array, Rational};
use crate::error::{invalid, AoaError, Result};
use crate::galois::{Elem, Field};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Variant {
    /// Index one: linear block plus `kappa` quadratic columns.
    Half,
    /// Index two, odd `s > 2`.
    OddExt,
    /// Index two, even `s > 2`.
    EvenExt,
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Variant::Half => "half",
            Variant::OddExt => "odd-ext",
            Variant::EvenExt => "even-ext",
        })
    }
}

impl FromStr for Variant {
    type Err = AoaError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "half" => Ok(Variant::Half),
            "odd-ext" | "odd_ext" => Ok(Variant::OddExt),
            "even-ext" | "even_ext" => Ok(Variant::EvenExt),
            other => invalid(format!("unknown construction variant '{other}'")),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ConstructionSpec {
    pub s: u32,
    pub ell: u32,
    pub kappa: usize,
    pub variant: Variant,
}

fn gamma_len(s: u32, ell: u32) -> usize {
    ((s as usize).pow(ell - 1) - 1) / (s as usize - 1)
}

impl ConstructionSpec {
    pub fn new(s: u32, ell: u32, kappa: usize, variant: Variant) -> Result<Self> {
        let (p, _) = crate::galois::prime_power(s).ok_or(AoaError::NotPrimePower(s))?;
        if ell < 2 {
            return invalid(format!("ell must be at least 2 (got {ell})"));
        }
        if kappa == 0 {
            return invalid("kappa must be at least 1");
        }
        match variant {
            Variant::Half => {
                let max = s as usize * gamma_len(s, ell);
                if kappa > max {
                    return invalid(format!("kappa={kappa} exceeds s(s^(l-1)-1)/(s-1) = {max}"));
                }
            }
            Variant::OddExt | Variant::EvenExt => {
                if s <= 2 {
                    return invalid("extensions need s > 2 (for s = 2 they give an OA)");
                }
                if variant == Variant::OddExt && p == 2 {
                    return invalid(format!("odd-ext needs odd s (got {s})"));
                }
                if variant == Variant::EvenExt && p != 2 {
                    return invalid(format!("even-ext needs even s (got {s})"));
                }
                if kappa > s as usize - 1 {
                    return invalid(format!("kappa={kappa} exceeds s-1 = {}", s - 1));
                }
            }
        }
        Ok(Self { s, ell, kappa, variant })
    }

    /// `(s^l - 1)/(s - 1)`, the size of the linear block including the leading column.
    pub fn linear_width(&self) -> usize {
        ((self.s as usize).pow(self.ell) - 1) / (self.s as usize - 1)
    }

    pub fn n_runs(&self) -> usize {
        let base = (self.s as usize).pow(self.ell);
        match self.variant {
            Variant::Half => base,
            _ => 2 * base,
        }
    }

    pub fn n_factors(&self) -> usize {
        match self.variant {
            Variant::Half => self.linear_width() + self.kappa,
            _ => 2 * self.linear_width() - 1 + self.kappa,
        }
    }

    /// Closed-form `Tol_2` of the construction.
    pub fn expected_tolerance(&self) -> u64 {
        let scale = (self.s as u64).pow(self.ell - 2);
        match self.variant {
            Variant::Half => scale,
            _ => (self.s as u64 - 2).max(2) * scale,
        }
    }

    /// Closed-form `Unb_{p,2}` of the construction.
    pub fn expected_unbalance(&self, p: u32) -> u128 {
        let s = self.s as u128;
        let scale = s.pow((self.ell - 2) * p);
        let kappa = self.kappa as u128;
        match self.variant {
            Variant::Half => kappa * s * s * (s - 1) * scale,
            _ => binomial(kappa + 1, 2) * 2 * s * (s - 2) * ((s - 2).pow(p - 1) + 2u128.pow(p - 1)) * scale,
        }
    }
}

/// Canonical projective representatives of `F_s^{l-1}` (first nonzero coordinate 1),
/// in lexicographic order.
pub fn gamma_set(field: &Field, ell: u32) -> Result<Vec<Vec<Elem>>> {
    if ell < 2 {
        return invalid(format!("ell must be at least 2 (got {ell})"));
    }
    Ok(vectors(field, ell as usize - 1)
        .into_iter()
        .filter(|v| v.iter().find(|e| e.0 != 0) == Some(&Elem(1)))
        .collect())
}

/// All of `F_s^n` in lexicographic order (first coordinate most significant).
fn vectors(field: &Field, n: usize) -> Vec<Vec<Elem>> {
    let s = field.order() as usize;
    (0..s.pow(n as u32))
        .map(|mut idx| {
            let mut v = vec![Elem(0); n];
            for c in v.iter_mut().rev() {
                *c = Elem((idx % s) as u32);
                idx /= s;
            }
            v
        })
        .collect()
}

fn dot(field: &Field, a: &[Elem], b: &[Elem]) -> Elem {
    a.iter().zip(b).fold(Elem(0), |acc, (&x, &y)| field.add(acc, field.mul(x, y)))
}

/// Pairs `(a, gamma)` of `F_s x Gamma` in enumeration order (`a` major).
fn pairs(field: &Field, gamma: &[Vec<Elem>]) -> Vec<(Elem, Vec<Elem>)> {
    field.elements().flat_map(|a| gamma.iter().map(move |g| (a, g.clone()))).collect()
}

struct Rows<'f> {
    field: &'f Field,
    cells: Vec<u32>,
}

impl<'f> Rows<'f> {
    fn push(&mut self, e: Elem) {
        self.cells.push(self.field.to_level(e));
    }
}

/// Index-one construction: `s^l` runs, `(s^l-1)/(s-1) + kappa` factors.
pub fn ak_half(spec: &ConstructionSpec) -> Result<Array> {
    if spec.variant != Variant::Half {
        return invalid("ak_half needs the half variant");
    }
    let f = Field::new(spec.s)?;
    let gamma = gamma_set(&f, spec.ell)?;
    let fg = pairs(&f, &gamma);
    let xi = &fg[..spec.kappa];
    let mut out = Rows { field: &f, cells: Vec::with_capacity(spec.n_runs() * spec.n_factors()) };
    for x in f.elements() {
        let x2 = f.mul(x, x);
        for y in vectors(&f, spec.ell as usize - 1) {
            out.push(x);
            for (a, g) in &fg {
                out.push(f.add(f.mul(*a, x), dot(&f, g, &y)));
            }
            for (b, g) in xi {
                out.push(f.add(f.add(x2, f.mul(*b, x)), dot(&f, g, &y)));
            }
        }
    }
    Array::new(spec.n_runs(), spec.n_factors(), spec.s, out.cells)
}

/// Index-two construction for odd `s > 2`, built from a non-square.
pub fn ak_ext_odd(spec: &ConstructionSpec) -> Result<Array> {
    if spec.variant != Variant::OddExt {
        return invalid("ak_ext_odd needs the odd-ext variant");
    }
    let f = Field::new(spec.s)?;
    let omega = f.find_nonsquare()?;
    let gamma = gamma_set(&f, spec.ell)?;
    let fg = pairs(&f, &gamma);
    let xi: Vec<Elem> = f.elements().filter(|a| a.0 != 0).take(spec.kappa).collect();
    let beta0 = Elem(0);
    // (1 - 1/omega)/4, the shift applied with a^2 in the lower block
    let c = f.mul(f.sub(f.one(), f.inv(omega)?), f.inv(f.from_int(4))?);
    let mut out = Rows { field: &f, cells: Vec::with_capacity(spec.n_runs() * spec.n_factors()) };
    for lower in [false, true] {
        for x in f.elements() {
            for y in vectors(&f, spec.ell as usize - 1) {
                out.push(x);
                for (a, g) in &fg {
                    let mut v = f.add(f.mul(*a, x), dot(&f, g, &y));
                    if lower {
                        v = f.add(v, f.mul(c, f.mul(*a, *a)));
                    }
                    out.push(v);
                }
                for (b, g) in &fg {
                    let d = f.sub(x, *b);
                    let mut sq = f.mul(d, d);
                    if lower {
                        sq = f.mul(omega, sq);
                    }
                    out.push(f.add(sq, dot(&f, g, &y)));
                }
                for &a in &xi {
                    let d = f.sub(x, beta0);
                    let mut v = f.mul(d, d);
                    if lower {
                        v = f.sub(f.mul(omega, v), f.mul(c, f.mul(a, a)));
                    }
                    out.push(f.sub(v, f.mul(a, x)));
                }
            }
        }
    }
    Array::new(spec.n_runs(), spec.n_factors(), spec.s, out.cells)
}

/// Index-two construction for even `s > 2`, built from an element of trace one.
pub fn ak_ext_even(spec: &ConstructionSpec) -> Result<Array> {
    if spec.variant != Variant::EvenExt {
        return invalid("ak_ext_even needs the even-ext variant");
    }
    let f = Field::new(spec.s)?;
    let zeta = f.find_zeta()?;
    let gamma = gamma_set(&f, spec.ell)?;
    let fg = pairs(&f, &gamma);
    let xi: Vec<Elem> = f.elements().filter(|a| a.0 != 0).take(spec.kappa).collect();
    let mut out = Rows { field: &f, cells: Vec::with_capacity(spec.n_runs() * spec.n_factors()) };
    for lower in [false, true] {
        let shift = |e: Elem| if lower { f.mul(f.mul(e, e), zeta) } else { Elem(0) };
        for x in f.elements() {
            let x2 = f.mul(x, x);
            for y in vectors(&f, spec.ell as usize - 1) {
                out.push(x);
                for (a, g) in &fg {
                    out.push(f.sum(&[f.mul(*a, x), dot(&f, g, &y), shift(*a)]));
                }
                for (b, g) in &fg {
                    out.push(f.sum(&[x2, f.mul(*b, x), dot(&f, g, &y), shift(*b)]));
                }
                for &d in &xi {
                    out.push(f.sum(&[x2, f.mul(d, x), shift(d)]));
                }
            }
        }
    }
    Array::new(spec.n_runs(), spec.n_factors(), spec.s, out.cells)
}

/// Builds the array for any variant.
pub fn construct(spec: &ConstructionSpec) -> Result<Array> {
    match spec.variant {
        Variant::Half => ak_half(spec),
        Variant::OddExt => ak_ext_odd(spec),
        Variant::EvenExt => ak_ext_even(spec),
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CheckItem {
    pub label: String,
    pub pass: bool,
    pub detail: String,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ConstructionReport {
    pub items: Vec<CheckItem>,
}

impl ConstructionReport {
    pub fn all_pass(&self) -> bool {
        self.items.iter().all(|i| i.pass)
    }

    fn push(&mut self, label: impl Into<String>, pass: bool, detail: impl Into<String>) {
        self.items.push(CheckItem { label: label.into(), pass, detail: detail.into() });
    }
}

impl fmt::Display for ConstructionReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for item in &self.items {
            writeln!(f, "[{}] {}: {}", if item.pass { "PASS" } else { "FAIL" }, item.label, item.detail)?;
        }
        Ok(())
    }
}

fn strength2(a: &Array, cols: &[usize]) -> Result<bool> {
    if cols.len() < 2 {
        return Ok(true);
    }
    is_oa(&a.select_columns(cols)?, 2)
}

/// Checks the theorem items for an array built from `spec`: strength one,
/// the claimed strength-2 sub-blocks, and exact tolerance / unbalance (p = 1, 2, 3).
pub fn verify_construction(a: &Array, spec: &ConstructionSpec) -> Result<ConstructionReport> {
    let mut rep = ConstructionReport::default();
    let shape_ok = a.n_runs() == spec.n_runs() && a.n_factors() == spec.n_factors() && a.n_levels() == spec.s;
    rep.push(
        "shape",
        shape_ok,
        format!("{}x{} on {} levels (expected {}x{})", a.n_runs(), a.n_factors(), a.n_levels(), spec.n_runs(), spec.n_factors()),
    );
    if !shape_ok {
        return Ok(rep);
    }
    rep.push("(0) strength-one OA", is_oa(a, 1)?, "every level appears N/s times per column");
    let k = a.n_factors();
    match spec.variant {
        Variant::Half => {
            let lin: Vec<usize> = (0..spec.linear_width()).collect();
            rep.push("(1a) linear block is a strength-2 OA", strength2(a, &lin)?, format!("columns 1..{}", lin.len()));
            let quad: Vec<usize> = (spec.linear_width()..k).collect();
            rep.push("(1b) quadratic block is a strength-2 OA", strength2(a, &quad)?, format!("last {} columns", quad.len()));
        }
        _ => {
            let head: Vec<usize> = (0..2 * spec.linear_width() - 1).collect();
            rep.push("(1a) linear and quadratic blocks form a strength-2 OA", strength2(a, &head)?, format!("columns 1..{}", head.len()));
            let tail: Vec<usize> = (k - spec.kappa..k).collect();
            for removed in combinations(spec.kappa, spec.kappa - 1) {
                let drop: Vec<usize> = removed.iter().map(|&r| tail[r]).collect();
                let keep: Vec<usize> = (1..k).filter(|j| !drop.contains(j)).collect();
                let shown: Vec<usize> = drop.iter().map(|j| j + 1).collect();
                rep.push(
                    "(1b) without the first column and a (kappa-1)-subset of the last columns",
                    strength2(a, &keep)?,
                    format!("removed columns 1 and {shown:?}"),
                );
            }
        }
    }
    let tol = tolerance(a, 2)?;
    let want_tol = Rational::from_integer(spec.expected_tolerance() as i128);
    rep.push("(2) tolerance", tol == want_tol, format!("measured {tol}, closed form {want_tol}"));
    for p in 1..=3 {
        let unb = unbalance(a, 2, p)?;
        let want = Rational::from_integer(spec.expected_unbalance(p) as i128);
        rep.push(format!("(3) unbalance p={p}"), unb == want, format!("measured {unb}, closed form {want}"));
    }
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gamma_sets() {
        let f3 = Field::new(3).unwrap();
        assert_eq!(gamma_set(&f3, 2).unwrap(), vec![vec![Elem(1)]]);
        assert_eq!(gamma_set(&f3, 3).unwrap().len(), 4);
        let f2 = Field::new(2).unwrap();
        assert_eq!(
            gamma_set(&f2, 3).unwrap(),
            vec![vec![Elem(0), Elem(1)], vec![Elem(1), Elem(0)], vec![Elem(1), Elem(1)]]
        );
        assert!(gamma_set(&f2, 1).is_err());
    }

    #[test]
    fn spec_validation() {
        assert_eq!(ConstructionSpec::new(6, 2, 1, Variant::Half).unwrap_err(), AoaError::NotPrimePower(6));
        assert!(ConstructionSpec::new(4, 2, 1, Variant::OddExt).is_err());
        assert!(ConstructionSpec::new(5, 2, 1, Variant::EvenExt).is_err());
        assert!(ConstructionSpec::new(2, 2, 1, Variant::EvenExt).is_err());
        assert!(ConstructionSpec::new(5, 2, 5, Variant::OddExt).is_err());
        assert!(ConstructionSpec::new(3, 2, 4, Variant::Half).is_err());
        assert!(ConstructionSpec::new(3, 2, 3, Variant::Half).is_ok());
    }

    #[test]
    fn half_3_2_1() {
        let spec = ConstructionSpec::new(3, 2, 1, Variant::Half).unwrap();
        let a = ak_half(&spec).unwrap();
        assert_eq!((a.n_runs(), a.n_factors()), (9, 5));
        assert_eq!(a.row(4), &[2, 2, 3, 1, 3]);
        let rep = verify_construction(&a, &spec).unwrap();
        assert!(rep.all_pass(), "{rep}");
    }

    #[test]
    fn even_ext_with_three_quadratic_extras() {
        let spec = ConstructionSpec::new(4, 2, 3, Variant::EvenExt).unwrap();
        let a = ak_ext_even(&spec).unwrap();
        assert_eq!((a.n_runs(), a.n_factors()), (32, 12));
        assert_eq!(unbalance(&a, 2, 1).unwrap(), Rational::from_integer(192));
        assert!(verify_construction(&a, &spec).unwrap().all_pass());
    }

    #[test]
    fn corrupted_array_fails_verification() {
        let spec = ConstructionSpec::new(5, 2, 1, Variant::OddExt).unwrap();
        let mut a = ak_ext_odd(&spec).unwrap();
        assert!(verify_construction(&a, &spec).unwrap().all_pass());
        let v = a.get(0, 3);
        a.set(0, 3, v % 5 + 1).unwrap();
        assert!(!verify_construction(&a, &spec).unwrap().all_pass());
    }

    #[test]
    fn variant_parsing() {
        assert_eq!("odd-ext".parse::<Variant>().unwrap(), Variant::OddExt);
        assert!("full".parse::<Variant>().is_err());
        assert_eq!(Variant::EvenExt.to_string(), "even-ext");
    }
}
