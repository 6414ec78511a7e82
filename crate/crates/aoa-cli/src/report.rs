//! Text report for `aoa eval`.

use std::fmt::Write as _;

use aoa_core::array::{bandwidth, is_oa, tolerance, unbalance};
use aoa_core::discrepancy::{cd_coupling, check_discrepancy_bounds, dd, md_squared, wd_squared, cd_squared};
use aoa_core::metrics::{check_dcriterion_bounds, d1, d2, d_value, LevelContrast};
use aoa_core::{Array, Rational};

use crate::{CliError, EvalArgs};

pub fn eval_report(a: &Array, args: &EvalArgs, contrast: &LevelContrast) -> Result<String, CliError> {
    let t = args.t;
    if t == 0 || t > a.n_factors() {
        return Err(CliError::Usage(format!("strength t={t} must lie in 1..={}", a.n_factors())));
    }
    let mut out = String::new();
    let s = a.n_levels();
    let lambda = Rational::new(a.n_runs() as i128, (s as i128).pow(t as u32));
    writeln!(out, "shape: N={} k={} s={}", a.n_runs(), a.n_factors(), s).unwrap();
    writeln!(out, "index(t={t}): {lambda}").unwrap();
    writeln!(out, "oa(t={t}): {}", is_oa(a, t)?).unwrap();
    writeln!(out, "tolerance(t={t}): {}", tolerance(a, t)?).unwrap();
    for &p in &args.p {
        if p == 0 {
            return Err(CliError::Usage("p must be positive".into()));
        }
        writeln!(out, "unbalance(p={p},t={t}): {}", unbalance(a, t, p)?).unwrap();
    }
    writeln!(out, "bandwidth(t={t}): {}", bandwidth(a, t)?).unwrap();
    if args.d_criteria {
        let (d1v, d2v) = (d1(a)?, d2(a)?);
        writeln!(out, "D1: {d1v} ({:.6})", ratio_f64(d1v)).unwrap();
        writeln!(out, "D2: {d2v} ({:.6})", ratio_f64(d2v)).unwrap();
        match d_value(a, contrast) {
            Ok(v) => writeln!(out, "D_f: {v:.6}").unwrap(),
            Err(e) => writeln!(out, "D_f: undefined ({e})").unwrap(),
        }
        match check_dcriterion_bounds(a, contrast) {
            Ok(r) => writeln!(out, "D_f bounds: {}", if r.all_pass() { "pass" } else { "FAIL" }).unwrap(),
            Err(e) => writeln!(out, "D_f bounds: not applicable ({e})").unwrap(),
        }
    }
    if args.discrepancies {
        for (name, sq) in [("CD", cd_squared(a)), ("WD", wd_squared(a)), ("MD", md_squared(a))] {
            writeln!(out, "{name}: {:.6} (squared {sq:.6})", sq.sqrt()).unwrap();
        }
        let v = dd(a, cd_coupling(s));
        writeln!(out, "DD(CD coupling) squared: {:.6}", v.squared()).unwrap();
        for b in check_discrepancy_bounds(a) {
            writeln!(
                out,
                "{:?} bound: {:.6} <= {:.6} {}{}",
                b.kernel,
                b.lhs,
                b.rhs,
                if b.holds { "holds" } else { "FAILS" },
                if b.equality_expected { if b.equality_holds { " (equality)" } else { " (equality FAILS)" } } else { "" }
            )
            .unwrap();
        }
    }
    Ok(out)
}

pub fn ratio_f64(r: Rational) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}
