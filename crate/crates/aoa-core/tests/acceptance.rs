//! Acceptance criteria 1-12: one PASS/FAIL line each, non-zero exit on any failure.

use std::time::{Duration, Instant};

use aoa_core::array::{
    full_factorial, hamming_similarities, lower_bound_unb22, lower_bound_unb22_lambda_two, tolerance, trivial_construct,
    trivial_unbalance, unbalance, unbalance2_via_hamming,
};
use aoa_core::constructions::{construct, verify_construction, ConstructionSpec, Variant};
use aoa_core::discrepancy::{check_discrepancy_bounds, dd, cd_coupling, md_coupling, wd_coupling, wd, wd_squared, DdParams, Kernel};
use aoa_core::ip::{build_model, canonical_assignment, canonical_row_order, emit_lp, enumerate_feasible, parse_lp, IpInstance};
use aoa_core::metrics::{d1, d2};
use aoa_core::search::{brute_force_optimum, local_pareto_search, Encoding, ObjectiveVector, SearchConfig};
use aoa_core::symmetry::{act, compress, equivalent, GroupElement, SymmetricEncoding, SymmetryKind};
use aoa_core::{Array, Rational};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn e<E: std::fmt::Display>(x: E) -> String {
    x.to_string()
}

fn int(r: Rational) -> i128 {
    assert!(r.is_integer());
    r.to_integer()
}

fn random_array(rng: &mut ChaCha8Rng, max_n: usize, min_k: usize, max_k: usize, max_s: u32) -> Array {
    let n = rng.gen_range(1..=max_n);
    let k = rng.gen_range(min_k..=max_k);
    let s = rng.gen_range(2..=max_s);
    let cells = (0..n * k).map(|_| rng.gen_range(1..=s)).collect();
    Array::new(n, k, s, cells).unwrap()
}

const HALF: [(u32, usize, i128, i128); 6] = [(3, 5, 18, 1), (4, 6, 48, 1), (5, 7, 100, 1), (7, 9, 294, 1), (8, 10, 448, 1), (9, 11, 648, 1)];
const EXT: [(u32, usize, i128, i128, i128); 6] =
    [(3, 8, 12, 18, 2), (4, 10, 32, 64, 2), (5, 12, 60, 150, 3), (7, 16, 140, 490, 5), (8, 18, 192, 768, 6), (9, 20, 252, 1134, 7)];

fn ext_variant(s: u32) -> Variant {
    if s % 2 == 0 {
        Variant::EvenExt
    } else {
        Variant::OddExt
    }
}

fn c1_trivial() -> Outcome {
    let mut n = 0;
    for s in 2..=10u32 {
        for lambda in 1..=2usize {
            let a = trivial_construct(&full_factorial(s, 2, lambda).map_err(e)?).map_err(e)?;
            for p in 1..=2 {
                let got = int(unbalance(&a, 2, p).map_err(e)?);
                let want = trivial_unbalance(lambda as u64, s as u64, p) as i128;
                ensure(got == want, || format!("s={s} lambda={lambda} p={p}: Unb {got} != closed form {want}"))?;
                n += 1;
            }
            let tol = int(tolerance(&a, 2).map_err(e)?);
            ensure(tol <= (lambda as i128) * (s as i128 - 1), || format!("s={s} lambda={lambda}: Tol {tol} too large"))?;
        }
    }
    Ok(format!("{n} (s, lambda, p) cases exact"))
}

fn c2_half() -> Outcome {
    for (s, k, unb2, tol) in HALF {
        let a = construct(&ConstructionSpec::new(s, 2, 1, Variant::Half).map_err(e)?).map_err(e)?;
        ensure(a.n_factors() == k, || format!("s={s}: k={} (want {k})", a.n_factors()))?;
        let got = (int(unbalance(&a, 2, 2).map_err(e)?), int(unbalance(&a, 2, 1).map_err(e)?), int(tolerance(&a, 2).map_err(e)?));
        // at tolerance one every deviation is 0 or +-1, so Unb_1 = Unb_2
        ensure(got == (unb2, unb2, tol), || format!("(s,k)=({s},{k}): (Unb2, Unb1, Tol) = {got:?}, want ({unb2}, {unb2}, {tol})"))?;
    }
    Ok("6 golden rows exact (Unb_2, Unb_1, Tol)".into())
}

fn c3_ext() -> Outcome {
    for (s, k, unb1, unb2, tol) in EXT {
        let a = construct(&ConstructionSpec::new(s, 2, 1, ext_variant(s)).map_err(e)?).map_err(e)?;
        ensure(a.n_factors() == k, || format!("s={s}: k={} (want {k})", a.n_factors()))?;
        let got = (int(unbalance(&a, 2, 1).map_err(e)?), int(unbalance(&a, 2, 2).map_err(e)?), int(tolerance(&a, 2).map_err(e)?));
        ensure(got == (unb1, unb2, tol), || format!("(s,k)=({s},{k}): got {got:?}, want ({unb1}, {unb2}, {tol})"))?;
    }
    Ok("6 golden rows exact (Unb_1, Unb_2, Tol)".into())
}

fn c4_sub_oa() -> Outcome {
    let specs = HALF
        .iter()
        .map(|r| (r.0, Variant::Half))
        .chain(EXT.iter().map(|r| (r.0, ext_variant(r.0))));
    let mut n = 0;
    for (s, v) in specs {
        let spec = ConstructionSpec::new(s, 2, 1, v).map_err(e)?;
        let rep = verify_construction(&construct(&spec).map_err(e)?, &spec).map_err(e)?;
        for label in ["(0)", "(1a)", "(1b)"] {
            let item = rep.items.iter().find(|i| i.label.starts_with(label)).ok_or_else(|| format!("{v} s={s}: no item {label}"))?;
            ensure(item.pass, || format!("{v} s={s}: {} failed: {}", item.label, item.detail))?;
            n += 1;
        }
    }
    Ok(format!("{n} items pass over 12 constructions"))
}

fn c5_certificates() -> Outcome {
    let mut n = 0;
    for s in [2u32, 3, 4, 5, 7, 8, 9] {
        for kappa in 1..=s as usize {
            let a = construct(&ConstructionSpec::new(s, 2, kappa, Variant::Half).map_err(e)?).map_err(e)?;
            let got = unbalance(&a, 2, 2).map_err(e)?;
            let bound = lower_bound_unb22(a.n_runs(), a.n_factors(), s).map_err(e)?;
            ensure(got == bound, || format!("half s={s} kappa={kappa}: Unb2 {got} != bound {bound}"))?;
            n += 1;
        }
    }
    for s in [3u32, 4, 5, 7, 8, 9] {
        let a = construct(&ConstructionSpec::new(s, 2, 1, ext_variant(s)).map_err(e)?).map_err(e)?;
        let got = int(unbalance(&a, 2, 2).map_err(e)?);
        let bound = lower_bound_unb22_lambda_two(s, 1);
        ensure(got == bound, || format!("ext s={s}: Unb2 {got} != bound {bound}"))?;
        n += 1;
    }
    Ok(format!("{n} arrays attain their bound (half: every kappa <= s)"))
}

fn c6_hamming() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for i in 0..1000 {
        let a = random_array(&mut rng, 20, 1, 8, 5);
        let t = rng.gen_range(1..=3.min(a.n_factors()));
        let (h, d) = (unbalance2_via_hamming(&a, t).map_err(e)?, unbalance(&a, t, 2).map_err(e)?);
        ensure(h == d, || format!("array #{i} t={t}: Hamming form {h} != direct {d}"))?;
    }
    let _ = hamming_similarities;
    Ok("1000 random arrays exact".into())
}

fn c7_oracle() -> Outcome {
    let mut states = 0;
    for p in [1, 2] {
        let r = brute_force_optimum(4, 4, 2, p, None).map_err(e)?;
        ensure(r.min_unbalance == Some(4), || format!("p={p}: min Unb {:?}", r.min_unbalance))?;
        ensure(r.min_tolerance == 1, || format!("p={p}: min Tol {:?}", r.min_tolerance))?;
        states = r.states;
    }
    Ok(format!("min Unb = 4 (p = 1, 2), min Tol = 1; {states} row multisets"))
}

fn c8_heuristic() -> Outcome {
    let cases = [(4usize, 4usize, 2u32, 1u32, Encoding::Plain, ObjectiveVector::new(4, 1)), (9, 5, 3, 2, Encoding::Bicyclic, ObjectiveVector::new(18, 1))];
    let mut notes = vec![];
    for (n, k, s, p, encoding, target) in cases {
        let cfg = SearchConfig { p, encoding, seed: 0, restarts: 10, ..SearchConfig::default() };
        let res = local_pareto_search(n, k, s, &cfg).map_err(e)?;
        let first = res.restart_fronts.iter().position(|f| f.contains(&target));
        let r = first.ok_or_else(|| format!("({n},{k},{s}) {encoding}: {target} not reached; front {:?}", res.front.objectives()))?;
        notes.push(format!("({n},{k},{s}) {encoding} reaches {target} at restart {}", r + 1));
    }
    Ok(notes.join("; "))
}

fn linear_oa(s: u32, k: usize, lambda: usize) -> Array {
    // columns u, v, u + c v (mod s) for prime s, c = 1..=k-2 (k <= s + 1)
    let f = full_factorial(s, 2, lambda).unwrap();
    let rows: Vec<Vec<u32>> = f
        .rows()
        .map(|r| {
            let (u, v) = (r[0] - 1, r[1] - 1);
            let mut row = vec![u + 1, v + 1];
            row.extend((1..=(k - 2) as u32).map(|c| (u + c * v) % s + 1));
            row
        })
        .collect();
    canonical_row_order(&Array::from_rows(s, &rows).unwrap()).unwrap()
}

fn c9_ip() -> Outcome {
    for (s, k, lambda) in [(2u32, 3usize, 1usize), (3, 4, 1), (2, 3, 2), (5, 5, 1), (5, 6, 1)] {
        for p in [1, 2] {
            let inst = IpInstance::new(s, k, lambda, p, 1).map_err(e)?;
            let model = build_model(&inst).map_err(e)?;
            let vals = canonical_assignment(&inst, &model, &linear_oa(s, k, lambda)).map_err(e)?;
            let v = model.violations(&vals);
            ensure(v.is_empty(), || format!("OA({s},{k},lambda={lambda}) p={p} infeasible: {}", v[0]))?;
            ensure(model.objective_value(&vals) == 0, || format!("OA({s},{k}) p={p}: non-zero objective"))?;
            let text = emit_lp(&model).map_err(e)?;
            let again = emit_lp(&parse_lp(&text).map_err(e)?).map_err(e)?;
            ensure(again == text, || format!("LP for ({s},{k},{lambda},p={p}) does not round-trip"))?;
        }
    }
    let res = enumerate_feasible(&IpInstance::new(2, 4, 1, 1, 1).map_err(e)?).map_err(e)?;
    ensure(res.optimum == Some(4), || format!("(2,4,1,p=1,eps=1) optimum {:?}", res.optimum))?;
    Ok(format!("OA assignments feasible at 0, LP round-trips, exhaustive optimum 4 ({} feasible of {})", res.feasible, res.candidates))
}

fn c10_d_values() -> Outcome {
    let a = construct(&ConstructionSpec::new(3, 2, 1, Variant::Half).map_err(e)?).map_err(e)?;
    let want = Rational::new(9, 5);
    ensure(d1(&a).map_err(e)? == want && d2(&a).map_err(e)? == want, || "D1/D2 of the (3,5) construction != 9/5".into())?;
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    for i in 0..200 {
        let a = random_array(&mut rng, 20, 2, 8, 5);
        let pairs = Rational::from_integer((a.n_factors() * (a.n_factors() - 1) / 2) as i128);
        ensure(d1(&a).map_err(e)? == unbalance(&a, 2, 1).map_err(e)? / pairs, || format!("array #{i}: D1 != Unb1/C(k,2)"))?;
        ensure(d2(&a).map_err(e)? == unbalance(&a, 2, 2).map_err(e)? / pairs, || format!("array #{i}: D2 != Unb2/C(k,2)"))?;
    }
    Ok("D1 = D2 = 9/5 exactly; 200 random arrays exact".into())
}

fn c11_discrepancy() -> Outcome {
    let kernels = [Kernel::Centered, Kernel::WrapAround, Kernel::Mixture];
    for kern in kernels {
        for i in 0..=40 {
            let x = i as f64 / 40.0;
            let gap = (kern.i1(x) - kern.i1_quadrature(x)).abs();
            ensure(gap <= 1e-10, || format!("{kern:?} I1({x}) off by {gap:e}"))?;
        }
        let gap = (kern.i2() - kern.i2_quadrature()).abs();
        ensure(gap <= 1e-10, || format!("{kern:?} I2 off by {gap:e}"))?;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut equalities = 0;
    for i in 0..200 {
        let a = random_array(&mut rng, 20, 1, 8, 5);
        let s = a.n_levels();
        for params in [cd_coupling(s), wd_coupling(s), md_coupling(s), DdParams::new(2.0, 0.5).unwrap()] {
            let gap = dd(&a, params).relative_gap().ok_or("unbalance form unavailable")?;
            ensure(gap <= 1e-9, || format!("array #{i}: DD forms differ by {gap:e}"))?;
        }
        for b in check_discrepancy_bounds(&a) {
            ensure(b.holds, || format!("array #{i} s={s}: {:?} {} > {}", b.kernel, b.lhs, b.rhs))?;
            if b.equality_expected {
                ensure(b.equality_holds, || format!("array #{i} s={s}: {:?} equality fails ({} vs {})", b.kernel, b.lhs, b.rhs))?;
                equalities += 1;
            }
        }
    }
    let half = construct(&ConstructionSpec::new(3, 2, 1, Variant::Half).map_err(e)?).map_err(e)?;
    let wd2 = wd_squared(&half);
    // the tabulated WD value is the squared discrepancy
    ensure((wd2 - 0.3386).abs() <= 5e-4, || format!("(3,5) WD^2 = {wd2:.6}, WD = {:.6}", wd(&half)))?;
    Ok(format!("quadrature <= 1e-10; 200 arrays: DD forms agree, bounds hold, {equalities} equality cases; (3,5) WD^2 = {wd2:.4}"))
}

fn random_element(rng: &mut ChaCha8Rng, s: u32, k: usize) -> GroupElement {
    let mut levels: Vec<u32> = (1..=s).collect();
    let mut columns: Vec<usize> = (0..k).collect();
    levels.shuffle(rng);
    columns.shuffle(rng);
    GroupElement::new(levels, columns).unwrap()
}

fn c12_symmetry() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for i in 0..500 {
        let a = random_array(&mut rng, 20, 2, 8, 5);
        let g = random_element(&mut rng, a.n_levels(), a.n_factors());
        let b = act(&g, &a).map_err(e)?;
        for t in 1..=2 {
            for p in 1..=2 {
                ensure(unbalance(&a, t, p).map_err(e)? == unbalance(&b, t, p).map_err(e)?, || format!("action #{i}: Unb_{{{p},{t}}} changed under {g}"))?;
            }
            ensure(tolerance(&a, t).map_err(e)? == tolerance(&b, t).map_err(e)?, || format!("action #{i}: Tol_{t} changed under {g}"))?;
        }
    }
    let bicyclic = Array::from_rows(
        3,
        &[vec![1, 1, 2, 3, 2], vec![3, 2, 2, 1, 3], vec![3, 1, 3, 2, 1], vec![1, 3, 2, 1, 1], vec![3, 2, 1, 2, 2], vec![2, 1, 3, 3, 3]],
    )
    .map_err(e)?;
    let enc = compress(&bicyclic, SymmetryKind::Bicyclic { r: 3 }).map_err(e)?;
    ensure(equivalent(&enc.expand().map_err(e)?, &bicyclic).map_err(e)?, || "bi-cyclic example does not round-trip".into())?;
    let quasi = SymmetricEncoding::new(
        SymmetryKind::Semicyclic { a: 2 },
        3,
        5,
        vec![vec![1, 1, 2, 3, 2], vec![1, 3, 2, 1, 1]],
        vec![vec![1; 5]],
    )
    .map_err(e)?;
    let expanded = quasi.expand().map_err(e)?;
    let back = compress(&expanded, SymmetryKind::Semicyclic { a: 2 }).map_err(e)?;
    ensure(equivalent(&back.expand().map_err(e)?, &expanded).map_err(e)?, || "quasi-cyclic example does not round-trip".into())?;
    Ok(format!("500 actions exact; examples round-trip ({} and {} runs)", bicyclic.n_runs(), expanded.n_runs()))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome, Duration); 12] = [
        ("trivial-construction closed forms", c1_trivial, Duration::from_secs(5)),
        ("half-construction golden values", c2_half, Duration::from_secs(10)),
        ("extension golden values", c3_ext, Duration::from_secs(30)),
        ("sub-OA structure", c4_sub_oa, Duration::MAX),
        ("optimality certificates", c5_certificates, Duration::MAX),
        ("Hamming identity", c6_hamming, Duration::from_secs(30)),
        ("brute-force oracle", c7_oracle, Duration::from_secs(60)),
        ("heuristic reproduction", c8_heuristic, Duration::from_secs(300)),
        ("IP model soundness", c9_ip, Duration::from_secs(120)),
        ("D1/D2 values", c10_d_values, Duration::MAX),
        ("discrepancy identities", c11_discrepancy, Duration::MAX),
        ("symmetry invariance", c12_symmetry, Duration::MAX),
    ];
    let mut failed = 0;
    for (i, (name, run, limit)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = run();
        let took = start.elapsed();
        let outcome = match outcome {
            Ok(msg) if took > *limit => Err(format!("{msg}; took {took:.2?}, limit {limit:?}")),
            other => other,
        };
        match outcome {
            Ok(msg) => println!("criterion {:>2} PASS [{took:.2?}] {name}: {msg}", i + 1),
            Err(msg) => {
                failed += 1;
                println!("criterion {:>2} FAIL [{took:.2?}] {name}: {msg}", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
