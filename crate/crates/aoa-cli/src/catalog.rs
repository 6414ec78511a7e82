//! Array catalog: `<name>.txt` array files with `<name>.json` metric sidecars.

use std::fs;
use std::path::{Path, PathBuf};

use aoa_core::array::{tolerance, unbalance};
use aoa_core::discrepancy::{cd, md, wd};
use aoa_core::io::write_array;
use aoa_core::metrics::{d1, d2, d_value, LevelContrast};
use aoa_core::{Array, Rational};
use clap::{Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::{load_array, write, CliError};

const FLOAT_RTOL: f64 = 1e-9;

#[derive(Subcommand)]
pub enum CatalogOp {
    /// Copy an array into the catalog and record its metrics.
    Add {
        dir: PathBuf,
        file: PathBuf,
        #[arg(long, value_enum, default_value_t = Provenance::Imported)]
        provenance: Provenance,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        config: Option<String>,
        /// Entry name; defaults to `NxK_sS_<provenance>_<i>`.
        #[arg(long)]
        name: Option<String>,
    },
    /// List entries, optionally filtered by parameters.
    List {
        dir: PathBuf,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        k: Option<usize>,
        #[arg(long)]
        s: Option<u32>,
    },
    /// Recompute every snapshot and fail on any mismatch.
    Recheck { dir: PathBuf },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Provenance {
    Construction,
    Search,
    Ip,
    Imported,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Snapshot {
    pub tol2: String,
    pub unb1: String,
    pub unb2: String,
    pub d1: String,
    pub d2: String,
    pub d_f: Option<f64>,
    pub cd: f64,
    pub wd: f64,
    pub md: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CatalogEntry {
    pub file: String,
    pub n: usize,
    pub k: usize,
    pub s: u32,
    pub lambda: String,
    pub provenance: Provenance,
    pub seed: Option<u64>,
    pub config: Option<String>,
    pub metrics: Snapshot,
}

pub fn snapshot(a: &Array) -> Result<Snapshot, CliError> {
    let d_f = LevelContrast::default_for(a.n_levels()).and_then(|c| d_value(a, &c)).ok();
    Ok(Snapshot {
        tol2: tolerance(a, 2)?.to_string(),
        unb1: unbalance(a, 2, 1)?.to_string(),
        unb2: unbalance(a, 2, 2)?.to_string(),
        d1: d1(a)?.to_string(),
        d2: d2(a)?.to_string(),
        d_f,
        cd: cd(a),
        wd: wd(a),
        md: md(a),
    })
}

fn close(x: f64, y: f64) -> bool {
    (x - y).abs() <= FLOAT_RTOL * x.abs().max(y.abs()).max(1.0)
}

/// Names of the fields that differ between a stored and a fresh snapshot.
pub fn diff(stored: &Snapshot, fresh: &Snapshot) -> Vec<&'static str> {
    let mut out = vec![];
    let exact = [
        ("tol2", &stored.tol2, &fresh.tol2),
        ("unb1", &stored.unb1, &fresh.unb1),
        ("unb2", &stored.unb2, &fresh.unb2),
        ("d1", &stored.d1, &fresh.d1),
        ("d2", &stored.d2, &fresh.d2),
    ];
    for (name, a, b) in exact {
        if a != b {
            out.push(name);
        }
    }
    match (stored.d_f, fresh.d_f) {
        (None, None) => {}
        (Some(a), Some(b)) if close(a, b) => {}
        _ => out.push("d_f"),
    }
    for (name, a, b) in [("cd", stored.cd, fresh.cd), ("wd", stored.wd, fresh.wd), ("md", stored.md, fresh.md)] {
        if !close(a, b) {
            out.push(name);
        }
    }
    out
}

fn entries(dir: &Path) -> Result<Vec<PathBuf>, CliError> {
    let rd = fs::read_dir(dir).map_err(|e| CliError::Usage(format!("{}: {e}", dir.display())))?;
    let mut out: Vec<PathBuf> = rd
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .collect();
    out.sort();
    Ok(out)
}

fn load_entry(path: &Path) -> Result<CatalogEntry, String> {
    let text = fs::read_to_string(path).map_err(|e| e.to_string())?;
    serde_json::from_str(&text).map_err(|e| format!("corrupt sidecar: {e}"))
}

pub fn run(op: CatalogOp) -> Result<(), CliError> {
    match op {
        CatalogOp::Add { dir, file, provenance, seed, config, name } => {
            if !dir.is_dir() {
                return Err(CliError::Usage(format!("{} is not a directory", dir.display())));
            }
            let a = load_array(&file)?;
            let prov = format!("{provenance:?}").to_lowercase();
            let name = match name {
                Some(n) => n,
                None => (0..)
                    .map(|i| format!("{}x{}_s{}_{prov}_{i}", a.n_runs(), a.n_factors(), a.n_levels()))
                    .find(|n| !dir.join(format!("{n}.json")).exists())
                    .expect("unbounded range"),
            };
            let (txt, json) = (dir.join(format!("{name}.txt")), dir.join(format!("{name}.json")));
            if txt.exists() || json.exists() {
                return Err(CliError::Usage(format!("entry '{name}' already exists")));
            }
            let s2 = (a.n_levels() as i128).pow(2);
            let entry = CatalogEntry {
                file: format!("{name}.txt"),
                n: a.n_runs(),
                k: a.n_factors(),
                s: a.n_levels(),
                lambda: Rational::new(a.n_runs() as i128, s2).to_string(),
                provenance,
                seed,
                config,
                metrics: snapshot(&a)?,
            };
            write(&txt, &write_array(&a, &[]))?;
            write(&json, &(serde_json::to_string_pretty(&entry).expect("serialisable") + "\n"))?;
            println!("added {name}");
        }
        CatalogOp::List { dir, n, k, s } => {
            let mut bad = 0;
            for path in entries(&dir)? {
                match load_entry(&path) {
                    Ok(e) => {
                        if n.is_some_and(|v| v != e.n) || k.is_some_and(|v| v != e.k) || s.is_some_and(|v| v != e.s) {
                            continue;
                        }
                        println!(
                            "{} N={} k={} s={} provenance={:?} tol2={} unb1={} unb2={}",
                            e.file, e.n, e.k, e.s, e.provenance, e.metrics.tol2, e.metrics.unb1, e.metrics.unb2
                        );
                    }
                    Err(m) => {
                        bad += 1;
                        eprintln!("{}: {m}", path.display());
                    }
                }
            }
            if bad > 0 {
                return Err(CliError::Parse(format!("{bad} corrupt entries")));
            }
        }
        CatalogOp::Recheck { dir } => {
            let mut failures = 0;
            let paths = entries(&dir)?;
            for path in &paths {
                let label = path.display();
                let result = load_entry(path).and_then(|e| {
                    let a = load_array(&dir.join(&e.file)).map_err(|e| format!("{e:?}"))?;
                    if (a.n_runs(), a.n_factors(), a.n_levels()) != (e.n, e.k, e.s) {
                        return Err("shape differs from sidecar".into());
                    }
                    let fresh = snapshot(&a).map_err(|e| format!("{e:?}"))?;
                    let d = diff(&e.metrics, &fresh);
                    if d.is_empty() {
                        Ok(())
                    } else {
                        Err(format!("metrics mismatch: {}", d.join(", ")))
                    }
                });
                match result {
                    Ok(()) => println!("ok {label}"),
                    Err(m) => {
                        failures += 1;
                        println!("FAIL {label}: {m}");
                    }
                }
            }
            println!("{} entries, {failures} failures", paths.len());
            if failures > 0 {
                return Err(CliError::Verify(format!("{failures} catalog entries failed recheck")));
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn snapshot_survives_json_and_detects_edits() {
        let a = Array::from_rows(2, &[vec![1, 1, 1], vec![1, 2, 2], vec![2, 1, 2], vec![2, 2, 2]]).unwrap();
        let snap = snapshot(&a).unwrap();
        let back: Snapshot = serde_json::from_str(&serde_json::to_string(&snap).unwrap()).unwrap();
        assert!(diff(&back, &snap).is_empty());
        let b = Array::from_rows(2, &[vec![1, 1, 1], vec![1, 2, 2], vec![2, 1, 2], vec![2, 2, 1]]).unwrap();
        let d = diff(&snap, &snapshot(&b).unwrap());
        assert!(d.contains(&"unb2") && d.contains(&"tol2"));
    }
}
