//! `aoa`: evaluate, construct, search and model almost-orthogonal arrays.

mod catalog;
mod report;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use aoa_core::constructions::{construct, verify_construction, ConstructionSpec, Variant};
use aoa_core::io::{parse_array, write_array};
use aoa_core::ip::{build_model, emit_lp, emit_mps, parse_solution, verify_solution, Aoa32Reading, IpInstance, IpSymmetry, VarKind};
use aoa_core::metrics::LevelContrast;
use aoa_core::search::{local_pareto_search, Encoding, SearchConfig};
use aoa_core::{AoaError, Array};
use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(name = "aoa", version, about = "Almost-orthogonal array workbench")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Report non-orthogonality metrics of an array file.
    Eval(EvalArgs),
    /// Build a finite-field construction and verify its claimed properties.
    Construct {
        /// half, odd-ext or even-ext
        variant: Variant,
        s: u32,
        ell: u32,
        kappa: usize,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Local Pareto search for small unbalance and tolerance.
    Search(SearchArgs),
    /// Emit the integer program as an LP file (and optionally MPS).
    Ip {
        #[command(flatten)]
        inst: IpArgs,
        #[arg(short, long)]
        out: PathBuf,
        #[arg(long)]
        mps: Option<PathBuf>,
    },
    /// Check a solver solution against the model and the array metrics.
    IpVerify {
        #[command(flatten)]
        inst: IpArgs,
        solution: PathBuf,
        /// Where to write the reconstructed array.
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Maintain a directory of arrays with metric snapshots.
    Catalog {
        #[command(subcommand)]
        op: catalog::CatalogOp,
    },
}

#[derive(Args)]
pub struct EvalArgs {
    pub path: PathBuf,
    /// Strength of the tuple counts.
    #[arg(long, default_value_t = 2)]
    pub t: usize,
    /// Comma-separated unbalance exponents.
    #[arg(long, value_delimiter = ',', default_values_t = [1, 2])]
    pub p: Vec<u32>,
    /// Level contrast for the D-value, e.g. `-1,0,1`.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub contrast: Option<Vec<f64>>,
    /// Also report D1, D2, the D-value and its bounds.
    #[arg(long)]
    pub d_criteria: bool,
    /// Also report CD, WD, MD, DD and the discrepancy bounds.
    #[arg(long)]
    pub discrepancies: bool,
}

#[derive(Args)]
struct SearchArgs {
    n: usize,
    k: usize,
    s: u32,
    #[arg(long, default_value_t = 1)]
    p: u32,
    /// plain, bicyclic or quasicyclic
    #[arg(long, default_value = "plain")]
    encoding: Encoding,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 2)]
    radius: usize,
    #[arg(long, default_value_t = 1)]
    restarts: usize,
    #[arg(long, default_value_t = 100_000)]
    max_passes: usize,
    /// Wall-clock budget per restart, seconds.
    #[arg(long)]
    budget: Option<f64>,
    /// Tolerance cap: minimise unbalance among arrays with tolerance at most this.
    #[arg(long)]
    tol_cap: Option<u64>,
    #[arg(long)]
    out_dir: Option<PathBuf>,
}

#[derive(Args)]
struct IpArgs {
    s: u32,
    k: usize,
    lambda: usize,
    #[arg(long, default_value_t = 1)]
    p: u32,
    #[arg(long, default_value_t = 1)]
    eps: i64,
    /// none, semicyclic:M, klein or semicyclic:M+klein
    #[arg(long, default_value = "none")]
    sym: IpSymmetry,
    /// block or literal
    #[arg(long, default_value = "block")]
    aoa32: Aoa32Reading,
}

impl IpArgs {
    fn instance(&self) -> Result<IpInstance, CliError> {
        let mut inst = IpInstance::new(self.s, self.k, self.lambda, self.p, self.eps)?.with_symmetry(self.sym)?;
        inst.aoa32 = self.aoa32;
        Ok(inst)
    }
}

/// Failure classes mapped onto the exit-code contract.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Parse(String),
    Verify(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Parse(_) => 2,
            CliError::Verify(_) => 3,
        }
    }
}

impl From<AoaError> for CliError {
    fn from(e: AoaError) -> Self {
        match e {
            AoaError::Parse { .. } => CliError::Parse(e.to_string()),
            _ => CliError::Usage(e.to_string()),
        }
    }
}

pub fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
}

pub fn write(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
}

pub fn load_array(path: &Path) -> Result<Array, CliError> {
    parse_array(&read(path)?)
        .map(|f| f.array)
        .map_err(|e| CliError::Parse(format!("{}: {e}", path.display())))
}

fn meta(pairs: &[(&str, String)]) -> Vec<(String, String)> {
    pairs.iter().map(|(k, v)| (k.to_string(), v.clone())).collect()
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.cmd {
        Cmd::Eval(args) => {
            let a = load_array(&args.path)?;
            let contrast = match &args.contrast {
                Some(v) => LevelContrast::new(v.clone())?,
                None => LevelContrast::default_for(a.n_levels())?,
            };
            print!("{}", report::eval_report(&a, &args, &contrast)?);
        }
        Cmd::Construct { variant, s, ell, kappa, out } => {
            let spec = ConstructionSpec::new(s, ell, kappa, variant)?;
            let a = construct(&spec)?;
            let rep = verify_construction(&a, &spec)?;
            let text = write_array(&a, &meta(&[("provenance", "construction".into()), ("spec", format!("{variant} {s} {ell} {kappa}"))]));
            match &out {
                Some(p) => write(p, &text)?,
                None => print!("{text}"),
            }
            println!("{}x{} on {} levels", a.n_runs(), a.n_factors(), s);
            print!("{rep}");
            if !rep.all_pass() {
                return Err(CliError::Verify("construction check failed".into()));
            }
        }
        Cmd::Search(args) => search(args)?,
        Cmd::Ip { inst, out, mps } => {
            let inst = inst.instance()?;
            let model = build_model(&inst)?;
            write(&out, &emit_lp(&model)?)?;
            if let Some(p) = mps {
                write(&p, &emit_mps(&model)?)?;
            }
            let count = |k: VarKind| model.variables.iter().filter(|v| v.kind == k).count();
            println!("model: {}", model.title);
            println!("binaries: {} (x: {}, z: {})", count(VarKind::Binary), model.n_vars_with_prefix("x_"), model.n_vars_with_prefix("z_"));
            println!("generals: {}", count(VarKind::Integer));
            println!("constraints: {}", model.constraints.len());
            println!("symmetry ties: {}", ["sim_", "kl3_", "kl4_", "klj_"].iter().map(|p| model.constraints_with_prefix(p)).sum::<usize>());
        }
        Cmd::IpVerify { inst, solution, out } => {
            let inst = inst.instance()?;
            let values = parse_solution(&read(&solution)?).map_err(|e| CliError::Parse(format!("{}: {e}", solution.display())))?;
            let rep = verify_solution(&inst, &values).map_err(|e| match e {
                AoaError::Parse { .. } => CliError::Parse(e.to_string()),
                other => CliError::Verify(other.to_string()),
            })?;
            let text = write_array(&rep.array, &meta(&[("provenance", "ip".into()), ("objective", rep.objective.to_string())]));
            match &out {
                Some(p) => write(p, &text)?,
                None => print!("{text}"),
            }
            println!("objective: {}", rep.objective);
            println!("strength-one term: {}", rep.strength_one_term);
            println!("unbalance(p={}): {}", inst.p, rep.unbalance);
            println!("tolerance: {}", rep.tolerance);
            println!("objective identity: {}", if rep.objective_identity { "holds" } else { "FAILS" });
            for v in &rep.violations {
                println!("{v}");
            }
            if !rep.ok() {
                return Err(CliError::Verify("solution does not verify".into()));
            }
        }
        Cmd::Catalog { op } => catalog::run(op)?,
    }
    Ok(())
}

fn search(args: SearchArgs) -> Result<(), CliError> {
    let cfg = SearchConfig {
        p: args.p,
        radius: args.radius,
        seed: args.seed,
        encoding: args.encoding,
        max_passes: args.max_passes,
        time_budget: args.budget.map(Duration::from_secs_f64),
        restarts: args.restarts,
        tol_cap: args.tol_cap,
    };
    let res = local_pareto_search(args.n, args.k, args.s, &cfg)?;
    let config = format!(
        "n={} k={} s={} p={} encoding={} seed={} radius={} restarts={} max_passes={} tol_cap={}",
        args.n,
        args.k,
        args.s,
        cfg.p,
        cfg.encoding,
        cfg.seed,
        cfg.radius,
        cfg.restarts,
        cfg.max_passes,
        cfg.tol_cap.map_or("none".into(), |c| c.to_string())
    );
    let mut summary = format!("# {config}\n# incomplete={}\n", res.incomplete);
    let mut csv = format!("unbalance_p{},tolerance\n", cfg.p);
    for (i, m) in res.front.members.iter().enumerate() {
        summary.push_str(&format!("front_{i}.txt unbalance={} tolerance={}\n", m.objective.unbalance, m.objective.tolerance));
        csv.push_str(&format!("{},{}\n", m.objective.unbalance, m.objective.tolerance));
    }
    if let Some(dir) = &args.out_dir {
        fs::create_dir_all(dir).map_err(|e| CliError::Usage(format!("{}: {e}", dir.display())))?;
        for (i, m) in res.front.members.iter().enumerate() {
            let text = write_array(
                &m.array,
                &meta(&[
                    ("provenance", "search".into()),
                    ("config", config.clone()),
                    ("unbalance", m.objective.unbalance.to_string()),
                    ("tolerance", m.objective.tolerance.to_string()),
                ]),
            );
            write(&dir.join(format!("front_{i}.txt")), &text)?;
        }
        write(&dir.join("front.txt"), &summary)?;
        write(&dir.join("front.csv"), &csv)?;
    }
    print!("{summary}");
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let (CliError::Usage(m) | CliError::Parse(m) | CliError::Verify(m)) = &e;
            eprintln!("error: {m}");
            ExitCode::from(e.code())
        }
    }
}
