use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use friedrichs::io::{self, fmt_f64, Metadata};
use friedrichs::thresholds::{self, Verdict};
use friedrichs::{config, oracle, par, presets, solver, spectral};
use friedrichs::{Error, Execution, FriedrichsModel, NumericalSettings, Result};
use serde_json::json;

#[derive(Parser)]
#[command(name = "friedrichs", version, about = "Bound states and embedded-eigenvalue thresholds of N-level Friedrichs models")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Count, locate and normalize every bound state below the continuum.
    Analyze {
        #[command(flatten)]
        model: ModelArgs,
    },
    /// Negative-eigenvalue count and ω_N − κ_n(0) across a range of λ.
    SweepLambda {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, default_value_t = 0.1)]
        lambda_min: f64,
        #[arg(long, default_value_t = 10.0)]
        lambda_max: f64,
        #[arg(long, default_value_t = 60)]
        lambda_steps: usize,
    },
    /// Eigencurves κ_n(E) on an energy grid, with their crossings of E.
    KappaCurves {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, default_value_t = -0.5, allow_negative_numbers = true)]
        e_min: f64,
        #[arg(long, default_value_t = -1e-6, allow_negative_numbers = true)]
        e_max: f64,
        #[arg(long, default_value_t = 400)]
        e_steps: usize,
    },
    /// Weak-coupling constants and the embedded-eigenvalue verdict.
    Thresholds {
        #[command(flatten)]
        model: ModelArgs,
    },
    /// Compare solver roots with a discretized Hamiltonian on growing grids.
    OracleCheck {
        #[command(flatten)]
        model: ModelArgs,
        /// Continuum node counts, comma separated.
        #[arg(long, value_delimiter = ',', default_value = "500,1000,2000,4000")]
        grid: Vec<usize>,
    },
}

#[derive(Args)]
#[command(group(clap::ArgGroup::new("source").required(true).args(["preset", "model"])))]
struct ModelArgs {
    /// Built-in model: hydrogen-4level or three-level-fig.
    #[arg(long)]
    preset: Option<String>,
    /// TOML model file.
    #[arg(long)]
    model: Option<PathBuf>,
    #[arg(long, conflicts_with = "lambda_sq", allow_negative_numbers = true)]
    lambda: Option<f64>,
    #[arg(long)]
    lambda_sq: Option<f64>,
    #[arg(long)]
    rel_tol: Option<f64>,
    #[arg(long)]
    abs_tol: Option<f64>,
    /// Disable the thread pool.
    #[arg(long)]
    sequential: bool,
    /// Output directory.
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

impl ModelArgs {
    fn load(&self) -> Result<(FriedrichsModel, NumericalSettings)> {
        let (mut model, mut settings) = match (&self.preset, &self.model) {
            (Some(name), None) => (presets::by_name(name)?, NumericalSettings::default()),
            (None, Some(path)) => {
                let l = config::load(path)?;
                (l.model, l.settings)
            }
            _ => return Err(Error::Config("give exactly one of --preset and --model".into())),
        };
        if let Some(l) = self.lambda {
            model = model.with_lambda(l);
        }
        if let Some(l2) = self.lambda_sq {
            if !(l2 >= 0.0) {
                return Err(Error::Config(format!("--lambda-sq must be nonnegative, got {l2}")));
            }
            model = model.with_lambda(l2.sqrt());
        }
        if let Some(t) = self.rel_tol {
            settings.quad.rel_tol = t;
        }
        if let Some(t) = self.abs_tol {
            settings.quad.abs_tol = t;
        }
        if self.sequential {
            settings.execution = Execution::Sequential;
        }
        settings.validate().map_err(|e| Error::Config(e.to_string()))?;
        std::fs::create_dir_all(&self.out).map_err(|e| Error::Config(format!("cannot create {}: {e}", self.out.display())))?;
        Ok((model, settings))
    }
}

fn analyze(args: &ModelArgs) -> Result<()> {
    let (model, settings) = args.load()?;
    let report = solver::solve(&model, &settings)?;
    let residuals = report
        .states
        .iter()
        .map(|st| solver::eigen_residual(&model, st, &settings))
        .collect::<Result<Vec<_>>>()?;
    let path = args.out.join("analyze.json");
    let data = json!({ "report": report, "residuals": residuals });
    io::write_json(&path, "friedrichs.analyze/1", &model, &settings, &data)?;
    println!("{} bound state(s) below the continuum", report.count);
    for st in &report.states {
        println!(
            "  n = {}  E = {:.12e}  |c|^2 = {:.6}  continuum = {:.3e}",
            st.branch + 1,
            st.energy,
            st.discrete_norm_sq(),
            st.continuum_norm_sq
        );
    }
    if !report.indeterminate.is_empty() {
        println!("  branches with kappa(0) within tolerance of 0: {:?}", report.indeterminate);
    }
    println!("wrote {}", path.display());
    Ok(())
}

fn lambda_grid(lo: f64, hi: f64, steps: usize) -> Result<Vec<f64>> {
    if !(lo >= 0.0 && hi >= lo && steps >= 1) || !hi.is_finite() {
        return Err(Error::Config(format!("bad lambda range [{lo}, {hi}] with {steps} steps")));
    }
    Ok(match steps {
        1 => vec![lo],
        _ if lo > 0.0 => thresholds::log_grid(lo, hi, steps),
        _ => (0..steps).map(|k| lo + (hi - lo) * k as f64 / (steps - 1) as f64).collect(),
    })
}

fn sweep_lambda(args: &ModelArgs, lo: f64, hi: f64, steps: usize) -> Result<()> {
    let (model, settings) = args.load()?;
    let grid = lambda_grid(lo, hi, steps)?;
    let inner = settings.sequential();
    let counts = par::try_map(settings.execution, &grid, |&l| solver::count_negative(&model.with_lambda(l), &inner))?;
    let n = model.n_levels();
    let top = model.levels()[n - 1];
    let mut header = vec!["lambda".to_string(), "count".to_string()];
    header.extend((1..=n).map(|k| format!("omega_N_minus_kappa_{k}_at_0")));
    let rows: Vec<Vec<String>> = grid
        .iter()
        .zip(&counts)
        .map(|(l, c)| {
            let mut r = vec![fmt_f64(*l), c.count.to_string()];
            r.extend(c.kappa_at_zero.iter().map(|k| fmt_f64(top - k)));
            r
        })
        .collect();
    let meta = Metadata::new(&model, &settings).with("command", "sweep-lambda");
    let path = args.out.join("sweep_lambda.csv");
    io::write_csv(&path, &meta, &header, &rows)?;
    let mut last = None;
    for (l, c) in grid.iter().zip(&counts) {
        if last != Some(c.count) {
            println!("lambda >= {l:.6e}: {} negative eigenvalue(s)", c.count);
            last = Some(c.count);
        }
    }
    println!("wrote {}", path.display());
    Ok(())
}

fn kappa_curves(args: &ModelArgs, lo: f64, hi: f64, steps: usize) -> Result<()> {
    let (model, settings) = args.load()?;
    if !(lo.is_finite() && hi.is_finite() && hi > lo && steps >= 2) {
        return Err(Error::Config(format!("bad energy range [{lo}, {hi}] with {steps} steps")));
    }
    let grid: Vec<f64> = (0..steps).map(|k| lo + (hi - lo) * k as f64 / (steps - 1) as f64).collect();
    let curve = spectral::kappa_curve(&model, &grid, &settings)?;
    let n = model.n_levels();
    let top = model.levels()[n - 1];
    let mut header = vec!["E".to_string()];
    header.extend((1..=n).map(|k| format!("kappa_{k}")));
    header.extend((1..=n).map(|k| format!("omega_N_minus_kappa_{k}")));
    header.push("omega_N_minus_E".into());
    let rows: Vec<Vec<String>> = curve
        .iter()
        .map(|p| {
            let mut r = vec![fmt_f64(p.energy)];
            r.extend(p.kappa.iter().map(|k| fmt_f64(*k)));
            r.extend(p.shifted(top).into_iter().map(fmt_f64));
            r.push(fmt_f64(top - p.energy));
            r
        })
        .collect();
    let meta = Metadata::new(&model, &settings).with("command", "kappa-curves");
    let path = args.out.join("kappa_curves.csv");
    io::write_csv(&path, &meta, &header, &rows)?;

    let mut hits: Vec<(usize, f64, String)> = Vec::new();
    if lo < 0.0 {
        let report = solver::solve(&model, &settings)?;
        for r in &report.roots {
            if r.energy >= lo && r.energy <= hi {
                hits.push((r.branch, r.energy, String::new()));
            }
        }
    }
    let positive: Vec<f64> = grid.iter().copied().filter(|&e| e > 0.0).collect();
    if positive.len() >= 2 {
        for c in solver::positive_candidate_scan(&model, &positive, &settings)? {
            hits.push((c.branch, c.energy, fmt_f64(c.zero_defect)));
        }
    }
    let side = args.out.join("kappa_intersections.csv");
    let rows: Vec<Vec<String>> = hits
        .iter()
        .map(|(b, e, d)| vec![(b + 1).to_string(), fmt_f64(*e), d.clone()])
        .collect();
    let header = ["branch", "E", "zero_defect"].map(String::from);
    io::write_csv(&side, &meta, &header, &rows)?;
    for (b, e, _) in &hits {
        println!("kappa_{} crosses E at {e:.12e}", b + 1);
    }
    println!("wrote {} and {}", path.display(), side.display());
    Ok(())
}

fn thresholds_cmd(args: &ModelArgs) -> Result<()> {
    let (model, settings) = args.load()?;
    let report = thresholds::verdict(&model, &settings)?;
    let json_path = args.out.join("thresholds.json");
    io::write_json(&json_path, "friedrichs.thresholds/1", &model, &settings, &report)?;
    let table = report.table();
    std::fs::write(args.out.join("thresholds.txt"), &table)?;
    print!("{table}");
    match report.verdict {
        Verdict::Certified => println!("status: certified (no embedded eigenvalue for this coupling)"),
        Verdict::NotCertified => println!("status: not certified (the bound says nothing either way)"),
        Verdict::Inapplicable => println!("status: inapplicable ({})", report.reason.as_deref().unwrap_or("hypothesis not met")),
    }
    println!("wrote {}", json_path.display());
    Ok(())
}

fn oracle_check(args: &ModelArgs, grid: &[usize]) -> Result<()> {
    let (model, settings) = args.load()?;
    if grid.is_empty() || grid.contains(&0) {
        return Err(Error::Config("--grid needs positive node counts".into()));
    }
    let table = oracle::compare_negative_spectrum(&model, grid, &settings)?;
    let header = ["m", "count", "solver_count", "root", "E_discrete", "E_solver", "abs_error", "rel_error", "fidelity"].map(String::from);
    let mut rows = Vec::new();
    for row in &table.rows {
        let base = |k: &str| vec![row.m.to_string(), row.count.to_string(), table.solver_count.to_string(), k.to_string()];
        if row.energies.is_empty() {
            let mut r = base("");
            r.extend(std::iter::repeat_n(String::new(), 5));
            rows.push(r);
        }
        for (k, e) in row.energies.iter().enumerate() {
            let mut r = base(&(k + 1).to_string());
            let pick = |v: &[f64]| v.get(k).map(|x| fmt_f64(*x)).unwrap_or_default();
            r.push(fmt_f64(*e));
            r.push(pick(&table.solver_energies));
            r.push(pick(&row.abs_errors));
            r.push(pick(&row.rel_errors));
            r.push(pick(&row.fidelity));
            rows.push(r);
        }
    }
    let meta = Metadata::new(&model, &settings)
        .with("command", "oracle-check")
        .with("converged", table.converged.to_string());
    let path = args.out.join("oracle_check.csv");
    io::write_csv(&path, &meta, &header, &rows)?;
    for row in &table.rows {
        let worst = row.rel_errors.iter().copied().fold(0.0, f64::max);
        println!("M = {:>6}: {} negative eigenvalue(s), worst relative error {worst:.3e}", row.m, row.count);
    }
    println!("wrote {}", path.display());
    if !table.converged {
        return Err(Error::OracleNonconvergence(format!(
            "solver finds {} root(s); the discretized spectrum did not settle",
            table.solver_count
        )));
    }
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Analyze { model } => analyze(&model),
        Command::SweepLambda { model, lambda_min, lambda_max, lambda_steps } => sweep_lambda(&model, lambda_min, lambda_max, lambda_steps),
        Command::KappaCurves { model, e_min, e_max, e_steps } => kappa_curves(&model, e_min, e_max, e_steps),
        Command::Thresholds { model } => thresholds_cmd(&model),
        Command::OracleCheck { model, grid } => oracle_check(&model, &grid),
    }
}

fn exit_code(e: &Error) -> u8 {
    if e.is_numerical() {
        3
    } else {
        2
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

