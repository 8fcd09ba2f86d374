use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use trspec_core::classify::{classify_profile, Verdict, DEFAULT_TOL};
use trspec_core::modes::{assemble, default_window, semigroup_spectrum, spectrum_at, track_branches, window};
use trspec_core::perturb::{coefficients, monotonicity_with_cap, DEFAULT_N_STAR_CAP, MAX_ORDER};
use trspec_core::simulate::{
    default_grid, evolve, observables, resolve_rate, sample_random_ic, synthesize, FourierState, Rate,
    DEFAULT_AMPLITUDE,
};
use trspec_core::ModelSpec;

use crate::error::{output_err, AppError, AppResult, ModelContext};
use crate::formats::{
    coefficient_json, fmt_f64, from_json, spectrum_rows, to_json, write_observables_csv, write_semigroup_csv,
    write_sigma_csv, write_spectrum_csv, write_trajectory_csv, ClassificationJson, IcFile,
};
use crate::io::{load_model, read_to_string};
use crate::sweep::{self, SweepFile, SweepPlan};

#[derive(Debug, Parser)]
#[command(name = "trspec", version, about = "Spectra, stability classes and exact solutions of linear transport-reaction systems")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Eigenvalues of the mode matrices M(k) over |k|∞ ≤ K.
    Spectrum(SpectrumArgs),
    /// Stable / Turing / hyperbolic verdict for a one-dimensional model.
    Classify(ClassifyArgs),
    /// Exact Fourier evolution of random or given initial data.
    Simulate(SimulateArgs),
    /// Perturbation coefficients of the eigenvalue branches.
    Coeffs(CoeffsArgs),
    /// Classification over a grid of parameter values.
    Sweep(SweepArgs),
}

#[derive(Debug, Args)]
pub struct SpectrumArgs {
    #[arg(long)]
    pub model: PathBuf,
    /// Window radius; defaults to max(64, 4·K_pert).
    #[arg(long)]
    pub kmax: Option<u64>,
    /// CSV destination; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Also write e^{tλ} for this t.
    #[arg(long)]
    pub time: Option<f64>,
    /// Destination of the semigroup CSV; defaults to <out>_semigroup.csv.
    #[arg(long)]
    pub semigroup_out: Option<PathBuf>,
    /// Label branches by continuity in k instead of by descending real part.
    #[arg(long)]
    pub track: bool,
    #[arg(long)]
    pub gnuplot: bool,
}

#[derive(Debug, Args)]
pub struct ClassifyArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub kmax: Option<u64>,
    #[arg(long, default_value_t = DEFAULT_TOL)]
    pub tol: f64,
    /// JSON destination; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Σ(k) CSV destination; defaults to <out>_sigma.csv when --out is set.
    #[arg(long)]
    pub sigma_out: Option<PathBuf>,
    /// Exit with status 3 on an Indeterminate verdict.
    #[arg(long)]
    pub strict: bool,
    #[arg(long)]
    pub gnuplot: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Layout {
    /// One trajectory.csv with all times.
    Long,
    /// One snapshot_NNN.csv per time.
    Snapshots,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long)]
    pub model: PathBuf,
    /// Output times, comma separated, ascending.
    #[arg(long = "t", value_delimiter = ',', required = true, allow_negative_numbers = true)]
    pub times: Vec<f64>,
    /// Fourier cutoff K for random initial data; 100 when absent.
    #[arg(long)]
    pub kmax: Option<usize>,
    /// Grid points per axis; defaults to 2·(2K+2) rounded up to a power of two.
    #[arg(long)]
    pub nx: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = DEFAULT_AMPLITUDE)]
    pub amplitude: f64,
    /// Initial data file instead of random sampling.
    #[arg(long)]
    pub ic: Option<PathBuf>,
    /// Write the initial coefficients used to this file.
    #[arg(long)]
    pub save_ic: Option<PathBuf>,
    /// Plot e^{−ct}u: a number c or `auto` for the sampled growth bound.
    #[arg(long, default_value = "0", allow_negative_numbers = true)]
    pub rescale: String,
    #[arg(long, value_enum, default_value_t = Layout::Long)]
    pub layout: Layout,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub gnuplot: bool,
}

#[derive(Debug, Args)]
pub struct CoeffsArgs {
    #[arg(long)]
    pub model: PathBuf,
    /// Highest coefficient order reported.
    #[arg(long, default_value_t = 2 * DEFAULT_N_STAR_CAP + 1)]
    pub order: usize,
    /// Largest n tried when searching for the first nonzero odd coefficient.
    #[arg(long, default_value_t = DEFAULT_N_STAR_CAP)]
    pub cap: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(long)]
    pub sweep: PathBuf,
    /// Overrides the `output` field of the sweep file.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub fn run(cli: Cli) -> AppResult<()> {
    match cli.command {
        Command::Spectrum(a) => cmd_spectrum(&a),
        Command::Classify(a) => cmd_classify(&a),
        Command::Simulate(a) => cmd_simulate(&a),
        Command::Coeffs(a) => cmd_coeffs(&a),
        Command::Sweep(a) => cmd_sweep(&a),
    }
}

fn write_file(path: &Path, bytes: &[u8]) -> AppResult<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(output_err(dir))?;
    }
    fs::write(path, bytes).map_err(output_err(path))
}

fn emit(out: Option<&Path>, bytes: &[u8]) -> AppResult<()> {
    match out {
        Some(p) => write_file(p, bytes),
        None => std::io::stdout().write_all(bytes).map_err(output_err("<stdout>")),
    }
}

fn sibling(path: &Path, suffix: &str, ext: &str) -> PathBuf {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    path.with_file_name(format!("{stem}{suffix}.{ext}"))
}

fn file_name(path: &Path) -> String {
    path.file_name().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default()
}

fn check_finite(name: &str, x: f64) -> AppResult<()> {
    if x.is_finite() {
        Ok(())
    } else {
        Err(AppError::Input(format!("--{name} must be finite")))
    }
}

pub fn cmd_spectrum(a: &SpectrumArgs) -> AppResult<()> {
    let spec = load_model(&a.model)?;
    let k_max = a.kmax.unwrap_or_else(|| default_window(&spec));
    if let Some(t) = a.time {
        check_finite("time", t)?;
    }
    let semigroup_path = match (a.time, &a.semigroup_out, &a.out) {
        (None, _, _) => None,
        (Some(_), Some(p), _) => Some(p.clone()),
        (Some(_), None, Some(out)) => Some(sibling(out, "_semigroup", "csv")),
        (Some(_), None, None) => {
            return Err(AppError::Input("--time needs --out or --semigroup-out".into()));
        }
    };
    let modes = window(spec.dim(), k_max);
    let per_mode = modes
        .par_iter()
        .map(|k| spectrum_at(&spec, k))
        .collect::<trspec_core::Result<Vec<_>>>()
        .context("eigenvalue computation")?;
    let mut table = assemble(&spec, k_max, modes, per_mode);
    if a.track {
        let (tracked, warnings) = track_branches(&spec, &table).context("branch tracking")?;
        for w in warnings {
            eprintln!("warning: {w:?}");
        }
        table = tracked;
    }
    let mut buf = Vec::new();
    write_spectrum_csv(&mut buf, table.d, &spectrum_rows(&table)).map_err(output_err("<buffer>"))?;
    emit(a.out.as_deref(), &buf)?;
    if let (Some(t), Some(path)) = (a.time, &semigroup_path) {
        let mut buf = Vec::new();
        write_semigroup_csv(&mut buf, &table, &semigroup_spectrum(&table, t)).map_err(output_err(path))?;
        write_file(path, &buf)?;
    }
    if a.gnuplot {
        let out = a
            .out
            .as_ref()
            .ok_or_else(|| AppError::Input("--gnuplot needs --out".into()))?;
        let col = table.d + 2;
        let mut script = format!(
            "set datafile separator ','\nset key autotitle columnhead\nset xlabel 'Re'\nset ylabel 'Im'\nplot '{}' using {}:{} with points pt 7 ps 0.4 title 'sigma(M(k))'\n",
            file_name(out),
            col,
            col + 1
        );
        if let Some(p) = &semigroup_path {
            script.push_str(&format!(
                "pause -1\nplot '{}' using {}:{} with points pt 7 ps 0.4 title 'exp(t sigma)'\n",
                file_name(p),
                col + 1,
                col + 2
            ));
        }
        write_file(&sibling(out, "", "gp"), script.as_bytes())?;
    }
    Ok(())
}

pub fn cmd_classify(a: &ClassifyArgs) -> AppResult<()> {
    let spec = load_model(&a.model)?;
    if !(a.tol.is_finite() && a.tol >= 0.0) {
        return Err(AppError::Input("--tol must be a non-negative number".into()));
    }
    if spec.dim() != 1 {
        return Err(AppError::Input(format!("classification needs d = 1, model has d = {}", spec.dim())));
    }
    let k_max = a.kmax.unwrap_or_else(|| default_window(&spec));
    let r = k_max as i64;
    let profile = (-r..=r)
        .into_par_iter()
        .map(|k| spectrum_at(&spec, &[k]).map(|s| (k, s[0].re)))
        .collect::<trspec_core::Result<Vec<_>>>()
        .context("eigenvalue computation")?;
    let report = classify_profile(&spec, a.tol, k_max, profile).context("classification")?;
    let sigma_path = a.sigma_out.clone().or_else(|| a.out.as_ref().map(|o| sibling(o, "_sigma", "csv")));
    if let Some(p) = &sigma_path {
        let mut buf = Vec::new();
        write_sigma_csv(&mut buf, &report.sigma_profile).map_err(output_err(p))?;
        write_file(p, &buf)?;
    }
    let json = ClassificationJson::from_report(&report, sigma_path.as_ref().map(|p| p.display().to_string()));
    emit(a.out.as_deref(), to_json(&json).as_bytes())?;
    if a.gnuplot {
        let p = sigma_path.ok_or_else(|| AppError::Input("--gnuplot needs --out or --sigma-out".into()))?;
        let script = format!(
            "set datafile separator ','\nset key autotitle columnhead\nset xlabel 'k'\nset ylabel 'Sigma(k)'\nb = {}\nplot '{}' using 1:2 with linespoints pt 7 ps 0.4, b with lines dt 2 title 'b'\n",
            fmt_f64(report.b),
            file_name(&p)
        );
        write_file(&sibling(&p, "", "gp"), script.as_bytes())?;
    }
    if a.strict && report.verdict == Verdict::Indeterminate {
        return Err(AppError::Indeterminate);
    }
    Ok(())
}

fn parse_rate(s: &str) -> AppResult<Rate> {
    if s == "auto" {
        return Ok(Rate::Auto);
    }
    match s.parse::<f64>() {
        Ok(c) if c.is_finite() => Ok(Rate::Fixed(c)),
        _ => Err(AppError::Input(format!("--rescale expects `auto` or a number, got {s:?}"))),
    }
}

fn initial_state(a: &SimulateArgs, spec: &ModelSpec) -> AppResult<FourierState> {
    match &a.ic {
        Some(path) => {
            let ic: IcFile = from_json("initial data", &read_to_string(path)?)?;
            if ic.d != spec.dim() || ic.n != spec.components() {
                return Err(AppError::Input(format!(
                    "initial data has d = {}, N = {}; model has d = {}, N = {}",
                    ic.d,
                    ic.n,
                    spec.dim(),
                    spec.components()
                )));
            }
            if a.kmax.is_some_and(|k| k != ic.cutoff) {
                return Err(AppError::Input(format!("--kmax disagrees with K = {} of the initial data", ic.cutoff)));
            }
            ic.to_state()
        }
        None => {
            if !(a.amplitude.is_finite() && a.amplitude >= 0.0) {
                return Err(AppError::Input("--amplitude must be a non-negative number".into()));
            }
            sample_random_ic(spec, a.kmax.unwrap_or(100), a.seed, a.amplitude).context("initial data")
        }
    }
}

pub fn cmd_simulate(a: &SimulateArgs) -> AppResult<()> {
    let spec = load_model(&a.model)?;
    let rate = parse_rate(&a.rescale)?;
    for &t in &a.times {
        check_finite("t", t)?;
    }
    if a.times.windows(2).any(|w| w[0] > w[1]) {
        return Err(AppError::Input("--t values must be ascending".into()));
    }
    let u0 = initial_state(a, &spec)?;
    let grid = a.nx.unwrap_or_else(|| default_grid(u0.cutoff()));
    let need = 2 * u0.cutoff() + 2;
    if grid < need {
        return Err(AppError::Input(format!("--nx {grid} is below 2K+2 = {need}")));
    }
    let c = resolve_rate(&spec, u0.cutoff(), rate).context("growth bound")?;
    let results = a
        .times
        .par_iter()
        .map(|&t| {
            let u = evolve(&spec, &u0, t)?;
            let obs = observables(&spec, &u, t)?;
            let field = synthesize(&u, grid)?.scaled((-c * t).exp());
            Ok((t, field, obs))
        })
        .collect::<trspec_core::Result<Vec<_>>>()
        .context("simulation")?;
    fs::create_dir_all(&a.out).map_err(output_err(&a.out))?;
    let mut files = Vec::new();
    match a.layout {
        Layout::Long => {
            let snaps: Vec<_> = results.iter().map(|(t, f, _)| (*t, f.clone())).collect();
            let mut buf = Vec::new();
            let path = a.out.join("trajectory.csv");
            write_trajectory_csv(&mut buf, spec.length(), &snaps).map_err(output_err(&path))?;
            write_file(&path, &buf)?;
            files.push(path);
        }
        Layout::Snapshots => {
            for (i, (t, f, _)) in results.iter().enumerate() {
                let mut buf = Vec::new();
                let path = a.out.join(format!("snapshot_{i:03}.csv"));
                write_trajectory_csv(&mut buf, spec.length(), &[(*t, f.clone())]).map_err(output_err(&path))?;
                write_file(&path, &buf)?;
                files.push(path);
            }
        }
    }
    let obs: Vec<_> = results.into_iter().map(|r| r.2).collect();
    let mut buf = Vec::new();
    let obs_path = a.out.join("observables.csv");
    write_observables_csv(&mut buf, spec.components(), &obs).map_err(output_err(&obs_path))?;
    write_file(&obs_path, &buf)?;
    if let Some(p) = &a.save_ic {
        write_file(p, to_json(&IcFile::from_state(&u0)).as_bytes())?;
    }
    if a.gnuplot && spec.dim() == 1 {
        let mut script = String::from("set datafile separator ','\nset key autotitle columnhead\nset xlabel 'x'\n");
        for path in &files {
            for j in 1..=spec.components() {
                script.push_str(&format!(
                    "plot '{}' using 2:($3 == {j} ? $4 : 1/0) with lines title 'u{j}'\npause -1\n",
                    file_name(path)
                ));
            }
        }
        write_file(&a.out.join("trajectory.gp"), script.as_bytes())?;
    }
    Ok(())
}

pub fn cmd_coeffs(a: &CoeffsArgs) -> AppResult<()> {
    let spec = load_model(&a.model)?;
    if a.order == 0 || a.order > MAX_ORDER {
        return Err(AppError::Input(format!("--order must lie in 1..={MAX_ORDER}")));
    }
    let report = monotonicity_with_cap(&spec, a.cap).context("perturbation coefficients")?;
    let coeffs = (0..spec.components())
        .map(|j| coefficients(&spec, j, a.order))
        .collect::<trspec_core::Result<Vec<_>>>()
        .context("perturbation coefficients")?;
    emit(a.out.as_deref(), to_json(&coefficient_json(&report, coeffs)).as_bytes())
}

pub fn cmd_sweep(a: &SweepArgs) -> AppResult<()> {
    let file: SweepFile = from_json("sweep file", &read_to_string(&a.sweep)?)?;
    let plan = SweepPlan::from_file(file, a.out.clone())?;
    let rows = sweep::run(&plan)?;
    eprintln!("{} reports written to {}", rows.len(), plan.output.display());
    Ok(())
}
