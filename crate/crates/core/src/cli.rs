//! The `cncdir` command-line tool. Data files are CSV, parameters and reports
//! JSON, human tables markdown. Every output starts with a metadata header
//! recording the tool version, seed and series tolerances.
//!
//! Exit codes: 0 on success, 2 for invalid input, 3 when a series or the
//! optimizer fails to converge.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use crate::bench::{run_grid, table4_strata, BenchOptions, BenchStratum};
use crate::error::{Error, Result};
use crate::inference::{
    fit_ml, ingest_square_csv, log_density, lr_battery, lr_test, read_simplex_csv, Family,
    FitOptions, ModelSpec,
};
use crate::models::{ParamSet, SimplexPoint};
use crate::moments::{
    cncdir_mixed_moment, cncdir_moment_11, cncdir_moment_series_oracle, MomentOrder,
};
use crate::sampling::{sample_dirichlet, sample_ncdir, CNcDirSampler, RandomStream};
use crate::specfun::SeriesControl;

const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Largest mixing-index budget of the moment oracle.
const MAX_ORACLE_TRUNCATION: u64 = 240;

#[derive(Debug, Parser)]
#[command(
    name = "cncdir",
    version,
    about = "Conditional non-central Dirichlet toolkit"
)]
pub struct Cli {
    #[command(flatten)]
    pub run: RunConfig,
    #[command(subcommand)]
    pub command: Command,
}

/// Settings shared by all subcommands.
#[derive(Debug, Clone, Args)]
pub struct RunConfig {
    /// Relative tolerance of the hypergeometric series (0 iterates to full precision).
    #[arg(long, global = true, env = "CNCDIR_TOL", default_value_t = 1e-10)]
    pub tol: f64,
    /// Term budget of every series.
    #[arg(long, global = true, env = "CNCDIR_MAXITER", default_value_t = 2000)]
    pub maxiter: usize,
    /// Seed of the random streams.
    #[arg(long, global = true, default_value_t = 1)]
    pub seed: u64,
    /// Worker threads for grids (0 uses every core).
    #[arg(long, global = true, default_value_t = 0)]
    pub threads: usize,
}

impl RunConfig {
    pub fn series(&self) -> Result<SeriesControl> {
        SeriesControl::new(self.tol, self.maxiter)
    }

    fn metadata(&self, command: &str) -> Value {
        json!({
            "tool": "cncdir",
            "version": VERSION,
            "command": command,
            "seed": self.seed,
            "tol": self.tol,
            "maxiter": self.maxiter,
        })
    }

    fn csv_header(&self, command: &str) -> String {
        format!(
            "# cncdir {VERSION} command={command} seed={} tol={} maxiter={}\n",
            self.seed, self.tol, self.maxiter
        )
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate a density on a lattice over the open triangle.
    DensityGrid(DensityGridArgs),
    /// Draw random points.
    Sample(SampleArgs),
    /// Maximum-likelihood fit, optionally with unit-shape constraints.
    Fit(FitArgs),
    /// Likelihood-ratio tests of the four unit-shape hypotheses.
    Lr(LrArgs),
    /// Mixed moment E[X1^r1 X2^r2] of the CNcDir law by closed form and oracle.
    Moments(MomentsArgs),
    /// Paired CNcDir/NcDir fitting-time study.
    Bench(BenchArgs),
    /// Convert points of the unit square into a simplex data file.
    Ingest(IngestArgs),
}

/// Parameters given either as a JSON file or inline.
#[derive(Debug, Clone, Args)]
pub struct ParamSource {
    /// Model family; read from the parameter file when omitted.
    #[arg(long)]
    pub model: Option<Family>,
    /// Parameter JSON: a bare parameter set or a fit report.
    #[arg(long)]
    pub params: Option<PathBuf>,
    /// Shape parameters, comma separated (used without --params).
    #[arg(long, value_delimiter = ',')]
    pub alpha: Option<Vec<f64>>,
    /// Non-centralities, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub lambda: Option<Vec<f64>>,
    /// Kummer-Beta tilt.
    #[arg(long, allow_negative_numbers = true)]
    pub delta: Option<f64>,
}

impl ParamSource {
    /// Family and parameters. Without any input the unit-shape, central
    /// member of the family is used.
    fn resolve(&self) -> Result<(Family, ParamSet)> {
        let (file_family, mut set) = match &self.params {
            Some(path) => read_params(path)?,
            None => (None, ParamSet::default()),
        };
        if let Some(a) = &self.alpha {
            set.alpha = a.clone();
        }
        if self.lambda.is_some() {
            set.lambda = self.lambda.clone();
        }
        if self.delta.is_some() {
            set.delta = self.delta;
        }
        let family = self
            .model
            .or(file_family)
            .ok_or_else(|| Error::domain("no model family given; use --model"))?;
        if set.alpha.is_empty() {
            set.alpha = vec![1.0; 3];
        }
        Ok((family, set))
    }
}

/// Accepts `{"alpha": ..}`, or any object with a `params` entry and an
/// optional `family`.
pub fn parse_params_json(text: &str) -> Result<(Option<Family>, ParamSet)> {
    let v: Value = serde_json::from_str(text)?;
    let family = match v.get("family").and_then(Value::as_str) {
        Some(f) => Some(f.parse::<Family>()?),
        None => None,
    };
    let body = v.get("params").cloned().unwrap_or(v);
    Ok((family, serde_json::from_value(body)?))
}

fn read_params(path: &Path) -> Result<(Option<Family>, ParamSet)> {
    let text =
        fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    parse_params_json(&text)
}

#[derive(Debug, Args)]
pub struct DensityGridArgs {
    #[command(flatten)]
    pub source: ParamSource,
    /// Lattice spacing; cells are centred at odd multiples of step/2.
    #[arg(long, default_value_t = 0.01)]
    pub step: f64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SampleMethod {
    /// Dirichlet given mixture-weight counts.
    Mixture,
    /// Normalized non-central chi-squared variables, conditioned on the total.
    Composition,
}

#[derive(Debug, Args)]
pub struct SampleArgs {
    #[command(flatten)]
    pub source: ParamSource,
    /// Number of points.
    #[arg(long, short = 'n', default_value_t = 1000)]
    pub n: usize,
    #[arg(long, value_enum, default_value_t = SampleMethod::Mixture)]
    pub method: SampleMethod,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct FitArgs {
    #[arg(long)]
    pub model: Family,
    /// Shapes pinned to one, e.g. `a1,a2,a3`.
    #[arg(long, default_value = "")]
    pub constrain: String,
    /// Two-column CSV of simplex points.
    #[arg(long)]
    pub data: PathBuf,
    /// Random starts of the optimizer.
    #[arg(long, default_value_t = 8)]
    pub starts: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct LrArgs {
    #[arg(long)]
    pub model: Family,
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long, default_value_t = 8)]
    pub starts: usize,
    /// Significance level of the selection rule.
    #[arg(long, default_value_t = 0.05)]
    pub level: f64,
    /// Output file; `.md` writes the markdown table, anything else JSON.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct MomentsArgs {
    #[command(flatten)]
    pub source: ParamSource,
    #[arg(long, default_value_t = 1)]
    pub r1: u64,
    #[arg(long, default_value_t = 1)]
    pub r2: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    /// `table4` or a JSON file with a list of strata.
    #[arg(long, default_value = "table4")]
    pub grid: String,
    /// Replications per cell of the built-in grid.
    #[arg(long, default_value_t = 30)]
    pub reps: usize,
    /// `.md` writes the markdown table, anything else JSON.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct IngestArgs {
    /// Two-column CSV of points in the unit square, optionally with a
    /// `# bbox xmin xmax ymin ymax` comment.
    #[arg(long)]
    pub input: PathBuf,
    /// Keep only points above the diagonal and reflect them into the simplex.
    #[arg(long)]
    pub upper_triangle: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(path) => {
            fs::write(path, text).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
        }
        None => {
            std::io::stdout().lock().write_all(text.as_bytes())?;
            Ok(())
        }
    }
}

fn emit_json(out: Option<&Path>, v: &Value) -> Result<()> {
    emit(out, &(serde_json::to_string_pretty(v)? + "\n"))
}

fn with_metadata(meta: Value, body: impl Serialize) -> Result<Value> {
    let mut v = serde_json::to_value(body)?;
    match v.as_object_mut() {
        Some(obj) => {
            obj.insert("metadata".into(), meta);
            Ok(v)
        }
        None => Ok(json!({ "metadata": meta, "result": v })),
    }
}

fn is_markdown(out: Option<&Path>) -> bool {
    out.and_then(Path::extension).is_some_and(|e| e == "md")
}

fn pool(threads: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::domain(format!("cannot start worker threads: {e}")))
}

fn fit_options(run: &RunConfig, starts: usize) -> Result<FitOptions> {
    Ok(FitOptions {
        starts: starts.max(1),
        seed: run.seed,
        ctl: run.series()?,
        ..FitOptions::default()
    })
}

/// `v` rounded to `digits` significant digits, so that values computed in
/// log space or on a lattice print without last-bit noise.
fn significant(v: f64, digits: usize) -> f64 {
    if v.is_finite() {
        format!("{v:.*e}", digits - 1).parse().unwrap_or(v)
    } else {
        v
    }
}

/// Rows `x1,x2,pdf` at the lattice points strictly inside the triangle.
/// Points whose series fail to converge get `NaN` and are counted in a
/// trailing comment.
pub fn density_grid(run: &RunConfig, args: &DensityGridArgs) -> Result<String> {
    let (family, params) = args.source.resolve()?;
    if params.alpha.len() != 3 {
        return Err(Error::domain(
            "density grids are bivariate: three shapes expected",
        ));
    }
    if !(args.step > 0.0 && args.step < 0.5) {
        return Err(Error::domain("grid step must lie in (0, 0.5)"));
    }
    let ctl = run.series()?;
    // validate once so that bad parameters fail instead of filling the grid
    let centre = SimplexPoint::bivariate(1.0 / 3.0, 1.0 / 3.0)?;
    match log_density(family, &params, &centre, ctl) {
        Err(e) if !e.is_convergence() => return Err(e),
        _ => {}
    }
    let n = (1.0 / args.step).floor() as usize;
    let cells: Vec<(f64, f64)> = (0..n)
        .flat_map(|i| (0..n).map(move |j| (i, j)))
        .map(|(i, j)| {
            let at = |k: usize| significant((k as f64 + 0.5) * args.step, 15);
            (at(i), at(j))
        })
        .filter(|(a, b)| a + b < 1.0)
        .collect();
    let values: Vec<Result<f64>> = pool(run.threads)?.install(|| {
        cells
            .par_iter()
            .map(|&(a, b)| {
                let x = SimplexPoint::bivariate(a, b)?;
                log_density(family, &params, &x, ctl).map(f64::exp)
            })
            .collect()
    });
    let mut s = run.csv_header("density-grid");
    s.push_str(&format!("# model={family} step={}\nx1,x2,pdf\n", args.step));
    let mut flagged = 0;
    for ((a, b), v) in cells.iter().zip(values) {
        let pdf = match v {
            Ok(v) => v,
            Err(e) if e.is_convergence() => {
                flagged += 1;
                f64::NAN
            }
            Err(e) => return Err(e),
        };
        s.push_str(&format!("{a},{b},{}\n", significant(pdf, 12)));
    }
    if flagged > 0 {
        s.push_str(&format!("# non-converged rows: {flagged}\n"));
    }
    Ok(s)
}

pub fn sample(run: &RunConfig, args: &SampleArgs) -> Result<String> {
    let (family, params) = args.source.resolve()?;
    let mut rng = RandomStream::new(run.seed);
    let points: Vec<SimplexPoint> = match family {
        Family::Dir => {
            let p = params.to_dir()?;
            (0..args.n)
                .map(|_| sample_dirichlet(&p, &mut rng))
                .collect::<Result<_>>()?
        }
        Family::NcDir => {
            let p = params.to_ncdir()?;
            (0..args.n)
                .map(|_| sample_ncdir(&p, &mut rng))
                .collect::<Result<_>>()?
        }
        Family::CNcDir => {
            let sampler = CNcDirSampler::new(&params.to_cncdir()?, run.series()?)?;
            (0..args.n)
                .map(|_| match args.method {
                    SampleMethod::Mixture => sampler.sample_mixture(&mut rng),
                    SampleMethod::Composition => sampler.sample_composition(&mut rng),
                })
                .collect::<Result<_>>()?
        }
        Family::Kb2 => {
            return Err(Error::domain(
                "no sampler is available for the Kummer-Beta family",
            ))
        }
    };
    let dim = params.alpha.len() - 1;
    let mut s = run.csv_header("sample");
    s.push_str(&format!("# model={family} n={}\n", args.n));
    let names: Vec<String> = (1..=dim).map(|i| format!("x{i}")).collect();
    s.push_str(&names.join(","));
    s.push('\n');
    for p in &points {
        let row: Vec<String> = p.coords().iter().map(f64::to_string).collect();
        s.push_str(&row.join(","));
        s.push('\n');
    }
    Ok(s)
}

/// Fit report with the likelihood-ratio test against the unconstrained
/// model when shapes are pinned.
pub fn fit(run: &RunConfig, args: &FitArgs) -> Result<Value> {
    let spec = ModelSpec::parse(args.model, &args.constrain)?;
    let data = read_simplex_csv(&args.data)?;
    let opts = fit_options(run, args.starts)?;
    let report = fit_ml(&spec, &data, &opts)?;
    let lr = if spec.constraints.is_empty() {
        Value::Null
    } else {
        let t = lr_test(&spec, &data, &opts)?;
        json!({ "w": t.w, "df": t.df, "p": t.p_value, "l1": t.l1 })
    };
    let mut v = with_metadata(run.metadata("fit"), &report)?;
    v["lr"] = lr;
    v["n"] = json!(data.len());
    Ok(v)
}

pub fn lr(run: &RunConfig, args: &LrArgs) -> Result<(Value, String)> {
    let data = read_simplex_csv(&args.data)?;
    let battery = lr_battery(args.model, &data, &fit_options(run, args.starts)?)?;
    let selected = battery.selected_fit(args.level)?;
    let mut v = with_metadata(run.metadata("lr"), &battery)?;
    v["selected"] = json!(selected.spec.hypothesis());
    v["level"] = json!(args.level);
    let md = format!(
        "<!-- cncdir {VERSION} command=lr seed={} tol={} maxiter={} n={} -->\n\n{}\nselected: {}\n",
        run.seed,
        run.tol,
        run.maxiter,
        data.len(),
        battery.to_markdown(),
        selected.spec.hypothesis()
    );
    Ok((v, md))
}

/// Closed-form moment, the truncated mixture oracle (truncation doubled
/// until the left-out mass is below 1e-12) and both forms of `E[X1 X2]`.
pub fn moments(run: &RunConfig, args: &MomentsArgs) -> Result<Value> {
    let (family, params) = args.source.resolve()?;
    if family != Family::CNcDir && family != Family::Dir {
        return Err(Error::domain(
            "moments are available for the cncdir and dir families",
        ));
    }
    let p = params.to_cncdir()?;
    let r = MomentOrder::new(args.r1, args.r2);
    let ctl = run.series()?;
    let closed_form = cncdir_mixed_moment(&p, r, ctl)?;
    let mut truncation = 30;
    let oracle = loop {
        let o = cncdir_moment_series_oracle(&p, r, truncation)?;
        if o.tail_mass < 1e-12 || truncation >= MAX_ORACLE_TRUNCATION {
            break o;
        }
        truncation *= 2;
    };
    Ok(json!({
        "metadata": run.metadata("moments"),
        "order": r,
        "closed_form": closed_form,
        "oracle": oracle.value,
        "oracle_tail_mass": oracle.tail_mass,
        "oracle_truncation": truncation,
        "reduced_11": cncdir_moment_11(&p, ctl)?,
    }))
}

pub fn bench(run: &RunConfig, args: &BenchArgs) -> Result<(Value, String)> {
    let strata: Vec<BenchStratum> = if args.grid == "table4" {
        table4_strata(args.reps)
    } else {
        let text =
            fs::read_to_string(&args.grid).map_err(|e| Error::Io(format!("{}: {e}", args.grid)))?;
        serde_json::from_str(&text)?
    };
    let mut opts = BenchOptions::default();
    opts.fit.ctl = run.series()?;
    opts.fit.seed = run.seed;
    let table = run_grid(&strata, run.seed, &opts)?;
    let mut v = with_metadata(run.metadata("bench"), &table)?;
    v["aggregate_speedup"] = json!(table.aggregate_speedup());
    let md = format!(
        "<!-- cncdir {VERSION} command=bench seed={} tol={} maxiter={} -->\n\n{}",
        run.seed,
        run.tol,
        run.maxiter,
        table.to_markdown()
    );
    Ok((v, md))
}

pub fn ingest(run: &RunConfig, args: &IngestArgs) -> Result<String> {
    let ing = ingest_square_csv(&args.input, args.upper_triangle)?;
    let mut s = run.csv_header("ingest");
    s.push_str(&format!(
        "# kept={} dropped_lower={} dropped_boundary={}\nx1,x2\n",
        ing.data.len(),
        ing.dropped_lower,
        ing.dropped_boundary
    ));
    for p in ing.data.points() {
        s.push_str(&format!("{},{}\n", p.coords()[0], p.coords()[1]));
    }
    Ok(s)
}

pub fn dispatch(cli: &Cli) -> Result<()> {
    let run = &cli.run;
    match &cli.command {
        Command::DensityGrid(a) => emit(a.out.as_deref(), &density_grid(run, a)?),
        Command::Sample(a) => emit(a.out.as_deref(), &sample(run, a)?),
        Command::Fit(a) => emit_json(a.out.as_deref(), &fit(run, a)?),
        Command::Lr(a) => {
            let (v, md) = lr(run, a)?;
            if is_markdown(a.out.as_deref()) {
                emit(a.out.as_deref(), &md)
            } else {
                emit_json(a.out.as_deref(), &v)
            }
        }
        Command::Moments(a) => emit_json(a.out.as_deref(), &moments(run, a)?),
        Command::Bench(a) => {
            let (v, md) = bench(run, a)?;
            if is_markdown(a.out.as_deref()) {
                emit(a.out.as_deref(), &md)
            } else {
                emit_json(a.out.as_deref(), &v)
            }
        }
        Command::Ingest(a) => emit(a.out.as_deref(), &ingest(run, a)?),
    }
}

pub fn exit_code(e: &Error) -> u8 {
    if e.is_convergence() {
        3
    } else {
        2
    }
}

pub fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("cncdir: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
