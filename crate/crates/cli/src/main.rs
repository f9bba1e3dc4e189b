//! `inclab`: generate, validate and count ball/tube configurations, and run
//! the exponent sweeps.

use std::fmt;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::json;

use inclab::constructions::{furstenberg_config, generate, random_configuration, ConstructionId};
use inclab::experiments::{f_surface, fit_log2, furstenberg_check, measure_k_balls, sweep, SweepOptions, MAX_OBJECTS};
use inclab::incidence::{count_brute, count_grid};
use inclab::spacing::{ball_profile_brute, ball_profile_dyadic, fmt17, tube_profile, TubeMode};
use inclab::sumproduct::{ap_instance, cantor_instance, verify_instance};
use inclab::Configuration;

#[derive(Parser, Debug)]
#[command(name = "inclab", version, about = "Discretized ball/tube incidence laboratory")]
struct Cli {
    /// Worker threads (default: all cores). Results do not depend on it.
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Read the run from a TOML or JSON file instead of the command line.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,

    /// Write the resolved run as TOML before executing it.
    #[arg(long, global = true, value_name = "FILE")]
    save_config: Option<PathBuf>,

    /// Object-count guard for generated configurations.
    #[arg(long, global = true, env = "INCLAB_MAX_OBJECTS", default_value_t = MAX_OBJECTS)]
    max_objects: usize,

    #[command(subcommand)]
    command: Option<Command>,
}

/// A complete, reproducible run.
#[derive(Subcommand, Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "lowercase")]
enum Command {
    /// Build a configuration and write it as JSON.
    Generate(GenerateArgs),
    /// Measure spacing constants and check them against limits.
    Validate(ValidateArgs),
    /// Count incidences of a stored configuration.
    Count(CountArgs),
    /// Sweep a construction over k and fit the incidence exponent.
    Sweep(SweepArgs),
    /// Fit log2(y) against x from a CSV table.
    Fit(FitArgs),
    /// Size growth of Furstenberg configurations.
    Furstenberg(FurstenbergArgs),
    /// Sum-product instance checks.
    Sumproduct(SumProductArgs),
    /// Evaluate the exponent surface f(alpha, beta).
    Surface(SurfaceArgs),
}

#[derive(Args, Debug, Clone, PartialEq, Serialize, Deserialize)]
struct GenerateArgs {
    /// 1-4, or `random`.
    #[arg(long)]
    construction: String,
    #[arg(long, default_value_t = 1.0)]
    alpha: f64,
    #[arg(long, default_value_t = 1.0)]
    beta: f64,
    #[arg(long)]
    k: u32,
    /// Random configurations only.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 100)]
    balls: usize,
    #[arg(long, default_value_t = 100)]
    tubes: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
enum BallMode {
    /// Dyadic squares for lattice sets, radius-w balls for small others.
    Auto,
    Dyadic,
    Brute,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
enum TubeModeArg {
    DyadicNet,
    Brute,
}

impl From<TubeModeArg> for TubeMode {
    fn from(m: TubeModeArg) -> Self {
        match m {
            TubeModeArg::DyadicNet => TubeMode::DyadicNet,
            TubeModeArg::Brute => TubeMode::Brute,
        }
    }
}

#[derive(Args, Debug, Clone, PartialEq, Serialize, Deserialize)]
struct ValidateArgs {
    #[arg(long = "in")]
    input: PathBuf,
    /// Tube exponent; defaults to the configuration's own.
    #[arg(long)]
    alpha: Option<f64>,
    /// Ball exponent; defaults to the configuration's own.
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long, value_enum, default_value_t = BallMode::Auto)]
    ball_mode: BallMode,
    #[arg(long, value_enum, default_value_t = TubeModeArg::DyadicNet)]
    tube_mode: TubeModeArg,
    /// Largest accepted spacing constant.
    #[arg(long, default_value_t = 64.0)]
    max_k: f64,
    /// Directory for the per-level profile CSVs.
    #[arg(long)]
    profiles: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
enum Method {
    Grid,
    Brute,
}

#[derive(Args, Debug, Clone, PartialEq, Serialize, Deserialize)]
struct CountArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long, value_enum, default_value_t = Method::Grid)]
    method: Method,
    /// Include |P_t| and |T(p)| for every object.
    #[arg(long)]
    vectors: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug, Clone, PartialEq, Serialize, Deserialize)]
struct SweepArgs {
    #[arg(long)]
    construction: String,
    #[arg(long)]
    alpha: f64,
    #[arg(long)]
    beta: f64,
    #[arg(long)]
    k_min: u32,
    #[arg(long)]
    k_max: u32,
    /// Append wall-clock seconds to each row (not reproducible).
    #[arg(long)]
    timings: bool,
    /// Exit 2 unless the slope reaches f(alpha, beta) - 0.1 and no bound
    /// ratio grows faster than 0.1 per step.
    #[arg(long)]
    check: bool,
    /// CSV table; stdout when absent.
    #[arg(long)]
    csv: Option<PathBuf>,
    /// JSON summary with the fit.
    #[arg(long)]
    json: Option<PathBuf>,
}

#[derive(Args, Debug, Clone, PartialEq, Serialize, Deserialize)]
struct FitArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long, default_value = "k")]
    x: String,
    #[arg(long, default_value = "I")]
    y: String,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug, Clone, PartialEq, Serialize, Deserialize)]
struct FurstenbergArgs {
    #[arg(long)]
    u: f64,
    #[arg(long)]
    v: f64,
    #[arg(long, default_value_t = 6)]
    k_min: u32,
    #[arg(long, default_value_t = 10)]
    k_max: u32,
    /// Also write the configuration at k_max.
    #[arg(long)]
    config_out: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
enum Instance {
    /// A = B = C an arithmetic progression.
    Ap,
    /// A, B, C discrete Cantor sets of dimensions u, v, v'.
    Cantor,
}

#[derive(Args, Debug, Clone, PartialEq, Serialize, Deserialize)]
struct SumProductArgs {
    #[arg(long, value_enum, default_value_t = Instance::Ap)]
    instance: Instance,
    #[arg(long)]
    k: u32,
    #[arg(long, default_value_t = 0.5)]
    u: f64,
    #[arg(long, default_value_t = 0.5)]
    v: f64,
    #[arg(long, default_value_t = 0.5)]
    vp: f64,
    /// Spacing-check every incident family (slow for large k).
    #[arg(long)]
    validate_families: bool,
    /// Also write the ball/tube configuration in the unit-square frame.
    #[arg(long)]
    config_out: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug, Clone, PartialEq, Serialize, Deserialize)]
struct SurfaceArgs {
    #[arg(long, required_unless_present = "grid")]
    alpha: Option<f64>,
    #[arg(long, required_unless_present = "grid")]
    beta: Option<f64>,
    /// Print an (n + 1) × (n + 1) CSV grid over [0, 2]² instead.
    #[arg(long, conflicts_with_all = ["alpha", "beta"])]
    grid: Option<u32>,
}

/// A validation check failed; exit code 2.
#[derive(Debug)]
struct Failed(String);

impl fmt::Display for Failed {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Failed {}

fn emit(path: Option<&Path>, text: &str) -> anyhow::Result<()> {
    match path {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())?;
            if !text.ends_with('\n') {
                out.write_all(b"\n")?;
            }
            Ok(())
        }
    }
}

fn load(path: &Path) -> anyhow::Result<Configuration> {
    Configuration::load(path).with_context(|| format!("reading {}", path.display()))
}

fn construction(s: &str) -> anyhow::Result<ConstructionId> {
    s.parse().map_err(anyhow::Error::msg)
}

fn pretty<T: Serialize>(v: &T) -> anyhow::Result<String> {
    Ok(serde_json::to_string_pretty(v)?)
}

fn read_run(path: &Path) -> anyhow::Result<Command> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let cmd = if path.extension().is_some_and(|e| e == "json") {
        serde_json::from_str(&text)?
    } else {
        toml::from_str(&text)?
    };
    Ok(cmd)
}

fn run(cli: Cli) -> anyhow::Result<()> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    let cmd = match (cli.command, &cli.config) {
        (Some(_), Some(_)) => bail!("give either a subcommand or --config, not both"),
        (None, None) => bail!("no subcommand given (see --help)"),
        (Some(c), None) => c,
        (None, Some(p)) => read_run(p)?,
    };
    if let Some(p) = &cli.save_config {
        fs::write(p, toml::to_string(&cmd)?).with_context(|| format!("writing {}", p.display()))?;
    }
    let max_objects = cli.max_objects;
    match cmd {
        Command::Generate(a) => cmd_generate(&a, max_objects),
        Command::Validate(a) => cmd_validate(&a),
        Command::Count(a) => cmd_count(&a),
        Command::Sweep(a) => cmd_sweep(&a, max_objects),
        Command::Fit(a) => cmd_fit(&a),
        Command::Furstenberg(a) => cmd_furstenberg(&a),
        Command::Sumproduct(a) => cmd_sumproduct(&a),
        Command::Surface(a) => cmd_surface(&a),
    }
}

fn cmd_generate(a: &GenerateArgs, max_objects: usize) -> anyhow::Result<()> {
    let cfg = if a.construction == "random" {
        if a.balls > max_objects || a.tubes > max_objects {
            bail!(
                "size guard exceeded: {} balls, {} tubes > {max_objects}",
                a.balls,
                a.tubes
            );
        }
        random_configuration(a.k, a.balls, a.tubes, a.seed)?
    } else {
        generate(construction(&a.construction)?, a.k, a.alpha, a.beta)?
    };
    let n = cfg.balls.len().max(cfg.tubes.len());
    if n > max_objects {
        bail!("size guard exceeded: {n} objects > {max_objects}");
    }
    emit(a.out.as_deref(), &cfg.to_json()?)?;
    eprintln!(
        "{} balls, {} tubes at k = {}",
        cfg.balls.len(),
        cfg.tubes.len(),
        cfg.scale.k()
    );
    Ok(())
}

fn cmd_validate(a: &ValidateArgs) -> anyhow::Result<()> {
    let cfg = load(&a.input)?;
    let alpha = a.alpha.unwrap_or(cfg.meta.alpha);
    let beta = a.beta.unwrap_or(cfg.meta.beta);
    let uniform = cfg.check_uniform().err().map(|e| e.to_string());
    let balls = match a.ball_mode {
        BallMode::Auto => None,
        BallMode::Dyadic => Some(ball_profile_dyadic(cfg.scale, &cfg.balls, beta)?),
        BallMode::Brute => Some(ball_profile_brute(cfg.scale, &cfg.balls, beta)?),
    };
    let k_beta = match &balls {
        Some(p) => p.k_max().max(1.0),
        None => measure_k_balls(cfg.scale, &cfg.balls, beta)?,
    };
    let tubes = tube_profile(cfg.scale, &cfg.tubes, alpha, a.tube_mode.into())?;
    let k_alpha = tubes.k_max().max(1.0);
    if let Some(dir) = &a.profiles {
        fs::create_dir_all(dir)?;
        fs::write(dir.join("tubes.csv"), tubes.to_csv())?;
        if let Some(p) = &balls {
            fs::write(dir.join("balls.csv"), p.to_csv())?;
        }
    }
    let ok = uniform.is_none() && k_alpha <= a.max_k && k_beta <= a.max_k;
    let report = json!({
        "k": cfg.scale.k(),
        "alpha": alpha,
        "beta": beta,
        "n_balls": cfg.balls.len(),
        "n_tubes": cfg.tubes.len(),
        "uniform_error": uniform,
        "K_alpha": k_alpha,
        "K_beta": k_beta,
        "max_k": a.max_k,
        "ok": ok,
    });
    emit(a.out.as_deref(), &pretty(&report)?)?;
    if !ok {
        return Err(Failed(format!(
            "validation failed: K_alpha = {k_alpha}, K_beta = {k_beta}, limit {}",
            a.max_k
        ))
        .into());
    }
    Ok(())
}

fn cmd_count(a: &CountArgs) -> anyhow::Result<()> {
    let cfg = load(&a.input)?;
    let report = match a.method {
        Method::Grid => count_grid(&cfg.balls, &cfg.tubes),
        Method::Brute => count_brute(&cfg.balls, &cfg.tubes)?,
    };
    emit(a.out.as_deref(), &report.to_json(a.vectors)?)
}

fn cmd_sweep(a: &SweepArgs, max_objects: usize) -> anyhow::Result<()> {
    let id = construction(&a.construction)?;
    let opts = SweepOptions {
        max_objects,
        timings: a.timings,
    };
    let r = sweep(id, a.alpha, a.beta, a.k_min, a.k_max, &opts)?;
    emit(a.csv.as_deref(), &r.to_csv(a.timings))?;
    let bounds: Vec<_> = r
        .bounds
        .iter()
        .map(|b| json!({ "bound": b.bound.label(), "ratios": b.ratios, "slope": b.slope }))
        .collect();
    let slope_ok = r.fit.slope >= r.expected - 0.1;
    let bounds_ok = r.worst_bound_slope().is_none_or(|s| s <= 0.1);
    if let Some(p) = &a.json {
        let summary = json!({
            "construction": id.number(),
            "alpha": a.alpha,
            "beta": a.beta,
            "k_min": a.k_min,
            "k_max": a.k_max,
            "fit": r.fit,
            "expected": r.expected,
            "bounds": bounds,
            "slope_ok": slope_ok,
            "bounds_ok": bounds_ok,
        });
        emit(Some(p), &pretty(&summary)?)?;
    }
    eprintln!("slope {:.4} (f = {:.4}), R² {:.4}", r.fit.slope, r.expected, r.fit.r2);
    if a.check && !(slope_ok && bounds_ok) {
        return Err(Failed(format!(
            "sweep check failed: slope {:.4} vs f = {:.4}, worst bound slope {:?}",
            r.fit.slope,
            r.expected,
            r.worst_bound_slope()
        ))
        .into());
    }
    Ok(())
}

fn cmd_fit(a: &FitArgs) -> anyhow::Result<()> {
    let mut rdr = csv::Reader::from_path(&a.input).with_context(|| format!("reading {}", a.input.display()))?;
    let headers = rdr.headers()?.clone();
    let col = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .with_context(|| format!("no column {name:?} in {}", a.input.display()))
    };
    let (ix, iy) = (col(&a.x)?, col(&a.y)?);
    let (mut xs, mut ys) = (Vec::new(), Vec::new());
    for rec in rdr.records() {
        let rec = rec?;
        xs.push(
            rec[ix]
                .trim()
                .parse::<u32>()
                .with_context(|| format!("bad {} value {:?}", a.x, &rec[ix]))?,
        );
        ys.push(
            rec[iy]
                .trim()
                .parse::<f64>()
                .with_context(|| format!("bad {} value {:?}", a.y, &rec[iy]))?,
        );
    }
    let fit = fit_log2(&xs, &ys)?;
    emit(a.out.as_deref(), &pretty(&fit)?)
}

fn cmd_furstenberg(a: &FurstenbergArgs) -> anyhow::Result<()> {
    let r = furstenberg_check(a.u, a.v, a.k_min, a.k_max)?;
    emit(a.out.as_deref(), &pretty(&r)?)?;
    if let Some(p) = &a.config_out {
        furstenberg_config(a.k_max, a.u, a.v)?.to_configuration().save(p)?;
    }
    if !r.passes() {
        return Err(Failed(format!(
            "size slope {:.4} below bound exponent {:.4} - 0.15",
            r.union_fit.slope, r.bound_exponent
        ))
        .into());
    }
    Ok(())
}

fn cmd_sumproduct(a: &SumProductArgs) -> anyhow::Result<()> {
    let inst = match a.instance {
        Instance::Ap => ap_instance(a.k)?,
        Instance::Cantor => cantor_instance(a.k, a.u, a.v, a.vp)?,
    };
    let r = verify_instance(&inst, a.validate_families)?;
    emit(a.out.as_deref(), &pretty(&r)?)?;
    if let Some(p) = &a.config_out {
        inst.to_configuration().save(p)?;
    }
    if !r.structural_ok() {
        return Err(Failed("sum-product instance failed its structural checks".into()).into());
    }
    Ok(())
}

fn cmd_surface(a: &SurfaceArgs) -> anyhow::Result<()> {
    if let Some(n) = a.grid {
        if n == 0 {
            bail!("--grid needs at least one step");
        }
        let mut out = String::from("alpha,beta,f\n");
        for i in 0..=n {
            for j in 0..=n {
                let (al, be) = (2.0 * i as f64 / n as f64, 2.0 * j as f64 / n as f64);
                out.push_str(&format!("{},{},{}\n", fmt17(al), fmt17(be), fmt17(f_surface(al, be)?)));
            }
        }
        return emit(None, &out);
    }
    let (Some(al), Some(be)) = (a.alpha, a.beta) else {
        bail!("--alpha and --beta are required");
    };
    emit(None, &f_surface(al, be)?.to_string())
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
            eprintln!("error: {e:#}");
            if e.downcast_ref::<Failed>().is_some() {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}
