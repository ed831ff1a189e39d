use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use tempora::uwform::FunctionSpec;
use tempora_cli::{run, selftest, CliError, CliResult, GridParams, Model, Pipeline, Report, RunConfig};

/// Time operators from spectra: build, decompose and verify.
#[derive(Debug, Parser)]
#[command(name = "tempora", version)]
struct Cli {
    /// JSON run configuration; command-line flags take precedence.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Directory for report.json and CSV tables; without it the report goes to stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Worker threads for channel and sweep parallelism.
    #[arg(long, global = true)]
    jobs: Option<usize>,

    /// Seed for random test vectors.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Tolerance override, `name=value`; repeatable.
    #[arg(long = "tol", global = true, value_parser = parse_tolerance)]
    tolerances: Vec<(String, f64)>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Build a model spectrum (and check the Rabi bounds for the Rabi model).
    Spectrum(ModelArgs),
    /// Split a spectrum into simple channels.
    Decompose(ModelArgs),
    /// Assemble per-channel time operators and verify the CCR.
    Timeop(ModelArgs),
    /// Ultra-weak time operator on the point spectrum.
    Uwform {
        #[command(flatten)]
        model: ModelArgs,
        /// Function spec as JSON, or a path to a JSON file.
        #[arg(long)]
        f: Option<String>,
    },
    /// Ultra-weak time operator of f(H).
    Ftransform {
        #[command(flatten)]
        model: ModelArgs,
        /// Function spec as JSON, or a path to a JSON file.
        #[arg(long)]
        f: Option<String>,
    },
    /// Spectrum of truncated oscillator time operators.
    Oscspec {
        #[arg(long)]
        omega: Option<f64>,
        /// Matrix sizes, comma separated.
        #[arg(long = "n", value_delimiter = ',')]
        n_list: Vec<usize>,
    },
    /// Weak Weyl relation of the Aharonov–Bohm operator on a periodic grid.
    Abweyl(GridArgs),
    /// Strong time operator of multiplication on L²(ℝ, ρ dλ).
    S0check {
        #[arg(long)]
        samples: Option<usize>,
    },
    /// Run the full acceptance suite.
    Selftest,
    /// Run the pipeline named in --config.
    Run,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ModelKind {
    Oscillator,
    Hydrogen,
    Rabi,
    Custom,
}

#[derive(Debug, Args)]
struct ModelArgs {
    #[arg(long, value_enum)]
    model: Option<ModelKind>,
    /// Oscillator frequencies (comma separated) or the Rabi field frequency.
    #[arg(long, value_delimiter = ',')]
    omega: Vec<f64>,
    #[arg(long)]
    n_max: Option<usize>,
    /// Hydrogen mass.
    #[arg(long)]
    m: Option<f64>,
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long)]
    mu: Option<f64>,
    #[arg(long)]
    g: Option<f64>,
    #[arg(long)]
    cutoff: Option<usize>,
    #[arg(long)]
    count: Option<usize>,
    /// Spectrum JSON file; implies the custom model.
    #[arg(long)]
    spectrum: Option<PathBuf>,
    /// Summability exponent of the channel decomposition.
    #[arg(long)]
    p: Option<f64>,
}

#[derive(Debug, Args)]
struct GridArgs {
    /// Half-width of the periodic box.
    #[arg(long = "L")]
    half_width: Option<f64>,
    /// Grid size, a power of two.
    #[arg(long = "N")]
    n: Option<usize>,
    #[arg(long)]
    m: Option<f64>,
    #[arg(long)]
    x0: Option<f64>,
    #[arg(long)]
    k0: Option<f64>,
    #[arg(long)]
    sigma: Option<f64>,
    #[arg(long)]
    tmax: Option<f64>,
    #[arg(long)]
    steps: Option<usize>,
}

fn parse_tolerance(s: &str) -> Result<(String, f64), String> {
    let (name, value) = s.split_once('=').ok_or("expected name=value")?;
    let value: f64 = value.parse().map_err(|e| format!("{value}: {e}"))?;
    Ok((name.trim().to_string(), value))
}

fn parse_function(text: &str) -> CliResult<FunctionSpec> {
    let path = Path::new(text);
    let json = if path.is_file() {
        std::fs::read_to_string(path).map_err(|e| CliError::Io { path: path.to_path_buf(), source: e })?
    } else {
        text.to_string()
    };
    serde_json::from_str(&json).map_err(|e| CliError::Config(format!("function spec: {e}")))
}

fn mismatch(flag: &str, model: &Model) -> CliError {
    let kind = serde_json::to_value(model).ok().and_then(|v| v["kind"].as_str().map(str::to_string)).unwrap_or_default();
    CliError::Config(format!("--{flag} does not apply to the {kind} model"))
}

fn build_model(args: &ModelArgs, base: Option<Model>) -> CliResult<Model> {
    let kind = match (args.model, &args.spectrum) {
        (None, Some(_)) => Some(ModelKind::Custom),
        (k, _) => k,
    };
    let mut model = match kind {
        Some(ModelKind::Oscillator) => Model::Oscillator { omega: vec![1.0], n_max: 20 },
        Some(ModelKind::Hydrogen) => Model::Hydrogen { m: 1.0, gamma: 1.0, n_max: 3 },
        Some(ModelKind::Rabi) => Model::Rabi { mu: 0.5, omega: 1.0, g: 0.3, cutoff: 200, count: 20 },
        Some(ModelKind::Custom) => Model::CustomSpectrum {
            path: args.spectrum.clone().ok_or_else(|| CliError::Config("--model custom needs --spectrum".into()))?,
        },
        None => base.unwrap_or(Model::Hydrogen { m: 1.0, gamma: 1.0, n_max: 3 }),
    };
    let snapshot = model.clone();
    let reject = |flags: &[(&str, bool)]| match flags.iter().find(|(_, present)| *present) {
        Some((flag, _)) => Err(mismatch(flag, &snapshot)),
        None => Ok(()),
    };
    match &mut model {
        Model::Oscillator { omega, n_max } => {
            if !args.omega.is_empty() {
                *omega = args.omega.clone();
            }
            if let Some(n) = args.n_max {
                *n_max = n;
            }
            reject(&[("m", args.m.is_some()), ("gamma", args.gamma.is_some()), ("mu", args.mu.is_some()), ("g", args.g.is_some()), ("cutoff", args.cutoff.is_some()), ("count", args.count.is_some())])?;
        }
        Model::Hydrogen { m, gamma, n_max } => {
            *m = args.m.unwrap_or(*m);
            *gamma = args.gamma.unwrap_or(*gamma);
            *n_max = args.n_max.unwrap_or(*n_max);
            reject(&[("omega", !args.omega.is_empty()), ("mu", args.mu.is_some()), ("g", args.g.is_some()), ("cutoff", args.cutoff.is_some()), ("count", args.count.is_some())])?;
        }
        Model::Rabi { mu, omega, g, cutoff, count } => {
            match args.omega.as_slice() {
                [] => {}
                [w] => *omega = *w,
                _ => return Err(CliError::Config("the rabi model takes a single --omega".into())),
            }
            *mu = args.mu.unwrap_or(*mu);
            *g = args.g.unwrap_or(*g);
            *cutoff = args.cutoff.unwrap_or(*cutoff);
            *count = args.count.unwrap_or(*count);
            reject(&[("m", args.m.is_some()), ("gamma", args.gamma.is_some()), ("n-max", args.n_max.is_some())])?;
        }
        Model::CustomSpectrum { path } => {
            if let Some(p) = &args.spectrum {
                *path = p.clone();
            }
        }
    }
    Ok(model)
}

fn same_kind(a: &Pipeline, b: &Pipeline) -> bool {
    std::mem::discriminant(a) == std::mem::discriminant(b)
}

/// The config file's pipeline if it has the requested kind, else `default`.
fn base_pipeline(config: &Option<RunConfig>, default: Pipeline) -> Pipeline {
    match config {
        Some(c) if same_kind(&c.pipeline, &default) => c.pipeline.clone(),
        _ => default,
    }
}

fn build_config(cli: &Cli) -> CliResult<Option<RunConfig>> {
    let file = cli.config.as_deref().map(RunConfig::from_path).transpose()?;
    let base_model = file.as_ref().and_then(|c| c.model.clone());
    let with_model = |args: &ModelArgs, pipeline: Pipeline| -> CliResult<RunConfig> {
        let mut c = RunConfig::new(Some(build_model(args, base_model.clone())?), pipeline);
        if let Some(p) = args.p.or(file.as_ref().map(|f| f.p)) {
            c.p = p;
        }
        Ok(c)
    };
    let mut config = match &cli.command {
        Command::Selftest => return Ok(None),
        Command::Run => file.clone().ok_or_else(|| CliError::Config("`run` needs --config".into()))?,
        Command::Spectrum(m) => with_model(m, Pipeline::Spectrum)?,
        Command::Decompose(m) => with_model(m, Pipeline::Decompose)?,
        Command::Timeop(m) => with_model(m, Pipeline::TimeOp)?,
        Command::Uwform { model, f } => {
            let mut p = base_pipeline(&file, Pipeline::UWForm { f: None });
            if let (Some(text), Pipeline::UWForm { f }) = (f, &mut p) {
                *f = Some(parse_function(text)?);
            }
            with_model(model, p)?
        }
        Command::Ftransform { model, f } => {
            let p = match (f, base_pipeline(&file, Pipeline::FTransform { f: FunctionSpec::Exp(1.0) })) {
                (Some(text), _) => Pipeline::FTransform { f: parse_function(text)? },
                (None, p @ Pipeline::FTransform { .. }) if file.as_ref().is_some_and(|c| same_kind(&c.pipeline, &p)) => p,
                _ => return Err(CliError::Config("ftransform needs --f or a config with an f spec".into())),
            };
            with_model(model, p)?
        }
        Command::Oscspec { omega, n_list } => {
            let mut p = base_pipeline(&file, Pipeline::OscSpectrum { omega: 1.0, n_list: vec![100, 200, 400, 800] });
            if let Pipeline::OscSpectrum { omega: w, n_list: list } = &mut p {
                *w = omega.unwrap_or(*w);
                if !n_list.is_empty() {
                    *list = n_list.clone();
                }
            }
            RunConfig::new(None, p)
        }
        Command::Abweyl(a) => {
            let mut p = base_pipeline(&file, Pipeline::ABWeyl(GridParams::default()));
            if let Pipeline::ABWeyl(g) = &mut p {
                g.half_width = a.half_width.unwrap_or(g.half_width);
                g.n = a.n.unwrap_or(g.n);
                g.m = a.m.unwrap_or(g.m);
                g.x0 = a.x0.unwrap_or(g.x0);
                g.k0 = a.k0.unwrap_or(g.k0);
                g.sigma = a.sigma.unwrap_or(g.sigma);
                g.tmax = a.tmax.unwrap_or(g.tmax);
                g.steps = a.steps.unwrap_or(g.steps);
            }
            RunConfig::new(None, p)
        }
        Command::S0check { samples } => {
            let mut p = base_pipeline(&file, Pipeline::S0Check { samples: 100 });
            if let (Some(n), Pipeline::S0Check { samples }) = (samples, &mut p) {
                *samples = *n;
            }
            RunConfig::new(None, p)
        }
    };
    if let Some(f) = &file {
        if !matches!(cli.command, Command::Run) {
            config.tolerances = f.tolerances.clone();
            config.seed = f.seed;
        }
    }
    config.tolerances.extend(cli.tolerances.iter().cloned());
    if let Some(seed) = cli.seed {
        config.seed = seed;
    }
    Ok(Some(config))
}

fn execute(cli: &Cli) -> CliResult<Report> {
    match build_config(cli)? {
        Some(config) => run(&config),
        None => {
            let file = cli.config.as_deref().map(RunConfig::from_path).transpose()?;
            let mut overrides: BTreeMap<String, f64> = file.as_ref().map(|f| f.tolerances.clone()).unwrap_or_default();
            overrides.extend(cli.tolerances.iter().cloned());
            let seed = cli.seed.or(file.map(|f| f.seed)).unwrap_or(0);
            selftest(&overrides, seed)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.jobs {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    let report = match execute(&cli) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    match &cli.out {
        Some(dir) => {
            if let Err(e) = report.write(dir) {
                eprintln!("error: {e}");
                return ExitCode::from(2);
            }
            for c in &report.checks {
                println!("{} {}", if c.passed { "PASS" } else { "FAIL" }, c.name);
            }
        }
        None => println!("{}", report.to_json()),
    }
    if report.passed { ExitCode::SUCCESS } else { ExitCode::from(1) }
}
