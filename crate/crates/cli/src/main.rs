use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use thiserror::Error;

use morse_cjs::algebra::{format::parse_complex, format::write_complex, homology, ChainComplex, HomologySummary};
use morse_cjs::continuation::format::parse_continuation;
use morse_cjs::flowcat::format::{parse_category, write_category};
use morse_cjs::flowcat::{cjs_cellular_complex, synthesize_embedding_dimensions, GradedFlowCategory};
use morse_cjs::localmodel::{
    anosov_cross_time, anosov_flow, blowdown_minus, blowdown_plus, verify_smoothness, BlowupChartPoint,
    ChartTransition,
};
use morse_cjs::morseflow::{
    compute_flow_category, write_trajectories, ManifoldModel, MorseFlowOptions, MorsePipeline, BUILTIN_NAMES,
};
use morse_cjs::sample;
use morse_cjs::suites::{run_suite, Suite, SuiteConfig};

#[derive(Parser, Debug)]
#[command(name = "morse-cjs", version, about = "Morse complexes of flow categories, continuation cones and blow-up charts")]
struct Cli {
    /// Seed for every randomized input.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Stabilization constant for the cellular complex.
    #[arg(long = "K", global = true)]
    stabilization: Option<i64>,
    /// Tolerance override (integrator tolerance for shooting, consistency
    /// tolerance for the blow-up table).
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Write the report to this file instead of standard output.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug, Clone)]
enum Command {
    /// Homology of a built-in surface, a flow category file, or a chain complex file.
    Homology { input: String },
    /// Run an invariant suite.
    Verify {
        suite: Suite,
        /// Certify the broken |t| chart as a regression control (expected to fail).
        #[arg(long)]
        broken_chart: bool,
    },
    /// Exact triangle report for a continuation file.
    Cone { file: PathBuf },
    /// Serialize a category, its Morse complex, or the computed flow lines.
    Export {
        input: String,
        #[arg(long, value_enum, default_value_t = ExportKind::Category)]
        what: ExportKind,
    },
    /// Smoothness and consistency tables for the blow-up charts.
    BlowupTable,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum ExportKind {
    Category,
    Complex,
    Trajectories,
}

/// Everything a run depends on.
#[derive(Clone, Debug)]
struct RunConfig {
    command: Command,
    seed: u64,
    stabilization: Option<i64>,
    tolerance: Option<f64>,
    out: Option<PathBuf>,
}

impl From<Cli> for RunConfig {
    fn from(cli: Cli) -> Self {
        RunConfig {
            command: cli.command,
            seed: cli.seed,
            stabilization: cli.stabilization,
            tolerance: cli.tol,
            out: cli.out,
        }
    }
}

#[derive(Debug, Error)]
enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {message}")]
    Parse { path: String, message: String },
    /// The report was produced but some check failed.
    #[error("verification failed")]
    Failed(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Failed(_) => 1,
            CliError::Usage(_) | CliError::Parse { .. } => 2,
        }
    }
}

enum Source {
    Builtin(Box<MorsePipeline>),
    Category(GradedFlowCategory),
    Complex(ChainComplex),
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))
}

fn flow_options(cfg: &RunConfig) -> MorseFlowOptions {
    let mut opts = MorseFlowOptions::default();
    if let Some(tol) = cfg.tolerance {
        opts.shooting.tolerance = tol;
    }
    opts
}

fn load(input: &str, cfg: &RunConfig) -> Result<Source, CliError> {
    if BUILTIN_NAMES.contains(&input) {
        let model = ManifoldModel::builtin(input).map_err(|e| CliError::Usage(e.to_string()))?;
        let pipe = compute_flow_category(&model, &flow_options(cfg)).map_err(|e| CliError::Failed(format!("{input}: {e}\n")))?;
        return Ok(Source::Builtin(Box::new(pipe)));
    }
    let path = Path::new(input);
    if !path.exists() {
        return Err(CliError::Usage(format!(
            "{input} is neither a built-in model ({}) nor a file",
            BUILTIN_NAMES.join(", ")
        )));
    }
    let text = read(path)?;
    let parse_err = |e: morse_cjs::ParseError| CliError::Parse {
        path: input.to_string(),
        message: e.to_string(),
    };
    let is_complex = text
        .lines()
        .map(|l| l.split('#').next().unwrap_or("").trim())
        .find(|l| !l.is_empty())
        .is_some_and(|l| l.starts_with("degrees"));
    if is_complex {
        parse_complex(&text).map(Source::Complex).map_err(parse_err)
    } else {
        parse_category(&text).map(Source::Category).map_err(parse_err)
    }
}

fn homology_table(h: &HomologySummary, c: &ChainComplex) -> String {
    if c.is_empty() {
        "empty complex\n".to_string()
    } else {
        h.table(c.k_min(), c.k_max())
    }
}

fn cmd_homology(input: &str, cfg: &RunConfig) -> Result<String, CliError> {
    let mut out = String::new();
    let category = match load(input, cfg)? {
        Source::Builtin(pipe) => {
            writeln!(out, "model {input}").unwrap();
            for p in &pipe.data.points {
                writeln!(out, "critical {} index {} value {:.9}", p.name, p.index, p.value).unwrap();
            }
            writeln!(out, "flow lines {}", pipe.lines.len()).unwrap();
            pipe.category
        }
        Source::Category(cat) => cat,
        Source::Complex(c) => {
            let violations = c.verify();
            if let Some(v) = violations.first() {
                return Err(CliError::Failed(format!("d^2 != 0: {v:?}\n")));
            }
            let h = homology(&c).map_err(|e| CliError::Failed(e.to_string()))?;
            out.push_str(&homology_table(&h, &c));
            return Ok(out);
        }
    };
    let violations = category.check_d_squared();
    if !violations.is_empty() {
        for v in &violations {
            writeln!(out, "d^2 != 0: {v}").unwrap();
        }
        return Err(CliError::Failed(out));
    }
    for ((i, j), n) in category.counts() {
        writeln!(out, "count {} -> {} = {n}", category.name(i), category.name(j)).unwrap();
    }
    let complex = category.morse_complex().map_err(|e| CliError::Failed(e.to_string()))?;
    let h = homology(&complex).map_err(|e| CliError::Failed(e.to_string()))?;
    out.push_str(&homology_table(&h, &complex));
    if let Some(k) = cfg.stabilization {
        let dims = synthesize_embedding_dimensions(&category, k).map_err(|e| CliError::Usage(e.to_string()))?;
        let cellular = cjs_cellular_complex(&category, &dims).map_err(|e| CliError::Failed(e.to_string()))?;
        let same = cellular == complex;
        writeln!(out, "cellular complex (K = {k}) equals Morse complex: {}", if same { "yes" } else { "NO" }).unwrap();
        if !same {
            return Err(CliError::Failed(out));
        }
    }
    Ok(out)
}

fn cmd_verify(suite: Suite, broken_chart: bool, cfg: &RunConfig) -> Result<String, CliError> {
    let mut config = SuiteConfig {
        seed: cfg.seed,
        tolerance: cfg.tolerance,
        broken_chart,
        ..SuiteConfig::default()
    };
    if let Some(k) = cfg.stabilization {
        if k < 2 {
            return Err(CliError::Usage(format!("--K must be at least 2, got {k}")));
        }
        config.stabilizations = vec![k];
    }
    let report = run_suite(suite, &config);
    let text = format!("{report}\n");
    if report.passed() {
        Ok(text)
    } else {
        Err(CliError::Failed(text))
    }
}

fn cmd_cone(file: &Path) -> Result<String, CliError> {
    let text = read(file)?;
    let fc = parse_continuation(&text).map_err(|e| CliError::Parse {
        path: file.display().to_string(),
        message: e.to_string(),
    })?;
    let mut out = String::new();
    let violations = fc.check_merged_d_squared();
    if !violations.is_empty() {
        for v in &violations {
            writeln!(out, "merged d^2 != 0: {v}").unwrap();
        }
        return Err(CliError::Failed(out));
    }
    let fail = |e: &dyn std::fmt::Display| CliError::Failed(format!("{e}\n"));
    for (label, cat) in [("source", fc.source()), ("target", fc.target())] {
        let c = cat.morse_complex().map_err(|e| fail(&e))?;
        let h = homology(&c).map_err(|e| fail(&e))?;
        writeln!(out, "H({label})").unwrap();
        out.push_str(&homology_table(&h, &c));
    }
    let report = fc.exact_triangle_report().map_err(|e| fail(&e))?;
    writeln!(out, "H(cone)").unwrap();
    out.push_str(&homology_table(&report.cone_homology, &report.cone));
    if report.cone_homology.is_zero() {
        writeln!(out, "cone is acyclic").unwrap();
    }
    writeln!(out, "{report}").unwrap();
    if report.holds() {
        Ok(out)
    } else {
        Err(CliError::Failed(out))
    }
}

fn cmd_export(input: &str, what: ExportKind, cfg: &RunConfig) -> Result<String, CliError> {
    match (load(input, cfg)?, what) {
        (Source::Builtin(pipe), ExportKind::Trajectories) => Ok(write_trajectories(&pipe.data, &pipe.lines)),
        (_, ExportKind::Trajectories) => Err(CliError::Usage("trajectories are only available for built-in models".into())),
        (Source::Builtin(pipe), ExportKind::Category) => Ok(write_category(&pipe.category)),
        (Source::Category(cat), ExportKind::Category) => Ok(write_category(&cat)),
        (Source::Complex(_), ExportKind::Category) => Err(CliError::Usage("a chain complex has no flow category".into())),
        (Source::Builtin(pipe), ExportKind::Complex) => morse_text(&pipe.category),
        (Source::Category(cat), ExportKind::Complex) => morse_text(&cat),
        (Source::Complex(c), ExportKind::Complex) => Ok(write_complex(&c)),
    }
}

fn morse_text(cat: &GradedFlowCategory) -> Result<String, CliError> {
    cat.morse_complex()
        .map(|c| write_complex(&c))
        .map_err(|e| CliError::Failed(format!("{e}\n")))
}

fn cmd_blowup_table(cfg: &RunConfig) -> Result<String, CliError> {
    let tol = cfg.tolerance.unwrap_or(1e-9);
    let mut rng = sample::rng(cfg.seed);
    let base: BlowupChartPoint<f64> = sample::random_chart_point(&mut rng, 2..=2, 0.0..=0.0);
    let mut out = String::new();
    writeln!(out, "x̂₋ = {:?}", base.xhat_minus()).unwrap();
    writeln!(out, "x̂₊ = {:?}", base.xhat_plus()).unwrap();
    writeln!(out, "\nconsistency of the blow-downs with the flow (tolerance {tol:e})").unwrap();
    writeln!(out, "{:>8} {:>14} {:>14}", "t", "cross time", "rel. error").unwrap();
    let mut ok = true;
    for t in [0.01, 0.1, 0.5, 1.0, 2.0, 5.0] {
        let c = BlowupChartPoint::new(t, base.xhat_minus().to_vec(), base.xhat_plus().to_vec())
            .map_err(|e| CliError::Usage(e.to_string()))?;
        let up = blowdown_plus(&c);
        let time = anosov_cross_time(&up).map_err(|e| CliError::Failed(e.to_string()))?;
        let flowed = anosov_flow(&up, time);
        let down = blowdown_minus(&c);
        let diff: f64 = flowed
            .x_minus
            .iter()
            .chain(&flowed.x_plus)
            .zip(down.x_minus.iter().chain(&down.x_plus))
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt();
        let size: f64 = down.x_minus.iter().chain(&down.x_plus).map(|x| x * x).sum::<f64>().sqrt();
        let err = diff / size;
        ok &= err <= tol;
        writeln!(out, "{t:>8} {time:>14.10} {err:>14.3e}").unwrap();
    }
    for map in ChartTransition::ALL {
        let report = verify_smoothness(map, base.xhat_minus(), base.xhat_plus(), 2, 1e-3, 4);
        let control = map == ChartTransition::BrokenBlowdownPlus;
        writeln!(out, "\n{report}").unwrap();
        if control {
            writeln!(out, "(control, expected to fail)").unwrap();
            ok &= !report.pass;
        } else {
            ok &= report.pass;
        }
    }
    if ok {
        Ok(out)
    } else {
        Err(CliError::Failed(out))
    }
}

fn run(cfg: &RunConfig) -> Result<String, CliError> {
    match &cfg.command {
        Command::Homology { input } => cmd_homology(input, cfg),
        Command::Verify { suite, broken_chart } => cmd_verify(*suite, *broken_chart, cfg),
        Command::Cone { file } => cmd_cone(file),
        Command::Export { input, what } => cmd_export(input, *what, cfg),
        Command::BlowupTable => cmd_blowup_table(cfg),
    }
}

fn emit(text: &str, out: Option<&Path>) -> Result<(), CliError> {
    match out {
        Some(path) => fs::write(path, text).map_err(|e| CliError::Usage(format!("cannot write {}: {e}", path.display()))),
        None => match std::io::stdout().lock().write_all(text.as_bytes()) {
            Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(CliError::Usage(format!("cannot write output: {e}"))),
            _ => Ok(()),
        },
    }
}

fn main() -> ExitCode {
    let cfg = RunConfig::from(Cli::parse());
    let result = run(&cfg);
    let report = match &result {
        Ok(text) | Err(CliError::Failed(text)) => Some(text.as_str()),
        Err(_) => None,
    };
    if let Some(text) = report {
        if let Err(e) = emit(text, cfg.out.as_deref()) {
            eprintln!("error: {e}");
            return ExitCode::from(e.code());
        }
    }
    match result {
        Ok(_) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code())
        }
    }
}
