use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use wavegate::gatelab::calibrate::{
    build_gate, calibrate, calibrate_delays, CalibrationResult, SearchSpace,
};
use wavegate::gatelab::{
    discover_primitives, evaluate_gate, templates, truth_table, GateKind, GateLayout,
    PrimitiveCatalog,
};
use wavegate::meanfield::{density_experiment, MeanFieldPoly};
use wavegate::rle::{emit_rle, parse_any};
use wavegate::spectral::{fit_exponent, plateau_check, power_spectrum};
use wavegate::{Grid, Rect, RuleSpec};

mod output;

use output::{pbm, snapshot_path, write_atomic, write_text};

#[derive(Parser)]
#[command(
    name = "wavegate",
    version,
    about = "Life-like automaton runs, analyses and majority gates"
)]
struct Cli {
    /// Rule in B…/S… form.
    #[arg(long, global = true, default_value = "B2/S2345")]
    rule: RuleSpec,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evolve a pattern file or a seeded random soup.
    Run(RunArgs),
    /// Discover the primitive patterns and write them with their metrics.
    Catalog {
        #[arg(long)]
        out: PathBuf,
    },
    /// Mean-field polynomial and its fixed points, as JSON.
    Meanfield {
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Population and density curve of a seeded random start.
    Density(DensityArgs),
    /// Power spectrum of a window of a seeded random start.
    Spectrum(SpectrumArgs),
    /// Majority gates: calibrate, build, evaluate, tabulate.
    Gate {
        #[command(subcommand)]
        action: GateAction,
    },
}

#[derive(Args)]
struct RunArgs {
    /// Pattern file (RLE or plaintext); omit for a random soup.
    #[arg(long = "in")]
    input: Option<PathBuf>,
    #[arg(long)]
    width: Option<usize>,
    #[arg(long)]
    height: Option<usize>,
    #[arg(long)]
    steps: u64,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    density: Option<f64>,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    snapshot_every: Option<u64>,
}

#[derive(Args)]
struct DensityArgs {
    #[arg(long, default_value_t = 700)]
    width: usize,
    #[arg(long, default_value_t = 700)]
    height: usize,
    #[arg(long, default_value_t = 0.04)]
    density: f64,
    #[arg(long)]
    seed: u64,
    #[arg(long, default_value_t = 200)]
    steps: usize,
    /// CSV destination; the summary goes to stdout.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct SpectrumArgs {
    #[arg(long, default_value_t = 700)]
    width: usize,
    #[arg(long, default_value_t = 700)]
    height: usize,
    #[arg(long, default_value_t = 0.01)]
    density: f64,
    #[arg(long)]
    seed: u64,
    /// Series length T.
    #[arg(long, default_value_t = 1024)]
    steps: usize,
    #[arg(long, default_value = "325,325,50,50")]
    window: Rect,
    /// CSV destination for the spectrum; the summary goes to stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum KindArg {
    W3,
    W5,
    Cascade3,
}

impl From<KindArg> for GateKind {
    fn from(k: KindArg) -> Self {
        match k {
            KindArg::W3 => GateKind::W3,
            KindArg::W5 => GateKind::W5,
            KindArg::Cascade3 => GateKind::Cascade3,
        }
    }
}

#[derive(Subcommand)]
enum GateAction {
    /// Search particle parameters (w3) or timing (w5, cascade3, which
    /// start from a w3 calibration).
    Calibrate {
        #[arg(long, value_enum, default_value = "w3")]
        kind: KindArg,
        /// The w3 calibration to start from; calibrated first when omitted.
        #[arg(long = "in")]
        input: Option<PathBuf>,
        /// Calibration JSON; the candidate log goes next to it as `.csv`.
        #[arg(long)]
        out: PathBuf,
    },
    /// Write a layout file from a calibration.
    Build {
        #[arg(long, value_enum)]
        kind: KindArg,
        /// Calibration JSON.
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Evaluate a layout file on one input vector, e.g. `101`.
    Eval {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        bits: String,
    },
    /// Evaluate every input row against majority.
    Truthtable {
        #[arg(long, value_enum)]
        kind: KindArg,
        /// Calibration JSON for `kind`; calibrates from scratch when omitted.
        #[arg(long = "in")]
        input: Option<PathBuf>,
        /// Also write the table as JSON.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(e) = configure_threads() {
        eprintln!("error: {e:#}");
        return ExitCode::FAILURE;
    }
    match dispatch(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn configure_threads() -> Result<()> {
    let Ok(value) = std::env::var("WAVEGATE_THREADS") else {
        return Ok(());
    };
    let n: usize =
        value.parse().ok().filter(|&n| n > 0).with_context(|| {
            format!("WAVEGATE_THREADS must be a positive integer, got {value:?}")
        })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()?;
    Ok(())
}

/// `Ok(false)` when the command ran but a requested check failed.
fn dispatch(cli: Cli) -> Result<bool> {
    let rule = cli.rule;
    match cli.command {
        Command::Run(args) => cmd_run(&args, &rule).map(|()| true),
        Command::Catalog { out } => cmd_catalog(&out, &rule).map(|()| true),
        Command::Meanfield { out } => cmd_meanfield(out.as_deref(), &rule).map(|()| true),
        Command::Density(args) => cmd_density(&args, &rule).map(|()| true),
        Command::Spectrum(args) => cmd_spectrum(&args, &rule).map(|()| true),
        Command::Gate { action } => cmd_gate(action, &rule),
    }
}

fn read_grid(args: &RunArgs) -> Result<Grid> {
    if let Some(path) = &args.input {
        let text =
            std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let pattern = parse_any(&text)
            .with_context(|| format!("parsing {}", path.display()))?
            .pattern;
        // Default arena: the pattern box grown by the distance light travels.
        let pad = usize::try_from(args.steps)?;
        let width = args.width.unwrap_or(pattern.width() + 2 * pad);
        let height = args.height.unwrap_or(pattern.height() + 2 * pad);
        if pattern.width() > width || pattern.height() > height {
            bail!(
                "{}x{} pattern does not fit a {width}x{height} grid",
                pattern.width(),
                pattern.height()
            );
        }
        let x = (width - pattern.width()) / 2;
        let y = (height - pattern.height()) / 2;
        return Ok(Grid::new(width, height)?.place(&pattern, (x as i64, y as i64))?);
    }
    let (Some(width), Some(height)) = (args.width, args.height) else {
        bail!("a random soup needs --width and --height");
    };
    let density = args.density.context("give --in or --density")?;
    let seed = args.seed.context("random runs need an explicit --seed")?;
    Ok(Grid::random(width, height, density, seed)?)
}

fn cmd_run(args: &RunArgs, rule: &RuleSpec) -> Result<()> {
    let mut grid = read_grid(args)?;
    if args.snapshot_every == Some(0) {
        bail!("--snapshot-every must be positive");
    }
    let mut csv = String::from("step,population\n");
    csv.push_str(&format!("0,{}\n", grid.population()));
    if args.snapshot_every.is_some() {
        write_atomic(&snapshot_path(&args.out, 0), &pbm(&grid))?;
    }
    for _ in 0..args.steps {
        grid.tick(rule);
        let t = grid.generation();
        csv.push_str(&format!("{t},{}\n", grid.population()));
        if args.snapshot_every.is_some_and(|k| t % k == 0) {
            write_atomic(&snapshot_path(&args.out, t), &pbm(&grid))?;
        }
    }
    write_text(&args.out.join("population.csv"), &csv)?;
    let mut rle = emit_rle(&grid.to_pattern(), rule);
    rle.push('\n');
    write_text(&args.out.join("final.rle"), &rle)?;
    println!(
        "step {} population {}",
        grid.generation(),
        grid.population()
    );
    Ok(())
}

fn cmd_catalog(out: &Path, rule: &RuleSpec) -> Result<()> {
    let catalog = discover_primitives(rule)?;
    let entries = [
        ("still_life", &catalog.still_life),
        ("blinker", &catalog.blinker),
        ("oscillator", &catalog.oscillator),
        ("particle", &catalog.particle),
        ("indestructible", &catalog.indestructible),
    ];
    for (name, pattern) in entries {
        let mut rle = format!("#N {name}\n");
        rle.push_str(&emit_rle(pattern, rule));
        rle.push('\n');
        write_text(&out.join(format!("{name}.rle")), &rle)?;
    }
    let metrics: serde_json::Map<String, serde_json::Value> = catalog
        .metrics(rule)?
        .into_iter()
        .map(|(name, m)| Ok((name.replace(' ', "_"), serde_json::to_value(m)?)))
        .collect::<Result<_>>()?;
    write_text(
        &out.join("metrics.json"),
        &serde_json::to_string_pretty(&metrics)?,
    )?;
    println!("wrote {} primitives to {}", entries.len(), out.display());
    Ok(())
}

#[derive(Serialize)]
struct MeanFieldReport {
    rule: String,
    polynomial: String,
    /// `[power of p, power of q, coefficient]`.
    terms: Vec<(u32, u32, u64)>,
    fixed_points: Vec<wavegate::meanfield::FixedPoint>,
}

fn cmd_meanfield(out: Option<&Path>, rule: &RuleSpec) -> Result<()> {
    let poly = MeanFieldPoly::build(rule);
    let report = MeanFieldReport {
        rule: rule.to_string(),
        polynomial: poly.to_string(),
        terms: poly
            .coefficients()
            .iter()
            .map(|(&(a, b), &c)| (a, b, c))
            .collect(),
        fixed_points: poly.fixed_points(1e-12)?,
    };
    emit_json(out, &report)
}

fn emit_json<T: Serialize>(out: Option<&Path>, value: &T) -> Result<()> {
    let json = serde_json::to_string_pretty(value)?;
    match out {
        Some(path) => write_text(path, &format!("{json}\n")),
        None => {
            println!("{json}");
            Ok(())
        }
    }
}

#[derive(Serialize)]
struct DensitySummary {
    seed: u64,
    initial_population: u64,
    terminal_density: f64,
    growth_end: usize,
    fit: Option<wavegate::meanfield::QuadraticFit>,
    final_period: Option<u64>,
}

fn cmd_density(args: &DensityArgs, rule: &RuleSpec) -> Result<()> {
    let run = density_experiment(
        args.width,
        args.height,
        args.density,
        args.steps,
        args.seed,
        rule,
    )?;
    let mut csv = Vec::new();
    run.write_csv(&mut csv)?;
    write_atomic(&args.out, &csv)?;
    emit_json(
        None,
        &DensitySummary {
            seed: run.seed,
            initial_population: run.populations[0],
            terminal_density: run.terminal_density(),
            growth_end: run.growth_end,
            fit: run.fit,
            final_period: run.final_period,
        },
    )
}

#[derive(Serialize)]
struct SpectrumSummary {
    seed: u64,
    steps: usize,
    window: Rect,
    fit: wavegate::spectral::SpectrumFit,
    plateau: Option<wavegate::spectral::PlateauReport>,
}

fn cmd_spectrum(args: &SpectrumArgs, rule: &RuleSpec) -> Result<()> {
    let mut grid = Grid::random(args.width, args.height, args.density, args.seed)?;
    let trace = grid.record_window(rule, args.window, args.steps)?;
    let spectrum = power_spectrum(&trace)?;
    if let Some(path) = &args.out {
        let mut csv = Vec::new();
        spectrum.write_csv(&mut csv)?;
        write_atomic(path, &csv)?;
    }
    let nyquist = args.steps / 2;
    let plateau = if nyquist >= 100 {
        Some(plateau_check(&spectrum, (1, 10), (20, 100))?)
    } else {
        None
    };
    emit_json(
        None,
        &SpectrumSummary {
            seed: args.seed,
            steps: args.steps,
            window: args.window,
            fit: fit_exponent(&spectrum, 1, 10.min(nyquist))?,
            plateau,
        },
    )
}

fn load_calibration(path: &Path) -> Result<CalibrationResult> {
    let text =
        std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(CalibrationResult::from_json(&text)?)
}

fn parse_bits(bits: &str) -> Result<Vec<u8>> {
    bits.chars()
        .filter(|c| !matches!(c, ',' | ' '))
        .map(|c| match c {
            '0' => Ok(0),
            '1' => Ok(1),
            other => bail!("input bits must be 0 or 1, got {other:?}"),
        })
        .collect()
}

/// `w3` searches its full space; the others search timing on top of `w3`.
fn run_calibration(
    kind: GateKind,
    w3: Option<&CalibrationResult>,
    catalog: &PrimitiveCatalog,
    rule: &RuleSpec,
) -> wavegate::Result<CalibrationResult> {
    match (kind, w3) {
        (GateKind::W3, _) | (_, None) => {
            calibrate(GateKind::W3, catalog, rule, &SearchSpace::default())
        }
        (GateKind::W5, Some(w3)) => {
            calibrate_delays(kind, w3, catalog, rule, &SearchSpace::default().phases)
        }
        (GateKind::Cascade3, Some(w3)) => {
            let delays: Vec<u32> = (0..=templates::cascade().max_delay).collect();
            calibrate_delays(kind, w3, catalog, rule, &delays)
        }
    }
}

fn cmd_gate(action: GateAction, rule: &RuleSpec) -> Result<bool> {
    let catalog = discover_primitives(rule)?;
    match action {
        GateAction::Calibrate { kind, input, out } => {
            let kind = GateKind::from(kind);
            let w3 = match (kind, input) {
                (GateKind::W3, Some(_)) => bail!("w3 calibration starts from scratch; drop --in"),
                (GateKind::W3, None) => None,
                (_, Some(path)) => Some(load_calibration(&path)?),
                (_, None) => Some(calibrate(
                    GateKind::W3,
                    &catalog,
                    rule,
                    &SearchSpace::default(),
                )?),
            };
            let result = run_calibration(kind, w3.as_ref(), &catalog, rule);
            let log = match &result {
                Ok(c) => c.log_csv(),
                Err(wavegate::Error::CalibrationFailure { log, .. }) => log.to_csv(),
                Err(_) => String::new(),
            };
            if !log.is_empty() {
                write_text(&out.with_extension("csv"), &log)?;
            }
            let calib = result?;
            write_text(&out, &calib.to_json()?)?;
            println!(
                "calibrated after {} candidates: {}",
                calib.tried,
                calib.describe()
            );
            Ok(true)
        }
        GateAction::Build { kind, input, out } => {
            let calib = load_calibration(&input)?;
            let layout = build_gate(kind.into(), Some(&calib), &catalog, rule)?;
            write_text(&out, &layout.to_json(rule)?)?;
            println!(
                "{} layout {}x{}, {} inputs, deadline {}",
                layout.kind,
                layout.width,
                layout.height,
                layout.inputs(),
                layout.deadline
            );
            Ok(true)
        }
        GateAction::Eval { input, bits } => {
            let text = std::fs::read_to_string(&input)
                .with_context(|| format!("reading {}", input.display()))?;
            let layout = GateLayout::from_json(&text)?;
            let result = evaluate_gate(&layout, &parse_bits(&bits)?, rule)?;
            emit_json(None, &result)?;
            Ok(result.bit().is_some())
        }
        GateAction::Truthtable { kind, input, out } => {
            let calib = match input {
                Some(path) => load_calibration(&path)?,
                None => {
                    let w3 = calibrate(GateKind::W3, &catalog, rule, &SearchSpace::default())?;
                    match kind.into() {
                        GateKind::W3 => w3,
                        other => run_calibration(other, Some(&w3), &catalog, rule)?,
                    }
                }
            };
            let layout = build_gate(kind.into(), Some(&calib), &catalog, rule)?;
            let table = truth_table(&layout, rule)?;
            println!(
                "inputs{} expected output steps check",
                " ".repeat(layout.inputs().saturating_sub(6))
            );
            for row in &table.rows {
                let bits: String = row.inputs.iter().map(|b| char::from(b'0' + b)).collect();
                let got = row.result.bit().map_or("-".to_string(), |b| b.to_string());
                println!(
                    "{bits:<6} {:>8} {got:>6} {:>5} {}",
                    row.expected,
                    row.result.steps_used,
                    if row.pass() { "pass" } else { "FAIL" }
                );
            }
            println!("{}/{} rows pass", table.passed(), table.rows.len());
            if let Some(path) = out {
                write_text(&path, &serde_json::to_string_pretty(&table)?)?;
            }
            Ok(table.all_pass())
        }
    }
}
