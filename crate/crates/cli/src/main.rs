use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use anyhow::{Context, Result};
use clap::{Args, CommandFactory, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use paleodemog_core::census::{
    align, infer_on, read_series, AlignedObservation, DEFAULT_CWR_HALFWIDTH,
    DEFAULT_GROWTH_HALFWIDTH,
};
use paleodemog_core::contour::contour_export;
use paleodemog_core::data::{DataSource, DATA_ENV};
use paleodemog_core::format::sig6;
use paleodemog_core::grid::{
    invert, sweep, AxisRange, ClosedRange, FeasibleSet, GridSpec, GridSurface, SurfaceKind,
    DEFAULT_MAX_CELLS,
};
use paleodemog_core::lifetable::{survival_increments, AgeGrid, Sex, SurvivalTable};
use paleodemog_core::projection::{project, stable_seed, ScenarioSchedule};
use paleodemog_core::stable::SexRatioAtBirth;

#[derive(Parser)]
#[command(
    name = "paleodemog",
    about = "Infer fertility and mortality from child-woman ratios and growth rates",
    disable_version_flag = true
)]
struct Cli {
    /// Print the version and the sha256 of every data file, then exit.
    #[arg(long)]
    version: bool,

    /// Directory overriding the embedded data files (also set by PALEODEMOG_DATA).
    #[arg(long, global = true, value_name = "DIR")]
    data: Option<PathBuf>,

    /// Lower bound of the open age group.
    #[arg(long, global = true, default_value_t = AgeGrid::DEFAULT_TERMINAL)]
    terminal: u32,

    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Subcommand)]
enum Command {
    /// Stable CWR and growth over a (TFR, e0) grid.
    Sweep {
        #[command(flatten)]
        grid: GridArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Grid cells whose CWR (and optionally growth) fall in the given ranges.
    Invert {
        /// Surface JSON written by `sweep --format json`; swept afresh if absent.
        #[arg(long, value_name = "PATH")]
        surface: Option<PathBuf>,
        #[command(flatten)]
        grid: GridArgs,
        /// CWR range lo:hi.
        #[arg(long, allow_hyphen_values = true)]
        cwr: ClosedRange,
        /// Growth range lo:hi, per year.
        #[arg(long, allow_hyphen_values = true)]
        growth: Option<ClosedRange>,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Contour polylines of a surface as JSON.
    Contours {
        #[arg(long, value_name = "PATH")]
        surface: Option<PathBuf>,
        #[command(flatten)]
        grid: GridArgs,
        #[arg(long, value_enum, default_value_t = Quantity::Cwr)]
        quantity: Quantity,
        /// Comma-separated contour levels.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        levels: Option<Vec<f64>>,
        /// Output file; standard output if absent.
        #[arg(long, value_name = "PATH")]
        out: Option<PathBuf>,
    },
    /// Cohort-component projection of a scenario file.
    Project {
        /// Scenario JSON: `initial` {tfr, e0, total}, `phases`, `horizon`.
        #[arg(long, value_name = "PATH")]
        scenario: PathBuf,
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Align a census series to period midpoints, optionally inferring (TFR, e0).
    Census {
        /// Census CSV; the shipped sample series if absent.
        #[arg(long = "in", value_name = "PATH")]
        input: Option<PathBuf>,
        #[arg(long)]
        infer: bool,
        #[arg(long, default_value_t = DEFAULT_CWR_HALFWIDTH)]
        cwr_halfwidth: f64,
        #[arg(long, default_value_t = DEFAULT_GROWTH_HALFWIDTH)]
        growth_halfwidth: f64,
        #[command(flatten)]
        grid: GridArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Within-group survival probabilities by e0.
    Survival {
        #[arg(long, default_value = "west")]
        family: String,
        #[arg(long, value_enum, default_value_t = SexArg::Both)]
        sex: SexArg,
        /// Comma-separated female e0 values.
        #[arg(long, value_delimiter = ',', default_value = "10,20,30,40,50")]
        e0: Vec<f64>,
        /// Comma-separated group lower bounds; every closed group if absent.
        #[arg(long, value_delimiter = ',')]
        groups: Option<Vec<u32>>,
        #[command(flatten)]
        output: OutputArgs,
    },
}

#[derive(Args)]
struct ModelArgs {
    /// Mortality family: west, south, or a `<prefix>` of `<prefix>_female.csv`.
    #[arg(long, default_value = "west")]
    family: String,
    /// Fertility pattern: booth, maori1962, or a CSV path.
    #[arg(long, default_value = "booth")]
    pattern: String,
    /// Male births per 100 female births.
    #[arg(long, default_value_t = 105.0)]
    srb: f64,
}

#[derive(Args)]
struct GridArgs {
    #[command(flatten)]
    model: ModelArgs,
    /// TFR axis min:max:step.
    #[arg(long, default_value = "2:9:0.2")]
    tfr: AxisRange,
    /// e0 axis min:max:step.
    #[arg(long, default_value = "10:50:2.5")]
    e0: AxisRange,
    #[arg(long, default_value_t = DEFAULT_MAX_CELLS)]
    max_cells: usize,
}

#[derive(Args)]
struct OutputArgs {
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Output file; standard output if absent.
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum Quantity {
    Cwr,
    Growth,
}

#[derive(Clone, Copy, ValueEnum)]
enum SexArg {
    Female,
    Male,
    Both,
}

#[derive(Deserialize)]
struct ScenarioFile {
    initial: InitialState,
    #[serde(flatten)]
    schedule: ScenarioSchedule,
}

#[derive(Deserialize)]
struct InitialState {
    tfr: f64,
    e0: f64,
    total: f64,
}

#[derive(Serialize)]
struct Inference<'a> {
    observation: &'a AlignedObservation,
    feasible: FeasibleSet,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    let mut source = DataSource::from_env().with_terminal(cli.terminal);
    if let Some(dir) = &cli.data {
        source = source.with_dir(dir);
    }
    if cli.version {
        print_version(&source)?;
        return Ok(ExitCode::SUCCESS);
    }
    let Some(command) = cli.command else {
        eprintln!("{}", Cli::command().render_usage());
        eprintln!("a subcommand is required; see --help");
        return Ok(ExitCode::from(2));
    };
    match command {
        Command::Sweep { grid, output } => {
            let surface = sweep(&grid_spec(&source, &grid)?)?;
            emit(&output.out, |w| match output.format {
                Format::Csv => Ok(surface.write_csv(w)?),
                Format::Json => write_json(w, &surface),
            })?;
        }
        Command::Invert {
            surface,
            grid,
            cwr,
            growth,
            output,
        } => {
            let surface = load_or_sweep(&source, surface.as_deref(), &grid)?;
            let set = invert(&surface, cwr, growth)?;
            if set.is_empty() {
                log::warn!("no grid cell satisfies the ranges");
            }
            emit(&output.out, |w| match output.format {
                Format::Csv => Ok(set.write_csv(w)?),
                Format::Json => write_json(w, &set),
            })?;
        }
        Command::Contours {
            surface,
            grid,
            quantity,
            levels,
            out,
        } => {
            let surface = load_or_sweep(&source, surface.as_deref(), &grid)?;
            let (kind, default_levels) = match quantity {
                Quantity::Cwr => (SurfaceKind::Cwr, vec![0.6, 0.8, 1.0, 1.2, 1.4]),
                Quantity::Growth => (SurfaceKind::Growth, vec![-0.02, -0.01, 0.0, 0.01, 0.02]),
            };
            let lines = contour_export(&surface, kind, &levels.unwrap_or(default_levels));
            emit(&out, |w| write_json(w, &lines))?;
        }
        Command::Project {
            scenario,
            model,
            output,
        } => {
            let file: ScenarioFile = serde_json::from_reader(
                File::open(&scenario).with_context(|| format!("{}", scenario.display()))?,
            )
            .with_context(|| format!("{}: not a scenario file", scenario.display()))?;
            let family = source.family(&model.family)?;
            let pattern = source.pattern(&model.pattern)?;
            let srb = SexRatioAtBirth::new(model.srb)?;
            let init = &file.initial;
            let seed = stable_seed(init.tfr, init.e0, &family, &pattern, srb, init.total)?;
            let traj = project(&seed, &file.schedule, &family, &pattern, srb)?;
            emit(&output.out, |w| match output.format {
                Format::Csv => Ok(traj.write_csv(w)?),
                Format::Json => write_json(w, &traj),
            })?;
        }
        Command::Census {
            input,
            infer,
            cwr_halfwidth,
            growth_halfwidth,
            grid,
            output,
        } => {
            let series = match &input {
                Some(path) => {
                    read_series(File::open(path).with_context(|| format!("{}", path.display()))?)
                        .with_context(|| format!("{}", path.display()))?
                }
                None => source.sample_census()?,
            };
            let observations = align(&series)?;
            if infer {
                let surface = sweep(&grid_spec(&source, &grid)?)?;
                let results = observations
                    .iter()
                    .map(|o| {
                        Ok(Inference {
                            observation: o,
                            feasible: infer_on(o, cwr_halfwidth, growth_halfwidth, &surface)?,
                        })
                    })
                    .collect::<Result<Vec<_>>>()?;
                emit(&output.out, |w| match output.format {
                    Format::Csv => write_inference_csv(w, &results),
                    Format::Json => write_json(w, &results),
                })?;
            } else {
                emit(&output.out, |w| match output.format {
                    Format::Csv => write_observations_csv(w, &observations),
                    Format::Json => write_json(w, &observations),
                })?;
            }
        }
        Command::Survival {
            family,
            sex,
            e0,
            groups,
            output,
        } => {
            let family = source.family(&family)?;
            let grid = family.grid();
            let groups =
                groups.unwrap_or_else(|| grid.lower_bounds().take(grid.terminal_index()).collect());
            let sexes: &[Sex] = match sex {
                SexArg::Female => &[Sex::Female],
                SexArg::Male => &[Sex::Male],
                SexArg::Both => &Sex::BOTH,
            };
            let tables = sexes
                .iter()
                .map(|&s| Ok(survival_increments(&family, s, &e0, &groups)?))
                .collect::<Result<Vec<_>>>()?;
            emit(&output.out, |w| match output.format {
                Format::Csv => write_survival_csv(w, &tables),
                Format::Json => write_json(w, &tables),
            })?;
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn print_version(source: &DataSource) -> Result<()> {
    println!("paleodemog {}", env!("CARGO_PKG_VERSION"));
    match source.dir() {
        Some(dir) => println!("data: {} (fallback: embedded)", dir.display()),
        None => println!("data: embedded (set {DATA_ENV} or --data to override)"),
    }
    for (path, hash) in source.provenance()? {
        println!("{hash}  {path}");
    }
    Ok(())
}

fn grid_spec(source: &DataSource, args: &GridArgs) -> Result<GridSpec> {
    let family = Arc::new(source.family(&args.model.family)?);
    let pattern = Arc::new(source.pattern(&args.model.pattern)?);
    let mut spec = GridSpec::new(family, pattern);
    spec.tfr = args.tfr;
    spec.e0 = args.e0;
    spec.srb = SexRatioAtBirth::new(args.model.srb)?;
    spec.max_cells = args.max_cells;
    Ok(spec)
}

fn load_or_sweep(source: &DataSource, path: Option<&Path>, grid: &GridArgs) -> Result<GridSurface> {
    match path {
        Some(path) => {
            let file = File::open(path).with_context(|| format!("{}", path.display()))?;
            serde_json::from_reader(io::BufReader::new(file)).with_context(|| {
                format!(
                    "{}: expected the JSON written by `sweep --format json`",
                    path.display()
                )
            })
        }
        None => Ok(sweep(&grid_spec(source, grid)?)?),
    }
}

fn emit(out: &Option<PathBuf>, write: impl FnOnce(&mut dyn Write) -> Result<()>) -> Result<()> {
    match out {
        Some(path) => {
            let file = File::create(path).with_context(|| format!("{}", path.display()))?;
            let mut w = BufWriter::new(file);
            write(&mut w)?;
            w.flush()?;
        }
        None => {
            let stdout = io::stdout();
            let mut w = stdout.lock();
            write(&mut w)?;
            w.flush()?;
        }
    }
    Ok(())
}

fn write_json<T: Serialize + ?Sized>(w: &mut dyn Write, value: &T) -> Result<()> {
    serde_json::to_writer_pretty(&mut *w, value)?;
    writeln!(w)?;
    Ok(())
}

fn write_observations_csv(w: &mut dyn Write, obs: &[AlignedObservation]) -> Result<()> {
    let mut csv = csv::Writer::from_writer(w);
    csv.write_record([
        "midpoint",
        "start_year",
        "end_year",
        "cwr",
        "growth_per_year",
    ])?;
    for o in obs {
        csv.write_record([
            sig6(o.midpoint),
            sig6(o.source_years.0),
            sig6(o.source_years.1),
            sig6(o.cwr),
            sig6(o.growth),
        ])?;
    }
    csv.flush()?;
    Ok(())
}

fn write_inference_csv(w: &mut dyn Write, results: &[Inference]) -> Result<()> {
    let mut csv = csv::Writer::from_writer(w);
    csv.write_record([
        "midpoint",
        "start_year",
        "end_year",
        "tfr",
        "e0",
        "cwr",
        "growth_per_year",
        "residual",
    ])?;
    for r in results {
        let o = r.observation;
        for c in &r.feasible.cells {
            csv.write_record([
                sig6(o.midpoint),
                sig6(o.source_years.0),
                sig6(o.source_years.1),
                sig6(c.tfr),
                sig6(c.e0),
                sig6(c.cwr),
                sig6(c.growth),
                sig6(c.residual),
            ])?;
        }
    }
    csv.flush()?;
    Ok(())
}

fn write_survival_csv(w: &mut dyn Write, tables: &[SurvivalTable]) -> Result<()> {
    let mut csv = csv::Writer::from_writer(w);
    csv.write_record(["sex", "e0", "age_lower", "probability"])?;
    for t in tables {
        for row in &t.rows {
            for (g, p) in t.groups.iter().zip(&row.probabilities) {
                csv.write_record([
                    t.sex.as_str().to_string(),
                    sig6(row.e0),
                    g.to_string(),
                    sig6(*p),
                ])?;
            }
        }
    }
    csv.flush()?;
    Ok(())
}
