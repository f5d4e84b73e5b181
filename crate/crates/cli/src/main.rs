use std::fs::{self, File};
use std::io::BufWriter;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use drc_core::calibration::{benchmark_ape, calibrate_kstar, model_mape, write_coefficients_csv, CalibrationSpec};
use drc_core::costs::Strategy;
use drc_core::experiments::{
    critical_density_curve, figure_sweeps, find_critical_density, run_sweep, run_table5, run_validation_campaign,
    validation_grid, write_critical_curve_csv, write_sweep_csv, KStarMode, Scenario, SweepAxis, SweepSpec,
};
use drc_core::optimizer::{search_design, SearchSpace};
use drc_core::simulator::ValidationSettings;
use drc_core::tour_length::Benchmark;
use drc_core::{load_scenario, DrcError, ScenarioParams};

#[derive(Parser, Debug)]
#[command(
    name = "drc",
    version,
    about = "Design and evaluate demand-responsive feeder bus services"
)]
struct Cli {
    /// Scenario file (TOML).
    #[arg(long, global = true, conflicts_with = "preset")]
    config: Option<PathBuf>,

    /// Named scenario preset.
    #[arg(long, global = true)]
    preset: Option<String>,

    #[arg(long, global = true, default_value_t = 42)]
    seed: u64,

    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,

    #[arg(long, global = true, default_value = "calibrated")]
    kstar_mode: String,

    #[arg(long, global = true, value_enum, default_value_t = StrategyArg::Both)]
    strategy: StrategyArg,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum StrategyArg {
    Ff,
    Sf,
    Both,
}

impl StrategyArg {
    fn strategies(self) -> Vec<Strategy> {
        match self {
            StrategyArg::Ff => vec![Strategy::FullyFlexible],
            StrategyArg::Sf => vec![Strategy::SemiFlexible],
            StrategyArg::Both => Strategy::BOTH.to_vec(),
        }
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Simulate the k* grid and fit the tour-length law.
    Calibrate {
        #[arg(long, default_value_t = 500)]
        min_instances: usize,
        #[arg(long, default_value_t = 0.01)]
        tolerance: f64,
    },
    /// Find the optimal design for each strategy.
    Optimize,
    /// Optimal designs and cost breakdown for both strategies side by side.
    Compare,
    /// Simulate optimal designs and report model errors.
    Validate {
        /// Run the 32-scenario grid instead of the single scenario.
        #[arg(long)]
        campaign: bool,
        #[arg(long, default_value_t = 1000)]
        min_runs: usize,
    },
    /// Parameter sweeps.
    Sweep {
        /// fig6, fig7a, fig7b, fig8a, fig8b, fig9, fig10 or all.
        #[arg(long, conflicts_with = "axis")]
        figure: Option<String>,
        /// Custom axis: lambda, region_area, aspect_ratio, theta, alpha.
        #[arg(long, requires = "values")]
        axis: Option<String>,
        /// Comma-separated, strictly increasing values for --axis.
        #[arg(long, value_delimiter = ',')]
        values: Option<Vec<f64>>,
    },
    /// Demand density at which the two strategies cost the same.
    Critical {
        #[arg(long, default_value_t = 2.0)]
        lo: f64,
        #[arg(long, default_value_t = 60.0)]
        hi: f64,
    },
}

struct Ctx {
    params: ScenarioParams,
    seed: u64,
    out: PathBuf,
    mode: KStarMode,
    strategies: Vec<Strategy>,
    space: SearchSpace,
    files: Vec<String>,
}

impl Ctx {
    fn create(&mut self, name: &str) -> anyhow::Result<BufWriter<File>> {
        let path = self.out.join(name);
        self.files.push(name.to_string());
        let f = File::create(&path).with_context(|| format!("creating {}", path.display()))?;
        Ok(BufWriter::new(f))
    }

    fn suffixed(&self, stem: &str, ext: &str) -> String {
        match self.mode {
            KStarMode::Calibrated => format!("{stem}.{ext}"),
            m => format!("{stem}_{m}.{ext}"),
        }
    }
}

fn load_params(cli: &Cli) -> anyhow::Result<ScenarioParams> {
    let params = if let Some(path) = &cli.config {
        let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        load_scenario(&text)?
    } else {
        ScenarioParams::preset(cli.preset.as_deref().unwrap_or("table2"))?
    };
    params.validate()?;
    Ok(params)
}

fn calibrate(ctx: &mut Ctx, min_instances: usize, tolerance: f64) -> anyhow::Result<()> {
    let spec = CalibrationSpec {
        min_instances,
        tolerance,
        ..CalibrationSpec::default()
    };
    let (model, grid) = calibrate_kstar(&spec, ctx.seed)?;
    grid.write_csv(&model, ctx.create("table_b1.csv")?)?;
    write_coefficients_csv(&model, ctx.create("kstar_coefficients.csv")?)?;
    let yang_max = benchmark_ape(Benchmark::Yang, &grid)
        .iter()
        .map(|c| c.2)
        .fold(0.0, f64::max);
    println!("fitted beta: {:?}", model.to_array());
    println!("fit MAPE: {:.3}%", model_mape(&model, &grid));
    println!("largest Yang-formula error: {yang_max:.1}%");
    Ok(())
}

fn optimize(ctx: &mut Ctx) -> anyhow::Result<()> {
    let tour = ctx.mode.tour_law();
    for s in ctx.strategies.clone() {
        let res = search_design(&ctx.params, &ctx.space.with_strategy(s), &tour)?;
        let f = ctx.create(&ctx.suffixed(&format!("design_{}", s.short()), "json"))?;
        serde_json::to_writer_pretty(f, &res)?;
        res.write_search_log_csv(ctx.create(&ctx.suffixed(&format!("search_log_{}", s.short()), "csv"))?)?;
        let d = &res.best;
        println!(
            "{s}: GC {:.4} min/patron, {}x{} zones, K = {}, w0 = {}",
            res.cost.gc_per_patron_min,
            d.grid.rows,
            d.grid.cols,
            d.capacity,
            d.w0().map(|w| w.to_string()).unwrap_or_else(|| "-".into())
        );
    }
    Ok(())
}

fn compare(ctx: &mut Ctx) -> anyhow::Result<()> {
    let cmp = run_table5(&ctx.params, &ctx.space, &ctx.mode.tour_law())?;
    cmp.write_table5_csv(ctx.create(&ctx.suffixed("table5", "csv"))?)?;
    println!(
        "fully_flexible {:.4}, semi_flexible {:.4} min/patron; semi-flexible saving {:.2}%",
        cmp.ff.cost.gc_per_patron_min, cmp.sf.cost.gc_per_patron_min, cmp.sf_saving_pct
    );
    Ok(())
}

fn validate(ctx: &mut Ctx, campaign: bool, min_runs: usize) -> anyhow::Result<()> {
    let scenarios = if campaign {
        validation_grid(&ctx.params)
    } else {
        vec![Scenario {
            id: "base".into(),
            params: ctx.params.clone(),
        }]
    };
    let settings = ValidationSettings {
        min_runs,
        ..ValidationSettings::default()
    };
    let report = run_validation_campaign(
        &scenarios,
        &ctx.strategies,
        &ctx.space,
        &ctx.mode.tour_law(),
        &settings,
        ctx.seed,
    )?;
    for s in ctx.strategies.clone() {
        let stem = match s {
            Strategy::FullyFlexible => "table3",
            Strategy::SemiFlexible => "table4",
        };
        report.write_table_csv(s, ctx.create(&ctx.suffixed(stem, "csv"))?)?;
        let worst = report.reports(s).iter().map(|r| r.err_gc_pct).fold(0.0, f64::max);
        println!("{s}: largest GC error {worst:.3}% over {} scenario(s)", scenarios.len());
    }
    report.write_detail_csv(ctx.create(&ctx.suffixed("validation_detail", "csv"))?)?;
    Ok(())
}

const CRITICAL_BRACKET: (f64, f64) = (2.0, 60.0);

fn sweep_one(ctx: &mut Ctx, name: &str, spec: &SweepSpec) -> anyhow::Result<()> {
    let rows = run_sweep(spec, &ctx.space, &ctx.mode.tour_law())?;
    write_sweep_csv(spec.axis, &rows, ctx.create(&ctx.suffixed(name, "csv"))?)?;
    println!("{name}: {} rows", rows.len());
    Ok(())
}

fn critical_curve(ctx: &mut Ctx, name: &str, axis: SweepAxis, values: &[f64]) -> anyhow::Result<()> {
    let curve = critical_density_curve(
        &ctx.params,
        axis,
        values,
        CRITICAL_BRACKET,
        &ctx.space,
        &ctx.mode.tour_law(),
    )?;
    write_critical_curve_csv(axis, &curve, ctx.create(&ctx.suffixed(name, "csv"))?)?;
    println!("{name}: {} points", curve.len());
    Ok(())
}

fn sweep(ctx: &mut Ctx, figure: Option<String>, axis: Option<String>, values: Option<Vec<f64>>) -> anyhow::Result<()> {
    if let Some(axis) = axis {
        let axis: SweepAxis = axis.parse()?;
        let spec = SweepSpec {
            axis,
            values: values.unwrap_or_default(),
            base: ctx.params.clone(),
            strategies: ctx.strategies.clone(),
        };
        return sweep_one(ctx, &format!("sweep_{}", axis.name()), &spec);
    }
    let figure = figure.unwrap_or_else(|| "all".into());
    let mut matched = false;
    for (name, mut spec) in figure_sweeps(&ctx.params) {
        if figure == "all" || figure == name {
            spec.strategies = ctx.strategies.clone();
            sweep_one(ctx, name, &spec)?;
            matched = true;
        }
    }
    if figure == "all" || figure == "fig7b" {
        critical_curve(ctx, "fig7b", SweepAxis::RegionArea, &[2.0, 4.0, 8.0, 16.0, 32.0])?;
        matched = true;
    }
    if figure == "all" || figure == "fig8b" {
        critical_curve(ctx, "fig8b", SweepAxis::AspectRatio, &[1.0, 2.0, 4.0, 6.0, 8.0, 10.0])?;
        matched = true;
    }
    if !matched {
        bail!("unknown figure `{figure}`");
    }
    Ok(())
}

fn critical(ctx: &mut Ctx, lo: f64, hi: f64) -> anyhow::Result<()> {
    let pair = (Strategy::FullyFlexible, Strategy::SemiFlexible);
    let c = find_critical_density(&ctx.params, pair, lo, hi, &ctx.space, &ctx.mode.tour_law())?;
    let mut f = ctx.create(&ctx.suffixed("critical", "json"))?;
    serde_json::to_writer_pretty(&mut f, &c)?;
    println!(
        "critical density: {:.3} patrons/h/km² (bracket [{:.3}, {:.3}])",
        c.density, c.lo, c.hi
    );
    Ok(())
}

fn write_manifest(ctx: &Ctx, command: &str) -> anyhow::Result<()> {
    let manifest = json!({
        "command": command,
        "seed": ctx.seed,
        "kstar_mode": ctx.mode,
        "strategies": ctx.strategies,
        "params": ctx.params,
        "files": ctx.files,
    });
    let path = ctx.out.join(format!("manifest_{command}.json"));
    fs::write(&path, serde_json::to_string_pretty(&manifest)?)
        .with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Calibrate { .. } => "calibrate",
        Command::Optimize => "optimize",
        Command::Compare => "compare",
        Command::Validate { .. } => "validate",
        Command::Sweep { .. } => "sweep",
        Command::Critical { .. } => "critical",
    }
}

fn run(cli: Cli) -> anyhow::Result<()> {
    let params = load_params(&cli)?;
    let mode: KStarMode = cli.kstar_mode.parse()?;
    fs::create_dir_all(&cli.out).with_context(|| format!("creating {}", cli.out.display()))?;
    let mut ctx = Ctx {
        params,
        seed: cli.seed,
        out: cli.out.clone(),
        mode,
        strategies: cli.strategy.strategies(),
        space: SearchSpace::standard(Strategy::FullyFlexible),
        files: Vec::new(),
    };
    let name = command_name(&cli.command);
    match cli.command {
        Command::Calibrate {
            min_instances,
            tolerance,
        } => calibrate(&mut ctx, min_instances, tolerance)?,
        Command::Optimize => optimize(&mut ctx)?,
        Command::Compare => compare(&mut ctx)?,
        Command::Validate { campaign, min_runs } => validate(&mut ctx, campaign, min_runs)?,
        Command::Sweep { figure, axis, values } => sweep(&mut ctx, figure, axis, values)?,
        Command::Critical { lo, hi } => critical(&mut ctx, lo, hi)?,
    }
    write_manifest(&ctx, name)
}

fn exit_code(err: &anyhow::Error) -> u8 {
    match err.downcast_ref::<DrcError>() {
        Some(e) if e.is_infeasibility() => 2,
        _ => 1,
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
