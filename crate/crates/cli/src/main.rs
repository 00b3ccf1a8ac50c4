//! `bucksim`: command-line front end for the converter library. Subcommands
//! cover single-scenario simulation, dataset generation, offline training,
//! the optimizer-by-activation sweep, and the controller comparison report.
//! Values given on the command line override the configuration file.

mod config;
mod svg;

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use bucksim_core::{
    compare_controllers, compute_metrics, default_dataset_scenarios, dnn_smc_config,
    generate_dataset, hyperparameter_sweep, run_scenario, train_model, Activation,
    AdaptiveSmcState, ComparisonReport, Controller, Dataset, Metrics, Optimizer, TrainReport,
    TrainedModel, DEFAULT_ADAPTATION_GAIN,
};
use clap::{Args, Parser, Subcommand, ValueEnum};

use config::RunConfig;
use svg::Series;

/// Epoch budget for sweep runs. The sweep ranks optimizer and activation
/// pairs early in training rather than at the full budget.
const SWEEP_EPOCHS: usize = 50;

/// Command failure split by exit category: configuration and usage
/// problems exit 1, runtime problems exit 2.
#[derive(Debug)]
pub enum Failure {
    Config(String),
    Runtime(String),
}

fn config_err(e: bucksim_core::Error) -> Failure {
    Failure::Config(e.to_string())
}

fn runtime_err(e: bucksim_core::Error) -> Failure {
    Failure::Runtime(e.to_string())
}

fn load_model(path: &Path) -> Result<TrainedModel, Failure> {
    TrainedModel::load_json(path)
        .map_err(|e| Failure::Runtime(format!("cannot load model {}: {e}", path.display())))
}

fn load_dataset(path: &Path) -> Result<Dataset, Failure> {
    Dataset::read_csv(path)
        .map_err(|e| Failure::Runtime(format!("cannot read dataset {}: {e}", path.display())))
}

#[derive(Parser)]
#[command(
    name = "bucksim",
    version,
    about = "Buck converter simulation and sliding-mode controller toolkit"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario and write its trace CSV.
    Simulate(SimulateArgs),
    /// Generate the regression dataset from the scenario grid.
    Dataset(DatasetArgs),
    /// Fit a model to a dataset; write the model and its training history.
    Train(TrainArgs),
    /// Tabulate the RMSE of every optimizer-activation pair.
    Sweep(SweepArgs),
    /// Run the three-experiment classic-versus-adaptive comparison.
    Compare(CompareArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ControllerName {
    Classic,
    Dnn,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum OptimizerArg {
    Sgd,
    Adam,
    Rmsprop,
}

impl From<OptimizerArg> for Optimizer {
    fn from(value: OptimizerArg) -> Self {
        match value {
            OptimizerArg::Sgd => Optimizer::Sgd,
            OptimizerArg::Adam => Optimizer::Adam,
            OptimizerArg::Rmsprop => Optimizer::Rmsprop,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ActivationArg {
    Relu,
    Sigmoid,
    Tanh,
}

impl From<ActivationArg> for Activation {
    fn from(value: ActivationArg) -> Self {
        match value {
            ActivationArg::Relu => Activation::Relu,
            ActivationArg::Sigmoid => Activation::Sigmoid,
            ActivationArg::Tanh => Activation::Tanh,
        }
    }
}

#[derive(Args)]
struct SimulateArgs {
    /// Configuration file; built-in defaults apply when omitted.
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Control law to run.
    #[arg(long, value_enum, default_value = "classic")]
    controller: ControllerName,
    /// Trained model file, read when the controller is dnn.
    #[arg(long, value_name = "PATH")]
    model: Option<PathBuf>,
    /// Trace CSV destination.
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
    /// Scenario seed override.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct DatasetArgs {
    /// Configuration file; built-in defaults apply when omitted.
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Dataset CSV destination.
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
    /// Shuffle seed override.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct TrainArgs {
    /// Configuration file; built-in defaults apply when omitted.
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Model file destination.
    #[arg(long, value_name = "PATH")]
    model: Option<PathBuf>,
    /// History CSV destination; defaults to the model name plus _history.
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
    /// Weight initialization seed override.
    #[arg(long)]
    seed: Option<u64>,
    /// Epoch count override.
    #[arg(long)]
    epochs: Option<usize>,
    /// Optimizer override.
    #[arg(long, value_enum)]
    optimizer: Option<OptimizerArg>,
    /// Hidden activation function.
    #[arg(long, value_enum, default_value = "relu")]
    activation: ActivationArg,
}

#[derive(Args)]
struct SweepArgs {
    /// Configuration file; built-in defaults apply when omitted.
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Table CSV destination.
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
    /// Weight initialization seed override.
    #[arg(long)]
    seed: Option<u64>,
    /// Epochs per sweep cell.
    #[arg(long)]
    epochs: Option<usize>,
}

#[derive(Args)]
struct CompareArgs {
    /// Configuration file; built-in defaults apply when omitted.
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Trained model file for the adaptive controller.
    #[arg(long, value_name = "PATH")]
    model: Option<PathBuf>,
    /// Report CSV destination.
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
    /// Also write voltage and current plots per experiment.
    #[arg(long)]
    svg: bool,
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            std::process::exit(code);
        }
    };
    let result = match cli.command {
        Command::Simulate(args) => cmd_simulate(args),
        Command::Dataset(args) => cmd_dataset(args),
        Command::Train(args) => cmd_train(args),
        Command::Sweep(args) => cmd_sweep(args),
        Command::Compare(args) => cmd_compare(args),
    };
    match result {
        Ok(()) => {}
        Err(Failure::Config(msg)) => {
            eprintln!("error: {msg}");
            std::process::exit(1);
        }
        Err(Failure::Runtime(msg)) => {
            eprintln!("error: {msg}");
            std::process::exit(2);
        }
    }
}

fn joined_ms(times: &[Option<f64>]) -> String {
    if times.is_empty() {
        return "none".to_string();
    }
    times
        .iter()
        .map(|t| match t {
            Some(v) => format!("{:.3}", v * 1e3),
            None => "NaN".to_string(),
        })
        .collect::<Vec<_>>()
        .join(",")
}

fn print_metrics(m: &Metrics) {
    println!(
        "settling_ms: {:.3}",
        m.settling_time_s.map_or(f64::NAN, |t| t * 1e3)
    );
    println!("overshoot_v: {:.4}", m.overshoot_v);
    println!("recovery_ms: {}", joined_ms(&m.recovery_times_s));
    println!(
        "current_recovery_ms: {}",
        joined_ms(&m.current_recovery_times_s)
    );
    println!("ripple_pp_v: {:.4}", m.ripple_pp_v);
    println!("ss_error_v: {:.4}", m.steady_state_error_v);
}

fn cmd_simulate(args: SimulateArgs) -> Result<(), Failure> {
    let cfg = RunConfig::load(args.config.as_deref())?;
    let mut scn = cfg.scenario.to_scenario(cfg.circuit);
    if let Some(seed) = args.seed {
        scn.seed = seed;
    }
    scn.validate().map_err(config_err)?;
    cfg.smc.validate().map_err(config_err)?;
    let controller = match args.controller {
        ControllerName::Classic => Controller::Classic(cfg.smc),
        ControllerName::Dnn => {
            let path = args.model.unwrap_or_else(|| cfg.paths.model.clone());
            let model = load_model(&path)?;
            let state = AdaptiveSmcState::new(model, cfg.smc, DEFAULT_ADAPTATION_GAIN, 0.0)
                .map_err(runtime_err)?;
            Controller::Dnn(Box::new(state))
        }
    };
    let trace = run_scenario(&scn, controller).map_err(runtime_err)?;
    let out = args
        .out
        .or(cfg.paths.out)
        .unwrap_or_else(|| PathBuf::from("trace.csv"));
    trace.write_csv(&out).map_err(runtime_err)?;
    println!("trace: {}", out.display());
    println!("rows: {}", trace.records.len());
    if !trace.records.is_empty() {
        let metrics = compute_metrics(&trace, &scn).map_err(runtime_err)?;
        print_metrics(&metrics);
    }
    Ok(())
}

fn cmd_dataset(args: DatasetArgs) -> Result<(), Failure> {
    let cfg = RunConfig::load(args.config.as_deref())?;
    cfg.circuit.validate().map_err(config_err)?;
    cfg.smc.validate().map_err(config_err)?;
    let seed = args.seed.unwrap_or(cfg.scenario.seed);
    let scenarios = default_dataset_scenarios(&cfg.circuit);
    let data = generate_dataset(&scenarios, &cfg.smc, seed).map_err(runtime_err)?;
    let out = args.out.unwrap_or_else(|| cfg.paths.dataset.clone());
    data.write_csv(&out).map_err(runtime_err)?;
    println!("dataset: {}", out.display());
    println!("rows: {}", data.len());
    Ok(())
}

fn history_path_for(model_path: &Path) -> PathBuf {
    let mut name = model_path
        .file_stem()
        .map_or_else(|| "model".into(), |s| s.to_os_string());
    name.push("_history.csv");
    model_path.with_file_name(name)
}

/// Writes the `epoch,cost,rmse` history, one row per completed epoch.
fn write_history(path: &Path, report: &TrainReport) -> Result<(), Failure> {
    let mut text = String::from("epoch,cost,rmse\n");
    for (epoch, (c, r)) in report
        .cost_history
        .iter()
        .zip(&report.rmse_history)
        .enumerate()
        .skip(1)
    {
        let _ = writeln!(text, "{epoch},{c},{r}");
    }
    std::fs::write(path, text)
        .map_err(|e| Failure::Runtime(format!("cannot write {}: {e}", path.display())))
}

fn cmd_train(args: TrainArgs) -> Result<(), Failure> {
    let cfg = RunConfig::load(args.config.as_deref())?;
    let mut train_cfg = cfg.training;
    if let Some(seed) = args.seed {
        train_cfg.seed = seed;
    }
    if let Some(epochs) = args.epochs {
        train_cfg.epochs = epochs;
    }
    if let Some(opt) = args.optimizer {
        train_cfg.optimizer = opt.into();
    }
    train_cfg.validate().map_err(config_err)?;
    let data = load_dataset(&cfg.paths.dataset)?;
    let (model, report) =
        train_model(&data, args.activation.into(), &train_cfg).map_err(runtime_err)?;
    let model_path = args.model.unwrap_or_else(|| cfg.paths.model.clone());
    model.save_json(&model_path).map_err(runtime_err)?;
    let history_path = args.out.unwrap_or_else(|| history_path_for(&model_path));
    write_history(&history_path, &report)?;
    println!("model: {}", model_path.display());
    println!("history: {}", history_path.display());
    println!("epochs: {}", train_cfg.epochs);
    println!("final_cost: {}", report.cost_history.last().unwrap());
    println!("final_rmse: {}", report.rmse_history.last().unwrap());
    Ok(())
}

fn cmd_sweep(args: SweepArgs) -> Result<(), Failure> {
    let cfg = RunConfig::load(args.config.as_deref())?;
    let epochs = args.epochs.unwrap_or(SWEEP_EPOCHS);
    if epochs == 0 {
        return Err(Failure::Config(
            "invalid epochs: must be at least 1 (got 0)".to_string(),
        ));
    }
    let seed = args.seed.unwrap_or(cfg.training.seed);
    let data = load_dataset(&cfg.paths.dataset)?;
    let table = hyperparameter_sweep(&data, epochs, cfg.training.learning_rate, seed)
        .map_err(runtime_err)?;
    let best = table.best();
    let best_key = (best.optimizer, best.activation);
    let mut text = String::from("optimizer,activation,rmse,best\n");
    for cell in &table.cells {
        let flag = u8::from((cell.optimizer, cell.activation) == best_key);
        let _ = writeln!(
            text,
            "{},{},{},{flag}",
            cell.optimizer, cell.activation, cell.rmse
        );
    }
    let out = args
        .out
        .or(cfg.paths.out)
        .unwrap_or_else(|| PathBuf::from("sweep.csv"));
    std::fs::write(&out, text)
        .map_err(|e| Failure::Runtime(format!("cannot write {}: {e}", out.display())))?;
    println!("table: {}", out.display());
    println!(
        "best: {} {} rmse={}",
        best.optimizer, best.activation, best.rmse
    );
    Ok(())
}

/// Writes one voltage and one current plot per experiment, each carrying a
/// polyline for either controller.
fn emit_plots(report: &ComparisonReport, out: &Path) -> Result<(), Failure> {
    let stem = out
        .file_stem()
        .map_or_else(|| "report".into(), |s| s.to_os_string());
    for experiment in ["startup", "load_step", "vin_step"] {
        let mut vo = Vec::new();
        let mut il = Vec::new();
        for (controller, exp, trace) in &report.traces {
            if exp != experiment {
                continue;
            }
            vo.push(Series {
                label: controller.clone(),
                points: trace.records.iter().map(|r| (r.t, r.v_o)).collect(),
            });
            il.push(Series {
                label: controller.clone(),
                points: trace.records.iter().map(|r| (r.t, r.i_l)).collect(),
            });
        }
        let plots = [
            ("vo", vo, "output voltage [V]", "output voltage"),
            ("il", il, "inductor current [A]", "inductor current"),
        ];
        for (kind, series, y_label, quantity) in plots {
            let mut name = stem.clone();
            name.push(format!("_{experiment}_{kind}.svg"));
            let path = out.with_file_name(name);
            svg::line_plot(
                &format!("{experiment}: {quantity}"),
                "time [s]",
                y_label,
                &series,
                &path,
            )?;
            println!("svg: {}", path.display());
        }
    }
    Ok(())
}

fn cmd_compare(args: CompareArgs) -> Result<(), Failure> {
    let cfg = RunConfig::load(args.config.as_deref())?;
    cfg.circuit.validate().map_err(config_err)?;
    cfg.smc.validate().map_err(config_err)?;
    let model_path = args.model.unwrap_or_else(|| cfg.paths.model.clone());
    let model = load_model(&model_path)?;
    let report = compare_controllers(
        &cfg.circuit,
        &cfg.smc,
        &model,
        &dnn_smc_config(),
        DEFAULT_ADAPTATION_GAIN,
    )
    .map_err(runtime_err)?;
    let out = args
        .out
        .or(cfg.paths.out)
        .unwrap_or_else(|| PathBuf::from("report.csv"));
    report.write_csv(&out).map_err(runtime_err)?;
    println!("report: {}", out.display());
    for row in &report.rows {
        println!(
            "{} {}: settling_ms={:.3} overshoot_v={:.4} recovery_ms={:.3} ripple_pp_v={:.4} ss_error_v={:.4}",
            row.controller,
            row.experiment,
            row.settling_ms,
            row.overshoot_v,
            row.recovery_ms,
            row.ripple_pp_v,
            row.ss_error_v
        );
    }
    if args.svg {
        emit_plots(&report, &out)?;
    }
    Ok(())
}
