//! `lumisense`: generate data, train and evaluate classifiers, run the
//! closed loop on a scenario, or serve as the sensor hub.
//!
//! Exit codes: 0 success, 1 usage error, 2 data error, 3 invariant violation.

mod models;

use std::fs;
use std::io::Write as _;
use std::net::TcpListener;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use lumisense::config::RunConfig;
use lumisense::control::{run_automation_loop, Perception, Scenario};
use lumisense::dataset::Dataset;
use lumisense::eval::{blind_test, cross_validate, one_vs_rest, EvalReport, CSV_HEADER};
use lumisense::face::EMOTION_DIM;
use lumisense::sensor::run_hub;
use lumisense::skeleton::POSTURE_DIM;
use lumisense::synth::{face_dataset, gen_face_dataset, gen_skeleton_dataset, posture_dataset};
use lumisense::Error;

use models::{LoadedModel, ModelSpec};

/// `println!` that ends the process quietly once stdout is a closed pipe.
macro_rules! say {
    ($($arg:tt)*) => {
        if let Err(e) = writeln!(std::io::stdout(), $($arg)*) {
            stdout_failed(e);
        }
    };
}

fn stdout_failed(e: std::io::Error) -> ! {
    if e.kind() == std::io::ErrorKind::BrokenPipe {
        std::process::exit(0);
    }
    eprintln!("error: cannot write to stdout: {e}");
    std::process::exit(2);
}

#[derive(Parser)]
#[command(
    name = "lumisense",
    version,
    about = "Posture- and comfort-aware lighting control toolkit"
)]
struct Cli {
    /// Flat `key = value` config file; flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Task {
    Posture,
    Emotion,
}

impl Task {
    fn dim(self) -> usize {
        match self {
            Task::Posture => POSTURE_DIM,
            Task::Emotion => EMOTION_DIM,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum EvalMode {
    Cv,
    Blind,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic labeled dataset as CSV.
    GenData {
        #[arg(long, value_enum)]
        kind: Task,
        #[arg(long)]
        subjects: Option<usize>,
        #[arg(long)]
        frames: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Train a classifier (`--model`) or a network (`--optimizer`) and save it.
    Train {
        #[arg(long, value_enum)]
        task: Task,
        /// svm, lr, cart, knn, rfc, gaussiannb, lda or lda-svm.
        #[arg(
            long,
            conflicts_with = "optimizer",
            required_unless_present = "optimizer"
        )]
        model: Option<String>,
        /// sgd, rmsprop, adagrad, adadelta, adam, adamax or nadam.
        #[arg(long)]
        optimizer: Option<String>,
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        model_out: PathBuf,
        #[arg(long)]
        epochs: Option<usize>,
        #[arg(long)]
        batch: Option<usize>,
    },
    /// Cross-validate or blind-test a model spec; writes text and CSV reports.
    Eval {
        #[arg(long, value_enum)]
        mode: EvalMode,
        #[arg(
            long,
            conflicts_with = "optimizer",
            required_unless_present = "optimizer"
        )]
        model: Option<String>,
        #[arg(long)]
        optimizer: Option<String>,
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        folds: Option<usize>,
        #[arg(long)]
        holdout: Option<f64>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        epochs: Option<usize>,
        #[arg(long)]
        batch: Option<usize>,
        /// Path prefix: writes `<prefix>.txt`, `<prefix>.csv` and, for
        /// one-vs-rest problems, `<prefix>.roc.csv`.
        #[arg(long)]
        report_out: Option<PathBuf>,
    },
    /// Run the closed loop over a scenario script.
    Simulate {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long)]
        trace_out: Option<PathBuf>,
        #[arg(long)]
        posture_model: Option<PathBuf>,
        #[arg(long)]
        emotion_model: Option<PathBuf>,
    },
    /// Listen for sensor nodes and print every state transition.
    Hub {
        #[arg(long)]
        listen: String,
        /// Exit after this many connections have come and gone.
        #[arg(long)]
        max_connections: Option<usize>,
    },
}

enum Failure {
    Usage(String),
    Data(String),
    Invariant(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Config(_) => Failure::Usage(e.to_string()),
            _ => Failure::Data(e.to_string()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Data(e.to_string())
    }
}

type CmdResult = Result<(), Failure>;

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
        Err(Failure::Data(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
        Err(Failure::Invariant(m)) => {
            eprintln!("invariant violated: {m}");
            ExitCode::from(3)
        }
    }
}

fn run(cli: Cli) -> CmdResult {
    let mut cfg = match &cli.config {
        Some(p) => {
            RunConfig::load(p).map_err(|e| Failure::Usage(format!("{}: {e}", p.display())))?
        }
        None => RunConfig::default(),
    };
    let mut set = |key: &str, value: Option<String>| -> CmdResult {
        if let Some(v) = value {
            cfg.set(key, &v)
                .map_err(|e| Failure::Usage(e.to_string()))?;
        }
        Ok(())
    };
    match cli.command {
        Command::GenData {
            kind,
            subjects,
            frames,
            seed,
            out,
        } => {
            let prefix = if kind == Task::Posture {
                "pose"
            } else {
                "face"
            };
            set(
                &format!("{prefix}.subjects"),
                subjects.map(|v| v.to_string()),
            )?;
            set(&format!("{prefix}.frames"), frames.map(|v| v.to_string()))?;
            set("seed", seed.map(|v| v.to_string()))?;
            gen_data(&cfg, kind, &out)
        }
        Command::Train {
            task,
            model,
            optimizer,
            data,
            seed,
            model_out,
            epochs,
            batch,
        } => {
            set("seed", seed.map(|v| v.to_string()))?;
            set("nn.epochs", epochs.map(|v| v.to_string()))?;
            set("nn.batch", batch.map(|v| v.to_string()))?;
            let spec = ModelSpec::parse(model.as_deref(), optimizer.as_deref())?;
            train(&cfg, task, &spec, &data, &model_out)
        }
        Command::Eval {
            mode,
            model,
            optimizer,
            data,
            folds,
            holdout,
            seed,
            epochs,
            batch,
            report_out,
        } => {
            set("seed", seed.map(|v| v.to_string()))?;
            set("eval.folds", folds.map(|v| v.to_string()))?;
            set("eval.holdout", holdout.map(|v| v.to_string()))?;
            set("nn.epochs", epochs.map(|v| v.to_string()))?;
            set("nn.batch", batch.map(|v| v.to_string()))?;
            let spec = ModelSpec::parse(model.as_deref(), optimizer.as_deref())?;
            eval(&cfg, mode, &spec, &data, report_out.as_deref())
        }
        Command::Simulate {
            scenario,
            trace_out,
            posture_model,
            emotion_model,
        } => {
            set(
                "sim.posture_model",
                posture_model.map(|p| p.display().to_string()),
            )?;
            set(
                "sim.emotion_model",
                emotion_model.map(|p| p.display().to_string()),
            )?;
            simulate(&cfg, &scenario, trace_out.as_deref())
        }
        Command::Hub {
            listen,
            max_connections,
        } => hub(&listen, max_connections),
    }
}

fn gen_data(cfg: &RunConfig, kind: Task, out: &Path) -> CmdResult {
    let data = match kind {
        Task::Posture => posture_dataset(&gen_skeleton_dataset(&cfg.pose_config()?)?)?,
        Task::Emotion => face_dataset(&gen_face_dataset(&cfg.face_config()?)?)?,
    };
    data.save(out)
        .map_err(|e| Failure::Data(format!("{}: {e}", out.display())))?;
    say!(
        "wrote {} rows x {} features to {}",
        data.len(),
        data.dim(),
        out.display()
    );
    for (c, n) in data.classes.iter().zip(data.class_counts()) {
        say!("  {c}: {n}");
    }
    say!("  subjects: {}", data.distinct_subjects().len());
    Ok(())
}

fn load_data(path: &Path, task: Option<Task>) -> Result<Dataset, Failure> {
    let data =
        Dataset::load(path).map_err(|e| Failure::Data(format!("{}: {e}", path.display())))?;
    if let Some(t) = task {
        if data.dim() != t.dim() {
            return Err(Failure::Data(format!(
                "{} has {} features; this task needs {}",
                path.display(),
                data.dim(),
                t.dim()
            )));
        }
    }
    Ok(data)
}

fn train(cfg: &RunConfig, task: Task, spec: &ModelSpec, data_path: &Path, out: &Path) -> CmdResult {
    let data = load_data(data_path, Some(task))?;
    let (model, history) = spec.fit(cfg, &data)?;
    model
        .save(out)
        .map_err(|e| Failure::Data(format!("{}: {e}", out.display())))?;
    say!("model {}", spec.name());
    for line in spec.config_echo(cfg)? {
        say!("  {line}");
    }
    for (i, loss) in history.iter().enumerate() {
        say!("epoch {} loss {loss:.6}", i + 1);
    }
    say!(
        "training accuracy {:.4} on {} rows",
        model.accuracy(&data)?,
        data.len()
    );
    say!("saved to {}", out.display());
    Ok(())
}

fn evaluate(
    cfg: &RunConfig,
    mode: EvalMode,
    spec: &ModelSpec,
    data: &Dataset,
) -> Result<EvalReport, Failure> {
    let seed = cfg.seed();
    let report = match mode {
        EvalMode::Cv => cross_validate(data, cfg.folds(), seed, |train, _| {
            spec.fit(cfg, train).map(|(m, _)| m)
        })?,
        EvalMode::Blind => blind_test(data, cfg.holdout(), seed, |train| {
            spec.fit(cfg, train).map(|(m, _)| m)
        })?,
    };
    if mode == EvalMode::Blind && report.subject_overlap != 0 {
        return Err(Failure::Invariant(format!(
            "{} subjects appear in both training and blind sets",
            report.subject_overlap
        )));
    }
    Ok(report)
}

fn eval(
    cfg: &RunConfig,
    mode: EvalMode,
    spec: &ModelSpec,
    data_path: &Path,
    report_out: Option<&Path>,
) -> CmdResult {
    let data = load_data(data_path, None)?;
    let mode_name = if mode == EvalMode::Cv { "cv" } else { "blind" };
    let mut text = String::new();
    let mut csv = format!("{CSV_HEADER}\n");
    let mut roc = String::from("mode,model,fpr,tpr\n");

    let mut problems = vec![(mode_name.to_string(), data.clone())];
    if data.n_classes() > 2 {
        for c in &data.classes {
            problems.push((format!("{mode_name}:{c}"), one_vs_rest(&data, c)?));
        }
    }
    for (name, problem) in &problems {
        let report = evaluate(cfg, mode, spec, problem)?;
        text.push_str(&report.to_text(&format!("[{name}] {}", spec.name())));
        text.push('\n');
        csv.push_str(&report.csv_rows(name, &spec.name()));
        if let Some(r) = &report.roc {
            for (x, y) in &r.points {
                roc.push_str(&format!("{name},{},{x},{y}\n", spec.name()));
            }
        }
    }
    if let Some(prefix) = report_out {
        let with = |ext: &str| PathBuf::from(format!("{}.{ext}", prefix.display()));
        fs::write(with("txt"), &text)?;
        fs::write(with("csv"), &csv)?;
        if roc.lines().count() > 1 {
            fs::write(with("roc.csv"), &roc)?;
        }
    }
    say!("{}", text.trim_end_matches('\n'));
    if let Some(prefix) = report_out {
        say!("reports written to {}.{{txt,csv}}", prefix.display());
    }
    Ok(())
}

fn simulate(cfg: &RunConfig, scenario_path: &Path, trace_out: Option<&Path>) -> CmdResult {
    let text = fs::read_to_string(scenario_path)
        .map_err(|e| Failure::Data(format!("{}: {e}", scenario_path.display())))?;
    let scenario: Scenario = text
        .parse()
        .map_err(|e| Failure::Data(format!("{}: {e}", scenario_path.display())))?;
    let posture = match cfg.get("sim.posture_model") {
        Some(p) => LoadedModel::load(Path::new(p))?,
        None => models::default_posture_model(cfg)?,
    };
    let emotion = match cfg.get("sim.emotion_model") {
        Some(p) => LoadedModel::load(Path::new(p))?,
        None => models::default_emotion_model(cfg)?,
    };
    let perception = Perception {
        posture: Some(posture.as_classifier()),
        emotion: Some(emotion.as_classifier()),
    };
    let mut plant = cfg.plant();
    plant.levels = [0; 3];
    let mut loop_cfg = cfg.loop_config();
    loop_cfg.stop_when_steady = true;
    let trace = run_automation_loop(
        &scenario,
        &cfg.control_config()?,
        &loop_cfg,
        plant,
        perception,
    )?;
    if let Some(out) = trace_out {
        fs::write(out, trace.to_csv())?;
    }
    let last = trace.last().expect("at least one step");
    say!(
        "{} steps, steady={}, occupancy={}, lux={}, levels={:?}, faults={}",
        trace.rows.len(),
        trace.steady,
        last.occupancy,
        last.lux[0],
        last.levels,
        trace.rows.iter().map(|r| r.faults.len()).sum::<usize>()
    );
    if trace.safety_violations > 0 {
        return Err(Failure::Invariant(format!(
            "{} steps issued intensity commands in an empty room",
            trace.safety_violations
        )));
    }
    Ok(())
}

fn hub(listen: &str, max_connections: Option<usize>) -> CmdResult {
    let listener = TcpListener::bind(listen)
        .map_err(|e| Failure::Data(format!("cannot bind {listen}: {e}")))?;
    say!("listening on {}", listener.local_addr()?);
    let report = run_hub(listener, max_connections, |entry| {
        say!("{entry}");
        let _ = std::io::stdout().flush();
    })?;
    say!(
        "final occupancy={} after {} messages",
        report.state.occupancy(),
        report.arrivals.len()
    );
    Ok(())
}
