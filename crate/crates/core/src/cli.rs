//! Command-line front end. Exit codes: 0 success, 2 I/O or parse failure,
//! 3 invalid configuration, 4 numerical failure.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use crate::config::RunConfig;
use crate::credal::{beta_at, BetaSchedule};
use crate::data::Dataset;
use crate::error::{RaclError, Result};
use crate::experiment::{self, DemoConfig};
use crate::model::{Model, ModelFile, ModelKind, MODEL_FORMAT_VERSION};
use crate::noise::{self, adjacent_grade_map, AuditFile, LogisticScorer, MisdiagnosisMap, SelectionMode};
use crate::trainer::{self, LossKind, TrainConfig};

pub const REPORT_FORMAT_VERSION: u32 = 1;

fn config_help() -> String {
    format!(
        "Config file keys and their defaults (every key optional, unknown keys rejected):\n\n{}",
        RunConfig::default().to_toml_string()
    )
}

#[derive(Debug, Parser)]
#[command(name = "racl", version, about = "Label-noise-robust training with adaptive credal losses")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum LossArg {
    Racl,
    Ce,
    Focal,
}

impl From<LossArg> for LossKind {
    fn from(l: LossArg) -> Self {
        match l {
            LossArg::Racl => LossKind::Racl,
            LossArg::Ce => LossKind::Ce,
            LossArg::Focal => LossKind::Focal,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModelArg {
    Linear,
    Mlp,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Preset {
    Blobs,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Inject asymmetric label noise into a dataset CSV.
    GenNoise {
        /// Input CSV with header id,feat_0..feat_{d-1},label.
        #[arg(long)]
        input: PathBuf,
        /// Misdiagnosis map JSON: {"0": [1], "1": [0, 2], ...}.
        #[arg(long, conflicts_with = "adjacent")]
        map: Option<PathBuf>,
        /// Use the adjacent-grade map over K classes.
        #[arg(long, value_name = "K")]
        adjacent: Option<usize>,
        /// Noise rate r_n in [0, 1).
        #[arg(long, default_value_t = 0.2)]
        rate: f64,
        /// Fraction of each class used to train the proxy scorer.
        #[arg(long, default_value_t = 0.3)]
        proxy_fraction: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Noisy training CSV (clean labels withheld).
        #[arg(long)]
        out: PathBuf,
        /// Audit JSON with clean labels and flip flags.
        #[arg(long)]
        audit: PathBuf,
        /// Flip each sample independently with probability r_n instead of
        /// flipping the highest-loss fraction.
        #[arg(long)]
        bernoulli: bool,
    },
    /// Train a model with the credal loss or a baseline.
    #[command(after_help = config_help())]
    Train {
        /// Training CSV; overrides paths.data from the config.
        #[arg(long)]
        data: Option<PathBuf>,
        /// TOML config file.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = LossArg::Racl)]
        loss: LossArg,
        /// Overrides train.seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Optional validation CSV evaluated after every epoch.
        #[arg(long)]
        val: Option<PathBuf>,
        /// Model JSON output [default: model.json].
        #[arg(long)]
        out: Option<PathBuf>,
        /// Log prefix: writes <prefix>.csv and <prefix>.json.
        #[arg(long)]
        log: Option<PathBuf>,
    },
    /// Evaluate a saved model on a dataset.
    Eval {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        data: PathBuf,
        /// Audit JSON from gen-noise: score against clean labels.
        #[arg(long)]
        audit: Option<PathBuf>,
        /// Report JSON output; printed to standard output as well.
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Compare ce, focal, racl and racl+focal on noisy synthetic blobs.
    Demo {
        #[arg(long, value_enum, default_value_t = Preset::Blobs)]
        preset: Preset,
        #[arg(long, default_value_t = 0.3)]
        noise_rate: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Distance between neighbouring class means.
        #[arg(long, default_value_t = 5.0)]
        separation: f64,
        #[arg(long, value_enum, default_value_t = ModelArg::Mlp)]
        model: ModelArg,
        /// Summary JSON output.
        #[arg(long, default_value = "demo_summary.json")]
        out: PathBuf,
    },
    /// Print the β schedule as t,beta lines.
    Schedule {
        #[arg(long, default_value_t = 0.75)]
        beta0: f64,
        #[arg(long, default_value_t = 0.55)]
        beta1: f64,
        #[arg(long, default_value_t = 25)]
        tmax: usize,
    },
}

/// Parses arguments, runs the command and returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => 0,
                _ => 2,
            };
        }
    };
    match run(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

pub fn run(command: Command) -> Result<()> {
    match command {
        Command::GenNoise { input, map, adjacent, rate, proxy_fraction, seed, out, audit, bernoulli } => {
            cmd_gen_noise(&input, map.as_deref(), adjacent, rate, proxy_fraction, seed, &out, &audit, bernoulli)
        }
        Command::Train { data, config, loss, seed, val, out, log } => {
            cmd_train(data, config.as_deref(), loss.into(), seed, val, out, log)
        }
        Command::Eval { model, data, audit, report } => {
            cmd_eval(&model, &data, audit.as_deref(), report.as_deref())
        }
        Command::Demo { preset: Preset::Blobs, noise_rate, seed, separation, model, out } => {
            cmd_demo(noise_rate, seed, separation, model, &out)
        }
        Command::Schedule { beta0, beta1, tmax } => cmd_schedule(beta0, beta1, tmax),
    }
}

fn write_json<T: serde::Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn cmd_gen_noise(
    input: &Path,
    map_path: Option<&Path>,
    adjacent: Option<usize>,
    rate: f64,
    proxy_fraction: f64,
    seed: u64,
    out: &Path,
    audit_path: &Path,
    bernoulli: bool,
) -> Result<()> {
    let data = Dataset::load(input)?;
    let map = match (map_path, adjacent) {
        (Some(p), _) => {
            let text = fs::read_to_string(p)?;
            let raw: BTreeMap<String, Vec<usize>> = serde_json::from_str(&text)?;
            let from_map = raw
                .iter()
                .flat_map(|(k, v)| k.parse::<usize>().ok().into_iter().chain(v.iter().copied()))
                .max()
                .map_or(0, |m| m + 1);
            let k = from_map.max(data.inferred_num_classes());
            MisdiagnosisMap::from_json(&text, k)?
        }
        (None, Some(k)) => adjacent_grade_map(k)?,
        (None, None) => {
            return Err(RaclError::InvalidConfig("either --map or --adjacent is required".into()))
        }
    };
    let cfg = noise::NoiseConfig {
        noise_rate: rate,
        proxy_fraction,
        seed,
        mode: if bernoulli { SelectionMode::Bernoulli } else { SelectionMode::LossRanked },
    };
    let outcome = noise::generate(&data, &map, &cfg, &LogisticScorer::default())?;
    outcome.noisy.observed().save(out)?;
    write_json(audit_path, &outcome.audit)?;
    println!(
        "{}",
        json!({
            "format_version": noise::AUDIT_FORMAT_VERSION,
            "config": cfg,
            "num_target": outcome.audit.num_target,
            "num_proxy": outcome.audit.proxy_ids.len(),
            "num_flipped": outcome.audit.num_flipped,
        })
    );
    Ok(())
}

fn ignored_relaxation_settings(cfg: &TrainConfig) -> Vec<&'static str> {
    let d = TrainConfig::default();
    let mut keys = Vec::new();
    if cfg.beta0 != d.beta0 || cfg.beta1 != d.beta1 || cfg.schedule_indexing != d.schedule_indexing {
        keys.push("beta");
    }
    if cfg.alpha != d.alpha || cfg.alpha_selector != d.alpha_selector || cfg.reestimate_alpha {
        keys.push("alpha");
    }
    if cfg.tau_policy != d.tau_policy {
        keys.push("tau_policy");
    }
    keys
}

fn cmd_train(
    data: Option<PathBuf>,
    config: Option<&Path>,
    loss: LossKind,
    seed: Option<u64>,
    val: Option<PathBuf>,
    out: Option<PathBuf>,
    log: Option<PathBuf>,
) -> Result<()> {
    let mut cfg = match config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    if let Some(s) = seed {
        cfg.train.seed = s;
    }
    let data_path = data
        .or_else(|| cfg.paths.data.clone())
        .ok_or_else(|| RaclError::InvalidConfig("no training data: pass --data or set paths.data".into()))?;
    let val_path = val.or_else(|| cfg.paths.val.clone());
    let out = out.or_else(|| cfg.paths.out.clone()).unwrap_or_else(|| "model.json".into());
    let log = log.or_else(|| cfg.paths.log.clone());
    if loss != LossKind::Racl {
        let ignored = ignored_relaxation_settings(&cfg.train);
        if !ignored.is_empty() {
            eprintln!("warning: --loss {loss} ignores the {} settings", ignored.join(", "));
        }
    }

    let train = Dataset::load(&data_path)?;
    let val = val_path.as_deref().map(Dataset::load).transpose()?;
    let k = cfg
        .num_classes
        .unwrap_or_else(|| train.inferred_num_classes().max(2))
        .max(val.as_ref().map_or(0, |v| v.inferred_num_classes()));
    let spec = cfg.model.spec(train.feature_dim());
    let (model, tlog) = match loss {
        LossKind::Racl => trainer::fit_racl(&train, &spec, k, &cfg.train, val.as_ref())?,
        other => trainer::fit_baseline(&train, &spec, k, &cfg.train, other, val.as_ref())?,
    };
    write_json(&out, &model.to_file(cfg.train.seed, tlog.header.config_hash.clone()))?;
    if let Some(prefix) = log {
        tlog.write_csv(fs::File::create(prefix.with_extension("csv"))?)?;
        write_json(&prefix.with_extension("json"), &tlog)?;
    }
    let train_metrics = trainer::evaluate(&model, &train)?;
    let val_metrics = val.as_ref().map(|v| trainer::evaluate(&model, v)).transpose()?;
    println!(
        "{}",
        json!({
            "format_version": REPORT_FORMAT_VERSION,
            "loss": loss,
            "config_hash": tlog.header.config_hash,
            "config": cfg,
            "train": train_metrics,
            "val": val_metrics,
        })
    );
    Ok(())
}

fn cmd_eval(model_path: &Path, data_path: &Path, audit_path: Option<&Path>, report: Option<&Path>) -> Result<()> {
    let file: ModelFile = serde_json::from_str(&fs::read_to_string(model_path)?)?;
    if file.format_version != MODEL_FORMAT_VERSION {
        return Err(RaclError::Parse(format!("unsupported model format version {}", file.format_version)));
    }
    let model = Model::from_file(&file)?;
    let data = Dataset::load(data_path)?;
    if data.feature_dim() != model.input_dim() {
        return Err(RaclError::DimensionMismatch { expected: model.input_dim(), actual: data.feature_dim() });
    }
    let body = match audit_path {
        None => json!({ "metrics": trainer::evaluate(&model, &data)? }),
        Some(p) => {
            let audit: AuditFile = serde_json::from_str(&fs::read_to_string(p)?)?;
            let lookup = audit.clean_labels();
            let mut clean = Vec::with_capacity(data.len());
            let mut flipped = Vec::with_capacity(data.len());
            for s in data.samples() {
                match lookup.get(&s.id) {
                    Some(&(label, f)) => {
                        clean.push(label);
                        flipped.push(f);
                    }
                    None if audit.proxy_ids.contains(&s.id) => {
                        clean.push(s.label);
                        flipped.push(false);
                    }
                    None => {
                        return Err(RaclError::InvalidInput(format!("sample {} is not in the audit", s.id)))
                    }
                }
            }
            let eval = trainer::evaluate_with_audit(&model, &data.with_labels(&clean)?, &flipped)?;
            json!({
                "metrics": eval.clean,
                "flipped_accuracy": eval.flipped_accuracy,
                "clean_subset_accuracy": eval.clean_subset_accuracy,
                "num_flipped": eval.num_flipped,
            })
        }
    };
    let mut report_value = json!({
        "format_version": REPORT_FORMAT_VERSION,
        "model": model_path,
        "data": data_path,
        "audit": audit_path,
        "model_config_hash": file.config_hash,
    });
    let metrics = &body["metrics"];
    for key in ["ap_macro", "auc_macro", "precision_macro", "recall_macro", "f1_macro", "accuracy"] {
        report_value[key] = metrics[key].clone();
    }
    if let (Some(obj), Some(extra)) = (report_value.as_object_mut(), body.as_object()) {
        for (k, v) in extra {
            obj.insert(k.clone(), v.clone());
        }
    }
    if let Some(path) = report {
        write_json(path, &report_value)?;
    }
    println!("{report_value}");
    Ok(())
}

fn cmd_demo(noise_rate: f64, seed: u64, separation: f64, model: ModelArg, out: &Path) -> Result<()> {
    let cfg = DemoConfig {
        noise_rate,
        seed,
        separation,
        model: match model {
            ModelArg::Linear => ModelKind::LinearSoftmax,
            ModelArg::Mlp => ModelKind::Mlp,
        },
        ..DemoConfig::default()
    };
    let summary = experiment::run_demo(&cfg)?;
    print!("{}", summary.table());
    write_json(out, &summary)?;
    Ok(())
}

fn cmd_schedule(beta0: f64, beta1: f64, tmax: usize) -> Result<()> {
    let schedule = BetaSchedule::new(beta0, beta1, tmax)?;
    for t in 0..=tmax {
        println!("{t},{}", beta_at(&schedule, t)?);
    }
    Ok(())
}
