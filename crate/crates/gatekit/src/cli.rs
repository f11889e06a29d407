//! Command-line front end: simulate, build datasets, train, evaluate,
//! sweep, and solve.
//!
//! Every knob lives in a [`RunConfig`] (key=value file plus `--set`
//! overrides); each artifact-producing command writes the fully resolved
//! config next to its primary output so runs are reproducible from
//! `(inputs, config, seed)` alone.
//!
//! Exit codes: 0 success, 1 usage error, 2 runtime error; `solve` uses the
//! DIMACS-tool convention 10 = SAT, 20 = UNSAT (0 when the budget runs out).

use crate::aig::{parse_aiger, write_aiger, Aig};
use crate::dataset::{read_dataset, write_dataset, CircuitRecord};
use crate::model::{load_checkpoint, save_checkpoint, ModelConfig, ModelParams};
use crate::rng::SplitMix64;
use crate::sat::{
    parse_dimacs, solve, tseitin, Cnf, SimilarityIndex, SolveLimits, SolveStatus,
};
use crate::sim::{logic_prob, simulate_threaded, SimConfig};
use crate::sweep::{sweep, SweepBudgets};
use crate::train::{evaluate, history_to_csv, train_multistage, TrainConfig};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

/// All run parameters as an explicit key=value set. Unknown keys are
/// rejected when parsing.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub seed: u64,
    pub patterns: usize,
    pub dim: usize,
    pub hidden: usize,
    pub lr: f64,
    pub weight_decay: f64,
    pub batch: usize,
    pub epochs_stage1: usize,
    pub epochs_stage2: usize,
    pub w_prob: f64,
    pub w_rc: f64,
    pub w_func: f64,
    pub delta: f64,
    pub pie_enabled: bool,
    pub multistage_enabled: bool,
    pub max_pairs: usize,
    pub pair_conflicts: u64,
    pub max_sat_calls: Option<u64>,
    pub solve_conflicts: Option<u64>,
    pub threads: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            seed: 0,
            patterns: 15_000,
            dim: 64,
            hidden: 32,
            lr: 1e-4,
            weight_decay: 1e-10,
            batch: 16,
            epochs_stage1: 20,
            epochs_stage2: 40,
            w_prob: 1.0,
            w_rc: 1.0,
            w_func: 1.0,
            delta: 1e-5,
            pie_enabled: true,
            multistage_enabled: true,
            max_pairs: 1000,
            pair_conflicts: 10_000,
            max_sat_calls: None,
            solve_conflicts: None,
            threads: 1,
        }
    }
}

impl RunConfig {
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), String> {
        fn parse<T: std::str::FromStr>(key: &str, v: &str) -> Result<T, String> {
            v.parse()
                .map_err(|_| format!("bad value {v:?} for key {key:?}"))
        }
        match key {
            "seed" => self.seed = parse(key, value)?,
            "patterns" => self.patterns = parse(key, value)?,
            "dim" => self.dim = parse(key, value)?,
            "hidden" => self.hidden = parse(key, value)?,
            "lr" => self.lr = parse(key, value)?,
            "weight_decay" => self.weight_decay = parse(key, value)?,
            "batch" => self.batch = parse(key, value)?,
            "epochs_stage1" => self.epochs_stage1 = parse(key, value)?,
            "epochs_stage2" => self.epochs_stage2 = parse(key, value)?,
            "w_prob" => self.w_prob = parse(key, value)?,
            "w_rc" => self.w_rc = parse(key, value)?,
            "w_func" => self.w_func = parse(key, value)?,
            "delta" => self.delta = parse(key, value)?,
            "pie_enabled" => self.pie_enabled = parse(key, value)?,
            "multistage_enabled" => self.multistage_enabled = parse(key, value)?,
            "max_pairs" => self.max_pairs = parse(key, value)?,
            "pair_conflicts" => self.pair_conflicts = parse(key, value)?,
            "max_sat_calls" => {
                self.max_sat_calls = if value.is_empty() {
                    None
                } else {
                    Some(parse(key, value)?)
                }
            }
            "solve_conflicts" => {
                self.solve_conflicts = if value.is_empty() {
                    None
                } else {
                    Some(parse(key, value)?)
                }
            }
            "threads" => self.threads = parse(key, value)?,
            other => return Err(format!("unknown config key {other:?}")),
        }
        Ok(())
    }

    pub fn parse_file(&mut self, text: &str) -> Result<(), String> {
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| format!("line {}: expected key=value", lineno + 1))?;
            self.set(key.trim(), value.trim())?;
        }
        Ok(())
    }

    /// Canonical serialized form (sorted keys), written next to outputs.
    pub fn to_key_values(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "batch={}", self.batch);
        let _ = writeln!(s, "delta={}", self.delta);
        let _ = writeln!(s, "dim={}", self.dim);
        let _ = writeln!(s, "epochs_stage1={}", self.epochs_stage1);
        let _ = writeln!(s, "epochs_stage2={}", self.epochs_stage2);
        let _ = writeln!(s, "hidden={}", self.hidden);
        let _ = writeln!(s, "lr={}", self.lr);
        let _ = writeln!(
            s,
            "max_sat_calls={}",
            self.max_sat_calls.map(|v| v.to_string()).unwrap_or_default()
        );
        let _ = writeln!(s, "max_pairs={}", self.max_pairs);
        let _ = writeln!(s, "multistage_enabled={}", self.multistage_enabled);
        let _ = writeln!(s, "pair_conflicts={}", self.pair_conflicts);
        let _ = writeln!(s, "patterns={}", self.patterns);
        let _ = writeln!(s, "pie_enabled={}", self.pie_enabled);
        let _ = writeln!(s, "seed={}", self.seed);
        let _ = writeln!(
            s,
            "solve_conflicts={}",
            self.solve_conflicts.map(|v| v.to_string()).unwrap_or_default()
        );
        let _ = writeln!(s, "threads={}", self.threads);
        let _ = writeln!(s, "w_func={}", self.w_func);
        let _ = writeln!(s, "w_prob={}", self.w_prob);
        let _ = writeln!(s, "w_rc={}", self.w_rc);
        let _ = writeln!(s, "weight_decay={}", self.weight_decay);
        s
    }

    pub fn sim_config(&self) -> SimConfig {
        SimConfig {
            num_patterns: self.patterns,
            seed: self.seed,
            exhaustive_when_small: true,
        }
    }

    pub fn model_config(&self) -> ModelConfig {
        ModelConfig {
            dim: self.dim,
            hidden: self.hidden,
            pie_enabled: self.pie_enabled,
            seed: self.seed,
        }
    }

    pub fn train_config(&self) -> TrainConfig {
        TrainConfig {
            epochs_stage1: self.epochs_stage1,
            epochs_stage2: self.epochs_stage2,
            batch_size: self.batch,
            w_prob: self.w_prob,
            w_rc: self.w_rc,
            w_func: self.w_func,
            lr: self.lr,
            weight_decay: self.weight_decay,
            multistage_enabled: self.multistage_enabled,
            seed: self.seed,
        }
    }

    pub fn sweep_budgets(&self) -> SweepBudgets {
        SweepBudgets {
            pair_conflicts: self.pair_conflicts,
            max_sat_calls: self.max_sat_calls,
        }
    }
}

const USAGE: &str = "\
gatekit - AIG embedding toolkit

USAGE: gatekit <COMMAND> [OPTIONS]

COMMANDS:
  sim <aiger>              simulate and write per-node probabilities (CSV)
  dataset <dir>            build a labeled corpus from a directory of .aag files
  train <dataset>          train the two-stage model, write checkpoint + metrics
  eval <ckpt> <dataset>    evaluate a checkpoint, write a report (JSON)
  sweep <aiger>            SAT-sweep a circuit, write reduced AIGER + stats
  solve <aiger|dimacs>     decide satisfiability (exit 10 = SAT, 20 = UNSAT)

COMMON OPTIONS:
  -o, --output <path>      primary output path
  --config <file>          key=value run-config file
  --set <key=value>        override one config key (repeatable)
  --seed <n>               shorthand for --set seed=<n>
  --patterns <n>           shorthand for --set patterns=<n>
  --threads <n>            shorthand for --set threads=<n>

COMMAND OPTIONS:
  train:  --metrics <csv>  per-epoch metrics path (default <output>.metrics.csv)
  sweep:  --model <ckpt>   rank candidate pairs by embedding similarity
          --baseline-order deterministic unranked pair order
          --stats <json>   sweep statistics path
  solve:  --model <ckpt>   enable the similarity decision hook (AIGER inputs)
          --assert-value <0|1>  asserted value of the first PO (default 1)
          --conflicts <n>  conflict budget (exit 0 with status unknown)
          --stats <json>   solver statistics path
";

struct ParsedArgs {
    command: String,
    positional: Vec<String>,
    options: Vec<(String, String)>,
    flags: Vec<String>,
}

fn parse_args(args: Vec<String>) -> Result<ParsedArgs, String> {
    let mut it = args.into_iter().peekable();
    let command = it.next().ok_or_else(|| "missing command".to_string())?;
    let mut positional = Vec::new();
    let mut options = Vec::new();
    let mut flags = Vec::new();
    let value_opts = [
        "-o",
        "--output",
        "--config",
        "--set",
        "--seed",
        "--patterns",
        "--threads",
        "--metrics",
        "--model",
        "--stats",
        "--assert-value",
        "--conflicts",
        "--delta",
        "--max-pairs",
    ];
    let flag_opts = ["--baseline-order"];
    while let Some(arg) = it.next() {
        if value_opts.contains(&arg.as_str()) {
            let value = it
                .next()
                .ok_or_else(|| format!("option {arg} needs a value"))?;
            let key = if arg == "-o" { "--output".into() } else { arg };
            options.push((key, value));
        } else if flag_opts.contains(&arg.as_str()) {
            flags.push(arg);
        } else if arg.starts_with('-') {
            return Err(format!("unknown option {arg}"));
        } else {
            positional.push(arg);
        }
    }
    Ok(ParsedArgs {
        command,
        positional,
        options,
        flags,
    })
}

impl ParsedArgs {
    fn option(&self, key: &str) -> Option<&str> {
        self.options
            .iter()
            .rev()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }

    fn has_flag(&self, key: &str) -> bool {
        self.flags.iter().any(|f| f == key)
    }

    fn build_config(&self) -> Result<RunConfig, String> {
        let mut config = RunConfig::default();
        if let Some(path) = self.option("--config") {
            let text = std::fs::read_to_string(path)
                .map_err(|e| format!("cannot read config {path}: {e}"))?;
            config.parse_file(&text)?;
        }
        for (k, v) in &self.options {
            match k.as_str() {
                "--set" => {
                    let (key, value) = v
                        .split_once('=')
                        .ok_or_else(|| format!("--set expects key=value, got {v:?}"))?;
                    config.set(key.trim(), value.trim())?;
                }
                "--seed" => config.set("seed", v)?,
                "--patterns" => config.set("patterns", v)?,
                "--threads" => config.set("threads", v)?,
                "--delta" => config.set("delta", v)?,
                "--max-pairs" => config.set("max_pairs", v)?,
                "--conflicts" => config.set("solve_conflicts", v)?,
                _ => {}
            }
        }
        Ok(config)
    }
}

fn write_resolved_config(primary_output: &Path, config: &RunConfig) -> std::io::Result<()> {
    let mut path = primary_output.as_os_str().to_owned();
    path.push(".cfg");
    std::fs::write(PathBuf::from(path), config.to_key_values())
}

/// Entry point. Returns the process exit code.
pub fn run<I: IntoIterator<Item = String>>(args: I) -> i32 {
    let args: Vec<String> = args.into_iter().collect();
    if args.is_empty() || args[0] == "--help" || args[0] == "-h" || args[0] == "help" {
        print!("{USAGE}");
        return if args.is_empty() { 1 } else { 0 };
    }
    let parsed = match parse_args(args) {
        Ok(p) => p,
        Err(e) => {
            eprintln!("usage error: {e}");
            eprint!("{USAGE}");
            return 1;
        }
    };
    let config = match parsed.build_config() {
        Ok(c) => c,
        Err(e) => {
            eprintln!("usage error: {e}");
            return 1;
        }
    };
    let result = match parsed.command.as_str() {
        "sim" => cmd_sim(&parsed, &config),
        "dataset" => cmd_dataset(&parsed, &config),
        "train" => cmd_train(&parsed, &config),
        "eval" => cmd_eval(&parsed, &config),
        "sweep" => cmd_sweep(&parsed, &config),
        "solve" => cmd_solve(&parsed, &config),
        other => {
            eprintln!("usage error: unknown command {other:?}");
            eprint!("{USAGE}");
            return 1;
        }
    };
    match result {
        Ok(code) => code,
        Err(CommandError::Usage(msg)) => {
            eprintln!("usage error: {msg}");
            1
        }
        Err(CommandError::Runtime(msg)) => {
            eprintln!("error: {msg}");
            2
        }
    }
}

enum CommandError {
    Usage(String),
    Runtime(String),
}

impl CommandError {
    fn usage(msg: impl Into<String>) -> Self {
        CommandError::Usage(msg.into())
    }
}

impl<E: std::error::Error> From<E> for CommandError {
    fn from(e: E) -> Self {
        CommandError::Runtime(e.to_string())
    }
}

fn required_input<'a>(parsed: &'a ParsedArgs, what: &str, idx: usize) -> Result<&'a str, CommandError> {
    parsed
        .positional
        .get(idx)
        .map(|s| s.as_str())
        .ok_or_else(|| CommandError::usage(format!("{} expects {what}", parsed.command)))
}

fn load_aiger(path: &str) -> Result<Aig, CommandError> {
    let text = std::fs::read_to_string(path)?;
    Ok(parse_aiger(&text)?)
}

fn cmd_sim(parsed: &ParsedArgs, config: &RunConfig) -> Result<i32, CommandError> {
    let input = required_input(parsed, "an AIGER file", 0)?;
    let aig = load_aiger(input)?;
    let sim_config = config.sim_config();
    let plan = sim_config.patterns_for(aig.num_pis());
    let pi_sigs = plan.generate(aig.num_pis());
    let sigs = simulate_threaded(&aig, &pi_sigs, config.threads)?;
    let mut csv = String::from("node,kind,level,prob\n");
    for (n, sig) in sigs.iter().enumerate() {
        let kind = match aig.gate(n).kind() {
            crate::aig::GateKind::Pi => "pi",
            crate::aig::GateKind::And => "and",
            crate::aig::GateKind::Not => "not",
        };
        let _ = writeln!(csv, "{n},{kind},{},{}", aig.level(n), logic_prob(sig));
    }
    let output = PathBuf::from(parsed.option("--output").unwrap_or("probs.csv"));
    std::fs::write(&output, csv)?;
    write_resolved_config(&output, config)?;
    println!(
        "simulated {} nodes under {} patterns -> {}",
        aig.len(),
        pi_sigs.first().map(|s| s.len_bits()).unwrap_or(0),
        output.display()
    );
    Ok(0)
}

fn cmd_dataset(parsed: &ParsedArgs, config: &RunConfig) -> Result<i32, CommandError> {
    let dir = required_input(parsed, "a directory of .aag files", 0)?;
    let mut paths: Vec<PathBuf> = std::fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "aag"))
        .collect();
    paths.sort();
    if paths.is_empty() {
        return Err(CommandError::usage(format!("no .aag files in {dir}")));
    }
    let sim_config = config.sim_config();
    let records = build_records_parallel(&paths, &sim_config, config)?;
    let output = PathBuf::from(parsed.option("--output").unwrap_or("corpus.jsonl"));
    write_dataset(&records, &output)?;
    write_resolved_config(&output, config)?;
    let pairs: usize = records.iter().map(|r| r.pairs.len()).sum();
    println!(
        "built {} records ({} function pairs) -> {}",
        records.len(),
        pairs,
        output.display()
    );
    Ok(0)
}

fn build_records_parallel(
    paths: &[PathBuf],
    sim_config: &SimConfig,
    config: &RunConfig,
) -> Result<Vec<CircuitRecord>, CommandError> {
    let build_one = |path: &PathBuf, idx: usize| -> Result<CircuitRecord, String> {
        let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
        let aig = parse_aiger(&text).map_err(|e| format!("{}: {e}", path.display()))?;
        CircuitRecord::build(
            aig,
            sim_config,
            config.max_pairs,
            config.seed ^ (idx as u64).wrapping_mul(0x9e37_79b9),
        )
        .map_err(|e| format!("{}: {e}", path.display()))
    };
    if config.threads <= 1 {
        return paths
            .iter()
            .enumerate()
            .map(|(i, p)| build_one(p, i).map_err(CommandError::Runtime))
            .collect();
    }
    let mut slots: Vec<Option<Result<CircuitRecord, String>>> = (0..paths.len()).map(|_| None).collect();
    let next = std::sync::atomic::AtomicUsize::new(0);
    let slot_refs = std::sync::Mutex::new(&mut slots);
    std::thread::scope(|scope| {
        for _ in 0..config.threads.min(paths.len()) {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, std::sync::atomic::Ordering::SeqCst);
                if i >= paths.len() {
                    break;
                }
                let result = build_one(&paths[i], i);
                slot_refs.lock().expect("poisoned")[i] = Some(result);
            });
        }
    });
    slots
        .into_iter()
        .map(|s| s.expect("all slots filled").map_err(CommandError::Runtime))
        .collect()
}

/// Deterministic 80/10/10 train/val/test split by seeded shuffle.
pub fn split_corpus(
    records: Vec<CircuitRecord>,
    seed: u64,
) -> (Vec<CircuitRecord>, Vec<CircuitRecord>, Vec<CircuitRecord>) {
    let mut order: Vec<usize> = (0..records.len()).collect();
    let mut rng = SplitMix64::new(seed ^ 0x5117_0CA7);
    rng.shuffle(&mut order);
    let n = records.len();
    let n_test = (n / 10).max(1).min(n.saturating_sub(2));
    let n_val = (n / 10).max(1).min(n.saturating_sub(n_test + 1));
    let mut slots: Vec<Option<CircuitRecord>> = records.into_iter().map(Some).collect();
    let take = |slots: &mut Vec<Option<CircuitRecord>>, idxs: &[usize]| -> Vec<CircuitRecord> {
        idxs.iter()
            .map(|&i| slots[i].take().expect("distinct indices"))
            .collect()
    };
    let test_idx: Vec<usize> = order[..n_test].to_vec();
    let val_idx: Vec<usize> = order[n_test..n_test + n_val].to_vec();
    let train_idx: Vec<usize> = order[n_test + n_val..].to_vec();
    let mut test = take(&mut slots, &test_idx);
    let mut val = take(&mut slots, &val_idx);
    let mut train = take(&mut slots, &train_idx);
    // Keep deterministic input order inside each split.
    let sort_key = |r: &CircuitRecord| (r.aig.len(), write_aiger(&r.aig));
    test.sort_by_key(sort_key);
    val.sort_by_key(sort_key);
    train.sort_by_key(sort_key);
    (train, val, test)
}

fn cmd_train(parsed: &ParsedArgs, config: &RunConfig) -> Result<i32, CommandError> {
    let dataset_path = required_input(parsed, "a dataset file", 0)?;
    let records = read_dataset(Path::new(dataset_path))?;
    let (train_split, val_split, test_split) = split_corpus(records, config.seed);
    let params = ModelParams::init(&config.model_config());
    let outcome = train_multistage(&train_split, &val_split, params, &config.train_config())?;
    let output = PathBuf::from(parsed.option("--output").unwrap_or("ckpt.json"));
    save_checkpoint(&outcome.params, &output)?;
    let stage1_path = output.with_extension("stage1.json");
    save_checkpoint(&outcome.stage1_params, &stage1_path)?;
    let metrics_path = parsed
        .option("--metrics")
        .map(PathBuf::from)
        .unwrap_or_else(|| output.with_extension("metrics.csv"));
    std::fs::write(&metrics_path, history_to_csv(&outcome.history))?;
    let report = match evaluate(&outcome.params, &val_split, &test_split) {
        Ok(r) => Some(r),
        Err(crate::train::TrainError::NoPositivePairs) => None,
        Err(e) => return Err(e.into()),
    };
    let summary = serde_json::json!({
        "checkpoint": output.display().to_string(),
        "train_circuits": train_split.len(),
        "val_circuits": val_split.len(),
        "test_circuits": test_split.len(),
        "test_report": report,
    });
    let summary_path = output.with_extension("summary.json");
    std::fs::write(&summary_path, serde_json::to_string_pretty(&summary)?)?;
    write_resolved_config(&output, config)?;
    match &report {
        Some(r) => println!(
            "trained {} epochs -> {} (test PE {:.4}, F1 {:.4})",
            outcome.history.len(),
            output.display(),
            r.pe,
            r.f1
        ),
        None => println!(
            "trained {} epochs -> {} (no positive test pairs; classification metrics skipped)",
            outcome.history.len(),
            output.display()
        ),
    }
    Ok(0)
}

fn cmd_eval(parsed: &ParsedArgs, config: &RunConfig) -> Result<i32, CommandError> {
    let ckpt_path = required_input(parsed, "a checkpoint and a dataset", 0)?;
    let dataset_path = required_input(parsed, "a checkpoint and a dataset", 1)?;
    let params = load_checkpoint(Path::new(ckpt_path))?;
    let records = read_dataset(Path::new(dataset_path))?;
    // Half for threshold selection, half for reporting.
    let mut order: Vec<usize> = (0..records.len()).collect();
    let mut rng = SplitMix64::new(config.seed);
    rng.shuffle(&mut order);
    let half = (records.len() / 2).max(1);
    let val_idx: std::collections::BTreeSet<usize> = order[..half].iter().copied().collect();
    let mut val = Vec::new();
    let mut test = Vec::new();
    for (i, r) in records.into_iter().enumerate() {
        if val_idx.contains(&i) {
            val.push(r);
        } else {
            test.push(r);
        }
    }
    if test.is_empty() {
        test = val.clone();
    }
    let report = evaluate(&params, &val, &test)?;
    let output = PathBuf::from(parsed.option("--output").unwrap_or("eval.json"));
    std::fs::write(&output, serde_json::to_string_pretty(&report)?)?;
    write_resolved_config(&output, config)?;
    println!(
        "PE {:.4}  recall {:.4}  precision {:.4}  F1 {:.4}  AUC {:.4}  theta {:.6}",
        report.pe, report.recall, report.precision, report.f1, report.auc, report.threshold
    );
    Ok(0)
}

fn cmd_sweep(parsed: &ParsedArgs, config: &RunConfig) -> Result<i32, CommandError> {
    let input = required_input(parsed, "an AIGER file", 0)?;
    let aig = load_aiger(input)?;
    let model = match parsed.option("--model") {
        Some(path) if !parsed.has_flag("--baseline-order") => {
            Some(load_checkpoint(Path::new(path))?)
        }
        _ => None,
    };
    let outcome = sweep(&aig, model.as_ref(), &config.sim_config(), &config.sweep_budgets())?;
    let output = PathBuf::from(parsed.option("--output").unwrap_or("swept.aag"));
    std::fs::write(&output, write_aiger(&outcome.aig))?;
    let stats_path = parsed
        .option("--stats")
        .map(PathBuf::from)
        .unwrap_or_else(|| output.with_extension("stats.json"));
    std::fs::write(&stats_path, serde_json::to_string_pretty(&outcome.stats)?)?;
    write_resolved_config(&output, config)?;
    println!(
        "swept {} -> {} ANDs ({} merges, {} sat calls) -> {}",
        outcome.stats.initial_and_count,
        outcome.stats.final_and_count,
        outcome.stats.merges,
        outcome.stats.sat_calls,
        output.display()
    );
    Ok(0)
}

fn cmd_solve(parsed: &ParsedArgs, config: &RunConfig) -> Result<i32, CommandError> {
    let input = required_input(parsed, "an AIGER or DIMACS file", 0)?;
    let text = std::fs::read_to_string(input)?;
    let is_dimacs = text
        .lines()
        .find(|l| !l.trim().is_empty() && !l.trim_start().starts_with('c'))
        .is_some_and(|l| l.trim_start().starts_with("p cnf"));
    let (cnf, aig): (Cnf, Option<Aig>) = if is_dimacs {
        (parse_dimacs(&text)?, None)
    } else {
        let aig = parse_aiger(&text)?;
        let po = *aig
            .pos()
            .first()
            .ok_or_else(|| CommandError::usage("circuit has no primary output"))?;
        let assert_value = match parsed.option("--assert-value").unwrap_or("1") {
            "0" => false,
            "1" => true,
            other => {
                return Err(CommandError::usage(format!(
                    "--assert-value expects 0 or 1, got {other}"
                )))
            }
        };
        (tseitin(&aig, po, assert_value)?, Some(aig))
    };
    let index = match (parsed.option("--model"), &aig) {
        (Some(path), Some(aig)) => {
            let params = load_checkpoint(Path::new(path))?;
            let embeddings = crate::model::functional_embeddings(aig, &params)?;
            let var_embeddings: Vec<(usize, Vec<f64>)> = cnf
                .var_of_node
                .iter()
                .map(|(&node, &var)| (var, embeddings[node].clone()))
                .collect();
            Some(SimilarityIndex::build(
                cnf.num_vars,
                &var_embeddings,
                config.delta,
            ))
        }
        (Some(_), None) => {
            eprintln!("note: --model ignored for DIMACS input (no circuit to embed)");
            None
        }
        _ => None,
    };
    let limits = SolveLimits {
        max_conflicts: config.solve_conflicts,
    };
    let result = solve(&cnf, index.as_ref(), &limits)?;
    if let Some(stats_path) = parsed.option("--stats") {
        let stats = serde_json::json!({
            "status": result.status,
            "stats": result.stats,
        });
        std::fs::write(stats_path, serde_json::to_string_pretty(&stats)?)?;
    }
    match result.status {
        SolveStatus::Sat => {
            println!("s SATISFIABLE");
            if let Some(model) = &result.model {
                let mut line = String::from("v");
                for (i, &v) in model.iter().enumerate() {
                    let _ = write!(line, " {}", if v { (i + 1) as i64 } else { -((i + 1) as i64) });
                }
                println!("{line} 0");
            }
            Ok(10)
        }
        SolveStatus::Unsat => {
            println!("s UNSATISFIABLE");
            Ok(20)
        }
        SolveStatus::Unknown => {
            println!("s UNKNOWN");
            Ok(0)
        }
    }
}
