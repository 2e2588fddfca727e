//! Command-line front end.
//!
//! Exit codes: 0 success, 1 invalid input, 2 verification failure.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::architecture::{
    emit_dot, emit_json, emit_rtl_text, report, ArchitectureNetlist, ControlSchedule, CostModel,
    Metrics,
};
use crate::binder::{BindingConfig, BindingResult, KindPriority};
use crate::optimizer::MergeRecord;
use crate::rcg::{build_rcg, export_dot, EdgeCounts};
use crate::schedule::{
    gen_block_interleaver, gen_from_permutation, gen_linear, gen_random, max_live, parse_schedule,
    AccessSchedule, Cycle, RandomSpec,
};
use crate::simulator::{occupancy_csv, simulate, verify};
use crate::{synthesize, SynthError};

const DEFAULT_OUT: &str = "star-out";

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error("{0}")]
    Verification(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => 1,
            CliError::Verification(_) => 2,
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Input(e.to_string())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum EmitKind {
    Json,
    Dot,
    Rtl,
    Csv,
}

#[derive(Debug, Parser)]
#[command(
    name = "star-forge",
    version,
    about = "Synthesize FIFO/LIFO/register adapters from I/O access schedules"
)]
pub struct Cli {
    /// Binding/cost configuration file (TOML).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Seed for randomized generators.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Extra artifacts to write.
    #[arg(long, global = true, value_enum, value_delimiter = ',')]
    pub emit: Vec<EmitKind>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a schedule document.
    Gen {
        #[command(subcommand)]
        kind: GenKind,
    },
    /// Synthesize, self-verify and write the design.
    Synth {
        schedule: PathBuf,
        #[command(flatten)]
        knobs: Knobs,
    },
    /// Replay a netlist and control schedule against a schedule.
    Simulate {
        netlist: PathBuf,
        control: PathBuf,
        schedule: PathBuf,
    },
    /// Compare configurations on one schedule.
    Report {
        schedule: PathBuf,
        configs: Vec<PathBuf>,
    },
    /// Render the compatibility graph of a schedule.
    Dot { schedule: PathBuf },
}

#[derive(Debug, Subcommand)]
pub enum GenKind {
    Linear {
        #[arg(long)]
        n: usize,
        /// First read cycle; defaults to `n`.
        #[arg(long)]
        offset: Option<Cycle>,
    },
    Block {
        #[arg(long)]
        rows: usize,
        #[arg(long)]
        cols: usize,
        #[arg(long, default_value_t = 1)]
        pin: usize,
        #[arg(long, default_value_t = 1)]
        pout: usize,
        #[arg(long)]
        offset: Option<Cycle>,
    },
    Perm {
        #[arg(long, value_delimiter = ',', required = true)]
        perm: Vec<usize>,
        #[arg(long, default_value_t = 1)]
        pin: usize,
        #[arg(long, default_value_t = 1)]
        pout: usize,
        #[arg(long)]
        offset: Option<Cycle>,
    },
    Random {
        #[arg(long, default_value_t = 16)]
        n: usize,
        #[arg(long, default_value_t = 48)]
        max_cycle: Cycle,
        #[arg(long, default_value_t = 2)]
        pin: usize,
        #[arg(long, default_value_t = 2)]
        pout: usize,
        #[arg(long, default_value_t = 2)]
        max_reads: usize,
    },
}

/// Command-line overrides of configuration-file knobs.
#[derive(Debug, Default, Args)]
pub struct Knobs {
    #[arg(long)]
    pub no_fifo: bool,
    #[arg(long)]
    pub no_lifo: bool,
    #[arg(long)]
    pub min_fifo_len: Option<usize>,
    #[arg(long)]
    pub min_lifo_len: Option<usize>,
    #[arg(long)]
    pub fill: Option<f64>,
    #[arg(long, value_enum)]
    pub priority: Option<Priority>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Priority {
    Fifo,
    Lifo,
}

/// Flat configuration file. Every key is optional; unknown keys are errors.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ConfigFile {
    pub name: Option<String>,
    pub min_fifo_len: usize,
    pub min_lifo_len: usize,
    pub fill_threshold: f64,
    pub kind_priority: KindPriority,
    pub enable_fifo: bool,
    pub enable_lifo: bool,
    pub reg_slot_cost: f64,
    pub fifo_slot_cost: f64,
    pub lifo_slot_cost: f64,
    pub control_cost: f64,
}

impl Default for ConfigFile {
    fn default() -> Self {
        let b = BindingConfig::default();
        let c = CostModel::default();
        ConfigFile {
            name: None,
            min_fifo_len: b.min_fifo_len,
            min_lifo_len: b.min_lifo_len,
            fill_threshold: b.fill_threshold,
            kind_priority: b.kind_priority,
            enable_fifo: b.enable_fifo,
            enable_lifo: b.enable_lifo,
            reg_slot_cost: c.reg_slot,
            fifo_slot_cost: c.fifo_slot,
            lifo_slot_cost: c.lifo_slot,
            control_cost: c.control,
        }
    }
}

/// Resolved settings for one pipeline run.
#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub name: String,
    pub binding: BindingConfig,
    pub cost: CostModel,
    pub out_dir: PathBuf,
    pub emit: Vec<EmitKind>,
    pub seed: u64,
}

impl ConfigFile {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Input(format!("config: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = read(path)?;
        Self::parse(&text).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
    }

    pub fn binding(&self) -> BindingConfig {
        BindingConfig {
            min_fifo_len: self.min_fifo_len,
            min_lifo_len: self.min_lifo_len,
            fill_threshold: self.fill_threshold,
            kind_priority: self.kind_priority,
            enable_fifo: self.enable_fifo,
            enable_lifo: self.enable_lifo,
        }
    }

    pub fn cost(&self) -> CostModel {
        CostModel {
            reg_slot: self.reg_slot_cost,
            fifo_slot: self.fifo_slot_cost,
            lifo_slot: self.lifo_slot_cost,
            control: self.control_cost,
        }
    }

    fn resolve(&self, name: String, cli: &Cli) -> Result<RunConfig, CliError> {
        let run = RunConfig {
            name: self.name.clone().unwrap_or(name),
            binding: self.binding(),
            cost: self.cost(),
            out_dir: cli
                .out
                .clone()
                .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT)),
            emit: cli.emit.clone(),
            seed: cli.seed,
        };
        run.binding
            .check()
            .map_err(|e| CliError::Input(e.to_string()))?;
        if !run.cost.is_valid() {
            return Err(CliError::Input(
                "costs must be finite and non-negative".into(),
            ));
        }
        Ok(run)
    }
}

impl Knobs {
    fn apply(&self, cfg: &mut ConfigFile) {
        if self.no_fifo {
            cfg.enable_fifo = false;
        }
        if self.no_lifo {
            cfg.enable_lifo = false;
        }
        if let Some(v) = self.min_fifo_len {
            cfg.min_fifo_len = v;
        }
        if let Some(v) = self.min_lifo_len {
            cfg.min_lifo_len = v;
        }
        if let Some(v) = self.fill {
            cfg.fill_threshold = v;
        }
        match self.priority {
            Some(Priority::Fifo) => cfg.kind_priority = KindPriority::Fifo,
            Some(Priority::Lifo) => cfg.kind_priority = KindPriority::Lifo,
            None => {}
        }
    }
}

/// Everything `synth` records about a run besides the design itself.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ReportDocument {
    pub config: String,
    pub metrics: Metrics,
    pub rcg: EdgeCounts,
    pub binding: BindingResult,
    pub merges: Vec<MergeRecord>,
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

fn load_schedule(path: &Path) -> Result<AccessSchedule, CliError> {
    parse_schedule(&read(path)?).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

fn load_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    serde_json::from_str(&read(path)?)
        .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

fn write_file(dir: &Path, name: &str, contents: &str) -> Result<PathBuf, CliError> {
    fs::create_dir_all(dir)?;
    let path = dir.join(name);
    fs::write(&path, contents)?;
    Ok(path)
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable");
    s.push('\n');
    s
}

fn base_config(cli: &Cli) -> Result<ConfigFile, CliError> {
    match &cli.config {
        Some(p) => ConfigFile::load(p),
        None => Ok(ConfigFile::default()),
    }
}

fn config_name(path: &Path) -> String {
    path.file_stem()
        .map_or_else(|| "config".into(), |s| s.to_string_lossy().into_owned())
}

/// Parse arguments and run. `out` receives what the binary prints on stdout.
pub fn run(cli: &Cli, out: &mut dyn Write) -> Result<(), CliError> {
    match &cli.command {
        Command::Gen { kind } => cmd_gen(cli, kind, out),
        Command::Synth { schedule, knobs } => cmd_synth(cli, schedule, knobs, out),
        Command::Simulate {
            netlist,
            control,
            schedule,
        } => cmd_simulate(cli, netlist, control, schedule, out),
        Command::Report { schedule, configs } => cmd_report(cli, schedule, configs, out),
        Command::Dot { schedule } => cmd_dot(cli, schedule, out),
    }
}

pub fn generate(kind: &GenKind, seed: u64) -> Result<AccessSchedule, CliError> {
    let bad = |e: crate::schedule::ScheduleError| CliError::Input(e.to_string());
    match *kind {
        GenKind::Linear { n, offset } => gen_linear(n, offset.unwrap_or(n as Cycle)).map_err(bad),
        GenKind::Block {
            rows,
            cols,
            pin,
            pout,
            offset,
        } => gen_block_interleaver(rows, cols, pin, pout, offset).map_err(bad),
        GenKind::Perm {
            ref perm,
            pin,
            pout,
            offset,
        } => gen_from_permutation(perm, pin, pout, offset).map_err(bad),
        GenKind::Random {
            n,
            max_cycle,
            pin,
            pout,
            max_reads,
        } => gen_random(
            RandomSpec {
                tokens: n,
                max_cycle,
                inputs: pin,
                outputs: pout,
                max_reads,
            },
            seed,
        )
        .map_err(bad),
    }
}

fn cmd_gen(cli: &Cli, kind: &GenKind, out: &mut dyn Write) -> Result<(), CliError> {
    let s = generate(kind, cli.seed)?;
    let summary = format!("tokens={} max_live={}", s.len(), max_live(&s));
    match &cli.out {
        Some(dir) => {
            let path = write_file(dir, "schedule.json", &s.to_document())?;
            writeln!(out, "{summary} file={}", path.display())?;
        }
        None => {
            out.write_all(s.to_document().as_bytes())?;
            eprintln!("{summary}");
        }
    }
    Ok(())
}

fn cmd_synth(
    cli: &Cli,
    schedule: &Path,
    knobs: &Knobs,
    out: &mut dyn Write,
) -> Result<(), CliError> {
    let s = load_schedule(schedule)?;
    let mut file = base_config(cli)?;
    knobs.apply(&mut file);
    let name = cli
        .config
        .as_deref()
        .map_or_else(|| "default".to_string(), config_name);
    let run = file.resolve(name, cli)?;
    let syn = match synthesize(&s, &run.binding) {
        Ok(syn) => syn,
        Err(SynthError::Config(e)) => return Err(CliError::Input(e.to_string())),
        Err(e) => return Err(CliError::Verification(e.to_string())),
    };
    let metrics = report(&syn.architecture, &s, &run.cost);
    let doc = ReportDocument {
        config: run.name.clone(),
        metrics: metrics.clone(),
        rcg: syn.graph.edge_counts(),
        binding: syn.binding.clone(),
        merges: syn.architecture.merges.clone(),
    };
    let dir = &run.out_dir;
    write_file(dir, "netlist.json", &to_json(&syn.netlist))?;
    write_file(dir, "control.json", &to_json(&syn.control))?;
    write_file(dir, "report.json", &to_json(&doc))?;
    for kind in &run.emit {
        match kind {
            EmitKind::Json => {
                write_file(dir, "design.json", &emit_json(&syn.netlist, &syn.control))?;
            }
            EmitKind::Dot => {
                write_file(dir, "architecture.dot", &emit_dot(&syn.netlist))?;
                write_file(dir, "rcg.dot", &export_dot(&syn.graph))?;
            }
            EmitKind::Rtl => {
                write_file(
                    dir,
                    "design.vhd.txt",
                    &emit_rtl_text(&syn.netlist, &syn.control),
                )?;
            }
            EmitKind::Csv => {
                write_file(dir, "occupancy.csv", &occupancy_csv(&syn.simulation))?;
            }
        }
    }
    writeln!(out, "verified ok")?;
    writeln!(out, "{}", metrics.summary())?;
    Ok(())
}

fn cmd_simulate(
    cli: &Cli,
    netlist: &Path,
    control: &Path,
    schedule: &Path,
    out: &mut dyn Write,
) -> Result<(), CliError> {
    let n: ArchitectureNetlist = load_json(netlist)?;
    let c: ControlSchedule = load_json(control)?;
    let s = load_schedule(schedule)?;
    let r = simulate(&n, &c, &s);
    let dir = cli
        .out
        .clone()
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT));
    if cli.emit.contains(&EmitKind::Csv) {
        write_file(&dir, "occupancy.csv", &occupancy_csv(&r))?;
    }
    if cli.emit.contains(&EmitKind::Json) {
        write_file(&dir, "simulation.json", &r.to_json())?;
    }
    match verify(&r, &s) {
        Ok(()) => {
            writeln!(out, "ok cycles={}", r.cycles())?;
            Ok(())
        }
        Err(fail) => {
            writeln!(out, "mismatch")?;
            for m in &fail.mismatches {
                writeln!(
                    out,
                    "  port {} @{}: expected {} observed {}",
                    m.port,
                    m.cycle,
                    m.expected.as_deref().unwrap_or("-"),
                    m.observed.as_deref().unwrap_or("-")
                )?;
            }
            for v in &r.violations {
                writeln!(
                    out,
                    "  violation @{} {}: {}",
                    v.cycle, v.element, v.description
                )?;
            }
            Err(CliError::Verification(format!(
                "{} mismatching port(s), {} violation(s)",
                fail.mismatches.len(),
                fail.violations
            )))
        }
    }
}

/// One row of the configuration comparison.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ReportRow {
    pub config: String,
    pub slots: usize,
    pub saved: i64,
    pub ctrl: usize,
    pub cost: f64,
    pub max_live: usize,
}

pub fn report_rows(s: &AccessSchedule, configs: &[RunConfig]) -> Result<Vec<ReportRow>, CliError> {
    let results: Vec<Result<ReportRow, CliError>> = std::thread::scope(|scope| {
        let handles: Vec<_> = configs
            .iter()
            .map(|run| {
                scope.spawn(move || {
                    let syn = synthesize(s, &run.binding).map_err(|e| match e {
                        SynthError::Config(e) => CliError::Input(e.to_string()),
                        e => CliError::Verification(format!("{}: {e}", run.name)),
                    })?;
                    let m = report(&syn.architecture, s, &run.cost);
                    Ok(ReportRow {
                        config: run.name.clone(),
                        slots: m.slots,
                        saved: m.saved,
                        ctrl: m.ctrl,
                        cost: m.cost,
                        max_live: m.max_live,
                    })
                })
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("report worker panicked"))
            .collect()
    });
    results.into_iter().collect()
}

pub fn rows_markdown(rows: &[ReportRow]) -> String {
    let mut out = String::from(
        "| config | slots | saved | ctrl | cost | max_live |\n|---|---|---|---|---|---|\n",
    );
    for r in rows {
        out.push_str(&format!(
            "| {} | {} | {} | {} | {:.2} | {} |\n",
            r.config, r.slots, r.saved, r.ctrl, r.cost, r.max_live
        ));
    }
    out
}

pub fn rows_csv(rows: &[ReportRow]) -> String {
    let mut out = String::from("config,slots,saved,ctrl,cost,max_live\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{:.2},{}\n",
            r.config, r.slots, r.saved, r.ctrl, r.cost, r.max_live
        ));
    }
    out
}

fn cmd_report(
    cli: &Cli,
    schedule: &Path,
    configs: &[PathBuf],
    out: &mut dyn Write,
) -> Result<(), CliError> {
    let s = load_schedule(schedule)?;
    let runs = if configs.is_empty() {
        vec![base_config(cli)?.resolve("default".into(), cli)?]
    } else {
        configs
            .iter()
            .map(|p| ConfigFile::load(p)?.resolve(config_name(p), cli))
            .collect::<Result<Vec<_>, _>>()?
    };
    let rows = report_rows(&s, &runs)?;
    let md = rows_markdown(&rows);
    out.write_all(md.as_bytes())?;
    if let Some(dir) = &cli.out {
        write_file(dir, "report.md", &md)?;
        write_file(dir, "report.csv", &rows_csv(&rows))?;
    }
    Ok(())
}

fn cmd_dot(cli: &Cli, schedule: &Path, out: &mut dyn Write) -> Result<(), CliError> {
    let s = load_schedule(schedule)?;
    let dot = export_dot(&build_rcg(&s));
    match &cli.out {
        Some(dir) => {
            let path = write_file(dir, "rcg.dot", &dot)?;
            writeln!(out, "wrote {}", path.display())?;
        }
        None => out.write_all(dot.as_bytes())?,
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_rejects_unknown_keys() {
        assert!(ConfigFile::parse("min_fifo_len = 7\nfill = 0.9\n").is_err());
        let cfg = ConfigFile::parse(
            "min_fifo_len = 7\nfill_threshold = 0.95\nkind_priority = \"lifo\"\n",
        )
        .unwrap();
        assert_eq!(cfg.min_fifo_len, 7);
        assert_eq!(cfg.kind_priority, KindPriority::Lifo);
        assert!(cfg.enable_fifo);
    }

    #[test]
    fn knobs_override_file() {
        let mut cfg = ConfigFile::default();
        Knobs {
            no_fifo: true,
            min_lifo_len: Some(4),
            ..Knobs::default()
        }
        .apply(&mut cfg);
        assert!(!cfg.enable_fifo);
        assert!(cfg.enable_lifo);
        assert_eq!(cfg.min_lifo_len, 4);
    }

    #[test]
    fn markdown_has_one_row_per_config() {
        let rows = vec![ReportRow {
            config: "a".into(),
            slots: 5,
            saved: 1,
            ctrl: 2,
            cost: 11.0,
            max_live: 5,
        }];
        let md = rows_markdown(&rows);
        assert_eq!(md.lines().count(), 3);
        assert!(md.contains("| a | 5 | 1 | 2 | 11.00 | 5 |"));
    }
}
