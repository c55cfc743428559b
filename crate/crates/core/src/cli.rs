//! Command-line surface. Each `cmd_*` function returns the rendered output
//! so it can be tested without a process boundary; [`run`] parses flags,
//! writes output, and maps failures to exit codes.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::numfmt::{parse_rational, Rational};
use crate::packing::{HybridizationConfig, SramPageSpec};
use crate::pipeline::PipelineProfile;
use crate::plan::{Plan, PlanConfig, VerifyMode, VerifyReport, MAX_REPORTED_MISMATCHES};
use crate::prefixdb::{hop_or_default, parse_database, parse_trace, LengthIndexedOracle, PrefixDatabase};
use crate::report::{render, sweep_grain, to_csv, to_json, DepthRule, Format, PlanReport};
use crate::tiler::{choose_strides, FinalSegment, GrainSpec, StrideList, StrideSearchConfig};
use crate::trie::{build_unibit_trie, compute_lean_levels};

#[derive(Parser, Debug)]
#[command(name = "tiletree", version, about = "Plan longest-prefix-match lookup as a tree of fixed-grain TCAM blocks")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Per-depth pointer overhead of the database's unibit trie (CSV).
    Analyze(AnalyzeArgs),
    /// Enumerate stride lists under a pointer-overhead budget.
    Strides(StridesArgs),
    /// Build, pack and place a plan; print its resource and bounds report.
    Plan(PlanArgs),
    /// Check a plan's lookups against the reference longest-prefix match.
    Verify(VerifyArgs),
    /// Compare single-TCAM and tiled bits across grain widths (CSV).
    Sweep(SweepArgs),
}

#[derive(Args, Debug, Clone)]
pub struct DbArgs {
    /// Prefix database: one `<bits>/<len> <next_hop>` per line.
    #[arg(long)]
    pub db: PathBuf,
    /// Address width in bits.
    #[arg(long)]
    pub width: usize,
}

#[derive(Args, Debug, Clone)]
pub struct OutArgs {
    #[arg(long, default_value = "json")]
    pub format: Format,
    /// Write output here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct AnalyzeArgs {
    #[command(flatten)]
    pub db: DbArgs,
    /// Deepest level to report; defaults to the longest prefix length.
    #[arg(long)]
    pub max_level: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum FinalSegmentArg {
    Terminal,
    LastChosen,
}

#[derive(Args, Debug)]
pub struct StridesArgs {
    #[command(flatten)]
    pub db: DbArgs,
    /// Number of strides.
    #[arg(long)]
    pub height: usize,
    /// Bits the strides must cover; defaults to the longest prefix length.
    #[arg(long)]
    pub coverage: Option<usize>,
    /// Keep stride lists whose overhead is below this many entries.
    #[arg(long)]
    pub budget: u64,
    #[arg(long, default_value = "44x512")]
    pub grain: GrainSpec,
    #[arg(long)]
    pub tag_bits: Option<usize>,
    #[arg(long, value_enum, default_value = "terminal")]
    pub final_segment: FinalSegmentArg,
    /// Print at most this many candidates.
    #[arg(long)]
    pub limit: Option<usize>,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Args, Debug, Clone)]
pub struct PlanArgs {
    #[command(flatten)]
    pub db: DbArgs,
    /// Hyphen-joined stride widths, e.g. 19-29-16.
    #[arg(long)]
    pub strides: StrideList,
    #[arg(long, default_value = "44x512")]
    pub grain: GrainSpec,
    /// Tag width for packing; defaults to ceil(log2 D).
    #[arg(long)]
    pub tag_bits: Option<usize>,
    /// Convert tables to SRAM when expansion stays within --factor.
    #[arg(long)]
    pub hybridize: bool,
    /// Conversion factor, e.g. 3, 1.5 or 3/2.
    #[arg(long, default_value = "3", value_parser = parse_factor)]
    pub factor: Rational,
    #[arg(long, default_value = "128x1024")]
    pub sram_page: SramPageSpec,
    /// Pipeline profile (TOML); defaults to a synthetic 16-stage profile.
    #[arg(long)]
    pub profile: Option<PathBuf>,
    /// Fraction of prefixes the threshold length M must cover.
    #[arg(long, default_value = "0.99", value_parser = parse_factor)]
    pub coverage: Rational,
    #[arg(long, default_value_t = crate::pipeline::DEFAULT_OVERFLOW_CAPACITY)]
    pub overflow_capacity: usize,
    /// Close a super-table once it would exceed this many entries.
    #[arg(long)]
    pub max_group_entries: Option<usize>,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum ModeArg {
    /// Exhaustive up to 16-bit addresses, sampled beyond.
    Auto,
    Exhaustive,
    Sampled,
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub plan: PlanArgs,
    #[arg(long, value_enum, default_value = "auto")]
    pub mode: ModeArg,
    /// Random addresses in sampled mode (prefix boundaries are always added).
    #[arg(long, default_value_t = 100_000)]
    pub samples: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Replay these addresses (one per line) instead of generating a set.
    #[arg(long)]
    pub trace: Option<PathBuf>,
    /// Corrupt one entry first; the run must then fail.
    #[arg(long)]
    pub inject_fault: bool,
}

#[derive(Args, Debug)]
pub struct SweepArgs {
    #[command(flatten)]
    pub plan: PlanArgs,
    /// Comma-separated grain widths.
    #[arg(long, value_delimiter = ',', required = true)]
    pub widths: Vec<usize>,
    /// `constant-area` (D = W0*D0/w) or `fixed:<D>`.
    #[arg(long, default_value = "constant-area")]
    pub depth_rule: DepthRule,
    /// Grain the improvements are measured against.
    #[arg(long, default_value = "44x512")]
    pub reference_grain: GrainSpec,
}

fn parse_factor(s: &str) -> std::result::Result<Rational, String> {
    parse_rational(s).ok_or_else(|| format!("`{s}` is not a decimal or fraction"))
}

pub fn load_database(args: &DbArgs) -> Result<PrefixDatabase> {
    let text =
        fs::read_to_string(&args.db).map_err(|e| Error::Io(format!("reading {}: {e}", args.db.display())))?;
    parse_database(&text, args.width)
}

impl PlanArgs {
    pub fn config(&self) -> Result<PlanConfig> {
        let profile = match &self.profile {
            Some(p) => PipelineProfile::load(p)?,
            None => PipelineProfile::default(),
        };
        let cfg = PlanConfig {
            grain: self.grain,
            tag_bits: self.tag_bits,
            hybridization: HybridizationConfig {
                enabled: self.hybridize,
                factor: self.factor,
                sram: self.sram_page,
                ..HybridizationConfig::default()
            },
            profile,
            coverage: self.coverage,
            overflow_capacity: self.overflow_capacity,
            max_group_entries: self.max_group_entries,
            ..PlanConfig::new(self.db.width, self.strides.clone())
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Lean-level rows for levels `1..=max_level`.
pub fn cmd_analyze(db: &PrefixDatabase, max_level: usize) -> Result<String> {
    let lean = compute_lean_levels(&build_unibit_trie(db), db.len())?;
    let mut out = Vec::new();
    lean.write_csv(max_level.min(lean.max_depth()), &mut out)?;
    Ok(String::from_utf8(out).expect("utf8"))
}

#[derive(Serialize)]
struct StrideRow {
    strides: String,
    overhead: u64,
}

#[derive(Serialize)]
struct StrideDoc {
    final_segment: &'static str,
    height: usize,
    coverage: usize,
    budget: u64,
    tag_bits: usize,
    candidates: Vec<StrideRow>,
}

pub fn cmd_strides(db: &PrefixDatabase, cfg: &StrideSearchConfig, limit: Option<usize>, format: Format) -> Result<String> {
    let lean = compute_lean_levels(&build_unibit_trie(db), db.len())?;
    let mut found = choose_strides(cfg, &lean)?;
    if let Some(k) = limit {
        found.truncate(k);
    }
    let rows: Vec<StrideRow> = found
        .into_iter()
        .map(|c| StrideRow {
            strides: c.strides.to_string(),
            overhead: c.overhead,
        })
        .collect();
    match format {
        Format::Json => to_json(&StrideDoc {
            final_segment: cfg.final_segment.describe(),
            height: cfg.height,
            coverage: cfg.coverage,
            budget: cfg.budget,
            tag_bits: cfg.tag_bits,
            candidates: rows,
        }),
        Format::Csv => Ok(format!("# {}\n{}", cfg.final_segment.describe(), to_csv(&rows)?)),
    }
}

pub fn cmd_plan(db: &PrefixDatabase, cfg: PlanConfig, format: Format) -> Result<String> {
    let plan = Plan::build(db, cfg)?;
    render(&PlanReport::new(&plan)?, format)
}

#[derive(Clone, Debug)]
pub struct VerifyOptions {
    pub mode: ModeArg,
    pub samples: usize,
    pub seed: u64,
    pub trace: Option<String>,
    pub inject_fault: bool,
}

/// Returns the rendered report and whether every checked address agreed.
pub fn cmd_verify(db: &PrefixDatabase, cfg: PlanConfig, opts: &VerifyOptions, format: Format) -> Result<(String, bool)> {
    let width = cfg.address_width;
    let mut plan = Plan::build(db, cfg)?;
    if opts.inject_fault {
        plan.inject_fault();
    }
    let report = match &opts.trace {
        Some(text) => replay(&plan, &parse_trace(text, width)?),
        None => {
            let mode = match opts.mode {
                ModeArg::Auto => VerifyMode::auto(width, opts.samples, opts.seed),
                ModeArg::Exhaustive => VerifyMode::Exhaustive,
                ModeArg::Sampled => VerifyMode::Sampled {
                    samples: opts.samples,
                    seed: opts.seed,
                },
            };
            plan.verify(mode)?
        }
    };
    let passed = report.passed();
    Ok((render(&report, format)?, passed))
}

fn replay(plan: &Plan, addresses: &[crate::bits::Bits]) -> VerifyReport {
    let oracle = LengthIndexedOracle::new(plan.database());
    let mut report = VerifyReport {
        mode: VerifyMode::Sampled {
            samples: addresses.len(),
            seed: 0,
        },
        checked: 0,
        mismatch_count: 0,
        mismatches: Vec::new(),
    };
    for &a in addresses {
        report.checked += 1;
        let want = hop_or_default(oracle.lookup(a).map(|p| &p.next_hop));
        let got = plan.search_hop(a);
        if want != got {
            report.mismatch_count += 1;
            if report.mismatches.len() < MAX_REPORTED_MISMATCHES {
                report.mismatches.push(crate::plan::Mismatch {
                    address: a.to_string(),
                    got: got.to_string(),
                    expected: want.to_string(),
                });
            }
        }
    }
    report
}

pub fn cmd_sweep_grain(
    db: &PrefixDatabase,
    cfg: &PlanConfig,
    widths: &[usize],
    rule: DepthRule,
    reference: GrainSpec,
) -> Result<String> {
    to_csv(&sweep_grain(db, cfg, widths, rule, reference)?)
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => fs::write(p, text).map_err(|e| Error::Io(format!("writing {}: {e}", p.display()))),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes())?;
            stdout.flush()?;
            Ok(())
        }
    }
}

/// Exit code 0 on success, 1 when verification finds mismatches, 2 on any
/// error.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            2
        }
    }
}

fn context(what: &'static str, db: &DbArgs) -> impl Fn(Error) -> Error {
    let path = db.db.display().to_string();
    move |e| Error::InvalidConfig(format!("{what} {path}: {e}"))
}

fn dispatch(command: Command) -> Result<i32> {
    match command {
        Command::Analyze(a) => {
            let db = load_database(&a.db)?;
            let max = a.max_level.unwrap_or(db.max_len());
            emit(a.out.as_deref(), &cmd_analyze(&db, max)?)?;
            Ok(0)
        }
        Command::Strides(a) => {
            let db = load_database(&a.db)?;
            let mut cfg = StrideSearchConfig::new(a.height, a.coverage.unwrap_or(db.max_len()), a.budget, a.grain);
            if let Some(t) = a.tag_bits {
                cfg.tag_bits = t;
            }
            cfg.final_segment = match a.final_segment {
                FinalSegmentArg::Terminal => FinalSegment::TerminalLevel,
                FinalSegmentArg::LastChosen => FinalSegment::LastChosenLevel,
            };
            emit(a.out.out.as_deref(), &cmd_strides(&db, &cfg, a.limit, a.out.format)?)?;
            Ok(0)
        }
        Command::Plan(a) => {
            let db = load_database(&a.db)?;
            let text = cmd_plan(&db, a.config()?, a.out.format).map_err(context("planning", &a.db))?;
            emit(a.out.out.as_deref(), &text)?;
            Ok(0)
        }
        Command::Verify(v) => {
            let db = load_database(&v.plan.db)?;
            let trace = match &v.trace {
                Some(p) => Some(fs::read_to_string(p).map_err(|e| Error::Io(format!("reading {}: {e}", p.display())))?),
                None => None,
            };
            let opts = VerifyOptions {
                mode: v.mode,
                samples: v.samples,
                seed: v.seed,
                trace,
                inject_fault: v.inject_fault,
            };
            let (text, passed) =
                cmd_verify(&db, v.plan.config()?, &opts, v.plan.out.format).map_err(context("verifying", &v.plan.db))?;
            emit(v.plan.out.out.as_deref(), &text)?;
            Ok(if passed { 0 } else { 1 })
        }
        Command::Sweep(s) => {
            let db = load_database(&s.plan.db)?;
            let text = cmd_sweep_grain(&db, &s.plan.config()?, &s.widths, s.depth_rule, s.reference_grain)
                .map_err(context("sweeping", &s.plan.db))?;
            emit(s.plan.out.out.as_deref(), &text)?;
            Ok(0)
        }
    }
}
