//! Machine-readable documents: the per-plan report, flat CSV rows, and
//! grain sweep tables. JSON objects come out with sorted keys and numbers
//! that need exactness are decimal strings, so identical inputs give
//! byte-identical output.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::Serialize;
use serde_json::Value;

use crate::bounds::{single_tcam_baseline, BoundsReport};
use crate::error::{Error, Result};
use crate::numfmt::fmt_fraction;
use crate::packing::ResourceReport;
use crate::pipeline::{PipelineProfile, Span};
use crate::plan::{Plan, PlanConfig};
use crate::prefixdb::{max_threshold_length, PrefixDatabase};
use crate::tiler::{GrainSpec, TableKind};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Format {
    #[default]
    Json,
    Csv,
}

impl FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "json" => Ok(Format::Json),
            "csv" => Ok(Format::Csv),
            _ => Err(Error::InvalidConfig(format!("format `{s}` is not json or csv"))),
        }
    }
}

impl fmt::Display for Format {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Format::Json => "json",
            Format::Csv => "csv",
        })
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct LevelSummary {
    pub level: usize,
    pub start_bit: usize,
    pub stride: usize,
    pub tcam_tables: usize,
    pub sram_tables: usize,
    pub entries: usize,
    /// Entries carrying a child pointer.
    pub stubs: usize,
    pub supertables: usize,
    pub tcam_blocks: u64,
    pub empty_tcam_entries: u64,
}

#[derive(Clone, Debug, Serialize)]
pub struct TreeSummary {
    pub tables: usize,
    pub terminal_entries: usize,
    pub total_entries: usize,
    pub pure_stubs: usize,
    pub levels: Vec<LevelSummary>,
}

#[derive(Clone, Debug, Serialize)]
pub struct PipelineSummary {
    pub profile: PipelineProfile,
    pub stages_used: usize,
    pub tcam_blocks_per_stage: Vec<u64>,
    pub sram_pages_per_stage: Vec<u64>,
    pub placements: BTreeMap<String, Vec<Span>>,
    pub dependency_edges: usize,
    pub dependency_violations: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct PlanReport {
    pub config: PlanConfig,
    pub strides: String,
    pub tag_bits: usize,
    pub tree: TreeSummary,
    pub resources: ResourceReport,
    pub bounds: BoundsReport,
    pub pipeline: PipelineSummary,
    pub hybridized_tables: usize,
    /// SRAM pages placed level by level; `resources.sram_pages` pools them.
    pub sram_pages_placed: u64,
    pub overflow_entries: usize,
}

impl PlanReport {
    pub fn new(plan: &Plan) -> Result<Self> {
        let tree = plan.tree();
        let packing = plan.packing();
        let grain = plan.config().grain;
        let levels = tree
            .levels()
            .iter()
            .enumerate()
            .map(|(level, ids)| {
                let tables: Vec<_> = ids.iter().map(|&id| tree.table(id)).filter(|t| !t.is_empty()).collect();
                let sts: Vec<_> = packing.at_level(level).collect();
                LevelSummary {
                    level,
                    start_bit: tree.stride_list().cumulative()[level],
                    stride: tree.stride_list().strides()[level],
                    tcam_tables: tables.iter().filter(|t| t.kind == TableKind::Tcam).count(),
                    sram_tables: tables.iter().filter(|t| t.kind == TableKind::Sram).count(),
                    entries: tables.iter().map(|t| t.len()).sum(),
                    stubs: tables.iter().map(|t| t.stub_count()).sum(),
                    supertables: sts.len(),
                    tcam_blocks: sts.iter().map(|s| s.block_count(grain)).sum(),
                    empty_tcam_entries: sts.iter().map(|s| s.empty_entries(grain)).sum(),
                }
            })
            .collect();
        let pipe = plan.pipeline();
        Ok(PlanReport {
            config: plan.config().clone(),
            strides: tree.stride_list().to_string(),
            tag_bits: plan.config().tag_bits(),
            tree: TreeSummary {
                tables: tree.tables().iter().filter(|t| !t.is_empty()).count(),
                terminal_entries: tree.terminal_count(),
                total_entries: tree.entry_count(),
                pure_stubs: tree.pure_stub_count(),
                levels,
            },
            resources: plan.resources(),
            bounds: plan.bounds()?,
            pipeline: PipelineSummary {
                profile: pipe.profile.clone(),
                stages_used: pipe.stages_used(),
                tcam_blocks_per_stage: pipe.tcam_used().to_vec(),
                sram_pages_per_stage: pipe.sram_used().to_vec(),
                placements: pipe.placements().iter().map(|(u, s)| (u.to_string(), s.clone())).collect(),
                dependency_edges: pipe.edges().len(),
                dependency_violations: pipe.dependency_violations().len(),
            },
            hybridized_tables: plan.hybridization().converted.len(),
            sram_pages_placed: plan.sram_pages_reserved(),
            overflow_entries: plan.overflow().len(),
        })
    }
}

/// Pretty JSON with keys sorted at every level, newline terminated.
pub fn to_json<T: Serialize>(doc: &T) -> Result<String> {
    let value = serde_json::to_value(doc).map_err(|e| Error::InvalidConfig(format!("serializing report: {e}")))?;
    let mut s = serde_json::to_string_pretty(&value).expect("values always serialize");
    s.push('\n');
    Ok(s)
}

/// Flattens a document into dotted-key scalars, sorted by key.
pub fn flatten(value: &Value) -> BTreeMap<String, String> {
    fn walk(prefix: &str, v: &Value, out: &mut BTreeMap<String, String>) {
        let key = |k: &str| {
            if prefix.is_empty() {
                k.to_string()
            } else {
                format!("{prefix}.{k}")
            }
        };
        match v {
            Value::Object(m) => m.iter().for_each(|(k, v)| walk(&key(k), v, out)),
            Value::Array(a) => a.iter().enumerate().for_each(|(i, v)| walk(&key(&i.to_string()), v, out)),
            Value::Null => {
                out.insert(prefix.to_string(), String::new());
            }
            Value::String(s) => {
                out.insert(prefix.to_string(), s.clone());
            }
            other => {
                out.insert(prefix.to_string(), other.to_string());
            }
        }
    }
    let mut out = BTreeMap::new();
    walk("", value, &mut out);
    out
}

/// One header row of dotted keys and one row of values.
pub fn to_flat_csv<T: Serialize>(doc: &T) -> Result<String> {
    let value = serde_json::to_value(doc).map_err(|e| Error::InvalidConfig(format!("serializing report: {e}")))?;
    let flat = flatten(&value);
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(flat.keys()).map_err(csv_err)?;
    w.write_record(flat.values()).map_err(csv_err)?;
    Ok(String::from_utf8(w.into_inner().map_err(|e| Error::Io(e.to_string()))?).expect("utf8"))
}

/// Rows of a serializable record type under a header.
pub fn to_csv<T: Serialize>(rows: &[T]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r).map_err(csv_err)?;
    }
    Ok(String::from_utf8(w.into_inner().map_err(|e| Error::Io(e.to_string()))?).expect("utf8"))
}

fn csv_err(e: csv::Error) -> Error {
    Error::Io(e.to_string())
}

pub fn render<T: Serialize>(doc: &T, format: Format) -> Result<String> {
    match format {
        Format::Json => to_json(doc),
        Format::Csv => to_flat_csv(doc),
    }
}

/// How grain depth follows grain width in a sweep.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DepthRule {
    /// `D = floor(W0 * D0 / w)`: block area held at the reference grain's.
    ConstantArea,
    Fixed(usize),
}

impl DepthRule {
    pub fn depth(&self, width: usize, reference: GrainSpec) -> usize {
        match *self {
            DepthRule::ConstantArea => (reference.width * reference.depth / width).max(1),
            DepthRule::Fixed(d) => d,
        }
    }
}

impl FromStr for DepthRule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s == "constant-area" {
            return Ok(DepthRule::ConstantArea);
        }
        s.strip_prefix("fixed:")
            .and_then(|d| d.parse().ok())
            .filter(|&d| d > 0)
            .map(DepthRule::Fixed)
            .ok_or_else(|| Error::InvalidConfig(format!("depth rule `{s}` is not constant-area or fixed:<D>")))
    }
}

impl fmt::Display for DepthRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DepthRule::ConstantArea => f.write_str("constant-area"),
            DepthRule::Fixed(d) => write!(f, "fixed:{d}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SweepRow {
    pub grain_width: usize,
    pub grain_depth: usize,
    /// `ceil(N / D) * D * w * ceil(M / w)`.
    pub single_tcam_bits: u64,
    /// Reference single-TCAM bits over this row's single-TCAM bits.
    pub single_tcam_improvement: String,
    pub tiled_bits: u64,
    pub tiled_improvement: String,
}

/// Plans the database at each grain width (no hybridization) and compares
/// ternary bits against a single TCAM at the reference grain.
pub fn sweep_grain(
    db: &PrefixDatabase,
    base: &PlanConfig,
    widths: &[usize],
    rule: DepthRule,
    reference: GrainSpec,
) -> Result<Vec<SweepRow>> {
    if db.is_empty() {
        return Err(Error::EmptyDatabase);
    }
    let m = max_threshold_length(db, base.coverage)?.m.max(1);
    let n = db.len() as u64;
    let reference_bits = single_tcam_baseline(n, m, reference).bits;
    let mut rows = Vec::with_capacity(widths.len());
    for &w in widths {
        let grain = GrainSpec::new(w, rule.depth(w, reference))?;
        let single = single_tcam_baseline(n, m, grain).bits;
        let mut cfg = base.clone();
        cfg.grain = grain;
        cfg.hybridization.enabled = false;
        let plan = Plan::build(db, cfg)?;
        let tiled = plan.resources().tcam_bits;
        rows.push(SweepRow {
            grain_width: w,
            grain_depth: grain.depth,
            single_tcam_bits: single,
            single_tcam_improvement: fmt_fraction(reference_bits as u128, single as u128, 3),
            tiled_bits: tiled,
            tiled_improvement: if tiled == 0 {
                "infinite".into()
            } else {
                fmt_fraction(reference_bits as u128, tiled as u128, 3)
            },
        });
    }
    Ok(rows)
}
