//! Experiment configuration, sweep orchestration and CSV output.

use std::io::Write;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::engine::{evacuation_lower_bound, run_evacuation, run_throughput, MetricsRecord, Mode};
use crate::error::{Error, Result};
use crate::graph::Topology;
use crate::io::load_instance;
use crate::schedulers::Policy;
use crate::topogen::{
    assign_random_multiplicities, gen_grid, gen_path_special, gen_random_connected,
    gen_regular_multigraph, gen_triangular_mesh, EvacInstance,
};
use crate::traffic::{TrafficKind, TrafficModel, DEFAULT_ZIPF_SUPPORT};

/// Column order of every CSV this crate writes.
pub const CSV_HEADER: &str =
    "mode,instance,policy,lambda,seed,slots,warmup,avg_total_queue,evac_time,delta0,min_dep_ratio";

/// Where a topology or evacuation instance comes from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum InstanceSpec {
    Grid {
        rows: usize,
        cols: usize,
    },
    Mesh {
        nodes: usize,
        seed: u64,
    },
    Random {
        nodes: usize,
        links: usize,
        seed: u64,
    },
    Fig9 {
        n: usize,
    },
    Regular {
        nodes: usize,
        degree: usize,
        seed: u64,
    },
    Dimacs {
        path: PathBuf,
    },
    File {
        path: PathBuf,
    },
}

impl InstanceSpec {
    pub fn label(&self) -> String {
        match self {
            InstanceSpec::Grid { rows, cols } => format!("grid{rows}x{cols}"),
            InstanceSpec::Mesh { nodes, .. } => format!("mesh{nodes}"),
            InstanceSpec::Random { nodes, links, .. } => format!("rand{nodes}.{links}"),
            InstanceSpec::Fig9 { n } => format!("fig9.{n}"),
            InstanceSpec::Regular { nodes, degree, .. } => format!("regm{nodes}.{degree}"),
            InstanceSpec::Dimacs { path } | InstanceSpec::File { path } => path
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| path.display().to_string()),
        }
    }

    /// Whether the spec carries its own per-link multiplicities.
    pub fn has_packets(&self) -> bool {
        matches!(
            self,
            InstanceSpec::Fig9 { .. }
                | InstanceSpec::Regular { .. }
                | InstanceSpec::Dimacs { .. }
                | InstanceSpec::File { .. }
        )
    }

    pub fn topology(&self) -> Result<Topology> {
        match self {
            InstanceSpec::Grid { rows, cols } => gen_grid(*rows, *cols),
            InstanceSpec::Mesh { nodes, seed } => gen_triangular_mesh(*nodes, *seed),
            InstanceSpec::Random { nodes, links, seed } => {
                gen_random_connected(*nodes, *links, *seed)
            }
            _ => Ok(self.instance(None, 0)?.topo),
        }
    }

    /// Builds an evacuation instance. Topology-only specs need `max_mult`
    /// and draw multiplicities uniformly on 0..=max_mult from `mult_seed`.
    pub fn instance(&self, max_mult: Option<u64>, mult_seed: u64) -> Result<EvacInstance> {
        match self {
            InstanceSpec::Fig9 { n } => gen_path_special(*n),
            InstanceSpec::Regular {
                nodes,
                degree,
                seed,
            } => gen_regular_multigraph(*nodes, *degree, *seed),
            InstanceSpec::Dimacs { path } | InstanceSpec::File { path } => load_instance(path),
            _ => {
                let y = max_mult.ok_or_else(|| {
                    Error::param(format!(
                        "instance '{}' needs a maximum multiplicity",
                        self.label()
                    ))
                })?;
                Ok(assign_random_multiplicities(
                    &self.topology()?,
                    y,
                    mult_seed,
                ))
            }
        }
    }
}

/// Arrival process family; the rate comes from the sweep list.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum TrafficSpec {
    Poisson,
    File {
        p: f64,
    },
    Zipf {
        #[serde(default = "default_support")]
        support: usize,
    },
}

fn default_support() -> usize {
    DEFAULT_ZIPF_SUPPORT
}

impl TrafficSpec {
    pub fn model(&self, lambda: f64, seed: u64) -> TrafficModel {
        let kind = match *self {
            TrafficSpec::Poisson => TrafficKind::Poisson { lambda },
            TrafficSpec::File { p } => TrafficKind::File { p, lambda },
            TrafficSpec::Zipf { support } => TrafficKind::Zipf { lambda, support },
        };
        TrafficModel { kind, seed }
    }
}

fn default_traffic() -> TrafficSpec {
    TrafficSpec::Poisson
}

fn default_total() -> u64 {
    100_000
}

fn default_warmup() -> u64 {
    50_000
}

/// A whole experiment, read from JSON.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub mode: Mode,
    pub instance: InstanceSpec,
    pub policies: Vec<Policy>,
    #[serde(default = "default_traffic")]
    pub traffic: TrafficSpec,
    #[serde(default)]
    pub lambdas: Vec<f64>,
    #[serde(default = "default_total")]
    pub total_slots: u64,
    #[serde(default = "default_warmup")]
    pub warmup_slots: u64,
    #[serde(default)]
    pub seeds: Vec<u64>,
    /// Multiplicity cap for evacuation on topology-only instances.
    #[serde(default)]
    pub max_multiplicity: Option<u64>,
    #[serde(default)]
    pub output: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::parse(e.line(), e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn validate(&self) -> Result<()> {
        if self.policies.is_empty() {
            return Err(Error::param("policy list is empty"));
        }
        if self.mode == Mode::Throughput {
            if self.seeds.is_empty() {
                return Err(Error::param("seed list is empty"));
            }
            if self.lambdas.is_empty() {
                return Err(Error::param("arrival rate list is empty"));
            }
            if let Some(bad) = self.lambdas.iter().find(|l| !(l.is_finite() && **l > 0.0)) {
                return Err(Error::param(format!(
                    "arrival rates must be positive, got {bad}"
                )));
            }
            if self.lambdas.windows(2).any(|w| w[0] > w[1]) {
                return Err(Error::param("arrival rates must be sorted ascending"));
            }
            if self.warmup_slots >= self.total_slots {
                return Err(Error::param("warmup must be shorter than the run"));
            }
            for &lambda in &self.lambdas {
                self.traffic.model(lambda, 0).validate()?;
            }
        }
        Ok(())
    }
}

/// One CSV line. Absent values are written as empty cells.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CsvRow {
    pub mode: &'static str,
    pub instance: String,
    pub policy: String,
    pub lambda: Option<f64>,
    pub seed: Option<u64>,
    pub slots: Option<u64>,
    pub warmup: Option<u64>,
    pub avg_total_queue: Option<f64>,
    pub evac_time: Option<u64>,
    pub delta0: Option<u64>,
    pub min_dep_ratio: Option<f64>,
}

impl CsvRow {
    pub fn from_record(
        instance: &str,
        record: &MetricsRecord,
        lambda: Option<f64>,
        seed: Option<u64>,
    ) -> Self {
        CsvRow {
            mode: record.mode.as_str(),
            instance: instance.to_string(),
            policy: record.policy.clone(),
            lambda,
            seed,
            slots: Some(record.total_slots),
            warmup: (record.mode == Mode::Throughput).then_some(record.warmup),
            avg_total_queue: record.avg_total_queue,
            evac_time: record.evac_time,
            delta0: (record.mode == Mode::Evacuation).then_some(record.delta0),
            min_dep_ratio: match record.mode {
                Mode::Throughput => record.min_departure_ratio(),
                Mode::Evacuation => None,
            },
        }
    }
}

pub fn write_csv<W: Write>(rows: &[CsvRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for row in rows {
        w.serialize(row).map_err(|e| Error::Io(e.to_string()))?;
    }
    if rows.is_empty() {
        w.write_record(CSV_HEADER.split(','))
            .map_err(|e| Error::Io(e.to_string()))?;
    }
    w.flush()?;
    Ok(())
}

pub fn csv_string(rows: &[CsvRow]) -> Result<String> {
    let mut buf = Vec::new();
    write_csv(rows, &mut buf)?;
    String::from_utf8(buf).map_err(|e| Error::Io(e.to_string()))
}

/// Evacuation results for one instance under several policies.
#[derive(Debug, Clone)]
pub struct EvacuationTable {
    pub instance: String,
    pub delta0: u64,
    pub lower_bound: u64,
    pub records: Vec<MetricsRecord>,
}

impl EvacuationTable {
    pub fn rows(&self) -> Vec<CsvRow> {
        self.records
            .iter()
            .map(|r| CsvRow::from_record(&self.instance, r, None, None))
            .collect()
    }

    /// Fixed-width text table: one line per policy.
    pub fn render(&self) -> String {
        let mut out = format!(
            "instance {}  delta {}  lower bound {}\n{:<8}{:>10}\n",
            self.instance, self.delta0, self.lower_bound, "policy", "evac"
        );
        for r in &self.records {
            out.push_str(&format!(
                "{:<8}{:>10}\n",
                r.policy,
                r.evac_time.unwrap_or(0)
            ));
        }
        out
    }
}

/// Runs every policy on `instance` in parallel; records keep policy order.
pub fn evacuation_table(
    label: &str,
    instance: &EvacInstance,
    policies: &[Policy],
) -> Result<EvacuationTable> {
    let records = policies
        .par_iter()
        .map(|p| run_evacuation(instance, p))
        .collect::<Result<Vec<_>>>()?;
    Ok(EvacuationTable {
        instance: label.to_string(),
        delta0: instance.max_workload(),
        lower_bound: evacuation_lower_bound(instance),
        records,
    })
}

/// Runs every (policy, λ, seed) combination in parallel and returns detail
/// rows in (policy, λ, seed) order, each (policy, λ) group followed by a
/// summary row averaging over seeds (empty seed cell).
pub fn throughput_sweep(config: &ExperimentConfig) -> Result<Vec<CsvRow>> {
    config.validate()?;
    let topo = config.instance.topology()?;
    let label = config.instance.label();
    let mut jobs = Vec::new();
    for &policy in &config.policies {
        for &lambda in &config.lambdas {
            for &seed in &config.seeds {
                jobs.push((policy, lambda, seed));
            }
        }
    }
    let rows = jobs
        .par_iter()
        .map(|&(policy, lambda, seed)| {
            let model = config.traffic.model(lambda, seed);
            let r = run_throughput(
                &topo,
                &policy,
                &model,
                config.total_slots,
                config.warmup_slots,
            )?;
            Ok(CsvRow::from_record(&label, &r, Some(lambda), Some(seed)))
        })
        .collect::<Result<Vec<_>>>()?;

    let mut out = Vec::with_capacity(rows.len() + rows.len() / config.seeds.len());
    for group in rows.chunks(config.seeds.len()) {
        out.extend_from_slice(group);
        out.push(summary_row(group));
    }
    Ok(out)
}

fn summary_row(group: &[CsvRow]) -> CsvRow {
    let mean = |vals: Vec<f64>| {
        if vals.is_empty() {
            None
        } else {
            Some(vals.iter().sum::<f64>() / vals.len() as f64)
        }
    };
    let first = &group[0];
    CsvRow {
        seed: None,
        avg_total_queue: mean(group.iter().filter_map(|r| r.avg_total_queue).collect()),
        min_dep_ratio: mean(group.iter().filter_map(|r| r.min_dep_ratio).collect()),
        ..first.clone()
    }
}
