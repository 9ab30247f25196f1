//! Evacuation and throughput run loops, metrics and invariant checkers.

use std::collections::{HashMap, VecDeque};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Matching, NetworkState, Topology};
use crate::schedulers::Scheduler;
use crate::topogen::EvacInstance;
use crate::traffic::{ArrivalSampler, TrafficModel};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Evacuation,
    Throughput,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Evacuation => "evacuation",
            Mode::Throughput => "throughput",
        }
    }
}

/// Δ(k) at the start of slot `k` and the size of the slot-`k` schedule.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SlotTrace {
    pub delta: u64,
    pub schedule_len: usize,
}

/// Outputs of one run.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricsRecord {
    pub mode: Mode,
    pub policy: String,
    /// Slots until every queue is empty (evacuation only).
    pub evac_time: Option<u64>,
    /// Δ(0).
    pub delta0: u64,
    /// Mean of Σ Q_l sampled at slot end over slots `>= warmup` (throughput only).
    pub avg_total_queue: Option<f64>,
    pub total_slots: u64,
    pub warmup: u64,
    /// D_l(K) / K per link.
    pub departure_rate: Vec<f64>,
    pub arrivals: Vec<u64>,
    pub served: Vec<u64>,
    pub final_backlog: u64,
    /// Per-slot Δ and schedule size (evacuation only).
    pub trace: Vec<SlotTrace>,
    /// Σ Q_l at the end of every slot (throughput only).
    pub queue_series: Vec<u64>,
}

impl MetricsRecord {
    /// Δ at the start of every slot, followed by Δ after the last slot.
    pub fn delta_series(&self) -> Vec<u64> {
        let mut d: Vec<u64> = self.trace.iter().map(|t| t.delta).collect();
        d.push(if self.final_backlog == 0 { 0 } else { u64::MAX });
        d
    }

    /// min over links with arrivals of D_l / A_l; `None` if nothing arrived.
    pub fn min_departure_ratio(&self) -> Option<f64> {
        self.arrivals
            .iter()
            .zip(&self.served)
            .filter(|(&a, _)| a > 0)
            .map(|(&a, &d)| d as f64 / a as f64)
            .reduce(f64::min)
    }

    /// Mean end-of-slot total queue over the last quarter of the run divided
    /// by the mean over the third quarter. `None` for runs shorter than four
    /// slots; 1 if both quarters are empty.
    pub fn quarter_trend(&self) -> Option<f64> {
        let k = self.queue_series.len();
        if k < 4 {
            return None;
        }
        let q = k / 4;
        let mean = |s: &[u64]| s.iter().sum::<u64>() as f64 / s.len() as f64;
        let third = mean(&self.queue_series[2 * q..3 * q]);
        let last = mean(&self.queue_series[k - q..]);
        Some(if third == 0.0 {
            if last == 0.0 {
                1.0
            } else {
                f64::INFINITY
            }
        } else {
            last / third
        })
    }
}

fn max_delta(state: &NetworkState, topo: &Topology) -> u64 {
    state.workloads(topo).into_iter().max().unwrap_or(0)
}

/// Runs `scheduler` without arrivals until the instance drains.
///
/// Fails if the scheduler emits an infeasible schedule or an empty one while
/// packets remain.
pub fn run_evacuation(instance: &EvacInstance, scheduler: &dyn Scheduler) -> Result<MetricsRecord> {
    let topo = &instance.topo;
    let mut state = instance.initial_state();
    let delta0 = max_delta(&state, topo);
    let m = topo.link_count();
    let mut served = vec![0u64; m];
    let mut trace = Vec::new();
    while !state.is_drained() {
        let delta = max_delta(&state, topo);
        let schedule = scheduler.schedule(&state, topo);
        if schedule.is_empty() {
            return Err(Error::InvalidSchedule(format!(
                "{} emitted an empty schedule at slot {} with {} packets left",
                scheduler.name(),
                state.slot(),
                state.total_packets()
            )));
        }
        for &l in schedule.links() {
            served[l] += 1;
        }
        trace.push(SlotTrace {
            delta,
            schedule_len: schedule.len(),
        });
        state.apply_slot(topo, &schedule, &[])?;
    }
    let slots = state.slot();
    Ok(MetricsRecord {
        mode: Mode::Evacuation,
        policy: scheduler.name().to_string(),
        evac_time: Some(slots),
        delta0,
        avg_total_queue: None,
        total_slots: slots,
        warmup: 0,
        departure_rate: served
            .iter()
            .map(|&d| {
                if slots == 0 {
                    0.0
                } else {
                    d as f64 / slots as f64
                }
            })
            .collect(),
        arrivals: vec![0; m],
        served,
        final_backlog: 0,
        trace,
        queue_series: Vec::new(),
    })
}

/// Runs `scheduler` from empty queues for `total_slots` slots under
/// `traffic`. Each slot adds its arrivals, schedules, then serves.
pub fn run_throughput(
    topo: &Topology,
    scheduler: &dyn Scheduler,
    traffic: &TrafficModel,
    total_slots: u64,
    warmup_slots: u64,
) -> Result<MetricsRecord> {
    if warmup_slots >= total_slots {
        return Err(Error::param(format!(
            "warmup ({warmup_slots}) must be shorter than the run ({total_slots})"
        )));
    }
    let sampler = ArrivalSampler::new(*traffic)?;
    let m = topo.link_count();
    let mut state = NetworkState::empty(topo);
    let mut arrivals = vec![0u64; m];
    let mut served = vec![0u64; m];
    let mut queue_series = Vec::with_capacity(total_slots as usize);

    let first = sampler.sample_arrivals(m, 0);
    accumulate(&mut arrivals, &first);
    state.add_arrivals(&first)?;
    for k in 0..total_slots {
        let schedule: Matching = scheduler.schedule(&state, topo);
        for &l in schedule.links() {
            served[l] += 1;
        }
        queue_series.push(state.total_packets() - schedule.len() as u64);
        let next = if k + 1 < total_slots {
            let a = sampler.sample_arrivals(m, k + 1);
            accumulate(&mut arrivals, &a);
            a
        } else {
            Vec::new()
        };
        state.apply_slot(topo, &schedule, &next)?;
    }

    let window = &queue_series[warmup_slots as usize..];
    let avg = window.iter().map(|&q| q as f64).sum::<f64>() / window.len() as f64;
    Ok(MetricsRecord {
        mode: Mode::Throughput,
        policy: scheduler.name().to_string(),
        evac_time: None,
        delta0: 0,
        avg_total_queue: Some(avg),
        total_slots,
        warmup: warmup_slots,
        departure_rate: served
            .iter()
            .map(|&d| d as f64 / total_slots as f64)
            .collect(),
        arrivals,
        served,
        final_backlog: state.total_packets(),
        trace: Vec::new(),
        queue_series,
    })
}

fn accumulate(total: &mut [u64], add: &[u64]) {
    for (t, &a) in total.iter_mut().zip(add) {
        *t += a;
    }
}

/// max(Δ(0), heaviest triangle), a lower bound on any policy's evacuation
/// time: a triangle serves at most one of its links per slot.
pub fn evacuation_lower_bound(instance: &EvacInstance) -> u64 {
    let topo = &instance.topo;
    let mut index: HashMap<(usize, usize), usize> = HashMap::with_capacity(topo.link_count());
    for (l, &(u, v)) in topo.links().iter().enumerate() {
        index.insert((u.min(v), u.max(v)), l);
    }
    let link = |a: usize, b: usize| index.get(&(a.min(b), a.max(b))).copied();
    let mut best = instance.max_workload();
    for (l, &(u, v)) in topo.links().iter().enumerate() {
        let (u, v) = (u.min(v), u.max(v));
        for &lu in topo.incident(u) {
            let w = topo.other_end(lu, u);
            if w <= v {
                continue;
            }
            if let Some(lv) = link(v, w) {
                let total = instance.packets[l] + instance.packets[lu] + instance.packets[lv];
                best = best.max(total);
            }
        }
    }
    best
}

/// A frame that started with Δ ≥ 2 and did not shed at least 2.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FrameViolation {
    pub frame: u64,
    pub start_delta: u64,
    pub end_delta: u64,
}

/// Checks every three-slot frame of a Δ series (Δ at the start of each slot
/// plus the final value, as from [`MetricsRecord::delta_series`]).
pub fn check_frame_drain(deltas: &[u64]) -> Vec<FrameViolation> {
    let mut violations = Vec::new();
    if deltas.is_empty() {
        return violations;
    }
    let last = deltas.len() - 1;
    let mut start = 0usize;
    while start < last {
        let end = (start + 3).min(last);
        let (s, e) = (deltas[start], deltas[end]);
        if s >= 2 && e + 2 > s {
            violations.push(FrameViolation {
                frame: (start / 3) as u64,
                start_delta: s,
                end_delta: e,
            });
        }
        start += 3;
    }
    violations
}

/// Two-coloring of `topo` if it is bipartite.
pub fn is_bipartite(topo: &Topology) -> Option<Vec<u8>> {
    let n = topo.node_count();
    let mut color: Vec<Option<u8>> = vec![None; n];
    let mut queue = VecDeque::new();
    for root in 0..n {
        if color[root].is_some() {
            continue;
        }
        color[root] = Some(0);
        queue.push_back(root);
        while let Some(u) = queue.pop_front() {
            let cu = color[u].unwrap();
            for &l in topo.incident(u) {
                let v = topo.other_end(l, u);
                match color[v] {
                    None => {
                        color[v] = Some(1 - cu);
                        queue.push_back(v);
                    }
                    Some(cv) if cv == cu => return None,
                    Some(_) => {}
                }
            }
        }
    }
    Some(color.into_iter().map(|c| c.unwrap()).collect())
}
