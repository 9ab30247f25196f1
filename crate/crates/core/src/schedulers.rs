//! Per-slot scheduling policies.
//!
//! NSB and LC-NSB assign node weights from workload, heavy/critical status
//! and a frame-aware service indicator, then pick a maximum vertex-weighted
//! matching. MVM, MWM, GMM and MM are the comparison baselines.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::graph::{classify_workloads, Matching, NetworkState, NodeId, Topology};
use crate::matching::{
    greedy_maximal_matching, max_vertex_weight_matching, max_weight_matching, maximal_matching,
    WeightedGraphView,
};

/// Anything that maps a network state to one slot's schedule.
pub trait Scheduler: Sync {
    fn name(&self) -> &str;
    fn schedule(&self, state: &NetworkState, topo: &Topology) -> Matching;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Policy {
    Nsb,
    #[serde(rename = "lcnsb")]
    LcNsb,
    Mvm,
    Mwm,
    Gmm,
    Mm,
}

impl Policy {
    pub const ALL: [Policy; 6] = [
        Policy::Nsb,
        Policy::LcNsb,
        Policy::Mvm,
        Policy::Mwm,
        Policy::Gmm,
        Policy::Mm,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Policy::Nsb => "nsb",
            Policy::LcNsb => "lcnsb",
            Policy::Mvm => "mvm",
            Policy::Mwm => "mwm",
            Policy::Gmm => "gmm",
            Policy::Mm => "mm",
        }
    }

    /// Policies whose weights come from node workloads.
    pub fn is_node_based(self) -> bool {
        matches!(self, Policy::Nsb | Policy::LcNsb | Policy::Mvm)
    }
}

impl fmt::Display for Policy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Policy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "nsb" => Ok(Policy::Nsb),
            "lcnsb" | "lc-nsb" => Ok(Policy::LcNsb),
            "mvm" => Ok(Policy::Mvm),
            "mwm" => Ok(Policy::Mwm),
            "gmm" => Ok(Policy::Gmm),
            "mm" => Ok(Policy::Mm),
            other => Err(Error::param(format!(
                "unknown policy '{other}' (expected nsb, lcnsb, mvm, mwm, gmm or mm)"
            ))),
        }
    }
}

/// Parses a comma-separated policy list; empty lists are rejected.
pub fn parse_policy_list(s: &str) -> Result<Vec<Policy>, Error> {
    let list = s
        .split(',')
        .filter(|p| !p.trim().is_empty())
        .map(Policy::from_str)
        .collect::<Result<Vec<_>, _>>()?;
    if list.is_empty() {
        return Err(Error::param("policy list is empty"));
    }
    Ok(list)
}

/// U_i(k). In the last slot of each frame (k mod 3 == 2) a node counts as
/// served only if it was matched in both previous slots; otherwise it is
/// R_i(k-1). Frames are absolute, starting at slot 0.
pub fn service_indicator(state: &NetworkState, i: NodeId) -> bool {
    if state.slot() % 3 == 2 {
        state.served_prev(i) && state.served_prev2(i)
    } else {
        state.served_prev(i)
    }
}

/// NSB node weights: heavy nodes weigh `Q_i * (2 - U_i)`, others `Q_i`.
pub fn nsb_weights(state: &NetworkState, topo: &Topology) -> Vec<u64> {
    let workloads = state.workloads(topo);
    let classes = classify_workloads(&workloads);
    workloads
        .iter()
        .enumerate()
        .map(|(i, &q)| {
            if classes.heavy[i] {
                q * (2 - service_indicator(state, i) as u64)
            } else {
                q
            }
        })
        .collect()
}

/// LC-NSB node weights in {1, ..., 5}: `5 - 2U` for critical nodes,
/// `4 - 2U` for other heavy nodes, 1 for the rest.
pub fn lcnsb_weights(state: &NetworkState, topo: &Topology) -> Vec<u64> {
    let classes = classify_workloads(&state.workloads(topo));
    (0..topo.node_count())
        .map(|i| {
            let served = 2 * service_indicator(state, i) as u64;
            if classes.critical[i] {
                5 - served
            } else if classes.heavy[i] {
                4 - served
            } else {
                1
            }
        })
        .collect()
}

/// Computes one slot's schedule. Links with empty queues are excluded; the
/// result is always a maximal matching over the remaining links.
pub fn schedule(policy: Policy, state: &NetworkState, topo: &Topology) -> Matching {
    let eligible = state.eligible();
    if !eligible.iter().any(|&e| e) {
        return Matching::empty();
    }
    match policy {
        Policy::Nsb => max_vertex_weight_matching(topo, &eligible, &nsb_weights(state, topo)),
        Policy::LcNsb => max_vertex_weight_matching(topo, &eligible, &lcnsb_weights(state, topo)),
        Policy::Mvm => max_vertex_weight_matching(topo, &eligible, &state.workloads(topo)),
        Policy::Mwm => max_weight_matching(WeightedGraphView::new(topo, &eligible, state.queues())),
        Policy::Gmm => {
            greedy_maximal_matching(WeightedGraphView::new(topo, &eligible, state.queues()))
        }
        Policy::Mm => maximal_matching(topo, &eligible),
    }
}

impl Scheduler for Policy {
    fn name(&self) -> &str {
        self.as_str()
    }

    fn schedule(&self, state: &NetworkState, topo: &Topology) -> Matching {
        schedule(*self, state, topo)
    }
}

/// A scheduler that runs `inner` while reporting itself under `label`.
/// Used to feed deliberately wrong policies to the property suites.
pub struct Relabeled<S> {
    pub label: String,
    pub inner: S,
}

impl<S: Scheduler> Scheduler for Relabeled<S> {
    fn name(&self) -> &str {
        &self.label
    }

    fn schedule(&self, state: &NetworkState, topo: &Topology) -> Matching {
        self.inner.schedule(state, topo)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn state_at(
        topo: &Topology,
        queues: Vec<u64>,
        slot: u64,
        prev: Vec<bool>,
        prev2: Vec<bool>,
    ) -> NetworkState {
        NetworkState::new(topo, queues)
            .unwrap()
            .with_history(slot, prev, prev2)
            .unwrap()
    }

    #[test]
    fn service_indicator_examples() {
        let t = Topology::new(2, vec![(0, 1)]).unwrap();
        let s0 = NetworkState::new(&t, vec![3]).unwrap();
        assert!(!service_indicator(&s0, 0));

        let both = state_at(&t, vec![3], 5, vec![true, true], vec![true, true]);
        assert!(service_indicator(&both, 0));
        let last_only = state_at(&t, vec![3], 5, vec![true, true], vec![false, false]);
        assert!(!service_indicator(&last_only, 0));
        // Outside the last slot of a frame only the previous slot matters.
        let k4 = state_at(&t, vec![3], 4, vec![true, true], vec![false, false]);
        assert!(service_indicator(&k4, 0));
    }

    // Subdivided star with N = 3 after one NSB slot: the center a (node 0)
    // was not served and has workload 3; hub b (node 1) was served and has
    // workload 3.
    fn fig4_slot1() -> (Topology, NetworkState) {
        let t = Topology::new(7, vec![(1, 2), (0, 1), (3, 4), (0, 3), (5, 6), (0, 5)]).unwrap();
        let mut served = vec![true; 7];
        served[0] = false;
        let s = state_at(&t, vec![2, 1, 2, 1, 2, 1], 1, served, vec![false; 7]);
        (t, s)
    }

    #[test]
    fn nsb_weight_examples() {
        let (t, s) = fig4_slot1();
        let w = nsb_weights(&s, &t);
        assert_eq!(w[0], 6);
        assert_eq!(w[1], 3);
        // Leaves have workload 2 < 6/7 * 3 and keep their workload.
        assert_eq!(w[2], 2);
    }

    #[test]
    fn lcnsb_weight_examples() {
        let t = Topology::new(4, vec![(0, 1), (1, 2), (2, 3)]).unwrap();
        // workloads 4, 7, 6, 3; n = 4: heavy iff 4q >= 21 -> {1, 2}; critical {1}.
        let s = state_at(
            &t,
            vec![4, 3, 3],
            1,
            vec![false, false, true, true],
            vec![false; 4],
        );
        assert_eq!(lcnsb_weights(&s, &t), vec![1, 5, 2, 1]);
        let s = state_at(
            &t,
            vec![4, 3, 3],
            1,
            vec![false, true, false, false],
            vec![false; 4],
        );
        assert_eq!(lcnsb_weights(&s, &t), vec![1, 3, 4, 1]);
    }

    #[test]
    fn empty_network_schedules_nothing() {
        let t = Topology::new(3, vec![(0, 1), (1, 2)]).unwrap();
        let s = NetworkState::empty(&t);
        for p in Policy::ALL {
            assert!(schedule(p, &s, &t).is_empty());
        }
    }

    #[test]
    fn mwm_picks_heavy_pendants_on_subdivided_star() {
        let t = Topology::new(7, vec![(1, 2), (0, 1), (3, 4), (0, 3), (5, 6), (0, 5)]).unwrap();
        let s = NetworkState::new(&t, vec![3, 1, 3, 1, 3, 1]).unwrap();
        let m = schedule(Policy::Mwm, &s, &t);
        assert_eq!(m.links(), &[0, 2, 4]);
        assert_eq!(m.links().iter().map(|&l| s.queue(l)).sum::<u64>(), 9);
    }

    #[test]
    fn policy_strings_round_trip() {
        for p in Policy::ALL {
            assert_eq!(p.as_str().parse::<Policy>().unwrap(), p);
        }
        assert!(parse_policy_list("").is_err());
        assert_eq!(
            parse_policy_list("nsb,mwm").unwrap(),
            vec![Policy::Nsb, Policy::Mwm]
        );
        assert!("xyz".parse::<Policy>().is_err());
    }
}
