//! Seeded property suites over random instances.
//!
//! Each suite draws `count` instances from a seed, checks one property per
//! instance and reports every violation with the instance serialized in the
//! plain-text format for replay.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::engine::{check_frame_drain, is_bipartite, run_evacuation};
use crate::error::{Error, Result};
use crate::graph::{classify_workloads, Matching, NetworkState, Topology};
use crate::io::write_instance;
use crate::matching::{
    brute_force_matching_oracle, edge_weight_sum, greedy_maximal_matching, matched_node_weight,
    max_vertex_weight_matching, max_weight_matching, maximal_matching, node_rank_order,
    oracle::some_matching_covers, Scoring, WeightedGraphView, ENUMERATION_BOUND,
};
use crate::schedulers::Scheduler;
use crate::topogen::{
    assign_random_multiplicities, gen_grid, gen_random_bipartite, gen_random_multigraph,
    EvacInstance,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Prop1,
    Oracle,
    Lemma4,
    Bipartite,
}

impl Suite {
    pub const ALL: [Suite; 4] = [Suite::Prop1, Suite::Oracle, Suite::Lemma4, Suite::Bipartite];

    pub fn as_str(self) -> &'static str {
        match self {
            Suite::Prop1 => "prop1",
            Suite::Oracle => "oracle",
            Suite::Lemma4 => "lemma4",
            Suite::Bipartite => "bipartite",
        }
    }

    /// Instance count used when none is given.
    pub fn default_count(self) -> usize {
        match self {
            Suite::Prop1 => 500,
            Suite::Oracle => 1000,
            Suite::Lemma4 => 300,
            Suite::Bipartite => 200,
        }
    }
}

impl std::str::FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "prop1" => Ok(Suite::Prop1),
            "oracle" | "lemma1" => Ok(Suite::Oracle),
            "lemma4" => Ok(Suite::Lemma4),
            "bipartite" => Ok(Suite::Bipartite),
            other => Err(Error::param(format!(
                "unknown suite '{other}' (expected prop1, oracle, lemma4 or bipartite)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Violation {
    pub case: usize,
    pub scheduler: String,
    pub detail: String,
    /// Offending instance in the plain-text format.
    pub instance: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteReport {
    pub suite: Suite,
    pub cases: usize,
    pub checks: usize,
    pub violations: Vec<Violation>,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Independent generator for case `case` of a suite run.
pub fn case_rng(seed: u64, case: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(case as u64 + 1);
    rng
}

fn collect(suite: Suite, cases: usize, per_case: Vec<(usize, Vec<Violation>)>) -> SuiteReport {
    let checks = per_case.iter().map(|(c, _)| c).sum();
    SuiteReport {
        suite,
        cases,
        checks,
        violations: per_case.into_iter().flat_map(|(_, v)| v).collect(),
    }
}

/// Random loopless multigraph with `n <= max_n` nodes and multiplicity <= 5.
pub fn random_multigraph_case(rng: &mut ChaCha8Rng, max_n: usize) -> EvacInstance {
    let n = rng.gen_range(2..=max_n);
    let p = rng.gen_range(0.2..0.9);
    let seed = rng.gen();
    gen_random_multigraph(n, p, 5, seed).expect("valid generator parameters")
}

/// Every frame starting with Δ ≥ 2 ends with Δ at least 2 lower.
pub fn prop1_suite(count: usize, seed: u64, schedulers: &[&dyn Scheduler]) -> SuiteReport {
    let per_case = (0..count)
        .into_par_iter()
        .map(|case| {
            let inst = random_multigraph_case(&mut case_rng(seed, case), 12);
            let mut violations = Vec::new();
            for s in schedulers {
                match run_evacuation(&inst, *s) {
                    Ok(r) => {
                        for v in check_frame_drain(&r.delta_series()) {
                            violations.push(Violation {
                                case,
                                scheduler: s.name().to_string(),
                                detail: format!(
                                    "frame {} started at delta {} and ended at {}",
                                    v.frame, v.start_delta, v.end_delta
                                ),
                                instance: write_instance(&inst),
                            });
                        }
                    }
                    Err(e) => violations.push(Violation {
                        case,
                        scheduler: s.name().to_string(),
                        detail: e.to_string(),
                        instance: write_instance(&inst),
                    }),
                }
            }
            (schedulers.len(), violations)
        })
        .collect();
    collect(Suite::Prop1, count, per_case)
}

/// Random simple graph on at most 8 nodes with at most
/// [`ENUMERATION_BOUND`] links, a random eligibility mask, link weights
/// and node weights in 0..=9.
pub fn random_weighted_case(rng: &mut ChaCha8Rng) -> (Topology, Vec<bool>, Vec<u64>, Vec<u64>) {
    let n = rng.gen_range(1..=8);
    let p: f64 = rng.gen_range(0.2..0.9);
    let mut links = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            if rng.gen::<f64>() < p {
                links.push((u, v));
            }
        }
    }
    links.truncate(ENUMERATION_BOUND);
    let topo = Topology::new(n, links).expect("simple graph");
    let eligible = (0..topo.link_count()).map(|_| rng.gen_bool(0.85)).collect();
    let link_w = (0..topo.link_count())
        .map(|_| rng.gen_range(0..=9))
        .collect();
    let node_w = (0..n).map(|_| rng.gen_range(0..=9)).collect();
    (topo, eligible, link_w, node_w)
}

fn replay_weighted(topo: &Topology, eligible: &[bool], link_w: &[u64], node_w: &[u64]) -> String {
    let packets = eligible.iter().map(|&e| e as u64).collect();
    let inst = EvacInstance::new(topo.clone(), packets).expect("lengths match");
    format!(
        "{}# link weights {:?}\n# node weights {:?}\n",
        write_instance(&inst),
        link_w,
        node_w
    )
}

/// Exact engines match brute force; MVM covers every matchable prefix of
/// the node rank order; GMM is within half of optimal; all outputs are
/// maximal.
pub fn oracle_suite(count: usize, seed: u64) -> SuiteReport {
    let per_case = (0..count)
        .into_par_iter()
        .map(|case| {
            let (topo, eligible, link_w, node_w) = random_weighted_case(&mut case_rng(seed, case));
            let mut problems = Vec::new();
            let mut checks = 0;

            let view = WeightedGraphView::new(&topo, &eligible, &link_w);
            let mwm = max_weight_matching(view);
            let (best_edge, _) =
                brute_force_matching_oracle(&topo, &eligible, Scoring::EdgeSum, &link_w)
                    .expect("case within enumeration bound");
            checks += 1;
            if edge_weight_sum(&link_w, &mwm) != best_edge {
                problems.push(format!(
                    "mwm score {} != optimum {best_edge}",
                    edge_weight_sum(&link_w, &mwm)
                ));
            }

            let mvm = max_vertex_weight_matching(&topo, &eligible, &node_w);
            let (best_node, _) =
                brute_force_matching_oracle(&topo, &eligible, Scoring::MatchedNodeSum, &node_w)
                    .expect("case within enumeration bound");
            checks += 1;
            if matched_node_weight(&topo, &node_w, &mvm) != best_node {
                problems.push(format!(
                    "mvm score {} != optimum {best_node}",
                    matched_node_weight(&topo, &node_w, &mvm)
                ));
            }

            let order = node_rank_order(&node_w);
            let covered = mvm.covered(&topo);
            for s in 1..=order.len() {
                let top = &order[..s];
                if !some_matching_covers(&topo, &eligible, top)
                    .expect("case within enumeration bound")
                {
                    break;
                }
                checks += 1;
                if top.iter().any(|&i| !covered[i]) {
                    problems.push(format!(
                        "mvm misses a node among the {s} top-ranked {top:?}"
                    ));
                }
            }

            let gmm = greedy_maximal_matching(view);
            checks += 1;
            if 2 * edge_weight_sum(&link_w, &gmm) < best_edge {
                problems.push(format!(
                    "gmm score {} below half of {best_edge}",
                    edge_weight_sum(&link_w, &gmm)
                ));
            }
            let mm = maximal_matching(&topo, &eligible);
            for (name, m) in [("mwm", &mwm), ("mvm", &mvm), ("gmm", &gmm), ("mm", &mm)] {
                checks += 1;
                if !m.is_matching(&topo) || !m.is_maximal(&topo, &eligible) {
                    problems.push(format!(
                        "{name} output {:?} is not a maximal matching",
                        m.links()
                    ));
                }
            }

            let violations = problems
                .into_iter()
                .map(|detail| Violation {
                    case,
                    scheduler: "matching".to_string(),
                    detail,
                    instance: replay_weighted(&topo, &eligible, &link_w, &node_w),
                })
                .collect();
            (checks, violations)
        })
        .collect();
    collect(Suite::Oracle, count, per_case)
}

/// A mid-run state whose heavy nodes induce a bipartite subgraph.
#[derive(Debug, Clone)]
pub struct Lemma4Case {
    pub instance: EvacInstance,
    pub state: NetworkState,
}

/// Draws random states (n in 3..=8, multiplicity <= 5, random slot and
/// service history) until the heavy-induced subgraph is bipartite and the
/// instance fits the enumeration bound.
pub fn random_lemma4_case(rng: &mut ChaCha8Rng) -> Lemma4Case {
    loop {
        let n = rng.gen_range(3..=8);
        let p = rng.gen_range(0.2..0.8);
        let instance =
            gen_random_multigraph(n, p, 5, rng.gen()).expect("valid generator parameters");
        if instance.topo.link_count() == 0 || instance.topo.link_count() > ENUMERATION_BOUND {
            continue;
        }
        let heavy = classify_workloads(&instance.workloads()).heavy;
        let induced: Vec<(usize, usize)> = instance
            .topo
            .links()
            .iter()
            .copied()
            .filter(|&(u, v)| heavy[u] && heavy[v])
            .collect();
        let sub = Topology::new(n, induced).expect("subgraph of a valid topology");
        if is_bipartite(&sub).is_none() {
            continue;
        }
        let slot = rng.gen_range(0..30);
        let prev = (0..n).map(|_| rng.gen_bool(0.5)).collect();
        let prev2 = (0..n).map(|_| rng.gen_bool(0.5)).collect();
        let state = instance
            .initial_state()
            .with_history(slot, prev, prev2)
            .expect("history sized to node count");
        return Lemma4Case { instance, state };
    }
}

/// Brute force finds a matching covering every heavy node, and the
/// scheduler's schedule covers every heavy node with U = 0.
pub fn lemma4_suite(count: usize, seed: u64, scheduler: &dyn Scheduler) -> SuiteReport {
    let per_case = (0..count)
        .into_par_iter()
        .map(|case| {
            let Lemma4Case { instance, state } = random_lemma4_case(&mut case_rng(seed, case));
            let topo = &instance.topo;
            let heavy = classify_workloads(&state.workloads(topo)).heavy_nodes();
            let eligible = state.eligible();
            let mut problems = Vec::new();
            if !some_matching_covers(topo, &eligible, &heavy)
                .expect("case within enumeration bound")
            {
                problems.push(format!("no matching covers the heavy nodes {heavy:?}"));
            }
            let schedule: Matching = scheduler.schedule(&state, topo);
            let covered = schedule.covered(topo);
            let missed: Vec<usize> = heavy
                .iter()
                .copied()
                .filter(|&i| !crate::schedulers::service_indicator(&state, i) && !covered[i])
                .collect();
            if !missed.is_empty() {
                problems.push(format!(
                    "slot {}: schedule {:?} misses unserved heavy nodes {missed:?}",
                    state.slot(),
                    schedule.links()
                ));
            }
            let violations = problems
                .into_iter()
                .map(|detail| Violation {
                    case,
                    scheduler: scheduler.name().to_string(),
                    detail,
                    instance: write_instance(&instance),
                })
                .collect();
            (2, violations)
        })
        .collect();
    collect(Suite::Lemma4, count, per_case)
}

/// Random bipartite multigraph with sides of 1..=6 nodes.
pub fn random_bipartite_case(rng: &mut ChaCha8Rng) -> EvacInstance {
    let left = rng.gen_range(1..=6);
    let right = rng.gen_range(1..=6);
    let p = rng.gen_range(0.2..0.9);
    gen_random_bipartite(left, right, p, 5, rng.gen()).expect("valid generator parameters")
}

/// Evacuation time equals Δ(0) on bipartite instances: `count` random
/// bipartite multigraphs plus the 4x4 grid with multiplicities in 0..=5.
pub fn bipartite_suite(count: usize, seed: u64, schedulers: &[&dyn Scheduler]) -> SuiteReport {
    let per_case = (0..=count)
        .into_par_iter()
        .map(|case| {
            let inst = if case == count {
                let grid = gen_grid(4, 4).expect("valid grid");
                assign_random_multiplicities(&grid, 5, seed)
            } else {
                random_bipartite_case(&mut case_rng(seed, case))
            };
            let delta0 = inst.max_workload();
            let mut violations = Vec::new();
            for s in schedulers {
                let detail = match run_evacuation(&inst, *s) {
                    Ok(r) if r.evac_time == Some(delta0) => continue,
                    Ok(r) => format!(
                        "evacuation took {} slots, delta(0) = {delta0}",
                        r.evac_time.unwrap_or(0)
                    ),
                    Err(e) => e.to_string(),
                };
                violations.push(Violation {
                    case,
                    scheduler: s.name().to_string(),
                    detail,
                    instance: write_instance(&inst),
                });
            }
            (schedulers.len(), violations)
        })
        .collect();
    collect(Suite::Bipartite, count + 1, per_case)
}
