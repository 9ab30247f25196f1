//! Topology and evacuation-instance generators.

use std::collections::{BTreeMap, HashSet};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::graph::{NetworkState, Topology};

/// A topology with initial per-link packet counts (a loopless multigraph).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EvacInstance {
    pub topo: Topology,
    pub packets: Vec<u64>,
}

impl EvacInstance {
    pub fn new(topo: Topology, packets: Vec<u64>) -> Result<Self> {
        if packets.len() != topo.link_count() {
            return Err(Error::param(format!(
                "{} multiplicities for {} links",
                packets.len(),
                topo.link_count()
            )));
        }
        Ok(EvacInstance { topo, packets })
    }

    pub fn initial_state(&self) -> NetworkState {
        NetworkState::new(&self.topo, self.packets.clone())
            .expect("lengths checked on construction")
    }

    /// Node workloads at slot 0.
    pub fn workloads(&self) -> Vec<u64> {
        self.initial_state().workloads(&self.topo)
    }

    /// Δ(0): largest initial node workload.
    pub fn max_workload(&self) -> u64 {
        self.workloads().into_iter().max().unwrap_or(0)
    }

    pub fn total_packets(&self) -> u64 {
        self.packets.iter().sum()
    }

    /// Builds an instance from a list of (possibly repeated) node pairs.
    /// Repeated pairs accumulate multiplicity; links keep first-seen order.
    pub fn from_multi_edges(
        n: usize,
        edges: impl IntoIterator<Item = (usize, usize)>,
    ) -> Result<Self> {
        let mut index: BTreeMap<(usize, usize), usize> = BTreeMap::new();
        let mut links = Vec::new();
        let mut packets = Vec::new();
        for (u, v) in edges {
            let key = (u.min(v), u.max(v));
            match index.get(&key) {
                Some(&l) => packets[l] += 1,
                None => {
                    index.insert(key, links.len());
                    links.push((u, v));
                    packets.push(1);
                }
            }
        }
        let topo = Topology::new(n, links)?;
        EvacInstance::new(topo, packets)
    }
}

fn rng_for(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// `rows x cols` lattice. Node `(r, c)` has id `r * cols + c`.
pub fn gen_grid(rows: usize, cols: usize) -> Result<Topology> {
    if rows < 2 || cols < 2 {
        return Err(Error::param(format!(
            "grid needs at least 2x2, got {rows}x{cols}"
        )));
    }
    let id = |r: usize, c: usize| r * cols + c;
    let mut links = Vec::with_capacity(rows * (cols - 1) + cols * (rows - 1));
    for r in 0..rows {
        for c in 0..cols {
            if c + 1 < cols {
                links.push((id(r, c), id(r, c + 1)));
            }
            if r + 1 < rows {
                links.push((id(r, c), id(r + 1, c)));
            }
        }
    }
    Topology::new(rows * cols, links)
}

/// The two-phase worst case for link-weighted policies: a center node 0
/// joined to `n` hub nodes by single-packet links, each hub carrying a
/// pendant link with `n` packets. 2n + 1 nodes, 2n links; link `2i` is the
/// pendant of hub `i` (`n` packets) and link `2i + 1` joins hub `i` to the
/// center (one packet), so multiplicities read n, 1, n, 1, ...
///
/// Hubs are the bottleneck with workload n + 1. Node-based policies drain
/// in n + 1 slots; MWM and GMM first serve every pendant in parallel and
/// then serialize the center's n links, taking about 2n slots.
pub fn gen_path_special(n: usize) -> Result<EvacInstance> {
    if n == 0 {
        return Err(Error::param("special instance needs N >= 1"));
    }
    let mut links = Vec::with_capacity(2 * n);
    let mut packets = Vec::with_capacity(2 * n);
    for i in 0..n {
        let hub = 1 + 2 * i;
        links.push((hub, hub + 1));
        packets.push(n as u64);
        links.push((0, hub));
        packets.push(1);
    }
    EvacInstance::new(Topology::new(2 * n + 1, links)?, packets)
}

/// Delaunay triangulation of `target_nodes` uniform random points in the
/// unit square.
pub fn gen_triangular_mesh(target_nodes: usize, seed: u64) -> Result<Topology> {
    if target_nodes < 3 {
        return Err(Error::param("triangular mesh needs at least 3 nodes"));
    }
    let mut rng = rng_for(seed);
    for _attempt in 0..64 {
        let points: Vec<delaunator::Point> = (0..target_nodes)
            .map(|_| delaunator::Point {
                x: rng.gen(),
                y: rng.gen(),
            })
            .collect();
        let tri = delaunator::triangulate(&points);
        if tri.triangles.is_empty() {
            continue;
        }
        let mut edges = std::collections::BTreeSet::new();
        for t in tri.triangles.chunks(3) {
            for (a, b) in [(t[0], t[1]), (t[1], t[2]), (t[2], t[0])] {
                edges.insert((a.min(b), a.max(b)));
            }
        }
        let topo = Topology::new(target_nodes, edges.into_iter().collect())?;
        if is_connected(&topo) {
            return Ok(topo);
        }
    }
    Err(Error::param("could not triangulate the sampled points"))
}

/// Uniform random labelled spanning tree (random Prüfer sequence) plus
/// `m - (n - 1)` distinct extra links chosen uniformly.
pub fn gen_random_connected(n: usize, m: usize, seed: u64) -> Result<Topology> {
    if n < 2 {
        return Err(Error::param("random topology needs at least 2 nodes"));
    }
    let max_links = n * (n - 1) / 2;
    if m < n - 1 || m > max_links {
        return Err(Error::param(format!(
            "{m} links infeasible for a connected simple graph on {n} nodes (need {} ..= {max_links})",
            n - 1
        )));
    }
    let mut rng = rng_for(seed);
    let mut links = prufer_tree(n, &mut rng);
    let mut present: HashSet<(usize, usize)> =
        links.iter().map(|&(u, v)| (u.min(v), u.max(v))).collect();
    let mut candidates = Vec::with_capacity(max_links - links.len());
    for u in 0..n {
        for v in u + 1..n {
            if !present.contains(&(u, v)) {
                candidates.push((u, v));
            }
        }
    }
    let extra = m - links.len();
    let (chosen, _) = candidates.partial_shuffle(&mut rng, extra);
    for &mut (u, v) in chosen {
        present.insert((u, v));
        links.push((u, v));
    }
    Topology::new(n, links)
}

fn prufer_tree(n: usize, rng: &mut ChaCha8Rng) -> Vec<(usize, usize)> {
    if n == 2 {
        return vec![(0, 1)];
    }
    let seq: Vec<usize> = (0..n - 2).map(|_| rng.gen_range(0..n)).collect();
    let mut degree = vec![1usize; n];
    for &x in &seq {
        degree[x] += 1;
    }
    let mut leaves: std::collections::BinaryHeap<std::cmp::Reverse<usize>> = (0..n)
        .filter(|&i| degree[i] == 1)
        .map(std::cmp::Reverse)
        .collect();
    let mut edges = Vec::with_capacity(n - 1);
    for &x in &seq {
        let std::cmp::Reverse(leaf) = leaves
            .pop()
            .expect("a Prüfer sequence always leaves a leaf");
        edges.push((leaf, x));
        degree[x] -= 1;
        if degree[x] == 1 {
            leaves.push(std::cmp::Reverse(x));
        }
    }
    let std::cmp::Reverse(a) = leaves.pop().unwrap();
    let std::cmp::Reverse(b) = leaves.pop().unwrap();
    edges.push((a, b));
    edges
}

/// d-regular multigraph on `n` nodes by the configuration model.
///
/// Stubs are paired uniformly at random. Each self-loop `(u, u)` is then
/// re-drawn by picking a uniformly random pair `(a, b)` not touching `u`
/// and rewiring to `(u, a), (u, b)`, which keeps every degree at `d`.
pub fn gen_regular_multigraph(n: usize, d: usize, seed: u64) -> Result<EvacInstance> {
    if (n * d) % 2 == 1 {
        return Err(Error::param(format!("n * d = {} is odd", n * d)));
    }
    if n < 2 && d > 0 {
        return Err(Error::param(
            "a loopless regular multigraph needs at least 2 nodes",
        ));
    }
    let mut rng = rng_for(seed);
    let mut stubs: Vec<usize> = (0..n).flat_map(|i| std::iter::repeat_n(i, d)).collect();
    stubs.shuffle(&mut rng);
    let mut pairs: Vec<(usize, usize)> = stubs.chunks(2).map(|c| (c[0], c[1])).collect();
    let mut budget = 1000 * pairs.len().max(1);
    while let Some(idx) = pairs.iter().position(|&(a, b)| a == b) {
        let u = pairs[idx].0;
        let others: Vec<usize> = (0..pairs.len())
            .filter(|&j| pairs[j].0 != u && pairs[j].1 != u)
            .collect();
        if others.is_empty() || budget == 0 {
            return Err(Error::param(format!(
                "could not remove self-loops for n = {n}, d = {d}"
            )));
        }
        budget -= 1;
        let j = *others.choose(&mut rng).unwrap();
        let (a, b) = pairs[j];
        pairs[idx] = (u, a);
        pairs[j] = (u, b);
    }
    EvacInstance::from_multi_edges(n, pairs)
}

/// Independent uniform multiplicities on {0, ..., max_y} for every link.
pub fn assign_random_multiplicities(topo: &Topology, max_y: u64, seed: u64) -> EvacInstance {
    let mut rng = rng_for(seed);
    let packets = (0..topo.link_count())
        .map(|_| rng.gen_range(0..=max_y))
        .collect();
    EvacInstance {
        topo: topo.clone(),
        packets,
    }
}

/// Random bipartite multigraph: `left + right` nodes, each cross pair
/// present with probability `p` and multiplicity uniform on 1..=max_mult.
pub fn gen_random_bipartite(
    left: usize,
    right: usize,
    p: f64,
    max_mult: u64,
    seed: u64,
) -> Result<EvacInstance> {
    let mut rng = rng_for(seed);
    let mut links = Vec::new();
    let mut packets = Vec::new();
    for u in 0..left {
        for v in 0..right {
            if rng.gen::<f64>() < p {
                links.push((u, left + v));
                packets.push(rng.gen_range(1..=max_mult.max(1)));
            }
        }
    }
    EvacInstance::new(Topology::new(left + right, links)?, packets)
}

/// Random loopless multigraph on `n` nodes: each pair present with
/// probability `p`, multiplicity uniform on 1..=max_mult.
pub fn gen_random_multigraph(n: usize, p: f64, max_mult: u64, seed: u64) -> Result<EvacInstance> {
    let mut rng = rng_for(seed);
    let mut links = Vec::new();
    let mut packets = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            if rng.gen::<f64>() < p {
                links.push((u, v));
                packets.push(rng.gen_range(1..=max_mult.max(1)));
            }
        }
    }
    EvacInstance::new(Topology::new(n, links)?, packets)
}

/// G(n, p) simple graph with one packet per edge.
pub fn gen_gnp(n: usize, p: f64, seed: u64) -> Result<EvacInstance> {
    gen_random_multigraph(n, p, 1, seed)
}

pub fn is_connected(topo: &Topology) -> bool {
    let n = topo.node_count();
    if n == 0 {
        return true;
    }
    let mut seen = vec![false; n];
    let mut stack = vec![0];
    seen[0] = true;
    while let Some(u) = stack.pop() {
        for &l in topo.incident(u) {
            let v = topo.other_end(l, u);
            if !seen[v] {
                seen[v] = true;
                stack.push(v);
            }
        }
    }
    seen.into_iter().all(|s| s)
}
