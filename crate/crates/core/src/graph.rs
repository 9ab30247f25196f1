//! Network topology, per-slot queue state and the slot update rule.
//!
//! A [`Topology`] is the fixed interference structure: an undirected simple
//! graph whose links carry FIFO packet queues. Packet multiplicity lives in
//! [`NetworkState`], never in the topology. One slot's schedule is a
//! [`Matching`] because two links sharing a node cannot be active together.

use std::collections::HashSet;

use crate::error::{Error, Result};

pub type NodeId = usize;
pub type LinkId = usize;

/// Immutable undirected simple graph.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Topology {
    n: usize,
    links: Vec<(NodeId, NodeId)>,
    adjacency: Vec<Vec<LinkId>>,
}

impl Topology {
    /// Builds a topology, rejecting self-loops, duplicate links and
    /// out-of-range endpoints. Link ids follow the order of `links`.
    pub fn new(n: usize, links: Vec<(NodeId, NodeId)>) -> Result<Self> {
        let mut seen = HashSet::with_capacity(links.len());
        let mut adjacency = vec![Vec::new(); n];
        for (id, &(u, v)) in links.iter().enumerate() {
            if u >= n || v >= n {
                return Err(Error::InvalidTopology(format!(
                    "link {id} ({u}, {v}) has an endpoint outside [0, {n})"
                )));
            }
            if u == v {
                return Err(Error::InvalidTopology(format!(
                    "link {id} is a self-loop on node {u}"
                )));
            }
            if !seen.insert((u.min(v), u.max(v))) {
                return Err(Error::InvalidTopology(format!(
                    "link {id} ({u}, {v}) duplicates an earlier link"
                )));
            }
            adjacency[u].push(id);
            adjacency[v].push(id);
        }
        Ok(Topology {
            n,
            links,
            adjacency,
        })
    }

    pub fn node_count(&self) -> usize {
        self.n
    }

    pub fn link_count(&self) -> usize {
        self.links.len()
    }

    pub fn links(&self) -> &[(NodeId, NodeId)] {
        &self.links
    }

    pub fn endpoints(&self, link: LinkId) -> (NodeId, NodeId) {
        self.links[link]
    }

    /// Links incident to node `i`, in ascending id order.
    pub fn incident(&self, i: NodeId) -> &[LinkId] {
        &self.adjacency[i]
    }

    pub fn degree(&self, i: NodeId) -> usize {
        self.adjacency[i].len()
    }

    /// Endpoint of `link` opposite to `i`.
    pub fn other_end(&self, link: LinkId, i: NodeId) -> NodeId {
        let (u, v) = self.links[link];
        if u == i {
            v
        } else {
            u
        }
    }
}

/// Per-link queues plus the service history NSB and LC-NSB look at.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NetworkState {
    queues: Vec<u64>,
    slot: u64,
    served_prev: Vec<bool>,
    served_prev2: Vec<bool>,
}

impl NetworkState {
    /// State at slot 0 with the given per-link queues and no service history.
    pub fn new(topo: &Topology, queues: Vec<u64>) -> Result<Self> {
        if queues.len() != topo.link_count() {
            return Err(Error::param(format!(
                "{} queue lengths for {} links",
                queues.len(),
                topo.link_count()
            )));
        }
        Ok(NetworkState {
            queues,
            slot: 0,
            served_prev: vec![false; topo.node_count()],
            served_prev2: vec![false; topo.node_count()],
        })
    }

    pub fn empty(topo: &Topology) -> Self {
        NetworkState {
            queues: vec![0; topo.link_count()],
            slot: 0,
            served_prev: vec![false; topo.node_count()],
            served_prev2: vec![false; topo.node_count()],
        }
    }

    /// Overrides the slot index and service history. Intended for property
    /// tests that need arbitrary mid-run states.
    pub fn with_history(
        mut self,
        slot: u64,
        served_prev: Vec<bool>,
        served_prev2: Vec<bool>,
    ) -> Result<Self> {
        if served_prev.len() != self.served_prev.len()
            || served_prev2.len() != self.served_prev2.len()
        {
            return Err(Error::param(
                "service history length does not match node count",
            ));
        }
        self.slot = slot;
        self.served_prev = served_prev;
        self.served_prev2 = served_prev2;
        Ok(self)
    }

    pub fn queues(&self) -> &[u64] {
        &self.queues
    }

    pub fn queue(&self, link: LinkId) -> u64 {
        self.queues[link]
    }

    pub fn slot(&self) -> u64 {
        self.slot
    }

    /// R_i(k-1): whether node `i` was matched in the previous slot.
    pub fn served_prev(&self, i: NodeId) -> bool {
        self.served_prev[i]
    }

    /// R_i(k-2).
    pub fn served_prev2(&self, i: NodeId) -> bool {
        self.served_prev2[i]
    }

    pub fn total_packets(&self) -> u64 {
        self.queues.iter().sum()
    }

    pub fn is_drained(&self) -> bool {
        self.queues.iter().all(|&q| q == 0)
    }

    /// Links with a nonempty queue; only these may be activated.
    pub fn eligible(&self) -> Vec<bool> {
        self.queues.iter().map(|&q| q > 0).collect()
    }

    /// Workload of every node: the sum of queues over its incident links.
    pub fn workloads(&self, topo: &Topology) -> Vec<u64> {
        let mut w = vec![0u64; topo.node_count()];
        for (l, &(u, v)) in topo.links().iter().enumerate() {
            w[u] += self.queues[l];
            w[v] += self.queues[l];
        }
        w
    }

    /// Adds one slot's arrivals without advancing time.
    pub fn add_arrivals(&mut self, arrivals: &[u64]) -> Result<()> {
        if arrivals.is_empty() {
            return Ok(());
        }
        if arrivals.len() != self.queues.len() {
            return Err(Error::param(format!(
                "{} arrival counts for {} links",
                arrivals.len(),
                self.queues.len()
            )));
        }
        for (q, &a) in self.queues.iter_mut().zip(arrivals) {
            *q += a;
        }
        Ok(())
    }

    /// Serves one packet on every scheduled link, then credits `arrivals`
    /// (the next slot's arrivals; an empty slice means none), shifts the
    /// service history and advances the slot index.
    ///
    /// Arrivals credited here become eligible in the next slot's schedule.
    pub fn apply_slot(
        &mut self,
        topo: &Topology,
        schedule: &Matching,
        arrivals: &[u64],
    ) -> Result<()> {
        schedule.validate(topo, self)?;
        if !arrivals.is_empty() && arrivals.len() != self.queues.len() {
            return Err(Error::param(format!(
                "{} arrival counts for {} links",
                arrivals.len(),
                self.queues.len()
            )));
        }
        std::mem::swap(&mut self.served_prev, &mut self.served_prev2);
        self.served_prev.iter_mut().for_each(|r| *r = false);
        for &l in schedule.links() {
            self.queues[l] -= 1;
            let (u, v) = topo.endpoints(l);
            self.served_prev[u] = true;
            self.served_prev[v] = true;
        }
        self.add_arrivals(arrivals)?;
        self.slot += 1;
        Ok(())
    }
}

/// Workload Q_i(k) of node `i`.
pub fn node_workload(state: &NetworkState, topo: &Topology, i: NodeId) -> Result<u64> {
    if i >= topo.node_count() {
        return Err(Error::NodeOutOfRange {
            node: i,
            n: topo.node_count(),
        });
    }
    Ok(topo.incident(i).iter().map(|&l| state.queue(l)).sum())
}

/// Maximum workload together with the critical and heavy node masks.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NodeClasses {
    pub max_workload: u64,
    pub critical: Vec<bool>,
    pub heavy: Vec<bool>,
}

impl NodeClasses {
    pub fn critical_nodes(&self) -> Vec<NodeId> {
        mask_to_ids(&self.critical)
    }

    pub fn heavy_nodes(&self) -> Vec<NodeId> {
        mask_to_ids(&self.heavy)
    }
}

fn mask_to_ids(mask: &[bool]) -> Vec<NodeId> {
    mask.iter()
        .enumerate()
        .filter_map(|(i, &b)| b.then_some(i))
        .collect()
}

/// Classifies nodes from precomputed workloads.
///
/// Heavy means `n * Q_i >= (n - 1) * max`, compared in integers so ties are
/// exact. Both sets are empty when every workload is zero.
pub fn classify_workloads(workloads: &[u64]) -> NodeClasses {
    let n = workloads.len() as u128;
    let max_workload = workloads.iter().copied().max().unwrap_or(0);
    if max_workload == 0 {
        return NodeClasses {
            max_workload,
            critical: vec![false; workloads.len()],
            heavy: vec![false; workloads.len()],
        };
    }
    let threshold = (n.saturating_sub(1)) * max_workload as u128;
    NodeClasses {
        max_workload,
        critical: workloads.iter().map(|&q| q == max_workload).collect(),
        heavy: workloads
            .iter()
            .map(|&q| n * q as u128 >= threshold)
            .collect(),
    }
}

pub fn classify_nodes(state: &NetworkState, topo: &Topology) -> NodeClasses {
    classify_workloads(&state.workloads(topo))
}

/// One slot's schedule: node-disjoint link ids, kept sorted ascending.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct Matching {
    links: Vec<LinkId>,
}

impl Matching {
    pub fn new(mut links: Vec<LinkId>) -> Self {
        links.sort_unstable();
        links.dedup();
        Matching { links }
    }

    pub fn empty() -> Self {
        Matching::default()
    }

    pub fn links(&self) -> &[LinkId] {
        &self.links
    }

    pub fn len(&self) -> usize {
        self.links.len()
    }

    pub fn is_empty(&self) -> bool {
        self.links.is_empty()
    }

    pub fn contains(&self, link: LinkId) -> bool {
        self.links.binary_search(&link).is_ok()
    }

    /// Per-node flag: is the node an endpoint of a selected link.
    pub fn covered(&self, topo: &Topology) -> Vec<bool> {
        let mut c = vec![false; topo.node_count()];
        for &l in &self.links {
            let (u, v) = topo.endpoints(l);
            c[u] = true;
            c[v] = true;
        }
        c
    }

    /// Checks node-disjointness only.
    pub fn is_matching(&self, topo: &Topology) -> bool {
        let mut used = vec![false; topo.node_count()];
        for &l in &self.links {
            if l >= topo.link_count() {
                return false;
            }
            let (u, v) = topo.endpoints(l);
            if used[u] || used[v] {
                return false;
            }
            used[u] = true;
            used[v] = true;
        }
        true
    }

    /// Checks that the schedule is a matching over nonempty queues.
    pub fn validate(&self, topo: &Topology, state: &NetworkState) -> Result<()> {
        let mut used = vec![false; topo.node_count()];
        for &l in &self.links {
            if l >= topo.link_count() {
                return Err(Error::InvalidSchedule(format!("unknown link {l}")));
            }
            if state.queue(l) == 0 {
                return Err(Error::InvalidSchedule(format!(
                    "link {l} has an empty queue"
                )));
            }
            let (u, v) = topo.endpoints(l);
            for x in [u, v] {
                if used[x] {
                    return Err(Error::InvalidSchedule(format!(
                        "node {x} is shared by two scheduled links"
                    )));
                }
                used[x] = true;
            }
        }
        Ok(())
    }

    /// No eligible link can be added without a node conflict.
    pub fn is_maximal(&self, topo: &Topology, eligible: &[bool]) -> bool {
        let covered = self.covered(topo);
        topo.links()
            .iter()
            .enumerate()
            .all(|(l, &(u, v))| !eligible[l] || covered[u] || covered[v])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn star3() -> Topology {
        Topology::new(4, vec![(0, 1), (0, 2), (0, 3)]).unwrap()
    }

    #[test]
    fn rejects_bad_topologies() {
        assert!(Topology::new(2, vec![(0, 0)]).is_err());
        assert!(Topology::new(2, vec![(0, 1), (1, 0)]).is_err());
        assert!(Topology::new(2, vec![(0, 2)]).is_err());
    }

    #[test]
    fn adjacency_lists_each_link_twice() {
        let t = Topology::new(4, vec![(0, 1), (1, 2), (2, 3), (3, 0)]).unwrap();
        let mut count = vec![0; t.link_count()];
        for i in 0..t.node_count() {
            for &l in t.incident(i) {
                count[l] += 1;
                let (u, v) = t.endpoints(l);
                assert!(u == i || v == i);
            }
        }
        assert!(count.iter().all(|&c| c == 2));
    }

    #[test]
    fn workload_examples() {
        let t = Topology::new(5, vec![(0, 1), (0, 2), (0, 3)]).unwrap();
        let s = NetworkState::new(&t, vec![2, 0, 5]).unwrap();
        assert_eq!(node_workload(&s, &t, 0).unwrap(), 7);
        assert_eq!(node_workload(&s, &t, 4).unwrap(), 0);
        assert_eq!(
            node_workload(&s, &t, 5),
            Err(Error::NodeOutOfRange { node: 5, n: 5 })
        );
    }

    #[test]
    fn classify_examples() {
        let zero = classify_workloads(&[0, 0, 0]);
        assert_eq!(zero.max_workload, 0);
        assert!(zero.critical_nodes().is_empty() && zero.heavy_nodes().is_empty());

        // a..g = 0..6; 7 * 3 = 21 < 6 * 4 = 24, so only the critical nodes are heavy.
        let c = classify_workloads(&[3, 3, 2, 4, 3, 4, 3]);
        assert_eq!(c.max_workload, 4);
        assert_eq!(c.critical_nodes(), vec![3, 5]);
        assert_eq!(c.heavy_nodes(), vec![3, 5]);

        let two = classify_workloads(&[5, 5]);
        assert_eq!(two.critical_nodes(), vec![0, 1]);
        assert_eq!(two.heavy_nodes(), vec![0, 1]);
    }

    #[test]
    fn heavy_threshold_is_exact_at_ties() {
        // n = 4, max 8: heavy iff 4 q >= 24, i.e. q >= 6.
        let c = classify_workloads(&[8, 6, 5, 0]);
        assert_eq!(c.heavy_nodes(), vec![0, 1]);
    }

    #[test]
    fn single_packet_drain() {
        let t = Topology::new(2, vec![(0, 1)]).unwrap();
        let mut s = NetworkState::new(&t, vec![1]).unwrap();
        s.apply_slot(&t, &Matching::new(vec![0]), &[]).unwrap();
        assert_eq!(s.queues(), &[0]);
        assert!(s.served_prev(0) && s.served_prev(1));
        assert_eq!(s.slot(), 1);
    }

    #[test]
    fn pure_arrival_step() {
        let t = Topology::new(4, vec![(0, 1), (1, 2), (2, 3)]).unwrap();
        let mut s = NetworkState::new(&t, vec![1, 1, 1]).unwrap();
        s.apply_slot(&t, &Matching::empty(), &[0, 2, 0]).unwrap();
        assert_eq!(s.queues(), &[1, 3, 1]);
        assert!((0..4).all(|i| !s.served_prev(i)));
    }

    #[test]
    fn history_shifts() {
        let t = Topology::new(3, vec![(0, 1), (1, 2)]).unwrap();
        let mut s = NetworkState::new(&t, vec![2, 2]).unwrap();
        s.apply_slot(&t, &Matching::new(vec![0]), &[]).unwrap();
        s.apply_slot(&t, &Matching::new(vec![1]), &[]).unwrap();
        assert_eq!(
            (0..3).map(|i| s.served_prev(i)).collect::<Vec<_>>(),
            vec![false, true, true]
        );
        assert_eq!(
            (0..3).map(|i| s.served_prev2(i)).collect::<Vec<_>>(),
            vec![true, true, false]
        );
    }

    #[test]
    fn invalid_schedules_rejected() {
        let t = star3();
        let mut s = NetworkState::new(&t, vec![1, 0, 1]).unwrap();
        assert!(matches!(
            s.apply_slot(&t, &Matching::new(vec![1]), &[]),
            Err(Error::InvalidSchedule(_))
        ));
        assert!(matches!(
            s.apply_slot(&t, &Matching::new(vec![0, 2]), &[]),
            Err(Error::InvalidSchedule(_))
        ));
        assert_eq!(s.queues(), &[1, 0, 1]);
    }

    #[test]
    fn maximality() {
        let t = star3();
        let eligible = vec![true, true, true];
        assert!(Matching::new(vec![1]).is_maximal(&t, &eligible));
        assert!(!Matching::empty().is_maximal(&t, &eligible));
    }
}
