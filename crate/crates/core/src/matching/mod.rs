//! Matching engines over the eligible links of a topology.
//!
//! Every engine returns a [`Matching`] restricted to eligible links and is
//! deterministic. Ties follow one total order everywhere: higher weight
//! first, then lower node id, then lower link id. The exact engines encode
//! that order as a lexicographic perturbation of the integer weights, which
//! leaves the set of optimal matchings of the original weights intact and
//! picks one of them. Because every eligible link gets a strictly positive
//! perturbed weight, the exact engines always return maximal matchings.

mod blossom;
pub mod oracle;

use crate::graph::{LinkId, Matching, NodeId, Topology};

pub use blossom::max_weight_matching as blossom_mate;
pub use oracle::{brute_force_matching_oracle, Scoring, ENUMERATION_BOUND};

/// A topology with per-link eligibility and nonnegative integer weights.
#[derive(Debug, Clone, Copy)]
pub struct WeightedGraphView<'a> {
    pub topo: &'a Topology,
    pub eligible: &'a [bool],
    pub edge_weight: &'a [u64],
}

impl<'a> WeightedGraphView<'a> {
    pub fn new(topo: &'a Topology, eligible: &'a [bool], edge_weight: &'a [u64]) -> Self {
        assert_eq!(eligible.len(), topo.link_count(), "eligibility mask length");
        assert_eq!(edge_weight.len(), topo.link_count(), "edge weight length");
        WeightedGraphView {
            topo,
            eligible,
            edge_weight,
        }
    }
}

/// Sum of edge weights over the matching.
pub fn edge_weight_sum(weights: &[u64], matching: &Matching) -> u64 {
    matching.links().iter().map(|&l| weights[l]).sum()
}

/// Sum of node weights over nodes covered by the matching.
pub fn matched_node_weight(topo: &Topology, node_weight: &[u64], matching: &Matching) -> u64 {
    matching
        .covered(topo)
        .iter()
        .zip(node_weight)
        .filter(|(c, _)| **c)
        .map(|(_, &w)| w)
        .sum()
}

/// Exact maximum-weight matching over eligible links.
pub fn max_weight_matching(view: WeightedGraphView<'_>) -> Matching {
    let eligible_links: Vec<LinkId> = (0..view.topo.link_count())
        .filter(|&l| view.eligible[l])
        .collect();
    let weights: Vec<i128> = eligible_links
        .iter()
        .map(|&l| view.edge_weight[l] as i128)
        .collect();
    exact_matching(view.topo, &eligible_links, &weights)
}

/// Exact matching maximizing the total weight of matched nodes.
///
/// Reduces to [`max_weight_matching`] with edge weight `w_u + w_v`. Node
/// weights are first refined by the node tie order, so among nodes of equal
/// weight the lower id ranks higher; if some matching covers the `s`
/// top-ranked nodes, the result covers them too.
pub fn max_vertex_weight_matching(
    topo: &Topology,
    eligible: &[bool],
    node_weight: &[u64],
) -> Matching {
    assert_eq!(node_weight.len(), topo.node_count(), "node weight length");
    assert_eq!(eligible.len(), topo.link_count(), "eligibility mask length");
    let n = topo.node_count() as i128;
    // Strictly larger than any matching's total rank bonus.
    let scale = n * (n + 1) / 2 + 1;
    let refined: Vec<i128> = node_weight
        .iter()
        .enumerate()
        .map(|(i, &w)| w as i128 * scale + (n - i as i128))
        .collect();
    let eligible_links: Vec<LinkId> = (0..topo.link_count()).filter(|&l| eligible[l]).collect();
    let weights: Vec<i128> = eligible_links
        .iter()
        .map(|&l| {
            let (u, v) = topo.endpoints(l);
            refined[u] + refined[v]
        })
        .collect();
    exact_matching(topo, &eligible_links, &weights)
}

/// Perturbs `weights` by link id (lower id preferred), solves exactly and
/// maps back to link ids.
fn exact_matching(topo: &Topology, links: &[LinkId], weights: &[i128]) -> Matching {
    if links.is_empty() {
        return Matching::empty();
    }
    let m = topo.link_count() as i128;
    let max_matching_size = (topo.node_count() / 2) as i128;
    let scale = max_matching_size * m + 1;
    let edges: Vec<(usize, usize, i64)> = links
        .iter()
        .zip(weights)
        .map(|(&l, &w)| {
            let (u, v) = topo.endpoints(l);
            let perturbed = w * scale + (m - l as i128);
            let w64 = i64::try_from(perturbed)
                .ok()
                .filter(|w| *w <= i64::MAX / 16)
                .expect("matching weights too large for exact solver");
            (u, v, w64)
        })
        .collect();
    let mate = blossom::max_weight_matching(topo.node_count(), &edges);
    let chosen: Vec<LinkId> = links
        .iter()
        .filter(|&&l| {
            let (u, v) = topo.endpoints(l);
            mate[u] == Some(v)
        })
        .copied()
        .collect();
    let eligible = eligible_mask(topo, links);
    complete_greedily(topo, &eligible, Matching::new(chosen))
}

fn eligible_mask(topo: &Topology, links: &[LinkId]) -> Vec<bool> {
    let mut mask = vec![false; topo.link_count()];
    for &l in links {
        mask[l] = true;
    }
    mask
}

/// Adds eligible links in ascending id order while they fit. A no-op for
/// the exact engines (their output is already maximal); kept so every
/// scheduler emits a maximal matching by construction.
pub fn complete_greedily(topo: &Topology, eligible: &[bool], matching: Matching) -> Matching {
    let mut covered = matching.covered(topo);
    let mut links = matching.links().to_vec();
    for (l, &(u, v)) in topo.links().iter().enumerate() {
        if eligible[l] && !covered[u] && !covered[v] {
            covered[u] = true;
            covered[v] = true;
            links.push(l);
        }
    }
    Matching::new(links)
}

/// Greedy maximal matching: heaviest eligible link first, ties to the lower
/// link id.
pub fn greedy_maximal_matching(view: WeightedGraphView<'_>) -> Matching {
    let mut order: Vec<LinkId> = (0..view.topo.link_count())
        .filter(|&l| view.eligible[l])
        .collect();
    order.sort_by(|&a, &b| {
        view.edge_weight[b]
            .cmp(&view.edge_weight[a])
            .then(a.cmp(&b))
    });
    let mut covered = vec![false; view.topo.node_count()];
    let mut chosen = Vec::new();
    for l in order {
        let (u, v) = view.topo.endpoints(l);
        if !covered[u] && !covered[v] {
            covered[u] = true;
            covered[v] = true;
            chosen.push(l);
        }
    }
    Matching::new(chosen)
}

/// Load-agnostic first-fit maximal matching in ascending link id order.
pub fn maximal_matching(topo: &Topology, eligible: &[bool]) -> Matching {
    complete_greedily(topo, eligible, Matching::empty())
}

/// Nodes ordered by the tie order: weight descending, then id ascending.
pub fn node_rank_order(node_weight: &[u64]) -> Vec<NodeId> {
    let mut order: Vec<NodeId> = (0..node_weight.len()).collect();
    order.sort_by(|&a, &b| node_weight[b].cmp(&node_weight[a]).then(a.cmp(&b)));
    order
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path(weights: usize) -> Topology {
        Topology::new(weights + 1, (0..weights).map(|i| (i, i + 1)).collect()).unwrap()
    }

    fn star() -> Topology {
        Topology::new(4, vec![(0, 1), (0, 2), (0, 3)]).unwrap()
    }

    #[test]
    fn mwm_examples() {
        let t = path(4);
        let all = vec![true; 4];
        let w = vec![2, 3, 2, 3];
        let m = max_weight_matching(WeightedGraphView::new(&t, &all, &w));
        assert_eq!(m.links(), &[1, 3]);
        assert_eq!(edge_weight_sum(&w, &m), 6);

        let none = vec![false; 4];
        assert!(max_weight_matching(WeightedGraphView::new(&t, &none, &w)).is_empty());

        let tri = Topology::new(3, vec![(0, 1), (1, 2), (0, 2)]).unwrap();
        let m = max_weight_matching(WeightedGraphView::new(&tri, &[true; 3], &[1, 1, 1]));
        assert_eq!(m.links(), &[0]);
    }

    #[test]
    fn mvm_examples() {
        let t = star();
        let m = max_vertex_weight_matching(&t, &[true; 3], &[5, 1, 2, 3]);
        assert_eq!(m.links(), &[2]);
        assert_eq!(matched_node_weight(&t, &[5, 1, 2, 3], &m), 8);

        let single = Topology::new(2, vec![(0, 1)]).unwrap();
        let m = max_vertex_weight_matching(&single, &[true], &[0, 0]);
        assert_eq!(m.links(), &[0]);
    }

    #[test]
    fn mvm_prefers_lower_node_id_on_ties() {
        // Leaves 1 and 2 tie; node 1 ranks higher.
        let t = star();
        let m = max_vertex_weight_matching(&t, &[true; 3], &[4, 2, 2, 1]);
        assert_eq!(m.links(), &[0]);
    }

    #[test]
    fn greedy_examples() {
        let t = path(3);
        let all = vec![true; 3];
        let m = greedy_maximal_matching(WeightedGraphView::new(&t, &all, &[1, 3, 1]));
        assert_eq!(m.links(), &[1]);
        let m = greedy_maximal_matching(WeightedGraphView::new(&t, &all, &[3, 1, 3]));
        assert_eq!(m.links(), &[0, 2]);
        let none = vec![false; 3];
        assert!(greedy_maximal_matching(WeightedGraphView::new(&t, &none, &[3, 1, 3])).is_empty());
    }

    #[test]
    fn first_fit_examples() {
        let single = Topology::new(2, vec![(0, 1)]).unwrap();
        assert_eq!(maximal_matching(&single, &[true]).links(), &[0]);
        let t = path(2);
        assert_eq!(maximal_matching(&t, &[true, true]).links(), &[0]);
        assert_eq!(maximal_matching(&star(), &[true; 3]).len(), 1);
    }

    #[test]
    fn ineligible_links_are_never_selected() {
        let t = path(3);
        let m = max_weight_matching(WeightedGraphView::new(
            &t,
            &[false, true, false],
            &[9, 1, 9],
        ));
        assert_eq!(m.links(), &[1]);
        let m = max_vertex_weight_matching(&t, &[true, false, true], &[1, 9, 9, 1]);
        assert_eq!(m.links(), &[0, 2]);
    }
}
