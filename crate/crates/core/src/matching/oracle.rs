//! Exhaustive matching enumeration, used to check the exact engines.

use crate::error::{Error, Result};
use crate::graph::{LinkId, Matching, Topology};

/// Largest number of eligible links the oracle will enumerate.
pub const ENUMERATION_BOUND: usize = 20;

/// What the oracle maximizes. Weights are per link for `EdgeSum` and per
/// node for `MatchedNodeSum`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scoring {
    EdgeSum,
    MatchedNodeSum,
}

/// Returns the optimal score and the first optimal matching met in
/// include-before-exclude order over ascending link ids.
pub fn brute_force_matching_oracle(
    topo: &Topology,
    eligible: &[bool],
    scoring: Scoring,
    weights: &[u64],
) -> Result<(u64, Matching)> {
    let links: Vec<LinkId> = (0..topo.link_count()).filter(|&l| eligible[l]).collect();
    if links.len() > ENUMERATION_BOUND {
        return Err(Error::EnumerationBound {
            links: links.len(),
            bound: ENUMERATION_BOUND,
        });
    }
    let mut best = None;
    let mut used = vec![false; topo.node_count()];
    let mut current = Vec::new();
    search(
        topo,
        &links,
        0,
        scoring,
        weights,
        &mut used,
        &mut current,
        0,
        &mut best,
    );
    let (score, links) = best.unwrap_or_default();
    Ok((score, Matching::new(links)))
}

#[allow(clippy::too_many_arguments)]
fn search(
    topo: &Topology,
    links: &[LinkId],
    idx: usize,
    scoring: Scoring,
    weights: &[u64],
    used: &mut Vec<bool>,
    current: &mut Vec<LinkId>,
    score: u64,
    best: &mut Option<(u64, Vec<LinkId>)>,
) {
    if idx == links.len() {
        if best.as_ref().is_none_or(|b| score > b.0) {
            *best = Some((score, current.clone()));
        }
        return;
    }
    let l = links[idx];
    let (u, v) = topo.endpoints(l);
    if !used[u] && !used[v] {
        let gain = match scoring {
            Scoring::EdgeSum => weights[l],
            Scoring::MatchedNodeSum => weights[u] + weights[v],
        };
        used[u] = true;
        used[v] = true;
        current.push(l);
        search(
            topo,
            links,
            idx + 1,
            scoring,
            weights,
            used,
            current,
            score + gain,
            best,
        );
        current.pop();
        used[u] = false;
        used[v] = false;
    }
    search(
        topo,
        links,
        idx + 1,
        scoring,
        weights,
        used,
        current,
        score,
        best,
    );
}

/// Visits the covered-node mask of every matching over eligible links.
pub fn for_each_matching_cover(
    topo: &Topology,
    eligible: &[bool],
    mut visit: impl FnMut(&[bool]),
) -> Result<()> {
    let links: Vec<LinkId> = (0..topo.link_count()).filter(|&l| eligible[l]).collect();
    if links.len() > ENUMERATION_BOUND {
        return Err(Error::EnumerationBound {
            links: links.len(),
            bound: ENUMERATION_BOUND,
        });
    }
    fn rec(
        topo: &Topology,
        links: &[LinkId],
        idx: usize,
        used: &mut Vec<bool>,
        visit: &mut dyn FnMut(&[bool]),
    ) {
        if idx == links.len() {
            visit(used);
            return;
        }
        let (u, v) = topo.endpoints(links[idx]);
        if !used[u] && !used[v] {
            used[u] = true;
            used[v] = true;
            rec(topo, links, idx + 1, used, visit);
            used[u] = false;
            used[v] = false;
        }
        rec(topo, links, idx + 1, used, visit);
    }
    let mut used = vec![false; topo.node_count()];
    rec(topo, &links, 0, &mut used, &mut visit);
    Ok(())
}

/// Whether some matching over eligible links covers every node in `nodes`.
pub fn some_matching_covers(topo: &Topology, eligible: &[bool], nodes: &[usize]) -> Result<bool> {
    let mut found = false;
    for_each_matching_cover(topo, eligible, |cover| {
        if !found && nodes.iter().all(|&i| cover[i]) {
            found = true;
        }
    })?;
    Ok(found)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_graph() {
        let t = Topology::new(3, vec![]).unwrap();
        let (score, m) = brute_force_matching_oracle(&t, &[], Scoring::EdgeSum, &[]).unwrap();
        assert_eq!(score, 0);
        assert!(m.is_empty());
    }

    #[test]
    fn path_edge_sum() {
        let t = Topology::new(5, (0..4).map(|i| (i, i + 1)).collect()).unwrap();
        let (score, m) =
            brute_force_matching_oracle(&t, &[true; 4], Scoring::EdgeSum, &[2, 3, 2, 3]).unwrap();
        assert_eq!(score, 6);
        assert_eq!(m.links(), &[1, 3]);
    }

    #[test]
    fn star_node_sum() {
        let t = Topology::new(4, vec![(0, 1), (0, 2), (0, 3)]).unwrap();
        let (score, m) =
            brute_force_matching_oracle(&t, &[true; 3], Scoring::MatchedNodeSum, &[5, 1, 2, 3])
                .unwrap();
        assert_eq!(score, 8);
        assert_eq!(m.links(), &[2]);
    }

    #[test]
    fn enumeration_bound() {
        let n = 8;
        let mut links = Vec::new();
        for u in 0..n {
            for v in u + 1..n {
                links.push((u, v));
            }
        }
        let t = Topology::new(n, links).unwrap();
        let eligible = vec![true; t.link_count()];
        let w = vec![1; t.link_count()];
        assert_eq!(
            brute_force_matching_oracle(&t, &eligible, Scoring::EdgeSum, &w).unwrap_err(),
            Error::EnumerationBound {
                links: 28,
                bound: 20
            }
        );
    }

    #[test]
    fn coverage_query() {
        let t = Topology::new(4, vec![(0, 1), (0, 2), (0, 3)]).unwrap();
        assert!(some_matching_covers(&t, &[true; 3], &[0, 3]).unwrap());
        assert!(!some_matching_covers(&t, &[true; 3], &[1, 2]).unwrap());
    }
}
