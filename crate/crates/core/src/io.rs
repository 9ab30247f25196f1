//! DIMACS `.col` ingestion and the plain-text instance format.
//!
//! Plain-text instances:
//!
//! ```text
//! # comment
//! n m
//! u v mult      (m lines, 0-based node ids)
//! ```

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::graph::Topology;
use crate::topogen::EvacInstance;

/// Largest node count either text format accepts.
pub const MAX_NODES: usize = 1 << 20;
/// Largest per-link multiplicity the plain-text format accepts.
pub const MAX_MULTIPLICITY: u64 = 1 << 32;

fn check_node_count(n: usize, line: usize) -> Result<()> {
    if n > MAX_NODES {
        return Err(Error::parse(
            line,
            format!("{n} nodes exceeds the limit of {MAX_NODES}"),
        ));
    }
    Ok(())
}

fn parse_num<T: std::str::FromStr>(tok: Option<&str>, line: usize, what: &str) -> Result<T> {
    let tok = tok.ok_or_else(|| Error::parse(line, format!("missing {what}")))?;
    tok.parse()
        .map_err(|_| Error::parse(line, format!("invalid {what} '{tok}'")))
}

/// Parses a DIMACS `.col` file. Every `e` line is one packet; repeated
/// pairs accumulate multiplicity. Node ids are 1-based in the file.
pub fn parse_dimacs(text: &str) -> Result<EvacInstance> {
    let mut header: Option<(usize, usize)> = None;
    let mut index: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    let mut links = Vec::new();
    let mut packets: Vec<u64> = Vec::new();
    let mut edge_lines = 0usize;
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let mut toks = raw.split_whitespace();
        let Some(kind) = toks.next() else { continue };
        match kind {
            "c" => continue,
            "p" => {
                if header.is_some() {
                    return Err(Error::parse(line, "duplicate problem line"));
                }
                match toks.next() {
                    Some("edge") | Some("edges") | Some("col") => {}
                    other => {
                        return Err(Error::parse(
                            line,
                            format!("unsupported problem type '{}'", other.unwrap_or("")),
                        ))
                    }
                }
                let n: usize = parse_num(toks.next(), line, "node count")?;
                let m: usize = parse_num(toks.next(), line, "edge count")?;
                check_node_count(n, line)?;
                if toks.next().is_some() {
                    return Err(Error::parse(line, "trailing tokens on problem line"));
                }
                header = Some((n, m));
            }
            "e" => {
                let (n, _) =
                    header.ok_or_else(|| Error::parse(line, "edge before problem line"))?;
                let u: usize = parse_num(toks.next(), line, "endpoint")?;
                let v: usize = parse_num(toks.next(), line, "endpoint")?;
                if toks.next().is_some() {
                    return Err(Error::parse(line, "trailing tokens on edge line"));
                }
                for x in [u, v] {
                    if x == 0 || x > n {
                        return Err(Error::parse(line, format!("node {x} outside 1..={n}")));
                    }
                }
                if u == v {
                    return Err(Error::parse(line, format!("self-loop on node {u}")));
                }
                let (a, b) = (u - 1, v - 1);
                let key = (a.min(b), a.max(b));
                match index.get(&key) {
                    Some(&l) => packets[l] += 1,
                    None => {
                        index.insert(key, links.len());
                        links.push((a, b));
                        packets.push(1);
                    }
                }
                edge_lines += 1;
            }
            other => return Err(Error::parse(line, format!("unknown line type '{other}'"))),
        }
    }
    let (n, m) = header.ok_or_else(|| Error::parse(0, "missing problem line"))?;
    if edge_lines != m {
        return Err(Error::parse(
            0,
            format!("problem line declares {m} edges, found {edge_lines}"),
        ));
    }
    let topo = Topology::new(n, links).map_err(|e| Error::parse(0, e.to_string()))?;
    EvacInstance::new(topo, packets)
}

/// Writes an instance as DIMACS, one `e` line per packet.
pub fn write_dimacs(instance: &EvacInstance) -> String {
    let mut out = String::new();
    writeln!(
        out,
        "p edge {} {}",
        instance.topo.node_count(),
        instance.total_packets()
    )
    .unwrap();
    for (l, &(u, v)) in instance.topo.links().iter().enumerate() {
        for _ in 0..instance.packets[l] {
            writeln!(out, "e {} {}", u + 1, v + 1).unwrap();
        }
    }
    out
}

/// Parses the plain-text instance format. `#` starts a comment.
pub fn parse_instance(text: &str) -> Result<EvacInstance> {
    let mut rows = text.lines().enumerate().filter_map(|(i, raw)| {
        let body = raw.split('#').next().unwrap_or("").trim();
        (!body.is_empty()).then_some((i + 1, body))
    });
    let (hline, header) = rows
        .next()
        .ok_or_else(|| Error::parse(0, "empty instance"))?;
    let mut toks = header.split_whitespace();
    let n: usize = parse_num(toks.next(), hline, "node count")?;
    let m: usize = parse_num(toks.next(), hline, "link count")?;
    check_node_count(n, hline)?;
    if toks.next().is_some() {
        return Err(Error::parse(hline, "trailing tokens on header"));
    }
    let mut links = Vec::new();
    let mut packets = Vec::new();
    let mut seen = std::collections::HashSet::new();
    for (line, body) in rows {
        let mut toks = body.split_whitespace();
        let u: usize = parse_num(toks.next(), line, "endpoint")?;
        let v: usize = parse_num(toks.next(), line, "endpoint")?;
        let mult: u64 = parse_num(toks.next(), line, "multiplicity")?;
        if toks.next().is_some() {
            return Err(Error::parse(line, "trailing tokens on link line"));
        }
        if mult > MAX_MULTIPLICITY {
            return Err(Error::parse(
                line,
                format!("multiplicity {mult} exceeds {MAX_MULTIPLICITY}"),
            ));
        }
        if u >= n || v >= n {
            return Err(Error::parse(
                line,
                format!("link ({u}, {v}) outside 0..{n}"),
            ));
        }
        if u == v {
            return Err(Error::parse(line, format!("self-loop on node {u}")));
        }
        if !seen.insert((u.min(v), u.max(v))) {
            return Err(Error::parse(line, format!("duplicate link ({u}, {v})")));
        }
        if links.len() == m {
            return Err(Error::parse(line, format!("more than {m} links")));
        }
        links.push((u, v));
        packets.push(mult);
    }
    if links.len() != m {
        return Err(Error::parse(
            0,
            format!("header declares {m} links, found {}", links.len()),
        ));
    }
    let topo = Topology::new(n, links).map_err(|e| Error::parse(0, e.to_string()))?;
    EvacInstance::new(topo, packets)
}

pub fn write_instance(instance: &EvacInstance) -> String {
    let mut out = String::new();
    writeln!(
        out,
        "{} {}",
        instance.topo.node_count(),
        instance.topo.link_count()
    )
    .unwrap();
    for (l, &(u, v)) in instance.topo.links().iter().enumerate() {
        writeln!(out, "{u} {v} {}", instance.packets[l]).unwrap();
    }
    out
}

/// Reads an instance file: `.col` as DIMACS, anything else as plain text.
pub fn load_instance(path: &Path) -> Result<EvacInstance> {
    let text =
        std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    if path.extension().and_then(|e| e.to_str()) == Some("col") {
        parse_dimacs(&text)
    } else {
        parse_instance(&text)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dimacs_triangle() {
        let inst = parse_dimacs("c tiny\np edge 3 3\ne 1 2\ne 2 3\ne 1 3\n").unwrap();
        assert_eq!(inst.topo.link_count(), 3);
        assert_eq!(inst.total_packets(), 3);
        assert_eq!(inst.max_workload(), 2);
    }

    #[test]
    fn dimacs_duplicates_accumulate() {
        let inst = parse_dimacs("p edge 2 3\ne 1 2\ne 2 1\ne 1 2\n").unwrap();
        assert_eq!(inst.packets, vec![3]);
    }

    #[test]
    fn dimacs_errors_carry_lines() {
        let err = parse_dimacs("p edge 3 1\nc ok\ne 1 4\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 3, .. }), "{err:?}");
        let err = parse_dimacs("p edge 3 2\ne 1 x\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }), "{err:?}");
        assert!(parse_dimacs("p edge 3 2\ne 1 2\n").is_err());
        assert!(parse_dimacs("e 1 2\n").is_err());
        assert!(parse_dimacs("p edge 3 1\ne 2 2\n").is_err());
        assert!(parse_dimacs("").is_err());
    }

    #[test]
    fn dimacs_round_trip() {
        let inst = parse_dimacs("p edge 4 5\ne 1 2\ne 1 2\ne 2 3\ne 3 4\ne 4 1\n").unwrap();
        assert_eq!(parse_dimacs(&write_dimacs(&inst)).unwrap(), inst);
    }

    #[test]
    fn plain_round_trip_and_errors() {
        let text = "# two links\n3 2\n0 1 4\n1 2 0\n";
        let inst = parse_instance(text).unwrap();
        assert_eq!(inst.packets, vec![4, 0]);
        assert_eq!(parse_instance(&write_instance(&inst)).unwrap(), inst);
        assert!(parse_instance("3 2\n0 1 4\n").is_err());
        assert!(parse_instance("3 1\n0 3 4\n").is_err());
        assert!(parse_instance("3 2\n0 1 4\n1 0 1\n").is_err());
        assert!(parse_instance("").is_err());
    }
}
