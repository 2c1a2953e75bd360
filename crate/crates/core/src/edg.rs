//! Extended dependency graph of the system under assessment.
//!
//! Assets are nodes, directed edges mean "the target is reached through
//! the source", exactly one asset is the entry point, and
//! vulnerabilities attach to assets. Construction validates the whole
//! input and reports every violation, not just the first. A built
//! [`Edg`] is immutable, so depth queries never fail.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::cvss::{base_score, CvssVector, Score};

/// Identifier of an asset, unique within a graph. Must be nonempty.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct AssetId(String);

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("InvalidAssetId: asset ids must be nonempty")]
pub struct InvalidAssetId;

impl AssetId {
    pub fn new(id: impl Into<String>) -> Result<Self, InvalidAssetId> {
        let id = id.into();
        if id.is_empty() {
            return Err(InvalidAssetId);
        }
        Ok(AssetId(id))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for AssetId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// CVE identifier matching `CVE-YYYY-NNNN+`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CveId(String);

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("InvalidCveId: `{0}` does not match CVE-YYYY-NNNN")]
pub struct InvalidCveId(pub String);

impl FromStr for CveId {
    type Err = InvalidCveId;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || InvalidCveId(s.to_string());
        let rest = s.strip_prefix("CVE-").ok_or_else(bad)?;
        let (year, seq) = rest.split_once('-').ok_or_else(bad)?;
        if year.len() != 4 || !year.bytes().all(|b| b.is_ascii_digit()) {
            return Err(bad());
        }
        if seq.len() < 4 || !seq.bytes().all(|b| b.is_ascii_digit()) {
            return Err(bad());
        }
        Ok(CveId(s.to_string()))
    }
}

impl CveId {
    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for CveId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// Development state of publicly known exploits for a vulnerability.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ExploitMaturity {
    /// No exploit is known at all (distinct from "not defined").
    NoExploit,
    NotDefined,
    Theoretical,
    ProofOfConcept,
    Functional,
    Automated,
}

/// A vulnerability attached to one asset of the graph.
#[derive(Debug, Clone, PartialEq)]
pub struct Vulnerability {
    pub cve: CveId,
    pub vector: CvssVector,
    pub base_score: Score,
    pub exploit_maturity: ExploitMaturity,
    pub affects_functionality: bool,
    pub asset: AssetId,
}

impl Vulnerability {
    /// Build a vulnerability with the base score computed from its
    /// vector. Ingest uses this when no score is stated in the input,
    /// and cross-checks against it when one is.
    pub fn new(
        cve: CveId,
        vector: CvssVector,
        exploit_maturity: ExploitMaturity,
        affects_functionality: bool,
        asset: AssetId,
    ) -> Self {
        let base = base_score(&vector);
        Vulnerability {
            cve,
            vector,
            base_score: base,
            exploit_maturity,
            affects_functionality,
            asset,
        }
    }
}

/// A single structural problem found while building a graph.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GraphViolation {
    DuplicateAsset { id: String },
    NoEntryPoint { entry: String },
    UnknownAsset { id: String, referenced_by: String },
    SelfLoop { id: String },
    Unreachable { id: String },
}

impl fmt::Display for GraphViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::DuplicateAsset { id } => {
                write!(f, "DuplicateAsset: `{id}` is declared more than once")
            }
            Self::NoEntryPoint { entry } => {
                write!(
                    f,
                    "NoEntryPoint: entry point `{entry}` is not a declared asset"
                )
            }
            Self::UnknownAsset { id, referenced_by } => {
                write!(
                    f,
                    "UnknownAsset: `{id}` referenced by {referenced_by} is not declared"
                )
            }
            Self::SelfLoop { id } => write!(f, "SelfLoop: edge from `{id}` to itself"),
            Self::Unreachable { id } => {
                write!(
                    f,
                    "Unreachable: asset `{id}` cannot be reached from the entry point"
                )
            }
        }
    }
}

/// All violations found in one build attempt.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GraphErrors {
    violations: Vec<GraphViolation>,
}

impl GraphErrors {
    pub fn violations(&self) -> &[GraphViolation] {
        &self.violations
    }
}

impl fmt::Display for GraphErrors {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, v) in self.violations.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

impl std::error::Error for GraphErrors {}

/// Validated dependency graph with one entry point.
#[derive(Debug, Clone, PartialEq)]
pub struct Edg {
    entry_point: AssetId,
    assets: BTreeMap<AssetId, Option<String>>,
    successors: BTreeMap<AssetId, BTreeSet<AssetId>>,
    vulnerabilities: Vec<Vulnerability>,
}

impl Edg {
    /// Validate and assemble a graph.
    ///
    /// Checks: unique asset ids, entry point declared, edge and
    /// vulnerability references declared, no self-loops, every asset
    /// reachable from the entry point. Parallel duplicate edges collapse
    /// to one; cycles are allowed (depth is shortest-path, so they are
    /// harmless). On failure the error lists every violation found.
    pub fn build(
        entry_point: AssetId,
        assets: Vec<(AssetId, Option<String>)>,
        edges: Vec<(AssetId, AssetId)>,
        vulnerabilities: Vec<Vulnerability>,
    ) -> Result<Self, GraphErrors> {
        let mut violations = Vec::new();

        let mut asset_map: BTreeMap<AssetId, Option<String>> = BTreeMap::new();
        for (id, name) in assets {
            match asset_map.entry(id) {
                std::collections::btree_map::Entry::Occupied(slot) => {
                    violations.push(GraphViolation::DuplicateAsset {
                        id: slot.key().as_str().to_string(),
                    });
                }
                std::collections::btree_map::Entry::Vacant(slot) => {
                    slot.insert(name);
                }
            }
        }

        let entry_known = asset_map.contains_key(&entry_point);
        if !entry_known {
            violations.push(GraphViolation::NoEntryPoint {
                entry: entry_point.as_str().to_string(),
            });
        }

        let mut successors: BTreeMap<AssetId, BTreeSet<AssetId>> = BTreeMap::new();
        for (from, to) in edges {
            if from == to {
                violations.push(GraphViolation::SelfLoop {
                    id: from.as_str().to_string(),
                });
                continue;
            }
            let mut ok = true;
            for end in [&from, &to] {
                if !asset_map.contains_key(end) {
                    violations.push(GraphViolation::UnknownAsset {
                        id: end.as_str().to_string(),
                        referenced_by: format!("edge `{from}` -> `{to}`"),
                    });
                    ok = false;
                }
            }
            if ok {
                successors.entry(from).or_default().insert(to);
            }
        }

        for vuln in &vulnerabilities {
            if !asset_map.contains_key(&vuln.asset) {
                violations.push(GraphViolation::UnknownAsset {
                    id: vuln.asset.as_str().to_string(),
                    referenced_by: format!("vulnerability {}", vuln.cve),
                });
            }
        }

        if entry_known {
            let reached = bfs_distances(&successors, &entry_point);
            for id in asset_map.keys() {
                if !reached.contains_key(id) {
                    violations.push(GraphViolation::Unreachable {
                        id: id.as_str().to_string(),
                    });
                }
            }
        }

        if !violations.is_empty() {
            return Err(GraphErrors { violations });
        }
        Ok(Edg {
            entry_point,
            assets: asset_map,
            successors,
            vulnerabilities,
        })
    }

    pub fn entry_point(&self) -> &AssetId {
        &self.entry_point
    }

    pub fn asset_count(&self) -> usize {
        self.assets.len()
    }

    pub fn contains_asset(&self, id: &AssetId) -> bool {
        self.assets.contains_key(id)
    }

    pub fn asset_name(&self, id: &AssetId) -> Option<&str> {
        self.assets.get(id).and_then(|n| n.as_deref())
    }

    pub fn assets(&self) -> impl Iterator<Item = &AssetId> {
        self.assets.keys()
    }

    pub fn vulnerabilities(&self) -> &[Vulnerability] {
        &self.vulnerabilities
    }

    /// Direct dependencies of the entry point, in id order.
    pub fn entry_children(&self) -> Vec<&AssetId> {
        self.successors
            .get(&self.entry_point)
            .map(|s| s.iter().collect())
            .unwrap_or_default()
    }

    /// Shortest-path depth of every asset, counted in nodes: the entry
    /// point has depth 1, its direct dependencies depth 2, and so on.
    pub fn depth_map(&self) -> DepthMap {
        let distances = bfs_distances(&self.successors, &self.entry_point);
        let mut depths = BTreeMap::new();
        let mut max_depth = 1;
        for (id, dist) in distances {
            let depth = dist + 1;
            max_depth = max_depth.max(depth);
            depths.insert(id, depth);
        }
        DepthMap { depths, max_depth }
    }

    /// Assets whose shortest path from the entry point runs through
    /// `child` (a direct dependency of the entry point), including
    /// `child` itself. An asset reachable at equal shortest distance
    /// through several children belongs to each of those branches.
    pub fn branch_assets(&self, child: &AssetId) -> BTreeSet<AssetId> {
        let from_entry = bfs_distances(&self.successors, &self.entry_point);
        let from_child = bfs_distances(&self.successors, child);
        let Some(&child_dist) = from_entry.get(child) else {
            return BTreeSet::new();
        };
        from_child
            .into_iter()
            .filter(|(id, d)| from_entry.get(id) == Some(&(child_dist + d)))
            .map(|(id, _)| id)
            .collect()
    }
}

/// Per-asset shortest-path depth and the graph's maximum depth `L`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DepthMap {
    depths: BTreeMap<AssetId, u32>,
    max_depth: u32,
}

impl DepthMap {
    pub fn depth(&self, id: &AssetId) -> Option<u32> {
        self.depths.get(id).copied()
    }

    pub fn max_depth(&self) -> u32 {
        self.max_depth
    }

    pub fn iter(&self) -> impl Iterator<Item = (&AssetId, u32)> {
        self.depths.iter().map(|(id, d)| (id, *d))
    }
}

// Breadth-first edge distances from `start`; unreachable nodes are
// absent from the result.
fn bfs_distances(
    successors: &BTreeMap<AssetId, BTreeSet<AssetId>>,
    start: &AssetId,
) -> BTreeMap<AssetId, u32> {
    let mut distances = BTreeMap::new();
    let mut queue = VecDeque::new();
    distances.insert(start.clone(), 0);
    queue.push_back(start.clone());
    while let Some(current) = queue.pop_front() {
        let d = distances[&current];
        if let Some(next) = successors.get(&current) {
            for n in next {
                if !distances.contains_key(n) {
                    distances.insert(n.clone(), d + 1);
                    queue.push_back(n.clone());
                }
            }
        }
    }
    distances
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cvss::parse_vector;

    fn id(s: &str) -> AssetId {
        AssetId::new(s).unwrap()
    }

    fn vuln(cve: &str, asset: &str) -> Vulnerability {
        Vulnerability::new(
            cve.parse().unwrap(),
            parse_vector("AV:N/AC:L/PR:N/UI:N/S:U/C:H/I:H/A:H").unwrap(),
            ExploitMaturity::Theoretical,
            true,
            id(asset),
        )
    }

    fn chain(ids: &[&str]) -> Edg {
        let assets = ids.iter().map(|s| (id(s), None)).collect();
        let edges = ids
            .windows(2)
            .map(|pair| (id(pair[0]), id(pair[1])))
            .collect();
        Edg::build(id(ids[0]), assets, edges, Vec::new()).unwrap()
    }

    #[test]
    fn single_asset_graph() {
        let g = Edg::build(id("entry"), vec![(id("entry"), None)], vec![], vec![]).unwrap();
        let depths = g.depth_map();
        assert_eq!(depths.depth(&id("entry")), Some(1));
        assert_eq!(depths.max_depth(), 1);
        assert!(g.entry_children().is_empty());
    }

    #[test]
    fn diamond_uses_shortest_path() {
        // a -> b, a -> c, b -> d, c -> d: both routes to d take two
        // edges, so d sits at depth 3.
        let assets = ["a", "b", "c", "d"].map(|s| (id(s), None)).to_vec();
        let edges = vec![
            (id("a"), id("b")),
            (id("a"), id("c")),
            (id("b"), id("d")),
            (id("c"), id("d")),
        ];
        let g = Edg::build(id("a"), assets, edges, vec![]).unwrap();
        let depths = g.depth_map();
        assert_eq!(depths.depth(&id("d")), Some(3));
        assert_eq!(depths.max_depth(), 3);
    }

    #[test]
    fn extra_edge_shortens_depth() {
        let g = chain(&["a", "b", "c", "d"]);
        assert_eq!(g.depth_map().depth(&id("d")), Some(4));

        let assets = ["a", "b", "c", "d"].map(|s| (id(s), None)).to_vec();
        let edges = vec![
            (id("a"), id("b")),
            (id("b"), id("c")),
            (id("c"), id("d")),
            (id("a"), id("d")),
        ];
        let g2 = Edg::build(id("a"), assets, edges, vec![]).unwrap();
        assert_eq!(g2.depth_map().depth(&id("d")), Some(2));
    }

    #[test]
    fn cycles_are_tolerated() {
        let assets = ["a", "b", "c"].map(|s| (id(s), None)).to_vec();
        let edges = vec![(id("a"), id("b")), (id("b"), id("c")), (id("c"), id("a"))];
        let g = Edg::build(id("a"), assets, edges, vec![]).unwrap();
        let depths = g.depth_map();
        assert_eq!(depths.depth(&id("a")), Some(1));
        assert_eq!(depths.depth(&id("c")), Some(3));
    }

    #[test]
    fn unknown_edge_asset_is_reported() {
        let err = Edg::build(
            id("a"),
            vec![(id("a"), None)],
            vec![(id("a"), id("x"))],
            vec![],
        )
        .unwrap_err();
        assert!(err
            .violations()
            .iter()
            .any(|v| matches!(v, GraphViolation::UnknownAsset { id, .. } if id == "x")));
    }

    #[test]
    fn unknown_vuln_asset_is_reported() {
        let err = Edg::build(
            id("a"),
            vec![(id("a"), None)],
            vec![],
            vec![vuln("CVE-2020-0001", "ghost")],
        )
        .unwrap_err();
        assert!(err
            .violations()
            .iter()
            .any(|v| matches!(v, GraphViolation::UnknownAsset { id, .. } if id == "ghost")));
    }

    #[test]
    fn all_violations_are_collected() {
        let err = Edg::build(
            id("missing"),
            vec![(id("a"), None), (id("a"), None), (id("b"), None)],
            vec![(id("a"), id("a")), (id("a"), id("x"))],
            vec![vuln("CVE-2020-0001", "ghost")],
        )
        .unwrap_err();
        let kinds: Vec<_> = err.violations().iter().collect();
        assert!(kinds.len() >= 4, "expected several violations: {kinds:?}");
        assert!(kinds
            .iter()
            .any(|v| matches!(v, GraphViolation::DuplicateAsset { .. })));
        assert!(kinds
            .iter()
            .any(|v| matches!(v, GraphViolation::NoEntryPoint { .. })));
        assert!(kinds
            .iter()
            .any(|v| matches!(v, GraphViolation::SelfLoop { .. })));
        assert!(kinds
            .iter()
            .any(|v| matches!(v, GraphViolation::UnknownAsset { .. })));
    }

    #[test]
    fn unreachable_asset_is_reported() {
        let err = Edg::build(
            id("a"),
            vec![(id("a"), None), (id("b"), None)],
            vec![],
            vec![],
        )
        .unwrap_err();
        assert_eq!(
            err.violations(),
            &[GraphViolation::Unreachable { id: "b".into() }]
        );
    }

    #[test]
    fn duplicate_edges_collapse() {
        let assets = vec![(id("a"), None), (id("b"), None)];
        let edges = vec![(id("a"), id("b")), (id("a"), id("b"))];
        let g = Edg::build(id("a"), assets, edges, vec![]).unwrap();
        assert_eq!(g.entry_children(), vec![&id("b")]);
    }

    #[test]
    fn input_order_does_not_change_depths() {
        let assets = ["a", "b", "c", "d"].map(|s| (id(s), None)).to_vec();
        let mut rev_assets = assets.clone();
        rev_assets.reverse();
        let edges = vec![
            (id("a"), id("b")),
            (id("a"), id("c")),
            (id("b"), id("d")),
            (id("c"), id("d")),
        ];
        let mut rev_edges = edges.clone();
        rev_edges.reverse();
        let g1 = Edg::build(id("a"), assets, edges, vec![]).unwrap();
        let g2 = Edg::build(id("a"), rev_assets, rev_edges, vec![]).unwrap();
        assert_eq!(g1.depth_map(), g2.depth_map());
    }

    #[test]
    fn branch_assets_partition_a_tree() {
        // entry -> left -> ll, entry -> right
        let assets = ["entry", "left", "right", "ll"]
            .map(|s| (id(s), None))
            .to_vec();
        let edges = vec![
            (id("entry"), id("left")),
            (id("entry"), id("right")),
            (id("left"), id("ll")),
        ];
        let g = Edg::build(id("entry"), assets, edges, vec![]).unwrap();
        let left = g.branch_assets(&id("left"));
        assert!(left.contains(&id("left")) && left.contains(&id("ll")));
        assert!(!left.contains(&id("right")) && !left.contains(&id("entry")));
        let right = g.branch_assets(&id("right"));
        assert_eq!(right.len(), 1);
    }

    #[test]
    fn shared_shortest_path_asset_belongs_to_both_branches() {
        let assets = ["e", "b1", "b2", "shared"].map(|s| (id(s), None)).to_vec();
        let edges = vec![
            (id("e"), id("b1")),
            (id("e"), id("b2")),
            (id("b1"), id("shared")),
            (id("b2"), id("shared")),
        ];
        let g = Edg::build(id("e"), assets, edges, vec![]).unwrap();
        assert!(g.branch_assets(&id("b1")).contains(&id("shared")));
        assert!(g.branch_assets(&id("b2")).contains(&id("shared")));
    }

    #[test]
    fn cve_id_validation() {
        assert!("CVE-2017-18269".parse::<CveId>().is_ok());
        assert!("CVE-2019-15847".parse::<CveId>().is_ok());
        assert!("CVE-17-1".parse::<CveId>().is_err());
        assert!("CVE-2019-123".parse::<CveId>().is_err());
        assert!("cve-2019-1234".parse::<CveId>().is_err());
        assert!("CVE-2019-12a4".parse::<CveId>().is_err());
        assert!("".parse::<CveId>().is_err());
    }

    #[test]
    fn asset_id_must_be_nonempty() {
        assert!(AssetId::new("").is_err());
        assert!(AssetId::new("x").is_ok());
    }

    mod properties {
        use super::*;
        use proptest::prelude::*;

        // Random reachable graph: a parent chain guarantees
        // reachability, extra edges may create shortcuts and cycles.
        fn arb_graph() -> impl Strategy<Value = (Vec<(AssetId, AssetId)>, usize)> {
            (2usize..12).prop_flat_map(|n| {
                let tree = proptest::collection::vec(0usize..n, n - 1).prop_map(move |parents| {
                    parents
                        .into_iter()
                        .enumerate()
                        .map(|(i, p)| (node(p.min(i)), node(i + 1)))
                        .collect::<Vec<_>>()
                });
                let extra = proptest::collection::vec((0usize..n, 0usize..n), 0..6);
                (tree, extra).prop_map(move |(mut edges, extra)| {
                    for (a, b) in extra {
                        if a != b {
                            edges.push((node(a), node(b)));
                        }
                    }
                    (edges, n)
                })
            })
        }

        fn node(i: usize) -> AssetId {
            AssetId::new(format!("n{i}")).unwrap()
        }

        fn build(edges: &[(AssetId, AssetId)], n: usize) -> Edg {
            let assets = (0..n).map(|i| (node(i), None)).collect();
            Edg::build(node(0), assets, edges.to_vec(), vec![]).unwrap()
        }

        proptest! {
            #[test]
            fn depths_lie_in_range((edges, n) in arb_graph()) {
                let g = build(&edges, n);
                let depths = g.depth_map();
                let max = depths.max_depth();
                for (_, d) in depths.iter() {
                    prop_assert!(d >= 1 && d <= max);
                }
                prop_assert_eq!(depths.depth(&node(0)), Some(1));
            }

            #[test]
            fn depth_levels_are_contiguous((edges, n) in arb_graph()) {
                let g = build(&edges, n);
                let depths = g.depth_map();
                let seen: std::collections::BTreeSet<u32> =
                    depths.iter().map(|(_, d)| d).collect();
                let expected: std::collections::BTreeSet<u32> =
                    (1..=depths.max_depth()).collect();
                prop_assert_eq!(seen, expected);
                // only the entry point sits at depth 1
                prop_assert_eq!(depths.iter().filter(|(_, d)| *d == 1).count(), 1);
            }

            #[test]
            fn adding_an_edge_never_deepens((edges, n) in arb_graph(), a in 0usize..12, b in 0usize..12) {
                prop_assume!(a < n && b < n && a != b);
                let before = build(&edges, n).depth_map();
                let mut more = edges.clone();
                more.push((node(a), node(b)));
                let after = build(&more, n).depth_map();
                for (id, d) in after.iter() {
                    prop_assert!(d <= before.depth(id).unwrap());
                }
            }
        }
    }
}
