//! Combination of corrected scores into one severity value.
//!
//! Corrected scores are folded with the saturating recursion
//!
//! ```text
//! a0 = v0
//! an = 10 * (1 - (1 - a(n-1)/10) * (1 - vn/10))
//! ```
//!
//! which is algebraically the closed form `10 * (1 - prod(1 - vi/10))`:
//! order-insensitive, zero is an identity, 10 is absorbing. The final
//! score is `10 - f/sigma`, clamped to `[0, 10]`, except that an input
//! whose corrected scores are all zero reports severity 0 outright (the
//! literal formula would return 10 for an empty product, which would
//! read as maximal severity for a system with nothing exploitable).

use std::fmt::Write as _;

use crate::cvss::Score;
use crate::edg::{AssetId, CveId, Edg};
use crate::factors::AverageFactor;

/// Fold values from `[0, 10]` into their saturating combination.
///
/// Empty input yields 0, the identity of the combination.
pub fn bayesian_sum(values: &[f64]) -> f64 {
    debug_assert!(values.iter().all(|v| (0.0..=10.0).contains(v)));
    let mut iter = values.iter();
    let Some(&first) = iter.next() else {
        return 0.0;
    };
    iter.fold(first, |acc, &v| {
        10.0 * (1.0 - (1.0 - acc / 10.0) * (1.0 - v / 10.0))
    })
}

/// Literal final-score formula, before clamping or the degenerate
/// override: `10 - f / sigma`.
pub fn gamma_from_sum(f: f64, sigma: f64) -> f64 {
    10.0 - f / sigma
}

/// One vulnerability entering the aggregation, in document order.
#[derive(Debug, Clone, PartialEq)]
pub struct AggregationEntry {
    pub cve: CveId,
    pub asset: AssetId,
    pub raw: Score,
    pub lambda: f64,
    pub corrected: f64,
}

/// Ordered corrected scores plus the average factor of the raw scores.
///
/// `sigma` is `None` only when `entries` is empty.
#[derive(Debug, Clone, PartialEq)]
pub struct AggregationInput {
    entries: Vec<AggregationEntry>,
    sigma: Option<AverageFactor>,
}

impl AggregationInput {
    pub fn new(entries: Vec<AggregationEntry>, sigma: Option<AverageFactor>) -> Self {
        debug_assert!(entries.is_empty() || sigma.is_some());
        debug_assert!(entries.iter().all(|e| (0.0..=10.0).contains(&e.corrected)));
        AggregationInput { entries, sigma }
    }

    pub fn entries(&self) -> &[AggregationEntry] {
        &self.entries
    }

    pub fn sigma(&self) -> Option<&AverageFactor> {
        self.sigma.as_ref()
    }
}

/// Share of one vulnerability in the combined severity.
#[derive(Debug, Clone, PartialEq)]
pub struct Contribution {
    pub cve: CveId,
    pub corrected: f64,
    pub share: f64,
}

/// Outcome of the aggregation.
#[derive(Debug, Clone, PartialEq)]
pub struct AggregationResult {
    /// The saturating combination of the corrected scores.
    pub f_value: f64,
    /// Final severity after clamping and the degenerate override.
    pub gamma_score: f64,
    /// One-decimal rendering of `gamma_score`, rounded half away from
    /// zero (9.0949 displays as "9.1").
    pub gamma_display: String,
    /// The unclamped literal formula value, kept for transparency;
    /// `None` when there is no sigma (empty input).
    pub gamma_literal: Option<f64>,
    /// True when the literal value fell outside `[0, 10]`.
    pub gamma_clamped: bool,
    /// Average factor actually used, if any.
    pub sigma: Option<f64>,
    /// Entries with a positive corrected score, largest first; ties
    /// break on CVE id. Zero entries contribute nothing and are absent.
    pub contributions: Vec<Contribution>,
    /// Child of the entry point whose subtree combines to the highest
    /// severity; `None` when no branch carries a positive score.
    pub dominant_branch: Option<AssetId>,
    /// True when every corrected score is zero (or there are none).
    pub degenerate: bool,
}

/// Aggregate without branch attribution (`dominant_branch` stays
/// `None`); use [`aggregate_with_graph`] when the graph is at hand.
pub fn aggregate(input: &AggregationInput) -> AggregationResult {
    assemble(input, None)
}

/// Aggregate and attribute the result to the dominant branch of the
/// graph's entry point.
pub fn aggregate_with_graph(input: &AggregationInput, graph: &Edg) -> AggregationResult {
    assemble(input, dominant_branch(input, graph))
}

/// Ranked per-vulnerability contributions plus the dominant branch.
pub fn contributions(
    input: &AggregationInput,
    graph: &Edg,
) -> (Vec<Contribution>, Option<AssetId>) {
    (rank_contributions(input), dominant_branch(input, graph))
}

fn assemble(input: &AggregationInput, dominant: Option<AssetId>) -> AggregationResult {
    let corrected: Vec<f64> = input.entries.iter().map(|e| e.corrected).collect();
    let f_value = bayesian_sum(&corrected);
    let degenerate = corrected.iter().all(|&c| c == 0.0);
    let sigma = input.sigma.as_ref().map(|s| s.sigma());
    let gamma_literal = sigma.map(|s| gamma_from_sum(f_value, s));

    let (gamma_score, gamma_clamped) = if degenerate {
        (0.0, false)
    } else {
        let literal = gamma_literal.expect("non-degenerate input carries a sigma");
        let clamped = literal.clamp(0.0, 10.0);
        (clamped, clamped != literal)
    };

    AggregationResult {
        f_value,
        gamma_display: one_decimal_display(gamma_score),
        gamma_score,
        gamma_literal,
        gamma_clamped,
        sigma,
        contributions: rank_contributions(input),
        dominant_branch: if degenerate { None } else { dominant },
        degenerate,
    }
}

fn rank_contributions(input: &AggregationInput) -> Vec<Contribution> {
    let total: f64 = input.entries.iter().map(|e| e.corrected).sum();
    let mut ranked: Vec<Contribution> = input
        .entries
        .iter()
        .filter(|e| e.corrected > 0.0)
        .map(|e| Contribution {
            cve: e.cve.clone(),
            corrected: e.corrected,
            share: e.corrected / total,
        })
        .collect();
    ranked.sort_by(|a, b| {
        b.corrected
            .total_cmp(&a.corrected)
            .then_with(|| a.cve.cmp(&b.cve))
    });
    ranked
}

// Branch score of each direct dependency of the entry point: the
// combination over corrected scores on assets in its shortest-path
// subtree. The winner is the highest positive score, ties going to the
// lexicographically smaller asset id.
fn dominant_branch(input: &AggregationInput, graph: &Edg) -> Option<AssetId> {
    let mut best: Option<(AssetId, f64)> = None;
    for child in graph.entry_children() {
        let members = graph.branch_assets(child);
        let values: Vec<f64> = input
            .entries
            .iter()
            .filter(|e| members.contains(&e.asset))
            .map(|e| e.corrected)
            .collect();
        let score = bayesian_sum(&values);
        if score > 0.0 && best.as_ref().is_none_or(|(_, s)| score > *s) {
            best = Some((child.clone(), score));
        }
    }
    best.map(|(id, _)| id)
}

fn one_decimal_display(x: f64) -> String {
    let tenths = (x * 10.0).round() as i64;
    let mut out = String::new();
    let _ = write!(out, "{}.{}", tenths / 10, tenths % 10);
    out
}
