//! End-to-end assessment of a graph in a deployment context.
//!
//! For every vulnerability, in document order: look up its asset's
//! depth, evaluate the correction factors, rescale the score. Then take
//! the average factor over all raw scores and aggregate.

use crate::aggregate::{
    aggregate_with_graph, AggregationEntry, AggregationInput, AggregationResult,
};
use crate::cvss::{AttackVector, Score};
use crate::edg::{AssetId, CveId, DepthMap, Edg};
use crate::factors::{
    average_factor, corrected_score, AverageFactor, CorrectedScore, CorrectionFactors,
    DeploymentContext, FactorError, MeanKind,
};

/// One vulnerability with everything computed for it.
#[derive(Debug, Clone, PartialEq)]
pub struct AssessedVulnerability {
    pub cve: CveId,
    pub asset: AssetId,
    pub attack_vector: AttackVector,
    pub raw: Score,
    pub factors: CorrectionFactors,
    pub corrected: CorrectedScore,
}

/// Full outcome of assessing a graph: the per-vulnerability factor
/// table, the average factor, and the aggregation result.
#[derive(Debug, Clone, PartialEq)]
pub struct Assessment {
    pub rows: Vec<AssessedVulnerability>,
    pub sigma: Option<AverageFactor>,
    pub sigma_kind: MeanKind,
    pub depths: DepthMap,
    pub result: AggregationResult,
}

/// Run the whole pipeline over a validated graph.
///
/// Fails only if the average factor cannot be formed (harmonic mean
/// over a dataset containing a zero score).
pub fn assess(
    graph: &Edg,
    ctx: &DeploymentContext,
    sigma_kind: MeanKind,
) -> Result<Assessment, FactorError> {
    let depths = graph.depth_map();
    let max_depth = depths.max_depth();

    let mut rows = Vec::with_capacity(graph.vulnerabilities().len());
    for vuln in graph.vulnerabilities() {
        let depth = depths
            .depth(&vuln.asset)
            .expect("graph validation guarantees a depth for every asset");
        let factors = CorrectionFactors::evaluate(vuln, depth, max_depth, ctx)?;
        let corrected = corrected_score(vuln.base_score, factors.lambda());
        rows.push(AssessedVulnerability {
            cve: vuln.cve.clone(),
            asset: vuln.asset.clone(),
            attack_vector: vuln.vector.attack_vector,
            raw: vuln.base_score,
            factors,
            corrected,
        });
    }

    let sigma = if rows.is_empty() {
        None
    } else {
        let initial: Vec<Score> = rows.iter().map(|r| r.raw).collect();
        Some(average_factor(&initial, sigma_kind)?)
    };

    let entries = rows
        .iter()
        .map(|r| AggregationEntry {
            cve: r.cve.clone(),
            asset: r.asset.clone(),
            raw: r.raw,
            lambda: r.factors.lambda(),
            corrected: r.corrected.corrected(),
        })
        .collect();
    let input = AggregationInput::new(entries, sigma);
    let result = aggregate_with_graph(&input, graph);

    Ok(Assessment {
        rows,
        sigma,
        sigma_kind,
        depths,
        result,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cvss::parse_vector;
    use crate::edg::{ExploitMaturity, Vulnerability};

    fn asset(s: &str) -> AssetId {
        AssetId::new(s).unwrap()
    }

    fn graph() -> Edg {
        let assets = ["gateway", "svc", "lib"].map(|s| (asset(s), None)).to_vec();
        let edges = vec![
            (asset("gateway"), asset("svc")),
            (asset("svc"), asset("lib")),
        ];
        let vulns = vec![
            Vulnerability::new(
                "CVE-2021-0001".parse().unwrap(),
                parse_vector("AV:N/AC:L/PR:N/UI:N/S:U/C:H/I:H/A:H").unwrap(),
                ExploitMaturity::Functional,
                true,
                asset("svc"),
            ),
            Vulnerability::new(
                "CVE-2021-0002".parse().unwrap(),
                parse_vector("AV:L/AC:L/PR:L/UI:N/S:U/C:H/I:H/A:H").unwrap(),
                ExploitMaturity::Automated,
                true,
                asset("lib"),
            ),
        ];
        Edg::build(asset("gateway"), assets, edges, vulns).unwrap()
    }

    #[test]
    fn assessment_computes_factors_and_result() {
        let ctx = DeploymentContext::new([AttackVector::Network]);
        let a = assess(&graph(), &ctx, MeanKind::Arithmetic).unwrap();

        assert_eq!(a.rows.len(), 2);
        // depth 2 of 3 -> beta = 2/3; network reachable; functional exploit
        let first = &a.rows[0];
        assert_eq!(first.factors.rho(), 1);
        assert!((first.factors.beta() - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(first.factors.gamma(), 1);
        assert_eq!(first.factors.mu(), 1.75);
        // local vector is unreachable -> zeroed
        let second = &a.rows[1];
        assert_eq!(second.factors.gamma(), 0);
        assert_eq!(second.corrected.corrected(), 0.0);

        // sigma over both raw scores: (9.8 + 7.8) / 2
        assert_eq!(a.sigma.unwrap().sigma(), 8.8);
        assert!(!a.result.degenerate);
        assert_eq!(a.result.dominant_branch, Some(asset("svc")));
        // single contributing vulnerability carries the whole share
        assert_eq!(a.result.contributions.len(), 1);
        assert!((a.result.contributions[0].share - 1.0).abs() < 1e-12);
    }

    #[test]
    fn graph_without_vulnerabilities_is_degenerate() {
        let g = Edg::build(
            asset("gateway"),
            vec![(asset("gateway"), None)],
            vec![],
            vec![],
        )
        .unwrap();
        let a = assess(&g, &DeploymentContext::empty(), MeanKind::Arithmetic).unwrap();
        assert!(a.rows.is_empty());
        assert!(a.sigma.is_none());
        assert!(a.result.degenerate);
        assert_eq!(a.result.gamma_score, 0.0);
    }

    #[test]
    fn harmonic_sigma_rejects_zero_scores() {
        let assets = vec![(asset("e"), None)];
        let vulns = vec![Vulnerability::new(
            "CVE-2021-0003".parse().unwrap(),
            parse_vector("AV:N/AC:L/PR:N/UI:N/S:U/C:N/I:N/A:N").unwrap(),
            ExploitMaturity::NotDefined,
            true,
            asset("e"),
        )];
        let g = Edg::build(asset("e"), assets, vec![], vulns).unwrap();
        let err = assess(
            &g,
            &DeploymentContext::new([AttackVector::Network]),
            MeanKind::Harmonic,
        )
        .unwrap_err();
        assert_eq!(err, FactorError::HarmonicZeroScore);
    }
}
