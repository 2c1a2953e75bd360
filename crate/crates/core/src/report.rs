//! Aggregation reports: a stable-keyed JSON document and an aligned
//! text table with a summary footer.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::aggregate::gamma_from_sum;
use crate::pipeline::Assessment;

/// Machine-readable report. Serializes with exactly these keys, in this
/// order; `serde_json` round-trips it losslessly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub vulnerabilities: Vec<ReportRow>,
    /// Average of the raw scores; 0.0 when there were no vulnerabilities.
    pub sigma: f64,
    pub sigma_kind: String,
    pub f: f64,
    pub gamma: f64,
    pub gamma_display: String,
    pub degenerate: bool,
    /// CVE ids whose corrected score was clamped at 10.
    pub clamped_entries: Vec<String>,
    pub contributions: Vec<ContributionRow>,
    pub dominant_branch: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub cve: String,
    pub raw: f64,
    pub av: String,
    pub rho: u8,
    pub beta: f64,
    pub gamma: u8,
    pub mu: f64,
    pub lambda: f64,
    pub corrected: f64,
    pub clamped: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContributionRow {
    pub cve: String,
    pub corrected: f64,
    pub share: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Json,
    Text,
}

/// Assemble the report for an assessment.
pub fn build_report(assessment: &Assessment) -> Report {
    let rows = assessment
        .rows
        .iter()
        .map(|r| ReportRow {
            cve: r.cve.to_string(),
            raw: r.raw.value(),
            av: r.attack_vector.code().to_string(),
            rho: r.factors.rho(),
            beta: r.factors.beta(),
            gamma: r.factors.gamma(),
            mu: r.factors.mu(),
            lambda: r.factors.lambda(),
            corrected: r.corrected.corrected(),
            clamped: r.corrected.clamped(),
        })
        .collect();
    let result = &assessment.result;
    Report {
        vulnerabilities: rows,
        sigma: result.sigma.unwrap_or(0.0),
        sigma_kind: assessment.sigma_kind.as_str().to_string(),
        f: result.f_value,
        gamma: result.gamma_score,
        gamma_display: result.gamma_display.clone(),
        degenerate: result.degenerate,
        clamped_entries: assessment
            .rows
            .iter()
            .filter(|r| r.corrected.clamped())
            .map(|r| r.cve.to_string())
            .collect(),
        contributions: result
            .contributions
            .iter()
            .map(|c| ContributionRow {
                cve: c.cve.to_string(),
                corrected: c.corrected,
                share: c.share,
            })
            .collect(),
        dominant_branch: result.dominant_branch.as_ref().map(|a| a.to_string()),
    }
}

/// Render a report. The JSON form is the serialized [`Report`]; the
/// text form is an aligned factor table plus a summary footer ending in
/// `aggregated = <display>`.
pub fn render_report(report: &Report, format: ReportFormat) -> String {
    match format {
        ReportFormat::Json => {
            let mut out = serde_json::to_string_pretty(report).expect("report serializes");
            out.push('\n');
            out
        }
        ReportFormat::Text => render_text(report),
    }
}

const HEADERS: [&str; 9] = [
    "CVE",
    "CVSS",
    "AV",
    "FUNCTIONALITY",
    "DEEPNESS",
    "CONTEXT",
    "EXPLOIT",
    "SUMMARIZED",
    "CORRECTED",
];

fn render_text(report: &Report) -> String {
    let mut table: Vec<[String; 9]> = vec![HEADERS.map(String::from)];
    for row in &report.vulnerabilities {
        let mut corrected = trim3(row.corrected);
        if row.clamped {
            corrected.push('*');
        }
        table.push([
            row.cve.clone(),
            trim3(row.raw),
            row.av.clone(),
            row.rho.to_string(),
            trim3(row.beta),
            row.gamma.to_string(),
            trim3(row.mu),
            trim3(row.lambda),
            corrected,
        ]);
    }

    let mut widths = [0usize; 9];
    for row in &table {
        for (w, cell) in widths.iter_mut().zip(row) {
            *w = (*w).max(cell.len());
        }
    }

    let mut out = String::new();
    for row in &table {
        let mut line = String::new();
        for (cell, width) in row.iter().zip(widths) {
            let _ = write!(line, "{cell:width$}  ");
        }
        out.push_str(line.trim_end());
        out.push('\n');
    }

    out.push('\n');
    let _ = writeln!(
        out,
        "sigma ({}) = {}",
        report.sigma_kind,
        trim6(report.sigma)
    );
    let _ = writeln!(out, "f = {:.6}", report.f);
    let _ = writeln!(out, "aggregated = {}", report.gamma_display);
    if report.degenerate {
        if report.sigma > 0.0 {
            let _ = writeln!(
                out,
                "degenerate: no corrected score is positive; reported as 0.0 \
                 (literal formula value {})",
                trim6(gamma_from_sum(report.f, report.sigma))
            );
        } else {
            let _ = writeln!(out, "degenerate: no vulnerabilities to aggregate");
        }
    } else if report.sigma > 0.0 {
        let literal = gamma_from_sum(report.f, report.sigma);
        if literal != report.gamma {
            let _ = writeln!(
                out,
                "final score clamped into [0, 10] from {}",
                trim6(literal)
            );
        }
    }
    if !report.clamped_entries.is_empty() {
        let _ = writeln!(
            out,
            "clamped at 10.0: {} (*)",
            report.clamped_entries.join(", ")
        );
    }
    if let Some(branch) = &report.dominant_branch {
        let _ = writeln!(out, "dominant branch = {branch}");
    }
    out
}

/// Step-by-step explanation: factor products, the running combination,
/// and the contribution ranking.
pub fn render_explanation(report: &Report) -> String {
    let mut out = String::new();
    out.push_str("correction steps:\n");
    for row in &report.vulnerabilities {
        let _ = writeln!(
            out,
            "  {}: lambda = {} * {} * {} * {} = {}; corrected = {} * {} = {}{}",
            row.cve,
            row.rho,
            trim3(row.beta),
            row.gamma,
            trim3(row.mu),
            trim3(row.lambda),
            trim3(row.raw),
            trim3(row.lambda),
            trim3(row.corrected),
            if row.clamped { " (clamped)" } else { "" },
        );
    }

    out.push_str("accumulation:\n");
    let mut acc: Option<f64> = None;
    for (i, row) in report.vulnerabilities.iter().enumerate() {
        let v = row.corrected;
        let next = match acc {
            None => v,
            Some(a) => 10.0 * (1.0 - (1.0 - a / 10.0) * (1.0 - v / 10.0)),
        };
        acc = Some(next);
        let _ = writeln!(out, "  a{} = {:.6}  (+ {})", i, next, trim3(v));
    }

    out.push_str("contributions:\n");
    for (i, c) in report.contributions.iter().enumerate() {
        let _ = writeln!(
            out,
            "  {}. {}  corrected {}  share {:.3}%",
            i + 1,
            c.cve,
            trim3(c.corrected),
            c.share * 100.0
        );
    }
    match &report.dominant_branch {
        Some(branch) => {
            let _ = writeln!(out, "dominant branch = {branch}");
        }
        None => out.push_str("dominant branch = (none)\n"),
    }
    out
}

// Round half away from zero at three decimals, then drop trailing
// zeros: 0.5 -> "0.5", 1.0 -> "1", 0.3125 -> "0.313".
fn trim3(x: f64) -> String {
    trim(format!("{:.3}", (x * 1000.0).round() / 1000.0))
}

fn trim6(x: f64) -> String {
    trim(format!("{:.6}", (x * 1e6).round() / 1e6))
}

fn trim(mut s: String) -> String {
    if s.contains('.') {
        while s.ends_with('0') {
            s.pop();
        }
        if s.ends_with('.') {
            s.pop();
        }
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cvss::{parse_vector, AttackVector};
    use crate::edg::{AssetId, Edg, ExploitMaturity, Vulnerability};
    use crate::factors::{DeploymentContext, MeanKind};
    use crate::pipeline::assess;

    fn asset(s: &str) -> AssetId {
        AssetId::new(s).unwrap()
    }

    fn sample_assessment() -> Assessment {
        let assets = ["app", "lib"].map(|s| (asset(s), None)).to_vec();
        let edges = vec![(asset("app"), asset("lib"))];
        let vulns = vec![
            Vulnerability::new(
                "CVE-2020-0001".parse().unwrap(),
                parse_vector("AV:N/AC:L/PR:N/UI:N/S:U/C:H/I:H/A:H").unwrap(),
                ExploitMaturity::Theoretical,
                true,
                asset("lib"),
            ),
            Vulnerability::new(
                "CVE-2020-0002".parse().unwrap(),
                parse_vector("AV:L/AC:L/PR:L/UI:N/S:U/C:H/I:H/A:H").unwrap(),
                ExploitMaturity::NoExploit,
                false,
                asset("lib"),
            ),
        ];
        let graph = Edg::build(asset("app"), assets, edges, vulns).unwrap();
        let ctx = DeploymentContext::new([AttackVector::Network]);
        assess(&graph, &ctx, MeanKind::Arithmetic).unwrap()
    }

    #[test]
    fn json_report_round_trips() {
        let report = build_report(&sample_assessment());
        let rendered = render_report(&report, ReportFormat::Json);
        let parsed: Report = serde_json::from_str(&rendered).unwrap();
        assert_eq!(parsed, report);
    }

    #[test]
    fn json_report_has_the_stable_key_set() {
        let report = build_report(&sample_assessment());
        let rendered = render_report(&report, ReportFormat::Json);
        let value: serde_json::Value = serde_json::from_str(&rendered).unwrap();
        let expected = [
            "vulnerabilities",
            "sigma",
            "sigma_kind",
            "f",
            "gamma",
            "gamma_display",
            "degenerate",
            "clamped_entries",
            "contributions",
            "dominant_branch",
        ];
        let object = value.as_object().unwrap();
        assert_eq!(object.len(), expected.len());
        // top-level keys sit at two-space indentation in the pretty
        // form; their text order follows the struct
        let mut last = 0;
        for key in expected {
            assert!(object.contains_key(key), "missing key {key}");
            let pos = rendered
                .find(&format!("\n  \"{key}\""))
                .unwrap_or_else(|| panic!("top-level key {key} not rendered"));
            assert!(
                pos > last || key == "vulnerabilities",
                "key {key} out of order"
            );
            last = pos;
        }
    }

    #[test]
    fn text_report_contains_rows_and_footer() {
        let report = build_report(&sample_assessment());
        let text = render_report(&report, ReportFormat::Text);
        let normalized: Vec<String> = text
            .lines()
            .map(|l| l.split_whitespace().collect::<Vec<_>>().join(" "))
            .collect();
        // lambda = 1 * 0.5 * 1 * 1.25 = 0.625; corrected = 6.125
        assert!(normalized.contains(&"CVE-2020-0001 9.8 N 1 0.5 1 1.25 0.625 6.125".to_string()));
        assert!(normalized.contains(&"CVE-2020-0002 7.8 L 0 0.5 0 0 0 0".to_string()));
        assert!(text.contains("sigma (arithmetic) = 8.8"));
        assert!(text.lines().any(|l| l.starts_with("aggregated = ")));
        assert!(text.contains("dominant branch = lib"));
    }

    #[test]
    fn degenerate_report_text_mentions_the_override() {
        let assets = vec![(asset("app"), None)];
        let graph = Edg::build(asset("app"), assets, vec![], vec![]).unwrap();
        let a = assess(&graph, &DeploymentContext::empty(), MeanKind::Arithmetic).unwrap();
        let report = build_report(&a);
        assert!(report.degenerate);
        assert_eq!(report.sigma, 0.0);
        let text = render_report(&report, ReportFormat::Text);
        assert!(text.contains("aggregated = 0.0"));
        assert!(text.contains("degenerate"));
    }

    #[test]
    fn clamped_final_score_is_called_out() {
        let mut report = build_report(&sample_assessment());
        // zero-score entries can drag sigma below f/10; the literal
        // formula then goes negative and the score clamps to 0
        report.sigma = 0.5;
        report.f = 8.0;
        report.gamma = 0.0;
        report.gamma_display = "0.0".to_string();
        let text = render_report(&report, ReportFormat::Text);
        assert!(text.contains("final score clamped into [0, 10] from -6"));
    }

    #[test]
    fn explanation_shows_steps_and_ranking() {
        let report = build_report(&sample_assessment());
        let explained = render_explanation(&report);
        assert!(explained.contains("a0 = 6.125000"));
        assert!(explained.contains("1. CVE-2020-0001"));
        assert!(explained.contains("dominant branch = lib"));
    }

    #[test]
    fn trim3_rounds_half_away_from_zero() {
        assert_eq!(trim3(0.3125), "0.313");
        assert_eq!(trim3(2.34375), "2.344");
        assert_eq!(trim3(2.53125), "2.531");
        assert_eq!(trim3(1.0), "1");
        assert_eq!(trim3(0.5), "0.5");
        assert_eq!(trim3(9.8), "9.8");
        assert_eq!(trim3(0.0), "0");
    }
}
