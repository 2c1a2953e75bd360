//! Loading and validation of graph and deployment-context files.
//!
//! Both files are UTF-8 JSON. Ingest is total over the error domain:
//! malformed input always produces a diagnostic, never a panic or a
//! silent default, and record-level problems are collected across the
//! whole file instead of stopping at the first.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Deserialize;
use thiserror::Error;

use crate::cvss::{base_score, parse_vector, AttackVector, Score, ScoreError, VectorError};
use crate::edg::{AssetId, Edg, ExploitMaturity, GraphViolation, Vulnerability};
use crate::factors::DeploymentContext;

/// On-disk shape of a graph specification.
///
/// ```json
/// {
///   "entry_point": "webserver.py",
///   "assets": [{"id": "webserver.py", "name": "runtime web UI"}],
///   "edges": [["webserver.py", "runtime_core"]],
///   "vulnerabilities": [{
///     "cve": "CVE-2017-18269",
///     "asset": "libgcc_s",
///     "vector": "AV:N/AC:L/PR:N/UI:N/S:U/C:H/I:H/A:H",
///     "base_score": 9.8,
///     "affects_functionality": true,
///     "exploit_maturity": "theoretical"
///   }]
/// }
/// ```
///
/// `base_score` is optional: absent, it is computed from the vector;
/// present, it is cross-checked against the computed value.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphSpecFile {
    pub entry_point: String,
    #[serde(default)]
    pub assets: Vec<AssetSpec>,
    #[serde(default)]
    pub edges: Vec<(String, String)>,
    #[serde(default)]
    pub vulnerabilities: Vec<VulnRecord>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AssetSpec {
    pub id: String,
    #[serde(default)]
    pub name: Option<String>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VulnRecord {
    pub cve: String,
    pub asset: String,
    pub vector: String,
    #[serde(default)]
    pub base_score: Option<f64>,
    pub affects_functionality: bool,
    pub exploit_maturity: String,
}

/// On-disk shape of a deployment context.
///
/// ```json
/// {"reachable_vectors": ["network"], "description": "insider on the plant network"}
/// ```
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ContextFile {
    pub reachable_vectors: Vec<String>,
    #[serde(default)]
    pub description: Option<String>,
}

/// One problem found while validating a file.
#[derive(Debug, Clone, PartialEq)]
pub enum IngestIssue {
    InvalidAssetId {
        context: String,
    },
    InvalidCve {
        token: String,
    },
    InvalidVector {
        cve: String,
        source: VectorError,
    },
    UnknownMaturity {
        cve: String,
        token: String,
    },
    InvalidScore {
        cve: String,
        source: ScoreError,
    },
    ScoreMismatch {
        cve: String,
        stated: f64,
        computed: f64,
    },
    Graph(GraphViolation),
    UnknownVector {
        token: String,
    },
}

impl fmt::Display for IngestIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::InvalidAssetId { context } => {
                write!(f, "InvalidAssetId: empty asset id in {context}")
            }
            Self::InvalidCve { token } => {
                write!(f, "InvalidCveId: `{token}` does not match CVE-YYYY-NNNN")
            }
            Self::InvalidVector { cve, source } => write!(f, "{cve}: {source}"),
            Self::UnknownMaturity { cve, token } => write!(
                f,
                "UnknownMaturity: {cve} has exploit maturity `{token}`; expected one of \
                 none, not_defined, theoretical, poc, functional, automated"
            ),
            Self::InvalidScore { cve, source } => write!(f, "{cve}: {source}"),
            Self::ScoreMismatch {
                cve,
                stated,
                computed,
            } => write!(
                f,
                "ScoreMismatch: {cve} states base score {stated} but its vector computes {computed}"
            ),
            Self::Graph(v) => write!(f, "{v}"),
            Self::UnknownVector { token } => write!(
                f,
                "UnknownVector: `{token}` is not one of network, adjacent, local, physical"
            ),
        }
    }
}

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("cannot read `{path}`: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("ParseError: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("{}", format_issues(.0))]
    Invalid(Vec<IngestIssue>),
}

fn format_issues(issues: &[IngestIssue]) -> String {
    issues
        .iter()
        .map(|i| i.to_string())
        .collect::<Vec<_>>()
        .join("\n")
}

impl IngestError {
    /// The collected validation issues, if this is a validation failure.
    pub fn issues(&self) -> Option<&[IngestIssue]> {
        match self {
            IngestError::Invalid(list) => Some(list),
            _ => None,
        }
    }
}

/// Load and validate a graph specification file.
pub fn load_graph(path: &Path) -> Result<Edg, IngestError> {
    let text = fs::read_to_string(path).map_err(|source| IngestError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_graph(&text)
}

/// Parse and validate a graph specification from JSON text.
pub fn parse_graph(text: &str) -> Result<Edg, IngestError> {
    let spec: GraphSpecFile = serde_json::from_str(text)?;
    let mut issues = Vec::new();

    let entry = AssetId::new(spec.entry_point.clone())
        .map_err(|_| {
            issues.push(IngestIssue::InvalidAssetId {
                context: "entry_point".to_string(),
            });
        })
        .ok();

    let mut assets = Vec::new();
    for a in &spec.assets {
        match AssetId::new(a.id.clone()) {
            Ok(id) => assets.push((id, a.name.clone())),
            Err(_) => issues.push(IngestIssue::InvalidAssetId {
                context: "assets".to_string(),
            }),
        }
    }

    let mut edges = Vec::new();
    for (from, to) in &spec.edges {
        match (AssetId::new(from.clone()), AssetId::new(to.clone())) {
            (Ok(f), Ok(t)) => edges.push((f, t)),
            _ => issues.push(IngestIssue::InvalidAssetId {
                context: format!("edge `{from}` -> `{to}`"),
            }),
        }
    }

    let mut vulns = Vec::new();
    for record in &spec.vulnerabilities {
        if let Some(vuln) = convert_record(record, &mut issues) {
            vulns.push(vuln);
        }
    }

    if let Some(entry) = entry {
        match Edg::build(entry, assets, edges, vulns) {
            Ok(graph) if issues.is_empty() => return Ok(graph),
            Ok(_) => {}
            Err(errors) => {
                issues.extend(errors.violations().iter().cloned().map(IngestIssue::Graph));
            }
        }
    }
    Err(IngestError::Invalid(issues))
}

// Convert one vulnerability record, collecting every problem it has.
fn convert_record(record: &VulnRecord, issues: &mut Vec<IngestIssue>) -> Option<Vulnerability> {
    let mut ok = true;

    let cve = match record.cve.parse() {
        Ok(cve) => Some(cve),
        Err(_) => {
            issues.push(IngestIssue::InvalidCve {
                token: record.cve.clone(),
            });
            ok = false;
            None
        }
    };

    let vector = match parse_vector(&record.vector) {
        Ok(v) => Some(v),
        Err(source) => {
            issues.push(IngestIssue::InvalidVector {
                cve: record.cve.clone(),
                source,
            });
            ok = false;
            None
        }
    };

    let maturity = match parse_maturity(&record.exploit_maturity) {
        Some(m) => Some(m),
        None => {
            issues.push(IngestIssue::UnknownMaturity {
                cve: record.cve.clone(),
                token: record.exploit_maturity.clone(),
            });
            ok = false;
            None
        }
    };

    let asset = match AssetId::new(record.asset.clone()) {
        Ok(a) => Some(a),
        Err(_) => {
            issues.push(IngestIssue::InvalidAssetId {
                context: format!("vulnerability {}", record.cve),
            });
            ok = false;
            None
        }
    };

    if let (Some(vector), Some(stated)) = (&vector, record.base_score) {
        match Score::new(stated) {
            Ok(score) => {
                let computed = base_score(vector);
                if score != computed {
                    issues.push(IngestIssue::ScoreMismatch {
                        cve: record.cve.clone(),
                        stated,
                        computed: computed.value(),
                    });
                    ok = false;
                }
            }
            Err(source) => {
                issues.push(IngestIssue::InvalidScore {
                    cve: record.cve.clone(),
                    source,
                });
                ok = false;
            }
        }
    }

    if !ok {
        return None;
    }
    Some(Vulnerability::new(
        cve.unwrap(),
        vector.unwrap(),
        maturity.unwrap(),
        record.affects_functionality,
        asset.unwrap(),
    ))
}

fn parse_maturity(token: &str) -> Option<ExploitMaturity> {
    match token {
        "none" => Some(ExploitMaturity::NoExploit),
        "not_defined" => Some(ExploitMaturity::NotDefined),
        "theoretical" => Some(ExploitMaturity::Theoretical),
        "poc" => Some(ExploitMaturity::ProofOfConcept),
        "functional" => Some(ExploitMaturity::Functional),
        "automated" => Some(ExploitMaturity::Automated),
        _ => None,
    }
}

/// Load and validate a deployment-context file.
pub fn load_context(path: &Path) -> Result<DeploymentContext, IngestError> {
    let text = fs::read_to_string(path).map_err(|source| IngestError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_context(&text)
}

/// Parse a deployment context from JSON text. Duplicate vectors
/// collapse; unknown tokens are errors.
pub fn parse_context(text: &str) -> Result<DeploymentContext, IngestError> {
    let file: ContextFile = serde_json::from_str(text)?;
    let mut issues = Vec::new();
    let mut reachable = Vec::new();
    for token in &file.reachable_vectors {
        match token.as_str() {
            "network" => reachable.push(AttackVector::Network),
            "adjacent" => reachable.push(AttackVector::Adjacent),
            "local" => reachable.push(AttackVector::Local),
            "physical" => reachable.push(AttackVector::Physical),
            _ => issues.push(IngestIssue::UnknownVector {
                token: token.clone(),
            }),
        }
    }
    if !issues.is_empty() {
        return Err(IngestError::Invalid(issues));
    }
    Ok(DeploymentContext::new(reachable))
}
