//! CVSS v3.1 base vectors: parsing, canonical rendering, and base scores.
//!
//! Only the eight base metrics are handled. Temporal and environmental
//! metric groups are rejected at parse time with a dedicated error; the
//! correction factors in [`crate::factors`] take over their role.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

/// Proximity an attacker needs to the vulnerable component.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum AttackVector {
    Network,
    Adjacent,
    Local,
    Physical,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum AttackComplexity {
    Low,
    High,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum PrivilegesRequired {
    None,
    Low,
    High,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum UserInteraction {
    None,
    Required,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Scope {
    Unchanged,
    Changed,
}

/// Impact level shared by the confidentiality, integrity, and
/// availability metrics.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Impact {
    None,
    Low,
    High,
}

impl AttackVector {
    pub fn code(self) -> &'static str {
        match self {
            Self::Network => "N",
            Self::Adjacent => "A",
            Self::Local => "L",
            Self::Physical => "P",
        }
    }

    fn from_metric_value(s: &str) -> Option<Self> {
        match s {
            "N" => Some(Self::Network),
            "A" => Some(Self::Adjacent),
            "L" => Some(Self::Local),
            "P" => Some(Self::Physical),
            _ => None,
        }
    }

    fn weight(self) -> f64 {
        match self {
            Self::Network => 0.85,
            Self::Adjacent => 0.62,
            Self::Local => 0.55,
            Self::Physical => 0.20,
        }
    }
}

impl AttackComplexity {
    pub fn code(self) -> &'static str {
        match self {
            Self::Low => "L",
            Self::High => "H",
        }
    }

    fn from_metric_value(s: &str) -> Option<Self> {
        match s {
            "L" => Some(Self::Low),
            "H" => Some(Self::High),
            _ => None,
        }
    }

    fn weight(self) -> f64 {
        match self {
            Self::Low => 0.77,
            Self::High => 0.44,
        }
    }
}

impl PrivilegesRequired {
    pub fn code(self) -> &'static str {
        match self {
            Self::None => "N",
            Self::Low => "L",
            Self::High => "H",
        }
    }

    fn from_metric_value(s: &str) -> Option<Self> {
        match s {
            "N" => Some(Self::None),
            "L" => Some(Self::Low),
            "H" => Some(Self::High),
            _ => None,
        }
    }

    // The Low/High weights rise when the scope changes.
    fn weight(self, scope_changed: bool) -> f64 {
        match (self, scope_changed) {
            (Self::None, _) => 0.85,
            (Self::Low, false) => 0.62,
            (Self::Low, true) => 0.68,
            (Self::High, false) => 0.27,
            (Self::High, true) => 0.50,
        }
    }
}

impl UserInteraction {
    pub fn code(self) -> &'static str {
        match self {
            Self::None => "N",
            Self::Required => "R",
        }
    }

    fn from_metric_value(s: &str) -> Option<Self> {
        match s {
            "N" => Some(Self::None),
            "R" => Some(Self::Required),
            _ => None,
        }
    }

    fn weight(self) -> f64 {
        match self {
            Self::None => 0.85,
            Self::Required => 0.62,
        }
    }
}

impl Scope {
    pub fn code(self) -> &'static str {
        match self {
            Self::Unchanged => "U",
            Self::Changed => "C",
        }
    }

    fn from_metric_value(s: &str) -> Option<Self> {
        match s {
            "U" => Some(Self::Unchanged),
            "C" => Some(Self::Changed),
            _ => None,
        }
    }

    fn is_changed(self) -> bool {
        matches!(self, Self::Changed)
    }
}

impl Impact {
    pub fn code(self) -> &'static str {
        match self {
            Self::None => "N",
            Self::Low => "L",
            Self::High => "H",
        }
    }

    fn from_metric_value(s: &str) -> Option<Self> {
        match s {
            "N" => Some(Self::None),
            "L" => Some(Self::Low),
            "H" => Some(Self::High),
            _ => None,
        }
    }

    fn weight(self) -> f64 {
        match self {
            Self::None => 0.0,
            Self::Low => 0.22,
            Self::High => 0.56,
        }
    }
}

impl fmt::Display for AttackVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

/// A fully specified CVSS v3.1 base vector.
///
/// Every metric holds exactly one legal value; there are 3888 distinct
/// vectors in total ([`all_vectors`] enumerates them).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct CvssVector {
    pub attack_vector: AttackVector,
    pub attack_complexity: AttackComplexity,
    pub privileges_required: PrivilegesRequired,
    pub user_interaction: UserInteraction,
    pub scope: Scope,
    pub confidentiality: Impact,
    pub integrity: Impact,
    pub availability: Impact,
}

/// Errors produced by [`parse_vector`].
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum VectorError {
    #[error("MalformedVector: unrecognized token `{token}` at segment {position}")]
    Malformed { position: usize, token: String },
    #[error("MissingMetric: expected base metric `{name}`")]
    MissingMetric { name: &'static str },
    #[error("DuplicateMetric: metric `{name}` appears more than once")]
    DuplicateMetric { name: &'static str },
    #[error("UnsupportedMetric: `{name}` belongs to the temporal or environmental group; only base vectors are accepted")]
    UnsupportedMetric { name: String },
}

const METRIC_ORDER: [&str; 8] = ["AV", "AC", "PR", "UI", "S", "C", "I", "A"];

const UNSUPPORTED_METRICS: [&str; 14] = [
    "E", "RL", "RC", // temporal
    "CR", "IR", "AR", "MAV", "MAC", "MPR", "MUI", "MS", "MC", "MI", "MA", // environmental
];

/// Parse a base vector string such as
/// `AV:N/AC:L/PR:N/UI:N/S:U/C:H/I:H/A:H`.
///
/// An optional `CVSS:3.1/` or `CVSS:3.0/` prefix is accepted (the base
/// grammar is identical); rendering always emits `CVSS:3.1/`. Metrics
/// must appear in the standard order with case-sensitive codes.
pub fn parse_vector(text: &str) -> Result<CvssVector, VectorError> {
    let mut attack_vector = None;
    let mut attack_complexity = None;
    let mut privileges_required = None;
    let mut user_interaction = None;
    let mut scope = None;
    let mut confidentiality = None;
    let mut integrity = None;
    let mut availability = None;

    let mut expected = 0usize;
    for (position, token) in text.split('/').enumerate() {
        if position == 0 && (token == "CVSS:3.1" || token == "CVSS:3.0") {
            continue;
        }
        let malformed = || VectorError::Malformed {
            position,
            token: token.to_string(),
        };
        let Some((key, value)) = token.split_once(':') else {
            return Err(malformed());
        };
        match METRIC_ORDER.iter().position(|m| *m == key) {
            Some(slot) if slot == expected => {
                let ok = match slot {
                    0 => put(&mut attack_vector, AttackVector::from_metric_value(value)),
                    1 => put(
                        &mut attack_complexity,
                        AttackComplexity::from_metric_value(value),
                    ),
                    2 => put(
                        &mut privileges_required,
                        PrivilegesRequired::from_metric_value(value),
                    ),
                    3 => put(
                        &mut user_interaction,
                        UserInteraction::from_metric_value(value),
                    ),
                    4 => put(&mut scope, Scope::from_metric_value(value)),
                    5 => put(&mut confidentiality, Impact::from_metric_value(value)),
                    6 => put(&mut integrity, Impact::from_metric_value(value)),
                    7 => put(&mut availability, Impact::from_metric_value(value)),
                    _ => unreachable!(),
                };
                if !ok {
                    return Err(malformed());
                }
                expected += 1;
            }
            Some(slot) if slot < expected => {
                return Err(VectorError::DuplicateMetric {
                    name: METRIC_ORDER[slot],
                });
            }
            Some(_) => {
                return Err(VectorError::MissingMetric {
                    name: METRIC_ORDER[expected],
                });
            }
            None if UNSUPPORTED_METRICS.contains(&key) => {
                return Err(VectorError::UnsupportedMetric {
                    name: key.to_string(),
                });
            }
            None => return Err(malformed()),
        }
    }
    if expected < METRIC_ORDER.len() {
        return Err(VectorError::MissingMetric {
            name: METRIC_ORDER[expected],
        });
    }

    Ok(CvssVector {
        attack_vector: attack_vector.unwrap(),
        attack_complexity: attack_complexity.unwrap(),
        privileges_required: privileges_required.unwrap(),
        user_interaction: user_interaction.unwrap(),
        scope: scope.unwrap(),
        confidentiality: confidentiality.unwrap(),
        integrity: integrity.unwrap(),
        availability: availability.unwrap(),
    })
}

fn put<T>(slot: &mut Option<T>, value: Option<T>) -> bool {
    match value {
        Some(v) => {
            *slot = Some(v);
            true
        }
        None => false,
    }
}

/// Canonical string form: standard metric order with the `CVSS:3.1/`
/// prefix. `parse_vector(render_vector(v)) == v` for every vector.
pub fn render_vector(v: &CvssVector) -> String {
    v.to_string()
}

impl fmt::Display for CvssVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "CVSS:3.1/AV:{}/AC:{}/PR:{}/UI:{}/S:{}/C:{}/I:{}/A:{}",
            self.attack_vector.code(),
            self.attack_complexity.code(),
            self.privileges_required.code(),
            self.user_interaction.code(),
            self.scope.code(),
            self.confidentiality.code(),
            self.integrity.code(),
            self.availability.code(),
        )
    }
}

impl FromStr for CvssVector {
    type Err = VectorError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_vector(s)
    }
}

/// A CVSS score on the `[0.0, 10.0]` scale at one-decimal granularity.
///
/// Stored as integer tenths, so score comparison and averaging stay
/// exact where the inputs are exact.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Score {
    tenths: u8,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ScoreError {
    #[error("ScoreOutOfRange: {0} is outside [0.0, 10.0]")]
    OutOfRange(f64),
    #[error("FractionalScore: {0} is not representable at one-decimal precision")]
    FractionalTenth(f64),
}

impl Score {
    pub const ZERO: Score = Score { tenths: 0 };
    pub const MAX: Score = Score { tenths: 100 };

    /// Validate a decimal score: must lie in `[0.0, 10.0]` on the
    /// one-decimal grid.
    pub fn new(value: f64) -> Result<Self, ScoreError> {
        if !value.is_finite() || !(0.0..=10.0).contains(&value) {
            return Err(ScoreError::OutOfRange(value));
        }
        let scaled = value * 10.0;
        let nearest = scaled.round();
        if (scaled - nearest).abs() > 1e-6 {
            return Err(ScoreError::FractionalTenth(value));
        }
        Ok(Score {
            tenths: nearest as u8,
        })
    }

    pub fn from_tenths(tenths: u8) -> Result<Self, ScoreError> {
        if tenths > 100 {
            return Err(ScoreError::OutOfRange(f64::from(tenths) / 10.0));
        }
        Ok(Score { tenths })
    }

    pub fn value(self) -> f64 {
        f64::from(self.tenths) / 10.0
    }

    pub fn tenths(self) -> u8 {
        self.tenths
    }
}

impl fmt::Display for Score {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}.{}", self.tenths / 10, self.tenths % 10)
    }
}

/// Compute the v3.1 base score for a vector.
///
/// Deterministic and total: every vector maps to a score in
/// `[0.0, 10.0]`, and the result matches the value published by NVD for
/// the same vector. The final rounding is "smallest one-decimal value
/// greater than or equal to the raw score", computed over an integer
/// scaling so that values sitting exactly on a tenth are not bumped up
/// by floating-point representation error.
pub fn base_score(v: &CvssVector) -> Score {
    let iss = 1.0
        - (1.0 - v.confidentiality.weight())
            * (1.0 - v.integrity.weight())
            * (1.0 - v.availability.weight());

    let changed = v.scope.is_changed();
    let impact = if changed {
        7.52 * (iss - 0.029) - 3.25 * (iss - 0.02).powi(15)
    } else {
        6.42 * iss
    };
    if impact <= 0.0 {
        return Score::ZERO;
    }

    let exploitability = 8.22
        * v.attack_vector.weight()
        * v.attack_complexity.weight()
        * v.privileges_required.weight(changed)
        * v.user_interaction.weight();

    let raw = if changed {
        (1.08 * (impact + exploitability)).min(10.0)
    } else {
        (impact + exploitability).min(10.0)
    };
    Score {
        tenths: round_up_tenths(raw),
    }
}

// Round up to one decimal: scale to hundred-thousandths first so that a
// raw value lying exactly on a tenth (modulo representation error below
// 5e-6) maps to itself instead of the next tenth.
fn round_up_tenths(x: f64) -> u8 {
    let scaled = (x * 100_000.0).round() as i64;
    let whole = scaled / 10_000;
    if scaled % 10_000 == 0 {
        whole as u8
    } else {
        (whole + 1) as u8
    }
}

/// Enumerate all 3888 legal base vectors (4·2·3·2·2·3·3·3 combinations).
pub fn all_vectors() -> impl Iterator<Item = CvssVector> {
    const AV: [AttackVector; 4] = [
        AttackVector::Network,
        AttackVector::Adjacent,
        AttackVector::Local,
        AttackVector::Physical,
    ];
    const AC: [AttackComplexity; 2] = [AttackComplexity::Low, AttackComplexity::High];
    const PR: [PrivilegesRequired; 3] = [
        PrivilegesRequired::None,
        PrivilegesRequired::Low,
        PrivilegesRequired::High,
    ];
    const UI: [UserInteraction; 2] = [UserInteraction::None, UserInteraction::Required];
    const S: [Scope; 2] = [Scope::Unchanged, Scope::Changed];
    const IMPACT: [Impact; 3] = [Impact::None, Impact::Low, Impact::High];

    (0..3888usize).map(|index| {
        let mut i = index;
        let availability = IMPACT[i % 3];
        i /= 3;
        let integrity = IMPACT[i % 3];
        i /= 3;
        let confidentiality = IMPACT[i % 3];
        i /= 3;
        let scope = S[i % 2];
        i /= 2;
        let user_interaction = UI[i % 2];
        i /= 2;
        let privileges_required = PR[i % 3];
        i /= 3;
        let attack_complexity = AC[i % 2];
        i /= 2;
        let attack_vector = AV[i % 4];
        CvssVector {
            attack_vector,
            attack_complexity,
            privileges_required,
            user_interaction,
            scope,
            confidentiality,
            integrity,
            availability,
        }
    })
}
