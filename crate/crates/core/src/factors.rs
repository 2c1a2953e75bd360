//! Per-vulnerability correction factors and the dataset average.
//!
//! Four factors rescale each raw CVSS score before aggregation:
//!
//! - functionality `rho`: 1 if the vulnerability disrupts any system
//!   functionality, 0 otherwise (an analyst-supplied ingest field)
//! - deepness `beta`: `(L - depth + 1) / L` under linear interpolation,
//!   where `L` is the graph's maximum depth — full weight at the entry
//!   layer, `1/L` at the deepest
//! - context `gamma`: 1 if the vulnerability's attack vector is
//!   reachable in the deployment, 0 otherwise
//! - exploit `mu`: a multiplier for public-exploit maturity, from 0.0
//!   (no exploit) up to 2.0 (automated)
//!
//! Their product `lambda` multiplies the raw score; products above 10
//! clamp to 10. The average factor `sigma` is the arithmetic or harmonic
//! mean of all raw scores and damps the final aggregation.

use thiserror::Error;

use crate::cvss::{AttackVector, Score};
use crate::edg::{ExploitMaturity, Vulnerability};
use std::collections::BTreeSet;

/// Attack vectors an attacker can actually use against the deployment.
/// May be empty for a fully isolated system.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct DeploymentContext {
    reachable: BTreeSet<AttackVector>,
}

impl DeploymentContext {
    pub fn new(reachable: impl IntoIterator<Item = AttackVector>) -> Self {
        DeploymentContext {
            reachable: reachable.into_iter().collect(),
        }
    }

    pub fn empty() -> Self {
        Self::default()
    }

    pub fn reachable(&self, av: AttackVector) -> bool {
        self.reachable.contains(&av)
    }

    pub fn reachable_vectors(&self) -> impl Iterator<Item = AttackVector> + '_ {
        self.reachable.iter().copied()
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FactorError {
    #[error("DepthOutOfRange: depth {depth} is outside [1, {max_depth}]")]
    DepthOutOfRange { depth: u32, max_depth: u32 },
    #[error("EmptyDataset: the average factor needs at least one score")]
    EmptyDataset,
    #[error("HarmonicUndefined: the harmonic mean is undefined for zero scores")]
    HarmonicZeroScore,
}

/// 1 if the vulnerability disrupts any functionality, else 0.
pub fn functionality_factor(v: &Vulnerability) -> u8 {
    u8::from(v.affects_functionality)
}

/// Linear-interpolation weight of a layer: `(L - depth + 1) / L`.
///
/// The entry layer (depth 1) weighs 1.0, the deepest layer `1/L`; for a
/// four-layer graph the grid is 1.0, 0.75, 0.5, 0.25.
pub fn deepness_factor(depth: u32, max_depth: u32) -> Result<f64, FactorError> {
    if depth == 0 || max_depth == 0 || depth > max_depth {
        return Err(FactorError::DepthOutOfRange { depth, max_depth });
    }
    Ok(f64::from(max_depth - depth + 1) / f64::from(max_depth))
}

/// 1 if the attack vector is reachable in the deployment, else 0.
pub fn context_factor(av: AttackVector, ctx: &DeploymentContext) -> u8 {
    u8::from(ctx.reachable(av))
}

/// Multiplier for the public-exploit development state.
pub fn exploit_factor(m: ExploitMaturity) -> f64 {
    match m {
        ExploitMaturity::NoExploit => 0.0,
        ExploitMaturity::NotDefined => 0.5,
        ExploitMaturity::Theoretical => 1.25,
        ExploitMaturity::ProofOfConcept => 1.5,
        ExploitMaturity::Functional => 1.75,
        ExploitMaturity::Automated => 2.0,
    }
}

/// The summarized factor: the exact product `rho * beta * gamma * mu`.
pub fn summarized_factor(rho: u8, beta: f64, gamma: u8, mu: f64) -> f64 {
    f64::from(rho) * beta * f64::from(gamma) * mu
}

/// The four correction factors of one vulnerability plus their product.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorrectionFactors {
    rho: u8,
    beta: f64,
    gamma: u8,
    mu: f64,
    lambda: f64,
}

impl CorrectionFactors {
    /// Assemble factors; `lambda` is always the product of the four.
    pub fn new(rho: u8, beta: f64, gamma: u8, mu: f64) -> Self {
        debug_assert!(rho <= 1 && gamma <= 1);
        debug_assert!(beta > 0.0 && beta <= 1.0);
        debug_assert!((0.0..=2.0).contains(&mu));
        CorrectionFactors {
            rho,
            beta,
            gamma,
            mu,
            lambda: summarized_factor(rho, beta, gamma, mu),
        }
    }

    /// Compute all four factors for a vulnerability sitting at `depth`
    /// in a graph of maximum depth `max_depth`.
    pub fn evaluate(
        vuln: &Vulnerability,
        depth: u32,
        max_depth: u32,
        ctx: &DeploymentContext,
    ) -> Result<Self, FactorError> {
        let rho = functionality_factor(vuln);
        let beta = deepness_factor(depth, max_depth)?;
        let gamma = context_factor(vuln.vector.attack_vector, ctx);
        let mu = exploit_factor(vuln.exploit_maturity);
        Ok(CorrectionFactors::new(rho, beta, gamma, mu))
    }

    pub fn rho(&self) -> u8 {
        self.rho
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn gamma(&self) -> u8 {
        self.gamma
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }
}

/// A raw score rescaled by its summarized factor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorrectedScore {
    raw: Score,
    lambda: f64,
    corrected: f64,
    clamped: bool,
}

/// Rescale a raw score: `corrected = min(lambda * raw, 10)`.
///
/// The product is taken over the score's integer tenths before the
/// final division so that exactly representable results (for example
/// 0.625 * 9.8 = 6.125) come out bit-exact.
pub fn corrected_score(raw: Score, lambda: f64) -> CorrectedScore {
    let product = lambda * f64::from(raw.tenths()) / 10.0;
    let clamped = product > 10.0;
    CorrectedScore {
        raw,
        lambda,
        corrected: if clamped { 10.0 } else { product },
        clamped,
    }
}

impl CorrectedScore {
    pub fn raw(&self) -> Score {
        self.raw
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn corrected(&self) -> f64 {
        self.corrected
    }

    pub fn clamped(&self) -> bool {
        self.clamped
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MeanKind {
    Arithmetic,
    Harmonic,
}

impl MeanKind {
    pub fn as_str(self) -> &'static str {
        match self {
            MeanKind::Arithmetic => "arithmetic",
            MeanKind::Harmonic => "harmonic",
        }
    }
}

/// The dataset-level average of all initial (uncorrected) scores.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AverageFactor {
    kind: MeanKind,
    sigma: f64,
}

impl AverageFactor {
    pub fn kind(&self) -> MeanKind {
        self.kind
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }
}

/// Mean of the raw scores. Every initial score participates, including
/// those later zeroed by their factors. The harmonic mean is undefined
/// when a zero score is present.
pub fn average_factor(scores: &[Score], kind: MeanKind) -> Result<AverageFactor, FactorError> {
    if scores.is_empty() {
        return Err(FactorError::EmptyDataset);
    }
    let n = scores.len() as f64;
    let sigma = match kind {
        MeanKind::Arithmetic => {
            let total: u32 = scores.iter().map(|s| u32::from(s.tenths())).sum();
            f64::from(total) / n / 10.0
        }
        MeanKind::Harmonic => {
            if scores.iter().any(|s| s.tenths() == 0) {
                return Err(FactorError::HarmonicZeroScore);
            }
            let reciprocal_sum: f64 = scores.iter().map(|s| 1.0 / s.value()).sum();
            n / reciprocal_sum
        }
    };
    Ok(AverageFactor { kind, sigma })
}
