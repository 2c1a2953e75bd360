//! Seeded randomized experiments over synthetic score datasets.
//!
//! A run draws a dataset of one-decimal scores from a chosen shape,
//! assigns every score random correction factors (maximum depth in
//! `[2, 20]`, per-score depth in `[1, L]`, binary functionality and
//! context draws, exploit multiplier from {0, 1.25, 1.5, 1.75, 2}),
//! and reports five summary columns: both means of the raw scores, the
//! uncorrected saturating sum, and the corrected final score under each
//! mean. The seed fully determines the output.

use std::fmt::Write as _;

use serde::Serialize;

use crate::aggregate::{bayesian_sum, gamma_from_sum};
use crate::cvss::Score;
use crate::factors::{
    average_factor, corrected_score, deepness_factor, CorrectionFactors, MeanKind,
};

/// SplitMix64 generator (Steele, Lea, Flood). Tiny, seedable, and the
/// integer stream is identical on every platform.
#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        SplitMix64 { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    /// Uniform float in `[0, 1)` from the top 53 bits.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform integer in `[0, bound)` by multiply-shift.
    pub fn next_below(&mut self, bound: u64) -> u64 {
        debug_assert!(bound > 0);
        ((u128::from(self.next_u64()) * u128::from(bound)) >> 64) as u64
    }

    pub fn next_bool(&mut self) -> bool {
        self.next_u64() & 1 == 1
    }
}

/// Shape of the synthetic score distribution.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Shape {
    /// Bell around 5 (mean of three uniform draws).
    Centered,
    /// Mass toward the top of the scale (max of three uniform draws).
    HighHeavy,
    /// Mass toward the bottom (min of three uniform draws).
    LowHeavy,
    /// Two lobes around 1.5 and 8.5, little mass near 5.
    Bimodal,
    /// Flat over the whole scale.
    Uniform,
}

impl Shape {
    pub const ALL: [Shape; 5] = [
        Shape::Centered,
        Shape::HighHeavy,
        Shape::LowHeavy,
        Shape::Bimodal,
        Shape::Uniform,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Shape::Centered => "centered",
            Shape::HighHeavy => "high_heavy",
            Shape::LowHeavy => "low_heavy",
            Shape::Bimodal => "bimodal",
            Shape::Uniform => "uniform",
        }
    }
}

impl std::str::FromStr for Shape {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "centered" => Ok(Shape::Centered),
            "high_heavy" => Ok(Shape::HighHeavy),
            "low_heavy" => Ok(Shape::LowHeavy),
            "bimodal" => Ok(Shape::Bimodal),
            "uniform" => Ok(Shape::Uniform),
            _ => Err(format!("unknown distribution shape `{s}`")),
        }
    }
}

/// Parameters of one experiment. Identical configs produce identical
/// results, byte for byte.
#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub dataset_size: usize,
    pub shape: Shape,
    pub seed: u64,
    pub sigma_kind: MeanKind,
}

impl SimConfig {
    pub fn new(shape: Shape, seed: u64) -> Self {
        SimConfig {
            dataset_size: 64,
            shape,
            seed,
            sigma_kind: MeanKind::Arithmetic,
        }
    }
}

/// Summary row of one experiment. All values lie in `[0, 10]`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimResult {
    pub distribution: String,
    pub mean_arith: f64,
    pub mean_harm: f64,
    /// Saturating sum of the raw scores, no correction applied.
    pub magerit: f64,
    /// Corrected final score damped by the arithmetic mean.
    pub bayes_arith: f64,
    /// Corrected final score damped by the harmonic mean.
    pub bayes_harm: f64,
}

// Exploit multipliers drawn in simulations; the explicit "no exploit"
// zero stands in for the not-defined half-weight here.
const SIM_EXPLOIT_LEVELS: [f64; 5] = [0.0, 1.25, 1.5, 1.75, 2.0];

/// Draw a dataset of scores with their correction factors.
///
/// Draw order (fixed, part of the determinism contract): all scores
/// first, then the maximum depth, then per score its depth, the
/// functionality bit, the context bit, and the exploit level.
pub fn generate_dataset(cfg: &SimConfig) -> Vec<(Score, CorrectionFactors)> {
    let mut rng = SplitMix64::new(cfg.seed);
    let scores: Vec<Score> = (0..cfg.dataset_size)
        .map(|_| sample_score(cfg.shape, &mut rng))
        .collect();

    let max_depth = 2 + rng.next_below(19) as u32; // [2, 20]
    scores
        .into_iter()
        .map(|score| {
            let depth = 1 + rng.next_below(u64::from(max_depth)) as u32;
            let beta = deepness_factor(depth, max_depth).expect("depth drawn within range");
            let rho = u8::from(rng.next_bool());
            let gamma = u8::from(rng.next_bool());
            let mu = SIM_EXPLOIT_LEVELS[rng.next_below(5) as usize];
            (score, CorrectionFactors::new(rho, beta, gamma, mu))
        })
        .collect()
}

// Scores are quantized to one decimal and kept in [0.1, 10.0]; a zero
// would make the harmonic mean undefined.
fn sample_score(shape: Shape, rng: &mut SplitMix64) -> Score {
    let x = match shape {
        Shape::Centered => 10.0 * (rng.next_f64() + rng.next_f64() + rng.next_f64()) / 3.0,
        Shape::HighHeavy => 10.0 * rng.next_f64().max(rng.next_f64()).max(rng.next_f64()),
        Shape::LowHeavy => 10.0 * rng.next_f64().min(rng.next_f64()).min(rng.next_f64()),
        Shape::Bimodal => {
            let center = if rng.next_bool() { 8.5 } else { 1.5 };
            center + 3.0 * (rng.next_f64() - 0.5)
        }
        Shape::Uniform => 10.0 * rng.next_f64(),
    };
    let tenths = ((x * 10.0).round() as i64).clamp(1, 100) as u8;
    Score::from_tenths(tenths).expect("clamped to the valid range")
}

/// Run one experiment end to end.
pub fn run_experiment(cfg: &SimConfig) -> SimResult {
    summarize(&generate_dataset(cfg), cfg.shape)
}

fn summarize(dataset: &[(Score, CorrectionFactors)], shape: Shape) -> SimResult {
    let scores: Vec<Score> = dataset.iter().map(|(s, _)| *s).collect();
    let mean_arith = average_factor(&scores, MeanKind::Arithmetic)
        .expect("dataset is nonempty")
        .sigma();
    let mean_harm = average_factor(&scores, MeanKind::Harmonic)
        .expect("sampled scores are positive")
        .sigma();

    let raw_values: Vec<f64> = scores.iter().map(|s| s.value()).collect();
    let magerit = bayesian_sum(&raw_values);

    let corrected: Vec<f64> = dataset
        .iter()
        .map(|(score, factors)| corrected_score(*score, factors.lambda()).corrected())
        .collect();
    let degenerate = corrected.iter().all(|&c| c == 0.0);
    let f = bayesian_sum(&corrected);
    let gamma = |sigma: f64| {
        if degenerate {
            0.0
        } else {
            gamma_from_sum(f, sigma).clamp(0.0, 10.0)
        }
    };

    SimResult {
        distribution: shape.name().to_string(),
        mean_arith,
        mean_harm,
        magerit,
        bayes_arith: gamma(mean_arith),
        bayes_harm: gamma(mean_harm),
    }
}

/// CSV with the fixed header
/// `distribution,mean_arith,mean_harm,magerit,bayes_arith,bayes_harm`.
pub fn render_csv(rows: &[SimResult]) -> String {
    let mut out =
        String::from("distribution,mean_arith,mean_harm,magerit,bayes_arith,bayes_harm\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{},{:.4},{:.4},{:.4},{:.4},{:.4}",
            r.distribution, r.mean_arith, r.mean_harm, r.magerit, r.bayes_arith, r.bayes_harm
        );
    }
    out
}

pub fn render_json(rows: &[SimResult]) -> String {
    let mut out = serde_json::to_string_pretty(rows).expect("rows serialize");
    out.push('\n');
    out
}
