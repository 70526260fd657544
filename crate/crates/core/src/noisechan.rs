//! Collective-rotation noise channel, eavesdroppers, the closed-form bit error
//! rates and the eavesdropping decision rule.

use std::f64::consts::FRAC_PI_2;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::b92::{alice_prepare, transmit, Basis, DetectionOutcome, PolarizationState};
use crate::error::{Error, Result};
use crate::registry;
use crate::rng::{RngStream, Seed};

/// z-score of the detection margin.
pub const DETECTION_Z: f64 = 3.0;

/// Fixed polarization rotation applied to every photon in transit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelConfig {
    theta: f64,
    epsilon: f64,
}

impl ChannelConfig {
    /// `theta` in radians, `0 ≤ theta ≤ π/2`.
    pub fn new(theta: f64) -> Result<Self> {
        if !(0.0..=FRAC_PI_2).contains(&theta) {
            return Err(Error::arg(format!(
                "rotation angle must lie in [0, pi/2], got {theta}"
            )));
        }
        let s = theta.sin();
        Ok(ChannelConfig {
            theta,
            epsilon: s * s,
        })
    }

    /// Channel whose rotation gives `sin²θ = epsilon`.
    pub fn from_epsilon(epsilon: f64) -> Result<Self> {
        check_epsilon(epsilon)?;
        Ok(ChannelConfig {
            theta: epsilon.sqrt().asin(),
            epsilon,
        })
    }

    pub fn noiseless() -> Self {
        ChannelConfig {
            theta: 0.0,
            epsilon: 0.0,
        }
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    /// `sin²θ`.
    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    /// Error rate among conclusive sifted bits with no eavesdropper:
    /// `2ε / (2ε + 1)`.
    ///
    /// Per pulse, a wrong conclusive click has probability `ε/2` (→ rotated
    /// then seen as ↑ under +, or ↗ rotated then seen as ↘ under ×) and a
    /// correct one `1/4` regardless of θ.
    pub fn baseline_qber(&self) -> f64 {
        2.0 * self.epsilon / (2.0 * self.epsilon + 1.0)
    }
}

fn check_epsilon(epsilon: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&epsilon) {
        return Err(Error::arg(format!("epsilon must lie in [0, 1], got {epsilon}")));
    }
    Ok(())
}

/// Applies `[[cos θ, −sin θ], [sin θ, cos θ]]` in the {→, ↑} basis.
pub fn rotate_state(p: &PolarizationState, theta: f64) -> PolarizationState {
    let (s, c) = theta.sin_cos();
    PolarizationState {
        horizontal: p.horizontal * c - p.vertical * s,
        vertical: p.horizontal * s + p.vertical * c,
    }
}

/// An intercepting party between the channel and Bob.
pub trait Eavesdropper: Send + Sync {
    fn name(&self) -> &'static str;

    /// Measures `photon` in `basis` and returns what is forwarded to Bob.
    fn intercept_in(
        &self,
        photon: &PolarizationState,
        basis: Basis,
        rng: &mut RngStream,
    ) -> PolarizationState;

    /// Picks a uniform basis, then behaves as [`Eavesdropper::intercept_in`].
    fn intercept(&self, photon: &PolarizationState, rng: &mut RngStream) -> PolarizationState {
        let basis = Basis::random(rng);
        self.intercept_in(photon, basis, rng)
    }
}

/// Measures in a random basis and forwards the post-measurement state.
#[derive(Debug, Default, Clone, Copy)]
pub struct MeasuredResend;

impl Eavesdropper for MeasuredResend {
    fn name(&self) -> &'static str {
        "measured_resend"
    }

    fn intercept_in(
        &self,
        photon: &PolarizationState,
        basis: Basis,
        rng: &mut RngStream,
    ) -> PolarizationState {
        basis.measure(photon, rng).state()
    }
}

/// Measures in a random basis; on a conclusive ↑ forwards ↗, on ↘ forwards →,
/// otherwise forwards the post-measurement state.
#[derive(Debug, Default, Clone, Copy)]
pub struct ConclusiveFixed;

impl Eavesdropper for ConclusiveFixed {
    fn name(&self) -> &'static str {
        "conclusive_fixed"
    }

    fn intercept_in(
        &self,
        photon: &PolarizationState,
        basis: Basis,
        rng: &mut RngStream,
    ) -> PolarizationState {
        match basis.measure(photon, rng) {
            DetectionOutcome::Vertical => PolarizationState::diagonal(),
            DetectionOutcome::Antidiagonal => PolarizationState::horizontal(),
            other => other.state(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum EveStrategy {
    MeasuredResend,
    ConclusiveFixed,
}

impl EveStrategy {
    pub const ALL: [EveStrategy; 2] = [EveStrategy::MeasuredResend, EveStrategy::ConclusiveFixed];

    /// Registry name of the strategy.
    pub fn name(self) -> &'static str {
        match self {
            EveStrategy::MeasuredResend => "measured_resend",
            EveStrategy::ConclusiveFixed => "conclusive_fixed",
        }
    }

    pub fn eavesdropper(self) -> Box<dyn Eavesdropper> {
        registry::eavesdroppers()
            .create(self.name(), &registry::SimConfig::default())
            .expect("built-in eavesdropper registered")
    }
}

pub fn apply_eve(
    photon: &PolarizationState,
    strategy: EveStrategy,
    rng: &mut RngStream,
) -> PolarizationState {
    strategy.eavesdropper().intercept(photon, rng)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BerTriple {
    pub ber0: f64,
    pub ber1: f64,
    pub ber2: f64,
}

/// Closed forms: `ber0 = ε`, `ber1 = (7 + 8ε(1−ε)) / 16`, `ber2 = 1/4 + ε/2`.
pub fn analytic_ber(epsilon: f64) -> Result<BerTriple> {
    check_epsilon(epsilon)?;
    Ok(BerTriple {
        ber0: epsilon,
        ber1: (7.0 + 8.0 * epsilon * (1.0 - epsilon)) / 16.0,
        ber2: 0.25 + 0.5 * epsilon,
    })
}

/// Root of `ber1(ε) = ε` in [0, 1]: `(−8 + √288) / 16`.
pub fn ber1_crossover() -> f64 {
    (-8.0 + 288f64.sqrt()) / 16.0
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Regime {
    /// `ε ≤ 0.5`: ber1 ≥ ber2 ≥ ber0, any interception raises the error rate.
    SecureDetectable,
    /// `0.5 < ε ≤ ε*`: ber1 ≥ ber0 ≥ ber2, only measured-resend shows.
    PartiallyDetectable,
    /// `ε > ε*`: the channel should not be used.
    Avoid,
}

pub fn classify_regime(epsilon: f64) -> Regime {
    if epsilon <= 0.5 {
        Regime::SecureDetectable
    } else if epsilon <= ber1_crossover() {
        Regime::PartiallyDetectable
    } else {
        Regime::Avoid
    }
}

/// Error rate among conclusive sifted bits, with its binomial standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QberEstimate {
    pub qber: f64,
    pub std_error: f64,
    pub conclusive: u64,
    pub errors: u64,
    pub pulses: u64,
}

impl QberEstimate {
    /// `(self − other) / √(se₁² + se₂²)`.
    pub fn z_above(&self, other: &QberEstimate) -> f64 {
        let se = (self.std_error.powi(2) + other.std_error.powi(2)).sqrt();
        (self.qber - other.qber) / se
    }
}

/// Monte Carlo error rate of the B92 pipeline (rotation, then `eve`, then Bob).
/// Every conclusive bit is compared; nothing is disclosed or kept.
pub fn simulate_eve_qber(
    theta: f64,
    eve: Option<&dyn Eavesdropper>,
    n_pulses: u64,
    seed: Seed,
) -> Result<QberEstimate> {
    if n_pulses == 0 {
        return Err(Error::arg("need at least one pulse"));
    }
    let channel = ChannelConfig::new(theta)?;
    let mut rng = seed.stream();
    let mut eve_rng = rng.fork();
    let (mut conclusive, mut errors) = (0u64, 0u64);
    for _ in 0..n_pulses {
        let bit = rng.bit();
        let photon = alice_prepare(bit)?;
        if let Some(b) = transmit(photon, &channel, eve, &mut rng, &mut eve_rng) {
            conclusive += 1;
            errors += u64::from(b != bit);
        }
    }
    if conclusive == 0 {
        return Err(Error::UndefinedQber { pulses: n_pulses });
    }
    let q = errors as f64 / conclusive as f64;
    Ok(QberEstimate {
        qber: q,
        std_error: (q * (1.0 - q) / conclusive as f64).sqrt(),
        conclusive,
        errors,
        pulses: n_pulses,
    })
}

/// True iff `observed_qber > ε + z·√(ε(1−ε)/n)` with z = 3, where ε is the
/// largest error rate the channel produces without an eavesdropper.
pub fn detect_eavesdropping(observed_qber: f64, epsilon: f64, sample_size: u64) -> Result<bool> {
    if sample_size == 0 {
        return Err(Error::arg("sample size must be at least 1"));
    }
    check_epsilon(epsilon)?;
    let margin = DETECTION_Z * (epsilon * (1.0 - epsilon) / sample_size as f64).sqrt();
    Ok(observed_qber > epsilon + margin)
}

/// Evenly spaced grid of `steps` points over `[eps_min, eps_max]` with the
/// closed-form rates at each point.
pub fn noise_sweep(eps_min: f64, eps_max: f64, steps: usize) -> Result<Vec<(f64, BerTriple)>> {
    if !(0.0 <= eps_min && eps_min < eps_max && eps_max <= 1.0) {
        return Err(Error::arg(format!(
            "sweep range must satisfy 0 <= min < max <= 1, got [{eps_min}, {eps_max}]"
        )));
    }
    if steps < 2 {
        return Err(Error::arg(format!("sweep needs at least 2 steps, got {steps}")));
    }
    let span = eps_max - eps_min;
    (0..steps)
        .map(|i| {
            let eps = if i + 1 == steps {
                eps_max
            } else {
                eps_min + span * i as f64 / (steps - 1) as f64
            };
            analytic_ber(eps).map(|b| (eps, b))
        })
        .collect()
}

/// Writes `epsilon,ber0,ber1,ber2` with six decimals per value.
pub fn write_sweep_csv<W: Write>(mut out: W, rows: &[(f64, BerTriple)]) -> std::io::Result<()> {
    writeln!(out, "epsilon,ber0,ber1,ber2")?;
    for (eps, b) in rows {
        writeln!(out, "{eps:.6},{:.6},{:.6},{:.6}", b.ber0, b.ber1, b.ber2)?;
    }
    Ok(())
}
