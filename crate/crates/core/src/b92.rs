//! B92 key distribution: two non-orthogonal preparations, two detector bases,
//! and sifting on the two conclusive outcomes.
//!
//! | sent | basis | detected | bit |
//! |------|-------|----------|-----|
//! | →    | +     | →        | –   |
//! | →    | ×     | ↗ / ↘    | – / 0 |
//! | ↗    | +     | ↑ / →    | 1 / – |
//! | ↗    | ×     | ↗        | –   |

use std::f64::consts::FRAC_1_SQRT_2;
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::noisechan::{detect_eavesdropping, rotate_state, ChannelConfig, Eavesdropper};
use crate::rng::{RngStream, Seed};

/// Default share of sifted bits sacrificed for error estimation.
pub const DEFAULT_DISCLOSE_FRACTION: f64 = 0.2;

/// Single-photon polarization in the {→, ↑} basis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolarizationState {
    pub horizontal: Complex64,
    pub vertical: Complex64,
}

impl PolarizationState {
    /// Builds a state from amplitudes; rejects vectors whose norm is not 1.
    pub fn new(horizontal: Complex64, vertical: Complex64) -> Result<Self> {
        let s = PolarizationState {
            horizontal,
            vertical,
        };
        if (s.norm_sqr() - 1.0).abs() > 1e-9 {
            return Err(Error::arg(format!(
                "polarization state has squared norm {}",
                s.norm_sqr()
            )));
        }
        Ok(s)
    }

    /// Linear polarization at `angle` radians from horizontal.
    pub fn linear(angle: f64) -> Self {
        let (s, c) = angle.sin_cos();
        PolarizationState {
            horizontal: Complex64::new(c, 0.0),
            vertical: Complex64::new(s, 0.0),
        }
    }

    /// →
    pub fn horizontal() -> Self {
        Self::real(1.0, 0.0)
    }

    /// ↑
    pub fn vertical() -> Self {
        Self::real(0.0, 1.0)
    }

    /// ↗
    pub fn diagonal() -> Self {
        Self::real(FRAC_1_SQRT_2, FRAC_1_SQRT_2)
    }

    /// ↘
    pub fn antidiagonal() -> Self {
        Self::real(FRAC_1_SQRT_2, -FRAC_1_SQRT_2)
    }

    fn real(h: f64, v: f64) -> Self {
        PolarizationState {
            horizontal: Complex64::new(h, 0.0),
            vertical: Complex64::new(v, 0.0),
        }
    }

    pub fn norm_sqr(&self) -> f64 {
        self.horizontal.norm_sqr() + self.vertical.norm_sqr()
    }

    /// `⟨self|other⟩`
    pub fn inner(&self, other: &PolarizationState) -> Complex64 {
        self.horizontal.conj() * other.horizontal + self.vertical.conj() * other.vertical
    }

    /// `|⟨self|other⟩|²`
    pub fn overlap(&self, other: &PolarizationState) -> f64 {
        self.inner(other).norm_sqr()
    }

    /// Equality up to global phase.
    pub fn approx_eq(&self, other: &PolarizationState, tol: f64) -> bool {
        (self.inner(other).norm() - 1.0).abs() <= tol
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Basis {
    /// Rectilinear: projects onto {→, ↑}.
    Plus,
    /// Diagonal: projects onto {↗, ↘}.
    Cross,
}

impl Basis {
    pub fn outcomes(self) -> [DetectionOutcome; 2] {
        match self {
            Basis::Plus => [DetectionOutcome::Horizontal, DetectionOutcome::Vertical],
            Basis::Cross => [DetectionOutcome::Diagonal, DetectionOutcome::Antidiagonal],
        }
    }

    pub fn random(rng: &mut RngStream) -> Self {
        if rng.coin() {
            Basis::Cross
        } else {
            Basis::Plus
        }
    }

    /// Projective Born-rule measurement of `photon` in this basis.
    pub fn measure(self, photon: &PolarizationState, rng: &mut RngStream) -> DetectionOutcome {
        let [first, second] = self.outcomes();
        let p_first = first.state().overlap(photon);
        if rng.uniform() < p_first {
            first
        } else {
            second
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum DetectionOutcome {
    /// →
    Horizontal,
    /// ↑
    Vertical,
    /// ↗
    Diagonal,
    /// ↘
    Antidiagonal,
}

impl DetectionOutcome {
    pub fn state(self) -> PolarizationState {
        match self {
            DetectionOutcome::Horizontal => PolarizationState::horizontal(),
            DetectionOutcome::Vertical => PolarizationState::vertical(),
            DetectionOutcome::Diagonal => PolarizationState::diagonal(),
            DetectionOutcome::Antidiagonal => PolarizationState::antidiagonal(),
        }
    }

    pub fn basis(self) -> Basis {
        match self {
            DetectionOutcome::Horizontal | DetectionOutcome::Vertical => Basis::Plus,
            DetectionOutcome::Diagonal | DetectionOutcome::Antidiagonal => Basis::Cross,
        }
    }

    pub fn symbol(self) -> char {
        match self {
            DetectionOutcome::Horizontal => '→',
            DetectionOutcome::Vertical => '↑',
            DetectionOutcome::Diagonal => '↗',
            DetectionOutcome::Antidiagonal => '↘',
        }
    }
}

impl fmt::Display for DetectionOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.symbol())
    }
}

/// Alice's encoding: 0 → →, 1 → ↗.
pub fn alice_prepare(bit: u8) -> Result<PolarizationState> {
    match bit {
        0 => Ok(PolarizationState::horizontal()),
        1 => Ok(PolarizationState::diagonal()),
        _ => Err(Error::arg(format!("bit must be 0 or 1, got {bit}"))),
    }
}

pub fn bob_measure(photon: &PolarizationState, basis: Basis, rng: &mut RngStream) -> DetectionOutcome {
    basis.measure(photon, rng)
}

/// ↑ → 1, ↘ → 0, anything else is inconclusive (`None`).
pub fn sift_outcome(outcome: DetectionOutcome) -> Option<u8> {
    match outcome {
        DetectionOutcome::Vertical => Some(1),
        DetectionOutcome::Antidiagonal => Some(0),
        DetectionOutcome::Horizontal | DetectionOutcome::Diagonal => None,
    }
}

/// A key rendered as a string of `0`/`1` characters in JSON.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct BitString(pub Vec<u8>);

impl BitString {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn bits(&self) -> &[u8] {
        &self.0
    }
}

impl fmt::Display for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in &self.0 {
            write!(f, "{b}")?;
        }
        Ok(())
    }
}

impl Serialize for BitString {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for BitString {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.chars()
            .map(|c| match c {
                '0' => Ok(0),
                '1' => Ok(1),
                other => Err(serde::de::Error::custom(format!("bad bit {other:?}"))),
            })
            .collect::<std::result::Result<Vec<u8>, _>>()
            .map(BitString)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionResult {
    pub pulses_sent: u64,
    pub conclusive_count: u64,
    pub sifting_rate: f64,
    pub alice_key: BitString,
    pub bob_key: BitString,
    pub qber_estimate: f64,
    pub disclosed_count: u64,
    pub eve_detected: bool,
}

/// One photon through the channel, the optional eavesdropper and Bob's
/// randomly chosen basis. Returns Bob's sifted bit, if conclusive.
pub(crate) fn transmit(
    photon: PolarizationState,
    channel: &ChannelConfig,
    eve: Option<&dyn Eavesdropper>,
    bob_rng: &mut RngStream,
    eve_rng: &mut RngStream,
) -> Option<u8> {
    let mut photon = rotate_state(&photon, channel.theta());
    if let Some(eve) = eve {
        photon = eve.intercept(&photon, eve_rng);
    }
    let basis = Basis::random(bob_rng);
    sift_outcome(basis.measure(&photon, bob_rng))
}

pub(crate) fn check_session_args(count: u64, disclose_fraction: f64) -> Result<()> {
    if count == 0 {
        return Err(Error::arg("need at least one pulse"));
    }
    if !(0.0..1.0).contains(&disclose_fraction) {
        return Err(Error::arg(format!(
            "disclose fraction must lie in [0, 1), got {disclose_fraction}"
        )));
    }
    Ok(())
}

/// Outcome of the public comparison on a random subset of sifted positions.
pub(crate) struct Disclosure {
    /// Positions (into the sifted sequence) kept for the key.
    pub kept: Vec<usize>,
    pub disclosed: usize,
    pub errors: usize,
}

impl Disclosure {
    pub fn qber(&self) -> f64 {
        if self.disclosed == 0 {
            0.0
        } else {
            self.errors as f64 / self.disclosed as f64
        }
    }

    pub fn eve_detected(&self, channel: &ChannelConfig) -> bool {
        self.disclosed > 0
            && detect_eavesdropping(self.qber(), channel.baseline_qber(), self.disclosed as u64)
                .unwrap_or(false)
    }
}

/// Discloses `floor(fraction · len)` uniformly chosen sifted positions and
/// counts mismatches among them.
pub(crate) fn disclose(mismatch: &[bool], fraction: f64, rng: &mut RngStream) -> Disclosure {
    let n = mismatch.len();
    let k = (fraction * n as f64).floor() as usize;
    let picked = rng.sample_indices(n, k);
    let errors = picked.iter().filter(|&&i| mismatch[i]).count();
    let mut is_picked = vec![false; n];
    for &i in &picked {
        is_picked[i] = true;
    }
    Disclosure {
        kept: (0..n).filter(|&i| !is_picked[i]).collect(),
        disclosed: k,
        errors,
    }
}

/// Runs `n_pulses` B92 rounds and sifts, discloses and compares.
///
/// Streams: Alice and Bob draw from `seed`'s stream; the eavesdropper and the
/// disclosure sample each use a stream forked from it before the first pulse.
pub fn run_b92_session(
    n_pulses: u64,
    channel: &ChannelConfig,
    eve: Option<&dyn Eavesdropper>,
    disclose_fraction: f64,
    seed: Seed,
) -> Result<SessionResult> {
    check_session_args(n_pulses, disclose_fraction)?;
    let mut rng = seed.stream();
    let mut eve_rng = rng.fork();
    let mut disclose_rng = rng.fork();

    let mut alice = Vec::new();
    let mut bob = Vec::new();
    for _ in 0..n_pulses {
        let bit = rng.bit();
        let photon = alice_prepare(bit)?;
        if let Some(b) = transmit(photon, channel, eve, &mut rng, &mut eve_rng) {
            alice.push(bit);
            bob.push(b);
        }
    }

    let mismatch: Vec<bool> = alice.iter().zip(&bob).map(|(a, b)| a != b).collect();
    let d = disclose(&mismatch, disclose_fraction, &mut disclose_rng);
    let conclusive = alice.len() as u64;
    Ok(SessionResult {
        pulses_sent: n_pulses,
        conclusive_count: conclusive,
        sifting_rate: conclusive as f64 / n_pulses as f64,
        alice_key: BitString(d.kept.iter().map(|&i| alice[i]).collect()),
        bob_key: BitString(d.kept.iter().map(|&i| bob[i]).collect()),
        qber_estimate: d.qber(),
        disclosed_count: d.disclosed as u64,
        eve_detected: d.eve_detected(channel),
    })
}
