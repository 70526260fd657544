//! Grover search.
//!
//! Two backends implement [`GroverBackend`]:
//!
//! * [`StatevectorBackend`] evolves all `2^n` amplitudes: Hadamard on every
//!   qubit, then `k` rounds of phase oracle and inversion about the mean.
//! * [`SubspaceBackend`] tracks only the aggregate marked and unmarked
//!   amplitudes. With `sin θ = √(M/2^n)` the marked mass after `k` rounds is
//!   `sin²((2k+1)θ)`, so it scales to any `n`.
//!
//! The iteration count is `⌊(π/4)·√(2^n/M)⌋`.

use std::f64::consts::FRAC_PI_4;
use std::io::Write;
use std::sync::atomic::{AtomicU64, Ordering};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qsim::{StateVector, DEFAULT_QUBIT_CAP};
use crate::rng::{RngStream, Seed};

/// Largest enumerable search space for predicate oracles.
pub const MAX_ENUMERABLE_BITS: u32 = 24;

/// Histories longer than this are truncated (subspace runs at large `n`).
pub const HISTORY_LIMIT: u64 = 1 << 20;

type Predicate = Box<dyn Fn(u64) -> bool + Send + Sync>;

/// Search predicate over `n_bits`-bit strings, with its solution count.
pub struct Oracle {
    n_bits: u32,
    predicate: Predicate,
    marked: Option<Vec<u64>>,
    marked_count: u64,
    queries: AtomicU64,
}

impl std::fmt::Debug for Oracle {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Oracle")
            .field("n_bits", &self.n_bits)
            .field("marked_count", &self.marked_count)
            .field("queries", &self.queries())
            .finish()
    }
}

fn check_oracle_bits(n_bits: u32) -> Result<()> {
    if n_bits == 0 || n_bits > 63 {
        return Err(Error::arg(format!(
            "oracle width must be in 1..=63 bits, got {n_bits}"
        )));
    }
    Ok(())
}

impl Oracle {
    /// Counts solutions by enumerating all `2^n_bits` inputs.
    pub fn from_predicate<F>(n_bits: u32, predicate: F) -> Result<Self>
    where
        F: Fn(u64) -> bool + Send + Sync + 'static,
    {
        check_oracle_bits(n_bits)?;
        if n_bits > MAX_ENUMERABLE_BITS {
            return Err(Error::Resource {
                what: "oracle enumeration bits",
                requested: n_bits as usize,
                limit: MAX_ENUMERABLE_BITS as usize,
                hint: " (supply the marked set with Oracle::with_marked)",
            });
        }
        let marked: Vec<u64> = (0..1u64 << n_bits).filter(|&x| predicate(x)).collect();
        Ok(Oracle {
            n_bits,
            marked_count: marked.len() as u64,
            marked: Some(marked),
            predicate: Box::new(predicate),
            queries: AtomicU64::new(0),
        })
    }

    /// Oracle with a caller-supplied solution set, which must equal the
    /// predicate's preimage of `true`.
    pub fn with_marked<F>(n_bits: u32, predicate: F, mut marked: Vec<u64>) -> Result<Self>
    where
        F: Fn(u64) -> bool + Send + Sync + 'static,
    {
        check_oracle_bits(n_bits)?;
        marked.sort_unstable();
        marked.dedup();
        if let Some(&x) = marked.iter().find(|&&x| x >> n_bits != 0 || !predicate(x)) {
            return Err(Error::arg(format!("{x} is not a solution of the predicate")));
        }
        Ok(Oracle {
            n_bits,
            marked_count: marked.len() as u64,
            marked: Some(marked),
            predicate: Box::new(predicate),
            queries: AtomicU64::new(0),
        })
    }

    /// Oracle marking exactly `targets`.
    pub fn from_targets(n_bits: u32, targets: &[u64]) -> Result<Self> {
        check_oracle_bits(n_bits)?;
        if let Some(&t) = targets.iter().find(|&&t| t >> n_bits != 0) {
            return Err(Error::arg(format!("target {t} does not fit in {n_bits} bits")));
        }
        let set: std::collections::BTreeSet<u64> = targets.iter().copied().collect();
        let list: Vec<u64> = set.iter().copied().collect();
        Self::with_marked(n_bits, move |x| set.contains(&x), list)
    }

    pub fn n_bits(&self) -> u32 {
        self.n_bits
    }

    pub fn marked_count(&self) -> u64 {
        self.marked_count
    }

    pub fn marked(&self) -> Option<&[u64]> {
        self.marked.as_deref()
    }

    /// Classical evaluation; not counted as a query.
    pub fn is_marked(&self, x: u64) -> bool {
        (self.predicate)(x)
    }

    /// Oracle invocations so far.
    pub fn queries(&self) -> u64 {
        self.queries.load(Ordering::Relaxed)
    }

    fn record_queries(&self, k: u64) {
        self.queries.fetch_add(k, Ordering::Relaxed);
    }

    /// One phase-oracle query: flips the sign of every marked amplitude.
    pub fn apply_phase(&self, sv: &mut StateVector) {
        self.record_queries(1);
        sv.phase_flip(|x| (self.predicate)(x));
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GroverPlan {
    pub n_bits: u32,
    pub marked_count: u128,
    pub iterations: u64,
    pub predicted_success: f64,
}

/// `sin θ = √(M / 2^n)`
fn rotation_angle(n_bits: u32, marked_count: u128) -> Result<f64> {
    if n_bits == 0 || n_bits > 128 {
        return Err(Error::arg(format!("search width must be in 1..=128 bits, got {n_bits}")));
    }
    if marked_count == 0 {
        return Err(Error::arg("no marked element: nothing to find"));
    }
    if n_bits < 128 && marked_count > 1u128 << n_bits {
        return Err(Error::arg(format!(
            "{marked_count} marked elements exceed the 2^{n_bits} search space"
        )));
    }
    let ratio = marked_count as f64 * 2f64.powi(-(n_bits as i32));
    Ok(ratio.sqrt().min(1.0).asin())
}

/// Marked mass after `k` rounds: `sin²((2k+1)θ)`.
pub fn grover_subspace(n_bits: u32, marked_count: u128, k: u64) -> Result<f64> {
    let theta = rotation_angle(n_bits, marked_count)?;
    Ok(((2.0 * k as f64 + 1.0) * theta).sin().powi(2))
}

/// `k = ⌊(π/4)·√(2^n/M)⌋` and the success probability it reaches.
pub fn plan_iterations(n_bits: u32, marked_count: u128) -> Result<GroverPlan> {
    let theta = rotation_angle(n_bits, marked_count)?;
    let ratio = marked_count as f64 * 2f64.powi(-(n_bits as i32));
    let iterations = (FRAC_PI_4 / ratio.sqrt()).floor() as u64;
    Ok(GroverPlan {
        n_bits,
        marked_count,
        iterations,
        predicted_success: ((2.0 * iterations as f64 + 1.0) * theta).sin().powi(2),
    })
}

/// Aggregate amplitudes in the span of the uniform marked and uniform
/// unmarked states.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SubspaceAmplitudes {
    pub marked: f64,
    pub unmarked: f64,
}

/// Amplitude pairs after 0..=k rounds via the oracle/diffusion recurrence:
/// oracle `(m, u) → (−m, u)`, diffusion `v → 2(s·v)s − v` with
/// `s = (sin θ, cos θ)`.
pub fn subspace_trajectory(n_bits: u32, marked_count: u128, k: u64) -> Result<Vec<SubspaceAmplitudes>> {
    if k > HISTORY_LIMIT {
        return Err(Error::Resource {
            what: "trajectory length",
            requested: k as usize,
            limit: HISTORY_LIMIT as usize,
            hint: "",
        });
    }
    let theta = rotation_angle(n_bits, marked_count)?;
    let (s_m, s_u) = theta.sin_cos();
    let mut v = SubspaceAmplitudes {
        marked: s_m,
        unmarked: s_u,
    };
    let mut out = Vec::with_capacity(k as usize + 1);
    out.push(v);
    for _ in 0..k {
        let m = -v.marked;
        let dot = s_m * m + s_u * v.unmarked;
        v = SubspaceAmplitudes {
            marked: 2.0 * dot * s_m - m,
            unmarked: 2.0 * dot * s_u - v.unmarked,
        };
        out.push(v);
    }
    Ok(out)
}

/// Security level against Grover search: half the key length.
pub fn effective_security_bits(key_bits: u32) -> Result<u32> {
    if key_bits < 2 || !key_bits.is_multiple_of(2) {
        return Err(Error::arg(format!(
            "key length must be even and at least 2, got {key_bits}"
        )));
    }
    Ok(key_bits / 2)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroverRun {
    pub backend: String,
    pub n_bits: u32,
    pub iterations: u64,
    /// Measured value, as an `n_bits`-wide bitstring.
    pub measured: String,
    #[serde(skip)]
    pub measured_value: u64,
    /// Marked mass right before measurement.
    pub success_probability: f64,
    /// Marked mass after 0, 1, …, k rounds (at most [`HISTORY_LIMIT`] + 1 entries).
    pub history: Vec<f64>,
    pub oracle_queries: u64,
}

impl GroverRun {
    /// `iteration,marked_mass` rows.
    pub fn write_history_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "iteration,marked_mass")?;
        for (i, m) in self.history.iter().enumerate() {
            writeln!(out, "{i},{m:.12}")?;
        }
        Ok(())
    }
}

pub trait GroverBackend: Send + Sync {
    fn name(&self) -> &'static str;

    /// Runs `k` rounds against `oracle` and measures all qubits.
    fn run(&self, oracle: &Oracle, k: u64, rng: &mut RngStream) -> Result<GroverRun>;
}

#[derive(Debug, Clone, Copy)]
pub struct StatevectorBackend {
    qubit_cap: usize,
}

impl StatevectorBackend {
    pub fn new(qubit_cap: usize) -> Self {
        StatevectorBackend { qubit_cap }
    }

    /// State after initialization and `k` rounds, plus the marked-mass history.
    pub fn evolve(&self, oracle: &Oracle, k: u64) -> Result<(StateVector, Vec<f64>)> {
        let n = oracle.n_bits() as usize;
        if n > self.qubit_cap {
            return Err(Error::Resource {
                what: "statevector qubits",
                requested: n,
                limit: self.qubit_cap,
                hint: " (use the subspace backend)",
            });
        }
        let mut sv = StateVector::zero_capped(n, self.qubit_cap)?;
        sv.hadamard_all(0..n)?;
        let mass = |sv: &StateVector| marked_mass(oracle, sv);
        let keep = k.min(HISTORY_LIMIT) as usize;
        let mut history = Vec::with_capacity(keep + 1);
        history.push(mass(&sv));
        for i in 0..k {
            oracle.apply_phase(&mut sv);
            sv.invert_about_mean();
            if i < HISTORY_LIMIT {
                history.push(mass(&sv));
            }
        }
        Ok((sv, history))
    }
}

/// Total probability of the oracle's solutions in `sv`.
fn marked_mass(oracle: &Oracle, sv: &StateVector) -> f64 {
    match oracle.marked() {
        Some(m) => m.iter().map(|&x| sv.probability(x as usize)).sum(),
        None => (0..sv.dim())
            .filter(|&x| oracle.is_marked(x as u64))
            .map(|x| sv.probability(x))
            .sum(),
    }
}

impl Default for StatevectorBackend {
    fn default() -> Self {
        Self::new(DEFAULT_QUBIT_CAP)
    }
}

impl GroverBackend for StatevectorBackend {
    fn name(&self) -> &'static str {
        "statevector"
    }

    fn run(&self, oracle: &Oracle, k: u64, rng: &mut RngStream) -> Result<GroverRun> {
        let before = oracle.queries();
        let (mut sv, history) = self.evolve(oracle, k)?;
        let success = marked_mass(oracle, &sv);
        let out = sv.measure_all(rng)?;
        Ok(GroverRun {
            backend: self.name().into(),
            n_bits: oracle.n_bits(),
            iterations: k,
            measured: out.to_string(),
            measured_value: out.value,
            success_probability: success,
            history,
            oracle_queries: oracle.queries() - before,
        })
    }
}

/// Closed-form backend. Sampling picks a uniform marked element with the
/// marked mass, otherwise a uniform unmarked one.
#[derive(Debug, Clone, Copy, Default)]
pub struct SubspaceBackend;

/// Draw budget for rejection sampling of unmarked elements.
const REJECTION_DRAWS: u32 = 1 << 20;

impl GroverBackend for SubspaceBackend {
    fn name(&self) -> &'static str {
        "subspace"
    }

    fn run(&self, oracle: &Oracle, k: u64, rng: &mut RngStream) -> Result<GroverRun> {
        let n = oracle.n_bits();
        let m = oracle.marked_count() as u128;
        let success = grover_subspace(n, m, k)?;
        let history = (0..=k.min(HISTORY_LIMIT))
            .map(|i| grover_subspace(n, m, i))
            .collect::<Result<Vec<f64>>>()?;
        oracle.record_queries(k);

        let marked = oracle
            .marked()
            .ok_or_else(|| Error::arg("subspace sampling needs the oracle's marked set"))?;
        let value = if rng.uniform() < success {
            marked[rng.below(marked.len() as u64) as usize]
        } else {
            let mut draws = 0;
            loop {
                let x = rng.below(1u64 << n);
                if !oracle.is_marked(x) {
                    break x;
                }
                draws += 1;
                if draws == REJECTION_DRAWS {
                    return Err(Error::Consistency(
                        "could not draw an unmarked element".into(),
                    ));
                }
            }
        };
        Ok(GroverRun {
            backend: self.name().into(),
            n_bits: n,
            iterations: k,
            measured: format!("{value:0w$b}", w = n as usize),
            measured_value: value,
            success_probability: success,
            history,
            oracle_queries: k,
        })
    }
}

/// Full statevector Grover run with the default qubit cap.
pub fn grover_statevector(oracle: &Oracle, k: u64, seed: Seed) -> Result<GroverRun> {
    StatevectorBackend::default().run(oracle, k, &mut seed.stream())
}
