//! Shor factoring.
//!
//! The classical driver picks a base `a`, takes the gcd shortcut when `a`
//! shares a factor with `n`, and otherwise asks a [`PeriodFinder`] for the
//! order `r` of `a` modulo `n`. An even `r` with `a^(r/2) ≢ −1` yields the
//! factors `gcd(a^(r/2) ± 1, n)`.
//!
//! [`QuantumPeriodFinder`] simulates the two-register circuit: R1 holds
//! `t = 2⌈log₂ n⌉` qubits in uniform superposition, R2 (`⌈log₂ n⌉` qubits)
//! receives `a^x mod n`, R1 is Fourier transformed and measured, and the
//! period is read off the continued-fraction convergents of `m / 2^t`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qsim::{StateVector, DEFAULT_QUBIT_CAP};
use crate::rng::{RngStream, Seed};

/// Circuit runs per attempt for the quantum period finder.
pub const DEFAULT_PERIOD_SAMPLES: u32 = 2;

pub fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

fn mul_mod(a: u64, b: u64, n: u64) -> u64 {
    (u128::from(a) * u128::from(b) % u128::from(n)) as u64
}

pub fn pow_mod(base: u64, mut exp: u64, n: u64) -> u64 {
    if n == 1 {
        return 0;
    }
    let mut acc = 1;
    let mut b = base % n;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, b, n);
        }
        b = mul_mod(b, b, n);
        exp >>= 1;
    }
    acc
}

/// Deterministic Miller–Rabin for 64-bit integers.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    const WITNESSES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    for p in WITNESSES {
        if n.is_multiple_of(p) {
            return n == p;
        }
    }
    let s = (n - 1).trailing_zeros();
    let d = (n - 1) >> s;
    'witness: for a in WITNESSES {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

fn check_base(a: u64, n: u64) -> Result<()> {
    if n < 3 {
        return Err(Error::Precondition(format!("modulus must be at least 3, got {n}")));
    }
    if a == 0 || gcd(a, n) != 1 {
        return Err(Error::Precondition(format!(
            "base {a} is not coprime to {n}; take the gcd shortcut"
        )));
    }
    Ok(())
}

/// Smallest `r ≥ 1` with `a^r ≡ 1 (mod n)`, by repeated multiplication.
pub fn classical_order(a: u64, n: u64) -> Result<u64> {
    check_base(a, n)?;
    let a = a % n;
    let mut x = a;
    let mut r = 1;
    while x != 1 {
        x = mul_mod(x, a, n);
        r += 1;
    }
    Ok(r)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Rejection {
    OddPeriod,
    /// `a^(r/2) ≡ −1 (mod n)`.
    TrivialRoot,
    /// The gcds came out as 1 or `n`.
    Degenerate,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CandidateCheck {
    Factors(u64, u64),
    Rejected(Rejection),
}

/// Steps 3–4 of the classical reduction for a verified period `r`.
pub fn check_candidate(a: u64, n: u64, r: u64) -> Result<CandidateCheck> {
    if n < 3 {
        return Err(Error::Precondition(format!("modulus must be at least 3, got {n}")));
    }
    if r == 0 || pow_mod(a, r, n) != 1 {
        return Err(Error::Precondition(format!("{a}^{r} is not 1 mod {n}")));
    }
    if r % 2 == 1 {
        return Ok(CandidateCheck::Rejected(Rejection::OddPeriod));
    }
    let half = pow_mod(a, r / 2, n);
    if half == n - 1 {
        return Ok(CandidateCheck::Rejected(Rejection::TrivialRoot));
    }
    let p = gcd((half + n - 1) % n, n);
    let q = gcd(half + 1, n);
    let nontrivial = |f: u64| f > 1 && f < n;
    if !nontrivial(p) || !nontrivial(q) {
        return Ok(CandidateCheck::Rejected(Rejection::Degenerate));
    }
    Ok(CandidateCheck::Factors(p, q))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Backend {
    Classical,
    QuantumSim,
}

pub trait PeriodFinder: Send + Sync {
    fn name(&self) -> &'static str;

    fn backend(&self) -> Backend;

    /// A verified period of `x ↦ a^x mod n`, or `None` when this run did not
    /// reveal one.
    fn find_period(&self, a: u64, n: u64, rng: &mut RngStream) -> Result<Option<u64>>;
}

#[derive(Debug, Clone, Copy, Default)]
pub struct ClassicalOrder;

impl PeriodFinder for ClassicalOrder {
    fn name(&self) -> &'static str {
        "classical"
    }

    fn backend(&self) -> Backend {
        Backend::Classical
    }

    fn find_period(&self, a: u64, n: u64, _rng: &mut RngStream) -> Result<Option<u64>> {
        classical_order(a, n).map(Some)
    }
}

/// Continued-fraction convergents `(numerator, denominator)` of `num / den`,
/// stopping once a denominator exceeds `max_den`.
pub fn convergents(num: u64, den: u64, max_den: u64) -> Vec<(u64, u64)> {
    let mut out = Vec::new();
    let (mut x, mut y) = (u128::from(num), u128::from(den));
    let (mut h_prev, mut h) = (0u128, 1u128);
    let (mut k_prev, mut k) = (1u128, 0u128);
    while y != 0 {
        let q = x / y;
        (h_prev, h) = (h, q * h + h_prev);
        (k_prev, k) = (k, q * k + k_prev);
        if k > u128::from(max_den) {
            break;
        }
        out.push((h as u64, k as u64));
        (x, y) = (y, x - q * y);
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeriodSample {
    /// Value read from R1.
    pub measured: u64,
    /// R1 width in qubits.
    pub t: usize,
    pub convergents: Vec<(u64, u64)>,
    pub candidate_r: Option<u64>,
}

/// `⌈log₂ n⌉`
fn bit_width(n: u64) -> usize {
    (64 - (n - 1).leading_zeros()) as usize
}

/// Prepared period-finding state: R1 Fourier transformed, ready to measure.
#[derive(Debug, Clone)]
pub struct PeriodCircuit {
    a: u64,
    n: u64,
    t: usize,
    state: StateVector,
}

impl PeriodCircuit {
    pub fn prepare(a: u64, n: u64, qubit_cap: usize) -> Result<Self> {
        check_base(a, n)?;
        let w = bit_width(n);
        let t = 2 * w;
        if t + w > qubit_cap {
            return Err(Error::Resource {
                what: "period-finding qubits",
                requested: t + w,
                limit: qubit_cap,
                hint: " (use the classical backend)",
            });
        }
        let mut state = StateVector::zero_capped(t + w, qubit_cap)?;
        state.hadamard_all(0..t)?;
        state.apply_xor_function(0..t, t..t + w, |x| pow_mod(a, x, n))?;
        state.apply_qft(0..t, false)?;
        Ok(PeriodCircuit { a, n, t, state })
    }

    pub fn r1_width(&self) -> usize {
        self.t
    }

    /// Exact distribution of the R1 measurement.
    pub fn r1_distribution(&self) -> Result<Vec<f64>> {
        self.state.register_probabilities(0..self.t)
    }

    /// Measures R1 on a copy of the prepared state and post-processes `m`.
    pub fn sample(&self, rng: &mut RngStream) -> Result<PeriodSample> {
        let mut state = self.state.clone();
        let m = state.measure_register(0..self.t, rng)?.value;
        Ok(self.postprocess(m))
    }

    /// Smallest convergent denominator `r ≤ n` of `m / 2^t` with `a^r ≡ 1`.
    pub fn postprocess(&self, m: u64) -> PeriodSample {
        let convergents = convergents(m, 1u64 << self.t, self.n);
        let candidate_r = convergents
            .iter()
            .map(|&(_, d)| d)
            .find(|&d| d >= 1 && pow_mod(self.a, d, self.n) == 1);
        PeriodSample {
            measured: m,
            t: self.t,
            convergents,
            candidate_r,
        }
    }
}

/// One run of the simulated period-finding circuit with the default qubit cap.
pub fn quantum_period_finding(a: u64, n: u64, seed: Seed) -> Result<PeriodSample> {
    PeriodCircuit::prepare(a, n, DEFAULT_QUBIT_CAP)?.sample(&mut seed.stream())
}

#[derive(Debug, Clone, Copy)]
pub struct QuantumPeriodFinder {
    qubit_cap: usize,
    samples: u32,
}

impl QuantumPeriodFinder {
    pub fn new(qubit_cap: usize, samples: u32) -> Self {
        QuantumPeriodFinder {
            qubit_cap,
            samples: samples.max(1),
        }
    }
}

impl Default for QuantumPeriodFinder {
    fn default() -> Self {
        Self::new(DEFAULT_QUBIT_CAP, DEFAULT_PERIOD_SAMPLES)
    }
}

impl PeriodFinder for QuantumPeriodFinder {
    fn name(&self) -> &'static str {
        "quantum"
    }

    fn backend(&self) -> Backend {
        Backend::QuantumSim
    }

    fn find_period(&self, a: u64, n: u64, rng: &mut RngStream) -> Result<Option<u64>> {
        let circuit = PeriodCircuit::prepare(a, n, self.qubit_cap)?;
        for _ in 0..self.samples {
            if let Some(r) = circuit.sample(rng)?.candidate_r {
                return Ok(Some(r));
            }
        }
        Ok(None)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum AttemptOutcome {
    /// `gcd(a, n) > 1` gave a factor directly.
    GcdShortcut,
    Factored,
    PeriodNotFound,
    OddPeriod,
    TrivialRoot,
    Degenerate,
}

impl From<Rejection> for AttemptOutcome {
    fn from(r: Rejection) -> Self {
        match r {
            Rejection::OddPeriod => AttemptOutcome::OddPeriod,
            Rejection::TrivialRoot => AttemptOutcome::TrivialRoot,
            Rejection::Degenerate => AttemptOutcome::Degenerate,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Attempt {
    pub a: u64,
    pub r: Option<u64>,
    pub outcome: AttemptOutcome,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum FailureReason {
    Prime,
    AttemptsExhausted,
}

impl FailureReason {
    pub fn describe(self) -> &'static str {
        match self {
            FailureReason::Prime => "n is prime",
            FailureReason::AttemptsExhausted => "attempt budget exhausted",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FactorizationResult {
    pub n: u64,
    pub attempts: Vec<Attempt>,
    /// `(p, q)` with `p·q = n` and `1 < p ≤ q < n`.
    pub factors: Option<(u64, u64)>,
    pub backend: Backend,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub failure: Option<FailureReason>,
}

impl FactorizationResult {
    fn finish(mut self, p: u64) -> Result<Self> {
        let q = self.n / p;
        if p <= 1 || p >= self.n || p * q != self.n {
            return Err(Error::Consistency(format!("{p} does not divide {}", self.n)));
        }
        self.factors = Some((p.min(q), p.max(q)));
        Ok(self)
    }
}

/// Factors an odd composite `n` (even `n` returns `(2, n/2)` at once).
///
/// Each attempt draws `a` uniformly from `[2, n−1)`. Prime `n` and exhausted
/// attempts both end in [`Error::NoFactorsFound`] carrying the trace.
pub fn shor_factor(
    n: u64,
    finder: &dyn PeriodFinder,
    seed: Seed,
    max_attempts: u32,
) -> Result<FactorizationResult> {
    if n < 3 {
        return Err(Error::arg(format!("modulus must be at least 3, got {n}")));
    }
    let mut result = FactorizationResult {
        n,
        attempts: Vec::new(),
        factors: None,
        backend: finder.backend(),
        failure: None,
    };
    if n.is_multiple_of(2) {
        return result.finish(2);
    }
    if is_prime(n) {
        result.failure = Some(FailureReason::Prime);
        return Err(Error::NoFactorsFound(Box::new(result)));
    }
    let mut rng = seed.stream();
    let mut finder_rng = rng.fork();
    for _ in 0..max_attempts {
        let a = rng.range(2, n - 1);
        let g = gcd(a, n);
        if g != 1 {
            result.attempts.push(Attempt {
                a,
                r: None,
                outcome: AttemptOutcome::GcdShortcut,
            });
            return result.finish(g);
        }
        let Some(r) = finder.find_period(a, n, &mut finder_rng)? else {
            result.attempts.push(Attempt {
                a,
                r: None,
                outcome: AttemptOutcome::PeriodNotFound,
            });
            continue;
        };
        match check_candidate(a, n, r)? {
            CandidateCheck::Factors(p, _) => {
                result.attempts.push(Attempt {
                    a,
                    r: Some(r),
                    outcome: AttemptOutcome::Factored,
                });
                return result.finish(p);
            }
            CandidateCheck::Rejected(why) => result.attempts.push(Attempt {
                a,
                r: Some(r),
                outcome: why.into(),
            }),
        }
    }
    result.failure = Some(FailureReason::AttemptsExhausted);
    Err(Error::NoFactorsFound(Box::new(result)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn orders() {
        assert_eq!(classical_order(2, 15).unwrap(), 4);
        assert_eq!(classical_order(2, 21).unwrap(), 6);
        assert_eq!(classical_order(3, 91).unwrap(), 6);
        assert!(matches!(classical_order(3, 21), Err(Error::Precondition(_))));
        assert!(classical_order(1, 2).is_err());
    }

    #[test]
    fn candidates() {
        assert_eq!(check_candidate(2, 15, 4).unwrap(), CandidateCheck::Factors(3, 5));
        assert_eq!(
            check_candidate(14, 15, 2).unwrap(),
            CandidateCheck::Rejected(Rejection::TrivialRoot)
        );
        assert_eq!(check_candidate(2, 21, 6).unwrap(), CandidateCheck::Factors(7, 3));
        assert_eq!(
            check_candidate(4, 15, 2).unwrap(),
            CandidateCheck::Factors(3, 5)
        );
        // 4 has order 3 mod 21
        assert_eq!(
            check_candidate(4, 21, 3).unwrap(),
            CandidateCheck::Rejected(Rejection::OddPeriod)
        );
        assert!(matches!(check_candidate(2, 15, 3), Err(Error::Precondition(_))));
    }

    #[test]
    fn degenerate_multiple_of_order() {
        // 4 has order 2 mod 15, so r = 4 is a valid but non-minimal period
        // with 4^2 ≡ 1, giving gcd(0, 15) = 15
        assert_eq!(
            check_candidate(4, 15, 4).unwrap(),
            CandidateCheck::Rejected(Rejection::Degenerate)
        );
    }

    #[test]
    fn primality() {
        let small: Vec<u64> = (0..60).filter(|&n| is_prime(n)).collect();
        assert_eq!(
            small,
            [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59]
        );
        assert!(is_prime(1_000_000_007));
        assert!(!is_prime(91));
        assert!(!is_prime(3_215_031_751));
    }

    #[test]
    fn convergents_of_three_quarters() {
        assert_eq!(convergents(192, 256, 15), vec![(0, 1), (1, 1), (3, 4)]);
        assert_eq!(convergents(0, 256, 15), vec![(0, 1)]);
        // 0.3 = [0; 3, 3]
        assert_eq!(convergents(3, 10, 100), vec![(0, 1), (1, 3), (3, 10)]);
    }

    #[test]
    fn postprocess_examples() {
        let c = PeriodCircuit::prepare(2, 15, DEFAULT_QUBIT_CAP).unwrap();
        assert_eq!(c.r1_width(), 8);
        let s = c.postprocess(192);
        assert_eq!(s.candidate_r, Some(4));
        assert!(s.convergents.contains(&(3, 4)));
        assert_eq!(c.postprocess(0).candidate_r, None);
        assert_eq!(c.postprocess(64).candidate_r, Some(4));
        // 128/256 = 1/2 and 2^2 = 4 ≢ 1 mod 15
        assert_eq!(c.postprocess(128).candidate_r, None);
    }

    #[test]
    fn even_modulus_short_circuits() {
        let r = shor_factor(22, &ClassicalOrder, Seed::new(0), 5).unwrap();
        assert_eq!(r.factors, Some((2, 11)));
        assert!(r.attempts.is_empty());
    }

    #[test]
    fn prime_modulus_fails_with_trace() {
        match shor_factor(13, &ClassicalOrder, Seed::new(0), 5) {
            Err(Error::NoFactorsFound(r)) => {
                assert_eq!(r.failure, Some(FailureReason::Prime));
                assert!(r.factors.is_none());
            }
            other => panic!("{other:?}"),
        }
        assert!(shor_factor(2, &ClassicalOrder, Seed::new(0), 5).is_err());
    }

    #[test]
    fn zero_attempts_exhaust() {
        match shor_factor(15, &ClassicalOrder, Seed::new(0), 0) {
            Err(Error::NoFactorsFound(r)) => {
                assert_eq!(r.failure, Some(FailureReason::AttemptsExhausted))
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn cap_redirects_to_classical() {
        let err = PeriodCircuit::prepare(2, 91, 12).unwrap_err();
        assert!(err.to_string().contains("classical"), "{err}");
    }
}
