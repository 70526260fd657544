use std::fmt;
use std::ops::Range;

use num_complex::Complex64;

use super::gate::GateMatrix;
use super::qft::unitary_dft;
use crate::error::{Error, Result};
use crate::rng::RngStream;

/// Default maximum number of qubits for a full statevector (2^24 amplitudes).
pub const DEFAULT_QUBIT_CAP: usize = 24;

/// Norm tolerance after unitary evolution.
pub const NORM_TOL: f64 = 1e-9;

/// Tolerance on the summed outcome probabilities of a measurement.
pub const PROBABILITY_TOL: f64 = 1e-6;

/// A pure state of `n` qubits.
///
/// Qubit 0 is the most significant bit of a basis-state index: in a 3-qubit
/// state, index `0b100` is `|1⟩|0⟩|0⟩`. Registers are contiguous qubit ranges
/// and read their value with the lowest-numbered qubit as the most
/// significant bit.
#[derive(Clone, PartialEq)]
pub struct StateVector {
    n_qubits: usize,
    amps: Vec<Complex64>,
}

/// A measured register value together with its width.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Outcome {
    pub value: u64,
    pub width: usize,
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:0width$b}", self.value, width = self.width)
    }
}

fn check_cap(n_qubits: usize, cap: usize) -> Result<()> {
    if n_qubits > cap {
        return Err(Error::Resource {
            what: "statevector qubits",
            requested: n_qubits,
            limit: cap,
            hint: "",
        });
    }
    Ok(())
}

impl StateVector {
    /// `|0…0⟩` on `n_qubits` qubits, limited to [`DEFAULT_QUBIT_CAP`].
    pub fn zero(n_qubits: usize) -> Result<Self> {
        Self::zero_capped(n_qubits, DEFAULT_QUBIT_CAP)
    }

    pub fn zero_capped(n_qubits: usize, cap: usize) -> Result<Self> {
        if n_qubits == 0 {
            return Err(Error::arg("a statevector needs at least one qubit"));
        }
        check_cap(n_qubits, cap)?;
        let mut amps = vec![Complex64::new(0.0, 0.0); 1usize << n_qubits];
        amps[0] = Complex64::new(1.0, 0.0);
        Ok(StateVector { n_qubits, amps })
    }

    /// Computational basis state `|index⟩`.
    pub fn basis(n_qubits: usize, index: usize) -> Result<Self> {
        let mut sv = Self::zero(n_qubits)?;
        if index >= sv.amps.len() {
            return Err(Error::arg(format!(
                "basis index {index} out of range for {n_qubits} qubits"
            )));
        }
        sv.amps[0] = Complex64::new(0.0, 0.0);
        sv.amps[index] = Complex64::new(1.0, 0.0);
        Ok(sv)
    }

    /// Wraps raw amplitudes; the length must be a power of two and the norm 1.
    pub fn from_amplitudes(amps: Vec<Complex64>) -> Result<Self> {
        if amps.len() < 2 || !amps.len().is_power_of_two() {
            return Err(Error::arg(format!(
                "amplitude count must be a power of two >= 2, got {}",
                amps.len()
            )));
        }
        let sv = StateVector {
            n_qubits: amps.len().trailing_zeros() as usize,
            amps,
        };
        let norm = sv.norm_sqr();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::arg(format!("amplitudes have squared norm {norm}")));
        }
        Ok(sv)
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn amplitude(&self, index: usize) -> Complex64 {
        self.amps[index]
    }

    pub fn probability(&self, index: usize) -> f64 {
        self.amps[index].norm_sqr()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &StateVector) -> Complex64 {
        self.amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    /// Equality up to global phase: `| |⟨a|b⟩| − 1 | ≤ tol`.
    pub fn approx_eq_up_to_phase(&self, other: &StateVector, tol: f64) -> bool {
        self.n_qubits == other.n_qubits && (self.inner(other).norm() - 1.0).abs() <= tol
    }

    fn bit_of(&self, qubit: usize) -> usize {
        1usize << (self.n_qubits - 1 - qubit)
    }

    fn check_register(&self, reg: &Range<usize>) -> Result<()> {
        if reg.start >= reg.end {
            return Err(Error::arg("register is empty"));
        }
        if reg.end > self.n_qubits {
            return Err(Error::arg(format!(
                "register {}..{} exceeds {} qubits",
                reg.start, reg.end, self.n_qubits
            )));
        }
        if reg.len() > 63 {
            return Err(Error::arg("register wider than 63 qubits"));
        }
        Ok(())
    }

    /// Value of `reg` within basis index `index`.
    fn register_value(&self, index: usize, reg: &Range<usize>) -> u64 {
        let shift = self.n_qubits - reg.end;
        ((index >> shift) & ((1usize << reg.len()) - 1)) as u64
    }

    /// Applies `gate` to `targets` (first target = most significant local bit).
    pub fn apply_gate(&mut self, gate: &GateMatrix, targets: &[usize]) -> Result<()> {
        let k = targets.len();
        if gate.dim() != 1usize << k {
            return Err(Error::arg(format!(
                "gate of dimension {} cannot act on {k} targets",
                gate.dim()
            )));
        }
        for (i, &t) in targets.iter().enumerate() {
            if t >= self.n_qubits {
                return Err(Error::arg(format!(
                    "target qubit {t} out of range for {} qubits",
                    self.n_qubits
                )));
            }
            if targets[..i].contains(&t) {
                return Err(Error::arg(format!("target qubit {t} repeated")));
            }
        }
        let masks: Vec<usize> = targets.iter().map(|&t| self.bit_of(t)).collect();
        let all: usize = masks.iter().sum();
        let local = 1usize << k;
        let offsets: Vec<usize> = (0..local)
            .map(|l| {
                (0..k)
                    .filter(|&j| l & (1 << (k - 1 - j)) != 0)
                    .map(|j| masks[j])
                    .sum()
            })
            .collect();
        let mut gathered = vec![Complex64::new(0.0, 0.0); local];
        for base in 0..self.amps.len() {
            if base & all != 0 {
                continue;
            }
            for (g, &off) in gathered.iter_mut().zip(&offsets) {
                *g = self.amps[base | off];
            }
            for (r, &off) in offsets.iter().enumerate() {
                let mut acc = Complex64::new(0.0, 0.0);
                for (col, g) in gathered.iter().enumerate() {
                    acc += gate.entry(r, col) * g;
                }
                self.amps[base | off] = acc;
            }
        }
        Ok(())
    }

    /// Hadamard on every qubit of `reg`.
    pub fn hadamard_all(&mut self, reg: Range<usize>) -> Result<()> {
        self.check_register(&reg)?;
        let h = GateMatrix::h();
        for q in reg {
            self.apply_gate(&h, &[q])?;
        }
        Ok(())
    }

    /// Quantum Fourier transform (or its inverse) on the contiguous register `reg`.
    pub fn apply_qft(&mut self, reg: Range<usize>, inverse: bool) -> Result<()> {
        self.check_register(&reg)?;
        let t = reg.len();
        let low = self.n_qubits - reg.end;
        let high = reg.start;
        let stride = 1usize << low;
        let mut row = vec![Complex64::new(0.0, 0.0); 1usize << t];
        for hi in 0..(1usize << high) {
            let hi_base = hi << (t + low);
            for lo in 0..stride {
                for (x, slot) in row.iter_mut().enumerate() {
                    *slot = self.amps[hi_base | (x << low) | lo];
                }
                unitary_dft(&mut row, inverse);
                for (x, v) in row.iter().enumerate() {
                    self.amps[hi_base | (x << low) | lo] = *v;
                }
            }
        }
        Ok(())
    }

    /// Multiplies the amplitude of every basis state whose full index satisfies
    /// `marked` by −1.
    pub fn phase_flip<F: Fn(u64) -> bool>(&mut self, marked: F) {
        for (i, a) in self.amps.iter_mut().enumerate() {
            if marked(i as u64) {
                *a = -*a;
            }
        }
    }

    /// Reflection about the uniform superposition, `2|s⟩⟨s| − I`.
    pub fn invert_about_mean(&mut self) {
        let mean: Complex64 = self.amps.iter().sum::<Complex64>() / self.amps.len() as f64;
        for a in self.amps.iter_mut() {
            *a = mean * 2.0 - *a;
        }
    }

    /// Basis permutation `|x⟩|y⟩ → |x⟩|y ⊕ f(x)⟩` with `x` read from `input`
    /// and `y` from `output`. The registers must not overlap.
    pub fn apply_xor_function<F: Fn(u64) -> u64>(
        &mut self,
        input: Range<usize>,
        output: Range<usize>,
        f: F,
    ) -> Result<()> {
        self.check_register(&input)?;
        self.check_register(&output)?;
        if input.start < output.end && output.start < input.end {
            return Err(Error::arg("input and output registers overlap"));
        }
        let out_shift = self.n_qubits - output.end;
        let out_mask = (1u64 << output.len()) - 1;
        let mut next = vec![Complex64::new(0.0, 0.0); self.amps.len()];
        for (i, a) in self.amps.iter().enumerate() {
            if a.norm_sqr() == 0.0 {
                continue;
            }
            let fx = f(self.register_value(i, &input)) & out_mask;
            let j = i ^ ((fx as usize) << out_shift);
            next[j] = *a;
        }
        self.amps = next;
        Ok(())
    }

    /// Marginal distribution of `reg`, indexed by register value.
    pub fn register_probabilities(&self, reg: Range<usize>) -> Result<Vec<f64>> {
        self.check_register(&reg)?;
        let mut probs = vec![0.0; 1usize << reg.len()];
        for (i, a) in self.amps.iter().enumerate() {
            probs[self.register_value(i, &reg) as usize] += a.norm_sqr();
        }
        Ok(probs)
    }

    /// Born-rule measurement of `reg`; collapses and renormalizes the state.
    pub fn measure_register(&mut self, reg: Range<usize>, rng: &mut RngStream) -> Result<Outcome> {
        let probs = self.register_probabilities(reg.clone())?;
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > PROBABILITY_TOL {
            return Err(Error::Consistency(format!(
                "outcome probabilities sum to {total}"
            )));
        }
        let u = rng.uniform() * total;
        let mut acc = 0.0;
        let mut chosen = None;
        for (v, &p) in probs.iter().enumerate() {
            if p == 0.0 {
                continue;
            }
            acc += p;
            chosen = Some(v);
            if u < acc {
                break;
            }
        }
        let value = chosen.ok_or_else(|| Error::Consistency("all outcomes have zero probability".into()))?;
        let scale = 1.0 / probs[value].sqrt();
        for i in 0..self.amps.len() {
            if self.register_value(i, &reg) as usize == value {
                self.amps[i] *= scale;
            } else {
                self.amps[i] = Complex64::new(0.0, 0.0);
            }
        }
        Ok(Outcome {
            value: value as u64,
            width: reg.len(),
        })
    }

    /// Measures every qubit.
    pub fn measure_all(&mut self, rng: &mut RngStream) -> Result<Outcome> {
        self.measure_register(0..self.n_qubits, rng)
    }
}

impl fmt::Debug for StateVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "StateVector({} qubits", self.n_qubits)?;
        if self.amps.len() <= 16 {
            for (i, a) in self.amps.iter().enumerate() {
                write!(f, ", |{i:0w$b}⟩: {:+.4}{:+.4}i", a.re, a.im, w = self.n_qubits)?;
            }
        }
        write!(f, ")")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::Seed;
    use std::f64::consts::FRAC_1_SQRT_2;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn init_two_qubits() {
        let sv = StateVector::zero(2).unwrap();
        assert_eq!(sv.amplitudes(), &[c(1.0), c(0.0), c(0.0), c(0.0)]);
    }

    #[test]
    fn init_one_qubit_is_ket_zero_column() {
        let sv = StateVector::zero(1).unwrap();
        assert_eq!(sv.amplitudes(), &[c(1.0), c(0.0)]);
    }

    #[test]
    fn cap_is_enforced() {
        let err = StateVector::zero(25).unwrap_err();
        assert!(matches!(err, Error::Resource { limit: 24, requested: 25, .. }), "{err}");
        assert!(err.to_string().contains("24"));
        assert!(StateVector::zero_capped(5, 4).is_err());
        assert!(StateVector::zero(0).is_err());
    }

    #[test]
    fn hadamard_gives_equal_split() {
        let mut sv = StateVector::zero(1).unwrap();
        sv.apply_gate(&GateMatrix::h(), &[0]).unwrap();
        assert!((sv.amplitude(0).re - FRAC_1_SQRT_2).abs() < 1e-12);
        assert!((sv.amplitude(1).re - FRAC_1_SQRT_2).abs() < 1e-12);
        assert!((sv.probability(0) - 0.5).abs() < 1e-12);
        assert!((sv.probability(1) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn hadamard_twice_is_identity() {
        let mut sv = StateVector::zero(1).unwrap();
        sv.apply_gate(&GateMatrix::h(), &[0]).unwrap();
        sv.apply_gate(&GateMatrix::h(), &[0]).unwrap();
        assert!(sv.approx_eq_up_to_phase(&StateVector::zero(1).unwrap(), 1e-12));
        assert!((sv.amplitude(0).re - 1.0).abs() < 1e-12);
    }

    #[test]
    fn x_flips() {
        let mut sv = StateVector::zero(1).unwrap();
        sv.apply_gate(&GateMatrix::x(), &[0]).unwrap();
        assert_eq!(sv.amplitudes(), &[c(0.0), c(1.0)]);
    }

    #[test]
    fn qubit_zero_is_most_significant() {
        let mut sv = StateVector::zero(3).unwrap();
        sv.apply_gate(&GateMatrix::x(), &[0]).unwrap();
        assert_eq!(sv.probability(0b100), 1.0);
    }

    #[test]
    fn cnot_control_first() {
        let mut sv = StateVector::basis(2, 0b10).unwrap();
        sv.apply_gate(&GateMatrix::cnot(), &[0, 1]).unwrap();
        assert_eq!(sv.probability(0b11), 1.0);
        let mut sv = StateVector::basis(2, 0b10).unwrap();
        sv.apply_gate(&GateMatrix::cnot(), &[1, 0]).unwrap();
        assert_eq!(sv.probability(0b10), 1.0);
    }

    #[test]
    fn bad_targets_rejected() {
        let mut sv = StateVector::zero(2).unwrap();
        assert!(sv.apply_gate(&GateMatrix::h(), &[2]).is_err());
        assert!(sv.apply_gate(&GateMatrix::cnot(), &[1, 1]).is_err());
        assert!(sv.apply_gate(&GateMatrix::cnot(), &[0]).is_err());
    }

    #[test]
    fn qft_of_zero_is_uniform() {
        let mut sv = StateVector::zero(4).unwrap();
        sv.apply_qft(0..4, false).unwrap();
        for a in sv.amplitudes() {
            assert!((a - c(0.25)).norm() < 1e-12);
        }
    }

    #[test]
    fn qft_on_subregister_matches_dense_gate() {
        let mut rng = Seed::new(5).stream();
        let amps: Vec<Complex64> = (0..32)
            .map(|_| Complex64::new(rng.uniform() - 0.5, rng.uniform() - 0.5))
            .collect();
        let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        let sv0 = StateVector::from_amplitudes(amps.into_iter().map(|a| a / norm).collect()).unwrap();
        let mut a = sv0.clone();
        a.apply_qft(1..4, false).unwrap();
        let mut b = sv0.clone();
        b.apply_gate(&GateMatrix::fourier(3, false), &[1, 2, 3]).unwrap();
        for (x, y) in a.amplitudes().iter().zip(b.amplitudes()) {
            assert!((x - y).norm() < 1e-12);
        }
    }

    #[test]
    fn qft_empty_register_rejected() {
        let mut sv = StateVector::zero(2).unwrap();
        assert!(sv.apply_qft(1..1, false).is_err());
        assert!(sv.apply_qft(1..3, false).is_err());
    }

    #[test]
    fn measure_basis_state_is_certain() {
        let mut sv = StateVector::basis(2, 0b11).unwrap();
        let mut rng = Seed::new(0).stream();
        for _ in 0..10 {
            let out = sv.clone().measure_all(&mut rng).unwrap();
            assert_eq!(out.to_string(), "11");
        }
        let out = sv.measure_all(&mut rng).unwrap();
        assert_eq!(out.value, 3);
        assert_eq!(sv.probability(3), 1.0);
    }

    #[test]
    fn measure_superposition_frequency() {
        let mut plus = StateVector::zero(1).unwrap();
        plus.apply_gate(&GateMatrix::h(), &[0]).unwrap();
        let mut rng = Seed::new(11).stream();
        let trials = 100_000;
        let zeros = (0..trials)
            .filter(|_| plus.clone().measure_all(&mut rng).unwrap().value == 0)
            .count();
        let f = zeros as f64 / trials as f64;
        assert!((f - 0.5).abs() < 0.01, "{f}");
    }

    #[test]
    fn measuring_one_qubit_leaves_other_marginal() {
        // product state (cos a|0> + sin a|1>) ⊗ (cos b|0> + sin b|1>)
        let (a, b) = (0.4_f64, 1.1_f64);
        let amps = vec![
            c(a.cos() * b.cos()),
            c(a.cos() * b.sin()),
            c(a.sin() * b.cos()),
            c(a.sin() * b.sin()),
        ];
        let sv = StateVector::from_amplitudes(amps).unwrap();
        let marginal = |s: &StateVector| {
            // direct summation over qubit 0
            let p1: f64 = (0..4).filter(|i| i & 1 == 1).map(|i| s.probability(i)).sum();
            p1
        };
        let before = marginal(&sv);
        let mut rng = Seed::new(3).stream();
        for _ in 0..20 {
            let mut s = sv.clone();
            s.measure_register(0..1, &mut rng).unwrap();
            assert!((s.norm_sqr() - 1.0).abs() < 1e-9);
            assert!((marginal(&s) - before).abs() < 1e-12);
        }
    }

    #[test]
    fn measure_rejects_unnormalized() {
        let mut sv = StateVector::zero(1).unwrap();
        sv.amps[0] = c(0.5);
        let mut rng = Seed::new(0).stream();
        assert!(matches!(sv.measure_all(&mut rng), Err(Error::Consistency(_))));
    }

    #[test]
    fn xor_function_permutes() {
        let mut sv = StateVector::zero(4).unwrap();
        sv.hadamard_all(0..2).unwrap();
        sv.apply_xor_function(0..2, 2..4, |x| (x + 1) % 4).unwrap();
        for x in 0..4usize {
            let y = (x + 1) % 4;
            assert!((sv.probability((x << 2) | y) - 0.25).abs() < 1e-12);
        }
        assert!(sv.apply_xor_function(0..2, 1..3, |x| x).is_err());
    }
}
