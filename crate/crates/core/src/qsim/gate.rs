use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::fmt;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Tolerance on `‖G·G† − I‖∞` accepted at construction.
pub const UNITARY_TOL: f64 = 1e-9;

/// A unitary matrix acting on `log2(dim)` qubits, stored row-major.
///
/// Local index convention: for a gate applied to targets `[t0, t1, ..]`, `t0`
/// is the most significant bit of the row/column index.
#[derive(Clone, PartialEq)]
pub struct GateMatrix {
    dim: usize,
    entries: Vec<Complex64>,
}

const fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

impl GateMatrix {
    /// Builds a gate, rejecting non-square, non-power-of-two or non-unitary input.
    pub fn new(dim: usize, entries: Vec<Complex64>) -> Result<Self> {
        if dim < 2 || !dim.is_power_of_two() {
            return Err(Error::arg(format!(
                "gate dimension must be a power of two >= 2, got {dim}"
            )));
        }
        if entries.len() != dim * dim {
            return Err(Error::arg(format!(
                "gate of dimension {dim} needs {} entries, got {}",
                dim * dim,
                entries.len()
            )));
        }
        let g = GateMatrix { dim, entries };
        let dev = g.unitarity_deviation();
        if dev.is_nan() || dev >= UNITARY_TOL {
            return Err(Error::arg(format!(
                "gate is not unitary: |G G^dag - I|_inf = {dev:e}"
            )));
        }
        Ok(g)
    }

    fn trusted(dim: usize, entries: Vec<Complex64>) -> Self {
        debug_assert_eq!(entries.len(), dim * dim);
        GateMatrix { dim, entries }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n_qubits(&self) -> usize {
        self.dim.trailing_zeros() as usize
    }

    pub fn entry(&self, row: usize, col: usize) -> Complex64 {
        self.entries[row * self.dim + col]
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.entries
    }

    pub fn identity(dim: usize) -> Self {
        let mut e = vec![Complex64::new(0.0, 0.0); dim * dim];
        for i in 0..dim {
            e[i * dim + i] = c(1.0, 0.0);
        }
        Self::trusted(dim, e)
    }

    pub fn h() -> Self {
        let s = FRAC_1_SQRT_2;
        Self::trusted(2, vec![c(s, 0.0), c(s, 0.0), c(s, 0.0), c(-s, 0.0)])
    }

    pub fn x() -> Self {
        Self::trusted(2, vec![c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)])
    }

    pub fn y() -> Self {
        Self::trusted(2, vec![c(0.0, 0.0), c(0.0, -1.0), c(0.0, 1.0), c(0.0, 0.0)])
    }

    pub fn z() -> Self {
        Self::trusted(2, vec![c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(-1.0, 0.0)])
    }

    /// `diag(1, e^{i phi})`.
    pub fn phase(phi: f64) -> Self {
        Self::trusted(
            2,
            vec![c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), Complex64::from_polar(1.0, phi)],
        )
    }

    pub fn s() -> Self {
        Self::phase(PI / 2.0)
    }

    pub fn t() -> Self {
        Self::phase(PI / 4.0)
    }

    /// Real plane rotation `[[cos, -sin], [sin, cos]]`.
    pub fn rotation(theta: f64) -> Self {
        let (s, co) = theta.sin_cos();
        Self::trusted(2, vec![c(co, 0.0), c(-s, 0.0), c(s, 0.0), c(co, 0.0)])
    }

    pub fn cnot() -> Self {
        Self::x().controlled()
    }

    pub fn swap() -> Self {
        let mut e = vec![c(0.0, 0.0); 16];
        e[0] = c(1.0, 0.0);
        e[4 + 2] = c(1.0, 0.0);
        e[8 + 1] = c(1.0, 0.0);
        e[15] = c(1.0, 0.0);
        Self::trusted(4, e)
    }

    /// Adds one control qubit in front of the existing targets.
    pub fn controlled(&self) -> Self {
        let d = self.dim * 2;
        let mut e = vec![c(0.0, 0.0); d * d];
        for i in 0..self.dim {
            e[i * d + i] = c(1.0, 0.0);
        }
        for r in 0..self.dim {
            for col in 0..self.dim {
                e[(self.dim + r) * d + self.dim + col] = self.entry(r, col);
            }
        }
        Self::trusted(d, e)
    }

    /// Dense discrete-Fourier unitary of size `2^t`:
    /// `F[j][k] = exp(±2πi jk / 2^t) / sqrt(2^t)` (`+` forward).
    pub fn fourier(t: usize, inverse: bool) -> Self {
        let d = 1usize << t;
        let sign = if inverse { -1.0 } else { 1.0 };
        let norm = 1.0 / (d as f64).sqrt();
        let mut e = Vec::with_capacity(d * d);
        for j in 0..d {
            for k in 0..d {
                let angle = sign * 2.0 * PI * ((j * k) % d) as f64 / d as f64;
                e.push(Complex64::from_polar(norm, angle));
            }
        }
        Self::trusted(d, e)
    }

    pub fn adjoint(&self) -> Self {
        let d = self.dim;
        let mut e = vec![c(0.0, 0.0); d * d];
        for r in 0..d {
            for col in 0..d {
                e[col * d + r] = self.entry(r, col).conj();
            }
        }
        Self::trusted(d, e)
    }

    /// Matrix product `self · rhs`.
    pub fn matmul(&self, rhs: &GateMatrix) -> Result<GateMatrix> {
        if self.dim != rhs.dim {
            return Err(Error::arg(format!(
                "dimension mismatch {} vs {}",
                self.dim, rhs.dim
            )));
        }
        let d = self.dim;
        let mut e = vec![c(0.0, 0.0); d * d];
        for r in 0..d {
            for k in 0..d {
                let a = self.entry(r, k);
                if a == c(0.0, 0.0) {
                    continue;
                }
                for col in 0..d {
                    e[r * d + col] += a * rhs.entry(k, col);
                }
            }
        }
        Ok(Self::trusted(d, e))
    }

    /// Largest entrywise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &GateMatrix) -> f64 {
        if self.dim != other.dim {
            return f64::INFINITY;
        }
        self.entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// `‖G·G† − I‖∞` (maximum entry modulus).
    pub fn unitarity_deviation(&self) -> f64 {
        let d = self.dim;
        let mut worst: f64 = 0.0;
        for r in 0..d {
            for col in 0..d {
                let mut acc = c(0.0, 0.0);
                for k in 0..d {
                    acc += self.entry(r, k) * self.entry(col, k).conj();
                }
                if r == col {
                    acc -= 1.0;
                }
                let m = acc.norm();
                if m.is_nan() {
                    return f64::INFINITY;
                }
                worst = worst.max(m);
            }
        }
        worst
    }
}

impl fmt::Debug for GateMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "GateMatrix({}x{})", self.dim, self.dim)?;
        for r in 0..self.dim {
            let row: Vec<String> = (0..self.dim)
                .map(|col| {
                    let z = self.entry(r, col);
                    format!("{:+.4}{:+.4}i", z.re, z.im)
                })
                .collect();
            writeln!(f, "  [{}]", row.join(", "))?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn standard() -> Vec<(&'static str, GateMatrix)> {
        vec![
            ("H", GateMatrix::h()),
            ("X", GateMatrix::x()),
            ("Y", GateMatrix::y()),
            ("Z", GateMatrix::z()),
            ("S", GateMatrix::s()),
            ("T", GateMatrix::t()),
            ("R", GateMatrix::rotation(0.3)),
            ("CNOT", GateMatrix::cnot()),
            ("SWAP", GateMatrix::swap()),
            ("CH", GateMatrix::h().controlled()),
            ("F3", GateMatrix::fourier(3, false)),
        ]
    }

    #[test]
    fn standard_gates_are_unitary() {
        for (name, g) in standard() {
            assert!(g.unitarity_deviation() < UNITARY_TOL, "{name}");
        }
    }

    #[test]
    fn involutions() {
        for g in [GateMatrix::h(), GateMatrix::x(), GateMatrix::z()] {
            let sq = g.matmul(&g).unwrap();
            assert!(sq.max_abs_diff(&GateMatrix::identity(2)) < 1e-9);
        }
    }

    #[test]
    fn rejects_non_unitary() {
        let e = vec![c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)];
        assert!(matches!(GateMatrix::new(2, e), Err(Error::Argument(_))));
    }

    #[test]
    fn rejects_bad_shape() {
        assert!(GateMatrix::new(3, vec![c(1.0, 0.0); 9]).is_err());
        assert!(GateMatrix::new(2, vec![c(1.0, 0.0); 3]).is_err());
        assert!(GateMatrix::new(1, vec![c(1.0, 0.0)]).is_err());
    }

    #[test]
    fn one_qubit_fourier_is_hadamard() {
        assert!(GateMatrix::fourier(1, false).max_abs_diff(&GateMatrix::h()) < 1e-9);
        assert!(GateMatrix::fourier(1, true).max_abs_diff(&GateMatrix::h()) < 1e-9);
    }

    #[test]
    fn adjoint_inverts() {
        let g = GateMatrix::t().controlled();
        let p = g.matmul(&g.adjoint()).unwrap();
        assert!(p.max_abs_diff(&GateMatrix::identity(4)) < 1e-12);
    }
}
