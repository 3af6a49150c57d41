//! Dense complex linear algebra and density-operator calculus.
//!
//! Qubit positions follow a big-endian convention: position 0 is the most
//! significant tensor factor. Measuring position 0 of a matrix written in
//! 2×2 block form `[[A, B], [C, D]]` therefore keeps `A` for outcome 0 and
//! `D` for outcome 1.
//!
//! Density matrices are carried unnormalized: the trace of the matrix sitting
//! on a program edge is the probability of reaching that edge.

mod format;
mod matrix;
mod ops;

use thiserror::Error;

pub use format::{matrix_from_json, matrix_from_value, matrix_to_value};
pub(crate) use matrix::check_pow2;
pub use matrix::ComplexMatrix;
pub use ops::{
    apply_on_targets, conjugate_apply, embed_gate, expectation, extend_with_fresh_qubit, merge,
    measure_split, partial_trace, permute_qubits, tensor, ExpectationMode,
};
pub(crate) use ops::apply_gate_in_place;

pub use num_complex::Complex64;

/// Tolerance on `‖ρ − ρ†‖_F`.
pub const EPS_HERM: f64 = 1e-9;
/// Tolerance on trace bookkeeping.
pub const EPS_TRACE: f64 = 1e-9;
/// Per-dimension tolerance on the smallest eigenvalue.
pub const EPS_PSD: f64 = 1e-9;
/// Tolerance on `‖U†U − I‖_F`.
pub const EPS_UNIT: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DensError {
    #[error("dimension {0} is not a power of two")]
    NotPowerOfTwo(usize),
    #[error("ragged matrix: expected {expected} entries in a row, found {found}")]
    Ragged { expected: usize, found: usize },
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("matrix is not unitary (‖U†U − I‖ = {defect:e})")]
    NonUnitary { defect: f64 },
    #[error("matrix is not Hermitian (‖M − M†‖ = {defect:e})")]
    NotHermitian { defect: f64 },
    #[error("matrix is not positive semidefinite (smallest eigenvalue {min_eigenvalue:e})")]
    NotPositive { min_eigenvalue: f64 },
    #[error("trace {trace} outside [0, 1]")]
    TraceOutOfRange { trace: f64 },
    #[error("matrix has non-finite entries")]
    NonFinite,
    #[error("duplicate target qubit {qubit}")]
    DuplicateTargets { qubit: usize },
    #[error("qubit index {index} out of range for {num_qubits} qubits")]
    QubitOutOfRange { index: usize, num_qubits: usize },
    #[error("gate acts on {expected} qubits but {found} targets were given")]
    ArityMismatch { expected: usize, found: usize },
    #[error("not a permutation of 0..{0}")]
    BadPermutation(usize),
    #[error("qubit cap of {cap} exceeded")]
    QubitCapExceeded { cap: usize },
    #[error("merge of an empty list")]
    EmptyMerge,
    #[error("normalized expectation of a zero-trace state")]
    ZeroTrace,
    #[error("malformed matrix document: {0}")]
    Format(String),
}

pub type DensResult<T> = Result<T, DensError>;

pub(crate) fn check_qubit_cap(num_qubits: usize, cap: usize) -> DensResult<()> {
    if num_qubits > cap {
        return Err(DensError::QubitCapExceeded { cap });
    }
    Ok(())
}

/// Position of a qubit inside a register; 0 is the most significant factor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct QubitIndex(pub usize);

impl From<usize> for QubitIndex {
    fn from(i: usize) -> Self {
        QubitIndex(i)
    }
}

/// A (possibly sub-normalized) density operator.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    mat: ComplexMatrix,
}

impl DensityMatrix {
    /// Validates finiteness, Hermiticity, positivity and `0 ≤ Tr ≤ 1`.
    pub fn new(mat: ComplexMatrix) -> DensResult<Self> {
        let rho = Self { mat };
        rho.validate()?;
        Ok(rho)
    }

    pub fn new_unchecked(mat: ComplexMatrix) -> Self {
        Self { mat }
    }

    /// Density operator of the empty register: the 1×1 matrix `[1]`.
    pub fn empty_register() -> Self {
        Self {
            mat: ComplexMatrix::scalar_one(),
        }
    }

    /// `|b⟩⟨b|` for a computational basis string, most significant bit first.
    pub fn basis_state(bits: &[u8]) -> Self {
        let dim = 1usize << bits.len();
        let idx = bits.iter().fold(0usize, |acc, &b| (acc << 1) | (b as usize & 1));
        let mut mat = ComplexMatrix::zeros(dim).expect("power of two");
        mat[(idx, idx)] = Complex64::new(1.0, 0.0);
        Self { mat }
    }

    /// `|ψ⟩⟨ψ|` for an amplitude vector (not renormalized).
    pub fn from_pure(amps: &[Complex64]) -> DensResult<Self> {
        let mat = ComplexMatrix::from_fn(amps.len(), |r, c| amps[r] * amps[c].conj())?;
        Ok(Self { mat })
    }

    pub fn validate(&self) -> DensResult<()> {
        if !self.mat.is_finite() {
            return Err(DensError::NonFinite);
        }
        let defect = self.mat.hermiticity_defect();
        if defect > EPS_HERM {
            return Err(DensError::NotHermitian { defect });
        }
        let tr = self.trace();
        if !(-EPS_TRACE..=1.0 + EPS_TRACE).contains(&tr) {
            return Err(DensError::TraceOutOfRange { trace: tr });
        }
        let min = self.mat.hermitian_eigenvalues()[0];
        if min < -EPS_PSD * self.mat.dim() as f64 {
            return Err(DensError::NotPositive { min_eigenvalue: min });
        }
        Ok(())
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.mat
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.mat
    }

    pub(crate) fn matrix_mut(&mut self) -> &mut ComplexMatrix {
        &mut self.mat
    }

    pub fn dim(&self) -> usize {
        self.mat.dim()
    }

    pub fn num_qubits(&self) -> usize {
        self.mat.num_qubits()
    }

    /// Real part of the trace: the probability carried by this state.
    pub fn trace(&self) -> f64 {
        self.mat.trace().re
    }

    /// Eigenvalues, ascending.
    pub fn eigenvalues(&self) -> Vec<f64> {
        self.mat.hermitian_eigenvalues()
    }

    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        self.mat.approx_eq(&other.mat, tol)
    }
}

/// A Hermitian operator whose expectation can be taken.
#[derive(Clone, Debug, PartialEq)]
pub struct Observable {
    mat: ComplexMatrix,
}

impl Observable {
    pub fn new(mat: ComplexMatrix) -> DensResult<Self> {
        let defect = mat.hermiticity_defect();
        if defect > EPS_HERM {
            return Err(DensError::NotHermitian { defect });
        }
        Ok(Self { mat })
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.mat
    }
}
