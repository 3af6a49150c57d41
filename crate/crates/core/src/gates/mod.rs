//! Built-in gates, controlled-gate construction and gate-sequence synthesis.

mod synth;

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_4};
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use thiserror::Error;

use crate::densmat::{ComplexMatrix, DensError, EPS_UNIT};

pub use synth::{
    default_max_depth, synthesize, synthesize_with, GateSequence, SynthOptions, SynthOutcome,
    SynthStep, DEFAULT_SEARCH_ALPHABET,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GateError {
    #[error("unknown gate `{0}`")]
    UnknownGate(String),
    #[error("gate matrix is not unitary (‖U†U − I‖ = {defect:e})")]
    NonUnitary { defect: f64 },
    #[error("synthesis supports 1 or 2 lines, not {0}")]
    UnsupportedLines(usize),
    #[error("target has dimension {found}, expected {expected}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("eps must be positive and finite, got {0}")]
    InvalidEps(f64),
    #[error(transparent)]
    Dens(#[from] DensError),
}

/// The nine hardware gates: four unary (`N`, `H`, `V`, `W`) and five binary
/// (`Nc`, `Hc`, `Vc`, `Wc`, `X`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Gate {
    N,
    H,
    V,
    W,
    Nc,
    Hc,
    Vc,
    Wc,
    X,
}

impl Gate {
    pub const ALL: [Gate; 9] = [
        Gate::N,
        Gate::H,
        Gate::V,
        Gate::W,
        Gate::Nc,
        Gate::Hc,
        Gate::Vc,
        Gate::Wc,
        Gate::X,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Gate::N => "N",
            Gate::H => "H",
            Gate::V => "V",
            Gate::W => "W",
            Gate::Nc => "Nc",
            Gate::Hc => "Hc",
            Gate::Vc => "Vc",
            Gate::Wc => "Wc",
            Gate::X => "X",
        }
    }

    pub fn arity(self) -> usize {
        match self {
            Gate::N | Gate::H | Gate::V | Gate::W => 1,
            _ => 2,
        }
    }

    /// The literal catalog matrix.
    pub fn matrix(self) -> ComplexMatrix {
        let o = Complex64::new(0.0, 0.0);
        let l = Complex64::new(1.0, 0.0);
        let s = Complex64::new(FRAC_1_SQRT_2, 0.0);
        let i = Complex64::new(0.0, 1.0);
        // Principal square root of i.
        let r = Complex64::from_polar(1.0, FRAC_PI_4);
        let rows: Vec<Vec<Complex64>> = match self {
            Gate::N => vec![vec![o, l], vec![l, o]],
            Gate::H => vec![vec![s, s], vec![s, -s]],
            Gate::V => vec![vec![l, o], vec![o, i]],
            Gate::W => vec![vec![l, o], vec![o, r]],
            Gate::Nc => vec![
                vec![l, o, o, o],
                vec![o, l, o, o],
                vec![o, o, o, l],
                vec![o, o, l, o],
            ],
            Gate::Hc => vec![
                vec![l, o, o, o],
                vec![o, l, o, o],
                vec![o, o, s, s],
                vec![o, o, s, -s],
            ],
            Gate::Vc => vec![
                vec![l, o, o, o],
                vec![o, l, o, o],
                vec![o, o, l, o],
                vec![o, o, o, i],
            ],
            Gate::Wc => vec![
                vec![l, o, o, o],
                vec![o, l, o, o],
                vec![o, o, l, o],
                vec![o, o, o, r],
            ],
            Gate::X => vec![
                vec![l, o, o, o],
                vec![o, o, l, o],
                vec![o, l, o, o],
                vec![o, o, o, l],
            ],
        };
        ComplexMatrix::from_rows(rows).expect("catalog matrices are square")
    }

    pub fn def(self) -> GateDef {
        GateDef {
            name: self.as_str().to_string(),
            matrix: self.matrix(),
        }
    }
}

impl fmt::Display for Gate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Gate {
    type Err = GateError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Gate::ALL
            .into_iter()
            .find(|g| g.as_str() == s)
            .ok_or_else(|| GateError::UnknownGate(s.to_string()))
    }
}

/// A named unitary acting on `arity` qubits.
#[derive(Debug, Clone, PartialEq)]
pub struct GateDef {
    name: String,
    matrix: ComplexMatrix,
}

impl GateDef {
    pub fn new(name: impl Into<String>, matrix: ComplexMatrix) -> Result<Self, GateError> {
        let defect = matrix.unitarity_defect();
        if defect > EPS_UNIT {
            return Err(GateError::NonUnitary { defect });
        }
        Ok(Self {
            name: name.into(),
            matrix,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn arity(&self) -> usize {
        self.matrix.num_qubits()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }
}

/// Looks up a catalog gate by name.
pub fn builtin(name: &str) -> Result<GateDef, GateError> {
    Ok(name.parse::<Gate>()?.def())
}

/// `[[I, 0], [0, S]]`: `s` applied when an extra leading control qubit is 1.
pub fn controlled(s: &GateDef) -> GateDef {
    let d = s.matrix.dim();
    let m = ComplexMatrix::from_fn(2 * d, |r, c| match (r < d, c < d) {
        (true, true) if r == c => Complex64::new(1.0, 0.0),
        (false, false) => s.matrix[(r - d, c - d)],
        _ => Complex64::new(0.0, 0.0),
    })
    .expect("power of two");
    GateDef {
        name: format!("{}c", s.name),
        matrix: m,
    }
}

/// Result of minimizing `‖s − λt‖_F` over unit complex `λ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseDistance {
    pub distance: f64,
    pub phase: Complex64,
}

/// Frobenius distance between `s` and `t` modulo a global phase.
///
/// The optimal phase is `λ = Tr(t†s) / |Tr(t†s)|`, or 1 when that trace
/// vanishes.
pub fn distance_up_to_phase(
    s: &ComplexMatrix,
    t: &ComplexMatrix,
) -> Result<PhaseDistance, GateError> {
    if s.dim() != t.dim() {
        return Err(DensError::DimensionMismatch {
            left: s.dim(),
            right: t.dim(),
        }
        .into());
    }
    Ok(distance_unchecked(s, t))
}

pub(crate) fn distance_unchecked(s: &ComplexMatrix, t: &ComplexMatrix) -> PhaseDistance {
    let overlap: Complex64 = t
        .as_slice()
        .iter()
        .zip(s.as_slice())
        .map(|(a, b)| a.conj() * b)
        .sum();
    let phase = if overlap.norm() > 0.0 {
        overlap / overlap.norm()
    } else {
        Complex64::new(1.0, 0.0)
    };
    // Direct evaluation avoids the cancellation in ‖s‖² + ‖t‖² − 2|Tr(t†s)|.
    let distance = s
        .as_slice()
        .iter()
        .zip(t.as_slice())
        .map(|(a, b)| (a - phase * b).norm_sqr())
        .sum::<f64>()
        .sqrt();
    PhaseDistance { distance, phase }
}
