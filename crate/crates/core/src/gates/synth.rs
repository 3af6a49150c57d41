//! Exhaustive minimum-depth synthesis of 1- and 2-line unitaries as products
//! of catalog gates.
//!
//! The search is a breadth-first enumeration of gate sequences in
//! lexicographic order of `(gate name, target lines)`, with a visited set of
//! phase-normalized products quantized to 1e-10. Because each level is
//! expanded in lexicographic order of its parents, the first sequence that
//! meets the tolerance is the lexicographically smallest among the
//! minimum-depth solutions.

use std::collections::hash_map::DefaultHasher;
use std::collections::HashSet;
use std::hash::{Hash, Hasher};

use num_complex::Complex64;

use super::{distance_unchecked, Gate, GateError, PhaseDistance};
use crate::densmat::{embed_gate, ComplexMatrix, QubitIndex, EPS_UNIT};

/// Gates the search draws from by default. `N` and `Nc` are left out: both
/// are short products of the others (`N = H·V·V·H`), and keeping them would
/// make bit flips trivially depth one.
pub const DEFAULT_SEARCH_ALPHABET: [Gate; 7] = [
    Gate::H,
    Gate::Hc,
    Gate::V,
    Gate::Vc,
    Gate::W,
    Gate::Wc,
    Gate::X,
];

const QUANTUM: f64 = 1e10;

/// Default depth cap: 8 for one line, 5 for two.
pub fn default_max_depth(num_lines: usize) -> usize {
    if num_lines <= 1 {
        8
    } else {
        5
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SynthStep {
    pub gate: Gate,
    pub targets: Vec<usize>,
}

/// Gates applied in order; step `k + 1` multiplies the product on the left.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GateSequence {
    pub num_lines: usize,
    pub steps: Vec<SynthStep>,
}

impl GateSequence {
    /// The product `U_k ⋯ U_1` of the embedded steps.
    pub fn unitary(&self) -> Result<ComplexMatrix, GateError> {
        let mut acc = ComplexMatrix::identity(1 << self.num_lines)?;
        for step in &self.steps {
            let targets: Vec<QubitIndex> = step.targets.iter().map(|&t| QubitIndex(t)).collect();
            let u = embed_gate(&step.gate.matrix(), &targets, self.num_lines)?;
            acc = u.matmul(&acc)?;
        }
        Ok(acc)
    }

    pub fn gate_names(&self) -> Vec<&'static str> {
        self.steps.iter().map(|s| s.gate.as_str()).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthOptions {
    pub eps: f64,
    pub max_depth: usize,
    pub alphabet: Vec<Gate>,
}

impl SynthOptions {
    pub fn new(eps: f64, max_depth: usize) -> Self {
        Self {
            eps,
            max_depth,
            alphabet: DEFAULT_SEARCH_ALPHABET.to_vec(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum SynthOutcome {
    Found {
        sequence: GateSequence,
        distance: PhaseDistance,
    },
    NotFound {
        best_distance: f64,
        max_depth: usize,
    },
}

/// Searches with the default alphabet.
pub fn synthesize(
    target: &ComplexMatrix,
    num_lines: usize,
    eps: f64,
    max_depth: usize,
) -> Result<SynthOutcome, GateError> {
    synthesize_with(target, num_lines, &SynthOptions::new(eps, max_depth))
}

struct Move {
    step: SynthStep,
    unitary: ComplexMatrix,
}

fn moves(alphabet: &[Gate], num_lines: usize) -> Result<Vec<Move>, GateError> {
    let mut out = Vec::new();
    for &gate in alphabet {
        let assignments: Vec<Vec<usize>> = match gate.arity() {
            1 => (0..num_lines).map(|l| vec![l]).collect(),
            _ => (0..num_lines)
                .flat_map(|a| (0..num_lines).filter(move |&b| b != a).map(move |b| vec![a, b]))
                .collect(),
        };
        for targets in assignments {
            let qs: Vec<QubitIndex> = targets.iter().map(|&t| QubitIndex(t)).collect();
            let unitary = embed_gate(&gate.matrix(), &qs, num_lines)?;
            out.push(Move {
                step: SynthStep { gate, targets },
                unitary,
            });
        }
    }
    out.sort_by(|a, b| {
        (a.step.gate.as_str(), &a.step.targets).cmp(&(b.step.gate.as_str(), &b.step.targets))
    });
    out.dedup_by(|a, b| a.step == b.step);
    Ok(out)
}

/// Hash of the product with its global phase removed, entries rounded to
/// 1e-10.
fn phase_free_key(m: &ComplexMatrix) -> u128 {
    let entries = m.as_slice();
    let pivot = entries
        .iter()
        .find(|z| z.norm() > 1e-6)
        .copied()
        .unwrap_or(Complex64::new(1.0, 0.0));
    let rot = pivot.conj() / pivot.norm();
    let mut lo = DefaultHasher::new();
    let mut hi = DefaultHasher::new();
    0x5eed_u64.hash(&mut hi);
    for z in entries {
        let w = z * rot;
        let q = ((w.re * QUANTUM).round() as i64, (w.im * QUANTUM).round() as i64);
        q.hash(&mut lo);
        q.hash(&mut hi);
    }
    ((hi.finish() as u128) << 64) | lo.finish() as u128
}

struct Node {
    product: ComplexMatrix,
    path: Vec<u16>,
}

pub fn synthesize_with(
    target: &ComplexMatrix,
    num_lines: usize,
    opts: &SynthOptions,
) -> Result<SynthOutcome, GateError> {
    if !(1..=2).contains(&num_lines) {
        return Err(GateError::UnsupportedLines(num_lines));
    }
    if target.dim() != 1 << num_lines {
        return Err(GateError::DimensionMismatch {
            expected: 1 << num_lines,
            found: target.dim(),
        });
    }
    if !(opts.eps > 0.0 && opts.eps.is_finite()) {
        return Err(GateError::InvalidEps(opts.eps));
    }
    let defect = target.unitarity_defect();
    if defect > EPS_UNIT {
        return Err(GateError::NonUnitary { defect });
    }

    let moves = moves(&opts.alphabet, num_lines)?;
    let build = |path: &[u16]| GateSequence {
        num_lines,
        steps: path.iter().map(|&i| moves[i as usize].step.clone()).collect(),
    };

    let identity = ComplexMatrix::identity(1 << num_lines)?;
    let d0 = distance_unchecked(target, &identity);
    if d0.distance < opts.eps {
        return Ok(SynthOutcome::Found {
            sequence: build(&[]),
            distance: d0,
        });
    }
    let mut best = d0.distance;
    let mut visited = HashSet::from([phase_free_key(&identity)]);
    let mut level = vec![Node {
        product: identity,
        path: Vec::new(),
    }];

    for depth in 1..=opts.max_depth {
        let last = depth == opts.max_depth;
        let mut next = Vec::new();
        for node in &level {
            for (mi, mv) in moves.iter().enumerate() {
                let product = mv.unitary.matmul(&node.product)?;
                let d = distance_unchecked(target, &product);
                best = best.min(d.distance);
                let mut path = node.path.clone();
                path.push(mi as u16);
                if d.distance < opts.eps {
                    return Ok(SynthOutcome::Found {
                        sequence: build(&path),
                        distance: d,
                    });
                }
                if !last && visited.insert(phase_free_key(&product)) {
                    next.push(Node { product, path });
                }
            }
        }
        level = next;
        if level.is_empty() {
            break;
        }
    }
    Ok(SynthOutcome::NotFound {
        best_distance: best,
        max_depth: opts.max_depth,
    })
}
