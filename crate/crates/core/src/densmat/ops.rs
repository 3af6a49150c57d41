use num_complex::Complex64;

use super::{
    check_qubit_cap, ComplexMatrix, DensError, DensResult, DensityMatrix, Observable,
    QubitIndex, EPS_UNIT,
};

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

/// Kronecker product, `a` being the more significant factor.
pub fn tensor(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    a.kron(b)
}

/// `U ρ U†`. The unitarity of `u` is checked.
pub fn conjugate_apply(u: &ComplexMatrix, rho: &DensityMatrix) -> DensResult<DensityMatrix> {
    u.same_dim(rho.matrix())?;
    let defect = u.unitarity_defect();
    if defect > EPS_UNIT {
        return Err(DensError::NonUnitary { defect });
    }
    let out = u.matmul(rho.matrix())?.matmul(&u.adjoint())?;
    Ok(DensityMatrix::new_unchecked(out))
}

fn bit_of(num_qubits: usize, q: usize) -> usize {
    1 << (num_qubits - 1 - q)
}

fn check_qubit(num_qubits: usize, q: usize) -> DensResult<()> {
    if q >= num_qubits {
        return Err(DensError::QubitOutOfRange {
            index: q,
            num_qubits,
        });
    }
    Ok(())
}

/// Validates `targets` against a register of `num_qubits` and returns, for
/// each gate-local basis index `j`, the register index offset it maps to.
/// `targets[0]` is the gate's most significant line.
pub(crate) fn target_offsets(
    num_qubits: usize,
    targets: &[QubitIndex],
) -> DensResult<(Vec<usize>, usize)> {
    let mut mask = 0usize;
    for t in targets {
        check_qubit(num_qubits, t.0)?;
        let b = bit_of(num_qubits, t.0);
        if mask & b != 0 {
            return Err(DensError::DuplicateTargets { qubit: t.0 });
        }
        mask |= b;
    }
    let k = targets.len();
    let offsets = (0..1usize << k)
        .map(|j| {
            targets
                .iter()
                .enumerate()
                .filter(|(m, _)| (j >> (k - 1 - m)) & 1 == 1)
                .map(|(_, t)| bit_of(num_qubits, t.0))
                .sum()
        })
        .collect();
    Ok((offsets, mask))
}

fn check_gate(gate: &ComplexMatrix, targets: &[QubitIndex]) -> DensResult<()> {
    if gate.num_qubits() != targets.len() {
        return Err(DensError::ArityMismatch {
            expected: gate.num_qubits(),
            found: targets.len(),
        });
    }
    Ok(())
}

/// Row-index action: `M ← U M` with `U` the gate embedded on `targets`.
fn left_multiply(mat: &mut ComplexMatrix, gate: &ComplexMatrix, offsets: &[usize], mask: usize) {
    let dim = mat.dim();
    let k = offsets.len();
    let g = gate.as_slice();
    let data = mat.as_mut_slice();
    let mut buf = vec![ZERO; k];
    for base in (0..dim).filter(|i| i & mask == 0) {
        for c in 0..dim {
            for (j, off) in offsets.iter().enumerate() {
                buf[j] = data[(base + off) * dim + c];
            }
            for (j, off) in offsets.iter().enumerate() {
                let row = &g[j * k..(j + 1) * k];
                data[(base + off) * dim + c] = row.iter().zip(&buf).map(|(a, b)| a * b).sum();
            }
        }
    }
}

/// Column-index action: `M ← M U†`.
fn right_multiply_adjoint(
    mat: &mut ComplexMatrix,
    gate: &ComplexMatrix,
    offsets: &[usize],
    mask: usize,
) {
    let dim = mat.dim();
    let k = offsets.len();
    let g = gate.as_slice();
    let data = mat.as_mut_slice();
    let mut buf = vec![ZERO; k];
    for r in 0..dim {
        let row = &mut data[r * dim..(r + 1) * dim];
        for base in (0..dim).filter(|i| i & mask == 0) {
            for (i, off) in offsets.iter().enumerate() {
                buf[i] = row[base + off];
            }
            for (j, off) in offsets.iter().enumerate() {
                let grow = &g[j * k..(j + 1) * k];
                row[base + off] = buf.iter().zip(grow).map(|(v, u)| v * u.conj()).sum();
            }
        }
    }
}

/// In-place `ρ ← U ρ U†` without unitarity or positivity checks.
pub(crate) fn apply_gate_in_place(
    mat: &mut ComplexMatrix,
    gate: &ComplexMatrix,
    targets: &[QubitIndex],
) -> DensResult<()> {
    check_gate(gate, targets)?;
    let (offsets, mask) = target_offsets(mat.num_qubits(), targets)?;
    left_multiply(mat, gate, &offsets, mask);
    right_multiply_adjoint(mat, gate, &offsets, mask);
    Ok(())
}

/// Applies a `k`-qubit gate to the listed register positions.
///
/// Equivalent to moving the targets to the leading positions, conjugating by
/// `gate ⊗ I` and moving them back, but works directly on index groups in
/// `O(dim² · 2^k)`. Repeated targets are rejected: a gate cannot take the same
/// qubit twice.
pub fn apply_on_targets(
    gate: &ComplexMatrix,
    targets: &[QubitIndex],
    rho: &DensityMatrix,
) -> DensResult<DensityMatrix> {
    let mut out = rho.matrix().clone();
    apply_gate_in_place(&mut out, gate, targets)?;
    Ok(DensityMatrix::new_unchecked(out))
}

/// The full `2^n × 2^n` unitary of `gate` acting on `targets`.
pub fn embed_gate(
    gate: &ComplexMatrix,
    targets: &[QubitIndex],
    num_qubits: usize,
) -> DensResult<ComplexMatrix> {
    check_gate(gate, targets)?;
    let mut out = ComplexMatrix::identity(1 << num_qubits)?;
    let (offsets, mask) = target_offsets(num_qubits, targets)?;
    left_multiply(&mut out, gate, &offsets, mask);
    Ok(out)
}

/// Reorders tensor factors: the qubit at position `i` moves to `perm[i]`.
pub fn permute_qubits(rho: &DensityMatrix, perm: &[usize]) -> DensResult<DensityMatrix> {
    let n = rho.num_qubits();
    if perm.len() != n {
        return Err(DensError::BadPermutation(n));
    }
    let mut seen = vec![false; n];
    for &p in perm {
        if p >= n || seen[p] {
            return Err(DensError::BadPermutation(n));
        }
        seen[p] = true;
    }
    let dim = rho.dim();
    let relabel: Vec<usize> = (0..dim)
        .map(|idx| {
            (0..n)
                .filter(|&q| idx & bit_of(n, q) != 0)
                .map(|q| bit_of(n, perm[q]))
                .sum()
        })
        .collect();
    let src = rho.matrix().as_slice();
    let mut data = vec![ZERO; dim * dim];
    for r in 0..dim {
        for c in 0..dim {
            data[relabel[r] * dim + relabel[c]] = src[r * dim + c];
        }
    }
    Ok(DensityMatrix::new_unchecked(ComplexMatrix::from_raw(dim, data)))
}

/// Projective measurement of qubit `q` in the computational basis.
///
/// Returns the unnormalized outcome-0 and outcome-1 states; their traces are
/// the outcome probabilities. The measured qubit stays in the register.
pub fn measure_split(
    rho: &DensityMatrix,
    q: impl Into<QubitIndex>,
) -> DensResult<(DensityMatrix, DensityMatrix)> {
    let q = q.into().0;
    let n = rho.num_qubits();
    check_qubit(n, q)?;
    let b = bit_of(n, q);
    let dim = rho.dim();
    let src = rho.matrix().as_slice();
    let mut zero = vec![ZERO; dim * dim];
    let mut one = vec![ZERO; dim * dim];
    for r in 0..dim {
        for c in 0..dim {
            match (r & b != 0, c & b != 0) {
                (false, false) => zero[r * dim + c] = src[r * dim + c],
                (true, true) => one[r * dim + c] = src[r * dim + c],
                _ => {}
            }
        }
    }
    Ok((
        DensityMatrix::new_unchecked(ComplexMatrix::from_raw(dim, zero)),
        DensityMatrix::new_unchecked(ComplexMatrix::from_raw(dim, one)),
    ))
}

/// Sum of branch states at a control-flow join.
pub fn merge(parts: &[DensityMatrix]) -> DensResult<DensityMatrix> {
    let (first, rest) = parts.split_first().ok_or(DensError::EmptyMerge)?;
    let mut acc = first.matrix().clone();
    for p in rest {
        acc = acc.try_add(p.matrix())?;
    }
    Ok(DensityMatrix::new_unchecked(acc))
}

/// Traces out the qubit at position `q`.
pub fn partial_trace(rho: &DensityMatrix, q: impl Into<QubitIndex>) -> DensResult<DensityMatrix> {
    let q = q.into().0;
    let n = rho.num_qubits();
    check_qubit(n, q)?;
    let dim = rho.dim();
    let out_dim = dim / 2;
    // Bits below the traced position stay put, bits above shift up by one.
    let low = bit_of(n, q) - 1;
    let insert = |i: usize, bit: usize| ((i & !low) << 1) | (bit * (low + 1)) | (i & low);
    let src = rho.matrix().as_slice();
    let mut data = vec![ZERO; out_dim * out_dim];
    for r in 0..out_dim {
        for c in 0..out_dim {
            data[r * out_dim + c] = (0..2)
                .map(|b| src[insert(r, b) * dim + insert(c, b)])
                .sum();
        }
    }
    Ok(DensityMatrix::new_unchecked(ComplexMatrix::from_raw(
        out_dim, data,
    )))
}

/// `ρ ⊗ |0⟩⟨0|`: appends a fresh qubit as the least significant factor.
pub fn extend_with_fresh_qubit(rho: &DensityMatrix, max_qubits: usize) -> DensResult<DensityMatrix> {
    let n = rho.num_qubits();
    check_qubit_cap(n + 1, max_qubits)?;
    let dim = rho.dim();
    let out_dim = dim * 2;
    let src = rho.matrix().as_slice();
    let mut data = vec![ZERO; out_dim * out_dim];
    for r in 0..dim {
        for c in 0..dim {
            data[(2 * r) * out_dim + 2 * c] = src[r * dim + c];
        }
    }
    Ok(DensityMatrix::new_unchecked(ComplexMatrix::from_raw(
        out_dim, data,
    )))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ExpectationMode {
    /// `Tr(ρO)`, meaningful for sub-normalized edge states.
    #[default]
    Raw,
    /// `Tr(ρO) / Tr(ρ)`.
    Normalized,
}

pub fn expectation(
    rho: &DensityMatrix,
    obs: &Observable,
    mode: ExpectationMode,
) -> DensResult<f64> {
    let (a, o) = (rho.matrix(), obs.matrix());
    a.same_dim(o)?;
    let d = a.dim();
    let (a, o) = (a.as_slice(), o.as_slice());
    let raw: Complex64 = (0..d)
        .flat_map(|i| (0..d).map(move |k| (i, k)))
        .map(|(i, k)| a[i * d + k] * o[k * d + i])
        .sum();
    match mode {
        ExpectationMode::Raw => Ok(raw.re),
        ExpectationMode::Normalized => {
            let tr = rho.trace();
            if tr.abs() <= f64::MIN_POSITIVE {
                return Err(DensError::ZeroTrace);
            }
            Ok(raw.re / tr)
        }
    }
}
