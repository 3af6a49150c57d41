//! Random valid states and unitaries, for property tests and benchmarks.

use num_complex::Complex64;
use rand::Rng;

use crate::densmat::{ComplexMatrix, DensityMatrix};

fn random_complex(rng: &mut impl Rng) -> Complex64 {
    Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
}

/// `t · G G† / Tr(G G†)` for a random complex `G`: Hermitian, positive
/// semidefinite, trace `t`.
pub fn random_density_matrix(rng: &mut impl Rng, num_qubits: usize, trace: f64) -> DensityMatrix {
    let dim = 1 << num_qubits;
    let g = ComplexMatrix::from_fn(dim, |_, _| random_complex(rng)).expect("power of two");
    let gg = g.matmul(&g.adjoint()).expect("same dim");
    let tr = gg.trace().re;
    let mut m = gg.scale(Complex64::new(trace / tr, 0.0));
    // Exact Hermitian symmetry on the stored entries.
    for r in 0..dim {
        m[(r, r)].im = 0.0;
        for c in 0..r {
            m[(r, c)] = m[(c, r)].conj();
        }
    }
    DensityMatrix::new_unchecked(m)
}

/// Gram-Schmidt orthonormalization of a random complex matrix.
pub fn random_unitary(rng: &mut impl Rng, num_qubits: usize) -> ComplexMatrix {
    let dim = 1 << num_qubits;
    let mut cols: Vec<Vec<Complex64>> = Vec::with_capacity(dim);
    while cols.len() < dim {
        let mut v: Vec<Complex64> = (0..dim).map(|_| random_complex(rng)).collect();
        for u in &cols {
            let proj: Complex64 = u.iter().zip(&v).map(|(a, b)| a.conj() * b).sum();
            for (x, y) in v.iter_mut().zip(u) {
                *x -= proj * y;
            }
        }
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm < 1e-6 {
            continue;
        }
        cols.push(v.into_iter().map(|z| z / norm).collect());
    }
    ComplexMatrix::from_fn(dim, |r, c| cols[c][r]).expect("power of two")
}
