//! Seeded random instances: unitaries, states, circuits.
//!
//! Every draw gets its own ChaCha stream keyed by (seed, index), so batches
//! give identical results whether they run in parallel or not.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::gates::{Circuit, Gate};
use crate::linalg::{CMatrix, C64};
use crate::system::{DensityMatrix, QubitStateParams};

pub type DrawRng = ChaCha8Rng;

pub fn rng_for(seed: u64, index: u64) -> DrawRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

fn gaussian(rng: &mut impl Rng) -> C64 {
    C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

/// Matrix with independent standard complex Gaussian entries.
pub fn ginibre(rng: &mut impl Rng, rows: usize, cols: usize) -> CMatrix {
    let data = (0..rows * cols).map(|_| gaussian(rng)).collect();
    CMatrix::new(rows, cols, data).expect("finite gaussian entries")
}

/// Haar unitary via Gram-Schmidt on the columns of a Ginibre matrix.
pub fn random_unitary(rng: &mut impl Rng, d: usize) -> CMatrix {
    let g = ginibre(rng, d, d);
    let mut cols: Vec<Vec<C64>> = Vec::with_capacity(d);
    for j in 0..d {
        let mut v: Vec<C64> = (0..d).map(|i| g[(i, j)]).collect();
        // two passes keep the columns orthogonal to rounding
        for _ in 0..2 {
            for q in &cols {
                let overlap: C64 = q.iter().zip(&v).map(|(a, b)| a.conj() * b).sum();
                for (x, a) in v.iter_mut().zip(q) {
                    *x -= overlap * a;
                }
            }
        }
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        cols.push(v.into_iter().map(|z| z / norm).collect());
    }
    let mut u = CMatrix::zeros(d, d);
    for (j, col) in cols.iter().enumerate() {
        for (i, &z) in col.iter().enumerate() {
            u[(i, j)] = z;
        }
    }
    u
}

pub fn random_pure_state(rng: &mut impl Rng, d: usize) -> DensityMatrix {
    let psi: Vec<C64> = (0..d).map(|_| gaussian(rng)).collect();
    DensityMatrix::from_ket(&psi).expect("nonzero gaussian ket")
}

/// Mixed state G G^dag / Tr with G of random rank (rank 1 gives a pure state,
/// entangled in general for d = 4).
pub fn random_density(rng: &mut impl Rng, d: usize) -> DensityMatrix {
    let rank = rng.random_range(1..=d);
    let g = ginibre(rng, d, rank);
    let m = &g * &g.adjoint();
    let tr = m.trace().expect("square").re;
    let m = m.scale_real(1.0 / tr);
    let m = (&m + &m.adjoint()).scale_real(0.5);
    DensityMatrix::new(m).expect("gram matrix is a state")
}

pub fn random_qubit_params(rng: &mut impl Rng) -> QubitStateParams {
    let p: f64 = rng.random();
    let bound = (p * (1.0 - p)).sqrt();
    let gamma_abs = rng.random::<f64>() * bound;
    let phase = rng.random_range(0.0..std::f64::consts::TAU);
    QubitStateParams::new(p, gamma_abs, phase).expect("within bounds")
}

pub fn random_axis(rng: &mut impl Rng) -> [f64; 3] {
    loop {
        let v: [f64; 3] = [rng.sample(StandardNormal), rng.sample(StandardNormal), rng.sample(StandardNormal)];
        let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if n > 1e-6 {
            return v.map(|x| x / n);
        }
    }
}

/// Gate drawn uniformly from {H, T, P, CNOT, R} (CNOT only when L >= 2).
pub fn random_gate(rng: &mut impl Rng, num_qubits: usize) -> Gate {
    let kinds = if num_qubits >= 2 { 5 } else { 4 };
    let q = rng.random_range(0..num_qubits);
    match rng.random_range(0..kinds) {
        0 => Gate::H(q),
        1 => Gate::T(q),
        2 => Gate::Phase {
            target: q,
            phi: rng.random_range(0.0..std::f64::consts::TAU),
        },
        3 => Gate::rotation(q, rng.random_range(0.0..std::f64::consts::TAU), random_axis(rng)).expect("unit axis"),
        _ => {
            let mut t = rng.random_range(0..num_qubits - 1);
            if t >= q {
                t += 1;
            }
            Gate::Cnot { control: q, target: t }
        }
    }
}

pub fn random_circuit(rng: &mut impl Rng, num_qubits: usize, len: usize) -> Circuit {
    let gates = (0..len).map(|_| random_gate(rng, num_qubits)).collect();
    Circuit::new(num_qubits, gates).expect("generated gates are valid")
}

/// Random state on `d` levels that is exactly diagonal.
pub fn random_diagonal_state(rng: &mut impl Rng, d: usize) -> DensityMatrix {
    let w: Vec<f64> = (0..d).map(|_| rng.random::<f64>()).collect();
    let s: f64 = w.iter().sum();
    let mut m = CMatrix::zeros(d, d);
    for (k, x) in w.iter().enumerate() {
        m[(k, k)] = C64::new(x / s, 0.0);
    }
    DensityMatrix::new(m).expect("diagonal state")
}
