//! Deep-circuit decomposition of KDQs and two-qubit factorization.
//!
//! For U = U_N ... U_1 the full table differs from the table of the single
//! gate U_{j+1} acting on rho_j = (U_j...U_1) rho (U_j...U_1)^dag by
//! Tr[M rho], with gap operator
//!
//! ```text
//! M = U^dag ([Pi_f, S] U_{j+1} Pi_i P - Pi_f S U_{j+1} [Pi_i, P])
//! S = U_N ... U_{j+2},  P = U_j ... U_1
//! ```
//!
//! For j = 0 the second term vanishes (P = I), for j = N-1 the first one does
//! (S = I), and a single gate has M = 0.

use serde::Serialize;
use serde_json::{json, Value};
use thiserror::Error;

use crate::gates::{Circuit, Gate, GateError};
use crate::kdq::{kdq_table, KdqError, KdqTable};
use crate::linalg::{CMatrix, C64};
use crate::random::{random_density, rng_for};
use crate::system::{build_hamiltonian, partial_trace, DensityMatrix, Hamiltonian, SystemError};

/// A commutator "vanishes" when its Frobenius norm is at most this.
pub const COMMUTE_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DecompositionError {
    #[error("gate index {j} out of range for {n} gates")]
    GateIndex { j: usize, n: usize },
    #[error("empty circuit has no decomposition")]
    EmptyCircuit,
    #[error("commutation screening covers circuits of 2 or 3 gates, got {0}")]
    ScreenDepth(usize),
    #[error("unknown gate letter '{0}' (expected H or T)")]
    WordLetter(char),
    #[error("factorization needs single-qubit operators and states")]
    FactorShape,
    #[error("hamiltonian dimension {got} does not match circuit dimension {expected}")]
    Dimension { expected: usize, got: usize },
    #[error(transparent)]
    Kdq(#[from] KdqError),
    #[error(transparent)]
    Gate(#[from] GateError),
    #[error(transparent)]
    System(#[from] SystemError),
}

fn check_dims(c: &Circuit, h: &Hamiltonian) -> Result<(), DecompositionError> {
    if c.dim() != h.dim() {
        return Err(DecompositionError::Dimension {
            expected: c.dim(),
            got: h.dim(),
        });
    }
    Ok(())
}

/// Gap operator for gate index `j` (0-based, gate U_{j+1}) and transition (i, f).
pub fn m_operator(c: &Circuit, j: usize, i: usize, f: usize, h: &Hamiltonian) -> Result<CMatrix, DecompositionError> {
    check_dims(c, h)?;
    let n = c.len();
    if n == 0 || j >= n {
        return Err(DecompositionError::GateIndex { j, n });
    }
    let d = c.dim();
    if n == 1 {
        return Ok(CMatrix::zeros(d, d));
    }
    let (pi_i, pi_f) = (h.projector(i), h.projector(f));
    let u_dag = c.unitary().adjoint();
    let s = c.product(j + 1..n);
    let g = c.gate_unitary(j);
    let p = c.product(0..j);
    let mut inner = CMatrix::zeros(d, d);
    if j + 1 < n {
        inner = &(&(&pi_f.commutator(&s).map_err(KdqError::from)? * &g) * pi_i) * &p;
    }
    if j > 0 {
        let second = &(&(pi_f * &s) * &g) * &pi_i.commutator(&p).map_err(KdqError::from)?;
        inner = &inner - &second;
    }
    Ok(&u_dag * &inner)
}

#[derive(Debug, Clone, PartialEq)]
pub struct GateGapReport {
    pub j: usize,
    /// Tr[M_if rho] indexed (i, f).
    pub gap: CMatrix,
    /// Table of U_{j+1} on rho_j.
    pub constituent: KdqTable,
}

impl GateGapReport {
    pub fn to_json(&self) -> Value {
        json!({
            "j": self.j,
            "table": self.constituent.to_json(),
            "gap": matrix_json(&self.gap),
        })
    }
}

pub fn matrix_json(m: &CMatrix) -> Value {
    let rows: Vec<Vec<Value>> = (0..m.rows())
        .map(|i| (0..m.cols()).map(|k| crate::kdq::complex_json(m[(i, k)])).collect())
        .collect();
    Value::from(rows)
}

fn constituent_table(c: &Circuit, j: usize, rho: &DensityMatrix, h: &Hamiltonian) -> Result<KdqTable, DecompositionError> {
    let rho_j = rho.evolve(&c.prefix_unitary(j)?)?;
    Ok(kdq_table(&c.gate_unitary(j), &rho_j, h)?)
}

pub fn kdq_gap(c: &Circuit, j: usize, rho: &DensityMatrix, h: &Hamiltonian) -> Result<GateGapReport, DecompositionError> {
    check_dims(c, h)?;
    let d = c.dim();
    let mut gap = CMatrix::zeros(d, d);
    for i in 0..d {
        for f in 0..d {
            let m = m_operator(c, j, i, f, h)?;
            gap[(i, f)] = (&m * rho.matrix()).trace().map_err(KdqError::from)?;
        }
    }
    Ok(GateGapReport {
        j,
        gap,
        constituent: constituent_table(c, j, rho, h)?,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecompositionReport {
    pub full: KdqTable,
    pub per_gate: Vec<GateGapReport>,
    /// Q_if = sum_j Tr[M_if^{(j)} rho].
    pub correction: CMatrix,
    /// Largest entrywise deviation in full = (1/N) sum_j q_j + Q/N and in
    /// full = q_j + gap_j.
    pub residual_max: f64,
}

impl DecompositionReport {
    pub fn to_json(&self) -> Value {
        json!({
            "full": self.full.to_json(),
            "per_gate": self.per_gate.iter().map(GateGapReport::to_json).collect::<Vec<_>>(),
            "correction": matrix_json(&self.correction),
            "residual_max": self.residual_max,
        })
    }
}

pub fn decomposition_identity(
    c: &Circuit,
    rho: &DensityMatrix,
    h: &Hamiltonian,
) -> Result<DecompositionReport, DecompositionError> {
    check_dims(c, h)?;
    let n = c.len();
    if n == 0 {
        return Err(DecompositionError::EmptyCircuit);
    }
    let full = kdq_table(&c.unitary(), rho, h)?;
    let per_gate = (0..n)
        .map(|j| kdq_gap(c, j, rho, h))
        .collect::<Result<Vec<_>, _>>()?;
    let d = c.dim();
    let mut correction = CMatrix::zeros(d, d);
    let mut mean = CMatrix::zeros(d, d);
    let mut residual: f64 = 0.0;
    for g in &per_gate {
        correction = &correction + &g.gap;
        mean = &mean + g.constituent.entries();
        let local = &g.constituent.entries().clone() + &g.gap;
        residual = residual.max(local.max_abs_diff(full.entries()));
    }
    let inv_n = 1.0 / n as f64;
    let weighted = &mean.scale_real(inv_n) + &correction.scale_real(inv_n);
    residual = residual.max(weighted.max_abs_diff(full.entries()));
    Ok(DecompositionReport {
        full,
        per_gate,
        correction,
        residual_max: residual,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CommutatorCheck {
    pub label: String,
    /// Frobenius norm for each projector index.
    pub norms: Vec<f64>,
}

impl CommutatorCheck {
    pub fn vanishes(&self) -> bool {
        self.norms.iter().all(|&x| x <= COMMUTE_TOL)
    }

    pub fn max_norm(&self) -> f64 {
        self.norms.iter().copied().fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Condition {
    pub label: String,
    pub satisfied: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CommutationReport {
    pub checks: Vec<CommutatorCheck>,
    pub conditions: Vec<Condition>,
}

impl CommutationReport {
    pub fn check(&self, label: &str) -> Option<&CommutatorCheck> {
        self.checks.iter().find(|c| c.label == label)
    }

    /// True when some sufficient condition for trivial decomposition holds.
    pub fn any_satisfied(&self) -> bool {
        self.conditions.iter().any(|c| c.satisfied)
    }
}

fn commutator_check(label: &str, op: &CMatrix, h: &Hamiltonian) -> CommutatorCheck {
    CommutatorCheck {
        label: label.to_string(),
        norms: h
            .projectors()
            .iter()
            .map(|p| (&(p * op) - &(op * p)).frobenius_norm())
            .collect(),
    }
}

/// Screening for circuits U (first), V, M (last) or U, V.
///
/// Three gates: `[Pi_f, MV] = 0`, or `[Pi_f, M] = 0` and `[Pi_i, U] = 0`, or
/// `[Pi_i, VU] = 0`, each for every projector. Two gates: `[Pi_i, U] = 0` or
/// `[Pi_f, V] = 0`.
pub fn commutation_screen(c: &Circuit, h: &Hamiltonian) -> Result<CommutationReport, DecompositionError> {
    check_dims(c, h)?;
    match c.len() {
        2 => {
            let u = commutator_check("[Pi_i,U]", &c.gate_unitary(0), h);
            let v = commutator_check("[Pi_f,V]", &c.gate_unitary(1), h);
            let conditions = vec![
                Condition {
                    label: "[Pi_i,U]=0".into(),
                    satisfied: u.vanishes(),
                },
                Condition {
                    label: "[Pi_f,V]=0".into(),
                    satisfied: v.vanishes(),
                },
            ];
            Ok(CommutationReport {
                checks: vec![u, v],
                conditions,
            })
        }
        3 => {
            let mv = commutator_check("[Pi_f,MV]", &c.product(1..3), h);
            let m = commutator_check("[Pi_f,M]", &c.gate_unitary(2), h);
            let u = commutator_check("[Pi_i,U]", &c.gate_unitary(0), h);
            let vu = commutator_check("[Pi_i,VU]", &c.product(0..2), h);
            let conditions = vec![
                Condition {
                    label: "[Pi_f,MV]=0".into(),
                    satisfied: mv.vanishes(),
                },
                Condition {
                    label: "[Pi_f,M]=[Pi_i,U]=0".into(),
                    satisfied: m.vanishes() && u.vanishes(),
                },
                Condition {
                    label: "[Pi_i,VU]=0".into(),
                    satisfied: vu.vanishes(),
                },
            ];
            Ok(CommutationReport {
                checks: vec![mv, m, u, vu],
                conditions,
            })
        }
        n => Err(DecompositionError::ScreenDepth(n)),
    }
}

/// Depth-three words over {H, T} with the vanishing pattern of the checks
/// [Pi_f,MV], [Pi_f,M], [Pi_i,U], [Pi_i,VU] in that order.
pub const TABLE_ONE: [(&str, [bool; 4]); 8] = [
    ("HHT", [true, false, true, false]),
    ("THH", [false, true, false, true]),
    ("HTH", [false, false, false, false]),
    ("TTH", [true, true, false, false]),
    ("HTT", [false, false, true, true]),
    ("THT", [false, true, true, false]),
    ("HHH", [true, false, false, true]),
    ("TTT", [true, true, true, true]),
];

/// Single-qubit circuit for an operator word such as "HTH". The word is read
/// as an operator product, so its rightmost letter acts first.
pub fn word_circuit(word: &str) -> Result<Circuit, DecompositionError> {
    let gates = word
        .chars()
        .rev()
        .map(|ch| match ch {
            'H' => Ok(Gate::H(0)),
            'T' => Ok(Gate::T(0)),
            other => Err(DecompositionError::WordLetter(other)),
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Circuit::new(1, gates)?)
}

/// Two-qubit index k -> (alpha, beta) single-qubit labels (0 = down).
pub fn split_index(k: usize) -> (usize, usize) {
    (k >> 1, k & 1)
}

fn product_residual(joint: &KdqTable, a: &KdqTable, b: &KdqTable) -> f64 {
    let mut worst: f64 = 0.0;
    for i in 0..4 {
        for f in 0..4 {
            let (ai, bi) = split_index(i);
            let (af, bf) = split_index(f);
            let want: C64 = a.get(ai, af) * b.get(bi, bf);
            worst = worst.max((joint.get(i, f) - want).norm());
        }
    }
    worst
}

/// max_if |q^{U x V}(sigma x tau) - q^U(sigma) q^V(tau)| for single-qubit
/// inputs; `h` is the single-qubit Hamiltonian.
pub fn factorization_check(
    u: &CMatrix,
    v: &CMatrix,
    sigma: &DensityMatrix,
    tau: &DensityMatrix,
    h: &Hamiltonian,
) -> Result<f64, DecompositionError> {
    if u.shape() != (2, 2) || v.shape() != (2, 2) || sigma.dim() != 2 || tau.dim() != 2 || h.dim() != 2 {
        return Err(DecompositionError::FactorShape);
    }
    let h2 = build_hamiltonian(2, h.energy_scale())?;
    let joint = kdq_table(&u.kron(v), &sigma.product(tau), &h2)?;
    Ok(product_residual(&joint, &kdq_table(u, sigma, h)?, &kdq_table(v, tau, h)?))
}

/// Same residual for a general two-qubit input, compared against the tables
/// of its reduced states. Large for correlated inputs.
pub fn factorization_residual(
    u: &CMatrix,
    v: &CMatrix,
    rho: &DensityMatrix,
    h: &Hamiltonian,
) -> Result<f64, DecompositionError> {
    if u.shape() != (2, 2) || v.shape() != (2, 2) || rho.dim() != 4 || h.dim() != 2 {
        return Err(DecompositionError::FactorShape);
    }
    let h2 = build_hamiltonian(2, h.energy_scale())?;
    let joint = kdq_table(&u.kron(v), rho, &h2)?;
    let sigma = partial_trace(rho, 2, 2, true)?;
    let tau = partial_trace(rho, 2, 2, false)?;
    Ok(product_residual(&joint, &kdq_table(u, &sigma, h)?, &kdq_table(v, &tau, h)?))
}

/// Whether U yields real, nonnegative KDQs on `trials` random states.
pub fn classicality_check(u: &CMatrix, h: &Hamiltonian, trials: usize, seed: u64) -> Result<bool, DecompositionError> {
    for k in 0..trials {
        let rho = random_density(&mut rng_for(seed, k as u64), h.dim());
        let t = kdq_table(u, &rho, h)?;
        let bad = t
            .entries()
            .as_slice()
            .iter()
            .any(|z| z.im.abs() > 1e-10 || z.re < -1e-10);
        if bad {
            return Ok(false);
        }
    }
    Ok(true)
}
