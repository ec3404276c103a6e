//! Gate set, circuits and their embedding into the L-qubit space.
//!
//! Circuits list gates in application order: `gates[0]` acts first, so the
//! circuit unitary is `U_N ... U_2 U_1` with `U_1 = gates[0]`.

pub mod parser;

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_4};

use thiserror::Error;

use crate::linalg::{c, r, CMatrix, C64, I, ONE, ZERO};

pub use parser::{parse_circuit, placeholders, substitute, to_text, ParseError, Program, StateSpec};

pub const UNITARY_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GateError {
    #[error("qubit {qubit} out of range for {num_qubits} qubits")]
    QubitOutOfRange { qubit: usize, num_qubits: usize },
    #[error("control equals target")]
    ControlEqualsTarget,
    #[error("repeated target qubit {0}")]
    RepeatedTarget(usize),
    #[error("rotation axis has zero length")]
    ZeroAxis,
    #[error("custom gate matrix is not unitary")]
    NotUnitary,
    #[error("custom gate on {targets} qubits needs a {dim}x{dim} matrix")]
    CustomShape { targets: usize, dim: usize },
    #[error("step {j} out of range for a circuit of {n} gates")]
    StepOutOfRange { j: usize, n: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub enum Gate {
    H(usize),
    T(usize),
    Phase { target: usize, phi: f64 },
    Cnot { control: usize, target: usize },
    Rot { target: usize, theta: f64, axis: [f64; 3] },
    Custom { matrix: CMatrix, targets: Vec<usize> },
}

impl Gate {
    /// Rotation with the axis rescaled to unit length. Axes already unit to
    /// rounding are kept bit for bit so that text output round-trips.
    pub fn rotation(target: usize, theta: f64, axis: [f64; 3]) -> Result<Gate, GateError> {
        let norm = axis.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm == 0.0 || !norm.is_finite() {
            return Err(GateError::ZeroAxis);
        }
        let axis = if (norm - 1.0).abs() <= 4.0 * f64::EPSILON {
            axis
        } else {
            axis.map(|x| x / norm)
        };
        Ok(Gate::Rot { target, theta, axis })
    }

    pub fn custom(matrix: CMatrix, targets: Vec<usize>) -> Result<Gate, GateError> {
        let dim = 1usize << targets.len();
        if matrix.shape() != (dim, dim) {
            return Err(GateError::CustomShape {
                targets: targets.len(),
                dim,
            });
        }
        if !matrix.is_unitary(UNITARY_TOL) {
            return Err(GateError::NotUnitary);
        }
        Ok(Gate::Custom { matrix, targets })
    }

    pub fn qubits(&self) -> Vec<usize> {
        match self {
            Gate::H(q) | Gate::T(q) => vec![*q],
            Gate::Phase { target, .. } | Gate::Rot { target, .. } => vec![*target],
            Gate::Cnot { control, target } => vec![*control, *target],
            Gate::Custom { targets, .. } => targets.clone(),
        }
    }

    pub fn validate(&self, num_qubits: usize) -> Result<(), GateError> {
        let qs = self.qubits();
        for (k, &q) in qs.iter().enumerate() {
            if q >= num_qubits {
                return Err(GateError::QubitOutOfRange { qubit: q, num_qubits });
            }
            if qs[..k].contains(&q) {
                return Err(match self {
                    Gate::Cnot { .. } => GateError::ControlEqualsTarget,
                    _ => GateError::RepeatedTarget(q),
                });
            }
        }
        if let Gate::Custom { matrix, targets } = self {
            Gate::custom(matrix.clone(), targets.clone())?;
        }
        Ok(())
    }

    /// The gate acting on its own qubits only (first listed qubit slowest).
    pub fn local_matrix(&self) -> CMatrix {
        match self {
            Gate::H(_) => hadamard(),
            Gate::T(_) => phase(FRAC_PI_4),
            Gate::Phase { phi, .. } => phase(*phi),
            Gate::Cnot { .. } => cnot(),
            Gate::Rot { theta, axis, .. } => rotation(*theta, *axis),
            Gate::Custom { matrix, .. } => matrix.clone(),
        }
    }

    pub fn symbol(&self) -> &'static str {
        match self {
            Gate::H(_) => "H",
            Gate::T(_) => "T",
            Gate::Phase { .. } => "P",
            Gate::Cnot { .. } => "CNOT",
            Gate::Rot { .. } => "R",
            Gate::Custom { .. } => "U",
        }
    }
}

pub fn pauli_x() -> CMatrix {
    CMatrix::new(2, 2, vec![ZERO, ONE, ONE, ZERO]).unwrap()
}

pub fn pauli_y() -> CMatrix {
    CMatrix::new(2, 2, vec![ZERO, I, -I, ZERO]).unwrap()
}

/// Z|up> = +|up>; with |down> stored first this is diag(-1, 1).
pub fn pauli_z() -> CMatrix {
    CMatrix::from_diag(&[r(-1.0), ONE])
}

/// (X + Z)/sqrt2 in stored order.
pub fn hadamard() -> CMatrix {
    let s = FRAC_1_SQRT_2;
    CMatrix::from_real(2, 2, &[-s, s, s, s]).unwrap()
}

/// |up><up| + e^{i phi}|down><down|.
pub fn phase(phi: f64) -> CMatrix {
    CMatrix::from_diag(&[C64::from_polar(1.0, phi), ONE])
}

/// Flips the second qubit when the first is |down>.
pub fn cnot() -> CMatrix {
    CMatrix::from_real(
        4,
        4,
        &[
            0.0, 1.0, 0.0, 0.0, //
            1.0, 0.0, 0.0, 0.0, //
            0.0, 0.0, 1.0, 0.0, //
            0.0, 0.0, 0.0, 1.0,
        ],
    )
    .unwrap()
}

/// cos(theta/2) I - i sin(theta/2) n.sigma
pub fn rotation(theta: f64, n: [f64; 3]) -> CMatrix {
    let (s, co) = (theta / 2.0).sin_cos();
    let ns = &(&pauli_x().scale_real(n[0]) + &pauli_y().scale_real(n[1])) + &pauli_z().scale_real(n[2]);
    &CMatrix::identity(2).scale_real(co) + &ns.scale(c(0.0, -s))
}

/// Embeds a gate into the 2^L space. Qubit q corresponds to bit L-1-q of the
/// basis index.
pub fn gate_matrix(g: &Gate, num_qubits: usize) -> Result<CMatrix, GateError> {
    g.validate(num_qubits)?;
    Ok(embed(&g.local_matrix(), &g.qubits(), num_qubits))
}

fn embed(local: &CMatrix, targets: &[usize], num_qubits: usize) -> CMatrix {
    let d = 1usize << num_qubits;
    let k = targets.len();
    let shifts: Vec<usize> = targets.iter().map(|&q| num_qubits - 1 - q).collect();
    let mask: usize = shifts.iter().map(|s| 1usize << s).sum();
    let sub_index = |x: usize| {
        shifts
            .iter()
            .fold(0usize, |acc, &s| (acc << 1) | ((x >> s) & 1))
    };
    let with_sub = |x: usize, a: usize| {
        shifts.iter().enumerate().fold(x & !mask, |acc, (t, &s)| {
            acc | (((a >> (k - 1 - t)) & 1) << s)
        })
    };
    let mut out = CMatrix::zeros(d, d);
    for x in 0..d {
        let a = sub_index(x);
        for a2 in 0..(1usize << k) {
            let z = local[(a2, a)];
            if z != ZERO {
                out[(with_sub(x, a2), x)] = z;
            }
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct Circuit {
    num_qubits: usize,
    gates: Vec<Gate>,
}

impl Circuit {
    pub fn new(num_qubits: usize, gates: Vec<Gate>) -> Result<Self, GateError> {
        for g in &gates {
            g.validate(num_qubits)?;
        }
        Ok(Self { num_qubits, gates })
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn dim(&self) -> usize {
        1 << self.num_qubits
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    pub fn push(&mut self, g: Gate) -> Result<(), GateError> {
        g.validate(self.num_qubits)?;
        self.gates.push(g);
        Ok(())
    }

    /// Embedded matrix of gate `gates[j]`, i.e. U_{j+1}.
    pub fn gate_unitary(&self, j: usize) -> CMatrix {
        embed(&self.gates[j].local_matrix(), &self.gates[j].qubits(), self.num_qubits)
    }

    pub fn unitary(&self) -> CMatrix {
        self.product(0..self.gates.len())
    }

    /// U_j ... U_1 (first j gates).
    pub fn prefix_unitary(&self, j: usize) -> Result<CMatrix, GateError> {
        self.check_step(j)?;
        Ok(self.product(0..j))
    }

    /// U_N ... U_{j+1} (last N - j gates).
    pub fn suffix_unitary(&self, j: usize) -> Result<CMatrix, GateError> {
        self.check_step(j)?;
        Ok(self.product(j..self.gates.len()))
    }

    /// Product of the gates with indices in `range`, later gates on the left.
    pub fn product(&self, range: std::ops::Range<usize>) -> CMatrix {
        range.fold(CMatrix::identity(self.dim()), |acc, k| &self.gate_unitary(k) * &acc)
    }

    fn check_step(&self, j: usize) -> Result<(), GateError> {
        if j > self.gates.len() {
            Err(GateError::StepOutOfRange {
                j,
                n: self.gates.len(),
            })
        } else {
            Ok(())
        }
    }
}
