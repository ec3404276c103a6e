//! Kirkwood-Dirac quasiprobabilities of energy transitions.
//!
//! For a unitary U, state rho and Hamiltonian eigenprojectors Pi_k the table
//! entry is q_if = Tr[U^dag Pi_f U Pi_i rho], row i the initial eigenstate and
//! column f the final one. Indices always refer to eigenstates, so degenerate
//! levels keep separate rows.

use serde::Serialize;
use serde_json::{json, Value};
use thiserror::Error;

use crate::linalg::{CMatrix, LinalgError, C64, ZERO};
use crate::system::{dephase_split, DensityMatrix, Hamiltonian, QubitStateParams};

pub const UNITARY_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum KdqError {
    #[error("evolution operator is not unitary (tolerance {UNITARY_TOL:e})")]
    NotUnitary,
    #[error("dimension mismatch: unitary {unitary}, state {state}, hamiltonian {hamiltonian}")]
    Dimension {
        unitary: usize,
        state: usize,
        hamiltonian: usize,
    },
    #[error("rotation axis must have unit norm (got {0})")]
    AxisNorm(f64),
    #[error("expected a {expected}x{expected} table, got {got}x{got}")]
    TableDimension { expected: usize, got: usize },
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct KdqTable {
    entries: CMatrix,
    energies: Vec<f64>,
}

impl KdqTable {
    pub fn from_parts(entries: CMatrix, energies: Vec<f64>) -> Self {
        assert_eq!(entries.rows(), energies.len());
        Self { entries, energies }
    }

    pub fn dim(&self) -> usize {
        self.energies.len()
    }

    pub fn entries(&self) -> &CMatrix {
        &self.entries
    }

    pub fn energies(&self) -> &[f64] {
        &self.energies
    }

    pub fn get(&self, i: usize, f: usize) -> C64 {
        self.entries[(i, f)]
    }

    pub fn total(&self) -> C64 {
        self.entries.as_slice().iter().sum()
    }

    /// Sum over final states for each initial state.
    pub fn row_marginals(&self) -> Vec<C64> {
        (0..self.dim()).map(|i| self.entries.row(i).iter().sum()).collect()
    }

    /// Sum over initial states for each final state.
    pub fn col_marginals(&self) -> Vec<C64> {
        (0..self.dim())
            .map(|f| (0..self.dim()).map(|i| self.entries[(i, f)]).sum())
            .collect()
    }

    pub fn to_json(&self) -> Value {
        let d = self.dim();
        let entries: Vec<Vec<Value>> = (0..d)
            .map(|i| (0..d).map(|f| complex_json(self.get(i, f))).collect())
            .collect();
        json!({
            "dim": d,
            "entries": entries,
            "row_marginals": self.row_marginals().into_iter().map(complex_json).collect::<Vec<_>>(),
            "col_marginals": self.col_marginals().into_iter().map(complex_json).collect::<Vec<_>>(),
        })
    }
}

pub fn complex_json(z: C64) -> Value {
    json!({"re": z.re, "im": z.im})
}

fn check_inputs(u: &CMatrix, rho: &DensityMatrix, h: &Hamiltonian) -> Result<(), KdqError> {
    if u.rows() != h.dim() || rho.dim() != h.dim() || !u.is_square() {
        return Err(KdqError::Dimension {
            unitary: u.rows(),
            state: rho.dim(),
            hamiltonian: h.dim(),
        });
    }
    if !u.is_unitary(UNITARY_TOL) {
        return Err(KdqError::NotUnitary);
    }
    Ok(())
}

/// Full KDQ table.
pub fn kdq_table(u: &CMatrix, rho: &DensityMatrix, h: &Hamiltonian) -> Result<KdqTable, KdqError> {
    check_inputs(u, rho, h)?;
    Ok(table_unchecked(u, rho.matrix(), h))
}

/// q_if = (rho U^dag)_{if} U_{fi} for projectors onto basis states; valid for
/// any matrix argument, which the split uses for the traceless part.
pub(crate) fn table_unchecked(u: &CMatrix, rho: &CMatrix, h: &Hamiltonian) -> KdqTable {
    let d = h.dim();
    let rho_udag = rho * &u.adjoint();
    let mut entries = CMatrix::zeros(d, d);
    for i in 0..d {
        for f in 0..d {
            entries[(i, f)] = rho_udag[(i, f)] * u[(f, i)];
        }
    }
    KdqTable::from_parts(entries, h.eigenvalues().to_vec())
}

/// Same table by literal trace evaluation with the Hamiltonian's projectors.
pub fn kdq_table_by_trace(u: &CMatrix, rho: &DensityMatrix, h: &Hamiltonian) -> Result<KdqTable, KdqError> {
    check_inputs(u, rho, h)?;
    let d = h.dim();
    let udag = u.adjoint();
    let mut entries = CMatrix::zeros(d, d);
    for f in 0..d {
        let heis = &(&udag * h.projector(f)) * u;
        for i in 0..d {
            entries[(i, f)] = (&(&heis * h.projector(i)) * rho.matrix()).trace()?;
        }
    }
    Ok(KdqTable::from_parts(entries, h.eigenvalues().to_vec()))
}

/// Margenau-Hill quasiprobabilities (real parts), row-major d x d.
pub fn mhq(t: &KdqTable) -> Vec<Vec<f64>> {
    map_entries(t, |z| z.re)
}

pub fn imag_part(t: &KdqTable) -> Vec<Vec<f64>> {
    map_entries(t, |z| z.im)
}

fn map_entries(t: &KdqTable, f: impl Fn(C64) -> f64) -> Vec<Vec<f64>> {
    (0..t.dim())
        .map(|i| (0..t.dim()).map(|k| f(t.get(i, k))).collect())
        .collect()
}

/// Re q_if = 1/2 Tr[{U^dag Pi_f U, Pi_i} rho]
pub fn mhq_via_anticommutator(
    u: &CMatrix,
    rho: &DensityMatrix,
    h: &Hamiltonian,
) -> Result<Vec<Vec<f64>>, KdqError> {
    bracket_form(u, rho, h, true)
}

/// Im q_if = 1/(2i) Tr[[U^dag Pi_f U, Pi_i] rho]
pub fn imag_via_commutator(
    u: &CMatrix,
    rho: &DensityMatrix,
    h: &Hamiltonian,
) -> Result<Vec<Vec<f64>>, KdqError> {
    bracket_form(u, rho, h, false)
}

fn bracket_form(
    u: &CMatrix,
    rho: &DensityMatrix,
    h: &Hamiltonian,
    anti: bool,
) -> Result<Vec<Vec<f64>>, KdqError> {
    check_inputs(u, rho, h)?;
    let d = h.dim();
    let udag = u.adjoint();
    let mut out = vec![vec![0.0; d]; d];
    for f in 0..d {
        let heis = &(&udag * h.projector(f)) * u;
        for (i, row) in out.iter_mut().enumerate() {
            let b = if anti {
                heis.anticommutator(h.projector(i))?
            } else {
                heis.commutator(h.projector(i))?
            };
            let tr = (&b * rho.matrix()).trace()?;
            row[f] = if anti { 0.5 * tr.re } else { 0.5 * tr.im };
        }
    }
    Ok(out)
}

/// k_if = <E_f|U|E_i>.
#[derive(Debug, Clone, PartialEq)]
pub struct TransitionAmplitudes {
    pub amplitudes: CMatrix,
}

impl TransitionAmplitudes {
    pub fn get(&self, i: usize, f: usize) -> C64 {
        self.amplitudes[(i, f)]
    }
}

pub fn transition_amplitudes(u: &CMatrix, h: &Hamiltonian) -> Result<TransitionAmplitudes, KdqError> {
    if u.rows() != h.dim() || !u.is_square() {
        return Err(KdqError::Dimension {
            unitary: u.rows(),
            state: h.dim(),
            hamiltonian: h.dim(),
        });
    }
    if !u.is_unitary(UNITARY_TOL) {
        return Err(KdqError::NotUnitary);
    }
    Ok(TransitionAmplitudes {
        amplitudes: u.transpose(),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct KdqSplit {
    pub population: KdqTable,
    pub coherent: KdqTable,
}

impl KdqSplit {
    pub fn combined(&self) -> KdqTable {
        KdqTable::from_parts(
            &self.population.entries + &self.coherent.entries,
            self.population.energies.clone(),
        )
    }
}

/// Population part |k_if|^2 lambda_ii and coherent part
/// sum_{k != i} k_kf^* k_if lambda_ik, both from transition amplitudes.
pub fn kdq_split(u: &CMatrix, rho: &DensityMatrix, h: &Hamiltonian) -> Result<KdqSplit, KdqError> {
    check_inputs(u, rho, h)?;
    let k = transition_amplitudes(u, h)?;
    let lam = rho.matrix();
    let d = h.dim();
    let mut pop = CMatrix::zeros(d, d);
    let mut coh = CMatrix::zeros(d, d);
    for i in 0..d {
        for f in 0..d {
            let kif = k.get(i, f);
            pop[(i, f)] = C64::new(kif.norm_sqr() * lam[(i, i)].re, 0.0);
            coh[(i, f)] = (0..d)
                .filter(|&m| m != i)
                .map(|m| k.get(m, f).conj() * kif * lam[(i, m)])
                .fold(ZERO, |a, b| a + b);
        }
    }
    let energies = h.eigenvalues().to_vec();
    Ok(KdqSplit {
        population: KdqTable::from_parts(pop, energies.clone()),
        coherent: KdqTable::from_parts(coh, energies),
    })
}

/// Two-point-measurement joint distribution: the KDQ of the dephased state.
pub fn tpm_distribution(u: &CMatrix, rho: &DensityMatrix, h: &Hamiltonian) -> Result<Vec<Vec<f64>>, KdqError> {
    let dephased = dephase_split(rho).dephased;
    Ok(mhq(&kdq_table(u, &dephased, h)?))
}

/// Table for an arbitrary matrix argument (extended by linearity).
pub fn kdq_table_linear(u: &CMatrix, x: &CMatrix, h: &Hamiltonian) -> Result<KdqTable, KdqError> {
    if x.shape() != (h.dim(), h.dim()) || u.shape() != (h.dim(), h.dim()) {
        return Err(KdqError::Dimension {
            unitary: u.rows(),
            state: x.rows(),
            hamiltonian: h.dim(),
        });
    }
    if !u.is_unitary(UNITARY_TOL) {
        return Err(KdqError::NotUnitary);
    }
    Ok(table_unchecked(u, x, h))
}

fn qubit_table(entries: [C64; 4], h: &Hamiltonian) -> Result<KdqTable, KdqError> {
    if h.dim() != 2 {
        return Err(KdqError::TableDimension {
            expected: 2,
            got: h.dim(),
        });
    }
    Ok(KdqTable::from_parts(
        CMatrix::new(2, 2, entries.to_vec())?,
        h.eigenvalues().to_vec(),
    ))
}

/// Closed-form table for R(theta, n) on a qubit state, with
/// f = n_x + i n_y, g = cos(theta/2) + i n_z sin(theta/2).
pub fn kdq_rotation_analytic(
    theta: f64,
    n: [f64; 3],
    params: &QubitStateParams,
    h: &Hamiltonian,
) -> Result<KdqTable, KdqError> {
    let norm = n.iter().map(|x| x * x).sum::<f64>().sqrt();
    if (norm - 1.0).abs() > 1e-12 {
        return Err(KdqError::AxisNorm(norm));
    }
    let (s, co) = (theta / 2.0).sin_cos();
    let f = C64::new(n[0], n[1]);
    let g = C64::new(co, n[2] * s);
    let p = params.p;
    let i = C64::i();
    let ge = C64::from_polar(params.gamma_abs, -params.gamma_phase);
    let gp = ge.conj();
    let fs2 = f.norm_sqr() * s * s;
    let dd = i * ge * f.conj() * g * s + (1.0 - p) * g.norm_sqr();
    let du = -i * ge * f.conj() * g * s + (1.0 - p) * fs2;
    let ud = -i * gp * f * g.conj() * s + p * fs2;
    let uu = i * gp * f * g.conj() * s + p * g.norm_sqr();
    qubit_table([dd, du, ud, uu], h)
}

/// Closed form for the Hadamard-like evolution exp(-i omega t (X+Z)/sqrt2),
/// i.e. R(2 omega t, (1,0,1)/sqrt2) written with g = cos + i sin/sqrt2.
pub fn kdq_hadamard_evolution(
    omega_t: f64,
    params: &QubitStateParams,
    h: &Hamiltonian,
) -> Result<KdqTable, KdqError> {
    let (s, co) = omega_t.sin_cos();
    let r2 = std::f64::consts::FRAC_1_SQRT_2;
    let g = C64::new(co, r2 * s);
    let p = params.p;
    let i = C64::i();
    let ge = C64::from_polar(params.gamma_abs, -params.gamma_phase);
    let gp = ge.conj();
    let half_s2 = 0.5 * s * s;
    let dd = i * r2 * ge * g * s + (1.0 - p) * g.norm_sqr();
    let du = -i * r2 * ge * g * s + (1.0 - p) * half_s2;
    let ud = -i * r2 * gp * g.conj() * s + p * half_s2;
    let uu = i * r2 * gp * g.conj() * s + p * g.norm_sqr();
    qubit_table([dd, du, ud, uu], h)
}

#[derive(Serialize)]
struct SplitJson {
    population: Value,
    coherent: Value,
}

pub fn split_json(split: &KdqSplit) -> Value {
    serde_json::to_value(SplitJson {
        population: split.population.to_json(),
        coherent: split.coherent.to_json(),
    })
    .expect("split serializes")
}
