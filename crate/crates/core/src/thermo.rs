//! Work functionals built on KDQ tables.

use std::collections::BTreeMap;

use serde::Serialize;
use serde_json::{json, Value};
use thiserror::Error;

use crate::kdq::{complex_json, kdq_split, kdq_table, KdqError, KdqSplit, KdqTable};
use crate::linalg::{CMatrix, C64, ZERO};
use crate::system::{dephase_split, thermal_state, DensityMatrix, Hamiltonian, QubitStateParams, SystemError};

/// MHQs strictly below this count as negative (anomalous).
pub const NEGATIVE_TOL: f64 = 1e-10;
pub const GIBBS_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ThermoError {
    #[error("{what} is defined for two-qubit tables only (got dimension {dim})")]
    NeedsTwoQubits { what: &'static str, dim: usize },
    #[error("dephased state differs from the Gibbs state at beta = {beta} by {deviation:.3e}")]
    NotGibbs { beta: f64, deviation: f64 },
    #[error("rotation axis must have unit norm (got {0})")]
    AxisNorm(f64),
    #[error(transparent)]
    Kdq(#[from] KdqError),
    #[error(transparent)]
    System(#[from] SystemError),
}

/// W = sum_{i != f} Re q_if (E_i - E_f).
pub fn extractable_work(t: &KdqTable) -> f64 {
    let e = t.energies();
    let mut w = 0.0;
    for i in 0..t.dim() {
        for f in 0..t.dim() {
            if i != f {
                w += t.get(i, f).re * (e[i] - e[f]);
            }
        }
    }
    w
}

/// (population part, coherent part) of the extractable work.
pub fn work_split(split: &KdqSplit) -> (f64, f64) {
    (extractable_work(&split.population), extractable_work(&split.coherent))
}

const PAIRS: [(usize, usize); 5] = [(0, 1), (0, 2), (0, 3), (1, 3), (2, 3)];

fn require_two_qubits(t: &KdqTable, what: &'static str) -> Result<(), ThermoError> {
    if t.dim() == 4 {
        Ok(())
    } else {
        Err(ThermoError::NeedsTwoQubits { what, dim: t.dim() })
    }
}

fn pair_weight(i: usize, f: usize) -> f64 {
    if (i, f) == (0, 3) {
        2.0
    } else {
        1.0
    }
}

/// W_if = 2E (1 + delta_{i0} delta_{f3}) Re(q_fi - q_if) for the five i<f
/// pairs with distinct energies; keys are "i-f".
pub fn work_components(t: &KdqTable) -> Result<BTreeMap<String, f64>, ThermoError> {
    require_two_qubits(t, "work components")?;
    let e = t.energies()[3] / 2.0;
    Ok(PAIRS
        .iter()
        .map(|&(i, f)| {
            let w = 2.0 * e * pair_weight(i, f) * (t.get(f, i).re - t.get(i, f).re);
            (format!("{i}-{f}"), w)
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AnomalyNorms {
    pub pos_up: f64,
    pub neg_up: f64,
    pub pos_down: f64,
    pub neg_down: f64,
}

fn split_norms(v: &[f64]) -> (f64, f64) {
    let (mut pos, mut neg) = (0.0, 0.0);
    for &x in v {
        if x < -NEGATIVE_TOL {
            neg += x * x;
        } else if x > 0.0 {
            pos += x * x;
        }
    }
    (pos.sqrt(), neg.sqrt())
}

/// Weighted MHQ vectors (q01, q02, 2q03, q13, q23) and their transposes,
/// split into positive and negative parts.
pub fn anomaly_vectors(t: &KdqTable) -> Result<([f64; 5], [f64; 5]), ThermoError> {
    require_two_qubits(t, "anomaly norms")?;
    let up = PAIRS.map(|(i, f)| pair_weight(i, f) * t.get(i, f).re);
    let down = PAIRS.map(|(i, f)| pair_weight(i, f) * t.get(f, i).re);
    Ok((up, down))
}

pub fn anomaly_norms(t: &KdqTable) -> Result<AnomalyNorms, ThermoError> {
    let (up, down) = anomaly_vectors(t)?;
    let (pos_up, neg_up) = split_norms(&up);
    let (pos_down, neg_down) = split_norms(&down);
    Ok(AnomalyNorms {
        pos_up,
        neg_up,
        pos_down,
        neg_down,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WorkReport {
    pub total: f64,
    pub population: f64,
    pub coherent: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub components: Option<BTreeMap<String, f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub norms: Option<AnomalyNorms>,
}

impl WorkReport {
    pub fn to_json(&self) -> Value {
        serde_json::to_value(self).expect("work report serializes")
    }
}

/// Work report; components and norms are filled in for two qubits.
pub fn work_report(u: &CMatrix, rho: &DensityMatrix, h: &Hamiltonian) -> Result<WorkReport, ThermoError> {
    let table = kdq_table(u, rho, h)?;
    let split = kdq_split(u, rho, h)?;
    let (population, coherent) = work_split(&split);
    let two = table.dim() == 4;
    Ok(WorkReport {
        total: extractable_work(&table),
        population,
        coherent,
        components: if two { Some(work_components(&table)?) } else { None },
        norms: if two { Some(anomaly_norms(&table)?) } else { None },
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct JarzynskiReport {
    pub beta: f64,
    pub expectation: C64,
    pub gamma_correction: C64,
}

impl JarzynskiReport {
    pub fn to_json(&self) -> Value {
        json!({
            "beta": self.beta,
            "expectation": complex_json(self.expectation),
            "gamma_correction": complex_json(self.gamma_correction),
        })
    }
}

fn boltzmann_weighted(t: &KdqTable, beta: f64) -> C64 {
    let e = t.energies();
    let mut acc = ZERO;
    for i in 0..t.dim() {
        for f in 0..t.dim() {
            acc += t.get(i, f) * (-beta * (e[f] - e[i])).exp();
        }
    }
    acc
}

/// <e^{-beta W}> = sum q_if e^{-beta(E_f - E_i)} and the coherent correction
/// Gamma = sum q_if(chi) e^{-beta(E_f - E_i)}.
///
/// Unless `allow_non_thermal` is set, the dephased input must be the
/// beta-Gibbs state, which is when expectation = 1 + Gamma.
pub fn jarzynski(
    u: &CMatrix,
    rho: &DensityMatrix,
    beta: f64,
    h: &Hamiltonian,
    allow_non_thermal: bool,
) -> Result<JarzynskiReport, ThermoError> {
    if !allow_non_thermal {
        let gibbs = thermal_state(h, beta)?;
        let deviation = dephase_split(rho).dephased.matrix().max_abs_diff(gibbs.matrix());
        if deviation > GIBBS_TOL {
            return Err(ThermoError::NotGibbs { beta, deviation });
        }
    }
    let table = kdq_table(u, rho, h)?;
    let split = kdq_split(u, rho, h)?;
    Ok(JarzynskiReport {
        beta,
        expectation: boltzmann_weighted(&table, beta),
        gamma_correction: boltzmann_weighted(&split.coherent, beta),
    })
}

/// Im of the second work moment: -2 sum_if E_i E_f Im q_if.
pub fn work_variance_imag(t: &KdqTable) -> f64 {
    let e = t.energies();
    let mut acc = 0.0;
    for i in 0..t.dim() {
        for f in 0..t.dim() {
            acc += e[i] * e[f] * t.get(i, f).im;
        }
    }
    -2.0 * acc
}

/// Same quantity as i Tr[[U^dag H U, H] rho].
pub fn work_variance_imag_commutator(
    u: &CMatrix,
    rho: &DensityMatrix,
    h: &Hamiltonian,
) -> Result<f64, ThermoError> {
    let hm = h.matrix();
    let heis = &(&u.adjoint() * &hm) * u;
    let comm = heis.commutator(&hm).map_err(KdqError::from)?;
    let tr = (&comm * rho.matrix()).trace().map_err(KdqError::from)?;
    Ok((C64::i() * tr).re)
}

/// sum_if Im q_if (E_i - E_f); vanishes for every table.
pub fn first_moment_imag_check(t: &KdqTable) -> f64 {
    let e = t.energies();
    let mut acc = 0.0;
    for i in 0..t.dim() {
        for f in 0..t.dim() {
            acc += t.get(i, f).im * (e[i] - e[f]);
        }
    }
    acc
}

fn unit_axis(n: [f64; 3]) -> Result<(), ThermoError> {
    let norm = n.iter().map(|x| x * x).sum::<f64>().sqrt();
    if (norm - 1.0).abs() > 1e-12 {
        return Err(ThermoError::AxisNorm(norm));
    }
    Ok(())
}

/// Closed-form rotation work W = 2E[(n_x^2 + n_y^2) s^2 - 2 Re q_du],
/// s = sin(theta/2).
pub fn work_rotation_analytic(theta: f64, n: [f64; 3], params: &QubitStateParams, energy: f64) -> Result<f64, ThermoError> {
    unit_axis(n)?;
    let (s, co) = (theta / 2.0).sin_cos();
    let f = C64::new(n[0], n[1]);
    let g = C64::new(co, n[2] * s);
    let ge = C64::from_polar(params.gamma_abs, -params.gamma_phase);
    let q_du = -C64::i() * ge * f.conj() * g * s + (1.0 - params.p) * f.norm_sqr() * s * s;
    Ok(2.0 * energy * (f.norm_sqr() * s * s - 2.0 * q_du.re))
}

/// (population, coherent) rotation work: 2E|f|^2 s^2 (2p-1) and -4E Re q_du(chi).
pub fn work_rotation_split_analytic(
    theta: f64,
    n: [f64; 3],
    params: &QubitStateParams,
    energy: f64,
) -> Result<(f64, f64), ThermoError> {
    unit_axis(n)?;
    let (s, co) = (theta / 2.0).sin_cos();
    let f = C64::new(n[0], n[1]);
    let g = C64::new(co, n[2] * s);
    let ge = C64::from_polar(params.gamma_abs, -params.gamma_phase);
    let q_du_chi = -C64::i() * ge * f.conj() * g * s;
    let pop = 2.0 * energy * f.norm_sqr() * s * s * (2.0 * params.p - 1.0);
    Ok((pop, -4.0 * energy * q_du_chi.re))
}

/// Hadamard-like evolution work (total, population, coherent) at time omega t.
pub fn work_evolution_analytic(omega_t: f64, params: &QubitStateParams, energy: f64) -> (f64, f64, f64) {
    let (s, co) = omega_t.sin_cos();
    let (sp, cp) = params.gamma_phase.sin_cos();
    let r2 = std::f64::consts::FRAC_1_SQRT_2;
    let pop = energy * (2.0 * params.p - 1.0) * s * s;
    let coh = 4.0 * energy * params.gamma_abs * r2 * (sp * co * s - r2 * cp * s * s);
    (pop + coh, pop, coh)
}
