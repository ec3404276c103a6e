//! Noninteracting qubit Hamiltonian, basis ordering and state constructors.
//!
//! Basis convention used everywhere in the crate: on each qubit index 0 is
//! |down> (energy -E) and index 1 is |up> (energy +E). Multi-qubit states are
//! Kronecker products with qubit 0 as the slow factor, so for two qubits the
//! indices 0..4 are |dd>, |du>, |ud>, |uu> with energies -2E, 0, 0, 2E.

use thiserror::Error;

use crate::linalg::{c, r, CMatrix, LinalgError, C64, ONE, ZERO};

pub const HERMITIAN_TOL: f64 = 1e-12;
pub const TRACE_TOL: f64 = 1e-12;
pub const PSD_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SystemError {
    #[error("number of qubits must be at least 1")]
    NoQubits,
    #[error("energy scale must be positive and finite, got {0}")]
    BadEnergy(f64),
    #[error("state is not Hermitian (deviation {0:.3e})")]
    NotHermitian(f64),
    #[error("state trace is {0}, expected 1")]
    BadTrace(f64),
    #[error("state is not positive semidefinite")]
    NotPositive,
    #[error("state dimension {got} does not match {expected}")]
    Dimension { expected: usize, got: usize },
    #[error("population p = {0} outside [0, 1]")]
    BadPopulation(f64),
    #[error("coherence |gamma| = {gamma} exceeds sqrt(p(1-p)) = {bound}")]
    CoherenceBound { gamma: f64, bound: f64 },
    #[error("{0}")]
    Invalid(String),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

#[derive(Debug, Clone)]
pub struct Hamiltonian {
    num_qubits: usize,
    energy_scale: f64,
    eigenvalues: Vec<f64>,
    projectors: Vec<CMatrix>,
    labels: Vec<String>,
}

impl Hamiltonian {
    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn energy_scale(&self) -> f64 {
        self.energy_scale
    }

    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn projectors(&self) -> &[CMatrix] {
        &self.projectors
    }

    pub fn projector(&self, k: usize) -> &CMatrix {
        &self.projectors[k]
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn matrix(&self) -> CMatrix {
        CMatrix::from_diag(&self.eigenvalues.iter().map(|&e| r(e)).collect::<Vec<_>>())
    }
}

/// H = E * sum_j Z_j on `num_qubits` qubits.
pub fn build_hamiltonian(num_qubits: usize, energy: f64) -> Result<Hamiltonian, SystemError> {
    if num_qubits == 0 {
        return Err(SystemError::NoQubits);
    }
    if !(energy.is_finite() && energy > 0.0) {
        return Err(SystemError::BadEnergy(energy));
    }
    let d = 1usize << num_qubits;
    let mut eigenvalues = Vec::with_capacity(d);
    let mut labels = Vec::with_capacity(d);
    let mut projectors = Vec::with_capacity(d);
    for k in 0..d {
        let ups = k.count_ones() as f64;
        eigenvalues.push(energy * (2.0 * ups - num_qubits as f64));
        labels.push(
            (0..num_qubits)
                .map(|q| if k >> (num_qubits - 1 - q) & 1 == 1 { 'u' } else { 'd' })
                .collect(),
        );
        let mut p = CMatrix::zeros(d, d);
        p[(k, k)] = ONE;
        projectors.push(p);
    }
    Ok(Hamiltonian {
        num_qubits,
        energy_scale: energy,
        eigenvalues,
        projectors,
        labels,
    })
}

/// Validated density matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix(CMatrix);

impl DensityMatrix {
    pub fn new(m: CMatrix) -> Result<Self, SystemError> {
        if !m.is_square() {
            return Err(SystemError::Linalg(LinalgError::NotSquare {
                op: "density_matrix",
                rows: m.rows(),
                cols: m.cols(),
            }));
        }
        let herm = m.max_abs_diff(&m.adjoint());
        if herm > HERMITIAN_TOL {
            return Err(SystemError::NotHermitian(herm));
        }
        let tr = m.trace()?;
        if (tr - ONE).norm() > TRACE_TOL {
            return Err(SystemError::BadTrace(tr.re));
        }
        if !m.is_psd(PSD_TOL) {
            return Err(SystemError::NotPositive);
        }
        Ok(Self(m))
    }

    pub fn from_ket(psi: &[C64]) -> Result<Self, SystemError> {
        let norm = psi.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 || !norm.is_finite() {
            return Err(SystemError::Invalid("zero or non-finite ket".into()));
        }
        let v: Vec<C64> = psi.iter().map(|&z| z / norm).collect();
        Self::new(CMatrix::outer(&v))
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.rows()
    }

    pub fn populations(&self) -> Vec<f64> {
        self.0.diagonal().iter().map(|z| z.re).collect()
    }

    pub fn evolve(&self, u: &CMatrix) -> Result<Self, SystemError> {
        let m = u.matmul(&self.0)?.matmul(&u.adjoint())?;
        Ok(Self(hermitize(&m)))
    }

    /// sigma (x) tau, sigma on the slow (earlier) qubits.
    pub fn product(&self, other: &DensityMatrix) -> DensityMatrix {
        DensityMatrix(self.0.kron(&other.0))
    }

    /// Convex mixture alpha*self + (1-alpha)*other.
    pub fn mix(&self, other: &DensityMatrix, alpha: f64) -> Result<Self, SystemError> {
        let m = &self.0.scale_real(alpha) + &other.0.scale_real(1.0 - alpha);
        Self::new(m)
    }
}

// Removes the antihermitian rounding residue produced by U rho U^dagger.
fn hermitize(m: &CMatrix) -> CMatrix {
    (m + &m.adjoint()).scale_real(0.5)
}

/// Reduced state of a two-factor system of dimensions (d_a, d_b); `keep_first`
/// selects which factor survives.
pub fn partial_trace(
    rho: &DensityMatrix,
    d_a: usize,
    d_b: usize,
    keep_first: bool,
) -> Result<DensityMatrix, SystemError> {
    if d_a * d_b != rho.dim() {
        return Err(SystemError::Dimension {
            expected: d_a * d_b,
            got: rho.dim(),
        });
    }
    let m = rho.matrix();
    let out = if keep_first {
        let mut out = CMatrix::zeros(d_a, d_a);
        for a in 0..d_a {
            for a2 in 0..d_a {
                out[(a, a2)] = (0..d_b).map(|b| m[(a * d_b + b, a2 * d_b + b)]).sum();
            }
        }
        out
    } else {
        let mut out = CMatrix::zeros(d_b, d_b);
        for b in 0..d_b {
            for b2 in 0..d_b {
                out[(b, b2)] = (0..d_a).map(|a| m[(a * d_b + b, a * d_b + b2)]).sum();
            }
        }
        out
    };
    DensityMatrix::new(out)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QubitStateParams {
    /// Excited-state population.
    pub p: f64,
    pub gamma_abs: f64,
    /// Phase of gamma = <up|rho|down>.
    pub gamma_phase: f64,
}

impl QubitStateParams {
    pub fn new(p: f64, gamma_abs: f64, gamma_phase: f64) -> Result<Self, SystemError> {
        let params = Self {
            p,
            gamma_abs,
            gamma_phase,
        };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<(), SystemError> {
        if !(0.0..=1.0).contains(&self.p) {
            return Err(SystemError::BadPopulation(self.p));
        }
        let bound = (self.p * (1.0 - self.p)).sqrt();
        if !(self.gamma_abs >= 0.0) || self.gamma_abs > bound + 1e-12 || !self.gamma_phase.is_finite() {
            return Err(SystemError::CoherenceBound {
                gamma: self.gamma_abs,
                bound,
            });
        }
        Ok(())
    }

    pub fn gamma(&self) -> C64 {
        C64::from_polar(self.gamma_abs, self.gamma_phase)
    }
}

/// Qubit state with populations (1-p, p) and coherence gamma = lambda_{up,down}.
pub fn qubit_state(params: QubitStateParams) -> Result<DensityMatrix, SystemError> {
    params.validate()?;
    let g = params.gamma();
    let m = CMatrix::new(2, 2, vec![r(1.0 - params.p), g.conj(), g, r(params.p)])?;
    DensityMatrix::new(m)
}

/// cos(theta/2)|down> + e^{i phi} sin(theta/2)|up>.
pub fn pure_state_bloch(theta: f64, phi: f64) -> DensityMatrix {
    let psi = [r((theta / 2.0).cos()), C64::from_polar((theta / 2.0).sin(), phi)];
    DensityMatrix(hermitize(&CMatrix::outer(&psi)))
}

/// sqrt(p)|up> + e^{i phi} sqrt(1-p)|down>.
pub fn pure_state_pop_phase(p: f64, phi: f64) -> Result<DensityMatrix, SystemError> {
    if !(0.0..=1.0).contains(&p) {
        return Err(SystemError::BadPopulation(p));
    }
    let psi = [C64::from_polar((1.0 - p).sqrt(), phi), r(p.sqrt())];
    Ok(DensityMatrix(hermitize(&CMatrix::outer(&psi))))
}

#[derive(Debug, Clone)]
pub struct StateSplit {
    pub dephased: DensityMatrix,
    pub coherent: CMatrix,
}

/// rho = Delta(rho) + chi in the energy eigenbasis.
pub fn dephase_split(rho: &DensityMatrix) -> StateSplit {
    let m = rho.matrix();
    let d = rho.dim();
    let mut dephased = CMatrix::zeros(d, d);
    let mut coherent = m.clone();
    for k in 0..d {
        dephased[(k, k)] = r(m[(k, k)].re);
        coherent[(k, k)] = ZERO;
    }
    StateSplit {
        dephased: DensityMatrix(dephased),
        coherent,
    }
}

/// Gibbs state e^{-beta H}/Z, evaluated with a shifted exponent.
pub fn thermal_state(h: &Hamiltonian, beta: f64) -> Result<DensityMatrix, SystemError> {
    if !beta.is_finite() {
        return Err(SystemError::Invalid(format!("beta must be finite, got {beta}")));
    }
    let exps: Vec<f64> = h.eigenvalues().iter().map(|&e| -beta * e).collect();
    let top = exps.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let weights: Vec<f64> = exps.iter().map(|x| (x - top).exp()).collect();
    let z: f64 = weights.iter().sum();
    let diag: Vec<C64> = weights.iter().map(|w| r(w / z)).collect();
    Ok(DensityMatrix(CMatrix::from_diag(&diag)))
}

/// Inverse temperature of a diagonal qubit state.
pub fn effective_beta(rho: &DensityMatrix, h: &Hamiltonian) -> Result<f64, SystemError> {
    if h.num_qubits() != 1 || rho.dim() != 2 {
        return Err(SystemError::Invalid("effective_beta needs a single qubit".into()));
    }
    let m = rho.matrix();
    if m[(0, 1)].norm() > HERMITIAN_TOL {
        return Err(SystemError::Invalid("effective_beta needs a diagonal state".into()));
    }
    let p = m[(1, 1)].re;
    if p <= 0.0 || p >= 1.0 {
        return Err(SystemError::Invalid(format!("population {p} has infinite beta")));
    }
    let ev = h.eigenvalues();
    Ok(-(p / (1.0 - p)).ln() / (ev[1] - ev[0]))
}

/// Shorthand used by tests and the parser for |ket> literals.
pub fn ket(amplitudes: &[(f64, f64)]) -> Vec<C64> {
    amplitudes.iter().map(|&(a, b)| c(a, b)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, FRAC_PI_3, PI};

    fn assert_valid(rho: &DensityMatrix) {
        let m = rho.matrix();
        assert!(m.is_hermitian(HERMITIAN_TOL));
        assert!((m.trace().unwrap() - ONE).norm() <= TRACE_TOL);
        assert!(m.is_psd(PSD_TOL));
    }

    #[test]
    fn hamiltonian_spectra() {
        assert_eq!(build_hamiltonian(1, 1.0).unwrap().eigenvalues(), &[-1.0, 1.0]);
        assert_eq!(build_hamiltonian(2, 1.0).unwrap().eigenvalues(), &[-2.0, 0.0, 0.0, 2.0]);
        let h3 = build_hamiltonian(3, 2.0).unwrap();
        // kron order
        assert_eq!(h3.eigenvalues(), &[-6.0, -2.0, -2.0, 2.0, -2.0, 2.0, 2.0, 6.0]);
        let mut sorted = h3.eigenvalues().to_vec();
        sorted.sort_by(f64::total_cmp);
        assert_eq!(sorted, vec![-6.0, -2.0, -2.0, -2.0, 2.0, 2.0, 2.0, 6.0]);
        assert_eq!(h3.labels()[1], "ddu");
        assert!(matches!(build_hamiltonian(0, 1.0), Err(SystemError::NoQubits)));
        assert!(matches!(build_hamiltonian(1, 0.0), Err(SystemError::BadEnergy(_))));
    }

    #[test]
    fn hamiltonian_matches_z_sum_and_projectors_resolve_identity() {
        let z = CMatrix::from_diag(&[r(-1.0), r(1.0)]);
        let i2 = CMatrix::identity(2);
        let zsum = &z.kron(&i2) + &i2.kron(&z);
        let h = build_hamiltonian(2, 1.5).unwrap();
        assert!(h.matrix().approx_eq(&zsum.scale_real(1.5), 0.0));
        let mut total = CMatrix::zeros(4, 4);
        for (k, pk) in h.projectors().iter().enumerate() {
            total = &total + pk;
            for (l, pl) in h.projectors().iter().enumerate() {
                let prod = pk * pl;
                let want = if k == l { pk.clone() } else { CMatrix::zeros(4, 4) };
                assert_eq!(prod, want);
            }
        }
        assert_eq!(total, CMatrix::identity(4));
    }

    #[test]
    fn qubit_state_examples() {
        let rho = qubit_state(QubitStateParams::new(0.5, 0.5, PI).unwrap()).unwrap();
        let minus = DensityMatrix::from_ket(&[r(-FRAC_1_SQRT_2), r(FRAC_1_SQRT_2)]).unwrap();
        assert!(rho.matrix().approx_eq(minus.matrix(), 1e-15));

        let ground = qubit_state(QubitStateParams::new(0.0, 0.0, 1.3).unwrap()).unwrap();
        assert_eq!(ground.matrix().diagonal(), vec![ONE, ZERO]);

        assert!(matches!(
            QubitStateParams::new(0.3, 0.5, 0.0),
            Err(SystemError::CoherenceBound { .. })
        ));
    }

    #[test]
    fn bloch_examples() {
        let rho = pure_state_bloch(0.0, 2.0);
        assert!(rho.matrix().approx_eq(&CMatrix::from_diag(&[ONE, ZERO]), 1e-16));

        let rho = pure_state_bloch(FRAC_PI_2, FRAC_PI_2);
        assert!((rho.populations()[1] - 0.5).abs() < 1e-15);
        assert!((rho.matrix()[(1, 0)].norm() - 0.5).abs() < 1e-15);

        let rho = pure_state_bloch(FRAC_PI_3, 0.0);
        assert!((rho.populations()[1] - 0.25).abs() < 1e-15);
        assert!((rho.populations()[0] - 0.75).abs() < 1e-15);
        assert_valid(&rho);
    }

    #[test]
    fn pop_phase_examples() {
        let rho = pure_state_pop_phase(1.0, 0.4).unwrap();
        assert!(rho.matrix().approx_eq(&CMatrix::from_diag(&[ZERO, ONE]), 1e-16));

        let rho = pure_state_pop_phase(0.5, 0.0).unwrap();
        assert!((rho.matrix()[(1, 0)] - r(0.5)).norm() < 1e-15);

        // lambda_ud = psi_u psi_d^*
        let rho = pure_state_pop_phase(0.5, FRAC_PI_2).unwrap();
        assert!((rho.matrix()[(1, 0)] - c(0.0, -0.5)).norm() < 1e-15);

        assert!(pure_state_pop_phase(1.2, 0.0).is_err());
    }

    #[test]
    fn dephase_split_examples() {
        let rho = thermal_state(&build_hamiltonian(2, 1.0).unwrap(), 0.7).unwrap();
        assert_eq!(dephase_split(&rho).coherent.max_abs(), 0.0);

        let rho = qubit_state(QubitStateParams::new(0.5, 0.5, PI).unwrap()).unwrap();
        let split = dephase_split(&rho);
        assert!(split.dephased.matrix().approx_eq(&CMatrix::identity(2).scale_real(0.5), 1e-16));
        let off = CMatrix::from_real(2, 2, &[0.0, -0.5, -0.5, 0.0]).unwrap();
        assert!(split.coherent.approx_eq(&off, 1e-16));

        let sigma = pure_state_bloch(1.0, 0.3);
        let tau = pure_state_bloch(2.0, -1.1);
        let lhs = dephase_split(&sigma.product(&tau)).dephased;
        let rhs = dephase_split(&sigma).dephased.product(&dephase_split(&tau).dephased);
        assert!(lhs.matrix().approx_eq(rhs.matrix(), 1e-15));

        let recombined = &split.dephased.matrix().clone() + &split.coherent;
        assert_eq!(&recombined, rho.matrix());
    }

    #[test]
    fn thermal_examples() {
        let h1 = build_hamiltonian(1, 1.0).unwrap();
        let h2 = build_hamiltonian(2, 1.0).unwrap();
        assert!(thermal_state(&h2, 0.0)
            .unwrap()
            .matrix()
            .approx_eq(&CMatrix::identity(4).scale_real(0.25), 1e-16));

        let cold = thermal_state(&h1, 50.0).unwrap();
        assert!(1.0 - cold.populations()[0] < 1e-20 + f64::EPSILON);

        let p = (-1.0f64).exp() / ((-1.0f64).exp() + 1.0f64.exp());
        let warm = thermal_state(&h1, 1.0).unwrap();
        assert!((warm.populations()[1] - p).abs() < 1e-15);
        assert_valid(&warm);
    }

    #[test]
    fn effective_beta_examples() {
        let h = build_hamiltonian(1, 1.0).unwrap();
        let half = qubit_state(QubitStateParams::new(0.5, 0.0, 0.0).unwrap()).unwrap();
        assert_eq!(effective_beta(&half, &h).unwrap(), 0.0);
        let cool = qubit_state(QubitStateParams::new(0.2, 0.0, 0.0).unwrap()).unwrap();
        assert!(effective_beta(&cool, &h).unwrap() > 0.0);
        let p = (-1.0f64).exp() / ((-1.0f64).exp() + 1.0f64.exp());
        let rho = qubit_state(QubitStateParams::new(p, 0.0, 0.0).unwrap()).unwrap();
        assert!((effective_beta(&rho, &h).unwrap() - 1.0).abs() < 1e-12);

        let pure = qubit_state(QubitStateParams::new(1.0, 0.0, 0.0).unwrap()).unwrap();
        assert!(effective_beta(&pure, &h).is_err());
        assert!(effective_beta(&pure_state_bloch(1.0, 0.0), &h).is_err());
    }

    #[test]
    fn thermal_beta_round_trip() {
        let h = build_hamiltonian(1, 1.0).unwrap();
        for k in 0..=40 {
            let beta = -5.0 + 0.25 * k as f64;
            let rho = thermal_state(&h, beta).unwrap();
            assert!((effective_beta(&rho, &h).unwrap() - beta).abs() < 1e-10, "beta {beta}");
        }
    }

    #[test]
    fn partial_trace_of_product() {
        let sigma = pure_state_bloch(0.8, 0.2);
        let tau = qubit_state(QubitStateParams::new(0.3, 0.2, 1.0).unwrap()).unwrap();
        let joint = sigma.product(&tau);
        assert!(partial_trace(&joint, 2, 2, true).unwrap().matrix().approx_eq(sigma.matrix(), 1e-15));
        assert!(partial_trace(&joint, 2, 2, false).unwrap().matrix().approx_eq(tau.matrix(), 1e-15));
    }

    #[test]
    fn rejects_invalid_matrices() {
        let not_herm = CMatrix::new(2, 2, vec![r(0.5), c(0.0, 0.1), c(0.0, 0.1), r(0.5)]).unwrap();
        assert!(matches!(DensityMatrix::new(not_herm), Err(SystemError::NotHermitian(_))));
        let bad_trace = CMatrix::identity(2);
        assert!(matches!(DensityMatrix::new(bad_trace), Err(SystemError::BadTrace(_))));
        let negative = CMatrix::from_real(2, 2, &[0.5, 0.6, 0.6, 0.5]).unwrap();
        assert!(matches!(DensityMatrix::new(negative), Err(SystemError::NotPositive)));
    }
}
