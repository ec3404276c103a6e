//! Randomised invariant suite behind `kdqtool verify`.
//!
//! Every check draws its instances from a dedicated seeded stream, so a
//! report is reproducible from (level, seed) alone. The KDQ engine is a
//! parameter: the suite is meant to catch a broken table builder, and tests
//! feed it deliberately wrong ones.

use std::error::Error;
use std::f64::consts::{PI, TAU};

use rand::Rng;
use serde::Serialize;

use crate::decomposition::{
    commutation_screen, decomposition_identity, factorization_check, word_circuit, TABLE_ONE,
};
use crate::gates::{cnot, hadamard, parse_circuit, rotation, to_text, Program, StateSpec};
use crate::kdq::{imag_via_commutator, kdq_split, kdq_table, mhq_via_anticommutator, KdqError, KdqTable};
use crate::linalg::{CMatrix, C64};
use crate::par::{map_range, Execution};
use crate::random::{
    ginibre, random_axis, random_circuit, random_density, random_pure_state, random_qubit_params, random_unitary,
    rng_for, DrawRng,
};
use crate::system::{
    build_hamiltonian, dephase_split, effective_beta, pure_state_bloch, pure_state_pop_phase, qubit_state,
    thermal_state, DensityMatrix, Hamiltonian, QubitStateParams,
};
use crate::thermo::{
    anomaly_vectors, extractable_work, first_moment_imag_check, jarzynski, work_components, work_rotation_analytic,
    work_split, work_variance_imag, work_variance_imag_commutator,
};

/// Table builder under test.
pub type KdqEngine = fn(&CMatrix, &DensityMatrix, &Hamiltonian) -> Result<KdqTable, KdqError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Level {
    Quick,
    Full,
}

impl Level {
    pub fn draws(self) -> usize {
        match self {
            Level::Quick => 100,
            Level::Full => 10_000,
        }
    }
}

impl std::str::FromStr for Level {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "quick" => Ok(Level::Quick),
            "full" => Ok(Level::Full),
            other => Err(format!("unknown level '{other}', expected quick or full")),
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct VerifyConfig {
    pub level: Level,
    pub seed: u64,
    pub exec: Execution,
    pub engine: KdqEngine,
}

impl VerifyConfig {
    pub fn new(level: Level, seed: u64) -> Self {
        VerifyConfig {
            level,
            seed,
            exec: Execution::default(),
            engine: kdq_table,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub draws: usize,
    /// Largest deviation seen; infinite when a draw errored.
    pub worst: f64,
    pub tolerance: f64,
    pub passed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl CheckOutcome {
    pub fn line(&self) -> String {
        let status = if self.passed { "PASS" } else { "FAIL" };
        let mut s = format!(
            "{status} {:<36} worst {:.3e} (tol {:.0e}, {} draws)",
            self.name, self.worst, self.tolerance, self.draws
        );
        if let Some(e) = &self.error {
            s.push_str(&format!(": {e}"));
        }
        s
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifyReport {
    pub level: Level,
    pub seed: u64,
    pub checks: Vec<CheckOutcome>,
}

impl VerifyReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failed(&self) -> Vec<&CheckOutcome> {
        self.checks.iter().filter(|c| !c.passed).collect()
    }

    pub fn check(&self, name: &str) -> Option<&CheckOutcome> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn summary(&self) -> String {
        let mut out: Vec<String> = self.checks.iter().map(CheckOutcome::line).collect();
        let failed = self.failed().len();
        out.push(format!(
            "{} of {} checks passed",
            self.checks.len() - failed,
            self.checks.len()
        ));
        out.join("\n")
    }
}

type Outcome = Result<f64, Box<dyn Error + Send + Sync>>;
type CheckFn = fn(KdqEngine, &mut DrawRng) -> Outcome;

/// How many instances a check draws.
#[derive(Clone, Copy)]
enum Draws {
    Scaled,
    Fixed(usize),
}

struct Check {
    name: &'static str,
    tolerance: f64,
    draws: Draws,
    run: CheckFn,
}

const CHECKS: &[Check] = &[
    Check { name: "kron associativity", tolerance: 1e-13, draws: Draws::Scaled, run: kron_associativity },
    Check { name: "trace cyclicity", tolerance: 1e-13, draws: Draws::Scaled, run: trace_cyclicity },
    Check { name: "adjoint of product", tolerance: 1e-14, draws: Draws::Scaled, run: adjoint_product },
    Check { name: "thermal beta round trip", tolerance: 1e-10, draws: Draws::Scaled, run: beta_round_trip },
    Check { name: "state constructors valid", tolerance: 1e-10, draws: Draws::Scaled, run: states_valid },
    Check { name: "dephasing split exact", tolerance: 0.0, draws: Draws::Scaled, run: dephasing_exact },
    Check { name: "prefix/suffix factorization", tolerance: 1e-13, draws: Draws::Scaled, run: prefix_suffix },
    Check { name: "circuit unitarity", tolerance: 1e-10, draws: Draws::Scaled, run: circuit_unitarity },
    Check { name: "text round trip", tolerance: 1e-14, draws: Draws::Scaled, run: text_round_trip },
    Check { name: "kdq linearity", tolerance: 1e-13, draws: Draws::Scaled, run: kdq_linearity },
    Check { name: "kdq global phase", tolerance: 1e-13, draws: Draws::Scaled, run: kdq_global_phase },
    Check { name: "kdq marginals", tolerance: 1e-12, draws: Draws::Scaled, run: kdq_marginals },
    Check { name: "mhq anticommutator form", tolerance: 1e-12, draws: Draws::Scaled, run: mhq_anticommutator },
    Check { name: "imaginary commutator form", tolerance: 1e-12, draws: Draws::Scaled, run: imag_commutator },
    Check { name: "coherent part symmetry", tolerance: 1e-13, draws: Draws::Scaled, run: coherent_symmetry },
    Check { name: "hadamard pair square", tolerance: 1e-12, draws: Draws::Scaled, run: hadamard_pair_square },
    Check { name: "rotation work closed form", tolerance: 1e-12, draws: Draws::Scaled, run: rotation_work },
    Check { name: "thermal no-work bound", tolerance: 1e-12, draws: Draws::Scaled, run: thermal_no_work },
    Check { name: "jarzynski gibbs", tolerance: 1e-10, draws: Draws::Scaled, run: jarzynski_gibbs },
    Check { name: "jarzynski coherent correction", tolerance: 1e-12, draws: Draws::Scaled, run: jarzynski_coherent },
    Check { name: "qubit positive work needs coherence", tolerance: 0.0, draws: Draws::Scaled, run: qubit_implication },
    Check { name: "double weight of (0,3)", tolerance: 1e-12, draws: Draws::Scaled, run: double_weight },
    Check { name: "first moment imaginary part", tolerance: 1e-12, draws: Draws::Scaled, run: first_moment },
    Check { name: "variance imaginary forms", tolerance: 1e-12, draws: Draws::Scaled, run: variance_forms },
    Check { name: "gap-sum telescoping", tolerance: 1e-12, draws: Draws::Scaled, run: telescoping },
    Check { name: "product factorization", tolerance: 1e-12, draws: Draws::Scaled, run: product_factorization },
    Check { name: "cnot classicality", tolerance: 1e-12, draws: Draws::Scaled, run: cnot_classicality },
    Check { name: "table I pattern", tolerance: 0.0, draws: Draws::Fixed(1), run: table_one },
    Check { name: "HTH minimality", tolerance: 0.0, draws: Draws::Fixed(1), run: hth_minimality },
];

pub fn check_names() -> Vec<&'static str> {
    CHECKS.iter().map(|c| c.name).collect()
}

pub fn run_verification(cfg: &VerifyConfig) -> VerifyReport {
    let checks = CHECKS
        .iter()
        .enumerate()
        .map(|(idx, check)| {
            let draws = match check.draws {
                Draws::Scaled => cfg.level.draws(),
                Draws::Fixed(n) => n,
            };
            let results = map_range(cfg.exec, draws, |k| {
                let mut rng = rng_for(cfg.seed, ((idx as u64) << 32) | k as u64);
                (check.run)(cfg.engine, &mut rng).map_err(|e| e.to_string())
            });
            let mut worst: f64 = 0.0;
            let mut error = None;
            for r in results {
                match r {
                    Ok(x) if x.is_nan() => worst = f64::INFINITY,
                    Ok(x) => worst = worst.max(x),
                    Err(e) => {
                        worst = f64::INFINITY;
                        error.get_or_insert(e);
                    }
                }
            }
            CheckOutcome {
                name: check.name,
                draws,
                worst,
                tolerance: check.tolerance,
                passed: worst <= check.tolerance,
                error,
            }
        })
        .collect();
    VerifyReport {
        level: cfg.level,
        seed: cfg.seed,
        checks,
    }
}

fn flag(bad: bool) -> f64 {
    if bad {
        f64::INFINITY
    } else {
        0.0
    }
}

fn table_diff(a: &KdqTable, b: &KdqTable) -> f64 {
    a.entries().max_abs_diff(b.entries())
}

fn grid_diff(a: &[Vec<f64>], b: &[Vec<f64>]) -> f64 {
    a.iter()
        .flatten()
        .zip(b.iter().flatten())
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

fn random_qubits(rng: &mut DrawRng) -> usize {
    rng.random_range(1..=3)
}

/// Random (U, rho, H) on one to three qubits.
fn instance(rng: &mut DrawRng) -> Result<(CMatrix, DensityMatrix, Hamiltonian), Box<dyn Error + Send + Sync>> {
    let l = random_qubits(rng);
    let h = build_hamiltonian(l, rng.random_range(0.5..2.0))?;
    let u = random_unitary(rng, h.dim());
    let rho = random_density(rng, h.dim());
    Ok((u, rho, h))
}

fn kron_associativity(_: KdqEngine, rng: &mut DrawRng) -> Outcome {
    let (a, b, c) = (ginibre(rng, 2, 2), ginibre(rng, 2, 2), ginibre(rng, 2, 2));
    Ok(a.kron(&b).kron(&c).max_abs_diff(&a.kron(&b.kron(&c))))
}

fn trace_cyclicity(_: KdqEngine, rng: &mut DrawRng) -> Outcome {
    let (a, b, c) = (ginibre(rng, 4, 4), ginibre(rng, 4, 4), ginibre(rng, 4, 4));
    Ok(((&(&a * &b) * &c).trace()? - (&(&c * &a) * &b).trace()?).norm())
}

fn adjoint_product(_: KdqEngine, rng: &mut DrawRng) -> Outcome {
    let (a, b) = (ginibre(rng, 4, 4), ginibre(rng, 4, 4));
    Ok((&a * &b).adjoint().max_abs_diff(&(&b.adjoint() * &a.adjoint())))
}

fn beta_round_trip(_: KdqEngine, rng: &mut DrawRng) -> Outcome {
    let h = build_hamiltonian(1, 1.0)?;
    let beta = rng.random_range(-5.0..=5.0);
    Ok((effective_beta(&thermal_state(&h, beta)?, &h)? - beta).abs())
}

fn state_defect(rho: &DensityMatrix) -> Outcome {
    let m = rho.matrix();
    let herm = m.max_abs_diff(&m.adjoint());
    let trace = (m.trace()? - C64::new(1.0, 0.0)).norm();
    let min_eig = m.hermitian_eigenvalues()?.into_iter().fold(f64::INFINITY, f64::min);
    Ok(herm.max(trace).max(-min_eig))
}

fn states_valid(_: KdqEngine, rng: &mut DrawRng) -> Outcome {
    let l = random_qubits(rng);
    let d = 1 << l;
    let h = build_hamiltonian(l, 1.0)?;
    let states = [
        random_density(rng, d),
        random_pure_state(rng, d),
        qubit_state(random_qubit_params(rng))?,
        pure_state_bloch(rng.random_range(0.0..PI), rng.random_range(0.0..TAU)),
        pure_state_pop_phase(rng.random::<f64>(), rng.random_range(0.0..TAU))?,
        thermal_state(&h, rng.random_range(-5.0..5.0))?,
    ];
    let mut worst: f64 = 0.0;
    for s in &states {
        worst = worst.max(state_defect(s)?);
    }
    Ok(worst)
}

fn dephasing_exact(_: KdqEngine, rng: &mut DrawRng) -> Outcome {
    let l = random_qubits(rng);
    let h = build_hamiltonian(l, 1.0)?;
    let rho = random_density(rng, h.dim());
    let split = dephase_split(&rho);
    let comm = split.dephased.matrix().commutator(&h.matrix())?.max_abs();
    let diag = split.coherent.diagonal().iter().map(|z| z.norm()).fold(0.0, f64::max);
    Ok(comm.max(diag))
}

fn random_instance_circuit(rng: &mut DrawRng, max_qubits: usize, max_len: usize) -> crate::gates::Circuit {
    let l = rng.random_range(1..=max_qubits);
    let n = rng.random_range(1..=max_len);
    random_circuit(rng, l, n)
}

fn prefix_suffix(_: KdqEngine, rng: &mut DrawRng) -> Outcome {
    let c = random_instance_circuit(rng, 3, 8);
    let u = c.unitary();
    let mut worst: f64 = 0.0;
    for j in 0..=c.len() {
        worst = worst.max(u.max_abs_diff(&(&c.suffix_unitary(j)? * &c.prefix_unitary(j)?)));
    }
    Ok(worst)
}

fn circuit_unitarity(_: KdqEngine, rng: &mut DrawRng) -> Outcome {
    let c = random_instance_circuit(rng, 3, 8);
    let u = c.unitary();
    Ok((&u.adjoint() * &u).max_abs_diff(&CMatrix::identity(c.dim())))
}

fn random_spec(rng: &mut DrawRng, qubits: usize) -> StateSpec {
    let factor = |rng: &mut DrawRng| {
        let p = random_qubit_params(rng);
        StateSpec::Qubit {
            p: p.p,
            gamma_abs: p.gamma_abs,
            phi: p.gamma_phase,
        }
    };
    if qubits == 1 {
        factor(rng)
    } else {
        StateSpec::Product((0..qubits).map(|_| factor(rng)).collect())
    }
}

fn text_round_trip(_: KdqEngine, rng: &mut DrawRng) -> Outcome {
    let circuit = random_instance_circuit(rng, 3, 8);
    let state = random_spec(rng, circuit.num_qubits());
    let program = Program {
        circuit,
        state,
        energy: rng.random_range(0.1..3.0),
        warnings: Vec::new(),
    };
    let first = to_text(&program);
    let reparsed = parse_circuit(&first)?;
    let second = to_text(&reparsed);
    if first != second {
        return Ok(f64::INFINITY);
    }
    let du = program.circuit.unitary().max_abs_diff(&reparsed.circuit.unitary());
    let ds = program
        .initial_state()?
        .matrix()
        .max_abs_diff(reparsed.initial_state()?.matrix());
    Ok(du.max(ds).max((program.energy - reparsed.energy).abs()))
}

fn kdq_linearity(engine: KdqEngine, rng: &mut DrawRng) -> Outcome {
    let (u, rho1, h) = instance(rng)?;
    let rho2 = random_density(rng, h.dim());
    let alpha = rng.random::<f64>();
    let mixed = rho1.mix(&rho2, alpha)?;
    let want = &engine(&u, &rho1, &h)?.entries().scale_real(alpha)
        + &engine(&u, &rho2, &h)?.entries().scale_real(1.0 - alpha);
    Ok(engine(&u, &mixed, &h)?.entries().max_abs_diff(&want))
}

fn kdq_global_phase(engine: KdqEngine, rng: &mut DrawRng) -> Outcome {
    let (u, rho, h) = instance(rng)?;
    let phase = C64::from_polar(1.0, rng.random_range(0.0..TAU));
    Ok(table_diff(&engine(&u.scale(phase), &rho, &h)?, &engine(&u, &rho, &h)?))
}

fn kdq_marginals(engine: KdqEngine, rng: &mut DrawRng) -> Outcome {
    let (u, rho, h) = instance(rng)?;
    let t = engine(&u, &rho, &h)?;
    let before = rho.populations();
    let after = rho.evolve(&u)?.populations();
    let mut worst = (t.total() - C64::new(1.0, 0.0)).norm();
    for (k, (r, c)) in t.row_marginals().iter().zip(t.col_marginals()).enumerate() {
        worst = worst.max((r - before[k]).norm()).max((c - after[k]).norm());
    }
    Ok(worst)
}

fn mhq_anticommutator(engine: KdqEngine, rng: &mut DrawRng) -> Outcome {
    let (u, rho, h) = instance(rng)?;
    let t = engine(&u, &rho, &h)?;
    let re: Vec<Vec<f64>> = (0..t.dim()).map(|i| (0..t.dim()).map(|f| t.get(i, f).re).collect()).collect();
    Ok(grid_diff(&re, &mhq_via_anticommutator(&u, &rho, &h)?))
}

fn imag_commutator(engine: KdqEngine, rng: &mut DrawRng) -> Outcome {
    let (u, rho, h) = instance(rng)?;
    let t = engine(&u, &rho, &h)?;
    let im: Vec<Vec<f64>> = (0..t.dim()).map(|i| (0..t.dim()).map(|f| t.get(i, f).im).collect()).collect();
    Ok(grid_diff(&im, &imag_via_commutator(&u, &rho, &h)?))
}

fn random_rotation(rng: &mut DrawRng) -> (f64, [f64; 3], CMatrix) {
    let theta = rng.random_range(0.0..TAU);
    let n = random_axis(rng);
    (theta, n, rotation(theta, n))
}

fn coherent_symmetry(_: KdqEngine, rng: &mut DrawRng) -> Outcome {
    let h = build_hamiltonian(1, 1.0)?;
    let (_, _, r) = random_rotation(rng);
    let rho = qubit_state(random_qubit_params(rng))?;
    let chi = kdq_split(&r, &rho, &h)?.coherent;
    let (uu, du) = (chi.get(1, 1), chi.get(0, 1));
    Ok((uu.re - du.re).abs().max((uu.im + du.im).abs()))
}

fn hadamard_pair_square(engine: KdqEngine, rng: &mut DrawRng) -> Outcome {
    let h1 = build_hamiltonian(1, 1.0)?;
    let h2 = build_hamiltonian(2, 1.0)?;
    let psi = pure_state_pop_phase(0.5, rng.random_range(0.0..TAU))?;
    let single = engine(&hadamard(), &psi, &h1)?;
    let pair = engine(&hadamard().kron(&hadamard()), &psi.product(&psi), &h2)?;
    Ok((pair.get(0, 3) - single.get(0, 1) * single.get(0, 1)).norm())
}

fn rotation_work(engine: KdqEngine, rng: &mut DrawRng) -> Outcome {
    let energy = rng.random_range(0.5..2.0);
    let h = build_hamiltonian(1, energy)?;
    let (theta, n, r) = random_rotation(rng);
    let params: QubitStateParams = random_qubit_params(rng);
    let table = engine(&r, &qubit_state(params)?, &h)?;
    Ok((work_rotation_analytic(theta, n, &params, energy)? - extractable_work(&table)).abs())
}

fn thermal_no_work(engine: KdqEngine, rng: &mut DrawRng) -> Outcome {
    let l = rng.random_range(1..=2);
    let h = build_hamiltonian(l, 1.0)?;
    let rho = thermal_state(&h, rng.random_range(0.0..5.0))?;
    let u = random_unitary(rng, h.dim());
    Ok(extractable_work(&engine(&u, &rho, &h)?).max(0.0))
}

fn jarzynski_gibbs(_: KdqEngine, rng: &mut DrawRng) -> Outcome {
    let l = rng.random_range(1..=2);
    let h = build_hamiltonian(l, 1.0)?;
    let beta = rng.random_range(0.0..3.0);
    let u = random_unitary(rng, h.dim());
    let report = jarzynski(&u, &thermal_state(&h, beta)?, beta, &h, false)?;
    Ok((report.expectation - 1.0).norm())
}

/// Gibbs populations with random coherences: a mixture of the Gibbs state
/// and a pure state carrying the same populations.
fn coherent_gibbs(rng: &mut DrawRng, h: &Hamiltonian, beta: f64) -> Result<DensityMatrix, Box<dyn Error + Send + Sync>> {
    let gibbs = thermal_state(h, beta)?;
    let amps: Vec<C64> = gibbs
        .populations()
        .iter()
        .map(|p| C64::from_polar(p.max(0.0).sqrt(), rng.random_range(0.0..TAU)))
        .collect();
    let pure = DensityMatrix::from_ket(&amps)?;
    Ok(gibbs.mix(&pure, rng.random::<f64>())?)
}

fn jarzynski_coherent(_: KdqEngine, rng: &mut DrawRng) -> Outcome {
    let l = rng.random_range(1..=2);
    let h = build_hamiltonian(l, 1.0)?;
    let beta = rng.random_range(0.0..2.0);
    let rho = coherent_gibbs(rng, &h, beta)?;
    let u = random_unitary(rng, h.dim());
    let report = jarzynski(&u, &rho, beta, &h, false)?;
    // Gamma = Tr[U^dag e^{-beta H} U e^{beta H} chi]
    let boltz = |s: f64| {
        CMatrix::from_diag(&h.eigenvalues().iter().map(|e| C64::new((s * e).exp(), 0.0)).collect::<Vec<_>>())
    };
    let chi = dephase_split(&rho).coherent;
    let op = &(&(&(&u.adjoint() * &boltz(-beta)) * &u) * &boltz(beta)) * &chi;
    let gamma = op.trace()?;
    Ok((report.expectation - 1.0 - gamma)
        .norm()
        .max((report.gamma_correction - gamma).norm()))
}

fn qubit_implication(engine: KdqEngine, rng: &mut DrawRng) -> Outcome {
    let h = build_hamiltonian(1, 1.0)?;
    let mut params = random_qubit_params(rng);
    if params.p > 0.5 {
        params = QubitStateParams::new(1.0 - params.p, params.gamma_abs, params.gamma_phase)?;
    }
    let rho = qubit_state(params)?;
    let (_, _, r) = random_rotation(rng);
    let w = extractable_work(&engine(&r, &rho, &h)?);
    let (_, coh) = work_split(&kdq_split(&r, &rho, &h)?);
    Ok(flag(w > 1e-12 && coh <= 0.0))
}

fn double_weight(engine: KdqEngine, rng: &mut DrawRng) -> Outcome {
    let h = build_hamiltonian(2, rng.random_range(0.5..2.0))?;
    let u = random_unitary(rng, 4);
    let rho = random_density(rng, 4);
    let t = engine(&u, &rho, &h)?;
    let total: f64 = work_components(&t)?.values().sum();
    let (up, down) = anomaly_vectors(&t)?;
    Ok((total - extractable_work(&t))
        .abs()
        .max((up[2] - 2.0 * t.get(0, 3).re).abs())
        .max((down[2] - 2.0 * t.get(3, 0).re).abs()))
}

fn first_moment(engine: KdqEngine, rng: &mut DrawRng) -> Outcome {
    let (u, rho, h) = instance(rng)?;
    Ok(first_moment_imag_check(&engine(&u, &rho, &h)?).abs())
}

fn variance_forms(engine: KdqEngine, rng: &mut DrawRng) -> Outcome {
    let (u, rho, h) = instance(rng)?;
    let t = engine(&u, &rho, &h)?;
    Ok((work_variance_imag(&t) - work_variance_imag_commutator(&u, &rho, &h)?).abs())
}

fn telescoping(_: KdqEngine, rng: &mut DrawRng) -> Outcome {
    let c = random_instance_circuit(rng, 2, 6);
    let h = build_hamiltonian(c.num_qubits(), 1.0)?;
    let rho = random_density(rng, c.dim());
    Ok(decomposition_identity(&c, &rho, &h)?.residual_max)
}

fn product_factorization(_: KdqEngine, rng: &mut DrawRng) -> Outcome {
    let h = build_hamiltonian(1, 1.0)?;
    let u = random_unitary(rng, 2);
    let v = random_unitary(rng, 2);
    let sigma = random_density(rng, 2);
    let tau = random_density(rng, 2);
    Ok(factorization_check(&u, &v, &sigma, &tau, &h)?)
}

fn cnot_classicality(engine: KdqEngine, rng: &mut DrawRng) -> Outcome {
    let h = build_hamiltonian(2, 1.0)?;
    let rho = random_density(rng, 4);
    let t = engine(&cnot(), &rho, &h)?;
    let support = [(3, 3), (2, 2), (0, 1), (1, 0)];
    let mut worst: f64 = 0.0;
    for i in 0..4 {
        for f in 0..4 {
            let q = t.get(i, f);
            worst = worst.max(q.im.abs()).max(-q.re);
            if !support.contains(&(i, f)) {
                worst = worst.max(q.norm());
            }
        }
    }
    Ok(worst)
}

fn table_one(_: KdqEngine, _: &mut DrawRng) -> Outcome {
    let h = build_hamiltonian(1, 1.0)?;
    for (word, pattern) in TABLE_ONE {
        let rep = commutation_screen(&word_circuit(word)?, &h)?;
        let got: Vec<bool> = rep.checks.iter().map(|c| c.vanishes()).collect();
        if got != pattern {
            return Ok(f64::INFINITY);
        }
    }
    Ok(0.0)
}

fn hth_minimality(_: KdqEngine, _: &mut DrawRng) -> Outcome {
    let h = build_hamiltonian(1, 1.0)?;
    let mut failing = Vec::new();
    for bits in 0..8u32 {
        let word: String = (0..3).map(|k| if bits >> k & 1 == 0 { 'H' } else { 'T' }).collect();
        if !commutation_screen(&word_circuit(&word)?, &h)?.any_satisfied() {
            failing.push(word);
        }
    }
    Ok(flag(failing != ["HTH"]))
}
