//! Acceptance suite: thirteen numbered criteria, one PASS/FAIL line each.
//!
//! Runs without the libtest harness so the lines are always printed. The
//! process fails if any criterion fails, except those listed in
//! `KNOWN_UNATTAINABLE`, which are still evaluated and reported as FAIL.

use std::f64::consts::{FRAC_1_SQRT_2, PI, SQRT_2, TAU};
use std::process::ExitCode;
use std::time::Instant;

use rand::Rng;

use kdq_core::decomposition::{commutation_screen, decomposition_identity, factorization_check, word_circuit};
use kdq_core::figures::{figure_data, Figure};
use kdq_core::gates::{cnot, hadamard, phase, rotation, Circuit};
use kdq_core::kdq::{kdq_table, KdqTable};
use kdq_core::linalg::{CMatrix, C64};
use kdq_core::par::Execution;
use kdq_core::random::{random_circuit, random_density, random_pure_state, random_qubit_params, random_unitary, rng_for};
use kdq_core::sweep::DataTable;
use kdq_core::system::{
    build_hamiltonian, dephase_split, pure_state_bloch, qubit_state, thermal_state, DensityMatrix, Hamiltonian,
    QubitStateParams,
};
use kdq_core::thermo::{
    extractable_work, first_moment_imag_check, jarzynski, work_components, work_variance_imag,
    work_variance_imag_commutator,
};

/// Criteria whose literal statement cannot hold; see the printed analysis.
const KNOWN_UNATTAINABLE: &[usize] = &[9];

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: String) -> Outcome {
    Outcome { passed, detail }
}

/// Marginal and normalisation audit for every table the suite builds.
#[derive(Default)]
struct Audit {
    worst: f64,
    tables: usize,
}

impl Audit {
    fn table(&mut self, u: &CMatrix, rho: &DensityMatrix, h: &Hamiltonian) -> KdqTable {
        let t = kdq_table(u, rho, h).expect("valid inputs");
        self.check(&t, u, rho);
        t
    }

    fn check(&mut self, t: &KdqTable, u: &CMatrix, rho: &DensityMatrix) {
        let before = rho.populations();
        let after = rho.evolve(u).expect("unitary").populations();
        let mut worst = (t.total() - C64::new(1.0, 0.0)).norm();
        for (k, (r, c)) in t.row_marginals().iter().zip(t.col_marginals()).enumerate() {
            worst = worst.max((r - before[k]).norm()).max((c - after[k]).norm());
        }
        self.worst = self.worst.max(worst);
        self.tables += 1;
    }
}

fn h1() -> Hamiltonian {
    build_hamiltonian(1, 1.0).unwrap()
}

fn h2() -> Hamiltonian {
    build_hamiltonian(2, 1.0).unwrap()
}

fn closed_form_hadamard(p: f64, gamma: C64) -> [[C64; 2]; 2] {
    let one = C64::new(1.0, 0.0);
    [
        [(one * (1.0 - p) - gamma.conj()) / 2.0, (one * (1.0 - p) + gamma.conj()) / 2.0],
        [(one * p - gamma) / 2.0, (one * p + gamma) / 2.0],
    ]
}

fn table_vs(t: &KdqTable, want: &[[C64; 2]; 2]) -> f64 {
    let mut worst: f64 = 0.0;
    for i in 0..2 {
        for f in 0..2 {
            worst = worst.max((t.get(i, f) - want[i][f]).norm());
        }
    }
    worst
}

fn criterion_1(audit: &mut Audit) -> Outcome {
    let start = Instant::now();
    let h = h1();
    let mut worst: f64 = 0.0;
    for k in 0..100 {
        let params = random_qubit_params(&mut rng_for(1, k));
        let t = audit.table(&hadamard(), &qubit_state(params).unwrap(), &h);
        worst = worst.max(table_vs(&t, &closed_form_hadamard(params.p, params.gamma())));
    }
    let secs = start.elapsed().as_secs_f64();
    outcome(worst <= 1e-12 && secs < 1.0, format!("max deviation {worst:.2e} over 100 states, {secs:.3} s"))
}

fn criterion_2(audit: &mut Audit) -> Outcome {
    let mut worst: f64 = 0.0;
    for energy in [1.0, 2.5] {
        let h = build_hamiltonian(1, energy).unwrap();
        let rho = qubit_state(QubitStateParams::new(0.5, 0.5, PI).unwrap()).unwrap();
        let t = audit.table(&hadamard(), &rho, &h);
        let want = [[0.5, 0.0], [0.5, 0.0]];
        for i in 0..2 {
            for f in 0..2 {
                worst = worst.max((t.get(i, f) - C64::new(want[i][f], 0.0)).norm());
            }
        }
        worst = worst.max((extractable_work(&t) - energy).abs());
    }
    outcome(worst <= 1e-14, format!("W = E and q_dd = q_ud = 1/2, deviation {worst:.2e}"))
}

fn criterion_3(audit: &mut Audit) -> Outcome {
    let h = h1();
    let rho = pure_state_bloch(PI / 2.0, PI / 2.0);
    let c = word_circuit("HTH").unwrap();
    let full = audit.table(&c.unitary(), &rho, &h);
    let mut worst = (full.get(0, 1).re - (1.0 - SQRT_2) / 4.0)
        .abs()
        .max((full.get(1, 0).re - 0.25).abs());
    // per-gate tables on the intermediate states
    let h_gate = hadamard();
    let t_gate = phase(PI / 4.0);
    let rho_h = rho.evolve(&h_gate).unwrap();
    let rho_th = rho_h.evolve(&t_gate).unwrap();
    let q1 = audit.table(&h_gate, &rho, &h);
    let q2 = audit.table(&t_gate, &rho_h, &h);
    let q3 = audit.table(&h_gate, &rho_th, &h);
    worst = worst
        .max((q1.get(0, 1).re - 0.25).abs())
        .max((q1.get(1, 0).re - 0.25).abs())
        .max(q2.get(0, 1).re.abs())
        .max(q2.get(1, 0).re.abs());
    let mut last = [q3.get(0, 1).re, q3.get(1, 0).re];
    last.sort_by(f64::total_cmp);
    worst = worst
        .max((last[0] - (2.0 - SQRT_2) / 8.0).abs())
        .max((last[1] - (2.0 + SQRT_2) / 8.0).abs());
    // the decomposition report carries the same constituents
    let report = decomposition_identity(&c, &rho, &h).unwrap();
    for (g, q) in report.per_gate.iter().zip([&q1, &q2, &q3]) {
        worst = worst.max(g.constituent.entries().max_abs_diff(q.entries()));
    }
    outcome(
        worst <= 1e-12,
        format!(
            "Re q_du = {:.10}, Re q_ud = {:.10}, per-gate deviation {worst:.2e}",
            full.get(0, 1).re,
            full.get(1, 0).re
        ),
    )
}

fn criterion_4() -> Outcome {
    // Printed pattern: [Pi_f,MV]; [Pi_f,M]; [Pi_i,U]; [Pi_i,VU], true for "= 0".
    let printed = [
        ("HHT", [true, false, true, false]),
        ("THH", [false, true, false, true]),
        ("HTH", [false, false, false, false]),
        ("TTH", [true, true, false, false]),
        ("HTT", [false, false, true, true]),
        ("THT", [false, true, true, false]),
        ("HHH", [true, false, false, true]),
        ("TTT", [true, true, true, true]),
    ];
    let h = h1();
    let mut mismatches = Vec::new();
    let mut failing_all = Vec::new();
    for (word, pattern) in printed {
        let rep = commutation_screen(&word_circuit(word).unwrap(), &h).unwrap();
        let got: Vec<bool> = rep.checks.iter().map(|c| c.norms.iter().all(|&x| x <= 1e-10)).collect();
        if got != pattern {
            mismatches.push(word);
        }
        if !rep.any_satisfied() {
            failing_all.push(word);
        }
    }
    outcome(
        mismatches.is_empty() && failing_all == ["HTH"],
        format!("pattern mismatches {mismatches:?}, words failing every condition {failing_all:?}"),
    )
}

fn criterion_5(audit: &mut Audit) -> Outcome {
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    for k in 0..1000u64 {
        let mut rng = rng_for(5, k);
        let l = rng.random_range(1..=2);
        let n = rng.random_range(1..=6);
        let c: Circuit = random_circuit(&mut rng, l, n);
        let h = build_hamiltonian(l, 1.0).unwrap();
        let rho = if k % 2 == 0 {
            random_density(&mut rng, c.dim())
        } else {
            random_pure_state(&mut rng, c.dim())
        };
        let full = audit.table(&c.unitary(), &rho, &h);
        let report = decomposition_identity(&c, &rho, &h).unwrap();
        let mut mean = CMatrix::zeros(c.dim(), c.dim());
        for (j, g) in report.per_gate.iter().enumerate() {
            let rho_j = rho.evolve(&c.prefix_unitary(j).unwrap()).unwrap();
            let q_j = audit.table(&c.gate_unitary(j), &rho_j, &h);
            // full - constituent equals the gap term for this gate
            worst = worst.max((&(full.entries() - q_j.entries()) - &g.gap).max_abs());
            mean = &mean + &q_j.entries().scale_real(1.0 / n as f64);
        }
        let weighted = &mean + &report.correction.scale_real(1.0 / n as f64);
        worst = worst.max(weighted.max_abs_diff(full.entries()));
    }
    let secs = start.elapsed().as_secs_f64();
    outcome(worst <= 1e-12 && secs < 30.0, format!("max residual {worst:.2e} over 1000 circuits, {secs:.2} s"))
}

fn criterion_6(audit: &mut Audit) -> Outcome {
    let h = h1();
    let axis = [FRAC_1_SQRT_2, 0.0, FRAC_1_SQRT_2];
    let params = QubitStateParams::new(0.5, 0.5, PI / 2.0).unwrap();
    let rho = qubit_state(params).unwrap();
    let at = |wt: f64, audit: &mut Audit| audit.table(&rotation(2.0 * wt, axis), &rho, &h);
    let quarter = at(PI / 4.0, audit);
    let d1 = (quarter.get(0, 1).re - (1.0 - SQRT_2) / 8.0).abs();
    let d2 = table_vs(&at(PI / 2.0, audit), &closed_form_hadamard(params.p, params.gamma()));
    outcome(
        d1.max(d2) <= 1e-12,
        format!("Re q_du(wt = pi/4) = {:.12}, Hadamard-time deviation {d2:.2e}", quarter.get(0, 1).re),
    )
}

fn criterion_7(audit: &mut Audit) -> Outcome {
    let h = h1();
    let hh = h2();
    let mut worst: f64 = 0.0;
    for k in 0..1000 {
        let mut rng = rng_for(7, k);
        let (u, v) = (random_unitary(&mut rng, 2), random_unitary(&mut rng, 2));
        let (sigma, tau) = (random_density(&mut rng, 2), random_density(&mut rng, 2));
        worst = worst.max(factorization_check(&u, &v, &sigma, &tau, &h).unwrap());
        // independent product of the single-qubit tables
        let joint = audit.table(&u.kron(&v), &sigma.product(&tau), &hh);
        let (a, b) = (audit.table(&u, &sigma, &h), audit.table(&v, &tau, &h));
        for i in 0..4 {
            for f in 0..4 {
                let want = a.get(i >> 1, f >> 1) * b.get(i & 1, f & 1);
                worst = worst.max((joint.get(i, f) - want).norm());
            }
        }
    }
    // H x P_phi: entries with beta_i != beta_f vanish identically
    let mut pattern_ok = true;
    for k in 0..100 {
        let mut rng = rng_for(77, k);
        let phi = rng.random_range(0.0..TAU);
        let u = hadamard().kron(&phase(phi));
        let rho = random_density(&mut rng, 2).product(&random_density(&mut rng, 2));
        let t = audit.table(&u, &rho, &hh);
        for i in 0..4 {
            for f in 0..4 {
                if (i & 1) != (f & 1) && t.get(i, f) != C64::new(0.0, 0.0) {
                    pattern_ok = false;
                }
            }
        }
    }
    outcome(
        worst <= 1e-12 && pattern_ok,
        format!("max factorization residual {worst:.2e}, H x P zero pattern exact: {pattern_ok}"),
    )
}

fn criterion_8(audit: &mut Audit) -> Outcome {
    let hh = h2();
    let support = [(3, 3), (2, 2), (0, 1), (1, 0)];
    let mut worst_im: f64 = 0.0;
    let mut worst_neg: f64 = 0.0;
    let mut support_ok = true;
    for k in 0..10_000 {
        let rho = random_density(&mut rng_for(8, k), 4);
        let t = audit.table(&cnot(), &rho, &hh);
        for i in 0..4 {
            for f in 0..4 {
                let q = t.get(i, f);
                worst_im = worst_im.max(q.im.abs());
                worst_neg = worst_neg.max(-q.re);
                let inside = support.contains(&(i, f));
                if inside != (q.norm() > 1e-12) {
                    support_ok = false;
                }
            }
        }
    }
    outcome(
        worst_im <= 1e-12 && worst_neg <= 1e-12 && support_ok,
        format!("max |Im| {worst_im:.2e}, max negativity {worst_neg:.2e}, support exact: {support_ok}"),
    )
}

fn hh_q03(phi: f64, audit: &mut Audit) -> (C64, C64) {
    // (|up> + e^{i phi}|down>)/sqrt2, stored index 0 = down
    let psi = DensityMatrix::from_ket(&[C64::from_polar(FRAC_1_SQRT_2, phi), C64::new(FRAC_1_SQRT_2, 0.0)]).unwrap();
    let single = audit.table(&hadamard(), &psi, &h1());
    let pair = audit.table(&hadamard().kron(&hadamard()), &psi.product(&psi), &h2());
    (pair.get(0, 3), single.get(0, 1))
}

fn criterion_9(audit: &mut Audit) -> Outcome {
    let target = (1.0 - SQRT_2) / 16.0;
    let (q03, q_du) = hh_q03(PI / 4.0, audit);
    let dev = (q03.re - target).abs();
    let (q03_alt, _) = hh_q03(5.0 * PI / 4.0, audit);
    let square_dev = (q03 - q_du * q_du).norm();
    let mut detail = format!(
        "Re q_03 = {:.10} for the printed ket, target {target:.10}, deviation {dev:.2e}",
        q03.re
    );
    if dev > 1e-12 {
        detail.push_str(&format!(
            "; the printed ket gives q_du^H = (2+sqrt2)/8 + i sqrt2/8 so Re q_03 = (1+sqrt2)/16. \
             The quoted single-qubit values belong to phase 5pi/4, where Re q_03 = {:.10} \
             (deviation {:.2e}); q_03 = (q_du^H)^2 holds to {square_dev:.2e}",
            q03_alt.re,
            (q03_alt.re - target).abs()
        ));
    }
    outcome(dev <= 1e-12, detail)
}

/// Gibbs populations with random coherences.
fn coherent_gibbs(rng: &mut impl Rng, h: &Hamiltonian, beta: f64) -> DensityMatrix {
    let gibbs = thermal_state(h, beta).unwrap();
    let amps: Vec<C64> = gibbs
        .populations()
        .iter()
        .map(|p| C64::from_polar(p.sqrt(), rng.random_range(0.0..TAU)))
        .collect();
    gibbs.mix(&DensityMatrix::from_ket(&amps).unwrap(), rng.random::<f64>()).unwrap()
}

fn criterion_10(audit: &mut Audit) -> Outcome {
    let mut jar_dev: f64 = 0.0;
    let mut max_work = f64::NEG_INFINITY;
    for k in 0..10_000 {
        let mut rng = rng_for(10, k);
        let l = rng.random_range(1..=2);
        let h = build_hamiltonian(l, 1.0).unwrap();
        let beta = rng.random_range(0.0..3.0);
        let rho = thermal_state(&h, beta).unwrap();
        let u = random_unitary(&mut rng, h.dim());
        let rep = jarzynski(&u, &rho, beta, &h, false).unwrap();
        jar_dev = jar_dev.max((rep.expectation - 1.0).norm());
        max_work = max_work.max(extractable_work(&audit.table(&u, &rho, &h)));
    }
    let mut gamma_dev: f64 = 0.0;
    for k in 0..1000 {
        let mut rng = rng_for(1010, k);
        let l = rng.random_range(1..=2);
        let h = build_hamiltonian(l, 1.0).unwrap();
        let beta = rng.random_range(0.0..2.0);
        let rho = coherent_gibbs(&mut rng, &h, beta);
        let u = random_unitary(&mut rng, h.dim());
        let rep = jarzynski(&u, &rho, beta, &h, false).unwrap();
        // Gamma = Tr[U^dag e^{-beta H} U e^{beta H} chi]
        let boltz = |s: f64| {
            CMatrix::from_diag(&h.eigenvalues().iter().map(|e| C64::new((s * e).exp(), 0.0)).collect::<Vec<_>>())
        };
        let chi = dephase_split(&rho).coherent;
        let gamma = (&(&(&(&u.adjoint() * &boltz(-beta)) * &u) * &boltz(beta)) * &chi).trace().unwrap();
        gamma_dev = gamma_dev.max((rep.expectation - 1.0 - gamma).norm());
        audit.table(&u, &rho, &h);
    }
    outcome(
        jar_dev <= 1e-10 && max_work <= 1e-12 && gamma_dev <= 1e-12,
        format!("Gibbs |<e^-bW> - 1| {jar_dev:.2e}, max W {max_work:.2e}, 1 + Gamma deviation {gamma_dev:.2e}"),
    )
}

fn criterion_11(audit: &mut Audit) -> Outcome {
    let mut first: f64 = 0.0;
    let mut second: f64 = 0.0;
    for k in 0..1000 {
        let mut rng = rng_for(11, k);
        let l = rng.random_range(1..=3);
        let h = build_hamiltonian(l, rng.random_range(0.5..2.0)).unwrap();
        let u = random_unitary(&mut rng, h.dim());
        let rho = random_density(&mut rng, h.dim());
        let t = audit.table(&u, &rho, &h);
        first = first.max(first_moment_imag_check(&t).abs());
        // -2 sum E_i E_f Im q written out here
        let e = h.eigenvalues();
        let mut direct = 0.0;
        for i in 0..h.dim() {
            for f in 0..h.dim() {
                direct -= 2.0 * e[i] * e[f] * t.get(i, f).im;
            }
        }
        let comm = work_variance_imag_commutator(&u, &rho, &h).unwrap();
        second = second.max((direct - comm).abs()).max((work_variance_imag(&t) - comm).abs());
    }
    outcome(
        first <= 1e-12 && second <= 1e-12,
        format!("first-moment imaginary part {first:.2e}, variance forms differ by {second:.2e}"),
    )
}

fn rows_where<'a>(t: &'a DataTable, col: &str, pred: impl Fn(f64) -> bool + 'a) -> impl Iterator<Item = usize> + 'a {
    let values = t.column(col).expect("column present");
    (0..t.rows.len()).filter(move |&k| pred(values[k]))
}

fn criterion_12(audit: &mut Audit) -> Outcome {
    let start = Instant::now();
    let tables: Vec<DataTable> = Figure::ALL
        .iter()
        .map(|&f| figure_data(f, Execution::Parallel).expect("recipe runs"))
        .collect();
    let secs = start.elapsed().as_secs_f64();
    let (fig2a, fig4, fig5) = (&tables[0], &tables[3], &tables[4]);

    // Fig 2(a): negativity in the pre-Hadamard window only for complex phases
    let q = fig2a.column("re_q_0_1").unwrap();
    let wt = fig2a.column("omega_t").unwrap();
    let min_q = |phi: f64| {
        rows_where(fig2a, "phi", move |x| (x - phi).abs() < 1e-12)
            .filter(|&k| wt[k] > 0.0 && wt[k] < PI / 2.0)
            .map(|k| q[k])
            .fold(f64::INFINITY, f64::min)
    };
    let (m_half, m_zero, m_pi) = (min_q(PI / 2.0), min_q(0.0), min_q(PI));
    let fig2_ok = m_half < -1e-12 && m_zero >= -1e-12 && m_pi >= -1e-12;

    // Fig 4 and 5: positive work only in a band around pi at theta = pi/2
    let band_ok = |t: &DataTable| {
        let w = t.column("W").unwrap();
        let phi = t.column("phi").unwrap();
        let rows: Vec<usize> = rows_where(t, "theta", |x| (x - PI / 2.0).abs() < 1e-9).collect();
        let positive: Vec<usize> = rows.iter().copied().filter(|&k| w[k] > 1e-12).collect();
        !rows.is_empty()
            && !positive.is_empty()
            && positive.iter().all(|&k| phi[k] > PI / 2.0 && phi[k] < 3.0 * PI / 2.0)
    };
    let (band4, band5) = (band_ok(fig4), band_ok(fig5));

    // W_03 dominates the band-integrated components
    let w = fig5.column("W").unwrap();
    let names = ["W_0_1", "W_0_2", "W_0_3", "W_1_3", "W_2_3"];
    let integrated: Vec<f64> = names
        .iter()
        .map(|n| {
            let c = fig5.column(n).unwrap();
            (0..w.len()).filter(|&k| w[k] > 1e-12).map(|k| c[k]).sum()
        })
        .collect();
    let w03_ok = integrated.iter().enumerate().all(|(k, &x)| k == 2 || integrated[2] > x);

    // audit the tables behind Fig 5 and cross-check the component columns
    let hh = h2();
    let mut comp_dev: f64 = 0.0;
    let phis = fig5.column("phi").unwrap();
    for (k, &phi) in phis.iter().enumerate() {
        let psi = DensityMatrix::from_ket(&[C64::from_polar(FRAC_1_SQRT_2, phi), C64::new(FRAC_1_SQRT_2, 0.0)]).unwrap();
        let u = &cnot() * &hadamard().kron(&hadamard());
        let t = audit.table(&u, &psi.product(&psi), &hh);
        let comps = work_components(&t).unwrap();
        for (n, key) in names.iter().zip(["0-1", "0-2", "0-3", "1-3", "2-3"]) {
            comp_dev = comp_dev.max((fig5.column(n).unwrap()[k] - comps[key]).abs());
        }
    }

    let passed = fig2_ok && band4 && band5 && w03_ok && comp_dev <= 1e-12 && secs < 60.0;
    outcome(
        passed,
        format!(
            "fig 2a min Re q_du on (0, pi/2): {m_half:.3e} (phi = pi/2), {m_zero:.1e} (0), {m_pi:.1e} (pi); \
             band fig 4 {band4}, fig 5 {band5}; band-integrated W_03 largest {w03_ok} {integrated:.3?}; \
             recipes {secs:.2} s"
        ),
    )
}

fn main() -> ExitCode {
    let mut audit = Audit::default();
    let mut results: Vec<(usize, &str, Outcome)> = vec![
        (1, "Hadamard closed forms", criterion_1(&mut audit)),
        (2, "worked Hadamard case", criterion_2(&mut audit)),
        (3, "HTH full and per-gate MHQs", criterion_3(&mut audit)),
        (4, "commutation table", criterion_4()),
        (5, "decomposition identity", criterion_5(&mut audit)),
        (6, "Hadamard evolution point values", criterion_6(&mut audit)),
        (7, "two-qubit factorization", criterion_7(&mut audit)),
        (8, "CNOT classicality", criterion_8(&mut audit)),
        (9, "H x H anomaly value", criterion_9(&mut audit)),
        (10, "Jarzynski equality and correction", criterion_10(&mut audit)),
        (11, "moment structure", criterion_11(&mut audit)),
        (12, "figure data", criterion_12(&mut audit)),
    ];
    results.push((
        13,
        "table marginals and normalization",
        outcome(
            audit.worst <= 1e-12,
            format!("max deviation {:.2e} over {} tables", audit.worst, audit.tables),
        ),
    ));

    let mut unexpected = 0;
    for (id, name, o) in &results {
        let status = if o.passed { "PASS" } else { "FAIL" };
        let note = if !o.passed && KNOWN_UNATTAINABLE.contains(id) {
            " [unattainable as stated]"
        } else {
            ""
        };
        println!("criterion {id:>2} {status} {name}{note}: {}", o.detail);
        if !o.passed && !KNOWN_UNATTAINABLE.contains(id) {
            unexpected += 1;
        }
    }
    let passed = results.iter().filter(|(_, _, o)| o.passed).count();
    println!("{passed} of {} criteria passed", results.len());
    if unexpected == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
