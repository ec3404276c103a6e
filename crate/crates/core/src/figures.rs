//! Data recipes for the published figures. Each recipe is a circuit template
//! plus a sweep; output is a long-format table ready for external plotting.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::str::FromStr;

use crate::par::Execution;
use crate::sweep::{run_sweep_series, DataTable, SweepError, SweepSpec};

/// Hadamard evolution R(2wt, (x+z)/sqrt2) on a partially coherent qubit.
pub const HADAMARD_EVOLUTION: &str = "\
qubits 1
E 1
state qubit $p $gamma $phi
gate R 0 2*$omega_t 0.7071067811865476 0 0.7071067811865476
";

pub const HTH_TEMPLATE: &str = "\
qubits 1
E 1
state pure_bloch $theta $phi
gate H 0
gate T 0
gate H 0
";

/// CNOT after H on both qubits, input |psi(theta, phi)> on each qubit.
pub const CNOT_HH_TEMPLATE: &str = "\
qubits 2
E 1
state product pure_bloch $theta $phi ; pure_bloch $theta $phi
gate H 0
gate H 1
gate CNOT 0 1
";

/// CNOT after H x H applied as one gate, so the decomposition has two
/// constituents. Input (|up> + e^{i phi}|down>)/sqrt2 on each qubit.
pub const CNOT_HH_PAIR_TEMPLATE: &str = "\
qubits 2
E 1
state product pure_pop 0.5 $phi ; pure_pop 0.5 $phi
gate U 0 1 0.5 -0.5 -0.5 0.5 -0.5 -0.5 0.5 0.5 -0.5 0.5 -0.5 0.5 0.5 0.5 0.5 0.5
gate CNOT 0 1
";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Figure {
    /// Re q_du and work against wt for several phases at p = 1/2.
    Fig2a,
    /// Same at phi = pi/2 for several populations, with the work split.
    Fig2b,
    /// HTH MHQs over the (theta, phi) plane.
    Fig3,
    /// Norms and work of CNOT.H^2 over the (theta, phi) plane.
    Fig4,
    /// CNOT.H^2 MHQs, correction and work components along phi at theta = pi/2.
    Fig5,
}

impl Figure {
    pub const ALL: [Figure; 5] = [Figure::Fig2a, Figure::Fig2b, Figure::Fig3, Figure::Fig4, Figure::Fig5];

    pub fn name(self) -> &'static str {
        match self {
            Figure::Fig2a => "2a",
            Figure::Fig2b => "2b",
            Figure::Fig3 => "3",
            Figure::Fig4 => "4",
            Figure::Fig5 => "5",
        }
    }
}

impl FromStr for Figure {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Figure::ALL
            .into_iter()
            .find(|f| f.name() == s)
            .ok_or_else(|| format!("unknown figure '{s}', expected one of 2a, 2b, 3, 4, 5"))
    }
}

/// Template, outer series and inner sweep of a figure.
pub struct Recipe {
    pub template: &'static str,
    pub series: Vec<BTreeMap<String, f64>>,
    pub spec: SweepSpec,
}

fn point(pairs: &[(&str, f64)]) -> BTreeMap<String, f64> {
    pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect()
}

fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    (0..n).map(|k| a + (b - a) * k as f64 / (n - 1) as f64).collect()
}

fn columns(names: &[&str]) -> Vec<String> {
    names.iter().map(|s| s.to_string()).collect()
}

pub fn recipe(fig: Figure) -> Recipe {
    match fig {
        Figure::Fig2a => Recipe {
            template: HADAMARD_EVOLUTION,
            series: [0.0, 0.25, 0.5, 0.75, 1.0]
                .iter()
                .map(|k| point(&[("phi", k * PI), ("p", 0.5), ("gamma", 0.5)]))
                .collect(),
            spec: SweepSpec {
                param: "omega_t".into(),
                start: 0.0,
                stop: PI,
                count: 181,
                columns: columns(&["re_q_0_1", "re_q_1_0", "W"]),
                fixed: BTreeMap::new(),
            },
        },
        Figure::Fig2b => Recipe {
            template: HADAMARD_EVOLUTION,
            series: linspace(0.0, 0.5, 6)
                .into_iter()
                .map(|p| point(&[("phi", PI / 2.0), ("p", p), ("gamma", (p * (1.0 - p)).sqrt())]))
                .collect(),
            spec: SweepSpec {
                param: "omega_t".into(),
                start: 0.0,
                stop: PI,
                count: 181,
                columns: columns(&["re_q_0_1", "W", "W_pop", "W_coh"]),
                fixed: BTreeMap::new(),
            },
        },
        Figure::Fig3 => Recipe {
            template: HTH_TEMPLATE,
            series: linspace(0.0, PI, 61).into_iter().map(|t| point(&[("theta", t)])).collect(),
            spec: SweepSpec {
                param: "phi".into(),
                start: 0.0,
                stop: 2.0 * PI,
                count: 121,
                columns: columns(&["re_q_0_1", "re_q_1_0"]),
                fixed: BTreeMap::new(),
            },
        },
        Figure::Fig4 => Recipe {
            template: CNOT_HH_TEMPLATE,
            series: linspace(0.0, PI, 61).into_iter().map(|t| point(&[("theta", t)])).collect(),
            spec: SweepSpec {
                param: "phi".into(),
                start: 0.0,
                stop: 2.0 * PI,
                count: 121,
                columns: columns(&[
                    "norm_pos_up",
                    "norm_neg_up",
                    "norm_pos_down",
                    "norm_neg_down",
                    "W",
                    "W_coh",
                ]),
                fixed: BTreeMap::new(),
            },
        },
        Figure::Fig5 => Recipe {
            template: CNOT_HH_PAIR_TEMPLATE,
            series: vec![point(&[("theta", PI / 2.0)])],
            spec: SweepSpec {
                param: "phi".into(),
                start: 0.0,
                stop: 2.0 * PI,
                count: 361,
                columns: columns(&[
                    "re_q_0_1", "re_q_0_2", "re_q_0_3", "re_q_1_3", "re_q_2_3", "re_q_1_0", "re_q_2_0",
                    "re_q_3_0", "re_q_3_1", "re_q_3_2", "re_Q_0_1", "re_qg_0_0_1", "re_qg_1_0_1", "W_0_1",
                    "W_0_2", "W_0_3", "W_1_3", "W_2_3", "W",
                ]),
                fixed: BTreeMap::new(),
            },
        },
    }
}

pub fn figure_data(fig: Figure, exec: Execution) -> Result<DataTable, SweepError> {
    let r = recipe(fig);
    run_sweep_series(r.template, &r.series, &r.spec, exec)
}
