//! Parameter sweeps over circuit-file templates.
//!
//! A template is a circuit file with `$name` placeholders. Each grid point is
//! substituted, parsed and evaluated independently; rows come back in grid
//! order whatever the execution mode.

use std::collections::BTreeMap;
use std::io::Write;

use thiserror::Error;

use crate::decomposition::{decomposition_identity, DecompositionError, DecompositionReport};
use crate::gates::{parse_circuit, placeholders, substitute, ParseError};
use crate::kdq::{kdq_split, kdq_table, KdqError, KdqTable};
use crate::par::{map_range, Execution};
use crate::system::SystemError;
use crate::thermo::{anomaly_norms, extractable_work, work_components, work_split, ThermoError};

pub const SWEEP_PARAMS: [&str; 5] = ["theta", "phi", "p", "gamma", "omega_t"];

#[derive(Debug, Error)]
pub enum SweepError {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("invalid sweep: {0}")]
    Spec(String),
    #[error("unknown column '{0}'")]
    UnknownColumn(String),
    #[error(transparent)]
    System(#[from] SystemError),
    #[error(transparent)]
    Kdq(#[from] KdqError),
    #[error(transparent)]
    Thermo(#[from] ThermoError),
    #[error(transparent)]
    Decomposition(#[from] DecompositionError),
    #[error("csv output failed: {0}")]
    Csv(#[from] csv::Error),
    #[error("output failed: {0}")]
    Io(#[from] std::io::Error),
}

impl SweepError {
    /// Input problems (bad file, spec or column) as opposed to physics errors.
    pub fn is_input_error(&self) -> bool {
        matches!(self, SweepError::Parse(_) | SweepError::Spec(_) | SweepError::UnknownColumn(_))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub param: String,
    pub start: f64,
    pub stop: f64,
    pub count: usize,
    pub columns: Vec<String>,
    /// Values for the other placeholders.
    pub fixed: BTreeMap<String, f64>,
}

impl SweepSpec {
    pub fn grid(&self) -> Vec<f64> {
        let step = (self.stop - self.start) / (self.count - 1) as f64;
        (0..self.count)
            .map(|k| if k + 1 == self.count { self.stop } else { self.start + step * k as f64 })
            .collect()
    }

    pub fn validate(&self, template: &str) -> Result<(), SweepError> {
        if !SWEEP_PARAMS.contains(&self.param.as_str()) {
            return Err(SweepError::Spec(format!(
                "parameter '{}' is not one of {}",
                self.param,
                SWEEP_PARAMS.join(", ")
            )));
        }
        if self.count < 2 {
            return Err(SweepError::Spec(format!("count must be at least 2, got {}", self.count)));
        }
        if !(self.start < self.stop) {
            return Err(SweepError::Spec(format!("start {} must be below stop {}", self.start, self.stop)));
        }
        if !placeholders(template).iter().any(|n| n == &self.param) {
            return Err(SweepError::Spec(format!("template has no placeholder ${}", self.param)));
        }
        if self.columns.is_empty() {
            return Err(SweepError::Spec("no output columns requested".into()));
        }
        for c in &self.columns {
            Column::parse(c)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Column {
    ReQ(usize, usize),
    ImQ(usize, usize),
    Work,
    WorkPop,
    WorkCoh,
    Component(usize, usize),
    Norm(usize),
    /// Real part of the decomposition correction Q_if.
    Correction(usize, usize),
    /// Real part of the constituent table of gate j.
    Constituent(usize, usize, usize),
}

const NORM_NAMES: [&str; 4] = ["pos_up", "neg_up", "pos_down", "neg_down"];

impl Column {
    fn parse(name: &str) -> Result<Column, SweepError> {
        let unknown = || SweepError::UnknownColumn(name.to_string());
        let ints = |rest: &str, n: usize| -> Result<Vec<usize>, SweepError> {
            let v: Vec<usize> = rest
                .split('_')
                .map(|t| t.parse::<usize>().map_err(|_| unknown()))
                .collect::<Result<_, _>>()?;
            if v.len() == n {
                Ok(v)
            } else {
                Err(unknown())
            }
        };
        Ok(match name {
            "W" => Column::Work,
            "W_pop" => Column::WorkPop,
            "W_coh" => Column::WorkCoh,
            _ => {
                if let Some(rest) = name.strip_prefix("re_q_") {
                    let v = ints(rest, 2)?;
                    Column::ReQ(v[0], v[1])
                } else if let Some(rest) = name.strip_prefix("im_q_") {
                    let v = ints(rest, 2)?;
                    Column::ImQ(v[0], v[1])
                } else if let Some(rest) = name.strip_prefix("re_Q_") {
                    let v = ints(rest, 2)?;
                    Column::Correction(v[0], v[1])
                } else if let Some(rest) = name.strip_prefix("re_qg_") {
                    let v = ints(rest, 3)?;
                    Column::Constituent(v[0], v[1], v[2])
                } else if let Some(rest) = name.strip_prefix("W_") {
                    let v = ints(rest, 2)?;
                    Column::Component(v[0], v[1])
                } else if let Some(rest) = name.strip_prefix("norm_") {
                    Column::Norm(NORM_NAMES.iter().position(|n| *n == rest).ok_or_else(unknown)?)
                } else {
                    return Err(unknown());
                }
            }
        })
    }
}

/// Numeric table with named columns.
#[derive(Debug, Clone, PartialEq)]
pub struct DataTable {
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl DataTable {
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let k = self.header.iter().position(|h| h == name)?;
        Some(self.rows.iter().map(|r| r[k]).collect())
    }

    /// CSV with 17 significant digits per value.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<(), SweepError> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(&self.header)?;
        for row in &self.rows {
            w.write_record(row.iter().map(|x| format!("{x:.16e}")))?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> Result<String, SweepError> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)?;
        Ok(String::from_utf8(buf).expect("csv output is utf-8"))
    }

    /// Stacks tables with identical headers.
    pub fn concat(tables: Vec<DataTable>) -> Option<DataTable> {
        let mut iter = tables.into_iter();
        let mut first = iter.next()?;
        for t in iter {
            if t.header != first.header {
                return None;
            }
            first.rows.extend(t.rows);
        }
        Some(first)
    }
}

struct PointData {
    table: KdqTable,
    split: Option<(f64, f64)>,
    decomposition: Option<DecompositionReport>,
}

fn entry(t: &KdqTable, i: usize, f: usize, name: &str) -> Result<(usize, usize), SweepError> {
    if i < t.dim() && f < t.dim() {
        Ok((i, f))
    } else {
        Err(SweepError::Spec(format!("column {name} out of range for dimension {}", t.dim())))
    }
}

fn evaluate_point(text: &str, columns: &[(String, Column)]) -> Result<Vec<f64>, SweepError> {
    let program = parse_circuit(text)?;
    let h = program.hamiltonian()?;
    let rho = program.initial_state()?;
    let u = program.circuit.unitary();
    let needs_split = columns.iter().any(|(_, c)| matches!(c, Column::WorkPop | Column::WorkCoh));
    let needs_dec = columns
        .iter()
        .any(|(_, c)| matches!(c, Column::Correction(..) | Column::Constituent(..)));
    let data = PointData {
        table: kdq_table(&u, &rho, &h)?,
        split: if needs_split { Some(work_split(&kdq_split(&u, &rho, &h)?)) } else { None },
        decomposition: if needs_dec { Some(decomposition_identity(&program.circuit, &rho, &h)?) } else { None },
    };
    let t = &data.table;
    columns
        .iter()
        .map(|(name, col)| {
            Ok(match *col {
                Column::ReQ(i, f) => {
                    let (i, f) = entry(t, i, f, name)?;
                    t.get(i, f).re
                }
                Column::ImQ(i, f) => {
                    let (i, f) = entry(t, i, f, name)?;
                    t.get(i, f).im
                }
                Column::Work => extractable_work(t),
                Column::WorkPop => data.split.expect("split computed").0,
                Column::WorkCoh => data.split.expect("split computed").1,
                Column::Component(i, f) => *work_components(t)?
                    .get(&format!("{i}-{f}"))
                    .ok_or_else(|| SweepError::UnknownColumn(name.clone()))?,
                Column::Norm(k) => {
                    let n = anomaly_norms(t)?;
                    [n.pos_up, n.neg_up, n.pos_down, n.neg_down][k]
                }
                Column::Correction(i, f) => {
                    let (i, f) = entry(t, i, f, name)?;
                    data.decomposition.as_ref().expect("decomposition computed").correction[(i, f)].re
                }
                Column::Constituent(j, i, f) => {
                    let (i, f) = entry(t, i, f, name)?;
                    let dec = data.decomposition.as_ref().expect("decomposition computed");
                    dec.per_gate
                        .get(j)
                        .ok_or_else(|| SweepError::Spec(format!("column {name}: no gate {j}")))?
                        .constituent
                        .get(i, f)
                        .re
                }
            })
        })
        .collect()
}

/// Runs a one-parameter sweep. The first output column is the swept value.
pub fn run_sweep(template: &str, spec: &SweepSpec, exec: Execution) -> Result<DataTable, SweepError> {
    spec.validate(template)?;
    let columns: Vec<(String, Column)> = spec
        .columns
        .iter()
        .map(|c| Ok((c.clone(), Column::parse(c)?)))
        .collect::<Result<_, SweepError>>()?;
    let grid = spec.grid();
    let results = map_range(exec, grid.len(), |k| {
        let mut values = spec.fixed.clone();
        values.insert(spec.param.clone(), grid[k]);
        let text = substitute(template, &values)?;
        let mut row = vec![grid[k]];
        row.extend(evaluate_point(&text, &columns)?);
        Ok::<_, SweepError>(row)
    });
    let rows = results.into_iter().collect::<Result<Vec<_>, _>>()?;
    let mut header = vec![spec.param.clone()];
    header.extend(spec.columns.iter().cloned());
    Ok(DataTable { header, rows })
}

/// Sweep repeated for each assignment in `series`, long format. The keys of
/// the first assignment become leading columns.
pub fn run_sweep_series(
    template: &str,
    series: &[BTreeMap<String, f64>],
    spec: &SweepSpec,
    exec: Execution,
) -> Result<DataTable, SweepError> {
    let keys: Vec<String> = series
        .first()
        .ok_or_else(|| SweepError::Spec("empty outer parameter list".into()))?
        .keys()
        .cloned()
        .collect();
    let mut tables = Vec::with_capacity(series.len());
    for values in series {
        let mut inner = spec.clone();
        inner.fixed.extend(values.iter().map(|(k, v)| (k.clone(), *v)));
        let mut t = run_sweep(template, &inner, exec)?;
        let lead: Vec<f64> = keys
            .iter()
            .map(|k| values.get(k).copied().ok_or_else(|| SweepError::Spec(format!("series entry lacks '{k}'"))))
            .collect::<Result<_, _>>()?;
        t.header.splice(0..0, keys.iter().cloned());
        for row in &mut t.rows {
            row.splice(0..0, lead.iter().copied());
        }
        tables.push(t);
    }
    DataTable::concat(tables).ok_or_else(|| SweepError::Spec("empty outer parameter list".into()))
}

#[cfg(test)]
mod tests {
    use super::*;

    const HADAMARD: &str = "qubits 1\nstate qubit $p 0 0\ngate H 0\n";

    fn spec(columns: &[&str]) -> SweepSpec {
        SweepSpec {
            param: "p".into(),
            start: 0.0,
            stop: 1.0,
            count: 5,
            columns: columns.iter().map(|s| s.to_string()).collect(),
            fixed: BTreeMap::new(),
        }
    }

    #[test]
    fn two_point_sweep() {
        let mut s = spec(&["W"]);
        s.count = 2;
        let t = run_sweep(HADAMARD, &s, Execution::Sequential).unwrap();
        assert_eq!(t.rows.len(), 2);
        // W = E(2p - 1) for diagonal input
        assert_eq!(t.rows[0][0], 0.0);
        assert!((t.rows[0][1] + 1.0).abs() < 1e-15);
        assert!((t.rows[1][1] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn modes_agree_and_csv_is_stable() {
        let s = spec(&["re_q_0_1", "im_q_0_1", "W", "W_pop", "W_coh"]);
        let a = run_sweep(HADAMARD, &s, Execution::Sequential).unwrap();
        let b = run_sweep(HADAMARD, &s, Execution::Parallel).unwrap();
        assert_eq!(a, b);
        let csv = a.to_csv_string().unwrap();
        let first = csv.lines().next().unwrap();
        assert_eq!(first, "p,re_q_0_1,im_q_0_1,W,W_pop,W_coh");
        assert!(csv.lines().nth(1).unwrap().starts_with("0.0000000000000000e0,"));
    }

    #[test]
    fn spec_errors() {
        let mut s = spec(&["W"]);
        s.count = 1;
        assert!(matches!(run_sweep(HADAMARD, &s, Execution::Sequential), Err(SweepError::Spec(_))));
        let mut s = spec(&["W"]);
        s.start = 2.0;
        assert!(run_sweep(HADAMARD, &s, Execution::Sequential).is_err());
        let s = spec(&["bogus"]);
        assert!(matches!(run_sweep(HADAMARD, &s, Execution::Sequential), Err(SweepError::UnknownColumn(_))));
        let mut s = spec(&["W"]);
        s.param = "theta".into();
        assert!(matches!(run_sweep(HADAMARD, &s, Execution::Sequential), Err(SweepError::Spec(_))));
        let s = spec(&["W_0_1"]);
        assert!(matches!(run_sweep(HADAMARD, &s, Execution::Sequential), Err(SweepError::Thermo(_))));
    }

    #[test]
    fn undefined_placeholder_is_parse_error() {
        let text = "qubits 1\nstate qubit $p 0 $phi\ngate H 0\n";
        let err = run_sweep(text, &spec(&["W"]), Execution::Sequential).unwrap_err();
        assert!(matches!(err, SweepError::Parse(_)));
        assert!(err.is_input_error());
    }

    #[test]
    fn family_is_long_format() {
        let text = "qubits 1\nstate qubit 0.5 $gamma $phi\ngate H 0\n";
        let s = SweepSpec {
            param: "phi".into(),
            start: 0.0,
            stop: 3.0,
            count: 3,
            columns: vec!["W".into()],
            fixed: BTreeMap::new(),
        };
        let series: Vec<BTreeMap<String, f64>> =
            [0.0, 0.5].iter().map(|&g| BTreeMap::from([("gamma".to_string(), g)])).collect();
        let t = run_sweep_series(text, &series, &s, Execution::Parallel).unwrap();
        assert_eq!(t.header, vec!["gamma", "phi", "W"]);
        assert_eq!(t.rows.len(), 6);
        assert_eq!(t.column("gamma").unwrap(), vec![0.0, 0.0, 0.0, 0.5, 0.5, 0.5]);
    }
}
