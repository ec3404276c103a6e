//! Line-oriented circuit description language.
//!
//! ```text
//! # comments run to end of line
//! qubits 2
//! E 1.0
//! state product pure_pop 0.5 pi/4 ; pure_pop 0.5 pi/4
//! gate H 0
//! gate CNOT 0 1
//! ```
//!
//! Real arguments accept plain numbers or products such as `pi`, `-pi/2`,
//! `3*pi/4` and `2*0.5`.
//! Complex entries are written `a+bi`, `-bi`, `i` or plain reals.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;

use crate::gates::{Circuit, Gate, GateError};
use crate::linalg::{CMatrix, C64};
use crate::system::{
    build_hamiltonian, pure_state_bloch, pure_state_pop_phase, qubit_state, thermal_state, DensityMatrix,
    Hamiltonian, QubitStateParams, SystemError,
};

#[derive(Debug, Clone, PartialEq)]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} at line {}, column {}", self.message, self.line, self.column)
    }
}

impl std::error::Error for ParseError {}

#[derive(Debug, Clone, PartialEq)]
pub enum StateSpec {
    PureBloch { theta: f64, phi: f64 },
    PurePop { p: f64, phi: f64 },
    Qubit { p: f64, gamma_abs: f64, phi: f64 },
    Thermal { beta: f64 },
    Product(Vec<StateSpec>),
    Matrix { dim: usize, entries: Vec<C64> },
}

impl StateSpec {
    /// Qubits covered by the spec; `None` for thermal states, which adapt.
    pub fn num_qubits(&self) -> Option<usize> {
        match self {
            StateSpec::PureBloch { .. } | StateSpec::PurePop { .. } | StateSpec::Qubit { .. } => Some(1),
            StateSpec::Thermal { .. } => None,
            StateSpec::Product(parts) => parts.iter().map(|p| p.num_qubits().unwrap_or(1)).sum::<usize>().into(),
            StateSpec::Matrix { dim, .. } => Some(dim.trailing_zeros() as usize),
        }
    }

    /// Builds the density matrix on `num_qubits` qubits with energy scale `energy`.
    pub fn build(&self, num_qubits: usize, energy: f64) -> Result<DensityMatrix, SystemError> {
        if let Some(n) = self.num_qubits() {
            if n != num_qubits {
                return Err(SystemError::Dimension {
                    expected: 1 << num_qubits,
                    got: 1 << n,
                });
            }
        }
        match self {
            StateSpec::PureBloch { theta, phi } => Ok(pure_state_bloch(*theta, *phi)),
            StateSpec::PurePop { p, phi } => pure_state_pop_phase(*p, *phi),
            StateSpec::Qubit { p, gamma_abs, phi } => qubit_state(QubitStateParams::new(*p, *gamma_abs, *phi)?),
            StateSpec::Thermal { beta } => thermal_state(&build_hamiltonian(num_qubits, energy)?, *beta),
            StateSpec::Product(parts) => {
                let mut acc: Option<DensityMatrix> = None;
                for part in parts {
                    let n = part.num_qubits().unwrap_or(1);
                    let rho = part.build(n, energy)?;
                    acc = Some(match acc {
                        None => rho,
                        Some(prev) => prev.product(&rho),
                    });
                }
                acc.ok_or_else(|| SystemError::Invalid("empty product state".into()))
            }
            StateSpec::Matrix { dim, entries } => DensityMatrix::new(CMatrix::new(*dim, *dim, entries.clone())?),
        }
    }

    fn to_text(&self) -> String {
        match self {
            StateSpec::PureBloch { theta, phi } => format!("pure_bloch {theta} {phi}"),
            StateSpec::PurePop { p, phi } => format!("pure_pop {p} {phi}"),
            StateSpec::Qubit { p, gamma_abs, phi } => format!("qubit {p} {gamma_abs} {phi}"),
            StateSpec::Thermal { beta } => format!("thermal {beta}"),
            StateSpec::Product(parts) => format!(
                "product {}",
                parts.iter().map(StateSpec::to_text).collect::<Vec<_>>().join(" ; ")
            ),
            StateSpec::Matrix { entries, .. } => format!(
                "matrix {}",
                entries.iter().map(|z| complex_text(*z)).collect::<Vec<_>>().join(" ")
            ),
        }
    }
}

/// Parsed circuit file.
#[derive(Debug, Clone, PartialEq)]
pub struct Program {
    pub circuit: Circuit,
    pub state: StateSpec,
    pub energy: f64,
    /// Non-fatal notes, e.g. rescaled rotation axes.
    pub warnings: Vec<String>,
}

impl Program {
    pub fn hamiltonian(&self) -> Result<Hamiltonian, SystemError> {
        build_hamiltonian(self.circuit.num_qubits(), self.energy)
    }

    pub fn initial_state(&self) -> Result<DensityMatrix, SystemError> {
        self.state.build(self.circuit.num_qubits(), self.energy)
    }
}

#[derive(Clone, Copy)]
struct Token<'a> {
    text: &'a str,
    column: usize,
}

fn tokenize(line: &str) -> Vec<Token<'_>> {
    let mut out = Vec::new();
    let mut start = None;
    for (k, ch) in line.char_indices() {
        if ch.is_whitespace() {
            if let Some(s) = start.take() {
                out.push(Token {
                    text: &line[s..k],
                    column: s + 1,
                });
            }
        } else if start.is_none() {
            start = Some(k);
        }
    }
    if let Some(s) = start {
        out.push(Token {
            text: &line[s..],
            column: s + 1,
        });
    }
    out
}

struct LineCtx {
    line: usize,
    end_column: usize,
}

impl LineCtx {
    fn err(&self, column: usize, message: impl Into<String>) -> ParseError {
        ParseError {
            line: self.line,
            column,
            message: message.into(),
        }
    }

    fn at(&self, tok: &Token, message: impl Into<String>) -> ParseError {
        self.err(tok.column, message)
    }

    fn expect_count(&self, toks: &[Token], n: usize, what: &str) -> Result<(), ParseError> {
        if toks.len() == n + 1 {
            return Ok(());
        }
        let column = toks.get(n + 1).map_or(self.end_column, |t| t.column);
        Err(self.err(
            column,
            format!("{what} expects {n} argument(s), got {}", toks.len() - 1),
        ))
    }

    fn real(&self, tok: &Token) -> Result<f64, ParseError> {
        parse_real(tok.text).ok_or_else(|| self.at(tok, format!("malformed number '{}'", tok.text)))
    }

    fn complex(&self, tok: &Token) -> Result<C64, ParseError> {
        parse_complex(tok.text).ok_or_else(|| self.at(tok, format!("malformed complex number '{}'", tok.text)))
    }

    fn index(&self, tok: &Token) -> Result<usize, ParseError> {
        tok.text
            .parse::<usize>()
            .map_err(|_| self.at(tok, format!("malformed qubit index '{}'", tok.text)))
    }

    fn qubit(&self, tok: &Token, num_qubits: usize) -> Result<usize, ParseError> {
        let q = self.index(tok)?;
        if q >= num_qubits {
            return Err(self.at(tok, format!("qubit {q} out of range for {num_qubits} qubits")));
        }
        Ok(q)
    }
}

/// Parses a real number or a product expression such as `pi`, `-pi/2`,
/// `3*pi/4` or `2*0.5`: factors joined by `*`, optionally over one divisor.
pub fn parse_real(s: &str) -> Option<f64> {
    if let Ok(x) = s.parse::<f64>() {
        return x.is_finite().then_some(x);
    }
    let (sign, body) = match s.strip_prefix('-') {
        Some(rest) => (-1.0, rest),
        None => (1.0, s.strip_prefix('+').unwrap_or(s)),
    };
    let (num, den) = match body.split_once('/') {
        Some((n, d)) => (n, d.parse::<f64>().ok()?),
        None => (body, 1.0),
    };
    let mut x = sign / den;
    for factor in num.split('*') {
        x *= match factor {
            "pi" => PI,
            other => other.parse::<f64>().ok()?,
        };
    }
    x.is_finite().then_some(x)
}

/// Parses `a`, `bi`, `a+bi`, `a-bi`, `i`, `-i`.
pub fn parse_complex(s: &str) -> Option<C64> {
    let Some(body) = s.strip_suffix('i') else {
        return s.parse::<f64>().ok().filter(|x| x.is_finite()).map(|x| C64::new(x, 0.0));
    };
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&k| (bytes[k] == b'+' || bytes[k] == b'-') && !matches!(bytes[k - 1], b'e' | b'E'));
    let (re, im) = match split {
        Some(k) => (body[..k].parse::<f64>().ok()?, imag_coeff(&body[k..])?),
        None => (0.0, imag_coeff(body)?),
    };
    (re.is_finite() && im.is_finite()).then_some(C64::new(re, im))
}

fn imag_coeff(s: &str) -> Option<f64> {
    match s {
        "" | "+" => Some(1.0),
        "-" => Some(-1.0),
        _ => s.parse::<f64>().ok(),
    }
}

fn complex_text(z: C64) -> String {
    format!("{}{:+}i", z.re, z.im)
}

fn parse_state(ctx: &LineCtx, toks: &[Token]) -> Result<StateSpec, ParseError> {
    let Some(kind) = toks.first() else {
        return Err(ctx.err(ctx.end_column, "missing state specification"));
    };
    let args = &toks[1..];
    let arity = |n: usize| -> Result<(), ParseError> {
        if args.len() == n {
            Ok(())
        } else {
            let column = args.get(n).map_or(ctx.end_column, |t| t.column);
            Err(ctx.err(
                column,
                format!("state {} expects {n} argument(s), got {}", kind.text, args.len()),
            ))
        }
    };
    match kind.text {
        "pure_bloch" => {
            arity(2)?;
            Ok(StateSpec::PureBloch {
                theta: ctx.real(&args[0])?,
                phi: ctx.real(&args[1])?,
            })
        }
        "pure_pop" => {
            arity(2)?;
            Ok(StateSpec::PurePop {
                p: ctx.real(&args[0])?,
                phi: ctx.real(&args[1])?,
            })
        }
        "qubit" => {
            arity(3)?;
            Ok(StateSpec::Qubit {
                p: ctx.real(&args[0])?,
                gamma_abs: ctx.real(&args[1])?,
                phi: ctx.real(&args[2])?,
            })
        }
        "thermal" => {
            arity(1)?;
            Ok(StateSpec::Thermal {
                beta: ctx.real(&args[0])?,
            })
        }
        "product" => {
            let mut parts = Vec::new();
            for chunk in args.split(|t| t.text == ";") {
                if chunk.is_empty() {
                    return Err(ctx.err(kind.column, "empty factor in product state"));
                }
                let part = parse_state(ctx, chunk)?;
                if matches!(part, StateSpec::Product(_)) {
                    return Err(ctx.at(&chunk[0], "nested product states are not supported"));
                }
                parts.push(part);
            }
            if parts.len() < 2 {
                return Err(ctx.at(kind, "product state needs at least two factors separated by ';'"));
            }
            Ok(StateSpec::Product(parts))
        }
        "matrix" => {
            let n = args.len();
            let dim = (n as f64).sqrt().round() as usize;
            if n == 0 || dim * dim != n || !dim.is_power_of_two() || dim < 2 {
                return Err(ctx.at(kind, format!("matrix state needs 4^k entries, got {n}")));
            }
            let entries = args.iter().map(|t| ctx.complex(t)).collect::<Result<Vec<_>, _>>()?;
            Ok(StateSpec::Matrix { dim, entries })
        }
        other => Err(ctx.at(kind, format!("unknown state kind '{other}'"))),
    }
}

fn parse_gate(
    ctx: &LineCtx,
    toks: &[Token],
    num_qubits: usize,
    warnings: &mut Vec<String>,
) -> Result<Gate, ParseError> {
    let Some(name) = toks.get(1) else {
        return Err(ctx.err(ctx.end_column, "missing gate name"));
    };
    let args = &toks[1..];
    match name.text {
        "H" | "T" => {
            ctx.expect_count(args, 1, &format!("gate {}", name.text))?;
            let q = ctx.qubit(&args[1], num_qubits)?;
            Ok(if name.text == "H" { Gate::H(q) } else { Gate::T(q) })
        }
        "P" => {
            ctx.expect_count(args, 2, "gate P")?;
            Ok(Gate::Phase {
                target: ctx.qubit(&args[1], num_qubits)?,
                phi: ctx.real(&args[2])?,
            })
        }
        "CNOT" => {
            ctx.expect_count(args, 2, "gate CNOT")?;
            let control = ctx.qubit(&args[1], num_qubits)?;
            let target = ctx.qubit(&args[2], num_qubits)?;
            if control == target {
                return Err(ctx.at(&args[2], "control equals target"));
            }
            Ok(Gate::Cnot { control, target })
        }
        "R" => {
            ctx.expect_count(args, 5, "gate R")?;
            let target = ctx.qubit(&args[1], num_qubits)?;
            let theta = ctx.real(&args[2])?;
            let axis = [ctx.real(&args[3])?, ctx.real(&args[4])?, ctx.real(&args[5])?];
            let norm = axis.iter().map(|x| x * x).sum::<f64>().sqrt();
            if (norm - 1.0).abs() > 1e-6 && norm > 0.0 {
                warnings.push(format!(
                    "line {}: rotation axis norm {norm} rescaled to 1",
                    ctx.line
                ));
            }
            Gate::rotation(target, theta, axis).map_err(|e| ctx.at(&args[3], e.to_string()))
        }
        "U" => {
            let n = args.len() - 1;
            let Some(k) = (1..=num_qubits.max(1)).find(|&k| k + (1usize << (2 * k)) == n) else {
                return Err(ctx.at(
                    name,
                    format!("gate U expects k targets followed by 4^k entries, got {n} arguments"),
                ));
            };
            let targets = args[1..=k]
                .iter()
                .map(|t| ctx.qubit(t, num_qubits))
                .collect::<Result<Vec<_>, _>>()?;
            let entries = args[k + 1..]
                .iter()
                .map(|t| ctx.complex(t))
                .collect::<Result<Vec<_>, _>>()?;
            let dim = 1usize << k;
            let matrix = CMatrix::new(dim, dim, entries).map_err(|e| ctx.at(name, e.to_string()))?;
            let gate = Gate::custom(matrix, targets).map_err(|e| ctx.at(name, e.to_string()))?;
            gate.validate(num_qubits).map_err(|e| match e {
                GateError::RepeatedTarget(_) => ctx.at(&args[1], e.to_string()),
                other => ctx.at(name, other.to_string()),
            })?;
            Ok(gate)
        }
        other => Err(ctx.at(name, format!("unknown gate '{other}'"))),
    }
}

pub fn parse_circuit(text: &str) -> Result<Program, ParseError> {
    let mut num_qubits: Option<usize> = None;
    let mut energy: Option<f64> = None;
    let mut state: Option<StateSpec> = None;
    let mut gates = Vec::new();
    let mut warnings = Vec::new();
    let mut last_line = 0;

    for (idx, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("");
        let ctx = LineCtx {
            line: idx + 1,
            end_column: line.trim_end().len() + 1,
        };
        last_line = idx + 1;
        let toks = tokenize(line);
        let Some(head) = toks.first() else { continue };
        match head.text {
            "qubits" => {
                if num_qubits.is_some() {
                    return Err(ctx.at(head, "duplicate qubits declaration"));
                }
                ctx.expect_count(&toks, 1, "qubits")?;
                let n = ctx.index(&toks[1])?;
                if n == 0 {
                    return Err(ctx.at(&toks[1], "number of qubits must be at least 1"));
                }
                num_qubits = Some(n);
            }
            "E" => {
                if energy.is_some() {
                    return Err(ctx.at(head, "duplicate E declaration"));
                }
                ctx.expect_count(&toks, 1, "E")?;
                let e = ctx.real(&toks[1])?;
                if e <= 0.0 {
                    return Err(ctx.at(&toks[1], "energy scale must be positive"));
                }
                energy = Some(e);
            }
            "state" => {
                if state.is_some() {
                    return Err(ctx.at(head, "duplicate state declaration"));
                }
                state = Some(parse_state(&ctx, &toks[1..])?);
            }
            "gate" => {
                let Some(n) = num_qubits else {
                    return Err(ctx.at(head, "gate before qubits declaration"));
                };
                gates.push(parse_gate(&ctx, &toks, n, &mut warnings)?);
            }
            other => return Err(ctx.at(head, format!("unknown directive '{other}'"))),
        }
    }

    let eof = |msg: &str| ParseError {
        line: last_line.max(1),
        column: 1,
        message: msg.to_string(),
    };
    let num_qubits = num_qubits.ok_or_else(|| eof("missing qubits declaration"))?;
    let state = state.ok_or_else(|| eof("missing state declaration"))?;
    if let Some(n) = state.num_qubits() {
        if n != num_qubits {
            return Err(eof(&format!(
                "state covers {n} qubit(s) but the circuit has {num_qubits}"
            )));
        }
    }
    let circuit = Circuit::new(num_qubits, gates).map_err(|e| eof(&e.to_string()))?;
    Ok(Program {
        circuit,
        state,
        energy: energy.unwrap_or(1.0),
        warnings,
    })
}

/// Serializes a program; `parse_circuit(&to_text(p))` reproduces `p`.
pub fn to_text(program: &Program) -> String {
    let mut out = format!(
        "qubits {}\nE {}\nstate {}\n",
        program.circuit.num_qubits(),
        program.energy,
        program.state.to_text()
    );
    for g in program.circuit.gates() {
        let line = match g {
            Gate::H(q) => format!("gate H {q}"),
            Gate::T(q) => format!("gate T {q}"),
            Gate::Phase { target, phi } => format!("gate P {target} {phi}"),
            Gate::Cnot { control, target } => format!("gate CNOT {control} {target}"),
            Gate::Rot { target, theta, axis } => {
                format!("gate R {target} {theta} {} {} {}", axis[0], axis[1], axis[2])
            }
            Gate::Custom { matrix, targets } => {
                let qs: Vec<String> = targets.iter().map(usize::to_string).collect();
                let es: Vec<String> = matrix.as_slice().iter().map(|z| complex_text(*z)).collect();
                format!("gate U {} {}", qs.join(" "), es.join(" "))
            }
        };
        out.push_str(&line);
        out.push('\n');
    }
    out
}

fn is_name_char(b: u8) -> bool {
    b.is_ascii_alphanumeric() || b == b'_'
}

/// Names of the `$name` placeholders in `text`, in order of first use.
pub fn placeholders(text: &str) -> Vec<String> {
    let mut names: Vec<String> = Vec::new();
    let bytes = text.as_bytes();
    let mut k = 0;
    while k < bytes.len() {
        if bytes[k] == b'$' {
            let start = k + 1;
            let mut end = start;
            while end < bytes.len() && is_name_char(bytes[end]) {
                end += 1;
            }
            let name = &text[start..end];
            if !name.is_empty() && !names.iter().any(|n| n == name) {
                names.push(name.to_string());
            }
            k = end;
        } else {
            k += 1;
        }
    }
    names
}

/// Replaces `$name` placeholders with values; unknown names are parse errors.
pub fn substitute(text: &str, values: &BTreeMap<String, f64>) -> Result<String, ParseError> {
    let mut out = String::with_capacity(text.len());
    for (idx, line) in text.split_inclusive('\n').enumerate() {
        let bytes = line.as_bytes();
        let mut k = 0;
        while k < bytes.len() {
            if bytes[k] != b'$' {
                let next = line[k..].find('$').map_or(line.len(), |off| k + off);
                out.push_str(&line[k..next]);
                k = next;
                continue;
            }
            let start = k + 1;
            let mut end = start;
            while end < bytes.len() && is_name_char(bytes[end]) {
                end += 1;
            }
            let name = &line[start..end];
            match values.get(name) {
                Some(v) if !name.is_empty() => out.push_str(&format!("{v:?}")),
                _ => {
                    return Err(ParseError {
                        line: idx + 1,
                        column: k + 1,
                        message: format!("undefined placeholder '${name}'"),
                    })
                }
            }
            k = end;
        }
    }
    Ok(out)
}
