//! Gate-list circuits over real gates, their text format, and the doubling
//! embedding `U' = U_Z (U ⊗ I)`.
//!
//! Qubit 0 is the most significant bit of a basis-state index.
//!
//! Circuit files are line oriented:
//!
//! ```text
//! # comment
//! qubits 3
//! H 0
//! CX 0 1        # control first, then target
//! TOFFOLI 0 1 2
//! ```

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{Matrix, UnitaryMatrix, ONE, ZERO};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum GateKind {
    H,
    X,
    Z,
    Cx,
    Cz,
    Swap,
    Toffoli,
}

impl GateKind {
    pub fn arity(self) -> usize {
        match self {
            GateKind::H | GateKind::X | GateKind::Z => 1,
            GateKind::Cx | GateKind::Cz | GateKind::Swap => 2,
            GateKind::Toffoli => 3,
        }
    }

    pub fn mnemonic(self) -> &'static str {
        match self {
            GateKind::H => "H",
            GateKind::X => "X",
            GateKind::Z => "Z",
            GateKind::Cx => "CX",
            GateKind::Cz => "CZ",
            GateKind::Swap => "SWAP",
            GateKind::Toffoli => "TOFFOLI",
        }
    }
}

impl FromStr for GateKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        Ok(match s {
            "H" => GateKind::H,
            "X" => GateKind::X,
            "Z" => GateKind::Z,
            "CX" => GateKind::Cx,
            "CZ" => GateKind::Cz,
            "SWAP" => GateKind::Swap,
            "TOFFOLI" => GateKind::Toffoli,
            other => return Err(format!("unknown or non-real gate `{other}`")),
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Gate {
    pub kind: GateKind,
    /// Controls first, target last.
    pub targets: Vec<usize>,
}

impl Gate {
    pub fn new(kind: GateKind, targets: Vec<usize>) -> Result<Self> {
        if targets.len() != kind.arity() {
            return Err(Error::InvalidParameter(format!(
                "{} takes {} qubit(s), got {}",
                kind.mnemonic(),
                kind.arity(),
                targets.len()
            )));
        }
        for (i, a) in targets.iter().enumerate() {
            if targets[..i].contains(a) {
                return Err(Error::InvalidParameter(format!(
                    "{} repeats qubit {a}",
                    kind.mnemonic()
                )));
            }
        }
        Ok(Self { kind, targets })
    }

    /// Maps a basis index to its image; every supported gate except `H` is a
    /// signed permutation of the computational basis.
    fn permute(&self, n: usize, k: usize) -> (usize, f64) {
        let bit = |q: usize| (k >> (n - 1 - q)) & 1;
        let flip = |k: usize, q: usize| k ^ (1 << (n - 1 - q));
        let t = &self.targets;
        match self.kind {
            GateKind::X => (flip(k, t[0]), 1.0),
            GateKind::Z => (k, if bit(t[0]) == 1 { -1.0 } else { 1.0 }),
            GateKind::Cx => (if bit(t[0]) == 1 { flip(k, t[1]) } else { k }, 1.0),
            GateKind::Cz => (k, if bit(t[0]) & bit(t[1]) == 1 { -1.0 } else { 1.0 }),
            GateKind::Swap => {
                if bit(t[0]) != bit(t[1]) {
                    (flip(flip(k, t[0]), t[1]), 1.0)
                } else {
                    (k, 1.0)
                }
            }
            GateKind::Toffoli => (if bit(t[0]) & bit(t[1]) == 1 { flip(k, t[2]) } else { k }, 1.0),
            GateKind::H => unreachable!("H is not a permutation"),
        }
    }

    /// Left-multiplies `m` (a `2^n x 2^n` matrix) by this gate in place.
    fn apply_left(&self, n: usize, m: &mut Matrix) {
        let dim = m.dim();
        match self.kind {
            GateKind::H => {
                let s = std::f64::consts::FRAC_1_SQRT_2;
                let mask = 1 << (n - 1 - self.targets[0]);
                for r0 in (0..dim).filter(|r| r & mask == 0) {
                    let r1 = r0 | mask;
                    for c in 0..dim {
                        let (a, b) = (m.get(r0, c), m.get(r1, c));
                        m.set(r0, c, (a + b) * s);
                        m.set(r1, c, (a - b) * s);
                    }
                }
            }
            _ => {
                let mut out = Matrix::zeros(dim);
                for r in 0..dim {
                    let (dst, sign) = self.permute(n, r);
                    for c in 0..dim {
                        out.set(dst, c, m.get(r, c) * sign);
                    }
                }
                *m = out;
            }
        }
    }
}

impl fmt::Display for Gate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.kind.mnemonic())?;
        for t in &self.targets {
            write!(f, " {t}")?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Circuit {
    n_qubits: usize,
    gates: Vec<Gate>,
    pub label: String,
}

impl Circuit {
    pub fn new(n_qubits: usize, label: impl Into<String>) -> Result<Self> {
        if n_qubits == 0 {
            return Err(Error::InvalidDimension("circuit needs at least one qubit".into()));
        }
        Ok(Self {
            n_qubits,
            gates: Vec::new(),
            label: label.into(),
        })
    }

    pub fn push(&mut self, gate: Gate) -> Result<()> {
        if let Some(&q) = gate.targets.iter().find(|&&q| q >= self.n_qubits) {
            return Err(Error::Width {
                line: 0,
                index: q,
                n_qubits: self.n_qubits,
            });
        }
        self.gates.push(gate);
        Ok(())
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::from(e).in_file(path))?;
        let mut c = parse_circuit(&text).map_err(|e| e.in_file(path))?;
        c.label = path.display().to_string();
        Ok(c)
    }
}

impl fmt::Display for Circuit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "qubits {}", self.n_qubits)?;
        for g in &self.gates {
            writeln!(f, "{g}")?;
        }
        Ok(())
    }
}

pub fn parse_circuit(text: &str) -> Result<Circuit> {
    let mut circuit: Option<Circuit> = None;
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let mut tokens = line.split_whitespace();
        let head = tokens.next().expect("non-empty line has a token");
        let parse_err = |message: String| Error::Parse { line: line_no, message };

        let Some(c) = circuit.as_mut() else {
            if head != "qubits" {
                return Err(parse_err(format!("expected `qubits <n>`, found `{head}`")));
            }
            let n = tokens
                .next()
                .ok_or_else(|| parse_err("missing qubit count".into()))?
                .parse::<usize>()
                .map_err(|e| parse_err(format!("bad qubit count: {e}")))?;
            if let Some(extra) = tokens.next() {
                return Err(parse_err(format!("unexpected token `{extra}`")));
            }
            if n == 0 {
                return Err(parse_err("qubit count must be positive".into()));
            }
            circuit = Some(Circuit::new(n, "")?);
            continue;
        };

        if head == "qubits" {
            return Err(parse_err("duplicate `qubits` declaration".into()));
        }
        let kind: GateKind = head.parse().map_err(parse_err)?;
        let targets = tokens
            .map(|t| {
                t.parse::<usize>()
                    .map_err(|_| parse_err(format!("bad qubit index `{t}`")))
            })
            .collect::<Result<Vec<_>>>()?;
        if let Some(&q) = targets.iter().find(|&&q| q >= c.n_qubits) {
            return Err(Error::Width {
                line: line_no,
                index: q,
                n_qubits: c.n_qubits,
            });
        }
        let gate = Gate::new(kind, targets).map_err(|e| parse_err(e.to_string()))?;
        c.gates.push(gate);
    }
    circuit.ok_or(Error::Parse {
        line: text.lines().count().max(1),
        message: "missing `qubits <n>` declaration".into(),
    })
}

/// Product of the gate matrices in application order (last gate leftmost).
pub fn circuit_unitary(c: &Circuit) -> UnitaryMatrix {
    let n = c.n_qubits;
    let mut m = Matrix::identity(1 << n);
    for g in &c.gates {
        g.apply_left(n, &mut m);
    }
    UnitaryMatrix::new_unchecked(m)
}

/// Diagonal layer of CZ gates pairing qubit `i` with qubit `n + i` on `2n` qubits.
///
/// Entry at index `a_1..a_n b_1..b_n` is `(-1)^(a·b)`.
pub fn cz_layer(n: usize) -> Result<UnitaryMatrix> {
    if n == 0 {
        return Err(Error::InvalidDimension("cz_layer needs n >= 1".into()));
    }
    let lo_mask = (1usize << n) - 1;
    let diag: Vec<Complex64> = (0..1usize << (2 * n))
        .map(|k| {
            let a = k >> n;
            let b = k & lo_mask;
            if (a & b).count_ones() % 2 == 1 {
                -ONE
            } else {
                ONE
            }
        })
        .collect();
    Ok(UnitaryMatrix::new_unchecked(Matrix::from_diagonal(&diag)))
}

/// `U_Z (U ⊗ I)` on `2n` qubits for a `2^n`-dimensional `U`.
pub fn embed_double(u: &UnitaryMatrix) -> Result<UnitaryMatrix> {
    let dim = u.dim();
    if !dim.is_power_of_two() || dim < 2 {
        return Err(Error::Shape(format!(
            "embedding needs a 2^n x 2^n unitary with n >= 1, got dimension {dim}"
        )));
    }
    let n = dim.trailing_zeros() as usize;
    let lifted = u.kron(&UnitaryMatrix::identity(dim));
    // U_Z is diagonal: scale rows.
    let z = cz_layer(n)?;
    let big = dim * dim;
    let mut m = lifted.into_matrix();
    for r in 0..big {
        let s = z.get(r, r);
        if s != ONE {
            for c in 0..big {
                let v = m.get(r, c);
                if v != ZERO {
                    m.set(r, c, v * s);
                }
            }
        }
    }
    Ok(UnitaryMatrix::new_unchecked(m))
}
