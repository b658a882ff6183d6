//! Catalog of named gates and channels: rotations, Paulis, the 24-element
//! single-qubit Clifford group, ERASE, permutation gates and generalized
//! qudit Paulis, plus the parametrizations the optimizer searches over.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rand::Rng;

use crate::error::{Error, Result};
use crate::linalg::ComplexMatrix;
use crate::quantum::{equal_up_to_global_phase, QuantumChannel, UnitaryGate};

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Rotation about z: diag(e^{−iθ/2}, e^{iθ/2}).
pub fn rz(theta: f64) -> UnitaryGate {
    let m = ComplexMatrix::new(
        2,
        2,
        vec![
            Complex64::from_polar(1.0, -theta / 2.0),
            c(0.0, 0.0),
            c(0.0, 0.0),
            Complex64::from_polar(1.0, theta / 2.0),
        ],
    )
    .unwrap();
    UnitaryGate::new(m).unwrap()
}

/// Rotation about y.
pub fn ry(theta: f64) -> UnitaryGate {
    let (s, co) = (theta / 2.0).sin_cos();
    let m = ComplexMatrix::from_real(2, 2, &[co, -s, s, co]).unwrap();
    UnitaryGate::new(m).unwrap()
}

pub fn pauli_x() -> UnitaryGate {
    UnitaryGate::new(ComplexMatrix::from_real(2, 2, &[0., 1., 1., 0.]).unwrap()).unwrap()
}

pub fn pauli_y() -> UnitaryGate {
    let m = ComplexMatrix::new(
        2,
        2,
        vec![c(0., 0.), c(0., -1.), c(0., 1.), c(0., 0.)],
    )
    .unwrap();
    UnitaryGate::new(m).unwrap()
}

pub fn pauli_z() -> UnitaryGate {
    UnitaryGate::new(ComplexMatrix::from_real(2, 2, &[1., 0., 0., -1.]).unwrap()).unwrap()
}

pub fn hadamard() -> UnitaryGate {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    UnitaryGate::new(ComplexMatrix::from_real(2, 2, &[h, h, h, -h]).unwrap()).unwrap()
}

/// Phase gate S = diag(1, i).
pub fn phase_s() -> UnitaryGate {
    let m = ComplexMatrix::new(
        2,
        2,
        vec![c(1., 0.), c(0., 0.), c(0., 0.), c(0., 1.)],
    )
    .unwrap();
    UnitaryGate::new(m).unwrap()
}

/// One member of the single-qubit Clifford group, labeled by a shortest
/// generator word over {H, S} ("I" for the identity).
#[derive(Debug, Clone)]
pub struct CliffordElement {
    pub word: String,
    pub gate: UnitaryGate,
}

/// Closure of {H, S} under multiplication, deduplicated up to global
/// phase. Exactly 24 elements; order is deterministic (breadth-first by
/// word length, then lexicographic).
pub fn clifford_group_qubit() -> Result<Vec<CliffordElement>> {
    const TOL: f64 = 1e-9;
    let generators = [("H", hadamard()), ("S", phase_s())];
    let mut elements: Vec<CliffordElement> = vec![CliffordElement {
        word: "I".to_string(),
        gate: UnitaryGate::identity(2),
    }];
    let mut frontier: Vec<usize> = vec![0];
    while !frontier.is_empty() {
        let mut next = Vec::new();
        for &idx in &frontier {
            for (name, g) in &generators {
                let candidate = elements[idx].gate.then(g)?;
                let known = elements
                    .iter()
                    .any(|e| equal_up_to_global_phase(&candidate, &e.gate, TOL));
                if !known {
                    let word = if elements[idx].word == "I" {
                        name.to_string()
                    } else {
                        format!("{}{}", elements[idx].word, name)
                    };
                    elements.push(CliffordElement {
                        word,
                        gate: candidate,
                    });
                    next.push(elements.len() - 1);
                }
            }
        }
        frontier = next;
    }
    if elements.len() != 24 {
        return Err(Error::Internal(format!(
            "Clifford closure stabilized at {} elements, expected 24",
            elements.len()
        )));
    }
    Ok(elements)
}

/// Channel sending every state to |target⟩⟨target|: Kraus {|t⟩⟨j|}.
pub fn erase_channel(d: usize, target_index: usize) -> Result<QuantumChannel> {
    if target_index >= d {
        return Err(Error::InvalidChannel(format!(
            "erase target {} out of range for d={}",
            target_index, d
        )));
    }
    let kraus = (0..d)
        .map(|j| {
            let mut k = ComplexMatrix::zeros(d, d);
            k[(target_index, j)] = c(1.0, 0.0);
            k
        })
        .collect();
    QuantumChannel::new(kraus)
}

/// Unitary with entries u[perm[j], j] = 1.
pub fn permutation_gate(perm: &[usize]) -> Result<UnitaryGate> {
    let d = perm.len();
    let mut seen = vec![false; d];
    for &p in perm {
        if p >= d || seen[p] {
            return Err(Error::InvalidPermutation(format!("{:?} is not a bijection", perm)));
        }
        seen[p] = true;
    }
    let mut m = ComplexMatrix::zeros(d, d);
    for (j, &i) in perm.iter().enumerate() {
        m[(i, j)] = c(1.0, 0.0);
    }
    UnitaryGate::new(m)
}

/// X_d |j⟩ = |j+1 mod d⟩.
pub fn generalized_shift(d: usize) -> UnitaryGate {
    let perm: Vec<usize> = (0..d).map(|j| (j + 1) % d).collect();
    permutation_gate(&perm).unwrap()
}

/// Z_d = diag(ω^j) with ω = e^{2πi/d}.
pub fn generalized_clock(d: usize) -> UnitaryGate {
    let mut m = ComplexMatrix::zeros(d, d);
    for j in 0..d {
        m[(j, j)] = Complex64::from_polar(1.0, std::f64::consts::TAU * j as f64 / d as f64);
    }
    UnitaryGate::new(m).unwrap()
}

/// ZYZ Euler decomposition: Rz(alpha)·Ry(beta)·Rz(gamma).
pub fn su2_from_angles(alpha: f64, beta: f64, gamma: f64) -> UnitaryGate {
    rz(gamma).then(&ry(beta)).unwrap().then(&rz(alpha)).unwrap()
}

/// Parameter count for `unitary_from_params`.
pub fn param_count(d: usize) -> usize {
    d * d - 1
}

/// Special unitary of dimension d from d²−1 real parameters: ordered
/// Givens rotations with interleaved phases, plus d−1 diagonal phases.
/// For d = 2 this reduces to the ZYZ Euler angles.
pub fn unitary_from_params(d: usize, params: &[f64]) -> Result<UnitaryGate> {
    let expected = param_count(d);
    if params.len() != expected {
        return Err(Error::WrongParameterCount {
            expected,
            got: params.len(),
        });
    }
    if d == 2 {
        return Ok(su2_from_angles(params[0], params[1], params[2]));
    }
    let mut m = ComplexMatrix::identity(d);
    let mut idx = 0;
    for i in 0..d {
        for j in (i + 1)..d {
            let theta = params[idx];
            let phi = params[idx + 1];
            idx += 2;
            let (s, co) = theta.sin_cos();
            let mut g = ComplexMatrix::identity(d);
            g[(i, i)] = c(co, 0.0);
            g[(i, j)] = Complex64::from_polar(-s, phi);
            g[(j, i)] = Complex64::from_polar(s, -phi);
            g[(j, j)] = c(co, 0.0);
            m = g.mul(&m);
        }
    }
    let mut phase_sum = 0.0;
    let mut diag = ComplexMatrix::identity(d);
    for k in 0..(d - 1) {
        let psi = params[idx];
        idx += 1;
        phase_sum += psi;
        diag[(k, k)] = Complex64::from_polar(1.0, psi);
    }
    diag[(d - 1, d - 1)] = Complex64::from_polar(1.0, -phase_sum);
    debug_assert_eq!(idx, expected);
    UnitaryGate::new(diag.mul(&m))
}

/// Random special unitary from uniform parameters in [−π, π].
pub fn random_unitary<R: Rng + ?Sized>(d: usize, rng: &mut R) -> UnitaryGate {
    let params: Vec<f64> = (0..param_count(d))
        .map(|_| rng.gen_range(-std::f64::consts::PI..std::f64::consts::PI))
        .collect();
    unitary_from_params(d, &params).unwrap()
}

/// Symbolic gate name used in reports and on the CLI.
#[derive(Debug, Clone, PartialEq)]
pub enum GateLabel {
    I,
    X,
    Y,
    Z,
    H,
    S,
    Rz(f64),
    Erase,
    /// Permutation as the image vector perm[j] = image of j; printed in
    /// cycle notation with fixed points kept as singletons so the
    /// dimension survives the round trip.
    Perm(Vec<usize>),
}

impl fmt::Display for GateLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GateLabel::I => write!(f, "I"),
            GateLabel::X => write!(f, "X"),
            GateLabel::Y => write!(f, "Y"),
            GateLabel::Z => write!(f, "Z"),
            GateLabel::H => write!(f, "H"),
            GateLabel::S => write!(f, "S"),
            GateLabel::Rz(theta) => write!(f, "Rz({})", theta),
            GateLabel::Erase => write!(f, "ERASE"),
            GateLabel::Perm(perm) => {
                write!(f, "PERM(")?;
                let mut visited = vec![false; perm.len()];
                for start in 0..perm.len() {
                    if visited[start] {
                        continue;
                    }
                    write!(f, "(")?;
                    let mut k = start;
                    let mut first = true;
                    loop {
                        if !first {
                            write!(f, " ")?;
                        }
                        first = false;
                        write!(f, "{}", k)?;
                        visited[k] = true;
                        k = perm[k];
                        if k == start {
                            break;
                        }
                    }
                    write!(f, ")")?;
                }
                write!(f, ")")
            }
        }
    }
}

impl FromStr for GateLabel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "I" => return Ok(GateLabel::I),
            "X" => return Ok(GateLabel::X),
            "Y" => return Ok(GateLabel::Y),
            "Z" => return Ok(GateLabel::Z),
            "H" => return Ok(GateLabel::H),
            "S" => return Ok(GateLabel::S),
            "ERASE" => return Ok(GateLabel::Erase),
            _ => {}
        }
        if let Some(inner) = s.strip_prefix("Rz(").and_then(|r| r.strip_suffix(')')) {
            let theta: f64 = inner
                .parse()
                .map_err(|_| Error::LabelParse(format!("bad angle in {:?}", s)))?;
            return Ok(GateLabel::Rz(theta));
        }
        if let Some(inner) = s.strip_prefix("PERM(").and_then(|r| r.strip_suffix(')')) {
            let mut cycles: Vec<Vec<usize>> = Vec::new();
            let mut rest = inner;
            while !rest.is_empty() {
                let body = rest
                    .strip_prefix('(')
                    .ok_or_else(|| Error::LabelParse(format!("bad cycle syntax in {:?}", s)))?;
                let close = body
                    .find(')')
                    .ok_or_else(|| Error::LabelParse(format!("unclosed cycle in {:?}", s)))?;
                let cycle: Vec<usize> = body[..close]
                    .split_whitespace()
                    .map(|t| {
                        t.parse()
                            .map_err(|_| Error::LabelParse(format!("bad index in {:?}", s)))
                    })
                    .collect::<Result<_>>()?;
                if cycle.is_empty() {
                    return Err(Error::LabelParse(format!("empty cycle in {:?}", s)));
                }
                cycles.push(cycle);
                rest = &body[close + 1..];
            }
            let d = cycles
                .iter()
                .flatten()
                .max()
                .map(|m| m + 1)
                .ok_or_else(|| Error::LabelParse(format!("no cycles in {:?}", s)))?;
            let mut perm: Vec<Option<usize>> = vec![None; d];
            for cycle in &cycles {
                for w in 0..cycle.len() {
                    let from = cycle[w];
                    let to = cycle[(w + 1) % cycle.len()];
                    if from >= d || perm[from].is_some() {
                        return Err(Error::LabelParse(format!("overlapping cycles in {:?}", s)));
                    }
                    perm[from] = Some(to);
                }
            }
            let perm: Vec<usize> = perm
                .into_iter()
                .map(|p| p.ok_or_else(|| Error::LabelParse(format!("incomplete cycles in {:?}", s))))
                .collect::<Result<_>>()?;
            return Ok(GateLabel::Perm(perm));
        }
        Err(Error::LabelParse(format!("unrecognized label {:?}", s)))
    }
}

impl GateLabel {
    /// The channel this label denotes at dimension d.
    pub fn to_channel(&self, d: usize) -> Result<QuantumChannel> {
        use crate::quantum::unitary_as_channel;
        let unitary = match self {
            GateLabel::Erase => return erase_channel(d, 0),
            GateLabel::Perm(perm) => permutation_gate(perm)?,
            GateLabel::I => UnitaryGate::identity(d),
            GateLabel::X => pauli_x(),
            GateLabel::Y => pauli_y(),
            GateLabel::Z => pauli_z(),
            GateLabel::H => hadamard(),
            GateLabel::S => phase_s(),
            GateLabel::Rz(theta) => rz(*theta),
        };
        if unitary.dim() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: unitary.dim(),
            });
        }
        Ok(unitary_as_channel(&unitary))
    }
}
