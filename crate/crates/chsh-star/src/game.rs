//! Exact evaluation of the single-player CHSH* game for arbitrary
//! strategies, plus the two-player CHSH game and no-signaling boxes as
//! background cross-checks.

use rand::Rng;

use crate::error::{Error, Result};
use crate::quantum::{
    apply_channel, outcome_probabilities, BinaryMeasurement, DensityMatrix, QuantumChannel,
};

/// A full CHSH* strategy: the player fixes an initial state, controlled
/// transformations A₀/A₁ and B₀/B₁ (applied in sequence on inputs a, b)
/// and a final binary measurement producing c. The player wins when
/// c = a·b mod 2.
#[derive(Debug, Clone)]
pub struct StrategyStar {
    d: usize,
    init: DensityMatrix,
    a_gates: [QuantumChannel; 2],
    b_gates: [QuantumChannel; 2],
    meas: BinaryMeasurement,
}

impl StrategyStar {
    pub fn new(
        init: DensityMatrix,
        a_gates: [QuantumChannel; 2],
        b_gates: [QuantumChannel; 2],
        meas: BinaryMeasurement,
    ) -> Result<Self> {
        let d = init.dim();
        for ch in a_gates.iter().chain(b_gates.iter()) {
            if ch.d_in() != d || ch.d_out() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    got: ch.d_in().max(ch.d_out()),
                });
            }
        }
        if meas.dim() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: meas.dim(),
            });
        }
        Ok(Self {
            d,
            init,
            a_gates,
            b_gates,
            meas,
        })
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn init(&self) -> &DensityMatrix {
        &self.init
    }

    pub fn a_gate(&self, a: u8) -> &QuantumChannel {
        &self.a_gates[a as usize]
    }

    pub fn b_gate(&self, b: u8) -> &QuantumChannel {
        &self.b_gates[b as usize]
    }

    pub fn measurement(&self) -> &BinaryMeasurement {
        &self.meas
    }

    /// Final state B_b(A_a(init)).
    pub fn final_state(&self, a: u8, b: u8) -> Result<DensityMatrix> {
        let after_a = apply_channel(&self.init, self.a_gate(a))?;
        apply_channel(&after_a, self.b_gate(b))
    }
}

/// Per-input success probabilities and their mean w.
#[derive(Debug, Clone)]
pub struct GameTable {
    /// success[a][b] = p(c = a·b | a, b)
    pub success: [[f64; 2]; 2],
    pub w: f64,
}

/// p(c = a·b | a, b) for one input pair.
pub fn conditional_success(s: &StrategyStar, a: u8, b: u8) -> Result<f64> {
    let rho = s.final_state(a, b)?;
    let (p0, p1) = outcome_probabilities(&rho, s.measurement())?;
    Ok(if a & b == 1 { p1 } else { p0 })
}

/// The game value w = ¼ Σ_{a,b} p(c = a·b | a, b).
pub fn win_probability(s: &StrategyStar) -> Result<GameTable> {
    let mut success = [[0.0; 2]; 2];
    for a in 0..2u8 {
        for b in 0..2u8 {
            success[a as usize][b as usize] = conditional_success(s, a, b)?;
        }
    }
    let w = success.iter().flatten().sum::<f64>() / 4.0;
    Ok(GameTable { success, w })
}

/// Samples one outcome bit c for the given inputs; deterministic given
/// the stream position.
pub fn play_round<R: Rng + ?Sized>(s: &StrategyStar, a: u8, b: u8, rng: &mut R) -> Result<u8> {
    let rho = s.final_state(a, b)?;
    let (p0, _) = outcome_probabilities(&rho, s.measurement())?;
    let u: f64 = rng.gen();
    Ok(if u < p0 { 0 } else { 1 })
}

/// Two-player CHSH strategy: a shared state on d² and one binary
/// measurement per party per input bit.
#[derive(Debug, Clone)]
pub struct ChshStrategy {
    shared_state: DensityMatrix,
    alice_meas: [BinaryMeasurement; 2],
    bob_meas: [BinaryMeasurement; 2],
}

impl ChshStrategy {
    pub fn new(
        shared_state: DensityMatrix,
        alice_meas: [BinaryMeasurement; 2],
        bob_meas: [BinaryMeasurement; 2],
    ) -> Result<Self> {
        let d_a = alice_meas[0].dim();
        let d_b = bob_meas[0].dim();
        if alice_meas[1].dim() != d_a || bob_meas[1].dim() != d_b {
            return Err(Error::DimensionMismatch {
                expected: d_a,
                got: alice_meas[1].dim(),
            });
        }
        if shared_state.dim() != d_a * d_b {
            return Err(Error::DimensionMismatch {
                expected: d_a * d_b,
                got: shared_state.dim(),
            });
        }
        Ok(Self {
            shared_state,
            alice_meas,
            bob_meas,
        })
    }
}

/// w = ¼ Σ_{a,b} Σ_{x⊕y = a·b} tr[(E^A_{a,x} ⊗ E^B_{b,y}) ρ].
pub fn chsh_win_probability(c: &ChshStrategy) -> Result<f64> {
    let rho = c.shared_state.matrix();
    let mut w = 0.0;
    for a in 0..2usize {
        for b in 0..2usize {
            for x in 0..2u8 {
                for y in 0..2u8 {
                    if (x ^ y) != ((a & b) as u8) {
                        continue;
                    }
                    let joint = c.alice_meas[a].effect(x).kron(c.bob_meas[b].effect(y));
                    let p = joint.mul(rho).trace();
                    if p.im.abs() > 1e-10 {
                        return Err(Error::Internal(format!(
                            "complex joint probability {:.3e}",
                            p.im
                        )));
                    }
                    w += p.re;
                }
            }
        }
    }
    Ok(w / 4.0)
}

const BOX_TOL: f64 = 1e-12;

/// Conditional table p(x, y | a, b) obeying positivity, normalization and
/// the no-signaling marginal constraints.
#[derive(Debug, Clone)]
pub struct NoSignalingBox {
    /// indexed [a][b][x][y]
    p: [[[[f64; 2]; 2]; 2]; 2],
}

impl NoSignalingBox {
    pub fn new(p: [[[[f64; 2]; 2]; 2]; 2]) -> Result<Self> {
        for a in 0..2 {
            for b in 0..2 {
                let mut total = 0.0;
                for x in 0..2 {
                    for y in 0..2 {
                        let v = p[a][b][x][y];
                        if !(0.0..=1.0 + BOX_TOL).contains(&v) {
                            return Err(Error::InvalidBox(format!(
                                "entry p({x},{y}|{a},{b}) = {v} out of range"
                            )));
                        }
                        total += v;
                    }
                }
                if (total - 1.0).abs() > BOX_TOL {
                    return Err(Error::InvalidBox(format!(
                        "p(.|{a},{b}) sums to {total}"
                    )));
                }
            }
        }
        // no-signaling: Alice's marginal independent of b, Bob's of a
        for x in 0..2 {
            for a in 0..2 {
                let m0: f64 = (0..2).map(|y| p[a][0][x][y]).sum();
                let m1: f64 = (0..2).map(|y| p[a][1][x][y]).sum();
                if (m0 - m1).abs() > BOX_TOL {
                    return Err(Error::InvalidBox("Alice marginal depends on b".into()));
                }
            }
        }
        for y in 0..2 {
            for b in 0..2 {
                let m0: f64 = (0..2).map(|x| p[0][b][x][y]).sum();
                let m1: f64 = (0..2).map(|x| p[1][b][x][y]).sum();
                if (m0 - m1).abs() > BOX_TOL {
                    return Err(Error::InvalidBox("Bob marginal depends on a".into()));
                }
            }
        }
        Ok(Self { p })
    }

    /// p(x, y | a, b) = ½ iff x⊕y = a·b.
    pub fn pr_box() -> Self {
        let mut p = [[[[0.0; 2]; 2]; 2]; 2];
        for a in 0..2 {
            for b in 0..2 {
                for x in 0..2 {
                    for y in 0..2 {
                        if (x ^ y) == (a & b) {
                            p[a][b][x][y] = 0.5;
                        }
                    }
                }
            }
        }
        Self::new(p).unwrap()
    }

    pub fn uniform() -> Self {
        Self::new([[[[0.25; 2]; 2]; 2]; 2]).unwrap()
    }

    /// Deterministic local box: x = f(a), y = g(b).
    pub fn deterministic(fx: [u8; 2], gy: [u8; 2]) -> Self {
        let mut p = [[[[0.0; 2]; 2]; 2]; 2];
        for a in 0..2 {
            for b in 0..2 {
                p[a][b][fx[a] as usize][gy[b] as usize] = 1.0;
            }
        }
        Self::new(p).unwrap()
    }
}

/// w = ¼ Σ_{a,b} Σ_{x⊕y = a·b} p(x, y | a, b).
pub fn box_win_probability(bx: &NoSignalingBox) -> f64 {
    let mut w = 0.0;
    for a in 0..2 {
        for b in 0..2 {
            for x in 0..2 {
                for y in 0..2 {
                    if (x ^ y) == (a & b) {
                        w += bx.p[a][b][x][y];
                    }
                }
            }
        }
    }
    w / 4.0
}
