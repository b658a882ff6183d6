//! Canonical CHSH* strategies and exhaustive brute-force searches over
//! the classical, Clifford and qudit-permutation settings.

use std::time::Instant;

use itertools::Itertools;
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::game::{win_probability, ChshStrategy, StrategyStar};
use crate::gates::{
    self, clifford_group_qubit, erase_channel, hadamard, pauli_x, pauli_y, pauli_z, phase_s, rz,
    GateLabel,
};
use crate::linalg::ComplexMatrix;
use crate::quantum::{
    state_from_vector, unitary_as_channel, BinaryMeasurement, DensityMatrix, QuantumChannel,
    UnitaryGate,
};

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn plus_state() -> DensityMatrix {
    state_from_vector(&[c(1.0, 0.0), c(1.0, 0.0)]).unwrap()
}

fn x_measurement() -> BinaryMeasurement {
    BinaryMeasurement::from_observable(pauli_x().matrix()).unwrap()
}

fn z_measurement() -> BinaryMeasurement {
    BinaryMeasurement::from_observable(pauli_z().matrix()).unwrap()
}

/// The paper's parametrized unitary strategy: init |+⟩, A₀ = I,
/// A₁ = Rz(π/2), B₀ = Rz(−θ), B₁ = Rz(θ), measurement X.
pub fn unitary_theta_strategy(theta: f64) -> StrategyStar {
    StrategyStar::new(
        plus_state(),
        [
            QuantumChannel::identity(2),
            unitary_as_channel(&rz(std::f64::consts::FRAC_PI_2)),
        ],
        [
            unitary_as_channel(&rz(-theta)),
            unitary_as_channel(&rz(theta)),
        ],
        x_measurement(),
    )
    .unwrap()
}

/// Success probability of the unitary θ strategy in closed form:
/// 1/2 + sin(θ)/4 + cos(θ)/4.
pub fn closed_form_w(theta: f64) -> f64 {
    0.5 + theta.sin() / 4.0 + theta.cos() / 4.0
}

/// The perfect-win irreversible strategy: init |0⟩, A₀ = I, A₁ = X,
/// B₀ = ERASE, B₁ = I, measurement Z.
pub fn irreversible_strategy() -> StrategyStar {
    StrategyStar::new(
        DensityMatrix::basis_state(2, 0),
        [
            QuantumChannel::identity(2),
            unitary_as_channel(&pauli_x()),
        ],
        [erase_channel(2, 0).unwrap(), QuantumChannel::identity(2)],
        z_measurement(),
    )
    .unwrap()
}

/// Gate-label strings identifying one strategy in a search report.
#[derive(Debug, Clone, Serialize, PartialEq, Eq, PartialOrd, Ord)]
pub struct StrategyDescriptor {
    pub a0: String,
    pub a1: String,
    pub b0: String,
    pub b1: String,
    pub init: String,
    pub meas: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct SearchReport {
    pub setting: String,
    pub best_w: f64,
    pub optima: Vec<StrategyDescriptor>,
    pub search_space_size: u64,
    pub elapsed_seconds: f64,
}

fn init_from_label(label: &str) -> Result<DensityMatrix> {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    match label {
        "|+>" => Ok(plus_state()),
        "|->" => state_from_vector(&[c(h, 0.0), c(-h, 0.0)]),
        "|+i>" => state_from_vector(&[c(h, 0.0), c(0.0, h)]),
        "|-i>" => state_from_vector(&[c(h, 0.0), c(0.0, -h)]),
        "|0>" => Ok(DensityMatrix::basis_state(2, 0)),
        "|1>" => Ok(DensityMatrix::basis_state(2, 1)),
        _ => Err(Error::LabelParse(format!("bad init label {:?}", label))),
    }
}

fn meas_from_label(label: &str, d: usize) -> Result<BinaryMeasurement> {
    if let Some(inner) = label.strip_prefix("S={").and_then(|r| r.strip_suffix('}')) {
        let ones: Vec<usize> = inner
            .split(',')
            .filter(|t| !t.is_empty())
            .map(|t| {
                t.parse()
                    .map_err(|_| Error::LabelParse(format!("bad subset in {:?}", label)))
            })
            .collect::<Result<_>>()?;
        return BinaryMeasurement::from_basis_subset(d, &ones);
    }
    let (axis, sign) = label.split_at(label.len().saturating_sub(1));
    let base = match axis {
        "X" => BinaryMeasurement::from_observable(pauli_x().matrix())?,
        "Y" => BinaryMeasurement::from_observable(pauli_y().matrix())?,
        "Z" => BinaryMeasurement::from_observable(pauli_z().matrix())?,
        _ => return Err(Error::LabelParse(format!("bad measurement label {:?}", label))),
    };
    match sign {
        "+" => Ok(base),
        "-" => Ok(base.flipped()),
        _ => Err(Error::LabelParse(format!("bad measurement label {:?}", label))),
    }
}

fn gate_from_label(label: &str, d: usize) -> Result<QuantumChannel> {
    // generator words over {H, S} name Clifford elements
    if d == 2 && !label.is_empty() && label.chars().all(|ch| ch == 'H' || ch == 'S') {
        let mut u = UnitaryGate::identity(2);
        for ch in label.chars() {
            let g = if ch == 'H' { hadamard() } else { phase_s() };
            u = u.then(&g)?;
        }
        return Ok(unitary_as_channel(&u));
    }
    let parsed: GateLabel = label.parse()?;
    parsed.to_channel(d)
}

/// Rebuilds the concrete strategy a search descriptor denotes, so
/// reported optima can be re-evaluated through the exact engine.
pub fn descriptor_to_strategy(d: usize, desc: &StrategyDescriptor) -> Result<StrategyStar> {
    StrategyStar::new(
        init_from_label_dim(&desc.init, d)?,
        [gate_from_label(&desc.a0, d)?, gate_from_label(&desc.a1, d)?],
        [gate_from_label(&desc.b0, d)?, gate_from_label(&desc.b1, d)?],
        meas_from_label(&desc.meas, d)?,
    )
}

fn init_from_label_dim(label: &str, d: usize) -> Result<DensityMatrix> {
    if let Some(inner) = label.strip_prefix('|').and_then(|r| r.strip_suffix('>')) {
        if let Ok(k) = inner.parse::<usize>() {
            if k >= d {
                return Err(Error::LabelParse(format!("basis index {k} out of range")));
            }
            return Ok(DensityMatrix::basis_state(d, k));
        }
    }
    init_from_label(label)
}

fn sorted_optima(mut optima: Vec<StrategyDescriptor>) -> Vec<StrategyDescriptor> {
    optima.sort();
    optima
}

const TIE_TOL: f64 = 1e-12;

/// Exhaustive search over the reversible classical qubit setting:
/// init ∈ {|0⟩, |1⟩}, every gate ∈ {I, X}, measurement Z.
pub fn classical_search_d2() -> Result<SearchReport> {
    let start = Instant::now();
    let inits = ["|0>", "|1>"];
    let gate_labels = ["I", "X"];
    let gate_channels = [
        QuantumChannel::identity(2),
        unitary_as_channel(&pauli_x()),
    ];
    let meas = z_measurement();
    let mut best_w = f64::NEG_INFINITY;
    let mut optima = Vec::new();
    let mut space = 0u64;
    for (ii, init_label) in inits.iter().enumerate() {
        let init = DensityMatrix::basis_state(2, ii);
        for a0 in 0..2 {
            for a1 in 0..2 {
                for b0 in 0..2 {
                    for b1 in 0..2 {
                        space += 1;
                        let s = StrategyStar::new(
                            init.clone(),
                            [gate_channels[a0].clone(), gate_channels[a1].clone()],
                            [gate_channels[b0].clone(), gate_channels[b1].clone()],
                            meas.clone(),
                        )?;
                        let w = win_probability(&s)?.w;
                        if w > best_w + TIE_TOL {
                            best_w = w;
                            optima.clear();
                        }
                        if (w - best_w).abs() <= TIE_TOL {
                            optima.push(StrategyDescriptor {
                                a0: gate_labels[a0].into(),
                                a1: gate_labels[a1].into(),
                                b0: gate_labels[b0].into(),
                                b1: gate_labels[b1].into(),
                                init: init_label.to_string(),
                                meas: "Z+".into(),
                            });
                        }
                    }
                }
            }
        }
    }
    Ok(SearchReport {
        setting: "classical-d2".into(),
        best_w,
        optima: sorted_optima(optima),
        search_space_size: space,
        elapsed_seconds: start.elapsed().as_secs_f64(),
    })
}

fn stabilizer_inits() -> Vec<(String, DensityMatrix)> {
    ["|0>", "|1>", "|+>", "|->", "|+i>", "|-i>"]
        .iter()
        .map(|l| (l.to_string(), init_from_label(l).unwrap()))
        .collect()
}

/// Brute force over the 24-element Clifford group for all four gates.
/// The default setting fixes init = |+⟩ and measurement = X; the
/// extended search also ranges over the six stabilizer initial states
/// and all Pauli measurement bases in both sign conventions.
pub fn clifford_search_d2(extended: bool) -> Result<SearchReport> {
    let start = Instant::now();
    let group = clifford_group_qubit()?;
    let n = group.len();
    let settings: Vec<(String, DensityMatrix, String, BinaryMeasurement)> = if extended {
        let mut v = Vec::new();
        for (init_label, init) in stabilizer_inits() {
            for axis in ["X", "Y", "Z"] {
                for sign in ["+", "-"] {
                    let meas_label = format!("{axis}{sign}");
                    let meas = meas_from_label(&meas_label, 2)?;
                    v.push((init_label.clone(), init.clone(), meas_label, meas));
                }
            }
        }
        v
    } else {
        vec![("|+>".to_string(), plus_state(), "X+".to_string(), x_measurement())]
    };

    let mut best_w = f64::NEG_INFINITY;
    let mut optima = Vec::new();
    let mut space = 0u64;
    for (init_label, init, meas_label, meas) in &settings {
        // p0[i][j] = p(c=0) after gate i then gate j; the four conditional
        // successes of any gate choice are lookups into this table
        let mut p0 = vec![vec![0.0f64; n]; n];
        for (i, gi) in group.iter().enumerate() {
            let after_a = crate::quantum::apply_channel(init, &unitary_as_channel(&gi.gate))?;
            for (j, gj) in group.iter().enumerate() {
                let rho = crate::quantum::apply_channel(&after_a, &unitary_as_channel(&gj.gate))?;
                p0[i][j] = crate::quantum::outcome_probabilities(&rho, meas)?.0;
            }
        }
        for a0 in 0..n {
            for a1 in 0..n {
                for b0 in 0..n {
                    for b1 in 0..n {
                        space += 1;
                        let w = (p0[a0][b0] + p0[a0][b1] + p0[a1][b0] + 1.0 - p0[a1][b1]) / 4.0;
                        if w > best_w + TIE_TOL {
                            best_w = w;
                            optima.clear();
                        }
                        if (w - best_w).abs() <= TIE_TOL {
                            optima.push(StrategyDescriptor {
                                a0: group[a0].word.clone(),
                                a1: group[a1].word.clone(),
                                b0: group[b0].word.clone(),
                                b1: group[b1].word.clone(),
                                init: init_label.clone(),
                                meas: meas_label.clone(),
                            });
                        }
                    }
                }
            }
        }
    }
    Ok(SearchReport {
        setting: if extended {
            "clifford-d2-extended".into()
        } else {
            "clifford-d2".into()
        },
        best_w,
        optima: sorted_optima(optima),
        search_space_size: space,
        elapsed_seconds: start.elapsed().as_secs_f64(),
    })
}

/// Exhaustive search over reversible classical qudit strategies: basis
/// initial states, permutation gates, and every nonempty proper basis
/// subset as the c = 1 binarizer.
pub fn qudit_permutation_search(d: usize) -> Result<SearchReport> {
    if !(2..=5).contains(&d) {
        return Err(Error::UnsupportedDimension(d));
    }
    let start = Instant::now();
    let perms: Vec<Vec<usize>> = (0..d).permutations(d).collect();
    let n = perms.len();
    let subsets: Vec<u32> = (1..((1u32 << d) - 1)).collect();
    let mut best_w = f64::NEG_INFINITY;
    let mut optima = Vec::new();
    let mut space = 0u64;
    for init in 0..d {
        for &mask in &subsets {
            let bit = |k: usize| -> u8 { ((mask >> k) & 1) as u8 };
            for a0 in 0..n {
                let pos_a0 = perms[a0][init];
                for a1 in 0..n {
                    let pos_a1 = perms[a1][init];
                    for b0 in 0..n {
                        let c00 = bit(perms[b0][pos_a0]);
                        let c10 = bit(perms[b0][pos_a1]);
                        for b1 in 0..n {
                            space += 1;
                            let c01 = bit(perms[b1][pos_a0]);
                            let c11 = bit(perms[b1][pos_a1]);
                            let wins = (c00 == 0) as u32
                                + (c01 == 0) as u32
                                + (c10 == 0) as u32
                                + (c11 == 1) as u32;
                            let w = wins as f64 / 4.0;
                            if w > best_w + TIE_TOL {
                                best_w = w;
                                optima.clear();
                            }
                            if (w - best_w).abs() <= TIE_TOL {
                                let ones: Vec<String> = (0..d)
                                    .filter(|&k| bit(k) == 1)
                                    .map(|k| k.to_string())
                                    .collect();
                                optima.push(StrategyDescriptor {
                                    a0: GateLabel::Perm(perms[a0].clone()).to_string(),
                                    a1: GateLabel::Perm(perms[a1].clone()).to_string(),
                                    b0: GateLabel::Perm(perms[b0].clone()).to_string(),
                                    b1: GateLabel::Perm(perms[b1].clone()).to_string(),
                                    init: format!("|{init}>"),
                                    meas: format!("S={{{}}}", ones.join(",")),
                                });
                            }
                        }
                    }
                }
            }
        }
    }
    Ok(SearchReport {
        setting: format!("permutation-qudit({d})"),
        best_w,
        optima: sorted_optima(optima),
        search_space_size: space,
        elapsed_seconds: start.elapsed().as_secs_f64(),
    })
}

/// The standard optimal two-player CHSH construction: a maximally
/// entangled pair, Alice measuring Z and X, Bob (Z±X)/√2.
pub fn chsh_optimal_strategy() -> Result<ChshStrategy> {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let phi_plus = state_from_vector(&[c(h, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(h, 0.0)])?;
    let alice = [
        BinaryMeasurement::from_observable(pauli_z().matrix())?,
        BinaryMeasurement::from_observable(pauli_x().matrix())?,
    ];
    let scale = Complex64::new(h, 0.0);
    let zpx = pauli_z().matrix().add(pauli_x().matrix()).scale(scale);
    let zmx = pauli_z().matrix().sub(pauli_x().matrix()).scale(scale);
    let bob = [
        BinaryMeasurement::from_observable(&zpx)?,
        BinaryMeasurement::from_observable(&zmx)?,
    ];
    ChshStrategy::new(phi_plus, alice, bob)
}

/// Same measurement settings on the product state |00⟩ (cross-check).
pub fn chsh_product_state_strategy() -> Result<ChshStrategy> {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let zero_zero = state_from_vector(&[c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)])?;
    let alice = [
        BinaryMeasurement::from_observable(pauli_z().matrix())?,
        BinaryMeasurement::from_observable(pauli_x().matrix())?,
    ];
    let scale = Complex64::new(h, 0.0);
    let zpx = pauli_z().matrix().add(pauli_x().matrix()).scale(scale);
    let zmx = pauli_z().matrix().sub(pauli_x().matrix()).scale(scale);
    let bob = [
        BinaryMeasurement::from_observable(&zpx)?,
        BinaryMeasurement::from_observable(&zmx)?,
    ];
    ChshStrategy::new(zero_zero, alice, bob)
}

/// Random d = 2 reversible strategy (unitary gates, pure init,
/// projective measurement) for ceiling-sampling checks.
pub fn random_qubit_strategy<R: rand::Rng + ?Sized>(rng: &mut R) -> StrategyStar {
    let amps: Vec<Complex64> = (0..2)
        .map(|_| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
        .collect();
    let init = state_from_vector(&amps)
        .unwrap_or_else(|_| DensityMatrix::basis_state(2, 0));
    let gates: Vec<QuantumChannel> = (0..4)
        .map(|_| unitary_as_channel(&gates::random_unitary(2, rng)))
        .collect();
    // random projective measurement: conjugate the Z projectors
    let u = gates::random_unitary(2, rng);
    let p0 = {
        let mut m = ComplexMatrix::zeros(2, 2);
        m[(0, 0)] = c(1.0, 0.0);
        u.matrix().mul(&m).mul(&u.matrix().dagger())
    };
    let p1 = ComplexMatrix::identity(2).sub(&p0);
    let meas = BinaryMeasurement::new(p0, p1).unwrap();
    StrategyStar::new(
        init,
        [gates[0].clone(), gates[1].clone()],
        [gates[2].clone(), gates[3].clone()],
        meas,
    )
    .unwrap()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::chsh_win_probability;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

    fn tsirelson() -> f64 {
        (PI / 8.0).cos().powi(2)
    }

    #[test]
    fn theta_strategy_matches_closed_form_on_grid() {
        for k in 0..=1000 {
            let theta = 2.0 * PI * k as f64 / 1000.0;
            let w = win_probability(&unitary_theta_strategy(theta)).unwrap().w;
            assert!(
                (w - closed_form_w(theta)).abs() < 1e-12,
                "mismatch at theta = {theta}"
            );
        }
    }

    #[test]
    fn closed_form_values() {
        assert!((closed_form_w(FRAC_PI_4) - (0.5 + 2f64.sqrt() / 4.0)).abs() < 1e-15);
        assert!((closed_form_w(FRAC_PI_4) - tsirelson()).abs() < 1e-12);
        assert!((closed_form_w(0.0) - 0.75).abs() < 1e-15);
        assert!((closed_form_w(PI / 10.0) - 0.8150184).abs() < 1e-7);
    }

    #[test]
    fn closed_form_maximum_at_quarter_pi() {
        // grid check plus derivative sign change: d/dθ = (cosθ − sinθ)/4
        let mut best = (0.0, f64::NEG_INFINITY);
        for k in 0..=2000 {
            let theta = FRAC_PI_2 * k as f64 / 2000.0;
            let w = closed_form_w(theta);
            if w > best.1 {
                best = (theta, w);
            }
        }
        assert!((best.0 - FRAC_PI_4).abs() < 1e-3);
        assert!((best.1 - tsirelson()).abs() < 1e-6);
        let deriv = |t: f64| (t.cos() - t.sin()) / 4.0;
        assert!(deriv(FRAC_PI_4 - 0.01) > 0.0);
        assert!(deriv(FRAC_PI_4 + 0.01) < 0.0);
    }

    #[test]
    fn theta_strategy_endpoint_values() {
        assert!((win_probability(&unitary_theta_strategy(FRAC_PI_4)).unwrap().w - tsirelson()).abs() < 1e-12);
        assert!((win_probability(&unitary_theta_strategy(0.0)).unwrap().w - 0.75).abs() < 1e-12);
        assert!((win_probability(&unitary_theta_strategy(FRAC_PI_2)).unwrap().w - 0.75).abs() < 1e-12);
    }

    #[test]
    fn irreversible_strategy_is_perfect() {
        let table = win_probability(&irreversible_strategy()).unwrap();
        assert_eq!(table.w, 1.0);
        for row in table.success {
            for p in row {
                assert_eq!(p, 1.0);
            }
        }
    }

    #[test]
    fn classical_search_results() {
        let report = classical_search_d2().unwrap();
        assert_eq!(report.search_space_size, 32);
        assert!((report.best_w - 0.75).abs() < 1e-15);
        assert!(!report.optima.is_empty());
        for desc in &report.optima {
            let s = descriptor_to_strategy(2, desc).unwrap();
            let table = win_probability(&s).unwrap();
            assert!((table.w - report.best_w).abs() < 1e-12);
            // optima win exactly three of the four input pairs
            let wins = table
                .success
                .iter()
                .flatten()
                .filter(|&&p| (p - 1.0).abs() < 1e-12)
                .count();
            assert_eq!(wins, 3);
        }
        // the all-identity |0⟩ strategy is among the optima
        assert!(report.optima.iter().any(|o| o.a0 == "I"
            && o.a1 == "I"
            && o.b0 == "I"
            && o.b1 == "I"
            && o.init == "|0>"));
    }

    #[test]
    fn qudit_search_d3_is_perfect_and_d2_is_classical() {
        let r3 = qudit_permutation_search(3).unwrap();
        assert_eq!(r3.search_space_size, 23328);
        assert_eq!(r3.best_w, 1.0);
        // the spec's witness optimum appears
        let witness = StrategyDescriptor {
            a0: "PERM((0)(1)(2))".into(),
            a1: "PERM((0 1)(2))".into(),
            b0: "PERM((0)(1)(2))".into(),
            b1: "PERM((0)(1 2))".into(),
            init: "|0>".into(),
            meas: "S={2}".into(),
        };
        assert!(r3.optima.contains(&witness));
        for desc in r3.optima.iter().step_by(17) {
            let s = descriptor_to_strategy(3, desc).unwrap();
            assert!((win_probability(&s).unwrap().w - 1.0).abs() < 1e-12);
        }
        let r2 = qudit_permutation_search(2).unwrap();
        assert!((r2.best_w - 0.75).abs() < 1e-15);
        assert!(qudit_permutation_search(6).is_err());
    }

    #[test]
    fn chsh_cross_checks() {
        let w = chsh_win_probability(&chsh_optimal_strategy().unwrap()).unwrap();
        assert!((w - tsirelson()).abs() < 1e-12);
        let w00 = chsh_win_probability(&chsh_product_state_strategy().unwrap()).unwrap();
        assert!((w00 - (0.5 + 2f64.sqrt() / 8.0)).abs() < 1e-12);
    }

    #[test]
    fn chsh_bob_measuring_z_twice_is_classical() {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let phi_plus =
            state_from_vector(&[c(h, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(h, 0.0)]).unwrap();
        let alice = [
            BinaryMeasurement::from_observable(pauli_z().matrix()).unwrap(),
            BinaryMeasurement::from_observable(pauli_x().matrix()).unwrap(),
        ];
        let bob = [
            BinaryMeasurement::from_observable(pauli_z().matrix()).unwrap(),
            BinaryMeasurement::from_observable(pauli_z().matrix()).unwrap(),
        ];
        let s = ChshStrategy::new(phi_plus, alice, bob).unwrap();
        assert!((chsh_win_probability(&s).unwrap() - 0.75).abs() < 1e-12);
    }

    #[test]
    fn rz_convention_does_not_affect_win_probability() {
        // conjugate-convention Rz produces the same game value
        let conj_rz = |t: f64| rz(-t);
        for k in 0..20 {
            let theta = FRAC_PI_2 * k as f64 / 19.0;
            let s = StrategyStar::new(
                plus_state(),
                [
                    QuantumChannel::identity(2),
                    unitary_as_channel(&conj_rz(FRAC_PI_2)),
                ],
                [
                    unitary_as_channel(&conj_rz(-theta)),
                    unitary_as_channel(&conj_rz(theta)),
                ],
                x_measurement(),
            )
            .unwrap();
            let w = win_probability(&s).unwrap().w;
            assert!((w - closed_form_w(theta)).abs() < 1e-12);
        }
    }
}
