//! Jones-calculus model of the optical bench: waveplate matrices,
//! compilation of abstract gates into QWP-HWP-QWP sequences, the
//! ERASE output-port unit as outcome statistics, and angle-jitter /
//! flip-failure noise.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::game::StrategyStar;
use crate::gates::{pauli_z, rz};
use crate::linalg::ComplexMatrix;
use crate::quantum::{
    phase_distance, state_from_vector, unitary_as_channel, BinaryMeasurement, DensityMatrix,
    QuantumChannel, UnitaryGate,
};

const COMPILE_RESIDUAL_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum WaveplateKind {
    Hwp,
    Qwp,
}

/// One waveplate with its optical-axis orientation, normalized to [0, π).
/// `flip_stage` marks elements mounted on the motorized flip stage, which
/// the noise model may fail to insert.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct WaveplateElement {
    pub kind: WaveplateKind,
    pub angle: f64,
    pub flip_stage: bool,
}

impl WaveplateElement {
    pub fn new(kind: WaveplateKind, angle: f64) -> Self {
        Self {
            kind,
            angle: normalize_angle(angle),
            flip_stage: false,
        }
    }

    pub fn flip_stage(kind: WaveplateKind, angle: f64) -> Self {
        Self {
            kind,
            angle: normalize_angle(angle),
            flip_stage: true,
        }
    }

    pub fn matrix(&self) -> UnitaryGate {
        match self.kind {
            WaveplateKind::Hwp => hwp_matrix(self.angle),
            WaveplateKind::Qwp => qwp_matrix(self.angle),
        }
    }
}

fn normalize_angle(angle: f64) -> f64 {
    assert!(angle.is_finite());
    angle.rem_euclid(std::f64::consts::PI)
}

/// HWP(α) = [[cos2α, sin2α], [sin2α, −cos2α]].
pub fn hwp_matrix(alpha: f64) -> UnitaryGate {
    let (s, c) = (2.0 * alpha).sin_cos();
    UnitaryGate::new(ComplexMatrix::from_real(2, 2, &[c, s, s, -c]).unwrap()).unwrap()
}

/// QWP(α) = [[cos²α + i sin²α, (1−i) sinα cosα], [(1−i) sinα cosα, sin²α + i cos²α]].
pub fn qwp_matrix(alpha: f64) -> UnitaryGate {
    let (s, c) = alpha.sin_cos();
    let (s2, c2) = (s * s, c * c);
    let off = Complex64::new(1.0, -1.0) * (s * c);
    let m = ComplexMatrix::new(
        2,
        2,
        vec![
            Complex64::new(c2, s2),
            off,
            off,
            Complex64::new(s2, c2),
        ],
    )
    .unwrap();
    UnitaryGate::new(m).unwrap()
}

/// Waveplates applied first-to-last along the beam.
#[derive(Debug, Clone, Default)]
pub struct OpticalSequence {
    pub elements: Vec<WaveplateElement>,
}

impl OpticalSequence {
    pub fn new(elements: Vec<WaveplateElement>) -> Self {
        Self { elements }
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }
}

/// Ordered matrix product of the element matrices (last element leftmost).
pub fn sequence_unitary(seq: &OpticalSequence) -> UnitaryGate {
    let mut u = UnitaryGate::identity(2);
    for element in &seq.elements {
        u = u.then(&element.matrix()).unwrap();
    }
    u
}

impl fmt::Display for OpticalSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .elements
            .iter()
            .map(|e| {
                let kind = match e.kind {
                    WaveplateKind::Hwp => "HWP",
                    WaveplateKind::Qwp => "QWP",
                };
                format!("{}@{:.6}", kind, e.angle.to_degrees())
            })
            .collect();
        write!(f, "{}", parts.join(";"))
    }
}

impl FromStr for OpticalSequence {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s.trim().is_empty() {
            return Ok(Self::default());
        }
        let elements = s
            .split(';')
            .map(|part| {
                let (kind_str, angle_str) = part
                    .split_once('@')
                    .ok_or_else(|| Error::LabelParse(format!("bad waveplate {:?}", part)))?;
                let kind = match kind_str {
                    "HWP" => WaveplateKind::Hwp,
                    "QWP" => WaveplateKind::Qwp,
                    _ => return Err(Error::LabelParse(format!("bad waveplate kind {:?}", kind_str))),
                };
                let degrees: f64 = angle_str
                    .parse()
                    .map_err(|_| Error::LabelParse(format!("bad angle {:?}", angle_str)))?;
                Ok(WaveplateElement::new(kind, degrees.to_radians()))
            })
            .collect::<Result<_>>()?;
        Ok(Self { elements })
    }
}

/// Solved QWP(135°)-HWP(α*)-QWP(135°) realization of Rz(θ) together with
/// the achieved global-phase residual.
#[derive(Debug, Clone)]
pub struct CompiledRotation {
    pub sequence: OpticalSequence,
    pub middle_hwp_angle: f64,
    pub residual: f64,
}

fn rz_sequence_distance(alpha: f64, theta: f64) -> f64 {
    let q = qwp_matrix(3.0 * std::f64::consts::FRAC_PI_4);
    let u = q.matrix().mul(hwp_matrix(alpha).matrix()).mul(q.matrix());
    phase_distance(&u, rz(theta).matrix())
}

/// Compiles Rz(θ) into [QWP(135°), HWP(α*), QWP(135°)], solving for the
/// middle angle numerically (coarse grid then golden-section refinement;
/// the distance is V-shaped in α around the exact solution). Under this
/// Jones convention the solution is α* = π/4 − θ/4 mod π/2, but the
/// solver does not assume that.
pub fn compile_rz(theta: f64) -> Result<CompiledRotation> {
    let pi = std::f64::consts::PI;
    let coarse = 512usize;
    let mut best_alpha = 0.0;
    let mut best_dist = f64::INFINITY;
    for k in 0..coarse {
        let alpha = pi * k as f64 / coarse as f64;
        let dist = rz_sequence_distance(alpha, theta);
        if dist < best_dist {
            best_dist = dist;
            best_alpha = alpha;
        }
    }
    let step = pi / coarse as f64;
    let (mut lo, mut hi) = (best_alpha - step, best_alpha + step);
    let golden = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - golden * (hi - lo);
    let mut x2 = lo + golden * (hi - lo);
    let mut f1 = rz_sequence_distance(x1, theta);
    let mut f2 = rz_sequence_distance(x2, theta);
    while hi - lo > 1e-14 {
        if f1 < f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - golden * (hi - lo);
            f1 = rz_sequence_distance(x1, theta);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + golden * (hi - lo);
            f2 = rz_sequence_distance(x2, theta);
        }
    }
    let (alpha, residual) = if f1 < f2 { (x1, f1) } else { (x2, f2) };
    let (alpha, residual) = if best_dist < residual {
        (best_alpha, best_dist)
    } else {
        (alpha, residual)
    };
    if residual > COMPILE_RESIDUAL_TOL {
        return Err(Error::CompilationResidual { residual });
    }
    let q = 3.0 * std::f64::consts::FRAC_PI_4;
    Ok(CompiledRotation {
        sequence: OpticalSequence::new(vec![
            WaveplateElement::new(WaveplateKind::Qwp, q),
            WaveplateElement::new(WaveplateKind::Hwp, alpha),
            WaveplateElement::new(WaveplateKind::Qwp, q),
        ]),
        middle_hwp_angle: normalize_angle(alpha),
        residual,
    })
}

/// The X measurement realized by a 22.5° HWP followed by the PBS:
/// effects U†·diag(1,0)·U and U†·diag(0,1)·U with U = HWP(π/8).
pub fn compile_measurement_x() -> BinaryMeasurement {
    measurement_through_hwp(std::f64::consts::FRAC_PI_8)
}

fn measurement_through_hwp(hwp_angle: f64) -> BinaryMeasurement {
    let u = hwp_matrix(hwp_angle);
    let mut d0 = ComplexMatrix::zeros(2, 2);
    d0[(0, 0)] = Complex64::new(1.0, 0.0);
    let d1 = ComplexMatrix::identity(2).sub(&d0);
    let effect0 = u.matrix().dagger().mul(&d0).mul(u.matrix());
    let effect1 = u.matrix().dagger().mul(&d1).mul(u.matrix());
    BinaryMeasurement::new(effect0, effect1).unwrap()
}

/// Outcome statistics of the ERASE output-port unit with its internal
/// HWP at the given angle: effect1 (detector D1) = sin²(2α)·|V⟩⟨V|.
/// At 45° this is the Z measurement; at 0° the outcome is always c = 0.
pub fn erase_unit_measurement(hwp_angle: f64) -> BinaryMeasurement {
    let s = (2.0 * hwp_angle).sin().powi(2);
    let mut effect1 = ComplexMatrix::zeros(2, 2);
    effect1[(1, 1)] = Complex64::new(s, 0.0);
    let effect0 = ComplexMatrix::identity(2).sub(&effect1);
    BinaryMeasurement::new(effect0, effect1).unwrap()
}

/// Channel whose Z-basis statistics equal `erase_unit_measurement` at the
/// same angle: Kraus {|0⟩⟨0|, cos2α·|0⟩⟨1|, sin2α·|1⟩⟨1|}. At 0° this is
/// ERASE; at 45° it is Z-dephasing, indistinguishable from the identity
/// by the final Z measurement.
pub fn erase_unit_channel(hwp_angle: f64) -> QuantumChannel {
    let (s, c) = (2.0 * hwp_angle).sin_cos();
    let mut k0 = ComplexMatrix::zeros(2, 2);
    k0[(0, 0)] = Complex64::new(1.0, 0.0);
    let mut k1 = ComplexMatrix::zeros(2, 2);
    k1[(0, 1)] = Complex64::new(c, 0.0);
    let mut k2 = ComplexMatrix::zeros(2, 2);
    k2[(1, 1)] = Complex64::new(s, 0.0);
    QuantumChannel::new(vec![k0, k1, k2]).unwrap()
}

/// Angle jitter plus flip-stage failure.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct NoiseModel {
    /// standard deviation of the independent zero-mean angle offset (rad)
    pub angle_jitter_sigma: f64,
    /// probability that the flip-stage insertion fails entirely
    pub flip_error_prob: f64,
}

impl NoiseModel {
    pub fn none() -> Self {
        Self {
            angle_jitter_sigma: 0.0,
            flip_error_prob: 0.0,
        }
    }

    pub fn is_noiseless(&self) -> bool {
        self.angle_jitter_sigma == 0.0 && self.flip_error_prob == 0.0
    }
}

fn gaussian<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    // Box-Muller; one value per call keeps the stream layout simple
    let u1: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
    let u2: f64 = rng.gen();
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

/// Perturbed copy of a sequence: one failure draw removes all flip-stage
/// elements together (the whole assembly misses the beam), then each
/// surviving angle gets an independent Gaussian offset.
pub fn perturb<R: Rng + ?Sized>(
    seq: &OpticalSequence,
    noise: &NoiseModel,
    rng: &mut R,
) -> OpticalSequence {
    let mut elements = seq.elements.clone();
    if elements.iter().any(|e| e.flip_stage) {
        let fail: f64 = rng.gen();
        if fail < noise.flip_error_prob {
            elements.retain(|e| !e.flip_stage);
        }
    }
    for e in &mut elements {
        if noise.angle_jitter_sigma > 0.0 {
            e.angle = normalize_angle(e.angle + noise.angle_jitter_sigma * gaussian(rng));
        }
    }
    OpticalSequence::new(elements)
}

/// The full unitary-setting bench, compiled once so noisy realizations
/// can be drawn without re-running the angle solver.
#[derive(Debug, Clone)]
pub struct CompiledThetaOptics {
    pub theta: f64,
    pub a1: OpticalSequence,
    pub b0: OpticalSequence,
    pub b1: OpticalSequence,
    pub meas_hwp: OpticalSequence,
}

impl CompiledThetaOptics {
    pub fn compile(theta: f64) -> Result<Self> {
        let mut a1 = compile_rz(std::f64::consts::FRAC_PI_2)?.sequence;
        for e in &mut a1.elements {
            e.flip_stage = true;
        }
        Ok(Self {
            theta,
            a1,
            b0: compile_rz(-theta)?.sequence,
            b1: compile_rz(theta)?.sequence,
            meas_hwp: OpticalSequence::new(vec![WaveplateElement::new(
                WaveplateKind::Hwp,
                std::f64::consts::FRAC_PI_8,
            )]),
        })
    }

    /// Strategy realized by (optionally perturbed) optics.
    pub fn strategy<R: Rng + ?Sized>(&self, noise: &NoiseModel, rng: &mut R) -> Result<StrategyStar> {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let init = state_from_vector(&[Complex64::new(h, 0.0), Complex64::new(h, 0.0)])?;
        let a1 = perturb(&self.a1, noise, rng);
        let b0 = perturb(&self.b0, noise, rng);
        let b1 = perturb(&self.b1, noise, rng);
        let meas_seq = perturb(&self.meas_hwp, noise, rng);
        let meas = if meas_seq.is_empty() {
            compile_measurement_x()
        } else {
            measurement_through_hwp(meas_seq.elements[0].angle)
        };
        StrategyStar::new(
            init,
            [
                QuantumChannel::identity(2),
                unitary_as_channel(&sequence_unitary(&a1)),
            ],
            [
                unitary_as_channel(&sequence_unitary(&b0)),
                unitary_as_channel(&sequence_unitary(&b1)),
            ],
            meas,
        )
    }
}

/// Compiled unitary-setting strategy at angle θ.
pub fn compiled_strategy<R: Rng + ?Sized>(
    theta: f64,
    noise: &NoiseModel,
    rng: &mut R,
) -> Result<StrategyStar> {
    CompiledThetaOptics::compile(theta)?.strategy(noise, rng)
}

/// Compiled irreversible-setting strategy: |0⟩ preparation, A₁ a
/// flip-stage HWP at 45°, and the ERASE output-port unit at 0° (B₀)
/// or 45° (B₁), modeled through its statistics-equivalent channel.
pub fn compiled_irreversible_strategy<R: Rng + ?Sized>(
    noise: &NoiseModel,
    rng: &mut R,
) -> Result<StrategyStar> {
    let a1_seq = OpticalSequence::new(vec![WaveplateElement::flip_stage(
        WaveplateKind::Hwp,
        std::f64::consts::FRAC_PI_4,
    )]);
    let a1 = perturb(&a1_seq, noise, rng);
    let jitter = |rng: &mut R, base: f64| {
        if noise.angle_jitter_sigma > 0.0 {
            base + noise.angle_jitter_sigma * gaussian(rng)
        } else {
            base
        }
    };
    let b0 = erase_unit_channel(jitter(rng, 0.0));
    let b1 = erase_unit_channel(jitter(rng, std::f64::consts::FRAC_PI_4));
    StrategyStar::new(
        DensityMatrix::basis_state(2, 0),
        [
            QuantumChannel::identity(2),
            unitary_as_channel(&sequence_unitary(&a1)),
        ],
        [b0, b1],
        BinaryMeasurement::from_observable(pauli_z().matrix()).unwrap(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::win_probability;
    use crate::gates::pauli_x;
    use crate::quantum::{apply_channel, equal_up_to_global_phase, outcome_probabilities};
    use crate::strategies::closed_form_w;
    use crate::stream::stream;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, FRAC_PI_8, PI};

    #[test]
    fn hwp_special_angles() {
        assert!(equal_up_to_global_phase(&hwp_matrix(0.0), &pauli_z(), 1e-12));
        assert!(equal_up_to_global_phase(&hwp_matrix(FRAC_PI_4), &pauli_x(), 1e-12));
        assert!(equal_up_to_global_phase(
            &hwp_matrix(FRAC_PI_8),
            &crate::gates::hadamard(),
            1e-12
        ));
    }

    #[test]
    fn waveplates_are_unitary_and_periodic() {
        for k in 0..50 {
            let alpha = PI * k as f64 / 50.0;
            let h = hwp_matrix(alpha);
            let q = qwp_matrix(alpha);
            assert!(h.matrix().unitarity_deviation() < 1e-12);
            assert!(q.matrix().unitarity_deviation() < 1e-12);
            // HWP² ∝ I, QWP⁴ ∝ I
            let h2 = h.matrix().mul(h.matrix());
            assert!(phase_distance(&h2, &ComplexMatrix::identity(2)) < 1e-12);
            let q2 = q.matrix().mul(q.matrix());
            let q4 = q2.mul(&q2);
            assert!(phase_distance(&q4, &ComplexMatrix::identity(2)) < 1e-12);
        }
    }

    #[test]
    fn sequence_unitary_cases() {
        assert!(sequence_unitary(&OpticalSequence::default())
            .matrix()
            .max_abs_diff(&ComplexMatrix::identity(2))
            < 1e-15);
        let twice = OpticalSequence::new(vec![
            WaveplateElement::new(WaveplateKind::Hwp, FRAC_PI_4),
            WaveplateElement::new(WaveplateKind::Hwp, FRAC_PI_4),
        ]);
        assert!(phase_distance(
            sequence_unitary(&twice).matrix(),
            &ComplexMatrix::identity(2)
        ) < 1e-12);
        // the sandwich relation: QWP(135°)·HWP(45°+δ)·QWP(135°) ≡ Rz(−4δ)
        let delta = 0.1;
        let seq = OpticalSequence::new(vec![
            WaveplateElement::new(WaveplateKind::Qwp, 3.0 * FRAC_PI_4),
            WaveplateElement::new(WaveplateKind::Hwp, FRAC_PI_4 + delta),
            WaveplateElement::new(WaveplateKind::Qwp, 3.0 * FRAC_PI_4),
        ]);
        assert!(phase_distance(
            sequence_unitary(&seq).matrix(),
            rz(-4.0 * delta).matrix()
        ) < 1e-12);
    }

    #[test]
    fn compile_rz_hits_targets() {
        for theta in [0.0, -FRAC_PI_4, FRAC_PI_2, 1.234, -2.9] {
            let compiled = compile_rz(theta).unwrap();
            assert!(compiled.residual <= 1e-10, "residual {}", compiled.residual);
            let u = sequence_unitary(&compiled.sequence);
            assert!(phase_distance(u.matrix(), rz(theta).matrix()) <= 1e-10);
        }
    }

    #[test]
    fn compile_rz_solved_angle_relation() {
        // α* = π/4 − θ/4 modulo the HWP's π/2 effective period
        let theta = 0.6;
        let compiled = compile_rz(theta).unwrap();
        let expected = (FRAC_PI_4 - theta / 4.0).rem_euclid(FRAC_PI_2);
        let got = compiled.middle_hwp_angle.rem_euclid(FRAC_PI_2);
        let raw = (got - expected).abs();
        let diff = raw.min(FRAC_PI_2 - raw);
        assert!(diff < 1e-9, "got {got}, expected {expected}");
    }

    #[test]
    fn compiled_x_measurement_matches_ideal() {
        let compiled = compile_measurement_x();
        let ideal = BinaryMeasurement::from_observable(pauli_x().matrix()).unwrap();
        for outcome in [0, 1] {
            assert!(compiled.effect(outcome).max_abs_diff(ideal.effect(outcome)) < 1e-12);
        }
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let plus = state_from_vector(&[Complex64::new(h, 0.0), Complex64::new(h, 0.0)]).unwrap();
        let (p0, _) = outcome_probabilities(&plus, &compiled).unwrap();
        assert!((p0 - 1.0).abs() < 1e-12);
        let (q0, _) = outcome_probabilities(&DensityMatrix::basis_state(2, 0), &compiled).unwrap();
        assert!((q0 - 0.5).abs() < 1e-12);
    }

    #[test]
    fn erase_unit_measurement_cases() {
        let one = DensityMatrix::basis_state(2, 1);
        let at_45 = erase_unit_measurement(FRAC_PI_4);
        assert!((outcome_probabilities(&one, &at_45).unwrap().1 - 1.0).abs() < 1e-12);
        let at_0 = erase_unit_measurement(0.0);
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let plus = state_from_vector(&[Complex64::new(h, 0.0), Complex64::new(h, 0.0)]).unwrap();
        for rho in [&one, &plus] {
            assert!((outcome_probabilities(rho, &at_0).unwrap().0 - 1.0).abs() < 1e-12);
        }
        let at_eighth = erase_unit_measurement(FRAC_PI_8);
        assert!((outcome_probabilities(&one, &at_eighth).unwrap().1 - 0.5).abs() < 1e-12);
    }

    #[test]
    fn erase_unit_channel_statistics_match_measurement() {
        let mut rng = stream(17, &[0]);
        let z = BinaryMeasurement::from_observable(pauli_z().matrix()).unwrap();
        for _ in 0..50 {
            let amps: Vec<Complex64> = (0..2)
                .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
                .collect();
            let rho = state_from_vector(&amps).unwrap();
            for angle in [0.0, FRAC_PI_8, FRAC_PI_4, 0.3] {
                let via_channel =
                    outcome_probabilities(&apply_channel(&rho, &erase_unit_channel(angle)).unwrap(), &z)
                        .unwrap();
                let via_povm = outcome_probabilities(&rho, &erase_unit_measurement(angle)).unwrap();
                assert!((via_channel.0 - via_povm.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn perturb_identity_when_noiseless() {
        let seq = compile_rz(0.7).unwrap().sequence;
        let out = perturb(&seq, &NoiseModel::none(), &mut stream(1, &[2]));
        for (a, b) in seq.elements.iter().zip(&out.elements) {
            assert_eq!(a.angle, b.angle);
        }
    }

    #[test]
    fn perturb_is_reproducible() {
        let seq = compile_rz(0.7).unwrap().sequence;
        let noise = NoiseModel {
            angle_jitter_sigma: 0.1,
            flip_error_prob: 0.0,
        };
        let a = perturb(&seq, &noise, &mut stream(3, &[9]));
        let b = perturb(&seq, &noise, &mut stream(3, &[9]));
        for (x, y) in a.elements.iter().zip(&b.elements) {
            assert_eq!(x.angle, y.angle);
            assert!(x.angle != seq.elements[0].angle || x.angle != 0.0);
        }
    }

    #[test]
    fn compiled_strategy_matches_ideal_without_noise() {
        for theta in [0.0, FRAC_PI_4, FRAC_PI_2, 0.33] {
            let s = compiled_strategy(theta, &NoiseModel::none(), &mut stream(0, &[0])).unwrap();
            let w = win_probability(&s).unwrap().w;
            assert!((w - closed_form_w(theta)).abs() < 1e-10, "theta {theta}");
        }
    }

    #[test]
    fn compiled_irreversible_is_perfect_without_noise() {
        let s = compiled_irreversible_strategy(&NoiseModel::none(), &mut stream(0, &[0])).unwrap();
        assert!((win_probability(&s).unwrap().w - 1.0).abs() < 1e-12);
    }

    #[test]
    fn small_jitter_stays_near_optimum() {
        let optics = CompiledThetaOptics::compile(FRAC_PI_4).unwrap();
        let noise = NoiseModel {
            angle_jitter_sigma: 0.005,
            flip_error_prob: 0.0,
        };
        let tsirelson = (PI / 8.0).cos().powi(2);
        for k in 0..20 {
            let s = optics.strategy(&noise, &mut stream(21, &[k])).unwrap();
            let w = win_probability(&s).unwrap().w;
            assert!(w > 0.84 && w <= tsirelson + 1e-12, "w = {w}");
        }
    }

    #[test]
    fn irreversible_jitter_mean_close_to_one() {
        let noise = NoiseModel {
            angle_jitter_sigma: 0.02,
            flip_error_prob: 0.0,
        };
        let mut total = 0.0;
        let n = 100;
        for k in 0..n {
            let s = compiled_irreversible_strategy(&noise, &mut stream(77, &[k])).unwrap();
            total += win_probability(&s).unwrap().w;
        }
        let mean = total / n as f64;
        assert!(mean > 0.99 && mean < 1.0, "mean = {mean}");
    }

    #[test]
    fn sequence_text_round_trip() {
        let seq = compile_rz(-FRAC_PI_4).unwrap().sequence;
        let text = seq.to_string();
        let parsed: OpticalSequence = text.parse().unwrap();
        assert_eq!(parsed.to_string(), text);
        assert!(phase_distance(
            sequence_unitary(&parsed).matrix(),
            sequence_unitary(&seq).matrix()
        ) < 1e-6);
        assert!("QWP@10;HWP@x".parse::<OpticalSequence>().is_err());
        assert!("".parse::<OpticalSequence>().unwrap().is_empty());
    }
}
