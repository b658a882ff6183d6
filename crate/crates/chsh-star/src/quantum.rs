//! Quantum primitives at small dimension: density matrices, unitary
//! gates, Kraus channels and two-effect measurements, together with the
//! distances and equivalences the rest of the crate builds on.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{hermitian_eigenvalues, outer, ComplexMatrix};

pub const HERMITIAN_TOL: f64 = 1e-12;
pub const TRACE_TOL: f64 = 1e-12;
pub const PSD_TOL: f64 = 1e-10;
pub const UNITARY_TOL: f64 = 1e-12;

/// System state as a d×d density operator. Pure states are embedded as
/// rank-1 projectors so unitary and irreversible evolutions share one path.
#[derive(Debug, Clone)]
pub struct DensityMatrix {
    d: usize,
    rho: ComplexMatrix,
}

impl DensityMatrix {
    pub fn new(rho: ComplexMatrix) -> Result<Self> {
        if !rho.is_square() {
            return Err(Error::InvalidState("density matrix must be square".into()));
        }
        if !rho.is_hermitian(HERMITIAN_TOL) {
            return Err(Error::InvalidState("not Hermitian".into()));
        }
        let tr = rho.trace();
        if (tr.re - 1.0).abs() > TRACE_TOL || tr.im.abs() > TRACE_TOL {
            return Err(Error::InvalidState(format!("trace {} is not 1", tr)));
        }
        let eigs = hermitian_eigenvalues(&rho);
        if eigs[0] < -PSD_TOL {
            return Err(Error::InvalidState(format!(
                "negative eigenvalue {:.3e}",
                eigs[0]
            )));
        }
        Ok(Self { d: rho.rows(), rho })
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.rho
    }

    /// Computational basis state |k⟩⟨k|.
    pub fn basis_state(d: usize, k: usize) -> Self {
        let mut v = vec![Complex64::new(0.0, 0.0); d];
        v[k] = Complex64::new(1.0, 0.0);
        state_from_vector(&v).unwrap()
    }

    pub fn maximally_mixed(d: usize) -> Self {
        let rho = ComplexMatrix::identity(d).scale(Complex64::new(1.0 / d as f64, 0.0));
        Self::new(rho).unwrap()
    }
}

/// |ψ⟩⟨ψ| from an (unnormalized) amplitude vector.
pub fn state_from_vector(amplitudes: &[Complex64]) -> Result<DensityMatrix> {
    let norm_sqr: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum();
    if !norm_sqr.is_finite() {
        return Err(Error::InvalidState("non-finite amplitude".into()));
    }
    if norm_sqr == 0.0 {
        return Err(Error::InvalidState("zero vector".into()));
    }
    let norm = norm_sqr.sqrt();
    let psi: Vec<Complex64> = amplitudes.iter().map(|a| a / norm).collect();
    DensityMatrix::new(outer(&psi, &psi))
}

#[derive(Debug, Clone)]
pub struct UnitaryGate {
    d: usize,
    u: ComplexMatrix,
}

impl UnitaryGate {
    pub fn new(u: ComplexMatrix) -> Result<Self> {
        if !u.is_square() {
            return Err(Error::InvalidMatrix("unitary must be square".into()));
        }
        let deviation = u.unitarity_deviation();
        if deviation > UNITARY_TOL {
            return Err(Error::NotUnitary { deviation });
        }
        Ok(Self { d: u.rows(), u })
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.u
    }

    pub fn identity(d: usize) -> Self {
        Self::new(ComplexMatrix::identity(d)).unwrap()
    }

    pub fn then(&self, next: &UnitaryGate) -> Result<UnitaryGate> {
        if next.d != self.d {
            return Err(Error::DimensionMismatch {
                expected: self.d,
                got: next.d,
            });
        }
        UnitaryGate::new(next.u.mul(&self.u))
    }

    pub fn dagger(&self) -> UnitaryGate {
        UnitaryGate::new(self.u.dagger()).unwrap()
    }
}

/// CPTP map given by a finite Kraus list.
#[derive(Debug, Clone)]
pub struct QuantumChannel {
    d_in: usize,
    d_out: usize,
    kraus: Vec<ComplexMatrix>,
}

impl QuantumChannel {
    pub fn new(kraus: Vec<ComplexMatrix>) -> Result<Self> {
        let first = kraus
            .first()
            .ok_or_else(|| Error::InvalidChannel("empty Kraus list".into()))?;
        let (d_out, d_in) = (first.rows(), first.cols());
        if kraus
            .iter()
            .any(|k| k.rows() != d_out || k.cols() != d_in)
        {
            return Err(Error::InvalidChannel("inconsistent Kraus dimensions".into()));
        }
        if kraus.len() > d_in * d_out {
            return Err(Error::InvalidChannel(format!(
                "{} Kraus operators exceed d_in*d_out = {}",
                kraus.len(),
                d_in * d_out
            )));
        }
        let mut sum = ComplexMatrix::zeros(d_in, d_in);
        for k in &kraus {
            sum = sum.add(&k.dagger().mul(k));
        }
        let deviation = sum.sub(&ComplexMatrix::identity(d_in)).frobenius_norm();
        if deviation > UNITARY_TOL {
            return Err(Error::InvalidChannel(format!(
                "not trace preserving (deviation {:.3e})",
                deviation
            )));
        }
        Ok(Self { d_in, d_out, kraus })
    }

    pub fn d_in(&self) -> usize {
        self.d_in
    }

    pub fn d_out(&self) -> usize {
        self.d_out
    }

    pub fn kraus(&self) -> &[ComplexMatrix] {
        &self.kraus
    }

    pub fn identity(d: usize) -> Self {
        Self::new(vec![ComplexMatrix::identity(d)]).unwrap()
    }
}

/// Single-Kraus channel {U}.
pub fn unitary_as_channel(u: &UnitaryGate) -> QuantumChannel {
    QuantumChannel::new(vec![u.matrix().clone()]).unwrap()
}

/// ρ ↦ Σᵢ Kᵢ ρ Kᵢ†.
pub fn apply_channel(rho: &DensityMatrix, ch: &QuantumChannel) -> Result<DensityMatrix> {
    if ch.d_in != rho.dim() {
        return Err(Error::DimensionMismatch {
            expected: ch.d_in,
            got: rho.dim(),
        });
    }
    let mut out = ComplexMatrix::zeros(ch.d_out, ch.d_out);
    for k in &ch.kraus {
        out = out.add(&k.mul(rho.matrix()).mul(&k.dagger()));
    }
    DensityMatrix::new(out)
}

/// Two-effect POVM producing the outcome bit c ∈ {0, 1}.
#[derive(Debug, Clone)]
pub struct BinaryMeasurement {
    d: usize,
    effect0: ComplexMatrix,
    effect1: ComplexMatrix,
}

impl BinaryMeasurement {
    pub fn new(effect0: ComplexMatrix, effect1: ComplexMatrix) -> Result<Self> {
        let d = effect0.rows();
        for e in [&effect0, &effect1] {
            if !e.is_square() || e.rows() != d {
                return Err(Error::InvalidMeasurement("effect dimensions differ".into()));
            }
            if !e.is_hermitian(HERMITIAN_TOL) {
                return Err(Error::InvalidMeasurement("effect not Hermitian".into()));
            }
            let eigs = hermitian_eigenvalues(e);
            if eigs[0] < -PSD_TOL || eigs[eigs.len() - 1] > 1.0 + PSD_TOL {
                return Err(Error::InvalidMeasurement(format!(
                    "effect eigenvalues [{:.3e}, {:.3e}] outside [0,1]",
                    eigs[0],
                    eigs[eigs.len() - 1]
                )));
            }
        }
        let deviation = effect0
            .add(&effect1)
            .sub(&ComplexMatrix::identity(d))
            .frobenius_norm();
        if deviation > UNITARY_TOL {
            return Err(Error::InvalidMeasurement(format!(
                "effects do not sum to identity (deviation {:.3e})",
                deviation
            )));
        }
        Ok(Self { d, effect0, effect1 })
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn effect(&self, outcome: u8) -> &ComplexMatrix {
        if outcome == 0 {
            &self.effect0
        } else {
            &self.effect1
        }
    }

    /// Projective measurement of a ±1 observable; eigenvalue +1 ↔ c = 0.
    pub fn from_observable(obs: &ComplexMatrix) -> Result<Self> {
        let d = obs.rows();
        let id = ComplexMatrix::identity(d);
        let half = Complex64::new(0.5, 0.0);
        let effect0 = id.add(obs).scale(half);
        let effect1 = id.sub(obs).scale(half);
        Self::new(effect0, effect1)
    }

    /// Binarizer assigning c = 1 to the basis indices in `ones`.
    pub fn from_basis_subset(d: usize, ones: &[usize]) -> Result<Self> {
        if ones.iter().any(|&k| k >= d) {
            return Err(Error::InvalidMeasurement("subset index out of range".into()));
        }
        let mut effect1 = ComplexMatrix::zeros(d, d);
        for &k in ones {
            effect1[(k, k)] = Complex64::new(1.0, 0.0);
        }
        let effect0 = ComplexMatrix::identity(d).sub(&effect1);
        Self::new(effect0, effect1)
    }

    pub fn flipped(&self) -> Self {
        Self {
            d: self.d,
            effect0: self.effect1.clone(),
            effect1: self.effect0.clone(),
        }
    }
}

/// (p0, p1) with pᵢ = tr(Eᵢ ρ), clamped to [0,1] after the tolerance check.
pub fn outcome_probabilities(
    rho: &DensityMatrix,
    m: &BinaryMeasurement,
) -> Result<(f64, f64)> {
    if m.dim() != rho.dim() {
        return Err(Error::DimensionMismatch {
            expected: m.dim(),
            got: rho.dim(),
        });
    }
    let p0c = m.effect0.mul(rho.matrix()).trace();
    let p1c = m.effect1.mul(rho.matrix()).trace();
    for p in [p0c, p1c] {
        if p.im.abs() > TRACE_TOL {
            return Err(Error::Internal(format!(
                "measurement probability has imaginary part {:.3e}",
                p.im
            )));
        }
    }
    if (p0c.re + p1c.re - 1.0).abs() > TRACE_TOL {
        return Err(Error::Internal("probabilities do not sum to 1".into()));
    }
    Ok((p0c.re.clamp(0.0, 1.0), p1c.re.clamp(0.0, 1.0)))
}

/// min over φ of ‖u − e^{iφ}v‖_F ≤ tol. The aligning phase comes from
/// tr(v†u); when that trace vanishes (traceless targets like Pauli X)
/// the phase is anchored on the largest-norm column overlap instead.
pub fn equal_up_to_global_phase(u: &UnitaryGate, v: &UnitaryGate, tol: f64) -> bool {
    phase_distance(u.matrix(), v.matrix()) <= tol
}

/// The phase-minimized Frobenius distance itself.
pub fn phase_distance(u: &ComplexMatrix, v: &ComplexMatrix) -> f64 {
    assert_eq!((u.rows(), u.cols()), (v.rows(), v.cols()));
    let tr = v.dagger().mul(u).trace();
    let phase = if tr.norm() > 1e-12 {
        tr / tr.norm()
    } else {
        // anchor on the column pair with the largest inner-product norm
        let mut best = Complex64::new(1.0, 0.0);
        let mut best_norm = 0.0;
        for j in 0..u.cols() {
            let mut ip = Complex64::new(0.0, 0.0);
            for i in 0..u.rows() {
                ip += v[(i, j)].conj() * u[(i, j)];
            }
            if ip.norm() > best_norm {
                best_norm = ip.norm();
                best = ip / ip.norm();
            }
        }
        best
    };
    u.sub(&v.scale(phase)).frobenius_norm()
}

/// ½‖ρ−σ‖₁ via the eigenvalues of ρ−σ.
pub fn trace_distance(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    if rho.dim() != sigma.dim() {
        return Err(Error::DimensionMismatch {
            expected: rho.dim(),
            got: sigma.dim(),
        });
    }
    let diff = rho.matrix().sub(sigma.matrix());
    let eigs = hermitian_eigenvalues(&diff);
    Ok(0.5 * eigs.iter().map(|e| e.abs()).sum::<f64>())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gates;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn plus_state() -> DensityMatrix {
        state_from_vector(&[c(1.0, 0.0), c(1.0, 0.0)]).unwrap()
    }

    #[test]
    fn state_from_basis_vector() {
        let rho = state_from_vector(&[c(1.0, 0.0), c(0.0, 0.0)]).unwrap();
        assert!((rho.matrix()[(0, 0)].re - 1.0).abs() < 1e-15);
        assert!(rho.matrix()[(1, 1)].norm() < 1e-15);
    }

    #[test]
    fn state_from_unnormalized_plus() {
        let rho = plus_state();
        for i in 0..2 {
            for j in 0..2 {
                assert!((rho.matrix()[(i, j)] - c(0.5, 0.0)).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn state_qutrit_basis() {
        let rho = state_from_vector(&[c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]).unwrap();
        assert_eq!(rho.dim(), 3);
        assert!((rho.matrix()[(0, 0)].re - 1.0).abs() < 1e-15);
    }

    #[test]
    fn state_rejects_zero_vector() {
        assert!(state_from_vector(&[c(0.0, 0.0), c(0.0, 0.0)]).is_err());
    }

    #[test]
    fn identity_channel_preserves_plus() {
        let rho = plus_state();
        let out = apply_channel(&rho, &QuantumChannel::identity(2)).unwrap();
        assert!(out.matrix().max_abs_diff(rho.matrix()) < 1e-15);
    }

    #[test]
    fn erase_maps_one_to_zero() {
        let one = DensityMatrix::basis_state(2, 1);
        let out = apply_channel(&one, &gates::erase_channel(2, 0).unwrap()).unwrap();
        let zero = DensityMatrix::basis_state(2, 0);
        assert!(out.matrix().max_abs_diff(zero.matrix()) < 1e-15);
    }

    #[test]
    fn rz_half_pi_on_plus() {
        let rho = plus_state();
        let ch = unitary_as_channel(&gates::rz(std::f64::consts::FRAC_PI_2));
        let out = apply_channel(&rho, &ch).unwrap();
        let expected = ComplexMatrix::new(
            2,
            2,
            vec![c(0.5, 0.0), c(0.0, -0.5), c(0.0, 0.5), c(0.5, 0.0)],
        )
        .unwrap();
        assert!(out.matrix().max_abs_diff(&expected) < 1e-15);
    }

    #[test]
    fn channel_dimension_mismatch() {
        let rho = state_from_vector(&[c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]).unwrap();
        assert!(apply_channel(&rho, &QuantumChannel::identity(2)).is_err());
    }

    #[test]
    fn x_measurement_probabilities() {
        let x_meas = BinaryMeasurement::from_observable(gates::pauli_x().matrix()).unwrap();
        let (p0, p1) = outcome_probabilities(&plus_state(), &x_meas).unwrap();
        assert!((p0 - 1.0).abs() < 1e-12 && p1.abs() < 1e-12);
        let (q0, q1) = outcome_probabilities(&DensityMatrix::basis_state(2, 0), &x_meas).unwrap();
        assert!((q0 - 0.5).abs() < 1e-12 && (q1 - 0.5).abs() < 1e-12);
    }

    #[test]
    fn rotated_plus_gives_tsirelson_probability() {
        let rho = apply_channel(
            &plus_state(),
            &unitary_as_channel(&gates::rz(std::f64::consts::FRAC_PI_4)),
        )
        .unwrap();
        let x_meas = BinaryMeasurement::from_observable(gates::pauli_x().matrix()).unwrap();
        let (p0, p1) = outcome_probabilities(&rho, &x_meas).unwrap();
        let expected = (std::f64::consts::PI / 8.0).cos().powi(2);
        assert!((p0 - expected).abs() < 1e-12);
        assert!((p1 - (1.0 - expected)).abs() < 1e-12);
    }

    #[test]
    fn global_phase_cases() {
        let x = gates::pauli_x();
        let minus_x = UnitaryGate::new(x.matrix().scale(c(-1.0, 0.0))).unwrap();
        assert!(equal_up_to_global_phase(&x, &minus_x, 1e-12));
        assert!(!equal_up_to_global_phase(&x, &gates::pauli_z(), 1e-9));
        let s_like = UnitaryGate::new(
            ComplexMatrix::new(2, 2, vec![c(1., 0.), c(0., 0.), c(0., 0.), c(0., 1.)]).unwrap(),
        )
        .unwrap();
        assert!(equal_up_to_global_phase(
            &gates::rz(std::f64::consts::FRAC_PI_2),
            &s_like,
            1e-12
        ));
    }

    #[test]
    fn trace_distance_cases() {
        let zero = DensityMatrix::basis_state(2, 0);
        let one = DensityMatrix::basis_state(2, 1);
        assert!(trace_distance(&zero, &zero).unwrap() < 1e-15);
        assert!((trace_distance(&zero, &one).unwrap() - 1.0).abs() < 1e-12);
        let expected = 0.5f64.sqrt();
        assert!((trace_distance(&zero, &plus_state()).unwrap() - expected).abs() < 1e-12);
    }

    #[test]
    fn tensor_cases() {
        let i2 = ComplexMatrix::identity(2);
        let x = gates::pauli_x();
        let z = gates::pauli_z();
        assert!(i2.kron(&i2).max_abs_diff(&ComplexMatrix::identity(4)) < 1e-15);
        let xi = x.matrix().kron(&i2);
        assert!((xi[(0, 2)].re - 1.0).abs() < 1e-15);
        assert!((xi[(2, 0)].re - 1.0).abs() < 1e-15);
        assert!(xi[(0, 0)].norm() < 1e-15);
        let zz = z.matrix().kron(z.matrix());
        let expected =
            ComplexMatrix::from_real(4, 4, &[
                1., 0., 0., 0.,
                0., -1., 0., 0.,
                0., 0., -1., 0.,
                0., 0., 0., 1.,
            ])
            .unwrap();
        assert!(zz.max_abs_diff(&expected) < 1e-15);
    }

    #[test]
    fn channel_rejects_non_trace_preserving() {
        let half = ComplexMatrix::identity(2).scale(c(0.5, 0.0));
        assert!(QuantumChannel::new(vec![half]).is_err());
    }

    proptest! {
        #[test]
        fn apply_channel_preserves_trace_and_hermiticity(seed in 0u64..500) {
            use rand::SeedableRng;
            use rand::Rng;
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let d = rng.gen_range(2usize..=4);
            // random pure state
            let amps: Vec<Complex64> = (0..d)
                .map(|_| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
                .collect();
            let rho = state_from_vector(&amps).unwrap();
            // random channel: unitary conjugated erase-or-identity mix
            let u = gates::random_unitary(d, &mut rng);
            let ch = if rng.gen_bool(0.5) {
                unitary_as_channel(&u)
            } else {
                let base = gates::erase_channel(d, 0).unwrap();
                let kraus = base
                    .kraus()
                    .iter()
                    .map(|k| u.matrix().mul(k).mul(&u.matrix().dagger()))
                    .collect();
                QuantumChannel::new(kraus).unwrap()
            };
            let out = apply_channel(&rho, &ch).unwrap();
            prop_assert!((out.matrix().trace().re - 1.0).abs() < 1e-12);
            prop_assert!(out.matrix().is_hermitian(1e-12));
        }

        #[test]
        fn phase_equivalence_is_phase_invariant(seed in 0u64..200, phi in 0.0..std::f64::consts::TAU) {
            use rand::SeedableRng;
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let u = gates::random_unitary(2, &mut rng);
            let rotated = UnitaryGate::new(u.matrix().scale(Complex64::from_polar(1.0, phi))).unwrap();
            prop_assert!(equal_up_to_global_phase(&u, &u, 1e-12));
            prop_assert!(equal_up_to_global_phase(&u, &rotated, 1e-9));
            prop_assert!(equal_up_to_global_phase(&rotated, &u, 1e-9));
        }

        #[test]
        fn trace_distance_triangle(seed in 0u64..200) {
            use rand::SeedableRng;
            use rand::Rng;
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let mut random_state = |rng: &mut rand_chacha::ChaCha8Rng| {
                let amps: Vec<Complex64> = (0..3)
                    .map(|_| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
                    .collect();
                state_from_vector(&amps).unwrap()
            };
            let a = random_state(&mut rng);
            let b = random_state(&mut rng);
            let m = random_state(&mut rng);
            let ab = trace_distance(&a, &b).unwrap();
            let am = trace_distance(&a, &m).unwrap();
            let mb = trace_distance(&m, &b).unwrap();
            prop_assert!(ab <= am + mb + 1e-10);
            prop_assert!((0.0..=1.0 + 1e-12).contains(&ab));
        }
    }
}
