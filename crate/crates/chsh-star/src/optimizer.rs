//! Numerical maximization of the game value over parametrized strategy
//! families: derivative-free Nelder-Mead with deterministic multi-start.

use num_complex::Complex64;
use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::game::{win_probability, StrategyStar};
use crate::gates::{erase_channel, param_count, pauli_x, pauli_z, unitary_from_params};
use crate::linalg::ComplexMatrix;
use crate::quantum::{
    state_from_vector, unitary_as_channel, BinaryMeasurement, DensityMatrix, QuantumChannel,
};
use crate::stream::stream;

/// Which strategy family the optimizer walks over.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Family {
    /// Four special-unitary gates; init and measurement fixed to the
    /// paper's setting (|+⟩/X for d = 2, |0⟩ with the S={2} binarizer
    /// for d = 3).
    UnitaryGates,
    /// Same gates with the pure initial state parametrized as well.
    UnitaryGatesFreeInit,
    /// d = 2 only: B₀ is a λ-mixture of ERASE and the identity, with λ
    /// optimized; init |0⟩ and measurement Z so the perfect irreversible
    /// strategy is an interior point of the family.
    EraseAugmented,
}

#[derive(Debug, Clone, Serialize)]
pub struct OptimizationProblem {
    pub d: usize,
    pub family: Family,
}

impl OptimizationProblem {
    pub fn new(d: usize, family: Family) -> Result<Self> {
        match family {
            Family::EraseAugmented if d != 2 => Err(Error::UnsupportedDimension(d)),
            _ if !(2..=3).contains(&d) => Err(Error::UnsupportedDimension(d)),
            _ => Ok(Self { d, family }),
        }
    }

    pub fn parameter_count(&self) -> usize {
        let per_gate = param_count(self.d);
        match self.family {
            Family::UnitaryGates => 4 * per_gate,
            Family::UnitaryGatesFreeInit => 4 * per_gate + 2 * (self.d - 1),
            Family::EraseAugmented => 3 * per_gate + 1,
        }
    }

    fn fixed_init(&self) -> DensityMatrix {
        match self.family {
            Family::EraseAugmented => DensityMatrix::basis_state(2, 0),
            _ => {
                if self.d == 2 {
                    let h = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
                    state_from_vector(&[h, h]).unwrap()
                } else {
                    DensityMatrix::basis_state(self.d, 0)
                }
            }
        }
    }

    fn measurement(&self) -> BinaryMeasurement {
        match self.family {
            Family::EraseAugmented => {
                BinaryMeasurement::from_observable(pauli_z().matrix()).unwrap()
            }
            _ => {
                if self.d == 2 {
                    BinaryMeasurement::from_observable(pauli_x().matrix()).unwrap()
                } else {
                    BinaryMeasurement::from_basis_subset(self.d, &[self.d - 1]).unwrap()
                }
            }
        }
    }

    /// Concrete strategy at a parameter point.
    pub fn build_strategy(&self, params: &[f64]) -> Result<StrategyStar> {
        let expected = self.parameter_count();
        if params.len() != expected {
            return Err(Error::WrongParameterCount {
                expected,
                got: params.len(),
            });
        }
        let d = self.d;
        let per_gate = param_count(d);
        match self.family {
            Family::UnitaryGates | Family::UnitaryGatesFreeInit => {
                let gates: Vec<QuantumChannel> = (0..4)
                    .map(|g| {
                        let slice = &params[g * per_gate..(g + 1) * per_gate];
                        Ok(unitary_as_channel(&unitary_from_params(d, slice)?))
                    })
                    .collect::<Result<_>>()?;
                let init = if self.family == Family::UnitaryGatesFreeInit {
                    pure_state_from_angles(d, &params[4 * per_gate..])?
                } else {
                    self.fixed_init()
                };
                StrategyStar::new(
                    init,
                    [gates[0].clone(), gates[1].clone()],
                    [gates[2].clone(), gates[3].clone()],
                    self.measurement(),
                )
            }
            Family::EraseAugmented => {
                let a0 = unitary_as_channel(&unitary_from_params(2, &params[0..3])?);
                let a1 = unitary_as_channel(&unitary_from_params(2, &params[3..6])?);
                let b1 = unitary_as_channel(&unitary_from_params(2, &params[6..9])?);
                let lambda = params[9].sin().powi(2);
                let b0 = erase_identity_mixture(lambda)?;
                StrategyStar::new(self.fixed_init(), [a0, a1], [b0, b1], self.measurement())
            }
        }
    }
}

/// λ·ERASE + (1−λ)·identity as a single Kraus channel.
pub fn erase_identity_mixture(lambda: f64) -> Result<QuantumChannel> {
    let l = lambda.clamp(0.0, 1.0);
    let mut kraus = vec![ComplexMatrix::identity(2).scale(Complex64::new((1.0 - l).sqrt(), 0.0))];
    for k in erase_channel(2, 0)?.kraus() {
        kraus.push(k.scale(Complex64::new(l.sqrt(), 0.0)));
    }
    QuantumChannel::new(kraus)
}

/// Pure state from 2(d−1) angles: hyperspherical magnitudes plus one
/// phase per component after the first.
fn pure_state_from_angles(d: usize, angles: &[f64]) -> Result<DensityMatrix> {
    if angles.len() != 2 * (d - 1) {
        return Err(Error::WrongParameterCount {
            expected: 2 * (d - 1),
            got: angles.len(),
        });
    }
    let mut amps = vec![Complex64::new(0.0, 0.0); d];
    let mut sin_product = 1.0;
    for j in 0..d {
        let magnitude = if j < d - 1 {
            let m = sin_product * angles[j].cos();
            sin_product *= angles[j].sin();
            m
        } else {
            sin_product
        };
        let phase = if j == 0 { 0.0 } else { angles[d - 1 + j - 1] };
        amps[j] = Complex64::from_polar(magnitude, phase);
    }
    state_from_vector(&amps)
}

/// w at a parameter point.
pub fn objective(problem: &OptimizationProblem, params: &[f64]) -> Result<f64> {
    Ok(win_probability(&problem.build_strategy(params)?)?.w)
}

#[derive(Debug, Clone, Serialize)]
pub struct OptimizerConfig {
    pub restarts: usize,
    pub simplex_scale: f64,
    pub tolerance: f64,
    pub max_iterations: usize,
    pub seed: u64,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            restarts: 50,
            simplex_scale: 0.5,
            tolerance: 1e-12,
            max_iterations: 5000,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct NelderMeadResult {
    pub params: Vec<f64>,
    pub value: f64,
    pub iterations: usize,
    pub evaluations: usize,
    /// Best simplex vertex value at the start of each iteration.
    pub best_value_trace: Vec<f64>,
}

/// Standard simplex maximization (reflection 1, expansion 2, contraction
/// ½, shrink ½). Terminates when the simplex value spread drops below
/// the tolerance or the iteration cap is reached; the returned value is
/// f at the returned point.
pub fn nelder_mead<F: FnMut(&[f64]) -> f64>(
    mut f: F,
    start: &[f64],
    cfg: &OptimizerConfig,
) -> NelderMeadResult {
    let n = start.len();
    let mut evaluations = 0usize;
    let mut eval = |p: &[f64], evals: &mut usize| -> f64 {
        *evals += 1;
        f(p)
    };
    // simplex as (point, value), kept sorted descending by value
    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n + 1);
    let v0 = eval(start, &mut evaluations);
    simplex.push((start.to_vec(), v0));
    for i in 0..n {
        let mut p = start.to_vec();
        p[i] += cfg.simplex_scale;
        let v = eval(&p, &mut evaluations);
        simplex.push((p, v));
    }
    let mut iterations = 0usize;
    let mut best_value_trace = Vec::new();
    loop {
        simplex.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap());
        best_value_trace.push(simplex[0].1);
        let spread = simplex[0].1 - simplex[n].1;
        if spread < cfg.tolerance || iterations >= cfg.max_iterations {
            break;
        }
        iterations += 1;
        let centroid: Vec<f64> = (0..n)
            .map(|j| simplex[..n].iter().map(|(p, _)| p[j]).sum::<f64>() / n as f64)
            .collect();
        let worst = simplex[n].clone();
        let reflect: Vec<f64> = (0..n)
            .map(|j| centroid[j] + (centroid[j] - worst.0[j]))
            .collect();
        let fr = eval(&reflect, &mut evaluations);
        if fr > simplex[0].1 {
            let expand: Vec<f64> = (0..n)
                .map(|j| centroid[j] + 2.0 * (centroid[j] - worst.0[j]))
                .collect();
            let fe = eval(&expand, &mut evaluations);
            simplex[n] = if fe > fr { (expand, fe) } else { (reflect, fr) };
            continue;
        }
        if fr > simplex[n - 1].1 {
            simplex[n] = (reflect, fr);
            continue;
        }
        // contraction: outside if the reflected point improved on the
        // worst vertex, inside otherwise
        let contract: Vec<f64> = if fr > worst.1 {
            (0..n)
                .map(|j| centroid[j] + 0.5 * (reflect[j] - centroid[j]))
                .collect()
        } else {
            (0..n)
                .map(|j| centroid[j] + 0.5 * (worst.0[j] - centroid[j]))
                .collect()
        };
        let fc = eval(&contract, &mut evaluations);
        if fc > fr.max(worst.1) {
            simplex[n] = (contract, fc);
            continue;
        }
        // shrink toward the best vertex
        let best = simplex[0].0.clone();
        for vertex in simplex.iter_mut().skip(1) {
            for j in 0..n {
                vertex.0[j] = best[j] + 0.5 * (vertex.0[j] - best[j]);
            }
            vertex.1 = eval(&vertex.0, &mut evaluations);
        }
    }
    simplex.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap());
    NelderMeadResult {
        params: simplex[0].0.clone(),
        value: simplex[0].1,
        iterations,
        evaluations,
        best_value_trace,
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RestartSummary {
    pub restart: usize,
    pub start_value: f64,
    pub final_value: f64,
    pub iterations: usize,
    pub evaluations: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct OptimizationReport {
    pub problem: OptimizationProblem,
    pub best_w: f64,
    pub best_params: Vec<f64>,
    pub best_restart: usize,
    pub restarts: Vec<RestartSummary>,
    pub function_evaluations: usize,
}

/// Deterministic multi-start maximization: restart r draws its start
/// from the stream keyed (seed, r); ties resolve to the lowest restart
/// index, so the report is independent of execution order.
pub fn optimize(problem: &OptimizationProblem, cfg: &OptimizerConfig) -> Result<OptimizationReport> {
    let n = problem.parameter_count();
    let mut best: Option<(usize, NelderMeadResult)> = None;
    let mut summaries = Vec::with_capacity(cfg.restarts);
    let mut total_evals = 0usize;
    for r in 0..cfg.restarts {
        let mut rng = stream(cfg.seed, &[0x6f70_7469, r as u64]);
        let start: Vec<f64> = (0..n)
            .map(|_| rng.gen_range(-std::f64::consts::PI..std::f64::consts::PI))
            .collect();
        let start_value = objective(problem, &start)?;
        let result = nelder_mead(
            |p| objective(problem, p).unwrap_or(f64::NEG_INFINITY),
            &start,
            cfg,
        );
        total_evals += result.evaluations;
        summaries.push(RestartSummary {
            restart: r,
            start_value,
            final_value: result.value,
            iterations: result.iterations,
            evaluations: result.evaluations,
        });
        let improves = match &best {
            None => true,
            Some((_, b)) => result.value > b.value,
        };
        if improves {
            best = Some((r, result));
        }
    }
    let (best_restart, best_result) = best.ok_or_else(|| Error::Internal("no restarts".into()))?;
    // re-evaluate so the reported value is exactly f(best_params)
    let best_w = objective(problem, &best_result.params)?;
    Ok(OptimizationReport {
        problem: problem.clone(),
        best_w,
        best_params: best_result.params,
        best_restart,
        restarts: summaries,
        function_evaluations: total_evals,
    })
}

/// Central-difference gradient, used as a test oracle only.
pub fn finite_difference_gradient<F: FnMut(&[f64]) -> f64>(
    mut f: F,
    params: &[f64],
    h: f64,
) -> Vec<f64> {
    assert!(h > 0.0);
    (0..params.len())
        .map(|i| {
            let mut plus = params.to_vec();
            let mut minus = params.to_vec();
            plus[i] += h;
            minus[i] -= h;
            (f(&plus) - f(&minus)) / (2.0 * h)
        })
        .collect()
}

/// Parameters embedding the paper's optimal d = 2 gate list
/// (I, Rz(π/2), Rz(−π/4), Rz(π/4)) in the unitary-gates family.
pub fn optimal_qubit_embedding() -> Vec<f64> {
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};
    // su2_from_angles(theta, 0, 0) = Rz(theta)
    let mut params = vec![0.0; 12];
    params[3] = FRAC_PI_2;
    params[6] = -FRAC_PI_4;
    params[9] = FRAC_PI_4;
    params
}
