//! A hidden-variable model for single-qubit measurements, the additivity
//! defect showing its observable map is not linear, and the BCHSH
//! correlation functional with its classical and quantum bounds.
//!
//! The model's phase space is a pair of unit spheres `(m, n)`. A state with
//! polarization `k` pins `n = k` and leaves `m` uniform; the observable
//! `a0 I + a . sigma` takes the value `a0 + |a|` where `(m + n) . a > 0` and
//! `a0 - |a|` elsewhere. Sphere geometry makes the mean come out to
//! `a0 + k . a`, which is exactly the quantum value, so single-observable
//! statistics cannot tell the model apart.

use ndarray::{array, Array2};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Dirichlet, Distribution, StandardNormal};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::operators::{
    bloch_state, expectation, pauli_observable, tensor, tensor_states, BlochVector, DensityState,
    HermitianOperator,
};
use crate::tol;

/// Largest correlation value any two-qubit state can reach.
pub const QUANTUM_BOUND: f64 = 2.0 * std::f64::consts::SQRT_2;

/// Largest correlation value reachable classically or separably.
pub const CLASSICAL_BOUND: f64 = 2.0;

/// A qubit observable `a0 I + a . sigma` in offset/direction form.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct HVMObservable {
    pub a0: f64,
    pub a: BlochVector,
}

impl HVMObservable {
    pub const fn new(a0: f64, a: BlochVector) -> Self {
        Self { a0, a }
    }

    /// The two possible measured values, `a0 +- |a|`.
    pub fn upper(&self) -> f64 {
        self.a0 + self.a.norm()
    }

    pub fn lower(&self) -> f64 {
        self.a0 - self.a.norm()
    }

    /// The matrix the model is trying to reproduce.
    pub fn operator(&self) -> HermitianOperator {
        pauli_observable(self.a0, &self.a)
    }
}

/// A point of the model's phase space: two unit vectors.
#[derive(Debug, Clone, Copy)]
pub struct HVMPoint {
    pub m: BlochVector,
    pub n: BlochVector,
}

impl HVMPoint {
    /// Both vectors must be unit length within 1e-12.
    pub fn new(m: BlochVector, n: BlochVector) -> Result<Self> {
        for v in [&m, &n] {
            if !v.is_unit(1e-12) {
                return Err(Error::NotUnitVector { norm: v.norm() });
            }
        }
        Ok(Self { m, n })
    }
}

/// Uniform point on the unit sphere from three normalized Gaussians.
pub fn sample_unit_vector(rng: &mut impl Rng) -> BlochVector {
    loop {
        let v = BlochVector::new(
            rng.sample(StandardNormal),
            rng.sample(StandardNormal),
            rng.sample(StandardNormal),
        );
        let norm = v.norm();
        if norm > 1e-12 {
            return v.scale(1.0 / norm);
        }
    }
}

/// The value the model assigns to `obs` at a phase-space point. The
/// measure-zero boundary `(m + n) . a = 0` goes to the lower branch, which
/// also covers the scalar observable `a = 0`.
pub fn hvm_outcome(obs: &HVMObservable, point: &HVMPoint) -> f64 {
    if point.m.add(&point.n).dot(&obs.a) > 0.0 {
        obs.upper()
    } else {
        obs.lower()
    }
}

/// Draw one measurement outcome for a state with polarization `k` (unit
/// vector): the second sphere coordinate is pinned to `k` exactly, the first
/// is uniform.
pub fn hvm_sample(obs: &HVMObservable, k: &BlochVector, rng: &mut impl Rng) -> f64 {
    debug_assert!(k.is_unit(1e-9));
    let point = HVMPoint {
        m: sample_unit_vector(rng),
        n: *k,
    };
    hvm_outcome(obs, &point)
}

/// Model mean versus quantum mean for one observable.
#[derive(Debug, Clone, Serialize)]
pub struct HvmMeanReport {
    pub mc_mean: f64,
    /// Exact model mean `a0 + k . a` from the sphere geometry.
    pub analytic_mean: f64,
    /// `tr(rho_k (a0 I + a . sigma))`.
    pub quantum_mean: f64,
    /// Monte Carlo scale `|a| / sqrt(n_samples)`; the outcome spread is at
    /// most `|a|`, so this bounds the standard error.
    pub sigma_mc: f64,
    pub n_samples: usize,
    pub seed: u64,
}

/// Estimate the model mean by sampling and compare with the closed form and
/// the quantum trace formula; the two exact values are checked against each
/// other at 1e-12.
pub fn hvm_mean(
    obs: &HVMObservable,
    k: &BlochVector,
    n_samples: usize,
    seed: u64,
) -> Result<HvmMeanReport> {
    let k = k.require_unit()?;
    if n_samples == 0 {
        return Err(Error::Premise("n_samples must be at least 1".into()));
    }
    let analytic_mean = obs.a0 + k.dot(&obs.a);
    let quantum_mean = expectation(&bloch_state(&k)?, &obs.operator())?;
    let gap = (analytic_mean - quantum_mean).abs();
    if gap > 1e-12 {
        return Err(Error::Tolerance {
            what: "model mean vs quantum trace".into(),
            value: gap,
            bound: 1e-12,
        });
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut sum = 0.0;
    for _ in 0..n_samples {
        sum += hvm_sample(obs, &k, &mut rng);
    }
    Ok(HvmMeanReport {
        mc_mean: sum / n_samples as f64,
        analytic_mean,
        quantum_mean,
        sigma_mc: obs.a.norm() / (n_samples as f64).sqrt(),
        n_samples,
        seed,
    })
}

/// Mean-square additivity defect of the model's observable map.
#[derive(Debug, Clone, Serialize)]
pub struct AdditivityDefectReport {
    /// Monte Carlo estimate of `E[(F_A + F_B - F_{A+B})^2]`.
    pub defect: f64,
    pub n_samples: usize,
    pub seed: u64,
}

/// Estimate `E[(F_A + F_B - F_{A+B})^2]` where the sum observable is
/// `(a0 + b0, a + b)` and all three functions are evaluated at the *same*
/// phase-space point. Zero (exactly, sample by sample) when the directions
/// are parallel; strictly positive otherwise.
pub fn hvm_additivity_defect(
    obs_a: &HVMObservable,
    obs_b: &HVMObservable,
    k: &BlochVector,
    n_samples: usize,
    seed: u64,
) -> Result<AdditivityDefectReport> {
    let k = k.require_unit()?;
    if n_samples == 0 {
        return Err(Error::Premise("n_samples must be at least 1".into()));
    }
    let obs_sum = HVMObservable::new(obs_a.a0 + obs_b.a0, obs_a.a.add(&obs_b.a));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut sum_sq = 0.0;
    for _ in 0..n_samples {
        let point = HVMPoint {
            m: sample_unit_vector(&mut rng),
            n: k,
        };
        let d = hvm_outcome(obs_a, &point) + hvm_outcome(obs_b, &point)
            - hvm_outcome(&obs_sum, &point);
        sum_sq += d * d;
    }
    Ok(AdditivityDefectReport {
        defect: sum_sq / n_samples as f64,
        n_samples,
        seed,
    })
}

/// Measurement directions for the four-correlation experiment: observables
/// `a_i . sigma` on one side and `b_j . sigma` on the other, outcomes +-1.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct BchshSetting {
    pub a1: BlochVector,
    pub a2: BlochVector,
    pub b1: BlochVector,
    pub b2: BlochVector,
}

impl BchshSetting {
    /// All four directions must be unit vectors.
    pub fn new(a1: BlochVector, a2: BlochVector, b1: BlochVector, b2: BlochVector) -> Result<Self> {
        for v in [&a1, &a2, &b1, &b2] {
            if !v.is_unit(tol::UNIT_TOL) {
                return Err(Error::NotUnitVector { norm: v.norm() });
            }
        }
        Ok(Self { a1, a2, b1, b2 })
    }
}

/// The correlation observable `A1 B1 + A1 B2 + A2 B1 - A2 B2` on two qubits.
pub fn bchsh_observable(s: &BchshSetting) -> HermitianOperator {
    let a1 = pauli_observable(0.0, &s.a1);
    let a2 = pauli_observable(0.0, &s.a2);
    let b1 = pauli_observable(0.0, &s.b1);
    let b2 = pauli_observable(0.0, &s.b2);
    let mut f = tensor(&a1, &b1);
    f = f.add(&tensor(&a1, &b2)).unwrap();
    f = f.add(&tensor(&a2, &b1)).unwrap();
    f.sub(&tensor(&a2, &b2)).unwrap()
}

/// Evaluate the correlation functional on a two-qubit state. Values beyond
/// the quantum bound indicate numerical corruption and are rejected.
pub fn bchsh_value(rho: &DensityState, s: &BchshSetting) -> Result<f64> {
    if rho.dim() != 4 {
        return Err(Error::DimensionMismatch {
            left: rho.dim(),
            right: 4,
        });
    }
    let f = expectation(rho, &bchsh_observable(s))?;
    if f.abs() > QUANTUM_BOUND + tol::NUMERICAL_SLACK {
        return Err(Error::Tolerance {
            what: "correlation value exceeds the quantum bound".into(),
            value: f.abs(),
            bound: QUANTUM_BOUND,
        });
    }
    Ok(f)
}

/// The spin singlet `(|01> - |10>) / sqrt(2)`; correlations are `-a . b`.
pub fn singlet_state() -> DensityState {
    let inv = 1.0 / std::f64::consts::SQRT_2;
    let v = array![
        Complex64::new(0.0, 0.0),
        Complex64::new(inv, 0.0),
        Complex64::new(-inv, 0.0),
        Complex64::new(0.0, 0.0),
    ];
    DensityState::pure(&v).expect("unit vector")
}

/// Directions achieving the quantum maximum `2 sqrt(2)` on the singlet.
pub fn tsirelson_setting() -> BchshSetting {
    let inv = 1.0 / std::f64::consts::SQRT_2;
    BchshSetting {
        a1: BlochVector::new(0.0, 0.0, 1.0),
        a2: BlochVector::new(1.0, 0.0, 0.0),
        b1: BlochVector::new(-inv, 0.0, -inv),
        b2: BlochVector::new(inv, 0.0, -inv),
    }
}

/// Maximum of `|a1 b1 + a1 b2 + a2 b1 - a2 b2|` over all 16 deterministic
/// +-1 assignments; equals 2 exactly.
pub fn deterministic_assignment_max() -> f64 {
    let mut max = 0.0f64;
    for bits in 0..16u32 {
        let v = |i: u32| if bits >> i & 1 == 1 { 1.0 } else { -1.0 };
        let (a1, a2, b1, b2) = (v(0), v(1), v(2), v(3));
        let f: f64 = a1 * b1 + a1 * b2 + a2 * b1 - a2 * b2;
        max = max.max(f.abs());
    }
    max
}

/// Result of the randomized separable-state scan.
#[derive(Debug, Clone, Serialize)]
pub struct SeparableScanReport {
    /// Largest |F| seen; separability caps this at 2.
    pub max_abs_f: f64,
    pub n_trials: usize,
    pub seed: u64,
    /// Counts of |F| values in consecutive bins of `bin_width` from 0.
    pub bins: Vec<u64>,
    pub bin_width: f64,
}

/// Sample random separable two-qubit states (up to four product terms with
/// Dirichlet(1,1,1,1) weights, factors uniform in the Bloch ball) against
/// random unit settings and track the largest |F|.
pub fn separable_bound_scan(n_trials: usize, seed: u64) -> Result<SeparableScanReport> {
    if n_trials == 0 {
        return Err(Error::Premise("n_trials must be at least 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let weights = Dirichlet::new([1.0, 1.0, 1.0, 1.0]).expect("valid parameters");

    let bin_width: f64 = 0.05;
    let mut bins = vec![0u64; (2.1 / bin_width).round() as usize];
    let mut max_abs_f = 0.0f64;

    for _ in 0..n_trials {
        let w: [f64; 4] = weights.sample(&mut rng);
        let mut entries = Array2::<Complex64>::zeros((4, 4));
        for &weight in &w {
            let left = bloch_state(&sample_ball_vector(&mut rng))?;
            let right = bloch_state(&sample_ball_vector(&mut rng))?;
            entries += &tensor_states(&left, &right)
                .entries()
                .mapv(|z| z * weight);
        }
        // Convex mixture of product states; valid by construction.
        let rho = DensityState::new_unchecked(entries);
        let setting = BchshSetting {
            a1: sample_unit_vector(&mut rng),
            a2: sample_unit_vector(&mut rng),
            b1: sample_unit_vector(&mut rng),
            b2: sample_unit_vector(&mut rng),
        };
        let f = bchsh_value(&rho, &setting)?.abs();
        max_abs_f = max_abs_f.max(f);
        let slot = ((f / bin_width) as usize).min(bins.len() - 1);
        bins[slot] += 1;
    }
    Ok(SeparableScanReport {
        max_abs_f,
        n_trials,
        seed,
        bins,
        bin_width,
    })
}

/// Uniform point in the closed unit ball.
fn sample_ball_vector(rng: &mut impl Rng) -> BlochVector {
    let direction = sample_unit_vector(rng);
    let radius = rng.random::<f64>().cbrt();
    direction.scale(radius)
}
