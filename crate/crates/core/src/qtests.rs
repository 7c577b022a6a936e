//! Two spectral criteria separating quantum observable pairs from classical
//! ones, a minimality check for candidate orderings, and a randomized search
//! for witness pairs.
//!
//! The first test asks whether the spectrum of a sum `C = A + B` stays inside
//! the sumset `{a + b}` of the component spectra; for commuting pairs it
//! must. The second asks whether `0 <= A <= B` can coexist with a strictly
//! negative minimal eigenvalue of `B^2 - A^2`; for commuting pairs squaring
//! preserves the order, so a negative margin certifies noncommutativity.

use ndarray::Array2;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::operators::{
    adjoint, expectation, loewner_geq, DensityState, HermitianOperator, Spectrum,
};
use crate::tol;

/// Max Frobenius norm of `A + B - C` accepted as "means add".
pub const SUM_PREMISE_TOL: f64 = 1e-10;

/// Report of the sum-spectrum test on a triple `(A, B, C)`.
#[derive(Debug, Clone, Serialize)]
pub struct SumSpectrumReport {
    /// Whether `C = A + B` held within [`SUM_PREMISE_TOL`] in Frobenius norm.
    pub c_equals_sum: bool,
    /// Frobenius norm of `A + B - C`.
    pub premise_residual: f64,
    pub sp_a: Spectrum,
    pub sp_b: Spectrum,
    pub sp_c: Spectrum,
    /// Clustered pairwise sums of the component spectra.
    pub sumset: Spectrum,
    /// Largest distance from an eigenvalue of `C` to the sumset.
    pub violation_distance: f64,
    /// True when the premise holds and the distance exceeds the tolerance.
    pub is_quantum: bool,
    pub tolerance: f64,
}

/// Run the sum-spectrum test: quantumness is claimed when some eigenvalue of
/// `C` falls outside the sumset of the spectra of `A` and `B` by more than
/// `tolerance`.
pub fn sum_spectrum_test(
    a: &HermitianOperator,
    b: &HermitianOperator,
    c: &HermitianOperator,
    tolerance: f64,
) -> Result<SumSpectrumReport> {
    let sum = a.add(b)?;
    if sum.dim() != c.dim() {
        return Err(Error::DimensionMismatch {
            left: sum.dim(),
            right: c.dim(),
        });
    }
    let premise_residual = sum.sub(c)?.frobenius_norm();
    let c_equals_sum = premise_residual <= SUM_PREMISE_TOL;

    let sp_a = a.spectrum()?;
    let sp_b = b.spectrum()?;
    let sp_c = c.spectrum()?;
    let sumset = sp_a.sumset(&sp_b);

    let violation_distance = sp_c
        .values()
        .iter()
        .map(|&v| sumset.distance_to(v))
        .fold(0.0f64, f64::max);

    Ok(SumSpectrumReport {
        c_equals_sum,
        premise_residual,
        sp_a,
        sp_b,
        sp_c,
        sumset,
        violation_distance,
        is_quantum: c_equals_sum && violation_distance > tolerance,
        tolerance,
    })
}

/// Report of the square-order test on a pair with `A >= 0`.
#[derive(Debug, Clone, Serialize)]
pub struct SquareOrderReport {
    /// Minimal eigenvalue of `A` (premise `A >= 0`).
    pub positivity_margin: f64,
    pub order_holds: bool,
    /// Minimal eigenvalue of `B - A`.
    pub order_margin: f64,
    /// Minimal eigenvalue of `B^2 - A^2`.
    pub square_margin: f64,
    /// Eigenstate of `B^2 - A^2` at the minimal eigenvalue, present exactly
    /// when `square_margin < -tolerance`.
    pub violating_state: Option<DensityState>,
    /// Premise and violation together: `order_holds` and a margin below
    /// `-tolerance`.
    pub is_quantum: bool,
    pub tolerance: f64,
}

/// Run the square-order test. `A >= 0` is required (within `tolerance`);
/// a failing order `A <= B` is reported, not raised. Quantumness is claimed
/// when the order holds yet `min eig(B^2 - A^2) < -tolerance`.
pub fn square_order_test(
    a: &HermitianOperator,
    b: &HermitianOperator,
    tolerance: f64,
) -> Result<SquareOrderReport> {
    let positivity_margin = a.min_eigenvalue()?;
    if positivity_margin < -tolerance {
        return Err(Error::Premise(format!(
            "A is not positive semidefinite (min eigenvalue {positivity_margin:.3e})"
        )));
    }
    let order = loewner_geq(b, a, tolerance)?;

    let diff = b.squared().sub(&a.squared())?;
    let eig = diff.eigh()?;
    let square_margin = eig.values[0];
    let violating_state = if square_margin < -tolerance {
        // Ties in the bottom eigenvalue resolve to the solver's first
        // column, which the ascending sort makes deterministic.
        Some(DensityState::pure(&eig.vector(0))?)
    } else {
        None
    };

    Ok(SquareOrderReport {
        positivity_margin,
        order_holds: order.holds,
        order_margin: order.margin,
        square_margin,
        violating_state,
        is_quantum: order.holds && square_margin < -tolerance,
        tolerance,
    })
}

impl SquareOrderReport {
    pub fn demonstrates_quantumness(&self) -> bool {
        self.is_quantum
    }
}

/// Minimality of a state family for an ordered pair: if every listed state
/// agrees `mean(A) <= mean(B)`, that must be certified by the operator order
/// `A <= B`. The check fails exactly when the accessible order holds but the
/// operator order does not.
#[derive(Debug, Clone, Serialize)]
pub struct MinimalityReport {
    pub accessible_order_holds: bool,
    /// Smallest `mean(B) - mean(A)` over the supplied states.
    pub worst_accessible_gap: f64,
    pub operator_order_holds: bool,
    /// Minimal eigenvalue of `B - A`.
    pub operator_margin: f64,
    pub minimality_holds: bool,
}

pub fn minimality_check(
    states: &[DensityState],
    a: &HermitianOperator,
    b: &HermitianOperator,
    tolerance: f64,
) -> Result<MinimalityReport> {
    if states.is_empty() {
        return Err(Error::EmptyStateList);
    }
    let positivity = a.min_eigenvalue()?;
    if positivity < -tolerance {
        return Err(Error::Premise(format!(
            "A is not positive semidefinite (min eigenvalue {positivity:.3e})"
        )));
    }
    let mut worst_accessible_gap = f64::INFINITY;
    for state in states {
        let gap = expectation(state, b)? - expectation(state, a)?;
        worst_accessible_gap = worst_accessible_gap.min(gap);
    }
    let accessible_order_holds = worst_accessible_gap >= -tolerance;
    let order = loewner_geq(b, a, tolerance)?;

    Ok(MinimalityReport {
        accessible_order_holds,
        worst_accessible_gap,
        operator_order_holds: order.holds,
        operator_margin: order.margin,
        minimality_holds: !(accessible_order_holds && !order.holds),
    })
}

/// Restriction applied to candidate pairs in [`witness_search`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum WitnessMode {
    /// Full Hermitian matrices.
    General,
    /// Real diagonal factors only; everything commutes, so the margin can
    /// never be pushed below zero. Used as a control.
    Diagonal,
}

/// Outcome of the randomized witness search.
#[derive(Debug, Clone, Serialize)]
pub struct WitnessSearchOutcome {
    pub observable_a: HermitianOperator,
    pub observable_b: HermitianOperator,
    /// Minimal eigenvalue of `B^2 - A^2` for the best pair found.
    pub square_margin: f64,
    pub iterations: usize,
    pub mode: WitnessMode,
    pub seed: u64,
}

/// Search for a pair `0 <= A <= B` minimizing `min eig(B^2 - A^2)`.
///
/// Candidates are generated as `A = G1^H G1`, `B = A + G2^H G2` from complex
/// Gaussian factors, which satisfies both premises by construction, then
/// rescaled so `tr B` equals the dimension to fix the overall scale. Random
/// restarts are refined by a pattern search whose step halves on stall from
/// [`tol::SEARCH_STEP_INIT`] down to [`tol::SEARCH_STEP_MIN`]. One iteration
/// is one candidate evaluation; deterministic for a given seed.
pub fn witness_search(
    dim: usize,
    seed: u64,
    iterations: usize,
    mode: WitnessMode,
) -> Result<WitnessSearchOutcome> {
    if dim == 0 {
        return Err(Error::Premise("dimension must be at least 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let search = FactorSearch { dim, mode };
    let mut used = 0;

    let mut best: Option<(f64, HermitianOperator, HermitianOperator)> = None;
    let mut current = search.fresh(&mut rng)?;
    used += 1;
    let mut step = tol::SEARCH_STEP_INIT;
    let mut stalls = 0;

    while used < iterations {
        let candidate = search.perturbed(&current, step, &mut rng)?;
        used += 1;
        if candidate.margin < current.margin {
            current = candidate;
            stalls = 0;
        } else {
            stalls += 1;
            if stalls >= tol::SEARCH_STALL {
                stalls = 0;
                step *= 0.5;
                if step < tol::SEARCH_STEP_MIN {
                    // Converged locally; bank the result and restart.
                    update_best(&mut best, &current);
                    current = search.fresh(&mut rng)?;
                    used += 1;
                    step = tol::SEARCH_STEP_INIT;
                }
            }
        }
    }
    update_best(&mut best, &current);

    let (square_margin, observable_a, observable_b) = best.expect("at least one evaluation");
    Ok(WitnessSearchOutcome {
        observable_a,
        observable_b,
        square_margin,
        iterations: used,
        mode,
        seed,
    })
}

fn update_best(best: &mut Option<(f64, HermitianOperator, HermitianOperator)>, point: &SearchPoint) {
    let better = match best {
        Some((margin, _, _)) => point.margin < *margin,
        None => true,
    };
    if better {
        *best = Some((point.margin, point.a.clone(), point.b.clone()));
    }
}

struct SearchPoint {
    g1: Array2<Complex64>,
    g2: Array2<Complex64>,
    a: HermitianOperator,
    b: HermitianOperator,
    margin: f64,
}

struct FactorSearch {
    dim: usize,
    mode: WitnessMode,
}

impl FactorSearch {
    fn fresh(&self, rng: &mut ChaCha8Rng) -> Result<SearchPoint> {
        let g1 = self.random_factor(rng);
        let g2 = self.random_factor(rng);
        self.evaluate(g1, g2)
    }

    fn perturbed(&self, point: &SearchPoint, step: f64, rng: &mut ChaCha8Rng) -> Result<SearchPoint> {
        let g1 = self.jitter(&point.g1, step, rng);
        let g2 = self.jitter(&point.g2, step, rng);
        self.evaluate(g1, g2)
    }

    fn random_factor(&self, rng: &mut ChaCha8Rng) -> Array2<Complex64> {
        let mut g = Array2::zeros((self.dim, self.dim));
        self.fill(&mut g, 1.0, rng);
        g
    }

    fn jitter(&self, g: &Array2<Complex64>, step: f64, rng: &mut ChaCha8Rng) -> Array2<Complex64> {
        let mut out = g.clone();
        self.fill(&mut out, step, rng);
        out
    }

    /// Add `scale` times a fresh Gaussian draw to every free entry.
    fn fill(&self, g: &mut Array2<Complex64>, scale: f64, rng: &mut ChaCha8Rng) {
        for i in 0..self.dim {
            for j in 0..self.dim {
                match self.mode {
                    WitnessMode::General => {
                        let re: f64 = rng.sample(StandardNormal);
                        let im: f64 = rng.sample(StandardNormal);
                        g[[i, j]] += Complex64::new(re * scale, im * scale);
                    }
                    WitnessMode::Diagonal => {
                        if i == j {
                            let re: f64 = rng.sample(StandardNormal);
                            g[[i, j]] += Complex64::new(re * scale, 0.0);
                        }
                    }
                }
            }
        }
    }

    /// Margin of the pair built from the factors: `A = G1^H G1`,
    /// `B = A + G2^H G2`, rescaled to `tr B = dim`.
    fn evaluate(&self, g1: Array2<Complex64>, g2: Array2<Complex64>) -> Result<SearchPoint> {
        let a0 = adjoint(&g1).dot(&g1);
        let b0 = &a0 + &adjoint(&g2).dot(&g2);
        let trace: f64 = (0..self.dim).map(|i| b0[[i, i]].re).sum();
        let scale = if trace > 1e-12 {
            self.dim as f64 / trace
        } else {
            1.0
        };
        let a = HermitianOperator::new_unchecked(a0.mapv(|z| z * scale));
        let b = HermitianOperator::new_unchecked(b0.mapv(|z| z * scale));
        let diff = b.squared().sub(&a.squared())?;
        let margin = diff.min_eigenvalue()?;
        Ok(SearchPoint {
            g1,
            g2,
            a,
            b,
            margin,
        })
    }
}
