//! Coherent-state phase space for one truncated oscillator mode.
//!
//! States become smooth, bounded density-like functions `Q(alpha) =
//! <alpha|rho|alpha>` on the complex plane; selected observables become
//! polynomial symbols `F(alpha)` such that the plane integral of `Q * F`
//! returns the trace pairing. The representation is asymmetric on purpose:
//! `Q` is always in `[0, 1]`, while `F` takes values unrelated to the
//! observable's eigenvalues and need not be positive.
//!
//! Convention: the identity resolves as `(1/pi) int |alpha><alpha| d2alpha`
//! with `d2alpha = dRe dIm`, and every symbol carries its `1/pi` explicitly,
//! so pairings are computed as plain `int Q F dRe dIm` with no extra
//! prefactor.

use ndarray::{Array1, Array2};
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::operators::{cdot, expectation, DensityState, HermitianOperator, Spectrum};
use crate::tol;

/// Basis `|0> ... |M>` of one bosonic mode truncated at `M` quanta.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct FockSpace1M {
    cutoff: usize,
}

impl FockSpace1M {
    pub fn new(cutoff: usize) -> Result<Self> {
        if cutoff < 1 {
            return Err(Error::CutoffTooSmall {
                cutoff,
                required: 1,
            });
        }
        Ok(Self { cutoff })
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    pub fn dim(&self) -> usize {
        self.cutoff + 1
    }

    /// Lowering matrix: `<n-1|a|n> = sqrt(n)`.
    pub fn annihilation(&self) -> Array2<Complex64> {
        let d = self.dim();
        let mut a = Array2::zeros((d, d));
        for n in 1..d {
            a[[n - 1, n]] = Complex64::new((n as f64).sqrt(), 0.0);
        }
        a
    }

    /// The photon-number observable `diag(0, 1, ..., M)`.
    pub fn number_operator(&self) -> HermitianOperator {
        let values: Vec<f64> = (0..self.dim()).map(|n| n as f64).collect();
        HermitianOperator::diagonal(&values)
    }

    pub fn identity(&self) -> HermitianOperator {
        HermitianOperator::identity(self.dim())
    }

    /// Vacuum projector as a state.
    pub fn vacuum(&self) -> DensityState {
        let mut v = Array1::zeros(self.dim());
        v[0] = Complex64::new(1.0, 0.0);
        DensityState::pure(&v).expect("unit vector")
    }

    /// Projector onto `|n>`.
    pub fn number_state(&self, n: usize) -> Result<DensityState> {
        if n > self.cutoff {
            return Err(Error::CutoffTooSmall {
                cutoff: self.cutoff,
                required: n,
            });
        }
        let mut v = Array1::zeros(self.dim());
        v[n] = Complex64::new(1.0, 0.0);
        Ok(DensityState::pure(&v).expect("unit vector"))
    }

    /// Truncated thermal state with mean occupation `nbar`, renormalized.
    pub fn thermal_state(&self, nbar: f64) -> Result<DensityState> {
        if nbar < 0.0 {
            return Err(Error::Premise("mean occupation must be >= 0".into()));
        }
        let q = nbar / (1.0 + nbar);
        let mut weights: Vec<f64> = (0..self.dim()).map(|n| q.powi(n as i32)).collect();
        let total: f64 = weights.iter().sum();
        for w in &mut weights {
            *w /= total;
        }
        let d = self.dim();
        let mut m = Array2::zeros((d, d));
        for (n, &w) in weights.iter().enumerate() {
            m[[n, n]] = Complex64::new(w, 0.0);
        }
        Ok(DensityState::new_unchecked(m))
    }
}

/// Truncated coherent amplitudes `c_n = e^{-|alpha|^2/2} alpha^n / sqrt(n!)`.
#[derive(Debug, Clone, Serialize)]
pub struct CoherentVector {
    pub alpha: Complex64,
    pub coefficients: Vec<Complex64>,
    /// Poisson weight beyond the cutoff: `1 - sum |c_n|^2 <= tail_bound`.
    pub tail_bound: f64,
}

impl CoherentVector {
    pub fn new(space: &FockSpace1M, alpha: Complex64) -> Self {
        Self {
            alpha,
            coefficients: coherent_coefficients(space.cutoff(), alpha).to_vec(),
            tail_bound: poisson_tail(alpha.norm_sqr(), space.cutoff()),
        }
    }

    /// The normalized pure state built on the truncated coefficients.
    pub fn state(&self) -> DensityState {
        let v = Array1::from(self.coefficients.clone());
        DensityState::pure(&v).expect("nonzero vector")
    }
}

pub(crate) fn coherent_coefficients(cutoff: usize, alpha: Complex64) -> Array1<Complex64> {
    let mut c = Array1::zeros(cutoff + 1);
    c[0] = Complex64::new((-alpha.norm_sqr() / 2.0).exp(), 0.0);
    for n in 0..cutoff {
        c[n + 1] = c[n] * alpha / ((n + 1) as f64).sqrt();
    }
    c
}

/// Upper Poisson tail `P[X > cutoff]` for `X ~ Poisson(mean)`: the weight a
/// coherent amplitude of intensity `mean` leaves beyond the basis.
pub fn poisson_tail(mean: f64, cutoff: usize) -> f64 {
    if mean <= 0.0 {
        return 0.0;
    }
    // First tail term in log space, then a forward sum; terms eventually
    // decay faster than geometrically.
    let k0 = (cutoff + 1) as f64;
    let mut ln_term = -mean + k0 * mean.ln();
    for k in 1..=cutoff + 1 {
        ln_term -= (k as f64).ln();
    }
    let mut term = ln_term.exp();
    let mut sum = 0.0;
    let mut k = k0;
    loop {
        sum += term;
        k += 1.0;
        term *= mean / k;
        if term < sum * 1e-18 + 1e-300 {
            break;
        }
    }
    sum.min(1.0)
}

/// `<alpha|rho|alpha>` on the truncated space, guarded to the disc
/// `|alpha|^2 <= cutoff / 4` where the truncation tail is negligible.
pub fn q_function(rho: &DensityState, alpha: Complex64) -> Result<f64> {
    let cutoff = rho.dim() - 1;
    let alpha_sq = alpha.norm_sqr();
    if alpha_sq > cutoff as f64 / 4.0 {
        return Err(Error::AlphaOutsideValidity {
            alpha_sq,
            cutoff,
            required: (4.0 * alpha_sq).ceil() as usize,
        });
    }
    Ok(q_value_truncated(rho, alpha))
}

/// Unguarded `<alpha|rho|alpha>` with truncated coherent coefficients; exact
/// for states supported on the truncated basis, whatever `alpha`.
pub fn q_value_truncated(rho: &DensityState, alpha: Complex64) -> f64 {
    let c = coherent_coefficients(rho.dim() - 1, alpha);
    let rc = rho.entries().dot(&c);
    cdot(&c, &rc).re
}

/// Low-rank view of a state for fast repeated Q evaluation on grids.
struct QEvaluator {
    weights: Vec<f64>,
    vectors: Vec<Array1<Complex64>>,
    cutoff: usize,
}

impl QEvaluator {
    fn new(rho: &DensityState) -> Result<Self> {
        let eig = rho.eigh()?;
        let mut weights = Vec::new();
        let mut vectors = Vec::new();
        for (i, &w) in eig.values.iter().enumerate() {
            if w > 1e-14 {
                weights.push(w);
                vectors.push(eig.vector(i));
            }
        }
        Ok(Self {
            weights,
            vectors,
            cutoff: rho.dim() - 1,
        })
    }

    fn q(&self, alpha: Complex64) -> f64 {
        let c = coherent_coefficients(self.cutoff, alpha);
        self.weights
            .iter()
            .zip(&self.vectors)
            .map(|(w, v)| w * cdot(&c, v).norm_sqr())
            .sum()
    }
}

/// Square midpoint-rule grid on `[-radius, radius]^2`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct GridSpec {
    pub radius: f64,
    pub spacing: f64,
}

impl GridSpec {
    pub fn new(radius: f64, spacing: f64) -> Result<Self> {
        if !radius.is_finite() || radius <= 0.0 || !spacing.is_finite() || spacing <= 0.0 {
            return Err(Error::Premise(
                "grid radius and spacing must be positive".into(),
            ));
        }
        Ok(Self { radius, spacing })
    }

    /// Default for a given cutoff: radius `2 + 2 sqrt(M)` (the Q mass of any
    /// truncated state decays Gaussian-fast past `sqrt(M)`), spacing 0.05.
    pub fn default_for(cutoff: usize) -> Self {
        Self {
            radius: 2.0 + 2.0 * (cutoff as f64).sqrt(),
            spacing: 0.05,
        }
    }

    /// Cells per axis; forced even so the half-resolution grid nests.
    pub fn points_per_axis(&self) -> usize {
        2 * ((self.radius / self.spacing).ceil() as usize).max(1)
    }

    /// Actual cell width after rounding to a whole number of cells.
    pub fn effective_spacing(&self) -> f64 {
        2.0 * self.radius / self.points_per_axis() as f64
    }

    fn center(&self, i: usize) -> f64 {
        -self.radius + (i as f64 + 0.5) * self.effective_spacing()
    }

    fn coarser(&self) -> GridSpec {
        GridSpec {
            radius: self.radius,
            spacing: self.spacing * 2.0,
        }
    }

    /// Midpoint-rule sum of `f` over the grid, row-major order.
    fn integrate(&self, mut f: impl FnMut(Complex64) -> f64) -> f64 {
        let n = self.points_per_axis();
        let cell = self.effective_spacing() * self.effective_spacing();
        let mut sum = 0.0;
        for i in 0..n {
            let re = self.center(i);
            for j in 0..n {
                let im = self.center(j);
                sum += f(Complex64::new(re, im));
            }
        }
        sum * cell
    }
}

/// Sampled Q values for plotting: `(re, im, q)` rows in row-major order.
pub fn q_grid(rho: &DensityState, grid: &GridSpec) -> Result<Vec<(f64, f64, f64)>> {
    let eval = QEvaluator::new(rho)?;
    let n = grid.points_per_axis();
    let mut rows = Vec::with_capacity(n * n);
    for i in 0..n {
        let re = grid.center(i);
        for j in 0..n {
            let im = grid.center(j);
            rows.push((re, im, eval.q(Complex64::new(re, im))));
        }
    }
    Ok(rows)
}

/// A polynomial observable symbol `F(alpha) = p(|alpha|^2) / pi` together
/// with the observable it represents on a truncated space.
///
/// Only observables with bounded polynomial symbols are supported; the
/// anti-normal reordering gives `1 -> 1/pi`, `n -> (u - 1)/pi`,
/// `n^2 -> (u^2 - 3u + 1)/pi` with `u = |alpha|^2`.
#[derive(Debug, Clone, Serialize)]
pub struct PSymbol {
    label: String,
    /// Polynomial coefficients in `u = |alpha|^2`, constant first; the
    /// evaluated polynomial is divided by pi.
    poly_over_pi: Vec<f64>,
    observable: HermitianOperator,
}

impl PSymbol {
    pub fn identity(space: &FockSpace1M) -> Self {
        Self {
            label: "identity".into(),
            poly_over_pi: vec![1.0],
            observable: space.identity(),
        }
    }

    pub fn number(space: &FockSpace1M) -> Self {
        Self {
            label: "number".into(),
            poly_over_pi: vec![-1.0, 1.0],
            observable: space.number_operator(),
        }
    }

    pub fn number_squared(space: &FockSpace1M) -> Self {
        Self {
            label: "number-squared".into(),
            poly_over_pi: vec![1.0, -3.0, 1.0],
            observable: space.number_operator().squared(),
        }
    }

    /// Look up a symbol by name; anything without a bounded polynomial
    /// symbol is rejected.
    pub fn for_name(name: &str, space: &FockSpace1M) -> Result<Self> {
        match name {
            "identity" => Ok(Self::identity(space)),
            "number" => Ok(Self::number(space)),
            "number-squared" => Ok(Self::number_squared(space)),
            other => Err(Error::UnsupportedSymbol(other.to_string())),
        }
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn observable(&self) -> &HermitianOperator {
        &self.observable
    }

    /// `F(alpha)`.
    pub fn eval(&self, alpha: Complex64) -> f64 {
        let u = alpha.norm_sqr();
        let mut p = 0.0;
        for &c in self.poly_over_pi.iter().rev() {
            p = p * u + c;
        }
        p / std::f64::consts::PI
    }
}

/// Quadrature-vs-trace comparison of the pairing `int Q F`.
#[derive(Debug, Clone, Serialize)]
pub struct PairingReport {
    /// `int Q_rho(alpha) F(alpha) dRe dIm` over the grid.
    pub integral: f64,
    /// `tr(rho A)` for the observable the symbol represents.
    pub trace: f64,
    pub discrepancy: f64,
    /// Richardson estimate from the half-resolution grid.
    pub quadrature_error_estimate: f64,
    /// Occupation of the top two basis levels; a proxy for how far the
    /// state is from the truncation edge.
    pub state_tail: f64,
    pub grid_radius: f64,
    pub grid_spacing: f64,
    pub points_per_axis: usize,
}

/// Integrate `Q * F` over the grid and compare with the trace. The state
/// must live well inside the cutoff (top-level occupation <=
/// [`tol::TAIL_LIMIT`]); a Richardson error estimate above `quad_tol` is
/// reported as a too-coarse grid.
pub fn pairing_check(
    rho: &DensityState,
    symbol: &PSymbol,
    grid: &GridSpec,
    quad_tol: f64,
) -> Result<PairingReport> {
    if rho.dim() != symbol.observable().dim() {
        return Err(Error::DimensionMismatch {
            left: rho.dim(),
            right: symbol.observable().dim(),
        });
    }
    let state_tail = edge_occupation(rho);
    if state_tail > tol::TAIL_LIMIT {
        return Err(Error::TailBound {
            tail: state_tail,
            limit: tol::TAIL_LIMIT,
        });
    }

    let eval = QEvaluator::new(rho)?;
    let integral = grid.integrate(|alpha| eval.q(alpha) * symbol.eval(alpha));
    let coarse = grid
        .coarser()
        .integrate(|alpha| eval.q(alpha) * symbol.eval(alpha));
    // Midpoint rule is second order, so halving the resolution scales the
    // error by 4; the estimate is |fine - coarse| / 3.
    let quadrature_error_estimate = (integral - coarse).abs() / 3.0;
    if quadrature_error_estimate > quad_tol {
        return Err(Error::GridTooCoarse {
            estimated: quadrature_error_estimate,
            tolerance: quad_tol,
        });
    }

    let trace = expectation(rho, symbol.observable())?;
    Ok(PairingReport {
        integral,
        trace,
        discrepancy: (integral - trace).abs(),
        quadrature_error_estimate,
        state_tail,
        grid_radius: grid.radius,
        grid_spacing: grid.effective_spacing(),
        points_per_axis: grid.points_per_axis(),
    })
}

fn edge_occupation(rho: &DensityState) -> f64 {
    let d = rho.dim();
    let mut tail = rho.entries()[[d - 1, d - 1]].re;
    if d >= 2 {
        tail += rho.entries()[[d - 2, d - 2]].re;
    }
    tail
}

/// `(1/pi) int F(alpha) |alpha><alpha| d2alpha` on the truncated space (the
/// 1/pi lives inside the symbol). Converges to the represented observable as
/// the grid refines; used to validate symbols.
pub fn reconstruct_observable(symbol: &PSymbol, space: &FockSpace1M, grid: &GridSpec) -> HermitianOperator {
    let d = space.dim();
    let n = grid.points_per_axis();
    let cell = grid.effective_spacing() * grid.effective_spacing();
    let mut out = Array2::<Complex64>::zeros((d, d));
    for i in 0..n {
        let re = grid.center(i);
        for j in 0..n {
            let im = grid.center(j);
            let alpha = Complex64::new(re, im);
            let weight = symbol.eval(alpha) * cell;
            let c = coherent_coefficients(space.cutoff(), alpha);
            for r in 0..d {
                let cr = c[r] * weight;
                for s in 0..d {
                    out[[r, s]] += cr * c[s].conj();
                }
            }
        }
    }
    HermitianOperator::new_unchecked(out)
}

/// Contrast between the fuzzy state side and the unconstrained symbol side
/// of the pairing.
#[derive(Debug, Clone, Serialize)]
pub struct AsymmetryReport {
    /// Largest Q value on the grid; never exceeds 1.
    pub q_sup: f64,
    pub q_sup_at: (f64, f64),
    /// Range of the symbol over the grid. These values are not outcomes:
    /// compare with the observable spectrum next to them.
    pub f_min: f64,
    pub f_max: f64,
    pub f_variance: f64,
    pub observable_spectrum: Spectrum,
}

/// Evaluate Q and F over the grid and summarize how differently the two
/// sides of the pairing behave.
pub fn asymmetry_report(
    rho: &DensityState,
    symbol: &PSymbol,
    grid: &GridSpec,
) -> Result<AsymmetryReport> {
    if rho.dim() != symbol.observable().dim() {
        return Err(Error::DimensionMismatch {
            left: rho.dim(),
            right: symbol.observable().dim(),
        });
    }
    let eval = QEvaluator::new(rho)?;
    let n = grid.points_per_axis();
    let mut q_sup = f64::NEG_INFINITY;
    let mut q_sup_at = (0.0, 0.0);
    let mut f_min = f64::INFINITY;
    let mut f_max = f64::NEG_INFINITY;
    let mut f_sum = 0.0;
    let mut f_sum_sq = 0.0;
    for i in 0..n {
        let re = grid.center(i);
        for j in 0..n {
            let im = grid.center(j);
            let alpha = Complex64::new(re, im);
            let q = eval.q(alpha);
            if q > q_sup {
                q_sup = q;
                q_sup_at = (re, im);
            }
            let f = symbol.eval(alpha);
            f_min = f_min.min(f);
            f_max = f_max.max(f);
            f_sum += f;
            f_sum_sq += f * f;
        }
    }
    let count = (n * n) as f64;
    let mean = f_sum / count;
    Ok(AsymmetryReport {
        q_sup,
        q_sup_at,
        f_min,
        f_max,
        f_variance: (f_sum_sq / count - mean * mean).max(0.0),
        observable_spectrum: symbol.observable().spectrum()?,
    })
}
