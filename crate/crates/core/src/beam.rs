//! Two-mode photon beams: second quantization of single-photon observables,
//! coherent beam states, moment identities, the intensity crossover between
//! classical and quantum behaviour, and Stokes polarization readout.
//!
//! A single-photon observable `A` lifts to the beam observable
//! `Gamma(A) = sum_j alpha_j a'(phi_j) a(phi_j)` over the eigenmodes of `A`.
//! `Gamma` conserves total photon number, so everything here is stored and
//! manipulated as one block per total-occupation sector; a cutoff `M` keeps
//! sectors `0..=M` and all number-conserving identities remain exact on the
//! kept sectors.

use ndarray::{Array1, Array2};
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::jacobi;
use crate::operators::{cdot, loewner_geq, BlochVector, HermitianOperator};
use crate::phase_space::poisson_tail;
use crate::tol;

/// Basis of two bosonic modes truncated at total occupation `M`: all
/// `|n1, n2>` with `n1 + n2 <= M`, dimension `(M+1)(M+2)/2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct TwoModeFock {
    total_cutoff: usize,
}

impl TwoModeFock {
    pub fn new(total_cutoff: usize) -> Result<Self> {
        if total_cutoff < 1 {
            return Err(Error::CutoffTooSmall {
                cutoff: total_cutoff,
                required: 1,
            });
        }
        Ok(Self { total_cutoff })
    }

    pub fn total_cutoff(&self) -> usize {
        self.total_cutoff
    }

    pub fn dim(&self) -> usize {
        (self.total_cutoff + 1) * (self.total_cutoff + 2) / 2
    }

    /// Sectors are stored consecutively; within sector `t = n1 + n2` states
    /// are ordered by ascending `n1`.
    pub fn index(&self, n1: usize, n2: usize) -> usize {
        let t = n1 + n2;
        debug_assert!(t <= self.total_cutoff);
        t * (t + 1) / 2 + n1
    }

    pub fn occupation(&self, index: usize) -> (usize, usize) {
        let mut t = 0usize;
        while (t + 1) * (t + 2) / 2 <= index {
            t += 1;
        }
        let n1 = index - t * (t + 1) / 2;
        (n1, t - n1)
    }

    pub fn sector_offset(&self, t: usize) -> usize {
        t * (t + 1) / 2
    }

    pub fn sector_dim(&self, t: usize) -> usize {
        t + 1
    }

    /// The total photon number observable, diagonal in every basis.
    pub fn total_number(&self) -> HermitianOperator {
        let values: Vec<f64> = (0..self.dim())
            .map(|i| {
                let (n1, n2) = self.occupation(i);
                (n1 + n2) as f64
            })
            .collect();
        HermitianOperator::diagonal(&values)
    }
}

/// The annihilator `a(phi) = conj(phi_1) a_1 + conj(phi_2) a_2` of one
/// single-photon mode, stored as one block per sector mapping `t -> t - 1`.
struct ModeLowering {
    /// `blocks[t - 1]` has shape `(t, t + 1)` and maps sector `t` down.
    blocks: Vec<Array2<Complex64>>,
}

impl ModeLowering {
    fn new(space: &TwoModeFock, phi: [Complex64; 2]) -> Self {
        let m = space.total_cutoff();
        let c1 = phi[0].conj();
        let c2 = phi[1].conj();
        let mut blocks = Vec::with_capacity(m);
        for t in 1..=m {
            let mut block = Array2::zeros((t, t + 1));
            for n1 in 0..=t {
                let n2 = t - n1;
                if n1 >= 1 {
                    block[[n1 - 1, n1]] += c1 * (n1 as f64).sqrt();
                }
                if n2 >= 1 {
                    block[[n1, n1]] += c2 * (n2 as f64).sqrt();
                }
            }
            blocks.push(block);
        }
        Self { blocks }
    }

    fn block(&self, t: usize) -> &Array2<Complex64> {
        &self.blocks[t - 1]
    }
}

fn block_adjoint(m: &Array2<Complex64>) -> Array2<Complex64> {
    let (rows, cols) = m.dim();
    let mut out = Array2::zeros((cols, rows));
    for i in 0..rows {
        for j in 0..cols {
            out[[j, i]] = m[[i, j]].conj();
        }
    }
    out
}

/// A number-conserving observable as one Hermitian block per sector.
#[derive(Debug, Clone)]
pub struct SectorBlocks {
    blocks: Vec<Array2<Complex64>>,
}

impl SectorBlocks {
    fn zero(space: &TwoModeFock) -> Self {
        let blocks = (0..=space.total_cutoff())
            .map(|t| Array2::zeros((t + 1, t + 1)))
            .collect();
        Self { blocks }
    }

    /// `L^H L` per sector: the sector restriction of `a'(phi) a(phi)`.
    fn from_gram(space: &TwoModeFock, lowering: &ModeLowering) -> Self {
        let mut out = Self::zero(space);
        for t in 1..=space.total_cutoff() {
            let l = lowering.block(t);
            out.blocks[t] = block_adjoint(l).dot(l);
        }
        out
    }

    /// `X^H X` for the two-step lowering `X = a(phi_outer) a(phi_inner)`.
    fn from_double_gram(space: &TwoModeFock, outer: &ModeLowering, inner: &ModeLowering) -> Self {
        let mut out = Self::zero(space);
        for t in 2..=space.total_cutoff() {
            let x = outer.block(t - 1).dot(inner.block(t));
            out.blocks[t] = block_adjoint(&x).dot(&x);
        }
        out
    }

    fn add_scaled(&mut self, other: &Self, factor: f64) {
        for (mine, theirs) in self.blocks.iter_mut().zip(&other.blocks) {
            *mine += &theirs.mapv(|z| z * factor);
        }
    }

    pub fn sector_count(&self) -> usize {
        self.blocks.len()
    }

    pub fn block(&self, t: usize) -> &Array2<Complex64> {
        &self.blocks[t]
    }

    /// Per-sector products; equals the square because sectors never mix.
    fn square(&self) -> Self {
        Self {
            blocks: self.blocks.iter().map(|b| b.dot(b)).collect(),
        }
    }

    fn sub(&self, other: &Self) -> Self {
        Self {
            blocks: self
                .blocks
                .iter()
                .zip(&other.blocks)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }

    fn matvec(&self, space: &TwoModeFock, v: &Array1<Complex64>) -> Array1<Complex64> {
        let mut out = Array1::zeros(space.dim());
        for (t, block) in self.blocks.iter().enumerate() {
            let offset = space.sector_offset(t);
            let d = space.sector_dim(t);
            for r in 0..d {
                let mut acc = Complex64::new(0.0, 0.0);
                for c in 0..d {
                    acc += block[[r, c]] * v[offset + c];
                }
                out[offset + r] = acc;
            }
        }
        out
    }

    fn to_operator(&self, space: &TwoModeFock) -> HermitianOperator {
        let d = space.dim();
        let mut m = Array2::zeros((d, d));
        for (t, block) in self.blocks.iter().enumerate() {
            let offset = space.sector_offset(t);
            let n = space.sector_dim(t);
            for r in 0..n {
                for c in 0..n {
                    m[[offset + r, offset + c]] = block[[r, c]];
                }
            }
        }
        HermitianOperator::new_unchecked(m)
    }

    /// Smallest eigenvalue in each sector.
    fn sector_min_eigs(&self) -> Result<Vec<f64>> {
        self.blocks
            .iter()
            .map(|b| Ok(jacobi::eigh(b)?.values[0]))
            .collect()
    }

    fn max_abs_entry(&self, sectors: std::ops::RangeInclusive<usize>) -> f64 {
        let mut worst = 0.0f64;
        for t in sectors {
            for z in self.blocks[t].iter() {
                worst = worst.max(z.norm());
            }
        }
        worst
    }
}

fn require_dim2(a: &HermitianOperator) -> Result<()> {
    if a.dim() != 2 {
        return Err(Error::DimensionMismatch {
            left: a.dim(),
            right: 2,
        });
    }
    Ok(())
}

/// Second-quantize a single-photon observable as sector blocks: diagonalize
/// `A`, lift each eigenmode to its number operator, and weight by the
/// eigenvalue.
pub fn gamma_blocks(a: &HermitianOperator, space: &TwoModeFock) -> Result<SectorBlocks> {
    require_dim2(a)?;
    let eig = a.eigh()?;
    let mut out = SectorBlocks::zero(space);
    for j in 0..2 {
        let phi = [eig.vectors[[0, j]], eig.vectors[[1, j]]];
        let lowering = ModeLowering::new(space, phi);
        let gram = SectorBlocks::from_gram(space, &lowering);
        out.add_scaled(&gram, eig.values[j]);
    }
    Ok(out)
}

/// Dense matrix of the second-quantized observable.
pub fn second_quantize(a: &HermitianOperator, space: &TwoModeFock) -> Result<HermitianOperator> {
    Ok(gamma_blocks(a, space)?.to_operator(space))
}

/// A classical two-mode amplitude; `intensity` is the mean photon number of
/// the beam it generates.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct BeamAmplitude {
    pub xi: [Complex64; 2],
}

impl BeamAmplitude {
    pub const fn new(xi1: Complex64, xi2: Complex64) -> Self {
        Self { xi: [xi1, xi2] }
    }

    pub fn intensity(&self) -> f64 {
        self.xi[0].norm_sqr() + self.xi[1].norm_sqr()
    }
}

/// Truncated, renormalized coherent state of a beam amplitude.
#[derive(Debug, Clone)]
pub struct CoherentBeam {
    pub amplitude: BeamAmplitude,
    pub intensity: f64,
    /// Coefficients over the sector basis, unit norm.
    pub state: Array1<Complex64>,
    /// Poisson weight of the discarded sectors before renormalization.
    pub tail_bound: f64,
}

/// Build the coherent state `Phi(xi)`. The intensity must satisfy
/// `N <= M / 4` and leave a Poisson tail at most [`tol::TAIL_LIMIT`].
pub fn coherent_beam(xi: &BeamAmplitude, space: &TwoModeFock) -> Result<CoherentBeam> {
    let n = xi.intensity();
    let m = space.total_cutoff();
    if n > m as f64 / 4.0 {
        return Err(Error::CutoffTooSmall {
            cutoff: m,
            required: (4.0 * n).ceil() as usize,
        });
    }
    let tail_bound = poisson_tail(n, m);
    if tail_bound > tol::TAIL_LIMIT {
        return Err(Error::TailBound {
            tail: tail_bound,
            limit: tol::TAIL_LIMIT,
        });
    }

    // Per-mode amplitudes xi^k / sqrt(k!) with the joint e^{-N/2} prefactor
    // folded into mode 1.
    let mut d1 = vec![Complex64::new((-n / 2.0).exp(), 0.0); m + 1];
    let mut d2 = vec![Complex64::new(1.0, 0.0); m + 1];
    for k in 0..m {
        d1[k + 1] = d1[k] * xi.xi[0] / ((k + 1) as f64).sqrt();
        d2[k + 1] = d2[k] * xi.xi[1] / ((k + 1) as f64).sqrt();
    }
    let mut state = Array1::zeros(space.dim());
    for t in 0..=m {
        for n1 in 0..=t {
            state[space.index(n1, t - n1)] = d1[n1] * d2[t - n1];
        }
    }
    let norm = state.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    state.mapv_inplace(|z| z / norm);

    Ok(CoherentBeam {
        amplitude: *xi,
        intensity: n,
        state,
        tail_bound,
    })
}

/// `<xi, A xi>` for a 2x2 observable.
fn quadratic_form(a: &HermitianOperator, xi: &[Complex64; 2]) -> f64 {
    let m = a.entries();
    let mut acc = Complex64::new(0.0, 0.0);
    for i in 0..2 {
        for j in 0..2 {
            acc += xi[i].conj() * m[[i, j]] * xi[j];
        }
    }
    acc.re
}

/// First and second beam moments of `Gamma(A)` against their closed forms.
#[derive(Debug, Clone, Serialize)]
pub struct MomentReport {
    pub mean: f64,
    pub second_moment: f64,
    /// `<xi, A xi>`.
    pub analytic_mean: f64,
    /// `<xi, A xi>^2 + <xi, A^2 xi>`.
    pub analytic_second: f64,
    pub intensity: f64,
    pub tail_bound: f64,
}

/// Evaluate `<Gamma(A)>` and `<Gamma(A)^2>` on the coherent beam of `xi` and
/// report them next to the closed forms they must match.
pub fn moment_check(
    a: &HermitianOperator,
    xi: &BeamAmplitude,
    space: &TwoModeFock,
) -> Result<MomentReport> {
    require_dim2(a)?;
    let beam = coherent_beam(xi, space)?;
    let gamma = gamma_blocks(a, space)?;
    let gv = gamma.matvec(space, &beam.state);
    let mean = cdot(&beam.state, &gv).re;
    let second_moment = gv.iter().map(|z| z.norm_sqr()).sum();

    let analytic_mean = quadratic_form(a, &xi.xi);
    let analytic_second = analytic_mean * analytic_mean + quadratic_form(&a.squared(), &xi.xi);
    Ok(MomentReport {
        mean,
        second_moment,
        analytic_mean,
        analytic_second,
        intensity: beam.intensity,
        tail_bound: beam.tail_bound,
    })
}

/// Residuals of the square decomposition of `Gamma(A)`.
#[derive(Debug, Clone, Serialize)]
pub struct DecompositionReport {
    /// Max entry of `Gamma(A)^2 - pair_part - Gamma(A^2)` on sectors
    /// `0..=M-2`.
    pub safe_block_residual: f64,
    /// Same residual over every kept sector.
    pub full_residual: f64,
    /// Max entry of `Gamma(A)^2 - Gamma(A^2)` on sectors 0 and 1; these two
    /// sectors cannot tell the square from the lifted square.
    pub low_sector_residual: f64,
    /// Max entry of `Gamma(A)^2 - Gamma(A^2)` on sector 2; nonzero whenever
    /// `A` is nonzero.
    pub two_photon_gap: f64,
}

/// Verify `Gamma(A)^2 = sum_ij alpha_i alpha_j a' a' a a + Gamma(A^2)`
/// blockwise, and that dropping the pair part is exact only below two
/// photons.
pub fn product_decomposition_check(
    a: &HermitianOperator,
    space: &TwoModeFock,
) -> Result<DecompositionReport> {
    require_dim2(a)?;
    let m = space.total_cutoff();
    if m < 2 {
        return Err(Error::CutoffTooSmall {
            cutoff: m,
            required: 2,
        });
    }
    let eig = a.eigh()?;
    let modes: Vec<ModeLowering> = (0..2)
        .map(|j| ModeLowering::new(space, [eig.vectors[[0, j]], eig.vectors[[1, j]]]))
        .collect();

    let gamma = gamma_blocks(a, space)?;
    let gamma_sq = gamma.square();
    let gamma_of_square = gamma_blocks(&a.squared(), space)?;

    let mut pair_part = SectorBlocks::zero(space);
    for i in 0..2 {
        for j in 0..2 {
            let term = SectorBlocks::from_double_gram(space, &modes[i], &modes[j]);
            pair_part.add_scaled(&term, eig.values[i] * eig.values[j]);
        }
    }

    let mut decomposition = gamma_sq.sub(&pair_part);
    decomposition = decomposition.sub(&gamma_of_square);
    let square_vs_lift = gamma_sq.sub(&gamma_of_square);

    Ok(DecompositionReport {
        safe_block_residual: decomposition.max_abs_entry(0..=m - 2),
        full_residual: decomposition.max_abs_entry(0..=m),
        low_sector_residual: square_vs_lift.max_abs_entry(0..=1),
        two_photon_gap: square_vs_lift.max_abs_entry(2..=2),
    })
}

/// Order preservation of second quantization, and where it breaks for
/// squares.
#[derive(Debug, Clone, Serialize)]
pub struct GammaOrderReport {
    /// Global minimum eigenvalue of `Gamma(B) - Gamma(A)`.
    pub order_margin: f64,
    pub order_sector_margins: Vec<f64>,
    /// Minimum eigenvalue of `Gamma(B^2) - Gamma(A^2)` over all sectors.
    pub squares_margin_global: f64,
    /// Its one-photon value; coincides with the single-photon square
    /// margin of the pair.
    pub squares_margin_one_photon: f64,
    pub squares_sector_margins: Vec<f64>,
}

/// For a premise pair `0 <= A <= B`, check that lifting preserves the order
/// while the lifted squares reproduce the single-photon violation.
pub fn gamma_order_check(
    a: &HermitianOperator,
    b: &HermitianOperator,
    space: &TwoModeFock,
    tolerance: f64,
) -> Result<GammaOrderReport> {
    require_dim2(a)?;
    require_dim2(b)?;
    let positivity = a.min_eigenvalue()?;
    if positivity < -tolerance {
        return Err(Error::Premise(format!(
            "A is not positive semidefinite (min eigenvalue {positivity:.3e})"
        )));
    }
    let order = loewner_geq(b, a, tolerance)?;
    if !order.holds {
        return Err(Error::Premise(format!(
            "A <= B fails (min eigenvalue of B - A is {:.3e})",
            order.margin
        )));
    }

    let diff = gamma_blocks(&b.sub(a)?, space)?;
    let order_sector_margins = diff.sector_min_eigs()?;
    let order_margin = order_sector_margins.iter().copied().fold(f64::INFINITY, f64::min);

    let sq_diff = gamma_blocks(&b.squared().sub(&a.squared())?, space)?;
    let squares_sector_margins = sq_diff.sector_min_eigs()?;
    let squares_margin_global = squares_sector_margins
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min);

    Ok(GammaOrderReport {
        order_margin,
        order_sector_margins,
        squares_margin_global,
        squares_margin_one_photon: squares_sector_margins[1],
        squares_sector_margins,
    })
}

/// One intensity sample of the crossover scan.
#[derive(Debug, Clone, Serialize)]
pub struct CrossoverRow {
    pub intensity: f64,
    /// `term1 + term2`, the closed-form margin.
    pub margin: f64,
    /// `N^2 (<u,Bu>^2 - <u,Au>^2)`, the classical (mean-squared) part.
    pub term1: f64,
    /// `N (<u,B^2u> - <u,A^2u>)`, the per-photon (variance) part.
    pub term2: f64,
    /// Numerical counterparts on the truncated space, where the cutoff
    /// admits the beam.
    pub numeric_margin: Option<f64>,
    pub numeric_term1: Option<f64>,
    pub numeric_term2: Option<f64>,
    pub tail_bound: Option<f64>,
}

/// Crossover scan of `<Gamma(B)^2> - <Gamma(A)^2>` at `xi = sqrt(N) u`.
#[derive(Debug, Clone, Serialize)]
pub struct CrossoverTable {
    pub rows: Vec<CrossoverRow>,
    /// Quadratic coefficient `<u,Bu>^2 - <u,Au>^2` (positive).
    pub quadratic_coefficient: f64,
    /// Linear coefficient `<u,B^2u> - <u,A^2u>` (negative).
    pub linear_coefficient: f64,
    /// `-linear / quadratic`.
    pub crossover_closed_form: f64,
    /// Root located by bisection between the scanned sign change, when the
    /// intensity list brackets one.
    pub crossover_bracketed: Option<f64>,
    /// Log-log slopes fitted on the numerically evaluated rows.
    pub slope_term1: Option<f64>,
    pub slope_term2: Option<f64>,
    pub total_cutoff: usize,
}

/// Direction along which the squares order breaks hardest: the bottom
/// eigenvector of `B^2 - A^2`.
pub fn default_direction(a: &HermitianOperator, b: &HermitianOperator) -> Result<[Complex64; 2]> {
    require_dim2(a)?;
    require_dim2(b)?;
    let eig = b.squared().sub(&a.squared())?.eigh()?;
    Ok([eig.vectors[[0, 0]], eig.vectors[[1, 0]]])
}

/// Scan beam intensities for the sign change of the margin
/// `<Gamma(B)^2> - <Gamma(A)^2>`: quadratically dominated (positive) for
/// bright beams, linearly dominated (negative) for weak ones.
///
/// `u` must be a unit direction with `<u, B^2 u> < <u, A^2 u>` and
/// `<u, A u> <= <u, B u>`; rows whose intensity fits the cutoff also carry
/// the numerically evaluated moments.
pub fn crossover_scan(
    a: &HermitianOperator,
    b: &HermitianOperator,
    u: &[Complex64; 2],
    intensities: &[f64],
    space: &TwoModeFock,
) -> Result<CrossoverTable> {
    require_dim2(a)?;
    require_dim2(b)?;
    let norm = (u[0].norm_sqr() + u[1].norm_sqr()).sqrt();
    if (norm - 1.0).abs() > tol::UNIT_TOL {
        return Err(Error::NotUnitVector { norm });
    }

    let mean_a = quadratic_form(a, u);
    let mean_b = quadratic_form(b, u);
    let second_a = quadratic_form(&a.squared(), u);
    let second_b = quadratic_form(&b.squared(), u);
    if second_b >= second_a {
        return Err(Error::Premise(format!(
            "direction does not violate the squares order (<u,B^2u> = {second_b:.6} >= <u,A^2u> = {second_a:.6})"
        )));
    }
    if mean_b < mean_a - tol::NUMERICAL_SLACK {
        return Err(Error::Premise(
            "direction violates the first-moment order <u,Au> <= <u,Bu>".into(),
        ));
    }
    let quadratic_coefficient = mean_b * mean_b - mean_a * mean_a;
    let linear_coefficient = second_b - second_a;
    if quadratic_coefficient <= 0.0 {
        return Err(Error::Premise(
            "mean gap vanishes along this direction; no crossover exists".into(),
        ));
    }

    let gamma_a = gamma_blocks(a, space)?;
    let gamma_b = gamma_blocks(b, space)?;
    let m = space.total_cutoff();

    let mut rows = Vec::with_capacity(intensities.len());
    for &n in intensities {
        if n < 0.0 {
            return Err(Error::Premise("intensities must be nonnegative".into()));
        }
        let term1 = quadratic_coefficient * n * n;
        let term2 = linear_coefficient * n;
        let mut row = CrossoverRow {
            intensity: n,
            margin: term1 + term2,
            term1,
            term2,
            numeric_margin: None,
            numeric_term1: None,
            numeric_term2: None,
            tail_bound: None,
        };
        let tail = poisson_tail(n, m);
        if n <= m as f64 / 4.0 && tail <= tol::TAIL_LIMIT {
            let root_n = n.sqrt();
            let xi = BeamAmplitude::new(u[0] * root_n, u[1] * root_n);
            let beam = coherent_beam(&xi, space)?;
            let va = gamma_a.matvec(space, &beam.state);
            let vb = gamma_b.matvec(space, &beam.state);
            let mean_ga = cdot(&beam.state, &va).re;
            let mean_gb = cdot(&beam.state, &vb).re;
            let second_ga: f64 = va.iter().map(|z| z.norm_sqr()).sum();
            let second_gb: f64 = vb.iter().map(|z| z.norm_sqr()).sum();
            row.numeric_margin = Some(second_gb - second_ga);
            row.numeric_term1 = Some(mean_gb * mean_gb - mean_ga * mean_ga);
            row.numeric_term2 =
                Some((second_gb - mean_gb * mean_gb) - (second_ga - mean_ga * mean_ga));
            row.tail_bound = Some(tail);
        }
        rows.push(row);
    }

    let crossover_closed_form = -linear_coefficient / quadratic_coefficient;
    let crossover_bracketed = bracket_root(&rows, quadratic_coefficient, linear_coefficient);
    let slope_term1 = fit_log_slope(rows.iter().filter_map(|r| {
        r.numeric_term1
            .filter(|v| *v > 0.0)
            .map(|v| (r.intensity, v))
    }));
    let slope_term2 = fit_log_slope(rows.iter().filter_map(|r| {
        r.numeric_term2
            .map(f64::abs)
            .filter(|v| *v > 0.0)
            .map(|v| (r.intensity, v))
    }));

    Ok(CrossoverTable {
        rows,
        quadratic_coefficient,
        linear_coefficient,
        crossover_closed_form,
        crossover_bracketed,
        slope_term1,
        slope_term2,
        total_cutoff: m,
    })
}

/// Bisect the closed-form margin between the first adjacent pair of scanned
/// intensities whose margins change sign.
fn bracket_root(rows: &[CrossoverRow], c2: f64, c1: f64) -> Option<f64> {
    let margin = |n: f64| c2 * n * n + c1 * n;
    let bracket = rows.windows(2).find(|w| {
        w[0].intensity > 0.0 && w[0].margin < 0.0 && w[1].margin > 0.0
    })?;
    let (mut lo, mut hi) = (bracket[0].intensity, bracket[1].intensity);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if margin(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-14 * hi.max(1.0) {
            break;
        }
    }
    Some(0.5 * (lo + hi))
}

/// Least-squares slope of `ln(value)` against `ln(intensity)`.
fn fit_log_slope(points: impl Iterator<Item = (f64, f64)>) -> Option<f64> {
    let pts: Vec<(f64, f64)> = points
        .filter(|(n, _)| *n > 0.0)
        .map(|(n, v)| (n.ln(), v.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let count = pts.len() as f64;
    let sx: f64 = pts.iter().map(|p| p.0).sum();
    let sy: f64 = pts.iter().map(|p| p.1).sum();
    let sxx: f64 = pts.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = pts.iter().map(|p| p.0 * p.1).sum();
    let denom = count * sxx - sx * sx;
    if denom.abs() < 1e-30 {
        return None;
    }
    Some((count * sxy - sx * sy) / denom)
}

/// Intensity-weighted polarization readout of a beam.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct StokesVector {
    pub s0: f64,
    pub s1: f64,
    pub s2: f64,
    pub s3: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct StokesReport {
    pub stokes: StokesVector,
    /// `(S1, S2, S3) / S0`; unit length for coherent beams.
    pub bloch: BlochVector,
    pub bloch_norm: f64,
    /// Frobenius distance between `(I + s . sigma) / 2` and `xi xi^H / N`.
    pub reconstruction_residual: f64,
    pub intensity: f64,
    pub tail_bound: f64,
}

/// Measure the four Stokes observables `Gamma(sigma_mu)` on the coherent
/// beam of `xi` and reconstruct the single-photon polarization state.
/// Convention: mode 1 is horizontal, so `sigma_3 = diag(1, -1)` makes `S3`
/// the horizontal/vertical intensity difference.
pub fn stokes_reconstruct(xi: &BeamAmplitude, space: &TwoModeFock) -> Result<StokesReport> {
    let n = xi.intensity();
    if n <= 0.0 {
        return Err(Error::ZeroIntensityBeam);
    }
    let beam = coherent_beam(xi, space)?;

    let mut s = [0.0f64; 4];
    let observables = [
        HermitianOperator::identity(2),
        HermitianOperator::pauli_x(),
        HermitianOperator::pauli_y(),
        HermitianOperator::pauli_z(),
    ];
    for (slot, obs) in s.iter_mut().zip(&observables) {
        let gamma = gamma_blocks(obs, space)?;
        let gv = gamma.matvec(space, &beam.state);
        *slot = cdot(&beam.state, &gv).re;
    }
    let stokes = StokesVector {
        s0: s[0],
        s1: s[1],
        s2: s[2],
        s3: s[3],
    };
    let bloch = BlochVector::new(s[1] / s[0], s[2] / s[0], s[3] / s[0]);

    // (I + s . sigma) / 2 against the rank-one xi xi^H / N.
    let mut residual_sq = 0.0;
    let half = 0.5;
    let rec = [
        [
            Complex64::new(half * (1.0 + bloch.z), 0.0),
            Complex64::new(half * bloch.x, -half * bloch.y),
        ],
        [
            Complex64::new(half * bloch.x, half * bloch.y),
            Complex64::new(half * (1.0 - bloch.z), 0.0),
        ],
    ];
    for (i, row) in rec.iter().enumerate() {
        for (j, got) in row.iter().enumerate() {
            let want = xi.xi[i] * xi.xi[j].conj() / n;
            residual_sq += (got - want).norm_sqr();
        }
    }

    Ok(StokesReport {
        stokes,
        bloch,
        bloch_norm: bloch.norm(),
        reconstruction_residual: residual_sq.sqrt(),
        intensity: n,
        tail_bound: beam.tail_bound,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::commutator_norm;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn random_observable(rng: &mut ChaCha8Rng) -> HermitianOperator {
        let d = c(rng.random::<f64>() * 2.0 - 1.0, 0.0);
        let e = c(rng.random::<f64>() * 2.0 - 1.0, 0.0);
        let z = c(rng.random::<f64>() * 2.0 - 1.0, rng.random::<f64>() * 2.0 - 1.0);
        let m = ndarray::array![[d, z], [z.conj(), e]];
        HermitianOperator::new(m).unwrap()
    }

    #[test]
    fn indexing_round_trips() {
        let space = TwoModeFock::new(7).unwrap();
        assert_eq!(space.dim(), 36);
        for idx in 0..space.dim() {
            let (n1, n2) = space.occupation(idx);
            assert!(n1 + n2 <= 7);
            assert_eq!(space.index(n1, n2), idx);
        }
    }

    #[test]
    fn identity_lifts_to_total_number() {
        let space = TwoModeFock::new(5).unwrap();
        let gamma = second_quantize(&HermitianOperator::identity(2), &space).unwrap();
        let want = space.total_number();
        let diff = gamma.sub(&want).unwrap().frobenius_norm();
        assert!(diff < 1e-12, "diff {diff}");
    }

    #[test]
    fn mode_projector_lifts_to_mode_number() {
        let space = TwoModeFock::new(5).unwrap();
        let gamma = second_quantize(&HermitianOperator::diagonal(&[1.0, 0.0]), &space).unwrap();
        for idx in 0..space.dim() {
            let (n1, _) = space.occupation(idx);
            assert!((gamma.entries()[[idx, idx]].re - n1 as f64).abs() < 1e-12);
            // Off-diagonal entries vanish.
            for jdx in 0..space.dim() {
                if jdx != idx {
                    assert!(gamma.entries()[[idx, jdx]].norm() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn pauli_x_two_photon_spectrum() {
        let space = TwoModeFock::new(4).unwrap();
        let blocks = gamma_blocks(&HermitianOperator::pauli_x(), &space).unwrap();
        let eig = jacobi::eigh(blocks.block(2)).unwrap();
        assert!((eig.values[0] + 2.0).abs() < 1e-10);
        assert!(eig.values[1].abs() < 1e-10);
        assert!((eig.values[2] - 2.0).abs() < 1e-10);
    }

    #[test]
    fn gamma_commutes_with_total_number() {
        let space = TwoModeFock::new(4).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        for _ in 0..5 {
            let a = random_observable(&mut rng);
            let gamma = second_quantize(&a, &space).unwrap();
            let norm = commutator_norm(&gamma, &space.total_number()).unwrap();
            assert!(norm < 1e-10, "commutator {norm}");
        }
    }

    #[test]
    fn one_photon_sector_is_the_observable() {
        let space = TwoModeFock::new(3).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let a = random_observable(&mut rng);
            let blocks = gamma_blocks(&a, &space).unwrap();
            let lifted = jacobi::eigh(blocks.block(1)).unwrap();
            let original = a.eigh().unwrap();
            for (x, y) in lifted.values.iter().zip(&original.values) {
                assert!((x - y).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn second_quantization_is_linear() {
        let space = TwoModeFock::new(4).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let a = random_observable(&mut rng);
        let b = random_observable(&mut rng);
        let lambda = 0.37;
        let direct = second_quantize(&a.add(&b.scale(lambda)).unwrap(), &space).unwrap();
        let composed = second_quantize(&a, &space)
            .unwrap()
            .add(&second_quantize(&b, &space).unwrap().scale(lambda))
            .unwrap();
        let diff = direct.sub(&composed).unwrap().frobenius_norm();
        assert!(diff < 1e-10, "diff {diff}");
    }

    #[test]
    fn lifting_is_not_multiplicative() {
        let space = TwoModeFock::new(3).unwrap();
        let a = HermitianOperator::pauli_z();
        let squared_lift = second_quantize(&a.squared(), &space).unwrap();
        let lift_squared = HermitianOperator::new_unchecked(
            second_quantize(&a, &space)
                .unwrap()
                .entries()
                .dot(second_quantize(&a, &space).unwrap().entries()),
        );
        let diff = squared_lift.sub(&lift_squared).unwrap().frobenius_norm();
        assert!(diff > 1.0, "expected a visible gap, got {diff}");
    }

    #[test]
    fn rejects_wrong_dimension() {
        let space = TwoModeFock::new(3).unwrap();
        let a = HermitianOperator::identity(3);
        assert!(matches!(
            second_quantize(&a, &space),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn vacuum_beam() {
        let space = TwoModeFock::new(6).unwrap();
        let beam = coherent_beam(&BeamAmplitude::new(c(0.0, 0.0), c(0.0, 0.0)), &space).unwrap();
        assert!((beam.state[0].re - 1.0).abs() < 1e-15);
        assert_eq!(beam.intensity, 0.0);
        assert_eq!(beam.tail_bound, 0.0);
    }

    #[test]
    fn single_mode_beam_mean_photon_number() {
        let space = TwoModeFock::new(12).unwrap();
        let beam = coherent_beam(&BeamAmplitude::new(c(1.0, 0.0), c(0.0, 0.0)), &space).unwrap();
        let number = gamma_blocks(&HermitianOperator::identity(2), &space).unwrap();
        let nv = number.matvec(&space, &beam.state);
        let mean = cdot(&beam.state, &nv).re;
        assert!((mean - 1.0).abs() < 1e-8 + beam.tail_bound);
    }

    #[test]
    fn balanced_beam_splits_occupation() {
        let space = TwoModeFock::new(12).unwrap();
        let half = 0.5f64.sqrt();
        let xi = BeamAmplitude::new(c(half, 0.0), c(0.0, half));
        assert!((xi.intensity() - 1.0).abs() < 1e-15);
        let beam = coherent_beam(&xi, &space).unwrap();
        let mode1 = gamma_blocks(&HermitianOperator::diagonal(&[1.0, 0.0]), &space).unwrap();
        let v = mode1.matvec(&space, &beam.state);
        let mean = cdot(&beam.state, &v).re;
        assert!((mean - 0.5).abs() < 1e-9);
    }

    #[test]
    fn beam_rejects_oversized_intensity() {
        let space = TwoModeFock::new(8).unwrap();
        let xi = BeamAmplitude::new(c(2.0, 0.0), c(0.0, 0.0));
        assert!(matches!(
            coherent_beam(&xi, &space),
            Err(Error::CutoffTooSmall { required: 16, .. })
        ));
    }

    #[test]
    fn moment_identities_for_identity_observable() {
        let space = TwoModeFock::new(30).unwrap();
        let xi = BeamAmplitude::new(c(1.0, 0.0), c(0.0, 0.0));
        let report = moment_check(&HermitianOperator::identity(2), &xi, &space).unwrap();
        assert!((report.mean - 1.0).abs() < 1e-8);
        assert!((report.second_moment - 2.0).abs() < 1e-8);
        assert!((report.analytic_mean - 1.0).abs() < 1e-15);
        assert!((report.analytic_second - 2.0).abs() < 1e-15);
    }

    #[test]
    fn moment_identities_for_transverse_observable() {
        // <xi, X xi> = 0 and <xi, X^2 xi> = N for xi along mode 1.
        let space = TwoModeFock::new(30).unwrap();
        let n = 2.5f64;
        let xi = BeamAmplitude::new(c(n.sqrt(), 0.0), c(0.0, 0.0));
        let report = moment_check(&HermitianOperator::pauli_x(), &xi, &space).unwrap();
        assert!(report.analytic_mean.abs() < 1e-15);
        assert!((report.analytic_second - n).abs() < 1e-12);
        assert!((report.mean - report.analytic_mean).abs() < 1e-8 + report.tail_bound);
        assert!((report.second_moment - report.analytic_second).abs() < 1e-8 + report.tail_bound);
    }

    #[test]
    fn decomposition_examples() {
        let space = TwoModeFock::new(6).unwrap();
        // Identity: two-photon sector sees 4 vs 2.
        let report =
            product_decomposition_check(&HermitianOperator::identity(2), &space).unwrap();
        assert!(report.safe_block_residual < 1e-10);
        assert!(report.low_sector_residual < 1e-12);
        assert!((report.two_photon_gap - 2.0).abs() < 1e-10);

        let report = product_decomposition_check(&HermitianOperator::pauli_z(), &space).unwrap();
        assert!(report.safe_block_residual < 1e-10, "{}", report.safe_block_residual);
        assert!(report.low_sector_residual < 1e-12);
        assert!(report.two_photon_gap > 0.1);
    }

    #[test]
    fn decomposition_random_observables() {
        let space = TwoModeFock::new(5).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for _ in 0..10 {
            let a = random_observable(&mut rng);
            let report = product_decomposition_check(&a, &space).unwrap();
            assert!(report.safe_block_residual < 1e-10);
            assert!(report.full_residual < 1e-10);
            assert!(report.low_sector_residual < 1e-12);
        }
    }

    #[test]
    fn decomposition_needs_two_photons() {
        let space = TwoModeFock::new(1).unwrap();
        assert!(matches!(
            product_decomposition_check(&HermitianOperator::identity(2), &space),
            Err(Error::CutoffTooSmall { .. })
        ));
    }

    fn preset_pair() -> (HermitianOperator, HermitianOperator) {
        (
            HermitianOperator::diagonal(&[1.0, 0.0]),
            HermitianOperator::from_real(&[vec![1.5, 0.5], vec![0.5, 0.5]]).unwrap(),
        )
    }

    #[test]
    fn order_is_preserved_but_squares_break() {
        let (a, b) = preset_pair();
        let space = TwoModeFock::new(6).unwrap();
        let report = gamma_order_check(&a, &b, &space, 1e-9).unwrap();
        assert!(report.order_margin >= -1e-9, "order {}", report.order_margin);
        let expected = 1.0 - 1.25f64.sqrt();
        assert!(
            (report.squares_margin_one_photon - expected).abs() < 1e-9,
            "one-photon {}",
            report.squares_margin_one_photon
        );
        // Deeper sectors pile the same negative eigenvalue per photon.
        assert!((report.squares_margin_global - 6.0 * expected).abs() < 1e-8);
    }

    #[test]
    fn order_check_equal_pair_and_commuting_pair() {
        let space = TwoModeFock::new(4).unwrap();
        let (_, b) = preset_pair();
        let report = gamma_order_check(&b, &b, &space, 1e-9).unwrap();
        assert!(report.order_margin.abs() < 1e-12);
        assert!(report.squares_margin_global.abs() < 1e-12);

        let a = HermitianOperator::diagonal(&[1.0, 0.0]);
        let d = HermitianOperator::diagonal(&[2.0, 1.0]);
        let report = gamma_order_check(&a, &d, &space, 1e-9).unwrap();
        assert!(report.squares_margin_global >= -1e-12);
    }

    #[test]
    fn order_check_rejects_broken_premise() {
        let space = TwoModeFock::new(3).unwrap();
        let a = HermitianOperator::diagonal(&[1.0, 0.0]);
        let b = HermitianOperator::diagonal(&[0.5, 0.0]);
        assert!(matches!(
            gamma_order_check(&a, &b, &space, 1e-9),
            Err(Error::Premise(_))
        ));
    }

    #[test]
    fn crossover_matches_calibrated_root() {
        let (a, b) = preset_pair();
        let space = TwoModeFock::new(30).unwrap();
        let u = default_direction(&a, &b).unwrap();
        let intensities = [0.01, 0.1, 1.0, 3.0, 10.0, 100.0];
        let table = crossover_scan(&a, &b, &u, &intensities, &space).unwrap();

        assert!(table.rows[0].margin < 0.0);
        assert!(table.rows.last().unwrap().margin > 0.0);
        // Calibrated against an independent evaluation of the closed form.
        assert!(
            (table.crossover_closed_form - 3.692_484_114_654_954).abs() < 1e-9,
            "N* {}",
            table.crossover_closed_form
        );
        let bracketed = table.crossover_bracketed.unwrap();
        assert!(
            (bracketed - table.crossover_closed_form).abs()
                <= 1e-6 * table.crossover_closed_form
        );

        // Numerical moments exist for the in-cutoff rows and match.
        for row in &table.rows {
            if let Some(numeric) = row.numeric_margin {
                let tail = row.tail_bound.unwrap();
                assert!(
                    (numeric - row.margin).abs() <= 1e-8 + tail,
                    "N = {}: {} vs {}",
                    row.intensity,
                    numeric,
                    row.margin
                );
            }
        }
        assert!(table.rows[0].numeric_margin.is_some());
        assert!(table.rows.last().unwrap().numeric_margin.is_none());

        let s1 = table.slope_term1.unwrap();
        let s2 = table.slope_term2.unwrap();
        assert!((s1 - 2.0).abs() < 0.05, "slope1 {s1}");
        assert!((s2 - 1.0).abs() < 0.05, "slope2 {s2}");
    }

    #[test]
    fn crossover_rejects_bad_direction() {
        let (a, b) = preset_pair();
        let space = TwoModeFock::new(8).unwrap();
        // The top eigenvector of B^2 - A^2 sees the order the right way
        // around, so there is nothing to cross over.
        let eig = b.squared().sub(&a.squared()).unwrap().eigh().unwrap();
        let u = [eig.vectors[[0, 1]], eig.vectors[[1, 1]]];
        assert!(matches!(
            crossover_scan(&a, &b, &u, &[0.1, 1.0], &space),
            Err(Error::Premise(_))
        ));
    }

    #[test]
    fn weak_beam_reproduces_single_photon_second_moment() {
        // Per-photon statistics survive in the weak-beam limit: the second
        // moment per unit intensity tends to <u, A^2 u>.
        let (a, b) = preset_pair();
        let space = TwoModeFock::new(16).unwrap();
        let u = default_direction(&a, &b).unwrap();
        let n: f64 = 1e-3;
        let xi = BeamAmplitude::new(u[0] * n.sqrt(), u[1] * n.sqrt());
        for obs in [&a, &b] {
            let report = moment_check(obs, &xi, &space).unwrap();
            let per_photon = report.second_moment / n;
            let single = quadratic_form(&obs.squared(), &u);
            assert!(
                (per_photon - single).abs() < 2.0 * n + 1e-8,
                "per-photon {per_photon} vs {single}"
            );
        }
    }

    #[test]
    fn stokes_axis_beams() {
        let space = TwoModeFock::new(18).unwrap();
        // Horizontal beam reads +z.
        let xi = BeamAmplitude::new(c(2.0f64.sqrt(), 0.0), c(0.0, 0.0));
        let report = stokes_reconstruct(&xi, &space).unwrap();
        assert!((report.stokes.s0 - 2.0).abs() < 1e-9);
        assert!((report.bloch.z - 1.0).abs() < 1e-9);
        assert!(report.bloch.x.abs() < 1e-9 && report.bloch.y.abs() < 1e-9);

        // Balanced in-phase beam reads +x.
        let xi = BeamAmplitude::new(c(1.0, 0.0), c(1.0, 0.0));
        let report = stokes_reconstruct(&xi, &space).unwrap();
        assert!((report.bloch.x - 1.0).abs() < 1e-9);

        // Circular beam reads +y.
        let xi = BeamAmplitude::new(c(1.0, 0.0), c(0.0, 1.0));
        let report = stokes_reconstruct(&xi, &space).unwrap();
        assert!((report.bloch.y - 1.0).abs() < 1e-9);
    }

    #[test]
    fn stokes_reconstruction_is_exact_for_coherent_beams() {
        let space = TwoModeFock::new(20).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(14);
        for _ in 0..20 {
            let xi = BeamAmplitude::new(
                c(rng.random::<f64>() * 2.0 - 1.0, rng.random::<f64>() * 2.0 - 1.0),
                c(rng.random::<f64>() * 2.0 - 1.0, rng.random::<f64>() * 2.0 - 1.0),
            );
            if xi.intensity() < 1e-3 {
                continue;
            }
            let report = stokes_reconstruct(&xi, &space).unwrap();
            assert!((report.bloch_norm - 1.0).abs() < 1e-9, "norm {}", report.bloch_norm);
            assert!(
                report.reconstruction_residual < 1e-9,
                "residual {}",
                report.reconstruction_residual
            );
            assert!((report.stokes.s0 - xi.intensity()).abs() < 1e-9);
        }
    }

    #[test]
    fn stokes_rejects_dark_beam() {
        let space = TwoModeFock::new(4).unwrap();
        let xi = BeamAmplitude::new(c(0.0, 0.0), c(0.0, 0.0));
        assert!(matches!(
            stokes_reconstruct(&xi, &space),
            Err(Error::ZeroIntensityBeam)
        ));
    }
}
