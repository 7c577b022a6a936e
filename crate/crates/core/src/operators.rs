//! Dense Hermitian operators, density states, spectra, and the ordering and
//! pairing primitives built on them.
//!
//! All matrices are dense `Array2<Complex64>`. Constructors validate
//! (Hermiticity, trace, positivity) and then symmetrize, so downstream code
//! can rely on exact `A = A^H` and real diagonals.

use ndarray::{Array1, Array2};
use num_complex::Complex64;
use serde::ser::SerializeStruct;
use serde::{Deserialize, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::jacobi::{self, Eigh};
use crate::tol;

pub(crate) fn adjoint(m: &Array2<Complex64>) -> Array2<Complex64> {
    let (rows, cols) = m.dim();
    let mut out = Array2::zeros((cols, rows));
    for i in 0..rows {
        for j in 0..cols {
            out[[j, i]] = m[[i, j]].conj();
        }
    }
    out
}

/// Inner product conjugating the first argument.
pub(crate) fn cdot(a: &Array1<Complex64>, b: &Array1<Complex64>) -> Complex64 {
    a.iter().zip(b.iter()).map(|(x, y)| x.conj() * y).sum()
}

fn max_asymmetry(m: &Array2<Complex64>) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in i..n {
            let d = (m[[i, j]] - m[[j, i]].conj()).norm();
            if d > worst {
                worst = d;
            }
        }
    }
    worst
}

fn symmetrize(m: &mut Array2<Complex64>) {
    let n = m.nrows();
    for i in 0..n {
        m[[i, i]] = Complex64::new(m[[i, i]].re, 0.0);
        for j in i + 1..n {
            let avg = 0.5 * (m[[i, j]] + m[[j, i]].conj());
            m[[i, j]] = avg;
            m[[j, i]] = avg.conj();
        }
    }
}

/// A self-adjoint operator on a finite-dimensional Hilbert space.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianOperator {
    entries: Array2<Complex64>,
}

impl HermitianOperator {
    /// Accept `entries` if square and Hermitian within [`tol::HERMITICITY_TOL`];
    /// the stored matrix is the symmetrized average.
    pub fn new(entries: Array2<Complex64>) -> Result<Self> {
        let (rows, cols) = entries.dim();
        if rows != cols {
            return Err(Error::NotSquare { rows, cols });
        }
        let dev = max_asymmetry(&entries);
        if dev > tol::HERMITICITY_TOL {
            return Err(Error::NotHermitian { max_deviation: dev });
        }
        let mut entries = entries;
        symmetrize(&mut entries);
        Ok(Self { entries })
    }

    /// Wrap a matrix that is Hermitian by construction.
    pub(crate) fn new_unchecked(mut entries: Array2<Complex64>) -> Self {
        symmetrize(&mut entries);
        Self { entries }
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            entries: Array2::eye(dim),
        }
    }

    pub fn zero(dim: usize) -> Self {
        Self {
            entries: Array2::zeros((dim, dim)),
        }
    }

    pub fn diagonal(values: &[f64]) -> Self {
        let mut entries = Array2::zeros((values.len(), values.len()));
        for (i, &v) in values.iter().enumerate() {
            entries[[i, i]] = Complex64::new(v, 0.0);
        }
        Self { entries }
    }

    /// Build from real entries; fails if the matrix is not symmetric.
    pub fn from_real(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        let mut entries = Array2::zeros((n, n));
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(Error::NotSquare {
                    rows: n,
                    cols: row.len(),
                });
            }
            for (j, &v) in row.iter().enumerate() {
                entries[[i, j]] = Complex64::new(v, 0.0);
            }
        }
        Self::new(entries)
    }

    pub fn pauli_x() -> Self {
        Self::from_real(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap()
    }

    pub fn pauli_y() -> Self {
        let mut entries = Array2::zeros((2, 2));
        entries[[0, 1]] = Complex64::new(0.0, -1.0);
        entries[[1, 0]] = Complex64::new(0.0, 1.0);
        Self { entries }
    }

    pub fn pauli_z() -> Self {
        Self::diagonal(&[1.0, -1.0])
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> &Array2<Complex64> {
        &self.entries
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim()).map(|i| self.entries[[i, i]].re).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.entries.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_dim(other)?;
        Ok(Self {
            entries: &self.entries + &other.entries,
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_dim(other)?;
        Ok(Self {
            entries: &self.entries - &other.entries,
        })
    }

    pub fn scale(&self, factor: f64) -> Self {
        Self {
            entries: self.entries.mapv(|z| z * factor),
        }
    }

    /// `A^2`, symmetrized to scrub rounding noise.
    pub fn squared(&self) -> Self {
        Self::new_unchecked(self.entries.dot(&self.entries))
    }

    pub fn apply(&self, v: &Array1<Complex64>) -> Array1<Complex64> {
        self.entries.dot(v)
    }

    fn check_dim(&self, other: &Self) -> Result<()> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                left: self.dim(),
                right: other.dim(),
            });
        }
        Ok(())
    }

    pub fn eigh(&self) -> Result<Eigh> {
        jacobi::eigh(&self.entries)
    }

    pub fn min_eigenvalue(&self) -> Result<f64> {
        let e = self.eigh()?;
        Ok(e.values.first().copied().unwrap_or(0.0))
    }

    /// Spectral norm (largest |eigenvalue|).
    pub fn spectral_norm(&self) -> Result<f64> {
        let e = self.eigh()?;
        Ok(e.values.iter().fold(0.0f64, |m, &v| m.max(v.abs())))
    }

    /// Eigenvalues merged into clusters of near-degenerate values.
    pub fn spectrum(&self) -> Result<Spectrum> {
        let e = self.eigh()?;
        let scale = self.spectral_scale(&e.values);
        Ok(Spectrum::from_sorted(
            &e.values,
            tol::SPECTRUM_MERGE_FACTOR * scale,
        ))
    }

    fn spectral_scale(&self, values: &[f64]) -> f64 {
        values.iter().fold(0.0f64, |m, &v| m.max(v.abs())).max(1.0)
    }
}

impl Serialize for HermitianOperator {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serialize_matrix(&self.entries, serializer)
    }
}

/// A density matrix: Hermitian, unit trace, positive semidefinite.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityState {
    entries: Array2<Complex64>,
}

impl DensityState {
    pub fn new(entries: Array2<Complex64>) -> Result<Self> {
        let op = HermitianOperator::new(entries)?;
        let trace = op.trace();
        if (trace - 1.0).abs() > tol::TRACE_TOL {
            return Err(Error::InvalidTrace { trace });
        }
        let min = op.min_eigenvalue()?;
        if min < -tol::PSD_TOL {
            return Err(Error::NotPositiveSemidefinite {
                min_eigenvalue: min,
            });
        }
        Ok(Self {
            entries: op.entries,
        })
    }

    /// Wrap a matrix that is a density matrix by construction (e.g. a convex
    /// mixture of projectors); skips the eigenvalue check.
    pub(crate) fn new_unchecked(entries: Array2<Complex64>) -> Self {
        let op = HermitianOperator::new_unchecked(entries);
        Self {
            entries: op.entries,
        }
    }

    /// Projector onto `vector`, normalized first. Errors on the zero vector.
    pub fn pure(vector: &Array1<Complex64>) -> Result<Self> {
        let norm_sq: f64 = vector.iter().map(|z| z.norm_sqr()).sum();
        if norm_sq <= 0.0 {
            return Err(Error::NotUnitVector { norm: 0.0 });
        }
        let n = vector.len();
        let mut entries = Array2::zeros((n, n));
        for i in 0..n {
            for j in 0..n {
                entries[[i, j]] = vector[i] * vector[j].conj() / norm_sq;
            }
        }
        Ok(Self::new_unchecked(entries))
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        Self {
            entries: Array2::<Complex64>::eye(dim).mapv(|z| z / dim as f64),
        }
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> &Array2<Complex64> {
        &self.entries
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim()).map(|i| self.entries[[i, i]].re).sum()
    }

    pub fn eigh(&self) -> Result<Eigh> {
        jacobi::eigh(&self.entries)
    }

    /// Purity `tr(rho^2)`; 1 for pure states.
    pub fn purity(&self) -> f64 {
        self.entries.iter().map(|z| z.norm_sqr()).sum()
    }
}

impl Serialize for DensityState {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serialize_matrix(&self.entries, serializer)
    }
}

/// `tr(rho A)`; real because both factors are Hermitian.
pub fn expectation(state: &DensityState, observable: &HermitianOperator) -> Result<f64> {
    if state.dim() != observable.dim() {
        return Err(Error::DimensionMismatch {
            left: state.dim(),
            right: observable.dim(),
        });
    }
    let n = state.dim();
    let mut sum = Complex64::new(0.0, 0.0);
    for i in 0..n {
        for j in 0..n {
            sum += state.entries[[i, j]] * observable.entries()[[j, i]];
        }
    }
    Ok(sum.re)
}

/// Kronecker product `a (x) b`.
pub fn tensor(a: &HermitianOperator, b: &HermitianOperator) -> HermitianOperator {
    HermitianOperator {
        entries: kron(a.entries(), b.entries()),
    }
}

/// Kronecker product of two density matrices; a valid state by construction.
pub fn tensor_states(a: &DensityState, b: &DensityState) -> DensityState {
    DensityState::new_unchecked(kron(a.entries(), b.entries()))
}

fn kron(a: &Array2<Complex64>, b: &Array2<Complex64>) -> Array2<Complex64> {
    let (ar, ac) = a.dim();
    let (br, bc) = b.dim();
    let mut out = Array2::zeros((ar * br, ac * bc));
    for i in 0..ar {
        for j in 0..ac {
            let f = a[[i, j]];
            for k in 0..br {
                for l in 0..bc {
                    out[[i * br + k, j * bc + l]] = f * b[[k, l]];
                }
            }
        }
    }
    out
}

/// Frobenius norm of `[A, B] = AB - BA`; zero iff the pair commutes.
pub fn commutator_norm(a: &HermitianOperator, b: &HermitianOperator) -> Result<f64> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            left: a.dim(),
            right: b.dim(),
        });
    }
    let ab = a.entries().dot(b.entries());
    let ba = b.entries().dot(a.entries());
    Ok((&ab - &ba).iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt())
}

/// Result of an operator-order comparison.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct OrderCheck {
    /// Smallest eigenvalue of the difference; negative when the order fails.
    pub margin: f64,
    pub holds: bool,
}

/// Does `B - A >= 0` hold up to `tolerance`? The margin is the minimal
/// eigenvalue of `B - A`, so `holds` means `margin >= -tolerance`.
pub fn loewner_geq(b: &HermitianOperator, a: &HermitianOperator, tolerance: f64) -> Result<OrderCheck> {
    let diff = b.sub(a)?;
    let margin = diff.min_eigenvalue()?;
    Ok(OrderCheck {
        margin,
        holds: margin >= -tolerance,
    })
}

/// A spectrum with near-degenerate eigenvalues merged.
#[derive(Debug, Clone, Serialize)]
pub struct Spectrum {
    values: Vec<f64>,
    multiplicities: Vec<usize>,
    merge_radius: f64,
}

impl Spectrum {
    /// Cluster an ascending eigenvalue list: values within `merge_radius` of
    /// the running cluster mean collapse into one entry.
    pub fn from_sorted(sorted: &[f64], merge_radius: f64) -> Self {
        let mut values: Vec<f64> = Vec::new();
        let mut multiplicities: Vec<usize> = Vec::new();
        for &v in sorted {
            match (values.last_mut(), multiplicities.last_mut()) {
                (Some(mean), Some(count)) if (v - *mean).abs() <= merge_radius => {
                    *count += 1;
                    *mean += (v - *mean) / *count as f64;
                }
                _ => {
                    values.push(v);
                    multiplicities.push(1);
                }
            }
        }
        Self {
            values,
            multiplicities,
            merge_radius,
        }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn multiplicities(&self) -> &[usize] {
        &self.multiplicities
    }

    pub fn merge_radius(&self) -> f64 {
        self.merge_radius
    }

    /// Total dimension accounted for.
    pub fn degree(&self) -> usize {
        self.multiplicities.iter().sum()
    }

    pub fn min(&self) -> Option<f64> {
        self.values.first().copied()
    }

    pub fn max(&self) -> Option<f64> {
        self.values.last().copied()
    }

    /// Distance from `x` to the nearest spectral value.
    pub fn distance_to(&self, x: f64) -> f64 {
        self.values
            .iter()
            .map(|&v| (x - v).abs())
            .fold(f64::INFINITY, f64::min)
    }

    /// All pairwise sums with another spectrum, clustered with the larger of
    /// the two merge radii.
    pub fn sumset(&self, other: &Spectrum) -> Spectrum {
        let mut sums: Vec<f64> = Vec::with_capacity(self.values.len() * other.values.len());
        for &x in &self.values {
            for &y in &other.values {
                sums.push(x + y);
            }
        }
        sums.sort_by(f64::total_cmp);
        Spectrum::from_sorted(&sums, self.merge_radius.max(other.merge_radius))
    }
}

/// A real three-vector used for spin directions and state polarizations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlochVector {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl BlochVector {
    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub fn norm(&self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn dot(&self, other: &Self) -> f64 {
        self.x * other.x + self.y * other.y + self.z * other.z
    }

    pub fn add(&self, other: &Self) -> Self {
        Self::new(self.x + other.x, self.y + other.y, self.z + other.z)
    }

    pub fn scale(&self, f: f64) -> Self {
        Self::new(self.x * f, self.y * f, self.z * f)
    }

    pub fn is_unit(&self, tolerance: f64) -> bool {
        (self.norm() - 1.0).abs() <= tolerance
    }

    /// Rescale to unit length; errors on the zero vector.
    pub fn normalized(&self) -> Result<Self> {
        let n = self.norm();
        if n == 0.0 {
            return Err(Error::NotUnitVector { norm: 0.0 });
        }
        Ok(self.scale(1.0 / n))
    }

    /// Require unit length within [`tol::UNIT_TOL`].
    pub fn require_unit(&self) -> Result<Self> {
        if !self.is_unit(tol::UNIT_TOL) {
            return Err(Error::NotUnitVector { norm: self.norm() });
        }
        Ok(*self)
    }
}

/// The qubit observable `a0 I + a . sigma`.
pub fn pauli_observable(a0: f64, a: &BlochVector) -> HermitianOperator {
    let mut entries = Array2::zeros((2, 2));
    entries[[0, 0]] = Complex64::new(a0 + a.z, 0.0);
    entries[[0, 1]] = Complex64::new(a.x, -a.y);
    entries[[1, 0]] = Complex64::new(a.x, a.y);
    entries[[1, 1]] = Complex64::new(a0 - a.z, 0.0);
    HermitianOperator { entries }
}

/// The qubit state `(I + k . sigma) / 2`; requires `|k| <= 1`.
pub fn bloch_state(k: &BlochVector) -> Result<DensityState> {
    let norm = k.norm();
    if norm > 1.0 + tol::UNIT_TOL {
        return Err(Error::BlochNormExceeded { norm });
    }
    let op = pauli_observable(1.0, k).scale(0.5);
    Ok(DensityState::new_unchecked(op.entries))
}

// ---------------------------------------------------------------------------
// Matrix JSON interchange: {"dim": n, "re": [[..]], "im": [[..]]}
// ---------------------------------------------------------------------------

/// Plain-data form of a complex matrix for JSON interchange.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MatrixJson {
    pub dim: usize,
    pub re: Vec<Vec<f64>>,
    pub im: Vec<Vec<f64>>,
}

impl MatrixJson {
    pub fn from_entries(entries: &Array2<Complex64>) -> Self {
        let n = entries.nrows();
        let re = (0..n)
            .map(|i| (0..n).map(|j| entries[[i, j]].re).collect())
            .collect();
        let im = (0..n)
            .map(|i| (0..n).map(|j| entries[[i, j]].im).collect())
            .collect();
        Self { dim: n, re, im }
    }

    pub fn to_entries(&self) -> Array2<Complex64> {
        let n = self.dim;
        let mut out = Array2::zeros((n, n));
        for i in 0..n {
            for j in 0..n {
                out[[i, j]] = Complex64::new(self.re[i][j], self.im[i][j]);
            }
        }
        out
    }
}

fn serialize_matrix<S: Serializer>(
    entries: &Array2<Complex64>,
    serializer: S,
) -> std::result::Result<S::Ok, S::Error> {
    let m = MatrixJson::from_entries(entries);
    let mut s = serializer.serialize_struct("MatrixJson", 3)?;
    s.serialize_field("dim", &m.dim)?;
    s.serialize_field("re", &m.re)?;
    s.serialize_field("im", &m.im)?;
    s.end()
}

fn json_err(path: impl Into<String>, message: impl Into<String>) -> Error {
    Error::MatrixJson {
        path: path.into(),
        message: message.into(),
    }
}

/// Parse `{"dim": n, "re": [[..]], "im": [[..]]}` with errors that name the
/// offending field path (`re[2][0]`, `dim`, ...).
pub fn matrix_from_json_str(text: &str) -> Result<Array2<Complex64>> {
    let value: serde_json::Value =
        serde_json::from_str(text).map_err(|e| json_err("(root)", e.to_string()))?;
    let obj = value
        .as_object()
        .ok_or_else(|| json_err("(root)", "expected a JSON object"))?;

    for key in obj.keys() {
        if key != "dim" && key != "re" && key != "im" {
            return Err(json_err(key.clone(), "unknown field"));
        }
    }

    let dim_value = obj
        .get("dim")
        .ok_or_else(|| json_err("dim", "missing field"))?;
    let dim = dim_value
        .as_u64()
        .ok_or_else(|| json_err("dim", "expected a non-negative integer"))? as usize;
    if dim == 0 {
        return Err(json_err("dim", "dimension must be at least 1"));
    }

    let re = read_grid(obj, "re", dim)?;
    let im = read_grid(obj, "im", dim)?;

    let mut out = Array2::zeros((dim, dim));
    for i in 0..dim {
        for j in 0..dim {
            out[[i, j]] = Complex64::new(re[i][j], im[i][j]);
        }
    }
    Ok(out)
}

fn read_grid(
    obj: &serde_json::Map<String, serde_json::Value>,
    field: &str,
    dim: usize,
) -> Result<Vec<Vec<f64>>> {
    let rows = obj
        .get(field)
        .ok_or_else(|| json_err(field, "missing field"))?
        .as_array()
        .ok_or_else(|| json_err(field, "expected an array of rows"))?;
    if rows.len() != dim {
        return Err(json_err(
            field,
            format!("expected {dim} rows, found {}", rows.len()),
        ));
    }
    let mut out = Vec::with_capacity(dim);
    for (i, row_value) in rows.iter().enumerate() {
        let row = row_value
            .as_array()
            .ok_or_else(|| json_err(format!("{field}[{i}]"), "expected an array of numbers"))?;
        if row.len() != dim {
            return Err(json_err(
                format!("{field}[{i}]"),
                format!("expected {dim} entries, found {}", row.len()),
            ));
        }
        let mut nums = Vec::with_capacity(dim);
        for (j, entry) in row.iter().enumerate() {
            let x = entry.as_f64().ok_or_else(|| {
                json_err(format!("{field}[{i}][{j}]"), "expected a finite number")
            })?;
            if !x.is_finite() {
                return Err(json_err(format!("{field}[{i}][{j}]"), "number is not finite"));
            }
            nums.push(x);
        }
        out.push(nums);
    }
    Ok(out)
}

/// Parse and validate a Hermitian operator from matrix JSON.
pub fn operator_from_json_str(text: &str) -> Result<HermitianOperator> {
    HermitianOperator::new(matrix_from_json_str(text)?)
}

/// Parse and validate a density state from matrix JSON.
pub fn state_from_json_str(text: &str) -> Result<DensityState> {
    DensityState::new(matrix_from_json_str(text)?)
}
