//! Dense complex square matrices, diagonal phase matrices and line sums.
//!
//! Matrices are stored row-major in a flat `Vec<Complex64>`. The dimensions
//! of interest are small (typically n <= 8, occasionally a few dozen), so all
//! operations are plain loops over contiguous memory and no linear-algebra
//! backend is pulled in.
//!
//! Invariants maintained here:
//! - every entry of a [`UnitaryMatrix`] is finite (NaN and infinity are
//!   rejected at construction);
//! - [`DiagonalPhase`] angles are kept wrapped to the interval (-pi, pi];
//! - [`UnitaryMatrix::checked`] additionally bounds the unitarity residual
//!   by [`CHECKED_UNITARITY_TOL`].

use num_complex::Complex64;

use crate::error::Error;

/// Unitarity residual accepted by [`UnitaryMatrix::checked`].
pub const CHECKED_UNITARITY_TOL: f64 = 1e-10;

/// Phase extraction: `y / |y|` for nonzero `y`, and exactly `1` at `y = 0`.
///
/// The convention at zero means zero line sums are left untouched by a
/// scaling step. Only an exact floating-point zero triggers it; there is no
/// tolerance band.
pub fn phi(y: Complex64) -> Complex64 {
    let r = y.norm();
    if r > 0.0 {
        y / r
    } else {
        Complex64::new(1.0, 0.0)
    }
}

/// Wrap an angle to the half-open interval (-pi, pi].
pub fn wrap_angle(a: f64) -> f64 {
    let r = a.rem_euclid(std::f64::consts::TAU);
    if r > std::f64::consts::PI {
        r - std::f64::consts::TAU
    } else {
        r
    }
}

/// Dense square complex matrix, row-major.
///
/// Despite the name, [`UnitaryMatrix::from_entries`] does not verify
/// unitarity: intermediates of the scaling iteration are unitary by
/// construction and algorithms validate their own inputs where it matters.
/// Use [`UnitaryMatrix::checked`] for matrices from untrusted sources.
#[derive(Clone, Debug, PartialEq)]
pub struct UnitaryMatrix {
    n: usize,
    entries: Vec<Complex64>,
}

impl UnitaryMatrix {
    /// Build from a row-major entry list of length `n * n`.
    pub fn from_entries(n: usize, entries: Vec<Complex64>) -> Result<Self, Error> {
        if n == 0 {
            return Err(Error::EmptyMatrix);
        }
        let expected = n * n;
        if entries.len() != expected {
            return Err(Error::EntryCount {
                n,
                expected,
                got: entries.len(),
            });
        }
        for (idx, z) in entries.iter().enumerate() {
            if !z.re.is_finite() || !z.im.is_finite() {
                return Err(Error::NonFiniteEntry {
                    row: idx / n,
                    col: idx % n,
                    value: *z,
                });
            }
        }
        Ok(Self { n, entries })
    }

    /// Like [`UnitaryMatrix::from_entries`], but additionally requires the
    /// matrix to be unitary within [`CHECKED_UNITARITY_TOL`].
    pub fn checked(n: usize, entries: Vec<Complex64>) -> Result<Self, Error> {
        let m = Self::from_entries(n, entries)?;
        let residual = unitarity_residual(&m);
        if residual > CHECKED_UNITARITY_TOL {
            return Err(Error::NonUnitaryInput {
                residual,
                tol: CHECKED_UNITARITY_TOL,
            });
        }
        Ok(m)
    }

    pub fn identity(n: usize) -> Self {
        assert!(n >= 1, "dimension must be at least 1");
        let mut entries = vec![Complex64::new(0.0, 0.0); n * n];
        for j in 0..n {
            entries[j * n + j] = Complex64::new(1.0, 0.0);
        }
        Self { n, entries }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        debug_assert!(row < self.n && col < self.n);
        self.entries[row * self.n + col]
    }

    /// Row-major entry slice.
    pub fn entries(&self) -> &[Complex64] {
        &self.entries
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        let n = self.n;
        let mut entries = Vec::with_capacity(n * n);
        for j in 0..n {
            for k in 0..n {
                entries.push(self.get(k, j).conj());
            }
        }
        Self { n, entries }
    }

    pub fn transpose(&self) -> Self {
        let n = self.n;
        let mut entries = Vec::with_capacity(n * n);
        for j in 0..n {
            for k in 0..n {
                entries.push(self.get(k, j));
            }
        }
        Self { n, entries }
    }

    /// Multiply every entry by the phase `e^{i alpha}`.
    pub fn scaled_by_phase(&self, alpha: f64) -> Self {
        let f = Complex64::from_polar(1.0, alpha);
        Self {
            n: self.n,
            entries: self.entries.iter().map(|z| z * f).collect(),
        }
    }

    /// Matrix product `self * rhs`.
    pub fn mul(&self, rhs: &Self) -> Result<Self, Error> {
        if self.n != rhs.n {
            return Err(Error::DimensionMismatch {
                left: self.n,
                right: rhs.n,
            });
        }
        let n = self.n;
        let mut entries = vec![Complex64::new(0.0, 0.0); n * n];
        for j in 0..n {
            for l in 0..n {
                let a = self.get(j, l);
                if a == Complex64::new(0.0, 0.0) {
                    continue;
                }
                for k in 0..n {
                    entries[j * n + k] += a * rhs.get(l, k);
                }
            }
        }
        Ok(Self { n, entries })
    }
}

/// Diagonal unitary `diag(e^{i phase_1}, ..., e^{i phase_n})`, stored as the
/// phase angles. Angles are wrapped to (-pi, pi] on every construction and
/// composition, so composing many of them cannot drift off to huge arguments.
#[derive(Clone, Debug, PartialEq)]
pub struct DiagonalPhase {
    phases: Vec<f64>,
}

impl DiagonalPhase {
    pub fn new(phases: Vec<f64>) -> Result<Self, Error> {
        if phases.is_empty() {
            return Err(Error::EmptyMatrix);
        }
        for (index, &value) in phases.iter().enumerate() {
            if !value.is_finite() {
                return Err(Error::NonFiniteAngle { index, value });
            }
        }
        Ok(Self {
            phases: phases.into_iter().map(wrap_angle).collect(),
        })
    }

    /// The identity, i.e. all phases zero.
    pub fn zero(n: usize) -> Self {
        assert!(n >= 1, "dimension must be at least 1");
        Self {
            phases: vec![0.0; n],
        }
    }

    /// All phases zero except `delta` at `index`.
    pub fn single(n: usize, index: usize, delta: f64) -> Self {
        assert!(index < n, "index out of range");
        let mut phases = vec![0.0; n];
        phases[index] = wrap_angle(delta);
        Self { phases }
    }

    pub fn n(&self) -> usize {
        self.phases.len()
    }

    pub fn phases(&self) -> &[f64] {
        &self.phases
    }

    pub fn phase(&self, index: usize) -> f64 {
        self.phases[index]
    }

    /// The diagonal entry `e^{i phase_index}`.
    pub fn factor(&self, index: usize) -> Complex64 {
        Complex64::from_polar(1.0, self.phases[index])
    }

    /// Composition `self * other` (phases add, then wrap).
    pub fn compose(&self, other: &Self) -> Self {
        assert_eq!(self.n(), other.n(), "dimension mismatch");
        Self {
            phases: self
                .phases
                .iter()
                .zip(&other.phases)
                .map(|(a, b)| wrap_angle(a + b))
                .collect(),
        }
    }

    pub fn inverse(&self) -> Self {
        Self {
            phases: self.phases.iter().map(|&a| wrap_angle(-a)).collect(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.phases.iter().all(|&a| a == 0.0)
    }

    /// Expand into a dense matrix.
    pub fn matrix(&self) -> UnitaryMatrix {
        let n = self.n();
        let mut entries = vec![Complex64::new(0.0, 0.0); n * n];
        for j in 0..n {
            entries[j * n + j] = self.factor(j);
        }
        UnitaryMatrix { n, entries }
    }
}

/// Row sums, column sums and the matrix sum of a square matrix.
#[derive(Clone, Debug)]
pub struct LineSums {
    pub rows: Vec<Complex64>,
    pub cols: Vec<Complex64>,
    /// Sum over all entries; equals the sum of the row sums and likewise of
    /// the column sums up to rounding.
    pub matrix_sum: Complex64,
}

pub fn line_sums(a: &UnitaryMatrix) -> LineSums {
    let n = a.n();
    let mut rows = vec![Complex64::new(0.0, 0.0); n];
    let mut cols = vec![Complex64::new(0.0, 0.0); n];
    for j in 0..n {
        for k in 0..n {
            let z = a.get(j, k);
            rows[j] += z;
            cols[k] += z;
        }
    }
    let matrix_sum = rows.iter().sum();
    LineSums {
        rows,
        cols,
        matrix_sum,
    }
}

/// Potential `Psi(A) = n^2 - |sum of all entries|^2`.
///
/// For unitary `A` the matrix sum has modulus at most `n`, so `Psi >= 0`,
/// with equality exactly on the matrices whose entries sum to a modulus-`n`
/// value. The scaling iteration never increases `Psi`.
pub fn potential(a: &UnitaryMatrix) -> f64 {
    let n = a.n() as f64;
    let m = line_sums(a).matrix_sum;
    n * n - m.norm_sqr()
}

/// Max-norm deviation of `A* A` from the identity.
pub fn unitarity_residual(a: &UnitaryMatrix) -> f64 {
    let n = a.n();
    let mut worst = 0.0f64;
    for j in 0..n {
        for k in 0..n {
            let mut dot = Complex64::new(0.0, 0.0);
            for l in 0..n {
                dot += a.get(l, j).conj() * a.get(l, k);
            }
            if j == k {
                dot -= 1.0;
            }
            worst = worst.max(dot.norm());
        }
    }
    worst
}

/// `L * A * R` for diagonal phase matrices `L`, `R`.
pub fn apply_diagonals(
    left: &DiagonalPhase,
    a: &UnitaryMatrix,
    right: &DiagonalPhase,
) -> Result<UnitaryMatrix, Error> {
    if left.n() != a.n() {
        return Err(Error::DimensionMismatch {
            left: left.n(),
            right: a.n(),
        });
    }
    if a.n() != right.n() {
        return Err(Error::DimensionMismatch {
            left: a.n(),
            right: right.n(),
        });
    }
    let n = a.n();
    let mut entries = Vec::with_capacity(n * n);
    for j in 0..n {
        let lf = left.factor(j);
        for k in 0..n {
            entries.push(lf * a.get(j, k) * right.factor(k));
        }
    }
    Ok(UnitaryMatrix { n, entries })
}

/// Product of a sequence of matrices, left to right.
pub fn matrix_product(factors: &[UnitaryMatrix]) -> Result<UnitaryMatrix, Error> {
    let first = factors.first().ok_or(Error::EmptyMatrix)?;
    let mut acc = first.clone();
    for m in &factors[1..] {
        acc = acc.mul(m)?;
    }
    Ok(acc)
}

/// Largest entrywise distance between two matrices of equal dimension.
pub fn max_entry_distance(a: &UnitaryMatrix, b: &UnitaryMatrix) -> f64 {
    assert_eq!(a.n(), b.n(), "dimension mismatch");
    a.entries
        .iter()
        .zip(&b.entries)
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}
