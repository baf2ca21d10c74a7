//! Dense complex operators on finite bases.
//!
//! Every operator symbol of the models (Hamiltonians, projectors, rotation
//! generators, commutator solutions) is an [`OperatorMatrix`]: a dense complex
//! matrix tagged with the basis it acts on. Algebra between operators on
//! different bases is rejected.
//!
//! Products and norms skip rows and columns that are identically zero. The
//! commutator solutions of the Dicke model live on a handful of basis states,
//! so this turns most of the dense algebra into small dense algebra without
//! changing any result.

use std::fmt;
use std::sync::Arc;

use faer::{Mat, Side};

use crate::error::{Error, Result};

pub use faer::c64;

/// Relative tolerance of the Hermitian flag.
pub const HERMITIAN_TOL: f64 = 1e-12;

/// Identifier of the basis an operator or state acts on.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BasisTag(Arc<str>);

impl BasisTag {
    pub fn new(name: impl AsRef<str>) -> Self {
        Self(Arc::from(name.as_ref()))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Debug for BasisTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BasisTag({})", self.0)
    }
}

impl fmt::Display for BasisTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

fn check_same(a: &BasisTag, b: &BasisTag) -> Result<()> {
    if a == b {
        Ok(())
    } else {
        Err(Error::BasisMismatch {
            left: a.to_string(),
            right: b.to_string(),
        })
    }
}

/// Dense complex matrix acting on a tagged basis.
#[derive(Clone)]
pub struct OperatorMatrix {
    entries: Mat<c64>,
    hermitian: bool,
    basis: BasisTag,
}

impl fmt::Debug for OperatorMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("OperatorMatrix")
            .field("dim", &self.dim())
            .field("hermitian", &self.hermitian)
            .field("basis", &self.basis)
            .finish()
    }
}

impl OperatorMatrix {
    /// Wraps a square matrix; the Hermitian flag is computed from the entries.
    pub fn from_mat(entries: Mat<c64>, basis: BasisTag) -> Result<Self> {
        if entries.nrows() != entries.ncols() {
            return Err(Error::DimensionMismatch {
                expected: entries.nrows(),
                actual: entries.ncols(),
            });
        }
        let hermitian = is_hermitian(&entries);
        Ok(Self {
            entries,
            hermitian,
            basis,
        })
    }

    pub fn from_fn(dim: usize, basis: BasisTag, f: impl FnMut(usize, usize) -> c64) -> Self {
        let entries = Mat::from_fn(dim, dim, f);
        let hermitian = is_hermitian(&entries);
        Self {
            entries,
            hermitian,
            basis,
        }
    }

    pub fn zeros(dim: usize, basis: BasisTag) -> Self {
        Self {
            entries: Mat::zeros(dim, dim),
            hermitian: true,
            basis,
        }
    }

    pub fn identity(dim: usize, basis: BasisTag) -> Self {
        Self {
            entries: Mat::identity(dim, dim),
            hermitian: true,
            basis,
        }
    }

    pub fn from_diagonal(values: &[f64], basis: BasisTag) -> Self {
        let n = values.len();
        let mut entries = Mat::zeros(n, n);
        for (i, &v) in values.iter().enumerate() {
            entries[(i, i)] = c64::new(v, 0.0);
        }
        Self {
            entries,
            hermitian: true,
            basis,
        }
    }

    /// Rank-one projector `|v><v|/<v|v>`.
    pub fn projector(v: &StateVector) -> Self {
        let n = v.dim();
        let norm2 = v.norm().powi(2);
        let entries = Mat::from_fn(n, n, |i, j| v.entries[i] * v.entries[j].conj() / norm2);
        Self {
            entries,
            hermitian: true,
            basis: v.basis.clone(),
        }
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn basis(&self) -> &BasisTag {
        &self.basis
    }

    pub fn is_hermitian(&self) -> bool {
        self.hermitian
    }

    pub fn mat(&self) -> &Mat<c64> {
        &self.entries
    }

    pub fn get(&self, i: usize, j: usize) -> c64 {
        self.entries[(i, j)]
    }

    pub fn retagged(mut self, basis: BasisTag) -> Self {
        self.basis = basis;
        self
    }

    /// `max_ij |A_ij - conj(A_ji)|`.
    pub fn hermitian_asymmetry(&self) -> f64 {
        asymmetry(&self.entries)
    }

    pub fn max_abs(&self) -> f64 {
        max_abs(&self.entries)
    }

    pub fn frobenius_norm(&self) -> f64 {
        let mut acc = 0.0;
        for j in 0..self.dim() {
            for i in 0..self.dim() {
                acc += self.entries[(i, j)].norm_sqr();
            }
        }
        acc.sqrt()
    }

    pub fn trace(&self) -> c64 {
        (0..self.dim()).map(|i| self.entries[(i, i)]).sum()
    }

    pub fn adjoint(&self) -> Self {
        Self {
            entries: self.entries.adjoint().to_owned(),
            hermitian: self.hermitian,
            basis: self.basis.clone(),
        }
    }

    pub fn scale(&self, factor: c64) -> Self {
        let entries = Mat::from_fn(self.dim(), self.dim(), |i, j| self.entries[(i, j)] * factor);
        let hermitian = (self.hermitian && factor.im == 0.0) || is_hermitian(&entries);
        Self {
            entries,
            hermitian,
            basis: self.basis.clone(),
        }
    }

    pub fn scale_real(&self, factor: f64) -> Self {
        self.scale(c64::new(factor, 0.0))
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.combine(other, c64::new(1.0, 0.0))
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.combine(other, c64::new(-1.0, 0.0))
    }

    fn combine(&self, other: &Self, sign: c64) -> Result<Self> {
        check_same(&self.basis, &other.basis)?;
        let entries = Mat::from_fn(self.dim(), self.dim(), |i, j| {
            self.entries[(i, j)] + sign * other.entries[(i, j)]
        });
        Self::from_mat(entries, self.basis.clone())
    }

    /// Matrix product `self * other`.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        check_same(&self.basis, &other.basis)?;
        let entries = sparse_aware_product(&self.entries, &other.entries);
        Self::from_mat(entries, self.basis.clone())
    }

    /// `[self, other] = self*other - other*self`.
    pub fn commutator(&self, other: &Self) -> Result<Self> {
        self.mul(other)?.sub(&other.mul(self)?)
    }

    /// `{self, other} = self*other + other*self`.
    pub fn anticommutator(&self, other: &Self) -> Result<Self> {
        self.mul(other)?.add(&other.mul(self)?)
    }

    pub fn apply(&self, v: &StateVector) -> Result<StateVector> {
        check_same(&self.basis, &v.basis)?;
        let n = self.dim();
        let mut out = vec![c64::new(0.0, 0.0); n];
        for (j, &x) in v.entries.iter().enumerate() {
            if x == c64::new(0.0, 0.0) {
                continue;
            }
            for (i, o) in out.iter_mut().enumerate() {
                *o += self.entries[(i, j)] * x;
            }
        }
        Ok(StateVector {
            entries: out,
            basis: self.basis.clone(),
        })
    }

    /// Largest singular value.
    ///
    /// Rows and columns that vanish identically are dropped first. A remaining
    /// block that is Hermitian (or anti-Hermitian) is normed through its
    /// eigenvalues, anything else through its singular values.
    pub fn op_norm(&self) -> f64 {
        op_norm(&self.entries)
    }

    /// Count of entries with modulus above `tol`.
    pub fn count_nonzero(&self, tol: f64) -> usize {
        let mut count = 0;
        for j in 0..self.dim() {
            for i in 0..self.dim() {
                if self.entries[(i, j)].norm() > tol {
                    count += 1;
                }
            }
        }
        count
    }

    /// `max_ij |A_ij - B_ij|`.
    pub fn max_abs_diff(&self, other: &Self) -> Result<f64> {
        check_same(&self.basis, &other.basis)?;
        Ok(self.sub(other)?.max_abs())
    }

    /// `||U^dagger U - 1||`.
    pub fn unitarity_defect(&self) -> f64 {
        let prod = sparse_aware_product(&self.entries.adjoint().to_owned(), &self.entries);
        let n = self.dim();
        let diff = Mat::from_fn(n, n, |i, j| {
            prod[(i, j)] - if i == j { c64::new(1.0, 0.0) } else { c64::new(0.0, 0.0) }
        });
        op_norm(&diff)
    }
}

/// Complex state vector on a tagged basis.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    entries: Vec<c64>,
    basis: BasisTag,
}

impl StateVector {
    pub fn new(entries: Vec<c64>, basis: BasisTag) -> Self {
        Self { entries, basis }
    }

    pub fn zeros(dim: usize, basis: BasisTag) -> Self {
        Self::new(vec![c64::new(0.0, 0.0); dim], basis)
    }

    pub fn basis_vector(dim: usize, index: usize, basis: BasisTag) -> Self {
        let mut v = Self::zeros(dim, basis);
        v.entries[index] = c64::new(1.0, 0.0);
        v
    }

    pub fn dim(&self) -> usize {
        self.entries.len()
    }

    pub fn basis(&self) -> &BasisTag {
        &self.basis
    }

    pub fn entries(&self) -> &[c64] {
        &self.entries
    }

    pub fn norm(&self) -> f64 {
        self.entries.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn normalized(&self) -> Self {
        let n = self.norm();
        Self {
            entries: self.entries.iter().map(|z| z / n).collect(),
            basis: self.basis.clone(),
        }
    }

    /// `<self|other>`, antilinear in `self`.
    pub fn inner(&self, other: &Self) -> Result<c64> {
        check_same(&self.basis, &other.basis)?;
        Ok(self
            .entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    pub fn scale(&self, factor: c64) -> Self {
        Self {
            entries: self.entries.iter().map(|z| z * factor).collect(),
            basis: self.basis.clone(),
        }
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        check_same(&self.basis, &other.basis)?;
        Ok(Self {
            entries: self
                .entries
                .iter()
                .zip(&other.entries)
                .map(|(a, b)| a - b)
                .collect(),
            basis: self.basis.clone(),
        })
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        check_same(&self.basis, &other.basis)?;
        Ok(Self {
            entries: self
                .entries
                .iter()
                .zip(&other.entries)
                .map(|(a, b)| a + b)
                .collect(),
            basis: self.basis.clone(),
        })
    }

    pub fn distance(&self, other: &Self) -> Result<f64> {
        Ok(self.sub(other)?.norm())
    }
}

/// Spectral decomposition `A = V diag(values) V^dagger` of a Hermitian operator.
#[derive(Clone, Debug)]
pub struct HermitianEigen {
    /// Eigenvalues in ascending order.
    pub values: Vec<f64>,
    /// Unitary matrix of eigenvectors (columns).
    pub vectors: OperatorMatrix,
}

impl HermitianEigen {
    pub fn dim(&self) -> usize {
        self.values.len()
    }

    /// `V diag(f(lambda)) V^dagger`.
    pub fn map(&self, f: impl Fn(f64) -> c64) -> OperatorMatrix {
        let v = &self.vectors.entries;
        let n = self.dim();
        let fv: Vec<c64> = self.values.iter().map(|&l| f(l)).collect();
        let scaled = Mat::from_fn(n, n, |i, j| v[(i, j)] * fv[j]);
        let entries = &scaled * v.adjoint();
        OperatorMatrix::from_mat(entries, self.vectors.basis.clone())
            .expect("square by construction")
    }

    pub fn reconstruct(&self) -> OperatorMatrix {
        self.map(|l| c64::new(l, 0.0))
    }

    /// Coefficients `V^dagger psi` in the eigenbasis.
    pub fn coefficients(&self, psi: &StateVector) -> Result<Vec<c64>> {
        check_same(&self.vectors.basis, &psi.basis)?;
        let v = &self.vectors.entries;
        let n = self.dim();
        Ok((0..n)
            .map(|k| (0..n).map(|i| v[(i, k)].conj() * psi.entries[i]).sum())
            .collect())
    }

    /// `V diag(exp(-i t lambda)) coeffs`.
    pub fn evolve_coefficients(&self, coeffs: &[c64], t: f64) -> StateVector {
        let v = &self.vectors.entries;
        let n = self.dim();
        let phased: Vec<c64> = self
            .values
            .iter()
            .zip(coeffs)
            .map(|(&l, &c)| c * c64::cis(-t * l))
            .collect();
        let mut out = vec![c64::new(0.0, 0.0); n];
        for (k, &c) in phased.iter().enumerate() {
            if c == c64::new(0.0, 0.0) {
                continue;
            }
            for (i, o) in out.iter_mut().enumerate() {
                *o += v[(i, k)] * c;
            }
        }
        StateVector::new(out, self.vectors.basis.clone())
    }

    /// `exp(-i t A) psi`.
    pub fn propagate(&self, psi: &StateVector, t: f64) -> Result<StateVector> {
        let c = self.coefficients(psi)?;
        Ok(self.evolve_coefficients(&c, t))
    }
}

/// Eigendecomposition of a Hermitian operator.
pub fn hermitian_eig(a: &OperatorMatrix) -> Result<HermitianEigen> {
    if !a.hermitian {
        return Err(Error::NotHermitian {
            asymmetry: a.hermitian_asymmetry(),
        });
    }
    let evd = a
        .entries
        .self_adjoint_eigen(Side::Lower)
        .map_err(|e| Error::LinearAlgebra(format!("{e:?}")))?;
    let s = evd.S().column_vector();
    let values: Vec<f64> = (0..a.dim()).map(|i| s[i].re).collect();
    let vectors = OperatorMatrix {
        entries: evd.U().to_owned(),
        hermitian: false,
        basis: a.basis.clone(),
    };
    Ok(HermitianEigen { values, vectors })
}

/// Eigenvalues of a Hermitian operator, ascending.
pub fn hermitian_eigenvalues(a: &OperatorMatrix) -> Result<Vec<f64>> {
    if !a.hermitian {
        return Err(Error::NotHermitian {
            asymmetry: a.hermitian_asymmetry(),
        });
    }
    a.entries
        .self_adjoint_eigenvalues(Side::Lower)
        .map_err(|e| Error::LinearAlgebra(format!("{e:?}")))
}

/// Runs every dense kernel on the calling thread.
///
/// Results then depend only on the inputs, not on the number of threads a
/// rayon pool happens to have.
pub fn set_sequential_kernels() {
    faer::set_global_parallelism(faer::Par::Seq);
}

/// `exp(-i t A)` for Hermitian `A`.
pub fn expi(a: &OperatorMatrix, t: f64) -> Result<OperatorMatrix> {
    Ok(hermitian_eig(a)?.map(|l| c64::cis(-t * l)))
}

/// Largest singular value of `a`.
pub fn op_norm(a: &Mat<c64>) -> f64 {
    let rows = nonzero_rows(a);
    let cols = nonzero_cols(a);
    if rows.is_empty() || cols.is_empty() {
        return 0.0;
    }
    let block = Mat::from_fn(rows.len(), cols.len(), |i, j| a[(rows[i], cols[j])]);
    if rows == cols {
        let scale = max_abs(&block);
        if asymmetry(&block) <= HERMITIAN_TOL * scale {
            if let Ok(ev) = block.self_adjoint_eigenvalues(Side::Lower) {
                return ev.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
            }
        }
        let rotated = Mat::from_fn(block.nrows(), block.ncols(), |i, j| {
            block[(i, j)] * c64::new(0.0, 1.0)
        });
        if asymmetry(&rotated) <= HERMITIAN_TOL * scale {
            if let Ok(ev) = rotated.self_adjoint_eigenvalues(Side::Lower) {
                return ev.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
            }
        }
    }
    block
        .singular_values()
        .map(|sv| sv.iter().fold(0.0_f64, |m, x| m.max(*x)))
        .unwrap_or(f64::NAN)
}

fn nonzero_rows(a: &Mat<c64>) -> Vec<usize> {
    let zero = c64::new(0.0, 0.0);
    (0..a.nrows())
        .filter(|&i| (0..a.ncols()).any(|j| a[(i, j)] != zero))
        .collect()
}

fn nonzero_cols(a: &Mat<c64>) -> Vec<usize> {
    let zero = c64::new(0.0, 0.0);
    (0..a.ncols())
        .filter(|&j| (0..a.nrows()).any(|i| a[(i, j)] != zero))
        .collect()
}

fn sparse_aware_product(a: &Mat<c64>, b: &Mat<c64>) -> Mat<c64> {
    let n = a.nrows();
    let inner: Vec<usize> = {
        let ac = nonzero_cols(a);
        let br = nonzero_rows(b);
        ac.into_iter().filter(|k| br.binary_search(k).is_ok()).collect()
    };
    if inner.len() * 4 >= a.ncols() * 3 {
        return a * b;
    }
    let mut out = Mat::zeros(n, b.ncols());
    if inner.is_empty() {
        return out;
    }
    let rows = nonzero_rows(a);
    let cols = nonzero_cols(b);
    let a_sub = Mat::from_fn(rows.len(), inner.len(), |i, k| a[(rows[i], inner[k])]);
    let b_sub = Mat::from_fn(inner.len(), cols.len(), |k, j| b[(inner[k], cols[j])]);
    let prod = &a_sub * &b_sub;
    for (jj, &j) in cols.iter().enumerate() {
        for (ii, &i) in rows.iter().enumerate() {
            out[(i, j)] = prod[(ii, jj)];
        }
    }
    out
}

fn max_abs(a: &Mat<c64>) -> f64 {
    let mut m = 0.0_f64;
    for j in 0..a.ncols() {
        for i in 0..a.nrows() {
            m = m.max(a[(i, j)].norm());
        }
    }
    m
}

fn asymmetry(a: &Mat<c64>) -> f64 {
    let n = a.nrows();
    let mut m = 0.0_f64;
    for j in 0..n {
        for i in 0..=j {
            m = m.max((a[(i, j)] - a[(j, i)].conj()).norm());
        }
    }
    m
}

fn is_hermitian(a: &Mat<c64>) -> bool {
    asymmetry(a) <= HERMITIAN_TOL * max_abs(a)
}
