//! Orthogonal projection onto multilevel Toeplitz matrices and the structure
//! metrics built on it.
//!
//! A q-level Toeplitz matrix over domain sizes (d_1, ..., d_q) has entries
//! depending only on the per-domain index lags (i_1 - j_1, ..., i_q - j_q).
//! These matrices form a linear subspace of the M x M matrices (M = prod d_k)
//! spanned by the indicator matrices of the lag classes. Since the indicators
//! have disjoint supports, the Frobenius-orthogonal projection is diagonal
//! averaging: every entry is replaced by the mean over its lag class.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Ordered per-domain sizes of a multilevel structure; their product is the
/// matrix side. The last domain varies fastest in the linear index.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DomainDims(Vec<usize>);

impl DomainDims {
    pub fn new(dims: Vec<usize>) -> Result<Self> {
        if dims.is_empty() {
            return Err(Error::EmptyInput("domain dims"));
        }
        if dims.iter().any(|&d| d == 0) {
            return Err(Error::InvalidConfig("domain size must be >= 1".into()));
        }
        Ok(Self(dims))
    }

    pub fn sizes(&self) -> &[usize] {
        &self.0
    }

    pub fn product(&self) -> usize {
        self.0.iter().product()
    }

    /// Decomposes a linear index into the multi-index, last domain fastest.
    fn multi_index(&self, mut idx: usize, out: &mut [usize]) {
        for (k, &d) in self.0.iter().enumerate().rev() {
            out[k] = idx % d;
            idx /= d;
        }
    }
}

/// Maps an (i, j) pair to the linear index of its lag class.
///
/// Lag t_k = i_k - j_k is shifted to [0, 2 d_k - 2]; classes are enumerated
/// with the same last-fastest ordering as the matrix indices.
fn lag_index(dims: &DomainDims, mi: &[usize], mj: &[usize]) -> usize {
    let mut idx = 0usize;
    for (k, &d) in dims.sizes().iter().enumerate() {
        let t = mi[k] + d - 1 - mj[k];
        idx = idx * (2 * d - 1) + t;
    }
    idx
}

/// Mirrors a lag-class index to the class of the negated lag tuple.
fn neg_lag_index(dims: &DomainDims, mut idx: usize) -> usize {
    let mut out = 0usize;
    let mut parts = vec![0usize; dims.sizes().len()];
    for (k, &d) in dims.sizes().iter().enumerate().rev() {
        parts[k] = idx % (2 * d - 1);
        idx /= 2 * d - 1;
    }
    for (k, &d) in dims.sizes().iter().enumerate() {
        out = out * (2 * d - 1) + (2 * d - 2 - parts[k]);
    }
    out
}

/// Frobenius-orthogonal projection onto the q-level Toeplitz subspace.
///
/// With `hermitian` set, projects onto the Hermitian multilevel Toeplitz
/// subspace by additionally averaging each lag class with the conjugate of
/// the negated class. Both variants are linear and idempotent; the Hermitian
/// one preserves the trace exactly (the zero-lag class is the diagonal).
pub fn multilevel_toeplitz_project(
    c: &DMatrix<Complex64>,
    dims: &DomainDims,
    hermitian: bool,
) -> Result<DMatrix<Complex64>> {
    let m = dims.product();
    if c.nrows() != m || c.ncols() != m {
        return Err(Error::DimensionMismatch(format!(
            "matrix is {}x{}, dims product is {}",
            c.nrows(),
            c.ncols(),
            m
        )));
    }

    let n_classes: usize = dims.sizes().iter().map(|&d| 2 * d - 1).product();
    let mut sums = vec![Complex64::new(0.0, 0.0); n_classes];
    let mut counts = vec![0usize; n_classes];

    let q = dims.sizes().len();
    let mut mi = vec![0usize; q];
    let mut mj = vec![0usize; q];
    let mut class_of = vec![0usize; m * m];
    for i in 0..m {
        dims.multi_index(i, &mut mi);
        for j in 0..m {
            dims.multi_index(j, &mut mj);
            let t = lag_index(dims, &mi, &mj);
            class_of[i * m + j] = t;
            sums[t] += c[(i, j)];
            counts[t] += 1;
        }
    }

    let mut avg: Vec<Complex64> = sums
        .iter()
        .zip(&counts)
        .map(|(s, &n)| if n > 0 { s / n as f64 } else { Complex64::new(0.0, 0.0) })
        .collect();

    if hermitian {
        let sym: Vec<Complex64> = (0..n_classes)
            .map(|t| 0.5 * (avg[t] + avg[neg_lag_index(dims, t)].conj()))
            .collect();
        avg = sym;
    }

    Ok(DMatrix::from_fn(m, m, |i, j| avg[class_of[i * m + j]]))
}

/// Batch-mean of the normalized squared Frobenius distance to the multilevel
/// Toeplitz subspace: mean over matrices of ||C - P(C)||_F^2 / ||C||_F^2.
pub fn structure_nmse(cs: &[DMatrix<Complex64>], dims: &DomainDims) -> Result<f64> {
    if cs.is_empty() {
        return Err(Error::EmptyInput("covariance batch"));
    }
    let mut acc = 0.0;
    for c in cs {
        let norm2 = c.norm_squared();
        if norm2 == 0.0 {
            return Err(Error::InvalidConfig(
                "structure_nmse is undefined for a zero matrix".into(),
            ));
        }
        let p = multilevel_toeplitz_project(c, dims, false)?;
        acc += (c - &p).norm_squared() / norm2;
    }
    Ok(acc / cs.len() as f64)
}

/// Mean squared Euclidean norm of a batch of vectors (distance of means to
/// zero).
pub fn zero_mean_mse(mus: &[nalgebra::DVector<Complex64>]) -> Result<f64> {
    if mus.is_empty() {
        return Err(Error::EmptyInput("mean batch"));
    }
    let len = mus[0].len();
    if mus.iter().any(|v| v.len() != len) {
        return Err(Error::DimensionMismatch("mean vectors have unequal lengths".into()));
    }
    Ok(mus.iter().map(|v| v.norm_squared()).sum::<f64>() / mus.len() as f64)
}
