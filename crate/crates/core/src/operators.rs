//! Upper-triangular Toeplitz operators, the discrete q-Hardy operator, the
//! Cesàro averaging operator, and their finite N×N sections.
//!
//! A kernel `(a_1, a_2, ...)` defines the operator with entries
//! `a_{i,j} = a_{j-i+1}` for `j >= i` and zero below the diagonal, so
//! `(A x)_i = sum_{j>=i} a_{j-i+1} x_j`. The lower-triangular transpose is
//! its Banach adjoint on l^{p'} and is not modelled separately.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::{compensated_sum, NeumaierSum, QParam, TruncatedSequence};
use crate::par;

/// Wire form of a kernel: `{"type":"geometric","ratio":r,"scale":s}` or
/// `{"type":"explicit","coeffs":[...]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum KernelSpec {
    Geometric { ratio: f64, scale: f64 },
    Explicit { coeffs: Vec<f64> },
}

/// Generating coefficients of a nonnegative upper-triangular Toeplitz operator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "KernelSpec", into = "KernelSpec")]
pub struct ToeplitzKernel {
    spec: KernelSpec,
    sum: f64,
}

impl ToeplitzKernel {
    /// `a_m = scale * ratio^{m-1}`, with `0 <= ratio < 1` and `scale > 0`.
    pub fn geometric(ratio: f64, scale: f64) -> Result<Self> {
        if !(ratio.is_finite() && (0.0..1.0).contains(&ratio)) {
            return Err(Error::Domain(format!("geometric ratio must lie in [0, 1), got {ratio}")));
        }
        if !(scale.is_finite() && scale > 0.0) {
            return Err(Error::Domain(format!("geometric scale must be positive, got {scale}")));
        }
        Ok(Self { spec: KernelSpec::Geometric { ratio, scale }, sum: scale / (1.0 - ratio) })
    }

    /// Finitely many coefficients `a_1..a_M`; `a_1 > 0`, the rest nonnegative.
    pub fn explicit(coeffs: Vec<f64>) -> Result<Self> {
        if let Some(i) = coeffs.iter().position(|c| !(c.is_finite() && *c >= 0.0)) {
            return Err(Error::Domain(format!("coefficient a_{} = {} is not a finite nonnegative value", i + 1, coeffs[i])));
        }
        match coeffs.first() {
            Some(&a1) if a1 > 0.0 => {}
            _ => return Err(Error::Domain("the leading coefficient a_1 must be positive".into())),
        }
        let sum = compensated_sum(&coeffs);
        Ok(Self { spec: KernelSpec::Explicit { coeffs }, sum })
    }

    pub fn spec(&self) -> &KernelSpec {
        &self.spec
    }

    /// `S = sum_m a_m`; exact closed form for geometric kernels.
    pub fn sum(&self) -> f64 {
        self.sum
    }

    /// `a_m` for `m >= 1`; `a_0` reads as zero.
    pub fn coeff(&self, m: usize) -> f64 {
        if m == 0 {
            return 0.0;
        }
        match &self.spec {
            KernelSpec::Geometric { ratio, scale } => scale * ratio.powi((m - 1) as i32),
            KernelSpec::Explicit { coeffs } => coeffs.get(m - 1).copied().unwrap_or(0.0),
        }
    }

    /// `(a_1, ..., a_len)`.
    pub fn coeffs(&self, len: usize) -> Vec<f64> {
        (1..=len).map(|m| self.coeff(m)).collect()
    }

    /// Partial sums `P_m = a_1 + ... + a_m` for `m = 1..=len`.
    pub fn partial_sums(&self, len: usize) -> Vec<f64> {
        match &self.spec {
            KernelSpec::Geometric { ratio, scale } if *ratio > 0.0 => {
                let (r, s) = (*ratio, *scale);
                (1..=len).map(|m| s * -(m as f64 * r.ln()).exp_m1() / (1.0 - r)).collect()
            }
            _ => {
                let mut acc = NeumaierSum::new();
                (1..=len)
                    .map(|m| {
                        acc += self.coeff(m);
                        acc.value()
                    })
                    .collect()
            }
        }
    }
}

impl TryFrom<KernelSpec> for ToeplitzKernel {
    type Error = Error;

    fn try_from(spec: KernelSpec) -> Result<Self> {
        match spec {
            KernelSpec::Geometric { ratio, scale } => Self::geometric(ratio, scale),
            KernelSpec::Explicit { coeffs } => Self::explicit(coeffs),
        }
    }
}

impl From<ToeplitzKernel> for KernelSpec {
    fn from(k: ToeplitzKernel) -> Self {
        k.spec
    }
}

/// The q-Hardy kernel `a_m = q^{m-1}`, i.e. `(A x)_n = q^{-n} sum_{k>=n} q^k x_k`, with `S = 1/(1-q)`.
pub fn q_hardy_kernel(q: QParam) -> ToeplitzKernel {
    ToeplitzKernel::geometric(q.get(), 1.0).expect("QParam lies in (0, 1)")
}

/// `y_i = sum_{j>=i} a_{j-i+1} x_j`; the output has the same length as `x`.
pub fn apply_toeplitz(k: &ToeplitzKernel, x: &TruncatedSequence) -> TruncatedSequence {
    let xs = x.as_slice();
    let a = k.coeffs(xs.len());
    par::map_range(xs.len(), |i| {
        xs[i..].iter().zip(&a).map(|(xj, am)| am * xj).collect::<NeumaierSum>().value()
    })
    .into()
}

/// `y_n = q^{-n} sum_{k>=n} q^k x_k`, evaluated term by term as `q^{k-n} x_k`.
pub fn apply_qhardy_direct(q: QParam, x: &TruncatedSequence) -> TruncatedSequence {
    let q = q.get();
    let xs = x.as_slice();
    par::map_range(xs.len(), |n| {
        (n..xs.len()).map(|k| q.powi((k - n) as i32) * xs[k]).collect::<NeumaierSum>().value()
    })
    .into()
}

/// Running averages `(1/n) sum_{k<=n} x_k` for `n = 1..=horizon`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CesaroImage {
    /// Rows actually produced; the true image continues past it.
    pub horizon: usize,
    pub values: TruncatedSequence,
}

/// The Cesàro operator up to an explicit horizon (its image of a finitely
/// supported sequence never terminates).
pub fn apply_cesaro(x: &TruncatedSequence, horizon: Option<usize>) -> Result<CesaroImage> {
    let horizon = horizon.ok_or_else(|| Error::Argument("the Cesàro operator needs an explicit horizon".into()))?;
    let mut acc = NeumaierSum::new();
    let values = (1..=horizon)
        .map(|n| {
            acc += x.get(n);
            acc.value() / n as f64
        })
        .collect::<Vec<_>>();
    Ok(CesaroImage { horizon, values: values.into() })
}

#[derive(Debug, Clone, PartialEq)]
enum Storage {
    /// Row-major; `upper_only`/`lower_only` mark an all-zero opposite triangle.
    Dense { entries: Vec<f64>, upper_only: bool, lower_only: bool },
    /// Section of the geometric Toeplitz kernel `scale * ratio^{j-i}`, `j >= i`.
    GeometricToeplitz { ratio: f64, scale: f64 },
}

/// A nonnegative N×N matrix (finite section of an operator).
///
/// Row/column indices of [`TruncatedMatrix::get`] are 0-based.
#[derive(Debug, Clone, PartialEq)]
pub struct TruncatedMatrix {
    n: usize,
    storage: Storage,
}

impl TruncatedMatrix {
    /// Builds from row-major entries.
    pub fn new(n: usize, entries: Vec<f64>) -> Result<Self> {
        if n == 0 {
            return Err(Error::Argument("matrix dimension must be at least 1".into()));
        }
        if entries.len() != n * n {
            return Err(Error::DimensionMismatch { expected: n * n, found: entries.len() });
        }
        if let Some(i) = entries.iter().position(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(Error::Argument(format!(
                "entry ({}, {}) = {} is not a finite nonnegative value",
                i / n,
                i % n,
                entries[i]
            )));
        }
        let upper_only = (0..n).all(|i| entries[i * n..i * n + i].iter().all(|&v| v == 0.0));
        let lower_only = (0..n).all(|i| entries[i * n + i + 1..(i + 1) * n].iter().all(|&v| v == 0.0));
        Ok(Self { n, storage: Storage::Dense { entries, upper_only, lower_only } })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        if let Some(r) = rows.iter().find(|r| r.len() != n) {
            return Err(Error::DimensionMismatch { expected: n, found: r.len() });
        }
        Self::new(n, rows.concat())
    }

    pub fn identity(n: usize) -> Result<Self> {
        let mut e = vec![0.0; n * n];
        (0..n).for_each(|i| e[i * n + i] = 1.0);
        Self::new(n, e)
    }

    /// The N×N section of the Cesàro operator, `c_{n,k} = 1/n` for `k <= n`.
    pub fn cesaro_section(n: usize) -> Result<Self> {
        let mut e = vec![0.0; n * n];
        for i in 0..n {
            e[i * n..=i * n + i].fill(1.0 / (i + 1) as f64);
        }
        Self::new(n, e)
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        assert!(i < self.n && j < self.n, "index ({i}, {j}) out of range for dimension {}", self.n);
        match &self.storage {
            Storage::Dense { entries, .. } => entries[i * self.n + j],
            Storage::GeometricToeplitz { ratio, scale } => {
                if j >= i {
                    scale * ratio.powi((j - i) as i32)
                } else {
                    0.0
                }
            }
        }
    }

    /// Row-major copy of all entries.
    pub fn to_dense(&self) -> Vec<f64> {
        match &self.storage {
            Storage::Dense { entries, .. } => entries.clone(),
            _ => (0..self.n * self.n).map(|k| self.get(k / self.n, k % self.n)).collect(),
        }
    }

    pub fn is_zero(&self) -> bool {
        match &self.storage {
            Storage::Dense { entries, .. } => entries.iter().all(|&v| v == 0.0),
            Storage::GeometricToeplitz { .. } => false,
        }
    }

    /// `m x`, where `x` has length `dim()`.
    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.n, "vector length must match matrix dimension");
        let n = self.n;
        match &self.storage {
            Storage::Dense { entries, upper_only, lower_only } => {
                let mut y = vec![0.0; n];
                par::fill(&mut y, |i| {
                    let (lo, hi) = row_range(i, n, *upper_only, *lower_only);
                    dot(&entries[i * n + lo..i * n + hi], &x[lo..hi])
                });
                y
            }
            Storage::GeometricToeplitz { ratio, scale } => {
                // y_i = s x_i + r y_{i+1}
                let mut y = vec![0.0; n];
                let mut next = 0.0;
                for i in (0..n).rev() {
                    next = scale * x[i] + ratio * next;
                    y[i] = next;
                }
                y
            }
        }
    }

    /// `m^T z`.
    pub fn matvec_transpose(&self, z: &[f64]) -> Vec<f64> {
        assert_eq!(z.len(), self.n, "vector length must match matrix dimension");
        let n = self.n;
        match &self.storage {
            Storage::Dense { entries, upper_only, lower_only } => {
                let mut w = vec![0.0; n];
                // column j of m is row j of m^T: nonzero rows are i <= j when upper-triangular
                par::fill(&mut w, |j| {
                    let (lo, hi) = row_range(j, n, *lower_only, *upper_only);
                    (lo..hi).map(|i| entries[i * n + j] * z[i]).sum()
                });
                w
            }
            Storage::GeometricToeplitz { ratio, scale } => {
                // w_j = s z_j + r w_{j-1}
                let mut w = vec![0.0; n];
                let mut prev = 0.0;
                for j in 0..n {
                    prev = scale * z[j] + ratio * prev;
                    w[j] = prev;
                }
                w
            }
        }
    }

    /// Applies `f(m_ij)` entrywise over the stored entries and sums rows (`by_row`) or columns.
    pub(crate) fn weighted_line_sums<F>(&self, by_row: bool, f: F) -> Vec<f64>
    where
        F: Fn(usize, usize, f64) -> f64 + Sync + Send,
    {
        let n = self.n;
        par::map_range(n, |a| {
            (0..n)
                .map(|b| {
                    let (i, j) = if by_row { (a, b) } else { (b, a) };
                    let v = self.get(i, j);
                    if v == 0.0 {
                        0.0
                    } else {
                        f(i, j, v)
                    }
                })
                .collect::<NeumaierSum>()
                .value()
        })
    }
}

// Column range [lo, hi) holding the possibly nonzero entries of row i.
fn row_range(i: usize, n: usize, upper_only: bool, lower_only: bool) -> (usize, usize) {
    let lo = if upper_only { i } else { 0 };
    let hi = if lower_only { i + 1 } else { n };
    (lo, hi.max(lo))
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// The N×N section `entries[i][j] = a_{j-i+1}` for `j >= i`.
pub fn materialize(k: &ToeplitzKernel, n: usize) -> Result<TruncatedMatrix> {
    if n == 0 {
        return Err(Error::Argument("section size N must be at least 1".into()));
    }
    match k.spec() {
        KernelSpec::Geometric { ratio, scale } => {
            Ok(TruncatedMatrix { n, storage: Storage::GeometricToeplitz { ratio: *ratio, scale: *scale } })
        }
        KernelSpec::Explicit { .. } => {
            let a = k.coeffs(n);
            let mut e = vec![0.0; n * n];
            for i in 0..n {
                e[i * n + i..(i + 1) * n].copy_from_slice(&a[..n - i]);
            }
            TruncatedMatrix::new(n, e)
        }
    }
}
