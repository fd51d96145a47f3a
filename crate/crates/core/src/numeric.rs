//! Exponents, finitely supported sequences, l^p norms and compensated summation.
//!
//! Everything downstream sums in ascending index order through [`NeumaierSum`],
//! so results do not depend on how work is scheduled.

use std::ops::AddAssign;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Kahan summation with Neumaier's correction for terms larger than the running sum.
#[derive(Debug, Default, Clone, Copy)]
pub struct NeumaierSum {
    sum: f64,
    comp: f64,
}

impl NeumaierSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

impl AddAssign<f64> for NeumaierSum {
    fn add_assign(&mut self, term: f64) {
        let t = self.sum + term;
        if self.sum.abs() >= term.abs() {
            self.comp += (self.sum - t) + term;
        } else {
            self.comp += (term - t) + self.sum;
        }
        self.sum = t;
    }
}

impl FromIterator<f64> for NeumaierSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut acc = NeumaierSum::new();
        for t in iter {
            acc += t;
        }
        acc
    }
}

/// Sums `terms` in order with error-compensated accumulation.
pub fn compensated_sum(terms: &[f64]) -> f64 {
    terms.iter().copied().collect::<NeumaierSum>().value()
}

/// Hölder conjugate p/(p-1) of an exponent p > 1.
pub fn conjugate_exponent(p: f64) -> Result<f64> {
    if !p.is_finite() || p <= 1.0 {
        return Err(Error::Domain(format!("exponent must satisfy 1 < p < inf, got {p}")));
    }
    Ok(p / (p - 1.0))
}

/// An exponent p > 1 together with its Hölder conjugate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct Exponent {
    p: f64,
    conj: f64,
}

impl Exponent {
    pub fn new(p: f64) -> Result<Self> {
        let conj = conjugate_exponent(p)?;
        Ok(Self { p, conj })
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    /// The conjugate exponent p' with 1/p + 1/p' = 1.
    pub fn conj(&self) -> f64 {
        self.conj
    }
}

impl TryFrom<f64> for Exponent {
    type Error = Error;

    fn try_from(p: f64) -> Result<Self> {
        Exponent::new(p)
    }
}

impl From<Exponent> for f64 {
    fn from(e: Exponent) -> f64 {
        e.p
    }
}

/// The deformation parameter q, strictly inside (0, 1).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct QParam(f64);

impl QParam {
    pub fn new(q: f64) -> Result<Self> {
        if q.is_finite() && q > 0.0 && q < 1.0 {
            Ok(Self(q))
        } else {
            Err(Error::Domain(format!("q must satisfy 0 < q < 1, got {q}")))
        }
    }

    pub fn get(&self) -> f64 {
        self.0
    }
}

impl TryFrom<f64> for QParam {
    type Error = Error;

    fn try_from(q: f64) -> Result<Self> {
        QParam::new(q)
    }
}

impl From<QParam> for f64 {
    fn from(q: QParam) -> f64 {
        q.0
    }
}

/// A finitely supported real sequence `x_1, x_2, ..., x_len`, zero beyond the stored entries.
///
/// Indexing through [`TruncatedSequence::get`] is 1-based; index 0 and indices
/// past the end read as zero.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct TruncatedSequence {
    values: Vec<f64>,
}

impl TruncatedSequence {
    pub fn new(values: Vec<f64>) -> Self {
        Self { values }
    }

    pub fn zeros(len: usize) -> Self {
        Self { values: vec![0.0; len] }
    }

    /// Indicator of `{1, ..., m}`.
    pub fn indicator(m: usize) -> Self {
        Self { values: vec![1.0; m] }
    }

    /// Unit vector e_n (1-based).
    pub fn unit(n: usize) -> Self {
        assert!(n >= 1, "sequences are indexed from 1");
        let mut values = vec![0.0; n];
        values[n - 1] = 1.0;
        Self { values }
    }

    pub fn get(&self, n: usize) -> f64 {
        if n == 0 {
            return 0.0;
        }
        self.values.get(n - 1).copied().unwrap_or(0.0)
    }

    /// Number of stored entries; every entry past it is zero.
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.values
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.values
    }

    /// Largest index carrying a nonzero entry (0 for the zero sequence).
    pub fn support_len(&self) -> usize {
        self.values.iter().rposition(|&v| v != 0.0).map_or(0, |i| i + 1)
    }

    pub fn is_nonnegative(&self) -> bool {
        self.values.iter().all(|&v| v >= 0.0)
    }

    /// Errors unless every entry is finite and nonnegative.
    pub fn check_nonnegative(&self) -> Result<()> {
        match self.values.iter().position(|v| !(v.is_finite() && *v >= 0.0)) {
            None => Ok(()),
            Some(i) => Err(Error::Argument(format!(
                "entry {} is {}; a finite nonnegative value is required",
                i + 1,
                self.values[i]
            ))),
        }
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self::new(self.values.iter().map(|v| c * v).collect())
    }

    /// Entrywise sum, padding the shorter operand with zeros.
    pub fn add(&self, other: &Self) -> Self {
        let len = self.len().max(other.len());
        Self::new((1..=len).map(|n| self.get(n) + other.get(n)).collect())
    }
}

impl From<Vec<f64>> for TruncatedSequence {
    fn from(values: Vec<f64>) -> Self {
        Self::new(values)
    }
}

/// `(sum |x_n|^p)^(1/p)`; zero for the empty or zero sequence.
///
/// Entries are scaled by the largest magnitude before powering so that the
/// intermediate sum neither overflows nor underflows.
pub fn lp_norm(x: &TruncatedSequence, p: Exponent) -> f64 {
    lp_norm_slice(x.as_slice(), p.p())
}

pub(crate) fn lp_norm_slice(x: &[f64], p: f64) -> f64 {
    let scale = x.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    if scale == 0.0 || !scale.is_finite() {
        return scale;
    }
    let acc: NeumaierSum = x.iter().map(|v| (v.abs() / scale).powf(p)).collect();
    scale * acc.value().powf(1.0 / p)
}

/// Numerical tolerances shared by the iterative routines.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ToleranceConfig {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_iter: usize,
    /// Geometric tails are dropped once their magnitude falls below this.
    pub tail_threshold: f64,
}

impl Default for ToleranceConfig {
    fn default() -> Self {
        Self { rel_tol: 1e-10, abs_tol: 1e-14, max_iter: 500, tail_threshold: 1e-16 }
    }
}

impl ToleranceConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = |v: f64| v.is_finite() && v > 0.0;
        if !positive(self.rel_tol) || !positive(self.abs_tol) || !positive(self.tail_threshold) {
            return Err(Error::Argument("tolerances must be finite and positive".into()));
        }
        if self.max_iter == 0 {
            return Err(Error::Argument("max_iter must be at least 1".into()));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn exp(p: f64) -> Exponent {
        Exponent::new(p).unwrap()
    }

    #[test]
    fn conjugates() {
        assert_eq!(conjugate_exponent(2.0).unwrap(), 2.0);
        assert!((conjugate_exponent(4.0).unwrap() - 4.0 / 3.0).abs() < 1e-15);
        assert!(conjugate_exponent(1.0).is_err());
        assert!(conjugate_exponent(0.5).is_err());
        assert!(conjugate_exponent(f64::INFINITY).is_err());
        assert!(conjugate_exponent(f64::NAN).is_err());
        assert!(conjugate_exponent(1.0 + 1e-9).unwrap() > 1e8);
    }

    #[test]
    fn holder_identity() {
        for p in [1.01, 1.5, 2.0, 3.0, 10.0, 1e6] {
            let e = exp(p);
            assert!(e.conj() > 1.0);
            assert!((1.0 / e.p() + 1.0 / e.conj() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn q_param_is_open_interval() {
        assert!(QParam::new(0.0).is_err());
        assert!(QParam::new(1.0).is_err());
        assert!(QParam::new(-0.3).is_err());
        assert_eq!(QParam::new(0.25).unwrap().get(), 0.25);
    }

    #[test]
    fn norms() {
        assert_eq!(lp_norm(&vec![3.0, 4.0].into(), exp(2.0)), 5.0);
        let n = lp_norm(&vec![1.0, 2.0, 2.0].into(), exp(3.0));
        assert!((n - 17f64.powf(1.0 / 3.0)).abs() < 1e-14);
        for p in [1.5, 2.0, 7.0] {
            let n = lp_norm(&TruncatedSequence::indicator(37), exp(p));
            assert!((n - 37f64.powf(1.0 / p)).abs() < 1e-13);
        }
        assert_eq!(lp_norm(&TruncatedSequence::default(), exp(2.0)), 0.0);
        assert_eq!(lp_norm(&TruncatedSequence::zeros(5), exp(2.0)), 0.0);
        // negative entries enter through |x|
        assert_eq!(lp_norm(&vec![-3.0, 4.0].into(), exp(2.0)), 5.0);
    }

    #[test]
    fn norm_does_not_overflow() {
        let n = lp_norm(&vec![1e200, 1e200].into(), exp(3.0));
        assert!((n / 1e200 - 2f64.powf(1.0 / 3.0)).abs() < 1e-14);
    }

    #[test]
    fn summation() {
        assert_eq!(compensated_sum(&[1.0, 1e-16, -1.0]), 1e-16);
        assert_eq!(compensated_sum(&[]), 0.0);
        let tenths = vec![0.1; 1_000_000];
        assert!((compensated_sum(&tenths) - 1e5).abs() < 1e-9);
    }

    #[test]
    fn summation_matches_exact_rational() {
        // 10^6 * fl(0.1) exactly: fl(0.1) = 3602879701896397 / 2^55
        let exact = 3_602_879_701_896_397u128 * 1_000_000u128;
        let exact = exact as f64 / 2f64.powi(55);
        let got = compensated_sum(&vec![0.1; 1_000_000]);
        assert!((got - exact).abs() <= 2.0 * f64::EPSILON * exact);
    }

    #[test]
    fn sequence_indexing() {
        let x = TruncatedSequence::new(vec![1.0, 0.0, 2.0, 0.0]);
        assert_eq!(x.get(0), 0.0);
        assert_eq!(x.get(1), 1.0);
        assert_eq!(x.get(3), 2.0);
        assert_eq!(x.get(99), 0.0);
        assert_eq!(x.support_len(), 3);
        assert_eq!(TruncatedSequence::unit(3).as_slice(), &[0.0, 0.0, 1.0]);
        assert!(TruncatedSequence::new(vec![1.0, -1.0]).check_nonnegative().is_err());
        assert!(TruncatedSequence::new(vec![1.0, f64::NAN]).check_nonnegative().is_err());
    }

    #[test]
    fn tolerance_defaults_are_valid() {
        let cfg = ToleranceConfig::default();
        cfg.validate().unwrap();
        assert_eq!(cfg.rel_tol, 1e-10);
        assert_eq!(cfg.abs_tol, 1e-14);
        assert!(ToleranceConfig { max_iter: 0, ..cfg }.validate().is_err());
        assert!(ToleranceConfig { rel_tol: -1.0, ..cfg }.validate().is_err());
    }
}
