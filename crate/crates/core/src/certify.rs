//! Two-sided operator-norm certificates.
//!
//! Upper bounds come from the weighted Schur test: for a nonnegative matrix
//! `m` and positive weights `b`,
//!
//! ```text
//! U1 = max_i sum_j m_ij b_ij^{1/p},   U2 = max_j sum_i m_ij b_ij^{-1/p'},
//! ||m||_{p,p} <= U1^{1/p'} U2^{1/p}.
//! ```
//!
//! With `b = 1` on an upper-triangular Toeplitz operator every row sum is at
//! most `S` and every column sum is a partial sum `P_j <= S`, giving the
//! closed-form bound `S` on the full infinite operator. Lower bounds come from
//! explicit witnesses: indicator sequences `1_{1..M}` and a nonlinear power
//! iteration on a finite section.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::{
    lp_norm, lp_norm_slice, Exponent, NeumaierSum, QParam, ToleranceConfig, TruncatedSequence,
};
use crate::operators::{apply_qhardy_direct, apply_toeplitz, materialize, ToeplitzKernel, TruncatedMatrix};
use crate::par;

/// Positive weights `b_ij` for the Schur test.
#[derive(Debug, Clone, PartialEq)]
pub enum SchurWeights {
    /// `b_ij = 1` everywhere (exact, dimension-free).
    Ones,
    /// Row-major N×N weights.
    Dense { n: usize, values: Vec<f64> },
}

impl SchurWeights {
    pub fn dense(n: usize, values: Vec<f64>) -> Result<Self> {
        if values.len() != n * n {
            return Err(Error::DimensionMismatch { expected: n * n, found: values.len() });
        }
        if let Some(i) = values.iter().position(|v| !(v.is_finite() && *v > 0.0)) {
            return Err(Error::Argument(format!("weight ({}, {}) = {} is not positive", i / n, i % n, values[i])));
        }
        Ok(Self::Dense { n, values })
    }
}

/// Outcome of the Schur test.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SchurBound {
    pub bound: f64,
    pub u1: f64,
    pub u2: f64,
}

pub fn schur_bound(m: &TruncatedMatrix, w: &SchurWeights, p: Exponent) -> Result<SchurBound> {
    let n = m.dim();
    let (row_exp, col_exp) = (1.0 / p.p(), -1.0 / p.conj());
    let (rows, cols) = match w {
        SchurWeights::Ones => (m.weighted_line_sums(true, |_, _, v| v), m.weighted_line_sums(false, |_, _, v| v)),
        SchurWeights::Dense { n: wn, values } => {
            if *wn != n {
                return Err(Error::DimensionMismatch { expected: n, found: *wn });
            }
            if values.iter().any(|v| v.is_nan() || *v <= 0.0) {
                return Err(Error::Argument("Schur weights must be positive".into()));
            }
            let b = |i: usize, j: usize| values[i * n + j];
            (
                m.weighted_line_sums(true, |i, j, v| v * b(i, j).powf(row_exp)),
                m.weighted_line_sums(false, |i, j, v| v * b(i, j).powf(col_exp)),
            )
        }
    };
    let u1 = rows.into_iter().fold(0.0, f64::max);
    let u2 = cols.into_iter().fold(0.0, f64::max);
    Ok(SchurBound { bound: u1.powf(1.0 / p.conj()) * u2.powf(1.0 / p.p()), u1, u2 })
}

/// The Schur test with unit weights on the whole infinite operator: exactly `S`, for every p > 1.
pub fn toeplitz_schur_bound(k: &ToeplitzKernel, _p: Exponent) -> f64 {
    k.sum()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndicatorWitness {
    pub ratio: f64,
    pub witness: TruncatedSequence,
}

/// `||A 1_{1..M}||_p / M^{1/p}`.
///
/// Row `i` of `A 1_{1..M}` is the partial sum `P_{M-i+1}`, so the ratio is
/// `((1/M) sum_{m=1}^{M} P_m^p)^{1/p}`: a Cesàro mean of a nondecreasing
/// sequence, nondecreasing in M and tending to `S`.
pub fn indicator_witness(k: &ToeplitzKernel, p: Exponent, m: usize) -> Result<IndicatorWitness> {
    Ok(IndicatorWitness { ratio: indicator_ratio(k, p, m)?, witness: TruncatedSequence::indicator(m) })
}

fn indicator_ratio(k: &ToeplitzKernel, p: Exponent, m: usize) -> Result<f64> {
    if m == 0 {
        return Err(Error::Argument("indicator length M must be at least 1".into()));
    }
    let s = k.sum();
    let acc: NeumaierSum = k.partial_sums(m).into_iter().map(|pm| (pm / s).powf(p.p())).collect();
    Ok(s * (acc.value() / m as f64).powf(1.0 / p.p()))
}

/// Result of the constructive best-constant search.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WitnessSearch {
    pub eps: f64,
    pub m: usize,
    pub ratio: f64,
}

/// Doubles M from 1 until the indicator ratio exceeds `S - eps`; gives up past `max_m`.
pub fn search_indicator_witness(k: &ToeplitzKernel, p: Exponent, eps: f64, max_m: usize) -> Result<WitnessSearch> {
    if eps.is_nan() || eps <= 0.0 {
        return Err(Error::Argument(format!("eps must be positive, got {eps}")));
    }
    let target = k.sum() - eps;
    let mut m = 1usize;
    while m <= max_m {
        let ratio = indicator_ratio(k, p, m)?;
        if ratio > target {
            return Ok(WitnessSearch { eps, m, ratio });
        }
        m *= 2;
    }
    Err(Error::NotConverged(format!("no indicator witness with ratio > S - {eps} up to M = {max_m}")))
}

/// Output of [`power_iteration_lower_bound`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerIteration {
    /// Best Rayleigh ratio `||m x||_p / ||x||_p` seen; a lower bound on `||m||_{p,p}`.
    pub value: f64,
    pub witness: TruncatedSequence,
    pub iterations: usize,
    /// Relative change of the ratio in the last step.
    pub last_rel_change: f64,
    /// Ratio of every iterate, starting with the all-ones vector.
    pub history: Vec<f64>,
}

// dual-map_p(y)_i = |y_i|^{p-1} sign(y_i), rescaled by max|y| first to stay in range.
fn dual_map(y: &[f64], p: f64) -> Vec<f64> {
    let scale = y.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    if scale == 0.0 {
        return y.to_vec();
    }
    y.iter().map(|v| (v.abs() / scale).powf(p - 1.0).copysign(*v)).collect()
}

fn normalized(mut x: Vec<f64>, p: f64) -> Vec<f64> {
    let norm = lp_norm_slice(&x, p);
    x.iter_mut().for_each(|v| *v /= norm);
    x
}

/// Nonlinear power iteration `x <- normalize(J_{p'}(m^T J_p(m x)))` from the all-ones vector.
///
/// Every iterate's ratio is a valid lower bound. For nonnegative matrices the
/// ratios ascend monotonically; the returned value is the best one seen.
pub fn power_iteration_lower_bound(m: &TruncatedMatrix, p: Exponent, cfg: &ToleranceConfig) -> Result<PowerIteration> {
    cfg.validate()?;
    if m.is_zero() {
        return Err(Error::Degenerate("the zero matrix has no positive Rayleigh ratio".into()));
    }
    let (pp, pc) = (p.p(), p.conj());
    let mut x = normalized(vec![1.0; m.dim()], pp);
    let mut y = m.matvec(&x);
    let mut ratio = lp_norm_slice(&y, pp);
    let mut history = vec![ratio];
    let (mut best, mut best_x) = (ratio, x.clone());
    let mut iterations = 0;
    let mut last_rel_change = f64::INFINITY;

    while iterations < cfg.max_iter {
        let w = m.matvec_transpose(&dual_map(&y, pp));
        if w.iter().all(|&v| v == 0.0) {
            break;
        }
        x = normalized(dual_map(&w, pc), pp);
        y = m.matvec(&x);
        let next = lp_norm_slice(&y, pp);
        iterations += 1;
        history.push(next);
        last_rel_change = (next - ratio).abs() / next;
        ratio = next;
        if ratio > best {
            best = ratio;
            best_x.clone_from(&x);
        }
        if last_rel_change < cfg.rel_tol {
            break;
        }
    }
    log::debug!("power iteration: {iterations} steps, ratio {best}, last change {last_rel_change:e}");
    Ok(PowerIteration { value: best, witness: best_x.into(), iterations, last_rel_change, history })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum UpperMethod {
    SchurClosedForm,
    SchurNumeric,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LowerMethod {
    Indicator,
    PowerIteration,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Residuals {
    /// `upper - lower`.
    pub gap: f64,
    /// `(upper - lower) / upper`.
    pub rel_gap: f64,
    pub indicator_lower: f64,
    pub power_lower: f64,
    pub power_last_rel_change: f64,
    /// Relative mismatch between `lower` and the witness ratio recomputed through `apply_toeplitz`.
    pub witness_reproduction: f64,
}

pub const CERTIFICATE_SCHEMA_VERSION: &str = "1";

/// Certified bracket `lower <= ||A||_{p,p} <= upper` with the evidence behind it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormCertificate {
    pub schema_version: String,
    pub kernel: ToeplitzKernel,
    pub p: Exponent,
    pub upper: f64,
    pub lower: f64,
    pub method_upper: UpperMethod,
    /// Schur row and column constants behind `upper`.
    pub u1: f64,
    pub u2: f64,
    pub method_lower: LowerMethod,
    pub witness: TruncatedSequence,
    /// Section size used by the lower bounds.
    pub n: usize,
    pub iterations: usize,
    pub residuals: Residuals,
}

// Slack on lower <= upper and on witness reproduction.
const CERT_REL_TOL: f64 = 1e-10;

impl NormCertificate {
    /// Checks the stored invariants: `0 <= lower <= upper (1 + 1e-10)`, nonzero
    /// witness, and a witness ratio that reproduces `lower` to 1e-10.
    pub fn invariants_hold(&self) -> bool {
        self.lower >= 0.0
            && self.lower <= self.upper * (1.0 + CERT_REL_TOL)
            && self.witness.support_len() > 0
            && self.residuals.witness_reproduction <= CERT_REL_TOL
    }

    /// Recomputes the witness ratio from scratch and checks every invariant.
    pub fn verify(&self) -> Result<()> {
        let ratio = witness_ratio(&self.kernel, &self.witness, self.p)?;
        let mismatch = (ratio - self.lower).abs() / self.lower.max(f64::MIN_POSITIVE);
        if mismatch > CERT_REL_TOL {
            return Err(Error::Internal(format!("witness ratio {ratio} does not reproduce lower bound {}", self.lower)));
        }
        if !self.invariants_hold() {
            return Err(Error::Internal(format!(
                "certificate invariants fail: lower {} upper {} reproduction {:e}",
                self.lower, self.upper, self.residuals.witness_reproduction
            )));
        }
        Ok(())
    }
}

fn witness_ratio(k: &ToeplitzKernel, x: &TruncatedSequence, p: Exponent) -> Result<f64> {
    let den = lp_norm(x, p);
    if den == 0.0 {
        return Err(Error::Degenerate("witness is the zero sequence".into()));
    }
    Ok(lp_norm(&apply_toeplitz(k, x), p) / den)
}

/// Brackets `||A||_{p,p}` for the Toeplitz operator of `k`: the closed-form
/// Schur bound `S` above, and the better of the indicator witness `1_{1..N}` and
/// power iteration on the N×N section below. The two lower bounds run concurrently.
pub fn certify_norm(k: &ToeplitzKernel, p: Exponent, n: usize, cfg: &ToleranceConfig) -> Result<NormCertificate> {
    cfg.validate()?;
    if n == 0 {
        return Err(Error::Argument("section size N must be at least 1".into()));
    }
    let upper = toeplitz_schur_bound(k, p);
    let (indicator, power) = par::join(
        || indicator_witness(k, p, n),
        || materialize(k, n).and_then(|m| power_iteration_lower_bound(&m, p, cfg)),
    );
    let (indicator, power) = (indicator?, power?);

    let (lower, method_lower, witness) = if power.value > indicator.ratio {
        (power.value, LowerMethod::PowerIteration, power.witness)
    } else {
        (indicator.ratio, LowerMethod::Indicator, indicator.witness)
    };
    let reproduced = witness_ratio(k, &witness, p)?;
    let residuals = Residuals {
        gap: upper - lower,
        rel_gap: (upper - lower) / upper,
        indicator_lower: indicator.ratio,
        power_lower: power.value,
        power_last_rel_change: power.last_rel_change,
        witness_reproduction: (reproduced - lower).abs() / lower,
    };
    Ok(NormCertificate {
        schema_version: CERTIFICATE_SCHEMA_VERSION.to_string(),
        kernel: k.clone(),
        p,
        upper,
        lower,
        method_upper: UpperMethod::SchurClosedForm,
        u1: upper,
        u2: upper,
        method_lower,
        witness,
        n,
        iterations: power.iterations,
        residuals,
    })
}

/// Both sides of the discrete q-Hardy inequality
/// `sum_n (q^{-n} sum_{k>=n} q^k x_k)^p <= (1-q)^{-p} sum_n x_n^p`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiscreteReport {
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
    /// `rhs - lhs`.
    pub margin: f64,
}

pub fn verify_discrete_inequality(
    q: QParam,
    p: Exponent,
    x: &TruncatedSequence,
    abs_tol: f64,
) -> Result<DiscreteReport> {
    x.check_nonnegative()?;
    let pp = p.p();
    // rows past the support of x vanish
    let lhs: NeumaierSum = apply_qhardy_direct(q, x).as_slice().iter().map(|y| y.powf(pp)).collect();
    let rhs: NeumaierSum = x.as_slice().iter().map(|v| v.powf(pp)).collect();
    let (lhs, rhs) = (lhs.value(), (1.0 - q.get()).powf(-pp) * rhs.value());
    Ok(DiscreteReport { lhs, rhs, holds: lhs <= rhs + abs_tol, margin: rhs - lhs })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::q_hardy_kernel;

    fn e(p: f64) -> Exponent {
        Exponent::new(p).unwrap()
    }

    fn q(v: f64) -> QParam {
        QParam::new(v).unwrap()
    }

    #[test]
    fn schur_identity_and_ones() {
        for p in [1.5, 2.0, 4.0] {
            let b = schur_bound(&TruncatedMatrix::identity(4).unwrap(), &SchurWeights::Ones, e(p)).unwrap();
            assert_eq!((b.bound, b.u1, b.u2), (1.0, 1.0, 1.0));
        }
        let ones = TruncatedMatrix::new(2, vec![1.0; 4]).unwrap();
        assert!((schur_bound(&ones, &SchurWeights::Ones, e(2.0)).unwrap().bound - 2.0).abs() < 1e-15);
    }

    #[test]
    fn schur_on_qhardy_section() {
        let m = materialize(&q_hardy_kernel(q(0.5)), 50).unwrap();
        let b = schur_bound(&m, &SchurWeights::Ones, e(2.0)).unwrap();
        let partial = 2.0 * (1.0 - 0.5f64.powi(50));
        assert!((b.u1 - partial).abs() < 1e-14);
        assert!(b.u2 <= b.u1 + 1e-15);
        assert!(b.bound <= 2.0 && b.bound > 1.999);
    }

    #[test]
    fn schur_weight_errors() {
        let m = TruncatedMatrix::identity(2).unwrap();
        let w = SchurWeights::dense(3, vec![1.0; 9]).unwrap();
        assert!(matches!(schur_bound(&m, &w, e(2.0)), Err(Error::DimensionMismatch { .. })));
        assert!(SchurWeights::dense(2, vec![1.0, 0.0, 1.0, 1.0]).is_err());
        assert!(SchurWeights::dense(2, vec![1.0; 3]).is_err());
    }

    #[test]
    fn closed_form_upper_bounds() {
        assert_eq!(toeplitz_schur_bound(&q_hardy_kernel(q(0.5)), e(2.0)), 2.0);
        assert_eq!(toeplitz_schur_bound(&ToeplitzKernel::explicit(vec![1.0]).unwrap(), e(3.0)), 1.0);
        let k = ToeplitzKernel::explicit(vec![0.5, 0.25, 0.125]).unwrap();
        assert_eq!(toeplitz_schur_bound(&k, e(1.5)), 0.875);
    }

    #[test]
    fn indicator_small_cases() {
        let k = ToeplitzKernel::explicit(vec![0.3, 0.2, 0.1]).unwrap();
        assert!((indicator_witness(&k, e(2.5), 1).unwrap().ratio - 0.3).abs() < 1e-15);
        let w = indicator_witness(&q_hardy_kernel(q(0.5)), e(2.0), 2).unwrap();
        assert!((w.ratio - 1.625f64.sqrt()).abs() < 1e-15);
        assert_eq!(w.witness.as_slice(), &[1.0, 1.0]);
        assert!(indicator_witness(&k, e(2.0), 0).is_err());
    }

    #[test]
    fn indicator_closed_form_matches_application() {
        let k = ToeplitzKernel::explicit(vec![0.4, 0.0, 0.3, 0.2]).unwrap();
        for m in [1, 2, 3, 7, 40] {
            let w = indicator_witness(&k, e(3.0), m).unwrap();
            let direct = lp_norm(&apply_toeplitz(&k, &w.witness), e(3.0)) / (m as f64).powf(1.0 / 3.0);
            assert!((w.ratio - direct).abs() < 1e-14 * direct);
        }
    }

    #[test]
    fn witness_search() {
        let k = q_hardy_kernel(q(0.5));
        let s = search_indicator_witness(&k, e(2.0), 0.01, 100_000).unwrap();
        assert_eq!(s.m, 256);
        assert!(s.ratio > 1.99);
        assert!(matches!(search_indicator_witness(&k, e(2.0), 0.01, 100), Err(Error::NotConverged(_))));
        assert!(search_indicator_witness(&k, e(2.0), 0.0, 100).is_err());
    }

    #[test]
    fn power_iteration_fixed_points() {
        let cfg = ToleranceConfig::default();
        for p in [1.5, 2.0, 5.0] {
            let r = power_iteration_lower_bound(&TruncatedMatrix::identity(6).unwrap(), e(p), &cfg).unwrap();
            assert!((r.value - 1.0).abs() < 1e-15);
            assert_eq!(r.iterations, 1);
        }
        let ones = TruncatedMatrix::new(2, vec![1.0; 4]).unwrap();
        let r = power_iteration_lower_bound(&ones, e(2.0), &cfg).unwrap();
        assert!((r.value - 2.0).abs() < 1e-14);
        let zero = TruncatedMatrix::new(3, vec![0.0; 9]).unwrap();
        assert!(matches!(power_iteration_lower_bound(&zero, e(2.0), &cfg), Err(Error::Degenerate(_))));
    }

    #[test]
    fn power_iteration_respects_max_iter() {
        let cfg = ToleranceConfig { max_iter: 3, rel_tol: 1e-300, ..Default::default() };
        let m = materialize(&q_hardy_kernel(q(0.5)), 100).unwrap();
        let r = power_iteration_lower_bound(&m, e(2.0), &cfg).unwrap();
        assert_eq!(r.iterations, 3);
        assert_eq!(r.history.len(), 4);
    }

    #[test]
    fn identity_certificate() {
        let k = ToeplitzKernel::explicit(vec![1.0, 0.0]).unwrap();
        for p in [1.5, 2.0, 3.0] {
            let c = certify_norm(&k, e(p), 1, &ToleranceConfig::default()).unwrap();
            assert_eq!((c.upper, c.lower), (1.0, 1.0));
            c.verify().unwrap();
        }
    }

    #[test]
    fn discrete_inequality_basics() {
        let r = verify_discrete_inequality(q(0.5), e(2.0), &TruncatedSequence::unit(1), 1e-14).unwrap();
        assert_eq!((r.lhs, r.rhs), (1.0, 4.0));
        assert!(r.holds);
        let r = verify_discrete_inequality(q(0.5), e(2.0), &TruncatedSequence::zeros(3), 1e-14).unwrap();
        assert_eq!((r.lhs, r.rhs, r.margin), (0.0, 0.0, 0.0));
        assert!(r.holds);
        let neg = TruncatedSequence::new(vec![1.0, -1.0]);
        assert!(matches!(verify_discrete_inequality(q(0.5), e(2.0), &neg, 1e-14), Err(Error::Argument(_))));
    }
}
