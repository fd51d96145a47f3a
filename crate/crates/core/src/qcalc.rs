//! q-calculus: the q-bracket, Jackson integrals on geometric grids, and the
//! weighted q-Hardy integral inequality on `[0, 1]` together with its exact
//! reduction to a discrete q-Hardy sum.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::{Exponent, NeumaierSum, QParam, TruncatedSequence};

/// The q-analogue `[alpha]_q = (1 - q^alpha) / (1 - q)`.
pub fn q_bracket(alpha: f64, q: QParam) -> f64 {
    let q = q.get();
    -(alpha * q.ln()).exp_m1() / (1.0 - q)
}

/// How the samples beyond the truncation index are modelled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TailMode {
    /// Samples past the last one are zero.
    Zero,
    /// Samples continue geometrically with the ratio of the last two samples.
    GeometricExtrapolate,
}

/// Samples `f(q^k * base)` for `k = 0..=K` on the geometric grid used by the Jackson integral.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridFunction {
    base: f64,
    q: QParam,
    samples: Vec<f64>,
    tail_mode: TailMode,
}

/// Smallest `K` with `q^K * max_abs < tail_threshold`.
pub fn truncation_depth(q: QParam, max_abs: f64, tail_threshold: f64) -> usize {
    if max_abs <= 0.0 || max_abs < tail_threshold {
        return 0;
    }
    let q = q.get();
    let guess = ((tail_threshold / max_abs).ln() / q.ln()).floor().max(0.0) as usize;
    let mut k = guess.saturating_sub(2);
    while q.powf(k as f64) * max_abs >= tail_threshold {
        k += 1;
    }
    k
}

// Guard for sample_until on functions that do not decay fast enough.
const MAX_GRID_DEPTH: usize = 1 << 20;

impl GridFunction {
    pub fn new(base: f64, q: QParam, samples: Vec<f64>, tail_mode: TailMode) -> Result<Self> {
        if !(base.is_finite() && base > 0.0) {
            return Err(Error::Argument(format!("grid base must be positive, got {base}")));
        }
        if samples.is_empty() {
            return Err(Error::Argument("a grid function needs at least one sample".into()));
        }
        if let Some(i) = samples.iter().position(|v| !v.is_finite()) {
            return Err(Error::Argument(format!("sample {i} is not finite")));
        }
        let g = Self { base, q, samples, tail_mode };
        if tail_mode == TailMode::GeometricExtrapolate {
            match g.tail_ratio() {
                Some(r) if r.abs() < 1.0 => {}
                Some(r) => {
                    return Err(Error::Argument(format!(
                        "geometric tail needs |ratio| < 1, last two samples give {r}"
                    )))
                }
                None => {
                    return Err(Error::Argument(
                        "geometric tail needs two samples with a nonzero second-to-last".into(),
                    ))
                }
            }
        }
        Ok(g)
    }

    /// Samples `f` at `q^k * base` for `k = 0..=k_max`.
    pub fn sample<F: Fn(f64) -> f64>(base: f64, q: QParam, k_max: usize, f: F) -> Result<Self> {
        let samples = (0..=k_max).map(|k| f(base * q.get().powi(k as i32))).collect();
        Self::new(base, q, samples, TailMode::Zero)
    }

    /// Samples `f` until `q^K * max_{k<=K} |f(q^k base)|` drops below `tail_threshold`.
    pub fn sample_until<F: Fn(f64) -> f64>(
        base: f64,
        q: QParam,
        tail_threshold: f64,
        f: F,
    ) -> Result<Self> {
        let mut samples = Vec::new();
        let mut running_max = 0.0_f64;
        for k in 0..MAX_GRID_DEPTH {
            let weight = q.get().powi(k as i32);
            let v = f(base * weight);
            running_max = running_max.max(v.abs());
            samples.push(v);
            if weight * running_max < tail_threshold {
                return Self::new(base, q, samples, TailMode::Zero);
            }
        }
        Err(Error::Argument(format!(
            "samples did not decay below {tail_threshold} within {MAX_GRID_DEPTH} grid points"
        )))
    }

    pub fn base(&self) -> f64 {
        self.base
    }

    pub fn q(&self) -> QParam {
        self.q
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn tail_mode(&self) -> TailMode {
        self.tail_mode
    }

    /// Largest admissible truncation index.
    pub fn max_index(&self) -> usize {
        self.samples.len() - 1
    }

    /// The default truncation index for this grid's sample magnitudes.
    pub fn default_truncation(&self, tail_threshold: f64) -> usize {
        let max_abs = self.samples.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        truncation_depth(self.q, max_abs, tail_threshold).min(self.max_index())
    }

    fn tail_ratio(&self) -> Option<f64> {
        let n = self.samples.len();
        if n < 2 {
            return None;
        }
        let (prev, last) = (self.samples[n - 2], self.samples[n - 1]);
        if prev != 0.0 {
            Some(last / prev)
        } else if last == 0.0 {
            Some(0.0)
        } else {
            None
        }
    }

    fn check_index(&self, k: usize) -> Result<()> {
        if k > self.max_index() {
            return Err(Error::Argument(format!(
                "truncation index {k} needs {} samples, grid has {}",
                k + 1,
                self.samples.len()
            )));
        }
        Ok(())
    }
}

/// Truncated Jackson sum together with an estimate of the omitted tail.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JacksonValue {
    pub value: f64,
    pub tail_residual: f64,
}

/// `(1 - q) x sum_{k=0}^{K} q^k f(q^k x)` with `x = f.base()`.
///
/// In geometric mode the residual is the geometric series continuing from
/// sample `K` with the grid's extrapolation ratio; in zero mode it is zero.
pub fn jackson_integral(f: &GridFunction, k_max: usize) -> Result<JacksonValue> {
    f.check_index(k_max)?;
    let q = f.q.get();
    let acc: NeumaierSum = f.samples[..=k_max]
        .iter()
        .enumerate()
        .map(|(k, v)| q.powi(k as i32) * v)
        .collect();
    let scale = (1.0 - q) * f.base;
    let tail_residual = match f.tail_mode {
        TailMode::Zero => 0.0,
        TailMode::GeometricExtrapolate => {
            let step = q * f.tail_ratio().map_or(0.0, f64::abs);
            scale * q.powi(k_max as i32) * f.samples[k_max].abs() * step / (1.0 - step)
        }
    };
    Ok(JacksonValue { value: scale * acc.value(), tail_residual })
}

/// Parameters `(p, alpha, q)` of the weighted q-Hardy integral inequality.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HardyParams {
    pub p: Exponent,
    pub alpha: f64,
    pub q: QParam,
}

impl HardyParams {
    pub fn new(p: Exponent, alpha: f64, q: QParam) -> Result<Self> {
        let limit = 1.0 - 1.0 / p.p();
        if !alpha.is_finite() || alpha >= limit {
            return Err(Error::Domain(format!("alpha must satisfy alpha < 1 - 1/p = {limit}, got {alpha}")));
        }
        Ok(Self { p, alpha, q })
    }

    /// `1 - 1/p - alpha`, positive for admissible parameters.
    pub fn gap(&self) -> f64 {
        1.0 - 1.0 / self.p.p() - self.alpha
    }

    /// The sharp constant `[1 - 1/p - alpha]_q^{-p}`.
    pub fn constant(&self) -> f64 {
        q_bracket(self.gap(), self.q).powf(-self.p.p())
    }
}

/// How a computed `lhs <= rhs` pair relates to the strict inequality.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    /// `lhs <= rhs - max(abs_tol, 1e-12 rhs)`.
    Strict,
    /// Equal within the floating-point margin (e.g. `f = 0`).
    Equality,
    Violated,
}

/// Classifies `lhs` against `rhs` with the floating-point margin used for strict inequalities.
pub fn compare_sides(lhs: f64, rhs: f64, abs_tol: f64) -> Verdict {
    let margin = abs_tol.max(1e-12 * rhs.abs());
    if lhs <= rhs - margin {
        Verdict::Strict
    } else if lhs <= rhs + margin {
        Verdict::Equality
    } else {
        Verdict::Violated
    }
}

/// The two sides of the integral inequality, evaluated on a truncated grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Theorem1Sides {
    pub lhs: f64,
    pub rhs: f64,
}

impl Theorem1Sides {
    pub fn verdict(&self, abs_tol: f64) -> Verdict {
        compare_sides(self.lhs, self.rhs, abs_tol)
    }
}

/// Evaluates both sides of
/// `int_0^1 x^{p(alpha-1)} (int_0^x t^{-alpha} f(t) d_q t)^p d_q x < [1-1/p-alpha]_q^{-p} int_0^1 f^p d_q t`
/// with every Jackson sum truncated at grid index `k_max` (samples past it count as zero).
///
/// The left side is computed as nested Jackson sums: for each outer node
/// `x = q^n` the inner integral runs over the nodes `q^k x`, `k = 0..=k_max - n`.
/// The powers of `x` in `x^{alpha-1} int_0^x t^{-alpha} f d_q t` cancel, leaving
/// `(1-q) sum_k q^{k(1-alpha)} f(q^{k+n})`; cancelling before evaluation keeps deep
/// grid nodes from underflowing.
pub fn theorem1_sides(f: &GridFunction, params: &HardyParams, k_max: usize) -> Result<Theorem1Sides> {
    if f.base != 1.0 {
        return Err(Error::Argument(format!("the inequality lives on [0, 1]; grid base is {}", f.base)));
    }
    if f.q != params.q {
        return Err(Error::Argument("grid q differs from the inequality's q".into()));
    }
    f.check_index(k_max)?;
    if let Some(i) = f.samples.iter().position(|&v| v < 0.0) {
        return Err(Error::Argument(format!("sample {i} is negative")));
    }
    let q = params.q.get();
    let p = params.p.p();
    let alpha = params.alpha;
    let log_q = q.ln();

    let mut outer = NeumaierSum::new();
    for n in 0..=k_max {
        // node q^k carries Jackson weight q^k and integrand factor (q^k x)^{-alpha} x^{alpha}
        let scaled_inner: NeumaierSum = (0..=k_max - n)
            .map(|k| (k as f64 * (1.0 - alpha) * log_q).exp() * f.samples[k + n])
            .collect();
        let integrand = ((1.0 - q) * scaled_inner.value()).powf(p);
        outer += q.powi(n as i32) * integrand;
    }
    let lhs = (1.0 - q) * outer.value();

    let powered = GridFunction {
        samples: f.samples[..=k_max].iter().map(|v| v.powf(p)).collect(),
        tail_mode: TailMode::Zero,
        ..f.clone()
    };
    let rhs = params.constant() * jackson_integral(&powered, k_max)?.value;
    Ok(Theorem1Sides { lhs, rhs })
}

/// The integral inequality rewritten as a discrete q-Hardy sum with ratio `q_eff`.
///
/// Sample `f(q^j)` (grid index `j = 0, 1, ...`) becomes `c_{j+1} = q^{j/p} f(q^j)`;
/// the shift to 1-based indexing does not change any sum. With
/// `q_eff = q^{1 - 1/p - alpha}` the integral sides equal
/// `(1-q)^{p+1} sum_n (sum_{j>=n} q_eff^{j-n} c_j)^p` and
/// `(1-q)^{p+1} (1 - q_eff)^{-p} sum_j c_j^p`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscreteReduction {
    pub q_eff: f64,
    pub coeffs: TruncatedSequence,
    q: f64,
    p: f64,
}

impl DiscreteReduction {
    /// `sum_n (sum_{j>=n} q_eff^{j-n} c_j)^p`, the discrete q-Hardy left side.
    pub fn discrete_lhs(&self) -> f64 {
        let c = self.coeffs.as_slice();
        let mut suffix = 0.0;
        let mut rows = vec![0.0; c.len()];
        for (row, &cj) in rows.iter_mut().zip(c).rev() {
            suffix = cj + self.q_eff * suffix;
            *row = suffix;
        }
        rows.iter().map(|r| r.powf(self.p)).collect::<NeumaierSum>().value()
    }

    /// `(1 - q_eff)^{-p} sum_j c_j^p`, the discrete q-Hardy right side.
    pub fn discrete_rhs(&self) -> f64 {
        let s: NeumaierSum = self.coeffs.as_slice().iter().map(|c| c.powf(self.p)).collect();
        (1.0 - self.q_eff).powf(-self.p) * s.value()
    }

    fn integral_scale(&self) -> f64 {
        (1.0 - self.q).powf(self.p + 1.0)
    }

    /// The integral inequality's left side, recovered from the discrete form.
    pub fn lhs(&self) -> f64 {
        self.integral_scale() * self.discrete_lhs()
    }

    /// The integral inequality's right side, recovered from the discrete form.
    pub fn rhs(&self) -> f64 {
        self.integral_scale() * self.discrete_rhs()
    }
}

/// Maps the integral inequality for `f` onto the discrete q-Hardy inequality with
/// `q` replaced by `q_eff = q^{1-1/p-alpha}`, using every sample of the grid.
pub fn reduce_theorem1_to_discrete(f: &GridFunction, params: &HardyParams) -> Result<DiscreteReduction> {
    let q = params.q.get();
    let p = params.p.p();
    let q_eff = q.powf(params.gap());
    if !(q_eff > 0.0 && q_eff < 1.0) {
        return Err(Error::Internal(format!("effective ratio {q_eff} left (0, 1)")));
    }
    let coeffs = f
        .samples
        .iter()
        .enumerate()
        .map(|(j, v)| q.powf(j as f64 / p) * v)
        .collect::<Vec<_>>()
        .into();
    Ok(DiscreteReduction { q_eff, coeffs, q, p })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(v: f64) -> QParam {
        QParam::new(v).unwrap()
    }

    fn params(p: f64, alpha: f64, qv: f64) -> HardyParams {
        HardyParams::new(Exponent::new(p).unwrap(), alpha, q(qv)).unwrap()
    }

    #[test]
    fn bracket_values() {
        for qv in [0.1, 0.5, 0.9] {
            assert!((q_bracket(1.0, q(qv)) - 1.0).abs() < 1e-15);
            assert_eq!(q_bracket(0.0, q(qv)), 0.0);
        }
        assert!((q_bracket(2.0, q(0.5)) - 1.5).abs() < 1e-15);
    }

    #[test]
    fn bracket_tends_to_alpha() {
        for alpha in [0.5, 2.0, 3.0] {
            let b = q_bracket(alpha, q(0.999));
            assert!((b - alpha).abs() < 0.01 * alpha.abs() * (alpha - 1.0).abs());
        }
    }

    #[test]
    fn jackson_of_constants_and_monomials() {
        let one = GridFunction::sample(1.0, q(0.5), 60, |_| 1.0).unwrap();
        assert!((jackson_integral(&one, 60).unwrap().value - 1.0).abs() < 1e-12);
        let t = GridFunction::sample(1.0, q(0.5), 60, |t| t).unwrap();
        assert!((jackson_integral(&t, 60).unwrap().value - 2.0 / 3.0).abs() < 1e-12);
        let t3 = GridFunction::sample(1.0, q(0.3), 60, |t| t.powi(3)).unwrap();
        let expect = 1.0 / q_bracket(4.0, q(0.3));
        assert!((jackson_integral(&t3, 60).unwrap().value - expect).abs() < 1e-14);
    }

    #[test]
    fn jackson_scales_with_base() {
        // int_0^2 1 d_q t = 2
        let g = GridFunction::sample(2.0, q(0.5), 80, |_| 1.0).unwrap();
        assert!((jackson_integral(&g, 80).unwrap().value - 2.0).abs() < 1e-12);
    }

    #[test]
    fn jackson_rejects_short_grids() {
        let g = GridFunction::sample(1.0, q(0.5), 3, |_| 1.0).unwrap();
        assert!(matches!(jackson_integral(&g, 4), Err(Error::Argument(_))));
        assert!(jackson_integral(&g, 3).is_ok());
        assert!(GridFunction::new(1.0, q(0.5), vec![], TailMode::Zero).is_err());
        assert!(GridFunction::new(0.0, q(0.5), vec![1.0], TailMode::Zero).is_err());
    }

    #[test]
    fn geometric_tail_bounds_truncation_error() {
        // f(t) = t sampled on a short grid; the tail ratio is exactly q.
        let qv = q(0.5);
        let short = GridFunction::sample(1.0, qv, 10, |t| t).unwrap();
        let geo = GridFunction::new(1.0, qv, short.samples().to_vec(), TailMode::GeometricExtrapolate).unwrap();
        let j = jackson_integral(&geo, 10).unwrap();
        let exact = 1.0 / q_bracket(2.0, qv);
        assert!((j.value + j.tail_residual - exact).abs() < 1e-15);
        assert_eq!(jackson_integral(&short, 10).unwrap().tail_residual, 0.0);
    }

    #[test]
    fn geometric_tail_needs_contracting_ratio() {
        assert!(GridFunction::new(1.0, q(0.5), vec![1.0, 1.0], TailMode::GeometricExtrapolate).is_err());
        assert!(GridFunction::new(1.0, q(0.5), vec![1.0], TailMode::GeometricExtrapolate).is_err());
        assert!(GridFunction::new(1.0, q(0.5), vec![0.0, 1.0], TailMode::GeometricExtrapolate).is_err());
        assert!(GridFunction::new(1.0, q(0.5), vec![1.0, 0.0], TailMode::GeometricExtrapolate).is_ok());
    }

    #[test]
    fn truncation_depth_is_minimal() {
        for (qv, m) in [(0.5, 1.0), (0.9, 3.0), (0.25, 1e-3)] {
            let k = truncation_depth(q(qv), m, 1e-16);
            assert!(qv.powf(k as f64) * m < 1e-16);
            assert!(k == 0 || qv.powf(k as f64 - 1.0) * m >= 1e-16);
        }
        assert_eq!(truncation_depth(q(0.5), 0.0, 1e-16), 0);
        let g = GridFunction::sample_until(1.0, q(0.5), 1e-16, |_| 1.0).unwrap();
        assert_eq!(g.max_index(), truncation_depth(q(0.5), 1.0, 1e-16));
    }

    #[test]
    fn alpha_must_stay_below_limit() {
        let p = Exponent::new(2.0).unwrap();
        assert!(matches!(HardyParams::new(p, 0.5, q(0.5)), Err(Error::Domain(_))));
        assert!(HardyParams::new(p, 0.6, q(0.5)).is_err());
        assert!(HardyParams::new(p, 0.49, q(0.5)).is_ok());
    }

    #[test]
    fn constant_function_spot_values() {
        let pr = params(2.0, 0.0, 0.25);
        let f = GridFunction::sample_until(1.0, pr.q, 1e-16, |_| 1.0).unwrap();
        let s = theorem1_sides(&f, &pr, f.max_index()).unwrap();
        assert!((s.lhs - 1.0).abs() < 1e-10, "{}", s.lhs);
        assert!((s.rhs - 2.25).abs() < 1e-10, "{}", s.rhs);
        assert_eq!(s.verdict(1e-14), Verdict::Strict);
    }

    #[test]
    fn zero_function_is_equality() {
        let pr = params(2.0, 0.0, 0.5);
        let f = GridFunction::sample(1.0, pr.q, 20, |_| 0.0).unwrap();
        let s = theorem1_sides(&f, &pr, 20).unwrap();
        assert_eq!((s.lhs, s.rhs), (0.0, 0.0));
        assert_eq!(s.verdict(1e-14), Verdict::Equality);
    }

    #[test]
    fn theorem1_argument_errors() {
        let pr = params(2.0, 0.0, 0.5);
        let neg = GridFunction::sample(1.0, pr.q, 5, |t| t - 0.5).unwrap();
        assert!(matches!(theorem1_sides(&neg, &pr, 5), Err(Error::Argument(_))));
        let off = GridFunction::sample(2.0, pr.q, 5, |_| 1.0).unwrap();
        assert!(theorem1_sides(&off, &pr, 5).is_err());
        let other_q = GridFunction::sample(1.0, q(0.3), 5, |_| 1.0).unwrap();
        assert!(theorem1_sides(&other_q, &pr, 5).is_err());
    }

    /// Independent double sum straight from the q-integral definition, with q^k
    /// built by repeated multiplication instead of powi.
    fn theorem1_lhs_oracle(samples: &[f64], p: f64, alpha: f64, q: f64) -> f64 {
        let k = samples.len();
        let mut total = 0.0;
        let mut x = 1.0_f64;
        for n in 0..k {
            let mut inner = 0.0;
            let mut t = x;
            for s in &samples[n..k] {
                inner += t * t.powf(-alpha) * s;
                t *= q;
            }
            inner *= 1.0 - q;
            total += (1.0 - q) * x * x.powf(p * (alpha - 1.0)) * inner.powf(p);
            x *= q;
        }
        total
    }

    #[test]
    fn linear_function_below_bound() {
        let pr = params(2.0, 0.0, 0.5);
        let f = GridFunction::sample_until(1.0, pr.q, 1e-16, |t| t).unwrap();
        let s = theorem1_sides(&f, &pr, f.max_index()).unwrap();
        let oracle = theorem1_lhs_oracle(f.samples(), 2.0, 0.0, 0.5);
        assert!((s.lhs - oracle).abs() < 1e-12 * oracle);
        // rhs = [1/2]_q^{-2} * 1/[3]_q
        let rhs = q_bracket(0.5, pr.q).powi(-2) / q_bracket(3.0, pr.q);
        assert!((s.rhs - rhs).abs() < 1e-12 * rhs);
        assert!(s.lhs < s.rhs);
    }

    #[test]
    fn reduction_constants() {
        let pr = params(2.0, 0.0, 0.25);
        let f = GridFunction::sample(1.0, pr.q, 30, |_| 1.0).unwrap();
        let red = reduce_theorem1_to_discrete(&f, &pr).unwrap();
        assert!((red.q_eff - 0.5).abs() < 1e-15);
        let s = theorem1_sides(&f, &pr, 30).unwrap();
        assert!((red.lhs() - s.lhs).abs() < 1e-10 * s.lhs);
        assert!((red.rhs() - s.rhs).abs() < 1e-10 * s.rhs);

        // alpha = -1/p gives q_eff = q
        let pr = params(3.0, -1.0 / 3.0, 0.4);
        let f = GridFunction::sample(1.0, pr.q, 4, |t| 1.0 + t).unwrap();
        let red = reduce_theorem1_to_discrete(&f, &pr).unwrap();
        assert!((red.q_eff - 0.4).abs() < 1e-15);
        for j in 0..5 {
            let expect = 0.4f64.powf(j as f64 / 3.0) * (1.0 + 0.4f64.powi(j as i32));
            assert!((red.coeffs.get(j + 1) - expect).abs() < 1e-15);
        }
    }
}
