//! Two-sample hypothesis testing on raw force samples.
//!
//! The test is the classical pooled-variance Student t-test, one-sided:
//! the alternative is mean(a) > mean(b), under the null of equal means and
//! equal but unknown variances. Force samples are treated as independent
//! draws even though consecutive tunnel samples are autocorrelated; callers
//! should be aware that the nominal significance level is optimistic for
//! raw 600 Hz series.
//!
//! The Student upper-tail probability is computed through the regularized
//! incomplete beta function (continued-fraction evaluation), which stays
//! accurate for the very large sample counts produced by pooled traces
//! (absolute error below 1e-6 up to ~1e6 degrees of freedom).

use serde::{Deserialize, Serialize};

use crate::trace::ForceTrace;

#[derive(Debug, thiserror::Error)]
pub enum StatsError {
    #[error("each sample needs at least 2 observations, got {0} and {1}")]
    TooFewObservations(usize, usize),
    #[error("significance level must be in (0, 1), got {0}")]
    BadAlpha(f64),
    #[error("statistical tests require unfiltered traces; {0} trace is low-pass filtered")]
    FilteredInput(&'static str),
}

/// One-sided test direction: alternative hypothesis mean(a) > mean(b).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Tail {
    MeanAGreater,
}

/// Outcome of a one-sided two-sample t-test.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TTestResult {
    pub t_statistic: f64,
    pub degrees_of_freedom: u64,
    pub p_value: f64,
    pub reject_null: bool,
    pub alpha: f64,
    pub tail: Tail,
}

/// Pooled-variance one-sided t-test of mean(a) > mean(b).
///
/// Zero pooled variance with equal means yields t = 0, p = 0.5 by
/// convention; with distinct means the statistic is ±∞ and p is 0 or 1.
pub fn t_test_one_sided(a: &[f64], b: &[f64], alpha: f64) -> Result<TTestResult, StatsError> {
    if a.len() < 2 || b.len() < 2 {
        return Err(StatsError::TooFewObservations(a.len(), b.len()));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(StatsError::BadAlpha(alpha));
    }
    let (n1, n2) = (a.len() as f64, b.len() as f64);
    let mean_a = a.iter().sum::<f64>() / n1;
    let mean_b = b.iter().sum::<f64>() / n2;
    let ss_a: f64 = a.iter().map(|x| (x - mean_a).powi(2)).sum();
    let ss_b: f64 = b.iter().map(|x| (x - mean_b).powi(2)).sum();
    let dof = a.len() as u64 + b.len() as u64 - 2;
    let pooled_var = (ss_a + ss_b) / dof as f64;
    let diff = mean_a - mean_b;
    // Constant inputs leave rounding residue in both the variance and the
    // mean difference; judge degeneracy relative to the data scale so a
    // noiseless pair of equal-level traces lands on the p = 0.5 convention.
    let scale = mean_a.abs().max(mean_b.abs());
    let degenerate = pooled_var.sqrt() <= 1e-12 * scale || pooled_var == 0.0;
    let t = if !degenerate {
        diff / (pooled_var * (1.0 / n1 + 1.0 / n2)).sqrt()
    } else if diff.abs() <= 1e-12 * scale {
        0.0
    } else {
        diff.signum() * f64::INFINITY
    };
    let p = p_value_student_upper(t, dof);
    Ok(TTestResult {
        t_statistic: t,
        degrees_of_freedom: dof,
        p_value: p,
        reject_null: p < alpha,
        alpha,
        tail: Tail::MeanAGreater,
    })
}

/// Trace-level test; refuses filtered inputs so conclusions always rest on
/// raw force data.
pub fn t_test_traces(
    a: &ForceTrace,
    b: &ForceTrace,
    alpha: f64,
) -> Result<TTestResult, StatsError> {
    if a.filtered {
        return Err(StatsError::FilteredInput("first"));
    }
    if b.filtered {
        return Err(StatsError::FilteredInput("second"));
    }
    t_test_one_sided(&a.samples, &b.samples, alpha)
}

/// Upper-tail probability P(T > t) of Student's t-distribution.
pub fn p_value_student_upper(t: f64, dof: u64) -> f64 {
    assert!(dof >= 1, "degrees of freedom must be >= 1");
    if t.is_nan() {
        return f64::NAN;
    }
    if t.is_infinite() {
        return if t > 0.0 { 0.0 } else { 1.0 };
    }
    let v = dof as f64;
    let x = v / (v + t * t);
    // P(|T| > |t|) = I_x(v/2, 1/2); halve for one tail, reflect for t < 0.
    let half_two_sided = 0.5 * regularized_incomplete_beta(x, 0.5 * v, 0.5);
    if t >= 0.0 {
        half_two_sided
    } else {
        1.0 - half_two_sided
    }
}

/// ln Γ(x) for x > 0, Lanczos approximation.
pub fn ln_gamma(x: f64) -> f64 {
    assert!(x > 0.0, "ln_gamma domain is x > 0, got {x}");
    const COEFFS: [f64; 6] = [
        76.18009172947146,
        -86.50532032941677,
        24.01409824083091,
        -1.231739572450155,
        0.1208650973866179e-2,
        -0.5395239384953e-5,
    ];
    let mut series = 1.000000000190015;
    for (i, c) in COEFFS.iter().enumerate() {
        series += c / (x + i as f64 + 1.0);
    }
    let tmp = x + 5.5;
    (x + 0.5) * tmp.ln() - tmp + (2.5066282746310005 * series / x).ln()
}

/// Regularized incomplete beta function I_x(a, b), continued-fraction form.
pub fn regularized_incomplete_beta(x: f64, a: f64, b: f64) -> f64 {
    assert!((0.0..=1.0).contains(&x), "x must be in [0, 1], got {x}");
    assert!(a > 0.0 && b > 0.0, "shape parameters must be positive");
    if x == 0.0 {
        return 0.0;
    }
    if x == 1.0 {
        return 1.0;
    }
    let ln_front =
        ln_gamma(a + b) - ln_gamma(a) - ln_gamma(b) + a * x.ln() + b * (1.0 - x).ln();
    let front = ln_front.exp();
    // Use the representation that converges fastest.
    if x < (a + 1.0) / (a + b + 2.0) {
        front * beta_continued_fraction(x, a, b) / a
    } else {
        1.0 - front * beta_continued_fraction(1.0 - x, b, a) / b
    }
}

/// Modified Lentz evaluation of the incomplete-beta continued fraction.
fn beta_continued_fraction(x: f64, a: f64, b: f64) -> f64 {
    const MAX_ITER: usize = 500;
    const EPS: f64 = 1e-15;
    const TINY: f64 = 1e-300;

    let qab = a + b;
    let qap = a + 1.0;
    let qam = a - 1.0;
    let mut c = 1.0;
    let mut d = 1.0 - qab * x / qap;
    if d.abs() < TINY {
        d = TINY;
    }
    d = 1.0 / d;
    let mut h = d;
    for m in 1..=MAX_ITER {
        let m = m as f64;
        let m2 = 2.0 * m;
        // Even step.
        let numerator = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + numerator * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + numerator / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        h *= d * c;
        // Odd step.
        let numerator = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + numerator * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + numerator / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let delta = d * c;
        h *= delta;
        if (delta - 1.0).abs() < EPS {
            return h;
        }
    }
    h
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trace::{RigConditions, TraceMode};

    #[test]
    fn identical_samples_give_half_p_and_no_rejection() {
        let a = [2.0, 2.0, 2.0];
        let r = t_test_one_sided(&a, &a, 0.01).unwrap();
        assert_eq!(r.t_statistic, 0.0);
        assert_eq!(r.p_value, 0.5);
        assert!(!r.reject_null);
        assert_eq!(r.degrees_of_freedom, 4);
    }

    #[test]
    fn clearly_separated_samples_reject() {
        // Frozen against an external reference implementation:
        // t = 21.3200716356, one-sided p = 1.2319617459e-8.
        let a = [2.0, 2.1, 1.9, 2.0, 2.05];
        let b = [1.0, 1.1, 0.9, 1.0, 1.05];
        let r = t_test_one_sided(&a, &b, 0.01).unwrap();
        assert!((r.t_statistic - 21.32007163556104).abs() < 1e-9, "t = {}", r.t_statistic);
        assert!((r.p_value - 1.2319617458846728e-8).abs() < 1e-14, "p = {}", r.p_value);
        assert!(r.reject_null);
    }

    #[test]
    fn student_upper_tail_reference_points() {
        // Frozen external reference values.
        assert!((p_value_student_upper(1.0, 10) - 0.17044656615103).abs() < 1e-10);
        assert!((p_value_student_upper(2.0, 36_000) - 0.02275388137032).abs() < 1e-9);
        assert!((p_value_student_upper(0.5, 1_000_000) - 0.30853759373619).abs() < 1e-8);
        assert!((p_value_student_upper(-1.5, 7) - 0.911350756505015).abs() < 1e-10);
        assert!((p_value_student_upper(8.0, 179_998) - 6.257548193e-16).abs() < 1e-22);
    }

    #[test]
    fn upper_tail_limits() {
        assert_eq!(p_value_student_upper(0.0, 3), 0.5);
        assert_eq!(p_value_student_upper(f64::INFINITY, 3), 0.0);
        // Heavy low-dof tail, frozen external reference.
        assert!((p_value_student_upper(60.0, 5) - 1.2168188795e-8).abs() < 1e-14);
    }

    #[test]
    fn antisymmetry_under_sample_swap() {
        let a = [1.0, 1.3, 0.8, 1.1];
        let b = [0.9, 1.0, 1.2];
        let ab = t_test_one_sided(&a, &b, 0.01).unwrap();
        let ba = t_test_one_sided(&b, &a, 0.01).unwrap();
        assert!((ab.t_statistic + ba.t_statistic).abs() < 1e-12);
        assert!((ab.p_value + ba.p_value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rejection_is_scale_invariant() {
        let a = [2.0, 2.3, 1.8, 2.1, 2.2];
        let b = [1.5, 1.6, 1.4, 1.55, 1.5];
        let r1 = t_test_one_sided(&a, &b, 0.01).unwrap();
        let scale = 37.5;
        let a2: Vec<f64> = a.iter().map(|x| x * scale).collect();
        let b2: Vec<f64> = b.iter().map(|x| x * scale).collect();
        let r2 = t_test_one_sided(&a2, &b2, 0.01).unwrap();
        assert!((r1.t_statistic - r2.t_statistic).abs() < 1e-9);
        assert!((r1.p_value - r2.p_value).abs() < 1e-12);
        assert_eq!(r1.reject_null, r2.reject_null);
    }

    #[test]
    fn shifting_sample_a_up_does_not_decrease_t() {
        let a = [1.0, 1.2, 0.9, 1.1];
        let b = [1.05, 1.15, 0.95];
        let base = t_test_one_sided(&a, &b, 0.01).unwrap();
        let shifted: Vec<f64> = a.iter().map(|x| x + 0.5).collect();
        let up = t_test_one_sided(&shifted, &b, 0.01).unwrap();
        assert!(up.t_statistic >= base.t_statistic);
    }

    #[test]
    fn zero_variance_distinct_means_is_certain() {
        let a = [2.0, 2.0, 2.0];
        let b = [1.0, 1.0, 1.0];
        let r = t_test_one_sided(&a, &b, 0.01).unwrap();
        assert_eq!(r.p_value, 0.0);
        assert!(r.reject_null);
    }

    #[test]
    fn too_few_observations_errors() {
        assert!(t_test_one_sided(&[1.0], &[1.0, 2.0], 0.01).is_err());
    }

    #[test]
    fn filtered_trace_is_refused() {
        let mut a = ForceTrace::new(vec![1.0; 32], 600.0, TraceMode::Absolute, RigConditions::default());
        let b = a.clone();
        a.filtered = true;
        match t_test_traces(&a, &b, 0.01) {
            Err(StatsError::FilteredInput(which)) => assert_eq!(which, "first"),
            other => panic!("expected filtered-input error, got {other:?}"),
        }
    }
}
