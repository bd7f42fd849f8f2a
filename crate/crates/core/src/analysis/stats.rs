//! Binomial confidence limits and contingency tests.

use serde::{Deserialize, Serialize};
use statrs::distribution::{Beta, ChiSquared, ContinuousCDF};

/// Confidence level used for every reported interval.
pub const CONFIDENCE: f64 = 0.95;

fn beta_quantile(a: f64, b: f64, p: f64) -> f64 {
    Beta::new(a, b).expect("positive shape parameters").inverse_cdf(p)
}

/// One-sided lower Clopper-Pearson limit at `level`.
pub fn lower_limit(successes: u64, trials: u64, level: f64) -> f64 {
    if successes == 0 || trials == 0 {
        return 0.0;
    }
    beta_quantile(successes as f64, (trials - successes + 1) as f64, 1.0 - level)
}

/// One-sided upper Clopper-Pearson limit at `level`.
pub fn upper_limit(successes: u64, trials: u64, level: f64) -> f64 {
    if trials == 0 || successes >= trials {
        return 1.0;
    }
    beta_quantile((successes + 1) as f64, (trials - successes) as f64, level)
}

/// Two-sided Clopper-Pearson interval at `level`.
pub fn clopper_pearson(successes: u64, trials: u64, level: f64) -> (f64, f64) {
    let tail = (1.0 + level) / 2.0;
    (lower_limit(successes, trials, tail), upper_limit(successes, trials, tail))
}

/// Empirical frequency with its interval.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Proportion {
    pub count: u64,
    pub trials: u64,
    pub rate: f64,
    pub ci_low: f64,
    pub ci_high: f64,
}

impl Proportion {
    pub fn new(count: u64, trials: u64) -> Self {
        let (ci_low, ci_high) = clopper_pearson(count, trials, CONFIDENCE);
        Self { count, trials, rate: if trials == 0 { 0.0 } else { count as f64 / trials as f64 }, ci_low, ci_high }
    }
}

/// Verdict of an empirical rate against an upper bound.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundComparison {
    pub bound: f64,
    /// `sqrt(b (1 - b) / trials)` at `b = min(bound, 1)`.
    pub sigma: f64,
    pub within_3sigma: bool,
    /// One-sided lower 95% limit.
    pub lower_limit: f64,
    /// The lower limit exceeds the bound.
    pub violation: bool,
}

pub fn compare_to_bound(count: u64, trials: u64, bound: f64) -> BoundComparison {
    let b = bound.clamp(0.0, 1.0);
    let sigma = if trials == 0 { 0.0 } else { (b * (1.0 - b) / trials as f64).sqrt() };
    let rate = if trials == 0 { 0.0 } else { count as f64 / trials as f64 };
    let lower = lower_limit(count, trials, CONFIDENCE);
    BoundComparison { bound, sigma, within_3sigma: rate <= bound + 3.0 * sigma, lower_limit: lower, violation: lower > bound }
}

/// Pearson chi-square independence test on a contingency table; returns the p-value.
///
/// Rows or columns with zero total are dropped.
pub fn chi_square_independence(table: &[Vec<u64>]) -> f64 {
    chi_square_p_value(chi_square_statistic(table))
}

/// Pearson statistic and degrees of freedom of a contingency table.
///
/// Statistics of independent strata add, as do their degrees of freedom.
pub fn chi_square_statistic(table: &[Vec<u64>]) -> (f64, usize) {
    let rows: Vec<&Vec<u64>> = table.iter().filter(|r| r.iter().sum::<u64>() > 0).collect();
    let ncols = rows.first().map_or(0, |r| r.len());
    let col_tot: Vec<u64> = (0..ncols).map(|j| rows.iter().map(|r| r[j]).sum()).collect();
    let keep: Vec<usize> = (0..ncols).filter(|&j| col_tot[j] > 0).collect();
    if rows.len() < 2 || keep.len() < 2 {
        return (0.0, 0);
    }
    let total: f64 = col_tot.iter().sum::<u64>() as f64;
    let mut stat = 0.0;
    for r in &rows {
        let rt: f64 = r.iter().sum::<u64>() as f64;
        for &j in &keep {
            let e = rt * col_tot[j] as f64 / total;
            stat += (r[j] as f64 - e).powi(2) / e;
        }
    }
    (stat, (rows.len() - 1) * (keep.len() - 1))
}

/// Upper tail of the chi-square law; degenerate tables give 1.
pub fn chi_square_p_value((stat, dof): (f64, usize)) -> f64 {
    if dof == 0 {
        return 1.0;
    }
    1.0 - ChiSquared::new(dof as f64).expect("positive degrees of freedom").cdf(stat)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn clopper_pearson_reference_values() {
        // Exact limits for 0/10 and 10/10 have closed forms.
        let (lo, hi) = clopper_pearson(0, 10, 0.95);
        assert_eq!(lo, 0.0);
        assert!((hi - (1.0 - 0.025f64.powf(0.1))).abs() < 1e-9);
        let (lo, hi) = clopper_pearson(10, 10, 0.95);
        assert!((lo - 0.025f64.powf(0.1)).abs() < 1e-9);
        assert_eq!(hi, 1.0);
        let up = upper_limit(0, 2000, 0.95);
        assert!((up - (1.0 - 0.05f64.powf(1.0 / 2000.0))).abs() < 1e-9);
        // 5/20: tabulated two-sided interval (0.0866, 0.4910).
        let (lo, hi) = clopper_pearson(5, 20, 0.95);
        assert!((lo - 0.0866).abs() < 1e-4 && (hi - 0.4910).abs() < 1e-4, "{lo} {hi}");
    }

    #[test]
    fn bound_comparison() {
        let c = compare_to_bound(40, 1000, 0.02);
        assert!(c.violation && !c.within_3sigma);
        let c = compare_to_bound(22, 1000, 0.02);
        assert!(!c.violation && c.within_3sigma);
        assert!(!compare_to_bound(5, 5, 1.5).violation);
    }

    #[test]
    fn chi_square() {
        assert!(chi_square_independence(&[vec![50, 50], vec![50, 50]]) > 0.99);
        assert!(chi_square_independence(&[vec![90, 10], vec![10, 90]]) < 1e-6);
        // 2x2 statistic (ad - bc)^2 n / (row and column totals) with n = 100.
        let t = [vec![30, 20], vec![20, 30]];
        let stat: f64 = 4.0;
        let p = 1.0 - ChiSquared::new(1.0).unwrap().cdf(stat);
        assert!((chi_square_independence(&t) - p).abs() < 1e-12);
        assert_eq!(chi_square_independence(&[vec![0, 0], vec![3, 4]]), 1.0);
    }
}
