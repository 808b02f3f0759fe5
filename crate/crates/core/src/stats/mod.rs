//! Small-sample statistics for the modeling-time comparison: paired
//! t-test, Shapiro–Wilk normality test and mean time reduction.

use alloc::vec::Vec;

use libm::{asin, exp, fabs, log, sqrt};
use serde::{Deserialize, Serialize};

pub mod special;

use special::{normal_quantile, normal_upper, student_t_two_tailed};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, thiserror::Error)]
pub enum StatsError {
    #[error("E-LENGTH-MISMATCH: samples have {0} and {1} values")]
    LengthMismatch(usize, usize),
    #[error("E-SAMPLE-SIZE: {0} values is outside the supported range")]
    SampleSize(usize),
    #[error("E-ZERO-VARIANCE: all values are identical")]
    ZeroVariance,
    #[error("E-EMPTY: no values")]
    Empty,
    #[error("E-ZERO-MEAN: baseline mean is zero")]
    ZeroMean,
}

impl StatsError {
    pub fn code(&self) -> &'static str {
        match self {
            StatsError::LengthMismatch(..) => "E-LENGTH-MISMATCH",
            StatsError::SampleSize(_) => "E-SAMPLE-SIZE",
            StatsError::ZeroVariance => "E-ZERO-VARIANCE",
            StatsError::Empty => "E-EMPTY",
            StatsError::ZeroMean => "E-ZERO-MEAN",
        }
    }
}

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Sample standard deviation (n - 1 denominator).
pub fn sample_sd(xs: &[f64]) -> f64 {
    let m = mean(xs);
    sqrt(xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (xs.len() as f64 - 1.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairedTTest {
    pub t: f64,
    pub df: u32,
    pub p_two_tailed: f64,
}

/// Paired t-test on `a - b`.
pub fn paired_t_test(a: &[f64], b: &[f64]) -> Result<PairedTTest, StatsError> {
    if a.len() != b.len() {
        return Err(StatsError::LengthMismatch(a.len(), b.len()));
    }
    if a.len() < 2 {
        return Err(StatsError::SampleSize(a.len()));
    }
    let d: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    let sd = sample_sd(&d);
    let m = mean(&d);
    // a constant shift still leaves rounding noise of a few ulps of the inputs
    let scale = a.iter().chain(b).fold(0.0f64, |acc, x| acc.max(fabs(*x)));
    if sd.is_nan() || sd <= 64.0 * f64::EPSILON * scale {
        return Err(StatsError::ZeroVariance);
    }
    let n = d.len() as f64;
    let t = m / (sd / sqrt(n));
    let df = d.len() as u32 - 1;
    Ok(PairedTTest {
        t,
        df,
        p_two_tailed: student_t_two_tailed(t, df as f64),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShapiroWilk {
    pub w: f64,
    pub p: f64,
}

fn poly(coeffs: &[f64], x: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, c| acc * x + c)
}

/// Shapiro–Wilk W and p-value using Royston's approximation (AS R94).
pub fn shapiro_wilk(sample: &[f64]) -> Result<ShapiroWilk, StatsError> {
    const C1: [f64; 6] = [0.0, 0.221157, -0.147981, -2.071190, 4.434685, -2.706056];
    const C2: [f64; 6] = [0.0, 0.042981, -0.293762, -1.752461, 5.682633, -3.582633];
    const C3: [f64; 4] = [0.5440, -0.39978, 0.025054, -6.714e-4];
    const C4: [f64; 4] = [1.3822, -0.77857, 0.062767, -0.0020322];
    const C5: [f64; 4] = [-1.5861, -0.31082, -0.083751, 0.0038915];
    const C6: [f64; 3] = [-0.4803, -0.082676, 0.0030302];
    const G: [f64; 2] = [-2.273, 0.459];

    let n = sample.len();
    if !(3..=5000).contains(&n) {
        return Err(StatsError::SampleSize(n));
    }
    let mut x = sample.to_vec();
    x.sort_by(f64::total_cmp);
    let range = x[n - 1] - x[0];
    if range.is_nan() || range <= 1e-19 * fabs(x[n - 1]).max(1.0) {
        return Err(StatsError::ZeroVariance);
    }

    let an = n as f64;
    let half = n / 2;
    // a[i] for i in 0..half holds the upper-half weights, largest first
    let mut a = alloc::vec![0.0; half];
    if n == 3 {
        a[0] = core::f64::consts::FRAC_1_SQRT_2;
    } else {
        let an25 = an + 0.25;
        let m: Vec<f64> = (1..=half)
            .map(|i| normal_quantile((i as f64 - 0.375) / an25))
            .collect();
        let summ2 = 2.0 * m.iter().map(|v| v * v).sum::<f64>();
        let ssumm2 = sqrt(summ2);
        let rsn = 1.0 / sqrt(an);
        let a1 = poly(&C1, rsn) - m[0] / ssumm2;
        let (first, fac) = if n > 5 {
            let a2 = -m[1] / ssumm2 + poly(&C2, rsn);
            a[1] = a2;
            let fac = sqrt(
                (summ2 - 2.0 * m[0] * m[0] - 2.0 * m[1] * m[1])
                    / (1.0 - 2.0 * a1 * a1 - 2.0 * a2 * a2),
            );
            (2, fac)
        } else {
            (1, sqrt((summ2 - 2.0 * m[0] * m[0]) / (1.0 - 2.0 * a1 * a1)))
        };
        a[0] = a1;
        for i in first..half {
            a[i] = -m[i] / fac;
        }
    }

    // W is the squared correlation between the ordered sample and the
    // antisymmetric coefficient vector; 1 - W is formed directly.
    let coef = |i: usize| -> f64 {
        if i < half {
            -a[i]
        } else if n % 2 == 1 && i == half {
            0.0
        } else {
            a[n - 1 - i]
        }
    };
    let xs: Vec<f64> = x.iter().map(|v| v / range).collect();
    let xm = mean(&xs);
    let (mut ssa, mut ssx, mut sax) = (0.0, 0.0, 0.0);
    for (i, xi) in xs.iter().enumerate() {
        let ai = coef(i);
        let xd = xi - xm;
        ssa += ai * ai;
        ssx += xd * xd;
        sax += ai * xd;
    }
    let ssassx = sqrt(ssa * ssx);
    let w1 = (ssassx - sax) * (ssassx + sax) / (ssa * ssx);
    let w = 1.0 - w1;

    if n == 3 {
        const PI6: f64 = 6.0 / core::f64::consts::PI;
        const STQR: f64 = core::f64::consts::FRAC_PI_3;
        let p = (PI6 * (asin(sqrt(w)) - STQR)).clamp(0.0, 1.0);
        return Ok(ShapiroWilk { w, p });
    }

    let y = log(w1);
    let lxx = log(an);
    let (y, m, s) = if n <= 11 {
        let gamma = poly(&G, an);
        if y >= gamma {
            return Ok(ShapiroWilk { w, p: 1e-99 });
        }
        (-log(gamma - y), poly(&C3, an), exp(poly(&C4, an)))
    } else {
        (y, poly(&C5, lxx), exp(poly(&C6, lxx)))
    };
    Ok(ShapiroWilk {
        w,
        p: normal_upper((y - m) / s),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeReduction {
    pub mean_manual: f64,
    pub mean_assisted: f64,
    /// Fraction of the manual mean saved: `1 - mean_assisted / mean_manual`.
    pub reduction_pct: f64,
}

pub fn time_reduction(manual: &[f64], assisted: &[f64]) -> Result<TimeReduction, StatsError> {
    if manual.is_empty() || assisted.is_empty() {
        return Err(StatsError::Empty);
    }
    let mean_manual = mean(manual);
    let mean_assisted = mean(assisted);
    if mean_manual == 0.0 {
        return Err(StatsError::ZeroMean);
    }
    Ok(TimeReduction {
        mean_manual,
        mean_assisted,
        reduction_pct: 1.0 - mean_assisted / mean_manual,
    })
}

pub const DEFAULT_ALPHA: f64 = 0.01;

/// Full analysis of paired modeling times.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StatsReport {
    pub n: usize,
    pub mean_manual: f64,
    pub mean_assisted: f64,
    pub reduction_pct: f64,
    /// Shapiro–Wilk on the paired differences.
    pub shapiro_w: f64,
    pub shapiro_p: f64,
    pub t_stat: f64,
    pub df: u32,
    pub p_value: f64,
    pub alpha: f64,
    pub significant: bool,
}

/// Runs the whole analysis on participant-paired times.
pub fn analyze_paired_times(manual: &[f64], assisted: &[f64], alpha: f64) -> Result<StatsReport, StatsError> {
    let tr = time_reduction(manual, assisted)?;
    let tt = paired_t_test(manual, assisted)?;
    let diffs: Vec<f64> = manual.iter().zip(assisted).map(|(m, a)| m - a).collect();
    let sw = shapiro_wilk(&diffs)?;
    Ok(StatsReport {
        n: manual.len(),
        mean_manual: tr.mean_manual,
        mean_assisted: tr.mean_assisted,
        reduction_pct: tr.reduction_pct,
        shapiro_w: sw.w,
        shapiro_p: sw.p,
        t_stat: tt.t,
        df: tt.df,
        p_value: tt.p_two_tailed,
        alpha,
        significant: tt.p_two_tailed < alpha,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    const MANUAL: [f64; 5] = [14.2, 19.1, 11.02, 16.9, 26.3];
    const ASSISTED: [f64; 5] = [4.8, 6.25, 4.2, 9.6, 10.4];

    #[test]
    fn modeling_times_t_test() {
        let r = paired_t_test(&MANUAL, &ASSISTED).unwrap();
        assert!((r.t - 6.05).abs() <= 0.01, "{}", r.t);
        assert_eq!(r.df, 4);
        assert!((r.p_two_tailed - 0.0037).abs() <= 0.0003, "{}", r.p_two_tailed);
    }

    #[test]
    fn symmetric_differences() {
        let r = paired_t_test(&[1.0, 2.0, 3.0], &[3.0, 2.0, 1.0]).unwrap();
        assert_eq!(r.t, 0.0);
        assert_eq!(r.p_two_tailed, 1.0);
    }

    #[test]
    fn t_test_errors() {
        let b = [1.0, 2.0, 3.0];
        let a: Vec<f64> = b.iter().map(|x| x + 1.0).collect();
        assert_eq!(paired_t_test(&a, &b), Err(StatsError::ZeroVariance));
        assert_eq!(paired_t_test(&a, &b[..2]), Err(StatsError::LengthMismatch(3, 2)));
        assert_eq!(paired_t_test(&[1.0], &[2.0]), Err(StatsError::SampleSize(1)));
    }

    #[test]
    fn shapiro_errors() {
        assert_eq!(shapiro_wilk(&[1.0, 2.0]), Err(StatsError::SampleSize(2)));
        assert_eq!(shapiro_wilk(&[4.0; 6]), Err(StatsError::ZeroVariance));
    }

    #[test]
    fn shapiro_on_differences_does_not_reject() {
        let d: Vec<f64> = MANUAL.iter().zip(&ASSISTED).map(|(m, a)| m - a).collect();
        let sw = shapiro_wilk(&d).unwrap();
        assert!(sw.p > 0.05);
        assert!((0.0..=1.0).contains(&sw.w));
    }

    #[test]
    fn shapiro_n3_exact() {
        // equally spaced triples reach the maximum W = 1, p = 1
        let sw = shapiro_wilk(&[1.0, 2.0, 3.0]).unwrap();
        assert!((sw.w - 1.0).abs() < 1e-12);
        assert!((sw.p - 1.0).abs() < 1e-9);
    }

    #[test]
    fn reductions() {
        let r = time_reduction(&MANUAL, &ASSISTED).unwrap();
        assert!((r.mean_manual - 17.504).abs() < 1e-9);
        assert!((r.mean_assisted - 7.05).abs() < 1e-9);
        assert!((r.reduction_pct - 0.597).abs() < 0.005);
        assert_eq!(time_reduction(&[3.0, 4.0], &[3.0, 4.0]).unwrap().reduction_pct, 0.0);
        assert_eq!(time_reduction(&[10.0, 10.0], &[5.0, 5.0]).unwrap().reduction_pct, 0.5);
        assert_eq!(time_reduction(&[], &[1.0]), Err(StatsError::Empty));
        assert_eq!(time_reduction(&[0.0], &[1.0]), Err(StatsError::ZeroMean));
    }

    #[test]
    fn full_report() {
        let r = analyze_paired_times(&MANUAL, &ASSISTED, DEFAULT_ALPHA).unwrap();
        assert!(r.significant);
        assert_eq!(r.n, 5);
        let _ = vec![r];
    }
}
