//! Advantage estimation from per-arm counts.
//!
//! Each arm's rate gets a Wilson score interval; the difference of rates uses
//! Newcombe's hybrid score interval. The advantage is the absolute difference,
//! and its interval is the difference interval folded at zero.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Two-sided 99% standard-normal quantile.
pub const Z_99: f64 = 2.575_829_303_548_900_4;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EstimateError {
    #[error("arm has zero trials")]
    EmptyArm,
    #[error("{successes} successes exceed {trials} trials")]
    TooManySuccesses { successes: u64, trials: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ArmCounts {
    pub trials: u64,
    pub ones: u64,
}

impl ArmCounts {
    pub fn new(ones: u64, trials: u64) -> Self {
        Self { trials, ones }
    }

    pub fn rate(&self) -> f64 {
        self.ones as f64 / self.trials as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub low: f64,
    pub high: f64,
}

impl Interval {
    pub fn contains(&self, v: f64) -> bool {
        self.low <= v && v <= self.high
    }

    pub fn half_width(&self) -> f64 {
        (self.high - self.low) / 2.0
    }
}

pub fn wilson(successes: u64, trials: u64) -> Result<Interval, EstimateError> {
    if trials == 0 {
        return Err(EstimateError::EmptyArm);
    }
    if successes > trials {
        return Err(EstimateError::TooManySuccesses { successes, trials });
    }
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = Z_99 * Z_99;
    let denom = 1.0 + z2 / n;
    let centre = (p + z2 / (2.0 * n)) / denom;
    let spread = Z_99 * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    Ok(Interval {
        low: (centre - spread).max(0.0),
        high: (centre + spread).min(1.0),
    })
}

/// Interval for `rate(first) - rate(second)`.
pub fn newcombe(first: ArmCounts, second: ArmCounts) -> Result<Interval, EstimateError> {
    let (w1, w2) = (wilson(first.ones, first.trials)?, wilson(second.ones, second.trials)?);
    let (p1, p2) = (first.rate(), second.rate());
    let d = p1 - p2;
    let low = d - ((p1 - w1.low).powi(2) + (w2.high - p2).powi(2)).sqrt();
    let high = d + ((w1.high - p1).powi(2) + (p2 - w2.low).powi(2)).sqrt();
    Ok(Interval {
        low: low.max(-1.0),
        high: high.min(1.0),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdvantageEstimate {
    /// `|Pr[b′ = 1 | b = 0] − Pr[b′ = 1 | b = 1]|`.
    pub advantage: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    /// Signed difference and its interval.
    pub difference: f64,
    pub difference_ci: Interval,
    pub arms: [ArmCounts; 2],
}

impl AdvantageEstimate {
    pub fn half_width(&self) -> f64 {
        self.difference_ci.half_width()
    }

    pub fn ci_contains_zero(&self) -> bool {
        self.difference_ci.contains(0.0)
    }

    /// Whether `value` lies in the folded advantage interval.
    pub fn ci_contains(&self, value: f64) -> bool {
        self.ci_low <= value && value <= self.ci_high
    }
}

pub fn estimate(arm0: ArmCounts, arm1: ArmCounts) -> Result<AdvantageEstimate, EstimateError> {
    let diff_ci = newcombe(arm0, arm1)?;
    let difference = arm0.rate() - arm1.rate();
    let (ci_low, ci_high) = if diff_ci.low >= 0.0 {
        (diff_ci.low, diff_ci.high)
    } else if diff_ci.high <= 0.0 {
        (-diff_ci.high, -diff_ci.low)
    } else {
        (0.0, diff_ci.high.max(-diff_ci.low))
    };
    Ok(AdvantageEstimate {
        advantage: difference.abs(),
        ci_low,
        ci_high,
        difference,
        difference_ci: diff_ci,
        arms: [arm0, arm1],
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateEstimate {
    pub successes: u64,
    pub trials: u64,
    pub rate: f64,
    pub ci: Interval,
}

pub fn rate(successes: u64, trials: u64) -> Result<RateEstimate, EstimateError> {
    Ok(RateEstimate {
        successes,
        trials,
        rate: successes as f64 / trials.max(1) as f64,
        ci: wilson(successes, trials)?,
    })
}

/// `3·sqrt(p(1−p)/n)`.
pub fn three_sigma(p: f64, n: u64) -> f64 {
    3.0 * (p * (1.0 - p) / n as f64).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    // Reference intervals from an independent statistics package (Newcombe
    // hybrid score and Wilson, alpha = 0.01).
    const GOLDEN: [(u64, u64, u64, u64, f64, f64); 8] = [
        (500, 1000, 500, 1000, -0.057407163766409953, 0.057407163766409953),
        (1000, 1000, 0, 1000, 0.9906786852017644, 1.0),
        (600, 1000, 400, 1000, 0.1428128418760537, 0.2553228951642992),
        (400, 1000, 600, 1000, -0.2553228951642992, -0.1428128418760537),
        (3, 10, 7, 10, -0.7117403047769384, 0.13736625204086833),
        (0, 5, 0, 5, -0.5702583210270094, 0.5702583210270094),
        (5000, 10000, 5000, 10000, -0.018207824327192958, 0.018207824327192958),
        (1, 1, 0, 1, -0.22898334429994738, 1.0),
    ];

    #[test]
    fn newcombe_matches_reference() {
        for (a, n1, b, n2, low, high) in GOLDEN {
            let ci = newcombe(ArmCounts::new(a, n1), ArmCounts::new(b, n2)).unwrap();
            assert!((ci.low - low).abs() < 1e-12, "{a}/{n1} {b}/{n2}: {ci:?}");
            assert!((ci.high - high).abs() < 1e-12, "{a}/{n1} {b}/{n2}: {ci:?}");
        }
    }

    #[test]
    fn wilson_matches_reference() {
        let ci = wilson(600, 1000).unwrap();
        assert!((ci.low - 0.5595625726937702).abs() < 1e-12);
        assert!((ci.high - 0.6391191943255484).abs() < 1e-12);
        let ci = wilson(3, 10).unwrap();
        assert!((ci.low - 0.07956631652306578).abs() < 1e-12);
        assert!((ci.high - 0.6799753207988974).abs() < 1e-12);
    }

    #[test]
    fn estimate_examples() {
        let e = estimate(ArmCounts::new(500, 1000), ArmCounts::new(500, 1000)).unwrap();
        assert_eq!(e.advantage, 0.0);
        assert!(e.ci_contains_zero());
        assert_eq!(e.ci_low, 0.0);

        let e = estimate(ArmCounts::new(1000, 1000), ArmCounts::new(0, 1000)).unwrap();
        assert_eq!(e.advantage, 1.0);
        assert!(e.ci_contains(1.0));

        let e = estimate(ArmCounts::new(600, 1000), ArmCounts::new(400, 1000)).unwrap();
        assert!((e.advantage - 0.2).abs() < 1e-15);
        assert!((e.half_width() - (0.2553228951642992 - 0.1428128418760537) / 2.0).abs() < 1e-12);

        let e = estimate(ArmCounts::new(400, 1000), ArmCounts::new(600, 1000)).unwrap();
        assert!((e.ci_low - 0.1428128418760537).abs() < 1e-12);
        assert!((e.ci_high - 0.2553228951642992).abs() < 1e-12);
    }

    #[test]
    fn default_scale_half_width() {
        let e = estimate(ArmCounts::new(5000, 10_000), ArmCounts::new(5000, 10_000)).unwrap();
        assert!(e.half_width() <= 0.02);
    }

    #[test]
    fn rejects_empty_arms() {
        assert_eq!(wilson(0, 0), Err(EstimateError::EmptyArm));
        assert!(estimate(ArmCounts::new(0, 0), ArmCounts::new(1, 2)).is_err());
        assert!(wilson(3, 2).is_err());
    }

    proptest::proptest! {
        #[test]
        fn intervals_are_ordered_and_bounded(
            n1 in 1u64..5000, n2 in 1u64..5000, f1 in 0.0f64..=1.0, f2 in 0.0f64..=1.0,
        ) {
            let a = ArmCounts::new((f1 * n1 as f64) as u64, n1);
            let b = ArmCounts::new((f2 * n2 as f64) as u64, n2);
            let e = estimate(a, b).unwrap();
            proptest::prop_assert!(e.ci_low <= e.advantage && e.advantage <= e.ci_high);
            proptest::prop_assert!((0.0..=1.0).contains(&e.ci_low) && e.ci_high <= 1.0);
            proptest::prop_assert!(e.difference_ci.low >= -1.0 && e.difference_ci.high <= 1.0);
            let swapped = estimate(b, a).unwrap();
            proptest::prop_assert!((swapped.advantage - e.advantage).abs() < 1e-15);
            proptest::prop_assert!((swapped.ci_high - e.ci_high).abs() < 1e-12);
        }
    }

    #[test]
    fn interval_contains_point_estimate() {
        for (a, n1, b, n2, _, _) in GOLDEN {
            let e = estimate(ArmCounts::new(a, n1), ArmCounts::new(b, n2)).unwrap();
            assert!(e.ci_contains(e.advantage));
            assert!(e.difference_ci.contains(e.difference));
        }
    }
}
