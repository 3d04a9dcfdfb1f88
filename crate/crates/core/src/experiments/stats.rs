//! Sample summaries with normal-approximation confidence intervals.

/// Two-sided 95 % normal quantile.
pub const Z95: f64 = 1.959_963_984_540_054;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Summary {
    pub mean: f64,
    /// Sample standard deviation; NaN for fewer than two samples.
    pub std: f64,
    /// Half-width of the 95 % interval on the mean.
    pub ci95: f64,
    pub n: usize,
}

impl Summary {
    /// Fixed value with no sampling error.
    pub fn exact(value: f64) -> Self {
        Summary {
            mean: value,
            std: 0.0,
            ci95: 0.0,
            n: 1,
        }
    }

    pub fn lower(&self) -> f64 {
        self.mean - self.ci95
    }

    pub fn upper(&self) -> f64 {
        self.mean + self.ci95
    }
}

/// Mean, sample std and CI of `xs`, summed in order.
pub fn summarize(xs: &[f64]) -> Summary {
    let n = xs.len();
    if n == 0 {
        return Summary {
            mean: f64::NAN,
            std: f64::NAN,
            ci95: f64::NAN,
            n,
        };
    }
    let mean = xs.iter().sum::<f64>() / n as f64;
    if n < 2 {
        return Summary {
            mean,
            std: f64::NAN,
            ci95: f64::NAN,
            n,
        };
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    let std = var.sqrt();
    Summary {
        mean,
        std,
        ci95: Z95 * std / (n as f64).sqrt(),
        n,
    }
}

/// `1 - mean(num) / mean(den)` from paired samples, with a delta-method CI.
pub fn ratio_loss(num: &[f64], den: &[f64]) -> Summary {
    assert_eq!(num.len(), den.len(), "paired samples");
    let n = num.len() as f64;
    let mn = num.iter().sum::<f64>() / n;
    let md = den.iter().sum::<f64>() / n;
    let r = mn / md;
    let influence: Vec<f64> = num.iter().zip(den).map(|(x, y)| (x - r * y) / md).collect();
    let s = summarize(&influence);
    Summary { mean: 1.0 - r, ..s }
}

/// Mean over series `j` of `1 - mean(num[j]) / mean(den[j])`. All series
/// share the sample index, so the CI comes from the averaged influence values.
pub fn mean_ratio_loss(num: &[Vec<f64>], den: &[Vec<f64>]) -> Summary {
    assert_eq!(num.len(), den.len(), "paired series");
    let j = num.len() as f64;
    let n = num.first().map_or(0, Vec::len);
    let mut influence = vec![0.0; n];
    let mut loss = 0.0;
    for (x, y) in num.iter().zip(den) {
        let mx = x.iter().sum::<f64>() / n as f64;
        let my = y.iter().sum::<f64>() / n as f64;
        let r = mx / my;
        loss += 1.0 - r;
        for (z, (a, b)) in influence.iter_mut().zip(x.iter().zip(y)) {
            *z += (a - r * b) / my / j;
        }
    }
    Summary {
        mean: loss / j,
        ..summarize(&influence)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn summary_of_known_sample() {
        let s = summarize(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(s.mean, 2.5);
        assert!((s.std - (5.0f64 / 3.0).sqrt()).abs() < 1e-15);
        assert!((s.ci95 - Z95 * s.std / 2.0).abs() < 1e-15);
        assert!(summarize(&[7.0]).std.is_nan());
    }

    #[test]
    fn ratio_of_identical_samples_is_zero() {
        let xs = [1.0, 3.0, 2.5];
        let s = ratio_loss(&xs, &xs);
        assert_eq!(s.mean, 0.0);
        assert_eq!(s.ci95, 0.0);
    }

    #[test]
    fn ratio_loss_matches_definition() {
        let s = ratio_loss(&[1.0, 2.0], &[2.0, 2.0]);
        assert!((s.mean - 0.25).abs() < 1e-15);
        // Influence values (x - 0.75 y) / 2 = [-0.25, 0.25].
        assert!((s.std - 0.125f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn single_series_mean_ratio_is_ratio_loss() {
        let (x, y) = (vec![1.0, 2.0, 4.0], vec![2.0, 2.5, 3.0]);
        let a = ratio_loss(&x, &y);
        let b = mean_ratio_loss(std::slice::from_ref(&x), std::slice::from_ref(&y));
        assert!((a.mean - b.mean).abs() < 1e-15);
        assert!((a.ci95 - b.ci95).abs() < 1e-15);
        let two = mean_ratio_loss(&[x.clone(), y.clone()], &[y.clone(), y]);
        assert!((two.mean - a.mean / 2.0).abs() < 1e-15);
    }
}
