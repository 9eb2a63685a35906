/// Unbiased sample variance (two-pass, order-preserving).
pub fn sample_variance(xs: &[f64]) -> f64 {
    let n = xs.len();
    if n < 2 {
        return 0.0;
    }
    let mean = xs.iter().sum::<f64>() / n as f64;
    xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64
}

/// One-sample Kolmogorov–Smirnov statistic of `samples` against `cdf`.
pub fn ks_statistic(samples: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    sorted
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).max((i + 1) as f64 / n - f)
        })
        .fold(0.0, f64::max)
}

/// Equal-width histogram normalized to a density.
#[derive(Debug, Clone, PartialEq)]
pub struct Histogram {
    pub lo: f64,
    pub width: f64,
    pub density: Vec<f64>,
}

impl Histogram {
    pub fn centers(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.density.len()).map(|i| self.lo + (i as f64 + 0.5) * self.width)
    }
}

/// Histogram of `samples` over `[lo, hi]` with `bins` bins; values outside the
/// range are dropped but still count toward the normalization.
pub fn histogram(samples: &[f64], lo: f64, hi: f64, bins: usize) -> Histogram {
    let bins = bins.max(1);
    let width = if hi > lo { (hi - lo) / bins as f64 } else { 1.0 };
    let mut counts = vec![0usize; bins];
    for &x in samples {
        if x < lo || x > hi {
            continue;
        }
        let idx = (((x - lo) / width) as usize).min(bins - 1);
        counts[idx] += 1;
    }
    let norm = samples.len().max(1) as f64 * width;
    Histogram { lo, width, density: counts.into_iter().map(|c| c as f64 / norm).collect() }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn variance_of_small_sets() {
        assert_relative_eq!(sample_variance(&[1.0, 2.0, 3.0, 4.0]), 5.0 / 3.0, epsilon = 1e-15);
        assert_eq!(sample_variance(&[7.0]), 0.0);
    }

    #[test]
    fn ks_of_uniform_grid_is_half_step() {
        let xs: Vec<f64> = (0..100).map(|i| (i as f64 + 0.5) / 100.0).collect();
        assert_relative_eq!(ks_statistic(&xs, |x| x.clamp(0.0, 1.0)), 0.005, epsilon = 1e-12);
        assert_relative_eq!(ks_statistic(&xs, |_| 0.0), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn histogram_integrates_to_one() {
        let xs: Vec<f64> = (0..1000).map(|i| i as f64 / 999.0).collect();
        let h = histogram(&xs, 0.0, 1.0, 10);
        let total: f64 = h.density.iter().map(|d| d * h.width).sum();
        assert_relative_eq!(total, 1.0, epsilon = 1e-12);
        assert_relative_eq!(h.centers().next().unwrap(), 0.05, epsilon = 1e-15);
    }
}
