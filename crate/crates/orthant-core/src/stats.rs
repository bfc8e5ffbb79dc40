//! Small statistical helpers shared by the Monte Carlo estimators.

use crate::field::SplitMix64;

/// Sample mean and standard error of the mean.
pub fn mean_se(samples: &[f64]) -> (f64, f64) {
    let n = samples.len() as f64;
    if samples.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let mean = samples.iter().sum::<f64>() / n;
    if samples.len() < 2 {
        return (mean, f64::INFINITY);
    }
    let var = samples.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Percentile bootstrap confidence interval for the mean.
pub fn bootstrap_mean_ci(
    samples: &[f64],
    level: f64,
    resamples: usize,
    seed: u64,
) -> (f64, f64) {
    assert!((0.0..1.0).contains(&(1.0 - level)));
    if samples.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let mut rng = SplitMix64::new(seed);
    let mut means = Vec::with_capacity(resamples);
    for _ in 0..resamples {
        let mut acc = 0.0;
        for _ in 0..samples.len() {
            acc += samples[rng.next_index(samples.len())];
        }
        means.push(acc / samples.len() as f64);
    }
    means.sort_by(f64::total_cmp);
    let alpha = (1.0 - level) / 2.0;
    let pick = |q: f64| {
        let i = ((means.len() as f64 - 1.0) * q).round() as usize;
        means[i]
    };
    (pick(alpha), pick(1.0 - alpha))
}

/// Ordinary least squares `y = a + b x`; returns `(a, b, se_b)`.
pub fn least_squares(points: &[(f64, f64)]) -> Option<(f64, f64, f64)> {
    let n = points.len() as f64;
    if points.len() < 3 {
        return None;
    }
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx = points.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum::<f64>();
    if sxx == 0.0 {
        return None;
    }
    let sxy = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum::<f64>();
    let b = sxy / sxx;
    let a = my - b * mx;
    let rss = points
        .iter()
        .map(|p| {
            let r = p.1 - a - b * p.0;
            r * r
        })
        .sum::<f64>();
    let se_b = (rss / (n - 2.0) / sxx).sqrt();
    Some((a, b, se_b))
}

/// Two-sided Kolmogorov-Smirnov statistic against the uniform law on [0, 1).
pub fn ks_statistic_uniform(samples: &mut [f64]) -> f64 {
    samples.sort_by(f64::total_cmp);
    let n = samples.len() as f64;
    let mut d = 0.0f64;
    for (i, x) in samples.iter().enumerate() {
        let hi = (i as f64 + 1.0) / n - x;
        let lo = x - i as f64 / n;
        d = d.max(hi).max(lo);
    }
    d
}

/// Total-variation distance between an empirical pmf (as counts) and exact
/// probabilities over the same support points.
pub fn total_variation(counts: &[(i64, u64)], total: u64, prob: impl Fn(i64) -> f64) -> f64 {
    let mut tv = 0.0;
    let mut covered = 0.0;
    for (k, c) in counts {
        let p = prob(*k);
        tv += (*c as f64 / total as f64 - p).abs();
        covered += p;
    }
    // Support points never observed contribute their full mass.
    tv += (1.0 - covered).max(0.0);
    tv / 2.0
}
