//! Small statistics toolkit shared by experiments and acceptance checks.

use statrs::distribution::{ChiSquared, ContinuousCDF, Normal};

/// A Monte Carlo estimate with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub value: f64,
    pub stderr: f64,
}

impl McEstimate {
    pub fn from_samples(xs: &[f64]) -> Self {
        let (value, stderr) = mean_se(xs);
        Self { value, stderr }
    }

    pub fn from_binomial(hits: usize, trials: usize) -> Self {
        let p = hits as f64 / trials as f64;
        Self {
            value: p,
            stderr: binomial_se(p, trials),
        }
    }
}

/// Compensated summation (Neumaier's variant of Kahan).
pub fn kahan_sum(xs: impl IntoIterator<Item = f64>) -> f64 {
    let mut sum = 0.0;
    let mut c = 0.0;
    for x in xs {
        let t = sum + x;
        if sum.abs() >= x.abs() {
            c += (sum - t) + x;
        } else {
            c += (x - t) + sum;
        }
        sum = t;
    }
    sum + c
}

/// Sample mean and standard error of the mean.
pub fn mean_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    assert!(n >= 2.0);
    let mean = kahan_sum(xs.iter().copied()) / n;
    let ss = kahan_sum(xs.iter().map(|x| (x - mean) * (x - mean)));
    (mean, (ss / (n - 1.0) / n).sqrt())
}

pub fn median(xs: &[f64]) -> f64 {
    let mut v = xs.to_vec();
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

pub fn std_normal_cdf(z: f64) -> f64 {
    Normal::new(0.0, 1.0).unwrap().cdf(z)
}

/// Standard error of a binomial proportion estimate.
pub fn binomial_se(p_hat: f64, n: usize) -> f64 {
    (p_hat * (1.0 - p_hat) / n as f64).sqrt()
}

/// Upper tail of the chi-squared distribution.
pub fn chi2_sf(stat: f64, dof: usize) -> f64 {
    if dof == 0 {
        return 1.0;
    }
    1.0 - ChiSquared::new(dof as f64).unwrap().cdf(stat)
}

/// Pearson goodness-of-fit test of observed counts against probabilities.
///
/// Cells with expected count below 5 are pooled into the last viable cell.
/// Returns `(statistic, dof, p_value)`.
pub fn chi_square_gof(observed: &[u64], probs: &[f64]) -> (f64, usize, f64) {
    assert_eq!(observed.len(), probs.len());
    let n: u64 = observed.iter().sum();
    let nf = n as f64;
    let mut cells: Vec<(f64, f64)> = Vec::new(); // (observed, expected)
    let mut pool = (0.0, 0.0);
    for (&o, &p) in observed.iter().zip(probs) {
        let e = nf * p;
        if e < 5.0 {
            pool.0 += o as f64;
            pool.1 += e;
        } else {
            cells.push((o as f64, e));
        }
    }
    if pool.1 > 0.0 {
        if pool.1 >= 5.0 || cells.is_empty() {
            cells.push(pool);
        } else {
            let last = cells.last_mut().unwrap();
            last.0 += pool.0;
            last.1 += pool.1;
        }
    }
    let stat: f64 = cells.iter().map(|&(o, e)| (o - e) * (o - e) / e).sum();
    let dof = cells.len().saturating_sub(1);
    (stat, dof, chi2_sf(stat, dof))
}

/// Chi-squared homogeneity test for a two-row contingency table.
///
/// Columns whose pooled count is below 10 are merged into the previous
/// column. Returns `(statistic, dof, p_value)`.
pub fn chi_square_homogeneity(row_a: &[u64], row_b: &[u64]) -> (f64, usize, f64) {
    assert_eq!(row_a.len(), row_b.len());
    let mut cols: Vec<(f64, f64)> = Vec::new();
    for (&a, &b) in row_a.iter().zip(row_b) {
        if a + b == 0 {
            continue;
        }
        if a + b < 10 && !cols.is_empty() {
            let last = cols.last_mut().unwrap();
            last.0 += a as f64;
            last.1 += b as f64;
        } else {
            cols.push((a as f64, b as f64));
        }
    }
    let na: f64 = cols.iter().map(|c| c.0).sum();
    let nb: f64 = cols.iter().map(|c| c.1).sum();
    let n = na + nb;
    let mut stat = 0.0;
    for &(a, b) in &cols {
        let col = a + b;
        let ea = col * na / n;
        let eb = col * nb / n;
        stat += (a - ea) * (a - ea) / ea + (b - eb) * (b - eb) / eb;
    }
    let dof = cols.len().saturating_sub(1);
    (stat, dof, chi2_sf(stat, dof))
}

/// Quantile-based bin edges (interior edges only) for pooling continuous
/// samples into roughly equiprobable categories.
pub fn quantile_edges(samples: &[f64], bins: usize) -> Vec<f64> {
    let mut v = samples.to_vec();
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    (1..bins).map(|i| v[i * v.len() / bins]).collect()
}

/// Index of the bin for `x` among edges produced by `quantile_edges`.
pub fn bin_index(edges: &[f64], x: f64) -> usize {
    edges.iter().take_while(|&&e| x >= e).count()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn mean_se_basics() {
        let (m, se) = mean_se(&[1.0, 2.0, 3.0, 4.0]);
        assert!((m - 2.5).abs() < 1e-15);
        let sd = (5.0f64 / 3.0).sqrt();
        assert!((se - sd / 2.0).abs() < 1e-12);
    }

    #[test]
    fn kahan_beats_naive_ordering() {
        let xs = vec![1e16, 1.0, -1e16, 1.0];
        assert_eq!(kahan_sum(xs), 2.0);
    }

    #[test]
    fn chi2_uniform_counts_not_rejected() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut counts = [0u64; 8];
        for _ in 0..8000 {
            counts[rng.gen_range(0..8)] += 1;
        }
        let probs = [1.0 / 8.0; 8];
        let (_, dof, p) = chi_square_gof(&counts, &probs);
        assert_eq!(dof, 7);
        assert!(p > 1e-4, "p = {p}");
    }

    #[test]
    fn chi2_detects_bias() {
        let counts = [900u64, 100];
        let probs = [0.5, 0.5];
        let (_, _, p) = chi_square_gof(&counts, &probs);
        assert!(p < 1e-10);
    }

    #[test]
    fn homogeneity_same_law_high_p() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut a = [0u64; 6];
        let mut b = [0u64; 6];
        for _ in 0..6000 {
            a[rng.gen_range(0..6)] += 1;
            b[rng.gen_range(0..6)] += 1;
        }
        let (_, _, p) = chi_square_homogeneity(&a, &b);
        assert!(p > 1e-4, "p = {p}");
    }

    #[test]
    fn quantile_bins_roughly_uniform() {
        let samples: Vec<f64> = (0..1000).map(|i| (i as f64).sin()).collect();
        let edges = quantile_edges(&samples, 10);
        assert_eq!(edges.len(), 9);
        let mut counts = [0usize; 10];
        for &s in &samples {
            counts[bin_index(&edges, s)] += 1;
        }
        for &c in &counts {
            assert!(c >= 80 && c <= 120, "{counts:?}");
        }
    }

    #[test]
    fn normal_cdf_symmetry() {
        assert!((std_normal_cdf(0.0) - 0.5).abs() < 1e-12);
        assert!((std_normal_cdf(1.96) - 0.975).abs() < 1e-3);
    }
}
