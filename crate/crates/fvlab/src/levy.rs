//! The mutation process: a Lévy process in `R^d` given by a drift, a Gaussian
//! covariance, and finite-activity point-mass jumps plus an optional symmetric
//! stable component.
//!
//! Finite-activity jump parts are uncompensated: the sampler adds raw jumps
//! and `char_exponent` uses `rate * (1 - e^{i<x,xi>})` with no drift
//! compensator, so the exponent always describes exactly the process being
//! sampled.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, Poisson, StandardNormal};
use statrs::function::gamma::gamma;

use crate::error::{FvError, Result};
use crate::measure::DiscreteMeasure;
use crate::stats::McEstimate;

/// One summand of the jump measure.
#[derive(Debug, Clone, PartialEq)]
pub enum JumpPart {
    /// Finite point masses: jump to `point` at rate `rate`, per point.
    PointMasses { points: Vec<(f64, Vec<f64>)> },
    /// Symmetric alpha-stable component on R (d = 1 only), with
    /// `Psi(xi) = (scale |xi|)^alpha`. Simulated by truncating jumps below
    /// `delta_trunc` and compensating their variance with a Gaussian.
    Stable {
        alpha: f64,
        scale: f64,
        delta_trunc: f64,
    },
}

/// Specification of the mutation process: triplet (drift, covariance, jumps).
#[derive(Debug, Clone, PartialEq)]
pub struct LevySpec {
    dim: usize,
    drift: Vec<f64>,
    /// Row-major d x d covariance of the Gaussian part.
    cov: Vec<f64>,
    /// Lower-triangular factor with `chol * chol^T = cov`.
    chol: Vec<f64>,
    jumps: Vec<JumpPart>,
}

/// Cholesky-type factorization tolerating positive-semidefinite input.
///
/// Returns the lower-triangular factor, or an error if the matrix has a
/// clearly negative pivot.
fn semidefinite_cholesky(dim: usize, cov: &[f64]) -> Result<Vec<f64>> {
    assert_eq!(cov.len(), dim * dim);
    let scale = cov.iter().fold(0.0f64, |m, &v| m.max(v.abs())).max(1e-300);
    let tol = 1e-12 * scale;
    for i in 0..dim {
        for j in 0..i {
            if (cov[i * dim + j] - cov[j * dim + i]).abs() > tol {
                return Err(FvError::Domain("covariance matrix not symmetric".into()));
            }
        }
    }
    let mut l = vec![0.0; dim * dim];
    for j in 0..dim {
        let mut d = cov[j * dim + j];
        for k in 0..j {
            d -= l[j * dim + k] * l[j * dim + k];
        }
        if d < -tol {
            return Err(FvError::Domain(
                "covariance matrix not positive semidefinite".into(),
            ));
        }
        if d <= tol {
            // Rank-deficient direction; zero column.
            continue;
        }
        let root = d.sqrt();
        l[j * dim + j] = root;
        for i in (j + 1)..dim {
            let mut s = cov[i * dim + j];
            for k in 0..j {
                s -= l[i * dim + k] * l[j * dim + k];
            }
            l[i * dim + j] = s / root;
        }
    }
    Ok(l)
}

/// `int_0^infty (1 - cos u) u^{-1-alpha} du` for `alpha` in (0,2).
fn stable_cosine_integral(alpha: f64) -> f64 {
    if (alpha - 1.0).abs() < 1e-9 {
        PI / 2.0
    } else {
        gamma(1.0 - alpha) * (PI * alpha / 2.0).cos() / alpha
    }
}

impl LevySpec {
    pub fn new(dim: usize, drift: Vec<f64>, cov: Vec<f64>, jumps: Vec<JumpPart>) -> Result<Self> {
        if dim == 0 {
            return Err(FvError::Domain("dimension must be positive".into()));
        }
        if drift.len() != dim || cov.len() != dim * dim {
            return Err(FvError::Domain(
                "drift/covariance dimension mismatch".into(),
            ));
        }
        for j in &jumps {
            match j {
                JumpPart::PointMasses { points } => {
                    if points.is_empty() {
                        return Err(FvError::Domain("empty point-mass jump list".into()));
                    }
                    for (rate, x) in points {
                        if *rate <= 0.0 {
                            return Err(FvError::Domain("jump rates must be positive".into()));
                        }
                        if x.len() != dim {
                            return Err(FvError::Domain("jump point dimension mismatch".into()));
                        }
                    }
                }
                JumpPart::Stable {
                    alpha,
                    scale,
                    delta_trunc,
                } => {
                    if !(*alpha > 0.0 && *alpha < 2.0) {
                        return Err(FvError::Domain(format!(
                            "stable alpha {alpha} must lie in (0,2)"
                        )));
                    }
                    if *scale <= 0.0 || *delta_trunc <= 0.0 {
                        return Err(FvError::Domain(
                            "stable scale and truncation must be positive".into(),
                        ));
                    }
                    if dim != 1 {
                        return Err(FvError::Unsupported(
                            "stable jumps are implemented for d = 1 only".into(),
                        ));
                    }
                }
            }
        }
        let chol = semidefinite_cholesky(dim, &cov)?;
        Ok(Self {
            dim,
            drift,
            cov,
            chol,
            jumps,
        })
    }

    /// Process that never moves.
    pub fn frozen(dim: usize) -> Self {
        Self::new(dim, vec![0.0; dim], vec![0.0; dim * dim], vec![]).unwrap()
    }

    pub fn brownian(dim: usize, sigma: f64) -> Self {
        let mut cov = vec![0.0; dim * dim];
        for i in 0..dim {
            cov[i * dim + i] = sigma * sigma;
        }
        Self::new(dim, vec![0.0; dim], cov, vec![]).unwrap()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn drift(&self) -> &[f64] {
        &self.drift
    }

    pub fn jumps(&self) -> &[JumpPart] {
        &self.jumps
    }

    /// True if the path is deterministic (pure drift).
    pub fn is_deterministic(&self) -> bool {
        self.jumps.is_empty() && self.cov.iter().all(|&v| v == 0.0)
    }

    /// The finite point-mass jump support `(mass, point)`, if every jump part
    /// is of that kind.
    pub fn point_jump_support(&self) -> Option<Vec<(f64, Vec<f64>)>> {
        let mut out = Vec::new();
        for j in &self.jumps {
            match j {
                JumpPart::PointMasses { points } => out.extend(points.iter().cloned()),
                JumpPart::Stable { .. } => return None,
            }
        }
        Some(out)
    }

    /// Draw one increment of the process over a window of length `dt`.
    pub fn sample_increment<R: Rng + ?Sized>(&self, dt: f64, rng: &mut R) -> Vec<f64> {
        assert!(dt >= 0.0, "negative increment duration");
        let mut out: Vec<f64> = self.drift.iter().map(|a| a * dt).collect();
        if dt == 0.0 {
            return out;
        }
        if self.chol.iter().any(|&v| v != 0.0) {
            let sqrt_dt = dt.sqrt();
            let g: Vec<f64> = (0..self.dim)
                .map(|_| {
                    let z: f64 = StandardNormal.sample(rng);
                    z
                })
                .collect();
            for i in 0..self.dim {
                let mut s = 0.0;
                for k in 0..=i {
                    s += self.chol[i * self.dim + k] * g[k];
                }
                out[i] += sqrt_dt * s;
            }
        }
        for jump in &self.jumps {
            match jump {
                JumpPart::PointMasses { points } => {
                    for (rate, x) in points {
                        let count = Poisson::new(rate * dt).unwrap().sample(rng) as u64;
                        if count > 0 {
                            for i in 0..self.dim {
                                out[i] += count as f64 * x[i];
                            }
                        }
                    }
                }
                JumpPart::Stable {
                    alpha,
                    scale,
                    delta_trunc,
                } => {
                    out[0] += sample_truncated_stable(*alpha, *scale, *delta_trunc, dt, rng);
                }
            }
        }
        out
    }

    /// Characteristic exponent `Psi(xi)` with
    /// `E e^{i<W_t, xi>} = e^{-t Psi(xi)}`.
    pub fn char_exponent(&self, xi: &[f64]) -> Complex64 {
        assert_eq!(xi.len(), self.dim);
        let drift_dot: f64 = self.drift.iter().zip(xi).map(|(a, x)| a * x).sum();
        let mut quad = 0.0;
        for i in 0..self.dim {
            for j in 0..self.dim {
                quad += xi[i] * self.cov[i * self.dim + j] * xi[j];
            }
        }
        let mut psi = Complex64::new(0.5 * quad, -drift_dot);
        for jump in &self.jumps {
            match jump {
                JumpPart::PointMasses { points } => {
                    for (rate, x) in points {
                        let dot: f64 = x.iter().zip(xi).map(|(a, b)| a * b).sum();
                        psi += rate * (Complex64::new(1.0, 0.0) - Complex64::new(0.0, dot).exp());
                    }
                }
                JumpPart::Stable { alpha, scale, .. } => {
                    psi += Complex64::new((scale * xi[0].abs()).powf(*alpha), 0.0);
                }
            }
        }
        psi
    }

    /// Monte Carlo estimate of `p(t, eps) = P(|W_t| < eps)` from the origin.
    pub fn small_ball_prob<R: Rng + ?Sized>(
        &self,
        t: f64,
        eps: f64,
        replicas: usize,
        rng: &mut R,
    ) -> Result<McEstimate> {
        if t <= 0.0 || eps <= 0.0 {
            return Err(FvError::Domain("small_ball_prob needs t, eps > 0".into()));
        }
        if replicas < 100 {
            return Err(FvError::Precondition(
                "small_ball_prob needs at least 100 replicas".into(),
            ));
        }
        let eps2 = eps * eps;
        let mut hits = 0usize;
        for _ in 0..replicas {
            let w = self.sample_increment(t, rng);
            if w.iter().map(|x| x * x).sum::<f64>() < eps2 {
                hits += 1;
            }
        }
        Ok(McEstimate::from_binomial(hits, replicas))
    }

    /// Monte Carlo estimate of `T_t phi(x) = E phi(x + W_t)`.
    pub fn semigroup_apply<R: Rng + ?Sized>(
        &self,
        t: f64,
        phi: &dyn Fn(&[f64]) -> f64,
        x: &[f64],
        replicas: usize,
        rng: &mut R,
    ) -> McEstimate {
        assert_eq!(x.len(), self.dim);
        let mut samples = Vec::with_capacity(replicas);
        let mut y = vec![0.0; self.dim];
        for _ in 0..replicas {
            let w = self.sample_increment(t, rng);
            for i in 0..self.dim {
                y[i] = x[i] + w[i];
            }
            samples.push(phi(&y));
        }
        McEstimate::from_samples(&samples)
    }

    /// The time reversal: drift negated, jump measure reflected, Gaussian
    /// part unchanged.
    pub fn reversed(&self) -> LevySpec {
        let jumps = self
            .jumps
            .iter()
            .map(|j| match j {
                JumpPart::PointMasses { points } => JumpPart::PointMasses {
                    points: points
                        .iter()
                        .map(|(r, x)| (*r, x.iter().map(|v| -v).collect()))
                        .collect(),
                },
                s @ JumpPart::Stable { .. } => s.clone(),
            })
            .collect();
        LevySpec {
            dim: self.dim,
            drift: self.drift.iter().map(|a| -a).collect(),
            cov: self.cov.clone(),
            chol: self.chol.clone(),
            jumps,
        }
    }
}

/// Symmetric alpha-stable increment over `dt`, by compound-Poisson sampling
/// of jumps larger than `delta` plus Gaussian compensation of the variance of
/// the truncated small jumps.
fn sample_truncated_stable<R: Rng + ?Sized>(
    alpha: f64,
    scale: f64,
    delta: f64,
    dt: f64,
    rng: &mut R,
) -> f64 {
    // Levy density C |x|^{-1-alpha} on each side, with C chosen so the
    // exponent is (scale |xi|)^alpha.
    let c = scale.powf(alpha) / (2.0 * stable_cosine_integral(alpha));
    let big_rate = 2.0 * c * delta.powf(-alpha) / alpha;
    let small_var = 2.0 * c * delta.powf(2.0 - alpha) / (2.0 - alpha);
    let mut x = {
        let z: f64 = StandardNormal.sample(rng);
        (small_var * dt).sqrt() * z
    };
    let count = Poisson::new(big_rate * dt).unwrap().sample(rng) as u64;
    for _ in 0..count {
        // |jump| is Pareto(alpha) above delta; sign symmetric.
        let u: f64 = rng.gen::<f64>();
        let mag = delta * u.powf(-1.0 / alpha);
        let sign = if rng.gen::<bool>() { 1.0 } else { -1.0 };
        x += sign * mag;
    }
    x
}

/// Atoms of `nu^{(k)} * mu`: every `x + y_1 + ... + y_k` with `x` an atom of
/// `mu` and each `y_j` in the jump support, with product weights.
pub fn convolve_support(
    nu_points: &[(f64, Vec<f64>)],
    mu: &DiscreteMeasure,
    k: usize,
) -> DiscreteMeasure {
    let dim = mu.dim();
    let mut positions: Vec<f64> = Vec::new();
    let mut weights: Vec<f64> = Vec::new();
    for (x, w) in mu.atoms() {
        positions.extend_from_slice(x);
        weights.push(w);
    }
    for _ in 0..k {
        let mut next_pos = Vec::with_capacity(positions.len() * nu_points.len());
        let mut next_w = Vec::with_capacity(weights.len() * nu_points.len());
        for atom in 0..weights.len() {
            let base = &positions[atom * dim..(atom + 1) * dim];
            for (m, y) in nu_points {
                for i in 0..dim {
                    next_pos.push(base[i] + y[i]);
                }
                next_w.push(weights[atom] * m);
            }
        }
        positions = next_pos;
        weights = next_w;
    }
    DiscreteMeasure::new(dim, positions, weights)
}

/// Parse the Levy specification grammar:
/// `brownian:sigma=<s>[,d=<d>]`, `drift:<a1>,...`,
/// `cpois:rate=<r>,jump=point:<p1>[;<p2>...]` (point coordinates joined by
/// `:`), `stable:alpha=<a>,scale=<c>`, with summands joined by `+`.
pub fn parse_levy(spec: &str) -> Result<LevySpec> {
    let err = |reason: &str| FvError::Parse {
        input: spec.to_string(),
        reason: reason.to_string(),
    };
    let mut dim: Option<usize> = None;
    let mut drift: Vec<f64> = Vec::new();
    let mut sigma2: f64 = 0.0;
    let mut jumps: Vec<JumpPart> = Vec::new();
    if spec.trim() == "0" || spec.trim() == "none" {
        return LevySpec::new(1, vec![0.0], vec![0.0], vec![]);
    }
    let set_dim = |dim: &mut Option<usize>, d: usize| -> Result<()> {
        match dim {
            None => {
                *dim = Some(d);
                Ok(())
            }
            Some(existing) if *existing == d => Ok(()),
            Some(existing) => Err(FvError::Parse {
                input: spec.to_string(),
                reason: format!("dimension mismatch: {existing} vs {d}"),
            }),
        }
    };
    for part in spec.split('+') {
        let part = part.trim();
        let (head, rest) = part
            .split_once(':')
            .ok_or_else(|| err("expected <family>:<params>"))?;
        match head {
            "brownian" => {
                let mut sigma = None;
                let mut d = 1usize;
                for kv in rest.split(',') {
                    let (k, v) = kv
                        .split_once('=')
                        .ok_or_else(|| err("brownian needs key=value"))?;
                    match k {
                        "sigma" => sigma = Some(v.parse::<f64>().map_err(|_| err("bad sigma"))?),
                        "d" => d = v.parse::<usize>().map_err(|_| err("bad d"))?,
                        _ => return Err(err(&format!("unknown brownian key `{k}`"))),
                    }
                }
                let s = sigma.ok_or_else(|| err("brownian needs sigma"))?;
                set_dim(&mut dim, d)?;
                sigma2 += s * s;
            }
            "drift" => {
                let a: Vec<f64> = rest
                    .split(',')
                    .map(|v| v.trim().parse::<f64>())
                    .collect::<std::result::Result<_, _>>()
                    .map_err(|_| err("bad drift vector"))?;
                set_dim(&mut dim, a.len())?;
                if drift.is_empty() {
                    drift = a;
                } else {
                    for (slot, v) in drift.iter_mut().zip(a) {
                        *slot += v;
                    }
                }
            }
            "cpois" => {
                let mut rate = None;
                let mut pts: Option<Vec<Vec<f64>>> = None;
                for kv in rest.split(',') {
                    let (k, v) = kv
                        .split_once('=')
                        .ok_or_else(|| err("cpois needs key=value"))?;
                    match k {
                        "rate" => rate = Some(v.parse::<f64>().map_err(|_| err("bad rate"))?),
                        "jump" => {
                            let body = v
                                .strip_prefix("point:")
                                .ok_or_else(|| err("only jump=point:... is supported"))?;
                            let parsed: Vec<Vec<f64>> = body
                                .split(';')
                                .map(|p| {
                                    p.split(':')
                                        .map(|c| c.trim().parse::<f64>())
                                        .collect::<std::result::Result<_, _>>()
                                })
                                .collect::<std::result::Result<_, _>>()
                                .map_err(|_| err("bad jump point"))?;
                            pts = Some(parsed);
                        }
                        _ => return Err(err(&format!("unknown cpois key `{k}`"))),
                    }
                }
                let rate = rate.ok_or_else(|| err("cpois needs rate"))?;
                let pts = pts.ok_or_else(|| err("cpois needs jump=point:..."))?;
                if pts.is_empty() {
                    return Err(err("cpois needs at least one jump point"));
                }
                let d = pts[0].len();
                if pts.iter().any(|p| p.len() != d) {
                    return Err(err("jump points have mixed dimensions"));
                }
                set_dim(&mut dim, d)?;
                // The total rate is split equally across the listed points.
                let per = rate / pts.len() as f64;
                jumps.push(JumpPart::PointMasses {
                    points: pts.into_iter().map(|p| (per, p)).collect(),
                });
            }
            "stable" => {
                let mut alpha = None;
                let mut scale = None;
                for kv in rest.split(',') {
                    let (k, v) = kv
                        .split_once('=')
                        .ok_or_else(|| err("stable needs key=value"))?;
                    match k {
                        "alpha" => alpha = Some(v.parse::<f64>().map_err(|_| err("bad alpha"))?),
                        "scale" => scale = Some(v.parse::<f64>().map_err(|_| err("bad scale"))?),
                        _ => return Err(err(&format!("unknown stable key `{k}`"))),
                    }
                }
                set_dim(&mut dim, 1)?;
                jumps.push(JumpPart::Stable {
                    alpha: alpha.ok_or_else(|| err("stable needs alpha"))?,
                    scale: scale.ok_or_else(|| err("stable needs scale"))?,
                    delta_trunc: 1e-3,
                });
            }
            other => return Err(err(&format!("unknown family `{other}`"))),
        }
    }
    let d = dim.ok_or_else(|| err("empty specification"))?;
    if drift.is_empty() {
        drift = vec![0.0; d];
    }
    let mut cov = vec![0.0; d * d];
    for i in 0..d {
        cov[i * d + i] = sigma2;
    }
    LevySpec::new(d, drift, cov, jumps)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn frozen_never_moves() {
        let spec = LevySpec::frozen(3);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        for _ in 0..10 {
            assert_eq!(spec.sample_increment(0.7, &mut rng), vec![0.0, 0.0, 0.0]);
        }
    }

    #[test]
    fn brownian_variance() {
        let spec = LevySpec::brownian(1, 1.0);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let n = 100_000;
        let xs: Vec<f64> = (0..n)
            .map(|_| spec.sample_increment(1.0, &mut rng)[0])
            .collect();
        let mean = xs.iter().sum::<f64>() / n as f64;
        let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1) as f64;
        // SE of the sample variance of a Gaussian is sqrt(2/(n-1)).
        let se = (2.0 / (n as f64 - 1.0)).sqrt();
        assert!((var - 1.0).abs() < 3.0 * se, "var = {var}");
        assert!(mean.abs() < 3.0 / (n as f64).sqrt());
    }

    #[test]
    fn compound_poisson_zero_fraction() {
        // Rate 2, dt = 0.5: no-jump probability e^{-1}.
        let spec = parse_levy("cpois:rate=2,jump=point:1").unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let n = 100_000;
        let zeros = (0..n)
            .filter(|_| spec.sample_increment(0.5, &mut rng)[0] == 0.0)
            .count();
        let p = zeros as f64 / n as f64;
        let want = (-1.0f64).exp();
        let se = (want * (1.0 - want) / n as f64).sqrt();
        assert!((p - want).abs() < 3.0 * se, "p = {p}, want {want}");
    }

    #[test]
    fn char_exponent_closed_forms() {
        let b = LevySpec::brownian(2, 1.0);
        let psi = b.char_exponent(&[3.0, 4.0]);
        assert!((psi.re - 12.5).abs() < 1e-12 && psi.im.abs() < 1e-12);

        let d = parse_levy("drift:0.5,0.25").unwrap();
        let psi = d.char_exponent(&[2.0, 4.0]);
        assert!(psi.re.abs() < 1e-12 && (psi.im + 2.0).abs() < 1e-12);

        // Single atom: rate (1 - e^{i x xi}).
        let c = parse_levy("cpois:rate=1.5,jump=point:2").unwrap();
        let xi = 0.7;
        let psi = c.char_exponent(&[xi]);
        let want = 1.5 * (Complex64::new(1.0, 0.0) - Complex64::new(0.0, 2.0 * xi).exp());
        assert!((psi - want).norm() < 1e-12);
    }

    #[test]
    fn empirical_cf_matches_exponent() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let t = 0.3;
        let n = 40_000;
        for spec_str in [
            "brownian:sigma=1",
            "drift:0.4+brownian:sigma=0.5",
            "cpois:rate=2,jump=point:1;-0.5",
            "stable:alpha=1.5,scale=0.8",
        ] {
            let spec = parse_levy(spec_str).unwrap();
            for xi in [0.5, 1.5] {
                let mut cf = Complex64::new(0.0, 0.0);
                for _ in 0..n {
                    let w = spec.sample_increment(t, &mut rng);
                    cf += Complex64::new(0.0, xi * w[0]).exp();
                }
                cf /= n as f64;
                let target = (-t * spec.char_exponent(&[xi])).exp();
                let tol = 4.0 / (n as f64).sqrt();
                assert!(
                    (cf - target).norm() < tol,
                    "{spec_str} xi={xi}: cf={cf} target={target}"
                );
            }
        }
    }

    #[test]
    fn small_ball_gaussian() {
        let spec = LevySpec::brownian(1, 1.0);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let (t, eps) = (0.5, 0.8);
        let est = spec.small_ball_prob(t, eps, 50_000, &mut rng).unwrap();
        let want = 2.0 * crate::stats::std_normal_cdf(eps / t.sqrt()) - 1.0;
        assert!((est.value - want).abs() < 3.0 * est.stderr);
        assert!(spec.small_ball_prob(0.1, 0.1, 50, &mut rng).is_err());
    }

    #[test]
    fn small_ball_no_jump_event() {
        let spec = parse_levy("cpois:rate=1.5,jump=point:1").unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let t = 0.4;
        let est = spec.small_ball_prob(t, 0.5, 50_000, &mut rng).unwrap();
        let want = (-1.5 * t).exp();
        assert!((est.value - want).abs() < 3.0 * est.stderr);
    }

    #[test]
    fn semigroup_drift_and_constants() {
        let spec = parse_levy("drift:0.5").unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let est = spec.semigroup_apply(2.0, &|x| x[0], &[1.0], 500, &mut rng);
        assert!((est.value - 2.0).abs() < 1e-12);
        let one = spec.semigroup_apply(2.0, &|_| 1.0, &[1.0], 500, &mut rng);
        assert_eq!(one.value, 1.0);
    }

    #[test]
    fn reversal_is_involutive_and_dual() {
        let spec = parse_levy("drift:0.3+brownian:sigma=1+cpois:rate=1,jump=point:0.7").unwrap();
        let rev = spec.reversed();
        assert_eq!(rev.reversed(), spec);
        assert_eq!(rev.drift()[0], -0.3);
        // Duality: E 1_B(x + W_t) integrated over mu equals E of the
        // reversed-walk functional, both estimated independently.
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mu = [(-0.5, 0.4), (0.8, 0.6)]; // (point, weight)
        let ball = |y: f64| (y - 0.25f64).abs() < 0.75;
        let n = 60_000;
        let mut lhs = 0.0;
        let mut rhs = 0.0;
        for _ in 0..n {
            for (x, w) in mu {
                let fwd = x + spec.sample_increment(0.5, &mut rng)[0];
                if ball(fwd) {
                    lhs += w;
                }
                // <T*_t 1_B-at-x, mu> realized from the ball's side.
                let back = 0.25 + rev.sample_increment(0.5, &mut rng)[0];
                if (back - x).abs() < 0.75 {
                    rhs += w;
                }
            }
        }
        lhs /= n as f64;
        rhs /= n as f64;
        assert!(
            (lhs - rhs).abs() < 4.0 / (n as f64).sqrt() + 1e-3,
            "{lhs} vs {rhs}"
        );
    }

    #[test]
    fn independent_increments() {
        let spec = parse_levy("brownian:sigma=1+cpois:rate=1,jump=point:0.3").unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let n = 50_000;
        let pairs: Vec<(f64, f64)> = (0..n)
            .map(|_| {
                (
                    spec.sample_increment(0.2, &mut rng)[0],
                    spec.sample_increment(0.2, &mut rng)[0],
                )
            })
            .collect();
        let mx = pairs.iter().map(|p| p.0).sum::<f64>() / n as f64;
        let my = pairs.iter().map(|p| p.1).sum::<f64>() / n as f64;
        let cov = pairs.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum::<f64>() / (n as f64 - 1.0);
        let vx = pairs.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum::<f64>() / (n as f64 - 1.0);
        let se = vx / (n as f64).sqrt();
        assert!(cov.abs() < 3.0 * se, "cov = {cov}");
    }

    #[test]
    fn small_ball_tends_to_one_for_small_t() {
        for spec_str in [
            "brownian:sigma=1",
            "cpois:rate=2,jump=point:1",
            "stable:alpha=1.2,scale=1",
        ] {
            let spec = parse_levy(spec_str).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(9);
            let eps = 0.5;
            let mut prev = 0.0;
            for i in (0..5).rev() {
                let t = 0.2 * (4.0f64).powi(-(4 - i));
                let est = spec.small_ball_prob(t, eps, 4000, &mut rng).unwrap();
                let _ = prev; // monotone trend allows MC slack
                assert!(est.value + 5.0 * est.stderr >= prev, "{spec_str}");
                prev = est.value;
            }
            let t_small = 0.2 * (4.0f64).powi(-4);
            let est = spec.small_ball_prob(t_small, eps, 4000, &mut rng).unwrap();
            assert!(est.value > 0.99, "{spec_str}: {}", est.value);
        }
    }

    #[test]
    fn convolution_support_enumeration() {
        let mu = DiscreteMeasure::dirac(&[0.0]);
        let nu = vec![(1.0, vec![1.0])];
        let c1 = convolve_support(&nu, &mu, 1);
        assert_eq!(c1.atom_count(), 1);
        assert_eq!(c1.atom(0).0, &[1.0]);
        let c3 = convolve_support(&nu, &mu, 3);
        assert_eq!(c3.atom(0).0, &[3.0]);

        // Half/half two-point measure, k = 2: atoms at -2, 0, 0, 2.
        let nu2 = vec![(0.5, vec![1.0]), (0.5, vec![-1.0])];
        let c = convolve_support(&nu2, &mu, 2);
        let mass_at = |y: f64| {
            c.atoms()
                .filter(|(x, _)| (x[0] - y).abs() < 1e-12)
                .map(|(_, w)| w)
                .sum::<f64>()
        };
        assert!((mass_at(-2.0) - 0.25).abs() < 1e-15);
        assert!((mass_at(0.0) - 0.5).abs() < 1e-15);
        assert!((mass_at(2.0) - 0.25).abs() < 1e-15);
        assert!((c.total_mass() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn convolution_mass_multiplies() {
        let mu = DiscreteMeasure::new(1, vec![0.0, 1.0], vec![0.3, 0.7]);
        let nu = vec![(2.0, vec![1.0]), (1.0, vec![-1.0])];
        let c = convolve_support(&nu, &mu, 3);
        assert!((c.total_mass() - 1.0 * 27.0).abs() < 1e-10);
    }

    #[test]
    fn semidefinite_cholesky_accepts_rank_deficient() {
        // Rank-1 covariance [[1,1],[1,1]].
        let spec = LevySpec::new(2, vec![0.0; 2], vec![1.0, 1.0, 1.0, 1.0], vec![]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        for _ in 0..100 {
            let w = spec.sample_increment(1.0, &mut rng);
            assert!((w[0] - w[1]).abs() < 1e-12);
        }
        assert!(LevySpec::new(2, vec![0.0; 2], vec![1.0, 2.0, 2.0, 1.0], vec![]).is_err());
    }

    #[test]
    fn parser_rejects_bad_specs() {
        assert!(parse_levy("brownian:sigma=1,d=2+drift:1").is_err()); // dim clash
        assert!(parse_levy("stable:alpha=2.5,scale=1").is_err());
        assert!(parse_levy("cpois:rate=1").is_err());
        assert!(parse_levy("wat:1").is_err());
        let spec = parse_levy("cpois:rate=3,jump=point:1:0;0:1").unwrap();
        assert_eq!(spec.dim(), 2);
        let pts = spec.point_jump_support().unwrap();
        assert_eq!(pts.len(), 2);
        assert!((pts[0].0 - 1.5).abs() < 1e-15);
    }
}
