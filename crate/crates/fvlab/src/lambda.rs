//! Finite measures on `[0,1]` driving the resampling mechanism, their merger
//! rates, the Laplace exponent `psi`, and the speed function `v(t)`.

use std::fmt;
use std::sync::Arc;

use rand::Rng;
use rand_distr::{Binomial, Distribution};
use statrs::function::gamma::ln_gamma;

use crate::error::{FvError, Result};
use crate::quad;

/// Three-valued outcome of a numerical classification.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Classification {
    Yes,
    No,
    Undetermined,
}

/// Interior (on `(0,1)`) part of a `LambdaMeasure`, one summand at a time.
#[derive(Clone)]
pub enum InteriorComponent {
    /// Point mass `mass` at `location` strictly inside `(0,1)`.
    Atom { location: f64, mass: f64 },
    /// `mass` times the Beta(2-alpha, alpha) law, `alpha` in `(0,2)`.
    /// `alpha = 1` is the uniform (Lebesgue) case.
    Beta { alpha: f64, mass: f64 },
    /// General density on `(0,1)`. `exponent_at_zero` is a declared gamma
    /// with `rho(x) = O(x^gamma)` as `x -> 0`, needed to truncate the
    /// log-substituted tail integrals.
    Density {
        rho: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
        exponent_at_zero: f64,
    },
}

impl fmt::Debug for InteriorComponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InteriorComponent::Atom { location, mass } => {
                write!(f, "Atom({mass}@{location})")
            }
            InteriorComponent::Beta { alpha, mass } => {
                write!(f, "Beta(alpha={alpha}, mass={mass})")
            }
            InteriorComponent::Density {
                exponent_at_zero, ..
            } => {
                write!(f, "Density(exponent_at_zero={exponent_at_zero})")
            }
        }
    }
}

/// `e^{-z} - 1 + z`, evaluated by series for small `z` to avoid cancellation.
pub(crate) fn exp_rem(z: f64) -> f64 {
    if z < 1e-4 {
        // z^2/2 - z^3/6 + z^4/24; relative error below 1e-16 for z < 1e-4.
        z * z * (0.5 - z / 6.0 + z * z / 24.0)
    } else {
        (-z).exp() - 1.0 + z
    }
}

fn ln_beta(a: f64, b: f64) -> f64 {
    ln_gamma(a) + ln_gamma(b) - ln_gamma(a + b)
}

/// `P(Binomial(b, x) >= 2)`, stable for small `b*x`.
fn prob_binom_ge2(b: usize, x: f64) -> f64 {
    let bf = b as f64;
    if bf * x < 1e-2 {
        // Sum pmf terms from k = 2 upward; they decay by ~ b*x/k.
        let log_1mx = (-x).ln_1p();
        let mut term = 0.5 * bf * (bf - 1.0) * x * x * ((bf - 2.0) * log_1mx).exp();
        let mut sum = 0.0;
        let mut k = 2usize;
        while term > sum * 1e-17 && k <= b {
            sum += term;
            let kf = k as f64;
            term *= (bf - kf) / (kf + 1.0) * x / (1.0 - x);
            k += 1;
        }
        sum
    } else {
        let log_1mx = (-x).ln_1p();
        let t1 = (bf * log_1mx).exp();
        let t2 = bf * x * ((bf - 1.0) * log_1mx).exp();
        (1.0 - t1 - t2).max(0.0)
    }
}

impl InteriorComponent {
    pub fn mass(&self) -> f64 {
        match self {
            InteriorComponent::Atom { mass, .. } => *mass,
            InteriorComponent::Beta { mass, .. } => *mass,
            InteriorComponent::Density {
                rho,
                exponent_at_zero,
            } => density_integral(rho.as_ref(), *exponent_at_zero, |_| 1.0),
        }
    }

    /// Density value at `x` for the absolutely continuous variants.
    pub fn density_at(&self, x: f64) -> Option<f64> {
        match self {
            InteriorComponent::Atom { .. } => None,
            InteriorComponent::Beta { alpha, mass } => {
                let ln_norm = ln_beta(2.0 - alpha, *alpha);
                Some(mass * ((1.0 - alpha) * x.ln() + (alpha - 1.0) * (-x).ln_1p() - ln_norm).exp())
            }
            InteriorComponent::Density { rho, .. } => Some(rho(x)),
        }
    }

    /// Contribution to `lambda_{b,k} = int x^{k-2} (1-x)^{b-k} Lambda(dx)`.
    pub fn merger_rate(&self, b: usize, k: usize) -> f64 {
        let (bf, kf) = (b as f64, k as f64);
        match self {
            InteriorComponent::Atom { location, mass } => {
                mass * location.powi(k as i32 - 2) * (1.0 - location).powi((b - k) as i32)
            }
            InteriorComponent::Beta { alpha, mass } => {
                mass * (ln_beta(kf - alpha, bf - kf + alpha) - ln_beta(2.0 - alpha, *alpha)).exp()
            }
            InteriorComponent::Density { rho, .. } => {
                let r = quad::integrate(
                    |x| x.powi(k as i32 - 2) * (1.0 - x).powi((b - k) as i32) * rho(x),
                    0.0,
                    1.0,
                    1e-12,
                    1e-9,
                );
                r.value
            }
        }
    }

    /// Contribution to `sum_{k=2}^{b} C(b,k) lambda_{b,k}`, via the identity
    /// `sum_k C(b,k) x^{k-2}(1-x)^{b-k} = x^{-2} P(Binomial(b,x) >= 2)`.
    pub fn total_subset_rate(&self, b: usize) -> f64 {
        match self {
            InteriorComponent::Atom { location, mass } => {
                mass * prob_binom_ge2(b, *location) / (location * location)
            }
            InteriorComponent::Beta { .. } | InteriorComponent::Density { .. } => {
                let f = |x: f64| prob_binom_ge2(b, x) / (x * x) * self.density_at(x).unwrap();
                quad::integrate(f, 0.0, 1.0, 1e-12, 1e-9).value
            }
        }
    }

    /// Contribution to `psi`: `int exp_rem(u x) x^{-2} comp(dx)`.
    pub fn psi_term(&self, u: f64) -> f64 {
        match self {
            InteriorComponent::Atom { location, mass } => {
                mass * exp_rem(u * location) / (location * location)
            }
            InteriorComponent::Beta { alpha, .. } => self.psi_density_term(u, 1.0 - alpha),
            InteriorComponent::Density {
                exponent_at_zero, ..
            } => self.psi_density_term(u, *exponent_at_zero),
        }
    }

    /// Quadrature of `exp_rem(u x) x^{-2} rho(x) dx` in log coordinates with a
    /// series tail below `x* = 1e-4 / max(u,1)`:
    /// there `exp_rem(ux) x^{-2} = (u^2/2)(1 - ux/3 + ...)`.
    fn psi_density_term(&self, u: f64, gamma: f64) -> f64 {
        let rho = |x: f64| self.density_at(x).unwrap();
        let x_star = (1e-4 / u.max(1.0)).min(0.25);
        let y_max = (1.0 / x_star).ln();
        // Main part on [x*, 1] in y = ln(1/x).
        let main = quad::integrate(
            |y: f64| {
                let x = (-y).exp();
                exp_rem(u * x) / (x * x) * rho(x) * x
            },
            0.0,
            y_max,
            1e-13,
            1e-10,
        )
        .value;
        // Tail: (u^2/2) int_0^{x*} rho(x) dx, truncated where rho x decays as
        // e^{-(1+gamma) y}; relative truncation error ~ e^{-45}.
        let y_tail = y_max + 45.0 / (1.0 + gamma).max(0.05);
        let tail_mass = quad::integrate(
            |y: f64| {
                let x = (-y).exp();
                rho(x) * x
            },
            y_max,
            y_tail,
            1e-300,
            1e-10,
        )
        .value;
        main + 0.5 * u * u * tail_mass
    }

    /// `int_0^{x_hi} x^{-1} comp(dx)` restricted to a dyadic shell, for the
    /// dust criterion.
    fn dust_shell(&self, lo: f64, hi: f64) -> f64 {
        match self {
            InteriorComponent::Atom { location, mass } => {
                if *location >= lo && *location < hi {
                    mass / location
                } else {
                    0.0
                }
            }
            _ => quad::integrate(|x| self.density_at(x).unwrap() / x, lo, hi, 1e-14, 1e-9).value,
        }
    }
}

fn density_integral(
    rho: &(dyn Fn(f64) -> f64 + Send + Sync),
    gamma: f64,
    weight: impl Fn(f64) -> f64,
) -> f64 {
    let y_max = 45.0 / (1.0 + gamma).max(0.05);
    quad::integrate(
        |y: f64| {
            let x = (-y).exp();
            rho(x) * weight(x) * x
        },
        0.0,
        y_max,
        1e-12,
        1e-9,
    )
    .value
}

/// A finite measure on `[0,1]`: atom at 0, atom at 1, and interior summands.
#[derive(Debug, Clone)]
pub struct LambdaMeasure {
    kingman_mass: f64,
    top_mass: f64,
    interior: Vec<InteriorComponent>,
}

impl LambdaMeasure {
    pub fn new(kingman_mass: f64, top_mass: f64, interior: Vec<InteriorComponent>) -> Result<Self> {
        if kingman_mass < 0.0 || top_mass < 0.0 {
            return Err(FvError::Domain("atom masses must be nonnegative".into()));
        }
        for c in &interior {
            match c {
                InteriorComponent::Atom { location, mass } => {
                    if !(*location > 0.0 && *location < 1.0) {
                        return Err(FvError::Domain(format!(
                            "atom location {location} must lie strictly inside (0,1)"
                        )));
                    }
                    if *mass <= 0.0 {
                        return Err(FvError::Domain("atom mass must be positive".into()));
                    }
                }
                InteriorComponent::Beta { alpha, mass } => {
                    if !(*alpha > 0.0 && *alpha < 2.0) {
                        return Err(FvError::Domain(format!(
                            "beta alpha {alpha} must lie in (0,2)"
                        )));
                    }
                    if *mass <= 0.0 {
                        return Err(FvError::Domain("beta mass must be positive".into()));
                    }
                }
                InteriorComponent::Density { .. } => {}
            }
        }
        Ok(Self {
            kingman_mass,
            top_mass,
            interior,
        })
    }

    pub fn zero() -> Self {
        Self {
            kingman_mass: 0.0,
            top_mass: 0.0,
            interior: Vec::new(),
        }
    }

    pub fn kingman(mass: f64) -> Self {
        Self::new(mass, 0.0, Vec::new()).unwrap()
    }

    pub fn beta(alpha: f64, mass: f64) -> Result<Self> {
        Self::new(0.0, 0.0, vec![InteriorComponent::Beta { alpha, mass }])
    }

    pub fn kingman_mass(&self) -> f64 {
        self.kingman_mass
    }

    pub fn top_mass(&self) -> f64 {
        self.top_mass
    }

    pub fn interior(&self) -> &[InteriorComponent] {
        &self.interior
    }

    /// Total mass `sigma = Lambda([0,1])`, the pair-merger rate.
    pub fn total_mass(&self) -> f64 {
        self.kingman_mass + self.top_mass + self.interior.iter().map(|c| c.mass()).sum::<f64>()
    }

    pub fn is_zero(&self) -> bool {
        self.total_mass() == 0.0
    }

    /// The measure with the Kingman atom removed (`Lambda_0` of the lookdown
    /// multi-merger driver).
    pub fn without_kingman_atom(&self) -> LambdaMeasure {
        LambdaMeasure {
            kingman_mass: 0.0,
            top_mass: self.top_mass,
            interior: self.interior.clone(),
        }
    }

    /// `lambda_{b,k} = int_0^1 x^{k-2} (1-x)^{b-k} Lambda(dx)`.
    pub fn merger_rate(&self, b: usize, k: usize) -> Result<f64> {
        if k < 2 || k > b {
            return Err(FvError::Domain(format!(
                "merger rate needs 2 <= k <= b, got k={k}, b={b}"
            )));
        }
        let mut rate = 0.0;
        if k == 2 {
            rate += self.kingman_mass;
        }
        if k == b {
            rate += self.top_mass;
        }
        for c in &self.interior {
            rate += c.merger_rate(b, k);
        }
        Ok(rate)
    }

    /// `sum_{k=2}^{b} C(b,k) lambda_{b,k}`, the total event rate from `b` blocks.
    pub fn total_event_rate(&self, b: usize) -> Result<f64> {
        if b < 2 {
            if b == 1 || b == 0 {
                return Ok(0.0);
            }
            return Err(FvError::Domain(format!("need b >= 2, got {b}")));
        }
        let bf = b as f64;
        let mut rate = 0.5 * bf * (bf - 1.0) * self.kingman_mass + self.top_mass;
        for c in &self.interior {
            rate += c.total_subset_rate(b);
        }
        Ok(rate)
    }

    /// Laplace exponent
    /// `psi(u) = Lambda({0}) u^2 + int_{(0,1]} exp_rem(u x) x^{-2} Lambda(dx)`.
    pub fn psi(&self, u: f64) -> f64 {
        if u == 0.0 {
            return 0.0;
        }
        let mut v = self.kingman_mass * u * u + self.top_mass * exp_rem(u);
        for c in &self.interior {
            v += c.psi_term(u);
        }
        v
    }

    /// `int_{v}^{infty} psi(u)^{-1} du`, via the substitution `u = v / w`.
    pub fn psi_tail_integral(&self, v: f64) -> f64 {
        quad::integrate(
            |w: f64| v / (w * w * self.psi(v / w)),
            0.0,
            1.0,
            1e-300,
            1e-10,
        )
        .value
    }

    /// Numerical test of `int_1^infty psi^{-1} du < infty`.
    ///
    /// Dyadic partial integrals `I_k` over `[2^k, 2^{k+1}]` estimate a local
    /// growth exponent `gamma_k = 1 - log2(I_{k+1} / I_k)` (`psi ~ u^gamma`
    /// gives exactly that). Clearly supercritical exponents mean the tail is
    /// dominated by a convergent geometric series; exponents at or below 1
    /// mean divergence; the boundary is reported as undetermined.
    pub fn comes_down_from_infinity(&self) -> Result<Classification> {
        if self.top_mass > 0.0 {
            return Err(FvError::Precondition(
                "CDI dichotomy requires Lambda({1}) = 0".into(),
            ));
        }
        if self.is_zero() {
            return Ok(Classification::No);
        }
        let k_max = 44;
        let mut partials = Vec::with_capacity(k_max);
        for k in 0..k_max {
            let lo = (2.0f64).powi(k as i32);
            let hi = 2.0 * lo;
            let i_k = quad::integrate(|u| 1.0 / self.psi(u), lo, hi, 1e-300, 1e-7).value;
            partials.push(i_k);
        }
        let window = 8;
        let exps: Vec<f64> = partials
            .windows(2)
            .skip(k_max - 1 - window)
            .map(|w| 1.0 - (w[1] / w[0]).log2())
            .collect();
        if exps.iter().all(|&g| g >= 1.05) {
            Ok(Classification::Yes)
        } else if exps.iter().all(|&g| g <= 1.02) {
            Ok(Classification::No)
        } else {
            Ok(Classification::Undetermined)
        }
    }

    /// Speed envelope `v(t)` solving `int_{v(t)}^infty psi^{-1} du = t`.
    ///
    /// Returns `f64::INFINITY` when the coalescent stays infinite.
    pub fn v_of_t(&self, t: f64) -> Result<f64> {
        if t <= 0.0 {
            return Err(FvError::Domain("v(t) needs t > 0".into()));
        }
        match self.comes_down_from_infinity()? {
            Classification::No => return Ok(f64::INFINITY),
            Classification::Undetermined => {
                return Err(FvError::Undetermined(
                    "CDI status undetermined; classify Lambda before calling v(t)".into(),
                ))
            }
            Classification::Yes => {}
        }
        let tol = 1e-9 * t;
        // Bracket in log space: tail integral is decreasing in v.
        let mut lo = 1e-12;
        let mut hi = 1.0;
        while self.psi_tail_integral(hi) > t {
            hi *= 8.0;
            if hi > 1e300 {
                return Err(FvError::Undetermined("v(t) bracket overflow".into()));
            }
        }
        while self.psi_tail_integral(lo) < t {
            lo /= 8.0;
            if lo < 1e-300 {
                return Err(FvError::Undetermined("v(t) bracket underflow".into()));
            }
        }
        let mut v = (lo * hi).sqrt();
        for _ in 0..200 {
            v = (lo * hi).sqrt();
            let residual = self.psi_tail_integral(v) - t;
            if residual.abs() < tol {
                break;
            }
            if residual > 0.0 {
                lo = v;
            } else {
                hi = v;
            }
        }
        Ok(v)
    }

    /// Lower-bound constant with `v(t) >= c_Lambda / t`, from
    /// `psi(u) <= (Lambda({0}) + Lambda((0,1])/2) u^2`.
    pub fn c_lambda(&self) -> f64 {
        let c = self.kingman_mass + 0.5 * (self.total_mass() - self.kingman_mass);
        1.0 / c
    }

    /// Dust criterion: `Lambda({0}) = 0` and `int x^{-1} Lambda(dx) < infty`.
    ///
    /// The integral over the interior density is probed on dyadic shells near
    /// zero, classifying by the decay ratio of shell contributions.
    pub fn has_dust(&self) -> Classification {
        if self.kingman_mass > 0.0 {
            return Classification::No;
        }
        // Atom parts (including the top atom) always contribute finitely.
        let has_density = self
            .interior
            .iter()
            .any(|c| !matches!(c, InteriorComponent::Atom { .. }));
        if !has_density {
            return Classification::Yes;
        }
        let k_max = 40;
        let shells: Vec<f64> = (0..k_max)
            .map(|k| {
                let hi = (2.0f64).powi(-(k as i32));
                let lo = 0.5 * hi;
                self.interior
                    .iter()
                    .map(|c| c.dust_shell(lo, hi))
                    .sum::<f64>()
            })
            .collect();
        let window = 8;
        let ratios: Vec<f64> = shells
            .windows(2)
            .skip(k_max - 1 - window)
            .map(|w| w[1] / w[0])
            .collect();
        if ratios.iter().all(|&r| r <= 0.97) {
            Classification::Yes
        } else if ratios.iter().all(|&r| r >= 0.995) {
            Classification::No
        } else {
            Classification::Undetermined
        }
    }
}

/// Samples the merger size `k` with probability proportional to
/// `C(b,k) lambda_{b,k}`, for all block counts up to a fixed maximum.
///
/// Per-component totals are cached up front, so per-event sampling costs are
/// O(1) for the Kingman atom and typically a handful of ratio steps otherwise.
pub struct SubsetRateSampler {
    comps: Vec<SamplerComp>,
    /// totals[ci][b], b in 0..=b_max.
    totals: Vec<Vec<f64>>,
    grand: Vec<f64>,
}

enum SamplerComp {
    Kingman { mass: f64 },
    Top { mass: f64 },
    Interior(InteriorComponent),
}

impl SubsetRateSampler {
    pub fn new(lambda: &LambdaMeasure, b_max: usize) -> Self {
        let mut comps = Vec::new();
        if lambda.kingman_mass() > 0.0 {
            comps.push(SamplerComp::Kingman {
                mass: lambda.kingman_mass(),
            });
        }
        if lambda.top_mass() > 0.0 {
            comps.push(SamplerComp::Top {
                mass: lambda.top_mass(),
            });
        }
        for c in lambda.interior() {
            comps.push(SamplerComp::Interior(c.clone()));
        }
        let mut totals = Vec::with_capacity(comps.len());
        for comp in &comps {
            let mut per_b = vec![0.0; b_max + 1];
            for (b, slot) in per_b.iter_mut().enumerate().skip(2) {
                let bf = b as f64;
                *slot = match comp {
                    SamplerComp::Kingman { mass } => 0.5 * bf * (bf - 1.0) * mass,
                    SamplerComp::Top { mass } => *mass,
                    SamplerComp::Interior(c) => c.total_subset_rate(b),
                };
            }
            totals.push(per_b);
        }
        let grand = (0..=b_max)
            .map(|b| totals.iter().map(|t| t[b]).sum())
            .collect();
        Self {
            comps,
            totals,
            grand,
        }
    }

    pub fn b_max(&self) -> usize {
        self.grand.len() - 1
    }

    pub fn total_rate(&self, b: usize) -> f64 {
        self.grand[b]
    }

    /// Draw the merger size for the current block count `b`.
    pub fn sample_k<R: Rng + ?Sized>(&self, b: usize, rng: &mut R) -> usize {
        debug_assert!(b >= 2 && b < self.grand.len());
        let mut target = rng.gen::<f64>() * self.grand[b];
        let mut ci = 0;
        while ci + 1 < self.comps.len() && target > self.totals[ci][b] {
            target -= self.totals[ci][b];
            ci += 1;
        }
        match &self.comps[ci] {
            SamplerComp::Kingman { .. } => 2,
            SamplerComp::Top { .. } => b,
            SamplerComp::Interior(InteriorComponent::Atom { location, .. }) => {
                sample_k_binomial(b, *location, rng)
            }
            SamplerComp::Interior(c @ InteriorComponent::Beta { alpha, mass }) => {
                let (bf, a) = (b as f64, *alpha);
                let w2 = 0.5
                    * bf
                    * (bf - 1.0)
                    * mass
                    * (ln_beta(2.0 - a, bf - 2.0 + a) - ln_beta(2.0 - a, a)).exp();
                sample_k_walk(b, w2, target.min(self.totals[ci][b]), |k| {
                    let kf = k as f64;
                    (bf - kf) / (kf + 1.0) * (kf - a) / (bf - kf - 1.0 + a)
                })
                .unwrap_or_else(|| sample_k_generic(b, c, target, rng))
            }
            SamplerComp::Interior(c @ InteriorComponent::Density { .. }) => {
                sample_k_generic(b, c, target, rng)
            }
        }
    }
}

/// Walk the weight sequence `w_2, w_3, ...` via the multiplicative ratio,
/// stopping at the cumulative target. Returns None if the walk underflows.
fn sample_k_walk(b: usize, w2: f64, target: f64, ratio: impl Fn(usize) -> f64) -> Option<usize> {
    if !w2.is_finite() || w2 <= 0.0 {
        return None;
    }
    let mut w = w2;
    let mut cum = w;
    let mut k = 2usize;
    while cum < target && k < b {
        w *= ratio(k);
        k += 1;
        cum += w;
    }
    Some(k)
}

/// `k` proportional to `C(b,k) x^{k-2} (1-x)^{b-k}`, i.e. Binomial(b, x)
/// conditioned on `k >= 2`.
fn sample_k_binomial<R: Rng + ?Sized>(b: usize, x: f64, rng: &mut R) -> usize {
    if b == 2 {
        return 2;
    }
    let p_acc = prob_binom_ge2(b, x);
    if p_acc >= 0.05 {
        let binom = Binomial::new(b as u64, x).unwrap();
        loop {
            let k = binom.sample(rng) as usize;
            if k >= 2 {
                return k;
            }
        }
    }
    // Rare-acceptance regime: walk the conditional pmf directly.
    let bf = b as f64;
    let w2 = 0.5 * bf * (bf - 1.0) * x * x * ((bf - 2.0) * (-x).ln_1p()).exp();
    let target = rng.gen::<f64>() * p_acc;
    sample_k_walk(b, w2, target, |k| {
        let kf = k as f64;
        (bf - kf) / (kf + 1.0) * x / (1.0 - x)
    })
    .unwrap_or(2)
}

/// Fallback: per-k weights by quadrature (used for generic densities, small b).
fn sample_k_generic<R: Rng + ?Sized>(
    b: usize,
    c: &InteriorComponent,
    target: f64,
    _rng: &mut R,
) -> usize {
    let mut cum = 0.0;
    let bf = b as f64;
    let mut binom = 0.5 * bf * (bf - 1.0);
    for k in 2..=b {
        cum += binom * c.merger_rate(b, k);
        if cum >= target {
            return k;
        }
        let kf = k as f64;
        binom *= (bf - kf) / (kf + 1.0);
    }
    b
}

/// Parse the Lambda specification grammar:
/// `kingman:<mass>`, `beta:<alpha>[:<mass>]`, `atoms:<m1>@<x1>,...`,
/// `uniform:<mass>`, with summands joined by `+`.
pub fn parse_lambda(spec: &str) -> Result<LambdaMeasure> {
    let err = |reason: &str| FvError::Parse {
        input: spec.to_string(),
        reason: reason.to_string(),
    };
    let mut kingman = 0.0;
    let mut top = 0.0;
    let mut interior = Vec::new();
    if spec.trim() == "0" || spec.trim() == "zero" {
        return Ok(LambdaMeasure::zero());
    }
    for part in spec.split('+') {
        let part = part.trim();
        let (head, rest) = part
            .split_once(':')
            .ok_or_else(|| err("expected <family>:<params>"))?;
        match head {
            "kingman" => {
                kingman += rest.parse::<f64>().map_err(|_| err("bad kingman mass"))?;
            }
            "beta" => {
                let mut it = rest.split(':');
                let alpha = it
                    .next()
                    .and_then(|s| s.parse::<f64>().ok())
                    .ok_or_else(|| err("bad beta alpha"))?;
                let mass = match it.next() {
                    Some(s) => s.parse::<f64>().map_err(|_| err("bad beta mass"))?,
                    None => 1.0,
                };
                interior.push(InteriorComponent::Beta { alpha, mass });
            }
            "uniform" => {
                let mass = rest.parse::<f64>().map_err(|_| err("bad uniform mass"))?;
                interior.push(InteriorComponent::Beta { alpha: 1.0, mass });
            }
            "atoms" => {
                for atom in rest.split(',') {
                    let (m, x) = atom
                        .split_once('@')
                        .ok_or_else(|| err("atoms need <mass>@<location>"))?;
                    let mass = m.parse::<f64>().map_err(|_| err("bad atom mass"))?;
                    let location = x.parse::<f64>().map_err(|_| err("bad atom location"))?;
                    if location == 1.0 {
                        top += mass;
                    } else if location == 0.0 {
                        kingman += mass;
                    } else {
                        interior.push(InteriorComponent::Atom { location, mass });
                    }
                }
            }
            other => return Err(err(&format!("unknown family `{other}`"))),
        }
    }
    LambdaMeasure::new(kingman, top, interior)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quad_oracle_atomless(lambda: &LambdaMeasure, b: usize, k: usize) -> f64 {
        // Independent route: brute-force quadrature of the defining integral
        // against the interior density.
        let mut v = 0.0;
        if k == 2 {
            v += lambda.kingman_mass();
        }
        if k == b {
            v += lambda.top_mass();
        }
        for c in lambda.interior() {
            match c {
                InteriorComponent::Atom { location, mass } => {
                    v += mass * location.powi(k as i32 - 2) * (1.0 - location).powi((b - k) as i32)
                }
                _ => {
                    v += quad::integrate(
                        |x| {
                            x.powi(k as i32 - 2)
                                * (1.0 - x).powi((b - k) as i32)
                                * c.density_at(x).unwrap()
                        },
                        0.0,
                        1.0,
                        1e-13,
                        1e-10,
                    )
                    .value
                }
            }
        }
        v
    }

    #[test]
    fn kingman_rates() {
        let l = LambdaMeasure::kingman(1.0);
        assert_eq!(l.merger_rate(5, 2).unwrap(), 1.0);
        assert_eq!(l.merger_rate(5, 3).unwrap(), 0.0);
    }

    #[test]
    fn top_atom_rates() {
        let l = LambdaMeasure::new(0.0, 1.0, vec![]).unwrap();
        assert_eq!(l.merger_rate(4, 4).unwrap(), 1.0);
        assert_eq!(l.merger_rate(4, 2).unwrap(), 0.0);
    }

    #[test]
    fn beta_pair_rate_matches_mean() {
        // lambda_{3,2} = E[1 - X], X ~ Beta(0.5, 1.5) => 0.75.
        let l = LambdaMeasure::beta(1.5, 1.0).unwrap();
        let r = l.merger_rate(3, 2).unwrap();
        assert!((r - 0.75).abs() < 1e-10, "got {r}");
        let oracle = quad_oracle_atomless(&l, 3, 2);
        assert!((r - oracle).abs() < 1e-7 * r, "impl {r} vs oracle {oracle}");
    }

    #[test]
    fn lebesgue_pair_rate() {
        let l = parse_lambda("uniform:1").unwrap();
        let r = l.merger_rate(3, 2).unwrap();
        assert!((r - 0.5).abs() < 1e-10, "got {r}");
        let oracle = quad_oracle_atomless(&l, 3, 2);
        assert!((r - oracle).abs() < 1e-7);
    }

    #[test]
    fn merger_rate_domain_errors() {
        let l = LambdaMeasure::kingman(1.0);
        assert!(l.merger_rate(3, 1).is_err());
        assert!(l.merger_rate(3, 4).is_err());
    }

    #[test]
    fn total_event_rate_examples() {
        let l = LambdaMeasure::kingman(1.0);
        assert!((l.total_event_rate(4).unwrap() - 6.0).abs() < 1e-12);
        let z = LambdaMeasure::zero();
        assert_eq!(z.total_event_rate(10).unwrap(), 0.0);
        // Beta(0.5, 1.5), b = 3: 3 lambda_{3,2} + lambda_{3,3}.
        let b = LambdaMeasure::beta(1.5, 1.0).unwrap();
        let expected = 3.0 * b.merger_rate(3, 2).unwrap() + b.merger_rate(3, 3).unwrap();
        let got = b.total_event_rate(3).unwrap();
        assert!(
            (got - expected).abs() < 1e-8 * expected,
            "got {got}, want {expected}"
        );
    }

    #[test]
    fn total_event_rate_matches_direct_sum_large_b() {
        let l = LambdaMeasure::beta(1.5, 1.0).unwrap();
        for b in [5usize, 17, 40] {
            let bf = b as f64;
            let mut direct = 0.0;
            let mut binom = 0.5 * bf * (bf - 1.0);
            for k in 2..=b {
                direct += binom * l.merger_rate(b, k).unwrap();
                let kf = k as f64;
                binom *= (bf - kf) / (kf + 1.0);
            }
            let fast = l.total_event_rate(b).unwrap();
            assert!(
                (fast - direct).abs() < 1e-7 * direct,
                "b={b}: fast {fast} vs direct {direct}"
            );
        }
    }

    #[test]
    fn psi_closed_forms() {
        let c = 2.5;
        let l = LambdaMeasure::kingman(c);
        for u in [0.1, 1.0, 10.0] {
            assert!((l.psi(u) - c * u * u).abs() < 1e-12 * c * u * u);
        }
        // Single atom at 1/2: 4 (e^{-u/2} - 1 + u/2).
        let a = LambdaMeasure::new(
            0.0,
            0.0,
            vec![InteriorComponent::Atom {
                location: 0.5,
                mass: 1.0,
            }],
        )
        .unwrap();
        for u in [0.3f64, 2.0, 50.0] {
            let expect = 4.0 * ((-u / 2.0).exp() - 1.0 + u / 2.0);
            assert!((a.psi(u) - expect).abs() < 1e-10 * expect.max(1.0));
        }
        assert_eq!(a.psi(0.0), 0.0);
    }

    #[test]
    fn psi_beta_against_direct_quadrature() {
        let l = LambdaMeasure::beta(1.5, 1.0).unwrap();
        let comp = &l.interior()[0];
        for u in [0.5, 5.0, 500.0] {
            // Direct x-space quadrature as an independent route.
            let direct = quad::integrate(
                |x| exp_rem(u * x) / (x * x) * comp.density_at(x).unwrap(),
                0.0,
                1.0,
                1e-13,
                1e-10,
            )
            .value;
            let v = l.psi(u);
            assert!((v - direct).abs() < 1e-6 * direct, "u={u}: {v} vs {direct}");
        }
    }

    #[test]
    fn cdi_classification() {
        assert_eq!(
            LambdaMeasure::kingman(1.0)
                .comes_down_from_infinity()
                .unwrap(),
            Classification::Yes
        );
        // Beta dichotomy cross-check: CDI iff alpha in (1,2).
        assert_eq!(
            LambdaMeasure::beta(1.5, 1.0)
                .unwrap()
                .comes_down_from_infinity()
                .unwrap(),
            Classification::Yes
        );
        assert_eq!(
            LambdaMeasure::beta(0.5, 1.0)
                .unwrap()
                .comes_down_from_infinity()
                .unwrap(),
            Classification::No
        );
        let top = LambdaMeasure::new(0.0, 1.0, vec![]).unwrap();
        assert!(top.comes_down_from_infinity().is_err());
    }

    #[test]
    fn v_of_t_kingman_closed_form() {
        let sigma0 = 1.7;
        let l = LambdaMeasure::kingman(sigma0);
        for t in [0.001, 0.05, 1.0, 20.0] {
            let v = l.v_of_t(t).unwrap();
            let exact = 1.0 / (sigma0 * t);
            assert!(
                (v - exact).abs() < 1e-8 * exact,
                "t={t}: v={v} exact={exact}"
            );
        }
    }

    #[test]
    fn v_of_t_residual_and_divergent() {
        let l = LambdaMeasure::beta(1.5, 1.0).unwrap();
        let t = 0.1;
        let v = l.v_of_t(t).unwrap();
        let residual = (l.psi_tail_integral(v) - t).abs();
        assert!(residual < 1e-8 * t.max(1.0), "residual {residual}");
        let stay = LambdaMeasure::beta(0.5, 1.0).unwrap();
        assert!(stay.v_of_t(1.0).unwrap().is_infinite());
    }

    #[test]
    fn dust_classification() {
        assert_eq!(LambdaMeasure::kingman(1.0).has_dust(), Classification::No);
        let atom = LambdaMeasure::new(
            0.0,
            0.0,
            vec![InteriorComponent::Atom {
                location: 0.5,
                mass: 1.0,
            }],
        )
        .unwrap();
        assert_eq!(atom.has_dust(), Classification::Yes);
        assert_eq!(
            LambdaMeasure::beta(1.5, 1.0).unwrap().has_dust(),
            Classification::No
        );
        assert_eq!(
            LambdaMeasure::beta(0.5, 1.0).unwrap().has_dust(),
            Classification::Yes
        );
    }

    #[test]
    fn pair_rate_monotone_in_b() {
        for spec in [
            "kingman:1",
            "beta:1.5",
            "uniform:1",
            "atoms:0.5@0.3,0.5@0.7",
        ] {
            let l = parse_lambda(spec).unwrap();
            let mut prev = f64::INFINITY;
            for b in 2..=20 {
                let r = l.merger_rate(b, 2).unwrap();
                assert!(r <= prev + 1e-12, "{spec}: lambda_{{{b},2}} increased");
                prev = r;
            }
        }
    }

    #[test]
    fn parser_roundtrip_families() {
        let l = parse_lambda("kingman:0.5+beta:1.5:0.25+atoms:0.1@0.3,0.2@1").unwrap();
        assert!((l.kingman_mass() - 0.5).abs() < 1e-15);
        assert!((l.top_mass() - 0.2).abs() < 1e-15);
        assert!((l.total_mass() - 1.05).abs() < 1e-10);
        assert!(parse_lambda("beta:2.5").is_err());
        assert!(parse_lambda("atoms:1@1.5").is_err());
        assert!(parse_lambda("nope:1").is_err());
    }

    #[test]
    fn sampler_totals_match_measure() {
        for spec in [
            "kingman:1",
            "beta:1.5",
            "atoms:1@0.5",
            "kingman:0.3+uniform:0.7",
        ] {
            let l = parse_lambda(spec).unwrap();
            let s = SubsetRateSampler::new(&l, 12);
            for b in 2..=12 {
                let want = l.total_event_rate(b).unwrap();
                let got = s.total_rate(b);
                assert!(
                    (got - want).abs() < 1e-8 * want.max(1e-12),
                    "{spec} b={b}: {got} vs {want}"
                );
            }
        }
    }

    #[test]
    fn sampler_k_distribution_matches_weights() {
        use rand::SeedableRng;
        let l = parse_lambda("beta:1.5:0.6+atoms:0.4@0.5").unwrap();
        let b = 6;
        let s = SubsetRateSampler::new(&l, b);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let n = 200_000usize;
        let mut counts = vec![0usize; b + 1];
        for _ in 0..n {
            counts[s.sample_k(b, &mut rng)] += 1;
        }
        let bf = b as f64;
        let mut binom = 0.5 * bf * (bf - 1.0);
        let total = l.total_event_rate(b).unwrap();
        for k in 2..=b {
            let p = binom * l.merger_rate(b, k).unwrap() / total;
            let phat = counts[k] as f64 / n as f64;
            let se = (p * (1.0 - p) / n as f64).sqrt();
            assert!(
                (phat - p).abs() < 5.0 * se + 1e-4,
                "k={k}: phat={phat} p={p}"
            );
            let kf = k as f64;
            binom *= (bf - kf) / (kf + 1.0);
        }
    }
}
