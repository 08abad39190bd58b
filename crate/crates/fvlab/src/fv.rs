//! Observables of the measure-valued process built from lookdown
//! trajectories: moment identities, cluster lower bounds, support
//! propagation, and the dust regime.

use rand::Rng;
use serde::Serialize;

use crate::error::{FvError, Result};
use crate::lambda::LambdaMeasure;
use crate::levy::{convolve_support, LevySpec};
use crate::lookdown::LookdownEngine;
use crate::measure::DiscreteMeasure;
use crate::stats::{self, McEstimate};

/// Comparison of a Monte Carlo estimate with an analytic (or independently
/// estimated) target.
#[derive(Debug, Clone, Serialize)]
pub struct MomentReport {
    pub observable: String,
    pub estimate: f64,
    pub stderr: f64,
    pub target: f64,
    pub target_stderr: f64,
    pub z: f64,
}

impl MomentReport {
    fn new(observable: String, lhs: McEstimate, rhs: McEstimate) -> Self {
        let diff = lhs.value - rhs.value;
        let se = (lhs.stderr * lhs.stderr + rhs.stderr * rhs.stderr).sqrt();
        let z = if se > 0.0 {
            diff / se
        } else if diff == 0.0 {
            0.0
        } else {
            f64::INFINITY
        };
        Self {
            observable,
            estimate: lhs.value,
            stderr: lhs.stderr,
            target: rhs.value,
            target_stderr: rhs.stderr,
            z,
        }
    }
}

/// Draw one atom of `mu` with probability proportional to its weight.
pub fn sample_atom<R: Rng + ?Sized>(mu: &DiscreteMeasure, rng: &mut R) -> Vec<f64> {
    let total = mu.total_mass();
    let mut target = rng.gen::<f64>() * total;
    for (x, w) in mu.atoms() {
        target -= w;
        if target <= 0.0 {
            return x.to_vec();
        }
    }
    let (x, _) = mu.atom(mu.atom_count() - 1);
    x.to_vec()
}

fn mu0_sampler<'a, R: Rng + ?Sized>(
    mu: &'a DiscreteMeasure,
) -> impl FnMut(&mut R) -> Vec<f64> + 'a {
    move |rng| sample_atom(mu, rng)
}

/// `<T_t phi, mu>` by Monte Carlo: average `phi(x + W_t)` over atoms of `mu`
/// drawn by weight and independent increments.
fn semigroup_pairing<R: Rng + ?Sized>(
    levy: &LevySpec,
    t: f64,
    phi: &dyn Fn(&[f64]) -> f64,
    mu: &DiscreteMeasure,
    samples: usize,
    rng: &mut R,
) -> McEstimate {
    let mut vals = Vec::with_capacity(samples);
    for _ in 0..samples {
        let mut x = sample_atom(mu, rng);
        let w = levy.sample_increment(t, rng);
        for i in 0..x.len() {
            x[i] += w[i];
        }
        vals.push(phi(&x));
    }
    McEstimate::from_samples(&vals)
}

/// Check `E <phi, Z_t> = <T_t phi, mu>`: the left side from lookdown
/// replicas, the right side from an independent semigroup Monte Carlo.
#[allow(clippy::too_many_arguments)]
pub fn first_moment_check<R: Rng + ?Sized>(
    lambda: &LambdaMeasure,
    levy: &LevySpec,
    mu0: &DiscreteMeasure,
    t: f64,
    phi: &dyn Fn(&[f64]) -> f64,
    n: usize,
    replicas: usize,
    rng: &mut R,
) -> Result<MomentReport> {
    let engine = LookdownEngine::new(lambda, n);
    let mut lhs_vals = Vec::with_capacity(replicas);
    for _ in 0..replicas {
        let traj = engine.simulate(levy, mu0_sampler(mu0), &[t], None, rng)?;
        let snap = traj.positions_at(t)?;
        let dim = traj.dim;
        // Sum then divide once, so constant phi gives exactly 1.
        let sum: f64 = (0..n).map(|i| phi(&snap[i * dim..(i + 1) * dim])).sum();
        lhs_vals.push(sum / n as f64);
    }
    let lhs = McEstimate::from_samples(&lhs_vals);
    let rhs = semigroup_pairing(levy, t, phi, mu0, 4 * replicas, rng);
    Ok(MomentReport::new("first moment".into(), lhs, rhs))
}

/// Check the second-moment identity
/// `E <phi,Z_t><psi,Z_t> = e^{-sigma t} <T_t phi, mu><T_t psi, mu>
///  + int_0^t sigma e^{-sigma s} <T_{t-s}(T_s phi T_s psi), mu> ds`
/// with `sigma = Lambda([0,1])`.
///
/// The left side uses the U-statistic over distinct level pairs, which is
/// unbiased for the limit product. The s-integral is a trapezoid rule over
/// `s_nodes + 1` nodes; inner semigroup values use independent single-sample
/// estimates so their product stays unbiased.
#[allow(clippy::too_many_arguments)]
pub fn second_moment_check<R: Rng + ?Sized>(
    lambda: &LambdaMeasure,
    levy: &LevySpec,
    mu0: &DiscreteMeasure,
    t: f64,
    phi: &dyn Fn(&[f64]) -> f64,
    psi_fn: &dyn Fn(&[f64]) -> f64,
    n: usize,
    replicas: usize,
    s_nodes: usize,
    rng: &mut R,
) -> Result<MomentReport> {
    if n < 2 {
        return Err(FvError::Precondition("second moment needs n >= 2".into()));
    }
    let sigma = lambda.total_mass();
    let nf = n as f64;

    let engine = LookdownEngine::new(lambda, n);
    let mut lhs_vals = Vec::with_capacity(replicas);
    for _ in 0..replicas {
        let traj = engine.simulate(levy, mu0_sampler(mu0), &[t], None, rng)?;
        let snap = traj.positions_at(t)?;
        let dim = traj.dim;
        let (mut s_phi, mut s_psi, mut s_prod) = (0.0, 0.0, 0.0);
        for i in 0..n {
            let x = &snap[i * dim..(i + 1) * dim];
            let (a, b) = (phi(x), psi_fn(x));
            s_phi += a;
            s_psi += b;
            s_prod += a * b;
        }
        lhs_vals.push((s_phi * s_psi - s_prod) / (nf * (nf - 1.0)));
    }
    let lhs = McEstimate::from_samples(&lhs_vals);

    // First term: independent estimates of the two semigroup pairings.
    let m = 4 * replicas;
    let f_phi = semigroup_pairing(levy, t, phi, mu0, m, rng);
    let f_psi = semigroup_pairing(levy, t, psi_fn, mu0, m, rng);
    let decay = (-sigma * t).exp();
    let term1 = decay * f_phi.value * f_psi.value;
    let term1_var = decay
        * decay
        * (f_psi.value * f_psi.value * f_phi.stderr * f_phi.stderr
            + f_phi.value * f_phi.value * f_psi.stderr * f_psi.stderr);

    // Integral term: trapezoid in G(s) against the exact exponential weight
    // e^{-sigma s_i} - e^{-sigma s_{i+1}} per interval, so constant G
    // integrates to 1 - e^{-sigma t} with no quadrature error.
    let mut term2 = 0.0;
    let mut term2_var = 0.0;
    if sigma > 0.0 {
        let per_node = (m / (s_nodes + 1)).max(64);
        let h = t / s_nodes as f64;
        let interval_mass =
            |i: usize| (-sigma * h * i as f64).exp() - (-sigma * h * (i + 1) as f64).exp();
        for node in 0..=s_nodes {
            let s = h * node as f64;
            let weight = 0.5
                * (if node > 0 {
                    interval_mass(node - 1)
                } else {
                    0.0
                } + if node < s_nodes {
                    interval_mass(node)
                } else {
                    0.0
                });
            let mut vals = Vec::with_capacity(per_node);
            for _ in 0..per_node {
                let mut y = sample_atom(mu0, rng);
                let w = levy.sample_increment(t - s, rng);
                for i in 0..y.len() {
                    y[i] += w[i];
                }
                // Independent inner increments keep the product unbiased.
                let mut ya = y.clone();
                let wa = levy.sample_increment(s, rng);
                for i in 0..ya.len() {
                    ya[i] += wa[i];
                }
                let mut yb = y;
                let wb = levy.sample_increment(s, rng);
                for i in 0..yb.len() {
                    yb[i] += wb[i];
                }
                vals.push(phi(&ya) * psi_fn(&yb));
            }
            let est = McEstimate::from_samples(&vals);
            let coef = weight;
            term2 += coef * est.value;
            term2_var += coef * coef * est.stderr * est.stderr;
        }
    }
    let rhs = McEstimate {
        value: term1 + term2,
        stderr: (term1_var + term2_var).sqrt(),
    };
    Ok(MomentReport::new("second moment".into(), lhs, rhs))
}

/// One stratum of a stratified lower-bound check.
#[derive(Debug, Clone, Serialize)]
pub struct StratumReport {
    pub label: String,
    pub samples: usize,
    pub hit_fraction: f64,
    pub bound: f64,
    pub stderr: f64,
    pub degenerate: bool,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct BoundCheckReport {
    pub observable: String,
    pub strata: Vec<StratumReport>,
    pub pass: bool,
}

impl BoundCheckReport {
    fn finish(observable: String, strata: Vec<StratumReport>) -> Self {
        let pass = strata.iter().all(|s| s.degenerate || s.pass);
        Self {
            observable,
            strata,
            pass,
        }
    }
}

const MIN_STRATUM: usize = 30;

/// Check the cluster mass bound: conditionally on the genealogy, a block of
/// frequency `f` whose ancestor sits at `x` carries mass at least
/// `f * p / 2` in the ball with probability at least `p / 2`, where
/// `p = P_x(W_s in B)`. Replica outcomes are stratified into deciles of `p`.
#[allow(clippy::too_many_arguments)]
pub fn cluster_mass_bound_check<R: Rng + ?Sized>(
    lambda: &LambdaMeasure,
    levy: &LevySpec,
    mu0: &DiscreteMeasure,
    t: f64,
    s: f64,
    ball_center: &[f64],
    ball_radius: f64,
    n: usize,
    replicas: usize,
    rng: &mut R,
) -> Result<BoundCheckReport> {
    if !(s > 0.0 && s <= t) {
        return Err(FvError::Domain("need 0 < s <= t".into()));
    }
    let dim = levy.dim();
    let p_samples = 200;
    // (count, hits, sum of p) per p-decile.
    let engine = LookdownEngine::new(lambda, n);
    let mut strata = vec![(0usize, 0usize, 0.0f64); 10];
    for _ in 0..replicas {
        let traj = engine.simulate(levy, mu0_sampler(mu0), &[t - s, t], None, rng)?;
        let ap = traj.ancestral_partition(t, s)?;
        let snap_t = traj.positions_at(t)?;
        for (i, block) in ap.partition.blocks().iter().enumerate() {
            // Lemma: the ancestor of block i is level i at time t - s.
            let anc = traj.position_of(i, t - s)?.to_vec();
            let mut inside = 0usize;
            for _ in 0..p_samples {
                let w = levy.sample_increment(s, rng);
                let d2: f64 = (0..dim)
                    .map(|c| {
                        let v = anc[c] + w[c] - ball_center[c];
                        v * v
                    })
                    .sum();
                if d2 < ball_radius * ball_radius {
                    inside += 1;
                }
            }
            let p = inside as f64 / p_samples as f64;
            let freq = block.len() as f64 / n as f64;
            let mass: f64 = block
                .iter()
                .map(|&j| {
                    let j = j as usize;
                    let d2: f64 = (0..dim)
                        .map(|c| {
                            let v = snap_t[j * dim + c] - ball_center[c];
                            v * v
                        })
                        .sum();
                    if d2 < ball_radius * ball_radius {
                        1.0
                    } else {
                        0.0
                    }
                })
                .sum::<f64>()
                / n as f64;
            let hit = mass >= p * freq / 2.0;
            let decile = ((p * 10.0) as usize).min(9);
            strata[decile].0 += 1;
            if hit {
                strata[decile].1 += 1;
            }
            strata[decile].2 += p;
        }
    }
    let reports = strata
        .iter()
        .enumerate()
        .filter(|(_, s)| s.0 > 0)
        .map(|(d, &(count, hits, p_sum))| {
            let frac = hits as f64 / count as f64;
            let bound = p_sum / count as f64 / 2.0;
            let se = stats::binomial_se(frac, count);
            let degenerate = count < MIN_STRATUM;
            StratumReport {
                label: format!(
                    "p in [{:.1}, {:.1})",
                    d as f64 / 10.0,
                    (d + 1) as f64 / 10.0
                ),
                samples: count,
                hit_fraction: frac,
                bound,
                stderr: se,
                degenerate,
                pass: frac >= bound - 3.0 * se,
            }
        })
        .collect();
    Ok(BoundCheckReport::finish(
        "cluster mass bound".into(),
        reports,
    ))
}

/// Check the hitting bound: the chance that `Z_t` puts mass at least
/// `b * p(t,eps)` on the eps-enlargement of `B` is at least
/// `1 - (1 - mu(B) p(t,eps) / 2)^N`, where `N` counts ancestral blocks of
/// frequency at least `2b` at full lookback. Stratified by the value of `N`.
#[allow(clippy::too_many_arguments)]
pub fn cluster_hit_bound_check<R: Rng + ?Sized>(
    lambda: &LambdaMeasure,
    levy: &LevySpec,
    mu0: &DiscreteMeasure,
    t: f64,
    b_points: &[Vec<f64>],
    eps: f64,
    b: f64,
    n: usize,
    replicas: usize,
    rng: &mut R,
) -> Result<BoundCheckReport> {
    if !(b > 0.0 && b <= 0.5) {
        return Err(FvError::Domain("need b in (0, 1/2]".into()));
    }
    let dim = levy.dim();
    let mu_b: f64 = mu0
        .atoms()
        .filter(|(x, _)| {
            b_points
                .iter()
                .any(|p| x.iter().zip(p).all(|(a, c)| (a - c).abs() < 1e-12))
        })
        .map(|(_, w)| w)
        .sum();
    let p_eps = levy.small_ball_prob(t, eps, 20_000, rng)?.value;

    // Stratify by N (clamped); (count, hits, sum of bound values).
    let max_n_bucket = 40usize;
    let engine = LookdownEngine::new(lambda, n);
    let mut strata = vec![(0usize, 0usize, 0.0f64); max_n_bucket + 1];
    for _ in 0..replicas {
        let traj = engine.simulate(levy, mu0_sampler(mu0), &[0.0, t], None, rng)?;
        let ap = traj.ancestral_partition(t, t)?;
        let n_blocks = ap
            .partition
            .blocks()
            .iter()
            .filter(|blk| blk.len() as f64 / n as f64 >= 2.0 * b)
            .count();
        let snap = traj.positions_at(t)?;
        let mass: f64 = (0..n)
            .filter(|&j| {
                b_points.iter().any(|p| {
                    let d2: f64 = (0..dim)
                        .map(|c| {
                            let v = snap[j * dim + c] - p[c];
                            v * v
                        })
                        .sum();
                    d2 < eps * eps
                })
            })
            .count() as f64
            / n as f64;
        let hit = mass >= b * p_eps;
        let bound = 1.0 - (1.0 - mu_b * p_eps / 2.0).powi(n_blocks as i32);
        let bucket = n_blocks.min(max_n_bucket);
        strata[bucket].0 += 1;
        if hit {
            strata[bucket].1 += 1;
        }
        strata[bucket].2 += bound;
    }
    let reports = strata
        .iter()
        .enumerate()
        .filter(|(_, s)| s.0 > 0)
        .map(|(nb, &(count, hits, bound_sum))| {
            let frac = hits as f64 / count as f64;
            let bound = bound_sum / count as f64;
            let se = stats::binomial_se(frac, count);
            let degenerate = count < MIN_STRATUM;
            StratumReport {
                label: format!("N = {nb}"),
                samples: count,
                hit_fraction: frac,
                bound,
                stderr: se,
                degenerate,
                pass: frac >= bound - 3.0 * se,
            }
        })
        .collect();
    Ok(BoundCheckReport::finish(
        "cluster hit bound".into(),
        reports,
    ))
}

/// Per-target-point outcome of the support propagation probe.
#[derive(Debug, Clone, Serialize)]
pub struct SupportAtomStat {
    pub position: Vec<f64>,
    pub appearances: usize,
    pub hits: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct SupportReport {
    pub n: usize,
    pub k: usize,
    pub eps: f64,
    pub replicas: usize,
    /// Mean over replicas of the fraction of convolved atoms whose eps-ball
    /// contains mass of `Z_t`.
    pub hit_fraction: f64,
    pub hit_fraction_stderr: f64,
    /// Hit statistics keyed by (quantized) atom position; useful when the
    /// jump support and initial measure are lattice-like.
    pub atom_stats: Vec<SupportAtomStat>,
}

/// Probe `S(nu^(k) * Z_t) subseteq S(Z_t)` at resolution `eps`: convolve the
/// empirical measure with the jump support `k` times and check each convolved
/// atom's ball for mass of `Z_t`.
#[allow(clippy::too_many_arguments)]
pub fn support_propagation_probe<R: Rng + ?Sized>(
    lambda: &LambdaMeasure,
    levy: &LevySpec,
    mu0: &DiscreteMeasure,
    t: f64,
    k: usize,
    eps: f64,
    weight_floor: f64,
    n: usize,
    replicas: usize,
    rng: &mut R,
) -> Result<SupportReport> {
    let nu_points = levy.point_jump_support().ok_or_else(|| {
        FvError::Unsupported("support probe needs a finite point-mass jump measure".into())
    })?;
    let dim = levy.dim();
    let mut fractions = Vec::with_capacity(replicas);
    let mut stats_map: std::collections::BTreeMap<Vec<i64>, (usize, usize)> =
        std::collections::BTreeMap::new();
    let quant = 1e9;
    let engine = LookdownEngine::new(lambda, n);
    for _ in 0..replicas {
        let traj = engine.simulate(levy, mu0_sampler(mu0), &[t], None, rng)?;
        let z = traj.empirical_measure(t)?;
        let conv = convolve_support(&nu_points, &z, k);
        let mut probed = 0usize;
        let mut hits = 0usize;
        // Merge duplicated atom positions (quantized) so the floor applies to
        // the total weight the convolution puts at each location.
        let mut merged: std::collections::BTreeMap<Vec<i64>, f64> =
            std::collections::BTreeMap::new();
        for (y, w) in conv.atoms() {
            let key: Vec<i64> = y.iter().map(|c| (c * quant).round() as i64).collect();
            *merged.entry(key).or_insert(0.0) += w;
        }
        for (key, w) in merged {
            if w <= weight_floor {
                continue;
            }
            let y: Vec<f64> = key.iter().map(|&q| q as f64 / quant).collect();
            let hit = z.ball_mass(&y, eps) > 0.0;
            probed += 1;
            if hit {
                hits += 1;
            }
            let entry = stats_map.entry(key).or_insert((0, 0));
            entry.0 += 1;
            if hit {
                entry.1 += 1;
            }
        }
        if probed > 0 {
            fractions.push(hits as f64 / probed as f64);
        }
    }
    if fractions.len() < 2 {
        return Err(FvError::Precondition(
            "weight floor left fewer than two replicas with probe atoms".into(),
        ));
    }
    let overall = McEstimate::from_samples(&fractions);
    let atom_stats = stats_map
        .into_iter()
        .map(|(key, (appearances, hits))| SupportAtomStat {
            position: key.iter().map(|&q| q as f64 / quant).collect(),
            appearances,
            hits,
        })
        .collect();
    let _ = dim;
    Ok(SupportReport {
        n,
        k,
        eps,
        replicas,
        hit_fraction: overall.value,
        hit_fraction_stderr: overall.stderr,
        atom_stats,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct DustReport {
    pub singleton_fraction: f64,
    pub singleton_fraction_stderr: f64,
    /// p-value of the two-sample test comparing singleton displacements to
    /// fresh increments of the mutation process over `t` (first coordinate).
    pub displacement_test_p: Option<f64>,
    /// For measures with an atom at 1 and deterministic mutation: fraction of
    /// replicas, among those with a whole-population event, whose particles
    /// all coincide at time `t`.
    pub collapse_fraction: Option<f64>,
}

/// Probe the dust regime: levels in singleton ancestral blocks at full
/// lookback evolve like independent copies of the mutation process.
pub fn dust_regime_probe<R: Rng + ?Sized>(
    lambda: &LambdaMeasure,
    levy: &LevySpec,
    mu0: &DiscreteMeasure,
    t: f64,
    n: usize,
    replicas: usize,
    rng: &mut R,
) -> Result<DustReport> {
    if lambda.has_dust() != crate::lambda::Classification::Yes {
        return Err(FvError::Precondition(
            "dust probe requires a measure with dust".into(),
        ));
    }
    let dim = levy.dim();
    let mut singleton_fracs = Vec::with_capacity(replicas);
    let mut displacements: Vec<f64> = Vec::new();
    let mut collapse_eligible = 0usize;
    let mut collapsed = 0usize;
    let deterministic = levy.is_deterministic();
    let engine = LookdownEngine::new(lambda, n);
    for _ in 0..replicas {
        let traj = engine.simulate(levy, mu0_sampler(mu0), &[0.0, t], None, rng)?;
        let ap = traj.ancestral_partition(t, t)?;
        let snap0 = traj.positions_at(0.0)?.to_vec();
        let snap_t = traj.positions_at(t)?;
        let mut singles = 0usize;
        for (i, block) in ap.partition.blocks().iter().enumerate() {
            if block.len() == 1 {
                singles += 1;
                let j = block[0] as usize;
                if displacements.len() < 20_000 {
                    displacements.push(snap_t[j * dim] - snap0[i * dim]);
                }
            }
        }
        singleton_fracs.push(singles as f64 / n as f64);
        if lambda.top_mass() > 0.0 && deterministic {
            let full_event = traj.events.iter().any(|e| match &e.event {
                crate::lookdown::LookdownEvent::Multi { levels } => levels.len() == n,
                _ => false,
            });
            if full_event {
                collapse_eligible += 1;
                let base = &snap_t[0..dim];
                let all_equal =
                    (1..n).all(|j| (0..dim).all(|c| (snap_t[j * dim + c] - base[c]).abs() < 1e-9));
                if all_equal {
                    collapsed += 1;
                }
            }
        }
    }
    let frac = McEstimate::from_samples(&singleton_fracs);
    let displacement_test_p = if displacements.len() >= 200 && !deterministic {
        let fresh: Vec<f64> = (0..displacements.len())
            .map(|_| levy.sample_increment(t, rng)[0])
            .collect();
        let pooled: Vec<f64> = displacements.iter().chain(fresh.iter()).copied().collect();
        let edges = stats::quantile_edges(&pooled, 10);
        let mut ca = vec![0u64; 10];
        let mut cb = vec![0u64; 10];
        for &d in &displacements {
            ca[stats::bin_index(&edges, d)] += 1;
        }
        for &f in &fresh {
            cb[stats::bin_index(&edges, f)] += 1;
        }
        Some(stats::chi_square_homogeneity(&ca, &cb).2)
    } else {
        None
    };
    Ok(DustReport {
        singleton_fraction: frac.value,
        singleton_fraction_stderr: frac.stderr,
        displacement_test_p,
        collapse_fraction: if collapse_eligible > 0 {
            Some(collapsed as f64 / collapse_eligible as f64)
        } else {
            None
        },
    })
}
