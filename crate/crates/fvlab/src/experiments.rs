//! Named experiment presets shared by the CLI and the examples.
//!
//! Every run is driven by an `ExperimentConfig`; outputs embed the resolved
//! config and the crate version, and are byte-identical for identical
//! `(config, seed)` regardless of worker scheduling (replicas use
//! per-index RNG streams and are collected in index order).

use std::collections::BTreeMap;
use std::fmt::Write as _;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use crate::coalescent::{simulate_with_sampler, CoalescentPath};
use crate::error::{FvError, Result};
use crate::fv;
use crate::lambda::{parse_lambda, LambdaMeasure, SubsetRateSampler};
use crate::levy::{parse_levy, LevySpec};
use crate::lookdown::{self, simulate_lookdown, EventLogHeader, LookdownEvent};
use crate::measure::DiscreteMeasure;
use crate::stats;

pub const VERSION: &str = concat!("fvlab ", env!("CARGO_PKG_VERSION"));

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Csv,
    Json,
}

/// Fully resolved run configuration.
#[derive(Debug, Clone, Serialize)]
pub struct ExperimentConfig {
    pub experiment: String,
    pub lambda: String,
    pub levy: String,
    pub n: usize,
    pub t: f64,
    pub tgrid: Option<String>,
    pub replicas: usize,
    pub seed: u64,
    pub format: OutputFormat,
    pub event_cap: Option<usize>,
    /// Experiment-specific parameters (eps, b, k, ball, bmax, s, ...).
    pub extra: BTreeMap<String, String>,
}

impl ExperimentConfig {
    pub fn new(experiment: &str) -> Self {
        // Defaults that make each preset runnable as-is: the support probe
        // needs point-mass jumps and the dust probe needs a dust measure.
        let lambda = if experiment == "dust" {
            "beta:0.5"
        } else {
            "kingman:1"
        };
        let levy = if experiment == "support" {
            "cpois:rate=1,jump=point:1;-1"
        } else {
            "brownian:sigma=1"
        };
        Self {
            experiment: experiment.to_string(),
            lambda: lambda.into(),
            levy: levy.into(),
            n: 100,
            t: 0.1,
            tgrid: None,
            replicas: 100,
            seed: 1,
            format: OutputFormat::Json,
            event_cap: None,
            extra: BTreeMap::new(),
        }
    }

    pub fn extra_f64(&self, key: &str, default: f64) -> Result<f64> {
        match self.extra.get(key) {
            None => Ok(default),
            Some(v) => v.parse().map_err(|_| FvError::Parse {
                input: v.clone(),
                reason: format!("bad value for `{key}`"),
            }),
        }
    }

    pub fn extra_usize(&self, key: &str, default: usize) -> Result<usize> {
        match self.extra.get(key) {
            None => Ok(default),
            Some(v) => v.parse().map_err(|_| FvError::Parse {
                input: v.clone(),
                reason: format!("bad value for `{key}`"),
            }),
        }
    }

    /// Apply `key=value` settings (from a config file section or CLI).
    pub fn apply(&mut self, key: &str, value: &str) -> Result<()> {
        let bad = |reason: &str| FvError::Parse {
            input: format!("{key}={value}"),
            reason: reason.to_string(),
        };
        match key {
            "lambda" => self.lambda = value.to_string(),
            "levy" => self.levy = value.to_string(),
            "n" => self.n = value.parse().map_err(|_| bad("bad n"))?,
            "t" => self.t = value.parse().map_err(|_| bad("bad t"))?,
            "tgrid" => self.tgrid = Some(value.to_string()),
            "replicas" => self.replicas = value.parse().map_err(|_| bad("bad replicas"))?,
            "seed" => self.seed = value.parse().map_err(|_| bad("bad seed"))?,
            "format" => {
                self.format = match value {
                    "csv" => OutputFormat::Csv,
                    "json" => OutputFormat::Json,
                    _ => return Err(bad("format must be csv or json")),
                }
            }
            "event_cap" => self.event_cap = Some(value.parse().map_err(|_| bad("bad event_cap"))?),
            _ => {
                self.extra.insert(key.to_string(), value.to_string());
            }
        }
        Ok(())
    }

    fn validate(&self) -> Result<()> {
        if self.replicas < 1 {
            return Err(FvError::Precondition("replicas must be >= 1".into()));
        }
        Ok(())
    }
}

/// Parse a flat `key=value` config file with optional `[experiment]`
/// sections; keys before any section apply to all experiments.
pub fn apply_config_file(config: &mut ExperimentConfig, text: &str) -> Result<()> {
    let mut active = true;
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if let Some(section) = line.strip_prefix('[').and_then(|s| s.strip_suffix(']')) {
            active = section == config.experiment;
            continue;
        }
        if !active {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| FvError::Parse {
            input: line.to_string(),
            reason: format!("line {}: expected key=value", lineno + 1),
        })?;
        config.apply(k.trim(), v.trim())?;
    }
    Ok(())
}

/// Parse a `geo:lo,hi,count` or `lin:lo,hi,count` grid.
pub fn parse_tgrid(spec: &str) -> Result<Vec<f64>> {
    let err = |reason: &str| FvError::Parse {
        input: spec.to_string(),
        reason: reason.to_string(),
    };
    let (kind, rest) = spec
        .split_once(':')
        .ok_or_else(|| err("expected kind:lo,hi,count"))?;
    let parts: Vec<&str> = rest.split(',').collect();
    if parts.len() != 3 {
        return Err(err("expected lo,hi,count"));
    }
    let lo: f64 = parts[0].parse().map_err(|_| err("bad lo"))?;
    let hi: f64 = parts[1].parse().map_err(|_| err("bad hi"))?;
    let count: usize = parts[2].parse().map_err(|_| err("bad count"))?;
    if count < 2 || hi <= lo {
        return Err(err("need count >= 2 and hi > lo"));
    }
    let grid = match kind {
        "lin" => (0..count)
            .map(|i| lo + (hi - lo) * i as f64 / (count - 1) as f64)
            .collect(),
        "geo" => {
            if lo <= 0.0 {
                return Err(err("geometric grid needs lo > 0"));
            }
            let ratio = (hi / lo).powf(1.0 / (count - 1) as f64);
            (0..count).map(|i| lo * ratio.powi(i as i32)).collect()
        }
        _ => return Err(err("grid kind must be geo or lin")),
    };
    Ok(grid)
}

/// Per-replica deterministic RNG: a fixed seed with a per-replica stream, so
/// results do not depend on scheduling.
pub fn replica_rng(seed: u64, replica: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(replica.wrapping_add(1));
    rng
}

fn config_echo_csv(config: &ExperimentConfig) -> String {
    let mut out = String::new();
    writeln!(out, "# version: {VERSION}").unwrap();
    writeln!(
        out,
        "# config: experiment={} lambda={} levy={} n={} t={} tgrid={} replicas={} seed={} format={:?} event_cap={:?}",
        config.experiment,
        config.lambda,
        config.levy,
        config.n,
        config.t,
        config.tgrid.as_deref().unwrap_or("-"),
        config.replicas,
        config.seed,
        config.format,
        config.event_cap,
    )
    .unwrap();
    for (k, v) in &config.extra {
        writeln!(out, "# config.{k}: {v}").unwrap();
    }
    out
}

fn json_output(config: &ExperimentConfig, result: serde_json::Value) -> String {
    let doc = json!({
        "version": VERSION,
        "config": config,
        "result": result,
    });
    let mut s = serde_json::to_string_pretty(&doc).unwrap();
    s.push('\n');
    s
}

/// Default initial measure: a unit atom at the origin of `R^dim`.
fn default_mu0(dim: usize) -> DiscreteMeasure {
    DiscreteMeasure::dirac(&vec![0.0; dim])
}

/// Parse an observable name: `one`, `coord`, or `ball:<center>:<radius>`
/// (1-d center).
fn parse_observable(spec: &str) -> Result<Box<dyn Fn(&[f64]) -> f64 + Sync + Send>> {
    if spec == "one" {
        return Ok(Box::new(|_| 1.0));
    }
    if spec == "coord" {
        return Ok(Box::new(|x| x[0]));
    }
    if let Some(rest) = spec.strip_prefix("ball:") {
        let (c, r) = rest.split_once(':').ok_or_else(|| FvError::Parse {
            input: spec.to_string(),
            reason: "ball needs ball:<center>:<radius>".into(),
        })?;
        let center: f64 = c.parse().map_err(|_| FvError::Parse {
            input: spec.to_string(),
            reason: "bad ball center".into(),
        })?;
        let radius: f64 = r.parse().map_err(|_| FvError::Parse {
            input: spec.to_string(),
            reason: "bad ball radius".into(),
        })?;
        return Ok(Box::new(move |x: &[f64]| {
            let d2: f64 = x.iter().map(|&v| (v - center) * (v - center)).sum();
            if d2 < radius * radius {
                1.0
            } else {
                0.0
            }
        }));
    }
    Err(FvError::Parse {
        input: spec.to_string(),
        reason: "observable must be one | coord | ball:<center>:<radius>".into(),
    })
}

/// Run a preset and return the output artifact as text.
pub fn run(config: &ExperimentConfig) -> Result<String> {
    config.validate()?;
    match config.experiment.as_str() {
        "rates" => run_rates(config),
        "speed" => run_speed(config),
        "moments" => run_moments(config),
        "support" => run_support(config),
        "dust" => run_dust(config),
        "bounds" => run_bounds(config),
        "genealogy" => run_genealogy(config),
        "coalescent" => run_coalescent_dump(config),
        other => Err(FvError::Domain(format!("unknown experiment `{other}`"))),
    }
}

/// E1: merger-rate table for all 2 <= k <= b <= bmax.
fn run_rates(config: &ExperimentConfig) -> Result<String> {
    let lambda = parse_lambda(&config.lambda)?;
    let bmax = config.extra_usize("bmax", 12)?;
    match config.format {
        OutputFormat::Csv => {
            let mut out = config_echo_csv(config);
            writeln!(out, "experiment,b,k,rate").unwrap();
            for b in 2..=bmax {
                for k in 2..=b {
                    writeln!(out, "rates,{b},{k},{}", lambda.merger_rate(b, k)?).unwrap();
                }
            }
            Ok(out)
        }
        OutputFormat::Json => {
            let mut rows = Vec::new();
            for b in 2..=bmax {
                for k in 2..=b {
                    rows.push(json!({"b": b, "k": k, "rate": lambda.merger_rate(b, k)?}));
                }
            }
            Ok(json_output(config, json!({ "rates": rows })))
        }
    }
}

/// E2: block counts along a t-grid against the speed envelope `v(t)` and the
/// universal lower bound `c_Lambda / t`.
fn run_speed(config: &ExperimentConfig) -> Result<String> {
    let lambda = parse_lambda(&config.lambda)?;
    let grid = match &config.tgrid {
        Some(g) => parse_tgrid(g)?,
        None => vec![config.t],
    };
    let horizon = *grid.last().unwrap();
    let sampler = SubsetRateSampler::new(&lambda, config.n);
    let v_vals: Vec<f64> = grid
        .iter()
        .map(|&t| lambda.v_of_t(t))
        .collect::<Result<_>>()?;
    let c_lambda = lambda.c_lambda();

    let paths: Vec<CoalescentPath> = (0..config.replicas)
        .into_par_iter()
        .map(|r| {
            let mut rng = replica_rng(config.seed, r as u64);
            simulate_with_sampler(&sampler, config.n, horizon, &mut rng)
        })
        .collect::<Result<_>>()?;

    match config.format {
        OutputFormat::Csv => {
            let mut out = config_echo_csv(config);
            writeln!(out, "experiment,replica,t,n_blocks,v_t,c_over_t").unwrap();
            for (r, path) in paths.iter().enumerate() {
                for (i, &t) in grid.iter().enumerate() {
                    writeln!(
                        out,
                        "speed,{r},{t},{},{},{}",
                        path.block_count_at(t),
                        v_vals[i],
                        c_lambda / t
                    )
                    .unwrap();
                }
            }
            Ok(out)
        }
        OutputFormat::Json => {
            let rows: Vec<_> = grid
                .iter()
                .enumerate()
                .map(|(i, &t)| {
                    let counts: Vec<usize> = paths.iter().map(|p| p.block_count_at(t)).collect();
                    let median =
                        stats::median(&counts.iter().map(|&c| c as f64).collect::<Vec<_>>());
                    json!({
                        "t": t,
                        "v_t": v_vals[i],
                        "c_over_t": c_lambda / t,
                        "median_blocks": median,
                        "counts": counts,
                    })
                })
                .collect();
            Ok(json_output(config, json!({ "speed": rows })))
        }
    }
}

/// E3: first- and second-moment identity checks.
fn run_moments(config: &ExperimentConfig) -> Result<String> {
    let lambda = parse_lambda(&config.lambda)?;
    let levy = parse_levy(&config.levy)?;
    let mu0 = default_mu0(levy.dim());
    let phi = parse_observable(
        config
            .extra
            .get("phi")
            .map(String::as_str)
            .unwrap_or("ball:0:1"),
    )?;
    let psi = parse_observable(
        config
            .extra
            .get("psi")
            .map(String::as_str)
            .unwrap_or("ball:0:1"),
    )?;
    let s_nodes = config.extra_usize("s_nodes", 32)?;
    let mut rng = replica_rng(config.seed, 0);
    let first = fv::first_moment_check(
        &lambda,
        &levy,
        &mu0,
        config.t,
        phi.as_ref(),
        config.n,
        config.replicas,
        &mut rng,
    )?;
    let second = fv::second_moment_check(
        &lambda,
        &levy,
        &mu0,
        config.t,
        phi.as_ref(),
        psi.as_ref(),
        config.n,
        config.replicas,
        s_nodes,
        &mut rng,
    )?;
    Ok(json_output(
        config,
        json!({"first_moment": first, "second_moment": second}),
    ))
}

/// E4: support propagation probe.
fn run_support(config: &ExperimentConfig) -> Result<String> {
    let lambda = parse_lambda(&config.lambda)?;
    let levy = parse_levy(&config.levy)?;
    let mu0 = default_mu0(levy.dim());
    let k = config.extra_usize("k", 1)?;
    let eps = config.extra_f64("eps", 0.25)?;
    let floor = config.extra_f64("weight_floor", 0.0)?;
    let mut rng = replica_rng(config.seed, 0);
    let report = fv::support_propagation_probe(
        &lambda,
        &levy,
        &mu0,
        config.t,
        k,
        eps,
        floor,
        config.n,
        config.replicas,
        &mut rng,
    )?;
    Ok(json_output(config, serde_json::to_value(&report).unwrap()))
}

/// E5: dust-regime probe.
fn run_dust(config: &ExperimentConfig) -> Result<String> {
    let lambda = parse_lambda(&config.lambda)?;
    let levy = parse_levy(&config.levy)?;
    let mu0 = default_mu0(levy.dim());
    let mut rng = replica_rng(config.seed, 0);
    let report = fv::dust_regime_probe(
        &lambda,
        &levy,
        &mu0,
        config.t,
        config.n,
        config.replicas,
        &mut rng,
    )?;
    Ok(json_output(config, serde_json::to_value(&report).unwrap()))
}

/// E6: cluster mass and hit lower bounds.
fn run_bounds(config: &ExperimentConfig) -> Result<String> {
    let lambda = parse_lambda(&config.lambda)?;
    let levy = parse_levy(&config.levy)?;
    let dim = levy.dim();
    let s = config.extra_f64("s", config.t / 2.0)?;
    let ball_center = config.extra_f64("ball_center", 0.0)?;
    let ball_radius = config.extra_f64("ball_radius", 1.0)?;
    let eps = config.extra_f64("eps", 0.25)?;
    let b = config.extra_f64("b", 0.05)?;
    let mu0 = default_mu0(dim);
    let b_points = vec![vec![0.0; dim]];
    let mut rng = replica_rng(config.seed, 0);
    let mass = fv::cluster_mass_bound_check(
        &lambda,
        &levy,
        &mu0,
        config.t,
        s,
        &vec![ball_center; dim],
        ball_radius,
        config.n,
        config.replicas,
        &mut rng,
    )?;
    let hit = fv::cluster_hit_bound_check(
        &lambda,
        &levy,
        &mu0,
        config.t,
        &b_points,
        eps,
        b,
        config.n,
        config.replicas,
        &mut rng,
    )?;
    Ok(json_output(
        config,
        json!({"mass_bound": mass, "hit_bound": hit}),
    ))
}

/// Distribution of the first merger event (time and participant set), used to
/// compare the lookdown genealogy with the plain coalescent.
#[derive(Debug, Clone, Serialize)]
pub struct GenealogyReport {
    pub replicas: usize,
    /// p-value of the joint (participant set x time-decile) homogeneity test
    /// between lookdown and coalescent first events.
    pub first_event_p: f64,
    /// Violations of the block-label = ancestor-level invariant.
    pub label_invariant_violations: usize,
    pub label_invariant_trajectories: usize,
}

/// First-event comparison between the two constructions.
pub fn genealogy_suite(
    lambda: &LambdaMeasure,
    n: usize,
    replicas: usize,
    seed: u64,
) -> Result<GenealogyReport> {
    if !(2..=6).contains(&n) {
        return Err(FvError::Precondition(
            "genealogy suite is meant for 2 <= n <= 6".into(),
        ));
    }
    let levy = LevySpec::frozen(1);
    let sampler = SubsetRateSampler::new(lambda, n);
    // Category = subset of [n] with >= 2 elements, encoded as a bitmask.
    let n_masks = 1usize << n;
    let mut mask_index = vec![usize::MAX; n_masks];
    let mut n_cats = 0;
    for mask in 0..n_masks {
        if (mask as u32).count_ones() >= 2 {
            mask_index[mask] = n_cats;
            n_cats += 1;
        }
    }
    let mut look_events: Vec<(f64, usize)> = Vec::with_capacity(replicas);
    let mut coal_events: Vec<(f64, usize)> = Vec::with_capacity(replicas);
    for r in 0..replicas {
        // Lookdown first event. The waiting times are consumed in a fixed
        // order from the stream, so rerunning the same stream with a longer
        // horizon reproduces the same first event; double until one lands.
        let mut horizon = 4.0 / sampler.total_rate(n);
        let first = loop {
            let mut rng = replica_rng(seed, r as u64);
            let traj =
                simulate_lookdown(n, lambda, &levy, |_| vec![0.0], &[horizon], None, &mut rng)?;
            if let Some(first) = traj.events.first() {
                break first.clone();
            }
            horizon *= 2.0;
            if !horizon.is_finite() {
                return Err(FvError::Precondition("no lookdown event occurred".into()));
            }
        };
        let mask = match &first.event {
            LookdownEvent::Pair { i, j } => (1usize << i) | (1usize << j),
            LookdownEvent::Multi { levels } => {
                levels.iter().fold(0usize, |m, &l| m | (1usize << l))
            }
        };
        look_events.push((first.time, mask_index[mask]));

        let mut rng = replica_rng(seed.wrapping_add(0x9e37_79b9), r as u64);
        let path = simulate_with_sampler(&sampler, n, f64::INFINITY, &mut rng)?;
        let first = path.events.first().unwrap();
        let mask = first.merged.iter().fold(0usize, |m, &l| m | (1usize << l));
        coal_events.push((first.time, mask_index[mask]));
    }

    // Joint cells: category x pooled-time decile.
    let pooled: Vec<f64> = look_events
        .iter()
        .chain(coal_events.iter())
        .map(|e| e.0)
        .collect();
    let edges = stats::quantile_edges(&pooled, 10);
    let mut row_a = vec![0u64; n_cats * 10];
    let mut row_b = vec![0u64; n_cats * 10];
    for &(t, cat) in &look_events {
        row_a[cat * 10 + stats::bin_index(&edges, t)] += 1;
    }
    for &(t, cat) in &coal_events {
        row_b[cat * 10 + stats::bin_index(&edges, t)] += 1;
    }
    let (_, _, p) = stats::chi_square_homogeneity(&row_a, &row_b);

    // Label invariant on a batch of longer trajectories.
    let mut violations = 0usize;
    let trajectories = 200usize.min(replicas);
    for r in 0..trajectories {
        let mut rng = replica_rng(seed.wrapping_add(0xdead_beef), r as u64);
        let t = 0.5 + (r % 5) as f64 * 0.25;
        let traj = simulate_lookdown(n, lambda, &levy, |_| vec![0.0], &[t], None, &mut rng)?;
        for frac in [0.25, 0.75, 1.0] {
            let ap = traj.ancestral_partition(t, frac * t)?;
            for (i, block) in ap.partition.blocks().iter().enumerate() {
                for &j in block {
                    if ap.ancestor_level[j as usize] != i {
                        violations += 1;
                    }
                }
            }
        }
    }

    Ok(GenealogyReport {
        replicas,
        first_event_p: p,
        label_invariant_violations: violations,
        label_invariant_trajectories: trajectories,
    })
}

/// E7: genealogy duality suite.
fn run_genealogy(config: &ExperimentConfig) -> Result<String> {
    let lambda = parse_lambda(&config.lambda)?;
    let n = if config.n > 6 { 4 } else { config.n };
    let report = genealogy_suite(&lambda, n, config.replicas, config.seed)?;
    Ok(json_output(config, serde_json::to_value(&report).unwrap()))
}

/// `coalescent`: raw event-log dump of a lookdown genealogy run.
fn run_coalescent_dump(config: &ExperimentConfig) -> Result<String> {
    let lambda = parse_lambda(&config.lambda)?;
    let levy = LevySpec::frozen(1);
    let mut rng = replica_rng(config.seed, 0);
    let traj = simulate_lookdown(
        config.n,
        &lambda,
        &levy,
        |_| vec![0.0],
        &[config.t],
        config.event_cap,
        &mut rng,
    )?;
    let header = EventLogHeader {
        n: config.n,
        seed: config.seed,
        lambda_spec: config.lambda.clone(),
        levy_spec: "0".into(),
    };
    Ok(lookdown::write_event_log(&header, &traj.events))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tgrid_parsing() {
        let g = parse_tgrid("lin:0,1,5").unwrap();
        assert_eq!(g, vec![0.0, 0.25, 0.5, 0.75, 1.0]);
        let g = parse_tgrid("geo:1e-2,1,3").unwrap();
        assert!((g[0] - 0.01).abs() < 1e-15);
        assert!((g[1] - 0.1).abs() < 1e-12);
        assert!((g[2] - 1.0).abs() < 1e-12);
        assert!(parse_tgrid("log:1,2,3").is_err());
        assert!(parse_tgrid("lin:1,0,3").is_err());
    }

    #[test]
    fn config_file_sections_and_overrides() {
        let mut c = ExperimentConfig::new("speed");
        apply_config_file(
            &mut c,
            "seed=7\n[moments]\nn=555\n[speed]\nn=42\ntgrid=geo:0.01,0.1,4\n# comment\n",
        )
        .unwrap();
        assert_eq!(c.seed, 7);
        assert_eq!(c.n, 42);
        assert_eq!(c.tgrid.as_deref(), Some("geo:0.01,0.1,4"));
    }

    #[test]
    fn rates_preset_kingman_table() {
        let mut c = ExperimentConfig::new("rates");
        c.format = OutputFormat::Csv;
        c.apply("bmax", "6").unwrap();
        let out = run(&c).unwrap();
        assert!(out.contains("rates,6,2,1"));
        assert!(out.contains("rates,6,3,0"));
        assert!(out.contains("# version: fvlab"));
    }

    #[test]
    fn determinism_identical_runs() {
        for experiment in ["speed", "moments", "genealogy", "coalescent"] {
            let mut c = ExperimentConfig::new(experiment);
            c.n = 20;
            c.replicas = 20;
            c.t = 0.2;
            if experiment == "speed" {
                c.format = OutputFormat::Csv;
                c.tgrid = Some("geo:0.05,0.2,3".into());
            }
            let a = run(&c).unwrap();
            let b = run(&c).unwrap();
            assert_eq!(a, b, "{experiment} output not deterministic");
        }
    }

    #[test]
    fn genealogy_duality_small_n() {
        let lambda = parse_lambda("kingman:0.5+beta:1.5:0.5").unwrap();
        let report = genealogy_suite(&lambda, 3, 4000, 11).unwrap();
        assert!(report.first_event_p > 1e-3, "p = {}", report.first_event_p);
        assert_eq!(report.label_invariant_violations, 0);
    }

    #[test]
    fn unknown_experiment_rejected() {
        let c = ExperimentConfig::new("nope");
        assert!(run(&c).is_err());
    }

    #[test]
    fn coalescent_dump_roundtrips() {
        let mut c = ExperimentConfig::new("coalescent");
        c.n = 10;
        c.t = 1.0;
        let out = run(&c).unwrap();
        let (header, events) = lookdown::parse_event_log(&out).unwrap();
        assert_eq!(header.n, 10);
        assert!(!events.is_empty());
        assert_eq!(lookdown::write_event_log(&header, &events), out);
    }
}
