//! The ordered (lookdown) particle system on levels `0..n`.
//!
//! Reproduction never moves a particle to a lower level: at a pair event
//! `(i, j)` the level-`j` slot becomes a copy of level `i` and former
//! occupants of levels `>= j` shift up one slot; at a multi event with
//! participant set `J` every level in `J` becomes a copy of the parent
//! `min J` and non-participants shift up past the inserted offspring.
//! Particles pushed above level `n - 1` are discarded; the first `n` levels
//! never look up, so the truncation is exact in law.
//!
//! Between events every level moves by independent increments of the
//! mutation process. Positions are advanced lazily: only the parent level is
//! brought up to date at an event, and all levels at a snapshot time.

use std::fmt::Write as _;

use rand::Rng;

use crate::error::{FvError, Result};
use crate::lambda::{LambdaMeasure, SubsetRateSampler};
use crate::levy::LevySpec;
use crate::measure::DiscreteMeasure;
use crate::partition::Partition;

/// One reproduction event. Levels are 0-based.
#[derive(Debug, Clone, PartialEq)]
pub enum LookdownEvent {
    /// Kingman pair event: level `j` becomes a copy of level `i < j`.
    Pair { i: usize, j: usize },
    /// Multiple-merger event: every level in `levels` (sorted, length >= 2)
    /// becomes a copy of the lowest one.
    Multi { levels: Vec<usize> },
}

#[derive(Debug, Clone, PartialEq)]
pub struct TimedEvent {
    pub time: f64,
    pub event: LookdownEvent,
}

/// A simulated lookdown trajectory with position snapshots at the requested
/// sample times and the full event log.
#[derive(Debug, Clone)]
pub struct LookdownTrajectory {
    pub n: usize,
    pub dim: usize,
    pub sample_times: Vec<f64>,
    /// One flat `n * dim` coordinate vector per sample time.
    pub snapshots: Vec<Vec<f64>>,
    pub events: Vec<TimedEvent>,
}

/// Ancestor levels at lookback `s` from reference time `t`, and the induced
/// partition of levels by common ancestor.
#[derive(Debug, Clone)]
pub struct AncestralPartition {
    pub t: f64,
    pub s: f64,
    /// `ancestor_level[i]` is the level at time `t - s` of the ancestor of
    /// the particle at level `i` at time `t`.
    pub ancestor_level: Vec<usize>,
    pub partition: Partition,
}

/// Apply the level-shift rule of `event` to a per-level array, copying the
/// parent's entry into offspring slots.
pub fn apply_event_to_levels<T: Copy>(levels: &mut [T], event: &LookdownEvent) {
    match event {
        LookdownEvent::Pair { i, j } => {
            let parent = levels[*i];
            for k in ((*j + 1)..levels.len()).rev() {
                levels[k] = levels[k - 1];
            }
            levels[*j] = parent;
        }
        LookdownEvent::Multi { levels: part } => {
            let old: Vec<T> = levels.to_vec();
            let parent = old[part[0]];
            let mut seen = 0usize;
            let mut next = 0usize;
            for k in 0..levels.len() {
                if next < part.len() && part[next] == k {
                    levels[k] = parent;
                    next += 1;
                    seen += 1;
                } else if seen >= 1 {
                    levels[k] = old[k - (seen - 1)];
                }
            }
        }
    }
}

/// Same shift rule on flat `n * dim` coordinate blocks.
fn apply_event_to_positions(pos: &mut [f64], dim: usize, event: &LookdownEvent) {
    let n = pos.len() / dim;
    match event {
        LookdownEvent::Pair { i, j } => {
            pos.copy_within(j * dim..(n - 1) * dim, (j + 1) * dim);
            pos.copy_within(i * dim..(i + 1) * dim, j * dim);
        }
        LookdownEvent::Multi { levels: part } => {
            let old = pos.to_vec();
            let p = part[0];
            let mut seen = 0usize;
            let mut next = 0usize;
            for k in 0..n {
                if next < part.len() && part[next] == k {
                    pos[k * dim..(k + 1) * dim].copy_from_slice(&old[p * dim..(p + 1) * dim]);
                    next += 1;
                    seen += 1;
                } else if seen >= 1 {
                    let src = k - (seen - 1);
                    pos[k * dim..(k + 1) * dim].copy_from_slice(&old[src * dim..(src + 1) * dim]);
                }
            }
        }
    }
}

/// Simulate the first `n` levels of the lookdown system driven by `lambda`
/// (pair events from the atom at zero, multi events from the rest) with
/// mutation `levy`, recording position snapshots at `sample_times`.
pub fn simulate_lookdown<R, F>(
    n: usize,
    lambda: &LambdaMeasure,
    levy: &LevySpec,
    mu0: F,
    sample_times: &[f64],
    event_cap: Option<usize>,
    rng: &mut R,
) -> Result<LookdownTrajectory>
where
    R: Rng + ?Sized,
    F: FnMut(&mut R) -> Vec<f64>,
{
    LookdownEngine::new(lambda, n).simulate(levy, mu0, sample_times, event_cap, rng)
}

/// Precomputed event rates for repeated lookdown runs with the same
/// resampling measure and particle count; building the multi-merger sampler
/// is the expensive part and is shared across replicas.
pub struct LookdownEngine {
    n: usize,
    kingman_rate: f64,
    multi_sampler: Option<SubsetRateSampler>,
    total_rate: f64,
}

impl LookdownEngine {
    pub fn new(lambda: &LambdaMeasure, n: usize) -> Self {
        assert!(n >= 1);
        let kingman_rate = if n >= 2 {
            0.5 * (n * (n - 1)) as f64 * lambda.kingman_mass()
        } else {
            0.0
        };
        let multi = lambda.without_kingman_atom();
        let multi_sampler = if n >= 2 && !multi.is_zero() {
            Some(SubsetRateSampler::new(&multi, n))
        } else {
            None
        };
        let multi_rate = multi_sampler.as_ref().map_or(0.0, |s| s.total_rate(n));
        Self {
            n,
            kingman_rate,
            multi_sampler,
            total_rate: kingman_rate + multi_rate,
        }
    }

    pub fn simulate<R, F>(
        &self,
        levy: &LevySpec,
        mut mu0: F,
        sample_times: &[f64],
        event_cap: Option<usize>,
        rng: &mut R,
    ) -> Result<LookdownTrajectory>
    where
        R: Rng + ?Sized,
        F: FnMut(&mut R) -> Vec<f64>,
    {
        let n = self.n;
        assert!(
            sample_times.windows(2).all(|w| w[0] <= w[1]),
            "sample times must be sorted"
        );
        let dim = levy.dim();
        let horizon = sample_times.last().copied().unwrap_or(0.0);

        let mut pos = Vec::with_capacity(n * dim);
        for _ in 0..n {
            let x = mu0(rng);
            assert_eq!(x.len(), dim, "initial sampler dimension mismatch");
            pos.extend(x);
        }
        let mut last = vec![0.0f64; n];

        let kingman_rate = self.kingman_rate;
        let multi_sampler = self.multi_sampler.as_ref();
        let total_rate = self.total_rate;

        let advance =
            |pos: &mut Vec<f64>, last: &mut Vec<f64>, level: usize, t: f64, rng: &mut R| {
                let dt = t - last[level];
                if dt > 0.0 {
                    let inc = levy.sample_increment(dt, rng);
                    for (slot, d) in pos[level * dim..(level + 1) * dim].iter_mut().zip(inc) {
                        *slot += d;
                    }
                    last[level] = t;
                }
            };

        let mut snapshots = Vec::with_capacity(sample_times.len());
        let mut events: Vec<TimedEvent> = Vec::new();
        let mut next_sample = 0usize;
        let mut t = 0.0f64;
        loop {
            let t_event = if total_rate > 0.0 {
                t - rng.gen::<f64>().ln() / total_rate
            } else {
                f64::INFINITY
            };
            while next_sample < sample_times.len() && sample_times[next_sample] <= t_event {
                let ts = sample_times[next_sample];
                for level in 0..n {
                    advance(&mut pos, &mut last, level, ts, rng);
                }
                snapshots.push(pos.clone());
                next_sample += 1;
            }
            if t_event > horizon {
                break;
            }
            if let Some(cap) = event_cap {
                if events.len() >= cap {
                    return Err(FvError::EventCap { cap, time: t_event });
                }
            }
            t = t_event;
            let event = if rng.gen::<f64>() * total_rate < kingman_rate {
                let mut pair = rand::seq::index::sample(rng, n, 2).into_vec();
                pair.sort_unstable();
                LookdownEvent::Pair {
                    i: pair[0],
                    j: pair[1],
                }
            } else {
                let sampler = multi_sampler.unwrap();
                let k = sampler.sample_k(n, rng);
                let mut levels = rand::seq::index::sample(rng, n, k).into_vec();
                levels.sort_unstable();
                LookdownEvent::Multi { levels }
            };
            // Bring the parent up to date, then shift positions and their clocks.
            let parent = match &event {
                LookdownEvent::Pair { i, .. } => *i,
                LookdownEvent::Multi { levels } => levels[0],
            };
            advance(&mut pos, &mut last, parent, t, rng);
            apply_event_to_positions(&mut pos, dim, &event);
            apply_event_to_levels(&mut last, &event);
            events.push(TimedEvent { time: t, event });
        }

        Ok(LookdownTrajectory {
            n,
            dim,
            sample_times: sample_times.to_vec(),
            snapshots,
            events,
        })
    }
}

impl LookdownTrajectory {
    fn snapshot_index(&self, t: f64) -> Result<usize> {
        self.sample_times
            .iter()
            .position(|&s| s == t)
            .ok_or_else(|| FvError::Domain(format!("time {t} was not sampled")))
    }

    /// Positions of all levels at a sampled time, flat `n * dim`.
    pub fn positions_at(&self, t: f64) -> Result<&[f64]> {
        Ok(&self.snapshots[self.snapshot_index(t)?])
    }

    /// Position of one level at a sampled time.
    pub fn position_of(&self, level: usize, t: f64) -> Result<&[f64]> {
        let snap = self.positions_at(t)?;
        Ok(&snap[level * self.dim..(level + 1) * self.dim])
    }

    /// `Z_t^{(n)} = n^{-1} sum_i delta_{X_i(t)}` at a sampled time.
    pub fn empirical_measure(&self, t: f64) -> Result<DiscreteMeasure> {
        Ok(DiscreteMeasure::empirical(
            self.dim,
            self.positions_at(t)?.to_vec(),
        ))
    }

    /// Ancestor levels at time `t - s` of the particles at time `t`, computed
    /// by replaying the event log over `(t - s, t]`.
    pub fn ancestral_partition(&self, t: f64, s: f64) -> Result<AncestralPartition> {
        if !(0.0 <= s && s <= t) {
            return Err(FvError::Domain("need 0 <= s <= t".into()));
        }
        if t > self.sample_times.last().copied().unwrap_or(0.0) {
            return Err(FvError::Domain("event log does not cover t".into()));
        }
        // Forward over the window: ancestor_at_window_start of each current
        // level. Offspring slots inherit the parent's ancestor.
        let mut anc: Vec<usize> = (0..self.n).collect();
        for e in &self.events {
            if e.time <= t - s {
                continue;
            }
            if e.time > t {
                break;
            }
            apply_event_to_levels(&mut anc, &e.event);
        }
        let partition = Partition::from_assignment(&anc);
        Ok(AncestralPartition {
            t,
            s,
            ancestor_level: anc,
            partition,
        })
    }

    /// Cluster measure `Z_{i,s}^{(n)}(t, phi)`: the `phi`-mass at time `t`
    /// carried by the block at least-element index `block_index` of the
    /// ancestral partition at lookback `s`.
    pub fn cluster_measure(
        &self,
        t: f64,
        s: f64,
        block_index: usize,
        phi: &dyn Fn(&[f64]) -> f64,
    ) -> Result<f64> {
        let ap = self.ancestral_partition(t, s)?;
        let snap = self.positions_at(t)?;
        let blocks = ap.partition.blocks();
        if block_index >= blocks.len() {
            return Err(FvError::Domain(format!(
                "block index {block_index} out of range ({} blocks)",
                blocks.len()
            )));
        }
        let sum: f64 = blocks[block_index]
            .iter()
            .map(|&j| {
                let j = j as usize;
                phi(&snap[j * self.dim..(j + 1) * self.dim])
            })
            .sum();
        Ok(sum / self.n as f64)
    }
}

/// Metadata carried in a serialized event log.
#[derive(Debug, Clone, PartialEq)]
pub struct EventLogHeader {
    pub n: usize,
    pub seed: u64,
    pub lambda_spec: String,
    pub levy_spec: String,
}

/// Serialize an event log as line-oriented text. Times use the shortest
/// round-trip decimal form, so parsing reproduces the exact bits.
pub fn write_event_log(header: &EventLogHeader, events: &[TimedEvent]) -> String {
    let mut out = String::new();
    writeln!(out, "# fvlab event log v1").unwrap();
    writeln!(
        out,
        "# n={} seed={} lambda={} levy={}",
        header.n, header.seed, header.lambda_spec, header.levy_spec
    )
    .unwrap();
    for e in events {
        match &e.event {
            LookdownEvent::Pair { i, j } => {
                writeln!(out, "{} P {} {}", e.time, i, j).unwrap();
            }
            LookdownEvent::Multi { levels } => {
                let list: Vec<String> = levels.iter().map(|l| l.to_string()).collect();
                writeln!(out, "{} M {}", e.time, list.join(",")).unwrap();
            }
        }
    }
    out
}

/// Parse text produced by `write_event_log`.
pub fn parse_event_log(text: &str) -> Result<(EventLogHeader, Vec<TimedEvent>)> {
    let err = |reason: String| FvError::Parse {
        input: "<event log>".into(),
        reason,
    };
    let mut lines = text.lines();
    let magic = lines.next().ok_or_else(|| err("empty log".into()))?;
    if magic != "# fvlab event log v1" {
        return Err(err("bad magic line".into()));
    }
    let meta = lines.next().ok_or_else(|| err("missing header".into()))?;
    let meta = meta
        .strip_prefix("# ")
        .ok_or_else(|| err("bad header line".into()))?;
    let mut n = None;
    let mut seed = None;
    let mut lambda_spec = None;
    let mut levy_spec = None;
    for field in meta.split_whitespace() {
        let (k, v) = field
            .split_once('=')
            .ok_or_else(|| err(format!("bad header field `{field}`")))?;
        match k {
            "n" => n = Some(v.parse().map_err(|_| err("bad n".into()))?),
            "seed" => seed = Some(v.parse().map_err(|_| err("bad seed".into()))?),
            "lambda" => lambda_spec = Some(v.to_string()),
            "levy" => levy_spec = Some(v.to_string()),
            _ => return Err(err(format!("unknown header key `{k}`"))),
        }
    }
    let header = EventLogHeader {
        n: n.ok_or_else(|| err("header missing n".into()))?,
        seed: seed.ok_or_else(|| err("header missing seed".into()))?,
        lambda_spec: lambda_spec.ok_or_else(|| err("header missing lambda".into()))?,
        levy_spec: levy_spec.ok_or_else(|| err("header missing levy".into()))?,
    };
    let mut events = Vec::new();
    for line in lines {
        if line.trim().is_empty() {
            continue;
        }
        let mut parts = line.split_whitespace();
        let time: f64 = parts
            .next()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| err(format!("bad time in `{line}`")))?;
        let kind = parts
            .next()
            .ok_or_else(|| err("missing event kind".into()))?;
        let event = match kind {
            "P" => {
                let i: usize = parts
                    .next()
                    .and_then(|s| s.parse().ok())
                    .ok_or_else(|| err("bad pair level".into()))?;
                let j: usize = parts
                    .next()
                    .and_then(|s| s.parse().ok())
                    .ok_or_else(|| err("bad pair level".into()))?;
                LookdownEvent::Pair { i, j }
            }
            "M" => {
                let levels: Vec<usize> = parts
                    .next()
                    .ok_or_else(|| err("missing level list".into()))?
                    .split(',')
                    .map(|s| s.parse())
                    .collect::<std::result::Result<_, _>>()
                    .map_err(|_| err("bad level list".into()))?;
                LookdownEvent::Multi { levels }
            }
            other => return Err(err(format!("unknown event kind `{other}`"))),
        };
        events.push(TimedEvent { time, event });
    }
    Ok((header, events))
}
