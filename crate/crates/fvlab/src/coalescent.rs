//! Forward-in-time simulation of the exchangeable coalescent driven by a
//! `LambdaMeasure`, by the subset-rate scheme: from `b` blocks, wait an
//! exponential time with the total event rate, draw the merger size `k`
//! proportional to `C(b,k) lambda_{b,k}`, and merge a uniform `k`-subset.

use rand::Rng;

use crate::error::Result;
use crate::lambda::{LambdaMeasure, SubsetRateSampler};
use crate::partition::Partition;

/// One merger event: at `time`, the blocks at the given least-element-order
/// indices coalesced.
#[derive(Debug, Clone, PartialEq)]
pub struct CoalescentEvent {
    pub time: f64,
    /// Indices of the merged blocks, sorted, in the pre-event ordering.
    pub merged: Vec<usize>,
}

/// A realized coalescent trajectory started from `n` singleton blocks.
#[derive(Debug, Clone)]
pub struct CoalescentPath {
    pub n: usize,
    pub events: Vec<CoalescentEvent>,
}

impl CoalescentPath {
    /// Number of blocks just after time `t`.
    pub fn block_count_at(&self, t: f64) -> usize {
        let merged: usize = self
            .events
            .iter()
            .take_while(|e| e.time <= t)
            .map(|e| e.merged.len() - 1)
            .sum();
        self.n - merged
    }

    /// The partition of `{0, ..., n-1}` just after time `t`.
    pub fn partition_at(&self, t: f64) -> Partition {
        let mut p = Partition::singletons(self.n);
        for e in &self.events {
            if e.time > t {
                break;
            }
            p.merge_blocks(&e.merged);
        }
        p
    }

    /// First time the blocks containing `a` and `b` merge, if they do.
    pub fn pair_merge_time(&self, a: u32, b: u32) -> Option<f64> {
        let mut p = Partition::singletons(self.n);
        for e in &self.events {
            p.merge_blocks(&e.merged);
            if p.same_block(a, b) {
                return Some(e.time);
            }
        }
        None
    }

    /// Time of full coalescence, if reached.
    pub fn absorption_time(&self) -> Option<f64> {
        if self.block_count_at(f64::INFINITY) == 1 {
            self.events.last().map(|e| e.time)
        } else {
            None
        }
    }
}

/// Simulate the coalescent from `n` singletons up to `horizon`, or to
/// absorption if that happens first.
pub fn simulate_coalescent<R: Rng + ?Sized>(
    lambda: &LambdaMeasure,
    n: usize,
    horizon: f64,
    rng: &mut R,
) -> Result<CoalescentPath> {
    let sampler = SubsetRateSampler::new(lambda, n);
    simulate_with_sampler(&sampler, n, horizon, rng)
}

/// Same as `simulate_coalescent` but reusing a precomputed sampler across
/// replicas.
pub fn simulate_with_sampler<R: Rng + ?Sized>(
    sampler: &SubsetRateSampler,
    n: usize,
    horizon: f64,
    rng: &mut R,
) -> Result<CoalescentPath> {
    assert!(n <= sampler.b_max(), "sampler built for smaller n");
    let mut events = Vec::new();
    let mut b = n;
    let mut t = 0.0;
    while b >= 2 {
        let rate = sampler.total_rate(b);
        if rate <= 0.0 {
            break;
        }
        t += -rng.gen::<f64>().ln() / rate;
        if t > horizon {
            break;
        }
        let k = sampler.sample_k(b, rng);
        let mut merged = rand::seq::index::sample(rng, b, k).into_vec();
        merged.sort_unstable();
        events.push(CoalescentEvent { time: t, merged });
        b -= k - 1;
    }
    Ok(CoalescentPath { n, events })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lambda::parse_lambda;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn block_counts_decrease_to_absorption() {
        let l = parse_lambda("kingman:1").unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let path = simulate_coalescent(&l, 20, f64::INFINITY, &mut rng).unwrap();
        assert_eq!(path.events.len(), 19);
        assert_eq!(path.block_count_at(f64::INFINITY), 1);
        let mut prev = 0.0;
        for e in &path.events {
            assert!(e.time > prev);
            assert_eq!(e.merged.len(), 2);
            prev = e.time;
        }
        assert_eq!(path.partition_at(f64::INFINITY).block_count(), 1);
    }

    #[test]
    fn partitions_coarsen_along_the_path() {
        let l = parse_lambda("beta:1.5").unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let path = simulate_coalescent(&l, 15, f64::INFINITY, &mut rng).unwrap();
        let times: Vec<f64> = path.events.iter().map(|e| e.time).collect();
        for w in times.windows(2) {
            let fine = path.partition_at(w[0]);
            let coarse = path.partition_at(w[1]);
            assert!(fine.refines(&coarse));
        }
    }

    #[test]
    fn top_atom_forces_total_merge() {
        let l = parse_lambda("atoms:1@1").unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let path = simulate_coalescent(&l, 8, f64::INFINITY, &mut rng).unwrap();
        assert_eq!(path.events.len(), 1);
        assert_eq!(path.events[0].merged.len(), 8);
    }

    #[test]
    fn pair_merge_time_is_exponential_sigma() {
        // For any Lambda the pair {0,1} coalesces at rate sigma = Lambda([0,1]).
        let l = parse_lambda("kingman:0.5+atoms:0.5@0.5").unwrap();
        let sigma = l.total_mass();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let reps = 20_000;
        let mut sum = 0.0;
        for _ in 0..reps {
            let path = simulate_coalescent(&l, 6, f64::INFINITY, &mut rng).unwrap();
            sum += path.pair_merge_time(0, 1).unwrap();
        }
        let mean = sum / reps as f64;
        let want = 1.0 / sigma;
        let se = want / (reps as f64).sqrt();
        assert!((mean - want).abs() < 4.0 * se, "mean {mean}, want {want}");
    }

    #[test]
    fn horizon_truncates() {
        let l = parse_lambda("kingman:1").unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let path = simulate_coalescent(&l, 30, 0.01, &mut rng).unwrap();
        for e in &path.events {
            assert!(e.time <= 0.01);
        }
        assert!(path.block_count_at(0.01) >= 2);
    }
}
