//! Simulate coalescent paths driven by subset rates and summarize block
//! counts and absorption times.

use fvlab::coalescent::{simulate_with_sampler, CoalescentPath};
use fvlab::experiments::replica_rng;
use fvlab::lambda::{parse_lambda, SubsetRateSampler};
use fvlab::stats;

fn main() -> fvlab::Result<()> {
    let n = 200;
    let replicas = 200;
    for spec in ["kingman:1", "beta:1.5", "beta:0.5"] {
        let lambda = parse_lambda(spec)?;
        let sampler = SubsetRateSampler::new(&lambda, n);
        let paths: Vec<CoalescentPath> = (0..replicas)
            .map(|r| simulate_with_sampler(&sampler, n, f64::INFINITY, &mut replica_rng(7, r)))
            .collect::<fvlab::Result<_>>()?;
        let absorb: Vec<f64> = paths.iter().map(|p| p.absorption_time().unwrap()).collect();
        println!("Lambda = {spec}, n = {n}, {replicas} replicas");
        println!("  median absorption time: {:.4}", stats::median(&absorb));
        for t in [0.05, 0.2, 1.0] {
            let counts: Vec<f64> = paths.iter().map(|p| p.block_count_at(t) as f64).collect();
            println!("  median block count at t={t}: {}", stats::median(&counts));
        }
        println!();
    }
    Ok(())
}
