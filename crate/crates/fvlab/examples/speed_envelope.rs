//! Classify coming-down-from-infinity, then compare simulated block counts
//! with the speed envelope v(t) and the universal lower bound c_Lambda / t.

use fvlab::coalescent::simulate_with_sampler;
use fvlab::experiments::{parse_tgrid, replica_rng};
use fvlab::lambda::{parse_lambda, SubsetRateSampler};
use fvlab::stats;

fn main() -> fvlab::Result<()> {
    for spec in ["kingman:1", "beta:1.5", "beta:0.5"] {
        let lambda = parse_lambda(spec)?;
        println!(
            "Lambda = {spec}: comes down from infinity? {:?}",
            lambda.comes_down_from_infinity()?
        );
    }
    println!();

    let lambda = parse_lambda("beta:1.5")?;
    let n = 2000;
    let replicas = 100;
    let grid = parse_tgrid("geo:0.01,0.3,6")?;
    let sampler = SubsetRateSampler::new(&lambda, n);
    let horizon = *grid.last().unwrap();
    let paths: Vec<_> = (0..replicas)
        .map(|r| simulate_with_sampler(&sampler, n, horizon, &mut replica_rng(3, r)))
        .collect::<fvlab::Result<Vec<_>>>()?;
    let c_lambda = lambda.c_lambda();
    println!("Beta(0.5, 1.5) coalescent, n = {n}, {replicas} replicas");
    println!(
        "{:>10} {:>12} {:>12} {:>12}",
        "t", "median N_t", "v(t)", "c/t"
    );
    for &t in &grid {
        let counts: Vec<f64> = paths.iter().map(|p| p.block_count_at(t) as f64).collect();
        println!(
            "{t:>10.4} {:>12} {:>12.2} {:>12.2}",
            stats::median(&counts),
            lambda.v_of_t(t)?,
            c_lambda / t
        );
    }
    Ok(())
}
