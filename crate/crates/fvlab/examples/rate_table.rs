//! Merger-rate tables for a few resampling measures, plus a check of the
//! total-event-rate identity against the direct sum over subset sizes.

use fvlab::lambda::parse_lambda;

fn binom(n: usize, k: usize) -> f64 {
    let mut v = 1.0;
    for i in 0..k {
        v *= (n - i) as f64 / (k - i) as f64;
    }
    v
}

fn main() -> fvlab::Result<()> {
    for spec in [
        "kingman:1",
        "beta:1.5",
        "uniform:1",
        "atoms:0.5@0.3+kingman:0.5",
    ] {
        let lambda = parse_lambda(spec)?;
        println!("Lambda = {spec}");
        println!("{:>4} {:>4} {:>14}", "b", "k", "rate");
        for b in 2..=6 {
            for k in 2..=b {
                println!("{b:>4} {k:>4} {:>14.8}", lambda.merger_rate(b, k)?);
            }
        }
        let b = 12;
        let direct: f64 = (2..=b)
            .map(|k| binom(b, k) * lambda.merger_rate(b, k).unwrap())
            .sum();
        let total = lambda.total_event_rate(b)?;
        println!("total event rate at b={b}: {total:.10} (direct sum {direct:.10})\n");
    }
    Ok(())
}
