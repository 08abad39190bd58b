//! Check the two cluster lower bounds: mass carried into a ball by a
//! surviving ancestral block, and the hit probability of neighborhoods of
//! initial-support points.

use fvlab::experiments::replica_rng;
use fvlab::fv::{cluster_hit_bound_check, cluster_mass_bound_check};
use fvlab::lambda::parse_lambda;
use fvlab::levy::parse_levy;
use fvlab::measure::DiscreteMeasure;

fn main() -> fvlab::Result<()> {
    let lambda = parse_lambda("kingman:1")?;
    let levy = parse_levy("brownian:sigma=1")?;
    let mu0 = DiscreteMeasure::dirac(&[0.0]);
    let (n, replicas, t) = (300, 500, 0.2);
    let mut rng = replica_rng(5, 0);

    let mass = cluster_mass_bound_check(
        &lambda,
        &levy,
        &mu0,
        t,
        t / 2.0,
        &[0.0],
        1.0,
        n,
        replicas,
        &mut rng,
    )?;
    println!("{} -> pass: {}", mass.observable, mass.pass);
    for s in &mass.strata {
        println!(
            "  {}: {}/{} hit {:.3} vs bound {:.3}{}",
            s.label,
            (s.hit_fraction * s.samples as f64).round() as usize,
            s.samples,
            s.hit_fraction,
            s.bound,
            if s.degenerate { " (degenerate)" } else { "" }
        );
    }

    let hit = cluster_hit_bound_check(
        &lambda,
        &levy,
        &mu0,
        t,
        &[vec![0.0]],
        0.25,
        0.05,
        n,
        replicas,
        &mut rng,
    )?;
    println!("{} -> pass: {}", hit.observable, hit.pass);
    for s in &hit.strata {
        println!(
            "  {}: hit {:.3} vs bound {:.3}{}",
            s.label,
            s.hit_fraction,
            s.bound,
            if s.degenerate { " (degenerate)" } else { "" }
        );
    }
    Ok(())
}
