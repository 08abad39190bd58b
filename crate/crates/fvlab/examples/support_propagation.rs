//! Probe instantaneous support propagation: with point-mass jumps, every
//! k-fold jump location carries mass at any positive time.

use fvlab::experiments::replica_rng;
use fvlab::fv::support_propagation_probe;
use fvlab::lambda::parse_lambda;
use fvlab::levy::parse_levy;
use fvlab::measure::DiscreteMeasure;

fn main() -> fvlab::Result<()> {
    let lambda = parse_lambda("kingman:1")?;
    let levy = parse_levy("cpois:rate=2,jump=point:1")?;
    let mu0 = DiscreteMeasure::dirac(&[0.0]);
    let (n, replicas, t, eps) = (2000, 100, 0.05, 0.25);
    for k in [1usize, 2] {
        let mut rng = replica_rng(99, k as u64);
        let report =
            support_propagation_probe(&lambda, &levy, &mu0, t, k, eps, 0.0, n, replicas, &mut rng)?;
        println!(
            "k = {k}: fraction of {k}-fold jump sites within eps = {eps} of an atom: {:.4} +- {:.4}",
            report.hit_fraction, report.hit_fraction_stderr
        );
        for atom in &report.atom_stats {
            println!(
                "  site {:?}: hit in {}/{} appearances",
                atom.position, atom.hits, atom.appearances
            );
        }
    }
    Ok(())
}
