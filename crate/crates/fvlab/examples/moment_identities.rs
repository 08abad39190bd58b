//! Check the first- and second-moment identities of the measure-valued
//! process against independent semigroup estimates.

use fvlab::experiments::replica_rng;
use fvlab::fv::{first_moment_check, second_moment_check};
use fvlab::lambda::parse_lambda;
use fvlab::levy::parse_levy;
use fvlab::measure::DiscreteMeasure;

fn main() -> fvlab::Result<()> {
    let configs = [
        ("kingman:1", "brownian:sigma=1"),
        ("beta:1.5", "drift:0.5+brownian:sigma=0.5"),
        ("atoms:1@0.5", "cpois:rate=2,jump=point:1;-1"),
    ];
    let ball = |x: &[f64]| if x[0].abs() < 1.0 { 1.0 } else { 0.0 };
    let one = |_: &[f64]| 1.0;
    let (n, replicas, t) = (500, 400, 0.1);
    let mu0 = DiscreteMeasure::dirac(&[0.0]);
    for (i, (lspec, mspec)) in configs.iter().enumerate() {
        let lambda = parse_lambda(lspec)?;
        let levy = parse_levy(mspec)?;
        let mut rng = replica_rng(2024, i as u64);
        let first = first_moment_check(&lambda, &levy, &mu0, t, &ball, n, replicas, &mut rng)?;
        let second = second_moment_check(
            &lambda, &levy, &mu0, t, &ball, &one, n, replicas, 32, &mut rng,
        )?;
        println!("Lambda = {lspec}, mutation = {mspec}");
        println!(
            "  first moment : lhs {:.5} +- {:.5}, target {:.5} +- {:.5}, z = {:+.2}",
            first.estimate, first.stderr, first.target, first.target_stderr, first.z
        );
        println!(
            "  second moment: lhs {:.5} +- {:.5}, target {:.5} +- {:.5}, z = {:+.2}",
            second.estimate, second.stderr, second.target, second.target_stderr, second.z
        );
    }
    Ok(())
}
