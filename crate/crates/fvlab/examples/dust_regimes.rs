//! Probe dust regimes: with no Kingman part and integrable x^{-1} tail, a
//! positive fraction of levels never merges, and those singleton levels move
//! like independent copies of the mutation process.

use fvlab::experiments::replica_rng;
use fvlab::fv::dust_regime_probe;
use fvlab::lambda::parse_lambda;
use fvlab::levy::parse_levy;
use fvlab::measure::DiscreteMeasure;

fn main() -> fvlab::Result<()> {
    let mu0 = DiscreteMeasure::dirac(&[0.0]);
    let cases = [
        ("beta:0.5", "brownian:sigma=1"),
        ("atoms:1@0.5", "brownian:sigma=1"),
        ("atoms:1@1", "drift:1"),
    ];
    for (i, (lspec, mspec)) in cases.iter().enumerate() {
        let lambda = parse_lambda(lspec)?;
        let levy = parse_levy(mspec)?;
        println!(
            "Lambda = {lspec} (dust? {:?}), mutation = {mspec}",
            lambda.has_dust()
        );
        let mut rng = replica_rng(123, i as u64);
        let report = dust_regime_probe(&lambda, &levy, &mu0, 0.3, 200, 100, &mut rng)?;
        println!(
            "  singleton fraction at full lookback: {:.4} +- {:.4}",
            report.singleton_fraction, report.singleton_fraction_stderr
        );
        if let Some(p) = report.displacement_test_p {
            println!("  displacement-vs-fresh-increment test p-value: {p:.4}");
        }
        if let Some(f) = report.collapse_fraction {
            println!("  collapse fraction after whole-population events: {f:.4}");
        }
        println!();
    }
    Ok(())
}
