//! Run the ordered particle construction, dump its event log, and read off
//! ancestral partitions at several lookback depths.

use fvlab::experiments::replica_rng;
use fvlab::lambda::parse_lambda;
use fvlab::levy::parse_levy;
use fvlab::lookdown::{simulate_lookdown, write_event_log, EventLogHeader};
use rand::Rng;

fn main() -> fvlab::Result<()> {
    let lambda = parse_lambda("kingman:0.5+beta:1.5:0.5")?;
    let levy = parse_levy("brownian:sigma=1")?;
    let (n, t, seed) = (8, 1.0, 42);
    let mut rng = replica_rng(seed, 0);
    let traj = simulate_lookdown(
        n,
        &lambda,
        &levy,
        |rng: &mut _| vec![rng.gen_range(-1.0..1.0)],
        &[t],
        None,
        &mut rng,
    )?;

    let header = EventLogHeader {
        n,
        seed,
        lambda_spec: "kingman:0.5+beta:1.5:0.5".into(),
        levy_spec: "brownian:sigma=1".into(),
    };
    println!("--- event log ---");
    print!("{}", write_event_log(&header, &traj.events));

    println!("--- ancestral partitions at time t = {t} ---");
    for s in [0.25 * t, 0.5 * t, t] {
        let ap = traj.ancestral_partition(t, s)?;
        println!("lookback s = {s}: {}", ap.partition.canonical_string());
    }

    let positions = traj.positions_at(t)?;
    println!("--- particle positions at t = {t} ---");
    for (level, x) in positions.chunks(1).enumerate() {
        println!("level {level}: {:+.4}", x[0]);
    }
    Ok(())
}
