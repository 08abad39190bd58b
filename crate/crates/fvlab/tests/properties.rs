//! Property tests for structural invariants: rate recursions, partition
//! coarsening, lookdown event algebra, convolution mass, and log round trips.

use fvlab::lambda::parse_lambda;
use fvlab::levy::convolve_support;
use fvlab::lookdown::{
    apply_event_to_levels, parse_event_log, write_event_log, EventLogHeader, LookdownEvent,
    TimedEvent,
};
use fvlab::measure::DiscreteMeasure;
use fvlab::partition::Partition;
use proptest::prelude::*;

fn lambda_spec_strategy() -> impl Strategy<Value = String> {
    // Random mixtures of the four component kinds.
    let kingman = (0.1f64..2.0).prop_map(|m| format!("kingman:{m}"));
    let top = (0.1f64..2.0).prop_map(|m| format!("atoms:{m}@1"));
    let atom = (0.1f64..2.0, 0.05f64..0.95).prop_map(|(m, x)| format!("atoms:{m}@{x}"));
    let beta = (0.2f64..1.8, 0.1f64..2.0).prop_map(|(a, m)| format!("beta:{a}:{m}"));
    prop::collection::vec(prop_oneof![kingman, top, atom, beta], 1..4)
        .prop_map(|parts| parts.join("+"))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// Pascal-type recursion lambda_{b,k} = lambda_{b+1,k} + lambda_{b+1,k+1}
    /// holds for every finite measure on [0,1].
    #[test]
    fn rate_recursion(spec in lambda_spec_strategy(), b in 2usize..9, k in 2usize..9) {
        prop_assume!(k <= b);
        let lambda = parse_lambda(&spec).unwrap();
        let lhs = lambda.merger_rate(b, k).unwrap();
        let rhs = lambda.merger_rate(b + 1, k).unwrap() + lambda.merger_rate(b + 1, k + 1).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-8 * (1.0 + lhs.abs()), "{spec}: {lhs} vs {rhs}");
    }

    /// Merger rates are nonnegative and decreasing in b for fixed k.
    #[test]
    fn rate_monotone_in_b(spec in lambda_spec_strategy(), k in 2usize..6) {
        let lambda = parse_lambda(&spec).unwrap();
        let mut prev = f64::INFINITY;
        for b in k..k + 6 {
            let r = lambda.merger_rate(b, k).unwrap();
            prop_assert!(r >= 0.0);
            prop_assert!(r <= prev + 1e-10, "rate increased at b={b}");
            prev = r;
        }
    }

    /// Merging any blocks of a partition coarsens it.
    #[test]
    fn merging_coarsens(assign in prop::collection::vec(0usize..5, 2..30), picks in prop::collection::vec(0usize..100, 2..5)) {
        let p = Partition::from_assignment(&assign);
        let mut q = p.clone();
        let idx: Vec<usize> = {
            let mut v: Vec<usize> = picks.iter().map(|&i| i % p.block_count()).collect();
            v.sort_unstable();
            v.dedup();
            v
        };
        if idx.len() >= 2 {
            q.merge_blocks(&idx);
        }
        prop_assert!(p.refines(&q));
        prop_assert_eq!(
            p.blocks().iter().map(Vec::len).sum::<usize>(),
            q.blocks().iter().map(Vec::len).sum::<usize>()
        );
    }

    /// A lookdown event keeps the level array a "copy down" of the old one:
    /// participants carry the parent's value, and the surviving values are
    /// the old ones below the shifted-out tail, in order.
    #[test]
    fn lookdown_event_algebra(n in 3usize..12, picks in prop::collection::vec(0usize..100, 2..6)) {
        let mut levels: Vec<usize> = (0..n).collect();
        let mut j: Vec<usize> = picks.iter().map(|&p| p % n).collect();
        j.sort_unstable();
        j.dedup();
        prop_assume!(j.len() >= 2);
        let event = if j.len() == 2 {
            LookdownEvent::Pair { i: j[0], j: j[1] }
        } else {
            LookdownEvent::Multi { levels: j.clone() }
        };
        apply_event_to_levels(&mut levels, &event);
        // Participants all hold the parent's old value.
        for &l in &j {
            prop_assert_eq!(levels[l], j[0]);
        }
        // Non-participants hold the old values in increasing order.
        let survivors: Vec<usize> = (0..n).filter(|l| !j.contains(l)).map(|l| levels[l]).collect();
        let mut in_order: Vec<usize> = survivors.clone();
        in_order.sort_unstable();
        prop_assert_eq!(&in_order, &survivors, "survivor values out of order");
        // Values are exactly {0..n} minus the top |J|-1 values, minus
        // duplicates of the parent, each appearing once among survivors.
        let cut = n - (j.len() - 1);
        for &v in &survivors {
            prop_assert!(v < cut);
            prop_assert!(v != j[0] || j[0] >= cut);
        }
        let mut all: Vec<usize> = survivors.clone();
        all.push(j[0]);
        all.sort_unstable();
        all.dedup();
        prop_assert_eq!(all, (0..cut).collect::<Vec<_>>());
    }

    /// k-fold support convolution multiplies total masses.
    #[test]
    fn convolution_mass(weights in prop::collection::vec(0.01f64..1.0, 1..6),
                        jumps in prop::collection::vec((0.01f64..1.0, -2.0f64..2.0), 1..4),
                        k in 0usize..3) {
        let positions: Vec<f64> = (0..weights.len()).map(|i| i as f64).collect();
        let mu = DiscreteMeasure::new(1, positions, weights.clone());
        let nu: Vec<(f64, Vec<f64>)> = jumps.iter().map(|&(m, y)| (m, vec![y])).collect();
        let conv = convolve_support(&nu, &mu, k);
        let nu_mass: f64 = jumps.iter().map(|j| j.0).sum();
        let want = mu.total_mass() * nu_mass.powi(k as i32);
        prop_assert!((conv.total_mass() - want).abs() < 1e-9 * want.max(1.0));
    }

    /// Event logs round-trip bit-exactly through text.
    #[test]
    fn event_log_roundtrip(times in prop::collection::vec(0.0f64..10.0, 0..20), n in 4usize..10) {
        let mut t = 0.0;
        let events: Vec<TimedEvent> = times
            .iter()
            .enumerate()
            .map(|(i, &dt)| {
                t += dt;
                let event = if i % 2 == 0 {
                    LookdownEvent::Pair { i: i % (n - 1), j: n - 1 }
                } else {
                    LookdownEvent::Multi { levels: vec![0, 1 + i % (n - 1)].into_iter().collect() }
                };
                TimedEvent { time: t, event }
            })
            .filter(|e| match &e.event {
                LookdownEvent::Pair { i, j } => i < j,
                LookdownEvent::Multi { levels } => levels.len() >= 2 && levels[0] < levels[1],
            })
            .collect();
        let header = EventLogHeader { n, seed: 7, lambda_spec: "kingman:1".into(), levy_spec: "0".into() };
        let text = write_event_log(&header, &events);
        let (h2, e2) = parse_event_log(&text).unwrap();
        prop_assert_eq!(h2.n, n);
        prop_assert_eq!(&e2, &events);
        prop_assert_eq!(write_event_log(&h2, &e2), text);
    }
}
