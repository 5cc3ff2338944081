//! Cross-route and property checks for the decode-stream analysis.

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use qlink_qec_rtsim::{
    min_parallel_workers, min_parallel_workers_raw, partition_windows, simulate_stream,
    wait_time_closed_form, wait_time_recurrence, RegionKind, RtParams, SimMode, WindowParams,
};

fn random_params(rng: &mut ChaCha8Rng, ratio_range: (f64, f64)) -> RtParams {
    let round_secs = rng.gen_range(0.5e-6..3.0e-6);
    let ratio = rng.gen_range(ratio_range.0..ratio_range.1);
    RtParams {
        decode_secs_per_round: ratio * round_secs,
        initial_rounds: rng.gen_range(5..50),
        round_secs,
        link_rtt_secs: rng.gen_range(2e-6..40e-6),
        max_gates: 8,
    }
}

#[test]
fn closed_form_equals_recurrence_on_ten_thousand_draws() {
    let mut rng = ChaCha8Rng::seed_from_u64(0xEC1);
    for case in 0..10_000 {
        let params = random_params(&mut rng, (0.1, 3.0));
        let j = rng.gen_range(1..=30u32);
        let closed = wait_time_closed_form(&params, j).unwrap();
        let oracle = wait_time_recurrence(&params, j).unwrap();
        let rel = (closed - oracle).abs() / oracle.abs();
        assert!(
            rel < 1e-9,
            "case {case}: j={j} ratio={} rel={rel}",
            params.decode_secs_per_round / params.round_secs
        );
    }
}

#[test]
fn limit_branch_matches_recurrence_exactly_at_balance() {
    let mut rng = ChaCha8Rng::seed_from_u64(0xEC2);
    for _ in 0..100 {
        let round_secs = rng.gen_range(0.5e-6..3.0e-6);
        let params = RtParams {
            decode_secs_per_round: round_secs,
            initial_rounds: rng.gen_range(5..50),
            round_secs,
            link_rtt_secs: rng.gen_range(2e-6..40e-6),
            max_gates: 8,
        };
        for j in 1..=30u32 {
            let closed = wait_time_closed_form(&params, j).unwrap();
            let oracle = wait_time_recurrence(&params, j).unwrap();
            assert!((closed - oracle).abs() / oracle < 1e-12);
        }
    }
}

#[test]
fn waits_bounded_iff_decoder_keeps_up() {
    let slow_decoder = RtParams {
        decode_secs_per_round: 1.5e-6,
        round_secs: 1.0e-6,
        ..RtParams::default()
    };
    let w40 = wait_time_recurrence(&slow_decoder, 40).unwrap();
    let w50 = wait_time_recurrence(&slow_decoder, 50).unwrap();
    assert!(w50 > w40 * 10.0, "above balance the waits must blow up");

    let fast_decoder = RtParams {
        decode_secs_per_round: 0.5e-6,
        round_secs: 1.0e-6,
        ..RtParams::default()
    };
    let fixed_point =
        fast_decoder.link_rtt_secs / (1.0 - 0.5);
    let w200 = wait_time_recurrence(&fast_decoder, 200).unwrap();
    assert!((w200 - fixed_point).abs() / fixed_point < 1e-9);

    let balanced = RtParams {
        decode_secs_per_round: 1.0e-6,
        round_secs: 1.0e-6,
        ..RtParams::default()
    };
    let diff_a = wait_time_recurrence(&balanced, 11).unwrap()
        - wait_time_recurrence(&balanced, 10).unwrap();
    let diff_b = wait_time_recurrence(&balanced, 31).unwrap()
        - wait_time_recurrence(&balanced, 30).unwrap();
    assert!((diff_a - balanced.link_rtt_secs).abs() < 1e-15);
    assert!((diff_a - diff_b).abs() < 1e-15, "balanced growth is linear");
}

#[test]
fn sliding_simulation_matches_recurrence_on_random_grid() {
    // The one-round tolerance holds when the decoder runs at no more than
    // half the round rate, which keeps the floor-discretization error of
    // the event grid under a single round period.
    let mut rng = ChaCha8Rng::seed_from_u64(0xEC3);
    for case in 0..25 {
        let params = random_params(&mut rng, (0.1, 0.5));
        let outcome = simulate_stream(&params, &SimMode::Sliding, 10_000_000).unwrap();
        for wait in &outcome.waits {
            let oracle = wait_time_recurrence(&params, wait.gate).unwrap();
            assert!(
                (wait.wait_secs - oracle).abs() <= params.round_secs,
                "case {case} gate {}: sim {} oracle {} T_s {}",
                wait.gate,
                wait.wait_secs,
                oracle,
                params.round_secs
            );
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn partition_covers_every_round_exactly_once(
        total in 1u64..2000,
        n_com in 1u64..50,
        n_buf in 0u64..20,
        n_w in 0u64..50,
    ) {
        prop_assume!(total >= n_com);
        let window = WindowParams {
            commit_rounds: n_com,
            buffer_rounds: n_buf,
            cleanup_rounds: n_w,
            workers: 1,
            region_decode_secs: 1e-6,
            spatial_regions: 1,
        };
        let regions = partition_windows(total, &window).unwrap();
        let mut covered = vec![0u32; total as usize];
        for region in &regions {
            for round in region.rounds.clone() {
                covered[round as usize] += 1;
            }
            prop_assert!(region.decode_input.start <= region.rounds.start);
            prop_assert!(region.decode_input.end <= total);
            if region.kind == RegionKind::Commit {
                prop_assert!(!region.rounds.is_empty());
            }
        }
        prop_assert!(covered.iter().all(|&c| c == 1));
        // Commit spans start on the generation grid.
        for (i, region) in regions.iter().filter(|r| r.kind == RegionKind::Commit).enumerate() {
            prop_assert_eq!(region.rounds.start, i as u64 * (n_com + n_w));
        }
    }

    #[test]
    fn wait_times_scale_linearly_with_time_units(seed in any::<u64>(), k in 0.1f64..10.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let params = random_params(&mut rng, (0.1, 3.0));
        let scaled = RtParams {
            decode_secs_per_round: params.decode_secs_per_round * k,
            round_secs: params.round_secs * k,
            link_rtt_secs: params.link_rtt_secs * k,
            ..params.clone()
        };
        for j in 1..=10u32 {
            let base = wait_time_closed_form(&params, j).unwrap();
            let big = wait_time_closed_form(&scaled, j).unwrap();
            prop_assert!((big / base - k).abs() / k < 1e-9);
        }
    }
}

#[test]
fn worker_bound_is_scale_invariant_and_simulator_confirms_it() {
    // A coarse grid here; the acceptance suite runs the full 5x5 version.
    let params = RtParams {
        max_gates: 1,
        ..RtParams::default()
    };
    for &(t_dec, n) in &[(1e-3, 10u64), (4e-3, 20), (8e-3, 15)] {
        let base = WindowParams {
            commit_rounds: n,
            buffer_rounds: 3,
            cleanup_rounds: n,
            workers: 1,
            region_decode_secs: t_dec,
            spatial_regions: 1,
        };
        let bound = min_parallel_workers(&base, &params).unwrap();
        let raw = min_parallel_workers_raw(&base, &params).unwrap();

        let satisfied = WindowParams {
            workers: bound,
            ..base.clone()
        };
        let outcome = simulate_stream(&params, &SimMode::Parallel(satisfied), 50_000).unwrap();
        assert!(outcome.backlog.bounded, "t_dec={t_dec} n={n} bound={bound}");

        if raw >= 2.0 {
            let starved = WindowParams {
                workers: bound - 1,
                ..base
            };
            let outcome =
                simulate_stream(&params, &SimMode::Parallel(starved), 50_000).unwrap();
            assert!(!outcome.backlog.bounded, "t_dec={t_dec} n={n} bound={bound}");
            assert!(outcome.backlog.peak_at_half < outcome.backlog.peak);
        }
    }
}

#[test]
fn spatial_regions_multiply_the_workload() {
    let params = RtParams {
        max_gates: 1,
        ..RtParams::default()
    };
    let base = WindowParams {
        commit_rounds: 10,
        buffer_rounds: 3,
        cleanup_rounds: 10,
        workers: 1,
        region_decode_secs: 1e-3,
        spatial_regions: 1,
    };
    let single = min_parallel_workers_raw(&base, &params).unwrap();
    let quadrupled = min_parallel_workers_raw(
        &WindowParams {
            spatial_regions: 4,
            ..base
        },
        &params,
    )
    .unwrap();
    assert!((quadrupled / single - 4.0).abs() < 1e-12);
}
