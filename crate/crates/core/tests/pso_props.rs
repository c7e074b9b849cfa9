//! Swarm invariants and convergence on a sphere.

use proptest::prelude::*;
use shapes::pso::{run_pso, run_pso_observed, SwarmConfig};

fn sphere(x: &[f64]) -> f64 {
    x.iter().map(|v| (v - 0.3) * (v - 0.3)).sum()
}

fn rastrigin(x: &[f64]) -> f64 {
    x.iter()
        .map(|v| {
            let s = 10.0 * v - 4.0;
            s * s - 10.0 * (2.0 * std::f64::consts::PI * s).cos() + 10.0
        })
        .sum()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn global_best_never_worsens(seed in 0u64..10_000, dim in 1usize..6) {
        let config = SwarmConfig::unit_box(dim, 40, seed);
        let out = run_pso(&rastrigin, &config).unwrap();
        for w in out.history.windows(2) {
            prop_assert!(w[1] <= w[0]);
        }
        prop_assert_eq!(out.history.last().copied().unwrap(), out.best_fitness);
    }

    #[test]
    fn velocities_clamped_and_bests_in_box(seed in 0u64..10_000, dim in 1usize..6) {
        let config = SwarmConfig::unit_box(dim, 30, seed);
        let v_max = config.v_max();
        let mut ok = true;
        run_pso_observed(&rastrigin, &config, |state| {
            for p in &state.particles {
                if state.iteration < config.num_iterations {
                    ok &= p.velocity.iter().zip(&v_max).all(|(v, m)| v.abs() <= *m);
                }
                ok &= p.best_position.iter().all(|v| (0.0..=1.0).contains(v));
                ok &= p.local_best.iter().all(|v| (0.0..=1.0).contains(v));
                ok &= p.local_best_fitness <= p.best_fitness;
            }
            ok &= state.global_best.iter().all(|v| (0.0..=1.0).contains(v));
        })
        .unwrap();
        prop_assert!(ok);
    }

    #[test]
    fn same_seed_same_run(seed in 0u64..10_000) {
        let config = SwarmConfig::unit_box(3, 20, seed);
        let a = run_pso(&rastrigin, &config).unwrap();
        let b = run_pso(&rastrigin, &config).unwrap();
        prop_assert_eq!(a, b);
    }
}

#[test]
fn initial_swarm_inside_box() {
    let config = SwarmConfig::new(vec![(-2.0, 3.0), (10.0, 10.5)], 1, 4);
    run_pso_observed(&sphere, &config, |state| {
        for p in &state.particles {
            assert!(p.position[0] >= -2.0 && p.position[0] <= 3.0);
            assert!(p.position[1] >= 10.0 && p.position[1] <= 10.5);
            assert!(p.fitness.is_finite());
        }
    })
    .unwrap();
}

#[test]
fn sphere_converges_for_ten_seeds() {
    for seed in 0..10 {
        let config = SwarmConfig::unit_box(5, 200, seed);
        let out = run_pso(&sphere, &config).unwrap();
        let best = out.best_fitness.value().unwrap();
        assert!(best < 1e-4, "seed {seed}: {best}");
    }
}

#[test]
fn objective_outside_box_never_called() {
    let config = SwarmConfig::unit_box(4, 60, 9);
    let f = |x: &[f64]| {
        assert!(x.iter().all(|v| (0.0..=1.0).contains(v)), "evaluated outside box: {x:?}");
        rastrigin(x)
    };
    run_pso(&f, &config).unwrap();
}
