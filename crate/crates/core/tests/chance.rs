mod common;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use statrs::distribution::{ContinuousCDF, Normal};
use urgp::reformulate::{to_stochastic, RandomProgram, Term};
use urgp::validate::{check_chance, estimate_row, McConfig};
use urgp::{solve_urgp, Alpha, Criterion, NormalRv, SolveConfig, StochasticGp};

const EPS: f64 = 0.05;

fn q95() -> f64 {
    Normal::new(0.0, 1.0).unwrap().inverse_cdf(0.95)
}

// mean + q·sd of one row at x, computed directly from the term data.
fn lhs(row: &[Term<NormalRv>], x: &[f64]) -> f64 {
    let mut mean = 0.0;
    let mut var = 0.0;
    for t in row {
        let u: f64 = t.exponents.iter().zip(x).map(|(a, xi)| xi.powf(*a)).product();
        mean += t.coeff.mu() * u;
        var += (t.coeff.sigma() * u).powi(2);
    }
    mean + q95() * var.sqrt()
}

/// A one-constraint instance with up to three terms per row, its constraint
/// rescaled so the deterministic left-hand side at `x` equals `target`.
fn instance(rng: &mut ChaCha8Rng, target: f64) -> (StochasticGp, Vec<f64>) {
    let n = rng.gen_range(1..=3);
    let row = |rng: &mut ChaCha8Rng| -> Vec<Term<NormalRv>> {
        (0..rng.gen_range(1..=3))
            .map(|_| {
                let mu = rng.gen_range(0.5..2.0);
                let sigma = mu * rng.gen_range(0.02..0.3);
                let exponents = (0..n).map(|_| rng.gen_range(-2.0..2.0)).collect();
                Term { coeff: NormalRv::new(mu, sigma).unwrap(), exponents }
            })
            .collect()
    };
    let objective = row(rng);
    let mut constraint = row(rng);
    let x: Vec<f64> = (0..n).map(|_| rng.gen_range(0.5..2.0)).collect();
    let scale = target / lhs(&constraint, &x);
    for t in &mut constraint {
        t.coeff = NormalRv::new(t.coeff.mu() * scale, t.coeff.sigma() * scale).unwrap();
    }
    let names = (1..=n).map(|i| format!("x{i}")).collect();
    (RandomProgram::new(objective, vec![constraint], names).unwrap(), x)
}

#[test]
fn interior_points_pass_and_exterior_points_fail() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let cfg = McConfig::new(200_000, 5).unwrap();
    for i in 0..20 {
        let (inside, x) = instance(&mut rng, 0.95);
        assert!((lhs(&inside.constraints[0], &x) - 0.95).abs() < 1e-12);
        let r = &check_chance(&inside, &x, EPS, &cfg).unwrap()[1];
        assert!(r.estimate + 3.0 * r.stderr >= 1.0 - EPS, "instance {i}: {r:?}");

        let (outside, x) = instance(&mut rng, 1.05);
        let r = &check_chance(&outside, &x, EPS, &cfg).unwrap()[1];
        assert!(r.estimate + 3.0 * r.stderr < 1.0 - EPS, "instance {i}: {r:?}");
    }
}

#[test]
fn boundary_row_hits_the_level() {
    // μ + Φ⁻¹(0.95)·σ = 1 for a single constant term.
    let sigma = 0.1;
    let rv = NormalRv::new(1.0 - q95() * sigma, sigma).unwrap();
    let cfg = McConfig::new(400_000, 8).unwrap();
    let r = estimate_row(&[(rv, 1.0)], 1.0, &cfg, 0);
    assert!((r.estimate - 0.95).abs() <= 3.0 * r.stderr, "{r:?}");
}

#[test]
fn table_solution_meets_every_row() {
    let p = common::problem14();
    let c = Criterion::Optimistic(Alpha::new(0.3).unwrap());
    let s = solve_urgp(&p, c, EPS, &SolveConfig::default()).unwrap();
    let cfg = McConfig::new(200_000, 21).unwrap();
    let reports = check_chance(&to_stochastic(&p, c), s.original_x(), EPS, &cfg).unwrap();
    assert_eq!(reports.len(), 2);
    for r in &reports {
        // Both rows sit on the boundary at the optimum.
        assert!((r.estimate - 0.95).abs() <= 4.0 * r.stderr, "{r:?}");
    }
}

#[test]
fn stderr_shrinks_with_root_n() {
    let rv = NormalRv::new(0.8, 0.15).unwrap();
    let small = estimate_row(&[(rv, 1.0)], 1.0, &McConfig::new(50_000, 3).unwrap(), 0);
    let large = estimate_row(&[(rv, 1.0)], 1.0, &McConfig::new(200_000, 3).unwrap(), 0);
    let ratio = small.stderr / large.stderr;
    assert!((ratio - 2.0).abs() <= 0.1, "{ratio}");
}

#[test]
fn reports_depend_only_on_seed() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let (s, x) = instance(&mut rng, 1.0);
    let cfg = McConfig::new(50_000, 99).unwrap();
    let a = check_chance(&s, &x, EPS, &cfg).unwrap();
    assert_eq!(a, check_chance(&s, &x, EPS, &cfg).unwrap());
    let other = McConfig::new(50_000, 100).unwrap();
    assert_ne!(a, check_chance(&s, &x, EPS, &other).unwrap());
}

#[test]
fn rejects_bad_inputs() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let (s, x) = instance(&mut rng, 1.0);
    let cfg = McConfig::new(50_000, 1).unwrap();
    assert!(check_chance(&s, &x, 0.0, &cfg).is_err());
    assert!(check_chance(&s, &x, 0.7, &cfg).is_err());
    assert!(check_chance(&s, &vec![0.0; x.len()], EPS, &cfg).is_err());
    let few = McConfig { samples: 10, ..cfg };
    assert!(check_chance(&s, &x, EPS, &few).is_err());
}
