use num_traits::Zero;

use stein_gauge::distances::{k_gen, poisson_covering, poisson_scaled_constant, total_variation};
use stein_gauge::pinsker::{
    check_backward_bound, check_forward_bound, check_poisson_information_bound, compare_scaled_constants,
    rank_experiment, rank_limit_for,
};
use stein_gauge::random::{item_rng, mean_preserving_perturbation, random_pair, random_pmf, PairShape};
use stein_gauge::scalar::int;
use stein_gauge::stein::{characterization_probe, delta, stein_operator};
use stein_gauge::*;

fn rational(n: i64, d: i64) -> Rational {
    Rational::new(n.into(), d.into())
}

#[test]
fn duality_needs_the_reversed_difference() {
    let p = DiscreteDensity::from_masses(0, vec![rational(1, 6), rational(1, 3), rational(1, 2)]).unwrap();
    let g = TestFunction::new(-1, vec![rational(0, 1), rational(1, 1), rational(3, 1), rational(-2, 1), rational(5, 1)]);
    for dir in Direction::BOTH {
        let pinned = match dir {
            Direction::Forward => 0,
            Direction::Backward => 2,
        };
        let f = TestFunction::from_fn(0, 2, |x| if x == pinned { rational(0, 1) } else { int(x + 2) });
        let lhs = p.expect(|x| stein_operator(&p, dir, &f, x) * g.get(x));
        let reversed = -p.expect(|x| f.get(x) * delta(dir.reverse(), &g, x));
        let same = -p.expect(|x| f.get(x) * delta(dir, &g, x));
        assert_eq!(lhs, reversed, "{dir}");
        assert_ne!(lhs, same, "{dir}");
        assert_ne!(lhs, -same.clone(), "{dir}");
    }
}

#[test]
fn characterization_matches_conditional_total_variation() {
    for i in 0..40u64 {
        let mut rng = item_rng(17, i);
        let (p, other) = random_pair::<Rational, _>(&mut rng, 6, PairShape::Independent);
        // Either q itself, or p with extra mass placed beyond its support.
        let q = if i % 2 == 0 {
            other
        } else {
            let mut masses: Vec<Rational> = p.masses().iter().map(|m| m.clone() * rational(2, 3)).collect();
            masses.push(rational(1, 3));
            DiscreteDensity::from_masses(p.lower(), masses).unwrap()
        };
        let inside = q.mass_in(p.lower(), p.upper());
        let conditioned = DiscreteDensity::from_masses(
            p.lower(),
            p.points().map(|x| q.mass(x) / &inside).collect(),
        );
        let tv_zero = match conditioned {
            Ok(c) => total_variation(&p, &c).is_zero(),
            // a zero atom inside S_p already makes the laws differ
            Err(_) => false,
        };
        for dir in Direction::BOTH {
            assert_eq!(characterization_probe(&p, &q, dir).unwrap().consistent, tv_zero, "item {i} {dir}");
        }
    }
}

#[test]
fn backward_bound_on_a_perturbed_poisson() {
    let spec = DensitySpec::poisson(2.0).with_truncation(TruncationPolicy::default().with_window(0, 30));
    let p: DiscreteDensity<Rational> = build_density(&spec).unwrap();
    let q = mean_preserving_perturbation(&mut item_rng(8, 0), &p);
    let check = check_backward_bound(&p, &q).unwrap();
    assert!(check.passed && check.exact, "{check:?}");
    assert!(check.slack > 0.0);
}

#[test]
fn backward_bound_on_random_rational_pairs() {
    for i in 0..30u64 {
        let (p, q) = random_pair::<Rational, _>(&mut item_rng(9, i), 8, PairShape::Shared);
        let check = check_backward_bound(&p, &q).unwrap();
        assert!(check.exact);
        assert!(check.passed || check.is_skipped(), "{check:?}");
    }
}

#[test]
fn forward_bound_for_binomial_approximation() {
    for lambda in [0.5, 1.0, 2.0, 5.0] {
        for n in [5u32, 10, 20] {
            if lambda >= n as f64 {
                continue;
            }
            let q: DiscreteDensity<f64> = build_density(&DensitySpec::binomial(n, lambda / n as f64)).unwrap();
            let p = poisson_covering(&lambda, &q, 1e-14).unwrap();
            let check = check_forward_bound(&p, &q).unwrap();
            assert!(check.passed, "lambda {lambda} n {n}: {check:?}");
        }
    }
}

#[test]
fn forward_bound_for_matrix_rank() {
    let p = rank_limit_for(2, 3).unwrap();
    let q = build_density(&DensitySpec::rank_finite(2, 3)).unwrap();
    let check = check_forward_bound(&p, &q).unwrap();
    assert!(check.passed && check.exact, "{check:?}");
}

#[test]
fn rank_scaled_information_is_a_theta_moment() {
    for (theta, n) in [(2u64, 1u32), (2, 3), (3, 2)] {
        let p = rank_limit_for(theta, n).unwrap();
        let q: DiscreteDensity<Rational> = build_density(&DensitySpec::rank_finite(theta, n)).unwrap();
        let t = int::<Rational>(theta as i64);
        let oracle = q.expect(|y| {
            let e = 2 * (y - n as i64);
            if e >= 0 {
                num_traits::pow(t.clone(), e as usize)
            } else {
                Rational::from_integer(1.into()) / num_traits::pow(t.clone(), (-e) as usize)
            }
        });
        assert_eq!(k_gen(&p, &q).unwrap(), oracle);
    }
}

#[test]
fn rank_bound_at_theta_three() {
    let results = rank_experiment(3, 4, None, 0).unwrap();
    let r = &results[3];
    assert_eq!(r.n, 4);
    assert!((r.bound_3theta - 3.0 / 243.0).abs() < 1e-15);
    assert!((r.bound_3theta - 0.01235).abs() < 1e-5);
    assert!(r.tv_exact <= r.bound_3theta);
}

#[test]
fn poisson_information_bound_examples() {
    let q: DiscreteDensity<f64> = build_density(&DensitySpec::binomial(8, 0.25)).unwrap();
    let check = check_poisson_information_bound(&2.0, &q, PoissonFactor::Complement).unwrap();
    assert!(check.passed, "{check:?}");
    assert_eq!(check.params["mean_matched"], true);

    // Off-mean q: whatever is reported is recorded, not asserted.
    let shifted: DiscreteDensity<f64> = build_density(&DensitySpec::binomial(10, 0.25)).unwrap();
    let check = check_poisson_information_bound(&2.0, &shifted, PoissonFactor::Complement).unwrap();
    assert_eq!(check.params["mean_matched"], false);

    let low = check_poisson_information_bound(&0.5, &q, PoissonFactor::Complement).unwrap();
    assert!(low.is_skipped());
}

#[test]
fn scaled_constants_at_the_poisson_law() {
    for lambda in [0.5, 1.0, 2.0, 5.0] {
        let po: DiscreteDensity<f64> = build_density(&DensitySpec::poisson(lambda)).unwrap();
        let cmp = compare_scaled_constants(&lambda, &po).unwrap();
        assert_eq!((cmp.ours.lhs, cmp.ours.rhs, cmp.literature.rhs), (0.0, 0.0, 0.0));
        assert!(poisson_scaled_constant(lambda) / std::f64::consts::SQRT_2 <= (-0.5f64).exp() + 1e-15);
    }
}

#[test]
fn poisson_suite_fails_only_with_the_complement_factor() {
    let report = run_suite(SuiteName::Poisson, &Grid::for_suite(SuiteName::Poisson), 0, Backend::Float).unwrap();
    let failures: Vec<&BoundCheck> = report.failures().collect();
    assert!(!failures.is_empty());
    for f in &failures {
        assert_eq!(f.name, "poisson_information_bound");
        assert_eq!(f.params["factor"], "complement");
        assert_eq!(f.params["lambda"], 1.0);
    }
    assert!(report.checks.iter().filter(|c| c.name.ends_with("_min")).all(|c| c.passed));
    assert!(report.checks.iter().filter(|c| c.name == "scaled_constant_ordering").all(|c| c.passed));
}

#[test]
fn float_and_exact_suites_agree_on_verdicts() {
    for name in [SuiteName::Backward, SuiteName::Forward] {
        let mut grid = Grid::for_suite(name);
        grid.pairs = 60;
        let exact = run_suite(name, &grid, 2, Backend::Rational).unwrap();
        let float = run_suite(name, &grid, 2, Backend::Float).unwrap();
        assert!(exact.passed && float.passed);
        assert_eq!(exact.summary.total, float.summary.total);
    }
}

#[test]
fn check_reports_have_the_documented_shape() {
    let p: DiscreteDensity<Rational> = random_pmf(&mut item_rng(1, 1), 0, 4);
    let check = check_backward_bound(&p, &p).unwrap();
    let v = serde_json::to_value(&check).unwrap();
    for key in ["name", "params", "lhs", "rhs", "slack", "passed", "truncation_error", "provenance"] {
        assert!(v.get(key).is_some(), "missing {key}");
    }
    let report = run_suite(SuiteName::Zoo, &Grid::for_suite(SuiteName::Zoo), 0, Backend::Rational).unwrap();
    let v = serde_json::to_value(&report).unwrap();
    for key in ["suite", "grid", "checks", "summary"] {
        assert!(v.get(key).is_some(), "missing {key}");
    }
    assert_eq!(v["suite"], "zoo");
    assert_eq!(v["summary"]["skipped"], 0);
}
