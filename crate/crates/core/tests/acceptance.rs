//! Acceptance criteria. Each test prints one `PASS`/`FAIL` line and then
//! asserts the criterion at its stated tolerance.

use std::time::{Duration, Instant};

use num_traits::Zero;

use stein_gauge::distances::{
    erickson_constant, erickson_min_constant, i_functional, j_gen, kl_divergence,
    poisson_decomposition, poisson_scaled_constant, total_variation,
};
use stein_gauge::pinsker::{check_poisson_information_bound, rank_experiment, rank_limit_for};
use stein_gauge::random::{item_rng, random_class_member, random_pair, random_pmf, random_table, PairShape};
use stein_gauge::rank::rank_sample;
use stein_gauge::stein::{characterization_probe, stein_identity_residual, stein_mean};
use stein_gauge::suite::perturbed_poisson;
use stein_gauge::*;

fn q(n: i64, d: i64) -> Rational {
    Rational::new(n.into(), d.into())
}

/// Prints the verdict line, then fails the test if the criterion failed or
/// overran its time budget.
fn report(id: u32, title: &str, ok: bool, budget: Duration, started: Instant, detail: String) {
    let elapsed = started.elapsed();
    let within = elapsed <= budget;
    let verdict = if ok && within { "PASS" } else { "FAIL" };
    println!("{verdict} criterion {id:>2} {title}: {detail} [{:.2}s of {}s]", elapsed.as_secs_f64(), budget.as_secs());
    assert!(ok, "criterion {id} ({title}) failed: {detail}");
    assert!(within, "criterion {id} ({title}) took {elapsed:?}, budget {budget:?}");
}

#[test]
fn criterion_01_mean_zero() {
    let started = Instant::now();
    let mut nonzero = 0;
    let mut evaluated = 0;
    for i in 0..200u64 {
        let mut rng = item_rng(101, i);
        let m = 1 + (i % 12) as usize;
        let p: DiscreteDensity<Rational> = random_pmf(&mut rng, 0, m + 1);
        for dir in Direction::BOTH {
            for _ in 0..32 {
                let f = random_class_member(&mut rng, &p, dir);
                evaluated += 1;
                if !stein_mean(&p, dir, &f).is_zero() {
                    nonzero += 1;
                }
            }
        }
    }
    report(1, "mean-zero Stein operator", nonzero == 0, Duration::from_secs(10), started,
        format!("{nonzero} nonzero of {evaluated} exact means"));
}

#[test]
fn criterion_02_characterization() {
    let started = Instant::now();
    let (mut missed, mut spurious, mut probes) = (0, 0, 0);
    for i in 0..100u64 {
        let mut rng = item_rng(202, i);
        let (p, other) = loop {
            let (p, other) = random_pair::<Rational, _>(&mut rng, 8, PairShape::Shared);
            if p.masses() != other.masses() {
                break (p, other);
            }
        };
        for dir in Direction::BOTH {
            probes += 1;
            if characterization_probe(&p, &other, dir).unwrap().witness.is_none() {
                missed += 1;
            }
            if !characterization_probe(&p, &p, dir).unwrap().consistent {
                spurious += 1;
            }
        }
    }
    report(2, "characterization probe", missed == 0 && spurious == 0, Duration::from_secs(10), started,
        format!("{probes} probes per side, {missed} distinct pairs without witness, {spurious} equal pairs flagged"));
}

#[test]
fn criterion_03_stein_identity() {
    let started = Instant::now();
    let (mut nonzero, mut evaluated) = (0, 0);
    for i in 0..100u64 {
        let mut rng = item_rng(303, i);
        let (p, other) = random_pair::<Rational, _>(&mut rng, 8, PairShape::Shared);
        for _ in 0..8 {
            let l: TestFunction<Rational> = random_table(&mut rng, p.lower(), p.upper());
            for dir in Direction::BOTH {
                evaluated += 1;
                if !stein_identity_residual(&p, &other, dir, &l).unwrap().is_zero() {
                    nonzero += 1;
                }
            }
        }
    }
    report(3, "Stein identity", nonzero == 0, Duration::from_secs(10), started,
        format!("{nonzero} nonzero residuals of {evaluated}"));
}

#[test]
fn criterion_04_classic_pinsker() {
    let started = Instant::now();
    let suite = run_suite(SuiteName::ClassicPinsker, &Grid::for_suite(SuiteName::ClassicPinsker), 404, Backend::Rational)
        .unwrap();
    let p = DiscreteDensity::from_masses(0, vec![q(1, 2), q(1, 2)]).unwrap();
    let r = DiscreteDensity::from_masses(0, vec![q(1, 4), q(3, 4)]).unwrap();
    let tv = Scalar::to_f64(&total_variation(&p, &r));
    let kl = kl_divergence(&r, &p).to_f64();
    let kl_oracle = 0.25 * (0.25f64 / 0.5).ln() + 0.75 * (0.75f64 / 0.5).ln();
    let spot = (tv - 0.25).abs() <= 1e-12
        && (kl - kl_oracle).abs() <= 1e-12
        && (kl - 0.13081).abs() <= 1e-5
        && ((2.0 * kl).sqrt() - 0.51149).abs() <= 1e-5
        && 2.0 * tv <= (2.0 * kl).sqrt();
    let ok = spot && suite.passed && suite.summary.total == 1000;
    report(4, "classical Pinsker", ok, Duration::from_secs(5), started,
        format!("{} of {} pairs pass; spot tv {tv}, kl {kl:.6}, sqrt(2 kl) {:.6}", suite.summary.passed, suite.summary.total, (2.0 * kl).sqrt()));
}

#[test]
fn criterion_05_local_bounds() {
    let started = Instant::now();
    let mut lines = Vec::new();
    let mut ok = true;
    for name in [SuiteName::Backward, SuiteName::Forward] {
        let grid = Grid::for_suite(name);
        let suite = run_suite(name, &grid, 505, Backend::Rational).unwrap();
        ok &= suite.summary.failed == 0 && grid.pairs >= 500 && suite.summary.passed > 0;
        lines.push(format!(
            "{name}: {} checks, {} passed, {} failed, {} skipped",
            suite.summary.total, suite.summary.passed, suite.summary.failed, suite.summary.skipped
        ));
    }
    report(5, "backward and forward local Pinsker bounds", ok, Duration::from_secs(60), started, lines.join("; "));
}

#[test]
fn criterion_06_poisson_identities() {
    let started = Instant::now();
    let mut worst_i = 0.0f64;
    let mut worst_decomposition = 0.0f64;
    let mut worst_sides = 0.0f64;
    for lambda in [0.5, 1.0, 2.0, 5.0] {
        let policy = TruncationPolicy::with_tail_mass(1e-14);
        let po: DiscreteDensity<f64> = build_density(&DensitySpec::poisson(lambda).with_truncation(policy)).unwrap();
        worst_i = worst_i.max((i_functional(&po) - 1.0 / lambda).abs());
        let (p_wide, perturbed) = perturbed_poisson(lambda, 606).unwrap();
        for (p, other) in [(&po, &po), (&p_wide, &perturbed)] {
            let j = j_gen(p, other).unwrap().to_f64();
            worst_decomposition = worst_decomposition.max((j - poisson_decomposition(&lambda, other)).abs());
        }
        // The complement factor is positive only above 2/e; at q = Po(λ) the
        // radicand vanishes whichever factor multiplies it.
        let factor = if lambda > 2.0 / std::f64::consts::E { PoissonFactor::Complement } else { PoissonFactor::Min };
        let c = check_poisson_information_bound(&lambda, &po, factor).unwrap();
        worst_sides = worst_sides.max(c.lhs.abs()).max(c.rhs.abs());
    }
    let ok = worst_i <= 1e-9 && worst_decomposition <= 1e-8 && worst_sides <= 1e-10;
    report(6, "Poisson identities", ok, Duration::from_secs(10), started,
        format!("max |I - 1/lambda| {worst_i:.2e}, max decomposition gap {worst_decomposition:.2e}, max |lhs|,|rhs| at Po {worst_sides:.2e}"));
}

#[test]
fn criterion_07_constant_improvement() {
    let started = Instant::now();
    let root = (2.0 / std::f64::consts::E).sqrt();
    let threshold = 2.0 / std::f64::consts::E;
    let mut ok = true;
    for lambda in [0.1, 0.5, threshold, 1.0, 2.0, 5.0, 10.0] {
        let c = poisson_scaled_constant(lambda);
        ok &= c <= root + 1e-12 && root < std::f64::consts::SQRT_2;
        if lambda >= threshold {
            ok &= (c - root).abs() <= 1e-12;
        }
        ok &= c / std::f64::consts::SQRT_2 <= (1.0 / std::f64::consts::E).sqrt() + 1e-12;
    }
    let at1 = poisson_scaled_constant(1.0);
    let at_half = poisson_scaled_constant(0.5);
    ok &= (at1 - 0.85776).abs() <= 1e-5 && (at_half - 0.70711).abs() <= 1e-5;
    report(7, "scaled-information constant", ok, Duration::from_secs(1), started,
        format!("c(1) = {at1:.5}, c(0.5) = {at_half:.5}, sqrt(2/e) = {root:.5}"));
}

/// `Q_θ(k) = q_0 θ^{-k²} / ∏_{i≤k}(1 - θ^{-i})²` with `q_0 = ∏_{i≥1}(1 - θ^{-i})`.
fn rank_limit_oracle(theta: f64, k: i32) -> f64 {
    let q0: f64 = (1..200).map(|i| 1.0 - theta.powi(-i)).product();
    let denom: f64 = (1..=k).map(|i| (1.0 - theta.powi(-i)).powi(2)).product();
    q0 * theta.powi(-k * k) / denom
}

#[test]
fn criterion_08_rank_chain() {
    let started = Instant::now();
    let mut ok = true;
    let mut count = 0;
    let mut worst_ratio = 0.0f64;
    for theta in [2u64, 3, 5] {
        let results = rank_experiment(theta, 8, None, 808).unwrap();
        let mut previous = f64::INFINITY;
        for r in &results {
            count += 1;
            ok &= r.tv_exact <= r.bound_3theta
                && r.moment_identity_residual <= 1e-12
                && r.chain.iter().all(|l| l.holds)
                && r.passed
                && r.tv_exact <= previous;
            previous = r.tv_exact;
            worst_ratio = worst_ratio.max(r.tv_exact / r.bound_3theta);
        }
    }
    let anchor = &rank_experiment(2, 1, None, 0).unwrap()[0];
    ok &= anchor.bound_3theta == 0.75 && anchor.moment_theta_q == 1.5;
    // TV(Q_2, {1/2, 1/2}) from the closed-form product.
    let limit = rank_limit_for(2, 1).unwrap();
    let oracle_tv = 0.5
        * ((rank_limit_oracle(2.0, 0) - 0.5).abs()
            + (rank_limit_oracle(2.0, 1) - 0.5).abs()
            + (1.0 - rank_limit_oracle(2.0, 0) - rank_limit_oracle(2.0, 1)));
    ok &= (anchor.tv_exact - oracle_tv).abs() <= 1e-12 && limit.upper() >= 3;
    let exact: DiscreteDensity<f64> = build_density(&DensitySpec::rank_finite(2, 2)).unwrap();
    let sampler_tv = rank_sample(2, 2, 100_000, 808).unwrap().total_variation(&exact);
    ok &= sampler_tv <= 0.02 && count == 24;
    report(8, "matrix-rank chain", ok, Duration::from_secs(30), started,
        format!("{count} points, max tv/bound {worst_ratio:.3}, anchor tv {:.6} vs product {oracle_tv:.6}, sampler tv {sampler_tv:.4}", anchor.tv_exact));
}

#[test]
fn criterion_09_operator_zoo() {
    let started = Instant::now();
    let suite = run_suite(SuiteName::Zoo, &Grid::for_suite(SuiteName::Zoo), 909, Backend::Rational).unwrap();
    let kinds: std::collections::BTreeSet<String> =
        suite.checks.iter().filter_map(|c| c.params.get("operator").map(|o| o.to_string())).collect();
    let all_zero = suite.checks.iter().all(|c| c.exact && c.lhs == 0.0 && c.passed);
    let gibbs = suite.checks.iter().any(|c| c.name == "zoo_gibbs_poisson" && c.passed);
    let ok = all_zero && gibbs && kinds.len() == ZooKind::ALL.len();
    report(9, "operator zoo", ok, Duration::from_secs(10), started,
        format!("{} operators, {} checks, all residuals exactly 0: {all_zero}", kinds.len(), suite.checks.len()));
}

/// Largest weighted sup of the Stein solution over point and half-line
/// indicators, with the truncation interval of each solution.
fn worst_indicator_sup<S: Scalar>(p: &DiscreteDensity<S>, dir: Direction, points: std::ops::RangeInclusive<i64>) -> (f64, f64) {
    let mut worst = (0.0f64, 0.0f64);
    for z in points {
        for l in [TestFunction::indicator(p.lower(), p.upper(), z), TestFunction::half_line(p.lower(), p.upper(), z)] {
            let sol = solve_stein(p, dir, &l).unwrap();
            let ws = Scalar::to_f64(&sol.weighted_sup);
            if ws > worst.0 {
                let te = 2.0 * p.truncation_error() * (1.0 + Scalar::to_f64(&sol.values.sup_abs()));
                worst = (ws, te);
            }
        }
    }
    worst
}

#[test]
fn criterion_10_solution_bounds() {
    let started = Instant::now();
    let mut ok = true;
    let mut lines = Vec::new();
    for lambda in [1.0, 2.0, 5.0] {
        let p: DiscreteDensity<f64> = build_density(&DensitySpec::poisson(lambda)).unwrap();
        let (ws, te) = worst_indicator_sup(&p, Direction::Backward, 0..=p.upper());
        let bound = erickson_constant(lambda);
        let holds = ws <= bound + 1e-9 + te;
        ok &= holds;
        lines.push(format!(
            "Po({lambda}) sup {ws:.4} vs 1-sqrt(2/(e lambda)) = {bound:.4} {} (min form {:.4})",
            if holds { "ok" } else { "VIOLATED" },
            erickson_min_constant(lambda)
        ));
    }
    for theta in [2u64, 3] {
        let p = rank_limit_for(theta, 1).unwrap();
        let (ws, _) = worst_indicator_sup(&p, Direction::Forward, 0..=p.upper());
        let t = theta as f64;
        let bound = 1.0 / (t * t) + 1.0 / (t * t * t);
        let holds = ws <= bound;
        ok &= holds;
        lines.push(format!("Q_{theta} sup {ws:.4} vs {bound:.4} {}", if holds { "ok" } else { "VIOLATED" }));
    }
    report(10, "weighted sup-norm of Stein solutions", ok, Duration::from_secs(10), started, lines.join("; "));
}
