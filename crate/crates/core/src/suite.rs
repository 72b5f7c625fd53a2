//! Verification suites: grids of checks run in parallel and aggregated into
//! one report.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::density::{build_density, moments, DiscreteDensity};
use crate::distances::{i_functional, j_gen, poisson_covering, poisson_decomposition, Ext};
use crate::error::{Error, Result};
use crate::pinsker::{
    check_backward_bound, check_classic_pinsker, check_forward_bound, check_poisson_information_bound,
    check_solution_bound, compare_scaled_constants, density_label, rank_experiment, BoundCheck,
    CheckStatus, PoissonFactor,
};
use crate::random::{item_rng, mean_preserving_perturbation, random_pair, PairShape};
use crate::scalar::{Backend, Rational, Scalar};
use crate::spec::{DensitySpec, TruncationPolicy};
use crate::stein::{characterization_probe, Direction, TestFunction};
use crate::zoo::{reference_instances, zoo_equivalence_check, ZooKind, ZooOperator};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SuiteName {
    ClassicPinsker,
    Backward,
    Forward,
    Poisson,
    Rank,
    Zoo,
    Characterization,
}

impl SuiteName {
    pub const ALL: [SuiteName; 7] = [
        SuiteName::ClassicPinsker,
        SuiteName::Backward,
        SuiteName::Forward,
        SuiteName::Poisson,
        SuiteName::Rank,
        SuiteName::Zoo,
        SuiteName::Characterization,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SuiteName::ClassicPinsker => "classic_pinsker",
            SuiteName::Backward => "backward",
            SuiteName::Forward => "forward",
            SuiteName::Poisson => "poisson",
            SuiteName::Rank => "rank",
            SuiteName::Zoo => "zoo",
            SuiteName::Characterization => "characterization",
        }
    }
}

impl fmt::Display for SuiteName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SuiteName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        SuiteName::ALL
            .into_iter()
            .find(|n| n.name() == s)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown suite `{s}`")))
    }
}

/// Parameter ranges of a suite. Fields a suite does not use are ignored.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    /// Random pairs for the pair-based suites.
    pub pairs: usize,
    /// Random supports are `[0, m]` with `1 ≤ m ≤ max_upper`.
    pub max_upper: i64,
    pub lambdas: Vec<f64>,
    pub thetas: Vec<u64>,
    pub ns: Vec<u32>,
    /// Random tables per zoo instance.
    pub trials: usize,
    /// Monte-Carlo draws per rank point; only prime θ are sampled.
    pub samples: Option<u64>,
}

impl Grid {
    pub fn for_suite(name: SuiteName) -> Self {
        let base = Grid {
            pairs: 0,
            max_upper: 8,
            lambdas: Vec::new(),
            thetas: Vec::new(),
            ns: Vec::new(),
            trials: 0,
            samples: None,
        };
        match name {
            SuiteName::ClassicPinsker => Grid { pairs: 1000, max_upper: 20, ..base },
            SuiteName::Backward | SuiteName::Forward => Grid { pairs: 500, ..base },
            SuiteName::Characterization => Grid { pairs: 100, ..base },
            SuiteName::Poisson => Grid {
                lambdas: vec![0.1, 0.5, 2.0 / std::f64::consts::E, 1.0, 2.0, 5.0, 10.0],
                ..base
            },
            SuiteName::Rank => Grid { thetas: vec![2, 3, 5], ns: (1..=8).collect(), ..base },
            SuiteName::Zoo => Grid { trials: 32, ..base },
        }
    }

    fn validate(&self, name: SuiteName) -> Result<()> {
        let empty = match name {
            SuiteName::ClassicPinsker | SuiteName::Characterization => self.pairs == 0,
            SuiteName::Backward | SuiteName::Forward => false,
            SuiteName::Poisson => self.lambdas.is_empty(),
            SuiteName::Rank => self.thetas.is_empty() || self.ns.is_empty(),
            SuiteName::Zoo => self.trials == 0,
        };
        if empty {
            return Err(Error::EmptyGrid(name.to_string()));
        }
        if self.max_upper < 1 {
            return Err(Error::InvalidParameter("max_upper must be at least 1".into()));
        }
        if self.lambdas.iter().any(|l| !(l.is_finite() && *l > 0.0)) {
            return Err(Error::InvalidParameter("lambdas must be positive".into()));
        }
        if self.ns.contains(&0) {
            return Err(Error::InvalidParameter("matrix sizes must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct Summary {
    pub total: usize,
    pub passed: usize,
    pub failed: usize,
    pub skipped: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct SuiteReport {
    pub suite: SuiteName,
    pub grid: Grid,
    pub seed: u64,
    pub backend: Backend,
    pub checks: Vec<BoundCheck>,
    pub summary: Summary,
    /// No non-skipped check failed.
    pub passed: bool,
}

impl SuiteReport {
    pub fn new(suite: SuiteName, grid: Grid, seed: u64, backend: Backend, checks: Vec<BoundCheck>) -> Self {
        let mut summary = Summary { total: checks.len(), ..Summary::default() };
        for c in &checks {
            match c.status {
                CheckStatus::Passed => summary.passed += 1,
                CheckStatus::Failed => summary.failed += 1,
                CheckStatus::Skipped => summary.skipped += 1,
            }
        }
        let passed = summary.failed == 0;
        SuiteReport { suite, grid, seed, backend, checks, summary, passed }
    }

    pub fn failures(&self) -> impl Iterator<Item = &BoundCheck> {
        self.checks.iter().filter(|c| c.status == CheckStatus::Failed)
    }
}

/// Runs a suite. `backend` selects the arithmetic where the family permits;
/// the Poisson suite is always evaluated on floats and the rank suite
/// always exactly.
pub fn run_suite(name: SuiteName, grid: &Grid, seed: u64, backend: Backend) -> Result<SuiteReport> {
    grid.validate(name)?;
    let (checks, used) = match (name, backend) {
        (SuiteName::Poisson, _) => (poisson_suite(grid)?, Backend::Float),
        (SuiteName::Rank, _) => (rank_suite(grid, seed)?, Backend::Rational),
        (_, Backend::Rational) => (generic_suite::<Rational>(name, grid, seed)?, Backend::Rational),
        (_, Backend::Float) => (generic_suite::<f64>(name, grid, seed)?, Backend::Float),
    };
    Ok(SuiteReport::new(name, grid.clone(), seed, used, checks))
}

fn abort(params: Value) -> impl FnOnce(Error) -> Error {
    move |e| Error::SuiteAborted { params: params.to_string(), source: Box::new(e) }
}

/// Runs `items` in parallel, keeping their order, and tags hard errors with
/// the item's parameters.
fn par_checks<T, F>(items: Vec<T>, run: F) -> Result<Vec<BoundCheck>>
where
    T: Send + Sync,
    F: Fn(&T) -> (Value, Result<Vec<BoundCheck>>) + Sync + Send,
{
    let nested: Result<Vec<Vec<BoundCheck>>> = items
        .par_iter()
        .map(|item| {
            let (params, out) = run(item);
            out.map_err(abort(params))
        })
        .collect();
    Ok(nested?.into_iter().flatten().collect())
}

fn tag(mut check: BoundCheck, extra: Value) -> BoundCheck {
    if let (Value::Object(map), Value::Object(add)) = (&mut check.params, extra) {
        map.extend(add);
    }
    check
}

fn generic_suite<S: Scalar>(name: SuiteName, grid: &Grid, seed: u64) -> Result<Vec<BoundCheck>> {
    let items: Vec<u64> = (0..grid.pairs as u64).collect();
    let mut checks = match name {
        SuiteName::ClassicPinsker => par_checks(items, |&i| {
            let shape = [PairShape::Shared, PairShape::Nested, PairShape::Independent][i as usize % 3];
            let (p, q) = random_pair::<S, _>(&mut item_rng(seed, i), grid.max_upper, shape);
            (json!({ "item": i }), Ok(vec![tag(check_classic_pinsker(&p, &q), json!({ "item": i }))]))
        })?,
        SuiteName::Backward | SuiteName::Forward => par_checks(items, |&i| {
            // Mostly shared supports, where the hypotheses can hold.
            let shape = if i % 4 == 3 { PairShape::Nested } else { PairShape::Shared };
            let (p, q) = random_pair::<S, _>(&mut item_rng(seed, i), grid.max_upper, shape);
            let out = if name == SuiteName::Backward {
                check_backward_bound(&p, &q)
            } else {
                check_forward_bound(&p, &q)
            };
            (json!({ "item": i }), out.map(|c| vec![tag(c, json!({ "item": i }))]))
        })?,
        SuiteName::Characterization => par_checks(items, |&i| {
            (json!({ "item": i }), characterization_item::<S>(grid, seed, i))
        })?,
        SuiteName::Zoo => zoo_suite::<S>(grid, seed)?,
        SuiteName::Poisson | SuiteName::Rank => unreachable!("dispatched before"),
    };
    match name {
        SuiteName::Backward => checks.extend(family_pairs::<S>(Direction::Backward, seed)?),
        SuiteName::Forward => checks.extend(family_pairs::<S>(Direction::Forward, seed)?),
        _ => {}
    }
    Ok(checks)
}

/// Named family pairs run after the random pairs of the bound suites.
fn family_pairs<S: Scalar>(dir: Direction, seed: u64) -> Result<Vec<BoundCheck>> {
    let check = |p: &DiscreteDensity<S>, q: &DiscreteDensity<S>| match dir {
        Direction::Backward => check_backward_bound(p, q),
        Direction::Forward => check_forward_bound(p, q),
    };
    let mut out = Vec::new();
    let window = TruncationPolicy::default().with_window(0, 30);
    let po2: DiscreteDensity<S> = build_density(&DensitySpec::poisson(2.0).with_truncation(window))?;
    let perturbed = mean_preserving_perturbation(&mut item_rng(seed, u64::MAX), &po2);
    out.push(check(&po2, &perturbed)?);
    for lambda in [0.5, 1.0, 2.0, 5.0] {
        // Bin(5, 1) is a point mass and has no density in the family.
        for n in [5u32, 10, 20].into_iter().filter(|&n| lambda < n as f64) {
            let q: DiscreteDensity<S> = build_density(&DensitySpec::binomial(n, lambda / n as f64))?;
            let p = poisson_covering(&S::from_f64(lambda)?, &q, crate::spec::DEFAULT_TAIL_MASS)?;
            out.push(check(&p, &q)?);
        }
    }
    let p: DiscreteDensity<S> = build_density(
        &DensitySpec::rank_limit(2).with_truncation(TruncationPolicy::with_tail_mass(1e-20)),
    )?;
    let q = build_density(&DensitySpec::rank_finite(2, 3))?;
    out.push(check(&p, &q)?);
    Ok(out)
}

/// Odd items draw `p ≠ q` on a shared support, even items probe `p = p`.
fn characterization_item<S: Scalar>(grid: &Grid, seed: u64, i: u64) -> Result<Vec<BoundCheck>> {
    let mut rng = item_rng(seed, i);
    let (p, q) = random_pair::<S, _>(&mut rng, grid.max_upper, PairShape::Shared);
    let equal = i % 2 == 0;
    let q = if equal { p.clone() } else { q };
    let distinct = p.masses() != q.masses();
    Direction::BOTH
        .into_iter()
        .map(|dir| {
            let probe = characterization_probe(&p, &q, dir)?;
            let expected_consistent = !distinct;
            let holds = probe.consistent == expected_consistent;
            let params = json!({ "item": i, "direction": dir, "equal": !distinct, "p": density_label(&p) });
            Ok(BoundCheck::evaluate(
                "characterization",
                params,
                if distinct { 0.0 } else { probe.max_abs },
                if distinct { probe.max_abs } else { 0.0 },
                Some(holds),
                0.0,
                "q = p iff E_q[T_p f_z] = 0 for the solutions f_z of every half-line indicator",
            )
            .with_details(json!({ "consistent": probe.consistent, "witness": probe.witness })))
        })
        .collect()
}

fn zoo_suite<S: Scalar>(grid: &Grid, seed: u64) -> Result<Vec<BoundCheck>> {
    let provenance = "closed-form operator equals the generic Stein operator after reparameterization";
    let instances: Vec<(usize, ZooKind, DiscreteDensity<S>)> =
        reference_instances::<S>().into_iter().enumerate().map(|(i, (k, p))| (i, k, p)).collect();
    let mut checks = par_checks(instances, |(i, kind, p)| {
        let params = json!({ "operator": kind, "p": density_label(p) });
        let out = ZooOperator::from_density(*kind, p)
            .and_then(|op| zoo_equivalence_check(&op, p, grid.trials, seed.wrapping_add(*i as u64)))
            .map(|residual| {
                let exact = S::is_exact().then(|| residual.is_zero());
                vec![BoundCheck::evaluate(
                    "zoo_equivalence",
                    params.clone(),
                    residual.to_f64(),
                    0.0,
                    exact,
                    0.0,
                    provenance,
                )]
            });
        (params, out)
    })?;
    // A flat Gibbs potential gives the standard Poisson operator.
    let lambda = S::parse("3/2")?;
    let gibbs = ZooOperator::gibbs(ZooKind::GibbsForward, vec![S::one()], lambda.clone(), None);
    let poisson = ZooOperator::poisson_forward_std(lambda);
    let mut rng = item_rng(seed, u64::MAX);
    let mut worst = S::zero();
    for _ in 0..grid.trials {
        let f0: TestFunction<S> = crate::random::random_table(&mut rng, 0, 20);
        for x in -1..=21 {
            worst = crate::stein::max(worst, (gibbs.apply(&f0, x) - poisson.apply(&f0, x)).abs());
        }
    }
    let exact = S::is_exact().then(|| worst.is_zero());
    checks.push(BoundCheck::evaluate(
        "zoo_gibbs_poisson",
        json!({ "omega": "3/2" }),
        worst.to_f64(),
        0.0,
        exact,
        0.0,
        "a constant Gibbs potential reduces the Gibbs operator to the standard Poisson operator",
    ));
    Ok(checks)
}

fn rank_suite(grid: &Grid, seed: u64) -> Result<Vec<BoundCheck>> {
    let n_max = *grid.ns.iter().max().expect("validated");
    par_checks(grid.thetas.clone(), |&theta| {
        let samples = grid.samples.filter(|_| crate::rank::is_prime(theta));
        let out = rank_experiment(theta, n_max, samples, seed).map(|results| {
            results
                .into_iter()
                .filter(|r| grid.ns.contains(&r.n))
                .map(|r| r.to_check())
                .collect()
        });
        (json!({ "theta": theta }), out)
    })
}

const IDENTITY_TOLERANCE: f64 = 1e-8;

/// A mean-λ family on `[0, max(40, K)]`, where `K` is the automatic
/// Poisson window.
pub fn perturbed_poisson(lambda: f64, seed: u64) -> Result<(DiscreteDensity<f64>, DiscreteDensity<f64>)> {
    let auto: DiscreteDensity<f64> = build_density(&DensitySpec::poisson(lambda))?;
    let upper = auto.upper().max(40);
    let p = build_density(
        &DensitySpec::poisson(lambda).with_truncation(TruncationPolicy::default().with_window(0, upper)),
    )?;
    let q = mean_preserving_perturbation(&mut item_rng(seed, lambda.to_bits()), &p);
    Ok((p, q))
}

fn poisson_point(lambda: f64, seed: u64) -> Result<Vec<BoundCheck>> {
    let mut out = Vec::new();
    let po: DiscreteDensity<f64> = build_density(&DensitySpec::poisson(lambda))?;
    let te = po.truncation_error();
    let i = i_functional(&po);
    out.push(BoundCheck::evaluate(
        "poisson_i_functional",
        json!({ "lambda": lambda }),
        (i - 1.0 / lambda).abs(),
        1e-9,
        None,
        0.0,
        "I(Po(lambda)) = 1/lambda",
    ));
    let (p_wide, perturbed) = perturbed_poisson(lambda, seed)?;
    for (p, q) in [(&po, &po), (&p_wide, &perturbed)] {
        let j = match j_gen(p, q)? {
            Ext::Finite(v) => v,
            Ext::Infinite(r) => {
                return Err(Error::InvalidParameter(format!("shared-window J_gen infinite: {r}")))
            }
        };
        let decomposition = poisson_decomposition(&lambda, q);
        out.push(
            BoundCheck::evaluate(
                "poisson_decomposition",
                json!({ "lambda": lambda, "q": density_label(q) }),
                (j - decomposition).abs(),
                IDENTITY_TOLERANCE,
                None,
                te,
                "J_gen(Po(lambda), q) = sigma^2/lambda^2 - 2/lambda + I(q) for mean-lambda q",
            )
            .with_details(json!({ "j_gen": j, "decomposition": decomposition })),
        );
    }
    let mut mean_matched = vec![po.clone(), perturbed];
    for n in [10u32, 20, 50] {
        if (n as f64) > lambda {
            mean_matched.push(build_density(&DensitySpec::binomial(n, lambda / n as f64))?);
        }
    }
    for q in &mean_matched {
        out.push(check_poisson_information_bound(&lambda, q, PoissonFactor::Complement)?);
        out.push(check_poisson_information_bound(&lambda, q, PoissonFactor::Min)?);
        let cmp = compare_scaled_constants(&lambda, q)?;
        let ordered = BoundCheck::evaluate(
            "scaled_constant_ordering",
            cmp.ours.params.clone(),
            cmp.ours.rhs,
            cmp.literature.rhs,
            Some(cmp.rhs_ordered),
            0.0,
            "improved scaled-information constant never exceeds sqrt(2)",
        );
        out.extend([cmp.ours, cmp.literature, ordered]);
    }
    let (mean, _) = moments(&po);
    let hi = (2.0 * mean).ceil() as i64 + 2;
    for z in 0..=hi.min(po.upper()) {
        let l = TestFunction::indicator(po.lower(), po.upper(), z);
        out.push(tag(
            check_solution_bound(&po, Direction::Backward, &l, &format!("indicator({z})"), PoissonFactor::Min)?,
            json!({ "z": z }),
        ));
    }
    Ok(out)
}

fn poisson_suite(grid: &Grid) -> Result<Vec<BoundCheck>> {
    par_checks(grid.lambdas.clone(), |&lambda| (json!({ "lambda": lambda }), poisson_point(lambda, 0)))
}
