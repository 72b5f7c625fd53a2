//! Closed-form Stein operators for the standard families.
//!
//! Each operator acts on a free function `f₀` and equals the generic
//! operator of [`crate::stein`] applied to a reparameterized `f`, for
//! example `f(x) = x f₀(x)` for the standard Poisson operator
//! `λ f₀(x+1) - x f₀(x)`. The reparameterization is stored with the
//! operator so the equivalence can be checked mechanically.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::density::{build_density, gibbs_weight, rank_b, theta_pow, DiscreteDensity, Family};
use crate::error::{Error, Result};
use crate::random::{item_rng, random_table};
use crate::scalar::{int, Scalar};
use crate::stein::{stein_operator, Direction, TestFunction};
use crate::spec::{DensitySpec, FamilySpec, GibbsParams, OrdParams};
use crate::support::Bound;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ZooKind {
    PoissonForwardStd,
    PoissonBackward,
    UrnForward,
    UrnBackward,
    OrdForward,
    OrdBackward,
    RecurrenceForward,
    GibbsForward,
    GibbsBackward,
}

impl ZooKind {
    pub const ALL: [ZooKind; 9] = [
        ZooKind::PoissonForwardStd,
        ZooKind::PoissonBackward,
        ZooKind::UrnForward,
        ZooKind::UrnBackward,
        ZooKind::OrdForward,
        ZooKind::OrdBackward,
        ZooKind::RecurrenceForward,
        ZooKind::GibbsForward,
        ZooKind::GibbsBackward,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ZooKind::PoissonForwardStd => "poisson_forward_std",
            ZooKind::PoissonBackward => "poisson_backward",
            ZooKind::UrnForward => "urn_forward",
            ZooKind::UrnBackward => "urn_backward",
            ZooKind::OrdForward => "ord_forward",
            ZooKind::OrdBackward => "ord_backward",
            ZooKind::RecurrenceForward => "recurrence_forward",
            ZooKind::GibbsForward => "gibbs_forward",
            ZooKind::GibbsBackward => "gibbs_backward",
        }
    }

    pub fn direction(self) -> Direction {
        match self {
            ZooKind::PoissonForwardStd
            | ZooKind::UrnForward
            | ZooKind::OrdForward
            | ZooKind::RecurrenceForward
            | ZooKind::GibbsForward => Direction::Forward,
            _ => Direction::Backward,
        }
    }
}

impl fmt::Display for ZooKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ZooKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ZooKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown zoo operator `{s}`")))
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Params<S> {
    Poisson { lambda: S },
    Urn { n: i64, alpha: S, beta: S },
    Ord { lower: i64, s: Vec<S>, tau: Vec<S> },
    /// `a(x) p(x-1) = b(x) p(x)` for the matrix-rank laws; `n = None` is the
    /// limiting law with `a ≡ θ`.
    Rank { theta: u64, n: Option<i64> },
    Gibbs { exp_v: Vec<S>, omega: S, n: Option<i64> },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ZooOperator<S> {
    kind: ZooKind,
    params: Params<S>,
}

impl<S: Scalar> ZooOperator<S> {
    pub fn poisson_forward_std(lambda: S) -> Self {
        ZooOperator { kind: ZooKind::PoissonForwardStd, params: Params::Poisson { lambda } }
    }

    pub fn poisson_backward(lambda: S) -> Self {
        ZooOperator { kind: ZooKind::PoissonBackward, params: Params::Poisson { lambda } }
    }

    pub fn urn(kind: ZooKind, n: u32, alpha: S, beta: S) -> Self {
        ZooOperator { kind, params: Params::Urn { n: n as i64, alpha, beta } }
    }

    /// `exp_v[x] = exp(V(x))`; `n = None` means support on all naturals.
    pub fn gibbs(kind: ZooKind, exp_v: Vec<S>, omega: S, n: Option<i64>) -> Self {
        ZooOperator { kind, params: Params::Gibbs { exp_v, omega, n } }
    }

    /// The operator of `kind` for the family and parameters of `p`.
    pub fn from_density(kind: ZooKind, p: &DiscreteDensity<S>) -> Result<Self> {
        let mismatch =
            || Error::FamilyMismatch { operator: kind.to_string(), family: p.family().kind().to_string() };
        let params = match (kind, p.family()) {
            (ZooKind::PoissonForwardStd | ZooKind::PoissonBackward, Family::Poisson { lambda }) => {
                Params::Poisson { lambda: lambda.clone() }
            }
            (ZooKind::UrnForward | ZooKind::UrnBackward, Family::PolyaUrn { n, alpha, beta }) => {
                Params::Urn { n: *n as i64, alpha: alpha.clone(), beta: beta.clone() }
            }
            (ZooKind::OrdForward | ZooKind::OrdBackward, Family::Ord { lower, s, tau }) => {
                Params::Ord { lower: *lower, s: s.clone(), tau: tau.clone() }
            }
            (ZooKind::RecurrenceForward, Family::RankLimit { theta }) => {
                Params::Rank { theta: *theta, n: None }
            }
            (ZooKind::RecurrenceForward, Family::RankFinite { theta, n }) => {
                Params::Rank { theta: *theta, n: Some(*n as i64) }
            }
            (ZooKind::GibbsForward | ZooKind::GibbsBackward, Family::Gibbs { exp_v, omega, n }) => {
                Params::Gibbs { exp_v: exp_v.clone(), omega: omega.clone(), n: *n }
            }
            _ => return Err(mismatch()),
        };
        Ok(ZooOperator { kind, params })
    }

    pub fn kind(&self) -> ZooKind {
        self.kind
    }

    pub fn direction(&self) -> Direction {
        self.kind.direction()
    }

    /// Declared support `[lower, upper]` of the operator's indicator.
    fn support(&self) -> (i64, Bound) {
        match &self.params {
            Params::Poisson { .. } | Params::Rank { n: None, .. } => (0, Bound::PosInf),
            Params::Urn { n, .. } | Params::Rank { n: Some(n), .. } => (0, Bound::Finite(*n)),
            Params::Ord { lower, s, .. } => (*lower, Bound::Finite(lower + s.len() as i64 - 1)),
            Params::Gibbs { n, .. } => (0, n.map_or(Bound::PosInf, Bound::Finite)),
        }
    }

    fn active(&self, x: i64) -> bool {
        let (lo, hi) = self.support();
        x >= lo && Bound::Finite(x) <= hi
    }

    /// Recurrence coefficient `a(x)`: `θ(1 - θ^{x-1-n})` for finite `n`.
    fn rank_a(theta: u64, n: Option<i64>, x: i64) -> S {
        let t = int::<S>(theta as i64);
        match n {
            None => t,
            Some(n) => t * (S::one() - theta_pow::<S>(theta, x - 1 - n)),
        }
    }

    fn ord_entry(table: &[S], lower: i64, x: i64) -> S {
        if x < lower {
            return S::zero();
        }
        table.get((x - lower) as usize).cloned().unwrap_or_else(S::zero)
    }

    /// The closed-form operator applied to `f₀` at `x`.
    pub fn apply(&self, f0: &TestFunction<S>, x: i64) -> S {
        if !self.active(x) {
            return S::zero();
        }
        let xs = int::<S>(x);
        match (&self.params, self.kind) {
            (Params::Poisson { lambda }, ZooKind::PoissonForwardStd) => {
                lambda.clone() * f0.get(x + 1) - xs * f0.get(x)
            }
            (Params::Poisson { lambda }, _) => f0.get(x) - xs / lambda * f0.get(x - 1),
            (Params::Urn { n, alpha, beta }, ZooKind::UrnForward) => {
                // The coefficient is 0/0 at x = n when beta = 1; it multiplies
                // p(n+1) = 0 and is taken as zero.
                let c = if x < *n {
                    int::<S>(n - x) * (alpha.clone() + int::<S>(x))
                        / (beta.clone() + int::<S>(n - x - 1))
                } else {
                    S::zero()
                };
                c * f0.get(x + 1) - xs * f0.get(x)
            }
            (Params::Urn { n, alpha, beta }, _) => {
                let c = if x > 0 {
                    xs.clone() * (beta.clone() + int::<S>(n - x)) / (alpha.clone() + int::<S>(x - 1))
                } else {
                    S::zero()
                };
                int::<S>(n - x) * f0.get(x) - c * f0.get(x - 1)
            }
            (Params::Ord { lower, s, tau }, ZooKind::OrdForward) => {
                let st = Self::ord_entry(s, *lower, x) + &Self::ord_entry(tau, *lower, x);
                st * f0.get(x + 1) - Self::ord_entry(s, *lower, x) * f0.get(x)
            }
            (Params::Ord { lower, s, tau }, _) => {
                let c = if x > *lower {
                    Self::ord_entry(s, *lower, x)
                        / (Self::ord_entry(s, *lower, x - 1) + &Self::ord_entry(tau, *lower, x - 1))
                } else {
                    S::zero()
                };
                f0.get(x) - c * f0.get(x - 1)
            }
            (Params::Rank { theta, n }, _) => {
                Self::rank_a(*theta, *n, x + 1) * f0.get(x + 1) - f0.get(x) * rank_b::<S>(*theta, x)
            }
            (Params::Gibbs { exp_v, omega, n }, ZooKind::GibbsForward) => {
                let c = if n.map_or(true, |n| x < n) {
                    gibbs_weight(exp_v, x + 1) / gibbs_weight(exp_v, x) * omega
                } else {
                    S::zero()
                };
                c * f0.get(x + 1) - xs * f0.get(x)
            }
            (Params::Gibbs { exp_v, omega, n }, _) => {
                let back = if x > 0 {
                    xs * gibbs_weight(exp_v, x - 1) / gibbs_weight(exp_v, x) / omega
                } else {
                    S::zero()
                };
                match n {
                    Some(n) => {
                        int::<S>(n - x) * f0.get(x) - int::<S>(n - x + 1) * back * f0.get(x - 1)
                    }
                    None => f0.get(x) - back * f0.get(x - 1),
                }
            }
        }
    }

    /// The multiplier `w` of the substitution `f = w f₀`.
    fn weight(&self, x: i64) -> S {
        match (&self.params, self.kind) {
            (_, ZooKind::PoissonForwardStd | ZooKind::UrnForward | ZooKind::GibbsForward) => int(x),
            (_, ZooKind::PoissonBackward | ZooKind::OrdBackward) => S::one(),
            (Params::Urn { n, .. }, ZooKind::UrnBackward) => int(n - x),
            (Params::Ord { lower, s, .. }, ZooKind::OrdForward) => Self::ord_entry(s, *lower, x),
            (Params::Rank { theta, .. }, ZooKind::RecurrenceForward) => rank_b(*theta, x),
            (Params::Gibbs { n: Some(n), .. }, ZooKind::GibbsBackward) => int(n - x),
            (Params::Gibbs { n: None, .. }, ZooKind::GibbsBackward) => S::one(),
            _ => unreachable!("operator kinds and parameters are paired at construction"),
        }
    }

    /// The test function `f` that the generic operator must receive.
    pub fn reparam(&self, f0: &TestFunction<S>) -> TestFunction<S> {
        f0.map(|x, v| self.weight(x) * v)
    }
}

/// Largest `|apply(f₀, x) - T_p(reparam f₀)(x)|` over `trials` random
/// tables `f₀` with entries in `[-1, 1]`.
///
/// Points checked run from one below the window to one above it, except at
/// an upper end created by truncation where the declared support continues.
pub fn zoo_equivalence_check<S: Scalar>(
    op: &ZooOperator<S>,
    p: &DiscreteDensity<S>,
    trials: usize,
    seed: u64,
) -> Result<S> {
    let expected = ZooOperator::from_density(op.kind, p)?;
    if expected != *op {
        return Err(Error::FamilyMismatch {
            operator: format!("{} (parameters)", op.kind),
            family: p.family().kind().to_string(),
        });
    }
    if trials == 0 {
        return Err(Error::InvalidParameter("trials must be positive".into()));
    }
    let dir = op.direction();
    let hi = if p.upper_is_truncated() { p.upper() } else { p.upper() + 1 };
    let mut worst = S::zero();
    for t in 0..trials {
        let f0 = random_table::<S, _>(&mut item_rng(seed, t as u64), p.lower(), p.upper());
        let f = op.reparam(&f0);
        for x in p.lower() - 1..=hi {
            let diff = (op.apply(&f0, x) - stein_operator(p, dir, &f, x)).abs();
            if diff > worst {
                worst = diff;
            }
        }
    }
    Ok(worst)
}

/// One instance per operator form, with both truncated-window variants of
/// the infinite-support families.
pub fn reference_instances<S: Scalar>() -> Vec<(ZooKind, DiscreteDensity<S>)> {
    let poisson = build_density(&DensitySpec::poisson("3/2")).expect("reference instance");
    let urn = build_density(&DensitySpec::polya_urn(6, 1.0, "5/2")).expect("reference instance");
    let ord = build_density(&DensitySpec::new(FamilySpec::Ord {
        params: OrdParams {
            lower: 2,
            s: vec!["0".into(), "1".into(), "3/2".into(), "2".into()],
            tau: vec!["1".into(), "1/2".into(), "-1/2".into(), "-2".into()],
        },
    }))
    .expect("reference instance");
    let gibbs_finite = build_density(&DensitySpec::new(FamilySpec::Gibbs {
        params: GibbsParams {
            v: None,
            exp_v: Some(vec!["1".into(), "2".into(), "1/3".into(), "5".into(), "1".into()]),
            omega: "2/3".into(),
            n: Some(4),
        },
    }))
    .expect("reference instance");
    let gibbs_infinite = build_density(&DensitySpec::new(FamilySpec::Gibbs {
        params: GibbsParams {
            v: None,
            exp_v: Some(vec!["1".into(), "3".into(), "1/2".into()]),
            omega: "2".into(),
            n: None,
        },
    }))
    .expect("reference instance");
    let rank = build_density(&DensitySpec::rank_finite(3, 4)).expect("reference instance");
    let rank_limit = build_density(&DensitySpec::rank_limit(2)).expect("reference instance");
    vec![
        (ZooKind::PoissonForwardStd, poisson.clone()),
        (ZooKind::PoissonBackward, poisson),
        (ZooKind::UrnForward, urn.clone()),
        (ZooKind::UrnBackward, urn),
        (ZooKind::OrdForward, ord.clone()),
        (ZooKind::OrdBackward, ord),
        (ZooKind::RecurrenceForward, rank),
        (ZooKind::RecurrenceForward, rank_limit),
        (ZooKind::GibbsForward, gibbs_finite.clone()),
        (ZooKind::GibbsBackward, gibbs_finite),
        (ZooKind::GibbsForward, gibbs_infinite.clone()),
        (ZooKind::GibbsBackward, gibbs_infinite),
    ]
}


#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Rational;
    use num_traits::Zero;

    fn q(n: i64, d: i64) -> Rational {
        Rational::new(n.into(), d.into())
    }

    fn ones(lo: i64, hi: i64) -> TestFunction<Rational> {
        TestFunction::constant(lo, hi, q(1, 1))
    }

    #[test]
    fn published_values() {
        let op = ZooOperator::poisson_forward_std(q(2, 1));
        assert_eq!(op.apply(&ones(0, 10), 3), q(-1, 1));
        assert_eq!(op.apply(&ones(0, 10), -1), q(0, 1));
        let urn = ZooOperator::urn(ZooKind::UrnForward, 2, q(1, 1), q(1, 1));
        assert_eq!(urn.apply(&ones(0, 2), 0), q(1, 1));
        // the generic operator on the exact urn pmf agrees
        let p: DiscreteDensity<Rational> = build_density(&DensitySpec::polya_urn(2, 1.0, 1.0)).unwrap();
        let f = urn.reparam(&ones(0, 2));
        assert_eq!(stein_operator(&p, Direction::Forward, &f, 0), q(1, 1));
    }

    #[test]
    fn flat_gibbs_is_the_poisson_operator() {
        let gibbs = ZooOperator::gibbs(ZooKind::GibbsForward, vec![q(1, 1)], q(3, 2), None);
        let poisson = ZooOperator::poisson_forward_std(q(3, 2));
        let f0 = random_table::<Rational, _>(&mut item_rng(5, 0), 0, 20);
        for x in -1..=21 {
            assert_eq!(gibbs.apply(&f0, x), poisson.apply(&f0, x));
        }
    }

    #[test]
    fn every_operator_matches_the_generic_form() {
        for (kind, p) in reference_instances::<Rational>() {
            let op = ZooOperator::from_density(kind, &p).unwrap();
            let residual = zoo_equivalence_check(&op, &p, 8, 11).unwrap();
            assert!(residual.is_zero(), "{kind} on {}: {residual}", p.family().kind());
        }
    }

    #[test]
    fn operators_are_mean_zero() {
        for (kind, p) in reference_instances::<Rational>() {
            let op = ZooOperator::from_density(kind, &p).unwrap();
            let f0 = random_table::<Rational, _>(&mut item_rng(9, 1), p.lower(), p.upper());
            // Backward classes need f(b) p(b) = 0 at the window's upper end.
            let f0 = match kind.direction() {
                Direction::Backward => f0.map(|x, v| if x == p.upper() { q(0, 1) } else { v.clone() }),
                Direction::Forward => f0,
            };
            let mean = p.expect(|x| op.apply(&f0, x));
            assert!(mean.is_zero(), "{kind}");
        }
    }

    #[test]
    fn mismatched_family_is_rejected() {
        let p: DiscreteDensity<Rational> = build_density(&DensitySpec::binomial(4, 0.5)).unwrap();
        assert!(matches!(
            ZooOperator::from_density(ZooKind::UrnForward, &p),
            Err(Error::FamilyMismatch { .. })
        ));
        let other: DiscreteDensity<Rational> = build_density(&DensitySpec::poisson(2.0)).unwrap();
        let op = ZooOperator::poisson_backward(q(1, 1));
        assert!(zoo_equivalence_check(&op, &other, 4, 0).is_err());
        assert_eq!("urn_backward".parse::<ZooKind>().unwrap(), ZooKind::UrnBackward);
    }
}
