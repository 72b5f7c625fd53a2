//! Probability metrics, Fisher-information type functionals and the κ
//! constants of the local Pinsker inequalities.

use std::f64::consts::E;
use std::fmt;

use serde::{Serialize, Serializer};

use crate::density::{build_density, moments, DiscreteDensity, Family};
use crate::error::{Error, Result};
use crate::scalar::{half, int, Scalar};
use crate::spec::{DensitySpec, Number, TruncationPolicy};
use crate::stein::{
    check_assumption_a, max, scaled_score, solve_stein, Direction, SteinSolution, TestFunction,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum MetricKind {
    TotalVariation,
    Kolmogorov,
    KullbackLeibler,
    JGen,
    KGen,
    KScaled,
    JPoisson,
    IFunctional,
}

impl MetricKind {
    pub const ALL: [MetricKind; 8] = [
        MetricKind::TotalVariation,
        MetricKind::Kolmogorov,
        MetricKind::KullbackLeibler,
        MetricKind::JGen,
        MetricKind::KGen,
        MetricKind::KScaled,
        MetricKind::JPoisson,
        MetricKind::IFunctional,
    ];

    pub fn name(self) -> &'static str {
        match self {
            MetricKind::TotalVariation => "total_variation",
            MetricKind::Kolmogorov => "kolmogorov",
            MetricKind::KullbackLeibler => "kullback_leibler",
            MetricKind::JGen => "j_gen",
            MetricKind::KGen => "k_gen",
            MetricKind::KScaled => "k_scaled",
            MetricKind::JPoisson => "j_poisson",
            MetricKind::IFunctional => "i_functional",
        }
    }
}

impl fmt::Display for MetricKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for MetricKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = match s {
            "tv" => "total_variation",
            "kl" => "kullback_leibler",
            other => other,
        };
        MetricKind::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown metric `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum InfiniteReason {
    /// A support inclusion fails, so a ratio is undefined on a set of
    /// positive mass.
    Support,
    Divergent,
}

impl fmt::Display for InfiniteReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InfiniteReason::Support => f.write_str("support"),
            InfiniteReason::Divergent => f.write_str("divergent"),
        }
    }
}

/// An extended non-negative value: finite, or `+∞` with a reason.
#[derive(Debug, Clone, PartialEq)]
pub enum Ext<S> {
    Finite(S),
    Infinite(InfiniteReason),
}

impl<S: Scalar> Ext<S> {
    pub fn finite(&self) -> Option<&S> {
        match self {
            Ext::Finite(v) => Some(v),
            Ext::Infinite(_) => None,
        }
    }

    pub fn is_finite(&self) -> bool {
        matches!(self, Ext::Finite(_))
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            Ext::Finite(v) => v.to_f64(),
            Ext::Infinite(_) => f64::INFINITY,
        }
    }

    pub fn reason(&self) -> Option<InfiniteReason> {
        match self {
            Ext::Finite(_) => None,
            Ext::Infinite(r) => Some(*r),
        }
    }
}

/// Serialized as a number, or as `{"value": "inf", "reason": ...}`.
impl<S: Scalar> Serialize for Ext<S> {
    fn serialize<Ser: Serializer>(&self, serializer: Ser) -> std::result::Result<Ser::Ok, Ser::Error> {
        #[derive(Serialize)]
        struct Tagged {
            value: &'static str,
            reason: InfiniteReason,
        }
        match self {
            Ext::Finite(v) => serializer.serialize_f64(v.to_f64()),
            Ext::Infinite(reason) => Tagged { value: "inf", reason: *reason }.serialize(serializer),
        }
    }
}

fn union_range<S: Scalar>(p: &DiscreteDensity<S>, q: &DiscreteDensity<S>) -> std::ops::RangeInclusive<i64> {
    p.lower().min(q.lower())..=p.upper().max(q.upper())
}

pub fn total_variation<S: Scalar>(p: &DiscreteDensity<S>, q: &DiscreteDensity<S>) -> S {
    let sum = union_range(p, q).fold(S::zero(), |acc, x| acc + (p.mass(x) - q.mass(x)).abs());
    sum * half::<S>()
}

pub fn kolmogorov<S: Scalar>(p: &DiscreteDensity<S>, q: &DiscreteDensity<S>) -> S {
    let mut diff = S::zero();
    let mut worst = S::zero();
    for x in union_range(p, q) {
        diff = diff + p.mass(x) - q.mass(x);
        worst = max(worst, diff.abs());
    }
    worst
}

/// `Σ q log(q/p)` in nats; `+∞` when `q` charges a point outside `S_p`.
pub fn kl_divergence<S: Scalar>(q: &DiscreteDensity<S>, p: &DiscreteDensity<S>) -> Ext<f64> {
    let mut sum = 0.0;
    for (x, qx) in q.iter() {
        let Some(px) = p.mass_ref(x) else {
            return Ext::Infinite(InfiniteReason::Support);
        };
        sum += qx.to_f64() * (qx.clone() / px).to_f64().ln();
    }
    // Gibbs' inequality; rounding can leave a tiny negative sum.
    Ext::Finite(sum.max(0.0))
}

fn require_inclusion<S: Scalar>(p: &DiscreteDensity<S>, q: &DiscreteDensity<S>) -> Result<()> {
    if q.support().is_subset_of(&p.support()) {
        Ok(())
    } else {
        Err(Error::SupportViolation { p: p.support().to_string(), q: q.support().to_string() })
    }
}

/// `E_q[(q(Y-1)/q(Y) - p(Y-1)/p(Y))²]`, infinite when `S_q ⊊ S_p`.
pub fn j_gen<S: Scalar>(p: &DiscreteDensity<S>, q: &DiscreteDensity<S>) -> Result<Ext<S>> {
    require_inclusion(p, q)?;
    if q.support() != p.support() {
        return Ok(Ext::Infinite(InfiniteReason::Support));
    }
    Ok(Ext::Finite(q.expect(|y| {
        let d = q.back_ratio(y) - p.back_ratio(y);
        d.clone() * d
    })))
}

/// `E_q[r_sca(p, q)(Y)²]`.
pub fn k_gen<S: Scalar>(p: &DiscreteDensity<S>, q: &DiscreteDensity<S>) -> Result<S> {
    let r = scaled_score(p, q)?;
    Ok(q.expect(|y| {
        let v = r.values.get(y);
        v.clone() * v
    }))
}

/// A Poisson(λ) density whose window covers the support of `q`.
///
/// For a finite `q` the window reaches one point past `S_q`, so the forward
/// ratios of `p` are exact wherever `q` needs them. A truncated `q` shares
/// its window end when that suffices for the tail mass, and both ratios
/// then vanish there together.
pub fn poisson_covering<S: Scalar>(
    lambda: &S,
    q: &DiscreteDensity<S>,
    tail_mass: f64,
) -> Result<DiscreteDensity<S>> {
    let l = lambda.to_rational();
    let spec = DensitySpec::poisson(Number::Text(format!("{}/{}", l.numer(), l.denom())));
    let policy = TruncationPolicy::with_tail_mass(tail_mass);
    let p = build_density::<S>(&spec.clone().with_truncation(policy.clone()))?;
    let target = if q.upper_is_truncated() { q.upper() } else { q.upper() + 1 };
    // When p needs a longer window than a truncated q, the two disagree only
    // at q's last point, which carries at most q(b) of mass.
    if p.upper() >= target {
        return Ok(p);
    }
    build_density(&spec.with_truncation(policy.with_window(0, target)))
}

/// `λ K_gen(Po(λ), q)`.
pub fn k_scaled<S: Scalar>(lambda: &S, q: &DiscreteDensity<S>, tail_mass: f64) -> Result<S> {
    let p = poisson_covering(lambda, q, tail_mass)?;
    Ok(lambda.clone() * k_gen(&p, q)?)
}

/// `E_q[(1 - q(Y-1)/q(Y))²]`.
pub fn i_functional<S: Scalar>(q: &DiscreteDensity<S>) -> S {
    q.expect(|y| {
        let d = S::one() - q.back_ratio(y);
        d.clone() * d
    })
}

/// `σ²/λ² - 2/λ + I(q)`, which equals `J_gen(Po(λ), q)` when `q` has mean
/// `λ` and no boundary mass.
pub fn poisson_decomposition<S: Scalar>(lambda: &S, q: &DiscreteDensity<S>) -> S {
    let (_, var) = moments(q);
    var / (lambda.clone() * lambda) - int::<S>(2) / lambda + i_functional(q)
}

/// `h = (1/2)(1[p ≤ q] - 1[p ≥ q])` on the union of the windows, so that
/// `E_q h - E_p h = d_TV(p, q)`.
pub fn tv_test_function<S: Scalar>(p: &DiscreteDensity<S>, q: &DiscreteDensity<S>) -> TestFunction<S> {
    let r = union_range(p, q);
    TestFunction::from_fn(*r.start(), *r.end(), |x| {
        let (px, qx) = (p.mass(x), q.mass(x));
        if px < qx {
            half()
        } else if px > qx {
            -half::<S>()
        } else {
            S::zero()
        }
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum KappaVia {
    ExactSupOverH,
    UniformSupNorm,
    EricksonPoisson,
}

#[derive(Debug, Clone, Serialize)]
pub struct KappaResult<S: Scalar> {
    pub direction: Direction,
    pub via: KappaVia,
    /// `κ²`, exact on the rational backend.
    #[serde(serialize_with = "as_f64")]
    pub squared: S,
    pub value: f64,
    /// `sup_x |f(x-1)|` (backward) or `sup_x |f(x+1) p(x+1)/p(x)|`
    /// (forward), an upper bound on `κ`.
    #[serde(serialize_with = "as_f64")]
    pub uniform: S,
    pub witness_l: String,
}

fn as_f64<S: Scalar, Ser: Serializer>(v: &S, s: Ser) -> std::result::Result<Ser::Ok, Ser::Error> {
    s.serialize_f64(v.to_f64())
}

/// The weighted value entering `κ` at `y`: `f(y-1)` or `f(y+1) p(y+1)/p(y)`.
fn kappa_term<S: Scalar>(p: &DiscreteDensity<S>, sol: &SteinSolution<S>, y: i64) -> S {
    match sol.direction {
        Direction::Backward => sol.get(y - 1),
        Direction::Forward => sol.get(y + 1) * &p.ratio(y),
    }
}

fn kappa_for<S: Scalar>(
    p: &DiscreteDensity<S>,
    q: &DiscreteDensity<S>,
    sol: &SteinSolution<S>,
) -> (S, S) {
    let squared = q.expect(|y| {
        let t = kappa_term(p, sol, y);
        t.clone() * t
    });
    let uniform = p.points().map(|x| kappa_term(p, sol, x).abs()).fold(S::zero(), max);
    (squared, uniform)
}

/// `κ` for the total-variation class: the η-solution for the test function
/// of [`tv_test_function`], weighted under `q`.
pub fn kappa_tv<S: Scalar>(
    p: &DiscreteDensity<S>,
    q: &DiscreteDensity<S>,
    dir: Direction,
) -> Result<KappaResult<S>> {
    let h = tv_test_function(p, q);
    let sol = solve_stein(p, dir, &h)?;
    check_assumption_a(p, q, &sol)?;
    let (squared, uniform) = kappa_for(p, q, &sol);
    Ok(KappaResult {
        direction: dir,
        via: KappaVia::ExactSupOverH,
        value: squared.to_f64().sqrt(),
        squared,
        uniform,
        witness_l: "h = (1[p<=q] - 1[p>=q])/2".into(),
    })
}

/// `κ` for the Kolmogorov class `{1_(-inf, z]}`: the sup over `z` in the
/// window of `p`.
pub fn kappa_kolmogorov<S: Scalar>(
    p: &DiscreteDensity<S>,
    q: &DiscreteDensity<S>,
    dir: Direction,
) -> Result<KappaResult<S>> {
    let mut best: Option<(S, S, i64)> = None;
    for z in p.points() {
        let l = TestFunction::half_line(p.lower(), p.upper(), z);
        let sol = solve_stein(p, dir, &l)?;
        check_assumption_a(p, q, &sol)?;
        let (squared, uniform) = kappa_for(p, q, &sol);
        best = match best {
            Some((s, u, w)) if s >= squared => Some((s, max(u, uniform), w)),
            Some((_, u, _)) => Some((squared, max(u, uniform), z)),
            None => Some((squared, uniform, z)),
        };
    }
    let (squared, uniform, z) = best.expect("windows are nonempty");
    Ok(KappaResult {
        direction: dir,
        via: KappaVia::ExactSupOverH,
        value: squared.to_f64().sqrt(),
        squared,
        uniform,
        witness_l: format!("1_(-inf, {z}]"),
    })
}

/// `1 - sqrt(2/(e λ))`, the solution bound factor for Poisson
/// targets. Negative for `λ < 2/e`.
pub fn erickson_constant(lambda: f64) -> f64 {
    1.0 - (2.0 / (E * lambda)).sqrt()
}

/// `min(1, sqrt(2/(e λ)))`, the factor in the scaled-information constant.
pub fn erickson_min_constant(lambda: f64) -> f64 {
    (2.0 / (E * lambda)).sqrt().min(1.0)
}

/// `κ` bound for a Poisson target from the Erickson factor: the factor
/// times `sup l - inf l`, which is 1 for the total-variation test function.
pub fn kappa_erickson<S: Scalar>(lambda: f64, l: &TestFunction<S>) -> KappaResult<f64> {
    let value = erickson_constant(lambda).max(0.0) * l.range().to_f64();
    KappaResult {
        direction: Direction::Backward,
        via: KappaVia::EricksonPoisson,
        squared: value * value,
        value,
        uniform: value,
        witness_l: "sup l - inf l".into(),
    }
}

/// `sqrt(λ) min(1, sqrt(2/(e λ)))`, the constant multiplying
/// `sqrt(K(Po(λ), q))` in the scaled Fisher information bound. Equals
/// `sqrt(2/e)` for `λ ≥ 2/e` and `sqrt(λ)` below.
pub fn poisson_scaled_constant(lambda: f64) -> f64 {
    lambda.sqrt() * erickson_min_constant(lambda)
}

/// A finite-or-infinite distance value tagged with what produced it.
#[derive(Debug, Clone, Serialize)]
pub struct MetricValue {
    pub metric: MetricKind,
    pub value: Ext<f64>,
}

/// Evaluates `metric` for the pair, with `p` as the reference density.
/// `j_poisson` and `k_scaled` compare `q` against a Poisson law with the
/// mean of `p`, which must itself be Poisson.
pub fn evaluate_metric<S: Scalar>(
    metric: MetricKind,
    p: &DiscreteDensity<S>,
    q: &DiscreteDensity<S>,
) -> Result<Ext<f64>> {
    let fin = |v: S| Ext::Finite(v.to_f64());
    let poisson_lambda = || match p.family() {
        Family::Poisson { lambda } => Ok(lambda.clone()),
        other => Err(Error::InvalidParameter(format!(
            "{metric} needs a poisson reference density, got {}",
            other.kind()
        ))),
    };
    Ok(match metric {
        MetricKind::TotalVariation => fin(total_variation(p, q)),
        MetricKind::Kolmogorov => fin(kolmogorov(p, q)),
        MetricKind::KullbackLeibler => kl_divergence(q, p),
        MetricKind::JGen => match j_gen(p, q)? {
            Ext::Finite(v) => fin(v),
            Ext::Infinite(r) => Ext::Infinite(r),
        },
        MetricKind::KGen => fin(k_gen(p, q)?),
        MetricKind::KScaled => fin(k_scaled(&poisson_lambda()?, q, p.tail_mass())?),
        MetricKind::JPoisson => fin(poisson_decomposition(&poisson_lambda()?, q)),
        MetricKind::IFunctional => fin(i_functional(q)),
    })
}
