//! Discrete densities on integer intervals.
//!
//! A [`DiscreteDensity`] is a pmf tabulated over a finite window together with
//! its forward and backward mass ratios `p(x+1)/p(x)` and `p(x-1)/p(x)`. The
//! ratios come from each family's closed form, so they are exact on the
//! rational backend even when the pmf itself needs a transcendental
//! normalizer. Infinite supports are cut to a window whose dropped mass is
//! bounded by the [`TruncationPolicy`]; the retained masses are then
//! renormalized, and every computation treats the window as the support.
//!
//! Conventions: `1/p(x)` is zero off the support, so `ratio` and
//! `back_ratio` vanish outside it.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::scalar::{checked_positive, convert, int, Backend, Scalar};
use crate::spec::{DensitySpec, FamilySpec, Number, TruncationPolicy};
use crate::support::{Bound, Support};

/// Family name, as used in specs and reports.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FamilyKind {
    Poisson,
    Binomial,
    PolyaUrn,
    Ord,
    Gibbs,
    RankLimit,
    RankFinite,
    Explicit,
}

impl std::fmt::Display for FamilyKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let name = match self {
            FamilyKind::Poisson => "poisson",
            FamilyKind::Binomial => "binomial",
            FamilyKind::PolyaUrn => "polya_urn",
            FamilyKind::Ord => "ord",
            FamilyKind::Gibbs => "gibbs",
            FamilyKind::RankLimit => "rank_limit",
            FamilyKind::RankFinite => "rank_finite",
            FamilyKind::Explicit => "explicit",
        };
        f.write_str(name)
    }
}

/// Resolved family parameters.
#[derive(Debug, Clone, PartialEq)]
pub enum Family<S> {
    Poisson { lambda: S },
    Binomial { n: u32, p: S },
    PolyaUrn { n: u32, alpha: S, beta: S },
    Ord { lower: i64, s: Vec<S>, tau: Vec<S> },
    /// `exp_v[x] = exp(V(x))`; `n = None` means support on all naturals.
    Gibbs { exp_v: Vec<S>, omega: S, n: Option<i64> },
    RankLimit { theta: u64 },
    RankFinite { theta: u64, n: u32 },
    Explicit,
}

impl<S: Scalar> Family<S> {
    pub fn kind(&self) -> FamilyKind {
        match self {
            Family::Poisson { .. } => FamilyKind::Poisson,
            Family::Binomial { .. } => FamilyKind::Binomial,
            Family::PolyaUrn { .. } => FamilyKind::PolyaUrn,
            Family::Ord { .. } => FamilyKind::Ord,
            Family::Gibbs { .. } => FamilyKind::Gibbs,
            Family::RankLimit { .. } => FamilyKind::RankLimit,
            Family::RankFinite { .. } => FamilyKind::RankFinite,
            Family::Explicit => FamilyKind::Explicit,
        }
    }

    fn to_backend<B: Scalar>(&self) -> Family<B> {
        let v = |xs: &[S]| xs.iter().map(convert).collect::<Vec<B>>();
        match self {
            Family::Poisson { lambda } => Family::Poisson { lambda: convert(lambda) },
            Family::Binomial { n, p } => Family::Binomial { n: *n, p: convert(p) },
            Family::PolyaUrn { n, alpha, beta } => {
                Family::PolyaUrn { n: *n, alpha: convert(alpha), beta: convert(beta) }
            }
            Family::Ord { lower, s, tau } => Family::Ord { lower: *lower, s: v(s), tau: v(tau) },
            Family::Gibbs { exp_v, omega, n } => {
                Family::Gibbs { exp_v: v(exp_v), omega: convert(omega), n: *n }
            }
            Family::RankLimit { theta } => Family::RankLimit { theta: *theta },
            Family::RankFinite { theta, n } => Family::RankFinite { theta: *theta, n: *n },
            Family::Explicit => Family::Explicit,
        }
    }
}

/// `exp(V(x))` for a Gibbs table, extended by its last value past the end.
pub(crate) fn gibbs_weight<S: Scalar>(exp_v: &[S], x: i64) -> S {
    if x < 0 {
        return S::zero();
    }
    let i = (x as usize).min(exp_v.len() - 1);
    exp_v[i].clone()
}

pub(crate) fn theta_pow<S: Scalar>(theta: u64, exp: i64) -> S {
    let t = int::<S>(theta as i64);
    if exp >= 0 {
        t.powi(exp as u32)
    } else {
        S::one() / t.powi((-exp) as u32)
    }
}

/// `(theta^k - 1)^2`, the `b` coefficient of the matrix-rank recurrences.
pub(crate) fn rank_b<S: Scalar>(theta: u64, k: i64) -> S {
    if k < 0 {
        return S::zero();
    }
    let d = theta_pow::<S>(theta, k) - S::one();
    d.clone() * d
}

#[derive(Debug, Clone)]
pub struct DiscreteDensity<S> {
    family: Family<S>,
    nominal: Support,
    lower: i64,
    masses: Vec<S>,
    ratios: Vec<S>,
    back_ratios: Vec<S>,
    dropped_mass: f64,
    tail_mass: f64,
    renormalized: bool,
}

struct Law<S> {
    family: Family<S>,
    lower: i64,
    upper: Bound,
    ratio: Box<dyn Fn(i64) -> S>,
    /// Ratios are nonincreasing from this point on (infinite supports only).
    monotone_from: i64,
    /// `ln Σ w(x)` for the weights `w(lower) = 1, w(x+1) = w(x) ratio(x)`.
    log_normalizer: Option<f64>,
}

const MAX_WINDOW: i64 = 1_000_000;

impl<S: Scalar> DiscreteDensity<S> {
    /// Density with explicitly tabulated masses on `[lower, lower + len - 1]`.
    pub fn from_masses(lower: i64, masses: Vec<S>) -> Result<Self> {
        let support = Support::finite(lower, lower + masses.len() as i64 - 1).map_err(|_| {
            Error::DegenerateSupport {
                lower: lower.to_string(),
                upper: (lower + masses.len() as i64 - 1).to_string(),
            }
        })?;
        if let Some((i, m)) = masses.iter().enumerate().find(|(_, m)| **m <= S::zero()) {
            return Err(Error::InvalidParameter(format!(
                "mass at {} must be positive inside the support, got {}",
                lower + i as i64,
                m.to_f64()
            )));
        }
        let total = masses.iter().fold(S::zero(), |acc, m| acc + m);
        let ok = match S::BACKEND {
            Backend::Rational => total.is_one(),
            Backend::Float => (total.to_f64() - 1.0).abs() <= 1e-12 * masses.len() as f64,
        };
        if !ok {
            return Err(Error::InvalidParameter(format!(
                "pmf must sum to 1, sums to {}",
                total.to_f64()
            )));
        }
        let ratios = (0..masses.len())
            .map(|i| match masses.get(i + 1) {
                Some(next) => next.clone() / &masses[i],
                None => S::zero(),
            })
            .collect();
        Ok(Self::assemble(Family::Explicit, support, lower, masses, ratios, 0.0, 0.0, true))
    }

    #[allow(clippy::too_many_arguments)]
    fn assemble(
        family: Family<S>,
        nominal: Support,
        lower: i64,
        masses: Vec<S>,
        ratios: Vec<S>,
        dropped_mass: f64,
        tail_mass: f64,
        renormalized: bool,
    ) -> Self {
        let back_ratios = (0..ratios.len())
            .map(|i| if i == 0 { S::zero() } else { S::one() / &ratios[i - 1] })
            .collect();
        DiscreteDensity {
            family,
            nominal,
            lower,
            masses,
            ratios,
            back_ratios,
            dropped_mass,
            tail_mass,
            renormalized,
        }
    }

    pub fn family(&self) -> &Family<S> {
        &self.family
    }

    /// Support of the underlying law before truncation.
    pub fn nominal_support(&self) -> Support {
        self.nominal
    }

    /// The materialized window, which is the support used in computations.
    pub fn support(&self) -> Support {
        Support::finite(self.lower, self.upper()).expect("windows have two or more points")
    }

    pub fn lower(&self) -> i64 {
        self.lower
    }

    pub fn upper(&self) -> i64 {
        self.lower + self.masses.len() as i64 - 1
    }

    pub fn len(&self) -> usize {
        self.masses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.masses.is_empty()
    }

    pub fn points(&self) -> impl Iterator<Item = i64> + '_ {
        self.lower..=self.upper()
    }

    pub fn iter(&self) -> impl Iterator<Item = (i64, &S)> + '_ {
        self.masses.iter().enumerate().map(move |(i, m)| (self.lower + i as i64, m))
    }

    pub fn masses(&self) -> &[S] {
        &self.masses
    }

    fn index(&self, x: i64) -> Option<usize> {
        if x < self.lower {
            return None;
        }
        let i = (x - self.lower) as usize;
        (i < self.masses.len()).then_some(i)
    }

    pub fn contains(&self, x: i64) -> bool {
        self.index(x).is_some()
    }

    pub fn mass(&self, x: i64) -> S {
        self.index(x).map_or_else(S::zero, |i| self.masses[i].clone())
    }

    pub fn mass_ref(&self, x: i64) -> Option<&S> {
        self.index(x).map(|i| &self.masses[i])
    }

    /// `1/p(x)`, zero off the support.
    pub fn reciprocal(&self, x: i64) -> S {
        self.index(x).map_or_else(S::zero, |i| S::one() / &self.masses[i])
    }

    /// `p(x+1)/p(x)`, zero off the support.
    pub fn ratio(&self, x: i64) -> S {
        self.index(x).map_or_else(S::zero, |i| self.ratios[i].clone())
    }

    /// `p(x-1)/p(x)`, zero off the support.
    pub fn back_ratio(&self, x: i64) -> S {
        self.index(x).map_or_else(S::zero, |i| self.back_ratios[i].clone())
    }

    /// `Σ_x p(x) g(x)` over the support.
    pub fn expect<F>(&self, mut g: F) -> S
    where
        F: FnMut(i64) -> S,
    {
        self.iter().fold(S::zero(), |acc, (x, m)| acc + g(x) * m)
    }

    pub fn cdf(&self, z: i64) -> S {
        self.iter().take_while(|(x, _)| *x <= z).fold(S::zero(), |acc, (_, m)| acc + m)
    }

    /// Upper bound on the nominal mass outside the window.
    pub fn dropped_mass(&self) -> f64 {
        self.dropped_mass
    }

    /// The tail mass the density was materialized with.
    pub fn tail_mass(&self) -> f64 {
        self.tail_mass
    }

    pub fn is_renormalized(&self) -> bool {
        self.renormalized
    }

    /// Whether the window's upper end is an artefact of truncation rather
    /// than the end of the nominal support.
    pub fn upper_is_truncated(&self) -> bool {
        self.nominal.upper() != Bound::Finite(self.upper())
    }

    /// Bound on how far a total-variation type quantity computed on the
    /// window can be from the untruncated law.
    pub fn truncation_error(&self) -> f64 {
        2.0 * self.dropped_mass
    }

    pub fn backend(&self) -> Backend {
        S::BACKEND
    }

    pub fn to_backend<B: Scalar>(&self) -> DiscreteDensity<B> {
        let v = |xs: &[S]| xs.iter().map(convert).collect::<Vec<B>>();
        DiscreteDensity {
            family: self.family.to_backend(),
            nominal: self.nominal,
            lower: self.lower,
            masses: v(&self.masses),
            ratios: v(&self.ratios),
            back_ratios: v(&self.back_ratios),
            dropped_mass: self.dropped_mass,
            tail_mass: self.tail_mass,
            renormalized: self.renormalized,
        }
    }

    /// Mass of `S_p`-points under `self`: `P(Y ∈ [lo, hi])`.
    pub fn mass_in(&self, lo: i64, hi: i64) -> S {
        self.iter().filter(|(x, _)| *x >= lo && *x <= hi).fold(S::zero(), |acc, (_, m)| acc + m)
    }
}

/// Mean and variance over the materialized window.
pub fn moments<S: Scalar>(d: &DiscreteDensity<S>) -> (S, S) {
    let mean = d.expect(int);
    let second = d.expect(|x| int::<S>(x) * int::<S>(x));
    let var = second - mean.clone() * &mean;
    (mean, var)
}

pub fn build_density<S: Scalar>(spec: &DensitySpec) -> Result<DiscreteDensity<S>> {
    let law = match &spec.family {
        FamilySpec::Explicit { support, pmf } => {
            let [lo, hi] = *support;
            if hi - lo + 1 != pmf.len() as i64 {
                return Err(Error::InvalidParameter(format!(
                    "support [{lo}, {hi}] has {} points but pmf has {} entries",
                    hi - lo + 1,
                    pmf.len()
                )));
            }
            let masses = pmf.iter().map(Number::resolve::<S>).collect::<Result<Vec<_>>>()?;
            return DiscreteDensity::from_masses(lo, masses);
        }
        FamilySpec::Poisson { params } => {
            let lambda: S = params.lambda.resolve()?;
            checked_positive("lambda", &lambda)?;
            let l = lambda.clone();
            Law {
                family: Family::Poisson { lambda: lambda.clone() },
                lower: 0,
                upper: Bound::PosInf,
                ratio: Box::new(move |x| l.clone() / int::<S>(x + 1)),
                monotone_from: 0,
                log_normalizer: Some(lambda.to_f64()),
            }
        }
        FamilySpec::Binomial { params } => {
            let p: S = params.p.resolve()?;
            if !(p > S::zero() && p < S::one()) {
                return Err(Error::InvalidParameter(format!(
                    "binomial p must lie in (0, 1), got {}",
                    p.to_f64()
                )));
            }
            let n = params.n as i64;
            positive_count("binomial n", n)?;
            let odds = p.clone() / (S::one() - &p);
            Law {
                family: Family::Binomial { n: params.n, p },
                lower: 0,
                upper: Bound::Finite(n),
                ratio: Box::new(move |x| int::<S>(n - x) / int::<S>(x + 1) * &odds),
                monotone_from: 0,
                log_normalizer: None,
            }
        }
        FamilySpec::PolyaUrn { params } => {
            let alpha: S = params.alpha.resolve()?;
            let beta: S = params.beta.resolve()?;
            if alpha < S::one() || beta < S::one() {
                return Err(Error::InvalidParameter(
                    "urn needs alpha >= 1 and beta >= 1".into(),
                ));
            }
            let n = params.n as i64;
            positive_count("urn n", n)?;
            let (a, b) = (alpha.clone(), beta.clone());
            Law {
                family: Family::PolyaUrn { n: params.n, alpha, beta },
                lower: 0,
                upper: Bound::Finite(n),
                ratio: Box::new(move |x| {
                    int::<S>(n - x) * (a.clone() + int::<S>(x))
                        / (int::<S>(x + 1) * (b.clone() + int::<S>(n - x - 1)))
                }),
                monotone_from: 0,
                log_normalizer: None,
            }
        }
        FamilySpec::Ord { params } => ord_law(params.lower, &params.s, &params.tau)?,
        FamilySpec::Gibbs { params } => {
            let omega: S = params.omega.resolve()?;
            checked_positive("omega", &omega)?;
            let exp_v: Vec<S> = match (&params.v, &params.exp_v) {
                (Some(v), None) => v
                    .iter()
                    .map(|x| {
                        let x: f64 = x.resolve()?;
                        S::from_f64(x.exp())
                    })
                    .collect::<Result<_>>()?,
                (None, Some(w)) => w.iter().map(Number::resolve::<S>).collect::<Result<_>>()?,
                _ => {
                    return Err(Error::InvalidParameter(
                        "gibbs needs exactly one of `v` and `exp_v`".into(),
                    ))
                }
            };
            if exp_v.is_empty() {
                return Err(Error::InvalidParameter("gibbs V table is empty".into()));
            }
            for w in &exp_v {
                checked_positive("exp(V)", w)?;
            }
            let upper = match params.n {
                Some(n) => {
                    positive_count("gibbs N", n)?;
                    if exp_v.len() as i64 != n + 1 {
                        return Err(Error::InvalidParameter(format!(
                            "gibbs V table must have N + 1 = {} entries, has {}",
                            n + 1,
                            exp_v.len()
                        )));
                    }
                    Bound::Finite(n)
                }
                None => Bound::PosInf,
            };
            let (w, om) = (exp_v.clone(), omega.clone());
            Law {
                monotone_from: exp_v.len() as i64 - 1,
                family: Family::Gibbs { exp_v, omega, n: params.n },
                lower: 0,
                upper,
                ratio: Box::new(move |x| {
                    gibbs_weight(&w, x + 1) / gibbs_weight(&w, x) * &om / int::<S>(x + 1)
                }),
                log_normalizer: None,
            }
        }
        FamilySpec::RankLimit { params } => {
            let theta = check_theta(params.theta)?;
            Law {
                family: Family::RankLimit { theta },
                lower: 0,
                upper: Bound::PosInf,
                ratio: Box::new(move |x| int::<S>(theta as i64) / rank_b::<S>(theta, x + 1)),
                monotone_from: 0,
                log_normalizer: None,
            }
        }
        FamilySpec::RankFinite { params } => {
            let theta = check_theta(params.theta)?;
            let n = params.n as i64;
            positive_count("rank n", n)?;
            Law {
                family: Family::RankFinite { theta, n: params.n },
                lower: 0,
                upper: Bound::Finite(n),
                ratio: Box::new(move |x| {
                    int::<S>(theta as i64) * (S::one() - theta_pow::<S>(theta, x - n))
                        / rank_b::<S>(theta, x + 1)
                }),
                monotone_from: 0,
                log_normalizer: None,
            }
        }
    };
    materialize(law, &spec.truncation)
}

fn positive_count(name: &str, n: i64) -> Result<()> {
    if n >= 1 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("{name} must be at least 1, got {n}")))
    }
}

fn check_theta(theta: u64) -> Result<u64> {
    if theta >= 2 {
        Ok(theta)
    } else {
        Err(Error::InvalidParameter(format!("theta must be an integer >= 2, got {theta}")))
    }
}

fn ord_law<S: Scalar>(lower: i64, s: &[Number], tau: &[Number]) -> Result<Law<S>> {
    let s: Vec<S> = s.iter().map(Number::resolve).collect::<Result<_>>()?;
    let tau: Vec<S> = tau.iter().map(Number::resolve).collect::<Result<_>>()?;
    if s.len() != tau.len() || s.len() < 2 {
        return Err(Error::InvalidParameter(
            "ord tables s and tau need equal lengths of at least 2".into(),
        ));
    }
    if !s[0].is_zero() {
        return Err(Error::InvalidParameter("ord requires s(a) = 0".into()));
    }
    let last = s.len() - 1;
    for i in 1..s.len() {
        if s[i] <= S::zero() {
            return Err(Error::InvalidParameter(format!(
                "ord requires s(x) > 0 for a < x <= b; fails at {}",
                lower + i as i64
            )));
        }
    }
    for i in 0..last {
        if s[i].clone() + &tau[i] <= S::zero() {
            return Err(Error::InvalidParameter(format!(
                "ord requires s(x) + tau(x) > 0 below the upper end; fails at {}",
                lower + i as i64
            )));
        }
    }
    if !(s[last].clone() + &tau[last]).is_zero() {
        return Err(Error::InvalidParameter(
            "ord with a finite upper end b requires s(b) + tau(b) = 0".into(),
        ));
    }
    let (ss, tt) = (s.clone(), tau.clone());
    Ok(Law {
        family: Family::Ord { lower, s, tau },
        lower,
        upper: Bound::Finite(lower + last as i64),
        ratio: Box::new(move |x| {
            let i = (x - lower) as usize;
            (ss[i].clone() + &tt[i]) / &ss[i + 1]
        }),
        monotone_from: lower,
        log_normalizer: None,
    })
}

fn log_sum_exp(xs: &[f64]) -> f64 {
    let m = xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    m + xs.iter().map(|x| (x - m).exp()).sum::<f64>().ln()
}

fn materialize<S: Scalar>(law: Law<S>, policy: &TruncationPolicy) -> Result<DiscreteDensity<S>> {
    let nominal = Support::new(Bound::Finite(law.lower), law.upper)?;
    let lo = law.lower;
    if let Some([wlo, whi]) = policy.window {
        if wlo != lo {
            return Err(Error::InvalidParameter(format!(
                "truncation window must start at the support's lower end {lo}, got {wlo}"
            )));
        }
        if whi <= wlo {
            return Err(Error::DegenerateSupport { lower: wlo.to_string(), upper: whi.to_string() });
        }
        if let Bound::Finite(b) = law.upper {
            if whi > b {
                return Err(Error::InvalidParameter(format!(
                    "truncation window [{wlo}, {whi}] exceeds the support {nominal}"
                )));
            }
        }
    }
    if policy.tail_mass < 0.0 || policy.tail_mass.is_nan() {
        return Err(Error::InvalidParameter("tail_mass must be non-negative".into()));
    }

    // log-weights relative to w(lo) = 1
    let mut log_w = vec![0.0f64];
    let ratio_f = |x: i64| (law.ratio)(x).to_f64();
    let push = |log_w: &mut Vec<f64>| {
        let x = lo + log_w.len() as i64 - 1;
        let next = log_w[log_w.len() - 1] + ratio_f(x).ln();
        log_w.push(next);
    };

    let (hi, dropped) = match law.upper {
        Bound::Finite(b) => {
            let hi = policy.window.map_or(b, |w| w[1]);
            while (log_w.len() as i64) < b - lo + 1 {
                push(&mut log_w);
            }
            let dropped = if hi < b {
                let kept = log_sum_exp(&log_w[..(hi - lo + 1) as usize]);
                let all = log_sum_exp(&log_w);
                1.0 - (kept - all).exp()
            } else {
                0.0
            };
            (hi, dropped)
        }
        _ => {
            let tail_bound = |log_w: &mut Vec<f64>, k: i64| -> f64 {
                // Needs w(k+1) and ratio(k+1) with monotone ratios beyond.
                while (log_w.len() as i64) < k - lo + 2 {
                    push(log_w);
                }
                let rho = ratio_f(k + 1);
                if k + 1 < law.monotone_from || !(rho < 1.0) {
                    return f64::INFINITY;
                }
                let kept = log_sum_exp(&log_w[..(k - lo + 1) as usize]);
                let next = log_w[(k - lo + 1) as usize];
                (next - kept).exp() / (1.0 - rho) * (1.0 + 1e-9)
            };
            match policy.window {
                Some([_, whi]) => (whi, tail_bound(&mut log_w, whi)),
                None => {
                    let mut k = lo + 1;
                    loop {
                        let bound = tail_bound(&mut log_w, k);
                        if bound <= policy.tail_mass {
                            break (k, bound);
                        }
                        if k - lo > MAX_WINDOW {
                            return Err(Error::TruncationUnreachable {
                                tail_mass: policy.tail_mass,
                                achieved: bound,
                            });
                        }
                        k += 1;
                    }
                }
            }
        }
    };
    if dropped > policy.tail_mass {
        return Err(Error::TruncationUnreachable { tail_mass: policy.tail_mass, achieved: dropped });
    }

    let len = (hi - lo + 1) as usize;
    let mut ratios: Vec<S> = (0..len as i64 - 1).map(|i| (law.ratio)(lo + i)).collect();
    ratios.push(S::zero());

    let masses: Vec<S> = match (S::BACKEND, policy.renormalize) {
        (Backend::Rational, true) => {
            let mut w = Vec::with_capacity(len);
            w.push(S::one());
            for r in &ratios[..len - 1] {
                let next = w[w.len() - 1].clone() * r;
                w.push(next);
            }
            let total = w.iter().fold(S::zero(), |acc, x| acc + x);
            w.into_iter().map(|x| x / &total).collect()
        }
        (Backend::Rational, false) => {
            return Err(Error::InvalidParameter(
                "raw (unnormalized) truncation is only available on the float backend".into(),
            ))
        }
        (Backend::Float, renormalize) => {
            let shift = if renormalize {
                log_sum_exp(&log_w[..len])
            } else {
                law.log_normalizer.ok_or_else(|| {
                    Error::InvalidParameter(format!(
                        "raw truncation needs a closed-form normalizer, which {} lacks",
                        law.family.kind()
                    ))
                })?
            };
            log_w[..len].iter().map(|lw| S::from_f64((lw - shift).exp())).collect::<Result<_>>()?
        }
    };
    Ok(DiscreteDensity::assemble(
        law.family,
        nominal,
        lo,
        masses,
        ratios,
        dropped,
        policy.tail_mass,
        policy.renormalize,
    ))
}
