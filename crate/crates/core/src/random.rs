//! Seeded generators for the randomized sweeps.
//!
//! Every sweep item draws from its own ChaCha stream, so results do not
//! depend on how the items are scheduled across threads.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::density::DiscreteDensity;
use crate::scalar::{convert, int, Rational, Scalar};
use crate::stein::{Direction, TestFunction};

/// Largest integer weight of a random pmf atom; with supports of at most 21
/// points the common denominator stays below 10^4.
pub const MAX_WEIGHT: i64 = 400;

pub fn item_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// A pmf on `[lower, lower + len - 1]` with integer weights in `1..=400`,
/// normalized exactly.
pub fn random_pmf<S: Scalar, R: Rng>(rng: &mut R, lower: i64, len: usize) -> DiscreteDensity<S> {
    assert!(len >= 2, "random pmfs need at least two atoms");
    let weights: Vec<i64> = (0..len).map(|_| rng.random_range(1..=MAX_WEIGHT)).collect();
    let total: i64 = weights.iter().sum();
    let masses = weights
        .iter()
        .map(|&w| convert::<Rational, S>(&Rational::new(w.into(), total.into())))
        .collect();
    DiscreteDensity::from_masses(lower, masses).expect("positive weights normalize to a pmf")
}

/// How the supports of a random pair relate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PairShape {
    /// Both on `[0, m]`.
    Shared,
    /// `S_q = [0, m_q] ⊆ S_p = [0, m_p]`.
    Nested,
    /// Independent `[0, m_p]` and `[0, m_q]`.
    Independent,
}

/// A random pair `(p, q)` with supports of at most `max_upper + 1` points.
pub fn random_pair<S: Scalar, R: Rng>(
    rng: &mut R,
    max_upper: i64,
    shape: PairShape,
) -> (DiscreteDensity<S>, DiscreteDensity<S>) {
    let m_p = rng.random_range(1..=max_upper);
    let m_q = match shape {
        PairShape::Shared => m_p,
        PairShape::Nested => rng.random_range(1..=m_p),
        PairShape::Independent => rng.random_range(1..=max_upper),
    };
    let p = random_pmf(rng, 0, m_p as usize + 1);
    let q = random_pmf(rng, 0, m_q as usize + 1);
    (p, q)
}

/// A table on `[lower, upper]` with entries `k/1000`, `k ∈ [-1000, 1000]`.
pub fn random_table<S: Scalar, R: Rng>(rng: &mut R, lower: i64, upper: i64) -> TestFunction<S> {
    let thousand = int::<S>(1000);
    TestFunction::from_fn(lower, upper, |_| int::<S>(rng.random_range(-1000..=1000)) / &thousand)
}

/// A random member of the η-test class of `p`: arbitrary on the support
/// except at the end that carries the boundary term.
pub fn random_class_member<S: Scalar, R: Rng>(
    rng: &mut R,
    p: &DiscreteDensity<S>,
    dir: Direction,
) -> TestFunction<S> {
    let f: TestFunction<S> = random_table(rng, p.lower(), p.upper());
    let pinned = match dir {
        Direction::Forward => p.lower(),
        Direction::Backward => p.upper(),
    };
    f.map(|x, v| if x == pinned { S::zero() } else { v.clone() })
}

/// `q = p (1 + ε g)` where `g` is a random table projected so that
/// `E_p g = E_p[X g] = 0` and `ε = 1 / (2 max|g|)`. The result has the
/// support, the total mass and the mean of `p`.
pub fn mean_preserving_perturbation<S: Scalar, R: Rng>(
    rng: &mut R,
    p: &DiscreteDensity<S>,
) -> DiscreteDensity<S> {
    loop {
        let g = random_table::<S, R>(rng, p.lower(), p.upper());
        // Solve for c0, c1 with E_p[(g - c0 - c1 x)] = E_p[x (g - c0 - c1 x)] = 0.
        let m0 = S::one();
        let m1 = p.expect(int);
        let m2 = p.expect(|x| int::<S>(x) * int::<S>(x));
        let e_g = p.expect(|x| g.get(x));
        let e_xg = p.expect(|x| int::<S>(x) * g.get(x));
        let det = m0.clone() * &m2 - m1.clone() * &m1;
        let c0 = (e_g.clone() * &m2 - e_xg.clone() * &m1) / &det;
        let c1 = (e_xg * &m0 - e_g * &m1) / &det;
        let h = g.map(|x, v| v.clone() - &c0 - c1.clone() * int::<S>(x));
        let sup = h.sup_abs();
        if sup.is_zero() {
            continue;
        }
        let eps = S::one() / (int::<S>(2) * sup);
        let masses: Vec<S> =
            p.iter().map(|(x, m)| m.clone() * (S::one() + eps.clone() * h.get(x))).collect();
        if let Ok(q) = DiscreteDensity::from_masses(p.lower(), masses) {
            return q;
        }
    }
}
