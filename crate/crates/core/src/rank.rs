//! Monte-Carlo sampler for the corank of uniform matrices over a prime field.

use rand::Rng;
use serde::Serialize;

use crate::density::DiscreteDensity;
use crate::error::{Error, Result};
use crate::random::item_rng;

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

/// Rank of a row-major `n × n` matrix over `F_p` by Gaussian elimination.
pub fn rank_mod_p(matrix: &mut [u64], n: usize, p: u64) -> usize {
    let inverse = |a: u64| {
        // Fermat: a^(p-2) mod p
        let (mut base, mut exp, mut acc) = (a % p, p - 2, 1u64);
        while exp > 0 {
            if exp & 1 == 1 {
                acc = acc * base % p;
            }
            base = base * base % p;
            exp >>= 1;
        }
        acc
    };
    let mut rank = 0;
    for col in 0..n {
        let Some(pivot) = (rank..n).find(|&r| matrix[r * n + col] != 0) else {
            continue;
        };
        for c in 0..n {
            matrix.swap(rank * n + c, pivot * n + c);
        }
        let inv = inverse(matrix[rank * n + col]);
        for r in rank + 1..n {
            let factor = matrix[r * n + col] * inv % p;
            if factor == 0 {
                continue;
            }
            for c in col..n {
                let sub = factor * matrix[rank * n + c] % p;
                matrix[r * n + c] = (matrix[r * n + c] + p - sub) % p;
            }
        }
        rank += 1;
    }
    rank
}

/// Histogram of `n - rank` over `[0, n]`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EmpiricalPmf {
    pub counts: Vec<u64>,
    pub total: u64,
}

impl EmpiricalPmf {
    pub fn pmf(&self) -> Vec<f64> {
        self.counts.iter().map(|&c| c as f64 / self.total as f64).collect()
    }

    pub fn mass(&self, x: i64) -> f64 {
        if x < 0 {
            return 0.0;
        }
        self.counts.get(x as usize).map_or(0.0, |&c| c as f64 / self.total as f64)
    }

    /// Total variation distance to a density.
    pub fn total_variation(&self, d: &DiscreteDensity<f64>) -> f64 {
        let hi = d.upper().max(self.counts.len() as i64 - 1);
        let lo = d.lower().min(0);
        0.5 * (lo..=hi).map(|x| (self.mass(x) - d.mass(x)).abs()).sum::<f64>()
    }
}

/// Draws `count` uniform `n × n` matrices over `F_θ` and tabulates
/// `n - rank`.
pub fn rank_sample(theta: u64, n: u32, count: u64, seed: u64) -> Result<EmpiricalPmf> {
    if !is_prime(theta) {
        return Err(Error::NotPrime(theta));
    }
    if count == 0 {
        return Err(Error::EmptySample);
    }
    if n == 0 {
        return Err(Error::InvalidParameter("matrix size must be positive".into()));
    }
    let n = n as usize;
    let mut rng = item_rng(seed, 0);
    let mut counts = vec![0u64; n + 1];
    let mut m = vec![0u64; n * n];
    for _ in 0..count {
        for v in m.iter_mut() {
            *v = rng.random_range(0..theta);
        }
        counts[n - rank_mod_p(&mut m, n, theta)] += 1;
    }
    Ok(EmpiricalPmf { counts, total: count })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::density::build_density;
    use crate::spec::DensitySpec;

    #[test]
    fn rank_of_known_matrices() {
        let mut id = vec![1, 0, 0, 0, 1, 0, 0, 0, 1];
        assert_eq!(rank_mod_p(&mut id, 3, 2), 3);
        // rows 1 + 2 = row 3 over F_2
        let mut dep = vec![1, 1, 0, 0, 1, 1, 1, 0, 1];
        assert_eq!(rank_mod_p(&mut dep, 3, 2), 2);
        let mut over3 = vec![1, 2, 2, 1];
        assert_eq!(rank_mod_p(&mut over3, 2, 3), 1);
        let mut zero = vec![0; 4];
        assert_eq!(rank_mod_p(&mut zero, 2, 5), 0);
    }

    /// Enumerates every `n × n` matrix over `F_θ` and counts coranks.
    fn enumerate(theta: u64, n: usize) -> Vec<u64> {
        let cells = n * n;
        let total = theta.pow(cells as u32);
        let mut counts = vec![0u64; n + 1];
        for code in 0..total {
            let mut c = code;
            let mut m: Vec<u64> = (0..cells)
                .map(|_| {
                    let d = c % theta;
                    c /= theta;
                    d
                })
                .collect();
            counts[n - rank_mod_p(&mut m, n, theta)] += 1;
        }
        counts
    }

    #[test]
    fn exact_law_matches_enumeration() {
        for (theta, n) in [(2u64, 1usize), (2, 2), (2, 3), (3, 2)] {
            let counts = enumerate(theta, n);
            let total: u64 = counts.iter().sum();
            let d: DiscreteDensity<crate::scalar::Rational> =
                build_density(&DensitySpec::rank_finite(theta, n as u32)).unwrap();
            for (k, c) in counts.iter().enumerate() {
                let expected = crate::scalar::Rational::new((*c).into(), total.into());
                assert_eq!(d.mass(k as i64), expected, "theta {theta} n {n} k {k}");
            }
        }
    }

    #[test]
    fn sampler_preconditions_and_single_draw() {
        assert!(matches!(rank_sample(4, 2, 10, 0), Err(Error::NotPrime(4))));
        assert!(matches!(rank_sample(2, 2, 0, 0), Err(Error::EmptySample)));
        let one = rank_sample(3, 3, 1, 9).unwrap();
        assert_eq!(one.counts.iter().filter(|&&c| c > 0).count(), 1);
        let a = rank_sample(2, 3, 100, 4).unwrap();
        assert_eq!(a, rank_sample(2, 3, 100, 4).unwrap());
    }

    #[test]
    fn sampler_converges() {
        let emp = rank_sample(2, 1, 20_000, 1).unwrap();
        assert!((emp.mass(0) - 0.5).abs() < 0.02);
        let exact: DiscreteDensity<f64> = build_density(&DensitySpec::rank_finite(2, 2)).unwrap();
        let emp = rank_sample(2, 2, 100_000, 2).unwrap();
        assert!(emp.total_variation(&exact) <= 0.02);
    }
}
