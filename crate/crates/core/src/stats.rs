//! Goodness-of-fit checks for samplers against an exactly enumerated support.

use std::collections::{HashMap, HashSet};
use std::hash::Hash;

use statrs::function::gamma::gamma_ur;
use thiserror::Error;

/// Per-cell p-value threshold used by the validation suites, before the
/// Bonferroni division by the number of cells.
pub const ACCEPT_P_VALUE: f64 = 0.001;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum StatsError {
    #[error("a sampled word is not in the support")]
    OutsideSupport,
    #[error("empty support")]
    EmptySupport,
    #[error("support lists a word twice")]
    DuplicateSupport,
    #[error("{total} samples for {support} words; need at least 5 per word")]
    TooFewSamples { total: u64, support: usize },
}

/// Occurrence counts of sampled words.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Histogram<K: Hash + Eq> {
    counts: HashMap<K, u64>,
    total: u64,
}

impl<K: Hash + Eq> Default for Histogram<K> {
    fn default() -> Self {
        Histogram {
            counts: HashMap::new(),
            total: 0,
        }
    }
}

impl<K: Hash + Eq> Histogram<K> {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, word: K) {
        *self.counts.entry(word).or_insert(0) += 1;
        self.total += 1;
    }

    pub fn merge(&mut self, other: Histogram<K>) {
        for (k, c) in other.counts {
            *self.counts.entry(k).or_insert(0) += c;
        }
        self.total += other.total;
    }

    pub fn count(&self, word: &K) -> u64 {
        self.counts.get(word).copied().unwrap_or(0)
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn distinct(&self) -> usize {
        self.counts.len()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&K, u64)> {
        self.counts.iter().map(|(k, &c)| (k, c))
    }
}

impl<K: Hash + Eq> FromIterator<K> for Histogram<K> {
    fn from_iter<I: IntoIterator<Item = K>>(iter: I) -> Self {
        let mut h = Histogram::new();
        for k in iter {
            h.add(k);
        }
        h
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ChiSquare {
    pub statistic: f64,
    pub degrees_of_freedom: usize,
    pub p_value: f64,
}

impl ChiSquare {
    /// Accepts uniformity at `ACCEPT_P_VALUE / cells`.
    pub fn accepts(&self, cells: usize) -> bool {
        self.p_value >= bonferroni(ACCEPT_P_VALUE, cells)
    }
}

pub fn bonferroni(alpha: f64, cells: usize) -> f64 {
    alpha / cells.max(1) as f64
}

fn check_support<K: Hash + Eq>(h: &Histogram<K>, support: &[K]) -> Result<(), StatsError> {
    if support.is_empty() {
        return Err(StatsError::EmptySupport);
    }
    let set: HashSet<&K> = support.iter().collect();
    if set.len() != support.len() {
        return Err(StatsError::DuplicateSupport);
    }
    if h.counts.keys().any(|k| !set.contains(k)) {
        return Err(StatsError::OutsideSupport);
    }
    Ok(())
}

/// Upper tail of the chi-square distribution.
pub fn chi_square_upper_tail(statistic: f64, degrees_of_freedom: usize) -> f64 {
    if degrees_of_freedom == 0 || statistic <= 0.0 {
        return 1.0;
    }
    gamma_ur(degrees_of_freedom as f64 / 2.0, statistic / 2.0)
}

/// Pearson's test of `h` against the uniform distribution on `support`.
pub fn chi_square_uniform<K: Hash + Eq>(
    h: &Histogram<K>,
    support: &[K],
) -> Result<ChiSquare, StatsError> {
    check_support(h, support)?;
    if h.total < 5 * support.len() as u64 {
        return Err(StatsError::TooFewSamples {
            total: h.total,
            support: support.len(),
        });
    }
    let expected = h.total as f64 / support.len() as f64;
    let statistic: f64 = support
        .iter()
        .map(|w| {
            let d = h.count(w) as f64 - expected;
            d * d / expected
        })
        .sum();
    let degrees_of_freedom = support.len() - 1;
    Ok(ChiSquare {
        statistic,
        degrees_of_freedom,
        p_value: chi_square_upper_tail(statistic, degrees_of_freedom),
    })
}

/// Total-variation distance between the empirical distribution and the
/// uniform one on `support`.
pub fn tv_distance<K: Hash + Eq>(h: &Histogram<K>, support: &[K]) -> Result<f64, StatsError> {
    check_support(h, support)?;
    let u = 1.0 / support.len() as f64;
    let total = h.total.max(1) as f64;
    let sum: f64 = support
        .iter()
        .map(|w| (h.count(w) as f64 / total - u).abs())
        .sum();
    Ok((sum / 2.0).min(1.0))
}

/// Total-variation distance between two histograms over any keys.
pub fn tv_between<K: Hash + Eq>(a: &Histogram<K>, b: &Histogram<K>) -> f64 {
    let ta = a.total.max(1) as f64;
    let tb = b.total.max(1) as f64;
    let mut sum = 0.0;
    for (k, c) in a.iter() {
        sum += (c as f64 / ta - b.count(k) as f64 / tb).abs();
    }
    for (k, c) in b.iter() {
        if a.count(k) == 0 {
            sum += c as f64 / tb;
        }
    }
    sum / 2.0
}

#[cfg(test)]
mod tests {
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    use super::*;

    fn words(k: u32) -> Vec<u32> {
        (0..k).collect()
    }

    #[test]
    fn balanced_histogram() {
        let h: Histogram<u32> = (0..800).map(|i| i % 8).collect();
        let c = chi_square_uniform(&h, &words(8)).unwrap();
        assert_eq!(c.statistic, 0.0);
        assert_eq!(c.p_value, 1.0);
        assert_eq!(c.degrees_of_freedom, 7);
        assert_eq!(tv_distance(&h, &words(8)).unwrap(), 0.0);
    }

    #[test]
    fn point_mass() {
        let h: Histogram<u32> = std::iter::repeat(3).take(800).collect();
        let c = chi_square_uniform(&h, &words(8)).unwrap();
        assert_eq!(c.statistic, 5600.0);
        assert!(c.p_value < 1e-10);
        assert!(!c.accepts(1));
        assert!((tv_distance(&h, &words(8)).unwrap() - 7.0 / 8.0).abs() < 1e-12);
    }

    #[test]
    fn tail_matches_known_values() {
        // chi-square(1) at 3.841459 is the 5% point; chi-square(2) tail is exp(-x/2)
        assert!((chi_square_upper_tail(3.841458820694124, 1) - 0.05).abs() < 1e-12);
        assert!((chi_square_upper_tail(7.0, 2) - (-3.5f64).exp()).abs() < 1e-14);
        assert!((chi_square_upper_tail(10.0, 10) - 0.4404932851).abs() < 1e-9);
    }

    #[test]
    fn errors() {
        let h: Histogram<u32> = [9u32].into_iter().collect();
        assert_eq!(tv_distance(&h, &words(8)), Err(StatsError::OutsideSupport));
        let h: Histogram<u32> = [1u32].into_iter().collect();
        assert_eq!(
            chi_square_uniform(&h, &words(8)),
            Err(StatsError::TooFewSamples {
                total: 1,
                support: 8
            })
        );
        assert_eq!(tv_distance(&h, &[1, 1]), Err(StatsError::DuplicateSupport));
        assert_eq!(tv_distance(&h, &[]), Err(StatsError::EmptySupport));
    }

    #[test]
    fn relabelling_keeps_the_statistic() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let h: Histogram<u32> = (0..1000).map(|_| rng.gen_range(0..10)).collect();
        let relabelled: Histogram<u32> = h
            .iter()
            .flat_map(|(&k, c)| std::iter::repeat(9 - k).take(c as usize))
            .collect();
        let a = chi_square_uniform(&h, &words(10)).unwrap();
        let b = chi_square_uniform(&relabelled, &words(10)).unwrap();
        assert!((a.statistic - b.statistic).abs() < 1e-9);
    }

    #[test]
    fn honest_sampler_passes() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut passes = 0;
        for _ in 0..100 {
            let h: Histogram<u32> = (0..100_000).map(|_| rng.gen_range(0..10)).collect();
            let c = chi_square_uniform(&h, &words(10)).unwrap();
            if c.p_value > ACCEPT_P_VALUE {
                passes += 1;
            }
            assert!(tv_distance(&h, &words(10)).unwrap() < 0.02);
        }
        assert!(passes >= 99);
    }

    #[test]
    fn merging_adds_counts() {
        let mut a: Histogram<u32> = [1, 2].into_iter().collect();
        let b: Histogram<u32> = [2, 3].into_iter().collect();
        a.merge(b);
        assert_eq!(a.total(), 4);
        assert_eq!(a.count(&2), 2);
        assert_eq!(tv_between(&a, &a), 0.0);
    }
}
