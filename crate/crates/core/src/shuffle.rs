//! Uniform traces of unsynchronized systems without building the product.
//!
//! For modules with disjoint alphabets the global language is the shuffle
//! `L_1 ⧢ … ⧢ L_r`, and
//!
//! ```text
//! ℓ(n) = Σ_{n_1+…+n_r=n} multinomial(n; n_1…n_r) · Π ℓ_i(n_i)
//! ```
//!
//! A trace is drawn in three steps: a length vector `(n_1, …, n_r)` with
//! probability proportional to its term above, one uniform word per module,
//! and a uniform interleaving of those words.

use std::sync::Arc;

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use thiserror::Error;

use crate::automaton::{Automaton, LetterId, StateId};
use crate::counting::{
    build_count_table, default_ladder, estimate_asymptotics, CountError, CountTable,
};
use crate::rng::RngHandle;
use crate::uniform::{draw_word, ratio, UniformError};

/// Below this length the asymptotic mode samples length vectors exactly.
pub const SMALL_N_EXACT: usize = 16;

/// Automatic mode selection limits: exact up to this many states in total...
pub const AUTO_EXACT_MAX_STATES: usize = 10_000;
/// ...and up to this length.
pub const AUTO_EXACT_MAX_LENGTH: usize = 512;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SamplingMode {
    /// Big-integer counts; every trace has probability exactly `1/ℓ(n)`.
    Exact,
    /// Length vectors from the dominant growth rates only.
    Asymptotic,
}

impl SamplingMode {
    /// Exact for small systems and lengths, asymptotic otherwise.
    pub fn auto(total_states: usize, n: usize) -> Self {
        if total_states <= AUTO_EXACT_MAX_STATES && n <= AUTO_EXACT_MAX_LENGTH {
            SamplingMode::Exact
        } else {
            SamplingMode::Asymptotic
        }
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ShuffleError {
    #[error("a shuffle needs at least one module")]
    NoFactors,
    #[error("length {n} exceeds the sampler horizon {horizon}")]
    OutOfRange { n: usize, horizon: usize },
    #[error("no trace of length {n}")]
    EmptyLanguage { n: usize },
    #[error("exact probabilities at length {n} need exact mode")]
    NotExact { n: usize },
    #[error(transparent)]
    Uniform(#[from] UniformError),
}

/// Lengths of the per-module words of one global trace.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LengthVector {
    pub parts: Vec<usize>,
}

impl LengthVector {
    pub fn total(&self) -> usize {
        self.parts.iter().sum()
    }
}

/// A trace of a system of modules: the letters and, after each prefix, the
/// tuple of module states.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct GlobalTrace {
    pub letters: Vec<LetterId>,
    /// `letters.len() + 1` tuples, starting at the initial states.
    pub states: Vec<Vec<StateId>>,
}

impl GlobalTrace {
    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }
}

/// Multinomial convolution of per-factor counts, with every suffix cached so
/// that length vectors can be drawn one coordinate at a time.
#[derive(Clone, Debug)]
pub struct ShuffleCounts {
    factors: Vec<Vec<BigUint>>,
    /// `suffix[k][j]`: shuffle count of factors `k..r` at length `j`;
    /// `suffix[r]` is `[1, 0, 0, …]`.
    suffix: Vec<Vec<BigUint>>,
}

/// Row `j` of Pascal's triangle.
fn binomial_row(j: usize) -> Vec<BigUint> {
    let mut row = Vec::with_capacity(j + 1);
    let mut b = BigUint::one();
    for a in 0..=j {
        row.push(b.clone());
        b = b * (j - a) / (a + 1);
    }
    row
}

impl ShuffleCounts {
    /// `factors[i][k]` is `ℓ_i(k)`; all rows must have the same length.
    pub fn new(factors: Vec<Vec<BigUint>>) -> Self {
        let len = factors.first().map_or(1, Vec::len);
        assert!(
            factors.iter().all(|f| f.len() == len),
            "count rows differ in length"
        );
        let r = factors.len();
        let mut suffix = vec![Vec::new(); r + 1];
        suffix[r] = (0..len)
            .map(|j| {
                if j == 0 {
                    BigUint::one()
                } else {
                    BigUint::zero()
                }
            })
            .collect();
        for k in (0..r).rev() {
            let next = &suffix[k + 1];
            let f = &factors[k];
            let row: Vec<BigUint> = (0..len)
                .map(|j| {
                    let binom = binomial_row(j);
                    (0..=j)
                        .filter(|&a| !f[a].is_zero() && !next[j - a].is_zero())
                        .fold(BigUint::zero(), |acc, a| {
                            acc + &binom[a] * &f[a] * &next[j - a]
                        })
                })
                .collect();
            suffix[k] = row;
        }
        ShuffleCounts { factors, suffix }
    }

    pub fn num_factors(&self) -> usize {
        self.factors.len()
    }

    pub fn horizon(&self) -> usize {
        self.suffix[0].len() - 1
    }

    /// Shuffle count at every length up to the horizon.
    pub fn counts(&self) -> &[BigUint] {
        &self.suffix[0]
    }

    pub fn count(&self, n: usize) -> &BigUint {
        &self.suffix[0][n]
    }

    /// Draws `(n_1, …, n_r)` with probability
    /// `multinomial(n; n_1…n_r) · Π ℓ_i(n_i) / ℓ(n)`, multiplying the exact
    /// probability of each conditional draw into `prob`.
    pub(crate) fn sample(
        &self,
        n: usize,
        rng: &mut RngHandle,
        mut prob: Option<&mut BigRational>,
    ) -> Result<LengthVector, ShuffleError> {
        if n > self.horizon() {
            return Err(ShuffleError::OutOfRange {
                n,
                horizon: self.horizon(),
            });
        }
        if self.suffix[0][n].is_zero() {
            return Err(ShuffleError::EmptyLanguage { n });
        }
        let mut parts = Vec::with_capacity(self.factors.len());
        let mut left = n;
        for k in 0..self.factors.len() {
            let total = &self.suffix[k][left];
            let binom = binomial_row(left);
            let f = &self.factors[k];
            let next = &self.suffix[k + 1];
            let mut u = rng.below(total);
            let mut chosen = None;
            for a in 0..=left {
                let w = &binom[a] * &f[a] * &next[left - a];
                if u < w {
                    chosen = Some((a, w));
                    break;
                }
                u -= w;
            }
            let (a, w) = chosen.expect("suffix counts are inconsistent");
            if let Some(p) = prob.as_deref_mut() {
                *p *= ratio(&w, total);
            }
            parts.push(a);
            left -= a;
        }
        Ok(LengthVector { parts })
    }
}

/// Shuffle count `ℓ(k)` for `0 ≤ k < len` of languages with the given counts.
pub fn shuffle_counts(factors: &[Vec<BigUint>]) -> Vec<BigUint> {
    ShuffleCounts::new(factors.to_vec()).counts().to_vec()
}

/// The module order of a uniform interleaving of words with the given
/// lengths: while letters remain, module `i` is chosen with probability
/// `n_i / n` over the remaining counts.
pub(crate) fn interleave(
    lengths: &[usize],
    rng: &mut RngHandle,
    mut prob: Option<&mut BigRational>,
) -> Vec<usize> {
    let mut left = lengths.to_vec();
    let mut n: usize = left.iter().sum();
    let mut order = Vec::with_capacity(n);
    while n > 0 {
        let mut u = rng.index(n);
        let i = left
            .iter()
            .position(|&k| {
                if u < k {
                    true
                } else {
                    u -= k;
                    false
                }
            })
            .expect("remaining counts sum to n");
        if let Some(p) = prob.as_deref_mut() {
            *p *= BigRational::new(left[i].into(), n.into());
        }
        order.push(i);
        left[i] -= 1;
        n -= 1;
    }
    order
}

/// Shuffles `words` uniformly among their `multinomial(n; n_1…n_r)`
/// interleavings. Each word keeps its internal order.
pub fn shuffle_words<T: Clone>(words: &[&[T]], rng: &mut RngHandle) -> Vec<T> {
    let lengths: Vec<usize> = words.iter().map(|w| w.len()).collect();
    let mut pos = vec![0; words.len()];
    interleave(&lengths, rng, None)
        .into_iter()
        .map(|i| {
            pos[i] += 1;
            words[i][pos[i] - 1].clone()
        })
        .collect()
}

/// Dominant growth `ℓ(k) ~ c·ω^k` of one language.
#[derive(Clone, Debug, PartialEq)]
pub struct Growth {
    pub c: f64,
    pub omega: f64,
    pub warning: Option<String>,
}

/// Growth pair of `a`, estimated on the default ladder for `horizon`.
/// A finite language gets `ω = 0` and `c` equal to its first nonzero count;
/// an empty one gets `c = 0`.
pub fn module_growth(a: &Arc<Automaton>, horizon: usize) -> Growth {
    let mut ladder = default_ladder(horizon);
    let top = *ladder.last().expect("ladder is never empty");
    let reach = a.num_states().max(1);
    let counts = build_count_table(Arc::clone(a), top + reach).language_counts();
    // a periodic language may have a gap at the top rung; move it to a word
    if let Some(d) = (0..reach.min(top + 1)).find(|&d| !counts[top - d].is_zero()) {
        *ladder.last_mut().unwrap() = top - d;
        ladder.retain(|&k| k <= top - d);
    }
    match estimate_asymptotics(a, &ladder) {
        Ok(p) => Growth {
            c: p.c_const,
            omega: p.omega,
            warning: (!p.certified).then(|| {
                p.warning
                    .unwrap_or_else(|| "growth conditions not met".into())
            }),
        },
        Err(CountError::EmptyLanguage { .. }) => match counts.iter().find(|c| !c.is_zero()) {
            Some(first) => Growth {
                c: first.to_f64().unwrap_or(f64::MAX),
                omega: 0.0,
                warning: Some("finite language, growth rate taken as 0".into()),
            },
            None => Growth {
                c: 0.0,
                omega: 0.0,
                warning: None,
            },
        },
        Err(e) => unreachable!("ladder within its own table: {e}"),
    }
}

/// Per-module count tables plus what each mode needs to draw length vectors.
#[derive(Clone, Debug)]
pub struct ShuffleSampler {
    tables: Vec<CountTable>,
    mode: SamplingMode,
    /// Exact suffix counts up to the horizon (exact mode) or below
    /// [`SMALL_N_EXACT`] (asymptotic mode).
    exact: ShuffleCounts,
    omegas: Vec<f64>,
    growth: Vec<Growth>,
    /// `support[k]`: the shuffle has a word of length `k`.
    support: Vec<bool>,
    warnings: Vec<String>,
}

impl ShuffleSampler {
    /// Builds per-module tables up to `horizon` for the given mode.
    pub fn new(
        automata: &[Arc<Automaton>],
        horizon: usize,
        mode: SamplingMode,
    ) -> Result<Self, ShuffleError> {
        if automata.is_empty() {
            return Err(ShuffleError::NoFactors);
        }
        let tables: Vec<CountTable> = automata
            .iter()
            .map(|a| build_count_table(Arc::clone(a), horizon))
            .collect();
        let exact_horizon = match mode {
            SamplingMode::Exact => horizon,
            SamplingMode::Asymptotic => horizon.min(SMALL_N_EXACT - 1),
        };
        let exact = ShuffleCounts::new(
            tables
                .iter()
                .map(|t| t.language_counts()[..=exact_horizon].to_vec())
                .collect(),
        );

        let mut growth = Vec::new();
        let mut warnings = Vec::new();
        if mode == SamplingMode::Asymptotic {
            for (i, t) in tables.iter().enumerate() {
                let g = module_growth(t.automaton(), horizon);
                if let Some(w) = &g.warning {
                    warnings.push(format!("module {i}: {w}"));
                }
                growth.push(g);
            }
        }
        let mut support = vec![false; horizon + 1];
        support[0] = true;
        for t in &tables {
            let own: Vec<bool> = t.language_counts().iter().map(|c| !c.is_zero()).collect();
            support = (0..=horizon)
                .map(|k| (0..=k).any(|a| own[a] && support[k - a]))
                .collect();
        }
        let omegas = growth.iter().map(|g| g.omega).collect();
        Ok(ShuffleSampler {
            tables,
            mode,
            exact,
            omegas,
            growth,
            support,
            warnings,
        })
    }

    pub fn mode(&self) -> SamplingMode {
        self.mode
    }

    pub fn horizon(&self) -> usize {
        self.tables[0].horizon()
    }

    pub fn tables(&self) -> &[CountTable] {
        &self.tables
    }

    /// Growth rates used in asymptotic mode; empty in exact mode.
    pub fn omegas(&self) -> &[f64] {
        &self.omegas
    }

    /// Per-module growth pairs used in asymptotic mode; empty in exact mode.
    pub fn growth(&self) -> &[Growth] {
        &self.growth
    }

    /// Whether some global trace has length `k`.
    pub fn has_length(&self, k: usize) -> bool {
        self.support.get(k).copied().unwrap_or(false)
    }

    pub(crate) fn exact_counts(&self) -> &ShuffleCounts {
        &self.exact
    }

    /// Certification problems of the growth estimates.
    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }

    /// Exact global count `ℓ(n)`, when the sampler holds it.
    pub fn count(&self, n: usize) -> Option<&BigUint> {
        (n <= self.exact.horizon()).then(|| self.exact.count(n))
    }

    fn check(&self, n: usize) -> Result<(), ShuffleError> {
        if n > self.horizon() {
            return Err(ShuffleError::OutOfRange {
                n,
                horizon: self.horizon(),
            });
        }
        Ok(())
    }

    fn asymptotic_length_vector(
        &self,
        n: usize,
        rng: &mut RngHandle,
    ) -> Result<LengthVector, ShuffleError> {
        let sum: f64 = self.omegas.iter().sum();
        if sum <= 0.0 {
            return Err(ShuffleError::EmptyLanguage { n });
        }
        // a draw can hit a length where some module has no word (periodic
        // languages); such vectors have probability 0 and are redrawn
        for _ in 0..1000 {
            let mut parts = vec![0usize; self.omegas.len()];
            for _ in 0..n {
                let mut u = rng.unit() * sum;
                let mut pick = self.omegas.len() - 1;
                for (i, &w) in self.omegas.iter().enumerate() {
                    if u < w {
                        pick = i;
                        break;
                    }
                    u -= w;
                }
                parts[pick] += 1;
            }
            let feasible = parts
                .iter()
                .zip(&self.tables)
                .all(|(&k, t)| !t.get(k, t.automaton().initial()).is_zero());
            if feasible {
                return Ok(LengthVector { parts });
            }
        }
        Err(ShuffleError::EmptyLanguage { n })
    }

    fn trace(
        &self,
        lengths: &LengthVector,
        rng: &mut RngHandle,
        mut prob: Option<&mut BigRational>,
    ) -> Result<GlobalTrace, ShuffleError> {
        let words = self
            .tables
            .iter()
            .zip(&lengths.parts)
            .map(|(t, &k)| draw_word(t, k, rng, prob.as_deref_mut()))
            .collect::<Result<Vec<_>, _>>()?;
        let order = interleave(&lengths.parts, rng, prob);
        let mut current: Vec<StateId> = words.iter().map(|w| w.states[0]).collect();
        let mut pos = vec![0; words.len()];
        let mut letters = Vec::with_capacity(order.len());
        let mut states = Vec::with_capacity(order.len() + 1);
        states.push(current.clone());
        for i in order {
            letters.push(words[i].letters[pos[i]]);
            pos[i] += 1;
            current[i] = words[i].states[pos[i]];
            states.push(current.clone());
        }
        Ok(GlobalTrace { letters, states })
    }
}

/// Draws the per-module word lengths of a trace of length `n`.
pub fn sample_length_vector(
    s: &ShuffleSampler,
    n: usize,
    rng: &mut RngHandle,
) -> Result<LengthVector, ShuffleError> {
    s.check(n)?;
    if n <= s.exact.horizon() {
        s.exact.sample(n, rng, None)
    } else {
        s.asymptotic_length_vector(n, rng)
    }
}

/// Draws a global trace of length `n`: a length vector, one uniform word per
/// module, and a uniform interleaving.
pub fn sample_shuffle_trace(
    s: &ShuffleSampler,
    n: usize,
    rng: &mut RngHandle,
) -> Result<GlobalTrace, ShuffleError> {
    let lengths = sample_length_vector(s, n, rng)?;
    s.trace(&lengths, rng, None)
}

/// Like [`sample_shuffle_trace`], also returning the exact product of every
/// branch probability taken. Needs exact counts at length `n`.
pub fn sample_shuffle_trace_with_probability(
    s: &ShuffleSampler,
    n: usize,
    rng: &mut RngHandle,
) -> Result<(GlobalTrace, BigRational), ShuffleError> {
    s.check(n)?;
    if n > s.exact.horizon() {
        return Err(ShuffleError::NotExact { n });
    }
    let mut p = BigRational::one();
    let lengths = s.exact.sample(n, rng, Some(&mut p))?;
    let trace = s.trace(&lengths, rng, Some(&mut p))?;
    Ok((trace, p))
}
