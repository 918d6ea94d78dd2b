//! Recursive-method generation of words of a fixed length.
//!
//! Starting from the initial state with `m` letters left, the successor
//! `s'` of `s` is chosen with probability `g[m-1][s'] / g[m][s]`. Branches
//! are selected by drawing a uniform big integer below `g[m][s]` and walking
//! the cumulative sums, so the distribution is exact.

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Zero};
use thiserror::Error;

use crate::automaton::{LetterId, StateId};
use crate::counting::CountTable;
use crate::rng::RngHandle;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum UniformError {
    #[error("length {n} exceeds the table horizon {horizon}")]
    OutOfRange { n: usize, horizon: usize },
    #[error("no word of length {n}")]
    NoWord { n: usize },
}

/// A word together with the run that reads it.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct TraceWord {
    pub letters: Vec<LetterId>,
    /// `letters.len() + 1` states, starting at the initial state.
    pub states: Vec<StateId>,
}

impl TraceWord {
    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }
}

/// Exact rational `num / den`.
pub(crate) fn ratio(num: &BigUint, den: &BigUint) -> BigRational {
    BigRational::new(BigInt::from(num.clone()), BigInt::from(den.clone()))
}

pub(crate) fn draw_word(
    t: &CountTable,
    n: usize,
    rng: &mut RngHandle,
    mut prob: Option<&mut BigRational>,
) -> Result<TraceWord, UniformError> {
    if n > t.horizon() {
        return Err(UniformError::OutOfRange {
            n,
            horizon: t.horizon(),
        });
    }
    let a = t.automaton();
    let mut s = a.initial();
    if t.get(n, s).is_zero() {
        return Err(UniformError::NoWord { n });
    }
    let mut letters = Vec::with_capacity(n);
    let mut states = Vec::with_capacity(n + 1);
    states.push(s);
    for m in (1..=n).rev() {
        let total = t.get(m, s);
        let next = t.row(m - 1);
        let mut u = rng.below(total);
        let mut chosen = None;
        for tr in a.transitions(s) {
            let w = &next[tr.target];
            if u < *w {
                chosen = Some(tr);
                break;
            }
            u -= w;
        }
        let tr = chosen.expect("count table is inconsistent with its automaton");
        if let Some(p) = prob.as_deref_mut() {
            *p *= ratio(&next[tr.target], total);
        }
        letters.push(tr.letter);
        states.push(tr.target);
        s = tr.target;
    }
    Ok(TraceWord { letters, states })
}

/// Draws a word of length `n` uniformly among the `ℓ(n)` accepted words.
pub fn draw_uniform_word(
    t: &CountTable,
    n: usize,
    rng: &mut RngHandle,
) -> Result<TraceWord, UniformError> {
    draw_word(t, n, rng, None)
}

/// Like [`draw_uniform_word`], also returning the exact product of the
/// branch probabilities that produced the word.
pub fn draw_uniform_word_with_probability(
    t: &CountTable,
    n: usize,
    rng: &mut RngHandle,
) -> Result<(TraceWord, BigRational), UniformError> {
    let mut p = BigRational::one();
    let w = draw_word(t, n, rng, Some(&mut p))?;
    Ok((w, p))
}
