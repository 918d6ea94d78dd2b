//! Exact word counting and the dominant growth estimate.
//!
//! `g[i][s]` is the number of words of length `i` leading from `s` to a final
//! state:
//!
//! ```text
//! g[0][s] = 1 if s is final, else 0
//! g[i][s] = Σ_{s -x-> s'} g[i-1][s']
//! ```
//!
//! and `ℓ(i) = g[i][initial]`. All counts are arbitrary precision.

use std::sync::Arc;

use num_bigint::BigUint;
use num_traits::{ToPrimitive, Zero};
use thiserror::Error;

use crate::automaton::{check_growth_conditions, Automaton, StateId};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CountError {
    #[error("length {n} exceeds the table horizon {horizon}")]
    OutOfRange { n: usize, horizon: usize },
    #[error("empty language at length {n}")]
    EmptyLanguage { n: usize },
}

#[derive(Clone, Debug)]
pub struct CountTable {
    automaton: Arc<Automaton>,
    g: Vec<Vec<BigUint>>,
}

/// Builds `g[i][s]` for `0 ≤ i ≤ n`. Time is linear in `n·|Δ|`, memory is
/// `(n+1)·|Q|` integers.
pub fn build_count_table(a: impl Into<Arc<Automaton>>, n: usize) -> CountTable {
    let automaton = a.into();
    let q = automaton.num_states();
    let mut g = Vec::with_capacity(n + 1);
    g.push(
        (0..q)
            .map(|s| {
                if automaton.is_final(s) {
                    BigUint::from(1u8)
                } else {
                    BigUint::zero()
                }
            })
            .collect::<Vec<_>>(),
    );
    let mut table = CountTable { automaton, g };
    table.extend_to(n);
    table
}

impl CountTable {
    pub fn automaton(&self) -> &Arc<Automaton> {
        &self.automaton
    }

    pub fn horizon(&self) -> usize {
        self.g.len() - 1
    }

    /// Grows the table so that `horizon() >= n`.
    pub fn extend_to(&mut self, n: usize) {
        let a = &self.automaton;
        while self.g.len() <= n {
            let prev = self.g.last().unwrap();
            let row = (0..a.num_states())
                .map(|s| {
                    a.transitions(s)
                        .iter()
                        .fold(BigUint::zero(), |acc, t| acc + &prev[t.target])
                })
                .collect();
            self.g.push(row);
        }
    }

    /// `g[i][s]`. Panics if `i > horizon()`.
    pub fn get(&self, i: usize, s: StateId) -> &BigUint {
        &self.g[i][s]
    }

    pub fn row(&self, i: usize) -> &[BigUint] {
        &self.g[i]
    }

    /// `ℓ(i)` for every `i` up to the horizon.
    pub fn language_counts(&self) -> Vec<BigUint> {
        let init = self.automaton.initial();
        self.g.iter().map(|row| row[init].clone()).collect()
    }
}

/// `ℓ(n)`, the number of accepted words of length `n`.
pub fn count_words(t: &CountTable, n: usize) -> Result<&BigUint, CountError> {
    if n > t.horizon() {
        return Err(CountError::OutOfRange {
            n,
            horizon: t.horizon(),
        });
    }
    Ok(t.get(n, t.automaton.initial()))
}

/// Ladder `{n, 2n, 4n}` capped at 512, used when sampling length `n`.
pub fn default_ladder(n: usize) -> Vec<usize> {
    let base = n.max(1);
    let mut ladder: Vec<usize> = [base, 2 * base, 4 * base]
        .iter()
        .map(|&k| k.min(512))
        .collect();
    ladder.dedup();
    ladder
}

/// Estimated dominant growth pair for `ℓ(n) ~ C·ω^n`.
#[derive(Clone, Debug, PartialEq)]
pub struct AsymptoticParams {
    pub omega: f64,
    pub c_const: f64,
    /// The `n` at which `ω = ℓ(n+1)/ℓ(n)` and `C = ℓ(n)/ω^n` were taken.
    pub fit_horizon: usize,
    /// `|C·ω^m/ℓ(m) − 1|` at the second-largest ladder rung `m` (0 when the
    /// ladder has a single rung).
    pub relative_residual: f64,
    /// The same quantity at every ladder rung below the fit horizon, in
    /// ladder order.
    pub profile: Vec<(usize, f64)>,
    pub certified: bool,
    pub warning: Option<String>,
}

/// Estimates `ω` by the exact ratio `ℓ(N+1)/ℓ(N)` at the top `N` of the
/// ladder and `C` by `ℓ(N)/ω^N`. Residuals are computed exactly as rationals
/// and only converted to floating point at the end.
///
/// When `ℓ(N+1) = 0` (periodic languages), `ω = (ℓ(N+d)/ℓ(N))^{1/d}` for the
/// smallest `d` with `ℓ(N+d) > 0`, and residuals are computed in floating
/// point.
pub fn estimate_asymptotics(
    a: &Automaton,
    ladder: &[usize],
) -> Result<AsymptoticParams, CountError> {
    let mut rungs = ladder.to_vec();
    rungs.sort_unstable();
    rungs.dedup();
    let top = *rungs.last().unwrap_or(&0);
    // a periodic language may have no word at top + 1; look up to |Q| further
    let reach = a.num_states().max(1);
    let table = build_count_table(a.clone(), top + reach);
    let ell = table.language_counts();

    if ell[top].is_zero() {
        return Err(CountError::EmptyLanguage { n: top });
    }
    let step = (1..=reach)
        .find(|&d| !ell[top + d].is_zero())
        .ok_or(CountError::EmptyLanguage { n: top + 1 })?;

    let (omega, profile) = if step == 1 {
        let omega = ratio_f64(&ell[top + 1], &ell[top]);
        let profile: Vec<(usize, f64)> = rungs[..rungs.len() - 1]
            .iter()
            .map(|&m| {
                (
                    m,
                    exact_residual(&ell[top], &ell[top + 1], top - m, &ell[m]),
                )
            })
            .collect();
        (omega, profile)
    } else {
        let log_omega = (ln_big(&ell[top + step]) - ln_big(&ell[top])) / step as f64;
        let profile = rungs[..rungs.len() - 1]
            .iter()
            .map(|&m| {
                let residual = if ell[m].is_zero() {
                    f64::INFINITY
                } else {
                    (ln_big(&ell[top]) - (top - m) as f64 * log_omega - ln_big(&ell[m]))
                        .exp_m1()
                        .abs()
                };
                (m, residual)
            })
            .collect();
        (log_omega.exp(), profile)
    };
    let c_const = (ln_big(&ell[top]) - top as f64 * omega.ln()).exp();
    let relative_residual = profile.last().map_or(0.0, |p| p.1);

    let diagnostics = check_growth_conditions(a);
    Ok(AsymptoticParams {
        omega,
        c_const,
        fit_horizon: top,
        relative_residual,
        profile,
        certified: diagnostics.certified(),
        warning: diagnostics.warning,
    })
}

/// `|ℓ(N)^{d+1} / (ℓ(N+1)^d · ℓ(m)) − 1|`, which is `|C·ω^m/ℓ(m) − 1|` with
/// `ω = ℓ(N+1)/ℓ(N)`, `C = ℓ(N)/ω^N` and `d = N − m`.
fn exact_residual(at_top: &BigUint, after_top: &BigUint, d: usize, at_m: &BigUint) -> f64 {
    if at_m.is_zero() {
        return f64::INFINITY;
    }
    let num = at_top.pow(d as u32 + 1);
    let den = after_top.pow(d as u32) * at_m;
    let diff = if num >= den { &num - &den } else { &den - &num };
    ratio_f64(&diff, &den)
}

/// `num / den` rounded to `f64`, without overflowing on huge operands.
pub(crate) fn ratio_f64(num: &BigUint, den: &BigUint) -> f64 {
    if num.is_zero() {
        return 0.0;
    }
    let shift = den.bits() as i64 - num.bits() as i64 + 64;
    let q = if shift >= 0 {
        (num << shift as usize) / den
    } else {
        num / (den << (-shift) as usize)
    };
    q.to_f64().unwrap() * 2f64.powi(-shift as i32)
}

/// Natural logarithm of a positive big integer.
pub(crate) fn ln_big(x: &BigUint) -> f64 {
    let bits = x.bits();
    if bits <= 64 {
        return x.to_f64().unwrap().ln();
    }
    let top = (x >> (bits - 64) as usize).to_f64().unwrap();
    top.ln() + (bits - 64) as f64 * std::f64::consts::LN_2
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::automaton::{AutomatonSpec, Letter, LetterId, LetterPolicy};

    fn automaton(num_states: usize, edges: &[(usize, usize)], finals: &[usize]) -> Automaton {
        let spec = AutomatonSpec {
            num_states,
            initial: 0,
            finals: finals.to_vec(),
            alphabet: (0..edges.len() as u32)
                .map(|i| Letter::new(i, 0, format!("l{i}")))
                .collect(),
            transitions: edges
                .iter()
                .enumerate()
                .map(|(i, &(s, d))| (s, LetterId(i as u32), d))
                .collect(),
        };
        Automaton::from_spec(spec, LetterPolicy::UniquePerTransition).unwrap()
    }

    fn counts(t: &CountTable) -> Vec<u64> {
        t.language_counts()
            .iter()
            .map(|c| c.to_u64().unwrap())
            .collect()
    }

    #[test]
    fn two_self_loops_double() {
        let t = build_count_table(automaton(1, &[(0, 0), (0, 0)], &[0]), 3);
        assert_eq!(counts(&t), vec![1, 2, 4, 8]);
        assert_eq!(count_words(&t, 3).unwrap(), &BigUint::from(8u8));
    }

    #[test]
    fn pure_cycle_has_one_word_per_length() {
        let t = build_count_table(automaton(2, &[(0, 1), (1, 0)], &[0, 1]), 4);
        assert_eq!(counts(&t), vec![1; 5]);
    }

    #[test]
    fn empty_word_depends_on_initial_finality() {
        let t = build_count_table(automaton(2, &[(0, 1)], &[1]), 2);
        assert_eq!(counts(&t), vec![0, 1, 0]);
    }

    #[test]
    fn out_of_range_length() {
        let t = build_count_table(automaton(1, &[(0, 0)], &[0]), 2);
        assert_eq!(
            count_words(&t, 3),
            Err(CountError::OutOfRange { n: 3, horizon: 2 })
        );
    }

    #[test]
    fn counts_do_not_overflow() {
        let t = build_count_table(automaton(1, &[(0, 0), (0, 0)], &[0]), 200);
        assert_eq!(
            count_words(&t, 200).unwrap(),
            &(BigUint::from(1u8) << 200usize)
        );
    }

    #[test]
    fn powers_of_two_fit_exactly() {
        let p = estimate_asymptotics(&automaton(1, &[(0, 0), (0, 0)], &[0]), &[4, 8, 16]).unwrap();
        assert_eq!(p.omega, 2.0);
        assert!((p.c_const - 1.0).abs() < 1e-12);
        assert_eq!(p.relative_residual, 0.0);
        assert!(p.certified);
    }

    #[test]
    fn periodic_cycle_is_not_certified() {
        let p = estimate_asymptotics(&automaton(2, &[(0, 1), (1, 0)], &[0, 1]), &[8, 16]).unwrap();
        assert!(!p.certified);
        assert!(p.warning.unwrap().contains("periodic"));
        assert_eq!(p.omega, 1.0);
    }

    #[test]
    fn gaps_in_the_counts_use_the_next_word() {
        // words of even length only
        let p =
            estimate_asymptotics(&automaton(2, &[(0, 1), (1, 0), (1, 0)], &[0]), &[8, 16]).unwrap();
        assert!((p.omega - 2f64.sqrt()).abs() < 1e-12);
        assert!(!p.certified);
        assert!(p.relative_residual < 1e-9);
    }

    #[test]
    fn finite_language_is_an_error() {
        let err = estimate_asymptotics(&automaton(2, &[(0, 1)], &[0, 1]), &[4]).unwrap_err();
        assert_eq!(err, CountError::EmptyLanguage { n: 4 });
    }

    #[test]
    fn ratio_and_log_on_huge_numbers() {
        let a = BigUint::from(3u8).pow(2000);
        let b = BigUint::from(3u8).pow(1999);
        assert!((ratio_f64(&a, &b) - 3.0).abs() < 1e-15);
        assert!((ln_big(&a) - 2000.0 * 3f64.ln()).abs() < 1e-9);
        assert!((ratio_f64(&b, &a) - 1.0 / 3.0).abs() < 1e-16);
    }

    #[test]
    fn default_ladder_caps_at_512() {
        assert_eq!(default_ladder(10), vec![10, 20, 40]);
        assert_eq!(default_ladder(200), vec![200, 400, 512]);
        assert_eq!(default_ladder(1000), vec![512]);
    }
}
