//! Explicit product constructions.
//!
//! The shuffling automaton advances one component per letter; the
//! synchronized product additionally moves every component at once on the
//! shared letter `α`. Only tuples reachable from the initial tuple are
//! materialized. Both serve as the brute-force generators (count, then draw
//! with [`crate::uniform`]) and as oracles for the on-line samplers.

use std::collections::{BTreeSet, HashMap};

use num_bigint::BigUint;
use num_traits::{ToPrimitive, Zero};
use thiserror::Error;

use crate::automaton::{Automaton, AutomatonSpec, Letter, LetterId, StateId};
use crate::counting::build_count_table;

/// Hard cap on the number of words [`enumerate_traces`] will materialize.
pub const ENUMERATION_LIMIT: u64 = 1_000_000;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ProductError {
    #[error("letter {letter} belongs to factors {first} and {second}")]
    SharedLetter {
        letter: LetterId,
        first: usize,
        second: usize,
    },
    #[error("factor {factor} has {count} transitions labelled by the synchronization letter, expected exactly one")]
    SyncMultiplicity { factor: usize, count: usize },
    #[error("no factors given")]
    NoFactors,
    #[error("refusing to enumerate {count} words (limit {ENUMERATION_LIMIT})")]
    TooManyWords { count: BigUint },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProductAutomaton {
    pub base: Automaton,
    /// Component states of each product state.
    pub factor_map: Vec<Vec<StateId>>,
}

fn check_disjoint(factors: &[&Automaton], alpha: Option<LetterId>) -> Result<(), ProductError> {
    let mut owner: HashMap<LetterId, usize> = HashMap::new();
    for (i, a) in factors.iter().enumerate() {
        for l in a.alphabet() {
            if Some(l.id) == alpha {
                continue;
            }
            if let Some(&first) = owner.get(&l.id) {
                return Err(ProductError::SharedLetter {
                    letter: l.id,
                    first,
                    second: i,
                });
            }
            owner.insert(l.id, i);
        }
    }
    Ok(())
}

fn union_alphabet(factors: &[&Automaton]) -> Vec<Letter> {
    let mut seen = BTreeSet::new();
    factors
        .iter()
        .flat_map(|a| a.alphabet().iter())
        .filter(|l| seen.insert(l.id))
        .cloned()
        .collect()
}

fn explore(factors: &[&Automaton], alpha: Option<LetterId>) -> ProductAutomaton {
    let initial: Vec<StateId> = factors.iter().map(|a| a.initial()).collect();
    let mut index: HashMap<Vec<StateId>, StateId> = HashMap::from([(initial.clone(), 0)]);
    let mut tuples = vec![initial];
    let mut transitions = Vec::new();

    let mut intern = |tuple: Vec<StateId>, tuples: &mut Vec<Vec<StateId>>| -> StateId {
        *index.entry(tuple).or_insert_with_key(|t| {
            tuples.push(t.clone());
            tuples.len() - 1
        })
    };

    let mut head = 0;
    while head < tuples.len() {
        let current = tuples[head].clone();
        for (i, a) in factors.iter().enumerate() {
            for t in a.transitions(current[i]) {
                if Some(t.letter) == alpha {
                    continue;
                }
                let mut next = current.clone();
                next[i] = t.target;
                let target = intern(next, &mut tuples);
                transitions.push((head, t.letter, target));
            }
        }
        if let Some(alpha) = alpha {
            let moved: Option<Vec<StateId>> = factors
                .iter()
                .zip(&current)
                .map(|(a, &q)| a.step(q, alpha))
                .collect();
            if let Some(next) = moved {
                let target = intern(next, &mut tuples);
                transitions.push((head, alpha, target));
            }
        }
        head += 1;
    }

    let finals = tuples
        .iter()
        .enumerate()
        .filter(|(_, t)| factors.iter().zip(t.iter()).all(|(a, &q)| a.is_final(q)))
        .map(|(s, _)| s)
        .collect();
    let spec = AutomatonSpec {
        num_states: tuples.len(),
        initial: 0,
        finals,
        alphabet: union_alphabet(factors),
        transitions,
    };
    ProductAutomaton {
        base: Automaton::from_spec_unchecked(spec),
        factor_map: tuples,
    }
}

/// The shuffling automaton of `factors`, whose alphabets must be pairwise
/// disjoint.
pub fn build_shuffle_automaton(factors: &[&Automaton]) -> Result<ProductAutomaton, ProductError> {
    if factors.is_empty() {
        return Err(ProductError::NoFactors);
    }
    check_disjoint(factors, None)?;
    Ok(explore(factors, None))
}

/// The synchronized product of `factors` on `alpha`. Each factor must carry
/// exactly one `alpha` transition; all other letters must be disjoint.
pub fn build_sync_product(
    factors: &[&Automaton],
    alpha: LetterId,
) -> Result<ProductAutomaton, ProductError> {
    if factors.is_empty() {
        return Err(ProductError::NoFactors);
    }
    for (i, a) in factors.iter().enumerate() {
        let count = a.edges().filter(|e| e.1 == alpha).count();
        if count != 1 {
            return Err(ProductError::SyncMultiplicity { factor: i, count });
        }
    }
    check_disjoint(factors, Some(alpha))?;
    Ok(explore(factors, Some(alpha)))
}

/// Every accepted word of length `n`, sorted lexicographically by letter id.
/// Refuses when there are more than [`ENUMERATION_LIMIT`] of them.
pub fn enumerate_traces(a: &Automaton, n: usize) -> Result<Vec<Vec<LetterId>>, ProductError> {
    let table = build_count_table(a.clone(), n);
    let count = table.get(n, a.initial()).clone();
    if count.to_u64().map_or(true, |c| c > ENUMERATION_LIMIT) {
        return Err(ProductError::TooManyWords { count });
    }

    let mut out = Vec::with_capacity(count.to_usize().unwrap());
    let mut word = Vec::with_capacity(n);
    fn walk(
        a: &Automaton,
        table: &crate::counting::CountTable,
        s: StateId,
        left: usize,
        word: &mut Vec<LetterId>,
        out: &mut Vec<Vec<LetterId>>,
    ) {
        if left == 0 {
            out.push(word.clone());
            return;
        }
        for t in a.transitions(s) {
            if table.get(left - 1, t.target).is_zero() {
                continue;
            }
            word.push(t.letter);
            walk(a, table, t.target, left - 1, word, out);
            word.pop();
        }
    }
    if !count.is_zero() {
        walk(a, &table, a.initial(), n, &mut word, &mut out);
    }
    out.sort_unstable();
    out.dedup();
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::automaton::LetterPolicy;

    /// A linear automaton reading `letters` once, every state final.
    fn word_automaton(letters: &[u32], module: usize) -> Automaton {
        let spec = AutomatonSpec {
            num_states: letters.len() + 1,
            initial: 0,
            finals: (0..=letters.len()).collect(),
            alphabet: letters
                .iter()
                .map(|&l| Letter::new(l, module, format!("{l}")))
                .collect(),
            transitions: letters
                .iter()
                .enumerate()
                .map(|(i, &l)| (i, LetterId(l), i + 1))
                .collect(),
        };
        Automaton::from_spec(spec, LetterPolicy::UniquePerTransition).unwrap()
    }

    fn loops(letters: &[u32], module: usize) -> Automaton {
        let spec = AutomatonSpec {
            num_states: 1,
            initial: 0,
            finals: vec![0],
            alphabet: letters
                .iter()
                .map(|&l| Letter::new(l, module, format!("{l}")))
                .collect(),
            transitions: letters.iter().map(|&l| (0, LetterId(l), 0)).collect(),
        };
        Automaton::from_spec(spec, LetterPolicy::UniquePerTransition).unwrap()
    }

    /// p --x--> p, p --alpha--> q, q --y--> q
    fn x_alpha_y(x: u32, y: u32, alpha: u32, module: usize) -> Automaton {
        let spec = AutomatonSpec {
            num_states: 2,
            initial: 0,
            finals: vec![0, 1],
            alphabet: vec![
                Letter::new(x, module, format!("x{module}")),
                Letter::new(y, module, format!("y{module}")),
                Letter::shared(alpha, "alpha"),
            ],
            transitions: vec![
                (0, LetterId(x), 0),
                (0, LetterId(alpha), 1),
                (1, LetterId(y), 1),
            ],
        };
        Automaton::from_spec(spec, LetterPolicy::UniquePerTransition).unwrap()
    }

    #[test]
    fn loops_shuffle_to_one_state() {
        let (a, c) = (loops(&[0], 0), loops(&[2], 1));
        let p = build_shuffle_automaton(&[&a, &c]).unwrap();
        assert_eq!(p.base.num_states(), 1);
        assert_eq!(p.base.num_transitions(), 2);
    }

    #[test]
    fn ab_shuffle_cde_has_ten_words() {
        let ab = word_automaton(&[0, 1], 0);
        let cde = word_automaton(&[2, 3, 4], 1);
        let p = build_shuffle_automaton(&[&ab, &cde]).unwrap();
        let words = enumerate_traces(&p.base, 5).unwrap();
        let names: Vec<String> = words
            .iter()
            .map(|w| w.iter().map(|l| (b'a' + l.0 as u8) as char).collect())
            .collect();
        let mut expected = vec![
            "abcde", "acbde", "acdbe", "acdeb", "cabde", "cadbe", "cadeb", "cdabe", "cdaeb",
            "cdeab",
        ];
        expected.sort_unstable();
        assert_eq!(names, expected);
    }

    #[test]
    fn product_size_is_bounded_by_factor_product() {
        let a = word_automaton(&[0], 0);
        let b = word_automaton(&[1, 2], 1);
        let c = word_automaton(&[3, 4, 5], 2);
        let p = build_shuffle_automaton(&[&a, &b, &c]).unwrap();
        assert!(p.base.num_states() <= 24);
        assert_eq!(p.base.num_states(), 24);
    }

    #[test]
    fn shared_letter_is_rejected() {
        let a = loops(&[0, 1], 0);
        let b = loops(&[1], 1);
        assert_eq!(
            build_shuffle_automaton(&[&a, &b]),
            Err(ProductError::SharedLetter {
                letter: LetterId(1),
                first: 0,
                second: 1
            })
        );
    }

    #[test]
    fn sync_product_of_two_x_alpha_y() {
        let a = x_alpha_y(0, 1, 9, 0);
        let b = x_alpha_y(2, 3, 9, 1);
        let p = build_sync_product(&[&a, &b], LetterId(9)).unwrap();
        assert_eq!(p.base.num_states(), 2);
        let alpha_edges: Vec<_> = p.base.edges().filter(|e| e.1 == LetterId(9)).collect();
        assert_eq!(alpha_edges.len(), 1);
        let (s, _, t) = alpha_edges[0];
        assert_eq!(p.factor_map[s], vec![0, 0]);
        assert_eq!(p.factor_map[t], vec![1, 1]);
        let words = enumerate_traces(&p.base, 2).unwrap();
        assert_eq!(words.len(), 8);
    }

    #[test]
    fn single_factor_sync_product_is_isomorphic() {
        let a = x_alpha_y(0, 1, 9, 0);
        let p = build_sync_product(&[&a], LetterId(9)).unwrap();
        assert_eq!(p.base.num_states(), 2);
        assert_eq!(p.base.num_transitions(), 3);
        for n in 0..6 {
            assert_eq!(
                enumerate_traces(&p.base, n).unwrap(),
                enumerate_traces(&a, n).unwrap()
            );
        }
    }

    #[test]
    fn alpha_only_factors_accept_alpha() {
        let only_alpha = || {
            let spec = AutomatonSpec {
                num_states: 2,
                initial: 0,
                finals: vec![0, 1],
                alphabet: vec![Letter::shared(9, "alpha")],
                transitions: vec![(0, LetterId(9), 1)],
            };
            Automaton::from_spec(spec, LetterPolicy::UniquePerTransition).unwrap()
        };
        let (a, b) = (only_alpha(), only_alpha());
        let p = build_sync_product(&[&a, &b], LetterId(9)).unwrap();
        assert_eq!(
            enumerate_traces(&p.base, 1).unwrap(),
            vec![vec![LetterId(9)]]
        );
        assert!(enumerate_traces(&p.base, 2).unwrap().is_empty());
    }

    #[test]
    fn sync_multiplicity_is_checked() {
        let a = loops(&[0], 0);
        let b = x_alpha_y(2, 3, 9, 1);
        assert_eq!(
            build_sync_product(&[&b, &a], LetterId(9)),
            Err(ProductError::SyncMultiplicity {
                factor: 1,
                count: 0
            })
        );
    }

    #[test]
    fn enumeration_guard() {
        let a = loops(&[0, 1], 0);
        assert_eq!(
            enumerate_traces(&a, 20),
            Err(ProductError::TooManyWords {
                count: BigUint::from(1u32 << 20)
            })
        );
        assert_eq!(
            enumerate_traces(&a, 0).unwrap(),
            vec![Vec::<LetterId>::new()]
        );
    }
}
