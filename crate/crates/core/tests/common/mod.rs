//! Fixtures and brute-force oracles shared by the integration tests.
#![allow(dead_code)]

use std::sync::Arc;

use num_bigint::BigUint;
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use unitrace::{Automaton, AutomatonSpec, Letter, LetterId, LetterPolicy, StateId};

pub const TIMERS: &str = "module timer

t : [0..1] init 0;

[tic] t=0 -> t'=1;
[tac] t=1 -> t'=0;

endmodule

module on_tic

state1 : [0..1000] init 0;

[tic] state1<1000 -> state1'=(state1+2);
[tic] state1>=1000 -> state1'=0;

endmodule

module on_tac

state2 : [1..1001] init 1;

[tac] state2<1001 -> state2'=(state2+2);
[tac] state2>=1001 -> state2'=1;

endmodule
";

/// Reaching `x = 3` takes three advances in a row; each state has two
/// successors.
pub const PLANTED: &str = "module m
x : [0..3] init 0;
x<3 -> (x'=x+1) + (x'=0);
x=3 -> (x'=0) + (x'=0);
endmodule
";

pub fn automaton(
    num_states: usize,
    finals: &[StateId],
    alphabet: Vec<Letter>,
    edges: &[(StateId, u32, StateId)],
    policy: LetterPolicy,
) -> Arc<Automaton> {
    let spec = AutomatonSpec {
        num_states,
        initial: 0,
        finals: finals.to_vec(),
        alphabet,
        transitions: edges.iter().map(|&(s, l, t)| (s, LetterId(l), t)).collect(),
    };
    Arc::new(Automaton::from_spec(spec, policy).unwrap())
}

/// A module automaton whose transition `k` reads letter `first + k`.
pub fn module(
    module: usize,
    first: u32,
    num_states: usize,
    finals: &[StateId],
    edges: &[(StateId, StateId)],
) -> Arc<Automaton> {
    let alphabet = (0..edges.len() as u32)
        .map(|k| Letter::new(first + k, module, format!("m{module}l{k}")))
        .collect();
    let labelled: Vec<_> = edges
        .iter()
        .enumerate()
        .map(|(k, &(s, t))| (s, first + k as u32, t))
        .collect();
    automaton(
        num_states,
        finals,
        alphabet,
        &labelled,
        LetterPolicy::UniquePerTransition,
    )
}

/// Accepts exactly the word of the given length, one letter per step.
pub fn chain(module_index: usize, first: u32, names: &[&str]) -> Arc<Automaton> {
    let k = names.len();
    let alphabet = names
        .iter()
        .enumerate()
        .map(|(i, n)| Letter::new(first + i as u32, module_index, *n))
        .collect();
    let edges: Vec<_> = (0..k)
        .map(|i| (i as StateId, first + i as u32, i as StateId + 1))
        .collect();
    automaton(
        k + 1,
        &[k as StateId],
        alphabet,
        &edges,
        LetterPolicy::UniquePerTransition,
    )
}

/// `0 -a-> 0`, `0 -b-> 1`, `1 -c-> 0`, all final: Fibonacci counts.
pub fn fibonacci(module_index: usize, first: u32) -> Arc<Automaton> {
    module(module_index, first, 2, &[0, 1], &[(0, 0), (0, 1), (1, 0)])
}

/// `p -α-> q` with an `x` loop on `p` and a `y` loop on `q`.
pub fn xay(module_index: usize, alpha: u32) -> Arc<Automaton> {
    let x = alpha + 1 + 10 * module_index as u32;
    let alphabet = vec![
        Letter::shared(alpha, "alpha"),
        Letter::new(x, module_index, format!("x{module_index}")),
        Letter::new(x + 1, module_index, format!("y{module_index}")),
    ];
    automaton(
        2,
        &[0, 1],
        alphabet,
        &[(0, alpha, 1), (0, x, 0), (1, x + 1, 1)],
        LetterPolicy::UniquePerTransition,
    )
}

/// A module with one `α` transition plus `edges` carrying private letters.
pub fn with_alpha(
    module_index: usize,
    alpha: u32,
    num_states: usize,
    alpha_edge: (StateId, StateId),
    edges: &[(StateId, StateId)],
) -> Arc<Automaton> {
    let first = alpha + 1 + 10 * module_index as u32;
    let mut alphabet = vec![Letter::shared(alpha, "alpha")];
    alphabet.extend(
        (0..edges.len() as u32)
            .map(|k| Letter::new(first + k, module_index, format!("m{module_index}l{k}"))),
    );
    let mut labelled = vec![(alpha_edge.0, alpha, alpha_edge.1)];
    labelled.extend(
        edges
            .iter()
            .enumerate()
            .map(|(k, &(s, t))| (s, first + k as u32, t)),
    );
    let finals: Vec<StateId> = (0..num_states as StateId).collect();
    automaton(
        num_states,
        &finals,
        alphabet,
        &labelled,
        LetterPolicy::UniquePerTransition,
    )
}

/// Random automaton with one letter per transition.
pub fn random_module(seed: u64, module_index: usize, max_states: usize) -> Arc<Automaton> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.gen_range(1..=max_states);
    let mut edges = Vec::new();
    for s in 0..n {
        for _ in 0..rng.gen_range(0..=3) {
            edges.push((s as StateId, rng.gen_range(0..n) as StateId));
        }
    }
    let mut finals: Vec<StateId> = (0..n as StateId).filter(|_| rng.gen_bool(0.5)).collect();
    if finals.is_empty() {
        finals.push(rng.gen_range(0..n) as StateId);
    }
    module(module_index, 100 * module_index as u32, n, &finals, &edges)
}

/// Random deterministic automaton over `letters` letters.
pub fn random_deterministic(seed: u64, max_states: usize, letters: u32) -> Arc<Automaton> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.gen_range(1..=max_states);
    let mut edges = Vec::new();
    for s in 0..n {
        for l in 0..letters {
            if rng.gen_bool(0.8) {
                edges.push((s as StateId, l, rng.gen_range(0..n) as StateId));
            }
        }
    }
    let mut finals: Vec<StateId> = (0..n as StateId).filter(|_| rng.gen_bool(0.5)).collect();
    if finals.is_empty() {
        finals.push(0);
    }
    let alphabet = (0..letters)
        .map(|l| Letter::new(l, 0, format!("{}", (b'a' + l as u8) as char)))
        .collect();
    automaton(n, &finals, alphabet, &edges, LetterPolicy::Deterministic)
}

/// Accepted words of every length up to `max`, by trying every word over
/// the alphabet.
pub fn brute_force_words(a: &Automaton, max: usize) -> Vec<u64> {
    let letters: Vec<LetterId> = a.alphabet().iter().map(|l| l.id).collect();
    let mut out = vec![0u64; max + 1];
    let mut word = Vec::with_capacity(max);
    fn go(
        a: &Automaton,
        letters: &[LetterId],
        word: &mut Vec<LetterId>,
        max: usize,
        out: &mut [u64],
    ) {
        if a.accepts(word) {
            out[word.len()] += 1;
        }
        if word.len() == max {
            return;
        }
        for &l in letters {
            word.push(l);
            go(a, letters, word, max, out);
            word.pop();
        }
    }
    go(a, &letters, &mut word, max, &mut out);
    out
}

/// Accepting paths of every length up to `max`, by depth-first search.
pub fn brute_force_paths(a: &Automaton, max: usize) -> Vec<u64> {
    let mut out = vec![0u64; max + 1];
    fn go(a: &Automaton, s: StateId, depth: usize, max: usize, out: &mut [u64]) {
        if a.is_final(s) {
            out[depth] += 1;
        }
        if depth == max {
            return;
        }
        for t in a.transitions(s) {
            go(a, t.target, depth + 1, max, out);
        }
    }
    go(a, a.initial(), 0, max, &mut out);
    out
}

pub fn binomial(n: usize, k: usize) -> BigUint {
    if k > n {
        return BigUint::zero();
    }
    let mut b = BigUint::one();
    for i in 0..k {
        b = b * BigUint::from(n - i) / BigUint::from(i + 1);
    }
    b
}

/// Shuffle counts by plain convolution, one factor at a time.
pub fn convolve_shuffle(factors: &[Vec<BigUint>], n: usize) -> Vec<BigUint> {
    let mut acc: Vec<BigUint> = (0..=n)
        .map(|k| {
            if k == 0 {
                BigUint::one()
            } else {
                BigUint::zero()
            }
        })
        .collect();
    for f in factors {
        acc = (0..=n)
            .map(|k| (0..=k).map(|a| binomial(k, a) * &f[a] * &acc[k - a]).sum())
            .collect();
    }
    acc
}

pub fn language_counts(a: &Arc<Automaton>, n: usize) -> Vec<BigUint> {
    unitrace::build_count_table(Arc::clone(a), n).language_counts()
}
