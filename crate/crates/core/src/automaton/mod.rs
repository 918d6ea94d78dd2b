//! Letter-labelled finite automata.
//!
//! An [`Automaton`] is the 5-tuple `(X, Q, q0, F, Δ)`: an alphabet of
//! [`Letter`]s, densely numbered states, an initial state, a set of final
//! states and a transition relation stored as per-state adjacency lists.
//! Automata are built from an [`AutomatonSpec`] (the raw, unchecked parts),
//! validated once, and immutable afterwards.

mod growth;
mod text;

use std::collections::{BTreeMap, HashMap, VecDeque};
use std::fmt;

use thiserror::Error;

pub use growth::{check_growth_conditions, GrowthDiagnostics};
pub use text::{parse_automaton, ParseAutomatonError};

/// Dense state index.
pub type StateId = usize;

/// Globally unique letter identifier.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LetterId(pub u32);

impl fmt::Display for LetterId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// Which module a letter belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum LetterOwner {
    Module(usize),
    /// The synchronization letter shared by every module.
    Shared,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Letter {
    pub id: LetterId,
    pub owner: LetterOwner,
    /// Human readable name, e.g. `timer.cmd1.act1`.
    pub display: String,
}

impl Letter {
    pub fn new(id: u32, module: usize, display: impl Into<String>) -> Self {
        Letter {
            id: LetterId(id),
            owner: LetterOwner::Module(module),
            display: display.into(),
        }
    }

    pub fn shared(id: u32, display: impl Into<String>) -> Self {
        Letter {
            id: LetterId(id),
            owner: LetterOwner::Shared,
            display: display.into(),
        }
    }

    pub fn module(&self) -> Option<usize> {
        match self.owner {
            LetterOwner::Module(m) => Some(m),
            LetterOwner::Shared => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Transition {
    pub letter: LetterId,
    pub target: StateId,
}

/// How strictly letters must identify transitions.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LetterPolicy {
    /// Every transition carries its own letter, as produced by flattening a
    /// module. Only the shared synchronization letter may repeat.
    UniquePerTransition,
    /// Letters may label many transitions (product automata), but each
    /// (state, letter) pair still has at most one target.
    Deterministic,
}

/// A structural problem found by [`validate_automaton`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Violation {
    InitialOutOfRange {
        initial: StateId,
    },
    FinalOutOfRange {
        state: StateId,
    },
    DanglingState {
        source: StateId,
        letter: LetterId,
        target: StateId,
    },
    UnknownLetter {
        letter: LetterId,
    },
    RepeatedDeclaration {
        letter: LetterId,
    },
    DuplicateLetter {
        letter: LetterId,
    },
    NondeterministicLetter {
        state: StateId,
        letter: LetterId,
    },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::InitialOutOfRange { initial } => {
                write!(f, "initial state {initial} does not exist")
            }
            Violation::FinalOutOfRange { state } => write!(f, "final state {state} does not exist"),
            Violation::DanglingState {
                source,
                letter,
                target,
            } => {
                write!(
                    f,
                    "dangling state in transition {source} --{letter}--> {target}"
                )
            }
            Violation::UnknownLetter { letter } => {
                write!(f, "letter {letter} is not part of the alphabet")
            }
            Violation::RepeatedDeclaration { letter } => {
                write!(f, "letter {letter} is declared more than once")
            }
            Violation::DuplicateLetter { letter } => {
                write!(f, "duplicate letter {letter} labels several transitions")
            }
            Violation::NondeterministicLetter { state, letter } => {
                write!(
                    f,
                    "state {state} has several transitions on letter {letter}"
                )
            }
        }
    }
}

#[derive(Debug, Error)]
pub enum AutomatonError {
    #[error("invalid automaton: {}", join_violations(.0))]
    Invalid(Vec<Violation>),
}

fn join_violations(v: &[Violation]) -> String {
    v.iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join("; ")
}

/// The unchecked parts of an automaton.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct AutomatonSpec {
    pub num_states: usize,
    pub initial: StateId,
    pub finals: Vec<StateId>,
    pub alphabet: Vec<Letter>,
    pub transitions: Vec<(StateId, LetterId, StateId)>,
}

/// Returns every violated structural invariant of `spec`; empty when valid.
pub fn validate_automaton(spec: &AutomatonSpec, policy: LetterPolicy) -> Vec<Violation> {
    let mut out = Vec::new();
    if spec.initial >= spec.num_states {
        out.push(Violation::InitialOutOfRange {
            initial: spec.initial,
        });
    }
    for &f in &spec.finals {
        if f >= spec.num_states {
            out.push(Violation::FinalOutOfRange { state: f });
        }
    }

    let mut shared = HashMap::new();
    for l in &spec.alphabet {
        if shared
            .insert(l.id, l.owner == LetterOwner::Shared)
            .is_some()
        {
            out.push(Violation::RepeatedDeclaration { letter: l.id });
        }
    }

    let mut by_letter: BTreeMap<LetterId, Vec<StateId>> = BTreeMap::new();
    for &(src, letter, dst) in &spec.transitions {
        if src >= spec.num_states || dst >= spec.num_states {
            out.push(Violation::DanglingState {
                source: src,
                letter,
                target: dst,
            });
        }
        if !shared.contains_key(&letter) {
            out.push(Violation::UnknownLetter { letter });
        }
        by_letter.entry(letter).or_default().push(src);
    }

    for (letter, mut sources) in by_letter {
        if sources.len() < 2 {
            continue;
        }
        sources.sort_unstable();
        let distinct_sources = sources.windows(2).any(|w| w[0] != w[1]);
        let is_shared = shared.get(&letter).copied().unwrap_or(false);
        if policy == LetterPolicy::UniquePerTransition && distinct_sources && !is_shared {
            out.push(Violation::DuplicateLetter { letter });
        }
        let mut i = 0;
        while i < sources.len() {
            let mut j = i + 1;
            while j < sources.len() && sources[j] == sources[i] {
                j += 1;
            }
            if j - i > 1 {
                out.push(Violation::NondeterministicLetter {
                    state: sources[i],
                    letter,
                });
            }
            i = j;
        }
    }
    out
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Automaton {
    alphabet: Vec<Letter>,
    initial: StateId,
    finals: Vec<bool>,
    transitions: Vec<Vec<Transition>>,
}

impl Automaton {
    /// Validates `spec` and builds the automaton. Transitions keep their
    /// order of appearance within each source state.
    pub fn from_spec(spec: AutomatonSpec, policy: LetterPolicy) -> Result<Self, AutomatonError> {
        let violations = validate_automaton(&spec, policy);
        if !violations.is_empty() {
            return Err(AutomatonError::Invalid(violations));
        }
        Ok(Self::from_spec_unchecked(spec))
    }

    pub(crate) fn from_spec_unchecked(spec: AutomatonSpec) -> Self {
        let mut finals = vec![false; spec.num_states];
        for f in spec.finals {
            finals[f] = true;
        }
        let mut transitions = vec![Vec::new(); spec.num_states];
        for (src, letter, target) in spec.transitions {
            transitions[src].push(Transition { letter, target });
        }
        let mut alphabet = spec.alphabet;
        alphabet.sort_by_key(|l| l.id);
        Automaton {
            alphabet,
            initial: spec.initial,
            finals,
            transitions,
        }
    }

    pub fn to_spec(&self) -> AutomatonSpec {
        AutomatonSpec {
            num_states: self.num_states(),
            initial: self.initial,
            finals: self.finals().collect(),
            alphabet: self.alphabet.clone(),
            transitions: self.edges().collect(),
        }
    }

    /// Re-checks the invariants of an already built automaton.
    pub fn validate(&self, policy: LetterPolicy) -> Vec<Violation> {
        validate_automaton(&self.to_spec(), policy)
    }

    pub fn num_states(&self) -> usize {
        self.transitions.len()
    }

    pub fn num_transitions(&self) -> usize {
        self.transitions.iter().map(Vec::len).sum()
    }

    pub fn initial(&self) -> StateId {
        self.initial
    }

    pub fn is_final(&self, s: StateId) -> bool {
        self.finals[s]
    }

    pub fn finals(&self) -> impl Iterator<Item = StateId> + '_ {
        self.finals
            .iter()
            .enumerate()
            .filter(|(_, &f)| f)
            .map(|(s, _)| s)
    }

    pub fn transitions(&self, s: StateId) -> &[Transition] {
        &self.transitions[s]
    }

    /// All transitions as `(source, letter, target)` triples.
    pub fn edges(&self) -> impl Iterator<Item = (StateId, LetterId, StateId)> + '_ {
        self.transitions
            .iter()
            .enumerate()
            .flat_map(|(s, ts)| ts.iter().map(move |t| (s, t.letter, t.target)))
    }

    /// Letters sorted by id.
    pub fn alphabet(&self) -> &[Letter] {
        &self.alphabet
    }

    pub fn letter(&self, id: LetterId) -> Option<&Letter> {
        self.alphabet
            .binary_search_by_key(&id, |l| l.id)
            .ok()
            .map(|i| &self.alphabet[i])
    }

    pub fn contains_letter(&self, id: LetterId) -> bool {
        self.letter(id).is_some()
    }

    /// The target of the transition from `s` labelled `letter`, if any.
    pub fn step(&self, s: StateId, letter: LetterId) -> Option<StateId> {
        self.transitions[s]
            .iter()
            .find(|t| t.letter == letter)
            .map(|t| t.target)
    }

    /// Runs `word` from the initial state and returns the visited states,
    /// or `None` if some letter cannot be read.
    pub fn run(&self, word: &[LetterId]) -> Option<Vec<StateId>> {
        let mut states = Vec::with_capacity(word.len() + 1);
        let mut s = self.initial;
        states.push(s);
        for &l in word {
            s = self.step(s, l)?;
            states.push(s);
        }
        Some(states)
    }

    pub fn accepts(&self, word: &[LetterId]) -> bool {
        self.run(word)
            .is_some_and(|states| self.finals[*states.last().unwrap()])
    }

    /// States reachable from the initial state.
    pub fn reachable(&self) -> Vec<bool> {
        let mut seen = vec![false; self.num_states()];
        let mut queue = VecDeque::from([self.initial]);
        seen[self.initial] = true;
        while let Some(s) = queue.pop_front() {
            for t in &self.transitions[s] {
                if !seen[t.target] {
                    seen[t.target] = true;
                    queue.push_back(t.target);
                }
            }
        }
        seen
    }

    /// Drops unreachable states, renumbering the rest in breadth-first order
    /// from the initial state. The alphabet is kept unchanged.
    pub fn trim(&self) -> Automaton {
        let mut index = vec![usize::MAX; self.num_states()];
        let mut order = vec![self.initial];
        index[self.initial] = 0;
        let mut head = 0;
        while head < order.len() {
            let s = order[head];
            head += 1;
            for t in &self.transitions[s] {
                if index[t.target] == usize::MAX {
                    index[t.target] = order.len();
                    order.push(t.target);
                }
            }
        }
        let transitions = order
            .iter()
            .map(|&s| {
                self.transitions[s]
                    .iter()
                    .map(|t| Transition {
                        letter: t.letter,
                        target: index[t.target],
                    })
                    .collect()
            })
            .collect();
        let finals = order.iter().map(|&s| self.finals[s]).collect();
        Automaton {
            alphabet: self.alphabet.clone(),
            initial: 0,
            finals,
            transitions,
        }
    }

    /// A copy with a different initial state and set of final states,
    /// with `removed` letters erased, trimmed to the reachable part.
    pub fn rerooted(
        &self,
        initial: StateId,
        finals: &[StateId],
        removed: &[LetterId],
    ) -> Automaton {
        let mut is_final = vec![false; self.num_states()];
        for &f in finals {
            is_final[f] = true;
        }
        let transitions = self
            .transitions
            .iter()
            .map(|ts| {
                ts.iter()
                    .filter(|t| !removed.contains(&t.letter))
                    .copied()
                    .collect()
            })
            .collect();
        let alphabet = self
            .alphabet
            .iter()
            .filter(|l| !removed.contains(&l.id))
            .cloned()
            .collect();
        Automaton {
            alphabet,
            initial,
            finals: is_final,
            transitions,
        }
        .trim()
    }
}
