use std::collections::{BTreeSet, HashMap, VecDeque};

use thiserror::Error;

use super::eval::{eval_bool, EvalError};
use super::semantics::{apply_action, CommandChoice, GlobalState};
use super::ModuleSystem;
use crate::automaton::{
    Automaton, AutomatonError, AutomatonSpec, Letter, LetterId, LetterPolicy, StateId,
};

#[derive(Debug, Error)]
pub enum FlattenError {
    #[error("module `{module}` reads foreign variable `{variable}` and no valuation was supplied for it")]
    ForeignVariable { module: String, variable: String },
    #[error("command {command} of module `{module}`: {source}")]
    Command {
        module: String,
        command: usize,
        source: EvalError,
    },
    #[error("module `{module}` uses label `{label}`, but only `{sync}` can be synchronized")]
    UnsupportedLabel {
        module: String,
        label: String,
        sync: String,
    },
    #[error("module `{module}` has several `{label}` transitions from one state")]
    AmbiguousSync { module: String, label: String },
    #[error(transparent)]
    Automaton(#[from] AutomatonError),
}

/// Hands out globally unique letters across all flattened modules.
#[derive(Clone, Debug, Default)]
pub struct LetterPool {
    letters: Vec<Letter>,
}

impl LetterPool {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn fresh(&mut self, module: usize, display: impl Into<String>) -> LetterId {
        let id = self.letters.len() as u32;
        self.letters.push(Letter::new(id, module, display));
        LetterId(id)
    }

    pub fn shared(&mut self, display: impl Into<String>) -> LetterId {
        let id = self.letters.len() as u32;
        self.letters.push(Letter::shared(id, display));
        LetterId(id)
    }

    pub fn letters(&self) -> &[Letter] {
        &self.letters
    }

    pub fn get(&self, id: LetterId) -> Option<&Letter> {
        self.letters.get(id.0 as usize)
    }
}

/// Values used for variables of other modules.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub enum ReadView {
    /// Guards and actions must be local.
    #[default]
    Reject,
    /// Foreign variables are frozen at these values.
    Fixed(GlobalState),
}

#[derive(Clone, Debug, Default)]
pub struct FlattenOptions {
    pub read_view: ReadView,
    /// Commands with this label are drawn with the given shared letter.
    /// Without it, labels are ignored and every transition gets a fresh
    /// letter.
    pub sync: Option<(String, LetterId)>,
}

/// A module as an automaton over its local valuations.
#[derive(Clone, Debug)]
pub struct FlatModule {
    pub module: usize,
    pub automaton: Automaton,
    /// Local variable values of each state.
    pub valuations: Vec<Vec<i64>>,
    choices: HashMap<(StateId, LetterId), CommandChoice>,
}

impl FlatModule {
    /// The command alternative behind the transition reading `letter` in `state`.
    pub fn choice(&self, state: StateId, letter: LetterId) -> Option<CommandChoice> {
        self.choices.get(&(state, letter)).copied()
    }
}

/// Builds the automaton of reachable local valuations of module `index`.
/// Every state is final.
pub fn flatten_module(
    sys: &ModuleSystem,
    index: usize,
    options: &FlattenOptions,
    pool: &mut LetterPool,
) -> Result<FlatModule, FlattenError> {
    let module = &sys.modules[index];
    let offset = sys.offset(index);
    let width = module.variables.len();
    let local = offset..offset + width;

    let mut base = match &options.read_view {
        ReadView::Fixed(state) => state.0.clone(),
        ReadView::Reject => {
            let mut read = BTreeSet::new();
            for c in &module.commands {
                c.guard.variables(&mut read);
                for a in c.actions.iter().flatten() {
                    a.value.variables(&mut read);
                }
            }
            if let Some(&v) = read.iter().find(|v| !local.contains(v)) {
                return Err(FlattenError::ForeignVariable {
                    module: module.name.clone(),
                    variable: sys.variable(v).1.name.clone(),
                });
            }
            GlobalState::initial(sys).0
        }
    };

    let sync = options.sync.as_ref();
    for c in &module.commands {
        if let (Some(label), Some((sync_label, _))) = (&c.label, sync) {
            if label != sync_label {
                return Err(FlattenError::UnsupportedLabel {
                    module: module.name.clone(),
                    label: label.clone(),
                    sync: sync_label.clone(),
                });
            }
        }
    }

    let init: Vec<i64> = module.variables.iter().map(|v| v.init).collect();
    let mut index_of: HashMap<Vec<i64>, StateId> = HashMap::from([(init.clone(), 0)]);
    let mut valuations = vec![init];
    let mut transitions = Vec::new();
    let mut choices = HashMap::new();
    let mut alphabet = Vec::new();
    let mut queue = VecDeque::from([0usize]);

    while let Some(s) = queue.pop_front() {
        base[local.clone()].copy_from_slice(&valuations[s]);
        let mut sync_seen = false;
        for (ci, c) in module.commands.iter().enumerate() {
            let wrap = |source| FlattenError::Command {
                module: module.name.clone(),
                command: ci + 1,
                source,
            };
            if !eval_bool(&c.guard, &base).map_err(wrap)? {
                continue;
            }
            let shared = match (sync, &c.label) {
                (Some((label, id)), Some(l)) if l == label => Some((label, *id)),
                _ => None,
            };
            for (ai, action) in c.actions.iter().enumerate() {
                let mut next = base.clone();
                apply_action(sys, action, &base, &mut next).map_err(wrap)?;
                let values = next[local.clone()].to_vec();
                let target = match index_of.get(&values) {
                    Some(&t) => t,
                    None => {
                        let t = valuations.len();
                        index_of.insert(values.clone(), t);
                        valuations.push(values);
                        queue.push_back(t);
                        t
                    }
                };
                let letter = match shared {
                    Some((label, id)) => {
                        if sync_seen {
                            return Err(FlattenError::AmbiguousSync {
                                module: module.name.clone(),
                                label: label.clone(),
                            });
                        }
                        sync_seen = true;
                        id
                    }
                    None => {
                        let id = pool.fresh(
                            index,
                            format!("{}.cmd{}.act{}", module.name, ci + 1, ai + 1),
                        );
                        alphabet.push(pool.get(id).expect("letter was just allocated").clone());
                        id
                    }
                };
                transitions.push((s, letter, target));
                choices.insert(
                    (s, letter),
                    CommandChoice {
                        module: index,
                        command: ci,
                        alternative: ai,
                    },
                );
            }
        }
    }

    if let Some((_, id)) = sync {
        if transitions.iter().any(|t| t.1 == *id) {
            alphabet.push(
                pool.get(*id)
                    .cloned()
                    .unwrap_or_else(|| Letter::shared(id.0, "sync")),
            );
        }
    }
    let spec = AutomatonSpec {
        num_states: valuations.len(),
        initial: 0,
        finals: (0..valuations.len()).collect(),
        alphabet,
        transitions,
    };
    let automaton = Automaton::from_spec(spec, LetterPolicy::UniquePerTransition)?;
    Ok(FlatModule {
        module: index,
        automaton,
        valuations,
        choices,
    })
}
