//! A module system compiled for sampling: parsed, flattened module by module
//! with one shared letter pool, and tied to a shuffle or synchronized sampler.

use std::collections::BTreeMap;
use std::sync::Arc;

use num_bigint::BigUint;
use num_rational::BigRational;
use thiserror::Error;

use crate::automaton::{Automaton, LetterId};
use crate::product::{build_shuffle_automaton, build_sync_product, ProductAutomaton, ProductError};
use crate::rm::{
    flatten_module, parse_system, successors, EvalError, FlatModule, FlattenError, FlattenOptions,
    GlobalState, LetterPool, ModuleSystem, ParseError, StepAction,
};
use crate::rng::RngHandle;
use crate::shuffle::{
    module_growth, sample_shuffle_trace, sample_shuffle_trace_with_probability, GlobalTrace,
    Growth, SamplingMode, ShuffleError, ShuffleSampler,
};
use crate::sync::{sample_sync_trace, sample_sync_trace_with_probability, SyncError, SyncSampler};

#[derive(Debug, Error)]
pub enum SystemError {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Flatten(#[from] FlattenError),
    #[error(transparent)]
    Shuffle(#[from] ShuffleError),
    #[error(transparent)]
    Sync(#[from] SyncError),
    #[error(transparent)]
    Product(#[from] ProductError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error("the system has no modules")]
    NoModules,
    #[error("synchronization label `{0}` is not used by any module")]
    UnknownSyncLabel(String),
    #[error(
        "label `{label}` is shared by modules {modules}; pass it as the synchronization label"
    )]
    UnsyncedLabel { label: String, modules: String },
    #[error("module `{module}` does not take part in synchronization `{label}`")]
    NotParticipating { module: String, label: String },
    #[error("letter {0} does not belong to this system")]
    UnknownLetter(LetterId),
    #[error("step {step}: letter `{letter}` is not enabled")]
    Disabled { step: usize, letter: String },
}

/// A parsed system with its flattened modules.
#[derive(Clone, Debug)]
pub struct CompiledSystem {
    source: ModuleSystem,
    pool: LetterPool,
    modules: Vec<FlatModule>,
    automata: Vec<Arc<Automaton>>,
    sync: Option<(String, LetterId)>,
}

/// One step of a replayed trace.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReplayedStep {
    pub letter: LetterId,
    pub action: StepAction,
    pub state: GlobalState,
}

impl CompiledSystem {
    pub fn from_source(source: &str, sync: Option<&str>) -> Result<Self, SystemError> {
        Self::compile(parse_system(source)?, sync)
    }

    /// Flattens every module. Labels shared by two or more modules must be
    /// the synchronization label, and every module must then use it.
    pub fn compile(source: ModuleSystem, sync: Option<&str>) -> Result<Self, SystemError> {
        if source.modules.is_empty() {
            return Err(SystemError::NoModules);
        }
        let mut declarers: BTreeMap<&str, Vec<&str>> = BTreeMap::new();
        for m in &source.modules {
            let mut labels: Vec<&str> = m
                .commands
                .iter()
                .filter_map(|c| c.label.as_deref())
                .collect();
            labels.sort_unstable();
            labels.dedup();
            for l in labels {
                declarers.entry(l).or_default().push(&m.name);
            }
        }
        if let Some(label) = sync {
            if !declarers.contains_key(label) {
                return Err(SystemError::UnknownSyncLabel(label.into()));
            }
        }
        for (label, modules) in &declarers {
            if modules.len() > 1 && Some(*label) != sync {
                return Err(SystemError::UnsyncedLabel {
                    label: label.to_string(),
                    modules: modules.join(", "),
                });
            }
        }

        let mut pool = LetterPool::new();
        let mut options = FlattenOptions::default();
        if let Some(label) = sync {
            let users = &declarers[label];
            if let Some(m) = source
                .modules
                .iter()
                .find(|m| !users.contains(&m.name.as_str()))
            {
                return Err(SystemError::NotParticipating {
                    module: m.name.clone(),
                    label: label.into(),
                });
            }
            options.sync = Some((label.to_string(), pool.shared(label)));
        }
        let modules = (0..source.modules.len())
            .map(|i| flatten_module(&source, i, &options, &mut pool))
            .collect::<Result<Vec<_>, _>>()?;
        let automata = modules
            .iter()
            .map(|f| Arc::new(f.automaton.clone()))
            .collect();
        Ok(CompiledSystem {
            source,
            pool,
            modules,
            automata,
            sync: options.sync,
        })
    }

    pub fn source(&self) -> &ModuleSystem {
        &self.source
    }

    pub fn modules(&self) -> &[FlatModule] {
        &self.modules
    }

    pub fn automata(&self) -> &[Arc<Automaton>] {
        &self.automata
    }

    pub fn sync_letter(&self) -> Option<LetterId> {
        self.sync.as_ref().map(|s| s.1)
    }

    pub fn sync_label(&self) -> Option<&str> {
        self.sync.as_ref().map(|s| s.0.as_str())
    }

    pub fn total_states(&self) -> usize {
        self.automata.iter().map(|a| a.num_states()).sum()
    }

    pub fn letter_name(&self, id: LetterId) -> Option<&str> {
        self.pool.get(id).map(|l| l.display.as_str())
    }

    /// Resolves a space-separated trace of display names. A name like
    /// `m.cmd1.act2` labels one transition per reachable state, so names are
    /// looked up along the run.
    pub fn parse_trace(&self, text: &str) -> Result<Vec<LetterId>, SystemError> {
        let mut current: Vec<_> = self.automata.iter().map(|a| a.initial()).collect();
        let mut out = Vec::new();
        for (step, name) in text.split_whitespace().enumerate() {
            let letter = if self.sync_label() == Some(name) {
                self.sync_letter().unwrap()
            } else {
                self.automata
                    .iter()
                    .zip(&current)
                    .flat_map(|(a, &s)| {
                        a.transitions(s)
                            .iter()
                            .map(move |t| t.letter)
                            .filter(move |&l| a.letter(l).is_some_and(|x| x.display == name))
                    })
                    .next()
                    .ok_or_else(|| SystemError::Disabled {
                        step,
                        letter: name.into(),
                    })?
            };
            for (s, a) in current.iter_mut().zip(&self.automata) {
                if let Some(t) = a.step(*s, letter) {
                    *s = t;
                }
            }
            out.push(letter);
        }
        Ok(out)
    }

    /// Space-separated display names.
    pub fn format_letters(&self, letters: &[LetterId]) -> String {
        letters
            .iter()
            .map(|&l| self.letter_name(l).unwrap_or("?"))
            .collect::<Vec<_>>()
            .join(" ")
    }

    /// `mode`, or the automatic choice for length `n`.
    pub fn resolve_mode(&self, mode: Option<SamplingMode>, n: usize) -> SamplingMode {
        mode.unwrap_or_else(|| SamplingMode::auto(self.total_states(), n))
    }

    pub fn sampler(&self, horizon: usize, mode: SamplingMode) -> Result<Sampler, SystemError> {
        Ok(match self.sync_letter() {
            None => Sampler::Shuffle(ShuffleSampler::new(&self.automata, horizon, mode)?),
            Some(alpha) => Sampler::Sync(Box::new(SyncSampler::new(
                &self.automata,
                alpha,
                horizon,
                mode,
            )?)),
        })
    }

    /// Dominant growth pair of every module's language.
    pub fn module_growth(&self, horizon: usize) -> Vec<Growth> {
        self.automata
            .iter()
            .map(|a| module_growth(a, horizon))
            .collect()
    }

    /// The explicit global automaton: shuffling automaton or synchronized
    /// product.
    pub fn product(&self) -> Result<ProductAutomaton, ProductError> {
        let factors: Vec<&Automaton> = self.automata.iter().map(|a| a.as_ref()).collect();
        match self.sync_letter() {
            None => build_shuffle_automaton(&factors),
            Some(alpha) => build_sync_product(&factors, alpha),
        }
    }

    /// Runs `letters` on the flattened modules and recovers the global
    /// states and the command alternatives fired.
    pub fn replay(&self, letters: &[LetterId]) -> Result<Vec<ReplayedStep>, SystemError> {
        let mut current: Vec<_> = self.automata.iter().map(|a| a.initial()).collect();
        let mut out = Vec::with_capacity(letters.len());
        for (step, &l) in letters.iter().enumerate() {
            let disabled = || SystemError::Disabled {
                step,
                letter: self.letter_name(l).unwrap_or("?").into(),
            };
            let movers: Vec<usize> = if Some(l) == self.sync_letter() {
                (0..self.modules.len()).collect()
            } else {
                let letter = self.pool.get(l).ok_or(SystemError::UnknownLetter(l))?;
                vec![letter.module().ok_or(SystemError::UnknownLetter(l))?]
            };
            let mut parts = Vec::with_capacity(movers.len());
            for &i in &movers {
                parts.push(self.modules[i].choice(current[i], l).ok_or_else(disabled)?);
                current[i] = self.automata[i].step(current[i], l).ok_or_else(disabled)?;
            }
            let first = &parts[0];
            let label = self.source.modules[first.module].commands[first.command]
                .label
                .clone();
            let state = GlobalState(
                self.modules
                    .iter()
                    .zip(&current)
                    .flat_map(|(f, &s)| f.valuations[s].iter().copied())
                    .collect(),
            );
            out.push(ReplayedStep {
                letter: l,
                action: StepAction { label, parts },
                state,
            });
        }
        Ok(out)
    }

    /// Checks a replayed trace step by step against the global semantics.
    pub fn conforms(&self, steps: &[ReplayedStep]) -> Result<bool, SystemError> {
        let mut state = GlobalState::initial(&self.source);
        for s in steps {
            if !successors(&self.source, &state)?
                .iter()
                .any(|(a, next)| *a == s.action && *next == s.state)
            {
                return Ok(false);
            }
            state = s.state.clone();
        }
        Ok(true)
    }
}

/// The sampler matching the system's shape.
#[derive(Debug)]
pub enum Sampler {
    Shuffle(ShuffleSampler),
    Sync(Box<SyncSampler>),
}

impl Sampler {
    pub fn mode(&self) -> SamplingMode {
        match self {
            Sampler::Shuffle(s) => s.mode(),
            Sampler::Sync(s) => s.tables().mode(),
        }
    }

    /// Exact number of traces of length `n`, when known.
    pub fn count(&self, n: usize) -> Option<&BigUint> {
        match self {
            Sampler::Shuffle(s) => s.count(n),
            Sampler::Sync(s) => s.tables().count(n),
        }
    }

    pub fn warnings(&self) -> &[String] {
        match self {
            Sampler::Shuffle(s) => s.warnings(),
            Sampler::Sync(s) => s.tables().warnings(),
        }
    }

    pub fn sample(&self, n: usize, rng: &mut RngHandle) -> Result<GlobalTrace, SystemError> {
        Ok(match self {
            Sampler::Shuffle(s) => sample_shuffle_trace(s, n, rng)?,
            Sampler::Sync(s) => sample_sync_trace(s, n, rng)?,
        })
    }

    /// A trace with the exact probability it was drawn with.
    pub fn sample_with_probability(
        &self,
        n: usize,
        rng: &mut RngHandle,
    ) -> Result<(GlobalTrace, BigRational), SystemError> {
        Ok(match self {
            Sampler::Shuffle(s) => sample_shuffle_trace_with_probability(s, n, rng)?,
            Sampler::Sync(s) => {
                let (t, _, p) = sample_sync_trace_with_probability(s, n, rng)?;
                (t, p)
            }
        })
    }
}
