//! Uniform random sampling of execution traces in systems of communicating
//! reactive modules, without building the global product model.
//!
//! The pipeline:
//!
//! * [`rm`] parses the module language, computes the step semantics and
//!   flattens each module to an [`Automaton`] whose letters identify
//!   transitions.
//! * [`counting`] builds exact word-count tables and estimates the dominant
//!   growth pair `(C, ω)` of `ℓ(n) ~ C·ω^n`.
//! * [`uniform`] draws words of a fixed length uniformly from one automaton.
//! * [`shuffle`] and [`sync`] combine per-module draws into uniformly
//!   distributed global traces, for free interleavings and for systems with
//!   one synchronization letter.
//! * [`product`] builds the explicit products, used as brute-force
//!   generators and as test oracles.
//! * [`estimator`] runs plain random walks and the Monte-Carlo estimator of
//!   the error-detection probability.
//! * [`stats`] checks sampled histograms against exact supports.

pub mod automaton;
pub mod counting;
pub mod estimator;
pub mod product;
pub mod rm;
pub mod rng;
pub mod shuffle;
pub mod stats;
pub mod sync;
pub mod system;
pub mod uniform;

pub use automaton::{
    check_growth_conditions, parse_automaton, validate_automaton, Automaton, AutomatonSpec,
    GrowthDiagnostics, Letter, LetterId, LetterOwner, LetterPolicy, StateId, Transition, Violation,
};
pub use counting::{
    build_count_table, count_words, estimate_asymptotics, AsymptoticParams, CountTable,
};
pub use estimator::{
    gaa_estimate, random_walk, Estimate, EstimationParams, StatePredicate, Verdict, WalkPath,
};
pub use product::{
    build_shuffle_automaton, build_sync_product, enumerate_traces, ProductAutomaton,
};
pub use rm::{parse_system, successors, GlobalState, ModuleSystem, StepAction};
pub use rng::RngHandle;
pub use shuffle::{sample_shuffle_trace, GlobalTrace, LengthVector, SamplingMode, ShuffleSampler};
pub use stats::{chi_square_uniform, tv_distance, ChiSquare, Histogram};
pub use sync::{build_sync_count_tables, sample_sync_trace, SyncSampler, SyncSkeleton};
pub use system::{CompiledSystem, Sampler, SystemError};
pub use uniform::{draw_uniform_word, TraceWord};
