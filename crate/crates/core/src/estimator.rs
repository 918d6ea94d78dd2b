//! Random walks over the global step semantics and the Monte-Carlo estimator
//! of the probability that a depth-k walk detects an error.

use rayon::prelude::*;
use thiserror::Error;

use crate::rm::{eval_bool, successors, EvalError, Expr, GlobalState, ModuleSystem, StepAction};
use crate::rng::RngHandle;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EstimatorError {
    #[error("epsilon must lie in (0, 1), got {0}")]
    Epsilon(f64),
    #[error("delta must lie in (0, 1), got {0}")]
    Delta(f64),
    #[error(transparent)]
    Eval(#[from] EvalError),
}

/// A finite walk: `states[0]` is the initial state and `actions[i]` leads
/// from `states[i]` to `states[i + 1]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WalkPath {
    pub states: Vec<GlobalState>,
    pub actions: Vec<StepAction>,
    /// The walk stopped before its depth because the last state has no
    /// successor.
    pub deadlocked: bool,
}

impl WalkPath {
    pub fn len(&self) -> usize {
        self.actions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.actions.is_empty()
    }

    /// The first `k` steps.
    pub fn prefix(&self, k: usize) -> WalkPath {
        let k = k.min(self.len());
        WalkPath {
            states: self.states[..=k].to_vec(),
            actions: self.actions[..k].to_vec(),
            deadlocked: self.deadlocked && k == self.len(),
        }
    }
}

/// Decides whether a path exhibits an error.
pub trait Verdict: Sync {
    fn detects(&self, path: &WalkPath) -> Result<bool, EvalError>;

    /// Declared monotone: a detecting path keeps detecting when extended.
    fn is_monotone(&self) -> bool {
        false
    }
}

impl<F> Verdict for F
where
    F: Fn(&WalkPath) -> bool + Sync,
{
    fn detects(&self, path: &WalkPath) -> Result<bool, EvalError> {
        Ok(self(path))
    }
}

/// Fires when some visited state satisfies a boolean expression, as in
/// `detect when x = 3`. Monotone by construction.
#[derive(Clone, Debug)]
pub struct StatePredicate {
    pub expr: Expr,
}

impl StatePredicate {
    pub fn new(expr: Expr) -> Self {
        StatePredicate { expr }
    }

    pub fn holds(&self, state: &GlobalState) -> Result<bool, EvalError> {
        eval_bool(&self.expr, &state.0)
    }
}

impl Verdict for StatePredicate {
    fn detects(&self, path: &WalkPath) -> Result<bool, EvalError> {
        for s in &path.states {
            if self.holds(s)? {
                return Ok(true);
            }
        }
        Ok(false)
    }

    fn is_monotone(&self) -> bool {
        true
    }
}

/// Walks at most `depth` steps from the initial state, picking uniformly
/// among the listed successors (duplicates count separately).
pub fn random_walk(
    sys: &ModuleSystem,
    depth: usize,
    rng: &mut RngHandle,
) -> Result<WalkPath, EvalError> {
    let mut state = GlobalState::initial(sys);
    let mut path = WalkPath {
        states: vec![state.clone()],
        actions: Vec::new(),
        deadlocked: false,
    };
    for _ in 0..depth {
        let mut succ = successors(sys, &state)?;
        if succ.is_empty() {
            path.deadlocked = true;
            break;
        }
        let (action, next) = succ.swap_remove(rng.index(succ.len()));
        path.actions.push(action);
        path.states.push(next.clone());
        state = next;
    }
    Ok(path)
}

/// One trial: 1 when the verdict fires on a fresh walk, else 0.
pub fn random_walk_trial(
    sys: &ModuleSystem,
    depth: usize,
    verdict: &dyn Verdict,
    rng: &mut RngHandle,
) -> Result<(bool, WalkPath), EvalError> {
    let path = random_walk(sys, depth, rng)?;
    Ok((verdict.detects(&path)?, path))
}

/// Accuracy `epsilon`, confidence `1 - delta`, walk depth `depth`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EstimationParams {
    pub epsilon: f64,
    pub delta: f64,
    pub depth: usize,
}

impl EstimationParams {
    pub fn new(epsilon: f64, delta: f64, depth: usize) -> Result<Self, EstimatorError> {
        if !(epsilon > 0.0 && epsilon < 1.0) {
            return Err(EstimatorError::Epsilon(epsilon));
        }
        if !(delta > 0.0 && delta < 1.0) {
            return Err(EstimatorError::Delta(delta));
        }
        Ok(EstimationParams {
            epsilon,
            delta,
            depth,
        })
    }

    /// `N = ceil(ln(2/δ) / (2ε²))`, the Hoeffding sample size.
    pub fn n_samples(&self) -> u64 {
        sample_size(self.epsilon, self.delta)
    }
}

pub fn sample_size(epsilon: f64, delta: f64) -> u64 {
    ((2.0 / delta).ln() / (2.0 * epsilon * epsilon)).ceil() as u64
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Estimate {
    pub depth: usize,
    pub detections: u64,
    pub trials: u64,
}

impl Estimate {
    pub fn value(&self) -> f64 {
        if self.trials == 0 {
            0.0
        } else {
            self.detections as f64 / self.trials as f64
        }
    }
}

/// Mean of `N` independent walk trials. Trial `i` uses `rng.fork(i)`, so the
/// result depends on the seed only, not on thread scheduling.
pub fn gaa_estimate(
    sys: &ModuleSystem,
    verdict: &dyn Verdict,
    params: &EstimationParams,
    rng: &RngHandle,
) -> Result<Estimate, EvalError> {
    run_trials(sys, verdict, params.depth, params.n_samples(), rng, 0)
}

fn run_trials(
    sys: &ModuleSystem,
    verdict: &dyn Verdict,
    depth: usize,
    trials: u64,
    rng: &RngHandle,
    stream: u64,
) -> Result<Estimate, EvalError> {
    let base = stream * trials;
    let detections = (0..trials)
        .into_par_iter()
        .map(|i| {
            let mut r = rng.fork(base + i);
            random_walk_trial(sys, depth, verdict, &mut r).map(|(hit, _)| u64::from(hit))
        })
        .try_reduce(|| 0, |a, b| Ok(a + b))?;
    Ok(Estimate {
        depth,
        detections,
        trials,
    })
}

/// Re-runs the estimator at each depth in `depths`, each with fresh
/// independent streams.
pub fn iterated_estimate(
    sys: &ModuleSystem,
    verdict: &dyn Verdict,
    epsilon: f64,
    delta: f64,
    depths: &[usize],
    rng: &RngHandle,
) -> Result<Vec<Estimate>, EstimatorError> {
    let mut out = Vec::with_capacity(depths.len());
    for (round, &depth) in depths.iter().enumerate() {
        let params = EstimationParams::new(epsilon, delta, depth)?;
        out.push(run_trials(
            sys,
            verdict,
            depth,
            params.n_samples(),
            rng,
            round as u64,
        )?);
    }
    Ok(out)
}

/// Samples walks and looks for a detecting prefix whose extension does not
/// detect. Returns the first such walk found.
pub fn check_monotone(
    sys: &ModuleSystem,
    verdict: &dyn Verdict,
    depth: usize,
    walks: usize,
    rng: &mut RngHandle,
) -> Result<Option<WalkPath>, EvalError> {
    for _ in 0..walks {
        let path = random_walk(sys, depth, rng)?;
        let mut fired = false;
        for k in 0..=path.len() {
            let now = verdict.detects(&path.prefix(k))?;
            if fired && !now {
                return Ok(Some(path.prefix(k)));
            }
            fired |= now;
        }
    }
    Ok(None)
}
