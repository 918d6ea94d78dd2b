//! Uniform traces of systems synchronized on a single letter `α`.
//!
//! Each module has exactly one `α` transition `q1 -α-> q2`, which splits its
//! language into four `α`-free parts: `B` (initial to `q1`), `C` (`q2` to
//! `q1`), `E` (`q2` to a final state) and `T` (initial to a final state), so
//! that `S_i = B_i (α C_i)* α E_i ∪ T_i`. A global trace with `m`
//! synchronizations is `w_0 α w_1 α … α w_m` with `w_0` in the shuffle `B` of
//! the `B_i`, middle segments in `C`, `w_m` in `E`, or a word of `T` when
//! `m = 0`. With `b, c, e, t` the shuffle counts of these families,
//!
//! ```text
//! s(n, 0)          = t(n)
//! s(n, m, i0, im)  = b(i0) · e(im) · c^{*(m-1)}(n - m - i0 - im)    (m ≥ 1)
//! s(n, m)          = (b * e * c^{*(m-1)})(n - m)
//! s(n)             = Σ_m s(n, m)
//! ```
//!
//! where `*` is ordinary convolution and `c^{*0}` is the unit at 0.
//!
//! Sampling draws `m`, then `(i0, im)`, then the middle lengths, and fills
//! every segment with a uniform shuffle. In asymptotic mode the counts are
//! replaced by `C·ω^k` estimates and the middle lengths by a uniform
//! composition.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rayon::prelude::*;
use statrs::function::factorial::ln_binomial;
use thiserror::Error;

use crate::automaton::{Automaton, LetterId, StateId};
use crate::rng::RngHandle;
use crate::shuffle::{
    sample_shuffle_trace, sample_shuffle_trace_with_probability, GlobalTrace, SamplingMode,
    ShuffleError, ShuffleSampler,
};
use crate::uniform::{ratio, UniformError};

/// Redraws allowed in asymptotic mode before giving up on a length.
const MAX_REDRAWS: usize = 100_000;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SyncError {
    #[error("expected exactly one synchronization transition, found {count}")]
    AlphaMultiplicity { count: usize },
    #[error("module {module}: expected exactly one synchronization transition, found {count}")]
    ModuleAlpha { module: usize, count: usize },
    #[error("a synchronized system needs at least one module")]
    NoModules,
    #[error("length {n} exceeds the table horizon {horizon}")]
    OutOfRange { n: usize, horizon: usize },
    #[error("no synchronized trace of length {n}")]
    EmptyLanguage { n: usize },
    #[error("exact probabilities at length {n} need exact mode")]
    NotExact { n: usize },
    #[error("cannot split {total} into 0 parts")]
    NoParts { total: usize },
    #[error("no feasible skeleton of length {n} after {MAX_REDRAWS} draws")]
    Rejected { n: usize },
    #[error(transparent)]
    Shuffle(#[from] ShuffleError),
}

/// The four `α`-free languages of one module.
#[derive(Clone, Debug)]
pub struct Sublanguages {
    pub begin: Automaton,
    pub middle: Automaton,
    pub end: Automaton,
    pub total: Automaton,
    /// Source of the `α` transition.
    pub before: StateId,
    /// Target of the `α` transition.
    pub after: StateId,
}

impl Sublanguages {
    pub fn family(&self, f: Family) -> &Automaton {
        match f {
            Family::Begin => &self.begin,
            Family::Middle => &self.middle,
            Family::End => &self.end,
            Family::Total => &self.total,
        }
    }
}

/// Splits `a` around its only `α` transition.
pub fn extract_sublanguages(a: &Automaton, alpha: LetterId) -> Result<Sublanguages, SyncError> {
    let edges: Vec<_> = a.edges().filter(|e| e.1 == alpha).collect();
    let [(before, _, after)] = edges[..] else {
        return Err(SyncError::AlphaMultiplicity { count: edges.len() });
    };
    let finals: Vec<StateId> = a.finals().collect();
    let removed = [alpha];
    Ok(Sublanguages {
        begin: a.rerooted(a.initial(), &[before], &removed),
        middle: a.rerooted(after, &[before], &removed),
        end: a.rerooted(after, &finals, &removed),
        total: a.rerooted(a.initial(), &finals, &removed),
        before,
        after,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Family {
    Begin,
    Middle,
    End,
    Total,
}

impl Family {
    pub const ALL: [Family; 4] = [Family::Begin, Family::Middle, Family::End, Family::Total];

    fn index(self) -> usize {
        self as usize
    }
}

/// Number of synchronizations and the lengths `(i_0, …, i_m)` of the
/// `α`-free segments between them; `m + Σ i_k = n`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SyncSkeleton {
    pub m: usize,
    pub segments: Vec<usize>,
}

impl SyncSkeleton {
    pub fn len(&self) -> usize {
        self.m + self.segments.iter().sum::<usize>()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn family(&self, k: usize) -> Family {
        if self.m == 0 {
            Family::Total
        } else if k == 0 {
            Family::Begin
        } else if k == self.m {
            Family::End
        } else {
            Family::Middle
        }
    }
}

fn convolve(x: &[BigUint], y: &[BigUint], len: usize) -> Vec<BigUint> {
    (0..len)
        .into_par_iter()
        .map(|q| {
            (0..=q)
                .filter(|&a| {
                    a < x.len() && q - a < y.len() && !x[a].is_zero() && !y[q - a].is_zero()
                })
                .fold(BigUint::zero(), |acc, a| acc + &x[a] * &y[q - a])
        })
        .collect()
}

#[derive(Debug)]
struct ExactTables {
    b: Vec<BigUint>,
    c: Vec<BigUint>,
    e: Vec<BigUint>,
    be: Vec<BigUint>,
    /// `cpow[j][q] = c^{*j}(q)` for `q < horizon - j`.
    cpow: Vec<Vec<BigUint>>,
    /// `s[n][m] = s(n, m)`.
    s: Vec<Vec<BigUint>>,
    total: Vec<BigUint>,
}

impl ExactTables {
    fn new(b: Vec<BigUint>, c: Vec<BigUint>, e: Vec<BigUint>, t: &[BigUint]) -> Self {
        let h = t.len() - 1;
        let be = convolve(&b, &e, h + 1);
        let mut cpow: Vec<Vec<BigUint>> = Vec::with_capacity(h);
        if h > 0 {
            cpow.push(
                (0..h)
                    .map(|q| {
                        if q == 0 {
                            BigUint::one()
                        } else {
                            BigUint::zero()
                        }
                    })
                    .collect(),
            );
        }
        for j in 1..h {
            let next = convolve(&c, &cpow[j - 1], h - j);
            cpow.push(next);
        }
        let s: Vec<Vec<BigUint>> = (0..=h)
            .into_par_iter()
            .map(|n| {
                let mut row = Vec::with_capacity(n + 1);
                row.push(t[n].clone());
                for m in 1..=n {
                    let cp = &cpow[m - 1];
                    let v = (0..=n - m)
                        .filter(|&k| !be[k].is_zero() && !cp[n - m - k].is_zero())
                        .fold(BigUint::zero(), |acc, k| acc + &be[k] * &cp[n - m - k]);
                    row.push(v);
                }
                row
            })
            .collect();
        let total = s.iter().map(|row| row.iter().sum()).collect();
        ExactTables {
            b,
            c,
            e,
            be,
            cpow,
            s,
            total,
        }
    }

    fn horizon(&self) -> usize {
        self.total.len() - 1
    }
}

#[derive(Debug)]
struct AsymptoticTables {
    /// `ln C` and `ln ω` per family; `-∞` for an empty family or `ω = 0`.
    log_c: [f64; 4],
    log_w: [f64; 4],
    /// `ln Σ_{i0+im=k} ω_b^{i0} ω_e^{im}`.
    log_d: Vec<f64>,
}

fn log_add(x: f64, y: f64) -> f64 {
    let (hi, lo) = if x >= y { (x, y) } else { (y, x) };
    if hi == f64::NEG_INFINITY {
        hi
    } else {
        hi + (lo - hi).exp().ln_1p()
    }
}

/// `k·ln ω` with `ω^0 = 1` even when `ω = 0`.
fn pow_log(log_w: f64, k: usize) -> f64 {
    if k == 0 {
        0.0
    } else {
        k as f64 * log_w
    }
}

impl AsymptoticTables {
    fn enabled(&self, f: Family) -> bool {
        self.log_c[f.index()] > f64::NEG_INFINITY
    }

    /// Log-weight of the split `k = i0 + im` for `m ≥ 2` (without the
    /// family constants): `d(k) · ω_c^Q · binom(Q+m-2, m-2)`, the binomial
    /// counting the compositions of `Q = n - m - k` into `m - 1` parts.
    fn split_weight(&self, n: usize, m: usize, k: usize) -> f64 {
        let q = n - m - k;
        self.log_d[k]
            + pow_log(self.log_w[Family::Middle.index()], q)
            + ln_binomial((q + m - 2) as u64, (m - 2) as u64)
    }

    /// `ln s(n, m)` for every `m ≤ n`.
    fn sync_weights(&self, n: usize) -> Vec<f64> {
        let [lb, lc, le, lt] = self.log_c;
        (0..=n)
            .into_par_iter()
            .map(|m| match m {
                0 => lt + pow_log(self.log_w[Family::Total.index()], n),
                _ if !self.enabled(Family::Begin) => f64::NEG_INFINITY,
                1 => lb + le + self.log_d[n - 1],
                _ if !self.enabled(Family::Middle) => f64::NEG_INFINITY,
                _ => {
                    let sum = (0..=n - m).fold(f64::NEG_INFINITY, |acc, k| {
                        log_add(acc, self.split_weight(n, m, k))
                    });
                    lb + le + (m - 1) as f64 * lc + sum
                }
            })
            .collect()
    }
}

/// Index drawn with probability proportional to `exp(weights[i])`.
fn pick_log(weights: &[f64], rng: &mut RngHandle) -> Option<usize> {
    let top = weights.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if top == f64::NEG_INFINITY || top.is_nan() {
        return None;
    }
    let scaled: Vec<f64> = weights.iter().map(|w| (w - top).exp()).collect();
    let mut u = rng.unit() * scaled.iter().sum::<f64>();
    let last = scaled.iter().rposition(|&w| w > 0.0)?;
    for (i, &w) in scaled.iter().enumerate() {
        if u < w {
            return Some(i);
        }
        u -= w;
    }
    Some(last)
}

/// Picks among big-integer weights summing to `total`, recording the exact
/// probability of the pick.
fn pick_exact(
    total: &BigUint,
    weights: impl Iterator<Item = BigUint>,
    rng: &mut RngHandle,
    prob: Option<&mut BigRational>,
) -> usize {
    let mut u = rng.below(total);
    for (i, w) in weights.enumerate() {
        if u < w {
            if let Some(p) = prob {
                *p *= ratio(&w, total);
            }
            return i;
        }
        u -= w;
    }
    unreachable!("weights sum to less than the total")
}

/// Counts of the synchronized language and the per-family shuffle samplers.
#[derive(Debug)]
pub struct SyncCountTables {
    mode: SamplingMode,
    horizon: usize,
    families: Vec<ShuffleSampler>,
    /// Up to the horizon in exact mode, below [`SMALL_N_EXACT`](crate::shuffle::SMALL_N_EXACT) otherwise.
    exact: ExactTables,
    asymptotic: Option<AsymptoticTables>,
    weights: Mutex<HashMap<usize, Arc<Vec<f64>>>>,
    warnings: Vec<String>,
}

/// Builds the `b, c, e, t` shuffle counts and the `s` tables up to `horizon`.
pub fn build_sync_count_tables(
    subs: &[Sublanguages],
    horizon: usize,
    mode: SamplingMode,
) -> Result<SyncCountTables, SyncError> {
    if subs.is_empty() {
        return Err(SyncError::NoModules);
    }
    let families = Family::ALL
        .iter()
        .map(|&f| {
            let automata: Vec<Arc<Automaton>> =
                subs.iter().map(|s| Arc::new(s.family(f).clone())).collect();
            ShuffleSampler::new(&automata, horizon, mode)
        })
        .collect::<Result<Vec<_>, _>>()?;
    let counts = |f: Family| families[f.index()].exact_counts().counts().to_vec();
    let exact = ExactTables::new(
        counts(Family::Begin),
        counts(Family::Middle),
        counts(Family::End),
        &counts(Family::Total),
    );

    let mut warnings = Vec::new();
    let asymptotic = (mode == SamplingMode::Asymptotic).then(|| {
        let mut log_c = [0.0; 4];
        let mut log_w = [0.0; 4];
        for f in Family::ALL {
            let sampler = &families[f.index()];
            for w in sampler.warnings() {
                warnings.push(format!("{f:?} family, {w}"));
            }
            log_c[f.index()] = sampler.growth().iter().map(|g| g.c.ln()).sum();
            log_w[f.index()] = sampler.growth().iter().map(|g| g.omega).sum::<f64>().ln();
        }
        let (lb, le) = (log_w[Family::Begin.index()], log_w[Family::End.index()]);
        let mut log_d = vec![0.0; horizon + 1];
        for k in 1..=horizon {
            log_d[k] = log_add(lb + log_d[k - 1], pow_log(le, k));
        }
        AsymptoticTables {
            log_c,
            log_w,
            log_d,
        }
    });

    Ok(SyncCountTables {
        mode,
        horizon,
        families,
        exact,
        asymptotic,
        weights: Mutex::new(HashMap::new()),
        warnings,
    })
}

impl SyncCountTables {
    pub fn mode(&self) -> SamplingMode {
        self.mode
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }

    /// Largest length with exact counts.
    pub fn exact_horizon(&self) -> usize {
        self.exact.horizon()
    }

    /// Exact shuffle counts of one family, up to [`Self::exact_horizon`].
    pub fn family_counts(&self, f: Family) -> &[BigUint] {
        self.families[f.index()].exact_counts().counts()
    }

    /// `s(n)`.
    pub fn count(&self, n: usize) -> Option<&BigUint> {
        self.exact.total.get(n)
    }

    /// `s(n, m)`.
    pub fn count_with_syncs(&self, n: usize, m: usize) -> Option<&BigUint> {
        self.exact.s.get(n)?.get(m)
    }

    /// `s(n, m, i0, im)` for `m ≥ 1`.
    pub fn count_split(&self, n: usize, m: usize, i0: usize, im: usize) -> Option<BigUint> {
        if m == 0 || n > self.exact.horizon() || m + i0 + im > n {
            return None;
        }
        let x = &self.exact;
        Some(&x.b[i0] * &x.e[im] * &x.cpow[m - 1][n - m - i0 - im])
    }

    fn check(&self, n: usize) -> Result<(), SyncError> {
        if n > self.horizon {
            return Err(SyncError::OutOfRange {
                n,
                horizon: self.horizon,
            });
        }
        Ok(())
    }

    fn exact_skeleton(
        &self,
        n: usize,
        rng: &mut RngHandle,
        mut prob: Option<&mut BigRational>,
    ) -> Result<SyncSkeleton, SyncError> {
        let x = &self.exact;
        if x.total[n].is_zero() {
            return Err(SyncError::EmptyLanguage { n });
        }
        let m = pick_exact(
            &x.total[n],
            x.s[n].iter().cloned(),
            rng,
            prob.as_deref_mut(),
        );
        if m == 0 {
            return Ok(SyncSkeleton {
                m,
                segments: vec![n],
            });
        }
        let cp = &x.cpow[m - 1];
        let k = pick_exact(
            &x.s[n][m],
            (0..=n - m).map(|k| &x.be[k] * &cp[n - m - k]),
            rng,
            prob.as_deref_mut(),
        );
        let i0 = pick_exact(
            &x.be[k],
            (0..=k).map(|i| &x.b[i] * &x.e[k - i]),
            rng,
            prob.as_deref_mut(),
        );
        let mut segments = vec![i0];
        let mut left = n - m - k;
        for parts in (1..m).rev() {
            let a = pick_exact(
                &x.cpow[parts][left],
                (0..=left).map(|a| &x.c[a] * &x.cpow[parts - 1][left - a]),
                rng,
                prob.as_deref_mut(),
            );
            segments.push(a);
            left -= a;
        }
        segments.push(k - i0);
        Ok(SyncSkeleton { m, segments })
    }

    fn weights(&self, n: usize) -> Arc<Vec<f64>> {
        let asym = self.asymptotic.as_ref().expect("asymptotic tables");
        let mut cache = self.weights.lock().unwrap_or_else(|e| e.into_inner());
        Arc::clone(
            cache
                .entry(n)
                .or_insert_with(|| Arc::new(asym.sync_weights(n))),
        )
    }

    fn asymptotic_skeleton(
        &self,
        n: usize,
        rng: &mut RngHandle,
    ) -> Result<SyncSkeleton, SyncError> {
        let asym = self.asymptotic.as_ref().expect("asymptotic tables");
        let m = pick_log(&self.weights(n), rng).ok_or(SyncError::EmptyLanguage { n })?;
        if m == 0 {
            return Ok(SyncSkeleton {
                m,
                segments: vec![n],
            });
        }
        let k = if m == 1 {
            n - 1
        } else {
            let w: Vec<f64> = (0..=n - m).map(|k| asym.split_weight(n, m, k)).collect();
            pick_log(&w, rng).ok_or(SyncError::EmptyLanguage { n })?
        };
        let (lb, le) = (
            asym.log_w[Family::Begin.index()],
            asym.log_w[Family::End.index()],
        );
        let w: Vec<f64> = (0..=k)
            .map(|i| pow_log(lb, i) + pow_log(le, k - i))
            .collect();
        let i0 = pick_log(&w, rng).ok_or(SyncError::EmptyLanguage { n })?;
        let mut segments = vec![i0];
        segments.extend(sample_composition(n - m - k, m - 1, rng)?);
        segments.push(k - i0);
        Ok(SyncSkeleton { m, segments })
    }
}

/// Draws `m` and the segment lengths of a synchronized trace of length `n`.
pub fn sample_sync_skeleton(
    t: &SyncCountTables,
    n: usize,
    rng: &mut RngHandle,
) -> Result<SyncSkeleton, SyncError> {
    t.check(n)?;
    if n <= t.exact.horizon() {
        t.exact_skeleton(n, rng, None)
    } else {
        t.asymptotic_skeleton(n, rng)
    }
}

/// A uniform weak composition of `total` into `parts` nonnegative integers:
/// `parts - 1` distinct cut points are drawn from `{1, …, total + parts - 1}`,
/// sorted, and differenced.
pub fn sample_composition(
    total: usize,
    parts: usize,
    rng: &mut RngHandle,
) -> Result<Vec<usize>, SyncError> {
    if parts == 0 {
        return if total == 0 {
            Ok(Vec::new())
        } else {
            Err(SyncError::NoParts { total })
        };
    }
    let span = total + parts - 1;
    let mut cuts: Vec<usize> = rand::seq::index::sample(rng, span, parts - 1)
        .into_iter()
        .map(|j| j + 1)
        .collect();
    cuts.sort_unstable();
    let mut out = Vec::with_capacity(parts);
    let mut prev = 0;
    for &j in &cuts {
        out.push(j - prev - 1);
        prev = j;
    }
    out.push(span - prev);
    Ok(out)
}

/// Everything needed to draw synchronized traces of one system.
#[derive(Debug)]
pub struct SyncSampler {
    automata: Vec<Arc<Automaton>>,
    alpha: LetterId,
    subs: Vec<Sublanguages>,
    tables: SyncCountTables,
    owner: HashMap<LetterId, usize>,
}

impl SyncSampler {
    /// Splits every module around its `α` transition and builds the tables.
    pub fn new(
        automata: &[Arc<Automaton>],
        alpha: LetterId,
        horizon: usize,
        mode: SamplingMode,
    ) -> Result<Self, SyncError> {
        let subs = automata
            .iter()
            .enumerate()
            .map(|(i, a)| {
                extract_sublanguages(a, alpha).map_err(|e| match e {
                    SyncError::AlphaMultiplicity { count } => {
                        SyncError::ModuleAlpha { module: i, count }
                    }
                    other => other,
                })
            })
            .collect::<Result<Vec<_>, _>>()?;
        let tables = build_sync_count_tables(&subs, horizon, mode)?;
        let owner = automata
            .iter()
            .enumerate()
            .flat_map(|(i, a)| {
                a.alphabet()
                    .iter()
                    .filter(|l| l.id != alpha)
                    .map(move |l| (l.id, i))
            })
            .collect();
        Ok(SyncSampler {
            automata: automata.to_vec(),
            alpha,
            subs,
            tables,
            owner,
        })
    }

    pub fn alpha(&self) -> LetterId {
        self.alpha
    }

    pub fn tables(&self) -> &SyncCountTables {
        &self.tables
    }

    pub fn sublanguages(&self) -> &[Sublanguages] {
        &self.subs
    }

    /// Runs `letters` on every module from its initial state.
    fn replay(&self, letters: Vec<LetterId>) -> GlobalTrace {
        let mut current: Vec<StateId> = self.automata.iter().map(|a| a.initial()).collect();
        let mut states = Vec::with_capacity(letters.len() + 1);
        states.push(current.clone());
        for &l in &letters {
            if l == self.alpha {
                for (s, a) in current.iter_mut().zip(&self.automata) {
                    *s = a.step(*s, l).expect("α is enabled in every module");
                }
            } else {
                let i = self.owner[&l];
                current[i] = self.automata[i]
                    .step(current[i], l)
                    .expect("segment word runs in its module");
            }
            states.push(current.clone());
        }
        GlobalTrace { letters, states }
    }

    fn fill(
        &self,
        skeleton: &SyncSkeleton,
        rng: &mut RngHandle,
        mut prob: Option<&mut BigRational>,
    ) -> Result<Vec<LetterId>, SyncError> {
        let mut letters = Vec::with_capacity(skeleton.len());
        for (k, &len) in skeleton.segments.iter().enumerate() {
            if k > 0 {
                letters.push(self.alpha);
            }
            let sampler = &self.tables.families[skeleton.family(k).index()];
            let segment = match prob.as_deref_mut() {
                Some(p) => {
                    let (t, q) = sample_shuffle_trace_with_probability(sampler, len, rng)?;
                    *p *= q;
                    t
                }
                None => sample_shuffle_trace(sampler, len, rng)?,
            };
            letters.extend(segment.letters);
        }
        Ok(letters)
    }
}

/// Draws a synchronized trace of length `n`. In exact mode every trace has
/// probability `1/s(n)`.
pub fn sample_sync_trace(
    s: &SyncSampler,
    n: usize,
    rng: &mut RngHandle,
) -> Result<GlobalTrace, SyncError> {
    let t = &s.tables;
    t.check(n)?;
    if n <= t.exact.horizon() {
        let skeleton = t.exact_skeleton(n, rng, None)?;
        return Ok(s.replay(s.fill(&skeleton, rng, None)?));
    }
    // estimated weights can pick segment lengths some family cannot produce
    for _ in 0..MAX_REDRAWS {
        let skeleton = t.asymptotic_skeleton(n, rng)?;
        let feasible = skeleton
            .segments
            .iter()
            .enumerate()
            .all(|(k, &len)| t.families[skeleton.family(k).index()].has_length(len));
        if !feasible {
            continue;
        }
        match s.fill(&skeleton, rng, None) {
            Ok(letters) => return Ok(s.replay(letters)),
            Err(SyncError::Shuffle(ShuffleError::EmptyLanguage { .. }))
            | Err(SyncError::Shuffle(ShuffleError::Uniform(UniformError::NoWord { .. }))) => {
                continue
            }
            Err(e) => return Err(e),
        }
    }
    Err(SyncError::Rejected { n })
}

/// Like [`sample_sync_trace`], also returning the exact product of every
/// branch probability taken. Needs exact counts at length `n`.
pub fn sample_sync_trace_with_probability(
    s: &SyncSampler,
    n: usize,
    rng: &mut RngHandle,
) -> Result<(GlobalTrace, SyncSkeleton, BigRational), SyncError> {
    let t = &s.tables;
    t.check(n)?;
    if n > t.exact.horizon() {
        return Err(SyncError::NotExact { n });
    }
    let mut p = BigRational::one();
    let skeleton = t.exact_skeleton(n, rng, Some(&mut p))?;
    let letters = s.fill(&skeleton, rng, Some(&mut p))?;
    Ok((s.replay(letters), skeleton, p))
}
