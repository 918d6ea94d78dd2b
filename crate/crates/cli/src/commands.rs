use std::collections::HashSet;

use rayon::prelude::*;
use thiserror::Error;
use unitrace::estimator::{gaa_estimate, iterated_estimate, EstimationParams, StatePredicate};
use unitrace::rm::parse_expr;
use unitrace::stats::{chi_square_uniform, tv_distance, Histogram, ACCEPT_P_VALUE};
use unitrace::{parse_system, CompiledSystem, LetterId, RngHandle, SamplingMode, SystemError};

use crate::report::Report;
use crate::{Command, Io, Sampling};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("cannot read {path}: {source}")]
    Read {
        path: String,
        source: std::io::Error,
    },
    #[error("{path}: {message}")]
    Parse { path: String, message: String },
    #[error("{0}")]
    Model(String),
    #[error("{0}")]
    Precondition(String),
    #[error("cannot write {path}: {source}")]
    Write {
        path: String,
        source: std::io::Error,
    },
    #[error("validation failed: {0}")]
    Rejected(String),
}

impl CliError {
    pub fn code(&self) -> u8 {
        match self {
            CliError::Read { .. } => 3,
            CliError::Parse { .. } => 4,
            CliError::Model(_) => 5,
            CliError::Precondition(_) => 6,
            CliError::Write { .. } => 7,
            CliError::Rejected(_) => 8,
        }
    }
}

fn precondition(e: impl ToString) -> CliError {
    CliError::Precondition(e.to_string())
}

fn read(io: &Io) -> Result<String, CliError> {
    std::fs::read_to_string(&io.input).map_err(|source| CliError::Read {
        path: io.input.display().to_string(),
        source,
    })
}

fn compile(io: &Io, sync: Option<&str>) -> Result<CompiledSystem, CliError> {
    let source = read(io)?;
    CompiledSystem::from_source(&source, sync).map_err(|e| match e {
        SystemError::Parse(p) => CliError::Parse {
            path: io.input.display().to_string(),
            message: p.to_string(),
        },
        other => CliError::Model(other.to_string()),
    })
}

fn emit(io: &Io, text: &str) -> Result<(), CliError> {
    match &io.output {
        Some(path) => std::fs::write(path, text).map_err(|source| CliError::Write {
            path: path.display().to_string(),
            source,
        }),
        None => {
            use std::io::Write;
            std::io::stdout()
                .write_all(text.as_bytes())
                .map_err(|source| CliError::Write {
                    path: "<stdout>".into(),
                    source,
                })
        }
    }
}

fn config(command: &str, io: &Io) -> Report {
    let mut r = Report::new();
    r.put("command", command)
        .put("input", io.input.display())
        .put("format", format!("{:?}", io.format).to_lowercase());
    if let Some(o) = &io.output {
        r.put("output", o.display());
    }
    r
}

fn sampling_config(r: &mut Report, s: &Sampling, resolved: SamplingMode, seed: u64) {
    r.put("length", s.length)
        .put("mode", format!("{:?}", s.mode).to_lowercase())
        .put("resolved_mode", format!("{resolved:?}").to_lowercase())
        .put("sync", s.sync.as_deref().unwrap_or("none"))
        .put("seed", seed);
}

pub fn run(command: &Command) -> Result<(), CliError> {
    match command {
        Command::Count { io, length, sync } => count(io, *length, sync.as_deref()),
        Command::Sample {
            io,
            sampling,
            count,
        } => sample(io, sampling, *count),
        Command::Estimate {
            io,
            detect,
            epsilon,
            delta,
            depth,
            iterate,
            seed,
        } => estimate(io, detect, *epsilon, *delta, *depth, iterate, *seed),
        Command::Validate {
            io,
            sampling,
            count,
        } => validate(io, sampling, *count),
        Command::Flatten { io, sync } => flatten(io, sync.as_deref()),
        Command::Product { io, sync } => product(io, sync.as_deref()),
    }
}

fn count(io: &Io, n: usize, sync: Option<&str>) -> Result<(), CliError> {
    let c = compile(io, sync)?;
    let mut cfg = config("count", io);
    cfg.put("length", n).put("sync", sync.unwrap_or("none"));
    let sampler = c.sampler(n, SamplingMode::Exact).map_err(precondition)?;
    let mut r = Report::new();
    r.put(
        "count",
        sampler
            .count(n)
            .expect("exact mode counts up to the horizon"),
    );
    for (f, g) in c.modules().iter().zip(c.module_growth(n)) {
        let name = &c.source().modules[f.module].name;
        r.put(format!("{name}.states"), f.automaton.num_states())
            .put(format!("{name}.omega"), format!("{:.12}", g.omega))
            .put(format!("{name}.c"), format!("{:.12}", g.c));
        if let Some(w) = g.warning {
            r.put(format!("{name}.warning"), w);
        }
    }
    emit(io, &(cfg.render_config() + &r.render(io.format)))
}

fn seed_or_fresh(seed: Option<u64>) -> u64 {
    seed.unwrap_or_else(rand::random)
}

/// Draws `count` traces in parallel; trace `i` uses stream `i`, so the output
/// does not depend on scheduling.
fn draw(
    sampler: &unitrace::Sampler,
    n: usize,
    count: u64,
    seed: u64,
) -> Result<Vec<Vec<LetterId>>, CliError> {
    let rng = RngHandle::new(seed);
    (0..count)
        .into_par_iter()
        .map(|i| {
            sampler
                .sample(n, &mut rng.fork(i))
                .map(|t| t.letters)
                .map_err(precondition)
        })
        .collect()
}

fn sample(io: &Io, s: &Sampling, count: usize) -> Result<(), CliError> {
    let c = compile(io, s.sync.as_deref())?;
    let mode = c.resolve_mode(s.mode.mode(), s.length);
    let seed = seed_or_fresh(s.seed);
    let mut cfg = config("sample", io);
    sampling_config(&mut cfg, s, mode, seed);
    cfg.put("count", count);
    let sampler = c.sampler(s.length, mode).map_err(precondition)?;
    for w in sampler.warnings() {
        cfg.put("warning", w);
    }
    let traces = draw(&sampler, s.length, count as u64, seed)?;
    let mut out = cfg.render_config();
    for t in traces {
        out.push_str(&c.format_letters(&t));
        out.push('\n');
    }
    emit(io, &out)
}

fn estimate(
    io: &Io,
    detect: &str,
    epsilon: f64,
    delta: f64,
    depth: usize,
    iterate: &[usize],
    seed: Option<u64>,
) -> Result<(), CliError> {
    let source = read(io)?;
    let parse_error = |message: String| CliError::Parse {
        path: io.input.display().to_string(),
        message,
    };
    let sys = parse_system(&source).map_err(|e| parse_error(e.to_string()))?;
    let expr = parse_expr(&sys, detect, None).map_err(|e| parse_error(format!("--detect: {e}")))?;
    let verdict = StatePredicate::new(expr);
    let params = EstimationParams::new(epsilon, delta, depth).map_err(precondition)?;
    let seed = seed_or_fresh(seed);

    let mut cfg = config("estimate", io);
    cfg.put("detect", detect)
        .put("epsilon", epsilon)
        .put("delta", delta)
        .put("depth", depth)
        .put("seed", seed);
    if !iterate.is_empty() {
        cfg.put(
            "iterate",
            iterate
                .iter()
                .map(|d| d.to_string())
                .collect::<Vec<_>>()
                .join(","),
        );
    }
    let rng = RngHandle::new(seed);
    let est = gaa_estimate(&sys, &verdict, &params, &rng).map_err(precondition)?;
    let mut r = Report::new();
    r.put("N", params.n_samples())
        .put("detections", est.detections)
        .put("estimate", est.value())
        .put("seed", seed);
    if !iterate.is_empty() {
        let runs = iterated_estimate(&sys, &verdict, epsilon, delta, iterate, &rng)
            .map_err(precondition)?;
        for e in runs {
            r.put(format!("estimate.depth{}", e.depth), e.value());
        }
    }
    let header = format!("N={}\n", params.n_samples());
    emit(io, &(cfg.render_config() + &header + &r.render(io.format)))
}

fn validate(io: &Io, s: &Sampling, count: Option<u64>) -> Result<(), CliError> {
    let c = compile(io, s.sync.as_deref())?;
    let n = s.length;
    let mode = c.resolve_mode(s.mode.mode(), n);
    let seed = seed_or_fresh(s.seed);
    let product = c.product().map_err(|e| CliError::Model(e.to_string()))?;
    let support = unitrace::enumerate_traces(&product.base, n).map_err(precondition)?;
    if support.is_empty() {
        return Err(precondition(format!("no trace of length {n}")));
    }
    let samples = count.unwrap_or_else(|| (20 * support.len() as u64).max(1000));

    let mut cfg = config("validate", io);
    sampling_config(&mut cfg, s, mode, seed);
    cfg.put("count", samples);
    let sampler = c.sampler(n, mode).map_err(precondition)?;
    let traces = draw(&sampler, n, samples, seed)?;

    let legal: HashSet<&Vec<LetterId>> = support.iter().collect();
    let illegal = traces.iter().filter(|t| !legal.contains(t)).count();
    let mut nonconforming = 0;
    for t in traces.iter().filter(|t| legal.contains(t)).take(1000) {
        let steps = c.replay(t).map_err(precondition)?;
        if !c.conforms(&steps).map_err(precondition)? {
            nonconforming += 1;
        }
    }

    let mut r = Report::new();
    r.put("support", support.len())
        .put("samples", samples)
        .put("illegal", illegal)
        .put("nonconforming", nonconforming);
    if illegal > 0 || nonconforming > 0 {
        r.put("verdict", "fail");
        emit(io, &(cfg.render_config() + &r.render(io.format)))?;
        return Err(CliError::Rejected(format!(
            "{illegal} illegal and {nonconforming} nonconforming traces"
        )));
    }
    let h: Histogram<Vec<LetterId>> = traces.into_iter().collect();
    let chi = chi_square_uniform(&h, &support).map_err(precondition)?;
    let tv = tv_distance(&h, &support).map_err(precondition)?;
    let pass = chi.p_value >= ACCEPT_P_VALUE;
    r.put("chi2", format!("{:.6}", chi.statistic))
        .put("df", chi.degrees_of_freedom)
        .put("p_value", format!("{:.6e}", chi.p_value))
        .put("threshold", ACCEPT_P_VALUE)
        .put("tv", format!("{tv:.6}"))
        .put("verdict", if pass { "pass" } else { "fail" });
    emit(io, &(cfg.render_config() + &r.render(io.format)))?;
    if pass {
        Ok(())
    } else {
        Err(CliError::Rejected(format!(
            "chi-square p = {:.3e}",
            chi.p_value
        )))
    }
}

fn flatten(io: &Io, sync: Option<&str>) -> Result<(), CliError> {
    let c = compile(io, sync)?;
    let mut cfg = config("flatten", io);
    cfg.put("sync", sync.unwrap_or("none"));
    let mut out = cfg.render_config();
    for f in c.modules() {
        out.push_str(&format!("# module {}\n", c.source().modules[f.module].name));
        out.push_str(&f.automaton.to_string());
    }
    emit(io, &out)
}

fn product(io: &Io, sync: Option<&str>) -> Result<(), CliError> {
    let c = compile(io, sync)?;
    let p = c.product().map_err(|e| CliError::Model(e.to_string()))?;
    let mut cfg = config("product", io);
    cfg.put("sync", sync.unwrap_or("none"))
        .put("states", p.base.num_states());
    emit(io, &(cfg.render_config() + &p.base.to_string()))
}
