//! Systems used by the benchmarks.

use std::sync::Arc;

use unitrace::{Automaton, AutomatonSpec, Letter, LetterId, LetterPolicy, StateId};

/// A ring of `states` states where state `s` also jumps to `3s mod states`;
/// letters start at `first`.
pub fn ring(module: usize, first: u32, states: usize) -> Arc<Automaton> {
    let edges: Vec<(StateId, StateId)> = (0..states as StateId)
        .flat_map(|s| {
            [
                (s, (s + 1) % states as StateId),
                (s, (3 * s) % states as StateId),
            ]
        })
        .collect();
    let spec = AutomatonSpec {
        num_states: states,
        initial: 0,
        finals: (0..states as StateId).collect(),
        alphabet: (0..edges.len() as u32)
            .map(|k| Letter::new(first + k, module, format!("m{module}.{k}")))
            .collect(),
        transitions: edges
            .iter()
            .enumerate()
            .map(|(k, &(s, t))| (s, LetterId(first + k as u32), t))
            .collect(),
    };
    Arc::new(
        Automaton::from_spec(spec, LetterPolicy::UniquePerTransition).expect("ring is well formed"),
    )
}

/// `count` rings of `states` states with disjoint letters.
pub fn rings(count: usize, states: usize) -> Vec<Arc<Automaton>> {
    (0..count)
        .map(|m| ring(m, (m * 4 * states) as u32, states))
        .collect()
}

/// `modules` modules synchronizing once on `go`, each with a private
/// counter before and after.
pub fn handshake_source(modules: usize) -> String {
    let mut src = String::new();
    for m in 0..modules {
        src.push_str(&format!(
            "module m{m}\nv{m} : [0..7] init 0;\nv{m}<3 -> (v{m}'=v{m}+1) + (v{m}'=0);\n[go] v{m}=3 -> v{m}'=4;\n\
             v{m}>=4 & v{m}<7 -> (v{m}'=v{m}+1) + true;\nv{m}=7 -> v{m}'=4;\nendmodule\n"
        ));
    }
    src
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixtures_build() {
        assert_eq!(rings(3, 10).len(), 3);
        assert!(unitrace::CompiledSystem::from_source(&handshake_source(3), Some("go")).is_ok());
    }
}
