use std::collections::VecDeque;

use num_integer::Integer;
use petgraph::algo::tarjan_scc;
use petgraph::graph::{DiGraph, NodeIndex};

use super::{Automaton, StateId};

/// Structural preconditions for `ℓ(n) ~ C·ω^n` with a single dominant term.
#[derive(Clone, Debug, PartialEq)]
pub struct GrowthDiagnostics {
    /// All reachable states form one strongly connected component.
    pub strongly_connected: bool,
    /// The dominant component has cycle-length gcd 1.
    pub aperiodic: bool,
    /// Exactly one component attains the largest spectral radius.
    pub unique_dominant_scc: bool,
    /// Spectral radius of the dominant component (0 for finite languages).
    pub spectral_radius: f64,
    /// Period of the dominant component (0 when it has no cycle).
    pub period: u64,
    pub warning: Option<String>,
}

impl GrowthDiagnostics {
    /// Whether the single-dominant-term regime is certified.
    pub fn certified(&self) -> bool {
        self.unique_dominant_scc && self.aperiodic
    }
}

const RADIUS_TOLERANCE: f64 = 1e-9;

/// Computes strongly connected components, the spectral radius of each
/// and the period of the dominant one. Purely structural: letters are
/// ignored, parallel transitions count with multiplicity.
pub fn check_growth_conditions(a: &Automaton) -> GrowthDiagnostics {
    let reachable = a.reachable();
    let useful = coreachable_within(a, &reachable);

    let mut graph = DiGraph::<StateId, ()>::new();
    let nodes: Vec<NodeIndex> = (0..a.num_states()).map(|s| graph.add_node(s)).collect();
    for (s, _, t) in a.edges() {
        if reachable[s] && reachable[t] {
            graph.add_edge(nodes[s], nodes[t], ());
        }
    }

    let sccs = tarjan_scc(&graph);
    let reachable_count = reachable.iter().filter(|&&r| r).count();
    let strongly_connected = sccs
        .iter()
        .any(|c| c.len() == reachable_count && reachable[graph[c[0]]]);

    let mut component = vec![usize::MAX; a.num_states()];
    let mut components: Vec<Vec<StateId>> = Vec::new();
    for c in &sccs {
        let mut states: Vec<StateId> = c.iter().map(|&n| graph[n]).filter(|&s| useful[s]).collect();
        states.sort_unstable();
        if states.is_empty() {
            continue;
        }
        for &s in &states {
            component[s] = components.len();
        }
        components.push(states);
    }

    let useful_edges = a
        .edges()
        .filter(|&(s, _, t)| useful[s] && useful[t])
        .count();
    if useful_edges == 0 {
        return GrowthDiagnostics {
            strongly_connected,
            aperiodic: false,
            unique_dominant_scc: false,
            spectral_radius: 0.0,
            period: 0,
            warning: Some("degenerate: ℓ(n)=0 for n≥1".to_string()),
        };
    }

    let mut bounds: Vec<(usize, f64, f64)> = Vec::new();
    for (ci, states) in components.iter().enumerate() {
        let internal: Vec<(usize, usize)> = local_edges(a, states, &component, ci);
        if internal.is_empty() {
            continue;
        }
        let (lo, hi) = radius_bounds(states.len(), &internal);
        bounds.push((ci, lo, hi));
    }

    if bounds.is_empty() {
        return GrowthDiagnostics {
            strongly_connected,
            aperiodic: false,
            unique_dominant_scc: false,
            spectral_radius: 0.0,
            period: 0,
            warning: Some("finite language: no cycle on any accepting path".to_string()),
        };
    }

    let &(dominant, lo, hi) = bounds
        .iter()
        .max_by(|x, y| (x.1 + x.2).total_cmp(&(y.1 + y.2)))
        .unwrap();
    let slack = RADIUS_TOLERANCE * hi.max(1.0);
    let unique = bounds
        .iter()
        .filter(|b| b.0 != dominant)
        .all(|&(_, _, other_hi)| other_hi < lo - slack);

    let states = &components[dominant];
    let period = cycle_gcd(states.len(), &local_edges(a, states, &component, dominant));
    let aperiodic = period == 1;

    let warning = if !unique {
        Some("several components share the dominant growth rate".to_string())
    } else if !aperiodic {
        Some(format!("dominant component is periodic (period {period})"))
    } else {
        None
    };

    GrowthDiagnostics {
        strongly_connected,
        aperiodic,
        unique_dominant_scc: unique,
        spectral_radius: (lo + hi) / 2.0,
        period,
        warning,
    }
}

fn coreachable_within(a: &Automaton, reachable: &[bool]) -> Vec<bool> {
    let n = a.num_states();
    let mut preds = vec![Vec::new(); n];
    for (s, _, t) in a.edges() {
        preds[t].push(s);
    }
    let mut seen = vec![false; n];
    let mut queue: VecDeque<StateId> = a.finals().filter(|&f| reachable[f]).collect();
    for &f in &queue {
        seen[f] = true;
    }
    while let Some(s) = queue.pop_front() {
        for &p in &preds[s] {
            if reachable[p] && !seen[p] {
                seen[p] = true;
                queue.push_back(p);
            }
        }
    }
    seen
}

/// Edges of component `ci`, renumbered to local indices. `states` is sorted.
fn local_edges(
    a: &Automaton,
    states: &[StateId],
    component: &[usize],
    ci: usize,
) -> Vec<(usize, usize)> {
    let local = |s: StateId| states.binary_search(&s).unwrap();
    let mut out = Vec::new();
    for &s in states {
        for t in a.transitions(s) {
            if component[t.target] == ci {
                out.push((local(s), local(t.target)));
            }
        }
    }
    out
}

/// Collatz–Wielandt bounds on the spectral radius of an irreducible
/// nonnegative matrix, by power iteration on `A + I` (which is primitive,
/// so the iteration converges even for periodic components).
fn radius_bounds(n: usize, edges: &[(usize, usize)]) -> (f64, f64) {
    let mut x = vec![1.0f64; n];
    let mut y = vec![0.0f64; n];
    let budget = (50_000_000 / (n + edges.len())).clamp(1_000, 200_000);
    let (mut lo, mut hi) = (0.0, f64::INFINITY);
    for _ in 0..budget {
        y.copy_from_slice(&x);
        for &(u, v) in edges {
            y[u] += x[v];
        }
        lo = f64::INFINITY;
        hi = 0.0f64;
        for (yi, xi) in y.iter().zip(&x) {
            let r = yi / xi;
            lo = lo.min(r);
            hi = hi.max(r);
        }
        if hi - lo <= 1e-13 * hi {
            break;
        }
        let scale = y.iter().copied().fold(0.0, f64::max);
        for (xi, yi) in x.iter_mut().zip(&y) {
            *xi = yi / scale;
        }
    }
    (lo - 1.0, hi - 1.0)
}

fn cycle_gcd(n: usize, edges: &[(usize, usize)]) -> u64 {
    let mut adj = vec![Vec::new(); n];
    for &(u, v) in edges {
        adj[u].push(v);
    }
    let mut level = vec![u64::MAX; n];
    level[0] = 0;
    let mut queue = VecDeque::from([0usize]);
    while let Some(u) = queue.pop_front() {
        for &v in &adj[u] {
            if level[v] == u64::MAX {
                level[v] = level[u] + 1;
                queue.push_back(v);
            }
        }
    }
    edges.iter().fold(0u64, |g, &(u, v)| {
        let d = (level[u] + 1).abs_diff(level[v]);
        g.gcd(&d)
    })
}
