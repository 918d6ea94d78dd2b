//! Global step semantics.
//!
//! From a global state, one module is chosen and one of its true guards is
//! fired. An unlabelled command moves its own module only. A command labelled
//! `l` is valid only when every module declaring `l`-commands has a true
//! `l`-guard; it then moves all those modules together.

use std::fmt;

use super::eval::{eval_bool, eval_int, EvalError};
use super::{Action, ModuleSystem};

/// Values of all variables, in global declaration order.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GlobalState(pub Vec<i64>);

impl GlobalState {
    pub fn initial(sys: &ModuleSystem) -> Self {
        GlobalState(
            sys.modules
                .iter()
                .flat_map(|m| m.variables.iter().map(|v| v.init))
                .collect(),
        )
    }
}

impl fmt::Display for GlobalState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("(")?;
        for (i, v) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{v}")?;
        }
        f.write_str(")")
    }
}

/// One fired command alternative. Indices are 0-based.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct CommandChoice {
    pub module: usize,
    pub command: usize,
    pub alternative: usize,
}

/// A global step: one choice, or one choice per participating module for a
/// synchronized step.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct StepAction {
    pub label: Option<String>,
    pub parts: Vec<CommandChoice>,
}

impl StepAction {
    pub fn describe(&self, sys: &ModuleSystem) -> String {
        let parts: Vec<String> = self
            .parts
            .iter()
            .map(|c| {
                format!(
                    "{}.cmd{}.act{}",
                    sys.modules[c.module].name,
                    c.command + 1,
                    c.alternative + 1
                )
            })
            .collect();
        match &self.label {
            Some(l) => format!("[{l}] {}", parts.join(" || ")),
            None => parts.join(" || "),
        }
    }
}

/// Applies one command alternative to `next`, reading from `cur`.
/// Assignments are simultaneous.
pub(crate) fn apply_action(
    sys: &ModuleSystem,
    action: &Action,
    cur: &[i64],
    next: &mut [i64],
) -> Result<(), EvalError> {
    for a in action {
        let value = eval_int(&a.value, cur)?;
        let var = sys.variable(a.var).1;
        if value < var.low || value > var.high {
            return Err(EvalError::OutOfRange {
                variable: var.name.clone(),
                value,
                low: var.low,
                high: var.high,
            });
        }
        next[a.var] = value;
    }
    Ok(())
}

/// All one-step successors of `state`, in a fixed order: unlabelled steps
/// module by module, then synchronized steps label by label. An empty list
/// means deadlock. An assignment leaving its variable's range is an error.
pub fn successors(
    sys: &ModuleSystem,
    state: &GlobalState,
) -> Result<Vec<(StepAction, GlobalState)>, EvalError> {
    let cur = &state.0;
    let mut enabled: Vec<Vec<bool>> = Vec::with_capacity(sys.modules.len());
    for m in &sys.modules {
        let mut row = Vec::with_capacity(m.commands.len());
        for c in &m.commands {
            row.push(eval_bool(&c.guard, cur)?);
        }
        enabled.push(row);
    }

    let mut out = Vec::new();
    for (mi, m) in sys.modules.iter().enumerate() {
        for (ci, c) in m.commands.iter().enumerate() {
            if c.label.is_some() || !enabled[mi][ci] {
                continue;
            }
            for (ai, action) in c.actions.iter().enumerate() {
                let mut next = cur.clone();
                apply_action(sys, action, cur, &mut next)?;
                let choice = CommandChoice {
                    module: mi,
                    command: ci,
                    alternative: ai,
                };
                out.push((
                    StepAction {
                        label: None,
                        parts: vec![choice],
                    },
                    GlobalState(next),
                ));
            }
        }
    }

    for label in sys.sync_labels() {
        // per participating module, the enabled (command, alternative) pairs
        let mut options: Vec<Vec<CommandChoice>> = Vec::new();
        let mut valid = true;
        for (mi, m) in sys.modules.iter().enumerate() {
            let declares = m
                .commands
                .iter()
                .any(|c| c.label.as_deref() == Some(label.as_str()));
            if !declares {
                continue;
            }
            let mine: Vec<CommandChoice> = m
                .commands
                .iter()
                .enumerate()
                .filter(|(ci, c)| c.label.as_deref() == Some(label.as_str()) && enabled[mi][*ci])
                .flat_map(|(ci, c)| {
                    (0..c.actions.len()).map(move |ai| CommandChoice {
                        module: mi,
                        command: ci,
                        alternative: ai,
                    })
                })
                .collect();
            if mine.is_empty() {
                valid = false;
                break;
            }
            options.push(mine);
        }
        if !valid {
            continue;
        }
        let mut odometer = vec![0usize; options.len()];
        'combos: loop {
            let parts: Vec<CommandChoice> =
                odometer.iter().zip(&options).map(|(&k, o)| o[k]).collect();
            let mut next = cur.clone();
            for p in &parts {
                let action = &sys.modules[p.module].commands[p.command].actions[p.alternative];
                apply_action(sys, action, cur, &mut next)?;
            }
            out.push((
                StepAction {
                    label: Some(label.clone()),
                    parts,
                },
                GlobalState(next),
            ));

            let mut k = odometer.len();
            loop {
                if k == 0 {
                    break 'combos;
                }
                k -= 1;
                odometer[k] += 1;
                if odometer[k] < options[k].len() {
                    break;
                }
                odometer[k] = 0;
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rm::parse_system;

    const TIMERS: &str = "module timer
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

    #[test]
    fn tic_moves_timer_and_on_tic_together() {
        let sys = parse_system(TIMERS).unwrap();
        let s = GlobalState(vec![0, 0, 1]);
        let succ = successors(&sys, &s).unwrap();
        assert_eq!(succ.len(), 1);
        assert_eq!(succ[0].0.label.as_deref(), Some("tic"));
        assert_eq!(succ[0].1, GlobalState(vec![1, 2, 1]));
        assert_eq!(succ[0].0.parts.len(), 2);
    }

    #[test]
    fn tac_follows_tic() {
        let sys = parse_system(TIMERS).unwrap();
        let succ = successors(&sys, &GlobalState(vec![1, 2, 1])).unwrap();
        assert_eq!(succ.len(), 1);
        assert_eq!(succ[0].1, GlobalState(vec![0, 2, 3]));
    }

    #[test]
    fn single_free_command() {
        let sys = parse_system("module m x : [0..3] init 0; x<3 -> x'=x+1; endmodule").unwrap();
        let succ = successors(&sys, &GlobalState::initial(&sys)).unwrap();
        assert_eq!(succ.len(), 1);
        assert_eq!(succ[0].1, GlobalState(vec![1]));
        assert_eq!(succ[0].0.describe(&sys), "m.cmd1.act1");
    }

    #[test]
    fn deadlock_is_empty() {
        let sys = parse_system("module m x : [0..3] init 3; x<3 -> x'=x+1; endmodule").unwrap();
        assert!(successors(&sys, &GlobalState(vec![3])).unwrap().is_empty());
    }

    #[test]
    fn alternatives_and_duplicates_are_kept() {
        let sys = parse_system(
            "module m x : [0..1] init 0; [] true -> (x'=1) + (x'=1) + true; endmodule",
        )
        .unwrap();
        let succ = successors(&sys, &GlobalState(vec![0])).unwrap();
        let states: Vec<_> = succ.iter().map(|(_, s)| s.0[0]).collect();
        assert_eq!(states, vec![1, 1, 0]);
    }

    #[test]
    fn sync_is_a_cartesian_product() {
        let src = "module a x : [0..2] init 0; [go] true -> (x'=1) + (x'=2); endmodule
                   module b y : [0..2] init 0; [go] true -> (y'=1) + (y'=2); endmodule";
        let sys = parse_system(src).unwrap();
        let succ = successors(&sys, &GlobalState(vec![0, 0])).unwrap();
        assert_eq!(succ.len(), 4);
        assert_eq!(succ[3].1, GlobalState(vec![2, 2]));
    }

    #[test]
    fn disabled_partner_blocks_sync() {
        let src = "module a x : [0..1] init 0; [go] true -> x'=1; endmodule
                   module b y : [0..1] init 1; [go] y=0 -> y'=1; endmodule";
        let sys = parse_system(src).unwrap();
        assert!(successors(&sys, &GlobalState(vec![0, 1]))
            .unwrap()
            .is_empty());
    }

    #[test]
    fn out_of_range_assignment_is_an_error() {
        let sys = parse_system("module m x : [0..1] init 1; true -> x'=x+1; endmodule").unwrap();
        assert!(matches!(
            successors(&sys, &GlobalState(vec![1])),
            Err(EvalError::OutOfRange { value: 2, .. })
        ));
    }
}
