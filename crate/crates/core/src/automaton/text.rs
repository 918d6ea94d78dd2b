//! Line-oriented interchange format.
//!
//! ```text
//! states 2
//! initial 0
//! finals 0 1
//! letter 0 0 timer.cmd1.act1
//! letter 1 * tic
//! 0 0 1
//! 1 1 0
//! ```
//!
//! `letter ID OWNER DISPLAY` declares a letter (`*` marks the shared
//! synchronization letter) and `SRC LETTER DST` a transition by letter id.
//! When no `letter` line is present, transition letters are free-form names
//! interned in order of first appearance. `#` starts a comment.

use std::collections::HashMap;
use std::fmt;

use thiserror::Error;

use super::{
    Automaton, AutomatonError, AutomatonSpec, Letter, LetterId, LetterOwner, LetterPolicy,
};

#[derive(Debug, Error)]
pub enum ParseAutomatonError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error(transparent)]
    Invalid(#[from] AutomatonError),
}

fn syntax(line: usize, message: impl Into<String>) -> ParseAutomatonError {
    ParseAutomatonError::Syntax {
        line,
        message: message.into(),
    }
}

impl fmt::Display for Automaton {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "states {}", self.num_states())?;
        writeln!(f, "initial {}", self.initial())?;
        write!(f, "finals")?;
        for s in self.finals() {
            write!(f, " {s}")?;
        }
        writeln!(f)?;
        for l in self.alphabet() {
            match l.owner {
                LetterOwner::Module(m) => writeln!(f, "letter {} {} {}", l.id, m, l.display)?,
                LetterOwner::Shared => writeln!(f, "letter {} * {}", l.id, l.display)?,
            }
        }
        for (s, l, t) in self.edges() {
            writeln!(f, "{s} {l} {t}")?;
        }
        Ok(())
    }
}

fn number<T: std::str::FromStr>(
    tok: &str,
    line: usize,
    what: &str,
) -> Result<T, ParseAutomatonError> {
    tok.parse()
        .map_err(|_| syntax(line, format!("expected {what}, found `{tok}`")))
}

/// Parses the interchange format and validates the result under `policy`.
pub fn parse_automaton(src: &str, policy: LetterPolicy) -> Result<Automaton, ParseAutomatonError> {
    let mut num_states = None;
    let mut initial = None;
    let mut finals = None;
    let mut declared: Vec<Letter> = Vec::new();
    let mut raw_transitions: Vec<(usize, usize, &str, usize)> = Vec::new();

    for (idx, raw) in src.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap().trim();
        if content.is_empty() {
            continue;
        }
        let mut toks = content.split_whitespace();
        let head = toks.next().unwrap();
        match head {
            "states" => {
                let tok = toks
                    .next()
                    .ok_or_else(|| syntax(line, "missing state count"))?;
                num_states = Some(number::<usize>(tok, line, "a state count")?);
            }
            "initial" => {
                let tok = toks
                    .next()
                    .ok_or_else(|| syntax(line, "missing initial state"))?;
                initial = Some(number::<usize>(tok, line, "a state index")?);
            }
            "finals" => {
                let list = toks
                    .map(|t| number::<usize>(t, line, "a state index"))
                    .collect::<Result<Vec<_>, _>>()?;
                finals = Some(list);
                continue;
            }
            "letter" => {
                let id = toks
                    .next()
                    .ok_or_else(|| syntax(line, "missing letter id"))?;
                let id = number::<u32>(id, line, "a letter id")?;
                let owner = toks
                    .next()
                    .ok_or_else(|| syntax(line, "missing letter owner"))?;
                let owner = if owner == "*" {
                    LetterOwner::Shared
                } else {
                    LetterOwner::Module(number(owner, line, "a module index or `*`")?)
                };
                let display = toks.collect::<Vec<_>>().join(" ");
                if display.is_empty() {
                    return Err(syntax(line, "missing letter name"));
                }
                declared.push(Letter {
                    id: LetterId(id),
                    owner,
                    display,
                });
                continue;
            }
            _ => {
                let src_state = number::<usize>(head, line, "a keyword or state index")?;
                let letter = toks.next().ok_or_else(|| syntax(line, "missing letter"))?;
                let dst = toks
                    .next()
                    .ok_or_else(|| syntax(line, "missing target state"))?;
                let dst = number::<usize>(dst, line, "a state index")?;
                raw_transitions.push((line, src_state, letter, dst));
            }
        }
        if let Some(extra) = toks.next() {
            return Err(syntax(line, format!("unexpected `{extra}`")));
        }
    }

    let num_states = num_states.ok_or_else(|| syntax(0, "missing `states` header"))?;
    let initial = initial.ok_or_else(|| syntax(0, "missing `initial` header"))?;
    let finals = finals.ok_or_else(|| syntax(0, "missing `finals` header"))?;

    let mut transitions = Vec::with_capacity(raw_transitions.len());
    let alphabet = if declared.is_empty() {
        let mut names: HashMap<&str, LetterId> = HashMap::new();
        let mut alphabet = Vec::new();
        for &(_, s, name, t) in &raw_transitions {
            let next = LetterId(names.len() as u32);
            let id = *names.entry(name).or_insert_with(|| {
                alphabet.push(Letter {
                    id: next,
                    owner: LetterOwner::Module(0),
                    display: name.to_string(),
                });
                next
            });
            transitions.push((s, id, t));
        }
        alphabet
    } else {
        for &(line, s, tok, t) in &raw_transitions {
            transitions.push((s, LetterId(number(tok, line, "a declared letter id")?), t));
        }
        declared
    };

    let spec = AutomatonSpec {
        num_states,
        initial,
        finals,
        alphabet,
        transitions,
    };
    Ok(Automaton::from_spec(spec, policy)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn undeclared_letters_are_interned() {
        let a = parse_automaton(
            "states 2\ninitial 0\nfinals 0 1\n0 a 0\n0 b 1\n1 c 0\n",
            LetterPolicy::UniquePerTransition,
        )
        .unwrap();
        assert_eq!(a.num_transitions(), 3);
        assert_eq!(a.letter(LetterId(1)).unwrap().display, "b");
        assert_eq!(a.step(1, LetterId(2)), Some(0));
    }

    #[test]
    fn print_then_parse_is_identity() {
        let src =
            "states 2\ninitial 0\nfinals 1\nletter 4 2 m.cmd1.act1\nletter 9 * tic\n0 4 1\n1 9 0\n";
        let a = parse_automaton(src, LetterPolicy::UniquePerTransition).unwrap();
        assert_eq!(a.to_string(), src);
        let b = parse_automaton(&a.to_string(), LetterPolicy::UniquePerTransition).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn empty_finals_line() {
        let a =
            parse_automaton("states 1\ninitial 0\nfinals\n", LetterPolicy::Deterministic).unwrap();
        assert_eq!(a.finals().count(), 0);
    }

    #[test]
    fn errors_carry_line_numbers() {
        let err =
            parse_automaton("states 2\ninitial x\n", LetterPolicy::Deterministic).unwrap_err();
        assert_eq!(err.to_string(), "line 2: expected a state index, found `x`");
        let err = parse_automaton(
            "states 2\ninitial 0\nfinals 0\n0 a 7\n",
            LetterPolicy::Deterministic,
        )
        .unwrap_err();
        assert!(matches!(err, ParseAutomatonError::Invalid(_)));
    }
}
