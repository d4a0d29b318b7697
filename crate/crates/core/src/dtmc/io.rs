//! Plain-text serialization for chains and reward structures.
//!
//! The format is line oriented. A file starts with a header `dtmc <states>
//! <initial>`, followed in any order by transition lines `<from> <to>
//! <prob>`, `label <name> <state…>` lines, and reward lines `srew <state>
//! <value>` / `trew <from> <to> <value>`. Blank lines and `#` comments are
//! ignored. Writing is canonical — rows, labels and reward items come out
//! sorted — and values print in shortest round-trip form, so a
//! read/write/read cycle reproduces the file byte for byte.
//!
//! Parsing checks shape only (indices in range, numbers well formed); use
//! [`Dtmc::validate`] afterwards to check stochasticity.

use std::fmt::Write as _;

use thiserror::Error;

use crate::scalar::Real;

use super::{Dtmc, RewardStructure};

#[derive(Debug, Error, Clone, PartialEq)]
#[error("line {line}: {msg}")]
pub struct FormatError {
    pub line: usize,
    pub msg: String,
}

fn err<T>(line: usize, msg: impl Into<String>) -> Result<T, FormatError> {
    Err(FormatError { line, msg: msg.into() })
}

pub fn to_text<T: Real>(d: &Dtmc<T>, rewards: Option<&RewardStructure<T>>) -> String {
    let mut out = String::new();
    writeln!(out, "dtmc {} {}", d.n_states(), d.initial()).unwrap();
    for s in 0..d.n_states() {
        for &(to, p) in d.row(s) {
            writeln!(out, "{s} {to} {p}").unwrap();
        }
    }
    for (name, states) in d.labels() {
        write!(out, "label {name}").unwrap();
        for s in states {
            write!(out, " {s}").unwrap();
        }
        out.push('\n');
    }
    if let Some(r) = rewards {
        for (s, &v) in r.state_rewards().iter().enumerate() {
            if v != T::zero() {
                writeln!(out, "srew {s} {v}").unwrap();
            }
        }
        for s in 0..d.n_states() {
            for &(to, v) in r.transition_rewards(s) {
                writeln!(out, "trew {s} {to} {v}").unwrap();
            }
        }
    }
    out
}

pub fn from_text<T: Real>(
    text: &str,
) -> Result<(Dtmc<T>, Option<RewardStructure<T>>), FormatError> {
    let mut d: Option<Dtmc<T>> = None;
    let mut rewards: Option<RewardStructure<T>> = None;

    for (idx, raw) in text.lines().enumerate() {
        let lineno = idx + 1;
        let line = match raw.find('#') {
            Some(at) => &raw[..at],
            None => raw,
        }
        .trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();

        if fields[0] == "dtmc" {
            if d.is_some() {
                return err(lineno, "duplicate header");
            }
            if fields.len() != 3 {
                return err(lineno, "header must be `dtmc <states> <initial>`");
            }
            let n = parse_num::<usize>(lineno, fields[1], "state count")?;
            if n == 0 {
                return err(lineno, "state count must be positive");
            }
            let init = parse_num::<usize>(lineno, fields[2], "initial state")?;
            if init >= n {
                return err(lineno, format!("initial state {init} out of range (0..{n})"));
            }
            d = Some(Dtmc::new(n, init));
            continue;
        }

        let chain = match d.as_mut() {
            Some(c) => c,
            None => return err(lineno, "expected `dtmc <states> <initial>` header first"),
        };
        let n = chain.n_states();
        match fields[0] {
            "label" => {
                if fields.len() < 2 {
                    return err(lineno, "label needs a name");
                }
                let name = fields[1];
                if !is_identifier(name) {
                    return err(lineno, format!("bad label name `{name}`"));
                }
                for f in &fields[2..] {
                    let s = parse_state(lineno, f, n)?;
                    chain.add_label(name, [s]);
                }
            }
            "srew" => {
                if fields.len() != 3 {
                    return err(lineno, "state reward must be `srew <state> <value>`");
                }
                let s = parse_state(lineno, fields[1], n)?;
                let v = parse_num::<T>(lineno, fields[2], "reward value")?;
                rewards
                    .get_or_insert_with(|| RewardStructure::new(n))
                    .add_state_reward(s, v);
            }
            "trew" => {
                if fields.len() != 4 {
                    return err(lineno, "transition reward must be `trew <from> <to> <value>`");
                }
                let from = parse_state(lineno, fields[1], n)?;
                let to = parse_state(lineno, fields[2], n)?;
                let v = parse_num::<T>(lineno, fields[3], "reward value")?;
                rewards
                    .get_or_insert_with(|| RewardStructure::new(n))
                    .add_transition_reward(from, to, v);
            }
            _ => {
                if fields.len() != 3 {
                    return err(
                        lineno,
                        format!("unrecognized line starting with `{}`", fields[0]),
                    );
                }
                let from = parse_state(lineno, fields[0], n)?;
                let to = parse_state(lineno, fields[1], n)?;
                let p = parse_num::<T>(lineno, fields[2], "probability")?;
                chain.add(from, to, p);
            }
        }
    }

    match d {
        Some(chain) => Ok((chain, rewards)),
        None => err(1, "empty input: expected `dtmc <states> <initial>` header"),
    }
}

fn parse_num<N: std::str::FromStr>(
    line: usize,
    field: &str,
    what: &str,
) -> Result<N, FormatError> {
    field
        .parse()
        .map_err(|_| FormatError { line, msg: format!("bad {what} `{field}`") })
}

fn parse_state(line: usize, field: &str, n: usize) -> Result<usize, FormatError> {
    let s = parse_num::<usize>(line, field, "state index")?;
    if s >= n {
        return err(line, format!("state {s} out of range (0..{n})"));
    }
    Ok(s)
}

fn is_identifier(name: &str) -> bool {
    let mut chars = name.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}
