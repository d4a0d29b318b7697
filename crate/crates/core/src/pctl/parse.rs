//! Hand-rolled lexer and recursive-descent parser for the property syntax.

use thiserror::Error;

use super::{Bound, Cmp, Formula, PathFormula, RewardForm, RESERVED};

#[derive(Debug, Error, Clone, PartialEq)]
#[error("line {line}, column {pos}: {msg}")]
pub struct ParseError {
    pub line: usize,
    pub pos: usize,
    pub msg: String,
}

/// One parsed line of a property file.
#[derive(Debug, Clone, PartialEq)]
pub struct Property {
    pub line: usize,
    pub source: String,
    pub formula: Formula,
}

pub fn parse_formula(text: &str) -> Result<Formula, ParseError> {
    let toks = lex(text, 1)?;
    let mut p = Parser { toks, at: 0, line: 1, end: text.len() + 1 };
    let f = p.formula()?;
    p.expect_end()?;
    Ok(f)
}

/// Parses one property per line; `#` starts a comment, blank lines are
/// skipped. Reported errors carry the 1-based line number.
pub fn parse_property_file(text: &str) -> Result<Vec<Property>, ParseError> {
    let mut out = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let body = match raw.find('#') {
            Some(at) => &raw[..at],
            None => raw,
        };
        if body.trim().is_empty() {
            continue;
        }
        let toks = lex(body, line)?;
        let mut p = Parser { toks, at: 0, line, end: body.len() + 1 };
        let formula = p.formula()?;
        p.expect_end()?;
        out.push(Property { line, source: body.trim().to_string(), formula });
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Number(String),
    Str(String),
    LParen,
    RParen,
    LBracket,
    RBracket,
    LBrace,
    RBrace,
    Bang,
    Amp,
    Query,
    Eq,
    Lt,
    Le,
    Gt,
    Ge,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Number(s) => format!("number `{s}`"),
            Tok::Str(s) => format!("\"{s}\""),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::LBracket => "`[`".into(),
            Tok::RBracket => "`]`".into(),
            Tok::LBrace => "`{`".into(),
            Tok::RBrace => "`}`".into(),
            Tok::Bang => "`!`".into(),
            Tok::Amp => "`&`".into(),
            Tok::Query => "`=?`".into(),
            Tok::Eq => "`=`".into(),
            Tok::Lt => "`<`".into(),
            Tok::Le => "`<=`".into(),
            Tok::Gt => "`>`".into(),
            Tok::Ge => "`>=`".into(),
        }
    }
}

fn lex(text: &str, line: usize) -> Result<Vec<(usize, Tok)>, ParseError> {
    let err = |pos: usize, msg: String| ParseError { line, pos, msg };
    let bytes = text.as_bytes();
    let mut toks = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        let pos = i + 1;
        match c {
            ' ' | '\t' => {
                i += 1;
                continue;
            }
            '(' => toks.push((pos, Tok::LParen)),
            ')' => toks.push((pos, Tok::RParen)),
            '[' => toks.push((pos, Tok::LBracket)),
            ']' => toks.push((pos, Tok::RBracket)),
            '{' => toks.push((pos, Tok::LBrace)),
            '}' => toks.push((pos, Tok::RBrace)),
            '!' => toks.push((pos, Tok::Bang)),
            '&' => toks.push((pos, Tok::Amp)),
            '<' | '>' | '=' => {
                let next = bytes.get(i + 1).copied().map(|b| b as char);
                let tok = match (c, next) {
                    ('<', Some('=')) => {
                        i += 1;
                        Tok::Le
                    }
                    ('>', Some('=')) => {
                        i += 1;
                        Tok::Ge
                    }
                    ('=', Some('?')) => {
                        i += 1;
                        Tok::Query
                    }
                    ('<', _) => Tok::Lt,
                    ('>', _) => Tok::Gt,
                    ('=', _) => Tok::Eq,
                    _ => unreachable!(),
                };
                toks.push((pos, tok));
            }
            '"' => {
                let start = i + 1;
                let mut j = start;
                while j < bytes.len() && bytes[j] as char != '"' {
                    j += 1;
                }
                if j == bytes.len() {
                    return Err(err(pos, "unterminated string".into()));
                }
                toks.push((pos, Tok::Str(text[start..j].to_string())));
                i = j;
            }
            c if c.is_ascii_digit() => {
                let start = i;
                while i + 1 < bytes.len()
                    && matches!(bytes[i + 1] as char, '0'..='9' | '.' | 'e' | 'E')
                {
                    if matches!(bytes[i + 1] as char, 'e' | 'E')
                        && matches!(bytes.get(i + 2).copied().map(|b| b as char), Some('+' | '-'))
                    {
                        i += 1;
                    }
                    i += 1;
                }
                toks.push((pos, Tok::Number(text[start..=i].to_string())));
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let start = i;
                while i + 1 < bytes.len()
                    && matches!(bytes[i + 1] as char, 'a'..='z' | 'A'..='Z' | '0'..='9' | '_')
                {
                    i += 1;
                }
                toks.push((pos, Tok::Ident(text[start..=i].to_string())));
            }
            other => return Err(err(pos, format!("unexpected character `{other}`"))),
        }
        i += 1;
    }
    Ok(toks)
}

struct Parser {
    toks: Vec<(usize, Tok)>,
    at: usize,
    line: usize,
    end: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.at).map(|(_, t)| t)
    }

    fn peek_ident(&self, word: &str) -> bool {
        matches!(self.peek(), Some(Tok::Ident(s)) if s == word)
    }

    fn bump(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.at).map(|(_, t)| t.clone());
        if t.is_some() {
            self.at += 1;
        }
        t
    }

    fn here(&self) -> usize {
        self.toks.get(self.at).map(|&(p, _)| p).unwrap_or(self.end)
    }

    fn fail<T>(&self, msg: impl Into<String>) -> Result<T, ParseError> {
        Err(ParseError { line: self.line, pos: self.here(), msg: msg.into() })
    }

    fn expect(&mut self, want: &Tok, ctx: &str) -> Result<(), ParseError> {
        match self.peek() {
            Some(t) if t == want => {
                self.at += 1;
                Ok(())
            }
            Some(t) => {
                let d = t.describe();
                self.fail(format!("expected {} {ctx}, found {d}", want.describe()))
            }
            None => self.fail(format!("expected {} {ctx}", want.describe())),
        }
    }

    fn expect_end(&self) -> Result<(), ParseError> {
        match self.peek() {
            None => Ok(()),
            Some(t) => self.fail(format!("unexpected {} after the formula", t.describe())),
        }
    }

    fn formula(&mut self) -> Result<Formula, ParseError> {
        let mut left = self.unary()?;
        while matches!(self.peek(), Some(Tok::Amp)) {
            self.at += 1;
            let right = self.unary()?;
            left = Formula::And(Box::new(left), Box::new(right));
        }
        Ok(left)
    }

    fn unary(&mut self) -> Result<Formula, ParseError> {
        if matches!(self.peek(), Some(Tok::Bang)) {
            self.at += 1;
            return Ok(Formula::Not(Box::new(self.unary()?)));
        }
        self.primary()
    }

    fn primary(&mut self) -> Result<Formula, ParseError> {
        match self.peek() {
            Some(Tok::LParen) => {
                self.at += 1;
                let f = self.formula()?;
                self.expect(&Tok::RParen, "to close the group")?;
                Ok(f)
            }
            Some(Tok::Ident(s)) => match s.as_str() {
                "true" => {
                    self.at += 1;
                    Ok(Formula::True)
                }
                "P" => {
                    self.at += 1;
                    self.prob_operator()
                }
                "R" => {
                    self.at += 1;
                    self.reward_operator()
                }
                w if RESERVED.contains(&w) => {
                    self.fail(format!("`{w}` is reserved and cannot name an atom"))
                }
                _ => {
                    let name = s.clone();
                    self.at += 1;
                    Ok(Formula::Atom(name))
                }
            },
            Some(t) => {
                let d = t.describe();
                self.fail(format!("expected a formula, found {d}"))
            }
            None => self.fail("expected a formula"),
        }
    }

    fn prob_operator(&mut self) -> Result<Formula, ParseError> {
        let bound = self.bound(BoundKind::Probability)?;
        self.expect(&Tok::LBracket, "before the path formula")?;
        let path = self.path()?;
        self.expect(&Tok::RBracket, "after the path formula")?;
        Ok(Formula::Prob { bound, path })
    }

    fn reward_operator(&mut self) -> Result<Formula, ParseError> {
        let name = if matches!(self.peek(), Some(Tok::LBrace)) {
            self.at += 1;
            let n = match self.bump() {
                Some(Tok::Str(s)) => s,
                _ => return self.fail("expected a quoted reward name after `{`"),
            };
            self.expect(&Tok::RBrace, "after the reward name")?;
            Some(n)
        } else {
            None
        };
        let bound = self.bound(BoundKind::Reward)?;
        self.expect(&Tok::LBracket, "before the reward form")?;
        let form = self.reward_form()?;
        self.expect(&Tok::RBracket, "after the reward form")?;
        Ok(Formula::Reward { name, bound, form })
    }

    fn bound(&mut self, kind: BoundKind) -> Result<Bound, ParseError> {
        let op = match self.peek() {
            Some(Tok::Query) => {
                self.at += 1;
                return Ok(Bound::Query);
            }
            Some(Tok::Lt) => Cmp::Lt,
            Some(Tok::Le) => Cmp::Le,
            Some(Tok::Gt) => Cmp::Gt,
            Some(Tok::Ge) => Cmp::Ge,
            _ => return self.fail("expected `=?` or a comparison like `>=0.9`"),
        };
        self.at += 1;
        let v = self.number(kind.describe())?;
        match kind {
            BoundKind::Probability if !(0.0..=1.0).contains(&v) => {
                self.fail("probability threshold must lie in [0, 1]")
            }
            BoundKind::Reward if !(v >= 0.0 && v.is_finite()) => {
                self.fail("reward threshold must be finite and nonnegative")
            }
            _ => Ok(Bound::Cmp(op, v)),
        }
    }

    fn number(&mut self, what: &str) -> Result<f64, ParseError> {
        match self.peek() {
            Some(Tok::Number(s)) => match s.parse::<f64>() {
                Ok(v) => {
                    self.at += 1;
                    Ok(v)
                }
                Err(_) => {
                    let s = s.clone();
                    self.fail(format!("bad {what} `{s}`"))
                }
            },
            _ => self.fail(format!("expected a {what}")),
        }
    }

    fn step_bound(&mut self) -> Result<u64, ParseError> {
        match self.peek() {
            Some(Tok::Number(s)) => match s.parse::<u64>() {
                Ok(v) => {
                    self.at += 1;
                    Ok(v)
                }
                Err(_) => self.fail("step bound must be a nonnegative integer"),
            },
            _ => self.fail("expected an integer step bound"),
        }
    }

    fn path(&mut self) -> Result<PathFormula, ParseError> {
        if self.peek_ident("X") {
            self.at += 1;
            return Ok(PathFormula::Next(Box::new(self.formula()?)));
        }
        if self.peek_ident("F") {
            self.at += 1;
            let vacuous = Box::new(Formula::True);
            if matches!(self.peek(), Some(Tok::Le)) {
                self.at += 1;
                let t = self.step_bound()?;
                return Ok(PathFormula::BoundedUntil(vacuous, Box::new(self.formula()?), t));
            }
            return Ok(PathFormula::Until(vacuous, Box::new(self.formula()?)));
        }
        let left = self.formula()?;
        if !self.peek_ident("U") {
            return self.fail("expected `U` in the path formula");
        }
        self.at += 1;
        let step = if matches!(self.peek(), Some(Tok::Le)) {
            self.at += 1;
            Some(self.step_bound()?)
        } else {
            None
        };
        let right = self.formula()?;
        if self.peek_ident("U") {
            return self.fail("`U` does not associate; parenthesize the inner until");
        }
        Ok(match step {
            Some(t) => PathFormula::BoundedUntil(Box::new(left), Box::new(right), t),
            None => PathFormula::Until(Box::new(left), Box::new(right)),
        })
    }

    fn reward_form(&mut self) -> Result<RewardForm, ParseError> {
        if self.peek_ident("I") {
            self.at += 1;
            self.expect(&Tok::Eq, "in `I=t`")?;
            return Ok(RewardForm::Instantaneous(self.step_bound()?));
        }
        if self.peek_ident("C") {
            self.at += 1;
            self.expect(&Tok::Le, "in `C<=t`")?;
            return Ok(RewardForm::Cumulative(self.step_bound()?));
        }
        if self.peek_ident("F") {
            self.at += 1;
            return Ok(RewardForm::Reachability(Box::new(self.formula()?)));
        }
        if self.peek_ident("S") {
            self.at += 1;
            return Ok(RewardForm::SteadyState);
        }
        self.fail("expected a reward form: `I=t`, `C<=t`, `F φ`, or `S`")
    }
}

#[derive(Clone, Copy)]
enum BoundKind {
    Probability,
    Reward,
}

impl BoundKind {
    fn describe(self) -> &'static str {
        match self {
            BoundKind::Probability => "probability threshold",
            BoundKind::Reward => "reward threshold",
        }
    }
}
