//! Text form of guarded-command systems.
//!
//! ```text
//! module walker
//!   x : [0..3] init 0;
//!   [] x < 3 -> 0.5:(x'=x+1) + 0.5:(x'=max(x - 1, 0));
//! endmodule
//! label "stuck" = x = 3;
//! rewards "position"
//!   true : x;
//!   [] x' > x : 1;
//! endrewards
//! ```
//!
//! `#` starts a comment. Writing is canonical (fixed layout, explicit
//! update probabilities, minimal parentheses), so write–parse–write is
//! byte-stable.

use std::fmt::Write as _;

use thiserror::Error;

use super::{
    BinOp, Command, Expr, GuardedCommandModule, LabelDecl, ModelSystem, RewardDecl,
    StateRewardItem, TransRewardItem, Update, Variable,
};

#[derive(Debug, Error, Clone, PartialEq)]
#[error("line {line}, column {col}: {msg}")]
pub struct TextError {
    pub line: usize,
    pub col: usize,
    pub msg: String,
}

const KEYWORDS: &[&str] = &[
    "module", "endmodule", "label", "rewards", "endrewards", "init", "min", "max", "true",
    "false",
];

pub fn write_system(sys: &ModelSystem) -> String {
    let mut out = String::new();
    for m in &sys.modules {
        writeln!(out, "module {}", m.name).unwrap();
        for v in &m.vars {
            writeln!(out, "  {} : [{}..{}] init {};", v.name, v.lo, v.hi, v.init).unwrap();
        }
        for c in &m.commands {
            write!(out, "  [] {} -> ", c.guard).unwrap();
            let updates: Vec<String> = c
                .updates
                .iter()
                .map(|u| {
                    let assigns: Vec<String> = u
                        .assigns
                        .iter()
                        .map(|(v, e)| format!("({v}'={e})"))
                        .collect();
                    format!("{}:{}", u.prob, assigns.join("&"))
                })
                .collect();
            writeln!(out, "{};", updates.join(" + ")).unwrap();
        }
        writeln!(out, "endmodule").unwrap();
    }
    for l in &sys.labels {
        writeln!(out, "label \"{}\" = {};", l.name, l.expr).unwrap();
    }
    for r in &sys.rewards {
        writeln!(out, "rewards \"{}\"", r.name).unwrap();
        for item in &r.state_items {
            writeln!(out, "  {} : {};", item.guard, item.value).unwrap();
        }
        for item in &r.trans_items {
            writeln!(out, "  [] {} : {};", item.guard, item.value).unwrap();
        }
        writeln!(out, "endrewards").unwrap();
    }
    out
}

pub fn parse_system(text: &str) -> Result<ModelSystem, TextError> {
    let toks = lex(text)?;
    let mut p = Parser { toks, at: 0 };
    let mut sys = ModelSystem::default();
    loop {
        match p.peek() {
            None => break,
            Some(Tok::Ident(w)) if w == "module" => {
                p.at += 1;
                sys.modules.push(p.module()?);
            }
            Some(Tok::Ident(w)) if w == "label" => {
                p.at += 1;
                let name = p.string("label name")?;
                p.expect(&Tok::Eq, "after the label name")?;
                let expr = p.expr()?;
                p.expect(&Tok::Semi, "after the label expression")?;
                sys.labels.push(LabelDecl { name, expr });
            }
            Some(Tok::Ident(w)) if w == "rewards" => {
                p.at += 1;
                sys.rewards.push(p.rewards()?);
            }
            Some(_) => {
                return p.fail("expected `module`, `label`, or `rewards`");
            }
        }
    }
    Ok(sys)
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
    Prime,
    Colon,
    Semi,
    Comma,
    DotDot,
    Arrow,
    Plus,
    Minus,
    Star,
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
    Amp,
    Pipe,
    Bang,
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
            Tok::Prime => "`'`".into(),
            Tok::Colon => "`:`".into(),
            Tok::Semi => "`;`".into(),
            Tok::Comma => "`,`".into(),
            Tok::DotDot => "`..`".into(),
            Tok::Arrow => "`->`".into(),
            Tok::Plus => "`+`".into(),
            Tok::Minus => "`-`".into(),
            Tok::Star => "`*`".into(),
            Tok::Eq => "`=`".into(),
            Tok::Ne => "`!=`".into(),
            Tok::Lt => "`<`".into(),
            Tok::Le => "`<=`".into(),
            Tok::Gt => "`>`".into(),
            Tok::Ge => "`>=`".into(),
            Tok::Amp => "`&`".into(),
            Tok::Pipe => "`|`".into(),
            Tok::Bang => "`!`".into(),
        }
    }
}

struct Located {
    tok: Tok,
    line: usize,
    col: usize,
}

fn lex(text: &str) -> Result<Vec<Located>, TextError> {
    let chars: Vec<char> = text.chars().collect();
    let mut toks = Vec::new();
    let mut i = 0;
    let mut line = 1;
    let mut col = 1;
    while i < chars.len() {
        let c = chars[i];
        let (tline, tcol) = (line, col);
        let mut push = |tok: Tok| toks.push(Located { tok, line: tline, col: tcol });
        let mut advance = 1;
        match c {
            '\n' => {
                line += 1;
                col = 1;
                i += 1;
                continue;
            }
            ' ' | '\t' | '\r' => {}
            '#' => {
                while i < chars.len() && chars[i] != '\n' {
                    i += 1;
                    col += 1;
                }
                continue;
            }
            '(' => push(Tok::LParen),
            ')' => push(Tok::RParen),
            '[' => push(Tok::LBracket),
            ']' => push(Tok::RBracket),
            '\'' => push(Tok::Prime),
            ':' => push(Tok::Colon),
            ';' => push(Tok::Semi),
            ',' => push(Tok::Comma),
            '+' => push(Tok::Plus),
            '*' => push(Tok::Star),
            '&' => push(Tok::Amp),
            '|' => push(Tok::Pipe),
            '=' => push(Tok::Eq),
            '.' => {
                if chars.get(i + 1) == Some(&'.') {
                    push(Tok::DotDot);
                    advance = 2;
                } else {
                    return Err(TextError { line, col, msg: "stray `.`".into() });
                }
            }
            '-' => {
                if chars.get(i + 1) == Some(&'>') {
                    push(Tok::Arrow);
                    advance = 2;
                } else {
                    push(Tok::Minus);
                }
            }
            '<' => {
                if chars.get(i + 1) == Some(&'=') {
                    push(Tok::Le);
                    advance = 2;
                } else {
                    push(Tok::Lt);
                }
            }
            '>' => {
                if chars.get(i + 1) == Some(&'=') {
                    push(Tok::Ge);
                    advance = 2;
                } else {
                    push(Tok::Gt);
                }
            }
            '!' => {
                if chars.get(i + 1) == Some(&'=') {
                    push(Tok::Ne);
                    advance = 2;
                } else {
                    push(Tok::Bang);
                }
            }
            '"' => {
                let mut j = i + 1;
                while j < chars.len() && chars[j] != '"' && chars[j] != '\n' {
                    j += 1;
                }
                if chars.get(j) != Some(&'"') {
                    return Err(TextError { line, col, msg: "unterminated string".into() });
                }
                push(Tok::Str(chars[i + 1..j].iter().collect()));
                advance = j - i + 1;
            }
            c if c.is_ascii_digit() => {
                let mut j = i + 1;
                while j < chars.len() && chars[j].is_ascii_digit() {
                    j += 1;
                }
                // A `.` continues the number only when it is not the `..`
                // of a range.
                if chars.get(j) == Some(&'.') && chars.get(j + 1) != Some(&'.') {
                    j += 1;
                    while j < chars.len() && chars[j].is_ascii_digit() {
                        j += 1;
                    }
                }
                if matches!(chars.get(j), Some('e' | 'E')) {
                    j += 1;
                    if matches!(chars.get(j), Some('+' | '-')) {
                        j += 1;
                    }
                    while j < chars.len() && chars[j].is_ascii_digit() {
                        j += 1;
                    }
                }
                push(Tok::Number(chars[i..j].iter().collect()));
                advance = j - i;
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let mut j = i + 1;
                while j < chars.len()
                    && (chars[j].is_ascii_alphanumeric() || chars[j] == '_')
                {
                    j += 1;
                }
                push(Tok::Ident(chars[i..j].iter().collect()));
                advance = j - i;
            }
            other => {
                return Err(TextError {
                    line,
                    col,
                    msg: format!("unexpected character `{other}`"),
                });
            }
        }
        i += advance;
        col += advance;
    }
    Ok(toks)
}

struct Parser {
    toks: Vec<Located>,
    at: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.at).map(|l| &l.tok)
    }

    fn peek_is(&self, t: &Tok) -> bool {
        self.peek() == Some(t)
    }

    fn keyword(&self, w: &str) -> bool {
        matches!(self.peek(), Some(Tok::Ident(s)) if s == w)
    }

    fn here(&self) -> (usize, usize) {
        self.toks
            .get(self.at)
            .or_else(|| self.toks.last())
            .map(|l| (l.line, l.col))
            .unwrap_or((1, 1))
    }

    fn fail<T>(&self, msg: impl Into<String>) -> Result<T, TextError> {
        let (line, col) = self.here();
        Err(TextError { line, col, msg: msg.into() })
    }

    fn expect(&mut self, want: &Tok, ctx: &str) -> Result<(), TextError> {
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

    fn ident(&mut self, what: &str) -> Result<String, TextError> {
        match self.peek() {
            Some(Tok::Ident(s)) if !KEYWORDS.contains(&s.as_str()) => {
                let s = s.clone();
                self.at += 1;
                Ok(s)
            }
            Some(Tok::Ident(s)) => {
                let s = s.clone();
                self.fail(format!("`{s}` is a keyword and cannot be used as {what}"))
            }
            _ => self.fail(format!("expected {what}")),
        }
    }

    fn string(&mut self, what: &str) -> Result<String, TextError> {
        match self.peek() {
            Some(Tok::Str(s)) => {
                let s = s.clone();
                self.at += 1;
                Ok(s)
            }
            _ => self.fail(format!("expected a quoted {what}")),
        }
    }

    fn signed_int(&mut self, what: &str) -> Result<i64, TextError> {
        let neg = if self.peek_is(&Tok::Minus) {
            self.at += 1;
            true
        } else {
            false
        };
        match self.peek() {
            Some(Tok::Number(s)) => match s.parse::<i64>() {
                Ok(v) => {
                    self.at += 1;
                    Ok(if neg { -v } else { v })
                }
                Err(_) => {
                    let s = s.clone();
                    self.fail(format!("bad {what} `{s}` (expected an integer)"))
                }
            },
            _ => self.fail(format!("expected {what}")),
        }
    }

    fn module(&mut self) -> Result<GuardedCommandModule, TextError> {
        let name = self.ident("a module name")?;
        let mut vars = Vec::new();
        let mut commands = Vec::new();
        loop {
            if self.keyword("endmodule") {
                self.at += 1;
                break;
            }
            match self.peek() {
                Some(Tok::Ident(_)) => vars.push(self.var_decl()?),
                Some(Tok::LBracket) => commands.push(self.command()?),
                _ => {
                    return self.fail(
                        "expected a variable declaration, a command, or `endmodule`",
                    )
                }
            }
        }
        Ok(GuardedCommandModule { name, vars, commands })
    }

    fn var_decl(&mut self) -> Result<Variable, TextError> {
        let name = self.ident("a variable name")?;
        self.expect(&Tok::Colon, "after the variable name")?;
        self.expect(&Tok::LBracket, "to open the range")?;
        let lo = self.signed_int("range lower bound")?;
        self.expect(&Tok::DotDot, "between the range bounds")?;
        let hi = self.signed_int("range upper bound")?;
        self.expect(&Tok::RBracket, "to close the range")?;
        if !self.keyword("init") {
            return self.fail("expected `init`");
        }
        self.at += 1;
        let init = self.signed_int("initial value")?;
        self.expect(&Tok::Semi, "after the variable declaration")?;
        Ok(Variable { name, lo, hi, init })
    }

    fn command(&mut self) -> Result<Command, TextError> {
        self.expect(&Tok::LBracket, "to open the command")?;
        self.expect(&Tok::RBracket, "to open the command")?;
        let guard = self.expr()?;
        self.expect(&Tok::Arrow, "between guard and updates")?;
        let mut updates = vec![self.update()?];
        while self.peek_is(&Tok::Plus) {
            self.at += 1;
            updates.push(self.update()?);
        }
        if updates.len() > 1 && updates.iter().any(|u| u.prob.is_nan()) {
            return self.fail("every update needs an explicit probability when there are several");
        }
        for u in updates.iter_mut() {
            if u.prob.is_nan() {
                u.prob = 1.0;
            }
        }
        self.expect(&Tok::Semi, "after the command")?;
        Ok(Command { guard, updates })
    }

    /// `prob:(x'=e)&(y'=e)`; a bare assignment list means probability one
    /// (marked NaN here, resolved by the caller).
    fn update(&mut self) -> Result<Update, TextError> {
        let prob = match self.peek() {
            Some(Tok::Number(s)) => {
                let v: f64 = s
                    .parse()
                    .map_err(|_| self.fail::<()>("bad probability").unwrap_err())?;
                self.at += 1;
                self.expect(&Tok::Colon, "after the update probability")?;
                v
            }
            _ => f64::NAN,
        };
        let mut assigns = vec![self.assign()?];
        while self.peek_is(&Tok::Amp) {
            self.at += 1;
            assigns.push(self.assign()?);
        }
        Ok(Update { prob, assigns })
    }

    fn assign(&mut self) -> Result<(String, Expr), TextError> {
        self.expect(&Tok::LParen, "to open the assignment")?;
        let var = self.ident("a variable name")?;
        self.expect(&Tok::Prime, "after the assigned variable")?;
        self.expect(&Tok::Eq, "in the assignment")?;
        let e = self.expr()?;
        self.expect(&Tok::RParen, "to close the assignment")?;
        Ok((var, e))
    }

    fn rewards(&mut self) -> Result<RewardDecl, TextError> {
        let name = self.string("reward structure name")?;
        let mut state_items = Vec::new();
        let mut trans_items = Vec::new();
        loop {
            if self.keyword("endrewards") {
                self.at += 1;
                break;
            }
            if self.peek().is_none() {
                return self.fail("expected `endrewards`");
            }
            if self.peek_is(&Tok::LBracket) {
                self.at += 1;
                self.expect(&Tok::RBracket, "to open the transition reward item")?;
                let guard = self.expr()?;
                self.expect(&Tok::Colon, "between guard and value")?;
                let value = self.expr()?;
                self.expect(&Tok::Semi, "after the reward item")?;
                trans_items.push(TransRewardItem { guard, value });
            } else {
                let guard = self.expr()?;
                self.expect(&Tok::Colon, "between guard and value")?;
                let value = self.expr()?;
                self.expect(&Tok::Semi, "after the reward item")?;
                state_items.push(StateRewardItem { guard, value });
            }
        }
        Ok(RewardDecl { name, state_items, trans_items })
    }

    fn expr(&mut self) -> Result<Expr, TextError> {
        self.or_expr()
    }

    fn or_expr(&mut self) -> Result<Expr, TextError> {
        let mut left = self.and_expr()?;
        while self.peek_is(&Tok::Pipe) {
            self.at += 1;
            left = left.or(self.and_expr()?);
        }
        Ok(left)
    }

    fn and_expr(&mut self) -> Result<Expr, TextError> {
        let mut left = self.not_expr()?;
        while self.peek_is(&Tok::Amp) {
            self.at += 1;
            left = left.and(self.not_expr()?);
        }
        Ok(left)
    }

    fn not_expr(&mut self) -> Result<Expr, TextError> {
        if self.peek_is(&Tok::Bang) {
            self.at += 1;
            return Ok(self.not_expr()?.not());
        }
        self.cmp_expr()
    }

    fn cmp_expr(&mut self) -> Result<Expr, TextError> {
        let left = self.add_expr()?;
        let op = match self.peek() {
            Some(Tok::Eq) => BinOp::Eq,
            Some(Tok::Ne) => BinOp::Ne,
            Some(Tok::Lt) => BinOp::Lt,
            Some(Tok::Le) => BinOp::Le,
            Some(Tok::Gt) => BinOp::Gt,
            Some(Tok::Ge) => BinOp::Ge,
            _ => return Ok(left),
        };
        self.at += 1;
        let right = self.add_expr()?;
        Ok(Expr::Binary(op, Box::new(left), Box::new(right)))
    }

    fn add_expr(&mut self) -> Result<Expr, TextError> {
        let mut left = self.mul_expr()?;
        loop {
            let op = match self.peek() {
                Some(Tok::Plus) => BinOp::Add,
                Some(Tok::Minus) => BinOp::Sub,
                _ => return Ok(left),
            };
            self.at += 1;
            let right = self.mul_expr()?;
            left = Expr::Binary(op, Box::new(left), Box::new(right));
        }
    }

    fn mul_expr(&mut self) -> Result<Expr, TextError> {
        let mut left = self.unary_expr()?;
        while self.peek_is(&Tok::Star) {
            self.at += 1;
            left = left.mul(self.unary_expr()?);
        }
        Ok(left)
    }

    fn unary_expr(&mut self) -> Result<Expr, TextError> {
        if self.peek_is(&Tok::Minus) {
            self.at += 1;
            let inner = self.unary_expr()?;
            // Fold a minus sign on a literal so `-3` stays one node.
            if let Expr::Int(v) = inner {
                return Ok(Expr::Int(-v));
            }
            return Ok(inner.neg());
        }
        self.primary_expr()
    }

    fn primary_expr(&mut self) -> Result<Expr, TextError> {
        match self.peek() {
            Some(Tok::LParen) => {
                self.at += 1;
                let e = self.expr()?;
                self.expect(&Tok::RParen, "to close the group")?;
                Ok(e)
            }
            Some(Tok::Number(s)) => match s.parse::<i64>() {
                Ok(v) => {
                    self.at += 1;
                    Ok(Expr::Int(v))
                }
                Err(_) => {
                    let s = s.clone();
                    self.fail(format!("`{s}` is not an integer"))
                }
            },
            Some(Tok::Ident(w)) => match w.as_str() {
                "true" => {
                    self.at += 1;
                    Ok(Expr::Bool(true))
                }
                "false" => {
                    self.at += 1;
                    Ok(Expr::Bool(false))
                }
                "min" | "max" => {
                    let op = if w == "min" { BinOp::Min } else { BinOp::Max };
                    self.at += 1;
                    self.expect(&Tok::LParen, "after `min`/`max`")?;
                    let a = self.expr()?;
                    self.expect(&Tok::Comma, "between the arguments")?;
                    let b = self.expr()?;
                    self.expect(&Tok::RParen, "to close the call")?;
                    Ok(Expr::Binary(op, Box::new(a), Box::new(b)))
                }
                _ => {
                    let name = self.ident("a variable")?;
                    let primed = if self.peek_is(&Tok::Prime) {
                        self.at += 1;
                        true
                    } else {
                        false
                    };
                    Ok(Expr::Var { name, primed })
                }
            },
            Some(t) => {
                let d = t.describe();
                self.fail(format!("expected an expression, found {d}"))
            }
            None => self.fail("expected an expression"),
        }
    }
}
