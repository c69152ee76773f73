//! Text form of estimands.
//!
//! ```text
//! sum_{w} p(w | a) sum_{a'} p(Y | w, a') p(a')
//! ```
//!
//! A bare variable name in a probability term is a free slot. A value symbol
//! is written `VAR=sym`, or just `sym` when VAR is upper-case and `sym` is its
//! lower-cased name followed by zero or more primes. Products are
//! juxtaposition, quotients are `(<expr>) / (<expr>)`, and `sum_{..}` /
//! `fix_{..}` extend as far to the right as possible. The empty product is
//! `1`.

use std::collections::BTreeSet;

use super::{Binder, Estimand, EstimandError, Slot, Value};

fn shorthand_var(var: &str) -> bool {
    var.bytes().any(|b| b.is_ascii_uppercase()) && !var.bytes().any(|b| b.is_ascii_lowercase())
}

fn is_shorthand(var: &str, symbol: &str, vars: &BTreeSet<String>) -> bool {
    let base = symbol.trim_end_matches('\'');
    shorthand_var(var) && base == var.to_ascii_lowercase() && !vars.contains(symbol)
}

struct Printer {
    vars: BTreeSet<String>,
    out: String,
}

impl Printer {
    fn symbol(&mut self, var: &str, symbol: &str) {
        if !is_shorthand(var, symbol, &self.vars) {
            self.out.push_str(var);
            self.out.push('=');
        }
        self.out.push_str(symbol);
    }

    fn slots(&mut self, slots: &[Slot]) {
        for (i, s) in slots.iter().enumerate() {
            if i > 0 {
                self.out.push_str(", ");
            }
            match &s.value {
                Value::Free => self.out.push_str(&s.var),
                Value::Symbol(sym) => self.symbol(&s.var, sym),
            }
        }
    }

    fn binders(&mut self, keyword: &str, binders: &[Binder]) {
        self.out.push_str(keyword);
        self.out.push_str("_{");
        for (i, b) in binders.iter().enumerate() {
            if i > 0 {
                self.out.push_str(", ");
            }
            self.symbol(&b.var, &b.symbol);
        }
        self.out.push_str("} ");
    }

    fn expr(&mut self, e: &Estimand) {
        match e {
            Estimand::Conditional { targets, given } => {
                self.out.push_str("p(");
                self.slots(targets);
                if !given.is_empty() {
                    self.out.push_str(" | ");
                    self.slots(given);
                }
                self.out.push(')');
            }
            Estimand::Marginal { sum_over, body } => {
                self.binders("sum", sum_over);
                self.expr(body);
            }
            Estimand::Fix { binder, body } => {
                self.binders("fix", std::slice::from_ref(binder));
                self.expr(body);
            }
            Estimand::Product(factors) if factors.is_empty() => self.out.push('1'),
            Estimand::Product(factors) => {
                for (i, f) in factors.iter().enumerate() {
                    if i > 0 {
                        self.out.push(' ');
                    }
                    let last = i + 1 == factors.len();
                    match f {
                        Estimand::Conditional { .. } | Estimand::Quotient { .. } => self.expr(f),
                        Estimand::Marginal { .. } | Estimand::Fix { .. } if last => self.expr(f),
                        _ => self.parenthesized(f),
                    }
                }
            }
            Estimand::Quotient {
                numerator,
                denominator,
            } => {
                self.parenthesized(numerator);
                self.out.push_str(" / ");
                self.parenthesized(denominator);
            }
        }
    }

    fn parenthesized(&mut self, e: &Estimand) {
        self.out.push('(');
        self.expr(e);
        self.out.push(')');
    }
}

/// Deterministic text form; see the module documentation for the grammar.
pub fn print_estimand(e: &Estimand) -> String {
    let mut p = Printer {
        vars: e.variables(),
        out: String::new(),
    };
    p.expr(e);
    p.out
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    One,
    LParen,
    RParen,
    LBrace,
    RBrace,
    Comma,
    Bar,
    Equals,
    Slash,
}

fn lex(text: &str) -> Result<Vec<(Tok, usize)>, EstimandError> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        let single = match c {
            b'(' => Some(Tok::LParen),
            b')' => Some(Tok::RParen),
            b'{' => Some(Tok::LBrace),
            b'}' => Some(Tok::RBrace),
            b',' => Some(Tok::Comma),
            b'|' => Some(Tok::Bar),
            b'=' => Some(Tok::Equals),
            b'/' => Some(Tok::Slash),
            b'1' => Some(Tok::One),
            _ => None,
        };
        if let Some(t) = single {
            out.push((t, i));
            i += 1;
        } else if c.is_ascii_whitespace() {
            i += 1;
        } else if c.is_ascii_alphabetic() || c == b'_' {
            let start = i;
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            while i < bytes.len() && bytes[i] == b'\'' {
                i += 1;
            }
            out.push((Tok::Ident(text[start..i].to_string()), start));
        } else {
            return Err(EstimandError::Parse {
                position: i,
                message: format!("unexpected character {:?}", text[i..].chars().next().unwrap()),
            });
        }
    }
    Ok(out)
}

struct Parser<'a> {
    toks: Vec<(Tok, usize)>,
    pos: usize,
    end: usize,
    variables: &'a BTreeSet<String>,
}

impl Parser<'_> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|t| &t.0)
    }

    fn offset(&self) -> usize {
        self.toks.get(self.pos).map_or(self.end, |t| t.1)
    }

    fn error(&self, message: impl Into<String>) -> EstimandError {
        EstimandError::Parse {
            position: self.offset(),
            message: message.into(),
        }
    }

    fn expect(&mut self, tok: Tok) -> Result<(), EstimandError> {
        if self.peek() == Some(&tok) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.error(format!("expected {tok:?}")))
        }
    }

    fn ident(&mut self) -> Result<String, EstimandError> {
        match self.peek() {
            Some(Tok::Ident(s)) => {
                let s = s.clone();
                self.pos += 1;
                Ok(s)
            }
            _ => Err(self.error("expected a name")),
        }
    }

    fn binder_keyword(&self) -> Option<&'static str> {
        match (self.peek(), self.toks.get(self.pos + 1).map(|t| &t.0)) {
            (Some(Tok::Ident(k)), Some(Tok::LBrace)) if k == "sum_" => Some("sum"),
            (Some(Tok::Ident(k)), Some(Tok::LBrace)) if k == "fix_" => Some("fix"),
            _ => None,
        }
    }

    fn starts_atom(&self) -> bool {
        match self.peek() {
            Some(Tok::LParen | Tok::One) => true,
            Some(Tok::Ident(k)) => {
                k == "p" && matches!(self.toks.get(self.pos + 1).map(|t| &t.0), Some(Tok::LParen))
            }
            _ => false,
        }
    }

    /// Variable for a shorthand symbol such as `a'`.
    fn shorthand_target(&self, symbol: &str) -> Option<String> {
        let base = symbol.trim_end_matches('\'');
        self.variables
            .iter()
            .find(|v| shorthand_var(v) && v.to_ascii_lowercase() == base)
            .cloned()
    }

    fn check_var(&self, var: &str) -> Result<(), EstimandError> {
        if self.variables.contains(var) {
            Ok(())
        } else {
            Err(EstimandError::UnknownVariable(var.to_string()))
        }
    }

    /// `VAR=sym` or shorthand `sym`; returns (var, symbol).
    fn symbol_ref(&mut self, allow_free: bool) -> Result<(String, Option<String>), EstimandError> {
        let first = self.ident()?;
        if self.peek() == Some(&Tok::Equals) {
            self.pos += 1;
            self.check_var(&first)?;
            let sym = self.ident()?;
            return Ok((first, Some(sym)));
        }
        if allow_free && self.variables.contains(&first) {
            return Ok((first, None));
        }
        match self.shorthand_target(&first) {
            Some(var) => Ok((var, Some(first))),
            None => Err(EstimandError::UnknownVariable(first)),
        }
    }

    fn slots(&mut self) -> Result<Vec<Slot>, EstimandError> {
        let mut out = Vec::new();
        loop {
            let (var, sym) = self.symbol_ref(true)?;
            out.push(Slot {
                var,
                value: sym.map_or(Value::Free, Value::Symbol),
            });
            if self.peek() == Some(&Tok::Comma) {
                self.pos += 1;
            } else {
                return Ok(out);
            }
        }
    }

    fn binders(&mut self) -> Result<Vec<Binder>, EstimandError> {
        self.pos += 1; // keyword
        self.expect(Tok::LBrace)?;
        let mut out = Vec::new();
        loop {
            let (var, sym) = self.symbol_ref(false)?;
            out.push(Binder {
                var,
                symbol: sym.expect("binders always carry a symbol"),
            });
            match self.peek() {
                Some(Tok::Comma) => self.pos += 1,
                _ => break,
            }
        }
        self.expect(Tok::RBrace)?;
        Ok(out)
    }

    fn binder_expr(&mut self, keyword: &str) -> Result<Estimand, EstimandError> {
        let at = self.offset();
        let binders = self.binders()?;
        let body = self.expr()?;
        if keyword == "sum" {
            Ok(Estimand::Marginal {
                sum_over: binders,
                body: Box::new(body),
            })
        } else {
            let mut binders = binders;
            if binders.len() != 1 {
                return Err(EstimandError::Parse {
                    position: at,
                    message: "fix_{..} binds exactly one symbol".into(),
                });
            }
            Ok(Estimand::Fix {
                binder: binders.pop().unwrap(),
                body: Box::new(body),
            })
        }
    }

    fn expr(&mut self) -> Result<Estimand, EstimandError> {
        let mut factors = Vec::new();
        loop {
            if let Some(keyword) = self.binder_keyword() {
                factors.push(self.binder_expr(keyword)?);
                break;
            }
            if !self.starts_atom() {
                break;
            }
            let atom = self.atom()?;
            if self.peek() == Some(&Tok::Slash) {
                self.pos += 1;
                let denominator = self.atom()?;
                factors.push(Estimand::Quotient {
                    numerator: Box::new(atom),
                    denominator: Box::new(denominator),
                });
            } else {
                factors.push(atom);
            }
        }
        match factors.len() {
            0 => Err(self.error("expected an expression")),
            1 => Ok(factors.pop().unwrap()),
            _ => Ok(Estimand::Product(factors)),
        }
    }

    fn atom(&mut self) -> Result<Estimand, EstimandError> {
        match self.peek() {
            Some(Tok::One) => {
                self.pos += 1;
                Ok(Estimand::Product(Vec::new()))
            }
            Some(Tok::LParen) => {
                self.pos += 1;
                let e = self.expr()?;
                self.expect(Tok::RParen)?;
                Ok(e)
            }
            _ => {
                self.pos += 1; // `p`
                self.expect(Tok::LParen)?;
                let targets = self.slots()?;
                let given = if self.peek() == Some(&Tok::Bar) {
                    self.pos += 1;
                    self.slots()?
                } else {
                    Vec::new()
                };
                self.expect(Tok::RParen)?;
                Ok(Estimand::Conditional { targets, given })
            }
        }
    }
}

/// Parses the text form. `variables` are the vertex names the estimand may
/// mention; they decide whether a bare token is a free variable or a
/// shorthand symbol.
pub fn parse_estimand<S: AsRef<str>>(text: &str, variables: &[S]) -> Result<Estimand, EstimandError> {
    let variables: BTreeSet<String> = variables.iter().map(|v| v.as_ref().to_string()).collect();
    let mut parser = Parser {
        toks: lex(text)?,
        pos: 0,
        end: text.len(),
        variables: &variables,
    };
    let e = parser.expr()?;
    if parser.pos != parser.toks.len() {
        return Err(parser.error("trailing input"));
    }
    Ok(e)
}
