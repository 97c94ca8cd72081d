//! Recursive-descent parser for recurrences and initial conditions.

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigInt;
use thiserror::Error;

use super::{IcIndex, IcMap, InitialConditions, Problem, RecurrenceSpec, RecurrenceSystem};
use crate::exprcore::{normalize, Expr, Func, Rat};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("syntax error at position {pos}: expected {expected}")]
    Syntax { pos: usize, expected: String },
    #[error("unknown `{0}` used with different numbers of arguments")]
    InconsistentArity(String),
    #[error("unknown `{0}` mixes shifted and divided arguments")]
    MixedForm(String),
    #[error("duplicate initial condition for {0}")]
    DuplicateCondition(String),
    #[error("{0}")]
    Invalid(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Num(BigInt),
    Ident(String),
    Punct(char),
    End,
}

struct Lexer {
    toks: Vec<(Tok, usize)>,
    at: usize,
}

fn lex(text: &str) -> Result<Lexer, ParseError> {
    let chars: Vec<char> = text.chars().collect();
    let mut toks = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            let s: String = chars[start..i].iter().collect();
            toks.push((Tok::Num(s.parse().unwrap()), start));
        } else if c.is_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            toks.push((Tok::Ident(chars[start..i].iter().collect()), start));
        } else if "+-*/^(),;=".contains(c) {
            toks.push((Tok::Punct(c), i));
            i += 1;
        } else {
            return Err(ParseError::Syntax { pos: i, expected: "an operator, number or identifier".into() });
        }
    }
    toks.push((Tok::End, chars.len()));
    Ok(Lexer { toks, at: 0 })
}

impl Lexer {
    fn peek(&self) -> &Tok {
        &self.toks[self.at].0
    }

    fn pos(&self) -> usize {
        self.toks[self.at].1
    }

    fn next(&mut self) -> Tok {
        let t = self.toks[self.at].0.clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        t
    }

    fn eat(&mut self, c: char) -> bool {
        if *self.peek() == Tok::Punct(c) {
            self.next();
            true
        } else {
            false
        }
    }

    fn fail<T>(&self, expected: &str) -> Result<T, ParseError> {
        Err(ParseError::Syntax { pos: self.pos(), expected: expected.into() })
    }

    fn expect(&mut self, c: char) -> Result<(), ParseError> {
        if self.eat(c) {
            Ok(())
        } else {
            self.fail(&format!("`{c}`"))
        }
    }

    fn ident(&mut self) -> Result<String, ParseError> {
        match self.peek().clone() {
            Tok::Ident(s) => {
                self.next();
                Ok(s)
            }
            _ => self.fail("an identifier"),
        }
    }

    fn at_end(&self) -> bool {
        *self.peek() == Tok::End
    }
}

/// Expression parser. Calls to names that are not reserved functions denote
/// unknowns; `unknowns` restricts them when non-empty.
struct ExprParser<'a> {
    lx: &'a mut Lexer,
    unknowns: &'a BTreeSet<String>,
}

impl ExprParser<'_> {
    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut terms = vec![self.term()?];
        loop {
            if self.lx.eat('+') {
                terms.push(self.term()?);
            } else if self.lx.eat('-') {
                terms.push(-self.term()?);
            } else {
                break;
            }
        }
        Ok(if terms.len() == 1 { terms.pop().unwrap() } else { Expr::Add(terms) })
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut acc = self.unary()?;
        loop {
            if self.lx.eat('*') {
                acc = acc * self.unary()?;
            } else if self.lx.eat('/') {
                let pos = self.lx.pos();
                let d = self.unary()?;
                if d.is_zero() {
                    return Err(ParseError::Syntax { pos, expected: "a nonzero divisor".into() });
                }
                acc = acc / d;
            } else {
                return Ok(acc);
            }
        }
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        if self.lx.eat('-') {
            Ok(-self.unary()?)
        } else {
            self.factor()
        }
    }

    fn factor(&mut self) -> Result<Expr, ParseError> {
        let base = self.base()?;
        if self.lx.eat('^') {
            let exp = self.unary()?;
            return Ok(Expr::pow(base, exp));
        }
        Ok(base)
    }

    fn base(&mut self) -> Result<Expr, ParseError> {
        match self.lx.peek().clone() {
            Tok::Num(n) => {
                self.lx.next();
                Ok(Expr::Const(Rat::from(n)))
            }
            Tok::Punct('(') => {
                self.lx.next();
                let e = self.expr()?;
                self.lx.expect(')')?;
                Ok(e)
            }
            Tok::Ident(name) => {
                let pos = self.lx.pos();
                self.lx.next();
                if !self.lx.eat('(') {
                    return Ok(Expr::sym(&name));
                }
                let mut args = vec![self.expr()?];
                while self.lx.eat(',') {
                    args.push(self.expr()?);
                }
                self.lx.expect(')')?;
                self.call(name, args, pos)
            }
            _ => self.lx.fail("a number, identifier, call or `(`"),
        }
    }

    fn call(&self, name: String, mut args: Vec<Expr>, pos: usize) -> Result<Expr, ParseError> {
        if let Some(f) = Func::from_name(&name) {
            if args.len() != f.arity() {
                return Err(ParseError::Syntax { pos, expected: format!("{} arguments to {name}", f.arity()) });
            }
            if matches!(f, Func::Sum | Func::Prod) {
                if !matches!(args[1], Expr::Sym(_)) {
                    return Err(ParseError::Syntax { pos, expected: "a summation variable".into() });
                }
                // sum(x, k, ...) abbreviates sum(x(k), k, ...)
                if let Expr::Sym(s) = &args[0] {
                    if self.unknowns.contains(s) {
                        args[0] = Expr::unknown(s, vec![args[1].clone()]);
                    }
                }
            }
            return Ok(Expr::func(f, args));
        }
        if !self.unknowns.is_empty() && !self.unknowns.contains(&name) {
            return Err(ParseError::Invalid(format!("`{name}` is neither an unknown nor a known function")));
        }
        Ok(Expr::unknown(&name, args))
    }
}

/// Parses a standalone expression; any non-reserved call is an unknown.
pub fn parse_expr(text: &str) -> Result<Expr, ParseError> {
    let mut lx = lex(text)?;
    let none = BTreeSet::new();
    let e = ExprParser { lx: &mut lx, unknowns: &none }.expr()?;
    if !lx.at_end() {
        return lx.fail("end of input");
    }
    Ok(e)
}

fn split_top(text: &str) -> Vec<(usize, &str)> {
    let mut out = Vec::new();
    let mut start = 0;
    for (i, c) in text.char_indices() {
        if c == ';' {
            out.push((start, &text[start..i]));
            start = i + 1;
        }
    }
    out.push((start, &text[start..]));
    out.into_iter().filter(|(_, s)| !s.trim().is_empty()).collect()
}

fn shift_pos(e: ParseError, offset: usize) -> ParseError {
    match e {
        ParseError::Syntax { pos, expected } => ParseError::Syntax { pos: pos + offset, expected },
        other => other,
    }
}

fn char_offset(text: &str, byte: usize) -> usize {
    text[..byte].chars().count()
}

/// Parses one recurrence or a `;`-separated system.
pub fn parse(text: &str) -> Result<Problem, ParseError> {
    let parts = split_top(text);
    if parts.is_empty() {
        return Err(ParseError::Syntax { pos: 0, expected: "an equation".into() });
    }
    // Left-hand sides first so right-hand sides know every unknown.
    let mut heads = Vec::new();
    for (off, part) in &parts {
        let off = char_offset(text, *off);
        let mut lx = lex(part).map_err(|e| shift_pos(e, off))?;
        let (name, vars) = parse_head(&mut lx).map_err(|e| shift_pos(e, off))?;
        heads.push((name, vars, lx, off));
    }
    let unknowns: BTreeSet<String> = heads.iter().map(|h| h.0.clone()).collect();
    if unknowns.len() != heads.len() {
        return Err(ParseError::Invalid("an unknown is defined by more than one equation".into()));
    }
    let names: Vec<String> = heads.iter().map(|h| h.0.clone()).collect();
    let mut specs = Vec::new();
    for (name, vars, mut lx, off) in heads {
        let rhs = ExprParser { lx: &mut lx, unknowns: &unknowns }.expr().map_err(|e| shift_pos(e, off))?;
        if !lx.at_end() {
            return Err(shift_pos(lx.fail::<()>("end of equation").unwrap_err(), off));
        }
        check_usage(&name, vars.len(), &rhs, &names)?;
        specs.push(RecurrenceSpec::new(&name, vars, &rhs, &names));
    }
    if specs.len() == 1 {
        return Ok(Problem::Single(specs.pop().unwrap()));
    }
    let vars = &specs[0].index_vars;
    if vars.len() != 1 || specs.iter().any(|s| &s.index_vars != vars) {
        return Err(ParseError::Invalid("systems must share a single index variable".into()));
    }
    Ok(Problem::System(RecurrenceSystem { equations: specs }))
}

fn parse_head(lx: &mut Lexer) -> Result<(String, Vec<String>), ParseError> {
    let name = lx.ident()?;
    if Func::from_name(&name).is_some() {
        return lx.fail("an unknown name");
    }
    lx.expect('(')?;
    let mut vars = vec![lx.ident()?];
    while lx.eat(',') {
        let pos = lx.pos();
        let v = lx.ident()?;
        if vars.contains(&v) {
            return Err(ParseError::Syntax { pos, expected: "distinct index variables".into() });
        }
        vars.push(v);
    }
    lx.expect(')')?;
    lx.expect('=')?;
    Ok((name, vars))
}

/// Arity consistency and the shift/divisor exclusivity per unknown.
fn check_usage(own: &str, arity: usize, rhs: &Expr, names: &[String]) -> Result<(), ParseError> {
    let mut arities: BTreeMap<String, BTreeSet<usize>> = BTreeMap::new();
    arities.entry(own.to_string()).or_default().insert(arity);
    let mut divided = BTreeSet::new();
    let mut shifted = BTreeSet::new();
    rhs.visit(&mut |e| {
        if let Expr::Unknown(u, args) = e {
            arities.entry(u.clone()).or_default().insert(args.len());
            for a in args {
                if is_division(a) {
                    divided.insert(u.clone());
                } else {
                    shifted.insert(u.clone());
                }
            }
        }
    });
    for (u, set) in &arities {
        if set.len() > 1 && names.contains(u) {
            return Err(ParseError::InconsistentArity(u.clone()));
        }
    }
    if let Some(u) = divided.intersection(&shifted).next() {
        return Err(ParseError::MixedForm(u.clone()));
    }
    Ok(())
}

fn is_division(a: &Expr) -> bool {
    match a {
        Expr::Mul(fs) => fs.iter().any(|f| match f {
            Expr::Pow(_, k) => k.as_rat().is_some_and(|k| k.is_negative()),
            Expr::Const(c) => !c.is_integer(),
            _ => false,
        }),
        _ => false,
    }
}

/// Parses `x(0)=0; x(1)=1` or patterns such as `x(0, n) = 9`.
pub fn parse_initial_conditions(text: &str) -> Result<InitialConditions, ParseError> {
    let mut out: InitialConditions = BTreeMap::new();
    for (off, part) in split_top(text) {
        let off = char_offset(text, off);
        let mut lx = lex(part).map_err(|e| shift_pos(e, off))?;
        let (name, idx, value) = parse_condition(&mut lx).map_err(|e| shift_pos(e, off))?;
        let map: &mut IcMap = out.entry(name.clone()).or_default();
        if map.keys().next().is_some_and(|k| k.len() != idx.len()) {
            return Err(ParseError::InconsistentArity(name));
        }
        let label = format!(
            "{name}({})",
            idx.iter().map(|i| i.to_string()).collect::<Vec<_>>().join(", ")
        );
        if map.insert(idx, value).is_some() {
            return Err(ParseError::DuplicateCondition(label));
        }
    }
    Ok(out)
}

fn parse_condition(lx: &mut Lexer) -> Result<(String, Vec<IcIndex>, Expr), ParseError> {
    let name = lx.ident()?;
    lx.expect('(')?;
    let mut idx = vec![ic_index(lx)?];
    while lx.eat(',') {
        idx.push(ic_index(lx)?);
    }
    lx.expect(')')?;
    lx.expect('=')?;
    let none = BTreeSet::new();
    let value = ExprParser { lx, unknowns: &none }.expr()?;
    if !lx.at_end() {
        return lx.fail("end of condition");
    }
    if value.contains_unknown() {
        return Err(ParseError::Invalid("initial values may not refer to unknowns".into()));
    }
    Ok((name, idx, normalize(&value)))
}

fn ic_index(lx: &mut Lexer) -> Result<IcIndex, ParseError> {
    let neg = lx.eat('-');
    match lx.peek().clone() {
        Tok::Num(n) => {
            lx.next();
            let v = Rat::from(if neg { -n } else { n });
            match v.to_i64() {
                Some(k) => Ok(IcIndex::Int(k)),
                None => lx.fail("a machine-sized index"),
            }
        }
        Tok::Ident(s) if !neg => {
            lx.next();
            Ok(IcIndex::Var(s))
        }
        _ => lx.fail("an integer or index variable"),
    }
}
