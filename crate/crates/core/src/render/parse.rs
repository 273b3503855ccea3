use num::{BigInt, Zero};

use crate::error::{Error, Result};
use crate::expr::{
    apply, flow, nonautonomous_apply, Context, Declared, Expr, Expression, FunctionSymbol, Rational, TimeExpr,
};

/// Parses prefix or infix text into a canonical expression. The kind is
/// decided by the leading keyword (prefix) or the first identifier (infix).
pub fn parse(text: &str, ctx: &Context) -> Result<Expression> {
    let mut p = Parser::new(text, ctx);
    if p.is_prefix() {
        p.ws();
        if p.rest().trim_start_matches('(').trim_start().starts_with("time") {
            return p.finish(|p| p.prefix_time()).map(Expression::Time);
        }
        return p.finish(|p| p.prefix_space()).map(Expression::Space);
    }
    if p.leads_with_time_variable() {
        p.finish(|p| p.time()).map(Expression::Time)
    } else {
        p.finish(|p| p.expr()).map(Expression::Space)
    }
}

pub fn parse_space(text: &str, ctx: &Context) -> Result<Expr> {
    let mut p = Parser::new(text, ctx);
    if p.is_prefix() {
        p.finish(|p| p.prefix_space())
    } else {
        p.finish(|p| p.expr())
    }
}

pub fn parse_time(text: &str, ctx: &Context) -> Result<TimeExpr> {
    let mut p = Parser::new(text, ctx);
    if p.is_prefix() {
        p.finish(|p| p.prefix_time())
    } else {
        p.finish(|p| p.time())
    }
}

const KEYWORDS: [&str; 6] = ["var", "lin", "app", "flow", "nonaut", "time"];

struct Parser<'a> {
    src: &'a str,
    pos: usize,
    ctx: &'a Context,
}

impl<'a> Parser<'a> {
    fn new(src: &'a str, ctx: &'a Context) -> Self {
        Self { src, pos: 0, ctx }
    }

    fn finish<T>(&mut self, f: impl FnOnce(&mut Self) -> Result<T>) -> Result<T> {
        let v = f(self)?;
        self.ws();
        if self.pos < self.src.len() {
            return Err(self.err("unexpected trailing input"));
        }
        Ok(v)
    }

    fn err(&self, msg: &str) -> Error {
        Error::Syntax {
            pos: self.pos,
            msg: msg.to_string(),
        }
    }

    fn rest(&self) -> &'a str {
        &self.src[self.pos..]
    }

    fn peek(&self) -> Option<u8> {
        self.src.as_bytes().get(self.pos).copied()
    }

    fn ws(&mut self) {
        while matches!(self.peek(), Some(c) if c.is_ascii_whitespace()) {
            self.pos += 1;
        }
    }

    fn eat(&mut self, c: u8) -> bool {
        self.ws();
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: u8) -> Result<()> {
        if self.eat(c) {
            Ok(())
        } else {
            Err(self.err(&format!("expected `{}`", c as char)))
        }
    }

    fn ident(&mut self) -> Option<&'a str> {
        let start = self.pos;
        if !matches!(self.peek(), Some(c) if c.is_ascii_alphabetic()) {
            return None;
        }
        while matches!(self.peek(), Some(c) if c.is_ascii_alphanumeric()) {
            self.pos += 1;
        }
        Some(&self.src[start..self.pos])
    }

    fn uint(&mut self) -> Option<BigInt> {
        let start = self.pos;
        while matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
            self.pos += 1;
        }
        if start == self.pos {
            None
        } else {
            self.src[start..self.pos].parse().ok()
        }
    }

    fn small_uint(&mut self) -> Result<usize> {
        self.uint()
            .and_then(|n| usize::try_from(n).ok())
            .ok_or_else(|| self.err("expected a small integer"))
    }

    fn coef(&mut self) -> Result<Option<Rational>> {
        self.ws();
        let Some(n) = self.uint() else {
            return Ok(None);
        };
        if self.eat(b'/') {
            self.ws();
            let d = self.uint().ok_or_else(|| self.err("expected denominator"))?;
            if d.is_zero() {
                return Err(self.err("zero denominator"));
            }
            return Ok(Some(Rational::new(n, d)));
        }
        Ok(Some(Rational::from_integer(n)))
    }

    fn is_prefix(&self) -> bool {
        let s = self.src.trim_start();
        s.strip_prefix('(').is_some_and(|r| {
            let r = r.trim_start();
            KEYWORDS.iter().any(|k| {
                r.strip_prefix(k)
                    .is_some_and(|t| t.starts_with(|c: char| c.is_whitespace() || c == ')'))
            })
        })
    }

    fn leads_with_time_variable(&self) -> bool {
        let s = self.src;
        let Some(start) = s.find(|c: char| c.is_ascii_alphabetic()) else {
            return false;
        };
        let word: String = s[start..]
            .chars()
            .take_while(|c| c.is_ascii_alphanumeric())
            .collect();
        matches!(self.ctx.lookup(&word), Some(Declared::Time(_)))
    }

    // ---- infix ----

    fn sign(&mut self) -> Option<i64> {
        if self.eat(b'-') {
            Some(-1)
        } else if self.eat(b'+') {
            Some(1)
        } else {
            None
        }
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut sign = self.sign().unwrap_or(1);
        let mut terms = Vec::new();
        loop {
            terms.push(self.term(sign)?);
            match self.sign() {
                Some(s) => sign = s,
                None => break,
            }
        }
        Ok(terms.into_iter().sum())
    }

    fn term(&mut self, sign: i64) -> Result<Expr> {
        let c = self.coef()?;
        if let Some(c) = &c {
            let star = self.eat(b'*');
            self.ws();
            let starts_factor = matches!(self.peek(), Some(b'(') | Some(b'a'..=b'z' | b'A'..=b'Z'));
            if !star && !starts_factor && c.is_zero() {
                return Ok(Expr::zero());
            }
        }
        let f = self.factor()?;
        Ok(f * (c.unwrap_or_else(|| Rational::from_integer(1.into())) * Rational::from_integer(sign.into())))
    }

    fn factor(&mut self) -> Result<Expr> {
        self.ws();
        if self.eat(b'(') {
            let e = self.expr()?;
            self.expect(b')')?;
            return Ok(e);
        }
        self.application()
    }

    fn exponent(&mut self) -> Result<usize> {
        if self.peek() == Some(b'^') {
            self.pos += 1;
            self.small_uint()
        } else {
            Ok(1)
        }
    }

    fn application(&mut self) -> Result<Expr> {
        let mut t_order = 0usize;
        let mut k: Option<usize> = None;
        loop {
            let start = self.pos;
            let Some(id) = self.ident() else {
                return Err(self.err("expected an expression"));
            };
            if self.peek() != Some(b'_') {
                if let Some(d) = self.ctx.lookup(id) {
                    return self.declared(d, t_order, k);
                }
            }
            self.pos = start;
            let rest = self.rest();
            if rest.starts_with("E_") {
                if t_order > 0 {
                    return Err(self.err("time derivative of a flow is not a primitive"));
                }
                self.pos += 2;
                let f = self.function_name()?;
                return self.flow_tail(&f, k.unwrap_or(0));
            } else if rest.starts_with("d1") && t_order == 0 && k.is_none() {
                self.pos += 2;
                t_order = self.exponent()?;
            } else if rest.starts_with("d2") && k.is_none() {
                self.pos += 2;
                k = Some(self.exponent()?);
            } else {
                return Err(Error::UndeclaredSymbol(id.to_string()));
            }
        }
    }

    fn function_name(&mut self) -> Result<FunctionSymbol> {
        let name = self.ident().ok_or_else(|| self.err("expected a function name"))?;
        match self.ctx.lookup(name) {
            Some(Declared::Function(f)) => Ok(f),
            Some(_) => Err(self.err(&format!("`{name}` is not a function"))),
            None => Err(Error::UndeclaredSymbol(name.to_string())),
        }
    }

    fn declared(&mut self, d: Declared, t_order: usize, k: Option<usize>) -> Result<Expr> {
        let prefixed = t_order > 0 || k.is_some();
        match d {
            Declared::Space(e) if !prefixed => Ok(e),
            Declared::Space(_) => Err(self.err("derivative prefix on a variable")),
            Declared::Time(_) => Err(self.err("time variable in space position")),
            Declared::Function(f) if f.is_autonomous() => {
                if prefixed {
                    return Err(self.err("autonomous derivatives are written with primes"));
                }
                let mut order = 0;
                while self.peek() == Some(b'\'') {
                    self.pos += 1;
                    order += 1;
                }
                if order == 0 && self.rest().starts_with("^(") {
                    self.pos += 2;
                    order = self.small_uint()?;
                    self.expect(b')')?;
                }
                self.expect(b'(')?;
                let base = self.expr()?;
                self.expect(b')')?;
                let slots = self.slots(order)?;
                Ok(apply(&f, &base, &slots)?.canonicalize())
            }
            Declared::Function(f) => {
                let t_order = u32::try_from(t_order).map_err(|_| self.err("order too large"))?;
                self.expect(b'(')?;
                let time = self.time()?;
                self.expect(b',')?;
                let base = self.expr()?;
                self.expect(b')')?;
                let slots = self.slots(k.unwrap_or(0))?;
                Ok(nonautonomous_apply(&f, t_order, &time, &base, &slots)?.canonicalize())
            }
        }
    }

    fn flow_tail(&mut self, f: &FunctionSymbol, k: usize) -> Result<Expr> {
        self.expect(b'(')?;
        let time = self.time()?;
        self.expect(b',')?;
        let base = self.expr()?;
        self.expect(b')')?;
        let slots = self.slots(k)?;
        Ok(flow(f, &time, &base, &slots)?.canonicalize())
    }

    fn slots(&mut self, k: usize) -> Result<Vec<Expr>> {
        match k {
            0 => Ok(Vec::new()),
            1 => {
                self.expect(b'*')?;
                Ok(vec![self.factor()?])
            }
            _ => {
                self.expect(b'(')?;
                let mut out = vec![self.expr()?];
                for _ in 1..k {
                    self.expect(b',')?;
                    out.push(self.expr()?);
                }
                self.expect(b')')?;
                Ok(out)
            }
        }
    }

    fn time(&mut self) -> Result<TimeExpr> {
        let mut sign = self.sign().unwrap_or(1);
        let mut terms = Vec::new();
        loop {
            let c = self.coef()?;
            if c.is_some() {
                self.eat(b'*');
            }
            self.ws();
            let c =
                c.unwrap_or_else(|| Rational::from_integer(1.into())) * Rational::from_integer(sign.into());
            match self.ident() {
                Some(name) => match self.ctx.lookup(name) {
                    Some(Declared::Time(t)) => terms.push((t, c)),
                    Some(_) => return Err(self.err(&format!("`{name}` is not a time variable"))),
                    None => return Err(Error::UndeclaredSymbol(name.to_string())),
                },
                None if c.is_zero() => {}
                None => return Err(self.err("expected a time variable")),
            }
            match self.sign() {
                Some(s) => sign = s,
                None => break,
            }
        }
        Ok(TimeExpr::combine(terms))
    }

    // ---- prefix ----

    fn atom(&mut self) -> Result<&'a str> {
        self.ws();
        let start = self.pos;
        while matches!(self.peek(), Some(c) if !c.is_ascii_whitespace() && c != b'(' && c != b')') {
            self.pos += 1;
        }
        if start == self.pos {
            Err(self.err("expected an atom"))
        } else {
            Ok(&self.src[start..self.pos])
        }
    }

    fn keyword(&mut self, kw: &str) -> Result<()> {
        self.expect(b'(')?;
        let at = self.pos;
        if self.atom()? == kw {
            Ok(())
        } else {
            self.pos = at;
            Err(self.err(&format!("expected `{kw}`")))
        }
    }

    fn rational_atom(&mut self) -> Result<Rational> {
        let at = self.pos;
        let a = self.atom()?;
        a.parse::<Rational>().map_err(|_| Error::Syntax {
            pos: at,
            msg: format!("`{a}` is not a rational number"),
        })
    }

    fn prefix_time(&mut self) -> Result<TimeExpr> {
        self.keyword("time")?;
        let mut terms = Vec::new();
        while !self.eat(b')') {
            self.expect(b'(')?;
            let c = self.rational_atom()?;
            let name = self.atom()?;
            match self.ctx.lookup(name) {
                Some(Declared::Time(t)) => terms.push((t, c)),
                Some(_) => return Err(self.err(&format!("`{name}` is not a time variable"))),
                None => return Err(Error::UndeclaredSymbol(name.to_string())),
            }
            self.expect(b')')?;
        }
        Ok(TimeExpr::combine(terms))
    }

    fn prefix_function(&mut self) -> Result<FunctionSymbol> {
        let name = self.atom()?;
        match self.ctx.lookup(name) {
            Some(Declared::Function(f)) => Ok(f),
            Some(_) => Err(self.err(&format!("`{name}` is not a function"))),
            None => Err(Error::UndeclaredSymbol(name.to_string())),
        }
    }

    fn prefix_rest(&mut self) -> Result<(Expr, Vec<Expr>)> {
        let base = self.prefix_space()?;
        let mut slots = Vec::new();
        while !self.eat(b')') {
            slots.push(self.prefix_space()?);
        }
        Ok((base, slots))
    }

    fn prefix_space(&mut self) -> Result<Expr> {
        self.expect(b'(')?;
        let at = self.pos;
        let e = match self.atom()? {
            "var" => {
                let name = self.atom()?;
                let e = match self.ctx.lookup(name) {
                    Some(Declared::Space(e)) => e,
                    Some(_) => return Err(self.err(&format!("`{name}` is not a space variable"))),
                    None => return Err(Error::UndeclaredSymbol(name.to_string())),
                };
                self.expect(b')')?;
                e
            }
            "lin" => {
                let mut acc = Vec::new();
                while !self.eat(b')') {
                    self.expect(b'(')?;
                    let c = self.rational_atom()?;
                    acc.push(self.prefix_space()? * c);
                    self.expect(b')')?;
                }
                acc.into_iter().sum()
            }
            "app" => {
                let f = self.prefix_function()?;
                let (base, slots) = self.prefix_rest()?;
                apply(&f, &base, &slots)?.canonicalize()
            }
            "flow" => {
                let f = self.prefix_function()?;
                let time = self.prefix_time()?;
                let (base, slots) = self.prefix_rest()?;
                flow(&f, &time, &base, &slots)?.canonicalize()
            }
            "nonaut" => {
                let f = self.prefix_function()?;
                let m = self.atom()?;
                let m: u32 = m.parse().map_err(|_| self.err("expected a derivative order"))?;
                let time = self.prefix_time()?;
                let (base, slots) = self.prefix_rest()?;
                nonautonomous_apply(&f, m, &time, &base, &slots)?.canonicalize()
            }
            _ => {
                return Err(Error::Syntax {
                    pos: at,
                    msg: "unknown keyword".into(),
                })
            }
        };
        Ok(e)
    }
}
