use std::collections::BTreeMap;
use std::fmt;

use num::{BigInt, One, Signed, ToPrimitive, Zero};

use super::jet::Jet;
use crate::error::{Error, Result};
use crate::expr::Rational;

/// Polynomial with rational coefficients in a fixed number of variables.
#[derive(Debug, Clone, PartialEq)]
pub struct Poly {
    nvars: usize,
    terms: Vec<(Vec<u32>, Rational)>,
    approx: Vec<f64>,
}

impl Poly {
    pub fn new(nvars: usize, terms: impl IntoIterator<Item = (Vec<u32>, Rational)>) -> Poly {
        let mut merged: BTreeMap<Vec<u32>, Rational> = BTreeMap::new();
        for (e, c) in terms {
            assert_eq!(e.len(), nvars, "exponent vector length");
            *merged.entry(e).or_insert_with(Rational::zero) += c;
        }
        let terms: Vec<_> = merged.into_iter().filter(|(_, c)| !c.is_zero()).collect();
        let approx = terms
            .iter()
            .map(|(_, c)| c.to_f64().unwrap_or(f64::NAN))
            .collect();
        Poly { nvars, terms, approx }
    }

    pub fn zero(nvars: usize) -> Poly {
        Poly::new(nvars, [])
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn terms(&self) -> &[(Vec<u32>, Rational)] {
        &self.terms
    }

    pub fn degree(&self) -> u32 {
        self.terms.iter().map(|(e, _)| e.iter().sum()).max().unwrap_or(0)
    }

    pub fn add(&self, other: &Poly) -> Poly {
        assert_eq!(self.nvars, other.nvars);
        Poly::new(self.nvars, self.terms.iter().chain(&other.terms).cloned())
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.terms
            .iter()
            .zip(&self.approx)
            .map(|((e, _), c)| c * e.iter().zip(x).map(|(&k, xi)| xi.powi(k as i32)).product::<f64>())
            .sum()
    }

    pub fn eval_jet(&self, x: &[Jet]) -> Jet {
        let gens = x[0].coefficients().len().trailing_zeros() as usize;
        let max_exp = self
            .terms
            .iter()
            .flat_map(|(e, _)| e.iter().copied())
            .max()
            .unwrap_or(0);
        // powers[i][k] = x_i^k
        let powers: Vec<Vec<Jet>> = x
            .iter()
            .map(|xi| {
                let mut p = vec![Jet::constant(gens, 1.0)];
                for k in 1..=max_exp as usize {
                    let next = &p[k - 1] * xi;
                    p.push(next);
                }
                p
            })
            .collect();
        let mut acc = Jet::constant(gens, 0.0);
        for ((e, _), c) in self.terms.iter().zip(&self.approx) {
            let mut m = Jet::constant(gens, *c);
            for (i, &k) in e.iter().enumerate() {
                if k > 0 {
                    m = &m * &powers[i][k as usize];
                }
            }
            acc = &acc + &m;
        }
        acc
    }

    /// Parses `1/2*x1^2*x2 - 0.25 x3 + 3` over the given variable names.
    pub fn parse(text: &str, vars: &[&str]) -> Result<Poly> {
        PolyParser {
            s: text.as_bytes(),
            pos: 0,
            vars,
        }
        .parse()
    }

    pub fn display_with<'a>(&'a self, vars: &'a [&'a str]) -> impl fmt::Display + 'a {
        PolyDisplay { p: self, vars }
    }
}

struct PolyDisplay<'a> {
    p: &'a Poly,
    vars: &'a [&'a str],
}

impl fmt::Display for PolyDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.p.terms.is_empty() {
            return f.write_str("0");
        }
        for (i, (e, c)) in self.p.terms.iter().enumerate() {
            match (i, c.is_negative()) {
                (0, true) => f.write_str("-")?,
                (0, false) => {}
                (_, true) => f.write_str(" - ")?,
                (_, false) => f.write_str(" + ")?,
            }
            let a = c.abs();
            let mut first = true;
            if !a.is_one() || e.iter().all(|&k| k == 0) {
                write!(f, "{a}")?;
                first = false;
            }
            for (v, &k) in self.vars.iter().zip(e) {
                if k == 0 {
                    continue;
                }
                if !first {
                    f.write_str("*")?;
                }
                first = false;
                f.write_str(v)?;
                if k > 1 {
                    write!(f, "^{k}")?;
                }
            }
        }
        Ok(())
    }
}

struct PolyParser<'a> {
    s: &'a [u8],
    pos: usize,
    vars: &'a [&'a str],
}

impl PolyParser<'_> {
    fn err(&self, msg: &str) -> Error {
        Error::Syntax {
            pos: self.pos,
            msg: msg.to_string(),
        }
    }

    fn ws(&mut self) {
        while self.pos < self.s.len() && self.s[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.ws();
        self.s.get(self.pos).copied()
    }

    fn digits(&mut self) -> &str {
        let start = self.pos;
        while self.pos < self.s.len() && self.s[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        std::str::from_utf8(&self.s[start..self.pos]).expect("ascii")
    }

    fn number(&mut self) -> Result<Option<Rational>> {
        if !matches!(self.peek(), Some(c) if c.is_ascii_digit() || c == b'.') {
            return Ok(None);
        }
        let int = self.digits().to_string();
        let mut value = Rational::from_integer(int.parse::<BigInt>().unwrap_or_default());
        if self.s.get(self.pos) == Some(&b'.') {
            self.pos += 1;
            let frac = self.digits().to_string();
            if int.is_empty() && frac.is_empty() {
                return Err(self.err("malformed number"));
            }
            if !frac.is_empty() {
                let den = BigInt::from(10).pow(frac.len() as u32);
                value += Rational::new(frac.parse::<BigInt>().expect("digits"), den);
            }
        } else if self.peek() == Some(b'/') {
            self.pos += 1;
            self.ws();
            let d = self.digits().to_string();
            let d: BigInt = d.parse().map_err(|_| self.err("expected denominator"))?;
            if d.is_zero() {
                return Err(self.err("zero denominator"));
            }
            value /= Rational::from_integer(d);
        }
        Ok(Some(value))
    }

    fn factor(&mut self, exps: &mut [u32]) -> Result<bool> {
        self.ws();
        let start = self.pos;
        while self.pos < self.s.len() && self.s[self.pos].is_ascii_alphanumeric() {
            self.pos += 1;
        }
        if start == self.pos {
            return Ok(false);
        }
        let name = std::str::from_utf8(&self.s[start..self.pos]).expect("ascii");
        let Some(i) = self.vars.iter().position(|v| *v == name) else {
            self.pos = start;
            return Err(self.err(&format!("unknown variable `{name}`")));
        };
        let mut k = 1;
        if self.peek() == Some(b'^') {
            self.pos += 1;
            self.ws();
            k = self.digits().parse().map_err(|_| self.err("expected exponent"))?;
        }
        exps[i] += k;
        Ok(true)
    }

    fn parse(mut self) -> Result<Poly> {
        let n = self.vars.len();
        let mut terms = Vec::new();
        let mut sign = Rational::one();
        match self.peek() {
            Some(b'-') => {
                sign = -sign;
                self.pos += 1;
            }
            Some(b'+') => self.pos += 1,
            _ => {}
        }
        loop {
            let mut exps = vec![0u32; n];
            let coef = self.number()?;
            let mut any = coef.is_some();
            loop {
                if any && self.peek() == Some(b'*') {
                    self.pos += 1;
                    if !self.factor(&mut exps)? {
                        return Err(self.err("expected a variable"));
                    }
                } else if !self.factor(&mut exps)? {
                    break;
                }
                any = true;
            }
            if !any {
                return Err(self.err("expected a term"));
            }
            terms.push((exps, sign.clone() * coef.unwrap_or_else(Rational::one)));
            match self.peek() {
                Some(b'+') => sign = Rational::one(),
                Some(b'-') => sign = -Rational::one(),
                None => break,
                Some(_) => return Err(self.err("unexpected character")),
            }
            self.pos += 1;
        }
        Ok(Poly::new(n, terms))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_evaluate() {
        let p = Poly::parse("1/2*x1^2*x2 - 0.25 x3 + 3", &["x1", "x2", "x3"]).unwrap();
        assert_eq!(p.eval(&[2.0, 3.0, 4.0]), 6.0 - 1.0 + 3.0);
        assert_eq!(p.degree(), 3);
        let vars = ["x1", "x2", "x3"];
        let shown = p.display_with(&vars).to_string();
        assert_eq!(Poly::parse(&shown, &vars).unwrap(), p);
        assert_eq!(Poly::parse("0", &vars).unwrap(), Poly::zero(3));
        assert!(Poly::parse("x4", &vars).is_err());
        assert!(Poly::parse("", &vars).is_err());
    }

    #[test]
    fn jet_evaluation_matches_values() {
        let p = Poly::parse("x1^3 - 2*x1*x2 + x2^2", &["x1", "x2"]).unwrap();
        let x = [Jet::seeded(1.5, &[1.0, 0.0]), Jet::seeded(-0.5, &[0.0, 1.0])];
        let y = p.eval_jet(&x);
        assert!((y.value() - p.eval(&[1.5, -0.5])).abs() < 1e-14);
        // d2 f / dx1 dx2 = -2
        assert!((y.top() + 2.0).abs() < 1e-14);
    }
}
