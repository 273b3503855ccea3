use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use num::{One, Zero};

use super::Rational;

/// A time argument: an exact linear combination of time variables.
///
/// Always stored in canonical form, a list of `(variable, coefficient)`
/// pairs sorted by variable name with no zero coefficients. The empty list is
/// time zero; a single pair with coefficient one is a plain time variable.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TimeExpr {
    terms: Vec<(Arc<str>, Rational)>,
}

impl TimeExpr {
    pub fn zero() -> Self {
        Self::default()
    }

    pub(crate) fn variable(name: Arc<str>) -> Self {
        Self {
            terms: vec![(name, Rational::one())],
        }
    }

    /// Canonical combination of `(time expression, coefficient)` pairs.
    pub fn combine<I>(terms: I) -> Self
    where
        I: IntoIterator<Item = (TimeExpr, Rational)>,
    {
        let mut flat: Vec<(Arc<str>, Rational)> = Vec::new();
        for (te, c) in terms {
            if c.is_zero() {
                continue;
            }
            for (name, k) in te.terms {
                flat.push((name, k * &c));
            }
        }
        Self::from_pairs(flat)
    }

    fn from_pairs(mut flat: Vec<(Arc<str>, Rational)>) -> Self {
        flat.sort_by(|a, b| a.0.cmp(&b.0));
        let mut terms: Vec<(Arc<str>, Rational)> = Vec::with_capacity(flat.len());
        for (name, c) in flat {
            match terms.last_mut() {
                Some((last, acc)) if *last == name => *acc += c,
                _ => terms.push((name, c)),
            }
        }
        terms.retain(|(_, c)| !c.is_zero());
        Self { terms }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> &[(Arc<str>, Rational)] {
        &self.terms
    }

    /// The variable name if this is a bare time variable.
    pub fn as_variable(&self) -> Option<&str> {
        match self.terms.as_slice() {
            [(name, c)] if c.is_one() => Some(name),
            _ => None,
        }
    }

    /// Coefficient of the named variable (zero if absent).
    pub fn coefficient(&self, name: &str) -> Rational {
        self.terms
            .iter()
            .find(|(n, _)| &**n == name)
            .map(|(_, c)| c.clone())
            .unwrap_or_else(Rational::zero)
    }

    pub fn variables(&self) -> impl Iterator<Item = &str> {
        self.terms.iter().map(|(n, _)| &**n)
    }

    /// Replaces the variable `name` by `repl`.
    pub fn substitute(&self, name: &str, repl: &TimeExpr) -> TimeExpr {
        let c = self.coefficient(name);
        if c.is_zero() {
            return self.clone();
        }
        let mut pairs: Vec<_> = self.terms.iter().filter(|(n, _)| &**n != name).cloned().collect();
        pairs.extend(repl.terms.iter().map(|(n, k)| (n.clone(), k * &c)));
        Self::from_pairs(pairs)
    }

    pub fn scale(&self, c: &Rational) -> TimeExpr {
        Self::combine([(self.clone(), c.clone())])
    }
}

impl Add for TimeExpr {
    type Output = TimeExpr;
    fn add(self, rhs: TimeExpr) -> TimeExpr {
        TimeExpr::combine([(self, Rational::one()), (rhs, Rational::one())])
    }
}

impl Sub for TimeExpr {
    type Output = TimeExpr;
    fn sub(self, rhs: TimeExpr) -> TimeExpr {
        TimeExpr::combine([(self, Rational::one()), (rhs, -Rational::one())])
    }
}

impl Neg for TimeExpr {
    type Output = TimeExpr;
    fn neg(self) -> TimeExpr {
        self.scale(&-Rational::one())
    }
}

impl Mul<i64> for TimeExpr {
    type Output = TimeExpr;
    fn mul(self, rhs: i64) -> TimeExpr {
        self.scale(&Rational::from_integer(rhs.into()))
    }
}

impl Mul<TimeExpr> for i64 {
    type Output = TimeExpr;
    fn mul(self, rhs: TimeExpr) -> TimeExpr {
        rhs * self
    }
}

impl Mul<Rational> for TimeExpr {
    type Output = TimeExpr;
    fn mul(self, rhs: Rational) -> TimeExpr {
        self.scale(&rhs)
    }
}

impl fmt::Display for TimeExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&crate::render::time_to_text(self))
    }
}
