use std::collections::BTreeMap;
use std::sync::Arc;

use super::{Autonomy, Expr, ExprKind, FunctionSymbol, TimeExpr};
use crate::error::{Error, Result};

/// What a declaration introduces.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DeclKind {
    TimeVariable,
    SpaceVariable,
    AutonomousFunction,
    NonAutonomousFunction,
}

/// An atom returned by [`Context::declare`].
#[derive(Debug, Clone, PartialEq)]
pub enum Declared {
    Time(TimeExpr),
    Space(Expr),
    Function(FunctionSymbol),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Entry {
    Time,
    Space,
    Function(Autonomy),
}

/// Registry of declared names. A name is unique across time variables,
/// space variables and function symbols.
#[derive(Debug, Clone, Default)]
pub struct Context {
    entries: BTreeMap<Arc<str>, Entry>,
}

pub(crate) fn is_identifier(name: &str) -> bool {
    let mut chars = name.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic()) && chars.all(|c| c.is_ascii_alphanumeric())
}

impl Context {
    pub fn new() -> Self {
        Self::default()
    }

    /// Registers `names` and returns the corresponding atoms in order.
    ///
    /// Nothing is registered if any name is invalid or already taken.
    pub fn declare(&mut self, kind: DeclKind, names: &[&str]) -> Result<Vec<Declared>> {
        let mut seen = std::collections::BTreeSet::new();
        for &name in names {
            if !is_identifier(name) {
                return Err(Error::InvalidIdentifier(name.to_string()));
            }
            if self.entries.contains_key(name) || !seen.insert(name) {
                return Err(Error::DeclarationConflict(name.to_string()));
            }
        }
        let entry = match kind {
            DeclKind::TimeVariable => Entry::Time,
            DeclKind::SpaceVariable => Entry::Space,
            DeclKind::AutonomousFunction => Entry::Function(Autonomy::Autonomous),
            DeclKind::NonAutonomousFunction => Entry::Function(Autonomy::NonAutonomous),
        };
        Ok(names
            .iter()
            .map(|&name| {
                let name: Arc<str> = Arc::from(name);
                self.entries.insert(name.clone(), entry);
                atom(name, entry)
            })
            .collect())
    }

    pub fn time_vars(&mut self, names: &[&str]) -> Result<Vec<TimeExpr>> {
        Ok(self
            .declare(DeclKind::TimeVariable, names)?
            .into_iter()
            .filter_map(|d| match d {
                Declared::Time(t) => Some(t),
                _ => None,
            })
            .collect())
    }

    pub fn space_vars(&mut self, names: &[&str]) -> Result<Vec<Expr>> {
        Ok(self
            .declare(DeclKind::SpaceVariable, names)?
            .into_iter()
            .filter_map(|d| match d {
                Declared::Space(e) => Some(e),
                _ => None,
            })
            .collect())
    }

    pub fn functions(&mut self, names: &[&str]) -> Result<Vec<FunctionSymbol>> {
        self.function_decl(DeclKind::AutonomousFunction, names)
    }

    pub fn nonautonomous_functions(&mut self, names: &[&str]) -> Result<Vec<FunctionSymbol>> {
        self.function_decl(DeclKind::NonAutonomousFunction, names)
    }

    fn function_decl(&mut self, kind: DeclKind, names: &[&str]) -> Result<Vec<FunctionSymbol>> {
        Ok(self
            .declare(kind, names)?
            .into_iter()
            .filter_map(|d| match d {
                Declared::Function(f) => Some(f),
                _ => None,
            })
            .collect())
    }

    pub fn lookup(&self, name: &str) -> Option<Declared> {
        self.entries.get_key_value(name).map(|(k, e)| atom(k.clone(), *e))
    }

    pub fn time_var(&self, name: &str) -> Result<TimeExpr> {
        match self.lookup(name) {
            Some(Declared::Time(t)) => Ok(t),
            _ => Err(Error::InvalidContext(format!(
                "time variable `{name}` is not declared"
            ))),
        }
    }

    pub fn space_var(&self, name: &str) -> Result<Expr> {
        match self.lookup(name) {
            Some(Declared::Space(e)) => Ok(e),
            _ => Err(Error::InvalidContext(format!(
                "space variable `{name}` is not declared"
            ))),
        }
    }

    pub fn function(&self, name: &str) -> Result<FunctionSymbol> {
        match self.lookup(name) {
            Some(Declared::Function(f)) => Ok(f),
            _ => Err(Error::InvalidContext(format!(
                "function `{name}` is not declared"
            ))),
        }
    }

    /// Checks that every symbol in `ex` is declared with a matching kind.
    pub fn check(&self, ex: &Expr) -> Result<()> {
        let mut err = None;
        let check_time = |t: &TimeExpr, err: &mut Option<Error>| {
            for v in t.variables() {
                if self.entries.get(v) != Some(&Entry::Time) {
                    err.get_or_insert(Error::UndeclaredSymbol(v.to_string()));
                }
            }
        };
        ex.walk(&mut |node| match node.kind() {
            ExprKind::Variable(n) => {
                if self.entries.get(&**n) != Some(&Entry::Space) {
                    err.get_or_insert(Error::UndeclaredSymbol(n.to_string()));
                }
            }
            ExprKind::Combination(_) => {}
            ExprKind::Function { fun, .. } => self.check_fun(fun, &mut err),
            ExprKind::Flow { fun, time, .. } | ExprKind::NonAutonomous { fun, time, .. } => {
                self.check_fun(fun, &mut err);
                check_time(time, &mut err);
            }
        });
        err.map_or(Ok(()), Err)
    }

    fn check_fun(&self, fun: &FunctionSymbol, err: &mut Option<Error>) {
        if self.entries.get(fun.name()) != Some(&Entry::Function(fun.autonomy())) {
            err.get_or_insert(Error::UndeclaredSymbol(fun.name().to_string()));
        }
    }

    pub fn is_declared(&self, name: &str) -> bool {
        self.entries.contains_key(name)
    }
}

fn atom(name: Arc<str>, entry: Entry) -> Declared {
    match entry {
        Entry::Time => Declared::Time(TimeExpr::variable(name)),
        Entry::Space => Declared::Space(Expr::variable(name)),
        Entry::Function(a) => Declared::Function(FunctionSymbol::new(name, a)),
    }
}
