use std::cmp::Ordering;
use std::collections::hash_map::DefaultHasher;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use num::{One, Zero};

use super::{FunctionSymbol, Rational, TimeExpr};

/// The variants of a space expression.
///
/// Derivative slots are the arguments of a symmetric multilinear map: a
/// `Function` node with `k` slots is `F^(k)(base)(slots..)`, a `Flow` node is
/// `d2^k E_F(time, base)(slots..)` and a `NonAutonomous` node additionally
/// carries the order of the derivative in its first (time) argument.
#[derive(Debug, PartialEq, Eq)]
pub enum ExprKind {
    Variable(Arc<str>),
    Combination(Vec<(Expr, Rational)>),
    Function {
        fun: FunctionSymbol,
        base: Expr,
        slots: Vec<Expr>,
    },
    Flow {
        fun: FunctionSymbol,
        time: TimeExpr,
        base: Expr,
        slots: Vec<Expr>,
    },
    NonAutonomous {
        fun: FunctionSymbol,
        t_order: u32,
        time: TimeExpr,
        base: Expr,
        slots: Vec<Expr>,
    },
}

impl ExprKind {
    fn rank(&self) -> u8 {
        match self {
            ExprKind::Variable(_) => 0,
            ExprKind::Function { .. } => 1,
            ExprKind::Flow { .. } => 2,
            ExprKind::NonAutonomous { .. } => 3,
            ExprKind::Combination(_) => 4,
        }
    }

    /// Base and derivative slots of an application node.
    pub fn base_and_slots(&self) -> Option<(&Expr, &[Expr])> {
        match self {
            ExprKind::Function { base, slots, .. }
            | ExprKind::Flow { base, slots, .. }
            | ExprKind::NonAutonomous { base, slots, .. } => Some((base, slots)),
            _ => None,
        }
    }
}

#[derive(Debug)]
struct Node {
    kind: ExprKind,
    canonical: bool,
    hash: u64,
}

/// An immutable, cheaply clonable space expression.
#[derive(Clone)]
pub struct Expr(Arc<Node>);

impl Expr {
    fn from_kind(kind: ExprKind, canonical: bool) -> Expr {
        let mut h = DefaultHasher::new();
        h.write_u8(kind.rank());
        match &kind {
            ExprKind::Variable(name) => name.hash(&mut h),
            ExprKind::Combination(terms) => {
                for (e, c) in terms {
                    h.write_u64(e.0.hash);
                    c.hash(&mut h);
                }
            }
            ExprKind::Function { fun, base, slots } => {
                fun.hash(&mut h);
                h.write_u64(base.0.hash);
                slots.iter().for_each(|s| h.write_u64(s.0.hash));
            }
            ExprKind::Flow {
                fun,
                time,
                base,
                slots,
            } => {
                fun.hash(&mut h);
                time.hash(&mut h);
                h.write_u64(base.0.hash);
                slots.iter().for_each(|s| h.write_u64(s.0.hash));
            }
            ExprKind::NonAutonomous {
                fun,
                t_order,
                time,
                base,
                slots,
            } => {
                fun.hash(&mut h);
                h.write_u32(*t_order);
                time.hash(&mut h);
                h.write_u64(base.0.hash);
                slots.iter().for_each(|s| h.write_u64(s.0.hash));
            }
        }
        Expr(Arc::new(Node {
            kind,
            canonical,
            hash: h.finish(),
        }))
    }

    pub(crate) fn variable(name: Arc<str>) -> Expr {
        Expr::from_kind(ExprKind::Variable(name), true)
    }

    /// The empty linear combination, the unique zero.
    pub fn zero() -> Expr {
        Expr::from_kind(ExprKind::Combination(Vec::new()), true)
    }

    pub fn kind(&self) -> &ExprKind {
        &self.0.kind
    }

    pub fn is_zero(&self) -> bool {
        matches!(&self.0.kind, ExprKind::Combination(t) if t.is_empty())
    }

    /// Whether this value is known to be in canonical form.
    pub fn is_canonical(&self) -> bool {
        self.0.canonical
    }

    pub fn as_variable(&self) -> Option<&str> {
        match &self.0.kind {
            ExprKind::Variable(n) => Some(n),
            _ => None,
        }
    }

    pub(crate) fn ptr_eq(&self, other: &Expr) -> bool {
        Arc::ptr_eq(&self.0, &other.0)
    }

    /// Top-level terms: the terms of a combination, or the expression itself
    /// with coefficient one.
    pub fn terms(&self) -> Vec<(Expr, Rational)> {
        match &self.0.kind {
            ExprKind::Combination(t) => t.clone(),
            _ => vec![(self.clone(), Rational::one())],
        }
    }

    /// Number of top-level terms of the canonical form.
    pub fn term_count(&self) -> usize {
        let c = self.canonicalize();
        match c.kind() {
            ExprKind::Combination(t) => t.len(),
            _ => 1,
        }
    }

    // ---- unnormalized constructors ----

    pub(crate) fn raw_function(fun: FunctionSymbol, base: Expr, slots: Vec<Expr>) -> Expr {
        Expr::from_kind(ExprKind::Function { fun, base, slots }, false)
    }

    pub(crate) fn raw_flow(fun: FunctionSymbol, time: TimeExpr, base: Expr, slots: Vec<Expr>) -> Expr {
        Expr::from_kind(
            ExprKind::Flow {
                fun,
                time,
                base,
                slots,
            },
            false,
        )
    }

    pub(crate) fn raw_nonautonomous(
        fun: FunctionSymbol,
        t_order: u32,
        time: TimeExpr,
        base: Expr,
        slots: Vec<Expr>,
    ) -> Expr {
        Expr::from_kind(
            ExprKind::NonAutonomous {
                fun,
                t_order,
                time,
                base,
                slots,
            },
            false,
        )
    }

    // ---- normalizing constructors ----
    //
    // These produce canonical output whenever all children are canonical.

    /// Canonical linear combination.
    pub(crate) fn combination(terms: Vec<(Expr, Rational)>) -> Expr {
        let mut flat: Vec<(Expr, Rational)> = Vec::with_capacity(terms.len());
        for (e, c) in terms {
            push_flat(&mut flat, e, c);
        }
        Expr::from_flat(flat)
    }

    fn from_flat(mut flat: Vec<(Expr, Rational)>) -> Expr {
        flat.sort_unstable_by(|a, b| a.0.cmp(&b.0));
        let mut merged: Vec<(Expr, Rational)> = Vec::with_capacity(flat.len());
        for (e, c) in flat {
            match merged.last_mut() {
                Some((last, acc)) if *last == e => *acc += c,
                _ => merged.push((e, c)),
            }
        }
        merged.retain(|(_, c)| !c.is_zero());
        if merged.len() == 1 && merged[0].1.is_one() {
            return merged.pop().map(|(e, _)| e).unwrap_or_else(Expr::zero);
        }
        let canonical = merged.iter().all(|(e, _)| e.is_canonical());
        Expr::from_kind(ExprKind::Combination(merged), canonical)
    }

    /// Canonical sum of expressions with unit coefficients.
    pub(crate) fn sum(terms: Vec<Expr>) -> Expr {
        Expr::combination(terms.into_iter().map(|e| (e, Rational::one())).collect())
    }

    fn normalize_slots(slots: &mut [Expr]) -> bool {
        slots.sort_unstable();
        !slots.iter().any(Expr::is_zero)
    }

    pub(crate) fn function(fun: FunctionSymbol, base: Expr, mut slots: Vec<Expr>) -> Expr {
        if !Expr::normalize_slots(&mut slots) {
            return Expr::zero();
        }
        let canonical = base.is_canonical() && slots.iter().all(Expr::is_canonical);
        Expr::from_kind(ExprKind::Function { fun, base, slots }, canonical)
    }

    pub(crate) fn flow(fun: FunctionSymbol, time: TimeExpr, base: Expr, mut slots: Vec<Expr>) -> Expr {
        if !Expr::normalize_slots(&mut slots) {
            return Expr::zero();
        }
        let canonical = base.is_canonical() && slots.iter().all(Expr::is_canonical);
        Expr::from_kind(
            ExprKind::Flow {
                fun,
                time,
                base,
                slots,
            },
            canonical,
        )
    }

    pub(crate) fn nonautonomous(
        fun: FunctionSymbol,
        t_order: u32,
        time: TimeExpr,
        base: Expr,
        mut slots: Vec<Expr>,
    ) -> Expr {
        if !Expr::normalize_slots(&mut slots) {
            return Expr::zero();
        }
        let canonical = base.is_canonical() && slots.iter().all(Expr::is_canonical);
        Expr::from_kind(
            ExprKind::NonAutonomous {
                fun,
                t_order,
                time,
                base,
                slots,
            },
            canonical,
        )
    }

    /// Rebuilds an application node of the same variant with new children,
    /// normalizing locally.
    pub(crate) fn with_children(&self, base: Expr, slots: Vec<Expr>) -> Expr {
        match self.kind() {
            ExprKind::Function { fun, .. } => Expr::function(fun.clone(), base, slots),
            ExprKind::Flow { fun, time, .. } => Expr::flow(fun.clone(), time.clone(), base, slots),
            ExprKind::NonAutonomous {
                fun, t_order, time, ..
            } => Expr::nonautonomous(fun.clone(), *t_order, time.clone(), base, slots),
            _ => panic!("with_children called on a non-application node"),
        }
    }

    /// Returns the unique normal form.
    ///
    /// Combinations are flattened, equal terms merged, zero terms dropped and
    /// terms sorted; derivative slots are sorted. Idempotent.
    pub fn canonicalize(&self) -> Expr {
        if self.is_canonical() {
            return self.clone();
        }
        match self.kind() {
            ExprKind::Variable(_) => self.clone(),
            ExprKind::Combination(terms) => {
                Expr::combination(terms.iter().map(|(e, c)| (e.canonicalize(), c.clone())).collect())
            }
            ExprKind::Function { base, slots, .. }
            | ExprKind::Flow { base, slots, .. }
            | ExprKind::NonAutonomous { base, slots, .. } => self.with_children(
                base.canonicalize(),
                slots.iter().map(Expr::canonicalize).collect(),
            ),
        }
    }

    /// Equality of canonical forms.
    pub fn equivalent(&self, other: &Expr) -> bool {
        self.canonicalize() == other.canonicalize()
    }

    pub fn scale(&self, c: &Rational) -> Expr {
        Expr::combination(vec![(self.clone(), c.clone())])
    }

    /// Visits every node, parents before children.
    pub fn walk<F: FnMut(&Expr)>(&self, f: &mut F) {
        f(self);
        match self.kind() {
            ExprKind::Variable(_) => {}
            ExprKind::Combination(terms) => terms.iter().for_each(|(e, _)| e.walk(f)),
            ExprKind::Function { base, slots, .. }
            | ExprKind::Flow { base, slots, .. }
            | ExprKind::NonAutonomous { base, slots, .. } => {
                base.walk(f);
                slots.iter().for_each(|s| s.walk(f));
            }
        }
    }

    /// Number of nodes in the tree.
    pub fn node_count(&self) -> usize {
        let mut n = 0;
        self.walk(&mut |_| n += 1);
        n
    }
}

fn push_flat(out: &mut Vec<(Expr, Rational)>, e: Expr, c: Rational) {
    if c.is_zero() {
        return;
    }
    match e.kind() {
        ExprKind::Combination(inner) => {
            for (ie, ic) in inner {
                push_flat(out, ie.clone(), ic * &c);
            }
        }
        _ => out.push((e, c)),
    }
}

fn cmp_children(a: (&Expr, &[Expr]), b: (&Expr, &[Expr])) -> Ordering {
    a.0.cmp(b.0)
        .then_with(|| a.1.len().cmp(&b.1.len()))
        .then_with(|| a.1.cmp(b.1))
}

impl Ord for Expr {
    fn cmp(&self, other: &Self) -> Ordering {
        if self.ptr_eq(other) {
            return Ordering::Equal;
        }
        let (a, b) = (self.kind(), other.kind());
        let by_rank = a.rank().cmp(&b.rank());
        if by_rank != Ordering::Equal {
            return by_rank;
        }
        match (a, b) {
            (ExprKind::Variable(x), ExprKind::Variable(y)) => x.cmp(y),
            (ExprKind::Combination(x), ExprKind::Combination(y)) => x.cmp(y),
            (
                ExprKind::Function {
                    fun: f1,
                    base: b1,
                    slots: s1,
                },
                ExprKind::Function {
                    fun: f2,
                    base: b2,
                    slots: s2,
                },
            ) => f1.cmp(f2).then_with(|| cmp_children((b1, s1), (b2, s2))),
            (
                ExprKind::Flow {
                    fun: f1,
                    time: t1,
                    base: b1,
                    slots: s1,
                },
                ExprKind::Flow {
                    fun: f2,
                    time: t2,
                    base: b2,
                    slots: s2,
                },
            ) => f1
                .cmp(f2)
                .then_with(|| t1.cmp(t2))
                .then_with(|| cmp_children((b1, s1), (b2, s2))),
            (
                ExprKind::NonAutonomous {
                    fun: f1,
                    t_order: o1,
                    time: t1,
                    base: b1,
                    slots: s1,
                },
                ExprKind::NonAutonomous {
                    fun: f2,
                    t_order: o2,
                    time: t2,
                    base: b2,
                    slots: s2,
                },
            ) => f1
                .cmp(f2)
                .then_with(|| o1.cmp(o2))
                .then_with(|| t1.cmp(t2))
                .then_with(|| cmp_children((b1, s1), (b2, s2))),
            _ => unreachable!("ranks are equal"),
        }
    }
}

impl PartialOrd for Expr {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl PartialEq for Expr {
    fn eq(&self, other: &Self) -> bool {
        self.ptr_eq(other) || (self.0.hash == other.0.hash && self.0.kind == other.0.kind)
    }
}

impl Eq for Expr {}

impl Hash for Expr {
    fn hash<H: Hasher>(&self, state: &mut H) {
        state.write_u64(self.0.hash);
    }
}

impl fmt::Debug for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&crate::render::to_prefix(self))
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&crate::render::to_text(self))
    }
}

fn one() -> Rational {
    Rational::one()
}

impl Add for Expr {
    type Output = Expr;
    fn add(self, rhs: Expr) -> Expr {
        Expr::combination(vec![(self, one()), (rhs, one())])
    }
}

impl Add<&Expr> for &Expr {
    type Output = Expr;
    fn add(self, rhs: &Expr) -> Expr {
        self.clone() + rhs.clone()
    }
}

impl Sub for Expr {
    type Output = Expr;
    fn sub(self, rhs: Expr) -> Expr {
        Expr::combination(vec![(self, one()), (rhs, -one())])
    }
}

impl Sub<&Expr> for &Expr {
    type Output = Expr;
    fn sub(self, rhs: &Expr) -> Expr {
        self.clone() - rhs.clone()
    }
}

impl Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        self.scale(&-one())
    }
}

impl Neg for &Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        self.scale(&-one())
    }
}

impl Mul<i64> for Expr {
    type Output = Expr;
    fn mul(self, rhs: i64) -> Expr {
        self.scale(&Rational::from_integer(rhs.into()))
    }
}

impl Mul<Expr> for i64 {
    type Output = Expr;
    fn mul(self, rhs: Expr) -> Expr {
        rhs * self
    }
}

impl Mul<Rational> for Expr {
    type Output = Expr;
    fn mul(self, rhs: Rational) -> Expr {
        self.scale(&rhs)
    }
}

impl Mul<Expr> for Rational {
    type Output = Expr;
    fn mul(self, rhs: Expr) -> Expr {
        rhs.scale(&self)
    }
}

impl std::iter::Sum for Expr {
    fn sum<I: Iterator<Item = Expr>>(iter: I) -> Expr {
        Expr::sum(iter.collect())
    }
}
