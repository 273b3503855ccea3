//! Numeric grounding of symbolic results on concrete polynomial vector
//! fields.
//!
//! Function symbols are bound to [`ConcreteVectorField`]s, flows are
//! integrated with the classical fourth-order Runge-Kutta method, and all
//! Frechet derivatives are computed exactly (up to rounding) by propagating
//! multidual [`Jet`]s, through the polynomial or through the integrator. The
//! integrator applied to jets solves the higher-order variational equations
//! of the flow.

mod field;
mod jet;
mod poly;

use std::collections::{BTreeMap, BTreeSet, HashMap};

use num::ToPrimitive;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

pub use field::{ConcreteVectorField, FieldSpec};
pub use jet::Jet;
pub use poly::Poly;

use crate::error::{Error, Result};
use crate::expr::{Expr, ExprKind, TimeExpr};
use crate::scenarios::Relation;

/// How derivatives of flows with respect to the initial value are obtained.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FlowDerivative {
    /// Integrate jets: every order solves its variational equation.
    Variational,
    /// First order by the variational equation, higher orders by nested
    /// central differences with step `h`.
    FiniteDifference { h: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvaluationConfig {
    /// Runge-Kutta steps per unit of time.
    pub steps_per_unit: usize,
    pub flow_derivative: FlowDerivative,
    /// Zero tolerance on the max norm.
    pub tolerance: f64,
    /// Halve the step of every flow until two successive results differ
    /// by at most `flow_tolerance` relative to their size, failing after
    /// `max_halvings` refinements.
    pub check_convergence: bool,
    pub flow_tolerance: f64,
    pub max_halvings: u32,
}

impl Default for EvaluationConfig {
    fn default() -> Self {
        Self {
            steps_per_unit: 1024,
            flow_derivative: FlowDerivative::Variational,
            tolerance: 1e-6,
            check_convergence: false,
            flow_tolerance: 1e-10,
            max_halvings: 6,
        }
    }
}

impl EvaluationConfig {
    pub fn validate(&self) -> Result<()> {
        if self.steps_per_unit < 64 {
            return Err(Error::InvalidConfig("at least 64 steps per unit time".into()));
        }
        if let FlowDerivative::FiniteDifference { h } = self.flow_derivative {
            if !(1e-12..=1e-2).contains(&h) {
                return Err(Error::InvalidConfig(format!(
                    "difference step {h} outside [1e-12, 1e-2]"
                )));
            }
        }
        if self.tolerance.is_nan() || self.tolerance <= 0.0 {
            return Err(Error::InvalidConfig("tolerance must be positive".into()));
        }
        Ok(())
    }
}

/// Values for every symbol of an expression.
#[derive(Debug, Clone, Default)]
pub struct Bindings {
    /// Dimension used when no field or point is bound.
    pub dim: Option<usize>,
    pub fields: HashMap<String, ConcreteVectorField>,
    pub times: HashMap<String, f64>,
    pub points: HashMap<String, Vec<f64>>,
}

/// Evaluates `ex` to a vector in R^n.
pub fn evaluate(ex: &Expr, b: &Bindings, cfg: &EvaluationConfig) -> Result<Vec<f64>> {
    cfg.validate()?;
    let dim = b
        .fields
        .values()
        .map(|f| f.dim())
        .chain(b.points.values().map(Vec::len))
        .chain(b.dim)
        .next()
        .ok_or_else(|| Error::Unbound("no field or point fixes the dimension".into()))?;
    for f in b.fields.values() {
        check_dim(dim, f.dim())?;
    }
    for p in b.points.values() {
        check_dim(dim, p.len())?;
    }
    Evaluator {
        b,
        cfg,
        dim,
        memo: HashMap::new(),
    }
    .eval(ex)
}

fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, found })
    }
}

/// Classical RK4 for an autonomous field on plain vectors.
pub fn integrate(f: &ConcreteVectorField, y0: &[f64], tau: f64, steps: usize) -> Vec<f64> {
    let y: Vec<Jet> = y0.iter().map(|&v| Jet::constant(0, v)).collect();
    rk4(f, y, tau, steps).iter().map(Jet::value).collect()
}

fn rk4(f: &ConcreteVectorField, mut y: Vec<Jet>, tau: f64, steps: usize) -> Vec<Jet> {
    let h = tau / steps as f64;
    let shift = |y: &[Jet], k: &[Jet], a: f64| -> Vec<Jet> {
        y.iter()
            .zip(k)
            .map(|(y, k)| {
                let mut r = y.clone();
                r.axpy(a, k);
                r
            })
            .collect()
    };
    for _ in 0..steps {
        let k1 = f.eval_jet(&y);
        let k2 = f.eval_jet(&shift(&y, &k1, h / 2.0));
        let k3 = f.eval_jet(&shift(&y, &k2, h / 2.0));
        let k4 = f.eval_jet(&shift(&y, &k3, h));
        for i in 0..y.len() {
            y[i].axpy(h / 6.0, &k1[i]);
            y[i].axpy(h / 3.0, &k2[i]);
            y[i].axpy(h / 3.0, &k3[i]);
            y[i].axpy(h / 6.0, &k4[i]);
        }
    }
    y
}

struct Evaluator<'a> {
    b: &'a Bindings,
    cfg: &'a EvaluationConfig,
    dim: usize,
    memo: HashMap<Expr, Vec<f64>>,
}

impl<'a> Evaluator<'a> {
    fn eval(&mut self, ex: &Expr) -> Result<Vec<f64>> {
        if let Some(v) = self.memo.get(ex) {
            return Ok(v.clone());
        }
        let v = match ex.kind() {
            ExprKind::Variable(n) => self
                .b
                .points
                .get(&**n)
                .cloned()
                .ok_or_else(|| Error::Unbound(n.to_string()))?,
            ExprKind::Combination(terms) => {
                let mut acc = vec![0.0; self.dim];
                for (e, c) in terms {
                    let c = c.to_f64().unwrap_or(f64::NAN);
                    for (a, x) in acc.iter_mut().zip(self.eval(e)?) {
                        *a += c * x;
                    }
                }
                acc
            }
            ExprKind::Function { fun, base, slots } => {
                let f = self.field(fun.name(), false)?;
                let x = self.eval(base)?;
                let dirs = self.eval_all(slots)?;
                derivative(f, &x, None, &dirs)
            }
            ExprKind::Flow {
                fun,
                time,
                base,
                slots,
            } => {
                let f = self.field(fun.name(), false)?;
                let tau = self.time(time)?;
                let x = self.eval(base)?;
                let dirs = self.eval_all(slots)?;
                self.flow(f, tau, &x, &dirs)?
            }
            ExprKind::NonAutonomous {
                fun,
                t_order,
                time,
                base,
                slots,
            } => {
                let f = self.field(fun.name(), true)?;
                let t = self.time(time)?;
                let x = self.eval(base)?;
                let dirs = self.eval_all(slots)?;
                derivative(f, &x, Some((t, *t_order as usize)), &dirs)
            }
        };
        self.memo.insert(ex.clone(), v.clone());
        Ok(v)
    }

    fn eval_all(&mut self, xs: &[Expr]) -> Result<Vec<Vec<f64>>> {
        xs.iter().map(|x| self.eval(x)).collect()
    }

    fn field(&self, name: &str, nonautonomous: bool) -> Result<&'a ConcreteVectorField> {
        let b: &'a Bindings = self.b;
        let f = b
            .fields
            .get(name)
            .ok_or_else(|| Error::Unbound(name.to_string()))?;
        if f.is_nonautonomous() != nonautonomous {
            return Err(Error::InvalidContext(format!(
                "field bound to `{name}` has the wrong autonomy"
            )));
        }
        Ok(f)
    }

    fn time(&self, t: &TimeExpr) -> Result<f64> {
        t.terms().iter().try_fold(0.0, |acc, (v, c)| {
            let x = self
                .b
                .times
                .get(&**v)
                .ok_or_else(|| Error::Unbound(v.to_string()))?;
            Ok(acc + c.to_f64().unwrap_or(f64::NAN) * x)
        })
    }

    fn flow(&self, f: &ConcreteVectorField, tau: f64, x: &[f64], dirs: &[Vec<f64>]) -> Result<Vec<f64>> {
        let mut steps = ((tau.abs() * self.cfg.steps_per_unit as f64).ceil() as usize).max(1);
        let mut v = self.flow_steps(f, tau, x, dirs, steps);
        if self.cfg.check_convergence {
            let mut diff = f64::INFINITY;
            for _ in 0..=self.cfg.max_halvings {
                steps *= 2;
                let fine = self.flow_steps(f, tau, x, dirs, steps);
                diff = max_norm(&v.iter().zip(&fine).map(|(a, b)| a - b).collect::<Vec<_>>());
                v = fine;
                if diff <= self.cfg.flow_tolerance * (1.0 + max_norm(&v)) {
                    return Ok(v);
                }
            }
            return Err(Error::Nonconvergence(format!(
                "step halving still changes a flow value by {diff:e} at {steps} steps"
            )));
        }
        if v.iter().any(|x| !x.is_finite()) {
            return Err(Error::Nonconvergence("non-finite flow value".into()));
        }
        Ok(v)
    }

    fn flow_steps(
        &self,
        f: &ConcreteVectorField,
        tau: f64,
        x: &[f64],
        dirs: &[Vec<f64>],
        steps: usize,
    ) -> Vec<f64> {
        match self.cfg.flow_derivative {
            FlowDerivative::FiniteDifference { h } if dirs.len() >= 2 => {
                let (last, rest) = dirs.split_last().expect("non-empty");
                let at = |s: f64| -> Vec<f64> {
                    let xs: Vec<f64> = x.iter().zip(last).map(|(a, d)| a + s * d).collect();
                    self.flow_steps(f, tau, &xs, rest, steps)
                };
                let (p, m) = (at(h), at(-h));
                p.iter().zip(&m).map(|(p, m)| (p - m) / (2.0 * h)).collect()
            }
            _ => {
                let y0 = seed_jets(x, dirs, 0);
                rk4(f, y0, tau, steps).iter().map(Jet::top).collect()
            }
        }
    }
}

/// Jets `x + sum_l e_(offset+l) dirs[l]` with `offset + dirs.len()` generators.
fn seed_jets(x: &[f64], dirs: &[Vec<f64>], offset: usize) -> Vec<Jet> {
    let gens = offset + dirs.len();
    (0..x.len())
        .map(|i| {
            let mut c = vec![0.0; 1 << gens];
            c[0] = x[i];
            for (l, d) in dirs.iter().enumerate() {
                c[1 << (offset + l)] = d[i];
            }
            Jet::from_coefficients(c)
        })
        .collect()
}

/// `d1^m d2^k F(t, x)(dirs)` for nonautonomous fields (`time = Some((t, m))`)
/// or `F^(k)(x)(dirs)`.
fn derivative(f: &ConcreteVectorField, x: &[f64], time: Option<(f64, usize)>, dirs: &[Vec<f64>]) -> Vec<f64> {
    let m = time.map_or(0, |(_, m)| m);
    let mut jets = seed_jets(x, dirs, m);
    if let Some((t, m)) = time {
        let mut c = vec![0.0; 1 << (m + dirs.len())];
        c[0] = t;
        for j in 0..m {
            c[1 << j] = 1.0;
        }
        jets.push(Jet::from_coefficients(c));
    }
    f.eval_jet(&jets).iter().map(Jet::top).collect()
}

pub fn max_norm(v: &[f64]) -> f64 {
    v.iter()
        .fold(0.0, |m, x| if x.abs() > m || x.is_nan() { x.abs() } else { m })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ZeroReport {
    pub max_norm: f64,
    pub passed: bool,
    pub seed: u64,
    pub trials: usize,
    /// Samples discarded because a flow failed to converge.
    pub redrawn: usize,
}

const MAX_REDRAWS: usize = 32;

/// Random sampling of fields, points and times for [`Oracle::assert_zero`].
#[derive(Debug, Clone)]
pub struct Oracle {
    pub cfg: EvaluationConfig,
    pub dim: usize,
    pub degree: u32,
    /// Times are drawn uniformly from `[-time_bound, time_bound]`.
    pub time_bound: f64,
    pub seed: u64,
    /// Fields used as given instead of sampled.
    pub fixed: BTreeMap<String, ConcreteVectorField>,
    /// `(H, [A, B])` binds `H` to the sum of the fields of `A` and `B`.
    pub relations: Vec<(String, Vec<String>)>,
}

impl Default for Oracle {
    fn default() -> Self {
        Self {
            cfg: EvaluationConfig {
                check_convergence: true,
                ..Default::default()
            },
            dim: 3,
            degree: 3,
            time_bound: 0.2,
            seed: 0,
            fixed: BTreeMap::new(),
            relations: Vec::new(),
        }
    }
}

#[derive(Default)]
struct Symbols {
    spaces: BTreeSet<String>,
    times: BTreeSet<String>,
    funs: BTreeMap<String, bool>,
}

fn symbols(ex: &Expr) -> Symbols {
    let mut s = Symbols::default();
    ex.walk(&mut |e| match e.kind() {
        ExprKind::Variable(n) => {
            s.spaces.insert(n.to_string());
        }
        ExprKind::Combination(_) => {}
        ExprKind::Function { fun, .. } => {
            s.funs.insert(fun.name().to_string(), false);
        }
        ExprKind::Flow { fun, time, .. } | ExprKind::NonAutonomous { fun, time, .. } => {
            s.funs.insert(fun.name().to_string(), !fun.is_autonomous());
            s.times.extend(time.variables().map(str::to_string));
        }
    });
    s
}

impl Oracle {
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_relations(mut self, rels: &[Relation]) -> Self {
        self.relations.extend(rels.iter().map(|r| {
            (
                r.fun.name().to_string(),
                r.sum_of.iter().map(|f| f.name().to_string()).collect(),
            )
        }));
        self
    }

    pub fn with_fields(mut self, spec: &FieldSpec) -> Self {
        self.dim = spec.dim;
        self.fixed.extend(spec.fields.clone());
        self.relations.extend(spec.relations.clone());
        self
    }

    /// Draws one set of bindings for the symbols of `ex`.
    pub fn sample<R: Rng>(&self, ex: &Expr, rng: &mut R) -> Result<Bindings> {
        let syms = symbols(ex);
        let mut b = Bindings {
            dim: Some(self.dim),
            ..Default::default()
        };
        let derived: BTreeSet<&str> = self.relations.iter().map(|(h, _)| h.as_str()).collect();
        let mut needed = syms.funs.clone();
        for (_, parts) in &self.relations {
            for p in parts {
                needed.entry(p.clone()).or_insert(false);
            }
        }
        for (name, nonaut) in &needed {
            if derived.contains(name.as_str()) {
                continue;
            }
            let f = match self.fixed.get(name) {
                Some(f) => f.clone(),
                None => ConcreteVectorField::random(rng, self.dim, self.degree, *nonaut),
            };
            b.fields.insert(name.clone(), f);
        }
        for (h, parts) in &self.relations {
            let mut acc: Option<ConcreteVectorField> = None;
            for p in parts {
                let f = b.fields.get(p).ok_or_else(|| Error::Unbound(p.clone()))?;
                acc = Some(match acc {
                    None => f.clone(),
                    Some(a) => a.sum(f)?,
                });
            }
            if let Some(f) = acc {
                b.fields.insert(h.clone(), f);
            }
        }
        for v in &syms.spaces {
            b.points.insert(v.clone(), unit_ball_point(rng, self.dim));
        }
        for t in &syms.times {
            b.times
                .insert(t.clone(), rng.gen_range(-self.time_bound..=self.time_bound));
        }
        Ok(b)
    }

    /// Evaluates `ex` on `trials` independent samples and reports the
    /// largest max norm. A sample on which some flow fails to converge is
    /// redrawn (at most 32 times per trial) and counted in the report.
    pub fn assert_zero(&self, ex: &Expr, trials: usize) -> Result<ZeroReport> {
        if trials == 0 {
            return Err(Error::InvalidConfig("at least one trial".into()));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let mut worst = 0.0f64;
        let mut redrawn = 0;
        for trial in 0..trials {
            let wrap = |e: Error| Error::Trial {
                trial,
                source: Box::new(e),
            };
            let mut attempts = 0;
            let v = loop {
                let b = self.sample(ex, &mut rng).map_err(wrap)?;
                match evaluate(ex, &b, &self.cfg) {
                    Err(Error::Nonconvergence(_)) if attempts < MAX_REDRAWS => {
                        attempts += 1;
                        redrawn += 1;
                    }
                    r => break r.map_err(wrap)?,
                }
            };
            let n = max_norm(&v);
            if n > worst || n.is_nan() {
                worst = n;
            }
        }
        Ok(ZeroReport {
            max_norm: worst,
            passed: worst < self.cfg.tolerance,
            seed: self.seed,
            trials,
            redrawn,
        })
    }
}

fn unit_ball_point<R: Rng>(rng: &mut R, dim: usize) -> Vec<f64> {
    loop {
        let p: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.0..=1.0)).collect();
        if p.iter().map(|x| x * x).sum::<f64>() <= 1.0 {
            return p;
        }
    }
}

/// [`Oracle::assert_zero`] with default sampling and the given seed.
pub fn assert_zero(ex: &Expr, trials: usize, cfg: &EvaluationConfig, seed: u64) -> Result<ZeroReport> {
    Oracle {
        cfg: *cfg,
        seed,
        ..Oracle::default()
    }
    .assert_zero(ex, trials)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{apply, flow, Context};

    fn rotation() -> ConcreteVectorField {
        ConcreteVectorField::parse(&["x2", "-x1", "0"], false).unwrap()
    }

    #[test]
    fn rotation_flow_quarter_turn() {
        let mut ctx = Context::new();
        let t = ctx.time_vars(&["t"]).unwrap().remove(0);
        let u = ctx.space_vars(&["u"]).unwrap().remove(0);
        let a = ctx.functions(&["A"]).unwrap().remove(0);
        let ex = flow(&a, &t, &u, &[]).unwrap();
        let mut b = Bindings::default();
        b.fields.insert("A".into(), rotation());
        b.times.insert("t".into(), std::f64::consts::FRAC_PI_2);
        b.points.insert("u".into(), vec![1.0, 0.0, 0.0]);
        let v = evaluate(&ex, &b, &EvaluationConfig::default()).unwrap();
        assert!(max_norm(&[v[0], v[1] + 1.0, v[2]]) < 1e-6);
    }

    #[test]
    fn identity_on_points() {
        let mut ctx = Context::new();
        let u = ctx.space_vars(&["u"]).unwrap().remove(0);
        let mut b = Bindings::default();
        b.points.insert("u".into(), vec![1.0, 2.0, 3.0]);
        assert_eq!(
            evaluate(&u, &b, &EvaluationConfig::default()).unwrap(),
            vec![1.0, 2.0, 3.0]
        );
    }

    #[test]
    fn errors_are_distinct() {
        let mut ctx = Context::new();
        let u = ctx.space_vars(&["u"]).unwrap().remove(0);
        let a = ctx.functions(&["A"]).unwrap().remove(0);
        let ex = apply(&a, &u, &[]).unwrap();
        let mut b = Bindings::default();
        b.points.insert("u".into(), vec![1.0, 2.0]);
        assert!(matches!(
            evaluate(&ex, &b, &EvaluationConfig::default()),
            Err(Error::Unbound(_))
        ));
        b.fields.insert("A".into(), rotation());
        assert!(matches!(
            evaluate(&ex, &b, &EvaluationConfig::default()),
            Err(Error::DimensionMismatch { .. })
        ));
        let cfg = EvaluationConfig {
            steps_per_unit: 10,
            ..Default::default()
        };
        assert!(matches!(evaluate(&ex, &b, &cfg), Err(Error::InvalidConfig(_))));
    }

    #[test]
    fn nonzero_witness_fails() {
        let mut ctx = Context::new();
        let u = ctx.space_vars(&["u"]).unwrap().remove(0);
        let a = ctx.functions(&["A"]).unwrap().remove(0);
        let ex = apply(&a, &u, &[]).unwrap();
        let r = assert_zero(&ex, 10, &EvaluationConfig::default(), 7).unwrap();
        assert!(!r.passed);
        assert!(r.max_norm > 1e-2);
        assert_eq!(r.seed, 7);
    }

    #[test]
    fn blow_up_reports_nonconvergence() {
        let mut ctx = Context::new();
        let t = ctx.time_vars(&["t"]).unwrap().remove(0);
        let u = ctx.space_vars(&["u"]).unwrap().remove(0);
        let a = ctx.functions(&["A"]).unwrap().remove(0);
        let ex = flow(&a, &t, &u, &[]).unwrap();
        let mut b = Bindings::default();
        b.fields.insert(
            "A".into(),
            ConcreteVectorField::parse(&["x1^3", "0", "0"], false).unwrap(),
        );
        b.times.insert("t".into(), 5.0);
        b.points.insert("u".into(), vec![10.0, 0.0, 0.0]);
        let cfg = EvaluationConfig {
            check_convergence: true,
            ..Default::default()
        };
        assert!(matches!(evaluate(&ex, &b, &cfg), Err(Error::Nonconvergence(_))));
    }
}
