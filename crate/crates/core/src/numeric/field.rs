use std::collections::BTreeMap;

use num::BigInt;
use rand::Rng;

use super::jet::Jet;
use super::poly::Poly;
use crate::error::{Error, Result};
use crate::expr::Rational;

/// A polynomial vector field on R^n. Nonautonomous fields take the time as
/// an extra last variable `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConcreteVectorField {
    dim: usize,
    nonautonomous: bool,
    components: Vec<Poly>,
}

pub(crate) fn variable_names(dim: usize, nonautonomous: bool) -> Vec<String> {
    let mut v: Vec<String> = (1..=dim).map(|i| format!("x{i}")).collect();
    if nonautonomous {
        v.push("t".into());
    }
    v
}

impl ConcreteVectorField {
    pub fn new(components: Vec<Poly>, nonautonomous: bool) -> Result<Self> {
        let dim = components.len();
        let nvars = dim + usize::from(nonautonomous);
        if dim == 0 {
            return Err(Error::InvalidConfig("field of dimension 0".into()));
        }
        if let Some(p) = components.iter().find(|p| p.nvars() != nvars) {
            return Err(Error::DimensionMismatch {
                expected: nvars,
                found: p.nvars(),
            });
        }
        Ok(Self {
            dim,
            nonautonomous,
            components,
        })
    }

    /// Parses one polynomial per component over `x1..xn` (and `t`).
    pub fn parse(lines: &[&str], nonautonomous: bool) -> Result<Self> {
        let names = variable_names(lines.len(), nonautonomous);
        let names: Vec<&str> = names.iter().map(String::as_str).collect();
        let comps = lines
            .iter()
            .map(|l| Poly::parse(l, &names))
            .collect::<Result<Vec<_>>>()?;
        Self::new(comps, nonautonomous)
    }

    /// All monomials of total degree `<= degree` with coefficients drawn
    /// uniformly from `{-1000..1000}/1000`.
    pub fn random<R: Rng>(rng: &mut R, dim: usize, degree: u32, nonautonomous: bool) -> Self {
        let nvars = dim + usize::from(nonautonomous);
        let monomials = monomials(nvars, degree);
        let components = (0..dim)
            .map(|_| {
                Poly::new(
                    nvars,
                    monomials.iter().map(|e| {
                        let k: i64 = rng.gen_range(-1000..=1000);
                        (e.clone(), Rational::new(BigInt::from(k), BigInt::from(1000)))
                    }),
                )
            })
            .collect();
        Self {
            dim,
            nonautonomous,
            components,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn is_nonautonomous(&self) -> bool {
        self.nonautonomous
    }

    pub fn components(&self) -> &[Poly] {
        &self.components
    }

    pub fn sum(&self, other: &Self) -> Result<Self> {
        if self.dim != other.dim || self.nonautonomous != other.nonautonomous {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: other.dim,
            });
        }
        Ok(Self {
            dim: self.dim,
            nonautonomous: self.nonautonomous,
            components: self
                .components
                .iter()
                .zip(&other.components)
                .map(|(a, b)| a.add(b))
                .collect(),
        })
    }

    /// `x` has `dim` entries, plus the time for nonautonomous fields.
    pub fn eval(&self, x: &[f64]) -> Vec<f64> {
        self.components.iter().map(|p| p.eval(x)).collect()
    }

    pub fn eval_jet(&self, x: &[Jet]) -> Vec<Jet> {
        self.components.iter().map(|p| p.eval_jet(x)).collect()
    }

    pub fn to_text(&self) -> String {
        let names = variable_names(self.dim, self.nonautonomous);
        let names: Vec<&str> = names.iter().map(String::as_str).collect();
        self.components
            .iter()
            .map(|p| p.display_with(&names).to_string())
            .collect::<Vec<_>>()
            .join("\n")
    }
}

fn monomials(nvars: usize, degree: u32) -> Vec<Vec<u32>> {
    let mut out = Vec::new();
    let mut cur = vec![0u32; nvars];
    fn rec(i: usize, left: u32, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if i == cur.len() {
            out.push(cur.clone());
            return;
        }
        for k in 0..=left {
            cur[i] = k;
            rec(i + 1, left - k, cur, out);
        }
        cur[i] = 0;
    }
    rec(0, degree, &mut cur, &mut out);
    out
}

/// Fields and sum relations read from a field-specification file.
///
/// ```text
/// dim 3
/// field A
/// x2
/// -x1
/// 0
/// field S nonautonomous
/// t*x1
/// x2^2
/// 1/2*x3
/// relation H = A + B
/// ```
#[derive(Debug, Clone, Default, PartialEq)]
pub struct FieldSpec {
    pub dim: usize,
    pub fields: BTreeMap<String, ConcreteVectorField>,
    pub relations: Vec<(String, Vec<String>)>,
}

impl FieldSpec {
    pub fn parse(text: &str) -> Result<FieldSpec> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
            .filter(|(_, l)| !l.is_empty());
        let syntax = |line: usize, msg: String| Error::Syntax { pos: line, msg };
        let (n, first) = lines.next().ok_or_else(|| syntax(0, "empty field file".into()))?;
        let dim: usize = first
            .strip_prefix("dim")
            .and_then(|d| d.trim().parse().ok())
            .filter(|&d| d > 0)
            .ok_or_else(|| syntax(n, "expected `dim N`".into()))?;
        let mut spec = FieldSpec {
            dim,
            ..Default::default()
        };
        while let Some((n, line)) = lines.next() {
            let words: Vec<&str> = line.split_whitespace().collect();
            match words.as_slice() {
                ["field", name, rest @ ..] => {
                    let nonautonomous = match rest {
                        [] => false,
                        ["nonautonomous"] => true,
                        _ => return Err(syntax(n, format!("bad field header `{line}`"))),
                    };
                    let mut comps = Vec::with_capacity(dim);
                    for _ in 0..dim {
                        let (_, l) = lines
                            .next()
                            .ok_or_else(|| syntax(n, format!("field `{name}` needs {dim} components")))?;
                        comps.push(l);
                    }
                    let f = ConcreteVectorField::parse(&comps, nonautonomous).map_err(|e| match e {
                        Error::Syntax { msg, .. } => syntax(n, format!("field `{name}`: {msg}")),
                        e => e,
                    })?;
                    spec.fields.insert(name.to_string(), f);
                }
                ["relation", name, "=", rest @ ..] => {
                    let parts: Vec<String> = rest
                        .iter()
                        .filter(|w| **w != "+")
                        .map(|w| w.to_string())
                        .collect();
                    if parts.is_empty() || rest.len() != 2 * parts.len() - 1 {
                        return Err(syntax(n, format!("bad relation `{line}`")));
                    }
                    spec.relations.push((name.to_string(), parts));
                }
                _ => return Err(syntax(n, format!("unexpected line `{line}`"))),
            }
        }
        Ok(spec)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    #[test]
    fn random_cubic_has_twenty_monomials() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        let f = ConcreteVectorField::random(&mut rng, 3, 3, false);
        assert_eq!(monomials(3, 3).len(), 20);
        assert!(f.components().iter().all(|p| p.degree() <= 3));
        let g = ConcreteVectorField::parse(&f.to_text().lines().collect::<Vec<_>>(), false).unwrap();
        assert_eq!(f, g);
    }

    #[test]
    fn field_file() {
        let spec = FieldSpec::parse(
            "# rotation\ndim 3\nfield A\nx2\n-x1\n0\nfield S nonautonomous\nt*x1\nx2^2\n1/2*x3\nrelation H = A + B\n",
        )
        .unwrap();
        assert_eq!(spec.dim, 3);
        assert_eq!(spec.fields["A"].eval(&[1.0, 2.0, 3.0]), vec![2.0, -1.0, 0.0]);
        assert!(spec.fields["S"].is_nonautonomous());
        assert_eq!(
            spec.relations,
            vec![("H".to_string(), vec!["A".to_string(), "B".to_string()])]
        );
        assert!(FieldSpec::parse("dim 2\nfield A\nx1\n").is_err());
        assert!(FieldSpec::parse("field A\n").is_err());
    }
}
