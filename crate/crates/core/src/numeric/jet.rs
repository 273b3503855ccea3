//! Multidual numbers: truncated polynomials in nilpotent generators
//! `e_1..e_k` with `e_i^2 = 0`. The coefficient of `e_1 e_2 .. e_k` of `f(x + sum e_i d_i)`
//! is the exact multilinear derivative `f^(k)(x)(d_1..d_k)`.

use std::ops::{Add, Mul, Sub};

#[derive(Debug, Clone, PartialEq)]
pub struct Jet {
    c: Vec<f64>,
}

impl Jet {
    pub fn constant(gens: usize, v: f64) -> Jet {
        let mut c = vec![0.0; 1 << gens];
        c[0] = v;
        Jet { c }
    }

    /// `v + sum_i dirs[i] e_i` with one generator per direction.
    pub fn seeded(v: f64, dirs: &[f64]) -> Jet {
        let mut j = Jet::constant(dirs.len(), v);
        for (i, d) in dirs.iter().enumerate() {
            j.c[1 << i] = *d;
        }
        j
    }

    pub fn value(&self) -> f64 {
        self.c[0]
    }

    /// Coefficient of the product of all generators.
    pub fn top(&self) -> f64 {
        self.c[self.c.len() - 1]
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.c
    }

    pub fn from_coefficients(c: Vec<f64>) -> Jet {
        debug_assert!(c.len().is_power_of_two());
        Jet { c }
    }

    pub fn scale(&self, s: f64) -> Jet {
        Jet {
            c: self.c.iter().map(|x| x * s).collect(),
        }
    }

    pub fn axpy(&mut self, a: f64, x: &Jet) {
        for (y, x) in self.c.iter_mut().zip(&x.c) {
            *y += a * x;
        }
    }

    pub fn powi(&self, n: u32) -> Jet {
        let mut r = Jet::constant(self.c.len().trailing_zeros() as usize, 1.0);
        for _ in 0..n {
            r = &r * self;
        }
        r
    }

    pub fn is_finite(&self) -> bool {
        self.c.iter().all(|x| x.is_finite())
    }
}

impl Add for &Jet {
    type Output = Jet;

    fn add(self, rhs: &Jet) -> Jet {
        Jet {
            c: self.c.iter().zip(&rhs.c).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &Jet {
    type Output = Jet;

    fn sub(self, rhs: &Jet) -> Jet {
        Jet {
            c: self.c.iter().zip(&rhs.c).map(|(a, b)| a - b).collect(),
        }
    }
}

impl Mul for &Jet {
    type Output = Jet;

    // subset convolution
    fn mul(self, rhs: &Jet) -> Jet {
        let n = self.c.len();
        let mut c = vec![0.0; n];
        for (s, out) in c.iter_mut().enumerate() {
            let mut t = s;
            loop {
                *out += self.c[t] * rhs.c[s ^ t];
                if t == 0 {
                    break;
                }
                t = (t - 1) & s;
            }
        }
        Jet { c }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn third_derivative_of_cube() {
        // (x + e1 + e2 + e3)^3 at x = 2: top coefficient is 3! = 6
        let x = Jet::seeded(2.0, &[1.0, 1.0, 1.0]);
        let y = x.powi(3);
        assert_eq!(y.value(), 8.0);
        assert_eq!(y.top(), 6.0);
        assert_eq!(y.coefficients()[1], 12.0);
    }

    #[test]
    fn mixed_partials() {
        // f(x,y) = x^2 y, d^2 f/dx dy at (1,3) in directions e1 -> x, e2 -> y
        let x = Jet::seeded(1.0, &[1.0, 0.0]);
        let y = Jet::seeded(3.0, &[0.0, 1.0]);
        let f = &x.powi(2) * &y;
        assert_eq!(f.top(), 2.0);
    }
}
