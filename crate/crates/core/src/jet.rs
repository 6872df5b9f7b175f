//! Truncated Taylor series in λ.

use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;

/// Taylor coefficients `f^{(ν)}(λ₀) / ν!` for `ν = 0..=order`.
#[derive(Debug, Clone, PartialEq)]
pub struct Jet(pub Vec<Complex64>);

impl Jet {
    pub fn zero(order: usize) -> Self {
        Jet(vec![Complex64::new(0.0, 0.0); order + 1])
    }

    pub fn constant(c: Complex64, order: usize) -> Self {
        let mut j = Self::zero(order);
        j.0[0] = c;
        j
    }

    pub fn order(&self) -> usize {
        self.0.len() - 1
    }

    pub fn value(&self) -> Complex64 {
        self.0[0]
    }

    pub fn coeff(&self, nu: usize) -> Complex64 {
        self.0[nu]
    }

    /// The raw derivative `f^{(ν)}`.
    pub fn derivative(&self, nu: usize) -> Complex64 {
        self.0[nu] * factorial(nu)
    }

    /// All raw derivatives `[f, f′, …]`.
    pub fn derivatives(&self) -> Vec<Complex64> {
        (0..self.0.len()).map(|nu| self.derivative(nu)).collect()
    }

    pub fn scale(&self, c: Complex64) -> Jet {
        Jet(self.0.iter().map(|v| v * c).collect())
    }
}

pub fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

impl Add for &Jet {
    type Output = Jet;
    fn add(self, rhs: &Jet) -> Jet {
        Jet(self.0.iter().zip(&rhs.0).map(|(a, b)| a + b).collect())
    }
}

impl Sub for &Jet {
    type Output = Jet;
    fn sub(self, rhs: &Jet) -> Jet {
        Jet(self.0.iter().zip(&rhs.0).map(|(a, b)| a - b).collect())
    }
}

impl Neg for &Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        Jet(self.0.iter().map(|a| -a).collect())
    }
}

/// Cauchy product (the Leibniz rule in Taylor form).
impl Mul for &Jet {
    type Output = Jet;
    fn mul(self, rhs: &Jet) -> Jet {
        let n = self.0.len().min(rhs.0.len());
        let mut out = vec![Complex64::new(0.0, 0.0); n];
        for (k, o) in out.iter_mut().enumerate() {
            for j in 0..=k {
                *o += self.0[j] * rhs.0[k - j];
            }
        }
        Jet(out)
    }
}
