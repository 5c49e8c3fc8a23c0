//! Exact arithmetic in the number field Q(√2, √3).
//!
//! The beam splitters, selector and feed-forward matrices of the protocol only
//! contain entries such as `1/√2`, `√(2/3)` and `√(1/3)`. Keeping them exact
//! lets the composite map be checked for integrality without a float
//! tolerance, and lets congruences by `(√m / d) · Z` with integer `Z` be
//! evaluated with a single rational scale factor.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::DMatrix;
use num_rational::Rational64;
use num_traits::{One, Zero};

use crate::precision::Real;

/// `c[0] + c[1]·√2 + c[2]·√3 + c[3]·√6`.
///
/// Basis index doubles as a bitmask: bit 0 carries √2, bit 1 carries √3.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct Surd([Rational64; 4]);

const BASIS_RADICAND: [i64; 4] = [1, 2, 3, 6];

impl Surd {
    pub fn zero() -> Self {
        Surd([Rational64::zero(); 4])
    }

    pub fn integer(n: i64) -> Self {
        Self::rational(n, 1)
    }

    pub fn rational(num: i64, den: i64) -> Self {
        let mut c = [Rational64::zero(); 4];
        c[0] = Rational64::new(num, den);
        Surd(c)
    }

    /// `(num/den)·√radicand` with radicand in {1, 2, 3, 6}.
    pub fn scaled_root(num: i64, den: i64, radicand: i64) -> Self {
        let idx = BASIS_RADICAND
            .iter()
            .position(|&m| m == radicand)
            .expect("radicand must be 1, 2, 3 or 6");
        let mut c = [Rational64::zero(); 4];
        c[idx] = Rational64::new(num, den);
        Surd(c)
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|c| c.is_zero())
    }

    pub fn coefficients(&self) -> [Rational64; 4] {
        self.0
    }

    /// The integer value, if this element is an integer.
    pub fn as_integer(&self) -> Option<i64> {
        if self.0[1..].iter().all(|c| c.is_zero()) && self.0[0].is_integer() {
            Some(self.0[0].to_integer())
        } else {
            None
        }
    }

    /// `Some((coefficient, radicand))` when exactly one basis term is present.
    pub fn single_term(&self) -> Option<(Rational64, i64)> {
        let mut found = None;
        for (idx, c) in self.0.iter().enumerate() {
            if !c.is_zero() {
                if found.is_some() {
                    return None;
                }
                found = Some((*c, BASIS_RADICAND[idx]));
            }
        }
        found
    }

    pub fn to_real<T: Real>(&self) -> T {
        let mut acc = T::zero();
        for (idx, c) in self.0.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let coeff = T::from_ratio(*c.numer(), *c.denom());
            acc += if idx == 0 {
                coeff
            } else {
                coeff * T::from_f64(BASIS_RADICAND[idx] as f64).sqrt()
            };
        }
        acc
    }

    pub fn to_f64(&self) -> f64 {
        self.to_real::<f64>()
    }
}

impl Add for Surd {
    type Output = Surd;
    fn add(self, rhs: Surd) -> Surd {
        let mut c = self.0;
        for (a, b) in c.iter_mut().zip(rhs.0) {
            *a += b;
        }
        Surd(c)
    }
}

impl Sub for Surd {
    type Output = Surd;
    fn sub(self, rhs: Surd) -> Surd {
        self + (-rhs)
    }
}

impl Neg for Surd {
    type Output = Surd;
    fn neg(self) -> Surd {
        Surd(self.0.map(|c| -c))
    }
}

impl Mul for Surd {
    type Output = Surd;
    fn mul(self, rhs: Surd) -> Surd {
        let mut c = [Rational64::zero(); 4];
        for (i, a) in self.0.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in rhs.0.iter().enumerate() {
                if b.is_zero() {
                    continue;
                }
                // √2 shared by both factors contributes 2, √3 contributes 3.
                let shared = i & j;
                let mut factor = 1;
                if shared & 1 != 0 {
                    factor *= 2;
                }
                if shared & 2 != 0 {
                    factor *= 3;
                }
                c[i ^ j] += *a * *b * Rational64::from_integer(factor);
            }
        }
        Surd(c)
    }
}

impl fmt::Debug for Surd {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let names = ["", "√2", "√3", "√6"];
        let mut first = true;
        for (c, name) in self.0.iter().zip(names) {
            if c.is_zero() {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            if name.is_empty() {
                write!(f, "{c}")?;
            } else if c.is_one() {
                write!(f, "{name}")?;
            } else {
                write!(f, "({c}){name}")?;
            }
        }
        Ok(())
    }
}

/// Dense row-major matrix over Q(√2, √3).
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct ExactMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Surd>,
}

/// `T = scale_sq.sqrt() · integer`, so `T σ Tᵀ = scale_sq · (Z σ Zᵀ)`.
#[derive(Clone, Debug)]
pub(crate) struct IntegerFactor {
    pub integer: DMatrix<i64>,
    pub scale_sq: Rational64,
}

impl ExactMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        ExactMatrix {
            rows,
            cols,
            data: vec![Surd::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, Surd::integer(1));
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> Surd {
        self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: Surd) {
        self.data[i * self.cols + j] = v;
    }

    pub fn entries(&self) -> impl Iterator<Item = &Surd> {
        self.data.iter()
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.set(j, i, self.get(i, j));
            }
        }
        t
    }

    pub fn mul(&self, rhs: &ExactMatrix) -> ExactMatrix {
        assert_eq!(self.cols, rhs.rows, "exact matrix product shape mismatch");
        let mut out = Self::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..rhs.cols {
                    let b = rhs.get(k, j);
                    if !b.is_zero() {
                        let cur = out.get(i, j);
                        out.set(i, j, cur + a * b);
                    }
                }
            }
        }
        out
    }

    pub fn scale(&self, s: Surd) -> ExactMatrix {
        ExactMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&v| v * s).collect(),
        }
    }

    pub fn to_real<T: Real>(&self) -> DMatrix<T> {
        DMatrix::from_fn(self.rows, self.cols, |i, j| self.get(i, j).to_real::<T>())
    }

    pub fn to_f64(&self) -> DMatrix<f64> {
        self.to_real::<f64>()
    }

    /// Writes the matrix as `(√m / d) · Z` with integer `Z`, when every
    /// nonzero entry is a rational multiple of the same `√m`.
    pub(crate) fn integer_factor(&self) -> Option<IntegerFactor> {
        let mut radicand = None;
        let mut denom_lcm = 1i64;
        for v in &self.data {
            if v.is_zero() {
                continue;
            }
            let (coeff, m) = v.single_term()?;
            match radicand {
                None => radicand = Some(m),
                Some(prev) if prev != m => return None,
                _ => {}
            }
            denom_lcm = num_integer_lcm(denom_lcm, *coeff.denom());
        }
        let m = radicand.unwrap_or(1);
        let integer = DMatrix::from_fn(self.rows, self.cols, |i, j| {
            let v = self.get(i, j);
            match v.single_term() {
                None => 0,
                Some((coeff, _)) => (coeff * Rational64::from_integer(denom_lcm)).to_integer(),
            }
        });
        Some(IntegerFactor {
            integer,
            scale_sq: Rational64::new(m, denom_lcm * denom_lcm),
        })
    }
}

fn num_integer_lcm(a: i64, b: i64) -> i64 {
    fn gcd(mut a: i64, mut b: i64) -> i64 {
        while b != 0 {
            (a, b) = (b, a % b);
        }
        a.abs()
    }
    a / gcd(a, b) * b
}
