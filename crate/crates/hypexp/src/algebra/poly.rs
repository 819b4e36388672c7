use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

/// Univariate polynomial in the gain symbol `psi` with real coefficients.
///
/// Coefficients are stored in ascending degree (`coeffs[k]` multiplies
/// `psi^k`). The representation is canonical: the highest-degree coefficient
/// is nonzero, and the zero polynomial is the empty list.
#[derive(Debug, Clone, PartialEq)]
pub struct PsiPoly {
    coeffs: Vec<f64>,
}

impl PsiPoly {
    /// Builds a polynomial from ascending-degree coefficients, trimming
    /// trailing zeros into canonical form.
    pub fn new(coeffs: &[f64]) -> Self {
        let mut coeffs = coeffs.to_vec();
        while coeffs.last() == Some(&0.0) {
            coeffs.pop();
        }
        Self { coeffs }
    }

    pub fn zero() -> Self {
        Self { coeffs: Vec::new() }
    }

    pub fn constant(c: f64) -> Self {
        Self::new(&[c])
    }

    pub fn one() -> Self {
        Self::constant(1.0)
    }

    /// The monomial `psi`.
    pub fn psi() -> Self {
        Self::new(&[0.0, 1.0])
    }

    /// The monomial `c * psi^k`.
    pub fn monomial(c: f64, k: usize) -> Self {
        if c == 0.0 {
            return Self::zero();
        }
        let mut coeffs = vec![0.0; k + 1];
        coeffs[k] = c;
        Self { coeffs }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree, or `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    /// Ascending-degree coefficients (canonical, possibly empty).
    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    /// Coefficient of `psi^k` (zero beyond the stored degree).
    pub fn coeff(&self, k: usize) -> f64 {
        self.coeffs.get(k).copied().unwrap_or(0.0)
    }

    /// Horner evaluation at a numeric gain value.
    pub fn eval(&self, psi: f64) -> f64 {
        let mut acc = 0.0;
        for &c in self.coeffs.iter().rev() {
            acc = acc * psi + c;
        }
        acc
    }

    /// Derivative with respect to `psi`.
    pub fn derivative(&self) -> Self {
        if self.coeffs.len() <= 1 {
            return Self::zero();
        }
        let coeffs: Vec<f64> = self
            .coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(k, &c)| c * k as f64)
            .collect();
        Self::new(&coeffs)
    }

    pub fn scale(&self, s: f64) -> Self {
        Self::new(&self.coeffs.iter().map(|&c| c * s).collect::<Vec<_>>())
    }

    /// Largest coefficient magnitude (zero for the zero polynomial).
    pub fn max_abs_coeff(&self) -> f64 {
        self.coeffs.iter().fold(0.0, |m, c| m.max(c.abs()))
    }
}

impl Add for &PsiPoly {
    type Output = PsiPoly;
    fn add(self, rhs: &PsiPoly) -> PsiPoly {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        let coeffs: Vec<f64> = (0..n).map(|k| self.coeff(k) + rhs.coeff(k)).collect();
        PsiPoly::new(&coeffs)
    }
}

impl Sub for &PsiPoly {
    type Output = PsiPoly;
    fn sub(self, rhs: &PsiPoly) -> PsiPoly {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        let coeffs: Vec<f64> = (0..n).map(|k| self.coeff(k) - rhs.coeff(k)).collect();
        PsiPoly::new(&coeffs)
    }
}

impl Mul for &PsiPoly {
    type Output = PsiPoly;
    fn mul(self, rhs: &PsiPoly) -> PsiPoly {
        if self.is_zero() || rhs.is_zero() {
            return PsiPoly::zero();
        }
        let mut coeffs = vec![0.0; self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            for (j, &b) in rhs.coeffs.iter().enumerate() {
                coeffs[i + j] += a * b;
            }
        }
        PsiPoly::new(&coeffs)
    }
}

impl Neg for &PsiPoly {
    type Output = PsiPoly;
    fn neg(self) -> PsiPoly {
        self.scale(-1.0)
    }
}

fn fmt_coeff(c: f64, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    if c == c.trunc() && c.abs() < 1e15 {
        write!(f, "{}", c as i64)
    } else {
        write!(f, "{}", c)
    }
}

/// Prints in descending powers, e.g. `psi^3 + 2*psi + 1`; used by the golden
/// text fixtures and the dump subcommands.
impl fmt::Display for PsiPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (k, &c) in self.coeffs.iter().enumerate().rev() {
            if c == 0.0 {
                continue;
            }
            if first {
                if c < 0.0 {
                    write!(f, "-")?;
                }
                first = false;
            } else if c < 0.0 {
                write!(f, " - ")?;
            } else {
                write!(f, " + ")?;
            }
            let a = c.abs();
            match k {
                0 => fmt_coeff(a, f)?,
                _ => {
                    if a != 1.0 {
                        fmt_coeff(a, f)?;
                        write!(f, "*")?;
                    }
                    if k == 1 {
                        write!(f, "psi")?;
                    } else {
                        write!(f, "psi^{}", k)?;
                    }
                }
            }
        }
        Ok(())
    }
}
