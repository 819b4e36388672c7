use std::fmt;

use super::poly::PsiPoly;
use crate::error::{Error, Result};

/// Square matrix of polynomials in `psi`, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct PolyMatrix {
    n: usize,
    entries: Vec<PsiPoly>,
}

impl PolyMatrix {
    pub fn zero(n: usize) -> Self {
        Self {
            n,
            entries: vec![PsiPoly::zero(); n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zero(n);
        for i in 1..=n {
            m.set(i, i, PsiPoly::one());
        }
        m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Entry accessors are 1-based to match the row/column conventions used
    /// throughout the controller construction.
    pub fn get(&self, i: usize, j: usize) -> &PsiPoly {
        &self.entries[(i - 1) * self.n + (j - 1)]
    }

    pub fn set(&mut self, i: usize, j: usize, p: PsiPoly) {
        self.entries[(i - 1) * self.n + (j - 1)] = p;
    }

    pub fn mul(&self, rhs: &Self) -> Result<Self> {
        if self.n != rhs.n {
            return Err(Error::Dimension(format!(
                "matrix dimensions {} and {} differ",
                self.n, rhs.n
            )));
        }
        let mut out = Self::zero(self.n);
        for i in 1..=self.n {
            for j in 1..=self.n {
                let mut acc = PsiPoly::zero();
                for k in 1..=self.n {
                    let a = self.get(i, k);
                    let b = rhs.get(k, j);
                    if !a.is_zero() && !b.is_zero() {
                        acc = &acc + &(a * b);
                    }
                }
                out.set(i, j, acc);
            }
        }
        Ok(out)
    }

    pub fn is_unit_lower_triangular(&self) -> bool {
        for i in 1..=self.n {
            if self.get(i, i) != &PsiPoly::one() {
                return false;
            }
            for j in (i + 1)..=self.n {
                if !self.get(i, j).is_zero() {
                    return false;
                }
            }
        }
        true
    }

    /// Exact polynomial inverse of a unit lower triangular matrix by forward
    /// substitution. `A * A^{-1} = I` holds as a polynomial identity.
    pub fn inverse_unitriangular(&self) -> Result<Self> {
        if !self.is_unit_lower_triangular() {
            return Err(Error::NotUnitTriangular);
        }
        let n = self.n;
        let mut inv = Self::identity(n);
        for i in 1..=n {
            for j in 1..=i.saturating_sub(1) {
                // X(i,j) = -sum_{j <= k < i} A(i,k) X(k,j)
                let mut acc = PsiPoly::zero();
                for k in j..i {
                    let a = self.get(i, k);
                    let x = inv.get(k, j);
                    if !a.is_zero() && !x.is_zero() {
                        acc = &acc + &(a * x);
                    }
                }
                inv.set(i, j, acc.scale(-1.0));
            }
        }
        Ok(inv)
    }

    /// Largest coefficient magnitude among off-identity residual entries of
    /// `self - I`.
    pub fn max_residual_vs_identity(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 1..=self.n {
            for j in 1..=self.n {
                let expect = if i == j {
                    PsiPoly::one()
                } else {
                    PsiPoly::zero()
                };
                worst = worst.max((self.get(i, j) - &expect).max_abs_coeff());
            }
        }
        worst
    }

    /// Numeric evaluation at a gain value.
    pub fn eval(&self, psi: f64) -> DenseMatrix {
        let mut m = DenseMatrix::zero(self.n);
        for i in 1..=self.n {
            for j in 1..=self.n {
                m.set(i, j, self.get(i, j).eval(psi));
            }
        }
        m
    }
}

impl fmt::Display for PolyMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 1..=self.n {
            write!(f, "row {}: ", i)?;
            for j in 1..=self.n {
                if j > 1 {
                    write!(f, ", ")?;
                }
                write!(f, "{}", self.get(i, j))?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

/// Small dense numeric matrix, row-major, 1-based accessors.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    n: usize,
    a: Vec<f64>,
}

impl DenseMatrix {
    pub fn zero(n: usize) -> Self {
        Self {
            n,
            a: vec![0.0; n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zero(n);
        for i in 1..=n {
            m.set(i, i, 1.0);
        }
        m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.a[(i - 1) * self.n + (j - 1)]
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.a[(i - 1) * self.n + (j - 1)] = v;
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        debug_assert_eq!(x.len(), self.n);
        self.a
            .chunks_exact(self.n)
            .map(|row| row.iter().zip(x).map(|(a, b)| a * b).sum())
            .collect()
    }

    pub fn matmul(&self, rhs: &Self) -> Self {
        debug_assert_eq!(self.n, rhs.n);
        let mut out = Self::zero(self.n);
        for i in 1..=self.n {
            for j in 1..=self.n {
                let mut acc = 0.0;
                for k in 1..=self.n {
                    acc += self.get(i, k) * rhs.get(k, j);
                }
                out.set(i, j, acc);
            }
        }
        out
    }
}
