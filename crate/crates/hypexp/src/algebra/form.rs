use std::fmt;

use super::poly::PsiPoly;
use crate::error::{Error, Result};

/// Linear form over the state with polynomial coefficients:
/// `sum_j p_j(psi) * x_j + c(psi)`.
///
/// The pure-`psi` constant slot is unused by the controller pipeline but kept
/// for transient expressions.
#[derive(Debug, Clone, PartialEq)]
pub struct StateLinearForm {
    n: usize,
    terms: Vec<PsiPoly>,
    constant: PsiPoly,
}

impl StateLinearForm {
    pub fn zero(n: usize) -> Self {
        Self {
            n,
            terms: vec![PsiPoly::zero(); n],
            constant: PsiPoly::zero(),
        }
    }

    /// The form `x_j` (1-based state index).
    pub fn state(n: usize, j: usize) -> Self {
        assert!(j >= 1 && j <= n, "state index out of range");
        let mut f = Self::zero(n);
        f.terms[j - 1] = PsiPoly::one();
        f
    }

    pub fn from_terms(terms: Vec<PsiPoly>) -> Self {
        Self {
            n: terms.len(),
            terms,
            constant: PsiPoly::zero(),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Coefficient polynomial of `x_j` (1-based).
    pub fn term(&self, j: usize) -> &PsiPoly {
        &self.terms[j - 1]
    }

    pub fn set_term(&mut self, j: usize, p: PsiPoly) {
        self.terms[j - 1] = p;
    }

    pub fn constant(&self) -> &PsiPoly {
        &self.constant
    }

    pub fn set_constant(&mut self, p: PsiPoly) {
        self.constant = p;
    }

    pub fn eval(&self, psi: f64, x: &[f64]) -> f64 {
        debug_assert_eq!(x.len(), self.n);
        let mut acc = self.constant.eval(psi);
        for (p, &xi) in self.terms.iter().zip(x) {
            if !p.is_zero() {
                acc += p.eval(psi) * xi;
            }
        }
        acc
    }

    pub fn add(&self, rhs: &Self) -> Result<Self> {
        if self.n != rhs.n {
            return Err(Error::Dimension(format!(
                "form dimensions {} and {} differ",
                self.n, rhs.n
            )));
        }
        let terms = self
            .terms
            .iter()
            .zip(&rhs.terms)
            .map(|(a, b)| a + b)
            .collect();
        Ok(Self {
            n: self.n,
            terms,
            constant: &self.constant + &rhs.constant,
        })
    }

    pub fn sub(&self, rhs: &Self) -> Result<Self> {
        self.add(&rhs.scale(-1.0))
    }

    pub fn scale(&self, s: f64) -> Self {
        Self {
            n: self.n,
            terms: self.terms.iter().map(|p| p.scale(s)).collect(),
            constant: self.constant.scale(s),
        }
    }

    /// Multiplies every coefficient by a polynomial in `psi`.
    pub fn mul_poly(&self, p: &PsiPoly) -> Self {
        Self {
            n: self.n,
            terms: self.terms.iter().map(|q| q * p).collect(),
            constant: &self.constant * p,
        }
    }

    /// Time derivative along the nominal chain `dx_j/dt = x_{j+1}` (j < n)
    /// with gain closure `dpsi/dt = c0 + c1*psi`.
    ///
    /// Each term `p_j(psi) x_j` contributes `p_j'(psi)(c0 + c1 psi) x_j`
    /// plus `p_j(psi) x_{j+1}`. The multiplier that would land on `dx_n/dt`
    /// (where the input enters) is returned separately as the input-channel
    /// coefficient.
    pub fn nominal_derivative(&self, closure: (f64, f64)) -> (Self, PsiPoly) {
        let (c0, c1) = closure;
        let psi_dot = PsiPoly::new(&[c0, c1]);
        let mut out = Self::zero(self.n);
        let mut input_coeff = PsiPoly::zero();
        for j in 0..self.n {
            let p = &self.terms[j];
            if p.is_zero() {
                continue;
            }
            let chained = &p.derivative() * &psi_dot;
            out.terms[j] = &out.terms[j] + &chained;
            if j + 1 < self.n {
                out.terms[j + 1] = &out.terms[j + 1] + p;
            } else {
                input_coeff = &input_coeff + p;
            }
        }
        out.constant = &self.constant.derivative() * &psi_dot;
        (out, input_coeff)
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.terms
            .iter()
            .map(|p| p.max_abs_coeff())
            .fold(self.constant.max_abs_coeff(), f64::max)
    }
}

impl fmt::Display for StateLinearForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut wrote = false;
        for j in (0..self.n).rev() {
            let p = &self.terms[j];
            if p.is_zero() {
                continue;
            }
            if wrote {
                write!(f, " + ")?;
            }
            if p == &PsiPoly::one() {
                write!(f, "x{}", j + 1)?;
            } else if p.degree() == Some(0) || p.coeffs().iter().filter(|c| **c != 0.0).count() == 1
            {
                write!(f, "{}*x{}", p, j + 1)?;
            } else {
                write!(f, "({})*x{}", p, j + 1)?;
            }
            wrote = true;
        }
        if !self.constant.is_zero() {
            if wrote {
                write!(f, " + ")?;
            }
            write!(f, "{}", self.constant)?;
            wrote = true;
        }
        if !wrote {
            write!(f, "0")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn derivative_of_sigma2_matches_recursion_step() {
        // sigma_2 = x_2 + l1*psi*x_1 with affine gain: the drift is
        // l1*x_1 + l1*psi*x_2 and the input channel is empty for n > 2.
        let l1 = 1.0;
        let mut f = StateLinearForm::zero(3);
        f.set_term(1, PsiPoly::monomial(l1, 1));
        f.set_term(2, PsiPoly::one());
        let (drift, q) = f.nominal_derivative((1.0, 0.0));
        assert_eq!(drift.term(1), &PsiPoly::constant(l1));
        assert_eq!(drift.term(2), &PsiPoly::monomial(l1, 1));
        assert_eq!(drift.term(3), &PsiPoly::one());
        assert!(q.is_zero());
    }

    #[test]
    fn derivative_marks_input_channel_for_top_state() {
        // n = 2: the x_2 image dx_2/dt is the input slot.
        let mut f = StateLinearForm::zero(2);
        f.set_term(1, PsiPoly::monomial(1.0, 1));
        f.set_term(2, PsiPoly::one());
        let (drift, q) = f.nominal_derivative((1.0, 0.0));
        assert_eq!(q, PsiPoly::one());
        assert_eq!(drift.term(1), &PsiPoly::one());
        assert_eq!(drift.term(2), &PsiPoly::psi());
    }

    #[test]
    fn derivative_of_x1_is_x2() {
        let f = StateLinearForm::state(2, 1);
        let (drift, q) = f.nominal_derivative((1.0, 0.0));
        assert_eq!(drift.term(2), &PsiPoly::one());
        assert!(drift.term(1).is_zero());
        assert!(q.is_zero());
    }

    #[test]
    fn derivative_exponential_closure() {
        // d/dt [psi^2 x_1] with psi' = alpha*psi: 2*alpha*psi^2 x_1 + psi^2 x_2
        let alpha = 0.5;
        let mut f = StateLinearForm::zero(2);
        f.set_term(1, PsiPoly::monomial(1.0, 2));
        let (drift, q) = f.nominal_derivative((0.0, alpha));
        assert_eq!(drift.term(1), &PsiPoly::monomial(2.0 * alpha, 2));
        assert_eq!(drift.term(2), &PsiPoly::monomial(1.0, 2));
        assert!(q.is_zero());
    }

    #[test]
    fn transient_constant_slot() {
        // the pure-psi slot evaluates additively and differentiates through
        // the closure
        let mut f = StateLinearForm::zero(2);
        f.set_term(1, PsiPoly::one());
        f.set_constant(PsiPoly::new(&[0.0, 0.0, 3.0]));
        assert_eq!(f.eval(2.0, &[5.0, 0.0]), 5.0 + 12.0);
        let (drift, _) = f.nominal_derivative((1.0, 0.0));
        assert_eq!(drift.constant(), &PsiPoly::new(&[0.0, 6.0]));
    }

    #[test]
    fn derivative_is_linear_on_random_forms() {
        let mut state = 0x6b43a9b5u64;
        let mut next = move || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1);
            ((state >> 11) as f64 / (1u64 << 53) as f64) * 4.0 - 2.0
        };
        for trial in 0..20 {
            let n = 2 + trial % 4;
            let closure = if trial % 2 == 0 {
                (1.0, 0.0)
            } else {
                (0.0, 0.7)
            };
            let mut f = StateLinearForm::zero(n);
            let mut g = StateLinearForm::zero(n);
            for j in 1..=n {
                f.set_term(j, PsiPoly::new(&[next(), next(), next()]));
                g.set_term(j, PsiPoly::new(&[next(), next()]));
            }
            let (a, b) = (next(), next());
            let combo = f.scale(a).add(&g.scale(b)).unwrap();
            let (dc, qc) = combo.nominal_derivative(closure);
            let (df, qf) = f.nominal_derivative(closure);
            let (dg, qg) = g.nominal_derivative(closure);
            let expect = df.scale(a).add(&dg.scale(b)).unwrap();
            let expect_q = &qf.scale(a) + &qg.scale(b);
            assert!(dc.sub(&expect).unwrap().max_abs_coeff() < 1e-12);
            assert!((&qc - &expect_q).max_abs_coeff() < 1e-12);
        }
    }

    // Central differences along a trajectory satisfying the nominal chain:
    // x = (sin t, cos t, -sin t, -cos t) has dx_j/dt = x_{j+1} for j < 4 and
    // dx_4/dt = sin t.
    #[test]
    fn derivative_matches_finite_differences() {
        let mut f = StateLinearForm::zero(4);
        f.set_term(1, PsiPoly::new(&[1.0, 0.5, 0.25]));
        f.set_term(2, PsiPoly::new(&[0.0, -2.0]));
        f.set_term(3, PsiPoly::new(&[3.0]));
        f.set_term(4, PsiPoly::new(&[0.0, 0.0, 1.0]));
        let (drift, q) = f.nominal_derivative((1.0, 0.0));
        let x_of = |t: f64| [t.sin(), t.cos(), -t.sin(), -t.cos()];
        for &t in &[0.3, 1.1, 2.7] {
            let psi = 1.0 + t;
            let delta = 1e-5;
            let fp = f.eval(1.0 + (t + delta), &x_of(t + delta));
            let fm = f.eval(1.0 + (t - delta), &x_of(t - delta));
            let fd = (fp - fm) / (2.0 * delta);
            let analytic = drift.eval(psi, &x_of(t)) + q.eval(psi) * t.sin();
            assert!(
                (fd - analytic).abs() < 1e-6 * (1.0 + analytic.abs()),
                "t = {t}: fd = {fd}, analytic = {analytic}"
            );
        }
    }
}
