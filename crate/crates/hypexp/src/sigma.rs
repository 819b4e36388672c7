//! Closed-loop dynamics of the auxiliary variables:
//! `d(sigma)/dt = M(t) sigma + L(t) d`.
//!
//! `M` is upper bidiagonal with diagonal `-lambda_i psi^i` (and
//! `-lambda_n psi^m` in the last row) and a constant superdiagonal of ones.
//! `L` is derived, not hard-coded: each `sigma_i` is differentiated along the
//! disturbed plant (`dx_j/dt = x_{j+1} + d_j`, `dx_n/dt = u + d_n`) and the
//! disturbance coefficients are collected.

use crate::algebra::{PolyMatrix, PsiPoly};
use crate::controller::SynthesizedController;
use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct SigmaSystem {
    pub n: usize,
    pub lambda: Vec<f64>,
    pub m: u32,
    pub schedule: crate::gain::GainSchedule,
    pub m_mat: PolyMatrix,
    pub l_mat: PolyMatrix,
}

/// Residual tolerance for the drift identity check performed at build time.
const RESIDUAL_TOL: f64 = 1e-10;

/// Builds the sigma-coordinate system from a synthesized controller.
///
/// Verifies symbolically that the drift of each `sigma_i` along the closed
/// loop reduces to `-lambda_i psi^(i) sigma_i + sigma_{i+1}` (exponent `m`
/// in the last row); a failure indicates a builder bug.
pub fn build_sigma_system(ctrl: &SynthesizedController) -> Result<SigmaSystem> {
    let n = ctrl.spec.n;
    let lambda = &ctrl.spec.lambda;
    let closure = ctrl.spec.schedule.closure();

    let mut m_mat = PolyMatrix::zero(n);
    for i in 1..=n {
        let exponent = if i == n { ctrl.spec.m as usize } else { i };
        m_mat.set(i, i, PsiPoly::monomial(-lambda[i - 1], exponent));
        if i < n {
            m_mat.set(i, i + 1, PsiPoly::one());
        }
    }

    // Disturbance matrix: d_j enters dx_j/dt additively, so the coefficient
    // of d_j in d(sigma_i)/dt is the x_j coefficient of sigma_i; the input
    // channel of sigma_n contributes d_n with the same unit coefficient as u.
    let mut l_mat = PolyMatrix::zero(n);
    for i in 1..=n {
        let sf = &ctrl.sigma_forms[i - 1];
        for j in 1..=n {
            l_mat.set(i, j, sf.term(j).clone());
        }
    }
    if !l_mat.is_unit_lower_triangular() {
        return Err(Error::SynthesisResidual(
            "disturbance matrix is not unit lower triangular".into(),
        ));
    }

    // Drift identity check. For i < n the nominal drift must equal
    // sigma_{i+1} - lambda_i psi^i sigma_i; for i = n the drift with u
    // substituted must equal -lambda_n psi^m sigma_n.
    for i in 1..n {
        let (drift, q) = ctrl.sigma_forms[i - 1].nominal_derivative(closure);
        if !q.is_zero() {
            return Err(Error::SynthesisResidual(format!(
                "sigma_{i} reaches the input channel"
            )));
        }
        let gain = PsiPoly::monomial(lambda[i - 1], i);
        let expect = ctrl.sigma_forms[i].sub(&ctrl.sigma_forms[i - 1].mul_poly(&gain))?;
        let residual = drift.sub(&expect)?.max_abs_coeff();
        if residual > RESIDUAL_TOL {
            return Err(Error::SynthesisResidual(format!(
                "sigma_{i} drift residual {residual:e}"
            )));
        }
    }
    let residual = ctrl.cancellation_residual();
    if residual > RESIDUAL_TOL {
        return Err(Error::SynthesisResidual(format!(
            "sigma_{n} cancellation residual {residual:e}"
        )));
    }

    Ok(SigmaSystem {
        n,
        lambda: lambda.clone(),
        m: ctrl.spec.m,
        schedule: ctrl.spec.schedule,
        m_mat,
        l_mat,
    })
}

impl SigmaSystem {
    /// Evaluates `M sigma + L d` at time `t` with the effective gain.
    pub fn rhs(&self, t: f64, sigma: &[f64], d: &[f64]) -> Result<Vec<f64>> {
        if sigma.len() != self.n || d.len() != self.n {
            return Err(Error::Dimension(format!(
                "expected vectors of length {}, got {} and {}",
                self.n,
                sigma.len(),
                d.len()
            )));
        }
        let psi = self.schedule.value(t);
        let m = self.m_mat.eval(psi);
        let l = self.l_mat.eval(psi);
        let mut out = m.matvec(sigma);
        let ld = l.matvec(d);
        for (o, v) in out.iter_mut().zip(ld) {
            *o += v;
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::controller::{synthesize, synthesize_with, ControllerSpec, SynthesisOptions};
    use crate::gain::GainSchedule;

    fn unit_gain(n: usize) -> SynthesizedController {
        let spec = ControllerSpec::new(n, vec![1.0; n], n as u32, GainSchedule::affine()).unwrap();
        synthesize_with(
            &spec,
            SynthesisOptions {
                allow_nonincreasing_lambda: true,
                ..Default::default()
            },
        )
        .unwrap()
    }

    #[test]
    fn second_order_disturbance_row() {
        let spec = ControllerSpec::new(2, vec![1.3, 2.9], 2, GainSchedule::affine()).unwrap();
        let sys = build_sigma_system(&synthesize(&spec).unwrap()).unwrap();
        // row 2 of L = [l1 psi, 1]
        assert_eq!(sys.l_mat.get(2, 1), &PsiPoly::monomial(1.3, 1));
        assert_eq!(sys.l_mat.get(2, 2), &PsiPoly::one());
    }

    #[test]
    fn rhs_hand_values() {
        let spec = ControllerSpec::new(2, vec![1.0, 1.0], 2, GainSchedule::affine()).unwrap();
        let ctrl = synthesize_with(
            &spec,
            SynthesisOptions {
                allow_nonincreasing_lambda: true,
                ..Default::default()
            },
        )
        .unwrap();
        let sys = build_sigma_system(&ctrl).unwrap();
        assert_eq!(
            sys.rhs(0.0, &[0.0, 0.0], &[0.0, 0.0]).unwrap(),
            vec![0.0, 0.0]
        );
        // t = 0 (psi = 1): M = [[-1, 1], [0, -1]]
        assert_eq!(
            sys.rhs(0.0, &[1.0, 1.0], &[0.0, 0.0]).unwrap(),
            vec![0.0, -1.0]
        );

        // n = 3, unit gains, t = 1 (psi = 2), sigma = e_3
        let sys3 = build_sigma_system(&unit_gain(3)).unwrap();
        assert_eq!(
            sys3.rhs(1.0, &[0.0, 0.0, 1.0], &[0.0; 3]).unwrap(),
            vec![0.0, 1.0, -8.0]
        );
    }

    #[test]
    fn bidiagonal_structure() {
        for n in [2usize, 3, 4, 5] {
            let lambda: Vec<f64> = (0..n).map(|i| 1.0 + i as f64).collect();
            let spec = ControllerSpec::new(n, lambda.clone(), n as u32 + 1, GainSchedule::affine())
                .unwrap();
            let sys = build_sigma_system(&synthesize(&spec).unwrap()).unwrap();
            for i in 1..=n {
                let exponent = if i == n { n + 1 } else { i };
                assert_eq!(
                    sys.m_mat.get(i, i),
                    &PsiPoly::monomial(-lambda[i - 1], exponent)
                );
                for j in 1..=n {
                    if j == i || j == i + 1 {
                        continue;
                    }
                    assert!(sys.m_mat.get(i, j).is_zero(), "M({i},{j}) nonzero");
                }
                if i < n {
                    assert_eq!(sys.m_mat.get(i, i + 1), &PsiPoly::one());
                }
            }
        }
    }

    #[test]
    fn degree_ladder_unit_gains() {
        // sub-diagonal degrees strictly increase down each column and the
        // (n,1) entry carries the maximum degree
        for n in [3usize, 4, 5] {
            let sys = build_sigma_system(&unit_gain(n)).unwrap();
            let deg =
                |i: usize, j: usize| sys.l_mat.get(i, j).degree().map(|d| d as i64).unwrap_or(-1);
            for j in 1..=n {
                for i in (j + 1)..n {
                    assert!(
                        deg(i + 1, j) > deg(i, j),
                        "column {j}: deg L({},{j}) = {} !> deg L({i},{j}) = {}",
                        i + 1,
                        deg(i + 1, j),
                        deg(i, j)
                    );
                }
            }
            let max_deg = (1..=n)
                .flat_map(|i| (1..=i).map(move |j| (i, j)))
                .map(|(i, j)| deg(i, j))
                .max()
                .unwrap();
            assert_eq!(deg(n, 1), max_deg);
        }
    }
}
