//! Shared helpers for the integration suites: deterministic random numbers,
//! synthesis shortcuts, and the printed-form display builders used as
//! independent expansion routes in the fixture checks.

#![allow(dead_code)]

use hypexp::controller::{
    synthesize, synthesize_with, ControllerSpec, SynthesisOptions, SynthesizedController,
};
use hypexp::{GainSchedule, PsiPoly, StateLinearForm};

/// Small deterministic generator so frozen expectations never drift.
pub struct Lcg(u64);

impl Lcg {
    pub fn new(seed: u64) -> Self {
        Lcg(seed)
    }

    pub fn next_f64(&mut self) -> f64 {
        self.0 = self
            .0
            .wrapping_mul(6364136223846793005)
            .wrapping_add(1442695040888963407);
        (self.0 >> 11) as f64 / (1u64 << 53) as f64
    }

    pub fn range(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.next_f64()
    }
}

pub fn unit_gain(n: usize) -> SynthesizedController {
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

pub fn generic(n: usize, lambda: &[f64], m: u32) -> SynthesizedController {
    let spec = ControllerSpec::new(n, lambda.to_vec(), m, GainSchedule::affine()).unwrap();
    synthesize(&spec).unwrap()
}

pub fn poly(c: &[f64]) -> PsiPoly {
    PsiPoly::new(c)
}

pub fn x(n: usize, j: usize) -> StateLinearForm {
    StateLinearForm::state(n, j)
}

fn psi_pow(k: usize) -> PsiPoly {
    PsiPoly::monomial(1.0, k)
}

/// `sigma_2 = x_2 + l1 psi x_1` as printed.
pub fn sigma2_display(n: usize, l1: f64) -> StateLinearForm {
    x(n, 2)
        .add(&x(n, 1).mul_poly(&PsiPoly::monomial(l1, 1)))
        .unwrap()
}

/// Second-order control law as printed:
/// `u = -l1 (psi x_2 + x_1) - l2 psi^2 sigma_2`.
pub fn u_sos_display(l1: f64, l2: f64) -> StateLinearForm {
    let s2 = sigma2_display(2, l1);
    let inner = x(2, 2)
        .mul_poly(&psi_pow(1))
        .add(&x(2, 1))
        .unwrap()
        .scale(l1);
    inner
        .scale(-1.0)
        .sub(&s2.mul_poly(&PsiPoly::monomial(l2, 2)))
        .unwrap()
}

/// Third-order auxiliary variable as printed:
/// `sigma_3 = x_3 + l1 (psi x_2 + x_1) + l2 psi^2 sigma_2`.
pub fn sigma3_display(n: usize, l1: f64, l2: f64) -> StateLinearForm {
    let s2 = sigma2_display(n, l1);
    x(n, 3)
        .add(
            &x(n, 2)
                .mul_poly(&psi_pow(1))
                .add(&x(n, 1))
                .unwrap()
                .scale(l1),
        )
        .unwrap()
        .add(&s2.mul_poly(&PsiPoly::monomial(l2, 2)))
        .unwrap()
}

/// Third-order control law as printed (order-4 feedback exponent):
/// `u = -l3 psi^4 sigma_3 - [2 l1 + (2 + l1 psi^2) l2 psi] x_2
///      - 3 l2 l1 psi^2 x_1 - psi (l1 + l2 psi) x_3`.
pub fn u_thirtly_display(l1: f64, l2: f64, l3: f64) -> StateLinearForm {
    let s3 = sigma3_display(3, l1, l2);
    let x2_coeff =
        &PsiPoly::constant(2.0 * l1) + &(&poly(&[2.0, 0.0, l1]) * &PsiPoly::monomial(l2, 1));
    let x1_coeff = PsiPoly::monomial(3.0 * l2 * l1, 2);
    let x3_coeff = &psi_pow(1) * &poly(&[l1, l2]);
    s3.mul_poly(&PsiPoly::monomial(l3, 4))
        .add(&x(3, 2).mul_poly(&x2_coeff))
        .unwrap()
        .add(&x(3, 1).mul_poly(&x1_coeff))
        .unwrap()
        .add(&x(3, 3).mul_poly(&x3_coeff))
        .unwrap()
        .scale(-1.0)
}

/// Unit-gain third-order law as printed (order-3 feedback exponent):
/// `u = -psi^3 sigma_3 - psi (x_3 + 2 sigma_2) - 2 x_2
///      + psi^2 (psi^2 sigma_2 - sigma_3)`.
pub fn u3_dis_display() -> StateLinearForm {
    let s2 = sigma2_display(3, 1.0);
    let s3 = sigma3_display(3, 1.0, 1.0);
    let term1 = s3.mul_poly(&psi_pow(3)).scale(-1.0);
    let term2 = x(3, 3)
        .add(&s2.scale(2.0))
        .unwrap()
        .mul_poly(&psi_pow(1))
        .scale(-1.0);
    let term3 = x(3, 2).scale(-2.0);
    let term4 = s2
        .mul_poly(&psi_pow(4))
        .sub(&s3.mul_poly(&psi_pow(2)))
        .unwrap();
    term1
        .add(&term2)
        .unwrap()
        .add(&term3)
        .unwrap()
        .add(&term4)
        .unwrap()
}

/// Unit-gain fourth-order auxiliary variable as printed:
/// `sigma_4 = x_4 + x_3 (1 + psi) psi + x_2 (2 + psi^3) + psi^2 x_1
///           + 2 psi sigma_2 + psi^3 sigma_3`.
pub fn sigma4_display() -> StateLinearForm {
    let s2 = sigma2_display(4, 1.0);
    let s3 = sigma3_display(4, 1.0, 1.0);
    x(4, 4)
        .add(&x(4, 3).mul_poly(&poly(&[0.0, 1.0, 1.0])))
        .unwrap()
        .add(&x(4, 2).mul_poly(&poly(&[2.0, 0.0, 0.0, 1.0])))
        .unwrap()
        .add(&x(4, 1).mul_poly(&psi_pow(2)))
        .unwrap()
        .add(&s2.mul_poly(&PsiPoly::monomial(2.0, 1)))
        .unwrap()
        .add(&s3.mul_poly(&psi_pow(3)))
        .unwrap()
}

/// Unit-gain fourth-order control law, printed grouping. The `x_2` group
/// coefficient must be `6 psi^2 + 2 psi^3 + psi^6`; any other value breaks
/// the drift cancellation of `sigma_4`.
pub fn u4_dis_display() -> StateLinearForm {
    let s2 = sigma2_display(4, 1.0);
    let s3 = sigma3_display(4, 1.0, 1.0);
    let s4 = sigma4_display();
    s4.mul_poly(&psi_pow(4))
        .add(&x(4, 4).mul_poly(&poly(&[0.0, 1.0, 1.0, 1.0])))
        .unwrap()
        .add(&x(4, 3).mul_poly(&poly(&[3.0, 4.0, 0.0, 1.0, 1.0, 1.0])))
        .unwrap()
        .add(&x(4, 2).mul_poly(&poly(&[0.0, 0.0, 6.0, 2.0, 0.0, 0.0, 1.0])))
        .unwrap()
        .add(&s3.mul_poly(&PsiPoly::monomial(3.0, 2)))
        .unwrap()
        .add(&x(4, 1).mul_poly(&poly(&[0.0, 4.0, 0.0, 0.0, 0.0, 1.0])))
        .unwrap()
        .add(&s2.mul_poly(&poly(&[2.0, 0.0, 0.0, 0.0, 2.0])))
        .unwrap()
        .scale(-1.0)
}

/// Printed unit-gain transform rows.
pub fn s_rows_n3() -> Vec<Vec<PsiPoly>> {
    vec![
        vec![PsiPoly::one(), PsiPoly::zero(), PsiPoly::zero()],
        vec![psi_pow(1), PsiPoly::one(), PsiPoly::zero()],
        vec![
            poly(&[1.0, 0.0, 0.0, 1.0]),
            poly(&[0.0, 1.0, 1.0]),
            PsiPoly::one(),
        ],
    ]
}

pub fn s_inv_rows_n3() -> Vec<Vec<PsiPoly>> {
    vec![
        vec![PsiPoly::one(), PsiPoly::zero(), PsiPoly::zero()],
        vec![poly(&[0.0, -1.0]), PsiPoly::one(), PsiPoly::zero()],
        vec![
            poly(&[-1.0, 0.0, 1.0]),
            poly(&[0.0, -1.0, -1.0]),
            PsiPoly::one(),
        ],
    ]
}

pub fn s_row4_n4() -> Vec<PsiPoly> {
    vec![
        poly(&[0.0, 0.0, 3.0, 1.0, 0.0, 0.0, 1.0]),
        poly(&[2.0, 2.0, 0.0, 1.0, 1.0, 1.0]),
        poly(&[0.0, 1.0, 1.0, 1.0]),
        PsiPoly::one(),
    ]
}

pub fn s_inv_row4_n4() -> Vec<PsiPoly> {
    vec![
        poly(&[0.0, 3.0, 0.0, -1.0]),
        poly(&[-2.0, -2.0, 1.0, 1.0, 1.0]),
        poly(&[0.0, -1.0, -1.0, -1.0]),
        PsiPoly::one(),
    ]
}

/// Gaussian elimination with partial pivoting; the dense oracle for the
/// closed-form resolvent and implicit steps.
pub fn dense_solve(a: &hypexp::algebra::DenseMatrix, b: &[f64]) -> Vec<f64> {
    let n = a.n();
    let mut m = vec![vec![0.0; n + 1]; n];
    for i in 0..n {
        for j in 0..n {
            m[i][j] = a.get(i + 1, j + 1);
        }
        m[i][n] = b[i];
    }
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&p, &q| m[p][col].abs().total_cmp(&m[q][col].abs()))
            .unwrap();
        m.swap(col, piv);
        for row in (col + 1)..n {
            let f = m[row][col] / m[col][col];
            for j in col..=n {
                m[row][j] -= f * m[col][j];
            }
        }
    }
    let mut sol = vec![0.0; n];
    for row in (0..n).rev() {
        let mut acc = m[row][n];
        for j in (row + 1)..n {
            acc -= m[row][j] * sol[j];
        }
        sol[row] = acc / m[row][row];
    }
    sol
}

/// Largest coefficient difference between two forms.
pub fn form_distance(a: &StateLinearForm, b: &StateLinearForm) -> f64 {
    a.sub(b).unwrap().max_abs_coeff()
}
