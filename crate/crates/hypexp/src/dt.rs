//! Implicit-Euler discrete-time closed loop.
//!
//! The update is performed in the auxiliary coordinates, where the drift is
//! upper bidiagonal and the implicit step has the closed-form resolvent
//! `Z = (I - h M)^{-1}` with `Z_{ij} = h^{j-i} / (rho_i ... rho_j)`,
//! `rho_i = 1 + h lambda_i psi^i`, and is mapped back through the
//! time-varying change of basis:
//! `xi_{k+1} = S^{-1}(t_{k+1}) Z(t_{k+1}) (S(t_k) xi_k + h L(t_{k+1}) d_{k+1})`.
//!
//! The state enters through `S(t_k)`, the coordinate change at the time the
//! state is held, and leaves through `S^{-1}(t_{k+1})`. Evaluating both maps
//! at `t_{k+1}` drops the drift contribution of the moving basis and the
//! iteration then tracks a different flow (the mismatch does not vanish as
//! `h -> 0`); with the staggered evaluation the scheme is first-order
//! consistent with the continuous closed loop.

use crate::algebra::{DenseMatrix, PolyMatrix, PsiPoly};
use crate::controller::SynthesizedController;
use crate::disturbance::DisturbanceRealization;
use crate::error::{Error, Result};
use crate::sigma::{build_sigma_system, SigmaSystem};
use crate::trajectory::{stable_hash, RunMeta, RunMode, Trajectory};

#[derive(Debug, Clone)]
pub struct DtSystem {
    pub ctrl: SynthesizedController,
    pub sigma_sys: SigmaSystem,
    pub h: f64,
}

impl DtSystem {
    /// Builds the discrete-time system. The exponent is pinned to `m = n`
    /// here; the resolvent structure relies on it.
    pub fn new(ctrl: SynthesizedController, h: f64) -> Result<Self> {
        if ctrl.spec.m as usize != ctrl.spec.n {
            return Err(Error::Spec(format!(
                "discrete-time loop requires m = n, got m = {}, n = {}",
                ctrl.spec.m, ctrl.spec.n
            )));
        }
        if !h.is_finite() || h <= 0.0 {
            return Err(Error::Spec(format!("step h must be positive, got {h}")));
        }
        let sigma_sys = build_sigma_system(&ctrl)?;
        Ok(Self { ctrl, sigma_sys, h })
    }

    pub fn n(&self) -> usize {
        self.ctrl.spec.n
    }

    /// `rho_i = 1 + h lambda_i psi^i` at the effective gain for time `t`.
    pub fn rho(&self, t: f64) -> Vec<f64> {
        let psi = self.ctrl.spec.schedule.value(t);
        self.ctrl
            .spec
            .lambda
            .iter()
            .enumerate()
            .map(|(i, &l)| 1.0 + self.h * l * psi.powi(i as i32 + 1))
            .collect()
    }

    /// Closed-form upper-triangular resolvent `Z(t) = (I - h M(t))^{-1}`.
    pub fn resolvent(&self, t: f64) -> DenseMatrix {
        let n = self.n();
        let rho = self.rho(t);
        let mut z = DenseMatrix::zero(n);
        for i in 1..=n {
            let mut den = rho[i - 1];
            z.set(i, i, 1.0 / den);
            let mut hp = 1.0;
            for j in (i + 1)..=n {
                den *= rho[j - 1];
                hp *= self.h;
                z.set(i, j, hp / den);
            }
        }
        z
    }

    /// One implicit step of the auxiliary variables:
    /// `zeta_{k+1} = Z(t_{k+1}) (zeta_k + h L(t_{k+1}) d_{k+1})`.
    pub fn sigma_step(&self, zeta: &[f64], k: usize, d_next: &[f64]) -> Result<Vec<f64>> {
        let n = self.n();
        if zeta.len() != n || d_next.len() != n {
            return Err(Error::Dimension(format!(
                "expected vectors of length {n}, got {} and {}",
                zeta.len(),
                d_next.len()
            )));
        }
        let t1 = self.h * (k as f64 + 1.0);
        let psi = self.ctrl.spec.schedule.value(t1);
        let l = self.sigma_sys.l_mat.eval(psi);
        let mut w = l.matvec(d_next);
        for (wi, zi) in w.iter_mut().zip(zeta) {
            *wi = zi + self.h * *wi;
        }
        Ok(self.resolvent(t1).matvec(&w))
    }

    /// One implicit step of the state: map through `S(t_k)`, update in the
    /// auxiliary coordinates, map back through `S^{-1}(t_{k+1})`.
    pub fn state_step(&self, xi: &[f64], k: usize, d_next: &[f64]) -> Result<Vec<f64>> {
        let n = self.n();
        if xi.len() != n || d_next.len() != n {
            return Err(Error::Dimension(format!(
                "expected vectors of length {n}, got {} and {}",
                xi.len(),
                d_next.len()
            )));
        }
        let t0 = self.h * k as f64;
        let t1 = self.h * (k as f64 + 1.0);
        let psi0 = self.ctrl.spec.schedule.value(t0);
        let psi1 = self.ctrl.spec.schedule.value(t1);
        let s = self.ctrl.s.eval(psi0);
        let s_inv = self.ctrl.s_inv.eval(psi1);
        let l = self.sigma_sys.l_mat.eval(psi1);
        let mut w = l.matvec(d_next);
        let sx = s.matvec(xi);
        for (wi, si) in w.iter_mut().zip(&sx) {
            *wi = si + self.h * *wi;
        }
        let z = self.resolvent(t1).matvec(&w);
        Ok(s_inv.matvec(&z))
    }

    /// Runs the state recursion for `k_max` steps, sampling the disturbance
    /// at the grid (`d_k = d(t_k)`, consumed at the next grid time) and
    /// recording every `record_stride`-th sample.
    pub fn simulate(
        &self,
        dist: &DisturbanceRealization,
        x0: &[f64],
        k_max: usize,
        record_stride: usize,
    ) -> Result<Trajectory> {
        let n = self.n();
        if x0.len() != n {
            return Err(Error::Dimension(format!(
                "initial state has length {}, expected {n}",
                x0.len()
            )));
        }
        if dist.n() != n {
            return Err(Error::Dimension(format!(
                "disturbance has {} channels, expected {n}",
                dist.n()
            )));
        }
        let stride = record_stride.max(1);
        let mut xi = x0.to_vec();
        let mut times = Vec::with_capacity(k_max / stride + 2);
        let mut states = Vec::with_capacity(k_max / stride + 2);
        let mut controls = Vec::with_capacity(k_max / stride + 2);
        let mut sigmas = Vec::with_capacity(k_max / stride + 2);
        let mut dists = Vec::with_capacity(k_max / stride + 2);
        let record = |t: f64,
                      x: &[f64],
                      times: &mut Vec<f64>,
                      states: &mut Vec<Vec<f64>>,
                      controls: &mut Vec<f64>,
                      sigmas: &mut Vec<Vec<f64>>,
                      dists: &mut Vec<Vec<f64>>| {
            times.push(t);
            states.push(x.to_vec());
            controls.push(self.ctrl.eval_control(t, x));
            sigmas.push(self.ctrl.eval_sigma(t, x));
            dists.push(dist.value(t));
        };
        record(
            0.0,
            &xi,
            &mut times,
            &mut states,
            &mut controls,
            &mut sigmas,
            &mut dists,
        );
        for k in 0..k_max {
            let t1 = self.h * (k as f64 + 1.0);
            let d_next = dist.value(t1);
            xi = self.state_step(&xi, k, &d_next)?;
            if xi.iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFinite { t: t1 });
            }
            if (k + 1) % stride == 0 || k + 1 == k_max {
                record(
                    t1,
                    &xi,
                    &mut times,
                    &mut states,
                    &mut controls,
                    &mut sigmas,
                    &mut dists,
                );
            }
        }
        let spec_text = format!(
            "dt n={} lambda={:?} m={} schedule={:?} seed={} x0={:?} h={} k_max={}",
            n,
            self.ctrl.spec.lambda,
            self.ctrl.spec.m,
            self.ctrl.spec.schedule,
            dist.spec.seed,
            x0,
            self.h,
            k_max
        );
        Ok(Trajectory {
            times,
            states,
            controls,
            sigmas,
            dists,
            meta: RunMeta {
                mode: RunMode::Dt,
                n,
                lambda: self.ctrl.spec.lambda.clone(),
                m: self.ctrl.spec.m,
                seed: dist.spec.seed,
                uniform_draw: dist.uniform_draw,
                steps: k_max as u64,
                min_step: self.h,
                spec_hash: stable_hash(&spec_text),
            },
        })
    }

    /// Evaluates `S^{-1} Z S` and `S^{-1} Z L` at `t_probe` together with
    /// the expected strictly-lower-triangular limit.
    ///
    /// The products are formed symbolically as polynomial numerators over
    /// the common denominator `prod_i rho_i(psi)`; evaluating the collapsed
    /// numerators avoids both overflow and the catastrophic cancellation a
    /// dense numeric product suffers at large gains.
    pub fn limit_matrices(&self, t_probe: f64) -> LimitMatrices {
        let n = self.n();
        let h = self.h;
        let psi = self.ctrl.spec.schedule.value(t_probe);

        // rho_i as polynomials in psi
        let rho_polys: Vec<PsiPoly> = (1..=n)
            .map(|i| {
                let mut c = vec![0.0; i + 1];
                c[0] = 1.0;
                c[i] = h * self.ctrl.spec.lambda[i - 1];
                PsiPoly::new(&c)
            })
            .collect();

        // numerator of Z over the common denominator D = prod rho_k:
        // C(i,j) = h^{j-i} * prod_{k < i} rho_k * prod_{k > j} rho_k
        let mut z_num = PolyMatrix::zero(n);
        for i in 1..=n {
            for j in i..=n {
                let mut p = PsiPoly::constant(h.powi((j - i) as i32));
                for (k, rp) in rho_polys.iter().enumerate() {
                    let k1 = k + 1;
                    if k1 < i || k1 > j {
                        p = &p * rp;
                    }
                }
                z_num.set(i, j, p);
            }
        }

        let szs_num = self
            .ctrl
            .s_inv
            .mul(&z_num)
            .and_then(|a| a.mul(&self.ctrl.s))
            .expect("dimension-consistent by construction");
        let szl_num = self
            .ctrl
            .s_inv
            .mul(&z_num)
            .and_then(|a| a.mul(&self.sigma_sys.l_mat))
            .expect("dimension-consistent by construction");

        let denom: f64 = rho_polys.iter().map(|p| p.eval(psi)).product();
        let eval_over = |num: &PolyMatrix| {
            let mut m = DenseMatrix::zero(n);
            for i in 1..=n {
                for j in 1..=n {
                    m.set(i, j, num.get(i, j).eval(psi) / denom);
                }
            }
            m
        };
        let szs = eval_over(&szs_num);
        let szl = eval_over(&szl_num);
        let expected = nilpotent_limit(n, h);

        let dev = |computed: &DenseMatrix| {
            let scale_default = h.powi(-(n as i32 - 1));
            let mut worst = 0.0f64;
            for i in 1..=n {
                for j in 1..=n {
                    let e = expected.get(i, j);
                    let scale = if e != 0.0 { e.abs() } else { scale_default };
                    worst = worst.max((computed.get(i, j) - e).abs() / scale);
                }
            }
            worst
        };
        LimitMatrices {
            dev_szs: dev(&szs),
            dev_szl: dev(&szl),
            szs,
            szl,
            expected,
        }
    }
}

/// `t -> infinity` limit of the one-step state matrix: strictly lower
/// triangular with entries `-h^{j-i}` below the diagonal.
pub fn nilpotent_limit(n: usize, h: f64) -> DenseMatrix {
    let mut m = DenseMatrix::zero(n);
    for i in 1..=n {
        for j in 1..i {
            m.set(i, j, -h.powi(-((i - j) as i32)));
        }
    }
    m
}

/// Probe of the asymptotic one-step matrices.
#[derive(Debug, Clone)]
pub struct LimitMatrices {
    pub szs: DenseMatrix,
    pub szl: DenseMatrix,
    pub expected: DenseMatrix,
    /// Entrywise deviation of `S^{-1} Z S`, relative to the expected entry
    /// (or to the largest expected magnitude where the expected entry is 0).
    pub dev_szs: f64,
    pub dev_szl: f64,
}

/// Scalar discrete-time demonstration `x_{k+1} = (x_k + d_k) / (1 + k)`.
///
/// Iterates the recursion and checks
/// `|x_k| <= |x_0|/k! + (||d||_inf / k) * sum_{i=1..k} 2^{-(i-2)}` for
/// `k >= 1`. Returns the sequence and the largest bound violation.
pub fn scalar_dt_demo(x0: f64, d: &[f64], k_steps: usize) -> (Vec<f64>, f64) {
    assert!(k_steps >= 1, "need at least one step");
    let d_norm = d.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let mut xs = Vec::with_capacity(k_steps + 1);
    xs.push(x0);
    let mut x = x0;
    let mut inv_factorial = x0.abs();
    let mut geo_sum = 0.0;
    let mut max_violation = f64::NEG_INFINITY;
    for k in 0..k_steps {
        let dk = d.get(k).copied().unwrap_or(0.0);
        x = (x + dk) / (1.0 + k as f64);
        xs.push(x);
        let kk = k + 1;
        // |x0|/k! computed by the same division sequence as the recursion
        inv_factorial /= kk as f64;
        geo_sum += (2.0f64).powi(-(kk as i32 - 2));
        let bound = inv_factorial + d_norm / kk as f64 * geo_sum;
        max_violation = max_violation.max(x.abs() - bound);
    }
    (xs, max_violation)
}
