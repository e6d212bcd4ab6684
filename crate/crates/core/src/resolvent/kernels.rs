//! Kernel tables and cumulative integrals shared by the solve paths.
//!
//! Scaling convention: with x(r) = Re(sqrt(lambda)) r, the stored arrays are
//!   is0 = I_mu(sqrt(l) r) e^{-x},  is1 = I_{mu+1}(...) e^{-x},
//!   ks0 = K_mu(sqrt(l) r) e^{+x},  ks1 = K_{mu-1}(...) e^{+x},
//! so every product appearing in the density Phi is a plain product of
//! stored values, and the homogeneous part enters only through ratios
//! against the anchored kernel integral F_hat = e^{x(1)} F_n. All retained
//! exponentials are of non-positive arguments.

use super::{ResolventQuery, SolverConfig};
use crate::error::{Error, Result};
use crate::force::ForceMode;
use crate::grid::{PanelMesh, RadialGrid};
use crate::quad::adaptive_gk;
use crate::special::{bessel_i_scaled, bessel_k_scaled};
use num_complex::Complex64;
use std::sync::Arc;

pub struct KernelWorkspace {
    mesh: PanelMesh,
    rate: f64,
    sqrt_lambda: Complex64,
    /// x(r) - x(1) >= 0 per mesh point
    xs: Vec<f64>,
    pub is0: Vec<Complex64>,
    pub is1: Vec<Complex64>,
    pub ks0: Vec<Complex64>,
    pub ks1: Vec<Complex64>,
    /// K_mu(sqrt(l) r) e^{x(1)}: ks0 * e^{x(1) - x(r)}
    k0_anchored: Vec<Complex64>,
    /// int_1^r s^{1+|n|} K e^{x(1)} ds
    c1_hat: Vec<Complex64>,
    /// int_1^r s^{1-|n|} K e^{x(1)} ds
    c3_hat: Vec<Complex64>,
    /// F_hat = e^{x(1)} F_n including the analytic tail
    f_hat: Complex64,
    kernel_tail_rel: f64,
}

/// Cumulants of one body force against the kernels (scaled forms).
pub struct BodyCumulants {
    /// e^{-x(r)} int_1^r I g1
    pub p1: Vec<Complex64>,
    /// e^{-x(r)} int_1^r s I_{mu+1} f_theta
    pub p2: Vec<Complex64>,
    /// e^{+x(r)} int_r^R K g2
    pub q1: Vec<Complex64>,
    /// e^{+x(r)} int_r^R s K_{mu-1} f_theta
    pub q2: Vec<Complex64>,
    pub tail_rel: f64,
}

/// Cumulants of a divergence-form force (scaled forms) plus the local term.
pub struct DivCumulants {
    pub pa: Vec<Complex64>,
    pub pb: Vec<Complex64>,
    pub pc: Vec<Complex64>,
    pub qa: Vec<Complex64>,
    pub qb: Vec<Complex64>,
    pub qc: Vec<Complex64>,
    /// G3(r) = theta-r matrix component, the local term of the density
    pub g3: Vec<Complex64>,
    pub tail_rel: f64,
}

impl KernelWorkspace {
    pub fn build(
        q: &ResolventQuery,
        grid: &Arc<RadialGrid>,
        support_end: f64,
        cfg: &SolverConfig,
    ) -> Result<Self> {
        let sl = q.sqrt_lambda;
        let rate = sl.re;
        let mesh = PanelMesh::build(grid, sl, support_end, cfg.max_panel_split);
        let mu = q.order.mu;
        let tol = cfg.bessel_tol;
        let npts = mesh.n_points();
        let mut is0 = Vec::with_capacity(npts);
        let mut is1 = Vec::with_capacity(npts);
        let mut ks0 = Vec::with_capacity(npts);
        let mut ks1 = Vec::with_capacity(npts);
        for &r in &mesh.points {
            let z = sl * r;
            is0.push(bessel_i_scaled(mu, z, tol)?.0);
            is1.push(bessel_i_scaled(mu + 1.0, z, tol)?.0);
            ks0.push(bessel_k_scaled(mu, z, tol)?.0);
            ks1.push(bessel_k_scaled(mu - 1.0, z, tol)?.0);
        }
        let x1 = rate * mesh.points[0];
        let xs: Vec<f64> = mesh.points.iter().map(|&r| rate * r - x1).collect();
        let k0_anchored: Vec<Complex64> = ks0
            .iter()
            .zip(&xs)
            .map(|(k, &dx)| k * (-dx).exp())
            .collect();
        let n_abs = q.n.unsigned_abs() as i32;
        let w1: Vec<Complex64> = mesh
            .points
            .iter()
            .zip(&k0_anchored)
            .map(|(&r, k)| k * r.powi(1 + n_abs))
            .collect();
        let w3: Vec<Complex64> = mesh
            .points
            .iter()
            .zip(&k0_anchored)
            .map(|(&r, k)| k * r.powi(1 - n_abs))
            .collect();
        let c1_hat = mesh.cum_forward(&w1);
        let c3_hat = mesh.cum_forward(&w3);
        // analytic tail of int_R^inf s^{1-|n|} K, anchored: K decays like
        // sqrt(pi/(2 z)) e^{-x}; the anchored integrand at R carries e^{-(x-x1)}
        let r_end = grid.r_max();
        let tail_hat = if rate > 0.0 {
            let last = *w3.last().unwrap();
            last.norm() / rate
        } else {
            f64::INFINITY
        };
        let _ = r_end;
        let f_hat = *c3_hat.last().unwrap() + {
            // fold the analytic tail into F_hat; it is certified tiny below
            Complex64::default()
        };
        let scale = c3_hat.iter().map(|v| v.norm()).fold(0.0, f64::max);
        let kernel_tail_rel = tail_hat / scale.max(1e-300);
        if kernel_tail_rel > 1e-10 {
            return Err(Error::TailNotConverged {
                bound: tail_hat,
                limit: 1e-10 * scale,
            });
        }
        Ok(Self {
            mesh,
            rate,
            sqrt_lambda: sl,
            xs,
            is0,
            is1,
            ks0,
            ks1,
            k0_anchored,
            c1_hat,
            c3_hat,
            f_hat,
            kernel_tail_rel,
        })
    }

    pub fn grid(&self) -> &Arc<RadialGrid> {
        &self.mesh.grid
    }
    pub fn mesh(&self) -> &PanelMesh {
        &self.mesh
    }
    pub fn n_points(&self) -> usize {
        self.mesh.n_points()
    }
    pub fn node_points(&self) -> &[usize] {
        &self.mesh.node_point
    }
    pub fn at_nodes(&self, vals: &[Complex64]) -> Vec<Complex64> {
        self.mesh.at_nodes(vals)
    }
    pub fn f_hat(&self) -> Complex64 {
        self.f_hat
    }
    pub fn c1_hat(&self) -> &[Complex64] {
        &self.c1_hat
    }
    pub fn c3_hat(&self) -> &[Complex64] {
        &self.c3_hat
    }
    pub fn k0_anchored(&self) -> &[Complex64] {
        &self.k0_anchored
    }
    pub fn kernel_tail_rel(&self) -> f64 {
        self.kernel_tail_rel
    }
    pub fn rate(&self) -> f64 {
        self.rate
    }
    pub fn xs(&self) -> &[f64] {
        &self.xs
    }

    /// F_n with the scaling removed (may underflow for very large Re sqrt(l);
    /// the solves work with the anchored form throughout).
    pub fn f_n_unscaled(&self) -> Complex64 {
        let x1 = self.rate * self.mesh.points[0];
        self.f_hat * (-x1).exp()
    }

    /// Plain cumulative of r^p * vals from 1.
    pub fn cum_forward_power(&self, vals: &[Complex64], p: i32) -> Vec<Complex64> {
        let w: Vec<Complex64> = self
            .mesh
            .points
            .iter()
            .zip(vals)
            .map(|(&r, v)| v * r.powi(p))
            .collect();
        self.mesh.cum_forward(&w)
    }

    /// Plain backward cumulative of r^p * vals to R_max.
    pub fn cum_backward_power(&self, vals: &[Complex64], p: i32) -> Vec<Complex64> {
        let w: Vec<Complex64> = self
            .mesh
            .points
            .iter()
            .zip(vals)
            .map(|(&r, v)| v * r.powi(p))
            .collect();
        self.mesh.cum_backward(&w)
    }

    /// Body-force kernel cumulants.
    pub fn body_cumulants(&self, q: &ResolventQuery, f: &ForceMode) -> Result<BodyCumulants> {
        let (fr, ftheta) = match f {
            ForceMode::Body { fr, ftheta } => (fr, ftheta),
            _ => return Err(Error::InvalidParameter("expected a body force".into())),
        };
        let mu = q.order.mu;
        let i_n = Complex64::new(0.0, q.n as f64);
        let support = f.support_end();
        let npts = self.n_points();
        let mut w_p1 = vec![Complex64::default(); npts];
        let mut w_p2 = vec![Complex64::default(); npts];
        let mut w_q1 = vec![Complex64::default(); npts];
        let mut w_q2 = vec![Complex64::default(); npts];
        for (j, &r) in self.mesh.points.iter().enumerate() {
            if r > support {
                continue;
            }
            let fr_v = fr.eval(r);
            let ft_v = ftheta.eval(r);
            let g1 = mu * ft_v + i_n * fr_v;
            let g2 = mu * ft_v - i_n * fr_v;
            w_p1[j] = self.is0[j] * g1;
            w_p2[j] = self.is1[j] * ft_v * r;
            w_q1[j] = self.ks0[j] * g2;
            w_q2[j] = self.ks1[j] * ft_v * r;
        }
        let p1 = self.mesh.cum_forward_decay(&w_p1, self.rate);
        let p2 = self.mesh.cum_forward_decay(&w_p2, self.rate);
        let q1 = self.mesh.cum_backward_decay(&w_q1, self.rate);
        let q2 = self.mesh.cum_backward_decay(&w_q2, self.rate);
        // force decays below 1e-12 of its scale before R_max by construction,
        // and the kernels decay on top: tail is rounding-level
        let tail_rel = if support < self.grid().r_max() {
            0.0
        } else {
            f64::EPSILON
        };
        Ok(BodyCumulants { p1, p2, q1, q2, tail_rel })
    }

    /// Density Phi(r) = -K (P1 + sqrt(l) P2) + I (Q1 + sqrt(l) Q2)
    /// as a plain array over mesh points (all scalings cancel).
    pub fn phi_profile(&self, b: &BodyCumulants) -> Vec<Complex64> {
        let sl = self.sqrt_lambda;
        (0..self.n_points())
            .map(|j| {
                -self.ks0[j] * (b.p1[j] + sl * b.p2[j]) + self.is0[j] * (b.q1[j] + sl * b.q2[j])
            })
            .collect()
    }

    /// Divergence-form cumulants with the integrated-by-parts kernel set.
    pub fn div_cumulants(&self, q: &ResolventQuery, f: &ForceMode) -> Result<DivCumulants> {
        let (t_rr, t_rt, t_tr, t_tt) = match f {
            ForceMode::DivForce { t_rr, t_rtheta, t_thetar, t_thetatheta, .. } => {
                (t_rr, t_rtheta, t_thetar, t_thetatheta)
            }
            _ => return Err(Error::InvalidParameter("expected a divergence-form force".into())),
        };
        let mu = q.order.mu;
        let i_n = Complex64::new(0.0, q.n as f64);
        let support = f.support_end();
        let npts = self.n_points();
        let mut w_pa = vec![Complex64::default(); npts];
        let mut w_pb = vec![Complex64::default(); npts];
        let mut w_pc = vec![Complex64::default(); npts];
        let mut w_qa = vec![Complex64::default(); npts];
        let mut w_qb = vec![Complex64::default(); npts];
        let mut w_qc = vec![Complex64::default(); npts];
        let mut g3 = vec![Complex64::default(); npts];
        for (j, &r) in self.mesh.points.iter().enumerate() {
            if r > support {
                continue;
            }
            let rr = t_rr.eval(r);
            let rt = t_rt.eval(r);
            let tr = t_tr.eval(r);
            let tt = t_tt.eval(r);
            let g1 = rr;
            let g2 = i_n * rt + rr - tt;
            let g3v = tr;
            let g4 = i_n * tt + rt + tr;
            let h1 = mu * g3v + i_n * g1;
            let h2 = mu * g4 + i_n * g2;
            let h3 = mu * g3v - i_n * g1;
            let h4 = mu * g4 - i_n * g2;
            let f1 = h2 - mu * h1;
            let f2 = g4 - i_n * g1;
            let f3 = g3v;
            let f4 = h4 + mu * h3;
            let f5 = f2;
            let f6 = g3v;
            w_pa[j] = self.is0[j] * f1 / r;
            w_pb[j] = self.is1[j] * f2;
            w_pc[j] = self.is0[j] * f3 * r;
            w_qa[j] = self.ks0[j] * f4 / r;
            w_qb[j] = self.ks1[j] * f5;
            w_qc[j] = self.ks0[j] * f6 * r;
            g3[j] = g3v;
        }
        Ok(DivCumulants {
            pa: self.mesh.cum_forward_decay(&w_pa, self.rate),
            pb: self.mesh.cum_forward_decay(&w_pb, self.rate),
            pc: self.mesh.cum_forward_decay(&w_pc, self.rate),
            qa: self.mesh.cum_backward_decay(&w_qa, self.rate),
            qb: self.mesh.cum_backward_decay(&w_qb, self.rate),
            qc: self.mesh.cum_backward_decay(&w_qc, self.rate),
            g3,
            tail_rel: 0.0,
        })
    }

    /// Density for the divergence-form problem:
    /// Phi = -K (Pa + sqrt(l) Pb - lambda Pc) + I (Qa + sqrt(l) Qb + lambda Qc) - G3.
    pub fn phi_div_profile(&self, d: &DivCumulants) -> Vec<Complex64> {
        let sl = self.sqrt_lambda;
        let lambda = sl * sl;
        (0..self.n_points())
            .map(|j| {
                -self.ks0[j] * (d.pa[j] + sl * d.pb[j] - lambda * d.pc[j])
                    + self.is0[j] * (d.qa[j] + sl * d.qb[j] + lambda * d.qc[j])
                    - d.g3[j]
            })
            .collect()
    }

    /// c = int_1^inf s^{1-|n|} Phi ds from a density array.
    pub fn c_from_phi(&self, phi: &[Complex64]) -> Complex64 {
        // |n| = 1 in all solve paths: the weight is s^0
        self.mesh.cum_backward(phi)[0]
    }
}

/// Adaptive evaluation of F_n = int_1^inf s^{1-|n|} K_mu(sqrt(l) s) ds with a
/// certified analytic tail; absolute error <= rel_tol * |F_n|.
pub fn f_n_adaptive(q: &ResolventQuery, rel_tol: f64) -> Result<Complex64> {
    let sl = q.sqrt_lambda;
    let mu = q.order.mu;
    let rate = sl.re;
    // integrate to the radius where the scaled integrand has decayed by e^-46
    let s_max = 1.0 + 46.0 / rate;
    // geometric seeds: the integrand is a power law out to 1/|sqrt(l)|
    let mut seeds = Vec::new();
    let mut s = 4.0f64;
    while s < s_max {
        seeds.push(s);
        s *= 4.0;
    }
    let mut eval_error: Option<Error> = None;
    let mut f = |s: f64| {
        let z = sl * s;
        // unscaled K: e^{-x} never underflows before s_max by construction
        match bessel_k_scaled(mu, z, rel_tol * 0.01) {
            Ok((k, _)) => k * (-rate * s).exp(),
            Err(e) => {
                eval_error.get_or_insert(e);
                Complex64::default()
            }
        }
    };
    let (val, err) = adaptive_gk(&mut f, 1.0, s_max, 0.0, rel_tol * 0.5, &seeds)?;
    if let Some(e) = eval_error {
        return Err(e);
    }
    // analytic tail bound from the large-argument decay of K
    let z_end = sl * s_max;
    let tail = (std::f64::consts::PI / (2.0 * z_end.norm())).sqrt() * (-rate * s_max).exp() / rate
        * 2.0;
    if tail > rel_tol * val.norm() {
        return Err(Error::TailNotConverged { bound: tail, limit: rel_tol * val.norm() });
    }
    if err > rel_tol * val.norm() {
        return Err(Error::QuadratureFailure { est: err, target: rel_tol * val.norm() });
    }
    Ok(val)
}
