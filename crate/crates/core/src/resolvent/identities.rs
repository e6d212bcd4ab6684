//! Iterated-integral decompositions of the streamfunction integrals of the
//! density Phi. The left-hand sides are the directly quadratured
//! r^{-|n|} int_1^r s^{1+|n|} Phi ds and r^{|n|} int_r^inf s^{1-|n|} Phi ds;
//! the right-hand sides rearrange the double integrals by Fubini into sums
//! of products of single cumulants. Both sides share the kernel evaluations
//! but follow genuinely different algebraic routes, so their agreement
//! exercises the rearrangement (and, for the divergence-form variant, the
//! Wronskian reduction of the local term).
//!
//! This path works with unscaled kernels and therefore requires the moderate
//! regime Re(sqrt(lambda)) R_max <= ~50 that all its callers live in.

use super::kernels::KernelWorkspace;
use super::{ResolventQuery, SolverConfig};
use crate::error::{Error, Result};
use crate::force::ForceMode;
use crate::grid::RadialGrid;
use num_complex::Complex64;
use std::sync::Arc;

/// Residuals of one identity check (relative, maximized over grid nodes).
#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct IdentityReport {
    pub inner: f64,
    pub outer: f64,
    /// |J_9(r) - r^{-|n|} J_17(1)| relative to the outer scale (body force)
    pub cancellation: f64,
    /// relative mismatch of c against the sum of the five outer terms at r=1
    pub c_identity: f64,
}

struct Unscaled {
    i0: Vec<Complex64>,
    i1: Vec<Complex64>,
    k0: Vec<Complex64>,
    k1: Vec<Complex64>,
}

fn unscale(ws: &KernelWorkspace) -> Result<Unscaled> {
    let x1 = ws.rate() * ws.mesh().points[0];
    let span = ws.rate() * ws.mesh().grid.r_max();
    if span > 60.0 {
        return Err(Error::InvalidParameter(format!(
            "identity check requires Re(sqrt(lambda)) R_max <= 60, got {span:.1}"
        )));
    }
    let xs = ws.xs();
    let un = |v: &[Complex64], sign: f64| -> Vec<Complex64> {
        v.iter()
            .zip(xs)
            .map(|(c, &dx)| c * (sign * (dx + x1)).exp())
            .collect()
    };
    Ok(Unscaled {
        i0: un(&ws.is0, 1.0),
        i1: un(&ws.is1, 1.0),
        k0: un(&ws.ks0, -1.0),
        k1: un(&ws.ks1, -1.0),
    })
}

fn max_rel(lhs: &[Complex64], rhs: &[Complex64]) -> f64 {
    lhs.iter()
        .zip(rhs)
        .map(|(a, b)| (a - b).norm() / (a.norm() + 1e-30))
        .fold(0.0, f64::max)
}

/// Check of the body-force decomposition. Returns the worst relative
/// residuals of the inner/outer identities plus the cancellation and
/// c-expression relations.
pub fn j1_identity(
    q: &ResolventQuery,
    f: &ForceMode,
    grid: &Arc<RadialGrid>,
    cfg: &SolverConfig,
) -> Result<IdentityReport> {
    let ws = KernelWorkspace::build(q, grid, f.support_end(), cfg)?;
    let u = unscale(&ws)?;
    let (fr, ftheta) = match f {
        ForceMode::Body { fr, ftheta } => (fr, ftheta),
        _ => return Err(Error::InvalidParameter("expected a body force".into())),
    };
    let mu = q.order.mu;
    let n_abs = q.n.unsigned_abs() as i32;
    let i_n = Complex64::new(0.0, q.n as f64);
    let mesh = ws.mesh();
    let pts = &mesh.points;
    let npts = pts.len();

    // force arrays
    let mut g1 = vec![Complex64::default(); npts];
    let mut g2 = vec![Complex64::default(); npts];
    let mut ft = vec![Complex64::default(); npts];
    for (j, &r) in pts.iter().enumerate() {
        let frv = fr.eval(r);
        let ftv = ftheta.eval(r);
        g1[j] = mu * ftv + i_n * frv;
        g2[j] = mu * ftv - i_n * frv;
        ft[j] = ftv;
    }

    let prod = |a: &[Complex64], b: &[Complex64]| -> Vec<Complex64> {
        a.iter().zip(b).map(|(x, y)| x * y).collect()
    };
    let with_power = |a: &[Complex64], p: i32| -> Vec<Complex64> {
        a.iter()
            .zip(pts)
            .map(|(x, &r)| x * r.powi(p))
            .collect()
    };

    // single cumulants
    let p1 = mesh.cum_forward(&prod(&u.i0, &g1));
    let p2 = mesh.cum_forward(&with_power(&prod(&u.i1, &ft), 1));
    let q1 = mesh.cum_backward(&prod(&u.k0, &g2));
    let q2 = mesh.cum_backward(&with_power(&prod(&u.k1, &ft), 1));
    let c1 = mesh.cum_forward(&with_power(&u.k0, 1 + n_abs));
    let c2 = mesh.cum_forward(&with_power(&u.k1, n_abs));
    let c5 = mesh.cum_forward(&with_power(&u.i0, 1 + n_abs));
    let c6 = mesh.cum_forward(&with_power(&u.i1, n_abs));
    let c7 = mesh.cum_forward(&with_power(&u.i0, 1 - n_abs));
    let c8 = mesh.cum_forward(&with_power(&u.i1, -n_abs));
    let d3 = mesh.cum_backward(&with_power(&u.k0, 1 - n_abs));
    let d4 = mesh.cum_backward(&with_power(&u.k1, -n_abs));

    // nested cumulants
    let w1 = mesh.cum_forward(&prod(&prod(&u.i0, &g1), &c1));
    let w2 = mesh.cum_forward(&prod(&with_power(&prod(&u.i1, &ft), 1), &c2));
    let w3 = mesh.cum_forward(&prod(&prod(&u.k0, &g2), &c5));
    let w4 = mesh.cum_forward(&prod(&with_power(&prod(&u.k1, &ft), 1), &c6));
    let w5 = mesh.cum_backward(&prod(&prod(&u.i0, &g1), &d3));
    let w6 = mesh.cum_backward(&prod(&with_power(&prod(&u.i1, &ft), 1), &d4));
    let w7 = mesh.cum_backward(&prod(&prod(&u.k0, &g2), &c7));
    let w8 = mesh.cum_backward(&prod(&with_power(&prod(&u.k1, &ft), 1), &c8));

    // direct sides from the assembled density
    let body = ws.body_cumulants(q, f)?;
    let phi = ws.phi_profile(&body);
    let a_cum = ws.cum_forward_power(&phi, 1 + n_abs);
    let b_cum = ws.cum_backward_power(&phi, 1 - n_abs);

    let node_pts = ws.node_points();
    let m = node_pts.len();
    let mut lhs_in = Vec::with_capacity(m);
    let mut rhs_in = Vec::with_capacity(m);
    let mut lhs_out = Vec::with_capacity(m);
    let mut rhs_out = Vec::with_capacity(m);
    let mut cancel = 0.0f64;
    let mut outer_scale = 0.0f64;
    let i1_at_1 = u.i1[0];
    let q2_at_1 = q2[0];
    for (i, &pt) in node_pts.iter().enumerate() {
        let r = mesh.grid.nodes[i];
        let rn = r.powi(n_abs);
        lhs_in.push(a_cum[pt] / rn);
        lhs_out.push(rn * b_cum[pt]);
        let j1 = -(p1[pt] * c1[pt] - w1[pt]) / rn;
        let j2 = -(mu + n_abs as f64) / rn * (p2[pt] * c2[pt] - w2[pt]);
        let j3 = w3[pt] / rn;
        let j4 = (mu - n_abs as f64) / rn * w4[pt];
        let j5 = q1[pt] * c5[pt] / rn;
        let j6 = (mu - n_abs as f64) / rn * (q2[pt] * c6[pt]);
        let j7 = r * u.k1[pt] * p2[pt];
        let j8 = r * u.i1[pt] * q2[pt];
        let j9 = -i1_at_1 * q2_at_1 / rn;
        rhs_in.push(j1 + j2 + j3 + j4 + j5 + j6 + j7 + j8 + j9);
        let j10 = -rn * p1[pt] * d3[pt];
        let j11 = -rn * w5[pt];
        let j12 = -(mu - n_abs as f64) * rn * p2[pt] * d4[pt];
        let j13 = -(mu - n_abs as f64) * rn * w6[pt];
        let j14 = rn * (w7[pt] - q1[pt] * c7[pt]);
        let j15 = (mu + n_abs as f64) * rn * (w8[pt] - q2[pt] * c8[pt]);
        let j16 = -j7;
        let j17 = -j8;
        rhs_out.push(j10 + j11 + j12 + j13 + j14 + j15 + j16 + j17);
        // cancellation J_9(r) - r^{-n} J_17(1): J_17(1) = -I_{mu+1}(sqrt l) Q2(1)
        let j17_at_1 = -i1_at_1 * q2_at_1;
        cancel = cancel.max((j9 - j17_at_1 / rn).norm());
        outer_scale = outer_scale.max(lhs_out.last().unwrap().norm());
    }
    // c = sum over l in {11, 13, 14, 15, 17} of J_l(1)
    let pt0 = node_pts[0];
    let j11_1 = -w5[pt0];
    let j13_1 = -(mu - n_abs as f64) * w6[pt0];
    let j14_1 = w7[pt0] - q1[pt0] * c7[pt0];
    let j15_1 = (mu + n_abs as f64) * (w8[pt0] - q2[pt0] * c8[pt0]);
    let j17_1 = -i1_at_1 * q2_at_1;
    let c_sum = j11_1 + j13_1 + j14_1 + j15_1 + j17_1;
    let c_direct = b_cum[pt0];
    let c_identity = (c_sum - c_direct).norm() / c_direct.norm().max(1e-30);

    Ok(IdentityReport {
        inner: max_rel(&lhs_in, &rhs_in),
        outer: max_rel(&lhs_out, &rhs_out),
        cancellation: cancel / outer_scale.max(1e-30),
        c_identity,
    })
}

/// Check of the divergence-form decomposition, including the kernel-product
/// form of the local term against its Wronskian reduction.
pub fn j2_identity(
    q: &ResolventQuery,
    f: &ForceMode,
    grid: &Arc<RadialGrid>,
    cfg: &SolverConfig,
) -> Result<IdentityReport> {
    let ws = KernelWorkspace::build(q, grid, f.support_end(), cfg)?;
    let u = unscale(&ws)?;
    if !matches!(f, ForceMode::DivForce { .. }) {
        return Err(Error::InvalidParameter("expected a divergence-form force".into()));
    }
    let mu = q.order.mu;
    let n_abs = q.n.unsigned_abs() as i32;
    let mesh = ws.mesh();
    let pts = &mesh.points;

    let div = ws.div_cumulants(q, f)?;
    let phi = ws.phi_div_profile(&div);
    let a_cum = ws.cum_forward_power(&phi, 1 + n_abs);
    let b_cum = ws.cum_backward_power(&phi, 1 - n_abs);

    // rebuild the per-point integrand sets (unscaled kernels this time)
    let sl = q.sqrt_lambda;
    let lambda = q.lambda;
    let npts = pts.len();
    let mut wa = vec![Complex64::default(); npts];
    let mut wb = vec![Complex64::default(); npts];
    let mut wc = vec![Complex64::default(); npts];
    let mut va = vec![Complex64::default(); npts];
    let mut vb = vec![Complex64::default(); npts];
    let mut vc = vec![Complex64::default(); npts];
    let mut loc_prod = vec![Complex64::default(); npts]; // s (K I1 + K1 I) G3
    let mut loc_ik = vec![Complex64::default(); npts]; // I K G3
    {
        let (t_rr, t_rt, t_tr, t_tt) = match f {
            ForceMode::DivForce { t_rr, t_rtheta, t_thetar, t_thetatheta, .. } => {
                (t_rr, t_rtheta, t_thetar, t_thetatheta)
            }
            _ => unreachable!(),
        };
        let i_nc = Complex64::new(0.0, q.n as f64);
        for (j, &r) in pts.iter().enumerate() {
            if r > f.support_end() {
                continue;
            }
            let rr = t_rr.eval(r);
            let rt = t_rt.eval(r);
            let tr = t_tr.eval(r);
            let tt = t_tt.eval(r);
            let g1 = rr;
            let g2 = i_nc * rt + rr - tt;
            let g3 = tr;
            let g4 = i_nc * tt + rt + tr;
            let h1 = mu * g3 + i_nc * g1;
            let h2 = mu * g4 + i_nc * g2;
            let h3 = mu * g3 - i_nc * g1;
            let h4 = mu * g4 - i_nc * g2;
            let f1 = h2 - mu * h1;
            let f2 = g4 - i_nc * g1;
            let f4 = h4 + mu * h3;
            wa[j] = u.i0[j] * f1 / r;
            wb[j] = u.i1[j] * f2;
            wc[j] = u.i0[j] * g3 * r;
            va[j] = u.k0[j] * f4 / r;
            vb[j] = u.k1[j] * f2;
            vc[j] = u.k0[j] * g3 * r;
            loc_prod[j] = (u.k0[j] * u.i1[j] + u.k1[j] * u.i0[j]) * g3 * r;
            loc_ik[j] = u.i0[j] * u.k0[j] * g3;
        }
    }
    let pa = mesh.cum_forward(&wa);
    let pb = mesh.cum_forward(&wb);
    let pc = mesh.cum_forward(&wc);
    let qa = mesh.cum_backward(&va);
    let qb = mesh.cum_backward(&vb);
    let qc = mesh.cum_backward(&vc);
    let c1 = {
        let w: Vec<Complex64> = u
            .k0
            .iter()
            .zip(pts)
            .map(|(k, &r)| k * r.powi(1 + n_abs))
            .collect();
        mesh.cum_forward(&w)
    };
    let c5 = {
        let w: Vec<Complex64> = u
            .i0
            .iter()
            .zip(pts)
            .map(|(k, &r)| k * r.powi(1 + n_abs))
            .collect();
        mesh.cum_forward(&w)
    };
    let c7 = {
        let w: Vec<Complex64> = u
            .i0
            .iter()
            .zip(pts)
            .map(|(k, &r)| k * r.powi(1 - n_abs))
            .collect();
        mesh.cum_forward(&w)
    };
    let d3 = {
        let w: Vec<Complex64> = u
            .k0
            .iter()
            .zip(pts)
            .map(|(k, &r)| k * r.powi(1 - n_abs))
            .collect();
        mesh.cum_backward(&w)
    };
    let prod = |a: &[Complex64], b: &[Complex64]| -> Vec<Complex64> {
        a.iter().zip(b).map(|(x, y)| x * y).collect()
    };
    let wa1 = mesh.cum_forward(&prod(&wa, &c1));
    let wb1 = mesh.cum_forward(&prod(&wb, &c1));
    let wc1 = mesh.cum_forward(&prod(&wc, &c1));
    let wd5 = mesh.cum_forward(&prod(&va, &c5));
    let we5 = mesh.cum_forward(&prod(&vb, &c5));
    let wf5 = mesh.cum_forward(&prod(&vc, &c5));
    let wa3 = mesh.cum_backward(&prod(&wa, &d3));
    let wb3 = mesh.cum_backward(&prod(&wb, &d3));
    let wc3 = mesh.cum_backward(&prod(&wc, &d3));
    let wd7 = mesh.cum_backward(&prod(&va, &c7));
    let we7 = mesh.cum_backward(&prod(&vb, &c7));
    let wf7 = mesh.cum_backward(&prod(&vc, &c7));
    // local-term cumulants in kernel-product form; loc_prod already carries
    // one factor of s, so these weights complete s^{2 +- |n|}
    let lp_in = mesh.cum_forward(&{
        let w: Vec<Complex64> = loc_prod
            .iter()
            .zip(pts)
            .map(|(v, &r)| v * r.powi(1 + n_abs))
            .collect();
        w
    });
    let lk_in = mesh.cum_forward(&{
        let w: Vec<Complex64> = loc_ik
            .iter()
            .zip(pts)
            .map(|(v, &r)| v * r.powi(1 + n_abs))
            .collect();
        w
    });
    let lp_out = mesh.cum_backward(&{
        let w: Vec<Complex64> = loc_prod
            .iter()
            .zip(pts)
            .map(|(v, &r)| v * r.powi(1 - n_abs))
            .collect();
        w
    });
    let lk_out = mesh.cum_backward(&{
        let w: Vec<Complex64> = loc_ik
            .iter()
            .zip(pts)
            .map(|(v, &r)| v * r.powi(1 - n_abs))
            .collect();
        w
    });

    let node_pts = ws.node_points();
    let mut lhs_in = Vec::new();
    let mut rhs_in = Vec::new();
    let mut lhs_out = Vec::new();
    let mut rhs_out = Vec::new();
    for (i, &pt) in node_pts.iter().enumerate() {
        let r = mesh.grid.nodes[i];
        let rn = r.powi(n_abs);
        lhs_in.push(a_cum[pt] / rn);
        lhs_out.push(rn * b_cum[pt]);
        let j1 = -(pa[pt] * c1[pt] - wa1[pt]) / rn;
        let j2 = -sl / rn * (pb[pt] * c1[pt] - wb1[pt]);
        let j3 = -lambda / rn * (pc[pt] * c1[pt] - wc1[pt]);
        let j4 = wd5[pt] / rn;
        let j5 = qa[pt] * c5[pt] / rn;
        let j6 = sl / rn * we5[pt];
        let j7 = sl / rn * (qb[pt] * c5[pt]);
        let j8 = lambda / rn * wf5[pt];
        let j9 = lambda / rn * (qc[pt] * c5[pt]);
        let j10 = -sl / rn * lp_in[pt] - mu * 2.0 / rn * lk_in[pt];
        rhs_in.push(j1 + j2 + j3 + j4 + j5 + j6 + j7 + j8 + j9 + j10);
        let j11 = -rn * pa[pt] * d3[pt];
        let j12 = -rn * wa3[pt];
        let j13 = -sl * rn * pb[pt] * d3[pt];
        let j14 = -sl * rn * wb3[pt];
        let j15 = lambda * rn * pc[pt] * d3[pt];
        let j16 = lambda * rn * wc3[pt];
        let j17 = rn * (wd7[pt] - qa[pt] * c7[pt]);
        let j18 = sl * rn * (we7[pt] - qb[pt] * c7[pt]);
        let j19 = lambda * rn * (wf7[pt] - qc[pt] * c7[pt]);
        let j20 = -sl * rn * lp_out[pt] - mu * 2.0 * rn * lk_out[pt];
        rhs_out.push(
            j11 + j12 + j13 + j14 + j15 + j16 + j17 + j18 + j19 + j20,
        );
    }
    Ok(IdentityReport {
        inner: max_rel(&lhs_in, &rhs_in),
        outer: max_rel(&lhs_out, &rhs_out),
        cancellation: 0.0,
        c_identity: 0.0,
    })
}
