//! Evaluation of the semigroup e^{-tA} on single-mode data through the
//! Dunford integral over the resolvent,
//!
//! ```text
//! e^{-tA} f = (1/2 pi i) int_{gamma(b)} e^{t lambda} (lambda + A)^{-1} f dlambda,
//! ```
//!
//! with gamma(b) the counterclockwise contour made of the two rays
//! arg(lambda) = +-phi (phi in (pi/2, pi)) and the arc |lambda| = b, plus the
//! least-squares decay-rate fits over a time grid.

use crate::error::{Error, Result};
use crate::force::{ForceMode, SmoothFn};
use crate::grid::{RadialGrid, RadialProfile};
use crate::polar::{grad_energy, ModeField};
use crate::resolvent::{solve_body_force, ResolventQuery, SolverConfig};
use num_complex::Complex64;
use rayon::prelude::*;
use std::sync::Arc;

/// Contour and time-grid specification.
#[derive(Debug, Clone)]
pub struct ContourSpec {
    /// ray angle, in (pi/2, pi)
    pub phi: f64,
    /// arc radius override; None picks min(1/(2t), 0.1, e^{-1/(6 beta)}/2)
    pub b: Option<f64>,
    /// ray panels per octave of u = t|lambda| (GL10 each)
    pub refine: usize,
    /// panels on the arc (GL10 each)
    pub arc_panels: usize,
    /// evaluation times for decay fits
    pub t_list: Vec<f64>,
}

impl Default for ContourSpec {
    fn default() -> Self {
        Self {
            phi: 0.7 * std::f64::consts::PI,
            b: None,
            refine: 1,
            arc_panels: 3,
            t_list: vec![],
        }
    }
}

impl ContourSpec {
    pub fn arc_radius(&self, t: f64, beta: f64) -> f64 {
        if let Some(b) = self.b {
            return b;
        }
        let mut b = (0.5 / t).min(0.1);
        if beta > 0.0 {
            b = b.min(0.5 * (-1.0 / (6.0 * beta)).exp());
        }
        b
    }

    /// Weighted contour nodes (lambda_k, w_k) such that the integral is
    /// approximated by sum w_k e^{t lambda_k} R(lambda_k) f.
    pub fn nodes(&self, t: f64, beta: f64) -> Result<Vec<(Complex64, Complex64)>> {
        if !(self.phi > std::f64::consts::FRAC_PI_2 && self.phi < std::f64::consts::PI) {
            return Err(Error::InvalidParameter(format!(
                "ray angle must lie in (pi/2, pi), got {}",
                self.phi
            )));
        }
        if t <= 0.0 {
            return Err(Error::InvalidParameter("t must be positive".into()));
        }
        let b = self.arc_radius(t, beta);
        let two_pi_i = Complex64::new(0.0, 2.0 * std::f64::consts::PI);
        let mut nodes = Vec::new();
        // rays, parametrized by u = t rho, geometric panels (GL10 handles the
        // power-law resolvent growth on octave-or-finer panels); truncated
        // where e^{t Re lambda} is below 1e-17 of the peak
        let u0 = t * b;
        let umax = 40.0 / self.phi.cos().abs();
        let ratio = 2f64.powf(1.0 / self.refine.max(1) as f64);
        let mut edges = vec![u0];
        let mut u = u0;
        while u < umax {
            u = (u * ratio).min(umax);
            edges.push(u);
        }
        for sign in [1.0f64, -1.0] {
            let dir = Complex64::from_polar(1.0, sign * self.phi);
            for w in edges.windows(2) {
                let (x, wts) = crate::quad::gl10_nodes(w[0], w[1]);
                for (xi, wi) in x.iter().zip(wts.iter()) {
                    let lambda = dir * (xi / t);
                    // d lambda = dir du / t; orientation: +ray carries +,
                    // -ray carries -
                    let weight = dir * (wi / t) * sign / two_pi_i;
                    nodes.push((lambda, weight));
                }
            }
        }
        // arc |lambda| = b from -phi to phi (counterclockwise through 0)
        let per = 2.0 * self.phi / self.arc_panels as f64;
        for k in 0..self.arc_panels {
            let a0 = -self.phi + per * k as f64;
            let (x, wts) = crate::quad::gl10_nodes(a0, a0 + per);
            for (alpha, wi) in x.iter().zip(wts.iter()) {
                let lambda = Complex64::from_polar(b, *alpha);
                let dl = Complex64::new(0.0, 1.0) * lambda; // d lambda/d alpha
                nodes.push((lambda, dl * *wi / two_pi_i));
            }
        }
        Ok(nodes)
    }
}

/// True if lambda lies in the proven resolvent region for this beta:
/// S_beta union (Sigma_{3 pi/4} intersect B_{e^{-1/(6 beta)}}(0)) for
/// beta > 0; anything off the closed negative real axis for beta = 0.
pub fn in_resolvent_region(lambda: Complex64, beta: f64) -> bool {
    if lambda.im == 0.0 && lambda.re <= 0.0 {
        return false;
    }
    if beta == 0.0 {
        return true;
    }
    let s_beta_margin = 12.0 * (1.0f64 / std::f64::consts::E).exp() * beta * beta
        * (-1.0 / (6.0 * beta)).exp();
    let in_s_beta = lambda.im.abs() > -lambda.re + s_beta_margin;
    let in_disk = lambda.norm() < (-1.0 / (6.0 * beta)).exp()
        && lambda.arg().abs() < 0.75 * std::f64::consts::PI;
    in_s_beta || in_disk
}

/// Grid able to host every solve of a contour at time t (and larger times).
pub fn contour_grid(
    spec: &ContourSpec,
    t_max: f64,
    beta: f64,
    support_end: f64,
    cfg: &SolverConfig,
) -> Result<Arc<RadialGrid>> {
    let b = spec.arc_radius(t_max, beta);
    // smallest decay rate over the contour: the arc point closest to the
    // imaginary axis, arg lambda = +-phi at |lambda| = b
    let rate_min = (b.sqrt() * (0.5 * spec.phi).cos()).abs();
    let sl = Complex64::new(rate_min, 0.0);
    cfg.grid_for(sl, support_end)
}

/// Evaluate e^{-tA} f for a single-mode divergence-free datum f given as a
/// body-force mode (the datum enters the resolvent as its right-hand side).
pub fn evolve(
    f: &ForceMode,
    beta: f64,
    n: i32,
    contour: &ContourSpec,
    t: f64,
    grid: &Arc<RadialGrid>,
    cfg: &SolverConfig,
) -> Result<ModeField> {
    let nodes = contour.nodes(t, beta)?;
    for (lambda, _) in &nodes {
        if !in_resolvent_region(*lambda, beta) {
            return Err(Error::ContourOutsideSector { lambda: *lambda });
        }
    }
    let contributions: Vec<Result<(Complex64, ModeField)>> = nodes
        .par_iter()
        .map(|&(lambda, weight)| {
            let q = ResolventQuery::new(lambda, beta, n)?;
            let sol = solve_body_force(&q, f, grid, cfg)?;
            let w = weight * (t * lambda).exp();
            Ok((w, sol.velocity))
        })
        .collect();
    let mut acc = ModeField::zeros(n, grid.clone());
    for c in contributions {
        let (w, v) = c?;
        acc.axpy(w, &v);
    }
    Ok(acc)
}

/// As [`evolve`] but verifies convergence by doubling the ray and arc panel
/// counts; errors if the L2 norm moves by more than 1e-6 relative.
pub fn evolve_checked(
    f: &ForceMode,
    beta: f64,
    n: i32,
    contour: &ContourSpec,
    t: f64,
    grid: &Arc<RadialGrid>,
    cfg: &SolverConfig,
) -> Result<ModeField> {
    let coarse = evolve(f, beta, n, contour, t, grid, cfg)?;
    let mut fine_spec = contour.clone();
    fine_spec.refine *= 2;
    fine_spec.arc_panels *= 2;
    let fine = evolve(f, beta, n, &fine_spec, t, grid, cfg)?;
    let mut diff = fine.clone();
    diff.axpy(Complex64::new(-1.0, 0.0), &coarse);
    let shift = diff.norm_l2() / fine.norm_l2().max(1e-300);
    if shift > 1e-6 {
        return Err(Error::ContourNotConverged { shift });
    }
    Ok(fine)
}

/// Decay data for one time: the L2 norm and the gradient norm of e^{-tA} f.
#[derive(Debug, Clone, serde::Serialize)]
pub struct DecayPoint {
    pub t: f64,
    pub l2_norm: f64,
    pub grad_norm: f64,
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct DecayFit {
    pub q: f64,
    pub slope_l2: f64,
    pub slope_grad: f64,
    pub expected_l2: f64,
    pub expected_grad: f64,
    pub points: Vec<DecayPoint>,
}

fn least_squares_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let mut num = 0.0;
    let mut den = 0.0;
    for (x, y) in xs.iter().zip(ys) {
        num += (x - mx) * (y - my);
        den += (x - mx) * (x - mx);
    }
    num / den
}

/// Fit the decay exponents of ||e^{-tA} f||_{L^2} and ||grad e^{-tA} f||_{L^2}
/// over the contour's time grid. `q` only sets the reported reference
/// exponents -(1/q - 1/2) and -1/q.
pub fn decay_fit(
    f: &ForceMode,
    beta: f64,
    n: i32,
    q: f64,
    contour: &ContourSpec,
    cfg: &SolverConfig,
) -> Result<DecayFit> {
    if contour.t_list.len() < 3 {
        return Err(Error::InvalidParameter("need at least 3 times".into()));
    }
    let t_min = contour.t_list.iter().cloned().fold(f64::INFINITY, f64::min);
    let t_max = contour.t_list.iter().cloned().fold(0.0f64, f64::max);
    if (t_max / t_min).log10() < 2.0 - 1e-9 {
        return Err(Error::InvalidParameter(
            "the time grid must span at least two decades".into(),
        ));
    }
    let grid = contour_grid(contour, t_max, beta, f.support_end(), cfg)?;
    let mut points = Vec::with_capacity(contour.t_list.len());
    for &t in &contour.t_list {
        let v = evolve(f, beta, n, contour, t, &grid, cfg)?;
        points.push(DecayPoint {
            t,
            l2_norm: v.norm_l2(),
            grad_norm: grad_energy(&v).max(0.0).sqrt(),
        });
    }
    let xs: Vec<f64> = points.iter().map(|p| p.t.ln()).collect();
    let ys_l2: Vec<f64> = points.iter().map(|p| p.l2_norm.ln()).collect();
    let ys_g: Vec<f64> = points.iter().map(|p| p.grad_norm.ln()).collect();
    Ok(DecayFit {
        q,
        slope_l2: least_squares_slope(&xs, &ys_l2),
        slope_grad: least_squares_slope(&xs, &ys_g),
        expected_l2: -(1.0 / q - 0.5),
        expected_grad: -1.0 / q,
        points,
    })
}

/// CSV rows `t,l2_norm,grad_norm`.
pub fn decay_csv(points: &[DecayPoint]) -> String {
    let mut out = String::from("t,l2_norm,grad_norm\n");
    for p in points {
        out.push_str(&format!("{:.17e},{:.17e},{:.17e}\n", p.t, p.l2_norm, p.grad_norm));
    }
    out
}

/// Divergence-free single-mode initial data built from a streamfunction
/// psi (v_r = i n psi / r, v_theta = -psi'), so div f = 0 exactly and the
/// normal trace vanishes when psi(1) = 0.
pub fn datum_from_stream(n: i32, psi: &SmoothFn) -> ForceMode {
    let i_n = Complex64::new(0.0, n as f64);
    let p = psi.clone();
    let fr = SmoothFn::new(
        {
            let p = p.clone();
            move |r| i_n * p.eval(r) / r
        },
        {
            let p = p.clone();
            move |r| i_n * (p.d1(r) / r - p.eval(r) / (r * r))
        },
        {
            let p = p.clone();
            move |r| i_n * (p.d2(r) / r - 2.0 * p.d1(r) / (r * r) + 2.0 * p.eval(r) / (r * r * r))
        },
        psi.support_end,
    );
    let ftheta = SmoothFn::new(
        {
            let p = p.clone();
            move |r| -p.d1(r)
        },
        {
            let p = p.clone();
            move |r| -p.d2(r)
        },
        {
            let p = p.clone();
            move |r| {
                // third derivative by differences of d2 (only residual paths use it)
                let h = 1e-5 * r.max(1.0);
                -(p.d2(r + h) - p.d2(r - h)) / (2.0 * h)
            }
        },
        psi.support_end,
    );
    ForceMode::Body { fr, ftheta }
}

/// A compactly-supported ring datum: psi = step((r-1)/0.4) * gaussian.
pub fn ring_datum(n: i32, center: f64, width: f64) -> ForceMode {
    let gauss = crate::force::RadialPreset::Gaussian { center, width }
        .smooth_fn(Complex64::new(1.0, 0.0));
    let window = window_from_one(0.4);
    let psi = product(&window, &gauss);
    datum_from_stream(n, &psi)
}

/// Slowly decaying datum psi ~ r^{1-a} (velocity ~ r^{-a}), windowed on near
/// r = 1 and off at r_cut: generic representative of L^q for q slightly
/// above 2/a.
pub fn power_tail_datum(n: i32, a: f64, r_cut: f64) -> ForceMode {
    let tail = crate::force::RadialPreset::PowerTail { exponent: a - 1.0, r_cut }
        .smooth_fn(Complex64::new(1.0, 0.0));
    datum_from_stream(n, &tail)
}

fn window_from_one(width: f64) -> SmoothFn {
    let w = width;
    SmoothFn::new(
        move |r| Complex64::new(step((r - 1.0) / w), 0.0),
        move |r| Complex64::new(step_d1((r - 1.0) / w) / w, 0.0),
        move |r| Complex64::new(step_d2((r - 1.0) / w) / (w * w), 0.0),
        f64::INFINITY,
    )
}

fn product(a: &SmoothFn, b: &SmoothFn) -> SmoothFn {
    let (a1, b1) = (a.clone(), b.clone());
    let (a2, b2) = (a.clone(), b.clone());
    let (a3, b3) = (a.clone(), b.clone());
    SmoothFn::new(
        move |r| a1.eval(r) * b1.eval(r),
        move |r| a2.d1(r) * b2.eval(r) + a2.eval(r) * b2.d1(r),
        move |r| a3.d2(r) * b3.eval(r) + 2.0 * a3.d1(r) * b3.d1(r) + a3.eval(r) * b3.d2(r),
        a.support_end.min(b.support_end),
    )
}

fn step(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else if x >= 1.0 {
        1.0
    } else {
        let x4 = x.powi(4);
        x4 * x * (126.0 + x * (-420.0 + x * (540.0 + x * (-315.0 + x * 70.0))))
    }
}
fn step_d1(x: f64) -> f64 {
    if !(0.0..1.0).contains(&x) {
        0.0
    } else {
        630.0 * x.powi(4) * (1.0 - x).powi(4)
    }
}
fn step_d2(x: f64) -> f64 {
    if !(0.0..1.0).contains(&x) {
        0.0
    } else {
        2520.0 * x.powi(3) * (1.0 - x).powi(3) * (1.0 - 2.0 * x)
    }
}

/// A sampled mode profile wrapped back into force data by local cubic
/// interpolation, for composing semigroup steps.
pub fn datum_from_field(v: &ModeField) -> ForceMode {
    let fr = interpolant(&v.vr);
    let ftheta = interpolant(&v.vtheta);
    ForceMode::Body { fr, ftheta }
}

fn interpolant(p: &RadialProfile) -> SmoothFn {
    let nodes: Arc<Vec<f64>> = Arc::new(p.grid.nodes.clone());
    let values: Arc<Vec<Complex64>> = Arc::new(p.values.clone());
    let r_max = p.grid.r_max();
    let eval = {
        let nodes = nodes.clone();
        let values = values.clone();
        move |r: f64| -> Complex64 {
            if r >= r_max {
                return *values.last().unwrap();
            }
            let i = nodes.partition_point(|&x| x <= r).max(1) - 1;
            let lo = i.saturating_sub(1).min(nodes.len() - 4);
            let xs = &nodes[lo..lo + 4];
            let ys = &values[lo..lo + 4];
            // cubic Lagrange
            let mut acc = Complex64::default();
            for j in 0..4 {
                let mut w = 1.0;
                for k in 0..4 {
                    if k != j {
                        w *= (r - xs[k]) / (xs[j] - xs[k]);
                    }
                }
                acc += ys[j] * w;
            }
            acc
        }
    };
    let e1 = eval.clone();
    let e2 = eval.clone();
    SmoothFn::new(
        eval,
        move |r| {
            let h = 1e-4 * r.max(1.0);
            (e1(r + h) - e1(r - h)) / (2.0 * h)
        },
        move |r| {
            let h = 1e-3 * r.max(1.0);
            (e2(r + h) - e2(r) * 2.0 + e2(r - h)) / (h * h)
        },
        r_max,
    )
}
