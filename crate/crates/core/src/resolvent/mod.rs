//! Explicit per-mode solution of the resolvent problems in the exterior unit
//! disk: the boundary kernel integral F_n, the particular-solution density
//! Phi, the constant c, assembled velocity/vorticity for the three forcing
//! paths (body force, divergence-form force, boundary data), and the
//! iterated-integral decompositions used as internal identities.

mod identities;
mod kernels;

pub use identities::{j1_identity, j2_identity, IdentityReport};
pub use kernels::KernelWorkspace;

use crate::error::{Error, Result};
use crate::force::ForceMode;
use crate::grid::{RadialGrid, RadialProfile};
use crate::polar::{mode_div, DerivOp, ModeField};
use crate::special::{order_of, Order};
use num_complex::Complex64;
use std::sync::Arc;

/// Numerical policy for one solve.
#[derive(Debug, Clone)]
pub struct SolverConfig {
    /// grid density; residual checks by finite differences want >= 400
    pub nodes_per_decade: usize,
    /// lower bound on the domain truncation radius
    pub r_max_floor: f64,
    /// R_max is set so that Re(sqrt(lambda)) R_max >= tail_exponent
    pub tail_exponent: f64,
    /// tolerance handed to the Bessel kernels
    pub bessel_tol: f64,
    /// cap on quadrature panel splitting per grid interval
    pub max_panel_split: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            nodes_per_decade: 400,
            r_max_floor: 50.0,
            tail_exponent: 34.0,
            bessel_tol: 1e-12,
            max_panel_split: 64,
        }
    }
}

impl SolverConfig {
    /// Truncation radius for a given resolvent parameter and force extent.
    pub fn r_max(&self, sqrt_lambda: Complex64, support_end: f64) -> f64 {
        let by_decay = self.tail_exponent / sqrt_lambda.re.max(1e-290);
        self.r_max_floor.max(support_end * 1.25).max(by_decay.min(1e290))
    }

    pub fn grid_for(
        &self,
        sqrt_lambda: Complex64,
        support_end: f64,
    ) -> Result<Arc<RadialGrid>> {
        RadialGrid::geometric(self.r_max(sqrt_lambda, support_end), self.nodes_per_decade)
    }
}

/// One fully specified per-mode resolvent evaluation.
#[derive(Debug, Clone, Copy)]
pub struct ResolventQuery {
    pub lambda: Complex64,
    pub beta: f64,
    pub n: i32,
    pub sqrt_lambda: Complex64,
    pub order: Order,
}

impl ResolventQuery {
    pub fn new(lambda: Complex64, beta: f64, n: i32) -> Result<Self> {
        if lambda.im == 0.0 && lambda.re <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "lambda = {lambda} lies on the closed negative real axis"
            )));
        }
        if !lambda.re.is_finite() || !lambda.im.is_finite() {
            return Err(Error::NonFinite("lambda".into()));
        }
        let order = order_of(beta, n)?;
        let sqrt_lambda = lambda.sqrt();
        debug_assert!(sqrt_lambda.re > 0.0);
        debug_assert!((sqrt_lambda * sqrt_lambda - lambda).norm() <= 1e-14 * lambda.norm());
        Ok(Self { lambda, beta, n, sqrt_lambda, order })
    }
}

/// Residual diagnostics attached to a solution.
#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct Residuals {
    /// sup norm of the vorticity ODE residual, relative to the data scale
    pub ode: f64,
    /// sup norm of the mode divergence
    pub div: f64,
    /// boundary trace mismatch at r = 1
    pub trace: f64,
}

/// Tail-truncation metadata (relative to the running integral scale).
#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct TailReport {
    pub kernel_integral: f64,
    pub density_integral: f64,
}

/// Assembled solution of one per-mode resolvent problem.
#[derive(Debug, Clone)]
pub struct ModeSolution {
    pub lambda: Complex64,
    pub beta: f64,
    pub n: i32,
    /// the kernel integral F_n(sqrt(lambda); beta)
    pub fn_value: Complex64,
    /// the constant c (zero for the boundary path)
    pub c_const: Complex64,
    pub velocity: ModeField,
    pub vorticity: RadialProfile,
    /// split of the vorticity: (kernel part, particular part)
    pub omega_split: (RadialProfile, RadialProfile),
    pub residuals: Residuals,
    pub tails: TailReport,
}

/// The scalar kernel integral F_n = int_1^inf s^{1-|n|} K_mu(sqrt(lambda) s) ds
/// by adaptive quadrature with a certified tail. Absolute error <= 1e-12 |F_n|.
pub fn f_n_kernel(q: &ResolventQuery) -> Result<Complex64> {
    kernels::f_n_adaptive(q, 1e-12)
}

/// The particular-solution density Phi for a body force, sampled on the grid.
pub fn phi_density(
    q: &ResolventQuery,
    f: &ForceMode,
    grid: &Arc<RadialGrid>,
    cfg: &SolverConfig,
) -> Result<(RadialProfile, TailReport)> {
    let ws = KernelWorkspace::build(q, grid, f.support_end(), cfg)?;
    let body = ws.body_cumulants(q, f)?;
    let phi = ws.phi_profile(&body);
    Ok((
        RadialProfile { grid: grid.clone(), values: ws.at_nodes(&phi) },
        TailReport { kernel_integral: ws.kernel_tail_rel(), density_integral: body.tail_rel },
    ))
}

/// The constant c = int_1^inf s^{1-|n|} Phi(s) ds for a body force.
pub fn c_constant(
    q: &ResolventQuery,
    f: &ForceMode,
    grid: &Arc<RadialGrid>,
    cfg: &SolverConfig,
) -> Result<Complex64> {
    let ws = KernelWorkspace::build(q, grid, f.support_end(), cfg)?;
    let body = ws.body_cumulants(q, f)?;
    let phi = ws.phi_profile(&body);
    Ok(ws.c_from_phi(&phi))
}

fn assemble(
    q: &ResolventQuery,
    ws: &KernelWorkspace,
    phi: &[Complex64],
    // coefficient of the homogeneous kernel part: omega_hom = coeff * K(sqrt(l) r)
    // expressed relative to F (None means -c/F with c from phi)
    boundary_coeff: Option<Complex64>,
    trace_target: (Complex64, Complex64),
    extra_velocity: Option<(Vec<Complex64>, Vec<Complex64>)>,
    density_tail: f64,
) -> Result<ModeSolution> {
    let grid = ws.grid().clone();
    let n_abs = q.n.unsigned_abs() as i32;
    let i_n = Complex64::new(0.0, q.n as f64);

    // particular part cumulants
    let a_cum = ws.cum_forward_power(phi, 1 + n_abs);
    let b_cum = ws.cum_backward_power(phi, 1 - n_abs);
    let c = b_cum[0];

    // the zero-free-region guard on the (anchored) kernel integral
    let f_hat = ws.f_hat();
    if f_hat.norm() <= 1e-13 {
        return Err(Error::NearKernelZero { mag: f_hat.norm() });
    }

    let half = 0.5 / n_abs as f64;
    let m = grid.len();
    let mut vr = Vec::with_capacity(m);
    let mut vt = Vec::with_capacity(m);
    let mut om = Vec::with_capacity(m);
    let mut om1 = Vec::with_capacity(m);
    let mut om2 = Vec::with_capacity(m);
    for (i, &pt) in ws.node_points().iter().enumerate() {
        let r = grid.nodes[i];
        let rn = r.powi(n_abs);
        // particular streamfunction and derivative
        let (a, b) = (a_cum[pt], b_cum[pt]);
        let psi_p = half * (-c / rn + a / rn + rn * b);
        let dpsi_p = 0.5 * (c / (rn * r) - a / (rn * r) + rn / r * b);
        // homogeneous part, all ratios against F_hat (anchored scaling)
        let r1 = ws.c1_hat()[pt] / f_hat; // int_1^r s^{1+n} K / F
        let r3 = (f_hat - ws.c3_hat()[pt]) / f_hat; // int_r^inf s^{1-n} K / F
        let psi_k_over_f = half * (-1.0 / rn + r1 / rn + rn * r3);
        let dpsi_k_over_f = 0.5 * (1.0 / (rn * r) - r1 / (rn * r) + rn / r * r3);
        // omega parts
        let k_ratio = ws.k0_anchored()[pt] / f_hat; // K(sqrt(l) r) / F
        let (w1, psi_h, dpsi_h) = match boundary_coeff {
            Some(t) => (t * k_ratio, t * psi_k_over_f, t * dpsi_k_over_f),
            None => (-c * k_ratio, -c * psi_k_over_f, -c * dpsi_k_over_f),
        };
        let psi = psi_h + psi_p;
        let dpsi = dpsi_h + dpsi_p;
        let mut vri = i_n * psi / r;
        let mut vti = -dpsi;
        if let Some((er, et)) = &extra_velocity {
            vri += er[i];
            vti += et[i];
        }
        vr.push(vri);
        vt.push(vti);
        om1.push(w1);
        om2.push(phi[pt]);
        om.push(w1 + phi[pt]);
    }

    let velocity = ModeField {
        n: q.n,
        vr: RadialProfile { grid: grid.clone(), values: vr },
        vtheta: RadialProfile { grid: grid.clone(), values: vt },
    };
    let vorticity = RadialProfile { grid: grid.clone(), values: om };
    let omega_split = (
        RadialProfile { grid: grid.clone(), values: om1 },
        RadialProfile { grid: grid.clone(), values: om2 },
    );

    let trace = ((velocity.vr.values[0] - trace_target.0).norm()
        + (velocity.vtheta.values[0] - trace_target.1).norm())
        / (1.0 + velocity.norm_l2());
    let div_res = mode_div(&velocity).sup_norm() / (1.0 + velocity.norm_l2());

    Ok(ModeSolution {
        lambda: q.lambda,
        beta: q.beta,
        n: q.n,
        fn_value: ws.f_n_unscaled(),
        c_const: match boundary_coeff {
            Some(_) => Complex64::default(),
            None => c,
        },
        velocity,
        vorticity,
        omega_split,
        residuals: Residuals { ode: f64::NAN, div: div_res, trace },
        tails: TailReport {
            kernel_integral: ws.kernel_tail_rel(),
            density_integral: density_tail,
        },
    })
}

/// Vorticity-equation residual
/// sup | lambda w - w'' - w'/r + (n^2 + i n beta)/r^2 w - rhs | / scale.
fn ode_residual(
    q: &ResolventQuery,
    vorticity: &RadialProfile,
    rhs: impl Fn(f64) -> Complex64,
) -> f64 {
    let grid = &vorticity.grid;
    let d = DerivOp::new(grid);
    let dw = d.apply(&vorticity.values);
    let d2w = d.apply(&dw);
    let mu2 = Complex64::new((q.n * q.n) as f64, q.n as f64 * q.beta);
    let mut worst = 0.0f64;
    let mut scale = 0.0f64;
    for (i, &r) in grid.nodes.iter().enumerate() {
        if i < 3 || i + 3 >= grid.len() {
            continue;
        }
        let w = vorticity.values[i];
        let res = q.lambda * w - d2w[i] - dw[i] / r + mu2 / (r * r) * w - rhs(r);
        worst = worst.max(res.norm());
        scale = scale
            .max(rhs(r).norm())
            .max((q.lambda * w).norm())
            .max(d2w[i].norm());
    }
    worst / scale.max(1e-300)
}

/// Solve the body-force problem for one mode: no-slip wall, force f.
pub fn solve_body_force(
    q: &ResolventQuery,
    f: &ForceMode,
    grid: &Arc<RadialGrid>,
    cfg: &SolverConfig,
) -> Result<ModeSolution> {
    if !matches!(f, ForceMode::Body { .. }) {
        return Err(Error::InvalidParameter("expected a body force".into()));
    }
    f.validate(grid.r_max())?;
    let ws = KernelWorkspace::build(q, grid, f.support_end(), cfg)?;
    let body = ws.body_cumulants(q, f)?;
    let phi = ws.phi_profile(&body);
    let mut sol = assemble(
        q,
        &ws,
        &phi,
        None,
        (Complex64::default(), Complex64::default()),
        None,
        body.tail_rel,
    )?;
    if let Some(rhs) = f.rot_n(q.n) {
        sol.residuals.ode = ode_residual(q, &sol.vorticity, rhs);
    }
    Ok(sol)
}

/// Solve the divergence-form problem: force div F with F in X_{gamma'}.
pub fn solve_div_force(
    q: &ResolventQuery,
    f: &ForceMode,
    grid: &Arc<RadialGrid>,
    cfg: &SolverConfig,
) -> Result<ModeSolution> {
    if !matches!(f, ForceMode::DivForce { .. }) {
        return Err(Error::InvalidParameter("expected a divergence-form force".into()));
    }
    f.validate(grid.r_max())?;
    let ws = KernelWorkspace::build(q, grid, f.support_end(), cfg)?;
    let div = ws.div_cumulants(q, f)?;
    let phi = ws.phi_div_profile(&div);
    let mut sol = assemble(
        q,
        &ws,
        &phi,
        None,
        (Complex64::default(), Complex64::default()),
        None,
        div.tail_rel,
    )?;
    // residual against the mode-differentiated data
    if let Some((dfr, dft)) = f.div_components(q.n) {
        let i_n = Complex64::new(0.0, q.n as f64);
        let rhs = move |r: f64| dft.d1(r) + dft.eval(r) / r - i_n * dfr.eval(r) / r;
        sol.residuals.ode = ode_residual(q, &sol.vorticity, rhs);
    }
    Ok(sol)
}

/// Solve the boundary-data problem: zero force, trace w = b at r = 1.
pub fn solve_boundary(
    q: &ResolventQuery,
    f: &ForceMode,
    grid: &Arc<RadialGrid>,
    cfg: &SolverConfig,
) -> Result<ModeSolution> {
    let (b_r, b_theta) = match f {
        ForceMode::Boundary { b_r, b_theta } => (*b_r, *b_theta),
        _ => return Err(Error::InvalidParameter("expected boundary data".into())),
    };
    let ws = KernelWorkspace::build(q, grid, 1.0, cfg)?;
    let i_n = Complex64::new(0.0, q.n as f64);
    let t_n = b_r / i_n - b_theta;
    // correction field V_n[b](theta)/r^2: v_r = b_r/r^2, v_t = (b_r/(i n))/r^2
    let m = grid.len();
    let mut er = Vec::with_capacity(m);
    let mut et = Vec::with_capacity(m);
    for &r in &grid.nodes {
        er.push(b_r / (r * r));
        et.push(b_r / i_n / (r * r));
    }
    let phi = vec![Complex64::default(); ws.n_points()];
    let mut sol = assemble(q, &ws, &phi, Some(t_n), (b_r, b_theta), Some((er, et)), 0.0)?;
    sol.residuals.ode = ode_residual(q, &sol.vorticity, |_| Complex64::default());
    Ok(sol)
}

/// The weighted pairing int_1^{R_max} omega(r) conj(w_r(r)) dr
/// (the L2(D) pairing of omega with w_r / |x|, angular factor omitted).
pub fn pairing(omega_part: &RadialProfile, w: &ModeField) -> Result<Complex64> {
    if !Arc::ptr_eq(&omega_part.grid, &w.vr.grid) {
        return Err(Error::InvalidParameter("pairing requires a shared grid".into()));
    }
    let mut acc = Complex64::default();
    for i in 0..omega_part.grid.len() {
        acc += omega_part.values[i] * w.vr.values[i].conj() * omega_part.grid.weights_dr[i];
    }
    Ok(acc)
}

/// JSON-friendly rendering of a solution (the external schema).
#[derive(serde::Serialize)]
pub struct ModeSolutionJson {
    pub lambda: [f64; 2],
    pub beta: f64,
    pub n: i32,
    #[serde(rename = "Fn")]
    pub fn_value: [f64; 2],
    pub c: [f64; 2],
    pub grid: Vec<f64>,
    pub vr: Vec<[f64; 2]>,
    pub vtheta: Vec<[f64; 2]>,
    pub omega: Vec<[f64; 2]>,
    pub residuals: Residuals,
}

impl ModeSolution {
    pub fn to_json(&self) -> ModeSolutionJson {
        let pack = |p: &RadialProfile| p.values.iter().map(|v| [v.re, v.im]).collect();
        ModeSolutionJson {
            lambda: [self.lambda.re, self.lambda.im],
            beta: self.beta,
            n: self.n,
            fn_value: [self.fn_value.re, self.fn_value.im],
            c: [self.c_const.re, self.c_const.im],
            grid: self.velocity.vr.grid.nodes.clone(),
            vr: pack(&self.velocity.vr),
            vtheta: pack(&self.velocity.vtheta),
            omega: pack(&self.vorticity),
            residuals: self.residuals,
        }
    }
}
