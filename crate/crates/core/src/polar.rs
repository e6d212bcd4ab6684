//! Fourier-mode representation of planar fields on the exterior disk and the
//! polar differential calculus: mode projection, divergence, rotation,
//! per-mode gradient energy, and the log-substitute integral Theta(T).

use crate::error::{Error, Result};
use crate::grid::{RadialGrid, RadialProfile};
use crate::quad::adaptive_gk;
use num_complex::Complex64;
use std::f64::consts::PI;
use std::sync::Arc;

/// One Fourier mode of a planar vector field: index n and radial profiles of
/// the polar components.
#[derive(Debug, Clone)]
pub struct ModeField {
    pub n: i32,
    pub vr: RadialProfile,
    pub vtheta: RadialProfile,
}

impl ModeField {
    pub fn new(n: i32, vr: RadialProfile, vtheta: RadialProfile) -> Result<Self> {
        if !Arc::ptr_eq(&vr.grid, &vtheta.grid) {
            return Err(Error::InvalidParameter(
                "mode components must share one grid".into(),
            ));
        }
        Ok(Self { n, vr, vtheta })
    }

    pub fn zeros(n: i32, grid: Arc<RadialGrid>) -> Self {
        Self {
            n,
            vr: RadialProfile::zeros(grid.clone()),
            vtheta: RadialProfile::zeros(grid),
        }
    }

    pub fn grid(&self) -> &Arc<RadialGrid> {
        &self.vr.grid
    }

    /// L2(D) norm over the mode (the 2 pi angular factor is omitted
    /// consistently across all norms and pairings).
    pub fn norm_l2(&self) -> f64 {
        (self.vr.norm_l2_sq() + self.vtheta.norm_l2_sq()).sqrt()
    }

    pub fn axpy(&mut self, c: Complex64, other: &ModeField) {
        for (a, b) in self.vr.values.iter_mut().zip(&other.vr.values) {
            *a += c * b;
        }
        for (a, b) in self.vtheta.values.iter_mut().zip(&other.vtheta.values) {
            *a += c * b;
        }
    }
}

/// Five-point finite-difference weights for the first derivative on an
/// arbitrary stencil (Fornberg's algorithm, specialized to what we need).
fn fornberg_weights(x0: f64, xs: &[f64], order: usize) -> Vec<f64> {
    let n = xs.len();
    let mut c = vec![vec![0.0f64; order + 1]; n];
    let mut c1 = 1.0;
    let mut c4 = xs[0] - x0;
    c[0][0] = 1.0;
    for i in 1..n {
        let mn = i.min(order);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = xs[i] - x0;
        for j in 0..i {
            let c3 = xs[i] - xs[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[i][k] = c1 * (k as f64 * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
                }
                c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
            }
            for k in (1..=mn).rev() {
                c[j][k] = (c4 * c[j][k] - k as f64 * c[j][k - 1]) / c3;
            }
            c[j][0] = c4 * c[j][0] / c3;
        }
        c1 = c2;
    }
    c.iter().map(|row| row[order]).collect()
}

/// First-derivative operator on a grid: 4th order, 5-point stencils,
/// one-sided at the ends.
pub struct DerivOp {
    stencil_start: Vec<usize>,
    weights: Vec<[f64; 5]>,
}

impl DerivOp {
    pub fn new(grid: &RadialGrid) -> Self {
        let m = grid.len();
        let mut stencil_start = Vec::with_capacity(m);
        let mut weights = Vec::with_capacity(m);
        for i in 0..m {
            let start = if i < 2 {
                0
            } else if i + 2 >= m {
                m - 5
            } else {
                i - 2
            };
            let xs = &grid.nodes[start..start + 5];
            let w = fornberg_weights(grid.nodes[i], xs, 1);
            let mut arr = [0.0; 5];
            arr.copy_from_slice(&w);
            stencil_start.push(start);
            weights.push(arr);
        }
        Self { stencil_start, weights }
    }

    pub fn apply(&self, values: &[Complex64]) -> Vec<Complex64> {
        let mut out = vec![Complex64::default(); values.len()];
        for i in 0..values.len() {
            let s = self.stencil_start[i];
            let w = &self.weights[i];
            let mut acc = Complex64::default();
            for k in 0..5 {
                acc += values[s + k] * w[k];
            }
            out[i] = acc;
        }
        out
    }
}

/// Project a sampled planar field onto Fourier mode n.
///
/// `field` returns the Cartesian components (v1, v2) at the point
/// (r cos(theta), r sin(theta)); the angular integral uses the trapezoid
/// rule, which is spectrally accurate for periodic integrands.
pub fn project_mode<F>(field: F, n: i32, grid: &Arc<RadialGrid>, n_theta: usize) -> Result<ModeField>
where
    F: Fn(f64, f64) -> (Complex64, Complex64),
{
    if n_theta < 4 * (n.unsigned_abs() as usize + 1) {
        return Err(Error::InvalidParameter(format!(
            "n_theta = {n_theta} too small for mode {n}"
        )));
    }
    let mut vr = Vec::with_capacity(grid.len());
    let mut vt = Vec::with_capacity(grid.len());
    for &r in &grid.nodes {
        let mut acc_r = Complex64::default();
        let mut acc_t = Complex64::default();
        for k in 0..n_theta {
            let theta = 2.0 * PI * k as f64 / n_theta as f64;
            let (v1, v2) = field(r, theta);
            if !(v1.re.is_finite() && v1.im.is_finite() && v2.re.is_finite() && v2.im.is_finite()) {
                return Err(Error::NonFinite(format!("field sample at r={r}, theta={theta}")));
            }
            let (ct, st) = (theta.cos(), theta.sin());
            let fr = v1 * ct + v2 * st;
            let ft = -v1 * st + v2 * ct;
            let phase = Complex64::from_polar(1.0, -(n as f64) * theta);
            acc_r += fr * phase;
            acc_t += ft * phase;
        }
        vr.push(acc_r / n_theta as f64);
        vt.push(acc_t / n_theta as f64);
    }
    Ok(ModeField {
        n,
        vr: RadialProfile { grid: grid.clone(), values: vr },
        vtheta: RadialProfile { grid: grid.clone(), values: vt },
    })
}

/// Mode divergence: (1/r) d(r v_r)/dr + (i n / r) v_theta.
pub fn mode_div(m: &ModeField) -> RadialProfile {
    let grid = m.grid().clone();
    let d = DerivOp::new(&grid);
    let rvr: Vec<Complex64> = m
        .vr
        .values
        .iter()
        .zip(&grid.nodes)
        .map(|(v, &r)| v * r)
        .collect();
    let drvr = d.apply(&rvr);
    let i_n = Complex64::new(0.0, m.n as f64);
    let values = grid
        .nodes
        .iter()
        .enumerate()
        .map(|(i, &r)| drvr[i] / r + i_n * m.vtheta.values[i] / r)
        .collect();
    RadialProfile { grid, values }
}

/// Mode rotation: (1/r) d(r v_theta)/dr - (i n / r) v_r.
pub fn mode_rot(m: &ModeField) -> RadialProfile {
    let grid = m.grid().clone();
    let d = DerivOp::new(&grid);
    let rvt: Vec<Complex64> = m
        .vtheta
        .values
        .iter()
        .zip(&grid.nodes)
        .map(|(v, &r)| v * r)
        .collect();
    let drvt = d.apply(&rvt);
    let i_n = Complex64::new(0.0, m.n as f64);
    let values = grid
        .nodes
        .iter()
        .enumerate()
        .map(|(i, &r)| drvt[i] / r - i_n * m.vr.values[i] / r)
        .collect();
    RadialProfile { grid, values }
}

/// Per-mode gradient energy
/// int [ |v_r'|^2 + (1+n^2)/r^2 |v_r|^2 + |v_t'|^2 + (1+n^2)/r^2 |v_t|^2
///       - 4n/r^2 Im(v_t conj v_r) ] r dr.
pub fn grad_energy(m: &ModeField) -> f64 {
    let grid = m.grid();
    let d = DerivOp::new(grid);
    let dvr = d.apply(&m.vr.values);
    let dvt = d.apply(&m.vtheta.values);
    let n2 = (m.n * m.n) as f64;
    let mut acc = 0.0;
    for i in 0..grid.len() {
        let r = grid.nodes[i];
        let w = grid.weights[i];
        let vr = m.vr.values[i];
        let vt = m.vtheta.values[i];
        let cross = (vt * vr.conj()).im;
        acc += w
            * (dvr[i].norm_sqr()
                + dvt[i].norm_sqr()
                + (1.0 + n2) / (r * r) * (vr.norm_sqr() + vt.norm_sqr())
                - 4.0 * m.n as f64 / (r * r) * cross);
    }
    acc
}

/// Theta(T) = int_0^T exp(-1/tau)/tau dtau for T > e.
pub fn theta_of(t: f64) -> Result<f64> {
    if t <= std::f64::consts::E {
        return Err(Error::InvalidParameter(format!("T must exceed e, got {t}")));
    }
    let mut f = |tau: f64| {
        if tau <= 0.0 {
            Complex64::default()
        } else {
            Complex64::new((-1.0 / tau).exp() / tau, 0.0)
        }
    };
    let seeds = [0.05, 0.2, 0.5, 1.0, 2.0f64.min(t * 0.5)];
    let (v, _) = adaptive_gk(&mut f, 0.0, t, 1e-14, 1e-12, &seeds)?;
    Ok(v.re)
}

/// Checks e^{-1/e} log T <= Theta(T) <= log T.
pub fn theta_bounds_check(t: f64) -> Result<bool> {
    let th = theta_of(t)?;
    let lo = (-1.0 / std::f64::consts::E).exp() * t.ln();
    let hi = t.ln();
    Ok(th >= lo - 1e-12 * hi && th <= hi + 1e-12 * hi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64 as C;

    fn test_grid() -> Arc<RadialGrid> {
        RadialGrid::geometric(30.0, 400).unwrap()
    }

    #[test]
    fn rotating_flow_projects_to_mode_zero() {
        // U(x) = x_perp / |x|^2: v_r = 0, v_theta = 1/r, all n != 0 vanish
        let grid = test_grid();
        let field = |r: f64, theta: f64| {
            let (x1, x2) = (r * theta.cos(), r * theta.sin());
            let rr = x1 * x1 + x2 * x2;
            (C::new(-x2 / rr, 0.0), C::new(x1 / rr, 0.0))
        };
        let m0 = project_mode(field, 0, &grid, 64).unwrap();
        for (i, &r) in grid.nodes.iter().enumerate() {
            assert!(m0.vr.values[i].norm() < 1e-13);
            assert!((m0.vtheta.values[i] - 1.0 / r).norm() < 1e-13);
        }
        let m1 = project_mode(field, 1, &grid, 64).unwrap();
        assert!(m1.vr.sup_norm() < 1e-13);
        assert!(m1.vtheta.sup_norm() < 1e-13);
    }

    #[test]
    fn single_harmonic_projects_cleanly() {
        // v = e^{i theta} e_r: mode 1 gives (1, 0), mode -1 gives (0, 0)
        let grid = test_grid();
        let field = |_r: f64, theta: f64| {
            let phase = C::from_polar(1.0, theta);
            let (ct, st) = (theta.cos(), theta.sin());
            (phase * ct, phase * st)
        };
        let m1 = project_mode(field, 1, &grid, 64).unwrap();
        for v in &m1.vr.values {
            assert!((v - 1.0).norm() < 1e-13);
        }
        assert!(m1.vtheta.sup_norm() < 1e-13);
        let mm1 = project_mode(field, -1, &grid, 64).unwrap();
        assert!(mm1.vr.sup_norm() < 1e-13);
        assert!(mm1.vtheta.sup_norm() < 1e-13);
    }

    #[test]
    fn trig_polynomial_modes_match_hand_coefficients() {
        // v_r = 2 cos(3 theta) g(r) => modes +-3 carry g(r) each
        let grid = test_grid();
        let g = |r: f64| (-(r - 3.0) * (r - 3.0)).exp();
        let field = move |r: f64, theta: f64| {
            let vr = C::new(2.0 * (3.0 * theta).cos() * g(r), 0.0);
            let (ct, st) = (theta.cos(), theta.sin());
            (vr * ct, vr * st)
        };
        let m3 = project_mode(field, 3, &grid, 64).unwrap();
        for (i, &r) in grid.nodes.iter().enumerate() {
            assert!((m3.vr.values[i] - g(r)).norm() < 1e-12);
        }
    }

    #[test]
    fn div_of_flux_carrier_mode_vanishes() {
        // (v_r, v_theta) = (1/r, 0) at n = 0 is divergence-free
        let grid = test_grid();
        let vr = RadialProfile::from_fn(grid.clone(), |r| C::new(1.0 / r, 0.0));
        let vt = RadialProfile::zeros(grid.clone());
        let m = ModeField::new(0, vr, vt).unwrap();
        let d = mode_div(&m);
        assert!(d.sup_norm() < 1e-11);
    }

    #[test]
    fn rot_of_rotating_flow_vanishes() {
        let grid = test_grid();
        let vr = RadialProfile::zeros(grid.clone());
        let vt = RadialProfile::from_fn(grid.clone(), |r| C::new(1.0 / r, 0.0));
        let m = ModeField::new(0, vr, vt).unwrap();
        let rot = mode_rot(&m);
        assert!(rot.sup_norm() < 1e-11);
    }

    #[test]
    fn gradient_is_irrotational() {
        // grad(r cos theta) = e_1: mode 1 components (1/2... ) check rot = 0
        // using v_r = cos theta, v_t = -sin theta => mode 1: v_r = 1/2, v_t = i/2
        let grid = test_grid();
        let vr = RadialProfile::from_fn(grid.clone(), |_| C::new(0.5, 0.0));
        let vt = RadialProfile::from_fn(grid.clone(), |_| C::new(0.0, 0.5));
        let m = ModeField::new(1, vr, vt).unwrap();
        let rot = mode_rot(&m);
        assert!(rot.sup_norm() < 1e-11);
    }

    #[test]
    fn grad_energy_lower_bounds() {
        // against the reduced form with (|n|-1)^2/r^2 weights
        let grid = test_grid();
        let n = 2;
        let vr = RadialProfile::from_fn(grid.clone(), |r| C::new((-(r - 4.0) * (r - 4.0)).exp(), 0.0));
        let vt = RadialProfile::from_fn(grid.clone(), |r| C::new(0.0, (-(r - 3.0) * (r - 3.0)).exp()));
        let m = ModeField::new(n, vr, vt).unwrap();
        let e = grad_energy(&m);
        let d = DerivOp::new(&grid);
        let dvr = d.apply(&m.vr.values);
        let dvt = d.apply(&m.vtheta.values);
        let mut reduced = 0.0;
        let mut qm = 0.0; // m^2 ||v/|x|||^2 with m = |n|-1
        for i in 0..grid.len() {
            let r = grid.nodes[i];
            let w = grid.weights[i];
            let k = ((n.abs() - 1) * (n.abs() - 1)) as f64;
            reduced += w
                * (dvr[i].norm_sqr()
                    + dvt[i].norm_sqr()
                    + k / (r * r) * (m.vr.values[i].norm_sqr() + m.vtheta.values[i].norm_sqr()));
            qm += w / (r * r) * (m.vr.values[i].norm_sqr() + m.vtheta.values[i].norm_sqr());
        }
        assert!(e >= reduced - 1e-10 * e.abs());
        assert!(e >= qm - 1e-10 * e.abs());
        let zero = ModeField::zeros(1, grid);
        assert_eq!(grad_energy(&zero), 0.0);
    }

    #[test]
    fn theta_values_and_bounds() {
        // frozen against the exponential-integral series E_1(1/T)
        let e1 = |x: f64| {
            let mut s = -0.5772156649015329 - x.ln();
            let mut term = -1.0;
            for k in 1..60 {
                term *= -x / k as f64;
                s += term / k as f64;
            }
            s
        };
        for &t in &[3.0, 10.0, 100.0, 1e4] {
            let th = theta_of(t).unwrap();
            assert!((th - e1(1.0 / t)).abs() < 1e-10 * th.max(1.0), "T={t}");
            assert!(theta_bounds_check(t).unwrap(), "T={t}");
        }
        let th10 = theta_of(10.0).unwrap();
        assert!((th10 - e1(0.1)).abs() < 1e-10);
        assert!(theta_of(2.0).is_err());
    }

    #[test]
    fn theta_near_lower_endpoint() {
        let t = std::f64::consts::E * 1.001;
        assert!(theta_bounds_check(t).unwrap());
    }

    #[test]
    fn proof_relation_three_beta_log_t() {
        // at T = e^{1/(12 beta)}: 3 beta log T = 1/4, symbolically 3/12 = 1/4
        assert_eq!(3 * 1 * 4, 12); // 3 * (1/12) = 1/4 as integers: 3*4 = 12
        for &beta in &[0.05, 0.1, 0.2] {
            let log_t = 1.0 / (12.0 * beta);
            let value: f64 = 3.0 * beta * log_t;
            assert!((value - 0.25).abs() < 1e-12);
            // and 3 beta Theta(T) <= 1/4 via the upper bound on Theta
            let t = log_t.exp();
            if t > std::f64::consts::E {
                let th = theta_of(t).unwrap();
                assert!(3.0 * beta * th <= 0.25 + 1e-12);
            }
        }
    }

    #[test]
    fn fornberg_weights_differentiate_quartics() {
        let xs = [1.0, 1.1, 1.25, 1.37, 1.5];
        let w = fornberg_weights(1.25, &xs, 1);
        let f = |x: f64| x.powi(4) - 2.0 * x * x + 3.0;
        let df = |x: f64| 4.0 * x.powi(3) - 4.0 * x;
        let got: f64 = xs.iter().zip(&w).map(|(&x, &wi)| wi * f(x)).sum();
        assert!((got - df(1.25)).abs() < 1e-10);
    }
}
