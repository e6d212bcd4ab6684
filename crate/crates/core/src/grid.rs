//! Radial grids on [1, R_max], sampled profiles, and the Clenshaw-Curtis
//! panel mesh used for cumulative quadrature of the kernel integrals.

use crate::error::{Error, Result};
use crate::quad::{cc_ref_nodes, cheb_antiderivative, cheb_coeffs, cheb_eval_series, CC_ORDER};
use num_complex::Complex64;
use std::sync::Arc;

/// Geometrically graded radial grid with quadrature weights for
/// integrals of the form `int_1^{R_max} f(r) r dr`.
#[derive(Debug, Clone)]
pub struct RadialGrid {
    pub nodes: Vec<f64>,
    /// weights for int f(r) r dr (trapezoid in r, times r)
    pub weights: Vec<f64>,
    /// weights for int f(r) dr
    pub weights_dr: Vec<f64>,
}

impl RadialGrid {
    /// Geometric grid from r = 1 to `r_max` with about `nodes_per_decade`
    /// nodes per decade.
    pub fn geometric(r_max: f64, nodes_per_decade: usize) -> Result<Arc<Self>> {
        if r_max <= 1.0 || !r_max.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "r_max must exceed 1, got {r_max}"
            )));
        }
        if nodes_per_decade < 4 {
            return Err(Error::InvalidParameter(
                "nodes_per_decade must be at least 4".into(),
            ));
        }
        let decades = r_max.log10();
        let m = ((decades * nodes_per_decade as f64).ceil() as usize).max(8);
        let ratio = r_max.powf(1.0 / m as f64);
        let mut nodes = Vec::with_capacity(m + 1);
        let mut r = 1.0f64;
        for _ in 0..m {
            nodes.push(r);
            r *= ratio;
        }
        nodes.push(r_max);
        Ok(Arc::new(Self::from_nodes(nodes)))
    }

    pub fn from_nodes(nodes: Vec<f64>) -> Self {
        let m = nodes.len();
        let mut weights_dr = vec![0.0; m];
        for i in 0..m {
            let left = if i == 0 { nodes[0] } else { nodes[i - 1] };
            let right = if i == m - 1 { nodes[m - 1] } else { nodes[i + 1] };
            weights_dr[i] = 0.5 * (right - left);
        }
        let weights = nodes
            .iter()
            .zip(&weights_dr)
            .map(|(r, w)| r * w)
            .collect();
        Self { nodes, weights, weights_dr }
    }

    pub fn r_max(&self) -> f64 {
        *self.nodes.last().unwrap()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

/// A complex-valued radial profile sampled on a shared grid.
#[derive(Debug, Clone)]
pub struct RadialProfile {
    pub grid: Arc<RadialGrid>,
    pub values: Vec<Complex64>,
}

impl RadialProfile {
    pub fn new(grid: Arc<RadialGrid>, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::InvalidParameter(format!(
                "profile has {} values for a grid of {} nodes",
                values.len(),
                grid.len()
            )));
        }
        if values.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(Error::NonFinite("profile value".into()));
        }
        Ok(Self { grid, values })
    }

    pub fn zeros(grid: Arc<RadialGrid>) -> Self {
        let n = grid.len();
        Self { grid, values: vec![Complex64::default(); n] }
    }

    pub fn from_fn<F: Fn(f64) -> Complex64>(grid: Arc<RadialGrid>, f: F) -> Self {
        let values = grid.nodes.iter().map(|&r| f(r)).collect();
        Self { grid, values }
    }

    /// int |f|^2 r dr over the grid.
    pub fn norm_l2_sq(&self) -> f64 {
        self.values
            .iter()
            .zip(&self.grid.weights)
            .map(|(v, w)| v.norm_sqr() * w)
            .sum()
    }

    /// Supremum of |f| over the nodes.
    pub fn sup_norm(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// CSV rows `r,re,im`, one per node, with header.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("r,re,im\n");
        for (r, v) in self.grid.nodes.iter().zip(&self.values) {
            out.push_str(&format!("{r:.17e},{:.17e},{:.17e}\n", v.re, v.im));
        }
        out
    }
}

/// One Clenshaw-Curtis panel of the quadrature mesh.
#[derive(Debug, Clone)]
pub struct Panel {
    pub a: f64,
    pub b: f64,
    /// index of the first of the CC_ORDER points of this panel
    pub first: usize,
}

/// Partition of [1, R_max] subordinate to a radial grid, each panel carrying
/// Clenshaw-Curtis points. Grid intervals are split where the kernel phase
/// or decay rate per panel would otherwise be too large; panels are tagged
/// `active` where integrands may be nonzero (inside the force support or the
/// kernel-decay window), so that decay-weighted cumulants can skip the rest.
#[derive(Debug, Clone)]
pub struct PanelMesh {
    pub panels: Vec<Panel>,
    pub points: Vec<f64>,
    /// for each grid node, the index of the mesh point sitting on it
    pub node_point: Vec<usize>,
    pub grid: Arc<RadialGrid>,
}

impl PanelMesh {
    /// Build the mesh for kernel arguments `sqrt_lambda * r`. `active_r` is
    /// the radius beyond which force-type integrands are guaranteed zero.
    pub fn build(
        grid: &Arc<RadialGrid>,
        sqrt_lambda: Complex64,
        active_r: f64,
        max_split: usize,
    ) -> Self {
        let rate = sqrt_lambda.re.max(0.0);
        let osc = sqrt_lambda.im.abs();
        let ref_nodes = cc_ref_nodes();
        let mut panels = Vec::new();
        let mut points = Vec::new();
        let mut node_point = Vec::with_capacity(grid.len());
        for i in 0..grid.len() - 1 {
            let (ra, rb) = (grid.nodes[i], grid.nodes[i + 1]);
            node_point.push(points.len());
            let h = rb - ra;
            let kernel_zone = rate * ra <= 50.0;
            let force_zone = ra <= active_r;
            let n_split = if kernel_zone || force_zone {
                let by_decay = rate * h / 15.0;
                let by_phase = osc * h / 5.0;
                (by_decay.max(by_phase).ceil() as usize).clamp(1, max_split)
            } else {
                1
            };
            let step = h / n_split as f64;
            for k in 0..n_split {
                let a = ra + step * k as f64;
                let b = if k == n_split - 1 { rb } else { ra + step * (k + 1) as f64 };
                let first = points.len();
                let mid = 0.5 * (a + b);
                let half = 0.5 * (b - a);
                for &xi in &ref_nodes {
                    points.push(mid + half * xi);
                }
                panels.push(Panel { a, b, first });
            }
        }
        node_point.push(points.len() - 1);
        Self { panels, points, node_point, grid: grid.clone() }
    }

    pub fn n_points(&self) -> usize {
        self.points.len()
    }

    /// Evaluate a scalar function at every mesh point.
    pub fn sample<F: Fn(f64) -> Complex64>(&self, f: F) -> Vec<Complex64> {
        self.points.iter().map(|&r| f(r)).collect()
    }

    /// Extract the values sitting on the grid nodes.
    pub fn at_nodes(&self, vals: &[Complex64]) -> Vec<Complex64> {
        self.node_point.iter().map(|&i| vals[i]).collect()
    }

    fn panel_cumulative(
        &self,
        panel: &Panel,
        vals: &[Complex64],
    ) -> ([Complex64; CC_ORDER], Complex64) {
        let half = 0.5 * (panel.b - panel.a);
        let mut pv = [Complex64::default(); CC_ORDER];
        pv.copy_from_slice(&vals[panel.first..panel.first + CC_ORDER]);
        let coeffs = cheb_coeffs(&pv);
        let anti = cheb_antiderivative(&coeffs);
        let ref_nodes = cc_ref_nodes();
        let mut cum = [Complex64::default(); CC_ORDER];
        for (j, &xi) in ref_nodes.iter().enumerate() {
            cum[j] = cheb_eval_series(&anti, xi) * half;
        }
        (cum, cum[CC_ORDER - 1])
    }

    /// Cumulative integral from r = 1: out[j] = int_1^{points[j]} v.
    pub fn cum_forward(&self, vals: &[Complex64]) -> Vec<Complex64> {
        let mut out = vec![Complex64::default(); vals.len()];
        let mut running = Complex64::default();
        for p in &self.panels {
            let (cum, total) = self.panel_cumulative(p, vals);
            for (j, c) in cum.iter().enumerate() {
                out[p.first + j] = running + c;
            }
            running += total;
        }
        out
    }

    /// Cumulative integral to R_max: out[j] = int_{points[j]}^{R_max} v.
    pub fn cum_backward(&self, vals: &[Complex64]) -> Vec<Complex64> {
        let mut out = vec![Complex64::default(); vals.len()];
        let mut running = Complex64::default();
        for p in self.panels.iter().rev() {
            let (cum, total) = self.panel_cumulative(p, vals);
            for (j, c) in cum.iter().enumerate() {
                out[p.first + j] = running + (total - c);
            }
            running += total;
        }
        out
    }

    /// Decay-weighted forward cumulant
    /// `out(t) = int_1^t w(s) exp(rate (s - t)) ds` with `rate >= 0`.
    ///
    /// Panels whose values are all zero propagate by pure decay, so `w` must
    /// vanish outside the mesh's active region (force support). Inside it the
    /// mesh construction keeps `rate * panel width` bounded.
    pub fn cum_forward_decay(&self, vals: &[Complex64], rate: f64) -> Vec<Complex64> {
        let mut out = vec![Complex64::default(); vals.len()];
        let ref_nodes = cc_ref_nodes();
        let mut carry = Complex64::default(); // value at panel start a
        for p in &self.panels {
            let half = 0.5 * (p.b - p.a);
            let slice = &vals[p.first..p.first + CC_ORDER];
            let all_zero = slice.iter().all(|v| v.norm() == 0.0);
            if all_zero {
                for (j, &xi) in ref_nodes.iter().enumerate() {
                    let t = 0.5 * (p.a + p.b) + half * xi;
                    out[p.first + j] = carry * (rate * (p.a - t)).exp();
                }
                carry *= (rate * (p.a - p.b)).exp();
                continue;
            }
            // local integrand anchored at the panel top: y(s) = w(s) e^{rate (s - b)}
            let mut y = [Complex64::default(); CC_ORDER];
            for (j, &xi) in ref_nodes.iter().enumerate() {
                let s = 0.5 * (p.a + p.b) + half * xi;
                y[j] = slice[j] * (rate * (s - p.b)).exp();
            }
            let coeffs = cheb_coeffs(&y);
            let anti = cheb_antiderivative(&coeffs);
            for (j, &xi) in ref_nodes.iter().enumerate() {
                let t = 0.5 * (p.a + p.b) + half * xi;
                let local = cheb_eval_series(&anti, xi) * half;
                out[p.first + j] =
                    carry * (rate * (p.a - t)).exp() + local * (rate * (p.b - t)).exp();
            }
            carry = out[p.first + CC_ORDER - 1];
        }
        out
    }

    /// Decay-weighted backward cumulant
    /// `out(t) = int_t^{R_max} w(s) exp(rate (t - s)) ds` with `rate >= 0`.
    pub fn cum_backward_decay(&self, vals: &[Complex64], rate: f64) -> Vec<Complex64> {
        let mut out = vec![Complex64::default(); vals.len()];
        let ref_nodes = cc_ref_nodes();
        let mut carry = Complex64::default(); // value at panel end b
        for p in self.panels.iter().rev() {
            let half = 0.5 * (p.b - p.a);
            let slice = &vals[p.first..p.first + CC_ORDER];
            let all_zero = slice.iter().all(|v| v.norm() == 0.0);
            if all_zero {
                for (j, &xi) in ref_nodes.iter().enumerate() {
                    let t = 0.5 * (p.a + p.b) + half * xi;
                    out[p.first + j] = carry * (rate * (t - p.b)).exp();
                }
                carry *= (rate * (p.a - p.b)).exp();
                continue;
            }
            // anchored at the panel bottom: y(s) = w(s) e^{rate (a - s)}
            let mut y = [Complex64::default(); CC_ORDER];
            for (j, &xi) in ref_nodes.iter().enumerate() {
                let s = 0.5 * (p.a + p.b) + half * xi;
                y[j] = slice[j] * (rate * (p.a - s)).exp();
            }
            let coeffs = cheb_coeffs(&y);
            let anti = cheb_antiderivative(&coeffs);
            let total = cheb_eval_series(&anti, 1.0) * half;
            for (j, &xi) in ref_nodes.iter().enumerate() {
                let t = 0.5 * (p.a + p.b) + half * xi;
                let local = cheb_eval_series(&anti, xi) * half;
                out[p.first + j] =
                    carry * (rate * (t - p.b)).exp() + (total - local) * (rate * (t - p.a)).exp();
            }
            carry = out[p.first];
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64 as C;

    #[test]
    fn grid_weights_reproduce_r_dr() {
        let g = RadialGrid::geometric(50.0, 64).unwrap();
        let total: f64 = g.weights.iter().sum();
        let exact = 0.5 * (50.0f64 * 50.0 - 1.0);
        assert!((total - exact).abs() <= 1e-12 * exact);
        assert!(g.nodes.windows(2).all(|w| w[1] > w[0]));
        assert!(g.weights.iter().all(|&w| w > 0.0));
    }

    #[test]
    fn mesh_cum_forward_matches_closed_form() {
        let g = RadialGrid::geometric(20.0, 48).unwrap();
        let mesh = PanelMesh::build(&g, C::new(0.5, 0.3), 10.0, 16);
        let vals = mesh.sample(|r| C::new((-(r - 3.0) * (r - 3.0)).exp(), 0.0));
        let cum = mesh.cum_forward(&vals);
        // compare against erf-based closed form at the last node
        let total = cum[*mesh.node_point.last().unwrap()];
        // int_1^20 exp(-(r-3)^2) dr = sqrt(pi)/2 (erf(17) - erf(-2))
        let erf = |x: f64| {
            // Abramowitz-Stegun 7.1.26, enough for 1e-7; refined by symmetry
            let t = 1.0 / (1.0 + 0.3275911 * x.abs());
            let p = t
                * (0.254829592
                    + t * (-0.284496736 + t * (1.421413741 + t * (-1.453152027 + t * 1.061405429))));
            let v = 1.0 - p * (-x * x).exp();
            if x >= 0.0 {
                v
            } else {
                -v
            }
        };
        let exact = 0.5 * std::f64::consts::PI.sqrt() * (erf(17.0) + erf(2.0));
        assert!((total.re - exact).abs() < 3e-7, "{} vs {exact}", total.re);
    }

    #[test]
    fn forward_decay_matches_direct_quadrature() {
        let g = RadialGrid::geometric(30.0, 96).unwrap();
        let rate = 2.0;
        let mesh = PanelMesh::build(&g, C::new(rate, 1.0), 8.0, 32);
        // w supported on [1, 8]
        let w = |r: f64| {
            if r <= 8.0 {
                C::new((-(r - 3.0) * (r - 3.0)).exp(), 0.1 * r)
            } else {
                C::default()
            }
        };
        let vals = mesh.sample(w);
        let cum = mesh.cum_forward_decay(&vals, rate);
        // check at a node past the support: out(t) = e^{-rate t} int_1^8 w e^{rate s}
        let t_idx = mesh
            .node_point
            .iter()
            .position(|&i| mesh.points[i] > 12.0)
            .unwrap();
        let t = mesh.points[mesh.node_point[t_idx]];
        let mut f = |s: f64| w(s) * C::new((rate * (s - t)).exp(), 0.0);
        let (direct, _) =
            crate::quad::adaptive_gk(&mut f, 1.0, 8.0, 1e-14, 1e-12, &[3.0, 5.0]).unwrap();
        let got = cum[mesh.node_point[t_idx]];
        assert!(
            (got - direct).norm() <= 1e-10 * direct.norm(),
            "{got} vs {direct}"
        );
    }

    #[test]
    fn backward_decay_matches_direct_quadrature() {
        let g = RadialGrid::geometric(30.0, 96).unwrap();
        let rate = 1.5;
        let mesh = PanelMesh::build(&g, C::new(rate, 0.5), 30.0, 32);
        let w = |r: f64| C::new((-0.3 * r).exp(), (0.2 * r).sin() * (-0.25 * r).exp());
        let vals = mesh.sample(w);
        let cum = mesh.cum_backward_decay(&vals, rate);
        let idx = mesh.node_point[10];
        let t = mesh.points[idx];
        let mut f = |s: f64| w(s) * C::new((rate * (t - s)).exp(), 0.0);
        let (direct, _) =
            crate::quad::adaptive_gk(&mut f, t, 30.0, 1e-14, 1e-12, &[]).unwrap();
        assert!(
            (cum[idx] - direct).norm() <= 1e-10 * direct.norm().max(1e-10),
            "{} vs {direct}",
            cum[idx]
        );
    }
}
