//! Quadrature primitives: adaptive Gauss-Kronrod for complex integrands and
//! Clenshaw-Curtis panels with exact Chebyshev antidifferentiation, used for
//! the cumulative radial integrals of the resolvent assembly.

use crate::error::{Error, Result};
use num_complex::Complex64;

/// 15-point Kronrod abscissae (positive half).
const XGK: [f64; 8] = [
    0.991455371120813,
    0.949107912342759,
    0.864864423359769,
    0.741531185599394,
    0.586087235467691,
    0.405845151377397,
    0.207784955007898,
    0.0,
];
/// 15-point Kronrod weights.
const WGK: [f64; 8] = [
    0.022935322010529,
    0.063092092629979,
    0.104790010322250,
    0.140653259715525,
    0.169004726639267,
    0.190350578064785,
    0.204432940075298,
    0.209482141084728,
];
/// 7-point Gauss weights embedded in the rule.
const WG: [f64; 4] = [
    0.129484966168870,
    0.279705391489277,
    0.381830050505119,
    0.417959183673469,
];

/// One Gauss-Kronrod 7-15 evaluation on [a, b]. Returns (integral, error estimate).
pub fn gk15<F: FnMut(f64) -> Complex64>(f: &mut F, a: f64, b: f64) -> (Complex64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut res_k = fc * WGK[7];
    let mut res_g = fc * WG[3];
    let mut res_abs = fc.norm() * WGK[7];
    for j in 0..7 {
        let dx = h * XGK[j];
        let f1 = f(c - dx);
        let f2 = f(c + dx);
        let sum = f1 + f2;
        res_k += sum * WGK[j];
        res_abs += (f1.norm() + f2.norm()) * WGK[j];
        if j % 2 == 1 {
            res_g += sum * WG[j / 2];
        }
    }
    let integral = res_k * h;
    let err = ((res_k - res_g) * h).norm();
    // sharper heuristic as in QUADPACK: scale the raw difference
    let res_abs = res_abs * h.abs();
    let err = if res_abs > 0.0 && err > 0.0 {
        (err * (200.0 * err / res_abs).sqrt().min(1.0)).max(50.0 * f64::EPSILON * res_abs)
    } else {
        err
    };
    (integral, err)
}

/// Adaptive Gauss-Kronrod on [a, b] with mixed absolute/relative tolerance.
///
/// `seeds` may pre-split the interval (useful for integrands living on very
/// different scales, e.g. power-law kernels over many decades).
pub fn adaptive_gk<F: FnMut(f64) -> Complex64>(
    f: &mut F,
    a: f64,
    b: f64,
    abs_tol: f64,
    rel_tol: f64,
    seeds: &[f64],
) -> Result<(Complex64, f64)> {
    #[derive(Clone)]
    struct Seg {
        a: f64,
        b: f64,
        val: Complex64,
        err: f64,
    }
    let mut segs: Vec<Seg> = Vec::new();
    let mut edges: Vec<f64> = Vec::with_capacity(seeds.len() + 2);
    edges.push(a);
    for &s in seeds {
        if s > a && s < b {
            edges.push(s);
        }
    }
    edges.push(b);
    edges.sort_by(|x, y| x.partial_cmp(y).unwrap());
    for w in edges.windows(2) {
        let (val, err) = gk15(f, w[0], w[1]);
        segs.push(Seg { a: w[0], b: w[1], val, err });
    }
    let max_segs = 4000;
    loop {
        let total: Complex64 = segs.iter().map(|s| s.val).sum();
        let err: f64 = segs.iter().map(|s| s.err).sum();
        let tol = abs_tol.max(rel_tol * total.norm());
        if err <= tol {
            return Ok((total, err));
        }
        if segs.len() >= max_segs {
            return Err(Error::QuadratureFailure { est: err, target: tol });
        }
        // split the worst segment
        let (idx, _) = segs
            .iter()
            .enumerate()
            .max_by(|x, y| x.1.err.partial_cmp(&y.1.err).unwrap())
            .unwrap();
        let Seg { a: sa, b: sb, .. } = segs[idx];
        let mid = 0.5 * (sa + sb);
        if mid <= sa || mid >= sb {
            let err_now: f64 = segs.iter().map(|s| s.err).sum();
            return Err(Error::QuadratureFailure { est: err_now, target: tol });
        }
        let (v1, e1) = gk15(f, sa, mid);
        let (v2, e2) = gk15(f, mid, sb);
        segs[idx] = Seg { a: sa, b: mid, val: v1, err: e1 };
        segs.push(Seg { a: mid, b: sb, val: v2, err: e2 });
    }
}

/// Gauss-Legendre 10-point nodes (positive half) and weights, for contour rays.
pub const GL10_X: [f64; 5] = [
    0.148874338981631,
    0.433395394129247,
    0.679409568299024,
    0.865063366688985,
    0.973906528517172,
];
pub const GL10_W: [f64; 5] = [
    0.295524224714753,
    0.269266719309996,
    0.219086362515982,
    0.149451349150581,
    0.066671344308688,
];

/// Nodes/weights of GL10 mapped to [a, b], in ascending order.
pub fn gl10_nodes(a: f64, b: f64) -> ([f64; 10], [f64; 10]) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let mut x = [0.0; 10];
    let mut w = [0.0; 10];
    for j in 0..5 {
        x[4 - j] = c - h * GL10_X[j];
        x[5 + j] = c + h * GL10_X[j];
        w[4 - j] = h * GL10_W[j];
        w[5 + j] = h * GL10_W[j];
    }
    (x, w)
}

/// Number of Clenshaw-Curtis points per panel (degree ORDER-1 Chebyshev fit).
pub const CC_ORDER: usize = 16;

/// Clenshaw-Curtis panel reference nodes on [-1, 1], ascending, endpoints included.
pub fn cc_ref_nodes() -> [f64; CC_ORDER] {
    let n = CC_ORDER - 1;
    let mut x = [0.0; CC_ORDER];
    for (j, xj) in x.iter_mut().enumerate() {
        *xj = -(std::f64::consts::PI * j as f64 / n as f64).cos();
    }
    x[0] = -1.0;
    x[n] = 1.0;
    x
}

/// Chebyshev interpolation coefficients from values at the CC nodes
/// (ascending order as produced by [`cc_ref_nodes`]).
pub fn cheb_coeffs(values: &[Complex64; CC_ORDER]) -> [Complex64; CC_ORDER] {
    let n = CC_ORDER - 1; // polynomial degree
    let mut a = [Complex64::default(); CC_ORDER];
    // values[j] correspond to xi_j = -cos(j pi / n) = cos((n - j) pi / n)
    for (k, ak) in a.iter_mut().enumerate() {
        let mut s = Complex64::default();
        for (j, &vj) in values.iter().enumerate() {
            let theta = std::f64::consts::PI * (n - j) as f64 / n as f64;
            let tk = (k as f64 * theta).cos();
            let w = if j == 0 || j == n { 0.5 } else { 1.0 };
            s += vj * (tk * w);
        }
        let norm = if k == 0 || k == n { 1.0 / n as f64 } else { 2.0 / n as f64 };
        *ak = s * norm;
    }
    a
}

/// Antiderivative coefficients: F' = f on [-1,1] with F(-1) = 0.
/// The input series is in the plain convention (a_0 is the true constant
/// term), so the k = 1 recurrence doubles it.
pub fn cheb_antiderivative(a: &[Complex64; CC_ORDER]) -> [Complex64; CC_ORDER + 1] {
    let n = CC_ORDER - 1;
    let mut b = [Complex64::default(); CC_ORDER + 1];
    for k in 1..=n + 1 {
        let up = if k + 1 <= n { a[k + 1] } else { Complex64::default() };
        let lo = if k == 1 {
            a[0] * 2.0
        } else if k - 1 <= n {
            a[k - 1]
        } else {
            Complex64::default()
        };
        b[k] = (lo - up) / (2.0 * k as f64);
    }
    // enforce F(-1) = 0
    let mut f_m1 = Complex64::default();
    for (k, bk) in b.iter().enumerate().skip(1) {
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        f_m1 += bk * sign;
    }
    b[0] = -f_m1;
    b
}

/// Clenshaw evaluation of a Chebyshev series at x in [-1, 1].
pub fn cheb_eval_series(coeffs: &[Complex64], x: f64) -> Complex64 {
    let mut b1 = Complex64::default();
    let mut b2 = Complex64::default();
    for &c in coeffs.iter().skip(1).rev() {
        let tmp = b1;
        b1 = b1 * (2.0 * x) - b2 + c;
        b2 = tmp;
    }
    coeffs[0] + b1 * x - b2
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64 as C;

    fn c(x: f64) -> C {
        C::new(x, 0.0)
    }

    #[test]
    fn gk_integrates_polynomial_exactly() {
        let mut f = |x: f64| c(x * x * x - 2.0 * x + 1.0);
        let (v, e) = gk15(&mut f, 0.0, 2.0);
        // exact: 4 - 4 + 2 = 2
        assert!((v.re - 2.0).abs() < 1e-14, "got {v}");
        assert!(e < 1e-12);
    }

    #[test]
    fn adaptive_handles_peaked_integrand() {
        let mut f = |x: f64| c((-(x - 0.3) * (x - 0.3) * 1e4).exp());
        let (v, _) = adaptive_gk(&mut f, 0.0, 1.0, 1e-14, 1e-12, &[]).unwrap();
        let exact = (std::f64::consts::PI / 1e4).sqrt(); // full Gaussian, tails negligible
        assert!((v.re - exact).abs() < 1e-12 * exact.max(1.0));
    }

    #[test]
    fn cheb_antiderivative_of_cos() {
        // cumulative of cos over [0, 2] should give sin at the nodes
        let nodes = cc_ref_nodes();
        let (a, b) = (0.0, 2.0);
        let mid = 0.5 * (a + b);
        let half = 0.5 * (b - a);
        let mut vals = [C::default(); CC_ORDER];
        for (j, v) in vals.iter_mut().enumerate() {
            let x = mid + half * nodes[j];
            *v = c(x.cos());
        }
        let coef = cheb_coeffs(&vals);
        let anti = cheb_antiderivative(&coef);
        for (j, &xi) in nodes.iter().enumerate() {
            let x = mid + half * xi;
            let cum = cheb_eval_series(&anti, xi) * half;
            assert!(
                (cum.re - x.sin()).abs() < 1e-14,
                "node {j}: {} vs {}",
                cum.re,
                x.sin()
            );
        }
    }
}
