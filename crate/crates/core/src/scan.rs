//! Scanning |F_n| over the complex plane: the lower-bound normalization, the
//! small-argument expansion check, and the nearly-resonance report.

use crate::error::{Error, Result};
use crate::resolvent::{f_n_kernel, ResolventQuery};
use crate::special::gamma_c;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

/// Euler-Mascheroni constant.
const EULER_GAMMA: f64 = 0.577215664901532860606512090082;

/// Sample plan for a scan of the kernel integral.
#[derive(Debug, Clone, Serialize)]
pub struct ScanSpec {
    pub beta_list: Vec<f64>,
    /// half-opening restriction: samples stay inside |arg lambda| < pi - epsilon
    pub sector_epsilon: f64,
    /// log10 |lambda| range (min, max)
    pub radial_decades: (f64, f64),
    pub points_per_decade: usize,
    /// arg(lambda) values of the rays
    pub rays: Vec<f64>,
}

impl ScanSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.sector_epsilon > 0.0 && self.sector_epsilon < std::f64::consts::FRAC_PI_2) {
            return Err(Error::InvalidParameter(
                "sector_epsilon must lie in (0, pi/2)".into(),
            ));
        }
        for &b in &self.beta_list {
            if !(0.0..1.0).contains(&b) {
                return Err(Error::InvalidParameter(format!("beta {b} outside [0,1)")));
            }
        }
        for &a in &self.rays {
            if a.abs() >= std::f64::consts::PI - self.sector_epsilon {
                return Err(Error::InvalidParameter(format!(
                    "ray arg {a} leaves the sector"
                )));
            }
        }
        if 10f64.powf(self.radial_decades.0) < 1e-300 {
            return Err(Error::InvalidParameter(
                "|lambda| below the double-precision floor".into(),
            ));
        }
        Ok(())
    }

    /// All lambda samples of the scan, ray-major then radius-major.
    pub fn lambdas(&self) -> Vec<Complex64> {
        let (dmin, dmax) = self.radial_decades;
        let nr = ((dmax - dmin) * self.points_per_decade as f64).ceil() as usize;
        let mut out = Vec::new();
        for &arg in &self.rays {
            for k in 0..=nr {
                let d = dmin + (dmax - dmin) * k as f64 / nr.max(1) as f64;
                out.push(Complex64::from_polar(10f64.powf(d), arg));
            }
        }
        out
    }
}

/// One scan sample.
#[derive(Debug, Clone, Serialize)]
pub struct ScanRow {
    pub beta: f64,
    pub re_lambda: f64,
    pub im_lambda: f64,
    pub abs_fn: f64,
    /// N = beta |F_n| |lambda|^{Re mu / 2} / min(1, -beta^2 log|lambda|)
    pub normalized: f64,
    pub model_abs: f64,
    pub model_err: f64,
    /// set if the quadrature failed for this sample (value fields are NaN)
    pub failed: bool,
}

/// Scan output plus the resonance summary.
#[derive(Debug, Clone, Serialize)]
pub struct ScanReport {
    pub rows: Vec<ScanRow>,
    /// infimum of the normalization N over admissible samples
    pub inf_normalized: f64,
    /// number of samples with |F_n| below the zero guard
    pub zero_flags: usize,
    /// minimizer of beta |F_n| |lambda|^{Re mu/2} (per beta)
    pub resonance: Vec<ResonanceSummary>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ResonanceSummary {
    pub beta: f64,
    pub lambda_star_abs: f64,
    /// -beta^2 log |lambda*|
    pub depth: f64,
    /// predicted annulus markers: (c' beta scale, c scale) for the fit
    pub marker_lower: f64,
    pub marker_upper: f64,
}

fn normalization(beta: f64, lambda: Complex64, abs_fn: f64, re_mu: f64) -> f64 {
    let log_l = lambda.norm().ln();
    let denom = (-beta * beta * log_l).min(1.0).max(1e-300);
    beta.max(1e-12) * abs_fn * lambda.norm().powf(0.5 * re_mu) / denom
}

/// Evaluate the scan: |F_n| per sample, the normalization, and the
/// small-argument model comparison. Per-sample quadrature failures are
/// reported in the rows, not raised.
pub fn scan_fn(spec: &ScanSpec, n: i32) -> Result<ScanReport> {
    spec.validate()?;
    let lambdas = spec.lambdas();
    let mut rows: Vec<ScanRow> = Vec::new();
    for &beta in &spec.beta_list {
        let per_beta: Vec<ScanRow> = lambdas
            .par_iter()
            .map(|&lambda| {
                let q = match ResolventQuery::new(lambda, beta, n) {
                    Ok(q) => q,
                    Err(_) => {
                        return ScanRow {
                            beta,
                            re_lambda: lambda.re,
                            im_lambda: lambda.im,
                            abs_fn: f64::NAN,
                            normalized: f64::NAN,
                            model_abs: f64::NAN,
                            model_err: f64::NAN,
                            failed: true,
                        }
                    }
                };
                match f_n_kernel(&q) {
                    Ok(fnv) => {
                        let (model, err) = expansion_model(&q, fnv);
                        ScanRow {
                            beta,
                            re_lambda: lambda.re,
                            im_lambda: lambda.im,
                            abs_fn: fnv.norm(),
                            normalized: normalization(beta, lambda, fnv.norm(), q.order.mu.re),
                            model_abs: model,
                            model_err: err,
                            failed: false,
                        }
                    }
                    Err(_) => ScanRow {
                        beta,
                        re_lambda: lambda.re,
                        im_lambda: lambda.im,
                        abs_fn: f64::NAN,
                        normalized: f64::NAN,
                        model_abs: f64::NAN,
                        model_err: f64::NAN,
                        failed: true,
                    },
                }
            })
            .collect();
        rows.extend(per_beta);
    }
    let inf_normalized = rows
        .iter()
        .filter(|r| !r.failed && r.normalized.is_finite())
        .map(|r| r.normalized)
        .fold(f64::INFINITY, f64::min);
    let zero_flags = rows
        .iter()
        .filter(|r| !r.failed && r.abs_fn < 1e-13)
        .count();
    let resonance = spec
        .beta_list
        .iter()
        .filter(|&&b| b > 0.0)
        .map(|&b| resonance_summary_from_rows(&rows, b))
        .collect();
    Ok(ScanReport { rows, inf_normalized, zero_flags, resonance })
}

fn resonance_summary_from_rows(rows: &[ScanRow], beta: f64) -> ResonanceSummary {
    let mut best = (f64::INFINITY, 1.0f64);
    for r in rows.iter().filter(|r| r.beta == beta && !r.failed) {
        let lam = Complex64::new(r.re_lambda, r.im_lambda).norm();
        // minimize the un-normalized dip indicator beta |F| |lambda|^{Re mu/2}
        let indicator = r.normalized * (-beta * beta * lam.ln()).min(1.0);
        if indicator < best.0 {
            best = (indicator, lam);
        }
    }
    let depth = -beta * beta * best.1.ln();
    ResonanceSummary {
        beta,
        lambda_star_abs: best.1,
        depth,
        marker_lower: beta,     // O(beta) marker: |lambda*| >= e^{-c/beta^2}
        marker_upper: 1.0 / beta, // O(1/beta) marker: |lambda*| <= e^{-c'/beta}
    }
}

/// The small-argument representation of the kernel integral:
///
///   zeta F_n = Gamma(1+zeta)/sqrt(l) (sqrt(l)/2)^{-zeta}
///              (1 - (e^gamma sqrt(l)/2)^zeta + R_n),
///
/// with gamma the Euler constant. Returns (|model F_n|, |R_n|) where the
/// remainder is extracted by inverting the expansion against the quadratured
/// value.
fn expansion_model(q: &ResolventQuery, fn_value: Complex64) -> (f64, f64) {
    let zeta = q.order.zeta;
    if zeta.norm() < 1e-14 {
        // beta -> 0 limit: zeta F_n -> -Gamma'(1)... model degenerates; the
        // closed form K_0(sqrt l)/sqrt l applies instead
        return (f64::NAN, f64::NAN);
    }
    let sl = q.sqrt_lambda;
    let gam = match gamma_c(1.0 + zeta) {
        Ok(g) => g,
        Err(_) => return (f64::NAN, f64::NAN),
    };
    let pref = gam / sl * (sl * 0.5).powc(-zeta);
    let ztil = (sl * 0.5 * EULER_GAMMA.exp()).powc(zeta);
    let model = pref * (1.0 - ztil) / zeta;
    let remainder = zeta * fn_value / pref - (1.0 - ztil);
    (model.norm(), remainder.norm())
}

/// |R_n(lambda)| from the expansion above, for one (beta, lambda).
pub fn expansion_check(beta: f64, lambda: Complex64, n: i32) -> Result<f64> {
    if lambda.norm() >= 0.5 {
        return Err(Error::InvalidParameter(
            "the expansion is stated for |lambda| < 1/2".into(),
        ));
    }
    let q = ResolventQuery::new(lambda, beta, n)?;
    let fnv = f_n_kernel(&q)?;
    let (_, err) = expansion_model(&q, fnv);
    Ok(err)
}

/// Locate the nearly-resonance dip along the positive real axis for one beta
/// and report whether its depth sits between the predicted markers.
pub fn resonance_report(beta: f64, n: i32) -> Result<ScanReport> {
    if !(0.05..=0.5).contains(&beta) {
        return Err(Error::InvalidParameter(format!(
            "resonance scan wants beta in [0.05, 0.5], got {beta}"
        )));
    }
    // the dip sits near -log|lambda| ~ 8 pi / beta; scan two surrounding decades
    let center = 8.0 * std::f64::consts::PI / beta;
    let lo = -(center * 1.6) / std::f64::consts::LN_10;
    let hi = -(center * 0.5) / std::f64::consts::LN_10;
    let spec = ScanSpec {
        beta_list: vec![beta],
        sector_epsilon: std::f64::consts::FRAC_PI_4,
        radial_decades: (lo, hi),
        points_per_decade: ((260.0 / (hi - lo)).ceil() as usize).max(3),
        rays: vec![0.0],
    };
    scan_fn(&spec, n)
}

/// CSV rendering of the scan rows (schema:
/// beta,re_lambda,im_lambda,abs_Fn,normalized,model_abs,model_err).
pub fn scan_csv(report: &ScanReport) -> String {
    let mut out = String::from("beta,re_lambda,im_lambda,abs_Fn,normalized,model_abs,model_err\n");
    for r in &report.rows {
        out.push_str(&format!(
            "{},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e}\n",
            r.beta, r.re_lambda, r.im_lambda, r.abs_fn, r.normalized, r.model_abs, r.model_err
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_rays_empty_report() {
        let spec = ScanSpec {
            beta_list: vec![0.2],
            sector_epsilon: std::f64::consts::FRAC_PI_4,
            radial_decades: (-6.0, -2.0),
            points_per_decade: 4,
            rays: vec![],
        };
        let rep = scan_fn(&spec, 1).unwrap();
        assert!(rep.rows.is_empty());
        assert_eq!(rep.zero_flags, 0);
    }

    #[test]
    fn beta_zero_closed_form_matches() {
        // F_1(sqrt l; 0) = K_0(sqrt l)/sqrt l
        use crate::special::bessel_k;
        for &lam in &[0.01f64, 0.2] {
            let q = ResolventQuery::new(Complex64::new(lam, 0.0), 0.0, 1).unwrap();
            let fnv = f_n_kernel(&q).unwrap();
            let sl = Complex64::new(lam.sqrt(), 0.0);
            let k0 = bessel_k(Complex64::default(), sl).unwrap().value;
            let closed = k0 / sl;
            assert!(
                (fnv - closed).norm() <= 1e-8 * closed.norm(),
                "lambda={lam}: {fnv} vs {closed}"
            );
        }
        // frozen value: K_0(0.1)/0.1 = 24.2706902...
        let q = ResolventQuery::new(Complex64::new(0.01, 0.0), 0.0, 1).unwrap();
        let fnv = f_n_kernel(&q).unwrap();
        assert!((fnv.re - 24.270690247020166).abs() < 0.01);
    }

    #[test]
    fn conjugation_symmetry() {
        for &(beta, re, im) in &[(0.15, 1e-4, 3e-4), (0.25, -1e-5, 2e-5), (0.1, 1e-8, 1e-8)] {
            let l = Complex64::new(re, im);
            let q1 = ResolventQuery::new(l, beta, 1).unwrap();
            let q2 = ResolventQuery::new(l.conj(), beta, 1).unwrap();
            let f1 = f_n_kernel(&q1).unwrap();
            let f2 = f_n_kernel(&q2).unwrap();
            assert!(
                (f1.conj() - f2).norm() <= 1e-12 * f1.norm(),
                "beta={beta} lambda={l}"
            );
        }
    }

    #[test]
    fn small_scan_is_zero_free() {
        let spec = ScanSpec {
            beta_list: vec![0.2],
            sector_epsilon: std::f64::consts::FRAC_PI_4,
            radial_decades: (-10.0, -3.0),
            points_per_decade: 3,
            rays: vec![0.0, 1.2, -1.2, 2.0, -2.0],
        };
        let rep = scan_fn(&spec, 1).unwrap();
        assert_eq!(rep.zero_flags, 0);
        assert!(rep.inf_normalized > 0.0, "inf N = {}", rep.inf_normalized);
        assert!(rep.rows.iter().all(|r| !r.failed));
    }

    #[test]
    fn expansion_remainder_is_small_at_small_lambda() {
        let err = expansion_check(0.1, Complex64::new(0.01, 0.0), 1).unwrap();
        // |R| <= C |lambda|^{Re mu / 2} with modest C
        assert!(err < 0.5 * 0.01f64.powf(0.5), "remainder {err:.3e}");
        assert!(expansion_check(0.1, Complex64::new(0.6, 0.0), 1).is_err());
    }
}
