//! Batch front-end: solve one resolvent query, scan the kernel integral,
//! report the nearly-resonance dip, evolve the semigroup and fit decay
//! rates, and run the inequality harness. Emits CSV/JSON artifacts with a
//! reproducible metadata header; exit code 2 flags validation errors and 3
//! numerical failures.

mod config;
mod output;

use anyhow::Context;
use clap::{Parser, Subcommand};
use config::{parse_complex, parse_force, ConfigFile};
use diskflow::bounds::{self, BoundFamily};
use diskflow::polar::{theta_bounds_check, theta_of};
use diskflow::resolvent::{
    solve_body_force, solve_boundary, solve_div_force, ResolventQuery, SolverConfig,
};
use diskflow::scan::{resonance_report, scan_csv, scan_fn, ScanSpec};
use diskflow::semigroup::{contour_grid, decay_csv, decay_fit, evolve, ContourSpec};
use diskflow::ForceMode;
use output::OutputSink;
use std::path::PathBuf;

#[derive(Parser)]
#[command(name = "diskflow", version, about = "Exterior-disk resolvent and semigroup toolkit")]
struct Cli {
    /// Optional TOML config; command-line flags override its values
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory (env DISKFLOW_OUT as fallback, else current dir)
    #[arg(long, global = true)]
    output_dir: Option<PathBuf>,
    /// RNG seed for sample generation
    #[arg(long, global = true, default_value_t = 7)]
    seed: u64,
    /// Worker threads (default: all cores)
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Radial grid density
    #[arg(long, global = true)]
    nodes_per_decade: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one per-mode resolvent problem and write the solution JSON
    Solve {
        #[arg(long)]
        beta: f64,
        /// complex, e.g. 0.01+0.01i
        #[arg(long)]
        lambda: String,
        #[arg(long, default_value_t = 1)]
        n: i32,
        /// body force preset, e.g. gaussian:center=3,width=0.5
        #[arg(long)]
        force: Option<String>,
        /// divergence-form force preset (same grammar, all four components)
        #[arg(long)]
        div_force: Option<String>,
        /// boundary data "br,btheta" as two complex numbers
        #[arg(long)]
        boundary: Option<String>,
    },
    /// Scan |F_n| over the complex plane and write the CSV + summary
    Scan {
        #[arg(long, value_delimiter = ',')]
        beta: Vec<f64>,
        #[arg(long, default_value_t = 0.7853981633974483)]
        sector_epsilon: f64,
        #[arg(long, default_value_t = -12.0)]
        decade_min: f64,
        #[arg(long, allow_hyphen_values = true)]
        decade_max: Option<f64>,
        #[arg(long, default_value_t = 8)]
        points_per_decade: usize,
        /// ray angles, comma separated (radians); empty list gives empty CSV
        #[arg(long, value_delimiter = ',', num_args = 0.., default_value = "0.0,1.2,-1.2,2.0,-2.0")]
        rays: Vec<f64>,
    },
    /// Locate the nearly-resonance dip for one beta
    Resonance {
        #[arg(long)]
        beta: f64,
    },
    /// Evolve a single-mode datum by the semigroup and write the profile CSV
    Evolve {
        #[arg(long)]
        beta: f64,
        #[arg(long, default_value_t = 1)]
        n: i32,
        #[arg(long)]
        t: f64,
        /// datum preset: ring:center=3,width=0.5 or power-tail:a=1.5,rcut=300
        #[arg(long, default_value = "ring:center=3,width=0.5")]
        datum: String,
        #[arg(long, default_value_t = 0.7 * std::f64::consts::PI)]
        phi: f64,
    },
    /// Fit semigroup decay exponents over a time grid
    DecayFit {
        #[arg(long)]
        beta: f64,
        #[arg(long, default_value_t = 1)]
        n: i32,
        #[arg(long)]
        q: f64,
        #[arg(long, default_value_t = 10.0)]
        t_min: f64,
        #[arg(long, default_value_t = 1000.0)]
        t_max: f64,
        #[arg(long, default_value_t = 7)]
        t_count: usize,
        #[arg(long)]
        datum: Option<String>,
        #[arg(long, default_value_t = 0.7 * std::f64::consts::PI)]
        phi: f64,
    },
    /// Run the kernel-integral and energy inequality harness
    VerifyBounds {
        #[arg(long, value_delimiter = ',', default_value = "0.1,0.15,0.2,0.3")]
        beta: Vec<f64>,
        #[arg(long, default_value_t = 8)]
        samples_per_beta: usize,
    },
    /// Check the Theta(T) bounds
    VerifyTheta {
        #[arg(long, value_delimiter = ',')]
        t: Vec<f64>,
    },
}

fn main() {
    let cli = Cli::parse();
    let code = match run(cli) {
        Ok(()) => 0,
        Err(e) => {
            let (code, kind) = classify(&e);
            let err_json = serde_json::json!({
                "error": e.to_string(),
                "kind": kind,
                "chain": e.chain().map(|c| c.to_string()).collect::<Vec<_>>(),
            });
            eprintln!("{}", serde_json::to_string_pretty(&err_json).unwrap());
            code
        }
    };
    std::process::exit(code);
}

fn classify(e: &anyhow::Error) -> (i32, &'static str) {
    if let Some(de) = e.downcast_ref::<diskflow::Error>() {
        if de.is_validation() {
            return (2, "validation");
        }
        return (3, "numerical");
    }
    (2, "validation")
}

fn run(cli: Cli) -> anyhow::Result<()> {
    if let Some(threads) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .ok();
    }
    let file_cfg = match &cli.config {
        Some(p) => ConfigFile::load(p)?,
        None => ConfigFile::default(),
    };
    let out_dir = cli
        .output_dir
        .clone()
        .or_else(|| std::env::var_os("DISKFLOW_OUT").map(PathBuf::from))
        .or_else(|| file_cfg.output_dir.clone().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("."));
    let sink = OutputSink::new(&out_dir, cli.seed)?;
    let mut solver_cfg = SolverConfig::default();
    if let Some(npd) = cli.nodes_per_decade.or(file_cfg.nodes_per_decade) {
        solver_cfg.nodes_per_decade = npd;
    }

    match cli.command {
        Command::Solve { beta, lambda, n, force, div_force, boundary } => {
            let lambda = parse_complex(&lambda)?;
            let q = ResolventQuery::new(lambda, beta, n)?;
            let (sol, kind) = if let Some(spec) = force {
                let f = parse_force(&spec, true)?;
                let grid = solver_cfg.grid_for(q.sqrt_lambda, f.support_end())?;
                (solve_body_force(&q, &f, &grid, &solver_cfg)?, "body")
            } else if let Some(spec) = div_force {
                let f = parse_force(&spec, false)?;
                let grid = solver_cfg.grid_for(q.sqrt_lambda, f.support_end())?;
                (solve_div_force(&q, &f, &grid, &solver_cfg)?, "div")
            } else if let Some(spec) = boundary {
                let parts: Vec<&str> = spec.split(',').collect();
                if parts.len() != 2 {
                    anyhow::bail!("boundary wants \"br,btheta\"");
                }
                let f = ForceMode::Boundary {
                    b_r: parse_complex(parts[0])?,
                    b_theta: parse_complex(parts[1])?,
                };
                let grid = solver_cfg.grid_for(q.sqrt_lambda, 1.0)?;
                (solve_boundary(&q, &f, &grid, &solver_cfg)?, "boundary")
            } else {
                anyhow::bail!("one of --force / --div-force / --boundary is required");
            };
            let body = serde_json::to_string_pretty(&sol.to_json())?;
            sink.write_json(&format!("solve_{kind}.json"), &body)?;
            println!(
                "solved: |F_n| = {:.6e}, |c| = {:.6e}, residuals ode {:.2e} div {:.2e} trace {:.2e}",
                sol.fn_value.norm(),
                sol.c_const.norm(),
                sol.residuals.ode,
                sol.residuals.div,
                sol.residuals.trace
            );
        }
        Command::Scan { beta, sector_epsilon, decade_min, decade_max, points_per_decade, rays } => {
            let betas = if beta.is_empty() { vec![0.2] } else { beta };
            let dmax = decade_max
                .unwrap_or_else(|| betas.iter().cloned().fold(f64::MAX, f64::min).powi(4).log10());
            let spec = ScanSpec {
                beta_list: betas,
                sector_epsilon,
                radial_decades: (decade_min, dmax),
                points_per_decade,
                rays,
            };
            let report = scan_fn(&spec, 1)?;
            sink.write_csv("scan.csv", &scan_csv(&report))?;
            let summary = serde_json::json!({
                "inf_normalized": report.inf_normalized,
                "zero_flags": report.zero_flags,
                "resonance": report.resonance,
                "rows": report.rows.len(),
            });
            sink.write_json("scan_summary.json", &serde_json::to_string_pretty(&summary)?)?;
            println!(
                "scan: {} rows, inf N = {:.4e}, zero flags = {}",
                report.rows.len(),
                report.inf_normalized,
                report.zero_flags
            );
        }
        Command::Resonance { beta } => {
            let report = resonance_report(beta, 1)?;
            sink.write_csv("resonance_heatmap.csv", &scan_csv(&report))?;
            sink.write_json(
                "resonance.json",
                &serde_json::to_string_pretty(&report.resonance)?,
            )?;
            for r in &report.resonance {
                println!(
                    "beta = {}: |lambda*| = {:.4e}, -beta^2 log|lambda*| = {:.4}",
                    r.beta, r.lambda_star_abs, r.depth
                );
            }
        }
        Command::Evolve { beta, n, t, datum, phi } => {
            let f = config::parse_datum(&datum, n)?;
            let contour = ContourSpec { phi, ..ContourSpec::default() };
            let grid = contour_grid(&contour, t, beta, f.support_end(), &solver_cfg)?;
            let v = evolve(&f, beta, n, &contour, t, &grid, &solver_cfg)?;
            sink.write_csv("evolved_vr.csv", &v.vr.to_csv())?;
            sink.write_csv("evolved_vtheta.csv", &v.vtheta.to_csv())?;
            println!("evolved to t = {t}: L2 norm {:.6e}", v.norm_l2());
        }
        Command::DecayFit { beta, n, q, t_min, t_max, t_count, datum, phi } => {
            let f = match datum {
                Some(d) => config::parse_datum(&d, n)?,
                None => config::default_datum_for_q(q, n),
            };
            let ts: Vec<f64> = (0..t_count)
                .map(|i| {
                    t_min * (t_max / t_min).powf(i as f64 / (t_count.max(2) - 1) as f64)
                })
                .collect();
            let contour = ContourSpec { phi, t_list: ts, ..ContourSpec::default() };
            let fit = decay_fit(&f, beta, n, q, &contour, &solver_cfg)?;
            sink.write_csv("decay.csv", &decay_csv(&fit.points))?;
            let fit_json = serde_json::json!({
                "q": fit.q,
                "slope_l2": fit.slope_l2,
                "slope_grad": fit.slope_grad,
                "expected_l2": fit.expected_l2,
                "expected_grad": fit.expected_grad,
            });
            sink.write_json("decay_fit.json", &serde_json::to_string_pretty(&fit_json)?)?;
            println!(
                "decay fit (q = {q}): L2 slope {:.4} (expected {:.4}), grad slope {:.4} (expected {:.4})",
                fit.slope_l2, fit.expected_l2, fit.slope_grad, fit.expected_grad
            );
        }
        Command::VerifyBounds { beta, samples_per_beta } => {
            let mut checks = Vec::new();
            for (family, case) in [
                (BoundFamily::B2, 1),
                (BoundFamily::B2, 2),
                (BoundFamily::B2, 4),
                (BoundFamily::B3, 1),
                (BoundFamily::B3, 3),
                (BoundFamily::B4, 1),
            ] {
                let samples = bounds::kernel_samples(family, case, &beta, cli.seed, samples_per_beta);
                let mut chk = bounds::check_bessel_integral_bounds(family, case, &samples)?;
                chk.seed = cli.seed;
                println!(
                    "{}: fitted C = {:.4e} over {} samples",
                    chk.id, chk.fitted_c, chk.n_samples
                );
                checks.push(chk);
            }
            let energy = bounds::check_energy_ingredients(cli.seed, 100)?;
            println!(
                "{}: worst ratio {:.4} over {} samples",
                energy.id, energy.max_violation_ratio, energy.n_samples
            );
            checks.push(energy);
            sink.write_json("bounds.json", &serde_json::to_string_pretty(&checks)?)?;
        }
        Command::VerifyTheta { t } => {
            let ts = if t.is_empty() { vec![10.0] } else { t };
            let mut rows = Vec::new();
            for &tv in &ts {
                let th = theta_of(tv)?;
                let ok = theta_bounds_check(tv)?;
                println!(
                    "T = {tv}: Theta = {th:.12}, bounds [{:.12}, {:.12}] {}",
                    (-1.0f64 / std::f64::consts::E).exp() * tv.ln(),
                    tv.ln(),
                    if ok { "pass" } else { "FAIL" }
                );
                if !ok {
                    anyhow::bail!("Theta bounds failed at T = {tv}");
                }
                rows.push(serde_json::json!({"T": tv, "theta": th, "pass": ok}));
            }
            sink.write_json("theta.json", &serde_json::to_string_pretty(&rows)?)?;
        }
    }
    Ok(())
}
