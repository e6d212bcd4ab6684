//! Config file, complex-number parsing, and force/datum preset grammar.

use anyhow::{bail, Context};
use diskflow::force::RadialPreset;
use diskflow::semigroup::{power_tail_datum, ring_datum};
use diskflow::ForceMode;
use num_complex::Complex64;
use serde::Deserialize;
use std::collections::HashMap;
use std::path::Path;

#[derive(Debug, Default, Deserialize)]
pub struct ConfigFile {
    pub output_dir: Option<String>,
    pub nodes_per_decade: Option<usize>,
}

impl ConfigFile {
    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        Ok(toml::from_str(&text)?)
    }
}

/// Parse "a+bi" / "a-bi" / "a" / "bi", scientific notation accepted.
pub fn parse_complex(s: &str) -> anyhow::Result<Complex64> {
    let t = s.trim().replace(' ', "");
    if t.is_empty() {
        bail!("empty complex literal");
    }
    if let Some(body) = t.strip_suffix('i').or_else(|| t.strip_suffix('I')) {
        // find the split between real and imaginary parts: the last +/- that
        // is not part of an exponent
        let chars: Vec<char> = body.chars().collect();
        let mut split = None;
        for i in (1..chars.len()).rev() {
            if (chars[i] == '+' || chars[i] == '-')
                && chars[i - 1] != 'e'
                && chars[i - 1] != 'E'
            {
                split = Some(i);
                break;
            }
        }
        match split {
            Some(i) => {
                let re: f64 = body[..i].parse().context("real part")?;
                let im_str = &body[i..];
                let im: f64 = if im_str == "+" {
                    1.0
                } else if im_str == "-" {
                    -1.0
                } else {
                    im_str.parse().context("imaginary part")?
                };
                Ok(Complex64::new(re, im))
            }
            None => {
                let im: f64 = if body.is_empty() { 1.0 } else { body.parse().context("imaginary part")? };
                Ok(Complex64::new(0.0, im))
            }
        }
    } else {
        Ok(Complex64::new(t.parse().context("real literal")?, 0.0))
    }
}

fn parse_kv(spec: &str) -> anyhow::Result<(String, HashMap<String, f64>)> {
    let (name, rest) = match spec.split_once(':') {
        Some((n, r)) => (n.to_string(), r),
        None => (spec.to_string(), ""),
    };
    let mut kv = HashMap::new();
    for part in rest.split(',').filter(|p| !p.is_empty()) {
        let (k, v) = part
            .split_once('=')
            .with_context(|| format!("expected key=value in {part}"))?;
        kv.insert(k.trim().to_string(), v.trim().parse::<f64>()?);
    }
    Ok((name, kv))
}

fn preset_from(name: &str, kv: &HashMap<String, f64>) -> anyhow::Result<RadialPreset> {
    Ok(match name {
        "gaussian" => RadialPreset::Gaussian {
            center: *kv.get("center").unwrap_or(&3.0),
            width: *kv.get("width").unwrap_or(&0.5),
        },
        "ring" => RadialPreset::Ring {
            radius: *kv.get("radius").unwrap_or(&3.0),
            width: *kv.get("width").unwrap_or(&0.5),
        },
        "compact-bump" => RadialPreset::CompactBump {
            center: *kv.get("center").unwrap_or(&4.0),
            halfwidth: *kv.get("halfwidth").unwrap_or(&1.5),
        },
        "power-tail" => RadialPreset::PowerTail {
            exponent: *kv.get("a").unwrap_or(&1.5),
            r_cut: *kv.get("rcut").unwrap_or(&200.0),
        },
        other => bail!("unknown preset {other}"),
    })
}

/// Parse a force preset spec into a body or divergence-form force.
pub fn parse_force(spec: &str, body: bool) -> anyhow::Result<ForceMode> {
    let (name, kv) = parse_kv(spec)?;
    let preset = preset_from(&name, &kv)?;
    let amp_r = Complex64::new(*kv.get("amp_r").unwrap_or(&1.0), 0.0);
    let amp_t = Complex64::new(*kv.get("amp_t").unwrap_or(&0.7), 0.3);
    if body {
        Ok(ForceMode::Body {
            fr: preset.smooth_fn(amp_r),
            ftheta: preset.smooth_fn(amp_t),
        })
    } else {
        // divergence-form data must vanish at the wall: ring does by
        // construction; other presets are windowed through Ring
        let p = match preset {
            RadialPreset::Ring { .. } => preset,
            RadialPreset::Gaussian { center, width } => RadialPreset::Ring { radius: center, width },
            other => other,
        };
        Ok(ForceMode::DivForce {
            t_rr: p.smooth_fn(amp_r),
            t_rtheta: p.smooth_fn(amp_t),
            t_thetar: p.smooth_fn(Complex64::new(0.4, -0.2)),
            t_thetatheta: p.smooth_fn(Complex64::new(-0.3, 0.5)),
            gamma_prime: *kv.get("gamma_prime").unwrap_or(&0.75),
        })
    }
}

/// Parse an initial-datum preset for the semigroup.
pub fn parse_datum(spec: &str, n: i32) -> anyhow::Result<ForceMode> {
    let (name, kv) = parse_kv(spec)?;
    Ok(match name.as_str() {
        "ring" => ring_datum(
            n,
            *kv.get("center").unwrap_or(&3.0),
            *kv.get("width").unwrap_or(&0.5),
        ),
        "power-tail" => power_tail_datum(
            n,
            *kv.get("a").unwrap_or(&1.5),
            *kv.get("rcut").unwrap_or(&300.0),
        ),
        other => bail!("unknown datum preset {other}"),
    })
}

/// Datum generically representing L^q: velocity tail r^{-(2/q + 0.04)}.
pub fn default_datum_for_q(q: f64, n: i32) -> ForceMode {
    power_tail_datum(n, 2.0 / q + 0.04, 300.0)
}
