use std::f64::consts::TAU;

use crate::error::{usage, Result};
use crate::robustness::{DriftScale, NoiseKind};

/// Parse a magnitude grid: `a:b:logN`, `a:b:linN` or a comma-separated list.
pub fn parse_grid(text: &str) -> Result<Vec<f64>> {
    let text = text.trim();
    if text.is_empty() {
        return Err(usage("empty grid"));
    }
    let num = |s: &str| {
        s.trim()
            .parse::<f64>()
            .ok()
            .filter(|v| v.is_finite())
            .ok_or_else(|| usage(format!("bad grid value `{s}`")))
    };
    let parts: Vec<&str> = text.split(':').collect();
    let grid = match parts.as_slice() {
        [a, b, spec] => {
            let (a, b) = (num(a)?, num(b)?);
            let (log, n) = if let Some(n) = spec.strip_prefix("log") {
                (true, n)
            } else if let Some(n) = spec.strip_prefix("lin") {
                (false, n)
            } else {
                return Err(usage(format!(
                    "grid spacing must be logN or linN, got `{spec}`"
                )));
            };
            let n: usize = n
                .parse()
                .map_err(|_| usage(format!("bad grid count `{n}`")))?;
            if n == 0 {
                return Err(usage("empty grid"));
            }
            if log && !(a > 0.0 && b > 0.0) {
                return Err(usage("log grid bounds must be positive"));
            }
            if n == 1 {
                vec![a]
            } else {
                (0..n)
                    .map(|i| {
                        let f = i as f64 / (n - 1) as f64;
                        if i == 0 {
                            a
                        } else if i == n - 1 {
                            b
                        } else if log {
                            (a.ln() + f * (b.ln() - a.ln())).exp()
                        } else {
                            a + f * (b - a)
                        }
                    })
                    .collect()
            }
        }
        [list] => list
            .split(',')
            .filter(|s| !s.trim().is_empty())
            .map(num)
            .collect::<Result<Vec<_>>>()?,
        _ => return Err(usage(format!("cannot parse grid `{text}`"))),
    };
    if grid.is_empty() {
        return Err(usage("empty grid"));
    }
    Ok(grid)
}

/// Ready-made sweep settings.
#[derive(Clone, Debug, PartialEq)]
pub struct Preset {
    pub kind: NoiseKind,
    pub scale: DriftScale,
    pub grid: Vec<f64>,
    pub samples: usize,
}

pub const PRESETS: [&str; 4] = ["fig1e", "fig1g", "figS3", "figS4"];

pub fn preset(name: &str) -> Result<Preset> {
    let p = match name {
        // Timing jitter from 10 ps to 2 ns.
        "fig1e" => Preset {
            kind: NoiseKind::TimingJitter,
            scale: DriftScale::Absolute,
            grid: parse_grid("1e-11:2e-9:log25")?,
            samples: 10_000,
        },
        // Op-mode shifts of 2π·(10 Hz … 100 kHz), in rad/s.
        "fig1g" => Preset {
            kind: NoiseKind::OpDrift,
            scale: DriftScale::Absolute,
            grid: parse_grid("1e1:1e5:log25")?
                .into_iter()
                .map(|f| TAU * f)
                .collect(),
            samples: 1,
        },
        // Common fractional shifts 10⁻⁵ … 10⁻¹.
        "figS3" => Preset {
            kind: NoiseKind::CommonDrift,
            scale: DriftScale::Fractional,
            grid: parse_grid("1e-5:1e-1:log25")?,
            samples: 1,
        },
        // Rep-rate drift of ±20 %.
        "figS4" => Preset {
            kind: NoiseKind::ReprateDrift,
            scale: DriftScale::Fractional,
            grid: parse_grid("-0.2:0.2:lin41")?,
            samples: 1,
        },
        other => {
            return Err(usage(format!(
                "unknown preset `{other}` (expected one of {})",
                PRESETS.join(", ")
            )))
        }
    };
    Ok(p)
}
