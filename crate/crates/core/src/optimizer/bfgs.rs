//! Dense quasi-Newton minimization with optional box constraints.

/// Per-coordinate box; `None` means unconstrained.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Bounds {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl Bounds {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Self {
        Self { lower, upper }
    }

    fn project(&self, x: &mut [f64]) {
        for (i, xi) in x.iter_mut().enumerate() {
            *xi = xi.max(self.lower[i]).min(self.upper[i]);
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BfgsOptions {
    pub max_iter: usize,
    /// Stop when the projected gradient's max-norm falls below this.
    pub gtol: f64,
    /// Stop after `patience` consecutive iterations improving f by less than ftol·(1+|f|).
    pub ftol: f64,
    pub patience: usize,
    /// Stop as soon as f drops below this value.
    pub f_target: f64,
}

impl Default for BfgsOptions {
    fn default() -> Self {
        Self {
            max_iter: 500,
            gtol: 1e-12,
            ftol: 1e-14,
            patience: 5,
            f_target: f64::NEG_INFINITY,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BfgsReport {
    pub x: Vec<f64>,
    pub f: f64,
    pub iterations: usize,
    pub evaluations: usize,
    pub converged: bool,
    /// f after each accepted step, starting with the initial value.
    pub history: Vec<f64>,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

const BOUND_EPS: f64 = 1e-12;

fn active_set(x: &[f64], g: &[f64], bounds: Option<&Bounds>) -> Vec<bool> {
    match bounds {
        None => vec![false; x.len()],
        Some(b) => (0..x.len())
            .map(|i| {
                let span = BOUND_EPS * (1.0 + x[i].abs());
                (x[i] <= b.lower[i] + span && g[i] > 0.0)
                    || (x[i] >= b.upper[i] - span && g[i] < 0.0)
            })
            .collect(),
    }
}

/// Minimize `fg` (returning value and gradient) from `x0`.
///
/// Free coordinates follow the BFGS direction; coordinates pinned at a bound with an
/// outward gradient are held fixed and the inverse Hessian is reset whenever that set
/// changes. Steps are projected onto the box and accepted by Armijo backtracking. The
/// best point seen is returned, so the result never exceeds f(x0).
pub fn minimize(
    mut fg: impl FnMut(&[f64], &mut [f64]) -> f64,
    x0: &[f64],
    bounds: Option<&Bounds>,
    opts: &BfgsOptions,
) -> BfgsReport {
    let n = x0.len();
    let mut x = x0.to_vec();
    if let Some(b) = bounds {
        b.project(&mut x);
    }
    let mut g = vec![0.0; n];
    let mut f = fg(&x, &mut g);
    let mut evaluations = 1;
    let mut history = vec![f];
    let identity = |h: &mut Vec<f64>, scale: f64| {
        h.iter_mut().for_each(|v| *v = 0.0);
        for i in 0..n {
            h[i * n + i] = scale;
        }
    };
    let mut h = vec![0.0; n * n];
    identity(&mut h, 1.0);
    let mut fresh = true;
    let mut active = active_set(&x, &g, bounds);
    let mut stall = 0;
    let mut converged = false;
    let mut iterations = 0;
    let mut g_new = vec![0.0; n];
    let mut d = vec![0.0; n];
    let mut x_new = vec![0.0; n];

    while iterations < opts.max_iter {
        if !f.is_finite() {
            break;
        }
        let pg = (0..n)
            .filter(|&i| !active[i])
            .map(|i| g[i].abs())
            .fold(0.0, f64::max);
        if pg <= opts.gtol || f <= opts.f_target {
            converged = true;
            break;
        }
        iterations += 1;
        for i in 0..n {
            d[i] = if active[i] {
                0.0
            } else {
                -(0..n)
                    .filter(|&j| !active[j])
                    .map(|j| h[i * n + j] * g[j])
                    .sum::<f64>()
            };
        }
        if dot(&d, &g) >= 0.0 {
            identity(&mut h, 1.0);
            fresh = true;
            for i in 0..n {
                d[i] = if active[i] { 0.0 } else { -g[i] };
            }
        }
        let mut alpha = 1.0;
        let mut accepted = false;
        let mut f_new = f;
        for _ in 0..60 {
            for i in 0..n {
                x_new[i] = x[i] + alpha * d[i];
            }
            if let Some(b) = bounds {
                b.project(&mut x_new);
            }
            let step: Vec<f64> = x_new.iter().zip(&x).map(|(a, b)| a - b).collect();
            let decrease = dot(&g, &step);
            if decrease >= 0.0 {
                alpha *= 0.5;
                continue;
            }
            f_new = fg(&x_new, &mut g_new);
            evaluations += 1;
            if f_new.is_finite() && f_new <= f + 1e-4 * decrease {
                accepted = true;
                break;
            }
            alpha *= 0.5;
        }
        if !accepted {
            if fresh {
                converged = true;
                break;
            }
            identity(&mut h, 1.0);
            fresh = true;
            continue;
        }
        let s: Vec<f64> = x_new.iter().zip(&x).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = g_new.iter().zip(&g).map(|(a, b)| a - b).collect();
        let improvement = f - f_new;
        x.copy_from_slice(&x_new);
        g.copy_from_slice(&g_new);
        f = f_new;
        history.push(f);

        let new_active = active_set(&x, &g, bounds);
        let sy = dot(&s, &y);
        if new_active != active {
            identity(&mut h, 1.0);
            fresh = true;
        } else if sy > 1e-300 && sy > 1e-12 * dot(&s, &s).sqrt() * dot(&y, &y).sqrt() {
            if fresh {
                identity(&mut h, sy / dot(&y, &y));
                fresh = false;
            }
            let rho = 1.0 / sy;
            let hy: Vec<f64> = (0..n)
                .map(|i| (0..n).map(|j| h[i * n + j] * y[j]).sum())
                .collect();
            let yhy = dot(&y, &hy);
            for i in 0..n {
                for j in 0..n {
                    h[i * n + j] += -rho * (hy[i] * s[j] + s[i] * hy[j])
                        + (rho * rho * yhy + rho) * s[i] * s[j];
                }
            }
        }
        active = new_active;

        if improvement <= opts.ftol * (1.0 + f.abs()) {
            stall += 1;
            if stall >= opts.patience {
                converged = true;
                break;
            }
        } else {
            stall = 0;
        }
    }
    BfgsReport {
        x,
        f,
        iterations,
        evaluations,
        converged,
        history,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rosenbrock(x: &[f64], g: &mut [f64]) -> f64 {
        let (a, b) = (x[0], x[1]);
        g[0] = -2.0 * (1.0 - a) - 400.0 * a * (b - a * a);
        g[1] = 200.0 * (b - a * a);
        (1.0 - a).powi(2) + 100.0 * (b - a * a).powi(2)
    }

    #[test]
    fn solves_rosenbrock() {
        let r = minimize(
            rosenbrock,
            &[-1.2, 1.0],
            None,
            &BfgsOptions {
                max_iter: 2000,
                ..Default::default()
            },
        );
        assert!(r.f < 1e-14, "{r:?}");
        assert!((r.x[0] - 1.0).abs() < 1e-6 && (r.x[1] - 1.0).abs() < 1e-6);
        assert!(r.history.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn respects_bounds() {
        let quad = |x: &[f64], g: &mut [f64]| {
            g[0] = 2.0 * (x[0] - 3.0);
            g[1] = 2.0 * (x[1] + 1.0);
            (x[0] - 3.0).powi(2) + (x[1] + 1.0).powi(2)
        };
        let b = Bounds::new(vec![-2.0, -2.0], vec![2.0, 2.0]);
        let r = minimize(quad, &[0.0, 0.0], Some(&b), &BfgsOptions::default());
        assert!(
            (r.x[0] - 2.0).abs() < 1e-12 && (r.x[1] + 1.0).abs() < 1e-8,
            "{r:?}"
        );
    }
}
