use num_complex::Complex;

use crate::error::{usage, Error, Result};

const TAIL_TOLERANCE: f64 = 1e-12;
const MAX_CUTOFF: usize = 1 << 22;

/// max(200, 20(n̄+1)).
pub fn default_fock_cutoff(nbar: f64) -> usize {
    200usize.max((20.0 * (nbar + 1.0)).ceil() as usize)
}

/// Thermal average of D(β) by explicit Fock-space summation of e^{−|β|²/2} L_n(|β|²).
///
/// Fails when the discarded thermal tail (n̄/(n̄+1))^n_trunc exceeds 1e−12.
pub fn thermal_displacement_expectation(
    beta: Complex<f64>,
    nbar: f64,
    n_trunc: usize,
) -> Result<Complex<f64>> {
    if n_trunc < 1 {
        return Err(usage("Fock cutoff must be at least 1"));
    }
    if !(nbar >= 0.0) {
        return Err(usage("thermal occupancy must be nonnegative"));
    }
    let r = nbar / (nbar + 1.0);
    let tail = r.powi(n_trunc.min(i32::MAX as usize) as i32);
    if tail > TAIL_TOLERANCE {
        return Err(Error::Convergence(format!(
            "thermal tail {tail:.3e} beyond Fock cutoff {n_trunc}"
        )));
    }
    let x = beta.norm_sqr();
    let mut p = 1.0 / (nbar + 1.0);
    let (mut l_prev, mut l) = (0.0, 1.0);
    let mut sum = 0.0;
    for n in 0..n_trunc {
        sum += p * l;
        let next =
            ((2 * n + 1) as f64 - x) * l / (n + 1) as f64 - n as f64 * l_prev / (n + 1) as f64;
        l_prev = l;
        l = next;
        p *= r;
        if p == 0.0 {
            break;
        }
    }
    Ok(Complex::new((-0.5 * x).exp() * sum, 0.0))
}

/// As [`thermal_displacement_expectation`], starting at the default cutoff and doubling until converged.
pub fn thermal_displacement_expectation_auto(
    beta: Complex<f64>,
    nbar: f64,
) -> Result<Complex<f64>> {
    let mut n = default_fock_cutoff(nbar);
    loop {
        match thermal_displacement_expectation(beta, nbar, n) {
            Err(Error::Convergence(_)) if n < MAX_CUTOFF => n *= 2,
            other => return other,
        }
    }
}
