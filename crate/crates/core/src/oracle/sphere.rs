use std::f64::consts::PI;

use crate::error::{usage, Result};

/// Gauss–Legendre nodes and weights on [−1, 1].
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..(n + 1) / 2 {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuadratureEstimate {
    pub value: f64,
    /// |I(2n) − I(n)|.
    pub error: f64,
}

fn integrate(f: &impl Fn([f64; 4]) -> f64, n: usize) -> f64 {
    let (x, w) = gauss_legendre(n);
    let polar: Vec<(f64, f64, f64)> = x
        .iter()
        .zip(&w)
        .map(|(&x, &w)| {
            let th = 0.5 * PI * (x + 1.0);
            (th.sin(), th.cos(), 0.5 * PI * w)
        })
        .collect();
    let m = 2 * n;
    let mut total = 0.0;
    for &(s1, c1, w1) in &polar {
        for &(s2, c2, w2) in &polar {
            let mut inner = 0.0;
            for k in 0..m {
                let th3 = 2.0 * PI * k as f64 / m as f64;
                let (s3, c3) = th3.sin_cos();
                let p = [
                    s1 * s1 * s2 * s2 * s3 * s3,
                    s1 * s1 * s2 * s2 * c3 * c3,
                    s1 * s1 * c2 * c2,
                    c1 * c1,
                ];
                inner += f(p);
            }
            total += w1 * w2 * s1 * s1 * s2 * inner * (2.0 * PI / m as f64);
        }
    }
    total / (2.0 * PI * PI)
}

/// Average of a population functional over the real unit 3-sphere.
///
/// `f` receives populations (P↑↑, P↑↓, P↓↑, P↓↓) with P↓↓ = cos²θ₁, P↓↑ = sin²θ₁cos²θ₂,
/// P↑↓ = sin²θ₁sin²θ₂cos²θ₃, P↑↑ = sin²θ₁sin²θ₂sin²θ₃ and measure sin²θ₁ sinθ₂.
pub fn average_over_3sphere(
    f: impl Fn([f64; 4]) -> f64,
    quadrature_order: usize,
) -> Result<QuadratureEstimate> {
    if quadrature_order < 8 {
        return Err(usage("quadrature order must be at least 8"));
    }
    let coarse = integrate(&f, quadrature_order);
    let fine = integrate(&f, 2 * quadrature_order);
    Ok(QuadratureEstimate {
        value: fine,
        error: (fine - coarse).abs(),
    })
}
