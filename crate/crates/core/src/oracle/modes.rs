use crate::error::{domain, Error, Result};
use crate::ion_physics::{TrapSetup, COULOMB_E2};

/// Mode frequencies and mass-weighted eigenvectors from direct diagonalization.
#[derive(Clone, Debug, PartialEq)]
pub struct ModeStructure {
    /// Ascending angular frequencies (ip, op).
    pub omega: [f64; 2],
    /// `b[mode][ion]`, ip components positive, op first component positive.
    pub b: [[f64; 2]; 2],
    /// Ion separation at equilibrium (m).
    pub separation: f64,
}

/// Cyclic Jacobi diagonalization of a symmetric matrix: ascending eigenvalues and
/// eigenvectors as columns of the returned matrix.
pub fn jacobi_eigen<const N: usize>(mut a: [[f64; N]; N]) -> ([f64; N], [[f64; N]; N]) {
    let mut v = [[0.0; N]; N];
    for (i, row) in v.iter_mut().enumerate() {
        row[i] = 1.0;
    }
    for _ in 0..64 {
        let off: f64 = (0..N)
            .flat_map(|i| (0..N).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[i][j] * a[i][j])
            .sum();
        if off == 0.0 {
            break;
        }
        for p in 0..N {
            for q in (p + 1)..N {
                if a[p][q] == 0.0 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..N {
                    let (akp, akq) = (a[k][p], a[k][q]);
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..N {
                    let (apk, aqk) = (a[p][k], a[q][k]);
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
                for row in v.iter_mut() {
                    let (vp, vq) = (row[p], row[q]);
                    row[p] = c * vp - s * vq;
                    row[q] = s * vp + c * vq;
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..N).collect();
    order.sort_by(|&i, &j| a[i][i].total_cmp(&a[j][j]));
    let mut vals = [0.0; N];
    let mut vecs = [[0.0; N]; N];
    for (col, &i) in order.iter().enumerate() {
        vals[col] = a[i][i];
        for r in 0..N {
            vecs[r][col] = v[r][i];
        }
    }
    (vals, vecs)
}

/// Axial modes from the Hessian of ½k(x₁² + x₂²) + e²/(4πε₀|x₂ − x₁|) at equilibrium,
/// with the common spring constant k = m₁ω₀².
pub fn brute_force_modes(setup: &TrapSetup) -> Result<ModeStructure> {
    setup.validate()?;
    let (m1, m2) = (setup.ion1.mass, setup.ion2.mass);
    let k = m1 * setup.omega0_ion1.powi(2);
    // Force balance on ion 2 at x₂ = d/2: k·d/2 = C/d², solved by Newton iteration.
    let mut d = (2.0 * COULOMB_E2 / k).cbrt() * 1.3;
    for _ in 0..200 {
        let g = 0.5 * k * d - COULOMB_E2 / (d * d);
        let dg = 0.5 * k + 2.0 * COULOMB_E2 / (d * d * d);
        let step = g / dg;
        d -= step;
        if step.abs() <= 1e-17 * d {
            break;
        }
    }
    if !(d > 0.0) {
        return Err(Error::Convergence("equilibrium separation".into()));
    }
    let c = 2.0 * COULOMB_E2 / (d * d * d);
    let h = [[k + c, -c], [-c, k + c]];
    let w = [
        [h[0][0] / m1, h[0][1] / (m1 * m2).sqrt()],
        [h[1][0] / (m1 * m2).sqrt(), h[1][1] / m2],
    ];
    let (vals, vecs) = jacobi_eigen(w);
    if vals[0] <= 0.0 {
        return Err(domain("unstable crystal"));
    }
    let mut b = [[vecs[0][0], vecs[1][0]], [vecs[0][1], vecs[1][1]]];
    if b[0][0] < 0.0 {
        b[0] = [-b[0][0], -b[0][1]];
    }
    if b[1][0] < 0.0 {
        b[1] = [-b[1][0], -b[1][1]];
    }
    Ok(ModeStructure {
        omega: [vals[0].sqrt(), vals[1].sqrt()],
        b,
        separation: d,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ion_physics::normal_modes;

    #[test]
    fn jacobi_diagonalizes_3x3() {
        let a = [[4.0, 1.0, 0.5], [1.0, 3.0, 0.2], [0.5, 0.2, 1.0]];
        let (vals, v) = jacobi_eigen(a);
        for c in 0..3 {
            for r in 0..3 {
                let av: f64 = (0..3).map(|k| a[r][k] * v[k][c]).sum();
                assert!((av - vals[c] * v[r][c]).abs() < 1e-13);
            }
        }
        assert!(vals[0] < vals[1] && vals[1] < vals[2]);
    }

    #[test]
    fn agrees_with_analytic_for_builtin_pairs() {
        for pair in crate::ion_physics::BUILTIN_PAIRS {
            let setup = TrapSetup::builtin_pair(pair).unwrap();
            let o = brute_force_modes(&setup).unwrap();
            let a = normal_modes::<f64>(&setup).unwrap();
            for m in 0..2 {
                assert!((o.omega[m] / a.omega[m] - 1.0).abs() < 1e-12, "{pair}");
                for j in 0..2 {
                    assert!((o.b[m][j] - a.b[m][j]).abs() < 1e-12, "{pair}");
                }
            }
        }
    }
}
