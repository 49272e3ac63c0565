//! Eigenvalues, averaging factors and normalization constants of the
//! continuous and discrete Laplacians on the torus.

use std::f64::consts::PI;

use nalgebra::DMatrix;

use crate::error::Result;
use crate::torus::{canonical_sign, frequency_set, FreqVector, GridShape, Sign, TorusSpec};

/// Eigen-data of one frequency on a discrete torus.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenData {
    pub z: FreqVector,
    pub lambda_cont: f64,
    pub lambda_disc: f64,
    pub theta: f64,
}

pub fn eigen_data(spec: &TorusSpec, z: &FreqVector) -> Result<EigenData> {
    spec.check_band(z)?;
    Ok(EigenData {
        lambda_cont: lambda_cont(z),
        lambda_disc: lambda_disc_unchecked(spec.side(), z),
        theta: theta_extended(spec.side(), z),
        z: z.clone(),
    })
}

/// Continuum eigenvalue `(2π|z|)²`.
pub fn lambda_cont(z: &FreqVector) -> f64 {
    4.0 * PI * PI * z.norm_sq()
}

/// Discrete eigenvalue `4L² Σ sin²(π z_k / L)` for in-band `z`.
pub fn lambda_disc(l: usize, z: &FreqVector) -> Result<f64> {
    TorusSpec::new(z.dim(), l)?.check_band(z)?;
    Ok(lambda_disc_unchecked(l, z))
}

pub(crate) fn lambda_disc_unchecked(l: usize, z: &FreqVector) -> f64 {
    let lf = l as f64;
    4.0 * lf
        * lf
        * z.coords()
            .iter()
            .map(|&c| {
                let s = (PI * c as f64 / lf).sin();
                s * s
            })
            .sum::<f64>()
}

/// Cube-averaging factor `Π_k (L / (π z_k)) sin(π z_k / L)` for in-band `z`.
pub fn theta(l: usize, z: &FreqVector) -> Result<f64> {
    TorusSpec::new(z.dim(), l)?.check_band(z)?;
    Ok(theta_extended(l, z))
}

/// Same product for arbitrary `z ∈ Z^n`. Vanishes when some nonzero `z_k` is a multiple of `L`.
pub fn theta_extended(l: usize, z: &FreqVector) -> f64 {
    let lf = l as f64;
    z.coords()
        .iter()
        .map(|&c| {
            if c == 0 {
                1.0
            } else if c % l as i64 == 0 {
                0.0
            } else {
                let t = PI * c as f64 / lf;
                t.sin() / t
            }
        })
        .product()
}

/// Real orthonormal eigenfunction `φ_z` evaluated at `x`.
pub fn eigenfunction(z: &FreqVector, x: &[f64]) -> f64 {
    let arg = 2.0 * PI * z.dot(x);
    match canonical_sign(z) {
        Sign::Zero => 1.0,
        Sign::Plus => std::f64::consts::SQRT_2 * arg.cos(),
        Sign::Minus => std::f64::consts::SQRT_2 * arg.sin(),
    }
}

/// `ln Γ(n/2)` for a positive integer `n`, by the exact half-integer recursion.
pub fn ln_gamma_half(n: usize) -> f64 {
    assert!(n >= 1);
    if n % 2 == 0 {
        (1..n / 2).map(|j| (j as f64).ln()).sum()
    } else {
        0.5 * PI.ln() + (0..(n - 1) / 2).map(|j| (j as f64 + 0.5).ln()).sum::<f64>()
    }
}

pub fn ln_ground_constant(n: usize) -> f64 {
    2f64.ln() - ln_gamma_half(n) - 0.5 * n as f64 * (4.0 * PI).ln()
}

/// `a_n = 2 / (Γ(n/2) (4π)^{n/2})`.
pub fn ground_constant(n: usize) -> f64 {
    ln_ground_constant(n).exp()
}

fn sum_ln_lambda_disc(spec: &TorusSpec) -> f64 {
    frequency_set(spec)
        .iter()
        .filter(|z| !z.is_zero())
        .map(|z| lambda_disc_unchecked(spec.side(), z).ln())
        .sum()
}

/// `ln c_n` with `c_n = (a_n / (2πN))^{(N-1)/2} Π_{z≠0} λ_{L,z}^{n/4}`.
pub fn log_partition_constant(spec: &TorusSpec) -> f64 {
    let n = spec.dim() as f64;
    let big_n = spec.size() as f64;
    0.5 * (big_n - 1.0) * (ln_ground_constant(spec.dim()) - (2.0 * PI).ln() - big_n.ln())
        + 0.25 * n * sum_ln_lambda_disc(spec)
}

/// Largest lattice for which the log-determinant is taken from an explicit matrix.
const DENSE_DET_LIMIT: usize = 1024;

/// `ln Π_{z≠0} λ_{L,z}`, computed as `ln det(-Δ_L + 11ᵀ/N)` by Cholesky on
/// small lattices so that it does not share code with the eigenvalue formula.
pub fn ln_det_grounded_laplacian(spec: &TorusSpec) -> f64 {
    let big_n = spec.size();
    if big_n > DENSE_DET_LIMIT {
        return sum_ln_lambda_disc(spec);
    }
    let shape = GridShape::from(*spec);
    let l = spec.side();
    let l2 = (l * l) as f64;
    let mut a = DMatrix::<f64>::from_element(big_n, big_n, 1.0 / big_n as f64);
    for v in 0..big_n {
        a[(v, v)] += 2.0 * spec.dim() as f64 * l2;
        let mi = shape.multi_index(v);
        for k in 0..spec.dim() {
            for step in [1, l - 1] {
                let mut nb = mi.clone();
                nb[k] = (nb[k] + step) % l;
                let u = nb.iter().fold(0, |acc, &c| acc * l + c);
                a[(v, u)] -= l2;
            }
        }
    }
    let chol = a.cholesky().expect("grounded Laplacian plus rank-one projector is SPD");
    2.0 * chol.l().diagonal().iter().map(|d| d.ln()).sum::<f64>()
}

/// `|ln c_n - ln det T̊ + (N-1)/2 ln(2πN)|`; zero up to rounding when the
/// partition constant normalizes the field law.
pub fn normalization_identity_residual(spec: &TorusSpec) -> f64 {
    let n = spec.dim() as f64;
    let big_n = spec.size() as f64;
    let ln_det_t = 0.5 * (big_n - 1.0) * ln_ground_constant(spec.dim())
        + 0.25 * n * ln_det_grounded_laplacian(spec);
    (log_partition_constant(spec) - ln_det_t + 0.5 * (big_n - 1.0) * (2.0 * PI * big_n).ln()).abs()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fv(c: &[i64]) -> FreqVector {
        FreqVector::new(c.to_vec())
    }

    #[test]
    fn eigenvalue_examples() {
        assert!((lambda_cont(&fv(&[1])) - 39.47841760435743).abs() < 1e-12);
        assert_eq!(lambda_cont(&fv(&[0, 0])), 0.0);
        assert!((lambda_cont(&fv(&[1, 1])) - 78.95683520871486).abs() < 1e-12);
        assert!((lambda_disc(3, &fv(&[1])).unwrap() - 27.0).abs() < 1e-12);
        let expect = 324.0 * (PI / 9.0).sin().powi(2);
        assert!((lambda_disc(9, &fv(&[1])).unwrap() - expect).abs() < 1e-12);
        assert!((expect - 37.9008).abs() < 1e-4);
        assert_eq!(lambda_disc(5, &fv(&[0, 0])).unwrap(), 0.0);
        assert!(lambda_disc(3, &fv(&[2])).is_err());
    }

    #[test]
    fn theta_examples() {
        let t = (3.0 / PI) * (PI / 3.0).sin();
        assert!((theta(3, &fv(&[1])).unwrap() - t).abs() < 1e-15);
        assert!((t - 0.8269933).abs() < 1e-7);
        assert_eq!(theta(3, &fv(&[0])).unwrap(), 1.0);
        assert!((theta(3, &fv(&[1, 0])).unwrap() - t).abs() < 1e-15);
        assert_eq!(theta_extended(3, &fv(&[3, 1])), 0.0);
    }

    #[test]
    fn eigenfunction_examples() {
        assert!(eigenfunction(&fv(&[1, 0]), &[0.25, 0.5]).abs() < 1e-15);
        assert_eq!(eigenfunction(&fv(&[0, 0]), &[0.3, 0.1]), 1.0);
        assert!((eigenfunction(&fv(&[0, -1]), &[0.0, 0.25]) + 1.4142136).abs() < 1e-7);
    }

    #[test]
    fn ground_constants() {
        assert!((ground_constant(1) - 1.0 / PI).abs() < 1e-15);
        assert!((ground_constant(2) - 1.0 / (2.0 * PI)).abs() < 1e-16);
        assert!((ground_constant(4) - 1.0 / (8.0 * PI * PI)).abs() < 1e-17);
        // Γ(3/2) = √π/2, so a_3 = 4 / (√π (4π)^{3/2})
        let a3 = 4.0 / (PI.sqrt() * (4.0 * PI).powf(1.5));
        assert!(((ground_constant(3) - a3) / a3).abs() < 1e-14);
    }

    #[test]
    fn partition_constant_small_case() {
        let spec = TorusSpec::new(1, 3).unwrap();
        // (a_1 / (6π)) · 27^{1/2}
        let direct = (1.0 / PI) / (6.0 * PI) * 27f64.sqrt();
        assert!((log_partition_constant(&spec).exp() - direct).abs() < 1e-15);
        assert!((direct - 0.0877467).abs() < 1e-7);
        assert!((log_partition_constant(&spec) + 2.43329).abs() < 2e-5);
    }

    #[test]
    fn normalization_residuals() {
        for (n, l) in [(1, 3), (1, 5), (2, 3), (2, 9), (3, 5)] {
            let spec = TorusSpec::new(n, l).unwrap();
            let r = normalization_identity_residual(&spec);
            assert!(r < 1e-10, "({n},{l}) residual {r}");
        }
    }

    #[test]
    fn dense_log_det_matches_spectral_sum() {
        let spec = TorusSpec::new(2, 5).unwrap();
        let dense = ln_det_grounded_laplacian(&spec);
        let spectral = sum_ln_lambda_disc(&spec);
        assert!((dense - spectral).abs() < 1e-9 * spectral.abs());
    }

    #[test]
    fn eigenvalue_ratio_and_theta_bounds() {
        let lo_ratio = (2.0 / PI).powi(2) - 1e-12;
        for n in 1..=3usize {
            let lo_theta = (2.0 / PI).powi(n as i32) - 1e-12;
            for l in [3usize, 5, 9, 27, 81] {
                if l.pow(n as u32) > 30_000 {
                    continue;
                }
                let spec = TorusSpec::new(n, l).unwrap();
                for z in frequency_set(&spec).into_iter().filter(|z| !z.is_zero()) {
                    let r = lambda_disc_unchecked(l, &z) / lambda_cont(&z);
                    assert!(r >= lo_ratio && r <= 1.0 + 1e-12, "{z:?} {r}");
                    let t = theta_extended(l, &z);
                    assert!(t >= lo_theta && t <= 1.0, "{z:?} {t}");
                    assert_eq!(lambda_disc_unchecked(l, &z), lambda_disc_unchecked(l, &z.neg()));
                    assert_eq!(t, theta_extended(l, &z.neg()));
                }
            }
        }
    }

    #[test]
    fn theta_increases_towards_one() {
        for n in 1..=3 {
            let z = FreqVector::new(vec![1; n]);
            let ts: Vec<f64> = [3, 9, 27, 81].iter().map(|&l| theta_extended(l, &z)).collect();
            assert!(ts.windows(2).all(|w| w[0] < w[1]));
            assert!(1.0 - ts[3] < 1e-3);
        }
    }
}
