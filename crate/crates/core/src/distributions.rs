//! Densities and samplers used by the node model and the noise simulator.

use std::f64::consts::PI;

use nalgebra::{Cholesky, Matrix3, SymmetricEigen, Vector3};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};
use crate::se2::wrap_angle;

/// Smallest eigenvalue allowed in a scale matrix.
pub const EIGEN_FLOOR: f64 = 1e-8;

/// Residual `x - location` with the heading component wrapped.
pub fn pose_residual(x: &Vector3<f64>, location: &Vector3<f64>) -> Vector3<f64> {
    Vector3::new(
        x[0] - location[0],
        x[1] - location[1],
        wrap_angle(x[2] - location[2]),
    )
}

/// Location, scale and degrees of freedom of a 3-d Student t belief over a pose.
#[derive(Clone, Debug, PartialEq)]
pub struct StudentTParams {
    pub location: Vector3<f64>,
    pub scale: Matrix3<f64>,
    pub dof: f64,
}

impl StudentTParams {
    pub fn new(location: Vector3<f64>, scale: Matrix3<f64>, dof: f64) -> Result<Self> {
        if !(dof > 0.0) {
            return Err(Error::InvalidParameter(format!("dof must be > 0, got {dof}")));
        }
        Ok(StudentTParams {
            location,
            scale,
            dof,
        })
    }

    /// Symmetrizes the scale and raises every eigenvalue to at least `floor`.
    pub fn floored(mut self, floor: f64) -> Self {
        self.scale = floor_eigenvalues(&self.scale, floor);
        self
    }
}

pub fn floor_eigenvalues(m: &Matrix3<f64>, floor: f64) -> Matrix3<f64> {
    let sym = (m + m.transpose()) * 0.5;
    let eig = SymmetricEigen::new(sym);
    if eig.eigenvalues.iter().all(|&v| v >= floor) {
        return sym;
    }
    let clamped = eig.eigenvalues.map(|v| v.max(floor));
    let out = eig.eigenvectors * Matrix3::from_diagonal(&clamped) * eig.eigenvectors.transpose();
    (out + out.transpose()) * 0.5
}

struct Whitened {
    mahalanobis: f64,
    log_det: f64,
}

fn whiten(delta: &Vector3<f64>, scale: &Matrix3<f64>) -> Result<Whitened> {
    let chol = Cholesky::new(*scale).ok_or(Error::NotPositiveDefinite)?;
    let l = chol.l();
    let log_det = 2.0 * (0..3).map(|i| l[(i, i)].ln()).sum::<f64>();
    if !log_det.is_finite() {
        return Err(Error::NotPositiveDefinite);
    }
    let solved = chol.solve(delta);
    Ok(Whitened {
        mahalanobis: delta.dot(&solved).max(0.0),
        log_det,
    })
}

/// `delta^T scale^{-1} delta`.
pub fn mahalanobis_sq(delta: &Vector3<f64>, scale: &Matrix3<f64>) -> Result<f64> {
    whiten(delta, scale).map(|w| w.mahalanobis)
}

/// Log-density of the 3-d multivariate t. The heading residual is wrapped.
pub fn mvt_logpdf(x: &Vector3<f64>, params: &StudentTParams) -> Result<f64> {
    let nu = params.dof;
    let w = whiten(&pose_residual(x, &params.location), &params.scale)?;
    Ok(ln_gamma((nu + 3.0) / 2.0) - ln_gamma(nu / 2.0)
        - 1.5 * (PI * nu).ln()
        - 0.5 * w.log_det
        - 0.5 * (nu + 3.0) * (w.mahalanobis / nu).ln_1p())
}

/// Log-density of the 3-d normal with the given mean and covariance.
pub fn mvn_logpdf(x: &Vector3<f64>, mean: &Vector3<f64>, cov: &Matrix3<f64>) -> Result<f64> {
    let w = whiten(&pose_residual(x, mean), cov)?;
    Ok(-1.5 * (2.0 * PI).ln() - 0.5 * w.log_det - 0.5 * w.mahalanobis)
}

/// Gamma distribution parameterized by its mean and shape.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GammaPrior {
    pub mean: f64,
    pub shape: f64,
}

impl GammaPrior {
    pub fn new(mean: f64, shape: f64) -> Result<Self> {
        if !(mean > 0.0) || !(shape > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "gamma prior needs mean > 0 and shape > 0, got mean={mean} shape={shape}"
            )));
        }
        Ok(GammaPrior { mean, shape })
    }
}

pub fn gamma_logpdf(w: f64, prior: &GammaPrior) -> Result<f64> {
    if !(w > 0.0) {
        return Err(Error::InvalidParameter(format!("gamma density needs w > 0, got {w}")));
    }
    let GammaPrior { mean, shape: k } = *prior;
    Ok(-ln_gamma(k) - k * (mean / k).ln() + (k - 1.0) * w.ln() - k * w / mean)
}

/// Pose noise distribution: Gaussian translation, von Mises heading.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    /// Per-axis standard deviation, meters.
    pub position_sigma: f64,
    /// Degrees.
    pub heading_sigma: f64,
    #[serde(default)]
    pub position_bias: [f64; 2],
    /// Degrees.
    #[serde(default)]
    pub heading_bias: f64,
}

impl NoiseSpec {
    pub const ZERO: NoiseSpec = NoiseSpec {
        position_sigma: 0.0,
        heading_sigma: 0.0,
        position_bias: [0.0, 0.0],
        heading_bias: 0.0,
    };

    pub fn unbiased(position_sigma: f64, heading_sigma: f64) -> Self {
        NoiseSpec {
            position_sigma,
            heading_sigma,
            ..NoiseSpec::ZERO
        }
    }

    /// Training-time weak noise: 0.01 m, 0.1 deg.
    pub fn weak() -> Self {
        NoiseSpec::unbiased(0.01, 0.1)
    }

    /// Training-time strong noise: 0.4 m, 4 deg.
    pub fn strong() -> Self {
        NoiseSpec::unbiased(0.4, 4.0)
    }

    /// Biased noise with the spread fixed at 0.1 m / 1 deg. The position bias
    /// is applied along the world x axis.
    pub fn biased(position_bias: f64, heading_bias: f64) -> Self {
        NoiseSpec {
            position_sigma: 0.1,
            heading_sigma: 1.0,
            position_bias: [position_bias, 0.0],
            heading_bias,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.position_sigma >= 0.0) || !(self.heading_sigma >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "noise sigmas must be >= 0, got {} m / {} deg",
                self.position_sigma, self.heading_sigma
            )));
        }
        Ok(())
    }
}

/// Von Mises concentration matching a small-angle standard deviation.
pub fn kappa_from_sigma(sigma_deg: f64) -> f64 {
    let s = sigma_deg.to_radians();
    1.0 / (s * s)
}

/// Draws a heading from a von Mises distribution centered at `mu` whose
/// spread corresponds to `sigma_deg`. A zero sigma returns `mu` (wrapped).
pub fn von_mises_sample<R: Rng + ?Sized>(mu: f64, sigma_deg: f64, rng: &mut R) -> f64 {
    if sigma_deg <= 0.0 {
        return wrap_angle(mu);
    }
    let kappa = kappa_from_sigma(sigma_deg);
    if kappa < 1e-8 {
        return wrap_angle(PI * (2.0 * rng.random::<f64>() - 1.0));
    }
    if kappa > 1e6 {
        // Best-Fisher loses precision here; the wrapped normal is exact to O(1/kappa).
        let z: f64 = rng.sample(StandardNormal);
        return wrap_angle(mu + z / kappa.sqrt());
    }
    // Best & Fisher (1979) rejection sampler.
    let r = 1.0 + (1.0 + 4.0 * kappa * kappa).sqrt();
    let rho = (r - (2.0 * r).sqrt()) / (2.0 * kappa);
    let s = (1.0 + rho * rho) / (2.0 * rho);
    let w = loop {
        let u: f64 = rng.random();
        let z = (PI * u).cos();
        let w = (1.0 + s * z) / (s + z);
        let y = kappa * (s - w);
        let v: f64 = rng.random();
        if y * (2.0 - y) - v > 0.0 || (y / v).ln() + 1.0 - y >= 0.0 {
            break w;
        }
    };
    let mut angle = w.clamp(-1.0, 1.0).acos();
    if rng.random::<f64>() < 0.5 {
        angle = -angle;
    }
    wrap_angle(mu + angle)
}

/// Samples a noise vector `(dx, dy, dtheta)` with `dtheta` in radians.
pub fn sample_pose_noise<R: Rng + ?Sized>(spec: &NoiseSpec, rng: &mut R) -> Vector3<f64> {
    let mut gauss = |bias: f64| {
        if spec.position_sigma > 0.0 {
            let z: f64 = rng.sample(StandardNormal);
            bias + spec.position_sigma * z
        } else {
            bias
        }
    };
    let dx = gauss(spec.position_bias[0]);
    let dy = gauss(spec.position_bias[1]);
    let dtheta = von_mises_sample(spec.heading_bias.to_radians(), spec.heading_sigma, rng);
    Vector3::new(dx, dy, dtheta)
}

/// Circular mean of a set of angles; `None` when the resultant vanishes.
pub fn circular_mean(angles: impl IntoIterator<Item = f64>) -> Option<f64> {
    let (s, c) = angles
        .into_iter()
        .fold((0.0, 0.0), |(s, c), a| (s + a.sin(), c + a.cos()));
    if s.hypot(c) < 1e-12 {
        None
    } else {
        Some(wrap_angle(s.atan2(c)))
    }
}
