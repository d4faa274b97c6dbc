//! Normal-Inverse-Gaussian distribution toolkit: density, characteristic
//! function, exponential moments, closed-form moments, exact sampling and
//! method-of-moments fitting.
//!
//! The NIG law `NIG(mu, alpha, beta, delta)` is a normal mean-variance
//! mixture over an inverse-Gaussian subordinator. It has semi-heavy tails
//! and contains the normal `N(mu, sigma^2)` as the limit `beta = 0`,
//! `delta = sigma^2 * alpha`, `alpha -> inf`.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng;
use crate::special::bessel_k1_scaled;

/// Parameters of a NIG law. Invariants: `alpha > 0`, `delta > 0`,
/// `alpha^2 > beta^2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NigParams {
    /// Location.
    pub mu: f64,
    /// Tail heaviness (steepness), `alpha > 0`.
    pub alpha: f64,
    /// Asymmetry, `|beta| < alpha`.
    pub beta: f64,
    /// Scale, `delta > 0`.
    pub delta: f64,
}

/// First four moments of a NIG law in closed form.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NigMoments {
    pub mean: f64,
    pub variance: f64,
    pub skewness: f64,
    pub excess_kurtosis: f64,
}

impl NigParams {
    pub fn new(mu: f64, alpha: f64, beta: f64, delta: f64) -> Result<Self> {
        let p = NigParams { mu, alpha, beta, delta };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.mu.is_finite() && self.alpha.is_finite() && self.beta.is_finite() && self.delta.is_finite()) {
            return Err(Error::InvalidParameter("NIG parameters must be finite".into()));
        }
        if self.alpha <= 0.0 {
            return Err(Error::InvalidParameter(format!("NIG requires alpha > 0, got {}", self.alpha)));
        }
        if self.delta <= 0.0 {
            return Err(Error::InvalidParameter(format!("NIG requires delta > 0, got {}", self.delta)));
        }
        if self.alpha * self.alpha <= self.beta * self.beta {
            return Err(Error::InvalidParameter(format!(
                "NIG requires alpha^2 > beta^2, got alpha = {}, beta = {}",
                self.alpha, self.beta
            )));
        }
        Ok(())
    }

    /// `sqrt(alpha^2 - beta^2)`.
    pub fn gamma(&self) -> f64 {
        (self.alpha * self.alpha - self.beta * self.beta).sqrt()
    }

    /// Density at `x`. Positive for every finite `x` until the exponent
    /// falls below f64 underflow (around exp(-745)).
    pub fn pdf(&self, x: f64) -> f64 {
        let d = x - self.mu;
        let s = (self.delta * self.delta + d * d).sqrt();
        let arg = self.alpha * s;
        // exp-scaled K1 keeps the Bessel factor representable; the combined
        // exponent delta*gamma + beta*d - alpha*s <= 0 decays like
        // -(alpha - |beta|)|d| in the tails.
        let expo = self.delta * self.gamma() + self.beta * d - arg;
        self.alpha * self.delta * bessel_k1_scaled(arg) / (std::f64::consts::PI * s) * expo.exp()
    }

    /// Characteristic function `E e^{itX}`.
    pub fn cf(&self, t: f64) -> Complex64 {
        let a2 = self.alpha * self.alpha;
        let shifted = Complex64::new(self.beta, t);
        let root = (Complex64::new(a2, 0.0) - shifted * shifted).sqrt();
        let inner = Complex64::new(0.0, self.mu * t) + self.delta * (self.gamma() - root);
        inner.exp()
    }

    /// `ln E[e^{sX}]`, defined for `(beta + s)^2 < alpha^2`.
    pub fn log_exp_moment(&self, s: f64) -> Result<f64> {
        let shifted = self.beta + s;
        let rad = self.alpha * self.alpha - shifted * shifted;
        if rad <= 0.0 {
            return Err(Error::MomentNonexistent {
                exponent: s,
                alpha: self.alpha,
                beta: self.beta,
            });
        }
        Ok(self.mu * s + self.delta * (self.gamma() - rad.sqrt()))
    }

    /// `E[e^{sX}]`. Computed in log space and exponentiated at the end.
    pub fn exp_moment(&self, s: f64) -> Result<f64> {
        Ok(self.log_exp_moment(s)?.exp())
    }

    /// Mean, variance, skewness and excess kurtosis in closed form.
    pub fn moments(&self) -> NigMoments {
        let g = self.gamma();
        let a2 = self.alpha * self.alpha;
        let b2 = self.beta * self.beta;
        NigMoments {
            mean: self.mu + self.delta * self.beta / g,
            variance: self.delta * a2 / g.powi(3),
            skewness: 3.0 * self.beta / (self.alpha * self.delta.sqrt() * (a2 - b2).powf(0.25)),
            excess_kurtosis: 3.0 * (1.0 + 4.0 * b2 / a2) / (self.delta * g),
        }
    }

    /// `n` exact draws, deterministic given `seed`. Normal mean-variance
    /// mixture: `X = mu + beta W + sqrt(W) Z` with `W` inverse-Gaussian of
    /// mean `delta/gamma` and shape `delta^2`.
    pub fn sample(&self, n: usize, seed: u64) -> Vec<f64> {
        let mut r = rng::single(seed);
        self.sample_with(n, &mut r)
    }

    /// As [`sample`](Self::sample) but drawing from a caller-owned stream.
    pub fn sample_with<R: Rng>(&self, n: usize, r: &mut R) -> Vec<f64> {
        let mean = self.delta / self.gamma();
        let shape = self.delta * self.delta;
        (0..n)
            .map(|_| {
                let w = inverse_gaussian(r, mean, shape);
                let z: f64 = r.sample(StandardNormal);
                self.mu + self.beta * w + w.sqrt() * z
            })
            .collect()
    }

    /// Parameters of the NIG law approximating `N(mu, sigma2)`:
    /// `(mu, alpha, 0, sigma2 * alpha)`. The variance is `sigma2` exactly;
    /// the excess kurtosis `3 / (sigma2 * alpha^2)` vanishes as
    /// `alpha -> inf`.
    pub fn gaussian_limit(sigma2: f64, mu: f64, alpha: f64) -> Result<Self> {
        if sigma2 <= 0.0 {
            return Err(Error::InvalidParameter(format!("sigma2 must be > 0, got {sigma2}")));
        }
        NigParams::new(mu, alpha, 0.0, sigma2 * alpha)
    }

    /// Method-of-moments fit: matches sample mean, variance, skewness and
    /// excess kurtosis by analytic reduction. Requires
    /// `3 * kurtosis > 5 * skewness^2` (with kurtosis > 0) for a NIG
    /// solution to exist.
    pub fn fit_moments(sample: &[f64]) -> Result<Self> {
        if sample.len() < 4 {
            return Err(Error::FitInfeasible(format!(
                "need at least 4 observations, got {}",
                sample.len()
            )));
        }
        let n = sample.len() as f64;
        let mean = sample.iter().sum::<f64>() / n;
        let mut m2 = 0.0;
        let mut m3 = 0.0;
        let mut m4 = 0.0;
        for &x in sample {
            let d = x - mean;
            m2 += d * d;
            m3 += d * d * d;
            m4 += d * d * d * d;
        }
        m2 /= n;
        m3 /= n;
        m4 /= n;
        if m2 <= 0.0 {
            return Err(Error::FitInfeasible("sample variance is zero".into()));
        }
        let skew = m3 / m2.powf(1.5);
        let exkurt = m4 / (m2 * m2) - 3.0;
        if exkurt <= 0.0 {
            return Err(Error::FitInfeasible(format!(
                "sample excess kurtosis must be positive, got {exkurt}"
            )));
        }
        if 3.0 * exkurt <= 5.0 * skew * skew {
            return Err(Error::FitInfeasible(format!(
                "feasibility 3*kurtosis > 5*skewness^2 violated: kurtosis = {exkurt}, skewness = {skew}"
            )));
        }
        // analytic reduction with r = beta/alpha:
        //   skew^2 / (3 kurt) = r^2 / (1 + 4 r^2)  =>  r^2 = q / (1 - 4q)
        let q = skew * skew / (3.0 * exkurt);
        let r2 = q / (1.0 - 4.0 * q);
        let r = skew.signum() * r2.sqrt();
        let delta_gamma = 3.0 * (1.0 + 4.0 * r2) / exkurt;
        let gamma2 = delta_gamma / (m2 * (1.0 - r2));
        let gamma = gamma2.sqrt();
        let delta = delta_gamma / gamma;
        let alpha = gamma / (1.0 - r2).sqrt();
        let beta = r * alpha;
        let mu = mean - delta * beta / gamma;
        NigParams::new(mu, alpha, beta, delta)
    }
}

/// Michael-Schucany-Haas transform: exact inverse-Gaussian draw.
fn inverse_gaussian<R: Rng>(r: &mut R, mean: f64, shape: f64) -> f64 {
    let z: f64 = r.sample(StandardNormal);
    let v = z * z;
    let w = mean + mean * mean * v / (2.0 * shape)
        - mean / (2.0 * shape) * (4.0 * mean * shape * v + mean * mean * v * v).sqrt();
    let w = w.max(1e-300); // guard roundoff for tiny v
    let u: f64 = r.gen();
    if u <= mean / (mean + w) {
        w
    } else {
        mean * mean / w
    }
}
