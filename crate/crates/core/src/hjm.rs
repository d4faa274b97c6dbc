//! One-factor HJM term structure with predictable forward rates.
//!
//! Under the physical measure the forward rates carry the
//! evaluation-point drift correction `2 alpha^2 v^2`; no-arbitrage is the
//! usual restriction that the market price of risk does not depend on the
//! maturity. Under the risk-neutral measure the predictability parameter
//! drops out entirely: the drift is the standard `v(t,T) int_t^T v(t,u) du`.

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quad::simpson;
use crate::rng;
use crate::stratonovich::{Coeff, PathGrid};

/// Forward-curve model: initial curve on a uniform maturity grid, physical
/// drift `m(t,T)`, volatility `v(t,T) > 0` and the predictability
/// parameter `alpha`.
pub struct ForwardCurveModel {
    pub maturities: Vec<f64>,
    pub f0: Vec<f64>,
    pub drift: Box<Coeff>,
    pub vol: Box<Coeff>,
    pub alpha: f64,
}

impl ForwardCurveModel {
    pub fn validate(&self) -> Result<()> {
        if self.maturities.len() < 2 || self.maturities.len() != self.f0.len() {
            return Err(Error::Config("maturity grid and initial curve must align (len >= 2)".into()));
        }
        let h = self.maturities[1] - self.maturities[0];
        if !(h > 0.0) {
            return Err(Error::Config("maturity grid must be increasing".into()));
        }
        for w in self.maturities.windows(2) {
            if ((w[1] - w[0]) - h).abs() > 1e-9 * h {
                return Err(Error::Config("maturity grid must be uniform".into()));
            }
        }
        if !(0.0..=1.0).contains(&self.alpha) {
            return Err(Error::InvalidParameter(format!("alpha must lie in [0, 1], got {}", self.alpha)));
        }
        Ok(())
    }

    fn maturity_step(&self) -> f64 {
        self.maturities[1] - self.maturities[0]
    }

    /// Linear interpolation of the initial forward curve.
    pub fn f0_at(&self, u: f64) -> Result<f64> {
        interp(&self.maturities, &self.f0, u)
    }

    /// `int_t^T v(t, u) du` by composite Simpson with steps tied to the
    /// maturity-grid resolution (so refining the grid refines the rule).
    pub fn vol_integral(&self, t: f64, maturity: f64) -> f64 {
        if maturity <= t {
            return 0.0;
        }
        let h = self.maturity_step();
        let n = (((maturity - t) / h).ceil() as usize).max(1) * 2;
        simpson(|u| (self.vol)(t, u), t, maturity, n)
    }

    /// Market price of risk
    /// `theta(t,T) = (m + 2 alpha^2 v^2 - v int_t^T v du) / v`.
    /// No-arbitrage holds iff this is constant in `T`.
    pub fn market_price_of_risk(&self, t: f64, maturity: f64) -> Result<f64> {
        if maturity <= t {
            return Err(Error::InvalidParameter(format!("need t < T, got t = {t}, T = {maturity}")));
        }
        let v = (self.vol)(t, maturity);
        if !(v > 0.0) {
            return Err(Error::InvalidParameter(format!("volatility must be > 0, got {v}")));
        }
        let m = (self.drift)(t, maturity);
        Ok((m + 2.0 * self.alpha * self.alpha * v * v - v * self.vol_integral(t, maturity)) / v)
    }

    /// Checks maturity-independence of `theta` over a `(t, T)` grid;
    /// returns the verdict and the worst maturity spread found.
    pub fn check_no_arbitrage(&self, t_grid: &[f64], maturity_grid: &[f64], tol: f64) -> Result<NoArbitrageReport> {
        self.validate()?;
        let mut max_spread: f64 = 0.0;
        for &t in t_grid {
            let thetas: Vec<f64> = maturity_grid
                .iter()
                .filter(|&&m| m > t)
                .map(|&m| self.market_price_of_risk(t, m))
                .collect::<Result<_>>()?;
            if thetas.len() < 2 {
                continue;
            }
            let hi = thetas.iter().cloned().fold(f64::MIN, f64::max);
            let lo = thetas.iter().cloned().fold(f64::MAX, f64::min);
            max_spread = max_spread.max(hi - lo);
        }
        Ok(NoArbitrageReport { arbitrage_free: max_spread < tol, max_theta_spread: max_spread })
    }

    /// Euler simulation of the whole forward curve under the risk-neutral
    /// drift `v(t,T) int_t^T v(t,u) du`. The predictability parameter does
    /// not appear: it is absorbed by the measure change.
    pub fn simulate_risk_neutral(
        &self,
        grid: &PathGrid,
        n_paths: usize,
        seed: u64,
    ) -> Result<CurveEnsemble> {
        self.validate()?;
        let dt = grid.dt();
        // the drift and volatility fields are deterministic: tabulate them
        // once per (step, maturity) instead of per path
        let n_mat = self.maturities.len();
        let mut drift_tab = vec![vec![0.0; n_mat]; grid.steps];
        let mut vol_tab = vec![vec![0.0; n_mat]; grid.steps];
        for j in 0..grid.steps {
            let t = grid.time(j);
            for (idx, &m) in self.maturities.iter().enumerate() {
                if m <= t {
                    continue;
                }
                let v = (self.vol)(t, m);
                vol_tab[j][idx] = v;
                drift_tab[j][idx] = v * self.vol_integral(t, m) * dt;
            }
        }
        let paths: Vec<CurvePath> = (0..n_paths as u64)
            .into_par_iter()
            .map(|i| {
                let mut r = rng::stream(seed, i);
                let mut f = self.f0.clone();
                let mut short_rate_integral = 0.0;
                for j in 0..grid.steps {
                    let t = grid.time(j);
                    short_rate_integral += interp(&self.maturities, &f, t).unwrap_or(f64::NAN) * dt;
                    let z: f64 = r.sample(StandardNormal);
                    let db = dt.sqrt() * z;
                    for idx in 0..n_mat {
                        if self.maturities[idx] <= t {
                            continue;
                        }
                        f[idx] += drift_tab[j][idx] + vol_tab[j][idx] * db;
                    }
                    if f.iter().any(|x| !x.is_finite()) {
                        return CurvePath { terminal: f, short_rate_integral, diverged_at: Some(j) };
                    }
                }
                CurvePath { terminal: f, short_rate_integral, diverged_at: None }
            })
            .collect();
        Ok(CurveEnsemble { maturities: self.maturities.clone(), horizon: grid.horizon, paths })
    }

    /// Zero-coupon bond price off the initial curve:
    /// `exp(-int_0^T f(0,u) du)` (trapezoid, exact for the linear
    /// interpolation used throughout).
    pub fn bond_price_initial(&self, maturity: f64) -> Result<f64> {
        self.validate()?;
        let n = 2 * self.maturities.len().max(64);
        let h = maturity / n as f64;
        let mut acc = 0.0;
        for i in 0..n {
            let a = self.f0_at(i as f64 * h)?;
            let b = self.f0_at((i + 1) as f64 * h)?;
            acc += 0.5 * (a + b) * h;
        }
        Ok((-acc).exp())
    }

    /// Monte Carlo bond price `E^Q exp(-int_0^T f(s,s) ds)`; consistency
    /// with [`bond_price_initial`] is the HJM martingale property.
    pub fn bond_price_mc(
        &self,
        maturity: f64,
        steps: usize,
        n_paths: usize,
        seed: u64,
    ) -> Result<McBondPrice> {
        if maturity == 0.0 {
            return Ok(McBondPrice { price: 1.0, std_err: 0.0, n_diverged: 0 });
        }
        let grid = PathGrid::new(maturity, steps)?;
        let ens = self.simulate_risk_neutral(&grid, n_paths, seed)?;
        let ok: Vec<f64> = ens
            .paths
            .iter()
            .filter(|p| p.diverged_at.is_none())
            .map(|p| (-p.short_rate_integral).exp())
            .collect();
        if ok.is_empty() {
            return Err(Error::Numerical("all bond paths diverged".into()));
        }
        let n = ok.len();
        let mean = ok.iter().sum::<f64>() / n as f64;
        let var = ok.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1).max(1) as f64;
        Ok(McBondPrice {
            price: mean,
            std_err: (var / n as f64).sqrt(),
            n_diverged: n_paths - n,
        })
    }
}

fn interp(xs: &[f64], ys: &[f64], x: f64) -> Result<f64> {
    if x < xs[0] - 1e-12 || x > xs[xs.len() - 1] + 1e-12 {
        return Err(Error::Config(format!("maturity {x} outside curve range")));
    }
    let x = x.clamp(xs[0], xs[xs.len() - 1]);
    let idx = xs.partition_point(|&v| v <= x).min(xs.len() - 1).max(1);
    let (x0, x1) = (xs[idx - 1], xs[idx]);
    let w = (x - x0) / (x1 - x0);
    Ok(ys[idx - 1] * (1.0 - w) + ys[idx] * w)
}

/// Verdict of the maturity-independence check.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct NoArbitrageReport {
    pub arbitrage_free: bool,
    pub max_theta_spread: f64,
}

/// One simulated curve path.
#[derive(Debug, Clone)]
pub struct CurvePath {
    /// Forward curve at the horizon, on the model's maturity grid.
    pub terminal: Vec<f64>,
    /// `int_0^horizon f(s,s) ds` accumulated along the path.
    pub short_rate_integral: f64,
    pub diverged_at: Option<usize>,
}

/// Ensemble of simulated forward-curve paths.
#[derive(Debug, Clone)]
pub struct CurveEnsemble {
    pub maturities: Vec<f64>,
    pub horizon: f64,
    pub paths: Vec<CurvePath>,
}

impl CurveEnsemble {
    /// Mean terminal forward rate per maturity over non-diverged paths.
    pub fn mean_terminal_curve(&self) -> Vec<f64> {
        let ok: Vec<&CurvePath> = self.paths.iter().filter(|p| p.diverged_at.is_none()).collect();
        let n = ok.len().max(1) as f64;
        (0..self.maturities.len())
            .map(|i| ok.iter().map(|p| p.terminal[i]).sum::<f64>() / n)
            .collect()
    }
}

/// Monte Carlo bond-price estimate.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct McBondPrice {
    pub price: f64,
    pub std_err: f64,
    pub n_diverged: usize,
}

/// Ho-Lee-style construction whose physical drift absorbs both the
/// predictability correction and the no-arbitrage restriction:
/// `m(t,T) = theta0 v0 - 2 alpha^2 v0^2 + v0^2 (T - t)` yields
/// `theta(t,T) = theta0` for every maturity.
pub fn ho_lee_model(v0: f64, theta0: f64, alpha: f64, flat_f0: f64, t_max: f64, n_mat: usize) -> ForwardCurveModel {
    let h = t_max / (n_mat - 1) as f64;
    ForwardCurveModel {
        maturities: (0..n_mat).map(|i| i as f64 * h).collect(),
        f0: vec![flat_f0; n_mat],
        drift: Box::new(move |t, m| theta0 * v0 - 2.0 * alpha * alpha * v0 * v0 + v0 * v0 * (m - t)),
        vol: Box::new(move |_, _| v0),
        alpha,
    }
}

/// Constant-drift, constant-volatility model; maturity-dependent `theta`
/// (an arbitrage) unless the drift happens to satisfy the restriction.
pub fn constant_model(v0: f64, m0: f64, alpha: f64, flat_f0: f64, t_max: f64, n_mat: usize) -> ForwardCurveModel {
    let h = t_max / (n_mat - 1) as f64;
    ForwardCurveModel {
        maturities: (0..n_mat).map(|i| i as f64 * h).collect(),
        f0: vec![flat_f0; n_mat],
        drift: Box::new(move |_, _| m0),
        vol: Box::new(move |_, _| v0),
        alpha,
    }
}
