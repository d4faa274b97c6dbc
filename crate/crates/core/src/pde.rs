//! Finite-difference pricer for European claims on a stock whose price is
//! predictable.
//!
//! When the market follows the alpha-point dynamics and the hedging trader
//! evaluates at gamma, the excess predictability `rho = gamma - alpha`
//! enters the hedging PDE only through an effective dividend yield
//! `D_y(t,x) = 2 rho (gamma + alpha) v (v_x x + v)`; at `rho = 0` the PDE
//! is classical Black-Scholes. The solver is theta-weighted implicit
//! (Crank-Nicolson by default) with Rannacher startup and a tridiagonal
//! solve per time step.

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng;
use crate::special::norm_cdf;
use crate::stratonovich::{Coeff, PathGrid};

/// Terminal payoff of the claim.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Payoff {
    Call { strike: f64 },
    Put { strike: f64 },
    /// Identically zero payoff (useful to test linearity).
    Zero { strike: f64 },
}

impl Payoff {
    pub fn strike(&self) -> f64 {
        match *self {
            Payoff::Call { strike } | Payoff::Put { strike } | Payoff::Zero { strike } => strike,
        }
    }

    pub fn value(&self, x: f64) -> f64 {
        match *self {
            Payoff::Call { strike } => (x - strike).max(0.0),
            Payoff::Put { strike } => (strike - x).max(0.0),
            Payoff::Zero { .. } => 0.0,
        }
    }
}

/// Pricing problem: proportional volatility `v(t,x)`, its state derivative,
/// short rate `r(t,x)`, the market/trader evaluation-point parameters and
/// the claim.
pub struct PredictableOptionProblem {
    pub vol: Box<Coeff>,
    pub vol_dx: Box<Coeff>,
    pub rate: Box<Coeff>,
    /// Market predictability parameter `alpha` in [0, 1].
    pub alpha_market: f64,
    /// Trader predictability parameter `gamma` in [0, 1].
    pub gamma_trader: f64,
    pub payoff: Payoff,
    pub maturity: f64,
    pub spot: f64,
}

impl PredictableOptionProblem {
    /// Constant-coefficient problem, the workhorse for oracle checks.
    pub fn constant(
        spot: f64,
        payoff: Payoff,
        rate: f64,
        vol: f64,
        maturity: f64,
        gamma_trader: f64,
        alpha_market: f64,
    ) -> Self {
        PredictableOptionProblem {
            vol: Box::new(move |_, _| vol),
            vol_dx: Box::new(|_, _| 0.0),
            rate: Box::new(move |_, _| rate),
            alpha_market,
            gamma_trader,
            payoff,
            maturity,
            spot,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("alpha", self.alpha_market), ("gamma", self.gamma_trader)] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::InvalidParameter(format!("{name} must lie in [0, 1], got {v}")));
            }
        }
        if !(self.maturity > 0.0) {
            return Err(Error::InvalidParameter("maturity must be > 0".into()));
        }
        if !(self.spot > 0.0) {
            return Err(Error::InvalidParameter("spot must be > 0".into()));
        }
        Ok(())
    }

    /// Excess predictability `rho = gamma - alpha`.
    pub fn excess_predictability(&self) -> f64 {
        self.gamma_trader - self.alpha_market
    }

    /// Dividend yield due to predictability:
    /// `2 (gamma - alpha)(gamma + alpha) v (v_x x + v)`.
    pub fn dividend_yield(&self, t: f64, x: f64) -> f64 {
        let rho = self.excess_predictability();
        let sum = self.gamma_trader + self.alpha_market;
        let v = (self.vol)(t, x);
        let vx = (self.vol_dx)(t, x);
        2.0 * rho * sum * v * (vx * x + v)
    }
}

/// Spatial/temporal discretization. `theta = 1` is fully implicit,
/// `theta = 1/2` Crank-Nicolson (with two implicit Rannacher startup
/// steps to damp payoff-kink oscillation).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PdeGrid {
    pub x_min: f64,
    pub x_max: f64,
    pub n_x: usize,
    pub n_t: usize,
    pub theta: f64,
}

impl PdeGrid {
    pub fn validate(&self) -> Result<()> {
        if !(self.x_min > 0.0 && self.x_max > self.x_min) {
            return Err(Error::Config(format!(
                "need 0 < x_min < x_max, got [{}, {}]",
                self.x_min, self.x_max
            )));
        }
        if self.n_x < 3 || self.n_t < 1 {
            return Err(Error::Config("grid needs n_x >= 3 and n_t >= 1".into()));
        }
        if !(0.0..=1.0).contains(&self.theta) {
            return Err(Error::Config(format!("theta must lie in [0, 1], got {}", self.theta)));
        }
        Ok(())
    }

    /// 6-sigma log-space truncation around the spot, shifted so the strike
    /// falls exactly on a node.
    pub fn for_problem(problem: &PredictableOptionProblem, n_x: usize, n_t: usize) -> Result<Self> {
        problem.validate()?;
        let v0 = (problem.vol)(0.0, problem.spot);
        if !(v0 > 0.0) {
            return Err(Error::Config("volatility at (0, spot) must be > 0".into()));
        }
        let width = 6.0 * v0 * problem.maturity.sqrt();
        let mut x_min = problem.spot * (-width).exp();
        let mut x_max = problem.spot * width.exp();
        let strike = problem.payoff.strike();
        if strike <= x_min || strike >= x_max {
            return Err(Error::Config(format!(
                "strike {strike} falls outside the truncated domain [{x_min}, {x_max}]"
            )));
        }
        let dx = (x_max - x_min) / (n_x - 1) as f64;
        let i = ((strike - x_min) / dx).round().clamp(1.0, (n_x - 2) as f64);
        let shift = strike - (x_min + i * dx);
        x_min += shift;
        x_max += shift;
        if x_min <= 0.0 {
            x_min = dx * 1e-3;
        }
        let grid = PdeGrid { x_min, x_max, n_x, n_t, theta: 0.5 };
        grid.validate()?;
        Ok(grid)
    }

    pub fn dx(&self) -> f64 {
        (self.x_max - self.x_min) / (self.n_x - 1) as f64
    }

    pub fn xs(&self) -> Vec<f64> {
        let dx = self.dx();
        (0..self.n_x).map(|i| self.x_min + i as f64 * dx).collect()
    }
}

/// Solved price surface `C(t, x)` on the grid; `ts` ascend from 0 to the
/// maturity and `values[k][i] = C(ts[k], xs[i])`.
#[derive(Debug, Clone)]
pub struct PriceSurface {
    pub ts: Vec<f64>,
    pub xs: Vec<f64>,
    pub values: Vec<Vec<f64>>,
}

impl PriceSurface {
    /// Price at `t = 0` and an arbitrary spot, by linear interpolation.
    pub fn price_at_spot(&self, spot: f64) -> Result<f64> {
        interp_linear(&self.xs, &self.values[0], spot)
    }
}

fn interp_linear(xs: &[f64], ys: &[f64], x: f64) -> Result<f64> {
    if x < xs[0] || x > xs[xs.len() - 1] {
        return Err(Error::Config(format!("query {x} outside grid range")));
    }
    let idx = xs.partition_point(|&v| v <= x).min(xs.len() - 1).max(1);
    let (x0, x1) = (xs[idx - 1], xs[idx]);
    let w = (x - x0) / (x1 - x0);
    Ok(ys[idx - 1] * (1.0 - w) + ys[idx] * w)
}

/// Tridiagonal elimination (Thomas algorithm). Mutates its inputs.
fn thomas_solve(lower: &mut [f64], diag: &mut [f64], upper: &[f64], rhs: &mut [f64]) -> Result<()> {
    let n = diag.len();
    for i in 1..n {
        if diag[i - 1] == 0.0 {
            return Err(Error::Numerical("tridiagonal pivot breakdown".into()));
        }
        let w = lower[i] / diag[i - 1];
        diag[i] -= w * upper[i - 1];
        rhs[i] -= w * rhs[i - 1];
    }
    if diag[n - 1] == 0.0 {
        return Err(Error::Numerical("tridiagonal pivot breakdown".into()));
    }
    rhs[n - 1] /= diag[n - 1];
    for i in (0..n - 1).rev() {
        rhs[i] = (rhs[i] - upper[i] * rhs[i + 1]) / diag[i];
    }
    Ok(())
}

/// Backward induction of the predictability PDE
/// `C_t + (r - D_y) x C_x - r C + 1/2 v^2 x^2 C_xx = 0`
/// with Dirichlet lower boundary and the linearity condition
/// `C_xx = 0` at the upper boundary.
pub fn solve_pde(problem: &PredictableOptionProblem, grid: &PdeGrid) -> Result<PriceSurface> {
    problem.validate()?;
    grid.validate()?;
    let xs = grid.xs();
    let dx = grid.dx();
    let strike = problem.payoff.strike();
    let on_node = xs.iter().any(|&x| (x - strike).abs() < 1e-9 * strike.max(1.0));
    if !on_node {
        return Err(Error::Config(format!(
            "grid has no node at the strike {strike}; use PdeGrid::for_problem"
        )));
    }

    let n = grid.n_x;
    let n_int = n - 2;
    let dt = problem.maturity / grid.n_t as f64;

    // spatial-operator row (A, B, C) at node i and time t
    let row = |t: f64, x: f64| -> (f64, f64, f64) {
        let v = (problem.vol)(t, x);
        let r = (problem.rate)(t, x);
        let dy = problem.dividend_yield(t, x);
        let diff = 0.5 * v * v * x * x / (dx * dx);
        let conv = (r - dy) * x / (2.0 * dx);
        (diff - conv, -2.0 * diff - r, diff + conv)
    };

    let lower_boundary = |t: f64| -> f64 {
        match problem.payoff {
            Payoff::Call { .. } | Payoff::Zero { .. } => 0.0,
            Payoff::Put { strike } => {
                let r = (problem.rate)(t, grid.x_min);
                strike * (-r * (problem.maturity - t)).exp()
            }
        }
    };

    let mut levels: Vec<Vec<f64>> = Vec::with_capacity(grid.n_t + 1);
    let mut u: Vec<f64> = xs.iter().map(|&x| problem.payoff.value(x)).collect();
    levels.push(u.clone());

    let mut lower = vec![0.0; n_int];
    let mut diag = vec![0.0; n_int];
    let mut upper = vec![0.0; n_int];
    let mut rhs = vec![0.0; n_int];

    for k in 0..grid.n_t {
        let t_old = problem.maturity - k as f64 * dt;
        let t_new = t_old - dt;
        // Rannacher smoothing: two fully implicit startup steps
        let theta = if k < 2 { 1.0 } else { grid.theta };

        // explicit side: (I + (1 - theta) dt L(t_old)) u
        for i in 1..n - 1 {
            let (a, b, c) = row(t_old, xs[i]);
            let u_up = if i == n - 2 { 2.0 * u[n - 2] - u[n - 3] } else { u[i + 1] };
            rhs[i - 1] = u[i] + (1.0 - theta) * dt * (a * u[i - 1] + b * u[i] + c * u_up);
        }

        // implicit side: (I - theta dt L(t_new))
        let b0_new = lower_boundary(t_new);
        for i in 1..n - 1 {
            let (a, b, c) = row(t_new, xs[i]);
            let (mut a, mut b, c) = (-theta * dt * a, 1.0 - theta * dt * b, -theta * dt * c);
            if i == n - 2 {
                // fold the linearity boundary u_N = 2u_{N-1} - u_{N-2}
                a -= c;
                b += 2.0 * c;
                upper[i - 1] = 0.0;
            } else {
                upper[i - 1] = c;
            }
            lower[i - 1] = a;
            diag[i - 1] = b;
            if i == 1 {
                rhs[0] -= a * b0_new;
                lower[0] = 0.0;
            }
        }
        thomas_solve(&mut lower, &mut diag, &upper, &mut rhs)?;
        if rhs.iter().any(|v| !v.is_finite()) {
            return Err(Error::Numerical(format!("non-finite PDE solution at time step {k}")));
        }

        u[0] = b0_new;
        u[1..n - 1].copy_from_slice(&rhs);
        u[n - 1] = 2.0 * u[n - 2] - u[n - 3];
        levels.push(u.clone());
    }

    levels.reverse();
    let ts = (0..=grid.n_t).map(|k| k as f64 * dt).collect();
    Ok(PriceSurface { ts, xs, values: levels })
}

/// Replicating-portfolio fields recovered from a solved surface:
/// stock weight `a = dC/dx` (central differences) and bond position value
/// `b*beta = C - x dC/dx`.
#[derive(Debug, Clone)]
pub struct ReplicationWeights {
    pub delta: Vec<Vec<f64>>,
    pub bond_value: Vec<Vec<f64>>,
}

pub fn replication_weights(surface: &PriceSurface) -> ReplicationWeights {
    let n = surface.xs.len();
    let mut delta = Vec::with_capacity(surface.values.len());
    let mut bond = Vec::with_capacity(surface.values.len());
    for level in &surface.values {
        let mut d = vec![0.0; n];
        for i in 1..n - 1 {
            d[i] = (level[i + 1] - level[i - 1]) / (surface.xs[i + 1] - surface.xs[i - 1]);
        }
        d[0] = (level[1] - level[0]) / (surface.xs[1] - surface.xs[0]);
        d[n - 1] = (level[n - 1] - level[n - 2]) / (surface.xs[n - 1] - surface.xs[n - 2]);
        let b: Vec<f64> = (0..n).map(|i| level[i] - surface.xs[i] * d[i]).collect();
        delta.push(d);
        bond.push(b);
    }
    ReplicationWeights { delta, bond_value: bond }
}

/// Black-Scholes European price with a continuous dividend yield; the
/// closed-form oracle for the constant-coefficient reduction of the PDE.
pub fn bs_closed_form(
    spot: f64,
    strike: f64,
    rate: f64,
    yield_q: f64,
    vol: f64,
    maturity: f64,
    payoff: Payoff,
) -> Result<f64> {
    if !(vol > 0.0 && maturity > 0.0 && spot > 0.0 && strike > 0.0) {
        return Err(Error::InvalidParameter(
            "bs_closed_form requires spot, strike, vol, maturity > 0".into(),
        ));
    }
    let sig = vol * maturity.sqrt();
    let d1 = ((spot / strike).ln() + (rate - yield_q + 0.5 * vol * vol) * maturity) / sig;
    let d2 = d1 - sig;
    let fwd = spot * (-yield_q * maturity).exp();
    let disc_k = strike * (-rate * maturity).exp();
    match payoff {
        Payoff::Call { .. } => Ok(fwd * norm_cdf(d1) - disc_k * norm_cdf(d2)),
        Payoff::Put { .. } => Ok(disc_k * norm_cdf(-d2) - fwd * norm_cdf(-d1)),
        Payoff::Zero { .. } => Ok(0.0),
    }
}

/// Monte Carlo estimate with standard error.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct McEstimate {
    pub price: f64,
    pub std_err: f64,
    pub n_paths: usize,
    pub n_diverged: usize,
}

/// Independent Monte Carlo price of the claim under the risk-neutral
/// dynamics `dX = (r - D_y) X dt + v X dB`, discounted along the path.
/// Log-space Euler steps keep the scheme exact for constant coefficients.
pub fn mc_price_predictable(
    problem: &PredictableOptionProblem,
    grid: &PathGrid,
    n_paths: usize,
    seed: u64,
) -> Result<McEstimate> {
    problem.validate()?;
    let dt = grid.dt();
    let steps = (problem.maturity / dt).round() as usize;
    if ((steps as f64 * dt) - problem.maturity).abs() > 1e-9 * problem.maturity {
        return Err(Error::Config("path grid horizon must equal the option maturity".into()));
    }
    let results: Vec<Option<f64>> = (0..n_paths as u64)
        .into_par_iter()
        .map(|i| {
            let mut r = rng::stream(seed, i);
            let mut x = problem.spot;
            let mut disc = 0.0;
            for j in 0..steps {
                let t = j as f64 * dt;
                let v = (problem.vol)(t, x);
                let rate = (problem.rate)(t, x);
                let dy = problem.dividend_yield(t, x);
                let z: f64 = r.sample(StandardNormal);
                disc += rate * dt;
                x *= ((rate - dy - 0.5 * v * v) * dt + v * dt.sqrt() * z).exp();
                if !x.is_finite() {
                    return None;
                }
            }
            Some((-disc).exp() * problem.payoff.value(x))
        })
        .collect();
    let ok: Vec<f64> = results.iter().filter_map(|v| *v).collect();
    let n = ok.len();
    if n == 0 {
        return Err(Error::Numerical("all Monte Carlo paths diverged".into()));
    }
    let mean = ok.iter().sum::<f64>() / n as f64;
    let var = ok.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1).max(1) as f64;
    Ok(McEstimate {
        price: mean,
        std_err: (var / n as f64).sqrt(),
        n_paths,
        n_diverged: n_paths - n,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dividend_yield_arithmetic() {
        // v = 0.2 constant, gamma = 0.5, alpha = 0: 2 * 0.25 * 0.04 = 0.02
        let p = PredictableOptionProblem::constant(
            100.0,
            Payoff::Call { strike: 100.0 },
            0.05,
            0.2,
            1.0,
            0.5,
            0.0,
        );
        assert!((p.dividend_yield(0.3, 80.0) - 0.02).abs() < 1e-15);

        // swap gamma/alpha: rho flips sign with gamma + alpha fixed
        let q = PredictableOptionProblem::constant(
            100.0,
            Payoff::Call { strike: 100.0 },
            0.05,
            0.2,
            1.0,
            0.0,
            0.5,
        );
        assert!((q.dividend_yield(0.3, 80.0) + 0.02).abs() < 1e-15);

        // gamma = alpha: identically zero
        let z = PredictableOptionProblem::constant(
            100.0,
            Payoff::Call { strike: 100.0 },
            0.05,
            0.2,
            1.0,
            0.4,
            0.4,
        );
        assert_eq!(z.dividend_yield(0.0, 123.0), 0.0);
    }

    #[test]
    fn drift_identity_links_the_two_pde_forms() {
        // (r - D_y) x = r x + 2 (alpha^2 - gamma^2) sigma sigma_x with
        // sigma = v x, sigma_x = v_x x + v; checked with state-dependent v
        let p = PredictableOptionProblem {
            vol: Box::new(|_, x| 0.2 + 1e-4 * x),
            vol_dx: Box::new(|_, _| 1e-4),
            rate: Box::new(|_, _| 0.03),
            alpha_market: 0.3,
            gamma_trader: 0.8,
            payoff: Payoff::Call { strike: 100.0 },
            maturity: 1.0,
            spot: 100.0,
        };
        for x in [20.0, 100.0, 333.0] {
            let v = (p.vol)(0.0, x);
            let vx = (p.vol_dx)(0.0, x);
            let sigma = v * x;
            let sigma_x = vx * x + v;
            let lhs = (0.03 - p.dividend_yield(0.0, x)) * x;
            let a2g2 = p.alpha_market * p.alpha_market - p.gamma_trader * p.gamma_trader;
            let rhs = 0.03 * x + 2.0 * a2g2 * sigma * sigma_x;
            assert!((lhs - rhs).abs() < 1e-12 * lhs.abs().max(1.0), "x = {x}");
        }
    }

    #[test]
    fn bs_closed_form_frozen_value_and_parity() {
        let c = bs_closed_form(100.0, 100.0, 0.05, 0.0, 0.2, 1.0, Payoff::Call { strike: 100.0 })
            .unwrap();
        assert!((c - 10.450583572185567).abs() < 1e-10, "got {c}");

        let q = 0.02;
        let call =
            bs_closed_form(100.0, 90.0, 0.05, q, 0.2, 2.0, Payoff::Call { strike: 90.0 }).unwrap();
        let put =
            bs_closed_form(100.0, 90.0, 0.05, q, 0.2, 2.0, Payoff::Put { strike: 90.0 }).unwrap();
        let parity = 100.0 * (-q * 2.0f64).exp() - 90.0 * (-0.05 * 2.0f64).exp();
        assert!((call - put - parity).abs() < 1e-12);
    }

    #[test]
    fn bs_maturity_limit_is_intrinsic() {
        let c = bs_closed_form(120.0, 100.0, 0.05, 0.0, 0.2, 1e-12, Payoff::Call { strike: 100.0 })
            .unwrap();
        assert!((c - 20.0).abs() < 1e-6);
        let c2 = bs_closed_form(80.0, 100.0, 0.05, 0.0, 0.2, 1e-12, Payoff::Call { strike: 100.0 })
            .unwrap();
        assert!(c2.abs() < 1e-6);
    }

    #[test]
    fn zero_payoff_solves_to_zero() {
        let p = PredictableOptionProblem::constant(
            100.0,
            Payoff::Zero { strike: 100.0 },
            0.05,
            0.2,
            1.0,
            0.3,
            0.1,
        );
        let grid = PdeGrid::for_problem(&p, 101, 50).unwrap();
        let s = solve_pde(&p, &grid).unwrap();
        for level in &s.values {
            for &v in level {
                assert_eq!(v, 0.0);
            }
        }
    }

    #[test]
    fn grid_places_a_node_at_the_strike() {
        let p = PredictableOptionProblem::constant(
            103.7,
            Payoff::Call { strike: 97.3 },
            0.05,
            0.2,
            1.0,
            0.0,
            0.0,
        );
        let grid = PdeGrid::for_problem(&p, 200, 50).unwrap();
        let xs = grid.xs();
        assert!(xs.iter().any(|&x| (x - 97.3).abs() < 1e-9 * 97.3));
    }

    #[test]
    fn solve_rejects_grid_without_strike_node() {
        let p = PredictableOptionProblem::constant(
            100.0,
            Payoff::Call { strike: 100.0 },
            0.05,
            0.2,
            1.0,
            0.0,
            0.0,
        );
        let bad = PdeGrid { x_min: 1.0, x_max: 301.3, n_x: 77, n_t: 10, theta: 0.5 };
        assert!(matches!(solve_pde(&p, &bad), Err(Error::Config(_))));
    }

    #[test]
    fn replication_identity_holds_by_construction() {
        let p = PredictableOptionProblem::constant(
            100.0,
            Payoff::Call { strike: 100.0 },
            0.05,
            0.2,
            1.0,
            0.5,
            0.0,
        );
        let grid = PdeGrid::for_problem(&p, 101, 40).unwrap();
        let s = solve_pde(&p, &grid).unwrap();
        let w = replication_weights(&s);
        for (k, level) in s.values.iter().enumerate() {
            for i in 1..s.xs.len() - 1 {
                let resid = level[i] - (w.delta[k][i] * s.xs[i] + w.bond_value[k][i]);
                assert!(resid.abs() < 1e-10, "residual {resid} at ({k}, {i})");
            }
        }
    }

    #[test]
    fn mc_zero_vol_discounts_deterministically() {
        // v = 0: X grows at r exactly (log-Euler has no discretization error
        // for constant coefficients), price = e^{-rT} payoff(X_T)
        let p = PredictableOptionProblem::constant(
            100.0,
            Payoff::Call { strike: 90.0 },
            0.05,
            0.0,
            1.0,
            0.0,
            0.0,
        );
        let grid = PathGrid::new(1.0, 16).unwrap();
        let est = mc_price_predictable(&p, &grid, 10, 1).unwrap();
        let x_t = 100.0 * (0.05f64).exp();
        let want = (-0.05f64).exp() * (x_t - 90.0);
        assert!((est.price - want).abs() < 1e-10);
        assert_eq!(est.std_err, 0.0);
    }
}
