//! Equity premium in the two-period consumption economy.
//!
//! Growth of consumption `z` is either lognormal or log-NIG. The log
//! equity premium is `ln E[z] - ln E[z^{1-a}] + ln E[z^{-a}]` for power
//! utility with risk aversion `a`; under log-NIG growth this has a closed
//! form that is independent of both the location parameter and the
//! discount factor.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::nig::NigParams;
use crate::rng;

/// Law of gross consumption growth `z = e^X`.
#[derive(Debug, Clone)]
pub enum GrowthLaw {
    /// `X ~ N(mu, sigma2)`.
    LogNormal { mu: f64, sigma2: f64 },
    /// `X ~ NIG`.
    LogNig(NigParams),
}

/// Representative-agent economy.
#[derive(Debug, Clone)]
pub struct EconomyParams {
    /// Subjective discount factor, in (0, 1).
    pub discount: f64,
    /// Relative risk aversion, > 0.
    pub risk_aversion: f64,
    pub growth: GrowthLaw,
}

impl EconomyParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.discount > 0.0 && self.discount < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "discount factor must lie in (0, 1), got {}",
                self.discount
            )));
        }
        if !(self.risk_aversion > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "risk aversion must be > 0, got {}",
                self.risk_aversion
            )));
        }
        if let GrowthLaw::LogNig(p) = &self.growth {
            p.validate()?;
        }
        Ok(())
    }

    /// `ln E[z^s]` under the growth law.
    fn log_moment(&self, s: f64) -> Result<f64> {
        match &self.growth {
            GrowthLaw::LogNormal { mu, sigma2 } => Ok(mu * s + 0.5 * sigma2 * s * s),
            GrowthLaw::LogNig(p) => p.log_exp_moment(s),
        }
    }

    /// Gross expected equity return `E[z] / (b E[z^{1-a}])`.
    pub fn expected_equity_return(&self) -> Result<f64> {
        self.validate()?;
        let a = self.risk_aversion;
        Ok((self.log_moment(1.0)? - self.log_moment(1.0 - a)?).exp() / self.discount)
    }

    /// Gross risk-free return `1 / (b E[z^{-a}])`.
    pub fn riskfree_return(&self) -> Result<f64> {
        self.validate()?;
        Ok((-self.log_moment(-self.risk_aversion)?).exp() / self.discount)
    }

    /// Log equity premium `ln R_e - ln R_f`; the discount factor cancels.
    pub fn log_premium(&self) -> Result<f64> {
        self.validate()?;
        let a = self.risk_aversion;
        Ok(self.log_moment(1.0)? - self.log_moment(1.0 - a)? + self.log_moment(-a)?)
    }
}

/// Lognormal log premium: `a * sigma2` exactly.
pub fn premium_lognormal(risk_aversion: f64, sigma2: f64) -> f64 {
    risk_aversion * sigma2
}

/// Log-NIG log premium in closed form,
/// `delta (gamma - sqrt(a^2-(b+1)^2) + sqrt(a^2-(b+1-ra)^2) - sqrt(a^2-(b-ra)^2))`;
/// independent of `mu` and of the discount factor.
pub fn premium_nig(p: &NigParams, risk_aversion: f64) -> Result<f64> {
    p.validate()?;
    let a = risk_aversion;
    let term = |s: f64| -> Result<f64> {
        let sh = p.beta + s;
        let rad = p.alpha * p.alpha - sh * sh;
        if rad <= 0.0 {
            return Err(Error::MomentNonexistent { exponent: s, alpha: p.alpha, beta: p.beta });
        }
        Ok(rad.sqrt())
    };
    // grouped as two difference quotients to avoid the catastrophic
    // cancellation of the raw sqrt differences at large alpha:
    // gamma - t(1) = (2 beta + 1)/(gamma + t(1)),
    // t(1-a) - t(-a) = -(2 (beta - a) + 1)/(t(1-a) + t(-a))
    let t1 = term(1.0)?;
    let t2 = term(1.0 - a)?;
    let t3 = term(-a)?;
    let g = p.gamma();
    Ok(p.delta * ((2.0 * p.beta + 1.0) / (g + t1) - (2.0 * (p.beta - a) + 1.0) / (t2 + t3)))
}

/// Premium ratio `R(a, alpha)`: log-NIG premium over the lognormal premium
/// at matched (unit) variance, using the standardized symmetric NIG with
/// `beta = 0`, `delta = alpha`. Defined for `max(|a|, 1, |1-a|) < alpha`.
pub fn premium_ratio(risk_aversion: f64, alpha: f64) -> Result<f64> {
    if !(risk_aversion > 0.0) {
        return Err(Error::InvalidParameter(format!("risk aversion must be > 0, got {risk_aversion}")));
    }
    let need = risk_aversion.abs().max(1.0).max((1.0 - risk_aversion).abs());
    if alpha <= need {
        return Err(Error::MomentNonexistent { exponent: need, alpha, beta: 0.0 });
    }
    let p = NigParams::new(0.0, alpha, 0.0, alpha)?;
    Ok(premium_nig(&p, risk_aversion)? / premium_lognormal(risk_aversion, 1.0))
}

/// One cell of the ratio surface; `None` where the required exponential
/// moments do not exist.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RatioSurface {
    pub risk_aversions: Vec<f64>,
    pub alphas: Vec<f64>,
    /// Row-major, rows indexed by risk aversion.
    pub ratios: Vec<Vec<Option<f64>>>,
}

/// Tabulates `R(a, alpha)` over a grid, masking infeasible cells instead
/// of failing.
pub fn ratio_surface(risk_aversions: &[f64], alphas: &[f64]) -> Result<RatioSurface> {
    for &a in risk_aversions {
        if !(a > 0.0) {
            return Err(Error::InvalidParameter(format!("risk aversion must be > 0, got {a}")));
        }
    }
    for &al in alphas {
        if !(al > 0.0) {
            return Err(Error::InvalidParameter(format!("alpha must be > 0, got {al}")));
        }
    }
    let ratios = risk_aversions
        .iter()
        .map(|&a| alphas.iter().map(|&al| premium_ratio(a, al).ok()).collect())
        .collect();
    Ok(RatioSurface {
        risk_aversions: risk_aversions.to_vec(),
        alphas: alphas.to_vec(),
        ratios,
    })
}

/// Monte Carlo estimate of the log premium under log-NIG growth, with a
/// delta-method standard error from the sample covariance of
/// `(z, z^{1-a}, z^{-a})`.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct McPremium {
    pub log_premium: f64,
    pub std_err: f64,
    pub n_draws: usize,
}

pub fn mc_premium_nig(p: &NigParams, risk_aversion: f64, n_draws: usize, seed: u64) -> Result<McPremium> {
    p.validate()?;
    if n_draws < 2 {
        return Err(Error::Config(format!("need at least 2 draws, got {n_draws}")));
    }
    let a = risk_aversion;
    let chunk = 1 << 16;
    let n_chunks = (n_draws + chunk - 1) / chunk;
    // accumulate sums and cross-products per chunk, combine exactly
    let acc = (0..n_chunks as u64)
        .into_par_iter()
        .map(|c| {
            let mut r = rng::stream(seed, c);
            let lo = c as usize * chunk;
            let hi = (lo + chunk).min(n_draws);
            let mut s = [0.0f64; 3];
            let mut q = [[0.0f64; 3]; 3];
            for x in p.sample_with(hi - lo, &mut r) {
                let v = [x.exp(), ((1.0 - a) * x).exp(), (-a * x).exp()];
                for i in 0..3 {
                    s[i] += v[i];
                    for j in 0..3 {
                        q[i][j] += v[i] * v[j];
                    }
                }
            }
            (s, q)
        })
        .reduce(
            || ([0.0; 3], [[0.0; 3]; 3]),
            |(mut s1, mut q1), (s2, q2)| {
                for i in 0..3 {
                    s1[i] += s2[i];
                    for j in 0..3 {
                        q1[i][j] += q2[i][j];
                    }
                }
                (s1, q1)
            },
        );
    let n = n_draws as f64;
    let m: Vec<f64> = acc.0.iter().map(|v| v / n).collect();
    if m.iter().any(|&v| !(v > 0.0) || !v.is_finite()) {
        return Err(Error::Numerical("moment estimate is not a positive finite number".into()));
    }
    // delta method: g = ln m1 - ln m2 + ln m3, grad = (1/m1, -1/m2, 1/m3)
    let grad = [1.0 / m[0], -1.0 / m[1], 1.0 / m[2]];
    let mut var_g = 0.0;
    for i in 0..3 {
        for j in 0..3 {
            let cov = acc.1[i][j] / n - m[i] * m[j];
            var_g += grad[i] * grad[j] * cov;
        }
    }
    Ok(McPremium {
        log_premium: m[0].ln() - m[1].ln() + m[2].ln(),
        std_err: (var_g.max(0.0) / n).sqrt(),
        n_draws,
    })
}

/// Growth-law calibration from an observed gross-growth series.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Calibration {
    pub lognormal_mu: f64,
    pub lognormal_sigma2: f64,
    pub nig: Option<(f64, f64, f64, f64)>,
    /// Set when the NIG moment fit was infeasible on this sample.
    pub nig_fallback_reason: Option<String>,
    /// `(risk aversion, lognormal premium, NIG premium if defined)`.
    pub premia: Vec<(f64, f64, Option<f64>)>,
}

/// Fits both growth laws to a gross-growth series (`z_t > 0`) and
/// tabulates premia over `a = 1..=15`. Lognormal parameters are the MLE
/// of the log series; the NIG fit is by the method of moments and may be
/// infeasible for thin-tailed samples, in which case only the reason is
/// recorded.
pub fn calibrate_growth(series: &[f64]) -> Result<Calibration> {
    if series.len() < 4 {
        return Err(Error::FitInfeasible(format!(
            "need at least 4 observations, got {}",
            series.len()
        )));
    }
    if series.iter().any(|&z| !(z > 0.0)) {
        return Err(Error::InvalidParameter("gross growth must be positive".into()));
    }
    let logs: Vec<f64> = series.iter().map(|z| z.ln()).collect();
    let n = logs.len() as f64;
    let mu = logs.iter().sum::<f64>() / n;
    let sigma2 = logs.iter().map(|x| (x - mu) * (x - mu)).sum::<f64>() / n;
    if !(sigma2 > 0.0) {
        return Err(Error::FitInfeasible("log-growth series is constant".into()));
    }
    let (nig, reason) = match NigParams::fit_moments(&logs) {
        Ok(p) => (Some(p), None),
        Err(e) => (None, Some(e.to_string())),
    };
    let premia = (1..=15)
        .map(|k| {
            let a = k as f64;
            let ln_prem = premium_lognormal(a, sigma2);
            let nig_prem = nig.as_ref().and_then(|p| premium_nig(p, a).ok());
            (a, ln_prem, nig_prem)
        })
        .collect();
    Ok(Calibration {
        lognormal_mu: mu,
        lognormal_sigma2: sigma2,
        nig: nig.map(|p| (p.mu, p.alpha, p.beta, p.delta)),
        nig_fallback_reason: reason,
        premia,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lognormal_premium_is_a_sigma2() {
        let e = EconomyParams {
            discount: 0.97,
            risk_aversion: 3.0,
            growth: GrowthLaw::LogNormal { mu: 0.02, sigma2: 0.0012 },
        };
        let prem = e.log_premium().unwrap();
        assert!((prem - 3.0 * 0.0012).abs() < 1e-15);
        let check = e.expected_equity_return().unwrap().ln() - e.riskfree_return().unwrap().ln();
        assert!((prem - check).abs() < 1e-12);
    }

    #[test]
    fn nig_premium_is_mu_and_discount_free() {
        let p1 = NigParams::new(0.0, 20.0, -2.0, 0.5).unwrap();
        let p2 = NigParams::new(0.7, 20.0, -2.0, 0.5).unwrap();
        let a = 5.0;
        let prem = premium_nig(&p1, a).unwrap();
        assert!((prem - premium_nig(&p2, a).unwrap()).abs() < 1e-15);
        for b in [0.9, 0.97] {
            let e = EconomyParams { discount: b, risk_aversion: a, growth: GrowthLaw::LogNig(p1.clone()) };
            assert!((e.log_premium().unwrap() - prem).abs() < 1e-14);
        }
    }

    #[test]
    fn nig_premium_matches_moment_route() {
        let p = NigParams::new(0.01, 15.0, -1.0, 0.8).unwrap();
        let a = 4.0;
        let direct = premium_nig(&p, a).unwrap();
        let via = p.log_exp_moment(1.0).unwrap() - p.log_exp_moment(1.0 - a).unwrap()
            + p.log_exp_moment(-a).unwrap();
        assert!((direct - via).abs() < 1e-14);
    }

    #[test]
    fn ratio_tends_to_one_in_gaussian_limit() {
        // symmetric NIG with alpha -> inf converges to N(0, 1)
        let r = premium_ratio(3.0, 5000.0).unwrap();
        assert!((r - 1.0).abs() < 5e-3, "ratio {r}");
        // and exceeds 1 for heavy tails with a > 1
        assert!(premium_ratio(3.0, 4.0).unwrap() > 1.0);
    }

    #[test]
    fn ratio_domain_boundary() {
        assert!(premium_ratio(3.0, 3.0).is_err());
        assert!(premium_ratio(3.0, 3.0001).is_ok());
        assert!(premium_ratio(0.5, 1.0).is_err());
        assert!(premium_ratio(0.5, 1.1).is_ok());
    }

    #[test]
    fn surface_masks_infeasible_cells() {
        let s = ratio_surface(&[2.0, 10.0], &[5.0, 50.0]).unwrap();
        assert!(s.ratios[0][0].is_some());
        assert!(s.ratios[1][0].is_none()); // a = 10 needs alpha > 10
        assert!(s.ratios[1][1].is_some());
    }

    #[test]
    fn mc_premium_agrees_with_closed_form() {
        let p = NigParams::new(0.0, 30.0, -3.0, 2.0).unwrap();
        let exact = premium_nig(&p, 4.0).unwrap();
        let mc = mc_premium_nig(&p, 4.0, 200_000, 11).unwrap();
        assert!(
            (mc.log_premium - exact).abs() < 5.0 * mc.std_err,
            "mc {} exact {exact} se {}",
            mc.log_premium,
            mc.std_err
        );
        assert!(mc.std_err > 0.0);
    }

    #[test]
    fn mc_premium_is_seed_deterministic() {
        let p = NigParams::new(0.0, 30.0, -3.0, 2.0).unwrap();
        let a = mc_premium_nig(&p, 4.0, 50_000, 7).unwrap();
        let b = mc_premium_nig(&p, 4.0, 50_000, 7).unwrap();
        assert_eq!(a.log_premium, b.log_premium);
        assert_eq!(a.std_err, b.std_err);
    }

    #[test]
    fn calibrate_on_nig_sample_recovers_heavy_tails() {
        let p = NigParams::new(0.02, 12.0, -2.0, 0.04).unwrap();
        let z: Vec<f64> = p.sample(100_000, 21).iter().map(|x| x.exp()).collect();
        let c = calibrate_growth(&z).unwrap();
        assert!(c.nig.is_some(), "fallback: {:?}", c.nig_fallback_reason);
        assert!((c.lognormal_mu - 0.02 + 0.04 * 2.0 / p.gamma() * 0.0).is_finite());
        // fitted-NIG premium should beat the lognormal premium for large a
        let &(a, lnp, nigp) = c.premia.last().unwrap();
        assert_eq!(a, 15.0);
        if let Some(np) = nigp {
            assert!(np > lnp, "nig {np} lognormal {lnp}");
        }
    }

    #[test]
    fn calibrate_rejects_bad_series() {
        assert!(calibrate_growth(&[1.0, 1.1]).is_err());
        assert!(calibrate_growth(&[1.0, -1.0, 1.1, 0.9]).is_err());
        assert!(calibrate_growth(&[1.0, 1.0, 1.0, 1.0]).is_err());
    }
}
