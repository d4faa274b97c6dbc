//! LeRoy-Lansing excess-return decomposition and the efficiency test.
//!
//! Each asset's composite variable `z` has a conditional law per date-t
//! state; the conditional expected log excess return on stock over bond
//! is `[E ln z_s - ln E z_s] - [E ln z_b - ln E z_b]`. Its unconditional
//! variance across states (the predictable variation) is zero exactly
//! when excess returns are unforecastable, i.e. the market is efficient.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::nig::NigParams;

/// Conditional law of a composite variable `z = e^X` in one state.
#[derive(Debug, Clone)]
pub enum ConditionalLaw {
    LogNormal { mu: f64, sigma2: f64 },
    LogNig(NigParams),
}

impl ConditionalLaw {
    pub fn validate(&self) -> Result<()> {
        match self {
            ConditionalLaw::LogNormal { mu, sigma2 } => {
                if !mu.is_finite() || !(*sigma2 >= 0.0) || !sigma2.is_finite() {
                    return Err(Error::InvalidParameter(format!(
                        "lognormal law needs finite mu and sigma2 >= 0, got mu = {mu}, sigma2 = {sigma2}"
                    )));
                }
                Ok(())
            }
            ConditionalLaw::LogNig(p) => {
                p.validate()?;
                // E z must exist: alpha^2 > (beta + 1)^2
                if p.alpha * p.alpha <= (p.beta + 1.0) * (p.beta + 1.0) {
                    return Err(Error::MomentNonexistent { exponent: 1.0, alpha: p.alpha, beta: p.beta });
                }
                Ok(())
            }
        }
    }
}

/// Which sign Eq. (12)'s mean-correction radical uses. The `beta + 1`
/// variant is the one consistent with the exponential-moment formula and
/// is confirmed by sampling; `beta - 1` reproduces the printed equation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum MeanCorrection {
    AsPrintedBetaMinus1,
    Eq7ConsistentBetaPlus1,
}

impl Default for MeanCorrection {
    fn default() -> Self {
        MeanCorrection::Eq7ConsistentBetaPlus1
    }
}

/// Stock/bond law pair for one state.
#[derive(Debug, Clone)]
pub struct StatePair {
    pub stock: ConditionalLaw,
    pub bond: ConditionalLaw,
}

/// Finite date-t state distribution with a law pair per state.
#[derive(Debug, Clone)]
pub struct StateProcess {
    /// `(probability, laws)`; probabilities must sum to 1.
    pub states: Vec<(f64, StatePair)>,
}

impl StateProcess {
    pub fn validate(&self) -> Result<()> {
        if self.states.is_empty() {
            return Err(Error::Config("state process must have at least one state".into()));
        }
        let mut total = 0.0;
        for (i, (p, pair)) in self.states.iter().enumerate() {
            if !(*p >= 0.0) || !p.is_finite() {
                return Err(Error::Config(format!("state {i}: probability must be >= 0, got {p}")));
            }
            total += p;
            pair.stock
                .validate()
                .map_err(|e| Error::Config(format!("state {i} stock law: {e}")))?;
            pair.bond
                .validate()
                .map_err(|e| Error::Config(format!("state {i} bond law: {e}")))?;
        }
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::Config(format!("state probabilities sum to {total}, expected 1")));
        }
        Ok(())
    }
}

/// Per-asset mean-log-minus-log-mean under a lognormal law: `-sigma2/2`.
fn excess_term_lognormal(law: &ConditionalLaw) -> Result<f64> {
    match law {
        ConditionalLaw::LogNormal { sigma2, .. } => Ok(-0.5 * sigma2),
        _ => Err(Error::Config("expected a lognormal law".into())),
    }
}

/// Per-asset `E ln z - ln E z` under a NIG law, with the radical sign
/// chosen by `correction`; the location parameter cancels.
fn excess_term_nig(law: &ConditionalLaw, correction: MeanCorrection) -> Result<f64> {
    let p = match law {
        ConditionalLaw::LogNig(p) => p,
        _ => return Err(Error::Config("expected a log-NIG law".into())),
    };
    let g = p.gamma();
    let shift = match correction {
        MeanCorrection::AsPrintedBetaMinus1 => p.beta - 1.0,
        MeanCorrection::Eq7ConsistentBetaPlus1 => p.beta + 1.0,
    };
    let rad = p.alpha * p.alpha - shift * shift;
    if rad <= 0.0 {
        return Err(Error::MomentNonexistent { exponent: 1.0, alpha: p.alpha, beta: p.beta });
    }
    // E ln z = mu + delta beta / gamma; ln E z = mu + delta (gamma - sqrt(rad))
    Ok(p.delta * (p.beta / g - g + rad.sqrt()))
}

/// Eq. (10): conditional expected log excess return, lognormal laws.
pub fn expected_excess_lognormal(pair: &StatePair) -> Result<f64> {
    pair.stock.validate()?;
    pair.bond.validate()?;
    Ok(excess_term_lognormal(&pair.stock)? - excess_term_lognormal(&pair.bond)?)
}

/// Eq. (12): conditional expected log excess return, NIG laws.
pub fn expected_excess_nig(pair: &StatePair, correction: MeanCorrection) -> Result<f64> {
    pair.stock.validate()?;
    pair.bond.validate()?;
    Ok(excess_term_nig(&pair.stock, correction)? - excess_term_nig(&pair.bond, correction)?)
}

fn weighted_variance(values: &[(f64, f64)]) -> f64 {
    let mean: f64 = values.iter().map(|(p, v)| p * v).sum();
    values.iter().map(|(p, v)| p * (v - mean) * (v - mean)).sum()
}

/// Eq. (11): unconditional variance of the lognormal expected excess.
pub fn predictable_variation_lognormal(process: &StateProcess) -> Result<f64> {
    process.validate()?;
    let vals: Vec<(f64, f64)> = process
        .states
        .iter()
        .map(|(p, pair)| Ok((*p, expected_excess_lognormal(pair)?)))
        .collect::<Result<_>>()?;
    Ok(weighted_variance(&vals))
}

/// Eq. (13): unconditional variance of the NIG expected excess.
pub fn predictable_variation_nig(process: &StateProcess, correction: MeanCorrection) -> Result<f64> {
    process.validate()?;
    let vals: Vec<(f64, f64)> = process
        .states
        .iter()
        .enumerate()
        .map(|(i, (p, pair))| {
            let e = expected_excess_nig(pair, correction)
                .map_err(|e| Error::Config(format!("state {i}: {e}")))?;
            Ok((*p, e))
        })
        .collect::<Result<_>>()?;
    Ok(weighted_variance(&vals))
}

/// Which family of laws a state process uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LawKind {
    LogNormal,
    LogNig,
}

/// Result of the market-efficiency test: efficient iff the predictable
/// variation falls below `tol` (so a generous tolerance can declare a
/// weakly predictable market efficient).
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct EfficiencyVerdict {
    pub efficient: bool,
    pub measure: f64,
}

pub fn efficiency_verdict(process: &StateProcess, law_kind: LawKind, tol: f64) -> Result<EfficiencyVerdict> {
    if !(tol >= 0.0) {
        return Err(Error::Config(format!("tolerance must be >= 0, got {tol}")));
    }
    let measure = match law_kind {
        LawKind::LogNormal => predictable_variation_lognormal(process)?,
        LawKind::LogNig => predictable_variation_nig(process, MeanCorrection::default())?,
    };
    Ok(EfficiencyVerdict { efficient: measure < tol, measure })
}

/// Parses a state process from CSV text. Lognormal rows:
/// `prob,mu_s,sigma2_s,mu_b,sigma2_b`; NIG rows:
/// `prob,mu_s,alpha_s,beta_s,delta_s,mu_b,alpha_b,beta_b,delta_b`.
/// A header line is detected by a non-numeric first field and skipped.
pub fn parse_states_csv(text: &str, law_kind: LawKind) -> Result<StateProcess> {
    let want = match law_kind {
        LawKind::LogNormal => 5,
        LawKind::LogNig => 9,
    };
    let mut states = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if lineno == 0 && fields[0].parse::<f64>().is_err() {
            continue; // header
        }
        if fields.len() != want {
            return Err(Error::Config(format!(
                "line {}: expected {want} fields, got {}",
                lineno + 1,
                fields.len()
            )));
        }
        let nums: Vec<f64> = fields
            .iter()
            .map(|f| {
                f.parse::<f64>()
                    .map_err(|_| Error::Config(format!("line {}: bad number {f:?}", lineno + 1)))
            })
            .collect::<Result<_>>()?;
        let pair = match law_kind {
            LawKind::LogNormal => StatePair {
                stock: ConditionalLaw::LogNormal { mu: nums[1], sigma2: nums[2] },
                bond: ConditionalLaw::LogNormal { mu: nums[3], sigma2: nums[4] },
            },
            LawKind::LogNig => StatePair {
                stock: ConditionalLaw::LogNig(
                    NigParams::new(nums[1], nums[2], nums[3], nums[4])
                        .map_err(|e| Error::Config(format!("line {}: {e}", lineno + 1)))?,
                ),
                bond: ConditionalLaw::LogNig(
                    NigParams::new(nums[5], nums[6], nums[7], nums[8])
                        .map_err(|e| Error::Config(format!("line {}: {e}", lineno + 1)))?,
                ),
            },
        };
        states.push((nums[0], pair));
    }
    let process = StateProcess { states };
    process.validate()?;
    Ok(process)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ln_pair(s2_s: f64, s2_b: f64) -> StatePair {
        StatePair {
            stock: ConditionalLaw::LogNormal { mu: 0.0, sigma2: s2_s },
            bond: ConditionalLaw::LogNormal { mu: 0.0, sigma2: s2_b },
        }
    }

    #[test]
    fn lognormal_excess_examples() {
        assert_eq!(expected_excess_lognormal(&ln_pair(0.03, 0.03)).unwrap(), 0.0);
        let e = expected_excess_lognormal(&ln_pair(0.04, 0.01)).unwrap();
        assert!((e + 0.015).abs() < 1e-16);
        // mu shifts cancel
        let shifted = StatePair {
            stock: ConditionalLaw::LogNormal { mu: 7.0, sigma2: 0.04 },
            bond: ConditionalLaw::LogNormal { mu: -3.0, sigma2: 0.01 },
        };
        assert_eq!(expected_excess_lognormal(&shifted).unwrap(), e);
    }

    #[test]
    fn two_state_variation_is_quarter_var() {
        let proc = StateProcess {
            states: vec![(0.5, ln_pair(0.04, 0.01)), (0.5, ln_pair(0.02, 0.01))],
        };
        let v = predictable_variation_lognormal(&proc).unwrap();
        assert!((v - 2.5e-5).abs() < 1e-18, "got {v}");
        // brute force over Eq.(10) outputs
        let e1 = expected_excess_lognormal(&proc.states[0].1).unwrap();
        let e2 = expected_excess_lognormal(&proc.states[1].1).unwrap();
        let m = 0.5 * (e1 + e2);
        let brute = 0.5 * (e1 - m).powi(2) + 0.5 * (e2 - m).powi(2);
        assert!((v - brute).abs() < 1e-18);
    }

    #[test]
    fn comoving_variances_are_unpredictable() {
        let proc = StateProcess {
            states: vec![(0.3, ln_pair(0.04, 0.03)), (0.7, ln_pair(0.02, 0.01))],
        };
        assert!(predictable_variation_lognormal(&proc).unwrap() < 1e-18);
    }

    #[test]
    fn nig_corrections_coincide_at_beta_zero() {
        let pair = StatePair {
            stock: ConditionalLaw::LogNig(NigParams::new(0.0, 5.0, 0.0, 1.0).unwrap()),
            bond: ConditionalLaw::LogNig(NigParams::new(0.0, 5.0, 0.0, 0.5).unwrap()),
        };
        let a = expected_excess_nig(&pair, MeanCorrection::AsPrintedBetaMinus1).unwrap();
        let b = expected_excess_nig(&pair, MeanCorrection::Eq7ConsistentBetaPlus1).unwrap();
        assert!((a - b).abs() < 1e-16);
        assert!(a.abs() > 0.0);
    }

    #[test]
    fn nig_excess_is_mu_invariant_and_zero_for_identical_laws() {
        let p = NigParams::new(0.3, 5.0, 1.0, 1.0).unwrap();
        let same = StatePair {
            stock: ConditionalLaw::LogNig(p.clone()),
            bond: ConditionalLaw::LogNig(p.clone()),
        };
        assert_eq!(expected_excess_nig(&same, MeanCorrection::default()).unwrap(), 0.0);
        let q = NigParams::new(-2.0, 5.0, 1.0, 1.0).unwrap();
        let shifted = StatePair {
            stock: ConditionalLaw::LogNig(q),
            bond: ConditionalLaw::LogNig(p),
        };
        assert_eq!(expected_excess_nig(&shifted, MeanCorrection::default()).unwrap(), 0.0);
    }

    #[test]
    fn gaussian_limit_reduces_to_lognormal() {
        // beta = 0, delta = sigma2 * alpha reproduces N(mu, sigma2)
        let alpha = 1e3;
        let to_nig = |s2: f64| {
            ConditionalLaw::LogNig(NigParams::gaussian_limit(s2, 0.0, alpha).unwrap())
        };
        let nig_proc = StateProcess {
            states: vec![
                (0.5, StatePair { stock: to_nig(0.04), bond: to_nig(0.01) }),
                (0.5, StatePair { stock: to_nig(0.02), bond: to_nig(0.01) }),
            ],
        };
        let v = predictable_variation_nig(&nig_proc, MeanCorrection::default()).unwrap();
        assert!((v - 2.5e-5).abs() / 2.5e-5 < 0.01, "got {v}");
    }

    #[test]
    fn gaussian_limit_rate_is_one_over_alpha_squared() {
        let measure = |alpha: f64| {
            let to_nig = |s2: f64| {
                ConditionalLaw::LogNig(NigParams::gaussian_limit(s2, 0.0, alpha).unwrap())
            };
            let proc = StateProcess {
                states: vec![
                    (0.5, StatePair { stock: to_nig(0.04), bond: to_nig(0.01) }),
                    (0.5, StatePair { stock: to_nig(0.02), bond: to_nig(0.01) }),
                ],
            };
            (predictable_variation_nig(&proc, MeanCorrection::default()).unwrap() - 2.5e-5).abs()
        };
        let e2 = measure(1e2);
        let e3 = measure(1e3);
        let e4 = measure(1e4);
        // the last step saturates near double-precision cancellation, so
        // only require a decade of decay there
        assert!(e2 / e3 > 50.0 && e3 / e4 > 10.0, "errors {e2} {e3} {e4}");
        assert!(e4 < 1e-11);
    }

    #[test]
    fn verdicts() {
        let flat = StateProcess {
            states: vec![(0.5, ln_pair(0.04, 0.01)), (0.5, ln_pair(0.04, 0.01))],
        };
        let v = efficiency_verdict(&flat, LawKind::LogNormal, 1e-12).unwrap();
        assert!(v.efficient);
        assert_eq!(v.measure, 0.0);

        let moving = StateProcess {
            states: vec![(0.5, ln_pair(0.04, 0.01)), (0.5, ln_pair(0.02, 0.01))],
        };
        let v = efficiency_verdict(&moving, LawKind::LogNormal, 1e-12).unwrap();
        assert!(!v.efficient);
        assert!((v.measure - 2.5e-5).abs() < 1e-18);
        // a generous tolerance flips the verdict but not the measure
        let v = efficiency_verdict(&moving, LawKind::LogNormal, 1e-3).unwrap();
        assert!(v.efficient);
        assert!((v.measure - 2.5e-5).abs() < 1e-18);
    }

    #[test]
    fn csv_round_trip_lognormal() {
        let text = "prob,mu_s,sigma2_s,mu_b,sigma2_b\n0.5,0.0,0.04,0.0,0.01\n0.5, 0.0, 0.02, 0.0, 0.01\n";
        let proc = parse_states_csv(text, LawKind::LogNormal).unwrap();
        assert_eq!(proc.states.len(), 2);
        let v = predictable_variation_lognormal(&proc).unwrap();
        assert!((v - 2.5e-5).abs() < 1e-18);
    }

    #[test]
    fn csv_rejects_bad_input() {
        assert!(parse_states_csv("0.5,0.0,0.04,0.0\n", LawKind::LogNormal).is_err());
        assert!(parse_states_csv("0.5,0.0,x,0.0,0.01\n", LawKind::LogNormal).is_err());
        // probabilities must sum to 1
        assert!(parse_states_csv("0.5,0.0,0.04,0.0,0.01\n", LawKind::LogNormal).is_err());
    }

    #[test]
    fn invalid_process_is_rejected() {
        let empty = StateProcess { states: vec![] };
        assert!(empty.validate().is_err());
        // E z does not exist when alpha <= beta + 1
        let bad = NigParams::new(0.0, 2.0, 1.5, 1.0).unwrap();
        let pair = StatePair {
            stock: ConditionalLaw::LogNig(bad),
            bond: ConditionalLaw::LogNig(NigParams::new(0.0, 5.0, 0.0, 1.0).unwrap()),
        };
        let proc = StateProcess { states: vec![(1.0, pair)] };
        assert!(proc.validate().is_err());
    }
}
