//! The experiment runners. Each one is a thin delegation to the library:
//! parse parameters, call `ratfin`, lay the results out as a table.

use std::fmt;

use ratfin::excess_vol::{self, LawKind};
use ratfin::hjm;
use ratfin::nig::NigParams;
use ratfin::pde::{self, Payoff, PdeGrid, PredictableOptionProblem};
use ratfin::premium::{self, EconomyParams, GrowthLaw};
use ratfin::stratonovich::{self, AlphaSdeSpec, DriftConvention, PathGrid};

use crate::config::{ConfigError, Params};
use crate::table::{Cell, Table};

/// Errors split by exit code: usage/config problems exit 2, domain or
/// numerical failures exit 1 with the library message verbatim.
#[derive(Debug)]
pub enum RunError {
    Usage(String),
    Domain(String),
}

impl fmt::Display for RunError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RunError::Usage(m) | RunError::Domain(m) => write!(f, "{m}"),
        }
    }
}

impl From<ConfigError> for RunError {
    fn from(e: ConfigError) -> Self {
        RunError::Usage(e.0)
    }
}

impl From<ratfin::Error> for RunError {
    fn from(e: ratfin::Error) -> Self {
        RunError::Domain(e.to_string())
    }
}

pub fn run_experiment(id: &str, params: &Params, seed: u64) -> Result<Table, RunError> {
    let table = match id {
        "nig-table" => nig_table(params)?,
        "alpha-integral" => alpha_integral(params, seed)?,
        "sde-convention" => sde_convention(params, seed)?,
        "pde-price" => pde_price(params, seed)?,
        "hjm-check" => hjm_check(params, seed)?,
        "premium-table" => premium_table(params)?,
        "ratio-surface" => ratio_surface(params)?,
        "volatility-verdict" => volatility_verdict(params)?,
        "calibrate" => calibrate(params)?,
        other => return Err(RunError::Usage(format!("unknown experiment {other:?}"))),
    };
    params.finish()?;
    Ok(table)
}

/// `nig-table`: pdf and characteristic-function values on an x grid.
/// Params: `alpha`, `delta` (required), `mu` (0), `beta` (0),
/// `x_min` (-5), `x_max` (5), `n` (101).
fn nig_table(params: &Params) -> Result<Table, RunError> {
    let p = NigParams::new(
        params.f64_or("mu", 0.0)?,
        params.require_f64("alpha")?,
        params.f64_or("beta", 0.0)?,
        params.require_f64("delta")?,
    )?;
    let x_min = params.f64_or("x_min", -5.0)?;
    let x_max = params.f64_or("x_max", 5.0)?;
    let n = params.usize_or("n", 101)?;
    if !(x_max > x_min) || n < 2 {
        return Err(RunError::Usage(format!(
            "need x_min < x_max and n >= 2, got [{x_min}, {x_max}], n = {n}"
        )));
    }
    let mut t = Table::new(&["x", "pdf", "cf_real", "cf_imag"]);
    for i in 0..n {
        let x = x_min + (x_max - x_min) * i as f64 / (n - 1) as f64;
        let cf = p.cf(x);
        t.push(vec![x.into(), p.pdf(x).into(), cf.re.into(), cf.im.into()]);
    }
    Ok(t)
}

/// `alpha-integral`: MC mean of the alpha-point integral of B against dB;
/// the exact value is `alpha * horizon`. Params: `alphas`
/// (0,0.25,0.5,0.75,1), `horizon` (1), `steps` (1024), `n_paths` (10000).
fn alpha_integral(params: &Params, seed: u64) -> Result<Table, RunError> {
    let alphas = params.f64_list_or("alphas", &[0.0, 0.25, 0.5, 0.75, 1.0])?;
    let horizon = params.f64_or("horizon", 1.0)?;
    let steps = params.usize_or("steps", 1024)?;
    let n_paths = params.usize_or("n_paths", 10_000)?;
    let grid = PathGrid::new(horizon, steps)?;
    let mut t = Table::new(&["alpha", "mean", "std_err", "exact", "n_diverged"]);
    for alpha in alphas {
        let stats = stratonovich::alpha_integral_ensemble(|_, b| b, &grid, alpha, n_paths, seed)?;
        t.push(vec![
            alpha.into(),
            stats.mean.into(),
            stats.std_err.into(),
            (alpha * horizon).into(),
            Cell::Int(stats.n_diverged as i64),
        ]);
    }
    Ok(t)
}

/// `sde-convention`: terminal means of the alpha-point scheme and both
/// Ito-form drift conventions for geometric dynamics. Params: `m` (0),
/// `s` (0.5), `alpha` (1), `x0` (1), `horizon` (1), `steps` (256),
/// `n_paths` (100000).
fn sde_convention(params: &Params, seed: u64) -> Result<Table, RunError> {
    let spec = AlphaSdeSpec::geometric(
        params.f64_or("m", 0.0)?,
        params.f64_or("s", 0.5)?,
        params.f64_or("alpha", 1.0)?,
        params.f64_or("x0", 1.0)?,
    );
    let grid = PathGrid::new(params.f64_or("horizon", 1.0)?, params.usize_or("steps", 256)?)?;
    let n_paths = params.usize_or("n_paths", 100_000)?;
    let report = stratonovich::convention_discrepancy_report(&spec, &grid, n_paths, seed)?;
    let matched = match report.matched_convention() {
        Some(DriftConvention::Eq3Decomposition) => "eq3",
        Some(DriftConvention::Eq5AsPrinted) => "eq5",
        None => "none",
    };
    let mut t = Table::new(&["scheme", "mean", "std_err", "n_diverged", "matched"]);
    for (name, stats, tag) in [
        ("alpha_point", report.alpha_point, Cell::Str(matched.into())),
        ("eq3", report.eq3, Cell::Null),
        ("eq5", report.eq5, Cell::Null),
    ] {
        t.push(vec![
            name.into(),
            stats.mean.into(),
            stats.std_err.into(),
            Cell::Int(stats.n_diverged as i64),
            tag,
        ]);
    }
    Ok(t)
}

/// `pde-price`: finite-difference price of a European option under
/// excess predictability, with an optional MC cross-check. Params:
/// `vol` (0.2), `rate` (0.05), `alpha` (0), `gamma` (0), `payoff`
/// (call | put), `strike` (100), `spot` (100), `maturity` (1),
/// `n_x` (400), `n_t` (400), `mc_paths` (0 = skip), `mc_steps` (256).
fn pde_price(params: &Params, seed: u64) -> Result<Table, RunError> {
    let strike = params.f64_or("strike", 100.0)?;
    let payoff = match params.str_or("payoff", "call") {
        "call" => Payoff::Call { strike },
        "put" => Payoff::Put { strike },
        other => return Err(RunError::Usage(format!("payoff must be call or put, got {other:?}"))),
    };
    let spot = params.f64_or("spot", 100.0)?;
    let maturity = params.f64_or("maturity", 1.0)?;
    let problem = PredictableOptionProblem::constant(
        spot,
        payoff,
        params.f64_or("rate", 0.05)?,
        params.f64_or("vol", 0.2)?,
        maturity,
        params.f64_or("gamma", 0.0)?,
        params.f64_or("alpha", 0.0)?,
    );
    let grid = PdeGrid::for_problem(&problem, params.usize_or("n_x", 400)?, params.usize_or("n_t", 400)?)?;
    let price = pde::solve_pde(&problem, &grid)?.price_at_spot(spot)?;
    let mc_paths = params.usize_or("mc_paths", 0)?;
    let mc_steps = params.usize_or("mc_steps", 256)?;
    let mc = if mc_paths > 0 {
        Some(pde::mc_price_predictable(&problem, &PathGrid::new(maturity, mc_steps)?, mc_paths, seed)?)
    } else {
        None
    };
    let mut t = Table::new(&["spot", "strike", "maturity", "price", "mc_price", "mc_std_err", "mc_diverged"]);
    t.push(vec![
        spot.into(),
        strike.into(),
        maturity.into(),
        price.into(),
        mc.map(|m| m.price).into(),
        mc.map(|m| m.std_err).into(),
        mc.map(|m| Cell::Int(m.n_diverged as i64)).unwrap_or(Cell::Null),
    ]);
    Ok(t)
}

/// `hjm-check`: no-arbitrage check of a forward-curve model, with an
/// optional MC bond-price consistency check. Params: `model`
/// (ho-lee | constant), `v0` (0.01), `theta0` (0.4), `m0` (0.002),
/// `alpha` (0.5), `f0` (0.03), `t_max` (10), `n_mat` (41), `tol`
/// (1e-10), `bond_maturity` (0 = skip), `mc_paths` (0 = skip),
/// `mc_steps` (100).
fn hjm_check(params: &Params, seed: u64) -> Result<Table, RunError> {
    let v0 = params.f64_or("v0", 0.01)?;
    let theta0 = params.f64_or("theta0", 0.4)?;
    let m0 = params.f64_or("m0", 0.002)?;
    let alpha = params.f64_or("alpha", 0.5)?;
    let f0 = params.f64_or("f0", 0.03)?;
    let t_max = params.f64_or("t_max", 10.0)?;
    let n_mat = params.usize_or("n_mat", 41)?;
    if n_mat < 2 {
        return Err(RunError::Usage(format!("n_mat must be >= 2, got {n_mat}")));
    }
    let model = match params.str_or("model", "ho-lee") {
        "ho-lee" => hjm::ho_lee_model(v0, theta0, alpha, f0, t_max, n_mat),
        "constant" => hjm::constant_model(v0, m0, alpha, f0, t_max, n_mat),
        other => {
            return Err(RunError::Usage(format!("model must be ho-lee or constant, got {other:?}")))
        }
    };
    let tol = params.f64_or("tol", 1e-10)?;
    let t_grid: Vec<f64> = model.maturities[..n_mat - 1].to_vec();
    let mat_grid: Vec<f64> = model.maturities[1..].to_vec();
    let report = model.check_no_arbitrage(&t_grid, &mat_grid, tol)?;

    let bond_maturity = params.f64_or("bond_maturity", 0.0)?;
    let mc_paths = params.usize_or("mc_paths", 0)?;
    let mc_steps = params.usize_or("mc_steps", 100)?;
    let (initial, mc) = if bond_maturity > 0.0 {
        let initial = model.bond_price_initial(bond_maturity)?;
        let mc = if mc_paths > 0 {
            Some(model.bond_price_mc(bond_maturity, mc_steps, mc_paths, seed)?)
        } else {
            None
        };
        (Some(initial), mc)
    } else {
        (None, None)
    };

    let mut t = Table::new(&[
        "arbitrage_free",
        "max_theta_spread",
        "bond_maturity",
        "bond_initial",
        "bond_mc",
        "bond_mc_std_err",
    ]);
    t.push(vec![
        Cell::Bool(report.arbitrage_free),
        report.max_theta_spread.into(),
        if bond_maturity > 0.0 { bond_maturity.into() } else { Cell::Null },
        initial.into(),
        mc.map(|m| m.price).into(),
        mc.map(|m| m.std_err).into(),
    ]);
    Ok(t)
}

/// `premium-table`: log equity premium under log-NIG growth vs the
/// lognormal premium at matched variance, tabulated over risk aversion.
/// Params: `alpha`, `delta` (required), `mu` (0), `beta` (0),
/// `discount` (0.97), `a_min` (1), `a_max` (15), `a_step` (1).
fn premium_table(params: &Params) -> Result<Table, RunError> {
    let p = NigParams::new(
        params.f64_or("mu", 0.0)?,
        params.require_f64("alpha")?,
        params.f64_or("beta", 0.0)?,
        params.require_f64("delta")?,
    )?;
    let discount = params.f64_or("discount", 0.97)?;
    let a_min = params.f64_or("a_min", 1.0)?;
    let a_max = params.f64_or("a_max", 15.0)?;
    let a_step = params.f64_or("a_step", 1.0)?;
    if !(a_step > 0.0 && a_max >= a_min && a_min > 0.0) {
        return Err(RunError::Usage(format!(
            "need 0 < a_min <= a_max and a_step > 0, got [{a_min}, {a_max}] step {a_step}"
        )));
    }
    let variance = p.moments().variance;
    let mut t = Table::new(&[
        "risk_aversion",
        "lognormal_premium",
        "nig_premium",
        "equity_return",
        "riskfree_return",
    ]);
    let n = ((a_max - a_min) / a_step).round() as usize;
    for k in 0..=n {
        let a = a_min + k as f64 * a_step;
        let econ = EconomyParams { discount, risk_aversion: a, growth: GrowthLaw::LogNig(p.clone()) };
        t.push(vec![
            a.into(),
            premium::premium_lognormal(a, variance).into(),
            premium::premium_nig(&p, a).ok().into(),
            econ.expected_equity_return().ok().into(),
            econ.riskfree_return().ok().into(),
        ]);
    }
    Ok(t)
}

/// `ratio-surface`: NIG-over-lognormal premium ratio on an
/// (a, alpha) grid, infeasible cells masked. Params: `risk_aversions`
/// (1..10), `alphas` (1.5, 2, 3, 5, 10, 10.005, 20, 50).
fn ratio_surface(params: &Params) -> Result<Table, RunError> {
    let default_a: Vec<f64> = (1..=10).map(f64::from).collect();
    let risk_aversions = params.f64_list_or("risk_aversions", &default_a)?;
    let alphas =
        params.f64_list_or("alphas", &[1.5, 2.0, 3.0, 5.0, 10.0, 10.005, 20.0, 50.0])?;
    let surface = premium::ratio_surface(&risk_aversions, &alphas)?;
    let mut t = Table::new(&["risk_aversion", "alpha", "ratio"]);
    for (i, &a) in surface.risk_aversions.iter().enumerate() {
        for (j, &al) in surface.alphas.iter().enumerate() {
            t.push(vec![a.into(), al.into(), surface.ratios[i][j].into()]);
        }
    }
    Ok(t)
}

/// `volatility-verdict`: market-efficiency verdict for a state process
/// loaded from CSV. Params: `states` (path, required), `law`
/// (lognormal | lognig), `tol` (1e-12).
fn volatility_verdict(params: &Params) -> Result<Table, RunError> {
    let path = params.require_str("states")?;
    let law = match params.str_or("law", "lognormal") {
        "lognormal" => LawKind::LogNormal,
        "lognig" => LawKind::LogNig,
        other => {
            return Err(RunError::Usage(format!("law must be lognormal or lognig, got {other:?}")))
        }
    };
    let tol = params.f64_or("tol", 1e-12)?;
    let text = std::fs::read_to_string(path)
        .map_err(|e| RunError::Usage(format!("cannot read states file {path:?}: {e}")))?;
    let process = excess_vol::parse_states_csv(&text, law)?;
    let verdict = excess_vol::efficiency_verdict(&process, law, tol)?;
    let mut t = Table::new(&["law", "n_states", "tol", "efficient", "measure"]);
    t.push(vec![
        match law {
            LawKind::LogNormal => "lognormal".into(),
            LawKind::LogNig => "lognig".into(),
        },
        Cell::Int(process.states.len() as i64),
        tol.into(),
        Cell::Bool(verdict.efficient),
        verdict.measure.into(),
    ]);
    Ok(t)
}

/// `calibrate`: fit lognormal and NIG growth laws to an observed
/// gross-growth series (one value per line) and tabulate premia for
/// a = 1..15. Params: `series` (path, required).
fn calibrate(params: &Params) -> Result<Table, RunError> {
    let path = params.require_str("series")?;
    let text = std::fs::read_to_string(path)
        .map_err(|e| RunError::Usage(format!("cannot read series file {path:?}: {e}")))?;
    let mut series = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let field = line.split(',').next().unwrap_or("").trim();
        if field.is_empty() || field.starts_with('#') {
            continue;
        }
        match field.parse::<f64>() {
            Ok(v) => series.push(v),
            Err(_) if i == 0 => continue, // header
            Err(_) => {
                return Err(RunError::Usage(format!(
                    "series file {path:?} line {}: bad number {field:?}",
                    i + 1
                )))
            }
        }
    }
    let c = premium::calibrate_growth(&series)?;
    let nig = c.nig;
    let mut t = Table::new(&[
        "risk_aversion",
        "lognormal_premium",
        "nig_premium",
        "lognormal_mu",
        "lognormal_sigma2",
        "nig_mu",
        "nig_alpha",
        "nig_beta",
        "nig_delta",
        "nig_fallback_reason",
    ]);
    for (a, lnp, nigp) in c.premia {
        t.push(vec![
            a.into(),
            lnp.into(),
            nigp.into(),
            c.lognormal_mu.into(),
            c.lognormal_sigma2.into(),
            nig.map(|p| p.0).into(),
            nig.map(|p| p.1).into(),
            nig.map(|p| p.2).into(),
            nig.map(|p| p.3).into(),
            c.nig_fallback_reason
                .as_deref()
                .map(|r| Cell::Str(r.to_string()))
                .unwrap_or(Cell::Null),
        ]);
    }
    Ok(t)
}
