//! Finite-difference pricer against closed-form and Monte Carlo oracles.

use ratfin::pde::{
    bs_closed_form, mc_price_predictable, solve_pde, Payoff, PdeGrid, PredictableOptionProblem,
};
use ratfin::stratonovich::PathGrid;

fn price(problem: &PredictableOptionProblem, n: usize) -> f64 {
    let grid = PdeGrid::for_problem(problem, n, n).unwrap();
    solve_pde(problem, &grid).unwrap().price_at_spot(problem.spot).unwrap()
}

#[test]
fn put_call_parity_under_predictability_yield() {
    // constant coefficients: D_y = 2 rho (gamma + alpha) v^2 acts as a
    // dividend yield q, so C - P = S e^{-qT} - K e^{-rT}
    let (rate, vol, maturity, gamma, alpha) = (0.05, 0.2, 1.0, 0.5, 0.1);
    let q = 2.0 * (gamma - alpha) * (gamma + alpha) * vol * vol;
    let call = price(
        &PredictableOptionProblem::constant(100.0, Payoff::Call { strike: 100.0 }, rate, vol, maturity, gamma, alpha),
        400,
    );
    let put = price(
        &PredictableOptionProblem::constant(100.0, Payoff::Put { strike: 100.0 }, rate, vol, maturity, gamma, alpha),
        400,
    );
    let parity = 100.0 * (-q * maturity).exp() - 100.0 * (-rate * maturity as f64).exp();
    assert!((call - put - parity).abs() < 0.02, "C - P = {}, parity {parity}", call - put);
}

#[test]
fn call_price_decreases_in_excess_predictability() {
    let mut last = f64::INFINITY;
    for gamma in [0.0, 0.3, 0.5, 0.7] {
        let p = price(
            &PredictableOptionProblem::constant(100.0, Payoff::Call { strike: 100.0 }, 0.05, 0.2, 1.0, gamma, 0.0),
            300,
        );
        assert!(p < last, "gamma = {gamma}: {p} !< {last}");
        last = p;
    }
}

#[test]
fn pde_matches_bs_with_matching_yield_for_any_constant_pair() {
    for (gamma, alpha) in [(0.25, 0.25), (0.6, 0.2), (0.1, 0.4)] {
        let q = 2.0 * (gamma - alpha) * (gamma + alpha) * 0.2 * 0.2;
        let oracle = bs_closed_form(100.0, 100.0, 0.05, q, 0.2, 1.0, Payoff::Call { strike: 100.0 }).unwrap();
        let got = price(
            &PredictableOptionProblem::constant(100.0, Payoff::Call { strike: 100.0 }, 0.05, 0.2, 1.0, gamma, alpha),
            400,
        );
        assert!((got - oracle).abs() < 0.02, "(gamma, alpha) = ({gamma}, {alpha}): {got} vs {oracle}");
    }
}

#[test]
fn mc_agrees_with_pde_price() {
    let problem =
        PredictableOptionProblem::constant(100.0, Payoff::Call { strike: 100.0 }, 0.05, 0.2, 1.0, 0.5, 0.25);
    let fd = price(&problem, 400);
    let mc = mc_price_predictable(&problem, &PathGrid::new(1.0, 64).unwrap(), 200_000, 31).unwrap();
    assert_eq!(mc.n_diverged, 0);
    // log-Euler is exact for constant coefficients, so only MC noise and
    // FD truncation separate the two
    assert!((mc.price - fd).abs() < 4.0 * mc.std_err + 0.02, "mc {} fd {fd} se {}", mc.price, mc.std_err);
}
