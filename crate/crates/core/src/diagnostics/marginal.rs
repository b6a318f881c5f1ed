//! Exact marginals of linear-drift bridges.

use crate::error::{domain, Result};

/// `(e^{βt} - 1)/β`, equal to `t` at `β = 0`.
fn growth(beta: f64, t: f64) -> f64 {
    if beta == 0.0 {
        t
    } else {
        (beta * t).exp_m1() / beta
    }
}

/// Mean and variance of `X_t` for `dX = (α + βX) dt + dW` started at `u` and
/// conditioned on `X_T = v`.
pub fn gaussian_bridge_marginal(alpha: f64, beta: f64, u: f64, v: f64, horizon: f64, t: f64) -> Result<(f64, f64)> {
    if ![alpha, beta, u, v, horizon, t].iter().all(|x| x.is_finite()) {
        return domain("bridge parameters must be finite");
    }
    if !(t > 0.0 && t < horizon) {
        return domain(format!("time {t} must lie strictly inside (0, {horizon})"));
    }
    let rest = horizon - t;
    // X_t | X_0 = u
    let prior_mean = u + (beta * u + alpha) * growth(beta, t);
    let prior_var = growth(2.0 * beta, t);
    // X_T | X_t = x  ~  N(a x + c, q)
    let a = (beta * rest).exp();
    let c = alpha * growth(beta, rest);
    let q = growth(2.0 * beta, rest);
    let precision = 1.0 / prior_var + a * a / q;
    let mean = (prior_mean / prior_var + a * (v - c) / q) / precision;
    Ok((mean, 1.0 / precision))
}
