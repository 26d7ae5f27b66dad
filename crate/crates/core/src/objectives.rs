//! Value and welfare under share budgets `b` and transfer budgets `B`.
//!
//! A team is `b`-feasible under costs `c` exactly when it is 1-feasible under
//! `c / b`, so every routine here reduces to the doubling collection of
//! [`crate::xosalg`] on rescaled costs.
//!
//! Welfare under a joint `b`/`B` budget is not provided as a separate
//! routine: it composes [`welfare_approx_bfeasible`] with the same grid over
//! share budgets that [`value_approx_btransfer`] uses.

use std::collections::HashSet;

use crate::contract::{best_outcome, outcome_unchecked, Outcome};
use crate::error::{Error, Result};
use crate::instance::Costs;
use crate::par::Exec;
use crate::set::AgentSet;
use crate::valuefn::Oracle;
use crate::xosalg::{doubling_collection, ApproxConfig};
use crate::EPS;

/// Below this share budget the value routine already gives good utility;
/// above it, the welfare routine runs the collection with `m >= 1/b`.
pub const WELFARE_SPLIT: f64 = 0.9;

/// Largest share budget accepted by [`welfare_approx_bfeasible`].
pub const WELFARE_MAX_B: f64 = 1.9;

/// Grid ratio exponent for the share-budget grid of [`value_approx_btransfer`].
pub const SHARE_GRID_MU: f64 = 0.5;

/// The doubling parameters tuned for value rather than welfare: `m = 1`, `M = 3`.
pub fn value_config(base: &ApproxConfig) -> ApproxConfig {
    ApproxConfig {
        m: 1.0,
        big_m: 3.0,
        ..base.clone()
    }
}

fn check_b(b: f64) -> Result<()> {
    if b > 0.0 && b.is_finite() {
        Ok(())
    } else {
        Err(Error::input(format!(
            "the share budget b must be positive and finite, got {b}"
        )))
    }
}

fn value_candidates(
    oracle: &Oracle<'_>,
    costs: &Costs,
    b: f64,
    config: &ApproxConfig,
    exec: Exec,
) -> Result<Vec<AgentSet>> {
    let scaled = costs.scaled(b);
    Ok(doubling_collection(oracle, &scaled, &value_config(config), exec)?.sets())
}

/// A `b`-feasible team of large value: within `(3/A) 2^gamma` of the best
/// `b`-feasible value.
pub fn value_approx_bfeasible(
    oracle: &Oracle<'_>,
    costs: &Costs,
    b: f64,
    config: &ApproxConfig,
    exec: Exec,
) -> Result<Outcome> {
    check_b(b)?;
    let sets = value_candidates(oracle, costs, b, config, exec)?;
    Ok(best_outcome(oracle, costs, &sets, b, |o| o.f))
}

/// Share budgets tried for transfer budget `B`: from `min(b, B / min_i f(i))`
/// down by factors `2^-mu` until just below `min(b, B / f([n]))`.
pub fn share_grid(oracle: &Oracle<'_>, b: f64, transfer: f64) -> Vec<f64> {
    if transfer.is_infinite() {
        return vec![b];
    }
    let n = oracle.n();
    let min_single = (0..n)
        .map(|i| oracle.eval(&AgentSet::singleton(i)))
        .fold(f64::INFINITY, f64::min);
    let f_all = oracle.eval(&AgentSet::full(n));
    let hi = b.min(transfer / min_single);
    let lo = b.min(transfer / f_all);
    let step = 2f64.powf(-SHARE_GRID_MU);
    let mut grid = vec![hi];
    let mut cur = hi;
    while cur >= lo && cur > 0.0 {
        cur *= step;
        grid.push(cur);
    }
    grid
}

/// A team of large value that is `b`-feasible and pays at most `B` in total.
pub fn value_approx_btransfer(
    oracle: &Oracle<'_>,
    costs: &Costs,
    b: f64,
    transfer: f64,
    config: &ApproxConfig,
    exec: Exec,
) -> Result<Outcome> {
    check_b(b)?;
    if !(transfer >= 0.0) {
        return Err(Error::input(format!(
            "the transfer budget B must be nonnegative, got {transfer}"
        )));
    }
    if transfer == 0.0 {
        return Ok(Outcome::empty());
    }
    let mut seen = HashSet::new();
    let mut sets = Vec::new();
    for share in share_grid(oracle, b, transfer) {
        for s in value_candidates(oracle, costs, share, config, exec)? {
            if seen.insert(s.clone()) {
                sets.push(s);
            }
        }
    }
    let within: Vec<AgentSet> = sets
        .into_iter()
        .filter(|s| outcome_unchecked(oracle, costs, s).transfer() <= transfer + EPS)
        .collect();
    Ok(best_outcome(oracle, costs, &within, b, |o| o.f))
}

/// A `b`-feasible team whose utility approximates the best `b`-feasible
/// welfare, for `0 < b <= 1.9`.
pub fn welfare_approx_bfeasible(
    oracle: &Oracle<'_>,
    costs: &Costs,
    b: f64,
    config: &ApproxConfig,
    exec: Exec,
) -> Result<Outcome> {
    check_b(b)?;
    if b > WELFARE_MAX_B {
        return Err(Error::input(format!(
            "welfare approximation needs b <= {WELFARE_MAX_B}, got {b}"
        )));
    }
    if b <= WELFARE_SPLIT {
        return value_approx_bfeasible(oracle, costs, b, config, exec);
    }
    let tuned = ApproxConfig {
        m: config.m.max(1.0 / b),
        ..config.clone()
    };
    let sets = doubling_collection(oracle, costs, &tuned, exec)?.sets();
    Ok(best_outcome(oracle, costs, &sets, b, |o| o.g))
}
