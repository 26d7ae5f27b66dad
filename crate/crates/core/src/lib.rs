//! Linear contracts for teams of agents.
//!
//! A principal hires a subset `S` of `n` agents. Agent `i` pays a private
//! cost `c_i` to work, and a working team produces value `f(S)`. A linear
//! contract pays each agent a share of the produced value; agent `i` in `S`
//! needs at least `c_i / f(i:S)`, where `f(i:S)` is its marginal contribution.
//! The crate provides:
//!
//! * value functions and oracles with query accounting ([`valuefn`]),
//! * the share/feasibility/welfare/utility calculus ([`contract`]),
//! * brute-force optima and welfare-utility gaps ([`exact`]),
//! * the constant-factor XOS approximation based on scaling sets ([`xosalg`]),
//! * logarithmic-query algorithms for symmetric agents ([`symalg`]),
//! * value maximization under share and transfer budgets ([`objectives`]),
//! * generators for the extremal families and seeded random corpora ([`instances`]).
//!
//! All arithmetic is `f64`; comparisons that decide feasibility or ties use
//! the absolute tolerance [`EPS`].

// `!(x > 0.0)` is how inputs reject NaN along with out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod contract;
pub mod error;
pub mod exact;
pub mod instance;
pub mod instances;
pub mod objectives;
pub mod par;
pub mod set;
pub mod symalg;
pub mod valuefn;
pub mod xosalg;

pub use contract::{Outcome, Shares};
pub use error::{Error, Result};
pub use exact::{GapReport, Objective, OptResult};
pub use instance::{Costs, Instance};
pub use par::Exec;
pub use set::AgentSet;
pub use valuefn::{Oracle, QueryStats, SymFamily, ValueFn, ValueKind};
pub use xosalg::{ApproxConfig, DemandMode};

/// Absolute tolerance for feasibility checks, ties and validator inequalities.
pub const EPS: f64 = 1e-9;

/// Largest team count for which all `2^n` teams are enumerated.
pub const ENUMERATION_CAP: usize = 20;

/// Returns the index of the largest score, breaking near-ties (within [`EPS`])
/// toward the candidate that `tie` ranks first. `None` if all scores are NaN
/// or the input is empty.
pub(crate) fn argmax_by<T>(
    items: &[T],
    score: impl Fn(&T) -> f64,
    tie: impl Fn(&T, &T) -> std::cmp::Ordering,
) -> Option<usize> {
    let best = items
        .iter()
        .map(&score)
        .filter(|v| !v.is_nan())
        .fold(f64::NEG_INFINITY, f64::max);
    let mut pick: Option<usize> = None;
    for (k, item) in items.iter().enumerate() {
        let v = score(item);
        if v.is_nan() || v < best - EPS {
            continue;
        }
        match pick {
            Some(p) if tie(&items[p], item) != std::cmp::Ordering::Greater => {}
            _ => pick = Some(k),
        }
    }
    pick
}
