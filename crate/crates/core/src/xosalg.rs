//! Constant-factor welfare approximation for XOS value functions.
//!
//! The pipeline has three layers:
//!
//! * [`scaling_set`] peels agents off a team, least relatively-useful first,
//!   and returns an intermediate team whose value lands in `[psi/2, psi + x]`
//!   while every member keeps at least half of its original marginal.
//! * [`scaling_attempt`] prices agents at `2 sqrt(c_i A y)`, asks a demand
//!   oracle for a team at those prices, trims it to a welfare-minimal team and
//!   feeds it to [`scaling_set`] with target `psi = (A/m) y - x`. Outputs have
//!   total share at most `1/m`.
//! * [`doubling_collection`] runs the attempt for `y` on a geometric grid
//!   (ratio `2^gamma`), each time on the agents whose single value is below
//!   `(A/m)(y/M)`, and collects the outputs together with all singletons.
//!
//! [`approx_welfare`] returns the collected team of largest utility.

use std::collections::HashSet;
use std::sync::atomic::{AtomicU64, Ordering as AtomicOrdering};

use serde::{Deserialize, Serialize};

use crate::contract::{best_outcome, outcome_unchecked, welfare_minimal_unchecked, Outcome};
use crate::error::{Error, Result};
use crate::instance::Costs;
use crate::par::{map_range, Exec};
use crate::set::AgentSet;
use crate::valuefn::{exact_demand, greedy_demand, Oracle, QueryStats};
use crate::EPS;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DemandMode {
    /// Exhaustive demand oracle (quality `a = 1`), limited to 20 agents per call.
    Exact,
    /// Greedy demand from value queries (quality `1 - 1/e` for submodular `f`).
    Greedy,
}

/// How agents are priced before the demand query.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScaledPrice {
    /// `2 sqrt(c_i A y)`; the share bound of the outputs relies on this form.
    TwiceRoot,
    /// `sqrt(c_i m A y)`, kept for experimentation.
    RootWithM,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ApproxConfig {
    /// Demand-oracle quality in `(0, 1]`.
    pub a: f64,
    /// Grid ratio exponent: consecutive `y` differ by `2^gamma`.
    pub gamma: f64,
    /// Output shares are at most `1/m`.
    pub m: f64,
    /// Agents with single value above `(A/m)(y/M)` are excluded at `y`.
    #[serde(rename = "M")]
    pub big_m: f64,
    pub demand: DemandMode,
    #[serde(default = "default_price")]
    pub price: ScaledPrice,
    #[serde(default = "default_cap")]
    pub max_doubling_iters: usize,
}

fn default_price() -> ScaledPrice {
    ScaledPrice::TwiceRoot
}

fn default_cap() -> usize {
    1_000_000
}

impl ApproxConfig {
    /// Exact demand; utility within a factor 188 of the optimal welfare.
    pub fn xos188() -> Self {
        ApproxConfig {
            a: 1.0,
            gamma: 0.05,
            m: 1.707,
            big_m: 3.414,
            demand: DemandMode::Exact,
            price: ScaledPrice::TwiceRoot,
            max_doubling_iters: default_cap(),
        }
    }

    /// Greedy demand for submodular functions; factor 468.
    pub fn submod468() -> Self {
        ApproxConfig {
            a: 1.0 - (-1f64).exp(),
            m: 1.713,
            big_m: 3.399,
            demand: DemandMode::Greedy,
            ..Self::xos188()
        }
    }

    pub fn preset(name: &str) -> Option<Self> {
        match name {
            "xos188" => Some(Self::xos188()),
            "submod468" => Some(Self::submod468()),
            _ => None,
        }
    }

    /// `A = (a/4)^2`.
    pub fn area(&self) -> f64 {
        (self.a / 4.0).powi(2)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.a > 0.0 && self.a <= 1.0) {
            return Err(Error::input(format!(
                "a must lie in (0, 1], got {}",
                self.a
            )));
        }
        if !(self.gamma > 0.0 && self.gamma < 1.0) {
            return Err(Error::input(format!(
                "gamma must lie in (0, 1), got {}",
                self.gamma
            )));
        }
        if !(self.m >= 1.0 && self.m.is_finite()) {
            return Err(Error::input(format!(
                "m must be at least 1, got {}",
                self.m
            )));
        }
        if !(self.big_m > 1.0 && self.big_m.is_finite()) {
            return Err(Error::input(format!("M must exceed 1, got {}", self.big_m)));
        }
        if self.max_doubling_iters == 0 {
            return Err(Error::input("max_doubling_iters must be positive"));
        }
        Ok(())
    }

    fn price(&self, c: f64, y: f64) -> f64 {
        match self.price {
            ScaledPrice::TwiceRoot => 2.0 * (c * self.area() * y).sqrt(),
            ScaledPrice::RootWithM => (c * self.m * self.area() * y).sqrt(),
        }
    }
}

/// The quantities that decide whether an attempt at scale `y` runs.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ScalingQuantities {
    pub area: f64,
    /// Largest single-agent value on the domain.
    pub x: f64,
    /// `(A/m)(y/x)`.
    pub m_val: f64,
    /// `(A/m) y - x`, the value target handed to [`scaling_set`].
    pub psi: f64,
}

impl ScalingQuantities {
    pub fn new(config: &ApproxConfig, x: f64, y: f64) -> Self {
        let scale = config.area() / config.m * y;
        ScalingQuantities {
            area: config.area(),
            x,
            m_val: scale / x,
            psi: scale - x,
        }
    }
}

static SCALING_CALLS: AtomicU64 = AtomicU64::new(0);
static SCALING_VIOLATIONS: AtomicU64 = AtomicU64::new(0);
static ATTEMPT_OUTPUTS: AtomicU64 = AtomicU64::new(0);
static ATTEMPT_SHARE_VIOLATIONS: AtomicU64 = AtomicU64::new(0);

/// Process-wide counts of postcondition checks, for audits across test suites.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct Audit {
    pub scaling_calls: u64,
    /// Calls whose output missed the value bracket or the marginal-halving bound.
    pub scaling_violations: u64,
    pub attempt_outputs: u64,
    /// Nonempty attempt outputs with total share above `1/m`.
    pub attempt_share_violations: u64,
}

pub fn audit() -> Audit {
    Audit {
        scaling_calls: SCALING_CALLS.load(AtomicOrdering::Relaxed),
        scaling_violations: SCALING_VIOLATIONS.load(AtomicOrdering::Relaxed),
        attempt_outputs: ATTEMPT_OUTPUTS.load(AtomicOrdering::Relaxed),
        attempt_share_violations: ATTEMPT_SHARE_VIOLATIONS.load(AtomicOrdering::Relaxed),
    }
}

/// Shrinks `z` to a team `U` with `psi/2 <= f(U) <= psi + x` and
/// `f(i:U) >= f(i:T0)/2` for its members, where `x` is the largest single
/// value in `z` and `T0` is `z` without its zero-marginal agents.
///
/// Agents are removed one at a time, always the one whose current marginal is
/// the smallest fraction of its marginal in `T0` (lowest index on ties). Among
/// the removals between the first drop to `psi` and the first drop to half of
/// the preceding value, the removal with the largest retained fraction marks
/// the returned team.
pub fn scaling_set(oracle: &Oracle<'_>, z: &AgentSet, psi: f64) -> Result<AgentSet> {
    oracle.vf().check_set(z)?;
    let f_z = oracle.eval(z);
    if !(psi >= -EPS && psi <= f_z + EPS) {
        return Err(Error::precondition(format!(
            "scaling target {psi} outside [0, f(Z) = {f_z}]"
        )));
    }
    SCALING_CALLS.fetch_add(1, AtomicOrdering::Relaxed);
    if psi >= f_z {
        return Ok(z.clone());
    }
    let psi = psi.max(0.0);
    let x = z
        .iter()
        .map(|i| oracle.eval(&AgentSet::singleton(i)))
        .fold(0.0, f64::max);

    // Drop zero-marginal agents so every remaining base marginal is positive.
    let mut base_team = z.clone();
    let mut f_base = f_z;
    'trim: loop {
        for i in base_team.iter() {
            let rest = base_team.without(i);
            let f_rest = oracle.eval(&rest);
            if f_base - f_rest <= 0.0 {
                base_team = rest;
                f_base = f_rest;
                continue 'trim;
            }
        }
        break;
    }
    let base: Vec<(usize, f64)> = base_team
        .iter()
        .map(|i| (i, f_base - oracle.eval(&base_team.without(i))))
        .collect();
    let base_of = |i: usize| {
        base.iter()
            .find(|(j, _)| *j == i)
            .map(|(_, m)| *m)
            .unwrap_or(0.0)
    };

    // removed[t-1] is the agent dropped at step t; values[t] = f(T_t); ratio[t-1] = delta_t.
    let mut team = base_team.clone();
    let mut values = vec![f_base];
    let mut removed = Vec::new();
    let mut ratio = Vec::new();
    while !team.is_empty() {
        let f_team = *values.last().unwrap();
        let mut best: Option<(usize, f64, f64)> = None;
        for i in team.iter() {
            let f_rest = oracle.eval(&team.without(i));
            let r = (f_team - f_rest) / base_of(i);
            if best.is_none_or(|(_, br, _)| r < br) {
                best = Some((i, r, f_rest));
            }
        }
        let (i, r, f_rest) = best.unwrap();
        team.remove(i);
        removed.push(i);
        ratio.push(r);
        values.push(f_rest);
    }

    let steps = removed.len();
    let first_below = (1..=steps).find(|&t| values[t] <= psi).unwrap_or(steps);
    let half = 0.5 * values[first_below - 1];
    let first_half = (first_below..=steps)
        .find(|&t| values[t] <= half)
        .unwrap_or(steps);
    let mut pick = first_below;
    for t in first_below..=first_half {
        if ratio[t - 1] > ratio[pick - 1] {
            pick = t;
        }
    }
    let mut out = base_team;
    for &i in &removed[..pick - 1] {
        out.remove(i);
    }

    let f_out = values[pick - 1];
    let mut ok = f_out >= 0.5 * psi - EPS && f_out <= psi + x + EPS;
    if ok {
        ok = out
            .iter()
            .all(|i| f_out - oracle.eval(&out.without(i)) >= 0.5 * base_of(i) - EPS);
    }
    if !ok {
        SCALING_VIOLATIONS.fetch_add(1, AtomicOrdering::Relaxed);
    }
    Ok(out)
}

/// One attempt at scale `y` restricted to `domain`; returns the empty team
/// when the value target is out of range.
pub fn scaling_attempt(
    oracle: &Oracle<'_>,
    costs: &Costs,
    domain: &AgentSet,
    y: f64,
    config: &ApproxConfig,
) -> Result<AgentSet> {
    oracle.vf().check_set(domain)?;
    if !(y > 0.0) {
        return Err(Error::input(format!(
            "the scale y must be positive, got {y}"
        )));
    }
    if domain.is_empty() {
        return Ok(AgentSet::new());
    }
    let n = oracle.n();
    let mut prices = vec![0.0; n];
    for i in domain.iter() {
        prices[i] = config.price(costs.get(i), y);
    }
    let demand = match config.demand {
        DemandMode::Exact => exact_demand(oracle, &prices, domain)?,
        DemandMode::Greedy => greedy_demand(oracle, &prices, domain),
    };
    let z = welfare_minimal_unchecked(oracle, &Costs::PerAgent(prices), &demand);

    let x = domain
        .iter()
        .map(|i| oracle.eval(&AgentSet::singleton(i)))
        .fold(0.0, f64::max);
    let q = ScalingQuantities::new(config, x, y);
    let f_z = oracle.eval(&z);
    if !(q.psi >= 0.0 && q.psi < f_z) {
        return Ok(AgentSet::new());
    }
    let u = scaling_set(oracle, &z, q.psi)?;
    if !u.is_empty() {
        ATTEMPT_OUTPUTS.fetch_add(1, AtomicOrdering::Relaxed);
        if outcome_unchecked(oracle, costs, &u).rho > 1.0 / config.m + EPS {
            ATTEMPT_SHARE_VIOLATIONS.fetch_add(1, AtomicOrdering::Relaxed);
        }
    }
    Ok(u)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Origin {
    Singleton,
    Scaling { y: f64 },
}

#[derive(Clone, Debug, PartialEq)]
pub struct Candidate {
    pub set: AgentSet,
    pub origin: Origin,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct CandidateCollection {
    pub members: Vec<Candidate>,
    /// Number of scales visited by the doubling loop.
    pub scales: usize,
}

impl CandidateCollection {
    pub fn sets(&self) -> Vec<AgentSet> {
        self.members.iter().map(|c| c.set.clone()).collect()
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }
}

/// Feasible singletons plus every feasible attempt output over the scale grid.
pub fn doubling_collection(
    oracle: &Oracle<'_>,
    costs: &Costs,
    config: &ApproxConfig,
    exec: Exec,
) -> Result<CandidateCollection> {
    config.validate()?;
    let vf = oracle.vf();
    let n = oracle.n();
    let single: Vec<f64> = (0..n)
        .map(|i| oracle.eval(&AgentSet::singleton(i)))
        .collect();

    let mut collection = CandidateCollection::default();
    let mut seen = HashSet::new();
    for (i, &f_i) in single.iter().enumerate() {
        if costs.get(i) / f_i <= 1.0 + EPS {
            let s = AgentSet::singleton(i);
            seen.insert(s.clone());
            collection.members.push(Candidate {
                set: s,
                origin: Origin::Singleton,
            });
        }
    }

    let best_single_welfare = single
        .iter()
        .enumerate()
        .map(|(i, f)| f - costs.get(i))
        .fold(f64::NEG_INFINITY, f64::max);
    let mut y = if best_single_welfare > 0.0 {
        best_single_welfare
    } else {
        single.iter().copied().fold(0.0, f64::max) / 2.0
    };
    let f_all = oracle.eval(&AgentSet::full(n));
    let step = 2f64.powf(config.gamma);
    let mut scales = Vec::new();
    while y <= f_all {
        if scales.len() >= config.max_doubling_iters {
            return Err(Error::IterationCap(format!(
                "more than {} scales between the starting scale and f([n]) = {f_all}; raise gamma or the cap",
                config.max_doubling_iters
            )));
        }
        scales.push(y);
        y *= step;
    }
    collection.scales = scales.len();

    let limit = config.area() / config.m / config.big_m;
    let runs = map_range(exec, 0..scales.len(), |k| {
        let y = scales[k];
        let domain: AgentSet = (0..n).filter(|&i| single[i] <= limit * y).collect();
        let local = Oracle::new(vf);
        let out = if domain.is_empty() {
            Ok(AgentSet::new())
        } else {
            scaling_attempt(&local, costs, &domain, y, config)
        };
        (out, local.stats())
    });

    let mut stats = QueryStats::default();
    let mut outputs = Vec::with_capacity(runs.len());
    for (out, s) in runs {
        stats += s;
        outputs.push(out);
    }
    oracle.absorb(stats);
    for (k, out) in outputs.into_iter().enumerate() {
        let set = out?;
        if set.is_empty() || seen.contains(&set) {
            continue;
        }
        if outcome_unchecked(oracle, costs, &set).rho > 1.0 + EPS {
            continue;
        }
        seen.insert(set.clone());
        collection.members.push(Candidate {
            set,
            origin: Origin::Scaling { y: scales[k] },
        });
    }
    Ok(collection)
}

/// The collected team of largest utility (lexicographically smallest on ties).
pub fn approx_welfare(
    oracle: &Oracle<'_>,
    costs: &Costs,
    config: &ApproxConfig,
    exec: Exec,
) -> Result<Outcome> {
    let collection = doubling_collection(oracle, costs, config, exec)?;
    Ok(best_outcome(oracle, costs, &collection.sets(), 1.0, |o| {
        o.g
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::valuefn::{SymFamily, ValueFn};

    fn counting(n: usize) -> ValueFn {
        ValueFn::additive(vec![1.0; n]).unwrap()
    }

    #[test]
    fn scaling_set_hand_trace() {
        let vf = counting(4);
        let o = Oracle::new(&vf);
        let u = scaling_set(&o, &AgentSet::full(4), 2.0).unwrap();
        assert_eq!(u.len(), 3);
        assert_eq!(u.to_vec(), vec![1, 2, 3]);
    }

    #[test]
    fn scaling_set_edge_targets() {
        let vf = counting(4);
        let o = Oracle::new(&vf);
        let full = AgentSet::full(4);
        assert_eq!(scaling_set(&o, &full, 4.0).unwrap(), full);
        let u = scaling_set(&o, &full, 0.0).unwrap();
        assert!(vf.value(&u) <= 1.0);
        let err = scaling_set(&o, &full, 5.0).unwrap_err();
        assert!(matches!(err, Error::Precondition(_)));
        assert!(scaling_set(&o, &full, -1.0).is_err());
    }

    #[test]
    fn attempt_with_negative_target_is_empty() {
        let vf = counting(10);
        let o = Oracle::new(&vf);
        let c = Costs::Uniform(1e-6);
        let u = scaling_attempt(&o, &c, &AgentSet::full(10), 5.0, &ApproxConfig::xos188()).unwrap();
        assert!(u.is_empty());
    }

    #[test]
    fn attempt_lands_in_bracket() {
        let n = 64;
        let vf = counting(n);
        let o = Oracle::new(&vf);
        let c = Costs::Uniform(1e-6);
        let mut config = ApproxConfig::xos188();
        config.demand = DemandMode::Greedy;
        let y = 40.0;
        let u = scaling_attempt(&o, &c, &AgentSet::full(n), y, &config).unwrap();
        assert!(!u.is_empty());
        let q = ScalingQuantities::new(&config, 1.0, y);
        let f = vf.value(&u);
        let lo = (1.0 - 1.0 / q.m_val) * q.area / (2.0 * config.m) * y;
        let hi = q.area / config.m * y;
        assert!(
            f >= lo - EPS && f <= hi + EPS,
            "f(U) = {f} not in [{lo}, {hi}]"
        );
        let rho = outcome_unchecked(&o, &c, &u).rho;
        assert!(rho <= 1.0 / config.m + EPS);
    }

    #[test]
    fn attempt_with_prohibitive_prices_is_empty() {
        let vf = counting(4);
        let o = Oracle::new(&vf);
        let u = scaling_attempt(
            &o,
            &Costs::Uniform(1e6),
            &AgentSet::full(4),
            200.0,
            &ApproxConfig::xos188(),
        )
        .unwrap();
        assert!(u.is_empty());
    }

    #[test]
    fn collection_for_additive_gap() {
        let vf = ValueFn::sym_formula(4, SymFamily::AdditiveGap).unwrap();
        let o = Oracle::new(&vf);
        let c = Costs::Uniform(1.0);
        let col = doubling_collection(&o, &c, &ApproxConfig::xos188(), Exec::Sequential).unwrap();
        assert!(col.len() >= 4);
        let best = approx_welfare(&o, &c, &ApproxConfig::xos188(), Exec::Parallel).unwrap();
        assert!(best.g >= 3.0 - EPS);
        assert!(best.g >= 12.0 / 188.0);
    }

    #[test]
    fn single_agent_collection() {
        let vf = ValueFn::additive(vec![1.0]).unwrap();
        let o = Oracle::new(&vf);
        let col = doubling_collection(
            &o,
            &Costs::Uniform(1.0),
            &ApproxConfig::xos188(),
            Exec::Sequential,
        )
        .unwrap();
        assert_eq!(col.sets(), vec![AgentSet::singleton(0)]);

        let vf = ValueFn::additive(vec![2.0]).unwrap();
        let o = Oracle::new(&vf);
        let best = approx_welfare(
            &o,
            &Costs::Uniform(1.0),
            &ApproxConfig::xos188(),
            Exec::Sequential,
        )
        .unwrap();
        assert_eq!((best.set.to_vec(), best.g), (vec![0], 1.0));
    }

    #[test]
    fn iteration_cap_is_reported() {
        let vf = ValueFn::additive(vec![1.0; 8]).unwrap();
        let o = Oracle::new(&vf);
        let mut config = ApproxConfig::xos188();
        config.max_doubling_iters = 3;
        let err =
            doubling_collection(&o, &Costs::Uniform(0.5), &config, Exec::Sequential).unwrap_err();
        assert!(matches!(err, Error::IterationCap(_)));
    }

    #[test]
    fn config_json_uses_capital_m() {
        let text = r#"{"a": 1, "gamma": 0.05, "m": 1.707, "M": 3.414, "demand": "exact"}"#;
        let c: ApproxConfig = serde_json::from_str(text).unwrap();
        assert_eq!(c, ApproxConfig::xos188());
        assert!((ApproxConfig::xos188().area() - 1.0 / 16.0).abs() < 1e-15);
    }
}
