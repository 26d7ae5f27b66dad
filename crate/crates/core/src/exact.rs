//! Ground-truth optima by exhaustive enumeration (small `n`) or by scanning
//! prefix teams (symmetric instances), and the welfare-utility gap.

use std::cmp::Ordering;
use std::fmt;

use crate::contract::{outcome_from_parts, Outcome};
use crate::error::{Error, Result};
use crate::instance::Costs;
use crate::par::{chunks, map_range, Exec};
use crate::set::{lex_cmp_masks, AgentSet};
use crate::valuefn::{mask_members, Oracle, ValueFn};
use crate::{ENUMERATION_CAP, EPS};

/// Largest `n` for the linear prefix scan of symmetric instances.
pub const SYM_SCAN_CAP: usize = 1 << 26;

const CHUNK: usize = 1 << 12;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Objective {
    Welfare,
    Utility,
    Value,
}

impl Objective {
    pub fn name(self) -> &'static str {
        match self {
            Objective::Welfare => "welfare",
            Objective::Utility => "utility",
            Objective::Value => "value",
        }
    }

    pub fn parse(s: &str) -> Option<Objective> {
        match s {
            "welfare" => Some(Objective::Welfare),
            "utility" => Some(Objective::Utility),
            "value" => Some(Objective::Value),
            _ => None,
        }
    }

    pub fn of(self, o: &Outcome) -> f64 {
        match self {
            Objective::Welfare => o.w,
            Objective::Utility => o.g,
            Objective::Value => o.f,
        }
    }
}

impl fmt::Display for Objective {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Share and transfer bounds; `+inf` disables a bound.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Constraint {
    pub b: f64,
    pub transfer: f64,
}

impl Constraint {
    pub fn share(b: f64) -> Self {
        Constraint {
            b,
            transfer: f64::INFINITY,
        }
    }

    pub fn admits(&self, o: &Outcome) -> bool {
        o.is_feasible(self.b) && o.transfer() <= self.transfer + EPS
    }

    fn validate(&self) -> Result<()> {
        if !(self.b > 0.0) {
            return Err(Error::input(format!(
                "the share bound b must be positive, got {}",
                self.b
            )));
        }
        if !(self.transfer >= 0.0) {
            return Err(Error::input(format!(
                "the transfer bound B must be nonnegative, got {}",
                self.transfer
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct OptResult {
    pub objective: Objective,
    pub constraint: Constraint,
    pub best: Outcome,
    pub best_value: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct GapReport {
    pub opt_w: f64,
    pub opt_g: f64,
    pub opt_f: f64,
    pub gap_wg: f64,
}

impl GapReport {
    fn new(opt_w: f64, opt_g: f64, opt_f: f64) -> Self {
        let gap_wg = if opt_g > 0.0 {
            opt_w / opt_g
        } else if opt_w > 0.0 {
            f64::INFINITY
        } else {
            1.0
        };
        GapReport {
            opt_w,
            opt_g,
            opt_f,
            gap_wg,
        }
    }
}

/// `f` on every team of a small instance, indexed by bitmask.
#[derive(Clone, Debug)]
pub struct ValueTable {
    n: usize,
    values: Vec<f64>,
}

impl ValueTable {
    /// Evaluates all `2^n` teams, counting one value query each.
    pub fn build(oracle: &Oracle<'_>, exec: Exec) -> Result<Self> {
        let vf = oracle.vf();
        let n = vf.n();
        if n > ENUMERATION_CAP {
            return Err(Error::capability(format!(
                "enumeration is limited to n <= {ENUMERATION_CAP}, got {n}"
            )));
        }
        let values = collect_chunks(exec, 1 << n, |m| vf.value_mask(m as u64));
        oracle.count_values(1 << n);
        Ok(ValueTable { n, values })
    }

    pub fn from_fn(vf: &ValueFn, exec: Exec) -> Result<Self> {
        Self::build(&Oracle::new(vf), exec)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn value(&self, mask: u64) -> f64 {
        self.values[mask as usize]
    }

    pub fn rho(&self, mask: u64, costs: &Costs) -> f64 {
        let f = self.value(mask);
        mask_members(mask)
            .map(|i| {
                let m = f - self.value(mask & !(1 << i));
                if m > 0.0 {
                    costs.get(i) / m
                } else {
                    f64::INFINITY
                }
            })
            .sum()
    }

    pub fn outcome(&self, mask: u64, costs: &Costs) -> Outcome {
        if mask == 0 {
            return Outcome::empty();
        }
        let c = mask_members(mask).map(|i| costs.get(i)).sum();
        outcome_from_parts(
            AgentSet::from_mask(mask),
            self.value(mask),
            c,
            self.rho(mask, costs),
        )
    }

    /// Best team for `objective` under `constraint`; ties go to the
    /// lexicographically smallest team. The empty team always qualifies.
    pub fn optimize(
        &self,
        costs: &Costs,
        objective: Objective,
        constraint: Constraint,
        exec: Exec,
    ) -> OptResult {
        let scores = collect_chunks(exec, 1 << self.n, |m| {
            let o = self.outcome(m as u64, costs);
            if constraint.admits(&o) {
                objective.of(&o)
            } else {
                f64::NEG_INFINITY
            }
        });
        let best = scores.iter().copied().fold(0.0, f64::max);
        let mut pick: Option<u64> = None;
        for (m, &s) in scores.iter().enumerate() {
            let m = m as u64;
            if s >= best - EPS && pick.is_none_or(|p| lex_cmp_masks(m, p) == Ordering::Less) {
                pick = Some(m);
            }
        }
        let best = self.outcome(pick.unwrap_or(0), costs);
        OptResult {
            objective,
            constraint,
            best_value: objective.of(&best),
            best,
        }
    }
}

fn collect_chunks<F>(exec: Exec, len: usize, f: F) -> Vec<f64>
where
    F: Fn(usize) -> f64 + Sync + Send,
{
    let parts = chunks(len, CHUNK);
    map_range(exec, 0..parts.len(), |k| {
        parts[k].clone().map(&f).collect::<Vec<_>>()
    })
    .into_iter()
    .flatten()
    .collect()
}

/// Exact optimum over all `2^n` teams.
pub fn opt_enumerate(
    oracle: &Oracle<'_>,
    costs: &Costs,
    objective: Objective,
    constraint: Constraint,
    exec: Exec,
) -> Result<OptResult> {
    constraint.validate()?;
    let table = ValueTable::build(oracle, exec)?;
    Ok(table.optimize(costs, objective, constraint, exec))
}

fn require_symmetric(oracle: &Oracle<'_>, costs: &Costs) -> Result<()> {
    if !oracle.vf().is_symmetric() {
        return Err(Error::input("prefix scans need a symmetric value function"));
    }
    if !costs.is_sorted() {
        return Err(Error::input(
            "prefix scans need uniform or nondecreasing costs",
        ));
    }
    Ok(())
}

/// Outcome of the prefix team `[k]` from the size profile and prefix costs.
pub(crate) fn prefix_outcome(k: usize, f: &[f64], prefix_cost: &[f64]) -> Outcome {
    if k == 0 {
        return Outcome::empty();
    }
    let m = f[k] - f[k - 1];
    let rho = if m > 0.0 {
        prefix_cost[k] / m
    } else {
        f64::INFINITY
    };
    outcome_from_parts(AgentSet::full(k), f[k], prefix_cost[k], rho)
}

/// Exact optimum among prefix teams `[k]`, which is the global optimum for
/// symmetric value functions with sorted costs. Ties go to the smallest `k`.
pub fn opt_symmetric(
    oracle: &Oracle<'_>,
    costs: &Costs,
    objective: Objective,
    constraint: Constraint,
) -> Result<OptResult> {
    constraint.validate()?;
    let profile = SymProfile::scan(oracle, costs)?;
    Ok(profile.optimize(objective, constraint))
}

/// The full size profile of a symmetric instance, for repeated prefix scans.
pub struct SymProfile {
    f: Vec<f64>,
    prefix_cost: Vec<f64>,
}

impl SymProfile {
    /// Evaluates `f(0..=n)`, counting `n + 1` value queries.
    pub fn scan(oracle: &Oracle<'_>, costs: &Costs) -> Result<Self> {
        require_symmetric(oracle, costs)?;
        let n = oracle.n();
        if n > SYM_SCAN_CAP {
            return Err(Error::capability(format!(
                "prefix scans are limited to n <= {SYM_SCAN_CAP}, got {n}"
            )));
        }
        let f = (0..=n).map(|k| oracle.eval_size(k)).collect();
        Ok(SymProfile {
            f,
            prefix_cost: costs.prefix_sums(n),
        })
    }

    pub fn n(&self) -> usize {
        self.f.len() - 1
    }

    pub fn values(&self) -> &[f64] {
        &self.f
    }

    pub fn outcome(&self, k: usize) -> Outcome {
        prefix_outcome(k, &self.f, &self.prefix_cost)
    }

    /// Objective at size `k`, or `-inf` when `[k]` violates the constraint.
    fn score(&self, k: usize, objective: Objective, constraint: Constraint) -> f64 {
        if k == 0 {
            return 0.0;
        }
        let f = self.f[k];
        let m = f - self.f[k - 1];
        let rho = if m > 0.0 {
            self.prefix_cost[k] / m
        } else {
            f64::INFINITY
        };
        if rho > constraint.b + EPS || rho * f > constraint.transfer + EPS {
            return f64::NEG_INFINITY;
        }
        match objective {
            Objective::Welfare => f - self.prefix_cost[k],
            Objective::Utility => (1.0 - rho) * f,
            Objective::Value => f,
        }
    }

    pub fn best_size(&self, objective: Objective, constraint: Constraint) -> usize {
        let scores: Vec<f64> = (0..=self.n())
            .map(|k| self.score(k, objective, constraint))
            .collect();
        let best = scores.iter().copied().fold(0.0, f64::max);
        scores.iter().position(|&s| s >= best - EPS).unwrap_or(0)
    }

    pub fn optimize(&self, objective: Objective, constraint: Constraint) -> OptResult {
        let best = self.outcome(self.best_size(objective, constraint));
        OptResult {
            objective,
            constraint,
            best_value: objective.of(&best),
            best,
        }
    }
}

/// Welfare, utility and value optima under the share bound `b`, and their
/// ratio `OPT(w) / OPT(g)`. Enumerates when `n <= 20`, otherwise scans
/// prefix teams of symmetric instances.
pub fn gap(oracle: &Oracle<'_>, costs: &Costs, b: f64, exec: Exec) -> Result<GapReport> {
    let n = oracle.n();
    if n <= ENUMERATION_CAP {
        gap_enumerate(oracle, costs, b, exec)
    } else if oracle.vf().is_symmetric() && costs.is_sorted() {
        gap_symmetric(oracle, costs, b)
    } else {
        Err(Error::capability(format!(
            "gaps of non-symmetric instances need n <= {ENUMERATION_CAP}, got {n}"
        )))
    }
}

pub fn gap_enumerate(oracle: &Oracle<'_>, costs: &Costs, b: f64, exec: Exec) -> Result<GapReport> {
    let c = Constraint::share(b);
    c.validate()?;
    let table = ValueTable::build(oracle, exec)?;
    let opt = |o| table.optimize(costs, o, c, exec).best_value;
    Ok(GapReport::new(
        opt(Objective::Welfare),
        opt(Objective::Utility),
        opt(Objective::Value),
    ))
}

pub fn gap_symmetric(oracle: &Oracle<'_>, costs: &Costs, b: f64) -> Result<GapReport> {
    let c = Constraint::share(b);
    c.validate()?;
    let profile = SymProfile::scan(oracle, costs)?;
    let opt = |o| profile.optimize(o, c).best_value;
    Ok(GapReport::new(
        opt(Objective::Welfare),
        opt(Objective::Utility),
        opt(Objective::Value),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::valuefn::SymFamily;

    fn family(n: usize, f: SymFamily) -> (ValueFn, Costs) {
        let c = f.uniform_cost(n);
        (ValueFn::sym_formula(n, f).unwrap(), Costs::Uniform(c))
    }

    #[test]
    fn enumeration_examples() {
        let (vf, c) = family(4, SymFamily::AdditiveGap);
        let o = Oracle::new(&vf);
        let one = Constraint::share(1.0);
        let w = opt_enumerate(&o, &c, Objective::Welfare, one, Exec::Sequential).unwrap();
        assert_eq!(
            (w.best.set.clone(), w.best_value),
            (AgentSet::full(4), 12.0)
        );
        let g = opt_enumerate(&o, &c, Objective::Utility, one, Exec::Parallel).unwrap();
        assert_eq!((g.best.set.to_vec(), g.best_value), (vec![0, 1], 4.0));
        assert_eq!(o.stats().value_queries, 32);

        let single = ValueFn::additive(vec![1.0]).unwrap();
        let o = Oracle::new(&single);
        let v = opt_enumerate(
            &o,
            &Costs::Uniform(1.0),
            Objective::Value,
            one,
            Exec::Sequential,
        )
        .unwrap();
        assert_eq!((v.best.set.to_vec(), v.best_value), (vec![0], 1.0));
    }

    #[test]
    fn enumeration_cap() {
        let vf = ValueFn::additive(vec![1.0; 21]).unwrap();
        let err = opt_enumerate(
            &Oracle::new(&vf),
            &Costs::Uniform(0.1),
            Objective::Value,
            Constraint::share(1.0),
            Exec::Sequential,
        )
        .unwrap_err();
        assert!(err.is_capability_error());
    }

    #[test]
    fn symmetric_examples() {
        let vf = ValueFn::sym_table(vec![0.0, 10.0, 18.0, 24.0, 28.0]).unwrap();
        let o = Oracle::new(&vf);
        let r = opt_symmetric(
            &o,
            &Costs::Uniform(2.0),
            Objective::Welfare,
            Constraint::share(1.0),
        )
        .unwrap();
        assert_eq!((r.best.set.len(), r.best_value), (3, 18.0));

        let unc = opt_symmetric(
            &o,
            &Costs::Uniform(2.0),
            Objective::Welfare,
            Constraint::share(f64::INFINITY),
        )
        .unwrap();
        assert_eq!((unc.best.set.len(), unc.best_value), (4, 20.0));

        let tight = SymFamily::SxosTight {
            epsilon: 0.1,
            bump: None,
        };
        let (vf, c) = family(100, tight.clone());
        let o = Oracle::new(&vf);
        let r = opt_symmetric(&o, &c, Objective::Welfare, Constraint::share(1.0)).unwrap();
        assert_eq!(r.best.set.len(), 1);
        assert_eq!(r.best_value, tight.value(100, 1) - 2.0);
    }

    #[test]
    fn symmetric_rejects_general_kinds() {
        let vf = ValueFn::additive(vec![1.0; 3]).unwrap();
        let err = opt_symmetric(
            &Oracle::new(&vf),
            &Costs::Uniform(0.1),
            Objective::Value,
            Constraint::share(1.0),
        )
        .unwrap_err();
        assert!(err.is_input_error());
    }

    #[test]
    fn gap_examples() {
        let (vf, c) = family(4, SymFamily::AdditiveGap);
        let r = gap(&Oracle::new(&vf), &c, 1.0, Exec::Parallel).unwrap();
        assert_eq!(r.gap_wg, 3.0);

        let (vf, c) = family(9, SymFamily::SubadditiveGap);
        let r = gap(&Oracle::new(&vf), &c, 1.0, Exec::Parallel).unwrap();
        assert!((r.opt_w - 6.0).abs() < 1e-9);
        assert!((r.opt_g - 8.0 / 3.0).abs() < 1e-9);
        assert!((r.gap_wg - 2.25).abs() < 1e-9);

        let (vf, c) = family(4, SymFamily::SupermodularGap);
        let r = gap(&Oracle::new(&vf), &c, 1.0, Exec::Sequential).unwrap();
        assert!((r.opt_g - 12.0 / 7.0).abs() < 1e-9);
        assert!((r.gap_wg - 7.0).abs() < 1e-9);
    }

    #[test]
    fn gap_conventions() {
        let single = ValueFn::additive(vec![1.0]).unwrap();
        let r = gap(
            &Oracle::new(&single),
            &Costs::Uniform(1.0),
            1.0,
            Exec::Sequential,
        )
        .unwrap();
        assert_eq!((r.opt_f, r.opt_w, r.opt_g, r.gap_wg), (1.0, 0.0, 0.0, 1.0));
    }
}
