//! Shares, feasibility, welfare, utility and transfers of a team.
//!
//! Agent `i` in team `S` works under a linear contract only if its share of
//! the value is at least `c_i / f(i:S)`. A team is `b`-feasible when these
//! minimum shares sum to at most `b`. Welfare is `f(S) - c(S)`; the
//! principal's utility is `(1 - rho(S)) f(S)`.

use crate::error::Result;
use crate::instance::Costs;
use crate::set::AgentSet;
use crate::valuefn::Oracle;
use crate::EPS;

#[derive(Clone, Debug, PartialEq)]
pub struct Shares {
    /// `(agent, share)` in ascending agent order; a share is `+inf` when the
    /// agent's marginal contribution is zero.
    pub per_agent: Vec<(usize, f64)>,
    pub total: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Outcome {
    pub set: AgentSet,
    pub f: f64,
    pub c: f64,
    pub w: f64,
    /// `-inf` when some member has zero marginal contribution.
    pub g: f64,
    pub rho: f64,
}

impl Outcome {
    pub fn empty() -> Self {
        Outcome {
            set: AgentSet::new(),
            f: 0.0,
            c: 0.0,
            w: 0.0,
            g: 0.0,
            rho: 0.0,
        }
    }

    pub fn is_feasible(&self, b: f64) -> bool {
        self.rho <= b + EPS
    }

    /// Total payment `rho(S) f(S)`.
    pub fn transfer(&self) -> f64 {
        if self.set.is_empty() {
            0.0
        } else {
            self.rho * self.f
        }
    }
}

fn share(c: f64, marginal: f64) -> f64 {
    if marginal > 0.0 {
        c / marginal
    } else {
        f64::INFINITY
    }
}

/// Shares using a known `f(S)`; costs `|S|` value queries.
fn shares_with(oracle: &Oracle<'_>, costs: &Costs, s: &AgentSet, f_s: f64) -> Shares {
    let per_agent: Vec<(usize, f64)> = s
        .iter()
        .map(|i| (i, share(costs.get(i), f_s - oracle.eval(&s.without(i)))))
        .collect();
    let total = per_agent.iter().map(|(_, r)| r).sum();
    Shares { per_agent, total }
}

pub fn shares(oracle: &Oracle<'_>, costs: &Costs, s: &AgentSet) -> Result<Shares> {
    oracle.vf().check_set(s)?;
    if s.is_empty() {
        return Ok(Shares {
            per_agent: Vec::new(),
            total: 0.0,
        });
    }
    let f_s = oracle.eval(s);
    Ok(shares_with(oracle, costs, s, f_s))
}

pub fn is_feasible(oracle: &Oracle<'_>, costs: &Costs, s: &AgentSet, b: f64) -> Result<bool> {
    Ok(shares(oracle, costs, s)?.total <= b + EPS)
}

pub fn transfer(oracle: &Oracle<'_>, costs: &Costs, s: &AgentSet) -> Result<f64> {
    Ok(outcome(oracle, costs, s)?.transfer())
}

pub fn outcome(oracle: &Oracle<'_>, costs: &Costs, s: &AgentSet) -> Result<Outcome> {
    oracle.vf().check_set(s)?;
    Ok(outcome_unchecked(oracle, costs, s))
}

pub(crate) fn outcome_unchecked(oracle: &Oracle<'_>, costs: &Costs, s: &AgentSet) -> Outcome {
    if s.is_empty() {
        return Outcome::empty();
    }
    let f = oracle.eval(s);
    let rho = shares_with(oracle, costs, s, f).total;
    let c = costs.total(s);
    outcome_from_parts(s.clone(), f, c, rho)
}

pub(crate) fn outcome_from_parts(set: AgentSet, f: f64, c: f64, rho: f64) -> Outcome {
    let g = if rho.is_finite() {
        (1.0 - rho) * f
    } else {
        f64::NEG_INFINITY
    };
    Outcome {
        set,
        f,
        c,
        w: f - c,
        g,
        rho,
    }
}

/// Highest-scoring `b`-feasible team among `sets`, lexicographically smallest
/// on ties; the empty outcome when none is feasible.
pub(crate) fn best_outcome(
    oracle: &Oracle<'_>,
    costs: &Costs,
    sets: &[AgentSet],
    b: f64,
    score: impl Fn(&Outcome) -> f64,
) -> Outcome {
    let feasible: Vec<Outcome> = sets
        .iter()
        .map(|s| outcome_unchecked(oracle, costs, s))
        .filter(|o| o.is_feasible(b))
        .collect();
    match crate::argmax_by(&feasible, &score, |x, y| x.set.cmp(&y.set)) {
        Some(k) => feasible[k].clone(),
        None => Outcome::empty(),
    }
}

/// Drops agents whose welfare marginal `f(i:S) - c_i` is not positive,
/// lowest index first, until every remaining member contributes positively.
pub fn welfare_minimal_subset(
    oracle: &Oracle<'_>,
    costs: &Costs,
    s: &AgentSet,
) -> Result<AgentSet> {
    oracle.vf().check_set(s)?;
    Ok(welfare_minimal_unchecked(oracle, costs, s))
}

pub(crate) fn welfare_minimal_unchecked(
    oracle: &Oracle<'_>,
    costs: &Costs,
    s: &AgentSet,
) -> AgentSet {
    let mut team = s.clone();
    let mut f_team = oracle.eval(&team);
    'scan: loop {
        for i in team.iter() {
            let rest = team.without(i);
            let f_rest = oracle.eval(&rest);
            if f_team - f_rest - costs.get(i) <= 0.0 {
                team = rest;
                f_team = f_rest;
                continue 'scan;
            }
        }
        return team;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::valuefn::{SymFamily, ValueFn};

    fn additive_gap(n: usize) -> ValueFn {
        ValueFn::sym_formula(n, SymFamily::AdditiveGap).unwrap()
    }

    #[test]
    fn share_examples() {
        let vf = additive_gap(4);
        let o = Oracle::new(&vf);
        let c = Costs::Uniform(1.0);
        let sh = shares(&o, &c, &AgentSet::full(4)).unwrap();
        assert!(sh.per_agent.iter().all(|&(_, r)| r == 0.25));
        assert_eq!(sh.total, 1.0);
        assert_eq!(shares(&o, &c, &AgentSet::new()).unwrap().total, 0.0);

        let sup = ValueFn::sym_formula(4, SymFamily::SupermodularGap).unwrap();
        let o = Oracle::new(&sup);
        let total = shares(&o, &Costs::Uniform(2.0), &AgentSet::full(4))
            .unwrap()
            .total;
        assert!((total - 8.0 / 8.75).abs() < 1e-12);
    }

    #[test]
    fn feasibility_examples() {
        let vf = additive_gap(4);
        let o = Oracle::new(&vf);
        assert!(is_feasible(&o, &Costs::Uniform(1.0), &AgentSet::full(4), 1.0).unwrap());
        assert!(is_feasible(&o, &Costs::Uniform(1.0), &AgentSet::full(4), f64::INFINITY).unwrap());

        let sup = ValueFn::sym_formula(4, SymFamily::SupermodularGap).unwrap();
        let o = Oracle::new(&sup);
        assert!(!is_feasible(&o, &Costs::Uniform(2.0), &AgentSet::full(2), 1.0).unwrap());
    }

    #[test]
    fn transfer_examples() {
        let vf = additive_gap(4);
        let o = Oracle::new(&vf);
        assert_eq!(
            transfer(&o, &Costs::Uniform(1.0), &AgentSet::full(4)).unwrap(),
            16.0
        );
        assert_eq!(
            transfer(&o, &Costs::Uniform(1.0), &AgentSet::new()).unwrap(),
            0.0
        );
        let single = ValueFn::additive(vec![1.0]).unwrap();
        let o = Oracle::new(&single);
        assert_eq!(
            transfer(&o, &Costs::Uniform(1.0), &AgentSet::full(1)).unwrap(),
            1.0
        );
    }

    #[test]
    fn outcome_examples() {
        let vf = additive_gap(4);
        let o = Oracle::new(&vf);
        let c = Costs::Uniform(1.0);
        let full = outcome(&o, &c, &AgentSet::full(4)).unwrap();
        assert_eq!((full.f, full.w, full.g), (16.0, 12.0, 0.0));
        let pair = outcome(&o, &c, &[1, 3].into_iter().collect()).unwrap();
        assert_eq!((pair.f, pair.rho, pair.g, pair.w), (8.0, 0.5, 4.0, 6.0));
        assert_eq!(outcome(&o, &c, &AgentSet::new()).unwrap(), Outcome::empty());
    }

    #[test]
    fn zero_marginal_gives_infinite_share() {
        let cov = ValueFn::coverage(vec![1.0], vec![vec![0], vec![0]]).unwrap();
        let o = Oracle::new(&cov);
        let out = outcome(&o, &Costs::Uniform(0.1), &AgentSet::full(2)).unwrap();
        assert_eq!(out.rho, f64::INFINITY);
        assert_eq!(out.g, f64::NEG_INFINITY);
        assert!(!out.is_feasible(1.0));
    }

    #[test]
    fn welfare_minimal_examples() {
        let vf = ValueFn::additive(vec![1.0; 4]).unwrap();
        let o = Oracle::new(&vf);
        let full = AgentSet::full(4);
        assert_eq!(
            welfare_minimal_subset(&o, &Costs::Uniform(0.5), &full).unwrap(),
            full
        );
        assert!(welfare_minimal_subset(&o, &Costs::Uniform(2.0), &full)
            .unwrap()
            .is_empty());
        assert!(
            welfare_minimal_subset(&o, &Costs::Uniform(2.0), &AgentSet::new())
                .unwrap()
                .is_empty()
        );
    }
}
