//! Demand oracles: given per-agent prices, return a team maximizing
//! `f(S) - c(S)` (exactly, or approximately via value queries).

use std::cmp::Ordering;

use super::Oracle;
use crate::error::{Error, Result};
use crate::set::{lex_cmp_masks, AgentSet};
use crate::{ENUMERATION_CAP, EPS};

/// Exact demand set over the agents of `domain`, by enumeration.
///
/// Ties within [`EPS`] go to the lexicographically smallest team. Counts one
/// demand query and no value queries.
pub fn exact_demand(oracle: &Oracle<'_>, costs: &[f64], domain: &AgentSet) -> Result<AgentSet> {
    let vf = oracle.vf();
    if costs.len() != vf.n() {
        return Err(Error::input(format!(
            "expected {} prices, got {}",
            vf.n(),
            costs.len()
        )));
    }
    vf.check_set(domain)?;
    let members = domain.to_vec();
    let k = members.len();
    if k > ENUMERATION_CAP {
        return Err(Error::capability(format!(
            "exact demand enumerates 2^{k} teams; the cap is {ENUMERATION_CAP} agents, use greedy demand"
        )));
    }
    oracle.count_demand();

    let word_sized = domain.max_index().is_none_or(|i| i < 64);
    let profit: Vec<f64> = (0u64..1 << k)
        .map(|local| {
            let mut price = 0.0;
            let mut global = 0u64;
            let mut team = AgentSet::new();
            for (bit, &i) in members.iter().enumerate() {
                if local >> bit & 1 == 1 {
                    price += costs[i];
                    if word_sized {
                        global |= 1 << i;
                    } else {
                        team.insert(i);
                    }
                }
            }
            let value = if word_sized {
                vf.value_mask(global)
            } else {
                vf.value(&team)
            };
            value - price
        })
        .collect();

    let best = profit.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut pick = 0u64;
    let mut found = false;
    for (local, &p) in profit.iter().enumerate() {
        if p >= best - EPS && (!found || lex_cmp_masks(local as u64, pick) == Ordering::Less) {
            pick = local as u64;
            found = true;
        }
    }
    Ok(members
        .iter()
        .enumerate()
        .filter(|(bit, _)| pick >> bit & 1 == 1)
        .map(|(_, &i)| i)
        .collect())
}

/// Approximate demand set over `domain` using value queries only.
///
/// Runs the plain greedy (add the agent with the largest positive
/// `f(i:S) - c_i`) and the distorted greedy that discounts early gains by
/// `(1 - 1/k)^(k - t - 1)`, and returns whichever has larger `f(S) - c(S)`
/// (plain on ties). For submodular `f` the distorted run guarantees
/// `f(S) - c(S) >= (1 - 1/e) f(T) - c(T)` for every `T`, which plain greedy
/// alone does not.
pub fn greedy_demand(oracle: &Oracle<'_>, costs: &[f64], domain: &AgentSet) -> AgentSet {
    assert_eq!(costs.len(), oracle.n(), "one price per agent");
    oracle.count_demand();
    let members = domain.to_vec();
    let k = members.len();

    let plain = greedy_pass(oracle, costs, &members, true, |_| 1.0);
    let distorted = greedy_pass(oracle, costs, &members, false, |t| {
        (1.0 - 1.0 / k as f64).powi((k - t - 1) as i32)
    });
    let profit = |s: &AgentSet| oracle.eval(s) - s.iter().map(|i| costs[i]).sum::<f64>();
    if profit(&plain) >= profit(&distorted) - EPS {
        plain
    } else {
        distorted
    }
}

fn greedy_pass(
    oracle: &Oracle<'_>,
    costs: &[f64],
    members: &[usize],
    stop_early: bool,
    weight: impl Fn(usize) -> f64,
) -> AgentSet {
    let mut team = AgentSet::new();
    let mut value = 0.0;
    for t in 0..members.len() {
        let scale = weight(t);
        let mut best: Option<(usize, f64, f64)> = None;
        for &i in members.iter().filter(|&&i| !team.contains(i)) {
            let with = oracle.eval(&team.with(i));
            let gain = scale * (with - value) - costs[i];
            if best.is_none_or(|(_, g, _)| gain > g) {
                best = Some((i, gain, with));
            }
        }
        match best {
            Some((i, gain, with)) if gain > 0.0 => {
                team.insert(i);
                value = with;
            }
            // The distorted pass keeps going: its discount shrinks later.
            _ if stop_early => break,
            _ => {}
        }
    }
    team
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::valuefn::ValueFn;

    #[test]
    fn exact_demand_examples() {
        let add = ValueFn::additive(vec![1.0; 4]).unwrap();
        let o = Oracle::new(&add);
        let full = AgentSet::full(4);
        let d = exact_demand(&o, &[0.3, 0.6, 1.2, 2.0], &full).unwrap();
        assert_eq!(d.to_vec(), vec![0, 1]);
        assert_eq!(exact_demand(&o, &[0.0; 4], &full).unwrap(), full);
        assert!(exact_demand(&o, &[5.0; 4], &full).unwrap().is_empty());
        assert_eq!(o.stats().demand_queries, 3);
        assert_eq!(o.stats().value_queries, 0);
    }

    #[test]
    fn exact_demand_ties_pick_smallest() {
        let add = ValueFn::additive(vec![1.0; 3]).unwrap();
        let o = Oracle::new(&add);
        // Every team has profit 0.
        let d = exact_demand(&o, &[1.0; 3], &AgentSet::full(3)).unwrap();
        assert!(d.is_empty());
    }

    #[test]
    fn exact_demand_cap() {
        let add = ValueFn::additive(vec![1.0; 21]).unwrap();
        let o = Oracle::new(&add);
        let err = exact_demand(&o, &[0.0; 21], &AgentSet::full(21)).unwrap_err();
        assert!(err.is_capability_error());
    }

    #[test]
    fn greedy_examples() {
        let add = ValueFn::additive(vec![1.0; 4]).unwrap();
        let o = Oracle::new(&add);
        let full = AgentSet::full(4);
        let d = greedy_demand(&o, &[0.3, 0.6, 1.2, 2.0], &full);
        assert_eq!(d.to_vec(), vec![0, 1]);
        assert_eq!(greedy_demand(&o, &[0.0; 4], &full), full);

        let cov = ValueFn::coverage(vec![1.0], vec![vec![0]; 3]).unwrap();
        let o = Oracle::new(&cov);
        let d = greedy_demand(&o, &[0.5; 3], &AgentSet::full(3));
        assert_eq!(d.to_vec(), vec![0]);
    }

    #[test]
    fn greedy_beats_plain_counterexample() {
        // Agent 0 covers {x, y} at price 0.45; agents 1 and 2 cover x and y for free.
        // Plain greedy takes agent 0 first and stops at profit 0.55; the optimum
        // {1, 2} has profit 1.
        let cov = ValueFn::coverage(vec![0.5, 0.5], vec![vec![0, 1], vec![0], vec![1]]).unwrap();
        let o = Oracle::new(&cov);
        let prices = [0.45, 0.0, 0.0];
        let d = greedy_demand(&o, &prices, &AgentSet::full(3));
        let profit = cov.value(&d) - d.iter().map(|i| prices[i]).sum::<f64>();
        let bound = (1.0 - (-1f64).exp()) * 1.0;
        assert!(profit >= bound - 1e-9, "profit {profit} below {bound}");
    }
}
