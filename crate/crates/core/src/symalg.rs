//! Algorithms for symmetric agents, where `f(S)` depends only on `|S|` and
//! prefix teams `[k] = {0, .., k-1}` of the cheapest agents are optimal per
//! size. Everything here queries a handful of sizes, so `n` may be huge for
//! closed-form value functions.
//!
//! Also hosts two general-instance routines that belong to the same analysis:
//! the three-way split of a submodular team and the best-singleton baseline.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::contract::{outcome_from_parts, outcome_unchecked, Outcome};
use crate::error::{Error, Result};
use crate::instance::Costs;
use crate::set::AgentSet;
use crate::valuefn::Oracle;
use crate::EPS;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SymResult {
    pub k: usize,
    pub f: f64,
    pub w: f64,
    pub g: f64,
    pub rho: f64,
    pub value_queries: u64,
}

/// Memoized size queries; repeated sizes are not re-counted.
struct Sizes<'o, 'a> {
    oracle: &'o Oracle<'a>,
    costs: &'o Costs,
    seen: BTreeMap<usize, f64>,
    start: u64,
}

impl<'o, 'a> Sizes<'o, 'a> {
    fn new(oracle: &'o Oracle<'a>, costs: &'o Costs) -> Result<Self> {
        if !oracle.vf().is_symmetric() {
            return Err(Error::input(
                "this algorithm needs a symmetric value function",
            ));
        }
        if !costs.is_sorted() {
            return Err(Error::input(
                "costs must be uniform or sorted in nondecreasing order",
            ));
        }
        Ok(Sizes {
            oracle,
            costs,
            seen: BTreeMap::new(),
            start: oracle.stats().value_queries,
        })
    }

    fn f(&mut self, k: usize) -> f64 {
        if k == 0 {
            return 0.0;
        }
        let oracle = self.oracle;
        *self.seen.entry(k).or_insert_with(|| oracle.eval_size(k))
    }

    fn marginal(&mut self, k: usize) -> f64 {
        self.f(k) - self.f(k - 1)
    }

    fn rho(&mut self, k: usize) -> f64 {
        if k == 0 {
            return 0.0;
        }
        let m = self.marginal(k);
        if m > 0.0 {
            self.costs.prefix(k) / m
        } else {
            f64::INFINITY
        }
    }

    fn result(&mut self, k: usize) -> SymResult {
        let f = self.f(k);
        let rho = self.rho(k);
        let o = outcome_from_parts(AgentSet::new(), f, self.costs.prefix(k), rho);
        SymResult {
            k,
            f,
            w: o.w,
            g: if k == 0 { 0.0 } else { o.g },
            rho,
            value_queries: self.oracle.stats().value_queries - self.start,
        }
    }

    /// Checks the queried points against `v(1) > 0`, monotonicity and
    /// nonincreasing averages.
    fn check_sxos(&self) -> Result<()> {
        let pts: Vec<(usize, f64)> = self.seen.iter().map(|(&k, &v)| (k, v)).collect();
        if let Some(&(1, v1)) = pts.first() {
            if v1 <= 0.0 {
                return Err(Error::input("v(1) must be positive"));
            }
        }
        for w in pts.windows(2) {
            let ((j, vj), (k, vk)) = (w[0], w[1]);
            if vj > vk + EPS {
                return Err(Error::input(format!(
                    "value decreases between sizes {j} and {k}"
                )));
            }
            if vk / k as f64 > vj / j as f64 + EPS {
                return Err(Error::input(format!(
                    "average value increases between sizes {j} and {k}; not symmetric XOS"
                )));
            }
        }
        Ok(())
    }

    /// Checks that marginals at queried consecutive pairs never increase.
    fn check_submodular(&mut self) -> Result<()> {
        let ks: Vec<usize> = self
            .seen
            .keys()
            .copied()
            .filter(|&k| k == 1 || self.seen.contains_key(&(k - 1)))
            .collect();
        let margins: Vec<(usize, f64)> = ks.iter().map(|&k| (k, self.marginal(k))).collect();
        for w in margins.windows(2) {
            if w[1].1 > w[0].1 + EPS {
                return Err(Error::input(format!(
                    "marginal increases from size {} to {}; not symmetric submodular",
                    w[0].0, w[1].0
                )));
            }
        }
        Ok(())
    }
}

/// Largest `k` in `[lo, hi]` with `pred(k)`, given `pred(lo)` and a
/// true-then-false shape.
fn largest_true(lo: usize, hi: usize, mut pred: impl FnMut(usize) -> bool) -> usize {
    let (mut lo, mut hi) = (lo, hi + 1);
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if pred(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

fn uniform_cost(costs: &Costs, n: usize) -> Result<f64> {
    match costs {
        Costs::Uniform(c) => Ok(*c),
        Costs::PerAgent(v) if costs.is_uniform() && v.len() == n => Ok(v[0]),
        _ => Err(Error::input("this algorithm needs uniform costs")),
    }
}

/// Welfare within a factor `2 / (1 - 3/n')` of optimal for symmetric XOS
/// functions with uniform cost `c`, using `O(log n)` value queries.
///
/// A size `k` is eligible when `f(k) >= c k^2`; every feasible size is
/// eligible and eligibility is downward closed. With `n'` the largest
/// eligible size, the result is the first size where `f` crosses
/// `f(n') - (c/2)(n'(n'+1) - k(k+1))`.
pub fn sxos_welfare_approx(oracle: &Oracle<'_>, costs: &Costs) -> Result<SymResult> {
    let n = oracle.n();
    let c = uniform_cost(costs, n)?;
    let mut q = Sizes::new(oracle, costs)?;
    if q.f(1) < c {
        q.check_sxos()?;
        return Ok(q.result(0));
    }
    let top = largest_true(1, n, |k| {
        let kf = k as f64;
        q.f(k) >= c * kf * kf
    });
    if top == 1 {
        q.check_sxos()?;
        return Ok(q.result(1));
    }
    let f_top = q.f(top);
    let tf = top as f64;
    let bar = |k: usize| {
        let kf = k as f64;
        f_top - c / 2.0 * (tf * (tf + 1.0) - kf * (kf + 1.0))
    };
    let (mut lo, mut hi) = (0usize, top);
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if q.f(mid) >= bar(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    q.check_sxos()?;
    Ok(q.result(hi))
}

/// Exact welfare optimum for symmetric submodular functions with sorted
/// costs, using `O(log n)` value queries.
///
/// Shares of prefix teams grow with `k`, so the feasible sizes form a prefix
/// `[0, k*]`; welfare rises while `m(k) >= c_k` and falls afterwards. The
/// optimum is `min(k*, k_peak)`.
pub fn sym_submodular_opt(oracle: &Oracle<'_>, costs: &Costs) -> Result<SymResult> {
    let n = oracle.n();
    let mut q = Sizes::new(oracle, costs)?;
    if q.f(1) < costs.get(0) {
        q.check_submodular()?;
        return Ok(q.result(0));
    }
    let feasible_top = largest_true(1, n, |k| q.rho(k) <= 1.0 + EPS);
    let peak = largest_true(1, n, |k| q.marginal(k) >= costs.get(k - 1));
    q.check_submodular()?;
    Ok(q.result(feasible_top.min(peak)))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Certificate {
    pub result: SymResult,
    pub a: f64,
    pub b: f64,
    /// `(1/a - 1/b) f(n)`.
    pub value_bound: f64,
    /// `(1/a - 1/b)(1 - b/a^2) f(n)`.
    pub utility_bound: f64,
    /// Both `f(k) > value_bound` and `g(k) > utility_bound`.
    pub holds: bool,
}

/// Finds a size whose utility is a constant fraction of `f(n)` when `[n]`
/// is feasible and `f` is symmetric XOS.
///
/// Starts at `k = n/a` and steps down while `m(k) <= (a/b) m(n)`.
pub fn sxos_gap_certificate(
    oracle: &Oracle<'_>,
    costs: &Costs,
    a: f64,
    b: f64,
) -> Result<Certificate> {
    let n = oracle.n();
    if !(a >= 1.0) || !(b > a) {
        return Err(Error::precondition(format!(
            "need a >= 1 and b > a, got a = {a}, b = {b}"
        )));
    }
    let start = n as f64 / a;
    let k0 = start.round();
    if (start - k0).abs() > 1e-9 * start.max(1.0) || k0 < 1.0 {
        return Err(Error::precondition(format!(
            "a = {a} does not divide n = {n}"
        )));
    }
    let mut q = Sizes::new(oracle, costs)?;
    if q.rho(n) > 1.0 + EPS {
        return Err(Error::precondition("the full team is not feasible"));
    }
    let m_top = q.marginal(n);
    let mut k = k0 as usize;
    while k > 0 && q.marginal(k) <= a / b * m_top {
        k -= 1;
    }
    if k == 0 {
        return Err(Error::precondition(
            "marginals never exceed the threshold; the value function is not symmetric XOS",
        ));
    }
    let f_n = q.f(n);
    let spread = 1.0 / a - 1.0 / b;
    let value_bound = spread * f_n;
    let utility_bound = spread * (1.0 - b / (a * a)) * f_n;
    let result = q.result(k);
    Ok(Certificate {
        result,
        a,
        b,
        value_bound,
        utility_bound,
        holds: result.f > value_bound && result.g > utility_bound,
    })
}

/// Certificate with `a = n / floor(n/4)` and `b = a^1.5`, the choice that
/// drives the utility bound toward `f(n)/16` for large `n`.
pub fn sxos_gap_certificate_auto(oracle: &Oracle<'_>, costs: &Costs) -> Result<Certificate> {
    let n = oracle.n();
    if n < 4 {
        return Err(Error::precondition("automatic parameters need n >= 4"));
    }
    let a = n as f64 / (n / 4) as f64;
    sxos_gap_certificate(oracle, costs, a, a.powf(1.5))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Split {
    pub a: AgentSet,
    pub b: AgentSet,
    pub c: AgentSet,
    /// Own-team totals `rho_A(A)`, `rho_B(B)`, `rho_C(C)`.
    pub rho_a: f64,
    pub rho_b: f64,
    pub rho_c: f64,
}

/// Splits a feasible team whose members each hold share at most 1/2 into
/// `A`, `B`, `C` with `|B| <= 1`.
///
/// `A` is the longest ascending prefix of `S` whose shares (measured in `S`)
/// sum to at most 1/2, `B` the next agent and `C` the rest. For submodular
/// `f`, shares only shrink when a team shrinks, so each part needs at most
/// 1/2 on its own.
pub fn submodular_split(oracle: &Oracle<'_>, costs: &Costs, s: &AgentSet) -> Result<Split> {
    let shares = crate::contract::shares(oracle, costs, s)?;
    if shares.total > 1.0 + EPS {
        return Err(Error::precondition(format!(
            "the team is infeasible (total share {})",
            shares.total
        )));
    }
    if let Some(&(i, r)) = shares.per_agent.iter().find(|(_, r)| *r > 0.5 + EPS) {
        return Err(Error::precondition(format!(
            "agent {i} needs share {r} > 1/2"
        )));
    }
    let mut a = AgentSet::new();
    let mut acc = 0.0;
    let mut rest = shares.per_agent.iter();
    let mut b = AgentSet::new();
    for &(i, r) in rest.by_ref() {
        if acc + r <= 0.5 + EPS {
            acc += r;
            a.insert(i);
        } else {
            b.insert(i);
            break;
        }
    }
    let c: AgentSet = rest.map(|&(i, _)| i).collect();
    let own = |t: &AgentSet| outcome_unchecked(oracle, costs, t).rho;
    Ok(Split {
        rho_a: own(&a),
        rho_b: own(&b),
        rho_c: own(&c),
        a,
        b,
        c,
    })
}

/// The single agent with the largest utility, lowest index on ties. Uses one
/// value query for symmetric functions with uniform costs.
pub fn best_singleton(oracle: &Oracle<'_>, costs: &Costs) -> Outcome {
    let n = oracle.n();
    if oracle.vf().is_symmetric() && costs.is_uniform() {
        let f = oracle.eval_size(1);
        let c = costs.get(0);
        return outcome_from_parts(AgentSet::singleton(0), f, c, c / f);
    }
    let mut best = outcome_unchecked(oracle, costs, &AgentSet::singleton(0));
    for i in 1..n {
        let o = outcome_unchecked(oracle, costs, &AgentSet::singleton(i));
        if o.g > best.g + EPS {
            best = o;
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::valuefn::{SymFamily, ValueFn};

    fn table(v: &[f64]) -> ValueFn {
        ValueFn::sym_table(v.to_vec()).unwrap()
    }

    fn linear(n: usize, slope: f64) -> ValueFn {
        table(&(0..=n).map(|k| slope * k as f64).collect::<Vec<_>>())
    }

    #[test]
    fn sxos_hand_trace() {
        let vf = linear(4, 4.0);
        let o = Oracle::new(&vf);
        let r = sxos_welfare_approx(&o, &Costs::Uniform(1.0)).unwrap();
        assert_eq!((r.k, r.w), (3, 9.0));
    }

    #[test]
    fn sxos_without_feasible_team() {
        let vf = linear(4, 1.0);
        let r = sxos_welfare_approx(&Oracle::new(&vf), &Costs::Uniform(2.0)).unwrap();
        assert_eq!(r.k, 0);
        assert_eq!((r.f, r.w, r.g), (0.0, 0.0, 0.0));
    }

    #[test]
    fn sxos_tight_family_at_scale() {
        let n = 1_000_000;
        let vf = ValueFn::sym_formula(
            n,
            SymFamily::SxosTight {
                epsilon: 0.1,
                bump: None,
            },
        )
        .unwrap();
        let o = Oracle::new(&vf);
        let r = sxos_welfare_approx(&o, &Costs::Uniform(2.0)).unwrap();
        assert_eq!(r.k, 1);
        assert!(r.value_queries <= 4 * 20 + 8, "{} queries", r.value_queries);
    }

    #[test]
    fn sxos_rejects_non_sxos_points() {
        let vf = table(&[0.0, 1.0, 4.0, 9.0, 16.0]);
        let err = sxos_welfare_approx(&Oracle::new(&vf), &Costs::Uniform(0.5)).unwrap_err();
        assert!(err.is_input_error());
    }

    #[test]
    fn submodular_examples() {
        let vf = table(&[0.0, 10.0, 18.0, 24.0, 28.0]);
        let r = sym_submodular_opt(&Oracle::new(&vf), &Costs::Uniform(2.0)).unwrap();
        assert_eq!((r.k, r.w), (3, 18.0));
        let r = sym_submodular_opt(&Oracle::new(&vf), &Costs::Uniform(5.0)).unwrap();
        assert_eq!((r.k, r.w), (1, 5.0));
        let r = sym_submodular_opt(&Oracle::new(&vf), &Costs::Uniform(11.0)).unwrap();
        assert_eq!((r.k, r.w), (0, 0.0));
    }

    #[test]
    fn submodular_rejects_increasing_marginals() {
        let vf = ValueFn::sym_formula(16, SymFamily::SupermodularGap).unwrap();
        let err = sym_submodular_opt(&Oracle::new(&vf), &Costs::Uniform(0.01)).unwrap_err();
        assert!(err.is_input_error());
    }

    #[test]
    fn certificate_examples() {
        let vf = linear(4, 4.0);
        let cert = sxos_gap_certificate(&Oracle::new(&vf), &Costs::Uniform(1.0), 4.0, 8.0).unwrap();
        assert_eq!(cert.result.k, 1);
        assert_eq!((cert.value_bound, cert.utility_bound), (2.0, 1.0));
        assert_eq!((cert.result.f, cert.result.g), (4.0, 3.0));
        assert!(cert.holds);

        let vf = linear(8, 1.0);
        let cert =
            sxos_gap_certificate(&Oracle::new(&vf), &Costs::Uniform(1.0 / 8.0), 4.0, 8.0).unwrap();
        assert_eq!(cert.result.k, 2);
        assert!(cert.holds);
    }

    #[test]
    fn certificate_preconditions() {
        let vf = linear(4, 1.0);
        let o = Oracle::new(&vf);
        let err = sxos_gap_certificate(&o, &Costs::Uniform(1.0), 4.0, 8.0).unwrap_err();
        assert!(matches!(err, Error::Precondition(_)));
        let err = sxos_gap_certificate(&o, &Costs::Uniform(0.01), 3.0, 8.0).unwrap_err();
        assert!(matches!(err, Error::Precondition(_)));
    }

    #[test]
    fn split_examples() {
        let vf = ValueFn::additive(vec![1.0; 4]).unwrap();
        let o = Oracle::new(&vf);
        let c = Costs::Uniform(0.2);
        let s = submodular_split(&o, &c, &AgentSet::full(4)).unwrap();
        assert_eq!(
            (s.a.to_vec(), s.b.to_vec(), s.c.to_vec()),
            (vec![0, 1], vec![2], vec![3])
        );
        assert!((s.rho_a - 0.4).abs() < 1e-12 && (s.rho_b - 0.2).abs() < 1e-12);

        let one = submodular_split(&o, &c, &AgentSet::singleton(2)).unwrap();
        assert_eq!(one.a, AgentSet::singleton(2));
        assert!(one.b.is_empty() && one.c.is_empty());

        let err = submodular_split(&o, &Costs::Uniform(0.6), &AgentSet::singleton(1)).unwrap_err();
        assert!(err.to_string().contains("agent 1"));
    }

    #[test]
    fn singleton_examples() {
        let vf = ValueFn::sym_formula(4, SymFamily::AdditiveGap).unwrap();
        let o = Oracle::new(&vf);
        let best = best_singleton(&o, &Costs::Uniform(1.0));
        assert_eq!((best.set.to_vec(), best.g), (vec![0], 3.0));
        assert_eq!(o.stats().value_queries, 1);

        let vf = ValueFn::sym_formula(4, SymFamily::UnconstrainedGap).unwrap();
        let best = best_singleton(&Oracle::new(&vf), &Costs::Uniform(3.0));
        assert_eq!(best.g, 1.0);

        let vf = ValueFn::additive(vec![1.0, 3.0, 3.0]).unwrap();
        let best = best_singleton(&Oracle::new(&vf), &Costs::Uniform(0.5));
        assert_eq!(best.set.to_vec(), vec![1]);
    }
}
