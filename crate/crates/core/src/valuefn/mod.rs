//! Value functions, oracles with query accounting, demand oracles and
//! class validators.

mod classes;
mod demand;
mod family;

use std::cell::Cell;

use serde::Serialize;

pub use classes::{sxos_clause, sxos_validate, validate_class, ClassReport, ClassTag, Witness};
pub use demand::{exact_demand, greedy_demand};
pub use family::SymFamily;

use crate::error::{Error, Result};
use crate::set::AgentSet;

/// Largest `n` for which a symmetric table is materialized.
pub const SYM_TABLE_CAP: usize = 1 << 20;

#[derive(Clone, Debug, PartialEq)]
pub enum ValueKind {
    Additive {
        weights: Vec<f64>,
    },
    /// Maximum over additive clauses; every clause has length `n`.
    Xos {
        clauses: Vec<Vec<f64>>,
    },
    /// Weighted coverage: agent `i` covers the elements in `covers[i]`.
    Coverage {
        element_weights: Vec<f64>,
        covers: Vec<Vec<usize>>,
    },
    /// `values[k]` is the value of any team of size `k`.
    SymTable {
        values: Vec<f64>,
    },
    SymFormula(SymFamily),
}

/// An immutable production function on `n` agents.
#[derive(Clone, Debug)]
pub struct ValueFn {
    n: usize,
    kind: ValueKind,
    cover_sets: Vec<AgentSet>,
}

impl PartialEq for ValueFn {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n && self.kind == other.kind
    }
}

fn check_weights(what: &str, w: &[f64]) -> Result<()> {
    match w.iter().position(|x| !x.is_finite() || *x < 0.0) {
        Some(k) => Err(Error::input(format!(
            "{what}[{k}] must be finite and nonnegative, got {}",
            w[k]
        ))),
        None => Ok(()),
    }
}

impl ValueFn {
    pub fn additive(weights: Vec<f64>) -> Result<Self> {
        check_weights("weights", &weights)?;
        Self::build(weights.len(), ValueKind::Additive { weights })
    }

    pub fn xos(n: usize, clauses: Vec<Vec<f64>>) -> Result<Self> {
        if clauses.is_empty() {
            return Err(Error::input("an XOS function needs at least one clause"));
        }
        for (k, c) in clauses.iter().enumerate() {
            if c.len() != n {
                return Err(Error::input(format!(
                    "clause {k} has length {}, expected {n}",
                    c.len()
                )));
            }
            check_weights(&format!("clauses[{k}]"), c)?;
        }
        Self::build(n, ValueKind::Xos { clauses })
    }

    pub fn coverage(element_weights: Vec<f64>, covers: Vec<Vec<usize>>) -> Result<Self> {
        check_weights("element_weights", &element_weights)?;
        for (i, c) in covers.iter().enumerate() {
            if let Some(e) = c.iter().find(|&&e| e >= element_weights.len()) {
                return Err(Error::input(format!(
                    "agent {i} covers element {e}, but only {} elements exist",
                    element_weights.len()
                )));
            }
        }
        Self::build(
            covers.len(),
            ValueKind::Coverage {
                element_weights,
                covers,
            },
        )
    }

    pub fn sym_table(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::input(
                "a symmetric table needs at least the entry v[0]",
            ));
        }
        let n = values.len() - 1;
        if n > SYM_TABLE_CAP {
            return Err(Error::capability(format!(
                "symmetric tables are limited to n <= {SYM_TABLE_CAP}; use a closed-form family"
            )));
        }
        if let Some(k) = values.iter().position(|x| !x.is_finite()) {
            return Err(Error::input(format!("v[{k}] is not finite")));
        }
        if values[0] != 0.0 {
            return Err(Error::input("v[0] must be 0"));
        }
        if let Some(k) = (1..=n).find(|&k| values[k] < values[k - 1]) {
            return Err(Error::input(format!(
                "table decreases at k={k}: v[{k}]={} < v[{}]={}",
                values[k],
                k - 1,
                values[k - 1]
            )));
        }
        Self::build(n, ValueKind::SymTable { values })
    }

    pub fn sym_formula(n: usize, family: SymFamily) -> Result<Self> {
        family.validate(n)?;
        Self::build(n, ValueKind::SymFormula(family))
    }

    fn build(n: usize, kind: ValueKind) -> Result<Self> {
        if n == 0 {
            return Err(Error::input("at least one agent is required"));
        }
        let cover_sets = match &kind {
            ValueKind::Coverage { covers, .. } => {
                covers.iter().map(|c| c.iter().copied().collect()).collect()
            }
            _ => Vec::new(),
        };
        let vf = ValueFn {
            n,
            kind,
            cover_sets,
        };
        if vf.is_symmetric() {
            if vf.value_at_size(1) <= 0.0 {
                return Err(Error::input("the single-agent value v(1) must be positive"));
            }
        } else if let Some(i) = (0..n).find(|&i| vf.value(&AgentSet::singleton(i)) <= 0.0) {
            return Err(Error::input(format!(
                "agent {i} has zero value on its own; single-agent values must be positive"
            )));
        }
        Ok(vf)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn kind(&self) -> &ValueKind {
        &self.kind
    }

    /// True when `f(S)` depends only on `|S|`.
    pub fn is_symmetric(&self) -> bool {
        matches!(
            self.kind,
            ValueKind::SymTable { .. } | ValueKind::SymFormula(_)
        )
    }

    pub fn kind_name(&self) -> &'static str {
        match self.kind {
            ValueKind::Additive { .. } => "additive",
            ValueKind::Xos { .. } => "xos",
            ValueKind::Coverage { .. } => "coverage",
            ValueKind::SymTable { .. } => "sym_table",
            ValueKind::SymFormula(_) => "sym_formula",
        }
    }

    pub fn check_set(&self, s: &AgentSet) -> Result<()> {
        match s.max_index() {
            Some(i) if i >= self.n => Err(Error::input(format!(
                "agent index {i} out of range for n = {}",
                self.n
            ))),
            _ => Ok(()),
        }
    }

    /// Uncounted evaluation. Members of `s` must be below `n`.
    pub fn value(&self, s: &AgentSet) -> f64 {
        match &self.kind {
            ValueKind::Additive { weights } => s.iter().map(|i| weights[i]).sum(),
            ValueKind::Xos { clauses } => clauses
                .iter()
                .map(|c| s.iter().map(|i| c[i]).sum::<f64>())
                .fold(0.0, f64::max),
            ValueKind::Coverage {
                element_weights, ..
            } => {
                let mut covered = AgentSet::new();
                for i in s {
                    covered = covered.union(&self.cover_sets[i]);
                }
                covered.iter().map(|e| element_weights[e]).sum()
            }
            ValueKind::SymTable { .. } | ValueKind::SymFormula(_) => self.value_at_size(s.len()),
        }
    }

    /// Uncounted evaluation of a single-word team.
    pub fn value_mask(&self, mask: u64) -> f64 {
        match &self.kind {
            ValueKind::SymTable { .. } | ValueKind::SymFormula(_) => {
                self.value_at_size(mask.count_ones() as usize)
            }
            ValueKind::Additive { weights } => mask_members(mask).map(|i| weights[i]).sum(),
            _ => self.value(&AgentSet::from_mask(mask)),
        }
    }

    /// `f(k)` for symmetric kinds. Panics for non-symmetric kinds.
    pub fn value_at_size(&self, k: usize) -> f64 {
        match &self.kind {
            ValueKind::SymTable { values } => values[k],
            ValueKind::SymFormula(family) => family.value(self.n, k),
            _ => panic!("value_at_size called on a non-symmetric value function"),
        }
    }

    /// The size profile `v(0..=n)` of a symmetric function.
    pub fn size_profile(&self) -> Result<Vec<f64>> {
        if !self.is_symmetric() {
            return Err(Error::input("the value function is not symmetric"));
        }
        if self.n > SYM_TABLE_CAP {
            return Err(Error::capability(format!(
                "size profiles are limited to n <= {SYM_TABLE_CAP}"
            )));
        }
        Ok((0..=self.n).map(|k| self.value_at_size(k)).collect())
    }
}

pub(crate) fn mask_members(mask: u64) -> impl Iterator<Item = usize> {
    let mut m = mask;
    std::iter::from_fn(move || {
        if m == 0 {
            return None;
        }
        let i = m.trailing_zeros() as usize;
        m &= m - 1;
        Some(i)
    })
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct QueryStats {
    pub value_queries: u64,
    pub demand_queries: u64,
}

impl std::ops::AddAssign for QueryStats {
    fn add_assign(&mut self, rhs: Self) {
        self.value_queries += rhs.value_queries;
        self.demand_queries += rhs.demand_queries;
    }
}

/// A query-counting handle on a value function.
///
/// Handles are cheap and single-threaded; parallel code creates one handle
/// per task and folds the counts back with [`Oracle::absorb`].
#[derive(Debug)]
pub struct Oracle<'a> {
    vf: &'a ValueFn,
    stats: Cell<QueryStats>,
}

impl<'a> Oracle<'a> {
    pub fn new(vf: &'a ValueFn) -> Self {
        Oracle {
            vf,
            stats: Cell::new(QueryStats::default()),
        }
    }

    pub fn vf(&self) -> &'a ValueFn {
        self.vf
    }

    pub fn n(&self) -> usize {
        self.vf.n
    }

    pub fn stats(&self) -> QueryStats {
        self.stats.get()
    }

    pub fn absorb(&self, other: QueryStats) {
        let mut s = self.stats.get();
        s += other;
        self.stats.set(s);
    }

    pub(crate) fn count_values(&self, k: u64) {
        let mut s = self.stats.get();
        s.value_queries += k;
        self.stats.set(s);
    }

    pub(crate) fn count_demand(&self) {
        let mut s = self.stats.get();
        s.demand_queries += 1;
        self.stats.set(s);
    }

    /// `f(S)`, counting one value query. Members of `s` must be below `n`.
    pub fn eval(&self, s: &AgentSet) -> f64 {
        self.count_values(1);
        self.vf.value(s)
    }

    /// Checked variant of [`Oracle::eval`].
    pub fn try_eval(&self, s: &AgentSet) -> Result<f64> {
        self.vf.check_set(s)?;
        Ok(self.eval(s))
    }

    /// `f(k)` for symmetric functions, counting one value query.
    pub fn eval_size(&self, k: usize) -> f64 {
        self.count_values(1);
        self.vf.value_at_size(k)
    }

    /// `f(i:S) = f(S + i) - f(S - i)`, counting two value queries.
    pub fn marginal(&self, s: &AgentSet, i: usize) -> f64 {
        self.eval(&s.with(i)) - self.eval(&s.without(i))
    }

    pub fn try_marginal(&self, s: &AgentSet, i: usize) -> Result<f64> {
        self.vf.check_set(s)?;
        if i >= self.vf.n {
            return Err(Error::input(format!(
                "agent index {i} out of range for n = {}",
                self.vf.n
            )));
        }
        Ok(self.marginal(s, i))
    }
}
