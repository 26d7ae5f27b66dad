//! Instance generators: the extremal closed-form families and seeded random
//! corpora (XOS clause lists, coverage functions, symmetric tables).
//!
//! Random generators are deterministic per seed (ChaCha8) and their costs
//! never exceed single-agent values. The XOS and coverage generators are
//! rejection-sampled until some team of two agents is feasible.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::instance::{Costs, Instance};
use crate::set::AgentSet;
use crate::valuefn::{SymFamily, ValueFn};

const REJECTION_CAP: usize = 1000;

/// Shape of a random symmetric table.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SymShape {
    /// Nonincreasing marginals.
    Submodular,
    /// Nondecreasing values with nonincreasing averages; marginals may rise.
    Sxos,
}

/// How costs of a random symmetric table are drawn.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SymCostMode {
    /// Uniform cost `u m(n) / n`, so the full team is feasible.
    FullFeasible,
    /// Uniform cost `v(t) / t^2` for a random size `t`, which places the
    /// largest size with `v(k) >= c k^2` near `t`.
    Eligible,
    /// Per-agent costs spread around an eligible cost, sorted ascending.
    Sorted,
}

#[derive(Clone, Debug, PartialEq)]
pub enum FamilySpec {
    AdditiveGap {
        n: usize,
    },
    SubadditiveGap {
        n: usize,
    },
    SupermodularGap {
        n: usize,
    },
    SxosTight {
        n: usize,
        epsilon: f64,
        bump: Option<usize>,
    },
    UnconstrainedGap {
        n: usize,
    },
    SingleAgent {
        value: f64,
        cost: f64,
    },
    RandomXos {
        n: usize,
        clauses: usize,
        seed: u64,
    },
    RandomCoverage {
        n: usize,
        elements: usize,
        seed: u64,
    },
    RandomSymTable {
        n: usize,
        seed: u64,
        shape: SymShape,
        costs: SymCostMode,
    },
}

impl FamilySpec {
    pub fn name(&self) -> &'static str {
        match self {
            FamilySpec::AdditiveGap { .. } => "additive_gap",
            FamilySpec::SubadditiveGap { .. } => "subadditive_gap",
            FamilySpec::SupermodularGap { .. } => "supermodular_gap",
            FamilySpec::SxosTight { .. } => "sxos_tight",
            FamilySpec::UnconstrainedGap { .. } => "unconstrained_gap",
            FamilySpec::SingleAgent { .. } => "single_agent",
            FamilySpec::RandomXos { .. } => "random_xos",
            FamilySpec::RandomCoverage { .. } => "random_coverage",
            FamilySpec::RandomSymTable { .. } => "random_sym_table",
        }
    }

    pub fn generate(&self) -> Result<Instance> {
        match self {
            FamilySpec::RandomXos { .. }
            | FamilySpec::RandomCoverage { .. }
            | FamilySpec::RandomSymTable { .. } => gen_random(self),
            _ => gen_named(self),
        }
    }
}

fn closed_form(n: usize, family: SymFamily) -> Result<Instance> {
    let c = family.uniform_cost(n);
    Instance::new(ValueFn::sym_formula(n, family)?, Costs::Uniform(c))
}

pub fn gen_named(spec: &FamilySpec) -> Result<Instance> {
    match *spec {
        FamilySpec::AdditiveGap { n } => closed_form(n, SymFamily::AdditiveGap),
        FamilySpec::SubadditiveGap { n } => closed_form(n, SymFamily::SubadditiveGap),
        FamilySpec::SupermodularGap { n } => closed_form(n, SymFamily::SupermodularGap),
        FamilySpec::UnconstrainedGap { n } => closed_form(n, SymFamily::UnconstrainedGap),
        FamilySpec::SxosTight { n, epsilon, bump } => {
            closed_form(n, SymFamily::SxosTight { epsilon, bump })
        }
        FamilySpec::SingleAgent { value, cost } => {
            Instance::new(ValueFn::sym_table(vec![0.0, value])?, Costs::Uniform(cost))
        }
        _ => Err(Error::input(format!("{} is a random family", spec.name()))),
    }
}

pub fn gen_random(spec: &FamilySpec) -> Result<Instance> {
    match *spec {
        FamilySpec::RandomXos { n, clauses, seed } => {
            check_n(n)?;
            if clauses == 0 {
                return Err(Error::input("random_xos needs at least one clause"));
            }
            rejection(seed, |rng| random_xos(rng, n, clauses))
        }
        FamilySpec::RandomCoverage { n, elements, seed } => {
            check_n(n)?;
            if elements < 2 {
                return Err(Error::input("random_coverage needs at least two elements"));
            }
            rejection(seed, |rng| random_coverage(rng, n, elements))
        }
        FamilySpec::RandomSymTable {
            n,
            seed,
            shape,
            costs,
        } => {
            check_n(n)?;
            // Small submodular tables often admit no feasible pair at all; the
            // single-agent and empty outcomes are legitimate cases here.
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            random_sym_table(&mut rng, n, shape, costs)
        }
        _ => Err(Error::input(format!(
            "{} is not a random family",
            spec.name()
        ))),
    }
}

fn check_n(n: usize) -> Result<()> {
    if n == 0 {
        Err(Error::input("at least one agent is required"))
    } else {
        Ok(())
    }
}

fn rejection(
    seed: u64,
    mut draw: impl FnMut(&mut ChaCha8Rng) -> Result<Instance>,
) -> Result<Instance> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..REJECTION_CAP {
        let inst = draw(&mut rng)?;
        if has_feasible_pair(&inst) {
            return Ok(inst);
        }
    }
    Err(Error::Generation(format!(
        "no draw with a feasible team of two agents after {REJECTION_CAP} attempts (seed {seed})"
    )))
}

fn has_feasible_pair(inst: &Instance) -> bool {
    let n = inst.n();
    if n < 2 {
        return true;
    }
    let o = inst.oracle();
    (0..n).any(|i| {
        (i + 1..n).any(|j| {
            let pair: AgentSet = [i, j].into_iter().collect();
            crate::contract::outcome_unchecked(&o, &inst.costs, &pair).is_feasible(1.0)
        })
    })
}

/// Which agents are light, and the common value level they sit at.
///
/// Light agents are several orders of magnitude below the heavy ones and
/// cheap relative to their value, so the doubling collection meets scales
/// at which a whole group of them is worth hiring together.
struct Weights {
    light: Vec<bool>,
    level: f64,
}

impl Weights {
    fn draw(rng: &mut ChaCha8Rng, n: usize) -> Self {
        let light = (0..n).map(|_| rng.gen_bool(0.6)).collect();
        let level = 10f64.powf(-1.5 - rng.gen::<f64>());
        Weights { light, level }
    }

    fn scale(&self, rng: &mut ChaCha8Rng, i: usize) -> f64 {
        if self.light[i] {
            self.level * rng.gen_range(0.5..1.0)
        } else {
            1.0
        }
    }

    /// `f(i) * r`, with `r` log-uniform in `[1e-4, 0.1]` for light agents and
    /// in `[1e-3, 1]` otherwise.
    fn costs(&self, rng: &mut ChaCha8Rng, single: &[f64]) -> Costs {
        Costs::PerAgent(
            single
                .iter()
                .zip(&self.light)
                .map(|(&f, &light)| {
                    let exp = if light {
                        -1.0 - 3.0 * rng.gen::<f64>()
                    } else {
                        -3.0 * rng.gen::<f64>()
                    };
                    f * 10f64.powf(exp)
                })
                .collect(),
        )
    }
}

fn singles(vf: &ValueFn) -> Vec<f64> {
    (0..vf.n())
        .map(|i| vf.value(&AgentSet::singleton(i)))
        .collect()
}

fn random_xos(rng: &mut ChaCha8Rng, n: usize, k: usize) -> Result<Instance> {
    let weights = Weights::draw(rng, n);
    let scale: Vec<f64> = (0..n).map(|i| weights.scale(rng, i)).collect();
    let mut clauses: Vec<Vec<f64>> = (0..k)
        .map(|_| {
            (0..n)
                .map(|i| {
                    if rng.gen_bool(0.7) {
                        scale[i] * rng.gen_range(0.1..1.0)
                    } else {
                        0.0
                    }
                })
                .collect()
        })
        .collect();
    for (i, &s) in scale.iter().enumerate() {
        if clauses.iter().all(|c| c[i] == 0.0) {
            let pick = rng.gen_range(0..k);
            clauses[pick][i] = s * rng.gen_range(0.1..1.0);
        }
    }
    let vf = ValueFn::xos(n, clauses)?;
    let costs = weights.costs(rng, &singles(&vf));
    Instance::new(vf, costs)
}

/// Heavy agents cover random subsets of the heavy elements; light agents
/// cover one or two elements of a separate light pool.
fn random_coverage(rng: &mut ChaCha8Rng, n: usize, elements: usize) -> Result<Instance> {
    let agents = Weights::draw(rng, n);
    let heavy = elements.div_ceil(2);
    let element_weights: Vec<f64> = (0..elements)
        .map(|e| {
            if e < heavy {
                rng.gen_range(0.5..1.0)
            } else {
                agents.level * rng.gen_range(0.5..1.0)
            }
        })
        .collect();
    let covers: Vec<Vec<usize>> = (0..n)
        .map(|i| {
            if agents.light[i] {
                let pool: Vec<usize> = (heavy..elements).collect();
                let take = rng.gen_range(1..=2);
                let mut c: Vec<usize> = pool.choose_multiple(rng, take).copied().collect();
                c.sort_unstable();
                c
            } else {
                let mut c: Vec<usize> = (0..heavy).filter(|_| rng.gen_bool(0.3)).collect();
                if c.is_empty() {
                    c.push(rng.gen_range(0..heavy));
                }
                c
            }
        })
        .collect();
    let vf = ValueFn::coverage(element_weights, covers)?;
    let costs = agents.costs(rng, &singles(&vf));
    Instance::new(vf, costs)
}

fn random_sym_table(
    rng: &mut ChaCha8Rng,
    n: usize,
    shape: SymShape,
    mode: SymCostMode,
) -> Result<Instance> {
    let scale = 10f64.powf(rng.gen_range(0.0..3.0));
    let mut v = vec![0.0; n + 1];
    match shape {
        SymShape::Submodular => {
            let mut marg: Vec<f64> = (0..n)
                .map(|_| 10f64.powf(-2.0 * rng.gen::<f64>()))
                .collect();
            marg.sort_by(|a, b| b.total_cmp(a));
            for k in 1..=n {
                v[k] = v[k - 1] + scale * marg[k - 1];
            }
        }
        SymShape::Sxos => {
            let mut avg = scale;
            v[1] = avg;
            for k in 2..=n {
                // Mostly flat stretches with occasional steep steps, so that
                // marginals go up as well as down.
                let u: f64 = if rng.gen_bool(0.3) {
                    rng.gen()
                } else {
                    1.0 - 0.2 * rng.gen::<f64>()
                };
                let kf = k as f64;
                avg *= (kf - 1.0) / kf + u / kf;
                v[k] = kf * avg;
                if v[k] < v[k - 1] {
                    v[k] = v[k - 1];
                }
            }
        }
    }
    let costs = match mode {
        SymCostMode::FullFeasible => {
            let m_n = v[n] - v[n - 1];
            let u = rng.gen_range(0.05..1.0);
            Costs::Uniform((u * m_n / n as f64).max(f64::MIN_POSITIVE))
        }
        SymCostMode::Eligible => Costs::Uniform(eligible_cost(rng, &v)),
        SymCostMode::Sorted => {
            let base = eligible_cost(rng, &v);
            let mut c: Vec<f64> = (0..n).map(|_| base * rng.gen_range(0.5..1.5)).collect();
            c.sort_by(|a, b| a.total_cmp(b));
            let cap = v[1];
            for x in &mut c {
                *x = x.min(cap);
            }
            Costs::PerAgent(c)
        }
    };
    Instance::new(ValueFn::sym_table(v)?, costs)
}

fn eligible_cost(rng: &mut ChaCha8Rng, v: &[f64]) -> f64 {
    let n = v.len() - 1;
    let t = rng.gen_range(1..=n);
    v[t] / (t * t) as f64
}

pub fn additive_gap(n: usize) -> Result<Instance> {
    FamilySpec::AdditiveGap { n }.generate()
}

pub fn subadditive_gap(n: usize) -> Result<Instance> {
    FamilySpec::SubadditiveGap { n }.generate()
}

pub fn supermodular_gap(n: usize) -> Result<Instance> {
    FamilySpec::SupermodularGap { n }.generate()
}

pub fn unconstrained_gap(n: usize) -> Result<Instance> {
    FamilySpec::UnconstrainedGap { n }.generate()
}

pub fn sxos_tight(n: usize, epsilon: f64, bump: Option<usize>) -> Result<Instance> {
    FamilySpec::SxosTight { n, epsilon, bump }.generate()
}

pub fn single_agent(value: f64, cost: f64) -> Result<Instance> {
    FamilySpec::SingleAgent { value, cost }.generate()
}
