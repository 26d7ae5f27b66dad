//! Function-class validators.
//!
//! General kinds are checked exhaustively over all teams (small `n` only);
//! symmetric kinds are checked along the size axis. Failing reports carry a
//! witness that can be re-checked with plain evaluations.

use std::fmt;

use serde::Serialize;

use super::{ValueFn, ValueKind};
use crate::error::{Error, Result};
use crate::set::AgentSet;
use crate::EPS;

/// Largest `n` for exhaustive checks of non-symmetric functions.
pub const CLASS_CHECK_CAP: usize = 12;

/// Largest `n` for the quadratic subadditivity scan of symmetric functions.
const SYM_PAIR_CAP: usize = 1 << 13;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ClassTag {
    Additive,
    Submodular,
    Xos,
    Subadditive,
    Supermodular,
    Sxos,
}

impl ClassTag {
    pub const ALL: [ClassTag; 6] = [
        ClassTag::Additive,
        ClassTag::Submodular,
        ClassTag::Xos,
        ClassTag::Subadditive,
        ClassTag::Supermodular,
        ClassTag::Sxos,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ClassTag::Additive => "additive",
            ClassTag::Submodular => "submodular",
            ClassTag::Xos => "xos",
            ClassTag::Subadditive => "subadditive",
            ClassTag::Supermodular => "supermodular",
            ClassTag::Sxos => "sxos",
        }
    }

    pub fn parse(s: &str) -> Option<ClassTag> {
        ClassTag::ALL
            .into_iter()
            .find(|c| c.name().eq_ignore_ascii_case(s))
    }
}

impl fmt::Display for ClassTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Witness {
    /// A violation located at team size `k` (symmetric checks).
    Size { k: usize },
    /// Sizes `j` and `k` with `f(j + k) > f(j) + f(k)`.
    SizePair { j: usize, k: usize },
    /// An agent whose single value is not positive.
    Agent { i: usize },
    /// Subadditivity: disjoint `s`, `t` with `f(s + t) > f(s) + f(t)`.
    /// Monotonicity: `s` inside `t` with `f(s) > f(t)`.
    /// Sum of marginals: `s` inside `t` with `sum_{i in s} f(i:t) > f(s)`.
    /// Additivity: `s` with `f(s) != sum of singles` (`t` empty).
    Sets { s: AgentSet, t: AgentSet },
    /// Agents `i`, `j` outside `s` whose marginal interaction has the wrong sign.
    Triple { s: AgentSet, i: usize, j: usize },
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ClassReport {
    pub class: ClassTag,
    pub pass: bool,
    pub witness: Option<Witness>,
}

impl ClassReport {
    fn pass(class: ClassTag) -> Self {
        ClassReport {
            class,
            pass: true,
            witness: None,
        }
    }

    fn fail(class: ClassTag, witness: Witness) -> Self {
        ClassReport {
            class,
            pass: false,
            witness: Some(witness),
        }
    }

    fn from(class: ClassTag, witness: Option<Witness>) -> Self {
        match witness {
            Some(w) => Self::fail(class, w),
            None => Self::pass(class),
        }
    }
}

/// Checks `v(0) = 0`, `v(1) > 0`, `v` nondecreasing and `v(k)/k` nonincreasing.
pub fn sxos_validate(v: &[f64]) -> ClassReport {
    let class = ClassTag::Sxos;
    if v.first().is_none_or(|&x| x != 0.0) {
        return ClassReport::fail(class, Witness::Size { k: 0 });
    }
    if v.len() < 2 || !(v[1] > 0.0) {
        return ClassReport::fail(class, Witness::Size { k: 1 });
    }
    for k in 2..v.len() {
        if v[k] < v[k - 1] - EPS {
            return ClassReport::fail(class, Witness::Size { k });
        }
        if v[k] / k as f64 > v[k - 1] / (k - 1) as f64 + EPS {
            return ClassReport::fail(class, Witness::Size { k });
        }
    }
    ClassReport::pass(class)
}

/// The canonical clause `|T n S| / |T| * v(|T|)`.
pub fn sxos_clause(v: &[f64], t_size: usize, s: &AgentSet, t: &AgentSet) -> Result<f64> {
    if t_size == 0 {
        return Err(Error::input("clauses are indexed by nonempty teams"));
    }
    if t.len() != t_size {
        return Err(Error::input(format!(
            "team has {} members, expected {t_size}",
            t.len()
        )));
    }
    let v_t = *v
        .get(t_size)
        .ok_or_else(|| Error::input(format!("no table entry for size {t_size}")))?;
    Ok(s.intersection(t).len() as f64 / t_size as f64 * v_t)
}

/// Exhaustive (general kinds, `n <= 12`) or size-axis (symmetric kinds) check of `class`.
pub fn validate_class(vf: &ValueFn, class: ClassTag) -> Result<ClassReport> {
    if vf.is_symmetric() {
        let v = vf.size_profile()?;
        return validate_profile(&v, class);
    }
    let n = vf.n();
    if n > CLASS_CHECK_CAP {
        return Err(Error::capability(format!(
            "exhaustive class checks are limited to n <= {CLASS_CHECK_CAP}, got {n}"
        )));
    }
    let table: Vec<f64> = (0u64..1 << n).map(|m| vf.value_mask(m)).collect();
    Ok(match class {
        ClassTag::Additive => ClassReport::from(class, additive_witness(&table, n)),
        ClassTag::Submodular => ClassReport::from(class, interaction_witness(&table, n, true)),
        ClassTag::Supermodular => ClassReport::from(class, interaction_witness(&table, n, false)),
        ClassTag::Subadditive => ClassReport::from(
            class,
            monotone_witness(&table, n).or_else(|| subadditive_witness(&table, n)),
        ),
        ClassTag::Xos => {
            // Every general kind is a maximum of additive clauses by construction;
            // the sum-of-marginals inequality is checked as an independent guard.
            debug_assert!(matches!(
                vf.kind(),
                ValueKind::Additive { .. } | ValueKind::Xos { .. } | ValueKind::Coverage { .. }
            ));
            ClassReport::from(class, sum_of_marginals_witness(&table, n))
        }
        ClassTag::Sxos => {
            if let Some(w) = asymmetry_witness(&table, n) {
                ClassReport::fail(class, w)
            } else {
                let v: Vec<f64> = (0..=n).map(|k| table[(1u64 << k) as usize - 1]).collect();
                sxos_validate(&v)
            }
        }
    })
}

fn validate_profile(v: &[f64], class: ClassTag) -> Result<ClassReport> {
    let n = v.len() - 1;
    let m = |k: usize| v[k] - v[k - 1];
    let report = match class {
        ClassTag::Additive => ClassReport::from(
            class,
            (2..=n)
                .find(|&k| (m(k) - m(1)).abs() > EPS)
                .map(|k| Witness::Size { k }),
        ),
        ClassTag::Submodular => ClassReport::from(
            class,
            (2..=n)
                .find(|&k| m(k) > m(k - 1) + EPS)
                .map(|k| Witness::Size { k }),
        ),
        ClassTag::Supermodular => ClassReport::from(
            class,
            (2..=n)
                .find(|&k| m(k) < m(k - 1) - EPS)
                .map(|k| Witness::Size { k }),
        ),
        ClassTag::Xos | ClassTag::Sxos => ClassReport {
            class,
            ..sxos_validate(v)
        },
        ClassTag::Subadditive => {
            if let Some(k) = (1..=n).find(|&k| v[k] < v[k - 1] - EPS) {
                return Ok(ClassReport::fail(class, Witness::Size { k }));
            }
            if n > SYM_PAIR_CAP {
                return Err(Error::capability(format!(
                    "symmetric subadditivity scans are limited to n <= {SYM_PAIR_CAP}"
                )));
            }
            let mut witness = None;
            'outer: for j in 1..=n / 2 {
                for k in j..=n - j {
                    if v[j + k] > v[j] + v[k] + EPS {
                        witness = Some(Witness::SizePair { j, k });
                        break 'outer;
                    }
                }
            }
            ClassReport::from(class, witness)
        }
    };
    Ok(report)
}

fn mask_set(m: u64) -> AgentSet {
    AgentSet::from_mask(m)
}

fn additive_witness(t: &[f64], n: usize) -> Option<Witness> {
    (0u64..1 << n).find_map(|m| {
        let sum: f64 = (0..n).filter(|i| m >> i & 1 == 1).map(|i| t[1 << i]).sum();
        ((t[m as usize] - sum).abs() > EPS).then(|| Witness::Sets {
            s: mask_set(m),
            t: AgentSet::new(),
        })
    })
}

/// Submodular: `f(i:S) >= f(i:S+j)`; supermodular: the reverse.
fn interaction_witness(t: &[f64], n: usize, submodular: bool) -> Option<Witness> {
    for s in 0u64..1 << n {
        for i in (0..n).filter(|i| s >> i & 1 == 0) {
            for j in (i + 1..n).filter(|j| s >> j & 1 == 0) {
                let si = (s | 1 << i) as usize;
                let sj = (s | 1 << j) as usize;
                let sij = (s | 1 << i | 1 << j) as usize;
                let low = t[si] - t[s as usize];
                let high = t[sij] - t[sj];
                let bad = if submodular {
                    high > low + EPS
                } else {
                    high < low - EPS
                };
                if bad {
                    return Some(Witness::Triple {
                        s: mask_set(s),
                        i,
                        j,
                    });
                }
            }
        }
    }
    None
}

fn monotone_witness(t: &[f64], n: usize) -> Option<Witness> {
    for s in 0u64..1 << n {
        for i in (0..n).filter(|i| s >> i & 1 == 0) {
            if t[s as usize] > t[(s | 1 << i) as usize] + EPS {
                return Some(Witness::Sets {
                    s: mask_set(s),
                    t: mask_set(s | 1 << i),
                });
            }
        }
    }
    None
}

fn subadditive_witness(t: &[f64], n: usize) -> Option<Witness> {
    let full = (1u64 << n) - 1;
    for s in 1u64..=full {
        let rest = full & !s;
        // Each unordered disjoint pair is visited once: `u` ranges over
        // nonempty submasks of the complement that sort above `s`.
        let mut u = rest;
        while u > 0 {
            if u > s && t[(s | u) as usize] > t[s as usize] + t[u as usize] + EPS {
                return Some(Witness::Sets {
                    s: mask_set(s),
                    t: mask_set(u),
                });
            }
            u = (u - 1) & rest;
        }
    }
    None
}

fn sum_of_marginals_witness(t: &[f64], n: usize) -> Option<Witness> {
    let full = (1u64 << n) - 1;
    for big in 0u64..=full {
        let marg: Vec<f64> = (0..n)
            .map(|i| {
                if big >> i & 1 == 1 {
                    t[big as usize] - t[(big & !(1 << i)) as usize]
                } else {
                    0.0
                }
            })
            .collect();
        let mut s = big;
        loop {
            let total: f64 = (0..n).filter(|i| s >> i & 1 == 1).map(|i| marg[i]).sum();
            if total > t[s as usize] + EPS {
                return Some(Witness::Sets {
                    s: mask_set(s),
                    t: mask_set(big),
                });
            }
            if s == 0 {
                break;
            }
            s = (s - 1) & big;
        }
    }
    None
}

fn asymmetry_witness(t: &[f64], n: usize) -> Option<Witness> {
    (0u64..1 << n).find_map(|m| {
        let prefix = (1u64 << m.count_ones()) - 1;
        ((t[m as usize] - t[prefix as usize]).abs() > EPS).then(|| Witness::Sets {
            s: mask_set(m),
            t: mask_set(prefix),
        })
    })
}
