//! Closed-form symmetric value functions.
//!
//! Each family evaluates `f(k)` in constant time, so symmetric algorithms can
//! run at `n` far beyond what a materialized table allows. Every family comes
//! with the uniform per-agent cost that makes it extremal.

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub enum SymFamily {
    /// `f(k) = k n` with cost 1: welfare peaks at `[n]`, utility at `n/2`.
    AdditiveGap,
    /// Linear interpolation between `f(1) = sqrt(n)` and `f(n-1) = n - sqrt(n)`,
    /// with `f(n) = n` and cost `1/sqrt(n)`. Marginals at both ends equal
    /// `sqrt(n)`, so `[1]` and `[n]` are feasible while the middle sizes are
    /// not when `n` is small.
    SubadditiveGap,
    /// `f(k) = k^2 + k - k/n` below `n`, `f(n) = n^2 + n`, cost 2: only `[n]`
    /// is feasible.
    SupermodularGap,
    /// `f(k) = k^2 + (1 - epsilon) k + n^2 + n` for `k >= 1`, cost 2: only
    /// `[1]` is feasible unless `bump` adds `epsilon` at one size, which makes
    /// that size feasible and welfare-optimal.
    SxosTight { epsilon: f64, bump: Option<usize> },
    /// `f(k) = k n` with cost `n - 1`: every singleton has utility 1 while
    /// the full team has welfare `n`.
    UnconstrainedGap,
}

impl SymFamily {
    pub fn name(&self) -> &'static str {
        match self {
            SymFamily::AdditiveGap => "additive_gap",
            SymFamily::SubadditiveGap => "subadditive_gap",
            SymFamily::SupermodularGap => "supermodular_gap",
            SymFamily::SxosTight { .. } => "sxos_tight",
            SymFamily::UnconstrainedGap => "unconstrained_gap",
        }
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        match self {
            SymFamily::AdditiveGap if n < 1 => Err(Error::input("additive_gap needs n >= 1")),
            SymFamily::SubadditiveGap if n < 5 => Err(Error::input("subadditive_gap needs n >= 5")),
            SymFamily::SupermodularGap if n < 2 => {
                Err(Error::input("supermodular_gap needs n >= 2"))
            }
            SymFamily::UnconstrainedGap if n < 2 => {
                Err(Error::input("unconstrained_gap needs n >= 2"))
            }
            SymFamily::SxosTight { epsilon, bump } => {
                if n < 1 {
                    return Err(Error::input("sxos_tight needs n >= 1"));
                }
                if !(*epsilon > 0.0 && *epsilon < 1.0) {
                    return Err(Error::input("sxos_tight needs 0 < epsilon < 1"));
                }
                if let Some(k) = bump {
                    if *k < 1 || *k > n {
                        return Err(Error::input(format!(
                            "sxos_tight bump must lie in [1, {n}], got {k}"
                        )));
                    }
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    /// The per-agent cost paired with this family.
    pub fn uniform_cost(&self, n: usize) -> f64 {
        let nf = n as f64;
        match self {
            SymFamily::AdditiveGap => 1.0,
            SymFamily::SubadditiveGap => 1.0 / nf.sqrt(),
            SymFamily::SupermodularGap | SymFamily::SxosTight { .. } => 2.0,
            SymFamily::UnconstrainedGap => nf - 1.0,
        }
    }

    pub fn value(&self, n: usize, k: usize) -> f64 {
        if k == 0 {
            return 0.0;
        }
        let nf = n as f64;
        let kf = k as f64;
        match self {
            SymFamily::AdditiveGap | SymFamily::UnconstrainedGap => kf * nf,
            SymFamily::SubadditiveGap => {
                if k == n {
                    nf
                } else {
                    let root = nf.sqrt();
                    root + (kf - 1.0) * (nf - 2.0 * root) / (nf - 2.0)
                }
            }
            SymFamily::SupermodularGap => {
                if k == n {
                    nf * nf + nf
                } else {
                    kf * kf + kf - kf / nf
                }
            }
            SymFamily::SxosTight { epsilon, bump } => {
                let base = kf * kf + (1.0 - epsilon) * kf + nf * nf + nf;
                if *bump == Some(k) {
                    base + epsilon
                } else {
                    base
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn supermodular_values() {
        let f = SymFamily::SupermodularGap;
        let v: Vec<f64> = (0..=4).map(|k| f.value(4, k)).collect();
        assert_eq!(v, vec![0.0, 1.75, 5.5, 11.25, 20.0]);
    }

    #[test]
    fn subadditive_end_marginals() {
        let f = SymFamily::SubadditiveGap;
        for n in [9usize, 16, 25, 100] {
            let root = (n as f64).sqrt();
            assert!((f.value(n, 1) - root).abs() < 1e-12);
            let top = f.value(n, n) - f.value(n, n - 1);
            assert!((top - root).abs() < 1e-9, "n={n} top marginal {top}");
        }
    }

    #[test]
    fn bump_adds_epsilon_once() {
        let f = SymFamily::SxosTight {
            epsilon: 0.1,
            bump: Some(3),
        };
        let plain = SymFamily::SxosTight {
            epsilon: 0.1,
            bump: None,
        };
        assert!((f.value(10, 3) - plain.value(10, 3) - 0.1).abs() < 1e-12);
        assert_eq!(f.value(10, 4), plain.value(10, 4));
    }

    #[test]
    fn parameter_checks() {
        assert!(SymFamily::SubadditiveGap.validate(4).is_err());
        assert!(SymFamily::SupermodularGap.validate(1).is_err());
        let bad = SymFamily::SxosTight {
            epsilon: 1.5,
            bump: None,
        };
        assert!(bad.validate(10).is_err());
        let out = SymFamily::SxosTight {
            epsilon: 0.1,
            bump: Some(11),
        };
        assert!(out.validate(10).is_err());
    }
}
