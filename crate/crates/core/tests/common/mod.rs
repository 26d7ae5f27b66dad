//! Seeded corpora and an independent brute-force oracle shared by the
//! integration suites.
#![allow(dead_code)]

use teamcontract::instances::{FamilySpec, SymCostMode, SymShape};
use teamcontract::{Costs, Instance, ValueFn};

pub const TOL: f64 = 1e-9;

pub fn coverage(seed: u64) -> Instance {
    let n = 3 + (seed % 8) as usize;
    FamilySpec::RandomCoverage {
        n,
        elements: 2 * n,
        seed,
    }
    .generate()
    .expect("coverage generation")
}

pub fn xos(seed: u64) -> Instance {
    let n = 3 + (seed % 8) as usize;
    FamilySpec::RandomXos {
        n,
        clauses: 2 + (seed % 3) as usize,
        seed,
    }
    .generate()
    .expect("xos generation")
}

pub fn sym_table(n: usize, seed: u64, shape: SymShape, costs: SymCostMode) -> Instance {
    FamilySpec::RandomSymTable {
        n,
        seed,
        shape,
        costs,
    }
    .generate()
    .expect("table generation")
}

/// A size in `[lo, hi]`, log-uniform in the seed so small and large sizes
/// are both common.
pub fn size_for(seed: u64, lo: usize, hi: usize) -> usize {
    let t = (seed.wrapping_mul(0x9E37_79B9_7F4A_7C15) >> 11) as f64 / (1u64 << 53) as f64;
    let v = (lo as f64).ln() + t * ((hi as f64).ln() - (lo as f64).ln());
    (v.exp().round() as usize).clamp(lo, hi)
}

pub fn ceil_log2(n: usize) -> u64 {
    (usize::BITS - (n.max(1) - 1).leading_zeros()) as u64
}

/// Plain recomputation of every team's value, share, welfare and utility
/// straight from the value function, without the library's optimizers.
pub struct Brute {
    pub n: usize,
    pub f: Vec<f64>,
    pub c: Vec<f64>,
}

#[derive(Clone, Copy, Debug)]
pub struct Row {
    pub mask: u64,
    pub f: f64,
    pub c: f64,
    pub rho: f64,
}

impl Row {
    pub fn w(&self) -> f64 {
        self.f - self.c
    }

    pub fn g(&self) -> f64 {
        if self.rho.is_finite() {
            (1.0 - self.rho) * self.f
        } else {
            f64::NEG_INFINITY
        }
    }
}

impl Brute {
    pub fn new(vf: &ValueFn, costs: &Costs) -> Self {
        let n = vf.n();
        assert!(n <= 16, "brute force is for small instances");
        let f = (0..1u64 << n).map(|m| vf.value_mask(m)).collect();
        let c = (0..n).map(|i| costs.get(i)).collect();
        Brute { n, f, c }
    }

    pub fn row(&self, mask: u64) -> Row {
        let f = self.f[mask as usize];
        let mut rho = 0.0;
        let mut c = 0.0;
        for i in 0..self.n {
            if mask >> i & 1 == 1 {
                let marg = f - self.f[(mask & !(1 << i)) as usize];
                rho += if marg > 0.0 {
                    self.c[i] / marg
                } else {
                    f64::INFINITY
                };
                c += self.c[i];
            }
        }
        Row { mask, f, c, rho }
    }

    pub fn rows(&self) -> impl Iterator<Item = Row> + '_ {
        (0..1u64 << self.n).map(|m| self.row(m))
    }

    /// Best score among teams with share at most `b`; the empty team scores 0.
    pub fn opt(&self, b: f64, score: impl Fn(&Row) -> f64) -> f64 {
        self.rows()
            .filter(|r| r.mask == 0 || r.rho <= b + TOL)
            .map(|r| if r.mask == 0 { 0.0 } else { score(&r) })
            .fold(0.0, f64::max)
    }
}
