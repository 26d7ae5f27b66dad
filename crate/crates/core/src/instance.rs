//! Problem instances and their JSON encoding.
//!
//! ```json
//! {"n": 4, "costs": [1, 1, 1, 1],
//!  "valuefn": {"kind": "additive", "weights": [4, 4, 4, 4]}}
//! ```
//!
//! `costs` may also be a single number for uniform costs, which is the only
//! practical encoding for closed-form families with very large `n`. Schema
//! errors name the offending field as a JSON pointer.

use serde_json::{json, Map, Value};

use crate::error::{Error, Result};
use crate::set::AgentSet;
use crate::valuefn::{Oracle, SymFamily, ValueFn, ValueKind};
use crate::EPS;

#[derive(Clone, Debug, PartialEq)]
pub enum Costs {
    Uniform(f64),
    PerAgent(Vec<f64>),
}

impl Costs {
    pub fn get(&self, i: usize) -> f64 {
        match self {
            Costs::Uniform(c) => *c,
            Costs::PerAgent(v) => v[i],
        }
    }

    pub fn total(&self, s: &AgentSet) -> f64 {
        match self {
            Costs::Uniform(c) => c * s.len() as f64,
            Costs::PerAgent(v) => s.iter().map(|i| v[i]).sum(),
        }
    }

    /// Cost of the prefix team `{0, .., k-1}`.
    pub fn prefix(&self, k: usize) -> f64 {
        match self {
            Costs::Uniform(c) => c * k as f64,
            Costs::PerAgent(v) => v[..k].iter().sum(),
        }
    }

    /// Prefix costs for `k = 0..=n`.
    pub fn prefix_sums(&self, n: usize) -> Vec<f64> {
        let mut out = Vec::with_capacity(n + 1);
        let mut acc = 0.0;
        out.push(0.0);
        for i in 0..n {
            acc += self.get(i);
            out.push(acc);
        }
        out
    }

    pub fn to_vec(&self, n: usize) -> Vec<f64> {
        (0..n).map(|i| self.get(i)).collect()
    }

    /// Every cost divided by `b`.
    pub fn scaled(&self, b: f64) -> Costs {
        match self {
            Costs::Uniform(c) => Costs::Uniform(c / b),
            Costs::PerAgent(v) => Costs::PerAgent(v.iter().map(|c| c / b).collect()),
        }
    }

    pub fn is_uniform(&self) -> bool {
        match self {
            Costs::Uniform(_) => true,
            Costs::PerAgent(v) => v.windows(2).all(|w| w[0] == w[1]),
        }
    }

    pub fn is_sorted(&self) -> bool {
        match self {
            Costs::Uniform(_) => true,
            Costs::PerAgent(v) => v.windows(2).all(|w| w[0] <= w[1]),
        }
    }

    fn validate(&self, n: usize) -> Result<()> {
        let check = |k: Option<usize>, c: f64| {
            if c.is_finite() && c > 0.0 {
                Ok(())
            } else {
                let pointer = match k {
                    Some(k) => format!("/costs/{k}"),
                    None => "/costs".to_string(),
                };
                Err(Error::schema(
                    pointer,
                    format!("costs must be positive and finite, got {c}"),
                ))
            }
        };
        match self {
            Costs::Uniform(c) => check(None, *c),
            Costs::PerAgent(v) => {
                if v.len() != n {
                    return Err(Error::schema(
                        "/costs",
                        format!("expected {n} costs, got {}", v.len()),
                    ));
                }
                v.iter()
                    .enumerate()
                    .try_for_each(|(k, &c)| check(Some(k), c))
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Instance {
    pub costs: Costs,
    pub valuefn: ValueFn,
}

impl Instance {
    pub fn new(valuefn: ValueFn, costs: Costs) -> Result<Self> {
        costs.validate(valuefn.n())?;
        Ok(Instance { costs, valuefn })
    }

    pub fn n(&self) -> usize {
        self.valuefn.n()
    }

    pub fn oracle(&self) -> Oracle<'_> {
        Oracle::new(&self.valuefn)
    }

    /// Symmetric value function with uniform or nondecreasing costs, so that
    /// prefix teams are optimal among teams of the same size.
    pub fn is_symmetric(&self) -> bool {
        self.valuefn.is_symmetric() && self.costs.is_sorted()
    }

    /// Agents whose cost exceeds their single-agent value. Such agents can
    /// never be hired alone; the model assumes this does not happen, so it is
    /// reported rather than rejected.
    pub fn warnings(&self) -> Vec<String> {
        let n = self.n();
        if self.valuefn.is_symmetric() {
            let f1 = self.valuefn.value_at_size(1);
            return match &self.costs {
                Costs::Uniform(c) if *c > f1 + EPS => {
                    vec![format!(
                        "uniform cost {c} exceeds the single-agent value {f1}"
                    )]
                }
                Costs::PerAgent(v) => v
                    .iter()
                    .enumerate()
                    .filter(|(_, &c)| c > f1 + EPS)
                    .map(|(i, c)| format!("agent {i}: cost {c} exceeds its value {f1}"))
                    .collect(),
                _ => Vec::new(),
            };
        }
        (0..n)
            .filter_map(|i| {
                let f = self.valuefn.value(&AgentSet::singleton(i));
                let c = self.costs.get(i);
                (c > f + EPS).then(|| format!("agent {i}: cost {c} exceeds its value {f}"))
            })
            .collect()
    }

    pub fn to_json(&self) -> Value {
        let costs = match &self.costs {
            Costs::Uniform(c) => json!(c),
            Costs::PerAgent(v) => json!(v),
        };
        let valuefn = match self.valuefn.kind() {
            ValueKind::Additive { weights } => json!({"kind": "additive", "weights": weights}),
            ValueKind::Xos { clauses } => json!({"kind": "xos", "clauses": clauses}),
            ValueKind::Coverage {
                element_weights,
                covers,
            } => json!({
                "kind": "coverage",
                "element_weights": element_weights,
                "covers": covers,
            }),
            ValueKind::SymTable { values } => json!({"kind": "sym_table", "values": values}),
            ValueKind::SymFormula(family) => {
                let params = match family {
                    SymFamily::SxosTight { epsilon, bump } => {
                        let mut p = Map::new();
                        p.insert("epsilon".into(), json!(epsilon));
                        if let Some(k) = bump {
                            p.insert("bump".into(), json!(k));
                        }
                        Value::Object(p)
                    }
                    _ => json!({}),
                };
                json!({"kind": "sym_formula", "family": family.name(), "params": params})
            }
        };
        json!({"n": self.n(), "costs": costs, "valuefn": valuefn})
    }

    pub fn from_json(doc: &Value) -> Result<Self> {
        let root = doc
            .as_object()
            .ok_or_else(|| Error::schema("", "an instance must be a JSON object"))?;
        let n = field(root, "", "n")?
            .as_u64()
            .filter(|&n| n > 0)
            .ok_or_else(|| Error::schema("/n", "must be a positive integer"))?
            as usize;

        let costs = match field(root, "", "costs")? {
            Value::Number(_) => Costs::Uniform(number(&root["costs"], "/costs")?),
            Value::Array(items) => Costs::PerAgent(
                items
                    .iter()
                    .enumerate()
                    .map(|(k, x)| number(x, &format!("/costs/{k}")))
                    .collect::<Result<_>>()?,
            ),
            _ => {
                return Err(Error::schema(
                    "/costs",
                    "must be a number or an array of numbers",
                ))
            }
        };

        let vf = field(root, "", "valuefn")?
            .as_object()
            .ok_or_else(|| Error::schema("/valuefn", "must be an object"))?;
        let kind = field(vf, "/valuefn", "kind")?
            .as_str()
            .ok_or_else(|| Error::schema("/valuefn/kind", "must be a string"))?;
        let at = |what: &str, e: Error| match e {
            Error::Input(m) => Error::schema(format!("/valuefn/{what}"), m),
            other => other,
        };
        let valuefn = match kind {
            "additive" => {
                let w = numbers(field(vf, "/valuefn", "weights")?, "/valuefn/weights")?;
                expect_len(w.len(), n, "/valuefn/weights")?;
                ValueFn::additive(w).map_err(|e| at("weights", e))?
            }
            "xos" => {
                let clauses = array(field(vf, "/valuefn", "clauses")?, "/valuefn/clauses")?
                    .iter()
                    .enumerate()
                    .map(|(k, c)| numbers(c, &format!("/valuefn/clauses/{k}")))
                    .collect::<Result<Vec<_>>>()?;
                ValueFn::xos(n, clauses).map_err(|e| at("clauses", e))?
            }
            "coverage" => {
                let weights = numbers(
                    field(vf, "/valuefn", "element_weights")?,
                    "/valuefn/element_weights",
                )?;
                let covers = array(field(vf, "/valuefn", "covers")?, "/valuefn/covers")?
                    .iter()
                    .enumerate()
                    .map(|(i, c)| {
                        let p = format!("/valuefn/covers/{i}");
                        array(c, &p)?
                            .iter()
                            .enumerate()
                            .map(|(k, e)| {
                                e.as_u64().map(|e| e as usize).ok_or_else(|| {
                                    Error::schema(format!("{p}/{k}"), "must be an element index")
                                })
                            })
                            .collect::<Result<Vec<_>>>()
                    })
                    .collect::<Result<Vec<_>>>()?;
                expect_len(covers.len(), n, "/valuefn/covers")?;
                ValueFn::coverage(weights, covers).map_err(|e| at("covers", e))?
            }
            "sym_table" => {
                let v = numbers(field(vf, "/valuefn", "values")?, "/valuefn/values")?;
                expect_len(v.len(), n + 1, "/valuefn/values")?;
                ValueFn::sym_table(v).map_err(|e| at("values", e))?
            }
            "sym_formula" => {
                let name = field(vf, "/valuefn", "family")?
                    .as_str()
                    .ok_or_else(|| Error::schema("/valuefn/family", "must be a string"))?;
                let empty = Map::new();
                let params = match vf.get("params") {
                    None => &empty,
                    Some(p) => p
                        .as_object()
                        .ok_or_else(|| Error::schema("/valuefn/params", "must be an object"))?,
                };
                let family = match name {
                    "additive_gap" => SymFamily::AdditiveGap,
                    "subadditive_gap" => SymFamily::SubadditiveGap,
                    "supermodular_gap" => SymFamily::SupermodularGap,
                    "unconstrained_gap" => SymFamily::UnconstrainedGap,
                    "sxos_tight" => {
                        let epsilon = number(
                            field(params, "/valuefn/params", "epsilon")?,
                            "/valuefn/params/epsilon",
                        )?;
                        let bump = match params.get("bump") {
                            None | Some(Value::Null) => None,
                            Some(b) => Some(b.as_u64().ok_or_else(|| {
                                Error::schema("/valuefn/params/bump", "must be a team size")
                            })? as usize),
                        };
                        SymFamily::SxosTight { epsilon, bump }
                    }
                    other => {
                        return Err(Error::schema(
                            "/valuefn/family",
                            format!("unknown family {other:?}"),
                        ))
                    }
                };
                ValueFn::sym_formula(n, family).map_err(|e| at("params", e))?
            }
            other => {
                return Err(Error::schema(
                    "/valuefn/kind",
                    format!("unknown kind {other:?}"),
                ))
            }
        };
        Instance::new(valuefn, costs)
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        let doc: Value = serde_json::from_str(text)
            .map_err(|e| Error::schema("", format!("malformed JSON: {e}")))?;
        Self::from_json(&doc)
    }
}

fn field<'a>(obj: &'a Map<String, Value>, at: &str, key: &str) -> Result<&'a Value> {
    obj.get(key)
        .ok_or_else(|| Error::schema(format!("{at}/{key}"), "missing required field"))
}

fn number(v: &Value, pointer: &str) -> Result<f64> {
    v.as_f64()
        .ok_or_else(|| Error::schema(pointer, "must be a number"))
}

fn array<'a>(v: &'a Value, pointer: &str) -> Result<&'a Vec<Value>> {
    v.as_array()
        .ok_or_else(|| Error::schema(pointer, "must be an array"))
}

fn numbers(v: &Value, pointer: &str) -> Result<Vec<f64>> {
    array(v, pointer)?
        .iter()
        .enumerate()
        .map(|(k, x)| number(x, &format!("{pointer}/{k}")))
        .collect()
}

fn expect_len(got: usize, want: usize, pointer: &str) -> Result<()> {
    if got == want {
        Ok(())
    } else {
        Err(Error::schema(
            pointer,
            format!("expected {want} entries, got {got}"),
        ))
    }
}
