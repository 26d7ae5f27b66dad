use serde_json::{json, Value};
use teamcontract::contract::Outcome as TeamOutcome;
use teamcontract::exact::{opt_enumerate, Constraint};
use teamcontract::objectives::{
    value_approx_bfeasible, value_approx_btransfer, welfare_approx_bfeasible,
};
use teamcontract::symalg::{best_singleton, sxos_welfare_approx, sym_submodular_opt, SymResult};
use teamcontract::xosalg::approx_welfare;
use teamcontract::{AgentSet, Exec, Instance, Oracle, QueryStats, EPS};

use crate::args::{Method, Request};
use crate::report::num;
use crate::{Failure, Outcome};

#[derive(Clone, Debug, PartialEq)]
pub enum Team {
    Set(AgentSet),
    /// The prefix team `[k]` of a symmetric instance.
    Size(usize),
}

impl Team {
    pub fn to_json(&self) -> Value {
        match self {
            Team::Set(s) => json!({ "set": s.to_vec() }),
            Team::Size(k) => json!({ "size": k }),
        }
    }

    pub fn from_json(v: &Value) -> Option<Team> {
        if let Some(list) = v.get("set").and_then(Value::as_array) {
            let idx: Option<Vec<usize>> = list
                .iter()
                .map(|x| x.as_u64().map(|i| i as usize))
                .collect();
            return Some(Team::Set(idx?.into_iter().collect()));
        }
        v.get("size")
            .and_then(Value::as_u64)
            .map(|k| Team::Size(k as usize))
    }
}

#[derive(Clone, Debug)]
pub struct Solution {
    pub team: Team,
    pub f: f64,
    pub cost: f64,
    pub w: f64,
    pub g: f64,
    pub rho: f64,
}

impl Solution {
    fn from_outcome(o: TeamOutcome) -> Self {
        Solution {
            team: Team::Set(o.set),
            f: o.f,
            cost: o.c,
            w: o.w,
            g: o.g,
            rho: o.rho,
        }
    }

    fn from_sym(inst: &Instance, r: SymResult) -> Self {
        Solution {
            team: Team::Size(r.k),
            f: r.f,
            cost: inst.costs.prefix(r.k),
            w: r.w,
            g: r.g,
            rho: r.rho,
        }
    }

    pub fn transfer(&self) -> f64 {
        if self.team == Team::Size(0) || self.team == Team::Set(AgentSet::new()) {
            0.0
        } else {
            self.rho * self.f
        }
    }

    pub fn write(&self, report: &mut Value, req: &Request, stats: QueryStats) {
        let uses_config = matches!(
            req.method,
            Method::Alg3 | Method::ValueB | Method::ValueBigB | Method::WelfareB
        );
        let fields = json!({
            "method": req.method.name(),
            "objective": req.objective.name(),
            "preset": if uses_config { req.preset } else { None },
            "config": if uses_config { serde_json::to_value(&req.config).expect("config is plain data") } else { Value::Null },
            "constraint": { "b": num(req.b), "B": num(req.big_b) },
            "team": self.team.to_json(),
            "f": num(self.f),
            "cost": num(self.cost),
            "w": num(self.w),
            "g": num(self.g),
            "rho": num(self.rho),
            "transfer": num(self.transfer()),
            "verdicts": {
                "b_feasible": self.rho <= req.b + EPS,
                "within_B": self.transfer() <= req.big_b + EPS,
            },
            "queries": stats,
        });
        let obj = report.as_object_mut().expect("reports are objects");
        for (k, v) in fields.as_object().expect("fields are an object") {
            obj.insert(k.clone(), v.clone());
        }
    }
}

/// Methods that have no share-budget parameter run at `b = 1`, and only the
/// methods with a transfer budget accept `B`; anything else is refused
/// rather than silently ignored.
fn check_budgets(req: &Request) -> Outcome<()> {
    let fixed_b = matches!(req.method, Method::Alg3 | Method::Sxos | Method::SymSubmod);
    if fixed_b && req.b != 1.0 {
        return Err(Failure::Input(format!(
            "method {} works at b = 1; use welfare_b or value_b for other share budgets",
            req.method.name()
        )));
    }
    let takes_big_b = matches!(req.method, Method::ValueBigB | Method::Bruteforce);
    if !takes_big_b && req.big_b.is_finite() {
        return Err(Failure::Input(format!(
            "method {} has no transfer budget; use value_B or bruteforce with --B",
            req.method.name()
        )));
    }
    Ok(())
}

pub fn solve(inst: &Instance, oracle: &Oracle<'_>, req: &Request, exec: Exec) -> Outcome<Solution> {
    check_budgets(req)?;
    let costs = &inst.costs;
    let cfg = &req.config;
    Ok(match req.method {
        Method::Alg3 => Solution::from_outcome(approx_welfare(oracle, costs, cfg, exec)?),
        Method::Sxos => Solution::from_sym(inst, sxos_welfare_approx(oracle, costs)?),
        Method::SymSubmod => Solution::from_sym(inst, sym_submodular_opt(oracle, costs)?),
        Method::Bruteforce => {
            let c = Constraint {
                b: req.b,
                transfer: req.big_b,
            };
            Solution::from_outcome(opt_enumerate(oracle, costs, req.objective, c, exec)?.best)
        }
        Method::Singleton => {
            if inst.n() == 0 {
                return Err(Failure::Input("the instance has no agents".into()));
            }
            Solution::from_outcome(best_singleton(oracle, costs))
        }
        Method::ValueB => {
            Solution::from_outcome(value_approx_bfeasible(oracle, costs, req.b, cfg, exec)?)
        }
        Method::ValueBigB => Solution::from_outcome(value_approx_btransfer(
            oracle, costs, req.b, req.big_b, cfg, exec,
        )?),
        Method::WelfareB => {
            Solution::from_outcome(welfare_approx_bfeasible(oracle, costs, req.b, cfg, exec)?)
        }
    })
}
