//! Re-derivation of solve reports: every number is recomputed from the
//! instance and the chosen team, and the method's guarantee is checked
//! against the exact optimum when the instance is small or symmetric.

use serde_json::{json, Value};
use teamcontract::contract;
use teamcontract::exact::{opt_enumerate, opt_symmetric, Constraint};
use teamcontract::{AgentSet, ApproxConfig, Exec, Instance, Objective, ENUMERATION_CAP, EPS};

use crate::args::Method;
use crate::report::{digest, num, read_num};
use crate::solve::Team;
use crate::{Failure, Outcome};

/// Relative tolerance for recomputed numbers.
const REL_TOL: f64 = 1e-6;

/// Largest prefix team recomputed agent by agent; longer prefixes of
/// symmetric instances use the size profile.
const SET_RECOMPUTE_CAP: usize = 4096;

/// Largest symmetric instance whose optimum is found by a prefix scan.
const SCAN_CAP: usize = 1 << 22;

struct Check {
    name: String,
    ok: bool,
    detail: String,
}

pub struct Verification {
    pub ok: bool,
    checks: Vec<Check>,
    recomputed: Value,
}

impl Verification {
    pub fn to_json(&self) -> Value {
        let checks: Vec<Value> = self
            .checks
            .iter()
            .map(|c| json!({"name": c.name, "ok": c.ok, "detail": c.detail}))
            .collect();
        json!({"ok": self.ok, "recomputed": self.recomputed, "checks": checks})
    }

    pub fn failures(&self) -> String {
        self.checks
            .iter()
            .filter(|c| !c.ok)
            .map(|c| format!("{}: {}", c.name, c.detail))
            .collect::<Vec<_>>()
            .join("; ")
    }

    fn push(&mut self, name: &str, ok: bool, detail: String) {
        self.ok &= ok;
        self.checks.push(Check {
            name: name.into(),
            ok,
            detail,
        });
    }
}

fn same(a: f64, b: f64) -> bool {
    a == b || (a - b).abs() <= REL_TOL * a.abs().max(b.abs()).max(1e-3)
}

fn at_least(lhs: f64, rhs: f64) -> bool {
    lhs >= rhs - 1e-9 * rhs.abs().max(1.0)
}

fn field<'a>(report: &'a Value, pointer: &str) -> Outcome<&'a Value> {
    report
        .pointer(pointer)
        .ok_or_else(|| Failure::Input(format!("the report has no {pointer}")))
}

fn number(report: &Value, pointer: &str) -> Outcome<f64> {
    read_num(field(report, pointer)?)
        .ok_or_else(|| Failure::Input(format!("{pointer} is not a number")))
}

/// `(f, cost, rho)` of the team, through the contract calculus.
fn recompute(inst: &Instance, team: &Team) -> Outcome<(f64, f64, f64)> {
    let n = inst.n();
    let o = inst.oracle();
    let set = match team {
        Team::Set(s) => s.clone(),
        Team::Size(k) if *k > n => {
            return Err(Failure::Input(format!("team size {k} exceeds n = {n}")));
        }
        Team::Size(k) if *k <= SET_RECOMPUTE_CAP => AgentSet::full(*k),
        Team::Size(k) => {
            if !inst.is_symmetric() {
                return Err(Failure::Input(
                    "a team given by size needs a symmetric instance".into(),
                ));
            }
            let f = inst.valuefn.value_at_size(*k);
            let m = f - inst.valuefn.value_at_size(k - 1);
            let cost = inst.costs.prefix(*k);
            let rho = if m > 0.0 { cost / m } else { f64::INFINITY };
            return Ok((f, cost, rho));
        }
    };
    let out = contract::outcome(&o, &inst.costs, &set)?;
    Ok((out.f, out.c, out.rho))
}

/// Exact optimum, when enumeration or a prefix scan is affordable.
fn optimum(
    inst: &Instance,
    objective: Objective,
    c: Constraint,
    exec: Exec,
) -> Outcome<Option<f64>> {
    let o = inst.oracle();
    let n = inst.n();
    if n <= ENUMERATION_CAP {
        return Ok(Some(
            opt_enumerate(&o, &inst.costs, objective, c, exec)?.best_value,
        ));
    }
    if inst.is_symmetric() && inst.costs.is_sorted() && n <= SCAN_CAP {
        return Ok(Some(
            opt_symmetric(&o, &inst.costs, objective, c)?.best_value,
        ));
    }
    Ok(None)
}

fn largest_eligible(inst: &Instance) -> usize {
    let c = inst.costs.get(0);
    let mut top = 0;
    for k in 1..=inst.n() {
        let kf = k as f64;
        if inst.valuefn.value_at_size(k) >= c * kf * kf {
            top = k;
        } else {
            break;
        }
    }
    top
}

/// `OPT / factor` guaranteed by the value routine: `(3/A) 2^gamma`.
fn value_factor(cfg: &ApproxConfig) -> f64 {
    3.0 / cfg.area() * 2f64.powf(cfg.gamma)
}

pub fn verify_report(inst: &Instance, report: &Value, exec: Exec) -> Outcome<Verification> {
    let method_name = field(report, "/method")?.as_str().unwrap_or_default();
    let method = Method::parse(method_name)
        .ok_or_else(|| Failure::Input(format!("unknown method {method_name:?} in report")))?;
    let objective_name = field(report, "/objective")?.as_str().unwrap_or_default();
    let objective = Objective::parse(objective_name)
        .ok_or_else(|| Failure::Input(format!("unknown objective {objective_name:?} in report")))?;
    let team = Team::from_json(field(report, "/team")?)
        .ok_or_else(|| Failure::Input("/team must hold a set or a size".into()))?;
    let b = number(report, "/constraint/b")?;
    let big_b = number(report, "/constraint/B")?;
    let config: Option<ApproxConfig> = match report.get("config") {
        Some(Value::Null) | None => None,
        Some(v) => Some(
            serde_json::from_value(v.clone())
                .map_err(|e| Failure::Input(format!("/config: {e}")))?,
        ),
    };
    let preset = report.get("preset").and_then(Value::as_str);

    let mut v = Verification {
        ok: true,
        checks: Vec::new(),
        recomputed: Value::Null,
    };

    if let Some(claimed) = report.pointer("/instance/digest").and_then(Value::as_str) {
        let actual = digest(inst);
        v.push(
            "digest",
            claimed == actual,
            format!("report {claimed}, instance {actual}"),
        );
    }

    let (f, cost, rho) = recompute(inst, &team)?;
    let empty = matches!(&team, Team::Size(0)) || matches!(&team, Team::Set(s) if s.is_empty());
    let w = f - cost;
    let g = if rho.is_finite() {
        (1.0 - rho) * f
    } else {
        f64::NEG_INFINITY
    };
    let transfer = if empty { 0.0 } else { rho * f };
    v.recomputed = json!({
        "f": num(f), "cost": num(cost), "w": num(w), "g": num(g), "rho": num(rho), "transfer": num(transfer),
    });
    for (name, value) in [
        ("f", f),
        ("cost", cost),
        ("w", w),
        ("g", g),
        ("rho", rho),
        ("transfer", transfer),
    ] {
        let claimed = number(report, &format!("/{name}"))?;
        v.push(
            name,
            same(claimed, value),
            format!("report {claimed}, recomputed {value}"),
        );
    }

    let b_feasible = rho <= b + EPS;
    let within = transfer <= big_b + EPS;
    for (name, actual) in [("b_feasible", b_feasible), ("within_B", within)] {
        let claimed = field(report, &format!("/verdicts/{name}"))?.as_bool();
        v.push(
            &format!("verdict {name}"),
            claimed == Some(actual),
            format!("report {claimed:?}, recomputed {actual}"),
        );
    }
    if method != Method::Singleton {
        v.push(
            "share budget",
            b_feasible,
            format!("rho {rho} against b {b}"),
        );
    }
    if matches!(method, Method::ValueBigB | Method::Bruteforce) {
        v.push(
            "transfer budget",
            within,
            format!("transfer {transfer} against B {big_b}"),
        );
    }

    let share = Constraint::share(b);
    let (holds, detail) = match method {
        Method::Alg3 => {
            let factor = match preset {
                Some("xos188") => Some(188.0),
                Some("submod468") => Some(468.0),
                _ => None,
            };
            match (factor, optimum(inst, Objective::Welfare, share, exec)?) {
                (Some(k), Some(opt)) => (
                    at_least(g, opt / k),
                    format!("g {g} against OPT(w) {opt} / {k}"),
                ),
                (None, _) => (
                    true,
                    "not checked: tuned parameters have no fixed factor".into(),
                ),
                (_, None) => (
                    true,
                    "not checked: instance too large for an exact optimum".into(),
                ),
            }
        }
        Method::Bruteforce => {
            let c = Constraint { b, transfer: big_b };
            match optimum(inst, objective, c, exec)? {
                Some(opt) => {
                    let got = match objective {
                        Objective::Welfare => w,
                        Objective::Utility => g,
                        Objective::Value => f,
                    };
                    let got = if empty { 0.0 } else { got };
                    (
                        same(got, opt),
                        format!("{objective} {got} against OPT {opt}"),
                    )
                }
                None => (
                    true,
                    "not checked: instance too large for an exact optimum".into(),
                ),
            }
        }
        Method::SymSubmod => match optimum(inst, Objective::Welfare, share, exec)? {
            Some(opt) => (same(w, opt), format!("w {w} against OPT(w) {opt}")),
            None => (
                true,
                "not checked: instance too large for an exact optimum".into(),
            ),
        },
        Method::Sxos => {
            let top = largest_eligible(inst);
            match optimum(inst, Objective::Welfare, share, exec)? {
                Some(opt) if top > 3 && opt > 0.0 => {
                    let bound = 2.0 / (1.0 - 3.0 / top as f64);
                    (
                        at_least(bound * w, opt),
                        format!("OPT(w) {opt} against {bound} * w {w}"),
                    )
                }
                Some(_) => (
                    true,
                    format!("not checked: largest eligible size {top} is at most 3"),
                ),
                None => (
                    true,
                    "not checked: instance too large for an exact optimum".into(),
                ),
            }
        }
        Method::Singleton => {
            let unconstrained = Constraint::share(f64::INFINITY);
            match optimum(inst, Objective::Welfare, unconstrained, exec)? {
                Some(opt) => {
                    let n = inst.n() as f64;
                    (
                        at_least(g * n, opt),
                        format!("n * g {} against unconstrained OPT(w) {opt}", g * n),
                    )
                }
                None => (
                    true,
                    "not checked: instance too large for an exact optimum".into(),
                ),
            }
        }
        Method::ValueB => {
            let cfg =
                config.ok_or_else(|| Failure::Input("value_b reports need /config".into()))?;
            match optimum(inst, Objective::Value, share, exec)? {
                Some(opt) => {
                    let k = value_factor(&cfg);
                    (
                        at_least(f, opt / k),
                        format!("f {f} against OPT(f) {opt} / {k}"),
                    )
                }
                None => (
                    true,
                    "not checked: instance too large for an exact optimum".into(),
                ),
            }
        }
        Method::ValueBigB => (true, "not checked: only the budgets are verified".into()),
        Method::WelfareB => {
            let cfg =
                config.ok_or_else(|| Failure::Input("welfare_b reports need /config".into()))?;
            if b > teamcontract::objectives::WELFARE_SPLIT {
                (
                    true,
                    format!(
                        "not checked: no closed-form factor above b = {}",
                        teamcontract::objectives::WELFARE_SPLIT
                    ),
                )
            } else {
                match optimum(inst, Objective::Welfare, share, exec)? {
                    Some(opt) => {
                        let k = value_factor(&cfg) / (1.0 - b);
                        (
                            at_least(g, opt / k),
                            format!("g {g} against OPT(w) {opt} / {k}"),
                        )
                    }
                    None => (
                        true,
                        "not checked: instance too large for an exact optimum".into(),
                    ),
                }
            }
        }
    };
    v.push("guarantee", holds, detail);
    Ok(v)
}
