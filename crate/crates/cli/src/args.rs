use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use teamcontract::instances::{FamilySpec, SymCostMode, SymShape};
use teamcontract::{ApproxConfig, Objective};

use crate::{Failure, Outcome};

#[derive(Parser, Debug)]
#[command(
    name = "teamcontract",
    version,
    about = "Team formation under linear contracts"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Write an instance of a named family.
    Gen(GenArgs),
    /// Pick a team with one of the solvers.
    Solve(SolveArgs),
    /// Exact optima of welfare, utility and value, and their ratio.
    Gap(GapArgs),
    /// Recompute every number of a saved solve report.
    Verify(VerifyArgs),
}

impl Command {
    pub fn pretty(&self) -> bool {
        match self {
            Command::Gen(a) => a.pretty,
            Command::Solve(a) => a.pretty,
            Command::Gap(a) => a.pretty,
            Command::Verify(a) => a.pretty,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
#[value(rename_all = "snake_case")]
pub enum Family {
    AdditiveGap,
    SubadditiveGap,
    SupermodularGap,
    SxosTight,
    UnconstrainedGap,
    SingleAgent,
    RandomXos,
    RandomCoverage,
    RandomSymTable,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Shape {
    Submodular,
    Sxos,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
#[value(rename_all = "snake_case")]
pub enum CostMode {
    FullFeasible,
    Eligible,
    Sorted,
}

#[derive(Args, Debug)]
pub struct GenArgs {
    #[arg(long, value_enum)]
    pub family: Family,
    /// Number of agents.
    #[arg(long)]
    pub n: Option<usize>,
    /// Perturbation of `sxos_tight`.
    #[arg(long, default_value_t = 0.1)]
    pub epsilon: f64,
    /// Bump position of `sxos_tight`; `--bump` alone places it at n-1.
    #[arg(long, num_args = 0..=1)]
    pub bump: Option<Option<usize>>,
    /// Single-agent value.
    #[arg(long, default_value_t = 1.0)]
    pub value: f64,
    /// Single-agent cost.
    #[arg(long, default_value_t = 1.0)]
    pub cost: f64,
    #[arg(long, default_value_t = 3)]
    pub clauses: usize,
    /// Coverage ground-set size; defaults to 2n.
    #[arg(long)]
    pub elements: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = Shape::Sxos)]
    pub shape: Shape,
    #[arg(long = "cost-mode", value_enum, default_value_t = CostMode::Eligible)]
    pub cost_mode: CostMode,
    /// Write the instance here and print a short report instead of the instance.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub pretty: bool,
}

impl GenArgs {
    fn need_n(&self) -> Outcome<usize> {
        self.n
            .ok_or_else(|| Failure::Input(format!("--n is required for {:?}", self.family)))
    }

    pub fn spec(&self) -> Outcome<FamilySpec> {
        Ok(match self.family {
            Family::AdditiveGap => FamilySpec::AdditiveGap { n: self.need_n()? },
            Family::SubadditiveGap => FamilySpec::SubadditiveGap { n: self.need_n()? },
            Family::SupermodularGap => FamilySpec::SupermodularGap { n: self.need_n()? },
            Family::UnconstrainedGap => FamilySpec::UnconstrainedGap { n: self.need_n()? },
            Family::SxosTight => {
                let n = self.need_n()?;
                let bump = self.bump.map(|k| k.unwrap_or(n.saturating_sub(1)));
                FamilySpec::SxosTight {
                    n,
                    epsilon: self.epsilon,
                    bump,
                }
            }
            Family::SingleAgent => FamilySpec::SingleAgent {
                value: self.value,
                cost: self.cost,
            },
            Family::RandomXos => FamilySpec::RandomXos {
                n: self.need_n()?,
                clauses: self.clauses,
                seed: self.seed,
            },
            Family::RandomCoverage => {
                let n = self.need_n()?;
                FamilySpec::RandomCoverage {
                    n,
                    elements: self.elements.unwrap_or(2 * n),
                    seed: self.seed,
                }
            }
            Family::RandomSymTable => FamilySpec::RandomSymTable {
                n: self.need_n()?,
                seed: self.seed,
                shape: match self.shape {
                    Shape::Submodular => SymShape::Submodular,
                    Shape::Sxos => SymShape::Sxos,
                },
                costs: match self.cost_mode {
                    CostMode::FullFeasible => SymCostMode::FullFeasible,
                    CostMode::Eligible => SymCostMode::Eligible,
                    CostMode::Sorted => SymCostMode::Sorted,
                },
            },
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Method {
    /// Doubling collection of scaling sets; utility within a constant of OPT(w).
    Alg3,
    /// Logarithmic search for symmetric XOS with uniform cost.
    Sxos,
    /// Exact logarithmic search for symmetric submodular with sorted costs.
    #[value(name = "sym_submod")]
    SymSubmod,
    /// Enumerates all teams (n <= 20).
    Bruteforce,
    /// Best single agent.
    Singleton,
    /// Large value under share budget b.
    #[value(name = "value_b")]
    ValueB,
    /// Large value under share budget b and transfer budget B.
    #[value(name = "value_B")]
    ValueBigB,
    /// Utility approximating welfare under share budget b.
    #[value(name = "welfare_b")]
    WelfareB,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Alg3 => "alg3",
            Method::Sxos => "sxos",
            Method::SymSubmod => "sym_submod",
            Method::Bruteforce => "bruteforce",
            Method::Singleton => "singleton",
            Method::ValueB => "value_b",
            Method::ValueBigB => "value_B",
            Method::WelfareB => "welfare_b",
        }
    }

    pub fn parse(s: &str) -> Option<Method> {
        <Method as ValueEnum>::from_str(s, false).ok()
    }

    /// The objective a method optimizes; only brute force takes any.
    pub fn native_objective(self) -> Option<Objective> {
        match self {
            Method::Bruteforce => None,
            Method::ValueB | Method::ValueBigB => Some(Objective::Value),
            _ => Some(Objective::Welfare),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ObjectiveArg {
    Welfare,
    Utility,
    Value,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Preset {
    Xos188,
    Submod468,
}

#[derive(Args, Debug)]
pub struct SolveArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long, value_enum)]
    pub objective: Option<ObjectiveArg>,
    #[arg(long, value_enum, default_value_t = Method::Alg3)]
    pub method: Method,
    #[arg(long, value_enum, default_value_t = Preset::Xos188)]
    pub preset: Preset,
    /// Share budget.
    #[arg(long, default_value_t = 1.0)]
    pub b: f64,
    /// Transfer budget; `inf` for none.
    #[arg(long = "B")]
    pub big_b: Option<f64>,
    /// Demand-oracle quality.
    #[arg(long)]
    pub a: Option<f64>,
    #[arg(long)]
    pub gamma: Option<f64>,
    #[arg(long)]
    pub m: Option<f64>,
    #[arg(long = "M")]
    pub big_m: Option<f64>,
    /// Accepted for symmetry with `gen`; every solver is deterministic.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub threads: Option<usize>,
    /// Recompute the report through the contract calculus and check the
    /// method's guarantee against the exact optimum where affordable.
    #[arg(long)]
    pub verify: bool,
    /// Also write the report to this file.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub pretty: bool,
}

/// Everything a solver run depends on besides the instance.
#[derive(Clone, Debug)]
pub struct Request {
    pub method: Method,
    pub objective: Objective,
    pub config: ApproxConfig,
    /// Whether `config` is an unmodified preset, which fixes a guarantee factor.
    pub preset: Option<&'static str>,
    pub b: f64,
    pub big_b: f64,
}

impl SolveArgs {
    pub fn request(&self) -> Outcome<Request> {
        let asked = self.objective.map(|o| match o {
            ObjectiveArg::Welfare => Objective::Welfare,
            ObjectiveArg::Utility => Objective::Utility,
            ObjectiveArg::Value => Objective::Value,
        });
        let objective = match (self.method.native_objective(), asked) {
            (Some(native), Some(o)) if o != native => {
                return Err(Failure::Input(format!(
                    "method {} optimizes {native}, not {o}",
                    self.method.name()
                )))
            }
            (Some(native), _) => native,
            (None, o) => o.unwrap_or(Objective::Welfare),
        };
        let (mut config, name) = match self.preset {
            Preset::Xos188 => (ApproxConfig::xos188(), "xos188"),
            Preset::Submod468 => (ApproxConfig::submod468(), "submod468"),
        };
        let tuned =
            self.a.is_some() || self.gamma.is_some() || self.m.is_some() || self.big_m.is_some();
        config.a = self.a.unwrap_or(config.a);
        config.gamma = self.gamma.unwrap_or(config.gamma);
        config.m = self.m.unwrap_or(config.m);
        config.big_m = self.big_m.unwrap_or(config.big_m);
        config.validate()?;
        if !(self.b > 0.0) {
            return Err(Failure::Input(format!(
                "--b must be positive, got {}",
                self.b
            )));
        }
        let big_b = self.big_b.unwrap_or(f64::INFINITY);
        if !(big_b >= 0.0) {
            return Err(Failure::Input(format!(
                "--B must be nonnegative, got {big_b}"
            )));
        }
        if self.method == Method::ValueBigB && self.big_b.is_none() {
            return Err(Failure::Input("method value_B needs --B".into()));
        }
        Ok(Request {
            method: self.method,
            objective,
            config,
            preset: (!tuned).then_some(name),
            b: self.b,
            big_b,
        })
    }
}

#[derive(Args, Debug)]
pub struct GapArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long, default_value_t = 1.0)]
    pub b: f64,
    #[arg(long)]
    pub threads: Option<usize>,
    #[arg(long)]
    pub pretty: bool,
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    /// A report written by `solve`.
    #[arg(long)]
    pub report: PathBuf,
    #[arg(long)]
    pub threads: Option<usize>,
    #[arg(long)]
    pub pretty: bool,
}
