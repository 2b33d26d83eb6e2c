use clap::{Args, Parser, Subcommand, ValueEnum};
use housealloc::bench::{self, Domain};
use housealloc::dipped::{min_envy_pareto_single_dipped, min_envy_single_dipped_ties, validate_single_dipped};
use housealloc::gen::{gen_single_dipped, gen_single_peaked, gen_uniform_cardinal};
use housealloc::model::{agent_name, house_name, parse_house};
use housealloc::oracle::{min_envy_pareto_exhaustive, min_measure_exhaustive, OracleConfig};
use housealloc::peaked::{min_envy_pareto_single_peaked, min_envy_single_peaked, validate_single_peaked};
use housealloc::refine::{self, Mode};
use housealloc::{measure_value, welfare, Allocation, Error, House, Instance, Measure, WelfareKind};
use serde_json::json;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Duration;

#[derive(Parser)]
#[command(name = "housealloc", version, about = "Envy minimization for house allocation")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Minimum-measure allocation.
    Solve(SolveArgs),
    /// Improve an allocation by at least k with at most q reallocations.
    Refine(RefineArgs),
    /// Minimum-envy allocation that is also Pareto optimal.
    Pareto(ParetoArgs),
    /// Welfare-maximizing allocation.
    Welfare(WelfareArgs),
    /// Generate a random instance.
    Gen(GenArgs),
    /// Run an experiment sweep and write CSV.
    #[command(subcommand)]
    Bench(BenchCmd),
    /// Check an instance against a preference domain.
    Check(CheckArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum MeasureArg {
    Envy,
    Total,
    Max,
}

impl From<MeasureArg> for Measure {
    fn from(m: MeasureArg) -> Self {
        match m {
            MeasureArg::Envy => Measure::Envy,
            MeasureArg::Total => Measure::Total,
            MeasureArg::Max => Measure::Max,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Objective {
    Util,
    Nash,
    Egal,
}

impl From<Objective> for WelfareKind {
    fn from(o: Objective) -> Self {
        match o {
            Objective::Util => WelfareKind::Utilitarian,
            Objective::Nash => WelfareKind::Nash,
            Objective::Egal => WelfareKind::Egalitarian,
        }
    }
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum Method {
    Oracle,
    Peaked,
    Dipped,
}

#[derive(Args)]
struct SolveArgs {
    #[arg(long)]
    instance: PathBuf,
    #[arg(long, value_enum, default_value = "envy")]
    measure: MeasureArg,
    #[arg(long, value_enum, default_value = "oracle")]
    method: Method,
    /// Fail when the instance has no axis instead of using h1..hm.
    #[arg(long)]
    axis_required: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Randomized,
    Exhaustive,
    Literal,
    Oracle,
    Sampled,
}

#[derive(Args)]
struct RefineArgs {
    #[arg(long)]
    instance: PathBuf,
    #[arg(long)]
    alloc: PathBuf,
    #[arg(long)]
    q: usize,
    #[arg(long)]
    k: u64,
    #[arg(long, value_enum, default_value = "envy")]
    measure: MeasureArg,
    #[arg(long, value_enum, default_value = "randomized")]
    mode: ModeArg,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    reps: Option<u64>,
    /// Wall-clock cap for the randomized modes, in milliseconds.
    #[arg(long)]
    budget_ms: Option<u64>,
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum ParetoDomain {
    /// Peaked, then dipped, then the oracle.
    Auto,
    Peaked,
    Dipped,
    Oracle,
}

#[derive(Args)]
struct ParetoArgs {
    #[arg(long)]
    instance: PathBuf,
    #[arg(long, value_enum, default_value = "auto")]
    domain: ParetoDomain,
}

#[derive(Args)]
struct WelfareArgs {
    #[arg(long)]
    instance: PathBuf,
    #[arg(long, value_enum)]
    objective: Objective,
}

#[derive(Clone, Copy, ValueEnum)]
enum Model {
    Uniform,
    Peaked,
    Dipped,
}

#[derive(Args)]
struct GenArgs {
    #[arg(long, value_enum)]
    model: Model,
    #[arg(long)]
    n: usize,
    #[arg(long)]
    m: usize,
    #[arg(long)]
    seed: u64,
    /// Defaults to stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum BenchCmd {
    /// Envy drop and welfare loss against the budget q.
    Qsweep {
        #[arg(long, default_value_t = 6)]
        n: usize,
        #[arg(long, default_value_t = 6)]
        m_min: usize,
        #[arg(long, default_value_t = 11)]
        m_max: usize,
        #[arg(long, default_value_t = 100)]
        instances: usize,
        #[arg(long, value_enum, default_value = "util")]
        initial: Objective,
        #[arg(long, value_enum, default_value = "envy")]
        measure: MeasureArg,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out_dir: PathBuf,
    },
    /// Welfare loss of the domain solvers.
    Domain {
        #[arg(long, default_value_t = 10)]
        n: usize,
        #[arg(long, default_value_t = 10)]
        m_min: usize,
        #[arg(long, default_value_t = 25)]
        m_max: usize,
        #[arg(long, default_value_t = 1000)]
        instances: usize,
        #[arg(long, value_enum)]
        domain: DomainArg,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out_dir: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum DomainArg {
    Peaked,
    Dipped,
}

#[derive(Args)]
struct CheckArgs {
    #[arg(long)]
    instance: PathBuf,
    #[arg(long, value_enum)]
    domain: DomainArg,
    /// Comma-separated houses, e.g. h3,h1,h2. Defaults to the instance axis.
    #[arg(long)]
    axis: Option<String>,
}

/// Absent or infeasible result.
struct NotFound(&'static str);

type Outcome = Result<Result<(), NotFound>, Error>;

fn emit(v: serde_json::Value) {
    println!("{v}");
}

fn axis_of(inst: &Instance, required: bool) -> Result<Vec<House>, Error> {
    match inst.axis() {
        Some(a) => Ok(a.to_vec()),
        None if required => Err(Error::Validation("instance has no axis".into())),
        None => Ok((0..inst.m()).collect()),
    }
}

fn solve(a: SolveArgs) -> Outcome {
    let inst = Instance::load(&a.instance)?;
    let measure = Measure::from(a.measure);
    let alloc = match a.method {
        Method::Oracle => min_measure_exhaustive(&inst, measure, &OracleConfig::default())?.1,
        m => {
            if measure != Measure::Envy {
                return Err(Error::Unsupported(format!(
                    "the domain solvers minimize envy, not {}",
                    measure.name()
                )));
            }
            let axis = axis_of(&inst, a.axis_required)?;
            if m == Method::Peaked {
                min_envy_single_peaked(&inst, &axis)?
            } else {
                min_envy_single_dipped_ties(&inst, &axis)?
            }
        }
    };
    alloc.validate_against(&inst)?;
    let v = measure_value(&inst, &alloc, measure);
    eprintln!("{}: {v}  {alloc}", measure.name());
    emit(json!({"allocation": alloc.to_json_value(), "measure": measure.name(), "value": v}));
    Ok(Ok(()))
}

fn refine_cmd(a: RefineArgs) -> Outcome {
    let inst = Instance::load(&a.instance)?;
    let base = Allocation::load(&a.alloc, &inst)?;
    let measure = Measure::from(a.measure);
    let budget = a.budget_ms.map(Duration::from_millis);
    let need_seed = || {
        a.seed
            .ok_or_else(|| Error::Validation("--seed is required for randomized modes".into()))
    };
    let mode = match a.mode {
        ModeArg::Randomized => Mode::Randomized {
            seed: need_seed()?,
            reps: a.reps,
            budget,
        },
        ModeArg::Sampled => Mode::Sampled {
            seed: need_seed()?,
            reps: a.reps,
            budget,
        },
        ModeArg::Exhaustive => Mode::Exhaustive {
            max_candidates: refine::DEFAULT_MAX_CANDIDATES,
        },
        ModeArg::Literal => Mode::ExhaustiveLiteral {
            max_elements: refine::DEFAULT_MAX_ELEMENTS,
        },
        ModeArg::Oracle => Mode::Oracle(OracleConfig::default()),
    };
    match refine::refine(&inst, &base, a.q, a.k, measure, &mode)? {
        Some(out) => {
            out.validate_against(&inst)?;
            let before = measure_value(&inst, &base, measure);
            let after = measure_value(&inst, &out, measure);
            eprintln!("{}: {before} -> {after}, moved {}", measure.name(), out.distance(&base));
            emit(json!({
                "allocation": out.to_json_value(),
                "measure": measure.name(),
                "value": after,
                "moved": out.moved_agents(&base).into_iter().map(agent_name).collect::<Vec<_>>(),
            }));
            Ok(Ok(()))
        }
        None => Ok(Err(NotFound("infeasible"))),
    }
}

fn pareto(a: ParetoArgs) -> Outcome {
    let inst = Instance::load(&a.instance)?;
    let axis = axis_of(&inst, false)?;
    let domain = match a.domain {
        ParetoDomain::Auto if validate_single_peaked(&inst, &axis)?.is_none() => ParetoDomain::Peaked,
        ParetoDomain::Auto if validate_single_dipped(&inst, &axis)?.is_none() => ParetoDomain::Dipped,
        ParetoDomain::Auto => ParetoDomain::Oracle,
        d => d,
    };
    let (name, found) = match domain {
        ParetoDomain::Peaked => ("peaked", min_envy_pareto_single_peaked(&inst, &axis)?),
        ParetoDomain::Dipped => ("dipped", min_envy_pareto_single_dipped(&inst, &axis)?),
        _ => ("oracle", min_envy_pareto_exhaustive(&inst, &OracleConfig::default())?.1),
    };
    eprintln!("decided by {name}");
    match found {
        Some(alloc) => {
            alloc.validate_against(&inst)?;
            eprintln!("envy {}  {alloc}", measure_value(&inst, &alloc, Measure::Envy));
            emit(json!({"allocation": alloc.to_json_value()}));
            Ok(Ok(()))
        }
        None => Ok(Err(NotFound("none exists"))),
    }
}

fn welfare_cmd(a: WelfareArgs) -> Outcome {
    let inst = Instance::load(&a.instance)?;
    let kind = WelfareKind::from(a.objective);
    let alloc = housealloc::welfare::maximize(&inst, kind)?;
    alloc.validate_against(&inst)?;
    let v = welfare(&inst, &alloc, kind)?;
    eprintln!("{}: {v}  {alloc}", kind.name());
    emit(json!({"allocation": alloc.to_json_value(), "objective": kind.name(), "value": v}));
    Ok(Ok(()))
}

fn gen(a: GenArgs) -> Outcome {
    let inst = match a.model {
        Model::Uniform => gen_uniform_cardinal(a.n, a.m, a.seed)?,
        Model::Peaked => gen_single_peaked(a.n, a.m, a.seed)?,
        Model::Dipped => gen_single_dipped(a.n, a.m, a.seed)?,
    };
    match a.out {
        Some(p) => std::fs::write(p, inst.to_json() + "\n")?,
        None => println!("{}", inst.to_json()),
    }
    Ok(Ok(()))
}

fn write_csv(dir: &PathBuf, name: &str, csv: &str) -> Result<(), Error> {
    std::fs::create_dir_all(dir)?;
    let path = dir.join(name);
    std::fs::write(&path, csv)?;
    eprintln!("wrote {}", path.display());
    Ok(())
}

fn bench_cmd(b: BenchCmd) -> Outcome {
    match b {
        BenchCmd::Qsweep {
            n,
            m_min,
            m_max,
            instances,
            initial,
            measure,
            seed,
            out_dir,
        } => {
            let kind = WelfareKind::from(initial);
            let measure = Measure::from(measure);
            let sw = bench::run_q_sweep(n, m_min..=m_max, instances, kind, measure, seed)?;
            let name = format!("qsweep_{}_{}.csv", kind.name(), measure.name());
            write_csv(&out_dir, &name, &bench::to_csv(&sw.rows))?;
        }
        BenchCmd::Domain {
            n,
            m_min,
            m_max,
            instances,
            domain,
            seed,
            out_dir,
        } => {
            let (d, name) = match domain {
                DomainArg::Peaked => (Domain::Peaked, "domain_peaked.csv"),
                DomainArg::Dipped => (Domain::Dipped, "domain_dipped.csv"),
            };
            let rows = bench::run_domain_sweep(n, m_min..=m_max, instances, d, seed)?;
            write_csv(&out_dir, name, &bench::to_csv(&rows))?;
        }
    }
    Ok(Ok(()))
}

fn check(a: CheckArgs) -> Outcome {
    let inst = Instance::load(&a.instance)?;
    let axis = match &a.axis {
        Some(s) => s
            .split(',')
            .map(|h| parse_house(h.trim(), inst.m()))
            .collect::<Result<Vec<_>, _>>()?,
        None => axis_of(&inst, true)?,
    };
    let (domain, witness) = match a.domain {
        DomainArg::Peaked => (
            "peaked",
            validate_single_peaked(&inst, &axis)?.map(|v| {
                json!({"agent": agent_name(v.agent), "far": house_name(v.far), "near": house_name(v.near), "reason": v.to_string()})
            }),
        ),
        DomainArg::Dipped => (
            "dipped",
            validate_single_dipped(&inst, &axis)?.map(|v| {
                json!({"agent": agent_name(v.agent), "far": house_name(v.far), "near": house_name(v.near), "reason": v.to_string()})
            }),
        ),
    };
    let valid = witness.is_none();
    eprintln!("single-{domain}: {}", if valid { "yes" } else { "no" });
    emit(json!({"domain": domain, "valid": valid, "witness": witness}));
    Ok(if valid { Ok(()) } else { Err(NotFound("")) })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let out = match cli.cmd {
        Cmd::Solve(a) => solve(a),
        Cmd::Refine(a) => refine_cmd(a),
        Cmd::Pareto(a) => pareto(a),
        Cmd::Welfare(a) => welfare_cmd(a),
        Cmd::Gen(a) => gen(a),
        Cmd::Bench(b) => bench_cmd(b),
        Cmd::Check(a) => check(a),
    };
    match out {
        Ok(Ok(())) => ExitCode::SUCCESS,
        Ok(Err(NotFound(msg))) => {
            // an empty message means the verdict is already on stdout
            if !msg.is_empty() {
                println!("{}", json!(msg));
                eprintln!("{msg}");
            }
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
