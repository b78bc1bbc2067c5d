//! Command-line front end. `run` returns the process exit code.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_bigint::BigUint;
use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Number, Value};

use crate::domain::generators::{
    gen_nosketch_domain, gen_payment_hardness_instance, gen_random_k_minded, gen_random_single_crossing,
    gen_sat_twoplayer_domains, gen_separation_domains,
};
use crate::domain::instance_file::{
    DomainSpec, InstanceFile, NosketchParams, PlayerSpec, RandomScParams, SeparationParams, VarsParams,
};
use crate::domain::{AuctionInstance, CnfFormula, Domain, Role, Witness};
use crate::error::{Error, Result};
use crate::mechanism::{
    sample_payment_estimator, telescoping_payments, threshold_payments, Mechanism, MechanismKind,
};
use crate::rational::{self, Rational};
use crate::verify::suites::{run_suite, SuiteOptions};
use crate::verify::{brute_force_opt_capped, DEFAULT_ALLOCATION_CAP, DEFAULT_PROFILE_CAP};

pub const EXIT_OK: i32 = 0;
pub const EXIT_PROPERTY: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_CAPACITY: i32 = 3;

/// Values written explicitly by `gen` before falling back to a generator
/// reference.
pub const DEFAULT_CAP_VALUES: u64 = 1_000_000;

#[derive(Debug, Parser)]
#[command(name = "scauction", version, about = "Truthful multi-unit auctions for single-crossing bidders")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Write an instance file from a named generator.
    Gen(GenArgs),
    /// Run a mechanism on an instance.
    Solve(SolveArgs),
    /// Compute payments for an instance.
    Pay(PayArgs),
    /// Run a verification suite.
    Verify(VerifyArgs),
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum GenName {
    #[value(name = "random_sc")]
    RandomSc,
    Separation,
    Sat2p,
    #[value(name = "payment_hardness")]
    PaymentHardness,
    Nosketch,
}

#[derive(Debug, Args)]
struct GenArgs {
    name: GenName,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Number of players (random_sc and nosketch).
    #[arg(long)]
    players: Option<usize>,
    #[arg(long, default_value_t = 4)]
    size: u64,
    #[arg(long)]
    m: Option<u64>,
    #[arg(long, default_value_t = 10)]
    max_marginal: u64,
    /// Makes random_sc domains k-minded with this many steps.
    #[arg(long)]
    steps: Option<u64>,
    #[arg(long, default_value_t = 3)]
    bits: u32,
    #[arg(long)]
    vars: Option<u32>,
    /// Clauses like "1 -2 3; -1 2 2".
    #[arg(long)]
    formula: Option<String>,
    /// Alice's scalar for payment_hardness (defaults to m).
    #[arg(long)]
    theta: Option<u64>,
    /// Comma-separated reports, overriding the generator's choice.
    #[arg(long, value_delimiter = ',')]
    reports: Option<Vec<u64>>,
    #[arg(long, default_value_t = DEFAULT_CAP_VALUES)]
    cap_values: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum MechanismArg {
    Kminded,
    General,
    Singleminded,
    Vcg,
}

impl From<MechanismArg> for MechanismKind {
    fn from(m: MechanismArg) -> Self {
        match m {
            MechanismArg::Kminded => MechanismKind::KMinded,
            MechanismArg::General => MechanismKind::General,
            MechanismArg::Singleminded => MechanismKind::SingleMinded,
            MechanismArg::Vcg => MechanismKind::Vcg,
        }
    }
}

#[derive(Debug, Args)]
struct SolveArgs {
    instance: PathBuf,
    #[arg(long, default_value = "1/4")]
    epsilon: String,
    #[arg(long, value_enum, default_value_t = MechanismArg::General)]
    mechanism: MechanismArg,
    /// Allocations the brute-force oracle may enumerate for `ratio_vs_opt`.
    #[arg(long, default_value_t = DEFAULT_ALLOCATION_CAP)]
    cap_allocations: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Method {
    Threshold,
    Exact,
    Sample,
}

#[derive(Debug, Args)]
struct PayArgs {
    instance: PathBuf,
    #[arg(long, default_value = "1/4")]
    epsilon: String,
    #[arg(long, value_enum, default_value_t = MechanismArg::General)]
    mechanism: MechanismArg,
    #[arg(long, value_enum, default_value_t = Method::Threshold)]
    method: Method,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct VerifyArgs {
    #[arg(value_parser = clap::builder::PossibleValuesParser::new(crate::verify::suites::SUITES))]
    suite: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value = "1/4")]
    epsilon: String,
    #[arg(long, default_value_t = DEFAULT_PROFILE_CAP)]
    cap_profiles: u64,
    #[arg(long, default_value_t = 3)]
    vars: u32,
    #[arg(long, default_value_t = 20)]
    trials: usize,
    #[arg(long, default_value_t = 3)]
    bits: u32,
    #[arg(long, default_value_t = 16)]
    m: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Exit code for a library error.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Capacity(_) => EXIT_CAPACITY,
        Error::Integrity(_) | Error::Degenerate(_) => EXIT_PROPERTY,
        Error::Range(_) | Error::Parameter(_) | Error::InvalidDomain(_) | Error::Parse(_) => EXIT_USAGE,
    }
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    let outcome = match cli.command {
        Command::Gen(a) => cmd_gen(&a),
        Command::Solve(a) => cmd_solve(&a),
        Command::Pay(a) => cmd_pay(&a),
        Command::Verify(a) => cmd_verify(&a),
    };
    match outcome {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

fn emit(text: &str, out: Option<&Path>) -> Result<()> {
    match out {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| Error::Parameter(format!("cannot write {}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn emit_json(value: &impl Serialize, out: Option<&Path>) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).expect("output serializes");
    text.push('\n');
    emit(&text, out)
}

fn load(path: &Path) -> Result<AuctionInstance> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Parse(format!("cannot read {}: {e}", path.display())))?;
    InstanceFile::from_json(&text)?.to_instance()
}

fn big_number(x: &BigUint) -> Number {
    x.to_string().parse().expect("integers are valid JSON numbers")
}

/// Explicit when small enough, otherwise a generator reference.
fn domain_spec<P: Serialize>(domain: &Domain, cap: u64, name: &str, params: &P) -> Result<DomainSpec> {
    match DomainSpec::explicit(domain, cap) {
        Err(Error::Capacity(_)) => Ok(DomainSpec::generator(name, params)),
        other => other,
    }
}

fn pick_reports(given: &Option<Vec<u64>>, defaults: Vec<u64>) -> Result<Vec<u64>> {
    match given {
        None => Ok(defaults),
        Some(r) if r.len() == defaults.len() => Ok(r.clone()),
        Some(r) => Err(Error::Parameter(format!(
            "{} reports given for {} players",
            r.len(),
            defaults.len()
        ))),
    }
}

fn cmd_gen(a: &GenArgs) -> Result<i32> {
    let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
    let (m, players): (u64, Vec<(Domain, DomainSpec)>) = match a.name {
        GenName::RandomSc => {
            let n = a.players.unwrap_or(2);
            let m = a.m.unwrap_or(8);
            let mut players = Vec::with_capacity(n);
            for _ in 0..n {
                let p = RandomScParams {
                    seed: rng.gen(),
                    size: a.size,
                    m,
                    max_marginal: a.max_marginal,
                    steps: a.steps,
                };
                let d = match p.steps {
                    Some(k) => gen_random_k_minded(p.seed, p.size, m, k, p.max_marginal)?.0,
                    None => gen_random_single_crossing(p.seed, p.size, m, p.max_marginal)?,
                };
                let spec = domain_spec(&d, a.cap_values, "random_sc", &p)?;
                players.push((d, spec));
            }
            (m, players)
        }
        GenName::Separation => {
            let (da, db) = gen_separation_domains(a.bits, Witness::Modular)?;
            let m = da.m();
            let sa = domain_spec(&da, a.cap_values, "separation", &SeparationParams { bits: a.bits, role: Role::Alice })?;
            let sb = domain_spec(&db, a.cap_values, "separation", &SeparationParams { bits: a.bits, role: Role::Bob })?;
            (m, vec![(da, sa), (db, sb)])
        }
        GenName::Sat2p => {
            let vars = a.vars.unwrap_or(2);
            let (da, db) = gen_sat_twoplayer_domains(vars)?;
            let m = da.m();
            let sa = domain_spec(&da, a.cap_values, "sat2p", &VarsParams { vars, role: Role::Alice })?;
            let sb = domain_spec(&db, a.cap_values, "sat2p", &VarsParams { vars, role: Role::Bob })?;
            (m, vec![(da, sa), (db, sb)])
        }
        GenName::PaymentHardness => return gen_payment_hardness(a, &mut rng),
        GenName::Nosketch => {
            let m = a.m.unwrap_or(16);
            let d = gen_nosketch_domain(m)?;
            let spec = domain_spec(&d, a.cap_values, "nosketch", &NosketchParams { m })?;
            let n = a.players.unwrap_or(1);
            (m, vec![(d, spec); n])
        }
    };
    let defaults = match (&a.name, &a.formula) {
        (GenName::Sat2p, Some(text)) => {
            let phi = CnfFormula::parse(a.vars.unwrap_or(2), text)?;
            let x = phi.ordinal_u64()?;
            vec![x, x]
        }
        _ => players.iter().map(|(d, _)| rng.gen_range(0..d.size())).collect(),
    };
    let reports = pick_reports(&a.reports, defaults)?;
    let file = InstanceFile {
        m,
        players: players
            .into_iter()
            .zip(reports)
            .map(|((_, domain), report)| PlayerSpec { domain, report })
            .collect(),
    };
    // validates reports against domain sizes
    file.to_instance()?;
    emit(&file.to_json(), a.out.as_deref())?;
    Ok(EXIT_OK)
}

fn gen_payment_hardness(a: &GenArgs, rng: &mut ChaCha8Rng) -> Result<i32> {
    let vars = a.vars.unwrap_or(3);
    let phi = match &a.formula {
        Some(text) => CnfFormula::parse(vars, text)?,
        None => CnfFormula::random(vars, rng)?,
    };
    let hard = gen_payment_hardness_instance(vars, phi)?;
    let inst = hard.instance(a.theta.unwrap_or(hard.m))?;
    let reports = pick_reports(&a.reports, inst.reports().to_vec())?;
    let specs = [
        domain_spec(&hard.alice_domain()?, a.cap_values, "payment_hardness", &VarsParams { vars, role: Role::Alice })?,
        domain_spec(&hard.bob_domain()?, a.cap_values, "payment_hardness", &VarsParams { vars, role: Role::Bob })?,
    ];
    let file = InstanceFile {
        m: hard.m,
        players: specs
            .into_iter()
            .zip(reports)
            .map(|(domain, report)| PlayerSpec { domain, report })
            .collect(),
    };
    file.to_instance()?;
    emit(&file.to_json(), a.out.as_deref())?;
    Ok(EXIT_OK)
}

fn prepare(path: &Path, epsilon: &str, mechanism: MechanismArg) -> Result<(AuctionInstance, Mechanism)> {
    let eps = rational::parse_epsilon(epsilon)?;
    let inst = load(path)?;
    let mech = Mechanism::new(mechanism.into(), inst.domains(), &eps)?;
    Ok((inst, mech))
}

fn cmd_solve(a: &SolveArgs) -> Result<i32> {
    let (inst, mech) = prepare(&a.instance, &a.epsilon, a.mechanism)?;
    let result = mech.run(&inst)?;
    let ratio = match brute_force_opt_capped(&inst, a.cap_allocations) {
        Ok((opt, _)) if opt.is_zero() => Some(Rational::from_integer(1.into())),
        Ok((opt, _)) => Some(Rational::new(result.welfare.clone().into(), opt.into())),
        Err(Error::Capacity(_)) => None,
        Err(e) => return Err(e),
    };
    let delta = result.delta.map(|d| {
        json!({"base": d.base, "exp": d.exp, "value": rational::format(&d.value())})
    });
    let out = json!({
        "mechanism": mech.kind().name(),
        "epsilon": rational::format(&rational::parse_epsilon(&a.epsilon)?),
        "allocation": result.allocation,
        "welfare": big_number(&result.welfare),
        "delta": delta,
        "ratio_vs_opt": ratio.map(|r| rational::format(&r)),
    });
    emit_json(&out, a.out.as_deref())?;
    Ok(EXIT_OK)
}

fn cmd_pay(a: &PayArgs) -> Result<i32> {
    let (inst, mech) = prepare(&a.instance, &a.epsilon, a.mechanism)?;
    let mut out = serde_json::Map::new();
    let payments = match a.method {
        Method::Threshold => threshold_payments(&mech, &inst)?,
        Method::Exact => telescoping_payments(&mech, &inst)?,
        Method::Sample => {
            let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
            let mut draws = Vec::with_capacity(inst.n());
            let mut pays = Vec::with_capacity(inst.n());
            for i in 0..inst.n() {
                let t = inst.report(i);
                let d = if t == 0 { 0 } else { rng.gen_range(1..=t) };
                draws.push(d);
                pays.push(sample_payment_estimator(&mech, &inst, i, d)?);
            }
            out.insert("draws".into(), json!(draws));
            pays
        }
    };
    let method = match a.method {
        Method::Threshold => "threshold",
        Method::Exact => "exact",
        Method::Sample => "sample",
    };
    out.insert("mechanism".into(), json!(mech.kind().name()));
    out.insert("method".into(), json!(method));
    out.insert(
        "payments".into(),
        Value::Array(payments.iter().map(|p| json!(rational::format(p))).collect()),
    );
    emit_json(&out, a.out.as_deref())?;
    Ok(EXIT_OK)
}

fn cmd_verify(a: &VerifyArgs) -> Result<i32> {
    let opts = SuiteOptions {
        seed: a.seed,
        epsilon: rational::parse_epsilon(&a.epsilon)?,
        cap_profiles: a.cap_profiles,
        vars: a.vars,
        trials: a.trials,
        bits: a.bits,
        m: a.m,
    };
    let report = run_suite(&a.suite, &opts)?;
    emit_json(&report, a.out.as_deref())?;
    Ok(if report.passed() { EXIT_OK } else { EXIT_PROPERTY })
}
