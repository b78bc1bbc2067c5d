//! Named verification suites run by the command-line tool.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};

use super::corpus::{general_corpus, k_minded_corpus, single_minded_corpus, Shape};
use super::{
    check_no_small_sketch, check_single_crossing, check_sketch_quality, threshold_payment_fn, ProfileTable,
};
use crate::domain::generators::{
    gen_nosketch_domain, gen_random_single_crossing, gen_sat_twoplayer_domains, gen_separation_domains,
};
use crate::domain::{AuctionInstance, CnfFormula, Domain, Witness};
use crate::error::{Error, Result};
use crate::mechanism::{
    payment_hardness_check, separation_greedy, separation_score, vcg_exact, Mechanism, MechanismKind,
};
use crate::rational::{self, Rational};
use crate::rounding::build_sketch;

pub const SUITES: [&str; 7] = ["sc", "mono", "ic", "sketch", "nosketch", "payhard", "gap"];

#[derive(Clone, Debug)]
pub struct SuiteOptions {
    pub seed: u64,
    pub epsilon: Rational,
    pub cap_profiles: u64,
    pub vars: u32,
    pub trials: usize,
    pub bits: u32,
    pub m: u64,
}

impl Default for SuiteOptions {
    fn default() -> Self {
        SuiteOptions {
            seed: 0,
            epsilon: Rational::new(1.into(), 4.into()),
            cap_profiles: super::DEFAULT_PROFILE_CAP,
            vars: 3,
            trials: 20,
            bits: 3,
            m: 16,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SuiteReport {
    pub suite: String,
    pub status: &'static str,
    pub witnesses: Vec<Value>,
}

impl SuiteReport {
    fn new(suite: &str, pass: bool, witnesses: Vec<Value>) -> Self {
        SuiteReport {
            suite: suite.into(),
            status: if pass { "pass" } else { "fail" },
            witnesses,
        }
    }

    pub fn passed(&self) -> bool {
        self.status == "pass"
    }
}

pub fn run_suite(name: &str, opts: &SuiteOptions) -> Result<SuiteReport> {
    match name {
        "sc" => suite_sc(opts),
        "mono" => suite_mechanisms(opts, false),
        "ic" => suite_mechanisms(opts, true),
        "sketch" => suite_sketch(opts),
        "nosketch" => suite_nosketch(opts),
        "payhard" => suite_payhard(opts),
        "gap" => suite_gap(opts),
        other => Err(Error::Parameter(format!(
            "unknown suite {other:?}; expected one of {}",
            SUITES.join(", ")
        ))),
    }
}

fn suite_sc(opts: &SuiteOptions) -> Result<SuiteReport> {
    let mut named: Vec<(String, Domain)> = Vec::new();
    for i in 0..opts.trials as u64 {
        let seed = opts.seed.wrapping_add(i);
        named.push((format!("random_sc seed {seed}"), gen_random_single_crossing(seed, 8, 16, 20)?));
    }
    let (a, b) = gen_separation_domains(opts.bits, Witness::Modular)?;
    named.push(("separation alice".into(), a));
    named.push(("separation bob".into(), b));
    let (a, b) = gen_sat_twoplayer_domains(opts.vars.min(2))?;
    named.push(("sat2p alice".into(), a));
    named.push(("sat2p bob".into(), b));
    named.push((format!("nosketch m={}", opts.m), gen_nosketch_domain(opts.m)?));
    let mut witnesses = Vec::new();
    for (name, d) in &named {
        if let Some(v) = check_single_crossing(d)? {
            witnesses.push(json!({"domain": name, "violation": v.to_json()}));
        }
    }
    Ok(SuiteReport::new("sc", witnesses.is_empty(), witnesses))
}

/// Monotonicity or incentive compatibility of the three approximation
/// schemes (and exact VCG for incentives) over a seeded corpus.
fn suite_mechanisms(opts: &SuiteOptions, incentives: bool) -> Result<SuiteReport> {
    let shape = Shape {
        max_items: 16,
        ..Shape::default()
    };
    let eps = &opts.epsilon;
    let mut runs: Vec<(MechanismKind, AuctionInstance, Mechanism)> = Vec::new();
    for e in k_minded_corpus(opts.seed, opts.trials, &shape)? {
        let mech = Mechanism::KMinded {
            epsilon: eps.clone(),
            step_sets: e.step_sets.clone(),
        };
        runs.push((MechanismKind::KMinded, e.instance, mech));
    }
    for inst in general_corpus(opts.seed, opts.trials, &shape, 1000)? {
        let mech = Mechanism::general(inst.domains(), eps)?;
        runs.push((MechanismKind::General, inst.clone(), mech));
        if incentives {
            runs.push((MechanismKind::Vcg, inst.clone(), Mechanism::Vcg { cap: crate::mechanism::VCG_DEFAULT_CAP }));
        }
    }
    for inst in single_minded_corpus(opts.seed, opts.trials, &shape)? {
        runs.push((MechanismKind::SingleMinded, inst, Mechanism::SingleMinded { epsilon: eps.clone() }));
    }
    let mut witnesses = Vec::new();
    for (idx, (kind, inst, mech)) in runs.iter().enumerate() {
        let table = ProfileTable::build(mech, inst.domains(), inst.m(), opts.cap_profiles)?;
        let found = if incentives {
            table.incentive_violation(&threshold_payment_fn)?
        } else {
            table.monotone_violation()
        };
        if let Some(v) = found {
            witnesses.push(json!({"mechanism": kind.name(), "instance": idx, "violation": v.to_json()}));
        }
    }
    let name = if incentives { "ic" } else { "mono" };
    Ok(SuiteReport::new(name, witnesses.is_empty(), witnesses))
}

fn suite_sketch(opts: &SuiteOptions) -> Result<SuiteReport> {
    let mut witnesses = Vec::new();
    for i in 0..opts.trials as u64 {
        let seed = opts.seed.wrapping_add(i);
        let m = 1 + seed % 64;
        let d = gen_random_single_crossing(seed, 8, m, 65535 / m)?;
        let k = build_sketch(&d, &opts.epsilon)?;
        if let Some(v) = check_sketch_quality(&d, &k, &opts.epsilon)? {
            witnesses.push(json!({"seed": seed, "violation": v.to_json()}));
        }
    }
    Ok(SuiteReport::new("sketch", witnesses.is_empty(), witnesses))
}

fn suite_nosketch(opts: &SuiteOptions) -> Result<SuiteReport> {
    let d = gen_nosketch_domain(opts.m)?;
    let mut witnesses = Vec::new();
    if let Some(v) = check_single_crossing(&d)? {
        witnesses.push(v.to_json());
    }
    if let Some(v) = check_no_small_sketch(&d, 2)? {
        witnesses.push(v.to_json());
    }
    Ok(SuiteReport::new("nosketch", witnesses.is_empty(), witnesses))
}

fn suite_payhard(opts: &SuiteOptions) -> Result<SuiteReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut witnesses = Vec::new();
    for _ in 0..opts.trials {
        let phi = CnfFormula::random(opts.vars, &mut rng)?;
        let r = payment_hardness_check(opts.vars, &phi)?;
        if !r.holds() {
            witnesses.push(json!({
                "formula": phi.to_string(),
                "lhs": rational::format(&r.lhs),
                "rhs": rational::format(&r.rhs),
                "satisfying": r.satisfying,
            }));
        }
    }
    Ok(SuiteReport::new("payhard", witnesses.is_empty(), witnesses))
}

/// The greedy rule scores at least 1 on every report pair and is not monotone
/// up to tie-breaking. VCG's scores are reported alongside.
fn suite_gap(opts: &SuiteOptions) -> Result<SuiteReport> {
    let witness = Witness::Modular;
    let (da, db) = gen_separation_domains(opts.bits, witness.clone())?;
    let m = da.m();
    let size = da.size();
    let mut greedy_min = 2u8;
    let mut vcg_min = 2u8;
    let mut vcg_misses = Vec::new();
    for a in 0..size {
        for b in 0..size {
            let inst = AuctionInstance::new(m, vec![da.clone(), db.clone()], vec![a, b])?;
            greedy_min = greedy_min.min(separation_score(&inst, &separation_greedy(&inst)?, &witness)?);
            let v = vcg_exact(&inst)?.allocation;
            let score = separation_score(&inst, &v, &witness)?;
            vcg_min = vcg_min.min(score);
            if score < 2 && vcg_misses.len() < 5 {
                vcg_misses.push(json!({"reports": [a, b], "allocation": v, "score": score}));
            }
        }
    }
    let table = ProfileTable::build(&separation_greedy, &[da, db], m, opts.cap_profiles)?;
    let violation = table.tiebreak_violation()?;
    let mut witnesses = vec![json!({"greedy_min_score": greedy_min, "vcg_min_score": vcg_min})];
    if let Some(v) = &violation {
        witnesses.push(v.to_json());
    }
    witnesses.extend(vcg_misses);
    let pass = greedy_min >= 1 && violation.is_some();
    Ok(SuiteReport::new("gap", pass, witnesses))
}
