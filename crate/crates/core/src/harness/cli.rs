//! Command-line front end. Exit codes: 0 success, 1 property violated or no
//! equilibrium found, 2 usage, parse or input error.

use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use super::experiment::{replay_report, run_experiment, ExperimentConfig, Report};
use super::format::{format_rational, load_instance, parse_rational, serialize_instance};
use super::generate::{generate_instance, InstanceSpec, OwaScheme, UtilityScheme};
use crate::equilibrium::{
    check_sigma_condition, classify_lazy_dichotomy, construct_containment_pne, construct_sincere_pne,
    enumerate_equilibria, enumerate_lazy_pruned, k1_characterization, lazy_score_facts, verify_equilibrium,
    welfare, ContainmentOutcome, Dichotomy, EquilibriumCertificate, EquilibriumKind, EquilibriumSet, Verdict,
};
use crate::error::{Error, Result};
use crate::model::{ideal_union, ElectionInstance, Rational};
use crate::rules::{
    check_monotonic_robustness, check_relative_rank_monotonicity, elect, exhaustive_monotonic_robustness,
    exhaustive_relative_rank_monotonicity, random_weights, BallotProfile, MonotonicityCheck, RuleSpec,
    MAX_EXHAUSTIVE_BITS,
};
use crate::strategy::{
    brute_force_best_responses, constraining_witness, minimal_best_response, sincere_best_response,
    LengthRestriction, WitnessMode,
};

const CLI_SCHEMA: &str = "approval-nash-cli/1";

#[derive(Parser, Debug)]
#[command(name = "approval-nash", version, about = "Strategic multi-winner approval voting toolkit")]
struct Cli {
    /// Instance file.
    #[arg(long, global = true)]
    instance: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = RuleArg::Av)]
    rule: RuleArg,
    /// Candidate weights for `--rule weighted`, in candidate order (`1,3/2,2`).
    /// Drawn from `--seed` when omitted.
    #[arg(long, global = true)]
    weights: Option<String>,
    /// Ballot-length limit R.
    #[arg(long, global = true)]
    restriction: Option<usize>,
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[arg(long, global = true, value_enum, default_value_t = OutputFormat::Text)]
    format: OutputFormat,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum RuleArg {
    Av,
    Weighted,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum OutputFormat {
    Text,
    Machine,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum KindArg {
    Plain,
    Lazy,
    Sincere,
}

impl From<KindArg> for EquilibriumKind {
    fn from(k: KindArg) -> Self {
        match k {
            KindArg::Plain => EquilibriumKind::Plain,
            KindArg::Lazy => EquilibriumKind::Lazy,
            KindArg::Sincere => EquilibriumKind::Sincere,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum ConstructionArg {
    Containment,
    Sincere,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum PropertyArg {
    Rrm,
    Robust,
    LazyScores,
    Dichotomy,
    Sigma,
    K1,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum UtilityArg {
    BordaLike,
    RandomRational,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum OwaArg {
    Best,
    Worst,
    Additive,
    RandomFullRank,
    RandomAny,
}

#[derive(Args, Debug)]
struct VoterArgs {
    #[arg(long)]
    voter: usize,
    /// Everyone's ballots as `a,b;;c` (the voter's own entry is ignored).
    /// Defaults to all voters abstaining.
    #[arg(long)]
    profile: Option<String>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate a random instance.
    Gen {
        #[arg(long)]
        m: usize,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        k: usize,
        #[arg(long, value_enum, default_value_t = UtilityArg::BordaLike)]
        utility: UtilityArg,
        #[arg(long, value_enum, default_value_t = OwaArg::Additive)]
        owa: OwaArg,
        #[arg(long)]
        random_priority: bool,
        /// Write to a file instead of standard output.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Elect the winning committee for a ballot profile.
    Elect {
        #[arg(long)]
        profile: String,
    },
    /// All best responses of one voter.
    BestResponse(VoterArgs),
    /// Minimal best response of one voter.
    Mbr(VoterArgs),
    /// Best sincere (prefix) ballot of one voter.
    SincereBr(VoterArgs),
    /// Search for profiles where `--restriction` excludes every best response.
    Constraining {
        #[arg(long)]
        voter: usize,
        #[arg(long, default_value_t = 1 << 20)]
        budget: u64,
        /// Keep the instance's priority order.
        #[arg(long)]
        fixed_priority: bool,
    },
    /// Enumerate pure Nash equilibria.
    FindPne {
        #[arg(long, value_enum)]
        kind: KindArg,
        /// Use the pruned lazy enumerator (AV only).
        #[arg(long)]
        pruned: bool,
    },
    /// Build an equilibrium constructively.
    ConstructPne {
        #[arg(long, value_enum)]
        kind: ConstructionArg,
        /// Sincere construction: abstainers approve every candidate instead.
        #[arg(long)]
        non_empty: bool,
        /// Containment construction: committee to test, e.g. `a,b`.
        #[arg(long)]
        target: Option<String>,
    },
    /// Check a structural property, or replay a machine report.
    Check {
        #[arg(long, value_enum, required_unless_present = "report")]
        property: Option<PropertyArg>,
        /// Check a single lazy profile instead of every lazy equilibrium.
        #[arg(long)]
        profile: Option<String>,
        /// Random trials for the monotonicity checks.
        #[arg(long, default_value_t = 1000)]
        trials: u64,
        /// Replay every certificate and witness in a machine report.
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Run an experiment described by a TOML config.
    Experiment {
        #[arg(long)]
        config: PathBuf,
    },
}

/// Outcome of a command: exit status plus text and machine renderings.
struct Outcome {
    code: i32,
    text: String,
    machine: Value,
}

impl Outcome {
    fn ok(text: String, machine: Value) -> Self {
        Outcome { code: 0, text, machine }
    }

    fn status(pass: bool, text: String, machine: Value) -> Self {
        Outcome {
            code: if pass { 0 } else { 1 },
            text,
            machine,
        }
    }
}

/// Parses `argv` (including the program name), runs the command and writes
/// its output. Returns the exit code.
pub fn run<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            let rendered = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{rendered}");
                    0
                }
                _ => {
                    let _ = write!(err, "{rendered}");
                    2
                }
            };
        }
    };
    let format = cli.format;
    match execute(&cli) {
        Ok(o) => {
            let _ = match format {
                OutputFormat::Text => write!(out, "{}", o.text),
                OutputFormat::Machine => {
                    let mut doc = o.machine;
                    // reports keep their own schema so they can be replayed as-is
                    if let Value::Object(map) = &mut doc {
                        if !map.contains_key("schema") {
                            map.insert("schema".into(), json!(CLI_SCHEMA));
                            map.insert("exit_code".into(), json!(o.code));
                        }
                    }
                    writeln!(out, "{}", serde_json::to_string_pretty(&doc).expect("json"))
                }
            };
            o.code
        }
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            match e {
                Error::Invariant(_) => 1,
                _ => 2,
            }
        }
    }
}

/// Entry point for the binary.
pub fn cli(argv: Vec<String>) -> i32 {
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run(argv, &mut stdout.lock(), &mut stderr.lock())
}

fn need_instance(cli: &Cli) -> Result<ElectionInstance> {
    let path = cli
        .instance
        .as_ref()
        .ok_or_else(|| Error::Config("this command needs --instance PATH".into()))?;
    load_instance(path)
}

fn build_rule(cli: &Cli, instance: &ElectionInstance) -> Result<RuleSpec> {
    match cli.rule {
        RuleArg::Av => {
            if cli.weights.is_some() {
                return Err(Error::Config("--weights only applies to --rule weighted".into()));
            }
            Ok(RuleSpec::standard_av(instance))
        }
        RuleArg::Weighted => {
            let weights = match &cli.weights {
                Some(text) => text
                    .split(',')
                    .map(|w| parse_rational(w.trim()).map_err(Error::Config))
                    .collect::<Result<Vec<_>>>()?,
                None => random_weights(instance.m(), &mut ChaCha8Rng::seed_from_u64(cli.seed)),
            };
            RuleSpec::candidate_weighted(instance, weights)
        }
    }
}

fn restriction(cli: &Cli) -> LengthRestriction {
    cli.restriction.map_or(LengthRestriction::Unrestricted, LengthRestriction::AtMost)
}

fn profile_or_empty(instance: &ElectionInstance, text: Option<&str>) -> Result<BallotProfile> {
    match text {
        Some(t) => BallotProfile::parse(instance, t),
        None => Ok(BallotProfile::empty(instance.n())),
    }
}

fn rat(r: &Rational) -> String {
    format_rational(r)
}

fn sets(instance: &ElectionInstance, xs: &[crate::model::CandidateSet]) -> Vec<String> {
    xs.iter().map(|&b| instance.format_set(b)).collect()
}

fn certificate_json(instance: &ElectionInstance, c: &EquilibriumCertificate) -> Value {
    json!({
        "kind": c.kind.as_str(),
        "committee": instance.format_set(c.committee),
        "profile": c.profile.format(instance),
        "evidence": c.evidence.iter().map(|e| json!({
            "voter": e.voter,
            "utility": rat(&e.utility),
            "achievable_utility": rat(&e.achievable_utility),
            "ballot_size": e.ballot_size,
            "mbr_size": e.mbr_size,
            "sincere": e.sincere,
        })).collect::<Vec<_>>(),
    })
}

fn execute(cli: &Cli) -> Result<Outcome> {
    match &cli.command {
        Command::Gen {
            m,
            n,
            k,
            utility,
            owa,
            random_priority,
            output,
        } => {
            let spec = InstanceSpec {
                m: *m,
                n: *n,
                k: *k,
                utility: match utility {
                    UtilityArg::BordaLike => UtilityScheme::BordaLike,
                    UtilityArg::RandomRational => UtilityScheme::RandomRational,
                },
                owa: match owa {
                    OwaArg::Best => OwaScheme::Best,
                    OwaArg::Worst => OwaScheme::Worst,
                    OwaArg::Additive => OwaScheme::Additive,
                    OwaArg::RandomFullRank => OwaScheme::RandomFullRank,
                    OwaArg::RandomAny => OwaScheme::RandomAny,
                },
                random_priority: *random_priority,
            };
            let instance = generate_instance(&spec, cli.seed)?;
            let text = serialize_instance(&instance);
            if let Some(path) = output {
                std::fs::write(path, &text)?;
                Ok(Outcome::ok(
                    format!("wrote {}\n", path.display()),
                    json!({"command": "gen", "path": path.display().to_string()}),
                ))
            } else {
                Ok(Outcome::ok(text.clone(), json!({"command": "gen", "instance": text})))
            }
        }
        Command::Elect { profile } => {
            let instance = need_instance(cli)?;
            let rule = build_rule(cli, &instance)?;
            let profile = BallotProfile::parse(&instance, profile)?;
            let w = elect(&rule, &instance, &profile)?;
            let scores = crate::rules::approval_scores(&rule, &instance, &profile)?;
            let score_list: Vec<Value> = instance
                .priority()
                .ranking()
                .iter()
                .map(|&c| json!({"candidate": instance.name(c), "approvals": scores.counts[c.0], "score": rat(&scores.scores[c.0])}))
                .collect();
            Ok(Outcome::ok(
                format!("committee {}\n", instance.format_set(w)),
                json!({"command": "elect", "committee": instance.format_set(w), "scores": score_list}),
            ))
        }
        Command::BestResponse(args) => {
            let instance = need_instance(cli)?;
            let rule = build_rule(cli, &instance)?;
            let profile = profile_or_empty(&instance, args.profile.as_deref())?;
            let r = brute_force_best_responses(&instance, &rule, args.voter, &profile, restriction(cli))?;
            let mut text = format!(
                "voter {} best utility {}\nbest responses: {}\nMBR size {}: {}\n",
                r.voter,
                rat(&r.achievable_utility),
                sets(&instance, &r.br_ballots).join(" "),
                r.mbr_size,
                sets(&instance, &r.mbr_ballots).join(" ")
            );
            let restricted = r.restricted.as_ref().map(|x| {
                text.push_str(&format!(
                    "restricted to R={}: utility {}, best responses {}\n",
                    x.limit,
                    rat(&x.utility),
                    sets(&instance, &x.br_ballots).join(" ")
                ));
                json!({
                    "limit": x.limit,
                    "utility": rat(&x.utility),
                    "br_ballots": sets(&instance, &x.br_ballots),
                    "mbr_size": x.mbr_size,
                    "mbr_ballots": sets(&instance, &x.mbr_ballots),
                })
            });
            Ok(Outcome::ok(
                text,
                json!({
                    "command": "best-response",
                    "voter": r.voter,
                    "achievable_utility": rat(&r.achievable_utility),
                    "br_ballots": sets(&instance, &r.br_ballots),
                    "mbr_size": r.mbr_size,
                    "mbr_ballots": sets(&instance, &r.mbr_ballots),
                    "restricted": restricted,
                }),
            ))
        }
        Command::Mbr(args) => {
            let instance = need_instance(cli)?;
            let rule = build_rule(cli, &instance)?;
            let profile = profile_or_empty(&instance, args.profile.as_deref())?;
            let (size, ballot) = minimal_best_response(&instance, &rule, args.voter, &profile, restriction(cli))?;
            let j = instance.voter(args.voter)?.j_star();
            Ok(Outcome::ok(
                format!("MBR {} (size {size}, j* = {j})\n", instance.format_set(ballot)),
                json!({"command": "mbr", "voter": args.voter, "ballot": instance.format_set(ballot), "size": size, "j_star": j}),
            ))
        }
        Command::SincereBr(args) => {
            let instance = need_instance(cli)?;
            let rule = build_rule(cli, &instance)?;
            let profile = profile_or_empty(&instance, args.profile.as_deref())?;
            let s = sincere_best_response(&instance, &rule, args.voter, &profile, restriction(cli))?;
            let mut text = format!("sincere best response {} utility {}\n", instance.format_set(s.ballot), rat(&s.utility));
            if !s.attains_unrestricted_optimum {
                text.push_str(&format!(
                    "restriction costs utility: unrestricted sincere optimum is {}\n",
                    rat(&s.unrestricted_utility)
                ));
            }
            Ok(Outcome::ok(
                text,
                json!({
                    "command": "sincere-br",
                    "voter": args.voter,
                    "ballot": instance.format_set(s.ballot),
                    "utility": rat(&s.utility),
                    "unrestricted_utility": rat(&s.unrestricted_utility),
                    "attains_unrestricted_optimum": s.attains_unrestricted_optimum,
                }),
            ))
        }
        Command::Constraining {
            voter,
            budget,
            fixed_priority,
        } => {
            let instance = need_instance(cli)?;
            let rule = build_rule(cli, &instance)?;
            let limit = cli
                .restriction
                .ok_or_else(|| Error::Config("constraining needs --restriction R".into()))?;
            let mode = if *fixed_priority {
                WitnessMode::FixedPriority
            } else {
                WitnessMode::SynthesizedPriority
            };
            let search = constraining_witness(&instance, &rule, *voter, limit, *budget, mode)?;
            match &search.witness {
                Some(w) => {
                    let prio: Vec<&str> = w.priority.iter().map(|&c| instance.name(c)).collect();
                    let others = w.others.format(&instance);
                    Ok(Outcome::ok(
                        format!(
                            "R={limit} is constraining for voter {voter}\npriority {}\nprofile {others}\nutility {} unrestricted, {} restricted, gap {}\n",
                            prio.join(" "),
                            rat(&w.unrestricted_utility),
                            rat(&w.restricted_utility),
                            rat(&w.gap)
                        ),
                        json!({
                            "command": "constraining",
                            "voter": voter,
                            "restriction": limit,
                            "found": true,
                            "canonical": w.canonical,
                            "priority": prio,
                            "profile": others,
                            "unrestricted_utility": rat(&w.unrestricted_utility),
                            "restricted_utility": rat(&w.restricted_utility),
                            "gap": rat(&w.gap),
                            "profiles_examined": search.profiles_examined,
                        }),
                    ))
                }
                None => Ok(Outcome::status(
                    false,
                    format!(
                        "no constraining witness for voter {voter} at R={limit} ({} profiles, {})\n",
                        search.profiles_examined,
                        if search.exhaustive { "exhaustive" } else { "budget exhausted" }
                    ),
                    json!({
                        "command": "constraining",
                        "voter": voter,
                        "restriction": limit,
                        "found": false,
                        "exhaustive": search.exhaustive,
                        "profiles_examined": search.profiles_examined,
                    }),
                )),
            }
        }
        Command::FindPne { kind, pruned } => {
            let instance = need_instance(cli)?;
            let rule = build_rule(cli, &instance)?;
            let kind = EquilibriumKind::from(*kind);
            let set = if *pruned {
                if kind != EquilibriumKind::Lazy {
                    return Err(Error::Config("--pruned only applies to --kind lazy".into()));
                }
                enumerate_lazy_pruned(&instance, &rule)?
            } else {
                enumerate_equilibria(&instance, &rule, kind)?
            };
            Ok(report_set(&instance, &set))
        }
        Command::ConstructPne { kind, non_empty, target } => {
            let instance = need_instance(cli)?;
            let rule = build_rule(cli, &instance)?;
            match kind {
                ConstructionArg::Sincere => {
                    let cert = construct_sincere_pne(&instance, &rule, *non_empty)?;
                    Ok(construction_outcome(&instance, &cert, "sincere"))
                }
                ConstructionArg::Containment => {
                    let target = target.as_deref().map(|t| instance.parse_set(t)).transpose()?;
                    match construct_containment_pne(&instance, &rule, target)? {
                        ContainmentOutcome::Certified(cert) => Ok(construction_outcome(&instance, &cert, "containment")),
                        ContainmentOutcome::Impossible(f) => Ok(Outcome::status(
                            false,
                            format!(
                                "no lazy-PNE with this committee: {} outranks member {} but is excluded\n",
                                instance.name(f.excluded),
                                instance.name(f.member)
                            ),
                            json!({
                                "command": "construct-pne",
                                "construction": "containment",
                                "found": false,
                                "member": instance.name(f.member),
                                "excluded": instance.name(f.excluded),
                            }),
                        )),
                    }
                }
            }
        }
        Command::Check {
            property,
            profile,
            trials,
            report,
        } => {
            if let Some(path) = report {
                let report = Report::from_machine(&std::fs::read_to_string(path)?)?;
                let failures = replay_report(&report)?;
                let mut text = String::new();
                for f in &failures {
                    text.push_str(&format!("FAIL {f}\n"));
                }
                text.push_str(&format!(
                    "replayed {} instances: {}\n",
                    report.instances.len(),
                    if failures.is_empty() { "all claims hold" } else { "claims failed" }
                ));
                return Ok(Outcome::status(
                    failures.is_empty(),
                    text,
                    json!({"command": "check", "report": path.display().to_string(), "failures": failures}),
                ));
            }
            check_property(cli, property.expect("clap enforces property or report"), profile.as_deref(), *trials)
        }
        Command::Experiment { config } => {
            let cfg = ExperimentConfig::from_toml(&std::fs::read_to_string(config)?)?;
            let report = run_experiment(&cfg)?;
            let machine: Value = serde_json::from_str(&report.to_machine()).expect("report json");
            Ok(Outcome::ok(report.to_text(), machine))
        }
    }
}

fn report_set(instance: &ElectionInstance, set: &EquilibriumSet) -> Outcome {
    let name = set.kind.as_str();
    let mut text = String::new();
    if set.is_empty() {
        text.push_str(&format!("no {name}-PNE ({} profiles examined)\n", set.profiles_examined));
    } else {
        for &w in &set.committees {
            let count = set.certificates.iter().filter(|c| c.committee == w).count();
            text.push_str(&format!("committee {} ({count} profiles)\n", instance.format_set(w)));
        }
        for c in &set.certificates {
            text.push_str(&format!("  {} -> {}\n", c.profile.format(instance), instance.format_set(c.committee)));
        }
    }
    Outcome::status(
        !set.is_empty(),
        text,
        json!({
            "command": "find-pne",
            "kind": name,
            "profiles_examined": set.profiles_examined,
            "committees": sets(instance, &set.committees),
            "certificates": set.certificates.iter().map(|c| certificate_json(instance, c)).collect::<Vec<_>>(),
        }),
    )
}

fn construction_outcome(instance: &ElectionInstance, cert: &EquilibriumCertificate, which: &str) -> Outcome {
    let w = welfare(instance, cert).map(|x| rat(&x)).unwrap_or_default();
    Outcome::ok(
        format!(
            "{which} construction: committee {} profile {} welfare {w}\n",
            instance.format_set(cert.committee),
            cert.profile.format(instance)
        ),
        json!({
            "command": "construct-pne",
            "construction": which,
            "found": true,
            "welfare": w,
            "certificate": certificate_json(instance, cert),
        }),
    )
}

/// Certificates to inspect: one verified profile, or every lazy equilibrium.
fn lazy_certificates(cli: &Cli, instance: &ElectionInstance, rule: &RuleSpec, profile: Option<&str>) -> Result<Vec<EquilibriumCertificate>> {
    match profile {
        Some(p) => {
            let p = BallotProfile::parse(instance, p)?;
            match verify_equilibrium(instance, rule, &p, EquilibriumKind::Lazy)? {
                Verdict::Equilibrium(c) => Ok(vec![c]),
                Verdict::Deviation(w) => Err(Error::Precondition(format!(
                    "profile is not a lazy-PNE: voter {} deviates to {}",
                    w.voter,
                    instance.format_set(w.alternate)
                ))),
            }
        }
        None => {
            let set = if cli.rule == RuleArg::Av {
                enumerate_lazy_pruned(instance, rule)?
            } else {
                enumerate_equilibria(instance, rule, EquilibriumKind::Lazy)?
            };
            Ok(set.certificates)
        }
    }
}

fn monotonicity_battery(cli: &Cli, property: PropertyArg, trials: u64) -> Result<Vec<(String, MonotonicityCheck)>> {
    let run = |instance: &ElectionInstance, label: String, out: &mut Vec<(String, MonotonicityCheck)>| -> Result<()> {
        let rule = build_rule(cli, instance)?;
        let sampled = match property {
            PropertyArg::Rrm => check_relative_rank_monotonicity(&rule, instance, trials, cli.seed)?,
            _ => check_monotonic_robustness(&rule, instance, trials, cli.seed)?,
        };
        out.push((format!("{label} sampled"), sampled));
        if instance.m() * instance.n() <= MAX_EXHAUSTIVE_BITS {
            let full = match property {
                PropertyArg::Rrm => exhaustive_relative_rank_monotonicity(&rule, instance)?,
                _ => exhaustive_monotonic_robustness(&rule, instance)?,
            };
            out.push((format!("{label} exhaustive"), full));
        }
        Ok(())
    };
    let mut out = Vec::new();
    if cli.instance.is_some() {
        run(&need_instance(cli)?, "instance".into(), &mut out)?;
    } else {
        if cli.weights.is_some() {
            return Err(Error::Config("--weights needs --instance".into()));
        }
        for m in 1..=6 {
            for k in 1..=m {
                let n = if m <= 3 { 3 } else { 5 };
                let spec = InstanceSpec {
                    m,
                    n,
                    k,
                    utility: UtilityScheme::BordaLike,
                    owa: OwaScheme::Additive,
                    random_priority: true,
                };
                let instance = generate_instance(&spec, cli.seed ^ ((m * 16 + k) as u64))?;
                run(&instance, format!("m={m} n={n} k={k}"), &mut out)?;
            }
        }
    }
    Ok(out)
}

fn check_property(cli: &Cli, property: PropertyArg, profile: Option<&str>, trials: u64) -> Result<Outcome> {
    match property {
        PropertyArg::Rrm | PropertyArg::Robust => {
            let name = if property == PropertyArg::Rrm {
                "relative rank monotonicity"
            } else {
                "monotonic robustness"
            };
            let results = monotonicity_battery(cli, property, trials)?;
            let mut text = String::new();
            let mut rows = Vec::new();
            for (label, r) in &results {
                let status = if r.passed() { "ok" } else { "COUNTEREXAMPLE" };
                text.push_str(&format!("{label}: {} trials {status}\n", r.trials));
                rows.push(json!({
                    "case": label,
                    "trials": r.trials,
                    "passed": r.passed(),
                    "counterexample": r.counterexample.as_ref().map(|c| format!("{c:?}")),
                }));
            }
            let pass = results.iter().all(|(_, r)| r.passed());
            text.push_str(&format!("{name}: {}\n", if pass { "holds" } else { "violated" }));
            Ok(Outcome::status(pass, text, json!({"command": "check", "property": name, "passed": pass, "cases": rows})))
        }
        PropertyArg::LazyScores | PropertyArg::Dichotomy | PropertyArg::Sigma => {
            let instance = need_instance(cli)?;
            let rule = build_rule(cli, &instance)?;
            let certs = lazy_certificates(cli, &instance, &rule, profile)?;
            let ideal = ideal_union(&instance);
            let mut text = String::new();
            let mut rows = Vec::new();
            let mut pass = true;
            for c in &certs {
                let label = format!("{} -> {}", c.profile.format(&instance), instance.format_set(c.committee));
                let (ok, detail) = match property {
                    PropertyArg::LazyScores => {
                        let ok = lazy_score_facts(&instance, c);
                        (ok, if ok { "scores 0/1 as required".to_string() } else { "score facts violated".into() })
                    }
                    PropertyArg::Dichotomy => {
                        let d = classify_lazy_dichotomy(&instance, c)?;
                        let detail = match d {
                            Dichotomy::ContainsIdeal => "W* ⊆ W",
                            Dichotomy::InsideIdeal => "W ⊊ W*",
                            Dichotomy::Violation => "neither W* ⊆ W nor W ⊊ W*",
                        };
                        (d != Dichotomy::Violation, detail.to_string())
                    }
                    _ => {
                        if !(c.committee.is_subset(ideal) && c.committee != ideal) {
                            text.push_str(&format!("{label}: not applicable (W is not inside W*)\n"));
                            continue;
                        }
                        let s = check_sigma_condition(&instance, c)?;
                        let failures: Vec<String> = s
                            .unanimity_failures
                            .iter()
                            .map(|(v, cj)| format!("voter {v} prefers {}", instance.name(*cj)))
                            .collect();
                        let detail = format!(
                            "sigma(k) = {} {} k; {}",
                            s.sigma_k,
                            if s.rank_condition { ">" } else { "<=" },
                            if failures.is_empty() { "unanimity holds".to_string() } else { failures.join(", ") }
                        );
                        (s.passed(), detail)
                    }
                };
                pass &= ok;
                text.push_str(&format!("{label}: {} ({detail})\n", if ok { "ok" } else { "VIOLATED" }));
                rows.push(json!({"certificate": certificate_json(&instance, c), "passed": ok, "detail": detail}));
            }
            if certs.is_empty() {
                text.push_str("no lazy-PNE to check\n");
            }
            Ok(Outcome::status(pass, text, json!({"command": "check", "property": format!("{property:?}").to_lowercase(), "passed": pass, "results": rows})))
        }
        PropertyArg::K1 => {
            let instance = need_instance(cli)?;
            let rule = build_rule(cli, &instance)?;
            let predicted = k1_characterization(&instance)?;
            let actual = if cli.rule == RuleArg::Av {
                enumerate_lazy_pruned(&instance, &rule)?
            } else {
                enumerate_equilibria(&instance, &rule, EquilibriumKind::Lazy)?
            };
            let pass = predicted == actual.committees;
            let text = format!(
                "characterization {}\nenumeration {}\n{}\n",
                sets(&instance, &predicted).join(" "),
                sets(&instance, &actual.committees).join(" "),
                if pass { "agree" } else { "DISAGREE" }
            );
            Ok(Outcome::status(
                pass,
                text,
                json!({
                    "command": "check",
                    "property": "k1",
                    "passed": pass,
                    "predicted": sets(&instance, &predicted),
                    "enumerated": sets(&instance, &actual.committees),
                }),
            ))
        }
    }
}
