//! Batch experiments over generated instances, and their reports.
//!
//! The machine form of a [`Report`] is JSON carrying the schema tag
//! [`REPORT_SCHEMA`]. Every claim it makes is backed by the instance text and
//! the profiles needed to re-derive it; [`replay_report`] re-checks them.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::format::{format_rational, parse_instance, parse_rational, serialize_instance};
use super::generate::{generate_instance, InstanceSpec, OwaScheme, UtilityScheme};
use crate::equilibrium::{
    construct_sincere_pne, enumerate_equilibria, enumerate_lazy_pruned, verify_equilibrium, EquilibriumKind,
    EquilibriumSet, Verdict,
};
use crate::error::{Error, Result};
use crate::model::{social_welfare, CandidateSet, ElectionInstance, PriorityOrder, Rational};
use crate::rules::{random_weights, ApprovalRule, BallotProfile, RuleSpec};
use crate::strategy::{
    constraining_witness, minimal_best_response, restricted_optima, BestResponseEngine, LengthRestriction,
    SearchLimits, WitnessMode,
};

pub const REPORT_SCHEMA: &str = "approval-report/1";

/// A fixed size or an inclusive `[lo, hi]` range.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SizeRange {
    Fixed(usize),
    Span([usize; 2]),
}

impl SizeRange {
    fn bounds(self) -> (usize, usize) {
        match self {
            SizeRange::Fixed(x) => (x, x),
            SizeRange::Span([lo, hi]) => (lo, hi),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeneratorConfig {
    pub m: SizeRange,
    pub n: SizeRange,
    /// Clipped to `m` per instance.
    pub k: SizeRange,
    pub utility: UtilityScheme,
    pub owa: OwaScheme,
    #[serde(default)]
    pub random_priority: bool,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RuleChoice {
    #[default]
    Av,
    Weighted,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Analysis {
    /// MBR size against `j*` for each voter under a random others-profile.
    BestResponse,
    /// Best feasible utility for every `R = 0..=m`.
    RestrictionSweep,
    /// Constraining-witness search at the configured restriction.
    Constraining,
    Lazy,
    Sincere,
    /// Lazy against sincere equilibrium welfare.
    Welfare,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub seed: u64,
    pub instances: usize,
    pub generator: GeneratorConfig,
    #[serde(default)]
    pub rule: RuleChoice,
    /// Ballot-length limit for the constraining analysis.
    #[serde(default)]
    pub restriction: Option<usize>,
    #[serde(default)]
    pub analyses: Vec<Analysis>,
    #[serde(default = "default_budget")]
    pub witness_budget: u64,
}

fn default_budget() -> u64 {
    1 << 16
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let g = &self.generator;
        for (name, r) in [("m", g.m), ("n", g.n), ("k", g.k)] {
            let (lo, hi) = r.bounds();
            if lo == 0 || lo > hi {
                return Err(Error::Config(format!("{name} range [{lo}, {hi}] is empty or starts at 0")));
            }
        }
        if g.m.bounds().1 > crate::model::MAX_TABLE_CANDIDATES {
            return Err(Error::Config(format!(
                "m may not exceed {}",
                crate::model::MAX_TABLE_CANDIDATES
            )));
        }
        if g.k.bounds().0 > g.m.bounds().1 {
            return Err(Error::Config("k range lies entirely above the m range".into()));
        }
        if self.analyses.contains(&Analysis::Constraining) && self.restriction.is_none() {
            return Err(Error::Config("the constraining analysis needs `restriction`".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Skip {
    pub analysis: Analysis,
    pub reason: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BestResponseRecord {
    pub voter: usize,
    pub j_star: usize,
    /// Full profile; the voter's own entry is empty.
    pub profile: String,
    pub mbr_size: usize,
    pub mbr_ballot: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SweepRecord {
    pub voter: usize,
    pub profile: String,
    /// Index `R`.
    pub optima: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WitnessRecord {
    pub voter: usize,
    pub restriction: usize,
    pub exhaustive: bool,
    pub profiles_examined: u64,
    pub priority: Option<Vec<String>>,
    pub others: Option<String>,
    pub unrestricted_utility: Option<String>,
    pub restricted_utility: Option<String>,
    pub gap: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EquilibriumRecord {
    pub kind: EquilibriumKind,
    /// `pruned`, `exhaustive` or `construction`.
    pub method: String,
    /// Complete list for enumerations, a single entry for constructions.
    pub committees: Vec<String>,
    /// One certified profile per listed equilibrium.
    pub profiles: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WelfareRecord {
    pub sincere: String,
    pub lazy_best: String,
    pub lazy_worst: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct InstanceResult {
    pub index: usize,
    pub seed: u64,
    pub instance: String,
    pub weights: Option<Vec<String>>,
    pub skipped: Vec<Skip>,
    pub best_response: Vec<BestResponseRecord>,
    pub restriction_sweep: Vec<SweepRecord>,
    pub constraining: Vec<WitnessRecord>,
    pub lazy: Option<EquilibriumRecord>,
    pub sincere: Option<EquilibriumRecord>,
    pub welfare: Option<WelfareRecord>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Aggregate {
    pub instances: usize,
    pub skipped: usize,
    /// `j*` -> MBR size -> count.
    pub mbr_histogram: BTreeMap<usize, BTreeMap<usize, u64>>,
    pub mbr_above_j_star: u64,
    pub sweep_decreases: u64,
    pub witnesses_found: u64,
    pub witness_searches: u64,
    pub lazy_exists: u64,
    pub lazy_examined: u64,
    pub sincere_exists: u64,
    pub sincere_examined: u64,
    pub welfare_lazy_higher: u64,
    pub welfare_sincere_higher: u64,
    pub welfare_equal: u64,
}

impl Aggregate {
    pub fn lazy_rate(&self) -> f64 {
        rate(self.lazy_exists, self.lazy_examined)
    }

    pub fn sincere_rate(&self) -> f64 {
        rate(self.sincere_exists, self.sincere_examined)
    }
}

fn rate(a: u64, b: u64) -> f64 {
    if b == 0 {
        0.0
    } else {
        a as f64 / b as f64
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Report {
    pub schema: String,
    pub config: ExperimentConfig,
    pub instances: Vec<InstanceResult>,
    pub aggregate: Aggregate,
}

impl Report {
    pub fn to_machine(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn from_machine(text: &str) -> Result<Self> {
        let report: Report = serde_json::from_str(text).map_err(|e| Error::Parse {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })?;
        if report.schema != REPORT_SCHEMA {
            return Err(Error::Config(format!("unsupported report schema {:?}", report.schema)));
        }
        Ok(report)
    }

    pub fn to_text(&self) -> String {
        let a = &self.aggregate;
        let mut s = String::new();
        writeln!(s, "instances: {} (skipped analyses: {})", a.instances, a.skipped).unwrap();
        if !a.mbr_histogram.is_empty() {
            writeln!(s, "MBR size by j*:").unwrap();
            for (j, row) in &a.mbr_histogram {
                let cells: Vec<String> = row.iter().map(|(size, n)| format!("{size}:{n}")).collect();
                writeln!(s, "  j*={j}  {}", cells.join(" ")).unwrap();
            }
            writeln!(s, "MBR size above j*: {}", a.mbr_above_j_star).unwrap();
        }
        if self.config.analyses.contains(&Analysis::RestrictionSweep) {
            writeln!(s, "restricted optimum decreases in R: {}", a.sweep_decreases).unwrap();
        }
        if a.witness_searches > 0 {
            writeln!(s, "constraining witnesses: {}/{}", a.witnesses_found, a.witness_searches).unwrap();
        }
        if a.lazy_examined > 0 {
            writeln!(s, "lazy-PNE exists: {}/{} ({:.3})", a.lazy_exists, a.lazy_examined, a.lazy_rate()).unwrap();
        }
        if a.sincere_examined > 0 {
            writeln!(
                s,
                "sincere-PNE exists: {}/{} ({:.3})",
                a.sincere_exists,
                a.sincere_examined,
                a.sincere_rate()
            )
            .unwrap();
        }
        let compared = a.welfare_lazy_higher + a.welfare_sincere_higher + a.welfare_equal;
        if compared > 0 {
            writeln!(
                s,
                "welfare (best lazy vs sincere): lazy higher {}, sincere higher {}, equal {}",
                a.welfare_lazy_higher, a.welfare_sincere_higher, a.welfare_equal
            )
            .unwrap();
        }
        for inst in &self.instances {
            for skip in &inst.skipped {
                writeln!(s, "instance {} skipped {:?}: {}", inst.index, skip.analysis, skip.reason).unwrap();
            }
        }
        s
    }
}

/// Runs the configured analyses. Instances run in parallel; the report is
/// assembled in index order, so output depends only on the config.
pub fn run_experiment(config: &ExperimentConfig) -> Result<Report> {
    config.validate()?;
    let mut master = ChaCha8Rng::seed_from_u64(config.seed);
    let seeds: Vec<u64> = (0..config.instances).map(|_| master.gen()).collect();
    let instances = seeds
        .par_iter()
        .enumerate()
        .map(|(index, &seed)| run_instance(config, index, seed))
        .collect::<Result<Vec<_>>>()?;
    let aggregate = aggregate(&instances)?;
    Ok(Report {
        schema: REPORT_SCHEMA.to_string(),
        config: config.clone(),
        instances,
        aggregate,
    })
}

fn pick(rng: &mut ChaCha8Rng, r: SizeRange, cap: usize) -> usize {
    let (lo, hi) = r.bounds();
    rng.gen_range(lo.min(cap)..=hi.min(cap))
}

fn rule_for(instance: &ElectionInstance, choice: RuleChoice, rng: &mut ChaCha8Rng) -> Result<(RuleSpec, Option<Vec<String>>)> {
    match choice {
        RuleChoice::Av => Ok((RuleSpec::standard_av(instance), None)),
        RuleChoice::Weighted => {
            let w = random_weights(instance.m(), rng);
            let text = w.iter().map(format_rational).collect();
            Ok((RuleSpec::candidate_weighted(instance, w)?, Some(text)))
        }
    }
}

fn random_profile(instance: &ElectionInstance, voter: usize, rng: &mut ChaCha8Rng) -> BallotProfile {
    let full = instance.candidates().bits();
    let ballots = (0..instance.n())
        .map(|i| if i == voter { CandidateSet::empty() } else { CandidateSet::from_bits(rng.gen::<u64>() & full) })
        .collect();
    BallotProfile::new(instance, ballots).expect("ballots lie within the candidate set")
}

fn record_set(instance: &ElectionInstance, set: &EquilibriumSet, method: &str) -> EquilibriumRecord {
    // one certificate per committee, the first in profile order
    let mut committees = Vec::new();
    let mut profiles = Vec::new();
    for &w in &set.committees {
        let cert = set.certificates.iter().find(|c| c.committee == w).expect("committee has a certificate");
        committees.push(instance.format_set(w));
        profiles.push(cert.profile.format(instance));
    }
    EquilibriumRecord {
        kind: set.kind,
        method: method.to_string(),
        committees,
        profiles,
    }
}

fn run_instance(config: &ExperimentConfig, index: usize, seed: u64) -> Result<InstanceResult> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let g = &config.generator;
    let m = pick(&mut rng, g.m, usize::MAX);
    let spec = InstanceSpec {
        m,
        n: pick(&mut rng, g.n, usize::MAX),
        k: pick(&mut rng, g.k, m),
        utility: g.utility,
        owa: g.owa,
        random_priority: g.random_priority,
    };
    let instance = generate_instance(&spec, rng.gen())?;
    let (rule, weights) = rule_for(&instance, config.rule, &mut rng)?;
    let mut out = InstanceResult {
        index,
        seed,
        instance: serialize_instance(&instance),
        weights,
        skipped: Vec::new(),
        best_response: Vec::new(),
        restriction_sweep: Vec::new(),
        constraining: Vec::new(),
        lazy: None,
        sincere: None,
        welfare: None,
    };
    let mut analyses = config.analyses.clone();
    analyses.sort();
    analyses.dedup();
    let mut lazy_set = None;
    let mut sincere_cert = None;
    for analysis in analyses {
        let step = run_analysis(config, analysis, &instance, &rule, &mut rng, &mut out, &mut lazy_set, &mut sincere_cert);
        match step {
            Ok(()) => {}
            Err(e @ (Error::Capacity { .. } | Error::Precondition(_))) => out.skipped.push(Skip {
                analysis,
                reason: e.to_string(),
            }),
            Err(e) => return Err(e),
        }
    }
    Ok(out)
}

#[allow(clippy::too_many_arguments)]
fn run_analysis(
    config: &ExperimentConfig,
    analysis: Analysis,
    instance: &ElectionInstance,
    rule: &RuleSpec,
    rng: &mut ChaCha8Rng,
    out: &mut InstanceResult,
    lazy_set: &mut Option<EquilibriumSet>,
    sincere_cert: &mut Option<Rational>,
) -> Result<()> {
    let n = instance.n();
    match analysis {
        Analysis::BestResponse => {
            BestResponseEngine::new(instance, rule, SearchLimits::default())?;
            for i in 0..n {
                let profile = random_profile(instance, i, rng);
                let (size, ballot) = minimal_best_response(instance, rule, i, &profile, LengthRestriction::Unrestricted)?;
                out.best_response.push(BestResponseRecord {
                    voter: i,
                    j_star: instance.voters()[i].j_star(),
                    profile: profile.format(instance),
                    mbr_size: size,
                    mbr_ballot: instance.format_set(ballot),
                });
            }
        }
        Analysis::RestrictionSweep => {
            BestResponseEngine::new(instance, rule, SearchLimits::default())?;
            for i in 0..n {
                let profile = random_profile(instance, i, rng);
                let optima = restricted_optima(instance, rule, i, &profile)?;
                out.restriction_sweep.push(SweepRecord {
                    voter: i,
                    profile: profile.format(instance),
                    optima: optima.iter().map(format_rational).collect(),
                });
            }
        }
        Analysis::Constraining => {
            let limit = config.restriction.expect("validated");
            if limit >= instance.m() {
                return Err(Error::Precondition(format!("restriction {limit} does not restrict m={}", instance.m())));
            }
            for i in 0..n {
                let search = constraining_witness(instance, rule, i, limit, config.witness_budget, WitnessMode::SynthesizedPriority)?;
                let w = search.witness.as_ref();
                let prio = w.map(|w| w.priority.iter().map(|&c| instance.name(c).to_string()).collect());
                let others = w.map(|w| {
                    let shown = instance
                        .with_priority(PriorityOrder::new(w.priority.clone()).expect("witness priority is a permutation"))
                        .expect("same size");
                    w.others.format(&shown)
                });
                out.constraining.push(WitnessRecord {
                    voter: i,
                    restriction: limit,
                    exhaustive: search.exhaustive,
                    profiles_examined: search.profiles_examined,
                    priority: prio,
                    others,
                    unrestricted_utility: w.map(|w| format_rational(&w.unrestricted_utility)),
                    restricted_utility: w.map(|w| format_rational(&w.restricted_utility)),
                    gap: w.map(|w| format_rational(&w.gap)),
                });
            }
        }
        Analysis::Lazy => {
            let (set, method) = if rule.is_standard_av() {
                (enumerate_lazy_pruned(instance, rule)?, "pruned")
            } else {
                (enumerate_equilibria(instance, rule, EquilibriumKind::Lazy)?, "exhaustive")
            };
            out.lazy = Some(record_set(instance, &set, method));
            *lazy_set = Some(set);
        }
        Analysis::Sincere => {
            if rule.is_standard_av() && n > instance.m() {
                let cert = construct_sincere_pne(instance, rule, false)?;
                *sincere_cert = Some(social_welfare(instance, cert.committee)?);
                out.sincere = Some(EquilibriumRecord {
                    kind: EquilibriumKind::Sincere,
                    method: "construction".into(),
                    committees: vec![instance.format_set(cert.committee)],
                    profiles: vec![cert.profile.format(instance)],
                });
            } else {
                let set = enumerate_equilibria(instance, rule, EquilibriumKind::Sincere)?;
                if let Some(c) = set.certificates.first() {
                    *sincere_cert = Some(social_welfare(instance, c.committee)?);
                }
                let mut rec = record_set(instance, &set, "exhaustive");
                // keep the welfare reference profile first
                if let Some(c) = set.certificates.first() {
                    let name = instance.format_set(c.committee);
                    if let Some(pos) = rec.committees.iter().position(|x| *x == name) {
                        rec.committees.swap(0, pos);
                        rec.profiles.swap(0, pos);
                    }
                }
                out.sincere = Some(rec);
            }
        }
        Analysis::Welfare => {
            let (Some(set), Some(sincere)) = (lazy_set.as_ref(), sincere_cert.as_ref()) else {
                return Err(Error::Precondition("welfare needs both the lazy and sincere analyses".into()));
            };
            if set.committees.is_empty() {
                return Err(Error::Precondition("no lazy-PNE to compare".into()));
            }
            let values = set
                .committees
                .iter()
                .map(|&w| social_welfare(instance, w))
                .collect::<Result<Vec<_>>>()?;
            out.welfare = Some(WelfareRecord {
                sincere: format_rational(sincere),
                lazy_best: format_rational(values.iter().max().expect("non-empty")),
                lazy_worst: format_rational(values.iter().min().expect("non-empty")),
            });
        }
    }
    Ok(())
}

fn aggregate(results: &[InstanceResult]) -> Result<Aggregate> {
    let mut a = Aggregate {
        instances: results.len(),
        ..Aggregate::default()
    };
    let r = |s: &str| parse_rational(s).map_err(Error::Invariant);
    for inst in results {
        a.skipped += inst.skipped.len();
        for b in &inst.best_response {
            *a.mbr_histogram.entry(b.j_star).or_default().entry(b.mbr_size).or_default() += 1;
            if b.mbr_size > b.j_star {
                a.mbr_above_j_star += 1;
            }
        }
        for s in &inst.restriction_sweep {
            let vals = s.optima.iter().map(|x| r(x)).collect::<Result<Vec<_>>>()?;
            a.sweep_decreases += vals.windows(2).filter(|w| w[1] < w[0]).count() as u64;
        }
        for w in &inst.constraining {
            a.witness_searches += 1;
            a.witnesses_found += w.gap.is_some() as u64;
        }
        if let Some(l) = &inst.lazy {
            a.lazy_examined += 1;
            a.lazy_exists += !l.committees.is_empty() as u64;
        }
        if let Some(s) = &inst.sincere {
            a.sincere_examined += 1;
            a.sincere_exists += !s.committees.is_empty() as u64;
        }
        if let Some(w) = &inst.welfare {
            match r(&w.lazy_best)?.cmp(&r(&w.sincere)?) {
                std::cmp::Ordering::Greater => a.welfare_lazy_higher += 1,
                std::cmp::Ordering::Less => a.welfare_sincere_higher += 1,
                std::cmp::Ordering::Equal => a.welfare_equal += 1,
            }
        }
    }
    Ok(a)
}

/// Re-derives every claim in a report from its embedded instances and
/// profiles. Returns one message per claim that does not hold.
pub fn replay_report(report: &Report) -> Result<Vec<String>> {
    let mut failures = Vec::new();
    for inst in &report.instances {
        let tag = |msg: String| format!("instance {}: {msg}", inst.index);
        let instance = parse_instance(&inst.instance)?;
        let rule = match &inst.weights {
            None => RuleSpec::standard_av(&instance),
            Some(w) => RuleSpec::candidate_weighted(
                &instance,
                w.iter().map(|x| parse_rational(x).map_err(Error::Config)).collect::<Result<_>>()?,
            )?,
        };
        for b in &inst.best_response {
            let profile = BallotProfile::parse(&instance, &b.profile)?;
            let (size, ballot) = minimal_best_response(&instance, &rule, b.voter, &profile, LengthRestriction::Unrestricted)?;
            if size != b.mbr_size || instance.format_set(ballot) != b.mbr_ballot {
                failures.push(tag(format!("voter {} MBR differs from recorded {}", b.voter, b.mbr_ballot)));
            }
        }
        for s in &inst.restriction_sweep {
            let profile = BallotProfile::parse(&instance, &s.profile)?;
            let optima: Vec<String> =
                restricted_optima(&instance, &rule, s.voter, &profile)?.iter().map(format_rational).collect();
            if optima != s.optima {
                failures.push(tag(format!("voter {} restricted optima differ", s.voter)));
            }
        }
        for w in &inst.constraining {
            let (Some(prio), Some(others), Some(gap)) = (&w.priority, &w.others, &w.gap) else { continue };
            let ranking = prio
                .iter()
                .map(|name| instance.candidate(name).ok_or_else(|| Error::Config(format!("unknown candidate {name}"))))
                .collect::<Result<Vec<_>>>()?;
            let priority = PriorityOrder::new(ranking)?;
            let shown = instance.with_priority(priority.clone())?;
            let rule = rule.with_priority(priority)?;
            let others = BallotProfile::parse(&shown, others)?;
            let optima = restricted_optima(&shown, &rule, w.voter, &others)?;
            let actual = &optima[instance.m()] - &optima[w.restriction];
            let feasible = others.ballots().iter().all(|b| b.len() <= w.restriction);
            if format_rational(&actual) != *gap || !feasible || actual <= Rational::from_integer(0.into()) {
                failures.push(tag(format!("voter {} constraining witness does not replay", w.voter)));
            }
        }
        for rec in inst.lazy.iter().chain(inst.sincere.iter()) {
            let kind = rec.kind.as_str();
            if rec.committees.len() != rec.profiles.len() {
                failures.push(tag(format!("{kind} record lists {} committees but {} profiles", rec.committees.len(), rec.profiles.len())));
                continue;
            }
            // enumerated records also claim completeness
            let full = match rec.method.as_str() {
                "pruned" => Some(enumerate_lazy_pruned(&instance, &rule)?),
                "exhaustive" => Some(enumerate_equilibria(&instance, &rule, rec.kind)?),
                _ => None,
            };
            if let Some(set) = full {
                let expected: BTreeSet<String> = set.committees.iter().map(|&w| instance.format_set(w)).collect();
                let claimed: BTreeSet<String> = rec.committees.iter().cloned().collect();
                if expected != claimed || claimed.len() != rec.committees.len() {
                    failures.push(tag(format!("{kind} committees differ from a fresh enumeration")));
                }
            }
            for (committee, profile) in rec.committees.iter().zip(&rec.profiles) {
                let profile = BallotProfile::parse(&instance, profile)?;
                match verify_equilibrium(&instance, &rule, &profile, rec.kind)? {
                    Verdict::Equilibrium(c) if instance.format_set(c.committee) == *committee => {}
                    _ => failures.push(tag(format!("{kind} certificate for {committee} does not verify"))),
                }
            }
        }
    }
    let recomputed = aggregate(&report.instances)?;
    if recomputed != report.aggregate {
        failures.push("aggregate table does not match the per-instance results".into());
    }
    Ok(failures)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn config(analyses: Vec<Analysis>) -> ExperimentConfig {
        ExperimentConfig {
            seed: 7,
            instances: 12,
            generator: GeneratorConfig {
                m: SizeRange::Span([3, 4]),
                n: SizeRange::Span([2, 3]),
                k: SizeRange::Span([1, 2]),
                utility: UtilityScheme::RandomRational,
                owa: OwaScheme::RandomFullRank,
                random_priority: true,
            },
            rule: RuleChoice::Av,
            restriction: Some(1),
            analyses,
            witness_budget: 1 << 10,
        }
    }

    #[test]
    fn empty_selection_is_valid() {
        let report = run_experiment(&config(vec![])).unwrap();
        assert_eq!(report.instances.len(), 12);
        assert!(report.instances.iter().all(|i| i.best_response.is_empty() && i.lazy.is_none()));
        assert_eq!(Report::from_machine(&report.to_machine()).unwrap(), report);
    }

    #[test]
    fn deterministic_and_replayable() {
        let all = vec![
            Analysis::Welfare,
            Analysis::BestResponse,
            Analysis::RestrictionSweep,
            Analysis::Constraining,
            Analysis::Lazy,
            Analysis::Sincere,
        ];
        let a = run_experiment(&config(all.clone())).unwrap();
        let b = run_experiment(&config(all)).unwrap();
        assert_eq!(a.to_machine(), b.to_machine());
        assert_eq!(a.aggregate.mbr_above_j_star, 0);
        assert_eq!(a.aggregate.sweep_decreases, 0);
        assert!(replay_report(&a).unwrap().is_empty());
        let mut forged = a.clone();
        let victim = forged.instances.iter_mut().find(|i| !i.best_response.is_empty()).unwrap();
        victim.best_response[0].mbr_size += 1;
        assert!(!replay_report(&forged).unwrap().is_empty());
    }

    #[test]
    fn toml_config() {
        let cfg = ExperimentConfig::from_toml(
            "seed = 1\ninstances = 3\nanalyses = [\"lazy\"]\n[generator]\nm = 3\nn = [2, 3]\nk = 1\n\
             utility = \"borda-like\"\nowa = \"best\"\n",
        )
        .unwrap();
        assert_eq!(cfg.generator.m, SizeRange::Fixed(3));
        assert_eq!(cfg.witness_budget, default_budget());
        assert!(ExperimentConfig::from_toml("seed = 1\ninstances = 1\nbogus = 2\n").is_err());
        let bad = "seed = 1\ninstances = 1\nanalyses = [\"constraining\"]\n[generator]\nm = 3\nn = 2\nk = 1\n\
                   utility = \"borda-like\"\nowa = \"best\"\n";
        assert!(matches!(ExperimentConfig::from_toml(bad), Err(Error::Config(_))));
    }
}
