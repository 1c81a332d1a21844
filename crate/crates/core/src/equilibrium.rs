//! Pure Nash equilibria of the approval game: plain, lazy (every ballot a
//! minimal best response) and sincere (every ballot a sincere best
//! response). Verification, exhaustive and pruned enumeration, the two
//! constructive existence procedures, and checkers for the structural
//! characterizations of lazy equilibria.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{precondition, Error, Result};
use crate::model::{
    ideal_union, k_subsets, social_welfare, Ballot, CandidateId, CandidateSet, Committee, ElectionInstance, Rational,
};
use crate::rules::{ApprovalRule, BallotProfile};
use crate::strategy::{BestResponseEngine, SearchLimits};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EquilibriumKind {
    /// No strictly improving unilateral deviation.
    Plain,
    /// Additionally every ballot is a minimal best response.
    Lazy,
    /// Additionally every ballot is sincere.
    Sincere,
}

impl EquilibriumKind {
    pub fn as_str(self) -> &'static str {
        match self {
            EquilibriumKind::Plain => "plain",
            EquilibriumKind::Lazy => "lazy",
            EquilibriumKind::Sincere => "sincere",
        }
    }
}

impl std::str::FromStr for EquilibriumKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "plain" => Ok(EquilibriumKind::Plain),
            "lazy" => Ok(EquilibriumKind::Lazy),
            "sincere" => Ok(EquilibriumKind::Sincere),
            other => Err(Error::Config(format!("unknown equilibrium kind {other:?}"))),
        }
    }
}

/// What was checked for one voter.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VoterEvidence {
    pub voter: usize,
    pub utility: Rational,
    pub achievable_utility: Rational,
    pub ballot_size: usize,
    pub mbr_size: usize,
    pub sincere: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EquilibriumCertificate {
    pub committee: Committee,
    pub profile: BallotProfile,
    pub kind: EquilibriumKind,
    pub evidence: Vec<VoterEvidence>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Violation {
    /// The alternate ballot yields strictly more utility.
    ImprovingDeviation,
    /// The alternate ballot is a strictly shorter best response.
    ShorterBestResponse,
    /// The ballot is insincere while the alternate is a sincere best response.
    SincereBestResponseElsewhere,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DeviationWitness {
    pub voter: usize,
    pub alternate: Ballot,
    pub old_utility: Rational,
    pub new_utility: Rational,
    pub violation: Violation,
}

impl DeviationWitness {
    /// Re-elects with the alternate ballot and confirms the recorded
    /// utilities and the claimed violation.
    pub fn replay<R: ApprovalRule + ?Sized>(
        &self,
        instance: &ElectionInstance,
        rule: &R,
        profile: &BallotProfile,
    ) -> Result<bool> {
        let v = instance.voter(self.voter)?;
        let m = instance.m();
        let before = rule.elect_counts(&profile.counts(m));
        let after = rule.elect_counts(&profile.with_ballot(self.voter, self.alternate).counts(m));
        let old = v.committee_utility(before);
        let new = v.committee_utility(after);
        if old != self.old_utility || new != self.new_utility {
            return Ok(false);
        }
        let own = profile.ballot(self.voter);
        Ok(match self.violation {
            Violation::ImprovingDeviation => new > old,
            Violation::ShorterBestResponse => new == old && self.alternate.len() < own.len(),
            Violation::SincereBestResponseElsewhere => {
                new == old
                    && v.prefix(self.alternate.len()) == self.alternate
                    && v.prefix(own.len()) != own
            }
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    Equilibrium(EquilibriumCertificate),
    Deviation(DeviationWitness),
}

impl Verdict {
    pub fn certificate(&self) -> Option<&EquilibriumCertificate> {
        match self {
            Verdict::Equilibrium(c) => Some(c),
            Verdict::Deviation(_) => None,
        }
    }

    pub fn witness(&self) -> Option<&DeviationWitness> {
        match self {
            Verdict::Equilibrium(_) => None,
            Verdict::Deviation(w) => Some(w),
        }
    }
}

/// Checks a profile against the given equilibrium notion, returning either
/// a certificate or the first deviation found (voters in index order).
pub fn verify_equilibrium<R: ApprovalRule + ?Sized>(
    instance: &ElectionInstance,
    rule: &R,
    profile: &BallotProfile,
    kind: EquilibriumKind,
) -> Result<Verdict> {
    let profile = BallotProfile::new(instance, profile.ballots().to_vec())?;
    let engine = BestResponseEngine::new(instance, rule, SearchLimits::default())?;
    verify_with(&engine, &profile, kind)
}

pub(crate) fn verify_with<R: ApprovalRule + ?Sized>(
    engine: &BestResponseEngine<'_, R>,
    profile: &BallotProfile,
    kind: EquilibriumKind,
) -> Result<Verdict> {
    let instance = engine.instance();
    let m = instance.m();
    let table = engine.table();
    let counts = profile.counts(m);
    let committee = engine.rule().elect_counts(&counts);
    let mut evidence = Vec::with_capacity(instance.n());
    for (i, v) in instance.voters().iter().enumerate() {
        let own = profile.ballot(i);
        let base = profile.counts_without(m, i);
        let current = table.rank(i, committee);
        let (summary, mbr) = engine.canonical_mbr(i, &base, m);
        let sincere = v.prefix(own.len()) == own;
        let utility = table.value(i, current).clone();
        let achievable = table.value(i, summary.best_rank).clone();
        if summary.best_rank > current {
            return Ok(Verdict::Deviation(DeviationWitness {
                voter: i,
                alternate: mbr,
                old_utility: utility,
                new_utility: achievable,
                violation: Violation::ImprovingDeviation,
            }));
        }
        if kind == EquilibriumKind::Lazy && own.len() > summary.mbr_size {
            return Ok(Verdict::Deviation(DeviationWitness {
                voter: i,
                alternate: mbr,
                old_utility: utility.clone(),
                new_utility: utility,
                violation: Violation::ShorterBestResponse,
            }));
        }
        if kind == EquilibriumKind::Sincere && !sincere {
            let (len, rank) = engine.best_prefix(i, &base, m);
            if rank != summary.best_rank {
                return Err(Error::Invariant(format!(
                    "voter {i} has no sincere best response; the rule is not non-degenerate"
                )));
            }
            return Ok(Verdict::Deviation(DeviationWitness {
                voter: i,
                alternate: v.prefix(len),
                old_utility: utility.clone(),
                new_utility: utility,
                violation: Violation::SincereBestResponseElsewhere,
            }));
        }
        evidence.push(VoterEvidence {
            voter: i,
            utility,
            achievable_utility: achievable,
            ballot_size: own.len(),
            mbr_size: summary.mbr_size,
            sincere,
        });
    }
    Ok(Verdict::Equilibrium(EquilibriumCertificate {
        committee,
        profile: profile.clone(),
        kind,
        evidence,
    }))
}

/// Fast early-exit check used by the enumerators.
fn holds<R: ApprovalRule + ?Sized>(
    engine: &BestResponseEngine<'_, R>,
    ballots: &[Ballot],
    counts: &[u32],
    kind: EquilibriumKind,
) -> bool {
    let instance = engine.instance();
    let m = instance.m();
    let committee = engine.rule().elect_counts(counts);
    let mut base = [0u32; 64];
    for (i, v) in instance.voters().iter().enumerate() {
        let own = ballots[i];
        if kind == EquilibriumKind::Sincere && v.prefix(own.len()) != own {
            return false;
        }
        let base = &mut base[..m];
        base.copy_from_slice(counts);
        for c in own.iter() {
            base[c.0] -= 1;
        }
        let current = engine.table().rank(i, committee);
        for &b in engine.ballots() {
            let r = engine.rank_of(i, base, b);
            if r > current || (kind == EquilibriumKind::Lazy && r == current && b.len() < own.len()) {
                return false;
            }
        }
    }
    true
}

/// Every equilibrium of one kind, with the distinct committees they elect.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EquilibriumSet {
    pub kind: EquilibriumKind,
    /// Sorted by profile.
    pub certificates: Vec<EquilibriumCertificate>,
    /// Sorted by bitmask.
    pub committees: Vec<Committee>,
    pub profiles_examined: u64,
}

impl EquilibriumSet {
    fn from_profiles<R: ApprovalRule + ?Sized>(
        engine: &BestResponseEngine<'_, R>,
        kind: EquilibriumKind,
        mut profiles: Vec<BallotProfile>,
        examined: u64,
    ) -> Result<Self> {
        profiles.sort();
        let certificates = profiles
            .iter()
            .map(|p| match verify_with(engine, p, kind)? {
                Verdict::Equilibrium(c) => Ok(c),
                Verdict::Deviation(_) => Err(Error::Invariant(
                    "fast equilibrium check disagrees with full verification".into(),
                )),
            })
            .collect::<Result<Vec<_>>>()?;
        let committees: BTreeSet<Committee> = certificates.iter().map(|c| c.committee).collect();
        Ok(EquilibriumSet {
            kind,
            certificates,
            committees: committees.into_iter().collect(),
            profiles_examined: examined,
        })
    }

    pub fn is_empty(&self) -> bool {
        self.certificates.is_empty()
    }
}

/// Visits all `(2^m)^n` profiles.
pub fn enumerate_equilibria<R: ApprovalRule + ?Sized>(
    instance: &ElectionInstance,
    rule: &R,
    kind: EquilibriumKind,
) -> Result<EquilibriumSet> {
    enumerate_equilibria_with(instance, rule, kind, SearchLimits::default())
}

pub fn enumerate_equilibria_with<R: ApprovalRule + ?Sized>(
    instance: &ElectionInstance,
    rule: &R,
    kind: EquilibriumKind,
    limits: SearchLimits,
) -> Result<EquilibriumSet> {
    let (m, n) = (instance.m(), instance.n());
    let bits = (m * n) as u32;
    let total = if bits < 64 { 1u64 << bits } else { u64::MAX };
    if bits >= 64 || total > limits.max_profiles {
        return Err(Error::Capacity {
            what: "profile enumeration (use the pruned lazy enumerator)",
            requested: total,
            limit: limits.max_profiles,
        });
    }
    let engine = BestResponseEngine::new(instance, rule, limits)?;
    let mask = (1u64 << m) - 1;
    let mut found = Vec::new();
    let mut ballots = vec![Ballot::empty(); n];
    let mut counts = vec![0u32; m];
    for code in 0..total {
        counts.iter_mut().for_each(|c| *c = 0);
        for (i, b) in ballots.iter_mut().enumerate() {
            *b = CandidateSet::from_bits((code >> (i * m)) & mask);
            for c in b.iter() {
                counts[c.0] += 1;
            }
        }
        if holds(&engine, &ballots, &counts, kind) {
            found.push(BallotProfile::from_ballots(ballots.clone()));
        }
    }
    EquilibriumSet::from_profiles(&engine, kind, found, total)
}

/// Lazy equilibria only: searches profiles whose ballots are pairwise
/// disjoint and approve at most `k` candidates in total, once each. Every
/// lazy equilibrium under AV has this shape.
pub fn enumerate_lazy_pruned<R: ApprovalRule + ?Sized>(instance: &ElectionInstance, rule: &R) -> Result<EquilibriumSet> {
    if !rule.is_standard_av() {
        return Err(precondition("the pruned lazy enumerator requires the standard AV rule"));
    }
    let (m, n, k) = (instance.m(), instance.n(), instance.k());
    let engine = BestResponseEngine::new(instance, rule, SearchLimits::default())?;
    let mut found = Vec::new();
    let mut examined = 0u64;
    let mut counts = vec![0u32; m];
    for size in 0..=k {
        for approved in k_subsets(m, size) {
            let members: Vec<CandidateId> = approved.iter().collect();
            counts.iter_mut().for_each(|c| *c = 0);
            for c in &members {
                counts[c.0] = 1;
            }
            let mut owner = vec![0usize; size];
            loop {
                let mut ballots = vec![Ballot::empty(); n];
                for (c, &i) in members.iter().zip(&owner) {
                    ballots[i].insert(*c);
                }
                examined += 1;
                if holds(&engine, &ballots, &counts, EquilibriumKind::Lazy) {
                    found.push(BallotProfile::from_ballots(ballots));
                }
                let mut pos = 0;
                while pos < size {
                    owner[pos] += 1;
                    if owner[pos] < n {
                        break;
                    }
                    owner[pos] = 0;
                    pos += 1;
                }
                if pos == size {
                    break;
                }
            }
        }
    }
    EquilibriumSet::from_profiles(&engine, EquilibriumKind::Lazy, found, examined)
}

/// `s(c, A) = 0` off the committee and `s(c, A) <= 1` on it.
pub fn lazy_score_facts(instance: &ElectionInstance, certificate: &EquilibriumCertificate) -> bool {
    let counts = certificate.profile.counts(instance.m());
    counts.iter().enumerate().all(|(c, &s)| {
        if certificate.committee.contains(CandidateId(c)) {
            s <= 1
        } else {
            s == 0
        }
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Dichotomy {
    /// `W* ⊆ W`.
    ContainsIdeal,
    /// `W ⊊ W*`.
    InsideIdeal,
    /// Neither; impossible for a genuine lazy equilibrium with full-rank
    /// voters.
    Violation,
}

fn require_lazy_full_rank(instance: &ElectionInstance, certificate: &EquilibriumCertificate) -> Result<()> {
    if certificate.kind != EquilibriumKind::Lazy {
        return Err(precondition("certificate is not a lazy equilibrium"));
    }
    if let Some(i) = instance.voters().iter().position(|v| !v.is_full_rank()) {
        return Err(precondition(format!(
            "voter {i} does not have a full-rank set-extension, so the lazy characterization does not apply"
        )));
    }
    Ok(())
}

pub fn classify_lazy_dichotomy(instance: &ElectionInstance, certificate: &EquilibriumCertificate) -> Result<Dichotomy> {
    require_lazy_full_rank(instance, certificate)?;
    let ideal = ideal_union(instance);
    let w = certificate.committee;
    Ok(if ideal.is_subset(w) {
        Dichotomy::ContainsIdeal
    } else if w.is_subset(ideal) {
        Dichotomy::InsideIdeal
    } else {
        Dichotomy::Violation
    })
}

/// Why a committee containing `W*` cannot be a lazy equilibrium.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ContainmentFailure {
    /// Member of `W − W*`...
    pub member: CandidateId,
    /// ...outranked in priority by this excluded candidate.
    pub excluded: CandidateId,
}

/// For `W ⊇ W*`: every member outside `W*` must out-prioritize every
/// candidate outside `W`. Returns the first offending pair, if any.
pub fn containment_condition(instance: &ElectionInstance, committee: Committee) -> Result<Option<ContainmentFailure>> {
    instance.check_committee(committee)?;
    let ideal = ideal_union(instance);
    if !ideal.is_subset(committee) {
        return Err(precondition("committee does not contain the ideal union W*"));
    }
    let priority = instance.priority();
    for member in priority.sorted(committee.difference(ideal)).into_iter().rev() {
        if let Some(&excluded) = priority
            .ranking()
            .iter()
            .take(priority.rank(member))
            .find(|&&c| !committee.contains(c))
        {
            return Ok(Some(ContainmentFailure { member, excluded }));
        }
    }
    Ok(None)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ContainmentOutcome {
    Certified(EquilibriumCertificate),
    Impossible(ContainmentFailure),
}

/// Builds a lazy equilibrium whose committee contains `W*` (requires
/// `|W*| <= k`). Walks `W*` from lowest priority upwards, giving a single
/// approval to each member that the tie-break alone would not seat, then
/// verifies the result. With a `target` committee, first checks the
/// containment condition for it.
pub fn construct_containment_pne<R: ApprovalRule + ?Sized>(
    instance: &ElectionInstance,
    rule: &R,
    target: Option<Committee>,
) -> Result<ContainmentOutcome> {
    if !rule.is_standard_av() {
        return Err(precondition("the containment construction requires the standard AV rule"));
    }
    let k = instance.k();
    let ideal = ideal_union(instance);
    if ideal.len() > k {
        return Err(precondition(format!(
            "|W*| = {} exceeds k = {k}; use the pruned lazy enumerator instead",
            ideal.len()
        )));
    }
    if let Some(t) = target {
        if let Some(failure) = containment_condition(instance, t)? {
            return Ok(ContainmentOutcome::Impossible(failure));
        }
    }
    let priority = instance.priority();
    let members = priority.sorted(ideal);
    let mut ballots = vec![Ballot::empty(); instance.n()];
    for (voted, &c) in members.iter().rev().enumerate() {
        // 1-based priority rank must fit among the k - voted seats left to ties
        if priority.rank(c) < k - voted {
            break;
        }
        let voter = instance
            .voters()
            .iter()
            .position(|v| v.ideal_set().contains(c))
            .expect("every member of W* is in some voter's ideal set");
        ballots[voter].insert(c);
    }
    let profile = BallotProfile::from_ballots(ballots);
    match verify_equilibrium(instance, rule, &profile, EquilibriumKind::Lazy)? {
        Verdict::Equilibrium(cert) => {
            if let Some(t) = target {
                if cert.committee != t {
                    return Err(Error::Invariant(
                        "target satisfies the containment condition but differs from the constructed committee".into(),
                    ));
                }
            }
            Ok(ContainmentOutcome::Certified(cert))
        }
        Verdict::Deviation(w) => Err(Error::Invariant(format!(
            "containment construction produced a non-equilibrium (voter {} deviates)",
            w.voter
        ))),
    }
}

/// Checks, over a lazy equilibrium set, that a committee `W ⊇ W*` is an
/// equilibrium committee exactly when [`containment_condition`] holds.
/// Returns the committees where the two disagree (empty unless `|W*| > k`
/// makes the question vacuous).
pub fn containment_mismatches(instance: &ElectionInstance, lazy: &EquilibriumSet) -> Result<Vec<Committee>> {
    let ideal = ideal_union(instance);
    let mut out = Vec::new();
    if ideal.len() > instance.k() {
        return Ok(out);
    }
    for w in k_subsets(instance.m(), instance.k()).filter(|w| ideal.is_subset(*w)) {
        let predicted = containment_condition(instance, w)?.is_none();
        let actual = lazy.committees.contains(&w);
        if predicted != actual {
            out.push(w);
        }
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SigmaCheck {
    /// 1-based priority rank of the lowest-priority winner.
    pub sigma_k: usize,
    /// `sigma_k > k`.
    pub rank_condition: bool,
    /// `(voter, c_j)` pairs where the voter counts the lowest-priority winner
    /// among their top `j*` members of `W` but prefers the unelected,
    /// higher-priority `c_j`.
    pub unanimity_failures: Vec<(usize, CandidateId)>,
}

impl SigmaCheck {
    pub fn passed(&self) -> bool {
        self.rank_condition && self.unanimity_failures.is_empty()
    }
}

/// Necessary conditions for a lazy equilibrium with `W ⊊ W*`.
pub fn check_sigma_condition(instance: &ElectionInstance, certificate: &EquilibriumCertificate) -> Result<SigmaCheck> {
    require_lazy_full_rank(instance, certificate)?;
    let w = certificate.committee;
    let ideal = ideal_union(instance);
    if !(w.is_subset(ideal) && w != ideal) {
        return Err(precondition("committee is not a proper subset of W*"));
    }
    let priority = instance.priority();
    let last = *priority.sorted(w).last().expect("non-empty committee");
    let sigma_k = priority.rank(last) + 1;
    let mut failures = Vec::new();
    for (i, v) in instance.voters().iter().enumerate() {
        let counts_last = v.sorted(w).iter().take(v.j_star()).any(|&c| c == last);
        if !counts_last {
            continue;
        }
        for &cj in priority.ranking().iter().take(sigma_k - 1) {
            if !w.contains(cj) && !v.prefers(last, cj) {
                failures.push((i, cj));
            }
        }
    }
    Ok(SigmaCheck {
        sigma_k,
        rank_condition: sigma_k > instance.k(),
        unanimity_failures: failures,
    })
}

/// Single-winner lazy equilibria predicted from preferences and priority:
/// `{c_j}` qualifies if it is everyone's top choice, or if `j > 1`, it is
/// someone's top choice and every voter prefers it to all higher-priority
/// candidates.
pub fn k1_characterization(instance: &ElectionInstance) -> Result<Vec<Committee>> {
    if instance.k() != 1 {
        return Err(precondition("the single-winner characterization needs k = 1"));
    }
    let priority = instance.priority();
    let voters = instance.voters();
    let mut out = Vec::new();
    for (j, &c) in priority.ranking().iter().enumerate() {
        let unanimous = voters.iter().all(|v| v.top_choice() == c);
        let clause_two = j > 0
            && voters.iter().any(|v| v.top_choice() == c)
            && priority.ranking()[..j]
                .iter()
                .all(|&l| voters.iter().all(|v| v.prefers(c, l)));
        if unanimous || clause_two {
            out.push(CandidateSet::singleton(c));
        }
    }
    out.sort();
    Ok(out)
}

/// Builds a sincere equilibrium when `n > m`: for `k` rounds, pick a
/// remaining candidate that at least two voters rank first among the
/// remaining ones, and have each of those voters approve their whole
/// preference prefix down to it. Winners end with score >= 2 and nobody
/// else is approved. With `non_empty`, abstainers approve everyone instead.
pub fn construct_sincere_pne<R: ApprovalRule + ?Sized>(
    instance: &ElectionInstance,
    rule: &R,
    non_empty: bool,
) -> Result<EquilibriumCertificate> {
    if !rule.is_standard_av() {
        return Err(precondition("the sincere construction requires the standard AV rule"));
    }
    let (m, n) = (instance.m(), instance.n());
    if n <= m {
        return Err(precondition(format!("needs more voters than candidates (n={n}, m={m})")));
    }
    let priority = instance.priority();
    let mut remaining = instance.candidates();
    let mut ballots = vec![Ballot::empty(); n];
    for _ in 0..instance.k() {
        let firsts: Vec<CandidateId> = instance
            .voters()
            .iter()
            .map(|v| *v.preference().iter().find(|&&c| remaining.contains(c)).expect("remaining is non-empty"))
            .collect();
        let mut support = vec![0usize; m];
        for c in &firsts {
            support[c.0] += 1;
        }
        let pick = priority
            .ranking()
            .iter()
            .copied()
            .max_by(|&a, &b| support[a.0].cmp(&support[b.0]).then(priority.rank(b).cmp(&priority.rank(a))))
            .expect("candidates exist");
        if support[pick.0] < 2 {
            return Err(Error::Invariant("pigeonhole step found no doubly supported candidate".into()));
        }
        for (i, v) in instance.voters().iter().enumerate() {
            if firsts[i] == pick {
                ballots[i] = v.prefix(v.position(pick) + 1);
            }
        }
        remaining.remove(pick);
    }
    if non_empty {
        for b in ballots.iter_mut().filter(|b| b.is_empty()) {
            *b = instance.candidates();
        }
    }
    let profile = BallotProfile::from_ballots(ballots);
    match verify_equilibrium(instance, rule, &profile, EquilibriumKind::Sincere)? {
        Verdict::Equilibrium(cert) => Ok(cert),
        Verdict::Deviation(w) => Err(Error::Invariant(format!(
            "sincere construction produced a non-equilibrium (voter {} deviates)",
            w.voter
        ))),
    }
}

/// Sum of voter utilities for the certified committee.
pub fn welfare(instance: &ElectionInstance, certificate: &EquilibriumCertificate) -> Result<Rational> {
    social_welfare(instance, certificate.committee)
}
