//! Best responses: exhaustive BR/MBR scans, sincere ballots, the sincere
//! completion of a minimal best response, and ballot-length restrictions.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::error::{contract, precondition, Error, Result};
use crate::model::{Ballot, CandidateId, CandidateSet, Committee, ElectionInstance, PriorityOrder, Rational, UtilityTable};
use crate::rules::{ApprovalRule, BallotProfile, RuleSpec};

/// Ballot-length restriction `|A_i| <= R`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum LengthRestriction {
    Unrestricted,
    AtMost(usize),
}

impl LengthRestriction {
    /// Effective cap on ballot size; `R >= m` behaves as unrestricted.
    pub fn limit(self, m: usize) -> usize {
        match self {
            LengthRestriction::Unrestricted => m,
            LengthRestriction::AtMost(r) => r.min(m),
        }
    }

    pub fn is_restricting(self, m: usize) -> bool {
        self.limit(m) < m
    }

    pub fn admits(self, ballot: Ballot, m: usize) -> bool {
        ballot.len() <= self.limit(m)
    }
}

/// Caps for exhaustive searches.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SearchLimits {
    /// Largest `m` for a single-voter scan over all `2^m` ballots.
    pub max_candidates: usize,
    /// Largest number of ballot profiles a naive enumeration may visit.
    pub max_profiles: u64,
}

impl Default for SearchLimits {
    fn default() -> Self {
        SearchLimits {
            max_candidates: 12,
            max_profiles: 1 << 24,
        }
    }
}

/// Orders ballots by size, then by the sorted priority ranks of their
/// members (so higher-priority candidates come first).
pub fn canonical_cmp(priority: &PriorityOrder, a: Ballot, b: Ballot) -> Ordering {
    let key = |x: Ballot| {
        let mut r: Vec<usize> = x.iter().map(|c| priority.rank(c)).collect();
        r.sort_unstable();
        r
    };
    a.len().cmp(&b.len()).then_with(|| key(a).cmp(&key(b)))
}

/// Shared state for repeated best-response scans on one instance: the
/// utility rank table plus the rule.
pub struct BestResponseEngine<'a, R: ApprovalRule + ?Sized> {
    instance: &'a ElectionInstance,
    rule: &'a R,
    table: UtilityTable,
    ballots: Vec<Ballot>,
}

/// Result of one integer-ranked scan.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ScanSummary {
    pub best_rank: u32,
    pub mbr_size: usize,
}

impl<'a, R: ApprovalRule + ?Sized> BestResponseEngine<'a, R> {
    pub fn new(instance: &'a ElectionInstance, rule: &'a R, limits: SearchLimits) -> Result<Self> {
        let m = instance.m();
        if m > limits.max_candidates {
            return Err(Error::Capacity {
                what: "best-response scan candidates",
                requested: m as u64,
                limit: limits.max_candidates as u64,
            });
        }
        if rule.committee_size() != instance.k() {
            return Err(contract("rule committee size differs from the instance's k"));
        }
        let table = UtilityTable::build(instance)?;
        let mut ballots: Vec<Ballot> = (0..1u64 << m).map(CandidateSet::from_bits).collect();
        ballots.sort_by_key(|b| (b.len(), b.bits()));
        Ok(BestResponseEngine {
            instance,
            rule,
            table,
            ballots,
        })
    }

    pub fn instance(&self) -> &ElectionInstance {
        self.instance
    }

    pub fn rule(&self) -> &R {
        self.rule
    }

    pub fn table(&self) -> &UtilityTable {
        &self.table
    }

    /// Every ballot, ordered by size.
    pub fn ballots(&self) -> &[Ballot] {
        &self.ballots
    }

    /// Committee elected when `ballot` is added to `base` counts.
    #[inline]
    pub fn outcome(&self, base: &[u32], ballot: Ballot) -> Committee {
        let mut counts = [0u32; 64];
        let counts = &mut counts[..base.len()];
        counts.copy_from_slice(base);
        for c in ballot.iter() {
            counts[c.0] += 1;
        }
        self.rule.elect_counts(counts)
    }

    #[inline]
    pub fn rank_of(&self, voter: usize, base: &[u32], ballot: Ballot) -> u32 {
        self.table.rank(voter, self.outcome(base, ballot))
    }

    /// Best achievable rank and minimal best-response size among ballots of
    /// size at most `limit`.
    pub fn scan(&self, voter: usize, base: &[u32], limit: usize) -> ScanSummary {
        let mut best = ScanSummary {
            best_rank: 0,
            mbr_size: usize::MAX,
        };
        for &b in self.ballots.iter().take_while(|b| b.len() <= limit) {
            let r = self.rank_of(voter, base, b);
            if best.mbr_size == usize::MAX || r > best.best_rank {
                best = ScanSummary {
                    best_rank: r,
                    mbr_size: b.len(),
                };
            }
        }
        best
    }

    /// All ballots of size at most `limit` reaching `rank`, canonically
    /// ordered.
    pub fn ballots_reaching(&self, voter: usize, base: &[u32], limit: usize, rank: u32) -> Vec<Ballot> {
        let mut out: Vec<Ballot> = self
            .ballots
            .iter()
            .take_while(|b| b.len() <= limit)
            .copied()
            .filter(|&b| self.rank_of(voter, base, b) == rank)
            .collect();
        out.sort_by(|&a, &b| canonical_cmp(self.instance.priority(), a, b));
        out
    }

    /// The canonical minimal best response within `limit`.
    pub fn canonical_mbr(&self, voter: usize, base: &[u32], limit: usize) -> (ScanSummary, Ballot) {
        let summary = self.scan(voter, base, limit);
        let ballot = self
            .ballots
            .iter()
            .copied()
            .filter(|b| b.len() == summary.mbr_size)
            .filter(|&b| self.rank_of(voter, base, b) == summary.best_rank)
            .min_by(|&a, &b| canonical_cmp(self.instance.priority(), a, b))
            .expect("the scan found at least one maximizer");
        (summary, ballot)
    }

    /// Best sincere prefix of length at most `limit`: shortest among the
    /// maximizers.
    pub fn best_prefix(&self, voter: usize, base: &[u32], limit: usize) -> (usize, u32) {
        let v = &self.instance.voters()[voter];
        let mut best: Option<(usize, u32)> = None;
        for len in 0..=limit.min(self.instance.m()) {
            let r = self.rank_of(voter, base, v.prefix(len));
            if best.is_none_or(|(_, br)| r > br) {
                best = Some((len, r));
            }
        }
        best.expect("at least the empty prefix")
    }
}

/// Best responses restricted to the feasible ballots `|A_i| <= R`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RestrictedBestResponse {
    pub limit: usize,
    pub utility: Rational,
    pub br_ballots: Vec<Ballot>,
    pub mbr_size: usize,
    pub mbr_ballots: Vec<Ballot>,
}

/// Outcome of an exhaustive best-response scan for one voter.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BestResponseReport {
    pub voter: usize,
    /// Maximum utility over all `2^m` ballots.
    pub achievable_utility: Rational,
    /// Every unrestricted maximizer, canonically ordered.
    pub br_ballots: Vec<Ballot>,
    pub mbr_size: usize,
    pub mbr_ballots: Vec<Ballot>,
    /// Present when a proper restriction `R < m` was requested.
    pub restricted: Option<RestrictedBestResponse>,
}

fn check_voter_and_profile(instance: &ElectionInstance, voter: usize, others: &BallotProfile) -> Result<()> {
    instance.voter(voter)?;
    BallotProfile::new(instance, others.ballots().to_vec()).map(|_| ())
}

/// Exhaustive best-response scan. `others` is a full profile; the entry for
/// `voter` is ignored.
pub fn brute_force_best_responses<R: ApprovalRule + ?Sized>(
    instance: &ElectionInstance,
    rule: &R,
    voter: usize,
    others: &BallotProfile,
    restriction: LengthRestriction,
) -> Result<BestResponseReport> {
    brute_force_best_responses_with(instance, rule, voter, others, restriction, SearchLimits::default())
}

pub fn brute_force_best_responses_with<R: ApprovalRule + ?Sized>(
    instance: &ElectionInstance,
    rule: &R,
    voter: usize,
    others: &BallotProfile,
    restriction: LengthRestriction,
    limits: SearchLimits,
) -> Result<BestResponseReport> {
    check_voter_and_profile(instance, voter, others)?;
    let engine = BestResponseEngine::new(instance, rule, limits)?;
    Ok(engine_report(&engine, voter, others, restriction))
}

pub(crate) fn engine_report<R: ApprovalRule + ?Sized>(
    engine: &BestResponseEngine<'_, R>,
    voter: usize,
    others: &BallotProfile,
    restriction: LengthRestriction,
) -> BestResponseReport {
    let m = engine.instance.m();
    let base = others.counts_without(m, voter);
    let table = engine.table();
    let full = engine.scan(voter, &base, m);
    let br_ballots = engine.ballots_reaching(voter, &base, m, full.best_rank);
    let mbr_ballots: Vec<_> = br_ballots.iter().copied().filter(|b| b.len() == full.mbr_size).collect();
    let restricted = restriction.is_restricting(m).then(|| {
        let limit = restriction.limit(m);
        let part = engine.scan(voter, &base, limit);
        let br = engine.ballots_reaching(voter, &base, limit, part.best_rank);
        let mbr = br.iter().copied().filter(|b| b.len() == part.mbr_size).collect();
        RestrictedBestResponse {
            limit,
            utility: table.value(voter, part.best_rank).clone(),
            br_ballots: br,
            mbr_size: part.mbr_size,
            mbr_ballots: mbr,
        }
    });
    BestResponseReport {
        voter,
        achievable_utility: table.value(voter, full.best_rank).clone(),
        br_ballots,
        mbr_size: full.mbr_size,
        mbr_ballots,
        restricted,
    }
}

/// Size of a minimal best response among feasible ballots and the canonical
/// (priority-lexicographically least) one.
pub fn minimal_best_response<R: ApprovalRule + ?Sized>(
    instance: &ElectionInstance,
    rule: &R,
    voter: usize,
    others: &BallotProfile,
    restriction: LengthRestriction,
) -> Result<(usize, Ballot)> {
    check_voter_and_profile(instance, voter, others)?;
    let engine = BestResponseEngine::new(instance, rule, SearchLimits::default())?;
    let base = others.counts_without(instance.m(), voter);
    let (summary, ballot) = engine.canonical_mbr(voter, &base, restriction.limit(instance.m()));
    Ok((summary.mbr_size, ballot))
}

/// Whether the ballot is a top-prefix of the voter's ranking.
pub fn is_sincere(instance: &ElectionInstance, voter: usize, ballot: Ballot) -> Result<bool> {
    let v = instance.voter(voter)?;
    if !ballot.is_subset(instance.candidates()) {
        return Err(contract("ballot references an unknown candidate"));
    }
    Ok(v.prefix(ballot.len()) == ballot)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SincereBestResponse {
    pub ballot: Ballot,
    pub utility: Rational,
    /// Best utility over all `m + 1` prefixes, ignoring the restriction.
    pub unrestricted_utility: Rational,
    /// False when the restriction excludes every optimal sincere ballot.
    pub attains_unrestricted_optimum: bool,
}

/// Scans the voter's `m + 1` sincere ballots (or those of length `<= R`).
pub fn sincere_best_response<R: ApprovalRule + ?Sized>(
    instance: &ElectionInstance,
    rule: &R,
    voter: usize,
    others: &BallotProfile,
    restriction: LengthRestriction,
) -> Result<SincereBestResponse> {
    check_voter_and_profile(instance, voter, others)?;
    let engine = BestResponseEngine::new(instance, rule, SearchLimits::default())?;
    let m = instance.m();
    let base = others.counts_without(m, voter);
    let (len, rank) = engine.best_prefix(voter, &base, restriction.limit(m));
    let (_, full_rank) = engine.best_prefix(voter, &base, m);
    let table = engine.table();
    Ok(SincereBestResponse {
        ballot: instance.voters()[voter].prefix(len),
        utility: table.value(voter, rank).clone(),
        unrestricted_utility: table.value(voter, full_rank).clone(),
        attains_unrestricted_optimum: rank == full_rank,
    })
}

/// Turns a minimal best-response ballot into a sincere one by repeatedly
/// approving the most preferred unapproved candidate ranked above the least
/// preferred approved one. Utility must stay constant throughout.
///
/// Any best response is accepted, but constancy is only guaranteed from a
/// minimal one: a drop that starts from a longer best response is reported
/// as [`Error::Precondition`], a drop from a minimal one as
/// [`Error::Invariant`].
pub fn sincere_completion<R: ApprovalRule + ?Sized>(
    instance: &ElectionInstance,
    rule: &R,
    voter: usize,
    others: &BallotProfile,
    ballot: Ballot,
) -> Result<Ballot> {
    check_voter_and_profile(instance, voter, others)?;
    if !ballot.is_subset(instance.candidates()) {
        return Err(contract("ballot references an unknown candidate"));
    }
    let v = instance.voter(voter)?;
    let m = instance.m();
    let base = others.counts_without(m, voter);
    let utility_of = |b: Ballot| -> Rational {
        let mut counts = base.clone();
        for c in b.iter() {
            counts[c.0] += 1;
        }
        v.committee_utility(rule.elect_counts(&counts))
    };
    let start = utility_of(ballot);
    let engine = BestResponseEngine::new(instance, rule, SearchLimits::default())?;
    let best = engine.scan(voter, &base, m);
    if start < *engine.table().value(voter, best.best_rank) {
        return Err(precondition(format!(
            "ballot {} is not a best response",
            instance.format_set(ballot)
        )));
    }
    let minimal = ballot.len() == best.mbr_size;
    let mut current = ballot;
    loop {
        let Some(least) = v.sorted(current).last().copied() else {
            return Ok(current);
        };
        let missing = v
            .preference()
            .iter()
            .take(v.position(least))
            .copied()
            .find(|&c| !current.contains(c));
        let Some(c) = missing else {
            return Ok(current);
        };
        current.insert(c);
        let now = utility_of(current);
        match now.cmp(&start) {
            Ordering::Equal => {}
            Ordering::Less if !minimal => {
                return Err(precondition(format!(
                    "approving candidate {} dropped utility from {start} to {now}; \
                     completion is only guaranteed from a minimal best response",
                    instance.name(c)
                )))
            }
            Ordering::Less => {
                return Err(Error::Invariant(format!(
                    "approving candidate {} dropped utility from {start} to {now}; \
                     the rule is not monotonically robust",
                    instance.name(c)
                )))
            }
            Ordering::Greater => {
                return Err(precondition(format!(
                    "approving candidate {} raised utility from {start} to {now}; \
                     the starting ballot was not a best response",
                    instance.name(c)
                )))
            }
        }
    }
}

/// Best feasible utility for every `R = 0..=m` (index = `R`).
pub fn restricted_optima<R: ApprovalRule + ?Sized>(
    instance: &ElectionInstance,
    rule: &R,
    voter: usize,
    others: &BallotProfile,
) -> Result<Vec<Rational>> {
    check_voter_and_profile(instance, voter, others)?;
    let engine = BestResponseEngine::new(instance, rule, SearchLimits::default())?;
    let m = instance.m();
    let base = others.counts_without(m, voter);
    Ok((0..=m)
        .map(|r| engine.table().value(voter, engine.scan(voter, &base, r).best_rank).clone())
        .collect())
}

/// How [`constraining_witness`] may choose the tie-breaking order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum WitnessMode {
    /// First try a priority order that ranks the voter's ideal set last with
    /// everyone else abstaining, then search profiles under the instance's
    /// own priority.
    SynthesizedPriority,
    /// Only search others-profiles under the instance's priority.
    FixedPriority,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConstrainingWitness {
    /// Tie-breaking order under which the witness holds.
    pub priority: Vec<CandidateId>,
    /// Everyone's ballots; the voter's own entry is empty.
    pub others: BallotProfile,
    pub unrestricted_utility: Rational,
    pub restricted_utility: Rational,
    pub gap: Rational,
    /// Built from the all-abstain construction rather than found by search.
    pub canonical: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConstrainingSearch {
    pub witness: Option<ConstrainingWitness>,
    /// The profile search covered the whole space, so `witness == None`
    /// proves the restriction is not constraining for this voter (under the
    /// instance's priority).
    pub exhaustive: bool,
    pub profiles_examined: u64,
}

/// Looks for others-profiles under which every unrestricted best response
/// of `voter` is longer than `limit`, reporting the exact utility lost.
/// Other voters' ballots are also held to `limit`.
pub fn constraining_witness(
    instance: &ElectionInstance,
    rule: &RuleSpec,
    voter: usize,
    limit: usize,
    budget: u64,
    mode: WitnessMode,
) -> Result<ConstrainingSearch> {
    let v = instance.voter(voter)?;
    let (m, n) = (instance.m(), instance.n());
    if limit >= m {
        return Err(precondition(format!("restriction R={limit} must be below m={m}")));
    }
    if mode == WitnessMode::SynthesizedPriority {
        // ideal set last in priority, everyone else abstains
        let ideal = v.ideal_set();
        let ranking: Vec<CandidateId> = instance
            .priority()
            .ranking()
            .iter()
            .copied()
            .filter(|&c| !ideal.contains(c))
            .chain(instance.priority().ranking().iter().copied().filter(|&c| ideal.contains(c)))
            .collect();
        let priority = PriorityOrder::new(ranking.clone())?;
        let synth_instance = instance.with_priority(priority.clone())?;
        let synth_rule = rule.with_priority(priority)?;
        let engine = BestResponseEngine::new(&synth_instance, &synth_rule, SearchLimits::default())?;
        let others = BallotProfile::empty(n);
        if let Some(w) = gap_witness(&engine, voter, &others, limit, ranking, true) {
            return Ok(ConstrainingSearch {
                witness: Some(w),
                exhaustive: false,
                profiles_examined: 1,
            });
        }
    }

    let engine = BestResponseEngine::new(instance, rule, SearchLimits::default())?;
    let feasible: Vec<Ballot> = engine.ballots().iter().copied().filter(|b| b.len() <= limit).collect();
    let slots: Vec<usize> = (0..n).filter(|&i| i != voter).collect();
    let mut digits = vec![0usize; slots.len()];
    let mut examined = 0u64;
    loop {
        if examined >= budget {
            return Ok(ConstrainingSearch {
                witness: None,
                exhaustive: false,
                profiles_examined: examined,
            });
        }
        let mut ballots = vec![Ballot::empty(); n];
        for (slot, &d) in slots.iter().zip(&digits) {
            ballots[*slot] = feasible[d];
        }
        let others = BallotProfile::from_ballots(ballots);
        examined += 1;
        let ranking = instance.priority().ranking().to_vec();
        if let Some(w) = gap_witness(&engine, voter, &others, limit, ranking, false) {
            return Ok(ConstrainingSearch {
                witness: Some(w),
                exhaustive: false,
                profiles_examined: examined,
            });
        }
        // odometer over the feasible ballots of the other voters
        let mut pos = 0;
        loop {
            if pos == digits.len() {
                return Ok(ConstrainingSearch {
                    witness: None,
                    exhaustive: true,
                    profiles_examined: examined,
                });
            }
            digits[pos] += 1;
            if digits[pos] < feasible.len() {
                break;
            }
            digits[pos] = 0;
            pos += 1;
        }
    }
}

fn gap_witness(
    engine: &BestResponseEngine<'_, RuleSpec>,
    voter: usize,
    others: &BallotProfile,
    limit: usize,
    priority: Vec<CandidateId>,
    canonical: bool,
) -> Option<ConstrainingWitness> {
    let m = engine.instance().m();
    let base = others.counts_without(m, voter);
    let full = engine.scan(voter, &base, m);
    if full.mbr_size <= limit {
        return None;
    }
    let part = engine.scan(voter, &base, limit);
    let table = engine.table();
    let unrestricted = table.value(voter, full.best_rank).clone();
    let restricted = table.value(voter, part.best_rank).clone();
    let gap = &unrestricted - &restricted;
    Some(ConstrainingWitness {
        priority,
        others: others.with_ballot(voter, Ballot::empty()),
        unrestricted_utility: unrestricted,
        restricted_utility: restricted,
        gap,
        canonical,
    })
}
