//! Non-degenerate best-k approval scoring rules with lexicographic
//! tie-breaking, and samplers for the two monotonicity properties those
//! rules satisfy.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{contract, precondition, Error, Result};
use crate::model::{Ballot, CandidateId, CandidateSet, Committee, ElectionInstance, PriorityOrder, Rational};

/// The joint ballot profile `A = (A_1, ..., A_n)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct BallotProfile {
    ballots: Vec<Ballot>,
}

impl BallotProfile {
    pub fn new(instance: &ElectionInstance, ballots: Vec<Ballot>) -> Result<Self> {
        if ballots.len() != instance.n() {
            return Err(contract(format!(
                "profile has {} ballots, instance has {} voters",
                ballots.len(),
                instance.n()
            )));
        }
        let all = instance.candidates();
        if let Some(i) = ballots.iter().position(|b| !b.is_subset(all)) {
            return Err(contract(format!("ballot {i} references an unknown candidate")));
        }
        Ok(BallotProfile { ballots })
    }

    /// Everyone abstains.
    pub fn empty(n: usize) -> Self {
        BallotProfile {
            ballots: vec![Ballot::empty(); n],
        }
    }

    pub(crate) fn from_ballots(ballots: Vec<Ballot>) -> Self {
        BallotProfile { ballots }
    }

    pub fn ballots(&self) -> &[Ballot] {
        &self.ballots
    }

    pub fn ballot(&self, voter: usize) -> Ballot {
        self.ballots[voter]
    }

    pub fn len(&self) -> usize {
        self.ballots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ballots.is_empty()
    }

    #[must_use]
    pub fn with_ballot(&self, voter: usize, ballot: Ballot) -> Self {
        let mut ballots = self.ballots.clone();
        ballots[voter] = ballot;
        BallotProfile { ballots }
    }

    /// Approval counts `s(c, A)` for candidates `0..m`.
    pub fn counts(&self, m: usize) -> Vec<u32> {
        let mut counts = vec![0u32; m];
        for b in &self.ballots {
            for c in b.iter() {
                counts[c.0] += 1;
            }
        }
        counts
    }

    /// Approval counts ignoring one voter's ballot.
    pub fn counts_without(&self, m: usize, voter: usize) -> Vec<u32> {
        let mut counts = self.counts(m);
        for c in self.ballots[voter].iter() {
            counts[c.0] -= 1;
        }
        counts
    }

    /// `a,b;;c` style rendering, ballots separated by `;`.
    pub fn format(&self, instance: &ElectionInstance) -> String {
        self.ballots
            .iter()
            .map(|&b| {
                instance
                    .priority()
                    .sorted(b)
                    .into_iter()
                    .map(|c| instance.name(c))
                    .collect::<Vec<_>>()
                    .join(",")
            })
            .collect::<Vec<_>>()
            .join(";")
    }

    /// Inverse of [`BallotProfile::format`].
    pub fn parse(instance: &ElectionInstance, text: &str) -> Result<Self> {
        let ballots = text
            .split(';')
            .map(|part| instance.parse_set(part))
            .collect::<Result<Vec<_>>>()?;
        BallotProfile::new(instance, ballots)
    }
}

/// A best-k rule seen only through per-candidate approval counts. Anonymity
/// is built in: voters never appear in the signature.
pub trait ApprovalRule: Sync {
    /// Committee size `k`.
    fn committee_size(&self) -> usize;

    /// The winning committee for the given counts `s(c, A)`.
    fn elect_counts(&self, counts: &[u32]) -> Committee;

    /// The standard AV rule; several constructions only apply to it.
    fn is_standard_av(&self) -> bool {
        false
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum RuleKind {
    /// `f(c, A) = s(c, A)`.
    StandardAv,
    /// `f(c, A) = w(c) s(c, A)` with all `w(c) > 0`.
    CandidateWeighted(Vec<Rational>),
}

/// A concrete non-degenerate best-k rule bound to a committee size and a
/// priority order.
#[derive(Clone, Debug)]
pub struct RuleSpec {
    kind: RuleKind,
    k: usize,
    priority: PriorityOrder,
    // weights scaled to a common denominator; all ones for AV
    scaled: Vec<u128>,
}

impl RuleSpec {
    pub fn new(instance: &ElectionInstance, kind: RuleKind) -> Result<Self> {
        Self::with_parts(kind, instance.k(), instance.priority().clone())
    }

    pub fn standard_av(instance: &ElectionInstance) -> Self {
        Self::new(instance, RuleKind::StandardAv).expect("AV is always valid")
    }

    pub fn candidate_weighted(instance: &ElectionInstance, weights: Vec<Rational>) -> Result<Self> {
        Self::new(instance, RuleKind::CandidateWeighted(weights))
    }

    fn with_parts(kind: RuleKind, k: usize, priority: PriorityOrder) -> Result<Self> {
        let m = priority.len();
        let scaled = match &kind {
            RuleKind::StandardAv => vec![1u128; m],
            RuleKind::CandidateWeighted(w) => scale_weights(w, m)?,
        };
        Ok(RuleSpec {
            kind,
            k,
            priority,
            scaled,
        })
    }

    /// The same scoring function with another tie-breaking order.
    pub fn with_priority(&self, priority: PriorityOrder) -> Result<Self> {
        if priority.len() != self.priority.len() {
            return Err(contract("priority order has the wrong length"));
        }
        Self::with_parts(self.kind.clone(), self.k, priority)
    }

    pub fn kind(&self) -> &RuleKind {
        &self.kind
    }

    pub fn priority(&self) -> &PriorityOrder {
        &self.priority
    }

    /// `f(c, A) = g(c, s)`.
    pub fn score(&self, c: CandidateId, count: u32) -> Rational {
        let s = Rational::from_integer(BigInt::from(count));
        match &self.kind {
            RuleKind::StandardAv => s,
            RuleKind::CandidateWeighted(w) => &w[c.0] * s,
        }
    }
}

fn scale_weights(weights: &[Rational], m: usize) -> Result<Vec<u128>> {
    if weights.len() != m {
        return Err(contract(format!("expected {m} candidate weights, got {}", weights.len())));
    }
    if let Some(w) = weights.iter().find(|w| !w.is_positive()) {
        return Err(contract(format!("candidate weight {w} must be strictly positive")));
    }
    let lcm = weights
        .iter()
        .fold(BigInt::one(), |acc, w| acc.lcm(w.denom()));
    let too_big = || contract("candidate weights are too large to compare exactly");
    weights
        .iter()
        .map(|w| {
            let v = w.numer() * (&lcm / w.denom());
            // leave headroom for multiplying by a count below 2^32
            v.to_u128().filter(|&x| x < (1u128 << 90)).ok_or_else(too_big)
        })
        .collect()
}

impl ApprovalRule for RuleSpec {
    fn committee_size(&self) -> usize {
        self.k
    }

    fn elect_counts(&self, counts: &[u32]) -> Committee {
        let ranking = self.priority.ranking();
        let m = ranking.len();
        debug_assert_eq!(counts.len(), m);
        let mut keyed = [(0u128, 0usize); 64];
        for (slot, (rank, c)) in keyed.iter_mut().zip(ranking.iter().enumerate()) {
            *slot = (self.scaled[c.0] * counts[c.0] as u128, rank);
        }
        let keyed = &mut keyed[..m];
        keyed.sort_unstable_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)));
        keyed[..self.k].iter().map(|&(_, rank)| ranking[rank]).collect()
    }

    fn is_standard_av(&self) -> bool {
        self.kind == RuleKind::StandardAv
    }
}

/// A rule given by an arbitrary scoring function `g(c, s)`. The caller is
/// responsible for `g` being strictly increasing in `s` with `g(c, 0) = 0`
/// if the non-degenerate results are to apply.
pub struct ScoreFunctionRule<G> {
    pub k: usize,
    pub priority: PriorityOrder,
    pub score: G,
}

impl<G> ApprovalRule for ScoreFunctionRule<G>
where
    G: Fn(CandidateId, u32) -> Rational + Sync,
{
    fn committee_size(&self) -> usize {
        self.k
    }

    fn elect_counts(&self, counts: &[u32]) -> Committee {
        let mut keyed: Vec<(Rational, usize, CandidateId)> = self
            .priority
            .ranking()
            .iter()
            .enumerate()
            .map(|(rank, &c)| ((self.score)(c, counts[c.0]), rank, c))
            .collect();
        keyed.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)));
        keyed.iter().take(self.k).map(|t| t.2).collect()
    }
}

/// Per-candidate approval counts and rule scores.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ScoreTable {
    pub counts: Vec<u32>,
    pub scores: Vec<Rational>,
}

pub fn approval_scores(
    rule: &RuleSpec,
    instance: &ElectionInstance,
    profile: &BallotProfile,
) -> Result<ScoreTable> {
    let profile = BallotProfile::new(instance, profile.ballots.clone())?;
    let counts = profile.counts(instance.m());
    let scores = counts
        .iter()
        .enumerate()
        .map(|(c, &s)| rule.score(CandidateId(c), s))
        .collect();
    Ok(ScoreTable { counts, scores })
}

/// Runs the rule on a profile.
pub fn elect<R: ApprovalRule + ?Sized>(
    rule: &R,
    instance: &ElectionInstance,
    profile: &BallotProfile,
) -> Result<Committee> {
    if profile.len() != instance.n() {
        return Err(contract("profile length does not match the voter count"));
    }
    if !profile.ballots.iter().all(|b| b.is_subset(instance.candidates())) {
        return Err(contract("profile references an unknown candidate"));
    }
    Ok(rule.elect_counts(&profile.counts(instance.m())))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MonotonicityCounterexample {
    pub before: BallotProfile,
    pub after: BallotProfile,
    pub candidate: CandidateId,
    pub committee_before: Committee,
    pub committee_after: Committee,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MonotonicityCheck {
    /// Number of (A, A') pairs examined before stopping.
    pub trials: u64,
    pub counterexample: Option<MonotonicityCounterexample>,
}

impl MonotonicityCheck {
    pub fn passed(&self) -> bool {
        self.counterexample.is_none()
    }
}

fn random_profile(rng: &mut ChaCha8Rng, m: usize, n: usize) -> Vec<Ballot> {
    let all = CandidateSet::full(m).bits();
    (0..n)
        .map(|_| CandidateSet::from_bits(rng.gen::<u64>() & all))
        .collect()
}

/// Samples pairs `(A, A')` where some winner's count weakly rises and every
/// other count weakly falls, and checks the winner survives.
pub fn check_relative_rank_monotonicity<R: ApprovalRule + ?Sized>(
    rule: &R,
    instance: &ElectionInstance,
    trials: u64,
    seed: u64,
) -> Result<MonotonicityCheck> {
    if trials == 0 {
        return Err(precondition("at least one trial is required"));
    }
    let (m, n) = (instance.m(), instance.n());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for t in 0..trials {
        let before = random_profile(&mut rng, m, n);
        let counts = BallotProfile::from_ballots(before.clone()).counts(m);
        let w = rule.elect_counts(&counts);
        let winners: Vec<_> = w.iter().collect();
        let c = *winners.choose(&mut rng).expect("committee is non-empty");
        let add_p: f64 = rng.gen();
        let drop_p: f64 = rng.gen();
        let after: Vec<Ballot> = before
            .iter()
            .map(|&b| {
                let mut b2 = b;
                for d in b.iter().filter(|&d| d != c) {
                    if rng.gen_bool(drop_p) {
                        b2.remove(d);
                    }
                }
                if rng.gen_bool(add_p) {
                    b2.insert(c);
                }
                b2
            })
            .collect();
        if let Some(cx) = rrm_violation(rule, m, &before, &after, c, w) {
            return Ok(MonotonicityCheck {
                trials: t + 1,
                counterexample: Some(cx),
            });
        }
    }
    Ok(MonotonicityCheck {
        trials,
        counterexample: None,
    })
}

fn rrm_violation<R: ApprovalRule + ?Sized>(
    rule: &R,
    m: usize,
    before: &[Ballot],
    after: &[Ballot],
    c: CandidateId,
    w: Committee,
) -> Option<MonotonicityCounterexample> {
    let after_counts = BallotProfile::from_ballots(after.to_vec()).counts(m);
    let w2 = rule.elect_counts(&after_counts);
    (!w2.contains(c)).then(|| MonotonicityCounterexample {
        before: BallotProfile::from_ballots(before.to_vec()),
        after: BallotProfile::from_ballots(after.to_vec()),
        candidate: c,
        committee_before: w,
        committee_after: w2,
    })
}

fn robustness_violation<R: ApprovalRule + ?Sized>(
    rule: &R,
    m: usize,
    before: &[Ballot],
    voter: usize,
    c: CandidateId,
    w: Committee,
) -> Option<MonotonicityCounterexample> {
    let mut after = before.to_vec();
    after[voter].insert(c);
    let w2 = rule.elect_counts(&BallotProfile::from_ballots(after.clone()).counts(m));
    let ok = w2 == w || (!w.contains(c) && w2.contains(c) && w.difference(w2).len() == 1 && w2.without(c).is_subset(w));
    (!ok).then(|| MonotonicityCounterexample {
        before: BallotProfile::from_ballots(before.to_vec()),
        after: BallotProfile::from_ballots(after),
        candidate: c,
        committee_before: w,
        committee_after: w2,
    })
}

/// Samples single reinforcements and checks the committee changes at most by
/// swapping the reinforced candidate in for one incumbent.
pub fn check_monotonic_robustness<R: ApprovalRule + ?Sized>(
    rule: &R,
    instance: &ElectionInstance,
    trials: u64,
    seed: u64,
) -> Result<MonotonicityCheck> {
    if trials == 0 {
        return Err(precondition("at least one trial is required"));
    }
    let (m, n) = (instance.m(), instance.n());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut t = 0;
    while t < trials {
        let before = random_profile(&mut rng, m, n);
        let c = CandidateId(rng.gen_range(0..m));
        let lacking: Vec<usize> = (0..n).filter(|&i| !before[i].contains(c)).collect();
        let Some(&voter) = lacking.choose(&mut rng) else {
            continue;
        };
        t += 1;
        let w = rule.elect_counts(&BallotProfile::from_ballots(before.clone()).counts(m));
        if let Some(cx) = robustness_violation(rule, m, &before, voter, c, w) {
            return Ok(MonotonicityCheck {
                trials: t,
                counterexample: Some(cx),
            });
        }
    }
    Ok(MonotonicityCheck {
        trials,
        counterexample: None,
    })
}

/// Largest `m * n` for the exhaustive checkers (512 profiles squared).
pub const MAX_EXHAUSTIVE_BITS: usize = 9;

fn all_profiles(m: usize, n: usize) -> impl Iterator<Item = Vec<Ballot>> {
    let width = m * n;
    (0u64..(1u64 << width)).map(move |code| {
        (0..n)
            .map(|i| CandidateSet::from_bits((code >> (i * m)) & ((1u64 << m) - 1)))
            .collect()
    })
}

fn exhaustive_guard(instance: &ElectionInstance) -> Result<()> {
    let bits = instance.m() * instance.n();
    if bits > MAX_EXHAUSTIVE_BITS {
        return Err(Error::Capacity {
            what: "exhaustive monotonicity check (m*n)",
            requested: bits as u64,
            limit: MAX_EXHAUSTIVE_BITS as u64,
        });
    }
    Ok(())
}

/// Relative rank monotonicity over every pair of profiles.
pub fn exhaustive_relative_rank_monotonicity<R: ApprovalRule + ?Sized>(
    rule: &R,
    instance: &ElectionInstance,
) -> Result<MonotonicityCheck> {
    exhaustive_guard(instance)?;
    let (m, n) = (instance.m(), instance.n());
    let profiles: Vec<(Vec<Ballot>, Vec<u32>)> = all_profiles(m, n)
        .map(|p| {
            let counts = BallotProfile::from_ballots(p.clone()).counts(m);
            (p, counts)
        })
        .collect();
    let mut trials = 0u64;
    for (before, counts) in &profiles {
        let w = rule.elect_counts(counts);
        for c in w.iter() {
            for (after, counts2) in &profiles {
                let hypothesis = (0..m).all(|d| {
                    if d == c.0 {
                        counts2[d] >= counts[d]
                    } else {
                        counts2[d] <= counts[d]
                    }
                });
                if !hypothesis {
                    continue;
                }
                trials += 1;
                if let Some(cx) = rrm_violation(rule, m, before, after, c, w) {
                    return Ok(MonotonicityCheck {
                        trials,
                        counterexample: Some(cx),
                    });
                }
            }
        }
    }
    Ok(MonotonicityCheck {
        trials,
        counterexample: None,
    })
}

/// Monotonic robustness over every profile, candidate and reinforcing voter.
pub fn exhaustive_monotonic_robustness<R: ApprovalRule + ?Sized>(
    rule: &R,
    instance: &ElectionInstance,
) -> Result<MonotonicityCheck> {
    exhaustive_guard(instance)?;
    let (m, n) = (instance.m(), instance.n());
    let mut trials = 0u64;
    for before in all_profiles(m, n) {
        let w = rule.elect_counts(&BallotProfile::from_ballots(before.clone()).counts(m));
        for c in (0..m).map(CandidateId) {
            for voter in (0..n).filter(|&i| !before[i].contains(c)) {
                trials += 1;
                if let Some(cx) = robustness_violation(rule, m, &before, voter, c, w) {
                    return Ok(MonotonicityCheck {
                        trials,
                        counterexample: Some(cx),
                    });
                }
            }
        }
    }
    Ok(MonotonicityCheck {
        trials,
        counterexample: None,
    })
}

/// Draws positive weights from `{1/2, 1, 3/2, ..., 4}`.
pub fn random_weights(m: usize, rng: &mut impl Rng) -> Vec<Rational> {
    (0..m)
        .map(|_| Rational::new(BigInt::from(rng.gen_range(1..=8)), BigInt::from(2)))
        .collect()
}
