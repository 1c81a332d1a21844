//! Election instances, strict preferences and OWA set-extension utilities.
//!
//! Everything here is immutable once constructed. Utilities and OWA weights
//! are exact rationals so that indifference between committees is detected
//! exactly.

use std::cmp::Ordering;
use std::collections::HashSet;
use std::fmt;

use num_rational::BigRational;
use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{contract, Error, Result};

pub type Rational = BigRational;

/// Hard upper bound on the number of candidates (sets are `u64` bitmasks).
pub const MAX_CANDIDATES: usize = 64;

/// Dense candidate index in `[0, m)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct CandidateId(pub usize);

impl CandidateId {
    pub fn index(self) -> usize {
        self.0
    }
}

/// A set of candidates stored as a bitmask over candidate indices.
#[derive(Clone, Copy, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct CandidateSet(u64);

/// An approval ballot.
pub type Ballot = CandidateSet;
/// A winning committee (always exactly `k` members when produced by a rule).
pub type Committee = CandidateSet;

impl CandidateSet {
    pub const fn empty() -> Self {
        CandidateSet(0)
    }

    pub const fn from_bits(bits: u64) -> Self {
        CandidateSet(bits)
    }

    /// `{0, 1, ..., m-1}`.
    pub fn full(m: usize) -> Self {
        if m >= 64 {
            CandidateSet(u64::MAX)
        } else {
            CandidateSet((1u64 << m) - 1)
        }
    }

    pub fn singleton(c: CandidateId) -> Self {
        CandidateSet(1u64 << c.0)
    }

    pub const fn bits(self) -> u64 {
        self.0
    }

    pub fn contains(self, c: CandidateId) -> bool {
        c.0 < 64 && self.0 & (1u64 << c.0) != 0
    }

    pub fn insert(&mut self, c: CandidateId) {
        self.0 |= 1u64 << c.0;
    }

    pub fn remove(&mut self, c: CandidateId) {
        self.0 &= !(1u64 << c.0);
    }

    #[must_use]
    pub fn with(self, c: CandidateId) -> Self {
        CandidateSet(self.0 | (1u64 << c.0))
    }

    #[must_use]
    pub fn without(self, c: CandidateId) -> Self {
        CandidateSet(self.0 & !(1u64 << c.0))
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn is_subset(self, other: CandidateSet) -> bool {
        self.0 & !other.0 == 0
    }

    #[must_use]
    pub fn union(self, other: CandidateSet) -> Self {
        CandidateSet(self.0 | other.0)
    }

    #[must_use]
    pub fn intersection(self, other: CandidateSet) -> Self {
        CandidateSet(self.0 & other.0)
    }

    #[must_use]
    pub fn difference(self, other: CandidateSet) -> Self {
        CandidateSet(self.0 & !other.0)
    }

    /// Members in increasing index order.
    pub fn iter(self) -> CandidateIter {
        CandidateIter(self.0)
    }
}

impl FromIterator<CandidateId> for CandidateSet {
    fn from_iter<I: IntoIterator<Item = CandidateId>>(iter: I) -> Self {
        let mut set = CandidateSet::empty();
        for c in iter {
            set.insert(c);
        }
        set
    }
}

impl IntoIterator for CandidateSet {
    type Item = CandidateId;
    type IntoIter = CandidateIter;

    fn into_iter(self) -> CandidateIter {
        self.iter()
    }
}

impl fmt::Debug for CandidateSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter().map(|c| c.0)).finish()
    }
}

pub struct CandidateIter(u64);

impl Iterator for CandidateIter {
    type Item = CandidateId;

    fn next(&mut self) -> Option<CandidateId> {
        if self.0 == 0 {
            return None;
        }
        let idx = self.0.trailing_zeros() as usize;
        self.0 &= self.0 - 1;
        Some(CandidateId(idx))
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let n = self.0.count_ones() as usize;
        (n, Some(n))
    }
}

impl ExactSizeIterator for CandidateIter {}

/// Iterates over every `k`-subset of `{0..m}` (Gosper's hack), in increasing
/// bitmask order.
pub fn k_subsets(m: usize, k: usize) -> impl Iterator<Item = CandidateSet> {
    let limit: u128 = 1u128 << m;
    let mut next: Option<u64> = if k > m {
        None
    } else if k == 0 {
        Some(0)
    } else {
        Some(((1u128 << k) - 1) as u64)
    };
    std::iter::from_fn(move || {
        let cur = next?;
        next = if cur == 0 {
            None
        } else {
            let c = cur & cur.wrapping_neg();
            let r = (cur as u128) + (c as u128);
            if r >= limit {
                None
            } else {
                let r = r as u64;
                Some((((r ^ cur) >> 2) / c) | r)
            }
        };
        Some(CandidateSet(cur))
    })
}

/// The lexicographic tie-breaking order `⊳`; position 0 has the highest
/// priority.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PriorityOrder {
    ranking: Vec<CandidateId>,
    rank_of: Vec<usize>,
}

impl PriorityOrder {
    pub fn new(ranking: Vec<CandidateId>) -> Result<Self> {
        let rank_of = permutation_positions(&ranking)
            .ok_or_else(|| contract("priority order must be a permutation of all candidates"))?;
        Ok(PriorityOrder { ranking, rank_of })
    }

    pub fn identity(m: usize) -> Self {
        PriorityOrder {
            ranking: (0..m).map(CandidateId).collect(),
            rank_of: (0..m).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.ranking.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ranking.is_empty()
    }

    pub fn ranking(&self) -> &[CandidateId] {
        &self.ranking
    }

    /// 0-based priority rank of `c` (0 = highest priority).
    pub fn rank(&self, c: CandidateId) -> usize {
        self.rank_of[c.0]
    }

    /// Whether `a ⊳ b`.
    pub fn outranks(&self, a: CandidateId, b: CandidateId) -> bool {
        self.rank(a) < self.rank(b)
    }

    /// The `k` highest-priority candidates.
    pub fn top(&self, k: usize) -> CandidateSet {
        self.ranking.iter().take(k).copied().collect()
    }

    /// Members of `set` from highest to lowest priority.
    pub fn sorted(&self, set: CandidateSet) -> Vec<CandidateId> {
        let mut v: Vec<_> = set.iter().collect();
        v.sort_by_key(|&c| self.rank(c));
        v
    }
}

fn permutation_positions(perm: &[CandidateId]) -> Option<Vec<usize>> {
    let mut pos = vec![usize::MAX; perm.len()];
    for (i, c) in perm.iter().enumerate() {
        if c.0 >= perm.len() || pos[c.0] != usize::MAX {
            return None;
        }
        pos[c.0] = i;
    }
    Some(pos)
}

/// A voter's strict preferences, cardinal utilities and OWA weights.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VoterProfile {
    preference: Vec<CandidateId>,
    utility: Vec<Rational>,
    owa: Vec<Rational>,
    position: Vec<usize>,
    j_star: usize,
}

impl VoterProfile {
    /// `preference` runs from most to least preferred; `utility` is indexed
    /// by candidate; `owa` holds `λ_1..λ_k`.
    pub fn new(
        preference: Vec<CandidateId>,
        utility: Vec<Rational>,
        owa: Vec<Rational>,
    ) -> Result<Self> {
        let position = permutation_positions(&preference)
            .ok_or_else(|| contract("preference must be a permutation of all candidates"))?;
        if utility.len() != preference.len() {
            return Err(contract(format!(
                "expected {} utilities, got {}",
                preference.len(),
                utility.len()
            )));
        }
        let mut seen = HashSet::new();
        for u in &utility {
            if !seen.insert(u) {
                return Err(contract(format!("duplicate utility value {u}")));
            }
        }
        for pair in preference.windows(2) {
            if utility[pair[0].0] <= utility[pair[1].0] {
                return Err(contract(format!(
                    "preference ranks candidate {} above {} but its utility is not higher",
                    pair[0].0, pair[1].0
                )));
            }
        }
        let j_star = j_star(&owa)?;
        Ok(VoterProfile {
            preference,
            utility,
            owa,
            position,
            j_star,
        })
    }

    pub fn preference(&self) -> &[CandidateId] {
        &self.preference
    }

    pub fn utilities(&self) -> &[Rational] {
        &self.utility
    }

    pub fn utility(&self, c: CandidateId) -> &Rational {
        &self.utility[c.0]
    }

    pub fn owa(&self) -> &[Rational] {
        &self.owa
    }

    /// 0-based position of `c` in this voter's ranking.
    pub fn position(&self, c: CandidateId) -> usize {
        self.position[c.0]
    }

    /// `c ≻_i d`.
    pub fn prefers(&self, c: CandidateId, d: CandidateId) -> bool {
        self.position(c) < self.position(d)
    }

    pub fn top_choice(&self) -> CandidateId {
        self.preference[0]
    }

    pub fn j_star(&self) -> usize {
        self.j_star
    }

    pub fn is_full_rank(&self) -> bool {
        self.owa[..self.j_star].iter().all(|l| l.is_positive())
    }

    /// The `len` most preferred candidates.
    pub fn prefix(&self, len: usize) -> CandidateSet {
        self.preference.iter().take(len).copied().collect()
    }

    /// The voter's ideal set `W_i*`: their top `j*` candidates.
    pub fn ideal_set(&self) -> CandidateSet {
        self.prefix(self.j_star)
    }

    /// Members of `set` from most to least preferred.
    pub fn sorted(&self, set: CandidateSet) -> Vec<CandidateId> {
        let mut v: Vec<_> = set.iter().collect();
        v.sort_by_key(|&c| self.position(c));
        v
    }

    /// OWA utility of a committee; the caller guarantees `|committee| = k`.
    pub fn committee_utility(&self, committee: CandidateSet) -> Rational {
        self.sorted(committee)
            .into_iter()
            .zip(&self.owa)
            .map(|(c, l)| l * &self.utility[c.0])
            .sum()
    }
}

/// Voters, candidates, committee size and tie-breaking order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ElectionInstance {
    names: Vec<String>,
    k: usize,
    voters: Vec<VoterProfile>,
    priority: PriorityOrder,
}

impl ElectionInstance {
    pub fn new(
        names: Vec<String>,
        k: usize,
        priority: PriorityOrder,
        voters: Vec<VoterProfile>,
    ) -> Result<Self> {
        let m = names.len();
        if m == 0 || m > MAX_CANDIDATES {
            return Err(contract(format!(
                "candidate count must be in 1..={MAX_CANDIDATES}, got {m}"
            )));
        }
        if k == 0 || k > m {
            return Err(contract(format!("committee size k={k} must satisfy 1 <= k <= m={m}")));
        }
        if voters.is_empty() {
            return Err(contract("an instance needs at least one voter"));
        }
        let mut seen = HashSet::new();
        for name in &names {
            if !is_valid_name(name) {
                return Err(contract(format!("invalid candidate name {name:?}")));
            }
            if !seen.insert(name.as_str()) {
                return Err(contract(format!("duplicate candidate name {name:?}")));
            }
        }
        if priority.len() != m {
            return Err(contract("priority order does not cover the candidate set"));
        }
        for (i, v) in voters.iter().enumerate() {
            if v.preference.len() != m {
                return Err(contract(format!("voter {i} ranks {} candidates, expected {m}", v.preference.len())));
            }
            if v.owa.len() != k {
                return Err(contract(format!(
                    "voter {i} has {} OWA weights, expected k={k}",
                    v.owa.len()
                )));
            }
        }
        Ok(ElectionInstance {
            names,
            k,
            voters,
            priority,
        })
    }

    /// Candidates named `a`, `b`, ... (or `c0`, `c1`, ... beyond 26).
    pub fn default_names(m: usize) -> Vec<String> {
        (0..m)
            .map(|i| {
                if m <= 26 {
                    ((b'a' + i as u8) as char).to_string()
                } else {
                    format!("c{i}")
                }
            })
            .collect()
    }

    /// Same instance with a different tie-breaking order.
    pub fn with_priority(&self, priority: PriorityOrder) -> Result<Self> {
        if priority.len() != self.m() {
            return Err(contract("priority order does not cover the candidate set"));
        }
        Ok(ElectionInstance {
            priority,
            ..self.clone()
        })
    }

    pub fn m(&self) -> usize {
        self.names.len()
    }

    pub fn n(&self) -> usize {
        self.voters.len()
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn name(&self, c: CandidateId) -> &str {
        &self.names[c.0]
    }

    pub fn candidate(&self, name: &str) -> Option<CandidateId> {
        self.names.iter().position(|n| n == name).map(CandidateId)
    }

    pub fn candidates(&self) -> CandidateSet {
        CandidateSet::full(self.m())
    }

    pub fn voters(&self) -> &[VoterProfile] {
        &self.voters
    }

    pub fn voter(&self, i: usize) -> Result<&VoterProfile> {
        self.voters
            .get(i)
            .ok_or_else(|| contract(format!("voter index {i} out of range (n={})", self.n())))
    }

    pub fn priority(&self) -> &PriorityOrder {
        &self.priority
    }

    pub fn all_full_rank(&self) -> bool {
        self.voters.iter().all(VoterProfile::is_full_rank)
    }

    /// Renders a set as `{a,b}` with members in priority order.
    pub fn format_set(&self, set: CandidateSet) -> String {
        let names: Vec<&str> = self
            .priority
            .sorted(set)
            .into_iter()
            .map(|c| self.name(c))
            .collect();
        format!("{{{}}}", names.join(","))
    }

    /// Parses `a,b,c` (or `{a,b}`; empty string / `{}` / `-` for ∅).
    pub fn parse_set(&self, text: &str) -> Result<CandidateSet> {
        let t = text.trim();
        let t = t.strip_prefix('{').and_then(|s| s.strip_suffix('}')).unwrap_or(t);
        let t = t.trim();
        if t.is_empty() || t == "-" {
            return Ok(CandidateSet::empty());
        }
        let mut set = CandidateSet::empty();
        for part in t.split(',') {
            let name = part.trim();
            let c = self
                .candidate(name)
                .ok_or_else(|| contract(format!("unknown candidate {name:?}")))?;
            set.insert(c);
        }
        Ok(set)
    }

    pub(crate) fn check_committee(&self, committee: CandidateSet) -> Result<()> {
        if !committee.is_subset(self.candidates()) {
            return Err(contract("committee references an unknown candidate"));
        }
        if committee.len() != self.k {
            return Err(contract(format!(
                "committee has {} members, expected k={}",
                committee.len(),
                self.k
            )));
        }
        Ok(())
    }
}

pub(crate) fn is_valid_name(name: &str) -> bool {
    !name.is_empty()
        && name
            .chars()
            .all(|ch| ch.is_alphanumeric() || ch == '_' || ch == '-' || ch == '.')
}

/// OWA set-extension utility `Σ λ_j u_i(c_j)` over the committee sorted by
/// the voter's preference.
pub fn owa_utility(
    instance: &ElectionInstance,
    voter: usize,
    committee: CandidateSet,
) -> Result<Rational> {
    let v = instance.voter(voter)?;
    instance.check_committee(committee)?;
    Ok(v.committee_utility(committee))
}

/// The largest 1-based index with a positive weight.
pub fn j_star(owa: &[Rational]) -> Result<usize> {
    if owa.is_empty() {
        return Err(contract("OWA vector is empty"));
    }
    if let Some(l) = owa.iter().find(|l| l.is_negative()) {
        return Err(contract(format!("OWA weight {l} is negative")));
    }
    owa.iter()
        .rposition(|l| !l.is_zero())
        .map(|i| i + 1)
        .ok_or_else(|| contract("OWA vector must have at least one positive weight"))
}

/// Every weight up to `j*` is strictly positive.
pub fn is_full_rank(owa: &[Rational]) -> Result<bool> {
    let j = j_star(owa)?;
    Ok(owa[..j].iter().all(|l| l.is_positive()))
}

pub fn ideal_set(instance: &ElectionInstance, voter: usize) -> Result<CandidateSet> {
    Ok(instance.voter(voter)?.ideal_set())
}

/// `W*`, the union of all voters' ideal sets.
pub fn ideal_union(instance: &ElectionInstance) -> CandidateSet {
    instance
        .voters()
        .iter()
        .fold(CandidateSet::empty(), |acc, v| acc.union(v.ideal_set()))
}

/// Compares two committees from a voter's point of view. `Greater` means the
/// voter strictly prefers `w` to `w_prime`.
pub fn prefers(
    instance: &ElectionInstance,
    voter: usize,
    w: CandidateSet,
    w_prime: CandidateSet,
) -> Result<Ordering> {
    let a = owa_utility(instance, voter, w)?;
    let b = owa_utility(instance, voter, w_prime)?;
    Ok(a.cmp(&b))
}

/// Sum of all voters' utilities for a committee. Only meaningful when the
/// caller treats utilities as comparable across voters.
pub fn social_welfare(instance: &ElectionInstance, committee: CandidateSet) -> Result<Rational> {
    instance.check_committee(committee)?;
    Ok(instance
        .voters()
        .iter()
        .map(|v| v.committee_utility(committee))
        .sum())
}

/// Largest candidate count for which [`UtilityTable`] is materialized.
pub const MAX_TABLE_CANDIDATES: usize = 16;

/// Per-voter dense utility ranks for every `k`-committee, so searches can
/// compare committees with integer comparisons.
#[derive(Clone, Debug)]
pub struct UtilityTable {
    ranks: Vec<Vec<u32>>,
    values: Vec<Vec<Rational>>,
}

impl UtilityTable {
    pub fn build(instance: &ElectionInstance) -> Result<Self> {
        let m = instance.m();
        if m > MAX_TABLE_CANDIDATES {
            return Err(Error::Capacity {
                what: "utility table candidates",
                requested: m as u64,
                limit: MAX_TABLE_CANDIDATES as u64,
            });
        }
        let committees: Vec<CandidateSet> = k_subsets(m, instance.k()).collect();
        let mut ranks = Vec::with_capacity(instance.n());
        let mut values = Vec::with_capacity(instance.n());
        for v in instance.voters() {
            let utils: Vec<Rational> = committees.iter().map(|&w| v.committee_utility(w)).collect();
            let mut distinct = utils.clone();
            distinct.sort();
            distinct.dedup();
            let mut table = vec![u32::MAX; 1usize << m];
            for (w, u) in committees.iter().zip(&utils) {
                let r = distinct.binary_search(u).expect("value present") as u32;
                table[w.bits() as usize] = r;
            }
            ranks.push(table);
            values.push(distinct);
        }
        Ok(UtilityTable { ranks, values })
    }

    /// Dense rank of the committee's utility for `voter` (higher is better).
    #[inline]
    pub fn rank(&self, voter: usize, committee: CandidateSet) -> u32 {
        self.ranks[voter][committee.bits() as usize]
    }

    pub fn value(&self, voter: usize, rank: u32) -> &Rational {
        &self.values[voter][rank as usize]
    }
}
