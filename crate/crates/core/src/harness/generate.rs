//! Seeded random instances.

use num_bigint::BigInt;
use rand::seq::{index, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{CandidateId, ElectionInstance, PriorityOrder, Rational, VoterProfile};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum UtilityScheme {
    /// `m - position`.
    BordaLike,
    /// Distinct random integers plus a random fraction in `[0, 1)`.
    RandomRational,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OwaScheme {
    /// `(1, 0, ..., 0)`: only the favourite member counts.
    Best,
    /// `(0, ..., 0, 1)`: only the least preferred member counts.
    Worst,
    /// All ones.
    Additive,
    /// Random `j*`, positive weights up to it.
    RandomFullRank,
    /// Arbitrary non-negative weights, at least one positive.
    RandomAny,
}

impl std::str::FromStr for UtilityScheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "borda-like" => Ok(UtilityScheme::BordaLike),
            "random-rational" => Ok(UtilityScheme::RandomRational),
            other => Err(Error::Config(format!("unknown utility scheme {other:?}"))),
        }
    }
}

impl std::str::FromStr for OwaScheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "best" => Ok(OwaScheme::Best),
            "worst" => Ok(OwaScheme::Worst),
            "additive" => Ok(OwaScheme::Additive),
            "random-full-rank" => Ok(OwaScheme::RandomFullRank),
            "random-any" => Ok(OwaScheme::RandomAny),
            other => Err(Error::Config(format!("unknown OWA scheme {other:?}"))),
        }
    }
}

impl OwaScheme {
    pub const ALL: [OwaScheme; 5] = [
        OwaScheme::Best,
        OwaScheme::Worst,
        OwaScheme::Additive,
        OwaScheme::RandomFullRank,
        OwaScheme::RandomAny,
    ];
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceSpec {
    pub m: usize,
    pub n: usize,
    pub k: usize,
    pub utility: UtilityScheme,
    pub owa: OwaScheme,
    /// Shuffle the tie-breaking order instead of using `a ⊳ b ⊳ ...`.
    #[serde(default)]
    pub random_priority: bool,
}

fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

fn frac(p: i64, q: i64) -> Rational {
    Rational::new(BigInt::from(p), BigInt::from(q))
}

/// Deterministic in `(spec, seed)`.
pub fn generate_instance(spec: &InstanceSpec, seed: u64) -> Result<ElectionInstance> {
    let InstanceSpec { m, n, k, .. } = *spec;
    if m == 0 || m > crate::model::MAX_CANDIDATES {
        return Err(Error::Config(format!("m must be in 1..=64, got {m}")));
    }
    if n == 0 {
        return Err(Error::Config("n must be at least 1".into()));
    }
    if k == 0 || k > m {
        return Err(Error::Config(format!("k={k} must satisfy 1 <= k <= m={m}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut voters = Vec::with_capacity(n);
    for _ in 0..n {
        let mut pref: Vec<CandidateId> = (0..m).map(CandidateId).collect();
        pref.shuffle(&mut rng);
        let values = utility_values(spec.utility, m, &mut rng);
        let mut utility = vec![int(0); m];
        for (c, u) in pref.iter().zip(values) {
            utility[c.0] = u;
        }
        let owa = owa_weights(spec.owa, k, &mut rng);
        voters.push(VoterProfile::new(pref, utility, owa)?);
    }
    let priority = if spec.random_priority {
        let mut ranking: Vec<CandidateId> = (0..m).map(CandidateId).collect();
        ranking.shuffle(&mut rng);
        PriorityOrder::new(ranking)?
    } else {
        PriorityOrder::identity(m)
    };
    ElectionInstance::new(ElectionInstance::default_names(m), k, priority, voters)
}

/// Strictly decreasing values, best first.
fn utility_values(scheme: UtilityScheme, m: usize, rng: &mut impl Rng) -> Vec<Rational> {
    match scheme {
        UtilityScheme::BordaLike => (0..m).map(|p| int((m - p) as i64)).collect(),
        UtilityScheme::RandomRational => {
            let mut base: Vec<usize> = index::sample(rng, 4 * m, m).into_vec();
            base.sort_unstable_by(|a, b| b.cmp(a));
            base.into_iter()
                .map(|b| {
                    let q = rng.gen_range(2..=7);
                    int(b as i64) + frac(rng.gen_range(0..q), q)
                })
                .collect()
        }
    }
}

fn owa_weights(scheme: OwaScheme, k: usize, rng: &mut impl Rng) -> Vec<Rational> {
    let pick = |rng: &mut dyn rand::RngCore, zero: bool| -> Rational {
        let lo = if zero { 0 } else { 1 };
        frac(rng.gen_range(lo..=4), 2)
    };
    match scheme {
        OwaScheme::Best => (0..k).map(|j| int((j == 0) as i64)).collect(),
        OwaScheme::Worst => (0..k).map(|j| int((j + 1 == k) as i64)).collect(),
        OwaScheme::Additive => vec![int(1); k],
        OwaScheme::RandomFullRank => {
            let j_star = rng.gen_range(1..=k);
            (0..k).map(|j| if j < j_star { pick(rng, false) } else { int(0) }).collect()
        }
        OwaScheme::RandomAny => {
            let mut w: Vec<Rational> = (0..k).map(|_| pick(rng, true)).collect();
            if w.iter().all(|x| x == &int(0)) {
                let j = rng.gen_range(0..k);
                w[j] = int(1);
            }
            w
        }
    }
}
