#![allow(dead_code)]

use std::path::PathBuf;

use approval_nash::harness::load_instance;
use approval_nash::model::{CandidateId, ElectionInstance, PriorityOrder, Rational, VoterProfile};
use num_bigint::BigInt;

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub fn fixture(name: &str) -> ElectionInstance {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name);
    load_instance(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

pub fn fixture_path(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("fixtures")
        .join(name)
        .display()
        .to_string()
}

/// All permutations of `0..m` in lexicographic order.
pub fn permutations(m: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur: Vec<usize> = (0..m).collect();
    loop {
        out.push(cur.clone());
        let Some(i) = (1..m).rev().find(|&i| cur[i - 1] < cur[i]) else { break };
        let j = (i..m).rev().find(|&j| cur[j] > cur[i - 1]).unwrap();
        cur.swap(i - 1, j);
        cur[i..].reverse();
    }
    out
}

/// Borda-like utilities `m - position`.
pub fn borda_voter(pref: &[usize], owa: &[Rational]) -> VoterProfile {
    let m = pref.len();
    let mut u = vec![int(0); m];
    for (pos, &c) in pref.iter().enumerate() {
        u[c] = int((m - pos) as i64);
    }
    VoterProfile::new(pref.iter().map(|&c| CandidateId(c)).collect(), u, owa.to_vec()).unwrap()
}

/// Full-rank OWA vectors of length `k`: every `j* = 1..=k` with unit
/// weights up to it.
pub fn full_rank_owas(k: usize) -> Vec<Vec<Rational>> {
    (1..=k).map(|j| (0..k).map(|i| int((i < j) as i64)).collect()).collect()
}

/// Non-decreasing index vectors of length `n` over `0..types`.
pub fn multisets(types: usize, n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = vec![0usize; n];
    loop {
        out.push(cur.clone());
        let Some(pos) = (0..n).rev().find(|&p| cur[p] + 1 < types) else { break };
        let v = cur[pos] + 1;
        for x in &mut cur[pos..] {
            *x = v;
        }
    }
    out
}

/// Every instance with `m` candidates, `n` voters and committee size `k`
/// whose voters are drawn (as a multiset) from Borda voters over all
/// preference orders and the given OWA vectors. The priority is the
/// identity; any other priority is a relabeling of one of these.
pub fn grid(m: usize, n: usize, k: usize, owas: &[Vec<Rational>]) -> Vec<ElectionInstance> {
    let types: Vec<VoterProfile> = permutations(m)
        .iter()
        .flat_map(|p| owas.iter().map(move |w| borda_voter(p, w)))
        .collect();
    multisets(types.len(), n)
        .into_iter()
        .map(|idx| {
            ElectionInstance::new(
                ElectionInstance::default_names(m),
                k,
                PriorityOrder::identity(m),
                idx.iter().map(|&i| types[i].clone()).collect(),
            )
            .unwrap()
        })
        .collect()
}
