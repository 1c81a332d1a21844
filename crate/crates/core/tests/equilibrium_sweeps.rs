mod common;

use approval_nash::equilibrium::{
    construct_containment_pne, construct_sincere_pne, enumerate_equilibria, enumerate_lazy_pruned,
    k1_characterization, verify_equilibrium, welfare, ContainmentOutcome, EquilibriumKind, Verdict,
};
use approval_nash::harness::{generate_instance, InstanceSpec, OwaScheme, UtilityScheme};
use approval_nash::Error;
use approval_nash::model::{ideal_union, owa_utility, CandidateSet, ElectionInstance};
use approval_nash::rules::{elect, random_weights, BallotProfile, RuleSpec};
use common::{fixture, int};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_instance(rng: &mut ChaCha8Rng, m_max: usize, n_max: usize) -> ElectionInstance {
    let m = rng.gen_range(1..=m_max);
    let spec = InstanceSpec {
        m,
        n: rng.gen_range(1..=n_max),
        k: rng.gen_range(1..=m),
        utility: UtilityScheme::RandomRational,
        owa: OwaScheme::ALL[rng.gen_range(0..OwaScheme::ALL.len())],
        random_priority: true,
    };
    generate_instance(&spec, rng.gen()).unwrap()
}

// Does the profile satisfy the notion? Checked voter by voter against all
// 2^m alternatives.
fn oracle_holds(inst: &ElectionInstance, rule: &RuleSpec, profile: &BallotProfile, kind: EquilibriumKind) -> bool {
    (0..inst.n()).all(|i| {
        let own = profile.ballot(i);
        let u = |b: CandidateSet| owa_utility(inst, i, elect(rule, inst, &profile.with_ballot(i, b)).unwrap()).unwrap();
        let current = u(own);
        let alts: Vec<_> = (0..1u64 << inst.m()).map(CandidateSet::from_bits).map(|b| (b, u(b))).collect();
        if alts.iter().any(|(_, x)| *x > current) {
            return false;
        }
        let v = &inst.voters()[i];
        match kind {
            EquilibriumKind::Plain => true,
            EquilibriumKind::Lazy => alts.iter().all(|(b, x)| *x < current || b.len() >= own.len()),
            EquilibriumKind::Sincere => v.prefix(own.len()) == own,
        }
    })
}

#[test]
fn verdicts_agree_with_oracle_and_witnesses_replay() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let mut deviations = 0;
    for t in 0..300 {
        let inst = random_instance(&mut rng, 4, 4);
        let rule = if t % 2 == 0 {
            RuleSpec::standard_av(&inst)
        } else {
            RuleSpec::candidate_weighted(&inst, random_weights(inst.m(), &mut rng)).unwrap()
        };
        let full = inst.candidates().bits();
        let profile =
            BallotProfile::new(&inst, (0..inst.n()).map(|_| CandidateSet::from_bits(rng.gen::<u64>() & full)).collect())
                .unwrap();
        for kind in [EquilibriumKind::Plain, EquilibriumKind::Lazy, EquilibriumKind::Sincere] {
            let verdict = verify_equilibrium(&inst, &rule, &profile, kind).unwrap();
            assert_eq!(verdict.certificate().is_some(), oracle_holds(&inst, &rule, &profile, kind), "trial {t} {kind:?}");
            if let Verdict::Deviation(w) = verdict {
                assert!(w.replay(&inst, &rule, &profile).unwrap());
                let mut forged = w.clone();
                forged.new_utility = &forged.new_utility + int(1);
                assert!(!forged.replay(&inst, &rule, &profile).unwrap());
                deviations += 1;
            }
        }
    }
    assert!(deviations > 100);
}

#[test]
fn enumeration_matches_oracle_filter() {
    let mut rng = ChaCha8Rng::seed_from_u64(22);
    for _ in 0..40 {
        let mut inst = random_instance(&mut rng, 3, 3);
        while inst.m() * inst.n() > 8 {
            inst = random_instance(&mut rng, 3, 3);
        }
        let rule = RuleSpec::standard_av(&inst);
        let (m, n) = (inst.m(), inst.n());
        for kind in [EquilibriumKind::Plain, EquilibriumKind::Lazy, EquilibriumKind::Sincere] {
            let set = enumerate_equilibria(&inst, &rule, kind).unwrap();
            let mut expected = Vec::new();
            for code in 0..1u64 << (m * n) {
                let ballots = (0..n).map(|i| CandidateSet::from_bits(code >> (i * m) & ((1 << m) - 1))).collect();
                let p = BallotProfile::new(&inst, ballots).unwrap();
                if oracle_holds(&inst, &rule, &p, kind) {
                    expected.push(p);
                }
            }
            expected.sort();
            let got: Vec<_> = set.certificates.iter().map(|c| c.profile.clone()).collect();
            assert_eq!(got, expected, "{kind:?}");
            assert_eq!(set.profiles_examined, 1 << (m * n));
        }
        let pruned = enumerate_lazy_pruned(&inst, &rule).unwrap();
        let naive = enumerate_equilibria(&inst, &rule, EquilibriumKind::Lazy).unwrap();
        assert_eq!(pruned.certificates, naive.certificates);
    }
}

#[test]
fn example_two_fixture_lazy_against_sincere() {
    let inst = fixture("ex2.txt");
    let av = RuleSpec::standard_av(&inst);
    let lazy = enumerate_lazy_pruned(&inst, &av).unwrap();
    assert_eq!(lazy.committees, vec![inst.parse_set("a,c").unwrap()]);
    // n <= m, so the construction does not apply; enumerate instead
    assert!(construct_sincere_pne(&inst, &av, false).is_err());
    let profile = BallotProfile::parse(&inst, "a,b;;").unwrap();
    let verdict = verify_equilibrium(&inst, &av, &profile, EquilibriumKind::Sincere).unwrap();
    let sincere = verdict.certificate().expect("({a,b}, {}, {}) is a sincere-PNE");
    assert_eq!(sincere.committee, inst.parse_set("a,b").unwrap());
    assert_eq!(welfare(&inst, sincere).unwrap(), int(10));
    // other sincere equilibria exist too
    let all = enumerate_equilibria(&inst, &av, EquilibriumKind::Sincere).unwrap();
    assert!(all.certificates.iter().any(|c| c.profile == profile));
    assert_eq!(all.committees.len(), 3);
    assert_eq!(welfare(&inst, &lazy.certificates[0]).unwrap(), int(16));
    // W* = {a, c, d} is larger than k
    assert!(matches!(construct_containment_pne(&inst, &av, None), Err(Error::Precondition(_))));

    let alphabetical = fixture("ex2_alphabetical.txt");
    assert!(enumerate_lazy_pruned(&alphabetical, &RuleSpec::standard_av(&alphabetical)).unwrap().is_empty());
}

#[test]
fn single_winner_fixtures() {
    let ex1 = fixture("ex1.txt");
    let av = RuleSpec::standard_av(&ex1);
    let lazy = enumerate_equilibria(&ex1, &av, EquilibriumKind::Lazy).unwrap();
    assert_eq!(lazy.committees, k1_characterization(&ex1).unwrap());

    let cycle = fixture("k1_cycle.txt");
    let av = RuleSpec::standard_av(&cycle);
    assert!(k1_characterization(&cycle).unwrap().is_empty());
    assert!(enumerate_lazy_pruned(&cycle, &av).unwrap().is_empty());
}

#[test]
fn sincere_construction_in_both_ballot_modes() {
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    for _ in 0..200 {
        let m = rng.gen_range(1..=5);
        let spec = InstanceSpec {
            m,
            n: rng.gen_range(m + 1..=m + 4),
            k: rng.gen_range(1..=m),
            utility: UtilityScheme::RandomRational,
            owa: OwaScheme::RandomAny,
            random_priority: true,
        };
        let inst = generate_instance(&spec, rng.gen()).unwrap();
        let av = RuleSpec::standard_av(&inst);
        for non_empty in [false, true] {
            let cert = construct_sincere_pne(&inst, &av, non_empty).unwrap();
            assert_eq!(cert.kind, EquilibriumKind::Sincere);
            assert!(oracle_holds(&inst, &av, &cert.profile, EquilibriumKind::Sincere));
            if non_empty {
                assert!(cert.profile.ballots().iter().all(|b| !b.is_empty()));
            }
        }
    }
}

#[test]
fn containment_construction_on_small_ideal_unions() {
    let mut rng = ChaCha8Rng::seed_from_u64(24);
    let (mut certified, mut refused) = (0, 0);
    for _ in 0..400 {
        let m = rng.gen_range(2..=4);
        let spec = InstanceSpec {
            m,
            n: rng.gen_range(1..=3),
            k: rng.gen_range(1..=m),
            utility: UtilityScheme::BordaLike,
            owa: OwaScheme::Best,
            random_priority: true,
        };
        let inst = generate_instance(&spec, rng.gen()).unwrap();
        if ideal_union(&inst).len() > inst.k() {
            continue;
        }
        let av = RuleSpec::standard_av(&inst);
        let lazy = enumerate_lazy_pruned(&inst, &av).unwrap();
        match construct_containment_pne(&inst, &av, None).unwrap() {
            ContainmentOutcome::Certified(cert) => {
                assert!(ideal_union(&inst).is_subset(cert.committee));
                assert!(lazy.committees.contains(&cert.committee));
                certified += 1;
            }
            ContainmentOutcome::Impossible(_) => refused += 1,
        }
    }
    assert!(certified > 100, "{certified} certified, {refused} refused");
}
