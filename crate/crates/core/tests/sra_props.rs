use proptest::prelude::*;
use rand::Rng;
use twoquery::adversary::{random_ordinal, seeded_rng};
use twoquery::sra::{
    ceil_sqrt, find_representative_set, serial_dictatorship, verify_representative_set, verify_sra,
    RepresentativeSet, SRAssignment, SrsMode,
};
use twoquery::{OrdinalProfile, Sides};

/// Agents `0..n` choosing among alternatives `0..m`.
fn sides(n: usize, m: usize) -> Sides {
    Sides { n1: (0..n).collect(), n2: (0..m).collect() }
}

/// Most agents that can each get one alternative they strictly prefer to
/// their assignment, with at most `k` agents per alternative.
fn most_improvable(ord: &OrdinalProfile, assigned: &[Option<usize>], k: usize) -> usize {
    let targets: Vec<Vec<usize>> = (0..ord.agents())
        .map(|i| match assigned[i] {
            None => ord.ranking(i).to_vec(),
            Some(a) => ord.ranking(i).iter().copied().take_while(|&j| j != a).collect(),
        })
        .collect();
    fn rec(i: usize, targets: &[Vec<usize>], used: &mut [usize], k: usize) -> usize {
        if i == targets.len() {
            return 0;
        }
        let mut best = rec(i + 1, targets, used, k);
        for &j in &targets[i] {
            if used[j] < k {
                used[j] += 1;
                best = best.max(1 + rec(i + 1, targets, used, k));
                used[j] -= 1;
            }
        }
        best
    }
    rec(0, &targets, &mut vec![0; ord.alternatives()], k)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn flow_check_matches_enumeration(seed in any::<u64>(), n in 1usize..=6, m in 1usize..=6, k in 1usize..=2) {
        let mut rng = seeded_rng(seed);
        let ord = random_ordinal(&mut rng, n, m);
        let assigned: Vec<Option<usize>> =
            (0..n).map(|_| if rng.gen_bool(0.1) { None } else { Some(rng.gen_range(0..m)) }).collect();
        let a = SRAssignment { copies: ceil_sqrt(n), assigned: assigned.clone(), exhausted: Vec::new() };
        let verdict = verify_sra(&a, &ord, &sides(n, m), k, None);
        prop_assert_eq!(verdict.max_improvable, most_improvable(&ord, &assigned, k));
    }

    #[test]
    fn serial_dictatorship_is_representative(seed in any::<u64>(), n in 1usize..=60, k in 1usize..=3, shuffled in any::<bool>()) {
        let mut rng = seeded_rng(seed);
        let ord = random_ordinal(&mut rng, n, n);
        let order: Option<Vec<usize>> = shuffled.then(|| {
            let mut o: Vec<usize> = (0..n).collect();
            rand::seq::SliceRandom::shuffle(o.as_mut_slice(), &mut rng);
            o
        });
        let s = sides(n, n);
        let a = serial_dictatorship(&ord, &s, order.as_deref()).unwrap();
        let verdict = verify_sra(&a, &ord, &s, k, None);
        prop_assert!(verdict.holds, "{verdict:?}");
        prop_assert!(a.exhausted.len() <= ceil_sqrt(n));
        prop_assert!(a.assigned.iter().all(Option::is_some));
    }

    #[test]
    fn set_check_matches_counting(seed in any::<u64>(), n in 1usize..=10, m in 1usize..=8) {
        let mut rng = seeded_rng(seed);
        let ord = random_ordinal(&mut rng, n, m);
        let members: Vec<usize> = (0..m).filter(|_| rng.gen_bool(0.3)).collect();
        let set = RepresentativeSet::new(members.clone(), m);
        let verdict = verify_representative_set(&set, &ord);
        let pos = |i: usize, j: usize| ord.ranking(i).iter().position(|&x| x == j).unwrap();
        let mut worst = 0;
        for j in (0..m).filter(|j| !members.contains(j)) {
            let count = (0..n)
                .filter(|&i| members.iter().all(|&b| pos(i, j) < pos(i, b)))
                .count();
            prop_assert_eq!(verdict.counts[j], count);
            worst = worst.max(count);
        }
        prop_assert_eq!(verdict.worst_count, worst);
        let bound = ceil_sqrt(m);
        prop_assert_eq!(verdict.holds, !members.is_empty() && members.len() <= bound && worst <= bound);
    }

    #[test]
    fn found_sets_verify(seed in any::<u64>(), n in 1usize..=16, m in 1usize..=12) {
        let ord = random_ordinal(&mut seeded_rng(seed), n, m);
        for mode in [SrsMode::Exact, SrsMode::Greedy, SrsMode::TopChoices, SrsMode::Auto] {
            if let Some(set) = find_representative_set(&ord, mode).unwrap() {
                prop_assert!(verify_representative_set(&set, &ord).holds, "{mode:?}");
            }
        }
    }

    /// Exact search finds a set whenever some subset works.
    #[test]
    fn exact_search_is_complete(seed in any::<u64>(), n in 1usize..=12, m in 1usize..=7) {
        let ord = random_ordinal(&mut seeded_rng(seed), n, m);
        let any = (1u32..1 << m).any(|mask| {
            let members: Vec<usize> = (0..m).filter(|j| mask >> j & 1 == 1).collect();
            verify_representative_set(&RepresentativeSet::new(members, m), &ord).holds
        });
        prop_assert_eq!(find_representative_set(&ord, SrsMode::Exact).unwrap().is_some(), any);
    }
}
