mod common;

use common::leq;
use proptest::prelude::*;
use twoquery::adversary::{
    adversarial_completion, gen_lower_bound, optimize_chain, random_instance, rival_candidates, seeded_rng,
    CompletionProblem, Ratio,
};
use twoquery::mechanisms::output_welfare;
use twoquery::sra::SrsMode;
use twoquery::{
    check_consistency, derive_ordinal, match_two_queries, sc_two_queries, Instance, MechanismRun, ProblemKind,
    ScOutcome,
};

/// Best nonincreasing sequence on `grid` with pins fixed, by dynamic
/// programming over the grid level of each position.
fn grid_optimum(coef: &[f64], pins: &[Option<f64>], grid: &[f64]) -> f64 {
    // grid sorted descending; best[g] = best prefix sum ending at level grid[g]
    let mut best: Vec<f64> = vec![f64::NEG_INFINITY; grid.len()];
    for (p, &c) in coef.iter().enumerate() {
        let mut next = vec![f64::NEG_INFINITY; grid.len()];
        let mut running = f64::NEG_INFINITY;
        for (g, &level) in grid.iter().enumerate() {
            running = if p == 0 { 0.0 } else { running.max(best[g]) };
            let prev = running;
            let allowed = pins[p].map_or(true, |v| v == level);
            if allowed && prev > f64::NEG_INFINITY {
                next[g] = prev + c * level;
            }
        }
        best = next;
    }
    best.into_iter().fold(f64::NEG_INFINITY, f64::max)
}

fn chain() -> impl Strategy<Value = (Vec<f64>, Vec<Option<f64>>)> {
    (1usize..=7).prop_flat_map(|len| {
        (
            prop::collection::vec((-3000i32..=3000).prop_map(|c| f64::from(c) / 1000.0), len),
            prop::collection::vec((any::<bool>(), 0u32..=10_000), len),
        )
            .prop_map(|(coef, raw)| {
                let mut levels: Vec<f64> = raw.iter().map(|&(_, v)| f64::from(v) / 100.0).collect();
                levels.sort_by(|a, b| b.total_cmp(a));
                let pins = raw
                    .iter()
                    .zip(levels)
                    .enumerate()
                    .map(|(p, (&(pin, _), v))| (p == 0 || pin).then_some(v))
                    .collect();
                (coef, pins)
            })
    })
}

fn sc_run(seed: u64, n: usize, m: usize) -> Option<(Instance, MechanismRun)> {
    let inst = random_instance(&mut seeded_rng(seed), ProblemKind::SocialChoice, n, m, false).unwrap();
    match sc_two_queries(&inst, SrsMode::Auto).unwrap() {
        ScOutcome::Run(run) => Some((inst, run)),
        ScOutcome::SrsNotFound { .. } => None,
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn chain_matches_grid_search((coef, pins) in chain()) {
        let top = pins[0].unwrap();
        let mut grid: Vec<f64> = pins.iter().flatten().copied().collect();
        grid.push(0.0);
        grid.extend((1..=32).map(|s| top * f64::from(s) / 33.0));
        grid.sort_by(|a, b| b.total_cmp(a));
        grid.dedup();
        let (value, x) = optimize_chain(&coef, &pins).unwrap();
        prop_assert!(x.windows(2).all(|w| w[0] >= w[1]) && x.iter().all(|&v| v >= 0.0));
        prop_assert!(pins.iter().zip(&x).all(|(p, v)| p.map_or(true, |p| p == *v)));
        let direct: f64 = coef.iter().zip(&x).map(|(c, v)| c * v).sum();
        prop_assert!((direct - value).abs() <= 1e-9 * value.abs().max(1.0));
        let grid_best = grid_optimum(&coef, &pins, &grid);
        prop_assert!((grid_best - value).abs() <= 1e-9 * value.abs().max(1.0), "{} vs {}", grid_best, value);
    }

    #[test]
    fn feasibility_is_monotone(seed in any::<u64>(), n in 1usize..=8, m in 2usize..=8, probes in prop::collection::vec(0u32..4000, 8)) {
        let Some((inst, run)) = sc_run(seed, n, m) else { return Ok(()) };
        let ord = derive_ordinal(&inst);
        let skeleton = inst.skeleton();
        for rival in 0..m {
            let problem = CompletionProblem::new(
                &skeleton, &ord, &run.transcript, &run.output, &twoquery::MechanismOutput::Winner(rival),
            ).unwrap();
            let mut ts: Vec<f64> = probes.iter().map(|&p| f64::from(p) / 100.0).collect();
            ts.sort_by(f64::total_cmp);
            let feasible: Vec<bool> = ts.iter().map(|&t| problem.gap_value(t) > 0.0).collect();
            prop_assert!(feasible.windows(2).all(|w| w[0] || !w[1]), "{ts:?} {feasible:?}");
            for &t in &ts {
                let (g, _) = problem.gap(t).unwrap();
                prop_assert!((g - problem.gap_value(t)).abs() <= 1e-9 * g.abs().max(1.0));
            }
        }
    }

    #[test]
    fn social_choice_completions_are_consistent(seed in any::<u64>(), n in 1usize..=8, m in 2usize..=8) {
        let Some((inst, run)) = sc_run(seed, n, m) else { return Ok(()) };
        let ord = derive_ordinal(&inst);
        let skeleton = inst.skeleton();
        let rivals = rival_candidates(&skeleton, &ord, &run.transcript).unwrap();
        let c = adversarial_completion(&skeleton, &ord, &run.transcript, &run.output, &rivals, 1e-9).unwrap();
        prop_assert!(check_consistency(&ord, &c.values).unwrap());
        for (&(i, j), &v) in run.transcript.revealed() {
            prop_assert_eq!(c.values.get(i, j), v);
        }
        // the true values are one consistent completion
        let realized = twoquery::adversary::distortion_ratio(
            twoquery::adversary::optimum_welfare(&inst).unwrap(),
            output_welfare(&run.output, &inst).unwrap(),
        );
        prop_assert!(leq(realized, c.ratio.value() * (1.0 + 1e-6)), "{realized} > {:?}", c.ratio);
        if let Ratio::Finite(r) = c.ratio {
            let completed = Instance::new(ProblemKind::SocialChoice, c.values.clone(), None).unwrap();
            let x = output_welfare(&c.certificate, &completed).unwrap();
            let y = output_welfare(&run.output, &completed).unwrap();
            prop_assert!((x / y - r).abs() <= 1e-9 * r.max(1.0));
        }
    }

    #[test]
    fn one_sided_completions_are_consistent(seed in any::<u64>(), n in 1usize..=5) {
        let inst = random_instance(&mut seeded_rng(seed), ProblemKind::OneSidedMatching, n, n, false).unwrap();
        let run = match_two_queries(&inst).unwrap();
        let ord = derive_ordinal(&inst);
        let skeleton = inst.skeleton();
        let rivals = rival_candidates(&skeleton, &ord, &run.transcript).unwrap();
        let c = adversarial_completion(&skeleton, &ord, &run.transcript, &run.output, &rivals, 1e-9).unwrap();
        prop_assert!(check_consistency(&ord, &c.values).unwrap());
        for (&(i, j), &v) in run.transcript.revealed() {
            prop_assert_eq!(c.values.get(i, j), v);
        }
        let realized = twoquery::adversary::distortion_ratio(
            twoquery::adversary::optimum_welfare(&inst).unwrap(),
            output_welfare(&run.output, &inst).unwrap(),
        );
        prop_assert!(leq(realized, c.ratio.value() * (1.0 + 1e-6)));
    }
}

#[test]
fn layered_instances_match_their_layout() {
    for (m, lambda) in [(16, 2), (64, 2), (256, 2), (64, 3), (27, 1), (100, 2)] {
        let (inst, layout) = gen_lower_bound(m, lambda, 5).unwrap();
        let ord = layout.ordinal();
        assert!(check_consistency(&ord, inst.values()).unwrap());
        assert_eq!(layout.layer_sizes.iter().sum::<usize>(), m);
        for l in 1..=lambda + 1 {
            let layer = layout.layer(l);
            let value = (m as f64).powf(-(l as f64) / lambda as f64);
            assert!((layout.position_values[l - 1] - value).abs() <= 1e-8 * value);
            let mut covered = 0;
            for &j in &layer {
                let holders: Vec<usize> = (0..m).filter(|&i| ord.ranking(i)[l - 1] == j).collect();
                covered += holders.len();
                // agents sharing an alternative here share the next one too
                if l <= lambda {
                    let next = ord.ranking(holders[0])[l];
                    assert!(holders.iter().all(|&i| ord.ranking(i)[l] == next), "m={m} l={l}");
                }
                let welfare: f64 = (0..m).map(|i| inst.values().get(i, j)).sum();
                let expected = holders.len() as f64 * layout.position_values[l - 1];
                assert!((welfare - expected).abs() <= 1e-12 * expected.max(1.0));
            }
            assert_eq!(covered, m);
            if l == 1 {
                // the first level splits agents as evenly as possible
                let sizes: Vec<usize> =
                    layer.iter().map(|&j| (0..m).filter(|&i| ord.ranking(i)[0] == j).count()).collect();
                assert!(sizes.iter().max().unwrap() - sizes.iter().min().unwrap() <= 1);
            }
        }
        // positions past the layered head carry nothing
        for i in 0..m {
            for &j in &ord.ranking(i)[lambda + 1..] {
                assert_eq!(inst.values().get(i, j), 0.0);
            }
        }
    }
}
