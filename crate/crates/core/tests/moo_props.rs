use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use wirearr::moo::{crowding_distance, dominates, evolve, non_dominated_sort, GaConfig, MooError, Objectives};

/// Peels fronts by repeatedly taking every remaining point no remaining point dominates.
fn brute_force_fronts(objs: &[Objectives]) -> Vec<Vec<usize>> {
    let mut left: Vec<usize> = (0..objs.len()).collect();
    let mut fronts = Vec::new();
    while !left.is_empty() {
        let front: Vec<usize> = left
            .iter()
            .copied()
            .filter(|&i| !left.iter().any(|&j| dominates(&objs[j], &objs[i])))
            .collect();
        left.retain(|i| !front.contains(i));
        fronts.push(front);
    }
    fronts
}

fn random_objectives(rng: &mut ChaCha8Rng, n: usize) -> Vec<Objectives> {
    (0..n)
        .map(|_| [rng.random_range(0..12) as f64, (rng.random_range(-50.0..0.0f64) * 4.0).round() / 4.0])
        .collect()
}

#[test]
fn sort_matches_brute_force() {
    let mut rng = ChaCha8Rng::seed_from_u64(51);
    for _ in 0..200 {
        let n = rng.random_range(1..=200);
        let objs = random_objectives(&mut rng, n);
        assert_eq!(non_dominated_sort(&objs), brute_force_fronts(&objs));
    }
    let fronts = non_dominated_sort(&[[0.0, 1.0], [1.0, 0.0], [1.0, 1.0]]);
    assert_eq!(fronts, vec![vec![0, 1], vec![2]]);
    assert_eq!(non_dominated_sort(&[[3.0, 3.0]]), vec![vec![0]]);
}

/// Two spheres centred at the origin and at `c` with `|c| = 1`: the front is
/// `(l^2, (1 - l)^2)` for `l` in `[0, 1]`.
fn toy(x: &[f64]) -> Objectives {
    let c = 1.0 / (x.len() as f64).sqrt();
    [
        x.iter().map(|v| v * v).sum(),
        x.iter().map(|v| (v - c) * (v - c)).sum(),
    ]
}

fn hypervolume(points: &[Objectives], reference: Objectives) -> f64 {
    let mut pts: Vec<Objectives> = points
        .iter()
        .copied()
        .filter(|p| p[0] < reference[0] && p[1] < reference[1])
        .collect();
    pts.sort_by(|a, b| a[0].total_cmp(&b[0]));
    let mut hv = 0.0;
    let mut ceiling = reference[1];
    for p in pts {
        if p[1] < ceiling {
            hv += (reference[0] - p[0]) * (ceiling - p[1]);
            ceiling = p[1];
        }
    }
    hv
}

#[test]
fn toy_front_reaches_hypervolume_target() {
    let reference = [1.1, 1.1];
    let analytic: Vec<Objectives> = (0..=100_000)
        .map(|i| {
            let l = i as f64 / 100_000.0;
            [l * l, (1.0 - l) * (1.0 - l)]
        })
        .collect();
    let target = hypervolume(&analytic, reference);
    let ga = GaConfig {
        population_size: 50,
        generations: 40,
        seed: 5,
        ..GaConfig::default()
    };
    let run = evolve(|x: &[f64]| Ok::<_, MooError>((toy(x), ())), 3, &ga).unwrap();
    let front: Vec<Objectives> = run.archive.entries.iter().map(|e| e.objectives).collect();
    let hv = hypervolume(&front, reference);
    assert!(hv >= 0.95 * target, "hypervolume {hv} vs analytic {target}");
}

#[derive(Clone, Debug, PartialEq)]
struct Tag(usize);

fn bumpy(x: &[f64]) -> Objectives {
    let a = x.iter().map(|v| (3.0 * v).sin().abs()).sum::<f64>().floor();
    [a, -x.iter().map(|v| v * v).sum::<f64>()]
}

#[test]
fn runs_are_deterministic_and_parallel_safe() {
    let ga = GaConfig {
        population_size: 20,
        generations: 15,
        seed: 9,
        ..GaConfig::default()
    };
    let go = |parallel: bool| {
        let cfg = GaConfig { parallel, ..ga.clone() };
        evolve(|x: &[f64]| Ok::<_, MooError>((bumpy(x), Tag(x.len()))), 6, &cfg).unwrap()
    };
    let a = go(true);
    let b = go(true);
    let c = go(false);
    assert_eq!(a, b);
    assert_eq!(a.samples, c.samples);
    assert_eq!(a.archive, c.archive);
    let other = evolve(
        |x: &[f64]| Ok::<_, MooError>((bumpy(x), Tag(x.len()))),
        6,
        &GaConfig { seed: 10, ..ga },
    )
    .unwrap();
    assert_ne!(a.samples, other.samples);
}

#[test]
fn history_invariants() {
    let ga = GaConfig {
        population_size: 16,
        generations: 30,
        seed: 17,
        ..GaConfig::default()
    };
    let run = evolve(|x: &[f64]| Ok::<_, MooError>((bumpy(x), ())), 5, &ga).unwrap();

    assert_eq!(run.samples.len(), 16 * 30);
    for (i, s) in run.samples.iter().enumerate() {
        assert_eq!(s.trial, i);
        assert_eq!(s.generation, 1 + i / 16);
        assert!(s.genome.iter().all(|v| (-1.0..=1.0).contains(v)));
    }
    assert_eq!(run.population.len(), 16);

    for w in run.history.windows(2) {
        assert!(w[1].best[0] <= w[0].best[0]);
        assert!(w[1].best[1] <= w[0].best[1]);
    }

    let entries = &run.archive.entries;
    for a in entries {
        for b in entries {
            assert!(!dominates(&a.objectives, &b.objectives));
        }
    }
    for s in &run.samples {
        assert!(entries
            .iter()
            .any(|e| e.objectives == s.objectives || dominates(&e.objectives, &s.objectives)));
    }
}

#[test]
fn constant_objectives_leave_one_entry() {
    let ga = GaConfig {
        population_size: 8,
        generations: 5,
        ..GaConfig::default()
    };
    let run = evolve(|_: &[f64]| Ok::<_, MooError>(([1.0, 2.0], ())), 4, &ga).unwrap();
    assert_eq!(run.archive.entries.len(), 1);
    assert_eq!(run.archive.entries[0].trial, 0);
}

#[test]
fn failing_evaluation_aborts_with_trial() {
    let ga = GaConfig {
        population_size: 8,
        generations: 3,
        ..GaConfig::default()
    };
    let calls = std::sync::atomic::AtomicUsize::new(0);
    let r = evolve(
        |_: &[f64]| {
            if calls.fetch_add(1, std::sync::atomic::Ordering::SeqCst) >= 10 {
                Err("boom")
            } else {
                Ok(([0.0, 0.0], ()))
            }
        },
        2,
        &GaConfig { parallel: false, ..ga },
    );
    match r {
        Err(MooError::Evaluation { trial, .. }) => assert_eq!(trial, 10),
        other => panic!("unexpected {other:?}"),
    }
}

#[test]
fn invalid_settings_rejected() {
    for ga in [
        GaConfig { population_size: 7, ..GaConfig::default() },
        GaConfig { population_size: 2, ..GaConfig::default() },
        GaConfig { generations: 0, ..GaConfig::default() },
        GaConfig { crossover_prob: 1.5, ..GaConfig::default() },
        GaConfig { mutation_prob: Some(-0.1), ..GaConfig::default() },
        GaConfig { mutation_eta: 0.0, ..GaConfig::default() },
    ] {
        let r = evolve(|_: &[f64]| Ok::<_, MooError>(([0.0, 0.0], ())), 2, &ga);
        assert!(matches!(r, Err(MooError::Config(_))));
    }
}

proptest! {
    #[test]
    fn crowding_permutes_with_its_front(
        raw in proptest::collection::vec((0u8..6, 0u8..6), 1..40),
        seed in any::<u64>(),
    ) {
        let front: Vec<Objectives> = raw.iter().map(|&(a, b)| [a as f64, b as f64]).collect();
        let mut perm: Vec<usize> = (0..front.len()).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for i in (1..perm.len()).rev() {
            perm.swap(i, rng.random_range(0..=i));
        }
        let shuffled: Vec<Objectives> = perm.iter().map(|&i| front[i]).collect();
        let d = crowding_distance(&front);
        let e = crowding_distance(&shuffled);
        for (k, &i) in perm.iter().enumerate() {
            prop_assert_eq!(d[i].to_bits(), e[k].to_bits());
        }
        prop_assert!(d.iter().all(|&x| x >= 0.0));
    }
}
