mod common;

use std::collections::BTreeMap;

use ship_core::discovery::{discover, generate_candidates, information_gain, Candidate};
use ship_core::{ClassLabel, Config, Dataset};

use common::{exhaustive_gain, naive_psd, single_channel};

/// Motif instances for NP, flat-ish instances for AC, ramps for DT.
fn toy() -> Dataset {
    let mut xs = Vec::new();
    for i in 0..6 {
        let shift = i % 3;
        let mut v = vec![0.0; 14];
        v[4 + shift] = 4.0;
        v[5 + shift] = 1.0;
        v[10] = 0.2 * i as f64;
        xs.push(single_channel(&format!("np{i}"), "NP", v, 16));
        let flat: Vec<f64> = (0..12).map(|t| ((t + i) % 2) as f64 * 0.3).collect();
        xs.push(single_channel(&format!("ac{i}"), "AC", flat, 16));
        let ramp: Vec<f64> = (0..13).map(|t| t as f64 * 0.5 + (i % 2) as f64).collect();
        xs.push(single_channel(&format!("dt{i}"), "DT", ramp, 16));
    }
    Dataset::new(xs)
}

fn rescore(d: &Dataset, c: &Candidate) -> (f64, f64) {
    let items: Vec<(f64, bool)> = d
        .iter()
        .map(|x| {
            let series = x.channel(c.channel).unwrap();
            let dist = naive_psd(series, &c.values).map_or(f64::INFINITY, |(p, _)| p);
            (dist, x.label == c.label)
        })
        .collect();
    exhaustive_gain(&items)
}

fn config(g: usize) -> Config {
    Config {
        k: 5,
        g,
        max_sources_per_class: None,
        ..Config::default()
    }
}

#[test]
fn pool_is_the_top_of_an_exhaustive_rescoring() {
    let d = toy();
    assert!(d.len() <= 20);
    let pool = discover(&d, &config(6)).unwrap();
    assert_eq!(pool.per_class_quota, 2);

    let mut scored: BTreeMap<ClassLabel, Vec<(f64, Candidate)>> = BTreeMap::new();
    for x in d.iter() {
        for c in generate_candidates(x, 5).unwrap() {
            let (g, _) = rescore(&d, &c);
            scored.entry(c.label.clone()).or_default().push((g, c));
        }
    }
    for (label, mut cands) in scored {
        cands.sort_by(|(ga, a), (gb, b)| {
            gb.total_cmp(ga)
                .then(a.len().cmp(&b.len()))
                .then(a.start.cmp(&b.start))
                .then(a.source_id.cmp(&b.source_id))
                .then(a.channel.cmp(&b.channel))
                .then(a.end.cmp(&b.end))
        });
        let chosen: Vec<_> = pool.of_class(&label).map(|(_, s)| s).collect();
        assert_eq!(chosen.len(), 2, "{label}");
        for (s, (g, c)) in chosen.iter().zip(&cands) {
            assert_eq!((&s.source_id, s.start, s.end, s.channel), (&c.source_id, c.start, c.end, c.channel));
            let (eg, et) = rescore(&d, c);
            assert!((s.info_gain - g).abs() <= 1e-12 && (s.info_gain - eg).abs() <= 1e-12);
            assert!((s.split_threshold - et).abs() <= 1e-12, "{label}: {} vs {et}", s.split_threshold);
        }
    }
}

#[test]
fn one_shapelet_per_class_when_g_equals_classes() {
    let pool = discover(&toy(), &config(3)).unwrap();
    assert_eq!(pool.class_counts().values().copied().collect::<Vec<_>>(), vec![1, 1, 1]);
}

#[test]
fn pool_does_not_depend_on_thread_count() {
    let d = toy();
    let run = |threads| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| discover(&d, &config(6)).unwrap())
    };
    let a = run(1);
    assert_eq!(a, run(4));
    assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&run(3)).unwrap());
}

#[test]
fn gain_threshold_with_too_short_instances() {
    // Two instances cannot hold the candidate and sit at +inf.
    let items = [(0.5, true), (0.7, true), (f64::INFINITY, false), (f64::INFINITY, false), (2.0, false)];
    let (g, t) = information_gain(&items);
    assert_eq!((g, t), exhaustive_gain(&items));
    assert!((t - 1.35).abs() < 1e-12);
}
