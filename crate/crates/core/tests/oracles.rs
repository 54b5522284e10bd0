//! Hand-computed and brute-force oracles for the boosting core.

use optboost_core::booster::input_digest;
use optboost_core::hypothesis::stump_predict;
use optboost_core::{
    analyze, enumerate_stumps, run, Dataset, DichotomyPool, Halt, HypothesisId,
};

const LN2: f64 = std::f64::consts::LN_2;

fn toy() -> (Dataset, DichotomyPool) {
    let data = Dataset::from_rows(vec![vec![0.0], vec![1.0], vec![2.0]], vec![1.0; 3]).unwrap();
    let pool = DichotomyPool::from_rows(&[vec![1, 1, -1], vec![1, -1, 1]], &data).unwrap();
    (data, pool)
}

#[test]
fn toy_two_iterations_match_hand_computation() {
    let (data, pool) = toy();
    let (state, trace) = run(&data, &pool, 2).unwrap();
    let r = &trace.records;
    assert_eq!((r[0].selected, r[1].selected), (0, 1));
    assert!((r[0].edge - 1.0 / 3.0).abs() <= 1e-12);
    assert!((r[0].alpha - 0.5 * LN2).abs() <= 1e-12);
    assert!((r[1].edge - 0.5).abs() <= 1e-12);
    assert!((r[1].alpha - 0.5 * 3f64.ln()).abs() <= 1e-12);
    let margins = state.margins();
    let want = [0.895880, -0.202733, 0.202733];
    for (got, want) in margins.iter().zip(want) {
        assert!((got - want).abs() < 1e-6);
    }
}

#[test]
fn toy_weights_after_first_step() {
    let (data, pool) = toy();
    let (state, _) = run(&data, &pool, 1).unwrap();
    // Z_0 = 2√2/3 and w_1 = (1/4, 1/4, 1/2).
    assert!((state.sum_log_z() - (2.0 * 2f64.sqrt() / 3.0).ln()).abs() < 1e-15);
    for (got, want) in state.weights().iter().zip([0.25, 0.25, 0.5]) {
        assert!((got - want).abs() <= 1e-12);
    }
}

#[test]
fn toy_analytics_oracle_values() {
    let (data, pool) = toy();
    let (state, trace) = run(&data, &pool, 1).unwrap();
    let rep = analyze(&state, &trace).unwrap();
    assert!(rep.expected_margin.abs() < 1e-15);
    assert!((rep.lower_bound - (-1.039721)).abs() < 1e-6);
    assert!((rep.upper_bound - 0.058891).abs() < 1e-6);
    assert!((rep.entropy - 1.5 * LN2).abs() < 1e-15);
}

/// Linear-domain replay of the weight update from the recorded coefficients.
fn linear_weights(pool: &DichotomyPool, trace: &optboost_core::Trace, n: usize) -> Vec<f64> {
    let mut w = vec![1.0 / n as f64; n];
    for rec in &trace.records {
        let row = pool.mistake_row(rec.selected);
        let z: f64 = w
            .iter()
            .zip(row)
            .map(|(wi, &eta)| wi * (-(eta as f64) * rec.alpha).exp())
            .sum();
        assert!((z - (1.0 - rec.edge * rec.edge).sqrt()).abs() < 1e-12);
        for (wi, &eta) in w.iter_mut().zip(row) {
            *wi *= (-(eta as f64) * rec.alpha).exp() / z;
        }
    }
    w
}

#[test]
fn log_domain_weights_match_linear_replay() {
    let rows = vec![
        vec![2.0, 0.0],
        vec![0.0, 2.0],
        vec![1.0, 1.0],
        vec![0.0, 0.0],
        vec![1.0, 0.0],
        vec![0.0, 1.0],
    ];
    let data = Dataset::from_rows(rows, vec![1.0, 1.0, 1.0, -1.0, -1.0, -1.0]).unwrap();
    let pool = enumerate_stumps(&data).unwrap();
    let (state, trace) = run(&data, &pool, 40).unwrap();
    assert_eq!(trace.halt, Some(Halt::TMax));
    let oracle = linear_weights(&pool, &trace, data.n());
    for (got, want) in state.weights().iter().zip(&oracle) {
        assert!((got - want).abs() <= 1e-12 * want.max(1e-300) + 1e-15, "{got} vs {want}");
    }
}

/// Every (feature, threshold, polarity) a brute-force search could use: every
/// data value, every midpoint, and a value below the minimum.
fn brute_force_dichotomies(data: &Dataset) -> Vec<Vec<i8>> {
    let mut out: Vec<Vec<i8>> = Vec::new();
    for f in 0..data.d() {
        let mut values: Vec<f64> = (0..data.n()).map(|i| data.feature(i, f)).collect();
        values.sort_by(f64::total_cmp);
        let mut thresholds = vec![values[0] - 1.0];
        for w in values.windows(2) {
            thresholds.push((w[0] + w[1]) / 2.0);
        }
        thresholds.extend(values.iter().map(|v| v + 0.25));
        for th in thresholds {
            for p in [1i8, -1] {
                let row: Vec<i8> =
                    (0..data.n()).map(|i| if data.feature(i, f) >= th { p } else { -p }).collect();
                if !out.contains(&row) {
                    out.push(row);
                }
            }
        }
    }
    out.sort();
    out
}

#[test]
fn stump_pool_equals_brute_force_set() {
    let rows = vec![
        vec![0.3, 5.0, -1.0],
        vec![0.1, 5.0, 2.0],
        vec![0.3, 4.0, 0.5],
        vec![0.9, 6.0, 0.5],
        vec![-0.2, 5.0, 7.0],
    ];
    let data = Dataset::from_rows(rows, vec![1.0, -1.0, -1.0, 1.0, 1.0]).unwrap();
    let pool = enumerate_stumps(&data).unwrap();
    let mut got: Vec<Vec<i8>> = pool.raw_rows().map(<[i8]>::to_vec).collect();
    got.sort();
    assert_eq!(got, brute_force_dichotomies(&data));
    for (j, id) in pool.ids().iter().enumerate() {
        let HypothesisId::Stump { feature, threshold, polarity } = *id else {
            panic!("stump pool carries a matrix id");
        };
        let direct: Vec<i8> = (0..data.n())
            .map(|i| stump_predict(data.feature(i, feature), threshold, polarity))
            .collect();
        assert_eq!(pool.raw_row(j), direct.as_slice());
    }
}

#[test]
fn stump_ids_follow_enumeration_order() {
    let data =
        Dataset::from_rows(vec![vec![1.0, 0.0], vec![2.0, 1.0]], vec![1.0, -1.0]).unwrap();
    let pool = enumerate_stumps(&data).unwrap();
    // Feature 1 reproduces feature 0's dichotomies, so only feature 0 survives.
    assert_eq!(pool.m(), 4);
    let ids: Vec<(usize, f64, i8)> = pool
        .ids()
        .iter()
        .map(|id| match *id {
            HypothesisId::Stump { feature, threshold, polarity } => (feature, threshold, polarity),
            HypothesisId::MatrixRow(_) => unreachable!(),
        })
        .collect();
    assert_eq!(ids, vec![(0, 0.0, 1), (0, 0.0, -1), (0, 1.5, 1), (0, 1.5, -1)]);
}

#[test]
fn digest_tracks_every_input() {
    let (data, pool) = toy();
    let base = input_digest(&data, &pool);
    assert_eq!(base.len(), 64);
    let relabelled =
        Dataset::from_rows(vec![vec![0.0], vec![1.0], vec![2.0]], vec![1.0, 1.0, -1.0]).unwrap();
    let pool2 = DichotomyPool::from_rows(&[vec![1, 1, -1], vec![1, -1, 1]], &relabelled).unwrap();
    assert_ne!(base, input_digest(&relabelled, &pool2));
    let pool3 = DichotomyPool::from_rows(&[vec![1, 1, -1]], &data).unwrap();
    assert_ne!(base, input_digest(&data, &pool3));
}
