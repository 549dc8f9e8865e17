use extprob::detector::{
    coarse_view, equal_pa_pair, exact_expectations, predictivity_report, simulate, simulate_sharded, ColorModel,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const N: u64 = 1_000_000;

fn random_model(rng: &mut ChaCha8Rng) -> ColorModel {
    let k = rng.random_range(1..=6);
    let mut colors: Vec<i64> = Vec::new();
    while colors.len() < k {
        let n = rng.random_range(-5..=5);
        if !colors.contains(&n) {
            colors.push(n);
        }
    }
    let raw: Vec<f64> = (0..k).map(|_| rng.random_range(0.05..1.0)).collect();
    let total: f64 = raw.iter().sum();
    let mut probs: Vec<f64> = raw.iter().map(|r| r / total).collect();
    let head: f64 = probs[..k - 1].iter().sum();
    probs[k - 1] = 1.0 - head;
    let pairs: Vec<(i64, f64)> = colors.into_iter().zip(probs).collect();
    ColorModel::new(&pairs).unwrap()
}

#[test]
fn simulation_converges_to_closed_form() {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    for k in 0..50 {
        let model = random_model(&mut rng);
        let exact = exact_expectations(&model).unwrap();
        let run = simulate(&model, N, k).unwrap();
        let bound = 5.0 * exact.stddev / (N as f64).sqrt();
        assert!((run.p_a - exact.p_a).abs() <= bound.max(1e-12), "model {k}: {} vs {}", run.p_a, exact.p_a);
        assert_eq!(run.counts.iter().map(|c| c.count).sum::<u64>(), N);
        let p_total: f64 = run.counts.iter().map(|c| c.p).sum();
        assert!((p_total - 1.0).abs() < 1e-12);
    }
}

#[test]
fn mixed_model_example() {
    let model = ColorModel::new(&[(-1, 0.2), (0, 0.5), (2, 0.3)]).unwrap();
    let exact = exact_expectations(&model).unwrap();
    assert!((exact.p_a - 0.4).abs() < 1e-15);
    assert_eq!(exact.coarse, 0.5);
    assert!((exact.mismatch - 0.1).abs() < 1e-15);
    let run = simulate(&model, N, 17).unwrap();
    let bound = 5.0 * exact.stddev / (N as f64).sqrt();
    assert!((run.p_a - 0.4).abs() <= bound);
    assert!((run.coarse - 0.5).abs() <= 5.0 * 0.5 / (N as f64).sqrt());
    assert_eq!(coarse_view(&run).one_minus_p0, 1.0 - run.p_0);
}

#[test]
fn binary_support_sees_no_difference() {
    for (seed, p) in [(1u64, 0.5), (2, 0.1), (3, 0.93)] {
        let model = ColorModel::new(&[(0, 1.0 - p), (1, p)]).unwrap();
        let exact = exact_expectations(&model).unwrap();
        assert!((exact.p_a - exact.coarse).abs() <= 1e-15);
        let run = simulate(&model, N, seed).unwrap();
        assert!((run.p_a - run.coarse).abs() <= 3.0 / (N as f64).sqrt());
        assert!((run.p_a - p).abs() <= 3.0 / (N as f64).sqrt());
    }
}

#[test]
fn trivial_models() {
    let run = simulate(&ColorModel::new(&[(1, 1.0)]).unwrap(), 100, 0).unwrap();
    assert_eq!((run.p_a, run.p_0, run.mismatch), (1.0, 0.0, 0.0));
    let r = predictivity_report(&ColorModel::new(&[(0, 1.0)]).unwrap()).unwrap();
    assert_eq!((r.p_a, r.coarse.one_minus_p0, r.mismatch), (0.0, 0.0, 0.0));
    let r = predictivity_report(&ColorModel::new(&[(-2, 0.5), (2, 0.5)]).unwrap()).unwrap();
    assert_eq!((r.p_a, r.coarse.one_minus_p0), (0.0, 1.0));
}

#[test]
fn equal_pa_models_for_random_targets() {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    for _ in 0..100 {
        let t = rng.random_range(-1.0..2.0);
        let (m1, m2) = equal_pa_pair(t).unwrap();
        let e1 = exact_expectations(&m1).unwrap();
        let e2 = exact_expectations(&m2).unwrap();
        assert!((e1.p_a - t).abs() <= 1e-12);
        assert!((e2.p_a - t).abs() <= 1e-12);
        assert_ne!(e1.p_n, e2.p_n);
    }
    // the worked pair from the money analogy
    let a = predictivity_report(&ColorModel::new(&[(-1, 0.2), (0, 0.5), (2, 0.3)]).unwrap()).unwrap();
    let b = predictivity_report(&ColorModel::new(&[(0, 0.6), (1, 0.4)]).unwrap()).unwrap();
    assert!((a.p_a - b.p_a).abs() < 1e-15);
    assert_ne!(a.table, b.table);
}

#[test]
fn runs_are_reproducible_across_shardings() {
    let model = ColorModel::new(&[(-3, 0.1), (0, 0.4), (1, 0.3), (4, 0.2)]).unwrap();
    let serial = simulate_sharded(&model, 200_003, 9, 1).unwrap();
    for shards in [2, 3, 7, 64] {
        assert_eq!(simulate_sharded(&model, 200_003, 9, shards).unwrap(), serial);
    }
    assert_eq!(simulate(&model, 200_003, 9).unwrap(), serial);
    assert_ne!(simulate(&model, 200_003, 10).unwrap(), serial);
}

#[test]
fn malformed_models_are_rejected() {
    assert!(ColorModel::new(&[(0, 0.5)]).is_err());
    assert!(ColorModel::new(&[(0, 0.5), (0, 0.5)]).is_err());
    assert!(ColorModel::new(&[(65, 1.0)]).is_err());
    assert!(ColorModel::new(&[(0, 1.5), (1, -0.5)]).is_err());
    assert!(ColorModel::new(&[]).is_err());
}
