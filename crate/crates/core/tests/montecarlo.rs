use snrwall_core::detector::Hypothesis;
use snrwall_core::montecarlo::{
    empirical_wall_search, median, run_scenario, summarize, ScenarioConfig,
};
use snrwall_core::noise::{Ar1Synthesis, NoiseModel};

fn config(h0: NoiseModel, counts: Vec<usize>, instances: usize) -> ScenarioConfig {
    ScenarioConfig {
        receivers: 2,
        smoothing: 1,
        oversampling: 4,
        sample_counts: counts,
        snr_db: vec![0.0, -5.0],
        h0_noise: h0,
        h1_noise: NoiseModel::white(1.0).unwrap(),
        instances,
        bins: 8,
        seed: 77,
    }
}

#[test]
fn white_noise_statistic_median_tends_to_one() {
    let cfg = config(
        NoiseModel::white(1.0).unwrap(),
        vec![1_000, 10_000, 100_000],
        20,
    );
    let samples = run_scenario(&cfg).unwrap();
    let mut medians = Vec::new();
    for n in [1_000, 10_000, 100_000] {
        let mut v: Vec<f64> = samples
            .iter()
            .filter(|s| s.hypothesis == Hypothesis::H0 && s.n == n)
            .map(|s| s.statistic)
            .collect();
        v.sort_by(f64::total_cmp);
        medians.push(median(&v));
    }
    assert!(medians.windows(2).all(|w| w[1] < w[0]), "{medians:?}");
    assert!(medians.iter().all(|&m| m > 1.0));
    // g = 4: (1 + sqrt(g/N))^2 / (1 - sqrt(g/N))^2 at N = 10^5 is about 1.026
    assert!(medians[2] < 1.04, "{medians:?}");
}

#[test]
fn runs_are_reproducible_and_seed_sensitive() {
    let h0 = NoiseModel::ar1(0.3, 1.0, Ar1Synthesis::Recursive).unwrap();
    let mut cfg = config(h0, vec![200], 4);
    let a = run_scenario(&cfg).unwrap();
    let b = run_scenario(&cfg).unwrap();
    assert_eq!(a, b);
    cfg.seed += 1;
    let c = run_scenario(&cfg).unwrap();
    assert_ne!(a, c);
    // H0 cell first, then H1 cells in SNR order
    assert_eq!(a.len(), 3 * 4);
    assert!(a[..4]
        .iter()
        .all(|s| s.hypothesis == Hypothesis::H0 && s.snr_db.is_none()));
    assert!(a[4..8].iter().all(|s| s.snr_db == Some(0.0)));
    assert!(a.iter().all(|s| s.statistic >= 1.0));
}

#[test]
fn strong_signal_is_separated_from_white_noise() {
    let cfg = config(NoiseModel::white(1.0).unwrap(), vec![5_000], 10);
    let samples = run_scenario(&cfg).unwrap();
    let stats = |pred: &dyn Fn(&snrwall_core::montecarlo::StatisticSample) -> bool| {
        let v: Vec<f64> = samples
            .iter()
            .filter(|s| pred(s))
            .map(|s| s.statistic)
            .collect();
        summarize(&v, 8).unwrap()
    };
    let h0 = stats(&|s| s.hypothesis == Hypothesis::H0);
    let h1 = stats(&|s| s.snr_db == Some(0.0));
    assert!(
        h1.median > 2.0 * h0.median,
        "{} vs {}",
        h1.median,
        h0.median
    );
}

#[test]
fn wall_search_crosses_for_colored_h0() {
    // strongly colored H0 noise pushes the H0 median above weak H1 signals
    let cfg = ScenarioConfig {
        receivers: 1,
        smoothing: 2,
        snr_db: vec![10.0, 0.0, -10.0],
        ..config(
            NoiseModel::ar1(0.5, 1.0, Ar1Synthesis::Spectral).unwrap(),
            vec![20_000],
            9,
        )
    };
    let result = empirical_wall_search(&cfg, &[10.0, 0.0, -10.0]).unwrap();
    assert_eq!(result.n, 20_000);
    assert_eq!(result.crossing, Some((10.0, 0.0)), "{result:?}");
    let white = ScenarioConfig {
        h0_noise: NoiseModel::white(1.0).unwrap(),
        ..cfg
    };
    assert_eq!(
        empirical_wall_search(&white, &[10.0, 0.0, -10.0])
            .unwrap()
            .crossing,
        None
    );
}
