//! Seeded Monte-Carlo checks of whole-pipeline behaviour.

use forlap::evaluation::{rolling_backtest, LEVELS};
use forlap::forecast::{forecast_forlap, ForlapOptions, MethodConfig};
use forlap::local::{local_acv, lpacf_windowed, select_p, WindowConfig};
use forlap::simulation::{simulate_replication, ModelId, ModelSpec};
use forlap::spectral::{estimate_spectrum, SpectralOptions};

fn series(model: ModelId, seed: u64, rep: u64) -> Vec<f64> {
    simulate_replication(&ModelSpec::new(model), seed, rep).unwrap()
}

#[test]
fn white_noise_lag_zero_acv_recovers_variance() {
    let sigma2: f64 = 2.5;
    let spec = ModelSpec {
        length_override: Some(512),
        ..ModelSpec::new(ModelId::A)
    };
    let mut total = 0.0;
    let reps = 100;
    for rep in 0..reps {
        let long: Vec<f64> = simulate_replication(&spec, 11, rep)
            .unwrap()
            .iter()
            .map(|v| v * sigma2.sqrt())
            .collect();
        assert_eq!(long.len(), 512);
        let fit = estimate_spectrum(&long, &SpectralOptions::default()).unwrap();
        let lacv = local_acv(&fit.ews, fit.basis.table(), 0).unwrap();
        let central: Vec<f64> = (128..384).map(|k| lacv.get(k, 0)).collect();
        total += central.iter().sum::<f64>() / central.len() as f64;
    }
    let mean = total / reps as f64;
    assert!((mean / sigma2 - 1.0).abs() < 0.15, "mean lag-0 acv {mean} vs {sigma2}");
}

#[test]
fn stationary_ar1_mostly_selects_order_one() {
    let reps = 200;
    let mut ones = 0;
    for rep in 0..reps {
        let x = series(ModelId::B, 5, rep);
        let n = x.len();
        let est = lpacf_windowed(
            &x,
            &WindowConfig::default_for(n),
            (n as f64 - 1.0) / n as f64,
            &SpectralOptions::default(),
        )
        .unwrap();
        if select_p(&est) == 1 {
            ones += 1;
        }
    }
    assert!(ones * 100 >= 60 * reps, "p = 1 in {ones}/{reps}");
}

#[test]
fn lpacf_clipping_is_rare_on_stationary_models() {
    let (mut clipped, mut lags) = (0, 0);
    for model in [ModelId::A, ModelId::B, ModelId::C] {
        for rep in 0..50 {
            let x = series(model, 17, rep);
            let n = x.len();
            let config = WindowConfig::default_for(n);
            for z in [0.25, 0.5, (n as f64 - 1.0) / n as f64] {
                let est = lpacf_windowed(&x, &config, z, &SpectralOptions::default()).unwrap();
                assert!(est.values.iter().all(|q| q.abs() <= 1.0));
                assert!(est.ci_halfwidth.iter().all(|&h| h > 0.0));
                clipped += est.clipped;
                lags += est.tau_max();
            }
        }
    }
    assert!(clipped * 100 < lags, "{clipped} of {lags} lags clipped");
}

#[test]
fn white_noise_forecasts_are_centred_and_calibrated() {
    let reps = 200;
    let mut mean_point = 0.0;
    let mut covered = 0.0;
    for rep in 0..reps {
        let x = series(ModelId::A, 23, rep);
        let fc = forecast_forlap(&x[..127], 1, 0.1, &ForlapOptions::default()).unwrap();
        mean_point += fc.points[0] / reps as f64;
        let run = rolling_backtest(&x, &MethodConfig::default_for(forlap::forecast::Method::Forlap), 20, 1, &LEVELS)
            .unwrap();
        covered += run.coverage(0.9).unwrap() / reps as f64;
    }
    assert!(mean_point.abs() < 0.5, "mean point forecast {mean_point}");
    assert!((covered - 88.8).abs() < 4.0, "coverage {covered}");
}
