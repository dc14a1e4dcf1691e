//! Randomized invariant checks over the metric, bounds, and growth-model
//! primitives.

use cropcal::core::{clamp, Bounds};
use cropcal::metrics::{
    mae, mse, pearson_correlation, rmse, wilcoxon_rank_sum, wilcoxon_signed_rank,
};
use cropcal::wofost::{find_preset, simulate_season, DailyWeather, INITIAL_LAI, IRRAD_REF};
use proptest::prelude::*;

fn sample_vec(len: std::ops::Range<usize>) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-1e3..1e3f64, len)
}

fn paired_vecs() -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
    (1usize..40).prop_flat_map(|n| (sample_vec(n..n + 1), sample_vec(n..n + 1)))
}

proptest! {
    #[test]
    fn rmse_is_root_of_mse((y, yhat) in paired_vecs()) {
        let m = mse(&y, &yhat).unwrap();
        let r = rmse(&y, &yhat).unwrap();
        prop_assert!((r - m.sqrt()).abs() <= 1e-12 * (1.0 + m.sqrt()));
    }

    #[test]
    fn mae_never_exceeds_rmse((y, yhat) in paired_vecs()) {
        let a = mae(&y, &yhat).unwrap();
        let r = rmse(&y, &yhat).unwrap();
        prop_assert!(a <= r + 1e-12 * (1.0 + r));
    }

    #[test]
    fn rank_sum_statistics_are_complementary(
        a in sample_vec(1..15),
        b in sample_vec(1..15),
    ) {
        let ab = wilcoxon_rank_sum(&a, &b).unwrap();
        let ba = wilcoxon_rank_sum(&b, &a).unwrap();
        let nm = (a.len() * b.len()) as f64;
        prop_assert!((ab.statistic + ba.statistic - nm).abs() <= 1e-9);
        prop_assert!((ab.p_value - ba.p_value).abs() <= 1e-9);
        prop_assert!(ab.p_value > 0.0 && ab.p_value <= 1.0);
    }

    #[test]
    fn signed_rank_statistic_in_range((a, b) in paired_vecs()) {
        prop_assume!(a.len() <= 25);
        let result = wilcoxon_signed_rank(&a, &b).unwrap();
        let n = a.iter().zip(&b).filter(|(x, y)| x != y).count() as f64;
        prop_assert!(result.statistic >= 0.0);
        prop_assert!(result.statistic <= n * (n + 1.0) / 2.0);
        prop_assert!(result.p_value > 0.0 && result.p_value <= 1.0);
    }

    #[test]
    fn correlation_is_affine_invariant(
        (y, x) in paired_vecs(),
        scale in 0.01..100.0f64,
        shift in -50.0..50.0f64,
    ) {
        prop_assume!(y.len() >= 2);
        let transformed: Vec<f64> = x.iter().map(|v| scale * v + shift).collect();
        match (pearson_correlation(&y, &x), pearson_correlation(&y, &transformed)) {
            (Ok(base), Ok(scaled)) => prop_assert!((base - scaled).abs() <= 1e-6),
            (Err(_), _) | (_, Err(_)) => prop_assume!(false),
        }
    }

    #[test]
    fn clamp_lands_inside_bounds(
        genome in prop::collection::vec(-100.0..100.0f64, 3),
        spans in prop::collection::vec((-50.0..50.0f64, 0.1..40.0f64), 3),
    ) {
        let lower: Vec<f64> = spans.iter().map(|(lo, _)| *lo).collect();
        let upper: Vec<f64> = spans.iter().map(|(lo, span)| lo + span).collect();
        let bounds = Bounds::new(lower, upper).unwrap();
        let clamped = clamp(&genome, &bounds).unwrap();
        prop_assert!(bounds.contains(&clamped));
    }

    #[test]
    fn trajectories_are_monotone_and_bounded(
        weather in prop::collection::vec((0.0..45.0f64, 0.0..30.0f64), 2..60),
    ) {
        let variety = find_preset("HD-2967").unwrap();
        let days: Vec<DailyWeather> = weather
            .iter()
            .map(|&(tavg, rain)| DailyWeather { tavg, rain, irrad: IRRAD_REF })
            .collect();
        let lai = simulate_season(&variety, &days, INITIAL_LAI).unwrap();
        prop_assert_eq!(lai.len(), days.len());
        prop_assert!(lai.windows(2).all(|w| w[1] >= w[0]));
        prop_assert!(lai.iter().all(|&x| (0.0..=variety.crop.lai_max).contains(&x)));
    }
}
