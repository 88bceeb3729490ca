//! Forecast accuracy metrics.

use crate::analytics::pearson_slices;
use crate::error::{Error, Result};

fn check_lengths(y: &[f64], yhat: &[f64]) -> Result<()> {
    if y.is_empty() || y.len() != yhat.len() {
        return Err(Error::MetricLength {
            left: y.len(),
            right: yhat.len(),
        });
    }
    Ok(())
}

/// Root mean square error: sqrt(mean((y - yhat)^2)).
pub fn rmse(y: &[f64], yhat: &[f64]) -> Result<f64> {
    check_lengths(y, yhat)?;
    let sum: f64 = y
        .iter()
        .zip(yhat)
        .map(|(a, b)| {
            let d = a - b;
            d * d
        })
        .sum();
    Ok((sum / y.len() as f64).sqrt())
}

/// Mean absolute error: mean(|y - yhat|).
pub fn mae(y: &[f64], yhat: &[f64]) -> Result<f64> {
    check_lengths(y, yhat)?;
    let sum: f64 = y.iter().zip(yhat).map(|(a, b)| (a - b).abs()).sum();
    Ok(sum / y.len() as f64)
}

/// Squared sample Pearson correlation between observations and predictions.
///
/// `None` when either side has zero variance. Note this measures linear
/// association only; see [`coefficient_of_determination`] for the
/// goodness-of-fit variant, which also penalizes bias.
pub fn r_squared(y: &[f64], yhat: &[f64]) -> Result<Option<f64>> {
    check_lengths(y, yhat)?;
    if y.len() < 2 {
        return Err(Error::TooFewSamples {
            needed: 2,
            found: y.len(),
        });
    }
    Ok(pearson_slices(y, yhat).map(|r| r * r))
}

/// 1 - SS_res/SS_tot. `None` when the observations have zero variance.
pub fn coefficient_of_determination(y: &[f64], yhat: &[f64]) -> Result<Option<f64>> {
    check_lengths(y, yhat)?;
    if y.len() < 2 {
        return Err(Error::TooFewSamples {
            needed: 2,
            found: y.len(),
        });
    }
    let mean = y.iter().sum::<f64>() / y.len() as f64;
    let ss_tot: f64 = y.iter().map(|v| (v - mean).powi(2)).sum();
    if ss_tot == 0.0 {
        return Ok(None);
    }
    let ss_res: f64 = y.iter().zip(yhat).map(|(a, b)| (a - b).powi(2)).sum();
    Ok(Some(1.0 - ss_res / ss_tot))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn perfect_predictions_are_zero_error() {
        let y = [1.0, 2.0, 3.0];
        assert_eq!(rmse(&y, &y).unwrap(), 0.0);
        assert_eq!(mae(&y, &y).unwrap(), 0.0);
        assert!((r_squared(&y, &y).unwrap().unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(coefficient_of_determination(&y, &y).unwrap(), Some(1.0));
    }

    #[test]
    fn hand_computed_values() {
        let y = [0.0, 0.0];
        let yhat = [3.0, 4.0];
        assert!((rmse(&y, &yhat).unwrap() - 12.5f64.sqrt()).abs() < 1e-12); // 3.53553
        assert!((mae(&y, &yhat).unwrap() - 3.5).abs() < 1e-12);

        // Singleton pair.
        assert_eq!(rmse(&[2.0], &[5.0]).unwrap(), 3.0);
        assert_eq!(mae(&[2.0], &[5.0]).unwrap(), 3.0);
    }

    #[test]
    fn r_squared_known_values() {
        // Affine invariance of the Pearson-based form.
        let y = [1.0, 2.0, 3.0];
        let affine = [5.0, 7.0, 9.0]; // 2y + 3
        assert!((r_squared(&y, &affine).unwrap().unwrap() - 1.0).abs() < 1e-12);

        let r2 = r_squared(&[1.0, 2.0, 3.0], &[1.0, 2.0, 4.0])
            .unwrap()
            .unwrap();
        assert!((r2 - 27.0 / 28.0).abs() < 1e-12, "{r2}"); // 0.96429

        // The determination form is not affine invariant: a biased predictor
        // scores lower.
        let det = coefficient_of_determination(&y, &affine).unwrap().unwrap();
        assert!(det < 0.0, "{det}");
    }

    #[test]
    fn error_paths() {
        assert!(matches!(
            rmse(&[1.0], &[1.0, 2.0]),
            Err(Error::MetricLength { .. })
        ));
        assert!(matches!(rmse(&[], &[]), Err(Error::MetricLength { .. })));
        assert!(matches!(
            r_squared(&[1.0], &[1.0]),
            Err(Error::TooFewSamples { .. })
        ));
        assert_eq!(r_squared(&[2.0, 2.0], &[1.0, 3.0]).unwrap(), None);
        assert_eq!(
            coefficient_of_determination(&[2.0, 2.0], &[1.0, 3.0]).unwrap(),
            None
        );
    }

    #[test]
    fn rmse_dominates_mae_and_both_are_symmetric() {
        let mut rng = ChaCha8Rng::seed_from_u64(19);
        for _ in 0..1000 {
            let n = rng.gen_range(1..100);
            let y: Vec<f64> = (0..n).map(|_| rng.gen_range(-100.0..100.0)).collect();
            let yhat: Vec<f64> = (0..n).map(|_| rng.gen_range(-100.0..100.0)).collect();
            let r = rmse(&y, &yhat).unwrap();
            let m = mae(&y, &yhat).unwrap();
            assert!(r >= m - 1e-12, "rmse {r} < mae {m}");
            assert_eq!(r, rmse(&yhat, &y).unwrap());
            assert_eq!(m, mae(&yhat, &y).unwrap());

            // Translation invariance.
            let c: f64 = rng.gen_range(-50.0..50.0);
            let ys: Vec<f64> = y.iter().map(|v| v + c).collect();
            let yh: Vec<f64> = yhat.iter().map(|v| v + c).collect();
            assert!((rmse(&ys, &yh).unwrap() - r).abs() <= 1e-9 * r.max(1.0));
            assert!((mae(&ys, &yh).unwrap() - m).abs() <= 1e-9 * m.max(1.0));
        }
    }

    #[test]
    fn r_squared_invariant_under_positive_affine_maps() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for _ in 0..200 {
            let n = rng.gen_range(3..60);
            let y: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..50.0)).collect();
            let yhat: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..50.0)).collect();
            let base = match r_squared(&y, &yhat).unwrap() {
                Some(v) => v,
                None => continue,
            };
            let a: f64 = rng.gen_range(0.1..4.0);
            let b: f64 = rng.gen_range(-20.0..20.0);
            let mapped: Vec<f64> = yhat.iter().map(|v| a * v + b).collect();
            let transformed = r_squared(&y, &mapped).unwrap().unwrap();
            assert!((transformed - base).abs() < 1e-9);
        }
    }
}
