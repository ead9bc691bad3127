//! Generalised Yule-Walker systems built from a local autocovariance.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg::{clip_eigenvalues, condition_estimate, factor_with_ridge, quadratic_form};
use crate::local::LocalAcv;

const RIDGE_RETRIES: usize = 3;

/// Local covariance of `X_{t-p}, ..., X_{t+h-1}` under a local
/// autocovariance, with `(B)_{m,n} = c((m + n) / 2T, m - n)`.
#[derive(Debug, Clone, PartialEq)]
pub struct GywSystem {
    b: DMatrix<f64>,
    p: usize,
    h: usize,
    t: usize,
}

/// Predictor weights and error for one horizon step.
#[derive(Debug, Clone, PartialEq)]
pub struct GywSolution {
    /// Weights on `X_{t-p}, ..., X_{t-1}` (oldest first).
    pub weights: Vec<f64>,
    pub mspe: f64,
    /// Ridge added to make the system factorable: zero if none, NaN when
    /// negative eigenvalues had to be clipped instead.
    pub ridge: f64,
}

impl GywSolution {
    /// `sum_i weights[i] * X_{t-p+i}` over the last `p` values of `history`.
    pub fn predict(&self, history: &[f64]) -> f64 {
        let p = self.weights.len();
        let tail = &history[history.len() - p..];
        self.weights.iter().zip(tail).map(|(w, x)| w * x).sum()
    }
}

impl GywSystem {
    /// The full `(p + h) x (p + h)` matrix.
    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.b
    }

    pub fn order(&self) -> usize {
        self.p
    }

    pub fn horizon(&self) -> usize {
        self.h
    }

    /// Forecast origin: the first unobserved time.
    pub fn origin(&self) -> usize {
        self.t
    }

    /// Right-hand side for predicting `X_{t+step}`: entries
    /// `c((n + t + step) / 2T, t + step - n)` for `n = t-p..t-1`.
    pub fn rhs(&self, step: usize) -> DVector<f64> {
        DVector::from_fn(self.p, |r, _| self.b[(r, self.p + step)])
    }

    /// The `(p + 1) x (p + 1)` covariance of the predictors and `X_{t+step}`.
    pub fn step_matrix(&self, step: usize) -> DMatrix<f64> {
        let idx: Vec<usize> = (0..self.p).chain(std::iter::once(self.p + step)).collect();
        DMatrix::from_fn(idx.len(), idx.len(), |r, c| self.b[(idx[r], idx[c])])
    }
}

/// Builds the system for origin `t` (observations at `0..t`), order `p`
/// and horizon `h`.
pub fn build_gyw(lacv: &LocalAcv, t: usize, p: usize, h: usize) -> Result<GywSystem> {
    if p == 0 || h == 0 {
        return Err(Error::argument("order and horizon must be at least 1"));
    }
    if p + h - 1 > lacv.tau_max() {
        return Err(Error::argument(format!(
            "order {p} with horizon {h} needs lag {} but the local autocovariance stops at {}",
            p + h - 1,
            lacv.tau_max()
        )));
    }
    if t < p || t >= lacv.columns() {
        return Err(Error::argument(format!(
            "origin {t} needs {p} past values and a local autocovariance column; {} columns available",
            lacv.columns()
        )));
    }
    let size = p + h;
    let first = (t - p) as i64;
    let b = DMatrix::from_fn(size, size, |m, n| lacv.pair(first + m as i64, first + n as i64));
    Ok(GywSystem { b, p, h, t })
}

/// Solves for the predictor of `X_{t+step}` (`step` is 0-based).
///
/// A failing factorisation of the step matrix is repaired by adding a ridge
/// `1e-8 * trace / (p + 1)`, growing tenfold for up to three retries. A
/// matrix that is still indefinite has its eigenvalues clipped at the first
/// ridge value.
/// With `regularize` the weights are rescaled to unit Euclidean norm.
pub fn solve_step(system: &GywSystem, step: usize, regularize: bool) -> Result<GywSolution> {
    if step >= system.h {
        return Err(Error::argument(format!("step {step} is beyond horizon {}", system.h)));
    }
    let p = system.p;
    let full = system.step_matrix(step);
    let trace = full.trace();
    if trace <= 0.0 {
        // zero local variance everywhere: the process is identically zero
        return Ok(GywSolution {
            weights: vec![0.0; p],
            mspe: 0.0,
            ridge: 0.0,
        });
    }
    let base = 1e-8 * trace / (p + 1) as f64;
    let ridges = (0..RIDGE_RETRIES).map(|i| base * 10f64.powi(i as i32));
    let (ridge, repaired) = match factor_with_ridge(&full, ridges) {
        Some((_, ridge, repaired)) => (ridge, repaired),
        None => {
            // indefinite, not merely ill-conditioned: project onto the
            // positive definite cone
            let projected = clip_eigenvalues(&full, base);
            if projected.clone().cholesky().is_none() {
                return Err(Error::numerical(
                    "gyw",
                    format!(
                        "covariance of order {p} is not positive definite after repair (condition {:.3e})",
                        condition_estimate(&full)
                    ),
                ));
            }
            (f64::NAN, projected)
        }
    };
    let block = repaired.view((0, 0), (p, p)).into_owned();
    let rhs = DVector::from_fn(p, |r, _| repaired[(r, p)]);
    let chol = block
        .cholesky()
        .ok_or_else(|| Error::numerical("gyw", format!("principal block of order {p} is singular")))?;
    let mut w = chol.solve(&rhs);
    if regularize {
        let norm = w.norm();
        if norm > 0.0 {
            w /= norm;
        }
    }
    let mut tilde = DVector::from_element(p + 1, -1.0);
    tilde.rows_mut(0, p).copy_from(&w);
    let mut mspe = quadratic_form(&repaired, &tilde);
    if mspe < 0.0 && mspe > -1e-10 * trace {
        mspe = 0.0;
    }
    if mspe < 0.0 {
        return Err(Error::numerical("gyw", format!("negative prediction error {mspe:.3e}")));
    }
    Ok(GywSolution {
        weights: w.iter().copied().collect(),
        mspe,
        ridge,
    })
}

/// One-step weights `b` (oldest first).
pub fn solve_gyw(system: &GywSystem, regularize: bool) -> Result<Vec<f64>> {
    solve_step(system, 0, regularize).map(|s| s.weights)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ar1_acv(alpha: f64, lags: usize) -> Vec<f64> {
        (0..=lags).map(|k| alpha.powi(k as i32) / (1.0 - alpha * alpha)).collect()
    }

    // Yule-Walker weights by Durbin-Levinson, most recent first.
    fn levinson_weights(acv: &[f64], p: usize) -> Vec<f64> {
        let mut phi = vec![0.0; p + 1];
        let mut err = acv[0];
        for k in 1..=p {
            let kk = (acv[k] - (1..k).map(|j| phi[j] * acv[k - j]).sum::<f64>()) / err;
            let prev = phi.clone();
            phi[k] = kk;
            for j in 1..k {
                phi[j] = prev[j] - kk * prev[k - j];
            }
            err *= 1.0 - kk * kk;
        }
        phi[1..].to_vec()
    }

    #[test]
    fn white_noise_system() {
        let mut acv = vec![0.0; 3];
        acv[0] = 1.0;
        let lacv = LocalAcv::stationary(&acv, 11).unwrap();
        let sys = build_gyw(&lacv, 10, 2, 1).unwrap();
        assert_eq!(sys.matrix(), &DMatrix::<f64>::identity(3, 3));
        assert_eq!(sys.rhs(0), DVector::zeros(2));
        let sol = solve_step(&sys, 0, false).unwrap();
        assert_eq!(sol.weights, vec![0.0, 0.0]);
        assert!((sol.mspe - 1.0).abs() < 1e-15);
    }

    #[test]
    fn ar1_one_step() {
        let lacv = LocalAcv::stationary(&ar1_acv(0.7, 1), 21).unwrap();
        let sys = build_gyw(&lacv, 20, 1, 1).unwrap();
        assert!((sys.rhs(0)[0] / sys.matrix()[(0, 0)] - 0.7).abs() < 1e-12);
        let sol = solve_step(&sys, 0, false).unwrap();
        assert!((sol.weights[0] - 0.7).abs() < 1e-12);
        assert!((sol.mspe - 1.0).abs() < 1e-12);
    }

    #[test]
    fn ar1_direct_two_step() {
        let lacv = LocalAcv::stationary(&ar1_acv(0.7, 2), 21).unwrap();
        let sys = build_gyw(&lacv, 20, 1, 2).unwrap();
        let sol = solve_step(&sys, 1, false).unwrap();
        assert!((sol.weights[0] - 0.49).abs() < 1e-12);
        assert!((sol.mspe - 1.49).abs() < 1e-12);
    }

    #[test]
    fn entries_follow_the_midpoint_rule() {
        let values: Vec<Vec<f64>> = (0..13)
            .map(|k| (0..=7).map(|tau| 1.0 / (1.0 + tau as f64) + 0.01 * k as f64 * (tau % 3) as f64).collect())
            .collect();
        let lacv = LocalAcv::from_values(values.clone()).unwrap();
        for p in 1..=5 {
            let h = 3;
            let t = 12;
            let sys = build_gyw(&lacv, t, p, h).unwrap();
            for m in 0..p + h {
                for n in 0..p + h {
                    let (tm, tn) = (t - p + m, t - p + n);
                    let lag = tm.abs_diff(tn);
                    let s = tm + tn;
                    let col = |k: usize| values[k.min(12)][lag];
                    let want = if s % 2 == 0 { col(s / 2) } else { 0.5 * (col(s / 2) + col(s / 2 + 1)) };
                    assert!((sys.matrix()[(m, n)] - want).abs() < 1e-12);
                    assert_eq!(sys.matrix()[(m, n)], sys.matrix()[(n, m)]);
                }
            }
        }
    }

    #[test]
    fn stationary_weights_match_levinson() {
        let acv: Vec<f64> = (0..=9).map(|k| 0.8f64.powi(k) * (0.9 * k as f64).cos() + if k == 0 { 0.5 } else { 0.0 }).collect();
        let lacv = LocalAcv::stationary(&acv, 41).unwrap();
        for p in 1..=8 {
            let sys = build_gyw(&lacv, 40, p, 1).unwrap();
            let w = solve_gyw(&sys, false).unwrap();
            let oracle = levinson_weights(&acv, p);
            for i in 0..p {
                // weights are oldest first, Levinson most recent first
                assert!((w[p - 1 - i] - oracle[i]).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn argument_errors() {
        let lacv = LocalAcv::stationary(&[1.0, 0.5, 0.2], 11).unwrap();
        assert!(build_gyw(&lacv, 10, 3, 1).is_err());
        assert!(build_gyw(&lacv, 10, 2, 2).is_err());
        assert!(build_gyw(&lacv, 1, 2, 1).is_err());
        assert!(build_gyw(&lacv, 11, 1, 1).is_err());
        assert!(build_gyw(&lacv, 10, 0, 1).is_err());
    }

    #[test]
    fn zero_acv_gives_zero_predictor() {
        let lacv = LocalAcv::stationary(&[0.0, 0.0, 0.0], 11).unwrap();
        let sys = build_gyw(&lacv, 10, 2, 1).unwrap();
        let sol = solve_step(&sys, 0, false).unwrap();
        assert_eq!(sol.weights, vec![0.0, 0.0]);
        assert_eq!(sol.mspe, 0.0);
    }

    #[test]
    fn singular_system_is_repaired() {
        // perfectly correlated neighbours: the covariance is rank one
        let lacv = LocalAcv::stationary(&[1.0, 1.0, 1.0], 11).unwrap();
        let sys = build_gyw(&lacv, 10, 2, 1).unwrap();
        let sol = solve_step(&sys, 0, false).unwrap();
        assert!(sol.ridge > 0.0);
        assert!(sol.mspe >= 0.0 && sol.mspe < 1e-6);
        assert!((sol.weights.iter().sum::<f64>() - 1.0).abs() < 1e-6);
    }

    #[test]
    fn indefinite_system_is_projected() {
        // lag-one covariance larger than the variance: no valid process
        let lacv = LocalAcv::stationary(&[1.0, 1.5], 11).unwrap();
        let sys = build_gyw(&lacv, 10, 1, 1).unwrap();
        let sol = solve_step(&sys, 0, false).unwrap();
        assert!(sol.ridge.is_nan());
        assert!(sol.mspe >= 0.0);
        let projected = clip_eigenvalues(&sys.step_matrix(0), 1e-8);
        let eig = projected.clone().symmetric_eigen();
        assert!(eig.eigenvalues.iter().all(|&v| v >= 1e-8 - 1e-12));
        assert!((sol.weights[0] - projected[(0, 1)] / projected[(0, 0)]).abs() < 1e-9);
    }

    #[test]
    fn regularised_weights_have_unit_norm() {
        let lacv = LocalAcv::stationary(&ar1_acv(0.5, 3), 21).unwrap();
        let sys = build_gyw(&lacv, 20, 3, 1).unwrap();
        let raw = solve_gyw(&sys, false).unwrap();
        let reg = solve_gyw(&sys, true).unwrap();
        let norm: f64 = raw.iter().map(|w| w * w).sum::<f64>().sqrt();
        for (r, g) in raw.iter().zip(&reg) {
            assert!((r / norm - g).abs() < 1e-15);
        }
    }

    fn spd(values: &[f64]) -> DMatrix<f64> {
        let m = DMatrix::from_column_slice(7, 7, values);
        &m * m.transpose() + DMatrix::identity(7, 7) * 0.5
    }

    proptest! {
        #[test]
        fn solution_matches_dense_inverse(values in prop::collection::vec(-1.0f64..1.0, 49)) {
            let cov = spd(&values);
            let p = 6;
            let block = cov.view((0, 0), (p, p)).into_owned();
            let rhs = DVector::from_fn(p, |r, _| cov[(r, p)]);
            let want = block.clone().try_inverse().unwrap() * &rhs;
            let sys = GywSystem { b: cov.view((0, 0), (p + 1, p + 1)).into_owned(), p, h: 1, t: p };
            let sol = solve_step(&sys, 0, false).unwrap();
            for i in 0..p {
                prop_assert!((sol.weights[i] - want[i]).abs() < 1e-10 * (1.0 + want[i].abs()));
            }
            let direct = cov[(p, p)] - rhs.dot(&want);
            prop_assert!((sol.mspe - direct).abs() < 1e-9 * cov[(p, p)]);
            prop_assert!(sol.mspe >= 0.0);
        }
    }
}
