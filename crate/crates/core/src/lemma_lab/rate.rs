use serde::Serialize;

use crate::error::{LabError, Result};

/// Least-squares power law `value ≈ constant · ε^slope`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RateReport {
    /// `(ε, value)` with strictly decreasing `ε`.
    pub pairs: Vec<(f64, f64)>,
    pub slope: f64,
    pub constant: f64,
    /// Whether the slope met the threshold it was judged against, if any.
    pub passed: bool,
}

impl RateReport {
    /// Marks the report as passing iff `slope >= min_slope`.
    pub fn require_slope(mut self, min_slope: f64) -> Self {
        self.passed = self.slope >= min_slope;
        self
    }

    pub fn require_slope_between(mut self, lo: f64, hi: f64) -> Self {
        self.passed = self.slope >= lo && self.slope <= hi;
        self
    }
}

/// Fits `log value = slope · log ε + log constant` over all pairs.
pub fn fit_rate(pairs: &[(f64, f64)]) -> Result<RateReport> {
    if pairs.len() < 3 {
        return Err(LabError::RateUndefined(format!("{} pairs; at least 3 are needed", pairs.len())));
    }
    if pairs.windows(2).any(|w| !(w[1].0 < w[0].0)) {
        return Err(LabError::RateUndefined("epsilons must be strictly decreasing".into()));
    }
    if let Some(&(e, v)) = pairs.iter().find(|&&(e, v)| !(e > 0.0 && v > 0.0 && v.is_finite())) {
        return Err(LabError::RateUndefined(format!("nonpositive pair ({e}, {v})")));
    }
    let n = pairs.len() as f64;
    let xs: Vec<f64> = pairs.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = pairs.iter().map(|p| p.1.ln()).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let slope = sxy / sxx;
    let constant = (my - slope * mx).exp();
    Ok(RateReport { pairs: pairs.to_vec(), slope, constant, passed: true })
}

/// Like [`fit_rate`], but drops the largest `ε` once four or more pairs are
/// available, since the coarsest scale is usually pre-asymptotic.
pub fn fit_rate_asymptotic(pairs: &[(f64, f64)]) -> Result<RateReport> {
    if pairs.len() >= 4 {
        fit_rate(&pairs[1..])
    } else {
        fit_rate(pairs)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn ladder(f: impl Fn(f64) -> f64) -> Vec<(f64, f64)> {
        (0..6).map(|i| 0.5_f64.powi(i)).map(|e| (e, f(e))).collect()
    }

    #[test]
    fn exact_power_laws() {
        let r = fit_rate(&ladder(|e| e)).unwrap();
        assert!((r.slope - 1.0).abs() < 1e-12);
        let r = fit_rate(&ladder(|e| 5.0 * e.sqrt())).unwrap();
        assert!((r.slope - 0.5).abs() < 1e-10);
        assert!((r.constant - 5.0).abs() < 1e-10);
    }

    #[test]
    fn noisy_power_law() {
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        for _ in 0..50 {
            let pairs: Vec<(f64, f64)> = (0..8)
                .map(|i| 0.5_f64.powi(i))
                .map(|e| (e, 2.0 * e.powf(0.7) * (1.0 + rng.gen_range(-0.05..0.05))))
                .collect();
            let r = fit_rate(&pairs).unwrap();
            assert!((r.slope - 0.7).abs() < 0.05, "{}", r.slope);
        }
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(fit_rate(&[(1.0, 1.0), (0.5, 0.5)]), Err(LabError::RateUndefined(_))));
        assert!(fit_rate(&[(1.0, 1.0), (0.5, 0.0), (0.25, 0.1)]).is_err());
        assert!(fit_rate(&[(1.0, 1.0), (2.0, 0.5), (0.25, 0.1)]).is_err());
    }

    #[test]
    fn asymptotic_fit_drops_the_coarsest_point() {
        let mut pairs = ladder(|e| e * e);
        pairs[0].1 = 100.0;
        assert!((fit_rate_asymptotic(&pairs).unwrap().slope - 2.0).abs() < 1e-12);
        assert_eq!(fit_rate_asymptotic(&pairs).unwrap().pairs.len(), 5);
    }
}
