use serde::Serialize;

use crate::simulator::EstimateWithCI;

const Z95: f64 = 1.959_963_984_540_054;

/// Least-squares line through `(ln t, ln u)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExponentFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    /// 95% half-width of the slope.
    pub ci_half_width: f64,
    pub points: usize,
}

fn weighted_line(x: &[f64], y: &[f64], w: &[f64]) -> (f64, f64, f64, f64) {
    let sw: f64 = w.iter().sum();
    let mx = x.iter().zip(w).map(|(x, w)| w * x).sum::<f64>() / sw;
    let my = y.iter().zip(w).map(|(y, w)| w * y).sum::<f64>() / sw;
    let sxx: f64 = x.iter().zip(w).map(|(x, w)| w * (x - mx).powi(2)).sum();
    let sxy: f64 = x.iter().zip(y).zip(w).map(|((x, y), w)| w * (x - mx) * (y - my)).sum();
    let syy: f64 = y.iter().zip(w).map(|(y, w)| w * (y - my).powi(2)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ssr: f64 = x.iter().zip(y).zip(w).map(|((x, y), w)| w * (y - intercept - slope * x).powi(2)).sum();
    let r2 = if syy > 0.0 { (1.0 - ssr / syy).clamp(0.0, 1.0) } else { 1.0 };
    (slope, intercept, r2, sxx)
}

/// Fit of Monte Carlo estimates with weights `1/Var(ln û)` from their CIs.
/// Points with zero estimate must be removed by the caller.
pub fn fit_exponent(t: &[f64], est: &[EstimateWithCI]) -> Option<ExponentFit> {
    if t.len() != est.len() || t.len() < 2 {
        return None;
    }
    let x: Vec<f64> = t.iter().map(|t| t.ln()).collect();
    let y: Vec<f64> = est.iter().map(|e| e.mean.ln()).collect();
    // floor keeps p̂ = 1 from receiving infinite weight
    let w: Vec<f64> = est
        .iter()
        .map(|e| {
            let sd = (e.half_width_95 / Z95).max(e.mean / (e.n_paths as f64).sqrt() * 1e-3) / e.mean;
            1.0 / (sd * sd)
        })
        .collect();
    if y.iter().any(|v| !v.is_finite()) {
        return None;
    }
    let (slope, intercept, r_squared, sxx) = weighted_line(&x, &y, &w);
    Some(ExponentFit { slope, intercept, r_squared, ci_half_width: Z95 / sxx.sqrt(), points: t.len() })
}

/// Ordinary least squares with the residual-based slope interval (normal
/// approximation).
pub fn fit_exponent_unweighted(t: &[f64], u: &[f64]) -> Option<ExponentFit> {
    if t.len() != u.len() || t.len() < 3 {
        return None;
    }
    let x: Vec<f64> = t.iter().map(|t| t.ln()).collect();
    let y: Vec<f64> = u.iter().map(|u| u.ln()).collect();
    if y.iter().any(|v| !v.is_finite()) {
        return None;
    }
    let w = vec![1.0; x.len()];
    let (slope, intercept, r_squared, sxx) = weighted_line(&x, &y, &w);
    let ssr: f64 = x.iter().zip(&y).map(|(x, y)| (y - intercept - slope * x).powi(2)).sum();
    let se = (ssr / (x.len() - 2) as f64 / sxx).sqrt();
    Some(ExponentFit { slope, intercept, r_squared, ci_half_width: Z95 * se, points: t.len() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn exact_power_law_recovered() {
        let t = [0.01, 0.02, 0.05, 0.1, 0.2];
        let u: Vec<f64> = t.iter().map(|t: &f64| 3.0 * t.powf(0.7)).collect();
        let f = fit_exponent_unweighted(&t, &u).unwrap();
        assert!((f.slope - 0.7).abs() < 1e-12);
        assert!((f.intercept - 3f64.ln()).abs() < 1e-12);
        assert!((f.r_squared - 1.0).abs() < 1e-12);
    }

    #[test]
    fn weighted_fit_uses_intervals() {
        let t = [0.01, 0.03, 0.1, 0.3];
        let est: Vec<EstimateWithCI> = t
            .iter()
            .map(|t: &f64| EstimateWithCI { mean: t.powf(0.5), half_width_95: 0.01 * t.powf(0.5), n_paths: 1000 })
            .collect();
        let f = fit_exponent(&t, &est).unwrap();
        assert!((f.slope - 0.5).abs() < 1e-12);
        // ln-scale sd 0.01/1.96 on each point
        let x: Vec<f64> = t.iter().map(|t| t.ln()).collect();
        let mx = x.iter().sum::<f64>() / 4.0;
        let sxx: f64 = x.iter().map(|x| (x - mx).powi(2)).sum();
        let expected = Z95 * (0.01 / Z95) / sxx.sqrt();
        assert!((f.ci_half_width - expected).abs() < 1e-12);
    }

    #[test]
    fn zero_estimate_rejected() {
        let est = [EstimateWithCI { mean: 0.0, half_width_95: 0.0, n_paths: 10 }; 3];
        assert!(fit_exponent(&[0.1, 0.2, 0.3], &est).is_none());
    }

    proptest! {
        #[test]
        fn r_squared_in_unit_interval(noise in proptest::collection::vec(-1.0f64..1.0, 6)) {
            let t = [0.01f64, 0.02, 0.04, 0.08, 0.16, 0.32];
            let u: Vec<f64> = t.iter().zip(&noise).map(|(t, e)| t.powf(0.5) * e.exp()).collect();
            let f = fit_exponent_unweighted(&t, &u).unwrap();
            prop_assert!((0.0..=1.0).contains(&f.r_squared));
        }
    }
}
