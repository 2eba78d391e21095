//! Curve analysis: diversity order from the high-SNR slope and horizontal
//! gaps between curves.

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AnalysisError {
    #[error("need at least {needed} usable points, have {have}")]
    InsufficientData { needed: usize, have: usize },
    #[error("target {0} is not crossed by the curve")]
    NotCrossed(f64),
}

/// One point of an error-rate curve.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CurvePoint {
    pub snr_db: f64,
    pub rate: f64,
    /// Error events behind `rate`.
    pub errors: u64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SlopeFit {
    /// Slope of `log10(rate)` against `snr_db / 10`.
    pub slope: f64,
    pub stderr: f64,
    /// `-slope`.
    pub diversity: f64,
    pub points_used: usize,
}

/// Minimum error count for a point to enter the fit.
pub const MIN_ERRORS: u64 = 10;

/// Least-squares fit over the last `tail` points with at least
/// [`MIN_ERRORS`] errors and a positive rate.
pub fn estimate_diversity_order(points: &[CurvePoint], tail: usize) -> Result<SlopeFit, AnalysisError> {
    let tail = tail.max(3);
    let usable: Vec<&CurvePoint> = points
        .iter()
        .filter(|p| p.errors >= MIN_ERRORS && p.rate > 0.0)
        .collect();
    if usable.len() < tail {
        return Err(AnalysisError::InsufficientData {
            needed: tail,
            have: usable.len(),
        });
    }
    let pts = &usable[usable.len() - tail..];
    let xs: Vec<f64> = pts.iter().map(|p| p.snr_db / 10.0).collect();
    let ys: Vec<f64> = pts.iter().map(|p| p.rate.log10()).collect();
    let (slope, stderr) = least_squares(&xs, &ys);
    Ok(SlopeFit {
        slope,
        stderr,
        diversity: -slope,
        points_used: tail,
    })
}

/// Slope and its standard error for `y = a + b x`.
fn least_squares(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let b = sxy / sxx;
    let a = my - b * mx;
    let rss: f64 = xs.iter().zip(ys).map(|(x, y)| (y - a - b * x).powi(2)).sum();
    let stderr = if xs.len() > 2 {
        (rss / (n - 2.0) / sxx).sqrt()
    } else {
        0.0
    };
    (b, stderr)
}

/// SNR where the curve first falls to `target`, by linear interpolation of
/// `log10(rate)` against dB. Points with zero rate are skipped.
pub fn snr_at(points: &[CurvePoint], target: f64) -> Result<f64, AnalysisError> {
    let lt = target.log10();
    let usable: Vec<&CurvePoint> = points.iter().filter(|p| p.rate > 0.0).collect();
    for w in usable.windows(2) {
        let (a, b) = (w[0], w[1]);
        let (la, lb) = (a.rate.log10(), b.rate.log10());
        if la >= lt && lb <= lt {
            if la == lb {
                return Ok(a.snr_db);
            }
            return Ok(a.snr_db + (la - lt) / (la - lb) * (b.snr_db - a.snr_db));
        }
    }
    Err(AnalysisError::NotCrossed(target))
}

/// Horizontal distance in dB from `reference` to `curve` at `target`
/// (positive when `curve` needs more SNR).
pub fn horizontal_gap(curve: &[CurvePoint], reference: &[CurvePoint], target: f64) -> Result<f64, AnalysisError> {
    Ok(snr_at(curve, target)? - snr_at(reference, target)?)
}

/// Largest horizontal gap over a set of target rates that both curves
/// cross. Targets that either curve misses are skipped.
pub fn max_horizontal_gap(
    curve: &[CurvePoint],
    reference: &[CurvePoint],
    targets: &[f64],
) -> Result<f64, AnalysisError> {
    let gaps: Vec<f64> = targets
        .iter()
        .filter_map(|&t| horizontal_gap(curve, reference, t).ok())
        .collect();
    gaps.into_iter()
        .reduce(f64::max)
        .ok_or(AnalysisError::InsufficientData { needed: 1, have: 0 })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn curve(f: impl Fn(f64) -> f64, snrs: &[f64]) -> Vec<CurvePoint> {
        snrs.iter()
            .map(|&s| CurvePoint {
                snr_db: s,
                rate: f(s),
                errors: 100,
            })
            .collect()
    }

    #[test]
    fn exact_power_law_slope() {
        let pts = curve(|s| 3.0 * 10f64.powf(-2.0 * s / 10.0), &[10.0, 15.0, 20.0, 25.0, 30.0]);
        let fit = estimate_diversity_order(&pts, 4).unwrap();
        assert!((fit.diversity - 2.0).abs() < 1e-12);
        assert!(fit.stderr < 1e-9);
    }

    #[test]
    fn low_count_points_are_ignored() {
        let mut pts = curve(|s| 10f64.powf(-s / 10.0), &[0.0, 10.0, 20.0, 30.0]);
        pts[3].errors = 3;
        assert_eq!(
            estimate_diversity_order(&pts, 4),
            Err(AnalysisError::InsufficientData { needed: 4, have: 3 })
        );
        assert!((estimate_diversity_order(&pts, 3).unwrap().diversity - 1.0).abs() < 1e-12);
    }

    #[test]
    fn interpolated_crossing_and_gap() {
        let a = curve(|s| 10f64.powf(-s / 10.0), &[0.0, 10.0, 20.0, 30.0]);
        let b = curve(|s| 10f64.powf(-(s - 1.5) / 10.0), &[0.0, 10.0, 20.0, 30.0]);
        assert!((snr_at(&a, 1e-2).unwrap() - 20.0).abs() < 1e-12);
        assert!((snr_at(&a, 3e-3).unwrap() - 25.228787452803374).abs() < 1e-9);
        assert!((horizontal_gap(&b, &a, 1e-2).unwrap() - 1.5).abs() < 1e-9);
        assert!(snr_at(&a, 1e-5).is_err());
        let g = max_horizontal_gap(&b, &a, &[1e-1, 1e-2, 1e-7]).unwrap();
        assert!((g - 1.5).abs() < 1e-9);
    }
}
