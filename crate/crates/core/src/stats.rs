//! Small fitting helpers for trend experiments.

/// Least-squares slope of `log y` against `log x`.
///
/// Returns `None` when fewer than two usable points remain. A point with
/// `y == 0` makes the whole fit degenerate; if every `y` is zero the slope is
/// reported as exactly `0.0`.
pub fn loglog_slope(xs: &[f64], ys: &[f64]) -> Option<f64> {
    assert_eq!(xs.len(), ys.len());
    if xs.len() < 2 {
        return None;
    }
    if ys.iter().all(|&y| y == 0.0) {
        return Some(0.0);
    }
    if ys.iter().any(|&y| y <= 0.0 || !y.is_finite()) {
        return None;
    }
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    linear_slope(&lx, &ly)
}

/// Ordinary least-squares slope of `ys` against `xs`.
pub fn linear_slope(xs: &[f64], ys: &[f64]) -> Option<f64> {
    let n = xs.len() as f64;
    if xs.len() < 2 {
        return None;
    }
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    Some(sxy / sxx)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recovers_power_law() {
        let xs = [8.0, 16.0, 32.0, 64.0];
        let ys: Vec<f64> = xs.iter().map(|x: &f64| 3.0 * x.powf(2.5)).collect();
        assert!((loglog_slope(&xs, &ys).unwrap() - 2.5).abs() < 1e-12);
    }

    #[test]
    fn zero_field_gives_zero_slope() {
        assert_eq!(loglog_slope(&[1.0, 2.0], &[0.0, 0.0]), Some(0.0));
        assert_eq!(loglog_slope(&[1.0], &[1.0]), None);
    }

    #[test]
    fn scaling_does_not_change_slope() {
        let xs = [256.0, 1024.0, 4096.0];
        let ys = [0.3, 0.2, 0.05];
        let scaled: Vec<f64> = ys.iter().map(|y| 7.5 * y).collect();
        let a = loglog_slope(&xs, &ys).unwrap();
        let b = loglog_slope(&xs, &scaled).unwrap();
        assert!((a - b).abs() < 1e-12);
    }
}
