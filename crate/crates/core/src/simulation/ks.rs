use crate::error::{Error, Result};

/// Two-sided one-sample Kolmogorov–Smirnov statistic `sup |F_n − F|`.
///
/// `samples` need not be sorted.
pub fn ks_statistic<F: Fn(f64) -> f64>(samples: &[f64], cdf: F) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::EmptySample);
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    let mut sup = 0.0f64;
    for (i, &x) in sorted.iter().enumerate() {
        let f = cdf(x);
        let below = i as f64 / n;
        let above = (i + 1) as f64 / n;
        sup = sup.max((f - below).abs()).max((above - f).abs());
    }
    Ok(sup)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_sample_at_median() {
        let d = ks_statistic(&[0.0], |x| if x < 0.0 { 0.0 } else { 0.5 }).unwrap();
        assert_eq!(d, 0.5);
    }

    #[test]
    fn empty_input() {
        assert_eq!(ks_statistic(&[], |x| x), Err(Error::EmptySample));
    }

    #[test]
    fn uniform_grid_is_close() {
        let n = 1000;
        let xs: Vec<f64> = (0..n).rev().map(|i| (i as f64 + 0.5) / n as f64).collect();
        let d = ks_statistic(&xs, |x| x.clamp(0.0, 1.0)).unwrap();
        assert!((d - 0.5 / n as f64).abs() < 1e-12);
    }
}
