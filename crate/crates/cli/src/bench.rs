//! Distribution-time sweep over blocklist sizes. Computation is measured;
//! transfers are modelled as size over throughput.

use std::time::Instant;

use aidkit::blocklist::Blocklist;
use aidkit::crypto::encoding::Wire;
use aidkit::games::kit::KitScheme;
use aidkit::protocol::SystemParams;
use serde::Serialize;

use crate::error::{Result, SimError};
use crate::scenario::rng_for;

/// Default modelled channel: 1 MB/s.
pub const DEFAULT_THROUGHPUT: f64 = 1_000_000.0;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchRow {
    pub bl_size: usize,
    /// Station to token: epoch and blocklist.
    pub download_bytes: usize,
    pub download_ms: f64,
    pub showup_ms: f64,
    /// Token to station: the showup message.
    pub upload_bytes: usize,
    pub upload_ms: f64,
    pub verify_ms: f64,
    pub total_ms: f64,
}

impl BenchRow {
    pub fn compute_ms(&self) -> f64 {
        self.showup_ms + self.verify_ms
    }
}

pub const BENCH_HEADER: &str =
    "bl_size\tdownload_bytes\tdownload_ms\tshowup_ms\tupload_bytes\tupload_ms\tverify_ms\ttotal_ms";

impl std::fmt::Display for BenchRow {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "{}\t{}\t{:.3}\t{:.3}\t{}\t{:.3}\t{:.3}\t{:.3}",
            self.bl_size,
            self.download_bytes,
            self.download_ms,
            self.showup_ms,
            self.upload_bytes,
            self.upload_ms,
            self.verify_ms,
            self.total_ms
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

/// Ordinary least squares `y = slope * x + intercept`. `None` with fewer
/// than two distinct `x` values.
pub fn linear_fit(xs: &[f64], ys: &[f64]) -> Option<LinearFit> {
    let n = xs.len();
    if n != ys.len() || n < 2 {
        return None;
    }
    let mean_x = xs.iter().sum::<f64>() / n as f64;
    let mean_y = ys.iter().sum::<f64>() / n as f64;
    let sxx: f64 = xs.iter().map(|x| (x - mean_x).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| (x - mean_x) * (y - mean_y))
        .sum();
    let slope = sxy / sxx;
    let intercept = mean_y - slope * mean_x;
    let ss_tot: f64 = ys.iter().map(|y| (y - mean_y).powi(2)).sum();
    let ss_res: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| (y - (slope * x + intercept)).powi(2))
        .sum();
    let r_squared = if ss_tot == 0.0 {
        1.0
    } else {
        1.0 - ss_res / ss_tot
    };
    Some(LinearFit {
        slope,
        intercept,
        r_squared,
    })
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let mid = v.len() / 2;
    if v.len() % 2 == 1 {
        v[mid]
    } else {
        (v[mid - 1] + v[mid]) / 2.0
    }
}

fn ms_since(start: Instant) -> f64 {
    start.elapsed().as_secs_f64() * 1e3
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchConfig {
    pub bl_sizes: Vec<usize>,
    /// Bytes per second.
    pub throughput: f64,
    /// Repetitions per size; each row reports the medians.
    pub reps: usize,
    pub seed: u64,
}

/// One registered token shows up and is verified `reps` times against
/// blocklists of each size, filled with other households' revocations.
pub fn run_bench<S: KitScheme>(config: &BenchConfig) -> Result<Vec<BenchRow>> {
    if config.reps == 0 {
        return Err(SimError::Usage(
            "bench needs at least one repetition".into(),
        ));
    }
    if config.throughput.is_nan() || config.throughput <= 0.0 {
        return Err(SimError::Usage("throughput must be positive".into()));
    }
    let params = SystemParams::default();
    let mut rng = rng_for(config.seed, "bench", &[]);
    let rs = S::setup_rs(&mut rng);
    let pk = S::public_key(&rs);
    let mut token = S::setup_token(&pk);
    let req = S::prepare_reg(&mut token, &mut rng)?;
    let (resp, _) = S::process_reg(&rs, 1, &req, &mut rng)?;
    S::finish_reg(&mut token, &resp, &mut rng)?;

    let max = config.bl_sizes.iter().copied().max().unwrap_or(0);
    let pool: Vec<S::Revocation> = (0..max).map(|_| S::random_revocation(&mut rng)).collect();
    let mut epoch = 0u64;
    let mut rows = Vec::with_capacity(config.bl_sizes.len());
    for &size in &config.bl_sizes {
        let bl = Blocklist::from_entries(pool[..size].iter().cloned());
        let (mut showup_ms, mut verify_ms) = (Vec::new(), Vec::new());
        let mut upload_bytes = 0;
        for _ in 0..config.reps {
            epoch += 1;
            let start = Instant::now();
            let showup = S::showup(&params, &mut token, epoch, &bl, &mut rng)?
                .ok_or_else(|| SimError::Verification("bench token refused to show up".into()))?;
            showup_ms.push(ms_since(start));
            let start = Instant::now();
            let ok = S::verify_ent(&params, &pk, epoch, &showup, &bl);
            verify_ms.push(ms_since(start));
            if !ok {
                return Err(SimError::Verification(format!(
                    "showup rejected at blocklist size {size}"
                )));
            }
            upload_bytes = showup.to_bytes().len();
        }
        let download_bytes = 8 + bl.to_bytes().len();
        let transfer_ms = |bytes: usize| bytes as f64 / config.throughput * 1e3;
        let (showup_ms, verify_ms) = (median(showup_ms), median(verify_ms));
        let (download_ms, upload_ms) = (transfer_ms(download_bytes), transfer_ms(upload_bytes));
        rows.push(BenchRow {
            bl_size: size,
            download_bytes,
            download_ms,
            showup_ms,
            upload_bytes,
            upload_ms,
            verify_ms,
            total_ms: download_ms + showup_ms + upload_ms + verify_ms,
        });
    }
    Ok(rows)
}

/// Least-squares fit of showup plus verification time against |BL|.
pub fn compute_fit(rows: &[BenchRow]) -> Option<LinearFit> {
    let xs: Vec<f64> = rows.iter().map(|r| r.bl_size as f64).collect();
    let ys: Vec<f64> = rows.iter().map(BenchRow::compute_ms).collect();
    linear_fit(&xs, &ys)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_line_fits_perfectly() {
        let xs = [0.0, 1.0, 2.0, 4.0];
        let ys: Vec<f64> = xs.iter().map(|x| 3.0 * x + 2.0).collect();
        let fit = linear_fit(&xs, &ys).unwrap();
        assert!((fit.slope - 3.0).abs() < 1e-12);
        assert!((fit.intercept - 2.0).abs() < 1e-12);
        assert!((fit.r_squared - 1.0).abs() < 1e-12);
    }

    #[test]
    fn known_residuals() {
        // Worked by hand: sxx = 5, sxy = 3.5.
        let fit = linear_fit(&[0.0, 1.0, 2.0, 3.0], &[0.0, 1.0, 2.0, 2.0]).unwrap();
        assert!((fit.slope - 0.7).abs() < 1e-12);
        assert!((fit.intercept - 0.2).abs() < 1e-12);
        // ss_res = 0.2^2 + 0.1^2 + 0.4^2 + 0.3^2 = 0.3, ss_tot = 2.75
        assert!((fit.r_squared - (1.0 - 0.3 / 2.75)).abs() < 1e-12);
    }

    #[test]
    fn degenerate_inputs() {
        assert!(linear_fit(&[1.0], &[2.0]).is_none());
        assert!(linear_fit(&[1.0, 1.0], &[2.0, 3.0]).is_none());
    }

    #[test]
    fn medians() {
        assert_eq!(median(vec![3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(vec![4.0, 1.0, 2.0, 3.0]), 2.5);
    }
}
