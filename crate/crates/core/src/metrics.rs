//! Summary statistics of a simulated run.

use crate::models::{TimeSeries, TimeSeriesRow};

/// Fraction of the run, counted from the end, treated as steady state.
pub const SETTLED_FRACTION: f64 = 0.25;
/// Convergence band as a fraction of the target queue.
pub const CONVERGENCE_BAND: f64 = 0.05;
/// How long the queue must stay inside the band, in seconds.
pub const CONVERGENCE_HOLD: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunMetrics {
    /// Mean queue over the settled window.
    pub settled_q: f64,
    /// Mean marking probability over the settled window.
    pub settled_p: f64,
    /// Start of the first stay of at least [`CONVERGENCE_HOLD`] seconds within
    /// the band around `q_ref`; `None` if the run never converges.
    pub convergence_time: Option<f64>,
    /// Largest queue gap between the two scenario bounds over the settled
    /// window, when both were run.
    pub bound_gap: Option<f64>,
}

impl RunMetrics {
    pub fn from_series(ts: &TimeSeries, q_ref: f64) -> Self {
        let tail = settled_rows(ts);
        let n = tail.len().max(1) as f64;
        RunMetrics {
            settled_q: tail.iter().map(|r| r.q).sum::<f64>() / n,
            settled_p: tail.iter().map(|r| r.p).sum::<f64>() / n,
            convergence_time: convergence_time(ts, q_ref, CONVERGENCE_BAND * q_ref, CONVERGENCE_HOLD),
            bound_gap: None,
        }
    }

    pub fn with_bound_gap(mut self, gap: Option<f64>) -> Self {
        self.bound_gap = gap;
        self
    }
}

/// Rows in the last [`SETTLED_FRACTION`] of the run.
pub fn settled_rows(ts: &TimeSeries) -> &[TimeSeriesRow] {
    match (ts.rows.first(), ts.rows.last()) {
        (Some(first), Some(last)) => {
            let from = last.t - SETTLED_FRACTION * (last.t - first.t);
            ts.since(from)
        }
        _ => &[],
    }
}

/// First time after which `|q - q_ref| < band` holds for `hold` seconds.
pub fn convergence_time(ts: &TimeSeries, q_ref: f64, band: f64, hold: f64) -> Option<f64> {
    let mut entered: Option<f64> = None;
    for row in &ts.rows {
        if (row.q - q_ref).abs() < band {
            let start = *entered.get_or_insert(row.t);
            if row.t - start >= hold {
                return Some(start);
            }
        } else {
            entered = None;
        }
    }
    None
}

/// Largest `|q_a - q_b|` over the settled window of two runs sampled on the
/// same grid.
pub fn bound_gap(a: &TimeSeries, b: &TimeSeries) -> Option<f64> {
    let ta = settled_rows(a);
    let tb = settled_rows(b);
    if ta.is_empty() || tb.is_empty() {
        return None;
    }
    let gap = ta
        .iter()
        .zip(tb)
        .map(|(x, y)| (x.q - y.q).abs())
        .fold(0.0, f64::max);
    Some(gap)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec::Vec;

    fn series(qs: &[f64], spacing: f64) -> TimeSeries {
        let rows = qs
            .iter()
            .enumerate()
            .map(|(i, &q)| TimeSeriesRow {
                t: i as f64 * spacing,
                q,
                p: q / 1000.0,
                ws: 0.0,
                r: 0.1,
                lambda: 0.0,
            })
            .collect();
        TimeSeries { spacing, rows }
    }

    #[test]
    fn settled_means_use_last_quarter() {
        let qs: Vec<f64> = (0..=100).map(|i| if i >= 75 { 500.0 } else { 0.0 }).collect();
        let m = RunMetrics::from_series(&series(&qs, 1.0), 500.0);
        assert_eq!(m.settled_q, 500.0);
        assert_eq!(m.settled_p, 0.5);
    }

    #[test]
    fn convergence_requires_sustained_band() {
        let mut qs = alloc::vec![0.0; 10];
        qs.extend([500.0; 5]); // brief visit
        qs.push(800.0);
        qs.extend([510.0; 20]);
        let ts = series(&qs, 1.0);
        assert_eq!(convergence_time(&ts, 500.0, 25.0, 10.0), Some(16.0));
        assert_eq!(convergence_time(&ts, 500.0, 5.0, 10.0), None);
    }

    #[test]
    fn gap_between_runs() {
        let a = series(&[0.0, 1.0, 2.0, 3.0, 4.0], 1.0);
        let b = series(&[0.0, 1.0, 2.0, 5.0, 1.0], 1.0);
        assert_eq!(bound_gap(&a, &b), Some(3.0));
        assert_eq!(bound_gap(&a, &TimeSeries::default()), None);
    }
}
