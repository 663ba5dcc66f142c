//! CSV and text formatting.

use std::io::Write;

use aqmflow_core::metrics::RunMetrics;
use aqmflow_core::models::TimeSeries;

use crate::error::Result;

pub const SERIES_HEADER: [&str; 6] = ["t", "q", "p", "ws", "r", "lambda"];
pub const METRICS_HEADER: [&str; 6] = [
    "model",
    "rho",
    "settled_q",
    "settled_p",
    "convergence_time",
    "bound_gap",
];
pub const NOT_CONVERGED: &str = "did not converge";

/// `x` with six significant digits, trailing zeros dropped, switching to
/// exponent notation outside `[1e-4, 1e6)`.
pub fn sig6(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let sci = format!("{x:.5e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent format");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-4..6).contains(&exp) {
        let decimals = (5 - exp) as usize;
        trim_zeros(format!("{x:.decimals$}"))
    } else {
        format!("{}e{exp}", trim_zeros(mantissa.to_string()))
    }
}

fn trim_zeros(s: String) -> String {
    if !s.contains('.') {
        return s;
    }
    s.trim_end_matches('0').trim_end_matches('.').to_string()
}

pub fn opt_sig6(x: Option<f64>) -> String {
    x.map(sig6).unwrap_or_default()
}

pub fn convergence_cell(m: &RunMetrics) -> String {
    m.convergence_time
        .map(sig6)
        .unwrap_or_else(|| NOT_CONVERGED.to_string())
}

pub fn write_series<W: Write>(out: W, ts: &TimeSeries) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(SERIES_HEADER)?;
    for r in &ts.rows {
        w.write_record([sig6(r.t), sig6(r.q), sig6(r.p), sig6(r.ws), sig6(r.r), sig6(r.lambda)])?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

/// One metrics row per model: `(label, rho, metrics)`.
pub fn write_metrics<W: Write>(out: W, rows: &[(String, String, RunMetrics)]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(METRICS_HEADER)?;
    for (label, rho, m) in rows {
        w.write_record([
            label.clone(),
            rho.clone(),
            sig6(m.settled_q),
            sig6(m.settled_p),
            convergence_cell(m),
            opt_sig6(m.bound_gap),
        ])?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

/// Left-aligned text table with two spaces between columns.
pub fn text_table(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut widths: Vec<usize> = header.iter().map(|h| h.len()).collect();
    for row in rows {
        for (w, cell) in widths.iter_mut().zip(row) {
            *w = (*w).max(cell.chars().count());
        }
    }
    let mut out = String::new();
    let mut line = |cells: Vec<&str>| {
        let parts: Vec<String> = cells
            .iter()
            .zip(&widths)
            .map(|(c, w)| format!("{c:<w$}"))
            .collect();
        out.push_str(parts.join("  ").trim_end());
        out.push('\n');
    };
    line(header.to_vec());
    for row in rows {
        line(row.iter().map(String::as_str).collect());
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use aqmflow_core::models::TimeSeriesRow;

    #[test]
    fn six_significant_digits() {
        assert_eq!(sig6(500.0), "500");
        assert_eq!(sig6(0.2002634), "0.200263");
        assert_eq!(sig6(1062.5), "1062.5");
        assert_eq!(sig6(5625.0), "5625");
        assert_eq!(sig6(0.0005), "0.0005");
        assert_eq!(sig6(123456.7), "123457");
        assert_eq!(sig6(999999.7), "1e6");
        assert_eq!(sig6(1.2583456e5), "125835");
        assert_eq!(sig6(2.5e-7), "2.5e-7");
        assert_eq!(sig6(-4.23321), "-4.23321");
        assert_eq!(sig6(0.0), "0");
    }

    #[test]
    fn series_csv_layout() {
        let ts = TimeSeries {
            spacing: 0.01,
            rows: vec![TimeSeriesRow {
                t: 0.01,
                q: 500.0,
                p: 0.2,
                ws: 1062.5,
                r: 0.188889,
                lambda: 5625.0,
            }],
        };
        let mut buf = Vec::new();
        write_series(&mut buf, &ts).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "t,q,p,ws,r,lambda\n0.01,500,0.2,1062.5,0.188889,5625\n"
        );
    }

    #[test]
    fn aligned_table() {
        let t = text_table(&["a", "bb"], &[vec!["xyz".into(), "1".into()]]);
        assert_eq!(t, "a    bb\nxyz  1\n");
    }
}
