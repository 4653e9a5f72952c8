//! Deterministic CSV and JSON emission.
//!
//! Every float is written with 12 significant digits, LF line endings, and
//! NaN rendered as "nan", so identical data always produces identical bytes.

use std::path::Path;

use crate::analysis::{FisherSeries, ObservableSeries, PhaseDiagram};
use crate::error::Result;

/// 12 significant digits; "nan"/"inf" for non-finite values.
pub fn format_float(x: f64) -> String {
    if x.is_nan() {
        "nan".to_string()
    } else if x.is_infinite() {
        if x > 0.0 { "inf".to_string() } else { "-inf".to_string() }
    } else {
        format!("{x:.11e}")
    }
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent)?;
    }
    std::fs::write(path, text.as_bytes())?;
    Ok(())
}

fn push_row(out: &mut String, cells: &[String]) {
    out.push_str(&cells.join(","));
    out.push('\n');
}

/// Observable time series. Times are emitted in microseconds; the
/// concurrence and tangle columns appear only when the series carries them.
pub fn write_observable_csv(path: &Path, series: &ObservableSeries) -> Result<()> {
    let mut header = vec!["t_us", "p_down", "p_up", "lambda", "mz"];
    if series.concurrence.is_some() {
        header.push("concurrence");
    }
    if series.tangle.is_some() {
        header.extend(["tau123", "c_one_rest_sq", "c12", "c13"]);
    }
    let mut out = String::new();
    push_row(&mut out, &header.iter().map(|s| s.to_string()).collect::<Vec<_>>());
    for k in 0..series.times.len() {
        let mut cells = vec![
            format_float(series.times[k] * 1e6),
            format_float(series.p_down[k]),
            format_float(series.p_up[k]),
            format_float(series.lambda[k]),
            format_float(series.mz[k]),
        ];
        if let Some(conc) = &series.concurrence {
            cells.push(format_float(conc[k]));
        }
        if let Some(tangle) = &series.tangle {
            cells.push(format_float(tangle.tau123[k]));
            cells.push(format_float(tangle.c_one_rest_sq[k]));
            cells.push(format_float(tangle.c12[k]));
            cells.push(format_float(tangle.c13[k]));
        }
        push_row(&mut out, &cells);
    }
    write_text(path, &out)
}

pub fn write_fisher_csv(path: &Path, series: &FisherSeries) -> Result<()> {
    let mut out = String::from("t_us,p_up,fi\n");
    for k in 0..series.times.len() {
        push_row(
            &mut out,
            &[
                format_float(series.times[k] * 1e6),
                format_float(series.p_up[k]),
                format_float(series.fi[k]),
            ],
        );
    }
    write_text(path, &out)
}

/// One row per (Bx, Bz) grid point, Bx fastest, in grid order.
pub fn write_sweep_csv(path: &Path, pd: &PhaseDiagram) -> Result<()> {
    let mut out = String::from("bx_g,bz_g,dqpt_flag,first_tc_us,mean_mz\n");
    for (iz, &bz) in pd.bz_values.iter().enumerate() {
        for (ix, &bx) in pd.bx_values.iter().enumerate() {
            let k = pd.index(ix, iz);
            push_row(
                &mut out,
                &[
                    format_float(bx),
                    format_float(bz),
                    if pd.dqpt_flag[k] { "1".into() } else { "0".into() },
                    format_float(pd.first_tc[k] * 1e6),
                    format_float(pd.mean_mz[k]),
                ],
            );
        }
    }
    write_text(path, &out)
}

/// Side-by-side magnetization comparison of two runs on one grid.
pub fn write_comparison_csv(
    path: &Path,
    times: &[f64],
    label_a: &str,
    series_a: &[f64],
    label_b: &str,
    series_b: &[f64],
) -> Result<()> {
    let mut out = format!("t_us,{label_a},{label_b},abs_delta\n");
    for k in 0..times.len() {
        push_row(
            &mut out,
            &[
                format_float(times[k] * 1e6),
                format_float(series_a[k]),
                format_float(series_b[k]),
                format_float((series_a[k] - series_b[k]).abs()),
            ],
        );
    }
    write_text(path, &out)
}

/// Pretty JSON with a trailing newline. serde_json emits shortest-exact
/// floats, so parsing recovers every scalar bit for bit.
pub fn write_json(path: &Path, value: &serde_json::Value) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    write_text(path, &text)
}
