//! Standalone SVG plots: stacked time-series panels with critical-time
//! markers, and the phase-diagram heatmap.

use std::path::Path;

use crate::analysis::PhaseDiagram;
use crate::error::Result;

const WIDTH: f64 = 820.0;
const PANEL_HEIGHT: f64 = 240.0;
const MARGIN_LEFT: f64 = 70.0;
const MARGIN_RIGHT: f64 = 20.0;
const MARGIN_TOP: f64 = 34.0;
const MARGIN_BOTTOM: f64 = 46.0;

const PALETTE: [&str; 4] = ["#c0392b", "#2b6cb0", "#1e8449", "#8e44ad"];

/// One stacked panel: a y-axis label plus any number of named curves over
/// the shared x axis.
pub struct Panel {
    pub y_label: String,
    pub curves: Vec<(String, Vec<f64>)>,
}

fn axis_range(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for v in values {
        if v.is_finite() {
            lo = lo.min(v);
            hi = hi.max(v);
        }
    }
    if lo.is_infinite() || hi.is_infinite() || lo.is_nan() || hi.is_nan() {
        return (0.0, 1.0);
    }
    if lo == hi {
        return (lo - 0.5, hi + 0.5);
    }
    let pad = (hi - lo) * 0.05;
    (lo - pad, hi + pad)
}

fn tick_label(v: f64) -> String {
    if v == 0.0 {
        return "0".to_string();
    }
    let a = v.abs();
    if !(1e-3..1e4).contains(&a) {
        format!("{v:.2e}")
    } else {
        format!("{v:.3}")
    }
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Render stacked panels over a common time axis (microseconds), with
/// dashed vertical markers at the given times.
pub fn render_panels_svg(
    path: &Path,
    title: &str,
    times_us: &[f64],
    panels: &[Panel],
    markers_us: &[f64],
) -> Result<()> {
    let n_panels = panels.len().max(1);
    let height = MARGIN_TOP + n_panels as f64 * PANEL_HEIGHT + MARGIN_BOTTOM;
    let (x_lo, x_hi) = axis_range(times_us.iter().copied());
    let plot_w = WIDTH - MARGIN_LEFT - MARGIN_RIGHT;
    let x_of = |t: f64| MARGIN_LEFT + (t - x_lo) / (x_hi - x_lo) * plot_w;

    let mut svg = String::new();
    svg.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{height}\" \
         viewBox=\"0 0 {WIDTH} {height}\">\n"
    ));
    svg.push_str("<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n");
    svg.push_str(&format!(
        "<text x=\"{}\" y=\"22\" font-family=\"sans-serif\" font-size=\"15\" \
         text-anchor=\"middle\">{}</text>\n",
        WIDTH / 2.0,
        xml_escape(title)
    ));

    for (pi, panel) in panels.iter().enumerate() {
        let top = MARGIN_TOP + pi as f64 * PANEL_HEIGHT + 8.0;
        let bottom = MARGIN_TOP + (pi + 1) as f64 * PANEL_HEIGHT - 26.0;
        let (y_lo, y_hi) =
            axis_range(panel.curves.iter().flat_map(|(_, ys)| ys.iter().copied()));
        let y_of = |v: f64| bottom - (v - y_lo) / (y_hi - y_lo) * (bottom - top);

        // frame
        svg.push_str(&format!(
            "<rect x=\"{MARGIN_LEFT}\" y=\"{top}\" width=\"{plot_w}\" height=\"{}\" \
             fill=\"none\" stroke=\"#444\" stroke-width=\"1\"/>\n",
            bottom - top
        ));
        // y ticks
        for k in 0..=4 {
            let v = y_lo + (y_hi - y_lo) * k as f64 / 4.0;
            let y = y_of(v);
            svg.push_str(&format!(
                "<line x1=\"{}\" y1=\"{y}\" x2=\"{MARGIN_LEFT}\" y2=\"{y}\" stroke=\"#444\"/>\n",
                MARGIN_LEFT - 5.0
            ));
            svg.push_str(&format!(
                "<text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"11\" \
                 text-anchor=\"end\">{}</text>\n",
                MARGIN_LEFT - 8.0,
                y + 4.0,
                tick_label(v)
            ));
        }
        // y label
        svg.push_str(&format!(
            "<text x=\"16\" y=\"{}\" font-family=\"sans-serif\" font-size=\"13\" \
             text-anchor=\"middle\" transform=\"rotate(-90 16 {})\">{}</text>\n",
            (top + bottom) / 2.0,
            (top + bottom) / 2.0,
            xml_escape(&panel.y_label)
        ));
        // curves: polyline only when there are at least two points
        for (ci, (name, ys)) in panel.curves.iter().enumerate() {
            let color = PALETTE[ci % PALETTE.len()];
            if times_us.len() >= 2 {
                let mut points = String::new();
                for (t, y) in times_us.iter().zip(ys) {
                    if y.is_finite() {
                        points.push_str(&format!("{:.2},{:.2} ", x_of(*t), y_of(*y)));
                    }
                }
                if points.matches(' ').count() >= 2 {
                    svg.push_str(&format!(
                        "<polyline fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\" \
                         points=\"{}\"/>\n",
                        points.trim_end()
                    ));
                }
            }
            svg.push_str(&format!(
                "<text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"11\" \
                 fill=\"{color}\">{}</text>\n",
                MARGIN_LEFT + 8.0 + 110.0 * ci as f64,
                top + 14.0,
                xml_escape(name)
            ));
        }
        // critical-time markers
        for &m in markers_us {
            if m >= x_lo && m <= x_hi {
                let x = x_of(m);
                svg.push_str(&format!(
                    "<line class=\"tc-marker\" x1=\"{x:.2}\" y1=\"{top}\" x2=\"{x:.2}\" \
                     y2=\"{bottom}\" stroke=\"#777\" stroke-width=\"1\" \
                     stroke-dasharray=\"4 3\"/>\n"
                ));
            }
        }
        // x ticks on the lowest panel
        if pi + 1 == panels.len() {
            for k in 0..=5 {
                let t = x_lo + (x_hi - x_lo) * k as f64 / 5.0;
                let x = x_of(t);
                svg.push_str(&format!(
                    "<line x1=\"{x:.2}\" y1=\"{bottom}\" x2=\"{x:.2}\" y2=\"{}\" stroke=\"#444\"/>\n",
                    bottom + 5.0
                ));
                svg.push_str(&format!(
                    "<text x=\"{x:.2}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"11\" \
                     text-anchor=\"middle\">{}</text>\n",
                    bottom + 18.0,
                    tick_label(t)
                ));
            }
            svg.push_str(&format!(
                "<text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"13\" \
                 text-anchor=\"middle\">t (us)</text>\n",
                MARGIN_LEFT + plot_w / 2.0,
                bottom + 36.0
            ));
        }
    }
    svg.push_str("</svg>\n");

    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent)?;
    }
    std::fs::write(path, svg.as_bytes())?;
    Ok(())
}

/// Phase-diagram heatmap: gold cells where the transition occurs within the
/// horizon, blue where it does not.
pub fn render_heatmap_svg(path: &Path, pd: &PhaseDiagram) -> Result<()> {
    let nx = pd.bx_values.len();
    let nz = pd.bz_values.len();
    let plot_w = WIDTH - MARGIN_LEFT - MARGIN_RIGHT;
    let plot_h = 420.0;
    let height = MARGIN_TOP + plot_h + MARGIN_BOTTOM;
    let cell_w = plot_w / nx as f64;
    let cell_h = plot_h / nz as f64;

    let mut svg = String::new();
    svg.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{height}\" \
         viewBox=\"0 0 {WIDTH} {height}\">\n"
    ));
    svg.push_str("<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n");
    svg.push_str(&format!(
        "<text x=\"{}\" y=\"22\" font-family=\"sans-serif\" font-size=\"15\" \
         text-anchor=\"middle\">transition map over (Bx, Bz)</text>\n",
        WIDTH / 2.0
    ));
    for iz in 0..nz {
        for ix in 0..nx {
            let flag = pd.dqpt_flag[pd.index(ix, iz)];
            let color = if flag { "#e6c229" } else { "#2b6cb0" };
            let x = MARGIN_LEFT + ix as f64 * cell_w;
            // low Bz at the bottom
            let y = MARGIN_TOP + plot_h - (iz + 1) as f64 * cell_h;
            svg.push_str(&format!(
                "<rect x=\"{x:.2}\" y=\"{y:.2}\" width=\"{cell_w:.2}\" height=\"{cell_h:.2}\" \
                 fill=\"{color}\"/>\n"
            ));
        }
    }
    svg.push_str(&format!(
        "<rect x=\"{MARGIN_LEFT}\" y=\"{MARGIN_TOP}\" width=\"{plot_w}\" height=\"{plot_h}\" \
         fill=\"none\" stroke=\"#444\"/>\n"
    ));
    let label = |x: f64, y: f64, text: &str, anchor: &str| {
        format!(
            "<text x=\"{x:.2}\" y=\"{y:.2}\" font-family=\"sans-serif\" font-size=\"12\" \
             text-anchor=\"{anchor}\">{text}</text>\n"
        )
    };
    svg.push_str(&label(
        MARGIN_LEFT,
        MARGIN_TOP + plot_h + 18.0,
        &tick_label(pd.bx_values[0]),
        "middle",
    ));
    svg.push_str(&label(
        MARGIN_LEFT + plot_w,
        MARGIN_TOP + plot_h + 18.0,
        &tick_label(*pd.bx_values.last().unwrap()),
        "middle",
    ));
    svg.push_str(&label(
        MARGIN_LEFT + plot_w / 2.0,
        MARGIN_TOP + plot_h + 36.0,
        "Bx (G)",
        "middle",
    ));
    svg.push_str(&label(MARGIN_LEFT - 8.0, MARGIN_TOP + plot_h, &tick_label(pd.bz_values[0]), "end"));
    svg.push_str(&label(
        MARGIN_LEFT - 8.0,
        MARGIN_TOP + 10.0,
        &tick_label(*pd.bz_values.last().unwrap()),
        "end",
    ));
    svg.push_str(&label(MARGIN_LEFT - 40.0, MARGIN_TOP + plot_h / 2.0, "Bz (G)", "middle"));
    svg.push_str("</svg>\n");

    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent)?;
    }
    std::fs::write(path, svg.as_bytes())?;
    Ok(())
}
