//! Minimal SVG line plots. The output is plain text with fixed-precision
//! coordinates, so identical inputs produce identical bytes.

use std::io::Write;
use std::path::Path;

use crate::Failure;

const WIDTH: f64 = 860.0;
const HEIGHT: f64 = 480.0;
const MARGIN_LEFT: f64 = 70.0;
const MARGIN_RIGHT: f64 = 20.0;
const MARGIN_TOP: f64 = 40.0;
const MARGIN_BOTTOM: f64 = 50.0;
const COLORS: [&str; 2] = ["#1f77b4", "#d62728"];

/// Most points kept per polyline; longer series are strided down.
const MAX_POINTS: usize = 1200;

pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
}

fn downsample(points: &[(f64, f64)]) -> Vec<(f64, f64)> {
    if points.len() <= MAX_POINTS {
        return points.to_vec();
    }
    let stride = points.len().div_ceil(MAX_POINTS);
    let mut out: Vec<(f64, f64)> = points.iter().copied().step_by(stride).collect();
    if out.last() != points.last() {
        out.push(*points.last().unwrap());
    }
    out
}

/// Writes one plot with a polyline per series, a frame, extent labels, and
/// a legend.
pub fn line_plot(
    title: &str,
    x_label: &str,
    y_label: &str,
    series: &[Series],
    path: &Path,
) -> Result<(), Failure> {
    let io_err =
        |e: std::io::Error| Failure::Runtime(format!("cannot write {}: {e}", path.display()));
    let all: Vec<&(f64, f64)> = series.iter().flat_map(|s| s.points.iter()).collect();
    if all.is_empty() {
        return Err(Failure::Runtime(format!(
            "nothing to plot for {}",
            path.display()
        )));
    }
    let (mut x0, mut x1) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY);
    for &&(x, y) in &all {
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(y);
        y1 = y1.max(y);
    }
    if x1 == x0 {
        x1 = x0 + 1.0;
    }
    // 5% vertical padding keeps flat traces off the frame.
    let pad = 0.05 * (y1 - y0).max(1e-12);
    y0 -= pad;
    y1 += pad;

    let plot_w = WIDTH - MARGIN_LEFT - MARGIN_RIGHT;
    let plot_h = HEIGHT - MARGIN_TOP - MARGIN_BOTTOM;
    let map = |x: f64, y: f64| {
        (
            MARGIN_LEFT + (x - x0) / (x1 - x0) * plot_w,
            MARGIN_TOP + (1.0 - (y - y0) / (y1 - y0)) * plot_h,
        )
    };

    let mut f = std::fs::File::create(path).map_err(io_err)?;
    let mut w = |s: String| f.write_all(s.as_bytes()).map_err(io_err);
    w(format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" \
         viewBox=\"0 0 {WIDTH} {HEIGHT}\" font-family=\"sans-serif\" font-size=\"13\">\n"
    ))?;
    w(format!(
        "<rect x=\"0\" y=\"0\" width=\"{WIDTH}\" height=\"{HEIGHT}\" fill=\"white\"/>\n"
    ))?;
    w(format!(
        "<rect x=\"{MARGIN_LEFT}\" y=\"{MARGIN_TOP}\" width=\"{plot_w}\" height=\"{plot_h}\" \
         fill=\"none\" stroke=\"#444\"/>\n"
    ))?;
    w(format!(
        "<text x=\"{:.2}\" y=\"22\" text-anchor=\"middle\" font-size=\"16\">{title}</text>\n",
        WIDTH / 2.0
    ))?;
    w(format!(
        "<text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"middle\">{x_label}</text>\n",
        MARGIN_LEFT + plot_w / 2.0,
        HEIGHT - 12.0
    ))?;
    w(format!(
        "<text x=\"16\" y=\"{:.2}\" text-anchor=\"middle\" transform=\"rotate(-90 16 {:.2})\">{y_label}</text>\n",
        MARGIN_TOP + plot_h / 2.0,
        MARGIN_TOP + plot_h / 2.0
    ))?;
    // Extent labels in place of full tick machinery.
    w(format!(
        "<text x=\"{MARGIN_LEFT}\" y=\"{:.2}\" text-anchor=\"middle\">{x0:.4}</text>\n",
        HEIGHT - MARGIN_BOTTOM + 18.0
    ))?;
    w(format!(
        "<text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"middle\">{x1:.4}</text>\n",
        WIDTH - MARGIN_RIGHT,
        HEIGHT - MARGIN_BOTTOM + 18.0
    ))?;
    w(format!(
        "<text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"end\">{y1:.4}</text>\n",
        MARGIN_LEFT - 6.0,
        MARGIN_TOP + 5.0
    ))?;
    w(format!(
        "<text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"end\">{y0:.4}</text>\n",
        MARGIN_LEFT - 6.0,
        HEIGHT - MARGIN_BOTTOM
    ))?;
    for (i, s) in series.iter().enumerate() {
        let color = COLORS[i % COLORS.len()];
        let pts: Vec<String> = downsample(&s.points)
            .iter()
            .map(|&(x, y)| {
                let (px, py) = map(x, y);
                format!("{px:.2},{py:.2}")
            })
            .collect();
        w(format!(
            "<polyline fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\" points=\"{}\"/>\n",
            pts.join(" ")
        ))?;
        let ly = MARGIN_TOP + 18.0 + 18.0 * i as f64;
        let lx = WIDTH - MARGIN_RIGHT - 150.0;
        w(format!(
            "<line x1=\"{lx}\" y1=\"{:.2}\" x2=\"{:.2}\" y2=\"{:.2}\" stroke=\"{color}\" stroke-width=\"2\"/>\n",
            ly - 4.0,
            lx + 24.0,
            ly - 4.0
        ))?;
        w(format!(
            "<text x=\"{:.2}\" y=\"{ly}\">{}</text>\n",
            lx + 30.0,
            s.label
        ))?;
    }
    w("</svg>\n".to_string())?;
    Ok(())
}
