//! Static, deterministic SVG charts and crash-safe file output.

use std::fmt::Write as _;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 480.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 150.0;
const TOP: f64 = 50.0;
const BOTTOM: f64 = 60.0;
const PALETTE: [&str; 6] = ["#4e79a7", "#f28e2b", "#59a14f", "#e15759", "#76b7b2", "#edc948"];

/// Grouped bars: one group per x label, one bar per series within a group.
#[derive(Debug, Clone, PartialEq)]
pub struct BarChart {
    pub title: String,
    pub y_label: String,
    pub y_max: f64,
    pub series: Vec<String>,
    pub groups: Vec<(String, Vec<f64>)>,
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

fn header(out: &mut String, title: &str) {
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(out, r##"<rect width="100%" height="100%" fill="#ffffff"/>"##);
    let _ = writeln!(
        out,
        r#"<text x="{:.2}" y="28" text-anchor="middle" font-size="16">{}</text>"#,
        WIDTH / 2.0,
        escape(title)
    );
}

/// Axes plus five horizontal ticks from 0 to `y_max`.
fn axes(out: &mut String, y_max: f64, y_label: &str, tick_fmt: impl Fn(f64) -> String) {
    let plot_h = HEIGHT - TOP - BOTTOM;
    for i in 0..=5 {
        let v = y_max * i as f64 / 5.0;
        let y = HEIGHT - BOTTOM - plot_h * i as f64 / 5.0;
        let _ = writeln!(
            out,
            r##"<line x1="{LEFT:.2}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="#dddddd"/>"##,
            WIDTH - RIGHT
        );
        let _ = writeln!(
            out,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"#,
            LEFT - 6.0,
            y + 4.0,
            tick_fmt(v)
        );
    }
    let _ = writeln!(
        out,
        r##"<line x1="{LEFT:.2}" y1="{TOP:.2}" x2="{LEFT:.2}" y2="{:.2}" stroke="#000000"/>"##,
        HEIGHT - BOTTOM
    );
    let _ = writeln!(
        out,
        r##"<line x1="{LEFT:.2}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="#000000"/>"##,
        WIDTH - RIGHT,
        y = HEIGHT - BOTTOM
    );
    let _ = writeln!(
        out,
        r#"<text x="18" y="{:.2}" text-anchor="middle" transform="rotate(-90 18 {:.2})">{}</text>"#,
        TOP + plot_h / 2.0,
        TOP + plot_h / 2.0,
        escape(y_label)
    );
}

impl BarChart {
    pub fn to_svg(&self) -> Result<String> {
        if self.groups.is_empty() || self.series.is_empty() {
            return Err(Error::invalid("chart", "nothing to plot"));
        }
        if !(self.y_max.is_finite() && self.y_max > 0.0) {
            return Err(Error::invalid("y_max", "must be positive and finite"));
        }
        if let Some((g, _)) = self.groups.iter().find(|(_, v)| v.len() != self.series.len()) {
            return Err(Error::invalid(
                "chart",
                format!("group {g:?} has the wrong number of bars"),
            ));
        }
        let plot_w = WIDTH - LEFT - RIGHT;
        let plot_h = HEIGHT - TOP - BOTTOM;
        let group_w = plot_w / self.groups.len() as f64;
        let bar_w = group_w * 0.8 / self.series.len() as f64;

        let mut out = String::new();
        header(&mut out, &self.title);
        axes(&mut out, self.y_max, &self.y_label, |v| format!("{v:.0}"));
        for (gi, (label, values)) in self.groups.iter().enumerate() {
            let x0 = LEFT + group_w * gi as f64 + group_w * 0.1;
            for (si, &v) in values.iter().enumerate() {
                let v = if v.is_finite() { v.clamp(0.0, self.y_max) } else { 0.0 };
                let h = plot_h * v / self.y_max;
                let _ = writeln!(
                    out,
                    r#"<rect x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="{}"/>"#,
                    x0 + bar_w * si as f64,
                    HEIGHT - BOTTOM - h,
                    bar_w,
                    h,
                    PALETTE[si % PALETTE.len()]
                );
            }
            let _ = writeln!(
                out,
                r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
                LEFT + group_w * (gi as f64 + 0.5),
                HEIGHT - BOTTOM + 20.0,
                escape(label)
            );
        }
        for (si, name) in self.series.iter().enumerate() {
            let y = TOP + 20.0 * si as f64;
            let _ = writeln!(
                out,
                r#"<rect x="{:.2}" y="{:.2}" width="12" height="12" fill="{}"/>"#,
                WIDTH - RIGHT + 15.0,
                y,
                PALETTE[si % PALETTE.len()]
            );
            let _ = writeln!(
                out,
                r#"<text x="{:.2}" y="{:.2}">{}</text>"#,
                WIDTH - RIGHT + 33.0,
                y + 10.0,
                escape(name)
            );
        }
        out.push_str("</svg>\n");
        Ok(out)
    }
}

/// Polyline of a cumulative distribution over word rank (1-based x).
pub fn cdf_svg(title: &str, cdf: &[f64]) -> Result<String> {
    if cdf.is_empty() {
        return Err(Error::invalid("cdf", "is empty"));
    }
    if cdf.iter().any(|v| !(0.0..=1.0).contains(v)) {
        return Err(Error::invalid("cdf", "values must lie in [0, 1]"));
    }
    let plot_w = WIDTH - LEFT - RIGHT;
    let plot_h = HEIGHT - TOP - BOTTOM;
    let n = cdf.len();
    let x_of = |rank: usize| {
        if n == 1 {
            LEFT + plot_w
        } else {
            LEFT + plot_w * (rank - 1) as f64 / (n - 1) as f64
        }
    };
    let mut out = String::new();
    header(&mut out, title);
    axes(&mut out, 1.0, "cumulative probability", |v| format!("{v:.1}"));
    let mut points = String::new();
    for (i, &v) in cdf.iter().enumerate() {
        if i > 0 {
            points.push(' ');
        }
        let _ = write!(points, "{:.2},{:.2}", x_of(i + 1), HEIGHT - BOTTOM - plot_h * v);
    }
    let _ = writeln!(
        out,
        r##"<polyline fill="none" stroke="#4e79a7" stroke-width="1.5" points="{points}"/>"##
    );
    let _ = writeln!(
        out,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">word rank (1 to {n})</text>"#,
        LEFT + plot_w / 2.0,
        HEIGHT - BOTTOM + 35.0
    );
    out.push_str("</svg>\n");
    Ok(out)
}

fn temp_path(path: &Path) -> PathBuf {
    let name = path
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_default();
    path.with_file_name(format!(".{name}.partial-{}", std::process::id()))
}

/// Writes through a sibling temporary file renamed into place on success,
/// so a failed run never leaves a truncated output behind.
pub fn write_atomic<F>(path: impl AsRef<Path>, body: F) -> Result<()>
where
    F: FnOnce(&mut dyn Write) -> Result<()>,
{
    let path = path.as_ref();
    let tmp = temp_path(path);
    let result = (|| {
        let file = File::create(&tmp).map_err(|e| Error::io(&tmp, e))?;
        let mut w = BufWriter::new(file);
        body(&mut w)?;
        w.flush().map_err(|e| Error::io(&tmp, e))?;
        fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
    })();
    if result.is_err() {
        let _ = fs::remove_file(&tmp);
    }
    result
}

pub fn write_text_atomic(path: impl AsRef<Path>, text: &str) -> Result<()> {
    let path = path.as_ref();
    write_atomic(path, |w| w.write_all(text.as_bytes()).map_err(|e| Error::io(path, e)))
}
