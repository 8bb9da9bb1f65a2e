//! Plot-ready forest data and a minimal static SVG rendering.

use std::fmt::Write as _;
use std::io::Write;

use nnhm::{Error, Result};

use crate::report::AnalysisReport;

#[derive(Debug, Clone, PartialEq)]
pub struct ForestRow {
    pub label: String,
    pub point: f64,
    pub lower: f64,
    pub upper: f64,
    pub pooled: bool,
}

pub fn forest_rows(r: &AnalysisReport) -> Vec<ForestRow> {
    let studies = r.studies.iter().map(|s| ForestRow {
        label: s.id.clone(),
        point: s.y,
        lower: s.lower,
        upper: s.upper,
        pooled: false,
    });
    let methods = r.methods.iter().map(|m| ForestRow {
        label: m.label.clone(),
        point: m.mu,
        lower: m.lower,
        upper: m.upper,
        pooled: true,
    });
    studies.chain(methods).collect()
}

pub fn write_forest_csv<W: Write>(out: W, rows: &[ForestRow]) -> Result<()> {
    let io = |e: csv::Error| Error::Io(e.to_string());
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["label", "point", "lower", "upper"]).map_err(io)?;
    for r in rows {
        w.write_record([r.label.clone(), r.point.to_string(), r.lower.to_string(), r.upper.to_string()])
            .map_err(io)?;
    }
    w.flush().map_err(|e| Error::Io(e.to_string()))
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Study estimates as squares, pooled estimates as diamonds, with a
/// reference line at zero.
pub fn render_svg(rows: &[ForestRow]) -> String {
    const ROW_H: f64 = 22.0;
    const LABEL_W: f64 = 170.0;
    const PLOT_W: f64 = 420.0;
    const TOP: f64 = 20.0;
    let finite = |x: f64| x.is_finite();
    let lo = rows.iter().map(|r| r.lower).filter(|&x| finite(x)).fold(0.0f64, f64::min);
    let hi = rows.iter().map(|r| r.upper).filter(|&x| finite(x)).fold(0.0f64, f64::max);
    let pad = 0.05 * (hi - lo).max(1e-9);
    let (lo, hi) = (lo - pad, hi + pad);
    let x = |v: f64| LABEL_W + (v.clamp(lo, hi) - lo) / (hi - lo) * PLOT_W;
    let height = TOP + ROW_H * (rows.len() as f64 + 2.0);
    let width = LABEL_W + PLOT_W + 20.0;

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" font-family="sans-serif" font-size="12">"#
    );
    let axis_y = TOP + ROW_H * rows.len() as f64 + 4.0;
    let _ = writeln!(
        s,
        r##"<line x1="{0}" y1="{TOP}" x2="{0}" y2="{axis_y}" stroke="#888" stroke-dasharray="4,3"/>"##,
        x(0.0)
    );
    for (i, r) in rows.iter().enumerate() {
        let y = TOP + ROW_H * (i as f64 + 0.5);
        let _ = writeln!(s, r#"<text x="4" y="{}">{}</text>"#, y + 4.0, escape(&r.label));
        let _ = writeln!(
            s,
            r#"<line x1="{}" y1="{y}" x2="{}" y2="{y}" stroke="black"/>"#,
            x(r.lower),
            x(r.upper)
        );
        let px = x(r.point);
        if r.pooled {
            let _ = writeln!(
                s,
                r#"<polygon points="{},{y} {px},{} {},{y} {px},{}" fill="black"/>"#,
                x(r.lower),
                y - 6.0,
                x(r.upper),
                y + 6.0
            );
        } else {
            let _ = writeln!(s, r#"<rect x="{}" y="{}" width="8" height="8" fill="black"/>"#, px - 4.0, y - 4.0);
        }
    }
    let _ = writeln!(
        s,
        r#"<line x1="{LABEL_W}" y1="{axis_y}" x2="{}" y2="{axis_y}" stroke="black"/>"#,
        LABEL_W + PLOT_W
    );
    for i in 0..=4 {
        let v = lo + (hi - lo) * i as f64 / 4.0;
        let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle">{v:.2}</text>"#, x(v), axis_y + 16.0);
    }
    s.push_str("</svg>\n");
    s
}
