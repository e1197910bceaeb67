//! Minimal SVG line charts of one metric against the sweep value.

use std::fmt::Write;

use crate::report::ScenarioReport;
use crate::scenarios::plot_metric;

const W: f64 = 640.0;
const H: f64 = 420.0;
const MARGIN: f64 = 70.0;

struct Scale {
    lo: f64,
    hi: f64,
    log: bool,
}

impl Scale {
    fn new(values: &[f64]) -> Self {
        let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let log = lo > 0.0 && hi / lo > 10.0;
        let (lo, hi) = if log { (lo.ln(), hi.ln()) } else { (lo, hi) };
        let pad = if hi > lo { 0.05 * (hi - lo) } else { 0.5 * lo.abs().max(1.0) };
        Self { lo: lo - pad, hi: hi + pad, log }
    }

    /// Position in `[0, 1]`.
    fn frac(&self, v: f64) -> f64 {
        let v = if self.log { v.ln() } else { v };
        (v - self.lo) / (self.hi - self.lo)
    }

    fn ticks(&self) -> Vec<f64> {
        (0..5)
            .map(|i| {
                let t = self.lo + (self.hi - self.lo) * (i as f64 + 0.5) / 5.0;
                if self.log {
                    t.exp()
                } else {
                    t
                }
            })
            .collect()
    }
}

/// Line chart with markers; axes switch to log scale when the data span
/// more than a decade.
pub fn line_chart(title: &str, x_label: &str, y_label: &str, points: &[(f64, f64)]) -> String {
    let mut s = String::new();
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" font-family="sans-serif" font-size="12">"#);
    let _ = writeln!(s, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(s, r#"<text x="{}" y="24" text-anchor="middle" font-size="15">{}</text>"#, W / 2.0, escape(title));
    let (x0, x1, y0, y1) = (MARGIN, W - 20.0, H - MARGIN + 20.0, 40.0);
    let _ = writeln!(s, r#"<path d="M{x0},{y1} L{x0},{y0} L{x1},{y0}" fill="none" stroke="black"/>"#);
    let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#, (x0 + x1) / 2.0, H - 12.0, escape(x_label));
    let _ = writeln!(
        s,
        r#"<text x="16" y="{0}" text-anchor="middle" transform="rotate(-90 16 {0})">{1}</text>"#,
        (y0 + y1) / 2.0,
        escape(y_label)
    );
    let finite: Vec<(f64, f64)> = points.iter().copied().filter(|(x, y)| x.is_finite() && y.is_finite()).collect();
    if !finite.is_empty() {
        let xs = Scale::new(&finite.iter().map(|p| p.0).collect::<Vec<_>>());
        let ys = Scale::new(&finite.iter().map(|p| p.1).collect::<Vec<_>>());
        let px = |x: f64| x0 + xs.frac(x) * (x1 - x0);
        let py = |y: f64| y0 - ys.frac(y) * (y0 - y1);
        for &(x, _) in &finite {
            let _ = writeln!(s, r#"<text x="{:.1}" y="{}" text-anchor="middle">{}</text>"#, px(x), y0 + 16.0, fmt_tick(x));
        }
        for t in ys.ticks() {
            let _ = writeln!(s, r#"<text x="{}" y="{:.1}" text-anchor="end">{}</text>"#, x0 - 6.0, py(t) + 4.0, fmt_tick(t));
            let _ = writeln!(s, r##"<line x1="{x0}" x2="{x1}" y1="{0:.1}" y2="{0:.1}" stroke="#ddd"/>"##, py(t));
        }
        let path: Vec<String> = finite.iter().map(|&(x, y)| format!("{:.1},{:.1}", px(x), py(y))).collect();
        let _ = writeln!(s, r##"<polyline points="{}" fill="none" stroke="#1f77b4" stroke-width="2"/>"##, path.join(" "));
        for &(x, y) in &finite {
            let _ = writeln!(s, r##"<circle cx="{:.1}" cy="{:.1}" r="4" fill="#1f77b4"/>"##, px(x), py(y));
        }
    }
    s.push_str("</svg>\n");
    s
}

fn fmt_tick(v: f64) -> String {
    if v != 0.0 && (v.abs() < 1e-2 || v.abs() >= 1e4) {
        format!("{v:.1e}")
    } else {
        format!("{v:.3}")
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Chart of the scenario's key metric over its sweep, if it has one.
pub fn report_chart(report: &ScenarioReport) -> Option<String> {
    let metric = plot_metric(report.scenario);
    let points: Vec<(f64, f64)> = report.sweep_rows().filter_map(|r| Some((r.param?, r.get(metric)?))).collect();
    if points.is_empty() {
        return None;
    }
    let x_label = if report.scenario.uses_eps() { "eps" } else { "N" };
    let title = format!("{} {} (config {})", report.scenario, metric, report.config_hash);
    Some(line_chart(&title, x_label, metric, &points))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chart_is_well_formed() {
        let svg = line_chart("a < b", "N", "w1", &[(25.0, 0.2), (100.0, 0.1), (400.0, 0.05)]);
        assert!(svg.starts_with("<svg") && svg.ends_with("</svg>\n"));
        assert!(svg.contains("a &lt; b"));
        assert_eq!(svg.matches("<circle").count(), 3);
        assert!(line_chart("empty", "x", "y", &[]).contains("</svg>"));
    }
}
