//! Minimal self-contained SVG emitter: axes, polylines, scatter points.
//! No external plotting dependency; output is deterministic text.

use std::fmt::Write as _;

pub struct Plot {
    width: f64,
    height: f64,
    margin: f64,
    x_range: (f64, f64),
    y_range: (f64, f64),
    log_x: bool,
    log_y: bool,
    body: String,
}

const COLORS: [&str; 4] = ["#1f6fb2", "#d1495b", "#3a7d44", "#8d6a9f"];

pub fn color(i: usize) -> &'static str {
    COLORS[i % COLORS.len()]
}

impl Plot {
    pub fn new(x_range: (f64, f64), y_range: (f64, f64), log_x: bool, log_y: bool) -> Self {
        Self {
            width: 800.0,
            height: 560.0,
            margin: 64.0,
            x_range,
            y_range,
            log_x,
            log_y,
            body: String::new(),
        }
    }

    fn tx(&self, x: f64) -> f64 {
        let (lo, hi) = self.x_range;
        let (x, lo, hi) = if self.log_x {
            (x.log10(), lo.log10(), hi.log10())
        } else {
            (x, lo, hi)
        };
        self.margin + (x - lo) / (hi - lo) * (self.width - 2.0 * self.margin)
    }

    fn ty(&self, y: f64) -> f64 {
        let (lo, hi) = self.y_range;
        let (y, lo, hi) = if self.log_y {
            (y.log10(), lo.log10(), hi.log10())
        } else {
            (y, lo, hi)
        };
        self.height - self.margin - (y - lo) / (hi - lo) * (self.height - 2.0 * self.margin)
    }

    pub fn polyline(&mut self, pts: &[(f64, f64)], stroke: &str, width: f64) {
        let mut d = String::new();
        for (i, &(x, y)) in pts.iter().enumerate() {
            let _ = write!(
                d,
                "{}{:.2},{:.2}",
                if i == 0 { "M" } else { " L" },
                self.tx(x),
                self.ty(y)
            );
        }
        let _ = writeln!(
            self.body,
            r#"<path d="{d}" fill="none" stroke="{stroke}" stroke-width="{width}"/>"#
        );
    }

    pub fn scatter(&mut self, pts: &[(f64, f64)], fill: &str, radius: f64) {
        for &(x, y) in pts {
            let _ = writeln!(
                self.body,
                r#"<circle cx="{:.2}" cy="{:.2}" r="{radius}" fill="{fill}" fill-opacity="0.55"/>"#,
                self.tx(x),
                self.ty(y)
            );
        }
    }

    pub fn legend(&mut self, entries: &[(&str, &str)]) {
        for (i, (label, color)) in entries.iter().enumerate() {
            let y = self.margin + 18.0 * i as f64;
            let x = self.width - self.margin - 170.0;
            let _ = writeln!(
                self.body,
                r#"<rect x="{x:.1}" y="{:.1}" width="12" height="12" fill="{color}"/><text x="{:.1}" y="{:.1}" font-size="13" font-family="sans-serif">{label}</text>"#,
                y - 10.0,
                x + 18.0,
                y
            );
        }
    }

    fn ticks(lo: f64, hi: f64, log: bool) -> Vec<f64> {
        if log {
            let mut t = Vec::new();
            let mut d = lo.log10().floor();
            while 10f64.powf(d) <= hi * 1.0001 {
                let v = 10f64.powf(d);
                if v >= lo * 0.9999 {
                    t.push(v);
                }
                d += 1.0;
            }
            if t.len() < 2 {
                t = vec![lo, hi];
            }
            t
        } else {
            (0..=5).map(|i| lo + (hi - lo) * i as f64 / 5.0).collect()
        }
    }

    pub fn render(mut self, title: &str, x_label: &str, y_label: &str) -> String {
        let mut axes = String::new();
        let (x0, x1) = (self.margin, self.width - self.margin);
        let (y0, y1) = (self.height - self.margin, self.margin);
        let _ = writeln!(
            axes,
            r##"<rect x="{x0}" y="{y1}" width="{}" height="{}" fill="none" stroke="#333"/>"##,
            x1 - x0,
            y0 - y1
        );
        for t in Self::ticks(self.x_range.0, self.x_range.1, self.log_x) {
            let px = self.tx(t);
            let _ = writeln!(
                axes,
                r##"<line x1="{px:.2}" y1="{y0}" x2="{px:.2}" y2="{}" stroke="#333"/><text x="{px:.2}" y="{}" font-size="12" text-anchor="middle" font-family="sans-serif">{}</text>"##,
                y0 + 5.0,
                y0 + 20.0,
                format_tick(t)
            );
        }
        for t in Self::ticks(self.y_range.0, self.y_range.1, self.log_y) {
            let py = self.ty(t);
            let _ = writeln!(
                axes,
                r##"<line x1="{}" y1="{py:.2}" x2="{x0}" y2="{py:.2}" stroke="#333"/><text x="{}" y="{:.2}" font-size="12" text-anchor="end" font-family="sans-serif">{}</text>"##,
                x0 - 5.0,
                x0 - 8.0,
                py + 4.0,
                format_tick(t)
            );
        }
        format!(
            concat!(
                r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#,
                "\n",
                r#"<rect width="{w}" height="{h}" fill="white"/>"#,
                "\n",
                r#"<text x="{cx}" y="28" font-size="16" text-anchor="middle" font-family="sans-serif">{title}</text>"#,
                "\n",
                r#"<text x="{cx}" y="{xl}" font-size="13" text-anchor="middle" font-family="sans-serif">{x_label}</text>"#,
                "\n",
                r#"<text x="16" y="{cy}" font-size="13" text-anchor="middle" font-family="sans-serif" transform="rotate(-90 16 {cy})">{y_label}</text>"#,
                "\n{axes}{body}</svg>\n"
            ),
            w = self.width,
            h = self.height,
            cx = self.width / 2.0,
            cy = self.height / 2.0,
            xl = self.height - 16.0,
            title = title,
            x_label = x_label,
            y_label = y_label,
            axes = axes,
            body = std::mem::take(&mut self.body),
        )
    }
}

fn format_tick(t: f64) -> String {
    if t == 0.0 {
        return "0".into();
    }
    let a = t.abs();
    if (0.001..10000.0).contains(&a) {
        let s = format!("{t:.3}");
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        format!("{t:.1e}")
    }
}
