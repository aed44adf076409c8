//! Fixed-size SVG plots with labelled axes.

use std::fmt::Write as _;

pub const CANVAS: f64 = 800.0;
const MARGIN: f64 = 70.0;

pub struct Plot {
    x: [f64; 2],
    y: [f64; 2],
    body: String,
    title: String,
    labels: [String; 2],
}

impl Plot {
    pub fn new(title: &str, x_label: &str, y_label: &str, x: [f64; 2], y: [f64; 2]) -> Self {
        Plot { x, y, body: String::new(), title: title.into(), labels: [x_label.into(), y_label.into()] }
    }

    fn sx(&self, v: f64) -> f64 {
        MARGIN + (v - self.x[0]) / (self.x[1] - self.x[0]) * (CANVAS - 2.0 * MARGIN)
    }

    fn sy(&self, v: f64) -> f64 {
        CANVAS - MARGIN - (v - self.y[0]) / (self.y[1] - self.y[0]) * (CANVAS - 2.0 * MARGIN)
    }

    /// Filled axis-aligned cell from `lo` to `hi` in data coordinates.
    pub fn cell(&mut self, lo: [f64; 2], hi: [f64; 2], fill: &str) {
        let (x0, x1, y0, y1) = (self.sx(lo[0]), self.sx(hi[0]), self.sy(hi[1]), self.sy(lo[1]));
        let _ = writeln!(
            self.body,
            r#"<rect x="{x0:.2}" y="{y0:.2}" width="{:.2}" height="{:.2}" fill="{fill}"/>"#,
            x1 - x0,
            y1 - y0
        );
    }

    pub fn segments(&mut self, segs: &[[[f64; 2]; 2]], stroke: &str, width: f64) {
        let mut d = String::new();
        for [a, b] in segs {
            let _ = write!(d, "M{:.2} {:.2}L{:.2} {:.2}", self.sx(a[0]), self.sy(a[1]), self.sx(b[0]), self.sy(b[1]));
        }
        if !d.is_empty() {
            let _ = writeln!(self.body, r#"<path d="{d}" stroke="{stroke}" stroke-width="{width}" fill="none"/>"#);
        }
    }

    pub fn polyline(&mut self, points: &[[f64; 2]], stroke: &str, width: f64) {
        let pts: Vec<String> = points.iter().map(|p| format!("{:.2},{:.2}", self.sx(p[0]), self.sy(p[1]))).collect();
        let _ = writeln!(
            self.body,
            r#"<polyline points="{}" stroke="{stroke}" stroke-width="{width}" fill="none"/>"#,
            pts.join(" ")
        );
    }

    /// Open circle marker.
    pub fn marker(&mut self, p: [f64; 2], stroke: &str) {
        let _ = writeln!(
            self.body,
            r#"<circle cx="{:.2}" cy="{:.2}" r="7" stroke="{stroke}" stroke-width="2" fill="none"/>"#,
            self.sx(p[0]),
            self.sy(p[1])
        );
    }

    /// Legend entries stacked in the top right corner.
    pub fn legend(&mut self, entries: &[(&str, &str)]) {
        for (i, (colour, text)) in entries.iter().enumerate() {
            let y = MARGIN + 18.0 * i as f64 + 12.0;
            let x = CANVAS - MARGIN - 150.0;
            let _ = writeln!(
                self.body,
                r#"<rect x="{x:.2}" y="{:.2}" width="12" height="12" fill="{colour}" stroke="black" stroke-width="0.5"/><text x="{:.2}" y="{:.2}" font-size="12">{text}</text>"#,
                y - 10.0,
                x + 18.0,
                y
            );
        }
    }

    pub fn render(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
        let _ = writeln!(
            s,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{CANVAS}" height="{CANVAS}" viewBox="0 0 {CANVAS} {CANVAS}" font-family="sans-serif">"#
        );
        let _ = writeln!(s, r#"<rect width="{CANVAS}" height="{CANVAS}" fill="white"/>"#);
        let inner = CANVAS - 2.0 * MARGIN;
        let _ = writeln!(
            s,
            r#"<g clip-path="url(#frame)"><clipPath id="frame"><rect x="{MARGIN}" y="{MARGIN}" width="{inner}" height="{inner}"/></clipPath>"#
        );
        s.push_str(&self.body);
        let _ = writeln!(s, "</g>");
        let _ = writeln!(
            s,
            r#"<rect x="{MARGIN}" y="{MARGIN}" width="{inner}" height="{inner}" fill="none" stroke="black"/>"#
        );
        for k in 0..=4 {
            let f = k as f64 / 4.0;
            let (vx, vy) = (self.x[0] + f * (self.x[1] - self.x[0]), self.y[0] + f * (self.y[1] - self.y[0]));
            let (px, py) = (self.sx(vx), self.sy(vy));
            let b = CANVAS - MARGIN;
            let _ = writeln!(
                s,
                r#"<line x1="{px:.2}" y1="{b:.2}" x2="{px:.2}" y2="{:.2}" stroke="black"/><text x="{px:.2}" y="{:.2}" font-size="12" text-anchor="middle">{vx:.3}</text>"#,
                b + 6.0,
                b + 20.0
            );
            let _ = writeln!(
                s,
                r#"<line x1="{:.2}" y1="{py:.2}" x2="{MARGIN}" y2="{py:.2}" stroke="black"/><text x="{:.2}" y="{:.2}" font-size="12" text-anchor="end">{vy:.3}</text>"#,
                MARGIN - 6.0,
                MARGIN - 8.0,
                py + 4.0
            );
        }
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" font-size="14" text-anchor="middle">{}</text>"#,
            CANVAS / 2.0,
            CANVAS - 20.0,
            self.labels[0]
        );
        let _ = writeln!(
            s,
            r#"<text x="20" y="{:.2}" font-size="14" text-anchor="middle" transform="rotate(-90 20 {:.2})">{}</text>"#,
            CANVAS / 2.0,
            CANVAS / 2.0,
            self.labels[1]
        );
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="40" font-size="16" text-anchor="middle">{}</text>"#,
            CANVAS / 2.0,
            self.title
        );
        let _ = writeln!(s, "</svg>");
        s
    }
}
