//! Minimal SVG scatter plots for 2D point sets.

use std::error::Error;
use std::fmt::Write as _;
use std::path::Path;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 480.0;
const MARGIN: f64 = 50.0;

pub struct Series<'a> {
    pub label: &'a str,
    pub color: &'a str,
    pub points: &'a [Vec<f64>],
}

/// Writes a scatter plot of one or more 2D series with shared axes.
pub fn scatter(path: &Path, title: &str, series: &[Series]) -> Result<(), Box<dyn Error>> {
    let mut xmin = f64::INFINITY;
    let mut xmax = f64::NEG_INFINITY;
    let mut ymin = f64::INFINITY;
    let mut ymax = f64::NEG_INFINITY;
    for s in series {
        for p in s.points {
            if p.len() != 2 {
                return Err(format!("scatter plots require 2D points, got {}D", p.len()).into());
            }
            xmin = xmin.min(p[0]);
            xmax = xmax.max(p[0]);
            ymin = ymin.min(p[1]);
            ymax = ymax.max(p[1]);
        }
    }
    if !xmin.is_finite() {
        return Err("scatter plot needs at least one point".into());
    }
    // Avoid a zero-size viewport for degenerate data.
    if xmax - xmin < 1e-12 {
        xmax += 0.5;
        xmin -= 0.5;
    }
    if ymax - ymin < 1e-12 {
        ymax += 0.5;
        ymin -= 0.5;
    }
    let sx = (WIDTH - 2.0 * MARGIN) / (xmax - xmin);
    let sy = (HEIGHT - 2.0 * MARGIN) / (ymax - ymin);
    let tx = |x: f64| MARGIN + (x - xmin) * sx;
    let ty = |y: f64| HEIGHT - MARGIN - (y - ymin) * sy;

    let mut out = String::new();
    writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
    )?;
    writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#)?;
    writeln!(
        out,
        r#"<text x="{}" y="24" text-anchor="middle" font-family="sans-serif" font-size="16">{}</text>"#,
        WIDTH / 2.0,
        title
    )?;
    // Axes.
    writeln!(
        out,
        r#"<line x1="{m}" y1="{b}" x2="{r}" y2="{b}" stroke="black"/><line x1="{m}" y1="{t}" x2="{m}" y2="{b}" stroke="black"/>"#,
        m = MARGIN,
        b = HEIGHT - MARGIN,
        r = WIDTH - MARGIN,
        t = MARGIN
    )?;
    for (axis_end, label) in [(xmin, format!("{xmin:.2}")), (xmax, format!("{xmax:.2}"))] {
        writeln!(
            out,
            r#"<text x="{}" y="{}" text-anchor="middle" font-family="sans-serif" font-size="11">{}</text>"#,
            tx(axis_end),
            HEIGHT - MARGIN + 18.0,
            label
        )?;
    }
    for (axis_end, label) in [(ymin, format!("{ymin:.2}")), (ymax, format!("{ymax:.2}"))] {
        writeln!(
            out,
            r#"<text x="{}" y="{}" text-anchor="end" font-family="sans-serif" font-size="11">{}</text>"#,
            MARGIN - 6.0,
            ty(axis_end) + 4.0,
            label
        )?;
    }
    for (i, s) in series.iter().enumerate() {
        for p in s.points {
            writeln!(
                out,
                r#"<circle cx="{:.2}" cy="{:.2}" r="2.2" fill="{}" fill-opacity="0.55"/>"#,
                tx(p[0]),
                ty(p[1]),
                s.color
            )?;
        }
        // Legend entry.
        let ly = MARGIN + 16.0 * i as f64;
        writeln!(
            out,
            r#"<circle cx="{}" cy="{}" r="4" fill="{}"/><text x="{}" y="{}" font-family="sans-serif" font-size="12">{}</text>"#,
            WIDTH - MARGIN - 130.0,
            ly,
            s.color,
            WIDTH - MARGIN - 120.0,
            ly + 4.0,
            s.label
        )?;
    }
    writeln!(out, "</svg>")?;
    std::fs::write(path, out)?;
    Ok(())
}
