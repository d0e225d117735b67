//! Minimal SVG 1.1 writer for trajectory, histogram and heatmap plots.

use std::fmt::Write;

use dislab::{Domain, Vec2};

const SIZE: f64 = 640.0;
const PAD: f64 = 24.0;
const RED: &str = "#d62728";
const BLUE: &str = "#1f4fd6";

/// Maps a world-space box onto the square canvas, y up.
#[derive(Debug, Clone, Copy)]
struct View {
    lo: Vec2,
    scale: f64,
    height: f64,
}

impl View {
    fn new(lo: Vec2, hi: Vec2) -> Self {
        let span = (hi.x - lo.x).max(hi.y - lo.y).max(1e-12);
        let scale = (SIZE - 2.0 * PAD) / span;
        Self { lo, scale, height: (hi.y - lo.y) * scale + 2.0 * PAD }
    }

    fn width(&self, hi: Vec2) -> f64 {
        (hi.x - self.lo.x) * self.scale + 2.0 * PAD
    }

    fn map(&self, p: Vec2) -> (f64, f64) {
        (PAD + (p.x - self.lo.x) * self.scale, self.height - PAD - (p.y - self.lo.y) * self.scale)
    }
}

fn header(out: &mut String, w: f64, h: f64) {
    let _ = writeln!(out, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{w:.0}" height="{h:.0}" viewBox="0 0 {w:.0} {h:.0}">"#
    );
    let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
}

fn polyline(out: &mut String, view: &View, pts: &[Vec2], style: &str) {
    if pts.len() < 2 {
        return;
    }
    let mut d = String::with_capacity(pts.len() * 16);
    for (k, p) in pts.iter().enumerate() {
        let (x, y) = view.map(*p);
        let _ = write!(d, "{}{x:.2},{y:.2}", if k == 0 { "M" } else { " L" });
    }
    let _ = writeln!(out, r#"<path d="{d}" {style}/>"#);
}

fn boundary_points(domain: &Domain, lo: Vec2, hi: Vec2) -> Vec<Vec2> {
    match domain {
        Domain::HalfPlane => vec![Vec2::new(lo.x, 0.0), Vec2::new(hi.x, 0.0)],
        Domain::FullPlane => Vec::new(),
        _ => {
            let curve = domain.boundary_curve().expect("bounded domain");
            (0..=720).map(|k| curve.point(std::f64::consts::TAU * k as f64 / 720.0)).collect()
        }
    }
}

/// Drops points so at most `max_points` remain, keeping both ends.
pub fn thin(pts: &[Vec2], max_points: usize) -> Vec<Vec2> {
    if pts.len() <= max_points.max(2) {
        return pts.to_vec();
    }
    let m = max_points.max(2);
    (0..m).map(|k| pts[k * (pts.len() - 1) / (m - 1)]).collect()
}

/// Paths coloured by Burgers modulus (red `+1`, blue `-1`), with the boundary and optional markers.
pub fn trajectories(domain: &Domain, paths: &[(Vec<Vec2>, i32)], markers: &[Vec2], title: &str) -> String {
    let (mut lo, mut hi) = match domain.bbox() {
        Some(b) => (b.lo, b.hi),
        None => (Vec2::new(f64::INFINITY, f64::INFINITY), Vec2::new(f64::NEG_INFINITY, f64::NEG_INFINITY)),
    };
    for p in paths.iter().flat_map(|(p, _)| p.iter()).chain(markers) {
        lo = Vec2::new(lo.x.min(p.x), lo.y.min(p.y));
        hi = Vec2::new(hi.x.max(p.x), hi.y.max(p.y));
    }
    if !lo.x.is_finite() {
        lo = Vec2::new(-1.0, -1.0);
        hi = Vec2::new(1.0, 1.0);
    }
    if matches!(domain, Domain::HalfPlane) {
        lo.y = lo.y.min(0.0);
    }
    let m = 0.05 * (hi.x - lo.x).max(hi.y - lo.y).max(1e-9);
    let (lo, hi) = (lo - Vec2::new(m, m), hi + Vec2::new(m, m));
    let view = View::new(lo, hi);
    let mut out = String::new();
    header(&mut out, view.width(hi), view.height);
    let _ = writeln!(out, "<title>{title}</title>");
    polyline(&mut out, &view, &boundary_points(domain, lo, hi), r#"fill="none" stroke="black" stroke-width="1.5""#);
    for (pts, b) in paths {
        let colour = if *b > 0 { RED } else { BLUE };
        polyline(&mut out, &view, pts, &format!(r#"fill="none" stroke="{colour}" stroke-width="0.6" stroke-opacity="0.5""#));
    }
    for p in markers {
        let (x, y) = view.map(*p);
        let _ = writeln!(out, r#"<circle cx="{x:.2}" cy="{y:.2}" r="3" fill="black"/>"#);
    }
    out.push_str("</svg>\n");
    out
}

/// Bar chart of `counts` over equal bins of `[0, upper]`, with an optional vertical marker.
pub fn histogram(counts: &[usize], upper: f64, marker: Option<f64>, title: &str) -> String {
    let (w, h) = (SIZE, 0.6 * SIZE);
    let mut out = String::new();
    header(&mut out, w, h);
    let _ = writeln!(out, "<title>{title}</title>");
    let max = counts.iter().copied().max().unwrap_or(0).max(1) as f64;
    let n = counts.len().max(1) as f64;
    let bw = (w - 2.0 * PAD) / n;
    for (k, c) in counts.iter().enumerate() {
        let bh = (h - 2.0 * PAD) * *c as f64 / max;
        let _ = writeln!(
            out,
            r##"<rect x="{:.2}" y="{:.2}" width="{:.2}" height="{bh:.2}" fill="#777777" stroke="white" stroke-width="0.5"/>"##,
            PAD + k as f64 * bw,
            h - PAD - bh,
            bw
        );
    }
    let _ = writeln!(out, r#"<line x1="{PAD}" y1="{0:.2}" x2="{1:.2}" y2="{0:.2}" stroke="black"/>"#, h - PAD, w - PAD);
    if let Some(t) = marker.filter(|t| upper > 0.0 && *t <= upper) {
        let x = PAD + (w - 2.0 * PAD) * t / upper;
        let _ = writeln!(out, r#"<line x1="{x:.2}" y1="{PAD}" x2="{x:.2}" y2="{:.2}" stroke="{RED}" stroke-dasharray="4 3"/>"#, h - PAD);
    }
    let _ = writeln!(out, r#"<text x="{PAD}" y="{:.2}" font-size="11" font-family="sans-serif">0</text>"#, h - 6.0);
    let _ = writeln!(
        out,
        r#"<text x="{:.2}" y="{:.2}" font-size="11" font-family="sans-serif" text-anchor="end">{upper:.4}</text>"#,
        w - PAD,
        h - 6.0
    );
    out.push_str("</svg>\n");
    out
}

fn ramp(u: f64) -> String {
    // Dark blue to yellow.
    let u = u.clamp(0.0, 1.0);
    let r = (255.0 * u.powf(0.8)) as u8;
    let g = (40.0 + 200.0 * u) as u8;
    let b = (140.0 * (1.0 - u)) as u8;
    format!("#{r:02x}{g:02x}{b:02x}")
}

/// Cells of side `cell` centred at the given points, coloured by value.
/// Values are clipped at the `clip` quantile so the blow-up near the boundary
/// does not wash out the interior.
pub fn heatmap(domain: &Domain, cells: &[(Vec2, f64)], cell: f64, marker: Option<Vec2>, title: &str) -> String {
    let b = domain.bbox().expect("bounded domain");
    let view = View::new(b.lo, b.hi);
    let mut out = String::new();
    header(&mut out, view.width(b.hi), view.height);
    let _ = writeln!(out, "<title>{title}</title>");
    let mut vals: Vec<f64> = cells.iter().map(|c| c.1).filter(|v| v.is_finite()).collect();
    vals.sort_by(f64::total_cmp);
    if let (Some(lo), Some(hi)) = (vals.first(), vals.get((vals.len() * 95 / 100).min(vals.len().saturating_sub(1)))) {
        let span = (hi - lo).max(1e-12);
        let side = cell * view.scale;
        for (p, v) in cells {
            let (x, y) = view.map(*p);
            let _ = writeln!(
                out,
                r#"<rect x="{:.2}" y="{:.2}" width="{side:.2}" height="{side:.2}" fill="{}"/>"#,
                x - 0.5 * side,
                y - 0.5 * side,
                ramp((v - lo) / span)
            );
        }
    }
    polyline(&mut out, &view, &boundary_points(domain, b.lo, b.hi), r#"fill="none" stroke="black" stroke-width="1.5""#);
    if let Some(m) = marker {
        let (x, y) = view.map(m);
        let _ = writeln!(out, r#"<circle cx="{x:.2}" cy="{y:.2}" r="4" fill="none" stroke="{RED}" stroke-width="2"/>"#);
    }
    out.push_str("</svg>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn documents_are_well_formed_and_deterministic() {
        let paths = vec![(vec![Vec2::new(0.0, 0.0), Vec2::new(0.5, 0.1)], 1), (vec![Vec2::new(0.1, 0.0), Vec2::new(-0.5, 0.1)], -1)];
        let a = trajectories(&Domain::UnitDisk, &paths, &[Vec2::ZERO], "t");
        assert_eq!(a, trajectories(&Domain::UnitDisk, &paths, &[Vec2::ZERO], "t"));
        assert!(a.starts_with("<?xml") && a.trim_end().ends_with("</svg>"));
        assert!(a.contains(RED) && a.contains(BLUE));
        let h = histogram(&[1, 3, 2], 0.3, Some(0.25), "h");
        assert_eq!(h.matches("<rect").count(), 4);
        let p = trajectories(&Domain::FullPlane, &paths, &[], "plane");
        assert!(p.contains("<path"));
    }

    #[test]
    fn thinning_keeps_ends() {
        let pts: Vec<Vec2> = (0..100).map(|k| Vec2::new(k as f64, 0.0)).collect();
        let t = thin(&pts, 10);
        assert_eq!(t.len(), 10);
        assert_eq!(t[0], pts[0]);
        assert_eq!(t[9], pts[99]);
    }
}
