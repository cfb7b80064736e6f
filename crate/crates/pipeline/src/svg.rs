//! Deterministic SVG output: fixed 800 x 600 viewBox, coordinates printed
//! with two decimals.

use std::fmt::Write;

const W: f64 = 800.0;
const H: f64 = 600.0;
const PAD: f64 = 40.0;

/// Which real coordinates of a C^2 point to plot.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Projection {
    /// `(Re z, Im z)`.
    ZPlane,
    /// `(Re z, Re w)`.
    ReZReW,
}

impl Projection {
    pub fn apply(self, p: [f64; 4]) -> (f64, f64) {
        match self {
            Projection::ZPlane => (p[0], p[1]),
            Projection::ReZReW => (p[0], p[2]),
        }
    }

    fn labels(self) -> (&'static str, &'static str) {
        match self {
            Projection::ZPlane => ("Re z", "Im z"),
            Projection::ReZReW => ("Re z", "Re w"),
        }
    }
}

fn header(title: &str) -> String {
    let mut s = String::new();
    writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 {W} {H}" width="{W}" height="{H}">"#).unwrap();
    writeln!(s, r#"<rect x="0" y="0" width="{W}" height="{H}" fill="white"/>"#).unwrap();
    writeln!(s, r#"<text x="{:.2}" y="20.00" font-family="monospace" font-size="14" text-anchor="middle">{}</text>"#, W / 2.0, escape(title)).unwrap();
    s
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Value at quantile `q` of `v` (sorted copy).
fn quantile(v: &[f64], q: f64) -> f64 {
    let mut s: Vec<f64> = v.iter().copied().filter(|x| x.is_finite()).collect();
    s.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
    if s.is_empty() {
        return 0.0;
    }
    s[((s.len() - 1) as f64 * q).round() as usize]
}

/// Scatter plot of point groups (each drawn in its own colour). The view is
/// the 1st to 99th percentile box of all points; points outside are dropped.
pub fn scatter(groups: &[(&str, &[[f64; 4]])], proj: Projection, title: &str) -> Option<String> {
    let all: Vec<(f64, f64)> = groups.iter().flat_map(|(_, ps)| ps.iter().map(|p| proj.apply(*p))).collect();
    if all.is_empty() {
        return None;
    }
    let xs: Vec<f64> = all.iter().map(|p| p.0).collect();
    let ys: Vec<f64> = all.iter().map(|p| p.1).collect();
    let (x0, x1) = (quantile(&xs, 0.01), quantile(&xs, 0.99));
    let (y0, y1) = (quantile(&ys, 0.01), quantile(&ys, 0.99));
    let sx = (W - 2.0 * PAD) / (x1 - x0).max(1e-12);
    let sy = (H - 2.0 * PAD) / (y1 - y0).max(1e-12);
    let mut s = header(title);
    let (lx, ly) = proj.labels();
    writeln!(s, r#"<text x="{:.2}" y="{:.2}" font-family="monospace" font-size="12" text-anchor="middle">{lx}</text>"#, W / 2.0, H - 8.0).unwrap();
    writeln!(s, r#"<text x="12.00" y="{:.2}" font-family="monospace" font-size="12" transform="rotate(-90 12.00 {:.2})" text-anchor="middle">{ly}</text>"#, H / 2.0, H / 2.0).unwrap();
    writeln!(s, r#"<rect x="{PAD:.2}" y="{PAD:.2}" width="{:.2}" height="{:.2}" fill="none" stroke="black"/>"#, W - 2.0 * PAD, H - 2.0 * PAD).unwrap();
    const COLORS: [&str; 4] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd"];
    for (g, (name, ps)) in groups.iter().enumerate() {
        let color = COLORS[g % COLORS.len()];
        let r = if g == 0 { 0.8 } else { 1.6 };
        writeln!(s, r#"<g fill="{color}"><title>{}</title>"#, escape(name)).unwrap();
        for p in ps.iter() {
            let (x, y) = proj.apply(*p);
            if !(x0..=x1).contains(&x) || !(y0..=y1).contains(&y) {
                continue;
            }
            let px = PAD + (x - x0) * sx;
            let py = H - PAD - (y - y0) * sy;
            writeln!(s, r#"<circle cx="{px:.2}" cy="{py:.2}" r="{r:.2}"/>"#).unwrap();
        }
        s.push_str("</g>\n");
    }
    s.push_str("</svg>\n");
    Some(s)
}

fn heat(v: f64) -> String {
    // black (0) through red to yellow (1)
    let v = v.clamp(0.0, 1.0);
    let r = (255.0 * (2.0 * v).min(1.0)).round() as u8;
    let g = (255.0 * (2.0 * v - 1.0).max(0.0)).round() as u8;
    format!("#{r:02x}{g:02x}00")
}

/// Escape-time heat map. `cells[j * width + i]` is `Some(t)` for escape at
/// normalized time `t` in `[0, 1]`, `None` for points that stay bounded
/// (drawn in blue). Runs of equal colour in a row are merged.
pub fn heatmap(cells: &[Option<f64>], width: usize, height: usize, title: &str) -> Option<String> {
    if cells.is_empty() || cells.len() != width * height {
        return None;
    }
    let cw = (W - 2.0 * PAD) / width as f64;
    let ch = (H - 2.0 * PAD) / height as f64;
    let mut s = header(title);
    for j in 0..height {
        let mut i = 0;
        while i < width {
            let color = |c: &Option<f64>| c.map_or_else(|| "#2060c0".to_string(), heat);
            let col = color(&cells[j * width + i]);
            let mut k = i + 1;
            while k < width && color(&cells[j * width + k]) == col {
                k += 1;
            }
            writeln!(
                s,
                r#"<rect x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="{col}"/>"#,
                PAD + i as f64 * cw,
                PAD + j as f64 * ch,
                (k - i) as f64 * cw,
                ch
            )
            .unwrap();
            i = k;
        }
    }
    s.push_str("</svg>\n");
    Some(s)
}
