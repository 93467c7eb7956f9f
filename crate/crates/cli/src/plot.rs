//! Static SVG maps of latent positions.

use std::fmt::Write;

use netinfluence::model::Point;

const SIZE: f64 = 520.0;
const MARGIN: f64 = 40.0;
const PALETTE: [&str; 8] = ["#1b9e77", "#d95f02", "#7570b3", "#e7298a", "#66a61e", "#e6ab02", "#a6761d", "#666666"];
const NEUTRAL: &str = "#4a6fa5";

pub struct MapLayer<'a> {
    pub points: &'a [Point<f64>],
    /// Cluster labels for coloring; `None` draws every point in one color.
    pub labels: Option<&'a [usize]>,
    /// Text labels drawn instead of dots (used for items).
    pub names: Option<&'a [String]>,
}

fn esc(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

pub fn latent_map(title: &str, layers: &[MapLayer<'_>]) -> String {
    let all = layers.iter().flat_map(|l| l.points.iter());
    let extent = all.fold(1e-9f64, |m, p| m.max(p[0].abs()).max(p[1].abs()).max(1e-9)) * 1.05;
    let scale = (SIZE - 2.0 * MARGIN) / (2.0 * extent);
    let px = |p: &Point<f64>| (SIZE / 2.0 + p[0] * scale, SIZE / 2.0 - p[1] * scale);

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{SIZE}" height="{SIZE}" viewBox="0 0 {SIZE} {SIZE}" font-family="sans-serif">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(s, r#"<text x="{}" y="22" font-size="15" text-anchor="middle">{}</text>"#, SIZE / 2.0, esc(title));
    let (lo, hi, mid) = (MARGIN, SIZE - MARGIN, SIZE / 2.0);
    let _ = writeln!(s, r##"<line x1="{lo}" y1="{mid}" x2="{hi}" y2="{mid}" stroke="#bbbbbb"/>"##);
    let _ = writeln!(s, r##"<line x1="{mid}" y1="{lo}" x2="{mid}" y2="{hi}" stroke="#bbbbbb"/>"##);
    let _ = writeln!(
        s,
        r##"<rect x="{lo}" y="{lo}" width="{w}" height="{w}" fill="none" stroke="#888888"/>"##,
        w = hi - lo
    );

    for layer in layers {
        for (j, p) in layer.points.iter().enumerate() {
            let (x, y) = px(p);
            let color = layer.labels.map_or(NEUTRAL, |l| PALETTE[l[j] % PALETTE.len()]);
            match layer.names {
                Some(names) => {
                    let _ = writeln!(
                        s,
                        r##"<text x="{x:.2}" y="{y:.2}" font-size="11" fill="#c0392b" text-anchor="middle" dominant-baseline="middle">{}</text>"##,
                        esc(&names[j])
                    );
                }
                None => {
                    let _ = writeln!(s, r#"<circle cx="{x:.2}" cy="{y:.2}" r="3" fill="{color}" fill-opacity="0.75"/>"#);
                }
            }
        }
    }
    s.push_str("</svg>\n");
    s
}
