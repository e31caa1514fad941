//! Static SVG heatmaps of grid datasets.

use std::fmt::Write as _;

use spatial_sde_core::Dataset;

use crate::error::{Error, Result};

/// Perceptually ordered dark-to-light ramp (viridis anchors).
const RAMP: [(u8, u8, u8); 9] = [
    (68, 1, 84),
    (71, 44, 122),
    (59, 81, 139),
    (44, 113, 142),
    (33, 144, 141),
    (39, 173, 129),
    (92, 200, 99),
    (170, 220, 50),
    (253, 231, 37),
];

/// Color for `t ∈ [0, 1]`, linearly interpolated between ramp anchors.
pub fn ramp_color(t: f64) -> String {
    let t = if t.is_finite() { t.clamp(0.0, 1.0) } else { 0.5 };
    let pos = t * (RAMP.len() - 1) as f64;
    let i = (pos.floor() as usize).min(RAMP.len() - 2);
    let f = pos - i as f64;
    let lerp = |a: u8, b: u8| (f64::from(a) + (f64::from(b) - f64::from(a)) * f).round() as u8;
    let (a, b) = (RAMP[i], RAMP[i + 1]);
    format!("#{:02x}{:02x}{:02x}", lerp(a.0, b.0), lerp(a.1, b.1), lerp(a.2, b.2))
}

#[derive(Debug, Clone, PartialEq)]
pub struct HeatmapOptions {
    /// Side of one grid cell in pixels.
    pub cell_size: u32,
    pub title: Option<String>,
}

impl Default for HeatmapOptions {
    fn default() -> Self {
        Self {
            cell_size: 8,
            title: None,
        }
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

fn label(v: f64) -> String {
    let s = format!("{v:.4}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" { "0".into() } else { s.into() }
}

/// Renders one `<rect class="cell">` per sample, colored by `values[i]`, with
/// a min/max legend. `train` outlines the given sample indices.
pub fn render(d: &Dataset, values: &[f64], train: Option<&[usize]>, opts: &HeatmapOptions) -> Result<String> {
    if d.is_empty() {
        return Err(spatial_sde_core::Error::Empty.into());
    }
    if values.len() != d.len() {
        return Err(spatial_sde_core::Error::LengthMismatch {
            left: values.len(),
            right: d.len(),
        }
        .into());
    }
    if let Some(&bad) = train.into_iter().flatten().find(|&&i| i >= d.len()) {
        return Err(Error::PlanMismatch(format!("overlay index {bad} out of range for {} points", d.len())));
    }
    let finite = values.iter().copied().filter(|v| v.is_finite());
    let lo = finite.clone().fold(f64::INFINITY, f64::min);
    let hi = finite.fold(f64::NEG_INFINITY, f64::max);
    let (lo, hi) = if lo.is_finite() { (lo, hi) } else { (0.0, 0.0) };
    let span = hi - lo;
    let norm = |v: f64| if span > 0.0 { (v - lo) / span } else { 0.5 };

    let b = d.bounds();
    let cs = opts.cell_size.max(1);
    let margin = 10u32;
    let title_h = if opts.title.is_some() { 24 } else { 0 };
    let map_w = b.width() * cs;
    let map_h = b.height() * cs;
    let legend_x = margin + map_w + 20;
    let legend_h = map_h.max(60);
    let width = legend_x + 16 + 90;
    let height = title_h + margin * 2 + legend_h;
    let top = title_h + margin;

    let mut svg = String::new();
    let w = &mut svg;
    let _ = writeln!(w, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        w,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{width}" height="{height}" viewBox="0 0 {width} {height}">"#
    );
    let _ = writeln!(w, r##"<rect width="100%" height="100%" fill="#ffffff"/>"##);
    if let Some(t) = &opts.title {
        let _ = writeln!(
            w,
            r#"<text x="{margin}" y="17" font-family="sans-serif" font-size="14">{}</text>"#,
            escape(t)
        );
    }
    let _ = writeln!(w, r#"<g id="cells" shape-rendering="crispEdges">"#);
    for (s, &v) in d.samples().iter().zip(values) {
        let px = margin + (s.x - b.x_min) as u32 * cs;
        let py = top + (s.y - b.y_min) as u32 * cs;
        let fill = if v.is_finite() { ramp_color(norm(v)) } else { "#bbbbbb".into() };
        let _ = writeln!(
            w,
            r#"<rect class="cell" x="{px}" y="{py}" width="{cs}" height="{cs}" fill="{fill}"><title>({}, {}) {}</title></rect>"#,
            s.x,
            s.y,
            label(v)
        );
    }
    let _ = writeln!(w, "</g>");

    if let Some(train) = train {
        let _ = writeln!(w, r##"<g id="train" fill="none" stroke="#ff2d55" stroke-width="1.5">"##);
        let mut idx = train.to_vec();
        idx.sort_unstable();
        for i in idx {
            let s = &d.samples()[i];
            let px = margin + (s.x - b.x_min) as u32 * cs;
            let py = top + (s.y - b.y_min) as u32 * cs;
            let _ = writeln!(
                w,
                r#"<rect class="train" x="{}" y="{}" width="{}" height="{}"/>"#,
                f64::from(px) + 0.75,
                f64::from(py) + 0.75,
                f64::from(cs) - 1.5,
                f64::from(cs) - 1.5
            );
        }
        let _ = writeln!(w, "</g>");
    }

    // Legend: vertical gradient, max at the top.
    let _ = writeln!(w, r#"<defs><linearGradient id="ramp" x1="0" y1="1" x2="0" y2="0">"#);
    for (k, _) in RAMP.iter().enumerate() {
        let t = k as f64 / (RAMP.len() - 1) as f64;
        let _ = writeln!(w, r#"<stop offset="{t:.3}" stop-color="{}"/>"#, ramp_color(t));
    }
    let _ = writeln!(w, "</linearGradient></defs>");
    let _ = writeln!(w, r#"<g id="legend" font-family="sans-serif" font-size="11">"#);
    if span > 0.0 {
        let _ = writeln!(
            w,
            r##"<rect x="{legend_x}" y="{top}" width="16" height="{legend_h}" fill="url(#ramp)" stroke="#333333" stroke-width="0.5"/>"##
        );
        let _ = writeln!(w, r#"<text x="{}" y="{}">max {}</text>"#, legend_x + 20, top + 10, label(hi));
        let _ = writeln!(w, r#"<text x="{}" y="{}">min {}</text>"#, legend_x + 20, top + legend_h, label(lo));
    } else {
        let _ = writeln!(
            w,
            r##"<rect x="{legend_x}" y="{top}" width="16" height="{legend_h}" fill="{}" stroke="#333333" stroke-width="0.5"/>"##,
            ramp_color(0.5)
        );
        let _ = writeln!(
            w,
            r#"<text x="{}" y="{}">min = max = {}</text>"#,
            legend_x + 20,
            top + legend_h / 2,
            label(lo)
        );
    }
    let _ = writeln!(w, "</g>");
    let _ = writeln!(w, "</svg>");
    Ok(svg)
}
