//! FSER against SNR as a standalone SVG with a logarithmic FSER axis.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use crate::analysis::FserReport;
use crate::{Error, Result};

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 420.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 150.0;
const TOP: f64 = 30.0;
const BOTTOM: f64 = 50.0;
const COLORS: [&str; 6] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf",
];

/// One curve per label, averaging repeats at each noise voltage. Points with
/// zero FSER are drawn at `0.5 / frames` (hollow markers) so they stay on the
/// log axis.
pub fn render_fser_svg(rows: &[FserReport]) -> String {
    let mut series: BTreeMap<&str, BTreeMap<u64, (f64, f64, usize, usize)>> = BTreeMap::new();
    for r in rows.iter().filter(|r| r.snr_db.is_finite()) {
        let key = (r.noise_voltage * 1e9).round() as u64;
        let e = series.entry(&r.label).or_default().entry(key).or_default();
        e.0 += r.snr_db;
        e.1 += r.fser;
        e.2 += 1;
        e.3 = e.3.max(r.frames_total);
    }
    let mut curves: Vec<(&str, Vec<(f64, f64, bool)>)> = Vec::new();
    for (label, pts) in &series {
        let mut v: Vec<(f64, f64, bool)> = pts
            .values()
            .map(|&(snr, fser, count, total)| {
                let fser = fser / count as f64;
                let floor = 0.5 / total.max(1) as f64;
                (snr / count as f64, fser.max(floor), fser == 0.0)
            })
            .collect();
        v.sort_by(|a, b| a.0.total_cmp(&b.0));
        curves.push((label, v));
    }

    let all: Vec<&(f64, f64, bool)> = curves.iter().flat_map(|(_, v)| v).collect();
    let (mut x0, mut x1) = all
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| {
            (lo.min(p.0), hi.max(p.0))
        });
    if !x0.is_finite() {
        (x0, x1) = (0.0, 1.0);
    }
    if x1 - x0 < 1e-9 {
        x0 -= 0.5;
        x1 += 0.5;
    }
    let (x0, x1) = (x0.floor(), x1.ceil());
    let y_lo_exp = all
        .iter()
        .map(|p| p.1.log10().floor() as i32)
        .min()
        .unwrap_or(-3)
        .min(-1);
    let (ylo, yhi) = (y_lo_exp as f64, 0.0f64);

    let pw = WIDTH - LEFT - RIGHT;
    let ph = HEIGHT - TOP - BOTTOM;
    let sx = |x: f64| LEFT + (x - x0) / (x1 - x0) * pw;
    let sy = |y: f64| TOP + (yhi - y.log10()) / (yhi - ylo) * ph;

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<rect x="{LEFT}" y="{TOP}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#
    );
    for e in y_lo_exp..=0 {
        let y = sy(10f64.powi(e));
        let _ = writeln!(
            s,
            r##"<line x1="{LEFT}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="#ddd"/><text x="{:.2}" y="{:.2}" text-anchor="end">1e{e}</text>"##,
            LEFT + pw,
            LEFT - 6.0,
            y + 4.0
        );
    }
    let step = ((x1 - x0) / 8.0).ceil().max(1.0);
    let mut x = x0;
    while x <= x1 + 1e-9 {
        let px = sx(x);
        let _ = writeln!(
            s,
            r##"<line x1="{px:.2}" y1="{TOP}" x2="{px:.2}" y2="{:.2}" stroke="#ddd"/><text x="{px:.2}" y="{:.2}" text-anchor="middle">{x}</text>"##,
            TOP + ph,
            TOP + ph + 16.0
        );
        x += step;
    }
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">SNR (dB)</text>"#,
        LEFT + pw / 2.0,
        HEIGHT - 10.0
    );
    let _ = writeln!(
        s,
        r#"<text transform="translate(18 {:.2}) rotate(-90)" text-anchor="middle">FSER</text>"#,
        TOP + ph / 2.0
    );
    for (i, (label, pts)) in curves.iter().enumerate() {
        let color = COLORS[i % COLORS.len()];
        let path: Vec<String> = pts
            .iter()
            .map(|p| format!("{:.2},{:.2}", sx(p.0), sy(p.1)))
            .collect();
        let _ = writeln!(
            s,
            r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="1.5"/>"#,
            path.join(" ")
        );
        for p in pts {
            let fill = if p.2 { "white" } else { color };
            let _ = writeln!(
                s,
                r#"<circle cx="{:.2}" cy="{:.2}" r="3.5" fill="{fill}" stroke="{color}"/>"#,
                sx(p.0),
                sy(p.1)
            );
        }
        let ly = TOP + 16.0 + 18.0 * i as f64;
        let _ = writeln!(
            s,
            r#"<line x1="{:.2}" y1="{ly:.2}" x2="{:.2}" y2="{ly:.2}" stroke="{color}" stroke-width="2"/><text x="{:.2}" y="{:.2}">{label}</text>"#,
            LEFT + pw + 12.0,
            LEFT + pw + 32.0,
            LEFT + pw + 38.0,
            ly + 4.0
        );
    }
    s.push_str("</svg>\n");
    s
}

pub fn write_fser_plot(path: &Path, rows: &[FserReport]) -> Result<()> {
    std::fs::write(path, render_fser_svg(rows)).map_err(|e| Error::io(path, e))
}
