//! Minimal SVG line plots.

use std::fmt::Write as _;

const W: f64 = 640.0;
const H: f64 = 400.0;
const PAD: f64 = 50.0;
const COLOURS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];

pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
}

fn bounds(series: &[Series]) -> (f64, f64, f64, f64) {
    let mut b = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for (x, y) in series.iter().flat_map(|s| &s.points) {
        if x.is_finite() && y.is_finite() {
            b = (b.0.min(*x), b.1.max(*x), b.2.min(*y), b.3.max(*y));
        }
    }
    if !(b.1 > b.0) {
        b.1 = b.0 + 1.0;
    }
    if !(b.3 > b.2) {
        b.3 = b.2 + 1.0;
    }
    b
}

/// Plots `series` as polylines. A NaN point breaks the line.
pub fn line_plot(title: &str, xlabel: &str, ylabel: &str, series: &[Series]) -> String {
    let (x0, x1, y0, y1) = bounds(series);
    let px = |x: f64| PAD + (x - x0) / (x1 - x0) * (W - 2.0 * PAD);
    let py = |y: f64| H - PAD - (y - y0) / (y1 - y0) * (H - 2.0 * PAD);
    let mut s = String::new();
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" font-family="sans-serif" font-size="12">"#);
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(s, r#"<text x="{}" y="20" text-anchor="middle">{title}</text>"#, W / 2.0);
    let _ = writeln!(
        s,
        r#"<rect x="{PAD}" y="{PAD}" width="{}" height="{}" fill="none" stroke="black"/>"#,
        W - 2.0 * PAD,
        H - 2.0 * PAD
    );
    let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle">{xlabel}</text>"#, W / 2.0, H - 10.0);
    let _ = writeln!(s, r#"<text x="15" y="{}" transform="rotate(-90 15 {})" text-anchor="middle">{ylabel}</text>"#, H / 2.0, H / 2.0);
    for (v, anchor, x, y) in [
        (x0, "start", PAD, H - PAD + 15.0),
        (x1, "end", W - PAD, H - PAD + 15.0),
        (y0, "end", PAD - 4.0, H - PAD),
        (y1, "end", PAD - 4.0, PAD + 10.0),
    ] {
        let _ = writeln!(s, r#"<text x="{x}" y="{y}" text-anchor="{anchor}">{v:.4}</text>"#);
    }
    for (k, ser) in series.iter().enumerate() {
        let colour = COLOURS[k % COLOURS.len()];
        for run in ser.points.split(|p| !(p.0.is_finite() && p.1.is_finite())) {
            if run.is_empty() {
                continue;
            }
            let pts: Vec<String> = run.iter().map(|&(x, y)| format!("{:.2},{:.2}", px(x), py(y))).collect();
            let _ = writeln!(
                s,
                r#"<polyline fill="none" stroke="{colour}" stroke-width="1" points="{}"/>"#,
                pts.join(" ")
            );
        }
        if !ser.label.is_empty() {
            let _ = writeln!(
                s,
                r#"<text x="{}" y="{}" fill="{colour}">{}</text>"#,
                W - PAD + 4.0,
                PAD + 14.0 * (k as f64 + 1.0),
                ser.label
            );
        }
    }
    s.push_str("</svg>\n");
    s
}

/// Mean of `values` over `bins` equal cells of `[0, length)`; empty cells
/// are NaN.
pub fn bin(xs: &[f64], values: &[f64], length: f64, bins: usize) -> Vec<f64> {
    let mut sum = vec![0.0; bins];
    let mut count = vec![0usize; bins];
    for (x, v) in xs.iter().zip(values) {
        let k = ((x / length * bins as f64) as usize).min(bins - 1);
        sum[k] += v;
        count[k] += 1;
    }
    sum.iter()
        .zip(&count)
        .map(|(s, &c)| if c == 0 { f64::NAN } else { s / c as f64 })
        .collect()
}

/// Space-time map of equally binned rows, one per time, white to black.
pub fn heat_map(title: &str, length: f64, rows: &[(f64, Vec<f64>)]) -> String {
    let (lo, hi) = rows
        .iter()
        .flat_map(|r| &r.1)
        .filter(|v| v.is_finite())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    let span = if hi > lo { hi - lo } else { 1.0 };
    let (t0, t1) = (rows.first().map_or(0.0, |r| r.0), rows.last().map_or(1.0, |r| r.0));
    let (pw, ph) = (W - 2.0 * PAD, H - 2.0 * PAD);
    let mut s = String::new();
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" font-family="sans-serif" font-size="12">"#);
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(s, r#"<text x="{}" y="20" text-anchor="middle">{title}</text>"#, W / 2.0);
    let nt = rows.len().max(1) as f64;
    for (i, (_, row)) in rows.iter().enumerate() {
        let cw = pw / row.len().max(1) as f64;
        // time runs upwards
        let y = PAD + ph * (1.0 - (i as f64 + 1.0) / nt);
        for (k, v) in row.iter().enumerate() {
            if !v.is_finite() {
                continue;
            }
            let g = (255.0 * (1.0 - (v - lo) / span)).round() as u8;
            let _ = writeln!(
                s,
                r#"<rect x="{:.2}" y="{y:.2}" width="{:.2}" height="{:.2}" fill="rgb({g},{g},{g})"/>"#,
                PAD + k as f64 * cw,
                cw + 0.05,
                ph / nt + 0.05
            );
        }
    }
    let _ = writeln!(s, r#"<rect x="{PAD}" y="{PAD}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#);
    let _ = writeln!(s, r#"<text x="{PAD}" y="{}" text-anchor="start">0</text>"#, H - PAD + 15.0);
    let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="end">{length} m</text>"#, W - PAD, H - PAD + 15.0);
    let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="end">{t0} s</text>"#, PAD - 4.0, H - PAD);
    let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="end">{t1} s</text>"#, PAD - 4.0, PAD + 10.0);
    let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle">density {lo:.4} to {hi:.4} 1/m</text>"#, W / 2.0, H - 10.0);
    s.push_str("</svg>\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nan_breaks_lines() {
        let s = line_plot(
            "t",
            "x",
            "y",
            &[Series {
                label: "a".into(),
                points: vec![(0.0, 0.0), (1.0, 1.0), (f64::NAN, f64::NAN), (2.0, 0.0), (3.0, 1.0)],
            }],
        );
        assert_eq!(s.matches("<polyline").count(), 2);
        assert!(s.ends_with("</svg>\n"));
    }

    #[test]
    fn binning_and_heat_map() {
        let b = bin(&[0.1, 0.2, 2.5, 3.9], &[1.0, 3.0, 5.0, 7.0], 4.0, 4);
        assert_eq!(b[0], 2.0);
        assert!(b[1].is_nan());
        assert_eq!((b[2], b[3]), (5.0, 7.0));
        let s = heat_map("m", 4.0, &[(0.0, b.clone()), (1.0, b)]);
        assert_eq!(s.matches("rgb(").count(), 6);
    }
}
