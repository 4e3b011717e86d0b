//! Log–log line plots written directly as SVG.

use std::fmt::Write as _;

use crate::table::fmt_float;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 480.0;
const MARGIN: f64 = 64.0;
const COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

/// A named series of `(x, y)` points; only positive coordinates are drawn.
#[derive(Clone, Debug)]
pub struct Series {
    pub name: String,
    pub points: Vec<(f64, f64)>,
}

/// Least-squares line through `(ln x, ln y)`: `(slope, intercept)`.
pub fn loglog_fit(points: &[(f64, f64)]) -> Option<(f64, f64)> {
    let logs: Vec<(f64, f64)> = points
        .iter()
        .filter(|(x, y)| *x > 0.0 && *y > 0.0 && x.is_finite() && y.is_finite())
        .map(|(x, y)| (x.ln(), y.ln()))
        .collect();
    if logs.len() < 2 {
        return None;
    }
    let k = logs.len() as f64;
    let mx = logs.iter().map(|p| p.0).sum::<f64>() / k;
    let my = logs.iter().map(|p| p.1).sum::<f64>() / k;
    let sxx: f64 = logs.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = logs.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    Some((slope, my - slope * mx))
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Decade range `[floor(log10 lo), ceil(log10 hi)]`, at least one decade wide.
fn decades(lo: f64, hi: f64) -> (i32, i32) {
    let a = lo.log10().floor() as i32;
    let b = (hi.log10().ceil() as i32).max(a + 1);
    (a, b)
}

/// Draws every series on shared log–log axes; each series with two or more
/// points gets a dashed least-squares line labeled with its slope.
pub fn loglog_svg(title: &str, x_label: &str, y_label: &str, series: &[Series]) -> String {
    let pts: Vec<(f64, f64)> = series
        .iter()
        .flat_map(|s| s.points.iter().copied())
        .filter(|(x, y)| *x > 0.0 && *y > 0.0 && x.is_finite() && y.is_finite())
        .collect();
    let (xlo, xhi, ylo, yhi) = if pts.is_empty() {
        (1.0, 10.0, 1.0, 10.0)
    } else {
        pts.iter().fold((f64::MAX, f64::MIN, f64::MAX, f64::MIN), |acc, p| {
            (acc.0.min(p.0), acc.1.max(p.0), acc.2.min(p.1), acc.3.max(p.1))
        })
    };
    let (xa, xb) = decades(xlo, xhi);
    let (ya, yb) = decades(ylo, yhi);
    let sx = |x: f64| MARGIN + (x.log10() - f64::from(xa)) / f64::from(xb - xa) * (WIDTH - 2.0 * MARGIN);
    let sy = |y: f64| HEIGHT - MARGIN - (y.log10() - f64::from(ya)) / f64::from(yb - ya) * (HEIGHT - 2.0 * MARGIN);

    let mut out = String::new();
    writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    )
    .unwrap();
    writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#).unwrap();
    writeln!(out, r#"<text x="{}" y="24" text-anchor="middle" font-size="15">{}</text>"#, WIDTH / 2.0, escape(title)).unwrap();
    let (left, right, top, bottom) = (MARGIN, WIDTH - MARGIN, MARGIN, HEIGHT - MARGIN);
    writeln!(out, r#"<rect x="{left}" y="{top}" width="{}" height="{}" fill="none" stroke="black"/>"#, right - left, bottom - top).unwrap();
    for e in xa..=xb {
        let x = sx(10f64.powi(e));
        writeln!(out, r##"<line x1="{x:.2}" y1="{top}" x2="{x:.2}" y2="{bottom}" stroke="#dddddd"/>"##).unwrap();
        writeln!(out, r#"<text x="{x:.2}" y="{}" text-anchor="middle">1e{e}</text>"#, bottom + 16.0).unwrap();
    }
    for e in ya..=yb {
        let y = sy(10f64.powi(e));
        writeln!(out, r##"<line x1="{left}" y1="{y:.2}" x2="{right}" y2="{y:.2}" stroke="#dddddd"/>"##).unwrap();
        writeln!(out, r#"<text x="{}" y="{:.2}" text-anchor="end">1e{e}</text>"#, left - 6.0, y + 4.0).unwrap();
    }
    writeln!(out, r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#, WIDTH / 2.0, HEIGHT - 20.0, escape(x_label)).unwrap();
    writeln!(
        out,
        r#"<text x="18" y="{}" text-anchor="middle" transform="rotate(-90 18 {})">{}</text>"#,
        HEIGHT / 2.0,
        HEIGHT / 2.0,
        escape(y_label)
    )
    .unwrap();

    for (k, s) in series.iter().enumerate() {
        let color = COLORS[k % COLORS.len()];
        let drawn: Vec<(f64, f64)> = s
            .points
            .iter()
            .copied()
            .filter(|(x, y)| *x > 0.0 && *y > 0.0 && x.is_finite() && y.is_finite())
            .collect();
        let poly: Vec<String> = drawn.iter().map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y))).collect();
        if poly.len() > 1 {
            writeln!(out, r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="1.5"/>"#, poly.join(" ")).unwrap();
        }
        for &(x, y) in &drawn {
            writeln!(out, r#"<circle cx="{:.2}" cy="{:.2}" r="3" fill="{color}"/>"#, sx(x), sy(y)).unwrap();
        }
        let mut legend = escape(&s.name);
        if let Some((slope, icept)) = loglog_fit(&drawn) {
            let (x0, x1) = (drawn.first().unwrap().0, drawn.last().unwrap().0);
            let f = |x: f64| (icept + slope * x.ln()).exp();
            writeln!(
                out,
                r#"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="{color}" stroke-dasharray="5,4"/>"#,
                sx(x0),
                sy(f(x0)),
                sx(x1),
                sy(f(x1))
            )
            .unwrap();
            write!(legend, " (slope {})", fmt_float(slope)).unwrap();
        }
        let ly = top + 16.0 + 16.0 * k as f64;
        writeln!(out, r#"<text x="{}" y="{ly}" fill="{color}">{legend}</text>"#, left + 8.0).unwrap();
    }
    out.push_str("</svg>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fit_recovers_power_law() {
        let pts: Vec<(f64, f64)> = [2.0, 4.0, 8.0, 16.0].iter().map(|&n: &f64| (n, 3.0 * n.powf(-0.5))).collect();
        let (slope, icept) = loglog_fit(&pts).unwrap();
        assert!((slope + 0.5).abs() <= 1e-12);
        assert!((icept - 3f64.ln()).abs() <= 1e-12);
        assert!(loglog_fit(&pts[..1]).is_none());
    }

    #[test]
    fn svg_is_well_formed_and_labels_slope() {
        let s = Series {
            name: "psi <dec>".into(),
            points: vec![(2.0, 0.5), (4.0, 0.25), (8.0, 0.125)],
        };
        let svg = loglog_svg("Psi_n", "n", "value", &[s]);
        assert!(svg.starts_with("<svg") && svg.ends_with("</svg>\n"));
        assert!(svg.contains("(slope -1)"));
        assert!(svg.contains("psi &lt;dec&gt;"));
        assert_eq!(svg.matches("<circle").count(), 3);
    }
}
