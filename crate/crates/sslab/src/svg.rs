//! Minimal SVG line plots of Re q against x, one polyline per time slice.

use std::fmt::Write;

use crate::output::Series;

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 480.0;
const MARGIN: f64 = 60.0;
const TICKS: usize = 5;
const COLORS: [&str; 6] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf",
];

fn bounds(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values
        .filter(|v| v.is_finite())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| {
            (a.min(v), b.max(v))
        });
    if !lo.is_finite() {
        (-1.0, 1.0)
    } else if hi - lo < 1e-12 {
        (lo - 0.5, hi + 0.5)
    } else {
        (lo, hi)
    }
}

pub fn render(title: &str, series: &Series) -> String {
    let g = &series.grid;
    let nx = g.x.len();
    let (x0, x1) = bounds(g.x.iter().copied());
    let (y0, y1) = bounds(series.values.iter().map(|q| q.re));
    let pad = 0.05 * (y1 - y0);
    let (y0, y1) = (y0 - pad, y1 + pad);
    let sx = |x: f64| MARGIN + (x - x0) / (x1 - x0) * (WIDTH - 2.0 * MARGIN);
    let sy = |y: f64| HEIGHT - MARGIN - (y - y0) / (y1 - y0) * (HEIGHT - 2.0 * MARGIN);

    let mut s = String::new();
    writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
    )
    .unwrap();
    writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#).unwrap();
    writeln!(
        s,
        r#"<text x="{}" y="30" font-size="16" text-anchor="middle">{title}: Re q</text>"#,
        WIDTH / 2.0
    )
    .unwrap();
    let (left, right, top, bottom) = (MARGIN, WIDTH - MARGIN, MARGIN, HEIGHT - MARGIN);
    writeln!(s, r#"<g stroke="black" stroke-width="1">"#).unwrap();
    writeln!(
        s,
        r#"<line x1="{left}" y1="{bottom}" x2="{right}" y2="{bottom}"/>"#
    )
    .unwrap();
    writeln!(
        s,
        r#"<line x1="{left}" y1="{top}" x2="{left}" y2="{bottom}"/>"#
    )
    .unwrap();
    for k in 0..TICKS {
        let f = k as f64 / (TICKS - 1) as f64;
        let (px, py) = (left + f * (right - left), bottom - f * (bottom - top));
        writeln!(
            s,
            r#"<line x1="{px:.2}" y1="{bottom}" x2="{px:.2}" y2="{}"/>"#,
            bottom + 5.0
        )
        .unwrap();
        writeln!(
            s,
            r#"<line x1="{}" y1="{py:.2}" x2="{left}" y2="{py:.2}"/>"#,
            left - 5.0
        )
        .unwrap();
    }
    writeln!(s, "</g>").unwrap();
    writeln!(s, r#"<g font-size="11" font-family="sans-serif">"#).unwrap();
    for k in 0..TICKS {
        let f = k as f64 / (TICKS - 1) as f64;
        let (px, py) = (left + f * (right - left), bottom - f * (bottom - top));
        let (xv, yv) = (x0 + f * (x1 - x0), y0 + f * (y1 - y0));
        writeln!(
            s,
            r#"<text x="{px:.2}" y="{}" text-anchor="middle">{xv:.3}</text>"#,
            bottom + 18.0
        )
        .unwrap();
        writeln!(
            s,
            r#"<text x="{}" y="{:.2}" text-anchor="end">{yv:.3}</text>"#,
            left - 8.0,
            py + 4.0
        )
        .unwrap();
    }
    writeln!(
        s,
        r#"<text x="{}" y="{}" text-anchor="middle">x</text>"#,
        WIDTH / 2.0,
        HEIGHT - 15.0
    )
    .unwrap();
    writeln!(s, "</g>").unwrap();
    for (j, t) in g.t.iter().enumerate() {
        let color = COLORS[j % COLORS.len()];
        let mut pts = String::new();
        for i in 0..nx {
            let q = series.values[j * nx + i];
            if q.re.is_finite() {
                write!(pts, "{:.2},{:.2} ", sx(g.x[i]), sy(q.re)).unwrap();
            }
        }
        writeln!(
            s,
            r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#,
            pts.trim_end()
        )
        .unwrap();
        writeln!(
            s,
            r#"<text x="{}" y="{}" font-size="11" fill="{color}" text-anchor="end">t = {t}</text>"#,
            right,
            top + 14.0 * (j as f64 + 1.0)
        )
        .unwrap();
    }
    s.push_str("</svg>\n");
    s
}
