//! Minimal standalone SVG renderings for reports.

use std::fmt::Write;

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

/// Horizontal bar chart, one bar per label. Negative values extend left of
/// the zero line.
pub fn bar_chart(title: &str, labels: &[String], values: &[f64]) -> String {
    let row_h = 18.0;
    let label_w = 180.0;
    let plot_w = 420.0;
    let height = 40.0 + row_h * labels.len() as f64 + 10.0;
    let lo = values.iter().cloned().filter(|v| v.is_finite()).fold(0.0f64, f64::min);
    let hi = values.iter().cloned().filter(|v| v.is_finite()).fold(0.0f64, f64::max);
    let span = if hi > lo { hi - lo } else { 1.0 };
    let x = |v: f64| label_w + (v - lo) / span * plot_w;
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{}" height="{height}" font-family="sans-serif" font-size="11">"#,
        label_w + plot_w + 80.0
    );
    let _ = writeln!(s, r#"<text x="10" y="20" font-size="14">{}</text>"#, escape(title));
    for (i, (l, &v)) in labels.iter().zip(values).enumerate() {
        let y = 35.0 + row_h * i as f64;
        let (x0, x1) = if v >= 0.0 { (x(0.0), x(v)) } else { (x(v), x(0.0)) };
        let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="end">{}</text>"#, label_w - 6.0, y + 12.0, escape(l));
        if v.is_finite() {
            let _ = writeln!(
                s,
                r##"<rect x="{x0:.2}" y="{y:.2}" width="{:.2}" height="{:.2}" fill="#4878a8"/>"##,
                (x1 - x0).max(0.5),
                row_h - 4.0
            );
            let _ = writeln!(s, r#"<text x="{:.2}" y="{}">{v:.4}</text>"#, x1.max(x0) + 4.0, y + 12.0);
        }
    }
    let _ = writeln!(
        s,
        r#"<line x1="{0:.2}" x2="{0:.2}" y1="28" y2="{1}" stroke="black"/>"#,
        x(0.0),
        height - 10.0
    );
    s.push_str("</svg>\n");
    s
}

/// Heatmap with a blue (low) to red (high) ramp; `None` cells are grey.
pub fn heatmap(title: &str, rows: &[String], cols: &[String], values: &[Vec<Option<f64>>]) -> String {
    let cell = 64.0;
    let left = 100.0;
    let top = 60.0;
    let finite: Vec<f64> = values.iter().flatten().flatten().copied().filter(|v| v.is_finite()).collect();
    let lo = finite.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = finite.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let span = if hi > lo { hi - lo } else { 1.0 };
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{}" height="{}" font-family="sans-serif" font-size="11">"#,
        left + cell * cols.len() as f64 + 20.0,
        top + cell * rows.len() as f64 + 20.0
    );
    let _ = writeln!(s, r#"<text x="10" y="20" font-size="14">{}</text>"#, escape(title));
    for (j, c) in cols.iter().enumerate() {
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="{}" text-anchor="middle">{}</text>"#,
            left + cell * (j as f64 + 0.5),
            top - 8.0,
            escape(c)
        );
    }
    for (i, r) in rows.iter().enumerate() {
        let y = top + cell * i as f64;
        let _ = writeln!(s, r#"<text x="{}" y="{:.1}" text-anchor="end">{}</text>"#, left - 6.0, y + cell / 2.0 + 4.0, escape(r));
        for j in 0..cols.len() {
            let v = values.get(i).and_then(|row| row.get(j)).copied().flatten();
            let fill = match v {
                Some(v) if v.is_finite() => {
                    let t = (v - lo) / span;
                    format!("rgb({},{},{})", (60.0 + 195.0 * t) as u8, 90, (255.0 - 195.0 * t) as u8)
                }
                _ => "rgb(210,210,210)".to_string(),
            };
            let x = left + cell * j as f64;
            let _ = writeln!(
                s,
                r#"<rect x="{x:.1}" y="{y:.1}" width="{cell}" height="{cell}" fill="{fill}" stroke="white"/>"#
            );
            if let Some(v) = v {
                let _ = writeln!(
                    s,
                    r#"<text x="{:.1}" y="{:.1}" text-anchor="middle" fill="white">{v:.3}</text>"#,
                    x + cell / 2.0,
                    y + cell / 2.0 + 4.0
                );
            }
        }
    }
    s.push_str("</svg>\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn outputs_are_closed_documents() {
        let b = bar_chart("a<b", &["x".into(), "y".into()], &[0.5, -0.1]);
        assert!(b.starts_with("<svg") && b.trim_end().ends_with("</svg>"));
        assert!(b.contains("a&lt;b"));
        let h = heatmap("h", &["r".into()], &["c1".into(), "c2".into()], &[vec![Some(1.0), None]]);
        assert_eq!(h.matches("<rect").count(), 2);
    }
}
