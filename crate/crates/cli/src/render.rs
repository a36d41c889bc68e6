//! SVG heatmaps of long-format plot tables.

use std::collections::BTreeSet;
use std::fmt::Write;

use pbif::io::LongTable;

const NONNEGATIVE: [&str; 8] = [
    "#f2f0eb", "#3b6ea8", "#e08a3c", "#4f9d5d", "#c8474a", "#8a6bb8", "#8c5a48", "#d17cb5",
];
const NEGATIVE: [&str; 4] = ["#6fb7c9", "#2f8a9e", "#1c5f70", "#0e3a45"];

fn color(value: i64) -> &'static str {
    if value >= 0 {
        NONNEGATIVE[(value as usize).min(NONNEGATIVE.len() - 1)]
    } else {
        NEGATIVE[((-value - 1) as usize).min(NEGATIVE.len() - 1)]
    }
}

fn fmt_tick(v: f64) -> String {
    let s = format!("{v:.3}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" {
        "0".into()
    } else {
        s.to_string()
    }
}

/// One rectangle per (parameter, level) cell; parameter on x, level on y
/// (increasing upwards), a legend with one swatch per value present.
pub fn render_svg(table: &LongTable<f64>, d: usize) -> String {
    let (left, right, top, bottom) = (70.0, 130.0, 40.0, 60.0);
    let (pw, ph) = (640.0, 400.0);
    let (w, h) = (left + pw + right, top + ph + bottom);
    let m = &table.values[d];
    let (nj, nk) = (table.params.len(), table.levels.len());
    let (cw, ch) = (pw / nj as f64, ph / nk as f64);

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="{w}" height="{h}" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="{}" y="24" text-anchor="middle" font-size="14">{} in dimension {}</text>"#,
        left + pw / 2.0,
        table.value_column,
        table.dims[d]
    );
    for (j, column) in m.iter().enumerate() {
        for (k, &v) in column.iter().enumerate() {
            let x = left + j as f64 * cw;
            let y = top + ph - (k + 1) as f64 * ch;
            let _ = writeln!(
                s,
                r#"<rect x="{x:.3}" y="{y:.3}" width="{:.3}" height="{:.3}" fill="{}"/>"#,
                cw + 0.05,
                ch + 0.05,
                color(v)
            );
        }
    }
    let _ = writeln!(
        s,
        r#"<rect x="{left}" y="{top}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#
    );

    let ticks = |n: usize| -> Vec<usize> {
        let mut t: Vec<usize> = (0..5).map(|i| i * (n - 1) / 4).collect();
        t.dedup();
        t
    };
    for j in ticks(nj) {
        let x = left + (j as f64 + 0.5) * cw;
        let _ = writeln!(
            s,
            r#"<line x1="{x:.3}" y1="{}" x2="{x:.3}" y2="{}" stroke="black"/><text x="{x:.3}" y="{}" text-anchor="middle">{}</text>"#,
            top + ph,
            top + ph + 5.0,
            top + ph + 19.0,
            fmt_tick(table.params[j])
        );
    }
    for k in ticks(nk) {
        let y = top + ph - (k as f64 + 0.5) * ch;
        let _ = writeln!(
            s,
            r#"<line x1="{}" y1="{y:.3}" x2="{left}" y2="{y:.3}" stroke="black"/><text x="{}" y="{:.3}" text-anchor="end">{}</text>"#,
            left - 5.0,
            left - 8.0,
            y + 4.0,
            fmt_tick(table.levels[k])
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" text-anchor="middle" font-size="14">{}</text>"#,
        left + pw / 2.0,
        h - 15.0,
        table.parameter
    );
    let _ = writeln!(
        s,
        r#"<text x="20" y="{}" text-anchor="middle" font-size="14" transform="rotate(-90 20 {})">L</text>"#,
        top + ph / 2.0,
        top + ph / 2.0
    );

    let present: BTreeSet<i64> = m.iter().flatten().copied().collect();
    let lx = left + pw + 25.0;
    for (i, v) in present.iter().enumerate() {
        let y = top + 10.0 + i as f64 * 22.0;
        let _ = writeln!(
            s,
            r#"<rect x="{lx}" y="{y}" width="16" height="16" fill="{}" stroke="black"/><text x="{}" y="{}">{} = {v}</text>"#,
            color(*v),
            lx + 24.0,
            y + 13.0,
            table.value_column
        );
    }
    s.push_str("</svg>\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table(values: Vec<Vec<i64>>) -> LongTable<f64> {
        LongTable {
            parameter: "h".into(),
            value_column: "beta".into(),
            params: (0..values.len()).map(|j| j as f64).collect(),
            levels: (1..=values[0].len())
                .map(|k| k as f64 / values[0].len() as f64)
                .collect(),
            dims: vec![0],
            values: vec![values],
        }
    }

    #[test]
    fn constant_plot_uses_one_color() {
        let svg = render_svg(&table(vec![vec![1; 4]; 3]), 0);
        let fills: BTreeSet<&str> = svg
            .lines()
            .filter(|l| l.starts_with("<rect x=") && !l.contains("stroke"))
            .filter_map(|l| l.split("fill=\"").nth(1)?.split('"').next())
            .collect();
        assert_eq!(fills, BTreeSet::from([color(1)]));
        assert!(svg.contains(">h</text>") && svg.contains(">L</text>"));
    }

    #[test]
    fn distinct_values_get_distinct_colors() {
        let values: BTreeSet<&str> = (-4..8).map(color).collect();
        assert_eq!(values.len(), 12);
        assert_eq!(fmt_tick(-0.0001), "0");
        assert_eq!(fmt_tick(0.5), "0.5");
    }
}
