//! Single-panel SVG rendering of the figure sweep: exact values as circles,
//! the composition-independent bounds as flat curves, the refined bounds
//! dashed/dotted. Deliberately minimal — the CSV is the artifact of record;
//! this is a quick visual check.

use std::fmt::Write;

use crate::FigureRow;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 420.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 620.0;
const TOP: f64 = 30.0;
const BOTTOM: f64 = 370.0;

struct Series<'a> {
    label: &'a str,
    color: &'a str,
    dash: Option<&'a str>,
    values: Vec<f64>,
}

pub fn figure_svg(n: u64, k: u64, rows: &[FigureRow]) -> String {
    let xs: Vec<f64> = rows.iter().map(|r| r.ell as f64).collect();
    let series = [
        Series {
            label: "stam upper",
            color: "#1f77b4",
            dash: None,
            values: rows.iter().map(|r| r.stam_upper).collect(),
        },
        Series {
            label: "stam lower",
            color: "#1f77b4",
            dash: Some("2 4"),
            values: rows.iter().map(|r| r.stam_lower).collect(),
        },
        Series {
            label: "hm upper",
            color: "#2ca02c",
            dash: None,
            values: rows.iter().map(|r| r.hm_upper).collect(),
        },
        Series {
            label: "hm lower",
            color: "#2ca02c",
            dash: Some("2 4"),
            values: rows.iter().map(|r| r.hm_lower).collect(),
        },
        Series {
            label: "refined upper",
            color: "#d62728",
            dash: Some("7 3"),
            values: rows.iter().map(|r| r.thm1_upper).collect(),
        },
        Series {
            label: "two-colour upper",
            color: "#9467bd",
            dash: Some("1 3"),
            values: rows.iter().map(|r| r.prop12_upper).collect(),
        },
    ];

    let x_min = xs.first().copied().unwrap_or(0.0);
    let x_max = xs.last().copied().unwrap_or(1.0).max(x_min + 1.0);
    let y_max = series
        .iter()
        .flat_map(|s| s.values.iter())
        .chain(rows.iter().map(|r| &r.exact_d))
        .copied()
        .filter(|v| v.is_finite())
        .fold(f64::MIN, f64::max)
        .max(1e-12)
        * 1.06;

    let x = |v: f64| LEFT + (v - x_min) / (x_max - x_min) * (RIGHT - LEFT);
    let y = |v: f64| BOTTOM - v / y_max * (BOTTOM - TOP);

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 {WIDTH} {HEIGHT}\" \
         font-family=\"sans-serif\" font-size=\"11\">"
    );
    let _ = writeln!(
        svg,
        "<text x=\"{}\" y=\"16\" text-anchor=\"middle\">divergence between drawing {k} of {n} \
         with and without replacement</text>",
        (LEFT + RIGHT) / 2.0
    );

    // Axes with a handful of ticks.
    let _ = writeln!(
        svg,
        "<path d=\"M {LEFT} {TOP} L {LEFT} {BOTTOM} L {RIGHT} {BOTTOM}\" fill=\"none\" \
         stroke=\"black\"/>"
    );
    for i in 0..=4 {
        let v = y_max * i as f64 / 4.0;
        let py = y(v);
        let _ = writeln!(
            svg,
            "<line x1=\"{:.1}\" y1=\"{py:.1}\" x2=\"{LEFT}\" y2=\"{py:.1}\" stroke=\"black\"/>\
             <text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"end\">{v:.3}</text>",
            LEFT - 4.0,
            LEFT - 7.0,
            py + 4.0
        );
        let v = x_min + (x_max - x_min) * i as f64 / 4.0;
        let px = x(v);
        let _ = writeln!(
            svg,
            "<line x1=\"{px:.1}\" y1=\"{BOTTOM}\" x2=\"{px:.1}\" y2=\"{:.1}\" stroke=\"black\"/>\
             <text x=\"{px:.1}\" y=\"{:.1}\" text-anchor=\"middle\">{v:.0}</text>",
            BOTTOM + 4.0,
            BOTTOM + 16.0
        );
    }
    let _ = writeln!(
        svg,
        "<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"middle\">leading colour count</text>",
        (LEFT + RIGHT) / 2.0,
        BOTTOM + 34.0
    );

    for s in &series {
        let points: String = xs
            .iter()
            .zip(&s.values)
            .filter(|(_, v)| v.is_finite())
            .map(|(px, v)| format!("{:.2},{:.2} ", x(*px), y(*v)))
            .collect();
        let dash = s
            .dash
            .map(|d| format!(" stroke-dasharray=\"{d}\""))
            .unwrap_or_default();
        let _ = writeln!(
            svg,
            "<polyline points=\"{}\" fill=\"none\" stroke=\"{}\"{dash}/>",
            points.trim_end(),
            s.color
        );
    }
    for r in rows {
        let _ = writeln!(
            svg,
            "<circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"2.6\" fill=\"black\"/>",
            x(r.ell as f64),
            y(r.exact_d)
        );
    }

    // Legend, top right.
    let mut ly = TOP + 8.0;
    let _ = writeln!(
        svg,
        "<circle cx=\"{:.1}\" cy=\"{ly:.1}\" r=\"2.6\" fill=\"black\"/>\
         <text x=\"{:.1}\" y=\"{:.1}\">exact</text>",
        RIGHT - 150.0,
        RIGHT - 140.0,
        ly + 4.0
    );
    for s in &series {
        ly += 15.0;
        let dash = s
            .dash
            .map(|d| format!(" stroke-dasharray=\"{d}\""))
            .unwrap_or_default();
        let _ = writeln!(
            svg,
            "<line x1=\"{:.1}\" y1=\"{ly:.1}\" x2=\"{:.1}\" y2=\"{ly:.1}\" stroke=\"{}\"{dash}/>\
             <text x=\"{:.1}\" y=\"{:.1}\">{}</text>",
            RIGHT - 158.0,
            RIGHT - 140.0,
            s.color,
            RIGHT - 134.0,
            ly + 4.0,
            s.label
        );
    }

    svg.push_str("</svg>\n");
    svg
}
