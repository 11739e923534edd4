//! Static SVG figures: semi-log convergence curves and the solution profile.
//! Coordinates are printed with fixed precision so identical inputs give
//! identical bytes.

use std::fmt::Write;

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 480.0;
const LEFT: f64 = 80.0;
const RIGHT: f64 = 230.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 60.0;
const PALETTE: [&str; 8] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf", "#8c564b", "#e377c2"];

/// One convergence curve; points are `(p, percent error)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Curve {
    pub label: String,
    pub points: Vec<(f64, f64)>,
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

struct Frame {
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
}

impl Frame {
    fn px(&self, x: f64) -> f64 {
        LEFT + (x - self.x0) / (self.x1 - self.x0) * (WIDTH - LEFT - RIGHT)
    }

    fn py(&self, y: f64) -> f64 {
        HEIGHT - BOTTOM - (y - self.y0) / (self.y1 - self.y0) * (HEIGHT - TOP - BOTTOM)
    }
}

fn open(svg: &mut String, title: &str) {
    let _ = writeln!(
        svg,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" viewBox=\"0 0 {WIDTH} {HEIGHT}\" font-family=\"sans-serif\" font-size=\"12\">"
    );
    let _ = writeln!(svg, "<rect width=\"{WIDTH}\" height=\"{HEIGHT}\" fill=\"white\"/>");
    let _ = writeln!(
        svg,
        "<text x=\"{:.2}\" y=\"24\" text-anchor=\"middle\" font-size=\"14\">{}</text>",
        LEFT + 0.5 * (WIDTH - LEFT - RIGHT),
        escape(title)
    );
}

fn axes(svg: &mut String, f: &Frame, xlabel: &str, ylabel: &str) {
    let (l, r, t, b) = (f.px(f.x0), f.px(f.x1), f.py(f.y1), f.py(f.y0));
    let _ = writeln!(
        svg,
        "<rect x=\"{l:.2}\" y=\"{t:.2}\" width=\"{:.2}\" height=\"{:.2}\" fill=\"none\" stroke=\"black\"/>",
        r - l,
        b - t
    );
    let _ = writeln!(
        svg,
        "<text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"middle\">{}</text>",
        0.5 * (l + r),
        HEIGHT - 15.0,
        escape(xlabel)
    );
    let _ = writeln!(
        svg,
        "<text x=\"20\" y=\"{:.2}\" text-anchor=\"middle\" transform=\"rotate(-90 20 {:.2})\">{}</text>",
        0.5 * (t + b),
        0.5 * (t + b),
        escape(ylabel)
    );
}

fn x_tick(svg: &mut String, f: &Frame, x: f64, label: &str) {
    let (px, b) = (f.px(x), f.py(f.y0));
    let _ = writeln!(svg, "<line x1=\"{px:.2}\" y1=\"{b:.2}\" x2=\"{px:.2}\" y2=\"{:.2}\" stroke=\"black\"/>", b + 5.0);
    let _ = writeln!(svg, "<text x=\"{px:.2}\" y=\"{:.2}\" text-anchor=\"middle\">{}</text>", b + 20.0, escape(label));
}

fn y_tick(svg: &mut String, f: &Frame, y: f64, label: &str, grid: bool) {
    let (py, l, r) = (f.py(y), f.px(f.x0), f.px(f.x1));
    if grid {
        let _ = writeln!(svg, "<line x1=\"{l:.2}\" y1=\"{py:.2}\" x2=\"{r:.2}\" y2=\"{py:.2}\" stroke=\"#dddddd\"/>");
    }
    let _ = writeln!(svg, "<line x1=\"{:.2}\" y1=\"{py:.2}\" x2=\"{l:.2}\" y2=\"{py:.2}\" stroke=\"black\"/>", l - 5.0);
    let _ = writeln!(svg, "<text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"end\">{}</text>", l - 8.0, py + 4.0, escape(label));
}

/// Semi-log plot: linear `p` horizontally, `log10` of the percent error
/// vertically with one gridline per decade. Non-positive or non-finite errors
/// are skipped.
pub fn convergence_plot(title: &str, curves: &[Curve]) -> String {
    let pts: Vec<(f64, f64)> = curves
        .iter()
        .flat_map(|c| c.points.iter().copied())
        .filter(|&(_, e)| e > 0.0 && e.is_finite())
        .map(|(p, e)| (p, e.log10()))
        .collect();
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for &(x, y) in &pts {
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(y);
        y1 = y1.max(y);
    }
    if pts.is_empty() {
        (x0, x1, y0, y1) = (1.0, 2.0, 0.0, 1.0);
    }
    if x1 <= x0 {
        x0 -= 0.5;
        x1 += 0.5;
    }
    let (mut y0, mut y1) = (y0.floor(), y1.ceil());
    if y1 <= y0 {
        y0 -= 1.0;
        y1 += 1.0;
    }
    let frame = Frame { x0, x1, y0, y1 };

    let mut svg = String::new();
    open(&mut svg, title);
    let decades = (y1 - y0) as i64;
    for k in 0..=decades {
        let y = y0 + k as f64;
        y_tick(&mut svg, &frame, y, &format!("1e{}", y as i64), true);
    }
    let step = ((x1 - x0) / 10.0).ceil().max(1.0);
    let mut x = x0.ceil();
    while x <= x1 + 1e-9 {
        x_tick(&mut svg, &frame, x, &format!("{}", x as i64));
        x += step;
    }
    axes(&mut svg, &frame, "polynomial degree p", "relative energy error (%)");

    for (i, c) in curves.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let valid: Vec<(f64, f64)> = c
            .points
            .iter()
            .filter(|&&(_, e)| e > 0.0 && e.is_finite())
            .map(|&(p, e)| (frame.px(p), frame.py(e.log10())))
            .collect();
        if valid.len() > 1 {
            let path: Vec<String> = valid.iter().map(|(x, y)| format!("{x:.2},{y:.2}")).collect();
            let _ = writeln!(
                svg,
                "<polyline points=\"{}\" fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\"/>",
                path.join(" ")
            );
        }
        for (x, y) in &valid {
            let _ = writeln!(svg, "<circle cx=\"{x:.2}\" cy=\"{y:.2}\" r=\"3\" fill=\"{color}\"/>");
        }
        let ly = TOP + 10.0 + 20.0 * i as f64;
        let lx = WIDTH - RIGHT + 15.0;
        let _ = writeln!(
            svg,
            "<line x1=\"{lx:.2}\" y1=\"{ly:.2}\" x2=\"{:.2}\" y2=\"{ly:.2}\" stroke=\"{color}\" stroke-width=\"1.5\"/>",
            lx + 20.0
        );
        let _ = writeln!(svg, "<text x=\"{:.2}\" y=\"{:.2}\">{}</text>", lx + 25.0, ly + 4.0, escape(&c.label));
    }
    svg.push_str("</svg>\n");
    svg
}

/// Solution profile: one polyline per element through the interior samples
/// `(element, x, u)` and a dot at each node value `(x, u)`.
pub fn solution_plot(title: &str, samples: &[(usize, f64, f64)], nodes: &[(f64, f64)]) -> String {
    let (mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY);
    for v in samples.iter().map(|s| s.2).chain(nodes.iter().map(|n| n.1)).filter(|v| v.is_finite()) {
        y0 = y0.min(v);
        y1 = y1.max(v);
    }
    if !(y0.is_finite() && y1.is_finite()) {
        (y0, y1) = (0.0, 1.0);
    }
    let pad = if y1 > y0 { 0.05 * (y1 - y0) } else { 1.0 };
    let frame = Frame { x0: 0.0, x1: 1.0, y0: y0 - pad, y1: y1 + pad };

    let mut svg = String::new();
    open(&mut svg, title);
    for k in 0..=5 {
        let x = k as f64 / 5.0;
        x_tick(&mut svg, &frame, x, &format!("{x:.1}"));
    }
    for k in 0..=5 {
        let y = frame.y0 + (frame.y1 - frame.y0) * k as f64 / 5.0;
        y_tick(&mut svg, &frame, y, &format!("{y:.3}"), true);
    }
    axes(&mut svg, &frame, "x", "u");

    let mut start = 0;
    while start < samples.len() {
        let e = samples[start].0;
        let end = samples[start..].iter().position(|s| s.0 != e).map_or(samples.len(), |k| start + k);
        let path: Vec<String> = samples[start..end]
            .iter()
            .filter(|s| s.2.is_finite())
            .map(|s| format!("{:.2},{:.2}", frame.px(s.1), frame.py(s.2)))
            .collect();
        let _ = writeln!(
            svg,
            "<polyline points=\"{}\" fill=\"none\" stroke=\"{}\" stroke-width=\"1.5\"/>",
            path.join(" "),
            PALETTE[0]
        );
        start = end;
    }
    for &(x, u) in nodes {
        let _ = writeln!(
            svg,
            "<circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"3\" fill=\"{}\"/>",
            frame.px(x),
            frame.py(u),
            PALETTE[1]
        );
    }
    svg.push_str("</svg>\n");
    svg
}

#[cfg(test)]
mod tests {
    use super::*;

    fn curves() -> Vec<Curve> {
        vec![
            Curve { label: "a".into(), points: vec![(1.0, 10.0), (2.0, 1.0), (3.0, 0.01)] },
            Curve { label: "b <x>".into(), points: vec![(1.0, 5.0), (2.0, f64::NAN), (3.0, 0.5)] },
        ]
    }

    #[test]
    fn convergence_plot_is_deterministic_and_well_formed() {
        let a = convergence_plot("t", &curves());
        assert_eq!(a, convergence_plot("t", &curves()));
        assert!(a.starts_with("<svg") && a.ends_with("</svg>\n"));
        assert_eq!(a.matches("<polyline").count(), 2);
        assert_eq!(a.matches("<circle").count(), 5);
        assert!(a.contains("1e-2") && a.contains("1e1"));
        assert!(a.contains("b &lt;x&gt;"));
    }

    #[test]
    fn decade_lines_are_evenly_spaced() {
        let svg = convergence_plot("t", &curves()[..1]);
        let f = Frame { x0: 1.0, x1: 3.0, y0: -2.0, y1: 1.0 };
        let gap = f.py(0.0) - f.py(1.0);
        assert!((gap - (f.py(-1.0) - f.py(0.0))).abs() < 1e-12);
        assert!(svg.contains(&format!("y1=\"{:.2}\"", f.py(-2.0))));
    }

    #[test]
    fn empty_plot_still_renders() {
        let svg = convergence_plot("t", &[]);
        assert!(svg.ends_with("</svg>\n"));
    }

    #[test]
    fn solution_plot_has_one_polyline_per_element_and_node_dots() {
        let samples = vec![(0, 0.0, 0.0), (0, 0.5, 1.0), (1, 0.5, 1.0), (1, 1.0, 0.0)];
        let nodes = vec![(0.0, 0.0), (0.5, 1.0), (1.0, 0.0)];
        let svg = solution_plot("u", &samples, &nodes);
        assert_eq!(svg.matches("<polyline").count(), 2);
        assert_eq!(svg.matches("<circle").count(), 3);
    }
}
