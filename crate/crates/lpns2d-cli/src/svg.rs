//! Minimal vector plot writer. Write-only: nothing reads these back, and
//! nothing outside the standard library is involved.

pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
}

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 440.0;
const LEFT: f64 = 78.0;
const RIGHT: f64 = 24.0;
const TOP: f64 = 46.0;
const BOTTOM: f64 = 54.0;
const COLORS: [&str; 4] = ["#1f6fb2", "#b23a1f", "#3a9a46", "#7a4fb2"];

fn tick_label(v: f64) -> String {
    let a = v.abs();
    if a == 0.0 || (0.01..10000.0).contains(&a) {
        format!("{v:.3}")
    } else {
        format!("{v:.2e}")
    }
}

/// A log axis drops nonpositive points rather than failing; callers plot
/// magnitudes of quantities that are positive when meaningful.
pub fn line_plot(
    title: &str,
    xlabel: &str,
    ylabel: &str,
    logx: bool,
    logy: bool,
    series: &[Series],
) -> String {
    let tx = |x: f64| if logx { x.log10() } else { x };
    let ty = |y: f64| if logy { y.log10() } else { y };
    let usable = |v: f64, log: bool| v.is_finite() && (!log || v > 0.0);

    let mut xmin = f64::INFINITY;
    let mut xmax = f64::NEG_INFINITY;
    let mut ymin = f64::INFINITY;
    let mut ymax = f64::NEG_INFINITY;
    for s in series {
        for &(x, y) in &s.points {
            if usable(x, logx) && usable(y, logy) {
                xmin = xmin.min(tx(x));
                xmax = xmax.max(tx(x));
                ymin = ymin.min(ty(y));
                ymax = ymax.max(ty(y));
            }
        }
    }
    if !xmin.is_finite() {
        xmin = 0.0;
        xmax = 1.0;
        ymin = 0.0;
        ymax = 1.0;
    }
    if xmax - xmin < 1e-300 {
        xmin -= 0.5;
        xmax += 0.5;
    }
    if ymax - ymin < 1e-300 {
        ymin -= 0.5;
        ymax += 0.5;
    }

    let px = |x: f64| LEFT + (x - xmin) / (xmax - xmin) * (WIDTH - LEFT - RIGHT);
    let py = |y: f64| HEIGHT - BOTTOM - (y - ymin) / (ymax - ymin) * (HEIGHT - TOP - BOTTOM);

    let mut svg = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" \
         viewBox=\"0 0 {WIDTH} {HEIGHT}\" font-family=\"monospace\" font-size=\"12\">\n\
         <rect width=\"{WIDTH}\" height=\"{HEIGHT}\" fill=\"white\"/>\n\
         <text x=\"{:.1}\" y=\"24\" text-anchor=\"middle\" font-size=\"14\">{}</text>\n",
        WIDTH / 2.0,
        escape(title),
    );
    svg.push_str(&format!(
        "<rect x=\"{LEFT}\" y=\"{TOP}\" width=\"{:.1}\" height=\"{:.1}\" fill=\"none\" \
         stroke=\"#444\"/>\n",
        WIDTH - LEFT - RIGHT,
        HEIGHT - TOP - BOTTOM,
    ));

    for i in 0..=4 {
        let f = i as f64 / 4.0;
        let xv = xmin + f * (xmax - xmin);
        let yv = ymin + f * (ymax - ymin);
        let xr = if logx { 10f64.powf(xv) } else { xv };
        let yr = if logy { 10f64.powf(yv) } else { yv };
        svg.push_str(&format!(
            "<line x1=\"{0:.1}\" y1=\"{1:.1}\" x2=\"{0:.1}\" y2=\"{2:.1}\" stroke=\"#444\"/>\n\
             <text x=\"{0:.1}\" y=\"{3:.1}\" text-anchor=\"middle\">{4}</text>\n",
            px(xv),
            HEIGHT - BOTTOM,
            HEIGHT - BOTTOM + 6.0,
            HEIGHT - BOTTOM + 20.0,
            tick_label(xr),
        ));
        svg.push_str(&format!(
            "<line x1=\"{1:.1}\" y1=\"{0:.1}\" x2=\"{2:.1}\" y2=\"{0:.1}\" stroke=\"#444\"/>\n\
             <text x=\"{3:.1}\" y=\"{4:.1}\" text-anchor=\"end\">{5}</text>\n",
            py(yv),
            LEFT - 6.0,
            LEFT,
            LEFT - 9.0,
            py(yv) + 4.0,
            tick_label(yr),
        ));
    }
    svg.push_str(&format!(
        "<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"middle\">{}</text>\n",
        LEFT + (WIDTH - LEFT - RIGHT) / 2.0,
        HEIGHT - 12.0,
        escape(xlabel),
    ));
    svg.push_str(&format!(
        "<text x=\"16\" y=\"{:.1}\" text-anchor=\"middle\" transform=\"rotate(-90 16 {:.1})\">{}</text>\n",
        TOP + (HEIGHT - TOP - BOTTOM) / 2.0,
        TOP + (HEIGHT - TOP - BOTTOM) / 2.0,
        escape(ylabel),
    ));

    for (i, s) in series.iter().enumerate() {
        let color = COLORS[i % COLORS.len()];
        let mut path = String::new();
        for &(x, y) in &s.points {
            if usable(x, logx) && usable(y, logy) {
                path.push_str(&format!("{:.2},{:.2} ", px(tx(x)), py(ty(y))));
            }
        }
        svg.push_str(&format!(
            "<polyline points=\"{}\" fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\"/>\n",
            path.trim_end(),
        ));
        let ly = TOP + 16.0 + 16.0 * i as f64;
        svg.push_str(&format!(
            "<line x1=\"{0:.1}\" y1=\"{ly:.1}\" x2=\"{1:.1}\" y2=\"{ly:.1}\" stroke=\"{color}\" \
             stroke-width=\"1.5\"/>\n\
             <text x=\"{2:.1}\" y=\"{3:.1}\">{4}</text>\n",
            WIDTH - RIGHT - 150.0,
            WIDTH - RIGHT - 126.0,
            WIDTH - RIGHT - 120.0,
            ly + 4.0,
            escape(&s.label),
        ));
    }
    svg.push_str("</svg>\n");
    svg
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
