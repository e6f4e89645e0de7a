//! Static phase-plane SVG: the trajectory over both environments' isoclines.

use lvswitch::envmodel::EnvironmentPair;

const W: f64 = 760.0;
const H: f64 = 640.0;
const MARGIN: f64 = 60.0;

struct Frame {
    x_max: f64,
    y_max: f64,
}

impl Frame {
    fn px(&self, x: f64) -> f64 {
        MARGIN + (W - 2.0 * MARGIN) * (x / self.x_max)
    }

    fn py(&self, y: f64) -> f64 {
        H - MARGIN - (H - 2.0 * MARGIN) * (y / self.y_max)
    }
}

fn clip_line(frame: &Frame, x_int: f64, y_int: f64) -> Option<(f64, f64, f64, f64)> {
    // Segment of the line x/x_int + y/y_int = 1 inside the frame box.
    let mut pts = Vec::new();
    if x_int <= frame.x_max {
        pts.push((x_int, 0.0));
    } else {
        pts.push((frame.x_max, y_int * (1.0 - frame.x_max / x_int)));
    }
    if y_int <= frame.y_max {
        pts.push((0.0, y_int));
    } else {
        pts.push((x_int * (1.0 - frame.y_max / y_int), frame.y_max));
    }
    (pts.len() == 2).then(|| (pts[0].0, pts[0].1, pts[1].0, pts[1].1))
}

/// Renders the sampled abundances over the four isoclines (per environment:
/// the x-equation null line and the y-equation null line).
pub fn phase_plane(pair: &EnvironmentPair, points: &[(f64, f64)]) -> String {
    let data_max = points
        .iter()
        .fold(0.0f64, |m, &(x, y)| m.max(x).max(y));
    let iso_max = [
        pair.env0.carrying_x(),
        pair.env1.carrying_x(),
        pair.env0.carrying_y(),
        pair.env1.carrying_y(),
    ]
    .into_iter()
    .fold(0.0f64, f64::max);
    let lim = 1.15 * data_max.max(iso_max).max(1e-9);
    let frame = Frame {
        x_max: lim,
        y_max: lim,
    };

    let mut svg = String::new();
    svg.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{W}\" height=\"{H}\" \
         viewBox=\"0 0 {W} {H}\">\n<rect width=\"{W}\" height=\"{H}\" fill=\"white\"/>\n"
    ));

    // Axes with a handful of ticks.
    svg.push_str(&format!(
        "<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"black\"/>\n",
        frame.px(0.0),
        frame.py(0.0),
        frame.px(frame.x_max),
        frame.py(0.0)
    ));
    svg.push_str(&format!(
        "<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"black\"/>\n",
        frame.px(0.0),
        frame.py(0.0),
        frame.px(0.0),
        frame.py(frame.y_max)
    ));
    for k in 1..=4 {
        let v = lim * f64::from(k) / 4.0;
        svg.push_str(&format!(
            "<line x1=\"{0}\" y1=\"{1}\" x2=\"{0}\" y2=\"{2}\" stroke=\"black\"/>\n\
             <text x=\"{0}\" y=\"{3}\" font-size=\"12\" text-anchor=\"middle\">{4:.2}</text>\n",
            frame.px(v),
            frame.py(0.0) - 4.0,
            frame.py(0.0) + 4.0,
            frame.py(0.0) + 18.0,
            v
        ));
        svg.push_str(&format!(
            "<line x1=\"{1}\" y1=\"{0}\" x2=\"{2}\" y2=\"{0}\" stroke=\"black\"/>\n\
             <text x=\"{3}\" y=\"{0}\" font-size=\"12\" text-anchor=\"end\">{4:.2}</text>\n",
            frame.py(v),
            frame.px(0.0) - 4.0,
            frame.px(0.0) + 4.0,
            frame.px(0.0) - 8.0,
            v
        ));
    }
    svg.push_str(&format!(
        "<text x=\"{}\" y=\"{}\" font-size=\"14\">x</text>\n\
         <text x=\"{}\" y=\"{}\" font-size=\"14\">y</text>\n",
        frame.px(frame.x_max) + 10.0,
        frame.py(0.0) + 4.0,
        frame.px(0.0) - 10.0,
        frame.py(frame.y_max) - 10.0
    ));

    // Isoclines: solid for the x equation, dashed for the y equation.
    for (env, color) in [(&pair.env0, "#c0392b"), (&pair.env1, "#2471a3")] {
        for (x_int, y_int, dash) in [
            (1.0 / env.a(), 1.0 / env.b(), "none"),
            (1.0 / env.c(), 1.0 / env.d(), "6,4"),
        ] {
            if let Some((x1, y1, x2, y2)) = clip_line(&frame, x_int, y_int) {
                svg.push_str(&format!(
                    "<line x1=\"{:.2}\" y1=\"{:.2}\" x2=\"{:.2}\" y2=\"{:.2}\" \
                     stroke=\"{}\" stroke-width=\"1.5\" stroke-dasharray=\"{}\"/>\n",
                    frame.px(x1),
                    frame.py(y1),
                    frame.px(x2),
                    frame.py(y2),
                    color,
                    dash
                ));
            }
        }
    }

    // Trajectory polyline, thinned to keep files small.
    let stride = (points.len() / 4000).max(1);
    let path: Vec<String> = points
        .iter()
        .step_by(stride)
        .map(|&(x, y)| format!("{:.2},{:.2}", frame.px(x), frame.py(y)))
        .collect();
    svg.push_str(&format!(
        "<polyline points=\"{}\" fill=\"none\" stroke=\"#1c2833\" stroke-width=\"0.8\"/>\n",
        path.join(" ")
    ));
    if let Some(&(x, y)) = points.first() {
        svg.push_str(&format!(
            "<circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"4\" fill=\"#27ae60\"/>\n",
            frame.px(x),
            frame.py(y)
        ));
    }
    svg.push_str("</svg>\n");
    svg
}
