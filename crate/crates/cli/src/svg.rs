//! Band diagram on a horizontal `s` axis: shaded bands, hatched gaps,
//! ticks for poles `δₙ` (above the axis) and silent points `αₙ` (below).

use homog_core::limit::BandStructure;
use std::fmt::Write;

const WIDTH: f64 = 900.0;
const LEFT: f64 = 40.0;
const RIGHT: f64 = 20.0;
const AXIS_Y: f64 = 80.0;

pub fn band_diagram(b: &BandStructure) -> String {
    let top = b
        .delta
        .iter()
        .chain(&b.alpha)
        .chain(b.gamma.last())
        .fold(1.0f64, |m, &x| m.max(x))
        * 1.05;
    let x = |s: f64| LEFT + (WIDTH - LEFT - RIGHT) * s / top;
    let mut o = String::new();
    let _ = writeln!(
        o,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="140" viewBox="0 0 {WIDTH} 140">"#
    );
    o.push_str(
        r##"<defs><pattern id="hatch" width="6" height="6" patternUnits="userSpaceOnUse" patternTransform="rotate(45)"><line x1="0" y1="0" x2="0" y2="6" stroke="#c0392b" stroke-width="1.5"/></pattern></defs>
"##,
    );
    for g in &b.gaps {
        let _ = writeln!(
            o,
            r#"<rect class="gap" x="{:.3}" y="{:.3}" width="{:.3}" height="30" fill="url(#hatch)"/>"#,
            x(g[0]),
            AXIS_Y - 15.0,
            (x(g[1]) - x(g[0])).max(0.5)
        );
    }
    for band in &b.bands {
        let _ = writeln!(
            o,
            r##"<rect class="band" x="{:.3}" y="{:.3}" width="{:.3}" height="30" fill="#2e86c1" fill-opacity="0.5"/>"##,
            x(band[0]),
            AXIS_Y - 15.0,
            (x(band[1]) - x(band[0])).max(0.5)
        );
    }
    for p in b.points.iter().flatten() {
        let _ = writeln!(
            o,
            r##"<line class="point" x1="{0:.3}" y1="{1:.3}" x2="{0:.3}" y2="{2:.3}" stroke="#1b4f72" stroke-width="0.8"/>"##,
            x(*p),
            AXIS_Y - 15.0,
            AXIS_Y + 15.0
        );
    }
    let _ = writeln!(
        o,
        r#"<line x1="{LEFT}" y1="{AXIS_Y}" x2="{:.3}" y2="{AXIS_Y}" stroke="black"/>"#,
        WIDTH - RIGHT
    );
    for d in &b.delta {
        let _ = writeln!(
            o,
            r##"<line class="delta" x1="{0:.3}" y1="{1:.3}" x2="{0:.3}" y2="{2:.3}" stroke="#c0392b" stroke-width="1.5"/>"##,
            x(*d),
            AXIS_Y - 30.0,
            AXIS_Y
        );
    }
    for a in &b.alpha {
        let _ = writeln!(
            o,
            r##"<line class="alpha" x1="{0:.3}" y1="{1:.3}" x2="{0:.3}" y2="{2:.3}" stroke="#27ae60" stroke-width="1.5"/>"##,
            x(*a),
            AXIS_Y,
            AXIS_Y + 30.0
        );
    }
    let ticks = 5;
    for i in 0..=ticks {
        let s = top * i as f64 / ticks as f64;
        let _ = writeln!(
            o,
            r#"<text x="{:.3}" y="{:.3}" font-size="11" text-anchor="middle">{:.2}</text>"#,
            x(s),
            AXIS_Y + 48.0,
            s
        );
    }
    let _ = writeln!(o, r#"<text x="{LEFT}" y="20" font-size="12">s</text>"#);
    o.push_str("</svg>\n");
    o
}
