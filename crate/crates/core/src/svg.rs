//! SVG rendering of a configuration inside the square `[-1,1]^2`.

use std::fmt::Write as _;

use crate::geometry::{ConfigElement, Configuration};

const SIZE: f64 = 800.0;
const PAD: f64 = 20.0;

fn px(x: f64) -> f64 {
    PAD + (x + 1.0) / 2.0 * SIZE
}

fn py(y: f64) -> f64 {
    PAD + (1.0 - y) / 2.0 * SIZE
}

/// The part of an element's line inside the square, as `(x0, y0, x1, y1)`.
pub fn clip_line(e: &ConfigElement) -> Option<(f64, f64, f64, f64)> {
    let (mut lo, mut hi) = (-1.0f64, 1.0f64);
    if e.theta != 0.0 {
        let a = e.x + (-1.0 - e.y) / e.theta;
        let b = e.x + (1.0 - e.y) / e.theta;
        lo = lo.max(a.min(b));
        hi = hi.min(a.max(b));
    } else if e.y.abs() > 1.0 {
        return None;
    }
    (lo <= hi).then(|| (lo, e.line_at(lo), hi, e.line_at(hi)))
}

/// One marker and one clipped segment per element, plus translucent bands of
/// vertical half-width `strip` when `strip > 0`.
pub fn render_svg(config: &Configuration, strip: f64) -> String {
    let n = config.len().max(1) as f64;
    let radius = (6.0 / n.sqrt()).clamp(0.6, 4.0);
    let stroke = (1.5 / n.sqrt()).clamp(0.15, 1.0);
    let total = SIZE + 2.0 * PAD;
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{total}" height="{total}" viewBox="0 0 {total} {total}">"#
    );
    let _ = writeln!(
        s,
        r#"<defs><clipPath id="frame"><rect x="{PAD}" y="{PAD}" width="{SIZE}" height="{SIZE}"/></clipPath></defs>"#
    );
    let _ = writeln!(
        s,
        r#"<rect x="{PAD}" y="{PAD}" width="{SIZE}" height="{SIZE}" fill="white" stroke="black" stroke-width="1"/>"#
    );
    if strip > 0.0 {
        let _ = writeln!(s, r##"<g clip-path="url(#frame)" fill="#1f77b4" fill-opacity="0.12">"##);
        for e in config.elements() {
            let (l, r) = (e.line_at(-1.0), e.line_at(1.0));
            let _ = writeln!(
                s,
                r#"<polygon points="{:.3},{:.3} {:.3},{:.3} {:.3},{:.3} {:.3},{:.3}"/>"#,
                px(-1.0),
                py(l + strip),
                px(1.0),
                py(r + strip),
                px(1.0),
                py(r - strip),
                px(-1.0),
                py(l - strip)
            );
        }
        let _ = writeln!(s, "</g>");
    }
    let _ = writeln!(s, r##"<g stroke="#444" stroke-width="{stroke:.3}">"##);
    for e in config.elements() {
        // Every element's point lies in the square, so the clip is nonempty.
        let (x0, y0, x1, y1) = clip_line(e).unwrap_or((e.x, e.y, e.x, e.y));
        let _ = writeln!(
            s,
            r#"<line x1="{:.3}" y1="{:.3}" x2="{:.3}" y2="{:.3}"/>"#,
            px(x0),
            py(y0),
            px(x1),
            py(y1)
        );
    }
    let _ = writeln!(s, "</g>");
    let _ = writeln!(s, r##"<g fill="#d62728">"##);
    for e in config.elements() {
        let _ = writeln!(
            s,
            r#"<circle cx="{:.3}" cy="{:.3}" r="{radius:.3}"/>"#,
            px(e.x),
            py(e.y)
        );
    }
    let _ = writeln!(s, "</g>");
    s.push_str("</svg>\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::trivial_configuration;

    #[test]
    fn counts_match_elements() {
        let t = trivial_configuration(7).unwrap();
        let svg = render_svg(&t, 0.0);
        assert_eq!(svg.matches("<circle").count(), 7);
        assert_eq!(svg.matches("<line ").count(), 7);
        assert_eq!(svg.matches("<polygon").count(), 0);
        let banded = render_svg(&t, 0.05);
        assert_eq!(banded.matches("<polygon").count(), 7);
    }

    #[test]
    fn clipping() {
        let flat = clip_line(&ConfigElement::new(0.2, 0.3, 0.0)).unwrap();
        assert_eq!(flat, (-1.0, 0.3, 1.0, 0.3));
        let steep = clip_line(&ConfigElement::new(1.0, 1.0, 1.0)).unwrap();
        assert_eq!(steep, (-1.0, -1.0, 1.0, 1.0));
        let corner = clip_line(&ConfigElement::new(0.5, 0.9, 1.0)).unwrap();
        assert!((corner.2 - 0.6).abs() < 1e-12 && (corner.3 - 1.0).abs() < 1e-12);
    }
}
