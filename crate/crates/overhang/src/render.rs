//! SVG drawings of stacks.

use std::fmt::Write;

use overhang_core::balance::{is_balanced, End, Mode};
use overhang_core::model::support_partition;
use overhang_core::{Result, Stack};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RenderSpec {
    /// Pixels per block length.
    pub scale: f64,
    pub show_forces: bool,
    pub show_point_weights: bool,
    /// Support set light, balancing set dark.
    pub shading: bool,
}

impl Default for RenderSpec {
    fn default() -> Self {
        RenderSpec {
            scale: 40.0,
            show_forces: false,
            show_point_weights: true,
            shading: true,
        }
    }
}

/// Longest arrow, in block lengths.
const ARROW: f64 = 1.5;

fn f(v: f64) -> String {
    let s = format!("{v:.3}");
    if s == "-0.000" {
        "0.000".into()
    } else {
        s
    }
}

/// An SVG 1.1 document. Unbalanced stacks get a warning banner; an invalid
/// stack is an error.
pub fn render_svg(stack: &Stack, spec: &RenderSpec) -> Result<String> {
    if !(spec.scale > 0.0) {
        return Err(overhang_core::Error::InvalidParameter("scale must be positive".into()));
    }
    let verdict = is_balanced(stack, Mode::default())?;
    let part = support_partition(stack)?;
    let s = spec.scale;
    let h = stack.height;
    let levels = stack.blocks.iter().map(|b| b.level).max().unwrap_or(0) as f64 + 1.0;
    let xmin = stack.blocks.iter().map(|b| b.x).fold(0.0f64, f64::min) - 1.0;
    let xmax = stack.blocks.iter().map(|b| b.x + 1.0).fold(0.0f64, f64::max) + 0.5;
    let max_w = stack.weights.iter().map(|w| w.magnitude).fold(0.0f64, f64::max);
    let max_f = verdict.witness.iter().map(|v| v.magnitude).fold(0.0f64, f64::max);
    let top_pad = if spec.show_point_weights && max_w > 0.0 { ARROW + 0.5 } else { 0.5 };
    let banner = if verdict.balanced { 0.0 } else { 0.8 };
    let width = (xmax - xmin) * s;
    let height = (levels * h + top_pad + banner + 0.5) * s;
    // model (x, y up) to pixels
    let px = |x: f64| (x - xmin) * s;
    let py = |y: f64| (banner + top_pad + levels * h - y) * s;

    let mut out = String::new();
    let _ = writeln!(out, r##"<?xml version="1.0" encoding="UTF-8"?>"##);
    let _ = writeln!(
        out,
        r##"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{}" height="{}" viewBox="0 0 {} {}">"##,
        f(width),
        f(height),
        f(width),
        f(height)
    );
    let _ = writeln!(
        out,
        r##"<defs><marker id="head" markerWidth="6" markerHeight="6" refX="3" refY="6" orient="auto-start-reverse"><path d="M0,0 L6,0 L3,6 z" fill="black"/></marker></defs>"##
    );
    if let Some(name) = &stack.name {
        let _ = writeln!(out, "<title>{}</title>", escape(name));
    }
    if !verdict.balanced {
        let _ = writeln!(
            out,
            r##"<rect class="warning" x="0" y="0" width="{}" height="{}" fill="#fdd"/>"##,
            f(width),
            f(banner * s)
        );
        let _ = writeln!(
            out,
            r##"<text class="warning" x="{}" y="{}" font-size="{}" fill="#a00">WARNING: stack is not balanced</text>"##,
            f(0.2 * s),
            f(0.55 * s),
            f(0.4 * s)
        );
    }
    let _ = writeln!(
        out,
        r##"<rect class="table" x="{}" y="{}" width="{}" height="{}" fill="#964"/>"##,
        f(px(xmin)),
        f(py(0.0)),
        f(px(0.0) - px(xmin)),
        f(0.5 * s)
    );
    for (i, b) in stack.blocks.iter().enumerate() {
        let (class, fill) = if !spec.shading {
            ("block", "#fff")
        } else if part.support.contains(&i) {
            ("block support", "#ddd")
        } else {
            ("block balancing", "#777")
        };
        let y = b.level as f64 * h;
        let _ = writeln!(
            out,
            r##"<rect class="{class}" x="{}" y="{}" width="{}" height="{}" fill="{fill}" stroke="black" stroke-width="1"/>"##,
            f(px(b.x)),
            f(py(y + h)),
            f(s),
            f(h * s)
        );
    }
    if spec.show_point_weights && max_w > 0.0 {
        for w in &stack.weights {
            let top = (stack.blocks[w.block].level as f64 + 1.0) * h;
            let len = ARROW * w.magnitude / max_w;
            let _ = writeln!(
                out,
                r##"<line class="weight" x1="{}" y1="{}" x2="{}" y2="{}" stroke="black" stroke-width="2" marker-end="url(#head)"/>"##,
                f(px(w.position)),
                f(py(top + len)),
                f(px(w.position)),
                f(py(top))
            );
        }
    }
    if spec.show_forces && verdict.balanced && max_f > 0.0 {
        for v in verdict.witness.iter().filter(|v| v.magnitude > 1e-12) {
            let x = match v.end {
                End::A => v.contact.a,
                End::B => v.contact.b,
            };
            let y = stack.blocks[v.contact.upper].level as f64 * h;
            let len = 0.8 * h * v.magnitude / max_f;
            let _ = writeln!(
                out,
                r##"<line class="force" x1="{}" y1="{}" x2="{}" y2="{}" stroke="#06c" stroke-width="1.5" marker-end="url(#head)"/>"##,
                f(px(x)),
                f(py(y)),
                f(px(x)),
                f(py(y + len))
            );
        }
    }
    out.push_str("</svg>\n");
    Ok(out)
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

#[cfg(test)]
mod tests {
    use super::*;
    use overhang_core::model::{make_harmonic, make_inverted_triangle};
    use overhang_core::PointWeight;

    #[test]
    fn one_rect_per_block() {
        let s = make_harmonic(5).unwrap();
        let svg = render_svg(&s, &RenderSpec::default()).unwrap();
        assert_eq!(svg.matches(r##"class="block"##).count(), 5);
        assert!(!svg.contains("WARNING"));
        assert_eq!(svg, render_svg(&s, &RenderSpec::default()).unwrap());
    }

    #[test]
    fn unbalanced_gets_banner() {
        let s = make_inverted_triangle(3).unwrap();
        let svg = render_svg(&s, &RenderSpec::default()).unwrap();
        assert!(svg.contains("WARNING"));
    }

    #[test]
    fn arrows_per_weight() {
        let s = make_harmonic(2)
            .unwrap()
            .with_weights(vec![PointWeight::new(1, 0.5, 1.0), PointWeight::new(0, -0.2, 0.5)]);
        let spec = RenderSpec {
            show_forces: true,
            ..RenderSpec::default()
        };
        let svg = render_svg(&s, &spec).unwrap();
        assert_eq!(svg.matches(r##"class="weight""##).count(), 2);
    }

    #[test]
    fn bad_scale() {
        let s = make_harmonic(1).unwrap();
        let spec = RenderSpec {
            scale: 0.0,
            ..RenderSpec::default()
        };
        assert!(render_svg(&s, &spec).is_err());
    }
}
