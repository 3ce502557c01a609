//! Self-contained SVG overlay of a scene and trajectories.

use std::fmt::Write as _;

use taunav_core::{Scene, Vec2};

const PALETTE: [&str; 6] = ["#c0392b", "#2471a3", "#d35400", "#1abc9c", "#8e44ad", "#7f8c8d"];

fn num(x: f64) -> String {
    let s = format!("{x:.4}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" {
        "0".to_owned()
    } else {
        s.to_owned()
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

/// One `<path>` per trajectory and one `<circle>` per feature. World `y`
/// points up.
pub fn render(scene: &Scene, trajectories: &[(String, Vec<Vec2>)]) -> String {
    let b = &scene.bounds;
    let (w, h) = (b.x_max - b.x_min, b.y_max - b.y_min);
    let scale = 800.0 / w;
    let px = |p: Vec2| ((p.x - b.x_min) * scale, (b.y_max - p.y) * scale);
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{}" height="{}" viewBox="0 0 {} {}">"#,
        num(w * scale),
        num(h * scale),
        num(w * scale),
        num(h * scale)
    );
    let _ = writeln!(out, r#"<title>{}</title>"#, escape(&scene.id));
    let _ = writeln!(out, r##"<rect width="100%" height="100%" fill="#fdfdf8"/>"##);
    let edge = scene.woods_edge_points();
    if !edge.is_empty() {
        let pts: Vec<String> = edge.iter().map(|p| px(*p)).map(|(x, y)| format!("{},{}", num(x), num(y))).collect();
        let _ = writeln!(
            out,
            r##"<polyline class="woods-edge" points="{}" fill="none" stroke="#2e7d32" stroke-width="2" stroke-dasharray="6 4"/>"##,
            pts.join(" ")
        );
    }
    for (i, (name, pts)) in trajectories.iter().enumerate() {
        let mut d = String::new();
        for (j, p) in pts.iter().enumerate() {
            let (x, y) = px(*p);
            let _ = write!(d, "{}{} {}", if j == 0 { "M" } else { " L" }, num(x), num(y));
        }
        let _ = writeln!(
            out,
            r#"<path class="trajectory" data-name="{}" d="{}" fill="none" stroke="{}" stroke-width="1.5"/>"#,
            escape(name),
            d,
            PALETTE[i % PALETTE.len()]
        );
    }
    for f in &scene.features {
        let role = if scene.vine.as_deref() == Some(f.id.as_str()) {
            "vine"
        } else if scene.pole.as_deref() == Some(f.id.as_str()) {
            "pole"
        } else {
            "tree"
        };
        let (x, y) = px(f.pos());
        let _ = writeln!(
            out,
            r##"<circle class="feature {role}" cx="{}" cy="{}" r="4" fill="#333"/><text x="{}" y="{}" font-size="12">{}</text>"##,
            num(x),
            num(y),
            num(x + 6.0),
            num(y - 6.0),
            escape(&f.id)
        );
    }
    out.push_str("</svg>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use taunav_core::{Bounds, Feature};

    #[test]
    fn structure() {
        let scene = Scene {
            id: "a<b".into(),
            features: vec![Feature::new("A", 0.0, 0.0), Feature::new("B", 1.0, 1.0), Feature::new("V", 0.5, -1.0)],
            vine: Some("V".into()),
            pole: None,
            woods_edge: vec!["A".into(), "B".into()],
            bounds: Bounds { x_min: -1.0, y_min: -2.0, x_max: 3.0, y_max: 2.0 },
            exit: None,
        };
        let t = vec![("one".to_owned(), vec![Vec2::new(0.0, 0.0), Vec2::new(1.0, 0.0)])];
        let svg = render(&scene, &t);
        assert_eq!(svg.matches("<path").count(), 1);
        assert_eq!(svg.matches("<circle").count(), 3);
        assert!(svg.contains("a&lt;b"));
        assert!(svg.contains(r#"d="M200 400 L400 400""#));
        assert_eq!(num(-0.00001), "0");
        assert_eq!(num(2.5), "2.5");
    }
}
