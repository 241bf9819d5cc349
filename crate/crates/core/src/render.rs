//! SVG overlays of box sets on top of a document's word boxes.

use std::fmt::Write;

use crate::model::Document;
use crate::BBox;

const WORD_STROKE: &str = "#c8c8c8";

/// Named set of boxes drawn in one color.
#[derive(Debug, Clone, PartialEq)]
pub struct BoxSet {
    pub name: String,
    pub color: String,
    /// (page, normalized box)
    pub boxes: Vec<(usize, BBox)>,
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

fn fmt(v: f64) -> String {
    let r = (v * 100.0).round() / 100.0;
    if r == r.trunc() {
        format!("{}", r as i64)
    } else {
        format!("{r}")
    }
}

/// One SVG document per page, sized to the page in pixels.
pub fn render_overlay(doc: &Document, sets: &[BoxSet]) -> Vec<String> {
    doc.pages
        .iter()
        .enumerate()
        .map(|(page_no, page)| {
            let dims = page.dims();
            let mut svg = String::new();
            let _ = writeln!(
                svg,
                r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#,
                w = page.width_px,
                h = page.height_px
            );
            let _ = writeln!(svg, r#"<rect x="0" y="0" width="{}" height="{}" fill="white"/>"#, page.width_px, page.height_px);
            let _ = writeln!(svg, r#"<g id="words" fill="none" stroke="{WORD_STROKE}" stroke-width="1">"#);
            for line in &page.lines {
                for w in doc.line_words(line) {
                    let p = w.bbox.to_pixels(dims);
                    let _ = writeln!(
                        svg,
                        r#"<rect x="{}" y="{}" width="{}" height="{}"/>"#,
                        fmt(p.x),
                        fmt(p.y),
                        fmt(p.w),
                        fmt(p.h)
                    );
                }
            }
            svg.push_str("</g>\n");
            for (k, set) in sets.iter().enumerate() {
                let _ = writeln!(
                    svg,
                    r#"<g id="set-{k}" data-name="{}" fill="none" stroke="{}" stroke-width="3">"#,
                    escape(&set.name),
                    escape(&set.color)
                );
                for (_, b) in set.boxes.iter().filter(|(p, _)| *p == page_no) {
                    let p = b.to_pixels(dims);
                    let _ = writeln!(
                        svg,
                        r#"<rect x="{}" y="{}" width="{}" height="{}"/>"#,
                        fmt(p.x),
                        fmt(p.y),
                        fmt(p.w),
                        fmt(p.h)
                    );
                }
                svg.push_str("</g>\n");
            }
            if !sets.is_empty() {
                svg.push_str("<g id=\"legend\" font-family=\"sans-serif\" font-size=\"14\">\n");
                for (k, set) in sets.iter().enumerate() {
                    let y = 20 + 20 * k;
                    let _ = writeln!(
                        svg,
                        r#"<rect x="10" y="{}" width="14" height="14" fill="{c}" stroke="{c}"/><text x="30" y="{}">{}</text>"#,
                        y - 12,
                        y,
                        escape(&set.name),
                        c = escape(&set.color)
                    );
                }
                svg.push_str("</g>\n");
            }
            svg.push_str("</svg>\n");
            svg
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::Rect;
    use crate::model::{OcrDocument, OcrLine, OcrPage, OcrWord};

    fn doc() -> Document {
        Document::from_ocr(OcrDocument {
            doc_id: "d".into(),
            pages: vec![OcrPage {
                width_px: 200,
                height_px: 100,
                lines: vec![OcrLine {
                    id: "L0".into(),
                    bbox: Rect::new(0.1, 0.1, 0.5, 0.2),
                    words: vec![OcrWord {
                        text: "w".into(),
                        bbox: Rect::new(0.1, 0.1, 0.5, 0.2),
                    }],
                }],
            }],
        })
        .unwrap()
    }

    #[test]
    fn words_only_without_sets() {
        let svg = &render_overlay(&doc(), &[])[0];
        assert!(svg.contains(r#"width="200" height="100""#));
        assert!(svg.contains(r#"<rect x="20" y="10" width="100" height="20"/>"#));
        assert!(!svg.contains("legend"));
    }

    #[test]
    fn full_page_box() {
        let set = BoxSet {
            name: "gold <gt>".into(),
            color: "green".into(),
            boxes: vec![(0, Rect::new(0.0, 0.0, 1.0, 1.0))],
        };
        let svg = &render_overlay(&doc(), &[set])[0];
        assert!(svg.contains(r#"stroke="green""#));
        assert!(svg.contains(r#"<rect x="0" y="0" width="200" height="100"/>"#));
        assert!(svg.contains("gold &lt;gt&gt;"));
    }
}
