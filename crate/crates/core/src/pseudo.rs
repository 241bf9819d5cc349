//! Paragraph selection and object-level pseudo labels.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::geom::Rect;
use crate::model::Document;
use crate::segment::{components, ParagraphRoi};
use crate::Scalar;

pub const DEFAULT_CATEGORY: &str = "attorney_profile";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PseudoConfig {
    /// A region is kept when it has strictly more active lines than this.
    pub phi: usize,
    pub category: String,
}

impl Default for PseudoConfig {
    fn default() -> Self {
        Self {
            phi: 1,
            category: DEFAULT_CATEGORY.to_string(),
        }
    }
}

/// Regions with more than `phi` active member lines, in input order.
pub fn select_rois(rois: &[ParagraphRoi], active: &BTreeSet<String>, phi: usize) -> Vec<ParagraphRoi> {
    rois.iter()
        .filter(|r| r.members.intersection(active).count() > phi)
        .cloned()
        .collect()
}

/// Keeps one box per connected component of positively overlapping boxes:
/// the one with the largest area, ties going to the earlier box. Survivors
/// keep their input order.
pub fn suppress_overlaps<T: Scalar, C: Clone>(boxes: &[(Rect<T>, C)]) -> Vec<(Rect<T>, C)> {
    let groups = components(boxes.len(), |i, j| boxes[i].0.overlaps(&boxes[j].0));
    let mut keep: Vec<usize> = groups
        .iter()
        .map(|g| {
            // Members are ascending, so a strict comparison keeps the earliest on ties.
            g.iter().copied().fold(g[0], |best, i| {
                if boxes[i].0.area() > boxes[best].0.area() {
                    i
                } else {
                    best
                }
            })
        })
        .collect();
    keep.sort_unstable();
    keep.into_iter().map(|i| boxes[i].clone()).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PseudoBox {
    /// Pixel coordinates.
    pub bbox: Rect<f64>,
    pub category: String,
    pub source: String,
}

/// Pseudo labels for one page.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PseudoLabelSet {
    pub doc_id: String,
    pub page: usize,
    pub width_px: u32,
    pub height_px: u32,
    pub boxes: Vec<PseudoBox>,
}

fn round3(v: f64) -> f64 {
    (v * 1000.0).round() / 1000.0
}

/// Converts selected regions of one page to pixel boxes and removes overlaps.
pub fn emit_pseudo(doc: &Document, page: usize, selected: &[ParagraphRoi], category: &str) -> PseudoLabelSet {
    let dims = doc.page_dims(page).expect("page exists in document");
    let boxes: Vec<(Rect<f64>, String)> = selected
        .iter()
        .map(|r| {
            let p = r.bbox.to_pixels(dims);
            (
                Rect::new(round3(p.x), round3(p.y), round3(p.w), round3(p.h)),
                category.to_string(),
            )
        })
        .collect();
    PseudoLabelSet {
        doc_id: doc.doc_id.clone(),
        page,
        width_px: dims.width_px,
        height_px: dims.height_px,
        boxes: suppress_overlaps(&boxes)
            .into_iter()
            .map(|(bbox, category)| PseudoBox {
                bbox,
                category,
                source: "pseudo".to_string(),
            })
            .collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{OcrDocument, OcrLine, OcrPage, OcrWord};

    fn roi(ids: &[&str], bbox: Rect<f64>) -> ParagraphRoi {
        ParagraphRoi {
            bbox,
            members: ids.iter().map(|s| s.to_string()).collect(),
            page: 0,
        }
    }

    fn unit() -> Rect<f64> {
        Rect::new(0.1, 0.1, 0.1, 0.1)
    }

    #[test]
    fn strictly_more_than_phi() {
        let active: BTreeSet<String> = ["a", "b", "c"].iter().map(|s| s.to_string()).collect();
        let one = roi(&["a", "x"], unit());
        let two = roi(&["b", "c", "y"], unit());
        let sel = select_rois(&[one.clone(), two.clone()], &active, 1);
        assert_eq!(sel, vec![two.clone()]);
        assert_eq!(select_rois(&[one.clone(), two.clone()], &active, 0).len(), 2);
        assert!(select_rois(&[one, two], &active, 2).is_empty());
    }

    #[test]
    fn disjoint_boxes_survive() {
        let boxes = vec![(Rect::new(0.0, 0.0, 0.1, 0.1), 'a'), (Rect::new(0.5, 0.5, 0.1, 0.1), 'b')];
        assert_eq!(suppress_overlaps(&boxes), boxes);
    }

    #[test]
    fn largest_overlapping_box_survives() {
        let a = (Rect::new(0.0, 0.0, 0.2, 0.1), "A"); // area 0.02
        let b = (Rect::new(0.1, 0.05, 0.1, 0.1), "B"); // area 0.01
        assert_eq!(suppress_overlaps(&[b, a]), vec![a]);
    }

    #[test]
    fn equal_areas_keep_the_earlier_box() {
        let a = (Rect::new(0.0, 0.0, 0.2, 0.2), 1);
        let b = (Rect::new(0.1, 0.1, 0.2, 0.2), 2);
        assert_eq!(suppress_overlaps(&[a, b]), vec![a]);
    }

    #[test]
    fn touching_boxes_do_not_suppress_each_other() {
        let a = (Rect::new(0.0, 0.0, 0.5, 0.5), 1);
        let b = (Rect::new(0.5, 0.0, 0.25, 0.5), 2);
        assert_eq!(suppress_overlaps(&[a, b]).len(), 2);
    }

    #[test]
    fn single_precision_suppression() {
        let a: (Rect<f32>, u8) = (Rect::new(0.0, 0.0, 0.5, 0.5), 1);
        let b: (Rect<f32>, u8) = (Rect::new(0.25, 0.25, 0.5, 0.6), 2);
        assert_eq!(suppress_overlaps(&[a, b]), vec![b]);
    }

    fn one_line_doc() -> Document {
        Document::from_ocr(OcrDocument {
            doc_id: "d".into(),
            pages: vec![OcrPage {
                width_px: 1000,
                height_px: 800,
                lines: vec![OcrLine {
                    id: "L0".into(),
                    bbox: Rect::new(0.1, 0.1, 0.2, 0.1),
                    words: vec![OcrWord {
                        text: "w".into(),
                        bbox: Rect::new(0.1, 0.1, 0.2, 0.1),
                    }],
                }],
            }],
        })
        .unwrap()
    }

    #[test]
    fn emit_empty_and_single() {
        let doc = one_line_doc();
        assert!(emit_pseudo(&doc, 0, &[], "c").boxes.is_empty());
        let set = emit_pseudo(&doc, 0, &[roi(&["L0"], Rect::new(0.1, 0.1, 0.2, 0.1))], "c");
        assert_eq!(set.boxes.len(), 1);
        assert_eq!(set.boxes[0].bbox, Rect::new(100.0, 80.0, 200.0, 80.0));
        assert_eq!(set.boxes[0].source, "pseudo");
        assert_eq!((set.width_px, set.height_px), (1000, 800));
    }
}
