//! Rule-based grouping of detected paragraph objects into entities.
//!
//! Each object is bound to the OCR lines it covers and tagged as major
//! (more than five lines) and/or designation (its text has the standalone
//! word "for"). Columns come from cutting the page along the x axis only.
//! Objects are read column-major; within a column every minor joins the
//! nearest open major, and a major closes once it is, or absorbs, a
//! designation object.

use std::cmp::Ordering;
use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::coco::PageDetection;
use crate::geom::{PageDims, Rect};
use crate::model::{Document, NamedEntity};
use crate::pseudo::{suppress_overlaps, DEFAULT_CATEGORY};
use crate::text::contains_word;
use crate::{BBox, Scalar};

/// Objects with more lines than this are majors.
pub const MAJOR_MIN_LINES: usize = 5;
/// Minimum share of a line's area a box must cover for the line to attach.
pub const ATTACH_MIN_COVERAGE: f64 = 0.5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PostprocConfig {
    /// Detections scoring below this are dropped.
    pub min_confidence: f64,
    /// Drop objects whose text mentions "pro se".
    pub exclude_pro_se: bool,
    pub category: String,
}

impl Default for PostprocConfig {
    fn default() -> Self {
        Self {
            min_confidence: 0.5,
            exclude_pro_se: false,
            category: DEFAULT_CATEGORY.to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectedObject {
    /// Normalized page fractions.
    pub bbox: BBox,
    pub category: String,
    pub confidence: f64,
    pub page: usize,
    /// Attached lines in document line order.
    pub member_lines: Vec<String>,
    pub is_major: bool,
    pub is_designation: bool,
    pub column_index: usize,
}

impl DetectedObject {
    pub fn new(bbox: BBox, category: impl Into<String>, confidence: f64, page: usize) -> Self {
        Self {
            bbox,
            category: category.into(),
            confidence,
            page,
            member_lines: Vec::new(),
            is_major: false,
            is_designation: false,
            column_index: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EntityGroup {
    pub objects: Vec<DetectedObject>,
    /// Set once the group's major is or absorbs a designation object.
    pub closed: bool,
}

/// Lines of `page` covered by `bbox` over at least half of their own area,
/// in document line order.
pub fn attach_lines(doc: &Document, page: usize, bbox: &BBox) -> Vec<String> {
    doc.pages
        .get(page)
        .map(|p| {
            p.lines
                .iter()
                .filter(|l| {
                    let area = l.bbox.area();
                    area > 0.0 && bbox.intersection_area(&l.bbox) >= ATTACH_MIN_COVERAGE * area
                })
                .map(|l| l.id.clone())
                .collect()
        })
        .unwrap_or_default()
}

pub fn object_text(doc: &Document, obj: &DetectedObject) -> String {
    obj.member_lines
        .iter()
        .filter_map(|id| doc.line_by_id(id))
        .map(|l| doc.line_text(l))
        .collect::<Vec<_>>()
        .join(" ")
}

pub fn is_designation_text(text: &str) -> bool {
    contains_word(text, "for")
}

/// Whether the text contains the phrase "pro se" as two consecutive words.
pub fn mentions_pro_se(text: &str) -> bool {
    let words: Vec<String> = text
        .split(|c: char| !c.is_alphabetic())
        .filter(|w| !w.is_empty())
        .map(str::to_lowercase)
        .collect();
    words.windows(2).any(|w| w[0] == "pro" && w[1] == "se")
}

/// Sets `is_major` and `is_designation` from the attached lines.
pub fn classify(obj: &DetectedObject, doc: &Document) -> DetectedObject {
    let mut out = obj.clone();
    out.is_major = obj.member_lines.len() > MAJOR_MIN_LINES;
    out.is_designation = is_designation_text(&object_text(doc, obj));
    out
}

/// Column index per span: connected components of overlapping (or
/// touching) closed x-intervals, numbered left to right.
pub fn column_indices<T: Scalar>(spans: &[(T, T)]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..spans.len()).collect();
    order.sort_by(|&a, &b| {
        spans[a]
            .0
            .partial_cmp(&spans[b].0)
            .unwrap_or(Ordering::Equal)
            .then(a.cmp(&b))
    });
    let mut out = vec![0; spans.len()];
    let mut column = 0;
    let mut reach: Option<T> = None;
    for i in order {
        let (x0, x1) = spans[i];
        match reach {
            Some(r) if x0 <= r => reach = Some(r.max(x1)),
            Some(_) => {
                column += 1;
                reach = Some(x1);
            }
            None => reach = Some(x1),
        }
        out[i] = column;
    }
    out
}

/// Assigns `column_index` by cutting along the x axis.
pub fn x_cut(objects: &[DetectedObject]) -> Vec<DetectedObject> {
    let spans: Vec<(f64, f64)> = objects.iter().map(|o| (o.bbox.x, o.bbox.right())).collect();
    let cols = column_indices(&spans);
    objects
        .iter()
        .zip(cols)
        .map(|(o, c)| DetectedObject {
            column_index: c,
            ..o.clone()
        })
        .collect()
}

/// Column first, then top to bottom, then left to right.
pub fn column_major_sort(objects: &[DetectedObject]) -> Vec<DetectedObject> {
    let mut out = objects.to_vec();
    out.sort_by(|a, b| {
        a.column_index
            .cmp(&b.column_index)
            .then(a.bbox.y.total_cmp(&b.bbox.y))
            .then(a.bbox.x.total_cmp(&b.bbox.x))
    });
    out
}

/// Groups column-major sorted objects into entity groups.
pub fn group(sorted: &[DetectedObject]) -> Vec<EntityGroup> {
    let n = sorted.len();
    let mut open: Vec<bool> = sorted.iter().map(|o| o.is_major && !o.is_designation).collect();
    let mut owner: Vec<usize> = (0..n).collect();
    for i in 0..n {
        let minor = &sorted[i];
        if minor.is_major {
            continue;
        }
        let nearest = (0..n)
            .filter(|&m| open[m] && sorted[m].column_index == minor.column_index)
            .min_by(|&a, &b| {
                let key = |m: usize| {
                    let r: &Rect<f64> = &sorted[m].bbox;
                    (r.vertical_gap(&minor.bbox), r.horizontal_gap(&minor.bbox), m > i, m)
                };
                let (ka, kb) = (key(a), key(b));
                ka.0.total_cmp(&kb.0)
                    .then(ka.1.total_cmp(&kb.1))
                    .then(ka.2.cmp(&kb.2))
                    .then(ka.3.cmp(&kb.3))
            });
        if let Some(m) = nearest {
            owner[i] = m;
            if minor.is_designation {
                open[m] = false;
            }
        }
    }
    let mut slots: Vec<Option<usize>> = vec![None; n];
    let mut groups: Vec<(Vec<usize>, usize)> = Vec::new();
    for (i, &root) in owner.iter().enumerate() {
        let slot = *slots[root].get_or_insert_with(|| {
            groups.push((Vec::new(), root));
            groups.len() - 1
        });
        groups[slot].0.push(i);
    }
    groups
        .into_iter()
        .map(|(members, root)| EntityGroup {
            closed: if sorted[root].is_major {
                !open[root]
            } else {
                sorted[root].is_designation
            },
            objects: members.into_iter().map(|i| sorted[i].clone()).collect(),
        })
        .collect()
}

/// One entity per non-empty group. Tokens follow group order, then each
/// object's lines, then reading order within a line. A word already claimed
/// by an earlier group is skipped.
pub fn emit_entities(groups: &[EntityGroup], doc: &Document, category: &str) -> Vec<NamedEntity> {
    let mut claimed = BTreeSet::new();
    let mut out = Vec::new();
    for g in groups {
        let mut tokens = Vec::new();
        for obj in &g.objects {
            for id in &obj.member_lines {
                let Some(line) = doc.line_by_id(id) else {
                    continue;
                };
                for w in line.word_start..=line.word_end {
                    if claimed.insert(w) {
                        tokens.push(w);
                    }
                }
            }
        }
        if !tokens.is_empty() {
            out.push(NamedEntity {
                entity_type: category.to_string(),
                tokens,
            });
        }
    }
    out
}

/// Full post-processing of one page's detections (pixel boxes).
pub fn postprocess_page(
    doc: &Document,
    page: usize,
    dims: PageDims,
    detections: &[PageDetection],
    cfg: &PostprocConfig,
) -> Vec<NamedEntity> {
    let kept: Vec<(Rect<f64>, &PageDetection)> = detections
        .iter()
        .filter(|d| d.category == cfg.category && d.confidence >= cfg.min_confidence)
        .map(|d| (d.bbox, d))
        .collect();
    let objects: Vec<DetectedObject> = suppress_overlaps(&kept)
        .into_iter()
        .map(|(px, d)| {
            let mut obj = DetectedObject::new(px.to_normalized(dims), &d.category, d.confidence, page);
            obj.member_lines = attach_lines(doc, page, &obj.bbox);
            classify(&obj, doc)
        })
        .filter(|o| !(cfg.exclude_pro_se && mentions_pro_se(&object_text(doc, o))))
        .collect();
    let sorted = column_major_sort(&x_cut(&objects));
    emit_entities(&group(&sorted), doc, &cfg.category)
}
