//! COCO-style object detection files for pseudo labels and detector output.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::geom::{PageDims, Rect};
use crate::pseudo::PseudoLabelSet;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CocoImage {
    pub id: u64,
    pub file_name: String,
    pub width: u32,
    pub height: u32,
    /// Source document, so predictions can be bound back to OCR lines.
    pub doc_id: String,
    pub page: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CocoAnnotation {
    pub id: u64,
    pub image_id: u64,
    pub category_id: u64,
    /// `[x, y, w, h]` in pixels.
    pub bbox: [f64; 4],
    pub iscrowd: u8,
    /// Detector confidence; absent on pseudo labels.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub score: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CocoCategory {
    pub id: u64,
    pub name: String,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct CocoDataset {
    pub images: Vec<CocoImage>,
    pub annotations: Vec<CocoAnnotation>,
    pub categories: Vec<CocoCategory>,
}

/// A detection bound to a document page, in pixels.
#[derive(Debug, Clone, PartialEq)]
pub struct PageDetection {
    pub bbox: Rect<f64>,
    pub category: String,
    pub confidence: f64,
}

pub fn image_file_name(doc_id: &str, page: usize) -> String {
    format!("{doc_id}_p{page}.png")
}

impl CocoDataset {
    /// Builds a dataset from pseudo-label sets. Images are ordered by
    /// (doc_id, page) and categories by name, so the output does not depend
    /// on the order the sets were produced in.
    pub fn from_pseudo(sets: &[PseudoLabelSet]) -> Self {
        let mut ordered: Vec<&PseudoLabelSet> = sets.iter().collect();
        ordered.sort_by(|a, b| a.doc_id.cmp(&b.doc_id).then(a.page.cmp(&b.page)));
        let names: std::collections::BTreeSet<&str> = ordered
            .iter()
            .flat_map(|s| s.boxes.iter().map(|b| b.category.as_str()))
            .collect();
        let categories: Vec<CocoCategory> = names
            .iter()
            .enumerate()
            .map(|(i, n)| CocoCategory {
                id: i as u64 + 1,
                name: n.to_string(),
            })
            .collect();
        let cat_id: BTreeMap<&str, u64> = categories.iter().map(|c| (c.name.as_str(), c.id)).collect();
        let mut ds = CocoDataset {
            categories: categories.clone(),
            ..Default::default()
        };
        for (i, set) in ordered.iter().enumerate() {
            let image_id = i as u64 + 1;
            ds.images.push(CocoImage {
                id: image_id,
                file_name: image_file_name(&set.doc_id, set.page),
                width: set.width_px,
                height: set.height_px,
                doc_id: set.doc_id.clone(),
                page: set.page,
            });
            for b in &set.boxes {
                ds.annotations.push(CocoAnnotation {
                    id: ds.annotations.len() as u64 + 1,
                    image_id,
                    category_id: cat_id[b.category.as_str()],
                    bbox: [b.bbox.x, b.bbox.y, b.bbox.w, b.bbox.h],
                    iscrowd: 0,
                    score: None,
                });
            }
        }
        ds
    }

    pub fn parse(bytes: &[u8]) -> Result<Self> {
        let ds: CocoDataset = serde_json::from_slice(bytes).map_err(|e| Error::from_json(bytes, &e))?;
        ds.validate()?;
        Ok(ds)
    }

    pub fn validate(&self) -> Result<()> {
        let images: std::collections::HashSet<u64> = self.images.iter().map(|i| i.id).collect();
        let cats: std::collections::HashSet<u64> = self.categories.iter().map(|c| c.id).collect();
        for a in &self.annotations {
            if !images.contains(&a.image_id) {
                return Err(Error::Config(format!(
                    "annotation {} references unknown image {}",
                    a.id, a.image_id
                )));
            }
            if !cats.contains(&a.category_id) {
                return Err(Error::Config(format!(
                    "annotation {} references unknown category {}",
                    a.id, a.category_id
                )));
            }
            if a.bbox[2] <= 0.0 || a.bbox[3] <= 0.0 {
                return Err(Error::Config(format!("annotation {} has an empty box", a.id)));
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("COCO dataset serializes");
        s.push('\n');
        s
    }

    /// Detections grouped by (doc_id, page), with page dimensions.
    pub fn detections_by_page(&self) -> BTreeMap<(String, usize), (PageDims, Vec<PageDetection>)> {
        let cat: BTreeMap<u64, &str> = self.categories.iter().map(|c| (c.id, c.name.as_str())).collect();
        let mut out: BTreeMap<(String, usize), (PageDims, Vec<PageDetection>)> = BTreeMap::new();
        let mut by_image = BTreeMap::new();
        for img in &self.images {
            by_image.insert(img.id, img);
            out.entry((img.doc_id.clone(), img.page))
                .or_insert_with(|| (PageDims::new(img.width, img.height), Vec::new()));
        }
        for a in &self.annotations {
            let Some(img) = by_image.get(&a.image_id) else {
                continue;
            };
            let entry = out.get_mut(&(img.doc_id.clone(), img.page)).expect("image registered");
            entry.1.push(PageDetection {
                bbox: Rect::new(a.bbox[0], a.bbox[1], a.bbox[2], a.bbox[3]),
                category: cat.get(&a.category_id).copied().unwrap_or_default().to_string(),
                confidence: a.score.unwrap_or(1.0),
            });
        }
        out
    }
}
