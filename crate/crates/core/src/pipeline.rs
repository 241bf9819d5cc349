//! Stage wiring shared by the library callers and the CLI.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::attention::{active_lines, align_tokens, line_scores, ActivationMode, ScoreMatrix};
use crate::coco::{CocoDataset, PageDetection};
use crate::model::{Document, EntityFile, InexactLabel, NamedEntity};
use crate::postproc::{postprocess_page, PostprocConfig};
use crate::pseudo::{emit_pseudo, select_rois, PseudoConfig, PseudoLabelSet};
use crate::segment::{segment, PageSegmentation, SegConfig};
use crate::{Error, Result, Scalar};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AlignConfig {
    /// Minimum token similarity for a document word to be a candidate.
    pub sim_threshold: f64,
    /// Line activity threshold (strict).
    pub psi: f64,
    pub activation_mode: ActivationMode,
}

impl Default for AlignConfig {
    fn default() -> Self {
        Self {
            sim_threshold: 0.8,
            psi: 0.1,
            activation_mode: ActivationMode::Sum,
        }
    }
}

impl AlignConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.sim_threshold > 0.0 && self.sim_threshold <= 1.0) {
            return Err(Error::Config(format!(
                "sim_threshold must lie in (0, 1], got {}",
                self.sim_threshold
            )));
        }
        if self.psi.is_nan() || self.psi < 0.0 {
            return Err(Error::Config(format!("psi must be non-negative, got {}", self.psi)));
        }
        Ok(())
    }
}

/// Every stage's configuration, as read from a JSON config file.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub segmenter: SegConfig,
    pub aligner: AlignConfig,
    pub pseudo: PseudoConfig,
    pub postproc: PostprocConfig,
}

impl PipelineConfig {
    pub fn parse(bytes: &[u8]) -> Result<Self> {
        let cfg: Self = serde_json::from_slice(bytes).map_err(|e| Error::from_json(bytes, &e))?;
        cfg.aligner.validate()?;
        if !(0.0..=1.0).contains(&cfg.postproc.min_confidence) {
            return Err(Error::Config(format!(
                "min_confidence must lie in [0, 1], got {}",
                cfg.postproc.min_confidence
            )));
        }
        Ok(cfg)
    }
}

/// Segments every page of a document.
pub fn segment_document(doc: &Document, cfg: &SegConfig) -> Vec<PageSegmentation> {
    doc.pages
        .iter()
        .enumerate()
        .map(|(i, p)| {
            let mut seg = segment(&p.lines, cfg, p.dims());
            seg.page = i;
            for r in &mut seg.rois {
                r.page = i;
            }
            seg
        })
        .collect()
}

/// Aligns the label's decoder text against the document.
pub fn align_document(doc: &Document, label: &InexactLabel, cfg: &AlignConfig) -> Result<ScoreMatrix<f32>> {
    cfg.validate()?;
    label.validate()?;
    if label.doc_id != doc.doc_id {
        return Err(Error::Label(format!(
            "label for {} does not match document {}",
            label.doc_id, doc.doc_id
        )));
    }
    Ok(align_tokens(doc, &label.decoder_text(), cfg.sim_threshold))
}

/// Active lines from an attention matrix.
pub fn active_line_ids<T: Scalar>(doc: &Document, attention: &ScoreMatrix<T>, cfg: &AlignConfig) -> Result<BTreeSet<String>> {
    let scores = line_scores(attention, doc)?;
    Ok(active_lines(&scores, T::c(cfg.psi), cfg.activation_mode))
}

/// Region selection and pseudo-label emission for every page.
pub fn pseudo_label_document<T: Scalar>(
    doc: &Document,
    segmentation: &[PageSegmentation],
    attention: &ScoreMatrix<T>,
    align: &AlignConfig,
    cfg: &PseudoConfig,
) -> Result<Vec<PseudoLabelSet>> {
    let active = active_line_ids(doc, attention, align)?;
    Ok(segmentation
        .iter()
        .map(|seg| {
            let selected = select_rois(&seg.rois, &active, cfg.phi);
            emit_pseudo(doc, seg.page, &selected, &cfg.category)
        })
        .collect())
}

/// segment, align and pseudo-label one document.
pub fn run_document(doc: &Document, label: &InexactLabel, cfg: &PipelineConfig) -> Result<Vec<PseudoLabelSet>> {
    let segmentation = segment_document(doc, &cfg.segmenter);
    let attention = align_document(doc, label, &cfg.aligner)?;
    pseudo_label_document(doc, &segmentation, &attention, &cfg.aligner, &cfg.pseudo)
}

/// Groups the detections of every page of `doc` into entities.
pub fn postprocess_document(doc: &Document, predictions: &CocoDataset, cfg: &PostprocConfig) -> Vec<NamedEntity> {
    let pages = predictions.detections_by_page();
    let mut out = Vec::new();
    for (page, p) in doc.pages.iter().enumerate() {
        let empty: Vec<PageDetection> = Vec::new();
        let dets = pages
            .get(&(doc.doc_id.clone(), page))
            .map_or(&empty, |(_, d)| d);
        out.extend(postprocess_page(doc, page, p.dims(), dets, cfg));
    }
    out
}

pub fn entity_file(doc: &Document, entities: &[NamedEntity]) -> EntityFile {
    EntityFile::from_entities(doc, entities)
}
