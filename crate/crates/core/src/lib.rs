//! Weakly supervised pseudo-label generation for document layout analysis.
//!
//! The crate turns OCR output plus image-level entity texts ("inexact"
//! labels) into object-level paragraph boxes, then groups detected paragraph
//! objects back into discontinuous named entities and scores them.
//!
//! Stages, in pipeline order:
//!
//! - [`model`]: OCR documents, lines, words and entities.
//! - [`segment`]: morphology-style paragraph segmentation of line boxes.
//! - [`attention`]: attention matrices, the deterministic token aligner and
//!   line activity.
//! - [`pseudo`]: paragraph selection, overlap suppression and COCO export.
//! - [`postproc`]: column detection, column-major ordering and entity grouping.
//! - [`eval`]: exact-match P/R/F1 and word-level edit distance.
//! - [`synth`]: seeded synthetic caption pages with ground truth.
//! - [`render`]: SVG overlays for visual inspection.
//!
//! Geometry and scoring are generic over [`Scalar`]; the aliases below fix
//! the concrete types used by the document model.

pub mod attention;
pub mod coco;
pub mod error;
pub mod eval;
pub mod geom;
pub mod model;
pub mod pipeline;
pub mod postproc;
pub mod pseudo;
pub mod render;
pub mod scalar;
pub mod segment;
pub mod synth;
pub mod text;

pub use error::{Error, Result};
pub use scalar::Scalar;

/// Normalized page-fraction box used by the document model.
pub type BBox = geom::Rect<f64>;
/// Single-precision box, for callers working in f32.
pub type BBox32 = geom::Rect<f32>;
/// Attention scores as stored on disk (32-bit floats).
pub type AttentionMatrix = attention::ScoreMatrix<f32>;
/// Double-precision score matrix.
pub type AttentionMatrix64 = attention::ScoreMatrix<f64>;
/// Line scores computed from an on-disk attention matrix.
pub type LineScore = attention::LineScore<f32>;

pub use attention::{active_lines, align_tokens, line_scores, load_attention, ActivationMode};
pub use model::{Document, InexactLabel, Line, NamedEntity, Page, Word};
pub use segment::{HaltReason, ParagraphRoi, SegConfig};
