//! Document model: OCR pages, lines and words in reading order, plus the
//! label and entity types that flow through the pipeline.
//!
//! Coordinates are normalized page fractions. Reading order is whatever the
//! OCR file declares: pages in order, lines in file order, words in line
//! order. Nothing here re-sorts lines.

use std::collections::{BTreeSet, HashSet};

use serde::{Deserialize, Serialize};

use crate::geom::PageDims;
use crate::{BBox, Error, Result};

/// Slack allowed when checking that boxes lie inside the page or a line.
pub const BOX_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct Word {
    pub text: String,
    pub bbox: BBox,
    /// Position in document reading order.
    pub index: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Line {
    pub id: String,
    pub bbox: BBox,
    /// First member word (inclusive).
    pub word_start: usize,
    /// Last member word (inclusive).
    pub word_end: usize,
    pub page: usize,
}

impl Line {
    pub fn n_words(&self) -> usize {
        self.word_end - self.word_start + 1
    }

    pub fn contains_word(&self, index: usize) -> bool {
        self.word_start <= index && index <= self.word_end
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Page {
    pub width_px: u32,
    pub height_px: u32,
    pub lines: Vec<Line>,
}

impl Page {
    pub fn dims(&self) -> PageDims {
        PageDims::new(self.width_px, self.height_px)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Document {
    pub doc_id: String,
    pub pages: Vec<Page>,
    pub words: Vec<Word>,
}

// Wire format of the OCR input.

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OcrDocument {
    pub doc_id: String,
    pub pages: Vec<OcrPage>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OcrPage {
    pub width_px: u32,
    pub height_px: u32,
    pub lines: Vec<OcrLine>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OcrLine {
    pub id: String,
    pub bbox: BBox,
    pub words: Vec<OcrWord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OcrWord {
    pub text: String,
    pub bbox: BBox,
}

fn invalid(line_id: &str, message: impl Into<String>) -> Error {
    Error::Validation {
        line_id: line_id.to_string(),
        message: message.into(),
    }
}

impl Document {
    /// Parses and validates an OCR JSON stream.
    pub fn parse(bytes: &[u8]) -> Result<Self> {
        let ocr: OcrDocument =
            serde_json::from_slice(bytes).map_err(|e| Error::from_json(bytes, &e))?;
        Self::from_ocr(ocr)
    }

    pub fn from_ocr(ocr: OcrDocument) -> Result<Self> {
        let mut words = Vec::new();
        let mut pages = Vec::with_capacity(ocr.pages.len());
        let mut seen_ids = HashSet::new();
        for (page_no, page) in ocr.pages.into_iter().enumerate() {
            if page.width_px == 0 || page.height_px == 0 {
                let id = page.lines.first().map_or("<none>", |l| l.id.as_str());
                return Err(invalid(id, format!("page {page_no} has a zero pixel dimension")));
            }
            let mut lines = Vec::with_capacity(page.lines.len());
            for line in page.lines {
                if !seen_ids.insert(line.id.clone()) {
                    return Err(invalid(&line.id, "duplicate line id"));
                }
                line.bbox
                    .check_normalized(BOX_TOL)
                    .map_err(|m| invalid(&line.id, m))?;
                if line.words.is_empty() {
                    return Err(invalid(&line.id, "line has no words"));
                }
                let word_start = words.len();
                for word in line.words {
                    if word.text.is_empty() {
                        return Err(invalid(&line.id, format!("empty word text at index {}", words.len())));
                    }
                    word.bbox
                        .check_normalized(BOX_TOL)
                        .map_err(|m| invalid(&line.id, format!("word {:?}: {m}", word.text)))?;
                    if !line.bbox.contains(&word.bbox, BOX_TOL) {
                        return Err(invalid(
                            &line.id,
                            format!("word {:?} lies outside its line", word.text),
                        ));
                    }
                    let index = words.len();
                    words.push(Word {
                        text: word.text,
                        bbox: word.bbox,
                        index,
                    });
                }
                lines.push(Line {
                    id: line.id,
                    bbox: line.bbox,
                    word_start,
                    word_end: words.len() - 1,
                    page: page_no,
                });
            }
            pages.push(Page {
                width_px: page.width_px,
                height_px: page.height_px,
                lines,
            });
        }
        Ok(Self {
            doc_id: ocr.doc_id,
            pages,
            words,
        })
    }

    pub fn to_ocr(&self) -> OcrDocument {
        OcrDocument {
            doc_id: self.doc_id.clone(),
            pages: self
                .pages
                .iter()
                .map(|p| OcrPage {
                    width_px: p.width_px,
                    height_px: p.height_px,
                    lines: p
                        .lines
                        .iter()
                        .map(|l| OcrLine {
                            id: l.id.clone(),
                            bbox: l.bbox,
                            words: self.line_words(l)
                                .iter()
                                .map(|w| OcrWord {
                                    text: w.text.clone(),
                                    bbox: w.bbox,
                                })
                                .collect(),
                        })
                        .collect(),
                })
                .collect(),
        }
    }

    /// Pretty-printed OCR JSON with a trailing newline.
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(&self.to_ocr()).expect("OCR document serializes");
        s.push('\n');
        s
    }

    pub fn word_count(&self) -> usize {
        self.words.len()
    }

    /// All lines in reading order.
    pub fn lines(&self) -> impl Iterator<Item = &Line> {
        self.pages.iter().flat_map(|p| p.lines.iter())
    }

    pub fn line_by_id(&self, id: &str) -> Option<&Line> {
        self.lines().find(|l| l.id == id)
    }

    pub fn line_words(&self, line: &Line) -> &[Word] {
        &self.words[line.word_start..=line.word_end]
    }

    pub fn line_text(&self, line: &Line) -> String {
        self.line_words(line)
            .iter()
            .map(|w| w.text.as_str())
            .collect::<Vec<_>>()
            .join(" ")
    }

    /// The unique line whose word range contains `word_index`.
    pub fn line_of(&self, word_index: usize) -> Result<&Line> {
        let range = Error::Range {
            index: word_index,
            len: self.words.len(),
        };
        if word_index >= self.words.len() {
            return Err(range);
        }
        for page in &self.pages {
            let Some(last) = page.lines.last() else {
                continue;
            };
            if word_index > last.word_end {
                continue;
            }
            let pos = page.lines.partition_point(|l| l.word_end < word_index);
            return page.lines.get(pos).ok_or(range);
        }
        Err(range)
    }

    /// Word texts for a token list, in the given order.
    pub fn token_texts(&self, tokens: &[usize]) -> Vec<&str> {
        tokens
            .iter()
            .filter_map(|&i| self.words.get(i).map(|w| w.text.as_str()))
            .collect()
    }

    pub fn page_dims(&self, page: usize) -> Option<PageDims> {
        self.pages.get(page).map(Page::dims)
    }
}

/// One entity of an image-level label: type plus free text, no location.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabelEntity {
    #[serde(rename = "type")]
    pub entity_type: String,
    pub text: String,
}

/// Image-level ("inexact") label for one document.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InexactLabel {
    pub doc_id: String,
    pub entities: Vec<LabelEntity>,
}

impl InexactLabel {
    pub fn validate(&self) -> Result<()> {
        if self.entities.is_empty() {
            return Err(Error::Label(format!("document {}: no entities", self.doc_id)));
        }
        for (i, e) in self.entities.iter().enumerate() {
            if e.text.trim().is_empty() {
                return Err(Error::Label(format!(
                    "document {}: entity {i} has empty text",
                    self.doc_id
                )));
            }
        }
        Ok(())
    }

    /// Decoder-side text: all entity texts in label order, space-joined.
    pub fn decoder_text(&self) -> String {
        self.entities
            .iter()
            .map(|e| e.text.trim())
            .collect::<Vec<_>>()
            .join(" ")
    }
}

/// Typed, ordered group of word indices. Order is significant and need not
/// follow reading order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NamedEntity {
    #[serde(rename = "type")]
    pub entity_type: String,
    pub tokens: Vec<usize>,
}

/// Checks that no word index is shared between two entities.
pub fn entities_disjoint(entities: &[NamedEntity]) -> bool {
    let mut seen = BTreeSet::new();
    entities
        .iter()
        .flat_map(|e| e.tokens.iter())
        .all(|t| seen.insert(*t))
}

/// Entity as written to entity JSON files.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EntityRecord {
    #[serde(rename = "type")]
    pub entity_type: String,
    pub text: String,
    pub token_indices: Vec<usize>,
}

/// Entities of one document.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EntityFile {
    pub doc_id: String,
    pub entities: Vec<EntityRecord>,
}

impl EntityFile {
    pub fn from_entities(doc: &Document, entities: &[NamedEntity]) -> Self {
        Self {
            doc_id: doc.doc_id.clone(),
            entities: entities
                .iter()
                .map(|e| EntityRecord {
                    entity_type: e.entity_type.clone(),
                    text: crate::eval::normalize_entity_text(&doc.token_texts(&e.tokens)),
                    token_indices: e.tokens.clone(),
                })
                .collect(),
        }
    }
}

/// Parses either a single JSON object or an array of them.
pub fn parse_one_or_many<T: serde::de::DeserializeOwned>(bytes: &[u8]) -> Result<Vec<T>> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum OneOrMany<T> {
        Many(Vec<T>),
        One(T),
    }
    let parsed: OneOrMany<T> =
        serde_json::from_slice(bytes).map_err(|e| Error::from_json(bytes, &e))?;
    Ok(match parsed {
        OneOrMany::Many(v) => v,
        OneOrMany::One(v) => vec![v],
    })
}
