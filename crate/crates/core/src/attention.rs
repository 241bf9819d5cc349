//! Encoder × decoder attention scores, the deterministic token aligner that
//! stands in for a copy-attention model, and line-level activity.
//!
//! Rows are encoder steps (document words in reading order), columns are
//! decoder steps (label tokens). A column is either a distribution over
//! words or all zero, the latter marking a generated, not copied, token.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::model::Document;
use crate::text::{normalize_token, similarity_chars};
use crate::{Error, Result, Scalar};

pub const ATTN_MAGIC: &[u8; 6] = b"ATTN1\n";
/// Allowed deviation of a non-zero column sum from 1.
pub const COLUMN_SUM_TOL: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq)]
pub struct ScoreMatrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct JsonMatrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Scalar> ScoreMatrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![T::zero(); rows * cols],
        }
    }

    /// Builds a validated matrix from row-major data.
    pub fn from_row_major(rows: usize, cols: usize, data: Vec<T>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::Attention(format!(
                "expected {} scores for {rows}x{cols}, found {}",
                rows * cols,
                data.len()
            )));
        }
        let m = Self { rows, cols, data };
        m.validate()?;
        Ok(m)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn data(&self) -> &[T] {
        &self.data
    }

    pub fn get(&self, row: usize, col: usize) -> T {
        self.data[row * self.cols + col]
    }

    pub fn row(&self, row: usize) -> &[T] {
        &self.data[row * self.cols..(row + 1) * self.cols]
    }

    pub fn column_sum(&self, col: usize) -> T {
        (0..self.rows).map(|r| self.get(r, col)).sum()
    }

    pub fn total(&self) -> T {
        self.data.iter().copied().sum()
    }

    fn set_one_hot(&mut self, row: usize, col: usize) {
        for r in 0..self.rows {
            self.data[r * self.cols + col] = T::zero();
        }
        self.data[row * self.cols + col] = T::one();
    }

    /// Scores are finite and non-negative; every column sums to 1 within
    /// tolerance or to exactly 0.
    pub fn validate(&self) -> Result<()> {
        for (k, v) in self.data.iter().enumerate() {
            if !v.is_finite() || *v < T::zero() {
                return Err(Error::AttentionColumn {
                    column: k % self.cols.max(1),
                    message: format!("invalid score {v} at row {}", k / self.cols.max(1)),
                });
            }
        }
        for col in 0..self.cols {
            let sum = self.column_sum(col).to_f64_lossy();
            if sum != 0.0 && (sum - 1.0).abs() > COLUMN_SUM_TOL {
                return Err(Error::AttentionColumn {
                    column: col,
                    message: format!("column sums to {sum}, expected 1 or 0"),
                });
            }
        }
        Ok(())
    }

    pub fn cast<U: Scalar>(&self) -> ScoreMatrix<U> {
        ScoreMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|v| U::c(v.to_f64_lossy())).collect(),
        }
    }

    /// Binary ATTN form: magic, little-endian u32 rows and cols, then
    /// row-major little-endian f32 scores.
    pub fn to_binary(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(ATTN_MAGIC.len() + 8 + 4 * self.data.len());
        out.extend_from_slice(ATTN_MAGIC);
        out.extend_from_slice(&(self.rows as u32).to_le_bytes());
        out.extend_from_slice(&(self.cols as u32).to_le_bytes());
        for v in &self.data {
            out.extend_from_slice(&(v.to_f64_lossy() as f32).to_le_bytes());
        }
        out
    }

    pub fn to_json(&self) -> String {
        let data: Vec<f32> = self.data.iter().map(|v| v.to_f64_lossy() as f32).collect();
        let mut s = serde_json::to_string(&JsonMatrix {
            rows: self.rows,
            cols: self.cols,
            data,
        })
        .expect("matrix serializes");
        s.push('\n');
        s
    }

    fn from_binary(bytes: &[u8]) -> Result<Self> {
        let header = ATTN_MAGIC.len() + 8;
        if bytes.len() < header {
            return Err(Error::Format {
                offset: bytes.len(),
                message: "truncated ATTN header".into(),
            });
        }
        let u32_at = |off: usize| u32::from_le_bytes(bytes[off..off + 4].try_into().unwrap());
        let rows = u32_at(6) as usize;
        let cols = u32_at(10) as usize;
        let expected = header + 4 * rows * cols;
        if bytes.len() != expected {
            return Err(Error::Format {
                offset: bytes.len().min(expected),
                message: format!(
                    "ATTN payload for {rows}x{cols} needs {expected} bytes, found {}",
                    bytes.len()
                ),
            });
        }
        let data = bytes[header..]
            .chunks_exact(4)
            .map(|c| T::c(f64::from(f32::from_le_bytes(c.try_into().unwrap()))))
            .collect();
        Self::from_row_major(rows, cols, data)
    }

    fn from_json_bytes(bytes: &[u8]) -> Result<Self> {
        let m: JsonMatrix<f64> =
            serde_json::from_slice(bytes).map_err(|e| Error::from_json(bytes, &e))?;
        Self::from_row_major(m.rows, m.cols, m.data.into_iter().map(T::c).collect())
    }
}

/// Reads an attention matrix in binary or JSON form and checks its row
/// count against the document it belongs to.
pub fn load_attention<T: Scalar>(bytes: &[u8], expected_rows: usize) -> Result<ScoreMatrix<T>> {
    let matrix = if bytes.starts_with(ATTN_MAGIC) {
        ScoreMatrix::from_binary(bytes)?
    } else {
        let first = bytes.iter().find(|b| !b.is_ascii_whitespace());
        if first != Some(&b'{') {
            return Err(Error::Format {
                offset: 0,
                message: "missing ATTN1 magic and not a JSON object".into(),
            });
        }
        ScoreMatrix::from_json_bytes(bytes)?
    };
    if matrix.rows != expected_rows {
        return Err(Error::Dimension {
            expected: expected_rows,
            found: matrix.rows,
        });
    }
    Ok(matrix)
}

/// Maps each whitespace token of `label_text` to at most one document word.
///
/// Candidates are words whose similarity to the token reaches
/// `sim_threshold`. The candidate nearest (by reading-order index) to the
/// previously matched word wins, ties going to the smaller index; the
/// search anchor starts at word 0. Unmatched tokens give all-zero columns.
pub fn align_tokens(doc: &Document, label_text: &str, sim_threshold: f64) -> ScoreMatrix<f32> {
    align_tokens_as(doc, label_text, sim_threshold)
}

pub fn align_tokens_as<T: Scalar>(doc: &Document, label_text: &str, sim_threshold: f64) -> ScoreMatrix<T> {
    let words: Vec<Vec<char>> = doc
        .words
        .iter()
        .map(|w| normalize_token(&w.text).chars().collect())
        .collect();
    let tokens: Vec<&str> = label_text.split_whitespace().collect();
    let mut matrix = ScoreMatrix::zeros(words.len(), tokens.len());
    let mut anchor = 0usize;
    for (col, token) in tokens.iter().enumerate() {
        let token: Vec<char> = normalize_token(token).chars().collect();
        let best = words
            .iter()
            .enumerate()
            .filter(|(_, w)| similarity_chars(&token, w) >= sim_threshold)
            .min_by_key(|(i, _)| (i.abs_diff(anchor), *i))
            .map(|(i, _)| i);
        if let Some(row) = best {
            matrix.set_one_hot(row, col);
            anchor = row;
        }
    }
    matrix
}

/// How a line's per-step masses are turned into activity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ActivationMode {
    /// Sum over all decoder steps, then divide by the word count.
    #[default]
    Sum,
    /// Active when any single decoder step exceeds the threshold.
    Any,
}

/// Attention aggregated over the words of one line.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LineScore<T> {
    pub line_id: String,
    /// Total attention received by the line's words over all decoder steps.
    pub mass: T,
    pub n_words: usize,
    /// `mass / n_words`.
    pub normalized: T,
    /// Largest single-step line mass divided by `n_words`.
    pub peak: T,
}

pub fn line_scores<T: Scalar>(matrix: &ScoreMatrix<T>, doc: &Document) -> Result<Vec<LineScore<T>>> {
    if matrix.rows() != doc.word_count() {
        return Err(Error::Dimension {
            expected: doc.word_count(),
            found: matrix.rows(),
        });
    }
    Ok(doc
        .lines()
        .map(|line| {
            let n = T::from_count(line.n_words());
            let mut per_step = vec![T::zero(); matrix.cols()];
            for r in line.word_start..=line.word_end {
                for (acc, v) in per_step.iter_mut().zip(matrix.row(r)) {
                    *acc = *acc + *v;
                }
            }
            let mass: T = per_step.iter().copied().sum();
            let peak = per_step.iter().copied().fold(T::zero(), T::max);
            LineScore {
                line_id: line.id.clone(),
                mass,
                n_words: line.n_words(),
                normalized: mass / n,
                peak: peak / n,
            }
        })
        .collect())
}

/// Ids of lines whose score strictly exceeds `psi`.
pub fn active_lines<T: Scalar>(scores: &[LineScore<T>], psi: T, mode: ActivationMode) -> BTreeSet<String> {
    scores
        .iter()
        .filter(|s| match mode {
            ActivationMode::Sum => s.normalized > psi,
            ActivationMode::Any => s.peak > psi,
        })
        .map(|s| s.line_id.clone())
        .collect()
}
