use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// Malformed input stream.
    #[error("format error at byte {offset}: {message}")]
    Format { offset: usize, message: String },

    /// Well-formed input that breaks a document invariant.
    #[error("validation error in line {line_id}: {message}")]
    Validation { line_id: String, message: String },

    #[error("index {index} out of range for {len} words")]
    Range { index: usize, len: usize },

    /// Attention matrix column that is neither a distribution nor all zero.
    #[error("attention format error in column {column}: {message}")]
    AttentionColumn { column: usize, message: String },

    #[error("attention format error: {0}")]
    Attention(String),

    #[error("dimension mismatch: expected {expected} rows, found {found}")]
    Dimension { expected: usize, found: usize },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("invalid label: {0}")]
    Label(String),
}

impl Error {
    /// Builds a format error from a serde_json error, translating its
    /// line/column position into a byte offset within `input`.
    pub(crate) fn from_json(input: &[u8], err: &serde_json::Error) -> Self {
        let offset = byte_offset(input, err.line(), err.column());
        Error::Format {
            offset,
            message: err.to_string(),
        }
    }
}

fn byte_offset(input: &[u8], line: usize, column: usize) -> usize {
    if line == 0 {
        return 0;
    }
    let mut current = 1;
    let mut line_start = 0;
    for (i, b) in input.iter().enumerate() {
        if current == line {
            break;
        }
        if *b == b'\n' {
            current += 1;
            line_start = i + 1;
        }
    }
    (line_start + column.saturating_sub(1)).min(input.len())
}
