//! Reading inputs and writing outputs atomically.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::de::DeserializeOwned;
use serde::Serialize;
use weaklayout::model::parse_one_or_many;
use weaklayout::{Document, InexactLabel};

pub fn read(path: &Path) -> Result<Vec<u8>> {
    std::fs::read(path).with_context(|| format!("cannot read {}", path.display()))
}

/// JSON files in a directory (sorted by name), or the path itself.
pub fn json_inputs(path: &Path) -> Result<Vec<PathBuf>> {
    if !path.is_dir() {
        return Ok(vec![path.to_path_buf()]);
    }
    let mut files: Vec<PathBuf> = std::fs::read_dir(path)
        .with_context(|| format!("cannot list {}", path.display()))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .collect();
    files.sort();
    Ok(files)
}

/// OCR documents from a file or a directory of files, ordered by doc_id.
pub fn load_documents(path: &Path) -> Result<Vec<Document>> {
    let mut docs: BTreeMap<String, Document> = BTreeMap::new();
    for file in json_inputs(path)? {
        let doc = Document::parse(&read(&file)?).with_context(|| format!("invalid OCR document {}", file.display()))?;
        if docs.contains_key(&doc.doc_id) {
            bail!("duplicate doc_id {} in {}", doc.doc_id, file.display());
        }
        docs.insert(doc.doc_id.clone(), doc);
    }
    if docs.is_empty() {
        bail!("no OCR documents found in {}", path.display());
    }
    Ok(docs.into_values().collect())
}

/// Records of type `T` from a file (one object or an array) or a directory.
pub fn load_many<T: DeserializeOwned>(path: &Path, what: &str) -> Result<Vec<T>> {
    let mut out = Vec::new();
    for file in json_inputs(path)? {
        let items: Vec<T> =
            parse_one_or_many(&read(&file)?).with_context(|| format!("invalid {what} file {}", file.display()))?;
        out.extend(items);
    }
    Ok(out)
}

pub fn load_labels(path: &Path) -> Result<BTreeMap<String, InexactLabel>> {
    let mut map = BTreeMap::new();
    for label in load_many::<InexactLabel>(path, "label")? {
        label.validate().with_context(|| format!("invalid label in {}", path.display()))?;
        if map.contains_key(&label.doc_id) {
            bail!("duplicate label for {} in {}", label.doc_id, path.display());
        }
        map.insert(label.doc_id.clone(), label);
    }
    Ok(map)
}

/// Writes through a temporary file in the target directory, then renames.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
        _ => PathBuf::from("."),
    };
    std::fs::create_dir_all(&dir).with_context(|| format!("cannot create {}", dir.display()))?;
    let mut tmp = tempfile::NamedTempFile::new_in(&dir).with_context(|| format!("cannot write {}", path.display()))?;
    tmp.write_all(bytes).with_context(|| format!("cannot write {}", path.display()))?;
    tmp.persist(path).with_context(|| format!("cannot write {}", path.display()))?;
    log::info!("wrote {}", path.display());
    Ok(())
}

pub fn to_pretty<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("value serializes");
    s.push('\n');
    s
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    write_atomic(path, to_pretty(value).as_bytes())
}

/// Attention file for a document inside an attention directory, binary
/// form preferred.
pub fn attention_path(dir: &Path, doc_id: &str) -> Result<PathBuf> {
    let bin = dir.join(format!("{doc_id}.attn"));
    if bin.exists() {
        return Ok(bin);
    }
    let json = dir.join(format!("{doc_id}.attn.json"));
    if json.exists() {
        return Ok(json);
    }
    bail!("no attention matrix for {doc_id} in {}", dir.display())
}
