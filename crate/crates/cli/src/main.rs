mod io;

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use weaklayout::attention::ScoreMatrix;
use weaklayout::coco::CocoDataset;
use weaklayout::eval::evaluate;
use weaklayout::model::EntityFile;
use weaklayout::pipeline::{
    align_document, entity_file, postprocess_document, pseudo_label_document, segment_document, PipelineConfig,
};
use weaklayout::render::{render_overlay, BoxSet};
use weaklayout::segment::PageSegmentation;
use weaklayout::synth::{generate, SynthConfig};
use weaklayout::{load_attention, ActivationMode, BBox, Document, InexactLabel, SegConfig};

#[derive(Parser)]
#[command(name = "weaklayout", version, about = "Weakly supervised layout labeling for attorney profiles")]
struct Cli {
    /// JSON config with `segmenter`, `aligner`, `pseudo` and `postproc` sections.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Worker threads for per-document work.
    #[arg(long, global = true, default_value_t = 1)]
    jobs: usize,
    /// Log progress to stderr (-v info, -vv debug).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Split pages into paragraph regions.
    Segment {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        seg: SegFlags,
    },
    /// Align inexact labels against documents and write attention matrices.
    Align {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        labels: PathBuf,
        /// Output directory, one matrix per document.
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_enum, default_value_t = AttnFormat::Binary)]
        format: AttnFormat,
        #[command(flatten)]
        align: AlignFlags,
    },
    /// Select regions with enough attention and write COCO pseudo labels.
    Pseudo {
        #[arg(long = "in")]
        input: PathBuf,
        /// Output of `segment`.
        #[arg(long)]
        segments: PathBuf,
        /// Directory of attention matrices named by doc_id.
        #[arg(long)]
        attention: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        align: AlignFlags,
        #[command(flatten)]
        pseudo: PseudoFlags,
    },
    /// segment, align and pseudo in one pass.
    Pipeline {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        labels: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        seg: SegFlags,
        #[command(flatten)]
        align: AlignFlags,
        #[command(flatten)]
        pseudo: PseudoFlags,
    },
    /// Group detections into entities.
    Postprocess {
        #[arg(long = "in")]
        input: PathBuf,
        /// COCO detections (pseudo labels or detector output with scores).
        #[arg(long)]
        pred: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        post: PostFlags,
    },
    /// Score predicted entities against gold.
    Eval {
        #[arg(long)]
        pred: PathBuf,
        #[arg(long)]
        gold: PathBuf,
        #[arg(long)]
        ignore_case: bool,
        /// Also write the report as JSON.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Generate a synthetic corpus.
    Synth {
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 10)]
        n: u64,
        /// Seed of the first document; later documents count up.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 2)]
        columns: u8,
        #[arg(long, default_value_t = 2)]
        profiles: u8,
        #[arg(long, default_value_t = 0.0)]
        noise: f64,
        #[arg(long)]
        no_scramble: bool,
        #[arg(long, default_value_t = 0.8)]
        sim_threshold: f64,
    },
    /// Draw box sets over word boxes as SVG, one file per page.
    Render {
        #[arg(long = "in")]
        input: PathBuf,
        /// NAME=COLOR=PATH of a COCO file; repeatable.
        #[arg(long = "boxes")]
        boxes: Vec<String>,
        /// NAME=COLOR=PATH of an entity file, drawn as per-page entity extents; repeatable.
        #[arg(long = "entities")]
        entities: Vec<String>,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum AttnFormat {
    Binary,
    Json,
}

#[derive(Args, Default)]
struct SegFlags {
    #[arg(long)]
    kernel_w: Option<u32>,
    #[arg(long)]
    kernel_h: Option<u32>,
    #[arg(long)]
    patience: Option<u32>,
    #[arg(long)]
    min_aggregation_ratio: Option<f64>,
    #[arg(long)]
    max_iterations: Option<u32>,
}

#[derive(Args, Default)]
struct AlignFlags {
    #[arg(long)]
    sim_threshold: Option<f64>,
    #[arg(long)]
    psi: Option<f64>,
    #[arg(long, value_enum)]
    activation_mode: Option<Mode>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Sum,
    Any,
}

#[derive(Args, Default)]
struct PseudoFlags {
    #[arg(long)]
    phi: Option<usize>,
    #[arg(long)]
    category: Option<String>,
}

#[derive(Args, Default)]
struct PostFlags {
    #[arg(long)]
    min_confidence: Option<f64>,
    #[arg(long)]
    exclude_pro_se: bool,
    #[arg(long)]
    category: Option<String>,
}

/// Segmentation of one document as written by `segment`.
#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct DocSegmentation {
    doc_id: String,
    pages: Vec<PageSegmentation>,
}

#[derive(Serialize)]
struct ManifestEntry {
    doc_id: String,
    ocr: String,
    gold: String,
    label: String,
    attention: String,
    words: usize,
}

#[derive(Serialize)]
struct Manifest {
    config: SynthConfig,
    documents: Vec<ManifestEntry>,
}

fn load_config(path: Option<&Path>) -> Result<PipelineConfig> {
    match path {
        None => Ok(PipelineConfig::default()),
        Some(p) => PipelineConfig::parse(&io::read(p)?).with_context(|| format!("invalid config {}", p.display())),
    }
}

impl SegFlags {
    fn apply(&self, base: &SegConfig) -> Result<SegConfig> {
        Ok(SegConfig::new(
            self.kernel_w.unwrap_or(base.kernel_w()),
            self.kernel_h.unwrap_or(base.kernel_h()),
            self.patience.unwrap_or(base.patience()),
            self.min_aggregation_ratio.unwrap_or(base.min_aggregation_ratio()),
            self.max_iterations.unwrap_or(base.max_iterations()),
        )?)
    }
}

impl AlignFlags {
    fn apply(&self, cfg: &mut PipelineConfig) -> Result<()> {
        if let Some(v) = self.sim_threshold {
            cfg.aligner.sim_threshold = v;
        }
        if let Some(v) = self.psi {
            cfg.aligner.psi = v;
        }
        if let Some(m) = self.activation_mode {
            cfg.aligner.activation_mode = match m {
                Mode::Sum => ActivationMode::Sum,
                Mode::Any => ActivationMode::Any,
            };
        }
        Ok(cfg.aligner.validate()?)
    }
}

impl PseudoFlags {
    fn apply(&self, cfg: &mut PipelineConfig) {
        if let Some(v) = self.phi {
            cfg.pseudo.phi = v;
        }
        if let Some(v) = &self.category {
            cfg.pseudo.category = v.clone();
        }
    }
}

impl PostFlags {
    fn apply(&self, cfg: &mut PipelineConfig) -> Result<()> {
        if let Some(v) = self.min_confidence {
            if !(0.0..=1.0).contains(&v) {
                bail!("min_confidence must lie in [0, 1], got {v}");
            }
            cfg.postproc.min_confidence = v;
        }
        if self.exclude_pro_se {
            cfg.postproc.exclude_pro_se = true;
        }
        if let Some(v) = &self.category {
            cfg.postproc.category = v.clone();
        }
        Ok(())
    }
}

fn label_for<'a>(labels: &'a BTreeMap<String, InexactLabel>, doc: &Document, path: &Path) -> Result<&'a InexactLabel> {
    labels
        .get(&doc.doc_id)
        .with_context(|| format!("no label for {} in {}", doc.doc_id, path.display()))
}

fn pseudo_coco(
    docs: &[Document],
    cfg: &PipelineConfig,
    seg: impl Fn(&Document) -> Result<Vec<PageSegmentation>> + Sync,
    attention: impl Fn(&Document) -> Result<ScoreMatrix<f32>> + Sync,
) -> Result<CocoDataset> {
    let sets: Vec<_> = docs
        .par_iter()
        .map(|doc| {
            let s = seg(doc)?;
            let a = attention(doc)?;
            log::debug!("{}: {} regions", doc.doc_id, s.iter().map(|p| p.rois.len()).sum::<usize>());
            Ok(pseudo_label_document(doc, &s, &a, &cfg.aligner, &cfg.pseudo)?)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(CocoDataset::from_pseudo(&sets.concat()))
}

fn parse_set_arg(arg: &str) -> Result<(String, String, PathBuf)> {
    let mut parts = arg.splitn(3, '=');
    match (parts.next(), parts.next(), parts.next()) {
        (Some(n), Some(c), Some(p)) if !n.is_empty() && !c.is_empty() && !p.is_empty() => {
            Ok((n.to_string(), c.to_string(), PathBuf::from(p)))
        }
        _ => bail!("box set must look like NAME=COLOR=PATH, got {arg:?}"),
    }
}

fn entity_extents(doc: &Document, file: &EntityFile) -> Vec<(usize, BBox)> {
    let mut out = Vec::new();
    for e in &file.entities {
        let mut per_page: BTreeMap<usize, BBox> = BTreeMap::new();
        for &t in &e.token_indices {
            let (Some(w), Ok(line)) = (doc.words.get(t), doc.line_of(t)) else {
                continue;
            };
            per_page
                .entry(line.page)
                .and_modify(|b| *b = b.union(&w.bbox))
                .or_insert(w.bbox);
        }
        out.extend(per_page);
    }
    out
}

fn run(cli: Cli) -> Result<()> {
    let mut cfg = load_config(cli.config.as_deref())?;
    match cli.command {
        Command::Segment { input, out, seg } => {
            let seg_cfg = seg.apply(&cfg.segmenter)?;
            let docs = io::load_documents(&input)?;
            let result: Vec<DocSegmentation> = docs
                .par_iter()
                .map(|d| DocSegmentation { doc_id: d.doc_id.clone(), pages: segment_document(d, &seg_cfg) })
                .collect();
            io::write_json(&out, &result)
        }
        Command::Align { input, labels, out, format, align } => {
            align.apply(&mut cfg)?;
            let docs = io::load_documents(&input)?;
            let label_map = io::load_labels(&labels)?;
            let outputs = docs
                .par_iter()
                .map(|d| {
                    let m = align_document(d, label_for(&label_map, d, &labels)?, &cfg.aligner)?;
                    Ok(match format {
                        AttnFormat::Binary => (out.join(format!("{}.attn", d.doc_id)), m.to_binary()),
                        AttnFormat::Json => (out.join(format!("{}.attn.json", d.doc_id)), m.to_json().into_bytes()),
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            for (path, bytes) in outputs {
                io::write_atomic(&path, &bytes)?;
            }
            Ok(())
        }
        Command::Pseudo { input, segments, attention, out, align, pseudo } => {
            align.apply(&mut cfg)?;
            pseudo.apply(&mut cfg);
            let docs = io::load_documents(&input)?;
            let segs: BTreeMap<String, Vec<PageSegmentation>> = io::load_many::<DocSegmentation>(&segments, "segmentation")?
                .into_iter()
                .map(|s| (s.doc_id, s.pages))
                .collect();
            let coco = pseudo_coco(
                &docs,
                &cfg,
                |d| {
                    segs.get(&d.doc_id)
                        .cloned()
                        .with_context(|| format!("no segmentation for {} in {}", d.doc_id, segments.display()))
                },
                |d| {
                    let path = io::attention_path(&attention, &d.doc_id)?;
                    load_attention(&io::read(&path)?, d.word_count())
                        .with_context(|| format!("invalid attention matrix {}", path.display()))
                },
            )?;
            io::write_atomic(&out, coco.to_json().as_bytes())
        }
        Command::Pipeline { input, labels, out, seg, align, pseudo } => {
            cfg.segmenter = seg.apply(&cfg.segmenter)?;
            align.apply(&mut cfg)?;
            pseudo.apply(&mut cfg);
            let docs = io::load_documents(&input)?;
            let label_map = io::load_labels(&labels)?;
            let coco = pseudo_coco(
                &docs,
                &cfg,
                |d| Ok(segment_document(d, &cfg.segmenter)),
                |d| Ok(align_document(d, label_for(&label_map, d, &labels)?, &cfg.aligner)?),
            )?;
            io::write_atomic(&out, coco.to_json().as_bytes())
        }
        Command::Postprocess { input, pred, out, post } => {
            post.apply(&mut cfg)?;
            let docs = io::load_documents(&input)?;
            let coco = CocoDataset::parse(&io::read(&pred)?).with_context(|| format!("invalid COCO file {}", pred.display()))?;
            let files: Vec<EntityFile> = docs
                .par_iter()
                .map(|d| entity_file(d, &postprocess_document(d, &coco, &cfg.postproc)))
                .collect();
            io::write_json(&out, &files)
        }
        Command::Eval { pred, gold, ignore_case, out } => {
            let p: Vec<EntityFile> = io::load_many(&pred, "entity")?;
            let g: Vec<EntityFile> = io::load_many(&gold, "entity")?;
            let report = evaluate(&p, &g, ignore_case);
            print!("{}", report.table());
            if let Some(out) = out {
                io::write_atomic(&out, report.to_json().as_bytes())?;
            }
            Ok(())
        }
        Command::Synth { out, n, seed, columns, profiles, noise, no_scramble, sim_threshold } => {
            let base = SynthConfig { seed, columns, profiles_per_page: profiles, noise_rate: noise, scramble: !no_scramble };
            base.validate()?;
            let docs = (seed..seed + n)
                .into_par_iter()
                .map(|s| generate(&SynthConfig { seed: s, ..base.clone() }).map_err(anyhow::Error::from))
                .collect::<Result<Vec<_>>>()?;
            let mut entries = Vec::new();
            for s in &docs {
                let id = &s.document.doc_id;
                let rel = |dir: &str, ext: &str| format!("{dir}/{id}{ext}");
                let entry = ManifestEntry {
                    doc_id: id.clone(),
                    ocr: rel("ocr", ".json"),
                    gold: rel("gold", ".json"),
                    label: rel("labels", ".json"),
                    attention: rel("attention", ".attn"),
                    words: s.document.word_count(),
                };
                let m = weaklayout::align_tokens(&s.document, &s.label.decoder_text(), sim_threshold);
                io::write_atomic(&out.join(&entry.ocr), s.document.to_json().as_bytes())?;
                io::write_json(&out.join(&entry.gold), &s.gold_file())?;
                io::write_json(&out.join(&entry.label), &s.label)?;
                io::write_atomic(&out.join(&entry.attention), &m.to_binary())?;
                entries.push(entry);
            }
            io::write_json(&out.join("manifest.json"), &Manifest { config: base, documents: entries })
        }
        Command::Render { input, boxes, entities, out } => {
            let docs = io::load_documents(&input)?;
            let mut coco_sets = Vec::new();
            for arg in &boxes {
                let (name, color, path) = parse_set_arg(arg)?;
                let ds = CocoDataset::parse(&io::read(&path)?).with_context(|| format!("invalid COCO file {}", path.display()))?;
                coco_sets.push((name, color, ds.detections_by_page()));
            }
            let mut entity_sets = Vec::new();
            for arg in &entities {
                let (name, color, path) = parse_set_arg(arg)?;
                let files: BTreeMap<String, EntityFile> = io::load_many::<EntityFile>(&path, "entity")?
                    .into_iter()
                    .map(|f| (f.doc_id.clone(), f))
                    .collect();
                entity_sets.push((name, color, files));
            }
            for doc in &docs {
                let mut sets = Vec::new();
                for (name, color, by_page) in &coco_sets {
                    let boxes = by_page
                        .iter()
                        .filter(|((id, _), _)| *id == doc.doc_id)
                        .flat_map(|((_, page), (dims, dets))| dets.iter().map(move |d| (*page, d.bbox.to_normalized(*dims))))
                        .collect();
                    sets.push(BoxSet { name: name.clone(), color: color.clone(), boxes });
                }
                for (name, color, files) in &entity_sets {
                    let boxes = files.get(&doc.doc_id).map(|f| entity_extents(doc, f)).unwrap_or_default();
                    sets.push(BoxSet { name: name.clone(), color: color.clone(), boxes });
                }
                for (page, svg) in render_overlay(doc, &sets).iter().enumerate() {
                    io::write_atomic(&out.join(format!("{}_p{page}.svg", doc.doc_id)), svg.as_bytes())?;
                }
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    if cli.jobs == 0 {
        eprintln!("error: --jobs must be at least 1");
        return ExitCode::from(2);
    }
    if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(cli.jobs).build_global() {
        log::warn!("thread pool: {e}");
    }
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
