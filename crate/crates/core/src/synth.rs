//! Seeded synthetic caption pages with attorney-profile blocks.
//!
//! Each profile is a six-line block (name, title, bar number, firm, street,
//! city/state/zip, phone/fax/e-mail in one of a few arrangements) followed
//! by a separate two-line party designation block in the same column. The
//! inexact label lists the sub-elements in a fixed canonical order, title
//! cased and comma separated, so its token order differs from the page.
//! With `scramble` on, each block is shifted by a random vertical offset
//! before lines are put in reading order, which interleaves the columns and
//! can read a designation block ahead of its profile.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::geom::Rect;
use crate::model::{
    Document, EntityFile, InexactLabel, LabelEntity, NamedEntity, OcrDocument, OcrLine, OcrPage,
    OcrWord,
};
use crate::pseudo::DEFAULT_CATEGORY;
use crate::text::title_case;
use crate::{Error, Result};

pub const PAGE_W: u32 = 1224;
pub const PAGE_H: u32 = 1584;
pub const CHAR_W: u32 = 6;
pub const LINE_H: u32 = 14;
pub const LINE_PITCH: u32 = 17;
/// Gap between a profile block and its designation block.
pub const BLOCK_GAP: u32 = 17;
/// Gap between consecutive profiles in a column.
pub const PROFILE_GAP: u32 = 45;
pub const COLUMN_X: [u32; 2] = [72, 648];
pub const COLUMN_W: u32 = 480;
const PROFILE_TOP: u32 = 330;
const SCRAMBLE_JITTER: f64 = 120.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynthConfig {
    pub seed: u64,
    pub columns: u8,
    pub profiles_per_page: u8,
    pub noise_rate: f64,
    pub scramble: bool,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            columns: 2,
            profiles_per_page: 2,
            noise_rate: 0.0,
            scramble: true,
        }
    }
}

impl SynthConfig {
    pub fn validate(&self) -> Result<()> {
        if !(1..=2).contains(&self.columns) {
            return Err(Error::Config(format!("columns must be 1 or 2, got {}", self.columns)));
        }
        if !(1..=6).contains(&self.profiles_per_page) {
            return Err(Error::Config(format!(
                "profiles_per_page must lie in 1..=6, got {}",
                self.profiles_per_page
            )));
        }
        if !(0.0..=1.0).contains(&self.noise_rate) {
            return Err(Error::Config(format!("noise_rate must lie in [0, 1], got {}", self.noise_rate)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BlockKind {
    Caption,
    Profile,
    Designation,
}

/// A generated paragraph, listed in visual (column-major) order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthBlock {
    pub kind: BlockKind,
    /// Owning profile for profile and designation blocks.
    pub profile: Option<usize>,
    /// Column for profile blocks; captions span the page.
    pub column: Option<usize>,
    pub line_ids: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthDoc {
    pub document: Document,
    pub gold: Vec<NamedEntity>,
    pub label: InexactLabel,
    pub blocks: Vec<SynthBlock>,
}

impl SynthDoc {
    pub fn gold_file(&self) -> EntityFile {
        EntityFile::from_entities(&self.document, &self.gold)
    }
}

const FIRST_NAMES: &[&str] = &[
    "James", "Maria", "Robert", "Linda", "Michael", "Susan", "David", "Karen", "Daniel", "Nancy",
    "Thomas", "Laura", "Steven", "Helen", "Andrew", "Julia", "Victor", "Irene", "Oscar", "Grace",
];
const LAST_NAMES: &[&str] = &[
    "Whitfield", "Okafor", "Lindqvist", "Moreno", "Castellano", "Hargrove", "Nakamura", "Pemberton",
    "Delacroix", "Abernathy", "Fitzgerald", "Kowalski", "Ramirez", "Sullivan", "Brennan", "Takahashi",
    "Oyelaran", "Vandermeer", "Quintero", "Ashworth",
];
const INITIALS: &[&str] = &["A.", "B.", "C.", "E.", "J.", "K.", "M.", "R.", "T.", "W."];
const TITLES: &[&str] = &[
    "Partner",
    "Associate",
    "Senior Counsel",
    "Deputy Attorney General",
    "Supervising Attorney",
    "Managing Partner",
];
const STREET_NAMES: &[&str] = &[
    "Market", "Grand", "Harbor", "Mission", "Franklin", "Jefferson", "Olive", "Spring", "Cedar", "Lakeview",
];
const STREET_TYPES: &[&str] = &["Street", "Avenue", "Boulevard", "Drive", "Plaza"];
const CITIES: &[&str] = &[
    "Sacramento", "Oakland", "Fresno", "Pasadena", "Riverside", "Berkeley", "Stockton", "Irvine",
    "Glendale", "Burbank",
];
const STATES: &[&str] = &["CA", "NV", "OR", "AZ", "WA"];
const DESIGNATION_LEADS: &[&str] = &["Attorneys", "Counsel"];
/// Party roles; one pair per profile on a page, never repeated on a page.
const ROLE_PAIRS: &[(&str, &str)] = &[
    ("Plaintiff", "Appellant"),
    ("Defendant", "Respondent"),
    ("Petitioner", "Appellee"),
    ("Intervenor", "Objector"),
    ("Creditor", "Claimant"),
    ("Debtor", "Trustee"),
];
/// Caption vocabulary, chosen so no word is similar to profile vocabulary.
pub const CAPTION_WORDS: &[&str] = &[
    "SUPREME", "COURT", "DISTRICT", "DIVISION", "BRIEF", "OPENING", "REPLY", "MERITS", "REVIEW",
    "CIVIL", "CRIMINAL", "MATTER", "HEARING", "JUDGMENT", "MOTION", "RECORD", "VOLUME", "TRIAL",
    "SUPERIOR", "HONORABLE", "JUDGE", "PRESIDING", "DOCKET", "ORAL", "REQUESTED", "CERTIFIED",
    "PUBLICATION", "STATEMENT", "ISSUES", "PRESENTED", "TABLE", "CONTENTS", "AUTHORITIES",
    "INTRODUCTION", "BACKGROUND", "JURISDICTION", "CONCLUSION", "CERTIFICATE", "COMPLIANCE",
    "EXHIBIT", "APPENDIX",
];

/// Every fixed word that can appear inside a profile or designation block.
pub fn profile_vocabulary() -> Vec<&'static str> {
    let mut v: Vec<&str> = Vec::new();
    v.extend(FIRST_NAMES);
    v.extend(LAST_NAMES);
    v.extend(INITIALS);
    v.extend(TITLES.iter().flat_map(|t| t.split_whitespace()));
    v.extend(STREET_NAMES);
    v.extend(STREET_TYPES);
    v.extend(CITIES);
    v.extend(STATES);
    v.extend(DESIGNATION_LEADS);
    v.extend(ROLE_PAIRS.iter().flat_map(|(a, b)| [*a, *b]));
    v.extend(["for", "and", "SBN", "Bar", "No.", "LLP", "PC", "APC", "Law", "Group", "Legal", "Suite", "Tel:", "Fax:", "&"]);
    v
}

struct Profile {
    name: String,
    title: String,
    bar: String,
    firm: String,
    street: String,
    city: String,
    state: String,
    zip: String,
    phone: String,
    fax: String,
    email: String,
    designation: [String; 2],
}

fn pick<'a>(rng: &mut ChaCha8Rng, xs: &[&'a str]) -> &'a str {
    xs.choose(rng).copied().expect("non-empty word list")
}

fn digits(rng: &mut ChaCha8Rng, n: usize) -> String {
    (0..n).map(|_| char::from(b'0' + rng.gen_range(0..10u8))).collect()
}

fn phone(rng: &mut ChaCha8Rng) -> String {
    format!("({}) {}-{}", digits(rng, 3), digits(rng, 3), digits(rng, 4))
}

impl Profile {
    fn sample(rng: &mut ChaCha8Rng, roles: (&str, &str)) -> Self {
        let first = pick(rng, FIRST_NAMES);
        let last = pick(rng, LAST_NAMES);
        let initial = pick(rng, INITIALS);
        let name = if rng.gen_bool(0.5) {
            format!("{first} {initial} {last}").to_uppercase()
        } else {
            format!("{first} {initial} {last}")
        };
        let partner = pick(rng, LAST_NAMES);
        let firm = match rng.gen_range(0..4) {
            0 => format!("{last} & {partner} LLP"),
            1 => format!("{last} {partner} PC"),
            2 => format!("{partner} Law Group"),
            _ => format!("{partner} Legal APC"),
        };
        let slug: String = match firm.split_whitespace().next() {
            Some(w) => w.to_lowercase(),
            None => "firm".into(),
        };
        let street = if rng.gen_bool(0.5) {
            format!(
                "{} {} {}, Suite {}",
                rng.gen_range(10..9999),
                pick(rng, STREET_NAMES),
                pick(rng, STREET_TYPES),
                rng.gen_range(100..2000)
            )
        } else {
            format!("{} {} {}", rng.gen_range(10..9999), pick(rng, STREET_NAMES), pick(rng, STREET_TYPES))
        };
        let (a, b) = roles;
        let lead = pick(rng, DESIGNATION_LEADS);
        let bar = if rng.gen_bool(0.5) {
            format!("SBN {}", digits(rng, 6))
        } else {
            format!("Bar No. {}", digits(rng, 6))
        };
        Self {
            email: format!("{}{}@{}.com", first[..1].to_lowercase(), last.to_lowercase(), slug),
            name,
            title: pick(rng, TITLES).to_string(),
            bar,
            firm,
            street,
            city: pick(rng, CITIES).to_string(),
            state: pick(rng, STATES).to_string(),
            zip: digits(rng, 5),
            phone: phone(rng),
            fax: phone(rng),
            designation: [format!("{lead} for {a}"), format!("and {b}")],
        }
    }

    /// The six visual lines of the profile block.
    fn lines(&self, variant: u8) -> Vec<String> {
        let city = format!("{}, {} {}", self.city, self.state, self.zip);
        let contact = format!("Tel: {} Fax: {} {}", self.phone, self.fax, self.email);
        match variant {
            0 => vec![
                format!("{} ({})", self.name, self.bar),
                self.title.clone(),
                self.firm.clone(),
                self.street.clone(),
                city,
                contact,
            ],
            1 => vec![
                format!("{}, {}", self.name, self.title),
                self.bar.clone(),
                self.firm.clone(),
                self.street.clone(),
                city,
                contact,
            ],
            _ => vec![
                self.firm.clone(),
                self.name.clone(),
                format!("{}, {}", self.title, self.bar),
                self.street.clone(),
                city,
                contact,
            ],
        }
    }

    /// Label text: sub-elements in canonical order, title cased, comma separated.
    fn label_text(&self) -> String {
        [
            &self.name,
            &self.title,
            &self.bar,
            &self.firm,
            &self.street,
            &self.city,
            &format!("{} {}", self.state, self.zip),
            &self.phone,
            &self.fax,
            &self.email,
            &format!("{} {}", self.designation[0], self.designation[1]),
        ]
        .iter()
        .map(|s| title_case(s))
        .collect::<Vec<_>>()
        .join(", ")
    }
}

struct DraftLine {
    id: String,
    text: String,
    x_px: u32,
    y_px: u32,
    block: usize,
    offset: u32,
}

struct Layout {
    lines: Vec<DraftLine>,
    blocks: Vec<DraftBlock>,
}

impl Layout {
    fn add_block(
        &mut self,
        kind: BlockKind,
        profile: Option<usize>,
        column: Option<usize>,
        x_of: &dyn Fn(&str) -> u32,
        top: u32,
        texts: Vec<String>,
    ) -> usize {
        let b = self.blocks.len();
        let mut ids = Vec::new();
        for (k, text) in texts.into_iter().enumerate() {
            let offset = k as u32 * LINE_PITCH;
            ids.push(self.lines.len());
            self.lines.push(DraftLine {
                id: format!("L{:02}", self.lines.len()),
                x_px: x_of(&text),
                y_px: top + offset,
                text,
                block: b,
                offset,
            });
        }
        self.blocks.push(DraftBlock {
            kind,
            profile,
            column,
            top_px: top,
            lines: ids,
        });
        b
    }
}

struct DraftBlock {
    kind: BlockKind,
    profile: Option<usize>,
    column: Option<usize>,
    top_px: u32,
    lines: Vec<usize>,
}

fn caption_line(rng: &mut ChaCha8Rng) -> String {
    let n = rng.gen_range(2..=5);
    (0..n).map(|_| pick(rng, CAPTION_WORDS)).collect::<Vec<_>>().join(" ")
}

fn text_width(text: &str) -> u32 {
    text.chars().count() as u32 * CHAR_W
}

fn ocr_line(line: &DraftLine) -> OcrLine {
    let (pw, ph) = (f64::from(PAGE_W), f64::from(PAGE_H));
    let mut x = line.x_px;
    let words: Vec<OcrWord> = line
        .text
        .split_whitespace()
        .map(|w| {
            let width = text_width(w);
            let bbox = Rect::new(
                f64::from(x) / pw,
                f64::from(line.y_px) / ph,
                f64::from(width) / pw,
                f64::from(LINE_H) / ph,
            );
            x += width + CHAR_W;
            OcrWord {
                text: w.to_string(),
                bbox,
            }
        })
        .collect();
    let bbox = words[1..].iter().fold(words[0].bbox, |acc, w| acc.union(&w.bbox));
    OcrLine {
        id: line.id.clone(),
        bbox,
        words,
    }
}

/// Generates one synthetic page with gold entities and its inexact label.
pub fn generate(cfg: &SynthConfig) -> Result<SynthDoc> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut layout = Layout {
        lines: Vec::new(),
        blocks: Vec::new(),
    };
    let centered = |t: &str| (PAGE_W - text_width(t)) / 2;
    let header: Vec<String> = (0..3).map(|_| caption_line(&mut rng)).collect();
    layout.add_block(BlockKind::Caption, None, None, &centered, 96, header);
    let title: Vec<String> = (0..2).map(|_| caption_line(&mut rng)).collect();
    layout.add_block(BlockKind::Caption, None, None, &centered, 200, title);

    let columns = usize::from(cfg.columns);
    let block_h = 6 * LINE_PITCH - (LINE_PITCH - LINE_H);
    let profile_pitch = block_h + BLOCK_GAP + 2 * LINE_PITCH - (LINE_PITCH - LINE_H) + PROFILE_GAP;
    let mut profiles = Vec::new();
    let mut profile_blocks = Vec::new();
    // Visual order: column by column, top to bottom.
    let n = usize::from(cfg.profiles_per_page);
    let mut slots: Vec<(usize, usize, usize)> = (0..n).map(|k| (k % columns, k / columns, k)).collect();
    slots.sort();
    let mut roles: Vec<(&str, &str)> = ROLE_PAIRS.to_vec();
    roles.shuffle(&mut rng);
    for (k, (column, row, _)) in slots.into_iter().enumerate() {
        let p = Profile::sample(&mut rng, roles[k]);
        let variant = rng.gen_range(0..3u8);
        let x = COLUMN_X[column];
        let top = PROFILE_TOP + row as u32 * profile_pitch;
        let index = profiles.len();
        let major = layout.add_block(BlockKind::Profile, Some(index), Some(column), &|_| x, top, p.lines(variant));
        let designation = layout.add_block(
            BlockKind::Designation,
            Some(index),
            Some(column),
            &|_| x,
            top + block_h + BLOCK_GAP,
            p.designation.to_vec(),
        );
        profiles.push(p);
        profile_blocks.push((major, designation));
    }
    let Layout { lines, blocks } = layout;
    debug_assert!(lines.iter().all(|l| text_width(&l.text) <= COLUMN_W || blocks[l.block].kind == BlockKind::Caption));

    // Reading order.
    let order: Vec<usize> = if cfg.scramble {
        let mut jitter: Vec<f64> = (0..blocks.len()).map(|_| rng.gen_range(0.0..SCRAMBLE_JITTER)).collect();
        let inverted = |jitter: &[f64], (m, d): (usize, usize)| {
            let last_major = f64::from(blocks[m].top_px + 5 * LINE_PITCH) + jitter[m];
            let first_designation = f64::from(blocks[d].top_px) + jitter[d];
            first_designation < last_major
        };
        if !profile_blocks.iter().any(|&pb| inverted(&jitter, pb)) {
            let (m, d) = profile_blocks[0];
            jitter[d] = jitter[m] - f64::from(block_h + BLOCK_GAP) - f64::from(LINE_PITCH) / 2.0;
        }
        let key = |l: &DraftLine| f64::from(blocks[l.block].top_px + l.offset) + jitter[l.block];
        let mut order: Vec<usize> = (0..lines.len()).collect();
        order.sort_by(|&a, &b| {
            key(&lines[a])
                .total_cmp(&key(&lines[b]))
                .then(lines[a].x_px.cmp(&lines[b].x_px))
                .then(a.cmp(&b))
        });
        order
    } else {
        blocks.iter().flat_map(|b| b.lines.iter().copied()).collect()
    };

    let ocr = OcrDocument {
        doc_id: format!("synth-{:05}", cfg.seed),
        pages: vec![OcrPage {
            width_px: PAGE_W,
            height_px: PAGE_H,
            lines: order.iter().map(|&i| ocr_line(&lines[i])).collect(),
        }],
    };
    let mut document = Document::from_ocr(ocr)?;
    if cfg.noise_rate > 0.0 {
        document = corrupt(&document, cfg.noise_rate, cfg.seed ^ 0x5eed_c0de);
    }

    let gold: Vec<NamedEntity> = profile_blocks
        .iter()
        .map(|&(m, d)| {
            let tokens = blocks[m]
                .lines
                .iter()
                .chain(&blocks[d].lines)
                .flat_map(|&i| {
                    let line = document.line_by_id(&lines[i].id).expect("generated line present");
                    line.word_start..=line.word_end
                })
                .collect();
            NamedEntity {
                entity_type: DEFAULT_CATEGORY.to_string(),
                tokens,
            }
        })
        .collect();
    let label = InexactLabel {
        doc_id: document.doc_id.clone(),
        entities: profiles
            .iter()
            .map(|p| LabelEntity {
                entity_type: DEFAULT_CATEGORY.to_string(),
                text: p.label_text(),
            })
            .collect(),
    };
    let blocks = blocks
        .iter()
        .map(|b| SynthBlock {
            kind: b.kind,
            profile: b.profile,
            column: b.column,
            line_ids: b.lines.iter().map(|&i| lines[i].id.clone()).collect(),
        })
        .collect();
    Ok(SynthDoc {
        document,
        gold,
        label,
        blocks,
    })
}

fn substitute(c: char, rng: &mut ChaCha8Rng) -> char {
    let upper = c.is_uppercase();
    let own = c.to_ascii_lowercase();
    loop {
        let r = char::from(b'a' + rng.gen_range(0..26u8));
        if r != own {
            return if upper { r.to_ascii_uppercase() } else { r };
        }
    }
}

/// Replaces each non-whitespace character with a different random letter
/// with probability `noise_rate`. Returns the number of substitutions.
pub fn corrupt_counted(doc: &Document, noise_rate: f64, seed: u64) -> (Document, usize) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = doc.clone();
    let mut count = 0;
    for word in &mut out.words {
        word.text = word
            .text
            .chars()
            .map(|c| {
                if !c.is_whitespace() && rng.gen_bool(noise_rate) {
                    count += 1;
                    substitute(c, &mut rng)
                } else {
                    c
                }
            })
            .collect();
    }
    (out, count)
}

/// Character-level OCR noise; geometry is unchanged.
pub fn corrupt(doc: &Document, noise_rate: f64, seed: u64) -> Document {
    corrupt_counted(doc, noise_rate, seed).0
}
