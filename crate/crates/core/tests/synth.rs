mod common;

use common::doc_from_lines;
use weaklayout::model::entities_disjoint;
use weaklayout::synth::{corrupt, corrupt_counted, generate, BlockKind, SynthConfig};
use weaklayout::{align_tokens, Document};

fn cfg(seed: u64, columns: u8, profiles: u8, scramble: bool) -> SynthConfig {
    SynthConfig { seed, columns, profiles_per_page: profiles, noise_rate: 0.0, scramble }
}

#[test]
fn seed42_matches_golden_files() {
    let s = generate(&cfg(42, 2, 2, true)).unwrap();
    let text = |name: &str| String::from_utf8(common::read_data(name)).unwrap();
    assert_eq!(s.document.to_json(), text("seed42/ocr.json"));
    assert_eq!(serde_json::to_string_pretty(&s.gold_file()).unwrap() + "\n", text("seed42/gold.json"));
    assert_eq!(serde_json::to_string_pretty(&s.label).unwrap() + "\n", text("seed42/label.json"));
    let m = align_tokens(&s.document, &s.label.decoder_text(), 0.8);
    assert_eq!(m.to_binary(), common::read_data("seed42/attention.attn"));
    assert_eq!(s.gold.len(), 2);
    for e in &s.gold {
        assert!(e.tokens.windows(2).any(|w| w[1] != w[0] + 1));
    }
}

#[test]
fn generated_documents_are_valid() {
    for seed in 0..40 {
        for columns in [1, 2] {
            for profiles in [1, 3, 6] {
                for scramble in [false, true] {
                    let s = generate(&cfg(seed, columns, profiles, scramble)).unwrap();
                    let reparsed = Document::parse(s.document.to_json().as_bytes()).unwrap();
                    assert_eq!(reparsed, s.document);
                    assert!(entities_disjoint(&s.gold));
                    assert_eq!(s.gold.len(), usize::from(profiles));
                    assert_eq!(s.label.entities.len(), usize::from(profiles));
                    let profile_blocks = s.blocks.iter().filter(|b| b.kind == BlockKind::Profile).count();
                    assert_eq!(profile_blocks, usize::from(profiles));
                    if !scramble && columns == 1 {
                        for e in &s.gold {
                            assert!(e.tokens.windows(2).all(|w| w[1] == w[0] + 1), "seed {seed}");
                        }
                    }
                    if scramble && columns == 2 && profiles >= 2 {
                        assert!(s.gold.iter().any(|e| e.tokens.windows(2).any(|w| w[1] < w[0])), "seed {seed}");
                    }
                }
            }
        }
    }
}

#[test]
fn deterministic_bytes() {
    let c = SynthConfig { seed: 9, noise_rate: 0.05, ..Default::default() };
    let a = generate(&c).unwrap();
    let b = generate(&c).unwrap();
    assert_eq!(a.document.to_json(), b.document.to_json());
    assert_eq!(a.label, b.label);
    assert_ne!(a.document.to_json(), generate(&SynthConfig { seed: 10, ..c }).unwrap().document.to_json());
}

#[test]
fn label_follows_sub_element_order() {
    let s = generate(&cfg(42, 2, 2, true)).unwrap();
    let first = &s.label.entities[0].text;
    assert!(first.starts_with("Maria A. Pemberton, Senior Counsel, Bar No. 067420,"));
    assert!(first.ends_with(", Attorneys For Plaintiff And Appellant"));
}

fn thousand_char_doc() -> Document {
    let words = vec!["abcdefghij"; 100];
    doc_from_lines("noise", &[&words[..50], &words[50..]])
}

#[test]
fn noise_extremes() {
    let doc = thousand_char_doc();
    assert_eq!(corrupt(&doc, 0.0, 7), doc);
    let all = corrupt(&doc, 1.0, 7);
    for (a, b) in doc.words.iter().zip(&all.words) {
        assert_eq!(a.bbox, b.bbox);
        assert!(a.text.chars().zip(b.text.chars()).all(|(x, y)| x != y));
    }
}

#[test]
fn noise_count_stays_in_binomial_interval() {
    // Binomial(1000, 0.05): central 99% interval is [33, 69].
    let doc = thousand_char_doc();
    let (_, n7) = corrupt_counted(&doc, 0.05, 7);
    assert!((33..=69).contains(&n7), "{n7}");
    let inside = (0..1000u64)
        .filter(|&seed| (33..=69).contains(&corrupt_counted(&doc, 0.05, seed).1))
        .count();
    // 99.1% expected; 980 is more than four standard errors below.
    assert!(inside >= 980, "{inside}");
}
