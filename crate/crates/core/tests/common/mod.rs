//! Independent oracles shared by the integration tests. Nothing here calls
//! into the code paths it is used to check.

#![allow(dead_code)]

use std::collections::{BTreeSet, HashMap, VecDeque};
use std::path::PathBuf;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn data_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/data").join(name)
}

pub fn read_data(name: &str) -> Vec<u8> {
    std::fs::read(data_path(name)).unwrap_or_else(|e| panic!("reading {name}: {e}"))
}

/// Pixel box, half-open: covers columns x0..x1 and rows y0..y1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PxBox {
    pub x0: i32,
    pub y0: i32,
    pub x1: i32,
    pub y1: i32,
}

impl PxBox {
    pub fn union(&self, o: &PxBox) -> PxBox {
        PxBox {
            x0: self.x0.min(o.x0),
            y0: self.y0.min(o.y0),
            x1: self.x1.max(o.x1),
            y1: self.y1.max(o.y1),
        }
    }
}

pub fn random_px_boxes(rng: &mut ChaCha8Rng, page: i32, max_boxes: usize) -> Vec<PxBox> {
    let n = rng.gen_range(1..=max_boxes);
    (0..n)
        .map(|_| {
            let w = rng.gen_range(1..=page / 4);
            let h = rng.gen_range(1..=page / 8);
            let x0 = rng.gen_range(0..=page - w);
            let y0 = rng.gen_range(0..=page - h);
            PxBox { x0, y0, x1: x0 + w, y1: y0 + h }
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OracleHalt {
    Patience,
    Ratio,
    Cap,
}

/// Raster morphology oracle for the segmentation loop: each iteration
/// paints every region's contour, dilated by the kernel, into a pixel mask,
/// labels 8-connected components by flood fill, and merges regions sharing
/// a component. Contours are re-tightened from member boxes.
pub fn raster_segment(
    boxes: &[PxBox],
    page_w: i32,
    page_h: i32,
    kernel: (i32, i32),
    patience: u32,
    ratio: f64,
    max_iterations: u32,
) -> (Vec<BTreeSet<usize>>, u32, OracleHalt) {
    let mut regions: Vec<(BTreeSet<usize>, PxBox)> =
        boxes.iter().enumerate().map(|(i, b)| ([i].into(), *b)).collect();
    let n0 = regions.len() as f64;
    let mut idle = 0;
    let mut iterations = 0;
    loop {
        let mut mask = vec![false; (page_w * page_h) as usize];
        let dilated: Vec<PxBox> = regions
            .iter()
            .map(|(_, b)| PxBox {
                x0: (b.x0 - kernel.0).max(0),
                y0: (b.y0 - kernel.1).max(0),
                x1: (b.x1 + kernel.0).min(page_w),
                y1: (b.y1 + kernel.1).min(page_h),
            })
            .collect();
        for d in &dilated {
            for y in d.y0..d.y1 {
                for x in d.x0..d.x1 {
                    mask[(y * page_w + x) as usize] = true;
                }
            }
        }
        let mut label = vec![usize::MAX; mask.len()];
        let mut next = 0;
        for start in 0..mask.len() {
            if !mask[start] || label[start] != usize::MAX {
                continue;
            }
            let mut queue = VecDeque::from([start]);
            label[start] = next;
            while let Some(p) = queue.pop_front() {
                let (px, py) = (p as i32 % page_w, p as i32 / page_w);
                for dy in -1..=1 {
                    for dx in -1..=1 {
                        let (nx, ny) = (px + dx, py + dy);
                        if nx < 0 || ny < 0 || nx >= page_w || ny >= page_h {
                            continue;
                        }
                        let q = (ny * page_w + nx) as usize;
                        if mask[q] && label[q] == usize::MAX {
                            label[q] = next;
                            queue.push_back(q);
                        }
                    }
                }
            }
            next += 1;
        }
        let mut merged: HashMap<usize, (BTreeSet<usize>, PxBox)> = HashMap::new();
        for ((members, b), d) in regions.iter().zip(&dilated) {
            let comp = label[(d.y0 * page_w + d.x0) as usize];
            merged
                .entry(comp)
                .and_modify(|(m, bb)| {
                    m.extend(members.iter().copied());
                    *bb = bb.union(b);
                })
                .or_insert_with(|| (members.clone(), *b));
        }
        let before = regions.len();
        regions = merged.into_values().collect();
        regions.sort_by_key(|(m, _)| *m.iter().next().unwrap());
        iterations += 1;
        idle = if regions.len() == before { idle + 1 } else { 0 };
        let halt = if regions.len() as f64 / n0 <= ratio {
            Some(OracleHalt::Ratio)
        } else if idle >= patience {
            Some(OracleHalt::Patience)
        } else if iterations >= max_iterations {
            Some(OracleHalt::Cap)
        } else {
            None
        };
        if let Some(h) = halt {
            return (regions.into_iter().map(|(m, _)| m).collect(), iterations, h);
        }
    }
}

/// Plain recursive edit distance with memoization, written independently
/// of the library's rolling-row DP.
pub fn edit_distance_oracle<T: PartialEq>(a: &[T], b: &[T]) -> usize {
    fn go<T: PartialEq>(a: &[T], b: &[T], i: usize, j: usize, memo: &mut HashMap<(usize, usize), usize>) -> usize {
        if i == a.len() {
            return b.len() - j;
        }
        if j == b.len() {
            return a.len() - i;
        }
        if let Some(v) = memo.get(&(i, j)) {
            return *v;
        }
        let v = if a[i] == b[j] {
            go(a, b, i + 1, j + 1, memo)
        } else {
            1 + go(a, b, i + 1, j, memo)
                .min(go(a, b, i, j + 1, memo))
                .min(go(a, b, i + 1, j + 1, memo))
        };
        memo.insert((i, j), v);
        v
    }
    go(a, b, 0, 0, &mut HashMap::new())
}

/// Minimum total cost over every partial one-to-one matching between
/// predicted and gold entities; unmatched entities cost their own length.
pub fn assignment_oracle(pairwise: &[Vec<i64>], pred_len: &[i64], gold_len: &[i64]) -> i64 {
    fn go(i: usize, used: &mut Vec<bool>, pw: &[Vec<i64>], pl: &[i64], gl: &[i64]) -> i64 {
        if i == pl.len() {
            return gl.iter().zip(used.iter()).filter(|(_, u)| !**u).map(|(g, _)| *g).sum();
        }
        let mut best = pl[i] + go(i + 1, used, pw, pl, gl);
        for j in 0..gl.len() {
            if !used[j] {
                used[j] = true;
                best = best.min(pw[i][j] + go(i + 1, used, pw, pl, gl));
                used[j] = false;
            }
        }
        best
    }
    go(0, &mut vec![false; gold_len.len()], pairwise, pred_len, gold_len)
}

pub fn random_tokens(rng: &mut ChaCha8Rng, max_len: usize, alphabet: &[&'static str]) -> Vec<&'static str> {
    let n = rng.gen_range(0..=max_len);
    (0..n).map(|_| alphabet[rng.gen_range(0..alphabet.len())]).collect()
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// One page, one line per entry, words laid out left to right. Lines are
/// stacked far apart so each forms its own region.
pub fn doc_from_lines(doc_id: &str, lines: &[&[&str]]) -> weaklayout::Document {
    use weaklayout::geom::Rect;
    use weaklayout::model::{OcrDocument, OcrLine, OcrPage, OcrWord};
    let pitch = 0.9 / lines.len().max(1) as f64;
    let ocr = OcrDocument {
        doc_id: doc_id.into(),
        pages: vec![OcrPage {
            width_px: 1000,
            height_px: 1000,
            lines: lines
                .iter()
                .enumerate()
                .map(|(i, words)| {
                    let y = 0.05 + i as f64 * pitch;
                    let w = 0.8 / words.len() as f64;
                    OcrLine {
                        id: format!("L{i}"),
                        bbox: Rect::new(0.1, y, 0.8, 0.01),
                        words: words
                            .iter()
                            .enumerate()
                            .map(|(k, t)| OcrWord {
                                text: t.to_string(),
                                bbox: Rect::new(0.1 + k as f64 * w, y, w, 0.01),
                            })
                            .collect(),
                    }
                })
                .collect(),
        }],
    };
    weaklayout::Document::from_ocr(ocr).unwrap()
}

/// Survivor indices of overlap suppression, via a boolean transitive
/// closure of the positive-overlap relation on extents.
pub fn suppression_oracle(boxes: &[(f64, f64, f64, f64)]) -> Vec<usize> {
    let n = boxes.len();
    let overlap = |a: &(f64, f64, f64, f64), b: &(f64, f64, f64, f64)| {
        a.0.max(b.0) < a.2.min(b.2) && a.1.max(b.1) < a.3.min(b.3)
    };
    let mut reach = vec![vec![false; n]; n];
    for i in 0..n {
        for j in 0..n {
            reach[i][j] = i == j || overlap(&boxes[i], &boxes[j]);
        }
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                if reach[i][k] && reach[k][j] {
                    reach[i][j] = true;
                }
            }
        }
    }
    let area = |b: &(f64, f64, f64, f64)| (b.2 - b.0) * (b.3 - b.1);
    (0..n)
        .filter(|&i| {
            (0..n).filter(|&j| reach[i][j]).all(|j| {
                let (ai, aj) = (area(&boxes[i]), area(&boxes[j]));
                ai > aj || (ai == aj && i <= j)
            })
        })
        .collect()
}
