mod common;

use std::collections::BTreeSet;

use common::{random_px_boxes, raster_segment, rng, OracleHalt, PxBox};
use proptest::prelude::*;
use weaklayout::geom::{PageDims, Rect};
use weaklayout::segment::{segment, segment_boxes, Partition};
use weaklayout::{Document, HaltReason, SegConfig};

const SIDE: i32 = 64;
const PAGE: PageDims = PageDims { width_px: SIDE as u32, height_px: SIDE as u32 };

fn to_rect<T: weaklayout::Scalar>(b: &PxBox) -> Rect<T> {
    let s = T::c(f64::from(SIDE));
    Rect::from_extents(
        T::c(f64::from(b.x0)) / s,
        T::c(f64::from(b.y0)) / s,
        T::c(f64::from(b.x1)) / s,
        T::c(f64::from(b.y1)) / s,
    )
}

fn member_sets<T>(p: &Partition<T>) -> Vec<BTreeSet<usize>> {
    let mut v: Vec<BTreeSet<usize>> = p.clusters.iter().map(|c| c.members.iter().copied().collect()).collect();
    v.sort();
    v
}

fn halt_of(h: OracleHalt) -> HaltReason {
    match h {
        OracleHalt::Patience => HaltReason::Patience,
        OracleHalt::Ratio => HaltReason::AggregationRatio,
        OracleHalt::Cap => HaltReason::IterationCap,
    }
}

fn check_against_raster(boxes: &[PxBox], cfg: &SegConfig) {
    let rects: Vec<Rect<f64>> = boxes.iter().map(to_rect).collect();
    let got = segment_boxes(&rects, cfg, PAGE);
    let (mut want, iters, halt) = raster_segment(
        boxes,
        SIDE,
        SIDE,
        (cfg.kernel_w() as i32, cfg.kernel_h() as i32),
        cfg.patience(),
        cfg.min_aggregation_ratio(),
        cfg.max_iterations(),
    );
    want.sort();
    assert_eq!(member_sets(&got), want, "boxes {boxes:?}");
    assert_eq!(got.iterations, iters, "boxes {boxes:?}");
    assert_eq!(got.halt, halt_of(halt), "boxes {boxes:?}");
}

#[test]
fn matches_raster_oracle_default_config() {
    let cfg = SegConfig::default();
    let mut r = rng(7);
    for _ in 0..150 {
        let boxes = random_px_boxes(&mut r, SIDE, 12);
        check_against_raster(&boxes, &cfg);
    }
}

#[test]
fn matches_raster_oracle_other_kernels() {
    let mut r = rng(8);
    for (kw, kh, patience, ratio, cap) in [(1, 3, 1, 0.2, 50), (4, 1, 2, 0.9, 3), (3, 3, 3, 0.05, 2)] {
        let cfg = SegConfig::new(kw, kh, patience, ratio, cap).unwrap();
        for _ in 0..40 {
            let boxes = random_px_boxes(&mut r, SIDE, 10);
            check_against_raster(&boxes, &cfg);
        }
    }
}

#[test]
fn f32_and_f64_agree_on_dyadic_boxes() {
    let cfg = SegConfig::default();
    let mut r = rng(9);
    for _ in 0..50 {
        let boxes = random_px_boxes(&mut r, SIDE, 10);
        let a = segment_boxes(&boxes.iter().map(to_rect::<f64>).collect::<Vec<_>>(), &cfg, PAGE);
        let b = segment_boxes(&boxes.iter().map(to_rect::<f32>).collect::<Vec<_>>(), &cfg, PAGE);
        assert_eq!(member_sets(&a), member_sets(&b));
        assert_eq!((a.iterations, a.halt), (b.iterations, b.halt));
    }
}

#[test]
fn merge_after_retightening_takes_two_iterations() {
    let boxes = [
        PxBox { x0: 0, y0: 0, x1: 10, y1: 10 },
        PxBox { x0: 12, y0: 8, x1: 20, y1: 30 },
        PxBox { x0: 0, y0: 33, x1: 6, y1: 40 },
    ];
    let cfg = SegConfig::default();
    let p = segment_boxes(&boxes.iter().map(to_rect::<f64>).collect::<Vec<_>>(), &cfg, PAGE);
    assert_eq!(p.counts, vec![2, 1]);
    assert_eq!(p.halt, HaltReason::AggregationRatio);
    check_against_raster(&boxes, &cfg);
}

#[test]
fn gap_of_exactly_two_kernels_touches() {
    // 2 px per side closes a 4 px gap and no more.
    let cfg = SegConfig::default();
    let near = [PxBox { x0: 0, y0: 0, x1: 10, y1: 4 }, PxBox { x0: 14, y0: 0, x1: 20, y1: 4 }];
    let far = [PxBox { x0: 0, y0: 0, x1: 10, y1: 4 }, PxBox { x0: 15, y0: 0, x1: 20, y1: 4 }];
    let run = |b: &[PxBox]| segment_boxes(&b.iter().map(to_rect::<f64>).collect::<Vec<_>>(), &cfg, PAGE);
    assert_eq!(run(&near).clusters.len(), 1);
    assert_eq!(run(&far).clusters.len(), 2);
    // Diagonal neighbours touch at a corner.
    let diag = [PxBox { x0: 0, y0: 0, x1: 10, y1: 4 }, PxBox { x0: 14, y0: 8, x1: 20, y1: 12 }];
    assert_eq!(run(&diag).clusters.len(), 1);
    check_against_raster(&diag, &cfg);
}

#[test]
fn two_column_fixture() {
    let doc = Document::parse(&common::read_data("two_column.json")).unwrap();
    let page = &doc.pages[0];
    let seg = segment(&page.lines, &SegConfig::default(), page.dims());
    let members: Vec<Vec<&str>> = seg.rois.iter().map(|r| r.members.iter().map(String::as_str).collect()).collect();
    assert_eq!(members, vec![vec!["L1", "L3"], vec!["L2"]]);
    assert_eq!(seg.halt, HaltReason::Patience);
    assert_eq!(seg.iterations, 4);
    let left = &seg.rois[0].bbox;
    assert!((left.y - 0.1).abs() < 1e-12 && (left.bottom() - 0.143).abs() < 1e-12);
}

#[test]
fn empty_page() {
    let seg = segment(&[], &SegConfig::default(), PAGE);
    assert!(seg.rois.is_empty());
    assert_eq!((seg.halt, seg.iterations), (HaltReason::Empty, 0));
}

#[test]
fn iteration_cap() {
    let mut boxes: Vec<PxBox> = (0..9)
        .map(|i| PxBox { x0: (i % 3) * 20, y0: (i / 3) * 10, x1: (i % 3) * 20 + 8, y1: (i / 3) * 10 + 1 })
        .collect();
    boxes.push(PxBox { x0: 0, y0: 3, x1: 8, y1: 4 });
    let cfg = SegConfig::default().with_max_iterations(1).unwrap();
    let p = segment_boxes(&boxes.iter().map(to_rect::<f64>).collect::<Vec<_>>(), &cfg, PAGE);
    assert_eq!((p.halt, p.iterations, p.clusters.len()), (HaltReason::IterationCap, 1, 9));
    check_against_raster(&boxes, &cfg);
}

proptest! {
    #[test]
    fn clusters_partition_the_input(raw in prop::collection::vec((0i32..60, 0i32..60, 1i32..5, 1i32..5), 1..15)) {
        let boxes: Vec<PxBox> = raw.iter().map(|&(x, y, w, h)| PxBox { x0: x, y0: y, x1: x + w, y1: y + h }).collect();
        let rects: Vec<Rect<f64>> = boxes.iter().map(to_rect).collect();
        let p = segment_boxes(&rects, &SegConfig::default(), PAGE);
        let mut all: Vec<usize> = p.clusters.iter().flat_map(|c| c.members.clone()).collect();
        all.sort_unstable();
        prop_assert_eq!(all, (0..boxes.len()).collect::<Vec<_>>());
        for c in &p.clusters {
            let tight = c.members[1..].iter().fold(rects[c.members[0]], |acc, &i| acc.union(&rects[i]));
            prop_assert_eq!(c.bbox, tight);
        }
        prop_assert!(p.counts.windows(2).all(|w| w[1] <= w[0]));
        prop_assert!(p.iterations <= SegConfig::default().max_iterations());
    }
}
