//! Paragraph segmentation by iterative box dilation.
//!
//! Every line starts as its own region. Each iteration dilates the current
//! region contours by the kernel, joins regions whose dilated boxes touch,
//! and re-tightens each joined region to the bounding box of its member
//! lines. Dilation is only used for the touch test and is never persisted.
//! The loop halts once the region count has shrunk to the aggregation
//! floor, after `patience` consecutive iterations without a merge, or at
//! the iteration cap.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::geom::{dilate, PageDims, Rect};
use crate::{BBox, Error, Line, Result, Scalar};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawSegConfig", into = "RawSegConfig")]
pub struct SegConfig {
    kernel_w: u32,
    kernel_h: u32,
    patience: u32,
    min_aggregation_ratio: f64,
    max_iterations: u32,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct RawSegConfig {
    kernel_w: u32,
    kernel_h: u32,
    patience: u32,
    min_aggregation_ratio: f64,
    max_iterations: u32,
}

impl Default for RawSegConfig {
    fn default() -> Self {
        let d = SegConfig::default();
        d.into()
    }
}

impl From<SegConfig> for RawSegConfig {
    fn from(c: SegConfig) -> Self {
        Self {
            kernel_w: c.kernel_w,
            kernel_h: c.kernel_h,
            patience: c.patience,
            min_aggregation_ratio: c.min_aggregation_ratio,
            max_iterations: c.max_iterations,
        }
    }
}

impl TryFrom<RawSegConfig> for SegConfig {
    type Error = Error;

    fn try_from(r: RawSegConfig) -> Result<Self> {
        SegConfig::new(
            r.kernel_w,
            r.kernel_h,
            r.patience,
            r.min_aggregation_ratio,
            r.max_iterations,
        )
    }
}

impl Default for SegConfig {
    fn default() -> Self {
        Self {
            kernel_w: 2,
            kernel_h: 2,
            patience: 3,
            min_aggregation_ratio: 0.5,
            max_iterations: 50,
        }
    }
}

impl SegConfig {
    pub fn new(
        kernel_w: u32,
        kernel_h: u32,
        patience: u32,
        min_aggregation_ratio: f64,
        max_iterations: u32,
    ) -> Result<Self> {
        if kernel_w == 0 || kernel_h == 0 {
            return Err(Error::Config("kernel dimensions must be at least 1 px".into()));
        }
        if patience == 0 {
            return Err(Error::Config("patience must be at least 1".into()));
        }
        if !(min_aggregation_ratio > 0.0 && min_aggregation_ratio <= 1.0) {
            return Err(Error::Config(format!(
                "min_aggregation_ratio must lie in (0, 1], got {min_aggregation_ratio}"
            )));
        }
        if max_iterations == 0 {
            return Err(Error::Config("max_iterations must be at least 1".into()));
        }
        Ok(Self {
            kernel_w,
            kernel_h,
            patience,
            min_aggregation_ratio,
            max_iterations,
        })
    }

    pub fn kernel_w(&self) -> u32 {
        self.kernel_w
    }
    pub fn kernel_h(&self) -> u32 {
        self.kernel_h
    }
    pub fn patience(&self) -> u32 {
        self.patience
    }
    pub fn min_aggregation_ratio(&self) -> f64 {
        self.min_aggregation_ratio
    }
    pub fn max_iterations(&self) -> u32 {
        self.max_iterations
    }

    pub fn with_max_iterations(self, max_iterations: u32) -> Result<Self> {
        Self::new(
            self.kernel_w,
            self.kernel_h,
            self.patience,
            self.min_aggregation_ratio,
            max_iterations,
        )
    }
}

/// Why the merge loop stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HaltReason {
    /// No lines on the page.
    Empty,
    /// No merge in the last `patience` iterations.
    Patience,
    /// Region count fell to the aggregation floor.
    AggregationRatio,
    /// `max_iterations` reached.
    IterationCap,
}

/// A set of input boxes (by index) and their tight contour.
#[derive(Debug, Clone, PartialEq)]
pub struct Cluster<T> {
    pub members: Vec<usize>,
    pub bbox: Rect<T>,
}

/// Result of running the merge loop on raw boxes.
#[derive(Debug, Clone, PartialEq)]
pub struct Partition<T> {
    pub clusters: Vec<Cluster<T>>,
    pub iterations: u32,
    pub halt: HaltReason,
    /// Region count after each iteration.
    pub counts: Vec<usize>,
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        Self {
            parent: (0..n).collect(),
        }
    }

    fn find(&mut self, mut i: usize) -> usize {
        while self.parent[i] != i {
            self.parent[i] = self.parent[self.parent[i]];
            i = self.parent[i];
        }
        i
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            // Smaller root wins so the result does not depend on pair order.
            let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
            self.parent[hi] = lo;
        }
    }
}

/// Groups item indices into connected components of a symmetric relation.
/// Components come out ordered by their smallest index, members ascending.
pub(crate) fn components(n: usize, mut related: impl FnMut(usize, usize) -> bool) -> Vec<Vec<usize>> {
    let mut uf = UnionFind::new(n);
    for i in 0..n {
        for j in (i + 1)..n {
            if related(i, j) {
                uf.union(i, j);
            }
        }
    }
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut slot = vec![usize::MAX; n];
    for i in 0..n {
        let root = uf.find(i);
        if slot[root] == usize::MAX {
            slot[root] = groups.len();
            groups.push(Vec::new());
        }
        groups[slot[root]].push(i);
    }
    groups
}

/// One dilate-and-merge pass over clusters. Returns the merged clusters and
/// the number of merges (input count minus output count).
pub fn merge_clusters<T: Scalar>(
    clusters: &[Cluster<T>],
    cfg: &SegConfig,
    page: PageDims,
) -> (Vec<Cluster<T>>, usize) {
    let dilated: Vec<Rect<T>> = clusters
        .iter()
        .map(|c| dilate(&c.bbox, cfg.kernel_w, cfg.kernel_h, page))
        .collect();
    let groups = components(clusters.len(), |i, j| dilated[i].touches(&dilated[j]));
    let merged: Vec<Cluster<T>> = groups
        .iter()
        .map(|g| {
            let mut members: Vec<usize> = g
                .iter()
                .flat_map(|&i| clusters[i].members.iter().copied())
                .collect();
            members.sort_unstable();
            let bbox = g[1..]
                .iter()
                .fold(clusters[g[0]].bbox, |acc, &i| acc.union(&clusters[i].bbox));
            Cluster { members, bbox }
        })
        .collect();
    let merges = clusters.len() - merged.len();
    (merged, merges)
}

/// Runs the full merge loop over raw line boxes.
pub fn segment_boxes<T: Scalar>(boxes: &[Rect<T>], cfg: &SegConfig, page: PageDims) -> Partition<T> {
    let mut clusters: Vec<Cluster<T>> = boxes
        .iter()
        .enumerate()
        .map(|(i, b)| Cluster {
            members: vec![i],
            bbox: *b,
        })
        .collect();
    if clusters.is_empty() {
        return Partition {
            clusters,
            iterations: 0,
            halt: HaltReason::Empty,
            counts: Vec::new(),
        };
    }
    let initial = clusters.len() as f64;
    let mut idle = 0u32;
    let mut iterations = 0u32;
    let mut counts = Vec::new();
    let halt = loop {
        let (next, merges) = merge_clusters(&clusters, cfg, page);
        clusters = next;
        iterations += 1;
        counts.push(clusters.len());
        idle = if merges == 0 { idle + 1 } else { 0 };
        if clusters.len() as f64 / initial <= cfg.min_aggregation_ratio {
            break HaltReason::AggregationRatio;
        }
        if idle >= cfg.patience {
            break HaltReason::Patience;
        }
        if iterations >= cfg.max_iterations {
            break HaltReason::IterationCap;
        }
    };
    Partition {
        clusters,
        iterations,
        halt,
        counts,
    }
}

/// Candidate paragraph region on one page.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParagraphRoi {
    /// Tight bounding box of the member lines.
    pub bbox: BBox,
    pub members: BTreeSet<String>,
    pub page: usize,
}

/// Segmentation of one page.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PageSegmentation {
    pub page: usize,
    pub rois: Vec<ParagraphRoi>,
    pub iterations: u32,
    pub halt: HaltReason,
}

fn sort_rois(rois: &mut [ParagraphRoi]) {
    rois.sort_by(|a, b| {
        a.bbox
            .y
            .total_cmp(&b.bbox.y)
            .then(a.bbox.x.total_cmp(&b.bbox.x))
            .then_with(|| a.members.cmp(&b.members))
    });
}

/// One merge pass over existing regions, for callers driving the loop by hand.
pub fn merge_step(
    rois: &[ParagraphRoi],
    cfg: &SegConfig,
    page: PageDims,
) -> (Vec<ParagraphRoi>, usize) {
    let clusters: Vec<Cluster<f64>> = rois
        .iter()
        .enumerate()
        .map(|(i, r)| Cluster {
            members: vec![i],
            bbox: r.bbox,
        })
        .collect();
    let (merged, merges) = merge_clusters(&clusters, cfg, page);
    let page_no = rois.first().map_or(0, |r| r.page);
    let mut out: Vec<ParagraphRoi> = merged
        .into_iter()
        .map(|c| ParagraphRoi {
            bbox: c.bbox,
            members: c
                .members
                .iter()
                .flat_map(|&i| rois[i].members.iter().cloned())
                .collect(),
            page: page_no,
        })
        .collect();
    sort_rois(&mut out);
    (out, merges)
}

/// Segments the lines of one page into paragraph regions.
pub fn segment(lines: &[Line], cfg: &SegConfig, page: PageDims) -> PageSegmentation {
    let boxes: Vec<BBox> = lines.iter().map(|l| l.bbox).collect();
    let partition = segment_boxes(&boxes, cfg, page);
    let page_no = lines.first().map_or(0, |l| l.page);
    let mut rois: Vec<ParagraphRoi> = partition
        .clusters
        .into_iter()
        .map(|c| ParagraphRoi {
            bbox: c.bbox,
            members: c.members.iter().map(|&i| lines[i].id.clone()).collect(),
            page: page_no,
        })
        .collect();
    sort_rois(&mut rois);
    PageSegmentation {
        page: page_no,
        rois,
        iterations: partition.iterations,
        halt: partition.halt,
    }
}
