//! Exact-match precision/recall/F1 and word-level edit distance.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use crate::model::{EntityFile, EntityRecord};
use crate::text::levenshtein;
use crate::Scalar;

/// Joins tokens with single spaces, collapsing whitespace and dropping
/// empty tokens.
pub fn normalize_entity_text<S: AsRef<str>>(tokens: &[S]) -> String {
    tokens
        .iter()
        .flat_map(|t| t.as_ref().split_whitespace())
        .collect::<Vec<_>>()
        .join(" ")
}

/// Word-level edit distance.
pub fn word_levenshtein<S: AsRef<str>>(a: &[S], b: &[S]) -> usize {
    let a: Vec<&str> = a.iter().map(AsRef::as_ref).collect();
    let b: Vec<&str> = b.iter().map(AsRef::as_ref).collect();
    levenshtein(&a, &b)
}

/// Precision, recall and F1 from counts. Empty denominators give 0.
pub fn prf<T: Scalar>(tp: usize, predicted: usize, gold: usize) -> (T, T, T) {
    let ratio = |num: usize, den: usize| {
        if den == 0 {
            T::zero()
        } else {
            T::from_count(num) / T::from_count(den)
        }
    };
    let p = ratio(tp, predicted);
    let r = ratio(tp, gold);
    let f = if p + r == T::zero() {
        T::zero()
    } else {
        T::c(2.0) * p * r / (p + r)
    };
    (p, r, f)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct MatchCounts {
    pub true_positives: usize,
    pub predicted: usize,
    pub gold: usize,
}

impl std::ops::AddAssign for MatchCounts {
    fn add_assign(&mut self, o: Self) {
        self.true_positives += o.true_positives;
        self.predicted += o.predicted;
        self.gold += o.gold;
    }
}

/// Size of the multiset intersection of (type, text) pairs.
pub fn exact_match<K: std::hash::Hash + Eq>(pred: &[K], gold: &[K]) -> MatchCounts {
    let mut remaining: HashMap<&K, usize> = HashMap::new();
    for g in gold {
        *remaining.entry(g).or_default() += 1;
    }
    let mut tp = 0;
    for p in pred {
        if let Some(n) = remaining.get_mut(p) {
            if *n > 0 {
                *n -= 1;
                tp += 1;
            }
        }
    }
    MatchCounts {
        true_positives: tp,
        predicted: pred.len(),
        gold: gold.len(),
    }
}

/// Minimum-cost perfect assignment on a square cost matrix (Hungarian
/// method with potentials). Returns the column assigned to each row and the
/// total cost.
pub fn min_cost_assignment(costs: &[Vec<i64>]) -> (Vec<usize>, i64) {
    let n = costs.len();
    if n == 0 {
        return (Vec::new(), 0);
    }
    assert!(costs.iter().all(|r| r.len() == n), "cost matrix must be square");
    const INF: i64 = i64::MAX / 4;
    // 1-based arrays; index 0 is the virtual start column.
    let mut u = vec![0i64; n + 1];
    let mut v = vec![0i64; n + 1];
    let mut row_of = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    for i in 1..=n {
        row_of[0] = i;
        let mut j0 = 0;
        let mut minv = vec![INF; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = row_of[j0];
            let mut delta = INF;
            let mut j1 = 0;
            for j in 1..=n {
                if !used[j] {
                    let cur = costs[i0 - 1][j - 1] - u[i0] - v[j];
                    if cur < minv[j] {
                        minv[j] = cur;
                        way[j] = j0;
                    }
                    if minv[j] < delta {
                        delta = minv[j];
                        j1 = j;
                    }
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[row_of[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if row_of[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            row_of[j0] = row_of[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut assignment = vec![0; n];
    for j in 1..=n {
        assignment[row_of[j] - 1] = j - 1;
    }
    let total = assignment.iter().enumerate().map(|(i, &j)| costs[i][j]).sum();
    (assignment, total)
}

/// Square cost matrix of size |pred|+|gold| whose optimal perfect
/// assignment is the optimal partial matching of pred to gold, leaving an
/// entity unmatched at the cost of its own length.
pub fn padded_costs(pairwise: &[Vec<i64>], pred_len: &[i64], gold_len: &[i64]) -> Vec<Vec<i64>> {
    let (np, ng) = (pred_len.len(), gold_len.len());
    let forbidden = 1 + pred_len.iter().chain(gold_len).sum::<i64>()
        + pairwise.iter().flatten().sum::<i64>();
    let n = np + ng;
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| match (i < np, j < ng) {
                    (true, true) => pairwise[i][j],
                    // pred i left unmatched
                    (true, false) => if j - ng == i { pred_len[i] } else { forbidden },
                    // gold j left unmatched
                    (false, true) => if i - np == j { gold_len[j] } else { forbidden },
                    (false, false) => 0,
                })
                .collect()
        })
        .collect()
}

/// Total optimal correction cost between two entity lists (token
/// sequences) and the denominator `max(|pred|, |gold|, 1)`.
pub fn assignment_cost<S: AsRef<str>>(pred: &[Vec<S>], gold: &[Vec<S>]) -> (i64, usize) {
    let pairwise: Vec<Vec<i64>> = pred
        .iter()
        .map(|p| gold.iter().map(|g| word_levenshtein(p, g) as i64).collect())
        .collect();
    let pl: Vec<i64> = pred.iter().map(|p| p.len() as i64).collect();
    let gl: Vec<i64> = gold.iter().map(|g| g.len() as i64).collect();
    let (_, total) = min_cost_assignment(&padded_costs(&pairwise, &pl, &gl));
    (total, pred.len().max(gold.len()).max(1))
}

pub fn mean_edit_distance<S: AsRef<str>>(pred: &[Vec<S>], gold: &[Vec<S>]) -> f64 {
    let (total, den) = assignment_cost(pred, gold);
    total as f64 / den as f64
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub true_positives: usize,
    pub predicted_count: usize,
    pub gold_count: usize,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    /// Words to correct per entity.
    pub mean_edit_distance: f64,
    pub documents: usize,
}

impl EvalReport {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn table(&self) -> String {
        format!(
            "{:<12} {:>8}\n{:<12} {:>8}\n{:<12} {:>8}\n{:<12} {:>8}\n{:<12} {:>8.3}\n{:<12} {:>8.3}\n{:<12} {:>8.3}\n{:<12} {:>8.3}\n",
            "documents", self.documents,
            "predicted", self.predicted_count,
            "gold", self.gold_count,
            "matched", self.true_positives,
            "precision", self.precision,
            "recall", self.recall,
            "f1", self.f1,
            "edit_dist", self.mean_edit_distance,
        )
    }
}

fn entity_key(e: &EntityRecord, ignore_case: bool) -> (String, String) {
    let text = normalize_entity_text(&[e.text.as_str()]);
    let text = if ignore_case { text.to_lowercase() } else { text };
    (e.entity_type.clone(), text)
}

/// Scores predicted against gold entity files. Documents are paired by
/// doc_id (a document missing on one side counts as having no entities);
/// counts and edit costs are pooled over documents.
pub fn evaluate(pred: &[EntityFile], gold: &[EntityFile], ignore_case: bool) -> EvalReport {
    let mut docs: BTreeMap<&str, (Vec<&EntityRecord>, Vec<&EntityRecord>)> = BTreeMap::new();
    for f in pred {
        docs.entry(&f.doc_id).or_default().0.extend(f.entities.iter());
    }
    for f in gold {
        docs.entry(&f.doc_id).or_default().1.extend(f.entities.iter());
    }
    let mut counts = MatchCounts::default();
    let mut cost = 0i64;
    let mut den = 0usize;
    for (p, g) in docs.values() {
        let pk: Vec<_> = p.iter().map(|e| entity_key(e, ignore_case)).collect();
        let gk: Vec<_> = g.iter().map(|e| entity_key(e, ignore_case)).collect();
        counts += exact_match(&pk, &gk);
        let words = |keys: &[(String, String)]| -> Vec<Vec<String>> {
            keys.iter()
                .map(|(_, t)| t.split_whitespace().map(str::to_string).collect())
                .collect()
        };
        let (c, d) = assignment_cost(&words(&pk), &words(&gk));
        cost += c;
        den += d;
    }
    let (precision, recall, f1) = prf::<f64>(counts.true_positives, counts.predicted, counts.gold);
    EvalReport {
        true_positives: counts.true_positives,
        predicted_count: counts.predicted,
        gold_count: counts.gold,
        precision,
        recall,
        f1,
        mean_edit_distance: if den == 0 { 0.0 } else { cost as f64 / den as f64 },
        documents: docs.len(),
    }
}
