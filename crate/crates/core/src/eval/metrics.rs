//! Average precision with the suitable-then-neutral relevance fallback.

use serde::{Deserialize, Serialize};

use crate::data::GraspLabel;
use crate::error::{CageError, Result};

/// Indices sorted by descending score; equal scores keep their input order.
pub fn rank_by_scores(scores: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));
    order
}

/// A ranking of grasps with their scores and ground-truth labels, best first.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedList {
    /// Original grasp indices in ranked order.
    pub order: Vec<usize>,
    pub scores: Vec<f64>,
    pub labels: Vec<GraspLabel>,
}

impl RankedList {
    pub fn from_scores(scores: &[f64], labels: &[GraspLabel]) -> Result<Self> {
        if scores.len() != labels.len() {
            return Err(CageError::Shape(format!("{} scores for {} labels", scores.len(), labels.len())));
        }
        let order = rank_by_scores(scores);
        Ok(Self::from_order(order, scores, labels))
    }

    fn from_order(order: Vec<usize>, scores: &[f64], labels: &[GraspLabel]) -> Self {
        RankedList {
            scores: order.iter().map(|&i| scores[i]).collect(),
            labels: order.iter().map(|&i| labels[i]).collect(),
            order,
        }
    }

    /// Ranking given directly as a permutation; scores descend with rank.
    pub fn from_permutation(order: Vec<usize>, labels: &[GraspLabel]) -> Result<Self> {
        let mut seen = vec![false; labels.len()];
        if order.len() != labels.len() || order.iter().any(|&i| i >= labels.len() || std::mem::replace(&mut seen[i], true)) {
            return Err(CageError::Invariant("ranking is not a permutation of the grasps".into()));
        }
        let n = labels.len();
        let mut scores = vec![0.0; n];
        for (k, &i) in order.iter().enumerate() {
            scores[i] = (n - k) as f64;
        }
        Ok(Self::from_order(order, &scores, labels))
    }

    pub fn average_precision(&self) -> Result<Option<f64>> {
        average_precision(&self.labels)
    }
}

/// Which label counts as relevant for a context, if any.
pub fn relevant_label(labels: &[GraspLabel]) -> Option<GraspLabel> {
    [GraspLabel::Suitable, GraspLabel::Neutral]
        .into_iter()
        .find(|l| labels.contains(l))
}

/// Non-interpolated AP of labels in ranked order.
///
/// Suitable grasps are relevant; without any, Neutral ones are. `None` when
/// the context has neither (AP undefined).
pub fn average_precision(ranked: &[GraspLabel]) -> Result<Option<f64>> {
    if ranked.is_empty() {
        return Err(CageError::Empty("ranked label list"));
    }
    let Some(relevant) = relevant_label(ranked) else {
        return Ok(None);
    };
    let mut hits = 0usize;
    let mut sum = 0.0;
    for (k, &l) in ranked.iter().enumerate() {
        if l == relevant {
            hits += 1;
            sum += hits as f64 / (k + 1) as f64;
        }
    }
    Ok(Some(sum / hits as f64))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MapSummary {
    pub map: f64,
    /// Contexts whose AP was defined.
    pub contexts: usize,
    /// Contexts excluded because they had neither Suitable nor Neutral grasps.
    pub excluded: usize,
}

pub fn mean_ap(aps: &[Option<f64>]) -> Result<MapSummary> {
    let defined: Vec<f64> = aps.iter().flatten().copied().collect();
    if defined.is_empty() {
        return Err(CageError::Empty("contexts with a defined AP"));
    }
    Ok(MapSummary {
        map: defined.iter().sum::<f64>() / defined.len() as f64,
        contexts: defined.len(),
        excluded: aps.len() - defined.len(),
    })
}

/// Expected AP of a uniformly random ranking of `n` items of which `r` are relevant:
/// `(1/n) [H_n + (r-1)/(n-1) (n - H_n)]`.
pub fn expected_random_ap(n: usize, r: usize) -> Result<f64> {
    if r == 0 || r > n {
        return Err(CageError::Invariant(format!("need 1 <= relevant ({r}) <= items ({n})")));
    }
    if n == 1 {
        return Ok(1.0);
    }
    let nf = n as f64;
    let h: f64 = (1..=n).map(|k| 1.0 / k as f64).sum();
    Ok((h + (r as f64 - 1.0) / (nf - 1.0) * (nf - h)) / nf)
}

/// Expected random AP of one context's labels, `None` when AP is undefined.
pub fn expected_random_ap_for(labels: &[GraspLabel]) -> Result<Option<f64>> {
    let Some(rel) = relevant_label(labels) else {
        return Ok(None);
    };
    let r = labels.iter().filter(|&&l| l == rel).count();
    expected_random_ap(labels.len(), r).map(Some)
}
