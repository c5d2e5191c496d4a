use serde::{Deserialize, Serialize};

use super::metrics::rank_by_scores;
use crate::data::{Context, LabeledGrasp, PartLabeledObject};
use crate::error::{CageError, Result};
use crate::model::CageModel;

/// Suitability probability below which every grasp of a context is rejected.
pub const DEFAULT_THRESHOLD: f64 = 0.01;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum RankOutcome {
    /// Grasp indices best first, with their `p(Suitable)`.
    Ranked { order: Vec<usize>, scores: Vec<f64> },
    /// No grasp reached the threshold.
    Rejected { threshold: f64, max_score: f64 },
}

impl RankOutcome {
    pub fn is_rejected(&self) -> bool {
        matches!(self, RankOutcome::Rejected { .. })
    }
}

/// Ranks precomputed scores, rejecting all when the best is below `threshold`.
pub fn filter_scores(scores: &[f64], threshold: f64) -> Result<RankOutcome> {
    if scores.is_empty() {
        return Err(CageError::Empty("grasp list"));
    }
    let order = rank_by_scores(scores);
    let max_score = scores[order[0]];
    if max_score < threshold {
        return Ok(RankOutcome::Rejected { threshold, max_score });
    }
    Ok(RankOutcome::Ranked {
        scores: order.iter().map(|&i| scores[i]).collect(),
        order,
    })
}

pub fn rank_and_filter(
    model: &CageModel,
    context: &Context,
    object: &PartLabeledObject,
    grasps: &[LabeledGrasp],
    threshold: f64,
) -> Result<RankOutcome> {
    if grasps.is_empty() {
        return Err(CageError::Empty("grasp list"));
    }
    filter_scores(&model.score_context(context, object, grasps)?, threshold)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_below_threshold_is_rejected() {
        let r = filter_scores(&[0.001, 0.009, 0.0099], DEFAULT_THRESHOLD).unwrap();
        assert_eq!(
            r,
            RankOutcome::Rejected {
                threshold: 0.01,
                max_score: 0.0099
            }
        );
        assert!(r.is_rejected());
    }

    #[test]
    fn one_above_threshold_ranks_everything() {
        let r = filter_scores(&[0.001, 0.5, 0.002], DEFAULT_THRESHOLD).unwrap();
        assert_eq!(
            r,
            RankOutcome::Ranked {
                order: vec![1, 2, 0],
                scores: vec![0.5, 0.002, 0.001]
            }
        );
        assert!(!filter_scores(&[0.01], DEFAULT_THRESHOLD).unwrap().is_rejected());
        assert!(filter_scores(&[], DEFAULT_THRESHOLD).is_err());
    }
}
