//! Score-level statistics for the controlled audit: the percentile
//! threshold, TPR at a threshold, and the control-vs-shifted AUC-ROC.

use crate::error::{Error, Result};

fn validate_scores(name: &str, scores: &[f64]) -> Result<()> {
    if scores.is_empty() {
        return Err(Error::InvalidScores(format!("{name} sample is empty")));
    }
    if scores.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidScores(format!(
            "{name} sample contains a non-finite value"
        )));
    }
    Ok(())
}

/// Nearest-rank percentile: sort ascending and take the value at 1-based
/// index `ceil(p * n)`. The threshold is always a member of the sample.
pub fn percentile_threshold(scores: &[f64], p: f64) -> Result<f64> {
    validate_scores("control", scores)?;
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::InvalidConfig(format!(
            "percentile must lie strictly between 0 and 1, got {p}"
        )));
    }
    let mut sorted = scores.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let rank = (p * sorted.len() as f64).ceil() as usize;
    let rank = rank.clamp(1, sorted.len());
    Ok(sorted[rank - 1])
}

/// Fraction of scores strictly above the threshold. Scores equal to the
/// threshold do not count as detections, which keeps the null rejection
/// rate at or below the nominal rate.
pub fn tpr_at_threshold(scores: &[f64], threshold: f64) -> Result<f64> {
    validate_scores("shifted", scores)?;
    let hits = scores.iter().filter(|&&v| v > threshold).count();
    Ok(hits as f64 / scores.len() as f64)
}

/// Area under the ROC curve of shifted scores against control scores,
/// computed as the Mann-Whitney statistic with midrank tie handling:
/// P(shifted > control) + 0.5 * P(shifted = control).
pub fn auc_roc(control: &[f64], shifted: &[f64]) -> Result<f64> {
    validate_scores("control", control)?;
    validate_scores("shifted", shifted)?;

    // (value, is_shifted), sorted by value.
    let mut combined: Vec<(f64, bool)> = control
        .iter()
        .map(|&v| (v, false))
        .chain(shifted.iter().map(|&v| (v, true)))
        .collect();
    combined.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());

    // Midranks: every member of a tie block receives the block's average
    // 1-based rank.
    let mut rank_sum_shifted = 0.0f64;
    let mut i = 0;
    while i < combined.len() {
        let mut j = i;
        while j < combined.len() && combined[j].0 == combined[i].0 {
            j += 1;
        }
        let midrank = (i + 1 + j) as f64 / 2.0; // average of ranks i+1..=j
        for item in &combined[i..j] {
            if item.1 {
                rank_sum_shifted += midrank;
            }
        }
        i = j;
    }

    let n_c = control.len() as f64;
    let n_s = shifted.len() as f64;
    let u = rank_sum_shifted - n_s * (n_s + 1.0) / 2.0;
    Ok(u / (n_c * n_s))
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Brute-force AUC oracle: count wins and half-ties over all pairs.
    pub fn auc_by_pairs(control: &[f64], shifted: &[f64]) -> f64 {
        let mut score = 0.0;
        for &s in shifted {
            for &c in control {
                if s > c {
                    score += 1.0;
                } else if s == c {
                    score += 0.5;
                }
            }
        }
        score / (control.len() * shifted.len()) as f64
    }

    #[test]
    fn percentile_of_one_to_ten_at_ninety() {
        let scores: Vec<f64> = (1..=10).map(|v| v as f64).collect();
        assert_eq!(percentile_threshold(&scores, 0.9).unwrap(), 9.0);
    }

    #[test]
    fn percentile_of_singleton_is_the_value() {
        assert_eq!(percentile_threshold(&[5.0], 0.9).unwrap(), 5.0);
    }

    #[test]
    fn percentile_with_ties_takes_nearest_rank() {
        assert_eq!(percentile_threshold(&[2.0, 2.0, 2.0, 5.0], 0.9).unwrap(), 5.0);
    }

    #[test]
    fn percentile_rejects_empty_and_non_finite() {
        assert!(percentile_threshold(&[], 0.9).is_err());
        assert!(percentile_threshold(&[1.0, f64::NAN], 0.9).is_err());
        assert!(percentile_threshold(&[1.0], 0.0).is_err());
        assert!(percentile_threshold(&[1.0], 1.0).is_err());
    }

    #[test]
    fn tpr_counts_strict_exceedances_only() {
        assert_eq!(tpr_at_threshold(&[1.0, 2.0, 3.0, 4.0], 2.0).unwrap(), 0.5);
        // Threshold equal to the max: nothing is strictly above.
        assert_eq!(tpr_at_threshold(&[4.0, 4.0], 4.0).unwrap(), 0.0);
    }

    #[test]
    fn auc_interleaved_example() {
        let auc = auc_roc(&[1.0, 3.0], &[2.0, 4.0]).unwrap();
        assert_eq!(auc, 0.75);
    }

    #[test]
    fn auc_perfect_separation_is_one() {
        let auc = auc_roc(&[1.0, 2.0, 3.0], &[4.0, 5.0]).unwrap();
        assert_eq!(auc, 1.0);
    }

    #[test]
    fn auc_of_identical_constants_is_half() {
        let auc = auc_roc(&[2.0, 2.0, 2.0], &[2.0, 2.0]).unwrap();
        assert_eq!(auc, 0.5);
    }

    #[test]
    fn auc_matches_pair_counting_on_tied_data() {
        let control = [1.0, 2.0, 2.0, 3.0, 5.0];
        let shifted = [2.0, 2.0, 4.0, 5.0];
        assert!(
            (auc_roc(&control, &shifted).unwrap() - auc_by_pairs(&control, &shifted)).abs()
                < 1e-12
        );
    }

    #[test]
    fn auc_complement_identity() {
        let a = [0.1, 0.4, 0.4, 0.9];
        let b = [0.2, 0.4, 0.7];
        let ab = auc_roc(&a, &b).unwrap();
        let ba = auc_roc(&b, &a).unwrap();
        assert!((ab + ba - 1.0).abs() < 1e-12);
    }
}
