//! Extraction quality metrics. Precision averages, over the generated
//! events, each one's similarity to its most similar gold event of the same
//! rule; recall is the dual over the gold events; F1 is their harmonic mean.
//! A missing partner scores zero. Fleiss' kappa measures inter-annotator
//! agreement on a ratings matrix.

use serde::Serialize;

use super::DataError;

/// Best-match edge recorded while scoring (precision direction: generated
/// event matched to a gold event).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MatchedPair {
    pub generated: usize,
    pub gold: usize,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricsReport {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub matched_pairs: Vec<MatchedPair>,
    /// Degenerate inputs worth surfacing (e.g. an empty generated list,
    /// where precision is 0 by convention).
    pub flags: Vec<String>,
}

/// Scores one flat pair of event lists (a single matching scope).
pub fn event_metrics(
    generated: &[String],
    gold: &[String],
    sim: &dyn Fn(&str, &str) -> f64,
) -> MetricsReport {
    scoped_event_metrics(&[(generated.to_vec(), gold.to_vec())], sim)
}

/// Scores rule-scoped list pairs: matching stays within each scope while the
/// averages run over all generated (respectively gold) events. Gold events
/// may be matched by several generated events; ties take the lowest index.
pub fn scoped_event_metrics(
    scopes: &[(Vec<String>, Vec<String>)],
    sim: &dyn Fn(&str, &str) -> f64,
) -> MetricsReport {
    let mut matched_pairs = Vec::new();
    let mut precision_sum = 0.0;
    let mut recall_sum = 0.0;
    let mut generated_total = 0usize;
    let mut gold_total = 0usize;
    let mut gen_offset = 0usize;
    let mut gold_offset = 0usize;

    for (generated, gold) in scopes {
        generated_total += generated.len();
        gold_total += gold.len();
        for (i, g) in generated.iter().enumerate() {
            if let Some((j, score)) = best_match(g, gold, sim) {
                precision_sum += score;
                matched_pairs.push(MatchedPair {
                    generated: gen_offset + i,
                    gold: gold_offset + j,
                    score,
                });
            }
        }
        for o in gold {
            if let Some((_, score)) = best_match(o, generated, sim) {
                recall_sum += score;
            }
        }
        gen_offset += generated.len();
        gold_offset += gold.len();
    }

    let mut flags = Vec::new();
    let precision = if generated_total == 0 {
        flags.push("empty-generated".to_owned());
        0.0
    } else {
        precision_sum / generated_total as f64
    };
    let recall = if gold_total == 0 {
        flags.push("empty-gold".to_owned());
        0.0
    } else {
        recall_sum / gold_total as f64
    };
    let f1 = if precision + recall > 0.0 {
        2.0 * precision * recall / (precision + recall)
    } else {
        0.0
    };
    MetricsReport {
        precision,
        recall,
        f1,
        matched_pairs,
        flags,
    }
}

fn best_match(
    needle: &str,
    haystack: &[String],
    sim: &dyn Fn(&str, &str) -> f64,
) -> Option<(usize, f64)> {
    let mut best: Option<(usize, f64)> = None;
    for (j, candidate) in haystack.iter().enumerate() {
        let score = sim(needle, candidate).clamp(0.0, 1.0);
        let better = match best {
            None => true,
            Some((_, cur)) => score > cur,
        };
        if better {
            best = Some((j, score));
        }
    }
    best
}

/// Fleiss' kappa over an items-by-categories matrix of rater counts. Every
/// row must sum to the same number of raters (at least two). Returns exactly
/// 1 on perfect observed agreement.
pub fn fleiss_kappa(ratings: &[Vec<u64>]) -> Result<f64, DataError> {
    if ratings.is_empty() {
        return Err(DataError::UnevenRaterCounts);
    }
    let categories = ratings[0].len();
    let raters: u64 = ratings[0].iter().sum();
    if raters < 2 {
        return Err(DataError::UnevenRaterCounts);
    }
    for row in ratings {
        if row.len() != categories || row.iter().sum::<u64>() != raters {
            return Err(DataError::UnevenRaterCounts);
        }
    }

    let n = raters as f64;
    let items = ratings.len() as f64;
    // Per-item agreement: (sum of squared counts - n) / (n (n - 1)).
    let observed: f64 = ratings
        .iter()
        .map(|row| {
            let squares: u64 = row.iter().map(|&c| c * c).sum();
            (squares as f64 - n) / (n * (n - 1.0))
        })
        .sum::<f64>()
        / items;
    if observed == 1.0 {
        return Ok(1.0);
    }
    let expected: f64 = (0..categories)
        .map(|j| {
            let column: u64 = ratings.iter().map(|row| row[j]).sum();
            let share = column as f64 / (items * n);
            share * share
        })
        .sum();
    if expected == 1.0 {
        return Err(DataError::DegenerateAgreement);
    }
    Ok((observed - expected) / (1.0 - expected))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::abstraction::lexical_similarity;

    fn identity(a: &str, b: &str) -> f64 {
        if a == b {
            1.0
        } else {
            0.0
        }
    }

    fn strings(items: &[&str]) -> Vec<String> {
        items.iter().map(|s| (*s).to_owned()).collect()
    }

    #[test]
    fn identical_lists_score_one() {
        let list = strings(&["a", "b", "c"]);
        let report = event_metrics(&list, &list, &identity);
        assert_eq!(report.precision, 1.0);
        assert_eq!(report.recall, 1.0);
        assert_eq!(report.f1, 1.0);
    }

    #[test]
    fn empty_generated_scores_zero_and_is_flagged() {
        let report = event_metrics(&[], &strings(&["a"]), &identity);
        assert_eq!(report.precision, 0.0);
        assert_eq!(report.recall, 0.0);
        assert_eq!(report.f1, 0.0);
        assert!(report.flags.contains(&"empty-generated".to_owned()));
    }

    #[test]
    fn precision_averages_best_scores() {
        // Two generated events with best-match scores 0.8 and 0.6.
        let sim = |a: &str, b: &str| -> f64 {
            match (a, b) {
                ("g1", "o1") => 0.8,
                ("g1", "o2") => 0.1,
                ("g2", "o1") => 0.2,
                ("g2", "o2") => 0.6,
                _ => 0.0,
            }
        };
        let report = event_metrics(&strings(&["g1", "g2"]), &strings(&["o1", "o2"]), &sim);
        assert!((report.precision - 0.7).abs() < 1e-12);
    }

    #[test]
    fn ties_take_the_lowest_gold_index() {
        let constant = |_: &str, _: &str| 0.5;
        let report = event_metrics(&strings(&["g"]), &strings(&["o1", "o2"]), &constant);
        assert_eq!(report.matched_pairs.len(), 1);
        assert_eq!(report.matched_pairs[0].gold, 0);
    }

    #[test]
    fn gold_reuse_is_allowed() {
        // Both generated events match the single gold event.
        let report = event_metrics(&strings(&["a", "a"]), &strings(&["a"]), &identity);
        assert_eq!(report.precision, 1.0);
        assert_eq!(report.recall, 1.0);
    }

    #[test]
    fn scoping_prevents_cross_rule_matches() {
        let scopes = vec![
            (strings(&["a"]), strings(&["b"])),
            (strings(&["b"]), strings(&["a"])),
        ];
        let report = scoped_event_metrics(&scopes, &identity);
        // Within each scope nothing matches, even though the other scope
        // holds an identical event.
        assert_eq!(report.precision, 0.0);
        let flat = event_metrics(
            &strings(&["a", "b"]),
            &strings(&["b", "a"]),
            &identity,
        );
        assert_eq!(flat.precision, 1.0);
    }

    #[test]
    fn symmetric_similarity_swaps_precision_and_recall() {
        let gen = strings(&["milk is sold", "alarm sounds loudly"]);
        let gold = strings(&["the milk sold", "employees wash hands"]);
        let forward = event_metrics(&gen, &gold, &lexical_similarity);
        let backward = event_metrics(&gold, &gen, &lexical_similarity);
        assert!((forward.precision - backward.recall).abs() < 1e-12);
        assert!((forward.recall - backward.precision).abs() < 1e-12);
    }

    #[test]
    fn kappa_perfect_agreement_is_exactly_one() {
        let kappa = fleiss_kappa(&[vec![3, 0], vec![0, 3]]).unwrap();
        assert_eq!(kappa, 1.0);
    }

    #[test]
    fn kappa_hand_derived_case() {
        // Rows (2,1) and (1,2) with three raters: observed 1/3, expected 1/2.
        let kappa = fleiss_kappa(&[vec![2, 1], vec![1, 2]]).unwrap();
        assert!((kappa - (-1.0 / 3.0)).abs() < 1e-12, "kappa = {kappa}");
    }

    #[test]
    fn kappa_complete_disagreement() {
        // Two raters split on both items: observed 0, expected 1/2.
        let kappa = fleiss_kappa(&[vec![1, 1], vec![1, 1]]).unwrap();
        assert!((kappa - (-1.0)).abs() < 1e-12);
    }

    #[test]
    fn kappa_rejects_uneven_rows() {
        let err = fleiss_kappa(&[vec![2, 1], vec![1, 1]]).unwrap_err();
        assert_eq!(err, DataError::UnevenRaterCounts);
    }

    #[test]
    fn kappa_never_exceeds_one() {
        // Deterministic sweep over small matrices with three raters.
        for a in 0..=3u64 {
            for b in 0..=3u64 {
                for c in 0..=3u64 {
                    let rows = vec![vec![a, 3 - a], vec![b, 3 - b], vec![c, 3 - c]];
                    match fleiss_kappa(&rows) {
                        Ok(kappa) => assert!(kappa <= 1.0 + 1e-12, "kappa {kappa} for {rows:?}"),
                        Err(DataError::DegenerateAgreement) => {}
                        Err(other) => panic!("unexpected error {other:?}"),
                    }
                }
            }
        }
    }

    #[test]
    fn kappa_invariant_under_permutations() {
        let base = vec![vec![2, 1, 0], vec![0, 2, 1], vec![1, 1, 1]];
        let k1 = fleiss_kappa(&base).unwrap();
        // Swap category columns.
        let cols: Vec<Vec<u64>> = base.iter().map(|r| vec![r[2], r[0], r[1]]).collect();
        let k2 = fleiss_kappa(&cols).unwrap();
        // Shuffle item rows.
        let rows = vec![base[2].clone(), base[0].clone(), base[1].clone()];
        let k3 = fleiss_kappa(&rows).unwrap();
        assert!((k1 - k2).abs() < 1e-12);
        assert!((k1 - k3).abs() < 1e-12);
    }
}
