//! Scoring a candidate model against a ground truth model.
//!
//! Elements are aligned with a deterministic lexical matcher: exact match
//! after normalization (or a synonym / manual override hit) scores 1.0,
//! otherwise the token-set Jaccard index. Pairs are accepted greedily in
//! descending score order, one-to-one, if they reach the threshold. Only
//! actors and use cases are scored; relationships and descriptions are not.

use alloc::collections::BTreeSet;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::model::UseCaseModel;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatcherConfig {
    pub jaccard_threshold: f64,
    pub stopwords: BTreeSet<String>,
    /// Pairs of phrases treated as equivalent (compared after normalization).
    #[serde(default)]
    pub synonym_map: Vec<(String, String)>,
    /// Explicit `(truth, candidate)` pairs that always match.
    #[serde(default)]
    pub manual_overrides: Vec<(String, String)>,
}

impl Default for MatcherConfig {
    fn default() -> Self {
        MatcherConfig {
            jaccard_threshold: 0.5,
            stopwords: ["a", "an", "the", "to", "of", "and"]
                .into_iter()
                .map(String::from)
                .collect(),
            synonym_map: Vec::new(),
            manual_overrides: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum EvalError {
    #[error("E-BAD-THRESHOLD: jaccard_threshold must lie in [0, 1]")]
    BadThreshold,
}

impl MatcherConfig {
    pub fn validate(&self) -> Result<(), EvalError> {
        if (0.0..=1.0).contains(&self.jaccard_threshold) {
            Ok(())
        } else {
            Err(EvalError::BadThreshold)
        }
    }

    fn tokens(&self, name: &str) -> Vec<String> {
        let lowered: String = name
            .chars()
            .flat_map(char::to_lowercase)
            .map(|c| if c.is_alphanumeric() { c } else { ' ' })
            .collect();
        lowered
            .split_whitespace()
            .filter(|w| !self.stopwords.contains(*w))
            .map(String::from)
            .collect()
    }

    /// Lowercased, punctuation-free, stopword-free form of `name`.
    pub fn normalize_name(&self, name: &str) -> String {
        self.tokens(name).join(" ")
    }

    fn score(&self, truth: &str, candidate: &str) -> f64 {
        let nt = self.normalize_name(truth);
        let nc = self.normalize_name(candidate);
        let exact = if nt.is_empty() && nc.is_empty() {
            truth.trim().to_lowercase() == candidate.trim().to_lowercase()
        } else {
            nt == nc
        };
        if exact {
            return 1.0;
        }
        let synonym = self.synonym_map.iter().any(|(a, b)| {
            let (a, b) = (self.normalize_name(a), self.normalize_name(b));
            (a == nt && b == nc) || (a == nc && b == nt)
        });
        let overridden = self.manual_overrides.iter().any(|(t, c)| {
            self.normalize_name(t) == nt && self.normalize_name(c) == nc
        });
        if synonym || overridden {
            return 1.0;
        }
        let ta: BTreeSet<String> = self.tokens(truth).into_iter().collect();
        let tb: BTreeSet<String> = self.tokens(candidate).into_iter().collect();
        let union = ta.union(&tb).count();
        if union == 0 {
            return 0.0;
        }
        ta.intersection(&tb).count() as f64 / union as f64
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Match {
    pub truth_index: usize,
    pub candidate_index: usize,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Alignment {
    pub matches: Vec<Match>,
    pub unmatched_truth: Vec<usize>,
    pub unmatched_candidate: Vec<usize>,
}

/// Greedy one-to-one alignment of two name lists.
///
/// Ties in score are broken by (truth name, candidate name), then by
/// position, so the matched name pairs do not depend on input order.
pub fn align_elements<T: AsRef<str>, C: AsRef<str>>(
    truth: &[T],
    candidate: &[C],
    cfg: &MatcherConfig,
) -> Alignment {
    let mut pairs = Vec::new();
    for (ti, t) in truth.iter().enumerate() {
        for (ci, c) in candidate.iter().enumerate() {
            let score = cfg.score(t.as_ref(), c.as_ref());
            if score >= cfg.jaccard_threshold && score > 0.0 {
                pairs.push((score, ti, ci));
            }
        }
    }
    pairs.sort_by(|a, b| {
        b.0.total_cmp(&a.0)
            .then_with(|| truth[a.1].as_ref().cmp(truth[b.1].as_ref()))
            .then_with(|| candidate[a.2].as_ref().cmp(candidate[b.2].as_ref()))
            .then_with(|| a.1.cmp(&b.1))
            .then_with(|| a.2.cmp(&b.2))
    });
    let mut used_t = alloc::vec![false; truth.len()];
    let mut used_c = alloc::vec![false; candidate.len()];
    let mut matches = Vec::new();
    for (score, ti, ci) in pairs {
        if !used_t[ti] && !used_c[ci] {
            used_t[ti] = true;
            used_c[ci] = true;
            matches.push(Match {
                truth_index: ti,
                candidate_index: ci,
                score,
            });
        }
    }
    matches.sort_by_key(|m| (m.truth_index, m.candidate_index));
    Alignment {
        matches,
        unmatched_truth: (0..truth.len()).filter(|&i| !used_t[i]).collect(),
        unmatched_candidate: (0..candidate.len()).filter(|&i| !used_c[i]).collect(),
    }
}

/// Confusion counts and the metrics derived from them. A metric whose
/// denominator is zero is `None` (undefined), never 0 or 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub tp: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
    pub precision: Option<f64>,
    pub recall: Option<f64>,
    pub f1: Option<f64>,
}

impl Metrics {
    pub fn from_counts(tp: usize, fp: usize, fn_: usize) -> Self {
        let ratio = |num: usize, den: usize| (den > 0).then(|| num as f64 / den as f64);
        let precision = ratio(tp, tp + fp);
        let recall = ratio(tp, tp + fn_);
        let f1 = match (precision, recall) {
            (Some(p), Some(r)) if p + r > 0.0 => Some(2.0 * p * r / (p + r)),
            _ => None,
        };
        Metrics {
            tp,
            fp,
            fn_,
            precision,
            recall,
            f1,
        }
    }

    pub fn has_undefined(&self) -> bool {
        self.precision.is_none() || self.recall.is_none() || self.f1.is_none()
    }
}

/// Rounds half away from zero to two decimals, for display.
pub fn round2(x: f64) -> f64 {
    libm::round(x * 100.0) / 100.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ElementReport {
    #[serde(flatten)]
    pub metrics: Metrics,
    /// `(truth_id, candidate_id, score)`.
    pub matches: Vec<(String, String, f64)>,
    pub unmatched_truth: Vec<String>,
    pub unmatched_candidate: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub actor_metrics: ElementReport,
    pub usecase_metrics: ElementReport,
}

impl EvalReport {
    pub fn has_undefined(&self) -> bool {
        self.actor_metrics.metrics.has_undefined() || self.usecase_metrics.metrics.has_undefined()
    }
}

fn element_report(truth: &[(&str, &str)], cand: &[(&str, &str)], cfg: &MatcherConfig) -> ElementReport {
    let tn: Vec<&str> = truth.iter().map(|(_, n)| *n).collect();
    let cn: Vec<&str> = cand.iter().map(|(_, n)| *n).collect();
    let al = align_elements(&tn, &cn, cfg);
    let tp = al.matches.len();
    ElementReport {
        metrics: Metrics::from_counts(tp, cand.len() - tp, truth.len() - tp),
        matches: al
            .matches
            .iter()
            .map(|m| (truth[m.truth_index].0.into(), cand[m.candidate_index].0.into(), m.score))
            .collect(),
        unmatched_truth: al.unmatched_truth.iter().map(|&i| truth[i].0.into()).collect(),
        unmatched_candidate: al.unmatched_candidate.iter().map(|&i| cand[i].0.into()).collect(),
    }
}

/// Precision/recall/F1 of `candidate` against `truth`, for actors and use
/// cases independently.
pub fn score_model(truth: &UseCaseModel, candidate: &UseCaseModel, cfg: &MatcherConfig) -> EvalReport {
    let actors = |m: &UseCaseModel| -> Vec<(String, String)> {
        m.actors.iter().map(|a| (a.id.clone(), a.name.clone())).collect()
    };
    let ucs = |m: &UseCaseModel| -> Vec<(String, String)> {
        m.use_cases.iter().map(|u| (u.id.clone(), u.title.clone())).collect()
    };
    let (ta, ca, tu, cu) = (actors(truth), actors(candidate), ucs(truth), ucs(candidate));
    EvalReport {
        actor_metrics: element_report(&borrow_pairs(&ta), &borrow_pairs(&ca), cfg),
        usecase_metrics: element_report(&borrow_pairs(&tu), &borrow_pairs(&cu), cfg),
    }
}

fn borrow_pairs(v: &[(String, String)]) -> Vec<(&str, &str)> {
    v.iter().map(|(a, b)| (a.as_str(), b.as_str())).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Actor, Association, UseCase};
    use alloc::vec;

    #[test]
    fn identical_lists_match_fully() {
        let names = ["Borrow book", "Return book", "Pay fine"];
        let al = align_elements(&names, &names, &MatcherConfig::default());
        assert_eq!(al.matches.len(), 3);
        assert!(al.matches.iter().all(|m| m.score == 1.0 && m.truth_index == m.candidate_index));
    }

    #[test]
    fn normalization_drops_stopwords_and_case() {
        let al = align_elements(&["Place an order"], &["place order"], &MatcherConfig::default());
        assert_eq!(al.matches.len(), 1);
        assert_eq!(al.matches[0].score, 1.0);
    }

    #[test]
    fn disjoint_tokens_do_not_match() {
        let al = align_elements(&["Login"], &["Generate report"], &MatcherConfig::default());
        assert!(al.matches.is_empty());
        assert_eq!((al.unmatched_truth, al.unmatched_candidate), (vec![0], vec![0]));
    }

    #[test]
    fn jaccard_threshold() {
        let cfg = MatcherConfig::default();
        // {borrow, book} vs {borrow, books}: 1/3
        assert!(align_elements(&["Borrow book"], &["Borrow books"], &cfg).matches.is_empty());
        // {renew, loan, online} vs {renew, loan}: 2/3
        let al = align_elements(&["Renew loan online"], &["Renew a loan"], &cfg);
        assert!((al.matches[0].score - 2.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn greedy_is_one_to_one_and_prefers_best() {
        let cfg = MatcherConfig::default();
        let truth = ["Search catalog", "Search catalog online"];
        let cand = ["Search catalog online"];
        let al = align_elements(&truth, &cand, &cfg);
        assert_eq!(al.matches.len(), 1);
        assert_eq!(al.matches[0].truth_index, 1);
    }

    #[test]
    fn synonyms_and_overrides() {
        let mut cfg = MatcherConfig::default();
        assert!(align_elements(&["Sign in"], &["Log in"], &cfg).matches.is_empty());
        cfg.synonym_map.push(("log in".into(), "sign in".into()));
        assert_eq!(align_elements(&["Sign in"], &["Log in"], &cfg).matches.len(), 1);
        cfg.manual_overrides.push(("Manage stock".into(), "Update inventory".into()));
        assert_eq!(align_elements(&["Manage stock"], &["Update inventory"], &cfg).matches.len(), 1);
        assert!(align_elements(&["Update inventory"], &["Manage stock"], &cfg).matches.is_empty());
    }

    #[test]
    fn metric_identities() {
        let m = Metrics::from_counts(2, 1, 1);
        let two_thirds = 2.0 / 3.0;
        assert!((m.precision.unwrap() - two_thirds).abs() < 1e-12);
        assert!((m.recall.unwrap() - two_thirds).abs() < 1e-12);
        assert!((m.f1.unwrap() - two_thirds).abs() < 1e-12);
        let undefined = Metrics::from_counts(0, 0, 3);
        assert_eq!((undefined.precision, undefined.recall, undefined.f1), (None, Some(0.0), None));
        assert!(undefined.has_undefined());
    }

    #[test]
    fn table_row_from_counts() {
        let m = Metrics::from_counts(7, 1, 2);
        assert_eq!(round2(m.precision.unwrap()), 0.88);
        assert_eq!(round2(m.recall.unwrap()), 0.78);
        assert_eq!(round2(m.f1.unwrap()), 0.82);
    }

    fn model(ucs: &[&str]) -> UseCaseModel {
        let mut m = UseCaseModel::empty("Library");
        m.actors.push(Actor::new("A1", "Member"));
        for (i, t) in ucs.iter().enumerate() {
            let id = alloc::format!("UC{}", i + 1);
            m.use_cases.push(UseCase::new(id.clone(), *t, ["A1"]));
            m.associations.push(Association::new("A1", id));
        }
        m
    }

    #[test]
    fn score_identity_and_overlap() {
        let cfg = MatcherConfig::default();
        let truth = model(&["Borrow book", "Return book", "Pay fine"]);
        let r = score_model(&truth, &truth, &cfg);
        assert_eq!(r.usecase_metrics.metrics.f1, Some(1.0));
        assert_eq!(r.actor_metrics.metrics.f1, Some(1.0));

        let cand = model(&["Borrow book", "Return book", "Reserve room"]);
        let r = score_model(&truth, &cand, &cfg);
        let m = r.usecase_metrics.metrics;
        assert_eq!((m.tp, m.fp, m.fn_), (2, 1, 1));
        assert!((m.f1.unwrap() - 2.0 / 3.0).abs() < 1e-12);
        assert_eq!(r.usecase_metrics.unmatched_truth, vec!["UC3"]);
        assert_eq!(r.usecase_metrics.matches[0], ("UC1".into(), "UC1".into(), 1.0));
    }

    #[test]
    fn relationships_are_not_scored() {
        let cfg = MatcherConfig::default();
        let truth = model(&["Borrow book"]);
        let mut cand = truth.clone();
        cand.associations.clear();
        cand.sync_actor_links();
        assert_eq!(score_model(&truth, &cand, &cfg), score_model(&truth, &truth, &cfg));
    }

    #[test]
    fn threshold_validation() {
        let cfg = MatcherConfig {
            jaccard_threshold: 1.5,
            ..MatcherConfig::default()
        };
        assert_eq!(cfg.validate(), Err(EvalError::BadThreshold));
    }
}
