use std::collections::BTreeMap;

use crate::error::{Error, Result};

/// Binary confusion counts with "yes" as the positive class.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ConfusionMatrix {
    pub tp: u64,
    pub fp: u64,
    pub tn: u64,
    pub fn_: u64,
}

impl ConfusionMatrix {
    pub fn total(&self) -> u64 {
        self.tp + self.fp + self.tn + self.fn_
    }
}

pub fn confusion(preds: &BTreeMap<String, bool>, gold: &BTreeMap<String, bool>) -> Result<ConfusionMatrix> {
    let missing_in_predictions: Vec<String> =
        gold.keys().filter(|k| !preds.contains_key(*k)).cloned().collect();
    let missing_in_gold: Vec<String> =
        preds.keys().filter(|k| !gold.contains_key(*k)).cloned().collect();
    if !missing_in_predictions.is_empty() || !missing_in_gold.is_empty() {
        return Err(Error::KeyMismatch {
            missing_in_predictions,
            missing_in_gold,
        });
    }
    let mut cm = ConfusionMatrix::default();
    for (id, &g) in gold {
        match (preds[id], g) {
            (true, true) => cm.tp += 1,
            (true, false) => cm.fp += 1,
            (false, false) => cm.tn += 1,
            (false, true) => cm.fn_ += 1,
        }
    }
    Ok(cm)
}

/// Metric values; an undefined ratio (0/0) is reported as 0 and named in
/// `undefined`.
#[derive(Debug, Clone, PartialEq)]
pub struct Metrics {
    pub sensitivity: f64,
    pub specificity: f64,
    pub ppv: f64,
    pub f1_positive: f64,
    pub f1_weighted: f64,
    pub undefined: Vec<&'static str>,
}

impl Metrics {
    pub fn is_undefined(&self, name: &str) -> bool {
        self.undefined.contains(&name)
    }
}

fn ratio(num: u64, den: u64) -> Option<f64> {
    (den > 0).then(|| num as f64 / den as f64)
}

pub fn metrics(cm: &ConfusionMatrix) -> Metrics {
    let &ConfusionMatrix { tp, fp, tn, fn_ } = cm;
    let mut undefined = Vec::new();
    let mut take = |name: &'static str, v: Option<f64>| {
        v.unwrap_or_else(|| {
            undefined.push(name);
            0.0
        })
    };
    let sensitivity = take("sensitivity", ratio(tp, tp + fn_));
    let specificity = take("specificity", ratio(tn, tn + fp));
    let ppv = take("ppv", ratio(tp, tp + fp));
    let f1_positive = take("f1_positive", ratio(2 * tp, 2 * tp + fp + fn_));
    let f1_negative = ratio(2 * tn, 2 * tn + fn_ + fp).unwrap_or(0.0);
    let (pos, neg) = (tp + fn_, tn + fp);
    let f1_weighted = take(
        "f1_weighted",
        (pos + neg > 0).then(|| (pos as f64 * f1_positive + neg as f64 * f1_negative) / (pos + neg) as f64),
    );
    Metrics {
        sensitivity,
        specificity,
        ppv,
        f1_positive,
        f1_weighted,
        undefined,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cm(tp: u64, fp: u64, tn: u64, fn_: u64) -> ConfusionMatrix {
        ConfusionMatrix { tp, fp, tn, fn_ }
    }

    fn maps(preds: &[bool], gold: &[bool]) -> (BTreeMap<String, bool>, BTreeMap<String, bool>) {
        let p = preds.iter().enumerate().map(|(i, &b)| (format!("d{i}"), b)).collect();
        let g = gold.iter().enumerate().map(|(i, &b)| (format!("d{i}"), b)).collect();
        (p, g)
    }

    #[test]
    fn perfect_predictions() {
        let gold = [true, false, true, false, false];
        let (p, g) = maps(&gold, &gold);
        assert_eq!(confusion(&p, &g).unwrap(), cm(2, 0, 3, 0));
    }

    #[test]
    fn all_negative_on_imbalanced_split() {
        let gold: Vec<bool> = (0..120).map(|i| i < 14).collect();
        let (p, g) = maps(&[false; 120], &gold);
        let c = confusion(&p, &g).unwrap();
        assert_eq!(c, cm(0, 0, 106, 14));
        let m = metrics(&c);
        assert_eq!(m.f1_positive, 0.0);
        assert!((m.f1_weighted - 106.0 * (212.0 / 226.0) / 120.0).abs() < 1e-12);
        assert!((m.f1_weighted - 0.828614).abs() < 1e-6);
        assert!(m.is_undefined("ppv"));
        assert!(!m.is_undefined("sensitivity"));
    }

    #[test]
    fn inverted_predictor_swaps_counts() {
        let gold = [true, false, false, true, false];
        let inv: Vec<bool> = gold.iter().map(|b| !b).collect();
        let (p, g) = maps(&gold, &gold);
        let straight = confusion(&p, &g).unwrap();
        let (p, g) = maps(&inv, &gold);
        let flipped = confusion(&p, &g).unwrap();
        assert_eq!((flipped.fn_, flipped.fp), (straight.tp, straight.tn));
        assert_eq!((flipped.tp, flipped.tn), (0, 0));
    }

    #[test]
    fn mismatched_keys() {
        let (p, mut g) = maps(&[true, false], &[true, false]);
        g.insert("extra".into(), true);
        match confusion(&p, &g) {
            Err(Error::KeyMismatch { missing_in_predictions, .. }) => {
                assert_eq!(missing_in_predictions, vec!["extra".to_string()])
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn single_true_positive() {
        let m = metrics(&cm(1, 0, 0, 0));
        assert_eq!((m.sensitivity, m.ppv, m.f1_positive), (1.0, 1.0, 1.0));
        assert!(m.is_undefined("specificity"));
    }

    #[test]
    fn zero_division_flags() {
        let m = metrics(&cm(0, 0, 10, 0));
        assert_eq!(m.sensitivity, 0.0);
        assert!(m.is_undefined("sensitivity"));
        assert_eq!(m.specificity, 1.0);
        assert_eq!(m.f1_weighted, 1.0);
        let empty = metrics(&cm(0, 0, 0, 0));
        assert_eq!(empty.undefined.len(), 5);
    }

    #[test]
    fn f1_is_harmonic_mean() {
        let m = metrics(&cm(7, 3, 20, 5));
        let h = 2.0 * m.ppv * m.sensitivity / (m.ppv + m.sensitivity);
        assert!((m.f1_positive - h).abs() < 1e-12);
    }
}
