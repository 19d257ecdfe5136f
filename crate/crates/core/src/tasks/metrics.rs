//! Classification metrics: confusion matrix, per-class precision/recall/F1,
//! micro and macro F1.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassMetrics {
    pub class: String,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub support: usize,
    pub predicted: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub f1_micro: f64,
    pub f1_macro: f64,
    pub per_class: Vec<ClassMetrics>,
    /// `confusion[t][p]` counts samples with true class `t` predicted `p`.
    pub confusion: Vec<Vec<usize>>,
    pub class_names: Vec<String>,
    pub samples: usize,
}

/// Zero-division convention: precision, recall, and F1 are 0 whenever their
/// denominator is 0. Macro-F1 averages over classes that are present in the
/// labels or the predictions; classes absent from both do not dilute it.
pub fn evaluate_predictions(labels: &[usize], preds: &[usize], class_names: &[String]) -> EvalReport {
    assert_eq!(labels.len(), preds.len(), "label/prediction length");
    let c = class_names.len();
    let mut confusion = vec![vec![0usize; c]; c];
    for (&t, &p) in labels.iter().zip(preds) {
        confusion[t][p] += 1;
    }
    let mut per_class = Vec::with_capacity(c);
    let mut macro_sum = 0.0;
    let mut macro_n = 0usize;
    let mut correct = 0usize;
    for k in 0..c {
        let tp = confusion[k][k];
        let support: usize = confusion[k].iter().sum();
        let predicted: usize = (0..c).map(|t| confusion[t][k]).sum();
        correct += tp;
        let precision = if predicted > 0 {
            tp as f64 / predicted as f64
        } else {
            0.0
        };
        let recall = if support > 0 {
            tp as f64 / support as f64
        } else {
            0.0
        };
        let f1 = if precision + recall > 0.0 {
            2.0 * precision * recall / (precision + recall)
        } else {
            0.0
        };
        if support > 0 || predicted > 0 {
            macro_sum += f1;
            macro_n += 1;
        }
        per_class.push(ClassMetrics {
            class: class_names[k].clone(),
            precision,
            recall,
            f1,
            support,
            predicted,
        });
    }
    let f1_micro = if labels.is_empty() {
        0.0
    } else {
        correct as f64 / labels.len() as f64
    };
    let f1_macro = if macro_n > 0 {
        macro_sum / macro_n as f64
    } else {
        0.0
    };
    EvalReport {
        f1_micro,
        f1_macro,
        per_class,
        confusion,
        class_names: class_names.to_vec(),
        samples: labels.len(),
    }
}

/// Binary precision/recall/F1 of `target` against everything else.
pub fn binary_prf(labels: &[usize], preds: &[usize], target: usize) -> (f64, f64, f64) {
    let mut tp = 0usize;
    let mut fp = 0usize;
    let mut fn_ = 0usize;
    for (&t, &p) in labels.iter().zip(preds) {
        match (t == target, p == target) {
            (true, true) => tp += 1,
            (false, true) => fp += 1,
            (true, false) => fn_ += 1,
            _ => {}
        }
    }
    let precision = if tp + fp > 0 {
        tp as f64 / (tp + fp) as f64
    } else {
        0.0
    };
    let recall = if tp + fn_ > 0 {
        tp as f64 / (tp + fn_) as f64
    } else {
        0.0
    };
    let f1 = if precision + recall > 0.0 {
        2.0 * precision * recall / (precision + recall)
    } else {
        0.0
    };
    (precision, recall, f1)
}

impl EvalReport {
    /// Aligned plain-text table for terminal output.
    pub fn render_table(&self) -> String {
        let mut out = String::new();
        let name_w = self
            .per_class
            .iter()
            .map(|m| m.class.len())
            .chain(["class".len()])
            .max()
            .unwrap();
        out.push_str(&format!(
            "{:<name_w$}  {:>9}  {:>9}  {:>9}  {:>7}\n",
            "class", "precision", "recall", "f1", "support"
        ));
        for m in &self.per_class {
            out.push_str(&format!(
                "{:<name_w$}  {:>9.4}  {:>9.4}  {:>9.4}  {:>7}\n",
                m.class, m.precision, m.recall, m.f1, m.support
            ));
        }
        out.push_str(&format!(
            "f1-micro {:.4}  f1-macro {:.4}  samples {}\n",
            self.f1_micro, self.f1_macro, self.samples
        ));
        out
    }
}
