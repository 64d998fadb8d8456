//! Confusion matrices, per-class P/R/F1, macro-F1 and the FNC relative score.
use std::fmt::{self, Write as _};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::corpus::StanceLabel;
use crate::error::{Error, Result};

/// Row/column order of four-class matrices in reports.
pub const REPORT_ORDER: [StanceLabel; 4] = [
    StanceLabel::Agree,
    StanceLabel::Disagree,
    StanceLabel::Neutral,
    StanceLabel::Unrelated,
];

fn report_index(label: StanceLabel) -> usize {
    REPORT_ORDER
        .iter()
        .position(|&l| l == label)
        .expect("label in report order")
}

/// Square count grid; rows are gold classes, columns predictions.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub classes: Vec<String>,
    pub counts: Vec<Vec<u64>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Prf {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

fn ratio(num: u64, den: u64) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

impl ConfusionMatrix {
    pub fn new(classes: &[&str]) -> Self {
        ConfusionMatrix {
            classes: classes.iter().map(|c| c.to_string()).collect(),
            counts: vec![vec![0; classes.len()]; classes.len()],
        }
    }

    /// Builds a matrix from explicit rows.
    pub fn from_counts(classes: &[&str], counts: Vec<Vec<u64>>) -> Result<Self> {
        if counts.len() != classes.len() || counts.iter().any(|r| r.len() != classes.len()) {
            return Err(Error::InvalidArgument(format!(
                "confusion matrix must be {0}x{0}",
                classes.len()
            )));
        }
        Ok(ConfusionMatrix {
            classes: classes.iter().map(|c| c.to_string()).collect(),
            counts,
        })
    }

    /// Four-class matrix in report order.
    pub fn stance() -> Self {
        let names: Vec<&str> = REPORT_ORDER.iter().map(|l| l.display_name()).collect();
        ConfusionMatrix::new(&names)
    }

    pub fn from_labels(golds: &[StanceLabel], predictions: &[StanceLabel]) -> Result<Self> {
        check_lengths(golds.len(), predictions.len())?;
        let mut m = ConfusionMatrix::stance();
        for (&g, &p) in golds.iter().zip(predictions) {
            m.add(report_index(g), report_index(p));
        }
        Ok(m)
    }

    /// Two-class matrix; index 0 is the negative class.
    pub fn binary(names: (&str, &str), golds: &[bool], predictions: &[bool]) -> Result<Self> {
        check_lengths(golds.len(), predictions.len())?;
        let mut m = ConfusionMatrix::new(&[names.0, names.1]);
        for (&g, &p) in golds.iter().zip(predictions) {
            m.add(g as usize, p as usize);
        }
        Ok(m)
    }

    pub fn add(&mut self, gold: usize, predicted: usize) {
        self.counts[gold][predicted] += 1;
    }

    pub fn size(&self) -> usize {
        self.classes.len()
    }

    pub fn class_index(&self, name: &str) -> Result<usize> {
        self.classes
            .iter()
            .position(|c| c.eq_ignore_ascii_case(name))
            .ok_or_else(|| Error::InvalidArgument(format!("unknown class {name:?}")))
    }

    pub fn row_sum(&self, i: usize) -> u64 {
        self.counts[i].iter().sum()
    }

    pub fn col_sum(&self, j: usize) -> u64 {
        self.counts.iter().map(|r| r[j]).sum()
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    pub fn get(&self, gold: usize, predicted: usize) -> u64 {
        self.counts[gold][predicted]
    }

    /// Count at (gold, predicted) for four-class matrices.
    pub fn cell(&self, gold: StanceLabel, predicted: StanceLabel) -> u64 {
        self.counts[report_index(gold)][report_index(predicted)]
    }

    pub fn prf(&self, class: usize) -> Result<Prf> {
        if class >= self.size() {
            return Err(Error::InvalidArgument(format!(
                "class index {class} out of range"
            )));
        }
        let tp = self.counts[class][class];
        let precision = ratio(tp, self.col_sum(class));
        let recall = ratio(tp, self.row_sum(class));
        let f1 = if precision + recall == 0.0 {
            0.0
        } else {
            2.0 * precision * recall / (precision + recall)
        };
        Ok(Prf {
            precision,
            recall,
            f1,
        })
    }

    pub fn prf_of(&self, name: &str) -> Result<Prf> {
        self.prf(self.class_index(name)?)
    }

    pub fn macro_f1(&self) -> f64 {
        let all: Vec<usize> = (0..self.size()).collect();
        self.macro_f1_over(&all).unwrap_or(0.0)
    }

    pub fn macro_f1_over(&self, classes: &[usize]) -> Result<f64> {
        if classes.is_empty() {
            return Err(Error::InvalidArgument("macro-F1 over an empty class set".into()));
        }
        let mut sum = 0.0;
        for &c in classes {
            sum += self.prf(c)?.f1;
        }
        Ok(sum / classes.len() as f64)
    }

    /// FNC relative score of a four-class matrix.
    pub fn fnc_score(&self) -> Result<f64> {
        if self.size() != 4 {
            return Err(Error::InvalidArgument(
                "FNC score needs a four-class matrix".into(),
            ));
        }
        let mut achieved = 0.0;
        let mut maximum = 0.0;
        for g in REPORT_ORDER {
            for p in REPORT_ORDER {
                let n = self.cell(g, p) as f64;
                achieved += n * pair_score(g, p);
                maximum += n * max_score(g);
            }
        }
        if maximum == 0.0 {
            return Err(Error::InvalidArgument("FNC score of an empty matrix".into()));
        }
        Ok(achieved / maximum)
    }

    /// Aligned plain-text table with gold rows and predicted columns.
    pub fn to_table(&self) -> String {
        const CORNER: &str = "gold\\pred";
        let width = self
            .classes
            .iter()
            .map(|c| c.len())
            .chain(self.counts.iter().flatten().map(|n| n.to_string().len()))
            .max()
            .unwrap_or(1)
            .max(6);
        let label = self
            .classes
            .iter()
            .map(|c| c.len())
            .max()
            .unwrap_or(0)
            .max(CORNER.len());
        let mut out = String::new();
        let _ = write!(out, "{CORNER:<label$}");
        for c in &self.classes {
            let _ = write!(out, " {c:>width$}");
        }
        out.push('\n');
        for (c, row) in self.classes.iter().zip(&self.counts) {
            let _ = write!(out, "{c:<label$}");
            for n in row {
                let _ = write!(out, " {n:>width$}");
            }
            out.push('\n');
        }
        out
    }
}

fn check_lengths(golds: usize, predictions: usize) -> Result<()> {
    if golds != predictions {
        return Err(Error::DimensionMismatch {
            expected: golds,
            found: predictions,
        });
    }
    Ok(())
}

fn pair_score(gold: StanceLabel, predicted: StanceLabel) -> f64 {
    let mut s = 0.0;
    if (gold == StanceLabel::Unrelated) == (predicted == StanceLabel::Unrelated) {
        s += 0.25;
    }
    if gold != StanceLabel::Unrelated && gold == predicted {
        s += 0.75;
    }
    s
}

fn max_score(gold: StanceLabel) -> f64 {
    if gold == StanceLabel::Unrelated {
        0.25
    } else {
        1.0
    }
}

/// Weighted FNC score normalized by the best achievable score.
pub fn fnc_score(predictions: &[StanceLabel], golds: &[StanceLabel]) -> Result<f64> {
    check_lengths(golds.len(), predictions.len())?;
    if golds.is_empty() {
        return Err(Error::InvalidArgument("FNC score of no instances".into()));
    }
    let achieved: f64 = predictions
        .iter()
        .zip(golds)
        .map(|(&p, &g)| pair_score(g, p))
        .sum();
    let maximum: f64 = golds.iter().map(|&g| max_score(g)).sum();
    Ok(achieved / maximum)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassScores {
    pub class: String,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub support: u64,
}

fn class_scores(m: &ConfusionMatrix) -> Vec<ClassScores> {
    (0..m.size())
        .map(|i| {
            let p = m.prf(i).expect("index in range");
            ClassScores {
                class: m.classes[i].clone(),
                precision: p.precision,
                recall: p.recall,
                f1: p.f1,
                support: m.row_sum(i),
            }
        })
        .collect()
}

/// One cascade stage scored on gold-filtered inputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageReport {
    pub stage: u8,
    pub matrix: ConfusionMatrix,
    pub classes: Vec<ClassScores>,
    pub macro_f1: f64,
}

impl StageReport {
    pub fn new(stage: u8, matrix: ConfusionMatrix) -> Self {
        StageReport {
            stage,
            classes: class_scores(&matrix),
            macro_f1: matrix.macro_f1(),
            matrix,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub instances: u64,
    pub matrix: ConfusionMatrix,
    pub classes: Vec<ClassScores>,
    pub macro_f1: f64,
    pub macro_f1_agr_dis: f64,
    pub fnc_relative_score: f64,
    pub stages: Vec<StageReport>,
}

impl EvalReport {
    pub fn from_matrix(matrix: ConfusionMatrix, stages: Vec<StageReport>) -> Result<Self> {
        if matrix.size() != 4 {
            return Err(Error::InvalidArgument(
                "evaluation needs a four-class matrix".into(),
            ));
        }
        let agree = report_index(StanceLabel::Agree);
        let disagree = report_index(StanceLabel::Disagree);
        Ok(EvalReport {
            instances: matrix.total(),
            classes: class_scores(&matrix),
            macro_f1: matrix.macro_f1(),
            macro_f1_agr_dis: matrix.macro_f1_over(&[agree, disagree])?,
            fnc_relative_score: matrix.fnc_score()?,
            matrix,
            stages,
        })
    }

    pub fn from_labels(golds: &[StanceLabel], predictions: &[StanceLabel]) -> Result<Self> {
        if golds.is_empty() {
            return Err(Error::InvalidArgument("evaluation of no instances".into()));
        }
        Self::from_matrix(ConfusionMatrix::from_labels(golds, predictions)?, Vec::new())
    }

    pub fn class(&self, label: StanceLabel) -> &ClassScores {
        &self.classes[report_index(label)]
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

fn score_table(out: &mut String, classes: &[ClassScores]) {
    let _ = writeln!(
        out,
        "{:<12}{:>10}{:>10}{:>10}{:>10}",
        "class", "precision", "recall", "F1", "support"
    );
    for c in classes {
        let _ = writeln!(
            out,
            "{:<12}{:>10.2}{:>10.2}{:>10.2}{:>10}",
            c.class, c.precision, c.recall, c.f1, c.support
        );
    }
}

impl fmt::Display for EvalReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut out = String::new();
        let _ = writeln!(out, "Overall ({} instances)", self.instances);
        let _ = writeln!(
            out,
            "{:<24}{:>8.2}",
            "FNC relative score", self.fnc_relative_score
        );
        let _ = writeln!(out, "{:<24}{:>8.2}", "macro-F1", self.macro_f1);
        let _ = writeln!(
            out,
            "{:<24}{:>8.2}",
            "macro-F1 agree/disagree", self.macro_f1_agr_dis
        );
        out.push('\n');
        score_table(&mut out, &self.classes);
        out.push('\n');
        let _ = writeln!(out, "Confusion matrix");
        out.push_str(&self.matrix.to_table());
        for s in &self.stages {
            let _ = writeln!(
                out,
                "\nStage {} (gold-filtered inputs), macro-F1 {:.2}",
                s.stage, s.macro_f1
            );
            score_table(&mut out, &s.classes);
            out.push_str(&s.matrix.to_table());
        }
        f.write_str(&out)
    }
}

/// Reads `index,label` prediction rows (header optional).
pub fn read_predictions(path: &Path) -> Result<Vec<(usize, StanceLabel)>> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_reader(file);
    let mut out = Vec::new();
    for (n, rec) in reader.records().enumerate() {
        let rec = rec?;
        let line = rec.position().map_or(n as u64 + 1, |p| p.line());
        let malformed = |message: String| Error::Malformed {
            path: path.to_path_buf(),
            line,
            message,
        };
        if rec.len() < 2 {
            return Err(malformed("expected index,label".into()));
        }
        let index = rec[0].trim();
        let Ok(index) = index.parse::<usize>() else {
            if n == 0 {
                continue;
            }
            return Err(malformed(format!("bad instance index {index:?}")));
        };
        let label: StanceLabel = rec[1].trim().parse()?;
        out.push((index, label));
    }
    Ok(out)
}

/// Scores indexed predictions against gold labels; every index must appear once.
pub fn score_predictions(golds: &[StanceLabel], predictions: &[(usize, StanceLabel)]) -> Result<EvalReport> {
    let mut ordered: Vec<Option<StanceLabel>> = vec![None; golds.len()];
    for &(i, l) in predictions {
        let slot = ordered
            .get_mut(i)
            .ok_or_else(|| Error::InvalidArgument(format!("prediction index {i} out of range")))?;
        if slot.replace(l).is_some() {
            return Err(Error::InvalidArgument(format!(
                "duplicate prediction for index {i}"
            )));
        }
    }
    let preds = ordered
        .into_iter()
        .enumerate()
        .map(|(i, l)| l.ok_or_else(|| Error::InvalidArgument(format!("no prediction for index {i}"))))
        .collect::<Result<Vec<_>>>()?;
    EvalReport::from_labels(golds, &preds)
}
