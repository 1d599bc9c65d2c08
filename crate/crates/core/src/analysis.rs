//! Descriptive analyses over labeled datasets and trained linear models,
//! with JSON / Markdown / CSV report emission.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::annotation::{Emotion, LabeledExample};
use crate::corpus::IgrLabel;
use crate::error::{Error, Result};
use crate::eval::EvalReport;
use crate::features::Vocab;
use crate::models::LinearModel;

/// One row of the emotion-by-context percentage table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistRow {
    pub label: String,
    pub all: f64,
    pub in_group: f64,
    pub out_group: f64,
}

/// Percentage of examples carrying each label, overall and per IGR side.
/// Multi-label examples count once per label; the trailing row counts empty
/// sets.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistributionTable {
    pub rows: Vec<DistRow>,
    pub n_all: usize,
    pub n_in_group: usize,
    pub n_out_group: usize,
}

impl DistributionTable {
    /// Drops labels absent everywhere; reporting omits empty rows.
    pub fn retained(&self) -> DistributionTable {
        DistributionTable {
            rows: self
                .rows
                .iter()
                .filter(|r| r.all != 0.0 || r.in_group != 0.0 || r.out_group != 0.0)
                .cloned()
                .collect(),
            n_all: self.n_all,
            n_in_group: self.n_in_group,
            n_out_group: self.n_out_group,
        }
    }

    pub fn row(&self, label: &str) -> Option<&DistRow> {
        self.rows.iter().find(|r| r.label == label)
    }
}

pub fn igr_emotion_distribution(examples: &[LabeledExample]) -> Result<DistributionTable> {
    if examples.is_empty() {
        return Err(Error::Validation(
            "cannot build a distribution over no examples".into(),
        ));
    }
    let in_group: Vec<&LabeledExample> = examples
        .iter()
        .filter(|e| e.igr() == IgrLabel::InGroup)
        .collect();
    let out_group: Vec<&LabeledExample> = examples
        .iter()
        .filter(|e| e.igr() == IgrLabel::OutGroup)
        .collect();

    let pct = |count: usize, total: usize| {
        if total == 0 {
            0.0
        } else {
            100.0 * count as f64 / total as f64
        }
    };
    let mut rows = Vec::with_capacity(9);
    for e in Emotion::ALL {
        let has = |xs: &[&LabeledExample]| xs.iter().filter(|x| x.emotions.contains(e)).count();
        rows.push(DistRow {
            label: e.name().to_string(),
            all: pct(
                examples.iter().filter(|x| x.emotions.contains(e)).count(),
                examples.len(),
            ),
            in_group: pct(has(&in_group), in_group.len()),
            out_group: pct(has(&out_group), out_group.len()),
        });
    }
    let empties = |xs: &[&LabeledExample]| xs.iter().filter(|x| x.emotions.is_empty()).count();
    rows.push(DistRow {
        label: "no_emotion".to_string(),
        all: pct(
            examples.iter().filter(|x| x.emotions.is_empty()).count(),
            examples.len(),
        ),
        in_group: pct(empties(&in_group), in_group.len()),
        out_group: pct(empties(&out_group), out_group.len()),
    });
    Ok(DistributionTable {
        rows,
        n_all: examples.len(),
        n_in_group: in_group.len(),
        n_out_group: out_group.len(),
    })
}

/// Symmetric 8x8 co-occurrence counts in wheel order; the diagonal holds
/// plain label counts.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CooccurrenceMatrix {
    pub labels: Vec<String>,
    pub counts: Vec<Vec<usize>>,
}

pub fn cooccurrence_matrix(examples: &[LabeledExample]) -> CooccurrenceMatrix {
    let mut counts = vec![vec![0usize; 8]; 8];
    for ex in examples {
        for a in ex.emotions.iter() {
            for b in ex.emotions.iter() {
                counts[a.wheel_position() as usize][b.wheel_position() as usize] += 1;
            }
        }
    }
    CooccurrenceMatrix {
        labels: Emotion::ALL.iter().map(|e| e.name().to_string()).collect(),
        counts,
    }
}

/// Share of one emotion's examples aimed at the top-k target handles.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TargetConcentration {
    pub fraction: f64,
    pub top_handles: Vec<String>,
    pub total_examples: usize,
}

/// Ranks target handles by how many examples carry `emotion` toward them;
/// ties break lexicographically. `None` when the emotion never occurs.
pub fn target_concentration(
    examples: &[LabeledExample],
    emotion: Emotion,
    k: usize,
) -> Result<Option<TargetConcentration>> {
    if k == 0 {
        return Err(Error::Validation("k must be at least 1".into()));
    }
    let mut by_handle: BTreeMap<&str, usize> = BTreeMap::new();
    let mut total = 0usize;
    for ex in examples {
        if ex.emotions.contains(emotion) {
            *by_handle
                .entry(ex.utterance.target_handle.as_str())
                .or_default() += 1;
            total += 1;
        }
    }
    if total == 0 {
        return Ok(None);
    }
    let mut ranked: Vec<(&str, usize)> = by_handle.into_iter().collect();
    ranked.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
    let top: Vec<(&str, usize)> = ranked.into_iter().take(k).collect();
    let covered: usize = top.iter().map(|(_, c)| c).sum();
    Ok(Some(TargetConcentration {
        fraction: covered as f64 / total as f64,
        top_handles: top.into_iter().map(|(h, _)| h.to_string()).collect(),
        total_examples: total,
    }))
}

/// Ranked n-gram lists per class from a linear model's signed effective
/// weights.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopFeatures {
    /// Largest positive effective weights.
    pub out_group: Vec<(String, f64)>,
    /// Most negative effective weights.
    pub in_group: Vec<(String, f64)>,
}

pub fn top_features(model: &LinearModel<f64>, vocab: &Vocab, n: usize) -> TopFeatures {
    let mut weighted: Vec<(String, f64)> = (0..vocab.len().min(model.weights.len()))
        .map(|i| {
            (
                vocab.ngram(i).expect("index in range").to_string(),
                model.effective_weight(i),
            )
        })
        .collect();
    weighted.sort_by(|a, b| {
        b.1.partial_cmp(&a.1)
            .expect("finite weights")
            .then_with(|| a.0.cmp(&b.0))
    });
    let out_group: Vec<(String, f64)> = weighted
        .iter()
        .filter(|(_, w)| *w > 0.0)
        .take(n)
        .cloned()
        .collect();
    let mut in_side: Vec<(String, f64)> =
        weighted.iter().filter(|(_, w)| *w < 0.0).cloned().collect();
    in_side.sort_by(|a, b| {
        a.1.partial_cmp(&b.1)
            .expect("finite weights")
            .then_with(|| a.0.cmp(&b.0))
    });
    TopFeatures {
        out_group,
        in_group: in_side.into_iter().take(n).collect(),
    }
}

/// Everything the analyze step can emit. Absent sections stay empty in the
/// rendered files.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct AnalysisReport {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub distribution: Option<DistributionTable>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cooccurrence: Option<CooccurrenceMatrix>,
    #[serde(skip_serializing_if = "BTreeMap::is_empty", default)]
    pub target_concentration: BTreeMap<String, TargetConcentration>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub top_features: Option<TopFeatures>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eval: Option<EvalReport>,
}

/// Writes `report.json`, `report.md`, and CSV renderings of the matrices
/// into `out_dir`.
pub fn emit_report(report: &AnalysisReport, out_dir: &Path) -> Result<()> {
    std::fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let write = |name: &str, content: String| -> Result<()> {
        let path = out_dir.join(name);
        std::fs::write(&path, content).map_err(|e| Error::io(&path, e))
    };
    let json = serde_json::to_string_pretty(report).expect("report serializes");
    write("report.json", json + "\n")?;
    write("report.md", render_markdown(report))?;
    if let Some(dist) = &report.distribution {
        let mut csv = String::from("label,all,in_group,out_group\n");
        for row in &dist.rows {
            csv.push_str(&format!(
                "{},{},{},{}\n",
                row.label, row.all, row.in_group, row.out_group
            ));
        }
        write("distribution.csv", csv)?;
    }
    if let Some(co) = &report.cooccurrence {
        let mut csv = String::from("label,");
        csv.push_str(&co.labels.join(","));
        csv.push('\n');
        for (label, row) in co.labels.iter().zip(&co.counts) {
            let cells: Vec<String> = row.iter().map(|c| c.to_string()).collect();
            csv.push_str(&format!("{label},{}\n", cells.join(",")));
        }
        write("cooccurrence.csv", csv)?;
    }
    Ok(())
}

/// Markdown rendering. Percentages print with one decimal.
pub fn render_markdown(report: &AnalysisReport) -> String {
    let mut md = String::from("# Analysis report\n");
    if let Some(dist) = &report.distribution {
        md.push_str("\n## Emotion distribution by interpersonal context (%)\n\n");
        md.push_str("| Label | All | In-group | Out-group |\n|---|---|---|---|\n");
        for row in &dist.rows {
            md.push_str(&format!(
                "| {} | {:.1} | {:.1} | {:.1} |\n",
                row.label, row.all, row.in_group, row.out_group
            ));
        }
        md.push_str(&format!(
            "\nExamples: {} total, {} in-group, {} out-group.\n",
            dist.n_all, dist.n_in_group, dist.n_out_group
        ));
    }
    if let Some(co) = &report.cooccurrence {
        md.push_str("\n## Emotion co-occurrence counts\n\n| |");
        for label in &co.labels {
            md.push_str(&format!(" {label} |"));
        }
        md.push_str("\n|---|");
        md.push_str(&"---|".repeat(co.labels.len()));
        md.push('\n');
        for (label, row) in co.labels.iter().zip(&co.counts) {
            md.push_str(&format!("| {label} |"));
            for c in row {
                md.push_str(&format!(" {c} |"));
            }
            md.push('\n');
        }
    }
    if !report.target_concentration.is_empty() {
        md.push_str("\n## Target concentration\n\n| Emotion | Fraction in top handles | Handles |\n|---|---|---|\n");
        for (emotion, conc) in &report.target_concentration {
            md.push_str(&format!(
                "| {} | {:.3} | {} |\n",
                emotion,
                conc.fraction,
                conc.top_handles.join(", ")
            ));
        }
    }
    if let Some(top) = &report.top_features {
        md.push_str("\n## Top linear-model features\n\n| Out-group | Weight | In-group | Weight |\n|---|---|---|---|\n");
        let n = top.out_group.len().max(top.in_group.len());
        for i in 0..n {
            let (og, ow) = top
                .out_group
                .get(i)
                .map(|(g, w)| (g.as_str(), format!("{w:.4}")))
                .unwrap_or(("", String::new()));
            let (ig, iw) = top
                .in_group
                .get(i)
                .map(|(g, w)| (g.as_str(), format!("{w:.4}")))
                .unwrap_or(("", String::new()));
            md.push_str(&format!("| {og} | {ow} | {ig} | {iw} |\n"));
        }
    }
    if let Some(eval) = &report.eval {
        md.push_str("\n## Evaluation\n");
        if let Some(igr) = &eval.igr {
            md.push_str(&format!(
                "\nIGR macro-F1: {:.3} (SD {:.3}) over {} restart(s).\n",
                igr.macro_f1.mean, igr.macro_f1.sd, igr.restarts
            ));
        }
        if let Some(emo) = &eval.emotion {
            md.push_str(&format!(
                "\nEmotion macro-F1: {:.3} (SD {:.3}) over {} restart(s).\n",
                emo.macro_f1.mean, emo.macro_f1.sd, emo.restarts
            ));
        }
        for cmp in &eval.comparisons {
            md.push_str(&format!(
                "\nBootstrap vs baseline on {}: delta {:.4}, p = {:.4}{}.\n",
                cmp.metric,
                cmp.delta,
                cmp.p_value,
                if cmp.orientation_violated {
                    " (orientation violated)"
                } else {
                    ""
                }
            ));
        }
    }
    md
}
