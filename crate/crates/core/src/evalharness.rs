//! Agreement between predicted and gold flaw labels.

use std::collections::{BTreeSet, HashMap};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::corpus::{Dataset, GoldLabels};
use crate::criteria::{is_acceptable, CriterionId, FlagSet};
use crate::detectors::FlawReport;
use crate::error::{Error, Result};

/// `2tp / (2tp + fp + fn)`, or `None` when nothing was flagged on either
/// side.
pub fn f1(tp: usize, fp: usize, fn_: usize) -> Option<f64> {
    let d = 2 * tp + fp + fn_;
    (d > 0).then(|| 2.0 * tp as f64 / d as f64)
}

/// Renders an F1 value with two decimals, or "-" when undefined.
pub fn fmt_f1(v: Option<f64>) -> String {
    v.map_or_else(|| "-".to_string(), |x| format!("{x:.2}"))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriterionStats {
    pub criterion: CriterionId,
    pub tp: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
    pub tn: usize,
    pub f1: Option<f64>,
    pub n_gold: usize,
    pub n_pred: usize,
}

impl CriterionStats {
    fn tally(criterion: CriterionId, rows: &[(FlagSet, FlagSet)]) -> Self {
        let (mut tp, mut fp, mut fn_, mut tn) = (0, 0, 0, 0);
        for (g, p) in rows {
            match (g.get(criterion), p.get(criterion)) {
                (true, true) => tp += 1,
                (false, true) => fp += 1,
                (true, false) => fn_ += 1,
                (false, false) => tn += 1,
            }
        }
        CriterionStats {
            criterion,
            tp,
            fp,
            fn_,
            tn,
            f1: f1(tp, fp, fn_),
            n_gold: tp + fn_,
            n_pred: tp + fp,
        }
    }

    pub fn accuracy(&self) -> f64 {
        let n = self.tp + self.fp + self.fn_ + self.tn;
        if n == 0 {
            1.0
        } else {
            (self.tp + self.tn) as f64 / n as f64
        }
    }
}

/// Counts with rows = gold band and columns = predicted band, each ordered
/// (acceptable, unacceptable).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct AcceptabilityMatrix(pub [[usize; 2]; 2]);

impl AcceptabilityMatrix {
    pub fn from_counts(rows: impl IntoIterator<Item = (usize, usize)>) -> Self {
        let mut m = [[0; 2]; 2];
        for (gold, pred) in rows {
            m[usize::from(!is_acceptable(gold))][usize::from(!is_acceptable(pred))] += 1;
        }
        AcceptabilityMatrix(m)
    }

    pub fn total(&self) -> usize {
        self.0.iter().flatten().sum()
    }

    pub fn match_rate(&self) -> f64 {
        let n = self.total();
        if n == 0 {
            return 1.0;
        }
        (self.0[0][0] + self.0[1][1]) as f64 / n as f64
    }

    pub fn transposed(&self) -> Self {
        let m = self.0;
        AcceptabilityMatrix([[m[0][0], m[1][0]], [m[0][1], m[1][1]]])
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CountStats {
    pub mean: f64,
    /// Sample standard deviation (n - 1 denominator); 0 for fewer than two
    /// values.
    pub sd: f64,
    pub max: usize,
}

pub fn count_stats(counts: &[usize]) -> CountStats {
    let n = counts.len();
    if n == 0 {
        return CountStats { mean: 0.0, sd: 0.0, max: 0 };
    }
    let mean = counts.iter().sum::<usize>() as f64 / n as f64;
    let sd = if n < 2 {
        0.0
    } else {
        let ss: f64 = counts.iter().map(|&c| (c as f64 - mean).powi(2)).sum();
        (ss / (n - 1) as f64).sqrt()
    };
    CountStats {
        mean,
        sd,
        max: counts.iter().copied().max().unwrap_or(0),
    }
}

/// Agreement statistics over one set of (gold, predicted) rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scores {
    pub n: usize,
    pub per_criterion: Vec<CriterionStats>,
    pub overall_accuracy: f64,
    pub exact_match_ratio: f64,
    pub hamming_loss: f64,
    pub micro_f1: Option<f64>,
    pub mean_pred_flaws: f64,
    pub sd_pred_flaws: f64,
    pub max_pred_flaws: usize,
    pub mean_gold_flaws: f64,
    pub sd_gold_flaws: f64,
    pub max_gold_flaws: usize,
    pub acceptability_matrix: AcceptabilityMatrix,
    pub match_rate: f64,
}

/// Scores aligned (gold, predicted) rows.
pub fn score(rows: &[(FlagSet, FlagSet)]) -> Scores {
    let per_criterion: Vec<CriterionStats> =
        CriterionId::ALL.iter().map(|&c| CriterionStats::tally(c, rows)).collect();
    let n = rows.len();
    let cells = n * CriterionId::COUNT;
    let wrong: usize = per_criterion.iter().map(|s| s.fp + s.fn_).sum();
    let (hamming_loss, overall_accuracy) = if cells == 0 {
        (0.0, 1.0)
    } else {
        let h = wrong as f64 / cells as f64;
        (h, (cells - wrong) as f64 / cells as f64)
    };
    let exact = rows.iter().filter(|(g, p)| g == p).count();
    let exact_match_ratio = if n == 0 { 1.0 } else { exact as f64 / n as f64 };
    let sum = |f: fn(&CriterionStats) -> usize| per_criterion.iter().map(f).sum::<usize>();
    let micro_f1 = f1(sum(|s| s.tp), sum(|s| s.fp), sum(|s| s.fn_));
    let gold: Vec<usize> = rows.iter().map(|(g, _)| g.count()).collect();
    let pred: Vec<usize> = rows.iter().map(|(_, p)| p.count()).collect();
    let gs = count_stats(&gold);
    let ps = count_stats(&pred);
    let acceptability_matrix = AcceptabilityMatrix::from_counts(gold.iter().copied().zip(pred.iter().copied()));
    Scores {
        n,
        per_criterion,
        overall_accuracy,
        exact_match_ratio,
        hamming_loss,
        micro_f1,
        mean_pred_flaws: ps.mean,
        sd_pred_flaws: ps.sd,
        max_pred_flaws: ps.max,
        mean_gold_flaws: gs.mean,
        sd_gold_flaws: gs.sd,
        max_gold_flaws: gs.max,
        match_rate: acceptability_matrix.match_rate(),
        acceptability_matrix,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DomainScores {
    pub domain: String,
    #[serde(flatten)]
    pub scores: Scores,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalSummary {
    #[serde(flatten)]
    pub overall: Scores,
    pub per_domain: Vec<DomainScores>,
}

/// Predicted labels in the gold shape.
pub fn predictions_from_reports(reports: &[FlawReport]) -> Vec<GoldLabels> {
    reports
        .iter()
        .map(|r| GoldLabels {
            question_id: r.question_id.clone(),
            flags: r.flags(),
        })
        .collect()
}

/// Scores `predictions` against the dataset's gold labels, overall and per
/// domain (domains in first-appearance order).
pub fn evaluate(dataset: &Dataset, predictions: &[GoldLabels]) -> Result<EvalSummary> {
    let gold = dataset
        .gold
        .as_ref()
        .ok_or_else(|| Error::Coverage {
            message: "no gold labels supplied".into(),
            ids: Vec::new(),
        })?;
    let gold: HashMap<&str, &FlagSet> = gold.iter().map(|g| (g.question_id.as_str(), &g.flags)).collect();
    let pred: HashMap<&str, &FlagSet> = predictions.iter().map(|p| (p.question_id.as_str(), &p.flags)).collect();

    let ids: Vec<&str> = dataset.questions.iter().map(|q| q.id.as_str()).collect();
    let missing_gold: Vec<String> = ids.iter().filter(|i| !gold.contains_key(*i)).map(|i| i.to_string()).collect();
    if !missing_gold.is_empty() {
        return Err(Error::Coverage {
            message: "questions without gold labels".into(),
            ids: missing_gold,
        });
    }
    let missing_pred: Vec<String> = ids.iter().filter(|i| !pred.contains_key(*i)).map(|i| i.to_string()).collect();
    if !missing_pred.is_empty() {
        return Err(Error::Coverage {
            message: "questions without predictions".into(),
            ids: missing_pred,
        });
    }
    let known: BTreeSet<&str> = ids.iter().copied().collect();
    let extra: Vec<String> = predictions
        .iter()
        .filter(|p| !known.contains(p.question_id.as_str()))
        .map(|p| p.question_id.clone())
        .collect();
    if !extra.is_empty() {
        return Err(Error::Coverage {
            message: "predictions for unknown questions".into(),
            ids: extra,
        });
    }

    let row = |id: &str| (*gold[id], *pred[id]);
    let all: Vec<(FlagSet, FlagSet)> = ids.iter().map(|i| row(i)).collect();
    let mut domains: Vec<&str> = Vec::new();
    for q in &dataset.questions {
        if !domains.contains(&q.domain.as_str()) {
            domains.push(&q.domain);
        }
    }
    let per_domain = domains
        .into_iter()
        .map(|d| {
            let rows: Vec<(FlagSet, FlagSet)> = dataset
                .questions
                .iter()
                .filter(|q| q.domain == d)
                .map(|q| row(&q.id))
                .collect();
            DomainScores {
                domain: d.to_string(),
                scores: score(&rows),
            }
        })
        .collect();
    Ok(EvalSummary {
        overall: score(&all),
        per_domain,
    })
}

impl EvalSummary {
    fn columns(&self) -> Vec<(&str, &Scores)> {
        let mut cols: Vec<(&str, &Scores)> = self.per_domain.iter().map(|d| (d.domain.as_str(), &d.scores)).collect();
        cols.push(("All", &self.overall));
        cols
    }

    /// Criterion × domain grid: human count, predicted count and F1 per
    /// domain, then micro-F1 and flaw-total rows.
    pub fn grid(&self) -> (Vec<String>, Vec<Vec<String>>) {
        let cols = self.columns();
        let mut header = vec!["Criterion".to_string()];
        for (d, _) in &cols {
            header.extend([format!("{d} Human"), format!("{d} Predicted"), format!("{d} F1")]);
        }
        let mut rows = Vec::new();
        for (i, c) in CriterionId::ALL.iter().enumerate() {
            let mut r = vec![c.title().to_string()];
            for (_, s) in &cols {
                let st = &s.per_criterion[i];
                r.extend([st.n_gold.to_string(), st.n_pred.to_string(), fmt_f1(st.f1)]);
            }
            rows.push(r);
        }
        let mut micro = vec!["Micro-F1".to_string()];
        let mut totals = vec!["Total flaws".to_string()];
        for (_, s) in &cols {
            micro.extend([String::new(), String::new(), fmt_f1(s.micro_f1)]);
            let g: usize = s.per_criterion.iter().map(|x| x.n_gold).sum();
            let p: usize = s.per_criterion.iter().map(|x| x.n_pred).sum();
            totals.extend([g.to_string(), p.to_string(), String::new()]);
        }
        rows.push(micro);
        rows.push(totals);
        (header, rows)
    }

    pub fn grid_csv(&self) -> Result<String> {
        let (header, rows) = self.grid();
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&header)?;
        for r in rows {
            w.write_record(&r)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::io("writing csv", e.into_error()))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }

    pub fn to_text(&self) -> String {
        let (header, rows) = self.grid();
        let mut width: Vec<usize> = header.iter().map(|h| h.chars().count()).collect();
        for r in &rows {
            for (w, c) in width.iter_mut().zip(r) {
                *w = (*w).max(c.chars().count());
            }
        }
        let mut out = String::new();
        let line = |out: &mut String, r: &[String]| {
            let cells: Vec<String> = r
                .iter()
                .zip(&width)
                .enumerate()
                .map(|(i, (c, w))| if i == 0 { format!("{c:<w$}") } else { format!("{c:>w$}") })
                .collect();
            let _ = writeln!(out, "{}", cells.join("  ").trim_end());
        };
        line(&mut out, &header);
        let _ = writeln!(out, "{}", "-".repeat(width.iter().sum::<usize>() + 2 * (width.len() - 1)));
        for r in &rows {
            line(&mut out, r);
        }
        let o = &self.overall;
        let m = o.acceptability_matrix.0;
        let _ = writeln!(out);
        let _ = writeln!(out, "questions            {}", o.n);
        let _ = writeln!(out, "overall accuracy     {:.4}", o.overall_accuracy);
        let _ = writeln!(out, "exact match ratio    {:.4}", o.exact_match_ratio);
        let _ = writeln!(out, "hamming loss         {:.4}", o.hamming_loss);
        let _ = writeln!(out, "micro F1             {}", o.micro_f1.map_or("-".into(), |x| format!("{x:.4}")));
        let _ = writeln!(
            out,
            "predicted flaws      mean {:.2}, sd {:.2}, max {}",
            o.mean_pred_flaws, o.sd_pred_flaws, o.max_pred_flaws
        );
        let _ = writeln!(
            out,
            "gold flaws           mean {:.2}, sd {:.2}, max {}",
            o.mean_gold_flaws, o.sd_gold_flaws, o.max_gold_flaws
        );
        let _ = writeln!(out, "acceptability (rows gold, columns predicted)");
        let _ = writeln!(out, "                     acceptable  unacceptable");
        let _ = writeln!(out, "  acceptable         {:>10}  {:>12}", m[0][0], m[0][1]);
        let _ = writeln!(out, "  unacceptable       {:>10}  {:>12}", m[1][0], m[1][1]);
        let _ = writeln!(out, "match rate           {:.4}", o.match_rate);
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::Mcq;
    use proptest::prelude::*;

    fn fs(bits: &[usize]) -> FlagSet {
        let mut f = FlagSet::default();
        for &b in bits {
            f.0[b] = true;
        }
        f
    }

    #[test]
    fn three_wrong_cells_in_two_rows() {
        let gold = [fs(&[0, 5]), fs(&[])];
        let pred_one_row = [fs(&[1]), fs(&[])];
        let rows: Vec<_> = gold.iter().copied().zip(pred_one_row).collect();
        let s = score(&rows);
        assert_eq!(s.overall_accuracy, 35.0 / 38.0);
        assert_eq!(s.hamming_loss, 3.0 / 38.0);
        assert_eq!(s.exact_match_ratio, 0.5);

        let pred_both_rows = [fs(&[0]), fs(&[2, 3])];
        let rows: Vec<_> = gold.iter().copied().zip(pred_both_rows).collect();
        let s = score(&rows);
        assert_eq!(s.hamming_loss, 3.0 / 38.0);
        assert_eq!(s.exact_match_ratio, 0.0);
    }

    #[test]
    fn identity_grid() {
        let g = [fs(&[0, 1]), fs(&[]), fs(&[4])];
        let rows: Vec<_> = g.iter().map(|x| (*x, *x)).collect();
        let s = score(&rows);
        assert_eq!((s.overall_accuracy, s.exact_match_ratio, s.hamming_loss), (1.0, 1.0, 0.0));
        for c in &s.per_criterion {
            assert!(c.f1.is_none() || c.f1 == Some(1.0));
        }
        assert_eq!(s.per_criterion[2].f1, None);
    }

    #[test]
    fn f1_conventions() {
        assert_eq!(f1(0, 0, 0), None);
        assert_eq!(f1(0, 11, 0), Some(0.0));
        assert_eq!(fmt_f1(None), "-");
        assert_eq!(fmt_f1(Some(0.0)), "0.00");
    }

    #[test]
    fn acceptability() {
        let z = AcceptabilityMatrix::from_counts([(0, 0); 4]);
        assert_eq!(z.0, [[4, 0], [0, 0]]);
        assert_eq!(z.match_rate(), 1.0);
        let m = AcceptabilityMatrix::from_counts([(0, 1), (1, 2), (2, 3), (3, 2)]);
        assert_eq!(m.0, [[1, 1], [0, 2]]);
        assert_eq!(m.match_rate(), 0.75);
    }

    #[test]
    fn flaw_count_stats() {
        let s = count_stats(&[0, 2, 4]);
        assert_eq!((s.mean, s.sd, s.max), (2.0, 2.0, 4));
        assert_eq!(count_stats(&[3, 3, 3]).sd, 0.0);
    }

    fn dataset() -> Dataset {
        let q = |id: &str, d: &str| Mcq::new(id, d, "Which?", vec!["x".into(), "y".into()], 0).unwrap();
        let mut ds = Dataset::new(vec![q("a", "chem"), q("b", "stats"), q("c", "chem")]);
        ds.gold = Some(vec![
            GoldLabels { question_id: "a".into(), flags: fs(&[0]) },
            GoldLabels { question_id: "b".into(), flags: fs(&[1, 2]) },
            GoldLabels { question_id: "c".into(), flags: fs(&[]) },
        ]);
        ds
    }

    #[test]
    fn evaluate_per_domain_and_coverage() {
        let ds = dataset();
        let preds = ds.gold.clone().unwrap();
        let s = evaluate(&ds, &preds).unwrap();
        assert_eq!(s.overall.exact_match_ratio, 1.0);
        assert_eq!(s.per_domain.len(), 2);
        assert_eq!(s.per_domain[0].domain, "chem");
        assert_eq!(s.per_domain[0].scores.n, 2);

        let short = &preds[..2];
        match evaluate(&ds, short) {
            Err(Error::Coverage { ids, .. }) => assert_eq!(ids, ["c"]),
            other => panic!("{other:?}"),
        }
        let mut extra = preds.clone();
        extra.push(GoldLabels { question_id: "zz".into(), flags: fs(&[]) });
        assert!(matches!(evaluate(&ds, &extra), Err(Error::Coverage { .. })));
        let mut no_gold = ds.clone();
        no_gold.gold = None;
        assert!(matches!(evaluate(&no_gold, &preds), Err(Error::Coverage { .. })));
    }

    #[test]
    fn rendering() {
        let ds = dataset();
        let mut preds = ds.gold.clone().unwrap();
        preds[2].flags = fs(&[7]);
        let s = evaluate(&ds, &preds).unwrap();
        let csv = s.grid_csv().unwrap();
        let first = csv.lines().next().unwrap();
        assert!(first.starts_with("Criterion,chem Human,chem Predicted,chem F1,stats Human"));
        assert!(first.ends_with("All Human,All Predicted,All F1"));
        assert_eq!(csv.lines().count(), 1 + 19 + 2);
        let text = s.to_text();
        assert!(text.contains("Micro-F1") && text.contains("match rate"));
        let json = serde_json::to_value(&s).unwrap();
        assert!(json["per_criterion"][2]["f1"].is_null() || json["per_criterion"][2]["f1"].is_number());
        assert!(json["per_domain"][0]["domain"] == "chem");
    }

    fn grid() -> impl Strategy<Value = Vec<(FlagSet, FlagSet)>> {
        let row = (prop::array::uniform19(any::<bool>()), prop::array::uniform19(any::<bool>()))
            .prop_map(|(g, p)| (FlagSet(g), FlagSet(p)));
        prop::collection::vec(row, 1..40)
    }

    proptest! {
        #[test]
        fn algebra(rows in grid()) {
            let s = score(&rows);
            prop_assert!((s.hamming_loss + s.overall_accuracy - 1.0).abs() < 1e-12);
            for c in &s.per_criterion {
                prop_assert!(s.exact_match_ratio <= c.accuracy() + 1e-12);
                prop_assert_eq!(c.tp + c.fp + c.fn_ + c.tn, rows.len());
            }
            // pooled counts taken straight from the grid
            let (mut tp, mut fp, mut fn_) = (0usize, 0usize, 0usize);
            for (g, p) in &rows {
                for i in 0..19 {
                    match (g.0[i], p.0[i]) {
                        (true, true) => tp += 1,
                        (false, true) => fp += 1,
                        (true, false) => fn_ += 1,
                        _ => {}
                    }
                }
            }
            let pooled = if 2 * tp + fp + fn_ == 0 { None } else { Some(2.0 * tp as f64 / (2 * tp + fp + fn_) as f64) };
            prop_assert_eq!(s.micro_f1, pooled);

            let swapped: Vec<_> = rows.iter().map(|(g, p)| (*p, *g)).collect();
            let t = score(&swapped);
            prop_assert_eq!(t.acceptability_matrix, s.acceptability_matrix.transposed());
            prop_assert_eq!(t.match_rate, s.match_rate);
        }
    }
}
