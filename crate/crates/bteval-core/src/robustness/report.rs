use std::fmt::Write;

use crate::robustness::{CategoryCounts, MetricResult, StandardMetrics};

/// CSV with one row per metric: `metric,numerator,denominator,value`.
/// Values print with full `f64` round-trip precision.
pub fn metrics_csv(results: &[MetricResult]) -> String {
    let mut out = String::from("metric,numerator,denominator,value\n");
    for r in results {
        writeln!(out, "{},{},{},{}", r.metric, r.numerator, r.denominator, r.value)
            .expect("writing to a String cannot fail");
    }
    out
}

/// Markdown table of metric values, one row, metrics as columns.
pub fn metrics_markdown(results: &[MetricResult]) -> String {
    let mut header = String::from("|");
    let mut divider = String::from("|");
    let mut row = String::from("|");
    for r in results {
        write!(header, " {} |", r.metric).unwrap();
        divider.push_str("---|");
        write!(row, " {:.4} |", r.value).unwrap();
    }
    format!("{header}\n{divider}\n{row}\n")
}

/// Markdown table of change-category counts, splitting `constant` by
/// whether the text survived the loop verbatim.
pub fn category_counts_markdown(counts: &CategoryCounts) -> String {
    let mut out = String::new();
    out.push_str("| change | samples |\n|---|---|\n");
    writeln!(out, "| correct-to-incorrect | {} |", counts.correct_to_incorrect).unwrap();
    writeln!(out, "| incorrect-to-incorrect | {} |", counts.incorrect_to_incorrect).unwrap();
    writeln!(out, "| incorrect-to-correct | {} |", counts.incorrect_to_correct).unwrap();
    writeln!(out, "| constant (changed text) | {} |", counts.constant_changed_text).unwrap();
    writeln!(out, "| constant (unchanged text) | {} |", counts.constant_unchanged_text).unwrap();
    writeln!(out, "| total | {} |", counts.total()).unwrap();
    out
}

/// Markdown table of accuracy (and micro-F1 for slot corpora) before and
/// after the loop.
pub fn standard_markdown(metrics: &StandardMetrics) -> String {
    let mut out = String::new();
    writeln!(out, "| measure ({}) | before | after | delta |", metrics.task).unwrap();
    out.push_str("|---|---|---|---|\n");
    writeln!(
        out,
        "| accuracy | {:.4} | {:.4} | {:+.4} |",
        metrics.accuracy_before, metrics.accuracy_after, metrics.accuracy_delta
    )
    .unwrap();
    if let Some(f1) = &metrics.micro_f1 {
        writeln!(
            out,
            "| micro-F1 | {:.4} | {:.4} | {:+.4} |",
            f1.before, f1.after, f1.delta
        )
        .unwrap();
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::Task;
    use crate::robustness::{MetricId, MicroF1};

    #[test]
    fn csv_keeps_exact_values() {
        let rows = vec![
            MetricResult { metric: MetricId::R123, numerator: 1, denominator: 4, value: 0.25 },
            MetricResult { metric: MetricId::R13, numerator: 1, denominator: 3, value: 1.0 / 3.0 },
        ];
        let csv = metrics_csv(&rows);
        let mut lines = csv.lines();
        assert_eq!(lines.next().unwrap(), "metric,numerator,denominator,value");
        assert_eq!(lines.next().unwrap(), "R123,1,4,0.25");
        let r13 = lines.next().unwrap();
        let val: f64 = r13.rsplit(',').next().unwrap().parse().unwrap();
        assert_eq!(val, 1.0 / 3.0);
    }

    #[test]
    fn markdown_tables_are_well_formed() {
        let rows = vec![MetricResult {
            metric: MetricId::R123,
            numerator: 1,
            denominator: 4,
            value: 0.25,
        }];
        let md = metrics_markdown(&rows);
        assert_eq!(md, "| R123 |\n|---|\n| 0.2500 |\n");

        let counts = CategoryCounts {
            correct_to_incorrect: 133,
            incorrect_to_incorrect: 14,
            incorrect_to_correct: 16,
            constant_changed_text: 100,
            constant_unchanged_text: 2711,
        };
        let md = category_counts_markdown(&counts);
        assert!(md.contains("| correct-to-incorrect | 133 |"));
        assert!(md.contains("| total | 2974 |"));

        let std = StandardMetrics {
            task: Task::Slots,
            samples: 2,
            accuracy_before: 1.0,
            accuracy_after: 0.5,
            accuracy_delta: -0.5,
            micro_f1: Some(MicroF1 { before: 1.0, after: 0.8, delta: -0.2 }),
        };
        let md = standard_markdown(&std);
        assert!(md.contains("| accuracy | 1.0000 | 0.5000 | -0.5000 |"));
        assert!(md.contains("| micro-F1 | 1.0000 | 0.8000 | -0.2000 |"));
    }
}
