//! Structure error metrics between true and estimated genotypes, and their
//! aggregation into report rows.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::TableGenotype;

/// Bin width for count-error histograms.
pub const COUNT_BIN: f64 = 1.0;
/// Bin width for geometry-error histograms, page pixels.
pub const GEOMETRY_BIN: f64 = 2.0;

/// Per-sample errors. Count errors are `true − predicted`; all geometry
/// errors are absolute page-pixel differences over index-aligned prefixes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StructureErrors {
    pub row_count_error: i64,
    pub col_count_error: i64,
    pub x0_abs_error: u32,
    pub y0_abs_error: u32,
    pub col_width_abs_errors: Vec<u32>,
    pub row_height_abs_errors: Vec<u32>,
    /// Vertical then horizontal divider positions.
    pub divider_abs_errors: Vec<u32>,
}

impl StructureErrors {
    /// True when widths/heights were compared on a shortened prefix.
    pub fn prefix_aligned(&self) -> bool {
        self.row_count_error != 0 || self.col_count_error != 0
    }
}

fn prefix_abs(a: &[u32], b: &[u32]) -> Vec<u32> {
    a.iter().zip(b).map(|(x, y)| x.abs_diff(*y)).collect()
}

pub fn compare(truth: &TableGenotype, pred: &TableGenotype) -> StructureErrors {
    let t = truth.canonicalize();
    let p = pred.canonicalize();
    let (dt, dp) = (t.divider_positions(), p.divider_positions());
    let mut divider_abs_errors = prefix_abs(&dt.x, &dp.x);
    divider_abs_errors.extend(prefix_abs(&dt.y, &dp.y));
    StructureErrors {
        row_count_error: t.max_rows() as i64 - p.max_rows() as i64,
        col_count_error: t.max_cols() as i64 - p.max_cols() as i64,
        x0_abs_error: t.origin_x().abs_diff(p.origin_x()),
        y0_abs_error: t.origin_y().abs_diff(p.origin_y()),
        col_width_abs_errors: prefix_abs(t.col_widths(), p.col_widths()),
        row_height_abs_errors: prefix_abs(t.row_heights(), p.row_heights()),
        divider_abs_errors,
    }
}

/// Mean and population standard deviation. Empty input gives NaN for both.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Stat {
    pub mean: f64,
    pub std: f64,
    pub n: usize,
}

impl Stat {
    pub fn of(values: impl IntoIterator<Item = f64>) -> Stat {
        let v: Vec<f64> = values.into_iter().collect();
        let n = v.len();
        if n == 0 {
            return Stat {
                mean: f64::NAN,
                std: f64::NAN,
                n,
            };
        }
        let mean = v.iter().sum::<f64>() / n as f64;
        let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n as f64;
        Stat {
            mean,
            std: var.sqrt(),
            n,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub bin_width: f64,
    /// Lower bin edge -> count, keyed by bin index (`floor(value / width)`).
    pub bins: BTreeMap<i64, usize>,
}

impl Histogram {
    pub fn new(bin_width: f64, values: impl IntoIterator<Item = f64>) -> Histogram {
        let mut bins = BTreeMap::new();
        for v in values {
            *bins.entry((v / bin_width).floor() as i64).or_insert(0) += 1;
        }
        Histogram { bin_width, bins }
    }

    pub fn total(&self) -> usize {
        self.bins.values().sum()
    }
}

pub const METRICS: [&str; 7] = [
    "row_count_error",
    "col_count_error",
    "x0_abs_error",
    "y0_abs_error",
    "row_height_abs_error",
    "col_width_abs_error",
    "divider_abs_error",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub config: String,
    pub stage: String,
    pub n_samples: usize,
    pub pct_correct_row_count: f64,
    pub pct_correct_col_count: f64,
    /// Keyed by the names in [`METRICS`].
    pub stats: BTreeMap<String, Stat>,
    pub histograms: BTreeMap<String, Histogram>,
    /// Samples whose geometry errors were computed on a shortened prefix.
    pub n_prefix_aligned: usize,
}

impl EvalReport {
    pub fn stat(&self, metric: &str) -> Stat {
        self.stats[metric]
    }
}

pub fn aggregate(config: &str, stage: &str, errors: &[StructureErrors]) -> Result<EvalReport> {
    if errors.is_empty() {
        return Err(Error::Empty("error list"));
    }
    let n = errors.len();
    let pct = |f: &dyn Fn(&StructureErrors) -> bool| errors.iter().filter(|e| f(e)).count() as f64 * 100.0 / n as f64;

    let series: [(&str, Vec<f64>, f64); 7] = [
        (METRICS[0], errors.iter().map(|e| e.row_count_error as f64).collect(), COUNT_BIN),
        (METRICS[1], errors.iter().map(|e| e.col_count_error as f64).collect(), COUNT_BIN),
        (METRICS[2], errors.iter().map(|e| e.x0_abs_error as f64).collect(), GEOMETRY_BIN),
        (METRICS[3], errors.iter().map(|e| e.y0_abs_error as f64).collect(), GEOMETRY_BIN),
        (
            METRICS[4],
            errors.iter().flat_map(|e| e.row_height_abs_errors.iter().map(|&v| v as f64)).collect(),
            GEOMETRY_BIN,
        ),
        (
            METRICS[5],
            errors.iter().flat_map(|e| e.col_width_abs_errors.iter().map(|&v| v as f64)).collect(),
            GEOMETRY_BIN,
        ),
        (
            METRICS[6],
            errors.iter().flat_map(|e| e.divider_abs_errors.iter().map(|&v| v as f64)).collect(),
            GEOMETRY_BIN,
        ),
    ];
    let mut stats = BTreeMap::new();
    let mut histograms = BTreeMap::new();
    for (name, values, width) in series {
        stats.insert(name.to_string(), Stat::of(values.iter().copied()));
        histograms.insert(name.to_string(), Histogram::new(width, values));
    }
    Ok(EvalReport {
        config: config.to_string(),
        stage: stage.to_string(),
        n_samples: n,
        pct_correct_row_count: pct(&|e| e.row_count_error == 0),
        pct_correct_col_count: pct(&|e| e.col_count_error == 0),
        stats,
        histograms,
        n_prefix_aligned: errors.iter().filter(|e| e.prefix_aligned()).count(),
    })
}

fn csv_num(v: f64) -> String {
    if v.is_nan() {
        String::new()
    } else {
        format!("{v:.4}")
    }
}

/// One row per report: config, stage, n, % correct counts, then mean and std
/// of each metric, then the prefix-aligned sample count.
pub fn reports_to_csv(reports: &[EvalReport]) -> String {
    let mut out = String::from("config,stage,n_samples,pct_correct_row_count,pct_correct_col_count");
    for m in METRICS {
        write!(out, ",{m}_mean,{m}_std").unwrap();
    }
    out.push_str(",n_prefix_aligned\n");
    for r in reports {
        write!(
            out,
            "{},{},{},{:.2},{:.2}",
            r.config, r.stage, r.n_samples, r.pct_correct_row_count, r.pct_correct_col_count
        )
        .unwrap();
        for m in METRICS {
            let s = r.stat(m);
            write!(out, ",{},{}", csv_num(s.mean), csv_num(s.std)).unwrap();
        }
        writeln!(out, ",{}", r.n_prefix_aligned).unwrap();
    }
    out
}

/// Long-format histogram table: config, stage, metric, bin edges, count.
pub fn histograms_to_csv(reports: &[EvalReport]) -> String {
    let mut out = String::from("config,stage,metric,bin_start,bin_end,count\n");
    for r in reports {
        for (metric, h) in &r.histograms {
            for (&bin, &count) in &h.bins {
                let start = bin as f64 * h.bin_width;
                writeln!(
                    out,
                    "{},{},{},{},{},{}",
                    r.config,
                    r.stage,
                    metric,
                    start,
                    start + h.bin_width,
                    count
                )
                .unwrap();
            }
        }
    }
    out
}

/// Human-readable table: metrics down, `config/stage` across, `mean (std)`.
pub fn format_table(reports: &[EvalReport]) -> String {
    let mut rows: Vec<(String, Vec<String>)> = vec![
        ("".into(), reports.iter().map(|r| format!("{}/{}", r.config, r.stage)).collect()),
        ("n".into(), reports.iter().map(|r| r.n_samples.to_string()).collect()),
        (
            "% correct row count".into(),
            reports.iter().map(|r| format!("{:.1}", r.pct_correct_row_count)).collect(),
        ),
        (
            "% correct col count".into(),
            reports.iter().map(|r| format!("{:.1}", r.pct_correct_col_count)).collect(),
        ),
    ];
    for m in METRICS {
        rows.push((
            m.replace('_', " "),
            reports
                .iter()
                .map(|r| {
                    let s = r.stat(m);
                    if s.n == 0 {
                        "-".into()
                    } else {
                        format!("{:.2} ({:.2})", s.mean, s.std)
                    }
                })
                .collect(),
        ));
    }
    rows.push((
        "prefix-aligned samples".into(),
        reports.iter().map(|r| r.n_prefix_aligned.to_string()).collect(),
    ));

    let label_w = rows.iter().map(|r| r.0.len()).max().unwrap_or(0);
    let col_w: Vec<usize> = (0..reports.len())
        .map(|i| rows.iter().map(|r| r.1[i].len()).max().unwrap_or(0))
        .collect();
    let mut out = String::new();
    for (label, cells) in rows {
        write!(out, "{label:<label_w$}").unwrap();
        for (c, w) in cells.iter().zip(&col_w) {
            write!(out, "  {c:>w$}").unwrap();
        }
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_has_zero_errors() {
        let g = TableGenotype::new(10, 20, vec![40, 50], vec![70, 80, 90]);
        let e = compare(&g, &g);
        assert_eq!((e.row_count_error, e.col_count_error), (0, 0));
        assert!(e
            .col_width_abs_errors
            .iter()
            .chain(&e.row_height_abs_errors)
            .chain(&e.divider_abs_errors)
            .all(|&v| v == 0));
        assert!(!e.prefix_aligned());
    }

    #[test]
    fn count_error_sign() {
        let t = TableGenotype::new(0, 0, vec![40; 4], vec![70]);
        let p = TableGenotype::new(0, 0, vec![40; 3], vec![70]);
        assert_eq!(compare(&t, &p).row_count_error, 1);
        assert_eq!(compare(&p, &t).row_count_error, -1);
    }

    #[test]
    fn two_sample_std() {
        let mk = |r: i64| StructureErrors {
            row_count_error: r,
            col_count_error: 0,
            x0_abs_error: 0,
            y0_abs_error: 0,
            col_width_abs_errors: vec![],
            row_height_abs_errors: vec![],
            divider_abs_errors: vec![],
        };
        let r = aggregate("c", "s", &[mk(1), mk(-1)]).unwrap();
        let s = r.stat("row_count_error");
        assert_eq!((s.mean, s.std), (0.0, 1.0));
        assert_eq!(r.pct_correct_row_count, 0.0);
        assert_eq!(r.pct_correct_col_count, 100.0);
        assert!(r.stat("col_width_abs_error").mean.is_nan());
    }

    #[test]
    fn empty_aggregate_fails() {
        assert!(matches!(aggregate("c", "s", &[]), Err(Error::Empty(_))));
    }

    #[test]
    fn histogram_bins() {
        let h = Histogram::new(2.0, [0.0, 1.0, 2.0, 3.9, 4.0]);
        assert_eq!(h.bins.get(&0), Some(&2));
        assert_eq!(h.bins.get(&1), Some(&2));
        assert_eq!(h.bins.get(&2), Some(&1));
        let h = Histogram::new(1.0, [-1.0, 0.0, 1.0]);
        assert_eq!(h.bins.keys().copied().collect::<Vec<_>>(), vec![-1, 0, 1]);
    }
}
