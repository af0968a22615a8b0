//! Rendering of experiment results as CSV and JSON documents.
//!
//! Floats are written with 17 significant digits so they parse back to the
//! same binary value. Rendering is a pure function of the result, which keeps
//! repeated runs byte-identical.

use serde::Serialize;

use crate::harness::{ExperimentConfig, ExperimentResult, SkippedTriple, TripleResult};

pub const SUMMARY_HEADER: [&str; 9] = [
    "channel", "params", "class", "n", "samples", "mean", "variance", "min", "max",
];

/// `%.17g`-equivalent scientific notation.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn to_string(buf: Vec<u8>) -> String {
    String::from_utf8(buf).expect("csv output is UTF-8")
}

/// One row per triple.
pub fn summary_csv(result: &ExperimentResult) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(SUMMARY_HEADER).expect("write to Vec");
    for e in &result.entries {
        w.write_record([
            e.channel.kind().name().to_string(),
            e.channel.params_label(),
            e.class.name().to_string(),
            e.n.to_string(),
            e.stats.count.to_string(),
            fmt_f64(e.stats.mean),
            fmt_f64(e.stats.variance),
            fmt_f64(e.stats.min),
            fmt_f64(e.stats.max),
        ])
        .expect("write to Vec");
    }
    to_string(w.into_inner().expect("flush to Vec"))
}

/// `bin_left,bin_right,count` rows.
pub fn histogram_csv(entry: &TripleResult) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["bin_left", "bin_right", "count"])
        .expect("write to Vec");
    let h = &entry.stats.histogram;
    for (k, count) in h.counts.iter().enumerate() {
        let (l, r) = h.edges(k);
        w.write_record([fmt_f64(l), fmt_f64(r), count.to_string()])
            .expect("write to Vec");
    }
    to_string(w.into_inner().expect("flush to Vec"))
}

/// `<channel>_<class>_n<k>.hist.csv`
pub fn histogram_file_name(entry: &TripleResult) -> String {
    format!(
        "{}_{}_n{}.hist.csv",
        entry.channel.kind().name(),
        entry.class.name(),
        entry.n
    )
}

#[derive(Serialize)]
struct SummaryRow<'a> {
    channel: &'static str,
    params: String,
    class: &'static str,
    n: usize,
    samples: usize,
    mean: f64,
    variance: f64,
    min: f64,
    max: f64,
    histogram_file: String,
    histogram: &'a [u64],
}

#[derive(Serialize)]
struct SummaryDoc<'a> {
    rows: Vec<SummaryRow<'a>>,
    skipped: &'a [SkippedTriple],
}

/// Same fields as [`summary_csv`], plus the histogram counts.
pub fn summary_json(result: &ExperimentResult) -> String {
    let rows = result
        .entries
        .iter()
        .map(|e| SummaryRow {
            channel: e.channel.kind().name(),
            params: e.channel.params_label(),
            class: e.class.name(),
            n: e.n,
            samples: e.stats.count,
            mean: e.stats.mean,
            variance: e.stats.variance,
            min: e.stats.min,
            max: e.stats.max,
            histogram_file: histogram_file_name(e),
            histogram: &e.stats.histogram.counts,
        })
        .collect();
    let doc = SummaryDoc {
        rows,
        skipped: &result.skipped,
    };
    serde_json::to_string_pretty(&doc).expect("summary serializes")
}

#[derive(Serialize)]
struct Manifest<'a> {
    config: &'a ExperimentConfig,
    metadata: &'a crate::harness::RunMetadata,
    skipped: &'a [SkippedTriple],
    files: Vec<String>,
}

/// Config echo plus run metadata; enough to re-run the experiment.
pub fn manifest_json(
    config: &ExperimentConfig,
    result: &ExperimentResult,
    files: &[String],
) -> String {
    let doc = Manifest {
        config,
        metadata: &result.metadata,
        skipped: &result.skipped,
        files: files.to_vec(),
    };
    serde_json::to_string_pretty(&doc).expect("manifest serializes")
}

#[derive(Serialize)]
struct Series {
    class: &'static str,
    n: Vec<usize>,
    mean: Vec<f64>,
    histogram_files: Vec<String>,
}

#[derive(Serialize)]
struct FigureDoc {
    kind: &'static str,
    title: String,
    x_label: &'static str,
    y_label: &'static str,
    series: Vec<Series>,
}

/// Plot description for the average-fidelity-vs-n figure of each channel in
/// the result: one series per state class.
pub fn figure_json(result: &ExperimentResult) -> String {
    let mut figures = Vec::new();
    let mut channels: Vec<_> = result.entries.iter().map(|e| e.channel).collect();
    channels.dedup();
    for channel in channels {
        let mut series = Vec::new();
        for class in crate::sampler::StateClass::ALL {
            let rows: Vec<&TripleResult> = result
                .entries
                .iter()
                .filter(|e| e.channel == channel && e.class == class)
                .collect();
            if rows.is_empty() {
                continue;
            }
            series.push(Series {
                class: class.name(),
                n: rows.iter().map(|e| e.n).collect(),
                mean: rows.iter().map(|e| e.stats.mean).collect(),
                histogram_files: rows.iter().map(|e| histogram_file_name(e)).collect(),
            });
        }
        figures.push(FigureDoc {
            kind: "average-fidelity-vs-qubits",
            title: format!("{} ({})", channel.kind().name(), channel.params_label()),
            x_label: "number of qubits",
            y_label: "average fidelity",
            series,
        });
    }
    serde_json::to_string_pretty(&figures).expect("figure serializes")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::ChannelSpec;
    use crate::harness::run;
    use crate::sampler::StateClass;

    fn tiny() -> (ExperimentConfig, ExperimentResult) {
        let cfg = ExperimentConfig {
            channels: vec![ChannelSpec::Dephasing { gamma2_t: 2.48 }],
            classes: vec![StateClass::General, StateClass::GhzType],
            qubit_counts: vec![1, 2],
            samples: 40,
            master_seed: 3,
            bins: 4,
            workers: 0,
        };
        let res = run(&cfg).unwrap();
        (cfg, res)
    }

    #[test]
    fn floats_round_trip() {
        for x in [0.0, 1.0, 0.1, 1.0 / 3.0, 2.0f64.sqrt() / 7.0, 1e-300] {
            let s = fmt_f64(x);
            assert_eq!(s.parse::<f64>().unwrap(), x, "{s}");
        }
        assert_eq!(fmt_f64(0.5), "5.0000000000000000e-1");
    }

    #[test]
    fn summary_layout() {
        let (_, res) = tiny();
        let csv = summary_csv(&res);
        let mut lines = csv.lines();
        assert_eq!(
            lines.next().unwrap(),
            "channel,params,class,n,samples,mean,variance,min,max"
        );
        let rows: Vec<&str> = lines.collect();
        assert_eq!(rows.len(), 3);
        assert!(rows[0].starts_with("dephasing,gamma2_t=2.48,general,1,40,"));
        let mean: f64 = rows[0].split(',').nth(5).unwrap().parse().unwrap();
        assert_eq!(mean, res.entries[0].stats.mean);
    }

    #[test]
    fn histogram_layout() {
        let (_, res) = tiny();
        let e = &res.entries[0];
        assert_eq!(histogram_file_name(e), "dephasing_general_n1.hist.csv");
        let csv = histogram_csv(e);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "bin_left,bin_right,count");
        assert_eq!(lines.len(), 5);
        let total: u64 = lines[1..]
            .iter()
            .map(|l| l.rsplit(',').next().unwrap().parse::<u64>().unwrap())
            .sum();
        assert_eq!(total, 40);
    }

    #[test]
    fn json_documents_parse() {
        let (cfg, res) = tiny();
        let v: serde_json::Value = serde_json::from_str(&summary_json(&res)).unwrap();
        assert_eq!(v["rows"].as_array().unwrap().len(), 3);
        assert_eq!(v["skipped"].as_array().unwrap().len(), 1);
        let m: serde_json::Value = serde_json::from_str(&manifest_json(&cfg, &res, &[])).unwrap();
        let back: ExperimentConfig = serde_json::from_value(m["config"].clone()).unwrap();
        assert_eq!(back, cfg);
        let f: serde_json::Value = serde_json::from_str(&figure_json(&res)).unwrap();
        assert_eq!(f[0]["series"].as_array().unwrap().len(), 2);
    }
}
