//! Run reports and their CSV / JSON / markdown renderings.
//!
//! Every float is rounded to 12 significant digits when a row is built, so
//! the JSON form round-trips exactly and all renderings are byte-stable.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

/// Rounds to 12 significant digits; non-finite values become `None`.
pub fn sig12(x: f64) -> Option<f64> {
    if !x.is_finite() {
        return None;
    }
    Some(format!("{x:.11e}").parse().expect("formatted float parses"))
}

fn fmt12(x: Option<f64>) -> String {
    x.map_or_else(String::new, |v| format!("{v:.11e}"))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Row {
    pub name: String,
    /// What produced the oracle value (closed form, quadrature, ...).
    pub oracle_kind: String,
    pub oracle: Option<f64>,
    pub estimate: Option<f64>,
    pub se: Option<f64>,
    /// Accepted `|estimate - oracle|` (or bound on `estimate`).
    pub tolerance: Option<f64>,
    pub pass: bool,
    pub repro: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnvStamp {
    pub package: String,
    pub version: String,
    pub arch: String,
    pub os: String,
}

impl EnvStamp {
    pub fn current() -> EnvStamp {
        EnvStamp {
            package: env!("CARGO_PKG_NAME").into(),
            version: env!("CARGO_PKG_VERSION").into(),
            arch: std::env::consts::ARCH.into(),
            os: std::env::consts::OS.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub experiment: String,
    pub env: EnvStamp,
    pub config: String,
    pub rows: Vec<Row>,
}

/// Builds rows that share a reproduction command.
pub struct RowSink {
    repro: String,
    pub rows: Vec<Row>,
}

impl RowSink {
    pub fn new(repro: String) -> RowSink {
        RowSink { repro, rows: Vec::new() }
    }

    /// General row: `pass` is decided by the caller.
    #[allow(clippy::too_many_arguments)]
    pub fn push(
        &mut self,
        name: impl Into<String>,
        oracle_kind: &str,
        oracle: f64,
        estimate: f64,
        se: f64,
        tolerance: f64,
        pass: bool,
    ) {
        self.rows.push(Row {
            name: name.into(),
            oracle_kind: oracle_kind.into(),
            oracle: sig12(oracle),
            estimate: sig12(estimate),
            se: sig12(se),
            tolerance: sig12(tolerance),
            pass,
            repro: self.repro.clone(),
        });
    }

    /// `|estimate - oracle| <= tolerance`.
    pub fn close(&mut self, name: impl Into<String>, oracle_kind: &str, oracle: f64, estimate: f64, se: f64, tolerance: f64) {
        let pass = (estimate - oracle).abs() <= tolerance;
        self.push(name, oracle_kind, oracle, estimate, se, tolerance, pass);
    }

    /// `estimate <= bound`.
    pub fn below(&mut self, name: impl Into<String>, oracle_kind: &str, estimate: f64, bound: f64) {
        self.push(name, oracle_kind, 0.0, estimate, f64::NAN, bound, estimate <= bound);
    }

    /// Monte Carlo mean within `n_se` standard errors of the oracle.
    pub fn within_se(&mut self, name: impl Into<String>, oracle_kind: &str, oracle: f64, mean: f64, se: f64, n_se: f64) {
        self.close(name, oracle_kind, oracle, mean, se, n_se * se);
    }
}

impl RunReport {
    pub fn passed(&self) -> bool {
        self.rows.iter().all(|r| r.pass)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Row> {
        self.rows.iter().filter(|r| !r.pass)
    }

    pub fn to_json(&self) -> String {
        // Through Value so that object keys come out sorted.
        let v = serde_json::to_value(self).expect("report serialises");
        let mut s = serde_json::to_string_pretty(&v).expect("value serialises");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> serde_json::Result<RunReport> {
        serde_json::from_str(text)
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["name", "oracle_kind", "oracle", "estimate", "se", "tolerance", "pass", "repro"])
            .expect("in-memory write");
        for r in &self.rows {
            w.write_record([
                r.name.as_str(),
                &r.oracle_kind,
                &fmt12(r.oracle),
                &fmt12(r.estimate),
                &fmt12(r.se),
                &fmt12(r.tolerance),
                if r.pass { "true" } else { "false" },
                &r.repro,
            ])
            .expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("flush")).expect("utf-8")
    }

    pub fn to_markdown(&self) -> String {
        let mut s = String::new();
        let failed = self.failures().count();
        let _ = writeln!(s, "# {}\n", self.experiment);
        let _ = writeln!(
            s,
            "{} checks, {} failed ({} {} on {}/{}).\n",
            self.rows.len(),
            failed,
            self.env.package,
            self.env.version,
            self.env.arch,
            self.env.os
        );
        let _ = writeln!(s, "| check | oracle | estimate | se | tolerance | result |");
        let _ = writeln!(s, "|---|---|---|---|---|---|");
        for r in &self.rows {
            let _ = writeln!(
                s,
                "| {} | {} | {} | {} | {} | {} |",
                r.name,
                fmt12(r.oracle),
                fmt12(r.estimate),
                fmt12(r.se),
                fmt12(r.tolerance),
                if r.pass { "pass" } else { "FAIL" }
            );
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn report() -> RunReport {
        let mut sink = RowSink::new("gmc-lab sample --config config.toml".into());
        sink.close("a", "closed form", 1.0 / 3.0, 0.333, 0.01, 0.01);
        sink.within_se("b", "quadrature", 0.0, 0.5, 0.1, 3.0);
        sink.below("c", "bound", f64::NAN, 1.0);
        RunReport { experiment: "sample".into(), env: EnvStamp::current(), config: "kind = 1".into(), rows: sink.rows }
    }

    #[test]
    fn twelve_digits() {
        assert_eq!(sig12(1.0 / 3.0), Some(0.333333333333));
        assert_eq!(sig12(f64::INFINITY), None);
        assert_eq!(fmt12(Some(2.5)), "2.50000000000e0");
    }

    #[test]
    fn json_round_trips() {
        let r = report();
        assert_eq!(RunReport::from_json(&r.to_json()).unwrap(), r);
        assert!(!r.passed());
        assert_eq!(r.failures().count(), 2);
    }

    #[test]
    fn csv_has_one_line_per_check() {
        let r = report();
        let text = r.to_csv();
        let mut rd = csv::Reader::from_reader(text.as_bytes());
        assert_eq!(rd.records().count(), r.rows.len());
        assert!(r.to_markdown().contains("| c |"));
    }
}
