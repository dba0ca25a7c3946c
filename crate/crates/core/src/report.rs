//! Certificate reports and their serialization.
//!
//! JSON output is deterministic: struct field order is fixed, every
//! float is written with 17 significant digits (exact f64 round-trip),
//! and no map types with unstable iteration order appear anywhere in
//! the report tree.

use std::io;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::config::RunConfig;
use crate::first_order::{FirstOrderCertificate, FirstOrderVerdict};
use crate::multipliers::JacobianUniquenessReport;
use crate::oracle::OracleReport;
use crate::second_order::SecondOrderCertificate;
use crate::verdict::Verdict;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PointEcho {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CertificateReport {
    pub schema: u32,
    pub problem_digest: String,
    pub point: PointEcho,
    pub first_order: Option<FirstOrderCertificate>,
    pub second_order: Option<SecondOrderCertificate>,
    pub jacobian: Option<JacobianUniquenessReport>,
    pub oracle: Option<OracleReport>,
    pub overall: Verdict,
    pub config: RunConfig,
    pub version: String,
}

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("serialization failed: {0}")]
    Serialize(#[from] serde_json::Error),
    #[error("i/o error: {0}")]
    Io(#[from] io::Error),
}

impl CertificateReport {
    /// Overall verdict: minimum over the enabled stages' verdicts.
    pub fn combined_verdict(&self) -> Verdict {
        let mut overall = Verdict::SufficientCertified;
        let mut shrink = |v: Verdict| {
            if v < overall {
                overall = v;
            }
        };
        if let Some(first) = &self.first_order {
            shrink(match first.overall {
                FirstOrderVerdict::Certified => Verdict::SufficientCertified,
                FirstOrderVerdict::Refuted => Verdict::Refuted,
                FirstOrderVerdict::Inconclusive => Verdict::Inconclusive,
            });
        }
        if let Some(second) = &self.second_order {
            shrink(second.overall);
        }
        if let Some(jac) = &self.jacobian {
            // a failing diagnostic weakens the claim but never refutes
            shrink(if jac.overall {
                Verdict::SufficientCertified
            } else {
                Verdict::Inconclusive
            });
        }
        if let Some(oracle) = &self.oracle {
            shrink(oracle.overall);
        }
        overall
    }
}

// JSON formatter writing every f64 with 17 significant digits.
struct SigDigits<F> {
    inner: F,
}

impl<F: serde_json::ser::Formatter> serde_json::ser::Formatter for SigDigits<F> {
    fn write_f64<W>(&mut self, writer: &mut W, value: f64) -> io::Result<()>
    where
        W: ?Sized + io::Write,
    {
        debug_assert!(value.is_finite(), "non-finite float reached the report");
        write!(writer, "{value:.16e}")
    }

    fn write_f32<W>(&mut self, writer: &mut W, value: f32) -> io::Result<()>
    where
        W: ?Sized + io::Write,
    {
        write!(writer, "{value:.7e}")
    }

    fn begin_array<W>(&mut self, writer: &mut W) -> io::Result<()>
    where
        W: ?Sized + io::Write,
    {
        self.inner.begin_array(writer)
    }

    fn end_array<W>(&mut self, writer: &mut W) -> io::Result<()>
    where
        W: ?Sized + io::Write,
    {
        self.inner.end_array(writer)
    }

    fn begin_array_value<W>(&mut self, writer: &mut W, first: bool) -> io::Result<()>
    where
        W: ?Sized + io::Write,
    {
        self.inner.begin_array_value(writer, first)
    }

    fn begin_object<W>(&mut self, writer: &mut W) -> io::Result<()>
    where
        W: ?Sized + io::Write,
    {
        self.inner.begin_object(writer)
    }

    fn end_object<W>(&mut self, writer: &mut W) -> io::Result<()>
    where
        W: ?Sized + io::Write,
    {
        self.inner.end_object(writer)
    }

    fn begin_object_key<W>(&mut self, writer: &mut W, first: bool) -> io::Result<()>
    where
        W: ?Sized + io::Write,
    {
        self.inner.begin_object_key(writer, first)
    }

    fn begin_object_value<W>(&mut self, writer: &mut W) -> io::Result<()>
    where
        W: ?Sized + io::Write,
    {
        self.inner.begin_object_value(writer)
    }
}

/// Serialize a report to deterministic JSON (17 significant digits).
pub fn to_json(report: &CertificateReport) -> Result<String, ReportError> {
    let mut out = Vec::new();
    let formatter = SigDigits {
        inner: serde_json::ser::CompactFormatter,
    };
    let mut ser = serde_json::Serializer::with_formatter(&mut out, formatter);
    report.serialize(&mut ser)?;
    Ok(String::from_utf8(out).expect("JSON is UTF-8"))
}

pub fn from_json(text: &str) -> Result<CertificateReport, ReportError> {
    Ok(serde_json::from_str(text)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::RunConfig;

    fn minimal_report() -> CertificateReport {
        CertificateReport {
            schema: SCHEMA_VERSION,
            problem_digest: "abc".into(),
            point: PointEcho {
                x: vec![0.5, -1.25],
                y: vec![1.0 / 3.0],
            },
            first_order: None,
            second_order: None,
            jacobian: None,
            oracle: None,
            overall: Verdict::Inconclusive,
            config: RunConfig::default(),
            version: "0.1.0".into(),
        }
    }

    #[test]
    fn json_round_trips() {
        let report = minimal_report();
        let json = to_json(&report).unwrap();
        let back = from_json(&json).unwrap();
        assert_eq!(report, back);
    }

    #[test]
    fn json_is_deterministic() {
        let report = minimal_report();
        assert_eq!(to_json(&report).unwrap(), to_json(&report).unwrap());
    }

    #[test]
    fn floats_have_seventeen_digits() {
        let json = to_json(&minimal_report()).unwrap();
        assert!(json.contains("3.3333333333333331e-1"));
        assert!(json.contains("5.0000000000000000e-1"));
    }

    #[test]
    fn top_level_key_order_is_stable() {
        let json = to_json(&minimal_report()).unwrap();
        let keys = [
            "schema",
            "problem_digest",
            "point",
            "first_order",
            "second_order",
            "jacobian",
            "oracle",
            "overall",
            "config",
            "version",
        ];
        let mut last = 0;
        for key in keys {
            let pos = json.find(&format!("\"{key}\"")).unwrap();
            assert!(pos > last || last == 0, "key {key} out of order");
            last = pos;
        }
    }
}
