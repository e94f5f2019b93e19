//! The machine-readable proof certificate: an ordered record of every bound
//! stage with its computed value, the expected reference value, and a
//! verdict, plus the reduction tables and the final solution list.
//!
//! Format: one JSON document, UTF-8, keys in declaration order, big integers
//! and interval endpoints as exact decimal strings (never floats). Two runs
//! with the same configuration produce byte-identical documents.

use crate::error::{Error, Result};
use crate::seq::SolutionTuple;
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    /// Computed value agrees with the reference (within the stage's rule).
    Matches,
    /// Computed value differs but keeps every downstream step valid
    /// (a tighter or equal bound).
    Conservative,
    /// Computed value contradicts the reference; strict mode exits nonzero.
    Discrepancy,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StageRecord {
    pub name: String,
    /// What the stage asserts, in words.
    pub claim: String,
    pub computed: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reference: Option<String>,
    pub verdict: Verdict,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReductionRow {
    pub m: u64,
    pub convergent_index: u64,
    pub q: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_quotient: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub epsilon_lo: Option<String>,
    pub k_bound: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReductionTable {
    pub name: String,
    /// The threshold parameter of the pass (`S` or `M`), decimal.
    pub parameter: String,
    pub rows: Vec<ReductionRow>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SolutionRecord {
    pub r: u64,
    pub m: u64,
    pub n: u64,
    pub k: u64,
}

impl From<SolutionTuple> for SolutionRecord {
    fn from(t: SolutionTuple) -> Self {
        SolutionRecord {
            r: t.r,
            m: t.m,
            n: t.n,
            k: t.k,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PrecisionRecord {
    pub stage: String,
    pub bits: u32,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProofCertificate {
    pub equation: String,
    pub toolkit_version: String,
    pub precision_bits: u32,
    pub stages: Vec<StageRecord>,
    pub reduction_tables: Vec<ReductionTable>,
    pub solutions: Vec<SolutionRecord>,
    pub precision_report: Vec<PrecisionRecord>,
    pub verdict: Verdict,
}

impl ProofCertificate {
    pub fn has_discrepancy(&self) -> bool {
        self.verdict == Verdict::Discrepancy
    }

    /// Serializes with fixed key order and a trailing newline; byte-stable
    /// across runs.
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("certificate serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Certificate(e.to_string()))
    }

    pub fn stage(&self, name: &str) -> Option<&StageRecord> {
        self.stages.iter().find(|s| s.name == name)
    }
}

/// Accumulates stages in pipeline order and tracks the overall verdict.
pub struct CertificateBuilder {
    equation: String,
    precision_bits: u32,
    stages: Vec<StageRecord>,
    tables: Vec<ReductionTable>,
    precision_report: Vec<PrecisionRecord>,
}

impl CertificateBuilder {
    pub fn new(equation: &str, precision_bits: u32) -> Self {
        CertificateBuilder {
            equation: equation.to_string(),
            precision_bits,
            stages: Vec::new(),
            tables: Vec::new(),
            precision_report: Vec::new(),
        }
    }

    pub fn push_stage(
        &mut self,
        name: &str,
        claim: &str,
        computed: String,
        reference: Option<String>,
        verdict: Verdict,
    ) {
        self.stages.push(StageRecord {
            name: name.to_string(),
            claim: claim.to_string(),
            computed,
            reference,
            verdict,
        });
    }

    pub fn push_table(&mut self, table: ReductionTable) {
        self.tables.push(table);
    }

    pub fn record_precision(&mut self, stage: &str, bits: u32) {
        self.precision_report.push(PrecisionRecord {
            stage: stage.to_string(),
            bits,
        });
    }

    pub fn last_verdict(&self) -> Option<Verdict> {
        self.stages.last().map(|s| s.verdict)
    }

    pub fn finish(self, solutions: Vec<SolutionTuple>) -> ProofCertificate {
        let worst = self
            .stages
            .iter()
            .map(|s| s.verdict)
            .fold(Verdict::Matches, |acc, v| match (acc, v) {
                (Verdict::Discrepancy, _) | (_, Verdict::Discrepancy) => Verdict::Discrepancy,
                (Verdict::Conservative, _) | (_, Verdict::Conservative) => Verdict::Conservative,
                _ => Verdict::Matches,
            });
        ProofCertificate {
            equation: self.equation,
            toolkit_version: env!("CARGO_PKG_VERSION").to_string(),
            precision_bits: self.precision_bits,
            stages: self.stages,
            reduction_tables: self.tables,
            solutions: solutions.into_iter().map(SolutionRecord::from).collect(),
            precision_report: self.precision_report,
            verdict: worst,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> ProofCertificate {
        let mut b = CertificateBuilder::new("pell", 192);
        b.push_stage(
            "floor.r_min",
            "smallest admissible index",
            "4".into(),
            Some("4".into()),
            Verdict::Matches,
        );
        b.push_stage(
            "search.box.r_cap",
            "index cap over the final box",
            "497".into(),
            Some("618".into()),
            Verdict::Conservative,
        );
        b.push_table(ReductionTable {
            name: "pass2".into(),
            parameter: "121".into(),
            rows: vec![ReductionRow {
                m: 12,
                convergent_index: 15,
                q: "706130".into(),
                max_quotient: None,
                epsilon_lo: Some("0.00007".into()),
                k_bound: 33,
            }],
        });
        b.record_precision("reduction.pass2", 192);
        b.finish(vec![SolutionTuple { r: 4, m: 2, n: 2, k: 1 }])
    }

    #[test]
    fn round_trip_is_identity() {
        let cert = sample();
        let json = cert.to_json();
        let parsed = ProofCertificate::from_json(&json).unwrap();
        assert_eq!(cert, parsed);
        // And serialization is reproducible byte for byte.
        assert_eq!(json, parsed.to_json());
    }

    #[test]
    fn overall_verdict_is_worst_stage() {
        let cert = sample();
        assert_eq!(cert.verdict, Verdict::Conservative);
        assert!(!cert.has_discrepancy());
    }

    #[test]
    fn rejects_malformed_json() {
        assert!(ProofCertificate::from_json("{]").is_err());
    }
}
