//! Strategy for `L_m^{n+k} + L_m^n = L_r`: two logarithms, exponent
//! reduction through the Legendre convergent criterion, expected outcome
//! "no solutions".

use super::{
    check_exact_big, check_exact_u64, check_upper_le_u64, BoundsOutcome, EquationStrategy,
    PipelineConfig, ReferenceValues, SearchBoxSpec,
};
use crate::baker::{legendre_reduce_lucas, m_max_from_r, n_max_from_r, r_cap_from_box};
use crate::cert::{CertificateBuilder, ReductionRow, ReductionTable, Verdict};
use crate::error::{Error, Result};
use crate::real::{golden_conjugate_abs, with_precision_retries, IntervalCmp, VerifiedReal};
use crate::search::SearchBox;
use crate::seq::SequenceKind;
use num_bigint::{BigInt, Sign};

pub struct LucasEquation;

static REFERENCE: ReferenceValues = ReferenceValues {
    r_floor: 8,
    k_coefficient: "5380000000",
    r_max: "11000000000000",
    r_band: ("10000000000000", "13000000000000"),
    k_max: "171000000000",
    m_max: 55,
    n_max: 61,
    final_box: SearchBoxSpec {
        m: (2, 12),
        n: (2, 16),
        k: (1, 8),
        r_cap: 313,
    },
    solutions: &[],
};

/// Reference values of the reduction chain.
const REDUCED_K: u64 = 8;
const POST_REDUCTION_R: &str = "3865";
const POST_REDUCTION_M: u64 = 12;
const POST_REDUCTION_N: u64 = 16;
const FINAL_R_CAP: &str = "313";

impl EquationStrategy for LucasEquation {
    fn name(&self) -> &'static str {
        "lucas"
    }

    fn kind(&self) -> SequenceKind {
        SequenceKind::Lucas
    }

    fn reference(&self) -> &'static ReferenceValues {
        &REFERENCE
    }

    fn certify_slack(&self, bits: u32, cert: &mut CertificateBuilder) -> Result<()> {
        // The linear-form upper bound needs |beta|^r < 0.0025 L_m^n for
        // every r >= 8 and L_m^n >= 9. Since |beta| < 1, the worst case is
        // |beta|^8 against 0.0025 * 9 = 0.0225; the displayed intermediate
        // 0.022 is certified along the way.
        let tail = with_precision_retries(bits, "lucas slack", |w| {
            let beta8 = golden_conjugate_abs(w).powi(8);
            let under_one = golden_conjugate_abs(w).compare(&VerifiedReal::from_i64(1, w))
                == IntervalCmp::Less;
            let bound_022 = VerifiedReal::from_ratio(&BigInt::from(22), &BigInt::from(1000), w)?;
            let bound_0225 = VerifiedReal::from_ratio(&BigInt::from(225), &BigInt::from(10000), w)?;
            match (
                beta8.compare(&bound_022),
                beta8.compare(&bound_0225),
                under_one,
            ) {
                (IntervalCmp::Less, IntervalCmp::Less, true) => Ok(Some((beta8, true))),
                (IntervalCmp::Overlapping, _, _) | (_, IntervalCmp::Overlapping, _) => Ok(None),
                _ => Ok(Some((beta8, false))),
            }
        })?;
        cert.push_stage(
            "slack.conjugate_tail",
            "|beta|^r < 0.022 < 0.0025 L_m^n for all r >= 8, m, n >= 2, so the \
             linear form is below 1.0025/L_m^k",
            tail.0.hi().to_decimal_string(),
            Some("0.022".into()),
            if tail.1 {
                Verdict::Matches
            } else {
                Verdict::Discrepancy
            },
        );
        Ok(())
    }

    fn reduce_stage(
        &self,
        bounds: &BoundsOutcome,
        cfg: &PipelineConfig,
        cert: &mut CertificateBuilder,
    ) -> Result<SearchBox> {
        let kind = SequenceKind::Lucas;
        let red = legendre_reduce_lucas(
            bounds.m_max,
            bounds.n_max,
            &bounds.k_max,
            cfg.precision_bits,
        )?;

        cert.push_table(ReductionTable {
            name: "legendre".into(),
            parameter: red.threshold.to_string(),
            rows: red
                .rows
                .iter()
                .map(|r| ReductionRow {
                    m: r.m,
                    convergent_index: r.crossing_index as u64,
                    q: r.q_at_crossing.to_string(),
                    max_quotient: Some(r.max_quotient.to_string()),
                    epsilon_lo: None,
                    k_bound: r.k_threshold,
                })
                .collect(),
        });
        let witness_bits = red.rows.iter().map(|r| r.stable_at_bits).max().unwrap_or(0);
        cert.record_precision("reduction.legendre", witness_bits);

        check_exact_u64(
            cert,
            "reduction.k_max",
            "largest exponent compatible with the convergent-criterion lower \
             bound, maxed over the base index",
            red.k_max,
            REDUCED_K,
        );

        let r2 = r_cap_from_box(kind, bounds.m_max, bounds.n_max, &red.k_max.into());
        check_exact_big(
            cert,
            "reduction.replay.r_max",
            "index cap from the growth comparison over the reduced box",
            &BigInt::from_biguint(Sign::Plus, r2.clone()),
            POST_REDUCTION_R,
        );
        let m2 = m_max_from_r(kind, &r2, cfg.precision_bits)?;
        let n2 = n_max_from_r(kind, &r2, cfg.precision_bits)?;
        check_exact_u64(
            cert,
            "reduction.replay.m_max",
            "divisibility bound on m at the reduced index cap",
            m2,
            POST_REDUCTION_M,
        );
        check_exact_u64(
            cert,
            "reduction.replay.n_max",
            "divisibility bound on n at the reduced index cap",
            n2,
            POST_REDUCTION_N,
        );

        let r_final = r_cap_from_box(kind, m2, n2, &red.k_max.into());
        check_exact_big(
            cert,
            "search.box.r_cap",
            "index cap over the final box",
            &BigInt::from_biguint(Sign::Plus, r_final.clone()),
            FINAL_R_CAP,
        );

        let r_cap: u64 = r_final
            .try_into()
            .map_err(|_| Error::Domain("final index cap exceeds u64".into()))?;
        check_upper_le_u64(
            cert,
            "search.box.k_max",
            "exponent range of the final box",
            red.k_max,
            REFERENCE.final_box.k.1,
        );
        Ok(SearchBox {
            kind,
            m_range: (2, m2),
            n_range: (2, n2),
            k_range: (1, red.k_max),
            r_cap,
        })
    }
}
