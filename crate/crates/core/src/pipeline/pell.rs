//! Strategy for `P_m^{n+k} + P_m^n = P_r`: three logarithms, two
//! Dujella-Petho reduction passes, expected outcome "(4, 2, 2, 1) only".

use super::{
    check_exact_big, check_exact_u64, check_greater_ratio, check_upper_le_big, BoundsOutcome,
    EquationStrategy, PipelineConfig, ReferenceValues, SearchBoxSpec,
};
use crate::baker::{m_max_from_r, n_max_from_r, r_cap_from_box};
use crate::cert::{CertificateBuilder, ReductionRow, ReductionTable, Verdict};
use crate::error::{Error, Result};
use crate::real::{
    ln2, ln_silver, ln_uint, silver_conjugate_abs, two_sqrt_two, with_precision_retries,
    IntervalCmp, VerifiedReal,
};
use crate::reduce::{aggregate_pass, reduce, ReductionInstance, ReductionResult};
use crate::search::SearchBox;
use crate::seq::{pell, SequenceKind};
use num_bigint::{BigInt, BigUint, Sign};
use rayon::prelude::*;
use std::sync::Arc;

pub struct PellEquation;

static REFERENCE: ReferenceValues = ReferenceValues {
    r_floor: 4,
    k_coefficient: "3810000000000",
    r_max: "6130000000000000",
    r_band: ("5500000000000000", "7000000000000000"),
    k_max: "145000000000000",
    m_max: 43,
    n_max: 52,
    final_box: SearchBoxSpec {
        m: (2, 12),
        n: (2, 12),
        k: (1, 33),
        r_cap: 618,
    },
    solutions: &[(4, 2, 2, 1)],
};

/// Reference values of the two reduction passes.
const PASS1_MAX_Q: &str = "641041703362692900403363";
const PASS1_ARGMAX_M: u64 = 43;
const PASS1_EPS_NUM: u64 = 819; // lower endpoint must exceed 819 / 10^12
const PASS1_EPS_POW10: u32 = 12;
const PASS1_EPS_DISPLAY: &str = "0.000000000819224442290261";
const PASS1_K: u64 = 109;
const POST_PASS1_R: &str = "6764";
const POST_PASS1_M: u64 = 12;
const POST_PASS1_N: u64 = 12;
const PASS2_PARAM: u64 = 121;
const PASS2_MAX_Q: &str = "706130";
const PASS2_ARGMAX_M: u64 = 12;
const PASS2_EPS_NUM: u64 = 761; // lower endpoint must exceed 761 / 10^7
const PASS2_EPS_POW10: u32 = 7;
const PASS2_EPS_DISPLAY: &str = "0.0000761409861253325";
const PASS2_K: u64 = 33;
const FINAL_R_CAP_REFERENCE: &str = "618";

/// `C = 1.00275 / ln(1 + sqrt 2)`, the lemma constant of both passes.
fn lemma_c(bits: u32) -> Result<VerifiedReal> {
    VerifiedReal::from_ratio(&BigInt::from(100275), &BigInt::from(100000), bits)?
        .div(&ln_silver(bits))
}

/// One reduction pass over `m = 2..=m_max` with bound `M` on `u = n + k`.
fn run_pass(
    m_max: u64,
    m_bound: &BigUint,
    bits: u32,
) -> Result<Vec<ReductionResult>> {
    let c = lemma_c(bits)?;
    let f = VerifiedReal::from_i64(2, bits);
    (2..=m_max)
        .into_par_iter()
        .map(|m| {
            let p_m = pell(m);
            let delta: Arc<dyn Fn(u32) -> Result<VerifiedReal> + Send + Sync> =
                Arc::new(move |w| ln_uint(&p_m, w)?.div(&ln_silver(w)));
            // mu = ln(2 sqrt 2)/ln phi = (3/2) ln 2 / ln phi.
            let mu: Arc<dyn Fn(u32) -> Result<VerifiedReal> + Send + Sync> =
                Arc::new(|w| {
                    ln2(w)
                        .mul_int(&BigInt::from(3))
                        .mul_pow2(-1)
                        .div(&ln_silver(w))
                });
            let inst =
                ReductionInstance::new(delta, mu, c.clone(), f.clone(), m_bound.clone())?;
            reduce(&inst, m, bits, 200)
        })
        .collect()
}

fn emit_pass(
    cert: &mut CertificateBuilder,
    name: &str,
    parameter: &BigUint,
    results: &[ReductionResult],
) {
    cert.push_table(ReductionTable {
        name: name.into(),
        parameter: parameter.to_string(),
        rows: results
            .iter()
            .map(|r| ReductionRow {
                m: r.label,
                convergent_index: r.convergent_index as u64,
                q: r.q.to_string(),
                max_quotient: None,
                epsilon_lo: Some(r.epsilon.lo().to_decimal_string()),
                k_bound: r.k_bound,
            })
            .collect(),
    });
    let bits_used = results.iter().map(|r| r.bits_used).max().unwrap_or(0);
    cert.record_precision(&format!("reduction.{name}"), bits_used);
}

impl EquationStrategy for PellEquation {
    fn name(&self) -> &'static str {
        "pell"
    }

    fn kind(&self) -> SequenceKind {
        SequenceKind::Pell
    }

    fn reference(&self) -> &'static ReferenceValues {
        &REFERENCE
    }

    fn certify_slack(&self, bits: u32, cert: &mut CertificateBuilder) -> Result<()> {
        // The linear-form upper bound needs |psi|^r/(2 sqrt 2) < 0.00275
        // P_m^n for every r >= 4 and P_m^n >= 4. Since |psi| < 1, the worst
        // case is |psi|^4/(2 sqrt 2) against 0.00275 * 4 = 0.011; the same
        // quantity bounds the conjugate term that keeps the form positive.
        let tail = with_precision_retries(bits, "pell slack", |w| {
            let psi4 = silver_conjugate_abs(w).powi(4).div(&two_sqrt_two(w))?;
            let under_one = silver_conjugate_abs(w).compare(&VerifiedReal::from_i64(1, w))
                == IntervalCmp::Less;
            let bound = VerifiedReal::from_ratio(&BigInt::from(11), &BigInt::from(1000), w)?;
            match (psi4.compare(&bound), under_one) {
                (IntervalCmp::Less, true) => Ok(Some((psi4, true))),
                (IntervalCmp::Overlapping, _) => Ok(None),
                _ => Ok(Some((psi4, false))),
            }
        })?;
        cert.push_stage(
            "slack.conjugate_tail",
            "|psi|^r/(2 sqrt 2) < 0.011 <= 0.00275 P_m^n for all r >= 4, \
             m, n >= 2, so the linear form is below 1.00275/P_m^k",
            tail.0.hi().to_decimal_string(),
            Some("0.011".into()),
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
        let kind = SequenceKind::Pell;
        let bits = cfg.precision_bits;
        let c = lemma_c(bits)?;
        let f = VerifiedReal::from_i64(2, bits);

        // Pass 1: M = n_max + k_max over the full base range.
        let m1 = BigUint::from(bounds.n_max) + &bounds.k_max;
        let results1 = run_pass(bounds.m_max, &m1, bits)?;
        emit_pass(cert, "pass1", &m1, &results1);
        let agg1 = aggregate_pass(&results1, &c, &f, bits)?;
        check_exact_big(
            cert,
            "reduction.pass1.max_q",
            "largest selected convergent denominator over the base range",
            &agg1.max_q,
            PASS1_MAX_Q,
        );
        check_exact_u64(
            cert,
            "reduction.pass1.argmax_m",
            "base index attaining the largest selected denominator",
            agg1.argmax_label,
            PASS1_ARGMAX_M,
        );
        check_greater_ratio(
            cert,
            "reduction.pass1.min_epsilon",
            "smallest certified epsilon lower endpoint over the base range",
            &agg1.min_epsilon_lo,
            PASS1_EPS_NUM,
            PASS1_EPS_POW10,
            PASS1_EPS_DISPLAY,
        );
        check_exact_u64(
            cert,
            "reduction.pass1.k_max",
            "exponent bound from the largest q paired with the smallest epsilon",
            agg1.k_bound,
            PASS1_K,
        );

        // Replay the divisibility chain at the reduced exponent bound.
        let r2 = r_cap_from_box(kind, bounds.m_max, bounds.n_max, &agg1.k_bound.into());
        check_exact_big(
            cert,
            "reduction.replay.r_max",
            "index cap from the growth comparison over the reduced box",
            &BigInt::from_biguint(Sign::Plus, r2.clone()),
            POST_PASS1_R,
        );
        let m2 = m_max_from_r(kind, &r2, bits)?;
        let n2 = n_max_from_r(kind, &r2, bits)?;
        check_exact_u64(
            cert,
            "reduction.replay.m_max",
            "divisibility bound on m at the reduced index cap",
            m2,
            POST_PASS1_M,
        );
        check_exact_u64(
            cert,
            "reduction.replay.n_max",
            "divisibility bound on n at the reduced index cap",
            n2,
            POST_PASS1_N,
        );

        // Pass 2: M = n_max + reduced k over the shrunken base range.
        let m2_param = BigUint::from(n2 + agg1.k_bound);
        check_exact_u64(
            cert,
            "reduction.pass2.parameter",
            "second-pass bound on u = n + k",
            n2 + agg1.k_bound,
            PASS2_PARAM,
        );
        let results2 = run_pass(m2, &m2_param, bits)?;
        emit_pass(cert, "pass2", &m2_param, &results2);
        let agg2 = aggregate_pass(&results2, &c, &f, bits)?;
        check_exact_big(
            cert,
            "reduction.pass2.max_q",
            "largest selected convergent denominator over the base range",
            &agg2.max_q,
            PASS2_MAX_Q,
        );
        check_exact_u64(
            cert,
            "reduction.pass2.argmax_m",
            "base index attaining the largest selected denominator",
            agg2.argmax_label,
            PASS2_ARGMAX_M,
        );
        check_greater_ratio(
            cert,
            "reduction.pass2.min_epsilon",
            "smallest certified epsilon lower endpoint over the base range",
            &agg2.min_epsilon_lo,
            PASS2_EPS_NUM,
            PASS2_EPS_POW10,
            PASS2_EPS_DISPLAY,
        );
        check_exact_u64(
            cert,
            "reduction.pass2.k_max",
            "exponent bound from the largest q paired with the smallest epsilon",
            agg2.k_bound,
            PASS2_K,
        );

        // Final box and its index cap; the reference cap is looser than the
        // replayed growth comparison, so `conservative` is the expected
        // verdict there.
        let r_final = r_cap_from_box(kind, m2, n2, &agg2.k_bound.into());
        check_upper_le_big(
            cert,
            "search.box.r_cap",
            "index cap over the final box",
            &r_final,
            FINAL_R_CAP_REFERENCE,
        );
        let r_cap: u64 = r_final
            .try_into()
            .map_err(|_| Error::Domain("final index cap exceeds u64".into()))?;
        Ok(SearchBox {
            kind,
            m_range: (2, m2),
            n_range: (2, n2),
            k_range: (1, agg2.k_bound),
            r_cap,
        })
    }
}
