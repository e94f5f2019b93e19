//! Per-equation proof strategies behind a common trait, a by-name registry,
//! and the shared orchestrator.
//!
//! Both families run the same trunk: trivial index floor, slack
//! certification, Matveev coefficient, certified fixed point, divisibility
//! replays, then a family-specific exponent reduction, and finally the
//! guarded exhaustive search. The [`EquationStrategy`] trait carries exactly
//! the parts that differ; everything else lives here once.
//!
//! Reference values are the published targets the pipeline is expected to
//! reproduce. Each stage compares its computed value against the reference
//! and records `matches`, `conservative` (differs but keeps every downstream
//! step valid), or `discrepancy`.

mod lucas;
mod pell;

pub use lucas::LucasEquation;
pub use pell::PellEquation;

use crate::baker::{self, BoundSet};
use crate::cert::{CertificateBuilder, ProofCertificate, Verdict};
use crate::dyadic::Dyadic;
use crate::error::{Error, Result};
use crate::real::DEFAULT_PRECISION_BITS;
use crate::search::{search, SearchBox};
use crate::seq::{SequenceKind, SolutionTuple};
use num_bigint::{BigInt, BigUint};
use std::cmp::Ordering;

/// Which stages to run.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StageSelect {
    All,
    /// Floor, slack, Matveev coefficient, fixed point, replays.
    Bounds,
    /// Exponent reduction only, seeded from the reference bounds.
    Reduce,
    /// Exhaustive search only, over the reference final box.
    Search,
}

/// How reference mismatches affect the process exit code (the certificate
/// content is identical either way).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CheckMode {
    /// Any discrepancy verdict exits nonzero.
    Strict,
    /// Stage discrepancies are reported but only a wrong solution list
    /// fails the run.
    Report,
}

#[derive(Clone, Debug)]
pub struct PipelineConfig {
    pub precision_bits: u32,
    pub stage: StageSelect,
    pub check: CheckMode,
    pub threads: Option<usize>,
    pub prefilter_moduli: Vec<u64>,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            precision_bits: DEFAULT_PRECISION_BITS,
            stage: StageSelect::All,
            check: CheckMode::Strict,
            threads: None,
            prefilter_moduli: vec![8, 16],
        }
    }
}

/// Published targets shared by the trunk stages.
pub struct ReferenceValues {
    pub r_floor: u64,
    pub k_coefficient: &'static str,
    pub r_max: &'static str,
    pub r_band: (&'static str, &'static str),
    pub k_max: &'static str,
    pub m_max: u64,
    pub n_max: u64,
    pub final_box: SearchBoxSpec,
    pub solutions: &'static [(u64, u64, u64, u64)],
}

/// Plain-data box specification (reference form of [`SearchBox`]).
#[derive(Clone, Copy, Debug)]
pub struct SearchBoxSpec {
    pub m: (u64, u64),
    pub n: (u64, u64),
    pub k: (u64, u64),
    pub r_cap: u64,
}

impl SearchBoxSpec {
    pub fn to_box(self, kind: SequenceKind) -> SearchBox {
        SearchBox {
            kind,
            m_range: self.m,
            n_range: self.n,
            k_range: self.k,
            r_cap: self.r_cap,
        }
    }
}

/// Bounds the reduction stage starts from: either the replayed stage of the
/// bound propagation or, for partial runs, the reference values directly.
#[derive(Clone, Debug)]
pub struct BoundsOutcome {
    pub m_max: u64,
    pub n_max: u64,
    pub k_max: BigUint,
}

/// One equation family as an interchangeable pipeline strategy.
pub trait EquationStrategy: Send + Sync {
    /// Registry key, e.g. `"lucas"`.
    fn name(&self) -> &'static str;

    fn kind(&self) -> SequenceKind;

    fn reference(&self) -> &'static ReferenceValues;

    /// Certifies the conjugate-tail slack bound the linear form needs and
    /// records it as a stage.
    fn certify_slack(&self, bits: u32, cert: &mut CertificateBuilder) -> Result<()>;

    /// Family-specific exponent reduction: consumes the bounds, appends its
    /// stages and tables, and returns the final certified box.
    fn reduce_stage(
        &self,
        bounds: &BoundsOutcome,
        cfg: &PipelineConfig,
        cert: &mut CertificateBuilder,
    ) -> Result<SearchBox>;
}

/// All built-in strategies, selectable by name.
pub struct StrategyRegistry {
    entries: Vec<Box<dyn EquationStrategy>>,
}

impl StrategyRegistry {
    pub fn builtin() -> Self {
        StrategyRegistry {
            entries: vec![Box::new(LucasEquation), Box::new(PellEquation)],
        }
    }

    pub fn get(&self, name: &str) -> Option<&dyn EquationStrategy> {
        self.entries
            .iter()
            .find(|s| s.name().eq_ignore_ascii_case(name))
            .map(|b| b.as_ref())
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.entries.iter().map(|s| s.name()).collect()
    }
}

impl Default for StrategyRegistry {
    fn default() -> Self {
        StrategyRegistry::builtin()
    }
}

/// Runs the selected stages and emits the certificate. The orchestrator is
/// single-threaded; per-base parallelism inside the reduction and search is
/// delegated to rayon and never affects certificate content.
pub fn run_pipeline(
    strategy: &dyn EquationStrategy,
    cfg: &PipelineConfig,
) -> Result<ProofCertificate> {
    if cfg.precision_bits < 16 {
        return Err(Error::Domain("precision_bits must be at least 16".into()));
    }
    match cfg.threads {
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| Error::Stage {
                    stage: "thread pool".into(),
                    message: e.to_string(),
                })?;
            pool.install(|| run_inner(strategy, cfg))
        }
        None => run_inner(strategy, cfg),
    }
}

fn run_inner(strategy: &dyn EquationStrategy, cfg: &PipelineConfig) -> Result<ProofCertificate> {
    let refs = strategy.reference();
    let mut cert = CertificateBuilder::new(strategy.name(), cfg.precision_bits);

    let bounds = match cfg.stage {
        StageSelect::All | StageSelect::Bounds => Some(stage_bounds(strategy, cfg, &mut cert)?),
        StageSelect::Reduce | StageSelect::Search => None,
    };

    let final_box = match cfg.stage {
        StageSelect::Bounds => None,
        StageSelect::Search => Some(refs.final_box.to_box(strategy.kind())),
        StageSelect::All | StageSelect::Reduce => {
            let seed = bounds.clone().unwrap_or_else(|| BoundsOutcome {
                m_max: refs.m_max,
                n_max: refs.n_max,
                k_max: parse_big(refs.k_max),
            });
            Some(strategy.reduce_stage(&seed, cfg, &mut cert)?)
        }
    };

    let solutions = match (cfg.stage, final_box) {
        (StageSelect::Bounds | StageSelect::Reduce, _) | (_, None) => Vec::new(),
        (_, Some(bx)) => stage_search(strategy, &bx, cfg, &mut cert)?,
    };

    Ok(cert.finish(solutions))
}

fn stage_bounds(
    strategy: &dyn EquationStrategy,
    cfg: &PipelineConfig,
    cert: &mut CertificateBuilder,
) -> Result<BoundsOutcome> {
    let kind = strategy.kind();
    let refs = strategy.reference();
    let bits = cfg.precision_bits;

    let floor = baker::r_floor(kind);
    check_exact_u64(
        cert,
        "floor.r_min",
        "least index r with W_r >= W_2^3 + W_2^2",
        floor,
        refs.r_floor,
    );

    strategy.certify_slack(bits, cert)?;

    let coeff = baker::k_coefficient(kind, bits)?;
    check_rel10(
        cert,
        "matveev.k_coefficient",
        "base-free coefficient c with k < c (1 + ln 2r) + slack",
        coeff.hi(),
        refs.k_coefficient,
    );

    let reference_r = parse_big(refs.r_max);
    let stages: Vec<BoundSet> = baker::propagate_bounds(kind, bits, Some(&reference_r))?;
    let own = &stages[0];
    let replay = &stages[1];

    check_band_big(
        cert,
        "bounds.r_max",
        "largest r not certifiably above the dominating quadratic in ln r",
        &own.r_max,
        refs.r_band,
        refs.r_max,
    );
    check_upper_le_big(
        cert,
        "bounds.k_max",
        "exponent bound evaluated at the computed index bound",
        &own.k_max,
        refs.k_max,
    );
    check_upper_le_u64(
        cert,
        "bounds.m_max",
        "divisibility bound on m at the computed index bound",
        own.m_max,
        refs.m_max,
    );
    check_upper_le_u64(
        cert,
        "bounds.n_max",
        "divisibility bound on n at the computed index bound",
        own.n_max,
        refs.n_max,
    );
    check_exact_u64(
        cert,
        "bounds.replay.m_max",
        "divisibility bound on m replayed at the reference index bound",
        replay.m_max,
        refs.m_max,
    );
    check_exact_u64(
        cert,
        "bounds.replay.n_max",
        "divisibility bound on n replayed at the reference index bound",
        replay.n_max,
        refs.n_max,
    );
    cert.record_precision("bounds", bits);

    // Downstream reductions start from the reference exponent bound, which
    // the `bounds.k_max` stage just certified to dominate the computed one.
    Ok(BoundsOutcome {
        m_max: replay.m_max,
        n_max: replay.n_max,
        k_max: parse_big(refs.k_max),
    })
}

fn stage_search(
    strategy: &dyn EquationStrategy,
    bx: &SearchBox,
    cfg: &PipelineConfig,
    cert: &mut CertificateBuilder,
) -> Result<Vec<SolutionTuple>> {
    let kind = strategy.kind();
    let refs = strategy.reference();

    let guard = baker::nonvanishing_guard(
        kind,
        bx.m_range,
        bx.n_range,
        bx.k_range,
        (baker::r_floor(kind), bx.r_cap),
    );
    cert.push_stage(
        "guard.nonvanishing",
        guard.justification,
        format!(
            "checked {} tuples, {} violations",
            guard.tuples_checked, guard.violations
        ),
        Some("0 violations".into()),
        if guard.violations == 0 {
            Verdict::Matches
        } else {
            Verdict::Discrepancy
        },
    );

    let hits = search(bx, &cfg.prefilter_moduli)?;
    for hit in &hits {
        if !hit.satisfies_equation(kind) {
            return Err(Error::Stage {
                stage: "search".into(),
                message: format!("hit {hit:?} fails re-evaluation from scratch"),
            });
        }
    }
    let expected: Vec<SolutionTuple> = refs
        .solutions
        .iter()
        .map(|&(r, m, n, k)| SolutionTuple { r, m, n, k })
        .collect();
    cert.push_stage(
        "search.solutions",
        "exhaustive exact search over the final box",
        format_solutions(&hits),
        Some(format_solutions(&expected)),
        if hits == expected {
            Verdict::Matches
        } else {
            Verdict::Discrepancy
        },
    );
    Ok(hits)
}

/// Renders a solution list the way certificates and summaries print it.
pub fn format_solutions(list: &[SolutionTuple]) -> String {
    if list.is_empty() {
        return "[]".to_string();
    }
    let inner: Vec<String> = list
        .iter()
        .map(|t| format!("({},{},{},{})", t.r, t.m, t.n, t.k))
        .collect();
    format!("[{}]", inner.join(", "))
}

pub(crate) fn parse_big(s: &str) -> BigUint {
    s.parse().expect("reference integer parses")
}

// Stage check helpers. Each pushes one StageRecord with the verdict its
// rule assigns.

pub(crate) fn check_exact_u64(
    cert: &mut CertificateBuilder,
    name: &str,
    claim: &str,
    computed: u64,
    reference: u64,
) {
    cert.push_stage(
        name,
        claim,
        computed.to_string(),
        Some(reference.to_string()),
        if computed == reference {
            Verdict::Matches
        } else {
            Verdict::Discrepancy
        },
    );
}

pub(crate) fn check_exact_big(
    cert: &mut CertificateBuilder,
    name: &str,
    claim: &str,
    computed: &BigInt,
    reference: &str,
) {
    let reference_value: BigInt = reference.parse().expect("reference integer parses");
    cert.push_stage(
        name,
        claim,
        computed.to_string(),
        Some(reference.to_string()),
        if *computed == reference_value {
            Verdict::Matches
        } else {
            Verdict::Discrepancy
        },
    );
}

/// Upper-bound rule: equal is `matches`, tighter is `conservative`, looser
/// contradicts the reference chain.
pub(crate) fn check_upper_le_big(
    cert: &mut CertificateBuilder,
    name: &str,
    claim: &str,
    computed: &BigUint,
    reference: &str,
) {
    let reference_value = parse_big(reference);
    let verdict = match computed.cmp(&reference_value) {
        Ordering::Equal => Verdict::Matches,
        Ordering::Less => Verdict::Conservative,
        Ordering::Greater => Verdict::Discrepancy,
    };
    cert.push_stage(
        name,
        claim,
        computed.to_string(),
        Some(reference.to_string()),
        verdict,
    );
}

pub(crate) fn check_upper_le_u64(
    cert: &mut CertificateBuilder,
    name: &str,
    claim: &str,
    computed: u64,
    reference: u64,
) {
    let verdict = match computed.cmp(&reference) {
        Ordering::Equal => Verdict::Matches,
        Ordering::Less => Verdict::Conservative,
        Ordering::Greater => Verdict::Discrepancy,
    };
    cert.push_stage(
        name,
        claim,
        computed.to_string(),
        Some(reference.to_string()),
        verdict,
    );
}

pub(crate) fn check_band_big(
    cert: &mut CertificateBuilder,
    name: &str,
    claim: &str,
    computed: &BigUint,
    band: (&str, &str),
    reference: &str,
) {
    let lo = parse_big(band.0);
    let hi = parse_big(band.1);
    let in_band = *computed >= lo && *computed <= hi;
    cert.push_stage(
        name,
        claim,
        computed.to_string(),
        Some(reference.to_string()),
        if in_band {
            if computed.to_string() == reference {
                Verdict::Matches
            } else {
                Verdict::Conservative
            }
        } else {
            Verdict::Discrepancy
        },
    );
}

/// Ten-percent relative agreement between a computed upper endpoint and a
/// reference integer: `10 |c - ref| < ref`, decided exactly in dyadics.
pub(crate) fn check_rel10(
    cert: &mut CertificateBuilder,
    name: &str,
    claim: &str,
    computed: &Dyadic,
    reference: &str,
) {
    let reference_value = Dyadic::from_biguint(&parse_big(reference));
    let diff = computed.sub(&reference_value).abs();
    let ok = diff.mul_int(&BigInt::from(10)).cmp_value(&reference_value) == Ordering::Less;
    cert.push_stage(
        name,
        claim,
        computed.to_decimal_string(),
        Some(reference.to_string()),
        if ok { Verdict::Matches } else { Verdict::Discrepancy },
    );
}

/// Lower-bound rule for the reduction epsilons: the certified lower endpoint
/// must strictly exceed `num / 10^pow10`.
pub(crate) fn check_greater_ratio(
    cert: &mut CertificateBuilder,
    name: &str,
    claim: &str,
    computed: &Dyadic,
    num: u64,
    pow10: u32,
    reference_display: &str,
) {
    let den = BigInt::from(10u32).pow(pow10);
    let ok = computed.cmp_ratio(&BigInt::from(num), &den) == Ordering::Greater;
    cert.push_stage(
        name,
        claim,
        computed.to_decimal_string(),
        Some(reference_display.to_string()),
        if ok { Verdict::Matches } else { Verdict::Discrepancy },
    );
}
