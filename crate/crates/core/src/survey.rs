//! Pseudo-panel estimation of "picky" population shares and the derived
//! generation, age, and net generation effects, with one-sided tests and the
//! method-selection verdict.
//!
//! The pipeline per gender and generation pair:
//!
//! 1. shrunk share estimates per group: `PS = (x + z^2/2) / (n + z^2)` with
//!    `sigma = sqrt(PS (1 - PS) / (n + z^2))`;
//! 2. generation effect: late minus early share, both observed in the first
//!    wave;
//! 3. age effect: pooled-generation share in the second wave minus the first,
//!    with an assumed cross-wave correlation `rho` entering only the standard
//!    error;
//! 4. net generation effect: `GE + scale * AE`, the scale defaulting to 10/7
//!    because the generations compared are ten years apart while the waves
//!    are seven.
//!
//! All confidence intervals are symmetric, `point +/- z * sigma`, at the same
//! `alpha` throughout. Computation is in fractions; percent is formatting.

use std::fmt;

use thiserror::Error;

use crate::normal::{normal_cdf, normal_quantile, DomainError};

/// Default confidence level of the printed tables: 60% intervals.
pub const DEFAULT_ALPHA: f64 = 0.4;

/// Default net-generation scale: ten-year generation gap over a seven-year
/// wave gap.
pub const DEFAULT_SCALE: f64 = 10.0 / 7.0;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SurveyError {
    #[error(transparent)]
    Domain(#[from] DomainError),
    #[error("alpha must lie in (0, 1), got {0}")]
    InvalidAlpha(f64),
    #[error("group has {x} positive responses out of {n}")]
    InvalidCount { n: u64, x: u64 },
    #[error("estimates were computed at different alpha levels ({0} vs {1})")]
    AlphaMismatch(f64, f64),
    #[error("rho must lie in [0, 1], got {0}")]
    RhoOutOfRange(f64),
    #[error("expected a {expected:?} estimate, got {got:?}")]
    KindMismatch {
        expected: EffectKind,
        got: EffectKind,
    },
    #[error("effect has zero standard error")]
    ZeroSigma,
    #[error("missing survey group: {0}")]
    MissingGroup(String),
    #[error("duplicate survey group: {0}")]
    DuplicateGroup(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Gender {
    Male,
    Female,
}

impl fmt::Display for Gender {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Gender::Male => write!(f, "male"),
            Gender::Female => write!(f, "female"),
        }
    }
}

/// One survey cell: how many respondents of this gender and generation were
/// asked in a wave, and how many said "very important".
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroupCount {
    pub gender: Gender,
    pub generation: String,
    pub survey_year: i32,
    pub n: u64,
    pub x: u64,
}

impl GroupCount {
    pub fn new(
        gender: Gender,
        generation: impl Into<String>,
        survey_year: i32,
        n: u64,
        x: u64,
    ) -> Result<Self, SurveyError> {
        if n < 1 || x > n {
            return Err(SurveyError::InvalidCount { n, x });
        }
        Ok(Self {
            gender,
            generation: generation.into(),
            survey_year,
            n,
            x,
        })
    }

    /// Raw sample share x/n.
    pub fn sample_share(&self) -> f64 {
        self.x as f64 / self.n as f64
    }
}

/// A point estimate with standard error and symmetric confidence interval.
#[derive(Debug, Clone, PartialEq)]
pub struct EstimateCI {
    pub point: f64,
    pub sigma: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub alpha: f64,
    pub z: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EffectKind {
    Generation,
    Age,
    NetGeneration,
}

impl fmt::Display for EffectKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EffectKind::Generation => write!(f, "GE"),
            EffectKind::Age => write!(f, "AE"),
            EffectKind::NetGeneration => write!(f, "NGE"),
        }
    }
}

/// A generation/age/net-generation effect with its standard error and
/// symmetric confidence interval. `rho` is carried on age and net effects,
/// `scale` on net effects only.
#[derive(Debug, Clone, PartialEq)]
pub struct EffectEstimate {
    pub kind: EffectKind,
    pub point: f64,
    pub sigma: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub alpha: f64,
    pub z: f64,
    pub rho: Option<f64>,
    pub scale: Option<f64>,
}

fn check_alpha(alpha: f64) -> Result<(), SurveyError> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        Err(SurveyError::InvalidAlpha(alpha))
    }
}

/// Shrunk binomial share estimate with symmetric normal interval.
pub fn agresti_coull(g: &GroupCount, alpha: f64) -> Result<EstimateCI, SurveyError> {
    check_alpha(alpha)?;
    if g.n < 1 || g.x > g.n {
        return Err(SurveyError::InvalidCount { n: g.n, x: g.x });
    }
    let z = normal_quantile(1.0 - alpha / 2.0)?;
    let z2 = z * z;
    let point = (g.x as f64 + z2 / 2.0) / (g.n as f64 + z2);
    let sigma = (point * (1.0 - point) / (g.n as f64 + z2)).sqrt();
    Ok(EstimateCI {
        point,
        sigma,
        ci_low: point - z * sigma,
        ci_high: point + z * sigma,
        alpha,
        z,
    })
}

fn effect(
    kind: EffectKind,
    point: f64,
    sigma: f64,
    alpha: f64,
    z: f64,
    rho: Option<f64>,
    scale: Option<f64>,
) -> EffectEstimate {
    EffectEstimate {
        kind,
        point,
        sigma,
        ci_low: point - z * sigma,
        ci_high: point + z * sigma,
        alpha,
        z,
        rho,
        scale,
    }
}

/// Difference in shares between a late and an early generation observed in
/// the same wave; variances add.
pub fn generation_effect(
    late: &EstimateCI,
    early: &EstimateCI,
) -> Result<EffectEstimate, SurveyError> {
    if late.alpha != early.alpha {
        return Err(SurveyError::AlphaMismatch(late.alpha, early.alpha));
    }
    let sigma = late.sigma.hypot(early.sigma);
    Ok(effect(
        EffectKind::Generation,
        late.point - early.point,
        sigma,
        late.alpha,
        late.z,
        None,
        None,
    ))
}

/// Within-generation change between waves. `rho` is the assumed correlation
/// between the two waves' share estimates; it reduces the standard error and
/// leaves the point untouched.
pub fn age_effect(
    at_t: &EstimateCI,
    at_t_plus: &EstimateCI,
    rho: f64,
) -> Result<EffectEstimate, SurveyError> {
    if at_t.alpha != at_t_plus.alpha {
        return Err(SurveyError::AlphaMismatch(at_t.alpha, at_t_plus.alpha));
    }
    if !(0.0..=1.0).contains(&rho) {
        return Err(SurveyError::RhoOutOfRange(rho));
    }
    let var = at_t.sigma * at_t.sigma + at_t_plus.sigma * at_t_plus.sigma
        - 2.0 * rho * at_t.sigma * at_t_plus.sigma;
    // rho = 1 with equal sigmas cancels exactly; guard the float dust
    let sigma = var.max(0.0).sqrt();
    Ok(effect(
        EffectKind::Age,
        at_t_plus.point - at_t.point,
        sigma,
        at_t.alpha,
        at_t.z,
        Some(rho),
        None,
    ))
}

/// Generation effect corrected for aging: `GE + scale * AE`.
pub fn net_generation_effect(
    ge: &EffectEstimate,
    ae: &EffectEstimate,
    scale: f64,
) -> Result<EffectEstimate, SurveyError> {
    if ge.kind != EffectKind::Generation {
        return Err(SurveyError::KindMismatch {
            expected: EffectKind::Generation,
            got: ge.kind,
        });
    }
    if ae.kind != EffectKind::Age {
        return Err(SurveyError::KindMismatch {
            expected: EffectKind::Age,
            got: ae.kind,
        });
    }
    if ge.alpha != ae.alpha {
        return Err(SurveyError::AlphaMismatch(ge.alpha, ae.alpha));
    }
    let sigma = (ge.sigma * ge.sigma + scale * scale * ae.sigma * ae.sigma).sqrt();
    Ok(effect(
        EffectKind::NetGeneration,
        ge.point + scale * ae.point,
        sigma,
        ge.alpha,
        ge.z,
        ae.rho,
        Some(scale),
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Alternative {
    Negative,
    Positive,
}

/// One-sided normal test p-value for H0: effect = 0 against the stated
/// alternative.
pub fn one_sided_p(e: &EffectEstimate, alternative: Alternative) -> Result<f64, SurveyError> {
    if e.sigma <= 0.0 {
        return Err(SurveyError::ZeroSigma);
    }
    let z_stat = e.point / e.sigma;
    Ok(match alternative {
        Alternative::Negative => normal_cdf(z_stat),
        Alternative::Positive => 1.0 - normal_cdf(z_stat),
    })
}

/// Outcome of the pair of one-sided tests at a given significance level.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Decision {
    RejectNegative,
    AcceptNull,
    RejectPositive,
}

impl fmt::Display for Decision {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Decision::RejectNegative => write!(f, "reject_negative"),
            Decision::AcceptNull => write!(f, "accept_null"),
            Decision::RejectPositive => write!(f, "reject_positive"),
        }
    }
}

/// Run both one-sided tests at `level`; at most one can reject for
/// `level < 0.5`.
pub fn decide_one_sided(e: &EffectEstimate, level: f64) -> Result<Decision, SurveyError> {
    if !(level > 0.0 && level < 0.5) {
        return Err(SurveyError::InvalidAlpha(level));
    }
    if one_sided_p(e, Alternative::Negative)? < level {
        Ok(Decision::RejectNegative)
    } else if one_sided_p(e, Alternative::Positive)? < level {
        Ok(Decision::RejectPositive)
    } else {
        Ok(Decision::AcceptNull)
    }
}

/// The four test outcomes feeding the method verdict.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct VerdictInput {
    pub male_boomer: Decision,
    pub female_boomer: Decision,
    pub male_genx: Decision,
    pub female_genx: Decision,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MethodVerdict {
    Nm,
    Ipf,
    Neither,
}

impl fmt::Display for MethodVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MethodVerdict::Nm => write!(f, "NM"),
            MethodVerdict::Ipf => write!(f, "IPF"),
            MethodVerdict::Neither => write!(f, "neither"),
        }
    }
}

/// Boomer sub-verdict. Falling homophily (a negative rejection) supports the
/// association-preserving transform, rising supports proportional fitting,
/// mixed signs or a double null support neither.
fn boomer_verdict(male: Decision, female: Decision) -> MethodVerdict {
    use Decision::*;
    match (male, female) {
        (RejectNegative, RejectPositive) | (RejectPositive, RejectNegative) => {
            MethodVerdict::Neither
        }
        (AcceptNull, AcceptNull) => MethodVerdict::Neither,
        (RejectNegative, _) | (_, RejectNegative) => MethodVerdict::Nm,
        (RejectPositive, _) | (_, RejectPositive) => MethodVerdict::Ipf,
    }
}

/// GenX sub-verdict. Both methods predict non-negative movement here: a
/// double null supports proportional fitting, any positive rejection supports
/// the association-preserving transform, and a negative rejection contradicts
/// both.
fn genx_verdict(male: Decision, female: Decision) -> MethodVerdict {
    use Decision::*;
    match (male, female) {
        (RejectNegative, _) | (_, RejectNegative) => MethodVerdict::Neither,
        (AcceptNull, AcceptNull) => MethodVerdict::Ipf,
        _ => MethodVerdict::Nm,
    }
}

/// Combine the per-generation grids: a method is supported overall only when
/// both generation pairs support it.
pub fn method_verdict(v: &VerdictInput) -> MethodVerdict {
    let boomer = boomer_verdict(v.male_boomer, v.female_boomer);
    let genx = genx_verdict(v.male_genx, v.female_genx);
    if boomer == MethodVerdict::Nm && genx == MethodVerdict::Nm {
        MethodVerdict::Nm
    } else if boomer == MethodVerdict::Ipf && genx == MethodVerdict::Ipf {
        MethodVerdict::Ipf
    } else {
        MethodVerdict::Neither
    }
}

/// The generation pair a panel analysis compares.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GenerationPair {
    Boomer,
    GenX,
}

impl GenerationPair {
    pub fn late_label(&self) -> &'static str {
        match self {
            GenerationPair::Boomer => "late_boomer",
            GenerationPair::GenX => "late_genx",
        }
    }

    pub fn early_label(&self) -> &'static str {
        match self {
            GenerationPair::Boomer => "early_boomer",
            GenerationPair::GenX => "early_genx",
        }
    }

    pub fn pooled_label(&self) -> &'static str {
        match self {
            GenerationPair::Boomer => "boomer_pooled",
            GenerationPair::GenX => "genx_pooled",
        }
    }
}

impl fmt::Display for GenerationPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GenerationPair::Boomer => write!(f, "boomer"),
            GenerationPair::GenX => write!(f, "genx"),
        }
    }
}

/// The four groups entering one panel analysis: the late and early cohorts
/// observed in the first wave, and the pooled generation in both waves.
#[derive(Debug, Clone)]
pub struct PanelGroups {
    pub late: GroupCount,
    pub early: GroupCount,
    pub pooled_t: GroupCount,
    pub pooled_t_plus: GroupCount,
}

/// Pick the four panel groups for a gender and generation pair out of a flat
/// list of counts. The first-wave year is the smallest pooled year present.
pub fn select_panel(
    counts: &[GroupCount],
    gender: Gender,
    pair: GenerationPair,
) -> Result<PanelGroups, SurveyError> {
    let find_unique = |generation: &str, year: Option<i32>| -> Result<GroupCount, SurveyError> {
        let mut hits = counts.iter().filter(|g| {
            g.gender == gender
                && g.generation == generation
                && year.is_none_or(|y| g.survey_year == y)
        });
        let first = hits.next().ok_or_else(|| {
            SurveyError::MissingGroup(format!(
                "{gender}/{generation}{}",
                year.map_or(String::new(), |y| format!("/{y}"))
            ))
        })?;
        if hits.next().is_some() {
            return Err(SurveyError::DuplicateGroup(format!(
                "{gender}/{generation}"
            )));
        }
        Ok(first.clone())
    };

    let pooled_years: Vec<i32> = {
        let mut years: Vec<i32> = counts
            .iter()
            .filter(|g| g.gender == gender && g.generation == pair.pooled_label())
            .map(|g| g.survey_year)
            .collect();
        years.sort_unstable();
        years.dedup();
        years
    };
    if pooled_years.len() != 2 {
        return Err(SurveyError::MissingGroup(format!(
            "{gender}/{} must appear in exactly two waves, found {}",
            pair.pooled_label(),
            pooled_years.len()
        )));
    }
    let (t, t_plus) = (pooled_years[0], pooled_years[1]);
    Ok(PanelGroups {
        late: find_unique(pair.late_label(), Some(t))?,
        early: find_unique(pair.early_label(), Some(t))?,
        pooled_t: find_unique(pair.pooled_label(), Some(t))?,
        pooled_t_plus: find_unique(pair.pooled_label(), Some(t_plus))?,
    })
}

/// Every estimate the pipeline produces for one gender and generation pair.
#[derive(Debug, Clone)]
pub struct PanelEstimates {
    pub late: EstimateCI,
    pub early: EstimateCI,
    pub pooled_t: EstimateCI,
    pub pooled_t_plus: EstimateCI,
    pub ge: EffectEstimate,
    pub ae: EffectEstimate,
    pub nge: EffectEstimate,
}

/// Run steps one through four of the pipeline on a selected panel.
pub fn panel_estimates(
    groups: &PanelGroups,
    alpha: f64,
    rho: f64,
    scale: f64,
) -> Result<PanelEstimates, SurveyError> {
    let late = agresti_coull(&groups.late, alpha)?;
    let early = agresti_coull(&groups.early, alpha)?;
    let pooled_t = agresti_coull(&groups.pooled_t, alpha)?;
    let pooled_t_plus = agresti_coull(&groups.pooled_t_plus, alpha)?;
    let ge = generation_effect(&late, &early)?;
    let ae = age_effect(&pooled_t, &pooled_t_plus, rho)?;
    let nge = net_generation_effect(&ge, &ae, scale)?;
    Ok(PanelEstimates {
        late,
        early,
        pooled_t,
        pooled_t_plus,
        ge,
        ae,
        nge,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn g(n: u64, x: u64) -> GroupCount {
        GroupCount::new(Gender::Male, "test", 2010, n, x).unwrap()
    }

    fn pct(v: f64) -> f64 {
        v * 100.0
    }

    #[test]
    fn agresti_coull_printed_rows() {
        // male late Boomer row
        let e = agresti_coull(&g(75, 25), 0.4).unwrap();
        assert!((pct(e.point) - 33.5).abs() < 0.05);
        assert!((pct(e.ci_low) - 28.9).abs() < 0.1);
        assert!((pct(e.ci_high) - 38.1).abs() < 0.1);

        // male early Boomer row
        let e = agresti_coull(&g(56, 25), 0.4).unwrap();
        assert!((pct(e.point) - 44.7).abs() < 0.05);
        assert!((pct(e.ci_low) - 39.2).abs() < 0.1);
        assert!((pct(e.ci_high) - 50.3).abs() < 0.1);

        // full-precision regression pin (recomputed independently)
        assert!((e.point - 0.44709771570250634).abs() < 1e-12);
    }

    #[test]
    fn agresti_coull_never_returns_zero() {
        let e = agresti_coull(&g(10, 0), 0.4).unwrap();
        assert!(e.point > 0.0);
        let z2 = e.z * e.z;
        assert!((e.point - (z2 / 2.0) / (10.0 + z2)).abs() < 1e-15);
    }

    #[test]
    fn ci_is_symmetric() {
        let e = agresti_coull(&g(92, 32), 0.4).unwrap();
        assert!(((e.ci_high - e.point) - (e.point - e.ci_low)).abs() < 1e-12);
    }

    #[test]
    fn generation_effect_matches_printed_tables() {
        let late = agresti_coull(&g(75, 25), 0.4).unwrap();
        let early = agresti_coull(&g(56, 25), 0.4).unwrap();
        let ge = generation_effect(&late, &early).unwrap();
        assert!((pct(ge.point) - -11.2).abs() < 0.05);
        assert!((pct(ge.ci_low) - -18.4).abs() < 0.1);
        assert!((pct(ge.ci_high) - -4.0).abs() < 0.1);

        let late = agresti_coull(&g(45, 20), 0.4).unwrap();
        let early = agresti_coull(&g(61, 19), 0.4).unwrap();
        let ge = generation_effect(&late, &early).unwrap();
        assert!((pct(ge.point) - 13.2).abs() < 0.05);
        assert!((pct(ge.ci_low) - 5.2).abs() < 0.1);
        assert!((pct(ge.ci_high) - 21.1).abs() < 0.1);
    }

    #[test]
    fn identical_inputs_give_zero_effect_with_root_two_sigma() {
        let e = agresti_coull(&g(100, 40), 0.4).unwrap();
        let ge = generation_effect(&e, &e).unwrap();
        assert_eq!(ge.point, 0.0);
        assert!((ge.sigma - 2f64.sqrt() * e.sigma).abs() < 1e-15);
    }

    #[test]
    fn age_effect_rho_bends_only_the_interval() {
        let at_t = agresti_coull(&g(271, 104), 0.4).unwrap();
        let at_t_plus = agresti_coull(&g(754, 221), 0.4).unwrap();

        let ae0 = age_effect(&at_t, &at_t_plus, 0.0).unwrap();
        assert!((pct(ae0.point) - -9.1).abs() < 0.05);
        assert!((pct(ae0.ci_low) - -11.9).abs() < 0.1);
        assert!((pct(ae0.ci_high) - -6.2).abs() < 0.1);

        let ae1 = age_effect(&at_t, &at_t_plus, 1.0).unwrap();
        assert_eq!(ae0.point, ae1.point);
        assert!((pct(ae1.ci_low) - -10.2).abs() < 0.1);
        assert!((pct(ae1.ci_high) - -8.0).abs() < 0.1);

        assert!(age_effect(&at_t, &at_t_plus, 1.5).is_err());
    }

    #[test]
    fn perfect_correlation_with_equal_sigmas_cancels() {
        let e = agresti_coull(&g(100, 40), 0.4).unwrap();
        let ae = age_effect(&e, &e, 1.0).unwrap();
        assert_eq!(ae.sigma, 0.0);
    }

    #[test]
    fn net_generation_effect_matches_printed_tables() {
        // male Boomers at rho = 0
        let late = agresti_coull(&g(75, 25), 0.4).unwrap();
        let early = agresti_coull(&g(56, 25), 0.4).unwrap();
        let ge = generation_effect(&late, &early).unwrap();
        let at_t = agresti_coull(&g(271, 104), 0.4).unwrap();
        let at_t_plus = agresti_coull(&g(754, 221), 0.4).unwrap();
        let ae = age_effect(&at_t, &at_t_plus, 0.0).unwrap();
        let nge = net_generation_effect(&ge, &ae, DEFAULT_SCALE).unwrap();
        assert!((pct(nge.point) - -24.2).abs() < 0.05);
        assert!((pct(nge.ci_low) - -32.5).abs() < 0.1);
        assert!((pct(nge.ci_high) - -15.9).abs() < 0.1);

        // male GenX at rho = 0 and rho = 1
        let late = agresti_coull(&g(45, 20), 0.4).unwrap();
        let early = agresti_coull(&g(61, 19), 0.4).unwrap();
        let ge = generation_effect(&late, &early).unwrap();
        let at_t = agresti_coull(&g(176, 67), 0.4).unwrap();
        let at_t_plus = agresti_coull(&g(756, 270), 0.4).unwrap();
        for (rho, lo, hi) in [(0.0, 0.4, 19.1), (1.0, 1.5, 18.0)] {
            let ae = age_effect(&at_t, &at_t_plus, rho).unwrap();
            let nge = net_generation_effect(&ge, &ae, DEFAULT_SCALE).unwrap();
            assert!((pct(nge.point) - 9.8).abs() < 0.05);
            assert!((pct(nge.ci_low) - lo).abs() < 0.1, "rho={rho}");
            assert!((pct(nge.ci_high) - hi).abs() < 0.1, "rho={rho}");
        }

        // kind checks
        assert!(matches!(
            net_generation_effect(&ge, &ge, DEFAULT_SCALE).unwrap_err(),
            SurveyError::KindMismatch { .. }
        ));
    }

    #[test]
    fn nge_point_is_rho_invariant_and_sigma_shrinks() {
        let late = agresti_coull(&g(92, 32), 0.4).unwrap();
        let early = agresti_coull(&g(84, 32), 0.4).unwrap();
        let ge = generation_effect(&late, &early).unwrap();
        let at_t = agresti_coull(&g(302, 116), 0.4).unwrap();
        let at_t_plus = agresti_coull(&g(809, 292), 0.4).unwrap();
        let mut last_sigma = f64::INFINITY;
        let mut points = Vec::new();
        for rho in [0.0, 0.25, 0.5, 1.0] {
            let ae = age_effect(&at_t, &at_t_plus, rho).unwrap();
            let nge = net_generation_effect(&ge, &ae, DEFAULT_SCALE).unwrap();
            points.push(nge.point);
            assert!(nge.sigma <= last_sigma, "sigma must not grow with rho");
            last_sigma = nge.sigma;
        }
        for w in points.windows(2) {
            assert_eq!(w[0], w[1]);
        }
    }

    #[test]
    fn one_sided_p_fixtures() {
        // male Boomer NGE at rho = 0 has p around 0.7%
        let late = agresti_coull(&g(75, 25), 0.4).unwrap();
        let early = agresti_coull(&g(56, 25), 0.4).unwrap();
        let ge = generation_effect(&late, &early).unwrap();
        let at_t = agresti_coull(&g(271, 104), 0.4).unwrap();
        let at_t_plus = agresti_coull(&g(754, 221), 0.4).unwrap();
        let ae = age_effect(&at_t, &at_t_plus, 0.0).unwrap();
        let nge = net_generation_effect(&ge, &ae, DEFAULT_SCALE).unwrap();
        let p = one_sided_p(&nge, Alternative::Negative).unwrap();
        assert!((p - 0.007).abs() < 0.0015, "p = {p}");

        let zero = effect(EffectKind::NetGeneration, 0.0, 0.1, 0.4, 0.84, None, None);
        assert_eq!(one_sided_p(&zero, Alternative::Negative).unwrap(), 0.5);
        assert_eq!(one_sided_p(&zero, Alternative::Positive).unwrap(), 0.5);

        let degenerate = effect(EffectKind::NetGeneration, 0.0, 0.0, 0.4, 0.84, None, None);
        assert!(one_sided_p(&degenerate, Alternative::Negative).is_err());
    }

    #[test]
    fn p_decreases_as_the_point_moves_with_the_alternative() {
        let mut last = 1.0;
        for k in 1..=10 {
            let e = effect(
                EffectKind::NetGeneration,
                -0.01 * k as f64,
                0.05,
                0.4,
                0.84,
                None,
                None,
            );
            let p = one_sided_p(&e, Alternative::Negative).unwrap();
            assert!(p > 0.0 && p < 1.0);
            assert!(p < last);
            last = p;
        }
    }

    #[test]
    fn verdict_grids() {
        use Decision::*;
        // the observed outcome: falling Boomer homophily, rising GenX
        let nm = VerdictInput {
            male_boomer: RejectNegative,
            female_boomer: AcceptNull,
            male_genx: RejectPositive,
            female_genx: AcceptNull,
        };
        assert_eq!(method_verdict(&nm), MethodVerdict::Nm);

        let ipf = VerdictInput {
            male_boomer: RejectPositive,
            female_boomer: RejectPositive,
            male_genx: AcceptNull,
            female_genx: AcceptNull,
        };
        assert_eq!(method_verdict(&ipf), MethodVerdict::Ipf);

        let neither = VerdictInput {
            male_boomer: RejectNegative,
            female_boomer: RejectPositive,
            male_genx: AcceptNull,
            female_genx: AcceptNull,
        };
        assert_eq!(method_verdict(&neither), MethodVerdict::Neither);

        // a negative GenX rejection contradicts both methods
        let contradiction = VerdictInput {
            male_boomer: RejectNegative,
            female_boomer: RejectNegative,
            male_genx: RejectNegative,
            female_genx: AcceptNull,
        };
        assert_eq!(method_verdict(&contradiction), MethodVerdict::Neither);
    }

    #[test]
    fn decide_one_sided_levels() {
        let e = effect(
            EffectKind::NetGeneration,
            -0.066,
            0.086,
            0.4,
            0.84,
            None,
            None,
        );
        // p is about 22%: accept at 20%, reject below at 23%
        assert_eq!(decide_one_sided(&e, 0.20).unwrap(), Decision::AcceptNull);
        assert_eq!(
            decide_one_sided(&e, 0.23).unwrap(),
            Decision::RejectNegative
        );
        assert!(decide_one_sided(&e, 0.0).is_err());
    }

    #[test]
    fn select_panel_finds_the_four_groups() {
        let counts = vec![
            GroupCount::new(Gender::Male, "late_boomer", 2010, 75, 25).unwrap(),
            GroupCount::new(Gender::Male, "early_boomer", 2010, 56, 25).unwrap(),
            GroupCount::new(Gender::Male, "boomer_pooled", 2010, 271, 104).unwrap(),
            GroupCount::new(Gender::Male, "boomer_pooled", 2017, 754, 221).unwrap(),
        ];
        let panel = select_panel(&counts, Gender::Male, GenerationPair::Boomer).unwrap();
        assert_eq!(panel.late.n, 75);
        assert_eq!(panel.pooled_t_plus.survey_year, 2017);

        assert!(matches!(
            select_panel(&counts, Gender::Female, GenerationPair::Boomer).unwrap_err(),
            SurveyError::MissingGroup(_)
        ));
    }

    #[test]
    fn mismatched_alpha_levels_are_rejected() {
        let a = agresti_coull(&g(100, 40), 0.4).unwrap();
        let b = agresti_coull(&g(100, 40), 0.05).unwrap();
        assert!(matches!(
            generation_effect(&a, &b).unwrap_err(),
            SurveyError::AlphaMismatch(_, _)
        ));
        assert!(matches!(
            age_effect(&a, &b, 0.0).unwrap_err(),
            SurveyError::AlphaMismatch(_, _)
        ));
    }

    #[test]
    fn group_count_validation() {
        assert!(GroupCount::new(Gender::Male, "g", 2010, 0, 0).is_err());
        assert!(GroupCount::new(Gender::Male, "g", 2010, 5, 6).is_err());
    }
}
