//! Monte-Carlo sampling distributions of the net generation effect under the
//! null (no change) and the estimated alternative, with Bayes factors and
//! crossover error rates for comparing the two table-transformation
//! hypotheses.
//!
//! Each replication draws one binomial count per simulated group, runs the
//! estimation pipeline on the draws, and records the resulting net generation
//! effect in percentage points. Draws come from per-replication SplitMix64
//! substreams derived from (seed, replication index), so results do not
//! depend on how replications are partitioned across workers.

use thiserror::Error;

use crate::normal::normal_quantile;
use crate::survey::{panel_estimates, Alternative, PanelGroups, SurveyError, DEFAULT_SCALE};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BayesError {
    #[error("simulated group sizes must be at least 1")]
    EmptyGroup,
    #[error("success rate {0} outside [0, 1]")]
    RateOutOfRange(f64),
    #[error("replications must be at least 1")]
    NoReplications,
    #[error("distribution is degenerate (needs at least two distinct samples)")]
    Degenerate,
    #[error("observed value has zero density under both hypotheses")]
    ZeroDensity,
    #[error("simulated distributions do not overlap")]
    NoOverlap,
    #[error(transparent)]
    Survey(#[from] SurveyError),
}

/// SplitMix64: Steele, Lea and Flood's 64-bit mixer-based generator. One
/// additive step of the golden gamma followed by a finalizer; substreams are
/// derived by hashing the (seed, counter) pair through the same finalizer.
#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
}

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        Self { state: seed }
    }

    /// Stream for one replication: independent of every other index and of
    /// the order streams are consumed in.
    pub fn substream(seed: u64, index: u64) -> Self {
        Self {
            state: mix64(seed ^ mix64(index.wrapping_mul(GOLDEN_GAMMA).wrapping_add(GOLDEN_GAMMA))),
        }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(GOLDEN_GAMMA);
        mix64(self.state)
    }

    /// Uniform in [0, 1) with 53 random bits.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }
}

/// Binomial draw as a sum of Bernoulli trials. Group sizes here are a few
/// hundred, so the O(n) loop is the simplest correct choice.
pub fn binomial(rng: &mut SplitMix64, n: u64, p: f64) -> u64 {
    let mut hits = 0;
    for _ in 0..n {
        if rng.next_f64() < p {
            hits += 1;
        }
    }
    hits
}

/// One simulated group: trials and success rate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimGroup {
    pub n: u64,
    pub p: f64,
}

/// The four groups behind one net-generation-effect distribution: the late
/// and early cohorts in the first wave, and the pooled generation in both
/// waves.
#[derive(Debug, Clone, PartialEq)]
pub struct SimGroupSpec {
    pub late: SimGroup,
    pub early: SimGroup,
    pub pooled_t: SimGroup,
    pub pooled_t_plus: SimGroup,
}

impl SimGroupSpec {
    pub fn validate(&self) -> Result<(), BayesError> {
        for g in self.groups() {
            if g.n < 1 {
                return Err(BayesError::EmptyGroup);
            }
            if !(0.0..=1.0).contains(&g.p) {
                return Err(BayesError::RateOutOfRange(g.p));
            }
        }
        Ok(())
    }

    pub fn groups(&self) -> [SimGroup; 4] {
        [self.late, self.early, self.pooled_t, self.pooled_t_plus]
    }

    /// Alternative-hypothesis spec for an observed panel: sample sizes from
    /// the counts, success rates from the estimated population shares.
    pub fn from_panel(groups: &PanelGroups, alpha: f64) -> Result<Self, BayesError> {
        let est = panel_estimates(groups, alpha, 0.0, DEFAULT_SCALE)?;
        Ok(Self {
            late: SimGroup {
                n: groups.late.n,
                p: est.late.point,
            },
            early: SimGroup {
                n: groups.early.n,
                p: est.early.point,
            },
            pooled_t: SimGroup {
                n: groups.pooled_t.n,
                p: est.pooled_t.point,
            },
            pooled_t_plus: SimGroup {
                n: groups.pooled_t_plus.n,
                p: est.pooled_t_plus.point,
            },
        })
    }
}

/// Null-hypothesis rates: within each directly compared pair, replace both
/// rates by their sample-size-weighted average so the generation effect and
/// the age effect are zero in expectation.
pub fn null_rates(observed: &SimGroupSpec) -> Result<SimGroupSpec, BayesError> {
    observed.validate()?;
    let pool =
        |a: SimGroup, b: SimGroup| (a.n as f64 * a.p + b.n as f64 * b.p) / (a.n + b.n) as f64;
    let p_first = pool(observed.late, observed.early);
    let p_second = pool(observed.pooled_t, observed.pooled_t_plus);
    Ok(SimGroupSpec {
        late: SimGroup {
            n: observed.late.n,
            p: p_first,
        },
        early: SimGroup {
            n: observed.early.n,
            p: p_first,
        },
        pooled_t: SimGroup {
            n: observed.pooled_t.n,
            p: p_second,
        },
        pooled_t_plus: SimGroup {
            n: observed.pooled_t_plus.n,
            p: p_second,
        },
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Hypothesis {
    H0,
    H1,
}

/// A simulated sampling distribution of the net generation effect, in
/// percentage points, sorted ascending. Reproducible from (spec, replications,
/// seed).
#[derive(Debug, Clone)]
pub struct SimDistribution {
    samples: Vec<f64>,
    pub replications: usize,
    pub seed: u64,
    pub hypothesis: Hypothesis,
}

impl SimDistribution {
    /// Sorted samples in percentage points.
    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn mean(&self) -> f64 {
        self.samples.iter().sum::<f64>() / self.samples.len() as f64
    }

    pub fn std(&self) -> f64 {
        let m = self.mean();
        (self.samples.iter().map(|x| (x - m) * (x - m)).sum::<f64>()
            / (self.samples.len().saturating_sub(1)).max(1) as f64)
            .sqrt()
    }

    pub fn min(&self) -> f64 {
        self.samples[0]
    }

    pub fn max(&self) -> f64 {
        self.samples[self.samples.len() - 1]
    }

    /// A single-sample distribution is valid but unusable for density or
    /// error-rate estimates; reports must flag it.
    pub fn is_degenerate(&self) -> bool {
        self.samples.len() < 2 || self.min() == self.max()
    }

    /// Linear-interpolated quantile of the sorted samples.
    pub fn quantile(&self, q: f64) -> f64 {
        let n = self.samples.len();
        let pos = q.clamp(0.0, 1.0) * (n - 1) as f64;
        let lo = pos.floor() as usize;
        let hi = pos.ceil() as usize;
        let frac = pos - lo as f64;
        self.samples[lo] * (1.0 - frac) + self.samples[hi] * frac
    }

    fn count_below(&self, c: f64) -> usize {
        self.samples.partition_point(|&x| x < c)
    }

    fn count_at_or_below(&self, c: f64) -> usize {
        self.samples.partition_point(|&x| x <= c)
    }

    /// Empirical P(X < c).
    pub fn prob_below(&self, c: f64) -> f64 {
        self.count_below(c) as f64 / self.samples.len() as f64
    }

    /// Empirical P(X > c).
    pub fn prob_above(&self, c: f64) -> f64 {
        1.0 - self.count_at_or_below(c) as f64 / self.samples.len() as f64
    }
}

/// Simulate the net-generation-effect distribution: per replication, draw one
/// binomial per group, run the share/effect pipeline on the draws, record the
/// point estimate in percentage points. Deterministic given the seed.
pub fn simulate_nge(
    spec: &SimGroupSpec,
    replications: usize,
    seed: u64,
    scale: f64,
    alpha: f64,
    hypothesis: Hypothesis,
) -> Result<SimDistribution, BayesError> {
    spec.validate()?;
    if replications < 1 {
        return Err(BayesError::NoReplications);
    }
    let z = normal_quantile(1.0 - alpha / 2.0).map_err(SurveyError::from)?;
    let z2 = z * z;
    let point = |x: u64, n: u64| (x as f64 + z2 / 2.0) / (n as f64 + z2);

    let groups = spec.groups();
    let mut samples = Vec::with_capacity(replications);
    for rep in 0..replications {
        let mut rng = SplitMix64::substream(seed, rep as u64);
        let mut ps = [0.0f64; 4];
        for (slot, g) in ps.iter_mut().zip(&groups) {
            *slot = point(binomial(&mut rng, g.n, g.p), g.n);
        }
        let ge = ps[0] - ps[1];
        let ae = ps[3] - ps[2];
        samples.push(100.0 * (ge + scale * ae));
    }
    samples.sort_unstable_by(f64::total_cmp);
    Ok(SimDistribution {
        samples,
        replications,
        seed,
        hypothesis,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BayesVerdict {
    FavorsH1,
    FavorsH0,
    Inconclusive,
}

impl std::fmt::Display for BayesVerdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            BayesVerdict::FavorsH1 => write!(f, "favors_H1"),
            BayesVerdict::FavorsH0 => write!(f, "favors_H0"),
            BayesVerdict::Inconclusive => write!(f, "inconclusive"),
        }
    }
}

/// Bayes factor, crossover error rate, and the rule-of-thumb verdict:
/// inconclusive iff K lies strictly between 1/3 and 3.
#[derive(Debug, Clone, PartialEq)]
pub struct BayesReport {
    pub k: f64,
    pub cer: f64,
    pub verdict: BayesVerdict,
}

pub fn verdict_for(k: f64) -> BayesVerdict {
    if k > 1.0 / 3.0 && k < 3.0 {
        BayesVerdict::Inconclusive
    } else if k <= 1.0 / 3.0 {
        BayesVerdict::FavorsH1
    } else {
        BayesVerdict::FavorsH0
    }
}

/// Freedman-Diaconis bin width over the pooled samples.
fn fd_bin_width(h0: &SimDistribution, h1: &SimDistribution) -> f64 {
    let mut pooled: Vec<f64> = h0.samples.iter().chain(&h1.samples).copied().collect();
    pooled.sort_unstable_by(f64::total_cmp);
    let n = pooled.len();
    let q = |p: f64| {
        let pos = p * (n - 1) as f64;
        let lo = pos.floor() as usize;
        let frac = pos - lo as f64;
        pooled[lo] * (1.0 - frac) + pooled[(lo + 1).min(n - 1)] * frac
    };
    let iqr = q(0.75) - q(0.25);
    2.0 * iqr / (n as f64).cbrt()
}

fn histogram_density(d: &SimDistribution, origin: f64, width: f64, value: f64) -> f64 {
    let bin = ((value - origin) / width).floor();
    let left = origin + bin * width;
    let right = left + width;
    let count = d.count_below(right) - d.count_below(left);
    count as f64 / (d.samples.len() as f64 * width)
}

/// Gaussian kernel density with the plug-in (Silverman) bandwidth; the
/// fallback when the observation lands in an empty histogram bin.
fn kde_density(d: &SimDistribution, value: f64) -> f64 {
    let n = d.samples.len() as f64;
    let sigma = d.std();
    let iqr = d.quantile(0.75) - d.quantile(0.25);
    let spread = if iqr > 0.0 {
        sigma.min(iqr / 1.34)
    } else {
        sigma
    };
    let bw = 1.06 * spread * n.powf(-0.2);
    // negated so a NaN bandwidth also bails out
    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    if !(bw > 0.0) {
        return 0.0;
    }
    let norm = 1.0 / (n * bw * (2.0 * std::f64::consts::PI).sqrt());
    d.samples
        .iter()
        .map(|x| (-0.5 * ((value - x) / bw).powi(2)).exp())
        .sum::<f64>()
        * norm
}

/// Density of `d` at `value`: shared-grid histogram estimate, Gaussian kernel
/// when the bin is empty.
fn density_at(d: &SimDistribution, origin: f64, width: f64, value: f64) -> f64 {
    let hist = histogram_density(d, origin, width, value);
    if hist > 0.0 {
        hist
    } else {
        kde_density(d, value)
    }
}

/// K = density under H0 / density under H1 at the observed value (percentage
/// points). Swapping the two arguments maps K to 1/K.
pub fn bayes_factor(
    observed_nge: f64,
    h0: &SimDistribution,
    h1: &SimDistribution,
) -> Result<f64, BayesError> {
    if h0.is_degenerate() || h1.is_degenerate() {
        return Err(BayesError::Degenerate);
    }
    let width = fd_bin_width(h0, h1);
    // negated so a NaN width also counts as degenerate
    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    if !(width > 0.0) {
        return Err(BayesError::Degenerate);
    }
    let origin = h0.min().min(h1.min());
    let d0 = density_at(h0, origin, width, observed_nge);
    let d1 = density_at(h1, origin, width, observed_nge);
    if d0 == 0.0 || d1 == 0.0 {
        return Err(BayesError::ZeroDensity);
    }
    Ok(d0 / d1)
}

/// The significance level at which the test's two error rates coincide:
/// bisect the rejection threshold until P(reject | H0) equals
/// P(accept | H1).
pub fn crossover_error_rate(
    h0: &SimDistribution,
    h1: &SimDistribution,
    direction: Alternative,
) -> Result<f64, BayesError> {
    if h0.is_degenerate() || h1.is_degenerate() {
        return Err(BayesError::Degenerate);
    }
    if h1.max() < h0.min() || h0.max() < h1.min() {
        return Err(BayesError::NoOverlap);
    }
    let (mut lo, mut hi) = (h0.min().min(h1.min()), h0.max().max(h1.max()));
    let mut c = 0.5 * (lo + hi);
    for _ in 0..200 {
        c = 0.5 * (lo + hi);
        let (alpha_err, beta_err) = match direction {
            Alternative::Negative => (h0.prob_below(c), 1.0 - h1.prob_below(c)),
            Alternative::Positive => (h0.prob_above(c), 1.0 - h1.prob_above(c)),
        };
        let widen = alpha_err < beta_err;
        match (direction, widen) {
            (Alternative::Negative, true) => lo = c,
            (Alternative::Negative, false) => hi = c,
            (Alternative::Positive, true) => hi = c,
            (Alternative::Positive, false) => lo = c,
        }
    }
    let (alpha_err, beta_err) = match direction {
        Alternative::Negative => (h0.prob_below(c), 1.0 - h1.prob_below(c)),
        Alternative::Positive => (h0.prob_above(c), 1.0 - h1.prob_above(c)),
    };
    Ok(0.5 * (alpha_err + beta_err))
}

/// Shared histogram of both distributions on the pooled Freedman-Diaconis
/// grid: (bin_left, bin_right, h0_density, h1_density) rows for plotting.
pub fn pooled_histogram(h0: &SimDistribution, h1: &SimDistribution) -> Vec<(f64, f64, f64, f64)> {
    let width = fd_bin_width(h0, h1);
    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    if !(width > 0.0) {
        return Vec::new();
    }
    let origin = h0.min().min(h1.min());
    let top = h0.max().max(h1.max());
    let bins = ((top - origin) / width).ceil() as usize + 1;
    (0..bins)
        .map(|k| {
            let left = origin + k as f64 * width;
            let right = left + width;
            let d0 = (h0.count_below(right) - h0.count_below(left)) as f64
                / (h0.samples.len() as f64 * width);
            let d1 = (h1.count_below(right) - h1.count_below(left)) as f64
                / (h1.samples.len() as f64 * width);
            (left, right, d0, d1)
        })
        .collect()
}

/// Everything the model-comparison command reports for one gender and
/// generation pair.
#[derive(Debug, Clone)]
pub struct PairAnalysis {
    pub observed_nge_pp: f64,
    pub direction: Alternative,
    pub h0: SimDistribution,
    pub h1: SimDistribution,
    pub report: BayesReport,
}

/// Full pipeline for one pair: estimate the panel, simulate both hypotheses,
/// and compare. The null simulation uses a seed derived from `seed` so the
/// two sample sets are independent.
pub fn analyze_pair(
    groups: &PanelGroups,
    alpha: f64,
    scale: f64,
    replications: usize,
    seed: u64,
) -> Result<PairAnalysis, BayesError> {
    let est = panel_estimates(groups, alpha, 0.0, scale)?;
    let observed_nge_pp = 100.0 * est.nge.point;
    let direction = if est.nge.point < 0.0 {
        Alternative::Negative
    } else {
        Alternative::Positive
    };
    let h1_spec = SimGroupSpec::from_panel(groups, alpha)?;
    let h0_spec = null_rates(&h1_spec)?;
    let h1 = simulate_nge(&h1_spec, replications, seed, scale, alpha, Hypothesis::H1)?;
    let h0 = simulate_nge(
        &h0_spec,
        replications,
        mix64(seed),
        scale,
        alpha,
        Hypothesis::H0,
    )?;
    let k = bayes_factor(observed_nge_pp, &h0, &h1)?;
    let cer = crossover_error_rate(&h0, &h1, direction)?;
    Ok(PairAnalysis {
        observed_nge_pp,
        direction,
        h0,
        h1,
        report: BayesReport {
            k,
            cer,
            verdict: verdict_for(k),
        },
    })
}
