//! Regeneration of every worked number in the bundled reference material:
//! the transformation examples, the survey panels, the test decisions, and
//! the Monte-Carlo comparisons. Each check records its published expected
//! value, the regenerated actual value, and a pass flag; the CLI `repro`
//! command and the acceptance suite both run off this registry.
//!
//! Three printed interval bounds and three printed summary figures in the
//! source tables are internally inconsistent (see the per-check notes);
//! the affected checks either assert the value implied by the row's own
//! arithmetic (where that is forced) or keep the printed value and fail
//! honestly (where no correction is derivable).

use crate::bayes::{analyze_pair, BayesVerdict};
use crate::decompose::{
    counterfactual, decompose_change, Base, CounterfactualSpec, Method, Statistic,
};
use crate::ipf::{ipf_step_cols, ipf_step_rows, ipf_transform, IpfConfig};
use crate::nm::{nm_transform, NmError};
use crate::normal::normal_quantile;
use crate::survey::{
    agresti_coull, decide_one_sided, method_verdict, one_sided_p, panel_estimates, select_panel,
    Alternative, Decision, EffectEstimate, EffectKind, Gender, GenerationPair, GroupCount,
    MethodVerdict, PanelEstimates, VerdictInput, DEFAULT_ALPHA, DEFAULT_SCALE,
};
use crate::table::{Axis, ContingencyTable};

/// Bundled input fixtures, embedded so regeneration needs no filesystem.
/// The same files ship under `crates/core/fixtures/` for CLI use.
pub mod fixtures {
    use crate::io::{parse_counts_csv, parse_table_csv};
    use crate::survey::GroupCount;
    use crate::table::ContingencyTable;

    pub const P_NUM1_CSV: &str = include_str!("../fixtures/p_num1.csv");
    pub const Q_NUM1_CSV: &str = include_str!("../fixtures/q_num1.csv");
    pub const P_NUM2_CSV: &str = include_str!("../fixtures/p_num2.csv");
    pub const Q_NUM2_CSV: &str = include_str!("../fixtures/q_num2.csv");
    pub const PEW_COUNTS_CSV: &str = include_str!("../fixtures/pew_counts.csv");

    pub fn p_num1() -> ContingencyTable {
        parse_table_csv(P_NUM1_CSV).expect("bundled table")
    }

    pub fn q_num1() -> ContingencyTable {
        parse_table_csv(Q_NUM1_CSV).expect("bundled table")
    }

    pub fn p_num2() -> ContingencyTable {
        parse_table_csv(P_NUM2_CSV).expect("bundled table")
    }

    pub fn q_num2() -> ContingencyTable {
        parse_table_csv(Q_NUM2_CSV).expect("bundled table")
    }

    pub fn pew_counts() -> Vec<GroupCount> {
        parse_counts_csv(PEW_COUNTS_CSV).expect("bundled counts")
    }
}

/// Default seed for the Monte-Carlo checks; override with `--seed` or the
/// `HOMOGAMY_SEED` environment variable in the CLI.
pub const DEFAULT_SEED: u64 = 424_242;

/// Default replication count for the Monte-Carlo checks.
pub const DEFAULT_REPLICATIONS: usize = 200_000;

#[derive(Debug, Clone)]
pub struct ReproConfig {
    pub replications: usize,
    pub seed: u64,
    /// Substring filter on check names (e.g. "c1/" or "ipf").
    pub filter: Option<String>,
}

impl Default for ReproConfig {
    fn default() -> Self {
        Self {
            replications: DEFAULT_REPLICATIONS,
            seed: DEFAULT_SEED,
            filter: None,
        }
    }
}

/// One regenerated value compared against its published counterpart.
#[derive(Debug, Clone)]
pub struct CheckResult {
    pub name: String,
    pub criterion: u8,
    pub source: String,
    pub expected: String,
    pub actual: String,
    pub passed: bool,
    pub note: Option<String>,
}

impl CheckResult {
    fn approx(
        name: impl Into<String>,
        criterion: u8,
        source: &str,
        want: f64,
        got: f64,
        tol: f64,
    ) -> Self {
        Self {
            name: name.into(),
            criterion,
            source: source.to_owned(),
            expected: format!("{want} (±{tol})"),
            actual: format!("{got:.6}"),
            passed: (got - want).abs() <= tol,
            note: None,
        }
    }

    fn flag(
        name: impl Into<String>,
        criterion: u8,
        source: &str,
        expected: impl Into<String>,
        actual: impl Into<String>,
        passed: bool,
    ) -> Self {
        Self {
            name: name.into(),
            criterion,
            source: source.to_owned(),
            expected: expected.into(),
            actual: actual.into(),
            passed,
            note: None,
        }
    }

    fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }
}

fn cells_match(t: &ContingencyTable, want: &[f64], tol: f64) -> bool {
    t.values().len() == want.len()
        && t.values()
            .iter()
            .zip(want)
            .all(|(got, want)| (got - want).abs() <= tol)
}

fn fmt_cells(t: &ContingencyTable) -> String {
    let rows: Vec<String> = (0..t.rows())
        .map(|r| {
            let row: Vec<String> = (0..t.cols())
                .map(|c| format!("{:.4}", t.get(r, c)))
                .collect();
            row.join(", ")
        })
        .collect();
    format!("[{}]", rows.join(" | "))
}

const SRC_EXAMPLE_2X2: &str = "worked 2x2 transformation example";
const SRC_EXAMPLE_2X3: &str = "worked 2x3 transformation example";
const SRC_DECOMP: &str = "worked decomposition arithmetic";
const SRC_SURVEY: &str = "survey appendix panel";
const SRC_GRID: &str = "hypothesis decision grid";
const SRC_SIM: &str = "simulation figure notes";

// ---------------------------------------------------------------------------
// criterion 1: the iterative-fitting fixtures
// ---------------------------------------------------------------------------

fn criterion1() -> Vec<CheckResult> {
    let mut out = Vec::new();
    let p1 = fixtures::p_num1();
    let q1 = fixtures::q_num1();
    let target = p1.margins().expect("positive margins");

    out.push(CheckResult::flag(
        "c1/ipf/bundled_tables_parse",
        1,
        SRC_EXAMPLE_2X2,
        "P and Q load from the bundled CSVs",
        format!("P={} Q={}", fmt_cells(&p1), fmt_cells(&q1)),
        p1.values() == [500.0, 700.0, 100.0, 700.0] && q1.values() == [500.0, 500.0, 100.0, 900.0],
    ));

    let row_stepped = ipf_step_rows(&q1, &target).expect("row step");
    out.push(CheckResult::flag(
        "c1/ipf/row_step",
        1,
        SRC_EXAMPLE_2X2,
        "[600, 600 | 80, 720] exactly",
        fmt_cells(&row_stepped),
        row_stepped.values() == [600.0, 600.0, 80.0, 720.0],
    ));

    let col_stepped = ipf_step_cols(&row_stepped, &target).expect("col step");
    out.push(CheckResult::flag(
        "c1/ipf/col_step",
        1,
        SRC_EXAMPLE_2X2,
        "[529.41, 636.36 | 70.59, 763.64] ±0.005 per cell",
        fmt_cells(&col_stepped),
        cells_match(&col_stepped, &[529.41, 636.36, 70.59, 763.64], 0.005),
    ));

    let four = ipf_transform(&q1, &target, &IpfConfig::FixedIterations(4))
        .expect("4 iterations")
        .result;
    let four_rounded = four.rounded().expect("rounded");
    out.push(CheckResult::flag(
        "c1/ipf/num1_4iter_rounded",
        1,
        SRC_EXAMPLE_2X2,
        "[534, 665 | 66, 735] after rounding",
        fmt_cells(&four_rounded),
        four_rounded.values() == [534.0, 665.0, 66.0, 735.0],
    ));

    let q2 = fixtures::q_num2();
    let target2 = fixtures::p_num2().margins().expect("positive margins");
    let four2 = ipf_transform(&q2, &target2, &IpfConfig::FixedIterations(4))
        .expect("4 iterations")
        .result;
    let four2_rounded = four2.rounded().expect("rounded");
    out.push(CheckResult::flag(
        "c1/ipf/num2_4iter_rounded",
        1,
        SRC_EXAMPLE_2X3,
        "[528, 475, 197 | 72, 325, 403] after rounding",
        fmt_cells(&four2_rounded),
        four2_rounded.values() == [528.0, 475.0, 197.0, 72.0, 325.0, 403.0],
    ));
    out
}

// ---------------------------------------------------------------------------
// criterion 2: sensitivity of the fitted table to category granularity
// ---------------------------------------------------------------------------

fn max_cell_gap(a: &ContingencyTable, b: &ContingencyTable) -> f64 {
    a.values()
        .iter()
        .zip(b.values())
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

fn criterion2() -> Vec<CheckResult> {
    let mut out = Vec::new();
    let (p1, q1) = (fixtures::p_num1(), fixtures::q_num1());
    let (p2, q2) = (fixtures::p_num2(), fixtures::q_num2());

    let coarse4 = ipf_transform(&q1, &p1.margins().unwrap(), &IpfConfig::FixedIterations(4))
        .unwrap()
        .result;
    let fine4_merged = ipf_transform(&q2, &p2.margins().unwrap(), &IpfConfig::FixedIterations(4))
        .unwrap()
        .result
        .merge_adjacent(Axis::Col, 1)
        .unwrap();
    let gap4 = max_cell_gap(&coarse4, &fine4_merged);
    out.push(CheckResult::flag(
        "c2/ipf/merge_paths_differ",
        2,
        SRC_EXAMPLE_2X3,
        "max cell gap >= 5",
        format!("{gap4:.4}"),
        gap4 >= 5.0,
    ));

    let cfg = IpfConfig::default_converge();
    let coarse_conv = ipf_transform(&q1, &p1.margins().unwrap(), &cfg)
        .unwrap()
        .result;
    let fine_conv_merged = ipf_transform(&q2, &p2.margins().unwrap(), &cfg)
        .unwrap()
        .result
        .merge_adjacent(Axis::Col, 1)
        .unwrap();
    let gap_conv = max_cell_gap(&coarse_conv, &fine_conv_merged);
    out.push(CheckResult::flag(
        "c2/ipf/gap_persists_converged",
        2,
        SRC_EXAMPLE_2X3,
        "max cell gap >= 5 with converged runs",
        format!("{gap_conv:.4}"),
        gap_conv >= 5.0,
    ));

    // preference effects on the rounded tables, as in the published
    // arithmetic
    let base_share = p1.homogamy_share().unwrap();
    let fine_effect = coarse4.rounded().unwrap().homogamy_share().unwrap() - base_share;
    out.push(CheckResult::approx(
        "c2/ipf/pref_effect_merge_before",
        2,
        SRC_DECOMP,
        0.0345,
        fine_effect,
        5e-4,
    ));
    let coarse_effect = fine4_merged.rounded().unwrap().homogamy_share().unwrap() - base_share;
    out.push(CheckResult::approx(
        "c2/ipf/pref_effect_merge_after",
        2,
        SRC_DECOMP,
        0.028,
        coarse_effect,
        5e-4,
    ));
    out
}

// ---------------------------------------------------------------------------
// criterion 3: the association-preserving transform fixtures
// ---------------------------------------------------------------------------

fn criterion3() -> Vec<CheckResult> {
    let mut out = Vec::new();
    let (p1, q1) = (fixtures::p_num1(), fixtures::q_num1());
    let (p2, q2) = (fixtures::p_num2(), fixtures::q_num2());

    let nm1 = nm_transform(&q1, &p1.margins().unwrap())
        .expect("2x2 transform")
        .result;
    out.push(CheckResult::flag(
        "c3/nm/worked_2x2",
        3,
        SRC_EXAMPLE_2X2,
        "[520, 680 | 80, 720] ±1e-9 per cell",
        fmt_cells(&nm1),
        cells_match(&nm1, &[520.0, 680.0, 80.0, 720.0], 1e-9),
    ));

    let nm2_merged = nm_transform(&q2, &p2.margins().unwrap())
        .expect("2x3 transform")
        .result
        .merge_adjacent(Axis::Col, 1)
        .unwrap();
    out.push(CheckResult::flag(
        "c3/nm/merged_2x3_equals_2x2",
        3,
        SRC_EXAMPLE_2X3,
        "merging the fine result reproduces the 2x2 output ±1e-9",
        fmt_cells(&nm2_merged),
        cells_match(&nm2_merged, &[520.0, 680.0, 80.0, 720.0], 1e-9),
    ));

    let pref = nm1.homogamy_share().unwrap() - p1.homogamy_share().unwrap();
    out.push(CheckResult::approx(
        "c3/nm/preference_effect",
        3,
        SRC_DECOMP,
        0.02,
        pref,
        1e-12,
    ));

    // the same number through the decomposition module
    let decomp = decompose_change(&p1, &q1, &Method::Nm, Statistic::HomogamyShare, Base::Early)
        .expect("decomposition");
    out.push(CheckResult::approx(
        "c3/nm/preference_effect_via_decomposition",
        3,
        SRC_DECOMP,
        0.02,
        decomp.preference_effect,
        1e-12,
    ));
    out.push(CheckResult::approx(
        "c3/nm/total_change",
        3,
        SRC_DECOMP,
        0.10,
        decomp.total,
        1e-12,
    ));
    out
}

// ---------------------------------------------------------------------------
// criterion 4: merge-invariance of the association-preserving transform
// ---------------------------------------------------------------------------

fn criterion4() -> Vec<CheckResult> {
    use crate::bayes::SplitMix64;

    let mut rng = SplitMix64::new(0x6d65_7267_6573); // fixed stream for the sample
    let mut dim = |hi: usize| 2 + (rng.next_u64() as usize) % (hi - 1);

    let mut compared = 0usize;
    let mut skipped_infeasible = 0usize;
    let mut failures: Vec<String> = Vec::new();

    for case in 0..1000 {
        let (r, c) = (dim(4), dim(4));
        let mut rng_cells = SplitMix64::substream(0x7061_6972, case as u64);
        let mut cells =
            |n: usize| -> Vec<f64> { (0..n).map(|_| 0.5 + 49.5 * rng_cells.next_f64()).collect() };
        let labels = |n: usize, p: char| (0..n).map(|i| format!("{p}{i}")).collect::<Vec<_>>();
        let seed_table =
            ContingencyTable::from_parts(cells(r * c), r, c, labels(r, 'r'), labels(c, 'c'))
                .unwrap();
        let target_table =
            ContingencyTable::from_parts(cells(r * c), r, c, labels(r, 'r'), labels(c, 'c'))
                .unwrap();
        let target = target_table.margins().unwrap();

        let fine = match nm_transform(&seed_table, &target) {
            Ok(report) => report.result,
            Err(NmError::InfeasibleResult { .. }) => {
                skipped_infeasible += 1;
                continue;
            }
            Err(other) => {
                failures.push(format!("case {case}: unexpected fine-path error {other}"));
                continue;
            }
        };

        // merges on 2-wide axes leave a single category, where the transform
        // is undefined on either path; only wider axes are comparable
        let mut merges = Vec::new();
        if r >= 3 {
            for i in 0..r - 1 {
                merges.push((Axis::Row, i));
            }
        }
        if c >= 3 {
            for j in 0..c - 1 {
                merges.push((Axis::Col, j));
            }
        }
        for (axis, k) in merges {
            let merged_seed = seed_table.merge_adjacent(axis, k).unwrap();
            let merged_target = target_table
                .merge_adjacent(axis, k)
                .unwrap()
                .margins()
                .unwrap();
            match nm_transform(&merged_seed, &merged_target) {
                Ok(coarse) => {
                    let merged_fine = fine.merge_adjacent(axis, k).unwrap();
                    let gap = max_cell_gap(&merged_fine, &coarse.result);
                    compared += 1;
                    if gap > 1e-9 {
                        failures.push(format!(
                            "case {case} merge {axis}@{k}: paths differ by {gap:e}"
                        ));
                    }
                }
                Err(e) => failures.push(format!(
                    "case {case} merge {axis}@{k}: coarse path failed ({e}) though the fine path succeeded"
                )),
            }
        }
    }

    let passed = failures.is_empty() && compared > 0;
    let mut check = CheckResult::flag(
        "c4/nm/merge_commutes_on_random_tables",
        4,
        "transform definition",
        "merge-then-transform equals transform-then-merge ±1e-9 over 1000 random pairs",
        format!(
            "{compared} comparisons agreed, {skipped_infeasible} infeasible pairs skipped, {} failures{}",
            failures.len(),
            failures
                .first()
                .map(|f| format!(" (first: {f})"))
                .unwrap_or_default()
        ),
        passed,
    );
    check = check.with_note(
        "pairs where the finer transform is infeasible are skipped; a coarse-path failure \
         with a feasible fine path would fail this check",
    );
    vec![check]
}

// ---------------------------------------------------------------------------
// criterion 5: the survey panels
// ---------------------------------------------------------------------------

struct PrintedGroup {
    key: &'static str,
    n: u64,
    x: u64,
    share: f64,
    ps: f64,
    lo: f64,
    hi: f64,
}

struct PrintedPanel {
    label: &'static str,
    gender: Gender,
    pair: GenerationPair,
    direction: Alternative,
    groups: [PrintedGroup; 4],
    ge: (f64, f64, f64),
    ae: f64,
    ae_rho0: (f64, f64),
    ae_rho1: (f64, f64),
    nge: f64,
    nge_rho0: (f64, f64),
    nge_rho1: (f64, f64),
    p_rho0: f64,
    p_rho1: f64,
}

/// Printed bounds that contradict the symmetric-interval arithmetic of their
/// own row: (check path, printed value, value forced by 2*point - other
/// bound). The corrected value is asserted; the printed one is recorded.
const MISPRINTED_BOUNDS: &[(&str, f64, f64)] = &[
    ("c5/survey/female_boomer/ae_rho0/ci_high", 0.0, 0.5),
    ("c5/survey/female_boomer/nge_rho0/ci_high", 0.0, 0.7),
    ("c5/survey/male_genx/ae_rho0/ci_high", 0.0, 1.0),
];

fn printed_panels() -> [PrintedPanel; 4] {
    [
        PrintedPanel {
            label: "male_boomer",
            gender: Gender::Male,
            pair: GenerationPair::Boomer,
            direction: Alternative::Negative,
            groups: [
                PrintedGroup {
                    key: "late",
                    n: 75,
                    x: 25,
                    share: 33.3,
                    ps: 33.5,
                    lo: 28.9,
                    hi: 38.1,
                },
                PrintedGroup {
                    key: "early",
                    n: 56,
                    x: 25,
                    share: 44.6,
                    ps: 44.7,
                    lo: 39.2,
                    hi: 50.3,
                },
                PrintedGroup {
                    key: "pooled_t",
                    n: 271,
                    x: 104,
                    share: 38.4,
                    ps: 38.4,
                    lo: 35.9,
                    hi: 40.9,
                },
                PrintedGroup {
                    key: "pooled_t_plus",
                    n: 754,
                    x: 221,
                    share: 29.3,
                    ps: 29.3,
                    lo: 27.9,
                    hi: 30.7,
                },
            ],
            ge: (-11.2, -18.4, -4.0),
            ae: -9.1,
            ae_rho0: (-11.9, -6.2),
            ae_rho1: (-10.2, -8.0),
            nge: -24.2,
            nge_rho0: (-32.5, -15.9),
            nge_rho1: (-31.5, -16.8),
            p_rho0: 0.7,
            p_rho1: 0.2,
        },
        PrintedPanel {
            label: "female_boomer",
            gender: Gender::Female,
            pair: GenerationPair::Boomer,
            direction: Alternative::Negative,
            groups: [
                PrintedGroup {
                    key: "late",
                    n: 92,
                    x: 32,
                    share: 34.8,
                    ps: 34.9,
                    lo: 30.7,
                    hi: 39.1,
                },
                PrintedGroup {
                    key: "early",
                    n: 84,
                    x: 32,
                    share: 38.1,
                    ps: 38.2,
                    lo: 33.8,
                    hi: 42.6,
                },
                PrintedGroup {
                    key: "pooled_t",
                    n: 302,
                    x: 116,
                    share: 38.4,
                    ps: 38.4,
                    lo: 36.1,
                    hi: 40.8,
                },
                PrintedGroup {
                    key: "pooled_t_plus",
                    n: 809,
                    x: 292,
                    share: 36.1,
                    ps: 36.1,
                    lo: 34.7,
                    hi: 37.5,
                },
            ],
            ge: (-3.3, -9.4, 2.8),
            ae: -2.3,
            ae_rho0: (-5.1, 0.5), // printed upper bound 0.0 is a misprint
            ae_rho1: (-3.3, -1.4),
            nge: -6.6,
            nge_rho0: (-13.9, 0.7), // printed upper bound 0.0 is a misprint
            nge_rho1: (-12.9, -0.4),
            p_rho0: 22.0,
            p_rho1: 18.5,
        },
        PrintedPanel {
            label: "male_genx",
            gender: Gender::Male,
            pair: GenerationPair::GenX,
            direction: Alternative::Positive,
            groups: [
                PrintedGroup {
                    key: "late",
                    n: 45,
                    x: 20,
                    share: 44.4,
                    ps: 44.5,
                    lo: 38.3,
                    hi: 50.7,
                },
                PrintedGroup {
                    key: "early",
                    n: 61,
                    x: 19,
                    share: 31.1,
                    ps: 31.4,
                    lo: 26.4,
                    hi: 36.3,
                },
                PrintedGroup {
                    key: "pooled_t",
                    n: 176,
                    x: 67,
                    share: 38.1,
                    ps: 38.1,
                    lo: 35.0,
                    hi: 41.2,
                },
                PrintedGroup {
                    key: "pooled_t_plus",
                    n: 756,
                    x: 270,
                    share: 35.7,
                    ps: 35.7,
                    lo: 34.3,
                    hi: 37.2,
                },
            ],
            ge: (13.2, 5.2, 21.1),
            ae: -2.4,
            ae_rho0: (-5.8, 1.0), // printed upper bound 0.0 is a misprint
            ae_rho1: (-4.0, -0.8),
            nge: 9.8,
            nge_rho0: (0.4, 19.1),
            nge_rho1: (1.5, 18.0),
            p_rho0: 18.9,
            p_rho1: 16.1,
        },
        PrintedPanel {
            label: "female_genx",
            gender: Gender::Female,
            pair: GenerationPair::GenX,
            direction: Alternative::Positive,
            groups: [
                PrintedGroup {
                    key: "late",
                    n: 53,
                    x: 24,
                    share: 45.3,
                    ps: 45.3,
                    lo: 39.6,
                    hi: 51.1,
                },
                PrintedGroup {
                    key: "early",
                    n: 60,
                    x: 24,
                    share: 40.0,
                    ps: 40.1,
                    lo: 34.8,
                    hi: 45.4,
                },
                PrintedGroup {
                    key: "pooled_t",
                    n: 188,
                    x: 78,
                    share: 41.5,
                    ps: 41.5,
                    lo: 38.5,
                    hi: 44.5,
                },
                PrintedGroup {
                    key: "pooled_t_plus",
                    n: 715,
                    x: 284,
                    share: 39.7,
                    ps: 39.7,
                    lo: 38.2,
                    hi: 41.3,
                },
            ],
            ge: (5.2, -2.6, 13.0),
            ae: -1.8,
            ae_rho0: (-5.2, 1.6),
            ae_rho1: (-3.3, -0.3),
            nge: 2.7,
            nge_rho0: (-6.5, 11.8),
            nge_rho1: (-5.4, 10.7),
            p_rho0: 40.0,
            p_rho1: 38.8,
        },
    ]
}

const POINT_TOL: f64 = 0.05;
const BOUND_TOL: f64 = 0.1;

fn misprint_note(path: &str) -> Option<String> {
    MISPRINTED_BOUNDS
        .iter()
        .find(|(p, _, _)| *p == path)
        .map(|(_, printed, corrected)| {
            format!(
                "printed as {printed:.1} in the source table, which contradicts the row's own \
             symmetric interval (2*point - opposite bound = {corrected:.1}); the implied value \
             is asserted instead"
            )
        })
}

fn push_bound(out: &mut Vec<CheckResult>, path: String, want: f64, got_pp: f64) {
    let note = misprint_note(&path);
    let mut check = CheckResult::approx(path, 5, SRC_SURVEY, want, got_pp, BOUND_TOL);
    if let Some(note) = note {
        check = check.with_note(note);
    }
    out.push(check);
}

struct PanelRun {
    rho0: PanelEstimates,
    rho1: PanelEstimates,
}

fn run_panel(counts: &[GroupCount], panel: &PrintedPanel) -> PanelRun {
    let groups = select_panel(counts, panel.gender, panel.pair).expect("bundled panel groups");
    PanelRun {
        rho0: panel_estimates(&groups, DEFAULT_ALPHA, 0.0, DEFAULT_SCALE).expect("estimates"),
        rho1: panel_estimates(&groups, DEFAULT_ALPHA, 1.0, DEFAULT_SCALE).expect("estimates"),
    }
}

fn criterion5() -> Vec<CheckResult> {
    let counts = fixtures::pew_counts();
    let mut out = Vec::new();

    for panel in &printed_panels() {
        let run = run_panel(&counts, panel);
        let groups = select_panel(&counts, panel.gender, panel.pair).unwrap();
        let observed = [
            (&groups.late, &run.rho0.late),
            (&groups.early, &run.rho0.early),
            (&groups.pooled_t, &run.rho0.pooled_t),
            (&groups.pooled_t_plus, &run.rho0.pooled_t_plus),
        ];

        for (printed, (group, est)) in panel.groups.iter().zip(observed) {
            let path = format!("c5/survey/{}/{}", panel.label, printed.key);
            out.push(CheckResult::flag(
                format!("{path}/counts"),
                5,
                SRC_SURVEY,
                format!("n={} x={}", printed.n, printed.x),
                format!("n={} x={}", group.n, group.x),
                group.n == printed.n && group.x == printed.x,
            ));
            out.push(CheckResult::approx(
                format!("{path}/sample_share"),
                5,
                SRC_SURVEY,
                printed.share,
                100.0 * group.sample_share(),
                POINT_TOL,
            ));
            out.push(CheckResult::approx(
                format!("{path}/estimated_share"),
                5,
                SRC_SURVEY,
                printed.ps,
                100.0 * est.point,
                POINT_TOL,
            ));
            push_bound(
                &mut out,
                format!("{path}/ci_low"),
                printed.lo,
                100.0 * est.ci_low,
            );
            push_bound(
                &mut out,
                format!("{path}/ci_high"),
                printed.hi,
                100.0 * est.ci_high,
            );
        }

        let effects: [(&str, &EffectEstimate, f64, (f64, f64)); 3] = [
            ("ge", &run.rho0.ge, panel.ge.0, (panel.ge.1, panel.ge.2)),
            ("ae_rho0", &run.rho0.ae, panel.ae, panel.ae_rho0),
            ("nge_rho0", &run.rho0.nge, panel.nge, panel.nge_rho0),
        ];
        for (key, est, point, (lo, hi)) in effects {
            let path = format!("c5/survey/{}/{}", panel.label, key);
            out.push(CheckResult::approx(
                format!("{path}/point"),
                5,
                SRC_SURVEY,
                point,
                100.0 * est.point,
                POINT_TOL,
            ));
            push_bound(&mut out, format!("{path}/ci_low"), lo, 100.0 * est.ci_low);
            push_bound(&mut out, format!("{path}/ci_high"), hi, 100.0 * est.ci_high);
        }

        let rho1_effects: [(&str, &EffectEstimate, (f64, f64)); 2] = [
            ("ae_rho1", &run.rho1.ae, panel.ae_rho1),
            ("nge_rho1", &run.rho1.nge, panel.nge_rho1),
        ];
        for (key, est, (lo, hi)) in rho1_effects {
            let path = format!("c5/survey/{}/{}", panel.label, key);
            push_bound(&mut out, format!("{path}/ci_low"), lo, 100.0 * est.ci_low);
            push_bound(&mut out, format!("{path}/ci_high"), hi, 100.0 * est.ci_high);
        }
    }
    out
}

// ---------------------------------------------------------------------------
// criterion 6: the one-sided p-values
// ---------------------------------------------------------------------------

const P_TOL: f64 = 0.15;

/// p-value recomputed from a row's printed point and interval, used in
/// diagnostics for the two irreproducible printed p-values.
fn p_implied_by_printed_row(point_pp: f64, lo_pp: f64, hi_pp: f64, direction: Alternative) -> f64 {
    let z = normal_quantile(1.0 - DEFAULT_ALPHA / 2.0).expect("alpha");
    let sigma_pp = (hi_pp - lo_pp) / 2.0 / z;
    let stat = point_pp / sigma_pp;
    match direction {
        Alternative::Negative => crate::normal::normal_cdf(stat),
        Alternative::Positive => 1.0 - crate::normal::normal_cdf(stat),
    }
}

fn criterion6() -> Vec<CheckResult> {
    let counts = fixtures::pew_counts();
    let mut out = Vec::new();
    for panel in &printed_panels() {
        let run = run_panel(&counts, panel);
        for (key, est, printed, printed_ci) in [
            ("p_rho0", &run.rho0.nge, panel.p_rho0, panel.nge_rho0),
            ("p_rho1", &run.rho1.nge, panel.p_rho1, panel.nge_rho1),
        ] {
            let got = 100.0 * one_sided_p(est, panel.direction).expect("positive sigma");
            let path = format!("c6/survey/{}/{}", panel.label, key);
            let mut check = CheckResult::approx(path, 6, SRC_GRID, printed, got, P_TOL);
            if !check.passed {
                // document what the row's own printed numbers imply
                let implied = 100.0
                    * p_implied_by_printed_row(
                        panel.nge,
                        printed_ci.0,
                        printed_ci.1,
                        panel.direction,
                    );
                check = check.with_note(format!(
                    "printed value is not reproducible from the estimation pipeline; \
                     recomputing from the row's own printed point and interval gives {implied:.2}, \
                     which matches the pipeline, not the printed p"
                ));
            }
            out.push(check);
        }
    }
    out
}

// ---------------------------------------------------------------------------
// criterion 7: the decision grids
// ---------------------------------------------------------------------------

fn criterion7() -> Vec<CheckResult> {
    use Decision::*;
    let counts = fixtures::pew_counts();
    let mut out = Vec::new();

    // decisions regenerated from the pipeline at the published one-sided
    // level, and at a level past the female-Boomer p-value
    for (level, expect, name) in [
        (
            0.20,
            [RejectNegative, AcceptNull, RejectPositive, AcceptNull],
            "c7/verdict/observed_decisions_at_20pct",
        ),
        (
            0.23,
            [RejectNegative, RejectNegative, RejectPositive, AcceptNull],
            "c7/verdict/observed_decisions_at_23pct",
        ),
    ] {
        let mut got = Vec::new();
        for panel in &printed_panels() {
            let run = run_panel(&counts, panel);
            got.push(decide_one_sided(&run.rho0.nge, level).expect("decision"));
        }
        let verdict = method_verdict(&VerdictInput {
            male_boomer: got[0],
            female_boomer: got[1],
            male_genx: got[2],
            female_genx: got[3],
        });
        out.push(CheckResult::flag(
            name,
            7,
            SRC_GRID,
            format!(
                "{} / {} / {} / {} -> NM",
                expect[0], expect[1], expect[2], expect[3]
            ),
            format!(
                "{} / {} / {} / {} -> {}",
                got[0], got[1], got[2], got[3], verdict
            ),
            got == expect && verdict == MethodVerdict::Nm,
        ));
    }

    // grid cells: rising-homophily rejections for the Boomers plus GenX
    // nulls support proportional fitting
    let ipf_rows = [
        (RejectPositive, AcceptNull),
        (AcceptNull, RejectPositive),
        (RejectPositive, RejectPositive),
    ];
    for (i, (m, f)) in ipf_rows.into_iter().enumerate() {
        let verdict = method_verdict(&VerdictInput {
            male_boomer: m,
            female_boomer: f,
            male_genx: AcceptNull,
            female_genx: AcceptNull,
        });
        out.push(CheckResult::flag(
            format!("c7/verdict/ipf_cell_{i}"),
            7,
            SRC_GRID,
            "IPF",
            verdict.to_string(),
            verdict == MethodVerdict::Ipf,
        ));
    }

    // opposite-sign rejections support neither
    let neither_rows = [
        (RejectNegative, RejectPositive),
        (RejectPositive, RejectNegative),
    ];
    for (i, (m, f)) in neither_rows.into_iter().enumerate() {
        let verdict = method_verdict(&VerdictInput {
            male_boomer: m,
            female_boomer: f,
            male_genx: AcceptNull,
            female_genx: AcceptNull,
        });
        out.push(CheckResult::flag(
            format!("c7/verdict/neither_cell_{i}"),
            7,
            SRC_GRID,
            "neither",
            verdict.to_string(),
            verdict == MethodVerdict::Neither,
        ));
    }

    // GenX cells: any positive rejection points away from proportional
    // fitting
    let nm_genx_cells = [
        (RejectPositive, AcceptNull),
        (AcceptNull, RejectPositive),
        (RejectPositive, RejectPositive),
    ];
    for (i, (m, f)) in nm_genx_cells.into_iter().enumerate() {
        let verdict = method_verdict(&VerdictInput {
            male_boomer: RejectNegative,
            female_boomer: AcceptNull,
            male_genx: m,
            female_genx: f,
        });
        out.push(CheckResult::flag(
            format!("c7/verdict/genx_nm_cell_{i}"),
            7,
            SRC_GRID,
            "NM",
            verdict.to_string(),
            verdict == MethodVerdict::Nm,
        ));
    }
    out
}

// ---------------------------------------------------------------------------
// criterion 8: the Monte-Carlo comparisons
// ---------------------------------------------------------------------------

fn criterion8(cfg: &ReproConfig) -> Vec<CheckResult> {
    let counts = fixtures::pew_counts();
    let mut out = Vec::new();

    for panel in &printed_panels() {
        let groups = select_panel(&counts, panel.gender, panel.pair).unwrap();
        let est = panel_estimates(&groups, DEFAULT_ALPHA, 0.0, DEFAULT_SCALE).unwrap();
        let analysis = analyze_pair(
            &groups,
            DEFAULT_ALPHA,
            DEFAULT_SCALE,
            cfg.replications,
            cfg.seed,
        )
        .expect("simulation");

        out.push(CheckResult::approx(
            format!("c8/mc/{}/h1_mean_matches_analytic_point", panel.label),
            8,
            SRC_SIM,
            100.0 * est.nge.point,
            analysis.h1.mean(),
            0.5,
        ));

        let expected_verdict = if panel.label == "male_boomer" {
            BayesVerdict::FavorsH1
        } else {
            BayesVerdict::Inconclusive
        };
        out.push(CheckResult::flag(
            format!("c8/mc/{}/bayes_verdict", panel.label),
            8,
            SRC_SIM,
            expected_verdict.to_string(),
            format!("{} (K = {:.4})", analysis.report.verdict, analysis.report.k),
            analysis.report.verdict == expected_verdict,
        ));

        match panel.label {
            "female_boomer" => {
                let mut check = CheckResult::approx(
                    format!("c8/mc/{}/cer", panel.label),
                    8,
                    SRC_SIM,
                    0.30,
                    analysis.report.cer,
                    0.03,
                );
                if !check.passed {
                    check = check.with_note(
                        "the published figure annotation (0.30) is not reproducible from the \
                         stated simulation design: both the simulation and a normal \
                         approximation with the panel's analytic standard errors put the \
                         equal-error rate near 0.35",
                    );
                }
                out.push(check);
            }
            "male_genx" => {
                out.push(CheckResult::approx(
                    format!("c8/mc/{}/cer", panel.label),
                    8,
                    SRC_SIM,
                    0.34,
                    analysis.report.cer,
                    0.03,
                ));
            }
            _ => {}
        }
    }
    out
}

// ---------------------------------------------------------------------------
// criterion 9: the property suite standing in for the census figures
// ---------------------------------------------------------------------------

fn criterion9(cfg: &ReproConfig) -> Vec<CheckResult> {
    use crate::bayes::SplitMix64;
    let mut out = Vec::new();

    let labels = |n: usize, p: char| (0..n).map(|i| format!("{p}{i}")).collect::<Vec<String>>();
    let random_table = |rng: &mut SplitMix64, r: usize, c: usize| {
        let cells: Vec<f64> = (0..r * c).map(|_| 1.0 + 99.0 * rng.next_f64()).collect();
        ContingencyTable::from_parts(cells, r, c, labels(r, 'r'), labels(c, 'c')).unwrap()
    };

    // additivity and self-decomposition
    {
        let mut rng = SplitMix64::new(cfg.seed ^ 0x0901);
        let mut worst_additivity = 0.0f64;
        let mut worst_self = 0.0f64;
        for _ in 0..200 {
            let early = random_table(&mut rng, 3, 3);
            let late = random_table(&mut rng, 3, 3);
            for method in [Method::Nm, Method::Ipf(IpfConfig::default_converge())] {
                if let Ok(r) = decompose_change(
                    &early,
                    &late,
                    &method,
                    Statistic::HomogamyShare,
                    Base::Early,
                ) {
                    worst_additivity = worst_additivity.max(
                        (r.preference_effect + r.availability_effect + r.interaction - r.total)
                            .abs(),
                    );
                }
                let own = decompose_change(
                    &early,
                    &early,
                    &method,
                    Statistic::HomogamyShare,
                    Base::Early,
                )
                .expect("self decomposition");
                worst_self = worst_self
                    .max(own.total.abs())
                    .max(own.preference_effect.abs())
                    .max(own.availability_effect.abs())
                    .max(own.interaction.abs());
            }
        }
        out.push(CheckResult::flag(
            "c9/decompose/additivity",
            9,
            "decomposition definition",
            "components sum to total within 1e-12 on 200 random pairs",
            format!("worst residual {worst_additivity:e}"),
            worst_additivity <= 1e-12,
        ));
        out.push(CheckResult::flag(
            "c9/decompose/self_zero",
            9,
            "decomposition definition",
            "all components zero within 1e-12 when early == late",
            format!("worst component {worst_self:e}"),
            worst_self <= 1e-12,
        ));
    }

    // rho invariance of the net point and monotone interval width
    {
        let counts = fixtures::pew_counts();
        let mut point_varies = false;
        let mut sigma_grows = false;
        for panel in &printed_panels() {
            let groups = select_panel(&counts, panel.gender, panel.pair).unwrap();
            let mut last_sigma = f64::INFINITY;
            let mut first_point = None;
            for rho in [0.0, 0.25, 0.5, 1.0] {
                let est = panel_estimates(&groups, DEFAULT_ALPHA, rho, DEFAULT_SCALE).unwrap();
                match first_point {
                    None => first_point = Some(est.nge.point),
                    Some(p) if p != est.nge.point => point_varies = true,
                    _ => {}
                }
                if est.nge.sigma > last_sigma {
                    sigma_grows = true;
                }
                last_sigma = est.nge.sigma;
            }
        }
        out.push(CheckResult::flag(
            "c9/survey/nge_point_rho_invariant",
            9,
            SRC_SURVEY,
            "net point identical across rho in {0, 0.25, 0.5, 1}",
            if point_varies {
                "point moved with rho"
            } else {
                "invariant"
            }
            .to_owned(),
            !point_varies,
        ));
        out.push(CheckResult::flag(
            "c9/survey/nge_sigma_monotone_in_rho",
            9,
            SRC_SURVEY,
            "standard error non-increasing in rho on all four panels",
            if sigma_grows {
                "sigma grew"
            } else {
                "monotone"
            }
            .to_owned(),
            !sigma_grows,
        ));
    }

    // odds-ratio preservation under proportional fitting
    {
        let mut rng = SplitMix64::new(cfg.seed ^ 0x0902);
        let mut worst = 0.0f64;
        for _ in 0..200 {
            let seed_table = random_table(&mut rng, 2, 2);
            let target = random_table(&mut rng, 2, 2).margins().unwrap();
            let fitted = ipf_transform(&seed_table, &target, &IpfConfig::default_converge())
                .expect("positive tables converge")
                .result;
            let rel = ((fitted.odds_ratio().unwrap() - seed_table.odds_ratio().unwrap())
                / seed_table.odds_ratio().unwrap())
            .abs();
            worst = worst.max(rel);
        }
        out.push(CheckResult::flag(
            "c9/ipf/preserves_odds_ratio",
            9,
            "transform definition",
            "relative drift within 1e-9 on 200 random 2x2 problems",
            format!("worst drift {worst:e}"),
            worst <= 1e-9,
        ));
    }

    // association preservation under the margin transform
    {
        let mut rng = SplitMix64::new(cfg.seed ^ 0x0903);
        let mut worst = 0.0f64;
        let mut feasible = 0usize;
        for _ in 0..200 {
            let r = 2 + (rng.next_u64() as usize) % 3;
            let c = 2 + (rng.next_u64() as usize) % 3;
            let seed_table = random_table(&mut rng, r, c);
            let target = random_table(&mut rng, r, c).margins().unwrap();
            if let Ok(report) = nm_transform(&seed_table, &target) {
                feasible += 1;
                worst = worst.max(
                    report
                        .preserved_ll
                        .max_abs_diff(&report.achieved_ll)
                        .unwrap(),
                );
            }
        }
        out.push(CheckResult::flag(
            "c9/nm/preserves_generalized_ll",
            9,
            "transform definition",
            "entry-wise drift within 1e-9 on random feasible problems",
            format!("worst drift {worst:e} over {feasible} feasible cases"),
            worst <= 1e-9 && feasible > 0,
        ));
    }

    // the counterfactual both ways round, as a cross-check of the module
    // wiring
    {
        let p1 = fixtures::p_num1();
        let q1 = fixtures::q_num1();
        let via_spec = counterfactual(&CounterfactualSpec {
            preferences_from: &q1,
            margins_from: &p1,
            method: &Method::Nm,
        })
        .unwrap();
        out.push(CheckResult::flag(
            "c9/decompose/counterfactual_wiring",
            9,
            SRC_DECOMP,
            "counterfactual(preferences Q, margins P) reproduces the worked output",
            fmt_cells(&via_spec),
            cells_match(&via_spec, &[520.0, 680.0, 80.0, 720.0], 1e-9),
        ));
    }

    // sanity anchors for the estimation plumbing the panels rely on
    {
        let ac = agresti_coull(
            &GroupCount::new(Gender::Male, "late_boomer", 2010, 75, 25).unwrap(),
            DEFAULT_ALPHA,
        )
        .unwrap();
        out.push(CheckResult::flag(
            "c9/survey/estimate_symmetry",
            9,
            SRC_SURVEY,
            "interval symmetric about the point within 1e-12",
            format!(
                "asymmetry {:e}",
                ((ac.ci_high - ac.point) - (ac.point - ac.ci_low)).abs()
            ),
            ((ac.ci_high - ac.point) - (ac.point - ac.ci_low)).abs() <= 1e-12,
        ));
        let ge = crate::survey::generation_effect(&ac, &ac).unwrap();
        out.push(CheckResult::flag(
            "c9/survey/effect_kinds",
            9,
            SRC_SURVEY,
            "generation effect tagged GE",
            format!("{}", ge.kind),
            ge.kind == EffectKind::Generation,
        ));
    }

    out
}

/// Run one criterion's checks.
pub fn run_criterion(criterion: u8, cfg: &ReproConfig) -> Vec<CheckResult> {
    match criterion {
        1 => criterion1(),
        2 => criterion2(),
        3 => criterion3(),
        4 => criterion4(),
        5 => criterion5(),
        6 => criterion6(),
        7 => criterion7(),
        8 => criterion8(cfg),
        9 => criterion9(cfg),
        _ => Vec::new(),
    }
}

/// Run the whole registry, honoring the name filter.
pub fn run(cfg: &ReproConfig) -> Vec<CheckResult> {
    let mut out = Vec::new();
    for criterion in 1..=9 {
        out.extend(run_criterion(criterion, cfg));
    }
    if let Some(filter) = &cfg.filter {
        out.retain(|c| c.name.contains(filter.as_str()));
    }
    out
}
