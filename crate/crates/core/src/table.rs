//! Ordered contingency tables, their margins, and the association measures
//! preserved or reported by the transformation methods.
//!
//! Tables hold non-negative reals rather than integers because the transforms
//! produce fractional cells; integer display is a formatting concern (round
//! half away from zero, see [`ContingencyTable::rounded`]).

use std::fmt;

use thiserror::Error;

/// Table axis selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    Row,
    Col,
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Axis::Row => write!(f, "row"),
            Axis::Col => write!(f, "col"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TableError {
    #[error("cell ({row}, {col}) is negative: {value}")]
    NegativeCell { row: usize, col: usize, value: f64 },
    #[error("cell ({row}, {col}) is not finite")]
    NonFiniteCell { row: usize, col: usize },
    #[error("table must be at least 2x2, got {rows}x{cols}")]
    EmptyTable { rows: usize, cols: usize },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("table has zero total mass")]
    ZeroTotal,
    #[error("duplicate {axis} label {label:?}")]
    DuplicateLabel { axis: Axis, label: String },
    #[error("{axis} index {index} out of range for axis of length {len}")]
    IndexOutOfRange {
        axis: Axis,
        index: usize,
        len: usize,
    },
    #[error("operation requires a 2x2 table, got {rows}x{cols}")]
    NotTwoByTwo { rows: usize, cols: usize },
    #[error("operation requires a square table, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },
    #[error("odds ratio undefined: zero cell in denominator")]
    DivisionByZero,
    #[error("degenerate margins at cut ({row_cut}, {col_cut}): a dichotomized row or column total is zero")]
    DegenerateMargins { row_cut: usize, col_cut: usize },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MarginError {
    #[error("{axis} target sum at index {index} must be positive, got {value}")]
    NonPositiveSum {
        axis: Axis,
        index: usize,
        value: f64,
    },
    #[error("margin vectors must be non-empty")]
    Empty,
    #[error("row totals ({row_total}) and column totals ({col_total}) disagree beyond tolerance")]
    SumMismatch { row_total: f64, col_total: f64 },
    #[error("{axis} index {index} out of range for margins of length {len}")]
    IndexOutOfRange {
        axis: Axis,
        index: usize,
        len: usize,
    },
}

/// Relative tolerance for the row-total/column-total consistency check.
/// Inputs are exact at the scale of the worked examples; this only absorbs
/// float noise.
pub const MARGIN_SUM_RTOL: f64 = 1e-9;

/// A non-negative real matrix with ordered, labelled categories on both axes.
#[derive(Debug, Clone, PartialEq)]
pub struct ContingencyTable {
    rows: usize,
    cols: usize,
    values: Vec<f64>, // row-major
    row_labels: Vec<String>,
    col_labels: Vec<String>,
}

impl ContingencyTable {
    /// Validates and builds a table. Rejects negative or non-finite cells,
    /// fewer than two categories on either axis, zero total mass, and
    /// duplicate labels.
    pub fn new<S: Into<String>>(
        values: Vec<Vec<f64>>,
        row_labels: Vec<S>,
        col_labels: Vec<S>,
    ) -> Result<Self, TableError> {
        let rows = values.len();
        let cols = values.first().map_or(0, |r| r.len());
        if rows < 2 || cols < 2 {
            return Err(TableError::EmptyTable { rows, cols });
        }
        let mut flat = Vec::with_capacity(rows * cols);
        for (i, row) in values.iter().enumerate() {
            if row.len() != cols {
                return Err(TableError::DimensionMismatch(format!(
                    "row {} has {} cells, expected {}",
                    i,
                    row.len(),
                    cols
                )));
            }
            flat.extend_from_slice(row);
        }
        let row_labels: Vec<String> = row_labels.into_iter().map(Into::into).collect();
        let col_labels: Vec<String> = col_labels.into_iter().map(Into::into).collect();
        Self::from_parts(flat, rows, cols, row_labels, col_labels)
    }

    /// Internal constructor shared by `new` and the table-producing
    /// operations. Unlike `new` it accepts single-category axes, which arise
    /// from merges on 2-wide tables; everything else is validated the same
    /// way.
    pub(crate) fn from_parts(
        values: Vec<f64>,
        rows: usize,
        cols: usize,
        row_labels: Vec<String>,
        col_labels: Vec<String>,
    ) -> Result<Self, TableError> {
        if rows == 0 || cols == 0 || values.len() != rows * cols {
            return Err(TableError::EmptyTable { rows, cols });
        }
        if row_labels.len() != rows || col_labels.len() != cols {
            return Err(TableError::DimensionMismatch(format!(
                "{} row labels and {} column labels for a {}x{} table",
                row_labels.len(),
                col_labels.len(),
                rows,
                cols
            )));
        }
        let mut total = 0.0;
        for (k, &v) in values.iter().enumerate() {
            let (row, col) = (k / cols, k % cols);
            if !v.is_finite() {
                return Err(TableError::NonFiniteCell { row, col });
            }
            if v < 0.0 {
                return Err(TableError::NegativeCell { row, col, value: v });
            }
            total += v;
        }
        if total <= 0.0 {
            return Err(TableError::ZeroTotal);
        }
        for (axis, labels) in [(Axis::Row, &row_labels), (Axis::Col, &col_labels)] {
            for (i, label) in labels.iter().enumerate() {
                if labels[..i].contains(label) {
                    return Err(TableError::DuplicateLabel {
                        axis,
                        label: label.clone(),
                    });
                }
            }
        }
        Ok(Self {
            rows,
            cols,
            values,
            row_labels,
            col_labels,
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        assert!(
            row < self.rows && col < self.cols,
            "cell index out of range"
        );
        self.values[row * self.cols + col]
    }

    pub fn row_labels(&self) -> &[String] {
        &self.row_labels
    }

    pub fn col_labels(&self) -> &[String] {
        &self.col_labels
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn row_sum(&self, row: usize) -> f64 {
        self.values[row * self.cols..(row + 1) * self.cols]
            .iter()
            .sum()
    }

    pub fn col_sum(&self, col: usize) -> f64 {
        (0..self.rows).map(|r| self.get(r, col)).sum()
    }

    pub fn total(&self) -> f64 {
        self.values.iter().sum()
    }

    /// Row and column totals of this table, packaged as transformation
    /// targets. Fails if the table has a zero row or column, since zero
    /// target margins are rejected.
    pub fn margins(&self) -> Result<MarginSpec, MarginError> {
        MarginSpec::new(
            (0..self.rows).map(|r| self.row_sum(r)).collect(),
            (0..self.cols).map(|c| self.col_sum(c)).collect(),
        )
    }

    /// Sums categories `index` and `index + 1` on the given axis into one,
    /// concatenating their labels. Order of the remaining categories is
    /// preserved and total mass is unchanged.
    ///
    /// Merging a 2-wide axis yields a single-category axis; the merge itself
    /// succeeds and downstream operations requiring two categories reject the
    /// result.
    pub fn merge_adjacent(&self, axis: Axis, index: usize) -> Result<Self, TableError> {
        let len = match axis {
            Axis::Row => self.rows,
            Axis::Col => self.cols,
        };
        if index + 1 >= len {
            return Err(TableError::IndexOutOfRange { axis, index, len });
        }
        match axis {
            Axis::Row => {
                let mut values = Vec::with_capacity((self.rows - 1) * self.cols);
                let mut labels = Vec::with_capacity(self.rows - 1);
                for r in 0..self.rows {
                    if r == index + 1 {
                        continue;
                    }
                    for c in 0..self.cols {
                        let mut v = self.get(r, c);
                        if r == index {
                            v += self.get(r + 1, c);
                        }
                        values.push(v);
                    }
                    if r == index {
                        labels.push(format!("{}{}", self.row_labels[r], self.row_labels[r + 1]));
                    } else {
                        labels.push(self.row_labels[r].clone());
                    }
                }
                Self::from_parts(
                    values,
                    self.rows - 1,
                    self.cols,
                    labels,
                    self.col_labels.clone(),
                )
            }
            Axis::Col => {
                let mut values = Vec::with_capacity(self.rows * (self.cols - 1));
                let mut labels = Vec::with_capacity(self.cols - 1);
                for c in 0..self.cols {
                    if c == index + 1 {
                        continue;
                    }
                    if c == index {
                        labels.push(format!("{}{}", self.col_labels[c], self.col_labels[c + 1]));
                    } else {
                        labels.push(self.col_labels[c].clone());
                    }
                }
                for r in 0..self.rows {
                    for c in 0..self.cols {
                        if c == index + 1 {
                            continue;
                        }
                        let mut v = self.get(r, c);
                        if c == index {
                            v += self.get(r, c + 1);
                        }
                        values.push(v);
                    }
                }
                Self::from_parts(
                    values,
                    self.rows,
                    self.cols - 1,
                    self.row_labels.clone(),
                    labels,
                )
            }
        }
    }

    /// Collapses the table to 2x2 by summing rows `0..=row_cut` against the
    /// rest and columns `0..=col_cut` against the rest. Cuts are 0-based
    /// positions of the last category in the first block.
    pub fn dichotomize(&self, row_cut: usize, col_cut: usize) -> Result<Self, TableError> {
        if row_cut + 1 >= self.rows {
            return Err(TableError::IndexOutOfRange {
                axis: Axis::Row,
                index: row_cut,
                len: self.rows,
            });
        }
        if col_cut + 1 >= self.cols {
            return Err(TableError::IndexOutOfRange {
                axis: Axis::Col,
                index: col_cut,
                len: self.cols,
            });
        }
        let mut blocks = [0.0f64; 4];
        for r in 0..self.rows {
            for c in 0..self.cols {
                let i = usize::from(r > row_cut);
                let j = usize::from(c > col_cut);
                blocks[i * 2 + j] += self.get(r, c);
            }
        }
        let join = |labels: &[String], upto: usize| -> (String, String) {
            (labels[..=upto].concat(), labels[upto + 1..].concat())
        };
        let (r0, r1) = join(&self.row_labels, row_cut);
        let (c0, c1) = join(&self.col_labels, col_cut);
        Self::from_parts(blocks.to_vec(), 2, 2, vec![r0, r1], vec![c0, c1])
    }

    /// Each cell rounded half away from zero, as in the printed tables of the
    /// worked examples.
    pub fn rounded(&self) -> Result<Self, TableError> {
        Self::from_parts(
            self.values.iter().map(|v| v.round()).collect(),
            self.rows,
            self.cols,
            self.row_labels.clone(),
            self.col_labels.clone(),
        )
    }

    /// (n11 * n22) / (n12 * n21) of a 2x2 table.
    pub fn odds_ratio(&self) -> Result<f64, TableError> {
        if self.shape() != (2, 2) {
            return Err(TableError::NotTwoByTwo {
                rows: self.rows,
                cols: self.cols,
            });
        }
        let denom = self.get(0, 1) * self.get(1, 0);
        if denom == 0.0 {
            return Err(TableError::DivisionByZero);
        }
        Ok(self.get(0, 0) * self.get(1, 1) / denom)
    }

    /// Liu-Lu association indicator of a 2x2 table: the distance of n11 from
    /// its independence value, normalized by the distance to the Frechet
    /// bound on the same side. Always in [-1, 1].
    ///
    /// The positive branch (upper bound `min(r1, c1)`) is pinned by the worked
    /// transformation output; the negative branch (lower bound
    /// `max(0, r1 + c1 - T)`) mirrors it so the indicator spans [-1, 1]. The
    /// negative branch is an implementation convention validated only on
    /// positive-association fixtures.
    pub fn liu_lu(&self) -> Result<f64, TableError> {
        if self.shape() != (2, 2) {
            return Err(TableError::NotTwoByTwo {
                rows: self.rows,
                cols: self.cols,
            });
        }
        let r1 = self.row_sum(0);
        let c1 = self.col_sum(0);
        let total = self.total();
        if r1 == 0.0 || c1 == 0.0 || r1 == total || c1 == total {
            return Err(TableError::DegenerateMargins {
                row_cut: 0,
                col_cut: 0,
            });
        }
        Ok(liu_lu_from_blocks(self.get(0, 0), r1, c1, total))
    }

    /// Matrix of Liu-Lu indicators over every row/column cut pair. Entry
    /// (i, j) is `liu_lu` of the table dichotomized at row cut i and column
    /// cut j.
    pub fn generalized_ll(&self) -> Result<AssociationMatrix, TableError> {
        if self.rows < 2 || self.cols < 2 {
            return Err(TableError::EmptyTable {
                rows: self.rows,
                cols: self.cols,
            });
        }
        let mut values = Vec::with_capacity((self.rows - 1) * (self.cols - 1));
        for i in 0..self.rows - 1 {
            for j in 0..self.cols - 1 {
                let dich = self.dichotomize(i, j)?;
                values.push(dich.liu_lu().map_err(|e| match e {
                    TableError::DegenerateMargins { .. } => TableError::DegenerateMargins {
                        row_cut: i,
                        col_cut: j,
                    },
                    other => other,
                })?);
            }
        }
        Ok(AssociationMatrix {
            rows: self.rows - 1,
            cols: self.cols - 1,
            values,
        })
    }

    /// trace / total of a square table: the share of mass on the diagonal.
    pub fn homogamy_share(&self) -> Result<f64, TableError> {
        if !self.is_square() {
            return Err(TableError::NotSquare {
                rows: self.rows,
                cols: self.cols,
            });
        }
        let trace: f64 = (0..self.rows).map(|i| self.get(i, i)).sum();
        Ok(trace / self.total())
    }
}

/// Shared Liu-Lu arithmetic over an already-dichotomized top-left block.
/// Callers guarantee nondegenerate margins.
pub(crate) fn liu_lu_from_blocks(n11: f64, r1: f64, c1: f64, total: f64) -> f64 {
    let e11 = r1 * c1 / total;
    if n11 >= e11 {
        (n11 - e11) / (r1.min(c1) - e11)
    } else {
        (n11 - e11) / (e11 - (r1 + c1 - total).max(0.0))
    }
}

/// Inverse of [`liu_lu_from_blocks`]: the n11 implied by an association value
/// and target margins.
pub(crate) fn n11_from_liu_lu(ll: f64, r1: f64, c1: f64, total: f64) -> f64 {
    let e11 = r1 * c1 / total;
    if ll >= 0.0 {
        e11 + ll * (r1.min(c1) - e11)
    } else {
        e11 + ll * (e11 - (r1 + c1 - total).max(0.0))
    }
}

/// Target row and column totals for a transformation. Every entry must be
/// positive and the two vectors must agree on the grand total within
/// [`MARGIN_SUM_RTOL`].
#[derive(Debug, Clone, PartialEq)]
pub struct MarginSpec {
    row_sums: Vec<f64>,
    col_sums: Vec<f64>,
}

impl MarginSpec {
    pub fn new(row_sums: Vec<f64>, col_sums: Vec<f64>) -> Result<Self, MarginError> {
        if row_sums.is_empty() || col_sums.is_empty() {
            return Err(MarginError::Empty);
        }
        for (axis, sums) in [(Axis::Row, &row_sums), (Axis::Col, &col_sums)] {
            for (index, &value) in sums.iter().enumerate() {
                if !(value > 0.0 && value.is_finite()) {
                    return Err(MarginError::NonPositiveSum { axis, index, value });
                }
            }
        }
        let row_total: f64 = row_sums.iter().sum();
        let col_total: f64 = col_sums.iter().sum();
        if (row_total - col_total).abs() > MARGIN_SUM_RTOL * row_total.abs().max(col_total.abs()) {
            return Err(MarginError::SumMismatch {
                row_total,
                col_total,
            });
        }
        Ok(Self { row_sums, col_sums })
    }

    pub fn row_sums(&self) -> &[f64] {
        &self.row_sums
    }

    pub fn col_sums(&self) -> &[f64] {
        &self.col_sums
    }

    pub fn rows(&self) -> usize {
        self.row_sums.len()
    }

    pub fn cols(&self) -> usize {
        self.col_sums.len()
    }

    pub fn total(&self) -> f64 {
        self.row_sums.iter().sum()
    }

    /// Margins after merging categories `index` and `index + 1` on one axis.
    pub fn merge_adjacent(&self, axis: Axis, index: usize) -> Result<Self, MarginError> {
        let merge = |sums: &[f64]| -> Vec<f64> {
            let mut out = Vec::with_capacity(sums.len() - 1);
            for (i, &v) in sums.iter().enumerate() {
                if i == index + 1 {
                    let last = out.last_mut().expect("index checked");
                    *last += v;
                } else {
                    out.push(v);
                }
            }
            out
        };
        let len = match axis {
            Axis::Row => self.row_sums.len(),
            Axis::Col => self.col_sums.len(),
        };
        if index + 1 >= len {
            return Err(MarginError::IndexOutOfRange { axis, index, len });
        }
        match axis {
            Axis::Row => Self::new(merge(&self.row_sums), self.col_sums.clone()),
            Axis::Col => Self::new(self.row_sums.clone(), merge(&self.col_sums)),
        }
    }
}

/// The matrix-valued generalized Liu-Lu measure: one scalar indicator per
/// row/column cut pair of an ordered table.
#[derive(Debug, Clone, PartialEq)]
pub struct AssociationMatrix {
    rows: usize,
    cols: usize,
    values: Vec<f64>,
}

impl AssociationMatrix {
    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    /// Indicator at row cut `i`, column cut `j` (0-based; cut k separates
    /// categories `0..=k` from the rest).
    pub fn get(&self, i: usize, j: usize) -> f64 {
        assert!(i < self.rows && j < self.cols, "cut index out of range");
        self.values[i * self.cols + j]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Largest absolute entry-wise difference to another matrix of the same
    /// shape.
    pub fn max_abs_diff(&self, other: &Self) -> Option<f64> {
        if self.rows != other.rows || self.cols != other.cols {
            return None;
        }
        Some(
            self.values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max),
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::test_tables::{p_num1, p_num2, q_num1, q_num2};

    #[test]
    fn make_table_validates() {
        let t = p_num1();
        assert_eq!(t.shape(), (2, 2));
        assert_eq!(t.total(), 2000.0);

        // zeros are legal cells
        let z = ContingencyTable::new(
            vec![vec![1.0, 0.0], vec![0.0, 1.0]],
            vec!["a", "b"],
            vec!["x", "y"],
        );
        assert!(z.is_ok());

        let neg = ContingencyTable::new(
            vec![vec![-1.0, 2.0], vec![3.0, 4.0]],
            vec!["a", "b"],
            vec!["x", "y"],
        );
        assert_eq!(
            neg.unwrap_err(),
            TableError::NegativeCell {
                row: 0,
                col: 0,
                value: -1.0
            }
        );

        let nan = ContingencyTable::new(
            vec![vec![1.0, f64::NAN], vec![3.0, 4.0]],
            vec!["a", "b"],
            vec!["x", "y"],
        );
        assert_eq!(
            nan.unwrap_err(),
            TableError::NonFiniteCell { row: 0, col: 1 }
        );

        let one_col = ContingencyTable::new(vec![vec![1.0], vec![2.0]], vec!["a", "b"], vec!["x"]);
        assert!(matches!(
            one_col.unwrap_err(),
            TableError::EmptyTable { .. }
        ));

        let ragged = ContingencyTable::new(
            vec![vec![1.0, 2.0], vec![3.0]],
            vec!["a", "b"],
            vec!["x", "y"],
        );
        assert!(matches!(
            ragged.unwrap_err(),
            TableError::DimensionMismatch(_)
        ));

        let zero = ContingencyTable::new(
            vec![vec![0.0, 0.0], vec![0.0, 0.0]],
            vec!["a", "b"],
            vec!["x", "y"],
        );
        assert_eq!(zero.unwrap_err(), TableError::ZeroTotal);

        let dup = ContingencyTable::new(
            vec![vec![1.0, 2.0], vec![3.0, 4.0]],
            vec!["a", "a"],
            vec!["x", "y"],
        );
        assert!(matches!(
            dup.unwrap_err(),
            TableError::DuplicateLabel { .. }
        ));
    }

    #[test]
    fn margins_of_worked_tables() {
        let m = p_num1().margins().unwrap();
        assert_eq!(m.row_sums(), &[1200.0, 800.0]);
        assert_eq!(m.col_sums(), &[600.0, 1400.0]);

        let m = q_num1().margins().unwrap();
        assert_eq!(m.row_sums(), &[1000.0, 1000.0]);
        assert_eq!(m.col_sums(), &[600.0, 1400.0]);
    }

    #[test]
    fn margins_of_equal_rows_are_equal() {
        let t = ContingencyTable::new(
            vec![vec![3.0, 7.0], vec![3.0, 7.0]],
            vec!["a", "b"],
            vec!["x", "y"],
        )
        .unwrap();
        let m = t.margins().unwrap();
        assert_eq!(m.row_sums()[0], m.row_sums()[1]);
    }

    #[test]
    fn merge_reproduces_coarser_tables() {
        let merged = q_num2().merge_adjacent(Axis::Col, 1).unwrap();
        assert_eq!(merged.values(), q_num1().values());
        let merged = p_num2().merge_adjacent(Axis::Col, 1).unwrap();
        assert_eq!(merged.values(), p_num1().values());
        assert_eq!(merged.col_labels(), &["L".to_string(), "MH".to_string()]);
    }

    #[test]
    fn merge_on_two_wide_axis_succeeds_but_downstream_rejects() {
        let narrow = p_num1().merge_adjacent(Axis::Col, 0).unwrap();
        assert_eq!(narrow.shape(), (2, 1));
        assert!(matches!(
            narrow.odds_ratio().unwrap_err(),
            TableError::NotTwoByTwo { .. }
        ));
        assert!(matches!(
            narrow.generalized_ll().unwrap_err(),
            TableError::EmptyTable { .. }
        ));
    }

    #[test]
    fn merge_index_out_of_range() {
        assert!(matches!(
            p_num1().merge_adjacent(Axis::Col, 1).unwrap_err(),
            TableError::IndexOutOfRange { .. }
        ));
    }

    #[test]
    fn merge_preserves_total_and_commutes_with_margins() {
        let t = q_num2();
        let merged = t.merge_adjacent(Axis::Col, 1).unwrap();
        assert_eq!(merged.total(), t.total());

        let margins_then_merge = t.margins().unwrap().merge_adjacent(Axis::Col, 1).unwrap();
        let merge_then_margins = merged.margins().unwrap();
        assert_eq!(margins_then_merge, merge_then_margins);
    }

    #[test]
    fn odds_ratio_fixtures() {
        assert_eq!(q_num1().odds_ratio().unwrap(), 9.0);
        assert_eq!(p_num1().odds_ratio().unwrap(), 5.0);

        let flat = ContingencyTable::new(
            vec![vec![5.0, 5.0], vec![5.0, 5.0]],
            vec!["a", "b"],
            vec!["x", "y"],
        )
        .unwrap();
        assert_eq!(flat.odds_ratio().unwrap(), 1.0);

        let zero_off = ContingencyTable::new(
            vec![vec![1.0, 0.0], vec![1.0, 1.0]],
            vec!["a", "b"],
            vec!["x", "y"],
        )
        .unwrap();
        assert_eq!(
            zero_off.odds_ratio().unwrap_err(),
            TableError::DivisionByZero
        );
    }

    #[test]
    fn liu_lu_fixtures() {
        // e11 = 1000*600/2000 = 300; (500-300)/(600-300) = 2/3
        let ll = q_num1().liu_lu().unwrap();
        assert!((ll - 2.0 / 3.0).abs() < 1e-15);

        let indep = ContingencyTable::new(
            vec![vec![300.0, 700.0], vec![300.0, 700.0]],
            vec!["a", "b"],
            vec!["x", "y"],
        )
        .unwrap();
        assert_eq!(indep.liu_lu().unwrap(), 0.0);

        let perfect = ContingencyTable::new(
            vec![vec![600.0, 0.0], vec![0.0, 1400.0]],
            vec!["a", "b"],
            vec!["x", "y"],
        )
        .unwrap();
        assert!((perfect.liu_lu().unwrap() - 1.0).abs() < 1e-15);

        let degenerate = ContingencyTable::new(
            vec![vec![0.0, 1.0], vec![0.0, 1.0]],
            vec!["a", "b"],
            vec!["x", "y"],
        )
        .unwrap();
        assert!(matches!(
            degenerate.liu_lu().unwrap_err(),
            TableError::DegenerateMargins { .. }
        ));
    }

    #[test]
    fn liu_lu_negative_branch_hits_lower_bound() {
        // all mass off-diagonal with symmetric margins: lower Frechet bound
        let t = ContingencyTable::new(
            vec![vec![0.0, 600.0], vec![600.0, 800.0]],
            vec!["a", "b"],
            vec!["x", "y"],
        )
        .unwrap();
        assert!((t.liu_lu().unwrap() + 1.0).abs() < 1e-15);
    }

    #[test]
    fn generalized_ll_matches_scalar_and_merge() {
        let g = q_num1().generalized_ll().unwrap();
        assert_eq!((g.rows(), g.cols()), (1, 1));
        assert_eq!(g.get(0, 0), q_num1().liu_lu().unwrap());

        let g2 = q_num2().generalized_ll().unwrap();
        assert_eq!((g2.rows(), g2.cols()), (1, 2));
        // the cut separating the first column dichotomizes exactly to the
        // coarser worked table, so its indicator is the 2/3 above
        assert_eq!(
            q_num2().dichotomize(0, 0).unwrap().values(),
            q_num1().values()
        );
        assert!((g2.get(0, 0) - 2.0 / 3.0).abs() < 1e-15);
        assert!((g2.get(0, 1) - 0.5).abs() < 1e-15);

        // merging the last two columns deletes exactly their separating cut
        let merged = q_num2().merge_adjacent(Axis::Col, 1).unwrap();
        let gm = merged.generalized_ll().unwrap();
        assert_eq!((gm.rows(), gm.cols()), (1, 1));
        assert_eq!(gm.get(0, 0), g2.get(0, 0));
    }

    #[test]
    fn homogamy_share_fixtures() {
        assert_eq!(p_num1().homogamy_share().unwrap(), 0.60);
        assert_eq!(q_num1().homogamy_share().unwrap(), 0.70);

        let diag = ContingencyTable::new(
            vec![vec![2.0, 0.0], vec![0.0, 5.0]],
            vec!["a", "b"],
            vec!["x", "y"],
        )
        .unwrap();
        assert_eq!(diag.homogamy_share().unwrap(), 1.0);

        assert!(matches!(
            q_num2().homogamy_share().unwrap_err(),
            TableError::NotSquare { .. }
        ));
    }

    #[test]
    fn margin_spec_validates() {
        assert!(matches!(
            MarginSpec::new(vec![1.0, 0.0], vec![1.0]).unwrap_err(),
            MarginError::NonPositiveSum { .. }
        ));
        assert!(matches!(
            MarginSpec::new(vec![1.0, 1.0], vec![1.0, 2.0]).unwrap_err(),
            MarginError::SumMismatch { .. }
        ));
        assert!(MarginSpec::new(vec![1.0, 2.0], vec![1.5, 1.5]).is_ok());
    }

    #[test]
    fn rounded_is_half_away_from_zero() {
        let t = ContingencyTable::new(
            vec![vec![0.5, 1.4], vec![2.5, 3.6]],
            vec!["a", "b"],
            vec!["x", "y"],
        )
        .unwrap();
        assert_eq!(t.rounded().unwrap().values(), &[1.0, 1.0, 3.0, 4.0]);
    }

    #[test]
    fn margin_merge_rejects_out_of_range_index() {
        let m = MarginSpec::new(vec![1.0, 2.0], vec![1.5, 1.5]).unwrap();
        assert!(matches!(
            m.merge_adjacent(Axis::Row, 1).unwrap_err(),
            MarginError::IndexOutOfRange { .. }
        ));
    }

    use proptest::prelude::*;

    fn labelled(r: usize, c: usize, cells: Vec<f64>) -> ContingencyTable {
        let labels = |n: usize, p: char| (0..n).map(|i| format!("{p}{i}")).collect::<Vec<_>>();
        ContingencyTable::from_parts(cells, r, c, labels(r, 'r'), labels(c, 'c')).unwrap()
    }

    proptest! {
        #[test]
        fn liu_lu_stays_in_the_unit_interval(
            cells in proptest::collection::vec(0.0f64..100.0, 4),
        ) {
            let t = labelled(2, 2, cells);
            prop_assume!((0..2).all(|i| t.row_sum(i) > 0.0) && (0..2).all(|j| t.col_sum(j) > 0.0));
            let ll = t.liu_lu().unwrap();
            prop_assert!((-1.0..=1.0).contains(&ll), "liu_lu = {ll}");
        }

        #[test]
        fn independence_tables_have_zero_association_and_unit_odds_ratio(
            rows in proptest::collection::vec(0.5f64..100.0, 2..=4),
            cols in proptest::collection::vec(0.5f64..100.0, 2..=4),
        ) {
            // a rank-1 table is exactly an independence table: every cell
            // equals (row total)(column total)/(grand total)
            let cells: Vec<f64> = rows
                .iter()
                .flat_map(|r| cols.iter().map(move |c| r * c))
                .collect();
            let t = labelled(rows.len(), cols.len(), cells);
            let g = t.generalized_ll().unwrap();
            for &ll in g.values() {
                prop_assert!(ll.abs() < 1e-12, "independence LL drifted to {ll}");
            }
            if t.shape() == (2, 2) {
                prop_assert!((t.odds_ratio().unwrap() - 1.0).abs() < 1e-12);
            }
        }

        #[test]
        fn generalized_ll_commutes_with_merging(
            r in 2usize..=5,
            c in 2usize..=5,
            cells in proptest::collection::vec(0.5f64..100.0, 25),
            pick in proptest::bool::ANY,
            k in 0usize..4,
        ) {
            let t = labelled(r, c, cells[..r * c].to_vec());
            let axis = if pick { Axis::Row } else { Axis::Col };
            let len = if pick { r } else { c };
            prop_assume!(len >= 3);
            let k = k % (len - 1);

            let merged = t.merge_adjacent(axis, k).unwrap();
            let g_full = t.generalized_ll().unwrap();
            let g_merged = merged.generalized_ll().unwrap();

            // merging categories k and k+1 deletes exactly cut k on that axis
            for i in 0..g_merged.rows() {
                for j in 0..g_merged.cols() {
                    let (fi, fj) = match axis {
                        Axis::Row => (if i >= k { i + 1 } else { i }, j),
                        Axis::Col => (i, if j >= k { j + 1 } else { j }),
                    };
                    let (got, want) = (g_merged.get(i, j), g_full.get(fi, fj));
                    prop_assert!(
                        (got - want).abs() < 1e-12,
                        "cut ({i},{j}) after {axis}@{k} merge: {got} vs {want}"
                    );
                }
            }
        }
    }
}
