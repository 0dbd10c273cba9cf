//! The margin transform that preserves the (generalized) Liu-Lu association.
//!
//! For a 2x2 table the transform is closed-form: read the Liu-Lu indicator
//! off the seed, then place n11 at the same normalized position between the
//! independence value and the Frechet bound implied by the target margins.
//! Larger tables are handled cut-wise: every row/column cut pair of the seed
//! is dichotomized, the 2x2 rule fixes the cumulative mass of the result's
//! top-left block at that cut, and cells are recovered by inclusion-
//! exclusion. Because each cut is transformed independently, merging
//! adjacent categories before or after the transform gives the same table:
//! merging just deletes one cut.

use thiserror::Error;

use crate::table::{n11_from_liu_lu, AssociationMatrix, ContingencyTable, MarginSpec, TableError};

/// Cells in [-FEASIBILITY_SLACK, 0) are treated as exact zeros; anything
/// more negative is a genuine infeasibility.
pub const FEASIBILITY_SLACK: f64 = 1e-9;

/// Tolerance for the preserved-vs-achieved association check on the result.
pub const PRESERVATION_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum NmError {
    #[error("degenerate margins at cut ({row_cut}, {col_cut}) of the seed")]
    DegenerateMargins { row_cut: usize, col_cut: usize },
    #[error("no feasible table: cell ({row}, {col}) would be {value}")]
    InfeasibleResult { row: usize, col: usize, value: f64 },
    #[error("association drifted by {delta:e} at cut ({row_cut}, {col_cut})")]
    AssociationDrift {
        row_cut: usize,
        col_cut: usize,
        delta: f64,
    },
    #[error("seed is {seed_rows}x{seed_cols} but target margins are {target_rows}x{target_cols}")]
    DimensionMismatch {
        seed_rows: usize,
        seed_cols: usize,
        target_rows: usize,
        target_cols: usize,
    },
    #[error(transparent)]
    Table(#[from] TableError),
}

/// The transformed table plus the association it was asked to preserve and
/// the association it actually achieved (equal within [`PRESERVATION_TOL`]
/// whenever the transform succeeds).
#[derive(Debug, Clone)]
pub struct NmReport {
    pub result: ContingencyTable,
    pub preserved_ll: AssociationMatrix,
    pub achieved_ll: AssociationMatrix,
}

fn check_dims(seed: &ContingencyTable, target: &MarginSpec) -> Result<(), NmError> {
    if seed.rows() != target.rows() || seed.cols() != target.cols() {
        return Err(NmError::DimensionMismatch {
            seed_rows: seed.rows(),
            seed_cols: seed.cols(),
            target_rows: target.rows(),
            target_cols: target.cols(),
        });
    }
    Ok(())
}

/// Closed-form 2x2 transform: preserve liu_lu(seed) on the target margins.
pub fn nm_transform_2x2(
    seed: &ContingencyTable,
    target: &MarginSpec,
) -> Result<ContingencyTable, NmError> {
    if seed.shape() != (2, 2) {
        return Err(NmError::Table(TableError::NotTwoByTwo {
            rows: seed.rows(),
            cols: seed.cols(),
        }));
    }
    check_dims(seed, target)?;
    let ll = seed.liu_lu().map_err(|e| match e {
        TableError::DegenerateMargins { row_cut, col_cut } => {
            NmError::DegenerateMargins { row_cut, col_cut }
        }
        other => NmError::Table(other),
    })?;
    let (r1, c1) = (target.row_sums()[0], target.col_sums()[0]);
    let (r2, c2) = (target.row_sums()[1], target.col_sums()[1]);
    let total = r1 + r2;
    let n11 = n11_from_liu_lu(ll, r1, c1, total);
    let cells = [n11, r1 - n11, c1 - n11, r2 - (c1 - n11)];
    let mut fixed = [0.0f64; 4];
    for (k, &v) in cells.iter().enumerate() {
        fixed[k] = clamp_cell(v, k / 2, k % 2)?;
    }
    // the last cell is equally c2 - (r1 - n11); consistent margins force both
    debug_assert!((fixed[3] - (c2 - cells[1])).abs() < 1e-6 * total.max(1.0));
    Ok(ContingencyTable::from_parts(
        fixed.to_vec(),
        2,
        2,
        seed.row_labels().to_vec(),
        seed.col_labels().to_vec(),
    )?)
}

fn clamp_cell(value: f64, row: usize, col: usize) -> Result<f64, NmError> {
    if value < 0.0 {
        if value >= -FEASIBILITY_SLACK {
            Ok(0.0)
        } else {
            Err(NmError::InfeasibleResult { row, col, value })
        }
    } else {
        Ok(value)
    }
}

/// General transform via cut-wise preservation and inclusion-exclusion.
/// Works for any shape with at least two categories per axis; the 2x2 case
/// reduces to [`nm_transform_2x2`].
pub fn nm_transform(seed: &ContingencyTable, target: &MarginSpec) -> Result<NmReport, NmError> {
    check_dims(seed, target)?;
    let (rows, cols) = seed.shape();
    if rows < 2 || cols < 2 {
        return Err(NmError::Table(TableError::EmptyTable { rows, cols }));
    }

    let preserved_ll = seed.generalized_ll().map_err(|e| match e {
        TableError::DegenerateMargins { row_cut, col_cut } => {
            NmError::DegenerateMargins { row_cut, col_cut }
        }
        other => NmError::Table(other),
    })?;

    // cumulative target margins; strictly interior because target sums are
    // all positive
    let cum = |sums: &[f64]| {
        let mut acc = 0.0;
        sums.iter()
            .map(|v| {
                acc += v;
                acc
            })
            .collect::<Vec<f64>>()
    };
    let row_cum = cum(target.row_sums());
    let col_cum = cum(target.col_sums());
    let total = row_cum[rows - 1];

    // cumulative top-left mass of the result at every cut
    let mut s = vec![0.0f64; rows * cols];
    for i in 0..rows {
        for j in 0..cols {
            s[i * cols + j] = if i == rows - 1 && j == cols - 1 {
                total
            } else if i == rows - 1 {
                col_cum[j]
            } else if j == cols - 1 {
                row_cum[i]
            } else {
                n11_from_liu_lu(preserved_ll.get(i, j), row_cum[i], col_cum[j], total)
            };
        }
    }

    let mut values = vec![0.0f64; rows * cols];
    for i in 0..rows {
        for j in 0..cols {
            let above = if i > 0 { s[(i - 1) * cols + j] } else { 0.0 };
            let left = if j > 0 { s[i * cols + j - 1] } else { 0.0 };
            let corner = if i > 0 && j > 0 {
                s[(i - 1) * cols + j - 1]
            } else {
                0.0
            };
            values[i * cols + j] = clamp_cell(s[i * cols + j] - above - left + corner, i, j)?;
        }
    }

    let result = ContingencyTable::from_parts(
        values,
        rows,
        cols,
        seed.row_labels().to_vec(),
        seed.col_labels().to_vec(),
    )?;

    let achieved_ll = result.generalized_ll().map_err(NmError::Table)?;
    for i in 0..preserved_ll.rows() {
        for j in 0..preserved_ll.cols() {
            let delta = (achieved_ll.get(i, j) - preserved_ll.get(i, j)).abs();
            if delta > PRESERVATION_TOL {
                return Err(NmError::AssociationDrift {
                    row_cut: i,
                    col_cut: j,
                    delta,
                });
            }
        }
    }

    Ok(NmReport {
        result,
        preserved_ll,
        achieved_ll,
    })
}
