//! Iterative proportional fitting: alternately rescale the rows and columns
//! of a seed table until its margins match a target. Each step multiplies a
//! whole row (or column) by one factor, so the odds-ratio structure of the
//! seed is retained at every iteration.
//!
//! One iteration is a row step followed by a column step, matching the
//! convention of the worked examples that report results "after 4
//! iterations". Fixed-iteration mode exists to reproduce those fixtures
//! bit-for-bit; converge mode is the default for real use.

use thiserror::Error;

use crate::table::{ContingencyTable, MarginSpec, TableError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum IpfError {
    #[error("row {row} is all zeros but its target sum is positive")]
    ZeroRowWithPositiveTarget { row: usize },
    #[error("column {col} is all zeros but its target sum is positive")]
    ZeroColWithPositiveTarget { col: usize },
    #[error("no convergence after {limit} iterations (residual {residual:e})")]
    MaxIterationsExceeded { limit: u32, residual: f64 },
    #[error("seed is {seed_rows}x{seed_cols} but target margins are {target_rows}x{target_cols}")]
    DimensionMismatch {
        seed_rows: usize,
        seed_cols: usize,
        target_rows: usize,
        target_cols: usize,
    },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Table(#[from] TableError),
}

/// Stopping rule for [`ipf_transform`].
#[derive(Debug, Clone, PartialEq)]
pub enum IpfConfig {
    /// Run exactly this many row+column iterations.
    FixedIterations(u32),
    /// Iterate until the margin residual drops to `tolerance`, failing after
    /// `max_iterations`.
    Converge { tolerance: f64, max_iterations: u32 },
}

impl IpfConfig {
    /// Converge to 1e-10 within 10,000 iterations. The tolerance is a library
    /// default, not a published value.
    pub fn default_converge() -> Self {
        IpfConfig::Converge {
            tolerance: 1e-10,
            max_iterations: 10_000,
        }
    }

    fn validate(&self) -> Result<(), IpfError> {
        match *self {
            IpfConfig::FixedIterations(n) if n < 1 => Err(IpfError::InvalidConfig(
                "fixed_iterations must be at least 1".into(),
            )),
            IpfConfig::Converge { tolerance, .. } if tolerance.is_nan() || tolerance <= 0.0 => {
                Err(IpfError::InvalidConfig("tolerance must be positive".into()))
            }
            IpfConfig::Converge { max_iterations, .. } if max_iterations < 1 => Err(
                IpfError::InvalidConfig("max_iterations must be at least 1".into()),
            ),
            _ => Ok(()),
        }
    }
}

/// Outcome of a run: the fitted table, iterations spent, and the largest
/// absolute gap between achieved and target margins.
#[derive(Debug, Clone)]
pub struct IpfReport {
    pub result: ContingencyTable,
    pub iterations_used: u32,
    pub max_margin_residual: f64,
}

fn check_dims(seed: &ContingencyTable, target: &MarginSpec) -> Result<(), IpfError> {
    if seed.rows() != target.rows() || seed.cols() != target.cols() {
        return Err(IpfError::DimensionMismatch {
            seed_rows: seed.rows(),
            seed_cols: seed.cols(),
            target_rows: target.rows(),
            target_cols: target.cols(),
        });
    }
    Ok(())
}

/// Scale each row of `t` so its sum matches the target row total. Zero cells
/// stay zero; a zero row cannot reach a positive target and fails.
pub fn ipf_step_rows(
    t: &ContingencyTable,
    target: &MarginSpec,
) -> Result<ContingencyTable, IpfError> {
    check_dims(t, target)?;
    let mut values = Vec::with_capacity(t.rows() * t.cols());
    for r in 0..t.rows() {
        let current = t.row_sum(r);
        let want = target.row_sums()[r];
        if current == 0.0 {
            return Err(IpfError::ZeroRowWithPositiveTarget { row: r });
        }
        let factor = want / current;
        for c in 0..t.cols() {
            values.push(t.get(r, c) * factor);
        }
    }
    Ok(ContingencyTable::from_parts(
        values,
        t.rows(),
        t.cols(),
        t.row_labels().to_vec(),
        t.col_labels().to_vec(),
    )?)
}

/// Column analogue of [`ipf_step_rows`].
pub fn ipf_step_cols(
    t: &ContingencyTable,
    target: &MarginSpec,
) -> Result<ContingencyTable, IpfError> {
    check_dims(t, target)?;
    let mut factors = Vec::with_capacity(t.cols());
    for c in 0..t.cols() {
        let current = t.col_sum(c);
        let want = target.col_sums()[c];
        if current == 0.0 {
            return Err(IpfError::ZeroColWithPositiveTarget { col: c });
        }
        factors.push(want / current);
    }
    let mut values = Vec::with_capacity(t.rows() * t.cols());
    for r in 0..t.rows() {
        for (c, factor) in factors.iter().enumerate() {
            values.push(t.get(r, c) * factor);
        }
    }
    Ok(ContingencyTable::from_parts(
        values,
        t.rows(),
        t.cols(),
        t.row_labels().to_vec(),
        t.col_labels().to_vec(),
    )?)
}

/// Largest absolute difference between the achieved and target margins, over
/// all rows and columns. Absolute rather than relative because the tables of
/// interest are O(10^2-10^3).
pub fn margin_residual(t: &ContingencyTable, target: &MarginSpec) -> f64 {
    let mut worst = 0.0f64;
    for r in 0..t.rows() {
        worst = worst.max((t.row_sum(r) - target.row_sums()[r]).abs());
    }
    for c in 0..t.cols() {
        worst = worst.max((t.col_sum(c) - target.col_sums()[c]).abs());
    }
    worst
}

/// Run the full algorithm: rows first, then columns, iterated per `cfg`.
pub fn ipf_transform(
    seed: &ContingencyTable,
    target: &MarginSpec,
    cfg: &IpfConfig,
) -> Result<IpfReport, IpfError> {
    cfg.validate()?;
    check_dims(seed, target)?;
    // fail before iterating if a margin is unreachable
    for r in 0..seed.rows() {
        if seed.row_sum(r) == 0.0 {
            return Err(IpfError::ZeroRowWithPositiveTarget { row: r });
        }
    }
    for c in 0..seed.cols() {
        if seed.col_sum(c) == 0.0 {
            return Err(IpfError::ZeroColWithPositiveTarget { col: c });
        }
    }

    let mut t = seed.clone();
    let mut iterations_used = 0;
    loop {
        t = ipf_step_cols(&ipf_step_rows(&t, target)?, target)?;
        iterations_used += 1;
        let residual = margin_residual(&t, target);
        match *cfg {
            IpfConfig::FixedIterations(n) => {
                if iterations_used >= n {
                    return Ok(IpfReport {
                        result: t,
                        iterations_used,
                        max_margin_residual: residual,
                    });
                }
            }
            IpfConfig::Converge {
                tolerance,
                max_iterations,
            } => {
                if residual <= tolerance {
                    return Ok(IpfReport {
                        result: t,
                        iterations_used,
                        max_margin_residual: residual,
                    });
                }
                if iterations_used >= max_iterations {
                    return Err(IpfError::MaxIterationsExceeded {
                        limit: max_iterations,
                        residual,
                    });
                }
            }
        }
    }
}
