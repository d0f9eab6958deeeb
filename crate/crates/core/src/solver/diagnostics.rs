use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use thiserror::Error;

use super::SolverResult;

#[derive(Debug, Error)]
pub enum DiagnosticsError {
    #[error("result has no diagnostics rows")]
    Empty,
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub const DIAGNOSTICS_HEADER: &str = "iter,pri_res,dual_res,gap,obj,scale,time_s";

/// Writes `iter,pri_res,dual_res,gap,obj,scale,time_s` rows as CSV.
pub fn write_diagnostics(result: &SolverResult, path: impl AsRef<Path>) -> Result<(), DiagnosticsError> {
    if result.diagnostics.is_empty() {
        return Err(DiagnosticsError::Empty);
    }
    let mut w = BufWriter::new(File::create(path)?);
    write_diagnostics_to(result, &mut w)?;
    w.flush()?;
    Ok(())
}

pub fn write_diagnostics_to<W: Write>(result: &SolverResult, w: &mut W) -> Result<(), DiagnosticsError> {
    if result.diagnostics.is_empty() {
        return Err(DiagnosticsError::Empty);
    }
    writeln!(w, "{DIAGNOSTICS_HEADER}")?;
    for r in &result.diagnostics {
        writeln!(
            w,
            "{},{:.6e},{:.6e},{:.6e},{:.6e},{:.6e},{:.6e}",
            r.iter, r.pri_res, r.dual_res, r.gap, r.obj, r.scale, r.time
        )?;
    }
    Ok(())
}
