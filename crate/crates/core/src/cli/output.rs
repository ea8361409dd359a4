use std::fs;
use std::path::Path;

use crate::error::Result;

/// Writes `contents` to a sibling temporary file and renames it into place,
/// so a reader never sees a partial file.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    let name = path.file_name().and_then(|n| n.to_str()).unwrap_or("out");
    let tmp = path.with_file_name(format!(".{name}.tmp"));
    fs::write(&tmp, contents)?;
    fs::rename(&tmp, path)?;
    Ok(())
}

/// Formats an optional number as an empty CSV cell when absent.
pub(crate) fn cell(x: Option<f64>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}
