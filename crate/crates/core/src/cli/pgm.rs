//! Binary greymap images of masks and labelings, chart 0 stacked above chart 1.

use std::fs;
use std::io::{self, Write};
use std::path::Path;
use std::sync::Arc;

use crate::fractal::{SphereMask, TwoChartGrid};
use crate::topology::ComponentLabeling;

fn encode(n: usize, body: impl Iterator<Item = u8>) -> Vec<u8> {
    let mut out = format!("P5\n{} {}\n255\n", n, 2 * n).into_bytes();
    out.extend(body);
    out
}

/// 255 on set pixels, 0 elsewhere.
pub fn encode_mask(mask: &SphereMask) -> Vec<u8> {
    encode(
        mask.grid().n(),
        mask.bits().iter().map(|&b| if b { 255 } else { 0 }),
    )
}

/// Component `k` of `count` drawn as `floor(255 k / count)`; the set itself is 0.
pub fn encode_labels(labeling: &ComponentLabeling) -> Vec<u8> {
    let count = labeling.component_count().max(1);
    encode(
        labeling.grid().n(),
        labeling
            .labels()
            .iter()
            .map(|&k| (255 * k as usize / count) as u8),
    )
}

/// Reads back a mask written by [`encode_mask`]; any nonzero active pixel is set.
pub fn decode_mask(bytes: &[u8], overlap: f64) -> Result<SphereMask, String> {
    let mut fields = Vec::new();
    let mut pos = 0;
    while fields.len() < 4 {
        while pos < bytes.len() && bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        let start = pos;
        while pos < bytes.len() && !bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        if start == pos {
            return Err("truncated header".into());
        }
        fields.push(std::str::from_utf8(&bytes[start..pos]).map_err(|e| e.to_string())?);
    }
    pos += 1;
    if fields[0] != "P5" {
        return Err(format!("expected P5, found {}", fields[0]));
    }
    let num = |s: &str| s.parse::<usize>().map_err(|e| format!("bad header field {s:?}: {e}"));
    let (w, h, max) = (num(fields[1])?, num(fields[2])?, num(fields[3])?);
    if h != 2 * w || max != 255 {
        return Err(format!("expected a {w}x{} image with maxval 255", 2 * w));
    }
    let body = bytes.get(pos..).unwrap_or_default();
    if body.len() != w * h {
        return Err(format!("expected {} pixel bytes, found {}", w * h, body.len()));
    }
    let grid = Arc::new(TwoChartGrid::new(w, overlap).map_err(|e| e.to_string())?);
    let g = Arc::clone(&grid);
    Ok(SphereMask::from_fn(grid, |i| body[i] != 0 && g.is_active(i)))
}

/// Writes through a temporary file in the same directory, then renames.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> io::Result<()> {
    let dir = path.parent().filter(|d| !d.as_os_str().is_empty()).unwrap_or(Path::new("."));
    fs::create_dir_all(dir)?;
    let name = path
        .file_name()
        .ok_or_else(|| io::Error::new(io::ErrorKind::InvalidInput, "path has no file name"))?;
    let tmp = dir.join(format!(".{}.{}.tmp", name.to_string_lossy(), std::process::id()));
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path)
}
