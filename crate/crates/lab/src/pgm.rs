//! Grayscale heatmaps of blockwise operator norms.

use std::path::Path;

use coarse_core::{CoarseError, Operator};

/// Binary PGM (P5): one pixel per (target block, source block), scaled so
/// the largest block norm is 255. Nonzero norms are rounded up, so a pixel
/// is 0 exactly when its block vanishes.
pub fn heatmap_bytes(t: &Operator) -> Result<Vec<u8>, CoarseError> {
    if !t.is_endogenous() {
        return Err(CoarseError::SpaceMismatch("heatmap needs an endogenous operator".into()));
    }
    let (h, w) = (t.target().space().block_count(), t.source().space().block_count());
    let norms = t.block_norms();
    let max = norms.iter().copied().fold(0.0, f64::max);
    let mut out = format!("P5\n{w} {h}\n255\n").into_bytes();
    out.extend(norms.iter().map(|&v| if max == 0.0 || v == 0.0 { 0 } else { (v / max * 255.0).ceil().clamp(1.0, 255.0) as u8 }));
    Ok(out)
}

pub fn render_heatmap(t: &Operator, path: &Path) -> anyhow::Result<()> {
    std::fs::write(path, heatmap_bytes(t)?)?;
    Ok(())
}

/// Parsed P5 image: width, height, pixels.
pub fn parse_pgm(bytes: &[u8]) -> Option<(usize, usize, &[u8])> {
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
            return None;
        }
        fields.push(std::str::from_utf8(&bytes[start..pos]).ok()?);
    }
    if fields[0] != "P5" || fields[3] != "255" {
        return None;
    }
    let (w, h): (usize, usize) = (fields[1].parse().ok()?, fields[2].parse().ok()?);
    let pixels = bytes.get(pos + 1..)?;
    (pixels.len() == w * h).then_some((w, h, pixels))
}
