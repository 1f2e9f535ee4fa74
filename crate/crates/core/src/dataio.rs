//! On-disk formats: the sequence container, surface CSV files, parameter
//! manifests, and extra-evidence files.
//!
//! A sequence container is a directory holding:
//!
//! * `manifest.toml` — format version, dimensions, and the SHA-256 of the
//!   intensity payload.
//! * `intensity.bin` — raw little-endian `f32`, slice-major then row-major
//!   within a slice: the value for `(i, j, r)` sits at byte offset
//!   `4 * (((i * rho) + r) * phi + j)`.
//! * `air.csv` — header `i,j,a`, one row per (slice, column).
//! * `bins.csv` — header `i,j,b`, at most one row per slice.
//!
//! Every writer goes through [`write_atomic`]: files are either fully
//! written or absent. Reads verify sizes and checksums and report distinctly
//! named errors for each failure mode.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::DataError;
use crate::types::{EnergyParams, ExtraEvidence, Pin, RangeConstraint, Surface, TopoSequence};

/// Container format version this build reads and writes.
pub const CONTAINER_VERSION: u64 = 1;

const MANIFEST_FILE: &str = "manifest.toml";
const INTENSITY_FILE: &str = "intensity.bin";
const AIR_FILE: &str = "air.csv";
const BINS_FILE: &str = "bins.csv";

#[derive(Debug, Serialize, Deserialize)]
struct Manifest {
    version: u64,
    l: usize,
    phi: usize,
    rho: usize,
    intensity_sha256: String,
}

/// Writes `bytes` to `path` via a temporary sibling plus atomic rename.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), DataError> {
    let file_name = path
        .file_name()
        .and_then(|n| n.to_str())
        .unwrap_or("output");
    let tmp = path.with_file_name(format!("{file_name}.tmp"));
    fs::write(&tmp, bytes)?;
    fs::rename(&tmp, path)?;
    Ok(())
}

fn sha256_hex(bytes: &[u8]) -> String {
    let mut hasher = Sha256::new();
    hasher.update(bytes);
    let digest = hasher.finalize();
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

fn read_file(path: &Path) -> Result<Vec<u8>, DataError> {
    match fs::read(path) {
        Ok(b) => Ok(b),
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => Err(DataError::MissingFile {
            path: path.display().to_string(),
        }),
        Err(e) => Err(DataError::Io(e)),
    }
}

fn read_text(path: &Path) -> Result<String, DataError> {
    let bytes = read_file(path)?;
    String::from_utf8(bytes).map_err(|_| DataError::Parse {
        file: path.display().to_string(),
        line: 0,
        reason: "not valid UTF-8".into(),
    })
}

fn parse_error(path: &Path, line: usize, reason: impl Into<String>) -> DataError {
    DataError::Parse {
        file: path.display().to_string(),
        line,
        reason: reason.into(),
    }
}

/// Parses a CSV body with the given header into rows of `N` integers.
fn parse_int_csv<const N: usize>(
    path: &Path,
    text: &str,
    header: &str,
) -> Result<Vec<[usize; N]>, DataError> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h.trim_end() == header => {}
        Some((_, h)) => {
            return Err(parse_error(path, 1, format!("expected header {header:?}, found {h:?}")))
        }
        None => return Err(parse_error(path, 1, "empty file")),
    }
    let mut rows = Vec::new();
    for (idx, line) in lines {
        if line.is_empty() {
            continue;
        }
        let mut row = [0usize; N];
        let mut fields = line.split(',');
        for slot in row.iter_mut() {
            let field = fields
                .next()
                .ok_or_else(|| parse_error(path, idx + 1, "too few fields"))?;
            *slot = field
                .trim()
                .parse::<usize>()
                .map_err(|e| parse_error(path, idx + 1, format!("{field:?}: {e}")))?;
        }
        if fields.next().is_some() {
            return Err(parse_error(path, idx + 1, "too many fields"));
        }
        rows.push(row);
    }
    Ok(rows)
}

/// Writes a sequence container into `dir`, creating it if needed.
pub fn write_sequence(seq: &TopoSequence, dir: &Path) -> Result<(), DataError> {
    fs::create_dir_all(dir)?;
    let (l, phi, rho) = seq.dims();

    let mut payload = Vec::with_capacity(l * phi * rho * 4);
    for i in 0..l {
        for r in 0..rho {
            for j in 0..phi {
                payload.extend_from_slice(&seq.intensity_at(i, j, r).to_le_bytes());
            }
        }
    }
    write_atomic(&dir.join(INTENSITY_FILE), &payload)?;

    let manifest = Manifest {
        version: CONTAINER_VERSION,
        l,
        phi,
        rho,
        intensity_sha256: sha256_hex(&payload),
    };
    let body = toml::to_string(&manifest).expect("manifest serializes");
    let text = format!(
        "# topographic sequence container\n\
         # intensity.bin is raw little-endian float32, slice-major then\n\
         # row-major within a slice: the value for (i, j, r) sits at byte\n\
         # offset 4 * (((i * rho) + r) * phi + j).\n{body}"
    );
    write_atomic(&dir.join(MANIFEST_FILE), text.as_bytes())?;

    let mut air = String::from("i,j,a\n");
    for i in 0..l {
        for j in 0..phi {
            air.push_str(&format!("{i},{j},{}\n", seq.air_at(i, j)));
        }
    }
    write_atomic(&dir.join(AIR_FILE), air.as_bytes())?;

    let mut bins = String::from("i,j,b\n");
    for i in 0..l {
        if let Some((ji, bi)) = seq.bin(i) {
            bins.push_str(&format!("{i},{ji},{bi}\n"));
        }
    }
    write_atomic(&dir.join(BINS_FILE), bins.as_bytes())?;
    Ok(())
}

/// Reads a sequence container. Verifies the manifest version, the intensity
/// payload size and checksum, and full air-surface coverage.
pub fn read_sequence(dir: &Path) -> Result<TopoSequence, DataError> {
    let manifest_path = dir.join(MANIFEST_FILE);
    let manifest_text = match read_text(&manifest_path) {
        Err(DataError::Parse { .. }) => {
            return Err(DataError::CorruptManifest {
                path: manifest_path.display().to_string(),
                reason: "not valid UTF-8".into(),
            })
        }
        other => other?,
    };
    let manifest: Manifest = toml::from_str(&manifest_text).map_err(|e| {
        DataError::CorruptManifest {
            path: manifest_path.display().to_string(),
            reason: e.to_string(),
        }
    })?;
    if manifest.version != CONTAINER_VERSION {
        return Err(DataError::UnsupportedVersion {
            found: manifest.version,
            supported: CONTAINER_VERSION,
        });
    }
    let (l, phi, rho) = (manifest.l, manifest.phi, manifest.rho);

    let intensity_path = dir.join(INTENSITY_FILE);
    let payload = read_file(&intensity_path)?;
    let expected = (l * phi * rho * 4) as u64;
    if payload.len() as u64 != expected {
        return Err(DataError::SizeMismatch {
            file: intensity_path.display().to_string(),
            expected,
            found: payload.len() as u64,
        });
    }
    if sha256_hex(&payload) != manifest.intensity_sha256 {
        return Err(DataError::ChecksumMismatch {
            file: intensity_path.display().to_string(),
        });
    }
    // Transpose disk layout (row-major within slice) to column-contiguous.
    let mut intensity = vec![0.0f32; l * phi * rho];
    let mut offset = 0usize;
    for i in 0..l {
        for r in 0..rho {
            for j in 0..phi {
                let bytes = [
                    payload[offset],
                    payload[offset + 1],
                    payload[offset + 2],
                    payload[offset + 3],
                ];
                intensity[(i * phi + j) * rho + r] = f32::from_le_bytes(bytes);
                offset += 4;
            }
        }
    }

    let air_path = dir.join(AIR_FILE);
    let air_rows = parse_int_csv::<3>(&air_path, &read_text(&air_path)?, "i,j,a")?;
    let mut air = vec![usize::MAX; l * phi];
    let mut seen = vec![false; l * phi];
    for [i, j, a] in air_rows {
        if i >= l || j >= phi {
            return Err(parse_error(&air_path, 0, format!("index ({i}, {j}) out of bounds")));
        }
        if seen[i * phi + j] {
            return Err(parse_error(&air_path, 0, format!("duplicate entry ({i}, {j})")));
        }
        seen[i * phi + j] = true;
        air[i * phi + j] = a;
    }
    if seen.iter().any(|s| !s) {
        let missing = seen.iter().filter(|s| !**s).count();
        return Err(parse_error(&air_path, 0, format!("{missing} grid cells missing")));
    }

    let bins_path = dir.join(BINS_FILE);
    let bin_rows = parse_int_csv::<3>(&bins_path, &read_text(&bins_path)?, "i,j,b")?;
    let mut bins: Vec<Option<(usize, usize)>> = vec![None; l];
    for [i, j, b] in bin_rows {
        if i >= l {
            return Err(parse_error(&bins_path, 0, format!("slice {i} out of bounds")));
        }
        if bins[i].is_some() {
            return Err(parse_error(&bins_path, 0, format!("duplicate bin for slice {i}")));
        }
        bins[i] = Some((j, b));
    }

    Ok(TopoSequence::new(l, phi, rho, intensity, air, bins)?)
}

/// Writes a surface as CSV with header `i,j,s`, full grid in row-major order.
pub fn write_surface(surface: &Surface, path: &Path) -> Result<(), DataError> {
    let (l, phi) = surface.dims();
    let mut text = String::from("i,j,s\n");
    for i in 0..l {
        for j in 0..phi {
            text.push_str(&format!("{i},{j},{}\n", surface.label(i, j)));
        }
    }
    write_atomic(path, text.as_bytes())
}

/// Reads a surface CSV, inferring dimensions and checking that every grid
/// cell appears exactly once.
pub fn read_surface(path: &Path) -> Result<Surface, DataError> {
    let rows = parse_int_csv::<3>(path, &read_text(path)?, "i,j,s")?;
    if rows.is_empty() {
        return Err(parse_error(path, 0, "no surface rows"));
    }
    let l = rows.iter().map(|r| r[0]).max().unwrap() + 1;
    let phi = rows.iter().map(|r| r[1]).max().unwrap() + 1;
    let mut labels = vec![usize::MAX; l * phi];
    let mut seen = vec![false; l * phi];
    for [i, j, s] in rows {
        if seen[i * phi + j] {
            return Err(parse_error(path, 0, format!("duplicate entry ({i}, {j})")));
        }
        seen[i * phi + j] = true;
        labels[i * phi + j] = s;
    }
    if seen.iter().any(|s| !s) {
        let missing = seen.iter().filter(|s| !**s).count();
        return Err(parse_error(path, 0, format!("{missing} grid cells missing")));
    }
    Ok(Surface::new(l, phi, labels)?)
}

/// Writes energy-model parameters as a commented TOML manifest.
pub fn write_params(params: &EnergyParams, path: &Path) -> Result<(), DataError> {
    let body = toml::to_string(params).expect("params serialize");
    let text = format!(
        "# energy model parameters\n\
         # tau, alpha: rows; sigma_hat: rows; beta: one weight per column\n\
         # template.mu / template.sigma: per-pixel intensity mean / variance\n\
         # over t rows centered on the boundary\n{body}"
    );
    write_atomic(path, text.as_bytes())
}

/// Reads a parameter manifest and re-validates every invariant.
pub fn read_params(path: &Path) -> Result<EnergyParams, DataError> {
    let text = read_text(path)?;
    let raw: EnergyParams = toml::from_str(&text).map_err(|e| DataError::Parse {
        file: path.display().to_string(),
        line: 0,
        reason: e.to_string(),
    })?;
    Ok(EnergyParams::new(raw.template, raw.tau, raw.alpha, raw.sigma_hat, raw.beta)?)
}

/// Writes extra evidence as CSV with header `i,j,lo,hi`; a pin is a row with
/// `lo == hi`.
pub fn write_extra(extra: &ExtraEvidence, path: &Path) -> Result<(), DataError> {
    let mut text = String::from("i,j,lo,hi\n");
    for p in &extra.pins {
        text.push_str(&format!("{},{},{},{}\n", p.slice, p.column, p.label, p.label));
    }
    for r in &extra.ranges {
        text.push_str(&format!("{},{},{},{}\n", r.slice, r.column, r.lo, r.hi));
    }
    write_atomic(path, text.as_bytes())
}

/// Reads an extra-evidence CSV (see [`write_extra`] for the format).
pub fn read_extra(path: &Path) -> Result<ExtraEvidence, DataError> {
    let rows = parse_int_csv::<4>(path, &read_text(path)?, "i,j,lo,hi")?;
    let mut extra = ExtraEvidence::default();
    for [i, j, lo, hi] in rows {
        if lo > hi {
            return Err(parse_error(path, 0, format!("inverted range {lo}..{hi} at ({i}, {j})")));
        }
        if lo == hi {
            extra.pins.push(Pin { slice: i, column: j, label: lo });
        } else {
            extra.ranges.push(RangeConstraint { slice: i, column: j, lo, hi });
        }
    }
    Ok(extra)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth;
    use crate::types::TemplateModel;

    fn sample_sequence() -> TopoSequence {
        let cfg = synth::SynthConfig {
            l: 3,
            phi: 4,
            rho: 24,
            seed: 8,
            noise_sigma: 0.2,
            harmonics: 2,
            amp_range: (0.2, 0.5),
            roughness_gradient: 0.0,
            template: synth::default_render_template(),
            air_brightness: 0.5,
            air_margin: 12,
            bin_slack: 2,
            alpha: 4,
        };
        synth::generate(&cfg).unwrap().0
    }

    #[test]
    fn container_round_trips_bit_exactly() {
        let dir = tempfile::tempdir().unwrap();
        let seq = sample_sequence();
        write_sequence(&seq, dir.path()).unwrap();
        let back = read_sequence(dir.path()).unwrap();
        assert_eq!(seq, back);
        // Identical bytes on rewrite.
        let first = fs::read(dir.path().join(INTENSITY_FILE)).unwrap();
        write_sequence(&back, dir.path()).unwrap();
        let second = fs::read(dir.path().join(INTENSITY_FILE)).unwrap();
        assert_eq!(first, second);
    }

    #[test]
    fn truncated_payload_is_size_mismatch() {
        let dir = tempfile::tempdir().unwrap();
        write_sequence(&sample_sequence(), dir.path()).unwrap();
        let path = dir.path().join(INTENSITY_FILE);
        let mut bytes = fs::read(&path).unwrap();
        bytes.truncate(bytes.len() - 4);
        fs::write(&path, bytes).unwrap();
        assert!(matches!(
            read_sequence(dir.path()),
            Err(DataError::SizeMismatch { .. })
        ));
    }

    #[test]
    fn flipped_byte_is_checksum_mismatch() {
        let dir = tempfile::tempdir().unwrap();
        write_sequence(&sample_sequence(), dir.path()).unwrap();
        let path = dir.path().join(INTENSITY_FILE);
        let mut bytes = fs::read(&path).unwrap();
        bytes[17] ^= 0xff;
        fs::write(&path, bytes).unwrap();
        assert!(matches!(
            read_sequence(dir.path()),
            Err(DataError::ChecksumMismatch { .. })
        ));
    }

    #[test]
    fn missing_manifest_names_the_path() {
        let dir = tempfile::tempdir().unwrap();
        write_sequence(&sample_sequence(), dir.path()).unwrap();
        fs::remove_file(dir.path().join(MANIFEST_FILE)).unwrap();
        match read_sequence(dir.path()) {
            Err(DataError::MissingFile { path }) => assert!(path.contains("manifest.toml")),
            other => panic!("expected MissingFile, got {other:?}"),
        }
    }

    #[test]
    fn garbage_manifest_is_corrupt() {
        let dir = tempfile::tempdir().unwrap();
        write_sequence(&sample_sequence(), dir.path()).unwrap();
        fs::write(dir.path().join(MANIFEST_FILE), "not = [valid").unwrap();
        assert!(matches!(
            read_sequence(dir.path()),
            Err(DataError::CorruptManifest { .. })
        ));
    }

    #[test]
    fn future_version_is_unsupported() {
        let dir = tempfile::tempdir().unwrap();
        write_sequence(&sample_sequence(), dir.path()).unwrap();
        let path = dir.path().join(MANIFEST_FILE);
        let text = fs::read_to_string(&path)
            .unwrap()
            .replace("version = 1", "version = 2");
        fs::write(&path, text).unwrap();
        assert!(matches!(
            read_sequence(dir.path()),
            Err(DataError::UnsupportedVersion { found: 2, supported: 1 })
        ));
    }

    #[test]
    fn surface_csv_round_trips() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("surface.csv");
        let surface = Surface::new(2, 3, vec![4, 5, 6, 7, 8, 9]).unwrap();
        write_surface(&surface, &path).unwrap();
        assert_eq!(read_surface(&path).unwrap(), surface);
    }

    #[test]
    fn incomplete_surface_grid_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("surface.csv");
        fs::write(&path, "i,j,s\n0,0,4\n1,1,5\n").unwrap();
        assert!(matches!(read_surface(&path), Err(DataError::Parse { .. })));
    }

    #[test]
    fn params_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("params.toml");
        let tmpl = TemplateModel::new(vec![0.1, 0.9, 0.1], vec![0.5, 0.25, 0.5]).unwrap();
        let params = EnergyParams::new(tmpl, 10, 5, 1.25, vec![0.8, 1.2]).unwrap();
        write_params(&params, &path).unwrap();
        assert_eq!(read_params(&path).unwrap(), params);
    }

    #[test]
    fn invalid_params_file_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("params.toml");
        let tmpl = TemplateModel::new(vec![0.0], vec![1.0]).unwrap();
        let params = EnergyParams::new(tmpl, 1, 3, 1.0, vec![1.0]).unwrap();
        write_params(&params, &path).unwrap();
        let text = fs::read_to_string(&path).unwrap().replace("alpha = 3", "alpha = 0");
        fs::write(&path, text).unwrap();
        assert!(read_params(&path).is_err());
    }

    #[test]
    fn extra_evidence_round_trips() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("extra.csv");
        let extra = ExtraEvidence {
            pins: vec![Pin { slice: 0, column: 1, label: 7 }],
            ranges: vec![RangeConstraint { slice: 2, column: 0, lo: 3, hi: 9 }],
        };
        write_extra(&extra, &path).unwrap();
        assert_eq!(read_extra(&path).unwrap(), extra);
    }
}
