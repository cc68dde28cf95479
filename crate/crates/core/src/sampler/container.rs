//! Binary batch files: an 8-byte magic, the header length as a little-endian
//! `u64`, a JSON header, then `count * n_particles` little-endian `f64`
//! values, one record of `N` sorted coordinates per sample.

use std::fs;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{ChainDiagnostics, EnsembleConfig, Provenance, Sample, SampleBatch};
use crate::error::{Error, Result};

pub const BATCH_MAGIC: &[u8; 8] = b"BGBATCH1";
const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Serialize, Deserialize)]
struct Header {
    schema_version: u32,
    config: EnsembleConfig,
    count: usize,
    n_particles: usize,
    provenance: Provenance,
    diagnostics: ChainDiagnostics,
}

pub fn encode_batch(batch: &SampleBatch) -> Result<Vec<u8>> {
    if batch.is_empty() {
        return Err(Error::Container("refusing to encode an empty batch".into()));
    }
    let provenance = batch.samples[0].provenance;
    if batch.samples.iter().any(|s| s.provenance != provenance) {
        return Err(Error::Container("batch mixes sample provenances".into()));
    }
    let header = Header {
        schema_version: SCHEMA_VERSION,
        config: batch.config.clone(),
        count: batch.len(),
        n_particles: batch.n_particles(),
        provenance,
        diagnostics: batch.diagnostics.clone(),
    };
    // through a Value so that keys are emitted in sorted order
    let header = serde_json::to_vec(&serde_json::to_value(&header)?)?;
    let mut out = Vec::with_capacity(16 + header.len() + 8 * batch.len() * batch.n_particles());
    out.extend_from_slice(BATCH_MAGIC);
    out.extend_from_slice(&(header.len() as u64).to_le_bytes());
    out.extend_from_slice(&header);
    for sample in &batch.samples {
        for x in sample.lambdas() {
            out.extend_from_slice(&x.to_le_bytes());
        }
    }
    Ok(out)
}

pub fn decode_batch(bytes: &[u8]) -> Result<SampleBatch> {
    if bytes.len() < 16 || &bytes[..8] != BATCH_MAGIC {
        return Err(Error::Container("missing batch magic".into()));
    }
    let header_len = u64::from_le_bytes(bytes[8..16].try_into().expect("8 bytes")) as usize;
    let body_start = 16usize
        .checked_add(header_len)
        .filter(|end| *end <= bytes.len())
        .ok_or_else(|| Error::Container("header length exceeds file".into()))?;
    let header: Header = serde_json::from_slice(&bytes[16..body_start])
        .map_err(|e| Error::Container(format!("bad header: {e}")))?;
    if header.schema_version != SCHEMA_VERSION {
        return Err(Error::Container(format!("unsupported schema version {}", header.schema_version)));
    }
    let n = header.n_particles;
    if n != header.config.n_particles || n == 0 {
        return Err(Error::Container("header particle count disagrees with config".into()));
    }
    let body = &bytes[body_start..];
    let expected = header.count.checked_mul(n).and_then(|v| v.checked_mul(8));
    if expected != Some(body.len()) {
        return Err(Error::Container(format!(
            "body has {} bytes, header promises {} records of {} values",
            body.len(),
            header.count,
            n
        )));
    }
    let samples = body
        .chunks_exact(8 * n)
        .map(|record| {
            let lambdas = record
                .chunks_exact(8)
                .map(|b| f64::from_le_bytes(b.try_into().expect("8 bytes")))
                .collect();
            Sample::new(lambdas, header.provenance)
        })
        .collect::<Result<Vec<_>>>()
        .map_err(|e| Error::Container(e.to_string()))?;
    SampleBatch::new(header.config, samples, header.diagnostics)
}

pub fn write_batch(path: &Path, batch: &SampleBatch) -> Result<()> {
    fs::write(path, encode_batch(batch)?)?;
    Ok(())
}

pub fn read_batch(path: &Path) -> Result<SampleBatch> {
    decode_batch(&fs::read(path)?)
}

/// One row per sample, columns `lambda_1 .. lambda_N`.
pub fn write_batch_csv(path: &Path, batch: &SampleBatch) -> Result<()> {
    let mut out = std::io::BufWriter::new(fs::File::create(path)?);
    let names: Vec<String> = (1..=batch.n_particles()).map(|i| format!("lambda_{i}")).collect();
    writeln!(out, "{}", names.join(","))?;
    for sample in &batch.samples {
        let row: Vec<String> = sample.lambdas().iter().map(|x| format!("{x:e}")).collect();
        writeln!(out, "{}", row.join(","))?;
    }
    out.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potential::PotentialSpec;
    use crate::sampler::tridiagonal_gaussian_sample;

    #[test]
    fn round_trip_is_exact() {
        let batch = tridiagonal_gaussian_sample(7, 0.3, 2, 25).unwrap();
        let bytes = encode_batch(&batch).unwrap();
        let back = decode_batch(&bytes).unwrap();
        assert_eq!(back, batch);
        assert_eq!(encode_batch(&back).unwrap(), bytes);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("b.bin");
        write_batch(&path, &batch).unwrap();
        assert_eq!(read_batch(&path).unwrap(), batch);
        let csv = dir.path().join("b.csv");
        write_batch_csv(&csv, &batch).unwrap();
        assert_eq!(fs::read_to_string(csv).unwrap().lines().count(), 26);
    }

    #[test]
    fn corrupt_files_rejected() {
        let cfg = EnsembleConfig::new(2, 1.0, PotentialSpec::quartic(), 0).unwrap();
        let s = Sample::new(vec![0.0, 1.0], Provenance::Mcmc).unwrap();
        let batch = SampleBatch::new(cfg, vec![s], ChainDiagnostics::exact()).unwrap();
        let bytes = encode_batch(&batch).unwrap();
        assert!(decode_batch(&bytes[..bytes.len() - 3]).is_err());
        assert!(decode_batch(b"NOTMAGIC").is_err());
        let mut wrong = bytes.clone();
        wrong[0] = b'X';
        assert!(decode_batch(&wrong).is_err());
        let mut huge = bytes;
        huge[8..16].copy_from_slice(&u64::MAX.to_le_bytes());
        assert!(decode_batch(&huge).is_err());
    }
}
