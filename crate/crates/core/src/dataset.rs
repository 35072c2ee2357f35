//! Binary dataset format.
//!
//! Layout, all little-endian:
//! - magic `WSLB1` (5 bytes)
//! - header: m_sc, m_sn, m_r, m_t as u64; delta_f, delta_t, f_c as f64;
//!   record count N as u64; label-presence flag as u64 (0 or 1)
//! - N records of M = m_sc * m_sn * m_r * m_t complex values, interleaved
//!   (re, im) f64, vectorized with the transmit index fastest
//! - optionally N u8 labels
//!
//! The header fixes the vectorization convention for every consumer of the
//! file.

use byteorder::{LittleEndian, ReadBytesExt, WriteBytesExt};
use nalgebra::DVector;
use num_complex::Complex64;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::channel::{ChannelConfig, ChannelVec};
use crate::error::{Error, Result};

pub const MAGIC: &[u8; 5] = b"WSLB1";

pub struct Dataset {
    pub cfg: ChannelConfig,
    pub records: Vec<ChannelVec>,
    pub labels: Option<Vec<u8>>,
}

pub fn write_dataset(
    path: &Path,
    cfg: &ChannelConfig,
    records: &[ChannelVec],
    labels: Option<&[u8]>,
) -> Result<()> {
    cfg.validate()?;
    if records.is_empty() {
        return Err(Error::EmptyInput("dataset"));
    }
    let m = cfg.total_dim();
    if records.iter().any(|r| r.len() != m) {
        return Err(Error::DimensionMismatch("record length does not match config".into()));
    }
    if let Some(l) = labels {
        if l.len() != records.len() {
            return Err(Error::DimensionMismatch("label count does not match records".into()));
        }
    }
    let mut w = BufWriter::new(std::fs::File::create(path)?);
    w.write_all(MAGIC)?;
    for v in [cfg.m_sc, cfg.m_sn, cfg.m_r, cfg.m_t] {
        w.write_u64::<LittleEndian>(v as u64)?;
    }
    for v in [cfg.delta_f, cfg.delta_t, cfg.f_c] {
        w.write_f64::<LittleEndian>(v)?;
    }
    w.write_u64::<LittleEndian>(records.len() as u64)?;
    w.write_u64::<LittleEndian>(u64::from(labels.is_some()))?;
    for rec in records {
        for c in rec.iter() {
            w.write_f64::<LittleEndian>(c.re)?;
            w.write_f64::<LittleEndian>(c.im)?;
        }
    }
    if let Some(l) = labels {
        w.write_all(l)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_dataset(path: &Path) -> Result<Dataset> {
    let mut r = BufReader::new(std::fs::File::open(path)?);
    let mut magic = [0u8; 5];
    r.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(Error::BadDataset(format!("bad magic {magic:?}")));
    }
    let m_sc = r.read_u64::<LittleEndian>()? as usize;
    let m_sn = r.read_u64::<LittleEndian>()? as usize;
    let m_r = r.read_u64::<LittleEndian>()? as usize;
    let m_t = r.read_u64::<LittleEndian>()? as usize;
    let delta_f = r.read_f64::<LittleEndian>()?;
    let delta_t = r.read_f64::<LittleEndian>()?;
    let f_c = r.read_f64::<LittleEndian>()?;
    let n = r.read_u64::<LittleEndian>()? as usize;
    let flag = r.read_u64::<LittleEndian>()?;
    if flag > 1 {
        return Err(Error::BadDataset(format!("bad label flag {flag}")));
    }
    let cfg = ChannelConfig::new(m_sc, m_sn, m_r, m_t, delta_f, delta_t, f_c)
        .map_err(|e| Error::BadDataset(format!("bad header: {e}")))?;
    let m = cfg.total_dim();
    let mut records = Vec::with_capacity(n);
    for _ in 0..n {
        let mut rec = DVector::from_element(m, Complex64::new(0.0, 0.0));
        for i in 0..m {
            let re = r.read_f64::<LittleEndian>()?;
            let im = r.read_f64::<LittleEndian>()?;
            if !re.is_finite() || !im.is_finite() {
                return Err(Error::BadDataset("non-finite record entry".into()));
            }
            rec[i] = Complex64::new(re, im);
        }
        records.push(rec);
    }
    let labels = if flag == 1 {
        let mut l = vec![0u8; n];
        r.read_exact(&mut l)?;
        Some(l)
    } else {
        None
    };
    let mut rest = [0u8; 1];
    if r.read(&mut rest)? != 0 {
        return Err(Error::BadDataset("trailing bytes".into()));
    }
    Ok(Dataset { cfg, records, labels })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;
    use rand::Rng;

    #[test]
    fn round_trip_with_labels() {
        let cfg = ChannelConfig::new(2, 3, 1, 1, 15e3, 5e-4, 2.1e9).unwrap();
        let mut rng = stream(1, "ds");
        let records: Vec<ChannelVec> = (0..5)
            .map(|_| {
                DVector::from_fn(cfg.total_dim(), |_, _| {
                    Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
                })
            })
            .collect();
        let labels: Vec<u8> = vec![1, 2, 3, 4, 1];
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("d.wslb");
        write_dataset(&path, &cfg, &records, Some(&labels)).unwrap();
        let ds = read_dataset(&path).unwrap();
        assert_eq!(ds.cfg, cfg);
        assert_eq!(ds.labels.as_deref(), Some(labels.as_slice()));
        for (a, b) in ds.records.iter().zip(&records) {
            assert_eq!(a, b);
        }
    }

    #[test]
    fn rejects_empty_and_bad_magic() {
        let cfg = ChannelConfig::new(1, 1, 2, 1, 15e3, 5e-4, 2.1e9).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("d.wslb");
        assert!(write_dataset(&path, &cfg, &[], None).is_err());
        std::fs::write(&path, b"NOPE!xxxxxxxxxxxxxxxx").unwrap();
        assert!(read_dataset(&path).is_err());
    }
}
