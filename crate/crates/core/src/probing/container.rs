//! Representation container: per-dialogue vectors exported by an encoder.
//!
//! Layout (little-endian): 8-byte magic `BGNREPR\0`, u32 version, u64
//! header length, UTF-8 JSON header `{ids, width, stage, fraction, dtype}`,
//! then `ids.len() * width` f32 values in row-major order.

use std::collections::HashSet;
use std::fmt;
use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::corpus::Fraction;
use crate::error::{Error, Result};

pub const MAGIC: &[u8; 8] = b"BGNREPR\0";
pub const VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReprStage {
    PreTraining,
    PostTraining,
}

impl fmt::Display for ReprStage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ReprStage::PreTraining => "pre_training",
            ReprStage::PostTraining => "post_training",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct Header {
    ids: Vec<String>,
    width: usize,
    stage: ReprStage,
    fraction: Fraction,
    dtype: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RepresentationSet {
    pub ids: Vec<String>,
    pub width: usize,
    pub stage: ReprStage,
    pub fraction: Fraction,
    /// Row-major, `ids.len() * width` values.
    pub data: Vec<f32>,
}

impl RepresentationSet {
    pub fn new(ids: Vec<String>, width: usize, stage: ReprStage, fraction: Fraction, data: Vec<f32>) -> Result<Self> {
        let set = RepresentationSet {
            ids,
            width,
            stage,
            fraction,
            data,
        };
        set.validate()?;
        Ok(set)
    }

    fn validate(&self) -> Result<()> {
        if self.data.len() != self.ids.len() * self.width {
            return Err(Error::Format(format!(
                "{} values for {} ids of width {}",
                self.data.len(),
                self.ids.len(),
                self.width
            )));
        }
        let mut seen = HashSet::new();
        if let Some(d) = self.ids.iter().find(|i| !seen.insert(i.as_str())) {
            return Err(Error::Format(format!("duplicate id {d}")));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn row(&self, i: usize) -> &[f32] {
        &self.data[i * self.width..(i + 1) * self.width]
    }

    pub fn write_to<W: Write>(&self, mut w: W) -> Result<()> {
        let header = serde_json::to_vec(&Header {
            ids: self.ids.clone(),
            width: self.width,
            stage: self.stage,
            fraction: self.fraction,
            dtype: "float32".into(),
        })?;
        w.write_all(MAGIC)?;
        w.write_all(&VERSION.to_le_bytes())?;
        w.write_all(&(header.len() as u64).to_le_bytes())?;
        w.write_all(&header)?;
        let mut body = Vec::with_capacity(self.data.len() * 4);
        for v in &self.data {
            body.extend_from_slice(&v.to_le_bytes());
        }
        w.write_all(&body)?;
        Ok(())
    }

    pub fn read_from<R: Read>(mut r: R) -> Result<Self> {
        let mut magic = [0u8; 8];
        r.read_exact(&mut magic)
            .map_err(|_| Error::Format("truncated representation container".into()))?;
        if &magic != MAGIC {
            return Err(Error::Format("not a representation container (bad magic)".into()));
        }
        let mut v = [0u8; 4];
        r.read_exact(&mut v)?;
        let version = u32::from_le_bytes(v);
        if version != VERSION {
            return Err(Error::Format(format!("unsupported container version {version}")));
        }
        let mut l = [0u8; 8];
        r.read_exact(&mut l)?;
        let len = u64::from_le_bytes(l) as usize;
        let mut hb = vec![0u8; len];
        r.read_exact(&mut hb)
            .map_err(|_| Error::Format("container header is truncated".into()))?;
        let h: Header = serde_json::from_slice(&hb)?;
        if h.dtype != "float32" {
            return Err(Error::Format(format!("unsupported dtype {}", h.dtype)));
        }
        let mut body = Vec::new();
        r.read_to_end(&mut body)?;
        let expected = h.ids.len() * h.width * 4;
        if body.len() != expected {
            return Err(Error::Format(format!(
                "container body has {} bytes, header implies {expected}",
                body.len()
            )));
        }
        let data = body
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]))
            .collect();
        RepresentationSet::new(h.ids, h.width, h.stage, h.fraction, data)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let mut buf = Vec::new();
        self.write_to(&mut buf)?;
        std::fs::write(path, buf)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::read_from(std::io::BufReader::new(std::fs::File::open(path)?))
    }

    /// CSV fallback: header `id,<dim>...`, one row per dialogue.
    pub fn read_csv<R: Read>(r: R, stage: ReprStage, fraction: Fraction) -> Result<Self> {
        let mut rd = csv::Reader::from_reader(r);
        let width = rd.headers()?.len().saturating_sub(1);
        let mut ids = Vec::new();
        let mut data = Vec::new();
        for (i, rec) in rd.records().enumerate() {
            let rec = rec?;
            ids.push(rec[0].to_string());
            for f in rec.iter().skip(1) {
                data.push(f.trim().parse::<f32>().map_err(|e| Error::Parse {
                    record: i + 1,
                    message: format!("`{f}`: {e}"),
                })?);
            }
        }
        RepresentationSet::new(ids, width, stage, fraction, data)
    }

    /// Load a container, or the CSV fallback when the path ends in `.csv`.
    pub fn load_any(path: &Path, stage: ReprStage, fraction: Fraction) -> Result<Self> {
        if path.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv")) {
            Self::read_csv(std::fs::File::open(path)?, stage, fraction)
        } else {
            Self::load(path)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> RepresentationSet {
        RepresentationSet::new(
            vec!["a".into(), "b".into()],
            3,
            ReprStage::PreTraining,
            Fraction::new(0.2).unwrap(),
            vec![1.0, 2.0, 3.0, -1.5, 0.0, 7.25],
        )
        .unwrap()
    }

    #[test]
    fn container_round_trip() {
        let s = sample();
        let mut buf = Vec::new();
        s.write_to(&mut buf).unwrap();
        assert_eq!(&buf[..8], MAGIC);
        let back = RepresentationSet::read_from(&buf[..]).unwrap();
        assert_eq!(back, s);
        assert_eq!(back.row(1), &[-1.5, 0.0, 7.25]);
    }

    #[test]
    fn header_fields() {
        let mut buf = Vec::new();
        sample().write_to(&mut buf).unwrap();
        let len = u64::from_le_bytes(buf[12..20].try_into().unwrap()) as usize;
        let h: serde_json::Value = serde_json::from_slice(&buf[20..20 + len]).unwrap();
        assert_eq!(h["stage"], "pre_training");
        assert_eq!(h["width"], 3);
        assert_eq!(h["fraction"], 0.2);
        assert_eq!(h["dtype"], "float32");
    }

    #[test]
    fn empty_container_is_valid() {
        let s = RepresentationSet::new(vec![], 768, ReprStage::PostTraining, Fraction::FULL, vec![]).unwrap();
        let mut buf = Vec::new();
        s.write_to(&mut buf).unwrap();
        assert!(RepresentationSet::read_from(&buf[..]).unwrap().is_empty());
    }

    #[test]
    fn rejects_corruption() {
        let mut buf = Vec::new();
        sample().write_to(&mut buf).unwrap();
        assert!(RepresentationSet::read_from(&buf[..buf.len() - 1]).is_err());
        let mut bad = buf.clone();
        bad[0] = b'X';
        assert!(RepresentationSet::read_from(&bad[..]).is_err());
        assert!(RepresentationSet::new(vec!["a".into(), "a".into()], 1, ReprStage::PreTraining, Fraction::FULL, vec![0.0, 1.0]).is_err());
    }

    #[test]
    fn csv_fallback() {
        let text = "id,d0,d1,d2\na,1,2,3\nb,-1.5,0,7.25\n";
        let s = RepresentationSet::read_csv(text.as_bytes(), ReprStage::PreTraining, Fraction::new(0.2).unwrap()).unwrap();
        assert_eq!(s, sample());
    }
}
