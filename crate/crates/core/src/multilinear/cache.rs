//! Binary export of multiplier tables and an on-disk cache of chain stages.
//!
//! A table file is one line of JSON header followed by the multiplier values
//! as little-endian `(re, im)` pairs of `f64`, in tuple-space order.

use std::fs;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::energy::{build_chain_from, build_energy_derivative_form, ChainStage, CorrectedEnergy};
use super::form::{MultilinearForm, Parity};
use super::space::TupleSpace;
use crate::error::{Error, Result};

#[derive(Debug, Serialize, Deserialize)]
struct Header {
    arity: usize,
    m: usize,
    n_max: usize,
    parity: Parity,
    label: String,
    len: usize,
}

pub fn write_form(form: &MultilinearForm, mut out: impl Write) -> Result<()> {
    let header = Header {
        arity: form.arity(),
        m: form.m(),
        n_max: form.n_max(),
        parity: form.parity(),
        label: form.label().to_owned(),
        len: form.values().len(),
    };
    serde_json::to_writer(&mut out, &header)?;
    out.write_all(b"\n")?;
    let mut buf = Vec::with_capacity(16 * header.len);
    for v in form.values() {
        buf.extend_from_slice(&v.re.to_le_bytes());
        buf.extend_from_slice(&v.im.to_le_bytes());
    }
    out.write_all(&buf)?;
    Ok(())
}

pub fn read_form(input: impl Read) -> Result<MultilinearForm> {
    let mut reader = BufReader::new(input);
    let mut line = String::new();
    reader.read_line(&mut line)?;
    let header: Header = serde_json::from_str(&line)?;
    let space = TupleSpace::shared(header.m, header.n_max, header.arity)?;
    if space.len() != header.len {
        return Err(Error::InvalidInput(format!(
            "table holds {} entries but the tuple space has {}",
            header.len,
            space.len()
        )));
    }
    let mut raw = vec![0u8; 16 * header.len];
    reader.read_exact(&mut raw)?;
    let values = raw
        .chunks_exact(16)
        .map(|c| {
            let re = f64::from_le_bytes(c[..8].try_into().expect("8 bytes"));
            let im = f64::from_le_bytes(c[8..].try_into().expect("8 bytes"));
            Complex64::new(re, im)
        })
        .collect();
    Ok(MultilinearForm::from_parts(
        space,
        values,
        header.parity,
        header.label,
    ))
}

/// Directory of chain-stage tables keyed by `(s, m, n_max, stage)`.
#[derive(Clone, Debug)]
pub struct FormCache {
    dir: PathBuf,
}

impl FormCache {
    pub fn new(dir: impl Into<PathBuf>) -> Result<Self> {
        let dir = dir.into();
        fs::create_dir_all(&dir)?;
        Ok(Self { dir })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn path(&self, s: f64, m: usize, n_max: usize, stage: ChainStage) -> PathBuf {
        self.dir
            .join(format!("s{s}_m{m}_n{n_max}_{}.bin", stage.name()))
    }

    pub fn load(
        &self,
        s: f64,
        m: usize,
        n_max: usize,
        stage: ChainStage,
    ) -> Result<Option<MultilinearForm>> {
        let path = self.path(s, m, n_max, stage);
        if !path.exists() {
            return Ok(None);
        }
        read_form(fs::File::open(path)?).map(Some)
    }

    pub fn store(&self, s: f64, form: &MultilinearForm, stage: ChainStage) -> Result<()> {
        let path = self.path(s, form.m(), form.n_max(), stage);
        let tmp = path.with_extension("bin.tmp");
        {
            let mut file = std::io::BufWriter::new(fs::File::create(&tmp)?);
            write_form(form, &mut file)?;
            file.flush()?;
        }
        fs::rename(tmp, path)?;
        Ok(())
    }

    /// Loads the chain from the cache, building and storing missing stages.
    pub fn chain(&self, s: f64, m: usize, n_max: usize) -> Result<CorrectedEnergy> {
        if let Some(chain) = self.load_all(s, m, n_max)? {
            return Ok(chain);
        }
        let m3 = build_energy_derivative_form(s, m, n_max)?;
        let mut failure = None;
        let chain = build_chain_from(s, m3, |stage, form| {
            if failure.is_none() {
                if let Err(e) = self.store(s, &form, stage) {
                    failure = Some(e);
                }
            }
            form
        })?;
        match failure {
            Some(e) => Err(e),
            None => Ok(chain),
        }
    }

    fn load_all(&self, s: f64, m: usize, n_max: usize) -> Result<Option<CorrectedEnergy>> {
        let mut stored = Vec::with_capacity(ChainStage::ALL.len());
        for stage in ChainStage::ALL {
            match self.load(s, m, n_max, stage)? {
                Some(form) => stored.push(form),
                None => return Ok(None),
            }
        }
        CorrectedEnergy::from_stages(s, stored).map(Some)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::multilinear::form::random_form;

    #[test]
    fn round_trip() {
        let form = random_form(3, 12, 4, Parity::Even, 4).unwrap();
        let mut bytes = Vec::new();
        write_form(&form, &mut bytes).unwrap();
        let back = read_form(bytes.as_slice()).unwrap();
        assert_eq!(back.values(), form.values());
        assert_eq!(back.parity(), form.parity());
        assert_eq!(back.label(), form.label());
    }
}
