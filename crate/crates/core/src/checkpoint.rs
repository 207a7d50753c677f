//! Self-describing binary checkpoints.
//!
//! Layout (little endian): magic `AMCK`, format version, dimension, attention
//! flag, n-gram config, the n-gram vocabulary as a count-prefixed list of
//! `(id, n-gram)`, every parameter tensor as row-major `f64`, the sampler
//! config and training metadata.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use byteorder::{LittleEndian, ReadBytesExt, WriteBytesExt};
use ndarray::{Array1, Array2};

use crate::error::{Error, Result};
use crate::model::{Model, Params};
use crate::ngram::{NgramConfig, NgramVocab};
use crate::training::SamplerConfig;

pub const MAGIC: &[u8; 4] = b"AMCK";
pub const VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq)]
pub struct Checkpoint {
    pub model: Model,
    pub sampler: SamplerConfig,
    pub epochs_completed: u64,
    pub epoch_losses: Vec<f64>,
}

impl Checkpoint {
    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = File::create(path).map_err(|e| Error::file(path, e))?;
        let mut writer = BufWriter::new(file);
        self.write_to(&mut writer)?;
        writer.flush().map_err(|e| Error::file(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = File::open(path).map_err(|e| Error::file(path, e))?;
        Self::read_from(&mut BufReader::new(file))
    }

    pub fn write_to<W: Write>(&self, w: &mut W) -> Result<()> {
        let model = &self.model;
        let vocab = model.vocab();
        let params = model.params();
        w.write_all(MAGIC)?;
        w.write_u32::<LittleEndian>(VERSION)?;
        w.write_u64::<LittleEndian>(model.dim() as u64)?;
        w.write_u8(model.attention() as u8)?;

        let cfg = vocab.config();
        for n in [cfg.n_min, cfg.n_max, cfg.min_count] {
            w.write_u64::<LittleEndian>(n as u64)?;
        }
        w.write_u64::<LittleEndian>(vocab.len() as u64)?;
        for (id, ngram) in vocab.ngrams().iter().enumerate() {
            w.write_u64::<LittleEndian>(id as u64)?;
            write_str(w, ngram)?;
        }

        write_matrix(w, &params.ngrams)?;
        write_matrix(w, &params.a)?;
        write_vector(w, &params.u)?;
        w.write_f64::<LittleEndian>(params.b)?;
        write_matrix(w, &params.m)?;

        let s = &self.sampler;
        for v in [
            s.min_frequency,
            s.per_epoch_cap as u64,
            s.context_min as u64,
            s.context_max as u64,
            s.epochs as u64,
            s.window as u64,
            s.seed,
        ] {
            w.write_u64::<LittleEndian>(v)?;
        }
        w.write_u64::<LittleEndian>(self.epochs_completed)?;
        write_vector(w, &Array1::from(self.epoch_losses.clone()))?;
        Ok(())
    }

    pub fn read_from<R: Read>(r: &mut R) -> Result<Self> {
        let mut magic = [0u8; 4];
        r.read_exact(&mut magic).map_err(truncated)?;
        if &magic != MAGIC {
            return Err(Error::Checkpoint("bad magic".into()));
        }
        let version = r.read_u32::<LittleEndian>().map_err(truncated)?;
        if version != VERSION {
            return Err(Error::Checkpoint(format!(
                "unsupported version {version}, expected {VERSION}"
            )));
        }
        let dim = read_len(r)?;
        let attention = match r.read_u8().map_err(truncated)? {
            0 => false,
            1 => true,
            x => return Err(Error::Checkpoint(format!("bad attention flag {x}"))),
        };
        let config = NgramConfig {
            n_min: read_len(r)?,
            n_max: read_len(r)?,
            min_count: read_len(r)?,
        };
        let count = read_len(r)?;
        let mut ngrams = Vec::with_capacity(count.min(1 << 20));
        for expected in 0..count {
            let id = read_len(r)?;
            if id != expected {
                return Err(Error::Checkpoint(format!("n-gram id {id} out of order")));
            }
            ngrams.push(read_str(r)?);
        }
        let vocab = NgramVocab::from_ngrams(config, ngrams);

        let params = Params {
            ngrams: read_matrix(r)?,
            a: read_matrix(r)?,
            u: read_vector(r)?,
            b: r.read_f64::<LittleEndian>().map_err(truncated)?,
            m: read_matrix(r)?,
        };
        if params.dim() != dim {
            return Err(Error::Checkpoint(format!(
                "header dimension {dim} does not match tensors ({})",
                params.dim()
            )));
        }
        let model = Model::from_parts(vocab, params, attention).map_err(|e| Error::Checkpoint(e.to_string()))?;

        let sampler = SamplerConfig {
            min_frequency: r.read_u64::<LittleEndian>().map_err(truncated)?,
            per_epoch_cap: read_len(r)?,
            context_min: read_len(r)?,
            context_max: read_len(r)?,
            epochs: read_len(r)?,
            window: read_len(r)?,
            seed: r.read_u64::<LittleEndian>().map_err(truncated)?,
        };
        let epochs_completed = r.read_u64::<LittleEndian>().map_err(truncated)?;
        let epoch_losses = read_vector(r)?.to_vec();
        let mut rest = [0u8; 1];
        if r.read(&mut rest)? != 0 {
            return Err(Error::Checkpoint("trailing bytes".into()));
        }
        Ok(Checkpoint {
            model,
            sampler,
            epochs_completed,
            epoch_losses,
        })
    }
}

fn truncated(e: std::io::Error) -> Error {
    if e.kind() == std::io::ErrorKind::UnexpectedEof {
        Error::Checkpoint("truncated file".into())
    } else {
        Error::Io(e)
    }
}

fn read_len<R: Read>(r: &mut R) -> Result<usize> {
    let v = r.read_u64::<LittleEndian>().map_err(truncated)?;
    usize::try_from(v).map_err(|_| Error::Checkpoint(format!("length {v} too large")))
}

fn write_str<W: Write>(w: &mut W, s: &str) -> Result<()> {
    w.write_u32::<LittleEndian>(s.len() as u32)?;
    w.write_all(s.as_bytes())?;
    Ok(())
}

fn read_str<R: Read>(r: &mut R) -> Result<String> {
    let len = r.read_u32::<LittleEndian>().map_err(truncated)? as usize;
    let mut buf = vec![0u8; len];
    r.read_exact(&mut buf).map_err(truncated)?;
    String::from_utf8(buf).map_err(|_| Error::Checkpoint("n-gram is not UTF-8".into()))
}

fn write_matrix<W: Write>(w: &mut W, m: &Array2<f64>) -> Result<()> {
    w.write_u64::<LittleEndian>(m.nrows() as u64)?;
    w.write_u64::<LittleEndian>(m.ncols() as u64)?;
    for &x in m.iter() {
        w.write_f64::<LittleEndian>(x)?;
    }
    Ok(())
}

fn read_matrix<R: Read>(r: &mut R) -> Result<Array2<f64>> {
    let rows = read_len(r)?;
    let cols = read_len(r)?;
    let len = rows
        .checked_mul(cols)
        .ok_or_else(|| Error::Checkpoint("matrix too large".into()))?;
    let mut data = vec![0.0; len];
    r.read_f64_into::<LittleEndian>(&mut data).map_err(truncated)?;
    Ok(Array2::from_shape_vec((rows, cols), data).expect("length matches shape"))
}

fn write_vector<W: Write>(w: &mut W, v: &Array1<f64>) -> Result<()> {
    w.write_u64::<LittleEndian>(v.len() as u64)?;
    for &x in v {
        w.write_f64::<LittleEndian>(x)?;
    }
    Ok(())
}

fn read_vector<R: Read>(r: &mut R) -> Result<Array1<f64>> {
    let len = read_len(r)?;
    let mut data = vec![0.0; len];
    r.read_f64_into::<LittleEndian>(&mut data).map_err(truncated)?;
    Ok(Array1::from(data))
}
