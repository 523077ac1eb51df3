//! Binary state snapshots.
//!
//! Layout, all integers and floats little-endian:
//!
//! ```text
//! magic    8 bytes  "HYPRSNAP"
//! version  u8       1
//! count    u8       number of fields
//! nx       u32
//! rows     u32
//! t        f64
//! lx       f64
//! eps      f64      0 for Prandtl states
//! then per field: name length u8, name bytes, nx * rows (re f64, im f64)
//! ```
//!
//! Coefficients are stored row-major in spectral storage order.

use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::fields::{Field, C64};

pub const MAGIC: &[u8; 8] = b"HYPRSNAP";
pub const VERSION: u8 = 1;

#[derive(Clone, Debug, PartialEq)]
pub struct Snapshot {
    pub t: f64,
    pub lx: f64,
    pub eps: f64,
    pub fields: Vec<(String, Field)>,
}

impl Snapshot {
    pub fn field(&self, name: &str) -> Option<&Field> {
        self.fields.iter().find(|(n, _)| n == name).map(|(_, f)| f)
    }

    pub fn write_to(&self, w: &mut impl Write) -> Result<()> {
        let first = self
            .fields
            .first()
            .ok_or_else(|| Error::Snapshot("no fields to write".into()))?;
        let (nx, rows) = (first.1.nx(), first.1.rows());
        if self.fields.len() > u8::MAX as usize {
            return Err(Error::Snapshot("too many fields".into()));
        }
        w.write_all(MAGIC)?;
        w.write_all(&[VERSION, self.fields.len() as u8])?;
        w.write_all(&(nx as u32).to_le_bytes())?;
        w.write_all(&(rows as u32).to_le_bytes())?;
        for x in [self.t, self.lx, self.eps] {
            w.write_all(&x.to_le_bytes())?;
        }
        for (name, f) in &self.fields {
            if f.nx() != nx || f.rows() != rows {
                return Err(Error::Snapshot(format!("field {name} has a different shape")));
            }
            let bytes = name.as_bytes();
            if bytes.len() > u8::MAX as usize {
                return Err(Error::Snapshot(format!("field name too long: {name}")));
            }
            w.write_all(&[bytes.len() as u8])?;
            w.write_all(bytes)?;
            let mut buf = Vec::with_capacity(16 * f.as_slice().len());
            for z in f.as_slice() {
                buf.extend_from_slice(&z.re.to_le_bytes());
                buf.extend_from_slice(&z.im.to_le_bytes());
            }
            w.write_all(&buf)?;
        }
        Ok(())
    }

    pub fn read_from(r: &mut impl Read) -> Result<Self> {
        let mut magic = [0u8; 8];
        r.read_exact(&mut magic)?;
        if &magic != MAGIC {
            return Err(Error::Snapshot("bad magic header".into()));
        }
        let mut head = [0u8; 2];
        r.read_exact(&mut head)?;
        if head[0] != VERSION {
            return Err(Error::Snapshot(format!("unsupported version {}", head[0])));
        }
        let count = head[1] as usize;
        let nx = read_u32(r)? as usize;
        let rows = read_u32(r)? as usize;
        let t = read_f64(r)?;
        let lx = read_f64(r)?;
        let eps = read_f64(r)?;
        let mut fields = Vec::with_capacity(count);
        for _ in 0..count {
            let mut len = [0u8; 1];
            r.read_exact(&mut len)?;
            let mut name = vec![0u8; len[0] as usize];
            r.read_exact(&mut name)?;
            let name = String::from_utf8(name)
                .map_err(|_| Error::Snapshot("field name is not UTF-8".into()))?;
            let mut raw = vec![0u8; 16 * nx * rows];
            r.read_exact(&mut raw)?;
            let mut f = Field::zeros(nx, rows);
            for (z, chunk) in f.as_mut_slice().iter_mut().zip(raw.chunks_exact(16)) {
                let re = f64::from_le_bytes(chunk[..8].try_into().unwrap());
                let im = f64::from_le_bytes(chunk[8..].try_into().unwrap());
                *z = C64::new(re, im);
            }
            fields.push((name, f));
        }
        Ok(Self { t, lx, eps, fields })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let mut w = std::io::BufWriter::new(std::fs::File::create(path)?);
        self.write_to(&mut w)?;
        w.flush()?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        if !path.exists() {
            return Err(Error::MissingFile(path.to_path_buf()));
        }
        Self::read_from(&mut std::io::BufReader::new(std::fs::File::open(path)?))
    }
}

fn read_u32(r: &mut impl Read) -> Result<u32> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b)?;
    Ok(u32::from_le_bytes(b))
}

fn read_f64(r: &mut impl Read) -> Result<f64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(f64::from_le_bytes(b))
}
