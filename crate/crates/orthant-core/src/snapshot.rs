//! Binary snapshot format for environment windows.
//!
//! Layout, all integers little-endian:
//!
//! ```text
//! magic   b"DRE1"
//! version u8 (currently 1)
//! model   u8 tag (0 orthant, 1 swe-n, 2 ud-lr, 3 ne-w, 4 custom)
//!         custom only: u16 entry count, then per entry
//!             u8  environment-set bits
//!             u32 length + UTF-8 "numerator/denominator"
//! p       u32 length + UTF-8 decimal string (as passed on realization)
//! seed    u64
//! region  xmin, xmax, ymin, ymax as i64
//! cells   4 bits per site, row-major from ymin, low nibble first,
//!         final byte zero-padded
//! ```
//!
//! Round-trips are bit-exact: write(read(bytes)) == bytes.

use crate::algebra::Rational;
use crate::env::{EnvSet, EnvironmentWindow, ModelDescriptor, Provenance};
use crate::geom::Region;
use std::io::{self, Read, Write};
use std::str::FromStr;
use thiserror::Error;

const MAGIC: &[u8; 4] = b"DRE1";
const VERSION: u8 = 1;

#[derive(Debug, Error)]
pub enum SnapshotError {
    #[error("i/o error: {0}")]
    Io(#[from] io::Error),
    #[error("bad magic; not a DRE1 snapshot")]
    BadMagic,
    #[error("unsupported snapshot version {0}")]
    BadVersion(u8),
    #[error("malformed snapshot: {0}")]
    Malformed(&'static str),
}

pub fn write_snapshot<W: Write>(w: &mut W, env: &EnvironmentWindow) -> Result<(), SnapshotError> {
    let prov = env.provenance();
    w.write_all(MAGIC)?;
    w.write_all(&[VERSION])?;
    match &prov.model {
        ModelDescriptor::Orthant => w.write_all(&[0])?,
        ModelDescriptor::SweN => w.write_all(&[1])?,
        ModelDescriptor::UdLr => w.write_all(&[2])?,
        ModelDescriptor::NeW => w.write_all(&[3])?,
        ModelDescriptor::Custom(support) => {
            w.write_all(&[4])?;
            let n = u16::try_from(support.len())
                .map_err(|_| SnapshotError::Malformed("support too large"))?;
            w.write_all(&n.to_le_bytes())?;
            for (set, prob) in support {
                w.write_all(&[set.bits()])?;
                write_string(w, &format!("{}/{}", prob.numer(), prob.denom()))?;
            }
        }
    }
    write_string(w, &prov.p_text)?;
    w.write_all(&prov.seed.to_le_bytes())?;
    let r = env.region();
    for v in [r.xmin, r.xmax, r.ymin, r.ymax] {
        w.write_all(&v.to_le_bytes())?;
    }
    w.write_all(env.packed_cells())?;
    Ok(())
}

pub fn read_snapshot<R: Read>(r: &mut R) -> Result<EnvironmentWindow, SnapshotError> {
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(SnapshotError::BadMagic);
    }
    let version = read_u8(r)?;
    if version != VERSION {
        return Err(SnapshotError::BadVersion(version));
    }
    let model = match read_u8(r)? {
        0 => ModelDescriptor::Orthant,
        1 => ModelDescriptor::SweN,
        2 => ModelDescriptor::UdLr,
        3 => ModelDescriptor::NeW,
        4 => {
            let mut nb = [0u8; 2];
            r.read_exact(&mut nb)?;
            let n = u16::from_le_bytes(nb);
            let mut support = Vec::with_capacity(n as usize);
            for _ in 0..n {
                let bits = read_u8(r)?;
                let set = EnvSet::from_bits(bits)
                    .ok_or(SnapshotError::Malformed("bad environment bits"))?;
                let text = read_string(r)?;
                let (num, den) = text
                    .split_once('/')
                    .ok_or(SnapshotError::Malformed("bad probability"))?;
                let prob = Rational::new(
                    num_bigint::BigInt::from_str(num)
                        .map_err(|_| SnapshotError::Malformed("bad numerator"))?,
                    num_bigint::BigInt::from_str(den)
                        .map_err(|_| SnapshotError::Malformed("bad denominator"))?,
                );
                support.push((set, prob));
            }
            ModelDescriptor::Custom(support)
        }
        _ => return Err(SnapshotError::Malformed("unknown model tag")),
    };
    let p_text = read_string(r)?;
    let mut seed_bytes = [0u8; 8];
    r.read_exact(&mut seed_bytes)?;
    let seed = u64::from_le_bytes(seed_bytes);
    let mut bounds = [0i64; 4];
    for b in &mut bounds {
        let mut buf = [0u8; 8];
        r.read_exact(&mut buf)?;
        *b = i64::from_le_bytes(buf);
    }
    if bounds[0] > bounds[1] || bounds[2] > bounds[3] {
        return Err(SnapshotError::Malformed("inverted region bounds"));
    }
    let region = Region::new(bounds[0], bounds[1], bounds[2], bounds[3]);
    let mut cells = vec![0u8; region.area().div_ceil(2)];
    r.read_exact(&mut cells)?;
    EnvironmentWindow::from_packed(
        region,
        cells,
        Provenance {
            model,
            p_text,
            seed,
        },
    )
    .ok_or(SnapshotError::Malformed("payload size mismatch"))
}

fn write_string<W: Write>(w: &mut W, s: &str) -> Result<(), SnapshotError> {
    let len = u32::try_from(s.len()).map_err(|_| SnapshotError::Malformed("string too long"))?;
    w.write_all(&len.to_le_bytes())?;
    w.write_all(s.as_bytes())?;
    Ok(())
}

fn read_string<R: Read>(r: &mut R) -> Result<String, SnapshotError> {
    let mut lb = [0u8; 4];
    r.read_exact(&mut lb)?;
    let len = u32::from_le_bytes(lb) as usize;
    if len > 1 << 20 {
        return Err(SnapshotError::Malformed("oversized string"));
    }
    let mut buf = vec![0u8; len];
    r.read_exact(&mut buf)?;
    String::from_utf8(buf).map_err(|_| SnapshotError::Malformed("invalid utf-8"))
}

fn read_u8<R: Read>(r: &mut R) -> Result<u8, SnapshotError> {
    let mut b = [0u8; 1];
    r.read_exact(&mut b)?;
    Ok(b[0])
}
