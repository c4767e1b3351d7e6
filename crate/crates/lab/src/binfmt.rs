//! Binary matrix files.
//!
//! Layout: magic `CRLB`, rows and cols as little-endian `u64`, one flag byte
//! (1 = row-major, 0 = column-major), then `rows·cols` pairs of little-endian
//! `f64` (re, im). The writer always emits column-major.

use std::io::{Read, Write};

use coarse_core::{CMatrix, C64};

pub const MAGIC: &[u8; 4] = b"CRLB";

#[derive(Debug, thiserror::Error)]
pub enum BinError {
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("bad magic {0:?}")]
    Magic([u8; 4]),
    #[error("bad layout flag {0}")]
    Flag(u8),
    #[error("matrix of {rows}x{cols} is too large")]
    TooLarge { rows: u64, cols: u64 },
}

pub fn write_matrix<W: Write>(mut w: W, m: &CMatrix) -> Result<(), BinError> {
    w.write_all(MAGIC)?;
    w.write_all(&(m.rows() as u64).to_le_bytes())?;
    w.write_all(&(m.cols() as u64).to_le_bytes())?;
    w.write_all(&[0u8])?;
    let mut buf = Vec::with_capacity(16 * m.rows() * m.cols());
    for j in 0..m.cols() {
        for i in 0..m.rows() {
            let z = m[(i, j)];
            buf.extend_from_slice(&z.re.to_le_bytes());
            buf.extend_from_slice(&z.im.to_le_bytes());
        }
    }
    w.write_all(&buf)?;
    Ok(())
}

fn read_u64<R: Read>(r: &mut R) -> Result<u64, BinError> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(u64::from_le_bytes(b))
}

pub fn read_matrix<R: Read>(mut r: R) -> Result<CMatrix, BinError> {
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(BinError::Magic(magic));
    }
    let (rows, cols) = (read_u64(&mut r)?, read_u64(&mut r)?);
    let mut flag = [0u8; 1];
    r.read_exact(&mut flag)?;
    let row_major = match flag[0] {
        0 => false,
        1 => true,
        f => return Err(BinError::Flag(f)),
    };
    let len = rows
        .checked_mul(cols)
        .and_then(|n| n.checked_mul(16))
        .filter(|&n| n <= isize::MAX as u64)
        .ok_or(BinError::TooLarge { rows, cols })?;
    let mut bytes = vec![0u8; len as usize];
    r.read_exact(&mut bytes)?;
    let (rows, cols) = (rows as usize, cols as usize);
    let value = |k: usize| {
        let re = f64::from_le_bytes(bytes[16 * k..16 * k + 8].try_into().unwrap());
        let im = f64::from_le_bytes(bytes[16 * k + 8..16 * k + 16].try_into().unwrap());
        C64::new(re, im)
    };
    Ok(CMatrix::from_fn(rows, cols, |i, j| if row_major { value(i * cols + j) } else { value(j * rows + i) }))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_and_header() {
        let m = CMatrix::from_fn(2, 3, |i, j| C64::new(i as f64, j as f64 + 0.5));
        let mut buf = Vec::new();
        write_matrix(&mut buf, &m).unwrap();
        assert_eq!(&buf[..4], b"CRLB");
        assert_eq!(buf[20], 0);
        assert_eq!(buf.len(), 21 + 16 * 6);
        assert_eq!(read_matrix(&buf[..]).unwrap(), m);
    }

    #[test]
    fn reads_row_major() {
        let mut buf = Vec::new();
        buf.extend_from_slice(b"CRLB");
        buf.extend_from_slice(&1u64.to_le_bytes());
        buf.extend_from_slice(&2u64.to_le_bytes());
        buf.push(1);
        for x in [1.0f64, 0.0, 2.0, -1.0] {
            buf.extend_from_slice(&x.to_le_bytes());
        }
        let m = read_matrix(&buf[..]).unwrap();
        assert_eq!(m[(0, 1)], C64::new(2.0, -1.0));
        buf[20] = 7;
        assert!(matches!(read_matrix(&buf[..]), Err(BinError::Flag(7))));
        assert!(matches!(read_matrix(&b"NOPE"[..]), Err(BinError::Magic(_))));
    }
}
