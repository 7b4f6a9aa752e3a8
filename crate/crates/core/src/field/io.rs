use std::io::{Read, Write};

use super::{Field, HalfSpaceGrid, ScalarField};
use crate::error::{LabError, Result};

pub const MAGIC: &[u8; 4] = b"MLF1";

/// Flat little-endian dump: magic, `n1, n2, n3` (u64), `h` (f64), component
/// count (u64), then each component's values with `x1` fastest.
pub fn write_field<F: Field, W: Write>(mut w: W, field: &F) -> Result<()> {
    let g = field.grid();
    let comps = field.components();
    w.write_all(MAGIC)?;
    for n in g.dims() {
        w.write_all(&(n as u64).to_le_bytes())?;
    }
    w.write_all(&g.h().to_le_bytes())?;
    w.write_all(&(comps.len() as u64).to_le_bytes())?;
    for c in comps {
        for v in c.values() {
            w.write_all(&v.to_le_bytes())?;
        }
    }
    Ok(())
}

fn read_u64<R: Read>(r: &mut R) -> Result<u64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b).map_err(|e| LabError::Format(format!("truncated header: {e}")))?;
    Ok(u64::from_le_bytes(b))
}

pub fn read_field<R: Read>(mut r: R) -> Result<(HalfSpaceGrid, Vec<ScalarField>)> {
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic).map_err(|e| LabError::Format(format!("missing magic: {e}")))?;
    if &magic != MAGIC {
        return Err(LabError::Format("bad magic".into()));
    }
    let n1 = read_u64(&mut r)? as usize;
    let n2 = read_u64(&mut r)? as usize;
    let n3 = read_u64(&mut r)? as usize;
    let h = f64::from_bits(read_u64(&mut r)?);
    let count = read_u64(&mut r)? as usize;
    let grid = HalfSpaceGrid::new(n1, n2, n3, h)?;
    if count == 0 || count > 9 {
        return Err(LabError::Format(format!("component count {count}")));
    }
    let mut comps = Vec::with_capacity(count);
    let mut buf = vec![0u8; grid.len() * 8];
    for _ in 0..count {
        r.read_exact(&mut buf).map_err(|e| LabError::Format(format!("truncated values: {e}")))?;
        let values = buf.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes"))).collect();
        comps.push(ScalarField::from_values(grid, values)?);
    }
    let mut rest = [0u8; 1];
    if r.read(&mut rest)? != 0 {
        return Err(LabError::Format("trailing bytes".into()));
    }
    Ok((grid, comps))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::VectorField3;

    #[test]
    fn header_layout() {
        let g = HalfSpaceGrid::new(2, 3, 4, 0.5).unwrap();
        let f = ScalarField::from_fn(g, |x| x[0] + x[2]);
        let mut bytes = Vec::new();
        write_field(&mut bytes, &f).unwrap();
        assert_eq!(&bytes[..4], b"MLF1");
        assert_eq!(u64::from_le_bytes(bytes[4..12].try_into().unwrap()), 2);
        assert_eq!(u64::from_le_bytes(bytes[20..28].try_into().unwrap()), 4);
        assert_eq!(f64::from_le_bytes(bytes[28..36].try_into().unwrap()), 0.5);
        assert_eq!(u64::from_le_bytes(bytes[36..44].try_into().unwrap()), 1);
        assert_eq!(bytes.len(), 44 + 24 * 8);
        // x1 fastest: second value is node (1, 0, 0)
        assert_eq!(f64::from_le_bytes(bytes[52..60].try_into().unwrap()), 0.5);
    }

    #[test]
    fn malformed_inputs() {
        assert!(read_field(&b"MLF2"[..]).is_err());
        let g = HalfSpaceGrid::new(2, 2, 4, 1.0).unwrap();
        let v = VectorField3::zeros(g);
        let mut bytes = Vec::new();
        write_field(&mut bytes, &v).unwrap();
        assert!(read_field(&bytes[..bytes.len() - 1]).is_err());
        bytes.push(0);
        assert!(read_field(&bytes[..]).is_err());
    }
}
