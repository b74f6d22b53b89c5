//! .vxg grid files: one-line JSON header, newline, then the occupancy bitmap
//! packed row-major with axis 0 fastest, least-significant bit first.

use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{GridSpec, VoxelDomain};

#[derive(Serialize, Deserialize)]
struct Header {
    dim: usize,
    shape: [usize; 3],
    spacing: f64,
    origin: [f64; 3],
    open_faces: [[bool; 2]; 3],
}

pub fn write_vxg(domain: &VoxelDomain, path: &Path) -> Result<()> {
    let header = Header {
        dim: domain.spec.dim,
        shape: domain.spec.shape,
        spacing: domain.spec.spacing,
        origin: domain.spec.origin,
        open_faces: domain.open_faces,
    };
    let mut buf = serde_json::to_vec(&header)?;
    buf.push(b'\n');
    let mut byte = 0u8;
    for (i, &o) in domain.occ.iter().enumerate() {
        if o {
            byte |= 1 << (i % 8);
        }
        if i % 8 == 7 {
            buf.push(byte);
            byte = 0;
        }
    }
    if domain.occ.len() % 8 != 0 {
        buf.push(byte);
    }
    let mut f = std::fs::File::create(path)?;
    f.write_all(&buf)?;
    Ok(())
}

pub fn read_vxg(path: &Path) -> Result<VoxelDomain> {
    let mut data = Vec::new();
    std::fs::File::open(path)?.read_to_end(&mut data)?;
    let nl = data
        .iter()
        .position(|&b| b == b'\n')
        .ok_or_else(|| Error::Parse("missing header newline in .vxg file".into()))?;
    let header: Header = serde_json::from_slice(&data[..nl])?;
    let spec = GridSpec::new(header.dim, header.shape, header.spacing, header.origin)?;
    let n = spec.cell_count();
    let payload = &data[nl + 1..];
    if payload.len() != (n + 7) / 8 {
        return Err(Error::Parse(format!(
            "payload length {} does not match {} cells",
            payload.len(),
            n
        )));
    }
    let occ = (0..n).map(|i| payload[i / 8] >> (i % 8) & 1 == 1).collect();
    Ok(VoxelDomain { spec, occ, open_faces: header.open_faces })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::dist;

    #[test]
    fn roundtrip() {
        let spec = GridSpec::new(3, [11, 9, 7], 0.125, [-1.0, 0.5, 2.0]).unwrap();
        let mut d = VoxelDomain::empty(spec.clone());
        d.open_faces[0][1] = true;
        d.open_faces[2][0] = true;
        for c in spec.cells() {
            if dist(spec.center(c), [0.0, 1.0, 2.5]) < 0.9 {
                d.set(c, true);
            }
        }
        let tmp = tempfile::tempdir().unwrap();
        let path = tmp.path().join("grid.vxg");
        write_vxg(&d, &path).unwrap();
        let back = read_vxg(&path).unwrap();
        assert_eq!(back, d);
    }

    #[test]
    fn bit_order_lsb_first() {
        let spec = GridSpec::new(2, [8, 1, 1], 1.0, [0.0; 3]).unwrap();
        let mut d = VoxelDomain::empty(spec);
        d.set([0, 0, 0], true);
        d.set([3, 0, 0], true);
        let tmp = tempfile::tempdir().unwrap();
        let path = tmp.path().join("bits.vxg");
        write_vxg(&d, &path).unwrap();
        let data = std::fs::read(&path).unwrap();
        assert_eq!(*data.last().unwrap(), 0b0000_1001);
    }

    #[test]
    fn truncated_payload_rejected() {
        let tmp = tempfile::tempdir().unwrap();
        let path = tmp.path().join("bad.vxg");
        std::fs::write(
            &path,
            b"{\"dim\":2,\"shape\":[8,8,1],\"spacing\":1.0,\"origin\":[0,0,0],\"open_faces\":[[false,false],[false,false],[false,false]]}\n\x00",
        )
        .unwrap();
        assert!(matches!(read_vxg(&path), Err(Error::Parse(_))));
    }
}
