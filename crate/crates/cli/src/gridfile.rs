//! Bit-stable grid output: a little-endian binary container that round-trips
//! losslessly, and a CSV form with explicit axis columns so any external
//! plotter can reproduce the figures without tool-specific code.

use std::io::{self, Read, Write};
use std::path::Path;

use osg_core::grid::GridMeta;
use osg_core::MomentumGrid;

const MAGIC: &[u8; 8] = b"OSGGRID\0";
const FORMAT_VERSION: u32 = 1;

fn write_u32(w: &mut impl Write, v: u32) -> io::Result<()> {
    w.write_all(&v.to_le_bytes())
}

fn write_f64(w: &mut impl Write, v: f64) -> io::Result<()> {
    w.write_all(&v.to_le_bytes())
}

fn write_str(w: &mut impl Write, s: &str) -> io::Result<()> {
    write_u32(w, s.len() as u32)?;
    w.write_all(s.as_bytes())
}

fn read_u32(r: &mut impl Read) -> io::Result<u32> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b)?;
    Ok(u32::from_le_bytes(b))
}

fn read_f64(r: &mut impl Read) -> io::Result<f64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(f64::from_le_bytes(b))
}

fn read_str(r: &mut impl Read) -> io::Result<String> {
    let len = read_u32(r)? as usize;
    if len > 1 << 20 {
        return Err(io::Error::new(io::ErrorKind::InvalidData, "string too long"));
    }
    let mut buf = vec![0u8; len];
    r.read_exact(&mut buf)?;
    String::from_utf8(buf).map_err(|e| io::Error::new(io::ErrorKind::InvalidData, e))
}

/// Header: magic, format version, shape, params echo, captured weight,
/// integral, tool version, descriptors. Payload: both axes then row-major
/// 64-bit values (radial index outermost).
pub fn write_binary(path: &Path, grid: &MomentumGrid) -> io::Result<()> {
    let mut w = io::BufWriter::new(std::fs::File::create(path)?);
    w.write_all(MAGIC)?;
    write_u32(&mut w, FORMAT_VERSION)?;
    write_u32(&mut w, grid.p.len() as u32)?;
    write_u32(&mut w, grid.phi.len() as u32)?;
    write_u32(&mut w, grid.meta.n_total_max as u32)?;
    write_f64(&mut w, grid.meta.lambda)?;
    write_f64(&mut w, grid.meta.k_delta_r)?;
    write_f64(&mut w, grid.meta.eps_trunc)?;
    write_f64(&mut w, grid.meta.captured_weight)?;
    write_f64(&mut w, grid.meta.integral)?;
    write_str(&mut w, env!("CARGO_PKG_VERSION"))?;
    write_str(&mut w, &grid.meta.field_desc)?;
    write_str(&mut w, &grid.meta.atom_desc)?;
    for &p in &grid.p {
        write_f64(&mut w, p)?;
    }
    for &phi in &grid.phi {
        write_f64(&mut w, phi)?;
    }
    for &v in &grid.w {
        write_f64(&mut w, v)?;
    }
    w.flush()
}

pub fn read_binary(path: &Path) -> io::Result<MomentumGrid> {
    let mut r = io::BufReader::new(std::fs::File::open(path)?);
    let mut magic = [0u8; 8];
    r.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(io::Error::new(io::ErrorKind::InvalidData, "bad magic"));
    }
    let version = read_u32(&mut r)?;
    if version != FORMAT_VERSION {
        return Err(io::Error::new(
            io::ErrorKind::InvalidData,
            format!("unsupported grid format version {version}"),
        ));
    }
    let n_p = read_u32(&mut r)? as usize;
    let n_phi = read_u32(&mut r)? as usize;
    let n_total_max = read_u32(&mut r)? as usize;
    let lambda = read_f64(&mut r)?;
    let k_delta_r = read_f64(&mut r)?;
    let eps_trunc = read_f64(&mut r)?;
    let captured_weight = read_f64(&mut r)?;
    let integral = read_f64(&mut r)?;
    let _tool_version = read_str(&mut r)?;
    let field_desc = read_str(&mut r)?;
    let atom_desc = read_str(&mut r)?;
    let mut p = Vec::with_capacity(n_p);
    for _ in 0..n_p {
        p.push(read_f64(&mut r)?);
    }
    let mut phi = Vec::with_capacity(n_phi);
    for _ in 0..n_phi {
        phi.push(read_f64(&mut r)?);
    }
    let mut w = Vec::with_capacity(n_p * n_phi);
    for _ in 0..n_p * n_phi {
        w.push(read_f64(&mut r)?);
    }
    Ok(MomentumGrid {
        p,
        phi,
        w,
        meta: GridMeta {
            lambda,
            k_delta_r,
            eps_trunc,
            n_total_max,
            captured_weight,
            integral,
            field_desc,
            atom_desc,
        },
    })
}

/// CSV with explicit axis columns; the shortest-round-trip float formatting
/// reproduces every value exactly on parse.
pub fn write_csv(path: &Path, grid: &MomentumGrid) -> io::Result<()> {
    let mut w = io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(
        w,
        "# lambda={}, k_delta_r={}, eps_trunc={}, n_total_max={}, captured_weight={}, integral={}",
        grid.meta.lambda,
        grid.meta.k_delta_r,
        grid.meta.eps_trunc,
        grid.meta.n_total_max,
        grid.meta.captured_weight,
        grid.meta.integral
    )?;
    writeln!(w, "p,phi,w")?;
    for (i, &p) in grid.p.iter().enumerate() {
        for (j, &phi) in grid.phi.iter().enumerate() {
            writeln!(w, "{p},{phi},{}", grid.value(i, j))?;
        }
    }
    w.flush()
}

#[cfg(test)]
mod tests {
    use super::*;
    use osg_core::GridSpec;

    fn sample_grid() -> MomentumGrid {
        let spec = GridSpec::with_p_max(7, 5, 3.0);
        let (p, phi) = spec.axes(3.0);
        let w = (0..35)
            .map(|k| (k as f64 * 0.173).sin().abs() * 1e-3 + 1e-17 * k as f64)
            .collect();
        MomentumGrid {
            p,
            phi,
            w,
            meta: GridMeta {
                lambda: 4.0,
                k_delta_r: 0.6283185307179586,
                eps_trunc: 1e-6,
                n_total_max: 12,
                captured_weight: 0.999_999_3,
                integral: 0.998_7,
                field_desc: "a: coherent".into(),
                atom_desc: "kappa = pi/2".into(),
            },
        }
    }

    #[test]
    fn binary_round_trips_bit_exactly() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("grid.osg");
        let grid = sample_grid();
        write_binary(&path, &grid).unwrap();
        let back = read_binary(&path).unwrap();
        assert_eq!(grid.p, back.p);
        assert_eq!(grid.phi, back.phi);
        assert_eq!(grid.w, back.w);
        assert_eq!(grid.meta, back.meta);
        // Bytes are stable across repeated writes.
        let path2 = dir.path().join("grid2.osg");
        write_binary(&path2, &back).unwrap();
        assert_eq!(
            std::fs::read(&path).unwrap(),
            std::fs::read(&path2).unwrap()
        );
    }

    #[test]
    fn csv_matches_binary_exactly() {
        let dir = tempfile::tempdir().unwrap();
        let bin = dir.path().join("grid.osg");
        let csv = dir.path().join("grid.csv");
        let grid = sample_grid();
        write_binary(&bin, &grid).unwrap();
        write_csv(&csv, &grid).unwrap();
        let back = read_binary(&bin).unwrap();
        let text = std::fs::read_to_string(&csv).unwrap();
        let mut k = 0usize;
        for line in text.lines().skip(2) {
            let mut parts = line.split(',');
            let p: f64 = parts.next().unwrap().parse().unwrap();
            let phi: f64 = parts.next().unwrap().parse().unwrap();
            let v: f64 = parts.next().unwrap().parse().unwrap();
            let (i, j) = (k / grid.phi.len(), k % grid.phi.len());
            assert_eq!(p, back.p[i]);
            assert_eq!(phi, back.phi[j]);
            assert_eq!(v, back.value(i, j));
            k += 1;
        }
        assert_eq!(k, grid.w.len());
    }
}
