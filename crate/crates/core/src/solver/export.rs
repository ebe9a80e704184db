use std::fs::File;
use std::io::{self, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use super::grid::{GridFunction, GridSpec};
use crate::hgroup::Point;

/// Paths written by [`write_grid`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExportedGrid {
    pub data: PathBuf,
    pub sidecar: PathBuf,
}

/// `stem` with `ext` appended; unlike `with_extension`, keeps dots in the stem.
fn suffixed(stem: &Path, ext: &str) -> PathBuf {
    let mut s = stem.as_os_str().to_owned();
    s.push(ext);
    PathBuf::from(s)
}

/// Writes all node values as little-endian `f64`, `x` fastest, to
/// `<stem>.bin`, plus a `key=value` sidecar `<stem>.meta` describing the grid.
pub fn write_grid(g: &GridFunction, stem: &Path) -> io::Result<ExportedGrid> {
    let (data, sidecar) = (suffixed(stem, ".bin"), suffixed(stem, ".meta"));
    let mut out = BufWriter::new(File::create(&data)?);
    for v in &g.values {
        out.write_all(&v.to_le_bytes())?;
    }
    out.flush()?;
    let s = &g.spec;
    let o = s.origin();
    let dims = s.dims();
    let meta = format!(
        "nx={}\nny={}\nnz={}\nx0={:e}\ny0={:e}\nz0={:e}\ndx={:e}\ndy={:e}\ndz={:e}\nhalo_x={}\nhalo_y={}\nhalo_z={}\nlo={:e},{:e},{:e}\nhi={:e},{:e},{:e}\ntime={:e}\nlayout=f64-le-x-fastest\n",
        dims[0], dims[1], dims[2], o.x, o.y, o.z, s.dx, s.dx, s.dz, s.halo[0], s.halo[1], s.halo[2],
        s.lo.x, s.lo.y, s.lo.z, s.hi.x, s.hi.y, s.hi.z, g.time
    );
    std::fs::write(&sidecar, meta)?;
    Ok(ExportedGrid { data, sidecar })
}

/// Reads back a grid written by [`write_grid`]; the boundary source is not stored.
pub fn read_grid(stem: &Path) -> io::Result<GridFunction> {
    let meta = std::fs::read_to_string(suffixed(stem, ".meta"))?;
    let get = |key: &str| -> io::Result<&str> {
        meta.lines()
            .find_map(|l| l.strip_prefix(key).and_then(|r| r.strip_prefix('=')))
            .ok_or_else(|| io::Error::new(io::ErrorKind::InvalidData, format!("missing {key}")))
    };
    let bad = |e: &dyn std::fmt::Display| io::Error::new(io::ErrorKind::InvalidData, e.to_string());
    let num = |key: &str| -> io::Result<f64> { get(key)?.parse::<f64>().map_err(|e| bad(&e)) };
    let int = |key: &str| -> io::Result<usize> { get(key)?.parse::<usize>().map_err(|e| bad(&e)) };
    let triple = |key: &str| -> io::Result<Point> {
        let v: Vec<f64> = get(key)?.split(',').map(str::parse).collect::<Result<_, _>>().map_err(|e| bad(&e))?;
        match v[..] {
            [x, y, z] => Ok(Point::new(x, y, z)),
            _ => Err(bad(&format!("{key} needs three components"))),
        }
    };
    let halo = [int("halo_x")?, int("halo_y")?, int("halo_z")?];
    let dims = [int("nx")?, int("ny")?, int("nz")?];
    let spec = GridSpec {
        lo: triple("lo")?,
        hi: triple("hi")?,
        dx: num("dx")?,
        dz: num("dz")?,
        cells: [dims[0] - 1 - 2 * halo[0], dims[1] - 1 - 2 * halo[1], dims[2] - 1 - 2 * halo[2]],
        halo,
    };
    let mut bytes = Vec::new();
    File::open(suffixed(stem, ".bin"))?.read_to_end(&mut bytes)?;
    if bytes.len() != 8 * spec.len() {
        return Err(bad(&"data length does not match the sidecar"));
    }
    let values = bytes.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().expect("chunk of 8"))).collect();
    Ok(GridFunction { spec, values, time: num("time")?, boundary_source: None })
}

/// Writes the interior nodes of the `z`-layer closest to `z` as `x,y,z,value` rows.
pub fn write_slice_csv<W: Write>(g: &GridFunction, z: f64, mut out: W) -> io::Result<()> {
    let s = &g.spec;
    let k = (((z - s.lo.z) / s.dz).round().clamp(0.0, s.cells[2] as f64) as usize) + s.halo[2];
    writeln!(out, "x,y,z,value")?;
    for j in s.halo[1]..=s.halo[1] + s.cells[1] {
        for i in s.halo[0]..=s.halo[0] + s.cells[0] {
            let idx = s.index(i, j, k);
            let p = s.node(idx);
            writeln!(out, "{},{},{},{}", p.x, p.y, p.z, g.values[idx])?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hcalc::FnField;

    #[test]
    fn binary_and_sidecar_read_back() {
        let spec = GridSpec::new(Point::new(-0.5, -0.5, -0.25), Point::new(0.5, 0.5, 0.25), 0.25, 0.25).unwrap();
        let g = GridFunction::sample(spec, &FnField::stationary(|p| p.x - 2.0 * p.y + p.z * p.z), 0.0);
        let dir = tempfile::tempdir().unwrap();
        let files = write_grid(&g, &dir.path().join("snap-t0.5")).unwrap();
        assert_eq!(files.data, dir.path().join("snap-t0.5.bin"));
        assert_eq!(std::fs::metadata(&files.data).unwrap().len(), 8 * spec.len() as u64);
        let back = read_grid(&dir.path().join("snap-t0.5")).unwrap();
        assert_eq!(back.spec.dims(), spec.dims());
        assert_eq!(back.values, g.values);
    }

    #[test]
    fn slice_has_one_row_per_interior_column() {
        let spec = GridSpec::new(Point::new(-0.5, -0.5, -0.25), Point::new(0.5, 0.5, 0.25), 0.25, 0.25).unwrap();
        let g = GridFunction::sample(spec, &FnField::stationary(|p| p.z), 0.0);
        let mut buf = Vec::new();
        write_slice_csv(&g, 0.0, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let rows: Vec<&str> = text.lines().collect();
        assert_eq!(rows.len(), 1 + 25);
        assert!(rows[1..].iter().all(|r| r.ends_with(",0")));
    }
}
