use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use byteorder::{LittleEndian, ReadBytesExt, WriteBytesExt};

use super::{DecouplingField, FieldKind, FieldProblem, PathEnsemble};
use crate::numerics::{Axis, SpaceGrid, TimeGrid};
use crate::{Error, Result};

const MAGIC: &[u8; 8] = b"MFSFIELD";
const VERSION: u32 = 1;

/// Binary layout, little endian throughout:
/// magic, version `u32`, dim `u32`, per axis `lo, hi: f64` and nodes `u64`,
/// `t0, T: f64`, stored levels `u64`, kind `u8` (0 players, 1 common noise, 2 limit)
/// with its parameter `f64`, diffusion and reminder weight `f64`, model
/// name (`u32` length + UTF-8), then the values level by level.
pub fn write_field<W: Write>(field: &DecouplingField, mut w: W) -> Result<()> {
    w.write_all(MAGIC)?;
    w.write_u32::<LittleEndian>(VERSION)?;
    w.write_u32::<LittleEndian>(field.dim() as u32)?;
    for a in field.grid.axes() {
        w.write_f64::<LittleEndian>(a.lo())?;
        w.write_f64::<LittleEndian>(a.hi())?;
        w.write_u64::<LittleEndian>(a.nodes() as u64)?;
    }
    w.write_f64::<LittleEndian>(field.times.t0())?;
    w.write_f64::<LittleEndian>(field.times.t1())?;
    w.write_u64::<LittleEndian>(field.times.steps() as u64)?;
    let (tag, param) = match field.problem.kind {
        FieldKind::Players(n) => (0u8, n as f64),
        FieldKind::CommonNoise(e) => (1u8, e),
        FieldKind::Limit => (2u8, 0.0),
    };
    w.write_u8(tag)?;
    w.write_f64::<LittleEndian>(param)?;
    w.write_f64::<LittleEndian>(field.problem.diffusion)?;
    w.write_f64::<LittleEndian>(field.problem.reminder_weight)?;
    let name = field.model.as_bytes();
    w.write_u32::<LittleEndian>(name.len() as u32)?;
    w.write_all(name)?;
    for level in &field.values {
        for v in level {
            w.write_f64::<LittleEndian>(*v)?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn read_field<R: Read>(mut r: R) -> Result<DecouplingField> {
    let mut magic = [0u8; 8];
    r.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(Error::Format("not a field file".into()));
    }
    let version = r.read_u32::<LittleEndian>()?;
    if version != VERSION {
        return Err(Error::Format(format!("unsupported version {version}")));
    }
    let dim = r.read_u32::<LittleEndian>()? as usize;
    if !(1..=2).contains(&dim) {
        return Err(Error::Format(format!("bad dimension {dim}")));
    }
    let mut axes = Vec::with_capacity(dim);
    for _ in 0..dim {
        let lo = r.read_f64::<LittleEndian>()?;
        let hi = r.read_f64::<LittleEndian>()?;
        let nodes = r.read_u64::<LittleEndian>()? as usize;
        axes.push(Axis::new(lo, hi, nodes).map_err(|e| Error::Format(e.to_string()))?);
    }
    let grid = SpaceGrid::new(axes)?;
    let t0 = r.read_f64::<LittleEndian>()?;
    let t1 = r.read_f64::<LittleEndian>()?;
    let steps = r.read_u64::<LittleEndian>()? as usize;
    let times = TimeGrid::new(t0, t1, steps).map_err(|e| Error::Format(e.to_string()))?;
    let tag = r.read_u8()?;
    let param = r.read_f64::<LittleEndian>()?;
    let kind = match tag {
        0 => FieldKind::Players(param as usize),
        1 => FieldKind::CommonNoise(param),
        2 => FieldKind::Limit,
        t => return Err(Error::Format(format!("unknown field kind {t}"))),
    };
    let diffusion = r.read_f64::<LittleEndian>()?;
    let reminder_weight = r.read_f64::<LittleEndian>()?;
    let len = r.read_u32::<LittleEndian>()? as usize;
    let mut name = vec![0u8; len];
    r.read_exact(&mut name)?;
    let model = String::from_utf8(name).map_err(|_| Error::Format("model name is not UTF-8".into()))?;
    let per_level = grid.len() * dim;
    let mut values = Vec::with_capacity(steps + 1);
    for _ in 0..=steps {
        let mut level = vec![0.0; per_level];
        r.read_f64_into::<LittleEndian>(&mut level)?;
        values.push(level);
    }
    let mut rest = [0u8; 1];
    if r.read(&mut rest)? != 0 {
        return Err(Error::Format("trailing bytes after field data".into()));
    }
    Ok(DecouplingField {
        grid,
        times,
        values,
        problem: FieldProblem { kind, diffusion, reminder_weight },
        model,
    })
}

pub fn save_field(field: &DecouplingField, path: &Path) -> Result<()> {
    write_field(field, BufWriter::new(File::create(path)?))
}

pub fn load_field(path: &Path) -> Result<DecouplingField> {
    read_field(BufReader::new(File::open(path)?))
}

/// CSV of `u(t, ·)` at every grid node: columns `m…, u…`.
pub fn write_field_slice<W: Write>(field: &DecouplingField, t: f64, mut w: W) -> Result<()> {
    let d = field.dim();
    let axes = ["m1", "m2"];
    let vals = ["u1", "u2"];
    writeln!(w, "{},{}", axes[..d].join(","), vals[..d].join(","))?;
    let mut out = vec![0.0; d];
    for p in 0..field.grid.len() {
        let x = field.grid.point(p);
        field.eval(t, &x, &mut out);
        let row: Vec<String> = x.iter().chain(&out).map(|v| format!("{v:.12e}")).collect();
        writeln!(w, "{}", row.join(","))?;
    }
    w.flush()?;
    Ok(())
}

/// Long-format CSV: `path, t, m…, eta…`, one row per recorded time.
pub fn write_ensemble<W: Write>(ensemble: &PathEnsemble, mut w: W) -> Result<()> {
    let d = ensemble.dim;
    let mut header = vec!["path".to_string(), "t".to_string()];
    header.extend((1..=d).map(|k| format!("m{k}")));
    header.extend((1..=d).map(|k| format!("eta{k}")));
    writeln!(w, "{}", header.join(","))?;
    for (i, path) in ensemble.paths.iter().enumerate() {
        for (k, t) in ensemble.times.iter().enumerate() {
            let mut row = vec![i.to_string(), format!("{t:.9}")];
            row.extend(path.m[k * d..(k + 1) * d].iter().map(|v| format!("{v:.12e}")));
            row.extend(path.eta[k * d..(k + 1) * d].iter().map(|v| format!("{v:.12e}")));
            writeln!(w, "{}", row.join(","))?;
        }
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::meanfield::FieldSetup;
    use crate::potentials::{ModelFamily, ModelOptions};

    #[test]
    fn binary_round_trip_is_exact() {
        let spec = ModelFamily::LogCosh { kappa: 4.0 }.build(&ModelOptions::default()).unwrap();
        let setup = FieldSetup { half_width: Some(3.0), spacing: 0.1, ..Default::default() };
        let field = setup.solve(&spec, FieldProblem::players(&spec, 10).unwrap()).unwrap();
        let mut buf = Vec::new();
        write_field(&field, &mut buf).unwrap();
        let back = read_field(buf.as_slice()).unwrap();
        assert_eq!(back.values, field.values);
        assert_eq!(back.grid, field.grid);
        assert_eq!(back.times, field.times);
        assert_eq!(back.problem, field.problem);
        assert_eq!(back.model, field.model);

        buf.push(0);
        assert!(read_field(buf.as_slice()).is_err());
        assert!(read_field(&b"garbage!"[..]).is_err());
    }
}
