//! File formats: moment-curve CSV, ensemble CSV and `FGEN1` binary, point
//! cloud CSV, correlation table CSV, and atomic output.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use flowgrowth_core::boxdim::PointCloud;
use flowgrowth_core::ibf::CorrelationTable;
use flowgrowth_core::sim::{EnsembleKind, ModelRef, PathEnsemble, SimConfig};
use flowgrowth_core::MomentCurve;
use serde_json::{Number, Value};

use crate::error::{CliError, CliResult};

pub const ENSEMBLE_MAGIC: &[u8; 8] = b"FGEN1\0\0\0";
pub const ENSEMBLE_VERSION: u32 = 1;

/// JSON number for finite values; `"inf"`, `"-inf"` or `"nan"` otherwise.
pub fn num(x: f64) -> Value {
    match Number::from_f64(x) {
        Some(n) => Value::Number(n),
        None if x.is_nan() => Value::String("nan".into()),
        None if x > 0.0 => Value::String("inf".into()),
        None => Value::String("-inf".into()),
    }
}

pub fn nums(xs: impl IntoIterator<Item = f64>) -> Value {
    Value::Array(xs.into_iter().map(num).collect())
}

/// Writes `bytes` to `path` through a temporary file in the same directory
/// and a rename, or to standard output when `path` is `None`.
pub fn write_output(path: Option<&Path>, bytes: &[u8]) -> CliResult<()> {
    let Some(path) = path else {
        let mut out = std::io::stdout().lock();
        return out
            .write_all(bytes)
            .and_then(|_| out.flush())
            .map_err(|e| CliError::io("<stdout>", e));
    };
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut builder = tempfile::Builder::new();
    #[cfg(unix)]
    {
        use std::os::unix::fs::PermissionsExt;
        builder.permissions(std::fs::Permissions::from_mode(0o644));
    }
    let mut tmp = builder.tempfile_in(dir).map_err(|e| CliError::io(dir, e))?;
    tmp.write_all(bytes)
        .and_then(|_| tmp.flush())
        .map_err(|e| CliError::io(tmp.path(), e))?;
    tmp.persist(path).map_err(|e| CliError::io(path, e.error))?;
    Ok(())
}

fn csv_error(path: &Path, e: csv::Error) -> CliError {
    CliError::validation("input", format!("{}: {e}", path.display()))
}

fn parse_f64(s: &str, field: &str, line: usize) -> CliResult<f64> {
    s.trim().parse::<f64>().map_err(|_| {
        CliError::validation(
            field.to_string(),
            format!("line {line}: {s:?} is not a number"),
        )
    })
}

/// Columns `t, log_value, value_if_representable`; the last is empty when
/// the value overflows `f64`.
pub fn curve_csv(curve: &MomentCurve) -> String {
    let mut out = String::from("t,log_value,value_if_representable\n");
    for (t, l) in curve.grid().iter().zip(curve.log_values()) {
        let v = l.exp();
        if v.is_finite() {
            out.push_str(&format!("{t},{l},{v}\n"));
        } else {
            out.push_str(&format!("{t},{l},\n"));
        }
    }
    out
}

pub fn read_curve_csv(path: &Path, label: &str) -> CliResult<MomentCurve> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_path(path)
        .map_err(|e| csv_error(path, e))?;
    let (mut grid, mut logs) = (Vec::new(), Vec::new());
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| csv_error(path, e))?;
        if rec.len() < 2 {
            return Err(CliError::validation(
                "h-csv",
                format!("line {}: expected t,log_value", i + 2),
            ));
        }
        grid.push(parse_f64(&rec[0], "t", i + 2)?);
        logs.push(parse_f64(&rec[1], "log_value", i + 2)?);
    }
    Ok(MomentCurve::new(grid, logs, label)?)
}

/// Columns `t, path_id, value`, path by path.
pub fn ensemble_csv(ens: &PathEnsemble) -> String {
    let mut out = String::with_capacity(ens.values().len() * 24 + 16);
    out.push_str("t,path_id,value\n");
    for (i, id) in ens.stream_ids().iter().enumerate() {
        for (t, v) in ens.times().iter().zip(ens.path(i)) {
            out.push_str(&format!("{t},{id},{v}\n"));
        }
    }
    out
}

fn model_json(m: &ModelRef) -> Vec<u8> {
    let params: serde_json::Map<String, Value> =
        m.params.iter().map(|(k, v)| (k.clone(), num(*v))).collect();
    let v = serde_json::json!({ "catalog_id": m.catalog_id, "params": params, "d": m.d });
    serde_json::to_vec(&v).unwrap_or_default()
}

/// `FGEN1` layout, little-endian throughout:
/// magic (8 bytes), version u32, kind u32 (0 = rho, 1 = log derivative norm),
/// seed u64, horizon f64, dt f64, r0 f64, n_paths u64, record_stride u64,
/// n_times u64, model JSON length u64 and bytes, times, stream ids, and the
/// path-major value matrix.
pub fn ensemble_bin(ens: &PathEnsemble) -> Vec<u8> {
    let cfg = ens.config();
    let model = model_json(ens.model_ref());
    let mut out = Vec::with_capacity(
        96 + model.len() + 8 * (ens.times().len() + ens.n_paths() + ens.values().len()),
    );
    out.extend_from_slice(ENSEMBLE_MAGIC);
    out.extend_from_slice(&ENSEMBLE_VERSION.to_le_bytes());
    let kind: u32 = match ens.kind() {
        EnsembleKind::Rho => 0,
        EnsembleKind::LogDerivativeNorm => 1,
    };
    out.extend_from_slice(&kind.to_le_bytes());
    out.extend_from_slice(&cfg.seed.to_le_bytes());
    for x in [cfg.horizon, cfg.dt, cfg.r0] {
        out.extend_from_slice(&x.to_le_bytes());
    }
    for n in [
        ens.n_paths() as u64,
        cfg.record_stride as u64,
        ens.times().len() as u64,
        model.len() as u64,
    ] {
        out.extend_from_slice(&n.to_le_bytes());
    }
    out.extend_from_slice(&model);
    for t in ens.times() {
        out.extend_from_slice(&t.to_le_bytes());
    }
    for id in ens.stream_ids() {
        out.extend_from_slice(&id.to_le_bytes());
    }
    for v in ens.values() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize) -> CliResult<&'a [u8]> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.bytes.len());
        let end = end.ok_or_else(|| CliError::validation("input", "truncated FGEN1 file"))?;
        let s = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u32(&mut self) -> CliResult<u32> {
        Ok(u32::from_le_bytes(
            self.take(4)?.try_into().unwrap_or_default(),
        ))
    }

    fn u64(&mut self) -> CliResult<u64> {
        Ok(u64::from_le_bytes(
            self.take(8)?.try_into().unwrap_or_default(),
        ))
    }

    fn f64(&mut self) -> CliResult<f64> {
        Ok(f64::from_le_bytes(
            self.take(8)?.try_into().unwrap_or_default(),
        ))
    }

    fn count(&mut self) -> CliResult<usize> {
        let n = self.u64()?;
        // every counted item is at least one byte
        if n > self.bytes.len() as u64 {
            return Err(CliError::validation(
                "input",
                "FGEN1 count exceeds file size",
            ));
        }
        Ok(n as usize)
    }
}

pub fn read_ensemble_bin(bytes: &[u8]) -> CliResult<PathEnsemble> {
    let mut c = Cursor { bytes, pos: 0 };
    if c.take(8)? != ENSEMBLE_MAGIC {
        return Err(CliError::validation("input", "not an FGEN1 file"));
    }
    let version = c.u32()?;
    if version != ENSEMBLE_VERSION {
        return Err(CliError::validation(
            "input",
            format!("unsupported FGEN1 version {version}"),
        ));
    }
    let kind = match c.u32()? {
        0 => EnsembleKind::Rho,
        1 => EnsembleKind::LogDerivativeNorm,
        k => {
            return Err(CliError::validation(
                "input",
                format!("unknown ensemble kind {k}"),
            ))
        }
    };
    let seed = c.u64()?;
    let (horizon, dt, r0) = (c.f64()?, c.f64()?, c.f64()?);
    let n_paths = c.count()?;
    let record_stride = c.count()?;
    let n_times = c.count()?;
    let model_len = c.count()?;
    let model: Value = serde_json::from_slice(c.take(model_len)?)
        .map_err(|e| CliError::validation("input", format!("FGEN1 model header: {e}")))?;
    let params: BTreeMap<String, f64> = model["params"]
        .as_object()
        .map(|m| {
            m.iter()
                .filter_map(|(k, v)| v.as_f64().map(|x| (k.clone(), x)))
                .collect()
        })
        .unwrap_or_default();
    let model_ref = ModelRef {
        catalog_id: model["catalog_id"].as_str().unwrap_or_default().to_string(),
        params,
        d: model["d"].as_u64().unwrap_or(0) as u32,
    };
    let times = (0..n_times)
        .map(|_| c.f64())
        .collect::<CliResult<Vec<_>>>()?;
    let ids = (0..n_paths)
        .map(|_| c.u64())
        .collect::<CliResult<Vec<_>>>()?;
    let mut rows = Vec::with_capacity(n_paths);
    for _ in 0..n_paths {
        rows.push(
            (0..n_times)
                .map(|_| c.f64())
                .collect::<CliResult<Vec<_>>>()?,
        );
    }
    if c.pos != bytes.len() {
        return Err(CliError::validation(
            "input",
            "trailing bytes after FGEN1 payload",
        ));
    }
    let config = SimConfig {
        horizon,
        dt,
        n_paths,
        seed,
        r0,
        record_stride,
    };
    Ok(PathEnsemble::new(
        kind, times, rows, ids, model_ref, config,
    )?)
}

/// One point per row, no header; every row must have the same width.
pub fn read_point_cloud_csv(path: &Path) -> CliResult<PointCloud> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| csv_error(path, e))?;
    let mut points: Vec<Vec<f64>> = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| csv_error(path, e))?;
        let p = rec
            .iter()
            .map(|s| parse_f64(s, "input", i + 1))
            .collect::<CliResult<Vec<_>>>()?;
        points.push(p);
    }
    let d = points.first().map_or(0, Vec::len);
    if d == 0 {
        return Err(CliError::validation(
            "input",
            format!("{}: no points", path.display()),
        ));
    }
    Ok(PointCloud::new(d, &points)?)
}

pub fn point_cloud_csv(pc: &PointCloud) -> String {
    let mut out = String::new();
    for p in pc.points() {
        let row: Vec<String> = p.iter().map(|x| x.to_string()).collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

/// Header `r,B_L,B_N` required.
pub fn read_table_csv(path: &Path) -> CliResult<CorrelationTable> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| csv_error(path, e))?;
    let header = rdr.headers().map_err(|e| csv_error(path, e))?.clone();
    if header.iter().collect::<Vec<_>>() != ["r", "B_L", "B_N"] {
        return Err(CliError::validation(
            "table",
            format!(
                "header must be r,B_L,B_N, got {}",
                header.iter().collect::<Vec<_>>().join(",")
            ),
        ));
    }
    let (mut r, mut bl, mut bn) = (Vec::new(), Vec::new(), Vec::new());
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| csv_error(path, e))?;
        r.push(parse_f64(&rec[0], "table", i + 2)?);
        bl.push(parse_f64(&rec[1], "table", i + 2)?);
        bn.push(parse_f64(&rec[2], "table", i + 2)?);
    }
    Ok(CorrelationTable::new(r, bl, bn)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use flowgrowth_core::ibf::IbfModel;
    use flowgrowth_core::sim::simulate_rho;

    #[test]
    fn binary_ensemble_round_trips() {
        let m = IbfModel::potential_gaussian(1.0, 2).unwrap();
        let cfg = SimConfig {
            horizon: 0.5,
            dt: 0.01,
            n_paths: 7,
            seed: 9,
            r0: 0.1,
            record_stride: 10,
        };
        let ens = simulate_rho(&m, &cfg).unwrap();
        let bytes = ensemble_bin(&ens);
        assert_eq!(&bytes[..5], b"FGEN1");
        assert_eq!(read_ensemble_bin(&bytes).unwrap(), ens);
        assert!(read_ensemble_bin(&bytes[..bytes.len() - 1]).is_err());
    }

    #[test]
    fn json_numbers_keep_non_finite_values() {
        assert_eq!(num(f64::NEG_INFINITY), Value::String("-inf".into()));
        assert_eq!(num(0.1).as_f64(), Some(0.1));
    }

    #[test]
    fn csv_values_round_trip_exactly() {
        let c = MomentCurve::new(
            vec![0.0, 0.5, 1.0],
            vec![f64::NEG_INFINITY, 0.1 + 0.2, 1e3],
            "x",
        )
        .unwrap();
        let text = curve_csv(&c);
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("c.csv");
        write_output(Some(&p), text.as_bytes()).unwrap();
        let back = read_curve_csv(&p, "x").unwrap();
        assert_eq!(back, c);
        assert!(text.lines().nth(3).unwrap().ends_with(','));
    }
}
