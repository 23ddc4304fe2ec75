//! Flat-file output: number formatting, CSV assembly, atomic writes.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use chatter_core::{ComparisonRow64, TimeSeries64};
use tempfile::NamedTempFile;

/// Shortest representation that parses back to the same `f64`.
pub fn num(x: f64) -> String {
    x.to_string()
}

/// Writes `contents` to `dir/name` via a temporary file in `dir` and a rename.
pub fn write_atomic(dir: &Path, name: &str, contents: &[u8]) -> std::io::Result<PathBuf> {
    let path = dir.join(name);
    let mut tmp = NamedTempFile::new_in(dir)?;
    tmp.write_all(contents)?;
    tmp.as_file().sync_all()?;
    tmp.persist(&path).map_err(|e| e.error)?;
    Ok(path)
}

/// `t,x,sigma,u_a[,z]`.
pub fn timeseries_csv(ts: &TimeSeries64) -> String {
    let mut out = String::with_capacity(ts.len() * 96);
    out.push_str(if ts.z.is_some() {
        "t,x,sigma,u_a,z\n"
    } else {
        "t,x,sigma,u_a\n"
    });
    for i in 0..ts.len() {
        let _ = write!(
            out,
            "{},{},{},{}",
            num(ts.t[i]),
            num(ts.x[i]),
            num(ts.sigma[i]),
            num(ts.u_a[i])
        );
        if let Some(z) = &ts.z {
            let _ = write!(out, ",{}", num(z[i]));
        }
        out.push('\n');
    }
    out
}

pub const TABLE_HEADER: &str =
    "label,sigma_hb,sigma_sim,x_hb,x_sim,omega_hb,omega_sim,sigma_rel_err,x_rel_err,omega_rel_err\n";

/// Aggregate comparison table, one row per scenario in the given order.
pub fn table_csv(rows: &[ComparisonRow64]) -> String {
    let mut out = String::from(TABLE_HEADER);
    for r in rows {
        let vals = [
            r.sigma_hb,
            r.sigma_sim,
            r.x_hb,
            r.x_sim,
            r.omega_hb,
            r.omega_sim,
            r.sigma_rel_err,
            r.x_rel_err,
            r.omega_rel_err,
        ];
        out.push_str(&r.label);
        for v in vals {
            out.push(',');
            out.push_str(&num(v));
        }
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers_round_trip() {
        for x in [
            0.1,
            1.0 / 3.0,
            2.0 / std::f64::consts::PI * 0.01,
            -1e-300,
            6.02e23,
            0.0,
        ] {
            assert_eq!(num(x).parse::<f64>().unwrap(), x);
        }
        assert_eq!(num(0.05), "0.05");
    }

    #[test]
    fn atomic_write_replaces_contents() {
        let dir = tempfile::tempdir().unwrap();
        let p = write_atomic(dir.path(), "a.csv", b"one").unwrap();
        write_atomic(dir.path(), "a.csv", b"two").unwrap();
        assert_eq!(std::fs::read(&p).unwrap(), b"two");
        assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 1);
    }

    #[test]
    fn timeseries_columns_follow_manifold_kind() {
        let ts = TimeSeries64::from_samples(vec![0.0, 0.5], vec![1.0, -1.0]);
        assert_eq!(timeseries_csv(&ts), "t,x,sigma,u_a\n0,1,1,0\n0.5,-1,-1,0\n");
    }
}
