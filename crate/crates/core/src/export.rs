//! CSV writers for profiles, weights, densities and labels.
//!
//! Every file may start with one `# ...` comment line; [`crate::load_csv`]
//! skips such lines.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::discrepancy::LdProfile;
use crate::error::{Error, Result};
use crate::weighting::{DensityEstimate, WeightTable};

fn write_lines<F>(path: &Path, comment: Option<&str>, body: F) -> Result<()>
where
    F: FnOnce(&mut BufWriter<File>) -> std::io::Result<()>,
{
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = BufWriter::new(file);
    let result = (|| {
        if let Some(c) = comment {
            writeln!(out, "# {c}")?;
        }
        body(&mut out)?;
        out.flush()
    })();
    result.map_err(|e| Error::io(path, e))
}

/// Columns `t,dim,ld`.
pub fn write_profile_csv(profile: &LdProfile, path: impl AsRef<Path>, comment: Option<&str>) -> Result<()> {
    write_lines(path.as_ref(), comment, |out| {
        writeln!(out, "t,dim,ld")?;
        for (i, &t) in profile.t_values().iter().enumerate() {
            for (j, v) in profile.row(i).iter().enumerate() {
                writeln!(out, "{t},{j},{v:?}")?;
            }
        }
        Ok(())
    })
}

/// Columns `t,dim,ld,weight`. The table and profile must share rows and columns.
pub fn write_weights_csv(
    profile: &LdProfile,
    weights: &WeightTable,
    path: impl AsRef<Path>,
    comment: Option<&str>,
) -> Result<()> {
    if profile.t_values() != weights.t_values() || profile.dims() != weights.dims() {
        return Err(Error::Misaligned("weight table does not match the LD profile".into()));
    }
    write_lines(path.as_ref(), comment, |out| {
        writeln!(out, "t,dim,ld,weight")?;
        for (i, &t) in profile.t_values().iter().enumerate() {
            for j in 0..profile.dims() {
                writeln!(out, "{t},{j},{:?},{:?}", profile.get(i, j), weights.get(i, j))?;
            }
        }
        Ok(())
    })
}

/// Columns `bin_left,bin_right,count,density`.
pub fn write_density_csv(density: &DensityEstimate, path: impl AsRef<Path>, comment: Option<&str>) -> Result<()> {
    write_lines(path.as_ref(), comment, |out| {
        writeln!(out, "bin_left,bin_right,count,density")?;
        let edges = density.edges();
        for (b, (&count, d)) in density.counts().iter().zip(density.density()).enumerate() {
            writeln!(out, "{:?},{:?},{count},{d:?}", edges[b], edges[b + 1])?;
        }
        Ok(())
    })
}

/// One 0/1 column headed `abrupt`, one row per series row.
pub fn write_mask_csv(mask: &[bool], path: impl AsRef<Path>, comment: Option<&str>) -> Result<()> {
    write_lines(path.as_ref(), comment, |out| {
        writeln!(out, "abrupt")?;
        for &m in mask {
            writeln!(out, "{}", u8::from(m))?;
        }
        Ok(())
    })
}

/// Reads a mask written by [`write_mask_csv`] (any non-zero value is abrupt).
pub fn read_mask_csv(path: impl AsRef<Path>) -> Result<Vec<bool>> {
    let series = crate::series::load_csv(path.as_ref(), true)?;
    if series.dims() != 1 {
        return Err(Error::Csv {
            path: path.as_ref().to_path_buf(),
            message: format!("mask file must have one column, found {}", series.dims()),
        });
    }
    Ok(series.values().iter().map(|&v| v != 0.0).collect())
}
