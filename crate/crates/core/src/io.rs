//! CSV and JSON artifacts.
//!
//! Tables are written with a header row, one record per sample, UTF-8 and LF
//! line endings. Floats are written in shortest round-trip form, so equal
//! inputs give byte-identical files.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::Serialize;

use crate::error::Result;
use crate::frames::{FrameField, TraceField};
use crate::geometry::{CVec3, SampledCurve, Vec3};
use crate::nls::ModulatedField;
use crate::oscillatory::SweepRow;
use crate::profile::ProfileSolution;
use crate::spectral::SpectrumScan;

fn writer<W: Write>(w: W) -> csv::Writer<W> {
    csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(w)
}

fn push_cvec(row: &mut Vec<f64>, v: &CVec3) {
    for z in v.iter() {
        row.push(z.re);
        row.push(z.im);
    }
}

fn push_vec(row: &mut Vec<f64>, v: &Vec3) {
    row.extend(v.iter().copied());
}

/// Numeric table with named columns, written as CSV or JSON.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

const FRAME_HEADER: [&str; 10] = [
    "x", "tx", "ty", "tz", "re_n1", "im_n1", "re_n2", "im_n2", "re_n3", "im_n3",
];

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Self {
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    /// Append a row; panics if its width differs from the header.
    pub fn push(&mut self, row: Vec<f64>) {
        assert_eq!(
            row.len(),
            self.columns.len(),
            "row width must match the header"
        );
        self.rows.push(row);
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Header row then one record per row.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = writer(w);
        out.write_record(&self.columns)?;
        for r in &self.rows {
            out.write_record(r.iter().map(|v| v.to_string()))?;
        }
        out.flush()?;
        Ok(())
    }

    /// `{"columns": [...], "rows": [[...], ...]}`; non-finite values become `null`.
    pub fn write_json<W: Write>(&self, w: W) -> Result<()> {
        write_json(w, self)
    }

    /// `s,x,y,z[,tx,ty,tz]`.
    pub fn curve(curve: &SampledCurve) -> Self {
        let mut header = vec!["s", "x", "y", "z"];
        if curve.tangents.is_some() {
            header.extend(["tx", "ty", "tz"]);
        }
        let mut t = Self::new(&header);
        for (k, p) in curve.points.iter().enumerate() {
            let mut row = vec![curve.s[k]];
            push_vec(&mut row, p);
            if let Some(tan) = &curve.tangents {
                push_vec(&mut row, &tan[k]);
            }
            t.push(row);
        }
        t
    }

    /// `s,gx,gy,gz,tx,ty,tz,kappa` with `kappa = |G″|`.
    pub fn profile(sol: &ProfileSolution) -> Self {
        let mut t = Self::new(&["s", "gx", "gy", "gz", "tx", "ty", "tz", "kappa"]);
        for k in 0..sol.s_grid.len() {
            let mut row = vec![sol.s_grid[k]];
            push_vec(&mut row, &sol.g[k]);
            push_vec(&mut row, &sol.gp[k]);
            row.push(sol.gpp[k].norm());
            t.push(row);
        }
        t
    }

    /// `x,tx,ty,tz,re_n1,im_n1,re_n2,im_n2,re_n3,im_n3`.
    pub fn frame_field(field: &FrameField) -> Self {
        let mut t = Self::new(&FRAME_HEADER);
        for (x, f) in field.x_grid.iter().zip(&field.frames) {
            let mut row = vec![*x];
            push_vec(&mut row, &f.t);
            push_cvec(&mut row, &f.n);
            t.push(row);
        }
        t
    }

    /// Trace frames `(T(0,x), Ñ(0,x))` in the frame-field layout.
    pub fn trace(trace: &TraceField) -> Self {
        let mut t = Self::new(&FRAME_HEADER);
        for k in 0..trace.x_grid.len() {
            let mut row = vec![trace.x_grid[k]];
            push_vec(&mut row, &trace.t0[k]);
            push_cvec(&mut row, &trace.n0_tilde[k]);
            t.push(row);
        }
        t
    }

    /// `xi,re,im,abs,ref_re,ref_im,abs_diff,err_estimate`.
    pub fn sweep(rows: &[SweepRow]) -> Self {
        let mut t = Self::new(&[
            "xi",
            "re",
            "im",
            "abs",
            "ref_re",
            "ref_im",
            "abs_diff",
            "err_estimate",
        ]);
        for r in rows {
            t.push(vec![
                r.xi,
                r.value.0,
                r.value.1,
                r.abs,
                r.reference.0,
                r.reference.1,
                r.abs_diff,
                r.err_estimate,
            ]);
        }
        t
    }

    /// `xi,re_1,im_1,re_2,im_2,re_3,im_3,abs,err_estimate,remainder`, one row per frequency.
    pub fn scan(scan: &SpectrumScan) -> Self {
        let mut t = Self::new(&[
            "xi",
            "re_1",
            "im_1",
            "re_2",
            "im_2",
            "re_3",
            "im_3",
            "abs",
            "err_estimate",
            "remainder",
        ]);
        for k in 0..scan.xi_grid.len() {
            let mut row = vec![scan.xi_grid[k]];
            push_cvec(&mut row, &scan.values[k]);
            row.extend([
                scan.moduli[k],
                scan.err_estimates[k],
                scan.remainder_norms[k],
            ]);
            t.push(row);
        }
        t
    }

    /// `x,re_u,im_u`.
    pub fn nls_snapshot(field: &ModulatedField) -> Self {
        let mut t = Self::new(&["x", "re_u", "im_u"]);
        for (x, u) in field.grid.points().iter().zip(&field.u) {
            t.push(vec![*x, u.re, u.im]);
        }
        t
    }
}

/// JSON summary of a profile solve.
#[derive(Debug, Clone, Serialize)]
pub struct ProfileSummary {
    pub a: f64,
    #[serde(rename = "S")]
    pub half_width: f64,
    #[serde(rename = "A_plus")]
    pub a_plus: [f64; 3],
    #[serde(rename = "A_minus")]
    pub a_minus: [f64; 3],
    pub curvature: f64,
    pub residual_sup: f64,
    pub extraction_spread: f64,
    pub normalization: crate::profile::Normalization,
}

impl ProfileSummary {
    pub fn new(sol: &ProfileSolution) -> Self {
        Self {
            a: sol.a,
            half_width: sol.half_width,
            a_plus: sol.a_plus.into(),
            a_minus: sol.a_minus.into(),
            curvature: sol.curvature,
            residual_sup: sol.residual_sup,
            extraction_spread: sol.corners.spread(),
            normalization: sol.options.normalization,
        }
    }
}

/// Pretty-printed JSON followed by a newline.
pub fn write_json<W: Write, T: Serialize + ?Sized>(mut w: W, value: &T) -> Result<()> {
    serde_json::to_writer_pretty(&mut w, value)?;
    w.write_all(b"\n")?;
    w.flush()?;
    Ok(())
}

/// Buffered file writer, creating parent directories as needed.
pub fn create_file(path: &Path) -> Result<BufWriter<File>> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir)?;
    }
    Ok(BufWriter::new(File::create(path)?))
}
