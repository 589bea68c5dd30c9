//! CSV emitters for the experiment tables. Floats are written in shortest
//! round-trip form, so equal inputs give byte-identical files.

use std::f64::consts::PI;
use std::path::Path;

use crate::caps::{CapSweepRow, PhiTable};
use crate::error::{LabError, Result};
use crate::kernel::lemmas::{ConeDecayReport, Lemma32Report};
use crate::linalg::norm;
use crate::weak::WeakTypeReport;

fn emit(header: &[String], rows: impl IntoIterator<Item = Vec<String>>) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).map_err(std::io::Error::from)?;
    for r in rows {
        w.write_record(&r).map_err(std::io::Error::from)?;
    }
    let bytes = w.into_inner().map_err(|e| e.into_error())?;
    Ok(String::from_utf8(bytes).expect("csv of ASCII fields"))
}

fn strs(v: &[&str]) -> Vec<String> {
    v.iter().map(|s| s.to_string()).collect()
}

/// Hyperspherical angles `θ_1, …, θ_{d-1}` of `w`; the last one lies in `[0, 2π)`.
pub fn angles(w: &[f64]) -> Vec<f64> {
    let d = w.len();
    let mut out = Vec::with_capacity(d - 1);
    for i in 0..d.saturating_sub(2) {
        out.push(w[i].atan2(norm(&w[i + 1..])));
    }
    // atan2 above measures from the equator; shift to the polar convention
    for a in &mut out {
        *a = 0.5 * PI - *a;
    }
    out.push(w[d - 1].atan2(w[d - 2]).rem_euclid(2.0 * PI));
    out
}

/// `theta_1, …, theta_{d-1}, r_argmax, phi_value`.
pub fn phi_csv(table: &PhiTable) -> Result<String> {
    let d = table.directions().first().map_or(2, |w| w.len());
    let mut header: Vec<String> = (1..d).map(|i| format!("theta_{i}")).collect();
    header.extend(strs(&["r_argmax", "phi_value"]));
    let rows = table.directions().iter().enumerate().map(|(i, w)| {
        let mut r: Vec<String> = angles(w).iter().map(f64::to_string).collect();
        r.push(table.argmax_r[i].to_string());
        r.push(table.values[i].to_string());
        r
    });
    emit(&header, rows)
}

/// `abs_x, fourier_abs, cap_bound, ratio, direction`.
pub fn cap_sweep_csv(rows: &[CapSweepRow]) -> Result<String> {
    emit(
        &strs(&["abs_x", "fourier_abs", "cap_bound", "ratio", "direction"]),
        rows.iter().map(|r| {
            vec![
                r.abs_x.to_string(),
                r.fourier_abs.to_string(),
                r.cap_bound.to_string(),
                r.ratio.to_string(),
                r.direction.to_string(),
            ]
        }),
    )
}

/// `R, direction, kernel_abs, phi_value, normalized, gap`, with `R = |x|`.
pub fn decay_csv(report: &ConeDecayReport) -> Result<String> {
    emit(
        &strs(&["R", "direction", "kernel_abs", "phi_value", "normalized", "gap"]),
        report.rows.iter().map(|r| {
            vec![
                r.abs_x.to_string(),
                r.direction.to_string(),
                r.kernel_abs.to_string(),
                r.phi_value.to_string(),
                r.normalized.to_string(),
                r.gap.to_string(),
            ]
        }),
    )
}

/// `k, max_abs`.
pub fn lemma32_csv(report: &Lemma32Report) -> Result<String> {
    emit(
        &strs(&["k", "max_abs"]),
        report.per_k.iter().map(|(k, v)| vec![k.to_string(), v.to_string()]),
    )
}

/// `p, delta, j, diameter, quasinorm_cone, quasinorm_full, lambda_argmax`.
pub fn weak_csv(reports: &[WeakTypeReport]) -> Result<String> {
    emit(
        &strs(&[
            "p",
            "delta",
            "j",
            "diameter",
            "quasinorm_cone",
            "quasinorm_full",
            "lambda_argmax",
        ]),
        reports.iter().flat_map(|rep| rep.rows.iter()).map(|r| {
            vec![
                r.p.to_string(),
                r.delta.to_string(),
                r.j.to_string(),
                r.diameter.to_string(),
                r.quasinorm_cone.to_string(),
                r.quasinorm_full.to_string(),
                r.lambda_argmax.to_string(),
            ]
        }),
    )
}

/// Writes `contents` to a sibling temporary file and renames it into place.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    let name = path
        .file_name()
        .ok_or_else(|| LabError::Input(format!("{} has no file name", path.display())))?;
    let tmp = path.with_file_name(format!(".{}.tmp", name.to_string_lossy()));
    std::fs::write(&tmp, contents)?;
    std::fs::rename(&tmp, path)?;
    Ok(())
}
