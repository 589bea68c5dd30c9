//! Field files: `<stem>.bin` holds little-endian `(re, im)` f64 pairs in
//! row-major order, `<stem>.txt` holds `shape`, `extents` and `origin`
//! lines. Spectrum summaries are CSV rows over dyadic `|τ|` bins.

use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use num_complex::Complex64;

use super::fft::{axis_frequencies, Spectrum};
use super::field::SampledField;
use crate::error::{LabError, Result};

fn with_ext(stem: &Path, ext: &str) -> PathBuf {
    stem.with_extension(ext)
}

fn join(v: &[impl ToString]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" ")
}

pub fn write_field(field: &SampledField, stem: &Path) -> Result<()> {
    let mut bytes = Vec::with_capacity(field.len() * 16);
    for z in field.data() {
        bytes.extend_from_slice(&z.re.to_le_bytes());
        bytes.extend_from_slice(&z.im.to_le_bytes());
    }
    fs::write(with_ext(stem, "bin"), bytes)?;
    let sidecar = format!(
        "shape {}\nextents {}\norigin {}\nformat complex-f64-le\n",
        join(field.shape()),
        join(field.extents()),
        join(field.origin())
    );
    fs::write(with_ext(stem, "txt"), sidecar)?;
    Ok(())
}

fn parse_line<T: std::str::FromStr>(text: &str, key: &str) -> Result<Vec<T>> {
    let line = text
        .lines()
        .find(|l| l.split_whitespace().next() == Some(key))
        .ok_or_else(|| LabError::Input(format!("sidecar lacks a `{key}` line")))?;
    line.split_whitespace()
        .skip(1)
        .map(|s| {
            s.parse::<T>()
                .map_err(|_| LabError::Input(format!("bad `{key}` entry `{s}`")))
        })
        .collect()
}

pub fn read_field(stem: &Path) -> Result<SampledField> {
    let text = fs::read_to_string(with_ext(stem, "txt"))?;
    let shape: Vec<usize> = parse_line(&text, "shape")?;
    let extents: Vec<f64> = parse_line(&text, "extents")?;
    let origin: Vec<f64> = parse_line(&text, "origin")?;
    let bytes = fs::read(with_ext(stem, "bin"))?;
    let n: usize = shape.iter().product();
    if bytes.len() != 16 * n {
        return Err(LabError::Shape(format!(
            "{} bytes of samples for shape {shape:?}",
            bytes.len()
        )));
    }
    let data = bytes
        .chunks_exact(16)
        .map(|c| {
            let re = f64::from_le_bytes(c[..8].try_into().unwrap());
            let im = f64::from_le_bytes(c[8..].try_into().unwrap());
            Complex64::new(re, im)
        })
        .collect();
    SampledField::from_data(&shape, &extents, &origin, data)
}

#[derive(Clone, Debug, PartialEq)]
pub struct SpectrumBin {
    /// `|τ| ∈ [lo, hi)`; the `τ = 0` plane is the bin `[0, 0]`.
    pub lo: f64,
    pub hi: f64,
    pub count: usize,
    /// `Σ |f̂|² · spectral cell` over the bin.
    pub energy: f64,
}

/// Spectral energy of a space-time field grouped by dyadic `|τ|` shells.
pub fn spectrum_summary(field: &SampledField) -> Vec<SpectrumBin> {
    let spec = Spectrum::of(field);
    let cell = spec.cell_volume();
    let taus = &axis_frequencies(field)[field.ndim() - 1];
    let nt = taus.len();
    let mut zero = SpectrumBin {
        lo: 0.0,
        hi: 0.0,
        count: 0,
        energy: 0.0,
    };
    let mut bins: std::collections::BTreeMap<i32, (usize, f64)> = Default::default();
    for (i, z) in spec.data.iter().enumerate() {
        let tau = taus[i % nt].abs();
        if tau == 0.0 {
            zero.count += 1;
            zero.energy += z.norm_sqr() * cell;
        } else {
            let e = bins.entry(tau.log2().floor() as i32).or_default();
            e.0 += 1;
            e.1 += z.norm_sqr() * cell;
        }
    }
    std::iter::once(zero)
        .chain(bins.into_iter().map(|(k, (count, energy))| SpectrumBin {
            lo: 2f64.powi(k),
            hi: 2f64.powi(k + 1),
            count,
            energy,
        }))
        .collect()
}

pub fn spectrum_csv(bins: &[SpectrumBin]) -> String {
    let mut out = String::from("tau_lo,tau_hi,count,energy\n");
    for b in bins {
        let _ = writeln!(out, "{},{},{},{}", b.lo, b.hi, b.count, b.energy);
    }
    out
}

pub fn write_spectrum_csv(bins: &[SpectrumBin], path: &Path) -> Result<()> {
    let mut f = fs::File::create(path)?;
    f.write_all(spectrum_csv(bins).as_bytes())?;
    Ok(())
}
