use std::fmt::Write;
use std::fs;
use std::path::Path;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::image_io::{write_image, Image};
use crate::error::{Error, Result};
use crate::linalg::Mat;
use crate::mri::{image_metrics, make_mask, reconstruct, simulate_kspace, AccelMask, Method, MriParams};
use crate::rng::Seed;

/// Per-run outcome. Failed runs keep their row with NaN metrics.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkRow {
    pub image: String,
    /// 1 denotes full sampling.
    pub accel: u32,
    pub method: Method,
    pub psnr: f64,
    pub ssim: f64,
    pub seconds: f64,
    pub error: Option<String>,
}

/// The mask for an acceleration factor: full sampling for 1, the default
/// 4×/8× patterns otherwise.
pub fn mask_for(n1: usize, accel: u32, seed: Seed) -> Result<AccelMask> {
    if accel == 1 {
        Ok(AccelMask::full(n1))
    } else {
        make_mask(n1, accel, seed)
    }
}

/// Mask seed of an acceleration factor; shared by all methods so they see
/// the same k-space lines.
pub fn mask_seed(seed: Seed, accel: u32) -> Seed {
    seed.derive(accel as u64)
}

fn file_stem(name: &str) -> String {
    name.chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '_' { c } else { '_' })
        .collect()
}

/// Runs every `(image, accel, method)` combination against fully sampled
/// references (`peak = 1`). Images are expected in `[0, 1]`. A failing run
/// is recorded and the rest continue. With `out_dir`, reconstructions are
/// saved as 16-bit PNG alongside `benchmark.csv`, `table.csv` and
/// `benchmark.json`.
pub fn run_mri_benchmark(
    images: &[(String, Mat)],
    accels: &[u32],
    methods: &[Method],
    params: &MriParams,
    seed: Seed,
    out_dir: Option<&Path>,
) -> Result<Vec<BenchmarkRow>> {
    params.validate()?;
    if let Some(dir) = out_dir {
        fs::create_dir_all(dir)?;
    }
    let mut rows = Vec::new();
    for (name, reference) in images {
        for &accel in accels {
            let mask = mask_for(reference.rows(), accel, mask_seed(seed, accel));
            for &method in methods {
                let t0 = Instant::now();
                let outcome = mask.as_ref().map_err(|e| Error::Config(e.to_string())).and_then(|mask| {
                    let y = simulate_kspace(reference, mask)?;
                    let rec = reconstruct(method, &y, mask, params, seed.derive(0x5EED))?;
                    let metrics = image_metrics(reference, &rec.z, 1.0)?;
                    Ok((rec.z, metrics))
                });
                let seconds = t0.elapsed().as_secs_f64();
                let row = match outcome {
                    Ok((z, metrics)) => {
                        if let Some(dir) = out_dir {
                            let file = format!("{}_{}x_{}.png", file_stem(name), accel, method.name());
                            write_image(&dir.join(file), &Image::new(z, 16))?;
                        }
                        BenchmarkRow {
                            image: name.clone(),
                            accel,
                            method,
                            psnr: metrics.psnr,
                            ssim: metrics.ssim,
                            seconds,
                            error: None,
                        }
                    }
                    Err(e) => BenchmarkRow {
                        image: name.clone(),
                        accel,
                        method,
                        psnr: f64::NAN,
                        ssim: f64::NAN,
                        seconds,
                        error: Some(e.to_string()),
                    },
                };
                rows.push(row);
            }
        }
    }
    if let Some(dir) = out_dir {
        fs::write(dir.join("benchmark.csv"), benchmark_csv(&rows))?;
        fs::write(dir.join("table.csv"), benchmark_table(&rows, accels))?;
        let json = serde_json::json!({
            "params": params,
            "seed": seed,
            "rows": rows.iter().map(|r| serde_json::json!({
                "image": r.image,
                "accel": r.accel,
                "method": r.method,
                "psnr": finite_or_label(r.psnr),
                "ssim": finite_or_label(r.ssim),
                "seconds": r.seconds,
                "error": r.error,
            })).collect::<Vec<_>>(),
        });
        fs::write(dir.join("benchmark.json"), serde_json::to_string_pretty(&json).expect("JSON value"))?;
    }
    Ok(rows)
}

/// JSON has no infinities: non-finite metrics become the strings `"inf"`
/// or `"nan"`.
pub fn finite_or_label(v: f64) -> serde_json::Value {
    if v.is_finite() {
        serde_json::json!(v)
    } else {
        serde_json::json!(fmt_metric(v))
    }
}

fn fmt_metric(v: f64) -> String {
    if v.is_nan() {
        "nan".into()
    } else if v == f64::INFINITY {
        "inf".into()
    } else {
        format!("{v}")
    }
}

/// `image,accel,method,psnr,ssim,status` — no timings, so reruns are
/// byte-identical.
pub fn benchmark_csv(rows: &[BenchmarkRow]) -> String {
    let mut out = String::from("image,accel,method,psnr,ssim,status\n");
    for r in rows {
        let status = if r.error.is_some() { "failed" } else { "ok" };
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            r.image,
            r.accel,
            r.method.name(),
            fmt_metric(r.psnr),
            fmt_metric(r.ssim),
            status
        );
    }
    out
}

/// Method × (metric, acceleration) layout: one row per image and method,
/// columns `psnr_<a>x, ssim_<a>x` for each acceleration.
pub fn benchmark_table(rows: &[BenchmarkRow], accels: &[u32]) -> String {
    let mut out = String::from("image,method");
    for a in accels {
        let _ = write!(out, ",psnr_{a}x,ssim_{a}x");
    }
    out.push('\n');
    let mut keys: Vec<(String, Method)> = Vec::new();
    for r in rows {
        if !keys.iter().any(|(i, m)| *i == r.image && *m == r.method) {
            keys.push((r.image.clone(), r.method));
        }
    }
    for (image, method) in keys {
        let _ = write!(out, "{image},{}", method.name());
        for &a in accels {
            match rows.iter().find(|r| r.image == image && r.method == method && r.accel == a) {
                Some(r) => {
                    let _ = write!(out, ",{},{}", fmt_metric(r.psnr), fmt_metric(r.ssim));
                }
                None => out.push_str(",,"),
            }
        }
        out.push('\n');
    }
    out
}
