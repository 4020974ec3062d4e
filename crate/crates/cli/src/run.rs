//! Pipelines behind the subcommands. Each run writes its outputs and a
//! `manifest.toml` with the full configuration, a SHA-256 of every output
//! and the headline metrics.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use wavetomo_core::cache::{sha256_hex, TraceStore};
use wavetomo_core::metrics::{peak, peak_offset_cells, relative_l2};
use wavetomo_core::recon_pointwise::reconstruct_grid;
use wavetomo_core::recon_radon::reconstruct_sinogram_pair;
use wavetomo_core::seed::derive_seed;
use wavetomo_core::solver::{add_noise, measure_dn, snr_db};
use wavetomo_core::sources::{default_cutoff, radon_trace_f1, PlaneWaveParams};
use wavetomo_core::specdiff::worked::run_worked_example;
use wavetomo_core::tomo::{fbp, forward_radon};
use wavetomo_core::{PotentialField, Sinogram};

use crate::config::{ExperimentConfig, Mode};
use crate::error::{CliError, Result};
use crate::io;

pub const MANIFEST: &str = "manifest.toml";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputKind {
    Sinogram,
    Field,
    Table,
    Image,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OutputEntry {
    pub kind: OutputKind,
    pub sha256: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub version: String,
    pub mode: Mode,
    pub elapsed_s: f64,
    /// File name to entry.
    pub outputs: BTreeMap<String, OutputEntry>,
    pub metrics: BTreeMap<String, f64>,
    pub config: ExperimentConfig,
}

impl Manifest {
    pub fn read(dir: &Path) -> Result<Self> {
        let path = dir.join(MANIFEST);
        let text = std::fs::read_to_string(&path).map_err(CliError::io(&path))?;
        toml::from_str(&text).map_err(|e| CliError::Parse { path, message: e.to_string() })
    }
}

struct Outputs {
    dir: PathBuf,
    entries: BTreeMap<String, OutputEntry>,
    metrics: BTreeMap<String, f64>,
}

impl Outputs {
    fn path(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }

    fn record(&mut self, name: &str, kind: OutputKind) -> Result<()> {
        let path = self.path(name);
        let bytes = std::fs::read(&path).map_err(CliError::io(&path))?;
        self.entries.insert(name.into(), OutputEntry { kind, sha256: sha256_hex(&bytes) });
        Ok(())
    }

    fn sinogram(&mut self, stem: &str, sino: &Sinogram) -> Result<()> {
        let csv = format!("{stem}.csv");
        io::write_sinogram(&self.path(&csv), sino)?;
        self.record(&csv, OutputKind::Sinogram)?;
        let png = format!("{stem}.png");
        io::sinogram_png(&self.path(&png), sino)?;
        self.record(&png, OutputKind::Image)
    }

    fn field(&mut self, stem: &str, field: &PotentialField) -> Result<()> {
        let csv = format!("{stem}.csv");
        io::write_field(&self.path(&csv), field)?;
        self.record(&csv, OutputKind::Field)?;
        let png = format!("{stem}.png");
        io::field_png(&self.path(&png), field)?;
        self.record(&png, OutputKind::Image)
    }

    fn metric(&mut self, name: &str, value: f64) {
        self.metrics.insert(name.into(), value);
    }

    /// Relative error and peak location of `rec` against `truth`.
    fn image_metrics(&mut self, prefix: &str, rec: &PotentialField, truth: &PotentialField) {
        self.metric(&format!("{prefix}_rel_l2"), relative_l2(&rec.nodes(), &truth.nodes()));
        let p = peak(rec);
        let t = peak(truth);
        self.metric(&format!("{prefix}_peak_x1"), p.x1);
        self.metric(&format!("{prefix}_peak_x2"), p.x2);
        self.metric(&format!("{prefix}_peak_value"), p.value);
        self.metric(&format!("{prefix}_peak_offset_cells"), peak_offset_cells(rec, [t.x1, t.x2]));
    }
}

/// Validates, runs the pipeline on a pool of `config.workers` threads and
/// writes the manifest.
pub fn run(config: &ExperimentConfig) -> Result<Manifest> {
    config.validate()?;
    let dir = config.output.clone();
    std::fs::create_dir_all(&dir).map_err(CliError::io(&dir))?;
    let pool = rayon::ThreadPoolBuilder::new().num_threads(config.workers).build()?;
    let start = Instant::now();
    let mut out = Outputs { dir, entries: BTreeMap::new(), metrics: BTreeMap::new() };
    pool.install(|| match config.mode {
        Mode::Forward => forward(config, &mut out),
        Mode::Radon => radon(config, &mut out),
        Mode::Pointwise => pointwise(config, &mut out),
        Mode::Fbp => backproject(config, &mut out),
        Mode::SpecdiffDemo => specdiff_demo(config, &mut out),
    })?;
    let manifest = Manifest {
        version: env!("CARGO_PKG_VERSION").into(),
        mode: config.mode,
        elapsed_s: start.elapsed().as_secs_f64(),
        outputs: out.entries,
        metrics: out.metrics,
        config: config.clone(),
    };
    let path = out.dir.join(MANIFEST);
    let text = toml::to_string(&manifest).map_err(|e| CliError::Config(format!("manifest: {e}")))?;
    std::fs::write(&path, text).map_err(CliError::io(&path))?;
    Ok(manifest)
}

fn forward(config: &ExperimentConfig, out: &mut Outputs) -> Result<()> {
    let grid = config.grid.build()?;
    let f = &config.forward;
    let phantom = config.phantom.build()?;
    let q = phantom.sample(&grid.space);
    let params = PlaneWaveParams {
        tau: f.tau,
        h: f.h.unwrap_or_else(|| default_cutoff(f.tau)),
        t0: f.t0.unwrap_or(0.5 * grid.t_final),
        theta_deg: f.theta_deg,
        eta: 0.0,
    };
    let trace = radon_trace_f1(&params, &grid).scaled(f.eps);
    let clean = measure_dn(&grid, &q, f.power, &trace).map_err(CliError::core("solve"))?;
    let dn = if f.noise_sigma > 0.0 {
        let noisy = add_noise(&clean, f.noise_sigma, derive_seed(config.seed, &[4]));
        out.metric("snr_db", snr_db(&clean, &noisy));
        noisy
    } else {
        clean
    };
    io::write_dn(&out.path("dn.csv"), &grid, &dn)?;
    out.record("dn.csv", OutputKind::Table)?;
    io::write_png(&out.path("dn.png"), grid.nt, dn.boundary_len(), dn.values(), 1)?;
    out.record("dn.png", OutputKind::Image)?;
    out.field("q_true", &q)?;
    out.metric("cfl", grid.cfl());
    out.metric("dn_rms", dn.rms());
    out.metric("dn_mean_abs", dn.mean_abs());
    Ok(())
}

fn radon(config: &ExperimentConfig, out: &mut Outputs) -> Result<()> {
    let rc = config.radon_config()?;
    let store = if config.radon.cache {
        let root = out.dir.join("cache");
        Some(TraceStore::open(&root, &rc.fingerprint(), rc.grid).map_err(CliError::core("cache"))?)
    } else {
        None
    };
    eprintln!(
        "radon: {} angles x {} amplitudes on {}x{}x{}",
        rc.angles_deg.len(),
        rc.n_eps,
        rc.grid.space.n1,
        rc.grid.space.n2,
        rc.grid.nt
    );
    let pair = reconstruct_sinogram_pair(&rc, store.as_ref()).map_err(CliError::core("measure"))?;
    let q = rc.phantom.sample(&rc.grid.space);
    let oracle = forward_radon(&q, &rc.angles_deg, &rc.offsets).map_err(CliError::core("oracle"))?;
    let window = config.radon.recon.build()?;
    let rec = fbp(&pair.spectral, &window).map_err(CliError::core("fbp"))?;
    let rec_fd = fbp(&pair.finite_difference, &window).map_err(CliError::core("fbp"))?;
    let truth = rc.phantom.sample(&window);

    out.sinogram("sinogram", &pair.spectral)?;
    out.sinogram("sinogram_fd", &pair.finite_difference)?;
    out.sinogram("sinogram_oracle", &oracle)?;
    out.field("q_rec", &rec)?;
    out.field("q_rec_fd", &rec_fd)?;
    out.field("q_true", &truth)?;

    out.metric("sinogram_rel_l2", relative_l2(pair.spectral.values(), oracle.values()));
    out.metric("sinogram_fd_rel_l2", relative_l2(pair.finite_difference.values(), oracle.values()));
    out.metric("sinogram_max_abs", pair.spectral.max_abs());
    out.image_metrics("image", &rec, &truth);
    out.image_metrics("image_fd", &rec_fd, &truth);
    out.metric("solves", (rc.angles_deg.len() * rc.n_eps) as f64);
    Ok(())
}

fn pointwise(config: &ExperimentConfig, out: &mut Outputs) -> Result<()> {
    let pc = config.pointwise_config()?;
    eprintln!("pointwise: {}x{} nodes, 3 solves each", pc.recon.n1, pc.recon.n2);
    let outcome = reconstruct_grid(&pc).map_err(CliError::core("reconstruct"))?;
    let nodes = pc.recon.n1 * pc.recon.n2;
    if outcome.failures.len() == nodes {
        let first = outcome.failures.into_iter().next().expect("at least one node");
        return Err(CliError::Core { stage: "reconstruct", source: first });
    }
    for e in &outcome.failures {
        eprintln!("warning: {e}");
    }
    let truth = pc.phantom.sample(&pc.recon);
    out.field("q_rec", &outcome.field)?;
    out.field("q_true", &truth)?;
    out.image_metrics("image", &outcome.field, &truth);
    out.metric("failures", outcome.failures.len() as f64);
    out.metric("solves", outcome.solves as f64);
    Ok(())
}

fn backproject(config: &ExperimentConfig, out: &mut Outputs) -> Result<()> {
    let b = &config.fbp;
    let phantom = config.phantom.build()?;
    let sino = match &b.sinogram {
        Some(path) => io::read_sinogram(path)?,
        None => {
            let grid = config.grid.build()?;
            let q = phantom.sample(&grid.space);
            let sino = forward_radon(&q, &b.angles.values(), &b.offsets.values()).map_err(CliError::core("oracle"))?;
            out.sinogram("sinogram", &sino)?;
            sino
        }
    };
    let window = b.recon.build()?;
    let rec = fbp(&sino, &window).map_err(CliError::core("fbp"))?;
    let truth = phantom.sample(&window);
    out.field("q_rec", &rec)?;
    out.field("q_true", &truth)?;
    out.image_metrics("image", &rec, &truth);
    Ok(())
}

fn specdiff_demo(config: &ExperimentConfig, out: &mut Outputs) -> Result<()> {
    let s = &config.specdiff;
    let params = s.params();
    let seeds: Vec<u64> = (0..s.seeds).map(|k| derive_seed(config.seed, &[3, k])).collect();
    let runs = seeds
        .par_iter()
        .map(|&seed| run_worked_example(&params, s.samples, seed))
        .collect::<Result<Vec<_>, _>>()
        .map_err(CliError::core("specdiff"))?;

    let first = &runs[0];
    let curves = (0..first.x.len()).map(|j| {
        vec![
            first.x[j],
            first.noisy[j],
            first.exact_d1[j],
            first.gauss_d1[j],
            first.trunc_d1[j],
            first.exact_d2[j],
            first.gauss_d2[j],
            first.trunc_d2[j],
        ]
    });
    let header = ["x", "noisy", "exact_d1", "gauss_d1", "trunc_d1", "exact_d2", "gauss_d2", "trunc_d2"];
    io::write_table(&out.path("curves.csv"), &header, curves)?;
    out.record("curves.csv", OutputKind::Table)?;

    let rms: Vec<_> = runs.iter().map(|r| r.rms()).collect();
    let rows = rms
        .iter()
        .enumerate()
        .map(|(k, r)| vec![k as f64, r.first_gauss, r.first_trunc, r.second_gauss, r.second_trunc]);
    io::write_table(&out.path("rms.csv"), &["run", "first_gauss", "first_trunc", "second_gauss", "second_trunc"], rows)?;
    out.record("rms.csv", OutputKind::Table)?;

    let pick = |f: fn(&wavetomo_core::specdiff::worked::WorkedRms) -> f64| median(rms.iter().map(f).collect());
    let medians = [
        ("first_gauss", pick(|r| r.first_gauss)),
        ("first_trunc", pick(|r| r.first_trunc)),
        ("second_gauss", pick(|r| r.second_gauss)),
        ("second_trunc", pick(|r| r.second_trunc)),
    ];
    println!("median RMS error over {} runs (noise std {:e})", runs.len(), params.noise_std);
    println!("{:<14} {:>12}", "derivative", "rms");
    for (name, v) in medians {
        println!("{name:<14} {v:>12.5}");
        out.metric(&format!("median_rms_{name}"), v);
    }
    Ok(())
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    if v.len() % 2 == 0 {
        0.5 * (v[m - 1] + v[m])
    } else {
        v[m]
    }
}
