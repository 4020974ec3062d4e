//! Side-by-side metrics for two finished runs.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use wavetomo_core::metrics::{gradient_energy_ratio, peak, relative_l2};

use crate::error::{CliError, Result};
use crate::io;
use crate::run::{Manifest, OutputKind};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OutputComparison {
    pub kind: OutputKind,
    /// `||a - b|| / ||b||`.
    pub relative_l2: f64,
    pub max_abs_diff: f64,
    /// Distance between the two peaks in cells. Fields only.
    pub peak_offset_cells: Option<f64>,
    /// Gradient energy ratio of each field at the detectable direction.
    pub gradient_ratio_a: Option<f64>,
    pub gradient_ratio_b: Option<f64>,
    /// `gradient_ratio_a / gradient_ratio_b`.
    pub gradient_ratio_factor: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CompareReport {
    pub run_a: PathBuf,
    pub run_b: PathBuf,
    pub detectable_deg: f64,
    pub outputs: BTreeMap<String, OutputComparison>,
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// Compares every sinogram and field the two runs have in common. `b` is
/// the reference.
pub fn compare(run_a: &Path, run_b: &Path, detectable_deg: f64) -> Result<CompareReport> {
    let ma = Manifest::read(run_a)?;
    let mb = Manifest::read(run_b)?;
    let mut outputs = BTreeMap::new();
    for (name, ea) in &ma.outputs {
        let Some(eb) = mb.outputs.get(name) else { continue };
        if ea.kind != eb.kind {
            return Err(CliError::IncompatibleRuns(format!("{name} is a {:?} in one run and a {:?} in the other", ea.kind, eb.kind)));
        }
        let cmp = match ea.kind {
            OutputKind::Sinogram => {
                let a = io::read_sinogram(&run_a.join(name))?;
                let b = io::read_sinogram(&run_b.join(name))?;
                if a.angles_deg() != b.angles_deg() || a.offsets() != b.offsets() {
                    return Err(CliError::IncompatibleRuns(format!("{name}: angle or offset axes differ")));
                }
                OutputComparison {
                    kind: ea.kind,
                    relative_l2: relative_l2(a.values(), b.values()),
                    max_abs_diff: max_abs_diff(a.values(), b.values()),
                    peak_offset_cells: None,
                    gradient_ratio_a: None,
                    gradient_ratio_b: None,
                    gradient_ratio_factor: None,
                }
            }
            OutputKind::Field => {
                let a = io::read_field(&run_a.join(name))?;
                let b = io::read_field(&run_b.join(name))?;
                if a.grid() != b.grid() {
                    return Err(CliError::IncompatibleRuns(format!("{name}: grids differ")));
                }
                let (na, nb) = (a.nodes(), b.nodes());
                let (pa, pb) = (peak(&a), peak(&b));
                let g = a.grid();
                let ra = gradient_energy_ratio(&a, detectable_deg);
                let rb = gradient_energy_ratio(&b, detectable_deg);
                OutputComparison {
                    kind: ea.kind,
                    relative_l2: relative_l2(&na, &nb),
                    max_abs_diff: max_abs_diff(&na, &nb),
                    peak_offset_cells: Some(((pa.x1 - pb.x1) / g.dx1()).hypot((pa.x2 - pb.x2) / g.dx2())),
                    gradient_ratio_a: Some(ra),
                    gradient_ratio_b: Some(rb),
                    gradient_ratio_factor: Some(ra / rb),
                }
            }
            OutputKind::Table | OutputKind::Image => continue,
        };
        outputs.insert(name.clone(), cmp);
    }
    if outputs.is_empty() {
        return Err(CliError::IncompatibleRuns("no sinogram or field outputs in common".into()));
    }
    Ok(CompareReport { run_a: run_a.into(), run_b: run_b.into(), detectable_deg, outputs })
}

impl CompareReport {
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("report serializes")
    }
}
