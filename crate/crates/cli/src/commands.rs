use std::f64::consts::PI;

use entasym_core::analytics::{
    dos_fit, energy_charge_map, predicted_asymmetry_haar, predicted_asymmetry_u1, DosFit,
};
use entasym_core::eig::cache::load_or_compute;
use entasym_core::eig::{eigh, energy_window, mid_spectrum_window, EigenSpectrum, MAX_DIM};
use entasym_core::ensemble::{mc_asymmetry_stats, RandomSource, SectorDims};
use entasym_core::entanglement::{asymmetry2, Bipartition};
use entasym_core::spins::{ChainModel, ChargeSpec, SiteCount};
use rayon::prelude::*;
use serde_json::json;

use crate::config::{default_window_count, ExperimentConfig};
use crate::output::{Cell, CsvTable, SCHEMA_VERSION};
use crate::CliError;

/// Largest chain with a full decomposition.
pub const MAX_SCAN_SITES: usize = MAX_DIM.trailing_zeros() as usize;

/// Full spectrum plus its DOS fit and rescaled energies ε/ε*.
pub struct Spectrum {
    pub sites: usize,
    pub spec: EigenSpectrum,
    pub fit: DosFit,
    pub eps: Vec<f64>,
}

pub fn compute_spectrum(cfg: &ExperimentConfig, model: ChainModel, sites: usize) -> Result<Spectrum, CliError> {
    if sites > MAX_SCAN_SITES {
        return Err(CliError::Resource(format!(
            "full decomposition at L = {sites} exceeds the cap; use L ≤ {MAX_SCAN_SITES}"
        )));
    }
    let l = SiteCount::new(sites)?;
    let h = model.build(l, &cfg.couplings())?;
    let spec = match &cfg.cache_dir {
        Some(dir) => {
            let c = cfg.couplings();
            let key = format!(
                "{}|L={sites}|g={:?}|h={:?}|delta={:?}|h1={:?}|hl={:?}",
                model.name(),
                c.g,
                c.h,
                c.delta,
                c.h1,
                c.hl
            );
            load_or_compute(dir, sites as u32, &key, || eigh(&h))?
        }
        None => eigh(&h)?,
    };
    let fit = dos_fit(spec.energies(), sites)?;
    let eps = spec.energies().iter().map(|&e| fit.rescale(e, cfg.shift)).collect();
    Ok(Spectrum { sites, spec, fit, eps })
}

/// ΔS⁽²⁾ of the listed eigenstates, in input order.
pub fn eigenstate_asymmetries(
    s: &Spectrum,
    indices: &[usize],
    ell_a: usize,
    charge: &ChargeSpec,
) -> Result<Vec<f64>, CliError> {
    let part = Bipartition::new(SiteCount::new(s.sites)?, ell_a)?;
    indices
        .par_iter()
        .map(|&k| Ok(asymmetry2(&s.spec.state(k)?, &part, charge)?))
        .collect()
}

/// Mean and sample standard deviation; the deviation is 0 for a single value.
pub fn mean_std(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    if v.len() < 2 {
        return (mean, 0.0);
    }
    let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// U(1) random-state prediction relative to a reference axis: `−log R` for a
/// perpendicular charge, 0 for the reference axis itself, NaN otherwise.
pub fn u1_prediction(reference: &ChargeSpec, charge: &ChargeSpec, l: usize, ell_a: usize, m: usize) -> Result<f64, CliError> {
    if charge.is_parallel(reference) {
        Ok(0.0)
    } else if charge.is_orthogonal(reference) {
        Ok(predicted_asymmetry_u1(l, ell_a, m)?)
    } else {
        Ok(f64::NAN)
    }
}

fn ell_list(cfg: &ExperimentConfig, sites: usize) -> Result<Vec<usize>, CliError> {
    if cfg.ell_a.is_empty() {
        return Ok((0..=sites).collect());
    }
    if let Some(&bad) = cfg.ell_a.iter().find(|&&e| e > sites) {
        return Err(CliError::Config(format!("ℓ_A = {bad} exceeds L = {sites}")));
    }
    Ok(cfg.ell_a.clone())
}

fn select_window(cfg: &ExperimentConfig, s: &Spectrum, center: f64) -> Result<Vec<usize>, CliError> {
    match cfg.window_width {
        Some(w) => {
            let mut idx = energy_window(&s.eps, center, w);
            idx.sort_by(|&a, &b| (s.eps[a] - center).abs().total_cmp(&(s.eps[b] - center).abs()).then(a.cmp(&b)));
            Ok(idx)
        }
        None => {
            let count = cfg.window_count.unwrap_or_else(|| default_window_count(s.sites));
            Ok(mid_spectrum_window(&s.eps, center, count)?)
        }
    }
}

fn fit_comment(t: &mut CsvTable, s: &Spectrum) {
    t.comment(format!(
        "L={} E_p={} eps_star={} eps_star_moment={}",
        s.sites,
        crate::output::fmt_g(s.fit.e_p),
        crate::output::fmt_g(s.fit.eps_star),
        crate::output::fmt_g(s.fit.eps_star_moment)
    ));
}

/// One eigenstate's asymmetry for one subsystem size.
#[derive(Clone, Debug, PartialEq)]
pub struct AsymmetryRecord {
    pub index: usize,
    pub energy: f64,
    pub eps: f64,
    pub ell_a: usize,
    pub axis: [f64; 3],
    pub asymmetry: f64,
    pub sector: usize,
    pub prediction_u1: f64,
    pub prediction_haar: f64,
}

pub struct ScanOutput {
    pub spectrum: Spectrum,
    pub records: Vec<AsymmetryRecord>,
}

pub fn spectrum_scan(cfg: &ExperimentConfig) -> Result<ScanOutput, CliError> {
    if cfg.ell_a.is_empty() {
        return Err(CliError::Config("spectrum-scan needs a non-empty ell_a list".into()));
    }
    let model = cfg.chain_model()?;
    let l = cfg.sites;
    let ells = ell_list(cfg, l)?;
    let charge = cfg.charge_spec()?;
    let reference = cfg.field_axis();
    let s = compute_spectrum(cfg, model, l)?;
    let all: Vec<usize> = (0..s.spec.dim()).collect();
    let mut records = Vec::with_capacity(all.len() * ells.len());
    for &ell in &ells {
        let ds = eigenstate_asymmetries(&s, &all, ell, &charge)?;
        let haar = predicted_asymmetry_haar(l, ell)?;
        for (k, &v) in all.iter().zip(&ds) {
            let sector = energy_charge_map(s.eps[*k], l);
            records.push(AsymmetryRecord {
                index: *k,
                energy: s.spec.energies()[*k],
                eps: s.eps[*k],
                ell_a: ell,
                axis: charge.axis(),
                asymmetry: v,
                sector,
                prediction_u1: u1_prediction(&reference, &charge, l, ell, sector)?,
                prediction_haar: haar,
            });
        }
    }
    Ok(ScanOutput { spectrum: s, records })
}

pub fn scan_table(cfg: &ExperimentConfig, out: &ScanOutput) -> CsvTable {
    let mut t = CsvTable::new(
        "spectrum-scan",
        &["index", "energy", "eps", "ell_a", "nx", "ny", "nz", "asymmetry", "sector", "prediction_u1", "prediction_haar"],
    );
    t.comment(format!("model={} charge={}", cfg.model, cfg.charge));
    fit_comment(&mut t, &out.spectrum);
    for r in &out.records {
        t.push(vec![
            r.index.into(),
            r.energy.into(),
            r.eps.into(),
            r.ell_a.into(),
            r.axis[0].into(),
            r.axis[1].into(),
            r.axis[2].into(),
            r.asymmetry.into(),
            r.sector.into(),
            r.prediction_u1.into(),
            r.prediction_haar.into(),
        ]);
    }
    t
}

/// Window statistics of the full-system asymmetry at one sweep angle.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepPoint {
    pub sites: usize,
    pub angle: f64,
    pub mean: f64,
    pub std: f64,
    pub states: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepSummary {
    pub sites: usize,
    pub argmin: f64,
    pub argmax: f64,
    pub max_mean: f64,
    /// `−log R(L, L, L/2)`.
    pub prediction: f64,
}

fn sweep<F>(cfg: &ExperimentConfig, angles: &[f64], charge_at: F) -> Result<(Vec<SweepPoint>, Vec<SweepSummary>), CliError>
where
    F: Fn(f64) -> ChargeSpec,
{
    let model = cfg.chain_model()?;
    let mut points = Vec::new();
    let mut summaries = Vec::new();
    for &l in &cfg.sizes {
        let s = compute_spectrum(cfg, model, l)?;
        let window = select_window(cfg, &s, cfg.window_center)?;
        if window.is_empty() {
            return Err(CliError::Config(format!("empty window at L = {l}")));
        }
        let mut these = Vec::with_capacity(angles.len());
        for &a in angles {
            let ds = eigenstate_asymmetries(&s, &window, l, &charge_at(a))?;
            let (mean, std) = mean_std(&ds);
            these.push(SweepPoint { sites: l, angle: a, mean, std, states: window.len() });
        }
        let min = these.iter().min_by(|a, b| a.mean.total_cmp(&b.mean)).expect("non-empty grid");
        let max = these.iter().max_by(|a, b| a.mean.total_cmp(&b.mean)).expect("non-empty grid");
        summaries.push(SweepSummary {
            sites: l,
            argmin: min.angle,
            argmax: max.angle,
            max_mean: max.mean,
            prediction: predicted_asymmetry_u1(l, l, l / 2)?,
        });
        points.extend(these);
    }
    Ok((points, summaries))
}

fn sweep_table(command: &str, angle: &str, cfg: &ExperimentConfig, points: &[SweepPoint], sums: &[SweepSummary]) -> CsvTable {
    let mut t = CsvTable::new(command, &["sites", angle, "mean", "std", "states", "prediction"]);
    t.comment(format!("model={} theta_star={}", cfg.model, crate::output::fmt_g(cfg.theta_star())));
    for s in sums {
        t.comment(format!(
            "L={} argmin={} argmax={} max_mean={} prediction={}",
            s.sites,
            crate::output::fmt_g(s.argmin),
            crate::output::fmt_g(s.argmax),
            crate::output::fmt_g(s.max_mean),
            crate::output::fmt_g(s.prediction)
        ));
    }
    for p in points {
        let pred = sums.iter().find(|s| s.sites == p.sites).map_or(f64::NAN, |s| s.prediction);
        t.push(vec![p.sites.into(), p.angle.into(), p.mean.into(), p.std.into(), p.states.into(), pred.into()]);
    }
    t
}

pub fn theta_grid(points: usize) -> Vec<f64> {
    (0..points).map(|i| PI * i as f64 / points as f64).collect()
}

pub fn phi_grid(start: f64, end: f64, points: usize) -> Vec<f64> {
    if points == 1 {
        return vec![start];
    }
    (0..points).map(|i| start + (end - start) * i as f64 / (points - 1) as f64).collect()
}

pub fn theta_sweep(cfg: &ExperimentConfig) -> Result<(Vec<SweepPoint>, Vec<SweepSummary>), CliError> {
    sweep(cfg, &theta_grid(cfg.theta_points), ChargeSpec::from_theta)
}

pub fn theta_sweep_table(cfg: &ExperimentConfig) -> Result<CsvTable, CliError> {
    let (p, s) = theta_sweep(cfg)?;
    Ok(sweep_table("theta-sweep", "theta", cfg, &p, &s))
}

pub fn phi_sweep(cfg: &ExperimentConfig) -> Result<(Vec<SweepPoint>, Vec<SweepSummary>), CliError> {
    let theta_star = cfg.theta_star();
    sweep(cfg, &phi_grid(cfg.phi_start, cfg.phi_end, cfg.phi_points), |phi| ChargeSpec::from_phi(theta_star, phi))
}

pub fn phi_sweep_table(cfg: &ExperimentConfig) -> Result<CsvTable, CliError> {
    let (p, s) = phi_sweep(cfg)?;
    Ok(sweep_table("phi-sweep", "phi", cfg, &p, &s))
}

pub fn window_average_table(cfg: &ExperimentConfig) -> Result<CsvTable, CliError> {
    let model = cfg.chain_model()?;
    let l = cfg.sites;
    let ells = ell_list(cfg, l)?;
    let charge = cfg.charge_spec()?;
    let reference = cfg.field_axis();
    let s = compute_spectrum(cfg, model, l)?;
    let mut t = CsvTable::new(
        "window-average",
        &["sites", "center", "sector", "ell_a", "states", "mean", "std", "prediction_u1", "prediction_haar"],
    );
    t.comment(format!("model={} charge={}", cfg.model, cfg.charge));
    fit_comment(&mut t, &s);
    for &center in &cfg.centers {
        let window = select_window(cfg, &s, center)?;
        if window.len() < 10 {
            log::warn!("window at ε/ε* = {center} holds only {} states", window.len());
        }
        let m = energy_charge_map(center, l);
        for &ell in &ells {
            let (mean, std) = if window.is_empty() {
                (f64::NAN, f64::NAN)
            } else {
                mean_std(&eigenstate_asymmetries(&s, &window, ell, &charge)?)
            };
            t.push(vec![
                l.into(),
                center.into(),
                m.into(),
                ell.into(),
                window.len().into(),
                mean.into(),
                std.into(),
                u1_prediction(&reference, &charge, l, ell, m)?.into(),
                predicted_asymmetry_haar(l, ell)?.into(),
            ]);
        }
    }
    Ok(t)
}

pub const MIN_VALIDATION_SAMPLES: usize = 50;

/// Monte Carlo versus closed form for one `(L, M, ℓ_A)` cell.
#[derive(Clone, Debug, PartialEq)]
pub struct ValidationRow {
    pub sites: usize,
    pub charge: usize,
    pub ell_a: usize,
    pub samples: usize,
    pub mean: f64,
    pub std: f64,
    pub std_err: f64,
    pub prediction: f64,
    pub flagged: bool,
}

pub fn ensemble_validate(cfg: &ExperimentConfig) -> Result<Vec<ValidationRow>, CliError> {
    if cfg.samples < MIN_VALIDATION_SAMPLES {
        return Err(CliError::Config(format!(
            "ensemble-validate needs at least {MIN_VALIDATION_SAMPLES} samples, got {}",
            cfg.samples
        )));
    }
    let spec = cfg.charge_spec()?;
    let mut rows = Vec::new();
    let mut cell = 0u64;
    for &l in &cfg.sizes {
        let charges: Vec<usize> = if cfg.charges.is_empty() { (1..l).collect() } else { cfg.charges.clone() };
        if let Some(&bad) = charges.iter().find(|&&m| m > l) {
            return Err(CliError::Config(format!("M = {bad} exceeds L = {l}")));
        }
        for m in charges {
            for ell in ell_list(cfg, l)? {
                let dims = SectorDims::new(l, ell, m)?;
                let rng = RandomSource::new(cfg.seed, cell);
                cell += 1;
                let st = mc_asymmetry_stats(&dims, &spec, cfg.samples, &rng)?;
                let prediction = u1_prediction(&ChargeSpec::z(), &spec, l, ell, m)?;
                let flagged = prediction.is_finite() && (st.mean - prediction).abs() > 3.0 * st.std_err;
                rows.push(ValidationRow {
                    sites: l,
                    charge: m,
                    ell_a: ell,
                    samples: st.samples,
                    mean: st.mean,
                    std: st.std_dev(),
                    std_err: st.std_err,
                    prediction,
                    flagged,
                });
            }
        }
    }
    Ok(rows)
}

pub fn validation_table(cfg: &ExperimentConfig, rows: &[ValidationRow]) -> CsvTable {
    let mut t = CsvTable::new(
        "ensemble-validate",
        &["sites", "charge", "ell_a", "samples", "mean", "std", "std_err", "prediction", "flagged"],
    );
    let flagged = rows.iter().filter(|r| r.flagged).count();
    t.comment(format!("charge_axis={} seed={}", cfg.charge, cfg.seed));
    t.comment(format!("flagged={flagged} rows={}", rows.len()));
    for r in rows {
        t.push(vec![
            r.sites.into(),
            r.charge.into(),
            r.ell_a.into(),
            r.samples.into(),
            r.mean.into(),
            r.std.into(),
            r.std_err.into(),
            r.prediction.into(),
            Cell::Bool(r.flagged),
        ]);
    }
    t
}

pub fn dos_fit_report(cfg: &ExperimentConfig) -> Result<serde_json::Value, CliError> {
    let model = cfg.chain_model()?;
    let s = compute_spectrum(cfg, model, cfg.sites)?;
    let f = &s.fit;
    let mut report = json!({
        "schema_version": SCHEMA_VERSION,
        "command": "dos-fit",
        "model": model.name(),
        "sites": s.sites,
        "couplings": { "g": cfg.g, "h": cfg.h, "delta": cfg.delta, "h1": cfg.h1, "hl": cfg.hl },
        "e_p": f.e_p,
        "eps_star": f.eps_star,
        "eps_star_moment": f.eps_star_moment,
        "amplitude": f.amplitude,
        "rel_residual": f.rel_residual,
        "bins": f.bins(),
        "bin_width": f.bin_width,
        "histogram": { "centers": f.bin_centers(), "counts": f.counts },
    });
    if model == ChainModel::XxzFields {
        report["note"] = json!("the level density of this model can show a modulation on top of the Gaussian envelope; compare rel_residual");
    }
    Ok(report)
}
