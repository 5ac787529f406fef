//! Flat key/value experiment configuration.
//!
//! Values come from, in increasing precedence: built-in defaults, a TOML
//! file (`--config`), `--set key=value` pairs, then the typed flags.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use entasym_core::spins::{ChainModel, ChargeSpec, Couplings, MAX_SITES};
use serde::Deserialize;
use toml::{Table, Value};

use crate::CliError;

pub const DEFAULT_SEED: u64 = 0x5eed;

#[derive(Clone, Debug, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub model: String,
    pub sites: usize,
    /// Chain lengths for sweeps and ensemble runs.
    pub sizes: Vec<usize>,
    pub g: f64,
    pub h: f64,
    pub delta: f64,
    pub h1: f64,
    pub hl: f64,
    /// `x`, `y`, `z`, `theta:<rad>`, `phi:<rad>` or `nx,ny,nz`.
    pub charge: String,
    /// Subsystem sizes; empty means all of `0..=L` where a command allows it.
    pub ell_a: Vec<usize>,
    /// Total charges `M` for ensemble runs; empty means `1..L`.
    pub charges: Vec<usize>,
    pub seed: u64,
    pub samples: usize,
    pub window_center: f64,
    /// Window width in units of ε/ε*; overrides count mode when set.
    pub window_width: Option<f64>,
    /// Window size in states; defaults per chain length when unset.
    pub window_count: Option<usize>,
    pub centers: Vec<f64>,
    pub theta_points: usize,
    pub phi_start: f64,
    pub phi_end: f64,
    pub phi_points: usize,
    /// Subtract the fitted peak energy before rescaling.
    pub shift: bool,
    pub cache_dir: Option<PathBuf>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        let c = Couplings::default();
        Self {
            model: ChainModel::Mfim.name().to_string(),
            sites: 12,
            sizes: vec![8, 10],
            g: c.g,
            h: c.h,
            delta: c.delta,
            h1: c.h1,
            hl: c.hl,
            charge: "y".into(),
            ell_a: Vec::new(),
            charges: Vec::new(),
            seed: DEFAULT_SEED,
            samples: entasym_core::ensemble::DEFAULT_SAMPLES,
            window_center: 0.0,
            window_width: None,
            window_count: None,
            centers: vec![0.0, 0.2, -0.4],
            theta_points: 64,
            phi_start: 0.0,
            phi_end: PI,
            phi_points: 33,
            shift: true,
            cache_dir: None,
        }
    }
}

/// Mid-spectrum window sizes used for the θ and φ sweeps.
pub fn default_window_count(sites: usize) -> usize {
    match sites {
        8 => 46,
        10 => 68,
        12 => 100,
        14 => 200,
        l => ((1usize << l) / 20).clamp(10, 1 << l),
    }
}

fn invalid(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

/// Parses `value` as a TOML scalar or array, falling back to a bare string.
fn parse_value(raw: &str) -> Value {
    let doc = format!("v = {raw}");
    match doc.parse::<Table>() {
        Ok(mut t) => t.remove("v").unwrap_or_else(|| Value::String(raw.to_string())),
        Err(_) => Value::String(raw.to_string()),
    }
}

/// Accumulates configuration layers before validation.
#[derive(Clone, Debug, Default)]
pub struct ConfigBuilder {
    table: Table,
}

impl ConfigBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn file(mut self, path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| invalid(format!("cannot read {}: {e}", path.display())))?;
        let t: Table = text.parse().map_err(|e| invalid(format!("{}: {e}", path.display())))?;
        for (k, v) in t {
            if matches!(v, Value::Table(_)) {
                return Err(invalid(format!("nested table '{k}' not allowed; the config is flat")));
            }
            self.table.insert(k, v);
        }
        Ok(self)
    }

    /// A `key=value` override.
    pub fn assignment(mut self, pair: &str) -> Result<Self, CliError> {
        let (k, v) = pair
            .split_once('=')
            .ok_or_else(|| invalid(format!("expected key=value, got '{pair}'")))?;
        self.table.insert(k.trim().to_string(), parse_value(v.trim()));
        Ok(self)
    }

    pub fn set(mut self, key: &str, value: impl Into<Value>) -> Self {
        self.table.insert(key.to_string(), value.into());
        self
    }

    pub fn set_opt(self, key: &str, value: Option<impl Into<Value>>) -> Self {
        match value {
            Some(v) => self.set(key, v),
            None => self,
        }
    }

    pub fn build(self) -> Result<ExperimentConfig, CliError> {
        let cfg: ExperimentConfig = Value::Table(self.table).try_into().map_err(|e| invalid(format!("{e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }
}

impl ExperimentConfig {
    pub fn chain_model(&self) -> Result<ChainModel, CliError> {
        self.model.parse().map_err(|e| invalid(format!("{e}")))
    }

    pub fn couplings(&self) -> Couplings {
        Couplings { g: self.g, h: self.h, delta: self.delta, h1: self.h1, hl: self.hl }
    }

    /// `θ* = arctan(g/h)`, the axis of the on-site field `g σ^x + h σ^z`.
    pub fn theta_star(&self) -> f64 {
        self.g.atan2(self.h)
    }

    pub fn field_axis(&self) -> ChargeSpec {
        ChargeSpec::from_theta(self.theta_star())
    }

    pub fn charge_spec(&self) -> Result<ChargeSpec, CliError> {
        parse_charge(&self.charge, self.theta_star())
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let model = self.chain_model()?;
        let check_l = |l: usize| {
            if l < model.min_sites() || l > MAX_SITES {
                Err(invalid(format!("L = {l} outside {}..={MAX_SITES} for {model}", model.min_sites())))
            } else {
                Ok(())
            }
        };
        check_l(self.sites)?;
        for &l in &self.sizes {
            check_l(l)?;
        }
        for (name, v) in [("g", self.g), ("h", self.h), ("delta", self.delta), ("h1", self.h1), ("hl", self.hl)] {
            if !v.is_finite() {
                return Err(invalid(format!("{name} must be finite")));
            }
        }
        self.charge_spec()?;
        if self.samples < 2 {
            return Err(invalid("samples must be at least 2"));
        }
        if let Some(w) = self.window_width {
            if !(w > 0.0 && w.is_finite()) {
                return Err(invalid("window_width must be positive"));
            }
        }
        if self.window_count == Some(0) {
            return Err(invalid("window_count must be positive"));
        }
        if self.theta_points == 0 || self.phi_points == 0 {
            return Err(invalid("sweep grids need at least one point"));
        }
        if !(self.phi_start.is_finite() && self.phi_end.is_finite() && self.window_center.is_finite()) {
            return Err(invalid("sweep bounds and window center must be finite"));
        }
        if self.centers.iter().any(|c| !c.is_finite()) {
            return Err(invalid("window centers must be finite"));
        }
        Ok(())
    }
}

/// Parses a charge-axis description.
pub fn parse_charge(s: &str, theta_star: f64) -> Result<ChargeSpec, CliError> {
    let s = s.trim();
    let num = |v: &str| v.trim().parse::<f64>().map_err(|_| invalid(format!("bad number '{v}' in charge '{s}'")));
    let spec = match s {
        "x" => ChargeSpec::x(),
        "y" => ChargeSpec::y(),
        "z" => ChargeSpec::z(),
        "theta*" => ChargeSpec::from_theta(theta_star),
        _ => {
            if let Some(t) = s.strip_prefix("theta:") {
                ChargeSpec::from_theta(num(t)?)
            } else if let Some(p) = s.strip_prefix("phi:") {
                ChargeSpec::from_phi(theta_star, num(p)?)
            } else {
                let parts: Vec<&str> = s.split(',').collect();
                if parts.len() != 3 {
                    return Err(invalid(format!(
                        "charge '{s}' not one of x, y, z, theta*, theta:<rad>, phi:<rad>, nx,ny,nz"
                    )));
                }
                ChargeSpec::new(num(parts[0])?, num(parts[1])?, num(parts[2])?)
                    .map_err(|e| invalid(format!("{e}")))?
            }
        }
    };
    Ok(spec)
}
