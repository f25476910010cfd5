//! Layered run parameters: preset defaults, then a TOML file, then flags.

use std::path::Path;

use qce_core::constellation::Modulation;
use qce_core::sim::Scheme;
use serde::Deserialize;

use crate::CliError;

/// One layer of optional settings. The TOML file uses the same keys.
#[derive(Clone, Debug, Default, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct Layer {
    pub preset: Option<String>,
    pub n: Option<usize>,
    pub m: Option<usize>,
    pub q: Option<usize>,
    pub modulation: Option<String>,
    pub precoder: Option<String>,
    pub ptx_min_db: Option<f64>,
    pub ptx_max_db: Option<f64>,
    pub ptx_step_db: Option<f64>,
    pub nu: Option<f64>,
    pub channels: Option<usize>,
    pub vectors: Option<usize>,
    pub block_len: Option<usize>,
    pub seed: Option<u64>,
    pub lp_max_iterations: Option<usize>,
}

macro_rules! overlay {
    ($base:expr, $top:expr, $($field:ident),*) => {
        $( if $top.$field.is_some() { $base.$field = $top.$field.clone(); } )*
    };
}

impl Layer {
    pub fn from_file(path: &Path) -> Result<Layer, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
    }

    /// `self` with every field set in `top` replaced.
    pub fn overlay(mut self, top: &Layer) -> Layer {
        overlay!(
            self, top, preset, n, m, q, modulation, precoder, ptx_min_db, ptx_max_db,
            ptx_step_db, nu, channels, vectors, block_len, seed, lp_max_iterations
        );
        self
    }
}

/// Fully resolved parameters. Fields left `None` take the experiment's own
/// list (e.g. the `N` and `M` grid of the α tables).
#[derive(Clone, Debug, PartialEq)]
pub struct Params {
    pub n: Option<usize>,
    pub m: Option<usize>,
    pub q: Option<usize>,
    pub modulation: Option<Modulation>,
    pub precoder: Option<Scheme>,
    pub ptx_min_db: f64,
    pub ptx_max_db: f64,
    pub ptx_step_db: f64,
    pub nu: Option<f64>,
    pub channels: usize,
    pub vectors: usize,
    pub block_len: usize,
    pub seed: u64,
    pub lp_max_iterations: Option<usize>,
}

impl Params {
    pub fn resolve(layer: &Layer) -> Result<Params, CliError> {
        let modulation = layer
            .modulation
            .as_deref()
            .map(str::parse::<Modulation>)
            .transpose()
            .map_err(|e| CliError::Config(e.to_string()))?;
        let precoder = layer
            .precoder
            .as_deref()
            .map(str::parse::<Scheme>)
            .transpose()
            .map_err(|e| CliError::Config(e.to_string()))?;
        let p = Params {
            n: layer.n,
            m: layer.m,
            q: layer.q,
            modulation,
            precoder,
            ptx_min_db: layer.ptx_min_db.unwrap_or(-15.0),
            ptx_max_db: layer.ptx_max_db.unwrap_or(30.0),
            ptx_step_db: layer.ptx_step_db.unwrap_or(1.0),
            nu: layer.nu,
            channels: layer.channels.unwrap_or(20),
            vectors: layer.vectors.unwrap_or(128),
            block_len: layer.block_len.unwrap_or(128),
            seed: layer.seed.unwrap_or(1),
            lp_max_iterations: layer.lp_max_iterations,
        };
        if !(p.ptx_step_db > 0.0) || p.ptx_max_db < p.ptx_min_db {
            return Err(CliError::Config(format!(
                "bad power grid: {} to {} dB in steps of {}",
                p.ptx_min_db, p.ptx_max_db, p.ptx_step_db
            )));
        }
        if p.channels == 0 || p.vectors == 0 {
            return Err(CliError::Config("--channels and --vectors must be positive".into()));
        }
        Ok(p)
    }

    /// Effective parameters as `key: value` metadata lines. Unset list-valued
/// fields print as `grid`; the experiment echoes the grid itself.
    pub fn echo(&self) -> Vec<(String, String)> {
        let opt = |v: Option<String>| v.unwrap_or_else(|| "grid".into());
        vec![
            ("n".into(), opt(self.n.map(|v| v.to_string()))),
            ("m".into(), opt(self.m.map(|v| v.to_string()))),
            ("q".into(), opt(self.q.map(|v| v.to_string()))),
            ("modulation".into(), opt(self.modulation.map(|v| v.to_string()))),
            ("precoder".into(), opt(self.precoder.map(|v| v.to_string()))),
            ("ptx_min_db".into(), self.ptx_min_db.to_string()),
            ("ptx_max_db".into(), self.ptx_max_db.to_string()),
            ("ptx_step_db".into(), self.ptx_step_db.to_string()),
            ("nu".into(), opt(self.nu.map(|v| v.to_string()))),
            ("channels".into(), self.channels.to_string()),
            ("vectors".into(), self.vectors.to_string()),
            ("block_len".into(), self.block_len.to_string()),
            ("seed".into(), self.seed.to_string()),
            (
                "lp_max_iterations".into(),
                self.lp_max_iterations.map_or("auto".into(), |v| v.to_string()),
            ),
        ]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn later_layers_win() {
        let base = Layer { n: Some(64), seed: Some(1), ..Default::default() };
        let file: Layer = toml::from_str("n = 32\nmodulation = \"16QAM\"").unwrap();
        let flags = Layer { seed: Some(9), ..Default::default() };
        let p = Params::resolve(&base.overlay(&file).overlay(&flags)).unwrap();
        assert_eq!(p.n, Some(32));
        assert_eq!(p.seed, 9);
        assert_eq!(p.modulation, Some(Modulation::QAM16));
        assert_eq!(p.channels, 20);
    }

    #[test]
    fn unknown_keys_and_values_are_config_errors() {
        assert!(toml::from_str::<Layer>("antennas = 3").is_err());
        let bad = Layer { modulation: Some("12QAM".into()), ..Default::default() };
        assert!(matches!(Params::resolve(&bad), Err(CliError::Config(_))));
        let bad = Layer { ptx_step_db: Some(0.0), ..Default::default() };
        assert!(matches!(Params::resolve(&bad), Err(CliError::Config(_))));
    }
}
