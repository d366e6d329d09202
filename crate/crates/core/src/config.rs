use serde::{Deserialize, Serialize};

use crate::error::{GlueError, Result};

/// Numerical tolerances shared by the analysis routines.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(default)]
pub struct Tolerances {
    /// Residual below which a push-through relation is accepted.
    pub push_tol: f64,
    /// Ratio σ2/σ1 below which a realigned matrix counts as a product.
    pub factor_tol: f64,
    /// Spread of the Schmidt spectrum below which it counts as flat.
    pub flat_tol: f64,
    /// Relative singular value cutoff for ranks and null spaces.
    pub rank_tol: f64,
    /// Residual allowed for the right-canonical condition.
    pub canonical_tol: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            push_tol: 1e-8,
            factor_tol: 1e-6,
            flat_tol: 1e-8,
            rank_tol: 1e-10,
            canonical_tol: 1e-9,
        }
    }
}

/// Run configuration: tolerances plus resource limits and the seed.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(default)]
pub struct Config {
    pub tol: Tolerances,
    pub max_depth: usize,
    /// Maximum number of amplitudes any dense state may hold.
    pub memory_guard: u128,
    pub seed: u64,
    /// Worker threads for trial batches; 0 means rayon's default.
    pub threads: usize,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            tol: Tolerances::default(),
            max_depth: 64,
            memory_guard: 1 << 24,
            seed: 0,
            threads: 0,
        }
    }
}

impl Config {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Config = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.max_depth == 0 {
            return Err(GlueError::InvalidArg("max_depth must be positive".into()));
        }
        let t = &self.tol;
        for (name, v) in [
            ("push_tol", t.push_tol),
            ("factor_tol", t.factor_tol),
            ("flat_tol", t.flat_tol),
            ("rank_tol", t.rank_tol),
            ("canonical_tol", t.canonical_tol),
        ] {
            if !(v > 0.0 && v < 1e-2) {
                return Err(GlueError::InvalidArg(format!("{name} must lie in (0, 1e-2), got {v}")));
            }
        }
        Ok(())
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tolerance_range() {
        assert!(Config::from_json(r#"{"tol": {"flat_tol": 0.5}}"#).is_err());
        assert!(Config::from_json(r#"{"tol": {"rank_tol": 0}}"#).is_err());
        assert!(Config::from_json(r#"{"max_depth": 0}"#).is_err());
    }

    #[test]
    fn partial_json_fills_defaults() {
        let cfg = Config::from_json(r#"{"seed": 7, "tol": {"push_tol": 1e-6}}"#).unwrap();
        assert_eq!(cfg.seed, 7);
        assert_eq!(cfg.tol.push_tol, 1e-6);
        assert_eq!(cfg.tol.factor_tol, 1e-6);
        assert_eq!(cfg.max_depth, 64);
    }

    #[test]
    fn zero_depth_rejected() {
        assert!(Config::from_json(r#"{"max_depth": 0}"#).is_err());
    }
}
