use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::mesh::DEFAULT_LLOYD_ITERATIONS;
use crate::rbspace::{RbLibrary, DEFAULT_DEPTH, DEFAULT_SNAPSHOTS};
use crate::transfer::Restriction;
use crate::{Error, Result};

/// Mesh families: one hierarchy per finest cell count, each with `levels`
/// meshes whose cell counts shrink by 4.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MeshSection {
    pub families: Vec<usize>,
    pub levels: usize,
    pub seed: u64,
    pub lloyd_iterations: usize,
}

impl Default for MeshSection {
    fn default() -> Self {
        MeshSection {
            families: vec![512],
            levels: 4,
            seed: 1,
            lloyd_iterations: DEFAULT_LLOYD_ITERATIONS,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverSection {
    /// Values of `m = m1 = m2`.
    pub smoothing: Vec<usize>,
    /// Numbers of levels `J` used by the W-cycle (the finest `J` meshes).
    pub cycle_levels: Vec<usize>,
    /// rb complexities swept by `run iterations`.
    pub modes: Vec<usize>,
    /// rb complexity used by `run convergence`.
    pub convergence_modes: usize,
    pub tol: f64,
    pub max_iterations: usize,
    pub restriction: Restriction,
}

impl Default for SolverSection {
    fn default() -> Self {
        SolverSection {
            smoothing: vec![3, 6, 8],
            cycle_levels: vec![2, 3, 4],
            modes: vec![1, 8],
            convergence_modes: 1,
            tol: 1e-8,
            max_iterations: 200,
            restriction: Restriction::Algebraic,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RbSection {
    pub depth: usize,
    pub snapshots: usize,
    pub seed: u64,
    pub cache_dir: Option<PathBuf>,
    /// Polygon sizes trained by `train-rb`.
    pub train_sizes: Vec<usize>,
}

impl Default for RbSection {
    fn default() -> Self {
        RbSection {
            depth: DEFAULT_DEPTH,
            snapshots: DEFAULT_SNAPSHOTS,
            seed: 0,
            cache_dir: None,
            train_sizes: (3..=10).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ValidateSection {
    /// Finest cell counts of the manufactured-solution study.
    pub counts: Vec<usize>,
    pub seed: u64,
    /// Hierarchy used for the transfer and multigrid checks.
    pub finest: usize,
    pub levels: usize,
}

impl Default for ValidateSection {
    fn default() -> Self {
        ValidateSection {
            counts: vec![128, 512, 2048],
            seed: 10,
            finest: 512,
            levels: 3,
        }
    }
}

/// Everything an experiment depends on. Parsed from TOML; every key is
/// optional.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub mesh: MeshSection,
    pub solver: SolverSection,
    pub rb: RbSection,
    pub validate: ValidateSection,
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let c: ExperimentConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        c.validate()?;
        Ok(c)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        let m = &self.mesh;
        if m.levels == 0 {
            return bad("mesh.levels must be positive".into());
        }
        if m.families.is_empty() {
            return bad("mesh.families is empty".into());
        }
        let div = 4usize.checked_pow(m.levels as u32 - 1);
        for &n in &m.families {
            match div {
                Some(d) if n > 0 && n % d == 0 => {}
                _ => return bad(format!("family {n} is not a positive multiple of 4^{}", m.levels - 1)),
            }
        }
        let s = &self.solver;
        if s.smoothing.is_empty() || s.smoothing.contains(&0) {
            return bad("solver.smoothing needs positive entries".into());
        }
        if s.cycle_levels.is_empty() || s.cycle_levels.iter().any(|&j| j == 0 || j > m.levels) {
            return bad(format!("solver.cycle_levels must lie in 1..={}", m.levels));
        }
        if s.modes.is_empty() {
            return bad("solver.modes is empty".into());
        }
        if !(s.tol > 0.0 && s.tol < 1.0) {
            return bad(format!("solver.tol = {} is not in (0, 1)", s.tol));
        }
        if s.max_iterations == 0 {
            return bad("solver.max_iterations must be positive".into());
        }
        let r = &self.rb;
        if !(1..=8).contains(&r.depth) || r.snapshots == 0 {
            return bad("rb.depth must be in 1..=8 and rb.snapshots positive".into());
        }
        if r.train_sizes.iter().any(|&n| n < 3) {
            return bad("rb.train_sizes entries must be at least 3".into());
        }
        let v = &self.validate;
        if v.counts.len() < 2 || v.counts.contains(&0) {
            return bad("validate.counts needs at least two positive counts".into());
        }
        if v.levels < 2 || v.finest % 4usize.pow(v.levels as u32 - 1) != 0 {
            return bad("validate.finest must be divisible by 4^(levels-1) with levels >= 2".into());
        }
        Ok(())
    }

    pub fn library(&self) -> RbLibrary {
        let lib = RbLibrary::new(self.rb.depth, self.rb.snapshots, self.rb.seed);
        match &self.rb.cache_dir {
            Some(d) => lib.with_cache_dir(d),
            None => lib,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_text_gives_defaults() {
        assert_eq!(ExperimentConfig::from_toml("").unwrap(), ExperimentConfig::default());
    }

    #[test]
    fn round_trip() {
        let mut c = ExperimentConfig::default();
        c.mesh.families = vec![256, 1024];
        c.solver.restriction = Restriction::L2Projection;
        c.rb.cache_dir = Some("cache".into());
        assert_eq!(ExperimentConfig::from_toml(&c.to_toml()).unwrap(), c);
    }

    #[test]
    fn rejects_bad_values() {
        for text in [
            "[mesh]\nfamilies = [500]",
            "[mesh]\nlevels = 0",
            "[solver]\ncycle_levels = [5]",
            "[solver]\ntol = 0.0",
            "[solver]\nrestriction = \"nearest\"",
            "[rb]\ndepth = 0",
            "[unknown]\nx = 1",
        ] {
            assert!(matches!(ExperimentConfig::from_toml(text), Err(Error::Config(_))), "{text}");
        }
    }
}
