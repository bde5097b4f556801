//! Run configuration: JSON file, overridden field by field from the command line.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io::rng::DEFAULT_SEED;
use crate::model::{GroupUnionSpec, WeightRule, WeightSeq};
use crate::semigroup::{default_beta_grid, parse_rational, Rational};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Construction {
    #[default]
    SingleOperator,
    Semigroup,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Fixed by the command when absent.
    pub construction: Option<Construction>,
    pub orders: Vec<usize>,
    pub weight_rule: WeightRule,
    /// Depth of certified sums.
    pub truncation_depth: usize,
    pub grid_size: usize,
    pub exclusion_radius: f64,
    pub certificate_block: usize,
    /// `N` of the finite section.
    pub section_depth: usize,
    pub renormalize: bool,
    pub n_max: usize,
    pub beta_grid: Vec<f64>,
    pub cert_points: Vec<String>,
    pub occurrence: u64,
    pub chain_depth: usize,
    pub evolve_time: f64,
    pub evolve_steps: usize,
    pub seed: u64,
    pub suites: Vec<String>,
    pub out_dir: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            construction: None,
            orders: vec![2, 3],
            weight_rule: WeightRule::Dyadic,
            truncation_depth: crate::DEFAULT_DEPTH,
            grid_size: 3600,
            exclusion_radius: crate::scanner::DEFAULT_EXCLUSION_RADIUS,
            certificate_block: crate::scanner::DEFAULT_CERTIFICATE_BLOCK,
            section_depth: 12,
            renormalize: true,
            n_max: 12,
            beta_grid: default_beta_grid(),
            cert_points: ["1", "3/2", "2", "7/3"].map(String::from).to_vec(),
            occurrence: 1,
            chain_depth: crate::semigroup::DEFAULT_CHAIN_DEPTH,
            evolve_time: 50.0,
            evolve_steps: 100,
            seed: DEFAULT_SEED,
            suites: crate::verify::SUITES.map(String::from).to_vec(),
            out_dir: PathBuf::from("out"),
        }
    }
}

fn invalid(field: &str, msg: impl std::fmt::Display) -> Error {
    Error::Invalid(format!("{field}: {msg}"))
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| invalid("config", format!("cannot read {}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| invalid("config", format!("{}: {e}", path.display())))
    }

    pub fn group_spec(&self) -> Result<GroupUnionSpec> {
        GroupUnionSpec::new(self.orders.clone())
    }

    pub fn single_weights(&self) -> Result<WeightSeq> {
        WeightSeq::single_operator(self.group_spec()?.dim(), self.weight_rule)
    }

    pub fn semigroup_weights(&self) -> Result<WeightSeq> {
        WeightSeq::semigroup(self.weight_rule)
    }

    pub fn cert_rationals(&self) -> Result<Vec<Rational>> {
        self.cert_points
            .iter()
            .map(|s| {
                let r = parse_rational(s)?;
                if r < Rational::from_integer(1) {
                    return Err(invalid("cert_points", format!("{s} is below 1")));
                }
                Ok(r)
            })
            .collect()
    }

    /// Pins the construction a command needs; a config naming the other one is rejected.
    pub fn require(&mut self, c: Construction) -> Result<()> {
        match self.construction {
            Some(found) if found != c => Err(invalid(
                "construction",
                format!("this command needs {c:?}, the config names {found:?}"),
            )),
            _ => {
                self.construction = Some(c);
                Ok(())
            }
        }
    }

    /// Checks every field against the preconditions of the computations.
    pub fn validate(&self) -> Result<()> {
        match self.construction.unwrap_or_default() {
            Construction::SingleOperator => {
                self.single_weights()?;
            }
            Construction::Semigroup => {
                self.semigroup_weights()?;
            }
        }
        self.group_spec()?;
        if self.truncation_depth == 0 || self.truncation_depth > 1000 {
            return Err(invalid("truncation_depth", "must lie in 1..=1000"));
        }
        if self.grid_size < 8 {
            return Err(invalid("grid_size", "must be >= 8"));
        }
        if !(self.exclusion_radius > 0.0 && self.exclusion_radius < 1.0) {
            return Err(invalid("exclusion_radius", "must lie in (0, 1)"));
        }
        if self.certificate_block == 0 {
            return Err(invalid("certificate_block", "must be >= 1"));
        }
        if self.section_depth == 0 || self.section_depth > 20 {
            return Err(invalid("section_depth", "must lie in 1..=20"));
        }
        if self.n_max < 2 || self.n_max > 20 {
            return Err(invalid("n_max", "must lie in 2..=20"));
        }
        if let Some(b) = self.beta_grid.iter().find(|b| !(b.abs() < 1.0)) {
            return Err(invalid("beta_grid", format!("{b} is outside (-1, 1)")));
        }
        self.cert_rationals()?;
        if self.occurrence == 0 {
            return Err(invalid("occurrence", "must be >= 1"));
        }
        if self.chain_depth == 0 || self.chain_depth > 200 {
            return Err(invalid("chain_depth", "must lie in 1..=200"));
        }
        if !(self.evolve_time >= 0.0 && self.evolve_time.is_finite()) {
            return Err(invalid("evolve_time", "must be finite and >= 0"));
        }
        if self.evolve_steps == 0 {
            return Err(invalid("evolve_steps", "must be >= 1"));
        }
        if let Some(s) = self.suites.iter().find(|s| !crate::verify::SUITES.contains(&s.as_str())) {
            return Err(invalid(
                "suites",
                format!("unknown suite {s:?}; expected one of {}", crate::verify::SUITES.join(", ")),
            ));
        }
        Ok(())
    }
}
