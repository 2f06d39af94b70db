use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::criteria::CriterionId;
use crate::error::{Error, Result};

/// Thresholds and switches for the detectors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DetectorConfig {
    /// Longest-option rule fires when the longest distractor is shorter than
    /// this fraction of the keyed option. 1.0 means "longer by any amount".
    pub longest_option_ratio: f64,
    /// Per-domain overrides of `longest_option_ratio`.
    pub domain_longest_ratio: BTreeMap<String, f64>,
    pub implausible_sim_threshold: f64,
    /// Minimum embedding cosine for two lemmas to count as associated.
    pub synonym_threshold: f64,
    pub wellformedness_threshold: f64,
    pub min_blank_run: usize,
    pub logical_margin: f64,
    pub near_dup_edit: f64,
    pub near_dup_embedding: f64,
    /// Option pairs at least this close are sent to the LLM as possible
    /// second correct answers.
    pub mtoc_candidate_threshold: f64,
    pub llm_enabled: bool,
    /// Criteria switched off (absent means enabled).
    pub enabled: BTreeMap<CriterionId, bool>,
}

impl Default for DetectorConfig {
    fn default() -> Self {
        DetectorConfig {
            longest_option_ratio: 0.8,
            domain_longest_ratio: BTreeMap::new(),
            implausible_sim_threshold: 0.40,
            synonym_threshold: 0.55,
            wellformedness_threshold: 0.45,
            min_blank_run: 3,
            logical_margin: 0.15,
            near_dup_edit: 0.9,
            near_dup_embedding: 0.95,
            mtoc_candidate_threshold: 0.85,
            llm_enabled: true,
            enabled: BTreeMap::new(),
        }
    }
}

fn check(name: &str, v: f64, lo: f64, hi: f64, lo_open: bool) -> Result<()> {
    let ok = v.is_finite() && v <= hi && if lo_open { v > lo } else { v >= lo };
    if ok {
        Ok(())
    } else {
        let l = if lo_open { "(" } else { "[" };
        Err(Error::Config(format!("{name} = {v} is outside {l}{lo}, {hi}]")))
    }
}

impl DetectorConfig {
    pub fn validate(&self) -> Result<()> {
        check("longest_option_ratio", self.longest_option_ratio, 0.0, 1.0, true)?;
        for (d, r) in &self.domain_longest_ratio {
            check(&format!("domain_longest_ratio.{d}"), *r, 0.0, 1.0, true)?;
        }
        check("implausible_sim_threshold", self.implausible_sim_threshold, -1.0, 1.0, false)?;
        check("synonym_threshold", self.synonym_threshold, -1.0, 1.0, false)?;
        check("wellformedness_threshold", self.wellformedness_threshold, 0.0, 1.0, false)?;
        check("logical_margin", self.logical_margin, 0.0, 2.0, false)?;
        check("near_dup_edit", self.near_dup_edit, 0.0, 1.0, true)?;
        check("near_dup_embedding", self.near_dup_embedding, 0.0, 1.0, true)?;
        check("mtoc_candidate_threshold", self.mtoc_candidate_threshold, -1.0, 1.0, false)?;
        if self.min_blank_run == 0 {
            return Err(Error::Config("min_blank_run must be at least 1".into()));
        }
        Ok(())
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: DetectorConfig =
            toml::from_str(text).map_err(|e| Error::Config(format!("detector config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::io(format!("reading {}", path.display()), e))?;
        Self::from_toml_str(&text).map_err(|e| match e {
            Error::Config(m) => Error::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn is_enabled(&self, c: CriterionId) -> bool {
        self.enabled.get(&c).copied().unwrap_or(true)
    }

    pub fn longest_ratio_for(&self, domain: &str) -> f64 {
        self.domain_longest_ratio
            .get(domain)
            .copied()
            .unwrap_or(self.longest_option_ratio)
    }

    /// Short hex digest of the canonical JSON form.
    pub fn digest(&self) -> String {
        let json = serde_json::to_string(self).expect("config serializes");
        let d = Sha256::digest(json.as_bytes());
        hex::encode(&d[..8])
    }
}
