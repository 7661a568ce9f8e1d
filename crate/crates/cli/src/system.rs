//! JSON system files.

use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};
use galilean_core::connection::{build_connection, NormalizationChoice, SecondOrderSystem};
use galilean_core::expr::parse;
use galilean_core::{Expr, GalileanConnection};
use serde::{Deserialize, Serialize};

pub const MAX_DIM: usize = 8;

/// On-disk description of `ẍ + Γ(t, x, ẋ) = 0` and a normalization.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SystemFile {
    pub n: usize,
    pub gamma: Vec<String>,
    #[serde(rename = "D", default, skip_serializing_if = "Option::is_none")]
    pub d: Option<Vec<Vec<String>>>,
    #[serde(rename = "Qsym", default, skip_serializing_if = "Option::is_none")]
    pub qsym: Option<Vec<Vec<Vec<String>>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
}

/// A validated system file.
#[derive(Clone, Debug)]
pub struct LoadedSystem {
    pub file: SystemFile,
    pub system: SecondOrderSystem,
    pub normalization: NormalizationChoice,
}

impl LoadedSystem {
    pub fn connection(&self) -> Result<GalileanConnection> {
        Ok(build_connection(&self.system, &self.normalization)?)
    }

    pub fn n(&self) -> usize {
        self.file.n
    }

    pub fn has_normalization(&self) -> bool {
        self.normalization != NormalizationChoice::zero(self.n())
    }
}

fn parse_field(src: &str, n: usize, field: impl FnOnce() -> String) -> Result<Expr> {
    parse(src, n).with_context(|| format!("in {}", field()))
}

impl SystemFile {
    pub fn from_json(text: &str) -> Result<SystemFile> {
        Ok(serde_json::from_str(text)?)
    }

    /// Checks the shape constraints and parses every expression.
    pub fn validate(self) -> Result<LoadedSystem> {
        let n = self.n;
        if !(1..=MAX_DIM).contains(&n) {
            bail!("n must be between 1 and {MAX_DIM}, got {n}");
        }
        if self.gamma.len() != n {
            bail!("gamma has {} entries, expected {n}", self.gamma.len());
        }
        let gamma = self
            .gamma
            .iter()
            .enumerate()
            .map(|(i, s)| parse_field(s, n, || format!("gamma[{}]", i + 1)))
            .collect::<Result<Vec<_>>>()?;
        let system = SecondOrderSystem::new(gamma)?;

        let d = match &self.d {
            None => vec![vec![Expr::ZERO; n]; n],
            Some(rows) => {
                if rows.len() != n || rows.iter().any(|r| r.len() != n) {
                    bail!("D must be {n}×{n}");
                }
                rows.iter()
                    .enumerate()
                    .map(|(i, row)| {
                        row.iter()
                            .enumerate()
                            .map(|(j, s)| parse_field(s, n, || format!("D[{}][{}]", i + 1, j + 1)))
                            .collect::<Result<Vec<_>>>()
                    })
                    .collect::<Result<Vec<_>>>()?
            }
        };
        let qsym = match &self.qsym {
            None => vec![vec![vec![Expr::ZERO; n]; n]; n],
            Some(blocks) => {
                if blocks.len() != n || blocks.iter().any(|b| b.len() != n || b.iter().any(|r| r.len() != n)) {
                    bail!("Qsym must be {n}×{n}×{n}");
                }
                let mut out = Vec::with_capacity(n);
                for (i, block) in blocks.iter().enumerate() {
                    let mut rows = Vec::with_capacity(n);
                    for (j, row) in block.iter().enumerate() {
                        let parsed = row
                            .iter()
                            .enumerate()
                            .map(|(k, s)| parse_field(s, n, || format!("Qsym[{}][{}][{}]", i + 1, j + 1, k + 1)))
                            .collect::<Result<Vec<_>>>()?;
                        rows.push(parsed);
                    }
                    out.push(rows);
                }
                out
            }
        };
        let normalization = NormalizationChoice::new(d, qsym)?;
        Ok(LoadedSystem { file: self, system, normalization })
    }
}

pub fn load_system(path: &Path) -> Result<LoadedSystem> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    SystemFile::from_json(&text)
        .with_context(|| format!("parsing {}", path.display()))?
        .validate()
        .with_context(|| format!("validating {}", path.display()))
}
