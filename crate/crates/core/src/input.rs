//! Serialized problem descriptions: potentials given as expressions, CSV
//! files or inline samples, and the inverse-problem input document.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::forward::SpectralSequence;
use crate::function_space::{
    read_potential_file, Grid, GridFunction, ProblemConfig, Samples, DEFAULT_INTERVALS,
};

type C = Complex64;

/// A potential: an expression in `t`, a CSV path, or inline samples.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PotentialSpec {
    Inline(String),
    Expr { expr: String },
    Csv { csv: PathBuf },
    Samples { x: Vec<f64>, values: Vec<C> },
}

impl PotentialSpec {
    /// Samples the potential on `grid`; relative CSV paths resolve against `base`.
    pub fn resolve(&self, grid: Arc<Grid>, base: &Path) -> Result<GridFunction> {
        match self {
            PotentialSpec::Inline(src) | PotentialSpec::Expr { expr: src } => {
                let e = Expr::parse(src)?;
                Ok(GridFunction::from_fn(grid, |t| e.eval(t)))
            }
            PotentialSpec::Csv { csv } => read_potential_file(&base.join(csv))?.onto(grid),
            PotentialSpec::Samples { x, values } => Samples::new(x.clone(), values.clone())?.onto(grid),
        }
    }

    pub fn zero() -> Self {
        PotentialSpec::Inline("0".into())
    }
}

/// `(α, β, a, p)` plus the working-grid resolution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemDoc {
    pub alpha: u8,
    pub beta: u8,
    pub a: f64,
    #[serde(default = "PotentialSpec::zero")]
    pub p: PotentialSpec,
    #[serde(default)]
    pub intervals: Option<usize>,
}

impl ProblemDoc {
    pub fn build(&self, base: &Path) -> Result<ProblemConfig> {
        let grid = Arc::new(Grid::working(self.a, self.intervals.unwrap_or(DEFAULT_INTERVALS))?);
        let p = self.p.resolve(grid, base)?;
        ProblemConfig::new(self.alpha, self.beta, self.a, p)
    }
}

/// The JSON document `{config, spectrum, extra_xi, N}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InverseInputDoc {
    pub config: ProblemDoc,
    pub spectrum: Vec<C>,
    #[serde(default)]
    pub extra_xi: BTreeMap<String, C>,
    #[serde(rename = "N")]
    pub n: usize,
}

/// Validated inverse-problem data.
#[derive(Debug, Clone)]
pub struct InverseInput {
    pub config: ProblemConfig,
    pub spectrum: SpectralSequence,
    pub extra_xi: BTreeMap<usize, C>,
    pub n: usize,
}

impl InverseInputDoc {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        serde_json::from_str(&text).map_err(|e| Error::Parse {
            path: path.display().to_string(),
            line: e.line(),
            message: e.to_string(),
        })
    }

    pub fn build(&self, base: &Path) -> Result<InverseInput> {
        let config = self.config.build(base)?;
        if self.spectrum.len() < self.n {
            return Err(Error::Structural(format!(
                "N = {} but only {} eigenvalues given",
                self.n,
                self.spectrum.len()
            )));
        }
        let mut extra_xi = BTreeMap::new();
        for (k, v) in &self.extra_xi {
            let idx: usize = k
                .trim()
                .parse()
                .map_err(|_| Error::Structural(format!("extra_xi key `{k}` is not an index")))?;
            if idx == 0 || idx > self.n {
                return Err(Error::Structural(format!("extra_xi index {idx} outside 1..={}", self.n)));
            }
            extra_xi.insert(idx, *v);
        }
        Ok(InverseInput {
            config,
            spectrum: SpectralSequence::from_values(self.spectrum[..self.n].to_vec()),
            extra_xi,
            n: self.n,
        })
    }
}

impl InverseInput {
    pub fn to_doc(&self, p: PotentialSpec, intervals: Option<usize>) -> InverseInputDoc {
        InverseInputDoc {
            config: ProblemDoc {
                alpha: self.config.alpha(),
                beta: self.config.beta(),
                a: self.config.a(),
                p,
                intervals,
            },
            spectrum: self.spectrum.lambda.clone(),
            extra_xi: self.extra_xi.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
            n: self.n,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_inverse_document() {
        let text = r#"{
            "config": {"alpha": 0, "beta": 0, "a": 1.5707963267948966, "p": "10*exp(i*t)", "intervals": 64},
            "spectrum": [[1.0, 0.0], [4.0, 0.0], [9.0, 0.5]],
            "extra_xi": {"2": [0.25, -1.0]},
            "N": 2
        }"#;
        let doc = InverseInputDoc::from_json(text).unwrap();
        let input = doc.build(Path::new(".")).unwrap();
        assert_eq!(input.spectrum.count(), 2);
        assert_eq!(input.extra_xi[&2], C::new(0.25, -1.0));
        assert!((input.config.p().values()[0] - 10.0).norm() < 1e-14);
        let back = serde_json::to_string(&doc).unwrap();
        assert_eq!(InverseInputDoc::from_json(&back).unwrap(), doc);
    }

    #[test]
    fn potential_variants() {
        let grid = Arc::new(Grid::uniform(16).unwrap());
        let e: PotentialSpec = serde_json::from_str(r#"{"expr": "t"}"#).unwrap();
        let s: PotentialSpec = serde_json::from_str(
            r#"{"x": [0.0, 1.0, 2.0, 3.141592653589793], "values": [[0,0],[1,0],[2,0],[3.141592653589793,0]]}"#,
        )
        .unwrap();
        let a = e.resolve(grid.clone(), Path::new(".")).unwrap();
        let b = s.resolve(grid, Path::new(".")).unwrap();
        assert!(a.distance_l2(&b).unwrap() < 1e-12);
    }

    #[test]
    fn rejects_bad_extra_index() {
        let text = r#"{"config": {"alpha": 0, "beta": 0, "a": 1.0}, "spectrum": [[1,0]], "extra_xi": {"5": [0,0]}, "N": 1}"#;
        assert!(InverseInputDoc::from_json(text).unwrap().build(Path::new(".")).is_err());
    }
}
