//! The TOML run configuration.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, Context, Result};
use frozen_sl::function_space::ProblemConfig;
use frozen_sl::input::{PotentialSpec, ProblemDoc};
use frozen_sl::tolerances::Tolerances;
use frozen_sl::Complex64 as C;
use serde::Deserialize;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub problem: Problem,
    #[serde(default)]
    pub potential: Potentials,
    #[serde(default)]
    pub run: RunSection,
    #[serde(default)]
    pub inverse: InverseSection,
    #[serde(default)]
    pub input: InputSection,
    #[serde(default)]
    pub isospectral: IsospectralSection,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Problem {
    pub alpha: u8,
    pub beta: u8,
    pub a: f64,
    pub intervals: Option<usize>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Potentials {
    pub p: Option<PotentialSpec>,
    pub q: Option<PotentialSpec>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSection {
    #[serde(rename = "N")]
    pub n: Option<usize>,
    #[serde(default)]
    pub tolerances: Tolerances,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InverseSection {
    /// A complete inverse-problem JSON document.
    pub input: Option<PathBuf>,
    #[serde(default)]
    pub force: bool,
    /// `ξ_n` on `Ω` when the spectrum comes from `[input]`.
    #[serde(default)]
    pub extra_xi: BTreeMap<String, C>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InputSection {
    pub spectrum: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IsospectralSection {
    #[serde(default)]
    pub variant: Vec<Variant>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Variant {
    pub name: Option<String>,
    #[serde(default)]
    pub extra_xi: BTreeMap<String, C>,
}

/// A parsed configuration together with the directory its relative paths resolve against.
#[derive(Debug, Clone)]
pub struct Loaded {
    pub base: PathBuf,
    pub config: RunConfig,
}

impl Loaded {
    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
        let config = parse(&text, path)?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok(Self {
            base,
            config,
        })
    }

    pub fn resolve(&self, rel: &Path) -> PathBuf {
        self.base.join(rel)
    }

    pub fn problem_doc(&self) -> ProblemDoc {
        let pr = &self.config.problem;
        ProblemDoc {
            alpha: pr.alpha,
            beta: pr.beta,
            a: pr.a,
            p: absolute(self.config.potential.p.clone().unwrap_or_else(PotentialSpec::zero), &self.base),
            intervals: pr.intervals,
        }
    }

    pub fn problem(&self) -> Result<ProblemConfig> {
        self.problem_doc().build(&self.base).context("building [problem]")
    }

    pub fn truncation(&self, cli: Option<usize>) -> Result<usize> {
        cli.or(self.config.run.n)
            .ok_or_else(|| anyhow!("no truncation: pass --N or set N in [run]"))
    }

    pub fn tolerances(&self) -> Tolerances {
        self.config.run.tolerances
    }
}

/// Makes a relative CSV path absolute so the potential resolves from any directory.
pub fn absolute(spec: PotentialSpec, base: &Path) -> PotentialSpec {
    match spec {
        PotentialSpec::Csv { csv } if csv.is_relative() => PotentialSpec::Csv { csv: base.join(csv) },
        other => other,
    }
}

fn parse(text: &str, path: &Path) -> Result<RunConfig> {
    toml::from_str(text).map_err(|e| {
        let line = e.span().map_or(0, |s| text[..s.start].matches('\n').count() + 1);
        anyhow!("{}: line {line}: {}", path.display(), e.message())
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn full_configuration() {
        let text = r#"
            [problem]
            alpha = 0
            beta = 1
            a = 1.0

            [potential.p]
            expr = "10*exp(i*t)"

            [potential.q]
            csv = "q.csv"

            [run]
            N = 12

            [run.tolerances]
            snap = 1e-7

            [[isospectral.variant]]
            name = "zero"
            extra_xi = { "2" = [0.0, 0.0] }
        "#;
        let cfg = parse(text, Path::new("c.toml")).unwrap();
        assert_eq!(cfg.run.n, Some(12));
        assert_eq!(cfg.run.tolerances.snap, 1e-7);
        assert_eq!(cfg.run.tolerances.rtol, Tolerances::default().rtol);
        assert_eq!(cfg.potential.q, Some(PotentialSpec::Csv { csv: "q.csv".into() }));
        assert_eq!(cfg.isospectral.variant[0].extra_xi["2"], C::new(0.0, 0.0));
    }

    #[test]
    fn inline_potentials() {
        let cfg = parse("[problem]\nalpha = 0\nbeta = 0\na = 1.0\n[potential]\nq = \"sin(t)\"\n", Path::new("c.toml")).unwrap();
        assert_eq!(cfg.potential.q, Some(PotentialSpec::Inline("sin(t)".into())));
    }

    #[test]
    fn errors_name_the_line() {
        let err = parse("[problem]\nalpha = 0\nbeta = 0\nb = 1.0\n", Path::new("c.toml")).unwrap_err();
        assert!(err.to_string().starts_with("c.toml: line 4:"), "{err}");
    }
}
