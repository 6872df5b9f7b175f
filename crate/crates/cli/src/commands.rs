//! One function per subcommand. Each writes its outputs into `out` and reports
//! whether the input passed the admissibility checks.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use frozen_sl::basis_system::{build_basis, BasisSystem};
use frozen_sl::char_fn::{validate_spectrum, ValidationReport};
use frozen_sl::forward::{extract_xi, spectrum_with, SpectralSequence};
use frozen_sl::function_space::{write_potential_csv, ProblemConfig};
use frozen_sl::input::{InverseInput, InverseInputDoc};
use frozen_sl::inverse::{isospectral_family, recover_potential};
use frozen_sl::unperturbed::{compute_unperturbed_with, read_spectrum_csv, write_spectrum_csv};
use frozen_sl::Complex64 as C;
use log::info;
use serde::Serialize;

use crate::config::{absolute, Loaded};

/// What a command did, for the exit status and the manifest.
pub struct Outcome {
    pub admissible: bool,
    pub n: usize,
    pub inputs: Vec<PathBuf>,
}

fn write_json(path: &Path, value: &impl Serialize) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(
        File::create(path).with_context(|| format!("creating {}", path.display()))?,
    ))
}

fn basis_for(loaded: &Loaded, cfg: &ProblemConfig, n: usize) -> Result<BasisSystem> {
    info!("unperturbed data and basis for N = {n}");
    let unp = compute_unperturbed_with(cfg, n, &loaded.tolerances()).context("unperturbed spectrum")?;
    build_basis(&unp).context("basis system")
}

#[derive(Serialize)]
struct XiReport<'a> {
    #[serde(rename = "N")]
    n: usize,
    omega_set: &'a [usize],
    xi: &'a [C],
}

pub fn forward(loaded: &Loaded, n: Option<usize>, out: &Path) -> Result<Outcome> {
    let n = loaded.truncation(n)?;
    let cfg = loaded.problem()?;
    let q_spec = loaded
        .config
        .potential
        .q
        .clone()
        .ok_or_else(|| anyhow!("forward needs [potential.q]"))?;
    let q = q_spec.resolve(cfg.grid().clone(), &loaded.base).context("sampling q")?;
    let basis = basis_for(loaded, &cfg, n)?;
    info!("perturbed spectrum");
    let spec = spectrum_with(&basis, &q).context("forward spectrum")?;
    let xi = extract_xi(&basis, &q)?;

    let mut w = create(&out.join("spectrum.csv"))?;
    write_spectrum_csv(&spec.lambda, &spec.markers(), &mut w)?;
    w.flush()?;
    write_json(
        &out.join("xi.json"),
        &XiReport {
            n,
            omega_set: basis.omega_set(),
            xi: &xi,
        },
    )?;
    // ready-made input for `inverse`: the spectrum plus ξ on Ω
    let doc = InverseInput {
        config: cfg,
        spectrum: spec,
        extra_xi: basis.omega_set().iter().map(|&j| (j, xi[j - 1])).collect(),
        n,
    }
    .to_doc(loaded.problem_doc().p, loaded.config.problem.intervals);
    write_json(&out.join("inverse_input.json"), &doc)?;
    Ok(Outcome {
        admissible: true,
        n,
        inputs: csv_inputs(loaded),
    })
}

fn csv_inputs(loaded: &Loaded) -> Vec<PathBuf> {
    use frozen_sl::input::PotentialSpec;
    let pot = &loaded.config.potential;
    [&pot.p, &pot.q]
        .into_iter()
        .flatten()
        .filter_map(|s| match absolute(s.clone(), &loaded.base) {
            PotentialSpec::Csv { csv } => Some(csv),
            _ => None,
        })
        .collect()
}

fn parse_extra(map: &BTreeMap<String, C>) -> Result<BTreeMap<usize, C>> {
    map.iter()
        .map(|(k, v)| {
            k.trim()
                .parse::<usize>()
                .map(|j| (j, *v))
                .map_err(|_| anyhow!("extra_xi key `{k}` is not an index"))
        })
        .collect()
}

/// The inverse-problem data: a JSON document from `[inverse] input`, or the
/// `[problem]` section with a spectrum CSV from `[input]`.
fn inverse_input(loaded: &Loaded, n: Option<usize>) -> Result<(InverseInput, Vec<PathBuf>)> {
    if let Some(rel) = &loaded.config.inverse.input {
        let path = loaded.resolve(rel);
        let mut doc = InverseInputDoc::load(&path)?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        if let Some(n) = n {
            doc.n = n;
            doc.extra_xi.retain(|k, _| k.trim().parse::<usize>().map_or(true, |j| j <= n));
        }
        let input = doc.build(&base).with_context(|| format!("reading {}", path.display()))?;
        return Ok((input, vec![path]));
    }
    let rel = loaded
        .config
        .input
        .spectrum
        .as_ref()
        .ok_or_else(|| anyhow!("no spectrum: set [inverse] input or [input] spectrum"))?;
    let path = loaded.resolve(rel);
    let file = File::open(&path).with_context(|| format!("opening {}", path.display()))?;
    let (values, _) = read_spectrum_csv(file, &path.display().to_string())?;
    let n = loaded.truncation(n)?;
    if values.len() < n {
        bail!("{}: N = {n} but only {} eigenvalues", path.display(), values.len());
    }
    let extra_xi = parse_extra(&loaded.config.inverse.extra_xi)?
        .into_iter()
        .filter(|(j, _)| *j <= n)
        .collect();
    let input = InverseInput {
        config: loaded.problem()?,
        spectrum: SpectralSequence::from_values(values[..n].to_vec()),
        extra_xi,
        n,
    };
    Ok((input, vec![path]))
}

pub fn inverse(loaded: &Loaded, n: Option<usize>, force: bool, out: &Path) -> Result<Outcome> {
    let (input, inputs) = inverse_input(loaded, n)?;
    let basis = basis_for(loaded, &input.config, input.n)?;
    let report = validate_spectrum(&input.spectrum, &basis)?;
    write_json(&out.join("validation.json"), &report)?;
    let force = force || loaded.config.inverse.force;
    let outcome = Outcome {
        admissible: report.admissible,
        n: input.n,
        inputs,
    };
    if !report.admissible && !force {
        return Ok(outcome);
    }
    info!("recovering q");
    let rec = recover_potential(&input, &basis, true).context("inverse solve")?;
    let mut w = create(&out.join("q_recovered.csv"))?;
    write_potential_csv(&rec.q, &mut w)?;
    w.flush()?;
    write_json(
        &out.join("xi.json"),
        &XiReport {
            n: input.n,
            omega_set: basis.omega_set(),
            xi: &rec.xi,
        },
    )?;
    Ok(Outcome {
        admissible: true,
        ..outcome
    })
}

pub fn validate(loaded: &Loaded, n: Option<usize>, out: &Path) -> Result<Outcome> {
    let (input, inputs) = inverse_input(loaded, n)?;
    let basis = basis_for(loaded, &input.config, input.n)?;
    let report: ValidationReport = validate_spectrum(&input.spectrum, &basis)?;
    write_json(&out.join("validation.json"), &report)?;
    Ok(Outcome {
        admissible: report.admissible,
        n: input.n,
        inputs,
    })
}

#[derive(Serialize)]
struct MemberReport {
    name: String,
    file: String,
    /// `‖q − q_first‖` in L₂.
    distance_from_first: f64,
    /// Largest relative deviation of its forward spectrum from the input, `n ≤ N/2`.
    spectral_deviation: f64,
    /// Largest deviation of `ξ_n`, `n ∉ Ω`, from the first member.
    xi_off_omega_deviation: f64,
}

#[derive(Serialize)]
struct FamilyReport {
    #[serde(rename = "N")]
    n: usize,
    omega_set: Vec<usize>,
    members: Vec<MemberReport>,
    max_spectral_deviation: f64,
}

pub fn isospectral(loaded: &Loaded, n: Option<usize>, out: &Path) -> Result<Outcome> {
    let variants = &loaded.config.isospectral.variant;
    if variants.is_empty() {
        bail!("isospectral needs at least one [[isospectral.variant]]");
    }
    let (input, inputs) = inverse_input(loaded, n)?;
    let basis = basis_for(loaded, &input.config, input.n)?;
    let extras = variants
        .iter()
        .map(|v| parse_extra(&v.extra_xi))
        .collect::<Result<Vec<_>>>()?;
    let family = isospectral_family(&input, &basis, &extras).context("iso-spectral family")?;
    let first = &family[0];
    let mut members = Vec::new();
    for (k, (rec, variant)) in family.iter().zip(variants).enumerate() {
        let name = variant.name.clone().unwrap_or_else(|| format!("variant_{}", k + 1));
        let file = format!("q_{name}.csv");
        let mut w = create(&out.join(&file))?;
        write_potential_csv(&rec.q, &mut w)?;
        w.flush()?;
        info!("forward check of {name}");
        let spec = spectrum_with(&basis, &rec.q)?;
        let spectral_deviation = (1..=input.n / 2)
            .map(|j| (spec.at(j) - input.spectrum.at(j)).norm() / input.spectrum.at(j).norm().max(1.0))
            .fold(0.0, f64::max);
        let xi_off_omega_deviation = (1..=input.n)
            .filter(|j| !basis.in_omega(*j))
            .map(|j| (rec.xi[j - 1] - first.xi[j - 1]).norm())
            .fold(0.0, f64::max);
        members.push(MemberReport {
            name,
            file,
            distance_from_first: rec.q.distance_l2(&first.q)?,
            spectral_deviation,
            xi_off_omega_deviation,
        });
    }
    let report = FamilyReport {
        n: input.n,
        omega_set: basis.omega_set().to_vec(),
        max_spectral_deviation: members.iter().map(|m| m.spectral_deviation).fold(0.0, f64::max),
        members,
    };
    write_json(&out.join("isospectral.json"), &report)?;
    Ok(Outcome {
        admissible: first.validation.admissible,
        n: input.n,
        inputs,
    })
}

#[derive(Serialize)]
struct BasisReport<'a> {
    #[serde(rename = "N")]
    n: usize,
    alpha: u8,
    beta: u8,
    a: f64,
    /// `ω = ½∫p`.
    omega: C,
    mu: &'a [C],
    threshold_k: usize,
    threshold_undetermined: bool,
    omega_set: &'a [usize],
    gram_condition: f64,
    chains: &'a [frozen_sl::basis_system::ChainInfo],
    rows: Vec<frozen_sl::basis_system::BasisRow>,
}

pub fn basis_info(loaded: &Loaded, n: Option<usize>, out: &Path) -> Result<Outcome> {
    let n = loaded.truncation(n)?;
    let cfg = loaded.problem()?;
    let basis = basis_for(loaded, &cfg, n)?;
    let unp = basis.unperturbed();
    write_json(
        &out.join("basis.json"),
        &BasisReport {
            n,
            alpha: cfg.alpha(),
            beta: cfg.beta(),
            a: cfg.a(),
            omega: cfg.omega(),
            mu: unp.mu(),
            threshold_k: unp.threshold_k(),
            threshold_undetermined: unp.threshold_undetermined(),
            omega_set: basis.omega_set(),
            gram_condition: basis.gram_condition(),
            chains: basis.chains(),
            rows: basis.diagnostics(),
        },
    )?;
    Ok(Outcome {
        admissible: true,
        n,
        inputs: csv_inputs(loaded),
    })
}
