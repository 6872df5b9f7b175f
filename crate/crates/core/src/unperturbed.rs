//! Spectrum of the problem without the frozen-argument term.

use std::io::{Read, Write};

use num_complex::Complex64;

use crate::contour::{self, Analytic, Cluster};
use crate::error::{Error, Result};
use crate::function_space::{parse_err, ProblemConfig};
use crate::ode_core::delta0_jet;
use crate::tolerances::Tolerances;

type C = Complex64;

/// First `N` eigenvalues `μ_n = θ_n²` with multiplicities.
///
/// Indices in the public API are 1-based, as in the numbering `μ_1, μ_2, …`.
#[derive(Debug, Clone)]
pub struct UnperturbedSpectralData {
    cfg: ProblemConfig,
    tol: Tolerances,
    mu: Vec<C>,
    theta: Vec<C>,
    /// `m` of the cluster each index belongs to.
    mult: Vec<usize>,
    distinct: Vec<usize>,
    threshold_k: usize,
}

impl UnperturbedSpectralData {
    pub fn config(&self) -> &ProblemConfig {
        &self.cfg
    }

    pub fn tolerances(&self) -> &Tolerances {
        &self.tol
    }

    pub fn count(&self) -> usize {
        self.mu.len()
    }

    pub fn mu(&self) -> &[C] {
        &self.mu
    }

    pub fn theta(&self) -> &[C] {
        &self.theta
    }

    /// `μ_n`, 1-based.
    pub fn mu_at(&self, n: usize) -> C {
        self.mu[n - 1]
    }

    /// Multiplicity of the eigenvalue `μ_n`, 1-based.
    pub fn mult_at(&self, n: usize) -> usize {
        self.mult[n - 1]
    }

    /// The index set `S` of first occurrences, 1-based and increasing.
    pub fn distinct_index_set(&self) -> &[usize] {
        &self.distinct
    }

    /// The head `n ∈ S` of the chain containing index `j`.
    pub fn head_of(&self, j: usize) -> usize {
        match self.distinct.binary_search(&j) {
            Ok(_) => j,
            Err(pos) => self.distinct[pos - 1],
        }
    }

    /// Smallest index from which all multiplicities within the range are 1.
    pub fn threshold_k(&self) -> usize {
        self.threshold_k
    }

    /// `K = N` means the truncation cannot certify where multiple eigenvalues end.
    pub fn threshold_undetermined(&self) -> bool {
        self.count() > 1 && self.threshold_k == self.count()
    }

    /// Spectrum-file marker per index: `m_n` at a chain head, 0 on continuations.
    pub fn markers(&self) -> Vec<usize> {
        (1..=self.count())
            .map(|n| if self.distinct.binary_search(&n).is_ok() { self.mult_at(n) } else { 0 })
            .collect()
    }

    fn delta0(&self) -> impl Analytic + '_ {
        delta0_fn(&self.cfg, self.tol)
    }
}

fn delta0_fn(cfg: &ProblemConfig, tol: Tolerances) -> impl Analytic + '_ {
    move |z: C| {
        let j = delta0_jet(cfg, z, 1, tol.integrator())?;
        Ok((j.value(), j.derivative(1)))
    }
}

pub fn compute_unperturbed(cfg: &ProblemConfig, n: usize) -> Result<UnperturbedSpectralData> {
    compute_unperturbed_with(cfg, n, &Tolerances::default())
}

pub fn compute_unperturbed_with(
    cfg: &ProblemConfig,
    n: usize,
    tol: &Tolerances,
) -> Result<UnperturbedSpectralData> {
    if n == 0 {
        return Err(Error::Structural("N must be at least 1".into()));
    }
    let f = delta0_fn(cfg, *tol);
    let clusters = contour::first_zeros(&f, n, cfg.shift(), cfg.omega(), &[], &tol.search())?;
    Ok(assemble(cfg.clone(), *tol, &clusters, n))
}

fn assemble(cfg: ProblemConfig, tol: Tolerances, clusters: &[Cluster], n: usize) -> UnperturbedSpectralData {
    let mut mu = Vec::with_capacity(n);
    let mut theta = Vec::with_capacity(n);
    let mut mult = Vec::with_capacity(n);
    let mut distinct = Vec::new();
    let mut threshold_k = 1;
    for c in clusters {
        if mu.len() >= n {
            break;
        }
        let th = contour::sqrt_branch(c.value);
        distinct.push(mu.len() + 1);
        for _ in 0..c.mult {
            if mu.len() < n {
                mu.push(th * th);
                theta.push(th);
                mult.push(c.mult);
            }
        }
        if c.mult > 1 {
            threshold_k = (mu.len() + 1).min(n);
        }
    }
    UnperturbedSpectralData {
        cfg,
        tol,
        mu,
        theta,
        mult,
        distinct,
        threshold_k,
    }
}

/// Algebraic multiplicity of `z` as a zero of `Δ_0`, by a winding number on a
/// circle around `z`; a second circle of twice the radius must agree.
pub fn multiplicity_of(data: &UnperturbedSpectralData, z: C) -> Result<usize> {
    let nearest = data
        .mu
        .iter()
        .map(|m| (m - z).norm())
        .filter(|&d| d > data.tol.snap * (1.0 + z.norm()))
        .fold(f64::INFINITY, f64::min);
    let r = contour::local_radius(z, nearest);
    let f = data.delta0();
    let inner = contour::winding_number(&f, z, r, data.tol.winding_nodes)?;
    let outer = contour::winding_number(&f, z, 2.0 * r, data.tol.winding_nodes)?;
    if inner != outer {
        return Err(Error::IllConditionedContour { center: z, radius: r });
    }
    Ok(inner)
}

/// Writes `n,re_lambda,im_lambda,mult_marker` rows.
pub fn write_spectrum_csv(values: &[C], markers: &[usize], mut out: impl Write) -> Result<()> {
    writeln!(out, "n,re_lambda,im_lambda,mult_marker")?;
    for (i, (v, m)) in values.iter().zip(markers).enumerate() {
        writeln!(out, "{},{},{},{}", i + 1, v.re, v.im, m)?;
    }
    Ok(())
}

/// Reads a spectrum CSV; rows must be numbered `1, 2, …` in order.
pub fn read_spectrum_csv(reader: impl Read, origin: &str) -> Result<(Vec<C>, Vec<usize>)> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let headers = rdr
        .headers()
        .map_err(|e| parse_err(origin, 1, e.to_string()))?
        .clone();
    if headers.iter().collect::<Vec<_>>() != ["n", "re_lambda", "im_lambda", "mult_marker"] {
        return Err(parse_err(
            origin,
            1,
            "expected header `n,re_lambda,im_lambda,mult_marker`".into(),
        ));
    }
    let mut values = Vec::new();
    let mut markers = Vec::new();
    for (row, rec) in rdr.records().enumerate() {
        let line = row + 2;
        let rec = rec.map_err(|e| parse_err(origin, line, e.to_string()))?;
        let get = |k: usize| {
            rec.get(k)
                .ok_or_else(|| parse_err(origin, line, "missing column".into()))
        };
        let idx: usize = get(0)?
            .parse()
            .map_err(|e: std::num::ParseIntError| parse_err(origin, line, e.to_string()))?;
        if idx != row + 1 {
            return Err(parse_err(origin, line, format!("expected index {}, found {idx}", row + 1)));
        }
        let num = |k: usize| -> Result<f64> {
            get(k)?
                .parse()
                .map_err(|e: std::num::ParseFloatError| parse_err(origin, line, e.to_string()))
        };
        values.push(C::new(num(1)?, num(2)?));
        markers.push(
            get(3)?
                .parse()
                .map_err(|e: std::num::ParseIntError| parse_err(origin, line, e.to_string()))?,
        );
    }
    Ok((values, markers))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn zero_cfg(alpha: u8, beta: u8) -> ProblemConfig {
        ProblemConfig::from_fn(alpha, beta, std::f64::consts::FRAC_PI_2, 256, |_| C::new(0.0, 0.0))
            .unwrap()
    }

    #[test]
    fn dirichlet_free_spectrum() {
        let d = compute_unperturbed(&zero_cfg(0, 0), 5).unwrap();
        for (k, m) in d.mu().iter().enumerate() {
            let e = ((k + 1) * (k + 1)) as f64;
            assert!((m - e).norm() < 1e-8 * e, "{k}: {m}");
        }
        assert_eq!(d.distinct_index_set(), &[1, 2, 3, 4, 5]);
        assert_eq!(d.threshold_k(), 1);
        assert!(d.mult.iter().all(|&m| m == 1));
    }

    #[test]
    fn mixed_free_spectrum() {
        let d = compute_unperturbed(&zero_cfg(1, 0), 3).unwrap();
        for (m, e) in d.mu().iter().zip([0.25, 2.25, 6.25]) {
            assert!((m - e).norm() < 1e-9, "{m}");
        }
    }

    #[test]
    fn theta_squares_to_mu() {
        let d = compute_unperturbed(&zero_cfg(1, 1), 4).unwrap();
        for (t, m) in d.theta().iter().zip(d.mu()) {
            assert_eq!(t * t, *m);
            assert!(t.arg() >= -std::f64::consts::FRAC_PI_2 && t.arg() < std::f64::consts::FRAC_PI_2);
        }
    }

    #[test]
    fn multiplicity_of_free_values() {
        let d = compute_unperturbed(&zero_cfg(0, 0), 4).unwrap();
        assert_eq!(multiplicity_of(&d, C::new(4.0, 0.0)).unwrap(), 1);
        assert_eq!(multiplicity_of(&d, C::new(5.0, 0.0)).unwrap(), 0);
    }

    #[test]
    fn spectrum_csv_roundtrip() {
        let v = vec![C::new(1.0, 0.5), C::new(2.0, -1.0), C::new(2.0, -1.0)];
        let mut buf = Vec::new();
        write_spectrum_csv(&v, &[1, 2, 0], &mut buf).unwrap();
        let (back, markers) = read_spectrum_csv(buf.as_slice(), "mem").unwrap();
        assert_eq!(back, v);
        assert_eq!(markers, vec![1, 2, 0]);
    }

    #[test]
    fn spectrum_csv_rejects_gaps() {
        let text = "n,re_lambda,im_lambda,mult_marker\n1,1,0,1\n3,4,0,1\n";
        assert!(matches!(
            read_spectrum_csv(text.as_bytes(), "s.csv"),
            Err(Error::Parse { line: 3, .. })
        ));
    }
}
