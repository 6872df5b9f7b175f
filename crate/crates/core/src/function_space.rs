//! Complex-valued functions on `[0, π]`: grids, composite Newton–Cotes quadrature,
//! the bilinear pairing and piecewise-cubic interpolation.

use std::f64::consts::PI;
use std::io::{Read, Write};
use std::path::Path;
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Default number of quadrature intervals on the working grid.
pub const DEFAULT_INTERVALS: usize = 1024;

/// Quadrature nodes on `[0, π]`, uniform on each of `[0, a]` and `[a, π]`.
///
/// The frozen point `a` is always a node (`split`), so integrals over
/// `[0, a]` and `[a, π]` are computed with their own composite rules.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    nodes: Vec<f64>,
    weights: Vec<f64>,
    left_weights: Vec<f64>,
    right_weights: Vec<f64>,
    split: usize,
}

/// Composite Simpson weights refined by one Richardson step (composite Boole)
/// when the interval count allows it; plain Simpson otherwise.
fn side_weights(h: f64, intervals: usize) -> Vec<f64> {
    let mut w = vec![0.0; intervals + 1];
    if intervals == 0 {
        return w;
    }
    let boole = intervals.is_multiple_of(4);
    for (i, wi) in w.iter_mut().enumerate() {
        let end = i == 0 || i == intervals;
        *wi = if boole {
            let c = match (end, i % 4) {
                (true, _) => 7.0,
                (false, 0) => 14.0,
                (false, 2) => 12.0,
                _ => 32.0,
            };
            2.0 * c * h / 45.0
        } else if end {
            h / 3.0
        } else if i % 2 == 1 {
            4.0 * h / 3.0
        } else {
            2.0 * h / 3.0
        };
    }
    w
}

impl Grid {
    /// Uniform grid with `intervals` (even, ≥ 2) Simpson intervals.
    pub fn uniform(intervals: usize) -> Result<Self> {
        Self::working(0.0, intervals)
    }

    /// Working grid with the frozen point `a` as a node.
    ///
    /// For `a` strictly inside `(0, π)` the intervals are distributed in
    /// proportion to the lengths of `[0, a]` and `[a, π]`, each side getting an
    /// even count. For `a = π/2` this is the uniform grid.
    pub fn working(a: f64, intervals: usize) -> Result<Self> {
        if intervals < 2 || !intervals.is_multiple_of(2) {
            return Err(Error::Structural(format!(
                "interval count must be even and at least 2, got {intervals}"
            )));
        }
        if !(0.0..=PI).contains(&a) {
            return Err(Error::Structural(format!("frozen point {a} outside [0, π]")));
        }
        let interior = a > 0.0 && a < PI && intervals >= 4;
        let (nl, nr) = if interior {
            let g = if intervals.is_multiple_of(4) { 4 } else { 2 };
            let nl = g * (intervals as f64 * a / (g as f64 * PI)).round() as usize;
            let nl = nl.clamp(g, intervals - g);
            (nl, intervals - nl)
        } else if a >= PI {
            (intervals, 0)
        } else {
            (0, intervals)
        };
        let mut nodes = Vec::with_capacity(intervals + 1);
        let split_x = if nl == 0 { 0.0 } else if nr == 0 { PI } else { a };
        for i in 0..=nl {
            nodes.push(split_x * i as f64 / nl.max(1) as f64);
        }
        for j in 1..=nr {
            nodes.push(split_x + (PI - split_x) * j as f64 / nr as f64);
        }
        if nl > 0 {
            nodes[nl] = split_x;
        }
        *nodes.last_mut().unwrap() = PI;
        nodes[0] = 0.0;

        let left_weights = side_weights(split_x / nl.max(1) as f64, nl);
        let right_weights = side_weights((PI - split_x) / nr.max(1) as f64, nr);
        let mut weights = vec![0.0; intervals + 1];
        for (i, w) in left_weights.iter().enumerate() {
            weights[i] += w;
        }
        for (j, w) in right_weights.iter().enumerate() {
            weights[nl + j] += w;
        }
        Ok(Self {
            nodes,
            weights,
            left_weights,
            right_weights,
            split: nl,
        })
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn intervals(&self) -> usize {
        self.nodes.len() - 1
    }

    /// Index of the node at the frozen point.
    pub fn split(&self) -> usize {
        self.split
    }

    /// Weights of `∫_0^a`, indexed by nodes `0..=split`.
    pub fn left_weights(&self) -> &[f64] {
        &self.left_weights
    }

    /// Weights of `∫_a^π`, indexed by nodes `split..`.
    pub fn right_weights(&self) -> &[f64] {
        &self.right_weights
    }

    /// Index `i` of the interval `[x_i, x_{i+1}]` containing `x`.
    pub fn interval_of(&self, x: f64) -> usize {
        let idx = self.nodes.partition_point(|&n| n <= x);
        idx.saturating_sub(1).min(self.intervals() - 1)
    }
}

/// Piecewise cubic Lagrange interpolant, one polynomial per interval.
///
/// Each piece interpolates the four nearest samples and is stored in the
/// power basis around the left end of its interval.
#[derive(Debug, Clone)]
pub struct CubicInterp {
    nodes: Vec<f64>,
    coeffs: Vec<[Complex64; 4]>,
}

impl CubicInterp {
    pub fn new(nodes: &[f64], values: &[Complex64]) -> Result<Self> {
        let n = nodes.len();
        if n < 2 || values.len() != n {
            return Err(Error::Structural(
                "interpolation needs at least two samples, one value per node".into(),
            ));
        }
        let width = n.min(4);
        let mut coeffs = Vec::with_capacity(n - 1);
        for i in 0..n - 1 {
            let start = i.saturating_sub(1).min(n - width);
            let d: Vec<f64> = (start..start + width).map(|k| nodes[k] - nodes[i]).collect();
            let mut c = [Complex64::new(0.0, 0.0); 4];
            for k in 0..width {
                // Expand prod_{j != k} (u - d_j) / (d_k - d_j) in powers of u.
                let mut poly = [1.0, 0.0, 0.0, 0.0];
                let mut denom = 1.0;
                let mut deg = 0;
                for j in 0..width {
                    if j == k {
                        continue;
                    }
                    let mut next = [0.0; 4];
                    for m in 0..=deg {
                        next[m + 1] += poly[m];
                        next[m] -= d[j] * poly[m];
                    }
                    poly = next;
                    deg += 1;
                    denom *= d[k] - d[j];
                }
                for m in 0..4 {
                    c[m] += values[start + k] * (poly[m] / denom);
                }
            }
            coeffs.push(c);
        }
        Ok(Self {
            nodes: nodes.to_vec(),
            coeffs,
        })
    }

    /// Evaluates the piece of interval `i` at `x` (no bounds check on `x`).
    #[inline]
    pub fn eval_in(&self, i: usize, x: f64) -> Complex64 {
        let u = x - self.nodes[i];
        let c = &self.coeffs[i];
        ((c[3] * u + c[2]) * u + c[1]) * u + c[0]
    }

    pub fn eval(&self, x: f64) -> Complex64 {
        let idx = self.nodes.partition_point(|&n| n <= x);
        let i = idx.saturating_sub(1).min(self.coeffs.len() - 1);
        self.eval_in(i, x)
    }
}

/// Complex samples on a shared [`Grid`].
#[derive(Debug, Clone)]
pub struct GridFunction {
    grid: Arc<Grid>,
    values: Vec<Complex64>,
}

impl GridFunction {
    pub fn new(grid: Arc<Grid>, values: Vec<Complex64>) -> Result<Self> {
        if grid.len() < 3 {
            return Err(Error::Structural("grid needs at least 3 nodes".into()));
        }
        if values.len() != grid.len() {
            return Err(Error::Structural(format!(
                "{} values for {} nodes",
                values.len(),
                grid.len()
            )));
        }
        Ok(Self { grid, values })
    }

    pub fn from_fn(grid: Arc<Grid>, f: impl Fn(f64) -> Complex64) -> Self {
        let values = grid.nodes().iter().map(|&t| f(t)).collect();
        Self { grid, values }
    }

    pub fn zeros(grid: Arc<Grid>) -> Self {
        let values = vec![Complex64::new(0.0, 0.0); grid.len()];
        Self { grid, values }
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [Complex64] {
        &mut self.values
    }

    pub fn same_grid(&self, other: &GridFunction) -> bool {
        Arc::ptr_eq(&self.grid, &other.grid) || self.grid.nodes == other.grid.nodes
    }

    pub fn interpolant(&self) -> CubicInterp {
        CubicInterp::new(self.grid.nodes(), &self.values).expect("grid function is well formed")
    }

    /// Cubic resampling onto another grid.
    pub fn resample(&self, grid: Arc<Grid>) -> Self {
        if Arc::ptr_eq(&self.grid, &grid) || self.grid.nodes == grid.nodes {
            return Self {
                grid,
                values: self.values.clone(),
            };
        }
        let interp = self.interpolant();
        Self::from_fn(grid, |t| interp.eval(t))
    }

    /// Integral over `[0, π]` by the grid's quadrature.
    pub fn integral(&self) -> Complex64 {
        self.grid
            .weights()
            .iter()
            .zip(&self.values)
            .map(|(w, v)| v * w)
            .sum()
    }

    pub fn norm_l2(&self) -> f64 {
        self.grid
            .weights()
            .iter()
            .zip(&self.values)
            .map(|(w, v)| w * v.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    /// `L₂` distance; both functions must share the node set.
    pub fn distance_l2(&self, other: &GridFunction) -> Result<f64> {
        if !self.same_grid(other) {
            return Err(Error::GridMismatch);
        }
        Ok(self
            .grid
            .weights()
            .iter()
            .zip(self.values.iter().zip(&other.values))
            .map(|(w, (u, v))| w * (u - v).norm_sqr())
            .sum::<f64>()
            .sqrt())
    }

    pub fn scale(&self, c: Complex64) -> Self {
        Self {
            grid: self.grid.clone(),
            values: self.values.iter().map(|v| v * c).collect(),
        }
    }

    /// `self + c·other`.
    pub fn axpy(&self, c: Complex64, other: &GridFunction) -> Result<Self> {
        if !self.same_grid(other) {
            return Err(Error::GridMismatch);
        }
        Ok(Self {
            grid: self.grid.clone(),
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(u, v)| u + c * v)
                .collect(),
        })
    }
}

/// Quadrature approximation of `∫_0^π u v dt` (no conjugation).
pub fn pair(u: &GridFunction, v: &GridFunction) -> Result<Complex64> {
    if !u.same_grid(v) {
        return Err(Error::GridMismatch);
    }
    Ok(u.grid
        .weights()
        .iter()
        .zip(u.values.iter().zip(&v.values))
        .map(|(w, (a, b))| a * b * w)
        .sum())
}

/// `ω = ½ ∫_0^π p(t) dt`.
pub fn omega_of(p: &GridFunction) -> Complex64 {
    p.integral() * 0.5
}

/// Boundary exponents, frozen point and the coefficient `p` on the working grid.
#[derive(Debug, Clone)]
pub struct ProblemConfig {
    alpha: u8,
    beta: u8,
    a: f64,
    p: GridFunction,
    p_interp: Arc<CubicInterp>,
}

impl ProblemConfig {
    /// Resamples `p` onto the working grid for `a` if it is not already there.
    pub fn new(alpha: u8, beta: u8, a: f64, p: GridFunction) -> Result<Self> {
        if alpha > 1 || beta > 1 {
            return Err(Error::Structural(format!(
                "boundary exponents must be 0 or 1, got ({alpha}, {beta})"
            )));
        }
        if !(0.0..=PI).contains(&a) || !a.is_finite() {
            return Err(Error::Structural(format!("frozen point {a} outside [0, π]")));
        }
        let mut intervals = p.grid().intervals();
        if intervals % 2 == 1 {
            intervals += 1;
        }
        let grid = Arc::new(Grid::working(a, intervals.max(2))?);
        let p = p.resample(grid);
        let p_interp = Arc::new(p.interpolant());
        Ok(Self {
            alpha,
            beta,
            a,
            p,
            p_interp,
        })
    }

    /// Builds the configuration from a closure for `p` on the default grid.
    pub fn from_fn(
        alpha: u8,
        beta: u8,
        a: f64,
        intervals: usize,
        p: impl Fn(f64) -> Complex64,
    ) -> Result<Self> {
        let grid = Arc::new(Grid::working(a, intervals)?);
        Self::new(alpha, beta, a, GridFunction::from_fn(grid, p))
    }

    pub fn alpha(&self) -> u8 {
        self.alpha
    }

    pub fn beta(&self) -> u8 {
        self.beta
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn p(&self) -> &GridFunction {
        &self.p
    }

    pub fn p_interp(&self) -> &CubicInterp {
        &self.p_interp
    }

    pub fn grid(&self) -> &Arc<Grid> {
        self.p.grid()
    }

    pub fn omega(&self) -> Complex64 {
        omega_of(&self.p)
    }

    /// `(α + β) / 2`.
    pub fn shift(&self) -> f64 {
        f64::from(self.alpha + self.beta) / 2.0
    }

    /// Samples `f` on the working grid.
    pub fn sample(&self, f: impl Fn(f64) -> Complex64) -> GridFunction {
        GridFunction::from_fn(self.grid().clone(), f)
    }

    /// Brings a potential onto the working grid.
    pub fn adopt(&self, q: &GridFunction) -> GridFunction {
        q.resample(self.grid().clone())
    }

    /// Same `p` and grid with other boundary exponents or frozen point.
    pub fn with(&self, alpha: u8, beta: u8, a: f64) -> Result<Self> {
        Self::new(alpha, beta, a, self.p.clone())
    }
}

/// Samples of a potential at arbitrary abscissae covering `[0, π]`.
#[derive(Debug, Clone)]
pub struct Samples {
    pub x: Vec<f64>,
    pub values: Vec<Complex64>,
}

impl Samples {
    pub fn new(x: Vec<f64>, values: Vec<Complex64>) -> Result<Self> {
        if x.len() < 3 || x.len() != values.len() {
            return Err(Error::Structural(
                "potential samples need at least 3 points with one value each".into(),
            ));
        }
        if x.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Structural("sample abscissae must increase strictly".into()));
        }
        if x[0].abs() > 1e-9 || (x[x.len() - 1] - PI).abs() > 1e-9 {
            return Err(Error::Structural("sample abscissae must span [0, π]".into()));
        }
        Ok(Self { x, values })
    }

    pub fn onto(&self, grid: Arc<Grid>) -> Result<GridFunction> {
        let interp = CubicInterp::new(&self.x, &self.values)?;
        Ok(GridFunction::from_fn(grid, |t| interp.eval(t)))
    }
}

impl From<&GridFunction> for Samples {
    fn from(f: &GridFunction) -> Self {
        Self {
            x: f.grid().nodes().to_vec(),
            values: f.values().to_vec(),
        }
    }
}

/// Reads `x,re,im` CSV.
pub fn read_potential_csv(reader: impl Read, origin: &str) -> Result<Samples> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let headers = rdr
        .headers()
        .map_err(|e| parse_err(origin, 1, e.to_string()))?
        .clone();
    if headers.iter().collect::<Vec<_>>() != ["x", "re", "im"] {
        return Err(parse_err(origin, 1, "expected header `x,re,im`".into()));
    }
    let mut x = Vec::new();
    let mut values = Vec::new();
    for (row, rec) in rdr.records().enumerate() {
        let line = row + 2;
        let rec = rec.map_err(|e| parse_err(origin, line, e.to_string()))?;
        let field = |k: usize| -> Result<f64> {
            rec.get(k)
                .ok_or_else(|| parse_err(origin, line, "missing column".into()))?
                .parse::<f64>()
                .map_err(|e| parse_err(origin, line, e.to_string()))
        };
        x.push(field(0)?);
        values.push(Complex64::new(field(1)?, field(2)?));
    }
    Samples::new(x, values).map_err(|e| parse_err(origin, 0, e.to_string()))
}

pub fn read_potential_file(path: &Path) -> Result<Samples> {
    let file = std::fs::File::open(path)?;
    read_potential_csv(file, &path.display().to_string())
}

pub fn write_potential_csv(f: &GridFunction, mut out: impl Write) -> Result<()> {
    writeln!(out, "x,re,im")?;
    for (x, v) in f.grid().nodes().iter().zip(f.values()) {
        writeln!(out, "{x},{},{}", v.re, v.im)?;
    }
    Ok(())
}

pub(crate) fn parse_err(origin: &str, line: usize, message: String) -> Error {
    Error::Parse {
        path: origin.to_string(),
        line,
        message,
    }
}
