//! Contour machinery shared by the spectral searches: argument-principle
//! counts, Cauchy-integral derivatives, deflated Newton and zero clustering.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::par::*;

type C = Complex64;

/// An analytic function returning `(f(z), f′(z))`.
pub trait Analytic: Sync {
    fn eval(&self, z: C) -> Result<(C, C)>;
}

impl<F> Analytic for F
where
    F: Fn(C) -> Result<(C, C)> + Sync,
{
    fn eval(&self, z: C) -> Result<(C, C)> {
        self(z)
    }
}

fn circle(center: C, radius: f64, nodes: usize) -> Vec<(C, C)> {
    (0..nodes)
        .map(|j| {
            let e = C::from_polar(1.0, 2.0 * PI * j as f64 / nodes as f64);
            (center + e * radius, e * radius)
        })
        .collect()
}

/// Trapezoid moments `(1/2πi)∮ (z − c)^k f′/f dz` for `k = 0..=max_k`.
pub fn log_moments(f: &dyn Analytic, center: C, radius: f64, nodes: usize, max_k: usize) -> Result<Vec<C>> {
    let pts = circle(center, radius, nodes);
    let ratios: Vec<C> = pts
        .par_iter()
        .map(|&(z, _)| f.eval(z).map(|(v, d)| d / v))
        .collect::<Result<Vec<_>>>()?;
    let mut out = vec![C::new(0.0, 0.0); max_k + 1];
    for ((_, w), r) in pts.iter().zip(&ratios) {
        let mut wk = *w;
        for o in out.iter_mut() {
            *o += r * wk;
            wk *= w;
        }
    }
    for o in out.iter_mut() {
        *o /= nodes as f64;
    }
    if out.iter().any(|o| !o.is_finite()) {
        return Err(Error::Contour { center });
    }
    Ok(out)
}

/// `(z − c, (z − c) f′/f)` at `nodes` equispaced points rotated by `phase` steps.
fn ratio_terms(f: &dyn Analytic, center: C, radius: f64, nodes: usize, phase: f64) -> Result<Vec<(C, C)>> {
    let terms: Vec<(C, C)> = (0..nodes)
        .into_par_iter()
        .map(|j| {
            let e = C::from_polar(radius, 2.0 * PI * (j as f64 + phase) / nodes as f64);
            f.eval(center + e).map(|(v, d)| (e, e * d / v))
        })
        .collect::<Result<Vec<_>>>()?;
    if terms.iter().any(|t| !t.1.is_finite()) {
        return Err(Error::Contour { center });
    }
    Ok(terms)
}

/// Winding count together with the moments `(1/2πi)∮ (z − c)^k f′/f dz`,
/// `k ≤ max_k`, from the same settled trapezoid rule.
fn settled_moments(f: &dyn Analytic, center: C, radius: f64, min_nodes: usize, max_k: usize) -> Result<(usize, Vec<C>)> {
    let mut nodes = min_nodes.max(8);
    let mut terms = ratio_terms(f, center, radius, nodes, 0.0)?;
    let mut previous: Option<i64> = None;
    loop {
        let estimate = terms.iter().map(|t| t.1).sum::<C>() / nodes as f64;
        let rounded = estimate.re.round();
        let off = (estimate.re - rounded).abs().max(estimate.im.abs());
        if rounded >= 0.0 && (off < 1e-2 || (off < 0.05 && previous == Some(rounded as i64))) {
            let mut mom = vec![C::new(0.0, 0.0); max_k + 1];
            for &(e, r) in &terms {
                let mut ek = r;
                for m in mom.iter_mut() {
                    *m += ek;
                    ek *= e;
                }
            }
            for m in mom.iter_mut() {
                *m /= nodes as f64;
            }
            return Ok((rounded as usize, mom));
        }
        if nodes >= 1 << 16 {
            return Err(Error::MultiplicityAmbiguity {
                center,
                estimate: estimate.re,
            });
        }
        previous = Some(rounded as i64);
        terms.extend(ratio_terms(f, center, radius, nodes, 0.5)?);
        nodes *= 2;
    }
}

/// Argument-principle zero count inside a circle, refining the trapezoid
/// rule until the estimate settles on an integer. Each refinement halves the
/// node spacing and reuses the earlier evaluations.
pub fn winding_number(f: &dyn Analytic, center: C, radius: f64, min_nodes: usize) -> Result<usize> {
    Ok(settled_moments(f, center, radius, min_nodes, 0)?.0)
}

/// `[f(c), f′(c), …, f^{(max_order)}(c)]` by the trapezoid rule on a circle.
pub fn cauchy_derivatives(
    f: &(dyn Fn(C) -> Result<C> + Sync),
    center: C,
    radius: f64,
    nodes: usize,
    max_order: usize,
) -> Result<Vec<C>> {
    let pts = circle(center, radius, nodes);
    let values: Vec<C> = pts
        .par_iter()
        .map(|&(z, _)| f(z))
        .collect::<Result<Vec<_>>>()?;
    let mut out = Vec::with_capacity(max_order + 1);
    let mut fact = 1.0;
    for k in 0..=max_order {
        if k > 0 {
            fact *= k as f64;
        }
        let s: C = values
            .iter()
            .enumerate()
            .map(|(j, v)| v * C::from_polar(1.0, -2.0 * PI * (j * k) as f64 / nodes as f64))
            .sum();
        out.push(s * fact / (nodes as f64 * radius.powi(k as i32)));
    }
    Ok(out)
}

/// Principal square root with argument in `[−π/2, π/2)`.
pub fn sqrt_branch(z: C) -> C {
    let r = z.sqrt();
    // num-complex returns arg in (−π/2, π/2]; move the boundary ray over.
    if r.re == 0.0 && r.im > 0.0 {
        -r
    } else {
        r
    }
}

/// Newton iteration on `f / ∏(z − r)^m`, deflating already known zeros.
pub fn newton(f: &dyn Analytic, seed: C, deflate: &[(C, usize)], max_iter: usize) -> Option<C> {
    newton_converged(f, seed, deflate, max_iter).map(|(z, _)| z)
}

/// As [`newton`], also telling whether the iteration met the tight step
/// criterion (`true`) or only settled slowly, as at a multiple zero.
fn newton_converged(f: &dyn Analytic, seed: C, deflate: &[(C, usize)], max_iter: usize) -> Option<(C, bool)> {
    let mut z = seed;
    for _ in 0..max_iter {
        let (v, d) = f.eval(z).ok()?;
        if v == C::new(0.0, 0.0) {
            return Some((z, true));
        }
        let mut ratio = d / v;
        for &(r, m) in deflate {
            ratio -= m as f64 / (z - r);
        }
        let mut step = ratio.inv();
        if !step.is_finite() {
            return None;
        }
        let cap = 1.0 + z.norm().sqrt();
        if step.norm() > cap {
            step *= cap / step.norm();
        }
        z -= step;
        if step.norm() <= 1e-13 * (1.0 + z.norm()) {
            return Some((z, true));
        }
    }
    // Multiple roots converge linearly; accept a slow but settled iterate.
    let (v, d) = f.eval(z).ok()?;
    let step = (d / v).inv();
    (step.norm() <= 1e-8 * (1.0 + z.norm())).then_some((z, false))
}

/// Roots of a monic polynomial from its power sums (Newton identities, then
/// Durand–Kerner).
pub fn roots_from_power_sums(sums: &[C]) -> Vec<C> {
    let m = sums.len();
    if m == 0 {
        return Vec::new();
    }
    // e_k via Newton's identities
    let mut e = vec![C::new(1.0, 0.0); m + 1];
    for k in 1..=m {
        let mut acc = C::new(0.0, 0.0);
        for i in 1..=k {
            let sign = if i % 2 == 1 { 1.0 } else { -1.0 };
            acc += e[k - i] * sums[i - 1] * sign;
        }
        e[k] = acc / k as f64;
    }
    // z^m − e1 z^{m−1} + e2 z^{m−2} − …
    let coeff: Vec<C> = (0..=m)
        .map(|k| if k % 2 == 0 { e[k] } else { -e[k] })
        .collect();
    let poly = |z: C| coeff.iter().fold(C::new(0.0, 0.0), |acc, c| acc * z + c);
    let scale = 1.0 + coeff.iter().map(|c| c.norm()).fold(0.0, f64::max);
    let mut r: Vec<C> = (0..m)
        .map(|k| C::from_polar(scale.sqrt() * 0.5, 0.4 + 2.0 * PI * k as f64 / m as f64))
        .collect();
    for _ in 0..500 {
        let mut moved = 0.0f64;
        for i in 0..m {
            let mut den = C::new(1.0, 0.0);
            for j in 0..m {
                if i != j {
                    den *= r[i] - r[j];
                }
            }
            if den.norm() == 0.0 {
                r[i] += C::new(1e-12, 1e-12);
                continue;
            }
            let step = poly(r[i]) / den;
            r[i] -= step;
            moved = moved.max(step.norm());
        }
        if moved < 1e-15 * scale {
            break;
        }
    }
    r
}

/// A distinct zero with its multiplicity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cluster {
    pub value: C,
    pub mult: usize,
}

/// Tuning of the spectral zero search.
#[derive(Debug, Clone, Copy)]
pub struct SearchParams {
    /// Two zeros are one eigenvalue when their square roots are this close.
    pub cluster_rho: f64,
    /// Trapezoid nodes on local multiplicity circles.
    pub winding_nodes: usize,
}

impl Default for SearchParams {
    fn default() -> Self {
        Self {
            cluster_rho: 1e-6,
            winding_nodes: 16,
        }
    }
}

/// Radius for a local circle around `z`, given the distance to its nearest neighbour.
pub fn local_radius(z: C, nearest: f64) -> f64 {
    let cap = 0.6 * (1.0 + sqrt_branch(z).norm());
    cap.min(0.4 * nearest)
}

fn nearest_distance(z: C, others: &[C]) -> f64 {
    others
        .iter()
        .map(|o| (o - z).norm())
        .filter(|&d| d > 0.0)
        .fold(f64::INFINITY, f64::min)
}

fn same_cluster(u: C, v: C, tol: f64) -> bool {
    (sqrt_branch(u) - sqrt_branch(v)).norm() <= tol || (u - v).norm() <= tol * tol
}

/// Resolves the zeros inside a local circle: a single cluster when they
/// coincide within tolerance, otherwise the individual zeros recovered from
/// the contour moments and polished by Newton.
fn resolve_disk(f: &dyn Analytic, center: C, radius: f64, params: &SearchParams) -> Result<Vec<Cluster>> {
    let (m, mut mom) = settled_moments(f, center, radius, params.winding_nodes, 1)?;
    if m == 0 {
        return Ok(Vec::new());
    }
    if m > 1 {
        // splitting close zeros needs moments well beyond counting accuracy
        mom = log_moments(f, center, radius, (16 * m).max(64), m)?;
    }
    mom.truncate(m + 1);
    let sums: Vec<C> = mom[1..].to_vec();
    let offsets = roots_from_power_sums(&sums);
    let mut pts: Vec<C> = offsets.iter().map(|o| center + o).collect();
    if m == 1 {
        if let Some(z) = newton(f, pts[0], &[], 50) {
            if (z - center).norm() < radius {
                pts[0] = z;
            }
        }
        return Ok(vec![Cluster { value: pts[0], mult: 1 }]);
    }
    let centroid = center + sums[0] / m as f64;
    if pts.iter().all(|p| same_cluster(*p, centroid, params.cluster_rho)) {
        return Ok(vec![Cluster { value: centroid, mult: m }]);
    }
    // distinct zeros: group and polish
    let mut clusters: Vec<Cluster> = Vec::new();
    for p in pts {
        if let Some(c) = clusters.iter_mut().find(|c| same_cluster(c.value, p, params.cluster_rho)) {
            c.mult += 1;
        } else {
            clusters.push(Cluster { value: p, mult: 1 });
        }
    }
    for c in clusters.iter_mut().filter(|c| c.mult == 1) {
        if let Some(z) = newton(f, c.value, &[], 50) {
            if (z - c.value).norm() < radius * 0.5 {
                c.value = z;
            }
        }
    }
    Ok(clusters)
}

/// Locates every zero of `f` inside `|z − center| < radius`, whose total count
/// (with multiplicity) is `expected`. Newton runs from `seeds` first; the
/// remaining zeros are hunted by deflated Newton from a ring of extra seeds.
pub fn zeros_in_disk(
    f: &dyn Analytic,
    center: C,
    radius: f64,
    expected: usize,
    seeds: &[C],
    params: &SearchParams,
) -> Result<Vec<Cluster>> {
    let inside = |z: C| (z - center).norm() < radius;
    let found: Vec<Option<(C, bool)>> = seeds
        .par_iter()
        .map(|&s| newton_converged(f, s, &[], 60))
        .collect();
    let mut candidates: Vec<C> = Vec::new();
    let mut all_sharp = true;
    for (z, sharp) in found.into_iter().flatten() {
        if inside(z) && !candidates.iter().any(|c| same_cluster(*c, z, params.cluster_rho)) {
            candidates.push(z);
            all_sharp &= sharp;
        }
    }
    // `expected` distinct, sharply converged zeros against a count of `expected`
    // with multiplicity: every zero is simple and none is missing
    if all_sharp && candidates.len() == expected {
        return Ok(candidates.into_iter().map(|value| Cluster { value, mult: 1 }).collect());
    }
    let mut clusters = certify(f, &candidates, center, radius, params)?;
    let mut total: usize = clusters.iter().map(|c| c.mult).sum();

    if total < expected {
        let mut extra: Vec<C> = seeds.to_vec();
        for ring in 1..=8 {
            let r = radius * ring as f64 / 9.0;
            let count = 8 * ring;
            for k in 0..count {
                extra.push(center + C::from_polar(r, 2.0 * PI * (k as f64 + 0.5) / count as f64));
            }
        }
        for s in extra {
            if total >= expected {
                break;
            }
            let deflate: Vec<(C, usize)> = clusters.iter().map(|c| (c.value, c.mult)).collect();
            if let Some(z) = newton(f, s, &deflate, 80) {
                if inside(z) && !clusters.iter().any(|c| same_cluster(c.value, z, params.cluster_rho)) {
                    let mut vals: Vec<C> = clusters.iter().map(|c| c.value).collect();
                    vals.push(z);
                    clusters = certify(f, &vals, center, radius, params)?;
                    total = clusters.iter().map(|c| c.mult).sum();
                }
            }
        }
    }
    if total != expected {
        return Err(Error::IncompleteSpectrum {
            found: total,
            counted: expected,
        });
    }
    Ok(clusters)
}

/// Multiplicities of candidate zeros by local winding numbers; candidates whose
/// circles hold several separated zeros are split.
fn certify(
    f: &dyn Analytic,
    candidates: &[C],
    center: C,
    radius: f64,
    params: &SearchParams,
) -> Result<Vec<Cluster>> {
    let resolved: Vec<Vec<Cluster>> = candidates
        .par_iter()
        .map(|&z| {
            let nn = nearest_distance(z, candidates);
            let edge = radius - (z - center).norm();
            let r = local_radius(z, nn).min(0.9 * edge);
            resolve_disk(f, z, r, params)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut out: Vec<Cluster> = Vec::new();
    for c in resolved.into_iter().flatten() {
        if let Some(o) = out.iter_mut().find(|o| same_cluster(o.value, c.value, params.cluster_rho)) {
            // the same zero seen from two neighbouring circles
            o.mult = o.mult.max(c.mult);
        } else {
            out.push(c);
        }
    }
    Ok(out)
}

/// Sort key realizing the numbering convention: by `Re θ`, then `Im θ`.
pub fn numbering_order(a: &C, b: &C) -> std::cmp::Ordering {
    let (ta, tb) = (sqrt_branch(*a), sqrt_branch(*b));
    ta.re
        .partial_cmp(&tb.re)
        .unwrap_or(std::cmp::Ordering::Equal)
        .then(ta.im.partial_cmp(&tb.im).unwrap_or(std::cmp::Ordering::Equal))
}

/// First `n` zeros (with multiplicity) of a characteristic function whose
/// square-rooted zeros behave like `k − shift + ω/(πk)`.
///
/// Zeros are counted in discs centred at `2ω/π` whose radii sit midway between
/// consecutive unperturbed levels; the disc is enlarged until it holds at
/// least `n` zeros, which are then all located and numbered. Newton starts
/// from `hints[k]` where given and from the asymptotic level otherwise.
pub fn first_zeros(
    f: &dyn Analytic,
    n: usize,
    shift: f64,
    omega: C,
    hints: &[C],
    params: &SearchParams,
) -> Result<Vec<Cluster>> {
    let center = omega * (2.0 / PI);
    let mut last_count = 0;
    for m in n..n + 6 {
        let lo = (m as f64 - shift).powi(2);
        let hi = (m as f64 + 1.0 - shift).powi(2);
        let radius = 0.5 * (lo + hi);
        let count = winding_number(f, center, radius, (4 * (m + 2)).max(48))?;
        last_count = count;
        if count < n {
            continue;
        }
        let seeds: Vec<C> = (1..=m + 1)
            .map(|k| {
                if let Some(h) = hints.get(k - 1) {
                    return *h;
                }
                let theta = C::new(k as f64 - shift, 0.0) + omega / (PI * k as f64);
                theta * theta
            })
            .collect();
        let mut clusters = zeros_in_disk(f, center, radius, count, &seeds, params)?;
        clusters.sort_by(|a, b| numbering_order(&a.value, &b.value));
        let mut taken = 0;
        let mut out = Vec::new();
        for c in clusters {
            if taken >= n {
                break;
            }
            taken += c.mult;
            out.push(c);
        }
        return Ok(out);
    }
    Err(Error::IncompleteSpectrum {
        found: last_count,
        counted: n,
    })
}
