//! Empirical and analytic estimators of transport and divergence
//! distances: exact 1-D Wasserstein via the quantile coupling, its sliced
//! multi-dimensional surrogate, histogram total variation with an
//! overflow bin, Gaussian closed forms, and the exact law of the Langevin
//! kernel on a standard Gaussian target.

use statrs::function::erf::erf;

use crate::error::{LabError, Result};
use crate::rng::CounterRng;
use crate::target::GaussianOracle;
use crate::vecmath::{dot, norm, norm_sq};

/// Standard normal CDF.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * (1.0 + erf(x / std::f64::consts::SQRT_2))
}

/// Weighted point cloud with weights normalized to sum to one.
#[derive(Clone, Debug)]
pub struct EmpiricalMeasure {
    dim: usize,
    data: Vec<f64>,
    weights: Vec<f64>,
}

impl EmpiricalMeasure {
    pub fn equal_weight(points: Vec<Vec<f64>>) -> Result<Self> {
        let n = points.len();
        Self::weighted(points, vec![1.0 / n.max(1) as f64; n])
    }

    pub fn weighted(points: Vec<Vec<f64>>, weights: Vec<f64>) -> Result<Self> {
        if points.is_empty() {
            return Err(LabError::InvalidParameter(
                "empirical measure needs at least one point".into(),
            ));
        }
        if points.len() != weights.len() {
            return Err(LabError::DimensionMismatch {
                expected: points.len(),
                got: weights.len(),
            });
        }
        let dim = points[0].len();
        if dim == 0 || points.iter().any(|p| p.len() != dim) {
            return Err(LabError::InvalidParameter(
                "points must share one positive dimension".into(),
            ));
        }
        if weights.iter().any(|w| !(*w >= 0.0) || !w.is_finite()) {
            return Err(LabError::InvalidParameter(
                "weights must be nonnegative".into(),
            ));
        }
        let total: f64 = weights.iter().sum();
        if total <= 0.0 {
            return Err(LabError::InvalidParameter(
                "weights must have positive total mass".into(),
            ));
        }
        let mut data = Vec::with_capacity(points.len() * dim);
        for p in &points {
            data.extend_from_slice(p);
        }
        let weights = weights.iter().map(|w| w / total).collect();
        Ok(EmpiricalMeasure { dim, data, weights })
    }

    /// Cloud of 1-D values with equal weights, a common case in tests.
    pub fn from_scalars(values: &[f64]) -> Result<Self> {
        Self::equal_weight(values.iter().map(|v| vec![*v]).collect())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn points(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(self.dim)
    }

    /// Weighted mean of the squared norm.
    pub fn mean_norm_sq(&self) -> f64 {
        self.points()
            .zip(&self.weights)
            .map(|(p, w)| w * norm_sq(p))
            .sum()
    }

    /// Weighted fraction of points with norm strictly above `radius`.
    pub fn mass_outside_radius(&self, radius: f64) -> f64 {
        // the empty sum folds from -0.0; normalize the sign
        self.points()
            .zip(&self.weights)
            .filter(|(p, _)| norm(p) > radius)
            .map(|(_, w)| w)
            .sum::<f64>()
            .max(0.0)
    }

    /// Effective sample size `1 / sum w_i^2` (equals `n` for equal weights).
    pub fn effective_samples(&self) -> f64 {
        1.0 / self.weights.iter().map(|w| w * w).sum::<f64>()
    }

    /// 1-D measure of point norms, same weights.
    pub fn norms_measure(&self) -> EmpiricalMeasure {
        EmpiricalMeasure {
            dim: 1,
            data: self.points().map(norm).collect(),
            weights: self.weights.clone(),
        }
    }

    /// Pushforward under `x -> m x`.
    pub fn rescaled(&self, m: f64) -> EmpiricalMeasure {
        EmpiricalMeasure {
            dim: self.dim,
            data: self.data.iter().map(|v| v * m).collect(),
            weights: self.weights.clone(),
        }
    }
}

/// Sorted value/weight pairs for a 1-D measure.
fn sorted_profile(values: Vec<f64>, weights: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|a, b| values[*a].partial_cmp(&values[*b]).unwrap());
    let v = idx.iter().map(|i| values[*i]).collect();
    let mut cum = Vec::with_capacity(values.len());
    let mut acc = 0.0;
    for i in &idx {
        acc += weights[*i];
        cum.push(acc);
    }
    if let Some(last) = cum.last_mut() {
        *last = 1.0;
    }
    (v, cum)
}

/// Squared 2-Wasserstein distance between two sorted 1-D profiles via the
/// quantile coupling, exact for step quantile functions.
fn quantile_coupling_sq(va: &[f64], ca: &[f64], vb: &[f64], cb: &[f64]) -> f64 {
    let mut acc = 0.0;
    let mut prev = 0.0;
    let (mut i, mut j) = (0usize, 0usize);
    while i < va.len() && j < vb.len() {
        let q = ca[i].min(cb[j]);
        let d = va[i] - vb[j];
        if q > prev {
            acc += (q - prev) * d * d;
        }
        let advance_a = ca[i] <= q + f64::EPSILON;
        let advance_b = cb[j] <= q + f64::EPSILON;
        if advance_a {
            i += 1;
        }
        if advance_b {
            j += 1;
        }
        prev = q;
    }
    acc
}

/// Exact 1-D 2-Wasserstein distance between two weighted clouds.
pub fn w2_1d(a: &EmpiricalMeasure, b: &EmpiricalMeasure) -> Result<f64> {
    if a.dim() != 1 || b.dim() != 1 {
        return Err(LabError::DimensionMismatch {
            expected: 1,
            got: a.dim().max(b.dim()),
        });
    }
    let (va, ca) = sorted_profile(a.data.clone(), &a.weights);
    let (vb, cb) = sorted_profile(b.data.clone(), &b.weights);
    Ok(quantile_coupling_sq(&va, &ca, &vb, &cb).sqrt())
}

fn sliced_w2_direction_values(
    a: &EmpiricalMeasure,
    b: &EmpiricalMeasure,
    n_proj: usize,
    seed: u64,
) -> Result<Vec<f64>> {
    if a.dim() != b.dim() {
        return Err(LabError::DimensionMismatch {
            expected: a.dim(),
            got: b.dim(),
        });
    }
    if n_proj == 0 {
        return Err(LabError::InvalidParameter("n_proj must be >= 1".into()));
    }
    let dim = a.dim();
    let lane = CounterRng::new(seed).direction_lane();
    let mut values = Vec::with_capacity(n_proj);
    let mut dir = vec![0.0; dim];
    for p in 0..n_proj {
        lane.fill_gaussians(p as u64, &mut dir);
        let len = norm(&dir);
        if len == 0.0 {
            dir[0] = 1.0;
        } else {
            dir.iter_mut().for_each(|v| *v /= len);
        }
        let pa: Vec<f64> = a.points().map(|x| dot(x, &dir)).collect();
        let pb: Vec<f64> = b.points().map(|x| dot(x, &dir)).collect();
        let (va, ca) = sorted_profile(pa, &a.weights);
        let (vb, cb) = sorted_profile(pb, &b.weights);
        values.push(quantile_coupling_sq(&va, &ca, &vb, &cb));
    }
    Ok(values)
}

/// Sliced 2-Wasserstein surrogate: root-mean of squared 1-D distances
/// over `n_proj` uniformly random unit directions, deterministic given
/// `seed`.
pub fn sliced_w2(
    a: &EmpiricalMeasure,
    b: &EmpiricalMeasure,
    n_proj: usize,
    seed: u64,
) -> Result<f64> {
    let values = sliced_w2_direction_values(a, b, n_proj, seed)?;
    Ok((values.iter().sum::<f64>() / values.len() as f64).sqrt())
}

/// Sliced distance together with a delta-method standard error from the
/// spread over directions.
pub fn sliced_w2_with_se(
    a: &EmpiricalMeasure,
    b: &EmpiricalMeasure,
    n_proj: usize,
    seed: u64,
) -> Result<(f64, f64)> {
    let values = sliced_w2_direction_values(a, b, n_proj, seed)?;
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0).max(1.0);
    let se_mean = (var / n).sqrt();
    let w2 = mean.sqrt();
    let se = if w2 > 0.0 { se_mean / (2.0 * w2) } else { se_mean.sqrt() };
    Ok((w2, se))
}

/// Shared histogram grid with one overflow bin for out-of-range mass.
#[derive(Clone, Debug)]
pub struct HistogramSpec {
    lo: Vec<f64>,
    hi: Vec<f64>,
    bins_per_dim: usize,
}

impl HistogramSpec {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>, bins_per_dim: usize) -> Result<Self> {
        if lo.len() != hi.len() || lo.is_empty() {
            return Err(LabError::InvalidParameter(
                "histogram bounds must be nonempty and of equal dimension".into(),
            ));
        }
        if bins_per_dim < 2 {
            return Err(LabError::InvalidParameter(
                "bins_per_dim must be >= 2".into(),
            ));
        }
        if lo.iter().zip(&hi).any(|(l, h)| !(l < h)) {
            return Err(LabError::InvalidParameter(
                "histogram bounds need lo < hi componentwise".into(),
            ));
        }
        let cells = (bins_per_dim as f64).powi(lo.len() as i32);
        if cells > (1u64 << 26) as f64 {
            return Err(LabError::InvalidParameter(format!(
                "histogram too fine: {cells} cells"
            )));
        }
        Ok(HistogramSpec {
            lo,
            hi,
            bins_per_dim,
        })
    }

    /// Symmetric cube `[-radius, radius]^dim`.
    pub fn symmetric(dim: usize, radius: f64, bins_per_dim: usize) -> Result<Self> {
        Self::new(vec![-radius; dim], vec![radius; dim], bins_per_dim)
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn bins_per_dim(&self) -> usize {
        self.bins_per_dim
    }

    pub fn cells(&self) -> usize {
        self.bins_per_dim.pow(self.dim() as u32)
    }

    /// Scales both bounds by `m > 0`, the grid image under `x -> m x`.
    pub fn rescaled(&self, m: f64) -> HistogramSpec {
        HistogramSpec {
            lo: self.lo.iter().map(|v| v * m).collect(),
            hi: self.hi.iter().map(|v| v * m).collect(),
            bins_per_dim: self.bins_per_dim,
        }
    }

    /// Flat cell index, or `None` for the overflow bin.
    fn cell_index(&self, x: &[f64]) -> Option<usize> {
        let b = self.bins_per_dim;
        let mut idx = 0usize;
        for d in 0..self.dim() {
            let v = x[d];
            if v < self.lo[d] || v > self.hi[d] {
                return None;
            }
            let t = (v - self.lo[d]) / (self.hi[d] - self.lo[d]) * b as f64;
            let cell = (t as usize).min(b - 1);
            idx = idx * b + cell;
        }
        Some(idx)
    }

    fn bin_masses(&self, m: &EmpiricalMeasure) -> (Vec<f64>, f64) {
        let mut masses = vec![0.0; self.cells()];
        let mut overflow = 0.0;
        for (p, w) in m.points().zip(m.weights()) {
            match self.cell_index(p) {
                Some(i) => masses[i] += w,
                None => overflow += w,
            }
        }
        (masses, overflow)
    }
}

/// Total variation distance of the binned measures: half the L1 distance
/// of cell masses plus the overflow-bin disagreement. A lower bound on
/// the true total variation, deterministic for fixed inputs.
pub fn tv_histogram(a: &EmpiricalMeasure, b: &EmpiricalMeasure, spec: &HistogramSpec) -> Result<f64> {
    if a.dim() != spec.dim() || b.dim() != spec.dim() {
        return Err(LabError::DimensionMismatch {
            expected: spec.dim(),
            got: if a.dim() != spec.dim() { a.dim() } else { b.dim() },
        });
    }
    let (pa, oa) = spec.bin_masses(a);
    let (pb, ob) = spec.bin_masses(b);
    let mut acc = (oa - ob).abs();
    for (x, y) in pa.iter().zip(&pb) {
        acc += (x - y).abs();
    }
    // weight rounding can push the sum a few ulps past 1
    Ok((0.5 * acc).min(1.0))
}

/// Analytic cell masses of a diagonal Gaussian on the grid, with the
/// overflow mass.
pub fn gaussian_bin_masses(g: &GaussianOracle, spec: &HistogramSpec) -> Result<(Vec<f64>, f64)> {
    if g.dim() != spec.dim() {
        return Err(LabError::DimensionMismatch {
            expected: spec.dim(),
            got: g.dim(),
        });
    }
    let b = spec.bins_per_dim;
    let dim = spec.dim();
    // per-dimension interval masses
    let mut per_dim: Vec<Vec<f64>> = Vec::with_capacity(dim);
    for d in 0..dim {
        let m = g.mean()[d];
        let sd = g.variances()[d].sqrt();
        let width = (spec.hi[d] - spec.lo[d]) / b as f64;
        let cdf_at = |t: f64| normal_cdf((t - m) / sd);
        let mut masses = Vec::with_capacity(b);
        let mut prev = cdf_at(spec.lo[d]);
        for j in 1..=b {
            let next = cdf_at(spec.lo[d] + j as f64 * width);
            masses.push((next - prev).max(0.0));
            prev = next;
        }
        per_dim.push(masses);
    }
    let mut cells = vec![0.0; spec.cells()];
    let mut index = vec![0usize; dim];
    for cell in cells.iter_mut() {
        let mut mass = 1.0;
        for d in 0..dim {
            mass *= per_dim[d][index[d]];
        }
        *cell = mass;
        // odometer increment (row-major to match cell_index)
        for d in (0..dim).rev() {
            index[d] += 1;
            if index[d] < b {
                break;
            }
            index[d] = 0;
        }
    }
    let in_range: f64 = per_dim
        .iter()
        .map(|m| m.iter().sum::<f64>())
        .product();
    Ok((cells, (1.0 - in_range).max(0.0)))
}

/// Binned total variation between a sample cloud and the analytic
/// diagonal Gaussian, sharing the overflow-bin convention of
/// [`tv_histogram`].
pub fn tv_histogram_vs_gaussian(
    a: &EmpiricalMeasure,
    g: &GaussianOracle,
    spec: &HistogramSpec,
) -> Result<f64> {
    if a.dim() != spec.dim() {
        return Err(LabError::DimensionMismatch {
            expected: spec.dim(),
            got: a.dim(),
        });
    }
    let (pa, oa) = spec.bin_masses(a);
    let (qb, ob) = gaussian_bin_masses(g, spec)?;
    let mut acc = (oa - ob).abs();
    for (x, y) in pa.iter().zip(&qb) {
        acc += (x - y).abs();
    }
    Ok((0.5 * acc).min(1.0))
}

/// KL divergence between diagonal Gaussians:
/// `sum_i 1/2 (v_a/v_b - 1 - ln(v_a/v_b) + (m_a - m_b)^2 / v_b)`.
pub fn kl_gaussian(a: &GaussianOracle, b: &GaussianOracle) -> Result<f64> {
    if a.dim() != b.dim() {
        return Err(LabError::DimensionMismatch {
            expected: a.dim(),
            got: b.dim(),
        });
    }
    let mut acc = 0.0;
    for i in 0..a.dim() {
        let ratio = a.variances()[i] / b.variances()[i];
        let dm = a.mean()[i] - b.mean()[i];
        acc += 0.5 * (ratio - 1.0 - ratio.ln() + dm * dm / b.variances()[i]);
    }
    Ok(acc)
}

/// Exact 2-Wasserstein distance between diagonal Gaussians:
/// `sqrt(|m_a - m_b|^2 + sum_i (s_a,i - s_b,i)^2)`.
pub fn w2_gaussian(a: &GaussianOracle, b: &GaussianOracle) -> Result<f64> {
    if a.dim() != b.dim() {
        return Err(LabError::DimensionMismatch {
            expected: a.dim(),
            got: b.dim(),
        });
    }
    let mut acc = 0.0;
    for i in 0..a.dim() {
        let dm = a.mean()[i] - b.mean()[i];
        let ds = a.variances()[i].sqrt() - b.variances()[i].sqrt();
        acc += dm * dm + ds * ds;
    }
    Ok(acc.sqrt())
}

fn adaptive_simpson<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    fa: f64,
    b: f64,
    fb: f64,
    fm: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        left + right + delta / 15.0
    } else {
        adaptive_simpson(f, a, fa, m, fm, flm, left, 0.5 * tol, depth - 1)
            + adaptive_simpson(f, m, fm, b, fb, frm, right, 0.5 * tol, depth - 1)
    }
}

fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> f64 {
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    adaptive_simpson(&f, a, fa, b, fb, fm, whole, tol, 52)
}

/// Exact total variation between 1-D Gaussians. Equal variances reduce to
/// the closed form `2 Phi(|dm| / (2 s)) - 1`; unequal variances integrate
/// the absolute density difference by adaptive quadrature to 1e-9.
pub fn tv_gaussian_1d(a: &GaussianOracle, b: &GaussianOracle) -> Result<f64> {
    if a.dim() != 1 || b.dim() != 1 {
        return Err(LabError::DimensionMismatch {
            expected: 1,
            got: a.dim().max(b.dim()),
        });
    }
    let (ma, va) = (a.mean()[0], a.variances()[0]);
    let (mb, vb) = (b.mean()[0], b.variances()[0]);
    if (va - vb).abs() <= 1e-14 * va.max(vb) {
        let s = va.sqrt();
        return Ok(2.0 * normal_cdf((ma - mb).abs() / (2.0 * s)) - 1.0);
    }
    let (sa, sb) = (va.sqrt(), vb.sqrt());
    let lo = (ma - 12.0 * sa).min(mb - 12.0 * sb);
    let hi = (ma + 12.0 * sa).max(mb + 12.0 * sb);
    let density_gap = move |x: f64| {
        let pa = (-0.5 * (x - ma) * (x - ma) / va).exp() / (sa * (2.0 * std::f64::consts::PI).sqrt());
        let pb = (-0.5 * (x - mb) * (x - mb) / vb).exp() / (sb * (2.0 * std::f64::consts::PI).sqrt());
        (pa - pb).abs()
    };
    Ok(0.5 * integrate(density_gap, lo, hi, 1e-11))
}

/// Pinsker's inequality: an upper bound `sqrt(kl / 2)` on total variation.
pub fn pinsker_tv_bound(kl: f64) -> Result<f64> {
    if kl < 0.0 {
        return Err(LabError::InvalidParameter(format!(
            "KL divergence cannot be negative, got {kl}"
        )));
    }
    Ok((kl / 2.0).sqrt())
}

/// Exact law of the Langevin kernel on a standard Gaussian target in one
/// dimension: starting from `N(x0, sigma0_sq)` and stepping with constant
/// `gamma`, the `n`-th iterate is Gaussian with
/// `mean = (1 - gamma)^n x0` and variance following
/// `v_{k+1} = (1 - gamma)^2 v_k + 2 gamma` (fixed point `1/(1 - gamma/2)`).
pub fn ula_gaussian_law(x0: f64, sigma0_sq: f64, gamma: f64, n: u64) -> Result<(f64, f64)> {
    if !(gamma > 0.0 && gamma < 2.0) {
        return Err(LabError::InvalidParameter(format!(
            "gamma must lie in (0, 2), got {gamma}"
        )));
    }
    if sigma0_sq < 0.0 {
        return Err(LabError::InvalidParameter(
            "initial variance cannot be negative".into(),
        ));
    }
    if n == 0 {
        return Ok((x0, sigma0_sq));
    }
    let contraction = 1.0 - gamma;
    let a = contraction * contraction;
    let fixed_point = 1.0 / (1.0 - gamma / 2.0);
    let mean = contraction.powf(n as f64) * x0;
    let variance = fixed_point + a.powf(n as f64) * (sigma0_sq - fixed_point);
    Ok((mean, variance))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scalar(mean: f64, var: f64) -> GaussianOracle {
        GaussianOracle::scalar(mean, var).unwrap()
    }

    #[test]
    fn w2_1d_examples() {
        let d0 = EmpiricalMeasure::from_scalars(&[0.0]).unwrap();
        let d1 = EmpiricalMeasure::from_scalars(&[1.0]).unwrap();
        assert!((w2_1d(&d0, &d1).unwrap() - 1.0).abs() < 1e-14);

        let a = EmpiricalMeasure::from_scalars(&[0.0, 2.0]).unwrap();
        let b = EmpiricalMeasure::from_scalars(&[1.0, 3.0]).unwrap();
        assert!((w2_1d(&a, &b).unwrap() - 1.0).abs() < 1e-14);

        assert_eq!(w2_1d(&a, &a).unwrap(), 0.0);
    }

    #[test]
    fn w2_1d_weighted_against_hand_computed_coupling() {
        // a = 0.75 delta_0 + 0.25 delta_2, b = delta_1:
        // W2^2 = 0.75 * 1 + 0.25 * 1 = 1
        let a = EmpiricalMeasure::weighted(vec![vec![0.0], vec![2.0]], vec![0.75, 0.25]).unwrap();
        let b = EmpiricalMeasure::from_scalars(&[1.0]).unwrap();
        assert!((w2_1d(&a, &b).unwrap() - 1.0).abs() < 1e-14);

        // unequal sizes with equal weights: quantile coupling by hand
        // a = {0, 1}, b = {0, 0.5, 1}: pieces (1/3)(0-0)^2 + (1/6)(0-.5)^2
        //  + (1/3)(1-.5)^2 + ... total = 1/6*0.25 + 1/6*0.25 = 1/12... compute:
        let a = EmpiricalMeasure::from_scalars(&[0.0, 1.0]).unwrap();
        let b = EmpiricalMeasure::from_scalars(&[0.0, 0.5, 1.0]).unwrap();
        // segments: [0,1/3):(0,0) ; [1/3,1/2):(0,0.5) ; [1/2,2/3):(1,0.5) ; [2/3,1]:(1,1)
        let expected = ((1.0 / 6.0) * 0.25 + (1.0 / 6.0) * 0.25f64).sqrt();
        assert!((w2_1d(&a, &b).unwrap() - expected).abs() < 1e-12);
    }

    #[test]
    fn sliced_w2_examples() {
        let pts: Vec<Vec<f64>> = (0..40)
            .map(|i| vec![(i as f64 * 0.37).sin(), (i as f64 * 0.71).cos()])
            .collect();
        let a = EmpiricalMeasure::equal_weight(pts.clone()).unwrap();
        assert_eq!(sliced_w2(&a, &a, 16, 3).unwrap(), 0.0);

        // d = 1 equals the exact 1-D distance for any direction count
        let a1 = EmpiricalMeasure::from_scalars(&[0.0, 1.0, 2.0]).unwrap();
        let b1 = EmpiricalMeasure::from_scalars(&[0.5, 1.5, 2.5]).unwrap();
        let exact = w2_1d(&a1, &b1).unwrap();
        for n_proj in [1, 5, 32] {
            assert!((sliced_w2(&a1, &b1, n_proj, 9).unwrap() - exact).abs() < 1e-12);
        }

        // translation by c in 1-D gives |c|
        let shifted = EmpiricalMeasure::from_scalars(&[0.7, 1.7, 2.7]).unwrap();
        assert!((sliced_w2(&a1, &shifted, 8, 1).unwrap() - 0.7).abs() < 1e-12);
    }

    #[test]
    fn tv_histogram_examples() {
        let spec = HistogramSpec::symmetric(1, 4.0, 8).unwrap();
        let a = EmpiricalMeasure::from_scalars(&[-1.0, 1.0]).unwrap();
        assert_eq!(tv_histogram(&a, &a, &spec).unwrap(), 0.0);

        // disjoint supports in distinct bins
        let left = EmpiricalMeasure::from_scalars(&[-3.0, -2.0]).unwrap();
        let right = EmpiricalMeasure::from_scalars(&[2.0, 3.0]).unwrap();
        assert_eq!(tv_histogram(&left, &right, &spec).unwrap(), 1.0);

        // discrete p = (0.5, 0.5), q = (1, 0) on two bins
        let p = EmpiricalMeasure::weighted(vec![vec![-2.0], vec![2.0]], vec![0.5, 0.5]).unwrap();
        let q = EmpiricalMeasure::from_scalars(&[-2.0]).unwrap();
        assert!((tv_histogram(&p, &q, &spec).unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn tv_histogram_overflow_bin() {
        let spec = HistogramSpec::symmetric(1, 1.0, 4).unwrap();
        let inside = EmpiricalMeasure::from_scalars(&[0.0]).unwrap();
        let outside = EmpiricalMeasure::from_scalars(&[10.0]).unwrap();
        assert_eq!(tv_histogram(&inside, &outside, &spec).unwrap(), 1.0);
        assert_eq!(tv_histogram(&outside, &outside, &spec).unwrap(), 0.0);
    }

    #[test]
    fn kl_gaussian_examples() {
        let std = scalar(0.0, 1.0);
        assert_eq!(kl_gaussian(&std, &std).unwrap(), 0.0);
        assert!((kl_gaussian(&scalar(1.0, 1.0), &std).unwrap() - 0.5).abs() < 1e-15);
        let e = std::f64::consts::E;
        let expected = 0.5 * (e - 2.0);
        assert!((kl_gaussian(&scalar(0.0, e), &std).unwrap() - expected).abs() < 1e-12);
    }

    #[test]
    fn w2_gaussian_examples() {
        let std = scalar(0.0, 1.0);
        assert_eq!(w2_gaussian(&std, &scalar(1.0, 1.0)).unwrap(), 1.0);
        assert_eq!(w2_gaussian(&std, &scalar(0.0, 4.0)).unwrap(), 1.0);
        assert_eq!(w2_gaussian(&std, &std).unwrap(), 0.0);
    }

    #[test]
    fn tv_gaussian_examples() {
        let std = scalar(0.0, 1.0);
        assert_eq!(tv_gaussian_1d(&std, &std).unwrap(), 0.0);
        let tv = tv_gaussian_1d(&std, &scalar(1.0, 1.0)).unwrap();
        assert!((tv - 0.382925).abs() < 1e-6, "tv = {tv}");
        let tv = tv_gaussian_1d(&std, &scalar(4.0, 1.0)).unwrap();
        assert!((tv - 0.954500).abs() < 1e-6, "tv = {tv}");
    }

    #[test]
    fn tv_gaussian_quadrature_matches_exact_crossing_formula() {
        // For zero means and unequal variances the crossing points are
        // +/- c with c^2 = 2 ln(sb/sa) / (1/va - 1/vb); TV in closed form
        // via the CDFs at the crossings.
        let a = scalar(0.0, 1.0);
        let b = scalar(0.0, 4.0);
        let c = ((2.0 * (2.0f64).ln()) / (1.0 - 0.25)).sqrt();
        let exact = (normal_cdf(c) - normal_cdf(-c)) - (normal_cdf(c / 2.0) - normal_cdf(-c / 2.0));
        let tv = tv_gaussian_1d(&a, &b).unwrap();
        assert!((tv - exact).abs() < 1e-9, "tv {tv} vs exact {exact}");
    }

    #[test]
    fn pinsker_examples() {
        assert_eq!(pinsker_tv_bound(0.0).unwrap(), 0.0);
        assert_eq!(pinsker_tv_bound(2.0).unwrap(), 1.0);
        assert_eq!(pinsker_tv_bound(0.5).unwrap(), 0.5);
        assert!(pinsker_tv_bound(-0.1).is_err());
    }

    #[test]
    fn ula_gaussian_law_examples() {
        let (_, v) = ula_gaussian_law(0.0, 0.0, 0.1, 1).unwrap();
        assert!((v - 0.2).abs() < 1e-15);
        let (_, v) = ula_gaussian_law(0.0, 0.0, 0.1, 100_000).unwrap();
        assert!((v - 1.0 / 0.95).abs() < 1e-12);
        let (m, v) = ula_gaussian_law(3.0, 0.7, 0.1, 0).unwrap();
        assert_eq!((m, v), (3.0, 0.7));
    }

    #[test]
    fn ula_gaussian_law_matches_recursion() {
        let gamma = 0.23;
        let mut v = 0.4;
        let mut m = 1.7;
        for n in 1..=40u64 {
            m *= 1.0 - gamma;
            v = (1.0 - gamma) * (1.0 - gamma) * v + 2.0 * gamma;
            let (mm, vv) = ula_gaussian_law(1.7, 0.4, gamma, n).unwrap();
            assert!((mm - m).abs() < 1e-12 && (vv - v).abs() < 1e-12, "n = {n}");
        }
    }

    #[test]
    fn histogram_pushforward_invariance() {
        // rescaling both clouds and the grid by the same factor leaves the
        // binned TV unchanged
        let pts_a: Vec<Vec<f64>> = (0..200)
            .map(|i| vec![(i as f64 * 0.61).sin() * 1.3, (i as f64 * 0.23).cos()])
            .collect();
        let pts_b: Vec<Vec<f64>> = (0..150)
            .map(|i| vec![(i as f64 * 0.37).cos() * 0.9, (i as f64 * 0.51).sin() * 1.4])
            .collect();
        let a = EmpiricalMeasure::equal_weight(pts_a).unwrap();
        let b = EmpiricalMeasure::equal_weight(pts_b).unwrap();
        let spec = HistogramSpec::symmetric(2, 2.0, 16).unwrap();
        let base = tv_histogram(&a, &b, &spec).unwrap();
        for m in [2.0, 0.5, 3.0] {
            let scaled = tv_histogram(&a.rescaled(m), &b.rescaled(m), &spec.rescaled(m)).unwrap();
            assert_eq!(base.to_bits(), scaled.to_bits(), "m = {m}");
        }
    }

    #[test]
    fn metric_axioms_on_random_clouds() {
        let lane = CounterRng::new(404).reference_lane(9);
        let cloud = |offset: u64, shift: f64| {
            let mut pts = Vec::new();
            for i in 0..60u64 {
                let mut x = [0.0];
                lane.fill_gaussians(offset * 1000 + i, &mut x);
                pts.push(vec![x[0] + shift]);
            }
            EmpiricalMeasure::equal_weight(pts).unwrap()
        };
        let spec = HistogramSpec::symmetric(1, 8.0, 32).unwrap();
        for t in 0..10u64 {
            let a = cloud(3 * t, 0.0);
            let b = cloud(3 * t + 1, 0.5);
            let c = cloud(3 * t + 2, -0.7);
            // symmetry
            assert!((w2_1d(&a, &b).unwrap() - w2_1d(&b, &a).unwrap()).abs() < 1e-10);
            assert!(
                (tv_histogram(&a, &b, &spec).unwrap() - tv_histogram(&b, &a, &spec).unwrap())
                    .abs()
                    < 1e-10
            );
            // triangle inequality
            assert!(
                w2_1d(&a, &c).unwrap()
                    <= w2_1d(&a, &b).unwrap() + w2_1d(&b, &c).unwrap() + 1e-10
            );
            assert!(
                tv_histogram(&a, &c, &spec).unwrap()
                    <= tv_histogram(&a, &b, &spec).unwrap()
                        + tv_histogram(&b, &c, &spec).unwrap()
                        + 1e-10
            );
        }
    }

    #[test]
    fn permutation_invariance() {
        let pts: Vec<Vec<f64>> = (0..50).map(|i| vec![(i as f64 * 0.77).sin()]).collect();
        let mut perm = pts.clone();
        perm.reverse();
        let a = EmpiricalMeasure::equal_weight(pts).unwrap();
        let ap = EmpiricalMeasure::equal_weight(perm).unwrap();
        let b = EmpiricalMeasure::from_scalars(&[0.1, -0.4, 0.9]).unwrap();
        let spec = HistogramSpec::symmetric(1, 2.0, 16).unwrap();
        assert!((w2_1d(&a, &b).unwrap() - w2_1d(&ap, &b).unwrap()).abs() < 1e-14);
        assert_eq!(
            tv_histogram(&a, &b, &spec).unwrap(),
            tv_histogram(&ap, &b, &spec).unwrap()
        );
    }

    #[test]
    fn empirical_w2_converges_to_gaussian_closed_form() {
        let a = scalar(0.0, 1.0);
        let b = scalar(1.0, 2.25);
        let expected = w2_gaussian(&a, &b).unwrap();
        let lane = CounterRng::new(2718).reference_lane(11);
        let n = 100_000u64;
        let mut va = Vec::with_capacity(n as usize);
        let mut vb = Vec::with_capacity(n as usize);
        for i in 0..n {
            let (g0, g1) = lane.gaussian_pair(i, 0);
            va.push(g0);
            vb.push(1.0 + 1.5 * g1);
        }
        let ma = EmpiricalMeasure::from_scalars(&va).unwrap();
        let mb = EmpiricalMeasure::from_scalars(&vb).unwrap();
        let emp = w2_1d(&ma, &mb).unwrap();
        assert!(
            (emp - expected).abs() / expected < 0.02,
            "empirical {emp} vs {expected}"
        );
    }

    #[test]
    fn pinsker_dominates_exact_gaussian_tv() {
        let rng = CounterRng::new(31415);
        for i in 0..100u64 {
            let m1 = 4.0 * rng.uniform(i, 0) - 2.0;
            let m2 = 4.0 * rng.uniform(i, 1) - 2.0;
            let s1 = 0.5 + 1.5 * rng.uniform(i, 2);
            let s2 = 0.5 + 1.5 * rng.uniform(i, 3);
            let a = scalar(m1, s1 * s1);
            let b = scalar(m2, s2 * s2);
            let tv = tv_gaussian_1d(&a, &b).unwrap();
            let bound = pinsker_tv_bound(kl_gaussian(&a, &b).unwrap()).unwrap();
            assert!(bound > tv, "pair {i}: bound {bound} <= tv {tv}");
        }
    }
}
