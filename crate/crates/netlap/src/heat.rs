//! Heat kernels on truncations, semigroup diagnostics, stochastic
//! completeness evidence, and the banded / off-diagonal-growth criteria.
//!
//! The semigroup is realized spectrally: one symmetric eigendecomposition
//! of the truncated generator serves every time slice. Truncations for
//! mass sweeps are Dirichlet-interior: rows and columns outside the
//! exhaustion set are deleted while the diagonal keeps the full family
//! degree, so the killed walk loses mass at the frontier and the mass
//! sequence increases to the minimal-semigroup value.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{self, SymEigen};
use crate::network::{
    apply_laplacian, generate, Exhaustion, Generator, MatrixLaplacianView, ResistanceNetwork,
    VertexFunction,
};

/// One time slice `p_t(x, y)` of the heat kernel on a truncation.
#[derive(Debug, Clone)]
pub struct HeatKernelSlice {
    pub t: f64,
    /// Vertices the kernel is indexed by, in order.
    pub vertices: Vec<usize>,
    pub kernel: DMatrix<f64>,
    /// Whether the generator was a Dirichlet-interior truncation.
    pub dirichlet: bool,
}

impl HeatKernelSlice {
    pub fn row_sums(&self) -> Vec<f64> {
        (0..self.kernel.nrows())
            .map(|i| self.kernel.row(i).sum())
            .collect()
    }

    /// Smallest kernel entry; positivity is checked, not assumed.
    pub fn min_entry(&self) -> f64 {
        self.kernel.iter().fold(f64::INFINITY, |m, &v| m.min(v))
    }

    pub fn symmetry_residual(&self) -> f64 {
        linalg::max_abs_diff(&self.kernel, &self.kernel.transpose())
    }
}

/// A truncated generator with its eigendecomposition, shared by all time
/// slices.
#[derive(Debug, Clone)]
pub struct HeatFlow {
    vertices: Vec<usize>,
    eigen: SymEigen,
    dirichlet: bool,
}

impl HeatFlow {
    /// Generator = the full Laplacian of the finite truncation (row sums
    /// zero; conserves mass).
    pub fn interior(net: &ResistanceNetwork) -> Self {
        let view = MatrixLaplacianView::from_network(net, crate::network::LaplacianMode::Interior);
        HeatFlow {
            vertices: (0..net.len()).collect(),
            eigen: linalg::sym_eigen(&view.to_dense()),
            dirichlet: false,
        }
    }

    /// Dirichlet-interior generator on a vertex subset: off-diagonal
    /// entries within `set`, diagonal carrying the full family degree.
    pub fn dirichlet(net: &ResistanceNetwork, set: &[usize]) -> Self {
        let k = set.len();
        let mut m = DMatrix::zeros(k, k);
        let pos: std::collections::HashMap<usize, usize> =
            set.iter().enumerate().map(|(i, &x)| (x, i)).collect();
        for (i, &x) in set.iter().enumerate() {
            m[(i, i)] = net.full_degree(x);
            for &(y, c) in net.neighbors(x) {
                if let Some(&j) = pos.get(&y) {
                    m[(i, j)] = -c;
                }
            }
        }
        HeatFlow {
            vertices: set.to_vec(),
            eigen: linalg::sym_eigen(&m),
            dirichlet: true,
        }
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    /// `p_t = Σ_j e^{−tλ_j} φ_j φ_j*`; the `t = 0` slice is the identity,
    /// exactly.
    pub fn kernel(&self, t: f64) -> Result<HeatKernelSlice> {
        if t < 0.0 {
            return Err(Error::NegativeTime(t));
        }
        let n = self.len();
        let kernel = if t == 0.0 {
            DMatrix::identity(n, n)
        } else {
            let mut acc = DMatrix::zeros(n, n);
            for j in 0..n {
                let col = self.eigen.vectors.column(j);
                acc += (-t * self.eigen.values[j]).exp() * &col * col.transpose();
            }
            acc
        };
        Ok(HeatKernelSlice {
            t,
            vertices: self.vertices.clone(),
            kernel,
            dirichlet: self.dirichlet,
        })
    }

    /// Applies `S_t = e^{−tΔ}` to a complex function on the truncation.
    pub fn apply(&self, t: f64, u: &VertexFunction) -> Result<VertexFunction> {
        if t < 0.0 {
            return Err(Error::NegativeTime(t));
        }
        if u.len() != self.len() {
            return Err(Error::MissingValue(u.len()));
        }
        if t == 0.0 {
            return Ok(u.clone());
        }
        let n = self.len();
        let v = &self.eigen.vectors;
        // coefficients in the eigenbasis, complex handled per component
        let mut out = vec![Complex64::new(0.0, 0.0); n];
        for j in 0..n {
            let col = v.column(j);
            let mut coef = Complex64::new(0.0, 0.0);
            for i in 0..n {
                coef += col[i] * u.value(i);
            }
            coef *= (-t * self.eigen.values[j]).exp();
            for i in 0..n {
                out[i] += coef * col[i];
            }
        }
        Ok(VertexFunction::new(out))
    }

    /// Heat mass `Σ_y p_t(x, y)` for the row of vertex `x` (an index into
    /// the truncation's vertex list).
    pub fn mass(&self, t: f64, row: usize) -> Result<f64> {
        if t < 0.0 {
            return Err(Error::NegativeTime(t));
        }
        if t == 0.0 {
            return Ok(1.0);
        }
        let n = self.len();
        let v = &self.eigen.vectors;
        let mut total = 0.0;
        for j in 0..n {
            let col = v.column(j);
            let col_sum: f64 = col.iter().sum();
            total += v[(row, j)] * (-t * self.eigen.values[j]).exp() * col_sum;
        }
        Ok(total)
    }
}

/// Heat kernel of the full truncation Laplacian at time `t`.
pub fn heat_kernel(net: &ResistanceNetwork, t: f64) -> Result<HeatKernelSlice> {
    HeatFlow::interior(net).kernel(t)
}

/// Residuals of the semigroup axioms at times `s`, `t`.
#[derive(Debug, Clone)]
pub struct SemigroupReport {
    /// `‖p_s p_t − p_{s+t}‖_max`
    pub composition: f64,
    /// `max(0, ‖S_t u‖ − ‖u‖)`
    pub contraction_excess: f64,
    /// `‖u − S_t u‖`, reported against `t` (strong continuity)
    pub continuity: f64,
    /// `‖(1/t)(u − S_t u) − Δu‖`, first order in `t`
    pub generator: f64,
}

/// Checks the semigroup laws on a truncation for the given times and test
/// function.
pub fn semigroup_checks(
    net: &ResistanceNetwork,
    s: f64,
    t: f64,
    u: &VertexFunction,
) -> Result<SemigroupReport> {
    if s < 0.0 {
        return Err(Error::NegativeTime(s));
    }
    let flow = HeatFlow::interior(net);
    let p_s = flow.kernel(s)?;
    let p_t = flow.kernel(t)?;
    let p_st = flow.kernel(s + t)?;
    let composition = linalg::max_abs_diff(&(&p_s.kernel * &p_t.kernel), &p_st.kernel);

    let stu = flow.apply(t, u)?;
    let contraction_excess = (stu.l2_norm() - u.l2_norm()).max(0.0);

    let diff = VertexFunction::new(
        u.values()
            .iter()
            .zip(stu.values())
            .map(|(a, b)| a - b)
            .collect(),
    );
    let continuity = diff.l2_norm();

    let generator = if t == 0.0 {
        0.0
    } else {
        let lap = apply_laplacian(net, u)?;
        let res = VertexFunction::new(
            diff.values()
                .iter()
                .zip(lap.values.values())
                .map(|(d, l)| d / t - l)
                .collect(),
        );
        res.l2_norm()
    };
    Ok(SemigroupReport {
        composition,
        contraction_excess,
        continuity,
        generator,
    })
}

/// Dirichlet-truncation mass sequence `k ↦ Σ_y p_t(x, y)` along the
/// natural exhaustion `F_k = {0, …, k}` of a generated family.
///
/// The sequence is nondecreasing in `k` and bounded by one; a persistent
/// deficit is numerical evidence of stochastic incompleteness.
pub fn stochastic_mass(
    family: &Generator,
    k_max: usize,
    t: f64,
    x: usize,
) -> Result<Vec<(usize, f64)>> {
    if t < 0.0 {
        return Err(Error::NegativeTime(t));
    }
    let k_min = x.max(1);
    if k_max < k_min {
        return Err(Error::TruncationTooSmall(format!(
            "k_max = {k_max} but the sweep must start at {k_min}"
        )));
    }
    let mut out = Vec::with_capacity(k_max - k_min + 1);
    for k in k_min..=k_max {
        let net = generate(family, k + 1)?;
        let set: Vec<usize> = (0..=k).collect();
        let flow = HeatFlow::dirichlet(&net, &set);
        out.push((k, flow.mass(t, x)?));
    }
    Ok(out)
}

/// Trend verdict for partial-sum divergence criteria. Verdicts are
/// numerical evidence, never proofs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TrendVerdict {
    CriterionMet,
    Inconclusive,
}

/// Divergence-trend test on a partial-sum sequence.
///
/// Geometrically decaying gains over the tail are taken as
/// summable-series evidence (inconclusive). Otherwise the sums are fit
/// against `log k` over the last half of the sweep and the criterion is
/// met when they grow by at least 2% of the current total per doubling
/// of `k`.
pub fn divergence_trend(partial_sums: &[f64]) -> TrendVerdict {
    if partial_sums.iter().any(|s| s.is_infinite()) {
        return TrendVerdict::CriterionMet;
    }
    let n = partial_sums.len();
    if n < 2 {
        return TrendVerdict::Inconclusive;
    }
    let gains: Vec<f64> = partial_sums.windows(2).map(|w| w[1] - w[0]).collect();
    let w = (gains.len() / 2).max(2).min(gains.len());
    let window = &gains[gains.len() - w..];
    let first = window[0];
    let last = *window.last().unwrap();
    if w >= 2 && first > 0.0 {
        let decay = (last / first).powf(1.0 / (w as f64 - 1.0));
        if decay <= 0.8 {
            return TrendVerdict::Inconclusive;
        }
    }
    let start = n / 2;
    let xs: Vec<f64> = (start..n).map(|i| ((i + 1) as f64).ln()).collect();
    let ys = &partial_sums[start..];
    let mean_x = xs.iter().sum::<f64>() / xs.len() as f64;
    let mean_y = ys.iter().sum::<f64>() / ys.len() as f64;
    let var_x: f64 = xs.iter().map(|x| (x - mean_x).powi(2)).sum();
    if var_x == 0.0 {
        return TrendVerdict::Inconclusive;
    }
    let cov: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| (x - mean_x) * (y - mean_y))
        .sum();
    let slope = cov / var_x;
    let last = *partial_sums.last().unwrap();
    if slope * std::f64::consts::LN_2 > 0.02 * last.max(f64::MIN_POSITIVE) {
        TrendVerdict::CriterionMet
    } else {
        TrendVerdict::Inconclusive
    }
}

/// Sphere-by-sphere degree data for the completeness criteria.
#[derive(Debug, Clone)]
pub struct WojciechowskiReport {
    /// Whether every computed sphere has constant combinatorial degree.
    pub spherically_symmetric: bool,
    /// `(r, value)` where `value` is `m(r)` for symmetric input and the
    /// sphere maximum `M(r)` otherwise.
    pub sphere_degrees: Vec<(usize, usize)>,
    /// Partial sums of `Σ 1/value`.
    pub partial_sums: Vec<f64>,
    pub verdict: TrendVerdict,
}

/// Partial sums of the reciprocal sphere degrees from `x0` outward, on
/// the unweighted combinatorial graph.
///
/// Divergence of `Σ 1/m(r)` (spherically symmetric trees) or `Σ 1/M(r)`
/// (general graphs) indicates completeness; convergence is inconclusive.
pub fn wojciechowski_criterion(
    net: &ResistanceNetwork,
    x0: usize,
    r_max: usize,
) -> WojciechowskiReport {
    // combinatorial degree, counting the generated edge out of a
    // half-line frontier vertex
    let comb_degree = |x: usize| -> usize {
        net.neighbors(x).len() + usize::from(net.boundary_excess(x) > 0.0)
    };

    let n = net.len();
    let mut dist = vec![usize::MAX; n];
    dist[x0] = 0;
    let mut queue = std::collections::VecDeque::from([x0]);
    while let Some(v) = queue.pop_front() {
        for &(w, _) in net.neighbors(v) {
            if dist[w] == usize::MAX {
                dist[w] = dist[v] + 1;
                queue.push_back(w);
            }
        }
    }

    let mut spheres: Vec<Vec<usize>> = Vec::new();
    for x in 0..n {
        let r = dist[x];
        if r <= r_max {
            if spheres.len() <= r {
                spheres.resize(r + 1, Vec::new());
            }
            spheres[r].push(x);
        }
    }

    let mut symmetric = true;
    let mut sphere_degrees = Vec::new();
    let mut partial_sums = Vec::new();
    let mut acc = 0.0;
    for (r, sphere) in spheres.iter().enumerate() {
        let degrees: Vec<usize> = sphere.iter().map(|&x| comb_degree(x)).collect();
        let max = *degrees.iter().max().unwrap();
        if degrees.iter().any(|&d| d != max) {
            symmetric = false;
        }
        sphere_degrees.push((r, max));
        acc += 1.0 / max as f64;
        partial_sums.push(acc);
    }
    let verdict = divergence_trend(&partial_sums);
    WojciechowskiReport {
        spherically_symmetric: symmetric,
        sphere_degrees,
        partial_sums,
        verdict,
    }
}

/// Row sparsity profile of a matrix view.
#[derive(Debug, Clone)]
pub struct BandProfile {
    pub per_row_nonzeros: Vec<usize>,
    /// Largest row count, when it is nontrivial (smaller than the
    /// dimension); `None` for dense rows.
    pub uniform_band: Option<usize>,
}

/// Counts nonzero entries per row, including the diagonal.
pub fn band_profile(view: &MatrixLaplacianView) -> BandProfile {
    let n = view.len();
    let per_row_nonzeros: Vec<usize> = (0..n)
        .map(|x| {
            view.off_diagonal_row(x)
                .iter()
                .filter(|(_, v)| *v != 0.0)
                .count()
                + usize::from(view.diagonal(x) != 0.0)
        })
        .collect();
    let max = per_row_nonzeros.iter().copied().max().unwrap_or(0);
    BandProfile {
        uniform_band: (max < n).then_some(max),
        per_row_nonzeros,
    }
}

/// Off-diagonal growth data along a nested filtration.
#[derive(Debug, Clone)]
pub struct GrowthReport {
    /// `‖P_k^⊥ A P_k‖`, the spectral norm of the block from `F_k` to its
    /// complement.
    pub norms: Vec<f64>,
    /// Partial sums of the reciprocals; `+∞` once a block vanishes.
    pub partial_sums: Vec<f64>,
    pub verdict: TrendVerdict,
}

/// Computes `‖P_k^⊥ A P_k‖` for each set of the filtration and applies
/// the divergence-trend test to `Σ 1/‖·‖` (a sufficient criterion for
/// essential self-adjointness, so `Inconclusive` decides nothing).
pub fn off_diagonal_growth(view: &MatrixLaplacianView, sets: &Exhaustion) -> GrowthReport {
    let n = view.len();
    let mut norms = Vec::with_capacity(sets.len());
    let mut partial_sums = Vec::with_capacity(sets.len());
    let mut acc = 0.0;
    for set in sets.sets() {
        let inside = set.clone();
        let outside: Vec<usize> = (0..n).filter(|x| inside.binary_search(x).is_err()).collect();
        let mut block = DMatrix::zeros(outside.len(), inside.len());
        for (i, &x) in outside.iter().enumerate() {
            for (j, &y) in inside.iter().enumerate() {
                block[(i, j)] = view.entry(x, y);
            }
        }
        let norm = linalg::spectral_norm(&block);
        norms.push(norm);
        if norm == 0.0 {
            acc = f64::INFINITY;
        } else {
            acc += 1.0 / norm;
        }
        partial_sums.push(acc);
    }
    let verdict = divergence_trend(&partial_sums);
    GrowthReport {
        norms,
        partial_sums,
        verdict,
    }
}
