//! Resistance networks, matrix Laplacians, and the energy form.
//!
//! A network here is a finite connected weighted graph, possibly the
//! truncation of an infinite generated family. Conductances are kept both
//! as `f64` (the generic engine) and as exact rationals, so that solvers
//! and regression checks can run exactly whenever the inputs are rational
//! (every finite `f64` input is a dyadic rational).

use std::collections::BinaryHeap;

use num_complex::Complex64;
use num_traits::Zero;

use crate::error::{Error, Result};
use crate::exact::{rational_from_f64, rational_to_f64, Rational};

/// Default absolute tolerance for identity residuals.
pub const DEFAULT_TOL: f64 = 1e-10;

/// Infinite families whose truncations the generators produce.
#[derive(Debug, Clone, PartialEq)]
pub enum Generator {
    /// Nonnegative integers with edge `k-1 — k` of conductance `b^k`, `b > 1`.
    GeometricHalfline { ratio: Rational },
    /// Nonnegative integers with unit conductances.
    UnitPath,
    /// Complete binary tree, truncated breadth-first to the requested size.
    BinaryTree,
    /// Complete graph with unit conductances.
    Complete,
    /// Random connected graph with seeded, reproducible weights.
    RandomWeighted { seed: u64 },
}

impl Generator {
    /// Stable name used in file tags and CLI flags.
    pub fn name(&self) -> &'static str {
        match self {
            Generator::GeometricHalfline { .. } => "geometric_halfline",
            Generator::UnitPath => "unit_path",
            Generator::BinaryTree => "binary_tree",
            Generator::Complete => "complete",
            Generator::RandomWeighted { .. } => "random_weighted",
        }
    }

    /// Whether truncations of this family have edges leading outside.
    pub fn is_half_line(&self) -> bool {
        matches!(
            self,
            Generator::GeometricHalfline { .. } | Generator::UnitPath
        )
    }
}

/// A finite connected weighted graph with a distinguished origin.
///
/// Vertices are indexed `0..n`. Conductance data is immutable after
/// construction; all operations are pure functions of their inputs.
#[derive(Debug, Clone)]
pub struct ResistanceNetwork {
    n: usize,
    origin: usize,
    /// Per-vertex neighbor list `(neighbor, conductance)`, sorted by neighbor.
    adj: Vec<Vec<(usize, f64)>>,
    adj_exact: Vec<Vec<(usize, Rational)>>,
    degree: Vec<f64>,
    degree_exact: Vec<Rational>,
    /// Conductance from each vertex to generated vertices outside the
    /// truncation (zero except at the frontier of a half-line family).
    boundary_excess: Vec<f64>,
    family: Option<Generator>,
    labels: Option<Vec<String>>,
}

impl ResistanceNetwork {
    fn from_rational_edges(
        n: usize,
        edges: Vec<(usize, usize, Rational)>,
        origin: usize,
        family: Option<Generator>,
    ) -> Result<Self> {
        if n == 0 || edges.is_empty() {
            return Err(Error::EmptyNetwork);
        }
        if origin >= n {
            return Err(Error::InvalidParameter(format!(
                "origin {origin} out of range for {n} vertices"
            )));
        }
        let zero = Rational::zero();
        let mut weight = std::collections::BTreeMap::<(usize, usize), Rational>::new();
        for (u, v, c) in edges {
            if u >= n || v >= n {
                return Err(Error::InvalidParameter(format!(
                    "edge ({u}, {v}) out of range for {n} vertices"
                )));
            }
            if c < zero {
                return Err(Error::NegativeConductance {
                    u,
                    v,
                    value: rational_to_f64(&c),
                });
            }
            if u == v {
                if c > zero {
                    return Err(Error::SelfLoop(u));
                }
                continue;
            }
            if c.is_zero() {
                continue;
            }
            let key = (u.min(v), u.max(v));
            *weight.entry(key).or_insert_with(Rational::zero) += c;
        }
        let mut adj_exact = vec![Vec::new(); n];
        for ((u, v), c) in weight {
            adj_exact[u].push((v, c.clone()));
            adj_exact[v].push((u, c));
        }
        for row in &mut adj_exact {
            row.sort_by_key(|(v, _)| *v);
        }
        let adj: Vec<Vec<(usize, f64)>> = adj_exact
            .iter()
            .map(|row| row.iter().map(|(v, c)| (*v, rational_to_f64(c))).collect())
            .collect();
        let degree_exact: Vec<Rational> = adj_exact
            .iter()
            .map(|row| row.iter().map(|(_, c)| c.clone()).sum())
            .collect();
        let degree: Vec<f64> = adj.iter().map(|row| row.iter().map(|(_, c)| c).sum()).collect();

        let net = ResistanceNetwork {
            n,
            origin,
            adj,
            adj_exact,
            degree,
            degree_exact,
            boundary_excess: vec![0.0; n],
            family,
            labels: None,
        };
        net.check_connected()?;
        for (x, d) in net.degree.iter().enumerate() {
            if *d <= 0.0 {
                // Unreachable after the connectivity check, kept as a guard.
                return Err(Error::Disconnected {
                    from: origin,
                    unreachable: x,
                });
            }
        }
        Ok(net)
    }

    fn check_connected(&self) -> Result<()> {
        let mut seen = vec![false; self.n];
        let mut stack = vec![self.origin];
        seen[self.origin] = true;
        while let Some(x) = stack.pop() {
            for &(y, c) in &self.adj[x] {
                if c > 0.0 && !seen[y] {
                    seen[y] = true;
                    stack.push(y);
                }
            }
        }
        match seen.iter().position(|s| !s) {
            Some(x) => Err(Error::Disconnected {
                from: self.origin,
                unreachable: x,
            }),
            None => Ok(()),
        }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn origin(&self) -> usize {
        self.origin
    }

    pub fn family(&self) -> Option<&Generator> {
        self.family.as_ref()
    }

    /// Neighbors of `x` with their conductances, sorted by vertex index.
    pub fn neighbors(&self, x: usize) -> &[(usize, f64)] {
        &self.adj[x]
    }

    pub fn neighbors_exact(&self, x: usize) -> &[(usize, Rational)] {
        &self.adj_exact[x]
    }

    /// Total conductance `c(x)` within the truncation.
    pub fn degree(&self, x: usize) -> f64 {
        self.degree[x]
    }

    pub fn degree_exact(&self, x: usize) -> &Rational {
        &self.degree_exact[x]
    }

    /// Total conductance of `x` in the full generated family.
    pub fn full_degree(&self, x: usize) -> f64 {
        self.degree[x] + self.boundary_excess[x]
    }

    /// Conductance from `x` to generated vertices outside the truncation.
    pub fn boundary_excess(&self, x: usize) -> f64 {
        self.boundary_excess[x]
    }

    /// Vertices with edges leading outside the truncation.
    pub fn boundary_vertices(&self) -> Vec<usize> {
        (0..self.n).filter(|&x| self.boundary_excess[x] > 0.0).collect()
    }

    pub fn conductance(&self, x: usize, y: usize) -> f64 {
        self.adj[x]
            .binary_search_by_key(&y, |(v, _)| *v)
            .map(|i| self.adj[x][i].1)
            .unwrap_or(0.0)
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    pub fn label_of(&self, x: usize) -> String {
        match &self.labels {
            Some(l) => l[x].clone(),
            None => x.to_string(),
        }
    }

    pub(crate) fn set_labels(&mut self, labels: Vec<String>) {
        debug_assert_eq!(labels.len(), self.n);
        self.labels = Some(labels);
    }

    pub(crate) fn set_family(&mut self, family: Generator, excess: Vec<f64>) {
        debug_assert_eq!(excess.len(), self.n);
        self.family = Some(family);
        self.boundary_excess = excess;
    }
}

/// Builds a validated network from an undirected edge list.
///
/// Edge input is symmetrized; duplicate `(u, v)` entries are summed.
/// Weights are captured exactly (finite doubles are dyadic rationals).
pub fn build_network(edges: &[(usize, usize, f64)], origin: usize) -> Result<ResistanceNetwork> {
    let n = edges
        .iter()
        .flat_map(|&(u, v, _)| [u, v])
        .max()
        .map(|m| m + 1)
        .unwrap_or(0)
        .max(origin + 1);
    let exact = edges
        .iter()
        .map(|&(u, v, c)| {
            if c < 0.0 {
                return Err(Error::NegativeConductance { u, v, value: c });
            }
            Ok((u, v, rational_from_f64(c)?))
        })
        .collect::<Result<Vec<_>>>()?;
    ResistanceNetwork::from_rational_edges(n, exact, origin, None)
}

/// Rational-input variant of [`build_network`].
pub fn build_network_exact(
    edges: &[(usize, usize, Rational)],
    origin: usize,
) -> Result<ResistanceNetwork> {
    let n = edges
        .iter()
        .flat_map(|&(u, v, _)| [u, v])
        .max()
        .map(|m| m + 1)
        .unwrap_or(0)
        .max(origin + 1);
    let exact = edges.iter().map(|(u, v, c)| (*u, *v, c.clone())).collect();
    ResistanceNetwork::from_rational_edges(n, exact, origin, None)
}

/// Generates a deterministic truncation of a named family.
///
/// `size` is the vertex count of the truncation. Output is bit-identical
/// for identical parameters, including the seed.
pub fn generate(family: &Generator, size: usize) -> Result<ResistanceNetwork> {
    if size < 2 {
        return Err(Error::InvalidParameter(format!(
            "truncation size must be at least 2, got {size}"
        )));
    }
    let one = Rational::from_integer(1.into());
    match family {
        Generator::GeometricHalfline { ratio } => {
            if *ratio <= one {
                return Err(Error::InvalidRatio(crate::exact::format_rational(ratio)));
            }
            let mut edges = Vec::with_capacity(size - 1);
            let mut weight = ratio.clone();
            for k in 1..size {
                edges.push((k - 1, k, weight.clone()));
                weight *= ratio;
            }
            // `weight` is now b^size, the conductance of the first edge
            // outside the truncation.
            let mut net = ResistanceNetwork::from_rational_edges(size, edges, 0, None)?;
            let mut excess = vec![0.0; size];
            excess[size - 1] = rational_to_f64(&weight);
            net.set_family(family.clone(), excess);
            Ok(net)
        }
        Generator::UnitPath => {
            let edges: Vec<_> = (1..size).map(|k| (k - 1, k, one.clone())).collect();
            let mut net = ResistanceNetwork::from_rational_edges(size, edges, 0, None)?;
            let mut excess = vec![0.0; size];
            excess[size - 1] = 1.0;
            net.set_family(family.clone(), excess);
            Ok(net)
        }
        Generator::BinaryTree => {
            let edges: Vec<_> = (1..size).map(|k| ((k - 1) / 2, k, one.clone())).collect();
            let mut net = ResistanceNetwork::from_rational_edges(size, edges, 0, None)?;
            net.set_family(family.clone(), vec![0.0; size]);
            Ok(net)
        }
        Generator::Complete => {
            let mut edges = Vec::new();
            for u in 0..size {
                for v in (u + 1)..size {
                    edges.push((u, v, one.clone()));
                }
            }
            let mut net = ResistanceNetwork::from_rational_edges(size, edges, 0, None)?;
            net.set_family(family.clone(), vec![0.0; size]);
            Ok(net)
        }
        Generator::RandomWeighted { seed } => {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(*seed);
            let mut edges = Vec::new();
            // Random spanning tree keeps the graph connected; extra edges
            // are added independently.
            for v in 1..size {
                let parent = rng.gen_range(0..v);
                let w: f64 = rng.gen_range(0.5..2.0);
                edges.push((parent, v, w));
            }
            for u in 0..size {
                for v in (u + 1)..size {
                    if rng.gen_bool(0.35) {
                        let w: f64 = rng.gen_range(0.5..2.0);
                        edges.push((u, v, w));
                    }
                }
            }
            let mut net = build_network(&edges, 0)?;
            net.set_family(family.clone(), vec![0.0; size]);
            Ok(net)
        }
    }
}

/// A function on the vertices of a truncation, complex-valued.
///
/// Models finitely supported functions; on a finite truncation every
/// function qualifies, and `support` is derived from the values.
#[derive(Debug, Clone, PartialEq)]
pub struct VertexFunction {
    values: Vec<Complex64>,
}

impl VertexFunction {
    pub fn new(values: Vec<Complex64>) -> Self {
        VertexFunction { values }
    }

    pub fn from_real(values: Vec<f64>) -> Self {
        VertexFunction {
            values: values.into_iter().map(|x| Complex64::new(x, 0.0)).collect(),
        }
    }

    pub fn zero(n: usize) -> Self {
        VertexFunction {
            values: vec![Complex64::ZERO; n],
        }
    }

    pub fn delta(n: usize, x: usize) -> Self {
        let mut values = vec![Complex64::ZERO; n];
        values[x] = Complex64::ONE;
        VertexFunction { values }
    }

    pub fn constant(n: usize, value: Complex64) -> Self {
        VertexFunction {
            values: vec![value; n],
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn value(&self, x: usize) -> Complex64 {
        self.values[x]
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn support(&self) -> Vec<usize> {
        self.values
            .iter()
            .enumerate()
            .filter(|(_, z)| !z.is_zero())
            .map(|(i, _)| i)
            .collect()
    }

    /// ℓ² inner product `⟨self, other⟩`, conjugate-linear in `self`.
    pub fn l2_inner(&self, other: &VertexFunction) -> Complex64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    pub fn l2_norm(&self) -> f64 {
        self.values.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }
}

fn check_len(net: &ResistanceNetwork, u: &VertexFunction) -> Result<()> {
    if u.len() != net.len() {
        return Err(Error::MissingValue(u.len().min(net.len())));
    }
    Ok(())
}

/// Sesquilinear energy form
/// `E(u, v) = ½ Σ c_xy (conj(u(x)) − conj(u(y))) (v(x) − v(y))`.
///
/// `E(u, u)` is real and nonnegative, and vanishes exactly for constant
/// functions on a connected truncation.
pub fn energy(net: &ResistanceNetwork, u: &VertexFunction, v: &VertexFunction) -> Result<Complex64> {
    check_len(net, u)?;
    check_len(net, v)?;
    let mut acc = Complex64::ZERO;
    for x in 0..net.len() {
        for &(y, c) in net.neighbors(x) {
            if y > x {
                let du = u.value(x) - u.value(y);
                let dv = v.value(x) - v.value(y);
                acc += c * du.conj() * dv;
            }
        }
    }
    Ok(acc)
}

/// Real fast path of the energy form for origin-normalized representatives.
pub fn energy_real(net: &ResistanceNetwork, u: &[f64], v: &[f64]) -> f64 {
    let mut acc = 0.0;
    for x in 0..net.len() {
        for &(y, c) in net.neighbors(x) {
            if y > x {
                acc += c * (u[x] - u[y]) * (v[x] - v[y]);
            }
        }
    }
    acc
}

/// Pointwise Laplacian image together with truncation-boundary flags.
///
/// Values at flagged vertices use only edges present in the truncation and
/// would change if the full family row were available.
#[derive(Debug, Clone)]
pub struct PointwiseLaplacian {
    pub values: VertexFunction,
    pub boundary_inexact: Vec<usize>,
}

/// Applies the pointwise Laplacian `(Δu)(x) = Σ_y c_xy (u(x) − u(y))`.
pub fn apply_laplacian(net: &ResistanceNetwork, u: &VertexFunction) -> Result<PointwiseLaplacian> {
    check_len(net, u)?;
    let values = (0..net.len())
        .map(|x| {
            net.neighbors(x)
                .iter()
                .map(|&(y, c)| c * (u.value(x) - u.value(y)))
                .sum()
        })
        .collect();
    Ok(PointwiseLaplacian {
        values: VertexFunction::new(values),
        boundary_inexact: net.boundary_vertices(),
    })
}

/// Real fast path for the pointwise Laplacian.
pub fn apply_laplacian_real(net: &ResistanceNetwork, u: &[f64]) -> Vec<f64> {
    (0..net.len())
        .map(|x| {
            net.neighbors(x)
                .iter()
                .map(|&(y, c)| c * (u[x] - u[y]))
                .sum()
        })
        .collect()
}

/// Residual of the summation-by-parts identity
/// `⟨u, Δu⟩_{ℓ²} = E(u, u)` for finitely supported `u`.
pub fn dirichlet_identity_residual(net: &ResistanceNetwork, u: &VertexFunction) -> Result<f64> {
    let lap = apply_laplacian(net, u)?;
    let lhs = u.l2_inner(&lap.values);
    let rhs = energy(net, u, u)?;
    Ok((lhs - rhs).norm())
}

/// Tightest constant `k` with `|u(x) − u(y)| ≤ k √E(u)` along a single
/// path, `k = (Σ 1/c)^{1/2}` over the minimum-resistance path.
pub fn path_kernel_constant(net: &ResistanceNetwork, x: usize, y: usize) -> Result<f64> {
    if x == y {
        return Ok(0.0);
    }
    // Dijkstra on resistances 1/c.
    let n = net.len();
    let mut dist = vec![f64::INFINITY; n];
    dist[x] = 0.0;
    let mut heap = BinaryHeap::new();
    heap.push((std::cmp::Reverse(ordered(0.0)), x));
    while let Some((std::cmp::Reverse(d), v)) = heap.pop() {
        let d = d.0;
        if d > dist[v] {
            continue;
        }
        if v == y {
            return Ok(d.sqrt());
        }
        for &(w, c) in net.neighbors(v) {
            if c > 0.0 {
                let nd = d + 1.0 / c;
                if nd < dist[w] {
                    dist[w] = nd;
                    heap.push((std::cmp::Reverse(ordered(nd)), w));
                }
            }
        }
    }
    Err(Error::Disconnected {
        from: x,
        unreachable: y,
    })
}

#[derive(PartialEq, PartialOrd)]
struct OrderedF64(f64);
impl Eq for OrderedF64 {}
#[allow(clippy::derive_ord_xor_partial_ord)]
impl Ord for OrderedF64 {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.0.total_cmp(&other.0)
    }
}
fn ordered(x: f64) -> OrderedF64 {
    OrderedF64(x)
}

/// Row-indexed view of the matrix Laplacian `a_xy = −c_xy`, `a_xx = c(x)`.
///
/// For truncations of generated families, the diagonal can carry the full
/// family degree, in which case row-sum checks account for the conductance
/// mass leaving the truncation.
#[derive(Debug, Clone)]
pub struct MatrixLaplacianView {
    n: usize,
    /// Off-diagonal entries per row, `(column, value)`, sorted by column.
    rows: Vec<Vec<(usize, f64)>>,
    diagonal: Vec<f64>,
    /// Conductance mass of generated entries outside the truncation.
    outside_mass: Vec<f64>,
}

/// Diagonal convention for truncations of infinite families.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LaplacianMode {
    /// `a_xx` is the in-truncation degree; every row sums to zero.
    Interior,
    /// `a_xx` is the full family degree; the row-sum check is taken
    /// against the full generated row.
    FamilyRow,
}

impl MatrixLaplacianView {
    pub fn from_network(net: &ResistanceNetwork, mode: LaplacianMode) -> Self {
        let n = net.len();
        let rows: Vec<Vec<(usize, f64)>> = (0..n)
            .map(|x| net.neighbors(x).iter().map(|&(y, c)| (y, -c)).collect())
            .collect();
        let (diagonal, outside_mass) = match mode {
            LaplacianMode::Interior => ((0..n).map(|x| net.degree(x)).collect(), vec![0.0; n]),
            LaplacianMode::FamilyRow => (
                (0..n).map(|x| net.full_degree(x)).collect(),
                (0..n).map(|x| net.boundary_excess(x)).collect(),
            ),
        };
        MatrixLaplacianView {
            n,
            rows,
            diagonal,
            outside_mass,
        }
    }

    /// Builds a view from explicit dense entries (used to probe validation).
    pub fn from_dense(matrix: &nalgebra::DMatrix<f64>) -> Self {
        let n = matrix.nrows();
        let mut rows = vec![Vec::new(); n];
        let mut diagonal = vec![0.0; n];
        for x in 0..n {
            for y in 0..n {
                let v = matrix[(x, y)];
                if x == y {
                    diagonal[x] = v;
                } else if v != 0.0 {
                    rows[x].push((y, v));
                }
            }
        }
        MatrixLaplacianView {
            n,
            rows,
            diagonal,
            outside_mass: vec![0.0; n],
        }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn diagonal(&self, x: usize) -> f64 {
        self.diagonal[x]
    }

    pub fn entry(&self, x: usize, y: usize) -> f64 {
        if x == y {
            return self.diagonal[x];
        }
        self.rows[x]
            .binary_search_by_key(&y, |(v, _)| *v)
            .map(|i| self.rows[x][i].1)
            .unwrap_or(0.0)
    }

    pub fn off_diagonal_row(&self, x: usize) -> &[(usize, f64)] {
        &self.rows[x]
    }

    pub fn to_dense(&self) -> nalgebra::DMatrix<f64> {
        let mut m = nalgebra::DMatrix::zeros(self.n, self.n);
        for x in 0..self.n {
            m[(x, x)] = self.diagonal[x];
            for &(y, v) in &self.rows[x] {
                m[(x, y)] = v;
            }
        }
        m
    }

    /// Dense principal submatrix over the given vertex subset.
    pub fn submatrix(&self, set: &[usize]) -> nalgebra::DMatrix<f64> {
        let k = set.len();
        let mut m = nalgebra::DMatrix::zeros(k, k);
        for (i, &x) in set.iter().enumerate() {
            for (j, &y) in set.iter().enumerate() {
                m[(i, j)] = self.entry(x, y);
            }
        }
        m
    }
}

/// A single violated matrix-Laplacian condition.
#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    /// Condition (i): `a_xy != a_yx`.
    NotSymmetric { x: usize, y: usize },
    /// Condition (ii): positive off-diagonal entry.
    PositiveOffDiagonal { x: usize, y: usize, value: f64 },
    /// Condition (iii): row does not sum to zero (after accounting for
    /// generated mass outside the truncation).
    RowSum { x: usize, sum: f64 },
    /// Derived: negative diagonal entry.
    NegativeDiagonal { x: usize, value: f64 },
}

/// Report from [`validate_matrix_laplacian`]; empty iff the view satisfies
/// every matrix-Laplacian condition.
#[derive(Debug, Clone, Default)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_laplacian(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks symmetry, off-diagonal sign, and zero row sums.
///
/// Violations are report entries, not failures.
pub fn validate_matrix_laplacian(view: &MatrixLaplacianView) -> ValidationReport {
    let mut report = ValidationReport::default();
    let tol = 1e-12;
    for x in 0..view.len() {
        let mut sum = view.diagonal(x);
        for &(y, v) in view.off_diagonal_row(x) {
            sum += v;
            if v > 0.0 {
                report.violations.push(Violation::PositiveOffDiagonal { x, y, value: v });
            }
            if x < y && (v - view.entry(y, x)).abs() > tol {
                report.violations.push(Violation::NotSymmetric { x, y });
            }
        }
        // Rows of a family truncation sum to the mass that left the
        // truncation; the full generated row sums to zero.
        let target = view.outside_mass[x];
        let scale = view.diagonal(x).abs().max(1.0);
        if (sum - target).abs() > tol * scale {
            report.violations.push(Violation::RowSum { x, sum });
        }
        if view.diagonal(x) < 0.0 {
            report.violations.push(Violation::NegativeDiagonal {
                x,
                value: view.diagonal(x),
            });
        }
    }
    report
}

/// A nested family of finite vertex subsets.
///
/// Spectral-side consumers additionally require that no set contains the
/// origin; heat-side consumers use plain nested sets.
#[derive(Debug, Clone)]
pub struct Exhaustion {
    sets: Vec<Vec<usize>>,
}

impl Exhaustion {
    /// Validates strict nesting `F_k ⊂ F_{k+1}` (each set sorted, deduped).
    pub fn new(mut sets: Vec<Vec<usize>>) -> Result<Self> {
        if sets.is_empty() {
            return Err(Error::InvalidExhaustion("no sets given".into()));
        }
        for set in &mut sets {
            set.sort_unstable();
            set.dedup();
            if set.is_empty() {
                return Err(Error::InvalidExhaustion("empty set".into()));
            }
        }
        for k in 1..sets.len() {
            let (prev, next) = (&sets[k - 1], &sets[k]);
            if prev.len() >= next.len() || !prev.iter().all(|x| next.binary_search(x).is_ok()) {
                return Err(Error::InvalidExhaustion(format!(
                    "set {k} does not strictly contain set {}",
                    k - 1
                )));
            }
        }
        Ok(Exhaustion { sets })
    }

    /// Prefix exhaustion of `X \ {origin}`: `F_k` holds the first `k`
    /// non-origin vertices in index order, `k = k_min..=k_max`.
    pub fn origin_free_prefixes(n: usize, origin: usize, k_min: usize, k_max: usize) -> Result<Self> {
        let pool: Vec<usize> = (0..n).filter(|&x| x != origin).collect();
        if k_min < 1 || k_max < k_min || k_max > pool.len() {
            return Err(Error::InvalidExhaustion(format!(
                "prefix range {k_min}..={k_max} invalid for {} available vertices",
                pool.len()
            )));
        }
        let sets = (k_min..=k_max).map(|k| pool[..k].to_vec()).collect();
        Exhaustion::new(sets)
    }

    /// Plain prefix exhaustion of `X`: `F_k = {0, …, k}`, `k = k_min..=k_max`.
    pub fn prefixes(n: usize, k_min: usize, k_max: usize) -> Result<Self> {
        if k_max + 1 > n || k_max < k_min {
            return Err(Error::InvalidExhaustion(format!(
                "prefix range {k_min}..={k_max} invalid for {n} vertices"
            )));
        }
        let sets = (k_min..=k_max).map(|k| (0..=k).collect()).collect();
        Exhaustion::new(sets)
    }

    pub fn sets(&self) -> &[Vec<usize>] {
        &self.sets
    }

    pub fn len(&self) -> usize {
        self.sets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sets.is_empty()
    }

    pub fn excludes(&self, vertex: usize) -> bool {
        self.sets.iter().all(|s| s.binary_search(&vertex).is_err())
    }

    /// Whether the last set equals `{0, …, n−1} \ {origin}`.
    pub fn covers_all_but(&self, n: usize, origin: usize) -> bool {
        let last = self.sets.last().unwrap();
        last.len() == n - 1 && self.excludes(origin)
    }
}

/// Determinants of the principal submatrices `A(F_k)`.
///
/// For a matrix Laplacian every such determinant is nonnegative.
pub fn principal_minor_check(view: &MatrixLaplacianView, exhaustion: &Exhaustion) -> Vec<f64> {
    exhaustion
        .sets()
        .iter()
        .map(|set| view.submatrix(set).determinant())
        .collect()
}
