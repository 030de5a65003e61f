//! Dipole solves, the Gram matrix of energy inner products, and the
//! reproducing-kernel identities.
//!
//! The dipole `v_x` is the solution of `Δv = δ_x − δ_o` normalized to
//! `v(o) = 0`; it reproduces increments: `⟨v_x, u⟩_E = u(x) − u(o)`.
//! On a finite truncation it is column `x` of the inverse reduced
//! Laplacian, extended by zero at the origin.
//!
//! Solver policy: exact rational Gaussian elimination up to
//! [`EXACT_SOLVE_LIMIT`] vertices (conductances are rational, including
//! every `f64` input), dense Cholesky up to [`CHOLESKY_LIMIT`], and
//! Jacobi-preconditioned conjugate gradients beyond that.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use num_traits::Zero;

use crate::error::{Error, Result};
use crate::exact::{rational_to_f64, Rational};
use crate::linalg;
use crate::network::{
    apply_laplacian, apply_laplacian_real, energy, energy_real, LaplacianMode,
    MatrixLaplacianView, ResistanceNetwork, VertexFunction,
};

/// Largest truncation solved by exact rational elimination.
pub const EXACT_SOLVE_LIMIT: usize = 65;
/// Largest truncation solved by dense Cholesky.
pub const CHOLESKY_LIMIT: usize = 2048;

/// Reduced Laplacian: delete the row and column of the origin.
///
/// Strictly positive definite on a connected truncation. Row `i`
/// corresponds to the `i`-th non-origin vertex in index order.
pub fn reduced_laplacian(net: &ResistanceNetwork, origin: usize) -> DMatrix<f64> {
    let keep: Vec<usize> = (0..net.len()).filter(|&x| x != origin).collect();
    MatrixLaplacianView::from_network(net, LaplacianMode::Interior).submatrix(&keep)
}

fn reduced_laplacian_exact(net: &ResistanceNetwork, origin: usize) -> Vec<Vec<Rational>> {
    let keep: Vec<usize> = (0..net.len()).filter(|&x| x != origin).collect();
    let pos: std::collections::HashMap<usize, usize> =
        keep.iter().enumerate().map(|(i, &x)| (x, i)).collect();
    let m = keep.len();
    let mut a = vec![vec![Rational::zero(); m]; m];
    for (i, &x) in keep.iter().enumerate() {
        a[i][i] = net.degree_exact(x).clone();
        for (y, c) in net.neighbors_exact(x) {
            if let Some(&j) = pos.get(y) {
                a[i][j] = -c.clone();
            }
        }
    }
    a
}

/// Solves `a · x = rhs_k` exactly for each right-hand side column.
fn exact_solve_columns(
    mut a: Vec<Vec<Rational>>,
    mut cols: Vec<Vec<Rational>>,
) -> Result<Vec<Vec<Rational>>> {
    let n = a.len();
    let zero = Rational::zero();
    for k in 0..n {
        let pivot_row = (k..n)
            .find(|&r| a[r][k] != zero)
            .ok_or(Error::SingularSystem)?;
        if pivot_row != k {
            a.swap(k, pivot_row);
            for col in &mut cols {
                col.swap(k, pivot_row);
            }
        }
        let pivot = a[k][k].clone();
        for r in (k + 1)..n {
            if a[r][k] == zero {
                continue;
            }
            let factor = &a[r][k] / &pivot;
            for j in k..n {
                let sub = &factor * &a[k][j];
                a[r][j] -= sub;
            }
            for col in &mut cols {
                let sub = &factor * &col[k];
                col[r] -= sub;
            }
        }
    }
    // back substitution
    for col in &mut cols {
        for k in (0..n).rev() {
            let mut acc = col[k].clone();
            for j in (k + 1)..n {
                acc -= &a[k][j] * &col[j];
            }
            col[k] = acc / &a[k][k];
        }
    }
    Ok(cols)
}

/// Origin-normalized representative of an energy-space element.
#[derive(Debug, Clone, PartialEq)]
pub struct EnergyVector {
    origin: usize,
    values: Vec<f64>,
}

impl EnergyVector {
    /// Wraps a representative, shifting it so the origin value is zero.
    pub fn from_representative(origin: usize, mut values: Vec<f64>) -> Self {
        let shift = values[origin];
        if shift != 0.0 {
            for v in &mut values {
                *v -= shift;
            }
        }
        EnergyVector { origin, values }
    }

    pub fn origin(&self) -> usize {
        self.origin
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn value(&self, x: usize) -> f64 {
        self.values[x]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn to_vertex_function(&self) -> VertexFunction {
        VertexFunction::from_real(self.values.clone())
    }

    /// Linear combination `Σ coeff_i · member_i` of equally sized vectors.
    pub fn combine(members: &[EnergyVector], coeffs: &[f64]) -> EnergyVector {
        assert_eq!(members.len(), coeffs.len());
        assert!(!members.is_empty());
        let origin = members[0].origin;
        let mut values = vec![0.0; members[0].len()];
        for (m, &c) in members.iter().zip(coeffs) {
            for (acc, v) in values.iter_mut().zip(m.values()) {
                *acc += c * v;
            }
        }
        EnergyVector { origin, values }
    }
}

/// Solver backend selection for dipole systems.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveMode {
    /// Exact for small truncations, float beyond (the default policy).
    Auto,
    /// Force exact rational elimination.
    Exact,
    /// Force floating-point (Cholesky, then conjugate gradients).
    Float,
}

/// The family `{v_x}_{x ∈ F}` on one truncation, solved jointly.
#[derive(Debug, Clone)]
pub struct DipoleFamily {
    origin: usize,
    index_set: Vec<usize>,
    members: Vec<EnergyVector>,
    exact: Option<Vec<Vec<Rational>>>,
}

impl DipoleFamily {
    pub fn origin(&self) -> usize {
        self.origin
    }

    /// Index set `F`, sorted ascending.
    pub fn index_set(&self) -> &[usize] {
        &self.index_set
    }

    pub fn members(&self) -> &[EnergyVector] {
        &self.members
    }

    pub fn member(&self, i: usize) -> &EnergyVector {
        &self.members[i]
    }

    /// Exact dipole values when the exact backend was used; each inner
    /// vector is indexed by vertex.
    pub fn exact_members(&self) -> Option<&[Vec<Rational>]> {
        self.exact.as_deref()
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }
}

fn check_index_set(net: &ResistanceNetwork, origin: usize, set: &[usize]) -> Result<Vec<usize>> {
    if set.is_empty() {
        return Err(Error::EmptyIndexSet);
    }
    let mut sorted = set.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    if sorted.len() != set.len() {
        return Err(Error::BadIndexSet(origin));
    }
    for &x in &sorted {
        if x == origin {
            return Err(Error::OriginDipole);
        }
        if x >= net.len() {
            return Err(Error::BadIndexSet(x));
        }
    }
    Ok(sorted)
}

/// Solves the whole dipole family over `F` with one factorization.
pub fn dipole_family(
    net: &ResistanceNetwork,
    origin: usize,
    set: &[usize],
) -> Result<DipoleFamily> {
    dipole_family_with_mode(net, origin, set, SolveMode::Auto)
}

pub fn dipole_family_with_mode(
    net: &ResistanceNetwork,
    origin: usize,
    set: &[usize],
    mode: SolveMode,
) -> Result<DipoleFamily> {
    let index_set = check_index_set(net, origin, set)?;
    let n = net.len();
    let keep: Vec<usize> = (0..n).filter(|&x| x != origin).collect();
    let pos: std::collections::HashMap<usize, usize> =
        keep.iter().enumerate().map(|(i, &x)| (x, i)).collect();

    let use_exact = match mode {
        SolveMode::Exact => true,
        SolveMode::Float => false,
        SolveMode::Auto => n <= EXACT_SOLVE_LIMIT,
    };

    if use_exact {
        let a = reduced_laplacian_exact(net, origin);
        let cols: Vec<Vec<Rational>> = index_set
            .iter()
            .map(|&x| {
                let mut e = vec![Rational::zero(); keep.len()];
                e[pos[&x]] = Rational::from_integer(1.into());
                e
            })
            .collect();
        let sols = exact_solve_columns(a, cols)?;
        let mut exact_full = Vec::with_capacity(sols.len());
        let mut members = Vec::with_capacity(sols.len());
        for sol in sols {
            let mut full = vec![Rational::zero(); n];
            for (i, &x) in keep.iter().enumerate() {
                full[x] = sol[i].clone();
            }
            let floats: Vec<f64> = full.iter().map(rational_to_f64).collect();
            members.push(EnergyVector {
                origin,
                values: floats,
            });
            exact_full.push(full);
        }
        return Ok(DipoleFamily {
            origin,
            index_set,
            members,
            exact: Some(exact_full),
        });
    }

    let a = reduced_laplacian(net, origin);
    let solve_one = |x: usize| -> Result<EnergyVector> {
        let mut e = DVector::zeros(keep.len());
        e[pos[&x]] = 1.0;
        let sol = if n <= CHOLESKY_LIMIT {
            linalg::cholesky_solve(&a, &e).ok_or(Error::SingularSystem)?
        } else {
            linalg::cg_solve(&a, &e, 1e-14, 20 * n)
        };
        let mut full = vec![0.0; n];
        for (i, &v) in keep.iter().enumerate() {
            full[v] = sol[i];
        }
        Ok(EnergyVector {
            origin,
            values: full,
        })
    };
    let members = index_set
        .iter()
        .map(|&x| solve_one(x))
        .collect::<Result<Vec<_>>>()?;
    Ok(DipoleFamily {
        origin,
        index_set,
        members,
        exact: None,
    })
}

/// Solves `Δv = δ_x − δ_o` with `v(o) = 0`.
pub fn solve_dipole(net: &ResistanceNetwork, origin: usize, x: usize) -> Result<EnergyVector> {
    if x == origin {
        return Err(Error::OriginDipole);
    }
    let fam = dipole_family(net, origin, &[x])?;
    Ok(fam.members.into_iter().next().unwrap())
}

/// Gram matrix `(M_F)_{xy} = ⟨v_x, v_y⟩_E`, assembled by the energy form
/// and symmetric by construction.
#[derive(Debug, Clone)]
pub struct GramMatrix {
    index_set: Vec<usize>,
    matrix: DMatrix<f64>,
}

impl GramMatrix {
    /// Wraps an explicitly assembled Gram matrix (used by probes and tests).
    pub fn from_parts(index_set: Vec<usize>, matrix: DMatrix<f64>) -> Self {
        assert_eq!(index_set.len(), matrix.nrows());
        assert_eq!(matrix.nrows(), matrix.ncols());
        GramMatrix { index_set, matrix }
    }

    pub fn index_set(&self) -> &[usize] {
        &self.index_set
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn len(&self) -> usize {
        self.index_set.len()
    }

    pub fn is_empty(&self) -> bool {
        self.index_set.is_empty()
    }
}

/// Assembles `M_F` from a solved dipole family.
pub fn gram_from_family(net: &ResistanceNetwork, family: &DipoleFamily) -> GramMatrix {
    let j = family.len();
    let mut m = DMatrix::zeros(j, j);
    for a in 0..j {
        for b in a..j {
            let e = energy_real(net, family.member(a).values(), family.member(b).values());
            m[(a, b)] = e;
            m[(b, a)] = e;
        }
    }
    GramMatrix {
        index_set: family.index_set().to_vec(),
        matrix: m,
    }
}

/// Solves the dipoles over `F` and assembles their Gram matrix.
pub fn gram_matrix(net: &ResistanceNetwork, origin: usize, set: &[usize]) -> Result<GramMatrix> {
    let family = dipole_family(net, origin, set)?;
    Ok(gram_from_family(net, &family))
}

/// Oracle route for the full index set: inverse of the reduced Laplacian.
pub fn inverse_reduced_laplacian(net: &ResistanceNetwork, origin: usize) -> Result<DMatrix<f64>> {
    let a = reduced_laplacian(net, origin);
    linalg::cholesky_inverse(&a).ok_or(Error::SingularSystem)
}

/// Effective resistance `R(o, x) = (M)_{xx} = v_x(x)`.
pub fn effective_resistance(net: &ResistanceNetwork, origin: usize, x: usize) -> Result<f64> {
    Ok(solve_dipole(net, origin, x)?.value(x))
}

/// Residual of the reproducing identity `⟨v_x, u⟩_E = u(x) − u(o)`.
pub fn reproducing_residual(
    net: &ResistanceNetwork,
    origin: usize,
    x: usize,
    u: &VertexFunction,
) -> Result<f64> {
    let v = solve_dipole(net, origin, x)?;
    let lhs = energy(net, &v.to_vertex_function(), u)?;
    let rhs = u.value(x) - u.value(origin);
    Ok((lhs - rhs).norm())
}

/// Residual of `⟨v_x, Δv_y⟩_E = δ_xy + 1` for `x, y ≠ o`, with `Δv_y`
/// evaluated pointwise (independent of the identity under test).
pub fn green_identity_residual(
    net: &ResistanceNetwork,
    origin: usize,
    x: usize,
    y: usize,
) -> Result<f64> {
    let vx = solve_dipole(net, origin, x)?;
    let vy = if x == y {
        vx.clone()
    } else {
        solve_dipole(net, origin, y)?
    };
    let lap = apply_laplacian_real(net, vy.values());
    let lhs = energy_real(net, vx.values(), &lap);
    let expected = if x == y { 2.0 } else { 1.0 };
    Ok((lhs - expected).abs())
}

/// Evaluates both sides of the span identity
/// `⟨u, Δu⟩_E = Σ|ξ_x|² + |Σ ξ_x|²` for `u = Σ ξ_x v_x`.
///
/// Returns `(⟨u, Δu⟩_E, Σ|ξ|² + |Σξ|²)`; the first is complex only up to
/// roundoff.
pub fn span_energy(
    net: &ResistanceNetwork,
    origin: usize,
    set: &[usize],
    coeffs: &[Complex64],
) -> Result<(Complex64, f64)> {
    if coeffs.len() != set.len() {
        return Err(Error::MissingValue(coeffs.len()));
    }
    if coeffs.iter().all(|c| c.is_zero()) {
        return Ok((Complex64::zero(), 0.0));
    }
    let family = dipole_family(net, origin, set)?;
    span_energy_from_family(net, &family, coeffs)
}

/// [`span_energy`] on an already solved family (one solve, many ξ).
pub fn span_energy_from_family(
    net: &ResistanceNetwork,
    family: &DipoleFamily,
    coeffs: &[Complex64],
) -> Result<(Complex64, f64)> {
    if coeffs.len() != family.len() {
        return Err(Error::MissingValue(coeffs.len()));
    }
    if coeffs.iter().all(|c| c.is_zero()) {
        return Ok((Complex64::zero(), 0.0));
    }
    let n = net.len();
    let mut u = vec![Complex64::zero(); n];
    for (member, &c) in family.members().iter().zip(coeffs) {
        for (acc, &v) in u.iter_mut().zip(member.values()) {
            *acc += c * v;
        }
    }
    let u = VertexFunction::new(u);
    let lap = apply_laplacian(net, &u)?;
    let lhs = energy(net, &u, &lap.values)?;
    let sum: Complex64 = coeffs.iter().sum();
    let rhs = coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>() + sum.norm_sqr();
    Ok((lhs, rhs))
}

/// Largest Green-identity residual `|⟨v_x, Δv_y⟩ − (δ_xy + 1)|` over all
/// pairs of a solved family, with each `Δv_y` evaluated pointwise.
pub fn green_identity_max_residual(net: &ResistanceNetwork, family: &DipoleFamily) -> f64 {
    let mut worst: f64 = 0.0;
    for (b, vy) in family.members().iter().enumerate() {
        let image = apply_laplacian_real(net, vy.values());
        for (a, vx) in family.members().iter().enumerate() {
            let expected = if a == b { 2.0 } else { 1.0 };
            let lhs = energy_real(net, vx.values(), &image);
            worst = worst.max((lhs - expected).abs());
        }
    }
    worst
}

/// Residual of `Δ_x ⟨v_x, v_y⟩ = δ_xy` over `x ≠ o`, treating the kernel
/// column `M(·, y)` as the function `v_y` extended by zero at the origin.
pub fn kernel_laplacian_residual(
    net: &ResistanceNetwork,
    origin: usize,
    y: usize,
) -> Result<f64> {
    let v = solve_dipole(net, origin, y)?;
    let lap = apply_laplacian_real(net, v.values());
    let mut worst: f64 = 0.0;
    for x in 0..net.len() {
        if x == origin {
            continue;
        }
        let expected = if x == y { 1.0 } else { 0.0 };
        worst = worst.max((lap[x] - expected).abs());
    }
    Ok(worst)
}

/// Coefficients (in the dipole basis) of the energy projection of an
/// arbitrary representative onto `span{v_x : x ∈ F}`.
///
/// Pairings `⟨v_x, target⟩` are evaluated numerically by the energy form.
pub fn project_coefficients(
    net: &ResistanceNetwork,
    family: &DipoleFamily,
    gram: &GramMatrix,
    target: &[f64],
) -> Result<DVector<f64>> {
    let h = DVector::from_iterator(
        family.len(),
        family
            .members()
            .iter()
            .map(|v| energy_real(net, v.values(), target)),
    );
    linalg::cholesky_solve(gram.matrix(), &h).ok_or(Error::SingularSystem)
}
