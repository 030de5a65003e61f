//! Diagonalization of the Gram matrix, the induced orthonormal family,
//! reciprocity between the compressed Laplacian and the inverse Gram
//! spectrum, and spectral-measure approximation along exhaustions.
//!
//! With `M_F ξ_λ = λ ξ_λ` and `u_λ = λ^{-1/2} Σ_x ξ_λ(x) v_x`, the family
//! `{u_λ}` is orthonormal in energy and the compression of the Laplacian
//! acts on it as `⟨u_λ, Δu_κ⟩ = δ_λκ/λ + E(ξ_λ)E(ξ_κ)/√(λκ)`, the inverse
//! eigenvalue plus a rank-one origin term.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use num_traits::Zero;

use crate::dipole::{
    dipole_family, gram_from_family, gram_matrix, project_coefficients, DipoleFamily,
    EnergyVector, GramMatrix,
};
use crate::error::{Error, Result};
use crate::linalg;
use crate::network::{
    apply_laplacian, energy, energy_real, generate, Exhaustion, Generator, ResistanceNetwork,
    VertexFunction,
};

/// Eigendecomposition of a Gram matrix: ascending positive eigenvalues and
/// orthonormal eigenvectors in `ℓ²(F)`, sharing the Gram index order.
#[derive(Debug, Clone)]
pub struct EigenSystem {
    index_set: Vec<usize>,
    values: Vec<f64>,
    vectors: DMatrix<f64>,
}

impl EigenSystem {
    pub fn index_set(&self) -> &[usize] {
        &self.index_set
    }

    /// Eigenvalues, ascending; all strictly positive.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Orthonormal eigenvectors as columns.
    pub fn vectors(&self) -> &DMatrix<f64> {
        &self.vectors
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Coefficient sums `E(ξ_j)` of each eigenvector.
    pub fn expectations(&self) -> Vec<f64> {
        (0..self.len())
            .map(|j| self.vectors.column(j).iter().sum())
            .collect()
    }
}

/// Diagonalizes a Gram matrix, rejecting nonpositive spectra.
pub fn diagonalize_gram(gram: &GramMatrix) -> Result<EigenSystem> {
    let eig = linalg::sym_eigen(gram.matrix());
    if let Some(&bad) = eig.values.iter().find(|&&v| v <= 0.0) {
        return Err(Error::NotPositiveDefinite(bad));
    }
    Ok(EigenSystem {
        index_set: gram.index_set().to_vec(),
        values: eig.values,
        vectors: eig.vectors,
    })
}

/// Coefficient sum `E(ξ) = Σ_x ξ(x)` of a coefficient vector on `F`.
pub fn expectation(coeffs: &[Complex64]) -> Complex64 {
    coeffs.iter().sum()
}

/// The orthonormal family `u_λ = λ^{-1/2} Σ ξ_λ(x) v_x` in `V(F)`.
#[derive(Debug, Clone)]
pub struct OrthonormalFamily {
    index_set: Vec<usize>,
    members: Vec<EnergyVector>,
}

impl OrthonormalFamily {
    pub fn index_set(&self) -> &[usize] {
        &self.index_set
    }

    pub fn members(&self) -> &[EnergyVector] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }
}

/// Builds the orthonormal family from shared-index eigen and dipole data.
pub fn build_onb(eigen: &EigenSystem, family: &DipoleFamily) -> Result<OrthonormalFamily> {
    if eigen.index_set() != family.index_set() {
        return Err(Error::IndexMismatch);
    }
    let members = (0..eigen.len())
        .map(|j| {
            let scale = eigen.values()[j].sqrt().recip();
            let coeffs: Vec<f64> = eigen.vectors().column(j).iter().map(|&c| c * scale).collect();
            EnergyVector::combine(family.members(), &coeffs)
        })
        .collect();
    Ok(OrthonormalFamily {
        index_set: eigen.index_set().to_vec(),
        members,
    })
}

/// `‖[⟨u_j, u_k⟩_E] − I‖_max`, with pairings evaluated by the energy form.
pub fn orthonormality_residual(net: &ResistanceNetwork, onb: &OrthonormalFamily) -> f64 {
    let j = onb.len();
    let mut gram = DMatrix::zeros(j, j);
    for a in 0..j {
        for b in a..j {
            let e = energy_real(net, onb.members()[a].values(), onb.members()[b].values());
            gram[(a, b)] = e;
            gram[(b, a)] = e;
        }
    }
    linalg::max_abs_diff_identity(&gram)
}

/// Expansion data for the projection of `δ_o` onto `V(F)`.
#[derive(Debug, Clone)]
pub struct OriginProjection {
    /// Coefficients `−E(ξ_λ)/√λ` with respect to `{u_λ}`.
    pub coefficients: Vec<f64>,
    /// `Σ |E(ξ_j)|² / λ_j`, the squared energy norm of the projection.
    pub norm_sq: f64,
    /// Squared norm of the projection computed by a direct Gram solve.
    pub direct_norm_sq: f64,
    /// Energy norm of the difference between the expansion and the direct
    /// projection.
    pub reconstruction_residual: f64,
}

/// Expands `P_F δ_o = −Σ (E(ξ_λ)/√λ) u_λ` and cross-checks it against the
/// direct energy projection of `δ_o` onto the dipole span.
pub fn project_delta_o(
    net: &ResistanceNetwork,
    eigen: &EigenSystem,
    family: &DipoleFamily,
) -> Result<OriginProjection> {
    let onb = build_onb(eigen, family)?;
    let expectations = eigen.expectations();
    let coefficients: Vec<f64> = expectations
        .iter()
        .zip(eigen.values())
        .map(|(e, l)| -e / l.sqrt())
        .collect();
    let norm_sq: f64 = coefficients.iter().map(|c| c * c).sum();

    let expansion = EnergyVector::combine(onb.members(), &coefficients);

    // Independent route: project the actual δ_o representative.
    let gram = gram_from_family(net, family);
    let mut delta_o = vec![0.0; net.len()];
    delta_o[family.origin()] = 1.0;
    let w = project_coefficients(net, family, &gram, &delta_o)?;
    let direct = EnergyVector::combine(family.members(), w.as_slice());
    let direct_norm_sq = energy_real(net, direct.values(), direct.values());

    let diff: Vec<f64> = expansion
        .values()
        .iter()
        .zip(direct.values())
        .map(|(a, b)| a - b)
        .collect();
    let reconstruction_residual = energy_real(net, &diff, &diff).max(0.0).sqrt();

    Ok(OriginProjection {
        coefficients,
        norm_sq,
        direct_norm_sq,
        reconstruction_residual,
    })
}

/// The compressed Laplacian in the `u_λ` basis:
/// `τ_{jk} = δ_jk/λ_j + E(ξ_j)E(ξ_k)/√(λ_j λ_k)`, a diagonal inverse plus
/// a rank-one origin term.
#[derive(Debug, Clone)]
pub struct CompressionMatrix {
    matrix: DMatrix<f64>,
    spectrum: Vec<f64>,
}

impl CompressionMatrix {
    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    /// Eigenvalues `σ_j`, ascending.
    pub fn spectrum(&self) -> &[f64] {
        &self.spectrum
    }

    pub fn len(&self) -> usize {
        self.spectrum.len()
    }

    pub fn is_empty(&self) -> bool {
        self.spectrum.is_empty()
    }
}

/// Assembles the compression matrix `D_F^{-1} + g g*` with
/// `g_j = E(ξ_j)/√λ_j`.
pub fn compression_matrix(eigen: &EigenSystem) -> CompressionMatrix {
    let j = eigen.len();
    let g = DVector::from_iterator(
        j,
        eigen
            .expectations()
            .iter()
            .zip(eigen.values())
            .map(|(e, l)| e / l.sqrt()),
    );
    let mut matrix = &g * g.transpose();
    for i in 0..j {
        matrix[(i, i)] += 1.0 / eigen.values()[i];
    }
    let spectrum = linalg::sym_eigen(&matrix).values;
    CompressionMatrix { matrix, spectrum }
}

/// Laplacian image of a coefficient vector on `F`, as an explicit vertex
/// function: `Δ(Σ ξ_x v_x) = Σ ξ_x δ_x − (Σ ξ_x) δ_o`.
fn dipole_laplacian_image(n: usize, origin: usize, set: &[usize], coeffs: &[f64]) -> Vec<f64> {
    let mut image = vec![0.0; n];
    let mut total = 0.0;
    for (&x, &c) in set.iter().zip(coeffs) {
        image[x] += c;
        total += c;
    }
    image[origin] -= total;
    image
}

/// Both sides of the reciprocity identity over `F`.
///
/// The left side is `⟨u_λ, Δu_κ⟩_E` assembled via energy pairings: the
/// pairing matrix `⟨v_x, Δv_y⟩` is evaluated numerically by the energy
/// form and conjugated by the (1/√λ-scaled) eigenvectors, which is the
/// bilinear expansion of the same inner product without the
/// precision-losing intermediate `u_λ` vectors. The right side is the
/// closed-form compression matrix from the same eigendata.
pub fn reciprocity_matrices(
    net: &ResistanceNetwork,
    origin: usize,
    set: &[usize],
) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    let family = dipole_family(net, origin, set)?;
    let gram = gram_from_family(net, &family);
    let eigen = diagonalize_gram(&gram)?;

    let j = eigen.len();
    let mut green = DMatrix::zeros(j, j);
    for (b, &y) in family.index_set().iter().enumerate() {
        let image = dipole_laplacian_image(net.len(), origin, &[y], &[1.0]);
        for a in 0..j {
            green[(a, b)] = energy_real(net, family.member(a).values(), &image);
        }
    }
    let conjugated = eigen.vectors().transpose() * green * eigen.vectors();
    let mut lhs = DMatrix::zeros(j, j);
    for l in 0..j {
        for k in 0..j {
            lhs[(l, k)] = conjugated[(l, k)] / (eigen.values()[l] * eigen.values()[k]).sqrt();
        }
    }
    let rhs = compression_matrix(&eigen).matrix.clone();
    Ok((lhs, rhs))
}

/// Max-norm reciprocity residual over `F`.
pub fn verify_reciprocity(net: &ResistanceNetwork, origin: usize, set: &[usize]) -> Result<f64> {
    let (lhs, rhs) = reciprocity_matrices(net, origin, set)?;
    Ok(linalg::max_abs_diff(&lhs, &rhs))
}

/// Residual of the eigen-expectation identity `(1/J) Σ E(ξ_j)² = 1`.
pub fn expectation_identity_residual(eigen: &EigenSystem) -> f64 {
    let j = eigen.len() as f64;
    let total: f64 = eigen.expectations().iter().map(|e| e * e).sum();
    (total / j - 1.0).abs()
}

/// Projection-norm sandwich `J/λ_max ≤ Σ E(ξ_j)²/λ_j ≤ J/λ_min`.
///
/// Returns `(lower, value, upper)`.
pub fn projection_norm_bounds(eigen: &EigenSystem) -> (f64, f64, f64) {
    let j = eigen.len() as f64;
    let value: f64 = eigen
        .expectations()
        .iter()
        .zip(eigen.values())
        .map(|(e, l)| e * e / l)
        .sum();
    let lambda_min = eigen.values().first().copied().unwrap_or(f64::NAN);
    let lambda_max = eigen.values().last().copied().unwrap_or(f64::NAN);
    (j / lambda_max, value, j / lambda_min)
}

/// Finite atomic spectral measure `(1/J) Σ δ_{σ_j}`.
#[derive(Debug, Clone)]
pub struct SpectralMeasure {
    /// `(position, weight)` pairs, positions ascending, weights `1/J`.
    pub atoms: Vec<(f64, f64)>,
    /// Exhaustion step this measure belongs to.
    pub exhaustion_index: usize,
}

impl SpectralMeasure {
    pub fn total_mass(&self) -> f64 {
        self.atoms.iter().map(|(_, w)| w).sum()
    }
}

/// Equally weighted Dirac masses on the compression spectrum.
pub fn spectral_measure(compression: &CompressionMatrix, exhaustion_index: usize) -> SpectralMeasure {
    let j = compression.len();
    let w = 1.0 / j as f64;
    SpectralMeasure {
        atoms: compression.spectrum().iter().map(|&s| (s, w)).collect(),
        exhaustion_index,
    }
}

/// Kolmogorov (sup-CDF) distance between two atomic measures.
pub fn kolmogorov_distance(a: &SpectralMeasure, b: &SpectralMeasure) -> f64 {
    let mut events: Vec<(f64, f64, f64)> = a
        .atoms
        .iter()
        .map(|&(x, w)| (x, w, 0.0))
        .chain(b.atoms.iter().map(|&(x, w)| (x, 0.0, w)))
        .collect();
    events.sort_by(|p, q| p.0.total_cmp(&q.0));
    let mut fa = 0.0;
    let mut fb = 0.0;
    let mut worst: f64 = 0.0;
    let mut i = 0;
    while i < events.len() {
        let x = events[i].0;
        // accumulate all atoms at the same position before comparing CDFs
        while i < events.len() && events[i].0 == x {
            fa += events[i].1;
            fb += events[i].2;
            i += 1;
        }
        worst = worst.max((fa - fb).abs());
    }
    worst
}

fn measure_for_full_index_set(
    net: &ResistanceNetwork,
    origin: usize,
    set: &[usize],
    k: usize,
) -> Result<SpectralMeasure> {
    let family = dipole_family(net, origin, set)?;
    let gram = gram_from_family(net, &family);
    let eigen = diagonalize_gram(&gram)?;
    Ok(spectral_measure(&compression_matrix(&eigen), k))
}

/// Spectral measures along the natural exhaustion of a generated family:
/// step `k` uses the truncation of size `k + 1` with `F = X \ {o}`.
pub fn family_measures(
    family: &Generator,
    k_min: usize,
    k_max: usize,
) -> Result<Vec<SpectralMeasure>> {
    if k_min < 1 || k_max < k_min {
        return Err(Error::TruncationTooSmall(format!(
            "need 1 <= k_min <= k_max, got {k_min}..={k_max}"
        )));
    }
    (k_min..=k_max)
        .map(|k| {
            let net = generate(family, k + 1)?;
            let set: Vec<usize> = (1..=k).collect();
            measure_for_full_index_set(&net, 0, &set, k)
        })
        .collect()
}

/// Spectral measures along an origin-free exhaustion of a fixed network.
pub fn exhaustion_measures(
    net: &ResistanceNetwork,
    origin: usize,
    exhaustion: &Exhaustion,
) -> Result<Vec<SpectralMeasure>> {
    exhaustion
        .sets()
        .iter()
        .enumerate()
        .map(|(k, set)| measure_for_full_index_set(net, origin, set, k + 1))
        .collect()
}

/// Kolmogorov distances between consecutive measures of a sweep.
pub fn convergence_distances(measures: &[SpectralMeasure]) -> Vec<f64> {
    measures
        .windows(2)
        .map(|w| kolmogorov_distance(&w[0], &w[1]))
        .collect()
}

/// Distance sequence `(k, d(μ_k, μ_{k+1}))` for a generated family.
///
/// No convergence is asserted; different exhaustions may have different
/// weak-* limits.
pub fn measure_convergence_sweep(
    family: &Generator,
    k_min: usize,
    k_max: usize,
) -> Result<Vec<(usize, f64)>> {
    let measures = family_measures(family, k_min, k_max)?;
    Ok(convergence_distances(&measures)
        .into_iter()
        .enumerate()
        .map(|(i, d)| (k_min + i, d))
        .collect())
}

/// One step of the compression-limit diagnostic.
#[derive(Debug, Clone)]
pub struct CompressionStep {
    pub k: usize,
    /// `‖P_{F}ΔP_{F}f − P_{F}Δf‖_E`; zero for `f` in the span of the
    /// first set's dipoles, at every step.
    pub identity_residual: f64,
    /// `‖P_{F}Δf − Δf‖_E`, the gap closed by exhausting the truncation.
    pub convergence_gap: f64,
}

/// Verifies `P_F Δ P_F f = P_F Δ f` along an exhaustion for a test vector
/// `f = Σ ξ_x v_x` supported on the first set, and reports how the
/// compression approaches `Δf` as the sets grow.
pub fn compression_limit_residual(
    net: &ResistanceNetwork,
    origin: usize,
    exhaustion: &Exhaustion,
    support: &[usize],
    coeffs: &[f64],
) -> Result<Vec<CompressionStep>> {
    if support.len() != coeffs.len() || support.is_empty() {
        return Err(Error::UnsupportedTestVector);
    }
    let first = &exhaustion.sets()[0];
    if !support.iter().all(|x| first.binary_search(x).is_ok()) {
        return Err(Error::UnsupportedTestVector);
    }
    if !exhaustion.excludes(origin) {
        return Err(Error::BadIndexSet(origin));
    }

    let base_family = dipole_family(net, origin, support)?;
    let f = EnergyVector::combine(base_family.members(), coeffs);
    let delta_f = dipole_laplacian_image(net.len(), origin, support, coeffs);
    let delta_f_norm_sq = energy_real(net, &delta_f, &delta_f);

    let mut steps = Vec::with_capacity(exhaustion.len());
    for (i, set) in exhaustion.sets().iter().enumerate() {
        let family = dipole_family(net, origin, set)?;
        let gram = gram_from_family(net, &family);

        // P_F f, expressed in dipole coefficients on F
        let pf = project_coefficients(net, &family, &gram, f.values())?;
        // P_F Δ (P_F f)
        let image_pf = dipole_laplacian_image(net.len(), origin, set, pf.as_slice());
        let w1 = project_coefficients(net, &family, &gram, &image_pf)?;
        // P_F Δ f
        let w2 = project_coefficients(net, &family, &gram, &delta_f)?;

        let diff = &w1 - &w2;
        let identity_residual = (diff.dot(&(gram.matrix() * &diff))).max(0.0).sqrt();
        let projected_norm_sq = w2.dot(&(gram.matrix() * &w2));
        let convergence_gap = (delta_f_norm_sq - projected_norm_sq).max(0.0).sqrt();
        steps.push(CompressionStep {
            k: i + 1,
            identity_residual,
            convergence_gap,
        });
    }
    Ok(steps)
}

/// Residual pair for the balanced intertwining identities:
/// `⟨Φξ, ΔΦξ⟩ = ‖ξ‖²` and `⟨ξ, Mξ⟩ = ‖Φξ‖²` for zero-sum ξ.
pub fn balanced_intertwining_residual(
    net: &ResistanceNetwork,
    origin: usize,
    support: &[usize],
    coeffs: &[Complex64],
) -> Result<(f64, f64)> {
    if support.len() != coeffs.len() {
        return Err(Error::MissingValue(coeffs.len()));
    }
    if coeffs.iter().all(|c| c.is_zero()) {
        return Ok((0.0, 0.0));
    }
    let total: Complex64 = coeffs.iter().sum();
    let scale: f64 = coeffs.iter().map(|c| c.norm()).sum();
    if total.norm() > 1e-12 * scale.max(1.0) {
        return Err(Error::NotBalanced(total.norm()));
    }

    let family = dipole_family(net, origin, support)?;
    let gram = gram_from_family(net, &family);

    let n = net.len();
    let mut u = vec![Complex64::zero(); n];
    for (member, &c) in family.members().iter().zip(coeffs) {
        for (acc, &v) in u.iter_mut().zip(member.values()) {
            *acc += c * v;
        }
    }
    let u = VertexFunction::new(u);
    let lap = apply_laplacian(net, &u)?;
    let lhs1 = energy(net, &u, &lap.values)?;
    let norm_sq: f64 = coeffs.iter().map(|c| c.norm_sqr()).sum();
    let res1 = (lhs1 - norm_sq).norm();

    // ⟨ξ, Mξ⟩ against ‖Φξ‖²_E
    let j = support.len();
    let mut quad = Complex64::zero();
    for a in 0..j {
        for b in 0..j {
            quad += coeffs[a].conj() * gram.matrix()[(a, b)] * coeffs[b];
        }
    }
    let phi_norm = energy(net, &u, &u)?;
    let res2 = (quad - phi_norm).norm();
    Ok((res1, res2))
}

/// Spectral-gap estimate over `F`: the minimum of `‖ξ‖²/⟨ξ, Mξ⟩` over
/// balanced ξ, together with the global lower bound `1/‖M_F‖`.
///
/// Returns `(α_F, 1/‖M_F‖)`; `α_F` is `+∞` when `|F| = 1` (the balanced
/// subspace is trivial).
pub fn spectral_gap_estimate(
    net: &ResistanceNetwork,
    origin: usize,
    set: &[usize],
) -> Result<(f64, f64)> {
    let gram = gram_matrix(net, origin, set)?;
    let eigen_all = linalg::sym_eigen(gram.matrix());
    let lambda_max = *eigen_all.values.last().unwrap();
    let global = 1.0 / lambda_max;
    if gram.len() == 1 {
        return Ok((f64::INFINITY, global));
    }
    let basis = linalg::balanced_basis(gram.len());
    let compressed = basis.transpose() * gram.matrix() * &basis;
    let balanced_max = *linalg::sym_eigen(&compressed).values.last().unwrap();
    Ok((1.0 / balanced_max, global))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::parse_rational;
    use crate::network::build_network;
    use approx::assert_relative_eq;

    fn unit_path(n: usize) -> ResistanceNetwork {
        generate(&Generator::UnitPath, n).unwrap()
    }

    fn geometric(b: &str, n: usize) -> ResistanceNetwork {
        generate(
            &Generator::GeometricHalfline {
                ratio: parse_rational(b).unwrap(),
            },
            n,
        )
        .unwrap()
    }

    fn pipeline(
        net: &ResistanceNetwork,
        set: &[usize],
    ) -> (DipoleFamily, GramMatrix, EigenSystem) {
        let family = dipole_family(net, 0, set).unwrap();
        let gram = gram_from_family(net, &family);
        let eigen = diagonalize_gram(&gram).unwrap();
        (family, gram, eigen)
    }

    #[test]
    fn trivial_gram_eigen() {
        let net = build_network(&[(0, 1, 1.0)], 0).unwrap();
        let (_, _, eigen) = pipeline(&net, &[1]);
        assert_eq!(eigen.values(), &[1.0]);
        assert_eq!(eigen.vectors()[(0, 0)], 1.0);
    }

    #[test]
    fn eigenvalues_positive_with_unit_determinant_on_path() {
        let net = unit_path(4);
        let (_, gram, eigen) = pipeline(&net, &[1, 2, 3]);
        assert!(eigen.values().iter().all(|&l| l > 0.0));
        let det: f64 = eigen.values().iter().product();
        // min-kernel path matrix has determinant one
        assert_relative_eq!(det, 1.0, epsilon = 1e-10);
        let trace: f64 = eigen.values().iter().sum();
        assert_relative_eq!(trace, gram.matrix().trace(), epsilon = 1e-10);
    }

    #[test]
    fn rejects_indefinite_input() {
        let bad = GramMatrix::from_parts(
            vec![1, 2],
            DMatrix::from_row_slice(2, 2, &[-5.0, 0.0, 0.0, -5.0]),
        );
        assert!(matches!(
            diagonalize_gram(&bad),
            Err(Error::NotPositiveDefinite(_))
        ));
    }

    #[test]
    fn expectation_basics() {
        let one = Complex64::new(1.0, 0.0);
        assert_eq!(expectation(&[one]), one);
        assert_eq!(expectation(&[one, -one]), Complex64::zero());
        let j = 4usize;
        let coeffs: Vec<Complex64> = vec![Complex64::new(1.0 / (j as f64).sqrt(), 0.0); j];
        assert_relative_eq!(expectation(&coeffs).re, (j as f64).sqrt(), epsilon = 1e-12);
    }

    #[test]
    fn onb_is_orthonormal_in_energy() {
        for (net, set) in [
            (unit_path(4), vec![1, 2, 3]),
            (geometric("2", 3), vec![1, 2]),
        ] {
            let (family, _, eigen) = pipeline(&net, &set);
            let onb = build_onb(&eigen, &family).unwrap();
            assert!(orthonormality_residual(&net, &onb) < 1e-10);
        }
    }

    #[test]
    fn single_member_onb_is_normalized() {
        let net = build_network(&[(0, 1, 4.0)], 0).unwrap();
        let (family, _, eigen) = pipeline(&net, &[1]);
        let onb = build_onb(&eigen, &family).unwrap();
        let norm = energy_real(&net, onb.members()[0].values(), onb.members()[0].values());
        assert_relative_eq!(norm, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn origin_projection_two_vertex() {
        let net = build_network(&[(0, 1, 1.0)], 0).unwrap();
        let (family, _, eigen) = pipeline(&net, &[1]);
        let proj = project_delta_o(&net, &eigen, &family).unwrap();
        assert_relative_eq!(proj.coefficients[0], -1.0, epsilon = 1e-12);
        assert_relative_eq!(proj.norm_sq, 1.0, epsilon = 1e-12);
        assert!(proj.reconstruction_residual < 1e-12);
    }

    #[test]
    fn origin_projection_norm_matches_direct_route() {
        let net = unit_path(4);
        let (family, _, eigen) = pipeline(&net, &[1, 2, 3]);
        let proj = project_delta_o(&net, &eigen, &family).unwrap();
        assert_relative_eq!(proj.norm_sq, proj.direct_norm_sq, epsilon = 1e-10);
        assert!(proj.reconstruction_residual < 1e-10);
    }

    #[test]
    fn compression_matrix_single_dipole() {
        let net = build_network(&[(0, 1, 1.0)], 0).unwrap();
        let (_, _, eigen) = pipeline(&net, &[1]);
        let t = compression_matrix(&eigen);
        assert_relative_eq!(t.matrix()[(0, 0)], 2.0, epsilon = 1e-12);
        assert_eq!(t.spectrum().len(), 1);
        assert_relative_eq!(t.spectrum()[0], 2.0, epsilon = 1e-12);
    }

    #[test]
    fn compression_reduces_to_inverse_eigenvalues_for_balanced_spectrum() {
        // synthetic eigensystem with balanced eigenvectors: g = 0
        let eigen = EigenSystem {
            index_set: vec![1, 2],
            values: vec![0.5, 2.0],
            vectors: DMatrix::from_row_slice(
                2,
                2,
                &[
                    std::f64::consts::FRAC_1_SQRT_2,
                    std::f64::consts::FRAC_1_SQRT_2,
                    -std::f64::consts::FRAC_1_SQRT_2,
                    std::f64::consts::FRAC_1_SQRT_2,
                ],
            ),
        };
        // first eigenvector balanced, second not; zero only the balanced term
        let t = compression_matrix(&eigen);
        assert_relative_eq!(t.matrix()[(0, 0)], 2.0, epsilon = 1e-12);
        assert_relative_eq!(t.matrix()[(0, 1)], 0.0, epsilon = 1e-12);
        assert_relative_eq!(t.matrix()[(1, 1)], 0.5 + 2.0f64.sqrt().powi(2) / 2.0, epsilon = 1e-12);
    }

    #[test]
    fn reciprocity_residuals_small() {
        let net = build_network(&[(0, 1, 1.0)], 0).unwrap();
        assert!(verify_reciprocity(&net, 0, &[1]).unwrap() < 1e-12);

        let net = unit_path(5);
        let set: Vec<usize> = (1..5).collect();
        assert!(verify_reciprocity(&net, 0, &set).unwrap() < 1e-10);

        let net = generate(&Generator::RandomWeighted { seed: 1 }, 10).unwrap();
        let set: Vec<usize> = (1..10).collect();
        assert!(verify_reciprocity(&net, 0, &set).unwrap() < 1e-9);
    }

    #[test]
    fn reciprocity_lhs_agrees_with_pointwise_laplacian_route() {
        let net = unit_path(5);
        let set: Vec<usize> = (1..5).collect();
        let (lhs, _) = reciprocity_matrices(&net, 0, &set).unwrap();

        let family = dipole_family(&net, 0, &set).unwrap();
        let gram = gram_from_family(&net, &family);
        let eigen = diagonalize_gram(&gram).unwrap();
        let onb = build_onb(&eigen, &family).unwrap();
        let mut pointwise = DMatrix::zeros(4, 4);
        for k in 0..4 {
            let image =
                crate::network::apply_laplacian_real(&net, onb.members()[k].values());
            for l in 0..4 {
                pointwise[(l, k)] = energy_real(&net, onb.members()[l].values(), &image);
            }
        }
        assert!(linalg::max_abs_diff(&lhs, &pointwise) < 1e-8);
    }

    #[test]
    fn expectation_identity_and_bounds() {
        let net = unit_path(4);
        let (_, _, eigen) = pipeline(&net, &[1, 2, 3]);
        assert!(expectation_identity_residual(&eigen) < 1e-12);
        let (lo, value, hi) = projection_norm_bounds(&eigen);
        assert!(lo <= value && value <= hi);

        let net = geometric("2", 6);
        let set: Vec<usize> = (1..6).collect();
        let (_, _, eigen) = pipeline(&net, &set);
        assert!(expectation_identity_residual(&eigen) < 1e-12);
        let (lo, value, hi) = projection_norm_bounds(&eigen);
        assert!(lo <= value && value <= hi);
    }

    #[test]
    fn measure_atoms_sum_to_one_and_stay_positive() {
        let net = unit_path(5);
        let set: Vec<usize> = (1..5).collect();
        let (_, _, eigen) = pipeline(&net, &set);
        let mu = spectral_measure(&compression_matrix(&eigen), 4);
        assert_relative_eq!(mu.total_mass(), 1.0, epsilon = 1e-12);
        assert!(mu.atoms.iter().all(|&(s, _)| s > 0.0));
    }

    #[test]
    fn kolmogorov_distance_behaves() {
        let a = SpectralMeasure {
            atoms: vec![(1.0, 0.5), (2.0, 0.5)],
            exhaustion_index: 1,
        };
        assert_eq!(kolmogorov_distance(&a, &a), 0.0);
        let b = SpectralMeasure {
            atoms: vec![(1.5, 1.0)],
            exhaustion_index: 2,
        };
        assert_relative_eq!(kolmogorov_distance(&a, &b), 0.5);
    }

    #[test]
    fn constant_sweep_has_zero_distances() {
        let net = unit_path(6);
        let ex = Exhaustion::new(vec![vec![1, 2, 3]]).unwrap();
        let m1 = exhaustion_measures(&net, 0, &ex).unwrap();
        let twice = vec![m1[0].clone(), m1[0].clone()];
        assert_eq!(convergence_distances(&twice), vec![0.0]);
    }

    #[test]
    fn family_sweep_reports_distances() {
        let sweep = measure_convergence_sweep(&Generator::UnitPath, 2, 8).unwrap();
        assert_eq!(sweep.len(), 6);
        assert!(sweep.iter().all(|&(_, d)| (0.0..=1.0).contains(&d)));
    }

    #[test]
    fn compression_identity_holds_at_every_step() {
        let net = unit_path(8);
        let ex = Exhaustion::origin_free_prefixes(8, 0, 2, 7).unwrap();
        // f = v_1 − v_2, supported in F_1 = {1, 2}
        let steps = compression_limit_residual(&net, 0, &ex, &[1, 2], &[1.0, -1.0]).unwrap();
        for s in &steps {
            assert!(s.identity_residual < 1e-10, "step {}: {}", s.k, s.identity_residual);
        }
        // the gap vanishes once the exhaustion covers X \ {o}
        assert!(steps.last().unwrap().convergence_gap < 1e-8);
        // and is monotone nonincreasing along the nesting
        for w in steps.windows(2) {
            assert!(w[1].convergence_gap <= w[0].convergence_gap + 1e-12);
        }
    }

    #[test]
    fn compression_rejects_unsupported_test_vectors() {
        let net = unit_path(8);
        let ex = Exhaustion::origin_free_prefixes(8, 0, 2, 7).unwrap();
        assert!(matches!(
            compression_limit_residual(&net, 0, &ex, &[5], &[1.0]),
            Err(Error::UnsupportedTestVector)
        ));
    }

    #[test]
    fn balanced_identities() {
        let net = unit_path(6);
        let one = Complex64::new(1.0, 0.0);
        let (r1, r2) =
            balanced_intertwining_residual(&net, 0, &[1, 3], &[one, -one]).unwrap();
        assert!(r1 < 1e-10);
        assert!(r2 < 1e-10);

        let (z1, z2) = balanced_intertwining_residual(
            &net,
            0,
            &[1, 2],
            &[Complex64::zero(), Complex64::zero()],
        )
        .unwrap();
        assert_eq!((z1, z2), (0.0, 0.0));

        assert!(matches!(
            balanced_intertwining_residual(&net, 0, &[1, 2], &[one, one]),
            Err(Error::NotBalanced(_))
        ));
    }

    #[test]
    fn gap_estimate_degenerate_and_ordered() {
        let net = unit_path(5);
        let (alpha, global) = spectral_gap_estimate(&net, 0, &[1]).unwrap();
        assert!(alpha.is_infinite());
        assert!(global > 0.0);

        let set: Vec<usize> = (1..5).collect();
        let (alpha, global) = spectral_gap_estimate(&net, 0, &set).unwrap();
        assert!(alpha.is_finite());
        assert!(alpha >= global - 1e-12);
    }

    #[test]
    fn geometric_gap_stays_bounded_below_along_sweep() {
        let ratio = parse_rational("2").unwrap();
        let mut last_alpha = f64::INFINITY;
        for k in 2..=9 {
            let net = generate(
                &Generator::GeometricHalfline { ratio: ratio.clone() },
                k + 1,
            )
            .unwrap();
            let set: Vec<usize> = (1..=k).collect();
            let (alpha, global) = spectral_gap_estimate(&net, 0, &set).unwrap();
            assert!(alpha >= global - 1e-12);
            // ‖M‖ ≤ Σ 2^{-k} < 1 keeps the balanced gap above 1
            assert!(alpha > 0.9, "alpha {alpha} collapsed at k={k}");
            last_alpha = last_alpha.min(alpha);
        }
        assert!(last_alpha > 0.9);
    }
}
