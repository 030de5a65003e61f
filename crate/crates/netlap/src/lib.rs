//! Energy forms, dipole kernels, and spectral diagnostics for weighted
//! network Laplacians.
//!
//! A resistance network is a connected weighted graph; its Laplacian acts
//! both on `ℓ²` of the vertices and on the energy space of finite-energy
//! functions modulo constants. The two settings disagree in ways that are
//! measurable at desk scale, and this crate packages the finite
//! computations that expose the disagreement:
//!
//! - [`network`]: networks, generated families, the energy form, matrix
//!   Laplacian views and their validation.
//! - [`dipole`]: solves `Δv_x = δ_x − δ_o` exactly, builds the Gram matrix
//!   `M_F = [⟨v_x, v_y⟩]`, and verifies the reproducing-kernel identities.
//! - [`spectral`]: diagonalizes `M_F`, builds the induced orthonormal
//!   family, checks the reciprocity between the compressed Laplacian and
//!   the inverse Gram spectrum, and approximates spectral measures along
//!   exhaustions.
//! - [`defect`]: exact-rational analysis of the bounded `Δu = −u` vector
//!   on the geometric half-line, against divergent `ℓ²` probe norms.
//! - [`heat`]: heat kernels, semigroup checks, stochastic-completeness
//!   mass sweeps, and the banded / off-diagonal-growth criteria.
//! - [`io`]: the JSON network format and CSV/JSON table exports.
//!
//! ```
//! use netlap::exact::parse_rational;
//! use netlap::network::{generate, Generator};
//!
//! let family = Generator::GeometricHalfline { ratio: parse_rational("2")? };
//! let net = generate(&family, 6)?;
//! assert_eq!(net.degree(1), 2.0 + 4.0);
//!
//! let residual = netlap::spectral::verify_reciprocity(&net, 0, &[1, 2, 3, 4, 5])?;
//! assert!(residual < 1e-8);
//! # Ok::<(), netlap::Error>(())
//! ```

pub mod defect;
pub mod dipole;
pub mod error;
pub mod exact;
pub mod heat;
pub mod io;
pub mod linalg;
pub mod network;
pub mod spectral;

pub use error::{Error, Result};
pub use network::{
    build_network, generate, Generator, ResistanceNetwork, VertexFunction,
    DEFAULT_TOL,
};

/// Book chapters double as doctests so the guide stays in sync with the
/// API (`cargo test` runs the fenced Rust blocks).
#[cfg(doctest)]
mod book {
    macro_rules! chapter {
        ($name:ident, $path:literal) => {
            #[doc = include_str!($path)]
            #[allow(dead_code)]
            struct $name;
        };
    }

    chapter!(Networks, "../../../book/src/networks.md");
    chapter!(Dipoles, "../../../book/src/dipoles.md");
    chapter!(Reciprocity, "../../../book/src/reciprocity.md");
    chapter!(Defect, "../../../book/src/defect.md");
    chapter!(Heat, "../../../book/src/heat.md");
}
