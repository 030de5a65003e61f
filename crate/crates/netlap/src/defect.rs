//! Exact defect-vector analysis on the geometric half-line.
//!
//! For the network on the nonnegative integers with conductance `b^k` on
//! edge `k−1 — k`, the recursion
//!
//! ```text
//! φ_0 = 0,  ψ_0 = 1,  φ_n = φ_{n−1} + ψ_{n−1},  ψ_n = ψ_{n−1} + r^n φ_n
//! ```
//!
//! evaluated at `r = 1/b` produces `u(n) = ψ_n`, a bounded finite-energy
//! vector with `Δu = −u` pointwise. Everything here is exact: the series
//! carries scaled integer numerators (denominator `p^{T_n}`, where
//! `b = p/q` reduced and `T_n = n(n+1)/2`), so no gcd is ever taken during
//! the recursion and identity checks reduce to integer identities.
//!
//! The same vector seen through `ℓ²` behaves oppositely: the probe
//! recurrence for `(A + I)v = 0` has divergent partial `ℓ²` norms on every
//! half-line family, the numerical face of essential self-adjointness
//! there.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::Ratio;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::exact::{rational_to_f64, Rational};
use crate::network::Generator;

/// Exact evaluation of the half-line defect recursion.
#[derive(Debug, Clone)]
pub struct DefectSeries {
    ratio: Rational,
    p: BigInt,
    q: BigInt,
    /// `φ_n = scaled_phi[n] / p^{T_n}`
    scaled_phi: Vec<BigInt>,
    /// `ψ_n = scaled_psi[n] / p^{T_n}`
    scaled_psi: Vec<BigInt>,
    p_primes: Vec<BigInt>,
}

fn small_prime_factors(p: &BigInt) -> Vec<BigInt> {
    let mut rest = p.clone();
    let mut primes = Vec::new();
    let mut d = BigInt::from(2u32);
    while &d * &d <= rest {
        if rest.is_multiple_of(&d) {
            primes.push(d.clone());
            while rest.is_multiple_of(&d) {
                rest /= &d;
            }
        }
        d += 1u32;
    }
    if rest > BigInt::one() {
        primes.push(rest);
    }
    primes
}

fn triangular(n: usize) -> u32 {
    (n * (n + 1) / 2) as u32
}

impl DefectSeries {
    /// The growth ratio `b`.
    pub fn ratio(&self) -> &Rational {
        &self.ratio
    }

    /// Number of computed indices (`0..=n_max`).
    pub fn len(&self) -> usize {
        self.scaled_psi.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scaled_psi.is_empty()
    }

    fn reduce(&self, numer: &BigInt, level: u32) -> Rational {
        let mut n = numer.clone();
        let mut d = self.p.pow(level);
        for prime in &self.p_primes {
            while n.is_multiple_of(prime) && d.is_multiple_of(prime) {
                n /= prime;
                d /= prime;
            }
        }
        Ratio::new_raw(n, d)
    }

    /// Exact `φ_n`.
    pub fn phi(&self, n: usize) -> Rational {
        self.reduce(&self.scaled_phi[n], triangular(n))
    }

    /// Exact `ψ_n`, i.e. the defect value `u(n)`.
    pub fn psi(&self, n: usize) -> Rational {
        self.reduce(&self.scaled_psi[n], triangular(n))
    }

    /// Defect value `u(n) = ψ_n(1/b)`.
    pub fn value(&self, n: usize) -> Rational {
        self.psi(n)
    }

    pub fn value_f64(&self, n: usize) -> f64 {
        rational_to_f64(&Ratio::new_raw(
            self.scaled_psi[n].clone(),
            self.p.pow(triangular(n)),
        ))
    }

    /// All defect values `u(0..len)`.
    pub fn values(&self) -> Vec<Rational> {
        (0..self.len()).map(|n| self.value(n)).collect()
    }

    /// Smallest `n` with `u(n) > threshold`, by exact comparison.
    pub fn first_exceeding(&self, threshold: &Rational) -> Option<usize> {
        (0..self.len()).find(|&n| {
            let lhs = &self.scaled_psi[n] * threshold.denom();
            let rhs = threshold.numer() * self.p.pow(triangular(n));
            lhs > rhs
        })
    }

    /// Exact check that `ψ_n` is strictly increasing and `φ_n` is strictly
    /// increasing from `n = 1` on. (Float views of the tail saturate at
    /// machine precision; the claim itself is exact.)
    pub fn is_strictly_increasing(&self) -> bool {
        // ψ_n > ψ_{n−1}  ⇔  c_n > c_{n−1} p^n, and likewise for φ with n ≥ 2
        let mut p_pow = BigInt::one();
        for n in 1..self.len() {
            p_pow *= &self.p;
            if self.scaled_psi[n] <= &self.scaled_psi[n - 1] * &p_pow {
                return false;
            }
            if n >= 2 && self.scaled_phi[n] <= &self.scaled_phi[n - 1] * &p_pow {
                return false;
            }
        }
        true
    }

    fn increments_summable_ratio(&self) -> f64 {
        rational_to_f64(&self.ratio).recip()
    }
}

fn require_ratio_above_one(b: &Rational) -> Result<()> {
    if *b <= Rational::one() {
        return Err(Error::InvalidRatio(crate::exact::format_rational(b)));
    }
    Ok(())
}

/// Runs the recursion exactly up to index `n_max` at `r = 1/b`.
pub fn defect_recursion(b: &Rational, n_max: usize) -> Result<DefectSeries> {
    require_ratio_above_one(b)?;
    let p = b.numer().clone();
    let q = b.denom().clone();
    let p_primes = small_prime_factors(&p);

    let mut scaled_phi = Vec::with_capacity(n_max + 1);
    let mut scaled_psi = Vec::with_capacity(n_max + 1);
    scaled_phi.push(BigInt::zero());
    scaled_psi.push(BigInt::one());

    let mut p_pow = BigInt::one(); // p^n
    let mut q_pow = BigInt::one(); // q^n
    for n in 1..=n_max {
        p_pow *= &p;
        q_pow *= &q;
        let carry = &scaled_phi[n - 1] + &scaled_psi[n - 1];
        let phi_n = &carry * &p_pow;
        let psi_n = &scaled_psi[n - 1] * &p_pow + &q_pow * &carry;
        scaled_phi.push(phi_n);
        scaled_psi.push(psi_n);
    }
    Ok(DefectSeries {
        ratio: b.clone(),
        p,
        q,
        scaled_phi,
        scaled_psi,
        p_primes,
    })
}

/// Outcome of the exact eigen-equation check `Δu = −u`.
#[derive(Debug, Clone)]
pub struct EigenEquationCheck {
    /// Whether every checked identity held with exact equality.
    pub exact: bool,
    /// Interior indices checked (`1..len−1`).
    pub interior_checked: usize,
    /// Whether the one-sided identity at vertex 0 was checked.
    pub boundary_checked: bool,
    /// First failing index, if any.
    pub first_failure: Option<usize>,
}

/// Exact check that `b^n(u(n)−u(n−1)) − b^{n+1}(u(n+1)−u(n)) = −u(n)` at
/// every interior index, plus the one-sided identity at vertex 0.
///
/// The identity is cleared of denominators and verified in integers.
pub fn verify_eigen_equation(series: &DefectSeries) -> Result<EigenEquationCheck> {
    let len = series.len();
    if len < 3 {
        return Err(Error::SeriesTooShort { need: 3 });
    }
    let p = &series.p;
    let q = &series.q;
    let c = &series.scaled_psi;

    let mut first_failure = None;

    // vertex 0: c_1(u(0) − u(1)) = −u(0)  ⇔  c_1 = c_0 (p + q)
    if c[1] != &c[0] * (p + q) {
        first_failure = Some(0);
    }

    let mut p_pow = BigInt::one(); // p^n
    let mut q_pow = q.clone(); // q^n
    let mut interior_checked = 0;
    for n in 1..len - 1 {
        p_pow *= p;
        q_pow *= q;
        // q·p^n(c_n − p^n c_{n−1}) − (c_{n+1} − p^{n+1} c_n) + q^{n+1} c_n = 0
        let lhs = q * &p_pow * (&c[n] - &p_pow * &c[n - 1]) - (&c[n + 1] - &p_pow * p * &c[n])
            + &q_pow * &c[n];
        if !lhs.is_zero() && first_failure.is_none() {
            first_failure = Some(n);
        }
        interior_checked += 1;
    }
    Ok(EigenEquationCheck {
        exact: first_failure.is_none(),
        interior_checked,
        boundary_checked: true,
        first_failure,
    })
}

/// Minimal integer `m` with `m(m−1) ≥ (2/(e·ln b))²`, the exponent that
/// drives the polynomial growth bounds.
pub fn growth_exponent(b: &Rational) -> Result<u32> {
    require_ratio_above_one(b)?;
    let bound = (2.0 / (std::f64::consts::E * rational_to_f64(b).ln())).powi(2);
    let mut m = 1u32;
    while f64::from(m) * f64::from(m - 1) < bound {
        m += 1;
    }
    Ok(m)
}

/// Per-index verification of `φ_n ≤ n^m` and `ψ_n ≤ (n+1)^m − n^m`.
#[derive(Debug, Clone)]
pub struct GrowthCertificate {
    pub exponent: u32,
    /// Whether `m(m−1)` clears the `(2/(e·ln b))²` threshold.
    pub exponent_bound_ok: bool,
    pub phi_ok: Vec<bool>,
    pub psi_ok: Vec<bool>,
    pub all_pass: bool,
}

/// Exact comparison of the series against the polynomial growth bounds.
pub fn verify_growth_bounds(series: &DefectSeries, exponent: u32) -> GrowthCertificate {
    let bound = (2.0 / (std::f64::consts::E * rational_to_f64(series.ratio()).ln())).powi(2);
    let exponent_bound_ok = f64::from(exponent) * f64::from(exponent - 1) >= bound;
    let mut phi_ok = Vec::with_capacity(series.len());
    let mut psi_ok = Vec::with_capacity(series.len());
    for n in 0..series.len() {
        let level = series.p.pow(triangular(n));
        let n_pow = BigInt::from(n).pow(exponent);
        let n1_pow = BigInt::from(n + 1).pow(exponent);
        phi_ok.push(series.scaled_phi[n] <= &n_pow * &level);
        psi_ok.push(series.scaled_psi[n] <= (&n1_pow - &n_pow) * &level);
    }
    let all_pass = phi_ok.iter().chain(psi_ok.iter()).all(|&ok| ok);
    GrowthCertificate {
        exponent,
        exponent_bound_ok,
        phi_ok,
        psi_ok,
        all_pass,
    }
}

/// Exact partial sums of the energy `E(u) = Σ r^n φ_n²`, with a certified
/// majorant for the discarded tail.
#[derive(Debug, Clone)]
pub struct EnergyPartialSums {
    /// `S_N = Σ_{n≤N} r^n φ_n²` for `N = 0..len`, nondecreasing.
    pub sums: Vec<f64>,
    /// Upper bound on `Σ_{n>N} r^n n^{2m}` past the last computed index.
    pub tail_bound: f64,
}

/// Tail majorant `Σ_{n>N} r^n n^e ≤ r^{N+1}(N+1)^e / (1 − ρ)` with
/// `ρ = r ((N+2)/(N+1))^e`, valid when `ρ < 1`.
fn polynomial_tail_bound(r: f64, exponent: u32, after: usize) -> f64 {
    let n1 = (after + 1) as f64;
    let rho = r * ((n1 + 1.0) / n1).powi(exponent as i32);
    if rho >= 1.0 {
        return f64::INFINITY;
    }
    r.powi((after + 1) as i32) * n1.powi(exponent as i32) / (1.0 - rho)
}

/// Exact energy partial sums of the defect vector.
pub fn defect_energy(series: &DefectSeries) -> EnergyPartialSums {
    let p = &series.p;
    let q = &series.q;
    let mut sums = Vec::with_capacity(series.len());
    if series.is_empty() {
        return EnergyPartialSums {
            sums,
            tail_bound: 0.0,
        };
    }
    sums.push(0.0); // S_0: empty sum
    let mut acc = BigInt::zero(); // S_n · p^{2T_n + n}
    let mut q_pow = BigInt::one();
    for n in 1..series.len() {
        q_pow *= q;
        // denominator exponent grows by 2n + 1 between steps
        acc = acc * p.pow(2 * n as u32 + 1) + &q_pow * &series.scaled_phi[n] * &series.scaled_phi[n];
        let denom = p.pow(2 * triangular(n) + n as u32);
        sums.push(rational_to_f64(&Ratio::new_raw(acc.clone(), denom)));
    }
    let m = growth_exponent(series.ratio()).expect("ratio validated at construction");
    let r = series.increments_summable_ratio();
    let tail_bound = polynomial_tail_bound(r, 2 * m, series.len() - 1);
    EnergyPartialSums { sums, tail_bound }
}

/// A limit estimate with a certified error bar.
#[derive(Debug, Clone)]
pub struct LimitEstimate {
    /// `u(N)` for the final computed index.
    pub value: f64,
    /// Certified bound on `u(∞) − u(N)` (the increments are positive).
    pub tail_bound: f64,
    /// Final index `N`.
    pub terms: usize,
}

/// Estimates `u(∞) = 1 + Σ_{n≥1} r^n φ_n` within `tol`, certifying the
/// truncation error by the polynomial tail majorant. The growth bounds
/// backing the majorant are re-verified exactly on the computed range.
pub fn defect_limit(b: &Rational, tol: f64) -> Result<LimitEstimate> {
    require_ratio_above_one(b)?;
    if !(tol > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "tolerance must be positive, got {tol}"
        )));
    }
    let mut m = growth_exponent(b)?;
    let r = rational_to_f64(b).recip();
    let mut n_max = 8usize;
    loop {
        let series = defect_recursion(b, n_max)?;
        // The majorant needs φ_n ≤ n^m on the computed range; bump the
        // exponent if the certified bound ever fails (it should not for
        // the minimal m, but the certificate is what we trust).
        let mut cert = verify_growth_bounds(&series, m);
        while !cert.all_pass {
            m += 1;
            cert = verify_growth_bounds(&series, m);
        }
        if let Some(n) = (1..series.len()).find(|&n| polynomial_tail_bound(r, m, n) < tol) {
            return Ok(LimitEstimate {
                value: series.value_f64(n),
                tail_bound: polynomial_tail_bound(r, m, n),
                terms: n,
            });
        }
        if n_max > 100_000 {
            return Err(Error::InvalidParameter(format!(
                "tolerance {tol} unreachable within 100000 terms"
            )));
        }
        n_max *= 2;
    }
}

/// Partial `ℓ²` norms of the solution to `(A + I)v = 0`, `v(0) = 1`, on a
/// half-line family.
///
/// The three-term recurrence is run in increment form
/// `w_{n+1} = w_n + v(n)`, `v(n+1) = v(n) + w_{n+1}/c_{n+1}` with
/// `w_n = c_n (v(n) − v(n−1))`, which stays finite even when the
/// conductances `c_n` overflow `f64`. Iteration stops early if `v`
/// itself leaves the representable range (the divergence is then already
/// evident); the returned prefix always has strictly increasing sums.
pub fn l2_defect_probe(family: &Generator, n_max: usize) -> Result<Vec<f64>> {
    if n_max < 2 {
        return Err(Error::TruncationTooSmall(format!(
            "probe needs n_max >= 2, got {n_max}"
        )));
    }
    let r = match family {
        Generator::UnitPath => None,
        Generator::GeometricHalfline { ratio } => {
            require_ratio_above_one(ratio)?;
            Some(rational_to_f64(ratio).recip())
        }
        other => return Err(Error::UnsupportedTopology(other.name().to_string())),
    };
    let mut sums = Vec::with_capacity(n_max + 1);
    let mut v = 1.0f64;
    let mut w = 0.0f64;
    let mut r_pow = 1.0f64;
    let mut acc = v * v;
    sums.push(acc);
    for _ in 1..=n_max {
        w += v;
        let increment = match r {
            Some(r) => {
                r_pow *= r;
                w * r_pow
            }
            None => w,
        };
        v += increment;
        if !v.is_finite() || v > 1e150 {
            break;
        }
        acc += v * v;
        sums.push(acc);
    }
    Ok(sums)
}

/// Frozen reference row for the `b = 2` defect sequence.
#[derive(Debug, Clone)]
pub struct ReferenceRow {
    pub n: usize,
    /// Exact fraction, `None` for rows where only the decimal is pinned.
    pub fraction: Option<Rational>,
    /// Decimal value rounded to the stored precision.
    pub decimal: f64,
    /// Number of decimal places the stored decimal is rounded to.
    pub places: u32,
}

/// Parses the embedded `b = 2` regression fixture.
pub fn reference_series_b2() -> Vec<ReferenceRow> {
    let raw = include_str!("../data/defect_reference_b2.csv");
    let mut rows = Vec::new();
    for line in raw.lines() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') || line.starts_with("n,") {
            continue;
        }
        let mut parts = line.split(',');
        let n: usize = parts.next().unwrap().trim().parse().expect("fixture index");
        let fraction_txt = parts.next().unwrap().trim();
        let fraction = if fraction_txt.is_empty() {
            None
        } else {
            Some(crate::exact::parse_rational(fraction_txt).expect("fixture fraction"))
        };
        let decimal_txt = parts.next().unwrap().trim();
        let decimal: f64 = decimal_txt.parse().expect("fixture decimal");
        let places = decimal_txt
            .split_once('.')
            .map(|(_, frac)| frac.len() as u32)
            .unwrap_or(0);
        rows.push(ReferenceRow {
            n,
            fraction,
            decimal,
            places,
        });
    }
    rows
}

/// Compares a computed series against the embedded `b = 2` fixture.
///
/// Fractions must match digit for digit; decimals must round to the
/// stored printed values.
pub fn check_against_reference(series: &DefectSeries) -> Result<()> {
    if series.ratio() != &Rational::from_integer(2.into()) {
        return Err(Error::InvalidParameter(
            "reference fixture is for b = 2".into(),
        ));
    }
    for row in reference_series_b2() {
        if row.n >= series.len() {
            return Err(Error::SeriesTooShort { need: row.n + 1 });
        }
        if let Some(fraction) = &row.fraction {
            let got = series.value(row.n);
            if &got != fraction {
                return Err(Error::Parse(format!(
                    "fraction mismatch at n = {}: computed {}, reference {}",
                    row.n,
                    crate::exact::format_rational(&got),
                    crate::exact::format_rational(fraction),
                )));
            }
        }
        let got = series.value_f64(row.n);
        // stored decimals may be truncated or rounded at the last printed
        // digit, so agreement means within one unit of that place
        if (got - row.decimal).abs() >= 10f64.powi(-(row.places as i32)) {
            return Err(Error::Parse(format!(
                "decimal mismatch at n = {}: computed {got:.5}, reference {}",
                row.n, row.decimal
            )));
        }
    }
    Ok(())
}
