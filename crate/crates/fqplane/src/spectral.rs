//! Discrete Fourier analysis on GF(q)² with the canonical additive character
//! χ(z) = exp(2πi·Tr(z)/p).
//!
//! The transform of f: GF(q)² → ℂ is f̂(m) = q⁻² Σ_x χ(−m·x) f(x) and the
//! inversion is f(x) = Σ_m χ(m·x) f̂(m), so Plancherel reads
//! Σ_m |f̂(m)|² = q⁻² Σ_x |f(x)|². Everything is dense and O(q⁴): at desk
//! scale (q ≤ 31 in practice) that is at most a few million character
//! multiplies.
//!
//! Floating-point discipline: character values come from a p-entry
//! root-of-unity table, and every sum is taken by a fixed pairwise tree, so
//! results are bit-identical across runs and thread counts. Parallelism only
//! ever splits across output entries, never inside one sum.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::geometry::Plane;

/// A dense complex-valued function on the plane, indexed by point linear
/// index. `real_nonneg` records that every value is real and ≥ 0, which the
/// counting layers rely on; it is detected, not trusted.
#[derive(Clone, Debug)]
pub struct WeightedFunction {
    values: Vec<Complex64>,
    real_nonneg: bool,
}

impl WeightedFunction {
    pub fn from_complex(values: Vec<Complex64>) -> Self {
        let real_nonneg = values.iter().all(|v| v.im == 0.0 && v.re >= 0.0);
        WeightedFunction { values, real_nonneg }
    }

    pub fn from_real(values: Vec<f64>) -> Self {
        Self::from_complex(values.into_iter().map(|v| Complex64::new(v, 0.0)).collect())
    }

    pub fn from_counts(values: &[u64]) -> Self {
        Self::from_complex(
            values
                .iter()
                .map(|&v| Complex64::new(v as f64, 0.0))
                .collect(),
        )
    }

    /// Indicator of a set of point indices.
    pub fn indicator(len: usize, members: &[u32]) -> Self {
        let mut values = vec![Complex64::new(0.0, 0.0); len];
        for &i in members {
            values[i as usize] = Complex64::new(1.0, 0.0);
        }
        WeightedFunction {
            values,
            real_nonneg: true,
        }
    }

    pub fn zero(len: usize) -> Self {
        WeightedFunction {
            values: vec![Complex64::new(0.0, 0.0); len],
            real_nonneg: true,
        }
    }

    #[inline]
    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.values.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    #[inline]
    pub fn real_nonneg(&self) -> bool {
        self.real_nonneg
    }

    pub fn sum(&self) -> Complex64 {
        pairwise_sum(&self.values)
    }
}

/// A dense table of Fourier coefficients indexed by frequency linear index.
#[derive(Clone, Debug)]
pub struct SpectralTable {
    coeffs: Vec<Complex64>,
}

impl SpectralTable {
    #[inline]
    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    #[inline]
    pub fn coeff(&self, m: u32) -> Complex64 {
        self.coeffs[m as usize]
    }

    /// Entrywise conjugate, the passage from f̂ to its pairing partner in
    /// the product identities.
    pub fn conjugated(&self) -> SpectralTable {
        SpectralTable {
            coeffs: self.coeffs.iter().map(|c| c.conj()).collect(),
        }
    }

    /// CSV rows "m1,m2,re,im" in frequency linear-index order.
    pub fn to_csv(&self, plane: &Plane) -> String {
        let q = plane.q();
        let mut out = String::from("m1,m2,re,im\n");
        for (i, c) in self.coeffs.iter().enumerate() {
            let i = i as u32;
            out.push_str(&format!("{},{},{},{}\n", i / q, i % q, c.re, c.im));
        }
        out
    }
}

/// χ lookup table: chi[z] = exp(2πi·Tr(z)/p) for every scalar code z, built
/// from one p-entry root-of-unity table so equal traces give identical bits.
fn char_table(plane: &Plane) -> Vec<Complex64> {
    let f = plane.field();
    let p = f.p() as usize;
    let roots: Vec<Complex64> = (0..p)
        .map(|r| {
            let angle = 2.0 * std::f64::consts::PI * r as f64 / p as f64;
            Complex64::new(angle.cos(), angle.sin())
        })
        .collect();
    (0..f.q()).map(|z| roots[f.trace_raw(z) as usize]).collect()
}

/// Fixed-shape pairwise-tree sum; the reduction order depends only on the
/// slice length, never on threading.
pub(crate) fn pairwise_sum(v: &[Complex64]) -> Complex64 {
    if v.len() <= 8 {
        let mut acc = Complex64::new(0.0, 0.0);
        for x in v {
            acc += x;
        }
        return acc;
    }
    let mid = v.len() / 2;
    pairwise_sum(&v[..mid]) + pairwise_sum(&v[mid..])
}

pub(crate) fn pairwise_sum_f64(v: &[f64]) -> f64 {
    if v.len() <= 8 {
        return v.iter().sum();
    }
    let mid = v.len() / 2;
    pairwise_sum_f64(&v[..mid]) + pairwise_sum_f64(&v[mid..])
}

/// One output entry of the (un-normalized) character sum Σ_x χ(±m·x)·f(x).
fn char_sum_at(
    plane: &Plane,
    chi: &[Complex64],
    values: &[Complex64],
    m: u32,
    conjugate_char: bool,
) -> Complex64 {
    let terms: Vec<Complex64> = (0..plane.point_count())
        .map(|x| {
            let c = chi[plane.dot_idx(m, x) as usize];
            let c = if conjugate_char { c.conj() } else { c };
            c * values[x as usize]
        })
        .collect();
    pairwise_sum(&terms)
}

fn transform(plane: &Plane, values: &[Complex64], conjugate_char: bool, scale: f64) -> Vec<Complex64> {
    assert_eq!(values.len(), plane.point_count() as usize);
    let chi = char_table(plane);
    let n = plane.point_count();
    // Work splits per output frequency; each entry's sum has a fixed shape,
    // so the result is bit-identical at any worker count.
    (0..n)
        .into_par_iter()
        .map(|m| char_sum_at(plane, &chi, values, m, conjugate_char) * scale)
        .collect()
}

/// f̂(m) = q⁻² Σ_x χ(−m·x) f(x).
pub fn fourier(plane: &Plane, f: &WeightedFunction) -> SpectralTable {
    let scale = 1.0 / (plane.point_count() as f64);
    SpectralTable {
        coeffs: transform(plane, f.values(), true, scale),
    }
}

/// f(x) = Σ_m χ(m·x) f̂(m).
pub fn inverse_fourier(plane: &Plane, tab: &SpectralTable) -> WeightedFunction {
    WeightedFunction::from_complex(transform(plane, &tab.coeffs, false, 1.0))
}

/// (Σ_m |f̂(m)|², q⁻² Σ_x |f(x)|²); the two sides agree up to rounding.
pub fn plancherel_check(plane: &Plane, f: &WeightedFunction) -> (f64, f64) {
    let hat = fourier(plane, f);
    let lhs_terms: Vec<f64> = hat.coeffs.iter().map(|c| c.norm_sqr()).collect();
    let rhs_terms: Vec<f64> = f.values.iter().map(|c| c.norm_sqr()).collect();
    (
        pairwise_sum_f64(&lhs_terms),
        pairwise_sum_f64(&rhs_terms) / plane.point_count() as f64,
    )
}

/// Σ_{‖ℓ‖=t} |f̂(ℓ)|², the sphere-restricted spectral energy.
pub fn sphere_restricted_l2(plane: &Plane, f: &WeightedFunction, t: crate::field::Scalar) -> f64 {
    let hat = fourier(plane, f);
    let terms: Vec<f64> = plane
        .sphere_indices(t)
        .iter()
        .map(|&l| hat.coeffs[l as usize].norm_sqr())
        .collect();
    pairwise_sum_f64(&terms)
}

/// Both sides of the restricted L⁴ identity. With u = conj(f̂)·S_t:
///
/// lhs = Σ_ξ |û(ξ)|⁴ (û with the q⁻² forward normalization), and
/// rhs = q⁻⁶ Σ_s |P(s)|² where P(s) = Σ_{m+ℓ=s, m,ℓ∈S_t} u(m)u(ℓ).
///
/// Expanding the fourth power and summing χ over ξ collapses lhs onto the
/// additive quadruples m + ℓ = m′ + ℓ′ of the sphere, which is rhs; the two
/// must agree to rounding.
pub fn sphere_restricted_l4_identity(
    plane: &Plane,
    f: &WeightedFunction,
    t: crate::field::Scalar,
) -> (f64, f64) {
    let n = plane.point_count() as usize;
    let hat = fourier(plane, f);
    let mut u = vec![Complex64::new(0.0, 0.0); n];
    for &m in plane.sphere_indices(t) {
        u[m as usize] = hat.coeffs[m as usize].conj();
    }

    let u_hat = transform(plane, &u, true, 1.0 / n as f64);
    let lhs_terms: Vec<f64> = u_hat.iter().map(|c| c.norm_sqr() * c.norm_sqr()).collect();
    let lhs = pairwise_sum_f64(&lhs_terms);

    let mut pair_sums = vec![Complex64::new(0.0, 0.0); n];
    for &m in plane.sphere_indices(t) {
        for &l in plane.sphere_indices(t) {
            let s = plane.sum_idx(m, l);
            pair_sums[s as usize] += u[m as usize] * u[l as usize];
        }
    }
    let rhs_terms: Vec<f64> = pair_sums.iter().map(|c| c.norm_sqr()).collect();
    let q = plane.q() as f64;
    let rhs = pairwise_sum_f64(&rhs_terms) / q.powi(6);
    (lhs, rhs)
}
