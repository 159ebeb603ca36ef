//! Correlation tables driven by the orthogonal group.
//!
//! For θ in O₂ and a set E, λ_θ(w) = #{(u, v) ∈ E² : u − θv = w} counts
//! twisted difference representations. Its weighted cousin replaces the
//! indicator of E by the radius-a weight f(x) = E(x)·#{y ∈ E : ‖x−y‖ = a}:
//! α_θ(w) = Σ_{x−θx'=w} f(x)f(x'). Both have product Fourier transforms,
//! λ̂_θ(m) = q²·Ê(m)·conj(Ê(θ⁻¹m)) and likewise for α̂ with f̂, which is
//! what makes moment sums of λ and α usable proxies for tuple counts.
//!
//! Ψ(a, b) = Σ_{x,x'} (Σ_θ λ_θ(x−θx')^a)(Σ_φ λ_φ(x−φx')^b) interpolates
//! between pair-count moments; the inner sums factor the four-index
//! definition into a per-pair product, which is the only reason the
//! evaluation fits a desk budget.
//!
//! Everything integer is exact: u64 cells, u128 checked accumulators.
//! Floating-point enters only in the Fourier cross-checks and the kite
//! decomposition terms, which carry explicit tolerances at the call sites.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Pow, ToPrimitive};
use rayon::prelude::*;

use super::count::{delta, nu_squared_sum};
use super::{ConfigGraph, PointSet};
use crate::error::{Error, Result};
use crate::field::Scalar;
use crate::geometry::Plane;
use crate::spectral::{fourier, pairwise_sum_f64, WeightedFunction};

/// Dense per-θ tables of λ_θ over the plane.
#[derive(Clone, Debug)]
pub struct LambdaTable {
    q: u32,
    set_size: u64,
    tables: Vec<Vec<u64>>,
}

/// x ↦ θx as a lookup table, one row per group element.
fn orth_maps(plane: &Plane) -> Vec<Vec<u32>> {
    (0..plane.orth_count())
        .map(|k| {
            (0..plane.point_count())
                .map(|x| plane.apply_idx(k, x))
                .collect()
        })
        .collect()
}

impl LambdaTable {
    /// Tabulates λ_θ for every θ; O(|O₂|·|E|²) with |E|² ≤ q⁴ cell hits.
    pub fn new(plane: &Plane, e: &PointSet) -> Self {
        let n = plane.point_count() as usize;
        let members = e.members();
        let tables: Vec<Vec<u64>> = (0..plane.orth_count())
            .into_par_iter()
            .map(|k| {
                let mut tab = vec![0u64; n];
                for &v in members {
                    let tv = plane.apply_idx(k, v);
                    for &u in members {
                        tab[plane.diff_idx(u, tv) as usize] += 1;
                    }
                }
                tab
            })
            .collect();
        LambdaTable {
            q: plane.q(),
            set_size: members.len() as u64,
            tables,
        }
    }

    #[inline]
    pub fn theta_count(&self) -> usize {
        self.tables.len()
    }

    #[inline]
    pub fn set_size(&self) -> u64 {
        self.set_size
    }

    #[inline]
    pub fn table(&self, k: usize) -> &[u64] {
        &self.tables[k]
    }

    #[inline]
    pub fn value(&self, k: usize, w: u32) -> u64 {
        self.tables[k][w as usize]
    }

    /// Σ_{θ,w} λ_θ(w)^exp, checked. Each term is at most |E|^exp.
    pub fn moment_sum(&self, exp: u32) -> Result<u128> {
        let mut acc: u128 = 0;
        for tab in &self.tables {
            for &l in tab {
                let term = pow_small(l as u128, exp);
                acc = acc.checked_add(term).ok_or(Error::AccumulatorOverflow)?;
            }
        }
        Ok(acc)
    }

    /// A copy with one cell overwritten. Exists so verification harnesses
    /// can confirm that downstream checks really read the table; it has no
    /// counting meaning.
    pub fn perturbed(&self, k: usize, w: u32, value: u64) -> LambdaTable {
        let mut copy = self.clone();
        copy.tables[k][w as usize] = value;
        copy
    }

    /// Σ_{θ,w} (λ_θ(w) − |E|²/q²)², which by Σ_w λ_θ = |E|² equals
    /// Σλ² − |O₂|·|E|⁴/q².
    pub fn centered_square_sum(&self) -> f64 {
        let m2 = self.moment_sum(2).expect("second moment fits u128") as f64;
        let e = self.set_size as f64;
        let q2 = (self.q as f64) * (self.q as f64);
        m2 - self.tables.len() as f64 * e * e * e * e / q2
    }
}

#[inline]
fn pow_small(base: u128, exp: u32) -> u128 {
    // Callers keep base^exp inside u128 (base ≤ q², exp ≤ 6).
    (0..exp).fold(1u128, |a, _| a * base)
}

/// The radius-a weight restricted to E: f(x) = E(x)·#{y ∈ E : ‖x−y‖ = a},
/// dense over the plane.
pub fn weight_counts(plane: &Plane, e: &PointSet, a: Scalar) -> Result<Vec<u64>> {
    if a.field_order() != plane.q() {
        return Err(Error::MixedFields {
            left: plane.q(),
            right: a.field_order(),
        });
    }
    let mut f = vec![0u64; plane.point_count() as usize];
    let code = a.code() as u16;
    for &x in e.members() {
        let mut c = 0u64;
        for &y in e.members() {
            if plane.dist_idx(x, y) as u16 == code {
                c += 1;
            }
        }
        f[x as usize] = c;
    }
    Ok(f)
}

/// The same weight as a dense nonnegative function.
pub fn weight_function(plane: &Plane, e: &PointSet, a: Scalar) -> Result<WeightedFunction> {
    Ok(WeightedFunction::from_counts(&weight_counts(plane, e, a)?))
}

/// Dense per-θ tables of α_θ for an integer weight vector.
#[derive(Clone, Debug)]
pub struct AlphaTable {
    weight_sum: u64,
    weight_max: u64,
    tables: Vec<Vec<u64>>,
}

impl AlphaTable {
    /// Tabulates α_θ(w) = Σ_{x−θx'=w} f(x)f(x'). Cells stay below
    /// ‖f‖_∞·‖f‖₁, which is checked against u64 up front.
    pub fn new(plane: &Plane, weights: &[u64]) -> Result<Self> {
        let n = plane.point_count() as usize;
        if weights.len() != n {
            return Err(Error::InvalidArgument(format!(
                "weight vector has length {}, plane has {} points",
                weights.len(),
                n
            )));
        }
        let support: Vec<(u32, u64)> = weights
            .iter()
            .enumerate()
            .filter(|(_, &f)| f != 0)
            .map(|(x, &f)| (x as u32, f))
            .collect();
        let weight_sum = support.iter().map(|&(_, f)| f).try_fold(0u64, |a, f| {
            a.checked_add(f).ok_or(Error::AccumulatorOverflow)
        })?;
        let weight_max = support.iter().map(|&(_, f)| f).max().unwrap_or(0);
        weight_max
            .checked_mul(weight_sum)
            .ok_or(Error::AccumulatorOverflow)?;
        let tables: Vec<Vec<u64>> = (0..plane.orth_count())
            .into_par_iter()
            .map(|k| {
                let mut tab = vec![0u64; n];
                for &(x2, f2) in &support {
                    let tx2 = plane.apply_idx(k, x2);
                    for &(x1, f1) in &support {
                        tab[plane.diff_idx(x1, tx2) as usize] += f1 * f2;
                    }
                }
                tab
            })
            .collect();
        Ok(AlphaTable {
            weight_sum,
            weight_max,
            tables,
        })
    }

    #[inline]
    pub fn theta_count(&self) -> usize {
        self.tables.len()
    }

    #[inline]
    pub fn table(&self, k: usize) -> &[u64] {
        &self.tables[k]
    }

    #[inline]
    pub fn value(&self, k: usize, w: u32) -> u64 {
        self.tables[k][w as usize]
    }

    #[inline]
    pub fn weight_sum(&self) -> u64 {
        self.weight_sum
    }

    #[inline]
    pub fn weight_max(&self) -> u64 {
        self.weight_max
    }
}

/// Max error of λ̂_θ(m) = q²·Ê(m)·conj(Ê(θ⁻¹m)) over all θ and m.
pub fn lambda_hat_check(plane: &Plane, e: &PointSet, lam: &LambdaTable) -> f64 {
    let n = plane.point_count();
    let e_hat = fourier(plane, &e.weighted(plane));
    let q2 = (plane.q() as f64) * (plane.q() as f64);
    let mut worst = 0f64;
    for k in 0..lam.theta_count() {
        let counts: Vec<u64> = lam.table(k).to_vec();
        let lam_hat = fourier(plane, &WeightedFunction::from_counts(&counts));
        let inv = plane.orth_inverse_index(k);
        for m in 0..n {
            let pulled = plane.apply_idx(inv, m);
            let product = q2 * e_hat.coeff(m) * e_hat.coeff(pulled).conj();
            worst = worst.max((lam_hat.coeff(m) - product).norm());
        }
    }
    worst
}

/// Max error of α̂_θ(m) = q²·f̂(m)·conj(f̂(θ⁻¹m)) over all θ and m.
pub fn alpha_hat_check(plane: &Plane, weights: &[u64], alpha: &AlphaTable) -> f64 {
    let n = plane.point_count();
    let f_hat = fourier(plane, &WeightedFunction::from_counts(weights));
    let q2 = (plane.q() as f64) * (plane.q() as f64);
    let mut worst = 0f64;
    for k in 0..alpha.theta_count() {
        let counts: Vec<u64> = alpha.table(k).to_vec();
        let a_hat = fourier(plane, &WeightedFunction::from_counts(&counts));
        let inv = plane.orth_inverse_index(k);
        for m in 0..n {
            let pulled = plane.apply_idx(inv, m);
            let product = q2 * f_hat.coeff(m) * f_hat.coeff(pulled).conj();
            worst = worst.max((a_hat.coeff(m) - product).norm());
        }
    }
    worst
}

/// Ψ(a, b) in factored form, exact.
///
/// Per pair (x, x') the θ-sums are shared, so the cost is q⁴·|O₂| table
/// lookups. Total ≤ |O₂|²·q⁴·|E|^(a+b); all accumulation is checked.
pub fn psi(plane: &Plane, lam: &LambdaTable, a_exp: u32, b_exp: u32) -> Result<u128> {
    if a_exp == 0 || b_exp == 0 || a_exp + b_exp > 6 {
        return Err(Error::InvalidArgument(format!(
            "exponents must be positive with sum at most 6, got ({a_exp},{b_exp})"
        )));
    }
    let n = plane.point_count();
    let o2 = plane.orth_count();
    let maps = orth_maps(plane);
    let rows: Vec<Result<u128>> = (0..n)
        .into_par_iter()
        .map(|x| {
            let mut row: u128 = 0;
            for x2 in 0..n {
                let mut sa: u128 = 0;
                let mut sb: u128 = 0;
                for (k, map) in maps.iter().enumerate().take(o2) {
                    let w = plane.diff_idx(x, map[x2 as usize]);
                    let l = lam.value(k, w) as u128;
                    sa = sa
                        .checked_add(pow_small(l, a_exp))
                        .ok_or(Error::AccumulatorOverflow)?;
                    sb = sb
                        .checked_add(pow_small(l, b_exp))
                        .ok_or(Error::AccumulatorOverflow)?;
                }
                row = sa
                    .checked_mul(sb)
                    .and_then(|p| row.checked_add(p))
                    .ok_or(Error::AccumulatorOverflow)?;
            }
            Ok(row)
        })
        .collect();
    rows.into_iter().try_fold(0u128, |acc, r| {
        acc.checked_add(r?).ok_or(Error::AccumulatorOverflow)
    })
}

/// Splits the φ-sum inside Ψ(3, 1) by the common radius of x − φx'.
///
/// A transport φ with x − φx' = w exists exactly when ‖x − x'‖-style norms
/// agree; counting transports gives Σ_φ λ_φ(x−φx') = 2·Σ_a F_a(x)F_a(x') +
/// 2q·E(x)E(x') with the unrestricted counts F_a = E ∗ S_a. Returns the
/// radius-split total and Ψ(3, 1) computed side by side from the same λ
/// table; the two must agree exactly.
pub fn psi31_radius_split(plane: &Plane, e: &PointSet, lam: &LambdaTable) -> Result<(u128, u128)> {
    let n = plane.point_count();
    let q = plane.q();
    let o2 = plane.orth_count();
    // F_a over the whole plane, one dense row per radius code.
    let mut by_radius = vec![vec![0u32; n as usize]; q as usize];
    for x in 0..n {
        for &y in e.members() {
            by_radius[plane.dist_idx(x, y) as usize][x as usize] += 1;
        }
    }
    let maps = orth_maps(plane);
    let rows: Vec<Result<(u128, u128)>> = (0..n)
        .into_par_iter()
        .map(|x| {
            let mut split_row: u128 = 0;
            let mut psi_row: u128 = 0;
            let ex = e.contains(x);
            for x2 in 0..n {
                let mut s3: u128 = 0;
                let mut s1: u128 = 0;
                for (k, map) in maps.iter().enumerate().take(o2) {
                    let w = plane.diff_idx(x, map[x2 as usize]);
                    let l = lam.value(k, w) as u128;
                    s3 += l * l * l;
                    s1 += l;
                }
                // Σ_a F_a(x)F_a(x') ≤ q·|E|², inside u64.
                let mut shared: u64 = 0;
                for row in &by_radius {
                    shared += row[x as usize] as u64 * row[x2 as usize] as u64;
                }
                let pair_weight =
                    2 * shared as u128 + if ex && e.contains(x2) { 2 * q as u128 } else { 0 };
                split_row = s3
                    .checked_mul(pair_weight)
                    .and_then(|p| split_row.checked_add(p))
                    .ok_or(Error::AccumulatorOverflow)?;
                psi_row = s3
                    .checked_mul(s1)
                    .and_then(|p| psi_row.checked_add(p))
                    .ok_or(Error::AccumulatorOverflow)?;
            }
            Ok((split_row, psi_row))
        })
        .collect();
    rows.into_iter().try_fold((0u128, 0u128), |(a, b), r| {
        let (ra, rb) = r?;
        Ok((
            a.checked_add(ra).ok_or(Error::AccumulatorOverflow)?,
            b.checked_add(rb).ok_or(Error::AccumulatorOverflow)?,
        ))
    })
}

/// One radius slice of the cubic λ against α decomposition.
#[derive(Clone, Copy, Debug)]
pub struct KiteParts {
    /// Σ λ²(λ−μ)(α−β), the doubly centered term.
    pub term_i: f64,
    /// β·Σ λ²(λ−μ).
    pub term_ii: f64,
    /// μ·Σ λ²α.
    pub term_iii: f64,
    /// Σ λ³α, exact.
    pub total: u128,
}

/// Σ_{θ,w} λ³α for a prebuilt pair of tables, checked.
fn cubic_alpha_total(lam: &LambdaTable, alpha: &AlphaTable) -> Result<u128> {
    let mut acc: u128 = 0;
    for k in 0..lam.theta_count() {
        let lt = lam.table(k);
        let at = alpha.table(k);
        for (l, a) in lt.iter().zip(at) {
            let l = *l as u128;
            let term = (l * l * l)
                .checked_mul(*a as u128)
                .ok_or(Error::AccumulatorOverflow)?;
            acc = acc.checked_add(term).ok_or(Error::AccumulatorOverflow)?;
        }
    }
    Ok(acc)
}

/// Splits Σ λ³α at radius a around the means μ = |E|²/q², β = |E|⁴/q⁴:
///
///   Σλ³α = Σλ²(λ−μ)(α−β) + β·Σλ²(λ−μ) + μ·Σλ²α,
///
/// exactly, term by term in the reals. The three pieces are returned in
/// f64 with pairwise summation; the left side is exact.
pub fn kite_decomposition(plane: &Plane, e: &PointSet, a: Scalar) -> Result<KiteParts> {
    let lam = LambdaTable::new(plane, e);
    let weights = weight_counts(plane, e, a)?;
    let alpha = AlphaTable::new(plane, &weights)?;
    let total = cubic_alpha_total(&lam, &alpha)?;

    let m = e.len() as f64;
    let q2 = (plane.q() as f64) * (plane.q() as f64);
    let mu = m * m / q2;
    let beta = m * m * m * m / (q2 * q2);
    let cells = lam.theta_count() * plane.point_count() as usize;
    let mut t1 = Vec::with_capacity(cells);
    let mut t2 = Vec::with_capacity(cells);
    let mut t3 = Vec::with_capacity(cells);
    for k in 0..lam.theta_count() {
        let lt = lam.table(k);
        let at = alpha.table(k);
        for (l, alf) in lt.iter().zip(at) {
            let l = *l as f64;
            let alf = *alf as f64;
            t1.push(l * l * (l - mu) * (alf - beta));
            t2.push(beta * l * l * (l - mu));
            t3.push(mu * l * l * alf);
        }
    }
    Ok(KiteParts {
        term_i: pairwise_sum_f64(&t1),
        term_ii: pairwise_sum_f64(&t2),
        term_iii: pairwise_sum_f64(&t3),
        total,
    })
}

/// Σ λ³α^(a) for every radius code a, sharing one λ table.
pub fn kite_totals_by_radius(plane: &Plane, e: &PointSet) -> Result<Vec<u128>> {
    let lam = LambdaTable::new(plane, e);
    let mut out = Vec::with_capacity(plane.q() as usize);
    for code in 0..plane.q() {
        let a = plane.field().scalar(code)?;
        let weights = weight_counts(plane, e, a)?;
        let alpha = AlphaTable::new(plane, &weights)?;
        out.push(cubic_alpha_total(&lam, &alpha)?);
    }
    Ok(out)
}

/// Σ_θ λ³ moment, kept as a named entry point because it anchors the
/// triangle comparison chain.
pub fn cubic_lambda_sum(lam: &LambdaTable) -> Result<u128> {
    lam.moment_sum(3)
}

/// The three rungs of the triangle comparison chain:
/// (|E|⁶, |Δ_T|·Σν_T², |Δ_T|·Σλ³), each exact. The first is at most the
/// second by Cauchy-Schwarz on ν_T, the second at most the third because
/// triangle counts embed into twisted difference counts.
pub fn triangle_chain_check(plane: &Plane, e: &PointSet) -> Result<(u128, u128, u128)> {
    let g = ConfigGraph::triangle();
    let support = delta(plane, e, &g)?.len() as u128;
    let second = nu_squared_sum(plane, e, &g)?;
    let lam = LambdaTable::new(plane, e);
    let cubic = lam.moment_sum(3)?;
    let e6 = (e.len() as u128).pow(6);
    Ok((
        e6,
        support
            .checked_mul(second)
            .ok_or(Error::AccumulatorOverflow)?,
        support
            .checked_mul(cubic)
            .ok_or(Error::AccumulatorOverflow)?,
    ))
}

/// Exact two-sided data for the moment averaging bound on a counting
/// function over a finite domain X (the slot count is |X|):
///
///   Σ φⁿ ≤ |X|^{-(n-1)}·(Σφ)ⁿ + n(n-1)/2 · ‖φ‖_∞^{n-2} · Σ(φ − Σφ/|X|)².
///
/// Returns (lhs, rhs) as rationals; equality holds at n = 2.
pub fn averaging_bound_exact(counts: &[u64], n: u32) -> Result<(BigRational, BigRational)> {
    if n < 2 {
        return Err(Error::InvalidArgument(format!(
            "averaging bound needs n >= 2, got {n}"
        )));
    }
    if counts.is_empty() {
        return Err(Error::InvalidArgument("empty domain".into()));
    }
    let len = BigInt::from(counts.len() as u64);
    let sum: BigInt = counts.iter().map(|&c| BigInt::from(c)).sum();
    let sum_sq: BigInt = counts.iter().map(|&c| BigInt::from(c) * BigInt::from(c)).sum();
    let max = BigInt::from(*counts.iter().max().expect("nonempty"));
    let lhs: BigInt = counts.iter().map(|&c| Pow::pow(BigInt::from(c), n)).sum();
    let first = BigRational::new(Pow::pow(sum.clone(), n), Pow::pow(len.clone(), n - 1));
    let second_moment =
        BigRational::from(sum_sq) - BigRational::new(Pow::pow(sum, 2u32), len);
    let coeff = BigRational::new(BigInt::from(n as u64 * (n as u64 - 1)), BigInt::from(2))
        * BigRational::from(Pow::pow(max, n - 2));
    Ok((BigRational::from(lhs), first + coeff * second_moment))
}

/// The same bound for a nonnegative real function; integer-valued input is
/// routed through the exact path.
pub fn averaging_bound_check(phi: &WeightedFunction, n: u32) -> Result<(f64, f64)> {
    if !phi.real_nonneg() {
        return Err(Error::NegativeInput);
    }
    if n < 2 {
        return Err(Error::InvalidArgument(format!(
            "averaging bound needs n >= 2, got {n}"
        )));
    }
    if phi.is_empty() {
        return Err(Error::InvalidArgument("empty domain".into()));
    }
    let vals: Vec<f64> = phi.values().iter().map(|c| c.re).collect();
    if vals.iter().all(|v| v.fract() == 0.0 && *v < u64::MAX as f64) {
        let counts: Vec<u64> = vals.iter().map(|&v| v as u64).collect();
        let (lhs, rhs) = averaging_bound_exact(&counts, n)?;
        return Ok((
            lhs.to_f64().unwrap_or(f64::INFINITY),
            rhs.to_f64().unwrap_or(f64::INFINITY),
        ));
    }
    let len = vals.len() as f64;
    let sum = pairwise_sum_f64(&vals);
    let max = vals.iter().cloned().fold(0f64, f64::max);
    let powers: Vec<f64> = vals.iter().map(|&v| v.powi(n as i32)).collect();
    let lhs = pairwise_sum_f64(&powers);
    let mean = sum / len;
    let centered: Vec<f64> = vals.iter().map(|&v| (v - mean) * (v - mean)).collect();
    let second = pairwise_sum_f64(&centered);
    let rhs = sum.powi(n as i32) / len.powi(n as i32 - 1)
        + (n as f64) * (n as f64 - 1.0) / 2.0 * max.powi(n as i32 - 2) * second;
    Ok((lhs, rhs))
}
