//! Tuple-counting kernels: ν_G, its support Δ_G, and Σ_t ν_G(t)².
//!
//! Brute force enumerates |E|^(k+1) tuples and is guarded by
//! [`BRUTE_CAP_TUPLES`](super::BRUTE_CAP_TUPLES). The structured paths
//! avoid full tabulation: a cut vertex splits a graph into pieces that
//! only communicate through apex counts, so supports and square sums
//! reduce to set intersections and inner products of per-apex tables.

use std::collections::HashMap;

use super::{ConfigGraph, DeltaSet, DistanceVector, PointSet, BRUTE_CAP_TUPLES};
use crate::error::{Error, Result};
use crate::geometry::Plane;

/// m×m matrix of pairwise distance codes between set members.
fn dist_matrix(plane: &Plane, e: &PointSet) -> Vec<u16> {
    let m = e.len();
    let mem = e.members();
    let mut d = vec![0u16; m * m];
    for i in 0..m {
        for j in 0..=i {
            let c = plane.dist_idx(mem[i], mem[j]) as u16;
            d[i * m + j] = c;
            d[j * m + i] = c;
        }
    }
    d
}

/// ν_G(E, t): ordered tuples from E realizing the distance vector t.
///
/// Depth-first assignment with edge pruning; the count never exceeds
/// |E|^(k+1), which callers keep inside u64 range.
pub fn nu(plane: &Plane, e: &PointSet, g: &ConfigGraph, t: &DistanceVector) -> Result<u64> {
    if t.len() != g.edge_count() {
        return Err(Error::ArityMismatch {
            got: t.len(),
            want: g.edge_count(),
        });
    }
    let q = plane.q();
    for s in t.entries() {
        if s.field_order() != q {
            return Err(Error::MixedFields {
                left: q,
                right: s.field_order(),
            });
        }
    }
    let codes: Vec<u16> = t.entries().iter().map(|s| s.code() as u16).collect();
    let k1 = g.vertex_count();
    // Edges from vertex v back into already-assigned vertices.
    let mut back: Vec<Vec<(usize, u16)>> = vec![Vec::new(); k1];
    for (slot, &(i, j)) in g.edges().iter().enumerate() {
        back[j].push((i, codes[slot]));
    }
    let m = e.len();
    let d = dist_matrix(plane, e);

    fn go(
        v: usize,
        k1: usize,
        m: usize,
        d: &[u16],
        back: &[Vec<(usize, u16)>],
        assign: &mut [usize],
        count: &mut u64,
    ) {
        if v == k1 {
            *count += 1;
            return;
        }
        'cand: for c in 0..m {
            for &(i, code) in &back[v] {
                if d[assign[i] * m + c] != code {
                    continue 'cand;
                }
            }
            assign[v] = c;
            go(v + 1, k1, m, d, back, assign, count);
        }
    }

    let mut assign = vec![0usize; k1];
    let mut count = 0u64;
    go(0, k1, m, &d, &back, &mut assign, &mut count);
    Ok(count)
}

/// Runs f over the dictionary index of every tuple in E^(k+1). The caller
/// has already checked the tuple count against the brute-force cap.
fn for_each_tuple(
    m: usize,
    k1: usize,
    edges: &[(usize, usize)],
    d: &[u16],
    q: u128,
    mut f: impl FnMut(u128),
) {
    if m == 0 {
        return;
    }
    let mut assign = vec![0usize; k1];
    loop {
        let mut idx = 0u128;
        for &(i, j) in edges {
            idx = idx * q + d[assign[i] * m + assign[j]] as u128;
        }
        f(idx);
        let mut v = k1;
        loop {
            if v == 0 {
                return;
            }
            v -= 1;
            assign[v] += 1;
            if assign[v] < m {
                break;
            }
            assign[v] = 0;
        }
    }
}

fn brute_guard(m: usize, k1: usize) -> Result<()> {
    let tuples = (m as u128)
        .checked_pow(k1 as u32)
        .unwrap_or(u128::MAX);
    if tuples > BRUTE_CAP_TUPLES as u128 {
        return Err(Error::FallbackTooLarge {
            tuples,
            cap: BRUTE_CAP_TUPLES,
        });
    }
    Ok(())
}

/// The full table t ↦ ν_G(E, t) by brute force, keyed by dictionary index.
/// Only distance vectors with a nonzero count appear.
pub fn nu_table(plane: &Plane, e: &PointSet, g: &ConfigGraph) -> Result<HashMap<u128, u64>> {
    brute_guard(e.len(), g.vertex_count())?;
    let d = dist_matrix(plane, e);
    let mut table = HashMap::new();
    for_each_tuple(
        e.len(),
        g.vertex_count(),
        g.edges(),
        &d,
        plane.q() as u128,
        |idx| *table.entry(idx).or_insert(0u64) += 1,
    );
    Ok(table)
}

#[inline]
fn split3(s: usize, q: usize) -> (usize, usize, usize) {
    (s / (q * q), s / q % q, s % q)
}

/// Δ_G(E): the support of ν_G as a bit mask.
///
/// Structured paths exist for the built-in graphs with a cut vertex or at
/// most three vertices; anything else falls back to tuple enumeration.
pub fn delta(plane: &Plane, e: &PointSet, g: &ConfigGraph) -> Result<DeltaSet> {
    let q = plane.q() as usize;
    let mut out = DeltaSet::empty(plane.q(), g.edge_count())?;
    let m = e.len();
    if m == 0 {
        return Ok(out);
    }
    let d = dist_matrix(plane, e);

    if g.is_edge() {
        for i in 0..m {
            for j in 0..m {
                out.insert(d[i * m + j] as u128);
            }
        }
    } else if g.is_path2() {
        // Both edges meet at vertex 1, so (t1, t2) is realized exactly
        // when both radii are, around a common center.
        let mut seen = vec![false; q];
        let mut radii: Vec<usize> = Vec::new();
        for y in 0..m {
            seen.iter_mut().for_each(|s| *s = false);
            radii.clear();
            for x in 0..m {
                let r = d[y * m + x] as usize;
                if !seen[r] {
                    seen[r] = true;
                    radii.push(r);
                }
            }
            for &r1 in &radii {
                for &r2 in &radii {
                    out.insert((r1 * q + r2) as u128);
                }
            }
        }
    } else if g.is_triangle() {
        for x in 0..m {
            for y in 0..m {
                let t1 = d[x * m + y] as usize;
                for z in 0..m {
                    let idx = (t1 * q + d[x * m + z] as usize) * q + d[y * m + z] as usize;
                    out.insert(idx as u128);
                }
            }
        }
    } else if g.is_bowtie() {
        // The shared vertex 0 is a cut vertex: t lies in the support
        // exactly when some apex x realizes both triangle halves, i.e.
        // the apex sets of the two 3-entry configurations intersect.
        let q3 = q * q * q;
        let words = m.div_ceil(64);
        let mut apex = vec![0u64; q3 * words];
        let mut seen = vec![false; q3];
        let mut configs: Vec<usize> = Vec::new();
        for x in 0..m {
            for y in 0..m {
                let dxy = d[x * m + y] as usize;
                for z in 0..m {
                    let s = (dxy * q + d[x * m + z] as usize) * q + d[y * m + z] as usize;
                    apex[s * words + x / 64] |= 1u64 << (x % 64);
                    if !seen[s] {
                        seen[s] = true;
                        configs.push(s);
                    }
                }
            }
        }
        configs.sort_unstable();
        // Bow-tie distance order interleaves the halves: the first half
        // supplies (t1, t2, t5) and the second (t3, t4, t6).
        let weave = |s1: usize, s2: usize| -> u128 {
            let (a1, b1, c1) = split3(s1, q);
            let (a2, b2, c2) = split3(s2, q);
            (((((a1 * q + b1) * q + a2) * q + b2) * q + c1) * q + c2) as u128
        };
        for (i, &s1) in configs.iter().enumerate() {
            let w1 = &apex[s1 * words..s1 * words + words];
            for &s2 in &configs[i..] {
                let w2 = &apex[s2 * words..s2 * words + words];
                if w1.iter().zip(w2).any(|(a, b)| a & b != 0) {
                    out.insert(weave(s1, s2));
                    out.insert(weave(s2, s1));
                }
            }
        }
    } else {
        brute_guard(m, g.vertex_count())?;
        for_each_tuple(m, g.vertex_count(), g.edges(), &d, q as u128, |idx| {
            out.insert(idx)
        });
    }
    Ok(out)
}

/// Σ_t ν_G(E, t)², the second moment of the counting function.
///
/// Bounded by |E|^(2k+2) ≤ q^24 for the built-ins, inside u128; every
/// accumulation into the result is checked.
pub fn nu_squared_sum(plane: &Plane, e: &PointSet, g: &ConfigGraph) -> Result<u128> {
    let q = plane.q() as usize;
    let m = e.len();
    let d = dist_matrix(plane, e);
    let mut acc: u128 = 0;
    let add_sq = |v: u128, acc: &mut u128| -> Result<()> {
        *acc = v
            .checked_mul(v)
            .and_then(|sq| acc.checked_add(sq))
            .ok_or(Error::AccumulatorOverflow)?;
        Ok(())
    };

    if g.is_edge() {
        let mut tab = vec![0u64; q];
        for i in 0..m {
            for j in 0..m {
                tab[d[i * m + j] as usize] += 1;
            }
        }
        for &v in &tab {
            add_sq(v as u128, &mut acc)?;
        }
    } else if g.is_path2() {
        // ν(t1,t2) = Σ_y R_y(t1)R_y(t2) with R_y(r) = #{x ∈ E : ‖x−y‖ = r}.
        let mut tab = vec![0u64; q * q];
        let mut ry = vec![0u64; q];
        for y in 0..m {
            ry.iter_mut().for_each(|v| *v = 0);
            for x in 0..m {
                ry[d[y * m + x] as usize] += 1;
            }
            for r1 in 0..q {
                if ry[r1] == 0 {
                    continue;
                }
                for r2 in 0..q {
                    tab[r1 * q + r2] += ry[r1] * ry[r2];
                }
            }
        }
        for &v in &tab {
            add_sq(v as u128, &mut acc)?;
        }
    } else if g.is_triangle() {
        let mut tab = vec![0u64; q * q * q];
        for x in 0..m {
            for y in 0..m {
                let base = d[x * m + y] as usize * q;
                for z in 0..m {
                    tab[(base + d[x * m + z] as usize) * q + d[y * m + z] as usize] += 1;
                }
            }
        }
        for &v in &tab {
            add_sq(v as u128, &mut acc)?;
        }
    } else if g.is_bowtie() {
        // With N_x(s) the apex table of x, ν_B(t) = Σ_x N_x(t1,t2,t5)N_x(t3,t4,t6),
        // so Σ_t ν_B² = Σ_{x,x'} ⟨N_x, N_x'⟩². Apex tables stay sparse.
        let q3 = q * q * q;
        let mut lists: Vec<Vec<(u32, u32)>> = Vec::with_capacity(m);
        let mut dense = vec![0u32; q3];
        let mut touched: Vec<usize> = Vec::new();
        for x in 0..m {
            touched.clear();
            for y in 0..m {
                let dxy = d[x * m + y] as usize;
                for z in 0..m {
                    let s = (dxy * q + d[x * m + z] as usize) * q + d[y * m + z] as usize;
                    if dense[s] == 0 {
                        touched.push(s);
                    }
                    dense[s] += 1;
                }
            }
            touched.sort_unstable();
            lists.push(touched.iter().map(|&s| (s as u32, dense[s])).collect());
            for &s in &touched {
                dense[s] = 0;
            }
        }
        // ⟨N_x, N_x'⟩ ≤ |E|²·max N ≤ 2^62 for q ≤ 1024, safe in u64.
        let mut buf = vec![0u64; q3];
        for x in 0..m {
            for &(s, n) in &lists[x] {
                buf[s as usize] = n as u64;
            }
            for x2 in x..m {
                let mut dot = 0u64;
                for &(s, n) in &lists[x2] {
                    dot += buf[s as usize] * n as u64;
                }
                let sq = (dot as u128)
                    .checked_mul(dot as u128)
                    .ok_or(Error::AccumulatorOverflow)?;
                let w = if x2 == x { sq } else { 2 * sq };
                acc = acc.checked_add(w).ok_or(Error::AccumulatorOverflow)?;
            }
            for &(s, _) in &lists[x] {
                buf[s as usize] = 0;
            }
        }
    } else {
        for v in nu_table(plane, e, g)?.values() {
            add_sq(*v as u128, &mut acc)?;
        }
    }
    Ok(acc)
}
