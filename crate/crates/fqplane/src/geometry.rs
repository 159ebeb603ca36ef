//! The plane GF(q)², its sphere partition, and the orthogonal group.
//!
//! Distances are values of the quadratic form ‖x‖ = x₁² + x₂² ∈ GF(q); the
//! "distance" between two points is ‖x − y‖. Spheres S_t = {x : ‖x‖ = t}
//! partition the q² points. O₂ is the group of 2×2 matrices θ with θᵀθ = I;
//! it preserves ‖·‖ and acts on each sphere.
//!
//! When −1 is a non-square (p ≡ 3 mod 4, n odd) the form is anisotropic:
//! S_0 = {0}, every other sphere has exactly q + 1 points, and |O₂| = 2(q+1).
//! When −1 is a square the form is hyperbolic: |S_0| = 2q − 1, the other
//! spheres have q − 1 points, and |O₂| = 2(q−1). Both cases are supported;
//! statements that need anisotropy say so.
//!
//! A point (x₁, x₂) also has a linear index code(x₁)·q + code(x₂); the
//! index-level methods (`*_idx`) are the entry points for the counting
//! kernels in [`crate::configs`].

use crate::error::{Error, Result};
use crate::field::{Field, Scalar};

/// Largest q for which a plane (q² point tables) may be built.
const PLANE_CAP: u32 = 1024;

/// A point of GF(q)².
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Point {
    pub x1: Scalar,
    pub x2: Scalar,
}

impl Point {
    /// Both coordinates must carry the same field order.
    pub fn new(x1: Scalar, x2: Scalar) -> Result<Self> {
        if x1.field_order() != x2.field_order() {
            return Err(Error::MixedFields {
                left: x1.field_order(),
                right: x2.field_order(),
            });
        }
        Ok(Point { x1, x2 })
    }
}

impl std::fmt::Display for Point {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({},{})", self.x1.code(), self.x2.code())
    }
}

/// An element θ of O₂: a 2×2 matrix with θᵀθ = I, entries row-major
/// [a b; c d] so the columns (a,c) and (b,d) are orthonormal.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct OrthMatrix {
    pub a: Scalar,
    pub b: Scalar,
    pub c: Scalar,
    pub d: Scalar,
}

impl OrthMatrix {
    /// Row-major entry codes, the sort key for the group enumeration.
    pub fn entry_codes(&self) -> [u32; 4] {
        [self.a.code(), self.b.code(), self.c.code(), self.d.code()]
    }
}

impl std::fmt::Display for OrthMatrix {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "[{} {}; {} {}]",
            self.a.code(),
            self.b.code(),
            self.c.code(),
            self.d.code()
        )
    }
}

/// A sphere S_t with its full point list, ascending by linear index.
#[derive(Clone, Debug)]
pub struct Sphere {
    pub t: Scalar,
    pub points: Vec<Point>,
}

/// GF(q)² with the norm table, the sphere partition, and the enumerated
/// orthogonal group, all built eagerly at construction. Immutable afterwards.
#[derive(Debug)]
pub struct Plane {
    field: Field,
    q: u32,
    /// norm_of[i] = code of ‖point(i)‖, length q².
    norm_of: Vec<u32>,
    /// spheres[t] = ascending linear indices of S_t, length q.
    spheres: Vec<Vec<u32>>,
    /// O₂ sorted ascending by row-major entry codes.
    orth: Vec<OrthMatrix>,
    /// orth_inv[i] = index of the transpose of orth[i].
    orth_inv: Vec<u32>,
}

impl Plane {
    pub fn new(field: Field) -> Result<Self> {
        let q = field.q();
        if q > PLANE_CAP {
            return Err(Error::SizeTooLarge {
                size: q as u64,
                cap: PLANE_CAP as u64,
            });
        }

        let mut norm_of = vec![0u32; (q * q) as usize];
        let mut spheres = vec![Vec::new(); q as usize];
        for c1 in 0..q {
            let sq1 = field.mul_raw(c1, c1);
            for c2 in 0..q {
                let t = field.add_raw(sq1, field.mul_raw(c2, c2));
                let idx = c1 * q + c2;
                norm_of[idx as usize] = t;
                spheres[t as usize].push(idx);
            }
        }

        // Columns of an orthogonal matrix: any unit vector (a,c), then a
        // unit vector orthogonal to it. The form is nondegenerate and (a,c)
        // is non-isotropic, so its complement is spanned by (-c,a); the unit
        // multiples are ±(-c,a).
        let mut orth = Vec::new();
        for &i in &spheres[1] {
            let (a, c) = (i / q, i % q);
            let (na, nc) = (field.neg_raw(a), field.neg_raw(c));
            for (b, d) in [(nc, a), (c, na)] {
                orth.push(OrthMatrix {
                    a: field.scalar(a)?,
                    b: field.scalar(b)?,
                    c: field.scalar(c)?,
                    d: field.scalar(d)?,
                });
            }
        }
        orth.sort_by_key(|m| m.entry_codes());
        debug_assert!(orth.windows(2).all(|w| w[0] != w[1]));

        let mut plane = Plane {
            field,
            q,
            norm_of,
            spheres,
            orth,
            orth_inv: Vec::new(),
        };
        plane.orth_inv = plane
            .orth
            .iter()
            .map(|m| {
                plane
                    .orth_index_of(&plane.transpose(m))
                    .expect("transpose of an orthogonal matrix is orthogonal") as u32
            })
            .collect();
        Ok(plane)
    }

    #[inline]
    pub fn field(&self) -> &Field {
        &self.field
    }

    #[inline]
    pub fn q(&self) -> u32 {
        self.q
    }

    /// Number of points, q².
    #[inline]
    pub fn point_count(&self) -> u32 {
        self.q * self.q
    }

    #[inline]
    pub fn point(&self, index: u32) -> Point {
        debug_assert!(index < self.point_count());
        Point {
            x1: self.field.scalar(index / self.q).unwrap(),
            x2: self.field.scalar(index % self.q).unwrap(),
        }
    }

    #[inline]
    pub fn index(&self, pt: Point) -> u32 {
        self.check_point(pt);
        pt.x1.code() * self.q + pt.x2.code()
    }

    pub fn point_from_codes(&self, c1: u32, c2: u32) -> Result<Point> {
        Ok(Point {
            x1: self.field.scalar(c1)?,
            x2: self.field.scalar(c2)?,
        })
    }

    #[inline]
    fn check_point(&self, pt: Point) {
        assert!(
            pt.x1.field_order() == self.q && pt.x2.field_order() == self.q,
            "point from GF({}) used with GF({})",
            pt.x1.field_order(),
            self.q
        );
    }

    /// ‖x‖ = x₁² + x₂².
    pub fn norm(&self, pt: Point) -> Scalar {
        let idx = self.index(pt);
        self.field.scalar(self.norm_of[idx as usize]).unwrap()
    }

    /// ‖x − y‖, the distance value between x and y.
    pub fn dist(&self, x: Point, y: Point) -> Scalar {
        let code = self.dist_idx(self.index(x), self.index(y));
        self.field.scalar(code).unwrap()
    }

    // Index-level kernel entry points. Safe for any i, j < q².

    #[inline]
    pub(crate) fn norm_idx(&self, i: u32) -> u32 {
        self.norm_of[i as usize]
    }

    /// Index of x − y.
    #[inline]
    pub(crate) fn diff_idx(&self, i: u32, j: u32) -> u32 {
        let f = &self.field;
        f.sub_raw(i / self.q, j / self.q) * self.q + f.sub_raw(i % self.q, j % self.q)
    }

    /// Index of x + y.
    #[inline]
    pub(crate) fn sum_idx(&self, i: u32, j: u32) -> u32 {
        let f = &self.field;
        f.add_raw(i / self.q, j / self.q) * self.q + f.add_raw(i % self.q, j % self.q)
    }

    /// Code of ‖x − y‖.
    #[inline]
    pub(crate) fn dist_idx(&self, i: u32, j: u32) -> u32 {
        self.norm_idx(self.diff_idx(i, j))
    }

    /// Code of the dot product x · y = x₁y₁ + x₂y₂.
    #[inline]
    pub(crate) fn dot_idx(&self, i: u32, j: u32) -> u32 {
        let f = &self.field;
        f.add_raw(
            f.mul_raw(i / self.q, j / self.q),
            f.mul_raw(i % self.q, j % self.q),
        )
    }

    /// The sphere S_t as indices, ascending.
    pub fn sphere_indices(&self, t: Scalar) -> &[u32] {
        &self.spheres[self.scalar_code(t) as usize]
    }

    #[inline]
    pub(crate) fn sphere_idx(&self, t_code: u32) -> &[u32] {
        &self.spheres[t_code as usize]
    }

    /// The sphere S_t with materialized points.
    pub fn sphere(&self, t: Scalar) -> Sphere {
        Sphere {
            t,
            points: self.sphere_indices(t).iter().map(|&i| self.point(i)).collect(),
        }
    }

    #[inline]
    fn scalar_code(&self, s: Scalar) -> u32 {
        assert!(
            s.field_order() == self.q,
            "scalar from GF({}) used with GF({})",
            s.field_order(),
            self.q
        );
        s.code()
    }

    /// The full orthogonal group, ascending by row-major entry codes.
    pub fn orthogonal_group(&self) -> &[OrthMatrix] {
        &self.orth
    }

    #[inline]
    pub fn orth_count(&self) -> usize {
        self.orth.len()
    }

    /// Position of θ in the enumeration, if θ is orthogonal.
    pub fn orth_index_of(&self, m: &OrthMatrix) -> Option<usize> {
        self.orth
            .binary_search_by_key(&m.entry_codes(), |x| x.entry_codes())
            .ok()
    }

    /// θ·x.
    pub fn apply(&self, m: &OrthMatrix, x: Point) -> Point {
        self.check_point(x);
        let f = &self.field;
        Point {
            x1: f.add(f.mul(m.a, x.x1), f.mul(m.b, x.x2)),
            x2: f.add(f.mul(m.c, x.x1), f.mul(m.d, x.x2)),
        }
    }

    /// Index of orth[k]·point(i).
    #[inline]
    pub(crate) fn apply_idx(&self, k: usize, i: u32) -> u32 {
        let f = &self.field;
        let m = &self.orth[k];
        let (x1, x2) = (i / self.q, i % self.q);
        let y1 = f.add_raw(f.mul_raw(m.a.code(), x1), f.mul_raw(m.b.code(), x2));
        let y2 = f.add_raw(f.mul_raw(m.c.code(), x1), f.mul_raw(m.d.code(), x2));
        y1 * self.q + y2
    }

    fn transpose(&self, m: &OrthMatrix) -> OrthMatrix {
        OrthMatrix {
            a: m.a,
            b: m.c,
            c: m.b,
            d: m.d,
        }
    }

    /// θ⁻¹ = θᵀ.
    pub fn inverse(&self, m: &OrthMatrix) -> OrthMatrix {
        self.transpose(m)
    }

    /// Position of orth[k]⁻¹ in the enumeration.
    #[inline]
    pub(crate) fn orth_inverse_index(&self, k: usize) -> usize {
        self.orth_inv[k] as usize
    }

    /// Matrix product θ·φ.
    pub fn compose(&self, m: &OrthMatrix, n: &OrthMatrix) -> OrthMatrix {
        let f = &self.field;
        OrthMatrix {
            a: f.add(f.mul(m.a, n.a), f.mul(m.b, n.c)),
            b: f.add(f.mul(m.a, n.b), f.mul(m.b, n.d)),
            c: f.add(f.mul(m.c, n.a), f.mul(m.d, n.c)),
            d: f.add(f.mul(m.c, n.b), f.mul(m.d, n.d)),
        }
    }

    /// det(θ) = ad − bc.
    pub fn det(&self, m: &OrthMatrix) -> Scalar {
        let f = &self.field;
        f.sub(f.mul(m.a, m.d), f.mul(m.b, m.c))
    }

    /// Checks that every (m, ℓ, m′, ℓ′) ∈ S_t⁴ with m + ℓ = m′ + ℓ′ is of one
    /// of three kinds: the two pairs are equal, they are swaps of each other,
    /// or the common sum is 0.
    ///
    /// Needs anisotropy: with isotropic directions a sphere contains whole
    /// lines and the statement fails.
    pub fn sphere_quadruple_trichotomy(&self, t: Scalar) -> Result<bool> {
        let t_code = self.scalar_code(t);
        if !self.field.is_anisotropic() {
            return Err(Error::HypothesisViolated { q: self.q });
        }
        let pts = self.sphere_idx(t_code);
        // Bucket ordered pairs by their sum; within a nonzero-sum bucket all
        // pairs must share one unordered support {m, ℓ}.
        let mut buckets: Vec<Vec<(u32, u32)>> = vec![Vec::new(); self.point_count() as usize];
        for &m in pts {
            for &l in pts {
                let s = self.sum_idx(m, l);
                buckets[s as usize].push((m, l));
            }
        }
        for (s, bucket) in buckets.iter().enumerate() {
            if s == 0 || bucket.is_empty() {
                continue;
            }
            let (m0, l0) = bucket[0];
            let key = (m0.min(l0), m0.max(l0));
            if bucket.iter().any(|&(m, l)| (m.min(l), m.max(l)) != key) {
                return Ok(false);
            }
        }
        Ok(true)
    }
}
