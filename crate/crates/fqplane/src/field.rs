//! Exact arithmetic in GF(p^n), p an odd prime, q = p^n ≤ 2³¹.
//!
//! An element c₀ + c₁x + … + c_{n−1}x^{n−1} of GF(p)[x]/(m(x)) is stored as
//! the canonical integer code c₀ + c₁p + … + c_{n−1}p^{n−1} ∈ [0, q). The
//! modulus m(x) is the lexicographically smallest monic irreducible
//! polynomial of degree n over GF(p), comparing the coefficient tuples
//! (c₀, …, c_{n−1}) with the low-degree entry first; for n = 1 the modulus is
//! x itself and arithmetic is plain arithmetic mod p.
//!
//! Fields with q ≤ 1024 precompute dense q×q add/multiply tables at
//! construction; larger fields fall back to digit-vector arithmetic. Both
//! paths produce identical codes.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest q for which dense operation tables are precomputed.
const TABLE_CAP: u32 = 1024;

/// Maximum extension degree: 3^20 > 2^31, so n < 20 for every admissible p.
const MAX_DEG: usize = 20;

/// An element of a specific finite field, tagged with that field's order.
///
/// Scalars are only constructed through [`Field`] methods, and every
/// arithmetic entry point asserts that its operands carry the order of the
/// field being used. Since q = p^n determines (p, n) uniquely and the modulus
/// is chosen deterministically, equal tags mean identical fields.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Scalar {
    q: u32,
    code: u32,
}

impl Scalar {
    /// Canonical integer code in [0, q).
    #[inline]
    pub fn code(self) -> u32 {
        self.code
    }

    /// Order of the field this scalar belongs to.
    #[inline]
    pub fn field_order(self) -> u32 {
        self.q
    }
}

impl std::fmt::Display for Scalar {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.code)
    }
}

#[derive(Debug, Clone)]
struct OpTables {
    add: Vec<u32>,
    mul: Vec<u32>,
    neg: Vec<u32>,
    trace: Vec<u32>,
}

/// GF(p^n) with a fixed modulus. See the module docs for the encoding.
#[derive(Debug, Clone)]
pub struct Field {
    p: u32,
    n: u32,
    q: u32,
    /// Modulus coefficients, low degree first, length n+1, leading 1.
    modulus: Vec<u32>,
    /// True iff −1 is a non-square, i.e. p ≡ 3 (mod 4) and n is odd.
    anisotropic: bool,
    tables: Option<Box<OpTables>>,
}

impl PartialEq for Field {
    fn eq(&self, other: &Self) -> bool {
        self.p == other.p && self.n == other.n && self.modulus == other.modulus
    }
}
impl Eq for Field {}

/// Serialized form: `{"p":3,"n":3,"modulus":[1,0,2,1]}`.
#[derive(Serialize, Deserialize)]
struct Descriptor {
    p: u64,
    n: u32,
    modulus: Vec<u32>,
}

impl Field {
    /// Builds GF(p^n), selecting the modulus deterministically.
    pub fn new(p: u64, n: u32) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidArgument("extension degree must be >= 1".into()));
        }
        if p < 3 || p % 2 == 0 || !is_prime(p) {
            return Err(Error::NotPrime(p));
        }
        let mut q: u64 = 1;
        for _ in 0..n {
            q = q.checked_mul(p).ok_or(Error::TooLarge { p, n })?;
            if q > 1 << 31 {
                return Err(Error::TooLarge { p, n });
            }
        }
        let modulus = smallest_irreducible(p as u32, n);
        Ok(Self::assemble(p as u32, n, q as u32, modulus))
    }

    /// Rebuilds a field from explicit parts, validating the modulus.
    pub fn from_parts(p: u64, n: u32, modulus: Vec<u32>) -> Result<Self> {
        let canonical = Self::new(p, n)?;
        if modulus.len() != n as usize + 1 {
            return Err(Error::BadDescriptor(format!(
                "modulus must have {} coefficients",
                n + 1
            )));
        }
        if modulus[n as usize] != 1 {
            return Err(Error::BadDescriptor("modulus must be monic".into()));
        }
        if modulus.iter().any(|&c| c as u64 >= p) {
            return Err(Error::BadDescriptor("modulus coefficient out of range".into()));
        }
        if n == 1 {
            if modulus[0] != 0 {
                return Err(Error::BadDescriptor(
                    "degree-1 modulus must be x itself".into(),
                ));
            }
        } else {
            let poly: Vec<u64> = modulus.iter().map(|&c| c as u64).collect();
            if !is_irreducible(&poly, p) {
                return Err(Error::BadDescriptor("modulus is reducible".into()));
            }
        }
        Ok(Self::assemble(p as u32, n, canonical.q, modulus))
    }

    fn assemble(p: u32, n: u32, q: u32, modulus: Vec<u32>) -> Self {
        let mut field = Field {
            p,
            n,
            q,
            modulus,
            anisotropic: p % 4 == 3 && n % 2 == 1,
            tables: None,
        };
        if q <= TABLE_CAP {
            let qs = q as usize;
            let mut add = vec![0u32; qs * qs];
            let mut mul = vec![0u32; qs * qs];
            let mut neg = vec![0u32; qs];
            let mut trace = vec![0u32; qs];
            for a in 0..q {
                neg[a as usize] = field.neg_code(a);
                for b in a..q {
                    let s = field.add_code(a, b);
                    let m = field.mul_code(a, b);
                    add[(a * q + b) as usize] = s;
                    add[(b * q + a) as usize] = s;
                    mul[(a * q + b) as usize] = m;
                    mul[(b * q + a) as usize] = m;
                }
            }
            for a in 0..q {
                trace[a as usize] = field.trace_code(a);
            }
            field.tables = Some(Box::new(OpTables { add, mul, neg, trace }));
        }
        field
    }

    /// Parses the JSON descriptor `{"p":..,"n":..,"modulus":[..]}`.
    pub fn from_descriptor_json(text: &str) -> Result<Self> {
        let d: Descriptor = serde_json::from_str(text)?;
        Self::from_parts(d.p, d.n, d.modulus)
    }

    /// Serializes the field as its JSON descriptor.
    pub fn descriptor_json(&self) -> String {
        serde_json::to_string(&Descriptor {
            p: self.p as u64,
            n: self.n,
            modulus: self.modulus.clone(),
        })
        .expect("descriptor serialization cannot fail")
    }

    #[inline]
    pub fn p(&self) -> u32 {
        self.p
    }

    #[inline]
    pub fn n(&self) -> u32 {
        self.n
    }

    #[inline]
    pub fn q(&self) -> u32 {
        self.q
    }

    /// Modulus coefficients, low degree first, length n+1.
    pub fn modulus(&self) -> &[u32] {
        &self.modulus
    }

    /// True iff −1 is a non-square, equivalently x² + y² = 0 only at the
    /// origin. Holds exactly when p ≡ 3 (mod 4) and n is odd.
    #[inline]
    pub fn is_anisotropic(&self) -> bool {
        self.anisotropic
    }

    /// The element with the given code.
    pub fn scalar(&self, code: u32) -> Result<Scalar> {
        if code < self.q {
            Ok(Scalar { q: self.q, code })
        } else {
            Err(Error::CodeOutOfRange { code: code as u64, q: self.q })
        }
    }

    #[inline]
    pub fn zero(&self) -> Scalar {
        Scalar { q: self.q, code: 0 }
    }

    #[inline]
    pub fn one(&self) -> Scalar {
        Scalar { q: self.q, code: 1 }
    }

    /// All q elements in code order.
    pub fn elements(&self) -> impl Iterator<Item = Scalar> + '_ {
        let q = self.q;
        (0..q).map(move |code| Scalar { q, code })
    }

    #[inline]
    fn chk(&self, s: Scalar) -> u32 {
        assert!(
            s.q == self.q,
            "scalar from GF({}) used with GF({})",
            s.q,
            self.q
        );
        s.code
    }

    #[inline]
    fn wrap(&self, code: u32) -> Scalar {
        Scalar { q: self.q, code }
    }

    #[inline]
    pub fn add(&self, a: Scalar, b: Scalar) -> Scalar {
        self.wrap(self.add_raw(self.chk(a), self.chk(b)))
    }

    #[inline]
    pub fn sub(&self, a: Scalar, b: Scalar) -> Scalar {
        let (a, b) = (self.chk(a), self.chk(b));
        self.wrap(self.add_raw(a, self.neg_raw(b)))
    }

    #[inline]
    pub fn mul(&self, a: Scalar, b: Scalar) -> Scalar {
        self.wrap(self.mul_raw(self.chk(a), self.chk(b)))
    }

    #[inline]
    pub fn neg(&self, a: Scalar) -> Scalar {
        self.wrap(self.neg_raw(self.chk(a)))
    }

    /// Multiplicative inverse; errors on zero.
    pub fn inv(&self, a: Scalar) -> Result<Scalar> {
        let code = self.chk(a);
        if code == 0 {
            return Err(Error::DivisionByZero);
        }
        // a^(q-2) = a^(-1) in the multiplicative group of order q-1.
        Ok(self.wrap(self.pow_raw(code, (self.q - 2) as u64)))
    }

    pub fn pow(&self, a: Scalar, e: u64) -> Scalar {
        self.wrap(self.pow_raw(self.chk(a), e))
    }

    /// Field trace into the prime field: Tr(x) = x + x^p + … + x^{p^{n−1}},
    /// returned as a value in [0, p).
    pub fn trace(&self, a: Scalar) -> u32 {
        let code = self.chk(a);
        match &self.tables {
            Some(t) => t.trace[code as usize],
            None => self.trace_code(code),
        }
    }

    /// Canonical additive character χ(x) = exp(2πi·Tr(x)/p).
    pub fn character(&self, a: Scalar) -> Complex64 {
        let t = self.trace(a) as f64;
        let angle = 2.0 * std::f64::consts::PI * t / self.p as f64;
        Complex64::new(angle.cos(), angle.sin())
    }

    /// True for 0 and for every x with x = y² for some y.
    pub fn is_square(&self, a: Scalar) -> bool {
        let code = self.chk(a);
        if code == 0 {
            return true;
        }
        // Euler criterion: x is a nonzero square iff x^((q-1)/2) = 1.
        self.pow_raw(code, ((self.q - 1) / 2) as u64) == 1
    }

    // ---- raw code-level operations (kernel entry points) ----

    #[inline]
    pub(crate) fn add_raw(&self, a: u32, b: u32) -> u32 {
        match &self.tables {
            Some(t) => t.add[(a * self.q + b) as usize],
            None => self.add_code(a, b),
        }
    }

    #[inline]
    pub(crate) fn mul_raw(&self, a: u32, b: u32) -> u32 {
        match &self.tables {
            Some(t) => t.mul[(a * self.q + b) as usize],
            None => self.mul_code(a, b),
        }
    }

    #[inline]
    pub(crate) fn neg_raw(&self, a: u32) -> u32 {
        match &self.tables {
            Some(t) => t.neg[a as usize],
            None => self.neg_code(a),
        }
    }

    #[inline]
    pub(crate) fn sub_raw(&self, a: u32, b: u32) -> u32 {
        self.add_raw(a, self.neg_raw(b))
    }

    pub(crate) fn pow_raw(&self, a: u32, mut e: u64) -> u32 {
        let mut base = a;
        let mut acc = 1u32;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul_raw(acc, base);
            }
            base = self.mul_raw(base, base);
            e >>= 1;
        }
        acc
    }

    pub(crate) fn trace_raw(&self, a: u32) -> u32 {
        match &self.tables {
            Some(t) => t.trace[a as usize],
            None => self.trace_code(a),
        }
    }

    // ---- digit-vector arithmetic (table-free path) ----

    fn decode(&self, code: u32, out: &mut [u32; MAX_DEG]) {
        let mut c = code;
        for slot in out.iter_mut().take(self.n as usize) {
            *slot = c % self.p;
            c /= self.p;
        }
    }

    fn encode(&self, digits: &[u32; MAX_DEG]) -> u32 {
        let mut code: u64 = 0;
        for i in (0..self.n as usize).rev() {
            code = code * self.p as u64 + digits[i] as u64;
        }
        code as u32
    }

    fn add_code(&self, a: u32, b: u32) -> u32 {
        if self.n == 1 {
            return ((a as u64 + b as u64) % self.p as u64) as u32;
        }
        let (mut da, mut db) = ([0u32; MAX_DEG], [0u32; MAX_DEG]);
        self.decode(a, &mut da);
        self.decode(b, &mut db);
        for i in 0..self.n as usize {
            da[i] = (da[i] + db[i]) % self.p;
        }
        self.encode(&da)
    }

    fn neg_code(&self, a: u32) -> u32 {
        if self.n == 1 {
            return if a == 0 { 0 } else { self.p - a };
        }
        let mut da = [0u32; MAX_DEG];
        self.decode(a, &mut da);
        for d in da.iter_mut().take(self.n as usize) {
            *d = (self.p - *d) % self.p;
        }
        self.encode(&da)
    }

    fn mul_code(&self, a: u32, b: u32) -> u32 {
        let p = self.p as u64;
        if self.n == 1 {
            return ((a as u64 * b as u64) % p) as u32;
        }
        let n = self.n as usize;
        let (mut da, mut db) = ([0u32; MAX_DEG], [0u32; MAX_DEG]);
        self.decode(a, &mut da);
        self.decode(b, &mut db);
        // Schoolbook product; coefficients stay below n·p² ≤ 19·46341² < 2^63.
        let mut prod = [0u64; 2 * MAX_DEG];
        for i in 0..n {
            if da[i] == 0 {
                continue;
            }
            for j in 0..n {
                prod[i + j] += da[i] as u64 * db[j] as u64;
            }
        }
        for c in prod.iter_mut().take(2 * n - 1) {
            *c %= p;
        }
        // Eliminate x^deg via x^n = -(m_0 + … + m_{n-1}x^{n-1}).
        for deg in (n..2 * n - 1).rev() {
            let c = prod[deg];
            if c == 0 {
                continue;
            }
            prod[deg] = 0;
            for k in 0..n {
                let m = self.modulus[k] as u64;
                prod[deg - n + k] = (prod[deg - n + k] + c * (p - m)) % p;
            }
        }
        let mut digits = [0u32; MAX_DEG];
        for i in 0..n {
            digits[i] = prod[i] as u32;
        }
        self.encode(&digits)
    }

    fn trace_code(&self, a: u32) -> u32 {
        // Tr(a) = sum of the n Frobenius images a^(p^k).
        let mut acc = a;
        let mut frob = a;
        for _ in 1..self.n {
            frob = self.pow_raw(frob, self.p as u64);
            acc = self.add_code(acc, frob);
        }
        debug_assert!(acc < self.p, "trace must land in the prime subfield");
        acc
    }
}

/// Deterministic trial division; p ≤ 2³¹ so the divisor bound is ≤ 46341.
fn is_prime(p: u64) -> bool {
    if p < 2 {
        return false;
    }
    if p % 2 == 0 {
        return p == 2;
    }
    let mut d = 3u64;
    while d * d <= p {
        if p % d == 0 {
            return false;
        }
        d += 2;
    }
    true
}

/// First irreducible monic degree-n polynomial in the low-degree-first
/// lexicographic order on (c₀, …, c_{n−1}).
fn smallest_irreducible(p: u32, n: u32) -> Vec<u32> {
    if n == 1 {
        return vec![0, 1];
    }
    let n = n as usize;
    let mut coeffs = vec![0u64; n + 1];
    coeffs[n] = 1;
    // Odometer with index 0 as the slowest (most significant) digit.
    loop {
        if coeffs[0] != 0 && is_irreducible(&coeffs, p as u64) {
            return coeffs.iter().map(|&c| c as u32).collect();
        }
        let mut i = n - 1;
        loop {
            coeffs[i] += 1;
            if coeffs[i] < p as u64 {
                break;
            }
            coeffs[i] = 0;
            assert!(i > 0, "no irreducible polynomial found (impossible)");
            i -= 1;
        }
    }
}

// ---- polynomial arithmetic over GF(p) for the irreducibility test ----

fn poly_trim(a: &mut Vec<u64>) {
    while a.len() > 1 && *a.last().unwrap() == 0 {
        a.pop();
    }
}

fn poly_mul_mod(a: &[u64], b: &[u64], m: &[u64], p: u64) -> Vec<u64> {
    let mut prod = vec![0u64; a.len() + b.len() - 1];
    for (i, &ai) in a.iter().enumerate() {
        if ai == 0 {
            continue;
        }
        for (j, &bj) in b.iter().enumerate() {
            prod[i + j] = (prod[i + j] + ai * bj) % p;
        }
    }
    poly_rem(&mut prod, m, p);
    prod
}

/// In-place remainder of `a` modulo the monic polynomial `m`.
fn poly_rem(a: &mut Vec<u64>, m: &[u64], p: u64) {
    let dm = m.len() - 1;
    while a.len() > dm {
        let c = *a.last().unwrap();
        let deg = a.len() - 1;
        if c != 0 {
            for k in 0..dm {
                let idx = deg - dm + k;
                a[idx] = (a[idx] + c * (p - m[k] % p)) % p;
            }
        }
        a.pop();
    }
    if a.is_empty() {
        a.push(0); // remainder by a constant
    }
    poly_trim(a);
}

fn poly_pow_mod(base: &[u64], mut e: u64, m: &[u64], p: u64) -> Vec<u64> {
    let mut acc = vec![1u64];
    let mut b = base.to_vec();
    while e > 0 {
        if e & 1 == 1 {
            acc = poly_mul_mod(&acc, &b, m, p);
        }
        b = poly_mul_mod(&b, &b, m, p);
        e >>= 1;
    }
    acc
}

fn modpow(mut b: u64, mut e: u64, p: u64) -> u64 {
    let mut acc = 1u64;
    b %= p;
    while e > 0 {
        if e & 1 == 1 {
            acc = acc * b % p;
        }
        b = b * b % p;
        e >>= 1;
    }
    acc
}

fn poly_gcd(mut a: Vec<u64>, mut b: Vec<u64>, p: u64) -> Vec<u64> {
    poly_trim(&mut a);
    poly_trim(&mut b);
    while !(b.len() == 1 && b[0] == 0) {
        // Make b monic so poly_rem applies.
        let lead = *b.last().unwrap();
        if lead != 1 {
            let inv = modpow(lead, p - 2, p);
            for c in b.iter_mut() {
                *c = *c * inv % p;
            }
        }
        poly_rem(&mut a, &b, p);
        std::mem::swap(&mut a, &mut b);
    }
    a
}

/// Rabin's criterion: monic f of degree n is irreducible over GF(p) iff
/// x^(p^n) ≡ x (mod f) and gcd(x^(p^(n/r)) − x, f) = 1 for every prime r | n.
fn is_irreducible(f: &[u64], p: u64) -> bool {
    let n = f.len() - 1;
    if n == 1 {
        return true;
    }
    if f[0] == 0 {
        return false; // divisible by x
    }
    let checkpoints: Vec<usize> = prime_divisors(n).into_iter().map(|r| n / r).collect();
    let x = vec![0u64, 1];
    let mut t = x.clone();
    for k in 1..=n {
        t = poly_pow_mod(&t, p, f, p); // t = x^(p^k) mod f
        if checkpoints.contains(&k) {
            // gcd(t - x, f) must be 1.
            let mut diff = t.clone();
            if diff.len() < 2 {
                diff.resize(2, 0);
            }
            diff[1] = (diff[1] + p - 1) % p;
            let g = poly_gcd(diff, f.to_vec(), p);
            if g.len() != 1 || g[0] == 0 {
                return false;
            }
        }
    }
    t == x
}

fn prime_divisors(mut n: usize) -> Vec<usize> {
    let mut out = Vec::new();
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            out.push(d);
            while n % d == 0 {
                n /= d;
            }
        }
        d += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}
