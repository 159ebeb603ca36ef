//! Reproducible desk-scale experiments.
//!
//! Everything here is seeded: set sampling, sweeps, and the verification
//! battery derive all randomness from an explicit 64-bit seed through one
//! documented generator, so identical inputs give byte-identical output
//! (timing columns excepted). The sweep logs the ratio diagnostics that
//! stand in for the asymptotic statements: those have unspecified
//! constants, so they are recorded, never asserted.
//!
//! Set sizes follow |E| = ⌈q^s⌉ for rational s, computed exactly in
//! integers: ⌈q^{a/b}⌉ is the least m with m^b ≥ q^a.

use std::fmt::Write as _;
use std::io::Write;
use std::time::Instant;

use serde::Deserialize;

use crate::configs::{
    self, alpha_hat_check, averaging_bound_exact, delta, kite_decomposition, lambda_hat_check,
    nu, nu_squared_sum, nu_table, psi, psi31_radius_split, weight_counts, AlphaTable,
    ConfigGraph, DistanceVector, LambdaTable, PointSet,
};
use crate::error::{Error, Result};
use crate::field::Field;
use crate::geometry::Plane;
use crate::spectral::{
    fourier, inverse_fourier, plancherel_check, sphere_restricted_l4_identity,
};

/// The 64-bit generator behind every randomized experiment.
///
/// This is the splitmix construction: a Weyl sequence with increment
/// 0x9E3779B97F4A7C15 (the golden ratio), each state passed through the
/// Stafford variant-13 finalizer. It is chosen for having a published
/// reference sequence and a trivially portable implementation: only
/// wrapping 64-bit multiplies and shifts, so every platform produces the
/// same stream. Not cryptographic; not meant to be.
#[derive(Clone, Debug)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        SplitMix64 { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9E3779B97F4A7C15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D049BB133111EB);
        z ^ (z >> 31)
    }

    /// Uniform draw from [0, n) by rejection, so the result is unbiased
    /// and identical on every platform.
    pub fn below(&mut self, n: u64) -> u64 {
        assert!(n > 0, "empty range");
        let zone = u64::MAX - u64::MAX % n;
        loop {
            let v = self.next_u64();
            if v < zone {
                return v % n;
            }
        }
    }
}

/// Stateless combiner for derived seeds (per-trial, per-q): feeds each
/// part through one generator step so nearby inputs decorrelate.
pub fn mix_seed(parts: &[u64]) -> u64 {
    let mut acc = 0x243F6A8885A308D3u64;
    for &p in parts {
        acc = SplitMix64::new(acc ^ p).next_u64();
    }
    acc
}

/// How sample_set fills a set of a requested size.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SetKind {
    /// Fisher-Yates over the q² linear indices.
    Uniform,
    /// Spheres of seed-shuffled radii, concatenated then truncated.
    SphereUnion,
    /// A Cartesian sub-grid, row-major, truncated. Ignores the seed.
    Grid,
}

impl SetKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            SetKind::Uniform => "uniform",
            SetKind::SphereUnion => "sphere-union",
            SetKind::Grid => "grid",
        }
    }
}

impl std::str::FromStr for SetKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "uniform" => Ok(SetKind::Uniform),
            "sphere-union" => Ok(SetKind::SphereUnion),
            "grid" => Ok(SetKind::Grid),
            other => Err(Error::InvalidArgument(format!(
                "unknown set kind '{other}' (uniform, sphere-union, grid)"
            ))),
        }
    }
}

/// Deterministic sample of `size` distinct points.
pub fn sample_set(plane: &Plane, size: u32, seed: u64, kind: SetKind) -> Result<PointSet> {
    let n = plane.point_count();
    if size > n {
        return Err(Error::SizeTooLarge {
            size: size as u64,
            cap: n as u64,
        });
    }
    if size == 0 {
        return Ok(PointSet::empty(plane));
    }
    let mut rng = SplitMix64::new(seed);
    let indices: Vec<u32> = match kind {
        SetKind::Uniform => {
            let mut pool: Vec<u32> = (0..n).collect();
            for i in 0..size as usize {
                let j = i + rng.below((n as usize - i) as u64) as usize;
                pool.swap(i, j);
            }
            pool.truncate(size as usize);
            pool
        }
        SetKind::SphereUnion => {
            let q = plane.q() as usize;
            let mut radii: Vec<u32> = (0..q as u32).collect();
            for i in 0..q {
                let j = i + rng.below((q - i) as u64) as usize;
                radii.swap(i, j);
            }
            let mut out = Vec::with_capacity(size as usize);
            'outer: for &r in &radii {
                for &x in plane.sphere_idx(r) {
                    out.push(x);
                    if out.len() == size as usize {
                        break 'outer;
                    }
                }
            }
            out
        }
        SetKind::Grid => {
            let q = plane.q();
            let a = (size as f64).sqrt().ceil() as u32;
            let a = a.clamp(1, q);
            let mut out = Vec::with_capacity(size as usize);
            'rows: for i in 0..q {
                for j in 0..a.min(q) {
                    out.push(i * q + j);
                    if out.len() == size as usize {
                        break 'rows;
                    }
                }
            }
            out
        }
    };
    PointSet::from_indices(plane, indices)
}

/// ⌈q^{num/den}⌉ exactly: the least m ≥ 0 with m^den ≥ q^num.
pub fn ceil_pow_ratio(q: u32, num: u32, den: u32) -> u64 {
    assert!(den > 0, "zero denominator");
    let target = (q as u128).pow(num);
    let mut lo = 0u64;
    let mut hi = 1u64;
    while (hi as u128).pow(den) < target {
        lo = hi;
        hi *= 2;
    }
    while lo < hi {
        let mid = lo + (hi - lo) / 2;
        if (mid as u128).pow(den) >= target {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    lo
}

/// min(q², ⌈c·q^{3/2}⌉) exactly: the distance-set completeness threshold
/// with multiplier c, capped at the plane.
pub fn completeness_size(q: u32, c: u32) -> u64 {
    let target = (c as u128) * (c as u128) * (q as u128).pow(3);
    let mut lo = 0u64;
    let mut hi = (q as u64) * (q as u64);
    // m = ⌈c·q^{3/2}⌉ is the least m with m² ≥ c²q³, unless that passes q².
    if (hi as u128) * (hi as u128) < target {
        return hi;
    }
    while lo < hi {
        let mid = lo + (hi - lo) / 2;
        if (mid as u128) * (mid as u128) >= target {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    lo
}

/// Factors a prime power q = pⁿ; anything else is rejected.
pub fn factor_prime_power(q: u32) -> Result<(u64, u32)> {
    if q < 2 {
        return Err(Error::InvalidArgument(format!("{q} is not a prime power")));
    }
    let mut p = 0u64;
    let mut rest = q as u64;
    for cand in 2..=q as u64 {
        if cand * cand > q as u64 {
            break;
        }
        if rest % cand == 0 {
            p = cand;
            break;
        }
    }
    if p == 0 {
        return Ok((q as u64, 1));
    }
    let mut n = 0u32;
    while rest % p == 0 {
        rest /= p;
        n += 1;
    }
    if rest != 1 {
        return Err(Error::InvalidArgument(format!("{q} is not a prime power")));
    }
    Ok((p, n))
}

/// The default sweep and verification fields: every q = pⁿ with
/// p ≡ 3 mod 4 and n odd inside the desk budget, 27 exercising the
/// extension path.
pub fn default_q_list() -> Vec<u32> {
    vec![3, 7, 11, 19, 23, 27]
}

/// A sweep description; accepted as JSON or assembled from CLI flags.
#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub q_list: Vec<u32>,
    /// |E| = ⌈q^{num/den}⌉, capped at q².
    pub exponent: (u32, u32),
    pub trials: u32,
    pub seed: Option<u64>,
    pub graph: String,
    #[serde(default = "default_kind")]
    pub kind: SetKind,
    #[serde(default)]
    pub output: Option<String>,
    /// Permit fields where −1 is a square. Off by default: the zero
    /// sphere degenerates there and the ratio diagnostics lose meaning.
    #[serde(default)]
    pub allow_any_field: bool,
}

fn default_kind() -> SetKind {
    SetKind::Uniform
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    /// Checks the pieces that do not need a field built yet.
    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::InvalidArgument("trials must be at least 1".into()));
        }
        if self.exponent.1 == 0 {
            return Err(Error::InvalidArgument("exponent denominator is zero".into()));
        }
        if self.seed.is_none() {
            return Err(Error::InvalidArgument(
                "a seed is required; there is no wall-clock fallback".into(),
            ));
        }
        ConfigGraph::by_name(&self.graph)?;
        for &q in &self.q_list {
            let (p, n) = factor_prime_power(q)?;
            let field = Field::new(p, n)?;
            if !field.is_anisotropic() && !self.allow_any_field {
                return Err(Error::HypothesisViolated { q });
            }
        }
        Ok(())
    }
}

/// Fixed CSV header for sweep output. elapsed_ms is the only column
/// excluded from the determinism contract.
pub const SWEEP_HEADER: &str = "q,graph,kind,seed,set_size,delta_size,ratio,nu_sq_sum,psi22,\
psi31,lambda_centered_ratio,lambda_sq_ratio,lambda_cube_ratio,elapsed_ms";

/// One sweep trial, already evaluated.
#[derive(Clone, Debug)]
pub struct TrialRecord {
    pub q: u32,
    pub graph: String,
    pub kind: SetKind,
    pub seed: u64,
    pub set_size: u32,
    pub delta_size: u64,
    /// delta_size / q^edges, in [0, 1].
    pub ratio: f64,
    pub nu_sq_sum: u128,
    pub psi22: u128,
    pub psi31: u128,
    /// Σ(λ − |E|²/q²)² over q·|E|^{5/2}.
    pub lambda_centered_ratio: f64,
    /// Σλ² over q·|E|^{5/2} + |E|⁴/q.
    pub lambda_sq_ratio: f64,
    /// Σλ³ over |E|⁶/q³.
    pub lambda_cube_ratio: f64,
    pub elapsed_ms: u128,
}

impl TrialRecord {
    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            self.q,
            self.graph,
            self.kind.as_str(),
            self.seed,
            self.set_size,
            self.delta_size,
            self.ratio,
            self.nu_sq_sum,
            self.psi22,
            self.psi31,
            self.lambda_centered_ratio,
            self.lambda_sq_ratio,
            self.lambda_cube_ratio,
            self.elapsed_ms
        )
    }
}

/// Runs one trial: sample, count, time.
pub fn run_trial(
    plane: &Plane,
    graph: &ConfigGraph,
    kind: SetKind,
    trial_seed: u64,
    size: u32,
) -> Result<TrialRecord> {
    let start = Instant::now();
    let e = sample_set(plane, size, trial_seed, kind)?;
    let support = delta(plane, &e, graph)?;
    let nu_sq = nu_squared_sum(plane, &e, graph)?;
    let lam = LambdaTable::new(plane, &e);
    let p22 = psi(plane, &lam, 2, 2)?;
    let p31 = psi(plane, &lam, 3, 1)?;

    let q = plane.q() as f64;
    let m = e.len() as f64;
    // m^{5/2} as m²·√m: both factors correctly rounded, so reproducible.
    let m52 = m * m * m.sqrt();
    let centered = lam.centered_square_sum();
    let sq = lam.moment_sum(2)? as f64;
    let cube = lam.moment_sum(3)? as f64;
    let denom_centered = q * m52;
    let denom_sq = q * m52 + m * m * m * m / q;
    let denom_cube = m * m * m * m * m * m / (q * q * q);
    let zero_guard = |x: f64, d: f64| if d == 0.0 { 0.0 } else { x / d };
    Ok(TrialRecord {
        q: plane.q(),
        graph: graph.name().to_string(),
        kind,
        seed: trial_seed,
        set_size: e.len() as u32,
        delta_size: support.len(),
        ratio: support.len() as f64 / (q.powi(graph.edge_count() as i32)),
        nu_sq_sum: nu_sq,
        psi22: p22,
        psi31: p31,
        lambda_centered_ratio: zero_guard(centered, denom_centered),
        lambda_sq_ratio: zero_guard(sq, denom_sq),
        lambda_cube_ratio: zero_guard(cube, denom_cube),
        elapsed_ms: start.elapsed().as_millis(),
    })
}

fn summary_rows(q: u32, cfg: &ExperimentConfig, rows: &[TrialRecord]) -> (String, String) {
    let master = cfg.seed.unwrap_or(0);
    let umin = |f: fn(&TrialRecord) -> u128| rows.iter().map(f).min().unwrap_or(0);
    let fmin = |f: fn(&TrialRecord) -> f64| {
        rows.iter().map(f).fold(f64::INFINITY, f64::min).min(f64::INFINITY)
    };
    let umean = |f: fn(&TrialRecord) -> u128| {
        if rows.is_empty() {
            0.0
        } else {
            rows.iter().map(|r| f(r) as f64).sum::<f64>() / rows.len() as f64
        }
    };
    let fmean = |f: fn(&TrialRecord) -> f64| {
        if rows.is_empty() {
            0.0
        } else {
            rows.iter().map(f).sum::<f64>() / rows.len() as f64
        }
    };
    let size = rows.first().map(|r| r.set_size).unwrap_or(0);
    // Summary rows pin elapsed_ms to 0 so they stay byte-reproducible.
    let min_row = format!(
        "{},{},summary_min,{},{},{},{},{},{},{},{},{},{},0",
        q,
        cfg.graph,
        master,
        size,
        umin(|r| r.delta_size as u128),
        fmin(|r| r.ratio),
        umin(|r| r.nu_sq_sum),
        umin(|r| r.psi22),
        umin(|r| r.psi31),
        fmin(|r| r.lambda_centered_ratio),
        fmin(|r| r.lambda_sq_ratio),
        fmin(|r| r.lambda_cube_ratio)
    );
    let mean_row = format!(
        "{},{},summary_mean,{},{},{},{},{},{},{},{},{},{},0",
        q,
        cfg.graph,
        master,
        size,
        umean(|r| r.delta_size as u128),
        fmean(|r| r.ratio),
        umean(|r| r.nu_sq_sum),
        umean(|r| r.psi22),
        umean(|r| r.psi31),
        fmean(|r| r.lambda_centered_ratio),
        fmean(|r| r.lambda_sq_ratio),
        fmean(|r| r.lambda_cube_ratio)
    );
    (min_row, mean_row)
}

/// Runs the sweep, streaming one CSV row per trial (flushed immediately,
/// so partial output survives a crash) plus per-q min and mean rows.
pub fn run_sweep(cfg: &ExperimentConfig, out: &mut dyn Write) -> Result<()> {
    cfg.validate()?;
    let master = cfg.seed.expect("validated");
    let graph = ConfigGraph::by_name(&cfg.graph)?;
    writeln!(out, "{SWEEP_HEADER}")?;
    out.flush()?;
    for &q in &cfg.q_list {
        let (p, n) = factor_prime_power(q)?;
        let plane = Plane::new(Field::new(p, n)?)?;
        let size = ceil_pow_ratio(q, cfg.exponent.0, cfg.exponent.1)
            .min((q as u64) * (q as u64)) as u32;
        let mut rows = Vec::with_capacity(cfg.trials as usize);
        for trial in 0..cfg.trials {
            let trial_seed = mix_seed(&[master, q as u64, trial as u64]);
            let record = run_trial(&plane, &graph, cfg.kind, trial_seed, size)?;
            writeln!(out, "{}", record.csv_row())?;
            out.flush()?;
            rows.push(record);
        }
        let (min_row, mean_row) = summary_rows(q, cfg, &rows);
        writeln!(out, "{min_row}")?;
        writeln!(out, "{mean_row}")?;
        out.flush()?;
    }
    Ok(())
}

/// In-memory sweep, for tests and golden comparisons.
pub fn run_sweep_to_string(cfg: &ExperimentConfig) -> Result<String> {
    let mut buf = Vec::new();
    run_sweep(cfg, &mut buf)?;
    Ok(String::from_utf8(buf).expect("CSV is ASCII"))
}

/// One named check inside a verification report.
#[derive(Clone, Debug)]
pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    /// Stats on pass, a counterexample dump on failure.
    pub detail: String,
}

/// The outcome of the full battery on one field.
#[derive(Clone, Debug)]
pub struct VerifyReport {
    pub q: u32,
    pub trials: u32,
    pub seed: u64,
    pub checks: Vec<CheckResult>,
    pub elapsed_ms: u128,
}

impl VerifyReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

/// Σ_t ν_T(t)² ≤ Σ_{θ,w} λ_θ(w)³ for the given table; None on pass,
/// a counterexample line otherwise. Public so harnesses can aim it at a
/// deliberately damaged table and watch it fire.
pub fn check_group_action(plane: &Plane, e: &PointSet, lam: &LambdaTable) -> Option<String> {
    let left = match nu_squared_sum(plane, e, &ConfigGraph::triangle()) {
        Ok(v) => v,
        Err(err) => return Some(format!("triangle square sum failed: {err}")),
    };
    let right = match lam.moment_sum(3) {
        Ok(v) => v,
        Err(err) => return Some(format!("cubic moment overflow: {err}")),
    };
    if left <= right {
        None
    } else {
        Some(format!(
            "Σν_T² = {left} exceeds Σλ³ = {right} on E = {:?}",
            e.members()
        ))
    }
}

struct Battery<'a> {
    plane: &'a Plane,
    trials: u32,
    seed: u64,
    checks: Vec<CheckResult>,
}

impl<'a> Battery<'a> {
    fn record(&mut self, name: &'static str, outcome: std::result::Result<String, String>) {
        match outcome {
            Ok(detail) => self.checks.push(CheckResult {
                name,
                passed: true,
                detail,
            }),
            Err(detail) => self.checks.push(CheckResult {
                name,
                passed: false,
                detail,
            }),
        }
    }

    fn sample(&self, tag: u64, trial: u32, size: u32) -> PointSet {
        let seed = mix_seed(&[self.seed, tag, trial as u64]);
        sample_set(self.plane, size, seed, SetKind::Uniform).expect("size within plane")
    }

    /// Random size in [1, cap] drawn from the same stream as the set.
    fn sized_sample(&self, tag: u64, trial: u32, cap: u32) -> PointSet {
        let mut rng = SplitMix64::new(mix_seed(&[self.seed, tag, trial as u64, 0xA5]));
        let size = 1 + rng.below(cap as u64) as u32;
        self.sample(tag, trial, size)
    }
}

fn fmt_set(e: &PointSet) -> String {
    format!("{:?}", e.members())
}

/// Runs the exact-property battery on one field.
///
/// Trial counts for the expensive checks shrink automatically with q so
/// the default list stays inside a desk budget; every check reports which
/// scope it actually ran.
pub fn verify_suite(field: Field, trials: u32, seed: u64) -> Result<VerifyReport> {
    if !field.is_anisotropic() {
        return Err(Error::HypothesisViolated { q: field.q() });
    }
    let start = Instant::now();
    let q = field.q();
    let plane = Plane::new(field)?;
    let mut b = Battery {
        plane: &plane,
        trials,
        seed,
        checks: Vec::new(),
    };

    check_field_axioms(&mut b);
    check_sphere_profile(&mut b);
    check_orth_group(&mut b);
    check_trichotomy(&mut b);
    check_tuple_identity(&mut b);
    check_support_vs_brute(&mut b);
    check_support_monotone(&mut b);
    check_isometry_invariance(&mut b);
    check_lambda_invariants(&mut b);
    check_lambda_spectrum(&mut b);
    check_alpha_invariants(&mut b);
    check_alpha_spectrum(&mut b);
    check_plancherel(&mut b);
    check_round_trip(&mut b);
    check_restricted_l4(&mut b);
    check_group_action_property(&mut b);
    check_interpolation_chain(&mut b);
    check_triangle_chain(&mut b);
    check_kite_identity(&mut b);
    check_kite_radius_split(&mut b);
    check_averaging(&mut b);
    check_edge_completeness(&mut b);
    check_sampling_determinism(&mut b);

    Ok(VerifyReport {
        q,
        trials,
        seed,
        checks: b.checks,
        elapsed_ms: start.elapsed().as_millis(),
    })
}

fn check_field_axioms(b: &mut Battery) {
    let f = b.plane.field();
    let q = f.q() as u64;
    let mut rng = SplitMix64::new(mix_seed(&[b.seed, 1]));
    let rounds = 200.min(b.trials * 4).max(16);
    for _ in 0..rounds {
        let a = f.scalar(rng.below(q) as u32).unwrap();
        let c = f.scalar(rng.below(q) as u32).unwrap();
        let d = f.scalar(rng.below(q) as u32).unwrap();
        let lhs = f.mul(a, f.add(c, d));
        let rhs = f.add(f.mul(a, c), f.mul(a, d));
        if lhs != rhs {
            b.record(
                "field_axioms",
                Err(format!("distributivity broke at ({a}, {c}, {d})")),
            );
            return;
        }
        if a.code() != 0 {
            let inv = f.inv(a).unwrap();
            if f.mul(a, inv) != f.one() {
                b.record("field_axioms", Err(format!("inverse broke at {a}")));
                return;
            }
        }
    }
    b.record("field_axioms", Ok(format!("{rounds} random triples")));
}

fn check_sphere_profile(b: &mut Battery) {
    let plane = b.plane;
    let q = plane.q();
    let mut total = 0usize;
    for t in 0..q {
        let s = plane.sphere_idx(t).len();
        total += s;
        let want = if t == 0 { 1 } else { q as usize + 1 };
        if s != want {
            b.record(
                "sphere_profile",
                Err(format!("|S_{t}| = {s}, expected {want}")),
            );
            return;
        }
    }
    if total != (q * q) as usize {
        b.record(
            "sphere_profile",
            Err(format!("spheres cover {total} of {} points", q * q)),
        );
        return;
    }
    b.record(
        "sphere_profile",
        Ok(format!("|S_0| = 1, |S_t| = {} for t != 0", q + 1)),
    );
}

fn check_orth_group(b: &mut Battery) {
    let plane = b.plane;
    let q = plane.q();
    let want = 2 * (q as usize + 1);
    if plane.orth_count() != want {
        b.record(
            "orthogonal_group",
            Err(format!("|O₂| = {}, expected {want}", plane.orth_count())),
        );
        return;
    }
    let group = plane.orthogonal_group();
    let mut rng = SplitMix64::new(mix_seed(&[b.seed, 2]));
    for _ in 0..64 {
        let m = &group[rng.below(group.len() as u64) as usize];
        let n = &group[rng.below(group.len() as u64) as usize];
        let prod = plane.compose(m, n);
        if plane.orth_index_of(&prod).is_none() {
            b.record(
                "orthogonal_group",
                Err(format!("product {m} · {n} leaves the group")),
            );
            return;
        }
        let inv = plane.inverse(m);
        if plane.orth_index_of(&inv).is_none() {
            b.record("orthogonal_group", Err(format!("transpose of {m} missing")));
            return;
        }
    }
    b.record(
        "orthogonal_group",
        Ok(format!("order {want}, closure and inverses spot-checked")),
    );
}

fn check_trichotomy(b: &mut Battery) {
    let plane = b.plane;
    for t in 0..plane.q() {
        let s = plane.field().scalar(t).unwrap();
        match plane.sphere_quadruple_trichotomy(s) {
            Ok(true) => {}
            Ok(false) => {
                b.record(
                    "sphere_quadruple_trichotomy",
                    Err(format!("radius {t} has a splitting sum bucket")),
                );
                return;
            }
            Err(err) => {
                b.record("sphere_quadruple_trichotomy", Err(format!("{err}")));
                return;
            }
        }
    }
    b.record(
        "sphere_quadruple_trichotomy",
        Ok(format!("all {} radii exhaustively", plane.q())),
    );
}

fn check_tuple_identity(b: &mut Battery) {
    let plane = b.plane;
    let q2 = plane.point_count();
    let small = [ConfigGraph::edge(), ConfigGraph::path2(), ConfigGraph::triangle()];
    let big = [ConfigGraph::bowtie(), ConfigGraph::kite()];
    let small_trials = b.trials.min(50);
    let big_trials = b.trials.min(20);
    for g in &small {
        for trial in 0..small_trials {
            let e = b.sized_sample(3, trial * 8 + g.edge_count() as u32, q2.min(40));
            let table = match nu_table(plane, &e, g) {
                Ok(t) => t,
                Err(err) => {
                    b.record("tuple_identity", Err(format!("{}: {err}", g.name())));
                    return;
                }
            };
            let total: u128 = table.values().map(|&v| v as u128).sum();
            let want = (e.len() as u128).pow(g.vertex_count() as u32);
            if total != want {
                b.record(
                    "tuple_identity",
                    Err(format!(
                        "{}: Σν = {total}, |E|^(k+1) = {want} on {}",
                        g.name(),
                        fmt_set(&e)
                    )),
                );
                return;
            }
        }
    }
    for g in &big {
        for trial in 0..big_trials {
            let e = b.sized_sample(4, trial * 8 + g.edges()[3].1 as u32, q2.min(10));
            let table = match nu_table(plane, &e, g) {
                Ok(t) => t,
                Err(err) => {
                    b.record("tuple_identity", Err(format!("{}: {err}", g.name())));
                    return;
                }
            };
            let total: u128 = table.values().map(|&v| v as u128).sum();
            let want = (e.len() as u128).pow(5);
            if total != want {
                b.record(
                    "tuple_identity",
                    Err(format!(
                        "{}: Σν = {total}, |E|^5 = {want} on {}",
                        g.name(),
                        fmt_set(&e)
                    )),
                );
                return;
            }
        }
    }
    b.record(
        "tuple_identity",
        Ok(format!(
            "{small_trials} sets x 3 small graphs, {big_trials} x 2 five-vertex graphs"
        )),
    );
}

fn check_support_vs_brute(b: &mut Battery) {
    let plane = b.plane;
    let trials = b.trials.min(30);
    for g in [
        ConfigGraph::edge(),
        ConfigGraph::path2(),
        ConfigGraph::triangle(),
        ConfigGraph::bowtie(),
        ConfigGraph::kite(),
    ] {
        for trial in 0..trials {
            let e = b.sized_sample(5, trial * 8 + g.vertex_count() as u32, 6);
            let table = match nu_table(plane, &e, &g) {
                Ok(t) => t,
                Err(err) => {
                    b.record("support_matches_brute", Err(format!("{err}")));
                    return;
                }
            };
            let support = match delta(plane, &e, &g) {
                Ok(d) => d,
                Err(err) => {
                    b.record("support_matches_brute", Err(format!("{err}")));
                    return;
                }
            };
            if support.len() != table.len() as u64
                || table.keys().any(|&idx| !support.contains_index(idx))
            {
                b.record(
                    "support_matches_brute",
                    Err(format!(
                        "{} support mismatch on {}",
                        g.name(),
                        fmt_set(&e)
                    )),
                );
                return;
            }
        }
    }
    b.record(
        "support_matches_brute",
        Ok(format!("{trials} sets per graph, |E| <= 6")),
    );
}

fn check_support_monotone(b: &mut Battery) {
    let plane = b.plane;
    let q2 = plane.point_count();
    let trials = b.trials.min(20);
    for trial in 0..trials {
        let big = b.sized_sample(6, trial, q2.min(24).max(2));
        let half: Vec<u32> = big
            .members()
            .iter()
            .copied()
            .take(big.len().div_ceil(2))
            .collect();
        let small = PointSet::from_indices(plane, half).unwrap();
        for g in [ConfigGraph::triangle(), ConfigGraph::edge()] {
            let ds = delta(plane, &small, &g).unwrap();
            let db = delta(plane, &big, &g).unwrap();
            if !ds.is_subset_of(&db) {
                b.record(
                    "support_monotone",
                    Err(format!(
                        "{}: subset {} breaks containment in {}",
                        g.name(),
                        fmt_set(&small),
                        fmt_set(&big)
                    )),
                );
                return;
            }
        }
    }
    b.record("support_monotone", Ok(format!("{trials} nested pairs")));
}

fn check_isometry_invariance(b: &mut Battery) {
    let plane = b.plane;
    let trials = b.trials.min(12);
    let g = ConfigGraph::triangle();
    let mut rng = SplitMix64::new(mix_seed(&[b.seed, 7]));
    for trial in 0..trials {
        let e = b.sized_sample(7, trial, plane.point_count().min(18).max(2));
        let base = delta(plane, &e, &g).unwrap();
        let theta = rng.below(plane.orth_count() as u64) as usize;
        let shift = rng.below(plane.point_count() as u64) as u32;
        let moved = e.transformed(plane, theta, shift);
        if delta(plane, &moved, &g).unwrap() != base {
            b.record(
                "isometry_invariance",
                Err(format!(
                    "support changed under (theta {theta}, shift {shift}) on {}",
                    fmt_set(&e)
                )),
            );
            return;
        }
    }
    b.record(
        "isometry_invariance",
        Ok(format!("{trials} random rigid motions")),
    );
}

fn check_lambda_invariants(b: &mut Battery) {
    let plane = b.plane;
    let trials = b.trials.min(20);
    for trial in 0..trials {
        let e = b.sized_sample(8, trial, plane.point_count().min(40).max(2));
        let lam = LambdaTable::new(plane, &e);
        let m = e.len() as u64;
        for k in 0..lam.theta_count() {
            let sum: u64 = lam.table(k).iter().sum();
            if sum != m * m {
                b.record(
                    "lambda_invariants",
                    Err(format!("row {k} sums to {sum}, |E|² = {}", m * m)),
                );
                return;
            }
            if lam.table(k).iter().any(|&l| l > m) {
                b.record(
                    "lambda_invariants",
                    Err(format!("row {k} exceeds |E| = {m} on {}", fmt_set(&e))),
                );
                return;
            }
        }
    }
    b.record(
        "lambda_invariants",
        Ok(format!("{trials} sets: Σλ = |E|², λ <= |E|")),
    );
}

fn spectrum_trials(b: &Battery) -> u32 {
    if b.plane.q() <= 11 {
        b.trials.min(20)
    } else {
        b.trials.min(2)
    }
}

fn check_lambda_spectrum(b: &mut Battery) {
    let plane = b.plane;
    let trials = spectrum_trials(b);
    let mut worst = 0f64;
    for trial in 0..trials {
        let e = b.sized_sample(9, trial, plane.point_count().min(30).max(2));
        let lam = LambdaTable::new(plane, &e);
        let err = lambda_hat_check(plane, &e, &lam);
        worst = worst.max(err);
        if err >= 1e-9 {
            b.record(
                "lambda_spectrum_product",
                Err(format!("max error {err:.3e} on {}", fmt_set(&e))),
            );
            return;
        }
    }
    b.record(
        "lambda_spectrum_product",
        Ok(format!("{trials} sets, worst error {worst:.3e}")),
    );
}

fn check_alpha_invariants(b: &mut Battery) {
    let plane = b.plane;
    let trials = b.trials.min(12);
    let mut rng = SplitMix64::new(mix_seed(&[b.seed, 10]));
    for trial in 0..trials {
        let e = b.sized_sample(10, trial, plane.point_count().min(24).max(2));
        let a = plane.field().scalar(rng.below(plane.q() as u64) as u32).unwrap();
        let weights = weight_counts(plane, &e, a).unwrap();
        let alpha = match AlphaTable::new(plane, &weights) {
            Ok(t) => t,
            Err(err) => {
                b.record("alpha_invariants", Err(format!("{err}")));
                return;
            }
        };
        let total: u64 = weights.iter().sum();
        let cap = alpha.weight_max() * alpha.weight_sum();
        for k in 0..alpha.theta_count() {
            let sum: u64 = alpha.table(k).iter().sum();
            if sum != total * total || alpha.table(k).iter().any(|&v| v > cap) {
                b.record(
                    "alpha_invariants",
                    Err(format!(
                        "row {k}: sum {sum} vs ‖f‖₁² = {}, cap {cap}, radius {a}",
                        total * total
                    )),
                );
                return;
            }
        }
    }
    b.record(
        "alpha_invariants",
        Ok(format!("{trials} sets: Σα = ‖f‖₁², α <= ‖f‖∞‖f‖₁")),
    );
}

fn check_alpha_spectrum(b: &mut Battery) {
    let plane = b.plane;
    let trials = spectrum_trials(b);
    let mut rng = SplitMix64::new(mix_seed(&[b.seed, 11]));
    let mut worst = 0f64;
    for trial in 0..trials {
        let e = b.sized_sample(11, trial, plane.point_count().min(24).max(2));
        let a = plane.field().scalar(rng.below(plane.q() as u64) as u32).unwrap();
        let weights = weight_counts(plane, &e, a).unwrap();
        let alpha = AlphaTable::new(plane, &weights).unwrap();
        let err = alpha_hat_check(plane, &weights, &alpha);
        worst = worst.max(err);
        if err >= 1e-9 {
            b.record(
                "alpha_spectrum_product",
                Err(format!("max error {err:.3e} on {}", fmt_set(&e))),
            );
            return;
        }
    }
    b.record(
        "alpha_spectrum_product",
        Ok(format!("{trials} sets, worst error {worst:.3e}")),
    );
}

fn check_plancherel(b: &mut Battery) {
    let plane = b.plane;
    let trials = b.trials.min(100);
    let mut worst = 0f64;
    for trial in 0..trials {
        let e = b.sized_sample(12, trial, plane.point_count());
        let (lhs, rhs) = plancherel_check(plane, &e.weighted(plane));
        let err = (lhs - rhs).abs() / (1.0 + rhs.abs());
        worst = worst.max(err);
        if err >= 1e-9 {
            b.record(
                "plancherel",
                Err(format!("relative error {err:.3e} at |E| = {}", e.len())),
            );
            return;
        }
    }
    b.record(
        "plancherel",
        Ok(format!("{trials} sets, worst relative error {worst:.3e}")),
    );
}

fn check_round_trip(b: &mut Battery) {
    let plane = b.plane;
    let trials = b.trials.min(10);
    for trial in 0..trials {
        let e = b.sized_sample(13, trial, plane.point_count());
        let f = e.weighted(plane);
        let back = inverse_fourier(plane, &fourier(plane, &f));
        let worst = f
            .values()
            .iter()
            .zip(back.values())
            .map(|(a, c)| (a - c).norm())
            .fold(0f64, f64::max);
        if worst >= 1e-9 {
            b.record(
                "transform_round_trip",
                Err(format!("round trip error {worst:.3e} at |E| = {}", e.len())),
            );
            return;
        }
    }
    b.record("transform_round_trip", Ok(format!("{trials} indicators")));
}

fn check_restricted_l4(b: &mut Battery) {
    let plane = b.plane;
    let trials = if plane.q() <= 11 { b.trials.min(6) } else { 2 };
    let mut rng = SplitMix64::new(mix_seed(&[b.seed, 14]));
    let mut worst = 0f64;
    for trial in 0..trials {
        let e = b.sized_sample(14, trial, plane.point_count().min(30).max(2));
        let t_code = 1 + rng.below(plane.q() as u64 - 1) as u32;
        let t = plane.field().scalar(t_code).unwrap();
        let (lhs, rhs) = sphere_restricted_l4_identity(plane, &e.weighted(plane), t);
        let err = (lhs - rhs).abs() / (1.0 + rhs.abs());
        worst = worst.max(err);
        if err >= 1e-9 {
            b.record(
                "sphere_restricted_l4",
                Err(format!("radius {t_code}: error {err:.3e} on {}", fmt_set(&e))),
            );
            return;
        }
    }
    b.record(
        "sphere_restricted_l4",
        Ok(format!("{trials} (set, radius) pairs, worst {worst:.3e}")),
    );
}

fn check_group_action_property(b: &mut Battery) {
    let plane = b.plane;
    let trials = b.trials.min(25);
    for trial in 0..trials {
        let e = b.sized_sample(15, trial, plane.point_count().min(40).max(2));
        let lam = LambdaTable::new(plane, &e);
        if let Some(msg) = check_group_action(plane, &e, &lam) {
            b.record("group_action_inequality", Err(msg));
            return;
        }
    }
    b.record(
        "group_action_inequality",
        Ok(format!("{trials} sets: Σν_T² <= Σλ³")),
    );
}

fn check_interpolation_chain(b: &mut Battery) {
    let plane = b.plane;
    let trials = if plane.q() <= 11 { b.trials.min(10) } else { 3 };
    for trial in 0..trials {
        let e = b.sized_sample(16, trial, plane.point_count().min(40).max(2));
        let nu_b = nu_squared_sum(plane, &e, &ConfigGraph::bowtie()).unwrap();
        let lam = LambdaTable::new(plane, &e);
        let p22 = psi(plane, &lam, 2, 2).unwrap();
        let p31 = psi(plane, &lam, 3, 1).unwrap();
        if !(nu_b <= p22 && p22 <= p31) {
            b.record(
                "interpolation_chain",
                Err(format!(
                    "Σν_B² = {nu_b}, Ψ(2,2) = {p22}, Ψ(3,1) = {p31} on {}",
                    fmt_set(&e)
                )),
            );
            return;
        }
    }
    b.record(
        "interpolation_chain",
        Ok(format!("{trials} sets: Σν_B² <= Ψ(2,2) <= Ψ(3,1)")),
    );
}

fn check_triangle_chain(b: &mut Battery) {
    let plane = b.plane;
    let trials = b.trials.min(10);
    for trial in 0..trials {
        let e = b.sized_sample(17, trial, plane.point_count().min(30).max(2));
        let (a, mid, c) = configs::triangle_chain_check(plane, &e).unwrap();
        if !(a <= mid && mid <= c) {
            b.record(
                "triangle_comparison_chain",
                Err(format!("({a}, {mid}, {c}) not monotone on {}", fmt_set(&e))),
            );
            return;
        }
    }
    b.record(
        "triangle_comparison_chain",
        Ok(format!("{trials} sets: |E|⁶ <= |Δ_T|Σν_T² <= |Δ_T|Σλ³")),
    );
}

fn check_kite_identity(b: &mut Battery) {
    let plane = b.plane;
    let trials = if plane.q() <= 11 { b.trials.min(8) } else { 2 };
    let mut rng = SplitMix64::new(mix_seed(&[b.seed, 18]));
    for trial in 0..trials {
        let e = b.sized_sample(18, trial, plane.point_count().min(24).max(2));
        let a = plane.field().scalar(rng.below(plane.q() as u64) as u32).unwrap();
        let parts = kite_decomposition(plane, &e, a).unwrap();
        let lhs = parts.term_i + parts.term_ii + parts.term_iii;
        let want = parts.total as f64;
        if (lhs - want).abs() > 1e-6 * (1.0 + want) {
            b.record(
                "kite_decomposition_identity",
                Err(format!(
                    "I+II+III = {lhs}, total = {want}, radius {a} on {}",
                    fmt_set(&e)
                )),
            );
            return;
        }
    }
    b.record(
        "kite_decomposition_identity",
        Ok(format!("{trials} (set, radius) pairs within 1e-6")),
    );
}

fn check_kite_radius_split(b: &mut Battery) {
    let plane = b.plane;
    let trials = if plane.q() <= 11 { b.trials.min(6) } else { 2 };
    for trial in 0..trials {
        let e = b.sized_sample(19, trial, plane.point_count().min(20).max(2));
        let lam = LambdaTable::new(plane, &e);
        let (split, direct) = psi31_radius_split(plane, &e, &lam).unwrap();
        if split != direct {
            b.record(
                "interpolation_radius_split",
                Err(format!("split = {split}, Ψ(3,1) = {direct} on {}", fmt_set(&e))),
            );
            return;
        }
    }
    b.record(
        "interpolation_radius_split",
        Ok(format!("{trials} sets split exactly")),
    );
}

fn check_averaging(b: &mut Battery) {
    let plane = b.plane;
    let trials = b.trials.min(25);
    let mut rng = SplitMix64::new(mix_seed(&[b.seed, 20]));
    for trial in 0..trials {
        let len = plane.point_count() as usize;
        let counts: Vec<u64> = (0..len).map(|_| rng.below(30)).collect();
        let (l2, r2) = averaging_bound_exact(&counts, 2).unwrap();
        if l2 != r2 {
            b.record(
                "averaging_bound",
                Err(format!("n = 2 not an identity at trial {trial}")),
            );
            return;
        }
        for n in [3u32, 4] {
            let (lhs, rhs) = averaging_bound_exact(&counts, n).unwrap();
            if lhs > rhs {
                b.record(
                    "averaging_bound",
                    Err(format!("n = {n} violated: {lhs} > {rhs}")),
                );
                return;
            }
        }
    }
    b.record(
        "averaging_bound",
        Ok(format!("{trials} random counting functions, n in {{2,3,4}}")),
    );
}

fn check_edge_completeness(b: &mut Battery) {
    let plane = b.plane;
    let q = plane.q();
    let size = completeness_size(q, 3) as u32;
    let trials = b.trials.min(3);
    for trial in 0..trials {
        let e = b.sample(21, trial, size);
        let support = delta(plane, &e, &ConfigGraph::edge()).unwrap();
        if support.len() != q as u64 {
            b.record(
                "edge_completeness_at_threshold",
                Err(format!(
                    "|Δ_edge| = {} at |E| = {size}, expected {q}",
                    support.len()
                )),
            );
            return;
        }
    }
    b.record(
        "edge_completeness_at_threshold",
        Ok(format!("{trials} sets of size {size} realize all {q} distances")),
    );
}

fn check_sampling_determinism(b: &mut Battery) {
    let plane = b.plane;
    let size = plane.point_count().min(12);
    for kind in [SetKind::Uniform, SetKind::SphereUnion, SetKind::Grid] {
        let a = sample_set(plane, size, mix_seed(&[b.seed, 22]), kind).unwrap();
        let c = sample_set(plane, size, mix_seed(&[b.seed, 22]), kind).unwrap();
        if a != c {
            b.record(
                "sampling_determinism",
                Err(format!("kind {} not reproducible", kind.as_str())),
            );
            return;
        }
    }
    b.record("sampling_determinism", Ok("three kinds, re-sampled".into()));
}

/// Convenience wrapper: spot-checks that ν stays fixed under one rigid
/// motion, used by the battery and the fault harness tests.
pub fn nu_invariance_spot(plane: &Plane, e: &PointSet, theta: usize, shift: u32) -> Result<bool> {
    let g = ConfigGraph::triangle();
    let table = nu_table(plane, e, &g)?;
    let moved = e.transformed(plane, theta, shift);
    for (&idx, &count) in table.iter().take(16) {
        let t = DistanceVector::from_index(plane.field(), g.edge_count(), idx)?;
        if nu(plane, &moved, &g, &t)? != count {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Support size of one graph on one sampled set at the completeness
/// threshold |E| = min(q², ⌈c·q^{3/2}⌉). The trial seed depends on
/// (seed, q, c, trial) only, so different graphs at the same multiplier
/// see the same sets.
pub fn completeness_support(
    plane: &Plane,
    graph: &ConfigGraph,
    c: u32,
    seed: u64,
    trial: u32,
) -> Result<u64> {
    let size = completeness_size(plane.q(), c) as u32;
    let s = mix_seed(&[seed, plane.q() as u64, c as u64, trial as u64]);
    let e = sample_set(plane, size, s, SetKind::Uniform)?;
    Ok(delta(plane, &e, graph)?.len())
}

/// Mean delta_size per size step for a fixed graph, 20 seeds per step;
/// used by the trend tests and the sweep documentation example.
pub fn mean_support_sizes(
    plane: &Plane,
    graph: &ConfigGraph,
    sizes: &[u32],
    seed: u64,
    trials: u32,
) -> Result<Vec<f64>> {
    let mut out = Vec::with_capacity(sizes.len());
    for (step, &size) in sizes.iter().enumerate() {
        let mut total = 0f64;
        for trial in 0..trials {
            let s = mix_seed(&[seed, step as u64, trial as u64]);
            let e = sample_set(plane, size, s, SetKind::Uniform)?;
            total += delta(plane, &e, graph)?.len() as f64;
        }
        out.push(total / trials as f64);
    }
    Ok(out)
}

/// Writes a report as indented JSON. Strings are escaped minimally; all
/// payload here is ASCII from our own formatters.
pub fn report_to_json(report: &VerifyReport) -> String {
    let mut out = String::new();
    out.push_str("{\n");
    let _ = writeln!(out, "  \"schema\": \"fqplane.verify.v1\",");
    let _ = writeln!(out, "  \"q\": {},", report.q);
    let _ = writeln!(out, "  \"trials\": {},", report.trials);
    let _ = writeln!(out, "  \"seed\": {},", report.seed);
    let _ = writeln!(out, "  \"all_passed\": {},", report.all_passed());
    let _ = writeln!(out, "  \"elapsed_ms\": {},", report.elapsed_ms);
    out.push_str("  \"checks\": [\n");
    for (i, c) in report.checks.iter().enumerate() {
        let comma = if i + 1 == report.checks.len() { "" } else { "," };
        let _ = writeln!(
            out,
            "    {{\"name\": \"{}\", \"passed\": {}, \"detail\": \"{}\"}}{comma}",
            c.name,
            c.passed,
            json_escape(&c.detail)
        );
    }
    out.push_str("  ]\n}\n");
    out
}

pub(crate) fn json_escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for ch in s.chars() {
        match ch {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            c if (c as u32) < 0x20 => {
                let _ = write!(out, "\\u{:04x}", c as u32);
            }
            c => out.push(c),
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn plane(p: u64, n: u32) -> Plane {
        Plane::new(Field::new(p, n).unwrap()).unwrap()
    }

    #[test]
    fn generator_matches_the_reference_sequence() {
        // Published splitmix64 outputs for seed 0.
        let mut rng = SplitMix64::new(0);
        assert_eq!(rng.next_u64(), 0xE220A8397B1DCDAF);
        assert_eq!(rng.next_u64(), 0x6E789E6AA1B965F4);
        assert_eq!(rng.next_u64(), 0x06C45D188009454F);
    }

    #[test]
    fn bounded_draws_cover_the_range() {
        let mut rng = SplitMix64::new(9);
        let mut seen = [false; 7];
        for _ in 0..500 {
            let v = rng.below(7) as usize;
            assert!(v < 7);
            seen[v] = true;
        }
        assert!(seen.iter().all(|&s| s));
    }

    #[test]
    fn seed_mixing_separates_nearby_inputs() {
        let a = mix_seed(&[42, 3, 0]);
        let b = mix_seed(&[42, 3, 1]);
        let c = mix_seed(&[42, 7, 0]);
        assert_ne!(a, b);
        assert_ne!(a, c);
        assert_eq!(a, mix_seed(&[42, 3, 0]));
    }

    #[test]
    fn sampling_is_deterministic_and_sized() {
        let pl = plane(7, 1);
        for kind in [SetKind::Uniform, SetKind::SphereUnion, SetKind::Grid] {
            for size in [0u32, 1, 10, 49] {
                let a = sample_set(&pl, size, 5, kind).unwrap();
                let b = sample_set(&pl, size, 5, kind).unwrap();
                assert_eq!(a, b, "{} size {size}", kind.as_str());
                assert_eq!(a.len(), size as usize);
            }
        }
        let x = sample_set(&pl, 10, 5, SetKind::Uniform).unwrap();
        let y = sample_set(&pl, 10, 6, SetKind::Uniform).unwrap();
        assert_ne!(x, y);
        assert!(matches!(
            sample_set(&pl, 50, 5, SetKind::Uniform),
            Err(Error::SizeTooLarge { .. })
        ));
        // Full-size samples are the whole plane regardless of kind.
        for kind in [SetKind::Uniform, SetKind::SphereUnion, SetKind::Grid] {
            assert_eq!(sample_set(&pl, 49, 1, kind).unwrap(), PointSet::full(&pl));
        }
    }

    #[test]
    fn exact_ceilings_match_hand_computation() {
        assert_eq!(ceil_pow_ratio(11, 12, 7), 61);
        assert_eq!(ceil_pow_ratio(19, 12, 7), 156);
        assert_eq!(ceil_pow_ratio(23, 12, 7), 216);
        assert_eq!(ceil_pow_ratio(11, 8, 5), 47);
        assert_eq!(ceil_pow_ratio(19, 8, 5), 112);
        assert_eq!(ceil_pow_ratio(23, 8, 5), 151);
        assert_eq!(ceil_pow_ratio(3, 12, 7), 7);
        assert_eq!(ceil_pow_ratio(5, 2, 1), 25);
        assert_eq!(ceil_pow_ratio(7, 1, 2), 3);
        assert_eq!(completeness_size(11, 3), 110);
        assert_eq!(completeness_size(19, 3), 249);
        assert_eq!(completeness_size(3, 3), 9);
        assert_eq!(completeness_size(7, 3), 49);
    }

    #[test]
    fn prime_power_factoring() {
        assert_eq!(factor_prime_power(3).unwrap(), (3, 1));
        assert_eq!(factor_prime_power(27).unwrap(), (3, 3));
        assert_eq!(factor_prime_power(121).unwrap(), (11, 2));
        assert_eq!(factor_prime_power(23).unwrap(), (23, 1));
        assert!(factor_prime_power(12).is_err());
        assert!(factor_prime_power(1).is_err());
    }

    #[test]
    fn config_validation_enforces_the_hypothesis() {
        let text = r#"{
            "q_list": [3, 7],
            "exponent": [12, 7],
            "trials": 2,
            "seed": 42,
            "graph": "bowtie"
        }"#;
        let cfg = ExperimentConfig::from_json(text).unwrap();
        cfg.validate().unwrap();
        assert_eq!(cfg.kind, SetKind::Uniform);

        let mut bad = cfg.clone();
        bad.q_list = vec![5];
        assert!(matches!(
            bad.validate(),
            Err(Error::HypothesisViolated { q: 5 })
        ));
        bad.allow_any_field = true;
        bad.validate().unwrap();

        let mut no_seed = cfg.clone();
        no_seed.seed = None;
        assert!(no_seed.validate().is_err());
        let mut zero_trials = cfg.clone();
        zero_trials.trials = 0;
        assert!(zero_trials.validate().is_err());
        let mut bad_graph = cfg;
        bad_graph.graph = "heptagon".into();
        assert!(matches!(bad_graph.validate(), Err(Error::BadGraph(_))));

        assert!(ExperimentConfig::from_json("{\"q_list\": [3], \"surprise\": 1}").is_err());
    }

    #[test]
    fn sweep_output_shape_and_determinism() {
        let cfg = ExperimentConfig {
            q_list: vec![3],
            exponent: (3, 2),
            trials: 4,
            seed: Some(42),
            graph: "edge".into(),
            kind: SetKind::Uniform,
            output: None,
            allow_any_field: false,
        };
        let csv = run_sweep_to_string(&cfg).unwrap();
        let strip = |text: &str| -> Vec<String> {
            text.lines()
                .map(|l| l.rsplit_once(',').unwrap().0.to_string())
                .collect()
        };
        assert_eq!(strip(&csv), strip(&run_sweep_to_string(&cfg).unwrap()));
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], SWEEP_HEADER);
        assert_eq!(lines.len(), 1 + 4 + 2);
        assert!(lines[5].contains(",summary_min,"));
        assert!(lines[6].contains(",summary_mean,"));
        // ⌈3^{3/2}⌉ = 6 points; the distance set fits inside F_3.
        for row in &lines[1..5] {
            let cols: Vec<&str> = row.split(',').collect();
            assert_eq!(cols[0], "3");
            assert_eq!(cols[1], "edge");
            assert_eq!(cols[2], "uniform");
            assert_eq!(cols[4], "6");
            let delta: u64 = cols[5].parse().unwrap();
            assert!(delta <= 3);
            let ratio: f64 = cols[6].parse().unwrap();
            assert!((0.0..=1.0).contains(&ratio));
        }
    }

    #[test]
    fn sweep_with_no_fields_emits_only_the_header() {
        let cfg = ExperimentConfig {
            q_list: vec![],
            exponent: (12, 7),
            trials: 3,
            seed: Some(1),
            graph: "triangle".into(),
            kind: SetKind::Uniform,
            output: None,
            allow_any_field: false,
        };
        let csv = run_sweep_to_string(&cfg).unwrap();
        assert_eq!(csv.trim_end(), SWEEP_HEADER);
    }

    #[test]
    fn battery_passes_on_a_small_field() {
        let report = verify_suite(Field::new(3, 1).unwrap(), 6, 42).unwrap();
        for c in &report.checks {
            assert!(c.passed, "{} failed: {}", c.name, c.detail);
        }
        assert_eq!(report.checks.len(), 23);
        assert!(report.all_passed());
        let json = report_to_json(&report);
        assert!(json.contains("\"schema\": \"fqplane.verify.v1\""));
        assert!(json.contains("\"all_passed\": true"));
    }

    #[test]
    fn battery_rejects_hyperbolic_fields() {
        assert!(matches!(
            verify_suite(Field::new(5, 1).unwrap(), 3, 1),
            Err(Error::HypothesisViolated { q: 5 })
        ));
    }

    #[test]
    fn damaged_tables_trip_the_group_action_check() {
        let pl = plane(3, 1);
        let e = sample_set(&pl, 5, 11, SetKind::Uniform).unwrap();
        let lam = LambdaTable::new(&pl, &e);
        assert!(check_group_action(&pl, &e, &lam).is_none());
        // Zeroing one busy cell drags Σλ³ below Σν_T².
        let mut hit = None;
        'outer: for k in 0..lam.theta_count() {
            for w in 0..pl.point_count() {
                if lam.value(k, w) >= 2 {
                    hit = Some((k, w));
                    break 'outer;
                }
            }
        }
        let (k, w) = hit.expect("some cell exceeds 1");
        let mut damaged = lam.clone();
        for kk in 0..damaged.theta_count() {
            for ww in 0..pl.point_count() {
                if damaged.value(kk, ww) > 0 {
                    damaged = damaged.perturbed(kk, ww, 0);
                }
            }
        }
        let msg = check_group_action(&pl, &e, &damaged);
        assert!(msg.is_some(), "flattened table must fail at ({k},{w})");
        assert!(msg.unwrap().contains("exceeds"));
    }

    #[test]
    fn rigid_motions_leave_counts_alone() {
        let pl = plane(7, 1);
        let e = sample_set(&pl, 8, 3, SetKind::Uniform).unwrap();
        assert!(nu_invariance_spot(&pl, &e, 5, 13).unwrap());
    }

    /// Threshold pre-registration harness: prints the observed per-q
    /// trend minima and completeness hit counts for the seeded runs the
    /// golden file pins. Run on demand with --ignored --nocapture when
    /// the pinned q lists grow; not part of the ordinary suite.
    #[test]
    #[ignore]
    fn preregistration_prints_candidate_thresholds() {
        let seed = 42u64;
        let trials = 20u32;
        for (graph, exponent) in [("bowtie", (12u32, 7u32)), ("triangle", (8, 5))] {
            let cfg = ExperimentConfig {
                q_list: vec![11, 19, 23],
                exponent,
                trials,
                seed: Some(seed),
                graph: graph.into(),
                kind: SetKind::Uniform,
                output: None,
                allow_any_field: false,
            };
            let csv = run_sweep_to_string(&cfg).unwrap();
            for line in csv.lines().filter(|l| l.contains(",summary_min,")) {
                let cols: Vec<&str> = line.split(',').collect();
                println!(
                    "{graph} {}/{} q={} min_ratio={}",
                    exponent.0, exponent.1, cols[0], cols[6]
                );
            }
        }
        for q in [11u32, 19] {
            let pl = plane(q as u64, 1);
            for c in [2u32, 3] {
                let mut edge_hits = 0;
                let mut path_hits = 0;
                for trial in 0..trials {
                    let e =
                        completeness_support(&pl, &ConfigGraph::edge(), c, seed, trial).unwrap();
                    let p =
                        completeness_support(&pl, &ConfigGraph::path2(), c, seed, trial).unwrap();
                    edge_hits += u32::from(e == q as u64);
                    path_hits += u32::from(p == (q as u64) * (q as u64));
                }
                println!(
                    "completeness q={q} c={c} size={} edge {edge_hits}/{trials} path2 {path_hits}/{trials}",
                    completeness_size(q, c)
                );
            }
        }
    }

    #[test]
    fn mean_support_grows_with_set_size() {
        let pl = plane(7, 1);
        let means = mean_support_sizes(
            &pl,
            &ConfigGraph::triangle(),
            &[8, 16, 32],
            42,
            20,
        )
        .unwrap();
        assert!(means[0] <= means[1] && means[1] <= means[2], "{means:?}");
    }

    mod properties {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn exact_ceiling_brackets_the_power(
                (den, num) in (1u32..8).prop_flat_map(|d| (Just(d), 1..=3 * d)),
                q in 2u32..50,
            ) {
                let m = ceil_pow_ratio(q, num, den);
                let target = (q as u128).pow(num);
                prop_assert!((m as u128).pow(den) >= target);
                prop_assert!(m == 0 || ((m - 1) as u128).pow(den) < target);
            }

            #[test]
            fn bounded_draws_stay_in_range(seed in any::<u64>(), n in 1u64..1_000_000) {
                let mut rng = SplitMix64::new(seed);
                prop_assert!(rng.below(n) < n);
            }
        }
    }
}
