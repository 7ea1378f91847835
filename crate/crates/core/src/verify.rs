//! Sampled, tolerance-explicit certificates for the structural inequalities
//! of the construction: shape sandwich, projection structure, equivalence
//! sandwich, octahedrality witnesses, the two directional-estimate suites
//! and the smoothness trend.
//!
//! Every check is a pure function of (schedule, tolerances, seed): samples
//! draw their randomness from per-sample seeds derived with a splitmix step,
//! so reports are reproducible and order-independent.

use std::time::Instant;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};

use crate::calculus::{
    directional_derivative, phi, symmetric_quotient, tangent_decomposition, StepSchedule,
};
use crate::error::{Error, Result};
use crate::norm::{
    ell1_sum_norm, equivalence_constants, level_norm, minkowski_oracle, tower_norm,
};
use crate::space::{axpy, random_vector, SampleStyle, TowerSpace, TowerVector};

/// Outcome of one named check.
///
/// `worst_violation` is the largest defect in excess of the applicable
/// (sub-)tolerance over everything sampled; it is <= 0 exactly when every
/// inequality held, and `passed` is `violations == 0`. `worst_witness`
/// always carries the least-margin sample (replayable inputs), so a failing
/// report is diagnosable and a passing one shows how close it came.
#[derive(Debug, Clone, Serialize)]
pub struct VerificationReport {
    pub check_name: String,
    pub samples: usize,
    pub violations: usize,
    pub worst_violation: f64,
    pub worst_witness: Value,
    pub tolerance: f64,
    pub passed: bool,
    pub runtime_ms: u64,
}

/// Per-sample evidence trail for the deep-level estimate suite.
#[derive(Debug, Clone, Serialize)]
pub struct Case2Trace {
    pub n: usize,
    pub k: usize,
    pub c_sequence: Vec<f64>,
    pub h_gaps: Vec<f64>,
    pub e_values: Vec<f64>,
    pub lhs: f64,
    pub rhs: f64,
}

/// Knobs shared by every check; `None` keeps the per-check default.
#[derive(Debug, Clone, Copy)]
pub struct VerifyOptions {
    pub samples: Option<usize>,
    pub seed: u64,
    pub tol: Option<f64>,
    /// Octahedrality defect bound for the witness check.
    pub epsilon: f64,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            samples: None,
            seed: 0x0c7a_4ed1,
            tol: None,
            epsilon: 0.1,
        }
    }
}

/// The seven checks `verify all` aggregates, in execution order.
pub const CHECK_NAMES: [&str; 7] = [
    "shape",
    "structure",
    "equivalence",
    "octahedral",
    "case1",
    "case2",
    "smoothness",
];

/// Runs one named check (or `all`).
pub fn run_check(space: &TowerSpace, name: &str, opts: &VerifyOptions) -> Result<Vec<VerificationReport>> {
    match name {
        "shape" => Ok(vec![verify_shape(space, opts)?]),
        "structure" => Ok(vec![verify_structure(space, opts)?]),
        "equivalence" => Ok(vec![verify_equivalence(space, opts)?]),
        "octahedral" => Ok(vec![verify_octahedral(space, opts.epsilon, &[], opts)?]),
        "case1" => Ok(vec![verify_case1(space, opts)?]),
        "case2" => Ok(vec![verify_case2(space, opts)?.0]),
        "smoothness" => Ok(vec![verify_smoothness(space, opts)?]),
        "all" => verify_all(space, opts),
        other => Err(Error::UnknownCheck(other.to_string())),
    }
}

/// Runs the full battery; passes iff every report passes.
pub fn verify_all(space: &TowerSpace, opts: &VerifyOptions) -> Result<Vec<VerificationReport>> {
    let mut reports = Vec::with_capacity(CHECK_NAMES.len());
    for name in CHECK_NAMES {
        reports.extend(run_check(space, name, opts)?);
    }
    Ok(reports)
}

// ---------------------------------------------------------------------------
// bookkeeping

struct Accumulator {
    name: &'static str,
    headline_tol: f64,
    samples: usize,
    violations: usize,
    worst_excess: f64,
    worst_witness: Value,
    started: Instant,
}

impl Accumulator {
    fn new(name: &'static str, headline_tol: f64) -> Self {
        Accumulator {
            name,
            headline_tol,
            samples: 0,
            violations: 0,
            worst_excess: f64::NEG_INFINITY,
            worst_witness: Value::Null,
            started: Instant::now(),
        }
    }

    /// Records one inequality evaluation: `defect` is lhs - rhs of the
    /// inequality `lhs <= rhs + sub_tol`, so excess = defect - sub_tol.
    fn record(&mut self, defect: f64, sub_tol: f64, witness: &dyn Fn() -> Value) {
        let excess = defect - sub_tol;
        if excess > self.worst_excess || self.worst_witness.is_null() {
            self.worst_excess = excess;
            self.worst_witness = witness();
        }
        if excess > 0.0 {
            self.violations += 1;
        }
    }

    fn sample_done(&mut self) {
        self.samples += 1;
    }

    fn finish(self) -> VerificationReport {
        VerificationReport {
            check_name: self.name.to_string(),
            samples: self.samples,
            violations: self.violations,
            worst_violation: if self.worst_excess.is_finite() {
                self.worst_excess
            } else {
                0.0
            },
            worst_witness: self.worst_witness,
            tolerance: self.headline_tol,
            passed: self.violations == 0,
            runtime_ms: self.started.elapsed().as_millis() as u64,
        }
    }
}

/// splitmix64 mixing of (base seed, check tag, sample index).
fn sample_seed(base: u64, tag: u64, index: u64) -> u64 {
    let mut z = base
        ^ tag.wrapping_mul(0x9e37_79b9_7f4a_7c15)
        ^ index.wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

fn vector_json(x: &TowerVector) -> Value {
    serde_json::to_value(x).expect("vector serializes")
}

/// Largest per-level ratio |x_k| / norm_k along the trail. Samplers cap it
/// to keep quantitative decay thresholds meaningful: the endcap curvature
/// grows without bound as the ratio approaches 1.
fn max_level_ratio(space: &TowerSpace, x: &TowerVector) -> Result<f64> {
    let trail = level_norm(space, x, x.degree())?.per_level;
    let mut worst = 0.0f64;
    for (k, &lambda) in trail.iter().enumerate().skip(1) {
        if lambda > 0.0 {
            worst = worst.max(x.coord(k).abs() / lambda);
        }
    }
    Ok(worst)
}

// ---------------------------------------------------------------------------
// the seven checks

/// Shape sandwich `max(0, t - m_n) <= f_n(t) <= t` on a dense grid, plus
/// junction continuity/slope agreement and slope monotonicity, for levels
/// 1..=min(10, levels).
pub fn verify_shape(space: &TowerSpace, opts: &VerifyOptions) -> Result<VerificationReport> {
    let tol = opts.tol.unwrap_or(1e-12);
    let grid = 10_000;
    let mut acc = Accumulator::new("shape", tol);
    for level in 1..=space.max_level().min(10) {
        let f = space.schedule.shape_fn(level)?;
        let witness = |label: &str, value: f64| {
            let label = label.to_string();
            move || json!({"level": level, "kind": label, "value": value})
        };
        let sandwich = f.sandwich_violation(grid);
        acc.record(sandwich, tol, &witness("sandwich", sandwich));

        let value_at_l = (f.l - f.z) / 2.0 - (f.l - f.m);
        acc.record(value_at_l.abs(), tol, &witness("junction value at l", value_at_l));
        let cap_at_s = 1.0 - f.c * (1.0 - f.s).powf(f.alpha);
        let value_at_s = (f.s - f.m) - cap_at_s;
        acc.record(value_at_s.abs(), tol, &witness("junction value at s", value_at_s));
        let slope_at_s = f.c * f.alpha * (1.0 - f.s).powf(f.alpha - 1.0) - 1.0;
        acc.record(slope_at_s.abs(), tol, &witness("junction slope at s", slope_at_s));

        let mut prev = -1.0;
        let mut convexity = f64::NEG_INFINITY;
        for i in 0..grid {
            let t = i as f64 / grid as f64;
            let d = f.derivative(t)?;
            convexity = convexity.max(prev - d);
            prev = d;
        }
        acc.record(convexity, tol, &witness("slope monotonicity", convexity));
        acc.sample_done();
    }
    Ok(acc.finish())
}

/// Bundle: projection monotonicity, flat-region invariance (with strict
/// growth past it), dual-route oracle agreement, homogeneity, triangle and
/// midpoint convexity, coordinate sign symmetry.
pub fn verify_structure(space: &TowerSpace, opts: &VerifyOptions) -> Result<VerificationReport> {
    let tol = opts.tol.unwrap_or(1e-10);
    let oracle_tol = 1e-8;
    let count = opts.samples.unwrap_or(1000);
    let max_degree = space.max_level().min(8);
    let mut acc = Accumulator::new("structure", tol);
    for index in 0..count {
        let seed = sample_seed(opts.seed, 2, index as u64);
        let degree = 1 + (index % max_degree);
        let x = random_vector(space, degree, SampleStyle::Generic, seed)?;
        let witness = |label: &str, value: f64| {
            let label = label.to_string();
            let x = vector_json(&x);
            move || json!({"sub_check": label, "defect": value, "x": x, "seed": seed})
        };

        let result = level_norm(space, &x, degree)?;
        for k in 1..result.per_level.len() {
            let drop = result.per_level[k - 1] - result.per_level[k];
            acc.record(drop, tol, &witness("projection monotonicity", drop));
        }

        let value = result.value;
        if value > 0.0 && degree < space.max_level() {
            let z_next = space.schedule.z[degree];
            let mut extended = x.project(degree + 1);
            extended.coords[degree] = 0.99 * z_next * value;
            let with = tower_norm(space, &extended)?;
            let defect = (with - value).abs() / value;
            acc.record(defect, tol, &witness("flat-region invariance", defect));

            extended.coords[degree] = 1.5 * space.schedule.l[degree] * value;
            let beyond = tower_norm(space, &extended)?;
            let growth_defect = (value + 1e-12) - beyond;
            acc.record(growth_defect, tol, &witness("strict growth past flat region", growth_defect));
        }

        let oracle = minkowski_oracle(space, &x, degree, &space.tol)?;
        let rel = (value - oracle).abs() / value.max(1e-30);
        acc.record(rel, oracle_tol, &witness("oracle agreement", rel));

        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xa5a5);
        let a: f64 = rng.gen_range(-4.0..4.0);
        let scaled = tower_norm(space, &x.scale(a))?;
        let hom = (scaled - a.abs() * value).abs() / value.max(1e-30);
        acc.record(hom, tol, &witness("homogeneity", hom));

        let y = random_vector(space, degree, SampleStyle::Generic, seed ^ 0x5a5a)?;
        let ny = tower_norm(space, &y)?;
        let sum = tower_norm(space, &axpy(1.0, &x, 1.0, &y)?)?;
        acc.record(sum - (value + ny), tol, &witness("triangle inequality", sum - (value + ny)));
        let mid = tower_norm(space, &axpy(0.5, &x, 0.5, &y)?)?;
        acc.record(
            mid - 0.5 * (value + ny),
            tol,
            &witness("midpoint convexity", mid - 0.5 * (value + ny)),
        );

        if degree >= 1 {
            let j = 1 + (index % degree);
            let mut flipped = x.clone();
            flipped.coords[j - 1] = -flipped.coords[j - 1];
            let flipped_trail = level_norm(space, &flipped, degree)?.per_level;
            let mut sym = 0.0f64;
            for (a, b) in flipped_trail.iter().zip(result.per_level.iter()) {
                sym = sym.max((a - b).abs());
            }
            acc.record(sym, tol, &witness("coordinate sign symmetry", sym));
        }
        acc.sample_done();
    }
    Ok(acc.finish())
}

/// Equivalence sandwich: reference/product <= tower norm <= reference, with
/// the product taken at the sample's degree.
pub fn verify_equivalence(space: &TowerSpace, opts: &VerifyOptions) -> Result<VerificationReport> {
    let tol = opts.tol.unwrap_or(1e-9);
    let count = opts.samples.unwrap_or(1000);
    let max_degree = space.max_level().min(8);
    let mut acc = Accumulator::new("equivalence", tol);
    for index in 0..count {
        let seed = sample_seed(opts.seed, 3, index as u64);
        let degree = 1 + (index % max_degree);
        let style = if index % 5 == 0 {
            SampleStyle::SummableTail
        } else {
            SampleStyle::Generic
        };
        let x = random_vector(space, degree, style, seed)?;
        let value = tower_norm(space, &x)?;
        let reference = ell1_sum_norm(space, &x);
        let product = equivalence_constants(space, degree)?.product;
        let witness = |label: &str, value: f64| {
            let label = label.to_string();
            let x = vector_json(&x);
            move || json!({"sub_check": label, "defect": value, "x": x, "seed": seed})
        };
        acc.record(
            reference / product - value,
            tol,
            &witness("lower equivalence bound", reference / product - value),
        );
        acc.record(value - reference, tol, &witness("upper equivalence bound", value - reference));
        acc.sample_done();
    }
    Ok(acc.finish())
}

/// Octahedrality witnesses: past the first level n0 where
/// `(z_n + l_n) / (z_n + l_n + 2) <= epsilon`, appending the level's basis
/// vector nearly attains the full sum of norms.
pub fn verify_octahedral(
    space: &TowerSpace,
    epsilon: f64,
    witness_levels: &[usize],
    opts: &VerifyOptions,
) -> Result<VerificationReport> {
    if epsilon.is_nan() || epsilon <= 0.0 || epsilon >= 1.0 {
        return Err(Error::OutOfDomain {
            name: "epsilon",
            value: epsilon,
            domain: "(0, 1)",
        });
    }
    let tol = opts.tol.unwrap_or(1e-9);
    let count = opts.samples.unwrap_or(500);
    let n0 = octahedral_level(space, epsilon).ok_or(Error::ScheduleTooCoarse {
        epsilon,
        max: space.max_level(),
    })?;
    let levels: Vec<usize> = if witness_levels.is_empty() {
        (n0..=space.max_level().min(n0 + 2)).collect()
    } else {
        for &n in witness_levels {
            if n < n0 || n > space.max_level() {
                return Err(Error::DegreeOutOfRange {
                    degree: n,
                    max: space.max_level(),
                });
            }
        }
        witness_levels.to_vec()
    };
    let mut acc = Accumulator::new("octahedral", tol);
    for index in 0..count {
        let seed = sample_seed(opts.seed, 4, index as u64);
        let n = levels[index % levels.len()];
        let y = random_vector(space, n - 1, SampleStyle::Generic, seed)?;
        let norm_y = tower_norm(space, &y)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x0c7);
        let alpha: f64 = rng.gen_range(-2.0..2.0);
        let mut shifted = y.project(n);
        shifted.coords[n - 1] = alpha;
        let combined = tower_norm(space, &shifted)?;
        let defect = (1.0 - epsilon) * (norm_y + alpha.abs()) - combined;
        acc.record(defect, tol, &{
            let y = vector_json(&y);
            move || json!({"n0": n0, "level": n, "alpha": alpha, "y": y, "seed": seed, "defect": defect})
        });
        acc.sample_done();
    }
    Ok(acc.finish())
}

/// First level whose octahedrality ratio drops below epsilon.
pub fn octahedral_level(space: &TowerSpace, epsilon: f64) -> Option<usize> {
    (1..=space.max_level()).find(|&n| {
        let zl = space.schedule.z[n - 1] + space.schedule.l[n - 1];
        zl / (zl + 2.0) <= epsilon
    })
}

/// Tangent-direction suite: on samples certified to have h tangent at the
/// level-n projection (and that projection at least half the full norm),
/// checks nonnegativity of phi, the cross-multiplied ratio inequality for
/// consecutive levels, the telescoped factor-2 bound, and the o(t) decay of
/// the difference quotient.
pub fn verify_case1(space: &TowerSpace, opts: &VerifyOptions) -> Result<VerificationReport> {
    let tol = opts.tol.unwrap_or(1e-8);
    let count = opts.samples.unwrap_or(200);
    let mut acc = Accumulator::new("case1", tol);
    for index in 0..count {
        let seed = sample_seed(opts.seed, 5, index as u64);
        let (x, h, n) = build_case1_sample(space, seed)?;
        let degree = x.degree();
        let xn = x.project(n);
        let norm_n = tower_norm(space, &xn)?;
        let witness = |label: &str, value: f64| {
            let label = label.to_string();
            let x = vector_json(&x);
            let h = vector_json(&h);
            move || {
                json!({"sub_check": label, "defect": value, "level": n, "x": x, "h": h, "seed": seed})
            }
        };

        // trails at every level, reused across the t grid
        let trail = level_norm(space, &x, degree)?.per_level;
        for k in 0..16 {
            let t = 0.5 * 0.5f64.powi(k / 2) * if k % 2 == 0 { 1.0 } else { -1.0 };
            let phi_n = phi(space, &xn, &h, t)?;
            acc.record(-phi_n, tol, &witness("tangent nonnegativity", -phi_n));
            for m in n..degree {
                let lower = axpy(1.0, &x.project(m), t, &h)?;
                let upper = axpy(1.0, &x.project(m + 1), t, &h)?;
                let lower_norm = tower_norm(space, &lower)?;
                let upper_norm = tower_norm(space, &upper)?;
                // norm(x^{m+1}) * norm(x^m + t h) >= norm(x^{m+1} + t h) * norm(x^m)
                let ratio_defect = upper_norm * trail[m] - trail[m + 1] * lower_norm;
                acc.record(ratio_defect, tol, &witness("ratio inequality", ratio_defect));
                let phi_upper = upper_norm - trail[m + 1];
                // orthogonality is preserved up the tower: phi stays >= 0
                acc.record(-phi_upper, tol, &witness("preserved tangency", -phi_upper));
                let scaled = (trail[m + 1] / norm_n) * phi_n;
                acc.record(phi_upper - scaled, tol, &witness("telescoped factor", phi_upper - scaled));
                acc.record(
                    phi_upper - 2.0 * phi_n,
                    tol,
                    &witness("factor-2 bound", phi_upper - 2.0 * phi_n),
                );
            }
        }
        // o(t): the difference quotient has decayed below 1e-5 by t = 2^-20
        let t_small = 0.5f64.powi(20);
        let quotient = (phi(space, &xn, &h, t_small)?) / t_small;
        acc.record(quotient.abs(), 1e-5, &witness("tangent quotient decay", quotient.abs()));
        acc.sample_done();
    }
    Ok(acc.finish())
}

/// Draws a case-1 sample: generic x, a level n, and a unit tangent direction
/// at x^n, retrying until the hypotheses certify.
fn build_case1_sample(space: &TowerSpace, seed: u64) -> Result<(TowerVector, TowerVector, usize)> {
    let max_attempts = 60;
    for attempt in 0..max_attempts {
        let attempt_seed = sample_seed(seed, 17, attempt as u64);
        let mut rng = ChaCha8Rng::seed_from_u64(attempt_seed);
        let degree = rng.gen_range(4..=space.max_level().min(8));
        let n = rng.gen_range(1..degree);
        let x = random_vector(space, degree, SampleStyle::Generic, attempt_seed ^ 0x1111)?;
        let full = tower_norm(space, &x)?;
        let xn = x.project(n);
        let norm_n = tower_norm(space, &xn)?;
        if full < 0.2 || norm_n < 0.5 * full {
            continue;
        }
        // cap the per-level ratios: quantitative decay thresholds assume the
        // sample stays away from the endcap blow-up
        if max_level_ratio(space, &x)? > 0.9 {
            continue;
        }
        let h0 = random_vector(space, n, SampleStyle::Generic, attempt_seed ^ 0x2222)?;
        let decomposition = tangent_decomposition(space, &x, &h0, n)?;
        let tangent_norm = tower_norm(space, &decomposition.h_tangent)?;
        if tangent_norm < 1e-3 {
            continue;
        }
        let h = decomposition.h_tangent.scale(1.0 / tangent_norm);
        return Ok((x, h, n));
    }
    Err(Error::SampleConstruction {
        attempts: max_attempts,
    })
}

/// Deep-level estimate suite on tail-certified samples: coefficient bound,
/// coefficient increments, tangent-gap bound, substitution error bound, the
/// step bracket and the aggregated constant-16 estimate, plus agreement of
/// the derivative estimate with the coefficient limit.
pub fn verify_case2(
    space: &TowerSpace,
    opts: &VerifyOptions,
) -> Result<(VerificationReport, Vec<Case2Trace>)> {
    let final_tol = opts.tol.unwrap_or(1e-7);
    let count = opts.samples.unwrap_or(100);
    if space.max_level() < 25 {
        return Err(Error::DegreeOutOfRange {
            degree: 25,
            max: space.max_level(),
        });
    }
    let c_tol = 1e-6;
    let step_tol = 1e-8;
    let limit_tol = 1e-4;
    let mut acc = Accumulator::new("case2", final_tol);
    let mut traces = Vec::with_capacity(count);
    for index in 0..count {
        let seed = sample_seed(opts.seed, 6, index as u64);
        let sample = build_case2_sample(space, seed)?;
        let Case2Sample { x, h, n, k } = sample;
        let degree = x.degree();
        let witness = |label: &str, value: f64| {
            let label = label.to_string();
            let x = vector_json(&x);
            let h = vector_json(&h);
            move || {
                json!({"sub_check": label, "defect": value, "n": n, "k": k, "x": x, "h": h, "seed": seed})
            }
        };

        let trail = level_norm(space, &x, degree)?.per_level;
        // hypothesis certificates: unit norms, deep projections close to x
        debug_assert!((trail[degree] - 1.0).abs() <= 1e-9);
        for &lambda in &trail[n..=n + k] {
            let hyp = 15.0 / 16.0 - lambda;
            acc.record(hyp, 0.0, &witness("projection norm hypothesis", hyp));
        }

        // coefficient sequence via the projection of h on each level point
        let mut c_seq = Vec::with_capacity(k + 1);
        let mut tangents = Vec::with_capacity(k + 1);
        for (j, &lambda) in trail.iter().enumerate().take(n + k + 1).skip(n) {
            let c = level_coefficient(space, &x, &h, j, lambda)?;
            tangents.push(axpy(1.0, &h, -c, &x.project(j))?);
            c_seq.push(c);
        }
        // the direct route must agree with the full decomposition at level n
        let reference = tangent_decomposition(space, &x, &h, n)?;
        let agreement = (reference.c - c_seq[0]).abs();
        acc.record(agreement, 1e-6, &witness("coefficient route agreement", agreement));

        for (offset, c) in c_seq.iter().enumerate() {
            let defect = c.abs() - 16.0 / 15.0;
            acc.record(defect, c_tol, &witness("coefficient bound", defect));
            if offset > 0 {
                let j = n + offset;
                let inc = (c_seq[offset] - c_seq[offset - 1]).abs() - 2.0 * x.coord(j).abs();
                acc.record(inc, step_tol, &witness("coefficient increment", inc));
            }
        }

        let mut h_gaps = Vec::with_capacity(k);
        for offset in 0..k {
            let gap_vec = axpy(1.0, &tangents[offset + 1], -1.0, &tangents[offset])?;
            let gap = tower_norm(space, &gap_vec)?;
            h_gaps.push(gap);
            let j = n + offset;
            let defect = gap - 4.0 * x.coord(j + 1).abs();
            acc.record(defect, step_tol, &witness("tangent gap bound", defect));
        }

        let tail_sum = x.ell1_tail(n - 1);
        let xn = x.project(n);
        let xnk = x.project(n + k);
        let phi_n_at = |t: f64| phi(space, &xn, &h, t);
        let phi_nk_at = |t: f64| phi(space, &xnk, &h, t);
        let phi_tangent_at = |t: f64| phi(space, &xn, &tangents[0], t);

        let mut worst_margin = f64::NEG_INFINITY;
        let mut trace_e = Vec::new();
        let mut trace_lhs = 0.0;
        let mut trace_rhs = 0.0;
        for grid in 0..16 {
            let magnitude = (15.0 / 32.0) * 0.9 * 0.5f64.powi(grid / 2);
            let t = if grid % 2 == 0 { magnitude } else { -magnitude };

            // substitution error against the tangent-gap bound
            let mut e_values = Vec::with_capacity(k);
            for offset in 0..k {
                let j = n + offset;
                let scaled_point = x.project(j + 1).scale(1.0 + t * c_seq[offset + 1]);
                let with_next = phi(space, &scaled_point, &tangents[offset + 1], t)?;
                let with_prev = phi(space, &scaled_point, &tangents[offset], t)?;
                let e = with_next - with_prev;
                e_values.push(e);
                let defect = e.abs() - t.abs() * h_gaps[offset];
                acc.record(defect, step_tol, &witness("substitution error bound", defect));
            }

            // step bracket
            let last_c = c_seq[k];
            let first_c = c_seq[0];
            for &(label, c) in &[("bracket at n+k", last_c), ("bracket at n", first_c)] {
                let stretch = 1.0 + t * c;
                acc.record(0.5 - stretch, 1e-12, &witness(label, 0.5 - stretch));
                acc.record(stretch - 1.5, 1e-12, &witness(label, stretch - 1.5));
                let mapped = (t / stretch).abs();
                acc.record(2.0 * t.abs() / 3.0 - mapped, 1e-12, &witness(label, 2.0 * t.abs() / 3.0 - mapped));
                acc.record(mapped - 2.0 * t.abs(), 1e-12, &witness(label, mapped - 2.0 * t.abs()));
            }

            // aggregated estimate with constant 16
            let lhs = (phi_nk_at(t)? - phi_n_at(t)?).abs();
            let rhs = 16.0 * t.abs() * tail_sum
                + 2.0 * phi_tangent_at(t / (1.0 + t * last_c))?
                + 2.0 * phi_tangent_at(t / (1.0 + t * first_c))?;
            let defect = lhs - rhs;
            acc.record(defect, final_tol, &witness("aggregated estimate", defect));
            if defect > worst_margin {
                worst_margin = defect;
                trace_e = e_values;
                trace_lhs = lhs;
                trace_rhs = rhs;
            }
        }

        // the derivative at x in direction h matches the coefficient limit
        let estimate = directional_derivative(space, &x, &h, &StepSchedule::default(), 1e-6)?;
        let limit_defect = (estimate.right - c_seq[k]).abs();
        acc.record(limit_defect, limit_tol, &witness("coefficient limit", limit_defect));

        traces.push(Case2Trace {
            n,
            k,
            c_sequence: c_seq,
            h_gaps,
            e_values: trace_e,
            lhs: trace_lhs,
            rhs: trace_rhs,
        });
        acc.sample_done();
    }
    Ok((acc.finish(), traces))
}

struct Case2Sample {
    x: TowerVector,
    h: TowerVector,
    n: usize,
    k: usize,
}

/// Draws a case-2 sample: a deep summable-tail point normalized to the unit
/// sphere, the first level N past which the tail drops below 1/16, and a
/// unit direction inside the level-N span.
fn build_case2_sample(space: &TowerSpace, seed: u64) -> Result<Case2Sample> {
    let max_attempts = 60;
    for attempt in 0..max_attempts {
        let attempt_seed = sample_seed(seed, 19, attempt as u64);
        let mut rng = ChaCha8Rng::seed_from_u64(attempt_seed);
        let degree = rng.gen_range(25..=space.max_level().min(40));
        let raw = random_vector(space, degree, SampleStyle::SummableTail, attempt_seed ^ 0x3333)?;
        if space.base_norm(&raw) < 0.4 {
            // keeps every per-level ratio comfortably below the endcap
            continue;
        }
        let norm = tower_norm(space, &raw)?;
        let x = raw.scale(1.0 / norm);
        let cut = (1..degree).find(|&n| x.ell1_tail(n) < 1.0 / 16.0);
        let Some(cut) = cut else { continue };
        if cut + 7 > degree {
            continue;
        }
        let n = cut + 1;
        let k = (degree - n).min(8);
        let h_raw = random_vector(space, cut.max(1), SampleStyle::Generic, attempt_seed ^ 0x4444)?;
        let h_norm = tower_norm(space, &h_raw)?;
        if h_norm < 1e-3 {
            continue;
        }
        let h = h_raw.scale(1.0 / h_norm);
        return Ok(Case2Sample { x, h, n, k });
    }
    Err(Error::SampleConstruction {
        attempts: max_attempts,
    })
}

/// Projection coefficient of h onto x^j: the directional derivative of the
/// level-j norm at x^j along h, divided by the norm. One central quotient
/// with a Richardson step; the route is certified per sample against
/// `tangent_decomposition`.
fn level_coefficient(
    space: &TowerSpace,
    x: &TowerVector,
    h: &TowerVector,
    j: usize,
    norm_j: f64,
) -> Result<f64> {
    let xj = x.project(j);
    let step = 1e-5 * norm_j;
    let value = |s: f64| -> Result<f64> { Ok(level_norm(space, &axpy(1.0, &xj, s, h)?, j)?.value) };
    let d1 = (value(step)? - value(-step)?) / (2.0 * step);
    let d2 = (value(0.5 * step)? - value(-0.5 * step)?) / step;
    Ok(((4.0 * d2 - d1) / 3.0) / norm_j)
}

/// Smoothness trend: symmetric quotients decay monotonically (within
/// jitter) below 1e-4 by step 2^-20 at generic points and deep-truncation
/// tail points, one-sided derivative estimates agree, and at tail points
/// the derivative matches the deep coefficient.
pub fn verify_smoothness(space: &TowerSpace, opts: &VerifyOptions) -> Result<VerificationReport> {
    let decay_tol = opts.tol.unwrap_or(1e-4);
    let jitter = 1e-9;
    let gateaux_tol = 1e-6;
    let limit_tol = 1e-4;
    let y_count = opts.samples.unwrap_or(100);
    let tail_count = (y_count / 5).clamp(1, 20);
    let mut acc = Accumulator::new("smoothness", decay_tol);

    for index in 0..y_count + tail_count {
        let tail_point = index >= y_count;
        let seed = sample_seed(opts.seed, 7, index as u64);
        let (x, h) = build_smoothness_sample(space, seed, tail_point)?;
        let witness = |label: &str, value: f64| {
            let label = label.to_string();
            let x = vector_json(&x);
            let h = vector_json(&h);
            move || json!({"sub_check": label, "defect": value, "tail_point": tail_point, "x": x, "h": h, "seed": seed})
        };

        let mut prev = f64::INFINITY;
        let mut last = f64::INFINITY;
        for kk in 0..=20 {
            let t = 0.5f64.powi(kk);
            let q = symmetric_quotient(space, &x, &h, t)?;
            acc.record(-q, 1e-12, &witness("quotient nonnegativity", -q));
            acc.record(q - prev, jitter, &witness("quotient monotone decay", q - prev));
            prev = q;
            last = q;
        }
        acc.record(last, decay_tol, &witness("quotient decayed by 2^-20", last));

        let estimate = directional_derivative(space, &x, &h, &StepSchedule::default(), gateaux_tol)?;
        let gap = (estimate.right - estimate.left).abs();
        acc.record(gap, gateaux_tol, &witness("one-sided agreement", gap));

        if tail_point {
            let deep = x.degree();
            let norm_deep = tower_norm(space, &x)?;
            let c_deep = level_coefficient(space, &x, &h, deep, norm_deep)?;
            let defect = (estimate.right - c_deep).abs();
            acc.record(defect, limit_tol, &witness("coefficient limit at tail point", defect));
        }
        acc.sample_done();
    }
    Ok(acc.finish())
}

fn build_smoothness_sample(
    space: &TowerSpace,
    seed: u64,
    tail_point: bool,
) -> Result<(TowerVector, TowerVector)> {
    let max_attempts = 60;
    for attempt in 0..max_attempts {
        let attempt_seed = sample_seed(seed, 23, attempt as u64);
        let mut rng = ChaCha8Rng::seed_from_u64(attempt_seed);
        let x = if tail_point {
            let degree = space.max_level().min(30);
            let raw =
                random_vector(space, degree, SampleStyle::SummableTail, attempt_seed ^ 0x6666)?;
            if space.base_norm(&raw) < 0.4 {
                continue;
            }
            let norm = tower_norm(space, &raw)?;
            raw.scale(1.0 / norm)
        } else {
            let degree = rng.gen_range(2..=space.max_level().min(8));
            random_vector(space, degree, SampleStyle::UnitSphere, attempt_seed ^ 0x7777)?
        };
        if max_level_ratio(space, &x)? > 0.9 {
            continue;
        }
        let direction_span = if tail_point {
            5
        } else {
            rng.gen_range(1..=x.degree())
        };
        let h_raw = random_vector(space, direction_span, SampleStyle::Generic, attempt_seed ^ 0x8888)?;
        let h_norm = tower_norm(space, &h_raw)?;
        if h_norm < 1e-3 {
            continue;
        }
        return Ok((x, h_raw.scale(1.0 / h_norm)));
    }
    Err(Error::SampleConstruction {
        attempts: max_attempts,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn space() -> TowerSpace {
        TowerSpace::with_defaults(3, 48, 9).unwrap()
    }

    #[test]
    fn octahedral_level_for_the_defaults() {
        let sp = space();
        assert_eq!(octahedral_level(&sp, 0.1), Some(3));
        assert_eq!(octahedral_level(&sp, 0.5), Some(1));
        // ratio at level 2 is 0.3125/2.3125 > 0.1, at level 3 it passes
        let zl2 = sp.schedule.z[1] + sp.schedule.l[1];
        assert!(zl2 / (zl2 + 2.0) > 0.1);
        let zl3 = sp.schedule.z[2] + sp.schedule.l[2];
        assert!(zl3 / (zl3 + 2.0) <= 0.1);
    }

    #[test]
    fn shape_check_passes_with_comfortable_margin() {
        let report = verify_shape(&space(), &VerifyOptions::default()).unwrap();
        assert!(report.passed, "{report:?}");
        assert!(report.worst_violation <= 0.0);
        assert_eq!(report.samples, 10);
    }

    #[test]
    fn structure_check_passes() {
        let opts = VerifyOptions {
            samples: Some(120),
            ..VerifyOptions::default()
        };
        let report = verify_structure(&space(), &opts).unwrap();
        assert!(report.passed, "{report:?}");
        assert!(!report.worst_witness.is_null());
    }

    #[test]
    fn equivalence_check_passes() {
        let opts = VerifyOptions {
            samples: Some(150),
            ..VerifyOptions::default()
        };
        let report = verify_equivalence(&space(), &opts).unwrap();
        assert!(report.passed, "{report:?}");
    }

    #[test]
    fn octahedral_check_passes_and_reports_n0() {
        let opts = VerifyOptions {
            samples: Some(120),
            ..VerifyOptions::default()
        };
        let report = verify_octahedral(&space(), 0.1, &[], &opts).unwrap();
        assert!(report.passed, "{report:?}");
        assert_eq!(report.worst_witness["n0"], json!(3));
        // epsilon out of range is rejected
        assert!(verify_octahedral(&space(), 1.5, &[], &opts).is_err());
    }

    #[test]
    fn case1_check_passes_on_certified_samples() {
        let opts = VerifyOptions {
            samples: Some(40),
            ..VerifyOptions::default()
        };
        let report = verify_case1(&space(), &opts).unwrap();
        assert!(report.passed, "{report:?}");
        assert_eq!(report.samples, 40);
    }

    #[test]
    fn case2_check_passes_and_traces_align() {
        let opts = VerifyOptions {
            samples: Some(15),
            ..VerifyOptions::default()
        };
        let (report, traces) = verify_case2(&space(), &opts).unwrap();
        assert!(report.passed, "{report:?}");
        assert_eq!(traces.len(), 15);
        for trace in &traces {
            assert_eq!(trace.c_sequence.len(), trace.k + 1);
            assert_eq!(trace.h_gaps.len(), trace.k);
            assert!(trace.lhs <= trace.rhs + 1e-7);
        }
    }

    #[test]
    fn smoothness_check_passes() {
        let opts = VerifyOptions {
            samples: Some(25),
            ..VerifyOptions::default()
        };
        let report = verify_smoothness(&space(), &opts).unwrap();
        assert!(report.passed, "{report:?}");
    }

    #[test]
    fn reports_are_deterministic_in_the_seed() {
        let opts = VerifyOptions {
            samples: Some(25),
            ..VerifyOptions::default()
        };
        let a = verify_structure(&space(), &opts).unwrap();
        let b = verify_structure(&space(), &opts).unwrap();
        assert_eq!(a.worst_violation, b.worst_violation);
        assert_eq!(a.worst_witness, b.worst_witness);
        let other = VerifyOptions {
            samples: Some(25),
            seed: 12345,
            ..VerifyOptions::default()
        };
        let c = verify_structure(&space(), &other).unwrap();
        assert_ne!(a.worst_witness, c.worst_witness);
    }

    #[test]
    fn run_check_dispatches_and_rejects_unknown_names() {
        let sp = space();
        let opts = VerifyOptions {
            samples: Some(10),
            ..VerifyOptions::default()
        };
        let reports = run_check(&sp, "shape", &opts).unwrap();
        assert_eq!(reports.len(), 1);
        assert_eq!(reports[0].check_name, "shape");
        assert!(matches!(
            run_check(&sp, "nonsense", &opts),
            Err(Error::UnknownCheck(_))
        ));
    }

    #[test]
    fn verify_all_aggregates_the_seven_checks() {
        let sp = space();
        let opts = VerifyOptions {
            samples: Some(8),
            ..VerifyOptions::default()
        };
        let reports = verify_all(&sp, &opts).unwrap();
        assert_eq!(reports.len(), 7);
        let names: Vec<&str> = reports.iter().map(|r| r.check_name.as_str()).collect();
        assert_eq!(names, CHECK_NAMES.to_vec());
        assert!(reports.iter().all(|r| r.passed), "{reports:#?}");
    }
}
