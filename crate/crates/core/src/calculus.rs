//! Directional differential machinery for the tower norm: difference
//! functions, derivative estimation, norming functionals, tangent
//! decompositions and Birkhoff-James orthogonality certificates.
//!
//! Everything here works through finite differences of the norm engine.
//! Convexity of the norm makes one-sided difference quotients monotone in
//! the step, which keeps Richardson extrapolation stable; correctness of
//! the numerically computed norming functional is certified after the fact
//! by the norming identity and the duality bound rather than by how it was
//! computed.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::norm::{level_norm, tower_norm};
use crate::space::{axpy, TowerSpace, TowerVector};

/// Step plan for derivative estimation: quotients at t0 * 2^-k for
/// k = 0..=halvings, on both sides of zero.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StepSchedule {
    pub t0: f64,
    pub halvings: usize,
}

impl Default for StepSchedule {
    fn default() -> Self {
        StepSchedule {
            t0: 0.0625,
            halvings: 30,
        }
    }
}

/// One rung of the quotient trail: both one-sided quotients at step size t.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuotientStep {
    /// Step magnitude, strictly decreasing along the trail.
    pub t: f64,
    /// (norm(x + t h) - norm(x)) / t.
    pub right: f64,
    /// (norm(x - t h) - norm(x)) / (-t).
    pub left: f64,
}

/// One-sided directional derivative estimates with the full quotient trail.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DerivativeEstimate {
    /// Limit of phi(t)/t as t decreases to 0.
    pub right: f64,
    /// Limit as t increases to 0.
    pub left: f64,
    pub steps: Vec<QuotientStep>,
    /// Whether the two one-sided limits agree within `tol_used`.
    pub gateaux: bool,
    pub tol_used: f64,
}

/// The decomposition h = h_tangent + c * x^m against the norming functional
/// at x^m.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TangentDecomposition {
    /// Level of the projection the decomposition was taken at.
    pub m: usize,
    /// Norming functional coordinates: base block first, then one entry per
    /// coordinate direction e_1..e_m.
    pub g: Vec<f64>,
    /// Component of h along x^m.
    pub c: f64,
    /// Tangent part of h: pairing with g vanishes.
    pub h_tangent: TowerVector,
}

/// phi(t) = norm(x + t h) - norm(x).
pub fn phi(space: &TowerSpace, x: &TowerVector, h: &TowerVector, t: f64) -> Result<f64> {
    let shifted = axpy(1.0, x, t, h)?;
    Ok(tower_norm(space, &shifted)? - tower_norm(space, x)?)
}

/// Estimates both one-sided directional derivatives of the norm at `x` in
/// direction `h` from the quotient trail, with Richardson extrapolation on
/// the best-conditioned window of the trail.
pub fn directional_derivative(
    space: &TowerSpace,
    x: &TowerVector,
    h: &TowerVector,
    steps: &StepSchedule,
    tol: f64,
) -> Result<DerivativeEstimate> {
    if x.is_zero() {
        return Err(Error::ZeroVector);
    }
    let norm_x = tower_norm(space, x)?;
    let norm_h = tower_norm(space, h)?;
    let mut trail = Vec::with_capacity(steps.halvings + 1);
    let mut rights = Vec::with_capacity(steps.halvings + 1);
    let mut lefts = Vec::with_capacity(steps.halvings + 1);
    for k in 0..=steps.halvings {
        let t = steps.t0 * 0.5f64.powi(k as i32);
        let plus = tower_norm(space, &axpy(1.0, x, t, h)?)?;
        let minus = tower_norm(space, &axpy(1.0, x, -t, h)?)?;
        let right = (plus - norm_x) / t;
        let left = (norm_x - minus) / t;
        trail.push(QuotientStep { t, right, left });
        rights.push(right);
        lefts.push(left);
    }
    // rounding noise in a quotient at step t is ~ eps * scale / t
    let noise_scale = f64::EPSILON * 32.0 * (norm_x + steps.t0 * norm_h).max(1e-300);
    let right = extrapolate(&rights, steps.t0, noise_scale);
    let left = extrapolate(&lefts, steps.t0, noise_scale);
    Ok(DerivativeEstimate {
        right,
        left,
        steps: trail,
        gateaux: (right - left).abs() <= tol,
        tol_used: tol,
    })
}

/// Two-stage Richardson extrapolation for step-halved first-order quotients,
/// evaluated on every consecutive triple.
///
/// Window selection: successive extrapolants can form a false plateau before
/// the trail crosses a junction of some level's shape function, so a small
/// delta alone is not evidence of convergence. A window counts as converged
/// only once its delta drops below its own rounding-noise floor (with a
/// one-step confirmation); the first such window has the least noise. If no
/// window converges, the one with the best delta-plus-noise score wins.
fn extrapolate(q: &[f64], t0: f64, noise_scale: f64) -> f64 {
    match q.len() {
        0 => f64::NAN,
        1 => q[0],
        2 => 2.0 * q[1] - q[0],
        _ => {
            let rich = |k: usize| {
                let r1 = 2.0 * q[k - 1] - q[k - 2];
                let r2 = 2.0 * q[k] - q[k - 1];
                (4.0 * r2 - r1) / 3.0
            };
            let extrapolants: Vec<f64> = (2..q.len()).map(rich).collect();
            let floor_at = |i: usize| noise_scale / (t0 * 0.5f64.powi((i + 2) as i32));
            let mut fallback = extrapolants[0];
            let mut fallback_score = f64::INFINITY;
            for i in 1..extrapolants.len() {
                let delta = (extrapolants[i] - extrapolants[i - 1]).abs();
                let floor = floor_at(i);
                if delta <= 4.0 * floor {
                    let confirmed = match extrapolants.get(i + 1) {
                        Some(next) => (next - extrapolants[i]).abs() <= 8.0 * floor_at(i + 1),
                        None => true,
                    };
                    if confirmed {
                        return extrapolants[i];
                    }
                }
                let score = delta + floor;
                if score < fallback_score {
                    fallback_score = score;
                    fallback = extrapolants[i];
                }
            }
            fallback
        }
    }
}

/// Max absolute violation among the three scaling identities of phi:
/// direction scaling, joint scaling and point scaling (tau > 0).
pub fn phi_identities_check(
    space: &TowerSpace,
    x: &TowerVector,
    h: &TowerVector,
    tau: f64,
    t: f64,
) -> Result<f64> {
    if tau.is_nan() || tau <= 0.0 {
        return Err(Error::OutOfDomain {
            name: "tau",
            value: tau,
            domain: "(0, inf)",
        });
    }
    let scaled_h = h.scale(tau);
    let scaled_x = x.scale(tau);
    let shrunk_h = h.scale(1.0 / tau);
    // phi_{x, tau h}(t) = phi_{x, h}(tau t)
    let first = (phi(space, x, &scaled_h, t)? - phi(space, x, h, tau * t)?).abs();
    // phi_{tau x, tau h}(t) = tau phi_{x, h}(t)
    let second = (phi(space, &scaled_x, &scaled_h, t)? - tau * phi(space, x, h, t)?).abs();
    // phi_{tau x, h}(t) = tau phi_{x, h/tau}(t) = tau phi_{x, h}(t/tau)
    let lhs = phi(space, &scaled_x, h, t)?;
    let third = (lhs - tau * phi(space, x, &shrunk_h, t)?)
        .abs()
        .max((lhs - tau * phi(space, x, h, t / tau)?).abs());
    Ok(first.max(second).max(third))
}

/// Coordinates of the norming functional at the level-m projection of `x`:
/// the unique functional with pairing `<g, x^m> = norm(x^m)` and dual norm 1.
/// Each coordinate is a central difference quotient of the level-m norm plus
/// one Richardson step.
///
/// Layout: `dim` base entries followed by one entry per e_1..e_m.
pub fn norming_functional(space: &TowerSpace, x: &TowerVector, m: usize) -> Result<Vec<f64>> {
    if m == 0 {
        return Err(Error::OutOfDomain {
            name: "m",
            value: 0.0,
            domain: "levels >= 1",
        });
    }
    if m > space.max_level() {
        return Err(Error::DegreeOutOfRange {
            degree: m,
            max: space.max_level(),
        });
    }
    let xm = x.project(m);
    let norm_m = level_norm(space, &xm, m)?.value;
    if norm_m == 0.0 {
        return Err(Error::ZeroVector);
    }
    let dim = space.base.dim;
    let h0 = 1e-5 * norm_m;
    let mut g = Vec::with_capacity(dim + m);
    for index in 0..dim + m {
        let direction = if index < dim {
            TowerVector::basis_base(dim, index + 1)
        } else {
            TowerVector::basis_coord(dim, index - dim + 1)
        };
        let value_at = |s: f64| -> Result<f64> {
            Ok(level_norm(space, &axpy(1.0, &xm, s, &direction)?, m)?.value)
        };
        let p1 = value_at(h0)?;
        let m1 = value_at(-h0)?;
        let p2 = value_at(0.5 * h0)?;
        let m2 = value_at(-0.5 * h0)?;
        let d1 = (p1 - m1) / (2.0 * h0);
        let d2 = (p2 - m2) / h0;
        g.push((4.0 * d2 - d1) / 3.0);
        // a genuine kink would show up as an O(1) gap between the one-sided
        // quotients; curvature alone contributes only O(h0)
        let gap = (p2 - norm_m) / (0.5 * h0) - (norm_m - m2) / (0.5 * h0);
        if gap > 1e-2 * norm_m.max(1.0) {
            return Err(Error::NotSmooth { index, gap });
        }
    }
    Ok(g)
}

/// Pairing of a functional in the layout of [`norming_functional`] with a
/// vector. Entries of `y` beyond the functional's support contribute
/// nothing; callers that require `y` inside the level span check that
/// themselves.
pub fn pair(g: &[f64], dim: usize, y: &TowerVector) -> f64 {
    let base: f64 = g[..dim]
        .iter()
        .zip(y.base.iter())
        .map(|(gi, yi)| gi * yi)
        .sum();
    let coords: f64 = g[dim..]
        .iter()
        .enumerate()
        .map(|(j, gj)| gj * y.coord(j + 1))
        .sum();
    base + coords
}

/// Splits `h` (in the level-m span) as `h_tangent + c * x^m`, where the
/// tangent part pairs to zero against the norming functional at x^m.
pub fn tangent_decomposition(
    space: &TowerSpace,
    x: &TowerVector,
    h: &TowerVector,
    m: usize,
) -> Result<TangentDecomposition> {
    if h.ell1_tail(m) != 0.0 {
        return Err(Error::DegreeOutOfRange {
            degree: h.trimmed().degree(),
            max: m,
        });
    }
    let g = norming_functional(space, x, m)?;
    let xm = x.project(m);
    let norm_m = level_norm(space, &xm, m)?.value;
    let c = pair(&g, space.base.dim, h) / norm_m;
    let h_tangent = axpy(1.0, h, -c, &xm)?;
    Ok(TangentDecomposition { m, g, c, h_tangent })
}

/// Certifies Birkhoff-James orthogonality of x to h: phi stays nonnegative
/// on a symmetric log grid and the derivative estimate at 0 vanishes within
/// `tol`. Convexity upgrades the two facts to the global inequality.
pub fn is_bj_orthogonal(
    space: &TowerSpace,
    x: &TowerVector,
    h: &TowerVector,
    tol: f64,
) -> Result<bool> {
    if x.is_zero() || h.is_zero() {
        return Err(Error::ZeroVector);
    }
    for k in 0..17 {
        let t = 0.5f64.powi(k);
        if phi(space, x, h, t)? < -tol || phi(space, x, h, -t)? < -tol {
            return Ok(false);
        }
    }
    let estimate = directional_derivative(space, x, h, &StepSchedule::default(), tol)?;
    Ok(estimate.right.abs() <= tol && estimate.left.abs() <= tol)
}

/// (norm(x + t h) + norm(x - t h) - 2 norm(x)) / t for t > 0. Nonnegative by
/// convexity; decays to zero in t exactly when the two one-sided derivatives
/// agree.
pub fn symmetric_quotient(
    space: &TowerSpace,
    x: &TowerVector,
    h: &TowerVector,
    t: f64,
) -> Result<f64> {
    if x.is_zero() {
        return Err(Error::ZeroVector);
    }
    if t.is_nan() || t <= 0.0 {
        return Err(Error::OutOfDomain {
            name: "t",
            value: t,
            domain: "(0, inf)",
        });
    }
    let plus = tower_norm(space, &axpy(1.0, x, t, h)?)?;
    let minus = tower_norm(space, &axpy(1.0, x, -t, h)?)?;
    Ok((plus + minus - 2.0 * tower_norm(space, x)?) / t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::{random_vector, SampleStyle};

    fn space(levels: usize) -> TowerSpace {
        TowerSpace::with_defaults(3, levels, 123).unwrap()
    }

    #[test]
    fn phi_of_the_point_itself_is_linear() {
        let sp = space(6);
        let x = random_vector(&sp, 5, SampleStyle::Generic, 1).unwrap();
        let norm = tower_norm(&sp, &x).unwrap();
        for &t in &[-0.5, -0.1, 0.0, 0.3, 2.0] {
            let value = phi(&sp, &x, &x, t).unwrap();
            assert!((value - t * norm).abs() <= 1e-12 * norm.max(1.0), "t = {t}");
        }
    }

    #[test]
    fn derivative_along_the_point_is_one() {
        let sp = space(6);
        let x = random_vector(&sp, 5, SampleStyle::UnitSphere, 2).unwrap();
        let est =
            directional_derivative(&sp, &x, &x, &StepSchedule::default(), 1e-6).unwrap();
        assert!((est.right - 1.0).abs() <= 1e-9, "right {}", est.right);
        assert!((est.left - 1.0).abs() <= 1e-9, "left {}", est.left);
        assert!(est.gateaux);
        // trail is strictly decreasing in step size
        for w in est.steps.windows(2) {
            assert!(w[1].t < w[0].t);
        }
    }

    #[test]
    fn coordinate_direction_at_a_peak_is_tangent() {
        // at e_2 the tangent hyperplane is the kernel of the 2nd coordinate
        // functional, so the derivative along e_1 vanishes from both sides
        let sp = space(4);
        let x = TowerVector::basis_coord(3, 2);
        let h = TowerVector::basis_coord(3, 1);
        let est = directional_derivative(&sp, &x, &h, &StepSchedule::default(), 1e-6).unwrap();
        // phi behaves like t^(1/alpha) here (not twice differentiable), so the
        // extrapolation promises only the certificate tolerance 1e-6
        assert!(est.right.abs() <= 1e-6, "right {}", est.right);
        assert!(est.left.abs() <= 1e-6, "left {}", est.left);
        assert!(est.gateaux);
        // phi itself stays nonnegative: e_2 is orthogonal to e_1
        assert!(phi(&sp, &x, &h, 0.25).unwrap() >= 0.0);
        assert!(phi(&sp, &x, &h, -0.25).unwrap() >= 0.0);
    }

    #[test]
    fn flat_region_directions_have_exactly_zero_quotients() {
        let sp = space(4);
        let x = TowerVector::new(vec![1.0, 0.0, 0.0], vec![]);
        let h = TowerVector::basis_coord(3, 1);
        // |t| < z_1 * norm keeps the appended coordinate invisible
        let est = directional_derivative(&sp, &x, &h, &StepSchedule::default(), 1e-6).unwrap();
        assert_eq!(est.right, 0.0);
        assert_eq!(est.left, 0.0);
    }

    #[test]
    fn derivative_rejects_the_origin() {
        let sp = space(4);
        let zero = TowerVector::zero(3);
        let h = TowerVector::basis_coord(3, 1);
        assert!(matches!(
            directional_derivative(&sp, &zero, &h, &StepSchedule::default(), 1e-6),
            Err(Error::ZeroVector)
        ));
    }

    #[test]
    fn scaling_identities_hold() {
        let sp = space(6);
        for seed in 0..20 {
            let x = random_vector(&sp, 5, SampleStyle::Generic, 100 + seed).unwrap();
            let h = random_vector(&sp, 5, SampleStyle::Generic, 200 + seed).unwrap();
            let violation = phi_identities_check(&sp, &x, &h, 2.5, 0.3).unwrap();
            let scale = tower_norm(&sp, &x).unwrap().max(1.0);
            assert!(violation <= 1e-10 * scale, "seed {seed}: {violation}");
        }
        // tau = 1 compares identical evaluations
        let x = random_vector(&sp, 4, SampleStyle::Generic, 7).unwrap();
        let h = random_vector(&sp, 4, SampleStyle::Generic, 8).unwrap();
        assert_eq!(phi_identities_check(&sp, &x, &h, 1.0, 0.2).unwrap(), 0.0);
        assert!(phi_identities_check(&sp, &x, &h, 0.0, 0.2).is_err());
    }

    #[test]
    fn norming_functional_at_a_coordinate_peak() {
        let sp = space(4);
        let x = TowerVector::basis_coord(3, 2);
        let g = norming_functional(&sp, &x, 2).unwrap();
        assert_eq!(g.len(), 3 + 2);
        for (i, gi) in g.iter().enumerate() {
            if i == 3 + 1 {
                assert!((gi - 1.0).abs() <= 1e-9, "g[{i}] = {gi}");
            } else {
                assert!(gi.abs() <= 1e-9, "g[{i}] = {gi}");
            }
        }
    }

    #[test]
    fn norming_functional_at_a_base_point() {
        let sp = space(4);
        let x = TowerVector::new(vec![0.6, -0.8, 0.0], vec![]);
        let g = norming_functional(&sp, &x, 2).unwrap();
        // base block: Euclidean gradient x0 / |x0|
        assert!((g[0] - 0.6).abs() <= 1e-9);
        assert!((g[1] + 0.8).abs() <= 1e-9);
        assert!(g[2].abs() <= 1e-9);
        // coordinate blocks sit in the flat region: exactly zero
        assert_eq!(g[3], 0.0);
        assert_eq!(g[4], 0.0);
    }

    #[test]
    fn norming_identity_and_duality_bound() {
        let sp = space(6);
        for seed in 0..25 {
            let x = random_vector(&sp, 6, SampleStyle::Generic, 300 + seed).unwrap();
            let m = 6;
            let norm_m = level_norm(&sp, &x.project(m), m).unwrap().value;
            if norm_m < 0.1 {
                continue;
            }
            let g = norming_functional(&sp, &x, m).unwrap();
            let pairing = pair(&g, 3, &x.project(m));
            assert!(
                (pairing - norm_m).abs() <= 1e-8 * norm_m.max(1.0),
                "seed {seed}: {pairing} vs {norm_m}"
            );
            for inner in 0..4 {
                let y = random_vector(&sp, m, SampleStyle::Generic, 7000 + 10 * seed + inner)
                    .unwrap();
                let norm_y = level_norm(&sp, &y, m).unwrap().value;
                assert!(
                    pair(&g, 3, &y).abs() <= norm_y + 1e-6,
                    "seed {seed}/{inner}"
                );
            }
        }
    }

    #[test]
    fn functional_matches_independent_one_sided_quotients() {
        let sp = space(5);
        let x = random_vector(&sp, 5, SampleStyle::UnitSphere, 31).unwrap();
        let m = 5;
        let g = norming_functional(&sp, &x, m).unwrap();
        let xm = x.project(m);
        let step = 1e-7;
        for (index, expected) in g.iter().enumerate() {
            let direction = if index < 3 {
                TowerVector::basis_base(3, index + 1)
            } else {
                TowerVector::basis_coord(3, index - 3 + 1)
            };
            let shifted = axpy(1.0, &xm, step, &direction).unwrap();
            let quotient = (level_norm(&sp, &shifted, m).unwrap().value
                - level_norm(&sp, &xm, m).unwrap().value)
                / step;
            assert!(
                (quotient - expected).abs() <= 1e-5,
                "coordinate {index}: {quotient} vs {expected}"
            );
        }
    }

    #[test]
    fn tangent_decomposition_closures() {
        let sp = space(5);
        let x = random_vector(&sp, 5, SampleStyle::UnitSphere, 41).unwrap();
        let xm = x.project(5);
        // h = x^m decomposes with c = 1 and no tangent part
        let d = tangent_decomposition(&sp, &x, &xm, 5).unwrap();
        assert!((d.c - 1.0).abs() <= 1e-7);
        assert!(tower_norm(&sp, &d.h_tangent).unwrap() <= 1e-6);
        // an already-tangent h decomposes with c = 0
        let h = random_vector(&sp, 5, SampleStyle::Generic, 42).unwrap();
        let first = tangent_decomposition(&sp, &x, &h, 5).unwrap();
        let second = tangent_decomposition(&sp, &x, &first.h_tangent, 5).unwrap();
        assert!(second.c.abs() <= 1e-7, "{}", second.c);
        // the decomposition reassembles h exactly
        let rebuilt = axpy(1.0, &first.h_tangent, first.c, &xm).unwrap();
        for j in 1..=5 {
            assert!((rebuilt.coord(j) - h.coord(j)).abs() <= 1e-12);
        }
        // pairing with the tangent part vanishes
        assert!(pair(&first.g, 3, &first.h_tangent).abs() <= 1e-8);
        // directions outside the level span are rejected
        let deep = TowerVector::basis_coord(3, 6);
        assert!(tangent_decomposition(&sp, &x, &deep, 5).is_err());
    }

    #[test]
    fn bj_orthogonality_examples() {
        let sp = space(4);
        let x = random_vector(&sp, 3, SampleStyle::UnitSphere, 51).unwrap();
        // never orthogonal to itself
        assert!(!is_bj_orthogonal(&sp, &x, &x, 1e-8).unwrap());
        // coordinate peak vs lower coordinate
        let e2 = TowerVector::basis_coord(3, 2);
        let e1 = TowerVector::basis_coord(3, 1);
        assert!(is_bj_orthogonal(&sp, &e2, &e1, 1e-6).unwrap());
        // tangent parts from the decomposition are orthogonal directions
        let h = random_vector(&sp, 3, SampleStyle::Generic, 52).unwrap();
        let d = tangent_decomposition(&sp, &x, &h, 3).unwrap();
        assert!(is_bj_orthogonal(&sp, &x, &d.h_tangent, 1e-6).unwrap());
        assert!(matches!(
            is_bj_orthogonal(&sp, &TowerVector::zero(3), &e1, 1e-8),
            Err(Error::ZeroVector)
        ));
    }

    #[test]
    fn symmetric_quotient_properties() {
        let sp = space(5);
        let x = random_vector(&sp, 5, SampleStyle::UnitSphere, 61).unwrap();
        let h = random_vector(&sp, 5, SampleStyle::Generic, 62).unwrap();
        let mut prev = f64::INFINITY;
        for k in 0..=20 {
            let t = 0.5f64.powi(k);
            let q = symmetric_quotient(&sp, &x, &h, t).unwrap();
            assert!(q >= -1e-12, "k = {k}");
            assert!(q <= prev + 1e-9, "k = {k}: {q} > {prev}");
            prev = q;
        }
        assert!(prev <= 1e-4, "final quotient {prev}");
        // along the point itself both sides are linear
        let along = symmetric_quotient(&sp, &x, &x, 0.5).unwrap();
        assert!(along.abs() <= 1e-12);
        assert!(symmetric_quotient(&sp, &x, &h, 0.0).is_err());
    }

    #[test]
    fn homothety_relates_consecutive_levels_exactly() {
        // the level map g(lambda) = lambda (1 - f(u / lambda)) carries the
        // level n+1 norm of x + t h (h in the lower span) to the level n norm
        let sp = space(6);
        for seed in 0..20 {
            let x = random_vector(&sp, 6, SampleStyle::Generic, 400 + seed).unwrap();
            let h = random_vector(&sp, 4, SampleStyle::Generic, 500 + seed).unwrap();
            for n in 4..6 {
                let f = sp.schedule.shape_fn(n + 1).unwrap();
                let u = x.coord(n + 1).abs();
                for &t in &[-0.3, 0.01, 0.2] {
                    let shifted = axpy(1.0, &x, t, &h).unwrap();
                    let upper = level_norm(&sp, &shifted, n + 1).unwrap().value;
                    let lower = level_norm(&sp, &shifted, n).unwrap().value;
                    let mapped = if upper == 0.0 {
                        0.0
                    } else {
                        upper * f.complement_ratio(u.min(upper), upper)
                    };
                    assert!(
                        (mapped - lower).abs() <= 1e-9 * lower.max(1.0),
                        "seed {seed}, n {n}, t {t}: {mapped} vs {lower}"
                    );
                }
            }
        }
    }

    #[test]
    fn bj_orthogonality_is_preserved_up_the_tower() {
        let sp = space(6);
        let mut tested = 0;
        for seed in 0..20 {
            let x = random_vector(&sp, 6, SampleStyle::Generic, 600 + seed).unwrap();
            let n = 4;
            if level_norm(&sp, &x.project(n), n).unwrap().value < 0.3 {
                continue;
            }
            let h0 = random_vector(&sp, n, SampleStyle::Generic, 700 + seed).unwrap();
            let d = tangent_decomposition(&sp, &x, &h0, n).unwrap();
            if tower_norm(&sp, &d.h_tangent).unwrap() < 1e-3 {
                continue;
            }
            assert!(is_bj_orthogonal(&sp, &x.project(n), &d.h_tangent, 1e-6).unwrap());
            assert!(is_bj_orthogonal(&sp, &x.project(n + 1), &d.h_tangent, 1e-6).unwrap());
            assert!(is_bj_orthogonal(&sp, &x.project(n + 2), &d.h_tangent, 1e-6).unwrap());
            tested += 1;
        }
        assert!(tested >= 10, "only {tested} samples surviving the filters");
    }

    #[test]
    fn projected_phi_converges_with_the_tail() {
        let sp = TowerSpace::with_defaults(2, 40, 5).unwrap();
        for seed in 0..10 {
            let x = random_vector(&sp, 30, SampleStyle::SummableTail, 800 + seed).unwrap();
            let h = random_vector(&sp, 5, SampleStyle::Generic, 900 + seed).unwrap();
            let t = 0.2;
            let full = phi(&sp, &x, &h, t).unwrap();
            for n in [5usize, 10, 20, 30] {
                let truncated = phi(&sp, &x.project(n), &h, t).unwrap();
                assert!(
                    (truncated - full).abs() <= 2.0 * x.ell1_tail(n) + 1e-12,
                    "seed {seed}, n {n}"
                );
            }
            assert_eq!(phi(&sp, &x.project(30), &h, t).unwrap(), full);
        }
    }
}
