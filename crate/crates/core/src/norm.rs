//! The inductively constructed tower norms and their comparison norms.
//!
//! Level 0 carries the base norm. The unit ball at level n stacks
//! homothetic copies of the level n-1 ball: a point is inside when
//! `|x_n| <= 1` and the lower projection fits in `(1 - f_n(|x_n|))` times
//! the lower ball. Evaluating the norm therefore reduces to the scalar
//! equation
//!
//! ```text
//! lambda * (1 - f_n(|x_n| / lambda)) = |previous level norm|
//! ```
//!
//! whose left side has slope >= 1 in lambda, making a safeguarded Newton
//! iteration globally convergent on the analytic bracket.
//!
//! `member_ball` / `minkowski_oracle` answer the same question through the
//! set definition alone (recursive membership plus bisection) and share no
//! code with the root solve; the two routes cross-check each other.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::shape::{ScheduleKind, ShapeFn};
use crate::space::{Tolerances, TowerSpace, TowerVector};

/// Norm of one projection together with the full per-level trail.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LevelNormResult {
    /// The norm of the projection at the requested level.
    pub value: f64,
    /// Norms of the level-k projections for k = 0..=n; nondecreasing in k.
    pub per_level: Vec<f64>,
    /// Root-solver iterations spent per level (k = 1..=n).
    pub iterations: Vec<usize>,
}

/// Finite prefix of the equivalence product plus a bound on the omitted
/// factors.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EquivalenceConstants {
    /// prod_{k<=N} (1 + (z_k + l_k)/2), always >= 1.
    pub product: f64,
    /// Upper bound on the product of all omitted factors. Closed-form
    /// geometric tail for the default generator; the exact remaining finite
    /// product for explicit schedules.
    pub tail_bound: f64,
}

/// Solves `lambda * (1 - f(u / lambda)) = r` for the unique root
/// `lambda >= max(u, r)`. Returns the root and the iterations spent.
///
/// Degenerate closures: `u = 0` gives `lambda = r`; `r = 0` gives
/// `lambda = u`. In the flat region `u <= z * r` the root is exactly `r`.
pub fn solve_level(r: f64, u: f64, f: &ShapeFn, tol: &Tolerances) -> Result<(f64, usize)> {
    if r.is_nan() || r < 0.0 {
        return Err(Error::OutOfDomain {
            name: "r",
            value: r,
            domain: "[0, inf)",
        });
    }
    if u.is_nan() || u < 0.0 {
        return Err(Error::OutOfDomain {
            name: "u",
            value: u,
            domain: "[0, inf)",
        });
    }
    if u == 0.0 {
        return Ok((r, 0));
    }
    if r == 0.0 {
        return Ok((u, 0));
    }
    if u <= f.z * r {
        return Ok((r, 0));
    }

    // g(lambda) = lambda (1 - f(u/lambda)) is increasing with slope >= 1 and
    // concave, so a Newton step from below never overshoots. The bracket
    // comes from the sandwich max(0, t - m) <= f(t) <= t.
    let mut lo = u.max((r + u) / (1.0 + f.m));
    let mut hi = r + u;
    let mut lambda = lo;
    let mut resid = f64::NAN;
    for iteration in 1..=tol.max_iter {
        resid = lambda * f.complement_ratio(u, lambda) - r;
        if resid.abs() <= tol.rel * lambda || hi - lo <= tol.rel * lambda {
            // one polishing step pushes the root to machine precision
            let slope = f.solve_slope(u, lambda);
            if slope.is_finite() {
                let polished = lambda - resid / slope;
                if polished.is_finite() && polished >= u {
                    lambda = polished;
                }
            }
            return Ok((lambda, iteration));
        }
        if resid > 0.0 {
            hi = lambda;
        } else {
            lo = lambda;
        }
        let slope = f.solve_slope(u, lambda);
        let step = lambda - resid / slope;
        lambda = if step.is_finite() && step > lo && step < hi {
            step
        } else {
            0.5 * (lo + hi)
        };
    }
    Err(Error::NoConvergence {
        iterations: tol.max_iter,
        residual: resid,
    })
}

/// Norm of the level-n projection of `x`, with the whole per-level trail.
/// Coordinates beyond the stored degree count as zero.
pub fn level_norm(space: &TowerSpace, x: &TowerVector, n: usize) -> Result<LevelNormResult> {
    if n > space.max_level() {
        return Err(Error::DegreeOutOfRange {
            degree: n,
            max: space.max_level(),
        });
    }
    let mut per_level = Vec::with_capacity(n + 1);
    let mut iterations = Vec::with_capacity(n);
    let mut lambda = space.base_norm(x);
    per_level.push(lambda);
    for k in 1..=n {
        let f = space.schedule.shape_fn(k)?;
        let (next, spent) = solve_level(lambda, x.coord(k).abs(), &f, &space.tol)?;
        lambda = next;
        per_level.push(lambda);
        iterations.push(spent);
    }
    Ok(LevelNormResult {
        value: lambda,
        per_level,
        iterations,
    })
}

/// The final norm: supremum of the projection norms. The trail is
/// nondecreasing and constant beyond the support, so the supremum is the
/// value at the stored degree.
pub fn tower_norm(space: &TowerSpace, x: &TowerVector) -> Result<f64> {
    Ok(level_norm(space, x, x.degree())?.value)
}

/// Decides membership of the level-n projection in the level-n unit ball by
/// the set definition alone, without the root solver. Boundary cases resolve
/// by exact comparisons on the representation.
pub fn member_ball(space: &TowerSpace, x: &TowerVector, n: usize) -> bool {
    assert!(
        n <= space.max_level(),
        "level {n} exceeds the schedule's {} levels",
        space.max_level()
    );
    member_scaled(space, x, n, 1.0)
}

/// Is the level-n projection of `x` inside `scale * B_n`?
fn member_scaled(space: &TowerSpace, x: &TowerVector, n: usize, scale: f64) -> bool {
    if n == 0 {
        return space.base_norm(x) <= scale;
    }
    let u = x.coord(n).abs();
    if u > scale {
        return false;
    }
    if u == 0.0 {
        return member_scaled(space, x, n - 1, scale);
    }
    let f = space
        .schedule
        .shape_fn(n)
        .expect("level checked against the schedule");
    let inner = scale * f.complement_ratio(u, scale);
    if inner == 0.0 {
        // the slice has zero width: the lower projection must vanish
        return lower_projection_is_zero(x, n - 1);
    }
    member_scaled(space, x, n - 1, inner)
}

fn lower_projection_is_zero(x: &TowerVector, n: usize) -> bool {
    x.base.iter().all(|&a| a == 0.0) && x.coords.iter().take(n).all(|&a| a == 0.0)
}

/// Independent evaluation of the level-n norm as the Minkowski functional
/// `inf { lambda > 0 : x / lambda in B_n }`, by bisection over the bracket
/// given by the equivalence sandwich. Shares no code with `solve_level`.
pub fn minkowski_oracle(
    space: &TowerSpace,
    x: &TowerVector,
    n: usize,
    tol: &Tolerances,
) -> Result<f64> {
    if n > space.max_level() {
        return Err(Error::DegreeOutOfRange {
            degree: n,
            max: space.max_level(),
        });
    }
    let head: f64 = (1..=n).map(|j| x.coord(j).abs()).sum();
    let upper = space.base_norm(x) + head;
    if upper == 0.0 {
        return Ok(0.0);
    }
    let mut lo = upper / equivalence_constants(space, n)?.product;
    let mut hi = upper;
    for _ in 0..tol.max_iter {
        if hi - lo <= tol.rel * hi {
            return Ok(0.5 * (lo + hi));
        }
        let mid = 0.5 * (lo + hi);
        if member_scaled(space, x, n, mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Err(Error::NoConvergence {
        iterations: tol.max_iter,
        residual: hi - lo,
    })
}

/// The comparison norm at level n >= 1: level-(n-1) norm plus `|x_n|`.
pub fn comparison_norm(space: &TowerSpace, x: &TowerVector, n: usize) -> Result<f64> {
    if n == 0 {
        return Err(Error::OutOfDomain {
            name: "n",
            value: 0.0,
            domain: "levels >= 1",
        });
    }
    Ok(level_norm(space, x, n - 1)?.value + x.coord(n).abs())
}

/// Base norm plus the full coordinate sum: the reference norm the tower is
/// equivalent to.
pub fn ell1_sum_norm(space: &TowerSpace, x: &TowerVector) -> f64 {
    space.base_norm(x) + x.ell1_norm()
}

/// Product of the first `n` equivalence factors `1 + (z_k + l_k)/2` with a
/// bound on everything omitted.
pub fn equivalence_constants(space: &TowerSpace, n: usize) -> Result<EquivalenceConstants> {
    if n > space.max_level() {
        return Err(Error::DegreeOutOfRange {
            degree: n,
            max: space.max_level(),
        });
    }
    let schedule = &space.schedule;
    let mut product = 1.0;
    for k in 1..=n {
        product *= 1.0 + schedule.linear_offset(k);
    }
    let tail_bound = match schedule.kind {
        // sum_{k>n} (4^-k + 2^-k)/2 = 4^-n/6 + 2^-n/2, and prod(1+a_k) <= exp(sum a_k)
        ScheduleKind::DefaultGeometric => {
            let nn = n as i32;
            (4.0f64.powi(-nn) / 6.0 + 2.0f64.powi(-nn) / 2.0).exp()
        }
        ScheduleKind::Explicit => {
            let mut rest = 1.0;
            for k in n + 1..=schedule.levels {
                rest *= 1.0 + schedule.linear_offset(k);
            }
            rest
        }
    };
    Ok(EquivalenceConstants {
        product,
        tail_bound,
    })
}
