//! Piecewise-convex shape functions and their parameter schedules.
//!
//! Each level n of the tower carries a convex, nondecreasing function
//! f_n : [0,1] -> [0,1] built from three parameters 0 < z_n < l_n < s_n < 1:
//!
//! * flat zero on `[0, z]`,
//! * a quadratic ramp on `[z, l]` that leaves with slope 1,
//! * the linear piece `t - (z+l)/2` on `[l, s]`,
//! * an endcap `1 - c (1-t)^alpha` on `[s, 1]` whose slope blows up at 1.
//!
//! The pieces are chosen so that the function is C^1, satisfies
//! `max(0, t - (z+l)/2) <= f(t) <= t`, and hits f(z) = 0 and f(1) = 1
//! exactly.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// How a schedule's parameter sequences were produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScheduleKind {
    /// z_n = 4^-n, l_n = 2^-n, s_n = 1 - 2^-(n+1). Keeps sum(l_n) = 1 and
    /// the equivalence product modest.
    DefaultGeometric,
    /// Caller-supplied finite lists; only the materialized prefix is checked.
    Explicit,
}

/// The parameter sequences (z_n, l_n, s_n) for levels 1..=levels.
///
/// Invariants, checked at construction:
/// * `0 < z_n < l_n < s_n < 1` for every level,
/// * z and l strictly decreasing, s strictly increasing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShapeSchedule {
    pub kind: ScheduleKind,
    pub levels: usize,
    pub z: Vec<f64>,
    pub l: Vec<f64>,
    pub s: Vec<f64>,
}

impl ShapeSchedule {
    /// Largest level the default generator can materialize in f64:
    /// beyond it, 1 - 2^-(n+1) rounds to exactly 1.
    pub const MAX_GEOMETRIC_LEVELS: usize = 52;

    /// Materializes the default geometric schedule for `levels` levels.
    pub fn default_geometric(levels: usize) -> Result<Self> {
        if levels == 0 {
            return Err(Error::InvalidSchedule {
                index: 0,
                constraint: "levels must be >= 1".into(),
            });
        }
        if levels > Self::MAX_GEOMETRIC_LEVELS {
            return Err(Error::InvalidSchedule {
                index: Self::MAX_GEOMETRIC_LEVELS + 1,
                constraint: format!(
                    "default generator saturates double precision beyond level {}",
                    Self::MAX_GEOMETRIC_LEVELS
                ),
            });
        }
        let mut z = Vec::with_capacity(levels);
        let mut l = Vec::with_capacity(levels);
        let mut s = Vec::with_capacity(levels);
        for n in 1..=levels as i32 {
            z.push(4.0f64.powi(-n));
            l.push(2.0f64.powi(-n));
            s.push(1.0 - 2.0f64.powi(-(n + 1)));
        }
        let schedule = ShapeSchedule {
            kind: ScheduleKind::DefaultGeometric,
            levels,
            z,
            l,
            s,
        };
        schedule.validate()?;
        Ok(schedule)
    }

    /// Builds a schedule from explicit lists. All three lists must have the
    /// same nonzero length.
    pub fn explicit(z: Vec<f64>, l: Vec<f64>, s: Vec<f64>) -> Result<Self> {
        if z.is_empty() || z.len() != l.len() || z.len() != s.len() {
            return Err(Error::InvalidSchedule {
                index: 0,
                constraint: format!(
                    "z, l, s must have equal nonzero lengths (got {}, {}, {})",
                    z.len(),
                    l.len(),
                    s.len()
                ),
            });
        }
        let schedule = ShapeSchedule {
            kind: ScheduleKind::Explicit,
            levels: z.len(),
            z,
            l,
            s,
        };
        schedule.validate()?;
        Ok(schedule)
    }

    /// Parses the JSON serialization. For `default_geometric` the arrays are
    /// regenerated from `levels`; if the document also carries arrays they
    /// must match the generator output.
    pub fn from_json(text: &str) -> Result<Self> {
        #[derive(Deserialize)]
        struct Raw {
            kind: ScheduleKind,
            levels: usize,
            #[serde(default)]
            z: Vec<f64>,
            #[serde(default)]
            l: Vec<f64>,
            #[serde(default)]
            s: Vec<f64>,
        }
        let raw: Raw = serde_json::from_str(text).map_err(|e| Error::InvalidSchedule {
            index: 0,
            constraint: format!("schedule JSON: {e}"),
        })?;
        match raw.kind {
            ScheduleKind::DefaultGeometric => {
                let generated = ShapeSchedule::default_geometric(raw.levels)?;
                if !raw.z.is_empty()
                    && (raw.z != generated.z || raw.l != generated.l || raw.s != generated.s)
                {
                    return Err(Error::InvalidSchedule {
                        index: 0,
                        constraint: "arrays do not match the default_geometric generator".into(),
                    });
                }
                Ok(generated)
            }
            ScheduleKind::Explicit => ShapeSchedule::explicit(raw.z, raw.l, raw.s),
        }
    }

    fn validate(&self) -> Result<()> {
        let fail = |index: usize, constraint: String| Err(Error::InvalidSchedule { index, constraint });
        for n in 0..self.levels {
            let (z, l, s) = (self.z[n], self.l[n], self.s[n]);
            if !(z.is_finite() && l.is_finite() && s.is_finite()) {
                return fail(n + 1, "parameters must be finite".into());
            }
            if z <= 0.0 {
                return fail(n + 1, format!("0 < z violated (z = {z})"));
            }
            if l <= z {
                return fail(n + 1, format!("z < l violated (z = {z}, l = {l})"));
            }
            if s <= l {
                return fail(n + 1, format!("l < s violated (l = {l}, s = {s})"));
            }
            if s >= 1.0 {
                return fail(n + 1, format!("s < 1 violated (s = {s})"));
            }
            if n > 0 {
                if self.z[n] >= self.z[n - 1] {
                    return fail(n + 1, "z must be strictly decreasing".into());
                }
                if self.l[n] >= self.l[n - 1] {
                    return fail(n + 1, "l must be strictly decreasing".into());
                }
                if self.s[n] <= self.s[n - 1] {
                    return fail(n + 1, "s must be strictly increasing".into());
                }
            }
        }
        Ok(())
    }

    /// The shape function for 1-based `level`.
    pub fn shape_fn(&self, level: usize) -> Result<ShapeFn> {
        if level == 0 || level > self.levels {
            return Err(Error::DegreeOutOfRange {
                degree: level,
                max: self.levels,
            });
        }
        Ok(ShapeFn::new(
            level,
            self.z[level - 1],
            self.l[level - 1],
            self.s[level - 1],
        ))
    }

    /// (z_n + l_n)/2, the offset of the linear piece at `level` (1-based).
    /// This is also the per-level equivalence defect.
    pub fn linear_offset(&self, level: usize) -> f64 {
        (self.z[level - 1] + self.l[level - 1]) / 2.0
    }
}

/// One level's shape function with its derived junction constants.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShapeFn {
    /// 1-based level in the tower.
    pub level: usize,
    pub z: f64,
    pub l: f64,
    pub s: f64,
    /// Offset of the linear piece: (z + l)/2.
    pub m: f64,
    /// Value at the s junction: s - m.
    pub v: f64,
    /// Endcap exponent (1 - s)/(1 - v), in (0, 1).
    pub alpha: f64,
    /// Endcap coefficient (1 - v)/(1 - s)^alpha.
    pub c: f64,
}

impl ShapeFn {
    fn new(level: usize, z: f64, l: f64, s: f64) -> Self {
        let m = (z + l) / 2.0;
        let v = s - m;
        let alpha = (1.0 - s) / (1.0 - v);
        let c = (1.0 - v) / (1.0 - s).powf(alpha);
        ShapeFn {
            level,
            z,
            l,
            s,
            m,
            v,
            alpha,
            c,
        }
    }

    /// Evaluates f(t) for t in [0, 1].
    pub fn eval(&self, t: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&t) {
            return Err(Error::OutOfDomain {
                name: "t",
                value: t,
                domain: "[0, 1]",
            });
        }
        Ok(self.eval_unchecked(t))
    }

    fn eval_unchecked(&self, t: f64) -> f64 {
        if t <= self.z {
            0.0
        } else if t <= self.l {
            let d = t - self.z;
            d * d / (2.0 * (self.l - self.z))
        } else if t <= self.s {
            t - self.m
        } else {
            // 0^alpha = 0, so f(1) = 1 exactly.
            1.0 - self.c * (1.0 - t).powf(self.alpha)
        }
    }

    /// 1 - f(t), evaluated piecewise so the endcap never cancels.
    pub fn complement(&self, t: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&t) {
            return Err(Error::OutOfDomain {
                name: "t",
                value: t,
                domain: "[0, 1]",
            });
        }
        Ok(self.complement_parts(t, 1.0 - t))
    }

    /// 1 - f(u/lambda) for 0 <= u <= lambda, keeping 1 - u/lambda accurate
    /// as (lambda - u)/lambda. Used by the level root solve, where lambda can
    /// sit within an ulp of u.
    pub(crate) fn complement_ratio(&self, u: f64, lambda: f64) -> f64 {
        let t = u / lambda;
        self.complement_parts(t, (lambda - u) / lambda)
    }

    fn complement_parts(&self, t: f64, one_minus_t: f64) -> f64 {
        if t <= self.z {
            1.0
        } else if t <= self.l {
            let d = t - self.z;
            1.0 - d * d / (2.0 * (self.l - self.z))
        } else if t <= self.s {
            one_minus_t + self.m
        } else {
            self.c * one_minus_t.powf(self.alpha)
        }
    }

    /// Evaluates f'(t) for t in [0, 1). The derivative grows without bound
    /// as t -> 1 and t = 1 is refused.
    pub fn derivative(&self, t: f64) -> Result<f64> {
        if t == 1.0 {
            return Err(Error::UnboundedDerivative);
        }
        if !(0.0..1.0).contains(&t) {
            return Err(Error::OutOfDomain {
                name: "t",
                value: t,
                domain: "[0, 1)",
            });
        }
        Ok(self.derivative_parts(t, 1.0 - t))
    }

    fn derivative_parts(&self, t: f64, one_minus_t: f64) -> f64 {
        if t <= self.z {
            0.0
        } else if t <= self.l {
            (t - self.z) / (self.l - self.z)
        } else if t <= self.s {
            1.0
        } else {
            self.c * self.alpha * one_minus_t.powf(self.alpha - 1.0)
        }
    }

    /// d/d lambda of lambda * (1 - f(u/lambda)), i.e. 1 - f(t) + t f'(t)
    /// at t = u/lambda. Always >= 1 by convexity; returns +inf at lambda = u.
    pub(crate) fn solve_slope(&self, u: f64, lambda: f64) -> f64 {
        if lambda <= u {
            return f64::INFINITY;
        }
        let t = u / lambda;
        let one_minus_t = (lambda - u) / lambda;
        self.complement_parts(t, one_minus_t) + t * self.derivative_parts(t, one_minus_t)
    }

    /// Max over a uniform grid of the sandwich defects
    /// `f(t) - t`, `(t - m) - f(t)` and `-f(t)`. Nonpositive (up to rounding)
    /// for a correct construction.
    pub fn sandwich_violation(&self, grid_size: usize) -> f64 {
        assert!(grid_size >= 2, "grid_size must be >= 2");
        let mut worst = f64::NEG_INFINITY;
        for i in 0..grid_size {
            let t = i as f64 / (grid_size - 1) as f64;
            let f = self.eval_unchecked(t);
            worst = worst.max(f - t).max((t - self.m) - f).max(-f);
        }
        worst
    }
}
