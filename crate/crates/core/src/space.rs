//! The ambient space at desk scale: a finite-dimensional smooth base space
//! plus finitely many absolutely-summable coordinates.
//!
//! A point is `x = x0 + sum_j x_j e_j` with `x0` in the base space and the
//! `x_j` stored as a finite coordinate vector (trailing zeros permitted).
//! Projections truncate the coordinate list; points outside every finite
//! level are represented by deep truncations together with the analytic
//! tail bound `ell1_tail`.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::shape::ShapeSchedule;

/// Base norms available for the zero level of the tower. Extension point;
/// the Euclidean norm is smooth away from the origin with a closed-form
/// gradient, so the base never pollutes tower accuracy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BaseNormKind {
    Euclidean,
}

/// The base space of the tower: R^dim under a smooth norm.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BaseSpace {
    pub dim: usize,
    pub norm_kind: BaseNormKind,
}

impl BaseSpace {
    pub fn euclidean(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::OutOfDomain {
                name: "dim",
                value: 0.0,
                domain: "positive integers",
            });
        }
        Ok(BaseSpace {
            dim,
            norm_kind: BaseNormKind::Euclidean,
        })
    }

    pub fn norm(&self, v: &[f64]) -> f64 {
        match self.norm_kind {
            BaseNormKind::Euclidean => v.iter().map(|a| a * a).sum::<f64>().sqrt(),
        }
    }
}

/// A point of the tower: base component plus finitely many coordinates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TowerVector {
    pub base: Vec<f64>,
    pub coords: Vec<f64>,
}

impl TowerVector {
    pub fn new(base: Vec<f64>, coords: Vec<f64>) -> Self {
        TowerVector { base, coords }
    }

    pub fn zero(dim: usize) -> Self {
        TowerVector {
            base: vec![0.0; dim],
            coords: Vec::new(),
        }
    }

    /// The canonical unit coordinate vector e_j (j >= 1).
    pub fn basis_coord(dim: usize, j: usize) -> Self {
        assert!(j >= 1, "coordinate basis index is 1-based");
        let mut coords = vec![0.0; j];
        coords[j - 1] = 1.0;
        TowerVector {
            base: vec![0.0; dim],
            coords,
        }
    }

    /// The i-th unit vector of the base space (i >= 1).
    pub fn basis_base(dim: usize, i: usize) -> Self {
        assert!(i >= 1 && i <= dim, "base basis index out of range");
        let mut base = vec![0.0; dim];
        base[i - 1] = 1.0;
        TowerVector {
            base,
            coords: Vec::new(),
        }
    }

    /// Number of stored coordinates (trailing zeros count).
    pub fn degree(&self) -> usize {
        self.coords.len()
    }

    /// The j-th coordinate (1-based); zero beyond the stored degree.
    pub fn coord(&self, j: usize) -> f64 {
        if j >= 1 && j <= self.coords.len() {
            self.coords[j - 1]
        } else {
            0.0
        }
    }

    /// Canonical projection: same base, coordinates truncated or zero-padded
    /// to exactly `n` entries.
    pub fn project(&self, n: usize) -> TowerVector {
        let mut coords = self.coords.clone();
        coords.resize(n, 0.0);
        TowerVector {
            base: self.base.clone(),
            coords,
        }
    }

    /// Sum of |x_j| for j > n over the finite support.
    pub fn ell1_tail(&self, n: usize) -> f64 {
        // + 0.0 normalizes the empty sum's -0.0
        self.coords.iter().skip(n).map(|c| c.abs()).sum::<f64>() + 0.0
    }

    /// Sum of |x_j| over the whole finite support.
    pub fn ell1_norm(&self) -> f64 {
        self.ell1_tail(0)
    }

    pub fn is_zero(&self) -> bool {
        self.base.iter().all(|&a| a == 0.0) && self.coords.iter().all(|&a| a == 0.0)
    }

    /// Canonical representative with trailing zero coordinates dropped.
    /// Two representations describe the same point iff their trimmed forms
    /// are equal.
    pub fn trimmed(&self) -> TowerVector {
        let mut coords = self.coords.clone();
        while coords.last() == Some(&0.0) {
            coords.pop();
        }
        TowerVector {
            base: self.base.clone(),
            coords,
        }
    }

    pub fn scale(&self, a: f64) -> TowerVector {
        TowerVector {
            base: self.base.iter().map(|x| a * x).collect(),
            coords: self.coords.iter().map(|x| a * x).collect(),
        }
    }

    /// One CSV row `base_1,..,base_d,x_1,..,x_N` for bulk sample files.
    pub fn to_csv_row(&self) -> String {
        self.base
            .iter()
            .chain(self.coords.iter())
            .map(|v| format!("{v}"))
            .collect::<Vec<_>>()
            .join(",")
    }

    /// Parses a CSV row; the base dimension fixes where coordinates begin.
    pub fn from_csv_row(row: &str, dim: usize) -> Result<TowerVector> {
        let mut values = Vec::new();
        for field in row.split(',') {
            let v: f64 = field.trim().parse().map_err(|_| Error::OutOfDomain {
                name: "csv field",
                value: f64::NAN,
                domain: "finite reals",
            })?;
            values.push(v);
        }
        if values.len() < dim {
            return Err(Error::DimensionMismatch {
                left: values.len(),
                right: dim,
            });
        }
        let coords = values.split_off(dim);
        Ok(TowerVector {
            base: values,
            coords,
        })
    }
}

/// a*x + b*y. Exact linear algebra on the representation.
pub fn axpy(a: f64, x: &TowerVector, b: f64, y: &TowerVector) -> Result<TowerVector> {
    if x.base.len() != y.base.len() {
        return Err(Error::DimensionMismatch {
            left: x.base.len(),
            right: y.base.len(),
        });
    }
    let base = x
        .base
        .iter()
        .zip(y.base.iter())
        .map(|(xv, yv)| a * xv + b * yv)
        .collect();
    let degree = x.degree().max(y.degree());
    let coords = (1..=degree).map(|j| a * x.coord(j) + b * y.coord(j)).collect();
    Ok(TowerVector { base, coords })
}

/// Solver tolerances shared by the norm engine and the membership oracle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Relative root tolerance, in (0, 1e-6].
    pub rel: f64,
    /// Iteration budget per root solve, at least 50.
    pub max_iter: usize,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            rel: 1e-12,
            max_iter: 200,
        }
    }
}

impl Tolerances {
    pub fn validate(&self) -> Result<()> {
        if !(self.rel > 0.0 && self.rel <= 1e-6) {
            return Err(Error::InvalidTolerance {
                field: "rel",
                value: self.rel,
            });
        }
        if self.max_iter < 50 {
            return Err(Error::InvalidTolerance {
                field: "max_iter",
                value: self.max_iter as f64,
            });
        }
        Ok(())
    }
}

/// The ambient renormed space: base descriptor, shape schedule, solver
/// tolerances and the seed used for sample generation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TowerSpace {
    pub base: BaseSpace,
    pub schedule: ShapeSchedule,
    pub tol: Tolerances,
    pub seed: u64,
}

impl TowerSpace {
    pub fn new(base: BaseSpace, schedule: ShapeSchedule, tol: Tolerances, seed: u64) -> Result<Self> {
        tol.validate()?;
        Ok(TowerSpace {
            base,
            schedule,
            tol,
            seed,
        })
    }

    /// Default space over Euclidean R^dim with the default geometric schedule.
    pub fn with_defaults(dim: usize, levels: usize, seed: u64) -> Result<Self> {
        TowerSpace::new(
            BaseSpace::euclidean(dim)?,
            ShapeSchedule::default_geometric(levels)?,
            Tolerances::default(),
            seed,
        )
    }

    pub fn max_level(&self) -> usize {
        self.schedule.levels
    }

    pub fn base_norm(&self, x: &TowerVector) -> f64 {
        self.base.norm(&x.base)
    }
}

/// Sample families for the verification harness.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SampleStyle {
    /// i.i.d. bounded coordinates.
    Generic,
    /// Generic draw post-normalized so the tower norm at level `degree` is 1.
    UnitSphere,
    /// |x_j| <= 3^-j, emulating points outside every finite level by deep
    /// truncation.
    SummableTail,
}

/// Deterministic sample generation: a pure function of (style, degree, seed).
pub fn random_vector(
    space: &TowerSpace,
    degree: usize,
    style: SampleStyle,
    seed: u64,
) -> Result<TowerVector> {
    if degree > space.max_level() {
        return Err(Error::DegreeOutOfRange {
            degree,
            max: space.max_level(),
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let base: Vec<f64> = (0..space.base.dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let coords: Vec<f64> = match style {
        SampleStyle::Generic | SampleStyle::UnitSphere => {
            (0..degree).map(|_| rng.gen_range(-1.0..1.0)).collect()
        }
        SampleStyle::SummableTail => (1..=degree as i32)
            .map(|j| 3.0f64.powi(-j) * rng.gen_range(-1.0..1.0))
            .collect(),
    };
    let mut x = TowerVector { base, coords };
    if style == SampleStyle::UnitSphere {
        let norm = crate::norm::tower_norm(space, &x)?;
        if norm == 0.0 {
            // measure-zero draw; perturb deterministically
            x.base[0] = 1.0;
            return Ok(x);
        }
        x = x.scale(1.0 / norm);
    }
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn space() -> TowerSpace {
        TowerSpace::with_defaults(3, 16, 7).unwrap()
    }

    #[test]
    fn project_truncates_and_pads() {
        let x = TowerVector::new(vec![0.0], vec![1.0, 2.0, 3.0]);
        assert_eq!(x.project(2).coords, vec![1.0, 2.0]);
        let y = TowerVector::new(vec![0.0], vec![1.0]);
        assert_eq!(y.project(5).coords, vec![1.0, 0.0, 0.0, 0.0, 0.0]);
        assert_eq!(x.project(0).coords, Vec::<f64>::new());
        assert_eq!(x.project(0).base, x.base);
    }

    #[test]
    fn nested_projections_compose_exactly() {
        let x = TowerVector::new(vec![1.0, -2.0], vec![0.5, -0.25, 0.125, 3.0]);
        for m in 0..6 {
            for n in 0..6 {
                // equal as points; degrees may differ by trailing zeros
                assert_eq!(
                    x.project(m).project(n).trimmed(),
                    x.project(m.min(n)).trimmed()
                );
                assert_eq!(x.project(m).project(n).degree(), n);
            }
        }
    }

    #[test]
    fn ell1_tail_examples() {
        let x = TowerVector::new(vec![0.0], vec![1.0, -2.0, 3.0]);
        assert_eq!(x.ell1_tail(1), 5.0);
        let y = TowerVector::new(vec![0.0], vec![1.0]);
        assert_eq!(y.ell1_tail(3), 0.0);
        // geometric coordinates 3^-1 .. 3^-k sum to (1 - 3^-k)/2
        for k in 1..=12 {
            let coords: Vec<f64> = (1..=k).map(|j| 3.0f64.powi(-j)).collect();
            let g = TowerVector::new(vec![0.0], coords);
            let expected = (1.0 - 3.0f64.powi(-k)) / 2.0;
            assert!((g.ell1_tail(0) - expected).abs() <= 1e-15);
        }
    }

    #[test]
    fn tail_plus_head_equals_total() {
        let x = TowerVector::new(vec![0.0], vec![0.5, -0.75, 0.1, -0.2]);
        for n in 0..=6 {
            let head: f64 = (1..=n).map(|j| x.coord(j).abs()).sum();
            assert_eq!(head + x.ell1_tail(n), x.ell1_norm());
        }
    }

    #[test]
    fn axpy_is_exact_linear_algebra() {
        let x = TowerVector::new(vec![1.0, 2.0], vec![3.0]);
        let y = TowerVector::new(vec![-1.0, 0.5], vec![0.0, 2.0]);
        assert_eq!(axpy(1.0, &x, 0.0, &y).unwrap().base, vec![1.0, 2.0]);
        assert!(axpy(1.0, &x, -1.0, &x).unwrap().is_zero());
        let e1 = TowerVector::basis_coord(2, 1);
        let e2 = TowerVector::basis_coord(2, 2);
        assert_eq!(axpy(2.0, &e1, 3.0, &e2).unwrap().coords, vec![2.0, 3.0]);
        let bad = TowerVector::new(vec![1.0], vec![]);
        assert!(matches!(
            axpy(1.0, &x, 1.0, &bad),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn random_vector_is_deterministic_in_seed() {
        let sp = space();
        for style in [SampleStyle::Generic, SampleStyle::UnitSphere, SampleStyle::SummableTail] {
            let a = random_vector(&sp, 6, style, 42).unwrap();
            let b = random_vector(&sp, 6, style, 42).unwrap();
            assert_eq!(a, b);
            let c = random_vector(&sp, 6, style, 43).unwrap();
            assert_ne!(a, c);
        }
    }

    #[test]
    fn unit_sphere_samples_have_unit_tower_norm() {
        let sp = space();
        for seed in 0..20 {
            let x = random_vector(&sp, 5, SampleStyle::UnitSphere, seed).unwrap();
            let norm = crate::norm::tower_norm(&sp, &x).unwrap();
            assert!((norm - 1.0).abs() <= 1e-10, "seed {seed}: {norm}");
        }
    }

    #[test]
    fn summable_tail_samples_respect_geometric_envelope() {
        let sp = TowerSpace::with_defaults(2, 40, 1).unwrap();
        for seed in 0..10 {
            let x = random_vector(&sp, 30, SampleStyle::SummableTail, seed).unwrap();
            for j in 1..=30 {
                assert!(x.coord(j).abs() <= 3.0f64.powi(-(j as i32)));
            }
            // tail of the envelope: sum_{j>20} 3^-j = 3^-20 / 2
            assert!(x.ell1_tail(20) <= 3.0f64.powi(-20) / 2.0);
        }
    }

    #[test]
    fn random_vector_rejects_excess_degree() {
        let sp = space();
        assert!(matches!(
            random_vector(&sp, 17, SampleStyle::Generic, 0),
            Err(Error::DegreeOutOfRange { .. })
        ));
    }

    #[test]
    fn tolerance_validation() {
        assert!(Tolerances { rel: 1e-12, max_iter: 200 }.validate().is_ok());
        assert!(Tolerances { rel: 1e-5, max_iter: 200 }.validate().is_err());
        assert!(Tolerances { rel: 0.0, max_iter: 200 }.validate().is_err());
        assert!(Tolerances { rel: 1e-12, max_iter: 10 }.validate().is_err());
    }

    #[test]
    fn vector_json_and_csv_round_trip() {
        let x = TowerVector::new(vec![1.5, -0.25], vec![0.125, -3.0]);
        let json = serde_json::to_string(&x).unwrap();
        let back: TowerVector = serde_json::from_str(&json).unwrap();
        assert_eq!(x, back);
        let row = x.to_csv_row();
        assert_eq!(row, "1.5,-0.25,0.125,-3");
        let parsed = TowerVector::from_csv_row(&row, 2).unwrap();
        assert_eq!(x, parsed);
    }
}
