//! wasm exports for the browser demo page. Each function is a pure
//! computation returning a JSON string; the page's JavaScript does all
//! rendering. Errors surface as JavaScript exceptions carrying the message.

use wasm_bindgen::prelude::wasm_bindgen;

use octnorm_core::calculus::{directional_derivative, symmetric_quotient, StepSchedule};
use octnorm_core::slice::{comparison_slice, unit_sphere_slice};
use octnorm_core::{random_vector, SampleStyle, TowerSpace, TowerVector};

const BASE_DIM: usize = 2;

fn demo_space(levels: usize) -> Result<TowerSpace, String> {
    TowerSpace::with_defaults(BASE_DIM, levels.clamp(1, 48), 1).map_err(|e| e.to_string())
}

fn parse_direction(space: &TowerSpace, spec: &str) -> Result<TowerVector, String> {
    if let Some(j) = spec.strip_prefix('e').and_then(|r| r.parse::<usize>().ok()) {
        if (1..=space.max_level()).contains(&j) {
            return Ok(TowerVector::basis_coord(BASE_DIM, j));
        }
    }
    if let Some(i) = spec.strip_prefix('b').and_then(|r| r.parse::<usize>().ok()) {
        if (1..=BASE_DIM).contains(&i) {
            return Ok(TowerVector::basis_base(BASE_DIM, i));
        }
    }
    Err(format!("unknown axis {spec:?}; use b1/b2 or e1..e48"))
}

/// Samples one level's shape function and its slope on a uniform grid.
/// JSON: {"level", "z", "l", "s", "m", "t": [...], "value": [...],
/// "slope": [...]} (the slope at the right endpoint is evaluated just
/// inside the domain, where it is already enormous).
#[wasm_bindgen]
pub fn shape_curve(levels: u32, level: u32, resolution: u32) -> Result<String, String> {
    let space = demo_space(levels as usize)?;
    let f = space
        .schedule
        .shape_fn((level as usize).clamp(1, space.max_level()))
        .map_err(|e| e.to_string())?;
    let resolution = resolution.clamp(16, 4000) as usize;
    let mut t_grid = Vec::with_capacity(resolution + 1);
    let mut value = Vec::with_capacity(resolution + 1);
    let mut slope = Vec::with_capacity(resolution + 1);
    for i in 0..=resolution {
        let t = i as f64 / resolution as f64;
        t_grid.push(t);
        value.push(f.eval(t).map_err(|e| e.to_string())?);
        let t_slope = t.min(1.0 - 1e-9);
        slope.push(f.derivative(t_slope).map_err(|e| e.to_string())?);
    }
    serde_json::to_string(&serde_json::json!({
        "level": f.level, "z": f.z, "l": f.l, "s": f.s, "m": f.m,
        "t": t_grid, "value": value, "slope": slope,
    }))
    .map_err(|e| e.to_string())
}

/// Cross section of the level-n unit ball in the plane of two axes, with
/// the comparison diamond and its dilate for the equivalence sandwich.
/// JSON: {"level", "dilate", "px", "py", "inner_px", "inner_py"}.
#[wasm_bindgen]
pub fn ball_slice(
    levels: u32,
    level: u32,
    u_axis: &str,
    v_axis: &str,
    resolution: u32,
) -> Result<String, String> {
    let space = demo_space(levels as usize)?;
    let u = parse_direction(&space, u_axis)?;
    let v = parse_direction(&space, v_axis)?;
    let span = u.trimmed().degree().max(v.trimmed().degree()).max(1);
    let level = (level as usize).clamp(span, space.max_level());
    let resolution = resolution.clamp(8, 2880) as usize;
    let tower = unit_sphere_slice(&space, &u, &v, level, resolution).map_err(|e| e.to_string())?;
    let diamond = comparison_slice(&space, &u, &v, level, resolution).map_err(|e| e.to_string())?;
    let dilate = 1.0 + space.schedule.linear_offset(level);
    let px: Vec<f64> = tower.points.iter().map(|p| p.px).collect();
    let py: Vec<f64> = tower.points.iter().map(|p| p.py).collect();
    let inner_px: Vec<f64> = diamond.points.iter().map(|p| p.px).collect();
    let inner_py: Vec<f64> = diamond.points.iter().map(|p| p.py).collect();
    serde_json::to_string(&serde_json::json!({
        "level": level, "dilate": dilate,
        "px": px, "py": py, "inner_px": inner_px, "inner_py": inner_py,
    }))
    .map_err(|e| e.to_string())
}

/// Smoothness certificate at a seeded random unit vector: symmetric
/// difference quotients at steps 2^-k and the two one-sided derivative
/// estimates along a seeded random direction.
/// JSON: {"k": [...], "quotient": [...], "right", "left", "gateaux"}.
#[wasm_bindgen]
pub fn smoothness_trail(seed: u32, degree: u32, k_max: u32) -> Result<String, String> {
    let space = demo_space(48)?;
    let degree = (degree as usize).clamp(1, 30);
    let x = random_vector(&space, degree, SampleStyle::UnitSphere, seed as u64)
        .map_err(|e| e.to_string())?;
    let h_raw = random_vector(
        &space,
        degree.min(8),
        SampleStyle::Generic,
        seed as u64 ^ 0x5eed,
    )
    .map_err(|e| e.to_string())?;
    let h_norm = octnorm_core::tower_norm(&space, &h_raw).map_err(|e| e.to_string())?;
    if h_norm == 0.0 {
        return Err("degenerate direction draw; try another seed".into());
    }
    let h = h_raw.scale(1.0 / h_norm);
    let k_max = k_max.clamp(4, 30);
    let mut ks = Vec::new();
    let mut quotients = Vec::new();
    for k in 0..=k_max {
        let t = 0.5f64.powi(k as i32);
        let q = symmetric_quotient(&space, &x, &h, t).map_err(|e| e.to_string())?;
        ks.push(k);
        quotients.push(q.max(0.0));
    }
    let estimate = directional_derivative(&space, &x, &h, &StepSchedule::default(), 1e-6)
        .map_err(|e| e.to_string())?;
    serde_json::to_string(&serde_json::json!({
        "k": ks, "quotient": quotients,
        "right": estimate.right, "left": estimate.left, "gateaux": estimate.gateaux,
    }))
    .map_err(|e| e.to_string())
}
