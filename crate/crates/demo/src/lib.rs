//! Browser bindings: alternating projections, constant estimates and normal
//! cones for a few planar set pairs chosen by name and angle.
//!
//! Pairs (`kind`): `"lines"` is the x-axis against a line at `angle`
//! degrees, `"cross"` is the union of both axes against that line, and
//! `"cap"` is the unit disk against the halfplane right of `cos(angle)`,
//! meeting at the boundary point at `angle`.

use transversality::altproj::{fit_rate_or_terminated, run_ap};
use transversality::constants::{geometric_radii, ConstantName, EstimatorConfig, ScenarioPair};
use transversality::normalcones::normal_cone_at;
use transversality::{SetRep, Vector};
use wasm_bindgen::prelude::*;

fn v(x: f64, y: f64) -> Vector {
    Vector::from_slice(&[x, y])
}

fn line_at(deg: f64) -> SetRep {
    let t = deg.to_radians();
    SetRep::line(v(0.0, 0.0), v(t.cos(), t.sin())).expect("unit direction")
}

/// The pair and its reference point.
fn pair(kind: &str, angle: f64) -> Result<(SetRep, SetRep, Vector), JsError> {
    if !angle.is_finite() {
        return Err(JsError::new("angle must be finite"));
    }
    let axis = |d: [f64; 2]| SetRep::line(v(0.0, 0.0), v(d[0], d[1])).expect("unit direction");
    Ok(match kind {
        "lines" => (axis([1.0, 0.0]), line_at(angle), v(0.0, 0.0)),
        "cross" => {
            let cross = SetRep::union(vec![axis([1.0, 0.0]), axis([0.0, 1.0])]).expect("two lines");
            (cross, line_at(angle), v(0.0, 0.0))
        }
        "cap" => {
            let t = angle.to_radians();
            if !(t.cos() > -0.99 && t.cos() < 0.99) {
                return Err(JsError::new("cap angle must keep the halfplane inside the disk"));
            }
            let disk = SetRep::ball(v(0.0, 0.0), 1.0).expect("positive radius");
            let half = SetRep::halfspace(v(-1.0, 0.0), -t.cos()).expect("nonzero normal");
            (disk, half, v(t.cos(), t.sin().abs()))
        }
        _ => return Err(JsError::new("kind must be lines, cross or cap")),
    })
}

/// Flattened iterates `x₀, b₀, x₁, b₁, …` of alternating projections from
/// `(x, y)`, followed by the fitted rate per cycle as the last entry.
#[wasm_bindgen]
pub fn ap_trace(kind: &str, angle: f64, x: f64, y: f64, max_iter: usize) -> Result<Vec<f64>, JsError> {
    let (a, b, _) = pair(kind, angle)?;
    let t = run_ap(&a, &b, &v(x, y), max_iter.clamp(1, 500), 1e-12).map_err(|e| JsError::new(&e.to_string()))?;
    let mut out = Vec::with_capacity(4 * t.x_seq.len() + 1);
    for (k, xk) in t.x_seq.iter().enumerate() {
        out.extend_from_slice(xk.coords());
        if let Some(bk) = t.b_seq.get(k) {
            out.extend_from_slice(bk.coords());
        }
    }
    out.push(fit_rate_or_terminated(&t).map(|f| f.c).unwrap_or(f64::NAN));
    Ok(out)
}

/// Names matching the entries of [`estimates`].
#[wasm_bindgen]
pub fn estimate_names() -> Vec<String> {
    ConstantName::ALL.iter().map(|n| n.as_str().to_string()).collect()
}

/// All constants at the reference point; `NaN` where an estimator does not
/// apply (itr_c on the cross).
#[wasm_bindgen]
pub fn estimates(kind: &str, angle: f64, samples: usize) -> Result<Vec<f64>, JsError> {
    let (a, b, xbar) = pair(kind, angle)?;
    let cfg = EstimatorConfig { radii: geometric_radii(0.5, 6), samples_per_radius: samples.clamp(100, 5000), ..Default::default() };
    let p = ScenarioPair::new(kind, a, b, xbar, cfg).map_err(|e| JsError::new(&e.to_string()))?;
    Ok(ConstantName::ALL.iter().map(|&n| p.estimate(n).map(|e| e.value).unwrap_or(f64::NAN)).collect())
}

/// The point of the first set (`which = 0`) or second set nearest to
/// `(x, y)`, then unit directions spanning the normal cone there:
/// `[px, py, d1x, d1y, d2x, d2y, …]`.
#[wasm_bindgen]
pub fn normals(kind: &str, angle: f64, which: u8, x: f64, y: f64) -> Result<Vec<f64>, JsError> {
    let (a, b, _) = pair(kind, angle)?;
    let s = if which == 0 { a } else { b };
    let err = |e: transversality::Error| JsError::new(&e.to_string());
    let p = s.project(&v(x, y)).map_err(err)?.nearest.remove(0);
    let cone = normal_cone_at(&s, &p).map_err(err)?;
    let mut out = p.coords().to_vec();
    for d in cone.extreme_directions() {
        out.extend_from_slice(d.coords());
    }
    Ok(out)
}
