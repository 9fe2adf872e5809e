#![allow(dead_code)]

use transversality::constants::{geometric_radii, EstimatorConfig};
use transversality::{SetRep, Vector};

pub fn v(c: &[f64]) -> Vector {
    Vector::from_slice(c)
}

pub fn origin(n: usize) -> Vector {
    Vector::zeros(n)
}

pub fn line_at(deg: f64) -> SetRep {
    let t = deg.to_radians();
    SetRep::line(origin(2), v(&[t.cos(), t.sin()])).unwrap()
}

pub fn xaxis() -> SetRep {
    SetRep::line(origin(2), v(&[1.0, 0.0])).unwrap()
}

pub fn yaxis() -> SetRep {
    SetRep::line(origin(2), v(&[0.0, 1.0])).unwrap()
}

pub fn cfg(samples: usize) -> EstimatorConfig {
    EstimatorConfig { radii: geometric_radii(0.5, 8), samples_per_radius: samples, ..Default::default() }
}

pub struct Case {
    pub name: &'static str,
    pub a: SetRep,
    pub b: SetRep,
    pub xbar: Vector,
}

pub fn convex_cases() -> Vec<Case> {
    let s = 0.75f64.sqrt();
    vec![
        Case { name: "orthogonal", a: xaxis(), b: yaxis(), xbar: origin(2) },
        Case { name: "lines45", a: xaxis(), b: line_at(45.0), xbar: origin(2) },
        Case { name: "same", a: xaxis(), b: xaxis(), xbar: origin(2) },
        Case {
            name: "tangent",
            a: SetRep::ball(v(&[-1.0, 0.0]), 1.0).unwrap(),
            b: SetRep::ball(v(&[1.0, 0.0]), 1.0).unwrap(),
            xbar: origin(2),
        },
        Case {
            name: "cap",
            a: SetRep::ball(origin(2), 1.0).unwrap(),
            b: SetRep::halfspace(v(&[-1.0, 0.0]), -0.5).unwrap(),
            xbar: v(&[0.5, s]),
        },
        Case {
            name: "halfplanes",
            a: SetRep::halfspace(v(&[0.0, -1.0]), 0.0).unwrap(),
            b: SetRep::halfspace(v(&[0.0, 1.0]), 0.0).unwrap(),
            xbar: origin(2),
        },
        Case {
            name: "plane_line_3d",
            a: SetRep::affine(origin(3), &[v(&[1.0, 0.0, 0.0]), v(&[0.0, 1.0, 0.0])]).unwrap(),
            b: SetRep::line(origin(3), v(&[0.0, 1.0, 1.0])).unwrap(),
            xbar: origin(3),
        },
    ]
}

pub fn cross_vs_60() -> Case {
    Case { name: "cross60", a: SetRep::union(vec![xaxis(), yaxis()]).unwrap(), b: line_at(60.0), xbar: origin(2) }
}
