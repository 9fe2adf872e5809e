//! Alternating projections `x_{k+1} ∈ P_A P_B(x_k)`, R-linear rate fitting
//! and the rate bounds in terms of `str`.

use std::ops::Range;

use serde::Serialize;

use crate::constants::{link, CheckLink, CheckReport, ConstantEstimate};
use crate::error::{Error, Result};
use crate::geometry::{check_dims, Vector};
use crate::projections::{intersect, SetRep};

/// Values below this are treated as exact zeros when fitting.
pub const FIT_FLOOR: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct APTrace {
    pub x_seq: Vec<Vector>,
    pub b_seq: Vec<Vector>,
    /// `x_0, b_0, x_1, b_1, …`
    pub z_seq: Vec<Vector>,
    /// `d(x_k, A∩B)`
    pub d_int: Vec<f64>,
    /// `‖z_{k+1} − z_k‖`
    pub step_norms: Vec<f64>,
    pub converged: bool,
    pub limit: Option<Vector>,
    pub stop_tol: f64,
}

impl APTrace {
    /// Iterates below this are dominated by round-off.
    pub fn noise_floor(&self) -> f64 {
        10.0 * self.stop_tol
    }

    pub fn iterations(&self) -> usize {
        self.b_seq.len()
    }
}

/// Runs alternating projections from `x0` (first projected onto `A`).
/// Ties in nonconvex projections go to the first nearest point listed.
/// `x_k ∈ A` throughout, `d_int[k] = d(x_k, A∩B)`.
pub fn run_ap(a: &SetRep, b: &SetRep, x0: &Vector, max_iter: usize, stop_tol: f64) -> Result<APTrace> {
    check_dims(a.dim(), &[x0])?;
    check_dims(b.dim(), &[x0])?;
    if !x0.is_finite() {
        return Err(Error::NonFinite);
    }
    if !(stop_tol >= 0.0 && stop_tol.is_finite()) {
        return Err(Error::Argument(format!("stop_tol must be finite and nonnegative, got {stop_tol}")));
    }
    let inter = intersect(a, b)?;

    let mut x = first_nearest(a, x0)?;
    let mut trace = APTrace {
        x_seq: Vec::new(),
        b_seq: Vec::new(),
        z_seq: Vec::new(),
        d_int: Vec::new(),
        step_norms: Vec::new(),
        converged: false,
        limit: None,
        stop_tol,
    };
    for k in 0..=max_iter {
        let d = inter.distance(&x)?;
        trace.d_int.push(d);
        trace.x_seq.push(x.clone());
        trace.z_seq.push(x.clone());
        if d < stop_tol || d == 0.0 {
            trace.converged = true;
            trace.limit = Some(x);
            break;
        }
        if k == max_iter {
            break;
        }
        let bk = first_nearest(b, &x)?;
        let next = first_nearest(a, &bk)?;
        trace.step_norms.push(x.dist(&bk));
        trace.step_norms.push(bk.dist(&next));
        trace.z_seq.push(bk.clone());
        trace.b_seq.push(bk);
        x = next;
    }
    Ok(trace)
}

/// First listed minimizer. Projections list every point within the absolute
/// tie tolerance, which at small scales includes points that are not
/// nearest, so only points attaining the distance up to relative round-off
/// count as ties here.
fn first_nearest(s: &SetRep, x: &Vector) -> Result<Vector> {
    let mut p = s.project(x)?;
    let tol = p.dist * 1e-12 + f64::MIN_POSITIVE;
    let i = p.nearest.iter().position(|q| x.dist(q) <= p.dist + tol).unwrap_or(0);
    Ok(p.nearest.swap_remove(i))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RateFit {
    pub c: f64,
    pub alpha: f64,
    /// Root-mean-square residual of the log fit.
    pub residual: f64,
    pub window: Range<usize>,
}

impl RateFit {
    /// The fit used for a trace that reached the intersection in finitely
    /// many steps.
    pub fn terminated(trace: &APTrace) -> Self {
        let alpha = trace.d_int.first().copied().unwrap_or(0.0).max(FIT_FLOOR);
        RateFit { c: 0.0, alpha, residual: 0.0, window: 0..trace.d_int.len() }
    }
}

/// Least-squares fit of `log d_k ≈ log α + k log c` over the last half of
/// the iterates with `d_k ≥ 1e-12`.
pub fn fit_rate(trace: &APTrace) -> Result<RateFit> {
    fit_sequence(&trace.d_int)
}

/// Like [`fit_rate`], but a trace that converged before four positive
/// values accumulated gets `c = 0`.
pub fn fit_rate_or_terminated(trace: &APTrace) -> Result<RateFit> {
    match fit_rate(trace) {
        Err(Error::InsufficientData(_)) if trace.converged => Ok(RateFit::terminated(trace)),
        r => r,
    }
}

pub fn fit_sequence(d: &[f64]) -> Result<RateFit> {
    let usable = d.iter().take_while(|v| **v >= FIT_FLOOR && v.is_finite()).count();
    if usable < 4 {
        return Err(Error::InsufficientData(format!("{usable} usable values, need at least 4")));
    }
    let start = usable / 2;
    let window = start..usable;
    let pts: Vec<(f64, f64)> = window.clone().map(|k| (k as f64, d[k].ln())).collect();
    let m = pts.len() as f64;
    let mk = pts.iter().map(|p| p.0).sum::<f64>() / m;
    let ml = pts.iter().map(|p| p.1).sum::<f64>() / m;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mk).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mk) * (p.1 - ml)).sum();
    let slope = sxy / sxx;
    let icpt = ml - slope * mk;
    let residual = (pts.iter().map(|p| (p.1 - icpt - slope * p.0).powi(2)).sum::<f64>() / m).sqrt();
    Ok(RateFit { c: slope.exp().clamp(0.0, 1.0), alpha: icpt.exp(), residual, window })
}

/// `d_{k+1} ≤ c·d_k` for every `k` with `d_k` above the noise floor.
pub fn check_linear_monotone(trace: &APTrace, c: f64) -> bool {
    let floor = trace.noise_floor();
    trace.d_int.windows(2).filter(|w| w[0] > floor).all(|w| w[1] <= c * w[0] + 1e-15)
}

/// `‖z_{k+2}−z_{k+1}‖ ≤ ‖z_{k+1}−z_k‖` and
/// `‖z_{2k+2}−z_{2k+1}‖ ≤ c‖z_{2k+1}−z_{2k}‖` above the noise floor.
pub fn check_joining_conditions(trace: &APTrace, c: f64) -> bool {
    let floor = trace.noise_floor();
    let s = &trace.step_norms;
    let nonincreasing = s.windows(2).filter(|w| w[0] > floor).all(|w| w[1] <= w[0] * (1.0 + 1e-12));
    let contracting = s.chunks_exact(2).filter(|w| w[0] > floor).all(|w| w[1] <= c * w[0] + 1e-15);
    nonincreasing && contracting
}

/// Smallest `c` for which the monotonicity condition holds on the trace.
pub fn empirical_monotone_constant(trace: &APTrace) -> f64 {
    let floor = trace.noise_floor();
    trace.d_int.windows(2).filter(|w| w[0] > floor).map(|w| w[1] / w[0]).fold(0.0, f64::max)
}

/// Smallest `c` for which the second joining condition holds on the trace.
pub fn empirical_joining_constant(trace: &APTrace) -> f64 {
    let floor = trace.noise_floor();
    trace.step_norms.chunks_exact(2).filter(|w| w[0] > floor).map(|w| w[1] / w[0]).fold(0.0, f64::max)
}

/// Convex pairs: `c ≤ 1 − str²` and `str ≥ (1−c)/(3−c)` with the fitted
/// rate. Nonconvex pairs: `str ≥ (1−c)/(5−c)` where `c` is the smallest
/// constant in `]0,1[` for which the trace is linear monotone or satisfies
/// the joining conditions; if neither holds the link is not applicable.
pub fn verify_rate_bounds(
    str_est: &ConstantEstimate,
    trace: &APTrace,
    fit: &RateFit,
    convex: bool,
    slack: f64,
) -> CheckReport {
    let s = str_est.value;
    let mut links = Vec::new();
    if convex {
        links.push(link("c <= 1 - str^2", fit.c, 1.0 - s * s, slack));
        if fit.c < 1.0 {
            links.push(link("(1-c)/(3-c) <= str", (1.0 - fit.c) / (3.0 - fit.c), s, slack));
        }
    } else {
        let mut candidates = Vec::new();
        let cm = empirical_monotone_constant(trace);
        if cm < 1.0 && check_linear_monotone(trace, cm) {
            candidates.push(cm);
        }
        let cj = empirical_joining_constant(trace);
        if cj < 1.0 && check_joining_conditions(trace, cj) {
            candidates.push(cj);
        }
        match candidates.into_iter().reduce(f64::min) {
            Some(c) => links.push(link("(1-c)/(5-c) <= str", (1.0 - c) / (5.0 - c), s, slack)),
            None => links.push(CheckLink {
                name: "(1-c)/(5-c) <= str".into(),
                lhs: f64::NAN,
                rhs: s,
                margin: f64::NAN,
                pass: true,
                applicable: false,
            }),
        }
    }
    CheckReport { name: "rate_bounds".into(), links }
}
