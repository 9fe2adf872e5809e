//! Seeded random streams and uniform samplers on balls and spheres.
//!
//! Each sample draws from its own generator keyed by
//! `(seed, stream, scale index, sample index)`, so results do not depend on
//! how work is split across threads and enlarging the sample count only
//! appends samples.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::geometry::Vector;

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn sample_rng(seed: u64, stream: u64, scale: usize, index: usize) -> ChaCha8Rng {
    let mut h = splitmix(seed);
    for part in [stream, scale as u64, index as u64] {
        h = splitmix(h ^ part);
    }
    ChaCha8Rng::seed_from_u64(h)
}

/// Evaluates `f(i, rng_i)` for `i < n`, in parallel when the `parallel`
/// feature is on. Output order is the sample order either way.
pub fn map_samples<T, F>(n: usize, seed: u64, stream: u64, scale: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize, &mut ChaCha8Rng) -> T + Sync,
{
    let one = |i: usize| {
        let mut rng = sample_rng(seed, stream, scale, i);
        f(i, &mut rng)
    };
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        (0..n).into_par_iter().map(one).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..n).map(one).collect()
    }
}

/// Uniform point on the unit sphere of ℝⁿ.
pub fn unit_sphere<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vector {
    loop {
        let g: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
        if let Some(u) = Vector::from_slice(&g).normalized() {
            return u;
        }
    }
}

/// Uniform point in the closed ball of the given radius.
pub fn uniform_ball<R: Rng + ?Sized>(rng: &mut R, center: &Vector, radius: f64) -> Vector {
    let n = center.dim();
    let u = unit_sphere(rng, n);
    let r = radius * rng.random::<f64>().powf(1.0 / n as f64);
    center + &u.scale(r)
}

/// Uniform radius in `[0, radius]` along a uniform direction; puts more mass
/// near the center than [`uniform_ball`], which helps for limits at a point.
pub fn radial_ball<R: Rng + ?Sized>(rng: &mut R, center: &Vector, radius: f64) -> Vector {
    let u = unit_sphere(rng, center.dim());
    let r = radius * rng.random::<f64>();
    center + &u.scale(r)
}
