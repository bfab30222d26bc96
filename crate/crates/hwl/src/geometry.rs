//! Observation windows, homothetic shells, uniform interior sampling and
//! velocity-weighted boundary sampling.
//!
//! A window `Δ(1)` is rescaled through the homothety `Δ(s) = x_c + s(Δ(1) −
//! x_c)` about its homothety center `x_c`. Volumes are parameterized
//! linearly: `|Δ(t^{1/n})| = t·|Δ(1)|`. The shell for `(t, h)` is
//! `Δ((t+h)^{1/n}) \ Δ(t^{1/n})` and has volume `h·|Δ(1)|` exactly.

use crate::error::{domain, Result};
use crate::rng::{self, standard_normal};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use std::f64::consts::{PI, TAU};

/// Maximum supported coordinate dimension.
pub const MAX_DIM: usize = 8;

/// A point in at most [`MAX_DIM`] dimensions; unused coordinates are zero.
pub type Point = [f64; MAX_DIM];

pub fn dist(a: &Point, b: &Point, dim: usize) -> f64 {
    let mut s = 0.0;
    for i in 0..dim {
        let d = a[i] - b[i];
        s += d * d;
    }
    s.sqrt()
}

/// Volume of the unit ball in `n` dimensions.
pub fn unit_ball_volume(n: usize) -> f64 {
    PI.powf(n as f64 / 2.0) / crate::analysis::gamma(n as f64 / 2.0 + 1.0)
}

/// Surface area of the unit sphere in `n` dimensions.
pub fn unit_sphere_area(n: usize) -> f64 {
    n as f64 * unit_ball_volume(n)
}

/// Observation window shapes from the supported catalog.
#[derive(Clone, Debug, PartialEq)]
pub enum Window {
    /// `[0, 1]` with homothety center 0, so `Δ(s) = [0, s]`.
    Interval,
    /// Unit ball centered at the origin with homothety center `center`
    /// (`‖center‖ < 1`), so `Δ(s)` is the ball of radius `s` centered at
    /// `(1−s)·center`.
    Ball { dim: usize, center: Point },
    /// Axis-aligned cube `[−1, 1]^n` with centered homothety, `Δ(s) = [−s, s]^n`.
    Cube { dim: usize },
}

impl Window {
    pub fn interval() -> Window {
        Window::Interval
    }

    pub fn ball(dim: usize) -> Result<Window> {
        Self::ball_offcenter(dim, &[])
    }

    /// Ball with an off-center homothety center (coordinates of `center`
    /// beyond `center.len()` are zero).
    pub fn ball_offcenter(dim: usize, center: &[f64]) -> Result<Window> {
        if dim == 0 || dim > MAX_DIM {
            return domain(format!("ball dimension {dim} out of supported range"));
        }
        let mut c: Point = [0.0; MAX_DIM];
        c[..center.len()].copy_from_slice(center);
        let norm = dist(&c, &[0.0; MAX_DIM], dim);
        if norm >= 1.0 {
            return domain("homothety center must lie in the interior of the ball");
        }
        Ok(Window::Ball { dim, center: c })
    }

    pub fn cube(dim: usize) -> Result<Window> {
        if dim == 0 || dim > 3 {
            return domain(format!("cube dimension {dim} unsupported (1..=3)"));
        }
        Ok(Window::Cube { dim })
    }

    pub fn dim(&self) -> usize {
        match self {
            Window::Interval => 1,
            Window::Ball { dim, .. } => *dim,
            Window::Cube { dim } => *dim,
        }
    }

    /// `|Δ(1)|`.
    pub fn unit_volume(&self) -> f64 {
        match self {
            Window::Interval => 1.0,
            Window::Ball { dim, .. } => unit_ball_volume(*dim),
            Window::Cube { dim } => 2f64.powi(*dim as i32),
        }
    }

    /// `|Δ(t^{1/n})| = t·|Δ(1)|`.
    pub fn volume(&self, t: f64) -> Result<f64> {
        if t < 0.0 {
            return domain("volume parameter t must be nonnegative");
        }
        Ok(t * self.unit_volume())
    }

    /// Homothety scale `s = t^{1/n}` for the volume parameter `t`.
    pub fn scale(&self, t: f64) -> f64 {
        t.powf(1.0 / self.dim() as f64)
    }

    /// Membership in `Δ(s)` for the homothety scale `s`.
    pub fn contains_scaled(&self, s: f64, p: &Point) -> bool {
        if s <= 0.0 {
            return false;
        }
        match self {
            Window::Interval => 0.0 <= p[0] && p[0] <= s,
            Window::Ball { dim, center } => {
                let mut d2 = 0.0;
                for i in 0..*dim {
                    let d = p[i] - (1.0 - s) * center[i];
                    d2 += d * d;
                }
                d2 <= s * s
            }
            Window::Cube { dim } => p[..*dim].iter().all(|x| x.abs() <= s),
        }
    }

    /// Radius of the largest ball centered at the homothety center that is
    /// contained in `Δ(1)` (used by the lower-bound construction).
    pub fn inradius_at_center(&self) -> f64 {
        match self {
            Window::Interval => 0.0,
            Window::Ball { dim, center } => 1.0 - dist(center, &[0.0; MAX_DIM], *dim),
            Window::Cube { .. } => 1.0,
        }
    }

    pub fn shell(&self, t: f64, h: f64) -> Result<ShellRegion> {
        ShellRegion::new(self.clone(), t, h)
    }

    /// Name used in CSV metadata.
    pub fn name(&self) -> String {
        match self {
            Window::Interval => "interval".into(),
            Window::Ball { dim: 2, center } if center.iter().all(|&c| c == 0.0) => "disk".into(),
            Window::Ball { dim, center } if center.iter().all(|&c| c == 0.0) => {
                format!("ball{dim}")
            }
            Window::Ball { dim, .. } => format!("ball{dim}-offcenter"),
            Window::Cube { dim: 2 } => "square".into(),
            Window::Cube { dim } => format!("cube{dim}"),
        }
    }

    fn is_centered_ball(&self) -> bool {
        matches!(self, Window::Ball { dim, center } if center[..*dim].iter().all(|&c| c == 0.0))
    }
}

/// The annular set `Δ((t+h)^{1/n}) \ Δ(t^{1/n})`.
#[derive(Clone, Debug)]
pub struct ShellRegion {
    pub window: Window,
    pub t: f64,
    pub h: f64,
    s_in: f64,
    s_out: f64,
}

impl ShellRegion {
    pub fn new(window: Window, t: f64, h: f64) -> Result<ShellRegion> {
        if t < 0.0 {
            return domain("shell inner parameter t must be nonnegative");
        }
        if h <= 0.0 {
            return domain("shell thickness h must be positive");
        }
        let s_in = window.scale(t);
        let s_out = window.scale(t + h);
        Ok(ShellRegion { window, t, h, s_in, s_out })
    }

    pub fn dim(&self) -> usize {
        self.window.dim()
    }

    /// Exact volume `h·|Δ(1)|`.
    pub fn volume(&self) -> f64 {
        self.h * self.window.unit_volume()
    }

    /// `t + h` exceeds the process domain `[0, 1]` (allowed for scaling
    /// studies, flagged).
    pub fn beyond_process_domain(&self) -> bool {
        self.t + self.h > 1.0 + 1e-12
    }

    pub fn contains(&self, p: &Point) -> bool {
        self.window.contains_scaled(self.s_out, p) && !self.window.contains_scaled(self.s_in, p)
    }

    /// Number of unit-cube coordinates consumed by [`Self::from_unit`], or
    /// `None` when no fixed-consumption inverse transform is available.
    pub fn unit_dims(&self) -> Option<usize> {
        match &self.window {
            Window::Interval => Some(1),
            Window::Ball { dim, center } if center[..*dim].iter().all(|&c| c == 0.0) => {
                if *dim <= 3 {
                    Some(*dim)
                } else {
                    None
                }
            }
            Window::Ball { .. } => None,
            Window::Cube { dim } => Some(dim + 1),
        }
    }

    /// Maps a point of the unit cube to a uniform point of the shell.
    ///
    /// Exact inverse transforms: radial inversion for centered balls
    /// (radius CDF `∝ r^n` between the shell radii), slab decomposition for
    /// cubes. Consumption is fixed, so low-discrepancy inputs stay aligned
    /// and identically seeded runs at different `(t, h)` stay coupled.
    pub fn from_unit(&self, u: &[f64]) -> Point {
        let mut p: Point = [0.0; MAX_DIM];
        match &self.window {
            Window::Interval => {
                p[0] = self.t + u[0] * self.h;
            }
            Window::Ball { dim, .. } => {
                let r = (self.t + u[0] * self.h).powf(1.0 / *dim as f64);
                match dim {
                    1 => {
                        // 1-ball: split u[0] into a sign bit and a radius draw.
                        let (sign, uu) =
                            if u[0] < 0.5 { (-1.0, 2.0 * u[0]) } else { (1.0, 2.0 * u[0] - 1.0) };
                        p[0] = sign * (self.t + uu * self.h);
                    }
                    2 => {
                        let (s, c) = (TAU * u[1]).sin_cos();
                        p[0] = r * c;
                        p[1] = r * s;
                    }
                    3 => {
                        let z = 2.0 * u[1] - 1.0;
                        let rho = (1.0 - z * z).max(0.0).sqrt();
                        let (s, c) = (TAU * u[2]).sin_cos();
                        p[0] = r * rho * c;
                        p[1] = r * rho * s;
                        p[2] = r * z;
                    }
                    _ => unreachable!("from_unit on ball dim > 3"),
                }
            }
            Window::Cube { dim } => {
                let n = *dim;
                let a = self.s_in;
                let b = self.s_out;
                // Disjoint slabs: slab k is {|x_j| ≤ a for j < k, a < |x_k| ≤ b},
                // intersected with the outer cube.
                let mut vols = [0.0; 3];
                let mut total = 0.0;
                for k in 0..n {
                    let v = (2.0 * a).powi(k as i32) * 2.0 * (b - a) * (2.0 * b).powi((n - 1 - k) as i32);
                    vols[k] = v;
                    total += v;
                }
                let mut pick = u[0] * total;
                let mut k = n - 1;
                for (i, v) in vols[..n].iter().enumerate() {
                    if pick < *v {
                        k = i;
                        break;
                    }
                    pick -= v;
                }
                // Reuse the residual of u[0] for the sign of coordinate k.
                let sign = if pick / vols[k] < 0.5 { -1.0 } else { 1.0 };
                for (j, pj) in p[..n].iter_mut().enumerate() {
                    let uj = u[1 + j];
                    *pj = match j.cmp(&k) {
                        std::cmp::Ordering::Less => a * (2.0 * uj - 1.0),
                        std::cmp::Ordering::Equal => sign * (a + uj * (b - a)),
                        std::cmp::Ordering::Greater => b * (2.0 * uj - 1.0),
                    };
                }
            }
        }
        p
    }

    /// Draws one uniform point of the shell.
    pub fn sample_point(&self, rng: &mut ChaCha8Rng) -> Point {
        if let Some(k) = self.unit_dims() {
            let mut u = [0.0; MAX_DIM + 1];
            for v in u[..k].iter_mut() {
                *v = rng.gen::<f64>();
            }
            return self.from_unit(&u[..k]);
        }
        match &self.window {
            Window::Ball { dim, center } => {
                let n = *dim;
                let centered = center[..n].iter().all(|&c| c == 0.0);
                if centered {
                    // dim > 3: radial inversion + Gaussian direction.
                    let r = (self.t + rng.gen::<f64>() * self.h).powf(1.0 / n as f64);
                    loop {
                        let mut p: Point = [0.0; MAX_DIM];
                        let mut norm2 = 0.0;
                        for v in p[..n].iter_mut() {
                            *v = standard_normal(rng);
                            norm2 += *v * *v;
                        }
                        if norm2 > 0.0 {
                            let scale = r / norm2.sqrt();
                            for v in p[..n].iter_mut() {
                                *v *= scale;
                            }
                            return p;
                        }
                    }
                }
                // Off-center homothety: rejection from the outer ball.
                let out_c: Point = {
                    let mut c = [0.0; MAX_DIM];
                    for i in 0..n {
                        c[i] = (1.0 - self.s_out) * center[i];
                    }
                    c
                };
                loop {
                    let r = self.s_out * rng.gen::<f64>().powf(1.0 / n as f64);
                    let mut p: Point = [0.0; MAX_DIM];
                    match n {
                        2 => {
                            let (s, c) = (TAU * rng.gen::<f64>()).sin_cos();
                            p[0] = out_c[0] + r * c;
                            p[1] = out_c[1] + r * s;
                        }
                        3 => {
                            let z = 2.0 * rng.gen::<f64>() - 1.0;
                            let rho = (1.0 - z * z).max(0.0).sqrt();
                            let (s, c) = (TAU * rng.gen::<f64>()).sin_cos();
                            p[0] = out_c[0] + r * rho * c;
                            p[1] = out_c[1] + r * rho * s;
                            p[2] = out_c[2] + r * z;
                        }
                        _ => {
                            let mut norm2 = 0.0;
                            for v in p[..n].iter_mut() {
                                *v = standard_normal(rng);
                                norm2 += *v * *v;
                            }
                            let scale = r / norm2.sqrt().max(f64::MIN_POSITIVE);
                            for (i, v) in p[..n].iter_mut().enumerate() {
                                *v = out_c[i] + *v * scale;
                            }
                        }
                    }
                    if !self.window.contains_scaled(self.s_in, &p) {
                        return p;
                    }
                }
            }
            _ => unreachable!(),
        }
    }
}

/// Draws `count` i.i.d. uniform points of the region. Deterministic given
/// `(seed, count)` and independent of worker count.
pub fn sample_uniform(region: &ShellRegion, count: usize, seed: u64) -> Result<Vec<Point>> {
    if count == 0 {
        return domain("sample count must be positive");
    }
    let chunks = rng::par_chunks(seed, count, |rng, len| {
        (0..len).map(|_| region.sample_point(rng)).collect::<Vec<_>>()
    });
    Ok(chunks.into_iter().flatten().collect())
}

/// Draws one point on `∂Δ(t^{1/n})` with density proportional to the
/// outward-normal component of the homothety velocity.
///
/// For centered balls and cubes the density is uniform on the boundary; for
/// an off-center ball the density at direction `ω` is proportional to
/// `1 − ⟨c, ω⟩` and is realized by rejection against the uniform measure.
pub fn boundary_point(window: &Window, t: f64, rng: &mut ChaCha8Rng) -> Point {
    let s = window.scale(t);
    let mut p: Point = [0.0; MAX_DIM];
    match window {
        Window::Interval => {
            // Velocity vanishes at the fixed endpoint 0; all mass at s.
            p[0] = s;
        }
        Window::Ball { dim, center } => {
            let n = *dim;
            let cnorm = dist(center, &[0.0; MAX_DIM], n);
            loop {
                let mut w: Point = [0.0; MAX_DIM];
                match n {
                    1 => w[0] = if rng.gen::<f64>() < 0.5 { -1.0 } else { 1.0 },
                    2 => {
                        let (si, co) = (TAU * rng.gen::<f64>()).sin_cos();
                        w[0] = co;
                        w[1] = si;
                    }
                    3 => {
                        let z = 2.0 * rng.gen::<f64>() - 1.0;
                        let rho = (1.0 - z * z).max(0.0).sqrt();
                        let (si, co) = (TAU * rng.gen::<f64>()).sin_cos();
                        w[0] = rho * co;
                        w[1] = rho * si;
                        w[2] = z;
                    }
                    _ => {
                        let mut norm2 = 0.0;
                        for v in w[..n].iter_mut() {
                            *v = standard_normal(rng);
                            norm2 += *v * *v;
                        }
                        let inv = 1.0 / norm2.sqrt().max(f64::MIN_POSITIVE);
                        for v in w[..n].iter_mut() {
                            *v *= inv;
                        }
                    }
                }
                if cnorm > 0.0 {
                    let dotp: f64 = (0..n).map(|i| center[i] * w[i]).sum();
                    let accept = (1.0 - dotp) / (1.0 + cnorm);
                    if rng.gen::<f64>() >= accept {
                        continue;
                    }
                }
                for i in 0..n {
                    p[i] = (1.0 - s) * center[i] + s * w[i];
                }
                return p;
            }
        }
        Window::Cube { dim } => {
            let n = *dim;
            // 2n faces of equal area; normal velocity is constant on the
            // whole boundary under centered homothety.
            let f = rng.gen_range(0..2 * n);
            let axis = f / 2;
            let sign = if f % 2 == 0 { -1.0 } else { 1.0 };
            for (j, pj) in p[..n].iter_mut().enumerate() {
                *pj = if j == axis { sign * s } else { s * (2.0 * rng.gen::<f64>() - 1.0) };
            }
        }
    }
    p
}

/// Draws `count` velocity-weighted boundary points on `∂Δ(t^{1/n})`.
pub fn boundary_sample(window: &Window, t: f64, count: usize, seed: u64) -> Result<Vec<Point>> {
    if t <= 0.0 {
        return domain("boundary sampling requires t > 0 (degenerate boundary)");
    }
    if count == 0 {
        return domain("sample count must be positive");
    }
    let _ = window.is_centered_ball();
    let chunks = rng::par_chunks(seed, count, |rng, len| {
        (0..len).map(|_| boundary_point(window, t, rng)).collect::<Vec<_>>()
    });
    Ok(chunks.into_iter().flatten().collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn origin() -> Point {
        [0.0; MAX_DIM]
    }

    #[test]
    fn volume_scaling() {
        let disk = Window::ball(2).unwrap();
        assert!((disk.volume(1.0).unwrap() - PI).abs() < 1e-14);
        let square = Window::cube(2).unwrap();
        assert!((square.volume(0.25).unwrap() - 1.0).abs() < 1e-14);
        assert!((Window::Interval.volume(0.3).unwrap() - 0.3).abs() < 1e-14);
        assert!(Window::Interval.volume(-0.1).is_err());
    }

    #[test]
    fn shell_volume_exact() {
        for w in [Window::ball(2).unwrap(), Window::cube(3).unwrap(), Window::Interval] {
            for (t, h) in [(0.0, 1.0), (0.5, 0.5), (0.2, 0.1), (3.0, 0.02)] {
                let sh = w.shell(t, h).unwrap();
                assert!((sh.volume() - h * w.unit_volume()).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn shell_rejects_bad_params() {
        let w = Window::ball(2).unwrap();
        assert!(w.shell(0.5, 0.0).is_err());
        assert!(w.shell(-0.1, 0.5).is_err());
    }

    #[test]
    fn full_disk_shell_is_disk() {
        let w = Window::ball(2).unwrap();
        let sh = w.shell(0.0, 1.0).unwrap();
        assert!((sh.volume() - PI).abs() < 1e-14);
        assert!(sh.contains(&{
            let mut p = origin();
            p[0] = 0.9;
            p
        }));
    }

    #[test]
    fn interval_shell_is_translated_segment() {
        let sh = Window::Interval.shell(0.2, 0.1).unwrap();
        let mut p = origin();
        p[0] = 0.25;
        assert!(sh.contains(&p));
        p[0] = 0.15;
        assert!(!sh.contains(&p));
        p[0] = 0.35;
        assert!(!sh.contains(&p));
    }

    #[test]
    fn annulus_containment_matches_radii() {
        let w = Window::ball(2).unwrap();
        let sh = w.shell(0.5, 0.5).unwrap();
        let mut p = origin();
        p[0] = 0.8; // inside: sqrt(0.5)≈0.707 < 0.8 < 1
        assert!(sh.contains(&p));
        p[0] = 0.5;
        assert!(!sh.contains(&p));
        p[0] = 1.01;
        assert!(!sh.contains(&p));
    }

    #[test]
    fn uniform_sample_means() {
        // centered disk shell: mean -> (0,0)
        let sh = Window::ball(2).unwrap().shell(0.3, 0.4).unwrap();
        let pts = sample_uniform(&sh, 100_000, 7).unwrap();
        let n = pts.len() as f64;
        let mx: f64 = pts.iter().map(|p| p[0]).sum::<f64>() / n;
        let my: f64 = pts.iter().map(|p| p[1]).sum::<f64>() / n;
        // |x| < s_out <= 1: stderr < 1/sqrt(n)
        let se = 3.0 / n.sqrt();
        assert!(mx.abs() < se && my.abs() < se, "mx={mx} my={my}");

        // interval shell [0.2,0.3]: mean -> 0.25
        let sh = Window::Interval.shell(0.2, 0.1).unwrap();
        let pts = sample_uniform(&sh, 100_000, 8).unwrap();
        let m: f64 = pts.iter().map(|p| p[0]).sum::<f64>() / pts.len() as f64;
        let se = 3.0 * 0.1 / (12f64).sqrt() / (pts.len() as f64).sqrt();
        assert!((m - 0.25).abs() < se, "m={m}");
    }

    #[test]
    fn annulus_radial_fraction() {
        // annulus t=0.5,h=0.5: fraction with ||x||^2 < 0.75 is 0.5
        let sh = Window::ball(2).unwrap().shell(0.5, 0.5).unwrap();
        let pts = sample_uniform(&sh, 100_000, 9).unwrap();
        let frac = pts.iter().filter(|p| p[0] * p[0] + p[1] * p[1] < 0.75).count() as f64
            / pts.len() as f64;
        let se = 3.0 * 0.5 / (pts.len() as f64).sqrt();
        assert!((frac - 0.5).abs() < se, "frac={frac}");
    }

    #[test]
    fn cube_shell_sampling_in_region() {
        let w = Window::cube(3).unwrap();
        let sh = w.shell(0.4, 0.3).unwrap();
        let pts = sample_uniform(&sh, 20_000, 11).unwrap();
        for p in &pts {
            assert!(sh.contains(p));
        }
        // sub-box hit rate: volume fraction of the positive octant is 1/8
        let oct = pts.iter().filter(|p| p[0] > 0.0 && p[1] > 0.0 && p[2] > 0.0).count() as f64
            / pts.len() as f64;
        let se = 4.0 * (0.125f64 * 0.875 / pts.len() as f64).sqrt();
        assert!((oct - 0.125).abs() < se, "oct={oct}");
    }

    #[test]
    fn offcenter_shell_sampling_in_region() {
        let w = Window::ball_offcenter(2, &[0.3, 0.0]).unwrap();
        let sh = w.shell(0.3, 0.4).unwrap();
        let pts = sample_uniform(&sh, 20_000, 12).unwrap();
        for p in &pts {
            assert!(sh.contains(p));
        }
    }

    #[test]
    fn boundary_on_sphere_and_uniform_angle() {
        let w = Window::ball(2).unwrap();
        let pts = boundary_sample(&w, 1.0, 10_000, 5).unwrap();
        let mut angles: Vec<f64> = Vec::with_capacity(pts.len());
        for p in &pts {
            let r = (p[0] * p[0] + p[1] * p[1]).sqrt();
            assert!((r - 1.0).abs() < 1e-12);
            angles.push(p[1].atan2(p[0]).rem_euclid(TAU) / TAU);
        }
        // Kolmogorov-Smirnov against U(0,1); 1% critical value 1.63/sqrt(n).
        angles.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let n = angles.len() as f64;
        let ks = angles
            .iter()
            .enumerate()
            .map(|(i, a)| {
                let lo = (a - i as f64 / n).abs();
                let hi = ((i + 1) as f64 / n - a).abs();
                lo.max(hi)
            })
            .fold(0.0f64, f64::max);
        assert!(ks < 1.63 / n.sqrt(), "ks={ks}");
    }

    #[test]
    fn boundary_rotation_invariance_moments() {
        let w = Window::ball(3).unwrap();
        let pts = boundary_sample(&w, 1.0, 100_000, 6).unwrap();
        let n = pts.len() as f64;
        for i in 0..3 {
            let m: f64 = pts.iter().map(|p| p[i]).sum::<f64>() / n;
            // coordinate variance on the 2-sphere is 1/3
            let se = 4.0 * (1.0f64 / 3.0 / n).sqrt();
            assert!(m.abs() < se, "axis {i}: m={m}");
        }
    }

    #[test]
    fn offcenter_boundary_density_ratio() {
        // Remark-2 disk, x_c = (0.3, 0): density ∝ 1 − 0.3 cos θ, so the
        // ratio between θ=0 (nearest) and θ=π (farthest) is 0.7/1.3.
        let w = Window::ball_offcenter(2, &[0.3, 0.0]).unwrap();
        let pts = boundary_sample(&w, 1.0, 100_000, 13).unwrap();
        let width = 0.25f64; // angular half-width of the counting sectors
        let (mut near, mut far) = (0usize, 0usize);
        for p in &pts {
            // t=1: boundary is the unit circle itself
            let th = p[1].atan2(p[0]);
            if th.abs() < width {
                near += 1;
            } else if (th.abs() - PI).abs() < width {
                far += 1;
            }
        }
        // sector-averaged expected ratio
        let avg = |c: f64| 1.0 - 0.3 * c;
        let exp_ratio = avg((width).sin() / width) / avg(-(width).sin() / width);
        let ratio = near as f64 / far as f64;
        assert!((ratio / exp_ratio - 1.0).abs() < 0.05, "ratio={ratio} expected={exp_ratio}");
    }

    #[test]
    fn boundary_rejects_degenerate() {
        let w = Window::ball(2).unwrap();
        assert!(boundary_sample(&w, 0.0, 10, 1).is_err());
    }

    #[test]
    fn sampling_is_deterministic() {
        let sh = Window::cube(2).unwrap().shell(0.1, 0.5).unwrap();
        let a = sample_uniform(&sh, 40_000, 42).unwrap();
        let b = sample_uniform(&sh, 40_000, 42).unwrap();
        assert_eq!(a, b);
    }
}
