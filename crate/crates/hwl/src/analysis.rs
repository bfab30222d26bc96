//! Special functions and model constants: Hermite polynomials and
//! expansions, Gamma, Bessel `J₁`, the Tauberian constant `c₁(n,α)`, the
//! normalization `c₂(n,κ,α,Δ)` and the covariance families used by the
//! simulator.

use crate::error::{domain, numerical, Result};
use crate::geometry::Window;
use crate::riesz::{self, Estimate};
use std::f64::consts::PI;

/// The parameter triple `(n, κ, α)` shared by all modules.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KernelParams {
    pub n: usize,
    pub kappa: usize,
    pub alpha: f64,
}

impl KernelParams {
    /// Validates the admissibility constraint `α ∈ (0, n/κ)`.
    pub fn new(n: usize, kappa: usize, alpha: f64) -> Result<KernelParams> {
        if n == 0 || kappa == 0 {
            return domain("dimension and Hermite rank must be positive");
        }
        if !(alpha > 0.0 && alpha < n as f64 / kappa as f64) {
            return domain(format!(
                "alpha must lie in (0, n/kappa) = (0, {}); got {alpha}",
                n as f64 / kappa as f64
            ));
        }
        Ok(KernelParams { n, kappa, alpha })
    }

    /// The kernel exponent `κα` (always `< n`).
    pub fn kalpha(&self) -> f64 {
        self.kappa as f64 * self.alpha
    }
}

// ---------------------------------------------------------------------------
// Gamma function (Lanczos, g = 7, 9 coefficients).

const LANCZOS_G: f64 = 7.0;
const LANCZOS_P: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

/// Gamma function for real arguments (poles at nonpositive integers).
pub fn gamma(x: f64) -> f64 {
    if x < 0.5 {
        // reflection formula
        PI / ((PI * x).sin() * gamma(1.0 - x))
    } else {
        let x = x - 1.0;
        let mut acc = LANCZOS_P[0];
        for (i, p) in LANCZOS_P.iter().enumerate().skip(1) {
            acc += p / (x + i as f64);
        }
        let w = x + LANCZOS_G + 0.5;
        (2.0 * PI).sqrt() * w.powf(x + 0.5) * (-w).exp() * acc
    }
}

/// Tauberian constant `c₁(n, α) = 2^α π^{n/2} Γ(α/2) / Γ((n−α)/2)`.
pub fn c1(n: usize, alpha: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha < n as f64) {
        return domain(format!("c1 requires alpha in (0, n); got {alpha}"));
    }
    Ok(2f64.powf(alpha) * PI.powf(n as f64 / 2.0) * gamma(alpha / 2.0)
        / gamma((n as f64 - alpha) / 2.0))
}

// ---------------------------------------------------------------------------
// Bessel J1.

/// Bessel function of the first kind of order 1.
///
/// Power series below |x| = 12, Hankel asymptotic expansion above; absolute
/// accuracy is close to machine precision on |x| ≤ 10³.
pub fn bessel_j1(x: f64) -> f64 {
    let ax = x.abs();
    if ax < 12.0 {
        // J1(x) = (x/2) Σ (−1)^k (x²/4)^k / (k!(k+1)!)
        let q = 0.25 * x * x;
        let mut term = 0.5 * x;
        let mut sum = term;
        for k in 1..40 {
            term *= -q / (k as f64 * (k + 1) as f64);
            sum += term;
            if term.abs() < 1e-18 * sum.abs().max(1e-300) {
                break;
            }
        }
        sum
    } else {
        // Hankel expansion with μ = 4: J1(x) = sqrt(2/(πx)) (P cos χ − Q sin χ),
        // χ = x − 3π/4.
        let mu = 4.0;
        let mut p = 1.0;
        let mut q = 0.0;
        let mut term = 1.0;
        let mut prev = f64::INFINITY;
        for k in 1..30 {
            let tk = 2.0 * k as f64 - 1.0;
            term *= (mu - tk * tk) / (k as f64 * 8.0 * ax);
            if term.abs() >= prev {
                break; // asymptotic series started diverging
            }
            prev = term.abs();
            match k % 4 {
                1 => q += term,
                2 => p -= term,
                3 => q -= term,
                _ => p += term,
            }
        }
        let chi = ax - 3.0 * PI / 4.0;
        let v = (2.0 / (PI * ax)).sqrt() * (p * chi.cos() - q * chi.sin());
        if x < 0.0 {
            -v
        } else {
            v
        }
    }
}

// ---------------------------------------------------------------------------
// Hermite polynomials and expansions (probabilists' convention).

/// Probabilists' Hermite polynomial `H_m(u)` via the three-term recurrence
/// `H_{m+1}(u) = u·H_m(u) − m·H_{m−1}(u)`.
pub fn hermite_poly(m: usize, u: f64) -> f64 {
    match m {
        0 => 1.0,
        1 => u,
        _ => {
            let mut h0 = 1.0;
            let mut h1 = u;
            for k in 1..m {
                let h2 = u * h1 - k as f64 * h0;
                h0 = h1;
                h1 = h2;
            }
            h1
        }
    }
}

/// Gauss-Hermite quadrature for the standard Gaussian weight `φ(u)du`
/// (probabilists' normalization: the weights sum to 1).
pub struct GaussHermite {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussHermite {
    pub fn new(n: usize) -> GaussHermite {
        assert!(n >= 1);
        // Newton iteration on the orthonormal recurrence, walking the roots
        // from the largest inward with the classical initial guesses
        // (physicists' scale, converted by sqrt(2)).
        let nf = n as f64;
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let mut z = 0.0f64;
        for i in 0..n.div_ceil(2) {
            z = match i {
                0 => (2.0 * nf + 1.0).sqrt() - 1.85575 * (2.0 * nf + 1.0).powf(-1.0 / 6.0),
                1 => z - 1.14 * nf.powf(0.426) / z,
                2 => 1.86 * z - 0.86 * nodes[0] / std::f64::consts::SQRT_2,
                3 => 1.91 * z - 0.91 * nodes[1] / std::f64::consts::SQRT_2,
                _ => {
                    2.0 * z
                        - nodes[i - 2] / std::f64::consts::SQRT_2
                }
            };
            let mut x = std::f64::consts::SQRT_2 * z;
            for _ in 0..100 {
                let (p, dp, _) = orthonormal_hermite(n, x);
                let step = p / dp;
                x -= step;
                if step.abs() < 1e-14 * (1.0 + x.abs()) {
                    break;
                }
            }
            z = x / std::f64::consts::SQRT_2;
            let (_, _, sum_sq) = orthonormal_hermite(n, x);
            nodes[i] = x;
            weights[i] = 1.0 / sum_sq;
            nodes[n - 1 - i] = -x;
            weights[n - 1 - i] = weights[i];
        }
        if n % 2 == 1 {
            let mid = n / 2;
            nodes[mid] = 0.0;
            let (_, _, sum_sq) = orthonormal_hermite(n, 0.0);
            weights[mid] = 1.0 / sum_sq;
        }
        GaussHermite { nodes, weights }
    }

    /// `∫ f(u) φ(u) du` by the rule.
    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(&x, &w)| w * f(x)).sum()
    }
}

/// Returns `(p_n(x), p_n'(x), Σ_{k<n} p_k(x)²)` for the orthonormal
/// Hermite polynomials `p_k = H_k/√(k!)`.
fn orthonormal_hermite(n: usize, x: f64) -> (f64, f64, f64) {
    let mut pkm1 = 1.0f64; // p_0
    let mut pk = x; // p_1
    let mut sum_sq = 1.0 + if n > 1 { x * x } else { 0.0 };
    if n == 1 {
        return (x, 1.0, 1.0);
    }
    for k in 1..n - 1 {
        let kf = k as f64;
        let pkp1 = (x * pk - kf.sqrt() * pkm1) / (kf + 1.0).sqrt();
        pkm1 = pk;
        pk = pkp1;
        if k + 1 < n {
            sum_sq += pk * pk;
        }
    }
    // p_n and derivative p_n' = sqrt(n) p_{n-1}
    let nf = (n - 1) as f64;
    let pn = (x * pk - nf.sqrt() * pkm1) / (nf + 1.0).sqrt();
    let dpn = (nf + 1.0).sqrt() * pk;
    (pn, dpn, sum_sq)
}

/// Hermite expansion `G(u) = Σ a_m H_m(u)` with detected rank.
#[derive(Clone, Debug)]
pub struct HermiteExpansion {
    /// Raw coefficients `a_m = (1/m!) ∫ G H_m φ`.
    pub coeffs: Vec<f64>,
    /// Index of the first coefficient above the scale-aware tolerance.
    pub rank: usize,
    /// `‖G‖ = (∫ G² φ)^{1/2}` from the quadrature.
    pub norm: f64,
}

impl HermiteExpansion {
    /// Theorem-4-style functionals require `EG(X) = 0`, i.e. rank ≥ 1.
    pub fn has_zero_mean(&self) -> bool {
        self.rank >= 1
    }
}

const RANK_TOL: f64 = 1e-8;

/// Hermite coefficients of `G` up to order `max_order` by Gauss-Hermite
/// quadrature, with a node-doubling convergence check.
pub fn hermite_coeffs(g: impl Fn(f64) -> f64, max_order: usize) -> Result<HermiteExpansion> {
    let n_nodes = (2 * max_order + 2).max(32);
    let coarse = expansion_with_nodes(&g, max_order, n_nodes);
    let fine = expansion_with_nodes(&g, max_order, 2 * n_nodes);
    let norm = fine.1;
    if !norm.is_finite() {
        return numerical("G is not square-integrable against the Gaussian density");
    }
    let scale = norm.max(f64::MIN_POSITIVE);
    for m in 0..=max_order {
        // compare in the orthonormal scale a_m sqrt(m!)
        let s = factorial(m).sqrt();
        if (coarse.0[m] - fine.0[m]).abs() * s > RANK_TOL * scale {
            return numerical(format!(
                "Hermite coefficient a_{m} did not converge under node doubling"
            ));
        }
    }
    let coeffs = fine.0;
    let rank = coeffs
        .iter()
        .enumerate()
        .find(|(m, a)| a.abs() * factorial(*m).sqrt() > RANK_TOL * scale)
        .map(|(m, _)| m)
        .unwrap_or(max_order + 1);
    if rank > max_order {
        return numerical("all Hermite coefficients vanish below tolerance");
    }
    Ok(HermiteExpansion { coeffs, rank, norm })
}

fn expansion_with_nodes(
    g: &impl Fn(f64) -> f64,
    max_order: usize,
    n_nodes: usize,
) -> (Vec<f64>, f64) {
    let gh = GaussHermite::new(n_nodes);
    let values: Vec<f64> = gh.nodes.iter().map(|&x| g(x)).collect();
    let norm2: f64 = gh.weights.iter().zip(&values).map(|(w, v)| w * v * v).sum();
    let mut coeffs = Vec::with_capacity(max_order + 1);
    for m in 0..=max_order {
        let num: f64 = gh
            .nodes
            .iter()
            .zip(&gh.weights)
            .zip(&values)
            .map(|((&x, &w), &v)| w * v * hermite_poly(m, x))
            .sum();
        coeffs.push(num / factorial(m));
    }
    (coeffs, norm2.max(0.0).sqrt())
}

pub fn factorial(m: usize) -> f64 {
    (1..=m).fold(1.0, |acc, k| acc * k as f64)
}

// ---------------------------------------------------------------------------
// Covariance families.

/// Isotropic covariance families with a slowly varying factor that has a
/// finite positive limit at infinity.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum CovarianceModel {
    /// `B(r) = r^{−α}` (analytic family; singular at the origin).
    PurePower { alpha: f64 },
    /// `B(r) = (1 + r²)^{−α/2}`: a valid unit-variance isotropic covariance
    /// in every dimension with `B(r)·r^α → 1`, used for simulation.
    Cauchy { alpha: f64 },
}

impl CovarianceModel {
    pub fn alpha(&self) -> f64 {
        match self {
            CovarianceModel::PurePower { alpha } | CovarianceModel::Cauchy { alpha } => *alpha,
        }
    }

    /// `B(r)` for `r ≥ 0`.
    pub fn value(&self, r: f64) -> f64 {
        match self {
            CovarianceModel::PurePower { alpha } => r.powf(-alpha),
            CovarianceModel::Cauchy { alpha } => (1.0 + r * r).powf(-alpha / 2.0),
        }
    }
}

// ---------------------------------------------------------------------------
// c2.

/// `c₂(n,κ,α,Δ) = c₁^κ(n,α) κ! ∬_{Δ(1)²} ‖x−y‖^{−κα} dx dy`, the Theorem-4
/// normalization constant. The double integral is delegated to the Riesz
/// energy machinery (closed form / quadrature where available, otherwise
/// seeded Monte Carlo).
pub fn c2(params: &KernelParams, window: &Window, samples: usize, seed: u64) -> Result<Estimate> {
    if window.dim() != params.n {
        return domain("window dimension does not match kernel parameters");
    }
    let energy = riesz::window_energy(window, params.kalpha(), samples, seed)?;
    let factor = c1(params.n, params.alpha)?.powi(params.kappa as i32) * factorial(params.kappa);
    Ok(Estimate {
        value: factor * energy.value,
        stderr: factor * energy.stderr,
        samples: energy.samples,
        method: energy.method,
        seed: energy.seed,
    })
}
