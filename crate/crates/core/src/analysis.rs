//! Closed-form spectral analysis of the memory models.
//!
//! An eigenvalue `lambda` of `A` induces two eigenvalues of the MLA
//! iteration matrix, the roots of
//!
//! ```text
//! z^2 - gamma*lambda*z + (gamma - 1)*lambda = 0
//! ```
//!
//! and two eigenvalues of the accelerated averaging matrix, the roots of
//! `z^2 - beta*lambda*z + (beta - 1) = 0`. Everything here is built on
//! those two mappings: convergence verdicts, essential spectral radii,
//! optimal parameters.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::net::WeightedAdjacency;
use crate::optimize::golden_section;
use crate::spectral::{rho_ess, Spectrum, DOMINANT_GAP};

/// Criterion values this close to zero are treated as on the boundary.
pub const BOUNDARY_TOL: f64 = 1e-12;

/// The two mapped roots of one eigenvalue.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MappedPair {
    /// Root taken with `+sqrt(D)`.
    pub lambda_plus: Complex64,
    /// Root taken with `-sqrt(D)`.
    pub lambda_minus: Complex64,
    /// `D = sum^2 - 4 product` as evaluated. Values within rounding of zero
    /// are resolved as a double root.
    pub discriminant: f64,
}

impl MappedPair {
    pub fn roots(&self) -> [Complex64; 2] {
        [self.lambda_plus, self.lambda_minus]
    }

    pub fn max_modulus(&self) -> f64 {
        self.lambda_plus.norm().max(self.lambda_minus.norm())
    }
}

/// Roots of `z^2 - sum*z + product`.
///
/// The larger-magnitude real root comes from the formula and the other from
/// Vieta's product, so neither suffers cancellation. A discriminant smaller
/// than the rounding noise of its two terms cannot be signed reliably and is
/// read as zero: a double root at `sum / 2`. `product_scale` bounds the
/// magnitude of the terms `product` was computed from, since a difference
/// like `gamma - 1` carries the rounding error of `gamma`, not of the result.
fn monic_roots(sum: f64, product: f64, product_scale: f64) -> MappedPair {
    let d = sum * sum - 4.0 * product;
    let noise = 16.0 * f64::EPSILON * (sum * sum + 4.0 * product_scale.max(product.abs()));
    let (plus, minus) = if d.abs() <= noise {
        let r = Complex64::new(sum / 2.0, 0.0);
        (r, r)
    } else if d > 0.0 {
        let sq = d.sqrt();
        let (p, m) = if sum >= 0.0 {
            let big = (sum + sq) / 2.0;
            (big, product / big)
        } else {
            let big = (sum - sq) / 2.0;
            (product / big, big)
        };
        (Complex64::new(p, 0.0), Complex64::new(m, 0.0))
    } else {
        let re = sum / 2.0;
        let im = (-d).sqrt() / 2.0;
        (Complex64::new(re, im), Complex64::new(re, -im))
    };
    MappedPair { lambda_plus: plus, lambda_minus: minus, discriminant: d }
}

/// `D(lambda, gamma) = gamma^2 lambda^2 - 4 (gamma - 1) lambda`.
pub fn discriminant(lambda: f64, gamma: f64) -> f64 {
    gamma * gamma * lambda * lambda - 4.0 * (gamma - 1.0) * lambda
}

/// MLA image of an eigenvalue of `A`.
pub fn map_eigenvalue(lambda: f64, gamma: f64) -> MappedPair {
    monic_roots(gamma * lambda, (gamma - 1.0) * lambda, (gamma.abs() + 1.0) * lambda.abs())
}

/// Accelerated-averaging image of an eigenvalue of `A`.
pub fn map_eigenvalue_accelerated(lambda: f64, beta: f64) -> MappedPair {
    monic_roots(beta * lambda, beta - 1.0, beta.abs() + 1.0)
}

/// `max |z|` over both MLA roots of `lambda`.
pub fn lambda_hat_max(lambda: f64, gamma: f64) -> f64 {
    map_eigenvalue(lambda, gamma).max_modulus()
}

/// Largest modulus among all mapped roots except the single dominant root
/// `z = 1` (the root of the dominant eigenvalue's pair closest to 1).
fn max_nondominant(spec: &Spectrum, map: impl Fn(f64) -> MappedPair) -> f64 {
    let top = map(spec.dominant());
    let one = Complex64::new(1.0, 0.0);
    let other = if (top.lambda_plus - one).norm() <= (top.lambda_minus - one).norm() {
        top.lambda_minus
    } else {
        top.lambda_plus
    };
    spec.eigenvalues[1..].iter().map(|&l| map(l).max_modulus()).fold(other.norm(), f64::max)
}

fn check_dominant(spec: &Spectrum) -> Result<()> {
    if spec.n() < 2 {
        return Err(Error::AssumptionViolated("spectrum needs at least 2 eigenvalues".into()));
    }
    let l1 = spec.dominant();
    if (l1 - 1.0).abs() > 1e-8 {
        return Err(Error::AssumptionViolated(format!("dominant eigenvalue {l1} is not 1")));
    }
    Ok(())
}

/// Convergence verdict for the MLA model at one `gamma`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvergenceVerdict {
    pub converges: bool,
    /// `0 < gamma < 2`
    pub gamma_in_range: bool,
    /// `2 gamma lambda_n - lambda_n + 1`, must be positive.
    pub criterion_ii_value: f64,
    /// Largest non-dominant mapped modulus, computed root by root.
    pub limiting_eigenvalue_modulus: f64,
}

/// Semi-convergence test for the MLA iteration matrix: `gamma` in `(0, 2)`
/// and `2 gamma lambda_n - lambda_n + 1 > 0`. Values of the second criterion
/// within [`BOUNDARY_TOL`] of zero count as failing.
pub fn check_mla_convergence(spec: &Spectrum, gamma: f64) -> Result<ConvergenceVerdict> {
    check_dominant(spec)?;
    let ln = spec.smallest();
    let gamma_in_range = gamma > 0.0 && gamma < 2.0;
    let criterion_ii_value = 2.0 * gamma * ln - ln + 1.0;
    Ok(ConvergenceVerdict {
        converges: gamma_in_range && criterion_ii_value > BOUNDARY_TOL,
        gamma_in_range,
        criterion_ii_value,
        limiting_eigenvalue_modulus: max_nondominant(spec, |l| map_eigenvalue(l, gamma)),
    })
}

/// Decides whether both roots of `z^2 + a z + b` lie strictly inside the
/// unit disk by mapping the disk onto the left half plane: `z = (s+1)/(s-1)`
/// turns the polynomial into `(1+a+b) s^2 + 2(1-b) s + (b-a+1)`, whose roots
/// must both have negative real part. A vanishing leading coefficient means
/// `z = 1` is a root, which is on the circle.
pub fn roots_in_unit_disk_via_halfplane(a: Complex64, b: Complex64) -> bool {
    let one = Complex64::new(1.0, 0.0);
    let c2 = one + a + b;
    let c1 = (one - b) * 2.0;
    let c0 = b - a + one;
    if c2.norm() <= f64::EPSILON * (1.0 + a.norm() + b.norm()) {
        return false;
    }
    let disc = (c1 * c1 - c2 * c0 * 4.0).sqrt();
    // pick the sign that avoids cancellation in -(c1 +- disc)
    let q = if (c1.conj() * disc).re >= 0.0 { -(c1 + disc) / 2.0 } else { -(c1 - disc) / 2.0 };
    if q.norm() == 0.0 {
        // c1 = 0 and disc = 0: double root at s = 0
        return false;
    }
    let s1 = q / c2;
    let s2 = c0 / q;
    s1.re < 0.0 && s2.re < 0.0
}

/// Limit `w1^T x0` reached by every agent, `w1` the dominant left
/// eigenvector scaled to unit sum. For symmetric `A` this is the mean.
pub fn consensus_value(a: &WeightedAdjacency, spec: &Spectrum, x0: &[f64]) -> Result<f64> {
    if let Some((i, j)) = a.asymmetry() {
        return Err(Error::NotSymmetric(i, j));
    }
    if x0.len() != a.n() || spec.n() != a.n() {
        return Err(Error::DimensionMismatch { expected: a.n(), got: x0.len().min(spec.n()) });
    }
    if spec.second() > 1.0 - DOMINANT_GAP {
        return Err(Error::AssumptionViolated(format!(
            "dominant eigenvalue is not simple (lambda_2 = {})",
            spec.second()
        )));
    }
    Ok(spec.dominant_weights().iter().zip(x0).map(|(w, x)| w * x).sum())
}

/// Essential spectral radius of the MLA iteration matrix: the maximum
/// modulus over all `2n` mapped roots except the dominant `z = 1`.
pub fn rho_ess_mla(spec: &Spectrum, gamma: f64) -> Result<f64> {
    let v = check_mla_convergence(spec, gamma)?;
    if !v.converges {
        return Err(Error::NotConvergent { gamma, criterion: v.criterion_ii_value });
    }
    Ok(v.limiting_eigenvalue_modulus)
}

/// Essential spectral radius of the accelerated averaging matrix. Not
/// restricted to convergent `beta`: the value is simply `>= 1` there.
pub fn rho_ess_accelerated(spec: &Spectrum, beta: f64) -> f64 {
    max_nondominant(spec, |l| map_eigenvalue_accelerated(l, beta))
}

/// Optimal MLA rate `sqrt(1 + rho) - 1`, written without cancellation.
pub fn mla_optimal_rate(rho: f64) -> f64 {
    rho / ((1.0 + rho).sqrt() + 1.0)
}

/// Optimal accelerated-averaging rate `rho / (1 + sqrt(1 - rho^2))`.
pub fn accelerated_optimal_rate(rho: f64) -> f64 {
    rho / (1.0 + (1.0 - rho * rho).sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimalGamma {
    pub gamma: f64,
    pub rate: f64,
    /// Whether `lambda_n = -rho_ess` and `lambda_2 <= |lambda_n| / 3` hold, in
    /// which case `rate` is the closed form; otherwise `rate` is the
    /// essential spectral radius actually attained at `gamma`.
    pub hypotheses_met: bool,
}

/// `gamma* = 2 (sqrt(1 + rho) - 1) / rho`, the parameter placing the
/// smallest eigenvalue on a double root.
pub fn optimal_gamma(spec: &Spectrum) -> Result<OptimalGamma> {
    let rho = rho_ess(spec)?;
    let ln = spec.smallest();
    if ln >= 0.0 {
        return Err(Error::BadSpectrum(format!("smallest eigenvalue {ln} is not negative")));
    }
    if !(rho > 0.0 && rho < 1.0) {
        return Err(Error::BadSpectrum(format!("essential spectral radius {rho} not in (0, 1)")));
    }
    let gamma = 2.0 / ((1.0 + rho).sqrt() + 1.0);
    let hypotheses_met =
        (ln + rho).abs() <= DOMINANT_GAP && spec.second() <= ln.abs() / 3.0 + BOUNDARY_TOL;
    let rate = if hypotheses_met { mla_optimal_rate(rho) } else { rho_ess_mla(spec, gamma)? };
    Ok(OptimalGamma { gamma, rate, hypotheses_met })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimalBeta {
    /// Numerically located minimiser on `(0, 2)`.
    pub beta: f64,
    /// Closed-form optimal rate.
    pub rate: f64,
    /// Essential spectral radius attained at `beta`.
    pub numeric_rate: f64,
}

/// Optimal accelerated-averaging parameter, by golden-section search of the
/// exact essential spectral radius over `(0, 2)`.
pub fn optimal_beta(spec: &Spectrum) -> Result<OptimalBeta> {
    check_dominant(spec)?;
    let rho = rho_ess(spec)?;
    if !(rho > 0.0 && rho < 1.0) {
        return Err(Error::BadSpectrum(format!("essential spectral radius {rho} not in (0, 1)")));
    }
    let m = golden_section(|b| rho_ess_accelerated(spec, b), 0.0, 2.0, 1e-10);
    Ok(OptimalBeta { beta: m.x, rate: accelerated_optimal_rate(rho), numeric_rate: m.fx })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Improvement {
    Found { delta: f64, rate: f64 },
    NoImprovement,
}

/// Step sizes tried, largest first.
const DELTA_LADDER: [f64; 6] = [1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6];

/// Looks for `gamma = 1 + delta` beating the DeGroot rate. The sign of
/// `delta` follows the essential eigenvalue: positive when it is positive,
/// negative when it is negative.
pub fn improving_gamma_exists(spec: &Spectrum) -> Result<Improvement> {
    check_dominant(spec)?;
    let rho = rho_ess(spec)?;
    if rho >= 1.0 - DOMINANT_GAP {
        return Err(Error::AssumptionViolated("spectrum is not primitive (rho_ess = 1)".into()));
    }
    if rho <= f64::EPSILON {
        return Ok(Improvement::NoImprovement);
    }
    let (l2, ln) = (spec.second(), spec.smallest());
    if (l2 + ln).abs() <= 1e-10 {
        return Err(Error::DegenerateSpectrum((l2 + ln).abs()));
    }
    let essential = if l2.abs() >= ln.abs() { l2 } else { ln };
    let sign = essential.signum();
    for step in DELTA_LADDER {
        let delta = sign * step;
        let gamma = 1.0 + delta;
        if !check_mla_convergence(spec, gamma)?.converges {
            continue;
        }
        let rate = rho_ess_mla(spec, gamma)?;
        if rate < rho - 1e-12 {
            return Ok(Improvement::Found { delta, rate });
        }
    }
    Ok(Improvement::NoImprovement)
}
