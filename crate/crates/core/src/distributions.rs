//! Service-time distributions: closed-form moments, inverse-CDF sampling, and
//! a quadrature oracle for cross-checking the closed forms.
//!
//! The Bounded Pareto density on `[k, p_max]` with shape `alpha` is
//!
//! ```text
//! f(x) = alpha * k^alpha * x^(-alpha - 1) / (1 - (k / p_max)^alpha)
//! ```
//!
//! Its moment formulas are singular at `alpha = 1` (mean) and `alpha = 2`
//! (second moment), so those shapes are rejected at construction.

use core::fmt;

use crate::math;

/// Parameters of a Bounded Pareto service-time distribution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundedParetoParams {
    /// Minimum execution time (lower support bound), `> 0`.
    pub k: f64,
    /// Maximum execution time (upper support bound), `> k`.
    pub p_max: f64,
    /// Shape of the hyperbolic tail. Must not equal 1 or 2.
    pub shape: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DistributionError {
    /// Rate parameter of an exponential distribution must be positive.
    NonPositiveRate(f64),
    /// Moment formulas are singular at shape 1 and 2.
    SingularShape(f64),
    /// Requires `0 < k < p_max`.
    InvalidSupport { k: f64, p_max: f64 },
    /// Shape must be positive.
    NonPositiveShape(f64),
}

impl fmt::Display for DistributionError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DistributionError::NonPositiveRate(mu) => {
                write!(f, "service rate must be positive, got {mu}")
            }
            DistributionError::SingularShape(a) => {
                write!(f, "moment formulas are singular at shape {a} (1 and 2 are excluded)")
            }
            DistributionError::InvalidSupport { k, p_max } => {
                write!(f, "support requires 0 < k < p_max, got k={k}, p_max={p_max}")
            }
            DistributionError::NonPositiveShape(a) => {
                write!(f, "shape must be positive, got {a}")
            }
        }
    }
}

impl core::error::Error for DistributionError {}

/// Shapes within this distance of the singular values 1 and 2 are rejected.
const SHAPE_SINGULARITY_TOL: f64 = 1e-9;

impl BoundedParetoParams {
    pub fn new(k: f64, p_max: f64, shape: f64) -> Result<Self, DistributionError> {
        if !(k > 0.0 && p_max > k) {
            return Err(DistributionError::InvalidSupport { k, p_max });
        }
        if !(shape > 0.0) {
            return Err(DistributionError::NonPositiveShape(shape));
        }
        if math::abs(shape - 1.0) < SHAPE_SINGULARITY_TOL
            || math::abs(shape - 2.0) < SHAPE_SINGULARITY_TOL
        {
            return Err(DistributionError::SingularShape(shape));
        }
        Ok(Self { k, p_max, shape })
    }

    /// Truncation mass `1 - (k / p_max)^shape`, the normalizer of the density.
    fn truncation(&self) -> f64 {
        1.0 - math::powf(self.k / self.p_max, self.shape)
    }
}

/// First and second moments of an exponential distribution with rate `mu`.
pub fn exponential_moments(mu: f64) -> Result<(f64, f64), DistributionError> {
    if !(mu > 0.0) {
        return Err(DistributionError::NonPositiveRate(mu));
    }
    Ok((1.0 / mu, 2.0 / (mu * mu)))
}

/// First and second moments of a Bounded Pareto distribution.
///
/// ```text
/// mean = alpha/(alpha-1) * k^alpha/(1 - (k/p)^alpha) * (k^(1-alpha) - p^(1-alpha))
/// m2   = alpha/(2-alpha) * k^alpha/(1 - (k/p)^alpha) * (p^(2-alpha) - k^(2-alpha))
/// ```
pub fn bounded_pareto_moments(params: &BoundedParetoParams) -> (f64, f64) {
    let BoundedParetoParams { k, p_max: p, shape: a } = *params;
    let scale = math::powf(k, a) / params.truncation();
    let mean =
        a / (a - 1.0) * scale * (math::powf(k, 1.0 - a) - math::powf(p, 1.0 - a));
    let m2 = a / (2.0 - a) * scale * (math::powf(p, 2.0 - a) - math::powf(k, 2.0 - a));
    (mean, m2)
}

/// Moment formulas with the bare `(k/p)^alpha` normalizer instead of the
/// truncated-density normalizer `1 - (k/p)^alpha`. Some texts print the
/// formulas this way; the values do not integrate the density to 1 and are
/// kept only for side-by-side comparison. Use [`bounded_pareto_moments`]
/// everywhere else.
pub fn bounded_pareto_moments_unnormalized(params: &BoundedParetoParams) -> (f64, f64) {
    let BoundedParetoParams { k, p_max: p, shape: a } = *params;
    let scale = math::powf(k, a) / math::powf(k / p, a);
    let mean =
        a / (a - 1.0) * scale * (math::powf(k, 1.0 - a) - math::powf(p, 1.0 - a));
    let m2 = a / (2.0 - a) * scale * (math::powf(p, 2.0 - a) - math::powf(k, 2.0 - a));
    (mean, m2)
}

/// Density of the Bounded Pareto distribution at `x`; zero outside `[k, p_max]`.
pub fn bounded_pareto_pdf(params: &BoundedParetoParams, x: f64) -> f64 {
    if x < params.k || x > params.p_max {
        return 0.0;
    }
    let a = params.shape;
    a * math::powf(params.k, a) * math::powf(x, -a - 1.0) / params.truncation()
}

/// Cumulative distribution of the Bounded Pareto at `x`.
pub fn bounded_pareto_cdf(params: &BoundedParetoParams, x: f64) -> f64 {
    if x <= params.k {
        return 0.0;
    }
    if x >= params.p_max {
        return 1.0;
    }
    (1.0 - math::powf(params.k / x, params.shape)) / params.truncation()
}

/// Inverse-CDF transform: maps `uniform` in `[0, 1)` to a service time in
/// `[k, p_max]`.
pub fn bounded_pareto_sample(params: &BoundedParetoParams, uniform: f64) -> f64 {
    let u = uniform.clamp(0.0, 1.0);
    let x = params.k * math::powf(1.0 - u * params.truncation(), -1.0 / params.shape);
    x.clamp(params.k, params.p_max)
}

/// Inverse-CDF sample of an exponential with rate `rate`.
pub fn exponential_sample(rate: f64, uniform: f64) -> f64 {
    let u = uniform.clamp(0.0, 1.0 - f64::EPSILON);
    -math::ln(1.0 - u) / rate
}

/// Relative accuracy target of [`numeric_moment_oracle`].
pub const QUADRATURE_REL_TOL: f64 = 1e-8;

/// Numeric `order`-th moment of the Bounded Pareto density by adaptive
/// Simpson quadrature over `[k, p_max]`, to about [`QUADRATURE_REL_TOL`]
/// relative error. Independent of the closed forms above; used to
/// cross-check them.
pub fn numeric_moment_oracle(params: &BoundedParetoParams, order: i32) -> f64 {
    let f = |x: f64| math::powf(x, order as f64) * bounded_pareto_pdf(params, x);
    let (lo, hi) = (params.k, params.p_max);
    // Coarse estimate to scale the absolute tolerance.
    let coarse = simpson(&f, lo, hi);
    let tol = QUADRATURE_REL_TOL * math::abs(coarse).max(f64::MIN_POSITIVE);
    adaptive_simpson(&f, lo, hi, coarse, tol, 60)
}

fn simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> f64 {
    let m = 0.5 * (a + b);
    (b - a) / 6.0 * (f(a) + 4.0 * f(m) + f(b))
}

fn adaptive_simpson<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let left = simpson(f, a, m);
    let right = simpson(f, m, b);
    let refined = left + right;
    if depth == 0 || math::abs(refined - whole) <= 15.0 * tol {
        refined + (refined - whole) / 15.0
    } else {
        adaptive_simpson(f, a, m, left, 0.5 * tol, depth - 1)
            + adaptive_simpson(f, m, b, right, 0.5 * tol, depth - 1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel_err(got: f64, want: f64) -> f64 {
        (got - want).abs() / want.abs()
    }

    #[test]
    fn exponential_moments_unit_rate() {
        assert_eq!(exponential_moments(1.0).unwrap(), (1.0, 2.0));
    }

    #[test]
    fn exponential_moments_closed_form() {
        assert_eq!(exponential_moments(2.0).unwrap(), (0.5, 0.5));
        let (mean, m2) = exponential_moments(35.0).unwrap();
        assert!(rel_err(mean, 0.028571428571428571) < 1e-12);
        assert!(rel_err(m2, 0.0016326530612244898) < 1e-12);
    }

    #[test]
    fn exponential_moments_rejects_bad_rate() {
        assert_eq!(
            exponential_moments(0.0),
            Err(DistributionError::NonPositiveRate(0.0))
        );
        assert_eq!(
            exponential_moments(-1.0),
            Err(DistributionError::NonPositiveRate(-1.0))
        );
    }

    #[test]
    fn bounded_pareto_rejects_singular_shapes() {
        assert_eq!(
            BoundedParetoParams::new(0.001, 0.07, 1.0),
            Err(DistributionError::SingularShape(1.0))
        );
        assert_eq!(
            BoundedParetoParams::new(0.001, 0.07, 2.0),
            Err(DistributionError::SingularShape(2.0))
        );
        assert_eq!(
            BoundedParetoParams::new(0.07, 0.001, 1.1),
            Err(DistributionError::InvalidSupport { k: 0.07, p_max: 0.001 })
        );
    }

    // Published benchmark values for these parameter sets: mean 0.003843,
    // second moment 5.52e-5 (k=0.001, p=0.07) and mean 0.012471, second
    // moment 3.45e-4 (k=0.004, p=0.1), both at shape 1.1.
    #[test]
    fn bounded_pareto_moments_match_reference_values() {
        let p1 = BoundedParetoParams::new(0.001, 0.07, 1.1).unwrap();
        let (mean, m2) = bounded_pareto_moments(&p1);
        assert!(rel_err(mean, 0.003843) < 5e-3, "mean {mean}");
        assert!(rel_err(m2, 5.52e-5) < 5e-3, "m2 {m2}");

        let p2 = BoundedParetoParams::new(0.004, 0.1, 1.1).unwrap();
        let (mean, m2) = bounded_pareto_moments(&p2);
        assert!(rel_err(mean, 0.012471) < 5e-3, "mean {mean}");
        assert!(rel_err(m2, 3.45e-4) < 5e-3, "m2 {m2}");
    }

    #[test]
    fn bounded_pareto_moments_degenerate_point_mass() {
        // At p_max = k (1 + 1e-9) the normalizer and the moment bracket both
        // cancel to ~1e-9, so only six to seven significant digits survive.
        let k = 0.5;
        let eps = k * 1e-9;
        let params = BoundedParetoParams::new(k, k + eps, 1.1).unwrap();
        let (mean, m2) = bounded_pareto_moments(&params);
        assert!(rel_err(mean, k) < 1e-5, "mean {mean}");
        assert!(rel_err(m2, k * k) < 1e-5, "m2 {m2}");
    }

    #[test]
    fn unnormalized_variant_differs_by_truncation_factor() {
        let params = BoundedParetoParams::new(0.001, 0.07, 1.1).unwrap();
        let (mean, m2) = bounded_pareto_moments(&params);
        let (mean_u, m2_u) = bounded_pareto_moments_unnormalized(&params);
        let ratio = params.truncation() / math::powf(params.k / params.p_max, params.shape);
        assert!(rel_err(mean_u, mean * ratio) < 1e-12);
        assert!(rel_err(m2_u, m2 * ratio) < 1e-12);
    }

    #[test]
    fn sample_hits_support_bounds() {
        let params = BoundedParetoParams::new(0.001, 0.07, 1.1).unwrap();
        assert_eq!(bounded_pareto_sample(&params, 0.0), params.k);
        let near_one = bounded_pareto_sample(&params, 1.0 - 1e-15);
        assert!(rel_err(near_one, params.p_max) < 1e-9, "got {near_one}");
    }

    #[test]
    fn cdf_inverts_sample() {
        let params = BoundedParetoParams::new(0.002, 0.08, 1.3).unwrap();
        for &u in &[0.01, 0.1, 0.5, 0.9, 0.999] {
            let x = bounded_pareto_sample(&params, u);
            assert!((bounded_pareto_cdf(&params, x) - u).abs() < 1e-12);
        }
    }

    #[test]
    fn pdf_integrates_to_one() {
        let params = BoundedParetoParams::new(0.001, 0.07, 1.1).unwrap();
        let mass = numeric_moment_oracle(&params, 0);
        assert!((mass - 1.0).abs() < 1e-7, "total mass {mass}");
    }

    #[test]
    fn oracle_matches_reference_values() {
        let params = BoundedParetoParams::new(0.001, 0.07, 1.1).unwrap();
        let m1 = numeric_moment_oracle(&params, 1);
        let m2 = numeric_moment_oracle(&params, 2);
        assert!(rel_err(m1, 0.003843) < 5e-3, "m1 {m1}");
        assert!(rel_err(m2, 5.52e-5) < 5e-3, "m2 {m2}");
    }

    #[test]
    fn oracle_handles_near_point_mass() {
        let k = 0.25;
        let params = BoundedParetoParams::new(k, k + k * 1e-9, 1.5).unwrap();
        let m1 = numeric_moment_oracle(&params, 1);
        assert!(rel_err(m1, k) < 1e-6, "m1 {m1}");
    }
}
