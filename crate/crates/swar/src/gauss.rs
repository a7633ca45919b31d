//! Standard-normal density, distribution function, quantile and truncated
//! first/second moments. These back the closed-form population slice
//! quantities; the distribution function and the quantile come from two
//! unrelated rational approximations, so their round trip doubles as a
//! mutual accuracy check.

// coefficients keep their published digit counts
#![allow(clippy::excessive_precision)]

const SQRT_TWO_PI: f64 = 2.5066282746310002;

/// Standard normal density.
pub fn pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / SQRT_TWO_PI
}

/// Standard normal distribution function, accurate to roughly 1e-15
/// (Hart-style rational approximation with a continued-fraction tail).
pub fn cdf(x: f64) -> f64 {
    let z = x.abs();
    let c = if z > 37.0 {
        0.0
    } else {
        let e = (-z * z / 2.0).exp();
        if z < 7.071067811865475 {
            let mut num = 3.52624965998911e-2 * z + 0.700383064443688;
            num = num * z + 6.37396220353165;
            num = num * z + 33.912866078383;
            num = num * z + 112.079291497871;
            num = num * z + 221.213596169931;
            num = num * z + 220.206867912376;
            let mut den = 8.83883476483184e-2 * z + 1.75566716318264;
            den = den * z + 16.064177579207;
            den = den * z + 86.7807322029461;
            den = den * z + 296.564248779674;
            den = den * z + 637.333633378831;
            den = den * z + 793.826512519948;
            den = den * z + 440.413735824752;
            e * num / den
        } else {
            let mut b = z + 0.65;
            b = z + 4.0 / b;
            b = z + 3.0 / b;
            b = z + 2.0 / b;
            b = z + 1.0 / b;
            e / (b * SQRT_TWO_PI)
        }
    };
    if x <= 0.0 {
        c
    } else {
        1.0 - c
    }
}

/// Standard normal quantile (inverse distribution function), a rational
/// approximation in three regimes accurate to roughly 1e-15.
///
/// Returns `-inf` for `p = 0`, `+inf` for `p = 1` and `NaN` outside `[0, 1]`.
pub fn quantile(p: f64) -> f64 {
    if p.is_nan() || !(0.0..=1.0).contains(&p) {
        return f64::NAN;
    }
    if p == 0.0 {
        return f64::NEG_INFINITY;
    }
    if p == 1.0 {
        return f64::INFINITY;
    }
    let q = p - 0.5;
    if q.abs() <= 0.425 {
        let r = 0.180625 - q * q;
        let num = (((((((2.5090809287301226727e3 * r + 3.3430575583588128105e4) * r
            + 6.7265770927008700853e4)
            * r
            + 4.5921953931549871457e4)
            * r
            + 1.3731693765509461125e4)
            * r
            + 1.9715909503065514427e3)
            * r
            + 1.3314166789178437745e2)
            * r
            + 3.3871328727963666080e0)
            * q;
        let den = ((((((5.2264952788528545610e3 * r + 2.8729085735721942674e4) * r
            + 3.9307895800092710610e4)
            * r
            + 2.1213794301586595867e4)
            * r
            + 5.3941960214247511077e3)
            * r
            + 6.8718700749205790830e2)
            * r
            + 4.2313330701600911252e1)
            * r
            + 1.0;
        return num / den;
    }
    let mut r = if q < 0.0 { p } else { 1.0 - p };
    r = (-r.ln()).sqrt();
    let val = if r <= 5.0 {
        let r = r - 1.6;
        let num = ((((((7.74545014278341407640e-4 * r + 2.27238449892691845833e-2) * r
            + 2.41780725177450611770e-1)
            * r
            + 1.27045825245236838258e0)
            * r
            + 3.64784832476320460504e0)
            * r
            + 5.76949722146069140550e0)
            * r
            + 4.63033784615654529590e0)
            * r
            + 1.42343711074968357734e0;
        let den = ((((((1.05075007164441684324e-9 * r + 5.47593808499534494600e-4) * r
            + 1.51986665636164571966e-2)
            * r
            + 1.48103976427480074590e-1)
            * r
            + 6.89767334985100004550e-1)
            * r
            + 1.67638483018380384940e0)
            * r
            + 2.05319162663775882187e0)
            * r
            + 1.0;
        num / den
    } else {
        let r = r - 5.0;
        let num = ((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r
            + 1.24266094738807843860e-3)
            * r
            + 2.65321895265761230930e-2)
            * r
            + 2.96560571828504891230e-1)
            * r
            + 1.78482653991729133580e0)
            * r
            + 5.46378491116411436990e0)
            * r
            + 6.65790464350110377720e0;
        let den = ((((((2.04426310338993978564e-15 * r + 1.42151175831644588870e-7) * r
            + 1.84631831751005468180e-5)
            * r
            + 7.86869131145613259100e-4)
            * r
            + 1.48753612908506148525e-2)
            * r
            + 1.36929880922735805310e-1)
            * r
            + 5.99832206555887937690e-1)
            * r
            + 1.0;
        num / den
    };
    if q < 0.0 {
        -val
    } else {
        val
    }
}

/// First and second moments of a standard normal conditioned on `(lo, hi)`,
/// with the interval probability supplied by the caller (it is known exactly
/// for equiprobable slices). Infinite endpoints are handled by the usual
/// `phi(inf) = 0`, `x phi(x) -> 0` limits.
#[derive(Debug, Clone, Copy)]
pub struct TruncatedMoments {
    pub mean: f64,
    pub second: f64,
}

pub fn truncated_moments(lo: f64, hi: f64, prob: f64) -> TruncatedMoments {
    let phi = |x: f64| if x.is_finite() { pdf(x) } else { 0.0 };
    let xphi = |x: f64| if x.is_finite() { x * pdf(x) } else { 0.0 };
    let mean = (phi(lo) - phi(hi)) / prob;
    let second = 1.0 + (xphi(lo) - xphi(hi)) / prob;
    TruncatedMoments { mean, second }
}
