use super::free_energy::FreeEnergy;
use crate::error::{Error, Result};
use crate::tensor::{det, Mat};

/// Settings of the monotone root finder for `μ = ∂_c Φ(F, c)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InversionOptions {
    /// Residual tolerance on `|∂_c Φ(F, c) − μ|`, scaled by `1 + |μ|`.
    pub tol: f64,
    pub c_min: f64,
    pub c_max: f64,
    pub max_iterations: usize,
}

impl Default for InversionOptions {
    fn default() -> Self {
        InversionOptions {
            tol: 1e-12,
            c_min: 1e-300,
            c_max: 1e300,
            max_iterations: 200,
        }
    }
}

pub fn invert_chemical_potential(material: &dyn FreeEnergy, f: &Mat, mu: f64) -> Result<f64> {
    invert_chemical_potential_with(material, f, mu, &InversionOptions::default())
}

/// Unique `c > 0` with `∂_c Φ(F, c) = μ`.
///
/// Works in `u = log c`, where `u ↦ ∂_c Φ(F, e^u)` is strictly increasing
/// whenever `∂²_cc Φ > 0`. A bracket is grown geometrically from the
/// material's reference concentration, then refined by Newton steps that
/// fall back to bisection whenever they leave the bracket.
pub fn invert_chemical_potential_with(
    material: &dyn FreeEnergy,
    f: &Mat,
    mu: f64,
    opts: &InversionOptions,
) -> Result<f64> {
    let j = det(f);
    if !(j > 0.0) {
        return Err(Error::degenerate(j, "chemical potential inversion"));
    }
    let fail = |reason: String| Error::InversionFailure { mu, reason };
    if !mu.is_finite() {
        return Err(fail("potential is not finite".into()));
    }
    let residual = |u: f64| material.dphi_dc(f, u.exp()) - mu;
    let tol = opts.tol * (1.0 + mu.abs());
    let (u_min, u_max) = (opts.c_min.ln(), opts.c_max.ln());

    let u0 = material.reference_concentration().ln();
    let r0 = residual(u0);
    if r0.abs() <= tol {
        return Ok(u0.exp());
    }

    // Grow the bracket on the side where the sign change must lie.
    let (mut lo, mut hi, mut r_lo, mut r_hi);
    let mut step = 1.0;
    if r0 > 0.0 {
        hi = u0;
        r_hi = r0;
        loop {
            lo = (u0 - step).max(u_min);
            r_lo = residual(lo);
            if r_lo <= 0.0 {
                break;
            }
            if lo <= u_min {
                return Err(fail(format!(
                    "no sign change down to c = {:e}; ∂_cΦ is not monotone or unbounded below",
                    opts.c_min
                )));
            }
            hi = lo;
            r_hi = r_lo;
            step *= 2.0;
        }
    } else {
        lo = u0;
        r_lo = r0;
        loop {
            hi = (u0 + step).min(u_max);
            r_hi = residual(hi);
            if r_hi >= 0.0 {
                break;
            }
            if hi >= u_max {
                return Err(fail(format!(
                    "no sign change up to c = {:e}; ∂_cΦ is not monotone or unbounded above",
                    opts.c_max
                )));
            }
            lo = hi;
            r_lo = r_hi;
            step *= 2.0;
        }
    }
    if r_lo.abs() <= tol {
        return Ok(lo.exp());
    }
    if r_hi.abs() <= tol {
        return Ok(hi.exp());
    }

    // Safeguarded Newton in log space.
    let mut u = if r_hi - r_lo > 0.0 {
        lo - r_lo * (hi - lo) / (r_hi - r_lo)
    } else {
        0.5 * (lo + hi)
    };
    let mut best = (f64::INFINITY, u);
    for _ in 0..opts.max_iterations {
        let c = u.exp();
        let r = material.dphi_dc(f, c) - mu;
        if r.abs() < best.0 {
            best = (r.abs(), u);
        }
        if r.abs() <= tol {
            // One extra Newton step polishes the root to roundoff level.
            let slope = material.d2phi_dcc(f, c) * c;
            let polished = u - r / slope;
            if slope > 0.0 && polished > lo && polished < hi {
                let rp = residual(polished);
                if rp.abs() <= r.abs() {
                    return Ok(polished.exp());
                }
            }
            return Ok(c);
        }
        if r > 0.0 {
            hi = u;
        } else {
            lo = u;
        }
        let slope = material.d2phi_dcc(f, c) * c;
        let newton = u - r / slope;
        u = if slope > 0.0 && newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
        if hi - lo <= 4.0 * f64::EPSILON * (1.0 + u.abs()) {
            break;
        }
    }
    if best.0 <= tol {
        return Ok(best.1.exp());
    }
    Err(fail(format!(
        "bracket collapsed with residual {:e} above tolerance {tol:e}",
        best.0
    )))
}
