use super::NumericsError;

pub const DEFAULT_QUAD_TOL: f64 = 1e-10;
pub const MAX_QUAD_DEPTH: usize = 64;

const INITIAL_PANELS: usize = 16;

/// `∫_a^b 1/f(v) dv` by adaptive Simpson with Richardson correction.
///
/// `tol` is relative to the magnitude of the integral. `f` must be positive on
/// `[a, b]`; an infinite value of `f` contributes zero.
///
/// The integral is taken in `u = v^{1/4}`, which smooths out the `√v` and
/// `v^{1/4}` cusps at the origin that profiles commonly have.
pub fn integrate_reciprocal<F>(f: F, a: f64, b: f64, tol: f64) -> Result<f64, NumericsError>
where
    F: Fn(f64) -> f64,
{
    if !(a.is_finite() && b.is_finite() && a >= 0.0 && b >= a) {
        return Err(NumericsError::InvalidInterval { a, b });
    }
    if a == b {
        return Ok(0.0);
    }
    let g = |u: f64| -> Result<f64, NumericsError> {
        let v = (u * u) * (u * u);
        let fv = f(v);
        if fv > 0.0 {
            Ok(4.0 * u * u * u / fv)
        } else {
            Err(NumericsError::NonPositiveIntegrand { at: v, value: fv })
        }
    };
    let (a, b) = (a.powf(0.25), b.powf(0.25));

    let h = (b - a) / INITIAL_PANELS as f64;
    let mut panels = Vec::with_capacity(INITIAL_PANELS);
    let mut coarse = 0.0;
    for k in 0..INITIAL_PANELS {
        let lo = a + h * k as f64;
        let hi = if k + 1 == INITIAL_PANELS { b } else { lo + h };
        let mid = 0.5 * (lo + hi);
        let (glo, gmid, ghi) = (g(lo)?, g(mid)?, g(hi)?);
        let s = simpson(glo, gmid, ghi, hi - lo);
        coarse += s;
        panels.push((lo, hi, glo, gmid, ghi, s));
    }
    let abs_tol = tol * coarse.abs().max(f64::MIN_POSITIVE);
    let per_panel = abs_tol / INITIAL_PANELS as f64;
    let mut total = 0.0;
    for (lo, hi, glo, gmid, ghi, s) in panels {
        total += refine(&g, lo, hi, glo, gmid, ghi, s, per_panel, 0)?;
    }
    Ok(total.max(0.0))
}

fn simpson(fa: f64, fm: f64, fb: f64, width: f64) -> f64 {
    width / 6.0 * (fa + 4.0 * fm + fb)
}

#[allow(clippy::too_many_arguments)]
fn refine<G>(
    g: &G,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: usize,
) -> Result<f64, NumericsError>
where
    G: Fn(f64) -> Result<f64, NumericsError>,
{
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = g(lm)?;
    let frm = g(rm)?;
    let left = simpson(fa, flm, fm, m - a);
    let right = simpson(fm, frm, fb, b - m);
    let diff = left + right - whole;
    if diff.abs() <= 15.0 * tol || m <= a || m >= b {
        return Ok(left + right + diff / 15.0);
    }
    if depth >= MAX_QUAD_DEPTH {
        return Err(NumericsError::QuadratureDiverged {
            depth: MAX_QUAD_DEPTH,
            at: m,
        });
    }
    Ok(refine(g, a, m, fa, flm, fm, left, 0.5 * tol, depth + 1)?
        + refine(g, m, b, fm, frm, fb, right, 0.5 * tol, depth + 1)?)
}
