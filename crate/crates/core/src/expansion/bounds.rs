use crate::error::{invalid, Result};

fn check_c(c: f64) -> Result<()> {
    if !(c > 0.0) || c.is_nan() {
        return Err(invalid(format!("c must be positive, got {c}")));
    }
    Ok(())
}

/// `ψ(c) = 8 / (1 − e^{−c/2})`.
pub fn bound_psi(c: f64) -> Result<f64> {
    check_c(c)?;
    Ok(-8.0 / (-0.5 * c).exp_m1())
}

/// `(ψ(c)/2) e^{−cm}`.
pub fn bound_lemma2(c: f64, m: f64) -> Result<f64> {
    check_m(m)?;
    Ok(0.5 * bound_psi(c)? * (-c * m).exp())
}

/// `exp(ψ(c)(e^{−cm} + 6)/2) · (ψ(c)/2) e^{−cm}`.
pub fn bound_mext(c: f64, m: f64) -> Result<f64> {
    check_m(m)?;
    let psi = bound_psi(c)?;
    let e = (-c * m).exp();
    Ok((0.5 * psi * (e + 6.0)).exp() * 0.5 * psi * e)
}

fn check_m(m: f64) -> Result<()> {
    if !(m >= 0.0) {
        return Err(invalid(format!("m must be nonnegative, got {m}")));
    }
    Ok(())
}
