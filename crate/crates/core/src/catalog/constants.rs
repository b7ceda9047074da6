use std::f64::consts::PI;

use serde::Serialize;

use super::CatalogError;
use crate::numerics::{beta_fn, gamma_fn, integrate_singular, sphere_area, QuadratureSpec};

fn check_alpha(alpha: f64) -> Result<(), CatalogError> {
    if alpha > 0.0 && alpha < 2.0 {
        Ok(())
    } else {
        Err(CatalogError::Domain(format!("alpha = {alpha} outside (0, 2)")))
    }
}

fn check_dim(n: usize) -> Result<(), CatalogError> {
    if n >= 1 {
        Ok(())
    } else {
        Err(CatalogError::Domain("dimension must be at least 1".into()))
    }
}

/// `A(n,-α) = α 2^{α-1} Γ((n+α)/2) π^{-n/2} / Γ(1-α/2)`.
pub fn normalization_constant(n: usize, alpha: f64) -> Result<f64, CatalogError> {
    check_alpha(alpha)?;
    check_dim(n)?;
    let nf = n as f64;
    let g1 = gamma_fn(0.5 * (nf + alpha))?;
    let g2 = gamma_fn(1.0 - 0.5 * alpha)?;
    Ok(alpha * 2f64.powf(alpha - 1.0) * g1 * PI.powf(-0.5 * nf) / g2)
}

fn spec() -> QuadratureSpec {
    QuadratureSpec::new(1e-14, 1e-13)
}

fn integrate(
    what: &'static str,
    f: impl FnMut(f64) -> f64,
    a: f64,
    b: f64,
    exponents: (f64, f64),
) -> Result<f64, CatalogError> {
    let r = integrate_singular(f, a, b, &spec().with_exponents(exponents.0, exponents.1))?;
    if !r.converged {
        return Err(CatalogError::NotConverged { what, value: r.value, error: r.error_estimate });
    }
    Ok(r.value)
}

/// `∫₀^{1/2} t^e w(t) dt` for `w` smooth on `[0, 1/2]`.
fn half_moment(e: f64, w: &impl Fn(f64) -> f64) -> Result<f64, CatalogError> {
    integrate("power moment", |t: f64| t.powf(e) * w(t), 0.0, 0.5, (e, 0.0))
}

fn check_p(alpha: f64, p: f64) -> Result<(), CatalogError> {
    check_alpha(alpha)?;
    if p > -1.0 && p < alpha {
        Ok(())
    } else {
        Err(CatalogError::Domain(format!("p = {p} outside (-1, {alpha})")))
    }
}

/// `∫₀¹ (t^p - 1)(1 - t^{α-p-1}) w(t) dt` with `w(t) = (1-t)^{-1-α}` (`reflected = false`)
/// or `(1+t)^{-1-α}`. Split at 1/2; the right half is written in `s = 1-t`
/// so the vanishing numerator keeps full precision.
fn gamma_like(alpha: f64, p: f64, reflected: bool) -> Result<f64, CatalogError> {
    check_p(alpha, p)?;
    let b = alpha - p - 1.0;
    if p == 0.0 || b == 0.0 {
        return Ok(0.0);
    }
    // (t^p - 1)(1 - t^b) = t^p + t^b - 1 - t^{α-1}
    let w = |t: f64| if reflected { (1.0 + t).powf(-1.0 - alpha) } else { (1.0 - t).powf(-1.0 - alpha) };
    let left = half_moment(p, &w)? + half_moment(b, &w)? - half_moment(0.0, &w)? - half_moment(alpha - 1.0, &w)?;
    let right = integrate(
        "gamma coefficient (right)",
        |s: f64| {
            let lt = (-s).ln_1p();
            let num = (p * lt).exp_m1() * -(b * lt).exp_m1();
            let w = if reflected { (2.0 - s).powf(-1.0 - alpha) } else { s.powf(-1.0 - alpha) };
            num * w
        },
        0.0,
        0.5,
        (if reflected { 0.0 } else { 1.0 - alpha }, 0.0),
    )?;
    Ok(left + right)
}

/// `γ(α,p) = ∫₀¹ (t^p-1)(1-t^{α-p-1})(1-t)^{-1-α} dt`, `p ∈ (-1, α)`.
pub fn gamma_coeff(alpha: f64, p: f64) -> Result<f64, CatalogError> {
    gamma_like(alpha, p, false)
}

/// The same numerator over `(1+t)^{1+α}`: the coefficient for the
/// reflection-ratio kernel `|x-y|^{n+α}/|x-ȳ|^{n+α}`.
pub fn gamma_bar_coeff(alpha: f64, p: f64) -> Result<f64, CatalogError> {
    gamma_like(alpha, p, true)
}

/// `∫_{|y|=1, y_n ≥ 0} y_n^α m(dy)`; the n = 1 sphere is the single point 1.
/// Closed form `σ_{n-2}/2 · B((α+1)/2, (n-1)/2)`.
pub fn hemisphere_moment(n: usize, alpha: f64) -> Result<f64, CatalogError> {
    check_dim(n)?;
    if n == 1 {
        return Ok(1.0);
    }
    let nf = n as f64;
    Ok(0.5 * sphere_area(n - 1) * beta_fn(0.5 * (alpha + 1.0), 0.5 * (nf - 1.0))?)
}

/// [`hemisphere_moment`] by quadrature of the polar-angle reduction
/// `σ_{n-2} ∫₀^{π/2} cos^α θ sin^{n-2} θ dθ`.
pub fn hemisphere_moment_quadrature(n: usize, alpha: f64) -> Result<f64, CatalogError> {
    check_dim(n)?;
    if n == 1 {
        return Ok(1.0);
    }
    let k = (n - 2) as i32;
    let v = integrate(
        "hemisphere moment",
        |th: f64| th.cos().powf(alpha) * th.sin().powi(k),
        0.0,
        0.5 * PI,
        (k as f64, alpha),
    )?;
    Ok(sphere_area(n - 1) * v)
}

/// `C(n,α,p) = A(n,-α) · S(n,α) · γ(α,p)`, the coefficient of `x_n^{p-α}` in
/// the regional image of `y_n^p` on the half-space.
pub fn c_half_space(n: usize, alpha: f64, p: f64) -> Result<f64, CatalogError> {
    Ok(normalization_constant(n, alpha)? * hemisphere_moment(n, alpha)? * gamma_coeff(alpha, p)?)
}

/// The coefficient for the reflection-ratio kernel.
pub fn c_half_space_reflected(n: usize, alpha: f64, p: f64) -> Result<f64, CatalogError> {
    Ok(normalization_constant(n, alpha)? * hemisphere_moment(n, alpha)? * gamma_bar_coeff(alpha, p)?)
}

/// `∫₀¹ (y^{α-p-1} - y^{p-1}) (1-y)^{-α} dy`, `p ∈ (0, α)`.
fn killed_integral(alpha: f64, p: f64) -> Result<f64, CatalogError> {
    check_alpha(alpha)?;
    if !(p > 0.0 && p < alpha) {
        return Err(CatalogError::Domain(format!("p = {p} outside (0, {alpha})")));
    }
    let b = alpha - p - 1.0;
    if b == p - 1.0 {
        return Ok(0.0);
    }
    let w = |y: f64| (1.0 - y).powf(-alpha);
    let left = half_moment(b, &w)? - half_moment(p - 1.0, &w)?;
    // y^b - y^{p-1} = y^{p-1}(y^{α-2p} - 1)
    let right = integrate(
        "killed integral (right)",
        |s: f64| {
            let ly = (-s).ln_1p();
            ((p - 1.0) * ly).exp() * ((alpha - 2.0 * p) * ly).exp_m1() * s.powf(-alpha)
        },
        0.0,
        0.5,
        (1.0 - alpha, 0.0),
    )?;
    Ok(left + right)
}

/// `Λ(n,α,p) = (p A/α) · ∫₀¹(y^{α-p-1}-y^{p-1})(1-y)^{-α} dy · S(n,α)`: the
/// coefficient of `x_n^{p-α}` in the full-space image of `(y_n)_+^p`.
///
/// The integral only exists for `p > 0`. On `(-1, 0]` the image is the
/// regional one minus the killing term `u(x)·A∫_{y_n<0}|x-y|^{-n-α}dy =
/// u(x)·A·S/α·x_n^{-α}`, so `Λ = A·S·(γ(α,p) - 1/α)` there.
pub fn lambda_killed(n: usize, alpha: f64, p: f64) -> Result<f64, CatalogError> {
    if p > -1.0 && p <= 0.0 {
        let (a, s) = (normalization_constant(n, alpha)?, hemisphere_moment(n, alpha)?);
        return Ok(a * s * (gamma_coeff(alpha, p)? - 1.0 / alpha));
    }
    let k = killed_integral(alpha, p)?;
    Ok(p * normalization_constant(n, alpha)? / alpha * k * hemisphere_moment(n, alpha)?)
}

/// `Λ̄(n,α,p) = (A/α)(1 + p·∫…) · S(n,α)`; equals `C(n,α,p)` on `(0, α)`.
pub fn lambda_regional(n: usize, alpha: f64, p: f64) -> Result<f64, CatalogError> {
    let k = killed_integral(alpha, p)?;
    Ok(normalization_constant(n, alpha)? / alpha * (1.0 + p * k) * hemisphere_moment(n, alpha)?)
}

/// One row of closed-form constants. `lambda` is `None` outside `p ∈ (-1, α)`,
/// `lambda_bar` outside `p ∈ (0, α)`.
#[derive(Debug, Clone, Serialize)]
pub struct ConstantsTable {
    pub n: usize,
    pub alpha: f64,
    pub p: f64,
    pub a: f64,
    pub omega: f64,
    pub beta: f64,
    pub gamma: f64,
    pub gamma_bar: f64,
    pub c: f64,
    pub s: f64,
    pub lambda: Option<f64>,
    pub lambda_bar: Option<f64>,
}

impl ConstantsTable {
    pub fn compute(n: usize, alpha: f64, p: f64) -> Result<Self, CatalogError> {
        let in_killed_range = p > 0.0 && p < alpha;
        let nf = n as f64;
        Ok(ConstantsTable {
            n,
            alpha,
            p,
            a: normalization_constant(n, alpha)?,
            omega: if n >= 2 { sphere_area(n - 1) } else { f64::NAN },
            beta: if n >= 2 { beta_fn(0.5 * (alpha + 1.0), 0.5 * (nf - 1.0))? } else { f64::NAN },
            gamma: gamma_coeff(alpha, p)?,
            gamma_bar: gamma_bar_coeff(alpha, p)?,
            c: c_half_space(n, alpha, p)?,
            s: hemisphere_moment(n, alpha)?,
            lambda: if p > -1.0 && p < alpha { Some(lambda_killed(n, alpha, p)?) } else { None },
            lambda_bar: if in_killed_range { Some(lambda_regional(n, alpha, p)?) } else { None },
        })
    }

    pub const CSV_HEADER: &'static str = "n,alpha,p,A,gamma,gammabar,C,S,Lambda,LambdaBar";

    pub fn csv_row(&self) -> String {
        let opt = |v: Option<f64>| v.map_or("nan".to_string(), |v| format!("{v:.15e}"));
        format!(
            "{},{},{},{:.15e},{:.15e},{:.15e},{:.15e},{:.15e},{},{}",
            self.n,
            self.alpha,
            self.p,
            self.a,
            self.gamma,
            self.gamma_bar,
            self.c,
            self.s,
            opt(self.lambda),
            opt(self.lambda_bar)
        )
    }
}
