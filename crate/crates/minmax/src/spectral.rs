//! Spectra of the discrete update operators on bilinear games.
//!
//! For a bilinear game the vector field is linear, so each optimizer's update
//! map is a fixed matrix and its convergence is decided entirely by the
//! spectral radius. The coupling matrix's singular values give the field's
//! eigenvalues exactly (`lambda = ±i sigma_j`), which keeps the closed-form
//! path free of a general eigensolver; the dense-eigensolve path exists to
//! cross-check the assembled operators.
//!
//! Rates are reported as contraction factors of the *squared* distance
//! `|w_k - w*|^2 + |w_{k-1} - w*|^2` per step, i.e. the squared modulus of
//! the dominant eigenvalue; per-iterate distances contract with its square
//! root.

use nalgebra::DMatrix;
use num_complex::Complex;

use crate::error::{Error, Result};

type C64 = Complex<f64>;

/// Eigenvalues of one update operator plus the rate they imply.
#[derive(Debug, Clone)]
pub struct SpectralReport {
    /// All eigenvalues of the update operator.
    pub eigenvalues: Vec<C64>,
    /// Largest eigenvalue modulus.
    pub spectral_radius: f64,
    /// Squared-distance contraction factor per step (`spectral_radius^2`);
    /// values at or above 1 mean no linear convergence.
    pub predicted_rate: f64,
    /// Whether the operator is a strict contraction.
    pub converged: bool,
    /// Per-mode detail: the field eigenvalue and the two update-operator
    /// roots it induces.
    pub per_lambda: Vec<ModeRoots>,
}

/// The pair of update-operator eigenvalues induced by one field eigenvalue.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeRoots {
    pub lambda: C64,
    pub mu_plus: C64,
    pub mu_minus: C64,
}

fn report_from_modes(per_lambda: Vec<ModeRoots>) -> SpectralReport {
    let eigenvalues: Vec<C64> = per_lambda
        .iter()
        .flat_map(|m| [m.mu_plus, m.mu_minus])
        .collect();
    let spectral_radius = eigenvalues.iter().map(|z| z.norm()).fold(0.0, f64::max);
    SpectralReport {
        eigenvalues,
        spectral_radius,
        predicted_rate: spectral_radius * spectral_radius,
        converged: spectral_radius < 1.0,
        per_lambda,
    }
}

fn singular_values(a: &DMatrix<f64>) -> Result<Vec<f64>> {
    if a.nrows() != a.ncols() {
        return Err(Error::shape(
            "spectral coupling matrix",
            "square matrix",
            format!("{}x{}", a.nrows(), a.ncols()),
        ));
    }
    Ok(a.clone().svd(false, false).singular_values.iter().copied().collect())
}

/// Field eigenvalues of a bilinear game: `±i sigma_j` over the singular
/// values of the coupling matrix, in a stable order.
pub fn field_eigenvalues(a: &DMatrix<f64>) -> Result<Vec<C64>> {
    let mut out = Vec::with_capacity(2 * a.nrows());
    for sigma in singular_values(a)? {
        out.push(C64::new(0.0, sigma));
        out.push(C64::new(0.0, -sigma));
    }
    Ok(out)
}

/// Spectrum of the simultaneous gradient descent-ascent map `I - eta J` on a
/// bilinear game: eigenvalues `1 - eta lambda` over `lambda = ±i sigma_j`,
/// hence radius `max_j sqrt(1 + eta^2 sigma_j^2)` — strictly above 1 whenever
/// the game couples the players, which is the method's failure mode.
pub fn gda_spectrum(a: &DMatrix<f64>, eta: f64) -> Result<SpectralReport> {
    if eta <= 0.0 {
        return Err(Error::InvalidArgument(format!("step size eta must be positive, got {eta}")));
    }
    // The map has no history, so each mode contributes a single eigenvalue;
    // the per-mode pair degenerates to (1 - eta lambda, 0), matching the
    // zero-interaction limit of the closed-form roots.
    let per_lambda: Vec<ModeRoots> = field_eigenvalues(a)?
        .into_iter()
        .map(|lambda| ModeRoots {
            lambda,
            mu_plus: C64::new(1.0, 0.0) - lambda * eta,
            mu_minus: C64::new(0.0, 0.0),
        })
        .collect();
    let eigenvalues: Vec<C64> = per_lambda.iter().map(|m| m.mu_plus).collect();
    let spectral_radius = eigenvalues.iter().map(|z| z.norm()).fold(0.0, f64::max);
    Ok(SpectralReport {
        eigenvalues,
        spectral_radius,
        predicted_rate: spectral_radius * spectral_radius,
        converged: spectral_radius < 1.0,
        per_lambda,
    })
}

/// Both roots of the per-mode characteristic polynomial
///
/// ```text
/// X^2 - X (1 - (eta + alpha) lambda + beta) + (beta - alpha lambda) = 0
/// ```
///
/// of the momentum-plus-interaction update. Labeling: `mu_plus` is the root
/// continuously connected to the plain-gradient eigenvalue `1 - eta lambda`
/// as `alpha, beta -> 0` (the larger-modulus root there); a double root
/// (`Delta = 0`) is returned in both slots.
pub fn lead_mu_closed_form(lambda: C64, alpha: f64, beta: f64, eta: f64) -> (C64, C64) {
    let b = C64::new(1.0 + beta, 0.0) - lambda * (eta + alpha);
    let delta = b * b - (C64::new(beta, 0.0) - lambda * alpha) * 4.0;
    let mut s = delta.sqrt();
    // Orient the square root so that mu_plus = (b + s)/2 is the
    // larger-modulus root, which is the branch the continuity labeling picks.
    if (b.conj() * s).re < 0.0 {
        s = -s;
    }
    ((b + s) * 0.5, (b - s) * 0.5)
}

/// The one-step companion operator of the momentum-plus-interaction update on
/// a bilinear game, acting on stacked pairs `(w_k, w_{k-1})`:
///
/// ```text
/// [ (1 + beta) I - (eta + alpha) J    -beta I + alpha J ]
/// [            I                               0        ]
/// ```
///
/// where `J = [0, A; -A^T, 0]` is the field Jacobian. The matrix is
/// `4n x 4n` for an `n`-dimensional game.
pub fn assemble_lead_operator(
    a: &DMatrix<f64>,
    eta: f64,
    beta: f64,
    alpha: f64,
) -> Result<DMatrix<f64>> {
    if a.nrows() != a.ncols() {
        return Err(Error::shape(
            "assemble_lead_operator",
            "square coupling matrix",
            format!("{}x{}", a.nrows(), a.ncols()),
        ));
    }
    let n = a.nrows();
    let mut j = DMatrix::<f64>::zeros(2 * n, 2 * n);
    j.view_mut((0, n), (n, n)).copy_from(a);
    j.view_mut((n, 0), (n, n)).copy_from(&(-a.transpose()));

    let top_left = DMatrix::<f64>::identity(2 * n, 2 * n) * (1.0 + beta) - &j * (eta + alpha);
    let top_right = DMatrix::<f64>::identity(2 * n, 2 * n) * (-beta) + &j * alpha;

    let mut op = DMatrix::<f64>::zeros(4 * n, 4 * n);
    op.view_mut((0, 0), (2 * n, 2 * n)).copy_from(&top_left);
    op.view_mut((0, 2 * n), (2 * n, 2 * n)).copy_from(&top_right);
    op.view_mut((2 * n, 0), (2 * n, 2 * n))
        .copy_from(&DMatrix::<f64>::identity(2 * n, 2 * n));
    Ok(op)
}

/// Closed-form spectrum of the momentum-plus-interaction update on a bilinear
/// game: the `4n` roots `mu_±(lambda)` over `lambda = ±i sigma_j`.
pub fn lead_spectrum(a: &DMatrix<f64>, eta: f64, beta: f64, alpha: f64) -> Result<SpectralReport> {
    let per_lambda = field_eigenvalues(a)?
        .into_iter()
        .map(|lambda| {
            let (mu_plus, mu_minus) = lead_mu_closed_form(lambda, alpha, beta, eta);
            ModeRoots { lambda, mu_plus, mu_minus }
        })
        .collect();
    Ok(report_from_modes(per_lambda))
}

/// The optimally tuned rate on a bilinear game: with
/// `eta = alpha = 1/(2 sigma_max)` the squared distance contracts per step by
///
/// ```text
/// rho = 1/2 + (1/2) sqrt(1 - sigma_min^2 / sigma_max^2)
/// ```
///
/// Returns `(rho, eta_alpha)`. A zero coupling matrix has no tuned step size
/// and is rejected.
pub fn tuned_rate_bilinear(a: &DMatrix<f64>) -> Result<(f64, f64)> {
    let sv = singular_values(a)?;
    let smax = sv.iter().copied().fold(0.0, f64::max);
    let smin = sv.iter().copied().fold(f64::INFINITY, f64::min);
    if smax <= 0.0 {
        return Err(Error::InvalidArgument(
            "tuned rate is undefined for a zero coupling matrix".to_string(),
        ));
    }
    let ratio = smin * smin / (smax * smax);
    let rate = 0.5 + 0.5 * (1.0 - ratio).sqrt();
    Ok((rate, 1.0 / (2.0 * smax)))
}

/// Derivative of the squared-modulus rate `rho(alpha) = |mu_plus|^2` at
/// `alpha = 0`, `beta = 0`, for a purely imaginary field eigenvalue
/// `lambda = xi i`:
///
/// ```text
/// d rho / d alpha |_0 = (2 eta / |1 - eta lambda|^2) (eta^2 xi^4 - xi^2)
/// ```
///
/// Negative exactly when `0 < eta < 1/xi`: a little opponent-interaction
/// strictly improves the rate throughout the useful step-size range. Field
/// eigenvalues off the imaginary axis are outside this formula's validity
/// and are rejected.
pub fn rho_alpha_derivative_at_zero(lambda: C64, eta: f64) -> Result<f64> {
    if lambda.re != 0.0 {
        return Err(Error::Unsupported(format!(
            "rate-derivative formula requires a purely imaginary field eigenvalue, got {lambda}"
        )));
    }
    let xi = lambda.im;
    if xi <= 0.0 {
        return Err(Error::InvalidArgument(format!(
            "field eigenvalue must have positive imaginary part, got {lambda}"
        )));
    }
    if eta <= 0.0 {
        return Err(Error::InvalidArgument(format!("step size eta must be positive, got {eta}")));
    }
    let denom = (C64::new(1.0, 0.0) - lambda * eta).norm_sqr();
    Ok((2.0 * eta / denom) * (eta * eta * xi.powi(4) - xi * xi))
}

/// Sort eigenvalues lexicographically by real part, then imaginary part —
/// a canonical order for comparing spectra as multisets.
pub fn sort_eigenvalues(mut v: Vec<C64>) -> Vec<C64> {
    v.sort_by(|p, q| {
        p.re.partial_cmp(&q.re)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(p.im.partial_cmp(&q.im).unwrap_or(std::cmp::Ordering::Equal))
    });
    v
}
