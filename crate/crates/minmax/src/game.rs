//! Analytic two-player zero-sum games and their oracles.
//!
//! Every game here is of the form
//!
//! ```text
//! f(x, y) = 1/2 x^T H x + x^T A y - 1/2 y^T G y
//! ```
//!
//! for constant matrices `H` (x-curvature), `A` (coupling), and `G`
//! (y-curvature); player x minimizes f and player y maximizes it. Because f
//! is at most quadratic, gradients are affine, every second-derivative block
//! is a constant matrix, and Jacobian-vector products are exact — no autodiff
//! and no truncation error anywhere. The origin is always the Nash
//! equilibrium.
//!
//! Four named kinds cover the laboratory:
//!
//! * **Bilinear** — `f = x^T A y` (H = G = 0): pure rotation, the hard case
//!   for simultaneous gradient play.
//! * **QuadraticMatrix** — the general form above with symmetric H and G.
//! * **QuadraticScalar** — `f = h/2 x^2 - h/2 y^2 + x y`, the 1-dimensional
//!   quadratic with unit coupling, used by the discrete energy certificates.
//! * **ScaledSeparable** — `f = gamma (x^2 - y^2)`, a decoupled
//!   strongly-convex/strongly-concave scalar game used by the failure-case
//!   suite; its coupling block is zero.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Which second-derivative block of f a Jacobian-vector product uses.
///
/// With f as above the blocks are constants: `xy -> A`, `yx -> A^T`,
/// `xx -> H`, and `yy -> -G` (the second derivative of `-1/2 y^T G y`).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Block {
    Xy,
    Yx,
    Xx,
    Yy,
}

/// The named game families.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GameKind {
    Bilinear,
    QuadraticMatrix,
    QuadraticScalar,
    ScaledSeparable,
}

impl GameKind {
    pub fn name(self) -> &'static str {
        match self {
            GameKind::Bilinear => "bilinear",
            GameKind::QuadraticMatrix => "quadratic",
            GameKind::QuadraticScalar => "quadratic_scalar",
            GameKind::ScaledSeparable => "scaled_separable",
        }
    }
}

/// An immutable game with exact oracles.
///
/// Construction fixes the dimensions (`dim_x == dim_y` for all kinds; the
/// scalar kinds use n = 1) and the three constant matrices. All operations
/// are pure, so a `GameOracle` can be shared freely across threads.
#[derive(Debug, Clone)]
pub struct GameOracle {
    kind: GameKind,
    n: usize,
    h: DMatrix<f64>,
    a: DMatrix<f64>,
    g: DMatrix<f64>,
}

/// Maximum allowed relative asymmetry when validating H and G.
const SYMMETRY_TOL: f64 = 1e-12;

fn check_symmetric(name: &str, m: &DMatrix<f64>) -> Result<()> {
    let scale = m.amax().max(1.0);
    for i in 0..m.nrows() {
        for j in (i + 1)..m.ncols() {
            if (m[(i, j)] - m[(j, i)]).abs() > SYMMETRY_TOL * scale {
                return Err(Error::InvalidArgument(format!(
                    "{name} must be symmetric; entries ({i},{j}) and ({j},{i}) differ by {}",
                    (m[(i, j)] - m[(j, i)]).abs()
                )));
            }
        }
    }
    Ok(())
}

impl GameOracle {
    /// Bilinear game `f = x^T A y`. `A` must be square.
    pub fn bilinear(a: DMatrix<f64>) -> Result<Self> {
        if a.nrows() != a.ncols() {
            return Err(Error::shape(
                "bilinear",
                "square coupling matrix",
                format!("{}x{}", a.nrows(), a.ncols()),
            ));
        }
        let n = a.nrows();
        Ok(GameOracle {
            kind: GameKind::Bilinear,
            n,
            h: DMatrix::zeros(n, n),
            a,
            g: DMatrix::zeros(n, n),
        })
    }

    /// General quadratic game `f = 1/2 x^T H x + x^T A y - 1/2 y^T G y`.
    ///
    /// `H` and `G` must be symmetric (to machine tolerance) and all three
    /// matrices must share one dimension. No definiteness is required: the
    /// quadratic forms are taken as given.
    pub fn quadratic(h: DMatrix<f64>, a: DMatrix<f64>, g: DMatrix<f64>) -> Result<Self> {
        let n = a.nrows();
        for (name, m) in [("H", &h), ("A", &a), ("G", &g)] {
            if m.nrows() != n || m.ncols() != n {
                return Err(Error::shape(
                    "quadratic",
                    format!("{n}x{n} for {name}"),
                    format!("{}x{}", m.nrows(), m.ncols()),
                ));
            }
        }
        check_symmetric("H", &h)?;
        check_symmetric("G", &g)?;
        Ok(GameOracle {
            kind: GameKind::QuadraticMatrix,
            n,
            h,
            a,
            g,
        })
    }

    /// Scalar quadratic game `f = h/2 x^2 - h/2 y^2 + x y`.
    pub fn quadratic_scalar(h: f64) -> Self {
        GameOracle {
            kind: GameKind::QuadraticScalar,
            n: 1,
            h: DMatrix::from_element(1, 1, h),
            a: DMatrix::from_element(1, 1, 1.0),
            g: DMatrix::from_element(1, 1, h),
        }
    }

    /// Decoupled scalar game `f = gamma (x^2 - y^2)`.
    pub fn scaled_separable(gamma: f64) -> Self {
        GameOracle {
            kind: GameKind::ScaledSeparable,
            n: 1,
            h: DMatrix::from_element(1, 1, 2.0 * gamma),
            a: DMatrix::from_element(1, 1, 0.0),
            g: DMatrix::from_element(1, 1, 2.0 * gamma),
        }
    }

    pub fn kind(&self) -> GameKind {
        self.kind
    }

    /// Per-player dimension (dim_x = dim_y = n).
    pub fn dim(&self) -> usize {
        self.n
    }

    /// The coupling matrix A.
    pub fn coupling(&self) -> &DMatrix<f64> {
        &self.a
    }

    fn check_state(&self, context: &'static str, x: &DVector<f64>, y: &DVector<f64>) -> Result<()> {
        if x.len() != self.n || y.len() != self.n {
            return Err(Error::shape(
                context,
                format!("x and y of length {}", self.n),
                format!("({}, {})", x.len(), y.len()),
            ));
        }
        Ok(())
    }

    /// Game value `f(x, y)`.
    pub fn eval_f(&self, x: &DVector<f64>, y: &DVector<f64>) -> Result<f64> {
        self.check_state("eval_f", x, y)?;
        let quad_x = 0.5 * x.dot(&(&self.h * x));
        let cross = x.dot(&(&self.a * y));
        let quad_y = 0.5 * y.dot(&(&self.g * y));
        Ok(quad_x + cross - quad_y)
    }

    /// Exact gradients `(grad_x f, grad_y f) = (Hx + Ay, A^T x - Gy)`.
    pub fn grads(&self, x: &DVector<f64>, y: &DVector<f64>) -> Result<(DVector<f64>, DVector<f64>)> {
        self.check_state("grads", x, y)?;
        let gx = &self.h * x + &self.a * y;
        let gy = self.a.transpose() * x - &self.g * y;
        Ok((gx, gy))
    }

    /// The x-player's gradient alone: `grad_x f = Hx + Ay`.
    pub fn grad_x(&self, x: &DVector<f64>, y: &DVector<f64>) -> Result<DVector<f64>> {
        self.check_state("grad_x", x, y)?;
        Ok(&self.h * x + &self.a * y)
    }

    /// The y-player's gradient alone: `grad_y f = A^T x - Gy`.
    pub fn grad_y(&self, x: &DVector<f64>, y: &DVector<f64>) -> Result<DVector<f64>> {
        self.check_state("grad_y", x, y)?;
        Ok(self.a.transpose() * x - &self.g * y)
    }

    /// Exact product of a second-derivative block with `v`.
    ///
    /// The blocks are constant (the games are quadratic), so no state is
    /// needed: `xy` applies A, `yx` applies A^T, `xx` applies H, and `yy`
    /// applies -G.
    pub fn jvp(&self, block: Block, v: &DVector<f64>) -> Result<DVector<f64>> {
        if v.len() != self.n {
            return Err(Error::shape("jvp", self.n, v.len()));
        }
        Ok(match block {
            Block::Xy => &self.a * v,
            Block::Yx => self.a.transpose() * v,
            Block::Xx => &self.h * v,
            Block::Yy => -(&self.g * v),
        })
    }

    /// The named second-derivative block as a dense matrix.
    pub fn hessian_block(&self, block: Block) -> DMatrix<f64> {
        match block {
            Block::Xy => self.a.clone(),
            Block::Yx => self.a.transpose(),
            Block::Xx => self.h.clone(),
            Block::Yy => -self.g.clone(),
        }
    }

    /// The simultaneous-play vector field `v(x, y) = (grad_x f, -grad_y f)`,
    /// returned as one concatenated vector of length 2n. Plain descent-ascent
    /// is `w' = w - eta v(w)`, and the field's Jacobian on bilinear games is
    /// the rotation generator `[0, A; -A^T, 0]`.
    pub fn vector_field(&self, x: &DVector<f64>, y: &DVector<f64>) -> Result<DVector<f64>> {
        let (gx, gy) = self.grads(x, y)?;
        let mut v = DVector::zeros(2 * self.n);
        v.rows_mut(0, self.n).copy_from(&gx);
        v.rows_mut(self.n, self.n).copy_from(&(-gy));
        Ok(v)
    }

    /// Central-difference approximation of [`GameOracle::grads`].
    ///
    /// A test oracle: it goes through `eval_f` only, so agreement with the
    /// analytic gradients checks both at once. `step` is the half-width of
    /// the centered stencil.
    pub fn fd_grad(
        &self,
        x: &DVector<f64>,
        y: &DVector<f64>,
        step: f64,
    ) -> Result<(DVector<f64>, DVector<f64>)> {
        if step <= 0.0 {
            return Err(Error::InvalidArgument(format!(
                "fd_grad step must be positive, got {step}"
            )));
        }
        self.check_state("fd_grad", x, y)?;
        let mut gx = DVector::zeros(self.n);
        let mut gy = DVector::zeros(self.n);
        let mut xp = x.clone();
        let mut yp = y.clone();
        for i in 0..self.n {
            xp[i] = x[i] + step;
            let hi = self.eval_f(&xp, y)?;
            xp[i] = x[i] - step;
            let lo = self.eval_f(&xp, y)?;
            xp[i] = x[i];
            gx[i] = (hi - lo) / (2.0 * step);

            yp[i] = y[i] + step;
            let hi = self.eval_f(x, &yp)?;
            yp[i] = y[i] - step;
            let lo = self.eval_f(x, &yp)?;
            yp[i] = y[i];
            gy[i] = (hi - lo) / (2.0 * step);
        }
        Ok((gx, gy))
    }
}
