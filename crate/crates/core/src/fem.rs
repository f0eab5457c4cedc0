//! Piecewise-linear finite elements on a uniform mesh of (0, 1).
//!
//! Coefficients `α` are nodal values of `P_k u = Σ α_m v^m`. After scaling
//! the Galerkin system by `6/h` it reads
//!
//! ```text
//! M α' = S α + N(α) + F(t) + (residual),   M = tridiag(1, 4, 1),
//! S = -(6/h) K = (6/h²) tridiag(1, -2, 1),  F_m = (6/h)(f, v^m),
//! ```
//!
//! where `K` is the stiffness Gram matrix returned by [`assemble`]. The
//! diagonalized coordinates are `α = B β`.

use nalgebra::{DMatrix, SymmetricEigen};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::forcing::{Forcing, NormMode};
use crate::interval::{verified_inverse, Interval, IntervalMatrix, IntervalVector};
use crate::local::StepBounds;

/// Uniform mesh with `k` subintervals of length `h = 1/k`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mesh {
    k: usize,
    h: Interval,
}

impl Mesh {
    pub fn new(k: usize) -> Result<Self> {
        if k < 2 {
            return Err(Error::Config(format!("mesh needs k >= 2, got {k}")));
        }
        Ok(Mesh {
            k,
            h: Interval::rational(1, k as i64),
        })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn h(&self) -> Interval {
        self.h
    }

    /// Dimension `k - 1` of the FEM space.
    pub fn dim(&self) -> usize {
        self.k - 1
    }
}

fn tridiag(n: usize, diag: Interval, off: Interval) -> IntervalMatrix {
    IntervalMatrix::from_fn(n, n, |i, j| match i.abs_diff(j) {
        0 => diag,
        1 => off,
        _ => Interval::ZERO,
    })
}

/// Gram matrices `M_ij = (v^i, v^j)` and `K_ij = (v^i_x, v^j_x)`.
pub fn assemble(mesh: &Mesh) -> (IntervalMatrix, IntervalMatrix) {
    let n = mesh.dim();
    let k = mesh.k as i64;
    let m = tridiag(n, Interval::rational(2, 3 * k), Interval::rational(1, 6 * k));
    let s = tridiag(n, Interval::point(2.0 * k as f64), Interval::point(-(k as f64)));
    (m, s)
}

/// `(6/h)` times the Gram mass matrix: `tridiag(1, 4, 1)`.
pub fn ode_mass(mesh: &Mesh) -> IntervalMatrix {
    tridiag(mesh.dim(), Interval::point(4.0), Interval::ONE)
}

/// `-(6/h)` times the stiffness Gram matrix: `6k² tridiag(1, -2, 1)`.
pub fn ode_stiffness(mesh: &Mesh) -> IntervalMatrix {
    let c = Interval::point(6.0) * Interval::point(mesh.k as f64).sqr();
    tridiag(mesh.dim(), c * -2.0, c)
}

/// `N_m(α) = (1/h)(α_m α_{m-1} - α_m α_{m+1} + α²_{m-1} - α²_{m+1})` with
/// `α₀ = α_k = 0`.
pub fn nonlinear_term(alpha: &IntervalVector, mesh: &Mesh) -> IntervalVector {
    assert_eq!(alpha.len(), mesh.dim(), "coefficient vector has wrong length");
    let n = alpha.len();
    let inv_h = Interval::point(mesh.k as f64);
    let at = |i: isize| {
        if i < 0 || i as usize >= n {
            Interval::ZERO
        } else {
            alpha[i as usize]
        }
    };
    (0..n as isize)
        .map(|m| {
            let (l, c, r) = (at(m - 1), at(m), at(m + 1));
            inv_h * (c * (l - r) + l.sqr() - r.sqr())
        })
        .collect()
}

/// Float version of [`nonlinear_term`] for reference runs.
pub fn nonlinear_term_f64(alpha: &[f64], k: usize) -> Vec<f64> {
    let n = alpha.len();
    let at = |i: isize| if i < 0 || i as usize >= n { 0.0 } else { alpha[i as usize] };
    (0..n as isize)
        .map(|m| {
            let (l, c, r) = (at(m - 1), at(m), at(m + 1));
            k as f64 * (c * (l - r) + l * l - r * r)
        })
        .collect()
}

/// `x T xᵀ` for tridiagonal `T` given by its constant diagonal and
/// off-diagonal.
fn tridiag_form(x: &[Interval], diag: Interval, off: Interval) -> Interval {
    let d: Interval = x.iter().map(|v| v.sqr()).sum();
    let o: Interval = x.windows(2).map(|w| w[0] * w[1]).sum();
    (diag * d + Interval::point(2.0) * off * o).clamp_nonneg()
}

/// `‖Σ x_m v^m‖_{L²}` and `‖(Σ x_m v^m)_x‖_{L²}` for coefficients `x`.
pub fn fem_norms(x: &[Interval], mesh: &Mesh) -> (Interval, Interval) {
    let k = mesh.k as i64;
    let l2 = tridiag_form(x, Interval::rational(2, 3 * k), Interval::rational(1, 6 * k)).sqrt();
    let h1 = tridiag_form(x, Interval::point(2.0 * k as f64), Interval::point(-(k as f64))).sqrt();
    (l2, h1)
}

/// Change of basis that nearly diagonalizes `M⁻¹S`, with rigorous
/// enclosures of everything the inclusion needs.
#[derive(Debug, Clone)]
pub struct DiagonalBasis {
    b: DMatrix<f64>,
    b_iv: IntervalMatrix,
    binv: IntervalMatrix,
    binv_minv: IntervalMatrix,
    a: IntervalMatrix,
    eig_order: Vec<usize>,
    approx_eigenvalues: Vec<f64>,
    w_norms_l2: IntervalVector,
    w_norms_h1: IntervalVector,
}

impl DiagonalBasis {
    /// Columns have unit euclidean norm; column `l` is the approximate
    /// eigenvector with the `l`-th smallest `|λ|`.
    pub fn b(&self) -> &DMatrix<f64> {
        &self.b
    }

    pub fn b_interval(&self) -> &IntervalMatrix {
        &self.b_iv
    }

    /// Enclosure of `B⁻¹`.
    pub fn binv(&self) -> &IntervalMatrix {
        &self.binv
    }

    /// Enclosure of `B⁻¹M⁻¹` (ODE scaling of `M`). Row `l` holds the
    /// coefficients `c_l` of `w^l`.
    pub fn binv_minv(&self) -> &IntervalMatrix {
        &self.binv_minv
    }

    /// Enclosure of `B⁻¹M⁻¹SB`.
    pub fn a(&self) -> &IntervalMatrix {
        &self.a
    }

    /// `eig_order[l]` is the eigensolver's index of sorted column `l`.
    pub fn eig_order(&self) -> &[usize] {
        &self.eig_order
    }

    /// Float eigenvalues of `M⁻¹S` in sorted order (all negative).
    pub fn approx_eigenvalues(&self) -> &[f64] {
        &self.approx_eigenvalues
    }

    pub fn w_norms_l2(&self) -> &IntervalVector {
        &self.w_norms_l2
    }

    pub fn w_norms_h1(&self) -> &IntervalVector {
        &self.w_norms_h1
    }

    pub fn dim(&self) -> usize {
        self.b.ncols()
    }

    /// `α = Bβ` for every `β` in the box.
    pub fn to_alpha(&self, beta: &IntervalVector) -> IntervalVector {
        self.b_iv.matvec(beta)
    }

    /// `β = B⁻¹α` for every `α` in the box.
    pub fn to_beta(&self, alpha: &IntervalVector) -> IntervalVector {
        self.binv.matvec(alpha)
    }

    /// Float `β = B⁻¹α` for reference runs.
    pub fn to_beta_f64(&self, alpha: &[f64]) -> Vec<f64> {
        let v = self.binv.matvec(&IntervalVector::from_points(alpha));
        v.mid()
    }

    /// Float `α = Bβ`.
    pub fn to_alpha_f64(&self, beta: &[f64]) -> Vec<f64> {
        (&self.b * nalgebra::DVector::from_column_slice(beta)).as_slice().to_vec()
    }
}

/// Builds `B` from a float generalized eigendecomposition `K b = λ M b`
/// (Gram matrices), then encloses `B⁻¹`, `B⁻¹M⁻¹`, `A` and the `w^l` norms.
pub fn diagonalize(mesh: &Mesh, m: &IntervalMatrix, k: &IntervalMatrix) -> Result<DiagonalBasis> {
    let n = mesh.dim();
    let mm = m.mid();
    let kk = k.mid();
    let chol = mm
        .cholesky()
        .ok_or_else(|| Error::Config("mass matrix is not positive definite".into()))?;
    let l = chol.l();
    // C = L⁻¹ K L⁻ᵀ is symmetric with the same eigenvalues as M⁻¹K.
    let linv_k = l
        .solve_lower_triangular(&kk)
        .ok_or_else(|| Error::Config("singular Cholesky factor".into()))?;
    let c = l
        .solve_lower_triangular(&linv_k.transpose())
        .ok_or_else(|| Error::Config("singular Cholesky factor".into()))?;
    let c = (&c + c.transpose()) * 0.5;
    let eig = SymmetricEigen::new(c);
    let vecs = l
        .transpose()
        .solve_upper_triangular(&eig.eigenvectors)
        .ok_or_else(|| Error::Config("singular Cholesky factor".into()))?;

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let mut b = DMatrix::zeros(n, n);
    for (col, &src) in order.iter().enumerate() {
        let v = vecs.column(src);
        let norm = v.norm();
        // Fix the sign so the first nonzero entry is positive; this only
        // makes runs reproducible across eigensolver versions.
        let sign = if v.iter().find(|x| x.abs() > 0.0).copied().unwrap_or(1.0) < 0.0 {
            -1.0
        } else {
            1.0
        };
        b.set_column(col, &(v * (sign / norm)));
    }
    let approx_eigenvalues = order.iter().map(|&i| -eig.eigenvalues[i]).collect();

    let b_iv = IntervalMatrix::from_dmatrix(&b);
    let binv = verified_inverse(&b_iv)?;
    let minv = verified_inverse(&ode_mass(mesh))?;
    let binv_minv = binv.matmul(&minv);
    let a = binv_minv.matmul(&ode_stiffness(mesh).matmul(&b_iv));

    let (w_norms_l2, w_norms_h1): (Vec<_>, Vec<_>) = (0..n)
        .into_par_iter()
        .map(|l| fem_norms(binv_minv.row(l), mesh))
        .unzip();

    Ok(DiagonalBasis {
        b,
        b_iv,
        binv,
        binv_minv,
        a,
        eig_order: order,
        approx_eigenvalues,
        w_norms_l2: IntervalVector::new(w_norms_l2),
        w_norms_h1: IntervalVector::new(w_norms_h1),
    })
}

/// `(‖Q_k u‖_{H¹₀}, ‖Q_k u‖_{L²})` bounds `((h/π) R₃, (h²/π²) R₃)` whenever
/// `‖u_xx‖ ≤ R₃`.
pub fn galerkin_error_bounds(r3: Interval, h: Interval) -> (Interval, Interval) {
    let h1 = h / Interval::PI * r3;
    let l2 = h / Interval::PI * h1;
    (h1, l2)
}

/// Widths `ε_l` of the multivalued term `G` over one step.
#[derive(Debug, Clone, PartialEq)]
pub struct ResidualWidths {
    pub eps: IntervalVector,
    /// Part of `eps` not coming from the forcing.
    pub nonforcing: IntervalVector,
}

impl ResidualWidths {
    pub fn zero(n: usize) -> Self {
        ResidualWidths {
            eps: IntervalVector::zeros(n),
            nonforcing: IntervalVector::zeros(n),
        }
    }

    /// Upper end of the largest width.
    pub fn max(&self) -> f64 {
        self.eps.iter().map(|e| e.hi()).fold(0.0, f64::max)
    }
}

/// `C = M₅ + 3√2 M₂^{1/2} M₃^{3/2} + M₁^{1/2} M₂^{1/2} M₄`, bounding
/// `‖u_xxxx‖ + ‖(uu_x)_xx‖` over the window.
pub fn residual_constant(m: &[Interval; 5]) -> Interval {
    let [m1, m2, m3, m4, m5] = m.map(|x| x.upper().clamp_nonneg());
    let three_sqrt2 = Interval::point(3.0) * Interval::point(2.0).sqrt();
    m5 + three_sqrt2 * m2.sqrt() * m3.pow_rational(3, 2) + m1.sqrt() * m2.sqrt() * m4
}

/// Non-forcing part of the `l`-th width for a mode with norms
/// `‖w^l‖ ≤ w_l2`, `‖w^l_x‖ ≤ w_h1`:
/// `(6h/π²)[(M₂M₃/2)‖w^l_x‖ + (M₃² h^{1/2}/π^{1/2})‖w^l‖ + C‖w^l‖]`.
pub fn nonforcing_width(m: &[Interval; 5], w_l2: Interval, w_h1: Interval, h: Interval) -> Interval {
    let pi = Interval::PI;
    let mu = m.map(|x| x.upper().clamp_nonneg());
    let c = residual_constant(m);
    let lead = Interval::point(6.0) * h / pi.sqr();
    let qq = mu[2].sqr() * (h / pi).sqrt();
    lead * (mu[1] * mu[2] * 0.5 * w_h1.upper() + (qq + c) * w_l2.upper())
}

/// Widths `ε_l = nonforcing_width + (6/h) sup |(Q_k f, w^l)|` over the
/// window of `bounds`.
pub fn residual_widths(
    bounds: &StepBounds,
    basis: &DiagonalBasis,
    f: &Forcing,
    mesh: &Mesh,
    mode: NormMode,
) -> ResidualWidths {
    let h = mesh.h();
    let six_over_h = Interval::point(6.0) / h;
    let window = Some(bounds.window);
    let (eps, nonforcing): (Vec<_>, Vec<_>) = (0..basis.dim())
        .into_par_iter()
        .map(|l| {
            let wl2 = basis.w_norms_l2[l];
            let nf = nonforcing_width(&bounds.m, wl2, basis.w_norms_h1[l], h);
            let forcing = six_over_h * f.qk_pairing_bound(window, wl2, h, mode);
            (nf + forcing, nf)
        })
        .unzip();
    ResidualWidths {
        eps: IntervalVector::new(eps),
        nonforcing: IntervalVector::new(nonforcing),
    }
}
