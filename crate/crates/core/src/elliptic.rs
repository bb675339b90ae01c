//! The linear inner problem `-∇·(ε² G ∇z) + g_n z = f_n`, `z = 0` on the
//! boundary ring.
//!
//! Unknowns are the interior cells; boundary cells act as ghost zeros. The
//! five-point stencil uses arithmetic face averages of `G`, matching the face
//! discretization in [`crate::energy`]: `A z - f` is `ε/h²` times the
//! gradient of the discrete surrogate energy.

use nalgebra::{DMatrix, DVector};

use crate::energy::{gamma, ModelParams, PhaseField};
use crate::error::{Error, Result};
use crate::grid::{dot, GridField, GridGeometry};

/// Coefficients of one linearized step.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearizedData {
    /// Reaction coefficient `G(1 + 2z_n²) + λχ_Q`.
    pub g_n: GridField,
    /// Right-hand side `3 G z_n²`.
    pub f_n: GridField,
    /// `3 z_n² / (1 + 2 z_n²)`.
    pub gamma_n: GridField,
}

pub fn linearize(z_n: &PhaseField, p: &ModelParams) -> Result<LinearizedData> {
    p.check(z_n.field(), "linearize")?;
    let geo = *p.geometry();
    let g = p.canyon.values();
    let q = p.mask.inside();
    let z = z_n.values();
    let mut g_n = Vec::with_capacity(geo.len());
    let mut f_n = Vec::with_capacity(geo.len());
    let mut gamma_n = Vec::with_capacity(geo.len());
    for idx in 0..geo.len() {
        let z2 = z[idx] * z[idx];
        let confine = if q[idx] { p.lambda } else { 0.0 };
        g_n.push(g[idx] * (1.0 + 2.0 * z2) + confine);
        f_n.push(3.0 * g[idx] * z2);
        gamma_n.push(gamma(z[idx]));
    }
    Ok(LinearizedData {
        g_n: GridField::new(geo, g_n)?,
        f_n: GridField::new(geo, f_n)?,
        gamma_n: GridField::new(geo, gamma_n)?,
    })
}

/// Precomputed five-point stencil. `east[c]` couples `c` with `c + 1` and
/// `north[c]` couples `c` with `c + width`.
struct Stencil {
    geometry: GridGeometry,
    east: Vec<f64>,
    north: Vec<f64>,
    diag: Vec<f64>,
}

impl Stencil {
    fn new(data: &LinearizedData, p: &ModelParams) -> Result<Self> {
        let geo = *p.geometry();
        p.check(&data.g_n, "stencil: g_n")?;
        p.check(&data.f_n, "stencil: f_n")?;
        let w = geo.width();
        let scale = p.epsilon * p.epsilon / (geo.h() * geo.h());
        let g = p.canyon.values();
        let n = geo.len();
        let mut east = vec![0.0; n];
        let mut north = vec![0.0; n];
        for idx in 0..n {
            let (i, j) = geo.coords(idx);
            if i + 1 < w {
                east[idx] = scale * 0.5 * (g[idx] + g[idx + 1]);
            }
            if j + 1 < geo.height() {
                north[idx] = scale * 0.5 * (g[idx] + g[idx + w]);
            }
        }
        let mut diag = vec![0.0; n];
        for j in 1..geo.height() - 1 {
            for i in 1..w - 1 {
                let c = j * w + i;
                diag[c] = east[c] + east[c - 1] + north[c] + north[c - w] + data.g_n.values()[c];
            }
        }
        Ok(Self {
            geometry: geo,
            east,
            north,
            diag,
        })
    }

    /// `y = A x` on interior cells; boundary entries of `x` must be zero and
    /// boundary entries of `y` are set to zero.
    fn apply(&self, x: &[f64], y: &mut [f64]) {
        let w = self.geometry.width();
        let ht = self.geometry.height();
        y[..w].fill(0.0);
        y[(ht - 1) * w..].fill(0.0);
        for j in 1..ht - 1 {
            let row = j * w;
            y[row] = 0.0;
            y[row + w - 1] = 0.0;
            for c in row + 1..row + w - 1 {
                y[c] = self.diag[c] * x[c]
                    - self.east[c] * x[c + 1]
                    - self.east[c - 1] * x[c - 1]
                    - self.north[c] * x[c + w]
                    - self.north[c - w] * x[c - w];
            }
        }
    }
}

fn zero_boundary(geo: &GridGeometry, v: &mut [f64]) {
    for (idx, x) in v.iter_mut().enumerate() {
        let (i, j) = geo.coords(idx);
        if geo.is_boundary(i, j) {
            *x = 0.0;
        }
    }
}

/// `A z` for the linearized operator. Boundary entries of `z` are ignored
/// (treated as zero) and the result vanishes on the boundary ring.
pub fn apply_operator(z: &GridField, data: &LinearizedData, p: &ModelParams) -> Result<GridField> {
    p.check(z, "apply_operator")?;
    let stencil = Stencil::new(data, p)?;
    let geo = *p.geometry();
    let mut x = z.values().to_vec();
    zero_boundary(&geo, &mut x);
    let mut y = vec![0.0; geo.len()];
    stencil.apply(&x, &mut y);
    GridField::new(geo, y)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CgParams {
    pub rel_tol: f64,
    /// `None` means ten times the number of grid cells.
    pub max_iters: Option<usize>,
}

impl Default for CgParams {
    fn default() -> Self {
        Self {
            rel_tol: 1e-10,
            max_iters: None,
        }
    }
}

impl CgParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.rel_tol > 0.0 && self.rel_tol <= 1e-6) {
            return Err(Error::InvalidParameter(format!(
                "cg tolerance must lie in (0, 1e-6], got {}",
                self.rel_tol
            )));
        }
        if self.max_iters == Some(0) {
            return Err(Error::InvalidParameter("cg max_iters must be positive".into()));
        }
        Ok(())
    }

    pub fn iteration_limit(&self, geometry: &GridGeometry) -> usize {
        self.max_iters.unwrap_or(10 * geometry.len())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CgSolution {
    pub field: GridField,
    pub iterations: usize,
    /// `‖f - A z‖₂ / ‖f‖₂` over interior cells, recomputed from the returned field.
    pub relative_residual: f64,
}

/// Jacobi-preconditioned conjugate gradients on the interior unknowns.
pub fn cg_solve(
    data: &LinearizedData,
    p: &ModelParams,
    cg: &CgParams,
    warm_start: &GridField,
) -> Result<CgSolution> {
    cg.validate()?;
    p.check(warm_start, "cg_solve: warm start")?;
    let stencil = Stencil::new(data, p)?;
    let geo = *p.geometry();
    let n = geo.len();

    let mut b = data.f_n.values().to_vec();
    zero_boundary(&geo, &mut b);
    let b_norm = dot(&b, &b).sqrt();
    if b_norm == 0.0 {
        return Ok(CgSolution {
            field: GridField::zeros(geo),
            iterations: 0,
            relative_residual: 0.0,
        });
    }

    let inv_diag: Vec<f64> = stencil
        .diag
        .iter()
        .map(|&d| if d > 0.0 { 1.0 / d } else { 0.0 })
        .collect();
    let limit = cg.iteration_limit(&geo);

    let mut x = warm_start.values().to_vec();
    zero_boundary(&geo, &mut x);
    let mut r = vec![0.0; n];
    let mut ap = vec![0.0; n];
    let mut z = vec![0.0; n];
    let mut pdir = vec![0.0; n];

    let residual = |x: &[f64], r: &mut [f64], scratch: &mut [f64]| -> f64 {
        stencil.apply(x, scratch);
        for c in 0..n {
            r[c] = b[c] - scratch[c];
        }
        dot(r, r).sqrt() / b_norm
    };

    let mut rel = residual(&x, &mut r, &mut ap);
    let mut best = (rel, x.clone());
    let mut iterations = 0;

    'restart: loop {
        if rel <= cg.rel_tol {
            return Ok(CgSolution {
                field: GridField::new(geo, x)?,
                iterations,
                relative_residual: rel,
            });
        }
        for c in 0..n {
            z[c] = inv_diag[c] * r[c];
        }
        pdir.copy_from_slice(&z);
        let mut rz = dot(&r, &z);

        while iterations < limit {
            stencil.apply(&pdir, &mut ap);
            let curvature = dot(&pdir, &ap);
            if !(curvature > 0.0) {
                break;
            }
            let step = rz / curvature;
            for c in 0..n {
                x[c] += step * pdir[c];
                r[c] -= step * ap[c];
            }
            iterations += 1;

            let recursive = dot(&r, &r).sqrt() / b_norm;
            if recursive <= cg.rel_tol {
                // confirm against the true residual before accepting
                rel = residual(&x, &mut r, &mut ap);
                if rel < best.0 {
                    best = (rel, x.clone());
                }
                continue 'restart;
            }

            for c in 0..n {
                z[c] = inv_diag[c] * r[c];
            }
            let rz_next = dot(&r, &z);
            let beta = rz_next / rz;
            rz = rz_next;
            for c in 0..n {
                pdir[c] = z[c] + beta * pdir[c];
            }
        }

        rel = residual(&x, &mut r, &mut ap);
        if rel <= cg.rel_tol {
            continue 'restart;
        }
        if rel < best.0 {
            best = (rel, x.clone());
        }
        return Err(Error::CgNotConverged {
            iterations,
            residual: best.0,
            best: Box::new(GridField::new(geo, best.1)?),
        });
    }
}

/// Largest interior system [`dense_solve_oracle`] will assemble.
pub const DENSE_ORACLE_MAX_UNKNOWNS: usize = 4096;

/// The interior system matrix, unknowns ordered row-major over interior cells.
pub fn assemble_dense(data: &LinearizedData, p: &ModelParams) -> Result<DMatrix<f64>> {
    let geo = *p.geometry();
    let unknowns = geo.interior_count();
    if unknowns > DENSE_ORACLE_MAX_UNKNOWNS {
        return Err(Error::OracleTooLarge {
            unknowns,
            max: DENSE_ORACLE_MAX_UNKNOWNS,
        });
    }
    let stencil = Stencil::new(data, p)?;
    let (w, ht) = (geo.width(), geo.height());
    let iw = w - 2;
    let unknown = |i: usize, j: usize| (j - 1) * iw + (i - 1);

    let mut a = DMatrix::<f64>::zeros(unknowns, unknowns);
    for j in 1..ht - 1 {
        for i in 1..w - 1 {
            let c = geo.index(i, j);
            let row = unknown(i, j);
            a[(row, row)] = stencil.diag[c];
            if i + 2 < w {
                a[(row, unknown(i + 1, j))] = -stencil.east[c];
            }
            if i > 1 {
                a[(row, unknown(i - 1, j))] = -stencil.east[c - 1];
            }
            if j + 2 < ht {
                a[(row, unknown(i, j + 1))] = -stencil.north[c];
            }
            if j > 1 {
                a[(row, unknown(i, j - 1))] = -stencil.north[c - w];
            }
        }
    }
    Ok(a)
}

/// Direct LU solve (partial pivoting) of the interior system, for checking
/// [`cg_solve`] on small grids.
pub fn dense_solve_oracle(data: &LinearizedData, p: &ModelParams) -> Result<GridField> {
    let a = assemble_dense(data, p)?;
    let geo = *p.geometry();
    let interior = interior_indices(&geo);
    let rhs = DVector::from_iterator(interior.len(), interior.iter().map(|&c| data.f_n.values()[c]));
    let solution = a.lu().solve(&rhs).ok_or(Error::SingularSystem)?;
    let mut values = vec![0.0; geo.len()];
    for (k, &c) in interior.iter().enumerate() {
        values[c] = solution[k];
    }
    GridField::new(geo, values)
}

/// Interior cell indices in the unknown ordering used by [`assemble_dense`].
pub fn interior_indices(geo: &GridGeometry) -> Vec<usize> {
    (0..geo.len())
        .filter(|&idx| {
            let (i, j) = geo.coords(idx);
            !geo.is_boundary(i, j)
        })
        .collect()
}
