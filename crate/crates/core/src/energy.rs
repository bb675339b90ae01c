//! Discrete phase-transition energies.
//!
//! All functionals here share one discretization with the elliptic operator:
//! gradients live on cell faces as forward differences, face weights are the
//! arithmetic mean of the two adjacent `G` values, and cell terms use the
//! midpoint rule. With that choice the stationarity condition of the
//! surrogate energy is exactly the linear system solved by
//! [`crate::elliptic`], so the monotonicity and range results carry over to
//! the discrete iteration without discretization error.

use crate::canyon::{CanyonField, ConfigurationMask};
use crate::error::{Error, Result};
use crate::grid::{GridField, GridGeometry};

/// A phase field with zero values on the boundary ring.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseField(GridField);

impl PhaseField {
    /// Wraps `field`, requiring its boundary ring to be exactly zero.
    pub fn new(field: GridField) -> Result<Self> {
        let g = *field.geometry();
        for idx in 0..g.len() {
            let (i, j) = g.coords(idx);
            if g.is_boundary(i, j) && field.values()[idx] != 0.0 {
                return Err(Error::InvalidParameter(format!(
                    "phase field must vanish on the boundary, cell ({i},{j}) is {}",
                    field.values()[idx]
                )));
            }
        }
        Ok(Self(field))
    }

    /// Wraps `field` after overwriting its boundary ring with zeros.
    pub fn with_zero_boundary(mut field: GridField) -> Self {
        let g = *field.geometry();
        let values = field.values_mut();
        for (idx, v) in values.iter_mut().enumerate() {
            let (i, j) = g.coords(idx);
            if g.is_boundary(i, j) {
                *v = 0.0;
            }
        }
        Self(field)
    }

    pub fn zeros(geometry: GridGeometry) -> Self {
        Self(GridField::zeros(geometry))
    }

    pub fn from_fn(geometry: GridGeometry, f: impl FnMut(usize, usize) -> f64) -> Self {
        Self::with_zero_boundary(GridField::from_fn(geometry, f))
    }

    pub fn field(&self) -> &GridField {
        &self.0
    }

    pub fn into_field(self) -> GridField {
        self.0
    }

    pub fn geometry(&self) -> &GridGeometry {
        self.0.geometry()
    }

    pub fn values(&self) -> &[f64] {
        self.0.values()
    }

    pub fn transposed(&self) -> Self {
        Self(self.0.transposed())
    }
}

/// Everything the energy needs besides the phase field itself.
#[derive(Debug, Clone)]
pub struct ModelParams {
    /// Transition bandwidth ε, in units of domain length.
    pub epsilon: f64,
    /// Weight of the penalty that keeps the phase at 0 on the inducers.
    pub lambda: f64,
    pub canyon: CanyonField,
    pub mask: ConfigurationMask,
}

impl ModelParams {
    pub fn new(
        epsilon: f64,
        lambda: f64,
        canyon: CanyonField,
        mask: ConfigurationMask,
    ) -> Result<Self> {
        canyon
            .geometry()
            .ensure_same(mask.geometry(), "canyon vs mask")?;
        let h = canyon.geometry().h();
        if !(epsilon >= h * (1.0 - 1e-12) && epsilon <= 0.25) {
            return Err(Error::InvalidParameter(format!(
                "epsilon must lie in [h, 0.25] = [{h}, 0.25], got {epsilon}"
            )));
        }
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "lambda must be positive, got {lambda}"
            )));
        }
        Ok(Self {
            epsilon,
            lambda,
            canyon,
            mask,
        })
    }

    pub fn geometry(&self) -> &GridGeometry {
        self.canyon.geometry()
    }

    pub(crate) fn check(&self, field: &GridField, what: &'static str) -> Result<()> {
        self.geometry().ensure_same(field.geometry(), what)
    }

    /// The same model on the transposed grid.
    pub fn transposed(&self) -> Self {
        Self {
            epsilon: self.epsilon,
            lambda: self.lambda,
            canyon: self.canyon.transposed(),
            mask: self.mask.transposed(),
        }
    }
}

/// `Φ(z) = (1 - z)² z²`
#[inline]
pub fn double_well(z: f64) -> f64 {
    let a = (1.0 - z) * z;
    a * a
}

/// `γ(z) = 3z² / (1 + 2z²)`, the target of the convexified reaction term.
#[inline]
pub fn gamma(z: f64) -> f64 {
    3.0 * z * z / (1.0 + 2.0 * z * z)
}

/// Calls `f(a, b, g_face)` for every pair of edge-adjacent cells, rows first.
#[inline]
pub(crate) fn for_each_face(geo: &GridGeometry, weights: &[f64], mut f: impl FnMut(usize, usize, f64)) {
    let (w, ht) = (geo.width(), geo.height());
    for j in 0..ht {
        for i in 0..w - 1 {
            let a = j * w + i;
            f(a, a + 1, 0.5 * (weights[a] + weights[a + 1]));
        }
    }
    for j in 0..ht - 1 {
        for i in 0..w {
            let a = j * w + i;
            f(a, a + w, 0.5 * (weights[a] + weights[a + w]));
        }
    }
}

/// `Σ_faces G_face (Δz)²`: the weighted Dirichlet sum, `∫ G|∇z|²` on the grid.
pub fn weighted_dirichlet_sum(z: &[f64], weights: &[f64], geo: &GridGeometry) -> f64 {
    let mut sum = 0.0;
    for_each_face(geo, weights, |a, b, gf| {
        let d = z[a] - z[b];
        sum += gf * d * d;
    });
    sum
}

/// `Σ_faces (Δz)²`: the unweighted Dirichlet sum.
pub fn dirichlet_sum(z: &PhaseField) -> f64 {
    let ones = vec![1.0; z.geometry().len()];
    weighted_dirichlet_sum(z.values(), &ones, z.geometry())
}

/// The energy `E_ε[z]`.
pub fn total_energy(z: &PhaseField, p: &ModelParams) -> Result<f64> {
    p.check(z.field(), "total_energy")?;
    let geo = p.geometry();
    let h2 = geo.h() * geo.h();
    let eps = p.epsilon;
    let g = p.canyon.values();
    let zv = z.values();

    let gradient = weighted_dirichlet_sum(zv, g, geo);
    let mut cells = 0.0;
    for ((&zi, &gi), &qi) in zv.iter().zip(g).zip(p.mask.inside()) {
        let confine = if qi { p.lambda * zi * zi } else { 0.0 };
        cells += gi * double_well(zi) + confine;
    }
    Ok(0.5 * eps * gradient + h2 / (2.0 * eps) * cells)
}

/// The convex surrogate `E_ε[z | z_n]`, whose unique minimizer is the next iterate.
pub fn surrogate_energy(z: &PhaseField, z_n: &PhaseField, p: &ModelParams) -> Result<f64> {
    p.check(z.field(), "surrogate_energy: z")?;
    p.check(z_n.field(), "surrogate_energy: z_n")?;
    let geo = p.geometry();
    let h2 = geo.h() * geo.h();
    let eps = p.epsilon;
    let g = p.canyon.values();

    let gradient = weighted_dirichlet_sum(z.values(), g, geo);
    let mut cells = 0.0;
    for idx in 0..geo.len() {
        let (zi, zn) = (z.values()[idx], z_n.values()[idx]);
        let d = zi - gamma(zn);
        let confine = if p.mask.inside()[idx] {
            p.lambda * zi * zi
        } else {
            0.0
        };
        cells += (1.0 + 2.0 * zn * zn) * d * d * g[idx] + confine;
    }
    Ok(0.5 * eps * gradient + h2 / (2.0 * eps) * cells)
}

/// Directional derivative `J_ε[z, u | z_n]` of the surrogate at `z` along `u`.
pub fn first_variation(
    z: &PhaseField,
    u: &PhaseField,
    z_n: &PhaseField,
    p: &ModelParams,
) -> Result<f64> {
    p.check(z.field(), "first_variation: z")?;
    p.check(u.field(), "first_variation: u")?;
    p.check(z_n.field(), "first_variation: z_n")?;
    let geo = p.geometry();
    let h2 = geo.h() * geo.h();
    let eps = p.epsilon;
    let g = p.canyon.values();
    let (zv, uv) = (z.values(), u.values());

    let mut gradient = 0.0;
    for_each_face(geo, g, |a, b, gf| {
        gradient += gf * (zv[a] - zv[b]) * (uv[a] - uv[b]);
    });
    let mut cells = 0.0;
    for idx in 0..geo.len() {
        let zn = z_n.values()[idx];
        let mut term = g[idx] * (1.0 + 2.0 * zn * zn) * (zv[idx] - gamma(zn));
        if p.mask.inside()[idx] {
            term += p.lambda * zv[idx];
        }
        cells += term * uv[idx];
    }
    Ok(eps * gradient + h2 / eps * cells)
}

/// Energy of the logistic transition profile `z(t) = S(t/ε)` on
/// `[-half_length, half_length]`, by the trapezoid rule on `n_points` nodes.
/// Tends to `1/6`, the total variation of `z²/2 - z³/3` on `[0, 1]`.
pub fn profile_measure_1d(epsilon: f64, half_length: f64, n_points: usize) -> Result<f64> {
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "epsilon must be positive, got {epsilon}"
        )));
    }
    if !(half_length >= 8.0 * epsilon && half_length.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "half_length must be at least 8 epsilon, got {half_length}"
        )));
    }
    if n_points < 1024 {
        return Err(Error::InvalidParameter(format!(
            "n_points must be at least 1024, got {n_points}"
        )));
    }
    let dt = 2.0 * half_length / (n_points - 1) as f64;
    let density = |t: f64| {
        let z = 1.0 / (1.0 + (-t / epsilon).exp());
        let dz = z * (1.0 - z) / epsilon;
        0.5 * epsilon * dz * dz + double_well(z) / (2.0 * epsilon)
    };
    let mut sum = 0.0;
    for k in 0..n_points {
        let t = -half_length + k as f64 * dt;
        let weight = if k == 0 || k + 1 == n_points { 0.5 } else { 1.0 };
        sum += weight * density(t);
    }
    Ok(sum * dt)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::canyon::CanyonField;

    fn flat_model(n: usize, eps_cells: f64) -> ModelParams {
        let geo = GridGeometry::new(n, n).unwrap();
        let canyon = CanyonField::from_field(GridField::constant(geo, 1.0), 1.0, 0.0).unwrap();
        ModelParams::new(eps_cells * geo.h(), 1.0, canyon, ConfigurationMask::empty(geo)).unwrap()
    }

    #[test]
    fn double_well_values() {
        assert_eq!(double_well(0.0), 0.0);
        assert_eq!(double_well(1.0), 0.0);
        assert_eq!(double_well(0.5), 0.0625);
        for z in [-0.7, 0.1, 0.33, 1.8] {
            assert!((double_well(z) - double_well(1.0 - z)).abs() < 1e-14);
        }
    }

    #[test]
    fn gamma_fixed_points() {
        for z in [0.0, 0.5, 1.0] {
            assert!((gamma(z) - z).abs() < 1e-15);
        }
    }

    #[test]
    fn phase_field_boundary_contract() {
        let geo = GridGeometry::new(4, 4).unwrap();
        assert!(PhaseField::new(GridField::constant(geo, 1.0)).is_err());
        let z = PhaseField::with_zero_boundary(GridField::constant(geo, 1.0));
        assert_eq!(z.values().iter().filter(|&&v| v == 1.0).count(), 4);
        assert!(PhaseField::new(z.field().clone()).is_ok());
    }

    #[test]
    fn zero_field_has_zero_energy() {
        let p = flat_model(8, 2.0);
        let z = PhaseField::zeros(*p.geometry());
        assert_eq!(total_energy(&z, &p).unwrap(), 0.0);
        assert_eq!(surrogate_energy(&z, &z, &p).unwrap(), 0.0);
    }

    #[test]
    fn single_spike_energy() {
        // 8x8, one interior cell at 1, G ≡ 1, ε = 2h. Four faces each with
        // Δz = 1, and Φ(1) = 0, so E = (ε/2)·4.
        let p = flat_model(8, 2.0);
        let z = PhaseField::from_fn(*p.geometry(), |i, j| if (i, j) == (3, 4) { 1.0 } else { 0.0 });
        let e = total_energy(&z, &p).unwrap();
        let expected = 0.5 * p.epsilon * 4.0;
        assert!((e - expected).abs() <= 1e-12 * expected);
    }

    #[test]
    fn geometry_mismatch_is_reported() {
        let p = flat_model(8, 2.0);
        let z = PhaseField::zeros(GridGeometry::new(9, 8).unwrap());
        assert!(matches!(
            total_energy(&z, &p),
            Err(Error::GeometryMismatch(_))
        ));
    }

    #[test]
    fn model_rejects_bad_epsilon() {
        let p = flat_model(8, 2.0);
        let r = ModelParams::new(0.5 * p.geometry().h(), 1.0, p.canyon.clone(), p.mask.clone());
        assert!(r.is_err());
        let r = ModelParams::new(0.3, 1.0, p.canyon.clone(), p.mask.clone());
        assert!(r.is_err());
        let r = ModelParams::new(0.2, 0.0, p.canyon.clone(), p.mask.clone());
        assert!(r.is_err());
    }

    #[test]
    fn profile_measure_is_one_sixth() {
        let v = profile_measure_1d(1.0 / 64.0, 0.5, 8192).unwrap();
        assert!((v - 1.0 / 6.0).abs() <= 5e-4, "{v}");
        let half = profile_measure_1d(1.0 / 128.0, 0.5, 8192).unwrap();
        assert!(((half - v) / v).abs() < 1e-3);
        assert!(profile_measure_1d(0.1, 0.5, 1024).is_err());
        assert!(profile_measure_1d(0.01, 0.5, 1000).is_err());
        assert!(profile_measure_1d(0.0, 0.5, 2048).is_err());
    }
}
