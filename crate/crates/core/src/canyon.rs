//! The canyon weight field `G = α + β g(|∇χ_σ|)` built from an inducer mask.
//!
//! `G` sits at its ceiling `α + β` away from the inducers and drops towards
//! the floor `α` along their edges, so contours running along the inducer
//! boundary are cheap and contours through empty space are expensive.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{gradient_magnitude, GridField, GridGeometry};

/// Binary indicator of the inducer configuration `Q`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigurationMask {
    geometry: GridGeometry,
    inside: Vec<bool>,
}

impl ConfigurationMask {
    /// Builds a mask, rejecting configurations that reach the boundary ring.
    pub fn new(geometry: GridGeometry, inside: Vec<bool>) -> Result<Self> {
        let mask = Self::new_unchecked(geometry, inside)?;
        if mask.touches_boundary() {
            return Err(Error::ConfigurationTouchesBoundary);
        }
        Ok(mask)
    }

    /// Like [`ConfigurationMask::new`] but without the compactness check.
    pub fn new_unchecked(geometry: GridGeometry, inside: Vec<bool>) -> Result<Self> {
        if inside.len() != geometry.len() {
            return Err(Error::ValueCount {
                expected: geometry.len(),
                actual: inside.len(),
            });
        }
        Ok(Self { geometry, inside })
    }

    pub fn from_fn(
        geometry: GridGeometry,
        mut f: impl FnMut(usize, usize) -> bool,
    ) -> Result<Self> {
        let inside = (0..geometry.len())
            .map(|idx| {
                let (i, j) = geometry.coords(idx);
                f(i, j)
            })
            .collect();
        Self::new(geometry, inside)
    }

    pub fn empty(geometry: GridGeometry) -> Self {
        Self {
            geometry,
            inside: vec![false; geometry.len()],
        }
    }

    pub fn geometry(&self) -> &GridGeometry {
        &self.geometry
    }

    pub fn inside(&self) -> &[bool] {
        &self.inside
    }

    #[inline]
    pub fn contains(&self, i: usize, j: usize) -> bool {
        self.inside[self.geometry.index(i, j)]
    }

    pub fn count(&self) -> usize {
        self.inside.iter().filter(|&&b| b).count()
    }

    pub fn touches_boundary(&self) -> bool {
        let g = &self.geometry;
        (0..g.len()).any(|idx| {
            let (i, j) = g.coords(idx);
            self.inside[idx] && g.is_boundary(i, j)
        })
    }

    /// The indicator `χ_Q` as a 0/1 field.
    pub fn indicator(&self) -> GridField {
        GridField::from_fn(self.geometry, |i, j| {
            if self.contains(i, j) {
                1.0
            } else {
                0.0
            }
        })
    }

    pub fn transposed(&self) -> Self {
        let geometry = self.geometry.transposed();
        let inside = (0..geometry.len())
            .map(|idx| {
                let (i, j) = geometry.coords(idx);
                self.contains(j, i)
            })
            .collect();
        Self { geometry, inside }
    }
}

/// Decay profile `g` applied to the edge strength.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum EdgeKind {
    /// `g(p) = exp(-p²)`
    #[default]
    ExpSquare,
    /// `g(p) = 1 / (1 + p²)`
    Rational,
}

/// How the mollified gradient magnitude is scaled before `g` is applied.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum GradientScaling {
    /// Divide by the largest gradient magnitude on the grid, then multiply by
    /// the gain. The strongest edge always maps to `g(gain)`.
    #[default]
    MaxNormalized,
    /// Multiply the raw magnitude by the gain. The magnitude grows like `1/σ`,
    /// so the drop saturates at fine resolutions.
    Raw,
}

/// `g(p)`: equals 1 at `p = 0` and decays to 0 as `p → ∞`.
pub fn edge_response(p: f64, kind: EdgeKind) -> f64 {
    match kind {
        EdgeKind::ExpSquare => (-p * p).exp(),
        EdgeKind::Rational => 1.0 / (1.0 + p * p),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CanyonParams {
    pub alpha: f64,
    pub beta: f64,
    /// Mollification scale, in units of domain length.
    pub sigma: f64,
    pub g_kind: EdgeKind,
    pub gain: f64,
    #[serde(default)]
    pub scaling: GradientScaling,
}

impl CanyonParams {
    /// Defaults for a grid of spacing `h`: `α = 0.1`, `β = 1`, `σ = 2h`, gain 3.
    pub fn with_defaults(h: f64) -> Self {
        Self {
            alpha: 0.1,
            beta: 1.0,
            sigma: 2.0 * h,
            g_kind: EdgeKind::ExpSquare,
            gain: 3.0,
            scaling: GradientScaling::MaxNormalized,
        }
    }

    pub fn validate(&self, geometry: &GridGeometry) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "alpha must be positive, got {}",
                self.alpha
            )));
        }
        if !(self.beta >= 0.0 && self.beta.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "beta must be nonnegative, got {}",
                self.beta
            )));
        }
        if !(self.sigma >= geometry.h() * (1.0 - 1e-12) && self.sigma.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "sigma must be at least the grid spacing {}, got {}",
                geometry.h(),
                self.sigma
            )));
        }
        if !(self.gain > 0.0 && self.gain.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "gain must be positive, got {}",
                self.gain
            )));
        }
        Ok(())
    }
}

/// The weight field `G`, bounded by `α ≤ G ≤ α + β`.
#[derive(Debug, Clone, PartialEq)]
pub struct CanyonField {
    field: GridField,
    alpha: f64,
    beta: f64,
}

impl CanyonField {
    /// Wraps an arbitrary weight field, checking it stays within `[α, α + β]`.
    pub fn from_field(field: GridField, alpha: f64, beta: f64) -> Result<Self> {
        if !(alpha > 0.0) || !(beta >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "canyon needs alpha > 0 and beta >= 0, got {alpha}, {beta}"
            )));
        }
        let slack = 1e-12 * (alpha + beta);
        if field.min() < alpha - slack || field.max() > alpha + beta + slack {
            return Err(Error::InvalidParameter(format!(
                "canyon values [{}, {}] outside [{alpha}, {}]",
                field.min(),
                field.max(),
                alpha + beta
            )));
        }
        Ok(Self { field, alpha, beta })
    }

    pub fn field(&self) -> &GridField {
        &self.field
    }

    pub fn values(&self) -> &[f64] {
        self.field.values()
    }

    pub fn geometry(&self) -> &GridGeometry {
        self.field.geometry()
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// Multiplies every weight, and the bounds, by `factor > 0`.
    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            field: self.field.map(|v| v * factor),
            alpha: self.alpha * factor,
            beta: self.beta * factor,
        }
    }

    pub fn transposed(&self) -> Self {
        Self {
            field: self.field.transposed(),
            alpha: self.alpha,
            beta: self.beta,
        }
    }
}

/// Heat-equation smoothing of the indicator up to time `σ²/2`, which matches a
/// Gaussian blur of standard deviation `σ`. Zero-flux at the grid edges.
pub fn mollify(mask: &ConfigurationMask, sigma: f64) -> GridField {
    let geo = *mask.geometry();
    let mut u = mask.indicator();
    if sigma <= 0.0 {
        return u;
    }
    let h = geo.h();
    let total_time = 0.5 * sigma * sigma;
    let max_dt = 0.25 * h * h;
    let steps = (total_time / max_dt).ceil() as usize;
    let r = total_time / steps as f64 / (h * h);

    let (w, ht) = (geo.width(), geo.height());
    let mut next = u.clone();
    for _ in 0..steps {
        {
            let src = u.values();
            let dst = next.values_mut();
            for j in 0..ht {
                for i in 0..w {
                    let c = src[j * w + i];
                    let west = if i > 0 { src[j * w + i - 1] } else { c };
                    let east = if i + 1 < w { src[j * w + i + 1] } else { c };
                    let south = if j > 0 { src[(j - 1) * w + i] } else { c };
                    let north = if j + 1 < ht { src[(j + 1) * w + i] } else { c };
                    dst[j * w + i] = c + r * (west + east + south + north - 4.0 * c);
                }
            }
        }
        std::mem::swap(&mut u, &mut next);
    }
    u
}

pub fn build_canyon(mask: &ConfigurationMask, params: &CanyonParams) -> Result<CanyonField> {
    let geo = *mask.geometry();
    params.validate(&geo)?;
    let count = mask.count();
    if count == 0 || count == geo.len() {
        return Err(Error::NoConfigurationBoundary);
    }
    let grad = gradient_magnitude(&mollify(mask, params.sigma));
    let peak = grad.max();
    if !(peak > 0.0) {
        return Err(Error::NoConfigurationBoundary);
    }
    let scale = match params.scaling {
        GradientScaling::MaxNormalized => params.gain / peak,
        GradientScaling::Raw => params.gain,
    };
    let field = grad.map(|p| params.alpha + params.beta * edge_response(scale * p, params.g_kind));
    Ok(CanyonField {
        field,
        alpha: params.alpha,
        beta: params.beta,
    })
}
