//! Uniform 2-D grids and the scalar fields that live on them.
//!
//! Cells are addressed by column `i` (x direction, `0..width`) and row `j`
//! (y direction, `0..height`) and stored row-major. The grid spacing is chosen
//! so that the longest side of the domain has unit length.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridGeometry {
    width: usize,
    height: usize,
    h: f64,
}

impl GridGeometry {
    pub fn new(width: usize, height: usize) -> Result<Self> {
        if width < 3 || height < 3 {
            return Err(Error::GridTooSmall { width, height });
        }
        Ok(Self {
            width,
            height,
            h: 1.0 / width.max(height) as f64,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    /// Grid spacing in units of domain length.
    pub fn h(&self) -> f64 {
        self.h
    }

    /// Total number of cells.
    pub fn len(&self) -> usize {
        self.width * self.height
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize) -> usize {
        debug_assert!(i < self.width && j < self.height);
        j * self.width + i
    }

    #[inline]
    pub fn coords(&self, idx: usize) -> (usize, usize) {
        (idx % self.width, idx / self.width)
    }

    /// True for cells on the outermost ring of the grid.
    #[inline]
    pub fn is_boundary(&self, i: usize, j: usize) -> bool {
        i == 0 || j == 0 || i + 1 == self.width || j + 1 == self.height
    }

    pub fn interior_count(&self) -> usize {
        (self.width - 2) * (self.height - 2)
    }

    /// The same grid with rows and columns swapped.
    pub fn transposed(&self) -> Self {
        Self {
            width: self.height,
            height: self.width,
            h: self.h,
        }
    }

    pub(crate) fn ensure_same(&self, other: &GridGeometry, what: &'static str) -> Result<()> {
        if self.width != other.width || self.height != other.height {
            return Err(Error::GeometryMismatch(what));
        }
        Ok(())
    }
}

/// A real value per grid cell.
#[derive(Debug, Clone, PartialEq)]
pub struct GridField {
    geometry: GridGeometry,
    values: Vec<f64>,
}

impl GridField {
    pub fn new(geometry: GridGeometry, values: Vec<f64>) -> Result<Self> {
        if values.len() != geometry.len() {
            return Err(Error::ValueCount {
                expected: geometry.len(),
                actual: values.len(),
            });
        }
        if let Some(idx) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(idx));
        }
        Ok(Self { geometry, values })
    }

    pub fn constant(geometry: GridGeometry, value: f64) -> Self {
        Self {
            geometry,
            values: vec![value; geometry.len()],
        }
    }

    pub fn zeros(geometry: GridGeometry) -> Self {
        Self::constant(geometry, 0.0)
    }

    /// Samples `f(i, j)` at every cell.
    pub fn from_fn(geometry: GridGeometry, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut values = Vec::with_capacity(geometry.len());
        for j in 0..geometry.height() {
            for i in 0..geometry.width() {
                values.push(f(i, j));
            }
        }
        Self { geometry, values }
    }

    pub fn geometry(&self) -> &GridGeometry {
        &self.geometry
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub(crate) fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[self.geometry.index(i, j)]
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            geometry: self.geometry,
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn transposed(&self) -> Self {
        let geometry = self.geometry.transposed();
        Self::from_fn(geometry, |i, j| self.get(j, i))
    }
}

/// Per-cell `|∇f|`: central differences in the interior, one-sided
/// differences on the boundary ring.
pub fn gradient_magnitude(f: &GridField) -> GridField {
    let geo = *f.geometry();
    let (w, ht, h) = (geo.width(), geo.height(), geo.h());
    GridField::from_fn(geo, |i, j| {
        let dx = if i == 0 {
            (f.get(1, j) - f.get(0, j)) / h
        } else if i + 1 == w {
            (f.get(i, j) - f.get(i - 1, j)) / h
        } else {
            (f.get(i + 1, j) - f.get(i - 1, j)) / (2.0 * h)
        };
        let dy = if j == 0 {
            (f.get(i, 1) - f.get(i, 0)) / h
        } else if j + 1 == ht {
            (f.get(i, j) - f.get(i, j - 1)) / h
        } else {
            (f.get(i, j + 1) - f.get(i, j - 1)) / (2.0 * h)
        };
        dx.hypot(dy)
    })
}

/// Root-mean-square difference over all cells.
pub fn rms_diff(a: &GridField, b: &GridField) -> Result<f64> {
    a.geometry().ensure_same(b.geometry(), "rms_diff")?;
    let sum: f64 = a
        .values()
        .iter()
        .zip(b.values())
        .map(|(x, y)| (x - y) * (x - y))
        .sum();
    Ok((sum / a.values().len() as f64).sqrt())
}

/// Midpoint-rule integral over the domain.
pub fn quadrature_sum(f: &GridField) -> f64 {
    let h = f.geometry().h();
    h * h * f.values().iter().sum::<f64>()
}

/// Euclidean inner product of two equally sized slices, summed in index order.
#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}
