//! Thresholding a phase field into the illusory shape and measuring it.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::energy::PhaseField;
use crate::error::{Error, Result};
use crate::grid::GridGeometry;

#[derive(Debug, Clone, PartialEq)]
pub struct ShapeMask {
    geometry: GridGeometry,
    inside: Vec<bool>,
    threshold: f64,
}

impl ShapeMask {
    pub fn from_cells(geometry: GridGeometry, inside: Vec<bool>, threshold: f64) -> Result<Self> {
        if inside.len() != geometry.len() {
            return Err(Error::ValueCount {
                expected: geometry.len(),
                actual: inside.len(),
            });
        }
        Ok(Self {
            geometry,
            inside,
            threshold,
        })
    }

    pub fn from_fn(geometry: GridGeometry, mut f: impl FnMut(usize, usize) -> bool) -> Self {
        let inside = (0..geometry.len())
            .map(|idx| {
                let (i, j) = geometry.coords(idx);
                f(i, j)
            })
            .collect();
        Self {
            geometry,
            inside,
            threshold: 0.5,
        }
    }

    pub fn geometry(&self) -> &GridGeometry {
        &self.geometry
    }

    pub fn inside(&self) -> &[bool] {
        &self.inside
    }

    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    #[inline]
    pub fn contains(&self, i: usize, j: usize) -> bool {
        self.inside[self.geometry.index(i, j)]
    }

    pub fn count(&self) -> usize {
        self.inside.iter().filter(|&&b| b).count()
    }

    pub fn is_empty(&self) -> bool {
        !self.inside.iter().any(|&b| b)
    }

    pub fn transposed(&self) -> Self {
        let geometry = self.geometry.transposed();
        let mut t = Self::from_fn(geometry, |i, j| self.contains(j, i));
        t.threshold = self.threshold;
        t
    }
}

/// Cells where `z` is strictly above `threshold`.
pub fn extract_shape(z: &PhaseField, threshold: f64) -> Result<ShapeMask> {
    if !(threshold > 0.0 && threshold < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "threshold must lie in (0, 1), got {threshold}"
        )));
    }
    Ok(ShapeMask {
        geometry: *z.geometry(),
        inside: z.values().iter().map(|&v| v > threshold).collect(),
        threshold,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComponentSet {
    pub count: usize,
    /// 0 for background, `1..=count` for components.
    pub labels: Vec<u32>,
    pub areas: Vec<usize>,
    /// `(column, row)` centroid of each component, in cell units.
    pub centroids: Vec<(f64, f64)>,
}

/// 4-connected components, labelled in order of their first cell in raster order.
pub fn connected_components(mask: &ShapeMask) -> ComponentSet {
    let geo = mask.geometry;
    let (w, ht) = (geo.width(), geo.height());
    let mut labels = vec![0u32; geo.len()];
    let mut areas = Vec::new();
    let mut centroids = Vec::new();
    let mut queue = VecDeque::new();

    for start in 0..geo.len() {
        if !mask.inside[start] || labels[start] != 0 {
            continue;
        }
        let label = areas.len() as u32 + 1;
        labels[start] = label;
        queue.push_back(start);
        let (mut area, mut sx, mut sy) = (0usize, 0.0, 0.0);
        while let Some(c) = queue.pop_front() {
            let (i, j) = geo.coords(c);
            area += 1;
            sx += i as f64;
            sy += j as f64;
            let mut visit = |n: usize| {
                if mask.inside[n] && labels[n] == 0 {
                    labels[n] = label;
                    queue.push_back(n);
                }
            };
            if i > 0 {
                visit(c - 1);
            }
            if i + 1 < w {
                visit(c + 1);
            }
            if j > 0 {
                visit(c - w);
            }
            if j + 1 < ht {
                visit(c + w);
            }
        }
        areas.push(area);
        centroids.push((sx / area as f64, sy / area as f64));
    }

    ComponentSet {
        count: areas.len(),
        labels,
        areas,
        centroids,
    }
}

/// Intersection over union; 1 when both masks are empty.
pub fn iou(a: &ShapeMask, b: &ShapeMask) -> Result<f64> {
    a.geometry.ensure_same(&b.geometry, "iou")?;
    let (mut inter, mut union) = (0usize, 0usize);
    for (&x, &y) in a.inside.iter().zip(&b.inside) {
        inter += (x && y) as usize;
        union += (x || y) as usize;
    }
    Ok(if union == 0 {
        1.0
    } else {
        inter as f64 / union as f64
    })
}
