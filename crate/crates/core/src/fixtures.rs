//! Synthetic inducer configurations: black inducers on a white ground.
//!
//! Coordinates are in pixels with the centre of cell `(i, j)` at
//! `(i + 0.5, j + 0.5)`; `y` grows downwards.

use crate::canyon::ConfigurationMask;
use crate::error::Result;
use crate::grid::GridGeometry;
use crate::shape::ShapeMask;

type Point = (f64, f64);

#[derive(Debug, Clone, Copy, PartialEq)]
struct Triangle {
    vertices: [Point; 3],
}

impl Triangle {
    /// Equilateral, centred on its circumcentre, with the first vertex in
    /// direction `apex` (radians; `-π/2` points up since `y` grows downwards).
    fn equilateral(center: Point, side: f64, apex: f64) -> Self {
        let radius = side / 3f64.sqrt();
        let vertex = |k: usize| {
            let angle = apex + k as f64 * 2.0 * std::f64::consts::PI / 3.0;
            (center.0 + radius * angle.cos(), center.1 + radius * angle.sin())
        };
        Self {
            vertices: [vertex(0), vertex(1), vertex(2)],
        }
    }

    /// True when `p` lies on the interior side of the edge `a -> b`.
    fn inner_side(&self, a: usize, b: usize, p: Point) -> bool {
        let (va, vb) = (self.vertices[a], self.vertices[b]);
        let c = self.vertices[3 - a - b];
        let cross = |q: Point| (vb.0 - va.0) * (q.1 - va.1) - (vb.1 - va.1) * (q.0 - va.0);
        cross(p) * cross(c) > 0.0
    }

    fn contains(&self, p: Point) -> bool {
        self.inner_side(0, 1, p) && self.inner_side(1, 2, p) && self.inner_side(0, 2, p)
    }

    /// The wedge of the interior angle at vertex `k`.
    fn in_corner(&self, k: usize, p: Point) -> bool {
        let (a, b) = ((k + 1) % 3, (k + 2) % 3);
        self.inner_side(k, a, p) && self.inner_side(k, b, p)
    }

    /// Three disks at the vertices with the interior-angle notch removed.
    fn pacmen(&self, radius: f64, p: Point) -> bool {
        (0..3).any(|k| within(self.vertices[k], radius, p) && !self.in_corner(k, p))
    }

    fn centroid(&self) -> Point {
        let [a, b, c] = self.vertices;
        ((a.0 + b.0 + c.0) / 3.0, (a.1 + b.1 + c.1) / 3.0)
    }
}

fn within(center: Point, radius: f64, p: Point) -> bool {
    let (dx, dy) = (p.0 - center.0, p.1 - center.1);
    dx * dx + dy * dy <= radius * radius
}

fn in_ellipse(center: Point, semi_x: f64, semi_y: f64, p: Point) -> bool {
    let (dx, dy) = ((p.0 - center.0) / semi_x, (p.1 - center.1) / semi_y);
    dx * dx + dy * dy <= 1.0
}

fn cell_center(i: usize, j: usize) -> Point {
    (i as f64 + 0.5, j as f64 + 0.5)
}

/// A named inducer image together with the shape it is meant to induce.
#[derive(Debug, Clone)]
pub struct Fixture {
    pub name: &'static str,
    pub geometry: GridGeometry,
    inducer: Vec<bool>,
    ideal: Vec<bool>,
    /// Points expected to lie inside the induced shape, in pixel coordinates.
    pub probes: Vec<Point>,
}

impl Fixture {
    fn build(
        name: &'static str,
        width: usize,
        height: usize,
        inducer: impl Fn(Point) -> bool,
        ideal: impl Fn(Point) -> bool,
        probes: Vec<Point>,
    ) -> Self {
        let geometry = GridGeometry::new(width, height).expect("fixture grids are large");
        let cells = |f: &dyn Fn(Point) -> bool| -> Vec<bool> {
            (0..geometry.len())
                .map(|idx| {
                    let (i, j) = geometry.coords(idx);
                    f(cell_center(i, j))
                })
                .collect()
        };
        let inducer_cells = cells(&inducer);
        let ideal_cells = cells(&|p| ideal(p) && !inducer(p));
        Self {
            name,
            geometry,
            inducer: inducer_cells,
            ideal: ideal_cells,
            probes,
        }
    }

    pub fn mask(&self) -> Result<ConfigurationMask> {
        ConfigurationMask::new(self.geometry, self.inducer.clone())
    }

    /// The shape the inducers outline, excluding inducer cells.
    pub fn ideal_shape(&self) -> ShapeMask {
        ShapeMask::from_cells(self.geometry, self.ideal.clone(), 0.5)
            .expect("ideal shape matches geometry")
    }

    /// 8-bit luminance: 0 on inducers, 255 elsewhere.
    pub fn luminance(&self) -> Vec<u8> {
        self.inducer.iter().map(|&q| if q { 0 } else { 255 }).collect()
    }
}

/// Kanizsa's triangle: three notched disks at the corners of an equilateral
/// triangle of side `n/2`.
pub fn kanizsa(n: usize) -> Fixture {
    let s = n as f64;
    let tri = Triangle::equilateral((0.5 * s, 0.55 * s), 0.5 * s, -std::f64::consts::FRAC_PI_2);
    let radius = 0.125 * s;
    let centroid = tri.centroid();
    Fixture::build(
        "kanizsa",
        n,
        n,
        move |p| tri.pacmen(radius, p),
        move |p| tri.contains(p),
        vec![centroid],
    )
}

/// An illusory disk outlined by six notched disks on its circumference.
pub fn disk(n: usize) -> Fixture {
    let s = n as f64;
    let center = (0.5 * s, 0.5 * s);
    let big = 0.28 * s;
    let small = 0.1 * s;
    let inducers: Vec<Point> = (0..6)
        .map(|k| {
            let a = k as f64 * std::f64::consts::PI / 3.0;
            (center.0 + big * a.cos(), center.1 + big * a.sin())
        })
        .collect();
    let ind = inducers.clone();
    Fixture::build(
        "disk",
        n,
        n,
        move |p| !within(center, big, p) && ind.iter().any(|&c| within(c, small, p)),
        move |p| within(center, big, p),
        vec![center],
    )
}

/// Two separate illusory shapes side by side: an ellipse outlined by four
/// notched disks and a Kanizsa triangle pointing at it. The domain is
/// `11·scale` by `7·scale`.
pub fn ellipse_triangle(scale: usize) -> Fixture {
    let u = scale as f64 / 16.0;
    let (width, height) = (11 * scale, 7 * scale);

    let e_center = (40.0 * u, 56.0 * u);
    let (ax, ay) = (24.0 * u, 34.0 * u);
    let e_radius = 11.0 * u;
    let e_inducers = [
        (e_center.0 - ax, e_center.1),
        (e_center.0 + ax, e_center.1),
        (e_center.0, e_center.1 - ay),
        (e_center.0, e_center.1 + ay),
    ];

    // apex faces the ellipse so both bridging contours settle on the same
    // pair of inducers and the bridge pinches off
    let tri = Triangle::equilateral((134.0 * u, 56.0 * u), 52.0 * u, std::f64::consts::PI);
    let t_radius = 13.0 * u;

    let inducer = move |p: Point| {
        let ellipse_part =
            !in_ellipse(e_center, ax, ay, p) && e_inducers.iter().any(|&c| within(c, e_radius, p));
        ellipse_part || tri.pacmen(t_radius, p)
    };
    let ideal = move |p: Point| in_ellipse(e_center, ax, ay, p) || tri.contains(p);
    Fixture::build(
        "ellipse_triangle",
        width,
        height,
        inducer,
        ideal,
        vec![e_center, tri.centroid()],
    )
}

pub fn by_name(name: &str, size: usize) -> Option<Fixture> {
    match name {
        "kanizsa" => Some(kanizsa(size)),
        "disk" => Some(disk(size)),
        "ellipse_triangle" => Some(ellipse_triangle(size)),
        _ => None,
    }
}
