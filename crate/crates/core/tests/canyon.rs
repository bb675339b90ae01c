use illusory::canyon::{build_canyon, CanyonParams, EdgeKind, GradientScaling};
use illusory::fixtures;

#[test]
fn canyon_drops_next_to_every_fixture_edge() {
    for f in [fixtures::kanizsa(96), fixtures::disk(96), fixtures::ellipse_triangle(8)] {
        let mask = f.mask().unwrap();
        let geo = *mask.geometry();
        for kind in [EdgeKind::ExpSquare, EdgeKind::Rational] {
            for scaling in [GradientScaling::MaxNormalized, GradientScaling::Raw] {
                let mut p = CanyonParams::with_defaults(geo.h());
                p.g_kind = kind;
                p.scaling = scaling;
                let g = build_canyon(&mask, &p).unwrap();
                assert!(g.field().min() >= p.alpha && g.field().max() <= p.alpha + p.beta);

                // cells of Q with a 4-neighbour outside Q
                let edge: Vec<(usize, usize)> = (0..geo.len())
                    .map(|idx| geo.coords(idx))
                    .filter(|&(i, j)| {
                        mask.contains(i, j)
                            && [(i - 1, j), (i + 1, j), (i, j - 1), (i, j + 1)]
                                .iter()
                                .any(|&(a, b)| !mask.contains(a, b))
                    })
                    .collect();
                let reach = p.sigma / geo.h();
                let near_min = (0..geo.len())
                    .filter(|&idx| {
                        let (i, j) = geo.coords(idx);
                        edge.iter().any(|&(a, b)| {
                            (i as f64 - a as f64).hypot(j as f64 - b as f64) <= reach
                        })
                    })
                    .map(|idx| g.values()[idx])
                    .fold(f64::INFINITY, f64::min);
                assert!(near_min <= p.alpha + 0.1 * p.beta, "{} {kind:?} {scaling:?}", f.name);
            }
        }
    }
}
