#![allow(dead_code)]

use geomkit_core::{Elem, FiniteField, Geometry, PointSet};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::sync::Arc;

pub fn field(q: u32) -> Arc<FiniteField> {
    FiniteField::parse(&q.to_string()).unwrap()
}

pub fn ag(q: u32, n: usize) -> Geometry {
    Geometry::affine(&field(q), n)
}

pub fn pg(q: u32, n: usize) -> Geometry {
    Geometry::projective(&field(q), n)
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Every subset of a small geometry, as point sets.
pub fn all_subsets(g: &Geometry) -> impl Iterator<Item = PointSet> + '_ {
    let n = g.n_points();
    assert!(n <= 20);
    (0u32..1 << n).map(move |mask| g.set_of((0..n).filter(|&i| mask >> i & 1 == 1)))
}

/// Line through two distinct points computed from coordinates alone.
pub fn coordinate_line(g: &Geometry, a: usize, b: usize) -> PointSet {
    let f = g.field().unwrap();
    let (u, v) = (g.coords(a).unwrap().to_vec(), g.coords(b).unwrap().to_vec());
    let mut out = g.empty_set();
    if g.is_affine() {
        let d = f.sub_vec(&v, &u);
        for t in f.elements() {
            out.insert(g.affine_id(&f.add_vec(&u, &f.scale(t, &d))).unwrap());
        }
    } else {
        for s in f.elements() {
            for t in f.elements() {
                let w = f.add_vec(&f.scale(s, &u), &f.scale(t, &v));
                if w.iter().any(|&x| x != 0) {
                    out.insert(g.projective_id(&w).unwrap());
                }
            }
        }
    }
    out
}

/// Sets closed under the line through any two of their points, found by
/// a direct subset scan.
pub fn line_closed(g: &Geometry, s: &PointSet) -> bool {
    let pts = s.to_vec();
    pts.iter().enumerate().all(|(i, &a)| {
        pts[i + 1..]
            .iter()
            .all(|&b| coordinate_line(g, a, b).is_subset(s))
    })
}

pub fn random_vec(rng: &mut impl rand::Rng, q: u32, len: usize) -> Vec<Elem> {
    (0..len).map(|_| rng.gen_range(0..q)).collect()
}
