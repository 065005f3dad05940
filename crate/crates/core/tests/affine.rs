mod common;

use common::{ag, all_subsets, field, rng};
use geomkit_core::affine::{
    classical_ft_check, ft_affine_verify, is_parallel_morphism, is_parallel_morphism_by_quadruples,
    parallel, semiaffine_extract, semiaffine_family, subspace_criterion, SemilinearMap,
};
use geomkit_core::linalg::enumerate_invertible;
use geomkit_core::search::{Enumerator, Filter, SearchOptions};
use geomkit_core::synthetic::{
    synthetic_affine_check, veblen_young_check, Incidence, SyntheticIncidence,
};
use geomkit_core::{field_morphisms, Elem, Error, GeoMap, Geometry, Matrix};
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::Rng;

fn map_from(g: &Geometry, cod: &Geometry, f: impl Fn(&[Elem]) -> Vec<Elem>) -> GeoMap {
    let images = (0..g.n_points())
        .map(|x| cod.affine_id(&f(g.coords(x).unwrap())).unwrap())
        .collect();
    GeoMap::new(g, cod, images).unwrap()
}

fn random_invertible(
    f: &std::sync::Arc<geomkit_core::FiniteField>,
    n: usize,
    r: &mut impl Rng,
) -> Matrix {
    loop {
        let rows: Vec<Vec<Elem>> = (0..n)
            .map(|_| common::random_vec(r, f.order(), n))
            .collect();
        let m = Matrix::from_rows(f, &rows).unwrap();
        if m.is_invertible() {
            return m;
        }
    }
}

// All parallel morphisms with big image, found by the pruned search.
fn parallel_family(dom: &Geometry, cod: &Geometry) -> Vec<GeoMap> {
    let mut opts = SearchOptions::new(Filter::ImageNotInLine);
    opts.parallel = true;
    Enumerator::new(dom, cod, opts).unwrap().run().unwrap()
}

#[test]
fn parallel_examples() {
    let a = ag(3, 2);
    let id = |x: u32, y: u32| a.affine_id(&[x, y]).unwrap();
    let l0 = a.set_of([id(0, 0), id(1, 0), id(2, 0)]);
    let l1 = a.set_of([id(0, 1), id(1, 1), id(2, 1)]);
    let diag = a.set_of([id(0, 0), id(1, 1), id(2, 2)]);
    assert!(parallel(&a, &l0, &l1).unwrap());
    assert!(parallel(&a, &l0, &l0).unwrap());
    assert!(!parallel(&a, &l0, &diag).unwrap());
    assert_eq!(
        parallel(&a, &a.empty_set(), &l0).unwrap_err(),
        Error::EmptyFlat
    );
    // A point and a line have different dimensions.
    assert!(!parallel(&a, &a.set_of([id(0, 0)]), &l0).unwrap());
    assert!(parallel(&a, &a.set_of([id(0, 0)]), &a.set_of([id(2, 1)])).unwrap());
}

#[test]
fn translations_and_semiaffine_maps_are_parallel() {
    let a = ag(3, 2);
    let f = field(3);
    for t in 0..9 {
        let tv = a.coords(t).unwrap().to_vec();
        let phi = map_from(&a, &a, |v| f.add_vec(v, &tv));
        assert!(is_parallel_morphism(&phi).unwrap().parallel);
    }
    // Every (M, sigma, a) over GF(3), including singular M.
    for m in Matrix::enumerate_all(&f, 2, 2) {
        for t in [0, 5] {
            let tv = a.coords(t).unwrap().to_vec();
            let phi = map_from(&a, &a, |v| f.add_vec(&m.mul_vec(v), &tv));
            assert!(is_parallel_morphism(&phi).unwrap().parallel);
            assert!(is_parallel_morphism_by_quadruples(&phi).unwrap().parallel);
        }
    }
}

#[test]
fn squaring_is_not_parallel() {
    let a = ag(3, 2);
    let f = field(3);
    let phi = map_from(&a, &a, |v| vec![f.mul(v[0], v[0]), v[1]]);
    let r = is_parallel_morphism(&phi).unwrap();
    assert!(!r.parallel);
    let [p, q, s, t] = r.witness.unwrap();
    // The witness pairs span parallel lines with non-parallel images.
    let l1 = a.line_through(p, q).clone();
    let l2 = a.line_through(s, t).clone();
    assert!(parallel(&a, &l1, &l2).unwrap());
    let img = |x, y| {
        if phi.apply(x) == phi.apply(y) {
            a.set_of([phi.apply(x)])
        } else {
            a.line_through(phi.apply(x), phi.apply(y)).clone()
        }
    };
    assert!(!parallel(&a, &img(p, q), &img(s, t)).unwrap());
    assert!(!is_parallel_morphism_by_quadruples(&phi).unwrap().parallel);
}

#[test]
fn extraction_examples() {
    let a = ag(3, 2);
    let f = field(3);
    let m = Matrix::from_rows(&f, &[vec![1, 2], vec![0, 1]]).unwrap();
    let t = vec![2, 1];
    let phi = map_from(&a, &a, |v| f.add_vec(&m.mul_vec(v), &t));
    let d = semiaffine_extract(&phi).unwrap();
    assert_eq!(d.differential.matrix(), &m);
    assert!(d.sigma().is_identity());
    assert_eq!(d.translation, t);

    let a4 = ag(4, 2);
    let f4 = field(4);
    let frob = map_from(&a4, &a4, |v| vec![f4.frobenius(v[0]), f4.frobenius(v[1])]);
    let d = semiaffine_extract(&frob).unwrap();
    assert_eq!(d.differential.matrix(), &Matrix::identity(&f4, 2));
    assert_eq!(d.sigma().frobenius_power(), 1);
    assert_eq!(d.translation, vec![0, 0]);

    let sq = map_from(&a, &a, |v| vec![f.mul(v[0], v[0]), v[1]]);
    assert!(matches!(
        semiaffine_extract(&sq),
        Err(Error::NotSemiaffine(_))
    ));

    let onto_line = map_from(&a, &a, |v| vec![v[0], 0]);
    assert_eq!(
        semiaffine_extract(&onto_line).unwrap_err(),
        Error::DegenerateImage
    );
}

#[test]
fn ft_affine_examples() {
    let r = ft_affine_verify(3, 2, 3, 2, u64::MAX).unwrap();
    assert!(r.equal);
    assert_eq!((r.enumerated, r.constructed), (432, 432));

    let r = ft_affine_verify(2, 2, 2, 2, u64::MAX).unwrap();
    assert!(r.equal);
    // Any bijection of the 4-point plane: 4! = 24 maps, all semiaffine.
    assert_eq!(r.enumerated, 24);

    let r = ft_affine_verify(2, 3, 7, 2, u64::MAX).unwrap();
    assert!(r.equal);
    assert_eq!((r.enumerated, r.constructed), (0, 0));
}

#[test]
fn ft_affine_cross_field() {
    let r = ft_affine_verify(2, 2, 4, 2, u64::MAX).unwrap();
    assert!(r.equal, "{r:?}");
    assert!(r.enumerated > 0);
}

#[test]
fn ft_affine_budget() {
    assert!(matches!(
        ft_affine_verify(5, 3, 5, 3, 1000),
        Err(Error::SearchBudgetExceeded { budget: 1000 })
    ));
}

#[test]
fn constructed_family_is_parallel_and_extracts() {
    let a = ag(3, 2);
    let fam = semiaffine_family(&a, &a).unwrap();
    let gl = enumerate_invertible(&field(3), 2).count();
    assert_eq!(fam.len(), 9 * gl);
    for images in &fam {
        let phi = GeoMap::new(&a, &a, images.clone()).unwrap();
        assert!(is_parallel_morphism(&phi).unwrap().parallel);
        assert!(phi.is_morphism().is_morphism);
        let d = semiaffine_extract(&phi).unwrap();
        assert_eq!(d.to_map(&a, &a).unwrap(), phi);
        // Extraction is deterministic, so the differential is unique.
        assert_eq!(semiaffine_extract(&phi).unwrap(), d);
    }
}

#[test]
fn enumerated_parallel_morphisms_behave_on_lines() {
    for (dom, cod) in [
        (ag(3, 2), ag(3, 2)),
        (ag(4, 2), ag(4, 2)),
        (ag(2, 3), ag(2, 3)),
    ] {
        for phi in parallel_family(&dom, &cod) {
            assert!(phi.is_morphism().is_morphism);
            for l in dom.lines() {
                let img = phi.image_of(l);
                assert!(
                    img.len() == 1 || img.len() == l.len(),
                    "line neither constant nor injective"
                );
                if img.len() > 1 {
                    let pts = img.to_vec();
                    assert!(cod.line_through(pts[0], pts[1]).is_superset_of(&img));
                }
            }
            let d = semiaffine_extract(&phi).unwrap();
            assert_eq!(d.to_map(&dom, &cod).unwrap(), phi);
        }
    }
}

trait Superset {
    fn is_superset_of(&self, other: &Self) -> bool;
}

impl Superset for geomkit_core::PointSet {
    fn is_superset_of(&self, other: &Self) -> bool {
        other.is_subset(self)
    }
}

#[test]
fn prime_fields_give_affine_maps() {
    for p in [3, 5] {
        let a = ag(p, 2);
        let mut r = rng(p as u64);
        let fam = semiaffine_family(&a, &a).unwrap();
        for _ in 0..50 {
            let images = fam.choose(&mut r).unwrap().clone();
            let phi = GeoMap::new(&a, &a, images).unwrap();
            assert!(semiaffine_extract(&phi).unwrap().sigma().is_identity());
        }
    }
}

#[test]
fn classical_examples() {
    let a = ag(3, 2);
    let f = field(3);
    let mut r = rng(1);
    let m = random_invertible(&f, 2, &mut r);
    let t = vec![1, 2];
    let phi = map_from(&a, &a, |v| f.add_vec(&m.mul_vec(v), &t));
    let c = classical_ft_check(&phi).unwrap();
    assert!(c.collineation && c.semiaffinity);

    // Random permutations until one breaks a line.
    let mut found = false;
    for _ in 0..100 {
        let mut images: Vec<usize> = (0..9).collect();
        images.shuffle(&mut r);
        let phi = GeoMap::new(&a, &a, images).unwrap();
        if phi.is_morphism().is_morphism {
            continue;
        }
        let c = classical_ft_check(&phi).unwrap();
        assert!(!c.collineation && !c.semiaffinity);
        found = true;
        break;
    }
    assert!(found);

    let a4 = ag(4, 2);
    let f4 = field(4);
    let frob = map_from(&a4, &a4, |v| {
        vec![f4.frobenius(v[1]), f4.add(f4.frobenius(v[0]), 1)]
    });
    for l in a4.lines() {
        assert!(a4.lines().contains(&frob.image_of(l)));
    }
    let c = classical_ft_check(&frob).unwrap();
    assert!(c.collineation && c.semiaffinity);

    let a2 = ag(2, 2);
    assert!(matches!(
        classical_ft_check(&GeoMap::identity(&a2)),
        Err(Error::HypothesisViolated(_))
    ));
}

#[test]
fn classical_agrees_on_every_collineation_of_ag23() {
    let a = ag(3, 2);
    let bij = geomkit_core::search::enumerate_morphisms(&a, &a, Filter::Bijective).unwrap();
    assert_eq!(bij.len(), 432);
    for phi in &bij {
        assert!(classical_ft_check(phi).unwrap().agree());
    }
}

#[test]
fn subspace_examples() {
    let a = ag(3, 2);
    let id = |x: u32, y: u32| a.affine_id(&[x, y]).unwrap();
    let w = a.set_of([id(0, 0), id(1, 0), id(2, 0)]);
    assert!(subspace_criterion(&a, &w).unwrap());
    assert!(!subspace_criterion(&a, &a.set_of([id(0, 0), id(1, 0)])).unwrap());
    assert_eq!(
        subspace_criterion(&ag(2, 2), &ag(2, 2).all_points()).unwrap_err(),
        Error::FieldTooSmall
    );
}

#[test]
fn subspace_criterion_on_every_subset() {
    let a = ag(3, 2);
    let f = field(3);
    let mut count = 0;
    for s in all_subsets(&a) {
        // Direct test: contains 0, closed under + and scalars.
        let pts = s.to_vec();
        let direct = s.contains(0)
            && pts.iter().all(|&u| {
                pts.iter().all(|&v| {
                    s.contains(
                        a.affine_id(&f.add_vec(a.coords(u).unwrap(), a.coords(v).unwrap()))
                            .unwrap(),
                    )
                }) && f
                    .elements()
                    .all(|c| s.contains(a.affine_id(&f.scale(c, a.coords(u).unwrap())).unwrap()))
            });
        assert_eq!(subspace_criterion(&a, &s).unwrap(), direct);
        count += direct as usize;
    }
    // {0}, four lines through 0, the plane.
    assert_eq!(count, 6);
}

#[test]
fn synthetic_examples() {
    let a = ag(3, 2);
    let s = SyntheticIncidence::of_affine(&a);
    let r = synthetic_affine_check(&s);
    assert!(r.all_passed(), "{r:?}");
    let broken = s.without_line(0);
    let r = synthetic_affine_check(&broken);
    let w = r.get("A3").unwrap();
    assert!(!w.passed);
    assert!(w.witness.is_some());

    let fano = Incidence::of_geometry(&common::pg(2, 2));
    let r = synthetic_affine_check(&SyntheticIncidence {
        parallel: (0..fano.lines.len()).collect(),
        incidence: fano.clone(),
    });
    assert!(!r.passed("A3"));
    assert!(veblen_young_check(&fano).all_passed());
}

#[test]
fn synthetic_affine_spaces_of_several_orders() {
    for (q, n) in [(2, 2), (4, 2), (5, 2), (2, 3), (3, 3)] {
        let r = synthetic_affine_check(&SyntheticIncidence::of_affine(&ag(q, n)));
        assert!(r.all_passed(), "AG({n},{q}): {r:?}");
    }
}

#[test]
fn semilinear_maps_are_additive_and_twisted() {
    let f4 = field(4);
    for sigma in field_morphisms(&f4, &f4) {
        let m = Matrix::from_rows(&f4, &[vec![1, 2], vec![3, 1]]).unwrap();
        let phi = SemilinearMap::new(m, sigma.clone()).unwrap();
        for code in 0..16u64 {
            let v = f4.decode(code, 2);
            for l in f4.elements() {
                assert_eq!(
                    phi.apply(&f4.scale(l, &v)),
                    f4.scale(sigma.apply(l), &phi.apply(&v))
                );
            }
            for code2 in 0..16u64 {
                let w = f4.decode(code2, 2);
                assert_eq!(
                    phi.apply(&f4.add_vec(&v, &w)),
                    f4.add_vec(&phi.apply(&v), &phi.apply(&w))
                );
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn parallel_checks_agree(q in prop::sample::select(vec![2u32, 3, 4]), seed in any::<u64>()) {
        let a = ag(q, 2);
        let mut r = rng(seed);
        let n = a.n_points();
        let palette: Vec<usize> = (0..r.gen_range(1..=n)).map(|_| r.gen_range(0..n)).collect();
        let images: Vec<usize> = (0..n).map(|_| *palette.choose(&mut r).unwrap()).collect();
        let phi = GeoMap::new(&a, &a, images).unwrap();
        prop_assert_eq!(
            is_parallel_morphism(&phi).unwrap().parallel,
            is_parallel_morphism_by_quadruples(&phi).unwrap().parallel
        );
    }

    #[test]
    fn random_semiaffine_round_trip(seed in any::<u64>(), q in prop::sample::select(vec![3u32, 4, 5, 8, 9])) {
        let a = ag(q, 2);
        let f = a.field().unwrap().clone();
        let mut r = rng(seed);
        let m = random_invertible(&f, 2, &mut r);
        let sigma = field_morphisms(&f, &f).choose(&mut r).unwrap().clone();
        let t = common::random_vec(&mut r, q, 2);
        let phi_sl = SemilinearMap::new(m.clone(), sigma.clone()).unwrap();
        let phi = map_from(&a, &a, |v| f.add_vec(&phi_sl.apply(v), &t));
        prop_assert!(is_parallel_morphism(&phi).unwrap().parallel);
        let d = semiaffine_extract(&phi).unwrap();
        prop_assert_eq!(d.differential.matrix(), &m);
        prop_assert_eq!(d.sigma(), &sigma);
        prop_assert_eq!(d.translation, t);
    }
}
