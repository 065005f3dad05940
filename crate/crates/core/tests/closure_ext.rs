mod common;

use common::{ag, field, pg, rng};
use geomkit_core::affine::{parallel, SemiaffineDecomposition, SemilinearMap};
use geomkit_core::closure_ext::{
    eval_fractional, extend_to_closure, extension_hypothesis, fractional_decompose, fractional_map,
    is_fractional_morphism, point_at_infinity, projective_closure, FractionalDecomposition,
    VectorialExtension,
};
use geomkit_core::linalg::enumerate_invertible;
use geomkit_core::projective::{check_b1_b2, projectivize_map};
use geomkit_core::{
    field_morphisms, Elem, Error, FieldMorphism, FiniteField, GeoMap, Geometry, Matrix, PointSet,
};
use rand::seq::SliceRandom;
use rand::Rng;
use std::collections::BTreeSet;
use std::sync::Arc;

fn random_matrix(f: &Arc<FiniteField>, rows: usize, cols: usize, r: &mut impl Rng) -> Matrix {
    let data: Vec<Vec<Elem>> = (0..rows)
        .map(|_| common::random_vec(r, f.order(), cols))
        .collect();
    Matrix::from_rows(f, &data).unwrap()
}

fn random_invertible(f: &Arc<FiniteField>, n: usize, r: &mut impl Rng) -> Matrix {
    loop {
        let m = random_matrix(f, n, n, r);
        if m.is_invertible() {
            return m;
        }
    }
}

fn morphism_oracle(dom: &Geometry, cod: &Geometry, images: &[usize]) -> bool {
    let flats: BTreeSet<&PointSet> = dom.flats().iter().collect();
    cod.flats().iter().all(|f| {
        let pre = dom.set_of((0..dom.n_points()).filter(|&x| f.contains(images[x])));
        flats.contains(&pre)
    })
}

// The block matrix [[1, 0], [a, M]] acting on (λ, v).
fn block(m: &Matrix, a: &[Elem]) -> Matrix {
    let f = m.field();
    let mut rows = vec![vec![0; m.cols() + 1]];
    rows[0][0] = 1;
    for (r, &t) in a.iter().enumerate() {
        let mut row = vec![t];
        row.extend_from_slice(m.row(r));
        rows.push(row);
    }
    Matrix::from_rows(f, &rows).unwrap()
}

// An element of multiplicative order q − 1, found by brute force.
fn primitive(f: &FiniteField) -> Elem {
    let q = f.order() as u64;
    f.elements()
        .skip(1)
        .find(|&c| (1..q - 1).all(|e| f.pow(c, e) != 1))
        .unwrap()
}

fn embedding(k: &Arc<FiniteField>, k2: &Arc<FiniteField>) -> FieldMorphism {
    field_morphisms(k, k2).into_iter().next().unwrap()
}

// Images of the fractional map computed straight from the formula.
fn fractional_oracle(
    dom: &Geometry,
    cod: &Geometry,
    psi: &Matrix,
    omega: &[Elem],
    s: &FieldMorphism,
) -> Option<Vec<usize>> {
    let f2 = s.target();
    (0..dom.n_points())
        .map(|x| {
            let v: Vec<Elem> = dom.coords(x).unwrap().iter().map(|&c| s.apply(c)).collect();
            let denom = f2.add(1, f2.dot(omega, &v));
            let w = f2.scale(f2.inv(denom)?, &psi.mul_vec(&v));
            cod.affine_id(&w)
        })
        .collect()
}

#[test]
fn closure_point_counts() {
    let c = projective_closure(&ag(3, 2)).unwrap();
    let normalized = (1..27u32)
        .map(|code| [code / 9, code / 3 % 3, code % 3])
        .filter(|v| v.iter().find(|&&x| x != 0) == Some(&1))
        .count();
    assert_eq!(c.projective().n_points(), normalized);
    assert_eq!(c.hyperplane().len(), 4);

    let c = projective_closure(&ag(2, 1)).unwrap();
    assert_eq!((c.projective().n_points(), c.hyperplane().len()), (3, 1));
    assert!(projective_closure(&pg(2, 2)).is_err());
}

#[test]
fn affine_part_is_the_complement_of_infinity() {
    for a in [ag(3, 2), ag(4, 2), ag(2, 3)] {
        let c = projective_closure(&a).unwrap();
        let p = c.projective();
        assert!(p.is_flat(c.hyperplane()));
        assert_eq!(p.rank(&c.hyperplane().to_vec()), p.dimension() as usize);
        let finite = c.hyperplane().complement();
        let sub = p.subgeometry(&finite).unwrap();
        let images: Vec<usize> = (0..a.n_points())
            .map(|x| finite.iter().position(|y| y == c.embed(x)).unwrap())
            .collect();
        assert!(GeoMap::new(&a, &sub, images)
            .unwrap()
            .is_isomorphism()
            .unwrap());
        for x in 0..a.n_points() {
            assert_eq!(c.affine_point(c.embed(x)), Some(x));
            assert_eq!(p.coords(c.embed(x)).unwrap()[0], 1);
        }
    }
}

#[test]
fn points_at_infinity() {
    let a = ag(3, 2);
    let c = projective_closure(&a).unwrap();
    let id = |x, y| a.affine_id(&[x, y]).unwrap();
    let horizontal = a.set_of([id(0, 0), id(1, 0), id(2, 0)]);
    let shifted = a.set_of([id(0, 1), id(1, 1), id(2, 1)]);
    let diagonal = a.set_of([id(0, 0), id(1, 1), id(2, 2)]);
    assert_eq!(
        point_at_infinity(&c, &horizontal),
        point_at_infinity(&c, &shifted)
    );
    assert_eq!(
        point_at_infinity(&c, &diagonal).unwrap(),
        c.projective().projective_id(&[0, 1, 1]).unwrap()
    );
    assert_ne!(
        point_at_infinity(&c, &horizontal),
        point_at_infinity(&c, &diagonal)
    );
    assert_eq!(
        point_at_infinity(&c, &a.set_of([id(0, 0)])),
        Err(Error::NotALine)
    );
}

#[test]
fn parallel_iff_same_point_at_infinity() {
    for a in [ag(4, 2), ag(3, 3), ag(2, 3)] {
        let c = projective_closure(&a).unwrap();
        for l1 in a.lines() {
            for l2 in a.lines() {
                let same = point_at_infinity(&c, l1) == point_at_infinity(&c, l2);
                assert_eq!(parallel(&a, l1, l2).unwrap(), same);
            }
        }
    }
}

#[test]
fn vectorial_extensions_are_unique_up_to_one_isomorphism() {
    let a = ag(3, 2);
    let f = field(3);
    let e1 = VectorialExtension::new(&a, 0).unwrap();
    let e2 = VectorialExtension::new(&a, 5).unwrap();
    assert_eq!(e1.dim(), 3);
    let t = e1.transition_to(&e2).unwrap();
    for x in 0..a.n_points() {
        assert_eq!(e1.embed(x)[0], 1);
        assert_eq!(t.mul_vec(&e1.embed(x)), e2.embed(x));
    }
    // The transition is the only linear map doing this.
    let matching: Vec<Matrix> = enumerate_invertible(&f, 3)
        .filter(|m| (0..a.n_points()).all(|x| m.mul_vec(&e1.embed(x)) == e2.embed(x)))
        .collect();
    assert_eq!(matching, vec![t]);
    let embedded: BTreeSet<Vec<Elem>> = (0..a.n_points()).map(|x| e1.embed(x)).collect();
    assert_eq!(embedded.len(), 9);
    assert_eq!(
        VectorialExtension::new(&a, 9).unwrap_err(),
        Error::UnknownPoint(9)
    );
}

#[test]
fn semiaffine_maps_extend_by_the_block_matrix() {
    let mut r = rng(75);
    for q in [4, 5] {
        let a = ag(q, 2);
        let f = field(q);
        let c = projective_closure(&a).unwrap();
        let sigmas = field_morphisms(&f, &f);
        for _ in 0..20 {
            let m = random_invertible(&f, 2, &mut r);
            let t = common::random_vec(&mut r, q, 2);
            let s = sigmas.choose(&mut r).unwrap().clone();
            let d = SemiaffineDecomposition {
                differential: SemilinearMap::new(m.clone(), s.clone()).unwrap(),
                translation: t.clone(),
            };
            let phi = d.to_map(&a, &a).unwrap().then(&c.inclusion()).unwrap();
            let res = extend_to_closure(&phi).unwrap();
            assert!(res.hypothesis);
            let ext = res.extension().unwrap();
            assert!(ext.exceptional.is_empty() && ext.unique && ext.b1_b2.holds());
            let expected = projectivize_map(
                &SemilinearMap::new(block(&m, &t), s).unwrap(),
                c.projective(),
                c.projective(),
            )
            .unwrap();
            assert_eq!(ext.map.images(), expected.images());
            assert!(ext.map.to_total().unwrap().is_isomorphism().unwrap());
        }
    }
}

#[test]
fn projection_extends_with_one_exceptional_direction() {
    let (a3, a2) = (ag(3, 3), ag(3, 2));
    let f = field(3);
    let proj = GeoMap::new(
        &a3,
        &a2,
        (0..27)
            .map(|x| a2.affine_id(&a3.coords(x).unwrap()[..2]).unwrap())
            .collect(),
    )
    .unwrap();
    let target = projective_closure(&a2).unwrap();
    let res = extend_to_closure(&proj.then(&target.inclusion()).unwrap()).unwrap();
    let ext = res.extension().unwrap();
    let p3 = res.closure.projective();
    assert_eq!(
        ext.exceptional.to_vec(),
        vec![p3.projective_id(&[0, 0, 0, 1]).unwrap()]
    );
    assert!(ext.exceptional.is_subset(res.closure.hyperplane()));
    assert_eq!(ext.map.exceptional(), &ext.exceptional);
    let m = Matrix::from_rows(&f, &[vec![1, 0, 0, 0], vec![0, 1, 0, 0], vec![0, 0, 1, 0]]).unwrap();
    let expected = projectivize_map(&SemilinearMap::linear(m), p3, target.projective()).unwrap();
    assert_eq!(ext.map.images(), expected.images());
    assert!(ext.unique);
}

#[test]
fn collineations_are_recovered_from_their_affine_part() {
    let mut r = rng(31);
    for q in [3, 4] {
        let a = ag(q, 2);
        let f = field(q);
        let c = projective_closure(&a).unwrap();
        let p = c.projective();
        let sigmas = field_morphisms(&f, &f);
        for _ in 0..40 {
            let m = random_invertible(&f, 3, &mut r);
            let s = sigmas.choose(&mut r).unwrap().clone();
            let col = projectivize_map(&SemilinearMap::new(m, s).unwrap(), p, p)
                .unwrap()
                .to_total()
                .unwrap();
            let phi = c.inclusion().then(&col).unwrap();
            let res = extend_to_closure(&phi).unwrap();
            let ext = res.extension().unwrap();
            // Injective maps have no exceptional directions, embeddings extend to embeddings.
            assert!(ext.exceptional.is_empty());
            let total = ext.map.to_total().unwrap();
            assert!(total.is_embedding().unwrap());
            assert_eq!(total, col);
            assert!(ext.unique);
        }
    }
}

#[test]
fn restriction_of_the_extension_is_the_input() {
    let mut r = rng(4);
    let a = ag(4, 2);
    let c = projective_closure(&a).unwrap();
    let f = field(4);
    for _ in 0..20 {
        let m = random_matrix(&f, 3, 3, &mut r);
        let s = SemilinearMap::linear(m);
        let Ok(partial) = projectivize_map(&s, c.projective(), c.projective()) else {
            continue;
        };
        // Keep the maps that are defined on the affine part with image not in a line.
        let Some(images) = (0..a.n_points())
            .map(|x| partial.apply(c.embed(x)))
            .collect::<Option<Vec<_>>>()
        else {
            continue;
        };
        let phi = GeoMap::new(&a, c.projective(), images).unwrap();
        if !phi.image_not_in_line() {
            continue;
        }
        let res = extend_to_closure(&phi).unwrap();
        let ext = res.extension().unwrap();
        for x in 0..a.n_points() {
            assert_eq!(ext.map.apply(c.embed(x)), Some(phi.apply(x)));
        }
        assert!(ext.exceptional.is_subset(c.hyperplane()));
        assert_eq!(ext.map.images(), partial.images());
    }
}

#[test]
fn extension_rejects_bad_inputs() {
    let a = ag(3, 2);
    let c = projective_closure(&a).unwrap();
    let f = field(3);
    let squares: Vec<usize> = (0..9)
        .map(|x| {
            let v = a.coords(x).unwrap();
            c.embed(a.affine_id(&[f.mul(v[0], v[0]), v[1]]).unwrap())
        })
        .collect();
    let bad = GeoMap::new(&a, c.projective(), squares).unwrap();
    assert!(matches!(
        extend_to_closure(&bad),
        Err(Error::NotAMorphism(_))
    ));
    let constant = GeoMap::constant(&a, c.projective(), 0).unwrap();
    assert_eq!(
        extend_to_closure(&constant).unwrap_err(),
        Error::DegenerateImage
    );
    assert!(extend_to_closure(&GeoMap::identity(&a)).is_err());
}

#[test]
fn hypothesis_flag() {
    let cases = [
        (2, 2, false),
        (2, 4, false),
        (3, 3, true),
        (3, 9, true),
        (3, 4, false),
        (3, 7, false),
        (4, 4, true),
        (5, 5, true),
        (4, 16, true),
    ];
    for (q, q2, expected) in cases {
        assert_eq!(
            extension_hypothesis(&field(q), &field(q2)),
            expected,
            "GF({q}) -> GF({q2})"
        );
    }
    let a = ag(2, 2);
    let c = projective_closure(&a).unwrap();
    let res = extend_to_closure(&c.inclusion()).unwrap();
    assert!(!res.hypothesis);
    assert!(res.extension().is_some());
}

#[test]
fn fractional_map_into_gf9() {
    let (f3, f9) = (field(3), field(9));
    let (dom, cod) = (ag(3, 2), ag(9, 2));
    let s = embedding(&f3, &f9);
    let c = primitive(&f9);
    let minus_one = f9.neg(1);
    assert!(![0, c, f9.mul(2, c)].contains(&minus_one));

    let psi = SemilinearMap::new(Matrix::identity(&f9, 2), s.clone()).unwrap();
    let omega =
        SemilinearMap::new(Matrix::from_rows(&f9, &[vec![c, 0]]).unwrap(), s.clone()).unwrap();
    let d = FractionalDecomposition::new(psi, omega).unwrap();
    let phi = fractional_map(&d, &dom, &cod).unwrap();
    let oracle = fractional_oracle(&dom, &cod, &Matrix::identity(&f9, 2), &[c, 0], &s).unwrap();
    assert_eq!(phi.images(), oracle.as_slice());
    assert!(morphism_oracle(&dom, &cod, &oracle));
    assert!(is_fractional_morphism(&d, &dom, &cod).unwrap());
    assert!(phi.is_injective() && phi.image_not_in_line());

    let target = projective_closure(&cod).unwrap();
    let res = extend_to_closure(&phi.then(&target.inclusion()).unwrap()).unwrap();
    assert!(res.hypothesis);
    let ext = res.extension().unwrap();
    assert!(ext.exceptional.is_empty());
    assert!(check_b1_b2(&ext.map).unwrap().holds());

    let back = fractional_decompose(&phi).unwrap();
    assert_eq!(back, d);
}

#[test]
fn poles_are_reported() {
    let f5 = field(5);
    let psi = SemilinearMap::linear(Matrix::identity(&f5, 2));
    let omega = SemilinearMap::linear(Matrix::from_rows(&f5, &[vec![1, 0]]).unwrap());
    let d = FractionalDecomposition::new(psi, omega).unwrap();
    assert!(matches!(
        eval_fractional(&d, &[4, 0]),
        Err(Error::PoleHit(_))
    ));
    assert_eq!(eval_fractional(&d, &[1, 3]).unwrap(), vec![3, 4]);
    let a = ag(5, 2);
    assert!(matches!(
        is_fractional_morphism(&d, &a, &a),
        Err(Error::PoleHit(_))
    ));
}

#[test]
fn zero_denominator_term_gives_the_semilinear_map() {
    let mut r = rng(12);
    let f = field(7);
    let a = ag(7, 2);
    for _ in 0..10 {
        let m = random_matrix(&f, 2, 2, &mut r);
        let d = FractionalDecomposition::new(
            SemilinearMap::linear(m.clone()),
            SemilinearMap::linear(Matrix::zero(&f, 1, 2)),
        )
        .unwrap();
        for x in 0..a.n_points() {
            let v = a.coords(x).unwrap();
            assert_eq!(eval_fractional(&d, v).unwrap(), m.mul_vec(v));
        }
        assert!(is_fractional_morphism(&d, &a, &a).unwrap());
    }
}

#[test]
fn decomposition_examples() {
    let f5 = field(5);
    let d = fractional_decompose(&GeoMap::identity(&ag(5, 2))).unwrap();
    assert_eq!(d.psi.matrix(), &Matrix::identity(&f5, 2));
    assert!(d.omega.is_zero());

    let f7 = field(7);
    let a = ag(7, 2);
    let m = Matrix::from_rows(&f7, &[vec![2, 3], vec![1, 4]]).unwrap();
    assert!(m.is_invertible());
    let d0 = SemiaffineDecomposition {
        differential: SemilinearMap::linear(m.clone()),
        translation: vec![0, 0],
    };
    let d = fractional_decompose(&d0.to_map(&a, &a).unwrap()).unwrap();
    assert_eq!(d.psi.matrix(), &m);
    assert!(d.omega.is_zero() && d.sigma().is_identity());
}

#[test]
fn decomposition_preconditions() {
    assert!(matches!(
        fractional_decompose(&GeoMap::identity(&ag(2, 2))),
        Err(Error::HypothesisViolated(_))
    ));
    let a = ag(5, 2);
    let shift = SemiaffineDecomposition {
        differential: SemilinearMap::linear(Matrix::identity(&field(5), 2)),
        translation: vec![1, 0],
    };
    assert!(matches!(
        fractional_decompose(&shift.to_map(&a, &a).unwrap()),
        Err(Error::Precondition(_))
    ));
}

#[test]
fn decomposition_handles_collapsed_directions() {
    let (a3, a2) = (ag(4, 3), ag(4, 2));
    let f = field(4);
    let m = Matrix::from_rows(&f, &[vec![1, 2, 3], vec![0, 1, 1]]).unwrap();
    let d0 = SemiaffineDecomposition {
        differential: SemilinearMap::linear(m.clone()),
        translation: vec![0, 0],
    };
    let phi = d0.to_map(&a3, &a2).unwrap();
    let d = fractional_decompose(&phi).unwrap();
    assert_eq!(d.psi.matrix(), &m);
    assert!(d.omega.is_zero());
    assert_eq!(fractional_map(&d, &a3, &a2).unwrap(), phi);
}

#[test]
fn random_fractional_maps_round_trip() {
    let (f3, f9) = (field(3), field(9));
    let (dom, cod) = (ag(3, 2), ag(9, 2));
    let s = embedding(&f3, &f9);
    let mut r = rng(99);
    let mut done = 0;
    while done < 25 {
        let psi_m = random_invertible(&f9, 2, &mut r);
        let omega_row = common::random_vec(&mut r, 9, 2);
        let Some(oracle) = fractional_oracle(&dom, &cod, &psi_m, &omega_row, &s) else {
            continue;
        };
        let d = FractionalDecomposition::new(
            SemilinearMap::new(psi_m.clone(), s.clone()).unwrap(),
            SemilinearMap::new(Matrix::from_rows(&f9, &[omega_row]).unwrap(), s.clone()).unwrap(),
        )
        .unwrap();
        // Pole-free fractional maps are morphisms.
        assert!(morphism_oracle(&dom, &cod, &oracle));
        assert!(is_fractional_morphism(&d, &dom, &cod).unwrap());
        let phi = fractional_map(&d, &dom, &cod).unwrap();
        assert_eq!(phi.images(), oracle.as_slice());
        let back = fractional_decompose(&phi).unwrap();
        assert_eq!(back, d);
        done += 1;
    }
}

#[test]
fn prime_field_decompositions_are_linear() {
    let mut r = rng(57);
    for q in [5, 7] {
        let f = field(q);
        let a = ag(q, 2);
        for _ in 0..10 {
            let m = random_invertible(&f, 2, &mut r);
            let d0 = SemiaffineDecomposition {
                differential: SemilinearMap::linear(m.clone()),
                translation: vec![0, 0],
            };
            let d = fractional_decompose(&d0.to_map(&a, &a).unwrap()).unwrap();
            assert!(d.sigma().is_identity());
            assert!(d.omega.is_zero());
            assert_eq!(d.psi.matrix(), &m);
        }
    }
}
