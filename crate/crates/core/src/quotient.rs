//! Quotient geometries `X/E`, partial morphisms with exceptional flat `E`,
//! and factorization of partial morphisms through the quotient map.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::Error;
use crate::field::{Elem, FiniteField};
use crate::geometry::Geometry;
use crate::linalg::Matrix;
use crate::morphism::{GeoMap, MorphismChecker, MorphismWitness, PartialGeoMap};
use crate::pointset::PointSet;
use crate::projective::check_b1_b2;

/// The geometry on the classes of `X − E` under `x1 ∨ E = x2 ∨ E`.
/// Class `c` is represented by its smallest point, and classes are ordered
/// by representative.
#[derive(Clone, Debug)]
pub struct QuotientGeometry {
    geometry: Geometry,
    parent: Geometry,
    exceptional: PointSet,
    classes: Vec<Vec<usize>>,
    class_of: Vec<Option<usize>>,
}

impl QuotientGeometry {
    pub fn geometry(&self) -> &Geometry {
        &self.geometry
    }

    pub fn parent(&self) -> &Geometry {
        &self.parent
    }

    pub fn exceptional(&self) -> &PointSet {
        &self.exceptional
    }

    pub fn classes(&self) -> &[Vec<usize>] {
        &self.classes
    }

    /// The class of a parent point, `None` on `E`.
    pub fn class_of(&self, x: usize) -> Option<usize> {
        self.class_of[x]
    }

    pub fn representative(&self, c: usize) -> usize {
        self.classes[c][0]
    }

    /// The projection `π: X ⇢ X/E`.
    pub fn projection(&self) -> PartialGeoMap {
        PartialGeoMap::new(&self.parent, &self.geometry, self.class_of.clone())
            .expect("classes are points of the quotient")
    }

    /// `S ↦ S/E` for a flat `S ⊇ E` of the parent.
    pub fn flat_down(&self, s: &PointSet) -> Result<PointSet, Error> {
        if !self.parent.is_flat(s) || !self.exceptional.is_subset(s) {
            return Err(Error::NotAFlat);
        }
        Ok(self
            .geometry
            .set_of(s.iter().filter_map(|x| self.class_of[x])))
    }

    /// `T ↦ E ∪ (union of the classes in T)`, inverse to [`Self::flat_down`].
    pub fn flat_up(&self, t: &PointSet) -> PointSet {
        let mut out = self.exceptional.clone();
        for c in t {
            for &x in &self.classes[c] {
                out.insert(x);
            }
        }
        out
    }

    /// The partial map `ψ ∘ π` for a map `ψ` out of the quotient.
    pub fn lift(&self, psi: &GeoMap) -> Result<PartialGeoMap, Error> {
        if !psi.domain().ptr_eq(&self.geometry) {
            return Err(Error::DimensionMismatch);
        }
        let images = self
            .class_of
            .iter()
            .map(|c| c.map(|c| psi.apply(c)))
            .collect();
        PartialGeoMap::new(&self.parent, psi.codomain(), images)
    }
}

/// Builds `X/E` and the projection `π`.
pub fn quotient(g: &Geometry, e: &PointSet) -> Result<(QuotientGeometry, PartialGeoMap), Error> {
    if e.universe() != g.n_points() || !g.is_flat(e) {
        return Err(Error::NotAFlat);
    }
    let n = g.n_points();
    let mut class_of: Vec<Option<usize>> = vec![None; n];
    let mut classes: Vec<Vec<usize>> = Vec::new();
    for x in 0..n {
        if e.contains(x) || class_of[x].is_some() {
            continue;
        }
        // x ∨ E minus E is exactly the class of x, by the exchange property.
        let span = g.closure_set(&e.with(x));
        let members: Vec<usize> = span.iter().filter(|&y| !e.contains(y)).collect();
        for &y in &members {
            class_of[y] = Some(classes.len());
        }
        classes.push(members);
    }
    let reps = classes.iter().map(|c| c[0]).collect();
    let raw = class_of.iter().map(|c| c.unwrap_or(usize::MAX)).collect();
    let geometry = g.quotient_backend(e.clone(), reps, raw);
    let q = QuotientGeometry {
        geometry,
        parent: g.clone(),
        exceptional: e.clone(),
        classes,
        class_of,
    };
    let pi = q.projection();
    Ok((q, pi))
}

/// Why a partial map fails to be a partial morphism.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PartialFailure {
    /// `E` is not a flat of the domain.
    ExceptionalNotFlat,
    /// `x1 ∨ E = x2 ∨ E` but `φ(x1) ≠ φ(x2)`.
    ClassInconsistent(usize, usize),
    /// The restriction to `X − E` is not a morphism; the witness uses
    /// domain point ids.
    NotMorphismOffE(MorphismWitness),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PartialReport {
    pub is_partial_morphism: bool,
    pub failure: Option<PartialFailure>,
    /// For projective domains, the verdict of the (b1)/(b2) conditions.
    pub b1_b2: Option<bool>,
}

impl PartialReport {
    /// True unless the two characterizations disagree.
    pub fn consistent(&self) -> bool {
        self.b1_b2.is_none_or(|v| v == self.is_partial_morphism)
    }
}

/// Checks many partial maps sharing a domain, codomain and exceptional set.
pub struct PartialChecker {
    quotient: Option<QuotientGeometry>,
    sub: Option<(Vec<usize>, MorphismChecker)>,
}

impl PartialChecker {
    pub fn new(domain: &Geometry, codomain: &Geometry, e: &PointSet) -> Self {
        let Ok((q, _)) = quotient(domain, e) else {
            return PartialChecker {
                quotient: None,
                sub: None,
            };
        };
        let off = e.complement();
        let sub = domain
            .subgeometry(&off)
            .expect("complement lies in the domain");
        PartialChecker {
            quotient: Some(q),
            sub: Some((off.to_vec(), MorphismChecker::new(&sub, codomain))),
        }
    }

    pub fn check(&self, phi: &PartialGeoMap) -> PartialReport {
        let b1_b2 = phi
            .domain()
            .is_projective()
            .then(|| check_b1_b2(phi).map(|r| r.holds()).unwrap_or(false));
        let failure = self.failure(phi);
        PartialReport {
            is_partial_morphism: failure.is_none(),
            failure,
            b1_b2,
        }
    }

    fn failure(&self, phi: &PartialGeoMap) -> Option<PartialFailure> {
        let (Some(q), Some((off, checker))) = (&self.quotient, &self.sub) else {
            return Some(PartialFailure::ExceptionalNotFlat);
        };
        assert_eq!(
            q.exceptional(),
            phi.exceptional(),
            "checker built for another E"
        );
        for class in q.classes() {
            let y = phi.apply(class[0]);
            if let Some(&x) = class.iter().find(|&&x| phi.apply(x) != y) {
                return Some(PartialFailure::ClassInconsistent(class[0], x));
            }
        }
        let images: Vec<usize> = off.iter().map(|&x| phi.apply(x).unwrap()).collect();
        let report = checker.check(&images);
        report.witness.map(|w| {
            PartialFailure::NotMorphismOffE(MorphismWitness {
                point: off[w.point],
                span: w.span.iter().map(|&i| off[i]).collect(),
            })
        })
    }
}

/// Checks that `E` is a flat, `φ` is constant on the classes of `X − E`
/// and the restriction of `φ` to `X − E` is a morphism.
pub fn is_partial_morphism(phi: &PartialGeoMap) -> PartialReport {
    PartialChecker::new(phi.domain(), phi.codomain(), phi.exceptional()).check(phi)
}

/// `φ = φ̃ ∘ π` with `φ̃` a morphism on `X/E`.
#[derive(Clone, Debug)]
pub struct Factorization {
    pub quotient: QuotientGeometry,
    pub projection: PartialGeoMap,
    pub map: GeoMap,
    /// False when the domain has two-point lines, where the factorization
    /// is not guaranteed and was only attempted on request.
    pub theorem_backed: bool,
}

/// Factors a partial morphism through its quotient. Domains with two-point
/// lines are rejected unless `experimental` is set.
pub fn factor_through_quotient(
    phi: &PartialGeoMap,
    experimental: bool,
) -> Result<Factorization, Error> {
    let dom = phi.domain();
    let short = dom.lines().iter().any(|l| l.len() < 3);
    if short && !experimental {
        return Err(Error::LinesTooShort);
    }
    let report = is_partial_morphism(phi);
    if let Some(f) = report.failure {
        return Err(Error::NotPartialMorphism(format!("{f:?}")));
    }
    let (q, pi) = quotient(dom, phi.exceptional())?;
    let images = (0..q.classes().len())
        .map(|c| phi.apply(q.representative(c)).unwrap())
        .collect();
    let map = GeoMap::new(q.geometry(), phi.codomain(), images)?;
    let verdict = map.is_morphism();
    if !verdict.is_morphism {
        let msg = format!("induced map on the quotient fails: {:?}", verdict.witness);
        return Err(if short {
            Error::NotPartialMorphism(msg)
        } else {
            Error::Disagreement(msg)
        });
    }
    Ok(Factorization {
        quotient: q,
        projection: pi,
        map,
        theorem_backed: !short,
    })
}

/// The canonical isomorphism `P(V)/P(W) → P(V/W)` and its inverse through a
/// linear section.
#[derive(Clone, Debug)]
pub struct QuotientIso {
    pub quotient: QuotientGeometry,
    pub target: Geometry,
    pub forward: GeoMap,
    pub backward: GeoMap,
    pub round_trip: bool,
    pub forward_morphism: bool,
    pub backward_morphism: bool,
}

impl QuotientIso {
    pub fn holds(&self) -> bool {
        self.round_trip && self.forward_morphism && self.backward_morphism
    }
}

/// `V = K^v_dim`, `W` spanned by `w_span`. Coordinates on `V/W` are the
/// non-pivot coordinates of the RREF of `W` after reducing modulo `W`; the
/// section puts them back with zeros at the pivots.
pub fn quotient_projective_iso(
    field: &alloc::sync::Arc<FiniteField>,
    v_dim: usize,
    w_span: &[Vec<Elem>],
) -> Result<QuotientIso, Error> {
    if v_dim == 0 || w_span.iter().any(|w| w.len() != v_dim) {
        return Err(Error::DimensionMismatch);
    }
    let (reduced, pivots) = if w_span.is_empty() {
        (Matrix::zero(field, 0, v_dim), Vec::new())
    } else {
        Matrix::from_rows(field, w_span)?.rref()
    };
    if pivots.len() == v_dim {
        return Err(Error::Precondition("W must be a proper subspace".into()));
    }
    let space = Geometry::projective(field, v_dim - 1);
    let target = Geometry::projective(field, v_dim - pivots.len() - 1);
    let free: Vec<usize> = (0..v_dim).filter(|c| !pivots.contains(c)).collect();
    let e = space.set_of((0..space.n_points()).filter(|&x| {
        let mut v = space.coords(x).unwrap().to_vec();
        reduce(field, &reduced, &pivots, &mut v);
        v.iter().all(|&c| c == 0)
    }));
    let (q, _) = quotient(&space, &e)?;

    let forward_images = (0..q.classes().len())
        .map(|c| {
            let mut v = space.coords(q.representative(c)).unwrap().to_vec();
            reduce(field, &reduced, &pivots, &mut v);
            let tail: Vec<Elem> = free.iter().map(|&i| v[i]).collect();
            target.projective_id(&tail).expect("v is not in W")
        })
        .collect();
    let backward_images = (0..target.n_points())
        .map(|u| {
            let mut v = vec![0; v_dim];
            for (&i, &c) in free.iter().zip(target.coords(u).unwrap()) {
                v[i] = c;
            }
            q.class_of(space.projective_id(&v).unwrap())
                .expect("section avoids W")
        })
        .collect();
    let forward = GeoMap::new(q.geometry(), &target, forward_images)?;
    let backward = GeoMap::new(&target, q.geometry(), backward_images)?;
    let round_trip = (0..q.classes().len()).all(|c| backward.apply(forward.apply(c)) == c)
        && (0..target.n_points()).all(|u| forward.apply(backward.apply(u)) == u);
    let forward_morphism = forward.is_morphism().is_morphism;
    let backward_morphism = backward.is_morphism().is_morphism;
    Ok(QuotientIso {
        quotient: q,
        target,
        forward,
        backward,
        round_trip,
        forward_morphism,
        backward_morphism,
    })
}

// Subtracts the multiples of the RREF rows that clear the pivot coordinates.
pub(crate) fn reduce(field: &FiniteField, rref: &Matrix, pivots: &[usize], v: &mut [Elem]) {
    for (r, &p) in pivots.iter().enumerate() {
        let c = v[p];
        if c != 0 {
            let row = field.scale(c, rref.row(r));
            let next = field.sub_vec(v, &row);
            v.copy_from_slice(&next);
        }
    }
}
