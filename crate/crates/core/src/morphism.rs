//! Maps between geometries and the criteria deciding whether they are morphisms.
//!
//! A map is a morphism when preimages of flats are flats. Equivalent tests:
//! closures of finite sets map into closures of their images; on geometries
//! generated by lines, every line maps injectively or constantly onto
//! collinear points; on geometries generated by lines and planes, the same
//! plus every plane maps into the closure of the images of any of its bases.

use alloc::boxed::Box;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use once_cell::race::OnceBox;

use crate::error::Error;
use crate::geometry::{Geometry, Kind};
use crate::pointset::PointSet;

#[derive(Clone)]
pub struct GeoMap {
    domain: Geometry,
    codomain: Geometry,
    images: Vec<usize>,
}

impl fmt::Debug for GeoMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{:?} -> {:?} {:?}",
            self.domain, self.codomain, self.images
        )
    }
}

impl PartialEq for GeoMap {
    fn eq(&self, other: &Self) -> bool {
        self.images == other.images
            && self.domain.same_structure(&other.domain)
            && self.codomain.same_structure(&other.codomain)
    }
}

impl GeoMap {
    pub fn new(domain: &Geometry, codomain: &Geometry, images: Vec<usize>) -> Result<Self, Error> {
        if images.len() != domain.n_points() {
            return Err(Error::DimensionMismatch);
        }
        if let Some(&bad) = images.iter().find(|&&y| y >= codomain.n_points()) {
            return Err(Error::UnknownPoint(bad));
        }
        Ok(GeoMap {
            domain: domain.clone(),
            codomain: codomain.clone(),
            images,
        })
    }

    pub fn identity(g: &Geometry) -> Self {
        GeoMap {
            domain: g.clone(),
            codomain: g.clone(),
            images: (0..g.n_points()).collect(),
        }
    }

    pub fn constant(domain: &Geometry, codomain: &Geometry, p: usize) -> Result<Self, Error> {
        Self::new(domain, codomain, vec![p; domain.n_points()])
    }

    /// The inclusion of a subgeometry into its parent.
    pub fn inclusion(sub: &Geometry) -> Result<Self, Error> {
        match sub.kind() {
            Kind::Subgeometry { parent, points } => Self::new(sub, parent, points.to_vec()),
            _ => Err(Error::InvalidInput("not a subgeometry".into())),
        }
    }

    pub fn domain(&self) -> &Geometry {
        &self.domain
    }

    pub fn codomain(&self) -> &Geometry {
        &self.codomain
    }

    pub fn images(&self) -> &[usize] {
        &self.images
    }

    #[inline]
    pub fn apply(&self, x: usize) -> usize {
        self.images[x]
    }

    pub fn image(&self) -> PointSet {
        self.codomain.set_of(self.images.iter().copied())
    }

    pub fn image_of(&self, a: &PointSet) -> PointSet {
        self.codomain.set_of(a.iter().map(|x| self.images[x]))
    }

    pub fn preimage(&self, b: &PointSet) -> PointSet {
        self.domain
            .set_of((0..self.images.len()).filter(|&x| b.contains(self.images[x])))
    }

    pub fn is_injective(&self) -> bool {
        self.image().len() == self.images.len()
    }

    pub fn is_surjective(&self) -> bool {
        self.image().is_full()
    }

    pub fn is_bijective(&self) -> bool {
        self.is_injective() && self.is_surjective()
    }

    pub fn is_constant(&self) -> bool {
        self.images.windows(2).all(|w| w[0] == w[1])
    }

    /// Dimension of the closure of the image.
    pub fn image_dimension(&self) -> isize {
        self.codomain.rank(&self.image().to_vec()) as isize - 1
    }

    /// Whether the image spans at least a plane.
    pub fn image_not_in_line(&self) -> bool {
        self.image_dimension() >= 2
    }

    pub fn inverse(&self) -> Option<GeoMap> {
        if !self.is_bijective() {
            return None;
        }
        let mut inv = vec![0; self.images.len()];
        for (x, &y) in self.images.iter().enumerate() {
            inv[y] = x;
        }
        Some(GeoMap {
            domain: self.codomain.clone(),
            codomain: self.domain.clone(),
            images: inv,
        })
    }

    /// `other ∘ self`.
    pub fn then(&self, other: &GeoMap) -> Result<GeoMap, Error> {
        if !self.codomain.same_structure(&other.domain) {
            return Err(Error::DimensionMismatch);
        }
        Ok(GeoMap {
            domain: self.domain.clone(),
            codomain: other.codomain.clone(),
            images: self.images.iter().map(|&y| other.images[y]).collect(),
        })
    }

    pub fn is_morphism(&self) -> MorphismReport {
        MorphismChecker::new(&self.domain, &self.codomain).check(&self.images)
    }

    /// Verdicts of every applicable criterion, for cross-checking.
    pub fn morphism_criteria(&self) -> CriteriaVerdicts {
        MorphismChecker::new(&self.domain, &self.codomain).all_criteria(&self.images)
    }

    fn require_morphism(&self) -> Result<(), Error> {
        let r = self.is_morphism();
        if r.is_morphism {
            Ok(())
        } else {
            Err(Error::NotAMorphism(format!("{:?}", r.witness)))
        }
    }

    /// A bijective morphism whose inverse is a morphism.
    pub fn is_isomorphism(&self) -> Result<bool, Error> {
        self.require_morphism()?;
        Ok(self
            .inverse()
            .is_some_and(|inv| inv.is_morphism().is_morphism))
    }

    /// An isomorphism onto the subgeometry on its image.
    pub fn is_embedding(&self) -> Result<bool, Error> {
        self.require_morphism()?;
        if !self.is_injective() {
            return Ok(false);
        }
        let image = self.image();
        let sub = self.codomain.subgeometry(&image)?;
        let mut index = vec![usize::MAX; self.codomain.n_points()];
        for (i, p) in image.iter().enumerate() {
            index[p] = i;
        }
        let onto = GeoMap::new(
            &self.domain,
            &sub,
            self.images.iter().map(|&y| index[y]).collect(),
        )?;
        onto.is_isomorphism()
    }

    /// A bijection carrying lines onto lines.
    pub fn is_collineation(&self) -> Result<bool, Error> {
        self.require_morphism()?;
        if !self.is_bijective() || self.domain.lines().len() != self.codomain.lines().len() {
            return Ok(false);
        }
        Ok(self.domain.lines().iter().all(|l| {
            self.codomain
                .lines()
                .binary_search(&self.image_of(l))
                .is_ok()
        }))
    }
}

/// Dimension facts about a surjective morphism: the domain is at least as
/// large, and equal finite dimensions force an isomorphism.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SurjectionReport {
    pub domain_dim: isize,
    pub codomain_dim: isize,
    pub dimension_inequality: bool,
    /// Present when the dimensions are equal.
    pub isomorphism: Option<bool>,
}

impl SurjectionReport {
    pub fn holds(&self) -> bool {
        self.dimension_inequality && self.isomorphism != Some(false)
    }
}

pub fn check_surjective_dimension(phi: &GeoMap) -> Result<SurjectionReport, Error> {
    if !phi.is_surjective() {
        return Err(Error::NotSurjective);
    }
    phi.require_morphism()?;
    let (d, d2) = (phi.domain.dimension(), phi.codomain.dimension());
    let isomorphism = if d == d2 {
        Some(phi.is_isomorphism()?)
    } else {
        None
    };
    Ok(SurjectionReport {
        domain_dim: d,
        codomain_dim: d2,
        dimension_inequality: d >= d2,
        isomorphism,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Criterion {
    /// Preimages of flats are flats.
    Preimage,
    /// `φ(cl A) ⊆ cl φ(A)` for every independent finite `A`.
    FiniteClosure,
    /// Lines map injectively or constantly onto collinear points.
    CollinearTriples,
    /// The line condition plus planes mapping into the span of any basis image.
    CoplanarQuadruples,
}

impl Criterion {
    pub fn name(self) -> &'static str {
        match self {
            Criterion::Preimage => "preimage",
            Criterion::FiniteClosure => "finite-closure",
            Criterion::CollinearTriples => "collinear-triples",
            Criterion::CoplanarQuadruples => "coplanar-quadruples",
        }
    }
}

/// Points `x0, x1, ..., xr` with `x0 ∈ x1 ∨ ... ∨ xr` whose images violate
/// the same relation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MorphismWitness {
    pub point: usize,
    pub span: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MorphismReport {
    pub is_morphism: bool,
    pub criterion: Criterion,
    pub witness: Option<MorphismWitness>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CriteriaVerdicts {
    pub preimage: bool,
    pub finite_closure: bool,
    pub collinear: Option<bool>,
    pub coplanar: Option<bool>,
}

impl CriteriaVerdicts {
    pub fn agree(&self) -> bool {
        self.finite_closure == self.preimage
            && self.collinear.is_none_or(|v| v == self.preimage)
            && self.coplanar.is_none_or(|v| v == self.preimage)
    }
}

/// Precomputed domain and codomain data for testing many maps between the
/// same two geometries.
pub struct MorphismChecker {
    domain: Geometry,
    codomain: Geometry,
    independent: OnceBox<Vec<(Vec<usize>, Vec<usize>)>>,
}

impl MorphismChecker {
    pub fn new(domain: &Geometry, codomain: &Geometry) -> Self {
        MorphismChecker {
            domain: domain.clone(),
            codomain: codomain.clone(),
            independent: OnceBox::new(),
        }
    }

    pub fn domain(&self) -> &Geometry {
        &self.domain
    }

    pub fn codomain(&self) -> &Geometry {
        &self.codomain
    }

    /// Independent sets of size at least two, each with the points of its
    /// closure outside the set.
    fn independent_sets(&self) -> &[(Vec<usize>, Vec<usize>)] {
        self.independent.get_or_init(|| {
            let g = &self.domain;
            let mut out = Vec::new();
            let mut stack: Vec<Vec<usize>> = (0..g.n_points()).map(|p| vec![p]).collect();
            while let Some(set) = stack.pop() {
                if set.len() >= 2 {
                    let cl = g.closure_ids(&set);
                    let rest = cl.iter().filter(|p| !set.contains(p)).collect();
                    out.push((set.clone(), rest));
                }
                let last = *set.last().unwrap();
                for p in last + 1..g.n_points() {
                    if !g.in_closure(&set, p) {
                        let mut next = set.clone();
                        next.push(p);
                        stack.push(next);
                    }
                }
            }
            out.sort();
            Box::new(out)
        })
    }

    /// The default verdict: the line criterion when the domain is generated
    /// by lines, otherwise preimages of flats.
    pub fn check(&self, images: &[usize]) -> MorphismReport {
        if self.domain.generated_by_lines() {
            self.collinear(images)
        } else {
            self.preimage(images)
        }
    }

    pub fn is_morphism(&self, images: &[usize]) -> bool {
        self.check(images).is_morphism
    }

    pub fn all_criteria(&self, images: &[usize]) -> CriteriaVerdicts {
        CriteriaVerdicts {
            preimage: self.preimage(images).is_morphism,
            finite_closure: self.finite_closure(images).is_morphism,
            collinear: self
                .domain
                .generated_by_lines()
                .then(|| self.collinear(images).is_morphism),
            coplanar: self
                .domain
                .generated_by_lines_and_planes()
                .then(|| self.coplanar(images).is_morphism),
        }
    }

    fn report(criterion: Criterion, witness: Option<MorphismWitness>) -> MorphismReport {
        MorphismReport {
            is_morphism: witness.is_none(),
            criterion,
            witness,
        }
    }

    pub fn preimage(&self, images: &[usize]) -> MorphismReport {
        let dom = &self.domain;
        let flats = dom.flats();
        for f in self.codomain.flats() {
            let pre = dom.set_of((0..images.len()).filter(|&x| f.contains(images[x])));
            if flats.binary_search(&pre).is_err() {
                let basis = dom.basis_of(&pre);
                let cl = dom.closure_ids(&basis);
                let x0 = cl
                    .iter()
                    .find(|&x| !pre.contains(x))
                    .expect("preimage is not closed");
                return Self::report(
                    Criterion::Preimage,
                    Some(MorphismWitness {
                        point: x0,
                        span: basis,
                    }),
                );
            }
        }
        Self::report(Criterion::Preimage, None)
    }

    pub fn finite_closure(&self, images: &[usize]) -> MorphismReport {
        let w = self.independent_violation(images, usize::MAX);
        Self::report(Criterion::FiniteClosure, w)
    }

    // Independent sets suffice: any finite A contains a basis B of its
    // closure, and cl φ(B) ⊆ cl φ(A).
    fn independent_violation(&self, images: &[usize], max_len: usize) -> Option<MorphismWitness> {
        let cod = &self.codomain;
        let mut distinct: Vec<usize> = images.to_vec();
        distinct.sort_unstable();
        distinct.dedup();
        let full_rank = cod.rank(&distinct);
        let mut img = Vec::new();
        for (set, rest) in self.independent_sets() {
            if set.len() > max_len {
                continue;
            }
            img.clear();
            img.extend(set.iter().map(|&x| images[x]));
            if cod.rank(&img) == full_rank {
                continue;
            }
            if let Some(&x0) = rest.iter().find(|&&x| !cod.in_closure(&img, images[x])) {
                return Some(MorphismWitness {
                    point: x0,
                    span: set.clone(),
                });
            }
        }
        None
    }

    /// Line criterion; only decisive when the domain is generated by lines.
    pub fn collinear(&self, images: &[usize]) -> MorphismReport {
        Self::report(Criterion::CollinearTriples, self.line_violation(images))
    }

    fn line_violation(&self, images: &[usize]) -> Option<MorphismWitness> {
        let dom = &self.domain;
        for l in 0..dom.lines().len() {
            let m = dom.line_members(l);
            let (a, b) = (m[0], m[1]);
            let (ia, ib) = (images[a], images[b]);
            let bad = if ia == ib {
                // Constant on the line, or a third point breaks it.
                m[2..]
                    .iter()
                    .find(|&&x| images[x] != ia)
                    .map(|&x| (x, a, b))
            } else {
                let mut seen = vec![ia, ib];
                m[2..].iter().find_map(|&x| {
                    let ix = images[x];
                    if let Some(pos) = seen.iter().position(|&s| s == ix) {
                        // Two points of the line share an image: pick a third
                        // point with a different image.
                        let twin = m[pos];
                        let other = if images[a] != ix { a } else { b };
                        Some((other, twin, x))
                    } else if !self.codomain.in_closure(&[ia, ib], ix) {
                        Some((x, a, b))
                    } else {
                        seen.push(ix);
                        None
                    }
                })
            };
            if let Some((x0, x1, x2)) = bad {
                return Some(MorphismWitness {
                    point: x0,
                    span: vec![x1, x2],
                });
            }
        }
        None
    }

    /// Line criterion plus every independent triple; only decisive when the
    /// domain is generated by lines and planes.
    pub fn coplanar(&self, images: &[usize]) -> MorphismReport {
        let w = self
            .line_violation(images)
            .or_else(|| self.independent_violation(images, 3));
        Self::report(Criterion::CoplanarQuadruples, w)
    }
}

/// A map defined off an exceptional set `E`.
#[derive(Clone)]
pub struct PartialGeoMap {
    domain: Geometry,
    codomain: Geometry,
    exceptional: PointSet,
    images: Vec<Option<usize>>,
}

impl fmt::Debug for PartialGeoMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{:?} -> {:?} off {:?}: {:?}",
            self.domain, self.codomain, self.exceptional, self.images
        )
    }
}

impl PartialEq for PartialGeoMap {
    fn eq(&self, other: &Self) -> bool {
        self.images == other.images
            && self.domain.same_structure(&other.domain)
            && self.codomain.same_structure(&other.codomain)
    }
}

impl PartialGeoMap {
    /// `images[x]` must be `None` exactly for the points of `exceptional`.
    pub fn new(
        domain: &Geometry,
        codomain: &Geometry,
        images: Vec<Option<usize>>,
    ) -> Result<Self, Error> {
        if images.len() != domain.n_points() {
            return Err(Error::DimensionMismatch);
        }
        if let Some(bad) = images.iter().flatten().find(|&&y| y >= codomain.n_points()) {
            return Err(Error::UnknownPoint(*bad));
        }
        let exceptional = domain.set_of((0..images.len()).filter(|&x| images[x].is_none()));
        Ok(PartialGeoMap {
            domain: domain.clone(),
            codomain: codomain.clone(),
            exceptional,
            images,
        })
    }

    pub fn from_total(phi: &GeoMap) -> Self {
        PartialGeoMap {
            domain: phi.domain.clone(),
            codomain: phi.codomain.clone(),
            exceptional: phi.domain.empty_set(),
            images: phi.images.iter().map(|&y| Some(y)).collect(),
        }
    }

    pub fn domain(&self) -> &Geometry {
        &self.domain
    }

    pub fn codomain(&self) -> &Geometry {
        &self.codomain
    }

    pub fn exceptional(&self) -> &PointSet {
        &self.exceptional
    }

    pub fn images(&self) -> &[Option<usize>] {
        &self.images
    }

    pub fn apply(&self, x: usize) -> Option<usize> {
        self.images[x]
    }

    pub fn with_image(&self, x: usize, y: Option<usize>) -> Result<Self, Error> {
        let mut images = self.images.clone();
        images[x] = y;
        Self::new(&self.domain, &self.codomain, images)
    }

    /// The total map when `E` is empty.
    pub fn to_total(&self) -> Option<GeoMap> {
        let images: Option<Vec<usize>> = self.images.iter().copied().collect();
        Some(GeoMap {
            domain: self.domain.clone(),
            codomain: self.codomain.clone(),
            images: images?,
        })
    }

    /// The restriction to the subgeometry on the complement of `E`.
    pub fn restriction(&self) -> Result<GeoMap, Error> {
        let sub = self.domain.subgeometry(&self.exceptional.complement())?;
        let images = self.images.iter().flatten().copied().collect();
        GeoMap::new(&sub, &self.codomain, images)
    }

    pub fn image(&self) -> PointSet {
        self.codomain.set_of(self.images.iter().flatten().copied())
    }
}

impl fmt::Display for GeoMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.images.iter().map(|y| format!("{y}")).collect();
        write!(f, "[{}]", parts.join(","))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::FiniteField;

    #[test]
    fn identity_and_constants_are_morphisms() {
        let f2 = FiniteField::new(2, 1).unwrap();
        let g = Geometry::projective(&f2, 2);
        assert!(GeoMap::identity(&g).is_morphism().is_morphism);
        for p in 0..7 {
            let c = GeoMap::constant(&g, &g, p).unwrap();
            let v = c.morphism_criteria();
            assert!(v.preimage && v.agree());
        }
    }

    #[test]
    fn squaring_first_coordinate_is_not_a_morphism() {
        let f3 = FiniteField::new(3, 1).unwrap();
        let g = Geometry::affine(&f3, 2);
        let images = (0..9)
            .map(|id| {
                let v = g.coords(id).unwrap();
                g.affine_id(&[f3.mul(v[0], v[0]), v[1]]).unwrap()
            })
            .collect();
        let phi = GeoMap::new(&g, &g, images).unwrap();
        let r = phi.is_morphism();
        assert!(!r.is_morphism);
        let w = r.witness.unwrap();
        // The tuple lies on a line of the domain and its images break the line condition.
        assert!(g.in_closure(&w.span, w.point));
        let imgs: Vec<usize> = w.span.iter().map(|&x| phi.apply(x)).collect();
        assert!(!g.in_closure(&imgs, phi.apply(w.point)));
        let v = phi.morphism_criteria();
        assert!(!v.preimage && v.agree());
    }

    #[test]
    fn truncation_identity_is_bijective_but_not_iso() {
        let f2 = FiniteField::new(2, 1).unwrap();
        let g = Geometry::projective(&f2, 3);
        let t = g.truncate(2).unwrap();
        let id = GeoMap::new(&g, &t, (0..15).collect()).unwrap();
        assert!(id.is_morphism().is_morphism);
        assert!(id.is_bijective());
        assert!(!id.is_isomorphism().unwrap());
    }
}
