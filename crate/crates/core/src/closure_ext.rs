//! Projective closure of affine spaces, extension of morphisms from an
//! affine space to its projective closure, and fractional semilinear maps.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use crate::affine::SemilinearMap;
use crate::error::Error;
use crate::field::{Elem, FieldMorphism, FiniteField};
use crate::geometry::{Geometry, Kind};
use crate::linalg::Matrix;
use crate::morphism::{GeoMap, PartialGeoMap};
use crate::pointset::PointSet;
use crate::projective::{
    b1_b2_on_lines, check_b1_b2, projectivize_map, recover_semilinear, B1B2Report,
};
use crate::quotient::{quotient_projective_iso, reduce};

fn affine_parts(g: &Geometry) -> Result<(&Arc<FiniteField>, usize), Error> {
    match g.kind() {
        Kind::Affine { field, dim } => Ok((field, dim)),
        _ => Err(Error::InvalidInput("expected an affine space".into())),
    }
}

/// `AG(n,q)` inside `PG(n,q)`: the affine point `x` is `⟨(1, x)⟩` and the
/// direction `⟨v⟩` is the point `⟨(0, v)⟩` of the hyperplane at infinity.
#[derive(Clone, Debug)]
pub struct ProjectiveClosure {
    affine: Geometry,
    projective: Geometry,
    embed: Vec<usize>,
    affine_of: Vec<Option<usize>>,
    infinity: PointSet,
}

impl ProjectiveClosure {
    pub fn affine(&self) -> &Geometry {
        &self.affine
    }

    pub fn projective(&self) -> &Geometry {
        &self.projective
    }

    /// The projective id of an affine point.
    pub fn embed(&self, x: usize) -> usize {
        self.embed[x]
    }

    /// The affine id of a projective point off the hyperplane at infinity.
    pub fn affine_point(&self, p: usize) -> Option<usize> {
        self.affine_of[p]
    }

    /// The hyperplane at infinity `H`.
    pub fn hyperplane(&self) -> &PointSet {
        &self.infinity
    }

    /// The point `⟨(0, v)⟩` for a nonzero direction `v`.
    pub fn direction_point(&self, v: &[Elem]) -> Option<usize> {
        let mut w = vec![0];
        w.extend_from_slice(v);
        self.projective.projective_id(&w)
    }

    /// The inclusion `A → P` as a map of geometries.
    pub fn inclusion(&self) -> GeoMap {
        GeoMap::new(&self.affine, &self.projective, self.embed.clone()).expect("ids are in range")
    }
}

pub fn projective_closure(a: &Geometry) -> Result<ProjectiveClosure, Error> {
    let (field, n) = affine_parts(a)?;
    let projective = Geometry::projective(field, n);
    let embed: Vec<usize> = (0..a.n_points())
        .map(|x| {
            let mut v = vec![1];
            v.extend_from_slice(a.coords(x).unwrap());
            projective.projective_id(&v).unwrap()
        })
        .collect();
    let mut affine_of = vec![None; projective.n_points()];
    for (x, &p) in embed.iter().enumerate() {
        affine_of[p] = Some(x);
    }
    let infinity =
        projective.set_of((0..projective.n_points()).filter(|&p| affine_of[p].is_none()));
    Ok(ProjectiveClosure {
        affine: a.clone(),
        projective,
        embed,
        affine_of,
        infinity,
    })
}

/// The point at infinity of an affine line.
pub fn point_at_infinity(c: &ProjectiveClosure, line: &PointSet) -> Result<usize, Error> {
    let a = c.affine();
    if !a.lines().contains(line) {
        return Err(Error::NotALine);
    }
    let mut it = line.iter();
    let (x, y) = (it.next().unwrap(), it.next().unwrap());
    let field = a.field().unwrap();
    let v = field.sub_vec(a.coords(y).unwrap(), a.coords(x).unwrap());
    Ok(c.direction_point(&v)
        .expect("distinct points give a nonzero direction"))
}

/// `E = K·p0 ⊕ V` with `j(p0 + v) = (1, v)`.
#[derive(Clone, Debug)]
pub struct VectorialExtension {
    affine: Geometry,
    base: usize,
}

impl VectorialExtension {
    pub fn new(a: &Geometry, base: usize) -> Result<Self, Error> {
        affine_parts(a)?;
        if base >= a.n_points() {
            return Err(Error::UnknownPoint(base));
        }
        Ok(VectorialExtension {
            affine: a.clone(),
            base,
        })
    }

    pub fn base(&self) -> usize {
        self.base
    }

    pub fn dim(&self) -> usize {
        affine_parts(&self.affine).unwrap().1 + 1
    }

    pub fn embed(&self, x: usize) -> Vec<Elem> {
        let field = self.affine.field().unwrap();
        let v = field.sub_vec(
            self.affine.coords(x).unwrap(),
            self.affine.coords(self.base).unwrap(),
        );
        let mut out = vec![1];
        out.extend(v);
        out
    }

    /// The linear isomorphism `Φ` with `other.embed = Φ ∘ self.embed`:
    /// `Φ(λ, v) = (λ, v + λ (p0 − p0'))`.
    pub fn transition_to(&self, other: &VectorialExtension) -> Result<Matrix, Error> {
        if !self.affine.same_structure(&other.affine) {
            return Err(Error::DimensionMismatch);
        }
        let field = self.affine.field().unwrap();
        let n = self.dim();
        let shift = field.sub_vec(
            self.affine.coords(self.base).unwrap(),
            self.affine.coords(other.base).unwrap(),
        );
        let mut m = Matrix::identity(field, n);
        for (i, &s) in shift.iter().enumerate() {
            m.set(i + 1, 0, s);
        }
        Ok(m)
    }
}

/// An extension of `φ: A → P'` to a partial map on the projective closure.
#[derive(Clone, Debug)]
pub struct Extension {
    pub map: PartialGeoMap,
    /// Directions on which every line of the parallel family is collapsed.
    pub exceptional: PointSet,
    pub b1_b2: B1B2Report,
    /// No other value at a single point of `H − E` gives a partial
    /// projective morphism.
    pub unique: bool,
}

/// Image lines of a parallel family that do not pass through one point.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NonConcurrence {
    /// The direction point in `H`.
    pub direction: usize,
    /// The affine lines, as domain ids.
    pub affine_lines: Vec<Vec<usize>>,
    /// Their image lines in the codomain.
    pub image_lines: Vec<Vec<usize>>,
}

#[derive(Clone, Debug)]
pub enum ExtensionOutcome {
    Extended(Extension),
    NonConcurrent(NonConcurrence),
    /// The collapsed directions do not form a flat of `H`.
    ExceptionalNotFlat(PointSet),
}

#[derive(Clone, Debug)]
pub struct ExtensionResult {
    pub closure: ProjectiveClosure,
    /// Whether `|K| ≥ 4` or `|K| = 3 = char K'`, under which an extension
    /// always exists and is unique.
    pub hypothesis: bool,
    pub outcome: ExtensionOutcome,
}

impl ExtensionResult {
    pub fn extension(&self) -> Option<&Extension> {
        match &self.outcome {
            ExtensionOutcome::Extended(e) => Some(e),
            _ => None,
        }
    }
}

/// Whether extension to the projective closure is guaranteed for these fields.
pub fn extension_hypothesis(k: &FiniteField, k2: &FiniteField) -> bool {
    k.order() >= 4 || (k.order() == 3 && k2.characteristic() == 3)
}

/// The affine lines grouped by their point at infinity.
fn parallel_families(c: &ProjectiveClosure) -> BTreeMap<usize, Vec<usize>> {
    let a = c.affine();
    let mut families: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    let field = a.field().unwrap();
    for l in 0..a.lines().len() {
        let m = a.line_members(l);
        let v = field.sub_vec(a.coords(m[1]).unwrap(), a.coords(m[0]).unwrap());
        families
            .entry(c.direction_point(&v).unwrap())
            .or_default()
            .push(l);
    }
    families
}

/// Extends a morphism `φ: A → P'` whose image is not in a line to the
/// projective closure of `A`.
///
/// A direction `p` is exceptional when `φ` is constant on every line with
/// point at infinity `p`. Otherwise `p` goes to the common point of the image
/// lines of the family, found by intersecting the first two distinct image
/// lines and checking the rest. The construction runs even when the field
/// hypothesis fails; failures are reported in the outcome.
pub fn extend_to_closure(phi: &GeoMap) -> Result<ExtensionResult, Error> {
    let dom = phi.domain();
    let cod = phi.codomain();
    let (k, _) = affine_parts(dom)?;
    let k2 = match cod.kind() {
        Kind::Projective { field, .. } => field,
        _ => return Err(Error::InvalidInput("expected a projective codomain".into())),
    };
    if let Some(w) = phi.is_morphism().witness {
        return Err(Error::NotAMorphism(format!("{w:?}")));
    }
    if !phi.image_not_in_line() {
        return Err(Error::DegenerateImage);
    }
    let hypothesis = extension_hypothesis(k, k2);
    let closure = projective_closure(dom)?;
    let pg = closure.projective().clone();
    let result = |outcome| {
        Ok(ExtensionResult {
            closure: closure.clone(),
            hypothesis,
            outcome,
        })
    };

    let mut values: Vec<Option<usize>> = vec![None; pg.n_points()];
    for x in 0..dom.n_points() {
        values[closure.embed(x)] = Some(phi.apply(x));
    }
    let mut exceptional = pg.empty_set();
    for (&p, family) in &parallel_families(&closure) {
        let mut affine_lines = Vec::new();
        let mut image_lines: Vec<&PointSet> = Vec::new();
        for &l in family {
            let members = dom.line_members(l);
            let (y0, y1) = (phi.apply(members[0]), phi.apply(members[1]));
            if y0 != y1 {
                affine_lines.push(members.to_vec());
                image_lines.push(cod.line_through(y0, y1));
            }
        }
        if image_lines.is_empty() {
            exceptional.insert(p);
            continue;
        }
        let witness = |idx: &[usize]| {
            ExtensionOutcome::NonConcurrent(NonConcurrence {
                direction: p,
                affine_lines: idx.iter().map(|&i| affine_lines[i].clone()).collect(),
                image_lines: idx.iter().map(|&i| image_lines[i].to_vec()).collect(),
            })
        };
        let Some(second) = (1..image_lines.len()).find(|&i| image_lines[i] != image_lines[0])
        else {
            return result(witness(&[0]));
        };
        let meet = image_lines[0].intersection(image_lines[second]);
        let Some(target) = meet.first().filter(|_| meet.len() == 1) else {
            return result(witness(&[0, second]));
        };
        if let Some(bad) = (0..image_lines.len()).find(|&i| !image_lines[i].contains(target)) {
            return result(witness(&[0, second, bad]));
        }
        values[p] = Some(target);
    }
    if !pg.is_flat(&exceptional) {
        return result(ExtensionOutcome::ExceptionalNotFlat(exceptional));
    }

    let map = PartialGeoMap::new(&pg, cod, values)?;
    let b1_b2 = check_b1_b2(&map)?;
    let unique = b1_b2.holds() && is_unique_extension(&map, closure.hyperplane().to_vec());
    result(ExtensionOutcome::Extended(Extension {
        map,
        exceptional,
        b1_b2,
        unique,
    }))
}

// Tries every other value at each defined point at infinity.
fn is_unique_extension(map: &PartialGeoMap, infinity: Vec<usize>) -> bool {
    let (dom, cod) = (map.domain(), map.codomain());
    for p in infinity {
        let Some(current) = map.apply(p) else {
            continue;
        };
        for y in (0..cod.n_points()).filter(|&y| y != current) {
            let other = map.with_image(p, Some(y)).expect("same exceptional set");
            if b1_b2_on_lines(&other, dom.lines_through(p).iter().copied()).holds() {
                return false;
            }
        }
    }
    true
}

/// `v ↦ (1 + ω(v))⁻¹ Ψ(v)` with `Ψ: V → V'` and `ω: V → K'` semilinear for
/// the same field morphism.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FractionalDecomposition {
    pub psi: SemilinearMap,
    pub omega: SemilinearMap,
}

impl FractionalDecomposition {
    pub fn new(psi: SemilinearMap, omega: SemilinearMap) -> Result<Self, Error> {
        if psi.sigma() != omega.sigma()
            || omega.target_dim() != 1
            || psi.source_dim() != omega.source_dim()
        {
            return Err(Error::DimensionMismatch);
        }
        Ok(FractionalDecomposition { psi, omega })
    }

    pub fn sigma(&self) -> &FieldMorphism {
        self.psi.sigma()
    }
}

/// Evaluates `(1 + ω(v))⁻¹ Ψ(v)`; `PoleHit` carries the code of `v`.
pub fn eval_fractional(d: &FractionalDecomposition, v: &[Elem]) -> Result<Vec<Elem>, Error> {
    let k2 = d.sigma().target();
    let denom = k2.add(1, d.omega.apply(v)[0]);
    let inv = k2
        .inv(denom)
        .ok_or_else(|| Error::PoleHit(d.sigma().source().encode(v) as usize))?;
    Ok(k2.scale(inv, &d.psi.apply(v)))
}

/// The table of a fractional map between affine spaces.
pub fn fractional_map(
    d: &FractionalDecomposition,
    dom: &Geometry,
    cod: &Geometry,
) -> Result<GeoMap, Error> {
    let images = (0..dom.n_points())
        .map(|x| {
            let w = eval_fractional(d, dom.coords(x).unwrap())?;
            cod.affine_id(&w).ok_or(Error::DimensionMismatch)
        })
        .collect::<Result<Vec<_>, _>>()?;
    GeoMap::new(dom, cod, images)
}

/// Builds the full table and runs the morphism check.
pub fn is_fractional_morphism(
    d: &FractionalDecomposition,
    dom: &Geometry,
    cod: &Geometry,
) -> Result<bool, Error> {
    Ok(fractional_map(d, dom, cod)?.is_morphism().is_morphism)
}

/// Writes a morphism `φ: V → V'` of affine spaces with `φ(0) = 0` and image
/// not in a line as a fractional semilinear map.
///
/// `φ` is extended to the projective closures, the extension is induced by
/// a semilinear `Φ` scaled so that `Φ(1, 0) = (1, 0)`, and then
/// `ω(v) = Φ(0, v)_0` and `Ψ(v) = Φ(0, v) − ω(v) (1, 0)`.
pub fn fractional_decompose(phi: &GeoMap) -> Result<FractionalDecomposition, Error> {
    let (dom, cod) = (phi.domain(), phi.codomain());
    let (k, n) = affine_parts(dom)?;
    let (k2, n2) = affine_parts(cod)?;
    if !extension_hypothesis(k, k2) {
        return Err(Error::HypothesisViolated(format!(
            "needs |K| >= 4 or |K| = 3 = char K'; got |K| = {}, char K' = {}",
            k.order(),
            k2.characteristic()
        )));
    }
    let origin = dom.affine_id(&vec![0; n]).unwrap();
    if phi.apply(origin) != cod.affine_id(&vec![0; n2]).unwrap() {
        return Err(Error::Precondition("the map must send 0 to 0".into()));
    }
    let target = projective_closure(cod)?;
    let into_closure = phi.then(&target.inclusion())?;
    let result = extend_to_closure(&into_closure)?;
    let Some(ext) = result.extension().filter(|e| e.b1_b2.holds()) else {
        return Err(Error::DecompositionFailed(format!(
            "no partial projective extension: {:?}",
            result.outcome
        )));
    };
    let big = recover_global(&ext.map, k, n + 1)?;

    // Scale so that the origin goes to (1, 0, ..., 0).
    let lead = big.matrix().get(0, 0);
    if lead == 0 || big.matrix().column(0)[1..].iter().any(|&c| c != 0) {
        return Err(Error::DecompositionFailed(
            "the origin is not sent to the origin".into(),
        ));
    }
    let big = big.scale(k2.inv(lead).unwrap());
    let m = big.matrix();
    let sigma = big.sigma().clone();
    let omega_row: Vec<Elem> = (1..=n).map(|c| m.get(0, c)).collect();
    let psi_rows: Vec<Vec<Elem>> = (1..=n2)
        .map(|r| (1..=n).map(|c| m.get(r, c)).collect())
        .collect();
    let omega = SemilinearMap::new(Matrix::from_rows(k2, &[omega_row])?, sigma.clone())?;
    let psi = SemilinearMap::new(Matrix::from_rows(k2, &psi_rows)?, sigma)?;
    let d = FractionalDecomposition::new(psi, omega)?;
    for x in 0..dom.n_points() {
        let w = eval_fractional(&d, dom.coords(x).unwrap())?;
        if cod.affine_id(&w) != Some(phi.apply(x)) {
            return Err(Error::DecompositionFailed(format!("mismatch at point {x}")));
        }
    }
    Ok(d)
}

/// A semilinear `Φ: K^width → K'^m` inducing a partial projective morphism
/// with image not in a line. With a nonempty exceptional set the map is
/// recovered on `P(V/W)` and composed with the quotient coordinates.
fn recover_global(
    map: &PartialGeoMap,
    k: &Arc<FiniteField>,
    width: usize,
) -> Result<SemilinearMap, Error> {
    let pg = map.domain();
    if map.exceptional().is_empty() {
        return recover_semilinear(&map.to_total().unwrap());
    }
    let w_span: Vec<Vec<Elem>> = map
        .exceptional()
        .iter()
        .map(|p| pg.coords(p).unwrap().to_vec())
        .collect();
    let iso = quotient_projective_iso(k, width, &w_span)?;
    let images = (0..iso.target.n_points())
        .map(|u| {
            map.apply(iso.quotient.representative(iso.backward.apply(u)))
                .unwrap()
        })
        .collect();
    let reduced_map = GeoMap::new(&iso.target, map.codomain(), images)?;
    let bar = recover_semilinear(&reduced_map)?;

    // Coordinates on V/W: reduce modulo W and keep the non-pivot entries.
    let (rref, pivots) = Matrix::from_rows(k, &w_span)?.rref();
    let rref = Matrix::from_rows(k, &rref.to_rows()[..pivots.len()])?;
    let free: Vec<usize> = (0..width).filter(|c| !pivots.contains(c)).collect();
    let columns: Vec<Vec<Elem>> = (0..width)
        .map(|i| {
            let mut e = vec![0; width];
            e[i] = 1;
            reduce(k, &rref, &pivots, &mut e);
            free.iter().map(|&j| e[j]).collect()
        })
        .collect();
    let r = Matrix::from_columns(k, &columns)?;
    let m = bar.matrix().mul(&r.map_entries(bar.sigma()))?;
    let phi = SemilinearMap::new(m, bar.sigma().clone())?;
    let check = projectivize_map(&phi, pg, map.codomain())?;
    if check.images() != map.images() {
        return Err(Error::DecompositionFailed(
            "recovered map disagrees with the extension".into(),
        ));
    }
    Ok(phi)
}
