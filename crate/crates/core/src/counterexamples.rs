//! Morphisms from small affine spaces that do not extend to the projective
//! closure, and the characteristic-3 computation behind the extension in
//! the plane of order 3.

use alloc::format;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use crate::closure_ext::{extend_to_closure, ExtensionOutcome, ExtensionResult};
use crate::error::Error;
use crate::field::{field_morphisms, Elem, FiniteField};
use crate::geometry::Geometry;
use crate::linalg::Matrix;
use crate::morphism::GeoMap;

/// Cross product: the line through two points of a projective plane, or the
/// point on two lines.
pub fn cross(f: &FiniteField, a: &[Elem], b: &[Elem]) -> Vec<Elem> {
    let m = |i: usize, j: usize| f.sub(f.mul(a[i], b[j]), f.mul(a[j], b[i]));
    vec![m(1, 2), m(2, 0), m(0, 1)]
}

/// The points of the conic `x1² = x2·x3` in `PG(2,q)`, as point ids.
pub fn conic_points(plane: &Geometry) -> Vec<usize> {
    let f = plane.field().expect("projective plane");
    (0..plane.n_points())
        .filter(|&p| {
            let v = plane.coords(p).unwrap();
            f.mul(v[0], v[0]) == f.mul(v[1], v[2])
        })
        .collect()
}

/// An injective morphism `AG(3,2) → PG(2,q)` onto eight conic points whose
/// extension to the projective closure fails.
#[derive(Clone, Debug)]
pub struct OctagonResult {
    pub map: GeoMap,
    /// The images of the parallel lines `p1p2`, `p3p4`, `p5p6`, as point ids
    /// of the codomain; they have no common point.
    pub sides: Vec<Vec<usize>>,
    pub extension: ExtensionResult,
}

fn next_permutation(v: &mut [usize]) -> bool {
    let Some(i) = (1..v.len()).rev().find(|&i| v[i - 1] < v[i]) else {
        return false;
    };
    let j = (i..v.len()).rev().find(|&j| v[j] > v[i - 1]).unwrap();
    v.swap(i - 1, j);
    v[i..].reverse();
    true
}

pub fn counterexample_octagon(q: u32) -> Result<OctagonResult, Error> {
    if q < 7 {
        return Err(Error::Precondition(format!(
            "the conic over GF({q}) has {} < 8 points",
            q + 1
        )));
    }
    let k = FiniteField::new(2, 1)?;
    let k2 = FiniteField::parse(&format!("{q}"))?;
    let cube = Geometry::affine(&k, 3);
    let plane = Geometry::projective(&k2, 2);
    let conic = conic_points(&plane);
    let octagon = &conic[..8];
    // Ids 2i and 2i+1 of the cube differ in the last coordinate, so the
    // lines {0,1}, {2,3}, {4,5} are parallel.
    let mut order: Vec<usize> = (0..8).collect();
    loop {
        let img: Vec<usize> = order.iter().map(|&i| octagon[i]).collect();
        let sides: Vec<&crate::pointset::PointSet> = (0..3)
            .map(|s| plane.line_through(img[2 * s], img[2 * s + 1]))
            .collect();
        let common = sides[0].intersection(sides[1]).intersection(sides[2]);
        if common.is_empty() {
            let map = GeoMap::new(&cube, &plane, img)?;
            if !map.is_morphism().is_morphism {
                return Err(Error::Disagreement(
                    "eight conic points failed the morphism check".into(),
                ));
            }
            let extension = extend_to_closure(&map)?;
            if extension.extension().is_some() {
                return Err(Error::Disagreement("the octagon map extended".into()));
            }
            return Ok(OctagonResult {
                map,
                sides: sides.iter().map(|s| s.to_vec()).collect(),
                extension,
            });
        }
        if !next_permutation(&mut order) {
            return Err(Error::SelectionFailed);
        }
    }
}

/// Nine points of `PG(2,q)` forming `AG(2,3)`: every line through two of
/// them contains a third.
#[derive(Clone, Debug)]
pub struct HesseResult {
    /// `embedding.apply(3x + y)` is the image of the affine point `(x, y)`.
    pub embedding: GeoMap,
    pub is_embedding: bool,
    /// No field morphism `GF(3) → GF(q)` exists.
    pub no_field_morphism: bool,
    pub extension: ExtensionResult,
}

fn third(a: usize, b: usize) -> usize {
    let (x, y) = ((6 - a / 3 - b / 3) % 3, (6 - a % 3 - b % 3) % 3);
    3 * x + y
}

// Completes the configuration from five images by intersecting lines
// through known pairs.
fn complete_hesse(f: &FiniteField, mut known: Vec<Option<Vec<Elem>>>) -> Option<Vec<Vec<Elem>>> {
    while known.iter().any(Option::is_none) {
        let mut progress = false;
        for z in 0..9 {
            if known[z].is_some() {
                continue;
            }
            let mut lines: Vec<Vec<Elem>> = Vec::new();
            for a in (0..9).filter(|&a| a != z) {
                let b = third(z, a);
                if a < b {
                    if let (Some(u), Some(v)) = (&known[a], &known[b]) {
                        let l = f.normalize(&cross(f, u, v))?;
                        if !lines.contains(&l) {
                            lines.push(l);
                        }
                    }
                }
            }
            if lines.len() >= 2 {
                known[z] = Some(f.normalize(&cross(f, &lines[0], &lines[1]))?);
                progress = true;
            }
        }
        if !progress {
            return None;
        }
    }
    Some(known.into_iter().map(Option::unwrap).collect())
}

/// Searches `PG(2,q)` for the configuration with `(0,0), (1,0), (0,1), (1,1)`
/// on the standard frame. Every configuration can be moved there, so an
/// empty search is a proof of absence.
pub fn counterexample_hesse(q: u32) -> Result<HesseResult, Error> {
    let k2 = FiniteField::parse(&format!("{q}"))?;
    if k2.characteristic() == 3 {
        return Err(Error::Precondition(
            "the codomain field must not have characteristic 3".into(),
        ));
    }
    let k = FiniteField::new(3, 1)?;
    let plane3 = Geometry::affine(&k, 2);
    let plane = Geometry::projective(&k2, 2);
    for t in 1..k2.order() {
        let mut known: Vec<Option<Vec<Elem>>> = vec![None; 9];
        known[0] = Some(vec![1, 0, 0]);
        known[3] = Some(vec![0, 1, 0]);
        known[1] = Some(vec![0, 0, 1]);
        known[4] = Some(vec![1, 1, 1]);
        known[6] = Some(vec![1, t, 0]);
        let Some(points) = complete_hesse(&k2, known) else {
            continue;
        };
        let ids: Vec<usize> = points
            .iter()
            .map(|v| plane.projective_id(v).unwrap())
            .collect();
        let map = GeoMap::new(&plane3, &plane, ids)?;
        if !map.is_injective() || !map.is_morphism().is_morphism {
            continue;
        }
        let is_embedding = map.is_embedding()?;
        let extension = extend_to_closure(&map)?;
        return Ok(HesseResult {
            embedding: map,
            is_embedding,
            no_field_morphism: field_morphisms(&k, &k2).is_empty(),
            extension,
        });
    }
    Err(Error::NotFound)
}

/// The matrix sending `e_0, e_1, e_2, (1,1,1)` to multiples of the four
/// given points in general position.
pub fn frame_matrix(f: &Arc<FiniteField>, frame: &[Vec<Elem>]) -> Result<Matrix, Error> {
    let m = Matrix::from_columns(f, &frame[..3])?;
    if !m.is_invertible() {
        return Err(Error::Precondition(
            "frame points are not in general position".into(),
        ));
    }
    let (c, _) = m.solve(&frame[3]).ok_or(Error::Precondition(
        "frame points are not in general position".into(),
    ))?;
    if c.contains(&0) {
        return Err(Error::Precondition(
            "frame points are not in general position".into(),
        ));
    }
    let cols: Vec<Vec<Elem>> = (0..3).map(|i| f.scale(c[i], &frame[i])).collect();
    Matrix::from_columns(f, &cols)
}

/// Coordinates of an embedded `AG(2,3)` relative to the frame on the square
/// `(0,0) ↦ (1,0,0)`, `(2,0) ↦ (0,0,1)`, `(2,2) ↦ (0,1,0)`, `(0,2) ↦ (1,1,1)`.
/// The rhombus vertices are written `(1,0) ↦ (1,0,a)`, `(2,1) ↦ (0,1,b)`,
/// `(1,2) ↦ (1,1+c,1)` and `(0,1) ↦ (1+d,1,1)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RhombusReport {
    pub a: Option<Elem>,
    pub b: Option<Elem>,
    pub c: Option<Elem>,
    pub d: Option<Elem>,
    /// Common point of the images of the three lines with direction `(1,0)`.
    pub concurrency: Option<Vec<Elem>>,
    pub center: Vec<Elem>,
    /// Normalized frame coordinates of all nine points, by affine id.
    pub coords: Vec<Vec<Elem>>,
}

/// `images[3x + y]` is a vector for the image of the affine point `(x, y)`.
pub fn rhombus_coordinates(
    f: &Arc<FiniteField>,
    images: &[Vec<Elem>],
) -> Result<RhombusReport, Error> {
    if images.len() != 9 || images.iter().any(|v| v.len() != 3) {
        return Err(Error::DimensionMismatch);
    }
    let id = |x: usize, y: usize| 3 * x + y;
    let frame = [
        images[id(0, 0)].clone(),
        images[id(2, 2)].clone(),
        images[id(2, 0)].clone(),
        images[id(0, 2)].clone(),
    ];
    let t = frame_matrix(f, &frame)?.inverse()?;
    let coords: Vec<Vec<Elem>> = images
        .iter()
        .map(|v| f.normalize(&t.mul_vec(v)).ok_or(Error::ZeroMap))
        .collect::<Result<_, _>>()?;
    let v = |x, y| &coords[id(x, y)];
    let (r1, r2, r3, r4) = (v(1, 0), v(2, 1), v(1, 2), v(0, 1));
    let a = (r1[1] == 0 && r1[0] != 0).then(|| f.div(r1[2], r1[0]).unwrap());
    let b = (r2[0] == 0 && r2[1] != 0).then(|| f.div(r2[2], r2[1]).unwrap());
    let c = (r3[0] == r3[2] && r3[0] != 0).then(|| f.sub(f.div(r3[1], r3[0]).unwrap(), 1));
    let d = (r4[1] == r4[2] && r4[1] != 0).then(|| f.sub(f.div(r4[0], r4[1]).unwrap(), 1));
    let lines: Vec<Vec<Elem>> = (0..3).map(|y| cross(f, v(0, y), v(1, y))).collect();
    let meet = cross(f, &lines[0], &lines[1]);
    let concurrency = f.normalize(&meet).filter(|p| f.dot(p, &lines[2]) == 0);
    Ok(RhombusReport {
        a,
        b,
        c,
        d,
        concurrency,
        center: v(1, 1).clone(),
        coords,
    })
}

/// Embeds `AG(2,3)` in `PG(2,9)` through the subfield `GF(3) ⊂ GF(9)` and
/// reads off the rhombus coordinates and the concurrency point.
pub fn concurrency_char3_check() -> Result<RhombusReport, Error> {
    let k = FiniteField::new(3, 1)?;
    let k2 = FiniteField::new(3, 2)?;
    let sigma = field_morphisms(&k, &k2).remove(0);
    let images: Vec<Vec<Elem>> = (0..9)
        .map(|p| {
            vec![
                1,
                sigma.apply((p / 3) as Elem),
                sigma.apply((p % 3) as Elem),
            ]
        })
        .collect();
    rhombus_coordinates(&k2, &images)
}

/// Whether an extension attempt ended in a non-concurrent family.
pub fn failed_by_non_concurrence(r: &ExtensionResult) -> bool {
    matches!(r.outcome, ExtensionOutcome::NonConcurrent(_))
}
