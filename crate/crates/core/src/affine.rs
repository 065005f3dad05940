//! Affine spaces `K^n`: flats as cosets, parallelism, semilinear and
//! semiaffine maps, and the parallel-morphism predicate.

use alloc::format;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::Error;
use crate::field::{field_morphisms, Elem, FieldMorphism, FiniteField};
use crate::geometry::Geometry;
use crate::linalg::{row_space_basis, Matrix};
use crate::morphism::GeoMap;
use crate::pointset::PointSet;
use crate::search::parallel_classes;

/// A flat `p + W` of an affine space.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AffineFlat {
    pub base: Vec<Elem>,
    /// RREF basis of the direction subspace `W`.
    pub direction: Vec<Vec<Elem>>,
}

impl AffineFlat {
    pub fn from_points(g: &Geometry, s: &PointSet) -> Result<Self, Error> {
        let (field, n) = affine_parts(g)?;
        let pts = s.to_vec();
        let &p0 = pts.first().ok_or(Error::EmptyFlat)?;
        if !g.is_flat(s) {
            return Err(Error::NotAFlat);
        }
        let base = g.coords(p0).unwrap().to_vec();
        let diffs: Vec<Vec<Elem>> = pts[1..]
            .iter()
            .map(|&p| field.sub_vec(g.coords(p).unwrap(), &base))
            .collect();
        Ok(AffineFlat {
            base,
            direction: row_space_basis(field, &diffs, n),
        })
    }

    pub fn dim(&self) -> usize {
        self.direction.len()
    }
}

fn affine_parts(g: &Geometry) -> Result<(&Arc<FiniteField>, usize), Error> {
    match g.kind() {
        crate::geometry::Kind::Affine { field, dim } => Ok((field, dim)),
        _ => Err(Error::InvalidInput("expected an affine space".into())),
    }
}

/// Two nonempty flats are parallel when they have the same direction.
pub fn parallel(g: &Geometry, s1: &PointSet, s2: &PointSet) -> Result<bool, Error> {
    let a = AffineFlat::from_points(g, s1)?;
    let b = AffineFlat::from_points(g, s2)?;
    Ok(a.direction == b.direction)
}

/// `v ↦ M·σ(v)` from `K^cols` to `K'^rows`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SemilinearMap {
    matrix: Matrix,
    sigma: FieldMorphism,
}

impl SemilinearMap {
    pub fn new(matrix: Matrix, sigma: FieldMorphism) -> Result<Self, Error> {
        if matrix.field() != sigma.target() {
            return Err(Error::InvalidInput(
                "matrix entries must lie in the target field of sigma".into(),
            ));
        }
        Ok(SemilinearMap { matrix, sigma })
    }

    pub fn linear(matrix: Matrix) -> Self {
        let sigma = FieldMorphism::identity(matrix.field());
        SemilinearMap { matrix, sigma }
    }

    pub fn matrix(&self) -> &Matrix {
        &self.matrix
    }

    pub fn sigma(&self) -> &FieldMorphism {
        &self.sigma
    }

    pub fn source_dim(&self) -> usize {
        self.matrix.cols()
    }

    pub fn target_dim(&self) -> usize {
        self.matrix.rows()
    }

    pub fn apply(&self, v: &[Elem]) -> Vec<Elem> {
        self.matrix.mul_vec(&self.sigma.apply_vec(v))
    }

    pub fn is_zero(&self) -> bool {
        self.matrix.rank() == 0
    }

    pub fn scale(&self, c: Elem) -> SemilinearMap {
        SemilinearMap {
            matrix: self.matrix.scale(c),
            sigma: self.sigma.clone(),
        }
    }
}

/// `v ↦ Φ(v) + a` with `Φ` semilinear.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SemiaffineDecomposition {
    pub differential: SemilinearMap,
    pub translation: Vec<Elem>,
}

impl SemiaffineDecomposition {
    pub fn sigma(&self) -> &FieldMorphism {
        self.differential.sigma()
    }

    pub fn apply(&self, v: &[Elem]) -> Vec<Elem> {
        let f = self.differential.matrix().field();
        f.add_vec(&self.differential.apply(v), &self.translation)
    }

    /// The induced point map between the two affine spaces.
    pub fn to_map(&self, domain: &Geometry, codomain: &Geometry) -> Result<GeoMap, Error> {
        let images = (0..domain.n_points())
            .map(|x| {
                let v = self.apply(domain.coords(x).ok_or(Error::DimensionMismatch)?);
                codomain.affine_id(&v).ok_or(Error::DimensionMismatch)
            })
            .collect::<Result<_, _>>()?;
        GeoMap::new(domain, codomain, images)
    }
}

/// Outcome of the parallel-morphism test; the witness is `(a, b, c, d)` with
/// `a∨b ∥ c∨d` whose images are not parallel.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParallelReport {
    pub parallel: bool,
    pub witness: Option<[usize; 4]>,
}

fn direction(g: &Geometry, a: usize, b: usize) -> Vec<Elem> {
    let f = g.field().unwrap();
    f.normalize(&f.sub_vec(g.coords(b).unwrap(), g.coords(a).unwrap()))
        .expect("distinct points")
}

fn images_parallel(phi: &GeoMap, a: usize, b: usize, c: usize, d: usize) -> bool {
    let cod = phi.codomain();
    let (ia, ib, ic, id) = (phi.apply(a), phi.apply(b), phi.apply(c), phi.apply(d));
    match (ia == ib, ic == id) {
        (true, true) => true,
        (false, false) => direction(cod, ia, ib) == direction(cod, ic, id),
        _ => false,
    }
}

/// Parallel-morphism test, one parallel class of lines at a time: on each
/// class the map must be constant on every line, or injective on every line
/// with all image lines sharing one direction.
pub fn is_parallel_morphism(phi: &GeoMap) -> Result<ParallelReport, Error> {
    let dom = phi.domain();
    affine_parts(dom)?;
    affine_parts(phi.codomain())?;
    for class in parallel_classes(dom) {
        let first = dom.line_members(class[0]);
        let (a, b) = (first[0], first[1]);
        for &l in &class {
            let m = dom.line_members(l);
            for i in 0..m.len() {
                for j in i + 1..m.len() {
                    if !images_parallel(phi, a, b, m[i], m[j]) {
                        return Ok(ParallelReport {
                            parallel: false,
                            witness: Some([a, b, m[i], m[j]]),
                        });
                    }
                }
            }
        }
    }
    Ok(ParallelReport {
        parallel: true,
        witness: None,
    })
}

/// The same predicate straight from the definition, over all quadruples.
pub fn is_parallel_morphism_by_quadruples(phi: &GeoMap) -> Result<ParallelReport, Error> {
    let dom = phi.domain();
    affine_parts(dom)?;
    affine_parts(phi.codomain())?;
    let n = dom.n_points();
    let mut dirs = vec![Vec::new(); n * n];
    for a in 0..n {
        for b in 0..n {
            if a != b {
                dirs[a * n + b] = direction(dom, a, b);
            }
        }
    }
    for a in 0..n {
        for b in 0..n {
            if a == b {
                continue;
            }
            for c in 0..n {
                for d in 0..n {
                    if c != d
                        && dirs[a * n + b] == dirs[c * n + d]
                        && !images_parallel(phi, a, b, c, d)
                    {
                        return Ok(ParallelReport {
                            parallel: false,
                            witness: Some([a, b, c, d]),
                        });
                    }
                }
            }
        }
    }
    Ok(ParallelReport {
        parallel: true,
        witness: None,
    })
}

/// Recovers `(Φ, σ, a)` with `φ(v) = Φ(v) + a` from a map between affine
/// spaces whose image is not contained in a line.
///
/// After translating so that `0 ↦ 0` the map is tested for additivity on
/// every pair, `σ` is read off along one vector with nonzero image, and the
/// assembled semilinear map must reproduce every image.
pub fn semiaffine_extract(phi: &GeoMap) -> Result<SemiaffineDecomposition, Error> {
    let (dom, cod) = (phi.domain(), phi.codomain());
    let (k, n) = affine_parts(dom)?;
    let (k2, n2) = affine_parts(cod)?;
    if !phi.image_not_in_line() {
        return Err(Error::DegenerateImage);
    }
    let origin = dom.affine_id(&vec![0; n]).unwrap();
    let translation = cod.coords(phi.apply(origin)).unwrap().to_vec();
    let psi = |x: usize| k2.sub_vec(cod.coords(phi.apply(x)).unwrap(), &translation);
    let psi_v = |v: &[Elem]| psi(dom.affine_id(v).unwrap());

    let table: Vec<Vec<Elem>> = (0..dom.n_points()).map(psi).collect();
    for u in 0..dom.n_points() {
        for v in u..dom.n_points() {
            let sum = k.add_vec(dom.coords(u).unwrap(), dom.coords(v).unwrap());
            let w = dom.affine_id(&sum).unwrap();
            if table[w] != k2.add_vec(&table[u], &table[v]) {
                return Err(Error::NotSemiaffine(format!(
                    "not additive: {} + {}",
                    dom.label(u),
                    dom.label(v)
                )));
            }
        }
    }

    let unit = |i: usize| {
        let mut e = vec![0; n];
        e[i] = 1;
        e
    };
    let x: Vec<Elem> = (0..n)
        .map(unit)
        .find(|e| psi_v(e).iter().any(|&c| c != 0))
        .or_else(|| {
            (0..dom.n_points())
                .find(|&p| table[p].iter().any(|&c| c != 0))
                .map(|p| dom.coords(p).unwrap().to_vec())
        })
        .ok_or(Error::DegenerateImage)?;
    let px = psi_v(&x);
    let mut sigma_table = Vec::with_capacity(k.order() as usize);
    for lambda in k.elements() {
        let img = psi_v(&k.scale(lambda, &x));
        let c = k2.ratio(&img, &px).ok_or_else(|| {
            Error::NotSemiaffine(format!(
                "image of {lambda}·x is not a multiple of the image of x"
            ))
        })?;
        sigma_table.push(c);
    }
    let sigma = FieldMorphism::from_table(k, k2, sigma_table)
        .ok_or_else(|| Error::NotSemiaffine("scalar map is not a field morphism".into()))?;

    let columns: Vec<Vec<Elem>> = (0..n).map(|i| psi_v(&unit(i))).collect();
    let matrix = if n == 0 {
        Matrix::zero(k2, n2, 0)
    } else {
        Matrix::from_columns(k2, &columns)?
    };
    let differential = SemilinearMap::new(matrix, sigma)?;
    for (p, want) in table.iter().enumerate() {
        if differential.apply(dom.coords(p).unwrap()) != *want {
            return Err(Error::NotSemiaffine(format!(
                "reassembled map differs at {}",
                dom.label(p)
            )));
        }
    }
    Ok(SemiaffineDecomposition {
        differential,
        translation,
    })
}

/// Image tables of every semiaffine map `AG(n,K) → AG(n',K')` whose image is
/// not contained in a line, sorted and deduplicated.
pub fn semiaffine_family(domain: &Geometry, codomain: &Geometry) -> Result<Vec<Vec<usize>>, Error> {
    let (k, n) = affine_parts(domain)?;
    let (k2, n2) = affine_parts(codomain)?;
    let mut out = Vec::new();
    for sigma in field_morphisms(k, k2) {
        let lifted: Vec<Vec<Elem>> = (0..domain.n_points())
            .map(|p| sigma.apply_vec(domain.coords(p).unwrap()))
            .collect();
        for m in Matrix::enumerate_all(k2, n2, n) {
            if m.rank() < 2 {
                continue;
            }
            let linear: Vec<Vec<Elem>> = lifted.iter().map(|v| m.mul_vec(v)).collect();
            for a in 0..codomain.n_points() {
                let t = codomain.coords(a).unwrap();
                out.push(
                    linear
                        .iter()
                        .map(|v| codomain.affine_id(&k2.add_vec(v, t)).unwrap())
                        .collect(),
                );
            }
        }
    }
    out.sort();
    out.dedup();
    Ok(out)
}

/// Two families of image tables compared as sets.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VerificationReport {
    pub enumerated: usize,
    pub constructed: usize,
    pub equal: bool,
    pub only_enumerated: Vec<Vec<usize>>,
    pub only_constructed: Vec<Vec<usize>>,
    pub nodes: u64,
}

/// Compares two sorted, duplicate-free families.
pub fn compare_families(
    enumerated: &[Vec<usize>],
    constructed: &[Vec<usize>],
    nodes: u64,
) -> VerificationReport {
    let only_enumerated: Vec<Vec<usize>> = enumerated
        .iter()
        .filter(|m| constructed.binary_search(m).is_err())
        .cloned()
        .collect();
    let only_constructed: Vec<Vec<usize>> = constructed
        .iter()
        .filter(|m| enumerated.binary_search(m).is_err())
        .cloned()
        .collect();
    VerificationReport {
        enumerated: enumerated.len(),
        constructed: constructed.len(),
        equal: only_enumerated.is_empty() && only_constructed.is_empty(),
        only_enumerated,
        only_constructed,
        nodes,
    }
}

/// Enumerates parallel morphisms `AG(n,q) → AG(n2,q2)` with image not in a
/// line and compares them with the constructed semiaffine maps.
pub fn ft_affine_verify(
    q: u32,
    n: usize,
    q2: u32,
    n2: usize,
    budget: u64,
) -> Result<VerificationReport, Error> {
    let k = FiniteField::parse(&format!("{q}"))?;
    let k2 = FiniteField::parse(&format!("{q2}"))?;
    let dom = Geometry::affine(&k, n);
    let cod = Geometry::affine(&k2, n2);
    let mut opts = crate::search::SearchOptions::new(crate::search::Filter::ImageNotInLine);
    opts.budget = budget;
    opts.parallel = true;
    let e = crate::search::Enumerator::new(&dom, &cod, opts)?;
    let mut maps = Vec::new();
    let mut nodes = 0;
    for root in e.roots() {
        let r = e.run_subtree(root)?;
        nodes += r.nodes;
        if nodes > budget {
            return Err(Error::SearchBudgetExceeded { budget });
        }
        maps.extend(r.maps);
    }
    maps.sort();
    let constructed = semiaffine_family(&dom, &cod)?;
    Ok(compare_families(&maps, &constructed, nodes))
}

/// Both sides of the classical statement for a bijection between affine
/// spaces over fields with more than two elements.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClassicalReport {
    pub collineation: bool,
    pub semiaffinity: bool,
}

impl ClassicalReport {
    pub fn agree(&self) -> bool {
        self.collineation == self.semiaffinity
    }
}

/// A bijection between affine spaces of dimension at least 2 over fields
/// other than GF(2) is a collineation exactly when it is semiaffine with a
/// bijective field morphism.
pub fn classical_ft_check(phi: &GeoMap) -> Result<ClassicalReport, Error> {
    let (k, n) = affine_parts(phi.domain())?;
    let (k2, n2) = affine_parts(phi.codomain())?;
    if k.order() == 2 || k2.order() == 2 {
        return Err(Error::HypothesisViolated(
            "fields must have more than two elements".into(),
        ));
    }
    if n < 2 || n2 < 2 {
        return Err(Error::HypothesisViolated(
            "dimensions must be at least 2".into(),
        ));
    }
    if !phi.is_bijective() {
        return Err(Error::HypothesisViolated("map must be bijective".into()));
    }
    let collineation = phi.is_collineation().unwrap_or(false);
    let semiaffinity = semiaffine_extract(phi).is_ok_and(|d| d.sigma().is_bijective());
    Ok(ClassicalReport {
        collineation,
        semiaffinity,
    })
}

/// Decides whether a set of vectors of `K^n` (given as affine point ids) is
/// a subspace by testing `0 ∈ W` and closure under affine combinations
/// `(1-t)w1 + t w2`, and checks the verdict against the direct test.
pub fn subspace_criterion(g: &Geometry, w: &PointSet) -> Result<bool, Error> {
    let (k, n) = affine_parts(g)?;
    if k.order() == 2 {
        return Err(Error::FieldTooSmall);
    }
    let origin = g.affine_id(&vec![0; n]).unwrap();
    let pts = w.to_vec();
    let id = |v: Vec<Elem>| g.affine_id(&v).unwrap();
    let coords = |p: usize| g.coords(p).unwrap();

    let line_closed = w.contains(origin)
        && pts.iter().all(|&a| {
            pts.iter().all(|&b| {
                k.elements().all(|t| {
                    let one_minus_t = k.sub(1, t);
                    let v = k.add_vec(&k.scale(one_minus_t, coords(a)), &k.scale(t, coords(b)));
                    w.contains(id(v))
                })
            })
        });
    let subspace = w.contains(origin)
        && pts.iter().all(|&a| {
            k.elements().all(|c| w.contains(id(k.scale(c, coords(a)))))
                && pts
                    .iter()
                    .all(|&b| w.contains(id(k.add_vec(coords(a), coords(b)))))
        });
    if line_closed != subspace {
        return Err(Error::Disagreement(format!(
            "line-closure test says {line_closed}, subspace test says {subspace}"
        )));
    }
    Ok(subspace)
}
