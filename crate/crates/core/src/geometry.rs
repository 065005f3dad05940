//! Finite geometries: point sets with a closure operator.
//!
//! A [`Geometry`] is a cheap handle (an `Arc`) around one of several backends.
//! Explicit geometries store their flats; affine and projective spaces compute
//! closures from coordinates; subgeometries, truncations and quotients derive
//! everything from a parent. Flat and line lists are built lazily on first use.

use alloc::boxed::Box;
use alloc::format;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use once_cell::race::OnceBox;

use crate::error::Error;
use crate::field::{Elem, FiniteField};
use crate::linalg::{enumerate_subspaces, for_each_combination, in_span, rank_of, row_space_basis};
use crate::pointset::PointSet;

/// Pair-to-line lookup tables are kept only below this many points.
const PAIR_TABLE_MAX: usize = 1024;

#[derive(Clone)]
pub struct Geometry(Arc<Inner>);

struct Inner {
    n: usize,
    backend: Backend,
    flats: OnceBox<Vec<PointSet>>,
    lines: OnceBox<LineTable>,
    generation: OnceBox<(bool, bool)>,
}

enum Backend {
    Explicit {
        labels: Vec<String>,
        flats: Vec<PointSet>,
    },
    Affine {
        field: Arc<FiniteField>,
        dim: usize,
        coords: Vec<Elem>,
    },
    Projective {
        field: Arc<FiniteField>,
        dim: usize,
        coords: Vec<Elem>,
    },
    Sub {
        parent: Geometry,
        points: Vec<usize>,
        index: Vec<usize>,
    },
    Truncation {
        parent: Geometry,
        rank: usize,
    },
    Quotient {
        parent: Geometry,
        exceptional: PointSet,
        exceptional_basis: Vec<usize>,
        reps: Vec<usize>,
        class_of: Vec<usize>,
    },
}

struct LineTable {
    lines: Vec<PointSet>,
    members: Vec<Vec<usize>>,
    through: Vec<Vec<usize>>,
    pair: Option<Vec<u32>>,
}

/// Read-only view of how a geometry was built.
pub enum Kind<'a> {
    Explicit,
    Affine {
        field: &'a Arc<FiniteField>,
        dim: usize,
    },
    Projective {
        field: &'a Arc<FiniteField>,
        dim: usize,
    },
    Subgeometry {
        parent: &'a Geometry,
        points: &'a [usize],
    },
    Truncation {
        parent: &'a Geometry,
        dim: usize,
    },
    Quotient {
        parent: &'a Geometry,
        exceptional: &'a PointSet,
        representatives: &'a [usize],
    },
}

/// A closed point set together with one of its bases.
#[derive(Clone, PartialEq, Eq)]
pub struct Flat {
    points: PointSet,
    basis: Vec<usize>,
}

impl fmt::Debug for Flat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Flat(dim {}, {:?})", self.dim(), self.points)
    }
}

impl Flat {
    pub fn points(&self) -> &PointSet {
        &self.points
    }

    pub fn basis(&self) -> &[usize] {
        &self.basis
    }

    /// `|basis| - 1`, so the empty flat has dimension -1.
    pub fn dim(&self) -> isize {
        self.basis.len() as isize - 1
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn contains(&self, p: usize) -> bool {
        self.points.contains(p)
    }
}

impl fmt::Debug for Geometry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.0.backend {
            Backend::Explicit { .. } => write!(f, "Explicit({} points)", self.0.n),
            Backend::Affine { field, dim, .. } => write!(f, "AG({dim},{})", field.order()),
            Backend::Projective { field, dim, .. } => write!(f, "PG({dim},{})", field.order()),
            Backend::Sub { parent, points, .. } => {
                write!(f, "Sub({parent:?}, {} points)", points.len())
            }
            Backend::Truncation { parent, rank } => write!(f, "Trunc({parent:?}, {})", rank - 1),
            Backend::Quotient {
                parent,
                exceptional,
                ..
            } => {
                write!(f, "Quotient({parent:?} / {exceptional:?})")
            }
        }
    }
}

/// Id of a normalized projective vector: vectors are ordered lexicographically,
/// so those whose leading 1 sits further right come first.
fn projective_index(q: usize, v: &[Elem]) -> usize {
    let n = v.len() - 1;
    let j = v.iter().position(|&x| x != 0).expect("nonzero vector");
    let offset = (q.pow((n - j) as u32) - 1) / (q - 1);
    offset
        + v[j + 1..]
            .iter()
            .fold(0usize, |acc, &x| acc * q + x as usize)
}

impl Geometry {
    fn wrap(n: usize, backend: Backend) -> Self {
        Geometry(Arc::new(Inner {
            n,
            backend,
            flats: OnceBox::new(),
            lines: OnceBox::new(),
            generation: OnceBox::new(),
        }))
    }

    /// A geometry given by its list of flats. The list is sorted and
    /// deduplicated but otherwise taken as-is; [`crate::axioms::check_axioms`]
    /// reports whether it actually satisfies the axioms.
    pub fn explicit(labels: Vec<String>, flats: Vec<Vec<usize>>) -> Result<Self, Error> {
        let n = labels.len();
        let mut sets = Vec::with_capacity(flats.len());
        for f in flats {
            if let Some(&bad) = f.iter().find(|&&p| p >= n) {
                return Err(Error::UnknownPoint(bad));
            }
            sets.push(PointSet::from_ids(n, f));
        }
        sets.sort();
        sets.dedup();
        Ok(Self::wrap(
            n,
            Backend::Explicit {
                labels,
                flats: sets,
            },
        ))
    }

    /// The affine space `K^dim`; point ids are coordinate tuples read as base-q numbers.
    pub fn affine(field: &Arc<FiniteField>, dim: usize) -> Self {
        let q = field.order() as usize;
        let n = q.pow(dim as u32);
        let mut coords = Vec::with_capacity(n * dim);
        for id in 0..n {
            coords.extend(field.decode(id as u64, dim));
        }
        Self::wrap(
            n,
            Backend::Affine {
                field: field.clone(),
                dim,
                coords,
            },
        )
    }

    /// The projective space of `K^(dim+1)`; points are normalized vectors in lexicographic order.
    pub fn projective(field: &Arc<FiniteField>, dim: usize) -> Self {
        let q = field.order() as usize;
        let width = dim + 1;
        let n = (q.pow(width as u32) - 1) / (q - 1);
        let mut coords = vec![0; n * width];
        for code in 1..q.pow(width as u32) as u64 {
            let v = field.decode(code, width);
            if v[v.iter().position(|&x| x != 0).unwrap()] == 1 {
                let id = projective_index(q, &v);
                coords[id * width..(id + 1) * width].copy_from_slice(&v);
            }
        }
        Self::wrap(
            n,
            Backend::Projective {
                field: field.clone(),
                dim,
                coords,
            },
        )
    }

    /// The subgeometry on `points`, whose flats are the traces `F ∩ points`.
    /// Subgeometry ids follow the order of parent ids.
    pub fn subgeometry(&self, points: &PointSet) -> Result<Self, Error> {
        self.check_set(points)?;
        let pts = points.to_vec();
        let mut index = vec![usize::MAX; self.0.n];
        for (i, &p) in pts.iter().enumerate() {
            index[p] = i;
        }
        Ok(Self::wrap(
            pts.len(),
            Backend::Sub {
                parent: self.clone(),
                points: pts,
                index,
            },
        ))
    }

    /// Same points, keeping only flats of dimension below `m` plus the whole set.
    pub fn truncate(&self, m: usize) -> Result<Self, Error> {
        let dim = self.dimension();
        if (m as isize) >= dim {
            return Err(Error::BadRank {
                requested: m,
                dim: dim.max(0) as usize,
            });
        }
        Ok(Self::wrap(
            self.0.n,
            Backend::Truncation {
                parent: self.clone(),
                rank: m + 1,
            },
        ))
    }

    /// Builds the quotient backend. `reps[c]` is the smallest parent id in class
    /// `c`, and `class_of[p]` is `usize::MAX` for points of `exceptional`.
    pub(crate) fn quotient_backend(
        &self,
        exceptional: PointSet,
        reps: Vec<usize>,
        class_of: Vec<usize>,
    ) -> Self {
        let exceptional_basis = self.basis_of(&exceptional);
        Self::wrap(
            reps.len(),
            Backend::Quotient {
                parent: self.clone(),
                exceptional,
                exceptional_basis,
                reps,
                class_of,
            },
        )
    }

    pub fn kind(&self) -> Kind<'_> {
        match &self.0.backend {
            Backend::Explicit { .. } => Kind::Explicit,
            Backend::Affine { field, dim, .. } => Kind::Affine { field, dim: *dim },
            Backend::Projective { field, dim, .. } => Kind::Projective { field, dim: *dim },
            Backend::Sub { parent, points, .. } => Kind::Subgeometry { parent, points },
            Backend::Truncation { parent, rank } => Kind::Truncation {
                parent,
                dim: rank - 1,
            },
            Backend::Quotient {
                parent,
                exceptional,
                reps,
                ..
            } => Kind::Quotient {
                parent,
                exceptional,
                representatives: reps,
            },
        }
    }

    pub fn ptr_eq(&self, other: &Geometry) -> bool {
        Arc::ptr_eq(&self.0, &other.0)
    }

    /// Structural equality: same number of points and the same family of flats.
    pub fn same_structure(&self, other: &Geometry) -> bool {
        self.ptr_eq(other) || (self.0.n == other.0.n && self.flats() == other.flats())
    }

    pub fn n_points(&self) -> usize {
        self.0.n
    }

    pub fn all_points(&self) -> PointSet {
        PointSet::full(self.0.n)
    }

    pub fn empty_set(&self) -> PointSet {
        PointSet::empty(self.0.n)
    }

    pub fn set_of(&self, ids: impl IntoIterator<Item = usize>) -> PointSet {
        PointSet::from_ids(self.0.n, ids)
    }

    /// The coordinate field of an affine or projective space.
    pub fn field(&self) -> Option<&Arc<FiniteField>> {
        match &self.0.backend {
            Backend::Affine { field, .. } | Backend::Projective { field, .. } => Some(field),
            _ => None,
        }
    }

    pub fn is_affine(&self) -> bool {
        matches!(self.0.backend, Backend::Affine { .. })
    }

    pub fn is_projective(&self) -> bool {
        matches!(self.0.backend, Backend::Projective { .. })
    }

    /// Coordinates of a point of an affine space, or the normalized
    /// homogeneous vector of a point of a projective space.
    pub fn coords(&self, id: usize) -> Option<&[Elem]> {
        match &self.0.backend {
            Backend::Affine { dim, coords, .. } => Some(&coords[id * dim..(id + 1) * dim]),
            Backend::Projective { dim, coords, .. } => {
                Some(&coords[id * (dim + 1)..(id + 1) * (dim + 1)])
            }
            _ => None,
        }
    }

    /// Id of an affine point given its coordinates.
    pub fn affine_id(&self, v: &[Elem]) -> Option<usize> {
        match &self.0.backend {
            Backend::Affine { field, dim, .. } if v.len() == *dim => Some(field.encode(v) as usize),
            _ => None,
        }
    }

    /// Id of the projective point spanned by a nonzero vector.
    pub fn projective_id(&self, v: &[Elem]) -> Option<usize> {
        match &self.0.backend {
            Backend::Projective { field, dim, .. } if v.len() == dim + 1 => {
                let v = field.normalize(v)?;
                Some(projective_index(field.order() as usize, &v))
            }
            _ => None,
        }
    }

    pub fn label(&self, id: usize) -> String {
        let join = |v: &[Elem], sep: &str| {
            let parts: Vec<String> = v.iter().map(|x| format!("{x}")).collect();
            parts.join(sep)
        };
        match &self.0.backend {
            Backend::Explicit { labels, .. } => labels[id].clone(),
            Backend::Affine { .. } => format!("({})", join(self.coords(id).unwrap(), ",")),
            Backend::Projective { .. } => format!("({})", join(self.coords(id).unwrap(), ":")),
            Backend::Sub { parent, points, .. } => parent.label(points[id]),
            Backend::Truncation { parent, .. } => parent.label(id),
            Backend::Quotient { parent, reps, .. } => format!("[{}]", parent.label(reps[id])),
        }
    }

    fn check_set(&self, a: &PointSet) -> Result<(), Error> {
        if a.universe() != self.0.n {
            return Err(Error::UnknownPoint(a.universe().max(self.0.n)));
        }
        Ok(())
    }

    fn check_ids(&self, ids: &[usize]) -> Result<(), Error> {
        match ids.iter().find(|&&p| p >= self.0.n) {
            Some(&p) => Err(Error::UnknownPoint(p)),
            None => Ok(()),
        }
    }

    // ---- closure ----

    /// The closure of a list of point ids. Ids must be in range.
    pub fn closure_ids(&self, gens: &[usize]) -> PointSet {
        let n = self.0.n;
        match &self.0.backend {
            Backend::Explicit { flats, .. } => {
                let mut acc = PointSet::full(n);
                let a = PointSet::from_ids(n, gens.iter().copied());
                for f in flats {
                    if a.is_subset(f) {
                        acc.intersect_with(f);
                    }
                }
                acc
            }
            Backend::Affine { field, dim, .. } => {
                let mut out = PointSet::empty(n);
                let Some(&g0) = gens.first() else {
                    return out;
                };
                let base = self.coords(g0).unwrap();
                let diffs: Vec<Vec<Elem>> = gens[1..]
                    .iter()
                    .map(|&g| field.sub_vec(self.coords(g).unwrap(), base))
                    .collect();
                let basis = row_space_basis(field, &diffs, *dim);
                let mut p = vec![0; *dim];
                for_each_combination(field, &basis, *dim, |v| {
                    for i in 0..*dim {
                        p[i] = field.add(base[i], v[i]);
                    }
                    out.insert(field.encode(&p) as usize);
                });
                out
            }
            Backend::Projective { field, dim, .. } => {
                let width = dim + 1;
                let q = field.order() as usize;
                let rows: Vec<Vec<Elem>> = gens
                    .iter()
                    .map(|&g| self.coords(g).unwrap().to_vec())
                    .collect();
                let basis = row_space_basis(field, &rows, width);
                let mut out = PointSet::empty(n);
                // With an RREF basis, combinations whose first nonzero
                // coefficient is 1 are already normalized.
                for j in 0..basis.len() {
                    let tail = &basis[j + 1..];
                    let lead = &basis[j];
                    for_each_combination(field, tail, width, |v| {
                        let w = field.add_vec(lead, v);
                        out.insert(projective_index(q, &w));
                    });
                }
                out
            }
            Backend::Sub {
                parent,
                points,
                index,
            } => {
                let mapped: Vec<usize> = gens.iter().map(|&g| points[g]).collect();
                let c = parent.closure_ids(&mapped);
                PointSet::from_ids(n, c.iter().map(|p| index[p]).filter(|&i| i != usize::MAX))
            }
            Backend::Truncation { parent, rank } => {
                if parent.rank(gens) < *rank {
                    parent.closure_ids(gens)
                } else {
                    PointSet::full(n)
                }
            }
            Backend::Quotient {
                parent,
                exceptional_basis,
                reps,
                class_of,
                ..
            } => {
                let mut lifted = exceptional_basis.clone();
                lifted.extend(gens.iter().map(|&g| reps[g]));
                let c = parent.closure_ids(&lifted);
                PointSet::from_ids(
                    n,
                    c.iter().map(|p| class_of[p]).filter(|&i| i != usize::MAX),
                )
            }
        }
    }

    pub fn closure_set(&self, a: &PointSet) -> PointSet {
        self.closure_ids(&a.to_vec())
    }

    /// The least flat containing `a`.
    pub fn closure(&self, a: &PointSet) -> Result<Flat, Error> {
        self.check_set(a)?;
        let gens = self.basis_of(a);
        Ok(Flat {
            points: self.closure_ids(&gens),
            basis: gens,
        })
    }

    pub fn closure_of(&self, ids: &[usize]) -> Result<Flat, Error> {
        self.check_ids(ids)?;
        let mut gens = Vec::new();
        for &p in ids {
            if !self.in_closure(&gens, p) {
                gens.push(p);
            }
        }
        Ok(Flat {
            points: self.closure_ids(&gens),
            basis: gens,
        })
    }

    /// Whether `x` lies in the closure of `gens`.
    pub fn in_closure(&self, gens: &[usize], x: usize) -> bool {
        match &self.0.backend {
            Backend::Affine { field, .. } => {
                let Some(&g0) = gens.first() else {
                    return false;
                };
                if gens.contains(&x) {
                    return true;
                }
                let base = self.coords(g0).unwrap();
                let diffs = gens[1..]
                    .iter()
                    .map(|&g| field.sub_vec(self.coords(g).unwrap(), base));
                in_span(field, diffs, field.sub_vec(self.coords(x).unwrap(), base))
            }
            Backend::Projective { field, .. } => {
                if gens.contains(&x) {
                    return true;
                }
                let rows = gens.iter().map(|&g| self.coords(g).unwrap().to_vec());
                in_span(field, rows, self.coords(x).unwrap().to_vec())
            }
            Backend::Sub { parent, points, .. } => {
                let mapped: Vec<usize> = gens.iter().map(|&g| points[g]).collect();
                parent.in_closure(&mapped, points[x])
            }
            Backend::Truncation { parent, rank } => {
                parent.rank(gens) > *rank - 1 || parent.in_closure(gens, x)
            }
            Backend::Quotient {
                parent,
                exceptional_basis,
                reps,
                ..
            } => {
                let mut lifted = exceptional_basis.clone();
                lifted.extend(gens.iter().map(|&g| reps[g]));
                parent.in_closure(&lifted, reps[x])
            }
            Backend::Explicit { .. } => self.closure_ids(gens).contains(x),
        }
    }

    /// Size of any basis of the closure of `gens`.
    pub fn rank(&self, gens: &[usize]) -> usize {
        match &self.0.backend {
            Backend::Affine { field, dim, .. } => {
                let Some(&g0) = gens.first() else {
                    return 0;
                };
                let base = self.coords(g0).unwrap();
                let diffs: Vec<Vec<Elem>> = gens[1..]
                    .iter()
                    .map(|&g| field.sub_vec(self.coords(g).unwrap(), base))
                    .collect();
                1 + rank_of(field, &diffs, *dim)
            }
            Backend::Projective { field, dim, .. } => {
                let rows: Vec<Vec<Elem>> = gens
                    .iter()
                    .map(|&g| self.coords(g).unwrap().to_vec())
                    .collect();
                rank_of(field, &rows, dim + 1)
            }
            Backend::Sub { parent, points, .. } => {
                let mapped: Vec<usize> = gens.iter().map(|&g| points[g]).collect();
                parent.rank(&mapped)
            }
            Backend::Truncation { parent, rank } => parent.rank(gens).min(*rank),
            Backend::Quotient {
                parent,
                exceptional_basis,
                reps,
                ..
            } => {
                let mut lifted = exceptional_basis.clone();
                lifted.extend(gens.iter().map(|&g| reps[g]));
                parent.rank(&lifted) - exceptional_basis.len()
            }
            Backend::Explicit { .. } => self.greedy_basis(gens.iter().copied()).len(),
        }
    }

    fn greedy_basis(&self, pts: impl Iterator<Item = usize>) -> Vec<usize> {
        let mut basis = Vec::new();
        for p in pts {
            if !self.in_closure(&basis, p) {
                basis.push(p);
            }
        }
        basis
    }

    /// A basis of the closure of `a`, extracted greedily in increasing id order.
    pub fn basis_of(&self, a: &PointSet) -> Vec<usize> {
        self.greedy_basis(a.iter())
    }

    /// Whether no point of `ids` lies in the closure of the others.
    pub fn independent(&self, ids: &[usize]) -> bool {
        (0..ids.len()).all(|i| {
            let rest: Vec<usize> = ids
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != i)
                .map(|(_, &p)| p)
                .collect();
            !self.in_closure(&rest, ids[i])
        })
    }

    /// Dimension of the whole geometry (`-1` when it has no points).
    pub fn dimension(&self) -> isize {
        match &self.0.backend {
            Backend::Affine { dim, .. } | Backend::Projective { dim, .. } => *dim as isize,
            Backend::Truncation { rank, .. } => *rank as isize - 1,
            _ => self.basis_of(&self.all_points()).len() as isize - 1,
        }
    }

    pub fn is_flat(&self, a: &PointSet) -> bool {
        a.universe() == self.0.n && self.closure_set(a) == *a
    }

    /// Wraps a closed set as a [`Flat`].
    pub fn flat(&self, a: &PointSet) -> Result<Flat, Error> {
        self.check_set(a)?;
        let f = self.closure(a)?;
        if f.points != *a {
            return Err(Error::NotAFlat);
        }
        Ok(f)
    }

    pub fn whole(&self) -> Flat {
        self.closure(&self.all_points()).expect("universe matches")
    }

    pub fn join(&self, f1: &Flat, f2: &Flat) -> Flat {
        let mut gens = f1.basis.clone();
        for &p in &f2.basis {
            if !self.in_closure(&gens, p) {
                gens.push(p);
            }
        }
        Flat {
            points: self.closure_ids(&gens),
            basis: gens,
        }
    }

    pub fn meet(&self, f1: &Flat, f2: &Flat) -> Flat {
        self.closure(&f1.points.intersection(&f2.points))
            .expect("same geometry")
    }

    // ---- flats and lines ----

    /// Every flat, sorted as id lists. Built once and cached.
    pub fn flats(&self) -> &[PointSet] {
        self.0.flats.get_or_init(|| Box::new(self.build_flats()))
    }

    fn build_flats(&self) -> Vec<PointSet> {
        let n = self.0.n;
        let mut out = match &self.0.backend {
            Backend::Explicit { flats, .. } => flats.clone(),
            Backend::Affine { field, dim, .. } => {
                let mut out = vec![PointSet::empty(n)];
                for d in 0..=*dim {
                    for dir in enumerate_subspaces(field, *dim, d) {
                        let mut seen = PointSet::empty(n);
                        for p in 0..n {
                            if seen.contains(p) {
                                continue;
                            }
                            let base = self.coords(p).unwrap();
                            let mut coset = PointSet::empty(n);
                            for_each_combination(field, &dir, *dim, |v| {
                                let w = field.add_vec(base, v);
                                coset.insert(field.encode(&w) as usize);
                            });
                            seen.union_with(&coset);
                            out.push(coset);
                        }
                    }
                }
                out
            }
            Backend::Projective { field, dim, .. } => {
                let mut out = vec![PointSet::empty(n)];
                for d in 1..=dim + 1 {
                    for basis in enumerate_subspaces(field, dim + 1, d) {
                        let ids: Vec<usize> = basis
                            .iter()
                            .map(|v| self.projective_id(v).unwrap())
                            .collect();
                        out.push(self.closure_ids(&ids));
                    }
                }
                out
            }
            Backend::Sub { parent, index, .. } => parent
                .flats()
                .iter()
                .map(|f| {
                    PointSet::from_ids(n, f.iter().map(|p| index[p]).filter(|&i| i != usize::MAX))
                })
                .collect(),
            Backend::Truncation { parent, rank } => {
                let mut out: Vec<PointSet> = parent
                    .flats()
                    .iter()
                    .filter(|f| parent.basis_of(f).len() < *rank)
                    .cloned()
                    .collect();
                out.push(PointSet::full(n));
                out
            }
            Backend::Quotient {
                parent,
                exceptional,
                class_of,
                ..
            } => parent
                .flats()
                .iter()
                .filter(|f| exceptional.is_subset(f))
                .map(|f| {
                    PointSet::from_ids(
                        n,
                        f.iter().map(|p| class_of[p]).filter(|&i| i != usize::MAX),
                    )
                })
                .collect(),
        };
        out.sort();
        out.dedup();
        out
    }

    /// Flats of a given dimension, with their bases.
    pub fn flats_of_dim(&self, d: isize) -> Vec<Flat> {
        self.flats()
            .iter()
            .filter_map(|f| {
                let basis = self.basis_of(f);
                (basis.len() as isize - 1 == d).then(|| Flat {
                    points: f.clone(),
                    basis,
                })
            })
            .collect()
    }

    fn line_table(&self) -> &LineTable {
        self.0.lines.get_or_init(|| Box::new(self.build_lines()))
    }

    fn build_lines(&self) -> LineTable {
        let n = self.0.n;
        let mut lines: Vec<PointSet> = Vec::new();
        let mut covered = PointSet::empty(n * n);
        for a in 0..n {
            for b in a + 1..n {
                if covered.contains(a * n + b) {
                    continue;
                }
                let l = self.closure_ids(&[a, b]);
                let members = l.to_vec();
                for &x in &members {
                    for &y in &members {
                        covered.insert(x * n + y);
                    }
                }
                lines.push(l);
            }
        }
        lines.sort();
        let members: Vec<Vec<usize>> = lines.iter().map(PointSet::to_vec).collect();
        let mut through = vec![Vec::new(); n];
        for (i, m) in members.iter().enumerate() {
            for &p in m {
                through[p].push(i);
            }
        }
        let pair = (n <= PAIR_TABLE_MAX).then(|| {
            let mut t = vec![u32::MAX; n * n];
            for (i, m) in members.iter().enumerate() {
                for &x in m {
                    for &y in m {
                        if x != y {
                            t[x * n + y] = i as u32;
                        }
                    }
                }
            }
            t
        });
        LineTable {
            lines,
            members,
            through,
            pair,
        }
    }

    /// All lines (closures of two distinct points), sorted.
    pub fn lines(&self) -> &[PointSet] {
        &self.line_table().lines
    }

    pub fn line_members(&self, line: usize) -> &[usize] {
        &self.line_table().members[line]
    }

    /// Indices of the lines through `p`.
    pub fn lines_through(&self, p: usize) -> &[usize] {
        &self.line_table().through[p]
    }

    /// Index of the line through two distinct points.
    pub fn line_index(&self, a: usize, b: usize) -> usize {
        debug_assert_ne!(a, b);
        let t = self.line_table();
        match &t.pair {
            Some(pair) => pair[a * self.0.n + b] as usize,
            None => {
                let l = self.closure_ids(&[a, b]);
                t.lines.binary_search(&l).expect("line is listed")
            }
        }
    }

    pub fn line_through(&self, a: usize, b: usize) -> &PointSet {
        &self.lines()[self.line_index(a, b)]
    }

    /// Whether three points lie on a common line (or coincide).
    pub fn collinear(&self, a: usize, b: usize, c: usize) -> bool {
        a == b || self.line_through(a, b).contains(c)
    }

    // ---- generation by lines / planes ----

    fn generation(&self) -> (bool, bool) {
        *self.0.generation.get_or_init(|| {
            let lines = self.closed_sets_are_flats(false);
            let planes = lines || self.closed_sets_are_flats(true);
            Box::new((lines, planes))
        })
    }

    /// Whether the flats are exactly the sets containing the line through any two of their points.
    pub fn generated_by_lines(&self) -> bool {
        self.generation().0
    }

    /// Whether the flats are exactly the sets containing the closure of any three of their points.
    pub fn generated_by_lines_and_planes(&self) -> bool {
        self.generation().1
    }

    /// Smallest superset of `start ∪ {p}` closed under joins of two points
    /// (and of three points when `planes` is set). `start` must already be closed.
    pub fn local_closure(&self, start: &PointSet, p: usize, planes: bool) -> PointSet {
        let mut set = start.clone();
        let mut members = start.to_vec();
        let mut queue = vec![p];
        if !set.insert(p) {
            return set;
        }
        while let Some(x) = queue.pop() {
            let mut found = Vec::new();
            for (i, &y) in members.iter().enumerate() {
                for z in self.line_through(x, y) {
                    if !set.contains(z) {
                        found.push(z);
                        set.insert(z);
                    }
                }
                if planes {
                    for &w in &members[..i] {
                        if self.collinear(x, y, w) {
                            continue;
                        }
                        for z in &self.closure_ids(&[x, y, w]) {
                            if !set.contains(z) {
                                found.push(z);
                                set.insert(z);
                            }
                        }
                    }
                }
            }
            members.push(x);
            queue.extend(found);
        }
        set
    }

    // Every line-closed set arises from the empty set by repeatedly adding a
    // point and re-closing. So the closed sets are all flats exactly when the
    // empty set is a flat and each one-point extension of a flat closes to the
    // flat it generates.
    fn closed_sets_are_flats(&self, planes: bool) -> bool {
        if !self.is_flat(&self.empty_set()) {
            return false;
        }
        self.flats().iter().all(|f| {
            let basis = self.basis_of(f);
            (0..self.0.n).filter(|&p| !f.contains(p)).all(|p| {
                let mut gens = basis.clone();
                gens.push(p);
                self.local_closure(f, p, planes) == self.closure_ids(&gens)
            })
        })
    }
}
