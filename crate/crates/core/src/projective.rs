//! Projective spaces: maps induced by semilinear maps, recovery of the
//! semilinear map behind a morphism, and the conditions describing partial
//! projective morphisms.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::affine::{compare_families, SemilinearMap, VerificationReport};
use crate::error::Error;
use crate::field::{field_morphisms, Elem, FiniteField};
use crate::geometry::{Geometry, Kind};
use crate::linalg::{for_each_combination, Matrix};
use crate::morphism::{GeoMap, PartialGeoMap};
use crate::search::{Enumerator, Filter, SearchOptions};

fn projective_parts(g: &Geometry) -> Result<(&alloc::sync::Arc<FiniteField>, usize), Error> {
    match g.kind() {
        Kind::Projective { field, dim } => Ok((field, dim)),
        _ => Err(Error::InvalidInput("expected a projective space".into())),
    }
}

/// The partial map `⟨v⟩ ↦ ⟨Φ(v)⟩`, undefined on the projectivized kernel.
pub fn projectivize_map(
    phi: &SemilinearMap,
    domain: &Geometry,
    codomain: &Geometry,
) -> Result<PartialGeoMap, Error> {
    let (k, n) = projective_parts(domain)?;
    let (k2, n2) = projective_parts(codomain)?;
    if phi.sigma().source() != k
        || phi.sigma().target() != k2
        || phi.source_dim() != n + 1
        || phi.target_dim() != n2 + 1
    {
        return Err(Error::DimensionMismatch);
    }
    if phi.is_zero() {
        return Err(Error::ZeroMap);
    }
    let images = (0..domain.n_points())
        .map(|x| codomain.projective_id(&phi.apply(domain.coords(x).unwrap())))
        .collect();
    PartialGeoMap::new(domain, codomain, images)
}

/// Finds a semilinear `Φ` inducing a morphism whose image is not contained
/// in a line, scaled so that `Φ(e_0)` is a normalized vector. Uses the
/// standard frame `e_0, ..., e_n, e_0 + ... + e_n`.
pub fn recover_semilinear(phi: &GeoMap) -> Result<SemilinearMap, Error> {
    let dom = phi.domain();
    let (_, n) = projective_parts(dom)?;
    let mut frame: Vec<usize> = (0..=n)
        .map(|i| {
            let mut e = vec![0; n + 1];
            e[i] = 1;
            dom.projective_id(&e).unwrap()
        })
        .collect();
    frame.push(dom.projective_id(&vec![1; n + 1]).unwrap());
    recover_semilinear_with_frame(phi, &frame)
}

/// As [`recover_semilinear`] with any frame of `n + 2` points in general
/// position. Vectors `f_i` for the first `n + 1` points are scaled so that
/// they sum to a vector of the last. The images then fix `Φ` up to `σ` and
/// scalars `c_i` with `Φ(f_i) = c_i w_i` and `Σ c_i w_i = μ w_u`; every
/// solution with `c_0 = 1` is tried against every field morphism and
/// validated on all points.
pub fn recover_semilinear_with_frame(
    phi: &GeoMap,
    frame: &[usize],
) -> Result<SemilinearMap, Error> {
    let (dom, cod) = (phi.domain(), phi.codomain());
    let (k, n) = projective_parts(dom)?;
    let (k2, _) = projective_parts(cod)?;
    if !phi.image_not_in_line() {
        return Err(Error::DegenerateImage);
    }
    let width = n + 1;
    let bad_frame = || Error::Precondition("frame points are not in general position".into());
    if frame.len() != width + 1 || frame.iter().any(|&p| p >= dom.n_points()) {
        return Err(bad_frame());
    }
    let basis: Vec<Vec<Elem>> = frame[..width]
        .iter()
        .map(|&p| dom.coords(p).unwrap().to_vec())
        .collect();
    let f = Matrix::from_columns(k, &basis)?;
    let (a, _) = f
        .solve(dom.coords(frame[width]).unwrap())
        .ok_or_else(bad_frame)?;
    if !f.is_invertible() || a.contains(&0) {
        return Err(bad_frame());
    }
    let scaled: Vec<Vec<Elem>> = (0..width).map(|i| k.scale(a[i], &basis[i])).collect();
    let f = Matrix::from_columns(k, &scaled)?;

    let image = |p: usize| cod.coords(phi.apply(p)).unwrap().to_vec();
    let w: Vec<Vec<Elem>> = frame[..width].iter().map(|&p| image(p)).collect();
    let mut cols = w.clone();
    cols.push(image(frame[width]));
    let kernel = Matrix::from_columns(k2, &cols)?.kernel();
    let sigmas = field_morphisms(k, k2);
    let inverses: Vec<Matrix> = sigmas
        .iter()
        .map(|s| {
            f.map_entries(s)
                .inverse()
                .expect("σ preserves invertibility")
        })
        .collect();

    let mut found = None;
    for_each_combination(k2, &kernel, width + 1, |sol| {
        if found.is_some() || sol[0] != 1 {
            return;
        }
        let columns: Vec<Vec<Elem>> = (0..width).map(|i| k2.scale(sol[i], &w[i])).collect();
        let c = Matrix::from_columns(k2, &columns).expect("square shape");
        for (sigma, inv) in sigmas.iter().zip(&inverses) {
            let m = c.mul(inv).expect("shapes agree");
            let candidate = SemilinearMap::new(m, sigma.clone()).expect("fields match");
            let ok = (0..dom.n_points()).all(|x| {
                cod.projective_id(&candidate.apply(dom.coords(x).unwrap())) == Some(phi.apply(x))
            });
            if ok {
                found = Some(candidate);
                return;
            }
        }
    });
    let found = found.ok_or(Error::NoSemilinearModel)?;
    let lead = found
        .matrix()
        .column(0)
        .into_iter()
        .find(|&x| x != 0)
        .unwrap_or(1);
    Ok(found.scale(k2.inv(lead).unwrap()))
}

/// Image tables of all total maps `PG(n,K) → PG(n',K')` induced by
/// injective semilinear maps whose image is not contained in a line.
/// Proportional matrices give the same table and are merged.
pub fn projective_family(domain: &Geometry, codomain: &Geometry) -> Result<Vec<Vec<usize>>, Error> {
    let (k, n) = projective_parts(domain)?;
    let (k2, n2) = projective_parts(codomain)?;
    let mut out = Vec::new();
    for sigma in field_morphisms(k, k2) {
        let lifted: Vec<Vec<Elem>> = (0..domain.n_points())
            .map(|p| sigma.apply_vec(domain.coords(p).unwrap()))
            .collect();
        'm: for m in Matrix::enumerate_all(k2, n2 + 1, n + 1) {
            // Normalized representatives suffice: skip matrices whose first
            // nonzero entry is not 1.
            let first = (0..m.rows())
                .flat_map(|r| (0..m.cols()).map(move |c| (r, c)))
                .map(|(r, c)| m.get(r, c))
                .find(|&x| x != 0);
            if first != Some(1) || m.rank() < 3 {
                continue;
            }
            let mut table = Vec::with_capacity(lifted.len());
            for v in &lifted {
                match codomain.projective_id(&m.mul_vec(v)) {
                    Some(id) => table.push(id),
                    None => continue 'm,
                }
            }
            out.push(table);
        }
    }
    out.sort();
    out.dedup();
    Ok(out)
}

/// Enumerates morphisms `PG(n,q) → PG(n2,q2)` with image not in a line and
/// compares them with the maps induced by injective semilinear maps.
pub fn ft_projective_verify(
    q: u32,
    n: usize,
    q2: u32,
    n2: usize,
    budget: u64,
) -> Result<VerificationReport, Error> {
    let k = FiniteField::parse(&format!("{q}"))?;
    let k2 = FiniteField::parse(&format!("{q2}"))?;
    let dom = Geometry::projective(&k, n);
    let cod = Geometry::projective(&k2, n2);
    let mut opts = SearchOptions::new(Filter::ImageNotInLine);
    opts.budget = budget;
    let e = Enumerator::new(&dom, &cod, opts)?;
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
    let constructed = projective_family(&dom, &cod)?;
    Ok(compare_families(&maps, &constructed, nodes))
}

/// Verdicts on the two conditions characterizing partial projective morphisms.
///
/// `b1`: for `x0, x1, x2` off `E`, `x0 ∈ x1 ∨ x2` implies
/// `φ(x0) ∈ φ(x1) ∨ φ(x2)`; witness `[x0, x1, x2]`.
/// `b2`: for distinct `x1, x2` off `E` whose line meets `E`,
/// `φ(x1) = φ(x2)`; witness `[x1, x2, e]` with `e` on the line and in `E`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct B1B2Report {
    pub b1: bool,
    pub b2: bool,
    pub b1_witness: Option<[usize; 3]>,
    pub b2_witness: Option<[usize; 3]>,
}

impl B1B2Report {
    pub fn holds(&self) -> bool {
        self.b1 && self.b2
    }
}

pub fn check_b1_b2(phi: &PartialGeoMap) -> Result<B1B2Report, Error> {
    projective_parts(phi.domain())?;
    Ok(b1_b2_on_lines(phi, 0..phi.domain().lines().len()))
}

/// The (b1)/(b2) verdicts restricted to some lines of the domain. Both
/// conditions only involve triples on a common line, so checking the lines
/// through a point suffices after changing the value at that point.
pub fn b1_b2_on_lines(phi: &PartialGeoMap, lines: impl IntoIterator<Item = usize>) -> B1B2Report {
    let dom = phi.domain();
    let cod = phi.codomain();
    let e = phi.exceptional();
    let mut b1_witness = None;
    let mut b2_witness = None;
    for l in lines {
        if b1_witness.is_some() && b2_witness.is_some() {
            break;
        }
        let members = dom.line_members(l);
        let off: Vec<usize> = members
            .iter()
            .copied()
            .filter(|&x| !e.contains(x))
            .collect();
        if b2_witness.is_none() {
            if let Some(&ex) = members.iter().find(|&&x| e.contains(x)) {
                if let Some(&x2) = off.iter().find(|&&x| phi.apply(x) != phi.apply(off[0])) {
                    b2_witness = Some([off[0], x2, ex]);
                }
            }
        }
        if b1_witness.is_none() {
            'pairs: for i in 0..off.len() {
                for &x2 in &off[i + 1..] {
                    let x1 = off[i];
                    let (y1, y2) = (phi.apply(x1).unwrap(), phi.apply(x2).unwrap());
                    for &x0 in &off {
                        let y0 = phi.apply(x0).unwrap();
                        let ok = if y1 == y2 {
                            y0 == y1
                        } else {
                            cod.line_through(y1, y2).contains(y0)
                        };
                        if !ok {
                            b1_witness = Some([x0, x1, x2]);
                            break 'pairs;
                        }
                    }
                }
            }
        }
    }
    B1B2Report {
        b1: b1_witness.is_none(),
        b2: b2_witness.is_none(),
        b1_witness,
        b2_witness,
    }
}
