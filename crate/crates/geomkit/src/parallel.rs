//! Enumeration spread over a rayon pool, one search subtree per task.
//!
//! Subtrees are independent and their results are merged in root order, so
//! the output does not depend on the number of workers.

use geomkit_core::affine::{compare_families, semiaffine_family, VerificationReport};
use geomkit_core::projective::projective_family;
use geomkit_core::search::{Enumerator, Filter, SearchOptions};
use geomkit_core::{Error, FiniteField, GeoMap, Geometry};
use rayon::prelude::*;

/// Runs `f` on a pool of `workers` threads; `0` means one per core.
pub fn with_workers<T: Send>(workers: usize, f: impl FnOnce() -> T + Send) -> T {
    match rayon::ThreadPoolBuilder::new().num_threads(workers).build() {
        Ok(pool) => pool.install(f),
        Err(_) => f(),
    }
}

#[derive(Clone, Debug)]
pub struct Enumeration {
    pub maps: Vec<GeoMap>,
    pub nodes: u64,
}

/// All maps the enumerator accepts, searched in parallel. The budget caps the
/// total number of node expansions across all subtrees.
pub fn enumerate(
    dom: &Geometry,
    cod: &Geometry,
    options: SearchOptions,
    workers: usize,
) -> Result<Enumeration, Error> {
    let e = Enumerator::new(dom, cod, options)?;
    let budget = options.budget;
    let results = with_workers(workers, || {
        e.roots()
            .into_par_iter()
            .map(|root| e.run_subtree(root))
            .collect::<Result<Vec<_>, _>>()
    })?;
    let nodes: u64 = results.iter().map(|r| r.nodes).sum();
    if nodes > budget {
        return Err(Error::SearchBudgetExceeded { budget });
    }
    let maps = e.finish(results.into_iter().flat_map(|r| r.maps).collect())?;
    Ok(Enumeration { maps, nodes })
}

fn tables(maps: &[GeoMap]) -> Vec<Vec<usize>> {
    maps.iter().map(|m| m.images().to_vec()).collect()
}

/// Parallel maps `AG(n,q) → AG(n2,q2)` with image not in a line, compared
/// with the constructed semiaffine maps.
pub fn ft_affine(
    q: u32,
    n: usize,
    q2: u32,
    n2: usize,
    budget: u64,
    workers: usize,
) -> Result<VerificationReport, Error> {
    let dom = Geometry::affine(&FiniteField::parse(&q.to_string())?, n);
    let cod = Geometry::affine(&FiniteField::parse(&q2.to_string())?, n2);
    let mut opts = SearchOptions::new(Filter::ImageNotInLine);
    opts.budget = budget;
    opts.parallel = true;
    let found = enumerate(&dom, &cod, opts, workers)?;
    let constructed = semiaffine_family(&dom, &cod)?;
    Ok(compare_families(
        &tables(&found.maps),
        &constructed,
        found.nodes,
    ))
}

/// Morphisms `PG(n,q) → PG(n2,q2)` with image not in a line, compared with
/// the maps induced by injective semilinear maps.
pub fn ft_projective(
    q: u32,
    n: usize,
    q2: u32,
    n2: usize,
    budget: u64,
    workers: usize,
) -> Result<VerificationReport, Error> {
    let dom = Geometry::projective(&FiniteField::parse(&q.to_string())?, n);
    let cod = Geometry::projective(&FiniteField::parse(&q2.to_string())?, n2);
    let mut opts = SearchOptions::new(Filter::ImageNotInLine);
    opts.budget = budget;
    let found = enumerate(&dom, &cod, opts, workers)?;
    let constructed = projective_family(&dom, &cod)?;
    Ok(compare_families(
        &tables(&found.maps),
        &constructed,
        found.nodes,
    ))
}
