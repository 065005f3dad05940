//! Exhaustive enumeration of morphisms between finite geometries.
//!
//! Images are assigned point by point in an order chosen so that lines fill
//! up early. Each line is governed by its first two points in that order:
//! equal images force the whole line to be constant, distinct images force
//! the remaining points onto the codomain line through them, pairwise
//! distinct. For domains that are not generated by lines the same is done
//! for planes, and a full morphism check runs on every completed map when
//! neither constraint family is decisive.
//!
//! The parallel search between affine spaces drops the morphism rules and
//! only asks each pair `(m0, x)` on a line to behave like the first pair of
//! its parallel class: equal images when that pair collapses, otherwise
//! distinct images in the same direction.
//!
//! The search tree is split by the image of the first point so callers can
//! run subtrees on separate threads; results are always sorted.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::Error;
use crate::field::Elem;
use crate::geometry::Geometry;
use crate::morphism::{GeoMap, MorphismChecker};
use crate::pointset::PointSet;

pub const DEFAULT_BUDGET: u64 = 1_000_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Filter {
    All,
    /// The image spans at least a plane.
    ImageNotInLine,
    Bijective,
    Constant,
}

impl Filter {
    pub fn name(self) -> &'static str {
        match self {
            Filter::All => "all",
            Filter::ImageNotInLine => "image_not_in_line",
            Filter::Bijective => "bijective",
            Filter::Constant => "constant",
        }
    }

    pub fn parse(s: &str) -> Option<Filter> {
        Some(match s {
            "all" => Filter::All,
            "image_not_in_line" | "image-not-in-line" => Filter::ImageNotInLine,
            "bijective" => Filter::Bijective,
            "constant" => Filter::Constant,
            _ => return None,
        })
    }
}

#[derive(Clone, Copy, Debug)]
pub struct SearchOptions {
    pub filter: Filter,
    /// Cap on node expansions (image assignments tried).
    pub budget: u64,
    /// Enumerate parallel maps between affine spaces instead of morphisms:
    /// on each parallel class of lines the map is constant on every line, or
    /// injective on every line with one common image direction. Being a
    /// morphism is not imposed.
    pub parallel: bool,
}

impl SearchOptions {
    pub fn new(filter: Filter) -> Self {
        SearchOptions {
            filter,
            budget: DEFAULT_BUDGET,
            parallel: false,
        }
    }
}

/// Maps found in one subtree and the nodes it expanded.
#[derive(Clone, Debug, Default)]
pub struct SubtreeResult {
    pub maps: Vec<Vec<usize>>,
    pub nodes: u64,
}

struct LineRule {
    a: usize,
    b: usize,
    /// Points of the line assigned before the current one, other than `a`, `b`.
    earlier: Vec<usize>,
}

struct PlaneRule {
    members: Vec<usize>,
    triples: Vec<[usize; 3]>,
}

struct ClassRule {
    /// First point of the line holding the point being assigned.
    a: usize,
    /// The class leader's first two points.
    la: usize,
    lb: usize,
    /// Points of the same line assigned before, other than `a`.
    earlier: Vec<usize>,
}

/// Codomain direction data for the parallel search.
struct Directions {
    /// Direction index of the line through two distinct points.
    of_pair: Vec<usize>,
    /// `through[p * count + d]` is the line through `p` with direction `d`.
    through: Vec<usize>,
    count: usize,
}

impl Directions {
    fn new(g: &Geometry) -> Self {
        let n = g.n_points();
        let classes = parallel_classes(g);
        let count = classes.len();
        let mut line_dir = vec![0; g.lines().len()];
        for (d, class) in classes.iter().enumerate() {
            for &l in class {
                line_dir[l] = d;
            }
        }
        let mut of_pair = vec![usize::MAX; n * n];
        let mut through = vec![usize::MAX; n * count];
        for (l, &d) in line_dir.iter().enumerate() {
            let m = g.line_members(l);
            for &a in m {
                through[a * count + d] = l;
                for &b in m {
                    if a != b {
                        of_pair[a * n + b] = d;
                    }
                }
            }
        }
        Directions {
            of_pair,
            through,
            count,
        }
    }
}

struct Step {
    point: usize,
    lines: Vec<LineRule>,
    planes: Vec<PlaneRule>,
    classes: Vec<ClassRule>,
}

pub struct Enumerator {
    domain: Geometry,
    codomain: Geometry,
    checker: MorphismChecker,
    options: SearchOptions,
    steps: Vec<Step>,
    decisive: bool,
    directions: Option<Directions>,
}

impl Enumerator {
    pub fn new(
        domain: &Geometry,
        codomain: &Geometry,
        options: SearchOptions,
    ) -> Result<Self, Error> {
        if options.parallel && !(domain.is_affine() && codomain.is_affine()) {
            return Err(Error::InvalidInput(
                "parallel search needs affine domain and codomain".into(),
            ));
        }
        let parallel = options.parallel;
        let by_lines = !parallel && domain.generated_by_lines();
        let by_planes = !parallel && !by_lines && domain.generated_by_lines_and_planes();
        let order = assignment_order(domain);
        let mut pos = vec![0; domain.n_points()];
        for (i, &p) in order.iter().enumerate() {
            pos[p] = i;
        }
        let mut steps: Vec<Step> = order
            .iter()
            .map(|&p| Step {
                point: p,
                lines: Vec::new(),
                planes: Vec::new(),
                classes: Vec::new(),
            })
            .collect();
        let sorted_line = |l: usize| {
            let mut m = domain.line_members(l).to_vec();
            m.sort_by_key(|&p| pos[p]);
            m
        };

        if !parallel {
            for l in 0..domain.lines().len() {
                let m = sorted_line(l);
                for k in 2..m.len() {
                    steps[pos[m[k]]].lines.push(LineRule {
                        a: m[0],
                        b: m[1],
                        earlier: m[2..k].to_vec(),
                    });
                }
            }
        }

        if by_planes {
            for plane in domain.flats_of_dim(2) {
                let members = plane.points().to_vec();
                let last = *members.iter().max_by_key(|&&p| pos[p]).unwrap();
                let mut triples = Vec::new();
                for i in 0..members.len() {
                    for j in i + 1..members.len() {
                        for k in j + 1..members.len() {
                            let t = [members[i], members[j], members[k]];
                            if domain.rank(&t) == 3 {
                                triples.push(t);
                            }
                        }
                    }
                }
                steps[pos[last]].planes.push(PlaneRule { members, triples });
            }
        }

        if parallel {
            for class in parallel_classes(domain) {
                let mut lines: Vec<Vec<usize>> = class.iter().map(|&l| sorted_line(l)).collect();
                lines.sort_by_key(|m| pos[m[1]]);
                let (la, lb) = (lines[0][0], lines[0][1]);
                for m in &lines {
                    for k in 1..m.len() {
                        if m[k] == lb {
                            continue;
                        }
                        steps[pos[m[k]]].classes.push(ClassRule {
                            a: m[0],
                            la,
                            lb,
                            earlier: m[1..k].to_vec(),
                        });
                    }
                }
            }
        }

        Ok(Enumerator {
            domain: domain.clone(),
            codomain: codomain.clone(),
            checker: MorphismChecker::new(domain, codomain),
            options,
            steps,
            decisive: parallel || by_lines || by_planes,
            directions: parallel.then(|| Directions::new(codomain)),
        })
    }

    pub fn options(&self) -> &SearchOptions {
        &self.options
    }

    /// Image choices for the first point; one subtree each.
    pub fn roots(&self) -> Vec<usize> {
        if self.steps.is_empty() {
            return Vec::new();
        }
        (0..self.codomain.n_points()).collect()
    }

    /// Explores the subtree where the first point maps to `root`.
    pub fn run_subtree(&self, root: usize) -> Result<SubtreeResult, Error> {
        if self.options.filter == Filter::Bijective
            && self.domain.n_points() != self.codomain.n_points()
        {
            return Ok(SubtreeResult::default());
        }
        let mut state = State {
            images: vec![usize::MAX; self.domain.n_points()],
            used: PointSet::empty(self.codomain.n_points()),
            nodes: 0,
            maps: Vec::new(),
        };
        self.descend(0, Some(root), &mut state)?;
        Ok(SubtreeResult {
            maps: state.maps,
            nodes: state.nodes,
        })
    }

    /// Runs every subtree in order and returns the sorted maps.
    pub fn run(&self) -> Result<Vec<GeoMap>, Error> {
        let mut all = Vec::new();
        let mut nodes = 0u64;
        for root in self.roots() {
            let r = self.run_subtree(root)?;
            nodes += r.nodes;
            if nodes > self.options.budget {
                return Err(Error::SearchBudgetExceeded {
                    budget: self.options.budget,
                });
            }
            all.extend(r.maps);
        }
        self.finish(all)
    }

    /// Sorts raw image tables and wraps them as maps.
    pub fn finish(&self, mut maps: Vec<Vec<usize>>) -> Result<Vec<GeoMap>, Error> {
        maps.sort();
        maps.into_iter()
            .map(|m| GeoMap::new(&self.domain, &self.codomain, m))
            .collect()
    }

    fn descend(&self, depth: usize, forced: Option<usize>, st: &mut State) -> Result<(), Error> {
        if depth == self.steps.len() {
            self.accept(st);
            return Ok(());
        }
        let step = &self.steps[depth];
        let candidates: Vec<usize> = match forced {
            Some(r) => vec![r],
            None => self.candidates(step, st),
        };
        for y in candidates {
            st.nodes += 1;
            if st.nodes > self.options.budget {
                return Err(Error::SearchBudgetExceeded {
                    budget: self.options.budget,
                });
            }
            if !self.admissible(step, y, st) {
                continue;
            }
            st.images[step.point] = y;
            let fresh = st.used.insert(y);
            self.descend(depth + 1, None, st)?;
            if fresh {
                st.used.remove(y);
            }
            st.images[step.point] = usize::MAX;
        }
        Ok(())
    }

    fn candidates(&self, step: &Step, st: &State) -> Vec<usize> {
        if self.options.filter == Filter::Constant {
            return vec![st.images[self.steps[0].point]];
        }
        let mut pool: Option<PointSet> = None;
        for rule in &step.lines {
            let (ia, ib) = (st.images[rule.a], st.images[rule.b]);
            if ia == ib {
                return vec![ia];
            }
            let line = self.codomain.line_through(ia, ib);
            match &mut pool {
                Some(p) => p.intersect_with(line),
                None => pool = Some(line.clone()),
            }
        }
        if let Some(dirs) = &self.directions {
            let n = self.codomain.n_points();
            for rule in &step.classes {
                let (la, lb) = (st.images[rule.la], st.images[rule.lb]);
                let ia = st.images[rule.a];
                if la == lb {
                    return vec![ia];
                }
                let d = dirs.of_pair[la * n + lb];
                let target = self.codomain.lines()[dirs.through[ia * dirs.count + d]].clone();
                match &mut pool {
                    Some(p) => p.intersect_with(&target),
                    None => pool = Some(target),
                }
            }
        }
        match pool {
            Some(p) => p.to_vec(),
            None => (0..self.codomain.n_points()).collect(),
        }
    }

    fn admissible(&self, step: &Step, y: usize, st: &State) -> bool {
        if self.options.filter == Filter::Bijective && st.used.contains(y) {
            return false;
        }
        for rule in &step.lines {
            let (ia, ib) = (st.images[rule.a], st.images[rule.b]);
            if ia == ib {
                if y != ia {
                    return false;
                }
            } else if y == ia
                || y == ib
                || rule.earlier.iter().any(|&e| st.images[e] == y)
                || !self.codomain.line_through(ia, ib).contains(y)
            {
                return false;
            }
        }
        if let Some(dirs) = &self.directions {
            let n = self.codomain.n_points();
            for rule in &step.classes {
                let (la, lb) = (st.images[rule.la], st.images[rule.lb]);
                let ia = st.images[rule.a];
                if la == lb {
                    if y != ia {
                        return false;
                    }
                } else if y == ia
                    || dirs.of_pair[ia * n + y] != dirs.of_pair[la * n + lb]
                    || rule.earlier.iter().any(|&e| st.images[e] == y)
                {
                    return false;
                }
            }
        }
        if !step.planes.is_empty() {
            let img = |x: usize| if x == step.point { y } else { st.images[x] };
            for plane in &step.planes {
                for t in &plane.triples {
                    let it = [img(t[0]), img(t[1]), img(t[2])];
                    if plane
                        .members
                        .iter()
                        .any(|&x| !self.codomain.in_closure(&it, img(x)))
                    {
                        return false;
                    }
                }
            }
        }
        true
    }

    fn accept(&self, st: &mut State) {
        let images = &st.images;
        let keep = match self.options.filter {
            Filter::All | Filter::Constant | Filter::Bijective => true,
            Filter::ImageNotInLine => {
                let mut distinct = images.clone();
                distinct.sort_unstable();
                distinct.dedup();
                self.codomain.rank(&distinct) >= 3
            }
        };
        if keep && (self.decisive || self.checker.is_morphism(images)) {
            st.maps.push(images.clone());
        }
    }
}

struct State {
    images: Vec<usize>,
    used: PointSet,
    nodes: u64,
    maps: Vec<Vec<usize>>,
}

/// Greedy order: repeatedly take the point lying on the most lines that
/// already hold two ordered points, then on the most lines holding one.
fn assignment_order(g: &Geometry) -> Vec<usize> {
    let n = g.n_points();
    let mut order = Vec::with_capacity(n);
    let mut placed = vec![false; n];
    let mut count = vec![0usize; g.lines().len()];
    for _ in 0..n {
        let best = (0..n)
            .filter(|&p| !placed[p])
            .max_by_key(|&p| {
                let through = g.lines_through(p);
                let full = through.iter().filter(|&&l| count[l] >= 2).count();
                let half = through.iter().filter(|&&l| count[l] == 1).count();
                (full, half, core::cmp::Reverse(p))
            })
            .unwrap();
        placed[best] = true;
        order.push(best);
        for &l in g.lines_through(best) {
            count[l] += 1;
        }
    }
    order
}

/// Lines of an affine space grouped by direction, each group as line indices.
pub fn parallel_classes(g: &Geometry) -> Vec<Vec<usize>> {
    let f = g.field().expect("affine geometry").clone();
    let mut keyed: Vec<(Vec<Elem>, usize)> = (0..g.lines().len())
        .map(|l| {
            let m = g.line_members(l);
            let d = f.sub_vec(g.coords(m[1]).unwrap(), g.coords(m[0]).unwrap());
            (f.normalize(&d).unwrap(), l)
        })
        .collect();
    keyed.sort();
    let mut out: Vec<Vec<usize>> = Vec::new();
    let mut last: Option<Vec<Elem>> = None;
    for (d, l) in keyed {
        if last.as_ref() != Some(&d) {
            out.push(Vec::new());
            last = Some(d);
        }
        out.last_mut().unwrap().push(l);
    }
    out
}

/// Sequential enumeration with the default budget.
pub fn enumerate_morphisms(
    domain: &Geometry,
    codomain: &Geometry,
    filter: Filter,
) -> Result<Vec<GeoMap>, Error> {
    Enumerator::new(domain, codomain, SearchOptions::new(filter))?.run()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::FiniteField;

    #[test]
    fn fano_counts() {
        let f2 = FiniteField::new(2, 1).unwrap();
        let g = Geometry::projective(&f2, 2);
        assert_eq!(
            enumerate_morphisms(&g, &g, Filter::ImageNotInLine)
                .unwrap()
                .len(),
            168
        );
        assert_eq!(
            enumerate_morphisms(&g, &g, Filter::Constant).unwrap().len(),
            7
        );
        assert_eq!(
            enumerate_morphisms(&g, &g, Filter::Bijective)
                .unwrap()
                .len(),
            168
        );
    }

    #[test]
    fn tiny_budget_is_reported() {
        let f3 = FiniteField::new(3, 1).unwrap();
        let g = Geometry::affine(&f3, 2);
        let mut opts = SearchOptions::new(Filter::All);
        opts.budget = 100;
        let e = Enumerator::new(&g, &g, opts).unwrap();
        assert_eq!(
            e.run().unwrap_err(),
            Error::SearchBudgetExceeded { budget: 100 }
        );
    }
}
