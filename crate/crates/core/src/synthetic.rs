//! Incidence structures given by points and lines, and the synthetic
//! axioms for affine spaces (with parallelism) and projective spaces.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::axioms::{AxiomCheck, AxiomReport, Witness};
use crate::geometry::Geometry;
use crate::pointset::PointSet;
use crate::search::parallel_classes;

/// Points `0..n_points` and a list of lines.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Incidence {
    pub n_points: usize,
    pub lines: Vec<Vec<usize>>,
}

/// An incidence structure whose lines carry a parallelism class id.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SyntheticIncidence {
    pub incidence: Incidence,
    /// `parallel[i]` is the class of line `i`; equal ids mean parallel.
    pub parallel: Vec<usize>,
}

impl Incidence {
    /// The lines of any geometry.
    pub fn of_geometry(g: &Geometry) -> Self {
        Incidence {
            n_points: g.n_points(),
            lines: g.lines().iter().map(PointSet::to_vec).collect(),
        }
    }

    fn line_sets(&self) -> Vec<PointSet> {
        self.lines
            .iter()
            .map(|l| PointSet::from_ids(self.n_points, l.iter().copied()))
            .collect()
    }

    /// For each ordered pair of distinct points, the lines containing both.
    fn joins(&self) -> Vec<Vec<usize>> {
        let n = self.n_points;
        let mut joins = vec![Vec::new(); n * n];
        for (i, l) in self.lines.iter().enumerate() {
            for &a in l {
                for &b in l {
                    if a != b && !joins[a * n + b].contains(&i) {
                        joins[a * n + b].push(i);
                    }
                }
            }
        }
        joins
    }

    fn unique_join_check(&self, axiom: &'static str, joins: &[Vec<usize>]) -> AxiomCheck {
        let n = self.n_points;
        for a in 0..n {
            for b in a + 1..n {
                let j = &joins[a * n + b];
                if j.len() != 1 {
                    return AxiomCheck::fail(
                        axiom,
                        format!("points {a} and {b} lie on {} lines", j.len()),
                        Witness {
                            sets: j.iter().map(|&l| self.lines[l].clone()).collect(),
                            points: vec![a, b],
                        },
                    );
                }
            }
        }
        AxiomCheck::pass(axiom, "any two distinct points lie on exactly one line")
    }

    fn min_line_size_check(&self, axiom: &'static str, min: usize) -> AxiomCheck {
        match self.lines.iter().find(|l| l.len() < min) {
            Some(l) => AxiomCheck::fail(
                axiom,
                format!("a line has fewer than {min} points"),
                Witness {
                    sets: vec![l.clone()],
                    points: vec![],
                },
            ),
            None => AxiomCheck::pass(axiom, format!("every line has at least {min} points")),
        }
    }
}

impl SyntheticIncidence {
    /// Lines of an affine space with parallelism by direction.
    pub fn of_affine(g: &Geometry) -> Self {
        let classes = parallel_classes(g);
        let mut parallel = vec![0; g.lines().len()];
        for (c, class) in classes.iter().enumerate() {
            for &l in class {
                parallel[l] = c;
            }
        }
        SyntheticIncidence {
            incidence: Incidence::of_geometry(g),
            parallel,
        }
    }

    /// Lines of any geometry with each line parallel only to itself.
    pub fn trivial_parallelism(g: &Geometry) -> Self {
        let incidence = Incidence::of_geometry(g);
        let parallel = (0..incidence.lines.len()).collect();
        SyntheticIncidence {
            incidence,
            parallel,
        }
    }

    /// Drops one line, keeping the parallel classes of the others.
    pub fn without_line(&self, line: usize) -> Self {
        let mut s = self.clone();
        s.incidence.lines.remove(line);
        s.parallel.remove(line);
        s
    }
}

/// Checks A1 (unique join), A2 (every line has at least two points), A3
/// (unique parallel through each point) and A4 (similar triangles), plus
/// whether closure under joins alone already forces closure under parallels
/// when every line has at least three points.
pub fn synthetic_affine_check(s: &SyntheticIncidence) -> AxiomReport {
    let inc = &s.incidence;
    let n = inc.n_points;
    let joins = inc.joins();
    let sets = inc.line_sets();
    let mut checks = vec![
        inc.unique_join_check("A1", &joins),
        inc.min_line_size_check("A2", 2),
    ];

    let mut a3 = AxiomCheck::pass(
        "A3",
        "each line has exactly one parallel through every point",
    );
    'a3: for (l, _) in inc.lines.iter().enumerate() {
        for p in 0..n {
            let through: Vec<usize> = (0..inc.lines.len())
                .filter(|&m| s.parallel[m] == s.parallel[l] && sets[m].contains(p))
                .collect();
            if through.len() != 1 {
                a3 = AxiomCheck::fail(
                    "A3",
                    format!(
                        "{} lines parallel to the given line pass through point {p}",
                        through.len()
                    ),
                    Witness {
                        sets: vec![inc.lines[l].clone()],
                        points: vec![p],
                    },
                );
                break 'a3;
            }
        }
    }
    checks.push(a3);

    let join = |a: usize, b: usize| joins[a * n + b].first().copied();
    let par = |a: usize, b: usize, c: usize, d: usize| match (join(a, b), join(c, d)) {
        (Some(x), Some(y)) => s.parallel[x] == s.parallel[y],
        _ => false,
    };
    let mut a4 = AxiomCheck::pass(
        "A4",
        "similar triangles exist for every triangle and parallel segment",
    );
    'a4: for a in 0..n {
        for b in 0..n {
            let Some(ab) = join(a, b).filter(|_| a != b) else {
                continue;
            };
            for c in 0..n {
                if c == a || c == b || sets[ab].contains(c) {
                    continue;
                }
                for a2 in 0..n {
                    for b2 in 0..n {
                        if a2 == b2 || !par(a, b, a2, b2) {
                            continue;
                        }
                        let line = join(a2, b2).unwrap();
                        let ok = (0..n).any(|c2| {
                            !sets[line].contains(c2)
                                && c2 != a2
                                && c2 != b2
                                && par(a, c, a2, c2)
                                && par(b, c, b2, c2)
                        });
                        if !ok {
                            a4 = AxiomCheck::fail(
                                "A4",
                                "no similar triangle on the segment a'b'",
                                Witness {
                                    sets: vec![],
                                    points: vec![a, b, c, a2, b2],
                                },
                            );
                            break 'a4;
                        }
                    }
                }
            }
        }
    }
    checks.push(a4);
    checks.push(parallel_condition_check(s, &sets, &joins));
    AxiomReport { checks }
}

// Enumerates the sets closed under joins and checks each is also closed
// under taking parallels through its points.
fn parallel_condition_check(
    s: &SyntheticIncidence,
    sets: &[PointSet],
    joins: &[Vec<usize>],
) -> AxiomCheck {
    const NAME: &str = "parallels-from-joins";
    let inc = &s.incidence;
    let n = inc.n_points;
    if inc.lines.iter().any(|l| l.len() < 3) {
        return AxiomCheck::pass(
            NAME,
            "not applicable: some line has fewer than three points",
        );
    }
    let join_close = |start: &PointSet, p: usize| {
        let mut set = start.clone();
        let mut queue = vec![p];
        set.insert(p);
        while let Some(x) = queue.pop() {
            for y in set.to_vec() {
                if x == y {
                    continue;
                }
                for &l in &joins[x * n + y] {
                    for z in &sets[l] {
                        if set.insert(z) {
                            queue.push(z);
                        }
                    }
                }
            }
        }
        set
    };
    let mut seen = vec![PointSet::empty(n)];
    let mut frontier = vec![PointSet::empty(n)];
    while let Some(c) = frontier.pop() {
        for p in (0..n).filter(|&p| !c.contains(p)) {
            let next = join_close(&c, p);
            if !seen.contains(&next) {
                seen.push(next.clone());
                frontier.push(next);
            }
        }
    }
    for c in &seen {
        for (l, line) in sets.iter().enumerate() {
            if !line.is_subset(c) {
                continue;
            }
            for p in c.iter() {
                let through = (0..sets.len())
                    .find(|&m| s.parallel[m] == s.parallel[l] && sets[m].contains(p));
                if let Some(m) = through {
                    if !sets[m].is_subset(c) {
                        return AxiomCheck::fail(
                            NAME,
                            "a join-closed set misses the parallel through one of its points",
                            Witness {
                                sets: vec![c.to_vec(), inc.lines[l].clone()],
                                points: vec![p],
                            },
                        );
                    }
                }
            }
        }
    }
    AxiomCheck::pass(
        NAME,
        format!(
            "all {} join-closed sets contain the parallels through their points",
            seen.len()
        ),
    )
}

/// Checks P1 (unique join), P2 (every line has at least three points) and
/// P3: for a triangle `a, b, c`, any line meeting `ab` and `ac` away from
/// `a` meets `bc`.
pub fn veblen_young_check(inc: &Incidence) -> AxiomReport {
    let n = inc.n_points;
    let joins = inc.joins();
    let sets = inc.line_sets();
    let mut checks = vec![
        inc.unique_join_check("P1", &joins),
        inc.min_line_size_check("P2", 3),
    ];
    let join = |a: usize, b: usize| joins[a * n + b].first().copied();
    let mut p3 = AxiomCheck::pass(
        "P3",
        "every line meeting two sides of a triangle meets the third",
    );
    'p3: for a in 0..n {
        for b in 0..n {
            let Some(ab) = join(a, b).filter(|_| a != b) else {
                continue;
            };
            for c in (0..n).filter(|&c| c != a && c != b && !sets[ab].contains(c)) {
                let (Some(ac), Some(bc)) = (join(a, c), join(b, c)) else {
                    continue;
                };
                for x in sets[ab].iter().filter(|&x| x != a) {
                    for y in sets[ac].iter().filter(|&y| y != a) {
                        let Some(xy) = join(x, y) else { continue };
                        if sets[xy].is_disjoint(&sets[bc]) {
                            p3 = AxiomCheck::fail(
                                "P3",
                                "the line xy misses the side bc of triangle abc",
                                Witness {
                                    sets: vec![],
                                    points: vec![a, b, c, x, y],
                                },
                            );
                            break 'p3;
                        }
                    }
                }
            }
        }
    }
    checks.push(p3);
    AxiomReport { checks }
}
