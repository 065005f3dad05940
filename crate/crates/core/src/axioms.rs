//! Axiom checking for closure-space geometries.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::geometry::Geometry;
use crate::pointset::PointSet;

/// Points and point sets that exhibit a failed axiom. What each entry means
/// is stated in the check's `detail`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Witness {
    pub sets: Vec<Vec<usize>>,
    pub points: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AxiomCheck {
    pub axiom: &'static str,
    pub passed: bool,
    pub detail: String,
    pub witness: Option<Witness>,
}

impl AxiomCheck {
    pub fn pass(axiom: &'static str, detail: impl Into<String>) -> Self {
        AxiomCheck {
            axiom,
            passed: true,
            detail: detail.into(),
            witness: None,
        }
    }

    pub fn fail(axiom: &'static str, detail: impl Into<String>, witness: Witness) -> Self {
        AxiomCheck {
            axiom,
            passed: false,
            detail: detail.into(),
            witness: Some(witness),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct AxiomReport {
    pub checks: Vec<AxiomCheck>,
}

impl AxiomReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn get(&self, axiom: &str) -> Option<&AxiomCheck> {
        self.checks.iter().find(|c| c.axiom == axiom)
    }

    pub fn passed(&self, axiom: &str) -> bool {
        self.get(axiom).is_some_and(|c| c.passed)
    }
}

/// Checks G1 (empty set, whole set and points are flats), G2 (flats are
/// closed under intersection), G3 (exchange) and G4 (finitary, automatic on
/// finite sets) against the geometry's family of flats.
pub fn check_axioms(g: &Geometry) -> AxiomReport {
    let flats = g.flats();
    let family: BTreeSet<&PointSet> = flats.iter().collect();
    let mut checks = Vec::new();

    let mut required = vec![g.empty_set(), g.all_points()];
    required.extend((0..g.n_points()).map(|p| g.set_of([p])));
    checks.push(match required.iter().find(|s| !family.contains(s)) {
        None => AxiomCheck::pass("G1", "empty set, whole set and every point are flats"),
        Some(s) => AxiomCheck::fail(
            "G1",
            "this set must be a flat but is not listed",
            Witness {
                sets: vec![s.to_vec()],
                points: vec![],
            },
        ),
    });

    let mut g2 = None;
    'outer: for (i, a) in flats.iter().enumerate() {
        for b in &flats[i + 1..] {
            if !family.contains(&a.intersection(b)) {
                g2 = Some((a, b));
                break 'outer;
            }
        }
    }
    checks.push(match g2 {
        None => AxiomCheck::pass("G2", "intersection of any two flats is a flat"),
        Some((a, b)) => AxiomCheck::fail(
            "G2",
            "the intersection of these two flats is not a flat",
            Witness {
                sets: vec![a.to_vec(), b.to_vec()],
                points: vec![],
            },
        ),
    });

    checks.push(match exchange_violation(g) {
        None => AxiomCheck::pass(
            "G3",
            "exchange holds for every flat and pair of outside points",
        ),
        Some((s, x, y)) => AxiomCheck::fail(
            "G3",
            format!("y = {y} lies in S v x but x = {x} is not in S v y"),
            Witness {
                sets: vec![s.to_vec()],
                points: vec![x, y],
            },
        ),
    });

    checks.push(AxiomCheck::pass(
        "G4",
        "pass (finite): every closure is already the closure of a finite subset",
    ));
    AxiomReport { checks }
}

/// Searches for a flat `S` and points `x, y` outside it with
/// `y ∈ S ∨ x` but `x ∉ S ∨ y`.
///
/// For each flat the points outside it are swept into classes `(S ∨ x) \ S`.
/// Exchange holds at `S` exactly when these classes are disjoint and every
/// member `y` of the class of `x` has `x ∈ S ∨ y`.
pub fn exchange_violation(g: &Geometry) -> Option<(PointSet, usize, usize)> {
    let n = g.n_points();
    for s in g.flats() {
        let basis = g.basis_of(s);
        let mut owner = vec![usize::MAX; n];
        for x in 0..n {
            if s.contains(x) || owner[x] != usize::MAX {
                continue;
            }
            let mut gens = basis.clone();
            gens.push(x);
            let t = g.closure_ids(&gens);
            for y in t.iter().filter(|&y| !s.contains(y) && y != x) {
                if owner[y] != usize::MAX {
                    // y is already in another class, whose span misses x.
                    return Some((s.clone(), x, y));
                }
                let mut gy = basis.clone();
                gy.push(y);
                if !g.in_closure(&gy, x) {
                    return Some((s.clone(), x, y));
                }
                owner[y] = x;
            }
            owner[x] = x;
        }
    }
    None
}
