//! JSON file formats for geometries, maps and the results built on them.

use std::collections::BTreeMap;
use std::sync::Arc;

use geomkit_core::affine::{SemiaffineDecomposition, SemilinearMap};
use geomkit_core::axioms::AxiomReport;
use geomkit_core::closure_ext::{ExtensionOutcome, ExtensionResult, FractionalDecomposition};
use geomkit_core::geometry::Kind;
use geomkit_core::synthetic::{Incidence, SyntheticIncidence};
use geomkit_core::{
    field_morphisms, Elem, Error, FieldMorphism, FiniteField, GeoMap, Geometry, Matrix,
    PartialGeoMap,
};
use serde::{Deserialize, Serialize};

/// A field order written as a number (`9`) or a power (`"3^2"`).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum FieldSpec {
    Order(u32),
    Text(String),
}

impl FieldSpec {
    pub fn field(&self) -> Result<Arc<FiniteField>, Error> {
        match self {
            FieldSpec::Order(q) => FiniteField::parse(&q.to_string()),
            FieldSpec::Text(s) => FiniteField::parse(s),
        }
    }

    fn of(field: &FiniteField) -> Self {
        FieldSpec::Text(field.order().to_string())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum GeometrySpec {
    /// Point labels and the full list of flats, as point indices.
    Explicit {
        points: Vec<String>,
        flats: Vec<Vec<usize>>,
        /// Set when the geometry was built as a quotient.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        quotient_of: Option<Box<GeometrySpec>>,
        #[serde(rename = "E", default, skip_serializing_if = "Option::is_none")]
        exceptional: Option<Vec<usize>>,
    },
    Affine {
        q: FieldSpec,
        dim: usize,
    },
    Projective {
        q: FieldSpec,
        dim: usize,
    },
}

impl GeometrySpec {
    pub fn build(&self) -> Result<Geometry, Error> {
        match self {
            GeometrySpec::Explicit { points, flats, .. } => {
                Geometry::explicit(points.clone(), flats.clone())
            }
            GeometrySpec::Affine { q, dim } => Ok(Geometry::affine(&q.field()?, *dim)),
            GeometrySpec::Projective { q, dim } => Ok(Geometry::projective(&q.field()?, *dim)),
        }
    }

    pub fn of(g: &Geometry) -> Self {
        match g.kind() {
            Kind::Affine { field, dim } => GeometrySpec::Affine {
                q: FieldSpec::of(field),
                dim,
            },
            Kind::Projective { field, dim } => GeometrySpec::Projective {
                q: FieldSpec::of(field),
                dim,
            },
            Kind::Quotient {
                parent,
                exceptional,
                ..
            } => GeometrySpec::Explicit {
                points: labels(g),
                flats: flats(g),
                quotient_of: Some(Box::new(GeometrySpec::of(parent))),
                exceptional: Some(exceptional.to_vec()),
            },
            _ => GeometrySpec::Explicit {
                points: labels(g),
                flats: flats(g),
                quotient_of: None,
                exceptional: None,
            },
        }
    }
}

fn labels(g: &Geometry) -> Vec<String> {
    (0..g.n_points()).map(|p| g.label(p)).collect()
}

fn flats(g: &Geometry) -> Vec<Vec<usize>> {
    g.flats().iter().map(|f| f.to_vec()).collect()
}

/// A total map given by its image table.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MapFile {
    pub domain: GeometrySpec,
    pub codomain: GeometrySpec,
    pub images: Vec<usize>,
}

impl MapFile {
    pub fn build(&self) -> Result<GeoMap, Error> {
        GeoMap::new(
            &self.domain.build()?,
            &self.codomain.build()?,
            self.images.clone(),
        )
    }

    pub fn of(phi: &GeoMap) -> Self {
        MapFile {
            domain: GeometrySpec::of(phi.domain()),
            codomain: GeometrySpec::of(phi.codomain()),
            images: phi.images().to_vec(),
        }
    }
}

/// A partial map: undefined exactly on `exceptional`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PartialMapFile {
    pub domain: GeometrySpec,
    pub codomain: GeometrySpec,
    pub exceptional: Vec<usize>,
    pub images: BTreeMap<usize, usize>,
}

impl PartialMapFile {
    pub fn build(&self) -> Result<PartialGeoMap, Error> {
        let dom = self.domain.build()?;
        let mut images = vec![None; dom.n_points()];
        for (&x, &y) in &self.images {
            *images.get_mut(x).ok_or(Error::UnknownPoint(x))? = Some(y);
        }
        let phi = PartialGeoMap::new(&dom, &self.codomain.build()?, images)?;
        if phi.exceptional().to_vec() != self.exceptional {
            return Err(Error::InvalidInput(
                "exceptional set does not match the undefined points".into(),
            ));
        }
        Ok(phi)
    }

    pub fn of(phi: &PartialGeoMap) -> Self {
        PartialMapFile {
            domain: GeometrySpec::of(phi.domain()),
            codomain: GeometrySpec::of(phi.codomain()),
            exceptional: phi.exceptional().to_vec(),
            images: phi
                .images()
                .iter()
                .enumerate()
                .filter_map(|(x, y)| y.map(|y| (x, y)))
                .collect(),
        }
    }
}

/// `v ↦ M·σ(v)`; `sigma` is a label such as `"frobenius^1"`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SemilinearFile {
    pub matrix: Vec<Vec<Elem>>,
    pub sigma: String,
}

impl SemilinearFile {
    pub fn of(s: &SemilinearMap) -> Self {
        SemilinearFile {
            matrix: s.matrix().to_rows(),
            sigma: s.sigma().label(),
        }
    }

    pub fn build(
        &self,
        source: &Arc<FiniteField>,
        target: &Arc<FiniteField>,
    ) -> Result<SemilinearMap, Error> {
        let sigma = parse_sigma(source, target, &self.sigma)?;
        SemilinearMap::new(Matrix::from_rows(target, &self.matrix)?, sigma)
    }
}

pub fn parse_sigma(
    source: &Arc<FiniteField>,
    target: &Arc<FiniteField>,
    label: &str,
) -> Result<FieldMorphism, Error> {
    field_morphisms(source, target)
        .into_iter()
        .find(|s| s.label() == label)
        .ok_or_else(|| Error::InvalidInput(format!("no field morphism named {label:?}")))
}

/// `v ↦ M·σ(v) + a`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SemiaffineFile {
    pub matrix: Vec<Vec<Elem>>,
    pub sigma: String,
    pub translation: Vec<Elem>,
}

impl SemiaffineFile {
    pub fn of(d: &SemiaffineDecomposition) -> Self {
        SemiaffineFile {
            matrix: d.differential.matrix().to_rows(),
            sigma: d.sigma().label(),
            translation: d.translation.clone(),
        }
    }
}

/// `v ↦ (1 + ω(v))⁻¹ Ψ(v)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FractionalFile {
    pub psi: SemilinearFile,
    pub omega: SemilinearFile,
}

impl FractionalFile {
    pub fn of(d: &FractionalDecomposition) -> Self {
        FractionalFile {
            psi: SemilinearFile::of(&d.psi),
            omega: SemilinearFile::of(&d.omega),
        }
    }

    pub fn build(
        &self,
        source: &Arc<FiniteField>,
        target: &Arc<FiniteField>,
    ) -> Result<FractionalDecomposition, Error> {
        FractionalDecomposition::new(
            self.psi.build(source, target)?,
            self.omega.build(source, target)?,
        )
    }
}

/// Lines given as point lists; `parallel[i]` is the class of line `i`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct IncidenceFile {
    pub points: usize,
    pub lines: Vec<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub parallel: Option<Vec<usize>>,
}

impl IncidenceFile {
    pub fn incidence(&self) -> Result<Incidence, Error> {
        if let Some(&bad) = self.lines.iter().flatten().find(|&&p| p >= self.points) {
            return Err(Error::UnknownPoint(bad));
        }
        Ok(Incidence {
            n_points: self.points,
            lines: self.lines.clone(),
        })
    }

    /// Without a `parallel` list every line is its own class, so no two
    /// lines are parallel and the parallel axiom reports a witness.
    pub fn synthetic(&self) -> Result<SyntheticIncidence, Error> {
        let parallel = self
            .parallel
            .clone()
            .unwrap_or_else(|| (0..self.lines.len()).collect());
        if parallel.len() != self.lines.len() {
            return Err(Error::InvalidInput(
                "one parallel class per line is required".into(),
            ));
        }
        Ok(SyntheticIncidence {
            incidence: self.incidence()?,
            parallel,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WitnessFile {
    pub sets: Vec<Vec<usize>>,
    pub points: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AxiomFile {
    pub axiom: String,
    pub passed: bool,
    pub detail: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witness: Option<WitnessFile>,
}

pub fn axiom_report(r: &AxiomReport) -> Vec<AxiomFile> {
    r.checks
        .iter()
        .map(|c| AxiomFile {
            axiom: c.axiom.to_string(),
            passed: c.passed,
            detail: c.detail.clone(),
            witness: c.witness.as_ref().map(|w| WitnessFile {
                sets: w.sets.clone(),
                points: w.points.clone(),
            }),
        })
        .collect()
}

/// A parallel family whose image lines have no common point.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NonConcurrenceFile {
    pub direction: usize,
    pub lines: Vec<Vec<usize>>,
    pub image_lines: Vec<Vec<usize>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExtendedFile {
    pub map: PartialMapFile,
    pub exceptional: Vec<usize>,
    pub b1: bool,
    pub b2: bool,
    pub unique: bool,
}

/// Exactly one of the three fields is set.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExtensionFile {
    pub hypothesis: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub extension: Option<ExtendedFile>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witness: Option<NonConcurrenceFile>,
    /// Collapsed directions that do not form a flat.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exceptional_not_flat: Option<Vec<usize>>,
}

impl ExtensionFile {
    pub fn of(r: &ExtensionResult) -> Self {
        let mut out = ExtensionFile {
            hypothesis: r.hypothesis,
            extension: None,
            witness: None,
            exceptional_not_flat: None,
        };
        match &r.outcome {
            ExtensionOutcome::Extended(e) => {
                out.extension = Some(ExtendedFile {
                    map: PartialMapFile::of(&e.map),
                    exceptional: e.exceptional.to_vec(),
                    b1: e.b1_b2.b1,
                    b2: e.b1_b2.b2,
                    unique: e.unique,
                })
            }
            ExtensionOutcome::NonConcurrent(w) => {
                out.witness = Some(NonConcurrenceFile {
                    direction: w.direction,
                    lines: w.affine_lines.clone(),
                    image_lines: w.image_lines.clone(),
                })
            }
            ExtensionOutcome::ExceptionalNotFlat(s) => out.exceptional_not_flat = Some(s.to_vec()),
        }
        out
    }
}

/// Reads a JSON value given inline (starting with `{`) or as a file path.
pub fn read_json<T: serde::de::DeserializeOwned>(arg: &str) -> anyhow::Result<T> {
    let text = if arg.trim_start().starts_with('{') {
        arg.to_string()
    } else {
        std::fs::read_to_string(arg).map_err(|e| anyhow::anyhow!("cannot read {arg}: {e}"))?
    };
    serde_json::from_str(&text).map_err(|e| anyhow::anyhow!("malformed JSON in {arg}: {e}"))
}
