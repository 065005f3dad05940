//! Command-line surface. Every command produces one JSON report; the text
//! format is a flattened rendering of the same report.
//!
//! Exit codes: 0 pass, 1 a violation or failed verification, 2 usage,
//! input or precondition error, 3 search budget exceeded.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use geomkit_core::affine::{
    is_parallel_morphism, semiaffine_extract, SemiaffineDecomposition, SemilinearMap,
};
use geomkit_core::axioms::check_axioms;
use geomkit_core::closure_ext::{extend_to_closure, fractional_decompose, projective_closure};
use geomkit_core::counterexamples::{counterexample_hesse, counterexample_octagon};
use geomkit_core::projective::projectivize_map;
use geomkit_core::quotient::quotient_projective_iso;
use geomkit_core::search::{Filter, SearchOptions, DEFAULT_BUDGET};
use geomkit_core::synthetic::{synthetic_affine_check, veblen_young_check};
use geomkit_core::{field_morphisms, Elem, Error, FiniteField, GeoMap, Geometry, Matrix};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};

use crate::formats::{
    axiom_report, read_json, ExtensionFile, FractionalFile, GeometrySpec, IncidenceFile, MapFile,
    SemiaffineFile,
};
use crate::parallel;

#[derive(Parser, Debug, Clone, Serialize)]
#[command(
    name = "geomkit",
    version,
    about = "Finite geometries, their morphisms and the theorems about them"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct Common {
    /// Cap on search node expansions.
    #[arg(long, global = true, default_value_t = DEFAULT_BUDGET, value_parser = clap::value_parser!(u64).range(1..))]
    pub budget: u64,
    /// Worker threads for enumeration; 0 uses one per core. Results do not
    /// depend on it, so it is left out of reports.
    #[arg(long, global = true, default_value_t = 0)]
    #[serde(skip)]
    pub workers: usize,
    /// JSON report, or the same report flattened to `path: value` lines.
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Seed for commands that draw random samples.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Add the wall-clock time to the report. Off by default so that
    /// reports are reproducible byte for byte.
    #[arg(long, global = true)]
    pub timings: bool,
    /// Write the report here instead of standard output.
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Text,
}

#[derive(Subcommand, Debug, Clone, Serialize)]
#[serde(rename_all = "kebab-case", tag = "name")]
pub enum Command {
    /// Check the closure-space axioms of a geometry, or the synthetic axioms
    /// of an incidence structure.
    Check {
        /// Geometry JSON, inline or as a file path.
        #[arg(long, conflicts_with = "synthetic")]
        geometry: Option<String>,
        /// Check an incidence file against the affine or projective axioms.
        #[arg(long, value_enum, requires = "input")]
        synthetic: Option<Synthetic>,
        #[arg(long)]
        input: Option<String>,
    },
    /// Verify a theorem on concrete spaces.
    Verify {
        #[arg(value_enum)]
        theorem: Theorem,
        /// Field order of the domain.
        #[arg(long, default_value = "2")]
        q: u32,
        /// Dimension of the domain (for quotient-iso, of the vector space V).
        #[arg(long, default_value_t = 2)]
        n: usize,
        /// Field order of the codomain; defaults to q.
        #[arg(long)]
        q2: Option<u32>,
        /// Dimension of the codomain; defaults to n.
        #[arg(long)]
        n2: Option<usize>,
        /// Dimension of the subspace W for quotient-iso.
        #[arg(long, default_value_t = 1)]
        dim: usize,
        /// Number of random maps for the extension suite.
        #[arg(long, default_value_t = 50)]
        samples: usize,
    },
    /// Enumerate maps between two geometries.
    Enumerate {
        /// Domain geometry JSON.
        #[arg(long)]
        geometry: String,
        /// Codomain geometry JSON.
        #[arg(long)]
        codomain: String,
        /// all, image-not-in-line, bijective or constant.
        #[arg(long, default_value = "all")]
        filter: String,
        /// Enumerate parallel maps between affine spaces instead of morphisms.
        #[arg(long)]
        parallel_maps: bool,
    },
    /// Extend a morphism from an affine space to its projective closure.
    Extend {
        /// Map JSON with an affine domain and an affine or projective codomain.
        #[arg(long)]
        input: String,
        /// Also write the extension result to this file.
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Write a morphism of affine spaces as a fractional semilinear map.
    Decompose {
        #[arg(long)]
        map: String,
    },
    /// Build one of the non-extendable morphisms and write its artifacts.
    Counterexample {
        #[arg(value_enum)]
        kind: Counterexample,
        #[arg(long)]
        q: u32,
        /// Directory for the map and witness files.
        #[arg(long, default_value = ".")]
        dir: PathBuf,
    },
    /// Test a map of affine spaces for parallelism and extract its
    /// semiaffine form.
    Affine {
        #[arg(long)]
        map: String,
    },
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Synthetic {
    Affine,
    Projective,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Theorem {
    FtAffine,
    FtProjective,
    Extension,
    QuotientIso,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Counterexample {
    Octagon,
    Hesse,
}

/// A finished command: its exit code and report.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub code: u8,
    pub report: Value,
}

pub fn exit_code(e: &Error) -> u8 {
    match e {
        Error::SearchBudgetExceeded { .. } => 3,
        Error::NotSemiaffine(_)
        | Error::NoSemilinearModel
        | Error::NotPartialMorphism(_)
        | Error::DecompositionFailed(_)
        | Error::Disagreement(_)
        | Error::SelectionFailed => 1,
        _ => 2,
    }
}

enum Failure {
    Core(Error),
    Usage(anyhow::Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Usage(e)
    }
}

type Run = Result<(bool, Value), Failure>;

fn status(code: u8) -> &'static str {
    match code {
        0 => "pass",
        1 => "fail",
        3 => "budget",
        _ => "error",
    }
}

/// Runs a parsed command line.
pub fn run(cli: &Cli) -> Outcome {
    let start = std::time::Instant::now();
    let result = match &cli.command {
        Command::Check {
            geometry,
            synthetic,
            input,
        } => check(geometry.as_deref(), *synthetic, input.as_deref()),
        Command::Verify {
            theorem,
            q,
            n,
            q2,
            n2,
            dim,
            samples,
        } => verify(
            &cli.common,
            *theorem,
            *q,
            *n,
            q2.unwrap_or(*q),
            n2.unwrap_or(*n),
            *dim,
            *samples,
        ),
        Command::Enumerate {
            geometry,
            codomain,
            filter,
            parallel_maps,
        } => enumerate(&cli.common, geometry, codomain, filter, *parallel_maps),
        Command::Extend { input, report } => extend(input, report.as_deref()),
        Command::Decompose { map } => decompose(map),
        Command::Counterexample { kind, q, dir } => counterexample(*kind, *q, dir),
        Command::Affine { map } => affine(map),
    };
    let (code, body) = match result {
        Ok((true, v)) => (0, ("result", v)),
        Ok((false, v)) => (1, ("result", v)),
        Err(Failure::Core(e)) => (exit_code(&e), ("error", Value::String(e.to_string()))),
        Err(Failure::Usage(e)) => (2, ("error", Value::String(format!("{e:#}")))),
    };
    let mut report = json!({
        "tool": "geomkit",
        "version": env!("CARGO_PKG_VERSION"),
        "config": cli,
        "status": status(code),
    });
    report[body.0] = body.1;
    if cli.common.timings {
        report["timings"] = json!({ "elapsed_ms": start.elapsed().as_secs_f64() * 1e3 });
    }
    Outcome { code, report }
}

/// The report in the requested format, ending with a newline.
pub fn render(report: &Value, format: Format) -> String {
    match format {
        Format::Json => {
            let mut s = serde_json::to_string_pretty(report).expect("reports serialize");
            s.push('\n');
            s
        }
        Format::Text => {
            let mut out = String::new();
            flatten("", report, &mut out);
            out
        }
    }
}

fn flatten(path: &str, v: &Value, out: &mut String) {
    let child = |k: &str| {
        if path.is_empty() {
            k.to_string()
        } else {
            format!("{path}.{k}")
        }
    };
    match v {
        Value::Object(m) if !m.is_empty() => {
            for (k, x) in m {
                flatten(&child(k), x, out);
            }
        }
        Value::Array(a) if a.iter().any(|x| x.is_object()) => {
            for (i, x) in a.iter().enumerate() {
                flatten(&child(&i.to_string()), x, out);
            }
        }
        _ => {
            out.push_str(path);
            out.push_str(": ");
            out.push_str(&v.to_string());
            out.push('\n');
        }
    }
}

fn to_value<T: Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("serializable")
}

fn check(geometry: Option<&str>, synthetic: Option<Synthetic>, input: Option<&str>) -> Run {
    if let Some(spec) = geometry {
        let g = read_json::<GeometrySpec>(spec)?.build()?;
        let r = check_axioms(&g);
        let mut v = json!({
            "points": g.n_points(),
            "flats": g.flats().len(),
            "axioms": axiom_report(&r),
        });
        if r.all_passed() {
            v["generated_by_lines"] = json!(g.generated_by_lines());
            v["generated_by_lines_and_planes"] = json!(g.generated_by_lines_and_planes());
        }
        return Ok((r.all_passed(), v));
    }
    let (Some(kind), Some(path)) = (synthetic, input) else {
        return Err(anyhow::anyhow!("check needs --geometry, or --synthetic with --input").into());
    };
    let file: IncidenceFile = read_json(path)?;
    let r = match kind {
        Synthetic::Affine => synthetic_affine_check(&file.synthetic()?),
        Synthetic::Projective => veblen_young_check(&file.incidence()?),
    };
    Ok((r.all_passed(), json!({ "axioms": axiom_report(&r) })))
}

#[allow(clippy::too_many_arguments)]
fn verify(
    common: &Common,
    theorem: Theorem,
    q: u32,
    n: usize,
    q2: u32,
    n2: usize,
    dim: usize,
    samples: usize,
) -> Run {
    match theorem {
        Theorem::FtAffine | Theorem::FtProjective => {
            let r = if theorem == Theorem::FtAffine {
                parallel::ft_affine(q, n, q2, n2, common.budget, common.workers)?
            } else {
                parallel::ft_projective(q, n, q2, n2, common.budget, common.workers)?
            };
            Ok((
                r.equal,
                json!({
                    "enumerated": r.enumerated,
                    "constructed": r.constructed,
                    "equal": r.equal,
                    "nodes": r.nodes,
                    "only_enumerated": r.only_enumerated,
                    "only_constructed": r.only_constructed,
                }),
            ))
        }
        Theorem::Extension => extension_suite(q, n, samples, common.seed),
        Theorem::QuotientIso => {
            let k = FiniteField::parse(&q.to_string())?;
            if dim >= n {
                return Err(Error::Precondition("W must be a proper subspace of V".into()).into());
            }
            let mut rng = ChaCha8Rng::seed_from_u64(common.seed);
            let w = random_subspace(&k, n, dim, &mut rng);
            let iso = quotient_projective_iso(&k, n, &w)?;
            Ok((
                iso.holds(),
                json!({
                    "W": w,
                    "quotient_points": iso.quotient.geometry().n_points(),
                    "target_points": iso.target.n_points(),
                    "forward": iso.forward.images(),
                    "round_trip": iso.round_trip,
                    "forward_morphism": iso.forward_morphism,
                    "backward_morphism": iso.backward_morphism,
                }),
            ))
        }
    }
}

fn random_subspace(
    k: &std::sync::Arc<FiniteField>,
    n: usize,
    dim: usize,
    rng: &mut ChaCha8Rng,
) -> Vec<Vec<Elem>> {
    loop {
        let rows: Vec<Vec<Elem>> = (0..dim)
            .map(|_| (0..n).map(|_| rng.gen_range(0..k.order())).collect())
            .collect();
        if dim == 0
            || Matrix::from_rows(k, &rows)
                .map(|m| m.rank() == dim)
                .unwrap_or(false)
        {
            return rows;
        }
    }
}

/// Random semiaffine maps `AG(n,q) → AG(n,q)` with image not in a line,
/// extended to the projective closure and compared with the block matrix
/// `[[1, 0], [a, M]]`.
fn extension_suite(q: u32, n: usize, samples: usize, seed: u64) -> Run {
    let k = FiniteField::parse(&q.to_string())?;
    let a = Geometry::affine(&k, n);
    let closure = projective_closure(&a)?;
    let p = closure.projective();
    let sigmas = field_morphisms(&k, &k);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut failures = Vec::new();
    let (mut extended, mut unique, mut restricted, mut matched) = (0, 0, 0, 0);
    for i in 0..samples {
        let (m, t, sigma) = loop {
            let rows: Vec<Vec<Elem>> = (0..n)
                .map(|_| (0..n).map(|_| rng.gen_range(0..q)).collect())
                .collect();
            let m = Matrix::from_rows(&k, &rows)?;
            if m.rank() >= 2 {
                let t: Vec<Elem> = (0..n).map(|_| rng.gen_range(0..q)).collect();
                break (m, t, sigmas.choose(&mut rng).unwrap().clone());
            }
        };
        let d = SemiaffineDecomposition {
            differential: SemilinearMap::new(m.clone(), sigma.clone())?,
            translation: t.clone(),
        };
        let phi = d.to_map(&a, &a)?.then(&closure.inclusion())?;
        let r = extend_to_closure(&phi)?;
        let Some(ext) = r.extension() else {
            failures.push(json!({ "sample": i, "reason": "no extension" }));
            continue;
        };
        extended += 1;
        let restriction_ok =
            (0..a.n_points()).all(|x| ext.map.apply(closure.embed(x)) == Some(phi.apply(x)));
        let mut rows = vec![vec![0; n + 1]];
        rows[0][0] = 1;
        for (r, &ti) in t.iter().enumerate() {
            let mut row = vec![ti];
            row.extend_from_slice(m.row(r));
            rows.push(row);
        }
        let block = SemilinearMap::new(Matrix::from_rows(&k, &rows)?, sigma)?;
        let expected = projectivize_map(&block, p, p)?;
        let matches = expected.images() == ext.map.images();
        restricted += restriction_ok as usize;
        unique += ext.unique as usize;
        matched += matches as usize;
        if !(restriction_ok && ext.unique && matches) {
            failures.push(json!({
                "sample": i,
                "restriction": restriction_ok,
                "unique": ext.unique,
                "matches_block_matrix": matches,
            }));
        }
    }
    Ok((
        failures.is_empty(),
        json!({
            "samples": samples,
            "extended": extended,
            "restriction_ok": restricted,
            "unique": unique,
            "matches_block_matrix": matched,
            "failures": failures,
        }),
    ))
}

fn enumerate(common: &Common, dom: &str, cod: &str, filter: &str, parallel_maps: bool) -> Run {
    let dom = read_json::<GeometrySpec>(dom)?.build()?;
    let cod = read_json::<GeometrySpec>(cod)?.build()?;
    let filter =
        Filter::parse(filter).ok_or_else(|| anyhow::anyhow!("unknown filter {filter:?}"))?;
    let mut opts = SearchOptions::new(filter);
    opts.budget = common.budget;
    opts.parallel = parallel_maps;
    let found = parallel::enumerate(&dom, &cod, opts, common.workers)?;
    let maps: Vec<&[usize]> = found.maps.iter().map(|m| m.images()).collect();
    Ok((
        true,
        json!({ "count": maps.len(), "nodes": found.nodes, "maps": maps }),
    ))
}

fn write_json<T: Serialize>(path: &Path, x: &T) -> anyhow::Result<()> {
    let mut s = serde_json::to_string_pretty(x)?;
    s.push('\n');
    std::fs::write(path, s).map_err(|e| anyhow::anyhow!("cannot write {}: {e}", path.display()))
}

fn extend(input: &str, report: Option<&Path>) -> Run {
    let phi = read_json::<MapFile>(input)?.build()?;
    let phi = if phi.codomain().is_affine() {
        phi.then(&projective_closure(phi.codomain())?.inclusion())?
    } else {
        phi
    };
    let r = extend_to_closure(&phi)?;
    let file = ExtensionFile::of(&r);
    if let Some(path) = report {
        write_json(path, &file)?;
    }
    Ok((r.extension().is_some(), to_value(&file)))
}

fn decompose(map: &str) -> Run {
    let phi = read_json::<MapFile>(map)?.build()?;
    let d = fractional_decompose(&phi)?;
    Ok((
        true,
        json!({
            "decomposition": FractionalFile::of(&d),
            "sigma_is_identity": d.sigma().is_identity(),
            "omega_is_zero": d.omega.is_zero(),
        }),
    ))
}

fn counterexample(kind: Counterexample, q: u32, dir: &Path) -> Run {
    std::fs::create_dir_all(dir)
        .map_err(|e| anyhow::anyhow!("cannot create {}: {e}", dir.display()))?;
    let (name, map, witness, verdict) = match kind {
        Counterexample::Octagon => {
            let r = counterexample_octagon(q)?;
            let extension = ExtensionFile::of(&r.extension);
            let witness = json!({
                "sides": r.sides,
                "witness": extension.witness.as_ref().map(to_value),
            });
            let ok = r.map.is_morphism().is_morphism && extension.witness.is_some();
            ("octagon", r.map, witness, ok)
        }
        Counterexample::Hesse => {
            let r = counterexample_hesse(q)?;
            let extension = ExtensionFile::of(&r.extension);
            let witness = json!({
                "no_field_morphism": r.no_field_morphism,
                "is_embedding": r.is_embedding,
                "extension": extension,
            });
            let ok = r.is_embedding && r.no_field_morphism && extension.extension.is_none();
            ("hesse", r.embedding, witness, ok)
        }
    };
    let map_path = dir.join(format!("{name}-q{q}-map.json"));
    let witness_path = dir.join(format!("{name}-q{q}-witness.json"));
    write_json(&map_path, &MapFile::of(&map))?;
    write_json(&witness_path, &witness)?;
    Ok((
        verdict,
        json!({
            "map_file": map_path.file_name().and_then(|s| s.to_str()),
            "witness_file": witness_path.file_name().and_then(|s| s.to_str()),
            "images": map.images(),
            "certificate": witness,
        }),
    ))
}

fn affine(map: &str) -> Run {
    let phi: GeoMap = read_json::<MapFile>(map)?.build()?;
    let par = is_parallel_morphism(&phi)?;
    let mut v = json!({ "parallel": par.parallel, "witness": par.witness });
    match semiaffine_extract(&phi) {
        Ok(d) => {
            v["semiaffine"] = to_value(&SemiaffineFile::of(&d));
            Ok((true, v))
        }
        Err(Error::NotSemiaffine(why)) => {
            v["semiaffine"] = Value::Null;
            v["reason"] = json!(why);
            Ok((false, v))
        }
        Err(e) => Err(e.into()),
    }
}
