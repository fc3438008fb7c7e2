//! Command-line experiment runner.
//!
//! Every experiment can be given as a subcommand with flags or as a TOML
//! manifest (`cubex run --manifest m.toml`) of the form
//!
//! ```toml
//! command = "hyperplane"
//! seed = 7            # only needed by sampled experiments
//!
//! [params]
//! n = 4
//! p = "1/8"
//! subcube = 3
//!
//! [limits]            # optional
//! max_support = 1048576
//! ```
//!
//! Reports go to stdout as JSON and, with `--out <dir>`, to
//! `<dir>/<command>.json` plus `<dir>/<command>.csv` for tabular results.
//! Reports carry the SHA-256 of the canonical manifest and contain no
//! timestamps, so equal manifests give byte-identical reports.
//!
//! Exit codes: 0 success, 1 a verification check failed, 2 invalid input,
//! 3 resource limit, 4 internal or I/O error. Errors are written to stderr as
//! a JSON object.

use std::collections::HashSet;
use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::boolfn::{
    degree, field_search, mobius_forward, mobius_inverse, omega_member, rm_dimension, rm_distance, AnfCoeffs, BoolFn,
    SearchMode,
};
use crate::constructions::{
    check_nu_symmetry, constant_marginal_prob, hyperplane_measure, marginal_allzero_prob, mixture_experiment,
    random_walk_measure, FiniteAbelianGroup, HyperplaneParams, WalkParams,
};
use crate::cube::{
    compose, enumerate_faces, enumerate_group, generators, group_order, Config, CubePoint, Face, Isometry,
};
use crate::dmt::{dmt_fraction, DmtMode, DmtQuery, FiniteContext};
use crate::io::{format_config, load_measure, measure_to_string};
use crate::joinings::{dbar_at, near_diagonal_decomposition};
use crate::measures::{ergodic_decompose, is_invariant, ExactMeasure};
use crate::rational::{self, binomial_u64};
use crate::testability::{nontestability_report, within_three_sigma};
use crate::{Error, Result};

pub const DEFAULT_MAX_SUPPORT: usize = 1 << 20;
pub const DEFAULT_MAX_GROUP_ORDER: u64 = 46_080;
const DEFAULT_OMEGA_TRIALS: u64 = 2_000;

#[derive(Parser, Debug)]
#[command(name = "cubex", version, about = "Exact experiments with invariant measures on the Hamming cube")]
pub struct Cli {
    /// Directory for report files.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Seed for sampled experiments.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long, global = true)]
    pub max_support: Option<usize>,
    #[arg(long, global = true)]
    pub max_group_order: Option<u64>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Run the experiment described by a TOML manifest.
    Run {
        #[arg(long)]
        manifest: PathBuf,
    },
    #[command(flatten)]
    Experiment(Experiment),
}

#[derive(Subcommand, Serialize, Deserialize, Clone, Debug, PartialEq)]
#[serde(tag = "command", content = "params", rename_all = "kebab-case")]
pub enum Experiment {
    /// Enumerate Isom(F_2^n) and check it against its order and generators.
    Group(GroupParams),
    /// Enumerate the r-faces of F_2^n.
    Faces(FacesParams),
    /// Algebraic normal form of a truth table.
    Anf(AnfParams),
    /// Check the face-sum characterisation of low degree.
    Omega(OmegaParams),
    /// Distance from a function to the nearest function of degree at most r.
    RmDistance(RmDistanceParams),
    /// Compare affine and isometric cube conditions over F_q^d.
    FieldSearch(FieldSearchParams),
    /// The sparse-hyperplane measure and its subcube marginals.
    Hyperplane(HyperplaneArgs),
    /// A random-walk measure over a finite abelian group.
    Walk(WalkArgs),
    /// Check the symmetry condition on a step law.
    NuCheck(NuCheckParams),
    /// The selector-mixture approximation experiment.
    Mixture(MixtureParams),
    /// The d-bar distance between two measure files.
    Dbar(DbarParams),
    /// Orbit decomposition of a measure file.
    Decompose(DecomposeParams),
    /// Random-face testing of the monomial family.
    Testability(TestabilityParams),
    /// Fractions of group pairs admitting a DMT witness.
    Dmt(DmtParams),
}

impl Experiment {
    pub fn name(&self) -> &'static str {
        match self {
            Experiment::Group(_) => "group",
            Experiment::Faces(_) => "faces",
            Experiment::Anf(_) => "anf",
            Experiment::Omega(_) => "omega",
            Experiment::RmDistance(_) => "rm-distance",
            Experiment::FieldSearch(_) => "field-search",
            Experiment::Hyperplane(_) => "hyperplane",
            Experiment::Walk(_) => "walk",
            Experiment::NuCheck(_) => "nu-check",
            Experiment::Mixture(_) => "mixture",
            Experiment::Dbar(_) => "dbar",
            Experiment::Decompose(_) => "decompose",
            Experiment::Testability(_) => "testability",
            Experiment::Dmt(_) => "dmt",
        }
    }
}

#[derive(Args, Serialize, Deserialize, Clone, Debug, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct GroupParams {
    #[arg(long)]
    pub n: usize,
}

#[derive(Args, Serialize, Deserialize, Clone, Debug, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct FacesParams {
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub r: usize,
}

#[derive(Args, Serialize, Deserialize, Clone, Debug, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct AnfParams {
    #[arg(long)]
    pub n: usize,
    /// Truth table in hex, highest point first.
    #[arg(long)]
    pub hex: String,
}

#[derive(Args, Serialize, Deserialize, Clone, Debug, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct OmegaParams {
    #[arg(long)]
    pub n: usize,
    /// Single face dimension; all of 1..=n when absent.
    #[arg(long)]
    #[serde(default)]
    pub r: Option<usize>,
    /// Sampled functions when n is too large to enumerate.
    #[arg(long)]
    #[serde(default)]
    pub trials: Option<u64>,
}

#[derive(Args, Serialize, Deserialize, Clone, Debug, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct RmDistanceParams {
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub r: usize,
    #[arg(long)]
    pub hex: String,
}

#[derive(Args, Serialize, Deserialize, Clone, Debug, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct FieldSearchParams {
    #[arg(long)]
    pub q: u8,
    #[arg(long)]
    pub d: usize,
    #[arg(long)]
    pub r: usize,
    /// Sample this many isometric-kernel functions instead of scanning all.
    #[arg(long)]
    #[serde(default)]
    pub samples: Option<u64>,
}

#[derive(Args, Serialize, Deserialize, Clone, Debug, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct HyperplaneArgs {
    #[arg(long)]
    pub n: usize,
    /// Density of z, as num/den.
    #[arg(long)]
    pub p: String,
    /// Dimension N of the leading subcube for the marginal probabilities.
    #[arg(long)]
    pub subcube: usize,
    /// Also write the measure to <out>/hyperplane.measure.
    #[arg(long)]
    #[serde(default)]
    pub save: bool,
}

#[derive(Args, Serialize, Deserialize, Clone, Debug, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct WalkArgs {
    /// Cyclic factor orders of U.
    #[arg(long, value_delimiter = ',', required = true)]
    pub moduli: Vec<u32>,
    /// Step law, one num/den per group element.
    #[arg(long, value_delimiter = ',', required = true)]
    pub nu: Vec<String>,
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    #[serde(default)]
    pub save: bool,
}

#[derive(Args, Serialize, Deserialize, Clone, Debug, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct NuCheckParams {
    #[arg(long, value_delimiter = ',', required = true)]
    pub moduli: Vec<u32>,
    #[arg(long, value_delimiter = ',', required = true)]
    pub nu: Vec<String>,
}

#[derive(Args, Serialize, Deserialize, Clone, Debug, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct MixtureParams {
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub p: String,
    /// Measure file for μ₁; the all-zero Dirac mass when absent.
    #[arg(long)]
    #[serde(default)]
    pub mu1: Option<PathBuf>,
    /// Measure file for μ₂; the all-one Dirac mass when absent.
    #[arg(long)]
    #[serde(default)]
    pub mu2: Option<PathBuf>,
    /// Free coordinates of the test face (1-based); the whole cube when absent.
    #[arg(long, value_delimiter = ',')]
    #[serde(default)]
    pub free: Vec<usize>,
    /// Base point index of the test face.
    #[arg(long)]
    #[serde(default)]
    pub base: Option<u32>,
}

#[derive(Args, Serialize, Deserialize, Clone, Debug, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct DbarParams {
    #[arg(long)]
    pub mu: PathBuf,
    #[arg(long)]
    pub nu: PathBuf,
    /// Reference vertex index; the origin when absent.
    #[arg(long)]
    #[serde(default)]
    pub vertex: Option<u32>,
    /// Re-solve at every vertex and compare.
    #[arg(long)]
    #[serde(default)]
    pub all_vertices: bool,
}

#[derive(Args, Serialize, Deserialize, Clone, Debug, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct DecomposeParams {
    #[arg(long)]
    pub measure: PathBuf,
}

#[derive(Args, Serialize, Deserialize, Clone, Debug, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct TestabilityParams {
    /// Degree threshold of the property; the subject is v_1...v_{r+1}.
    #[arg(long)]
    #[serde(default)]
    pub r: Option<usize>,
    /// Face dimension J.
    #[arg(long)]
    pub dim: usize,
    /// Cube dimensions; 6..=16 when absent.
    #[arg(long, value_delimiter = ',')]
    #[serde(default)]
    pub n: Vec<usize>,
    /// Monte Carlo trials per row (0 for exact values only).
    #[arg(long)]
    #[serde(default)]
    pub trials: Option<u64>,
}

#[derive(Args, Serialize, Deserialize, Clone, Debug, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct DmtParams {
    /// `hypergraph` or `cube`.
    #[arg(long)]
    pub context: String,
    #[arg(long, value_delimiter = ',', required = true)]
    pub n: Vec<usize>,
    /// Edge size for hypergraphs; 2 when absent.
    #[arg(long)]
    #[serde(default)]
    pub k: Option<usize>,
    /// Elements of I: `1+2` style subsets, or point indices for the cube.
    #[arg(long = "i", value_delimiter = ',')]
    #[serde(default)]
    pub i: Vec<String>,
    #[arg(long = "j", value_delimiter = ',')]
    #[serde(default)]
    pub j: Vec<String>,
    /// Sample this many pairs instead of enumerating all of them.
    #[arg(long)]
    #[serde(default)]
    pub trials: Option<u64>,
}

#[derive(Serialize, Deserialize, Clone, Copy, Debug, Default, PartialEq, Eq)]
#[serde(deny_unknown_fields)]
pub struct Limits {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_support: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_group_order: Option<u64>,
}

impl Limits {
    fn support(&self) -> usize {
        self.max_support.unwrap_or(DEFAULT_MAX_SUPPORT)
    }

    fn group_order(&self) -> u64 {
        self.max_group_order.unwrap_or(DEFAULT_MAX_GROUP_ORDER)
    }
}

#[derive(Serialize, Deserialize, Clone, Debug, PartialEq)]
pub struct Manifest {
    #[serde(flatten)]
    pub experiment: Experiment,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing)]
    pub out: Option<PathBuf>,
    #[serde(default)]
    pub limits: Limits,
}

impl Manifest {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| {
            let (line, column) = match e.span() {
                Some(span) => line_column(text, span.start),
                None => (1, 1),
            };
            Error::Parse { line, column, message: e.message().to_string() }
        })
    }

    /// SHA-256 of the canonical JSON form (output directory excluded).
    pub fn sha256(&self) -> String {
        let canonical = serde_json::to_string(self).expect("manifest serialises");
        Sha256::digest(canonical.as_bytes()).iter().map(|b| format!("{b:02x}")).collect()
    }
}

fn line_column(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let column = before.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
    (line, column)
}

#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

/// The outcome of one experiment.
#[derive(Clone, Debug, PartialEq)]
pub struct Report {
    pub command: &'static str,
    pub verified: bool,
    pub result: Value,
    pub table: Option<Table>,
    /// Extra files written next to the report, as (name, contents).
    pub files: Vec<(String, String)>,
}

impl Report {
    fn new(command: &'static str, verified: bool, result: Value) -> Self {
        Report { command, verified, result, table: None, files: Vec::new() }
    }

    pub fn to_json(&self, manifest: &Manifest) -> String {
        let params = serde_json::to_value(&manifest.experiment).expect("parameters serialise");
        let record = json!({
            "command": self.command,
            "manifest_sha256": manifest.sha256(),
            "parameters": params["params"],
            "seed": manifest.seed,
            "verified": self.verified,
            "result": self.result,
        });
        let mut s = serde_json::to_string_pretty(&record).expect("report serialises");
        s.push('\n');
        s
    }

    pub fn to_csv(&self, manifest: &Manifest) -> Option<String> {
        let table = self.table.as_ref()?;
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&table.header).ok()?;
        for row in &table.rows {
            w.write_record(row).ok()?;
        }
        let body = String::from_utf8(w.into_inner().ok()?).ok()?;
        Some(format!("# manifest_sha256: {}\n{body}", manifest.sha256()))
    }
}

fn q(x: &BigRational) -> Value {
    Value::String(rational::format(x))
}

fn parse_rat(field: &str, text: &str) -> Result<BigRational> {
    rational::parse(text).map_err(|e| Error::invalid(format!("{field}: {e}")))
}

fn need_seed(seed: Option<u64>, what: &str) -> Result<u64> {
    seed.ok_or_else(|| Error::invalid(format!("{what} is sampled and needs --seed")))
}

struct Env<'a> {
    seed: Option<u64>,
    limits: Limits,
    base_dir: &'a Path,
}

impl Env<'_> {
    fn load(&self, path: &Path) -> Result<ExactMeasure> {
        let full = if path.is_absolute() { path.to_path_buf() } else { self.base_dir.join(path) };
        let mu = load_measure(&full).map_err(|e| match e {
            Error::Io(io) => Error::Io(std::io::Error::new(io.kind(), format!("{}: {io}", full.display()))),
            other => other,
        })?;
        self.check_support(mu.len())?;
        Ok(mu)
    }

    fn check_support(&self, size: usize) -> Result<()> {
        if size > self.limits.support() {
            return Err(Error::limit(format!("support size {size} above max_support {}", self.limits.support())));
        }
        Ok(())
    }

    fn check_group(&self, order: u128) -> Result<()> {
        if order > u128::from(self.limits.group_order()) {
            return Err(Error::limit(format!(
                "group order {order} above max_group_order {}",
                self.limits.group_order()
            )));
        }
        Ok(())
    }
}

/// Runs a manifest; relative paths inside it resolve against `base_dir`.
pub fn execute(manifest: &Manifest, base_dir: &Path) -> Result<Report> {
    let env = Env { seed: manifest.seed, limits: manifest.limits, base_dir };
    match &manifest.experiment {
        Experiment::Group(p) => run_group(&env, p),
        Experiment::Faces(p) => run_faces(&env, p),
        Experiment::Anf(p) => run_anf(p),
        Experiment::Omega(p) => run_omega(&env, p),
        Experiment::RmDistance(p) => run_rm_distance(p),
        Experiment::FieldSearch(p) => run_field_search(&env, p),
        Experiment::Hyperplane(p) => run_hyperplane(&env, p),
        Experiment::Walk(p) => run_walk(&env, p),
        Experiment::NuCheck(p) => run_nu_check(p),
        Experiment::Mixture(p) => run_mixture(&env, p),
        Experiment::Dbar(p) => run_dbar(&env, p),
        Experiment::Decompose(p) => run_decompose(&env, p),
        Experiment::Testability(p) => run_testability(&env, p),
        Experiment::Dmt(p) => run_dmt(&env, p),
    }
}

fn run_group(env: &Env, p: &GroupParams) -> Result<Report> {
    let order = group_order(p.n);
    env.check_group(order)?;
    let elements = enumerate_group(p.n)?;
    let distinct: HashSet<Isometry> = elements.iter().copied().collect();
    // closure of the generators, by breadth-first search
    let gens = generators(p.n)?;
    let mut reached: HashSet<Isometry> = HashSet::from([Isometry::identity(p.n)?]);
    let mut frontier = vec![Isometry::identity(p.n)?];
    while let Some(g) = frontier.pop() {
        for s in &gens {
            let h = compose(s, &g)?;
            if reached.insert(h) {
                frontier.push(h);
            }
        }
    }
    let points = 1u32 << p.n;
    let isometric = p.n > 5
        || elements.iter().all(|g| {
            (0..points).all(|x| (0..points).all(|y| (g.apply_index(x) ^ g.apply_index(y)).count_ones() == (x ^ y).count_ones()))
        });
    let verified = elements.len() as u128 == order && distinct.len() == elements.len() && reached == distinct && isometric;
    Ok(Report::new(
        "group",
        verified,
        json!({
            "n": p.n,
            "order": order.to_string(),
            "enumerated": elements.len(),
            "distinct": distinct.len(),
            "generators": gens.len(),
            "generated": reached.len(),
            "hamming_checked": p.n <= 5,
        }),
    ))
}

fn run_faces(env: &Env, p: &FacesParams) -> Result<Report> {
    if p.r > p.n {
        return Err(Error::invalid(format!("face dimension {} exceeds n = {}", p.r, p.n)));
    }
    let expected = binomial_u64(p.n, p.r) << (p.n - p.r);
    env.check_support(expected as usize)?;
    let faces = enumerate_faces(p.n, p.r)?;
    let set: HashSet<Face> = faces.iter().copied().collect();
    let closed = generators(p.n)?.iter().all(|g| faces.iter().all(|f| f.image(g).is_ok_and(|h| set.contains(&h))));
    let mut table = Table { header: vec!["free".into(), "base".into()], rows: Vec::new() };
    for f in &faces {
        let free: Vec<String> = f.free_coords().iter().map(|c| c.to_string()).collect();
        table.rows.push(vec![free.join(" "), f.base().to_string()]);
    }
    let verified = faces.len() as u64 == expected && set.len() == faces.len() && closed;
    let mut report = Report::new(
        "faces",
        verified,
        json!({ "n": p.n, "r": p.r, "count": faces.len(), "expected": expected, "closed_under_generators": closed }),
    );
    report.table = Some(table);
    Ok(report)
}

fn monomial_name(n: usize, alpha: u32) -> String {
    if alpha == 0 {
        return "1".into();
    }
    (0..n).filter(|i| alpha >> i & 1 == 1).map(|i| format!("v{}", i + 1)).collect()
}

fn run_anf(p: &AnfParams) -> Result<Report> {
    let g = BoolFn::from_hex(p.n, &p.hex)?;
    let u = mobius_inverse(&g);
    let back = mobius_forward(&u);
    let monomials: Vec<String> = u.support().iter().map(|&a| monomial_name(p.n, a)).collect();
    Ok(Report::new(
        "anf",
        back == g,
        json!({
            "n": p.n,
            "truth_table": g.to_hex(),
            "anf": u.to_hex(),
            "monomials": monomials,
            "degree": degree(&g),
        }),
    ))
}

fn run_omega(env: &Env, p: &OmegaParams) -> Result<Report> {
    let n = p.n;
    if n == 0 {
        return Err(Error::invalid("omega needs n >= 1"));
    }
    let rs: Vec<usize> = match p.r {
        Some(r) if r == 0 || r > n => return Err(Error::invalid(format!("r = {r} outside 1..={n}"))),
        Some(r) => vec![r],
        None => (1..=n).collect(),
    };
    let exhaustive = n <= 4;
    let functions: Vec<BoolFn> = if exhaustive {
        (0..1u64 << (1 << n)).map(|bits| BoolFn::from_u64(n, bits)).collect::<Result<_>>()?
    } else {
        let seed = need_seed(env.seed, "omega above n = 4")?;
        let trials = p.trials.unwrap_or(DEFAULT_OMEGA_TRIALS);
        env.check_support(trials as usize)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        // random ANFs of random degree, so every degree class is represented
        (0..trials)
            .map(|_| {
                let d = rng.random_range(0..=n as u32);
                let mut u = AnfCoeffs::zero(n)?;
                for a in 0..1u32 << n {
                    if a.count_ones() <= d && rng.random_bool(0.5) {
                        u.set(a, true);
                    }
                }
                Ok(mobius_forward(&u))
            })
            .collect::<Result<_>>()?
    };
    let mut rows = Vec::new();
    let mut table = Table {
        header: ["r", "functions", "members", "mismatch_deg_le_r_minus_1", "mismatch_deg_le_r"].map(String::from).to_vec(),
        rows: Vec::new(),
    };
    let mut verified = true;
    for &r in &rs {
        let (mut members, mut mismatch_low, mut mismatch_r) = (0u64, 0u64, 0u64);
        for g in &functions {
            let member = omega_member(g, r)?;
            let d = degree(g);
            members += u64::from(member);
            mismatch_low += u64::from(member != (d < r as i32));
            mismatch_r += u64::from(member != (d <= r as i32));
        }
        verified &= mismatch_low == 0;
        table.rows.push(vec![
            r.to_string(),
            functions.len().to_string(),
            members.to_string(),
            mismatch_low.to_string(),
            mismatch_r.to_string(),
        ]);
        rows.push(json!({
            "r": r,
            "members": members,
            "mismatches_degree_le_r_minus_1": mismatch_low,
            "mismatches_degree_le_r": mismatch_r,
        }));
    }
    let range = match rs.as_slice() {
        [r] => format!("r={r}"),
        _ => format!("r=1..{n}"),
    };
    let statement = if verified {
        format!("verified: Ω_r ⇔ degree ≤ r−1 for {range}, {} functions", functions.len())
    } else {
        format!("failed: Ω_r ⇔ degree ≤ r−1 does not hold for {range}")
    };
    let mut report = Report::new(
        "omega",
        verified,
        json!({
            "n": n,
            "mode": if exhaustive { "exhaustive" } else { "sampled" },
            "functions": functions.len(),
            "threshold": "degree <= r-1",
            "per_r": rows,
            "statement": statement,
        }),
    );
    report.table = Some(table);
    Ok(report)
}

fn run_rm_distance(p: &RmDistanceParams) -> Result<Report> {
    let g = BoolFn::from_hex(p.n, &p.hex)?;
    let d = rm_distance(&g, p.r)?;
    let rel = BigRational::new(d.into(), (1u64 << p.n).into());
    Ok(Report::new(
        "rm-distance",
        true,
        json!({
            "n": p.n,
            "r": p.r,
            "codewords_log2": rm_dimension(p.n, p.r),
            "distance": d,
            "relative_distance": q(&rel),
            "degree": degree(&g),
        }),
    ))
}

fn run_field_search(env: &Env, p: &FieldSearchParams) -> Result<Report> {
    let mode = match p.samples {
        Some(samples) => SearchMode::Sampled { samples, seed: need_seed(env.seed, "field-search with samples")? },
        None => SearchMode::Exhaustive,
    };
    let report = field_search(p.q, p.d, p.r, mode)?;
    let verified = report.routes_agree && report.affine_implies_low_degree;
    let value = serde_json::to_value(&report).map_err(|e| Error::Internal(e.to_string()))?;
    Ok(Report::new("field-search", verified, value))
}

fn run_hyperplane(env: &Env, p: &HyperplaneArgs) -> Result<Report> {
    let params = HyperplaneParams::new(p.n, parse_rat("p", &p.p)?)?;
    env.check_support(1 << (p.n + 1))?;
    let mu = hyperplane_measure(&params);
    let invariant = is_invariant(&mu);
    let closed = marginal_allzero_prob(&params, p.subcube)?;
    let zero = constant_marginal_prob(&mu, p.subcube, 0)?;
    let one = constant_marginal_prob(&mu, p.subcube, 1)?;
    let verified = invariant && zero == closed && one == closed;
    let mut report = Report::new(
        "hyperplane",
        verified,
        json!({
            "n": p.n,
            "p": q(params.p()),
            "support_size": mu.len(),
            "invariant": invariant,
            "subcube": p.subcube,
            "allzero_closed_form": q(&closed),
            "allzero_enumerated": q(&zero),
            "allone_enumerated": q(&one),
        }),
    );
    if p.save {
        report.files.push(("hyperplane.measure".into(), measure_to_string(&mu)));
    }
    Ok(report)
}

fn parse_group_law(moduli: &[u32], nu: &[String]) -> Result<(FiniteAbelianGroup, Vec<BigRational>)> {
    let group = FiniteAbelianGroup::new(moduli.to_vec())?;
    let nu = nu.iter().map(|s| parse_rat("nu", s)).collect::<Result<Vec<_>>>()?;
    Ok((group, nu))
}

fn run_walk(env: &Env, p: &WalkArgs) -> Result<Report> {
    let (group, nu) = parse_group_law(&p.moduli, &p.nu)?;
    let symmetric = check_nu_symmetry(&group, &nu)?;
    let mu = random_walk_measure(&WalkParams { group, nu, n: p.n })?;
    env.check_support(mu.len())?;
    let invariant = is_invariant(&mu);
    let mut report = Report::new(
        "walk",
        invariant == symmetric,
        json!({
            "n": p.n,
            "moduli": p.moduli,
            "support_size": mu.len(),
            "nu_symmetric": symmetric,
            "invariant": invariant,
        }),
    );
    if p.save {
        report.files.push(("walk.measure".into(), measure_to_string(&mu)));
    }
    Ok(report)
}

fn run_nu_check(p: &NuCheckParams) -> Result<Report> {
    let (group, nu) = parse_group_law(&p.moduli, &p.nu)?;
    let symmetric = check_nu_symmetry(&group, &nu)?;
    Ok(Report::new("nu-check", true, json!({ "moduli": p.moduli, "symmetric": symmetric })))
}

fn run_mixture(env: &Env, p: &MixtureParams) -> Result<Report> {
    let params = HyperplaneParams::new(p.n, parse_rat("p", &p.p)?)?;
    let mu1 = match &p.mu1 {
        Some(path) => env.load(path)?,
        None => ExactMeasure::dirac(Config::constant(p.n, 2, 0)?),
    };
    let mu2 = match &p.mu2 {
        Some(path) => env.load(path)?,
        None => ExactMeasure::dirac(Config::constant(p.n, 2, 1)?),
    };
    let face = if p.free.is_empty() && p.base.is_none() {
        Face::whole(p.n)?
    } else {
        Face::new(&p.free, CubePoint::new(p.n, p.base.unwrap_or(0))?)?
    };
    env.check_support((1usize << (p.n + 1)).saturating_mul(mu1.len()).saturating_mul(mu2.len()))?;
    let r = mixture_experiment(&mu1, &mu2, &params, &face)?;
    let mut table = Table { header: ["pattern", "mixture", "target", "deviation"].map(String::from).to_vec(), rows: Vec::new() };
    for row in &r.rows {
        table.rows.push(vec![format_config(&row.pattern), rational::format(&row.mixture), rational::format(&row.target), rational::format(&row.deviation)]);
    }
    let decomposition: Option<Vec<Value>> = r.output_decomposition.as_ref().map(|d| {
        d.components().iter().map(|(c, w)| json!({ "representative": format_config(c), "weight": q(w) })).collect()
    });
    let verified = r.within_bound && r.output_invariant;
    let mut report = Report::new(
        "mixture",
        verified,
        json!({
            "n": p.n,
            "p": q(params.p()),
            "face_free": r.face.free_coords(),
            "face_base": r.face.base(),
            "m": r.m,
            "epsilon": q(&r.epsilon),
            "bound": q(&r.bound),
            "max_deviation": q(&r.max_deviation),
            "within_bound": r.within_bound,
            "patterns": r.rows.len(),
            "all_patterns_listed": r.all_patterns_listed,
            "lambda_representative": format_config(&r.lambda_representative),
            "lambda_weight": q(&r.lambda_weight),
            "lambda_is_joining": r.lambda_is_joining,
            "output_support_size": r.output.len(),
            "output_invariant": r.output_invariant,
            "output_decomposition": decomposition,
        }),
    );
    report.table = Some(table);
    Ok(report)
}

fn run_dbar(env: &Env, p: &DbarParams) -> Result<Report> {
    let mu = env.load(&p.mu)?;
    let nu = env.load(&p.nu)?;
    let v = CubePoint::new(mu.n(), p.vertex.unwrap_or(0))?;
    let r = dbar_at(&mu, &nu, v)?;
    let alphabet = r.program.alphabet();
    let joining = &r.solution.joining;
    let marginals_ok = alphabet.project_first(joining)? == mu && alphabet.project_second(joining)? == nu;
    let nd = near_diagonal_decomposition(joining, alphabet, v)?;
    let mut vertex_values = Vec::new();
    let mut independent = true;
    if p.all_vertices {
        for x in 0..1u32 << mu.n() {
            let value = dbar_at(&mu, &nu, CubePoint::new(mu.n(), x)?)?.value;
            independent &= value == r.value;
            vertex_values.push(json!({ "vertex": x, "value": q(&value) }));
        }
    }
    let in_range = !r.value.is_negative() && r.value <= BigRational::one();
    let weights: Vec<Value> = r
        .program
        .orbits()
        .iter()
        .zip(&r.solution.weights)
        .filter(|(_, w)| !w.is_zero())
        .map(|(o, w)| {
            json!({
                "representative_first": format_config(&alphabet.first(&o.representative)),
                "representative_second": format_config(&alphabet.second(&o.representative)),
                "weight": q(w),
                "disagreement": q(&o.disagreement),
            })
        })
        .collect();
    let verified = in_range && marginals_ok && is_invariant(joining) && nd.averaging_identity && independent;
    Ok(Report::new(
        "dbar",
        verified,
        json!({
            "n": mu.n(),
            "value": q(&r.value),
            "reference_vertex": v.index(),
            "pair_orbits": r.program.orbits().len(),
            "constraints": r.program.first_orbits().len() + r.program.second_orbits().len(),
            "optimal_weights": weights,
            "joining_marginals_exact": marginals_ok,
            "averaging_identity": nd.averaging_identity,
            "vertex_values": vertex_values,
        }),
    ))
}

fn run_decompose(env: &Env, p: &DecomposeParams) -> Result<Report> {
    let mu = env.load(&p.measure)?;
    if !is_invariant(&mu) {
        return Err(Error::NotInvariant);
    }
    let d = ergodic_decompose(&mu)?;
    let exact = d.reconstruct()? == mu;
    let components: Vec<Value> =
        d.components().iter().map(|(c, w)| json!({ "representative": format_config(c), "weight": q(w) })).collect();
    Ok(Report::new(
        "decompose",
        exact,
        json!({ "n": mu.n(), "k": mu.k(), "support_size": mu.len(), "components": components, "reconstruction_exact": exact }),
    ))
}

fn run_testability(env: &Env, p: &TestabilityParams) -> Result<Report> {
    let r = p.r.unwrap_or(1);
    let trials = p.trials.unwrap_or(0);
    let seed = if trials > 0 { need_seed(env.seed, "testability with trials")? } else { 0 };
    let ns: Vec<usize> = if p.n.is_empty() { (6..=16).collect() } else { p.n.clone() };
    let rows = nontestability_report(r, &ns, p.dim, trials, seed)?;
    let agree = trials == 0 || rows.iter().all(|row| within_three_sigma(row.passes, row.trials, &row.exact_p));
    let mut sorted: Vec<_> = rows.iter().collect();
    sorted.sort_by_key(|row| row.n);
    let monotone = sorted.windows(2).all(|w| w[0].exact_p <= w[1].exact_p);
    let table = Table {
        header: ["n", "J", "r", "trials", "passes", "exact_p", "distance", "rel_distance"].map(String::from).to_vec(),
        rows: rows
            .iter()
            .map(|row| {
                vec![
                    row.n.to_string(),
                    row.j.to_string(),
                    row.r.to_string(),
                    row.trials.to_string(),
                    row.passes.to_string(),
                    rational::format(&row.exact_p),
                    row.distance.to_string(),
                    rational::format(&row.rel_distance),
                ]
            })
            .collect(),
    };
    let brute: Vec<usize> = rows.iter().filter(|row| row.distance_brute_force).map(|row| row.n).collect();
    let mut report = Report::new(
        "testability",
        agree && monotone,
        json!({
            "r": r,
            "J": p.dim,
            "subject": monomial_name(r + 1, (1u32 << (r + 1)) - 1),
            "trials": trials,
            "monte_carlo_within_3_sigma": agree,
            "exact_p_nondecreasing": monotone,
            "brute_force_distance_n": brute,
        }),
    );
    report.table = Some(table);
    Ok(report)
}

fn parse_dmt_sets(ctx: &FiniteContext, items: &[String], default: Vec<u32>) -> Result<Vec<u32>> {
    if items.is_empty() {
        return Ok(default);
    }
    items
        .iter()
        .map(|item| match ctx {
            FiniteContext::Hypergraph { .. } => {
                let points = item
                    .split('+')
                    .map(|s| s.trim().parse::<usize>().map_err(|_| Error::invalid(format!("bad subset '{item}'"))))
                    .collect::<Result<Vec<_>>>()?;
                ctx.subset(&points)
            }
            FiniteContext::Cube { .. } => {
                let t = item.trim().parse::<u32>().map_err(|_| Error::invalid(format!("bad point '{item}'")))?;
                ctx.check_element(t)?;
                Ok(t)
            }
        })
        .collect()
}

fn format_dmt_element(ctx: &FiniteContext, t: u32) -> String {
    match ctx {
        FiniteContext::Hypergraph { n, .. } => {
            (0..*n).filter(|i| t >> i & 1 == 1).map(|i| (i + 1).to_string()).collect::<Vec<_>>().join("+")
        }
        FiniteContext::Cube { .. } => t.to_string(),
    }
}

fn run_dmt(env: &Env, p: &DmtParams) -> Result<Report> {
    let mode = match p.trials {
        Some(trials) => DmtMode::Sampled { trials, seed: need_seed(env.seed, "dmt with trials")? },
        None => DmtMode::Exhaustive,
    };
    let k = p.k.unwrap_or(2);
    let mut table = Table {
        header: ["context", "n", "k", "mode", "hits", "pairs", "fraction", "witnesses_verified", "image_classes"]
            .map(String::from)
            .to_vec(),
        rows: Vec::new(),
    };
    let mut results = Vec::new();
    for &n in &p.n {
        let (ctx, i_default, j_default) = match p.context.as_str() {
            "hypergraph" => {
                let ctx = FiniteContext::hypergraph(n, k)?;
                let first: Vec<usize> = (1..=k).collect();
                let second: Vec<usize> = (k + 1..=2 * k).collect();
                let defaults = if 2 * k <= n { Some((ctx.subset(&first)?, ctx.subset(&second)?)) } else { None };
                let (i, j) = defaults.map_or((vec![], vec![]), |(a, b)| (vec![a], vec![b]));
                (ctx, i, j)
            }
            "cube" => (FiniteContext::cube(n)?, vec![0], vec![(1u32 << n) - 1]),
            other => return Err(Error::invalid(format!("unknown context '{other}'"))),
        };
        let i = parse_dmt_sets(&ctx, &p.i, i_default)?;
        let j = parse_dmt_sets(&ctx, &p.j, j_default)?;
        if mode == DmtMode::Exhaustive {
            env.check_group(ctx.group_order())?;
        }
        let r = dmt_fraction(&DmtQuery { context: ctx, i: i.clone(), j: j.clone(), mode })?;
        let (kind, kk) = match ctx {
            FiniteContext::Hypergraph { k, .. } => ("hypergraph", k.to_string()),
            FiniteContext::Cube { .. } => ("cube", String::new()),
        };
        let mode_name = if mode == DmtMode::Exhaustive { "exhaustive" } else { "sampled" };
        table.rows.push(vec![
            kind.into(),
            n.to_string(),
            kk,
            mode_name.into(),
            r.hits.to_string(),
            r.pairs.to_string(),
            rational::format(&r.fraction()),
            r.witnesses_verified.to_string(),
            r.image_classes.map_or(String::new(), |c| c.to_string()),
        ]);
        results.push(json!({
            "n": n,
            "i": i.iter().map(|&t| format_dmt_element(&ctx, t)).collect::<Vec<_>>(),
            "j": j.iter().map(|&t| format_dmt_element(&ctx, t)).collect::<Vec<_>>(),
            "hits": r.hits.to_string(),
            "pairs": r.pairs.to_string(),
            "fraction": q(&r.fraction()),
            "witnesses_verified": r.witnesses_verified,
        }));
    }
    let mut report = Report::new("dmt", true, json!({ "context": p.context, "mode": if p.trials.is_some() { "sampled" } else { "exhaustive" }, "rows": results }));
    report.table = Some(table);
    Ok(report)
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::ResourceLimit(_) => 3,
        Error::Internal(_) | Error::Io(_) => 4,
        _ => 2,
    }
}

fn error_json(e: &Error) -> String {
    let kind = match e {
        Error::DimensionMismatch { .. } => "dimension_mismatch",
        Error::AlphabetMismatch { .. } => "alphabet_mismatch",
        Error::InvalidArgument(_) => "invalid_argument",
        Error::ResourceLimit(_) => "resource_limit",
        Error::NotInvariant => "not_invariant",
        Error::InvalidMeasure(_) => "invalid_measure",
        Error::Parse { .. } => "parse",
        Error::Internal(_) => "internal",
        Error::Io(_) => "io",
    };
    let mut record = json!({ "error": { "kind": kind, "message": e.to_string(), "exit_code": exit_code(e) } });
    if let Error::Parse { line, column, .. } = e {
        record["error"]["line"] = json!(line);
        record["error"]["column"] = json!(column);
    }
    record.to_string()
}

fn write_outputs(report: &Report, manifest: &Manifest, json_text: &str) -> Result<()> {
    let Some(dir) = &manifest.out else { return Ok(()) };
    fs::create_dir_all(dir)?;
    fs::write(dir.join(format!("{}.json", report.command)), json_text)?;
    if let Some(csv) = report.to_csv(manifest) {
        fs::write(dir.join(format!("{}.csv", report.command)), csv)?;
    }
    for (name, contents) in &report.files {
        fs::write(dir.join(name), contents)?;
    }
    Ok(())
}

fn manifest_from_cli(cli: Cli) -> Result<(Manifest, PathBuf)> {
    let (mut manifest, base_dir) = match cli.command {
        Command::Run { manifest } => {
            let text = fs::read_to_string(&manifest)?;
            let parsed = Manifest::parse(&text)?;
            let base = manifest.parent().map(Path::to_path_buf).unwrap_or_default();
            (parsed, base)
        }
        Command::Experiment(experiment) => {
            (Manifest { experiment, seed: None, out: None, limits: Limits::default() }, PathBuf::new())
        }
    };
    if cli.seed.is_some() {
        manifest.seed = cli.seed;
    }
    if cli.out.is_some() {
        manifest.out = cli.out;
    }
    if cli.max_support.is_some() {
        manifest.limits.max_support = cli.max_support;
    }
    if cli.max_group_order.is_some() {
        manifest.limits.max_group_order = cli.max_group_order;
    }
    Ok((manifest, base_dir))
}

/// Parses arguments, runs the experiment and returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return 0;
            }
            let message = e.render().to_string();
            let record = json!({ "error": { "kind": "usage", "message": message.trim_end(), "exit_code": 2 } });
            eprintln!("{record}");
            return 2;
        }
    };
    let outcome = manifest_from_cli(cli).and_then(|(manifest, base)| {
        let report = execute(&manifest, &base)?;
        let text = report.to_json(&manifest);
        write_outputs(&report, &manifest, &text)?;
        Ok((report, text))
    });
    match outcome {
        Ok((report, text)) => {
            print!("{text}");
            if report.verified {
                0
            } else {
                1
            }
        }
        Err(e) => {
            eprintln!("{}", error_json(&e));
            exit_code(&e)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn manifest_round_trip_and_hash() {
        let text = "command = \"hyperplane\"\nseed = 3\n[params]\nn = 4\np = \"1/8\"\nsubcube = 3\n";
        let m = Manifest::parse(text).unwrap();
        assert_eq!(m.seed, Some(3));
        assert!(matches!(m.experiment, Experiment::Hyperplane(_)));
        assert_eq!(m.sha256().len(), 64);
        assert_eq!(m.sha256(), Manifest::parse(text).unwrap().sha256());
    }

    #[test]
    fn manifest_errors_have_positions() {
        let text = "command = \"hyperplane\"\n[params]\nn = 4\nq = \"1/8\"\nsubcube = 3\n";
        assert!(matches!(Manifest::parse(text), Err(Error::Parse { .. })));
        let text = "command = \"nope\"\n[params]\n";
        assert!(matches!(Manifest::parse(text), Err(Error::Parse { .. })));
        assert_eq!(line_column("ab\ncd", 4), (2, 2));
    }

    #[test]
    fn hyperplane_report() {
        let m = Manifest::parse("command = \"hyperplane\"\n[params]\nn = 4\np = \"1/8\"\nsubcube = 3\n").unwrap();
        let r = execute(&m, Path::new(".")).unwrap();
        assert!(r.verified);
        assert_eq!(r.result["allzero_closed_form"], "343/1024");
    }

    #[test]
    fn exit_codes() {
        assert_eq!(exit_code(&Error::limit("x")), 3);
        assert_eq!(exit_code(&Error::invalid("x")), 2);
        assert_eq!(exit_code(&Error::Internal("x".into())), 4);
        assert!(error_json(&Error::Parse { line: 2, column: 5, message: "m".into() }).contains("\"line\":2"));
    }

    #[test]
    fn sampled_runs_need_seeds() {
        let m = Manifest::parse("command = \"testability\"\n[params]\ndim = 4\nn = [10]\ntrials = 100\n").unwrap();
        assert!(matches!(execute(&m, Path::new(".")), Err(Error::InvalidArgument(_))));
    }
}
