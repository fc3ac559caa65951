//! Command-line driver: presentation files, the four commands, and result documents.

pub mod document;
pub mod render;
pub mod verify;

use std::collections::BTreeMap;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::bar_hochschild::{compute_hh_window, Coefficients, DegreeWindow};
use crate::bv::BvEngine;
use crate::graded_algebra::{parse_presentation, validate_regular_sequence, AlgebraPresentation, GradedAlgebra, PresentationDoc, WindowDoc};
use crate::koszul_tate::hh_via_kt;
use crate::moore_ss::{collapse_certificate, resolve_bv_extension, resolve_product_extension, BigradedRing};
use document::*;

pub const DIAGONAL_CONVENTION: &str = "front-back split on bar cochains; slotwise Koszul-Tate diagonal, with w-generator corrections solved from dD = Dd";
pub const ZETA_CONSTRUCTION: &str = "telescoping difference quotients, verified against the dual conditions";
pub const FUNDAMENTAL_CLASS: &str = "[m] = dual of the top-degree basis monomial";
pub const BV_EVALUATION: &str =
    "Delta = theta^-1 iota B^dual iota^-1 theta at cochain level; theta(f) = f cup [m]; classes identified through the bar pullback of the Koszul-Tate representatives";

#[derive(Debug, Parser)]
#[command(name = "hochschild", version, about = "Hochschild cohomology rings and BV operators of graded complete intersections")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Bigraded HH table and products through the Koszul–Tate resolution.
    Compute(JobArgs),
    /// Bar-complex cross-check of `compute`, cell by cell.
    Oracle(JobArgs),
    /// BV operator table for a Poincaré duality algebra.
    Bv(JobArgs),
    /// Run the invariant suites.
    Verify(JobArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Text,
}

#[derive(Debug, Clone, Args)]
pub struct JobArgs {
    #[arg(long)]
    pub input: Option<PathBuf>,
    #[arg(long)]
    pub max_p: Option<usize>,
    #[arg(long, allow_hyphen_values = true)]
    pub q_min: Option<i32>,
    #[arg(long, allow_hyphen_values = true)]
    pub q_max: Option<i32>,
    #[arg(long, value_enum, default_value = "json")]
    pub format: Format,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub max_bar_length: Option<usize>,
    /// Refuse oracle runs whose largest cochain cell is estimated above this size.
    #[arg(long, default_value_t = 2_000_000)]
    pub oracle_cell_limit: usize,
    /// Perturb ζ before it is verified (fault injection for the suites).
    #[arg(long, hide = true)]
    pub corrupt_zeta: bool,
}

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 1;
pub const EXIT_MISMATCH: i32 = 2;
pub const EXIT_INTERNAL: i32 = 3;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CliError {
    Input(String),
    Internal(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => EXIT_INPUT,
            CliError::Internal(_) => EXIT_INTERNAL,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            CliError::Input(m) | CliError::Internal(m) => m,
        }
    }
}

fn internal(e: impl std::fmt::Display) -> CliError {
    CliError::Internal(e.to_string())
}

/// Everything a run depends on.
#[derive(Debug, Clone)]
pub struct JobConfig {
    pub command: String,
    pub doc: PresentationDoc,
    pub pres: AlgebraPresentation,
    pub window: DegreeWindow,
    pub format: Format,
    pub seed: u64,
    pub max_bar_length: Option<usize>,
    pub oracle_cell_limit: usize,
    pub corrupt_zeta: bool,
}

const DEFAULT_WINDOW: WindowDoc = WindowDoc { max_filtration: 4, q_min: -24, q_max: 24 };

fn expect_field<'a>(obj: &'a serde_json::Map<String, Value>, key: &str, path: &str) -> Result<&'a Value, CliError> {
    obj.get(key).ok_or_else(|| CliError::Input(format!("{path}{key}: missing")))
}

/// Field-by-field validation so that diagnostics name the offending entry.
fn validate_document(v: &Value) -> Result<(), CliError> {
    let bad = |msg: String| Err(CliError::Input(msg));
    let Some(obj) = v.as_object() else { return bad("presentation: expected a JSON object".into()) };
    let c = expect_field(obj, "characteristic", "")?;
    if c.as_u64().is_none() {
        return bad(format!("characteristic: expected a prime, found {c}"));
    }
    let gens = expect_field(obj, "generators", "")?;
    let Some(gens) = gens.as_array() else { return bad("generators: expected an array".into()) };
    for (i, g) in gens.iter().enumerate() {
        let Some(g) = g.as_object() else { return bad(format!("generators[{i}]: expected an object")) };
        let path = format!("generators[{i}].");
        if !expect_field(g, "name", &path)?.is_string() {
            return bad(format!("{path}name: expected a string"));
        }
        let d = expect_field(g, "degree", &path)?;
        if !d.as_u64().is_some_and(|d| d >= 1 && d <= u32::MAX as u64) {
            return bad(format!("{path}degree: expected a positive integer, found {d}"));
        }
        let k = expect_field(g, "kind", &path)?;
        if !matches!(k.as_str(), Some("exterior" | "polynomial")) {
            return bad(format!("{path}kind: expected \"exterior\" or \"polynomial\", found {k}"));
        }
    }
    if let Some(rels) = obj.get("relations") {
        let Some(rels) = rels.as_array() else { return bad("relations: expected an array of strings".into()) };
        for (i, r) in rels.iter().enumerate() {
            if !r.is_string() {
                return bad(format!("relations[{i}]: expected a string, found {r}"));
            }
        }
    }
    if let Some(w) = obj.get("window") {
        let Some(w) = w.as_object() else { return bad("window: expected an object".into()) };
        for key in ["max_filtration", "q_min", "q_max"] {
            let x = expect_field(w, key, "window.")?;
            if x.as_i64().is_none() {
                return bad(format!("window.{key}: expected an integer, found {x}"));
            }
        }
        if w["max_filtration"].as_i64().unwrap() < 0 {
            return bad(format!("window.max_filtration: must be non-negative, found {}", w["max_filtration"]));
        }
    }
    Ok(())
}

pub fn load_presentation(text: &str) -> Result<(AlgebraPresentation, PresentationDoc), CliError> {
    let v: Value = serde_json::from_str(text).map_err(|e| CliError::Input(format!("presentation: malformed JSON: {e}")))?;
    validate_document(&v)?;
    let doc: PresentationDoc = serde_json::from_value(v).map_err(|e| CliError::Input(format!("presentation: {e}")))?;
    let pres = parse_presentation(&doc).map_err(|e| CliError::Input(e.to_string()))?;
    check_regular(&pres)?;
    Ok((pres, doc))
}

/// Relations must form a regular sequence. With as many relations as polynomial
/// generators the Hilbert-series test through `top + max generator degree` is
/// conclusive; with fewer it runs through `Σ deg ρ + 2·max generator degree`.
fn check_regular(pres: &AlgebraPresentation) -> Result<(), CliError> {
    let (k, m) = (pres.relations.len(), pres.n_polynomial());
    if k == 0 {
        return Ok(());
    }
    if k > m {
        return Err(CliError::Input(format!("relations: {k} relations in {m} polynomial generators cannot form a regular sequence")));
    }
    let g = (0..m).map(|j| pres.polynomial_degree(j)).max().unwrap_or(1);
    let poly_top: i32 = (0..k).map(|i| pres.relation_degree(i)).sum::<i32>() - (0..m).map(|j| pres.polynomial_degree(j)).sum::<i32>();
    let bound = if k == m { poly_top + g } else { (0..k).map(|i| pres.relation_degree(i)).sum::<i32>() + 2 * g };
    let report = validate_regular_sequence(pres, bound);
    match report.first_failing_degree {
        None => Ok(()),
        Some(d) => Err(CliError::Input(format!("relations: not a regular sequence (Hilbert series differs in degree {d})"))),
    }
}

impl JobConfig {
    pub fn from_args(command: &str, args: &JobArgs) -> Result<Self, CliError> {
        let (pres, mut doc) = match &args.input {
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| CliError::Input(format!("--input {}: {e}", path.display())))?;
                load_presentation(&text)?
            }
            None if command == "verify" => {
                let doc = PresentationDoc { characteristic: 2, generators: Vec::new(), relations: Vec::new(), window: None };
                (parse_presentation(&doc).map_err(internal)?, doc)
            }
            None => return Err(CliError::Input("--input: a presentation file is required".into())),
        };
        let file = doc.window.unwrap_or(DEFAULT_WINDOW);
        let window = DegreeWindow {
            max_p: args.max_p.unwrap_or(file.max_filtration as usize),
            q_min: args.q_min.unwrap_or(file.q_min),
            q_max: args.q_max.unwrap_or(file.q_max),
        };
        if window.q_min > window.q_max {
            return Err(CliError::Input(format!("window: q_min ({}) exceeds q_max ({})", window.q_min, window.q_max)));
        }
        if args.max_bar_length == Some(0) {
            return Err(CliError::Input("--max-bar-length: must be positive".into()));
        }
        doc.window = Some(WindowDoc { max_filtration: window.max_p as i32, q_min: window.q_min, q_max: window.q_max });
        Ok(JobConfig {
            command: command.into(),
            doc,
            pres,
            window,
            format: args.format,
            seed: args.seed,
            max_bar_length: args.max_bar_length,
            oracle_cell_limit: args.oracle_cell_limit,
            corrupt_zeta: args.corrupt_zeta,
        })
    }

    /// SHA-256 of the canonical presentation (window excluded).
    pub fn presentation_hash(&self) -> String {
        let mut doc = self.doc.clone();
        doc.window = None;
        let canonical = serde_json::to_string(&doc).expect("presentation serializes");
        hex::encode(Sha256::digest(canonical.as_bytes()))
    }

    fn metadata(&self, choices: Choices, notes: Vec<String>) -> Metadata {
        Metadata {
            tool: "hochschild".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            command: self.command.clone(),
            presentation_hash: self.presentation_hash(),
            presentation: self.doc.clone(),
            window: WindowRecord { max_filtration: self.window.max_p, q_min: self.window.q_min, q_max: self.window.q_max },
            seed: self.seed,
            choices,
            notes,
        }
    }

    fn base_choices(&self) -> Choices {
        Choices {
            diagonal_convention: DIAGONAL_CONVENTION.into(),
            zeta_construction: ZETA_CONSTRUCTION.into(),
            lifting_depth: self.window.max_p,
            fundamental_class: None,
            bv_evaluation: None,
            max_bar_length: None,
            oracle_cell_limit: None,
        }
    }
}

fn hh_table(ring: &BigradedRing, window: DegreeWindow) -> Vec<HhCell> {
    let mut out = Vec::new();
    for p in 0..=window.max_p as i32 {
        for q in window.q_min..=window.q_max {
            let members = ring.cell(p, q);
            let basis = members.iter().map(|&i| ring.classes()[i].label.clone()).collect();
            out.push(HhCell { p, q, dim: members.len(), basis });
        }
    }
    out
}

fn product_table(ring: &BigradedRing) -> Vec<ProductEntry> {
    let classes = ring.classes();
    let mut out = Vec::new();
    for i in 0..classes.len() {
        for j in i..classes.len() {
            let Some(prod) = ring.product(i, j) else { continue };
            let (a, b) = (&classes[i], &classes[j]);
            out.push(ProductEntry {
                left: a.label.clone(),
                right: b.label.clone(),
                left_cell: (a.p, a.q),
                right_cell: (b.p, b.q),
                cell: (a.p + b.p, a.q + b.q),
                product: prod.into_iter().map(|(k, c)| (classes[k].label.clone(), c)).collect(),
            });
        }
    }
    out
}

fn kt_ring(cfg: &JobConfig, with_products: bool) -> Result<BigradedRing, CliError> {
    let (res, kt) = hh_via_kt(&cfg.pres, cfg.window).map_err(internal)?;
    kt.ring(&res, cfg.window, with_products).map_err(internal)
}

pub fn cmd_compute(cfg: &JobConfig) -> Result<(ResultDocument, i32), CliError> {
    let ring = kt_ring(cfg, true)?;
    let doc = ResultDocument {
        metadata: cfg.metadata(cfg.base_choices(), Vec::new()),
        hh_table: hh_table(&ring, cfg.window),
        product_table: product_table(&ring),
        bv_table: Vec::new(),
        extension_report: Vec::new(),
        bv_sweep: None,
        oracle_report: None,
        certificate: Some(collapse_certificate(&ring)),
        invariants: Vec::new(),
    };
    Ok((doc, EXIT_OK))
}

/// Upper estimate of the bar cochain cell `(p, q)` from the Hilbert function.
pub fn estimate_cochain_cell(alg: &GradedAlgebra, p: usize, q: i32, weight_cap: i32) -> usize {
    let top = alg.presentation().top_degree().unwrap_or(weight_cap);
    // words[w] = number of length-k words of positive-degree monomials with weight w.
    let mut words = vec![0usize; weight_cap.max(0) as usize + 1];
    words[0] = 1;
    for _ in 0..p {
        let mut next = vec![0usize; words.len()];
        for (w, &n) in words.iter().enumerate() {
            if n == 0 {
                continue;
            }
            for d in 1..=top.min(weight_cap) {
                let t = w + d as usize;
                if t < next.len() {
                    next[t] = next[t].saturating_add(n.saturating_mul(alg.dim(d)));
                }
            }
        }
        words = next;
    }
    words
        .iter()
        .enumerate()
        .map(|(w, &n)| {
            let vd = w as i32 + q;
            if vd < 0 || vd > top {
                0
            } else {
                n.saturating_mul(alg.dim(vd))
            }
        })
        .fold(0usize, usize::saturating_add)
}

pub fn cmd_oracle(cfg: &JobConfig) -> Result<(ResultDocument, i32), CliError> {
    let ring = kt_ring(cfg, false)?;
    let bar_length = cfg.max_bar_length.unwrap_or(cfg.window.max_p + 1);
    let oracle_p = cfg.window.max_p.min(bar_length - 1);
    let pres = &cfg.pres;
    let g = pres.max_generator_degree().max(1);
    let cap = match pres.top_degree() {
        Some(top) => top * (oracle_p as i32 + 2),
        None => (-cfg.window.q_min).max(0) + (oracle_p as i32 + 9) * g,
    };
    let alg = GradedAlgebra::new(pres, pres.top_degree().unwrap_or(cap));
    let mut estimate = 0usize;
    for q in cfg.window.q_min..=cfg.window.q_max {
        estimate = estimate.max(estimate_cochain_cell(&alg, oracle_p + 1, q, cap));
    }
    if estimate > cfg.oracle_cell_limit {
        return Err(CliError::Input(format!(
            "oracle refused: estimated cochain cell of size {estimate} at bar length {} exceeds the limit {}",
            oracle_p + 1,
            cfg.oracle_cell_limit
        )));
    }
    let oracle_window = DegreeWindow { max_p: oracle_p, ..cfg.window };
    let bar = compute_hh_window(pres, Coefficients::Algebra, oracle_window).map_err(internal)?;
    let mut cells = Vec::new();
    let mut excluded = Vec::new();
    for p in 0..=cfg.window.max_p {
        for q in cfg.window.q_min..=cfg.window.q_max {
            let kt_dim = ring.dim(p as i32, q);
            match bar.cells.get(&(p, q)) {
                Some(c) if !c.edge => cells.push(OracleCell { p: p as i32, q, koszul_tate_dim: kt_dim, bar_dim: c.dim, agree: kt_dim == c.dim }),
                _ => excluded.push((p as i32, q)),
            }
        }
    }
    let agree = cells.iter().all(|c| c.agree);
    let note = (!excluded.is_empty()).then(|| {
        format!(
            "edge cells excluded: {} cells lie beyond bar length {bar_length} or did not stabilize under weight truncation",
            excluded.len()
        )
    });
    let mut choices = cfg.base_choices();
    choices.max_bar_length = Some(bar_length);
    choices.oracle_cell_limit = Some(cfg.oracle_cell_limit);
    let doc = ResultDocument {
        metadata: cfg.metadata(choices, Vec::new()),
        hh_table: hh_table(&ring, cfg.window),
        product_table: Vec::new(),
        bv_table: Vec::new(),
        extension_report: Vec::new(),
        bv_sweep: None,
        oracle_report: Some(OracleReport { agree, bar_length, estimated_largest_cell: estimate, cells, edge_cells_excluded: excluded, note }),
        certificate: None,
        invariants: Vec::new(),
    };
    Ok((doc, if agree { EXIT_OK } else { EXIT_MISMATCH }))
}

pub fn cmd_bv(cfg: &JobConfig) -> Result<(ResultDocument, i32), CliError> {
    use crate::bv::BvError;
    let engine = BvEngine::new(&cfg.pres, cfg.window, cfg.window.max_p).map_err(|e| match e {
        BvError::NotPoincare(_) | BvError::Degenerate(_) => CliError::Input(e.to_string()),
        e => internal(e),
    })?;
    let ring = &engine.ring;
    let mut notes = Vec::new();
    let bar_delta = engine.delta_table().map_err(internal)?;
    let graded = engine.graded_delta_table().ok();
    if graded.is_none() {
        notes.push(format!(
            "characteristic {}: the graded Delta is taken from the bar computation; this regime is outside the scope of the closed-form characteristic 2 exterior formula",
            cfg.pres.field.characteristic()
        ));
    }
    let gr_table = graded.clone().unwrap_or_else(|| bar_delta.clone());
    let mut bv_table = Vec::new();
    for c in ring.classes() {
        let r = resolve_bv_extension(ring, &gr_table, &c.label).map_err(internal)?;
        bv_table.push(BvEntry {
            class: c.label.clone(),
            cell: (c.p, c.q),
            delta: bar_delta[&c.label].clone(),
            graded_delta: graded.as_ref().map(|g| g[&c.label].clone()),
            status: r.status,
            ambiguity: r.ambiguity,
        });
    }
    let gens = engine.generator_labels();
    let mut extension_report = Vec::new();
    for (i, a) in gens.iter().enumerate() {
        for b in &gens[i..] {
            let Ok(r) = resolve_product_extension(ring, a, b) else { continue };
            extension_report.push(ExtensionEntry {
                operation: "product".into(),
                operands: vec![a.clone(), b.clone()],
                status: r.status,
                value: r.value,
                filtration: r.filtration,
                ambiguity: r.ambiguity,
            });
        }
    }
    for c in ring.classes() {
        let r = resolve_bv_extension(ring, &gr_table, &c.label).map_err(internal)?;
        extension_report.push(ExtensionEntry {
            operation: "bv".into(),
            operands: vec![c.label.clone()],
            status: r.status,
            value: r.value,
            filtration: r.filtration,
            ambiguity: r.ambiguity,
        });
    }
    let refs: Vec<&str> = gens.iter().map(String::as_str).collect();
    let checks = engine.check_bv_identities(&refs).map_err(internal)?;
    let identity_failures: Vec<String> =
        checks.iter().filter(|c| !c.holds).map(|c| format!("{} {} {}: residual {:?}", c.triple[0], c.triple[1], c.triple[2], c.residual)).collect();
    let delta_squared_failures = engine.delta_squared_failures().map_err(internal)?;
    let mut theta_rank_failures = Vec::new();
    for &(p, q) in ring.cells().keys() {
        if !engine.theta_is_bijective(p, q).map_err(internal)? {
            theta_rank_failures.push((p, q));
        }
    }
    let consistent = identity_failures.is_empty() && delta_squared_failures.is_empty() && theta_rank_failures.is_empty();
    let mut choices = cfg.base_choices();
    choices.fundamental_class = Some(format!("{FUNDAMENTAL_CLASS} ({}, degree {})", engine.pd.omega_label, engine.pd.dimension));
    choices.bv_evaluation = Some(BV_EVALUATION.into());
    let doc = ResultDocument {
        metadata: cfg.metadata(choices, notes),
        hh_table: hh_table(ring, cfg.window),
        product_table: Vec::new(),
        bv_table,
        extension_report,
        bv_sweep: Some(BvSweep { triples_checked: checks.len(), identity_failures, delta_squared_failures, theta_rank_failures }),
        oracle_report: None,
        certificate: None,
        invariants: Vec::new(),
    };
    Ok((doc, if consistent { EXIT_OK } else { EXIT_INTERNAL }))
}

pub fn cmd_verify(cfg: &JobConfig) -> Result<(ResultDocument, i32), CliError> {
    let mut corpus = verify::default_corpus();
    if !cfg.doc.generators.is_empty() {
        corpus.push(verify::CorpusEntry { name: "input".into(), pres: cfg.pres.clone() });
    }
    let invariants = verify::run_all(&corpus, cfg.seed, cfg.corrupt_zeta);
    let passed = invariants.iter().all(|r| r.passed);
    let notes = corpus.iter().map(|c| format!("corpus: {}", c.name)).collect();
    let doc = ResultDocument {
        metadata: cfg.metadata(cfg.base_choices(), notes),
        hh_table: Vec::new(),
        product_table: Vec::new(),
        bv_table: Vec::new(),
        extension_report: Vec::new(),
        bv_sweep: None,
        oracle_report: None,
        certificate: None,
        invariants,
    };
    Ok((doc, if passed { EXIT_OK } else { EXIT_INTERNAL }))
}

/// Result of one invocation: what goes to stdout and stderr, and the exit code.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub stdout: String,
    pub stderr: String,
    pub code: i32,
}

pub fn run_command(command: &Command) -> Outcome {
    let (name, args) = match command {
        Command::Compute(a) => ("compute", a),
        Command::Oracle(a) => ("oracle", a),
        Command::Bv(a) => ("bv", a),
        Command::Verify(a) => ("verify", a),
    };
    let result = JobConfig::from_args(name, args).and_then(|cfg| {
        let (doc, code) = match name {
            "compute" => cmd_compute(&cfg)?,
            "oracle" => cmd_oracle(&cfg)?,
            "bv" => cmd_bv(&cfg)?,
            _ => cmd_verify(&cfg)?,
        };
        let text = match cfg.format {
            Format::Json => serde_json::to_string_pretty(&doc).map_err(internal)? + "\n",
            Format::Text => render::text(&doc),
        };
        Ok((text, code))
    });
    match result {
        Ok((stdout, code)) => Outcome { stdout, stderr: String::new(), code },
        Err(e) => Outcome { stdout: String::new(), stderr: format!("error: {}\n", e.message()), code: e.exit_code() },
    }
}

/// Parse `argv` and run; argument errors map to the input-error exit code.
pub fn run<I, T>(argv: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    match Cli::try_parse_from(argv) {
        Ok(cli) => run_command(&cli.command),
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            let rendered = e.render().to_string();
            if e.use_stderr() {
                Outcome { stdout: String::new(), stderr: rendered, code }
            } else {
                Outcome { stdout: rendered, stderr: String::new(), code }
            }
        }
    }
}

/// Cell dimensions of a table as a map, for comparisons.
pub fn dims(table: &[HhCell]) -> BTreeMap<(i32, i32), usize> {
    table.iter().map(|c| ((c.p, c.q), c.dim)).collect()
}
