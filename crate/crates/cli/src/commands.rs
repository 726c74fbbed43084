use std::path::PathBuf;

use annulus_core::classes::{classify, is_doubly_commuting, ClassCertificate, OperatorTuple};
use annulus_core::decomposition::{tuple_decompose, tuple_decompose_qar, DecompositionResult};
use annulus_core::dilation::{dilate, dilate_qar, DilationModel, ModelClass, OffsetPolicy, SnapPolicy};
use annulus_core::instances::{
    default_tensor_factors, gen_normal_tuple, gen_scalar_family, gen_tensor_tuple, SarasonShift,
};
use annulus_core::spectral::{joint_spectral_resolution, snap_resolution, ud_factorize};
use annulus_core::{Error, Tolerances};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use crate::error::CliError;
use crate::report::{basis_json, matrix_json, sha256_hex, Report, Status, ToleranceEcho};
use crate::tuple_file::TupleFile;

#[derive(Debug, Parser)]
#[command(name = "annulus", version, about = "Certificates, dilations and decompositions for annulus operator tuples")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Class certificates for every operator and the double-commutation test.
    Check(CheckArgs),
    /// Build the quadrature dilation and compare its moments with the tuple.
    Dilate(DilateArgs),
    /// Split the space into labeled exact / completely non-unitary blocks.
    Decompose(DecomposeArgs),
    /// Unitary-positive factorization and joint spectral resolution.
    Factor(FactorArgs),
    /// Write a generated tuple file.
    Generate(GenerateArgs),
}

#[derive(Debug, Args)]
pub struct Common {
    /// Tuple file.
    pub path: PathBuf,
    /// Radius overriding the one stored in the file.
    #[arg(long)]
    pub r: Option<f64>,
    /// Write the report here instead of stdout.
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Requirement {
    C1r,
    Qar,
    ExactC1r,
    ExactQar,
    DoublyCommuting,
}

#[derive(Debug, Args)]
pub struct CheckArgs {
    #[command(flatten)]
    pub common: Common,
    /// Memberships that must hold for a zero exit code.
    #[arg(long = "require", value_enum)]
    pub require: Vec<Requirement>,
}

#[derive(Debug, Args)]
pub struct DilateArgs {
    #[command(flatten)]
    pub common: Common,
    /// Node count; give it twice to report the convergence ratio.
    #[arg(long = "nodes", default_value = "1024", num_args = 1)]
    pub nodes: Vec<usize>,
    #[arg(long, default_value_t = 3)]
    pub max_power: i32,
    /// Dyadic level used when some eigenvalue sits on the band edge.
    #[arg(long, default_value_t = annulus_core::dilation::DEFAULT_SNAP_LEVEL)]
    pub snap_level: u32,
    /// Treat the tuple as a quantum-annulus tuple.
    #[arg(long)]
    pub qa: bool,
    /// Fail instead of falling back when no node offset clears the
    /// exceptional points.
    #[arg(long)]
    pub strict_offset: bool,
    /// Export nodes and node blocks of the last model.
    #[arg(long)]
    pub export: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct DecomposeArgs {
    #[command(flatten)]
    pub common: Common,
    /// Treat the tuple as a quantum-annulus tuple
    #[arg(long)]
    pub qa: bool,
}

#[derive(Debug, Args)]
pub struct FactorArgs {
    #[command(flatten)]
    pub common: Common,
    /// Also report the dyadic approximation at this level.
    #[arg(long)]
    pub snap_level: Option<u32>,
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    #[arg(value_enum)]
    pub kind: Kind,
    #[arg(long, default_value_t = 0.5)]
    pub r: f64,
    /// Exponent of the scalar family `r^{1/(2n)} I`.
    #[arg(long, default_value_t = 1)]
    pub n: u32,
    #[arg(long, default_value_t = 0.3)]
    pub alpha: f64,
    #[arg(long, default_value_t = 8)]
    pub half_width: usize,
    /// Number of operators (normal tuples).
    #[arg(long, default_value_t = 2)]
    pub d: usize,
    /// Space dimension (scalar and normal tuples; second factor of tensor
    /// tuples).
    #[arg(long, default_value_t = 2)]
    pub dim: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Kind {
    Scalar,
    Sarason,
    Normal,
    Tensor,
}

/// Output text, exit code, and warnings for stderr.
pub struct Outcome {
    pub text: String,
    pub code: u8,
    pub destination: Option<PathBuf>,
    pub warnings: Vec<String>,
}

struct Loaded {
    tuple: OperatorTuple,
    digest: String,
    warnings: Vec<String>,
}

fn load(common: &Common, tol: &Tolerances) -> Result<Loaded, CliError> {
    let bytes = std::fs::read(&common.path).map_err(|e| CliError::Input(format!("{}: {e}", common.path.display())))?;
    let text = std::str::from_utf8(&bytes).map_err(|_| CliError::Input("tuple file is not UTF-8".into()))?;
    let file = TupleFile::parse(text)?;
    let mut warnings = Vec::new();
    let r = match common.r {
        Some(r) if r != file.r => {
            warnings.push(format!("radius {r} from the command line overrides {} from the file", file.r));
            r
        }
        Some(r) => r,
        None => file.r,
    };
    Ok(Loaded { tuple: file.to_tuple(r, tol)?, digest: sha256_hex(&bytes), warnings })
}

fn report(command: &str, digest: String, tol: &Tolerances, results: Value, status: Status) -> Report {
    Report { command: command.into(), input_digest: digest, tolerances: ToleranceEcho::from(tol), results, status }
}

/// Runs one command. Failures after the input was read still produce an
/// error report.
pub fn run(cli: Cli, tol: &Tolerances) -> Result<Outcome, (CliError, Option<Outcome>)> {
    match cli.command {
        Command::Generate(args) => generate(&args, tol).map_err(|e| (e, None)),
        Command::Check(args) => with_report("check", &args.common, tol, |t| check(t, &args, tol)),
        Command::Dilate(args) => with_report("dilate", &args.common, tol, |t| dilate_cmd(t, &args, tol)),
        Command::Decompose(args) => with_report("decompose", &args.common, tol, |t| decompose(t, &args, tol)),
        Command::Factor(args) => with_report("factor", &args.common, tol, |t| factor(t, &args, tol)),
    }
}

fn with_report(
    command: &str,
    common: &Common,
    tol: &Tolerances,
    body: impl FnOnce(&OperatorTuple) -> Result<(Value, Status, u8), CliError>,
) -> Result<Outcome, (CliError, Option<Outcome>)> {
    let loaded = load(common, tol).map_err(|e| (e, None))?;
    match body(&loaded.tuple) {
        Ok((results, status, code)) => Ok(Outcome {
            text: report(command, loaded.digest, tol, results, status).to_canonical_string(),
            code,
            destination: common.output.clone(),
            warnings: loaded.warnings,
        }),
        Err(e) => {
            let results = json!({ "error": { "kind": e.kind(), "message": e.to_string() } });
            let out = Outcome {
                text: report(command, loaded.digest, tol, results, Status::Error).to_canonical_string(),
                code: e.exit_code(),
                destination: common.output.clone(),
                warnings: loaded.warnings,
            };
            Err((e, Some(out)))
        }
    }
}

fn certificate_json(c: &ClassCertificate) -> Value {
    json!({
        "member": c.member,
        "witness_norms": [c.witness_norms.0, c.witness_norms.1],
        "defect_min_eig": c.defect_min_eig,
        "defect_residual_norm": c.defect_residual_norm,
        "spectral_residual": c.spectral_residual,
        "routes_agree": c.routes_agree,
    })
}

fn check(tuple: &OperatorTuple, args: &CheckArgs, tol: &Tolerances) -> Result<(Value, Status, u8), CliError> {
    let r = tuple.r();
    let mut ops = Vec::new();
    let mut all = [true; 4];
    for t in tuple.ops() {
        let cls = classify(t, r, tol)?;
        let mut entry = serde_json::Map::new();
        for (k, c) in cls.certificates().iter().enumerate() {
            all[k] &= c.member;
            entry.insert(c.tag.name().into(), certificate_json(c));
        }
        ops.push(Value::Object(entry));
    }
    let dc = is_doubly_commuting(tuple, tol);
    let failed: Vec<String> = args
        .require
        .iter()
        .filter(|req| match req {
            Requirement::C1r => !all[0],
            Requirement::Qar => !all[1],
            Requirement::ExactC1r => !all[2],
            Requirement::ExactQar => !all[3],
            Requirement::DoublyCommuting => !dc.holds,
        })
        .filter_map(|req| req.to_possible_value().map(|v| v.get_name().to_owned()))
        .collect();
    let results = json!({
        "r": r,
        "dim": tuple.dim(),
        "operators": ops,
        "doubly_commuting": { "holds": dc.holds, "residual": dc.max_residual },
        "failed_requirements": failed,
    });
    Ok((results, Status::Ok, if failed.is_empty() { 0 } else { 4 }))
}

fn require_members(tuple: &OperatorTuple, qa: bool, tol: &Tolerances) -> Result<(), CliError> {
    for (index, t) in tuple.ops().iter().enumerate() {
        let cls = classify(t, tuple.r(), tol)?;
        let (c, class) = if qa { (cls.qar, "QAr") } else { (cls.c1r, "C1r") };
        if !c.member {
            let witness = c.witness_norms.0.max(c.witness_norms.1);
            return Err(Error::NotMember { index, class, witness }.into());
        }
    }
    Ok(())
}

fn model_json(model: &DilationModel, max_power: i32, tol: &Tolerances) -> Result<Value, CliError> {
    let node = model.verify_node_class(tol)?;
    let table = model.verify_moments(&model.target(), max_power, tol)?;
    let moments: Vec<Value> =
        table.powers.iter().zip(&table.errors).map(|(p, e)| json!({ "power": p, "error": e })).collect();
    Ok(json!({
        "nodes": model.node_count(),
        "theta0": model.theta0(),
        "clearance": model.clearance(),
        "clearance_admissible": model.clearance_ok(),
        "isometry_residual": model.isometry_residual(),
        "node_class": {
            "spectral_residual": node.spectral_residual,
            "defect_residual": node.defect_residual,
            "double_commutation": node.double_commutation,
            "min_singular_value": node.min_singular_value,
        },
        "moments": moments,
        "max_moment_error": table.max_error(),
        "argmax_power": table.argmax(),
    }))
}

fn export_json(model: &DilationModel) -> Result<Value, CliError> {
    let mut blocks = Vec::with_capacity(model.node_count());
    for k in 0..model.node_count() {
        let node: Vec<Value> =
            (0..model.len()).map(|j| model.block(k, j).map(|b| matrix_json(&b))).collect::<Result<_, _>>()?;
        blocks.push(node);
    }
    let nodes: Vec<[f64; 2]> = model.nodes().iter().map(|z| [z.re, z.im]).collect();
    Ok(json!({
        "nodes": nodes,
        "blocks": blocks,
        "scale": model.scale(),
        "theta0": model.theta0(),
        "snap_level": model.snap().map(|s| s.level),
    }))
}

fn dilate_cmd(tuple: &OperatorTuple, args: &DilateArgs, tol: &Tolerances) -> Result<(Value, Status, u8), CliError> {
    if args.nodes.is_empty() || args.nodes.len() > 2 {
        return Err(CliError::Input("--nodes must be given once or twice".into()));
    }
    require_members(tuple, args.qa, tol)?;
    let snap = SnapPolicy::WhenNeeded(args.snap_level);
    let offset = if args.strict_offset { OffsetPolicy::Strict } else { OffsetPolicy::BestEffort };
    let mut runs = Vec::new();
    let mut errors = Vec::new();
    let mut last = None;
    for &n in &args.nodes {
        let model =
            if args.qa { dilate_qar(tuple, n, snap, offset, tol)? } else { dilate(tuple, n, snap, offset, tol)? };
        let run = model_json(&model, args.max_power, tol)?;
        errors.push(run["max_moment_error"].as_f64().unwrap_or(f64::NAN));
        runs.push(run);
        last = Some(model);
    }
    let model = last.expect("at least one node count");
    if let Some(path) = &args.export {
        crate::report::write_atomic(path, &crate::report::canonical_json(&export_json(&model)?))?;
    }
    let class = match model.class() {
        ModelClass::C1r { r } => json!({ "kind": "C1r", "r": r }),
        ModelClass::QAr { r } => json!({ "kind": "QAr", "r": r }),
    };
    let snap = model.snap().map(|s| {
        json!({
            "level": s.level,
            "bound": s.bound,
            "inverse_bound": s.inverse_bound,
            "forward_error": s.forward_error,
            "inverse_error": s.inverse_error,
        })
    });
    let ratio = (errors.len() == 2 && errors[0] > 0.0).then(|| errors[1] / errors[0]);
    let results = json!({
        "class": class,
        "scale": model.scale(),
        "max_power": args.max_power,
        "snap": snap,
        "runs": runs,
        "convergence_ratio": ratio,
    });
    Ok((results, Status::Ok, 0))
}

fn decomposition_json(res: &DecompositionResult) -> Value {
    let blocks: Vec<Value> = res
        .blocks
        .iter()
        .map(|b| {
            let certificates: Vec<Value> = b
                .certificates
                .iter()
                .map(|c| {
                    json!({
                        "type": c.kind.description(),
                        "residual": c.residual,
                        "defect_min_eig": c.defect_min_eig,
                        "passed": c.passed,
                    })
                })
                .collect();
            json!({
                "label": b.label.iter().map(|l| l.name()).collect::<Vec<_>>(),
                "dim": b.dim(),
                "basis": basis_json(&b.basis),
                "reduction_residual": b.reduction_residual,
                "certificates": certificates,
            })
        })
        .collect();
    json!({
        "blocks": blocks,
        "projector_residual": res.projector_residual(),
        "ambiguous": res.ambiguous,
    })
}

fn decompose(tuple: &OperatorTuple, args: &DecomposeArgs, tol: &Tolerances) -> Result<(Value, Status, u8), CliError> {
    require_members(tuple, args.qa, tol)?;
    let res = if args.qa { tuple_decompose_qar(tuple, tol)? } else { tuple_decompose(tuple, tol)? };
    let mut results = decomposition_json(&res);
    results["class"] = json!(if args.qa { "QAr" } else { "C1r" });
    if res.ambiguous {
        Ok((results, Status::Ambiguous, 5))
    } else {
        Ok((results, Status::Ok, 0))
    }
}

fn factor(tuple: &OperatorTuple, args: &FactorArgs, tol: &Tolerances) -> Result<(Value, Status, u8), CliError> {
    let fact = ud_factorize(tuple, tol)?;
    let rel = fact.relations();
    let res = joint_spectral_resolution(&fact, tol)?;
    let entries: Vec<Value> = (0..fact.len())
        .map(|j| {
            let e = res.entry(j);
            json!({
                "unitary": matrix_json(&fact.unitaries()[j]),
                "positive": matrix_json(&fact.positives()[j]),
                "eigenvalues": e.eigenvalues,
                "multiplicities": e.projections.iter().map(|p| p.trace().re.round() as usize).collect::<Vec<_>>(),
                "projection_residual": e.projection_residual(),
            })
        })
        .collect();
    let atoms: Vec<Value> = res.atoms().iter().map(|a| json!({ "values": a.values, "dim": a.basis.rank() })).collect();
    let snapped = match args.snap_level {
        None => Value::Null,
        Some(m) => {
            let a = snap_resolution(&fact, &res, m, tol)?;
            json!({
                "level": m,
                "bound": a.bound,
                "inverse_bound": a.inverse_bound,
                "forward_error": a.forward_error,
                "inverse_error": a.inverse_error,
                "operators": a.snapped_tuple.iter().map(matrix_json).collect::<Vec<_>>(),
            })
        }
    };
    let results = json!({
        "in_c1r": fact.in_c1r(),
        "entries": entries,
        "atoms": atoms,
        "relations": {
            "reconstruction": rel.reconstruction,
            "unitarity": rel.unitarity,
            "unitaries_commute": rel.unitaries_commute,
            "positives_commute": rel.positives_commute,
            "unitary_positive_commute": rel.unitary_positive_commute,
            "tuple_positive_commute": rel.tuple_positive_commute,
        },
        "resolution": {
            "reconstruction_residual": res.reconstruction_residual(fact.positives()),
            "cross_commutation_residual": res.cross_commutation_residual(fact.unitaries()),
        },
        "dyadic": snapped,
    });
    Ok((results, Status::Ok, 0))
}

fn generate(args: &GenerateArgs, tol: &Tolerances) -> Result<Outcome, CliError> {
    let r = args.r;
    let tuple = match args.kind {
        Kind::Scalar => OperatorTuple::new(r, vec![gen_scalar_family(args.n, r, args.dim)?], tol)?,
        Kind::Sarason => {
            let s = SarasonShift::new(args.alpha, r, args.half_width)?;
            OperatorTuple::new(r, vec![s.matrix()], tol)?
        }
        Kind::Normal => gen_normal_tuple(args.seed, args.d, args.dim, r, tol)?,
        Kind::Tensor => gen_tensor_tuple(&default_tensor_factors(r, args.half_width, args.dim)?, r, tol)?,
    };
    Ok(Outcome {
        text: TupleFile::from_tuple(&tuple).to_canonical_string(),
        code: 0,
        destination: args.output.clone(),
        warnings: Vec::new(),
    })
}
