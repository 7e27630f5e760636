use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use multiband::cpdriver::{solve_by_cuts, CuttingPlaneOptions};
use multiband::flowsep::{check_robust, separate};
use multiband::gen::{generate, GenOptions};
use multiband::instance::{parse_binary, Instance, OracleKind};
use multiband::lp::{solve_lp, solve_milp, Status};
use multiband::model::BandScheme;
use multiband::oracle::{dev_bruteforce, EnumerationMode};
use multiband::probbound::{optimize_t, Radius};
use multiband::reformulation::build_compact;
use multiband::robust01::{solve_robust_binary, RobustBinaryOptions};
use multiband::Error;

/// Robust linear and integer programs under multi-band uncertainty.
#[derive(Parser)]
#[command(name = "multiband", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check an instance and print the profile of every row.
    Validate { instance: PathBuf },
    /// Solve the robust problem.
    Solve {
        instance: PathBuf,
        #[arg(long, value_enum, default_value_t = Method::Compact)]
        method: Method,
        #[arg(long, default_value_t = 10_000)]
        max_iterations: usize,
    },
    /// Print a random instance that is feasible at x = 1.
    Gen {
        #[arg(long, default_value_t = 3)]
        n: usize,
        #[arg(long, default_value_t = 1)]
        m: usize,
        /// Number of positive bands.
        #[arg(long, default_value_t = 1)]
        bands: u32,
        /// Number of negative bands.
        #[arg(long, default_value_t = 0)]
        negative: u32,
        /// Probability that a coefficient is certain.
        #[arg(long, default_value_t = 0.0)]
        certain: f64,
        #[arg(long)]
        integer: bool,
        #[arg(long)]
        binary: bool,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Report the worst-case activity of every row at a point.
    Check {
        instance: PathBuf,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        x: Vec<f64>,
        /// Also enumerate every profile assignment.
        #[arg(long)]
        exact: bool,
    },
    /// Print the robustness cuts violated at a point, one per line.
    Separate {
        instance: PathBuf,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        x: Vec<f64>,
    },
    /// Minimize a 0-1 problem with uncertain costs.
    BinarySolve {
        instance: PathBuf,
        #[arg(long, value_enum)]
        oracle: Oracle,
        #[arg(long)]
        prune: bool,
    },
    /// Data-driven bound on the violation probability of each row.
    Bound {
        instance: PathBuf,
        /// Point to evaluate; the robust optimum when absent.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        x: Option<Vec<f64>>,
        #[arg(long)]
        row: Option<usize>,
        #[arg(long, default_value_t = 0.05)]
        beta: f64,
        #[arg(long, default_value_t = 10.0)]
        tmax: f64,
        #[arg(long, default_value_t = 64)]
        grid: usize,
        /// Use the x-independent Hoeffding radius.
        #[arg(long)]
        quadratic: bool,
    },
    /// Print the compact robust counterpart as a certain instance.
    ExportCompact { instance: PathBuf },
}

#[derive(Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
enum Method {
    Compact,
    CuttingPlane,
}

#[derive(Clone, Copy, ValueEnum)]
enum Oracle {
    Sp,
    Mst,
    Explicit,
}

struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Parse(_) => 2,
            Error::Infeasible(_) => 3,
            Error::Unbounded(_) => 4,
            Error::Limit(_) | Error::GuardExceeded(_) | Error::Numerical(_) => 5,
            _ => 1,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

type Outcome = Result<(), Failure>;

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure {
        code: 2,
        message: format!("cannot read {}: {e}", path.display()),
    })
}

fn load(path: &Path) -> Result<Instance, Failure> {
    Ok(Instance::from_json(&read(path)?)?)
}

fn emit(v: &impl Serialize) {
    println!("{}", serde_json::to_string(v).expect("output serializes"));
}

fn point(inst: &Instance, x: &[f64]) -> Result<(), Failure> {
    if x.len() != inst.problem.n() {
        return Err(Error::Dimension(format!(
            "--x has {} entries, instance has n = {}",
            x.len(),
            inst.problem.n()
        ))
        .into());
    }
    Ok(())
}

fn validate(path: &Path) -> Outcome {
    let unchecked = Instance::parse(&read(path)?)?;
    let violations: Vec<String> = unchecked
        .violations()
        .iter()
        .map(|v| v.to_string())
        .collect();
    let profiles: Vec<Value> = if violations.is_empty() {
        (0..unchecked.problem.m())
            .map(|i| {
                let p = unchecked.scheme.profile(i)?;
                Ok(json!({"row": i, "p": p.p, "theta": p.theta}))
            })
            .collect::<multiband::Result<_>>()?
    } else {
        Vec::new()
    };
    let valid = violations.is_empty();
    emit(&json!({"valid": valid, "violations": violations, "profiles": profiles}));
    if valid {
        Ok(())
    } else {
        for v in &violations {
            eprintln!("{v}");
        }
        Err(Failure {
            code: 1,
            message: format!("{} violated invariant(s)", violations.len()),
        })
    }
}

fn status_failure(status: Status) -> Failure {
    match status {
        Status::Infeasible => {
            Error::Infeasible("robust counterpart has no feasible point".into()).into()
        }
        Status::Unbounded => Error::Unbounded("robust counterpart is unbounded".into()).into(),
        Status::Optimal => unreachable!(),
    }
}

fn solve_compact(inst: &Instance) -> Result<(Vec<f64>, f64, Value), Failure> {
    let cc = build_compact(&inst.problem, &inst.scheme)?;
    let sol = if inst.problem.int_vars().is_empty() {
        solve_lp(&cc.problem)?
    } else {
        solve_milp(&cc.problem)?
    };
    if sol.status != Status::Optimal {
        return Err(status_failure(sol.status));
    }
    let stats = json!({
        "variables": cc.problem.n(),
        "rows": cc.problem.m(),
        "pivots": sol.pivots,
        "nodes": sol.nodes,
    });
    Ok((cc.project(&sol.x), cc.problem.reported(sol.value), stats))
}

fn solve(path: &Path, method: Method, max_iterations: usize) -> Outcome {
    let inst = load(path)?;
    let (x, value, stats) = match method {
        Method::Compact => solve_compact(&inst)?,
        Method::CuttingPlane => {
            let opts = CuttingPlaneOptions {
                max_iterations,
                ..Default::default()
            };
            let r = solve_by_cuts(&inst.problem, &inst.scheme, &opts)?;
            for rec in &r.log {
                emit(rec);
            }
            (
                r.x,
                r.reported,
                json!({"iterations": r.iterations, "cuts": r.cuts.len()}),
            )
        }
    };
    emit(&json!({"value": value, "x": x, "method": method, "stats": stats}));
    Ok(())
}

fn check(path: &Path, x: &[f64], exact: bool) -> Outcome {
    let inst = load(path)?;
    point(&inst, x)?;
    let rows = check_robust(&inst.problem, &inst.scheme, x)?;
    let robust = rows.iter().all(|r| r.robust);
    let mut out = json!({"robust": robust, "rows": rows});
    if exact {
        let devs = (0..inst.problem.m())
            .map(|i| dev_bruteforce(&inst.scheme, i, x, EnumerationMode::Profile).map(|d| d + 0.0))
            .collect::<multiband::Result<Vec<f64>>>()?;
        let exact_robust = devs
            .iter()
            .enumerate()
            .all(|(i, d)| inst.problem.row_activity(i, x) + d <= inst.problem.b()[i] + 1e-6);
        out["exact"] = json!({"robust": exact_robust, "deviations": devs});
    }
    emit(&out);
    Ok(())
}

fn separate_cmd(path: &Path, x: &[f64]) -> Outcome {
    let inst = load(path)?;
    point(&inst, x)?;
    for cut in separate(&inst.problem, &inst.scheme, x)? {
        emit(&cut);
    }
    Ok(())
}

fn binary_solve(path: &Path, oracle: Oracle, prune: bool) -> Outcome {
    let kind = match oracle {
        Oracle::Sp => OracleKind::ShortestPath,
        Oracle::Mst => OracleKind::SpanningTree,
        Oracle::Explicit => OracleKind::Explicit,
    };
    let b = parse_binary(&read(path)?, kind)?;
    let sol = solve_robust_binary(
        &b.instance,
        b.oracle.as_ref(),
        &RobustBinaryOptions { prune },
    )?;
    emit(&sol);
    Ok(())
}

struct BoundArgs {
    x: Option<Vec<f64>>,
    row: Option<usize>,
    beta: f64,
    tmax: f64,
    grid: usize,
    quadratic: bool,
}

fn bound(path: &Path, args: BoundArgs) -> Outcome {
    let inst = load(path)?;
    let x = match args.x {
        Some(x) => x,
        None => solve_compact(&inst)?.0,
    };
    point(&inst, &x)?;
    if x.iter().any(|&v| v < 0.0) {
        return Err(Error::InvalidArgument("the bound needs x >= 0".into()).into());
    }
    let radius = if args.quadratic {
        Radius::Quadratic
    } else {
        Radius::Quartic
    };
    let rows: Vec<usize> = match args.row {
        Some(i) => vec![i],
        None => (0..inst.problem.m()).collect(),
    };
    for i in rows {
        let coefs = inst.row_coefficients(i, args.beta)?;
        let vb = optimize_t(
            &coefs,
            &x,
            inst.problem.b()[i],
            args.tmax,
            args.grid,
            radius,
        )?;
        emit(&json!({
            "row": i,
            "t_star": vb.t,
            "bound_raw": vb.bound_raw,
            "bound_clamped": vb.bound_clamped,
            "confidence": vb.confidence,
            "excluded_vars": vb.excluded_vars,
            "radius": radius,
            "radius_note": "mean radius x*(d_plus+d_minus)*sqrt(ln(1/beta)/(2W)); the printed sqrt(1/(2W ln beta)) is imaginary",
        }));
    }
    Ok(())
}

fn export_compact(path: &Path) -> Outcome {
    let inst = load(path)?;
    let cc = build_compact(&inst.problem, &inst.scheme)?;
    let (n, m) = (cc.problem.n(), cc.problem.m());
    let out = Instance::new(cc.problem, BandScheme::certain(n, m))?;
    println!("{}", out.to_json());
    Ok(())
}

fn run(cli: Cli) -> Outcome {
    match cli.command {
        Command::Validate { instance } => validate(&instance),
        Command::Solve {
            instance,
            method,
            max_iterations,
        } => solve(&instance, method, max_iterations),
        Command::Gen {
            n,
            m,
            bands,
            negative,
            certain,
            integer,
            binary,
            seed,
        } => {
            let inst = generate(&GenOptions {
                n,
                m,
                negative,
                positive: bands,
                certain,
                integer,
                binary,
                seed,
            })?;
            println!("{}", inst.to_json());
            Ok(())
        }
        Command::Check { instance, x, exact } => check(&instance, &x, exact),
        Command::Separate { instance, x } => separate_cmd(&instance, &x),
        Command::BinarySolve {
            instance,
            oracle,
            prune,
        } => binary_solve(&instance, oracle, prune),
        Command::Bound {
            instance,
            x,
            row,
            beta,
            tmax,
            grid,
            quadratic,
        } => bound(
            &instance,
            BoundArgs {
                x,
                row,
                beta,
                tmax,
                grid,
                quadratic,
            },
        ),
        Command::ExportCompact { instance } => export_compact(&instance),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
