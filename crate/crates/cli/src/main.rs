//! `csp`: solve instances, run matches, generate instances and reductions,
//! and run the verification sweeps.
//!
//! Exit codes: 0 success, 1 property violation or failed certificate,
//! 2 usage or input error, 3 solver budget exceeded.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};
use csp_core::catalog::{
    catalog, catalog_gaps, gen_apriori_tree, gen_draw_game, gen_random, gen_star, gen_trailing_tree, gen_wheel,
    gen_zugzwang, verify_entry, CatalogError, RandomFamily, APRIORI_DEFAULT, TRAILING_DEFAULT,
};
use csp_core::format::{from_json, to_json, to_json_pretty};
use csp_core::reduction::{build_reduction, pad_formula, parse_q3sat, verify_reduction};
use csp_core::solver::solve;
use csp_core::strategy::{play, StrategyKind, DEFAULT_PLY_CAP};
use csp_core::verify::{run_suite, Exec, Suite, SuiteConfig};
use csp_core::{Instance, SolveError, StrategyError};
use serde_json::json;

const DEFAULT_BUDGET: usize = csp_core::solver::DEFAULT_BUDGET;

#[derive(Parser)]
#[command(name = "csp", version, about = "Competing salesmen: exact solver and experiments")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args)]
struct Budget {
    /// Solver state budget.
    #[arg(long, env = "CSP_BUDGET", default_value_t = DEFAULT_BUDGET)]
    budget: usize,
}

#[derive(Subcommand)]
enum Cmd {
    /// Exact value of an instance file.
    Solve {
        file: PathBuf,
        #[command(flatten)]
        budget: Budget,
        /// Write the best move of every reachable state (no prior captures) as JSON.
        #[arg(long)]
        policy: Option<PathBuf>,
    },
    /// Play two strategies against each other.
    Match {
        file: PathBuf,
        /// greedy, optimal, random:SEED, apriori:V1,V2,..., stolen:KIND
        #[arg(long = "i")]
        strategy_i: String,
        #[arg(long = "ii")]
        strategy_ii: String,
        #[arg(long, default_value_t = DEFAULT_PLY_CAP)]
        ply_cap: usize,
        #[command(flatten)]
        budget: Budget,
    },
    /// Write a generated instance.
    Gen {
        #[command(subcommand)]
        family: GenFamily,
    },
    /// Build the game instance of a Q3SAT formula (padded when needed).
    Reduce {
        input: PathBuf,
        #[arg(short = 'o', long)]
        output: PathBuf,
        #[arg(long)]
        no_subdivide: bool,
        /// Print the structural audit; exit 1 when an asserted row fails.
        #[arg(long)]
        audit: bool,
    },
    /// Run a property sweep.
    Verify {
        #[arg(long)]
        suite: Suite,
        #[arg(long)]
        max_n: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Random instances in the sweep.
        #[arg(long)]
        samples: Option<usize>,
        /// Check instances one at a time instead of on the rayon pool.
        #[arg(long)]
        sequential: bool,
        /// Where to write the first counterexample.
        #[arg(long)]
        counterexample: Option<PathBuf>,
        #[command(flatten)]
        budget: Budget,
    },
    /// Serve the HTTP play API.
    Serve {
        #[arg(long, default_value_t = 8080)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        host: String,
        #[command(flatten)]
        budget: Budget,
    },
}

#[derive(Args)]
struct Out {
    #[arg(short = 'o', long)]
    output: PathBuf,
}

#[derive(Subcommand)]
enum GenFamily {
    /// Directed wheel with n rim customers (n odd).
    Wheel {
        #[arg(long)]
        n: u32,
        #[command(flatten)]
        out: Out,
    },
    Zugzwang {
        #[command(flatten)]
        out: Out,
    },
    DrawGame {
        #[command(flatten)]
        out: Out,
        #[command(flatten)]
        budget: Budget,
    },
    TrailingTree {
        #[arg(long, default_value_t = TRAILING_DEFAULT.0)]
        k: u32,
        #[arg(long, default_value_t = TRAILING_DEFAULT.1)]
        d: u32,
        #[arg(long = "L", default_value_t = TRAILING_DEFAULT.2)]
        l: u32,
        #[arg(long, default_value_t = TRAILING_DEFAULT.3)]
        s: u32,
        #[command(flatten)]
        out: Out,
    },
    AprioriTree {
        #[arg(long, default_value_t = APRIORI_DEFAULT.0)]
        p: u32,
        #[arg(long, default_value_t = APRIORI_DEFAULT.1)]
        q: u32,
        #[command(flatten)]
        out: Out,
    },
    /// Star from rays like `5:1,2,3,4,5/3:1,2,3/3:3` (length:customer positions).
    Star {
        #[arg(long)]
        rays: String,
        #[command(flatten)]
        out: Out,
    },
    /// Seeded random instance.
    Random {
        /// tree, star, bipartite or general
        #[arg(long)]
        family: String,
        #[arg(long, default_value_t = 10)]
        vertices: usize,
        #[arg(long, default_value_t = 0)]
        extra_edges: usize,
        /// Trees: allow customers on inner vertices.
        #[arg(long)]
        any_vertex: bool,
        #[arg(long, default_value_t = 5)]
        max_rays: usize,
        #[arg(long, default_value_t = 4)]
        max_len: usize,
        #[arg(long, default_value_t = 3)]
        customers: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        out: Out,
    },
    /// Every catalog entry plus a manifest, re-verified, into a directory.
    Catalog {
        #[arg(short = 'o', long)]
        dir: PathBuf,
        #[command(flatten)]
        budget: Budget,
    },
}

enum Fail {
    Property(String),
    Usage(String),
    Budget(String),
}

impl Fail {
    fn code(&self) -> u8 {
        match self {
            Fail::Property(_) => 1,
            Fail::Usage(_) => 2,
            Fail::Budget(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            Fail::Property(m) | Fail::Usage(m) | Fail::Budget(m) => m,
        }
    }
}

impl From<SolveError> for Fail {
    fn from(e: SolveError) -> Fail {
        match e {
            SolveError::BudgetExceeded { .. } => Fail::Budget(e.to_string()),
            other => Fail::Usage(other.to_string()),
        }
    }
}

impl From<StrategyError> for Fail {
    fn from(e: StrategyError) -> Fail {
        match e {
            StrategyError::Solve(s) => s.into(),
            other => Fail::Usage(other.to_string()),
        }
    }
}

impl From<CatalogError> for Fail {
    fn from(e: CatalogError) -> Fail {
        match e {
            CatalogError::Solve(s) => s.into(),
            CatalogError::Strategy(s) => s.into(),
            CatalogError::SearchExhausted(m) => Fail::Property(m),
            other => Fail::Usage(other.to_string()),
        }
    }
}

fn read(path: &Path) -> Result<String, Fail> {
    fs::read_to_string(path).map_err(|e| Fail::Usage(format!("{}: {e}", path.display())))
}

fn write(path: &Path, text: &str) -> Result<(), Fail> {
    fs::write(path, text).map_err(|e| Fail::Usage(format!("{}: {e}", path.display())))
}

fn load(path: &Path) -> Result<Instance, Fail> {
    let inst = from_json(&read(path)?).map_err(|e| Fail::Usage(format!("{}: {e}", path.display())))?;
    let problems = csp_core::validate_instance(&inst);
    if let Some(p) = problems.first() {
        return Err(Fail::Usage(format!("{}: {p}", path.display())));
    }
    Ok(inst)
}

fn save(inst: &Instance, out: &Out) -> Result<(), Fail> {
    write(&out.output, &to_json_pretty(inst))?;
    println!("RESULT file={}", out.output.display());
    Ok(())
}

fn parse_rays(text: &str) -> Result<Vec<(u32, Vec<u32>)>, Fail> {
    let bad = || Fail::Usage(format!("cannot read rays {text:?}; expected like 5:1,2,5/3:3"));
    text.split('/')
        .map(|ray| {
            let (len, at) = ray.split_once(':').unwrap_or((ray, ""));
            let len = len.trim().parse().map_err(|_| bad())?;
            let at = at
                .split(',')
                .filter(|t| !t.trim().is_empty())
                .map(|t| t.trim().parse().map_err(|_| bad()))
                .collect::<Result<Vec<u32>, Fail>>()?;
            Ok((len, at))
        })
        .collect()
}

fn run(cli: Cli) -> Result<(), Fail> {
    match cli.cmd {
        Cmd::Solve { file, budget, policy } => {
            let inst = load(&file)?;
            let r = solve(&inst, budget.budget)?;
            println!("value: {}", r.value());
            println!("states: {}", r.state_count());
            if let Some(path) = policy {
                let rows: Vec<_> = r
                    .states()
                    .filter_map(|s| {
                        let (mv, v) = r.best_move(&inst, &s, 0)?;
                        Some(json!({ "state": s, "move": mv, "value": v.to_string() }))
                    })
                    .collect();
                write(&path, &serde_json::to_string(&rows).expect("policy serializes"))?;
                println!("RESULT policy={}", path.display());
            }
            println!("RESULT value={}", r.value());
            println!("RESULT states={}", r.state_count());
        }
        Cmd::Match { file, strategy_i, strategy_ii, ply_cap, budget } => {
            let inst = Arc::new(load(&file)?);
            let ki: StrategyKind = strategy_i.parse()?;
            let kii: StrategyKind = strategy_ii.parse()?;
            let rec = play(&inst, &ki, &kii, budget.budget, ply_cap)?;
            let moves: Vec<String> = rec.moves.iter().map(ToString::to_string).collect();
            println!("moves: {}", moves.join(" "));
            println!("outcome: {} ({:?})", rec.outcome, rec.reason);
            if rec.flagged {
                println!("note: a strategy abandoned its plan during the match");
            }
            println!("RESULT outcome={}", rec.outcome);
            println!("RESULT reason={:?}", rec.reason);
            println!("RESULT plies={}", rec.moves.len());
            println!("RESULT flagged={}", rec.flagged);
        }
        Cmd::Gen { family } => gen(family)?,
        Cmd::Reduce { input, output, no_subdivide, audit } => {
            let f = parse_q3sat(&read(&input)?).map_err(|e| Fail::Usage(format!("{}: {e}", input.display())))?;
            let padded = pad_formula(&f);
            if padded != f {
                println!("padded: n={} m={} -> n={} m={}", f.n(), f.m(), padded.n(), padded.m());
            }
            let art = build_reduction(&padded, !no_subdivide).map_err(|e| Fail::Usage(e.to_string()))?;
            write(&output, &to_json(&art.instance))?;
            let mut labels = output.clone().into_os_string();
            labels.push(".labels");
            write(Path::new(&labels), &art.label_file())?;
            let g = art.instance.graph();
            println!("RESULT file={}", output.display());
            println!("RESULT labels={}", Path::new(&labels).display());
            println!("RESULT vertices={}", g.vertex_count());
            println!("RESULT customers={}", art.instance.customer_count());
            if audit {
                let report = verify_reduction(&art);
                print!("{report}");
                println!("RESULT audit={}", if report.passed() { "pass" } else { "fail" });
                if !report.passed() {
                    return Err(Fail::Property("reduction audit failed".into()));
                }
            }
        }
        Cmd::Verify { suite, max_n, seed, samples, sequential, counterexample, budget } => {
            let cfg = SuiteConfig {
                max_n,
                seed,
                budget: budget.budget,
                samples,
                exec: if sequential { Exec::Sequential } else { Exec::Parallel },
            };
            let report = run_suite(suite, &cfg);
            println!("suite {suite}: {} instances checked in {:.2?}", report.checked, report.elapsed);
            for n in &report.notes {
                println!("note: {n}");
            }
            println!("RESULT suite={suite}");
            println!("RESULT checked={}", report.checked);
            println!("RESULT elapsed_ms={}", report.elapsed.as_millis());
            println!("RESULT status={}", if report.passed() { "pass" } else { "fail" });
            if let Some(f) = report.failure {
                eprintln!("counterexample: {}", f.detail);
                if let Some(inst) = f.instance {
                    println!("{}", to_json_pretty(&inst));
                    if let Some(path) = counterexample {
                        write(&path, &to_json_pretty(&inst))?;
                    }
                }
                return Err(Fail::Property(f.detail));
            }
        }
        Cmd::Serve { port, host, budget } => {
            let addr = format!("{host}:{port}")
                .parse()
                .map_err(|e| Fail::Usage(format!("address {host}:{port}: {e}")))?;
            let config = csp_service::ServiceConfig {
                budget: budget.budget,
                ..Default::default()
            };
            let rt = tokio::runtime::Runtime::new().map_err(|e| Fail::Usage(e.to_string()))?;
            eprintln!("listening on {addr}");
            rt.block_on(csp_service::serve(addr, config))
                .map_err(|e| Fail::Usage(e.to_string()))?;
        }
    }
    Ok(())
}

fn gen(family: GenFamily) -> Result<(), Fail> {
    match family {
        GenFamily::Wheel { n, out } => save(&gen_wheel(n)?, &out),
        GenFamily::Zugzwang { out } => save(&gen_zugzwang(), &out),
        GenFamily::DrawGame { out, budget } => save(&gen_draw_game(budget.budget)?, &out),
        GenFamily::TrailingTree { k, d, l, s, out } => save(&gen_trailing_tree(k, d, l, s)?, &out),
        GenFamily::AprioriTree { p, q, out } => save(&gen_apriori_tree(p, q)?, &out),
        GenFamily::Star { rays, out } => save(&gen_star(&parse_rays(&rays)?)?, &out),
        GenFamily::Random { family, vertices, extra_edges, any_vertex, max_rays, max_len, customers, seed, out } => {
            let fam = match family.as_str() {
                "tree" => RandomFamily::Tree { vertices, leaf_customers: !any_vertex },
                "star" => RandomFamily::Star { max_rays, max_len },
                "bipartite" => RandomFamily::Bipartite { vertices, extra_edges },
                "general" => RandomFamily::General { vertices, extra_edges },
                other => return Err(Fail::Usage(format!("unknown random family {other:?}"))),
            };
            save(&gen_random(fam, customers, seed)?, &out)
        }
        GenFamily::Catalog { dir, budget } => {
            fs::create_dir_all(&dir).map_err(|e| Fail::Usage(format!("{}: {e}", dir.display())))?;
            let mut rows = Vec::new();
            let mut failed = 0;
            for e in catalog() {
                let file = format!("{}.json", e.name);
                write(&dir.join(&file), &to_json_pretty(&e.instance))?;
                let status = match verify_entry(&e, budget.budget) {
                    Ok(true) => "verified".to_string(),
                    Ok(false) => "failed".to_string(),
                    Err(err) => format!("error: {err}"),
                };
                if status != "verified" {
                    failed += 1;
                }
                println!("{:16} {status}", e.name);
                rows.push(json!({
                    "name": e.name, "params": e.params, "file": file,
                    "certificate": e.certificate, "note": e.note, "status": status,
                }));
            }
            for (name, why) in catalog_gaps() {
                failed += 1;
                println!("{name:16} not shipped: {why}");
                rows.push(json!({ "name": name, "file": null, "status": "search_exhausted", "note": why }));
            }
            let manifest = dir.join("manifest.json");
            write(&manifest, &serde_json::to_string_pretty(&rows).expect("manifest serializes"))?;
            println!("RESULT manifest={}", manifest.display());
            println!("RESULT unverified={failed}");
            if failed > 0 {
                return Err(Fail::Property(format!("{failed} catalog entries without a verified certificate")));
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}
