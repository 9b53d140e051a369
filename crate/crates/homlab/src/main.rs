use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use homlab::comonad::{build_comonad, Base, ComonadKind, DEFAULT_CARRIER_BOUND};
use homlab::cover::{
    compute_tree_depth, eliminate_equalities, find_pebble_forest_cover, tree_width,
    validate_pebble_cover, DEFAULT_COVER_CAP,
};
use homlab::enumerate::{
    enumerate_structures, ClassKind, ClassSpec, Enumerated, DEFAULT_GENERAL_ENUM_CAP,
    DEFAULT_GRAPH_ENUM_CAP,
};
use homlab::error::{Error, Result};
use homlab::formula::{
    eval_formula, eval_modal, looks_modal, parse_counting, parse_modal, print_counting,
};
use homlab::game::equiv_counting;
use homlab::harness::{sweep, verify_theorem, Theorem, TheoremParams};
use homlab::homcount::{hom_count, hom_count_treedec, strong_emb_count};
use homlab::io::{
    load_cover, load_pointed, load_structure, save_cover, save_structure, CoverFile, PlaysFile,
};
use homlab::query::{
    canonical_conjunctive_query, distinct_edge_sentence, threshold_lift,
    PrimitivePositiveFormula, QueryLayout,
};
use homlab::structure::{PointedStructure, Signature};
use homlab::wl::{k_wl_refine, modal_equiv};

/// Homomorphism counting, covers, game comonads and counting-logic
/// equivalences on finite relational structures.
#[derive(Parser)]
#[command(name = "homlab", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Count homomorphisms from a source into a target structure
    HomCount {
        #[arg(long)]
        source: PathBuf,
        #[arg(long)]
        target: PathBuf,
        /// count strong (induced) embeddings instead
        #[arg(long)]
        strong_emb: bool,
        /// dynamic programming over a pebble forest cover of the source
        #[arg(long)]
        treedec: Option<PathBuf>,
    },
    /// Exact tree-depth of a structure
    Treedepth {
        structure: PathBuf,
        /// write the witnessing forest cover here
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Exact tree-width of a structure
    Treewidth { structure: PathBuf },
    /// Search for a k-pebble forest cover
    Cover {
        structure: PathBuf,
        #[arg(long)]
        k: usize,
        #[arg(long)]
        height: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Eliminate the equality witness I from a structure along a cover
    Eliminate {
        structure: PathBuf,
        cover: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Materialise a game comonad carrier with its decoding sidecar
    Comonad {
        structure: PathBuf,
        #[arg(long)]
        kind: String,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        k: Option<usize>,
        /// write <out> and <out>.plays.json instead of stdout
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Decide counting-logic or graded-modal equivalence
    Equiv {
        #[arg(long)]
        logic: String,
        #[arg(long)]
        depth: Option<usize>,
        #[arg(long)]
        width: Option<usize>,
        a: PathBuf,
        b: PathBuf,
    },
    /// k-dimensional Weisfeiler-Leman equivalence
    Wl {
        #[arg(long)]
        k: usize,
        a: PathBuf,
        b: PathBuf,
    },
    /// Evaluate a formula file on a structure
    Eval { structure: PathBuf, formula: PathBuf },
    /// Canonical conjunctive query of a structure
    Ccq {
        structure: PathBuf,
        /// reuse variables along a pebble forest cover
        #[arg(long)]
        cover: Option<PathBuf>,
    },
    /// Threshold-lift a primitive positive formula
    Lift {
        #[arg(long)]
        t: u64,
        formula: PathBuf,
    },
    /// Demonstrations
    #[command(subcommand)]
    Demo(DemoCommand),
    /// Verify a theorem over an enumerated pair universe, one line per pair
    Verify(SweepArgs),
    /// Verify a theorem and write an aggregate JSON report
    Sweep(SweepArgs),
}

#[derive(Subcommand)]
enum DemoCommand {
    /// The equality-free sentence asserting an edge between distinct vertices
    DistinctEdge {
        #[arg(long)]
        bound: u64,
        structure: PathBuf,
    },
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long)]
    theorem: String,
    #[arg(long)]
    depth: Option<usize>,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long, default_value_t = 4)]
    max_size: usize,
    #[arg(long, default_value_t = 4)]
    witness_cap: usize,
    /// verify explicit structure files instead of enumerating
    #[arg(long)]
    pairs: Option<PathBuf>,
    /// range over general sigma-structures instead of loop-free graphs
    #[arg(long)]
    general: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    match run() {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn parse_theorem(name: &str) -> Result<Theorem> {
    match name {
        "lovasz" => Ok(Theorem::Lovasz),
        "grohe" => Ok(Theorem::Grohe),
        "dvorak" => Ok(Theorem::Dvorak),
        "ckn" => Ok(Theorem::Ckn),
        "modal" => Ok(Theorem::Modal),
        other => Err(Error::InvalidParameter(format!("unknown theorem {other}"))),
    }
}

fn theorem_params(theorem: Theorem, args: &SweepArgs) -> Result<TheoremParams> {
    Ok(match theorem {
        Theorem::Lovasz => TheoremParams::default(),
        Theorem::Grohe => TheoremParams { depth: Some(require(args.depth, "--depth")?), width: None },
        Theorem::Dvorak => TheoremParams { depth: None, width: Some(require(args.k, "--k")?) },
        Theorem::Ckn => TheoremParams {
            depth: Some(require(args.depth, "--depth")?),
            width: Some(require(args.k, "--k")?),
        },
        Theorem::Modal => TheoremParams { depth: Some(require(args.k, "--k")?), width: None },
    })
}

fn require<T>(v: Option<T>, what: &str) -> Result<T> {
    v.ok_or_else(|| Error::InvalidParameter(format!("{what} is required")))
}

fn modal_signature() -> Signature {
    Signature::new(vec![("R", 2), ("P", 1)]).unwrap()
}

fn universe_spec(theorem: Theorem, args: &SweepArgs) -> ClassSpec {
    match theorem {
        Theorem::Modal => ClassSpec::pointed(ClassKind::All, modal_signature(), args.max_size),
        _ if args.general => {
            ClassSpec::general(ClassKind::All, Signature::graph(), args.max_size)
        }
        _ => ClassSpec::simple_graphs(ClassKind::All, args.max_size),
    }
}

fn enum_cap(spec: &ClassSpec) -> usize {
    if spec.simple_graphs {
        DEFAULT_GRAPH_ENUM_CAP
    } else {
        DEFAULT_GENERAL_ENUM_CAP.max(7) // sync-tree witnesses go up to 7
    }
}

fn load_pairs_dir(dir: &Path) -> Result<Vec<Enumerated>> {
    let mut paths: Vec<PathBuf> = std::fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_file())
        .collect();
    paths.sort();
    paths
        .into_iter()
        .map(|p| {
            let (st, point) = load_structure(&p)?;
            Ok(Enumerated {
                id: p.file_name().unwrap().to_string_lossy().into_owned(),
                structure: st,
                point,
            })
        })
        .collect()
}

fn run() -> Result<ExitCode> {
    let cli = Cli::parse();
    match cli.command {
        Command::HomCount { source, target, strong_emb, treedec } => {
            let (c, _) = load_structure(&source)?;
            let (a, _) = load_structure(&target)?;
            let count = if strong_emb {
                strong_emb_count(&c, &a)?
            } else if let Some(cover_path) = treedec {
                let cover = load_cover(&cover_path)?.into_pebble()?;
                hom_count_treedec(&c, &cover, &a)?
            } else {
                hom_count(&c, &a)?
            };
            println!("{count}");
        }
        Command::Treedepth { structure, out } => {
            let (a, _) = load_structure(&structure)?;
            let (depth, cover) = compute_tree_depth(&a, DEFAULT_COVER_CAP)?;
            println!("{depth}");
            if let Some(path) = out {
                save_cover(&path, &CoverFile::from_forest(&cover))?;
            }
        }
        Command::Treewidth { structure } => {
            let (a, _) = load_structure(&structure)?;
            println!("{}", tree_width(&a, DEFAULT_COVER_CAP)?);
        }
        Command::Cover { structure, k, height, out } => {
            let (a, _) = load_structure(&structure)?;
            match find_pebble_forest_cover(&a, k, height, DEFAULT_COVER_CAP)? {
                Some(cover) => {
                    let file = CoverFile::from_pebble(&cover);
                    match out {
                        Some(path) => save_cover(&path, &file)?,
                        None => println!("{}", serde_json::to_string_pretty(&file)?),
                    }
                }
                None => {
                    println!("no cover");
                    return Ok(ExitCode::from(1));
                }
            }
        }
        Command::Eliminate { structure, cover, out } => {
            let (a, _) = load_structure(&structure)?;
            let pebble = load_cover(&cover)?.into_pebble()?;
            if !validate_pebble_cover(&a, &pebble, pebble.k, a.size().max(1)) {
                return Err(Error::InvalidCover(
                    "the cover does not validate for the structure".to_string(),
                ));
            }
            let (reduced, new_cover) = eliminate_equalities(&a, &pebble)?;
            match out {
                Some(path) => {
                    save_structure(&path, &reduced, None)?;
                    let cover_path = path.with_extension("cover.json");
                    save_cover(&cover_path, &CoverFile::from_pebble(&new_cover))?;
                    eprintln!("wrote {} and {}", path.display(), cover_path.display());
                }
                None => {
                    println!(
                        "{}",
                        serde_json::to_string_pretty(&homlab::io::StructureFile::from_structure(
                            &reduced, None
                        ))?
                    );
                    println!(
                        "{}",
                        serde_json::to_string_pretty(&CoverFile::from_pebble(&new_cover))?
                    );
                }
            }
        }
        Command::Comonad { structure, kind, n, k, out } => {
            let (a, point) = load_structure(&structure)?;
            let kind = match kind.as_str() {
                "ef" => ComonadKind::Ef { n: require(n, "--n")? },
                "pebble" => ComonadKind::Pebble { k: require(k, "--k")?, n: require(n, "--n")? },
                "modal" => ComonadKind::Modal { k: require(k, "--k")? },
                other => {
                    return Err(Error::InvalidParameter(format!("unknown comonad kind {other}")))
                }
            };
            let base = match (&kind, point) {
                (ComonadKind::Modal { .. }, Some(p)) => {
                    Base::Pointed(PointedStructure::new(a, p)?)
                }
                (ComonadKind::Modal { .. }, None) => {
                    return Err(Error::MalformedInput(
                        "the modal comonad needs a pointed structure".to_string(),
                    ))
                }
                _ => Base::Plain(a),
            };
            let cs = build_comonad(&kind, &base, DEFAULT_CARRIER_BOUND)?;
            let carrier = homlab::io::StructureFile::from_structure(&cs.carrier, cs.point);
            let sidecar = PlaysFile::from_comonad(&cs);
            match out {
                Some(path) => {
                    std::fs::write(&path, serde_json::to_string_pretty(&carrier)?)?;
                    let sidecar_path = path.with_extension("plays.json");
                    std::fs::write(&sidecar_path, serde_json::to_string_pretty(&sidecar)?)?;
                    eprintln!("wrote {} and {}", path.display(), sidecar_path.display());
                }
                None => {
                    println!("{}", serde_json::to_string_pretty(&carrier)?);
                    println!("{}", serde_json::to_string_pretty(&sidecar)?);
                }
            }
        }
        Command::Equiv { logic, depth, width, a, b } => {
            let verdict = match logic.as_str() {
                "modal" => {
                    let pa = load_pointed(&a)?;
                    let pb = load_pointed(&b)?;
                    modal_equiv(&pa, &pb, require(depth, "--depth")?)?
                }
                tag => {
                    let (sa, _) = load_structure(&a)?;
                    let (sb, _) = load_structure(&b)?;
                    match tag {
                        "cn" => equiv_counting(&sa, &sb, Some(require(depth, "--depth")?), None)?,
                        "ck" => equiv_counting(&sa, &sb, None, Some(require(width, "--width")?))?,
                        "ckn" => equiv_counting(
                            &sa,
                            &sb,
                            Some(require(depth, "--depth")?),
                            Some(require(width, "--width")?),
                        )?,
                        other => {
                            return Err(Error::InvalidParameter(format!("unknown logic {other}")))
                        }
                    }
                }
            };
            println!("{verdict}");
        }
        Command::Wl { k, a, b } => {
            let (sa, _) = load_structure(&a)?;
            let (sb, _) = load_structure(&b)?;
            let (_, _, eq) = k_wl_refine(&sa, &sb, k)?;
            println!("{eq}");
        }
        Command::Eval { structure, formula } => {
            let text = std::fs::read_to_string(&formula)?;
            if looks_modal(&text) {
                let p = load_pointed(&structure)?;
                let phi = parse_modal(&text)?;
                println!("{}", eval_modal(&p, &phi)?);
            } else {
                let (a, _) = load_structure(&structure)?;
                let phi = parse_counting(&text)?;
                println!("{}", eval_formula(&a, &phi, &BTreeMap::new())?);
            }
        }
        Command::Ccq { structure, cover } => {
            let (a, _) = load_structure(&structure)?;
            let query = match cover {
                Some(path) => {
                    let pebble = load_cover(&path)?.into_pebble()?;
                    canonical_conjunctive_query(&a, QueryLayout::Pebble(&pebble))?
                }
                None => canonical_conjunctive_query(&a, QueryLayout::Chain)?,
            };
            println!("{}", print_counting(query.formula()));
        }
        Command::Lift { t, formula } => {
            let text = std::fs::read_to_string(&formula)?;
            let gamma = PrimitivePositiveFormula::new(parse_counting(&text)?)?;
            println!("{}", print_counting(&threshold_lift(&gamma, t)?));
        }
        Command::Demo(DemoCommand::DistinctEdge { bound, structure }) => {
            let (b, _) = load_structure(&structure)?;
            let phi = distinct_edge_sentence(bound)?;
            let verdict = eval_formula(&b, &phi, &BTreeMap::new())?;
            let reference = parse_counting(
                "(geq 1 x (geq 1 y (and (not (= x y)) (E x y))))",
            )?;
            let expected = eval_formula(&b, &reference, &BTreeMap::new())?;
            println!("equality-free sentence: {verdict}");
            println!("equality sentence:      {expected}");
            if (b.size() * b.size()) as u64 <= bound && verdict != expected {
                return Err(Error::InvalidParameter(
                    "sentences disagree inside the bound".to_string(),
                ));
            }
        }
        Command::Verify(args) => {
            let theorem = parse_theorem(&args.theorem)?;
            let params = theorem_params(theorem, &args)?;
            let (universe, cap) = match &args.pairs {
                Some(dir) => (load_pairs_dir(dir)?, DEFAULT_GRAPH_ENUM_CAP),
                None => {
                    let spec = universe_spec(theorem, &args);
                    let cap = enum_cap(&spec);
                    (enumerate_structures(&spec, cap)?, cap)
                }
            };
            let simple = !args.general && theorem != Theorem::Modal;
            let mut failures = 0usize;
            for i in 0..universe.len() {
                for j in i..universe.len() {
                    let r = verify_theorem(
                        theorem,
                        &universe[i],
                        &universe[j],
                        &params,
                        args.witness_cap,
                        simple,
                        cap,
                    )?;
                    let status = match r.outcome {
                        homlab::harness::Outcome::AgreeEquivalent => "agree-equivalent",
                        homlab::harness::Outcome::AgreeDistinguished => "agree-distinguished",
                        homlab::harness::Outcome::Exhausted => "exhausted",
                        homlab::harness::Outcome::Failure => "FAILURE",
                    };
                    let witness = r
                        .witness
                        .as_ref()
                        .map(|w| format!(" witness={} counts={:?}", w.id, w.counts))
                        .unwrap_or_default();
                    println!("{} vs {}: logic={} {status}{witness}", r.a, r.b, r.logic);
                    if r.outcome == homlab::harness::Outcome::Failure {
                        failures += 1;
                    }
                }
            }
            if failures > 0 {
                eprintln!("{failures} failures");
                return Ok(ExitCode::from(1));
            }
        }
        Command::Sweep(args) => {
            let theorem = parse_theorem(&args.theorem)?;
            let params = theorem_params(theorem, &args)?;
            let spec = universe_spec(theorem, &args);
            let report = sweep(theorem, &spec, &params, args.witness_cap, enum_cap(&spec))?;
            let json = serde_json::to_string_pretty(&report)?;
            match &args.out {
                Some(path) => std::fs::write(path, json)?,
                None => println!("{json}"),
            }
            eprintln!(
                "pairs={} agree-equivalent={} agree-distinguished={} exhausted={} failures={}",
                report.summary.pairs,
                report.summary.agree_equivalent,
                report.summary.agree_distinguished,
                report.summary.exhausted,
                report.summary.failures
            );
            if report.summary.failures > 0 {
                return Ok(ExitCode::from(1));
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}
