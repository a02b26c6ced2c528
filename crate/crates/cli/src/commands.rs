use std::fmt::Write as _;
use std::fs;

use serde_json::{json, Value};
use ulam_core::ball::{self, BallTable, DistributionCache, LisDistribution, DEFAULT_ENUMERATION_LIMIT};
use ulam_core::ip::{self, IlpStatus};
use ulam_core::perm::{lcs_length, parse_line, ulam_distance};
use ulam_core::search::{
    self, CellStatus, ClassOrder, Optimality, SearchOptions, TableReport,
};
use ulam_core::{BoundOptions, BoundReport, Budget, CodeParams, Permutation};

use crate::args::{Cli, Command, Order, DEFAULT_SECONDS};
use crate::output::{emit, Header, Report, Status};
use crate::Failure;

pub fn run(cli: &Cli) -> Result<(), Failure> {
    let common = &cli.common;
    if common.strict && cli.command.is_randomized() && common.seed.is_none() {
        return Err(Failure::usage(format!(
            "{} is randomized; --strict requires an explicit --seed",
            cli.command.name()
        )));
    }
    let threads = match common.threads {
        Some(0) => return Err(Failure::usage("--threads must be positive")),
        Some(t) => t,
        None => std::thread::available_parallelism().map_or(1, |t| t.get()),
    };
    // ignore the error when a pool already exists (tests call run twice)
    let _ = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global();

    let budget = effective_budget(cli)?;
    let header = Header {
        tool: "ulam",
        version: env!("CARGO_PKG_VERSION"),
        command: cli.command.name(),
        seed: common.seed.unwrap_or(0),
        threads,
        max_seconds: budget.and_then(|b| b.max_seconds),
        max_nodes: budget.and_then(|b| b.max_nodes),
        long_run: common.long_run,
        strict: common.strict,
    };
    let budget = budget.unwrap_or_default();
    let report = match &cli.command {
        Command::Distance { perms, file } => distance(perms, file.as_deref())?,
        Command::Bounds {
            n,
            d,
            with_ip,
            with_sphere,
            enumeration_limit,
        } => bounds(cli, *n, *d, with_ip.then_some(budget), *with_sphere, *enumeration_limit)?,
        Command::Search {
            n,
            d,
            order,
            vertex_limit,
            no_fix_identity,
            save_code,
        } => {
            let options = SearchOptions {
                class_order: match order {
                    Order::Lexicographic => ClassOrder::Lexicographic,
                    Order::Fewest => ClassOrder::FewestCandidates,
                    Order::Coloring => ClassOrder::Coloring,
                },
                fix_identity: !no_fix_identity,
                vertex_limit: *vertex_limit,
                ..SearchOptions::default()
            };
            search_cmd(*n, *d, budget, options, save_code.as_deref())?
        }
        Command::Verify { file } => verify(file)?,
        Command::Tables { n, d, vertex_limit } => {
            let d = d.clone().unwrap_or(2..=n.end().saturating_sub(1).max(2));
            tables(n.clone(), d, budget, *vertex_limit)?
        }
        Command::Ball {
            n,
            r,
            enumeration_limit,
        } => ball_cmd(cli, *n, *r, *enumeration_limit)?,
        Command::Lisdist {
            n,
            sampled,
            samples,
            enumeration_limit,
        } => {
            let dist = if *sampled {
                ball::lis_distribution_sampled(*n, *samples, header.seed)?
            } else {
                exact_distribution(cli, *n, *enumeration_limit)?
            };
            lisdist(&dist)
        }
        Command::Mc { n, k, samples } => mc(*n, *k, *samples, header.seed)?,
        Command::Clt { n, samples } => clt(*n, *samples, header.seed)?,
        Command::ExportLp { n, d } => export_lp(*n, *d)?,
    };
    emit(cli, &header, report)
}

/// The budget for searches and integer programs, `None` for commands that
/// take none.
fn effective_budget(cli: &Cli) -> Result<Option<Budget>, Failure> {
    let c = &cli.common;
    if let Some(s) = c.max_seconds {
        if !(s.is_finite() && s > 0.0) {
            return Err(Failure::usage("--max-seconds must be a positive number"));
        }
    }
    if !cli.command.is_budgeted() {
        return Ok(None);
    }
    let mut b = Budget::unlimited()
        .with_seconds(c.max_seconds)
        .with_nodes(c.max_nodes);
    if b.max_seconds.is_none() && b.max_nodes.is_none() && !c.long_run {
        b.max_seconds = Some(DEFAULT_SECONDS);
    }
    Ok(Some(b))
}

fn params(n: usize, d: usize) -> Result<CodeParams, Failure> {
    Ok(CodeParams::new(n, d)?)
}

fn perm_list(p: &Permutation) -> Value {
    json!(p.to_one_based())
}

fn distance(perms: &[String], file: Option<&std::path::Path>) -> Result<Report, Failure> {
    let lines: Vec<String> = match file {
        Some(path) => fs::read_to_string(path)?
            .lines()
            .filter(|l| !l.trim().is_empty())
            .map(str::to_string)
            .collect(),
        None => perms.to_vec(),
    };
    if lines.len() != 2 {
        return Err(Failure::usage(format!(
            "distance needs exactly two permutations, got {}",
            lines.len()
        )));
    }
    let parse = |k: usize| parse_line(&lines[k].replace(',', " "), k + 1);
    let (sigma, tau) = (parse(0)?, parse(1)?);
    let dist = ulam_distance(&sigma, &tau)?;
    let lcs = lcs_length(&sigma, &tau)?;
    Ok(Report {
        status: Status::Ok,
        json: json!({
            "n": sigma.len(),
            "sigma": perm_list(&sigma),
            "tau": perm_list(&tau),
            "distance": dist,
            "lcs": lcs,
        }),
        text: format!("distance {dist}\nlcs {lcs}\n"),
        csv: format!("n,distance,lcs\n{},{dist},{lcs}\n", sigma.len()),
        raw_text: false,
    })
}

fn cache(cli: &Cli) -> Option<DistributionCache> {
    cli.common.cache_dir.as_ref().map(DistributionCache::new)
}

fn exact_distribution(cli: &Cli, n: usize, limit: Option<usize>) -> Result<LisDistribution, Failure> {
    let limit = limit.unwrap_or(DEFAULT_ENUMERATION_LIMIT);
    Ok(match cache(cli) {
        Some(c) => c.load_or_compute(n, limit)?,
        None => ball::lis_distribution_exact_with_limit(n, limit)?,
    })
}

fn bounds(
    cli: &Cli,
    n: usize,
    d: usize,
    ip_budget: Option<Budget>,
    sphere: bool,
    enumeration_limit: Option<usize>,
) -> Result<Report, Failure> {
    let options = BoundOptions {
        ip_budget,
        sphere,
        enumeration_limit,
        cache: cache(cli),
    };
    let r = ulam_core::bound_report(params(n, d)?, &options)?;
    let status = if r.ip_status == Some(IlpStatus::BoundOnly) {
        Status::Bounded
    } else {
        Status::Ok
    };
    Ok(Report {
        status,
        json: serde_json::to_value(&r).expect("serializable"),
        text: r.to_text(),
        csv: format!("{}\n{}\n", BoundReport::csv_header(), r.to_csv_row()),
        raw_text: false,
    })
}

fn search_cmd(
    n: usize,
    d: usize,
    budget: Budget,
    options: SearchOptions,
    save_code: Option<&std::path::Path>,
) -> Result<Report, Failure> {
    let r = search::max_code_search_with(params(n, d)?, budget, options)?;
    if let Some(path) = save_code {
        fs::write(path, r.code.to_file_text())?;
    }
    let proven = r.optimality == Optimality::ProvenMaximum;
    let mut text = format!(
        "size {}\noptimality {}\nupper_bound_used {}\nnodes {}\nelapsed_seconds {:.3}\ncode\n",
        r.code.len(),
        if proven { "proven_maximum" } else { "lower_bound_only" },
        r.upper_bound_used,
        r.nodes_explored,
        r.elapsed.as_secs_f64()
    );
    for w in &r.code.words {
        writeln!(text, "  {w}").unwrap();
    }
    let csv = format!(
        "n,d,size,optimality,upper_bound_used,nodes\n{n},{d},{},{},{},{}\n",
        r.code.len(),
        if proven { "proven_maximum" } else { "lower_bound_only" },
        r.upper_bound_used,
        r.nodes_explored
    );
    Ok(Report {
        status: if proven { Status::Ok } else { Status::Bounded },
        json: serde_json::to_value(&r).expect("serializable"),
        text,
        csv,
        raw_text: false,
    })
}

fn verify(file: &std::path::Path) -> Result<Report, Failure> {
    let text = fs::read_to_string(file)?;
    let (p, words) = search::read_code_file(&text)?;
    let code = search::verify_code(&words, p)?;
    Ok(Report {
        status: Status::Ok,
        json: serde_json::to_value(&code).expect("serializable"),
        text: format!(
            "valid (n, d) = ({}, {})\nsize {}\nmin_distance {}\n",
            p.n,
            p.d,
            code.len(),
            code.min_distance
        ),
        csv: format!(
            "n,d,size,min_distance\n{},{},{},{}\n",
            p.n,
            p.d,
            code.len(),
            code.min_distance
        ),
        raw_text: false,
    })
}

fn tables(
    ns: std::ops::RangeInclusive<usize>,
    ds: std::ops::RangeInclusive<usize>,
    budget: Budget,
    vertex_limit: usize,
) -> Result<Report, Failure> {
    let report: TableReport = search::reproduce_tables(ns, ds, budget, vertex_limit)?;
    let all_proven = report.cells.iter().all(|c| c.status == CellStatus::Proven);
    Ok(Report {
        status: if all_proven { Status::Ok } else { Status::Bounded },
        json: serde_json::to_value(&report).expect("serializable"),
        text: report.to_text(),
        csv: report.to_csv(),
        raw_text: false,
    })
}

fn ball_cmd(cli: &Cli, n: usize, r: Option<usize>, limit: Option<usize>) -> Result<Report, Failure> {
    if let Some(r) = r {
        if r >= n {
            return Err(Failure::usage(format!("radius {r} outside 0..={}", n.saturating_sub(1))));
        }
    }
    let table = BallTable::from_distribution(&exact_distribution(cli, n, limit)?)?;
    let radii: Vec<usize> = match r {
        Some(r) => vec![r],
        None => (0..n).collect(),
    };
    let rows: Vec<(usize, u64)> = radii.iter().map(|&r| (r, table.size(r))).collect();
    let mut text = String::new();
    let mut csv = String::from("r,size\n");
    for (r, s) in &rows {
        writeln!(text, "{r} {s}").unwrap();
        writeln!(csv, "{r},{s}").unwrap();
    }
    Ok(Report {
        status: Status::Ok,
        json: json!({
            "n": n,
            "sizes": rows.iter().map(|(r, s)| json!({"r": r, "size": s})).collect::<Vec<_>>(),
        }),
        text,
        csv,
        raw_text: false,
    })
}

fn lisdist(dist: &LisDistribution) -> Report {
    let mut text = String::new();
    let mut csv = String::from("k,count\n");
    for (k, c) in &dist.counts {
        writeln!(text, "{k} {c}").unwrap();
        writeln!(csv, "{k},{c}").unwrap();
    }
    Report {
        status: Status::Ok,
        json: serde_json::to_value(dist).expect("serializable"),
        text,
        csv,
        raw_text: false,
    }
}

fn mc(n: usize, k: usize, samples: u64, seed: u64) -> Result<Report, Failure> {
    let e = ball::lis_prob_mc(n, k, samples, seed)?;
    Ok(Report {
        status: Status::Ok,
        json: json!({
            "n": n,
            "k": k,
            "seed": seed,
            "estimate": e.estimate,
            "stderr": e.stderr,
            "samples": e.samples,
            "hits": e.hits,
        }),
        text: format!(
            "estimate {}\nstderr {}\nhits {}\nsamples {}\n",
            e.estimate, e.stderr, e.hits, e.samples
        ),
        csv: format!(
            "n,k,estimate,stderr,hits,samples\n{n},{k},{},{},{},{}\n",
            e.estimate, e.stderr, e.hits, e.samples
        ),
        raw_text: false,
    })
}

fn clt(n: usize, samples: u64, seed: u64) -> Result<Report, Failure> {
    let values = ball::clt_samples(n, samples, seed)?;
    let mut text = String::new();
    for v in &values {
        writeln!(text, "{v}").unwrap();
    }
    Ok(Report {
        status: Status::Ok,
        json: json!({ "n": n, "seed": seed, "samples": values.len(), "values": values }),
        csv: format!("value\n{text}"),
        text,
        raw_text: true,
    })
}

fn export_lp(n: usize, d: usize) -> Result<Report, Failure> {
    let model = ip::build_model(params(n, d)?)?;
    let lp = ip::export_lp(&model);
    Ok(Report {
        status: Status::Ok,
        json: json!({ "n": n, "d": d, "lp": lp }),
        csv: lp.clone(),
        text: lp,
        raw_text: true,
    })
}
