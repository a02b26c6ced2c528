use std::ops::RangeInclusive;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

pub const DEFAULT_SAMPLES: u64 = 100_000;
/// Wall-clock budget applied to searches and integer programs when neither
/// `--max-seconds`, `--max-nodes` nor `--long-run` is given.
pub const DEFAULT_SECONDS: f64 = 60.0;

#[derive(Debug, Parser)]
#[command(name = "ulam", version, about = "Permutation codes under the Ulam metric")]
pub struct Cli {
    #[command(flatten)]
    pub common: Common,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Common {
    /// Seed for randomized commands [default: 0].
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads [default: available parallelism].
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[arg(long, global = true)]
    pub max_seconds: Option<f64>,
    #[arg(long, global = true)]
    pub max_nodes: Option<u64>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    pub format: Format,
    /// Write the output here instead of standard output.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Require an explicit --seed for randomized commands.
    #[arg(long, global = true)]
    pub strict: bool,
    /// Drop the default time budget; searches run until done unless
    /// --max-seconds or --max-nodes is given.
    #[arg(long, global = true)]
    pub long_run: bool,
    /// Directory for cached exact LIS distributions.
    #[arg(long, global = true)]
    pub cache_dir: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Text,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Order {
    Lexicographic,
    Fewest,
    Coloring,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Ulam distance and LCS length of two permutations.
    Distance {
        /// Two permutations such as "2 3 1" or "2,3,1".
        perms: Vec<String>,
        /// File holding the two permutations, one per line.
        #[arg(long, conflicts_with = "perms")]
        file: Option<PathBuf>,
    },
    /// Singleton, GV, integer-programming and sphere-packing bounds.
    Bounds {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        d: usize,
        #[arg(long)]
        with_ip: bool,
        #[arg(long)]
        with_sphere: bool,
        #[arg(long)]
        enumeration_limit: Option<usize>,
    },
    /// Largest code by branch-and-bound over color classes.
    Search {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        d: usize,
        #[arg(long, value_enum, default_value_t = Order::Lexicographic)]
        order: Order,
        #[arg(long, default_value_t = ulam_core::search::DEFAULT_VERTEX_LIMIT)]
        vertex_limit: usize,
        /// Search all of S_n instead of fixing the identity as a codeword.
        #[arg(long)]
        no_fix_identity: bool,
        /// Also write the code found in code-file format.
        #[arg(long)]
        save_code: Option<PathBuf>,
    },
    /// Checks a code file ("n d" header, one permutation per line).
    Verify { file: PathBuf },
    /// Code sizes and Singleton-optimality verdicts over ranges of n and d.
    Tables {
        /// A single n or a range such as 4..6.
        #[arg(long, value_parser = parse_range)]
        n: RangeInclusive<usize>,
        /// Range of d [default: 2..n-1].
        #[arg(long, value_parser = parse_range)]
        d: Option<RangeInclusive<usize>>,
        #[arg(long, default_value_t = ulam_core::search::DEFAULT_VERTEX_LIMIT)]
        vertex_limit: usize,
    },
    /// Ulam ball sizes around the identity.
    Ball {
        #[arg(long)]
        n: usize,
        /// One radius; all radii when omitted.
        #[arg(long)]
        r: Option<usize>,
        #[arg(long)]
        enumeration_limit: Option<usize>,
    },
    /// Distribution of the longest increasing subsequence length.
    Lisdist {
        #[arg(long)]
        n: usize,
        /// Sample instead of enumerating.
        #[arg(long)]
        sampled: bool,
        #[arg(long, default_value_t = DEFAULT_SAMPLES)]
        samples: u64,
        #[arg(long)]
        enumeration_limit: Option<usize>,
    },
    /// Monte-Carlo estimate of P(L_n >= k).
    Mc {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        k: usize,
        #[arg(long, default_value_t = DEFAULT_SAMPLES)]
        samples: u64,
    },
    /// Samples of (L_n - 2 sqrt n) / n^(1/6), one per line.
    Clt {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = DEFAULT_SAMPLES)]
        samples: u64,
    },
    /// Writes the integer program for (n, d) in .lp format.
    ExportLp {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        d: usize,
    },
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Distance { .. } => "distance",
            Command::Bounds { .. } => "bounds",
            Command::Search { .. } => "search",
            Command::Verify { .. } => "verify",
            Command::Tables { .. } => "tables",
            Command::Ball { .. } => "ball",
            Command::Lisdist { .. } => "lisdist",
            Command::Mc { .. } => "mc",
            Command::Clt { .. } => "clt",
            Command::ExportLp { .. } => "export-lp",
        }
    }

    pub fn is_randomized(&self) -> bool {
        matches!(
            self,
            Command::Mc { .. } | Command::Clt { .. } | Command::Lisdist { sampled: true, .. }
        )
    }

    /// Whether the default time budget applies.
    pub fn is_budgeted(&self) -> bool {
        matches!(
            self,
            Command::Search { .. } | Command::Tables { .. } | Command::Bounds { with_ip: true, .. }
        )
    }
}

/// `"7"`, `"4..6"` or `"4..=6"`, both ends inclusive.
pub fn parse_range(s: &str) -> Result<RangeInclusive<usize>, String> {
    let num = |t: &str| {
        t.trim()
            .parse::<usize>()
            .map_err(|_| format!("expected a number or a range like 4..6, got {s:?}"))
    };
    let (lo, hi) = match s.split_once("..") {
        Some((lo, hi)) => (num(lo)?, num(hi.trim_start_matches('='))?),
        None => (num(s)?, num(s)?),
    };
    if lo > hi {
        return Err(format!("empty range {s:?}"));
    }
    Ok(lo..=hi)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ranges() {
        assert_eq!(parse_range("7").unwrap(), 7..=7);
        assert_eq!(parse_range("4..6").unwrap(), 4..=6);
        assert_eq!(parse_range("4..=6").unwrap(), 4..=6);
        assert!(parse_range("6..4").is_err());
        assert!(parse_range("x").is_err());
    }

    #[test]
    fn cli_definition_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }
}
