use std::ops::RangeInclusive;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(name = "addchain", version)]
#[command(about = "Shortest addition chains, generator identities and Scholz conjecture checks")]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug)]
pub struct Global {
    /// Output format
    #[arg(long, value_enum, default_value_t = Format::Text, global = true)]
    pub format: Format,

    /// Length cache file
    #[arg(long, env = "SCHOLZ_CACHE", global = true)]
    pub cache: Option<PathBuf>,

    /// Per-search wall-clock budget in milliseconds
    #[arg(long, global = true)]
    pub budget_ms: Option<u64>,

    /// Per-search node budget
    #[arg(long, global = true)]
    pub budget_nodes: Option<u64>,

    /// Worker threads (1 keeps node counts reproducible)
    #[arg(long, default_value_t = 1, global = true)]
    pub jobs: usize,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Text,
    Json,
    Csv,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Compute the shortest chain for one target
    Solve {
        #[arg(long)]
        n: u64,
        /// Restrict the search to star chains
        #[arg(long)]
        star_only: bool,
    },
    /// Read chain records from stdin and print generators and identity report
    Decompose,
    /// Check every identity on all star chains up to a target
    Verify {
        /// Largest target; all targets from 3 are checked
        #[arg(long, conflicts_with = "range")]
        n: Option<u64>,
        #[arg(long, value_parser = parse_range)]
        range: Option<RangeInclusive<u64>>,
        #[arg(long, default_value_t = 9)]
        max_len: usize,
    },
    /// Classic and reformulated Scholz checks
    Scholz {
        #[arg(long, conflicts_with = "range")]
        n: Option<u64>,
        #[arg(long, value_parser = parse_range)]
        range: Option<RangeInclusive<u64>>,
    },
    /// Length bound checks over a range of targets
    Sweep {
        #[arg(long, value_parser = parse_range)]
        range: RangeInclusive<u64>,
        /// Targets up to this value get exact lengths; larger ones use the
        /// binary-method chain unless cached
        #[arg(long, default_value_t = 64)]
        exact_max: u64,
    },
    /// Straight-line exponentiation schedule for a chain
    Emit {
        /// Use the shortest chain for this exponent instead of reading stdin
        #[arg(long)]
        n: Option<u64>,
        #[arg(long)]
        star_only: bool,
        #[arg(long, requires = "modulus")]
        base: Option<u64>,
        #[arg(long, requires = "base")]
        modulus: Option<u64>,
    },
    /// List chains ending at a target
    Enumerate {
        #[arg(long)]
        n: u64,
        #[arg(long)]
        max_len: usize,
        /// Include non-star chains
        #[arg(long)]
        all: bool,
    },
}

pub fn parse_range(s: &str) -> Result<RangeInclusive<u64>, String> {
    let (a, b) = s
        .split_once("..")
        .ok_or_else(|| format!("expected <a>..<b>, got {s:?}"))?;
    let b = b.strip_prefix('=').unwrap_or(b);
    let a: u64 = a.trim().parse().map_err(|_| format!("bad range start {a:?}"))?;
    let b: u64 = b.trim().parse().map_err(|_| format!("bad range end {b:?}"))?;
    if a > b {
        return Err(format!("empty range {a}..{b}"));
    }
    Ok(a..=b)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ranges() {
        assert_eq!(parse_range("2..12"), Ok(2..=12));
        assert_eq!(parse_range("3..=3"), Ok(3..=3));
        assert!(parse_range("5..2").is_err());
        assert!(parse_range("5").is_err());
    }

    #[test]
    fn cli_shape() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }
}
