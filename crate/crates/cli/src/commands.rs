use std::fmt::Write as _;
use std::io::Read;
use std::sync::Arc;
use std::time::Duration;

use addchain::cache::LengthCache;
use addchain::chain::{decompose, recompose, AdditionChain, GeneratorSeq};
use addchain::identity::{evaluate_generators, IdentityReport};
use addchain::schedule::{emit, Schedule};
use addchain::scholz::{BoundRecord, Lab, ScholzRecord, Status};
use addchain::search::{enumerate_chains, enumerate_star_chains, shortest_chain, SearchError};
use addchain::{Budget, SearchConfig};
use serde::Serialize;

use crate::args::{Command, Format, Global};

/// How a command finished, mapped onto the process exit code.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Outcome {
    Passed = 0,
    Violation = 1,
    Usage = 2,
    BudgetExceeded = 3,
}

pub struct Report {
    pub stdout: String,
    pub stderr: String,
    pub outcome: Outcome,
}

impl Report {
    fn new() -> Self {
        Report {
            stdout: String::new(),
            stderr: String::new(),
            outcome: Outcome::Passed,
        }
    }

    fn usage(msg: impl Into<String>) -> Self {
        let mut r = Report::new();
        r.stderr = format!("error: {}\n", msg.into());
        r.outcome = Outcome::Usage;
        r
    }

    fn flag(&mut self, outcome: Outcome) {
        // a falsification outranks a budget overrun
        self.outcome = match (self.outcome, outcome) {
            (Outcome::Violation, _) | (_, Outcome::Violation) => Outcome::Violation,
            (a, b) => a.max(b),
        };
    }

    fn json<T: Serialize>(&mut self, value: &T) {
        self.stdout = serde_json::to_string_pretty(value).expect("serializable") + "\n";
    }
}

struct Ctx {
    format: Format,
    config: SearchConfig,
    cache: Option<Arc<LengthCache>>,
}

impl Ctx {
    fn lab(&self) -> Lab {
        let lab = Lab::new(self.config);
        match &self.cache {
            Some(c) => lab.with_cache(c.clone()),
            None => lab,
        }
    }
}

pub fn run(global: &Global, command: &Command, stdin: &mut dyn Read) -> Report {
    let cache = match &global.cache {
        Some(path) => match LengthCache::open(path) {
            Ok(c) => Some(Arc::new(c)),
            Err(e) => return Report::usage(e.to_string()),
        },
        None => None,
    };
    let mut report_skipped = String::new();
    if let Some(c) = &cache {
        for e in c.skipped() {
            let _ = writeln!(report_skipped, "warning: {e}; entry discarded");
        }
    }
    let ctx = Ctx {
        format: global.format,
        config: SearchConfig::default()
            .with_budget(Budget {
                max_time: global.budget_ms.map(Duration::from_millis),
                max_nodes: global.budget_nodes,
            })
            .with_jobs(global.jobs),
        cache,
    };
    let mut report = match command {
        Command::Solve { n, star_only } => solve(&ctx, *n, *star_only),
        Command::Decompose => match read_all(stdin) {
            Ok(text) => decompose_cmd(&ctx, &text),
            Err(r) => r,
        },
        Command::Verify { n, range, max_len } => {
            let targets = match (n, range) {
                (Some(n), None) => 3..=*n,
                (None, Some(r)) => r.clone(),
                _ => return Report::usage("verify needs --n or --range"),
            };
            verify(&ctx, *targets.start(), *targets.end(), *max_len)
        }
        Command::Scholz { n, range } => {
            let targets = match (n, range) {
                (Some(n), None) => *n..=*n,
                (None, Some(r)) => r.clone(),
                _ => return Report::usage("scholz needs --n or --range"),
            };
            scholz(&ctx, *targets.start(), *targets.end())
        }
        Command::Sweep { range, exact_max } => sweep(&ctx, *range.start(), *range.end(), *exact_max),
        Command::Emit {
            n,
            star_only,
            base,
            modulus,
        } => {
            let chain = match n {
                Some(n) => match shortest_chain(*n, &ctx.config.star_only(*star_only)) {
                    Ok(r) => r.witness,
                    Err(e) => return search_failure(e),
                },
                None => match read_all(stdin).and_then(|t| parse_one(&t)) {
                    Ok(c) => c,
                    Err(r) => return r,
                },
            };
            emit_cmd(&ctx, &chain, base.zip(*modulus))
        }
        Command::Enumerate { n, max_len, all } => enumerate(&ctx, *n, *max_len, *all),
    };
    report.stderr.insert_str(0, &report_skipped);
    report
}

fn read_all(stdin: &mut dyn Read) -> Result<String, Report> {
    let mut s = String::new();
    stdin
        .read_to_string(&mut s)
        .map_err(|e| Report::usage(format!("reading stdin: {e}")))?;
    Ok(s)
}

fn parse_one(text: &str) -> Result<AdditionChain, Report> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let line = lines.next().ok_or_else(|| Report::usage("no chain on stdin"))?;
    line.parse().map_err(|e| Report::usage(format!("{e}")))
}

fn search_failure(e: SearchError) -> Report {
    let mut r = Report::new();
    r.stderr = format!("error: {e}\n");
    r.outcome = match e {
        SearchError::Timeout { .. } => Outcome::BudgetExceeded,
        _ => Outcome::Usage,
    };
    r
}

fn csv_unsupported(cmd: &str) -> Report {
    Report::usage(format!("--format csv is not available for {cmd}"))
}

fn solve(ctx: &Ctx, n: u64, star_only: bool) -> Report {
    if ctx.format == Format::Csv {
        return csv_unsupported("solve");
    }
    let result = match shortest_chain(n, &ctx.config.star_only(star_only)) {
        Ok(r) => r,
        Err(e) => return search_failure(e),
    };
    let mut rep = Report::new();
    if let (Some(cache), false) = (&ctx.cache, star_only) {
        match cache.get(n) {
            Some(hit) if hit.length != result.shortest_length => {
                let _ = writeln!(
                    rep.stderr,
                    "VIOLATION: cached length {} for n={n} disagrees with search ({})",
                    hit.length, result.shortest_length
                );
                rep.flag(Outcome::Violation);
            }
            Some(_) => {}
            None => {
                if let Err(e) = cache.put(n, result.shortest_length, &result.witness) {
                    let _ = writeln!(rep.stderr, "warning: cache write failed: {e}");
                }
            }
        }
    }
    match ctx.format {
        Format::Json => rep.json(&result),
        _ => {
            let s = &mut rep.stdout;
            let class = if star_only { "star " } else { "" };
            let _ = writeln!(s, "n = {n}");
            let _ = writeln!(s, "shortest {class}length = {}", result.shortest_length);
            let _ = writeln!(s, "witness: {}", result.witness);
            if !star_only {
                let _ = writeln!(s, "shortest star length = {}", result.star_shortest_length);
                let _ = writeln!(s, "star witness: {}", result.star_witness);
            }
            let _ = writeln!(s, "nodes expanded = {}", result.nodes_expanded);
            let _ = writeln!(s, "time = {:?}", result.wall_time);
        }
    }
    rep
}

#[derive(Serialize)]
struct Decomposition<'a> {
    chain: &'a AdditionChain,
    generators: &'a GeneratorSeq,
    report: &'a IdentityReport,
}

fn tuple(v: &[u64]) -> String {
    let inner: Vec<String> = v.iter().map(u64::to_string).collect();
    format!("({})", inner.join(","))
}

fn falsification(chain: &AdditionChain, identities: &[&str]) -> String {
    format!("FALSIFICATION: {chain} fails {}\n", identities.join(", "))
}

fn decompose_cmd(ctx: &Ctx, text: &str) -> Report {
    if ctx.format == Format::Csv {
        return csv_unsupported("decompose");
    }
    let mut rep = Report::new();
    let mut results = Vec::new();
    for line in text.lines().filter(|l| !l.trim().is_empty()) {
        let chain: AdditionChain = match line.parse() {
            Ok(c) => c,
            Err(e) => return Report::usage(format!("{e}")),
        };
        let gens = match decompose(&chain) {
            Ok(g) => g,
            Err(e) => return Report::usage(format!("{chain}: {e}")),
        };
        let report = evaluate_generators(&gens);
        let failures = report.verdicts.failures();
        if !failures.is_empty() {
            rep.stderr += &falsification(&chain, &failures);
            rep.flag(Outcome::Violation);
        }
        results.push((chain, gens, report));
    }
    if results.is_empty() {
        return Report::usage("no chain on stdin");
    }
    match ctx.format {
        Format::Json => {
            let out: Vec<Decomposition> = results
                .iter()
                .map(|(chain, generators, report)| Decomposition {
                    chain,
                    generators,
                    report,
                })
                .collect();
            if out.len() == 1 {
                rep.json(&out[0]);
            } else {
                rep.json(&out);
            }
        }
        _ => {
            for (chain, gens, report) in &results {
                write_decomposition(&mut rep.stdout, chain, gens, report);
            }
        }
    }
    rep
}

fn show<T: std::fmt::Display>(v: Option<T>) -> String {
    v.map_or_else(|| "n/a".to_string(), |x| x.to_string())
}

fn write_decomposition(s: &mut String, chain: &AdditionChain, gens: &GeneratorSeq, r: &IdentityReport) {
    let _ = writeln!(s, "chain: {chain}");
    let _ = writeln!(s, "a = {}", tuple(gens.determiners()));
    let _ = writeln!(s, "r = {}", tuple(gens.regulators()));
    let _ = writeln!(s, "length = {}, target = {}", r.length, r.target);
    let _ = writeln!(s, "sum r = {}", r.regulator_sum);
    let _ = writeln!(s, "length bounds = [{}, {}]", r.length_lower, r.length_upper);
    let _ = writeln!(s, "sum a (to length) = {}", r.determiner_sum_to_delta);
    let _ = writeln!(s, "sum a (full) = {}", r.determiner_sum_full);
    let _ = writeln!(s, "sum s = {}", r.element_sum);
    let _ = writeln!(s, "step integral = {}", r.step_integral);
    let v = &r.verdicts;
    let _ = writeln!(s, "verdicts:");
    let _ = writeln!(s, "  regulator_sum = {}", v.regulator_sum);
    let _ = writeln!(s, "  length_lower = {}", v.length_lower);
    let _ = writeln!(s, "  length_upper = {}", v.length_upper);
    let _ = writeln!(s, "  determiner_closed_form = {}", show(v.determiner_closed_form));
    let _ = writeln!(s, "  determiner_integral = {}", show(v.determiner_integral));
    let _ = writeln!(s, "  determiner_integral_expanded = {}", show(v.determiner_integral_expanded));
    let _ = writeln!(s, "  element_sum_lower_bound = {}", v.element_sum_lower_bound);
    let _ = writeln!(s, "  element_sum_identity = {}", show(v.element_sum_identity));
    let _ = writeln!(s, "  abel_cross_check = {}", v.abel_cross_check);
    let _ = writeln!(s, "all verdicts true: {}", r.all_hold());
}

#[derive(Serialize)]
struct VerifyFailure {
    chain: String,
    failed: Vec<String>,
}

#[derive(Serialize)]
struct VerifySummary {
    target_min: u64,
    target_max: u64,
    max_len: usize,
    chains_checked: u64,
    failures: Vec<VerifyFailure>,
}

fn verify(ctx: &Ctx, lo: u64, hi: u64, max_len: usize) -> Report {
    if ctx.format == Format::Csv {
        return csv_unsupported("verify");
    }
    let mut rep = Report::new();
    let mut summary = VerifySummary {
        target_min: lo.max(3),
        target_max: hi,
        max_len,
        chains_checked: 0,
        failures: Vec::new(),
    };
    for n in lo.max(3)..=hi {
        let chains = match enumerate_star_chains(n, max_len) {
            Ok(c) => c,
            Err(e) => return Report::usage(e.to_string()),
        };
        for chain in chains {
            summary.chains_checked += 1;
            let gens = match decompose(&chain) {
                Ok(g) => g,
                Err(e) => {
                    summary.failures.push(VerifyFailure {
                        chain: chain.to_string(),
                        failed: vec![format!("decompose: {e}")],
                    });
                    continue;
                }
            };
            let mut failed: Vec<String> = evaluate_generators(&gens)
                .verdicts
                .failures()
                .into_iter()
                .map(String::from)
                .collect();
            if recompose(&gens).as_ref() != Ok(&chain) {
                failed.push("recompose_round_trip".into());
            }
            if !failed.is_empty() {
                let names: Vec<&str> = failed.iter().map(String::as_str).collect();
                rep.stderr += &falsification(&chain, &names);
                summary.failures.push(VerifyFailure {
                    chain: chain.to_string(),
                    failed,
                });
            }
        }
    }
    if !summary.failures.is_empty() {
        rep.flag(Outcome::Violation);
    }
    match ctx.format {
        Format::Json => rep.json(&summary),
        _ => {
            let _ = writeln!(
                rep.stdout,
                "targets {}..={}, length <= {}: {} checked, {} failures",
                summary.target_min,
                summary.target_max,
                max_len,
                plural(summary.chains_checked, "chain"),
                summary.failures.len()
            );
        }
    }
    rep
}

fn scholz(ctx: &Ctx, lo: u64, hi: u64) -> Report {
    let records = match ctx.lab().sweep(lo, hi) {
        Ok(r) => r,
        Err(e) => return Report::usage(e.to_string()),
    };
    let mut rep = Report::new();
    for r in &records {
        let bad = r.falsifications();
        if !bad.is_empty() {
            let _ = writeln!(rep.stderr, "FALSIFICATION: n={} fails {}", r.n, bad.join(", "));
            rep.flag(Outcome::Violation);
        }
        if r.status == Status::Incomplete {
            let _ = writeln!(
                rep.stderr,
                "incomplete: n={} ({})",
                r.n,
                r.note.as_deref().unwrap_or("budget")
            );
            rep.flag(Outcome::BudgetExceeded);
        }
    }
    match ctx.format {
        Format::Json => rep.json(&records),
        Format::Csv => {
            rep.stdout = csv(ScholzRecord::CSV_HEADER, records.iter().map(ScholzRecord::csv_row));
        }
        Format::Text => {
            rep.stdout = text_table(ScholzRecord::CSV_HEADER, records.iter().map(ScholzRecord::csv_row));
        }
    }
    rep
}

fn sweep(ctx: &Ctx, lo: u64, hi: u64, exact_max: u64) -> Report {
    let records = match ctx.lab().bound_sweep(lo, hi, exact_max) {
        Ok(r) => r,
        Err(e) => return search_failure(e),
    };
    let mut rep = Report::new();
    for r in &records {
        if !r.half_plus_ok || r.half_ok == Some(false) {
            let _ = writeln!(rep.stderr, "VIOLATION: length bound fails at n={}", r.n);
            rep.flag(Outcome::Violation);
        }
    }
    match ctx.format {
        Format::Json => rep.json(&records),
        Format::Csv => rep.stdout = csv(BoundRecord::CSV_HEADER, records.iter().map(BoundRecord::csv_row)),
        Format::Text => {
            rep.stdout = text_table(BoundRecord::CSV_HEADER, records.iter().map(BoundRecord::csv_row));
            let exact = records.iter().filter(|r| r.exact).count();
            let _ = writeln!(
                rep.stdout,
                "{} targets ({} exact), all bounds hold: {}",
                records.len(),
                exact,
                rep.outcome == Outcome::Passed
            );
        }
    }
    rep
}

fn plural(k: u64, noun: &str) -> String {
    if k == 1 {
        format!("1 {noun}")
    } else {
        format!("{k} {noun}s")
    }
}

fn csv(header: &str, rows: impl Iterator<Item = String>) -> String {
    let mut out = String::from(header);
    out.push('\n');
    for row in rows {
        out += &row;
        out.push('\n');
    }
    out
}

fn text_table(header: &str, rows: impl Iterator<Item = String>) -> String {
    let rows: Vec<Vec<String>> = std::iter::once(header.to_string())
        .chain(rows)
        .map(|r| r.split(',').map(String::from).collect())
        .collect();
    let cols = rows[0].len();
    let widths: Vec<usize> = (0..cols)
        .map(|c| rows.iter().map(|r| r[c].len()).max().unwrap_or(0))
        .collect();
    let mut out = String::new();
    for r in rows {
        let cells: Vec<String> = r
            .iter()
            .zip(&widths)
            .map(|(cell, w)| format!("{cell:>w$}"))
            .collect();
        out += cells.join("  ").trim_end();
        out.push('\n');
    }
    out
}

fn mod_pow(base: u64, mut exp: u64, modulus: u64) -> u64 {
    let m = modulus as u128;
    let mut acc = 1u128 % m;
    let mut b = base as u128 % m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = acc * b % m;
        }
        b = b * b % m;
        exp >>= 1;
    }
    acc as u64
}

#[derive(Serialize)]
struct Evaluation {
    base: u64,
    modulus: u64,
    value: u64,
    reference: u64,
    ok: bool,
}

#[derive(Serialize)]
struct Emitted<'a> {
    chain: &'a AdditionChain,
    schedule: &'a Schedule,
    #[serde(skip_serializing_if = "Option::is_none")]
    evaluation: Option<Evaluation>,
}

fn emit_cmd(ctx: &Ctx, chain: &AdditionChain, eval: Option<(u64, u64)>) -> Report {
    if ctx.format == Format::Csv {
        return csv_unsupported("emit");
    }
    let schedule = emit(chain);
    let mut rep = Report::new();
    let evaluation = match eval {
        Some((base, modulus)) => match schedule.evaluate(base, modulus) {
            Ok(value) => {
                let reference = mod_pow(base, chain.target(), modulus);
                if value != reference {
                    let _ = writeln!(
                        rep.stderr,
                        "VIOLATION: schedule gives {value}, square-and-multiply gives {reference}"
                    );
                    rep.flag(Outcome::Violation);
                }
                Some(Evaluation {
                    base,
                    modulus,
                    value,
                    reference,
                    ok: value == reference,
                })
            }
            Err(e) => return Report::usage(e.to_string()),
        },
        None => None,
    };
    match ctx.format {
        Format::Json => rep.json(&Emitted {
            chain,
            schedule: &schedule,
            evaluation,
        }),
        _ => {
            let s = &mut rep.stdout;
            let _ = writeln!(s, "# {chain}");
            *s += &schedule.to_string();
            let _ = writeln!(s, "# {} multiplications", schedule.multiplications());
            if let Some(e) = evaluation {
                let _ = writeln!(s, "{}^{} mod {} = {}", e.base, chain.target(), e.modulus, e.value);
            }
        }
    }
    rep
}

fn enumerate(ctx: &Ctx, n: u64, max_len: usize, all: bool) -> Report {
    let chains = if all {
        enumerate_chains(n, max_len)
    } else {
        enumerate_star_chains(n, max_len)
    };
    let chains: Vec<AdditionChain> = match chains {
        Ok(c) => c.collect(),
        Err(e) => return Report::usage(e.to_string()),
    };
    let mut rep = Report::new();
    match ctx.format {
        Format::Json => rep.json(&chains),
        Format::Csv => {
            rep.stdout = csv(
                "n,length,terms",
                chains
                    .iter()
                    .map(|c| format!("{},{},\"{}\"", c.target(), c.length(), c.terms_csv())),
            );
        }
        Format::Text => {
            for c in &chains {
                let _ = writeln!(rep.stdout, "{c}");
            }
        }
    }
    rep
}
