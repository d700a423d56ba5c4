//! Command-line driver. Exit codes: 0 satisfied or valid, 1 not satisfied or
//! invalid witness, 2 usage or input error, 3 timeout or resource limit.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Duration;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::buchi;
use crate::checker::{check, search_body, CheckError, Options, Stats};
use crate::encodings::{parse_topology, sample_instances, BenchmarkKind, SampleParams, TopologyFormat};
use crate::formula::AtomTable;
use crate::io::{self, parse_witness_xml, read_file, read_net, write_witness_xml};
use crate::lp;

pub const EXIT_SATISFIED: u8 = 0;
pub const EXIT_NOT_SATISFIED: u8 = 1;
pub const EXIT_ERROR: u8 = 2;
pub const EXIT_RESOURCE: u8 = 3;

#[derive(Parser, Debug)]
#[command(name = "hyperpn", version, about = "HyperLTL model checking on Petri nets")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Check a query against a net.
    Check(CheckArgs),
    /// Generate benchmark instances from a topology.
    Gen(GenArgs),
    /// Replay a witness file against a net.
    Replay {
        net: PathBuf,
        witness: PathBuf,
    },
}

#[derive(Args, Debug)]
pub struct CheckArgs {
    /// Net file (native format, or PNML by extension / leading `<`)
    pub net: PathBuf,
    pub query: PathBuf,
    /// Skip the state-equation prefilter.
    #[arg(long)]
    pub no_lp: bool,
    /// Wall-clock limit in seconds.
    #[arg(long, default_value_t = 900, value_parser = clap::value_parser!(u64).range(1..))]
    pub timeout: u64,
    /// Maximum number of stored configurations.
    #[arg(long, default_value_t = 10_000_000, value_parser = clap::value_parser!(u64).range(1..))]
    pub config_cap: u64,
    /// Witness XML path [default: next to the query, extension `witness.xml`]
    #[arg(short, long)]
    pub output: Option<PathBuf>,
    /// Print the state-equation system to stderr.
    #[arg(long)]
    pub dump_lp: bool,
    /// Print the Büchi automaton of the search body to stderr.
    #[arg(long)]
    pub dump_buchi: bool,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum GenKind {
    Congestion,
    Latency,
    Selfcompose,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum TopoFormat {
    Graphml,
    Edgelist,
}

#[derive(Args, Debug)]
pub struct GenArgs {
    pub kind: GenKind,
    pub topology: PathBuf,
    #[arg(long)]
    pub outdir: PathBuf,
    /// Number of routes (congestion kinds).
    #[arg(short, long, default_value_t = 2)]
    pub k: usize,
    /// Capacity (congestion kinds) or unscaled latency bound.
    #[arg(short, long, default_value_t = 1)]
    pub l: u64,
    /// Latency scale factor M.
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
    pub scale: u64,
    #[arg(long, default_value_t = 5)]
    pub count: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Topology format [default: graphml for .graphml/.xml, else edgelist]
    #[arg(long)]
    pub format: Option<TopoFormat>,
}

fn fail(err: &mut dyn Write, msg: impl std::fmt::Display) -> u8 {
    let _ = writeln!(err, "error: {msg}");
    EXIT_ERROR
}

fn print_stats(out: &mut dyn Write, s: &Stats) {
    let _ = writeln!(out, "configurations-explored: {}", s.configurations_explored);
    let _ = writeln!(out, "peak-stored: {}", s.peak_stored);
    let _ = writeln!(out, "buchi-states: {}", s.buchi_states);
    let _ = writeln!(out, "wall-time: {:.3}s", s.wall_time.as_secs_f64());
    if s.refuted_by_lp {
        let _ = writeln!(out, "refuted-by-lp");
    }
}

fn witness_path(a: &CheckArgs) -> PathBuf {
    a.output.clone().unwrap_or_else(|| a.query.with_extension("witness.xml"))
}

pub fn cmd_check(a: &CheckArgs, out: &mut dyn Write, err: &mut dyn Write) -> u8 {
    let net = match read_net(&a.net) {
        Ok(n) => n,
        Err(e) => return fail(err, format_args!("{}: {e}", a.net.display())),
    };
    let q = match read_file(&a.query).and_then(|t| io::parse_query_file(&t)) {
        Ok(q) => q,
        Err(e) => return fail(err, format_args!("{}: {e}", a.query.display())),
    };
    if a.dump_lp {
        match lp::prefilter_system(&net, &q) {
            Ok(sys) => {
                let _ = write!(err, "{sys}");
            }
            Err(reason) => {
                let _ = writeln!(err, "# no LP: {reason}");
            }
        }
    }
    if a.dump_buchi {
        let mut atoms = AtomTable::new();
        let ba = buchi::build(&search_body(&q), &mut atoms);
        let _ = write!(err, "{}", ba.dump(&atoms));
    }
    let opts = Options {
        lp_prefilter: !a.no_lp,
        config_cap: a.config_cap as usize,
        timeout: Some(Duration::from_secs(a.timeout)),
    };
    let v = match check(&net, &q, &opts) {
        Ok(v) => v,
        Err(e @ (CheckError::ConfigCap { .. } | CheckError::Timeout { .. })) => {
            let _ = writeln!(err, "error: {e}");
            if let CheckError::ConfigCap { stats, .. } | CheckError::Timeout { stats } = &e {
                print_stats(out, stats);
            }
            return EXIT_RESOURCE;
        }
        Err(e) => return fail(err, e),
    };
    let _ = writeln!(out, "RESULT: {}", if v.satisfied { "SATISFIED" } else { "NOT-SATISFIED" });
    print_stats(out, &v.stats);
    if let Some(w) = &v.witness {
        let path = witness_path(a);
        let xml = write_witness_xml(&net, v.satisfied, v.stats.configurations_explored, w);
        if let Err(e) = std::fs::write(&path, xml) {
            return fail(err, format_args!("{}: {e}", path.display()));
        }
        let _ = writeln!(out, "witness: {}", path.display());
    }
    if v.satisfied {
        EXIT_SATISFIED
    } else {
        EXIT_NOT_SATISFIED
    }
}

fn topology_format(a: &GenArgs) -> TopologyFormat {
    match a.format {
        Some(TopoFormat::Graphml) => TopologyFormat::GraphMl,
        Some(TopoFormat::Edgelist) => TopologyFormat::EdgeList,
        None => {
            let ext = a.topology.extension().and_then(|e| e.to_str()).unwrap_or("");
            if ext.eq_ignore_ascii_case("graphml") || ext.eq_ignore_ascii_case("xml") {
                TopologyFormat::GraphMl
            } else {
                TopologyFormat::EdgeList
            }
        }
    }
}

pub fn cmd_gen(a: &GenArgs, out: &mut dyn Write, err: &mut dyn Write) -> u8 {
    let bytes = match std::fs::read(&a.topology) {
        Ok(b) => b,
        Err(e) => return fail(err, format_args!("{}: {e}", a.topology.display())),
    };
    let topo = match parse_topology(&bytes, topology_format(a)) {
        Ok(t) => t,
        Err(e) => return fail(err, format_args!("{}: {e}", a.topology.display())),
    };
    let kind = match a.kind {
        GenKind::Congestion => BenchmarkKind::Congestion,
        GenKind::Latency => BenchmarkKind::Latency,
        GenKind::Selfcompose => BenchmarkKind::SelfComposed,
    };
    let params = SampleParams {
        k: a.k,
        l: a.l,
        scale: a.scale,
    };
    let instances = match sample_instances(&topo, kind, params, a.count, a.seed) {
        Ok(v) => v,
        Err(e) => return fail(err, e),
    };
    if let Err(e) = std::fs::create_dir_all(&a.outdir) {
        return fail(err, format_args!("{}: {e}", a.outdir.display()));
    }
    for inst in &instances {
        let stem = a.outdir.join(format!("{}_{:03}", kind.name(), inst.metadata.index));
        let files = [
            ("net", io::write_net(&inst.net)),
            ("query", io::write_query(&inst.query)),
            ("meta", io::write_metadata(&inst.metadata)),
        ];
        for (ext, text) in files {
            let path = stem.with_extension(ext);
            if let Err(e) = std::fs::write(&path, text) {
                return fail(err, format_args!("{}: {e}", path.display()));
            }
        }
        let _ = writeln!(out, "{}", stem.with_extension("net").display());
    }
    EXIT_SATISFIED
}

pub fn cmd_replay(net: &Path, witness: &Path, out: &mut dyn Write, err: &mut dyn Write) -> u8 {
    let n = match read_net(net) {
        Ok(n) => n,
        Err(e) => return fail(err, format_args!("{}: {e}", net.display())),
    };
    let doc = match read_file(witness).and_then(|t| parse_witness_xml(&t, &n)) {
        Ok(d) => d,
        Err(e) => return fail(err, format_args!("{}: {e}", witness.display())),
    };
    match doc.witness.replay(&n) {
        Ok(_) => {
            let _ = writeln!(
                out,
                "VALID: {} traces, prefix {}, loop {}",
                doc.witness.traces.len(),
                doc.witness.prefix_len(),
                doc.witness.cycle_len()
            );
            EXIT_SATISFIED
        }
        Err(e) => {
            let _ = writeln!(out, "INVALID: {e}");
            EXIT_NOT_SATISFIED
        }
    }
}

/// Parses `args` (program name first) and runs the command.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            if e.use_stderr() {
                let _ = write!(err, "{}", e.render());
                return EXIT_ERROR;
            }
            let _ = write!(out, "{}", e.render());
            return EXIT_SATISFIED;
        }
    };
    match &cli.command {
        Command::Check(a) => cmd_check(a, out, err),
        Command::Gen(a) => cmd_gen(a, out, err),
        Command::Replay { net, witness } => cmd_replay(net, witness, out, err),
    }
}
