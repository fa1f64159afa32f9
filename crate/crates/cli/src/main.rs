// SPDX-License-Identifier: Apache-2.0

//! `infonet`: drive a simulated network from the shell.
//!
//! Exit status is 0 on success, 1 for usage or input errors and 2 for
//! runtime failures (I/O, unreachable network).

mod settings;

use std::collections::BTreeSet;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use infonet::dht::{address_balance_report, pattern_address};
use infonet::filter::parse_template;
use infonet::node::Delivery;
use infonet::rete::Binding;
use infonet::scenario::{run_roomdj, RoomDjConfig, ScenarioScript};
use infonet::sim::workload::{random_template, random_tuples, WorkloadSpec};
use infonet::sim::{spawn_network, Latency, Sim};
use infonet::text::{node_to_json, parse_jsonl, tuple_to_json};
use infonet::wire::{encode_stream, PacketStream};
use infonet::{KeyPair, Label, NameDirectory, Tuple};
use rand::{Rng, SeedableRng};
use serde_json::{json, Map, Value as Json};
use settings::{ConfigFile, Overrides, Settings};

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Runtime(String),
    /// Stdout was closed by the reader, e.g. `| head`.
    Closed,
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Runtime(_) => 2,
            CliError::Closed => 0,
        }
    }
}

type Res<T = ()> = Result<T, CliError>;

fn runtime(e: impl std::fmt::Display) -> CliError {
    CliError::Runtime(e.to_string())
}

fn write_err(e: std::io::Error) -> CliError {
    match e.kind() {
        std::io::ErrorKind::BrokenPipe => CliError::Closed,
        _ => runtime(e),
    }
}

fn usage(e: impl std::fmt::Display) -> CliError {
    CliError::Usage(e.to_string())
}

#[derive(Parser, Debug)]
#[command(name = "infonet", version, about = "Tuple-graph pub/sub over a simulated Kademlia network")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    cmd: Cmd,
}

/// All times are virtual microseconds.
#[derive(Args, Debug)]
struct Global {
    /// JSON file with default settings; flags win over it
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    peers: Option<usize>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Per-hop delay: MICROS or MIN..MAX
    #[arg(long, global = true)]
    latency: Option<Latency>,
    /// Standing-subscription re-poll period
    #[arg(long, global = true)]
    period: Option<u64>,
    /// Picture-frame freshness window for the Room DJ scenario
    #[arg(long, global = true)]
    tfresh: Option<u64>,
    /// Write the simulator event trace (JSON lines) here
    #[arg(long, global = true, value_name = "FILE")]
    trace: Option<PathBuf>,
    /// Name directory used to resolve names in templates and queries
    #[arg(long, global = true, value_name = "FILE")]
    names: Option<PathBuf>,
    /// Key file; published tuples are signed with it
    #[arg(long, global = true, value_name = "FILE")]
    key: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Generate a signing key pair
    Keygen {
        /// Write here instead of stdout
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Manage the name directory given by --names
    #[command(subcommand)]
    Names(NamesCmd),
    /// Publish tuples from a JSON-lines file into a fresh network
    Publish {
        file: PathBuf,
        /// Peer that publishes
        #[arg(long, default_value_t = 0)]
        via: usize,
    },
    /// Run a filter template or SUBSCRIBE query and print deliveries
    Subscribe {
        /// Template `[s, p, o, c]` or `SUBSCRIBE ?x WHERE ...`
        expr: String,
        /// Tuples to publish after subscribing
        #[arg(long, value_name = "FILE")]
        publish: Option<PathBuf>,
        /// Virtual time to run before printing; defaults to three periods
        #[arg(long)]
        duration: Option<u64>,
        /// Peer that holds the subscription
        #[arg(long, default_value_t = 0)]
        via: usize,
    },
    /// Run a bundled scenario and print its report as JSON
    #[command(subcommand)]
    Scenario(ScenarioCmd),
    /// Convert JSON lines to a binary packet file
    Encode { input: PathBuf, output: PathBuf },
    /// Convert a binary packet file to JSON lines
    Decode {
        input: PathBuf,
        /// Write here instead of stdout
        output: Option<PathBuf>,
    },
    /// Report how random tuples spread over evenly spaced peers
    Balance {
        #[arg(long, default_value_t = 10_000)]
        tuples: usize,
        /// Draw predicates from this many labels instead of uniformly
        #[arg(long)]
        predicates: Option<usize>,
    },
    /// Store a random workload, run wildcard lookups, check them and
    /// print a summary
    Sim {
        #[arg(long, default_value_t = 500)]
        tuples: usize,
        #[arg(long, default_value_t = 20)]
        lookups: usize,
        /// Wildcards per lookup template
        #[arg(long, default_value_t = 2)]
        wildcards: usize,
    },
}

#[derive(Subcommand, Debug)]
enum NamesCmd {
    /// Bind NAME to LABEL, or to a fresh random label
    Add { name: String, label: Option<Label> },
    /// Print every binding as a JSON line
    List,
}

#[derive(Subcommand, Debug)]
enum ScenarioCmd {
    /// The smart-room DJ: monitor, DJ, player and picture frame
    Roomdj {
        #[arg(long, value_enum, default_value_t = Script::Generated)]
        script: Script,
    },
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum Script {
    /// Randomly generated from the seed
    Generated,
    TwoVisitors,
    Empty,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Closed) => ExitCode::SUCCESS,
        Err(e) => {
            if let CliError::Usage(m) | CliError::Runtime(m) = &e {
                eprintln!("infonet: {m}");
            }
            ExitCode::from(e.code())
        }
    }
}

fn settings(g: &Global) -> Res<Settings> {
    let file = match &g.config {
        Some(p) => ConfigFile::load(p)?,
        None => ConfigFile::default(),
    };
    let flags = Overrides {
        peers: g.peers,
        seed: g.seed,
        latency: g.latency,
        period: g.period,
        tfresh: g.tfresh,
        trace: g.trace.clone(),
        names: g.names.clone(),
        key: g.key.clone(),
    };
    Settings::resolve(flags, file)
}

fn run(cli: Cli) -> Res {
    let s = settings(&cli.global)?;
    let mut out = std::io::stdout().lock();
    match cli.cmd {
        Cmd::Keygen { out: path } => keygen(path.as_deref(), &mut out),
        Cmd::Names(cmd) => names(&s, cmd, &mut out),
        Cmd::Publish { file, via } => publish(&s, &file, via, &mut out),
        Cmd::Subscribe { expr, publish, duration, via } => subscribe(&s, &expr, publish.as_deref(), duration, via, &mut out),
        Cmd::Scenario(ScenarioCmd::Roomdj { script }) => roomdj(&s, script, &mut out),
        Cmd::Encode { input, output } => encode(&input, &output),
        Cmd::Decode { input, output } => decode(&input, output.as_deref(), &mut out),
        Cmd::Balance { tuples, predicates } => balance(&s, tuples, predicates, &mut out),
        Cmd::Sim { tuples, lookups, wildcards } => sim_summary(&s, tuples, lookups, wildcards, &mut out),
    }
}

fn line(out: &mut impl Write, j: &Json) -> Res {
    writeln!(out, "{j}").map_err(write_err)
}

fn read(path: &Path) -> Res<String> {
    std::fs::read_to_string(path).map_err(|e| runtime(format!("{}: {e}", path.display())))
}

fn load_names(s: &Settings) -> Res<NameDirectory> {
    match &s.names {
        Some(p) if p.exists() => NameDirectory::load(p).map_err(|e| usage(format!("{}: {e}", p.display()))),
        _ => Ok(NameDirectory::new()),
    }
}

fn load_key(s: &Settings) -> Res<Option<KeyPair>> {
    let Some(p) = &s.key else { return Ok(None) };
    let j: Json = serde_json::from_str(&read(p)?).map_err(|e| usage(format!("{}: {e}", p.display())))?;
    KeyPair::from_json(&j).map(Some).map_err(|e| usage(format!("{}: {e}", p.display())))
}

/// Parse a JSON-lines file. Bad lines are reported on `out` and skipped.
fn load_tuples(path: &Path, out: &mut impl Write) -> Res<(Vec<(usize, Tuple)>, usize)> {
    let mut good = Vec::new();
    let mut bad = 0;
    for (n, r) in parse_jsonl(&read(path)?) {
        match r {
            Ok(t) => good.push((n, t)),
            Err(e) => {
                bad += 1;
                line(out, &json!({ "line": n, "error": e.to_string() }))?;
            }
        }
    }
    Ok((good, bad))
}

fn spawn(s: &Settings) -> Sim {
    spawn_network(s.sim.clone())
}

fn finish(s: &Settings, sim: &Sim) -> Res {
    if let Some(p) = &s.trace {
        let f = std::fs::File::create(p).map_err(|e| runtime(format!("{}: {e}", p.display())))?;
        sim.write_trace(std::io::BufWriter::new(f)).map_err(runtime)?;
    }
    Ok(())
}

fn check_peer(s: &Settings, via: usize) -> Res {
    if via >= s.sim.peers {
        return Err(usage(format!("--via {via}: the network has {} peers", s.sim.peers)));
    }
    Ok(())
}

fn keygen(path: Option<&Path>, out: &mut impl Write) -> Res {
    let kp = KeyPair::generate(&mut rand::thread_rng());
    let text = serde_json::to_string_pretty(&kp.to_json()).map_err(runtime)?;
    match path {
        Some(p) => std::fs::write(p, text + "\n").map_err(|e| runtime(format!("{}: {e}", p.display()))),
        None => writeln!(out, "{text}").map_err(write_err),
    }
}

fn names(s: &Settings, cmd: NamesCmd, out: &mut impl Write) -> Res {
    let mut dir = load_names(s)?;
    match cmd {
        NamesCmd::Add { name, label } => {
            let path = s.names.as_ref().ok_or_else(|| usage("names add needs --names FILE"))?;
            let label = label.unwrap_or_else(|| infonet::new_label(&mut rand::thread_rng()));
            dir.insert(name.clone(), label).map_err(usage)?;
            dir.save(path).map_err(runtime)?;
            line(out, &json!({ "name": name, "label": label }))
        }
        NamesCmd::List => {
            for (name, label) in dir.iter() {
                line(out, &json!({ "name": name, "label": label }))?;
            }
            Ok(())
        }
    }
}

fn publish(s: &Settings, file: &Path, via: usize, out: &mut impl Write) -> Res {
    check_peer(s, via)?;
    let kp = load_key(s)?;
    let (tuples, bad) = load_tuples(file, out)?;
    let mut sim = spawn(s);
    let mut failed = 0;
    let (lines, tuples): (Vec<usize>, Vec<Tuple>) = tuples.into_iter().unzip();
    for (n, r) in lines.into_iter().zip(sim.node(via).publish(tuples, kp.as_ref())) {
        match r {
            Ok(r) => line(
                out,
                &json!({
                    "line": n,
                    "hash": r.hash.to_string(),
                    "replicas": r.replicas.len(),
                    "signed": r.tuple.signature().is_some(),
                }),
            )?,
            Err(e) => {
                failed += 1;
                line(out, &json!({ "line": n, "error": e.to_string() }))?;
            }
        }
    }
    finish(s, &sim)?;
    if failed > 0 {
        Err(runtime(format!("{failed} tuple(s) could not be stored")))
    } else if bad > 0 {
        Err(usage(format!("{bad} malformed line(s) skipped")))
    } else {
        Ok(())
    }
}

fn binding_json(b: &Binding) -> Json {
    Json::Object(b.iter().map(|(k, v)| (k.to_owned(), node_to_json(v))).collect::<Map<_, _>>())
}

fn subscribe(
    s: &Settings,
    expr: &str,
    publish: Option<&Path>,
    duration: Option<u64>,
    via: usize,
    out: &mut impl Write,
) -> Res {
    check_peer(s, via)?;
    let names = load_names(s)?;
    let kp = load_key(s)?;
    let mut sim = spawn(s);
    let is_query = expr.trim_start().get(..9).is_some_and(|w| w.eq_ignore_ascii_case("SUBSCRIBE"));
    let session = if is_query {
        sim.node(via).subscribe_query(expr, &names)
    } else {
        let f = parse_template(expr, &names).map_err(usage)?;
        sim.node(via).subscribe_template(&f)
    };
    let session = session.map_err(|e| match e {
        infonet::node::NodeError::Query(q) => usage(q),
        other => runtime(other),
    })?;
    if let Some(p) = publish {
        let (tuples, _) = load_tuples(p, &mut std::io::stderr())?;
        for r in sim.node(0).publish(tuples.into_iter().map(|(_, t)| t), kp.as_ref()) {
            r.map_err(runtime)?;
        }
    }
    sim.run_for(duration.unwrap_or(3 * s.sim.period)).map_err(runtime)?;
    let mut node = sim.node(via);
    for d in node.poll(session, usize::MAX).map_err(runtime)? {
        match d {
            Delivery::Tuple(t) => line(out, &tuple_to_json(&t))?,
            Delivery::Binding(b) => line(out, &binding_json(&b))?,
        }
    }
    let err = node.session_error(session).map_err(runtime)?;
    finish(s, &sim)?;
    match err {
        Some(e) => Err(runtime(e)),
        None => Ok(()),
    }
}

fn roomdj(s: &Settings, script: Script, out: &mut impl Write) -> Res {
    let mut cfg = RoomDjConfig::new(s.sim.seed);
    cfg.script = match script {
        Script::Generated => ScenarioScript::generate(s.sim.seed),
        Script::TwoVisitors => ScenarioScript::two_visitors(),
        Script::Empty => ScenarioScript::empty_room(),
    };
    // Only settings the user actually changed replace the scenario's own.
    let dflt = infonet::sim::SimConfig::default();
    cfg.sim.peers = s.sim.peers;
    cfg.sim.latency = s.sim.latency;
    cfg.sim.drop_rate = s.sim.drop_rate;
    cfg.sim.trace = s.sim.trace;
    if s.sim.period != dflt.period {
        cfg.sim.period = s.sim.period;
    }
    cfg.t_fresh = s.tfresh;
    let (report, sim) = run_roomdj(&cfg).map_err(runtime)?;
    let text = serde_json::to_string_pretty(&report).map_err(runtime)?;
    writeln!(out, "{text}").map_err(write_err)?;
    finish(s, &sim)
}

fn encode(input: &Path, output: &Path) -> Res {
    let mut tuples = Vec::new();
    for (_, r) in parse_jsonl(&read(input)?) {
        tuples.push(r.map_err(|e| usage(format!("{}: {e}", input.display())))?);
    }
    std::fs::write(output, encode_stream(&tuples)).map_err(|e| runtime(format!("{}: {e}", output.display())))
}

fn decode(input: &Path, output: Option<&Path>, out: &mut impl Write) -> Res {
    let bytes = std::fs::read(input).map_err(|e| runtime(format!("{}: {e}", input.display())))?;
    let mut text = String::new();
    for (i, r) in PacketStream::new(&bytes).enumerate() {
        let t = r.map_err(|e| usage(format!("{}: packet {}: {e}", input.display(), i + 1)))?;
        text.push_str(&tuple_to_json(&t).to_string());
        text.push('\n');
    }
    match output {
        Some(p) => std::fs::write(p, text).map_err(|e| runtime(format!("{}: {e}", p.display()))),
        None => out.write_all(text.as_bytes()).map_err(write_err),
    }
}

fn balance(s: &Settings, tuples: usize, predicates: Option<usize>, out: &mut impl Write) -> Res {
    let mut rng = rand::rngs::StdRng::seed_from_u64(s.sim.seed);
    let ts = random_tuples(&mut rng, &WorkloadSpec { tuples, predicates, ..Default::default() });
    let r = address_balance_report(&ts, s.sim.peers);
    line(
        out,
        &json!({
            "peers": r.peers,
            "tuples": r.tuples,
            "max": r.max,
            "mean": r.mean,
            "max_over_mean": r.max_over_mean,
            "empty_peers": r.empty_peers,
        }),
    )
}

fn sim_summary(s: &Settings, tuples: usize, lookups: usize, wildcards: usize, out: &mut impl Write) -> Res {
    let mut sim = spawn(s);
    let mut rng = rand::rngs::StdRng::seed_from_u64(s.sim.seed);
    let ts = random_tuples(&mut rng, &WorkloadSpec { tuples, ..Default::default() });
    let peers = s.sim.peers;
    let mut failures = 0;
    for t in &ts {
        if sim.store(rng.gen_range(0..peers), t.clone()).is_err() {
            failures += 1;
        }
    }
    let mut exact = 0;
    let mut found = 0;
    let mut errors = 0;
    if !ts.is_empty() {
        for _ in 0..lookups {
            let f = random_template(&mut rng, &ts, wildcards.min(4));
            match sim.lookup_wildcard(rng.gen_range(0..peers), &pattern_address(&f)) {
                Ok(r) => {
                    let got: BTreeSet<Tuple> = r.tuples.into_iter().collect();
                    found += got.len();
                    exact += usize::from(got == sim.global_oracle_scan(&f));
                }
                Err(_) => errors += 1,
            }
        }
    }
    let st = sim.stats();
    line(
        out,
        &json!({
            "peers": peers,
            "join_failures": sim.join_failures(),
            "tuples": ts.len(),
            "store_failures": failures,
            "lookups": if ts.is_empty() { 0 } else { lookups },
            "exact": exact,
            "lookup_errors": errors,
            "found": found,
            "virtual_time": sim.now(),
            "events": st.events,
            "requests": st.requests_sent,
            "responses": st.responses_sent,
            "dropped": st.messages_dropped,
            "timeouts": st.timeouts,
        }),
    )?;
    finish(s, &sim)
}
